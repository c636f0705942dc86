//! Renders a puzzle instance plus its public history into the prompt a
//! responder sees. The wording lives in external template files and a
//! per-setting phrase table; this module only assembles and checks them.

mod leakage;
mod names;

pub use leakage::{scan_leakage, LeakageHit};
pub use names::{assign_names, name_rng, NamePool};

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::epistemic::{Answer, BoundType};
use crate::instance::PuzzleInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NarrativeError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown setting \"{0}\"")]
    UnknownSetting(String),
    #[error("setting \"{id}\" is invalid: {message}")]
    BadSetting { id: String, message: String },
    #[error("name pool is invalid: {0}")]
    BadPool(String),
    #[error("template \"{template}\" has an unresolved placeholder {{{placeholder}}}")]
    UnresolvedPlaceholder { template: String, placeholder: String },
    #[error("history too short: round {round} needs {needed} prior rounds, trace has {have}")]
    TraceTooShort { round: usize, needed: usize, have: usize },
    #[error("instance {id}: prompt leaks the queried agent's status: {sentence}")]
    Leakage { id: String, sentence: String },
    #[error("instance {id}: {message}")]
    BadInstance { id: String, message: String },
}

/// Phrase table for one narrative surface (classic or recast).
#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
pub struct Setting {
    pub id: String,
    pub role: String,
    pub role_plural: String,
    pub status_positive: String,
    pub status_negative: String,
    pub status_alternative: String,
    pub assert_positive: String,
    pub assert_negative: String,
    pub count_predicate: String,
    pub announcer: String,
    pub question: String,
}

impl Setting {
    fn validate(&self) -> Result<(), NarrativeError> {
        let slots = [
            ("id", &self.id),
            ("role", &self.role),
            ("role_plural", &self.role_plural),
            ("status_positive", &self.status_positive),
            ("status_negative", &self.status_negative),
            ("status_alternative", &self.status_alternative),
            ("assert_positive", &self.assert_positive),
            ("assert_negative", &self.assert_negative),
            ("count_predicate", &self.count_predicate),
            ("announcer", &self.announcer),
            ("question", &self.question),
        ];
        for (slot, value) in slots {
            if value.trim().is_empty() {
                return Err(NarrativeError::BadSetting {
                    id: self.id.clone(),
                    message: format!("slot \"{slot}\" is empty"),
                });
            }
        }
        if self.status_positive == self.status_negative {
            return Err(NarrativeError::BadSetting {
                id: self.id.clone(),
                message: "the two status phrases must be distinct".into(),
            });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct SettingsFile {
    settings: Vec<Setting>,
}

/// All known settings, keyed by id.
#[derive(Debug, Clone)]
pub struct SettingsTable {
    settings: BTreeMap<String, Setting>,
}

impl SettingsTable {
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/settings.toml"), "builtin settings")
            .expect("builtin settings parse")
    }

    pub fn load(path: &Path) -> Result<Self, NarrativeError> {
        let text = std::fs::read_to_string(path).map_err(|e| NarrativeError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, origin: &str) -> Result<Self, NarrativeError> {
        let file: SettingsFile = toml::from_str(text).map_err(|e| NarrativeError::Io {
            path: origin.to_string(),
            message: format!("settings do not parse: {e}"),
        })?;
        let mut settings = BTreeMap::new();
        for setting in file.settings {
            setting.validate()?;
            settings.insert(setting.id.clone(), setting);
        }
        Ok(Self { settings })
    }

    pub fn get(&self, id: &str) -> Result<&Setting, NarrativeError> {
        self.settings.get(id).ok_or_else(|| NarrativeError::UnknownSetting(id.to_string()))
    }
}

/// How the who-sees-whom relation is rendered for non-classic matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationStyle {
    /// Raw 0/1 matrix rows plus an index legend.
    #[default]
    Matrix,
    /// One "A can see B's status" sentence per pair.
    Sentences,
}

const TEMPLATE_NAMES: [&str; 16] = [
    "main",
    "protocol",
    "example",
    "identity",
    "announcement",
    "observe_line",
    "observe_none",
    "history_round",
    "history_item",
    "history_none",
    "visibility_full",
    "visibility_matrix",
    "visibility_pair",
    "visibility_self",
    "visibility_sentences",
    "answer_instructions",
];

/// The named text snippets a prompt is assembled from. `builtin()` embeds
/// the shipped files; `load()` reads the same file names from a directory.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<String, String>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        macro_rules! embed {
            ($($name:literal),+ $(,)?) => {
                $(templates.insert(
                    $name.to_string(),
                    include_str!(concat!("../../templates/", $name, ".txt"))
                        .trim_end()
                        .to_string(),
                );)+
            };
        }
        embed!(
            "main",
            "protocol",
            "example",
            "identity",
            "announcement",
            "observe_line",
            "observe_none",
            "history_round",
            "history_item",
            "history_none",
            "visibility_full",
            "visibility_matrix",
            "visibility_pair",
            "visibility_self",
            "visibility_sentences",
            "answer_instructions",
        );
        Self { templates }
    }

    pub fn load(dir: &Path) -> Result<Self, NarrativeError> {
        let mut templates = BTreeMap::new();
        for name in TEMPLATE_NAMES {
            let path = dir.join(format!("{name}.txt"));
            let text = std::fs::read_to_string(&path).map_err(|e| NarrativeError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            templates.insert(name.to_string(), text.trim_end().to_string());
        }
        Ok(Self { templates })
    }

    fn get(&self, name: &str) -> &str {
        self.templates.get(name).map(String::as_str).unwrap_or_default()
    }

    fn fill(&self, name: &str, vars: &[(&str, &str)]) -> Result<String, NarrativeError> {
        fill_template(name, self.get(name), vars)
    }
}

/// Substitutes `{key}` slots; any slot left over is an error, so a template
/// can never silently ship a hole.
fn fill_template(
    template_name: &str,
    template: &str,
    vars: &[(&str, &str)],
) -> Result<String, NarrativeError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else {
            return Err(NarrativeError::UnresolvedPlaceholder {
                template: template_name.to_string(),
                placeholder: after.chars().take(16).collect(),
            });
        };
        let key = &after[..close];
        match vars.iter().find(|(k, _)| *k == key) {
            Some((_, value)) => out.push_str(value),
            None => {
                return Err(NarrativeError::UnresolvedPlaceholder {
                    template: template_name.to_string(),
                    placeholder: key.to_string(),
                })
            }
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// A rendered prompt plus the bookkeeping the harness stores with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub text: String,
    /// How many history rounds the prompt shows (always `round - 1`).
    pub rounds_rendered: usize,
    pub instance_id: String,
}

/// Everything rendering needs besides the instance itself.
#[derive(Debug, Clone)]
pub struct NarrativeContext {
    pub templates: TemplateSet,
    pub settings: SettingsTable,
    pub observation_style: ObservationStyle,
}

impl Default for NarrativeContext {
    fn default() -> Self {
        Self {
            templates: TemplateSet::builtin(),
            settings: SettingsTable::builtin(),
            observation_style: ObservationStyle::default(),
        }
    }
}

/// Renders rounds `1..round` of public answers, one line per round, in
/// fixed agent order; round 1 gets an explicit empty-history line.
pub fn render_history(
    trace: &[Vec<Answer>],
    round: usize,
    names: &[String],
    queried: usize,
    templates: &TemplateSet,
) -> Result<String, NarrativeError> {
    let needed = round.saturating_sub(1);
    if trace.len() < needed {
        return Err(NarrativeError::TraceTooShort { round, needed, have: trace.len() });
    }
    if needed == 0 {
        return templates.fill("history_none", &[]);
    }
    let mut lines = Vec::with_capacity(needed);
    for (idx, vector) in trace.iter().take(needed).enumerate() {
        let mut items = Vec::with_capacity(vector.len());
        for (agent, answer) in vector.iter().enumerate() {
            let display_name = if agent == queried {
                format!("{} (you)", names[agent])
            } else {
                names[agent].clone()
            };
            items.push(templates.fill(
                "history_item",
                &[("name", display_name.as_str()), ("answer", answer.surface())],
            )?);
        }
        let joined = items.join("; ");
        let round_no = (idx + 1).to_string();
        lines.push(
            templates
                .fill("history_round", &[("r", round_no.as_str()), ("answers", joined.as_str())])?,
        );
    }
    Ok(lines.join("\n"))
}

fn is_classic_matrix(inst: &PuzzleInstance) -> bool {
    crate::epistemic::ObservationMatrix::full_except_diagonal(inst.n)
        .map(|full| full == inst.obs)
        .unwrap_or(false)
}

fn render_visibility(
    inst: &PuzzleInstance,
    setting: &Setting,
    style: ObservationStyle,
    templates: &TemplateSet,
) -> Result<String, NarrativeError> {
    if is_classic_matrix(inst) {
        return templates.fill("visibility_full", &[("role", setting.role.as_str())]);
    }
    match style {
        ObservationStyle::Matrix => {
            let matrix = inst
                .obs
                .rows()
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                    format!("Row {i}: {}", cells.join(" "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            let legend = inst
                .names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    if i == inst.queried {
                        format!("{i} = {name} (you)")
                    } else {
                        format!("{i} = {name}")
                    }
                })
                .collect::<Vec<_>>()
                .join(", ");
            let n_minus_one = (inst.n - 1).to_string();
            templates.fill(
                "visibility_matrix",
                &[
                    ("role", setting.role.as_str()),
                    ("role_plural", setting.role_plural.as_str()),
                    ("n_minus_one", n_minus_one.as_str()),
                    ("legend", legend.as_str()),
                    ("matrix", matrix.as_str()),
                ],
            )
        }
        ObservationStyle::Sentences => {
            let mut sentences = Vec::new();
            for i in 0..inst.n {
                for j in 0..inst.n {
                    if !inst.obs.observes(i, j) {
                        continue;
                    }
                    let line = if i == j {
                        templates
                            .fill("visibility_self", &[("observer", inst.names[i].as_str())])?
                    } else {
                        templates.fill(
                            "visibility_pair",
                            &[
                                ("observer", inst.names[i].as_str()),
                                ("observed", inst.names[j].as_str()),
                            ],
                        )?
                    };
                    sentences.push(line);
                }
            }
            let joined = sentences.join("\n");
            templates.fill(
                "visibility_sentences",
                &[("role", setting.role.as_str()), ("sentences", joined.as_str())],
            )
        }
    }
}

/// Renders the full prompt for an instance given the solver's public
/// history, then runs the leakage scanner over the result.
///
/// Section order: protocol (with the visibility relation), response-format
/// example, identity, public announcement, the queried agent's private
/// observations, public history, and the round question.
pub fn render_prompt(
    inst: &PuzzleInstance,
    trace: &[Vec<Answer>],
    ctx: &NarrativeContext,
) -> Result<PromptBundle, NarrativeError> {
    let setting = ctx.settings.get(&inst.setting)?;
    setting.validate()?;
    if inst.names.len() != inst.n {
        return Err(NarrativeError::BadInstance {
            id: inst.id.clone(),
            message: format!("{} names for {} agents", inst.names.len(), inst.n),
        });
    }
    if inst.obs.observes(inst.queried, inst.queried) {
        return Err(NarrativeError::Leakage {
            id: inst.id.clone(),
            sentence: "the queried agent observes its own status".into(),
        });
    }

    let templates = &ctx.templates;
    let n = inst.n.to_string();
    let queried_name = inst.names[inst.queried].as_str();

    let visibility = render_visibility(inst, setting, ctx.observation_style, templates)?;
    let protocol = templates.fill(
        "protocol",
        &[
            ("n", n.as_str()),
            ("role", setting.role.as_str()),
            ("role_plural", setting.role_plural.as_str()),
            ("status_alternative", setting.status_alternative.as_str()),
            ("visibility", visibility.as_str()),
            ("announcer", setting.announcer.as_str()),
            ("count_predicate", setting.count_predicate.as_str()),
            ("question", setting.question.as_str()),
        ],
    )?;
    let format_example = templates.fill(
        "example",
        &[
            ("role_plural", setting.role_plural.as_str()),
            ("count_predicate", setting.count_predicate.as_str()),
            ("assert_positive", setting.assert_positive.as_str()),
            ("question", setting.question.as_str()),
        ],
    )?;
    let identity = templates.fill(
        "identity",
        &[
            ("queried_name", queried_name),
            ("n", n.as_str()),
            ("role_plural", setting.role_plural.as_str()),
        ],
    )?;
    let direction = match inst.bound.bound_type {
        BoundType::Lower => "least",
        BoundType::Upper => "most",
    };
    let q = inst.bound.value.to_string();
    let announcement = templates.fill(
        "announcement",
        &[
            ("announcer", setting.announcer.as_str()),
            ("direction", direction),
            ("q", q.as_str()),
            ("n", n.as_str()),
            ("role_plural", setting.role_plural.as_str()),
            ("count_predicate", setting.count_predicate.as_str()),
        ],
    )?;

    let observed: Vec<usize> =
        inst.obs.observed_agents(inst.queried).into_iter().filter(|&j| j != inst.queried).collect();
    let observations = if observed.is_empty() {
        templates.fill("observe_none", &[("role", setting.role.as_str())])?
    } else {
        let mut lines = Vec::with_capacity(observed.len());
        for j in observed {
            let assertion = if inst.statuses.status(j) {
                setting.assert_positive.as_str()
            } else {
                setting.assert_negative.as_str()
            };
            lines.push(templates.fill(
                "observe_line",
                &[("name", inst.names[j].as_str()), ("assert_status", assertion)],
            )?);
        }
        lines.join("\n")
    };

    let history = render_history(trace, inst.round, &inst.names, inst.queried, templates)?;
    let round = inst.round.to_string();
    let answer_instructions = templates.fill("answer_instructions", &[])?;

    let text = templates.fill(
        "main",
        &[
            ("protocol", protocol.as_str()),
            ("format_example", format_example.as_str()),
            ("identity", identity.as_str()),
            ("announcement", announcement.as_str()),
            ("observations", observations.as_str()),
            ("history", history.as_str()),
            ("round", round.as_str()),
            ("question", setting.question.as_str()),
            ("answer_instructions", answer_instructions.as_str()),
        ],
    )?;

    if let Some(hit) = scan_leakage(&text, queried_name, setting).into_iter().next() {
        return Err(NarrativeError::Leakage { id: inst.id.clone(), sentence: hit.sentence });
    }

    Ok(PromptBundle {
        text,
        rounds_rendered: inst.round - 1,
        instance_id: inst.id.clone(),
    })
}
