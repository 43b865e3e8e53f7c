//! Run reports. The text form is canonical; the JSON form carries the same
//! fields in the same order.

use std::fmt;

use etale_entropy::etale::{EvalConfig, Provenance};
use etale_entropy::Bracket;
use serde::{Serialize, Serializer};

fn tag_text<S: Serializer>(tag: &Provenance, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(tag)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Item {
    Value {
        name: String,
        lower: f64,
        upper: f64,
        #[serde(serialize_with = "tag_text")]
        tag: Provenance,
    },
    Fact {
        name: String,
        text: String,
    },
    Caveat {
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub id: String,
    pub op: String,
    pub ok: bool,
    pub error: Option<String>,
    pub items: Vec<Item>,
}

impl TaskReport {
    pub fn new(id: impl Into<String>, op: impl Into<String>) -> Self {
        TaskReport { id: id.into(), op: op.into(), ok: true, error: None, items: Vec::new() }
    }

    pub fn value(&mut self, name: impl Into<String>, b: Bracket, tag: Provenance) {
        self.items.push(Item::Value { name: name.into(), lower: b.lower, upper: b.upper, tag });
    }

    pub fn fact(&mut self, name: impl Into<String>, text: impl fmt::Display) {
        self.items.push(Item::Fact { name: name.into(), text: text.to_string() });
    }

    pub fn caveat(&mut self, text: impl Into<String>) {
        self.items.push(Item::Caveat { text: text.into() });
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.ok = false;
        if self.error.is_none() {
            self.error = Some(reason.into());
        }
    }

    /// Look up a value by name.
    pub fn get_value(&self, name: &str) -> Option<(Bracket, Provenance)> {
        self.items.iter().find_map(|i| match i {
            Item::Value { name: n, lower, upper, tag } if n == name => Some((Bracket::new(*lower, *upper), *tag)),
            _ => None,
        })
    }

    pub fn get_fact(&self, name: &str) -> Option<&str> {
        self.items.iter().find_map(|i| match i {
            Item::Fact { name: n, text } if n == name => Some(text.as_str()),
            _ => None,
        })
    }
}

/// Evaluator settings as recorded in the report header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub tol: f64,
    pub guard_band: f64,
    pub horizon: u32,
    pub epsilon: f64,
    pub grid: u32,
    pub sample_budget: usize,
    pub fiber_bound: u64,
    pub max_subsets: usize,
    pub max_states: usize,
    pub max_alphabet: usize,
}

impl Settings {
    pub fn from_config(cfg: &EvalConfig) -> Self {
        Settings {
            tol: cfg.tol,
            guard_band: cfg.guard_band,
            horizon: cfg.bowen.horizon,
            epsilon: cfg.bowen.eps,
            grid: cfg.bowen.grid_bits,
            sample_budget: cfg.sample_budget,
            fiber_bound: cfg.fiber_bound,
            max_subsets: cfg.max_subsets,
            max_states: cfg.caps.max_states,
            max_alphabet: cfg.caps.max_alphabet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub settings: Settings,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.tasks.iter().all(|t| t.ok)
    }

    pub fn task(&self, id: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.settings;
        writeln!(f, "{} {}", self.tool, self.version)?;
        writeln!(f, "seed {}", self.seed)?;
        writeln!(
            f,
            "settings tol={} guard_band={} horizon={} epsilon={} grid={} sample_budget={} fiber_bound={} max_subsets={} max_states={} max_alphabet={}",
            s.tol, s.guard_band, s.horizon, s.epsilon, s.grid, s.sample_budget, s.fiber_bound, s.max_subsets, s.max_states, s.max_alphabet
        )?;
        for t in &self.tasks {
            writeln!(f)?;
            writeln!(f, "task {} {} {}", t.id, t.op, if t.ok { "ok" } else { "FAILED" })?;
            for item in &t.items {
                match item {
                    Item::Value { name, lower, upper, tag } => {
                        writeln!(f, "  value  {name} {} {tag}", Bracket::new(*lower, *upper))?
                    }
                    Item::Fact { name, text } => writeln!(f, "  fact   {name}: {text}")?,
                    Item::Caveat { text } => writeln!(f, "  caveat {text}")?,
                }
            }
            if let Some(e) = &t.error {
                writeln!(f, "  error  {e}")?;
            }
        }
        Ok(())
    }
}
