//! Run metadata written next to every CSV.

use serde_json::{json, Value};

/// Where a recorded parameter value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Quoted with the figure being reproduced.
    Stated,
    /// Filled in here where no value is stated.
    Chosen,
    /// Supplied on the command line or in the config.
    User,
    /// Computed from other parameters.
    Derived,
}

impl Provenance {
    fn tag(self) -> &'static str {
        match self {
            Provenance::Stated => "stated",
            Provenance::Chosen => "chosen",
            Provenance::User => "user",
            Provenance::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Meta {
    command: String,
    seed: Option<u64>,
    params: Vec<Value>,
    gaps: Vec<String>,
    notes: Vec<String>,
}

impl Meta {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            seed,
            ..Default::default()
        }
    }

    pub fn param(&mut self, name: &str, value: impl Into<Value>, origin: Provenance) -> &mut Self {
        self.params
            .push(json!({"name": name, "value": value.into(), "origin": origin.tag()}));
        self
    }

    pub fn gap(&mut self, text: impl Into<String>) -> &mut Self {
        self.gaps.push(text.into());
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn finish(&self, files: &[String], results: Value) -> Value {
        json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "units": "frequencies and rates in units of omega_b",
            "seed": self.seed,
            "parameters": self.params,
            "gaps": self.gaps,
            "notes": self.notes,
            "results": results,
            "files": files,
        })
    }
}
