use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One module report inside the envelope.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub kind: String,
    pub pass: bool,
    pub data: Value,
}

impl Report {
    pub fn new<T: Serialize>(kind: &str, pass: bool, data: &T) -> anyhow::Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            pass,
            data: serde_json::to_value(data)?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: CommandEcho,
    pub reports: Vec<Report>,
    pub notes: Vec<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

impl Envelope {
    pub fn new(name: &str, args: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: CommandEcho {
                name: name.to_string(),
                args,
            },
            reports: Vec::new(),
            notes: Vec::new(),
            pass: false,
            error: None,
            duration_seconds: None,
        }
    }

    pub fn push(&mut self, report: Report) {
        self.reports.push(report);
    }

    /// Overall pass is the conjunction of the member reports (false when empty or errored).
    pub fn finish(&mut self) {
        self.pass = self.error.is_none() && !self.reports.is_empty() && self.reports.iter().all(|r| r.pass);
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> anyhow::Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }
}
