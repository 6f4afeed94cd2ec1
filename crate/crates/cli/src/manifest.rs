use chrono::{DateTime, SecondsFormat, Utc};

/// Provenance record written as the first line of every CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub seed: u64,
    pub artifact_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters: Vec::new(),
            seed,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: utc_timestamp(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment_line(&self) -> String {
        let mut line = format!(
            "# manifest: command={} seed={} version={} timestamp={}",
            self.command, self.seed, self.artifact_version, self.timestamp
        );
        for (k, v) in &self.parameters {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set (reproducible builds).
pub fn utc_timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}
