use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

/// What a subcommand produced: its checks, the files it wrote and any
/// command-specific values.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub details: serde_json::Map<String, Value>,
    /// The produced artifact when no `--out` path was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}

impl RunReport {
    pub fn new(command: &str, inputs_digest: String, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest,
            seed,
            checks: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Map::new(),
            result: None,
        }
    }

    /// Records `residual ≤ bound`.
    pub fn bound(&mut self, name: &str, residual: f64, bound: f64) {
        let residual = sanitize(residual);
        self.checks.push(Check { name: name.to_string(), pass: residual <= bound, residual });
    }

    /// Records a predicate together with the residual that decided it.
    pub fn flag(&mut self, name: &str, pass: bool, residual: f64) {
        self.checks.push(Check { name: name.to_string(), pass, residual: sanitize(residual) });
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_string(), value);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn human(&self) -> String {
        let mut out = format!("command: {}\ninputs:  sha256 {}\nseed:    {}\n", self.command, self.inputs_digest, self.seed);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            out.push_str(&format!("  {verdict}  {:<width$}  {:.3e}\n", c.name, c.residual));
        }
        for (k, v) in &self.details {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        for path in &self.outputs {
            out.push_str(&format!("wrote {path}\n"));
        }
        out
    }
}

/// Residuals are reported as finite nonnegative numbers; infinity means
/// "could not be evaluated" and is capped.
fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.abs().min(f64::MAX)
    }
}
