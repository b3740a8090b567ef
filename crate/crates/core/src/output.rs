//! Machine-readable rendering of results as CSV or JSON.
//!
//! Reals are written with 17 significant digits in scientific notation, so
//! every value parses back to the identical double. Key order is fixed and no
//! timestamps are emitted: identical inputs render to identical bytes.

use std::fmt::Write as _;

use crate::equilibrium::{CurveSamples, EquilibriumSolution};
use crate::model::GameParams;
use crate::simulator::{SimulationConfig, SimulationReport};
use crate::verifier::BestResponseScan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A scalar field in a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Text(String),
    Null,
}

/// 17 significant digits, e.g. `5.3047771850630606e-1`. Non-finite values
/// render as `NaN`, `inf` and `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) => fmt_real(*v),
            Value::Text(s) => csv_quote(s),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) if v.is_finite() => fmt_real(*v),
            Value::Real(_) | Value::Null => "null".to_owned(),
            Value::Text(s) => json_quote(s),
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn json_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Ordered key/value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, key: &'static str, value: Value) -> Self {
        self.fields.push((key, value));
        self
    }

    pub fn int(self, key: &'static str, v: u64) -> Self {
        self.push(key, Value::Int(v))
    }

    pub fn real(self, key: &'static str, v: f64) -> Self {
        self.push(key, Value::Real(v))
    }

    pub fn fields(&self) -> &[(&'static str, Value)] {
        &self.fields
    }

    /// Header line plus one data line, each newline-terminated.
    pub fn to_csv(&self) -> String {
        let header: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
        let row: Vec<String> = self.fields.iter().map(|(_, v)| v.csv()).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    /// Single-line JSON object, newline-terminated.
    pub fn to_json(&self) -> String {
        let body: Vec<String> = self.fields.iter().map(|(k, v)| format!("{}:{}", json_quote(k), v.json())).collect();
        format!("{{{}}}\n", body.join(","))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn params_record(params: &GameParams) -> Record {
    Record::new().int("n", params.n()).int("k", params.k()).real("p", params.p())
}

pub fn solution_record(params: &GameParams, s: &EquilibriumSolution) -> Record {
    params_record(params)
        .real("q_bar", s.q_bar)
        .real("residual", s.residual)
        .real("e_residual", s.e_residual)
        .int("iterations", u64::from(s.iterations))
        .real("bracket_lo", s.bracket_lo)
        .real("bracket_hi", s.bracket_hi)
        .real("trust_excess", s.trust_excess)
        .real("ln_trust_excess", s.ln_trust_excess)
}

pub fn simulation_record(config: &SimulationConfig, report: &SimulationReport) -> Record {
    params_record(&config.params)
        .real("q", config.profile.q())
        .real("r", config.profile.r())
        .int("rounds", config.rounds)
        .int("max_turns", config.max_turns)
        .int("rounds_completed", report.rounds_completed)
        .int("capped_rounds", report.capped_rounds)
        .real("focal_mean_payoff", report.focal_mean_payoff)
        .real("focal_std_error", report.focal_std_error)
        .real("mean_finish_turn", report.mean_finish_turn)
        .int("seed_echo", report.seed_echo)
        .push("warning", report.warning().map_or(Value::Null, Value::Text))
}

pub fn scan_summary_record(scan: &BestResponseScan) -> Record {
    Record::new().real("q", scan.q_fixed).real("argmax_r", scan.argmax_r).real("max_payoff", scan.max_payoff)
}

/// Two-column CSV with the curve's axis names as header.
pub fn curve_csv(curve: &CurveSamples) -> String {
    let mut out = format!("{},{}\n", curve.abscissa_name, curve.ordinate_name);
    let integral = matches!(curve.abscissa_name.as_str(), "n" | "k");
    for &(x, y) in &curve.points {
        let x = if integral { format!("{}", x as u64) } else { fmt_real(x) };
        let _ = writeln!(out, "{x},{}", fmt_real(y));
    }
    out
}

pub fn scan_csv(scan: &BestResponseScan) -> String {
    let mut out = String::from("r,payoff\n");
    for &(r, v) in &scan.grid {
        let _ = writeln!(out, "{},{}", fmt_real(r), fmt_real(v));
    }
    out
}
