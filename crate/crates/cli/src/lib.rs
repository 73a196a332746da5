//! Config-driven batch runner for the `phaselab` scenarios.
//!
//! A run expands the sweep, evaluates every point (in parallel when the
//! `parallel` feature is on), checks the configured expectations and emits
//! one record per row in sweep order. Records carry no timing data, so the
//! same config on the same build always produces the same bytes.
//!
//! Record keys, in order: `scenario`, `kind`, `point`, `row`,
//! `sweep_parameter`, `sweep_value`, `input` (the scenario table for this
//! point), the kind-specific outputs, and `expect_pass` (`null` when no
//! expectation applies to the record).

// `!(x > 0.0)` deliberately rejects NaN alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod inputs;
pub mod output;
pub mod run;

use indexmap::IndexMap;
use phaselab::linalg::principal_value;
use phaselab::Exec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{load, parse, Format, LoadedConfig, ScenarioConfig};
pub use error::CliError;
pub use output::{emit_results, output_path};

pub type Record = IndexMap<String, Value>;

/// Verdict of one expectation on one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub expectation: usize,
    pub field: String,
    pub point: Option<usize>,
    pub row: Option<usize>,
    pub value: Value,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub outcomes: Vec<Outcome>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

/// Runs every sweep point and checks the expectations.
pub fn run_scenario(loaded: &LoadedConfig, exec: Exec) -> Result<RunOutput, CliError> {
    let cfg = &loaded.config;
    let results = exec.map(&loaded.points, |(_, _, scenario)| run::run_point(scenario, &loaded.base_dir));
    let mut records = Vec::new();
    for (point, ((value, table, scenario), rows)) in loaded.points.iter().zip(results).enumerate() {
        let rows = rows.map_err(|e| match e {
            run::RunError::Physics(source) => CliError::Physics {
                scenario: cfg.name.clone(),
                point,
                source,
            },
            run::RunError::Input(e) => e,
        })?;
        let input = serde_json::to_value(table).map_err(|e| CliError::Emit(e.to_string()))?;
        for (row, outputs) in rows.into_iter().enumerate() {
            let mut rec = Record::new();
            rec.insert("scenario".into(), json!(cfg.name));
            rec.insert("kind".into(), json!(scenario.kind()));
            rec.insert("point".into(), json!(point));
            rec.insert("row".into(), json!(row));
            rec.insert(
                "sweep_parameter".into(),
                cfg.sweep.as_ref().map_or(Value::Null, |s| json!(s.parameter)),
            );
            rec.insert(
                "sweep_value".into(),
                value.as_ref().map_or(Ok(Value::Null), serde_json::to_value).map_err(|e| CliError::Emit(e.to_string()))?,
            );
            rec.insert("input".into(), input.clone());
            for (k, v) in outputs {
                rec.insert(k, v);
            }
            records.push(rec);
        }
    }
    let outcomes = check_expectations(cfg, &mut records);
    Ok(RunOutput { records, outcomes })
}

fn check_expectations(cfg: &ScenarioConfig, records: &mut [Record]) -> Vec<Outcome> {
    let mut outcomes = Vec::new();
    let mut per_record: Vec<Option<bool>> = vec![None; records.len()];
    for (i, e) in cfg.expect.iter().enumerate() {
        let mut matched = false;
        for (ri, rec) in records.iter().enumerate() {
            let point = rec["point"].as_u64().map(|v| v as usize);
            let row = rec["row"].as_u64().map(|v| v as usize);
            if e.point.is_some_and(|p| Some(p) != point) || e.row.is_some_and(|r| Some(r) != row) {
                continue;
            }
            matched = true;
            let value = rec.get(&e.field).cloned().unwrap_or(Value::Null);
            let (pass, detail) = judge(e, &value);
            let slot = &mut per_record[ri];
            *slot = Some(slot.unwrap_or(true) && pass);
            outcomes.push(Outcome {
                expectation: i,
                field: e.field.clone(),
                point,
                row,
                value,
                pass,
                detail,
            });
        }
        if !matched {
            outcomes.push(Outcome {
                expectation: i,
                field: e.field.clone(),
                point: e.point,
                row: e.row,
                value: Value::Null,
                pass: false,
                detail: "no record matches".into(),
            });
        }
    }
    for (rec, verdict) in records.iter_mut().zip(per_record) {
        rec.insert("expect_pass".into(), verdict.map_or(Value::Null, Value::Bool));
    }
    outcomes
}

fn judge(e: &config::Expectation, value: &Value) -> (bool, String) {
    if let Some(want) = e.is {
        return match value.as_bool() {
            Some(b) => (b == want, format!("is {b}, expected {want}")),
            None => (false, "not a boolean output".into()),
        };
    }
    let Some(x) = value.as_f64() else {
        return (false, "not a numeric output".into());
    };
    if let Some(want) = e.equals {
        let err = if e.angle { principal_value(x - want).abs() } else { (x - want).abs() };
        return (err <= e.tol, format!("|Δ| = {err:.3e}, tol {:.1e}", e.tol));
    }
    let lo = e.at_least.is_none_or(|b| x >= b - e.tol);
    let hi = e.at_most.is_none_or(|b| x <= b + e.tol);
    (lo && hi, format!("value {x:.6e}, bounds [{:?}, {:?}]", e.at_least, e.at_most))
}
