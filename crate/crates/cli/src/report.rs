//! Report documents and their JSON and CSV renderings.

use bell_lab::hbt::{HbtAudit, HbtConfig};
use bell_lab::locality::LocalityReport;
use bell_lab::metrics::{ChshResult, Estimate, Search};
use bell_lab::polytope::MembershipVerdict;
use bell_lab::{Behavior, Integration, ModelDescriptor, Setting};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentKind, Format};

pub const SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;
pub const CHSH_CSV_HEADER: [&str; 7] = ["settings", "E_ab", "E_ab'", "E_a'b", "E_a'b'", "S", "stderr"];

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelateReport {
    pub model: ModelDescriptor,
    pub integration: Integration,
    pub settings_a: Vec<Setting>,
    pub settings_b: Vec<Setting>,
    pub correlators: Vec<Vec<Estimate>>,
    pub behavior: Behavior,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChshReport {
    pub model: ModelDescriptor,
    pub integration: Integration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<Search>,
    pub result: ChshResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityAuditReport {
    pub model: ModelDescriptor,
    pub all_passed: bool,
    pub reports: Vec<LocalityReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    pub tolerance: f64,
    pub behavior: Behavior,
    pub chsh_forms: [f64; 8],
    pub verdict: MembershipVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HbtExperimentReport {
    pub config: HbtConfig,
    pub settings_a: Vec<Setting>,
    pub settings_b: Vec<Setting>,
    pub audit: HbtAudit,
}

#[derive(Clone, Debug)]
pub enum Report {
    Correlate(CorrelateReport),
    Chsh(ChshReport),
    Maximize(ChshReport),
    CheckLocality(LocalityAuditReport),
    PolytopeMembership(MembershipReport),
    Hbt(HbtExperimentReport),
}

impl Report {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Report::Correlate(_) => ExperimentKind::Correlate,
            Report::Chsh(_) => ExperimentKind::Chsh,
            Report::Maximize(_) => ExperimentKind::Maximize,
            Report::CheckLocality(_) => ExperimentKind::CheckLocality,
            Report::PolytopeMembership(_) => ExperimentKind::PolytopeMembership,
            Report::Hbt(_) => ExperimentKind::Hbt,
        }
    }

    pub fn schema(&self) -> String {
        format!("bell-lab/{}/v{SCHEMA_VERSION}", self.kind().as_str())
    }

    fn body(&self) -> Result<Value, serde_json::Error> {
        match self {
            Report::Correlate(r) => serde_json::to_value(r),
            Report::Chsh(r) | Report::Maximize(r) => serde_json::to_value(r),
            Report::CheckLocality(r) => serde_json::to_value(r),
            Report::PolytopeMembership(r) => serde_json::to_value(r),
            Report::Hbt(r) => serde_json::to_value(r),
        }
    }

    /// The report as a JSON value with `schema` and `experiment` fields and
    /// every float rounded.
    pub fn to_value(&self) -> Result<Value, serde_json::Error> {
        let mut v = self.body()?;
        if let Value::Object(m) = &mut v {
            m.insert("schema".into(), Value::String(self.schema()));
            m.insert("experiment".into(), Value::String(self.kind().as_str().into()));
        }
        Ok(round_value(v))
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, RenderError> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.to_value()?)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> Result<Vec<u8>, RenderError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let schema = self.schema();
        match self {
            Report::Correlate(r) => {
                w.write_record(["schema", "a", "b", "E", "stderr", "p_pp", "p_pm", "p_mp", "p_mm"])?;
                for (i, row) in r.correlators.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        let cell = r.behavior.cell(i, j);
                        let mut rec = vec![
                            schema.clone(),
                            fmt12(r.settings_a[i].angle()),
                            fmt12(r.settings_b[j].angle()),
                            fmt12(e.value),
                            opt12(e.stderr),
                        ];
                        rec.extend(cell.0.iter().map(|&p| fmt12(p)));
                        w.write_record(&rec)?;
                    }
                }
            }
            Report::Chsh(r) | Report::Maximize(r) => {
                let mut header = vec!["schema"];
                header.extend(CHSH_CSV_HEADER);
                w.write_record(&header)?;
                let res = &r.result;
                let settings = res.settings.iter().map(|s| fmt12(s.angle())).collect::<Vec<_>>().join(";");
                let mut rec = vec![schema, settings];
                rec.extend(res.correlators.iter().map(|&e| fmt12(e)));
                rec.push(fmt12(res.s_value));
                rec.push(opt12(res.estimator_stderr));
                w.write_record(&rec)?;
            }
            Report::CheckLocality(r) => {
                w.write_record(["schema", "check_name", "verdict", "max_residual", "tolerance", "grid_spec"])?;
                for rep in &r.reports {
                    w.write_record([
                        schema.clone(),
                        enum_str(&rep.check_name),
                        enum_str(&rep.verdict),
                        fmt12(rep.max_residual),
                        fmt12(rep.tolerance),
                        rep.grid_spec.clone(),
                    ])?;
                }
            }
            Report::PolytopeMembership(r) => {
                let mut header = vec!["schema".to_string(), "status".into(), "gap".into(), "violated_index".into()];
                header.extend((0..8).map(|k| format!("chsh_{k}")));
                w.write_record(&header)?;
                let mut rec = vec![
                    schema,
                    enum_str(&r.verdict.status),
                    fmt12(r.verdict.gap),
                    r.verdict.violated_inequality.map(|v| v.index.to_string()).unwrap_or_default(),
                ];
                rec.extend(r.chsh_forms.iter().map(|&x| fmt12(x)));
                w.write_record(&rec)?;
            }
            Report::Hbt(r) => {
                w.write_record([
                    "schema",
                    "alpha1",
                    "alpha2",
                    "n_events",
                    "ensemble_covariance",
                    "ensemble_stderr",
                    "analytic_covariance",
                    "fixed_h_covariance",
                    "S",
                    "membership",
                    "condition_c",
                ])?;
                let rep = &r.audit.report;
                w.write_record([
                    schema,
                    fmt12(r.config.alpha1),
                    fmt12(r.config.alpha2),
                    r.config.n_events.to_string(),
                    fmt12(rep.ensemble_covariance),
                    fmt12(rep.ensemble_stderr),
                    fmt12(rep.analytic_covariance),
                    fmt12(rep.fixed_h_covariance),
                    opt12(rep.chsh_of_binary.as_ref().map(|c| c.s_value)),
                    r.audit.membership.as_ref().map(|m| enum_str(&m.status)).unwrap_or_default(),
                    enum_str(&r.audit.condition_c.verdict),
                ])?;
            }
        }
        w.into_inner().map_err(|e| RenderError::Csv(e.into_error().into()))
    }
}

fn enum_str<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Rounds to twelve significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

fn opt12(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

/// Rounds every float in a JSON document; integers are left alone.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(0.0));
            let x = if x == 0.0 { 0.0 } else { x };
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}
