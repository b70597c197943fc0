//! Verdicts for the locality conditions at fixed hidden variables:
//! factorisation (Condition C), parameter independence, outcome
//! independence, and no-signaling on observed behaviors.
//!
//! Model-level checks evaluate `p(A,B|a,b,h)` on an explicit grid of
//! settings and hidden values. Condition C is a statement about fixed `h`;
//! an averaged behavior cannot decide it.

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{invalid, Result};
use crate::model::{ConditionalModel, HiddenSample, JointTable, Outcome, Setting, Source};

pub const DEFAULT_GRID_SETTINGS: usize = 24;
pub const DEFAULT_GRID_HIDDEN: usize = 32;

/// Conditioning events below this probability are skipped by the
/// outcome-independence check.
pub const MIN_CONDITIONING_PROB: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    ConditionC,
    ParameterIndependence,
    OutcomeIndependence,
    NoSignaling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wing {
    A,
    B,
}

/// Grid point attaining the maximal residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub a_index: usize,
    pub b_index: usize,
    /// Second setting index compared against (parameter independence, no-signaling).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wing: Option<Wing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<f64>>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub check_name: CheckName,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub worst_case: Option<WorstCase>,
    pub grid_spec: String,
}

impl LocalityReport {
    fn new(check_name: CheckName, worst_case: Option<WorstCase>, tolerance: f64, grid_spec: String) -> Self {
        let max_residual = worst_case.as_ref().map_or(0.0, |w| w.residual);
        let verdict = if max_residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        LocalityReport { check_name, verdict, max_residual, tolerance, worst_case, grid_spec }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Settings × hidden values at which model-level checks are evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckGrid {
    pub settings_a: Vec<Setting>,
    pub settings_b: Vec<Setting>,
    pub hidden: Vec<HiddenSample>,
    pub spec: String,
}

impl CheckGrid {
    pub fn new(settings_a: Vec<Setting>, settings_b: Vec<Setting>, hidden: Vec<HiddenSample>, spec: impl Into<String>) -> Result<Self> {
        if settings_a.is_empty() || settings_b.is_empty() || hidden.is_empty() {
            return Err(invalid("check grid needs settings on both wings and at least one hidden value"));
        }
        Ok(CheckGrid { settings_a, settings_b, hidden, spec: spec.into() })
    }

    /// Evenly spaced settings on both wings and the source's probe points.
    pub fn with_counts(source: &Source, n_settings: usize, n_hidden: usize) -> Result<Self> {
        let settings = Setting::evenly_spaced(n_settings);
        let spec = format!(
            "{n_settings}x{n_settings} evenly spaced settings; hidden: {}",
            source.describe_probes(n_hidden)
        );
        CheckGrid::new(settings.clone(), settings, source.probe_points(n_hidden), spec)
    }

    /// 24 settings per wing and 32 hidden values.
    pub fn default_for(source: &Source) -> Self {
        CheckGrid::with_counts(source, DEFAULT_GRID_SETTINGS, DEFAULT_GRID_HIDDEN).expect("default grid is nonempty")
    }

    fn tables<M: ConditionalModel + ?Sized>(&self, model: &M, h: &HiddenSample) -> Vec<Vec<JointTable>> {
        self.settings_a
            .iter()
            .map(|&a| self.settings_b.iter().map(|&b| model.joint_table(a, b, h)).collect())
            .collect()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("tolerance {tol} must be finite and >= 0")))
    }
}

#[derive(Default)]
struct Worst(Option<WorstCase>);

impl Worst {
    fn offer(&mut self, residual: f64, make: impl FnOnce() -> WorstCase) {
        let better = match &self.0 {
            None => true,
            Some(w) => residual > w.residual || residual.is_nan(),
        };
        if better {
            let mut w = make();
            w.residual = residual;
            self.0 = Some(w);
        }
    }
}

fn case(i: usize, j: usize, h: &HiddenSample) -> WorstCase {
    WorstCase { a_index: i, b_index: j, alt_index: None, wing: None, hidden: Some(h.values.clone()), residual: 0.0 }
}

/// Max over the grid of `|p(A,B|a,b,h) - p(A|a,b,h)·p(B|a,b,h)|`.
pub fn check_condition_c<M: ConditionalModel + ?Sized>(model: &M, grid: &CheckGrid, tol: f64) -> Result<LocalityReport> {
    check_tol(tol)?;
    let mut worst = Worst::default();
    for h in &grid.hidden {
        for (i, row) in grid.tables(model, h).iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                let r = Outcome::ALL
                    .iter()
                    .flat_map(|&a| Outcome::ALL.iter().map(move |&b| (a, b)))
                    .map(|(a, b)| (t.get(a, b) - t.marginal_a(a) * t.marginal_b(b)).abs())
                    .fold(0.0, f64::max);
                worst.offer(r, || case(i, j, h));
            }
        }
    }
    Ok(LocalityReport::new(CheckName::ConditionC, worst.0, tol, grid.spec.clone()))
}

/// Max over the grid of `|p(A|a,b,h) - p(A|a,b',h)|` and the wing-B analogue.
pub fn check_parameter_independence<M: ConditionalModel + ?Sized>(
    model: &M,
    grid: &CheckGrid,
    tol: f64,
) -> Result<LocalityReport> {
    check_tol(tol)?;
    let mut worst = Worst::default();
    let (na, nb) = (grid.settings_a.len(), grid.settings_b.len());
    for h in &grid.hidden {
        let tables = grid.tables(model, h);
        for i in 0..na {
            for j in 0..nb {
                for j2 in j + 1..nb {
                    let r = (tables[i][j].marginal_a(Outcome::Plus) - tables[i][j2].marginal_a(Outcome::Plus)).abs();
                    worst.offer(r, || WorstCase { alt_index: Some(j2), wing: Some(Wing::A), ..case(i, j, h) });
                }
            }
        }
        for j in 0..nb {
            for i in 0..na {
                for i2 in i + 1..na {
                    let r = (tables[i][j].marginal_b(Outcome::Plus) - tables[i2][j].marginal_b(Outcome::Plus)).abs();
                    worst.offer(r, || WorstCase { alt_index: Some(i2), wing: Some(Wing::B), ..case(i, j, h) });
                }
            }
        }
    }
    Ok(LocalityReport::new(CheckName::ParameterIndependence, worst.0, tol, grid.spec.clone()))
}

/// Max over the grid of `|p(A=+|a,b,B=+,h) - p(A=+|a,b,B=-,h)|` and the
/// wing-B analogue. Conditioning outcomes with probability below 1e-12 are
/// skipped.
pub fn check_outcome_independence<M: ConditionalModel + ?Sized>(
    model: &M,
    grid: &CheckGrid,
    tol: f64,
) -> Result<LocalityReport> {
    use Outcome::{Minus, Plus};
    check_tol(tol)?;
    let mut worst = Worst::default();
    for h in &grid.hidden {
        for (i, row) in grid.tables(model, h).iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                let (pb_plus, pb_minus) = (t.marginal_b(Plus), t.marginal_b(Minus));
                if pb_plus >= MIN_CONDITIONING_PROB && pb_minus >= MIN_CONDITIONING_PROB {
                    let r = (t.get(Plus, Plus) / pb_plus - t.get(Plus, Minus) / pb_minus).abs();
                    worst.offer(r, || WorstCase { wing: Some(Wing::A), ..case(i, j, h) });
                }
                let (pa_plus, pa_minus) = (t.marginal_a(Plus), t.marginal_a(Minus));
                if pa_plus >= MIN_CONDITIONING_PROB && pa_minus >= MIN_CONDITIONING_PROB {
                    let r = (t.get(Plus, Plus) / pa_plus - t.get(Minus, Plus) / pa_minus).abs();
                    worst.offer(r, || WorstCase { wing: Some(Wing::B), ..case(i, j, h) });
                }
            }
        }
    }
    Ok(LocalityReport::new(CheckName::OutcomeIndependence, worst.0, tol, grid.spec.clone()))
}

/// Max change of either wing's marginal when the remote setting changes.
pub fn no_signaling_check(behavior: &Behavior, tol: f64) -> Result<LocalityReport> {
    check_tol(tol)?;
    let (na, nb) = behavior.shape();
    let mut worst = Worst::default();
    let cell = |i, j| WorstCase { a_index: i, b_index: j, alt_index: None, wing: None, hidden: None, residual: 0.0 };
    for i in 0..na {
        for j in 0..nb {
            for j2 in j + 1..nb {
                let r = (behavior.marginal_a_plus(i, j) - behavior.marginal_a_plus(i, j2)).abs();
                worst.offer(r, || WorstCase { alt_index: Some(j2), wing: Some(Wing::A), ..cell(i, j) });
            }
        }
    }
    for j in 0..nb {
        for i in 0..na {
            for i2 in i + 1..na {
                let r = (behavior.marginal_b_plus(i, j) - behavior.marginal_b_plus(i2, j)).abs();
                worst.offer(r, || WorstCase { alt_index: Some(i2), wing: Some(Wing::B), ..cell(i, j) });
            }
        }
    }
    Ok(LocalityReport::new(CheckName::NoSignaling, worst.0, tol, format!("behavior cells {na}x{nb}")))
}

/// The three model-level checks on one grid.
pub fn audit_model<M: ConditionalModel + ?Sized>(model: &M, grid: &CheckGrid, tol: f64) -> Result<[LocalityReport; 3]> {
    Ok([
        check_condition_c(model, grid, tol)?,
        check_parameter_independence(model, grid, tol)?,
        check_outcome_independence(model, grid, tol)?,
    ])
}
