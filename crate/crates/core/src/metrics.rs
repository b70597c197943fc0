//! Correlators, the CHSH combination, CHSH maximisation over settings and
//! empirical estimation from event records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrate::{chunked, Integration, Merge, Moments};
use crate::model::{estimate_cells, ConditionalModel, LocalModel, Outcome, Setting, Source};

/// A value with an optional Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: None }
    }
}

fn checked(e: Estimate) -> Result<Estimate> {
    if e.value.is_finite() && e.value.abs() <= 1.0 + 1e-9 {
        Ok(e)
    } else {
        Err(Error::CorrelatorOutOfRange(e.value))
    }
}

/// `E(a,b) = ∫ dh ρ(h) [2p(A=+|a,h) - 1][2p(B=+|b,h) - 1]` for a factorized model.
pub fn correlation_eq1(model: &LocalModel, a: Setting, b: Setting, integration: &Integration) -> Result<Estimate> {
    integration.validate()?;
    let term = |h: &crate::model::HiddenSample| {
        (2.0 * model.prob_a_plus(a, h) - 1.0) * (2.0 * model.prob_b_plus(b, h) - 1.0)
    };
    let est = match *integration {
        Integration::Quadrature { n } => {
            let nodes = model.source().quadrature(n)?;
            Estimate::exact(nodes.iter().map(|h| h.weight * term(h)).sum())
        }
        Integration::MonteCarlo { n, seed } => {
            let source: &Source = model.source();
            let m = chunked(n, seed, Moments::default, |m, rng, _| m.push(term(&source.sample(rng))));
            Estimate { value: m.mean(), stderr: Some(m.stderr()) }
        }
    };
    checked(est)
}

/// `E(a,b) = Σ A·B ⟨p(A,B|a,b,h)⟩` for any joint model.
pub fn correlation_joint<M: ConditionalModel + ?Sized>(
    model: &M,
    a: Setting,
    b: Setting,
    integration: &Integration,
) -> Result<Estimate> {
    Ok(correlator_table(model, &[a], &[b], integration)?[0][0])
}

/// Correlators for every setting pair, from one pass over the hidden samples.
pub fn correlator_table<M: ConditionalModel + ?Sized>(
    model: &M,
    settings_a: &[Setting],
    settings_b: &[Setting],
    integration: &Integration,
) -> Result<Vec<Vec<Estimate>>> {
    let est = estimate_cells(model, settings_a, settings_b, integration)?;
    let beh = &est.behavior;
    let mut out = Vec::with_capacity(settings_a.len());
    for i in 0..settings_a.len() {
        let mut row = Vec::with_capacity(settings_b.len());
        for j in 0..settings_b.len() {
            let stderr = est.correlator_stderr.as_ref().map(|s| s[i][j]);
            row.push(checked(Estimate { value: beh.correlator(i, j), stderr })?);
        }
        out.push(row);
    }
    Ok(out)
}

/// CHSH combination `S = E(a,b) + E(a,b') + E(a',b) - E(a',b')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    /// `(a, a', b, b')`.
    pub settings: [Setting; 4],
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`.
    pub correlators: [f64; 4],
    pub s_value: f64,
    pub abs_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator_stderr: Option<f64>,
}

pub fn chsh_value(e: [f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

/// Combines four correlators; standard errors add in quadrature.
pub fn chsh(correlators: [Estimate; 4], settings: [Setting; 4]) -> ChshResult {
    let values = correlators.map(|e| e.value);
    let s_value = chsh_value(values);
    let estimator_stderr = correlators
        .iter()
        .any(|e| e.stderr.is_some())
        .then(|| correlators.iter().map(|e| e.stderr.unwrap_or(0.0).powi(2)).sum::<f64>().sqrt());
    ChshResult { settings, correlators: values, s_value, abs_s: s_value.abs(), estimator_stderr }
}

/// CHSH for a model at `(a, a', b, b')`.
pub fn chsh_for_model<M: ConditionalModel + ?Sized>(
    model: &M,
    settings: [Setting; 4],
    integration: &Integration,
) -> Result<ChshResult> {
    let [a, a2, b, b2] = settings;
    let t = correlator_table(model, &[a, a2], &[b, b2], integration)?;
    Ok(chsh([t[0][0], t[0][1], t[1][0], t[1][1]], settings))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Search {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_refine_iters")]
    pub refine_iters: usize,
}

fn default_grid_n() -> usize {
    16
}

fn default_refine_iters() -> usize {
    3
}

impl Default for Search {
    fn default() -> Self {
        Search { grid_n: default_grid_n(), refine_iters: default_refine_iters() }
    }
}

/// Smallest step tried during coordinate refinement.
const MIN_STEP: f64 = 1e-10;

/// Maximises `|S|` over `(a, a', b, b')` for a correlator family `E(a, b)`.
///
/// An exhaustive search over `grid_n` evenly spaced angles per coordinate is
/// followed by `refine_iters` coordinate-descent sweeps. Within a sweep each
/// coordinate is moved by `±step` while that improves `|S|`, halving the step
/// from the grid spacing down to 1e-10. `|S|` never decreases.
pub fn maximize_chsh_over_settings<F>(mut correlator: F, search: &Search) -> Result<ChshResult>
where
    F: FnMut(Setting, Setting) -> Result<f64>,
{
    if search.grid_n < 8 {
        return Err(invalid(format!("grid_n = {} must be at least 8", search.grid_n)));
    }
    let n = search.grid_n;
    let grid = Setting::evenly_spaced(n);
    let mut table = vec![0.0; n * n];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            table[i * n + j] = correlator(a, b)?;
        }
    }
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for a in 0..n {
        for a2 in 0..n {
            for b in 0..n {
                for b2 in 0..n {
                    let s = table[a * n + b] + table[a * n + b2] + table[a2 * n + b] - table[a2 * n + b2];
                    if s.abs() > best.0 {
                        best = (s.abs(), [a, a2, b, b2]);
                    }
                }
            }
        }
    }

    let mut x = best.1.map(|k| grid[k].angle());
    let mut eval = |x: &[f64; 4]| -> Result<f64> {
        let [a, a2, b, b2] = x.map(Setting::new);
        Ok(chsh_value([correlator(a, b)?, correlator(a, b2)?, correlator(a2, b)?, correlator(a2, b2)?]).abs())
    };
    let mut fx = eval(&x)?;
    let spacing = std::f64::consts::TAU / n as f64;
    for _ in 0..search.refine_iters {
        for k in 0..4 {
            let mut step = spacing;
            while step >= MIN_STEP {
                let mut moved = false;
                for dir in [1.0, -1.0] {
                    let mut y = x;
                    y[k] += dir * step;
                    let fy = eval(&y)?;
                    if fy > fx {
                        x = y;
                        fx = fy;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
        }
    }

    let settings = x.map(Setting::new);
    let [a, a2, b, b2] = settings;
    let e = [correlator(a, b)?, correlator(a, b2)?, correlator(a2, b)?, correlator(a2, b2)?];
    Ok(chsh(e.map(Estimate::exact), settings))
}

/// Maximises `|S|` for a model, evaluating correlators with `integration`.
pub fn maximize_chsh_for_model<M: ConditionalModel + ?Sized>(
    model: &M,
    search: &Search,
    integration: &Integration,
) -> Result<ChshResult> {
    let mut best = maximize_chsh_over_settings(|a, b| Ok(correlation_joint(model, a, b, integration)?.value), search)?;
    // recompute at the optimum to attach Monte Carlo errors
    if matches!(integration, Integration::MonteCarlo { .. }) {
        best = chsh_for_model(model, best.settings, integration)?;
    }
    Ok(best)
}

/// One coincidence record: setting indices and the two outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub a_index: usize,
    pub b_index: usize,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
}

/// Sample mean of `A·B` per setting pair with standard error `sd/√n`.
pub fn empirical_correlation<I>(events: I, n_a: usize, n_b: usize) -> Result<Vec<Vec<Estimate>>>
where
    I: IntoIterator<Item = Event>,
{
    let mut acc = vec![Moments::default(); n_a * n_b];
    for e in events {
        if e.a_index >= n_a || e.b_index >= n_b {
            return Err(invalid(format!("event setting pair ({}, {}) outside {n_a}x{n_b}", e.a_index, e.b_index)));
        }
        acc[e.a_index * n_b + e.b_index].push((e.outcome_a.value() * e.outcome_b.value()) as f64);
    }
    let missing: Vec<(usize, usize)> = (0..n_a)
        .flat_map(|i| (0..n_b).map(move |j| (i, j)))
        .filter(|&(i, j)| acc[i * n_b + j].count == 0)
        .collect();
    if !missing.is_empty() {
        return Err(Error::EmptyCells(missing));
    }
    Ok(acc
        .chunks(n_b)
        .map(|row| row.iter().map(|m| Estimate { value: m.mean(), stderr: Some(m.stderr()) }).collect())
        .collect())
}

struct EventLog(Vec<Event>);

impl Merge for EventLog {
    fn merge(&mut self, later: Self) {
        self.0.extend(later.0);
    }
}

/// Simulates `n_per_pair` events for every setting pair, pair-major order.
///
/// Each event draws a fresh `h` and then an outcome pair from `p(A,B|a,b,h)`.
pub fn simulate_events<M: ConditionalModel + ?Sized>(
    model: &M,
    settings_a: &[Setting],
    settings_b: &[Setting],
    n_per_pair: u64,
    seed: u64,
) -> Result<Vec<Event>> {
    if settings_a.is_empty() || settings_b.is_empty() || n_per_pair == 0 {
        return Err(invalid("need settings on both wings and n_per_pair >= 1"));
    }
    let nb = settings_b.len() as u64;
    let total = n_per_pair * settings_a.len() as u64 * nb;
    let source = model.source();
    let log = chunked(
        total,
        seed,
        || EventLog(Vec::new()),
        |log, rng, k| {
            use rand::Rng;
            let pair = k / n_per_pair;
            let (i, j) = ((pair / nb) as usize, (pair % nb) as usize);
            let h = source.sample(rng);
            let t = model.joint_table(settings_a[i], settings_b[j], &h);
            let u: f64 = rng.random();
            let (mut acc, mut pick) = (0.0, 3);
            for (idx, p) in t.0.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = idx;
                    break;
                }
            }
            let outcome = |bit: usize| if bit == 0 { Outcome::Plus } else { Outcome::Minus };
            log.0.push(Event { a_index: i, b_index: j, outcome_a: outcome(pick / 2), outcome_b: outcome(pick % 2) });
        },
    );
    Ok(log.0)
}

pub const EVENT_CSV_HEADER: [&str; 4] = ["a_index", "b_index", "outcome_a", "outcome_b"];

/// Reads events from CSV with header `a_index,b_index,outcome_a,outcome_b`.
pub fn read_events_csv<R: Read>(reader: R) -> Result<Vec<Event>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != EVENT_CSV_HEADER {
        return Err(invalid(format!("event CSV header must be {}", EVENT_CSV_HEADER.join(","))));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Writes events as CSV; outcomes are written `+1` / `-1`.
pub fn write_events_csv<W: Write>(writer: W, events: &[Event]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EVENT_CSV_HEADER)?;
    for e in events {
        w.write_record([
            e.a_index.to_string(),
            e.b_index.to_string(),
            e.outcome_a.to_string(),
            e.outcome_b.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
