//! Classical intensity-correlation (Hanbury Brown–Twiss style) model.
//!
//! A single common phase `θ`, uniform on the circle, is the whole hidden
//! state. Detector `k` sees intensity `1 + cos(θ + α_k)`. Ensemble
//! intensities are correlated through `θ`, yet at fixed `θ` everything is
//! deterministic, so the fixed-`θ` joint law is a product and thresholded
//! binary outcomes form a local behavior.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{invalid, Result};
use crate::integrate::{chunked, Merge, Moments};
use crate::locality::{check_condition_c, CheckGrid, LocalityReport};
use crate::metrics::{chsh, ChshResult, Estimate};
use crate::model::{ConditionalModel, JointModel, JointTable, Outcome, Setting, Source};
use crate::polytope::{membership, MembershipVerdict};

/// Number of fixed-θ subsequences and the longest one replayed.
const FIXED_THETA_SUBSEQUENCES: usize = 8;
const FIXED_THETA_LEN: u64 = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbtConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub n_events: u64,
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    1.0
}

impl HbtConfig {
    pub fn new(alpha1: f64, alpha2: f64, n_events: u64, seed: u64) -> Self {
        HbtConfig { alpha1, alpha2, n_events, seed, threshold: default_threshold() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(invalid("n_events must be at least 1"));
        }
        if !(self.alpha1.is_finite() && self.alpha2.is_finite() && self.threshold.is_finite()) {
            return Err(invalid("alpha1, alpha2 and threshold must be finite"));
        }
        Ok(())
    }
}

/// `1 + cos(θ + α)`, in `[0, 2]`.
pub fn hbt_intensity(theta: f64, alpha: f64) -> f64 {
    1.0 + (theta + alpha).cos()
}

/// `+1` when the intensity reaches the threshold.
pub fn hbt_outcome(theta: f64, alpha: f64, threshold: f64) -> Outcome {
    if hbt_intensity(theta, alpha) >= threshold {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Binary detector outcomes as a joint model over the common phase.
pub fn hbt_model(threshold: f64) -> Result<JointModel> {
    if !threshold.is_finite() {
        return Err(invalid("threshold must be finite"));
    }
    Ok(JointModel::new(Source::uniform_angle(), move |a, b, h| {
        let theta = h.first();
        JointTable::deterministic(hbt_outcome(theta, a.angle(), threshold), hbt_outcome(theta, b.angle(), threshold))
    })?
    .with_name("hbt"))
}

/// α-settings `(0, π/2)` and `(π/4, 3π/4)`.
pub fn default_hbt_settings() -> (Vec<Setting>, Vec<Setting>) {
    (
        vec![Setting::new(0.0), Setting::new(FRAC_PI_2)],
        vec![Setting::new(FRAC_PI_4), Setting::new(3.0 * FRAC_PI_4)],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbtReport {
    pub ensemble_covariance: f64,
    pub ensemble_stderr: f64,
    /// `½ cos(α1 - α2)`.
    pub analytic_covariance: f64,
    /// Largest |covariance| within the fixed-θ subsequences.
    pub fixed_h_covariance: f64,
    pub binary_behavior: Behavior,
    /// Present when both setting lists have two entries.
    pub chsh_of_binary: Option<ChshResult>,
}

#[derive(Clone, Default)]
struct FirstPass {
    i1: Moments,
    i2: Moments,
    counts: Vec<[u64; 4]>,
}

impl Merge for FirstPass {
    fn merge(&mut self, later: Self) {
        self.i1.merge(later.i1);
        self.i2.merge(later.i2);
        for (c, d) in self.counts.iter_mut().zip(later.counts) {
            for k in 0..4 {
                c[k] += d[k];
            }
        }
    }
}

fn draw_theta<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * TAU
}

/// Streaming covariance; constant inputs give exactly zero.
#[derive(Default)]
struct Comoment {
    n: u64,
    mean_x: f64,
    mean_y: f64,
    c: f64,
}

impl Comoment {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n as f64;
        self.mean_y += (y - self.mean_y) / self.n as f64;
        self.c += dx * (y - self.mean_y);
    }

    fn covariance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.c / (self.n - 1) as f64
        }
    }
}

pub fn hbt_run(config: &HbtConfig, settings_a: &[Setting], settings_b: &[Setting]) -> Result<HbtReport> {
    config.validate()?;
    if settings_a.is_empty() || settings_b.is_empty() {
        return Err(invalid("need at least one α-setting per wing"));
    }
    let (n, thr) = (config.n_events, config.threshold);
    let nb = settings_b.len();
    let pairs = settings_a.len() * nb;

    let first = chunked(
        n,
        config.seed,
        || FirstPass { counts: vec![[0; 4]; pairs], ..Default::default() },
        |acc, rng, _| {
            let theta = draw_theta(rng);
            acc.i1.push(hbt_intensity(theta, config.alpha1));
            acc.i2.push(hbt_intensity(theta, config.alpha2));
            for (i, a) in settings_a.iter().enumerate() {
                let oa = hbt_outcome(theta, a.angle(), thr);
                for (j, b) in settings_b.iter().enumerate() {
                    let ob = hbt_outcome(theta, b.angle(), thr);
                    acc.counts[i * nb + j][2 * oa.index() + ob.index()] += 1;
                }
            }
        },
    );
    let (m1, m2) = (first.i1.mean(), first.i2.mean());
    // replays the same θ sequence with the means known
    let products = chunked(n, config.seed, Moments::default, |m, rng, _| {
        let theta = draw_theta(rng);
        m.push((hbt_intensity(theta, config.alpha1) - m1) * (hbt_intensity(theta, config.alpha2) - m2));
    });
    let ensemble_covariance = if n < 2 { 0.0 } else { products.sum / (n - 1) as f64 };

    let fixed_len = FIXED_THETA_LEN.min(n);
    let fixed_h_covariance = (0..FIXED_THETA_SUBSEQUENCES)
        .map(|k| {
            let theta = (k as f64 + 0.5) * TAU / FIXED_THETA_SUBSEQUENCES as f64;
            let mut c = Comoment::default();
            for _ in 0..fixed_len {
                c.push(hbt_intensity(theta, config.alpha1), hbt_intensity(theta, config.alpha2));
            }
            c.covariance().abs()
        })
        .fold(0.0, f64::max);

    let binary_behavior = Behavior::from_fn(settings_a.to_vec(), settings_b.to_vec(), |i, j| {
        JointTable(first.counts[i * nb + j].map(|c| c as f64 / n as f64))
    })?;
    let chsh_of_binary = (settings_a.len() == 2 && nb == 2).then(|| {
        let est = |i: usize, j: usize| {
            let e = binary_behavior.correlator(i, j);
            let var = if n < 2 { 0.0 } else { (1.0 - e * e).max(0.0) * n as f64 / (n - 1) as f64 };
            Estimate { value: e, stderr: Some((var / n as f64).sqrt()) }
        };
        chsh(
            [est(0, 0), est(0, 1), est(1, 0), est(1, 1)],
            [settings_a[0], settings_a[1], settings_b[0], settings_b[1]],
        )
    });

    Ok(HbtReport {
        ensemble_covariance,
        ensemble_stderr: products.stderr(),
        analytic_covariance: 0.5 * (config.alpha1 - config.alpha2).cos(),
        fixed_h_covariance,
        binary_behavior,
        chsh_of_binary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbtAudit {
    pub report: HbtReport,
    /// Present when the binary behavior is 2x2.
    pub membership: Option<MembershipVerdict>,
    pub condition_c: LocalityReport,
}

/// Runs the model and checks both locality claims: the binary behavior lies
/// in the local polytope and the fixed-θ joint law factorizes.
pub fn hbt_locality_audit(config: &HbtConfig, settings_a: &[Setting], settings_b: &[Setting], tol: f64) -> Result<HbtAudit> {
    let report = hbt_run(config, settings_a, settings_b)?;
    let membership = match report.binary_behavior.shape() {
        (2, 2) => Some(membership(&report.binary_behavior, tol)?),
        _ => None,
    };
    let model = hbt_model(config.threshold)?;
    let grid = CheckGrid::new(
        settings_a.to_vec(),
        settings_b.to_vec(),
        model.source().probe_points(crate::locality::DEFAULT_GRID_HIDDEN),
        format!(
            "{}x{} α-settings; hidden: {}",
            settings_a.len(),
            settings_b.len(),
            model.source().describe_probes(crate::locality::DEFAULT_GRID_HIDDEN)
        ),
    )?;
    let condition_c = check_condition_c(&model, &grid, tol)?;
    Ok(HbtAudit { report, membership, condition_c })
}

/// Writes raw events as CSV `theta,i1,i2,a,b` for detector phases `alpha1`, `alpha2`.
pub fn write_hbt_events_csv<W: Write>(writer: W, config: &HbtConfig) -> Result<()> {
    config.validate()?;
    struct Log(Vec<f64>);
    impl Merge for Log {
        fn merge(&mut self, later: Self) {
            self.0.extend(later.0);
        }
    }
    let thetas = chunked(config.n_events, config.seed, || Log(Vec::new()), |log, rng, _| log.0.push(draw_theta(rng)));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta", "i1", "i2", "a", "b"])?;
    for theta in thetas.0 {
        w.write_record([
            theta.to_string(),
            hbt_intensity(theta, config.alpha1).to_string(),
            hbt_intensity(theta, config.alpha2).to_string(),
            hbt_outcome(theta, config.alpha1, config.threshold).to_string(),
            hbt_outcome(theta, config.alpha2, config.threshold).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
