//! Hidden-variable models: factorized local models, general joint models
//! and the built-in examples.

mod builtin;
mod source;
mod types;
mod unnikrishnan;

use std::fmt;
use std::sync::Arc;

pub use builtin::{
    constant_model, sign_model, singlet_joint_model, singlet_reference_behavior, singlet_table,
    stochastic_cos_model,
};
pub use source::Source;
pub use types::{HiddenSample, JointTable, Outcome, Setting};
pub use unnikrishnan::{
    unnikrishnan_amplitude, unnikrishnan_amplitude_correlation, unnikrishnan_joint_probability,
    unnikrishnan_model, UnnikrishnanParams,
};

use crate::behavior::Behavior;
use crate::error::{invalid, Error, Result};
use crate::integrate::{chunked, Integration, Merge, Moments};

/// Probability of outcome `+1` at one wing given its setting and `h`.
pub type Response = Arc<dyn Fn(Setting, &HiddenSample) -> f64 + Send + Sync>;

/// `p(A,B | a, b, h)`.
pub type JointConditional = Arc<dyn Fn(Setting, Setting, &HiddenSample) -> JointTable + Send + Sync>;

/// Setting and hidden-point counts used to validate user-supplied response functions.
const PROBE_SETTINGS: usize = 24;
const PROBE_HIDDEN: usize = 32;

/// Anything that can report `p(A,B | a, b, h)` for a hidden-variable source.
pub trait ConditionalModel: Sync {
    fn source(&self) -> &Source;
    fn joint_table(&self, a: Setting, b: Setting, h: &HiddenSample) -> JointTable;

    fn hidden_dim(&self) -> usize {
        self.source().hidden_dim()
    }
}

/// A model of the factorized form: independent wing responses given `h`.
#[derive(Clone)]
pub struct LocalModel {
    name: String,
    source: Source,
    response_a: Response,
    response_b: Response,
    deterministic: bool,
}

impl fmt::Debug for LocalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalModel")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("deterministic", &self.deterministic)
            .finish_non_exhaustive()
    }
}

impl LocalModel {
    /// Stochastic local model. Responses are probed on a grid and rejected if
    /// any value falls outside `[0, 1]`.
    pub fn new<FA, FB>(source: Source, response_a: FA, response_b: FB) -> Result<Self>
    where
        FA: Fn(Setting, &HiddenSample) -> f64 + Send + Sync + 'static,
        FB: Fn(Setting, &HiddenSample) -> f64 + Send + Sync + 'static,
    {
        source.validate()?;
        let model = LocalModel {
            name: "local".into(),
            source,
            response_a: Arc::new(response_a),
            response_b: Arc::new(response_b),
            deterministic: false,
        };
        model.probe(|p| (0.0..=1.0).contains(&p), "response probability outside [0, 1]")?;
        Ok(model)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn probe(&self, ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
        let hs = self.source.probe_points(PROBE_HIDDEN);
        for s in Setting::evenly_spaced(PROBE_SETTINGS) {
            for h in &hs {
                for p in [(self.response_a)(s, h), (self.response_b)(s, h)] {
                    if !ok(p) {
                        return Err(invalid(format!("{what}: {p} at setting {} h {:?}", s.angle(), h.values)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn prob_a_plus(&self, a: Setting, h: &HiddenSample) -> f64 {
        (self.response_a)(a, h)
    }

    pub fn prob_b_plus(&self, b: Setting, h: &HiddenSample) -> f64 {
        (self.response_b)(b, h)
    }

    /// The same model viewed as a joint conditional (product of wing responses).
    pub fn to_joint(&self) -> JointModel {
        let (ra, rb) = (self.response_a.clone(), self.response_b.clone());
        JointModel {
            name: self.name.clone(),
            source: self.source.clone(),
            joint: Arc::new(move |a, b, h| JointTable::product(ra(a, h), rb(b, h))),
        }
    }
}

impl ConditionalModel for LocalModel {
    fn source(&self) -> &Source {
        &self.source
    }

    fn joint_table(&self, a: Setting, b: Setting, h: &HiddenSample) -> JointTable {
        JointTable::product(self.prob_a_plus(a, h), self.prob_b_plus(b, h))
    }
}

/// Deterministic local model from outcome strategies `A(a, h)`, `B(b, h)`.
///
/// Strategies return `+1` or `-1`; anything else found while probing is
/// rejected, and any other value met later makes integration fail.
pub fn deterministic_lhv<FA, FB>(strategy_a: FA, strategy_b: FB, source: Source) -> Result<LocalModel>
where
    FA: Fn(Setting, &HiddenSample) -> i32 + Send + Sync + 'static,
    FB: Fn(Setting, &HiddenSample) -> i32 + Send + Sync + 'static,
{
    source.validate()?;
    let hs = source.probe_points(PROBE_HIDDEN);
    for s in Setting::evenly_spaced(PROBE_SETTINGS) {
        for h in &hs {
            Outcome::try_from(strategy_a(s, h))?;
            Outcome::try_from(strategy_b(s, h))?;
        }
    }
    let to_prob = |v: i32| match v {
        1 => 1.0,
        -1 => 0.0,
        _ => f64::NAN,
    };
    Ok(LocalModel {
        name: "deterministic".into(),
        source,
        response_a: Arc::new(move |a, h| to_prob(strategy_a(a, h))),
        response_b: Arc::new(move |b, h| to_prob(strategy_b(b, h))),
        deterministic: true,
    })
}

/// A model given directly by its joint conditional, which need not factorize.
#[derive(Clone)]
pub struct JointModel {
    name: String,
    source: Source,
    joint: JointConditional,
}

impl fmt::Debug for JointModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JointModel")
            .field("name", &self.name)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}

impl JointModel {
    /// Tables are probed on a grid and must be distributions within 1e-12.
    pub fn new<F>(source: Source, joint: F) -> Result<Self>
    where
        F: Fn(Setting, Setting, &HiddenSample) -> JointTable + Send + Sync + 'static,
    {
        source.validate()?;
        let hs = source.probe_points(PROBE_HIDDEN);
        let settings = Setting::evenly_spaced(PROBE_SETTINGS);
        for &a in &settings {
            for &b in &settings {
                for h in &hs {
                    let t = joint(a, b, h);
                    if !t.is_normalized(crate::behavior::NORMALIZATION_TOL) {
                        return Err(invalid(format!(
                            "joint table {:?} at ({}, {}) h {:?} is not a distribution",
                            t.0,
                            a.angle(),
                            b.angle(),
                            h.values
                        )));
                    }
                }
            }
        }
        Ok(JointModel { name: "joint".into(), source, joint: Arc::new(joint) })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl ConditionalModel for JointModel {
    fn source(&self) -> &Source {
        &self.source
    }

    fn joint_table(&self, a: Setting, b: Setting, h: &HiddenSample) -> JointTable {
        (self.joint)(a, b, h)
    }
}

#[derive(Clone, Debug)]
pub enum Model {
    Local(LocalModel),
    Joint(JointModel),
}

impl Model {
    pub fn name(&self) -> &str {
        match self {
            Model::Local(m) => m.name(),
            Model::Joint(m) => m.name(),
        }
    }

    pub fn to_joint(&self) -> JointModel {
        match self {
            Model::Local(m) => m.to_joint(),
            Model::Joint(m) => m.clone(),
        }
    }
}

impl ConditionalModel for Model {
    fn source(&self) -> &Source {
        match self {
            Model::Local(m) => m.source(),
            Model::Joint(m) => m.source(),
        }
    }

    fn joint_table(&self, a: Setting, b: Setting, h: &HiddenSample) -> JointTable {
        match self {
            Model::Local(m) => m.joint_table(a, b, h),
            Model::Joint(m) => m.joint_table(a, b, h),
        }
    }
}

impl From<LocalModel> for Model {
    fn from(m: LocalModel) -> Self {
        Model::Local(m)
    }
}

impl From<JointModel> for Model {
    fn from(m: JointModel) -> Self {
        Model::Joint(m)
    }
}

/// Averaged cells plus, for Monte Carlo, the standard error of each cell's correlator.
#[derive(Clone, Debug)]
pub struct CellEstimate {
    pub behavior: Behavior,
    pub correlator_stderr: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Default)]
struct CellAcc {
    probs: [f64; 4],
    corr: Moments,
}

impl CellAcc {
    fn push(&mut self, t: &JointTable) {
        for (p, q) in self.probs.iter_mut().zip(t.0) {
            *p += q;
        }
        self.corr.push(t.correlator());
    }
}

impl Merge for CellAcc {
    fn merge(&mut self, later: Self) {
        for (p, q) in self.probs.iter_mut().zip(later.probs) {
            *p += q;
        }
        self.corr.merge(later.corr);
    }
}

/// Behavior obtained by averaging the model's conditionals over `ρ(h)`.
pub fn behavior_from_model<M: ConditionalModel + ?Sized>(
    model: &M,
    settings_a: &[Setting],
    settings_b: &[Setting],
    integration: &Integration,
) -> Result<Behavior> {
    estimate_cells(model, settings_a, settings_b, integration).map(|e| e.behavior)
}

pub fn estimate_cells<M: ConditionalModel + ?Sized>(
    model: &M,
    settings_a: &[Setting],
    settings_b: &[Setting],
    integration: &Integration,
) -> Result<CellEstimate> {
    if settings_a.is_empty() || settings_b.is_empty() {
        return Err(invalid("need at least one setting per wing"));
    }
    integration.validate()?;
    let (na, nb) = (settings_a.len(), settings_b.len());
    let (raw, stderr) = match *integration {
        Integration::Quadrature { n } => {
            let nodes = model.source().quadrature(n)?;
            let mut cells = vec![[0.0f64; 4]; na * nb];
            for h in &nodes {
                for (i, &a) in settings_a.iter().enumerate() {
                    for (j, &b) in settings_b.iter().enumerate() {
                        let t = model.joint_table(a, b, h);
                        for (c, p) in cells[i * nb + j].iter_mut().zip(t.0) {
                            *c += h.weight * p;
                        }
                    }
                }
            }
            (cells, None)
        }
        Integration::MonteCarlo { n, seed } => {
            let source = model.source();
            let acc = chunked(
                n,
                seed,
                || vec![CellAcc::default(); na * nb],
                |acc, rng, _| {
                    let h = source.sample(rng);
                    for (i, &a) in settings_a.iter().enumerate() {
                        for (j, &b) in settings_b.iter().enumerate() {
                            acc[i * nb + j].push(&model.joint_table(a, b, &h));
                        }
                    }
                },
            );
            let cells = acc.iter().map(|c| c.probs.map(|p| p / n as f64)).collect();
            let stderr = acc.chunks(nb).map(|row| row.iter().map(|c| c.corr.stderr()).collect()).collect();
            (cells, Some(stderr))
        }
    };

    let mut cells = Vec::with_capacity(na);
    for i in 0..na {
        let mut row = Vec::with_capacity(nb);
        for j in 0..nb {
            let c = raw[i * nb + j];
            let sum: f64 = c.iter().sum();
            if !((sum - 1.0).abs() <= 1e-9 && c.iter().all(|&p| p >= -1e-9)) {
                return Err(Error::IntegrationFailure { a_index: i, b_index: j, sum });
            }
            row.push(JointTable(c.map(|p| (p / sum).max(0.0))));
        }
        cells.push(row);
    }
    let behavior = Behavior::new(settings_a.to_vec(), settings_b.to_vec(), cells)?;
    Ok(CellEstimate { behavior, correlator_stderr: stderr })
}

#[cfg(test)]
mod tests;
