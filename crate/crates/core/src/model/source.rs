use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HiddenSample;
use crate::error::{invalid, Error, Result};

/// Distribution `ρ(h)` of the hidden parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    /// Each of `dim` coordinates independent and uniform on `[0, 2π)`.
    UniformAngles { dim: usize },
    /// A single fixed value of `h`.
    Point { values: Vec<f64> },
    /// Finite support; sample weights are relative probabilities.
    Discrete { samples: Vec<HiddenSample> },
}

impl Source {
    pub fn uniform_angle() -> Self {
        Source::UniformAngles { dim: 1 }
    }

    pub fn point(values: Vec<f64>) -> Self {
        Source::Point { values }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Source::UniformAngles { dim } if *dim == 0 => Err(invalid("hidden_dim must be positive")),
            Source::Point { values } if values.is_empty() => Err(invalid("hidden_dim must be positive")),
            Source::Discrete { samples } => {
                let Some(first) = samples.first() else {
                    return Err(invalid("discrete source needs at least one sample"));
                };
                if first.values.is_empty() {
                    return Err(invalid("hidden_dim must be positive"));
                }
                if samples.iter().any(|s| s.values.len() != first.values.len()) {
                    return Err(invalid("discrete source samples differ in dimension"));
                }
                if samples.iter().any(|s| !(s.weight >= 0.0 && s.weight.is_finite())) {
                    return Err(invalid("discrete source weights must be finite and >= 0"));
                }
                if samples.iter().map(|s| s.weight).sum::<f64>() <= 0.0 {
                    return Err(invalid("discrete source has zero total weight"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        match self {
            Source::UniformAngles { dim } => *dim,
            Source::Point { values } => values.len(),
            Source::Discrete { samples } => samples.first().map_or(0, |s| s.values.len()),
        }
    }

    /// Draws one sample with unit weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HiddenSample {
        match self {
            Source::UniformAngles { dim } => {
                HiddenSample::new((0..*dim).map(|_| rng.random::<f64>() * TAU).collect())
            }
            Source::Point { values } => HiddenSample::new(values.clone()),
            Source::Discrete { samples } => {
                let total: f64 = samples.iter().map(|s| s.weight).sum();
                let mut u = rng.random::<f64>() * total;
                for s in samples {
                    if u < s.weight {
                        return HiddenSample::new(s.values.clone());
                    }
                    u -= s.weight;
                }
                HiddenSample::new(samples[samples.len() - 1].values.clone())
            }
        }
    }

    /// Quadrature rule: nodes with weights summing to 1.
    ///
    /// Uniform angles use the composite midpoint rule (tensor grid of
    /// `round(√n)` per axis in two dimensions).
    pub fn quadrature(&self, nodes: usize) -> Result<Vec<HiddenSample>> {
        if nodes == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        match self {
            Source::UniformAngles { dim: 1 } => Ok(midpoints(nodes)
                .into_iter()
                .map(|t| HiddenSample { values: vec![t], weight: 1.0 / nodes as f64 })
                .collect()),
            Source::UniformAngles { dim: 2 } => {
                let m = ((nodes as f64).sqrt().round() as usize).max(1);
                let axis = midpoints(m);
                let w = 1.0 / (m * m) as f64;
                Ok(axis
                    .iter()
                    .flat_map(|&x| axis.iter().map(move |&y| HiddenSample { values: vec![x, y], weight: w }))
                    .collect())
            }
            Source::UniformAngles { dim } => Err(Error::Dimension(*dim)),
            Source::Point { values } => Ok(vec![HiddenSample::new(values.clone())]),
            Source::Discrete { samples } => {
                let total: f64 = samples.iter().map(|s| s.weight).sum();
                Ok(samples
                    .iter()
                    .map(|s| HiddenSample { values: s.values.clone(), weight: s.weight / total })
                    .collect())
            }
        }
    }

    /// Deterministic evaluation points for grid checks: midpoints for
    /// uniform angles in one or two dimensions, the full support for
    /// point and discrete sources, seeded draws otherwise.
    pub fn probe_points(&self, count: usize) -> Vec<HiddenSample> {
        match self {
            Source::UniformAngles { dim: 1 } => midpoints(count).into_iter().map(|t| HiddenSample::new(vec![t])).collect(),
            Source::UniformAngles { dim: 2 } => {
                let m = ((count as f64).sqrt().ceil() as usize).max(1);
                let axis = midpoints(m);
                axis.iter()
                    .flat_map(|&x| axis.iter().map(move |&y| HiddenSample::new(vec![x, y])))
                    .collect()
            }
            Source::UniformAngles { .. } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
                (0..count).map(|_| self.sample(&mut rng)).collect()
            }
            Source::Point { values } => vec![HiddenSample::new(values.clone())],
            Source::Discrete { samples } => samples.iter().map(|s| HiddenSample::new(s.values.clone())).collect(),
        }
    }

    pub fn describe_probes(&self, count: usize) -> String {
        match self {
            Source::UniformAngles { dim: 1 } => format!("{count} midpoint angles"),
            Source::UniformAngles { dim: 2 } => {
                let m = ((count as f64).sqrt().ceil() as usize).max(1);
                format!("{m}x{m} midpoint angle grid")
            }
            Source::UniformAngles { dim } => format!("{count} seeded draws (seed 0) in {dim} dims"),
            Source::Point { .. } => "single point source".to_string(),
            Source::Discrete { samples } => format!("{} discrete support points", samples.len()),
        }
    }
}

fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 + 0.5) * TAU / n as f64).collect()
}
