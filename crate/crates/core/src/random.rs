//! Seeded generators of random local models for property suites.

use std::f64::consts::TAU;

use rand::Rng;

use crate::model::{deterministic_lhv, HiddenSample, LocalModel, Setting, Source};

/// Random trigonometric polynomial in the setting and the hidden angles.
#[derive(Clone, Debug)]
struct Wave {
    offset: f64,
    terms: Vec<(f64, f64, usize, f64, f64)>,
}

impl Wave {
    fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let terms = (0..3)
            .map(|_| {
                let amp = rng.random::<f64>() * 2.0 - 1.0;
                let freq = rng.random_range(1..=3) as f64;
                let axis = rng.random_range(0..dim);
                let hfreq = rng.random_range(-2i32..=2) as f64;
                let phase = rng.random::<f64>() * TAU;
                (amp, freq, axis, hfreq, phase)
            })
            .collect();
        Wave { offset: rng.random::<f64>() - 0.5, terms }
    }

    fn eval(&self, a: Setting, h: &HiddenSample) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|&(amp, f, axis, hf, ph)| amp * (f * a.angle() + hf * h.values[axis] + ph).cos())
                .sum::<f64>()
    }
}

/// Random local model over one or two uniform hidden angles; half of the
/// draws are deterministic (sign of a random wave), half stochastic
/// (logistic squashing of a random wave).
pub fn random_local_model<R: Rng + ?Sized>(rng: &mut R) -> LocalModel {
    let dim = rng.random_range(1..=2);
    let (wa, wb) = (Wave::random(rng, dim), Wave::random(rng, dim));
    let source = Source::UniformAngles { dim };
    if rng.random_bool(0.5) {
        let sign = |x: f64| if x >= 0.0 { 1 } else { -1 };
        deterministic_lhv(move |a, h| sign(wa.eval(a, h)), move |b, h| sign(wb.eval(b, h)), source)
            .expect("sign outputs are ±1")
            .with_name("random-deterministic")
    } else {
        let gain = 1.0 + 4.0 * rng.random::<f64>();
        let squash = move |x: f64| 1.0 / (1.0 + (-gain * x).exp());
        LocalModel::new(source, move |a, h| squash(wa.eval(a, h)), move |b, h| squash(wb.eval(b, h)))
            .expect("logistic outputs lie in [0, 1]")
            .with_name("random-stochastic")
    }
}
