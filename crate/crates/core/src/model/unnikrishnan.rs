//! Phase-correlation model with joint outcome law
//! `p(A,B | q1, q2, φ1, φ2) = ¼[1 + A·B·cos(2s(q1 - q2) + 2s(φ1 - φ2))]`,
//! so that `p(+,+) = ½ cos²[s(q1 - q2) + s(φ1 - φ2)]`.
//!
//! The amplitude forms `C_j,A = exp(i·s·A·(q_j + φ_j))` with unit
//! normalisation are a reconstruction: they are the simplest choice with
//! `Re(C1+ · C2+*) = cos(sΔq + sΔφ)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{JointModel, JointTable, Outcome, Setting, Source};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnnikrishnanParams {
    pub s: f64,
    /// Source-fixed value of `φ1 - φ2`.
    pub delta_phi: f64,
}

impl UnnikrishnanParams {
    pub fn new(s: f64, delta_phi: f64) -> Result<Self> {
        let p = UnnikrishnanParams { s, delta_phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_s(self.s)?;
        if !self.delta_phi.is_finite() {
            return Err(invalid("delta_phi must be finite"));
        }
        Ok(())
    }

    /// Phases carried by the pair: `φ1` from the hidden sample, `φ2 = φ1 - Δφ`.
    pub fn phases(&self, phi1: f64) -> (f64, f64) {
        (phi1, phi1 - self.delta_phi)
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("spin parameter s = {s} must be positive")))
    }
}

fn phase_arg(q1: Setting, q2: Setting, phi1: f64, phi2: f64, s: f64) -> f64 {
    s * (q1.angle() - q2.angle()) + s * (phi1 - phi2)
}

fn phase_table(q1: Setting, q2: Setting, phi1: f64, phi2: f64, s: f64) -> JointTable {
    let c = (2.0 * phase_arg(q1, q2, phi1, phi2, s)).cos();
    let same = 0.25 * (1.0 + c);
    let diff = 0.25 * (1.0 - c);
    JointTable([same, diff, diff, same])
}

pub fn unnikrishnan_joint_probability(
    q1: Setting,
    q2: Setting,
    phi1: f64,
    phi2: f64,
    s: f64,
    a: Outcome,
    b: Outcome,
) -> Result<f64> {
    check_s(s)?;
    Ok(phase_table(q1, q2, phi1, phi2, s).get(a, b))
}

/// Single-particle amplitude `C_A = exp(i·s·A·(q + φ))`.
pub fn unnikrishnan_amplitude(q: Setting, phi: f64, s: f64, outcome: Outcome) -> Complex64 {
    Complex64::from_polar(1.0, s * outcome.sign() * (q.angle() + phi))
}

/// Amplitude correlation `Re(C1+ · C2+*)`.
pub fn unnikrishnan_amplitude_correlation(q1: Setting, q2: Setting, phi1: f64, phi2: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    let c1 = unnikrishnan_amplitude(q1, phi1, s, Outcome::Plus);
    let c2 = unnikrishnan_amplitude(q2, phi2, s, Outcome::Plus);
    Ok((c1 * c2.conj()).re)
}

/// Joint model with `φ1` uniform on `[0, 2π)` as the hidden variable.
pub fn unnikrishnan_model(params: UnnikrishnanParams) -> Result<JointModel> {
    params.validate()?;
    Ok(JointModel::new(Source::uniform_angle(), move |q1, q2, h| {
        let (phi1, phi2) = params.phases(h.first().rem_euclid(TAU));
        phase_table(q1, q2, phi1, phi2, params.s)
    })?
    .with_name("unnikrishnan"))
}
