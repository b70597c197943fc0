use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instrument setting, an angle in radians stored as its representative in `[0, 2π)`.
///
/// Models whose response is not 2π-periodic in the setting (the phase model
/// with `2s` non-integer) see only the canonical representative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Setting(f64);

impl Setting {
    pub fn new(angle: f64) -> Self {
        let r = angle.rem_euclid(TAU);
        // rem_euclid can round up to TAU for tiny negative inputs
        Setting(if r >= TAU { 0.0 } else { r })
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    /// `n` evenly spaced settings `k·2π/n`.
    pub fn evenly_spaced(n: usize) -> Vec<Setting> {
        (0..n).map(|k| Setting::new(k as f64 * TAU / n as f64)).collect()
    }
}

impl From<f64> for Setting {
    fn from(angle: f64) -> Self {
        Setting::new(angle)
    }
}

impl From<Setting> for f64 {
    fn from(s: Setting) -> f64 {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn sign(self) -> f64 {
        self.value() as f64
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

impl TryFrom<i32> for Outcome {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidOutcome(other)),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i32::deserialize(d)?;
        Outcome::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// One realisation of the hidden parameters of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenSample {
    pub values: Vec<f64>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl HiddenSample {
    pub fn new(values: Vec<f64>) -> Self {
        HiddenSample { values, weight: 1.0 }
    }

    pub fn weighted(values: Vec<f64>, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(crate::error::invalid(format!("sample weight {weight} must be finite and >= 0")));
        }
        Ok(HiddenSample { values, weight })
    }

    /// First coordinate; every built-in model has at least one.
    pub fn first(&self) -> f64 {
        self.values[0]
    }
}

/// Conditional outcome distribution `p(A,B | a, b, h)` for one setting pair,
/// ordered `[++, +-, -+, --]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointTable(pub [f64; 4]);

impl JointTable {
    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.0[2 * a.index() + b.index()]
    }

    /// Product distribution of two independent wings given `p(A=+)` and `p(B=+)`.
    pub fn product(pa_plus: f64, pb_plus: f64) -> Self {
        let (pa_minus, pb_minus) = (1.0 - pa_plus, 1.0 - pb_plus);
        JointTable([
            pa_plus * pb_plus,
            pa_plus * pb_minus,
            pa_minus * pb_plus,
            pa_minus * pb_minus,
        ])
    }

    /// Point mass on a single outcome pair.
    pub fn deterministic(a: Outcome, b: Outcome) -> Self {
        let mut t = [0.0; 4];
        t[2 * a.index() + b.index()] = 1.0;
        JointTable(t)
    }

    pub fn uniform() -> Self {
        JointTable([0.25; 4])
    }

    pub fn marginal_a(&self, a: Outcome) -> f64 {
        self.get(a, Outcome::Plus) + self.get(a, Outcome::Minus)
    }

    pub fn marginal_b(&self, b: Outcome) -> f64 {
        self.get(Outcome::Plus, b) + self.get(Outcome::Minus, b)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `Σ A·B·p(A,B)`.
    pub fn correlator(&self) -> f64 {
        self.0[0] - self.0[1] - self.0[2] + self.0[3]
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.0.iter().all(|&p| p >= -tol && p <= 1.0 + tol) && (self.sum() - 1.0).abs() <= tol
    }
}
