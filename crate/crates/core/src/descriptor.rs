//! JSON descriptions of the built-in models.
//!
//! ```json
//! {"type": "unnikrishnan", "s": 0.5, "delta_phi": 3.141592653589793}
//! ```
//!
//! | `type`              | fields                                   |
//! |---------------------|------------------------------------------|
//! | `constant`          | `outcome_a`, `outcome_b` (`1` or `-1`)   |
//! | `deterministic-sign`| none                                     |
//! | `stochastic-cos`    | `visibility` in `[0, 1]`                 |
//! | `singlet-reference` | none                                     |
//! | `unnikrishnan`      | `s > 0`, `delta_phi` (radians)           |
//! | `hbt`               | `threshold` (default `1.0`)              |

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hbt::hbt_model;
use crate::model::{
    constant_model, sign_model, singlet_joint_model, stochastic_cos_model, unnikrishnan_model, Model, Outcome,
    UnnikrishnanParams,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelDescriptor {
    Constant {
        outcome_a: Outcome,
        outcome_b: Outcome,
    },
    DeterministicSign,
    StochasticCos {
        visibility: f64,
    },
    SingletReference,
    Unnikrishnan {
        s: f64,
        delta_phi: f64,
    },
    Hbt {
        #[serde(default = "one")]
        threshold: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelDescriptor {
    pub fn build(&self) -> Result<Model> {
        Ok(match *self {
            ModelDescriptor::Constant { outcome_a, outcome_b } => constant_model(outcome_a, outcome_b).into(),
            ModelDescriptor::DeterministicSign => sign_model().into(),
            ModelDescriptor::StochasticCos { visibility } => stochastic_cos_model(visibility)?.into(),
            ModelDescriptor::SingletReference => singlet_joint_model().into(),
            ModelDescriptor::Unnikrishnan { s, delta_phi } => unnikrishnan_model(UnnikrishnanParams::new(s, delta_phi)?)?.into(),
            ModelDescriptor::Hbt { threshold } => hbt_model(threshold)?.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConditionalModel, Setting};

    #[test]
    fn parses_documented_forms() {
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"unnikrishnan","s":0.5,"delta_phi":3.0}"#).unwrap();
        assert_eq!(d, ModelDescriptor::Unnikrishnan { s: 0.5, delta_phi: 3.0 });
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"deterministic-sign"}"#).unwrap();
        assert!(matches!(d.build().unwrap(), Model::Local(_)));
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"hbt"}"#).unwrap();
        assert_eq!(d, ModelDescriptor::Hbt { threshold: 1.0 });
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"constant","outcome_a":1,"outcome_b":-1}"#).unwrap();
        let m = d.build().unwrap();
        let t = m.joint_table(Setting::new(0.0), Setting::new(0.0), &crate::HiddenSample::new(vec![0.0]));
        assert_eq!(t.0, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_unknown_types_fields_and_bad_values() {
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"type":"pilot-wave"}"#).is_err());
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"type":"unnikrishnan","s":0.5}"#).is_err());
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"type":"constant","outcome_a":0,"outcome_b":1}"#).is_err());
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"unnikrishnan","s":-1,"delta_phi":0}"#).unwrap();
        assert!(d.build().is_err());
    }
}
