use super::{deterministic_lhv, JointModel, JointTable, LocalModel, Outcome, Setting, Source};
use crate::behavior::Behavior;
use crate::error::{invalid, Result};

fn sign(x: f64) -> i32 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Both wings always report fixed outcomes.
pub fn constant_model(a: Outcome, b: Outcome) -> LocalModel {
    let (va, vb) = (a.value(), b.value());
    deterministic_lhv(move |_, _| va, move |_, _| vb, Source::uniform_angle())
        .expect("constant outcomes are valid")
        .with_name("constant")
}

/// `A = sign cos(a - h)`, `B = -sign cos(b - h)` with `h` uniform on the circle.
///
/// Correlator is `-1 + 2|a - b|/π` for `|a - b| ≤ π`.
pub fn sign_model() -> LocalModel {
    deterministic_lhv(
        |a, h| sign((a.angle() - h.first()).cos()),
        |b, h| -sign((b.angle() - h.first()).cos()),
        Source::uniform_angle(),
    )
    .expect("sign strategies are valid")
    .with_name("deterministic-sign")
}

/// `p(A=+|a,h) = (1 + v cos(a - h))/2`, `p(B=+|b,h) = (1 - v cos(b - h))/2`.
///
/// Correlator is `-(v²/2) cos(a - b)`.
pub fn stochastic_cos_model(visibility: f64) -> Result<LocalModel> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(invalid(format!("visibility {visibility} outside [0, 1]")));
    }
    let v = visibility;
    Ok(LocalModel::new(
        Source::uniform_angle(),
        move |a, h| 0.5 * (1.0 + v * (a.angle() - h.first()).cos()),
        move |b, h| 0.5 * (1.0 - v * (b.angle() - h.first()).cos()),
    )?
    .with_name("stochastic-cos"))
}

/// Singlet prediction `p(A,B) = (1 - A·B·cos(a - b))/4`.
pub fn singlet_table(a: Setting, b: Setting) -> JointTable {
    let c = (a.angle() - b.angle()).cos();
    JointTable([0.25 * (1.0 - c), 0.25 * (1.0 + c), 0.25 * (1.0 + c), 0.25 * (1.0 - c)])
}

pub fn singlet_reference_behavior(settings_a: &[Setting], settings_b: &[Setting]) -> Result<Behavior> {
    Behavior::from_fn(settings_a.to_vec(), settings_b.to_vec(), |i, j| {
        singlet_table(settings_a[i], settings_b[j])
    })
}

/// Singlet statistics as a joint model with a one-point hidden source.
pub fn singlet_joint_model() -> JointModel {
    JointModel::new(Source::point(vec![0.0]), |a, b, _| singlet_table(a, b))
        .expect("singlet tables are distributions")
        .with_name("singlet-reference")
}
