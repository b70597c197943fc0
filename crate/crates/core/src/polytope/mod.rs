//! Local polytope of the two-setting, two-outcome scenario: its sixteen
//! deterministic vertices, the CHSH-form facets, and membership by linear
//! feasibility cross-checked against those facets.

mod simplex;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use simplex::{phase_one, rational, LpScalar, PhaseOne, MAX_PIVOTS};

use crate::behavior::Behavior;
use crate::error::{invalid, Error, Result};
use crate::locality::no_signaling_check;
use crate::model::{JointTable, Outcome, Setting};

/// `(A(a), A(a'), B(b), B(b'))`.
pub type Assignment = [Outcome; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicVertex {
    pub assignment: Assignment,
    pub behavior: Behavior,
}

/// Settings attached to vertex behaviors; membership compares cells only.
pub fn canonical_settings() -> ([Setting; 2], [Setting; 2]) {
    (
        [Setting::new(0.0), Setting::new(FRAC_PI_2)],
        [Setting::new(FRAC_PI_4), Setting::new(3.0 * FRAC_PI_4)],
    )
}

/// Vertex `v` takes outcome `-1` at position `k` when bit `3 - k` of `v` is set,
/// so vertex 0 is `(+,+,+,+)`.
pub fn assignment_of(v: usize) -> Assignment {
    std::array::from_fn(|k| if v >> (3 - k) & 1 == 1 { Outcome::Minus } else { Outcome::Plus })
}

fn vertex_cells(asg: &Assignment) -> [[JointTable; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| JointTable::deterministic(asg[i], asg[2 + j])))
}

pub fn enumerate_deterministic_vertices() -> Vec<DeterministicVertex> {
    let (sa, sb) = canonical_settings();
    (0..16)
        .map(|v| {
            let assignment = assignment_of(v);
            let cells = vertex_cells(&assignment);
            let behavior = Behavior::from_fn(sa.to_vec(), sb.to_vec(), |i, j| cells[i][j]).expect("vertex cells are distributions");
            DeterministicVertex { assignment, behavior }
        })
        .collect()
}

/// `S = A(a)B(b) + A(a)B(b') + A(a')B(b) - A(a')B(b')` in integers.
pub fn vertex_chsh(asg: &Assignment) -> i32 {
    let [a, a2, b, b2] = asg.map(Outcome::value);
    a * b + a * b2 + a2 * b - a2 * b2
}

/// Largest `|S|` over the deterministic vertices; exactly 2.
pub fn local_bound_chsh() -> f64 {
    (0..16).map(|v| vertex_chsh(&assignment_of(v)).abs()).max().unwrap_or(0) as f64
}

fn require_2x2(behavior: &Behavior) -> Result<()> {
    if behavior.shape() != (2, 2) {
        let (na, nb) = behavior.shape();
        return Err(invalid(format!("polytope tests need 2x2 settings, got {na}x{nb}")));
    }
    Ok(())
}

/// The eight CHSH-form values `±(E00 + E01 + E10 + E11 - 2·E_m)`.
///
/// Index `2m` is the `+` form with the minus sign on term `m` (in order
/// `ab, ab', a'b, a'b'`), index `2m + 1` its negation; index 6 is the
/// canonical `S`.
pub fn chsh_inequalities(behavior: &Behavior) -> Result<[f64; 8]> {
    require_2x2(behavior)?;
    let e = [behavior.correlator(0, 0), behavior.correlator(0, 1), behavior.correlator(1, 0), behavior.correlator(1, 1)];
    let total: f64 = e.iter().sum();
    Ok(std::array::from_fn(|k| {
        let v = total - 2.0 * e[k / 2];
        if k % 2 == 0 {
            v
        } else {
            -v
        }
    }))
}

/// Constraint rows: one per (cell, outcome) plus normalisation of the weights.
fn lp_system<T: LpScalar>(cells: &[[[T; 4]; 2]; 2]) -> (Vec<Vec<T>>, Vec<T>) {
    let vertices: Vec<_> = (0..16).map(|v| vertex_cells(&assignment_of(v))).collect();
    let mut a = Vec::with_capacity(17);
    let mut b = Vec::with_capacity(17);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..4 {
                a.push(vertices.iter().map(|vc| if vc[i][j].0[k] == 1.0 { T::one() } else { T::zero() }).collect());
                b.push(cells[i][j][k].clone());
            }
        }
    }
    a.push(vec![T::one(); 16]);
    b.push(T::one());
    (a, b)
}

/// Convex weights over the 16 vertices reproducing the behavior, if any.
///
/// The behavior is accepted as local when the phase-one residual is at most `tol`.
pub fn lp_weights(behavior: &Behavior, tol: f64) -> Result<Option<Vec<f64>>> {
    require_2x2(behavior)?;
    let cells: [[[f64; 4]; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| behavior.cell(i, j).0));
    let (a, b) = lp_system(&cells);
    let sol = phase_one(&a, &b)?;
    Ok((sol.infeasibility <= tol).then_some(sol.x))
}

/// Exact feasibility for rational cell tables `[a][b][++, +-, -+, --]`.
pub fn lp_weights_exact(cells: &[[[BigRational; 4]; 2]; 2]) -> Result<Option<Vec<BigRational>>> {
    for row in cells {
        for cell in row {
            let sum = cell.iter().fold(BigRational::zero(), |acc, p| acc + p);
            if cell.iter().any(|p| *p < BigRational::zero()) || !sum.is_one() {
                return Err(invalid("rational cells must be distributions"));
            }
        }
    }
    let (a, b) = lp_system(cells);
    let sol = phase_one(&a, &b)?;
    Ok(sol.infeasibility.is_zero().then_some(sol.x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipStatus {
    Local,
    Nonlocal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolatedInequality {
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    /// Vertex weights in `assignment_of` order, when local.
    pub weights: Option<Vec<f64>>,
    pub violated_inequality: Option<ViolatedInequality>,
    /// Largest CHSH-form value minus the local bound; positive means outside.
    pub gap: f64,
}

/// Decides whether a no-signaling 2x2 behavior lies in the local polytope.
///
/// Linear feasibility and the eight CHSH forms must agree; a disagreement is
/// reported as an error. The boundary `|S| = 2` counts as local.
pub fn membership(behavior: &Behavior, tol: f64) -> Result<MembershipVerdict> {
    require_2x2(behavior)?;
    let ns = no_signaling_check(behavior, tol)?;
    if !ns.passed() {
        return Err(Error::Signaling(ns.max_residual));
    }
    let ineq = chsh_inequalities(behavior)?;
    let (index, max_chsh) = ineq
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    let weights = lp_weights(behavior, tol)?;
    let chsh_local = max_chsh <= 2.0 + tol;
    if weights.is_some() != chsh_local {
        return Err(Error::OracleDisagreement { lp_local: weights.is_some(), max_chsh });
    }
    let gap = max_chsh - 2.0;
    Ok(match weights {
        Some(w) => MembershipVerdict { status: MembershipStatus::Local, weights: Some(w), violated_inequality: None, gap },
        None => MembershipVerdict {
            status: MembershipStatus::Nonlocal,
            weights: None,
            violated_inequality: Some(ViolatedInequality { index, value: max_chsh }),
            gap,
        },
    })
}

/// Mixture of vertex behaviors with the given weights.
pub fn reconstruct(weights: &[f64]) -> Result<Behavior> {
    if weights.len() != 16 {
        return Err(invalid("need 16 vertex weights"));
    }
    let mut cells = [[[0.0; 4]; 2]; 2];
    for (v, &w) in weights.iter().enumerate() {
        let vc = vertex_cells(&assignment_of(v));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..4 {
                    cells[i][j][k] += w * vc[i][j].0[k];
                }
            }
        }
    }
    let (sa, sb) = canonical_settings();
    Behavior::from_fn(sa.to_vec(), sb.to_vec(), |i, j| JointTable(cells[i][j]))
}

/// Random no-signaling 2x2 behavior: correlators and marginal expectations
/// uniform on `[-1, 1]`, redrawn until every cell is nonnegative.
pub fn random_no_signaling_behavior<R: Rng + ?Sized>(rng: &mut R) -> Behavior {
    let (sa, sb) = canonical_settings();
    loop {
        let mut u = || rng.random::<f64>() * 2.0 - 1.0;
        let (ma, mb) = ([u(), u()], [u(), u()]);
        let e = [[u(), u()], [u(), u()]];
        let cell = |i: usize, j: usize| {
            let p = |a: f64, b: f64| 0.25 * (1.0 + a * ma[i] + b * mb[j] + a * b * e[i][j]);
            JointTable([p(1.0, 1.0), p(1.0, -1.0), p(-1.0, 1.0), p(-1.0, -1.0)])
        };
        if (0..2).all(|i| (0..2).all(|j| cell(i, j).0.iter().all(|&p| p >= 0.0))) {
            return Behavior::from_fn(sa.to_vec(), sb.to_vec(), cell).expect("nonnegative cells summing to one");
        }
    }
}
