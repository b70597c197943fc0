//! Dense phase-one simplex for `A x = b, x ≥ 0` with Bland's rule.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};

pub const MAX_PIVOTS: usize = 10_000;

pub trait LpScalar:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Magnitudes at or below this count as zero when choosing pivots.
    fn pivot_eps() -> Self;
}

impl LpScalar for f64 {
    fn pivot_eps() -> Self {
        1e-12
    }
}

impl LpScalar for BigRational {
    fn pivot_eps() -> Self {
        BigRational::zero()
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Outcome of phase one: the minimal total artificial mass and the point reached.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOne<T> {
    pub infeasibility: T,
    pub x: Vec<T>,
}

/// Minimises `Σ |A x - b|` over `x ≥ 0` via artificial variables; `b` must be
/// nonnegative. The system is feasible iff `infeasibility` is (numerically) zero.
pub fn phase_one<T: LpScalar>(a: &[Vec<T>], b: &[T]) -> Result<PhaseOne<T>> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(invalid("constraint matrix and right-hand side disagree in size"));
    }
    let n = a[0].len();
    if a.iter().any(|row| row.len() != n) {
        return Err(invalid("constraint matrix is ragged"));
    }
    if b.iter().any(|v| *v < T::zero()) {
        return Err(invalid("phase one needs b >= 0"));
    }
    let width = n + m;

    // rows: [A | I | b]
    let mut rows: Vec<Vec<T>> = (0..m)
        .map(|r| {
            let mut row = a[r].clone();
            row.extend((0..m).map(|k| if k == r { T::one() } else { T::zero() }));
            row.push(b[r].clone());
            row
        })
        .collect();
    // reduced costs of the artificial objective, rhs holds -objective
    let mut cost: Vec<T> = (0..=width)
        .map(|j| {
            if (n..width).contains(&j) {
                T::zero()
            } else {
                rows.iter().fold(T::zero(), |acc, row| acc - row[j].clone())
            }
        })
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();
    let eps = T::pivot_eps();
    let neg_eps = -eps.clone();

    let mut pivots = 0;
    loop {
        let Some(col) = (0..width).find(|&j| cost[j] < neg_eps) else {
            break;
        };
        let mut leave: Option<(usize, T)> = None;
        for (r, row) in rows.iter().enumerate() {
            if row[col] > eps {
                let ratio = row[width].clone() / row[col].clone();
                let take = match &leave {
                    None => true,
                    Some((best_r, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*best_r]),
                };
                if take {
                    leave = Some((r, ratio));
                }
            }
        }
        // phase one is bounded below by zero, so an entering column always has a pivot row
        let Some((pr, _)) = leave else {
            return Err(invalid("unbounded phase-one direction"));
        };
        pivot(&mut rows, &mut cost, pr, col);
        basis[pr] = col;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::SolverNonconvergence(MAX_PIVOTS));
        }
    }

    let mut x = vec![T::zero(); n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = rows[r][width].clone();
        }
    }
    Ok(PhaseOne { infeasibility: -cost[width].clone(), x })
}

fn pivot<T: LpScalar>(rows: &mut [Vec<T>], cost: &mut [T], pr: usize, col: usize) {
    let p = rows[pr][col].clone();
    for v in rows[pr].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = rows[pr].clone();
    let eliminate = |row: &mut Vec<T>| {
        let f = row[col].clone();
        if !f.is_zero() {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
    };
    for (r, row) in rows.iter_mut().enumerate() {
        if r != pr {
            eliminate(row);
        }
    }
    let mut c = cost.to_vec();
    eliminate(&mut c);
    cost.clone_from_slice(&c);
}
