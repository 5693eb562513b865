//! The map `x ↦ f∘σ_x` into `L²(X)`, the distances it induces, and its
//! first and second derivatives.

mod differential;
mod jacobi;

pub use differential::{dphi, hessian, pullback_metric, pullback_metric_integrand, MetricAtPoint, TimelikeChord};
pub use jacobi::{jacobi_solve, JacobiSolution};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lorentz::{relation, SigmaSolver};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::{Grid, Point};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The scalar function composed with σ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FSpec {
    /// `x⁴`
    H,
    /// `(½ + (r/2)·sgn x)·|x|·x³`
    Fr(f64),
    Abs,
    Identity,
    /// Indicator of `(0, ∞)`.
    ChiPlus,
    /// Indicator of `(−∞, 0)`.
    ChiMinus,
}

impl FSpec {
    pub fn fr(r: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange(format!("r = {r} outside [-1, 1]")));
        }
        Ok(FSpec::Fr(r))
    }

    /// Whether `f` is `C⁴`, as required by the differential formulas.
    pub fn is_smooth(&self) -> bool {
        matches!(self, FSpec::H | FSpec::Fr(_))
    }

    /// Coefficients `(a, b)` with `f(x) = a x⁴` for `x > 0`, `−b x⁴` for
    /// `x < 0` (smooth variants only).
    fn quartic_coeffs<T: Real>(&self) -> Option<(T, T)> {
        match *self {
            FSpec::H => Some((T::one(), -T::one())),
            FSpec::Fr(r) => {
                let r = T::of(r);
                Some(((T::one() + r) * T::half(), (T::one() - r) * T::half()))
            }
            _ => None,
        }
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        match self {
            FSpec::Abs => x.abs(),
            FSpec::Identity => x,
            FSpec::ChiPlus => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FSpec::ChiMinus => {
                if x < T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            _ => self.derivative(x, 0),
        }
    }

    /// `k`-th derivative (`k ≤ 2`) for smooth variants; zero otherwise.
    pub fn derivative<T: Real>(&self, x: T, k: usize) -> T {
        let Some((a, b)) = self.quartic_coeffs::<T>() else {
            return T::zero();
        };
        let c = if x > T::zero() { a } else { -b };
        let x2 = x * x;
        match k {
            0 => c * x2 * x2,
            1 => c * T::of(4.0) * x2 * x,
            2 => c * T::of(12.0) * x2,
            _ => c * T::of(24.0) * x,
        }
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::H => write!(f, "h"),
            FSpec::Fr(r) => write!(f, "fr:{r}"),
            FSpec::Abs => write!(f, "abs"),
            FSpec::Identity => write!(f, "id"),
            FSpec::ChiPlus => write!(f, "chi+"),
            FSpec::ChiMinus => write!(f, "chi-"),
        }
    }
}

impl FromStr for FSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(FSpec::H),
            "abs" => Ok(FSpec::Abs),
            "id" | "identity" => Ok(FSpec::Identity),
            "chi+" | "chi_plus" => Ok(FSpec::ChiPlus),
            "chi-" | "chi_minus" => Ok(FSpec::ChiMinus),
            _ => {
                let r = s
                    .strip_prefix("fr:")
                    .ok_or_else(|| Error::Parse(format!("unknown function '{s}'")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad r in '{s}': {e}")))?;
                FSpec::fr(r)
            }
        }
    }
}

/// `Φ(x) = f∘σ_x` sampled on a grid.
#[derive(Clone, Debug)]
pub struct EmbeddedPoint<T> {
    pub base: Point<T>,
    pub values: Field<T>,
    pub fspec: FSpec,
}

pub fn phi<T: Real>(solver: &SigmaSolver<'_, T>, x: &Point<T>, fspec: FSpec) -> Result<EmbeddedPoint<T>> {
    let sigma = solver.field(x)?;
    Ok(EmbeddedPoint { base: *x, values: sigma.values.map(|s| fspec.eval(s)), fspec })
}

/// Embeds many points in parallel (output order = input order).
pub fn phi_many<T: Real>(solver: &SigmaSolver<'_, T>, xs: &[Point<T>], fspec: FSpec) -> Result<Vec<EmbeddedPoint<T>>> {
    xs.par_iter().map(|x| phi(solver, x, fspec)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            "inf" => Ok(Norm::LInf),
            _ => Err(Error::Parse(format!("unknown norm '{s}', expected 1, 2 or inf"))),
        }
    }
}

/// Weighted `Lᵖ` norm of a field (`∞`: max over nodes of positive weight).
pub fn norm<T: Real>(values: &[T], grid: &Grid<T>, p: Norm) -> T {
    let w = grid.weights();
    match p {
        Norm::L1 => pairwise_sum(values.len(), |i| w[i] * values[i].abs()),
        Norm::L2 => pairwise_sum(values.len(), |i| w[i] * values[i] * values[i]).sqrt(),
        Norm::LInf => values
            .iter()
            .zip(w)
            .filter(|(_, &wi)| wi > T::zero())
            .fold(T::zero(), |m, (v, _)| m.max(v.abs())),
    }
}

/// `|Φ(x) − Φ(y)|_{Lᵖ}`.
pub fn dist_p<T: Real>(x: &EmbeddedPoint<T>, y: &EmbeddedPoint<T>, grid: &Grid<T>, p: Norm) -> Result<T> {
    x.values.check_on(grid)?;
    y.values.check_on(grid)?;
    let diff: Vec<T> = x.values.values.iter().zip(&y.values.values).map(|(a, b)| *a - *b).collect();
    Ok(norm(&diff, grid, p))
}

/// All-pairs distance matrix, rows computed in parallel.
pub fn distance_matrix<T: Real>(points: &[EmbeddedPoint<T>], grid: &Grid<T>, p: Norm) -> Result<Vec<Vec<T>>> {
    points
        .par_iter()
        .map(|x| points.iter().map(|y| dist_p(x, y, grid, p)).collect::<Result<Vec<T>>>())
        .collect()
}

/// `vol(J⁺(x) △ J⁺(y)) + vol(J⁻(x) △ J⁻(y))` by weighted node count, with
/// cones read from the exact causal relation.
pub fn beem_distance<T: Real>(grid: &Grid<T>, x: &Point<T>, y: &Point<T>) -> T {
    let spec = grid.spec();
    let w = grid.weights();
    let nodes = grid.nodes();
    pairwise_sum(nodes.len(), |i| {
        let rx = relation(spec, x, &nodes[i]);
        let ry = relation(spec, y, &nodes[i]);
        let fut = rx.causal_future() != ry.causal_future();
        let past = is_causal_past(&rx) != is_causal_past(&ry);
        let count = T::of_usize(fut as usize + past as usize);
        w[i] * count
    })
}

fn is_causal_past(r: &crate::lorentz::Relation) -> bool {
    use crate::lorentz::{Direction, Relation};
    matches!(r, Relation::Identical | Relation::Chronological(Direction::Past) | Relation::Causal(Direction::Past))
}

/// Beem distance assembled as `d^{χ₋}_1 + d^{χ₊}_1` from σ-fields.
pub fn beem_distance_from_fields<T: Real>(solver: &SigmaSolver<'_, T>, x: &Point<T>, y: &Point<T>) -> Result<T> {
    let grid = solver.grid();
    let mut total = T::zero();
    for f in [FSpec::ChiMinus, FSpec::ChiPlus] {
        total = total + dist_p(&phi(solver, x, f)?, &phi(solver, y, f)?, grid, Norm::L1)?;
    }
    Ok(total)
}
