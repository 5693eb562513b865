//! Recovery of the causal structure from the three distances
//! `(d_{−1/2}, d_0, d_{1/2})` of the `f_r` family.

mod pipeline;
mod relation;
mod sample;

pub use pipeline::{analyze, reconstruct_grid, Confusion, OverlapRow, ReconstructionOptions, ReconstructionReport};
pub use relation::{
    boundary_detect, causal_closure, chron_reconstruct, consistency_check, gram_table, overlap_constant,
    overlap_integral, BoundarySets, ChronMatrix, ConsistencyReport, Overlap, OVERLAP_CONSTANT,
};
pub use sample::{lambda_fields, triple_table, LambdaFields, PairTable, SampleKind, SampleSet, Symmetry};

use crate::error::{Error, Result};
use crate::extended::Ext;
use crate::linalg::{det3_exact, solve3_exact};
use crate::scalar::Real;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

/// The three parameters whose distances are observed.
pub const TRIPLE_R: [f64; 3] = [-0.5, 0.0, 0.5];

/// `(a_r, b_r)` with `f_r∘σ = a_r λ⁺ − b_r λ⁻`.
pub fn ab<T: Real>(r: T) -> (T, T) {
    ((T::one() + r) * T::half(), (T::one() - r) * T::half())
}

/// Squared distances `d_r²` for `r ∈ TRIPLE_R`, kept in double-word
/// precision so that small Gram entries survive next to large ones.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DistanceTriple<T> {
    pub sq: [Ext<T>; 3],
}

impl<T: Real> DistanceTriple<T> {
    pub fn from_distances(d: [T; 3]) -> Result<Self> {
        if d.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(Error::OutOfRange(format!("distances must be finite and non-negative: {d:?}")));
        }
        Ok(Self { sq: d.map(|x| Ext::two_prod(x, x)) })
    }

    pub fn distances(&self) -> [T; 3] {
        self.sq.map(|s| s.value().max(T::zero()).sqrt())
    }

    /// Assembles `d_r² = a_r²·S⁺⁺ + b_r²·S⁻⁻ − 2a_r b_r·S⁺⁻` from the three
    /// quadratic sums of `u± = λ_p± − λ_q±`.
    pub fn from_quadratic_sums(spp: T, smm: T, spm: T) -> Self {
        let sq = TRIPLE_R.map(|r| {
            let (a, b) = ab(T::of(r));
            Ext::two_prod(a * a, spp) + Ext::two_prod(b * b, smm) + Ext::two_prod(-T::two() * a * b, spm)
        });
        Self { sq }
    }
}

/// `A = |u⁺|²`, `B = |u⁻|²`, `C = ⟨u⁺, u⁻⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Gram<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Gram<T> {
    /// Forward map to the observed triple.
    pub fn to_triple(&self) -> DistanceTriple<T> {
        DistanceTriple::from_quadratic_sums(self.a, self.b, self.c)
    }
}

/// Rows `(a_r², b_r², −2a_r b_r)` for `r ∈ TRIPLE_R`, exactly.
pub fn coefficient_matrix() -> [[Rational64; 3]; 3] {
    let half = Rational64::new(1, 2);
    let one = Rational64::from_integer(1);
    TRIPLE_R.map(|r| {
        let r = Rational64::new((r * 2.0) as i64, 2);
        let (a, b) = ((one + r) * half, (one - r) * half);
        [a * a, b * b, -Rational64::from_integer(2) * a * b]
    })
}

pub fn coefficient_determinant() -> Rational64 {
    det3_exact(&coefficient_matrix())
}

/// Exact solve over the rationals: squared distances to `(A, B, C)`.
pub fn gram_recover_exact(sq: [Rational64; 3]) -> Result<[Rational64; 3]> {
    solve3_exact(&coefficient_matrix(), &sq).ok_or(Error::SingularSystem)
}

/// Inverse of the coefficient matrix (integer entries), via exact solves.
fn inverse_coefficients<T: Real>() -> Result<[[T; 3]; 3]> {
    let m = coefficient_matrix();
    let mut inv = [[T::zero(); 3]; 3];
    for col in 0..3 {
        let mut e = [Rational64::from_integer(0); 3];
        e[col] = Rational64::from_integer(1);
        let x = solve3_exact(&m, &e).ok_or(Error::SingularSystem)?;
        for row in 0..3 {
            inv[row][col] = T::of(*x[row].numer() as f64 / *x[row].denom() as f64);
        }
    }
    Ok(inv)
}

/// Solves the 3×3 system for the Gram data of one pair.
pub fn gram_recover<T: Real>(triple: &DistanceTriple<T>) -> Result<Gram<T>> {
    let inv = inverse_coefficients::<T>()?;
    gram_recover_with(&inv, triple)
}

pub(crate) fn gram_recover_with<T: Real>(inv: &[[T; 3]; 3], triple: &DistanceTriple<T>) -> Result<Gram<T>> {
    if triple.sq.iter().any(|s| !s.hi.is_finite()) {
        return Err(Error::OutOfRange("non-finite distance in triple".into()));
    }
    let row = |k: usize| {
        (triple.sq[0].scale(inv[k][0]) + triple.sq[1].scale(inv[k][1]) + triple.sq[2].scale(inv[k][2])).value()
    };
    Ok(Gram { a: row(0), b: row(1), c: row(2) })
}

/// `d_r = √(a_r²A + b_r²B − 2a_r b_r C)`, clipped at zero.
pub fn d_r_eval<T: Real>(g: &Gram<T>, r: T) -> T {
    let (a, b) = ab(r);
    (a * a * g.a + b * b * g.b - T::two() * a * b * g.c).max(T::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_round_trip() {
        let g = Gram { a: 4.0f64, b: 1.0, c: 0.0 };
        let t = g.to_triple();
        let d2: Vec<f64> = t.sq.iter().map(|s| s.value()).collect();
        assert_eq!(d2, vec![0.8125, 1.25, 2.3125]);
        let back = gram_recover(&DistanceTriple::from_distances(t.distances()).unwrap()).unwrap();
        assert!((back.a - 4.0).abs() < 1e-10 && (back.b - 1.0).abs() < 1e-10 && back.c.abs() < 1e-10);
        assert!((d_r_eval(&back, 1.0) - 2.0).abs() < 1e-10);
        assert!((d_r_eval(&back, -1.0) - 1.0).abs() < 1e-10);
        assert!((d_r_eval(&back, 0.0) - 1.25f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn zero_triple_gives_zero_gram() {
        let g = gram_recover(&DistanceTriple::from_distances([0.0f64; 3]).unwrap()).unwrap();
        assert_eq!(g, Gram { a: 0.0, b: 0.0, c: 0.0 });
    }

    #[test]
    fn determinant_is_exact() {
        assert_eq!(coefficient_determinant(), Rational64::new(-256, 4096));
        let inv = inverse_coefficients::<f64>().unwrap();
        assert_eq!(inv, [[1.0, -3.0, 3.0], [3.0, -3.0, 1.0], [2.0, -5.0, 2.0]]);
    }

    #[test]
    fn exact_recovery_over_rationals() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let sq = [r(13, 16), r(5, 4), r(37, 16)];
        assert_eq!(gram_recover_exact(sq).unwrap(), [r(4, 1), r(1, 1), r(0, 1)]);
    }

    #[test]
    fn invalid_triples_rejected() {
        assert!(DistanceTriple::from_distances([1.0, f64::NAN, 0.0]).is_err());
        assert!(DistanceTriple::from_distances([1.0, -1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_random(a in 0.0f64..10.0, b in 0.0f64..10.0, t in -1.0f64..1.0) {
            let c = t * (a * b).sqrt();
            let g = Gram { a, b, c };
            let d = g.to_triple().distances();
            let back = gram_recover(&DistanceTriple::from_distances(d).unwrap()).unwrap();
            let scale = 1.0 + a + b;
            prop_assert!((back.a - a).abs() < 1e-10 * scale);
            prop_assert!((back.b - b).abs() < 1e-10 * scale);
            prop_assert!((back.c - c).abs() < 1e-10 * scale);
            for (k, r) in TRIPLE_R.iter().enumerate() {
                prop_assert!((d_r_eval(&back, *r) - d[k]).abs() < 1e-10 * scale);
            }
        }
    }
}
