use super::sample::{quadratic_sums, LambdaFields, PairTable};
use super::{d_r_eval, gram_recover_with, inverse_coefficients, DistanceTriple, Gram};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::Grid;
use bitvec::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Solves every stored triple of a table.
pub fn gram_table<T: Real>(triples: &PairTable<DistanceTriple<T>>) -> Result<PairTable<Gram<T>>> {
    let inv = inverse_coefficients::<T>()?;
    triples.try_map(|t| gram_recover_with(&inv, t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySets {
    pub future: Vec<bool>,
    pub past: Vec<bool>,
    pub tol: f64,
}

impl BoundarySets {
    pub fn future_indices(&self) -> Vec<usize> {
        self.future.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()
    }

    pub fn past_indices(&self) -> Vec<usize> {
        self.past.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()
    }
}

/// Default detection threshold: `ε^{3/4}` times the largest `d_{±1}`.
fn default_boundary_tol<T: Real>(grams: &PairTable<Gram<T>>) -> T {
    let n = grams.len();
    let scale = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n).fold(T::zero(), |m, j| {
                let g = grams.get(i, j);
                m.max(d_r_eval(&g, T::one())).max(d_r_eval(&g, -T::one()))
            })
        })
        .reduce(T::zero, |a, b| a.max(b));
    scale * T::epsilon().powf(T::of(0.75))
}

/// `x ∈ ∂±` iff `min_{y≠x} d_{±1}(x, y) < tol`.
pub fn boundary_detect<T: Real>(grams: &PairTable<Gram<T>>, tol: Option<T>) -> Result<BoundarySets> {
    let n = grams.len();
    let tol = tol.unwrap_or_else(|| default_boundary_tol(grams));
    let mins: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n).filter(|&j| j != i).fold((T::infinity(), T::infinity()), |(p, m), j| {
                let g = grams.get(i, j);
                (p.min(d_r_eval(&g, T::one())), m.min(d_r_eval(&g, -T::one())))
            })
        })
        .collect();
    let future: Vec<bool> = mins.iter().map(|(p, _)| *p < tol).collect();
    let past: Vec<bool> = mins.iter().map(|(_, m)| *m < tol).collect();
    if !future.iter().any(|b| *b) || !past.iter().any(|b| *b) {
        return Err(Error::EmptyBoundary(format!("no sample point has a vanishing d_±1 below {}", tol.as_f64())));
    }
    Ok(BoundarySets { future, past, tol: tol.as_f64() })
}

/// Recovered chronological relation: `future[p][q]` iff `p ≪ q`.
#[derive(Clone, Debug)]
pub struct ChronMatrix<T> {
    pub future: Vec<BitVec<u64, Lsb0>>,
    /// `C / (A + B)` per pair.
    pub statistic: PairTable<T>,
    pub tol: T,
    pub reference: usize,
}

impl<T: Real> ChronMatrix<T> {
    pub fn len(&self) -> usize {
        self.future.len()
    }

    pub fn is_empty(&self) -> bool {
        self.future.is_empty()
    }

    pub fn precedes(&self, p: usize, q: usize) -> bool {
        self.future[p][q]
    }

    pub fn related(&self, p: usize, q: usize) -> bool {
        self.future[p][q] || self.future[q][p]
    }
}

fn statistic<T: Real>(g: &Gram<T>) -> T {
    let s = g.a + g.b;
    if s > T::zero() {
        g.c / s
    } else {
        T::zero()
    }
}

/// Relation tolerance: three times the largest `|C/(A+B)|` over pairs of
/// detected boundary points on the same side (spacelike by construction),
/// floored at `64 ε²`.
fn calibrated_tol<T: Real>(stat: &PairTable<T>, boundary: &BoundarySets) -> T {
    let mut m = T::zero();
    for side in [boundary.future_indices(), boundary.past_indices()] {
        for &i in &side {
            for &j in &side {
                if i != j {
                    m = m.max(stat.get(i, j).abs());
                }
            }
        }
    }
    let eps = T::epsilon();
    (T::of(3.0) * m).max(T::of(64.0) * eps * eps)
}

/// Declares `p, q` chronologically related iff `|C/(A+B)| > tol`, oriented
/// `p ≪ q` when `d₁(p, r̂) > d₁(q, r̂)`.
pub fn chron_reconstruct<T: Real>(
    grams: &PairTable<Gram<T>>,
    boundary: &BoundarySets,
    tol: Option<T>,
) -> Result<ChronMatrix<T>> {
    let reference = *boundary.future_indices().first().ok_or_else(|| Error::EmptyBoundary("no future boundary point to orient by".into()))?;
    let n = grams.len();
    let stat = grams.map(statistic);
    let tol = tol.unwrap_or_else(|| calibrated_tol(&stat, boundary));
    let d1: Vec<T> = (0..n).map(|i| d_r_eval(&grams.get(i, reference), T::one())).collect();
    let future = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut row = bitvec![u64, Lsb0; 0; n];
            for q in 0..n {
                if p != q && stat.get(p, q).abs() > tol && d1[p] > d1[q] {
                    row.set(q, true);
                }
            }
            row
        })
        .collect();
    Ok(ChronMatrix { future, statistic: stat, tol, reference })
}

/// `p ≤ q ⟺ ∀ r: (q ≪ r ⇒ p ≪ r)` evaluated over the sample; reflexive.
pub fn causal_closure<T: Real>(chron: &ChronMatrix<T>) -> Vec<BitVec<u64, Lsb0>> {
    let n = chron.len();
    (0..n)
        .into_par_iter()
        .map(|p| {
            let fp = chron.future[p].as_raw_slice();
            let mut row = bitvec![u64, Lsb0; 0; n];
            for q in 0..n {
                let fq = chron.future[q].as_raw_slice();
                if p == q || fq.iter().zip(fp).all(|(a, b)| a & !b == 0) {
                    row.set(q, true);
                }
            }
            row
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub reflexive_violations: usize,
    pub antisymmetry_violations: usize,
    pub transitivity_violations: usize,
    /// Up to 16 offending triples `(p, q, r)` with `p ≪ q ≪ r`, not `p ≪ r`.
    pub transitivity_examples: Vec<(usize, usize, usize)>,
}

impl ConsistencyReport {
    pub fn is_clean(&self) -> bool {
        self.reflexive_violations + self.antisymmetry_violations + self.transitivity_violations == 0
    }
}

/// Irreflexivity, antisymmetry and transitivity of a recovered `≪`.
pub fn consistency_check<T: Real>(chron: &ChronMatrix<T>) -> ConsistencyReport {
    let n = chron.len();
    let per_row: Vec<ConsistencyReport> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut r = ConsistencyReport::default();
            let fp = &chron.future[p];
            if fp[p] {
                r.reflexive_violations += 1;
            }
            for q in fp.iter_ones() {
                if q > p && chron.future[q][p] {
                    r.antisymmetry_violations += 1;
                }
                let fq = chron.future[q].as_raw_slice();
                for (k, (a, b)) in fq.iter().zip(fp.as_raw_slice()).enumerate() {
                    let mut miss = a & !b;
                    r.transitivity_violations += miss.count_ones() as usize;
                    while miss != 0 && r.transitivity_examples.len() < 16 {
                        r.transitivity_examples.push((p, q, 64 * k + miss.trailing_zeros() as usize));
                        miss &= miss - 1;
                    }
                }
            }
            r
        })
        .collect();
    let mut total = ConsistencyReport::default();
    for r in per_row {
        total.reflexive_violations += r.reflexive_violations;
        total.antisymmetry_violations += r.antisymmetry_violations;
        total.transitivity_violations += r.transitivity_violations;
        for e in r.transitivity_examples {
            if total.transitivity_examples.len() < 16 {
                total.transitivity_examples.push(e);
            }
        }
    }
    total
}

/// Factor linking `C = ⟨u⁺, u⁻⟩` to the quartic overlap
/// `∫ (λ_p⁺λ_q⁻ + λ_q⁺λ_p⁻)`; fixed by [`overlap_constant`] and recorded here.
pub const OVERLAP_CONSTANT: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap<T> {
    pub direct: T,
    pub reconstructed: T,
}

fn direct_overlap<T: Real>(quad: &Grid<T>, p: &LambdaFields<T>, q: &LambdaFields<T>) -> T {
    let w = quad.weights();
    pairwise_sum(w.len(), |i| w[i] * (p.plus[i] * q.minus[i] + q.plus[i] * p.minus[i]))
}

/// Ratio `C / overlap` for one pair (the oracle evaluation fixing the
/// constant); `None` if the pair's overlap vanishes.
pub fn overlap_constant<T: Real>(quad: &Grid<T>, p: &LambdaFields<T>, q: &LambdaFields<T>) -> Option<T> {
    let direct = direct_overlap(quad, p, q);
    if direct == T::zero() {
        return None;
    }
    let [_, _, c] = quadratic_sums(quad, p, q);
    Some(c / direct)
}

/// Overlap by quadrature, and the same quantity read off the recovered Gram.
pub fn overlap_integral<T: Real>(
    quad: &Grid<T>,
    p: &LambdaFields<T>,
    q: &LambdaFields<T>,
    gram: &Gram<T>,
) -> Overlap<T> {
    Overlap { direct: direct_overlap(quad, p, q), reconstructed: gram.c / T::of(OVERLAP_CONSTANT) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{relation, SigmaSolver, DEFAULT_RADIUS};
    use crate::reconstruction::{lambda_fields, triple_table, SampleKind, SampleSet, Symmetry};
    use crate::spacetime::{grid_build, Point, SpacetimeSpec};

    struct Fixture {
        quad: Grid<f64>,
        samples: SampleSet<f64>,
        grams: PairTable<Gram<f64>>,
        extra: usize,
    }

    /// 8×8 sample grid with its rings, plus a few named points appended.
    fn fixture(extra: &[(f64, f64)]) -> Fixture {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let coarse = grid_build(&spec, 8, 8).unwrap();
        let quad = grid_build(&spec, 96, 96).unwrap();
        let base = SampleSet::from_grid(&coarse);
        let offset = base.len();
        let mut points = base.points.clone();
        let mut kinds = base.kinds.clone();
        for &(t, s) in extra {
            points.push(spec.pt(t, s));
            kinds.push(SampleKind::Interior);
        }
        let samples = SampleSet::from_points(points, kinds).unwrap();
        let triples = triple_table(&quad, &samples, Symmetry::None).unwrap();
        let grams = gram_table(&triples).unwrap();
        Fixture { quad, samples, grams, extra: offset }
    }

    #[test]
    fn boundary_sets_are_the_rings() {
        let f = fixture(&[]);
        let b = boundary_detect(&f.grams, None).unwrap();
        for (i, k) in f.samples.kinds.iter().enumerate() {
            assert_eq!(b.future[i], *k == SampleKind::FutureBoundary, "{i}");
            assert_eq!(b.past[i], *k == SampleKind::PastBoundary, "{i}");
        }
        // d₁ vanishes identically on ∂⁺ × ∂⁺
        let top = b.future_indices();
        assert_eq!(d_r_eval(&f.grams.get(top[0], top[3]), 1.0), 0.0);
        assert!(matches!(boundary_detect(&f.grams, Some(0.0)), Err(Error::EmptyBoundary(_))));
    }

    #[test]
    fn chronological_pair_and_spacelike_pair() {
        let f = fixture(&[(0.0, 0.0), (0.5, 0.3), (0.0, 1.0)]);
        let (p, q, s) = (f.extra, f.extra + 1, f.extra + 2);
        let b = boundary_detect(&f.grams, None).unwrap();
        let chron = chron_reconstruct(&f.grams, &b, None).unwrap();
        assert!(chron.statistic.get(p, q).abs() > chron.tol);
        assert!(chron.precedes(p, q) && !chron.precedes(q, p));
        assert!(chron.statistic.get(p, s).abs() <= chron.tol);
        assert!(!chron.related(p, s));
        assert!(!chron.related(p, p));
        assert!(consistency_check(&chron).is_clean());
    }

    #[test]
    fn closure_recovers_null_relation() {
        let f = fixture(&[(0.0, 0.0), (0.3, 0.3), (0.0, 1.0), (0.5, 0.1)]);
        let (p, q, s, c) = (f.extra, f.extra + 1, f.extra + 2, f.extra + 3);
        let spec = f.quad.spec();
        let pts = &f.samples.points;
        assert!(relation(spec, &pts[p], &pts[q]).causal_future());
        assert!(!relation(spec, &pts[p], &pts[q]).is_chronological());
        let b = boundary_detect(&f.grams, None).unwrap();
        let chron = chron_reconstruct(&f.grams, &b, None).unwrap();
        let closure = causal_closure(&chron);
        assert!(!chron.related(p, q));
        assert!(closure[p][q] && !closure[q][p]);
        assert!(!closure[p][s] && !closure[s][p]);
        assert!(chron.precedes(p, c) && closure[p][c]);
        assert!(closure[p][p]);
    }

    #[test]
    fn overlap_constant_and_spacelike_overlap() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let quad = grid_build(&spec, 64, 64).unwrap();
        let solver = SigmaSolver::new(&quad, DEFAULT_RADIUS).unwrap();
        let lf = |t: f64, s: f64| lambda_fields(&solver, &Point { t, s: [s, 0.0] }).unwrap();
        let (p, q, s) = (lf(-0.4, 0.0), lf(0.5, 0.3), lf(-0.4, 1.5));
        let c = overlap_constant(&quad, &p, &q).unwrap();
        assert!((c - OVERLAP_CONSTANT).abs() < 1e-12);
        assert!(overlap_constant(&quad, &p, &s).is_none());
        let [_, _, cps] = quadratic_sums(&quad, &p, &s);
        let o = overlap_integral(&quad, &p, &s, &Gram { a: 1.0, b: 1.0, c: cps });
        assert_eq!((o.direct, o.reconstructed), (0.0, 0.0));
        let [a, b, cpq] = quadratic_sums(&quad, &p, &q);
        let o = overlap_integral(&quad, &p, &q, &Gram { a, b, c: cpq });
        assert!(o.direct > 0.0);
        assert!((o.reconstructed / o.direct - 1.0).abs() < 1e-12);
    }
}
