use super::DistanceTriple;
use crate::error::{Error, Result};
use crate::lorentz::{SigmaSolver, DEFAULT_RADIUS};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::{Grid, Point};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleKind {
    PastBoundary,
    Interior,
    FutureBoundary,
}

/// Index layout `layer · (n1·n2) + i1 · n2 + i2` of a grid-derived sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layout {
    layers: usize,
    n1: usize,
    n2: usize,
}

impl Layout {
    fn layer_size(&self) -> usize {
        self.n1 * self.n2
    }

    fn split(&self, i: usize) -> (usize, usize, usize) {
        let m = self.layer_size();
        (i / m, (i % m) / self.n2, i % self.n2)
    }

    fn join(&self, l: usize, i1: usize, i2: usize) -> usize {
        l * self.layer_size() + i1 * self.n2 + i2
    }

    fn rotate(&self, i: usize, k: isize) -> usize {
        let (l, i1, i2) = self.split(i);
        let j1 = (i1 as isize + k).rem_euclid(self.n1 as isize) as usize;
        self.join(l, j1, i2)
    }
}

/// Points at which the distance triples are observed.
#[derive(Clone, Debug)]
pub struct SampleSet<T> {
    pub points: Vec<Point<T>>,
    pub kinds: Vec<SampleKind>,
    layout: Option<Layout>,
}

impl<T: Real> SampleSet<T> {
    /// Interior nodes of `coarse` plus both boundary rings, ordered by layer:
    /// past ring, the `nt` interior layers, future ring.
    pub fn from_grid(coarse: &Grid<T>) -> Self {
        let m = coarse.layer_size();
        let past = coarse.ring(crate::spacetime::BoundarySide::Past);
        let future = coarse.ring(crate::spacetime::BoundarySide::Future);
        let b = coarse.boundary_nodes();
        let mut points = Vec::with_capacity(coarse.len() + 2 * m);
        let mut kinds = Vec::with_capacity(points.capacity());
        points.extend_from_slice(&b[past]);
        kinds.extend(std::iter::repeat(SampleKind::PastBoundary).take(m));
        points.extend_from_slice(coarse.nodes());
        kinds.extend(std::iter::repeat(SampleKind::Interior).take(coarse.len()));
        points.extend_from_slice(&b[future]);
        kinds.extend(std::iter::repeat(SampleKind::FutureBoundary).take(m));
        let layout = Layout { layers: coarse.nt + 2, n1: coarse.ns[0], n2: coarse.ns[1] };
        Self { points, kinds, layout: Some(layout) }
    }

    /// An unstructured sample (no symmetry available).
    pub fn from_points(points: Vec<Point<T>>, kinds: Vec<SampleKind>) -> Result<Self> {
        if points.len() != kinds.len() {
            return Err(Error::GridMismatch { left: points.len(), right: kinds.len() });
        }
        Ok(Self { points, kinds, layout: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the sample translated by `k` steps along the circle, when
    /// the sample came from a grid.
    pub fn rotate(&self, i: usize, k: isize) -> Option<usize> {
        self.layout.map(|l| l.rotate(i, k))
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds.iter().enumerate().filter(|(_, k)| **k == SampleKind::Interior).map(|(i, _)| i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Every pair computed.
    None,
    /// Rows computed for one sample column only; others follow by rotating
    /// the circle factor.
    Rotation,
}

/// A dense `n × n` table of pair data, possibly stored modulo rotations.
#[derive(Clone, Debug)]
pub struct PairTable<V> {
    n: usize,
    rows: Vec<Vec<V>>,
    /// Per sample: (stored row, rotation steps from that row's sample).
    orbit: Vec<(usize, usize)>,
    layout: Option<Layout>,
}

impl<V: Copy> PairTable<V> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> V {
        let (row, k) = self.orbit[i];
        let j = match self.layout {
            Some(l) if k != 0 => l.rotate(j, -(k as isize)),
            _ => j,
        };
        self.rows[row][j]
    }

    pub fn stored_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn map<U>(&self, f: impl Fn(&V) -> U + Sync) -> PairTable<U>
    where
        V: Sync,
        U: Send,
    {
        PairTable {
            n: self.n,
            rows: self.rows.par_iter().map(|r| r.iter().map(&f).collect()).collect(),
            orbit: self.orbit.clone(),
            layout: self.layout,
        }
    }

    pub fn try_map<U, E>(&self, f: impl Fn(&V) -> std::result::Result<U, E> + Sync) -> std::result::Result<PairTable<U>, E>
    where
        V: Sync,
        U: Send,
        E: Send,
    {
        let rows = self.rows.par_iter().map(|r| r.iter().map(&f).collect()).collect::<std::result::Result<_, E>>()?;
        Ok(PairTable { n: self.n, rows, orbit: self.orbit.clone(), layout: self.layout })
    }

    /// Dense table from a closure (all `n²` entries evaluated).
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> V + Sync) -> Self
    where
        V: Send,
    {
        let rows = (0..n).into_par_iter().map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
        Self { n, rows, orbit: (0..n).map(|i| (i, 0)).collect(), layout: None }
    }
}

/// `λ⁺ = (σ⁺)⁴` and `λ⁻ = (σ⁻)⁴` on the quadrature grid, with the layer
/// ranges where each can be non-zero.
#[derive(Clone, Debug)]
pub struct LambdaFields<T> {
    pub plus: Vec<T>,
    pub minus: Vec<T>,
    /// First quadrature layer with `λ⁺ ≠ 0` (`nt` if none).
    plus_from: usize,
    /// One past the last layer with `λ⁻ ≠ 0` (0 if none).
    minus_to: usize,
}

pub fn lambda_fields<T: Real>(solver: &SigmaSolver<'_, T>, x: &Point<T>) -> Result<LambdaFields<T>> {
    let g = solver.grid();
    let sigma = solver.field(x)?.values.values;
    let q4 = |s: T| {
        let s2 = s * s;
        s2 * s2
    };
    let plus: Vec<T> = sigma.iter().map(|&s| if s > T::zero() { q4(s) } else { T::zero() }).collect();
    let minus: Vec<T> = sigma.iter().map(|&s| if s < T::zero() { q4(s) } else { T::zero() }).collect();
    let m = g.layer_size();
    let plus_from = plus.iter().position(|v| *v != T::zero()).map_or(g.nt, |i| i / m);
    let minus_to = minus.iter().rposition(|v| *v != T::zero()).map_or(0, |i| i / m + 1);
    Ok(LambdaFields { plus, minus, plus_from, minus_to })
}

/// `(S⁺⁺, S⁻⁻, S⁺⁻)`: weighted sums of `u⁺u⁺`, `u⁻u⁻` and `u⁺u⁻` with
/// `u± = λ_p± − λ_q±`, each restricted to the layers where it can be
/// non-zero.
pub(crate) fn quadratic_sums<T: Real>(grid: &Grid<T>, p: &LambdaFields<T>, q: &LambdaFields<T>) -> [T; 3] {
    let w = grid.weights();
    let m = grid.layer_size();
    let lo_p = p.plus_from.min(q.plus_from) * m;
    let hi_m = p.minus_to.max(q.minus_to) * m;
    let n = w.len();
    let spp = pairwise_sum(n - lo_p, |k| {
        let i = lo_p + k;
        let d = p.plus[i] - q.plus[i];
        w[i] * d * d
    });
    let smm = pairwise_sum(hi_m, |i| {
        let d = p.minus[i] - q.minus[i];
        w[i] * d * d
    });
    let spm = if hi_m > lo_p {
        pairwise_sum(hi_m - lo_p, |k| {
            let i = lo_p + k;
            w[i] * (p.plus[i] - q.plus[i]) * (p.minus[i] - q.minus[i])
        })
    } else {
        T::zero()
    };
    [spp, smm, spm]
}

/// All-pairs distance triples of the `f_r`-embeddings, `r ∈ {−½, 0, ½}`,
/// integrated on `quad`.
///
/// With [`Symmetry::Rotation`] the quadrature grid must subdivide the
/// sample's circle spacing, so that rotating the sample by one step is a
/// grid symmetry.
pub fn triple_table<T: Real>(
    quad: &Grid<T>,
    samples: &SampleSet<T>,
    symmetry: Symmetry,
) -> Result<PairTable<DistanceTriple<T>>> {
    let solver = SigmaSolver::new(quad, DEFAULT_RADIUS)?;
    let n = samples.len();
    let triple = |a: &LambdaFields<T>, b: &LambdaFields<T>| {
        let [spp, smm, spm] = quadratic_sums(quad, a, b);
        DistanceTriple::from_quadratic_sums(spp, smm, spm)
    };
    match (symmetry, samples.layout) {
        (Symmetry::Rotation, Some(layout)) => {
            if quad.ns[0] % layout.n1 != 0 || quad.ns[1] != layout.n2 {
                return Err(Error::Precondition(format!(
                    "quadrature resolution {:?} is not a refinement of the sample's circle spacing {}",
                    quad.ns, layout.n1
                )));
            }
            let reps: Vec<usize> =
                (0..layout.layers).flat_map(|l| (0..layout.n2).map(move |i2| layout.join(l, 0, i2))).collect();
            let rep_fields: Vec<LambdaFields<T>> =
                reps.par_iter().map(|&i| lambda_fields(&solver, &samples.points[i])).collect::<Result<_>>()?;
            let columns: Vec<Vec<DistanceTriple<T>>> = samples
                .points
                .par_iter()
                .map(|q| {
                    let lq = lambda_fields(&solver, q)?;
                    Ok(rep_fields.iter().map(|lp| triple(lp, &lq)).collect())
                })
                .collect::<Result<_>>()?;
            let rows = (0..reps.len()).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
            let orbit = (0..n)
                .map(|i| {
                    let (l, i1, i2) = layout.split(i);
                    (l * layout.n2 + i2, i1)
                })
                .collect();
            Ok(PairTable { n, rows, orbit, layout: Some(layout) })
        }
        (Symmetry::Rotation, None) => Err(Error::Precondition("rotation symmetry needs a grid-derived sample".into())),
        (Symmetry::None, _) => {
            let fields: Vec<LambdaFields<T>> =
                samples.points.par_iter().map(|x| lambda_fields(&solver, x)).collect::<Result<_>>()?;
            Ok(PairTable::from_fn(n, |i, j| {
                if i == j {
                    DistanceTriple::default()
                } else if i < j {
                    triple(&fields[i], &fields[j])
                } else {
                    triple(&fields[j], &fields[i])
                }
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{dist_p, phi, FSpec, Norm};
    use crate::reconstruction::TRIPLE_R;
    use crate::spacetime::{grid_build, SpacetimeSpec};

    fn setup() -> (Grid<f64>, Grid<f64>) {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        (grid_build(&spec, 6, 6).unwrap(), grid_build(&spec, 18, 18).unwrap())
    }

    #[test]
    fn sample_layout() {
        let (coarse, _) = setup();
        let s = SampleSet::from_grid(&coarse);
        assert_eq!(s.len(), 6 * 6 + 12);
        assert_eq!(s.kinds[0], SampleKind::PastBoundary);
        assert_eq!(s.kinds[47], SampleKind::FutureBoundary);
        assert_eq!(s.points[0].t, -1.0);
        assert_eq!(s.points[6], coarse.node(0));
        let r = s.rotate(7, 2).unwrap();
        assert!((s.points[r].s[0] - s.points[7].s[0] - 2.0 * coarse.ds[0]).abs() < 1e-12);
        assert_eq!(s.interior().count(), 36);
    }

    #[test]
    fn triples_match_direct_distances() {
        let (coarse, quad) = setup();
        let samples = SampleSet::from_grid(&coarse);
        let table = triple_table(&quad, &samples, Symmetry::Rotation).unwrap();
        assert_eq!(table.stored_rows(), 8);
        let solver = SigmaSolver::new(&quad, DEFAULT_RADIUS).unwrap();
        for &(i, j) in &[(3usize, 40usize), (10, 25), (0, 47), (20, 21), (44, 9)] {
            let d = table.get(i, j).distances();
            for (k, r) in TRIPLE_R.iter().enumerate() {
                let f = FSpec::fr(*r).unwrap();
                let a = phi(&solver, &samples.points[i], f).unwrap();
                let b = phi(&solver, &samples.points[j], f).unwrap();
                let direct = dist_p(&a, &b, &quad, Norm::L2).unwrap();
                assert!((d[k] - direct).abs() <= 1e-12 * (1.0 + direct), "{i} {j} r={r}: {} vs {direct}", d[k]);
            }
        }
    }

    #[test]
    fn rotation_table_matches_full_table() {
        let (coarse, quad) = setup();
        let samples = SampleSet::from_grid(&coarse);
        let rot = triple_table(&quad, &samples, Symmetry::Rotation).unwrap();
        let full = triple_table(&quad, &samples, Symmetry::None).unwrap();
        for i in 0..samples.len() {
            for j in 0..samples.len() {
                let (a, b) = (rot.get(i, j).distances(), full.get(i, j).distances());
                for k in 0..3 {
                    assert!((a[k] - b[k]).abs() <= 1e-12 * (1.0 + b[k]));
                }
            }
        }
    }

    #[test]
    fn misaligned_quadrature_rejected() {
        let (coarse, _) = setup();
        let quad = grid_build(coarse.spec(), 18, 16).unwrap();
        let samples = SampleSet::from_grid(&coarse);
        assert!(matches!(triple_table(&quad, &samples, Symmetry::Rotation), Err(Error::Precondition(_))));
    }
}
