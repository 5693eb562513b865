//! Partition lengths, the induced length metric on finite samples, and the
//! Noldus and Beem experiments.

use crate::embedding::{beem_distance, dist_p, phi_many, pullback_metric, FSpec, MetricAtPoint, Norm};
use crate::error::{Error, Result};
use crate::lorentz::{relation, SigmaSolver, DEFAULT_RADIUS};
use crate::scalar::Real;
use crate::spacetime::{Grid, Point, SpacetimeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A curve sampled at strictly increasing parameters.
#[derive(Clone, Debug)]
pub struct SampledCurve<T, P> {
    params: Vec<T>,
    points: Vec<P>,
}

impl<T: Real, P> SampledCurve<T, P> {
    pub fn new(params: Vec<T>, points: Vec<P>) -> Result<Self> {
        if params.len() != points.len() {
            return Err(Error::GridMismatch { left: params.len(), right: points.len() });
        }
        if params.len() < 2 {
            return Err(Error::MalformedPartition("a curve needs at least two samples".into()));
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::MalformedPartition("curve parameters must increase strictly".into()));
        }
        Ok(Self { params, points })
    }

    /// Samples `c` at `n + 1` equally spaced parameters of `[a, b]`.
    pub fn uniform(a: T, b: T, n: usize, c: impl Fn(T) -> P) -> Result<Self> {
        let params: Vec<T> = (0..=n).map(|i| a + (b - a) * T::of_usize(i) / T::of_usize(n.max(1))).collect();
        let points = params.iter().map(|&t| c(t)).collect();
        Self::new(params, points)
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.params.len() - 1
    }
}

/// `l_Z(c) = Σ d(c(z_{i−1}), c(z_i))`; `z` indexes the curve samples.
pub fn partition_length<T: Real, P>(
    curve: &SampledCurve<T, P>,
    d: impl Fn(&P, &P) -> T,
    z: &[usize],
) -> Result<T> {
    let last = curve.segments();
    if z.first() != Some(&0) || z.last() != Some(&last) {
        return Err(Error::MalformedPartition("partition must contain both endpoints".into()));
    }
    if z.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MalformedPartition("partition indices must increase strictly".into()));
    }
    let pts = curve.points();
    Ok(z.windows(2).fold(T::zero(), |acc, w| acc + d(&pts[w[0]], &pts[w[1]])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionLengthRecord<T> {
    pub depth: usize,
    pub partition: Vec<usize>,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupLength<T> {
    pub records: Vec<PartitionLengthRecord<T>>,
    /// Last two values within relative `10⁻³`.
    pub converged: bool,
    /// First depth from which every later value stays within relative
    /// `10⁻³` of the final one.
    pub converged_at: Option<usize>,
}

const SUP_REL_TOL: f64 = 1e-3;

/// Dyadic partition of depth `k` over `n` segments (indices rounded, so
/// depth is capped where partitions stop growing).
fn dyadic(n: usize, k: usize) -> Vec<usize> {
    let parts = 1usize << k;
    let mut z: Vec<usize> = (0..=parts).map(|i| (i * n + parts / 2) / parts).collect();
    z.dedup();
    z
}

/// Lengths `l_{Z_k}` along dyadic refinements `Z_0 ⊂ Z_1 ⊂ …`.
pub fn sup_length<T: Real, P>(curve: &SampledCurve<T, P>, d: impl Fn(&P, &P) -> T, max_depth: usize) -> SupLength<T> {
    let n = curve.segments();
    let mut records = Vec::new();
    for k in 0..=max_depth {
        if k > 0 && (1usize << (k - 1)) >= n {
            break;
        }
        let z = dyadic(n, k);
        let value = partition_length(curve, &d, &z).expect("dyadic partitions are well formed");
        records.push(PartitionLengthRecord { depth: k, partition: z, value });
    }
    let close = |a: T, b: T| (a - b).abs() <= T::of(SUP_REL_TOL) * a.abs().max(b.abs());
    let last = records.last().map(|r| r.value).unwrap_or_else(T::zero);
    let converged = records.len() < 2 || close(records[records.len() - 2].value, last);
    let converged_at = records.iter().position(|r| close(r.value, last)).filter(|_| converged);
    SupLength { records, converged, converged_at }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapItem<T>(T, usize);

impl<T: PartialOrd> Eq for HeapItem<T> {}

impl<T: PartialOrd> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<T: PartialOrd> Ord for HeapItem<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on distance, ties by index
        o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| o.1.cmp(&self.1))
    }
}

/// Single-source shortest paths (Dijkstra) on a weighted adjacency list.
pub fn shortest_paths<T: Real>(adj: &[Vec<(usize, T)>], source: usize) -> Vec<T> {
    let mut dist = vec![T::infinity(); adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = T::zero();
    heap.push(HeapItem(T::zero(), source));
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// Induced length distances from `sources` over a neighbour graph.
pub fn graph_length_metric<T: Real>(adj: &[Vec<(usize, T)>], sources: &[usize]) -> Result<Vec<Vec<T>>> {
    let rows: Vec<Vec<T>> = sources.par_iter().map(|&s| shortest_paths(adj, s)).collect();
    if rows.iter().any(|r| r.iter().any(|x| x.is_infinite())) {
        return Err(Error::Disconnected("neighbour graph is disconnected".into()));
    }
    Ok(rows)
}

/// Largest nearest-neighbour gap of a distance matrix.
pub fn max_nearest_gap<T: Real>(d: &[Vec<T>]) -> T {
    let n = d.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).fold(T::infinity(), |m, j| m.min(d[i][j])))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Discrete `λ(d)`: shortest paths in the ε-neighbourhood graph with
/// `d`-weighted edges. `eps` defaults to three nearest-neighbour gaps.
pub fn length_metric<T: Real>(d: &[Vec<T>], eps: Option<T>) -> Result<Vec<Vec<T>>> {
    let n = d.len();
    if d.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition("distance matrix must be square".into()));
    }
    if n == 1 {
        return Ok(vec![vec![T::zero()]]);
    }
    let gap = max_nearest_gap(d);
    let eps = eps.unwrap_or(T::of(3.0) * gap);
    if eps < gap {
        return Err(Error::Disconnected(format!(
            "ε = {} is below the largest nearest-neighbour gap {}",
            eps.as_f64(),
            gap.as_f64()
        )));
    }
    let adj: Vec<Vec<(usize, T)>> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && d[i][j] <= eps).map(|j| (j, d[i][j])).collect()).collect();
    let sources: Vec<usize> = (0..n).collect();
    let mut m = graph_length_metric(&adj, &sources)?;
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let v = m[i][j].min(m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// `√t · √(2an − t)`, i.e. `n·D(t/n)` for the sup-distance of σ-fields of
/// two points at distance `a` below the future boundary.
pub fn noldus_closed_form<T: Real>(a: T, t: T, n: usize) -> Result<T> {
    if !(a > T::zero() && t > T::zero() && t < T::two() * a) || n == 0 {
        return Err(Error::OutOfRange(format!("need 0 < t < 2a and n ≥ 1 (a = {}, t = {}, n = {n})", a.as_f64(), t.as_f64())));
    }
    Ok(t.sqrt() * (T::two() * a * T::of_usize(n) - t).sqrt())
}

/// `sup_z ||σ_x(z)| − |σ_y(z)||` over interior nodes and both boundary rings.
pub fn noldus_distance<T: Real>(solver: &SigmaSolver<'_, T>, x: &Point<T>, y: &Point<T>) -> Result<T> {
    let fx = solver.field(x)?.values.values;
    let fy = solver.field(y)?.values.values;
    let inner = fx.iter().zip(&fy).fold(T::zero(), |m, (a, b)| m.max((a.abs() - b.abs()).abs()));
    let ring = solver
        .grid()
        .boundary_nodes()
        .iter()
        .fold(T::zero(), |m, z| m.max((solver.sigma(x, z).abs() - solver.sigma(y, z).abs()).abs()));
    Ok(inner.max(ring))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoldusRow<T> {
    pub n: usize,
    pub closed_form: T,
    /// `n · D_grid(t/n)`, when a grid was supplied.
    pub grid: Option<T>,
}

/// `S(n) = n·D(t/n)` for each `n`, in closed form and (optionally) from grid
/// sup-distances between `(t_max − a, s₀)` and `(t_max − a, s₀ + t/n)`, with
/// `s₀` on a node column so that the null cone of the first point meets the
/// future ring at a node.
pub fn noldus_divergence<T: Real>(grid: Option<&Grid<T>>, a: T, t: T, n_list: &[usize]) -> Result<Vec<NoldusRow<T>>> {
    let solver = grid.map(|g| SigmaSolver::new(g, DEFAULT_RADIUS)).transpose()?;
    n_list
        .iter()
        .map(|&n| {
            let closed_form = noldus_closed_form(a, t, n)?;
            let grid = match &solver {
                Some(s) => {
                    let spec = s.grid().spec();
                    let s0 = s.grid().node(0).s[0];
                    let x = spec.point(spec.t_max - a, &[s0])?;
                    let y = spec.point(spec.t_max - a, &[s0 + t / T::of_usize(n)])?;
                    Some(T::of_usize(n) * noldus_distance(s, &x, &y)?)
                }
                None => None,
            };
            Ok(NoldusRow { n, closed_form, grid })
        })
        .collect()
}

/// `|d_B(p, r) − d_B(p, q) − d_B(q, r)|` for a causal chain `p ≤ q ≤ r`.
pub fn beem_geodesic_check<T: Real>(grid: &Grid<T>, p: &Point<T>, q: &Point<T>, r: &Point<T>) -> Result<T> {
    let spec = grid.spec();
    if !relation(spec, p, q).causal_future() || !relation(spec, q, r).causal_future() {
        return Err(Error::Precondition("points do not form a causal chain p ≤ q ≤ r".into()));
    }
    let pr = beem_distance(grid, p, r);
    Ok((pr - beem_distance(grid, p, q) - beem_distance(grid, q, r)).abs())
}

/// Seeded random causal chains `p ≤ q ≤ r` inside the slab, kept a margin
/// `margin` away from both boundaries.
pub fn random_causal_chains<T: Real>(spec: &SpacetimeSpec<T>, count: usize, seed: u64, margin: T) -> Vec<[Point<T>; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths = spec.spatial.lengths();
    let (lo, hi) = (spec.t_min + margin, spec.t_max - margin);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let draw_s = |rng: &mut ChaCha8Rng| {
            let mut s = [T::zero(); 2];
            for k in 0..spec.spatial_dims() {
                s[k] = T::of(rng.gen::<f64>()) * lengths[k];
            }
            s
        };
        let mut t = [0, 1, 2].map(|_| lo + (hi - lo) * T::of(rng.gen::<f64>()));
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s0 = draw_s(&mut rng);
        let p = Point { t: t[0], s: s0 };
        // step inside the cone: spatial offset a random fraction of the
        // conformal time gap
        let step = |from: &Point<T>, t1: T, rng: &mut ChaCha8Rng| {
            let eta = spec.warp.conformal_time(from.t, t1);
            let frac = T::of(rng.gen::<f64>());
            let ang = T::of(rng.gen::<f64>() * std::f64::consts::TAU);
            let mut s = from.s;
            if spec.spatial_dims() == 1 {
                let sign = if ang < T::PI() { T::one() } else { -T::one() };
                s[0] = s[0] + sign * frac * eta;
            } else {
                s[0] = s[0] + frac * eta * ang.cos();
                s[1] = s[1] + frac * eta * ang.sin();
            }
            spec.canonical(t1, s)
        };
        let q = step(&p, t[1], &mut rng);
        let r = step(&q, t[2], &mut rng);
        if relation(spec, &p, &q).causal_future() && relation(spec, &q, &r).causal_future() && t[0] < t[2] {
            out.push([p, q, r]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthComparison {
    pub points: usize,
    pub edges: usize,
    pub eps: f64,
    pub sources: Vec<usize>,
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
}

/// Compares two discretizations of the same length space on the nodes of
/// `grid`: shortest paths with `dist_2(Φ(x), Φ(y))` edge weights against
/// shortest paths with Riemannian edge lengths from the pullback metric.
/// Edges join nodes within `stencil` index steps whose `dist_2` is below
/// three nearest-neighbour gaps.
pub fn pullback_length_comparison<T: Real>(
    grid: &Grid<T>,
    fspec: FSpec,
    stencil: usize,
    sources: &[usize],
) -> Result<LengthComparison> {
    if grid.spec().spatial_dims() != 1 {
        return Err(Error::Precondition("length comparison is implemented for 2D slabs".into()));
    }
    let spec = grid.spec();
    let solver = SigmaSolver::new(grid, DEFAULT_RADIUS)?;
    let nodes = grid.nodes();
    let n = nodes.len();
    let emb = phi_many(&solver, nodes, fspec)?;
    let metrics: Vec<MetricAtPoint<T>> =
        nodes.par_iter().map(|x| pullback_metric(grid, x, fspec)).collect::<Result<_>>()?;
    let k = stencil as isize;
    let candidates = |i: usize| -> Vec<usize> {
        let it = grid.time_index(i) as isize;
        let (i1, _) = grid.spatial_index(i);
        let mut out = Vec::new();
        for dt in -k..=k {
            let jt = it + dt;
            if jt < 0 || jt >= grid.nt as isize {
                continue;
            }
            for ds in -k..=k {
                if dt == 0 && ds == 0 {
                    continue;
                }
                let j1 = (i1 as isize + ds).rem_euclid(grid.ns[0] as isize) as usize;
                out.push(grid.index(jt as usize, j1, 0));
            }
        }
        out
    };
    let chords: Vec<Vec<(usize, T)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            candidates(i)
                .into_iter()
                .map(|j| Ok((j, dist_p(&emb[i], &emb[j], grid, Norm::L2)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let gap = chords.iter().map(|r| r.iter().fold(T::infinity(), |m, e| m.min(e.1))).fold(T::zero(), |a, b| a.max(b));
    let eps = T::of(3.0) * gap;
    let riem_len = |i: usize, j: usize| {
        let d = spec.min_displacement(&nodes[i], &nodes[j]);
        let v = [nodes[j].t - nodes[i].t, d[0], T::zero()];
        let q = |m: &MetricAtPoint<T>| {
            let mut s = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    s = s + m.component(a, b) * v[a] * v[b];
                }
            }
            s.max(T::zero()).sqrt()
        };
        (q(&metrics[i]) + q(&metrics[j])) * T::half()
    };
    let mut lam_adj = vec![Vec::new(); n];
    let mut riem_adj = vec![Vec::new(); n];
    let mut edges = 0;
    for (i, row) in chords.iter().enumerate() {
        for &(j, w) in row {
            if w <= eps {
                lam_adj[i].push((j, w));
                riem_adj[i].push((j, riem_len(i, j)));
                edges += 1;
            }
        }
    }
    let lam = graph_length_metric(&lam_adj, sources)?;
    let riem = graph_length_metric(&riem_adj, sources)?;
    let mut max_rel = 0.0f64;
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for (a, b) in lam.iter().zip(&riem) {
        for (x, y) in a.iter().zip(b) {
            if *y > T::zero() {
                let rel = ((*x - *y) / *y).abs().as_f64();
                max_rel = max_rel.max(rel);
                sum += rel;
                count += 1;
            }
        }
    }
    Ok(LengthComparison {
        points: n,
        edges,
        eps: eps.as_f64(),
        sources: sources.to_vec(),
        max_rel_dev: max_rel,
        mean_rel_dev: sum / count.max(1) as f64,
    })
}
