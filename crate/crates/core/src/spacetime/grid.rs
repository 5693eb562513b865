use super::{Point, SpacetimeSpec};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    Past,
    Future,
}

/// Cell-centered quadrature grid over a slab, plus boundary node rings at
/// `t_min` and `t_max` carrying the induced hypersurface measure.
///
/// Interior nodes are stored time-major: index `it * layer_size + is`, where
/// for tori `is = i1 * ns[1] + i2`.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    spec: SpacetimeSpec<T>,
    pub nt: usize,
    pub ns: [usize; 2],
    pub dt: T,
    pub ds: [T; 2],
    nodes: Vec<Point<T>>,
    weights: Vec<T>,
    boundary: Vec<Point<T>>,
    boundary_weights: Vec<T>,
    boundary_sides: Vec<BoundarySide>,
}

/// Builds a 2D grid with `nt × ns` cells.
pub fn grid_build<T: Real>(spec: &SpacetimeSpec<T>, nt: usize, ns: usize) -> Result<Grid<T>> {
    Grid::build(spec, nt, &[ns])
}

impl<T: Real> Grid<T> {
    pub const MIN_RESOLUTION: usize = 4;

    pub fn build(spec: &SpacetimeSpec<T>, nt: usize, ns: &[usize]) -> Result<Self> {
        let dims = spec.spatial_dims();
        if ns.len() != dims {
            return Err(Error::InvalidSpacetime(format!("expected {dims} spatial resolutions, got {}", ns.len())));
        }
        let min = Self::MIN_RESOLUTION;
        for &n in std::iter::once(&nt).chain(ns) {
            if n < min {
                return Err(Error::ResolutionTooSmall { min, got: n });
            }
        }
        let mut counts = [1usize; 2];
        counts[..dims].copy_from_slice(ns);
        let lengths = spec.spatial.lengths();
        let dt = spec.height() / T::of_usize(nt);
        let mut ds = [T::one(); 2];
        for k in 0..dims {
            ds[k] = lengths[k] / T::of_usize(counts[k]);
        }
        let cell_s = ds[0] * if dims == 2 { ds[1] } else { T::one() };
        let layer = counts[0] * counts[1];

        let centre = |i: usize, h: T| (T::of_usize(i) + T::half()) * h;
        let spatial: Vec<[T; 2]> = (0..layer)
            .map(|is| {
                let (i1, i2) = (is / counts[1], is % counts[1]);
                let mut s = [centre(i1, ds[0]), T::zero()];
                if dims == 2 {
                    s[1] = centre(i2, ds[1]);
                }
                s
            })
            .collect();

        let mut nodes = Vec::with_capacity(nt * layer);
        let mut weights = Vec::with_capacity(nt * layer);
        for it in 0..nt {
            let t = spec.t_min + centre(it, dt);
            let w = dt * cell_s * spec.warp.eval(t).powi(dims as i32);
            for s in &spatial {
                nodes.push(Point { t, s: *s });
                weights.push(w);
            }
        }

        let mut boundary = Vec::with_capacity(2 * layer);
        let mut boundary_weights = Vec::with_capacity(2 * layer);
        let mut boundary_sides = Vec::with_capacity(2 * layer);
        for (side, t) in [(BoundarySide::Past, spec.t_min), (BoundarySide::Future, spec.t_max)] {
            let w = cell_s * spec.warp.eval(t).powi(dims as i32);
            for s in &spatial {
                boundary.push(Point { t, s: *s });
                boundary_weights.push(w);
                boundary_sides.push(side);
            }
        }

        Ok(Self {
            spec: spec.clone(),
            nt,
            ns: counts,
            dt,
            ds,
            nodes,
            weights,
            boundary,
            boundary_weights,
            boundary_sides,
        })
    }

    pub fn spec(&self) -> &SpacetimeSpec<T> {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point<T>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point<T> {
        self.nodes[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    /// Number of nodes in one time layer.
    pub fn layer_size(&self) -> usize {
        self.ns[0] * self.ns[1]
    }

    pub fn layer(&self, it: usize) -> Range<usize> {
        let m = self.layer_size();
        it * m..(it + 1) * m
    }

    pub fn time_index(&self, i: usize) -> usize {
        i / self.layer_size()
    }

    /// Spatial multi-index `(i1, i2)` of a node.
    pub fn spatial_index(&self, i: usize) -> (usize, usize) {
        let is = i % self.layer_size();
        (is / self.ns[1], is % self.ns[1])
    }

    pub fn index(&self, it: usize, i1: usize, i2: usize) -> usize {
        it * self.layer_size() + i1 * self.ns[1] + i2
    }

    /// Index of the node obtained by translating `i` by `k` cells along the
    /// first spatial axis (a rotation of the circle factor).
    pub fn rotate_index(&self, i: usize, k: isize) -> usize {
        let it = self.time_index(i);
        let (i1, i2) = self.spatial_index(i);
        let n1 = self.ns[0] as isize;
        let j1 = (i1 as isize + k).rem_euclid(n1) as usize;
        self.index(it, j1, i2)
    }

    /// Nearest interior node to `p` (ties towards lower index).
    pub fn nearest_node(&self, p: &Point<T>) -> usize {
        let rel = (p.t - self.spec.t_min) / self.dt - T::half();
        let it = rel.round().max(T::zero()).min(T::of_usize(self.nt - 1));
        let it = it.to_usize().unwrap_or(0);
        let mut idx = [0usize; 2];
        for k in 0..self.spec.spatial_dims() {
            let r = (p.s[k] / self.ds[k] - T::half()).round();
            let n = self.ns[k] as i64;
            idx[k] = (r.to_i64().unwrap_or(0)).rem_euclid(n) as usize;
        }
        self.index(it, idx[0], idx[1])
    }

    /// Deterministic sum of all interior weights.
    pub fn total_weight(&self) -> T {
        pairwise_sum(self.weights.len(), |i| self.weights[i])
    }

    pub fn boundary_nodes(&self) -> &[Point<T>] {
        &self.boundary
    }

    pub fn boundary_weights(&self) -> &[T] {
        &self.boundary_weights
    }

    pub fn boundary_sides(&self) -> &[BoundarySide] {
        &self.boundary_sides
    }

    /// Indices into the boundary arrays of one side's ring.
    pub fn ring(&self, side: BoundarySide) -> Range<usize> {
        let m = self.layer_size();
        match side {
            BoundarySide::Past => 0..m,
            BoundarySide::Future => m..2 * m,
        }
    }

    /// Whether two grids share node layout (same spec and resolution).
    pub fn same_layout(&self, other: &Grid<T>) -> bool {
        self.nt == other.nt && self.ns == other.ns && self.spec == other.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{SpatialFactor, Warp};
    use proptest::prelude::*;

    #[test]
    fn flat_total_weight() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 16, 32).unwrap();
        assert!((g.total_weight() - 8.0).abs() < 1e-6);
        assert_eq!(g.len(), 512);
        // cell centered: no node on the boundary
        assert!(g.nodes().iter().all(|p| p.t > -1.0 && p.t < 1.0));
        assert_eq!(g.boundary_nodes().len(), 64);
    }

    #[test]
    fn constant_warp_two() {
        let spec = SpacetimeSpec::<f64>::new(0.0, 1.0, SpatialFactor::Circle { circumference: 1.0 }, Warp::constant(2.0)).unwrap();
        for n in [4, 7, 33] {
            let g = grid_build(&spec, n, n + 1).unwrap();
            assert!((g.total_weight() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_small_resolution() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        assert!(matches!(grid_build(&spec, 3, 16), Err(Error::ResolutionTooSmall { min: 4, got: 3 })));
    }

    #[test]
    fn torus_grid_volume() {
        let spec = SpacetimeSpec::<f64>::new(
            0.0,
            1.0,
            SpatialFactor::Torus { l1: 2.0, l2: 3.0 },
            Warp::polynomial(vec![1.0, 0.0, 1.0]),
        )
        .unwrap();
        let g = Grid::build(&spec, 64, &[8, 8]).unwrap();
        let exact = spec.analytic_volume();
        assert!((g.total_weight() - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn indexing_round_trip() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 8, 16).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.nearest_node(&g.node(i)), i);
            assert_eq!(g.rotate_index(g.rotate_index(i, 3), -3), i);
        }
    }

    proptest! {
        #[test]
        fn weight_sum_matches_volume(
            nt in 4usize..40, ns in 4usize..40,
            c1 in 0.5f64..2.0, c2 in -0.3f64..0.3, c3 in 0.0f64..0.5,
            len in 0.5f64..6.0,
        ) {
            let spec = SpacetimeSpec::<f64>::new(
                -1.0, 1.0,
                SpatialFactor::Circle { circumference: len },
                Warp::polynomial(vec![c1, c2, c3]),
            ).unwrap();
            let g = grid_build(&spec, nt.max(32), ns).unwrap();
            let exact = spec.analytic_volume();
            prop_assert!((g.total_weight() - exact).abs() / exact < 1e-3);
        }
    }
}
