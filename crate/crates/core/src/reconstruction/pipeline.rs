use super::relation::{
    boundary_detect, causal_closure, chron_reconstruct, consistency_check, gram_table, overlap_constant,
    overlap_integral, ConsistencyReport,
};
use super::sample::{lambda_fields, triple_table, PairTable, SampleKind, SampleSet, Symmetry};
use super::{DistanceTriple, Gram};
use crate::error::{Error, Result};
use crate::lorentz::{relation, SigmaSolver, DEFAULT_RADIUS};
use crate::scalar::Real;
use crate::spacetime::{Grid, SpacetimeSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    /// Quadrature grid refinement relative to the sample grid.
    pub quad_factor: usize,
    pub symmetry: Symmetry,
    pub boundary_tol: Option<f64>,
    pub relation_tol: Option<f64>,
    /// Number of chronological pairs used for the overlap check.
    pub overlap_pairs: usize,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self { quad_factor: 3, symmetry: Symmetry::Rotation, boundary_tol: None, relation_tol: None, overlap_pairs: 8 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    fn add(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.true_positive += 1,
            (false, true) => self.false_positive += 1,
            (false, false) => self.true_negative += 1,
            (true, false) => self.false_negative += 1,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.true_positive += o.true_positive;
        self.false_positive += o.false_positive;
        self.true_negative += o.true_negative;
        self.false_negative += o.false_negative;
        self
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn accuracy(&self) -> f64 {
        (self.true_positive + self.true_negative) as f64 / self.total().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub p: usize,
    pub q: usize,
    pub direct: f64,
    pub reconstructed: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub samples: usize,
    pub interior_samples: usize,
    pub quadrature: [usize; 2],
    pub boundary_tol: f64,
    pub relation_tol: f64,
    pub future_boundary_detected: usize,
    pub past_boundary_detected: usize,
    /// Samples whose detected boundary membership differs from the sample
    /// kind.
    pub boundary_mismatches: usize,
    pub boundary_exact: bool,
    /// Unordered interior pairs: chronologically related or not.
    pub chronological: Confusion,
    pub accuracy: f64,
    pub orientation_correct: usize,
    pub orientation_checked: usize,
    /// Interior ordered pairs `p ≠ q`: `p ≤ q` from the closure vs truth.
    pub causal: Confusion,
    pub consistency: ConsistencyReport,
    pub calibrated_overlap_constant: Option<f64>,
    pub overlap: Vec<OverlapRow>,
    /// `(max − min) / mean` of the overlap ratios.
    pub overlap_ratio_spread: f64,
    #[serde(skip)]
    pub seconds: f64,
}

/// Recovered boundary and relation plus their comparison with the exact
/// causal structure of `spec`.
pub fn analyze<T: Real>(
    spec: &SpacetimeSpec<T>,
    samples: &SampleSet<T>,
    triples: &PairTable<DistanceTriple<T>>,
    opts: &ReconstructionOptions,
) -> Result<(ReconstructionReport, PairTable<Gram<T>>)> {
    if triples.len() != samples.len() {
        return Err(Error::GridMismatch { left: triples.len(), right: samples.len() });
    }
    let start = Instant::now();
    let n = samples.len();
    let grams = gram_table(triples)?;
    let boundary = boundary_detect(&grams, opts.boundary_tol.map(T::of))?;
    let boundary_mismatches = (0..n)
        .filter(|&i| {
            boundary.future[i] != (samples.kinds[i] == SampleKind::FutureBoundary)
                || boundary.past[i] != (samples.kinds[i] == SampleKind::PastBoundary)
        })
        .count();
    let chron = chron_reconstruct(&grams, &boundary, opts.relation_tol.map(T::of))?;
    let closure = causal_closure(&chron);
    let consistency = consistency_check(&chron);
    let interior: Vec<usize> = samples.interior().collect();
    let pts = &samples.points;
    let (chronological, causal, orient_ok, orient_n) = interior
        .par_iter()
        .enumerate()
        .map(|(a, &p)| {
            let (mut ch, mut ca, mut ok, mut cnt) = (Confusion::default(), Confusion::default(), 0, 0);
            for (b, &q) in interior.iter().enumerate() {
                if q == p {
                    continue;
                }
                let truth = relation(spec, &pts[p], &pts[q]);
                ca.add(truth.causal_future(), closure[p][q]);
                if b < a {
                    continue;
                }
                let related = chron.related(p, q);
                ch.add(truth.is_chronological(), related);
                if truth.is_chronological() && related {
                    cnt += 1;
                    if truth.chronological_future() == chron.precedes(p, q) {
                        ok += 1;
                    }
                }
            }
            (ch, ca, ok, cnt)
        })
        .reduce(
            || (Confusion::default(), Confusion::default(), 0, 0),
            |x, y| (x.0.merge(y.0), x.1.merge(y.1), x.2 + y.2, x.3 + y.3),
        );
    let report = ReconstructionReport {
        samples: n,
        interior_samples: interior.len(),
        quadrature: [0, 0],
        boundary_tol: boundary.tol,
        relation_tol: chron.tol.as_f64(),
        future_boundary_detected: boundary.future.iter().filter(|b| **b).count(),
        past_boundary_detected: boundary.past.iter().filter(|b| **b).count(),
        boundary_mismatches,
        boundary_exact: boundary_mismatches == 0,
        accuracy: chronological.accuracy(),
        chronological,
        orientation_correct: orient_ok,
        orientation_checked: orient_n,
        causal,
        consistency,
        calibrated_overlap_constant: None,
        overlap: Vec::new(),
        overlap_ratio_spread: 0.0,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, grams))
}

/// Full experiment: sample = interior nodes and boundary rings of a
/// `nt × ns` grid; quadrature on the `quad_factor`-times finer grid.
pub fn reconstruct_grid<T: Real>(
    spec: &SpacetimeSpec<T>,
    nt: usize,
    ns: usize,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionReport> {
    let start = Instant::now();
    if opts.quad_factor == 0 {
        return Err(Error::Precondition("quad_factor must be positive".into()));
    }
    let coarse = Grid::build(spec, nt, &[ns])?;
    let quad = Grid::build(spec, nt * opts.quad_factor, &[ns * opts.quad_factor])?;
    let samples = SampleSet::from_grid(&coarse);
    let triples = triple_table(&quad, &samples, opts.symmetry)?;
    let (mut report, grams) = analyze(spec, &samples, &triples, opts)?;
    report.quadrature = [quad.nt, quad.ns[0]];

    // overlap check on chronological interior pairs spread over the sample
    let solver = SigmaSolver::new(&quad, DEFAULT_RADIUS)?;
    let interior: Vec<usize> = samples.interior().collect();
    let pts = &samples.points;
    let mut pairs = Vec::new();
    let stride = (interior.len() / (4 * opts.overlap_pairs.max(1))).max(1);
    'outer: for a in (0..interior.len()).step_by(stride) {
        for b in (a + 1..interior.len()).rev().step_by(stride) {
            let (p, q) = (interior[a], interior[b]);
            if relation(spec, &pts[p], &pts[q]).is_chronological() {
                pairs.push((p, q));
                if pairs.len() >= opts.overlap_pairs {
                    break 'outer;
                }
                break;
            }
        }
    }
    let mut rows = Vec::new();
    for (k, &(p, q)) in pairs.iter().enumerate() {
        let lp = lambda_fields(&solver, &pts[p])?;
        let lq = lambda_fields(&solver, &pts[q])?;
        if k == 0 {
            report.calibrated_overlap_constant = overlap_constant(&quad, &lp, &lq).map(|c| c.as_f64());
        }
        let o = overlap_integral(&quad, &lp, &lq, &grams.get(p, q));
        let (direct, reconstructed) = (o.direct.as_f64(), o.reconstructed.as_f64());
        rows.push(OverlapRow { p, q, direct, reconstructed, ratio: reconstructed / direct });
    }
    if !rows.is_empty() {
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        report.overlap_ratio_spread = (hi - lo) / mean.abs();
    }
    report.overlap = rows;
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
