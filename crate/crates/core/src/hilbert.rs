//! Curves in finite truncations of `ℓ²`: the extrinsic/intrinsic length
//! bound under a curvature bound, the cone-constrained length bound and
//! the two counterexamples showing its hypotheses are needed.

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type HVector<T> = Vec<T>;

pub fn inner<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    inner(a, a).sqrt()
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// Positive and negative parts: `w = w⁺ − w⁻`, `⟨w⁺, w⁻⟩ = 0`.
pub fn cone_project<T: Real>(w: &[T]) -> (HVector<T>, HVector<T>) {
    let plus = w.iter().map(|x| x.max(T::zero())).collect();
    let minus = w.iter().map(|x| (-*x).max(T::zero())).collect();
    (plus, minus)
}

/// Closed convex cones used by the cone-constrained checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cone<T> {
    /// Nonnegative orthant of the given dimension (self-dual).
    Orthant(usize),
    /// `{u | ⟨u, v⟩ ≥ 0}` (not self-dual in dimension ≥ 2).
    HalfSpace(Vec<T>),
}

impl<T: Real> Cone<T> {
    pub fn contains(&self, u: &[T], tol: T) -> bool {
        match self {
            Cone::Orthant(n) => u.len() == *n && u.iter().all(|x| *x >= -tol),
            Cone::HalfSpace(v) => inner(u, v) >= -tol * norm(v).max(T::one()),
        }
    }

    pub fn is_self_dual(&self) -> bool {
        match self {
            Cone::Orthant(_) => true,
            Cone::HalfSpace(v) => v.len() <= 1,
        }
    }
}

/// Uniformly sampled curve `t ↦ c(t)`, `t = k·h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HCurve<T> {
    pub h: T,
    pub points: Vec<HVector<T>>,
}

impl<T: Real> HCurve<T> {
    pub fn new(h: T, points: Vec<HVector<T>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Precondition("a curve needs at least 3 samples".into()));
        }
        if !(h > T::zero()) {
            return Err(Error::Precondition("step must be positive".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Precondition("samples of different dimension".into()));
        }
        Ok(Self { h, points })
    }

    pub fn sample(h: T, count: usize, c: impl Fn(T) -> HVector<T>) -> Result<Self> {
        Self::new(h, (0..count).map(|k| c(h * T::of_usize(k))).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn param(&self, k: usize) -> T {
        self.h * T::of_usize(k)
    }

    /// First derivative, central inside and second-order one-sided at the
    /// ends.
    pub fn first(&self) -> Vec<HVector<T>> {
        let p = &self.points;
        let m = p.len();
        let h2 = T::two() * self.h;
        let (three, four) = (T::of(3.0), T::of(4.0));
        (0..m)
            .map(|k| {
                (0..self.dim())
                    .map(|i| {
                        if k == 0 {
                            (-three * p[0][i] + four * p[1][i] - p[2][i]) / h2
                        } else if k == m - 1 {
                            (three * p[m - 1][i] - four * p[m - 2][i] + p[m - 3][i]) / h2
                        } else {
                            (p[k + 1][i] - p[k - 1][i]) / h2
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Second central differences at the interior samples `1..len−1`.
    pub fn second(&self) -> Vec<HVector<T>> {
        let p = &self.points;
        let hh = self.h * self.h;
        (1..p.len() - 1)
            .map(|k| (0..self.dim()).map(|i| (p[k + 1][i] - T::two() * p[k][i] + p[k - 1][i]) / hh).collect())
            .collect()
    }

    /// Polygonal length.
    pub fn length(&self) -> T {
        self.points.windows(2).fold(T::zero(), |s, w| s + norm(&sub(&w[1], &w[0])))
    }

    /// Largest deviation of `|c'|` from 1.
    pub fn speed_defect(&self) -> T {
        self.first().iter().fold(T::zero(), |m, d| m.max((norm(d) - T::one()).abs()))
    }

    /// Prefix up to and including sample `end`.
    pub fn prefix(&self, end: usize) -> Result<Self> {
        Self::new(self.h, self.points[..=end.min(self.len() - 1)].to_vec())
    }
}

/// `ρ = 2√2/(3r)`.
pub fn rho_for_radius<T: Real>(r: T) -> T {
    T::two() * T::two().sqrt() / (T::of(3.0) * r)
}

/// Relative headroom demanded of the curvature bound.
pub const HEADROOM: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallVerdict {
    pub r: f64,
    /// Admissible curvature bound `ρ / 1.05`.
    pub s_admissible: f64,
    pub max_accel: f64,
    pub max_distance: f64,
    pub speed_defect: f64,
    pub hypotheses_met: bool,
    pub length: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Measures the hypotheses `d(c(0), c(t)) < r`, `|c''| < ρ/1.05` and unit
/// speed, and compares the length with `3r/2`.
pub fn ball_check<T: Real>(curve: &HCurve<T>, r: T) -> BallVerdict {
    let s_adm = rho_for_radius(r) / T::of(HEADROOM);
    let max_accel = curve.second().iter().fold(T::zero(), |m, a| m.max(norm(a)));
    let c0 = &curve.points[0];
    let max_distance = curve.points.iter().fold(T::zero(), |m, p| m.max(norm(&sub(p, c0))));
    let speed_defect = curve.speed_defect();
    let hypotheses_met = max_accel < s_adm && max_distance < r && speed_defect <= T::of(1e-3);
    let length = curve.length();
    let bound = T::of(1.5) * r;
    BallVerdict {
        r: r.as_f64(),
        s_admissible: s_adm.as_f64(),
        max_accel: max_accel.as_f64(),
        max_distance: max_distance.as_f64(),
        speed_defect: speed_defect.as_f64(),
        hypotheses_met,
        length: length.as_f64(),
        bound: bound.as_f64(),
        margin: (bound - length).as_f64(),
        holds: length < bound,
    }
}

/// `max_t ((1 − ½ρ²t²) − ⟨c'(t), c'(0)⟩)⁺` for an arc-length curve.
pub fn trig_inequality_check<T: Real>(curve: &HCurve<T>, rho: T) -> T {
    let d = curve.first();
    let d0 = &d[0];
    d.iter().enumerate().fold(T::zero(), |m, (k, dk)| {
        let t = curve.param(k);
        let bound = T::one() - T::half() * rho * rho * t * t;
        m.max(bound - inner(dk, d0))
    })
}

/// `h(t) = t − ρ²t³/6`.
pub fn h_lower<T: Real>(rho: T, t: T) -> T {
    t - rho * rho * t * t * t / T::of(6.0)
}

/// Critical point `b₀ = √2/ρ` of `h` and `h(b₀)`.
pub fn h_maximum<T: Real>(rho: T) -> (T, T) {
    let b0 = T::two().sqrt() / rho;
    (b0, h_lower(rho, b0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub self_dual: bool,
    /// Samples where `c' ∉ v − K`.
    pub velocity_violations: usize,
    /// Samples where `c'' ∉ K`.
    pub accel_violations: usize,
    /// Samples outside `K ∩ (v − K)`.
    pub container_violations: usize,
    pub speed_defect: f64,
    pub hypotheses_met: bool,
    pub length: f64,
    /// Radius of the smallest origin-centered ball holding the curve.
    pub radius: f64,
    /// `√(2 r |v|)`.
    pub proof_bound: f64,
    /// Extremes of `⟨u, v⟩ / |u|` over `u = v − c'`.
    pub e_ratio: (f64, f64),
}

pub fn cone_check<T: Real>(curve: &HCurve<T>, cone: &Cone<T>, v: &[T]) -> Result<ConeVerdict> {
    if v.len() != curve.dim() {
        return Err(Error::Precondition(format!("v has dimension {}, curve {}", v.len(), curve.dim())));
    }
    let tol = T::of(1e-9).max(T::epsilon().sqrt());
    let d1 = curve.first();
    let d2 = curve.second();
    let acc_tol = tol.max(curve.h * T::of(10.0));
    let mut e = (T::infinity(), T::neg_infinity());
    let mut velocity_violations = 0;
    for d in &d1 {
        let u = sub(v, d);
        if !cone.contains(&u, tol) {
            velocity_violations += 1;
        }
        let nu = norm(&u);
        if nu > T::zero() {
            let q = inner(&u, v) / nu;
            e = (e.0.min(q), e.1.max(q));
        }
    }
    let accel_violations = d2.iter().filter(|a| !cone.contains(a, acc_tol)).count();
    let container_violations =
        curve.points.iter().filter(|p| !(cone.contains(p, tol) && cone.contains(&sub(v, p), tol))).count();
    let speed_defect = curve.speed_defect();
    let radius = curve.points.iter().fold(T::zero(), |m, p| m.max(norm(p)));
    Ok(ConeVerdict {
        self_dual: cone.is_self_dual(),
        velocity_violations,
        accel_violations,
        container_violations,
        speed_defect: speed_defect.as_f64(),
        hypotheses_met: velocity_violations == 0
            && accel_violations == 0
            && container_violations == 0
            && speed_defect <= T::of(1e-3),
        length: curve.length().as_f64(),
        radius: radius.as_f64(),
        proof_bound: (T::two() * radius * norm(v)).sqrt().as_f64(),
        e_ratio: (e.0.as_f64(), e.1.as_f64()),
    })
}

/// Arc-length resampling of `x ↦ k(x)`, `x ∈ [a, b]`, with step `h`.
pub fn arc_length_curve<T: Real>(k: impl Fn(T) -> HVector<T>, a: T, b: T, h: T) -> Result<HCurve<T>> {
    // dense polyline, then linear interpolation at equal arc length
    let fine = 64usize;
    let steps = (((b - a) / h).ceil().to_usize().unwrap_or(1) * fine).max(2);
    let pts: Vec<HVector<T>> = (0..=steps).map(|i| k(a + (b - a) * T::of_usize(i) / T::of_usize(steps))).collect();
    let mut cum = vec![T::zero()];
    for w in pts.windows(2) {
        let l = *cum.last().unwrap() + norm(&sub(&w[1], &w[0]));
        cum.push(l);
    }
    let total = *cum.last().unwrap();
    let count = (total / h).floor().to_usize().unwrap_or(0) + 1;
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for m in 0..count {
        let s = h * T::of_usize(m);
        while j + 1 < cum.len() - 1 && cum[j + 1] < s {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let w = if seg > T::zero() { (s - cum[j]) / seg } else { T::zero() };
        out.push(pts[j].iter().zip(&pts[j + 1]).map(|(p, q)| *p + (*q - *p) * w).collect());
    }
    HCurve::new(h, out)
}

/// Hyperbola `k(x) = (x, 1/x)` restricted to `[1/T, T]`, by arc length.
pub fn hyperbola<T: Real>(big_t: T, h: T) -> Result<HCurve<T>> {
    arc_length_curve(|x: T| vec![x, T::one() / x], T::one() / big_t, big_t, h)
}

/// Circle of radius `radius` in the plane `⟨u, e₃⟩ = ½`, traversed `turns`
/// times, by arc length.
pub fn hyperplane_circle<T: Real>(radius: T, turns: usize, h: T) -> Result<HCurve<T>> {
    let total = T::two() * T::PI() * radius * T::of_usize(turns);
    let count = (total / h).floor().to_usize().unwrap_or(0) + 1;
    HCurve::sample(h, count, |s| {
        let a = s / radius;
        vec![radius * a.cos(), radius * a.sin(), T::half()]
    })
}

/// Planar circular arc of radius `radius` starting at the origin, cut before
/// the chord reaches `r`.
pub fn circle_arc_until<T: Real>(radius: T, r: T, h: T) -> Result<HCurve<T>> {
    let at = |s: T| {
        let a = s / radius;
        vec![radius * a.sin(), radius * (T::one() - a.cos())]
    };
    let mut pts = vec![at(T::zero())];
    let mut k = 1;
    loop {
        let p = at(h * T::of_usize(k));
        if norm(&p) >= r || k > 1_000_000 {
            break;
        }
        pts.push(p);
        k += 1;
    }
    HCurve::new(h, pts)
}

/// Random arc-length curve in `ℝⁿ` with `|c''| ≤ kappa`, integrated by
/// rotating the unit tangent towards a smoothly varying random direction;
/// cut at the last sample before `|c(t) − c(0)| ≥ r` or at length `cap`.
pub fn random_admissible_curve(n: usize, r: f64, kappa: f64, h: f64, cap: f64, rng: &mut ChaCha8Rng) -> Result<HCurve<f64>> {
    let gauss = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>();
    let unit = |v: Vec<f64>| {
        let l = norm(&v);
        v.into_iter().map(|x| x / l).collect::<Vec<f64>>()
    };
    let modes: Vec<(Vec<f64>, Vec<f64>, f64)> =
        (0..3).map(|_| (gauss(rng), gauss(rng), rng.gen_range(0.5..4.0) / r)).collect();
    let strength: f64 = rng.gen_range(0.3..1.0);
    let mut tangent = unit(gauss(rng));
    let mut p = vec![0.0; n];
    let mut pts = vec![p.clone()];
    let steps = (cap / h).ceil() as usize;
    for k in 0..steps {
        let t = k as f64 * h;
        let mut a = vec![0.0; n];
        for (ca, sa, w) in &modes {
            for i in 0..n {
                a[i] += ca[i] * (w * t).cos() + sa[i] * (w * t).sin();
            }
        }
        let along = inner(&a, &tangent);
        for i in 0..n {
            a[i] -= along * tangent[i];
        }
        let an = norm(&a);
        let next = if an > 0.0 {
            let dir: Vec<f64> = a.iter().map(|x| x / an).collect();
            let angle = kappa * strength * h;
            unit((0..n).map(|i| tangent[i] * angle.cos() + dir[i] * angle.sin()).collect())
        } else {
            tangent.clone()
        };
        let q: Vec<f64> = (0..n).map(|i| p[i] + h * 0.5 * (tangent[i] + next[i])).collect();
        if norm(&q) >= r {
            break;
        }
        pts.push(q.clone());
        p = q;
        tangent = next;
    }
    HCurve::new(h, pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSweep {
    pub n: usize,
    pub trials: usize,
    pub admissible: usize,
    pub max_length_ratio: f64,
    pub all_hold: bool,
    pub max_trig_violation: f64,
}

/// Seeded random sweep for dimension `n` at radius `r`.
pub fn ball_sweep(n: usize, trials: usize, r: f64, seed: u64) -> Result<BallSweep> {
    let rho = rho_for_radius(r);
    let kappa = rho / HEADROOM * 0.97;
    let h = r / 1000.0;
    let results = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32) ^ k as u64);
            let c = random_admissible_curve(n, r, kappa, h, 2.0 * r, &mut rng)?;
            Ok((ball_check(&c, r), trig_inequality_check(&c, rho / HEADROOM)))
        })
        .collect::<Result<Vec<_>>>()?;
    let admissible = results.iter().filter(|(v, _)| v.hypotheses_met).count();
    let max_length_ratio = results.iter().map(|(v, _)| v.length / r).fold(0.0, f64::max);
    Ok(BallSweep {
        n,
        trials,
        admissible,
        max_length_ratio,
        all_hold: results.iter().all(|(v, _)| !v.hypotheses_met || v.holds),
        max_trig_violation: results.iter().map(|(_, t)| *t).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub parameter: f64,
    pub length: f64,
    pub lower_bound: f64,
    pub hypotheses_met: bool,
}

/// Hyperbola lengths over `[1/T, T]` with `v = (T, T)`, against `2(T − 1)`.
pub fn hyperbola_family(ts: &[f64], h: f64) -> Result<Vec<CounterexampleRow>> {
    ts.iter()
        .map(|&t| {
            let c = hyperbola(t, h)?;
            let v = cone_check(&c, &Cone::Orthant(2), &[t, t])?;
            Ok(CounterexampleRow { parameter: t, length: v.length, lower_bound: 2.0 * (t - 1.0), hypotheses_met: v.hypotheses_met })
        })
        .collect()
}

/// Repeated traversals of a circle in the hyperplane `⟨u, v⟩ = ½|v|²`
/// under the half-space cone, `v = e₃`.
pub fn circle_family(turns: &[usize], radius: f64, h: f64) -> Result<Vec<CounterexampleRow>> {
    let cone = Cone::HalfSpace(vec![0.0, 0.0, 1.0]);
    turns
        .iter()
        .map(|&k| {
            let c = hyperplane_circle(radius, k, h)?;
            let v = cone_check(&c, &cone, &[0.0, 0.0, 1.0])?;
            Ok(CounterexampleRow {
                parameter: k as f64,
                length: v.length,
                lower_bound: 2.0 * std::f64::consts::PI * radius * k as f64 - 2.0 * h,
                hypotheses_met: v.hypotheses_met,
            })
        })
        .collect()
}

/// Whether lengths strictly increase along the family.
pub fn monotone_increasing(rows: &[CounterexampleRow]) -> bool {
    rows.windows(2).all(|w| w[1].length > w[0].length)
}
