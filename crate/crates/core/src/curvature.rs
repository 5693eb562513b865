//! Finite-difference curvature of a metric given as a function of
//! coordinates.

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Real;

pub type Christoffel<T> = [[[T; 3]; 3]; 3];
/// All-lower Riemann tensor `R_abcd = g_ae R^e_bcd`, where
/// `R(∂_c, ∂_d)∂_b = R^a_bcd ∂_a`.
pub type Riemann<T> = [[[[T; 3]; 3]; 3]; 3];

/// Per-axis finite-difference steps, optionally with one Richardson
/// extrapolation (steps halved).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil<T> {
    pub h: [T; 3],
    pub richardson: bool,
}

impl<T: Real> Stencil<T> {
    pub fn uniform(h: T) -> Self {
        Self { h: [h; 3], richardson: true }
    }

    fn halved(&self) -> Self {
        Self { h: self.h.map(|h| h * T::half()), richardson: false }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.h.iter().take(n).any(|h| !(*h > T::epsilon().sqrt().sqrt() * T::epsilon().sqrt())) {
            return Err(Error::StepUnderflow);
        }
        Ok(())
    }
}

fn shifted<T: Real>(x: &[T; 3], k: usize, d: T) -> [T; 3] {
    let mut y = *x;
    y[k] = y[k] + d;
    y
}

/// `∂_k g` by central differences.
fn metric_derivs<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], n: usize, h: &[T; 3]) -> [Mat3<T>; 3] {
    let mut out = [Mat3::zeros(n); 3];
    for k in 0..n {
        let (p, m) = (g(&shifted(x, k, h[k])), g(&shifted(x, k, -h[k])));
        for i in 0..n {
            for j in 0..n {
                out[k].a[i][j] = (p.a[i][j] - m.a[i][j]) / (T::two() * h[k]);
            }
        }
    }
    out
}

fn inverse<T: Real>(m: &Mat3<T>) -> Result<Mat3<T>> {
    m.inverse(T::epsilon() * T::of(64.0)).ok_or(Error::SingularSystem)
}

/// `Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc)` from central
/// differences of the metric (no extrapolation).
pub fn christoffel_fd<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], h: &[T; 3]) -> Result<Christoffel<T>> {
    let g0 = g(x);
    let n = g0.n;
    let gi = inverse(&g0)?;
    let dg = metric_derivs(g, x, n, h);
    let mut out = [[[T::zero(); 3]; 3]; 3];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = T::zero();
                for d in 0..n {
                    s = s + gi.a[a][d] * (dg[b].a[d][c] + dg[c].a[d][b] - dg[d].a[b][c]);
                }
                out[a][b][c] = s * T::half();
            }
        }
    }
    Ok(out)
}

/// Christoffel symbols, Richardson-extrapolated when requested.
pub fn christoffel<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], st: &Stencil<T>) -> Result<Christoffel<T>> {
    st.check(g(x).n)?;
    let coarse = christoffel_fd(g, x, &st.h)?;
    if !st.richardson {
        return Ok(coarse);
    }
    let fine = christoffel_fd(g, x, &st.halved().h)?;
    Ok(extrapolate3(&coarse, &fine))
}

fn extrapolate3<T: Real>(c: &Christoffel<T>, f: &Christoffel<T>) -> Christoffel<T> {
    let mut out = *f;
    for a in 0..3 {
        for b in 0..3 {
            for d in 0..3 {
                out[a][b][d] = (T::of(4.0) * f[a][b][d] - c[a][b][d]) / T::of(3.0);
            }
        }
    }
    out
}

fn riemann_once<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], h: &[T; 3]) -> Result<Riemann<T>> {
    let g0 = g(x);
    let n = g0.n;
    let gam = christoffel_fd(g, x, h)?;
    let mut dgam = [[[[T::zero(); 3]; 3]; 3]; 3];
    for k in 0..n {
        let p = christoffel_fd(g, &shifted(x, k, h[k]), h)?;
        let m = christoffel_fd(g, &shifted(x, k, -h[k]), h)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    dgam[k][a][b][c] = (p[a][b][c] - m[a][b][c]) / (T::two() * h[k]);
                }
            }
        }
    }
    // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    let mut up = [[[[T::zero(); 3]; 3]; 3]; 3];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = dgam[c][a][d][b] - dgam[d][a][c][b];
                    for e in 0..n {
                        s = s + gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b];
                    }
                    up[a][b][c][d] = s;
                }
            }
        }
    }
    Ok(lower(&g0, &up))
}

fn lower<T: Real>(g: &Mat3<T>, up: &Riemann<T>) -> Riemann<T> {
    let n = g.n;
    let mut out = [[[[T::zero(); 3]; 3]; 3]; 3];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = T::zero();
                    for e in 0..n {
                        s = s + g.a[a][e] * up[e][b][c][d];
                    }
                    out[a][b][c][d] = s;
                }
            }
        }
    }
    out
}

fn extrapolate4<T: Real>(c: &Riemann<T>, f: &Riemann<T>) -> Riemann<T> {
    let mut out = *f;
    for a in 0..3 {
        for b in 0..3 {
            for d in 0..3 {
                for e in 0..3 {
                    out[a][b][d][e] = (T::of(4.0) * f[a][b][d][e] - c[a][b][d][e]) / T::of(3.0);
                }
            }
        }
    }
    out
}

/// Riemann tensor from finite differences of finite-difference Christoffel
/// symbols.
pub fn riemann<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], st: &Stencil<T>) -> Result<Riemann<T>> {
    st.check(g(x).n)?;
    let coarse = riemann_once(g, x, &st.h)?;
    if !st.richardson {
        return Ok(coarse);
    }
    let fine = riemann_once(g, x, &st.halved().h)?;
    Ok(extrapolate4(&coarse, &fine))
}

/// Second-order stencil for the lower-index Riemann tensor directly from
/// second derivatives of the metric:
/// `R_abcd = ½(∂_c∂_b g_ad + ∂_d∂_a g_bc − ∂_c∂_a g_bd − ∂_d∂_b g_ac)
///         + g_ef(Γ^e_bc Γ^f_ad − Γ^e_bd Γ^f_ac)`.
pub fn riemann_direct<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], h: &[T; 3]) -> Result<Riemann<T>> {
    let g0 = g(x);
    let n = g0.n;
    let gam = christoffel_fd(g, x, h)?;
    // d2[k][l] = ∂_k∂_l g
    let mut d2 = [[Mat3::zeros(n); 3]; 3];
    for k in 0..n {
        for l in 0..n {
            let m = if k == l {
                let (p, q) = (g(&shifted(x, k, h[k])), g(&shifted(x, k, -h[k])));
                let mut m = Mat3::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        m.a[i][j] = (p.a[i][j] - T::two() * g0.a[i][j] + q.a[i][j]) / (h[k] * h[k]);
                    }
                }
                m
            } else {
                let at = |sk: T, sl: T| g(&shifted(&shifted(x, k, sk * h[k]), l, sl * h[l]));
                let (pp, pm, mp, mm) = (at(T::one(), T::one()), at(T::one(), -T::one()), at(-T::one(), T::one()), at(-T::one(), -T::one()));
                let mut m = Mat3::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        m.a[i][j] = (pp.a[i][j] - pm.a[i][j] - mp.a[i][j] + mm.a[i][j]) / (T::of(4.0) * h[k] * h[l]);
                    }
                }
                m
            };
            d2[k][l] = m;
        }
    }
    let mut out = [[[[T::zero(); 3]; 3]; 3]; 3];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = T::half()
                        * (d2[c][b].a[a][d] + d2[d][a].a[b][c] - d2[c][a].a[b][d] - d2[d][b].a[a][c]);
                    for e in 0..n {
                        for f in 0..n {
                            s = s + g0.a[e][f] * (gam[e][b][c] * gam[f][a][d] - gam[e][b][d] * gam[f][a][c]);
                        }
                    }
                    out[a][b][c][d] = s;
                }
            }
        }
    }
    Ok(out)
}

/// Sectional curvature `R(u, v, u, v) / (g(u,u)g(v,v) − g(u,v)²)`.
pub fn sectional<T: Real>(r: &Riemann<T>, g: &Mat3<T>, u: &[T; 3], v: &[T; 3]) -> Result<T> {
    let n = g.n;
    let ip = |a: &[T; 3], b: &[T; 3]| {
        let gb = g.mul_vec(b);
        (0..n).fold(T::zero(), |s, i| s + a[i] * gb[i])
    };
    let q = ip(u, u) * ip(v, v) - ip(u, v) * ip(u, v);
    if q == T::zero() {
        return Err(Error::Precondition("degenerate plane".into()));
    }
    let mut s = T::zero();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    s = s + r[a][b][c][d] * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    Ok(s / q)
}

/// Gaussian curvature of a 2D metric.
pub fn gaussian_curvature<T: Real>(g: &dyn Fn(&[T; 3]) -> Mat3<T>, x: &[T; 3], st: &Stencil<T>) -> Result<T> {
    let g0 = g(x);
    if g0.n != 2 {
        return Err(Error::Precondition("Gaussian curvature needs a 2D metric".into()));
    }
    let r = riemann(g, x, st)?;
    let one = T::one();
    let z = T::zero();
    sectional(&r, &g0, &[one, z, z], &[z, one, z])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(radius: f64) -> impl Fn(&[f64; 3]) -> Mat3<f64> {
        move |x: &[f64; 3]| {
            let mut m = Mat3::zeros(2);
            m.a[0][0] = radius * radius;
            m.a[1][1] = (radius * x[0].sin()).powi(2);
            m
        }
    }

    #[test]
    fn round_sphere() {
        for r in [0.5, 1.0, 3.0] {
            let k = gaussian_curvature(&sphere(r), &[1.0, 0.3, 0.0], &Stencil::uniform(1e-2)).unwrap();
            assert!((k - 1.0 / (r * r)).abs() < 1e-3 / (r * r), "{r}: {k}");
        }
    }

    #[test]
    fn flat_metrics() {
        let polar = |x: &[f64; 3]| {
            let mut m = Mat3::zeros(2);
            m.a[0][0] = 1.0;
            m.a[1][1] = x[0] * x[0];
            m
        };
        let k = gaussian_curvature(&polar, &[1.3, 0.2, 0.0], &Stencil::uniform(1e-2)).unwrap();
        assert!(k.abs() < 1e-6);
        let euclid = |_: &[f64; 3]| Mat3::identity(2);
        assert_eq!(gaussian_curvature(&euclid, &[0.0; 3], &Stencil::uniform(1e-2)).unwrap(), 0.0);
    }

    #[test]
    fn direct_stencil_agrees() {
        let g = sphere(2.0);
        let x = [0.8, 0.0, 0.0];
        let a = riemann(&g, &x, &Stencil::uniform(1e-2)).unwrap();
        let b = riemann_direct(&g, &x, &[1e-3; 3]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert!((a[i][j][k][l] - b[i][j][k][l]).abs() < 1e-5, "{i}{j}{k}{l}: {} vs {}", a[i][j][k][l], b[i][j][k][l]);
                    }
                }
            }
        }
    }

    #[test]
    fn tiny_steps_rejected() {
        assert!(matches!(
            gaussian_curvature(&sphere(1.0), &[1.0, 0.0, 0.0], &Stencil::uniform(1e-14)),
            Err(Error::StepUnderflow)
        ));
    }
}
