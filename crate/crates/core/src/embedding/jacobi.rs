use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spacetime::{integrate_variational, Point, SpacetimeSpec};

/// Jacobi field along `λ ↦ exp_x(λ w)`, `λ ∈ [0, 1]`, with `K(0) = v`,
/// `K(1) = 0`.
#[derive(Clone, Debug)]
pub struct JacobiSolution<T> {
    pub lambdas: Vec<T>,
    /// Coordinate components of `K(λ)`.
    pub k: Vec<[T; 3]>,
    /// Covariant derivative `K'(0)`.
    pub k_prime0: [T; 3],
}

/// Steps of the linearized flow per unit parameter.
const STEPS: usize = 256;

pub fn jacobi_solve<T: Real>(
    spec: &SpacetimeSpec<T>,
    x: &Point<T>,
    w: [T; 3],
    v: [T; 3],
) -> Result<JacobiSolution<T>> {
    if !(spec.metric(x.t, &w, &w) < T::zero()) {
        return Err(Error::NotTimelike);
    }
    if spec.has_constant_warp() {
        let lambdas: Vec<T> = (0..=STEPS).map(|i| T::of_usize(i) / T::of_usize(STEPS)).collect();
        let k = lambdas.iter().map(|&l| [v[0] * (T::one() - l), v[1] * (T::one() - l), v[2] * (T::one() - l)]).collect();
        return Ok(JacobiSolution { lambdas, k, k_prime0: [-v[0], -v[1], -v[2]] });
    }
    let n = spec.dimension();
    let var = integrate_variational(spec, [x.t, x.s[0], x.s[1]], w, STEPS, true);
    let a = var.dx_dx0();
    let b = var.dx_dv0();
    let av = a.mul_vec(&v);
    let rhs = [-av[0], -av[1], -av[2]];
    let dv0 = b
        .solve(&rhs, T::epsilon().sqrt())
        .ok_or_else(|| Error::ConjugatePoint(format!("endpoint of geodesic from {x:?} along {w:?}")))?;
    let mut lambdas = Vec::with_capacity(var.trajectory.len());
    let mut k = Vec::with_capacity(var.trajectory.len());
    for (lam, _, _, phi) in &var.trajectory {
        let mut kk = [T::zero(); 3];
        for i in 0..n {
            for j in 0..n {
                kk[i] = kk[i] + phi[i][j] * v[j] + phi[i][n + j] * dv0[j];
            }
        }
        lambdas.push(*lam);
        k.push(kk);
    }
    let gamma = spec.christoffel_contract(x.t, &w, &v);
    let k_prime0 = [dv0[0] + gamma[0], dv0[1] + gamma[1], dv0[2] + gamma[2]];
    Ok(JacobiSolution { lambdas, k, k_prime0 })
}
