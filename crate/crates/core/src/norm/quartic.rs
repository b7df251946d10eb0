//! The planar quartic norm `H(x) = (x₁⁴ + 3x₁²x₂² + x₂⁴)^{1/4}` and its dual.
//!
//! The dual has no closed form and is obtained by maximizing `⟨ξ, x⟩` on
//! the unit sphere `{P(ξ) = 1}` with Newton's method on the Lagrange system
//! `λ∇P(ξ) = x`, `P(ξ) = 1`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::jet::Jet2;

pub(crate) const DUAL_MAX_ITERATIONS: usize = 50;
pub(crate) const DUAL_KKT_TOLERANCE: f64 = 1e-12;

fn poly(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    x2 * x2 + 3.0 * x2 * y2 + y2 * y2
}

fn poly_grad(x: f64, y: f64) -> [f64; 2] {
    [
        4.0 * x * x * x + 6.0 * x * y * y,
        6.0 * x * x * y + 4.0 * y * y * y,
    ]
}

fn poly_hess(x: f64, y: f64) -> [[f64; 2]; 2] {
    let xy = 12.0 * x * y;
    [
        [12.0 * x * x + 6.0 * y * y, xy],
        [xy, 6.0 * x * x + 12.0 * y * y],
    ]
}

pub(crate) fn value(x: &DVector<f64>) -> f64 {
    poly(x[0], x[1]).sqrt().sqrt()
}

/// `H = P^{1/4}`, `∇H = ∇P/(4P^{3/4})`,
/// `D²H = D²P/(4P^{3/4}) − 3∇P⊗∇P/(16P^{7/4})`.
pub(crate) fn jet(x: &DVector<f64>) -> Jet2 {
    let (a, b) = (x[0], x[1]);
    let p = poly(a, b);
    let h = p.sqrt().sqrt();
    let p34 = h * h * h;
    let p74 = p34 * p;
    let g = poly_grad(a, b);
    let hp = poly_hess(a, b);
    let gradient = DVector::from_vec(vec![g[0] / (4.0 * p34), g[1] / (4.0 * p34)]);
    let hessian = DMatrix::from_fn(2, 2, |i, j| {
        hp[i][j] / (4.0 * p34) - 3.0 * g[i] * g[j] / (16.0 * p74)
    });
    Jet2::new(h, gradient, hessian)
}

/// Maximizer `ξ*` of `⟨ξ, x⟩` over `{H(ξ) = 1}` together with the dual value.
/// `ξ*` is also `∇H°(x)`.
#[derive(Debug, Clone)]
pub(crate) struct DualSolution {
    pub value: f64,
    pub maximizer: DVector<f64>,
    // Solver diagnostics, inspected by the tests.
    #[cfg_attr(not(test), allow(dead_code))]
    pub iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    pub residual: f64,
}

fn kkt_residual(xi: &[f64; 2], lambda: f64, target: &[f64; 2]) -> Vector3<f64> {
    let g = poly_grad(xi[0], xi[1]);
    Vector3::new(
        lambda * g[0] - target[0],
        lambda * g[1] - target[1],
        poly(xi[0], xi[1]) - 1.0,
    )
}

pub(crate) fn dual(x: &DVector<f64>) -> Result<DualSolution> {
    let len = x.norm();
    if len == 0.0 {
        return Err(Error::AtOrigin);
    }
    // Solve on the unit direction; H° is 1-homogeneous and ξ* 0-homogeneous.
    let t = [x[0] / len, x[1] / len];
    let h0 = poly(t[0], t[1]).sqrt().sqrt();
    let mut xi = [t[0] / h0, t[1] / h0];
    let g0 = poly_grad(xi[0], xi[1]);
    let mut lambda = (t[0] * g0[0] + t[1] * g0[1]) / (g0[0] * g0[0] + g0[1] * g0[1]);

    let mut res = kkt_residual(&xi, lambda, &t);
    let mut iterations = 0;
    while res.amax() > DUAL_KKT_TOLERANCE {
        if iterations == DUAL_MAX_ITERATIONS {
            return Err(Error::DualNotConverged {
                iterations,
                residual: res.amax(),
            });
        }
        iterations += 1;
        let g = poly_grad(xi[0], xi[1]);
        let hp = poly_hess(xi[0], xi[1]);
        let jac = Matrix3::new(
            lambda * hp[0][0],
            lambda * hp[0][1],
            g[0],
            lambda * hp[1][0],
            lambda * hp[1][1],
            g[1],
            g[0],
            g[1],
            0.0,
        );
        let step = jac.lu().solve(&(-res)).ok_or(Error::DualNotConverged {
            iterations,
            residual: res.amax(),
        })?;
        // Backtracking on the residual norm.
        let mut alpha = 1.0;
        loop {
            let cand_xi = [xi[0] + alpha * step[0], xi[1] + alpha * step[1]];
            let cand_lambda = lambda + alpha * step[2];
            let cand_res = kkt_residual(&cand_xi, cand_lambda, &t);
            if cand_res.norm() < res.norm() || alpha < 1e-4 {
                xi = cand_xi;
                lambda = cand_lambda;
                res = cand_res;
                break;
            }
            alpha *= 0.5;
        }
    }
    if lambda.is_nan() || lambda <= 0.0 {
        // Stationary point that is not the maximizer.
        return Err(Error::DualNotConverged {
            iterations,
            residual: res.amax(),
        });
    }
    let maximizer = DVector::from_vec(vec![xi[0], xi[1]]);
    let value = len * (t[0] * xi[0] + t[1] * xi[1]);
    Ok(DualSolution {
        value,
        maximizer,
        iterations,
        residual: res.amax(),
    })
}

/// Jet of the dual norm from the maximizer. With `F = H²/2` and
/// `F° = H°²/2`, Legendre duality gives `D²F°(x) = [D²F(ξ*)]⁻¹`, and
/// `D²H° = (D²F° − ∇H°⊗∇H°)/H°`.
pub(crate) fn dual_jet(x: &DVector<f64>) -> Result<Jet2> {
    let sol = dual(x)?;
    let primal = jet(&sol.maximizer);
    let d2f = &primal.hessian * primal.value + &primal.gradient * primal.gradient.transpose();
    let d2f_dual = d2f
        .try_inverse()
        .ok_or_else(|| Error::InconsistentDual("singular Hessian of H²/2".into()))?;
    let g = sol.maximizer.clone();
    let hessian = (d2f_dual - &g * g.transpose()) / sol.value;
    Ok(Jet2::new(sol.value, g, crate::linalg::symmetrize(&hessian)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    /// Grid search of `⟨ξ, x⟩` over `{H(ξ) = 1}` on a fine angular grid,
    /// refined once around the best node.
    fn grid_dual(x: &DVector<f64>) -> f64 {
        let eval = |theta: f64| {
            let d = v(theta.cos(), theta.sin());
            let xi = &d / value(&d);
            xi.dot(x)
        };
        let n = 200_000;
        let step = std::f64::consts::TAU / n as f64;
        let (best, _) =
            (0..n)
                .map(|k| (k, eval(k as f64 * step)))
                .fold(
                    (0, f64::MIN),
                    |acc, (k, f)| if f > acc.1 { (k, f) } else { acc },
                );
        let centre = best as f64 * step;
        (0..=2000)
            .map(|k| eval(centre - step + 2.0 * step * k as f64 / 2000.0))
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn value_at_diagonal() {
        assert!((value(&v(1.0, 1.0)) - 5f64.powf(0.25)).abs() < 1e-15);
        assert!((value(&v(1.0, 1.0)) - 1.495_348_781_221_220_5).abs() < 1e-12);
    }

    #[test]
    fn jet_at_axis() {
        let j = jet(&v(1.0, 0.0));
        assert_eq!(j.value, 1.0);
        assert_eq!(j.gradient, v(1.0, 0.0));
        assert!((j.hessian[(0, 0)]).abs() < 1e-15);
        assert!((j.hessian[(1, 1)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn dual_matches_grid_search() {
        for x in [
            v(1.0, 0.0),
            v(1.0, 1.0),
            v(0.3, -0.7),
            v(-2.0, 0.4),
            v(0.0, -3.0),
        ] {
            let sol = dual(&x).unwrap();
            let oracle = grid_dual(&x);
            assert!(
                (sol.value - oracle).abs() <= 1e-6 * oracle,
                "{x:?}: newton {} grid {}",
                sol.value,
                oracle
            );
            assert!(sol.residual <= DUAL_KKT_TOLERANCE);
            assert!(sol.iterations <= DUAL_MAX_ITERATIONS);
        }
        // Frozen grid-search values.
        assert!((dual(&v(1.0, 0.0)).unwrap().value - 1.0).abs() < 1e-12);
        assert!((dual(&v(1.0, 1.0)).unwrap().value - 2.0 * 5f64.powf(-0.25)).abs() < 1e-12);
        assert!((dual(&v(0.3, -0.7)).unwrap().value - 0.743_011_440_829).abs() < 1e-9);
    }

    #[test]
    fn dual_jet_agrees_with_differences() {
        let x = v(0.8, -0.45);
        let j = dual_jet(&x).unwrap();
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let gp = dual(&xp).unwrap();
            let gm = dual(&xm).unwrap();
            let fd = (gp.value - gm.value) / (2.0 * h);
            assert!((fd - j.gradient[i]).abs() < 1e-8);
            for k in 0..2 {
                let fd2 = (gp.maximizer[k] - gm.maximizer[k]) / (2.0 * h);
                assert!((fd2 - j.hessian[(k, i)]).abs() < 1e-7, "{i}{k}");
            }
        }
    }
}
