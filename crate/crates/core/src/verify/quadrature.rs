//! Brute-force check of the transformed weak form
//!
//! `∫ H^{4−2N} H°(∇u*)⟨∇H°(∇u*), ∇ψ⟩ dy = ∫ H^{−2N} f(T_H y) ψ dy`
//!
//! by midpoint quadrature against a compactly supported bump `ψ`. The
//! gradient of `u* = u∘T_H` is taken by central differences of values, so
//! this path shares no code with the analytic chain-rule jets.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::ManufacturedProblem;
use crate::error::{Error, Result};
use crate::kelvin::KelvinContext;
use crate::operators::flux;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakFormComparison {
    pub centre: Vec<f64>,
    pub radius: f64,
    pub cells_per_axis: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_difference: f64,
}

/// Cells per axis used when the caller passes `None`.
pub fn default_cells(dim: usize) -> usize {
    match dim {
        2 => 96,
        3 => 40,
        _ => 18,
    }
}

/// `ψ(z) = exp(1 − 1/(1 − s))`, `s = |z − c|²/r²`, and its gradient.
fn bump(z: &DVector<f64>, centre: &DVector<f64>, radius: f64) -> Option<(f64, DVector<f64>)> {
    let d = z - centre;
    let s = d.norm_squared() / (radius * radius);
    if s >= 1.0 {
        return None;
    }
    let one_minus = 1.0 - s;
    let psi = (1.0 - 1.0 / one_minus).exp();
    let grad = &d * (-psi * 2.0 / (one_minus * one_minus * radius * radius));
    Some((psi, grad))
}

fn fd_gradient<F>(f: F, z: &DVector<f64>) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let h = 1e-5 * z.norm().max(1.0);
    let mut g = DVector::zeros(z.len());
    for i in 0..z.len() {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += h;
        zm[i] -= h;
        g[i] = (f(&zp)? - f(&zm)?) / (2.0 * h);
    }
    Ok(g)
}

/// Compares both sides of the weak form on a ball of radius `0.25·|c|`
/// around each centre `c`.
pub fn weak_form_crosscheck(
    ctx: &KelvinContext,
    prob: &ManufacturedProblem,
    centres: &[DVector<f64>],
    cells_per_axis: Option<usize>,
) -> Result<Vec<WeakFormComparison>> {
    if !ctx.spec().is_riemannian() {
        return Err(Error::NotRiemannian {
            what: "weak-form quadrature",
            norm: ctx.spec().to_string(),
        });
    }
    let dim = ctx.dim();
    let n = cells_per_axis.unwrap_or_else(|| default_cells(dim));
    let dual = ctx.dual();
    let ustar = |z: &DVector<f64>| prob.u.value(&ctx.map(z)?);

    let mut out = Vec::with_capacity(centres.len());
    for centre in centres {
        let radius = 0.25 * centre.norm();
        let width = 2.0 * radius / n as f64;
        let cell_volume = width.powi(dim as i32);
        let nd = dim as i32;
        // One slab per index of the first axis; slabs summed in order.
        let slabs: Vec<Result<(f64, f64)>> = (0..n)
            .into_par_iter()
            .map(|i0| {
                let mut lhs = 0.0;
                let mut rhs = 0.0;
                let inner = n.pow(dim as u32 - 1);
                for flat in 0..inner {
                    let mut z = DVector::zeros(dim);
                    z[0] = centre[0] - radius + (i0 as f64 + 0.5) * width;
                    let mut rest = flat;
                    for axis in 1..dim {
                        let k = rest % n;
                        rest /= n;
                        z[axis] = centre[axis] - radius + (k as f64 + 0.5) * width;
                    }
                    let Some((psi, grad_psi)) = bump(&z, centre, radius) else {
                        continue;
                    };
                    let h = ctx.spec().eval(&z)?;
                    let p = fd_gradient(ustar, &z)?;
                    let fl = flux(dual, &p)?;
                    lhs += h.powi(4 - 2 * nd) * fl.dot(&grad_psi);
                    rhs += h.powi(-2 * nd) * prob.source.value(&ctx.map(&z)?)? * psi;
                }
                Ok((lhs, rhs))
            })
            .collect();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for s in slabs {
            let (l, r) = s?;
            lhs += l;
            rhs += r;
        }
        lhs *= cell_volume;
        rhs *= cell_volume;
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
        out.push(WeakFormComparison {
            centre: centre.iter().copied().collect(),
            radius,
            cells_per_axis: n,
            lhs,
            rhs,
            rel_difference: rel,
        });
    }
    Ok(out)
}
