//! Measures the spread of `H^{2N}·|det DT_H|` for the quartic norm over the
//! 64-direction sweep, with the Jacobian taken by central differences of the
//! Kelvin map only.
//!
//!     cargo run --release -p aniso-kelvin --example quartic_spread

use aniso_kelvin::kelvin::KelvinContext;
use aniso_kelvin::linalg::determinant;
use aniso_kelvin::sampling::circle_directions;
use aniso_kelvin::verify::QUARTIC_SPREAD_THRESHOLD;
use aniso_kelvin::{DMatrix, NormSpec};

fn main() -> aniso_kelvin::Result<()> {
    let ctx = KelvinContext::new(NormSpec::quartic())?;
    let mut values = Vec::new();
    for x in circle_directions(64) {
        let h = 1e-5;
        let mut jac = DMatrix::zeros(2, 2);
        for j in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            jac.set_column(j, &((ctx.map(&xp)? - ctx.map(&xm)?) / (2.0 * h)));
        }
        let v = ctx.spec().eval(&x)?.powi(4) * determinant(&jac).abs();
        println!("{:>9.6} {:>9.6}  {v:.9}", x[0], x[1]);
        values.push(v);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    println!(
        "min {min:.9}  max {max:.9}  spread {:.9}",
        (max - min) / max
    );
    println!("frozen threshold {QUARTIC_SPREAD_THRESHOLD}");
    Ok(())
}
