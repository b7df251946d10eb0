//! Deterministic point sets: rotated Halton sequences mapped to spheres and
//! annuli, plus seed-pinned random matrices.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Seeded generator for an independent stream; `stream` separates uses of
/// the same user seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Halton points in `[0,1)^dims` with a Cranley-Patterson rotation drawn
/// from `seed`.
pub fn halton(dims: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(
        dims <= PRIMES.len(),
        "at most {} Halton dimensions",
        PRIMES.len()
    );
    let mut rng = seeded_rng(seed, 0x4a17);
    let shift: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..dims)
                .map(|d| {
                    let u = radical_inverse(PRIMES[d], i) + shift[d];
                    u - u.floor()
                })
                .collect()
        })
        .collect()
}

/// Box-Muller on pairs of Halton coordinates, normalized to the unit sphere.
fn gaussian_direction(u: &[f64], dim: usize) -> DVector<f64> {
    let mut g = Vec::with_capacity(dim + 1);
    for pair in u.chunks(2) {
        let r = (-2.0 * pair[0].max(f64::MIN_POSITIVE).ln()).sqrt();
        let phi = std::f64::consts::TAU * pair[1];
        g.push(r * phi.cos());
        g.push(r * phi.sin());
    }
    g.truncate(dim);
    let v = DVector::from_vec(g);
    let len = v.norm();
    v / len
}

fn direction_dims(dim: usize) -> usize {
    2 * dim.div_ceil(2)
}

/// Low-discrepancy unit directions in `ℝ^dim`.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    if dim == 2 {
        // Angle from a single Halton coordinate.
        return halton(1, count, seed)
            .into_iter()
            .map(|u| {
                let t = std::f64::consts::TAU * u[0];
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
    }
    halton(direction_dims(dim), count, seed)
        .into_iter()
        .map(|u| gaussian_direction(&u, dim))
        .collect()
}

/// `count` equispaced unit vectors on the circle, starting at `e₁`.
pub fn circle_directions(count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect()
}

/// Points `x` with `norm(x)` spread over `[h_min, h_max]`: a low-discrepancy
/// direction is rescaled to unit norm and then to a radius drawn from the
/// last Halton coordinate.
pub fn annulus_points<F>(
    dim: usize,
    count: usize,
    seed: u64,
    h_min: f64,
    h_max: f64,
    norm: F,
) -> Vec<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let dd = if dim == 2 { 1 } else { direction_dims(dim) };
    halton(dd + 1, count, seed)
        .into_iter()
        .map(|u| {
            let dir = if dim == 2 {
                let t = std::f64::consts::TAU * u[0];
                DVector::from_vec(vec![t.cos(), t.sin()])
            } else {
                gaussian_direction(&u[..dd], dim)
            };
            let radius = h_min + (h_max - h_min) * u[dd];
            let scale = radius / norm(&dir);
            dir * scale
        })
        .collect()
}
