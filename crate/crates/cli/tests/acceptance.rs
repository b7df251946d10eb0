//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::Command;

use aniso_kelvin::kelvin::{reflection_det, KelvinContext};
use aniso_kelvin::linalg::determinant;
use aniso_kelvin::sampling::{circle_directions, seeded_rng, sphere_directions};
use aniso_kelvin::verify::{
    check_fundamental_solution, run_counterexample_scan, run_identity_suite, run_kelvin_suite,
    run_nlaplace_suite, run_semilinear_suite, QUARTIC_SPREAD_THRESHOLD,
};
use aniso_kelvin::{DMatrix, NormKind, NormSpec, ResidualReport, SamplePlan, SpdMatrix};

const POINTS: usize = 100;

fn random_spd(dim: usize, seed: u64) -> NormSpec {
    NormSpec::riemannian(SpdMatrix::random(dim, &mut seeded_rng(seed, 0xacce)).unwrap())
}

/// Ten seed-pinned SPD norms cycling through `dims`.
fn spd_family(dims: &[usize]) -> Vec<NormSpec> {
    (0..10)
        .map(|k| random_spd(dims[k % dims.len()], 100 + k as u64))
        .collect()
}

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Self {
            ok: true,
            detail: String::new(),
        }
    }

    fn require(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond {
            self.ok = false;
            if self.detail.len() < 600 {
                self.detail.push_str(&what());
                self.detail.push_str("; ");
            }
        }
    }

    /// Every listed check present with `max_rel_residual ≤ tol`.
    fn checks(&mut self, r: &ResidualReport, names: &[&str], tol: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for name in names {
            match r.check(name) {
                Some(c) => {
                    worst = worst.max(c.max_rel_residual);
                    self.require(c.max_rel_residual <= tol && c.count > 0, || {
                        format!("{} {name}: {:.3e} > {tol:e}", r.norm, c.max_rel_residual)
                    });
                }
                None => self.require(false, || format!("{} {name}: missing", r.norm)),
            }
        }
        worst
    }
}

fn identities() -> Outcome {
    let mut o = Outcome::new();
    let mut specs: Vec<NormSpec> = (2..=4).map(|d| NormSpec::euclidean(d).unwrap()).collect();
    specs.extend(spd_family(&[2, 3, 4]));
    specs.push(NormSpec::quartic());
    let closed = [
        "homogeneity",
        "euler",
        "gradient-homogeneity",
        "equivalence",
    ];
    let duality = [
        "dual-of-gradient",
        "norm-of-dual-gradient",
        "gradient-inversion",
        "dual-gradient-inversion",
        "bidual",
    ];
    let mut worst: f64 = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        let r = run_identity_suite(spec, &SamplePlan::wide(POINTS, k as u64)).unwrap();
        o.require(r.passed, || format!("{spec}: {:?}", r.failures()));
        worst = worst.max(o.checks(&r, &closed, 1e-8));
        let dual_tol = if spec.kind() == NormKind::Quartic {
            1e-6
        } else {
            1e-8
        };
        worst = worst.max(o.checks(&r, &duality, dual_tol));
        o.require(r.checks.iter().all(|c| c.count == POINTS), || {
            format!("{spec}: point count")
        });
    }
    o.detail
        .push_str(&format!("{} norms, worst {worst:.2e}", specs.len()));
    o
}

fn kelvin_round_trips() -> Outcome {
    let mut o = Outcome::new();
    let mut specs: Vec<NormSpec> = (2..=4).map(|d| NormSpec::euclidean(d).unwrap()).collect();
    specs.extend(spd_family(&[2, 3, 4]));
    specs.push(NormSpec::quartic());
    let mut worst: f64 = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        let r = run_kelvin_suite(spec, &SamplePlan::wide(POINTS, k as u64)).unwrap();
        let tol = if spec.has_numeric_dual() { 1e-6 } else { 1e-8 };
        worst = worst.max(o.checks(
            &r,
            &["roundtrip-inverse-after-map", "roundtrip-map-after-inverse"],
            tol,
        ));
    }
    o.detail.push_str(&format!(
        "{} norms on 0.1 <= H <= 10, worst {worst:.2e}",
        specs.len()
    ));
    o
}

fn determinant_law() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for (k, spec) in spd_family(&[2, 3, 4]).iter().enumerate() {
        let r = run_kelvin_suite(spec, &SamplePlan::wide(POINTS, 40 + k as u64)).unwrap();
        worst = worst.max(o.checks(&r, &["det-invariant"], 1e-8));
    }
    // Householder reflection I − 2ŷ⊗ŷ: |det| = 1, orientation reversing.
    let mut refl: f64 = 0.0;
    for dim in 2..=4 {
        for y in sphere_directions(dim, POINTS, 3) {
            let y = &y * 3.7;
            let d = reflection_det(&y);
            refl = refl.max((d.abs() - 1.0).abs());
            o.require(d < 0.0, || format!("reflection det sign {d}"));
        }
    }
    o.require(refl <= 1e-12, || {
        format!("reflection |det| off by {refl:e}")
    });
    o.detail
        .push_str(&format!("worst {worst:.2e}, reflection {refl:.1e}"));
    o
}

/// FD-Jacobian spread measured without the analytic Hessian path.
fn fd_quartic_spread() -> f64 {
    let ctx = KelvinContext::new(NormSpec::quartic()).unwrap();
    let values: Vec<f64> = circle_directions(64)
        .into_iter()
        .map(|x| {
            let h = 1e-5;
            let mut jac = DMatrix::zeros(2, 2);
            for j in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                jac.set_column(
                    j,
                    &((ctx.map(&xp).unwrap() - ctx.map(&xm).unwrap()) / (2.0 * h)),
                );
            }
            ctx.spec().eval(&x).unwrap().powi(4) * determinant(&jac).abs()
        })
        .collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / max
}

fn counterexample() -> Outcome {
    let mut o = Outcome::new();
    let control = random_spd(2, 7);
    let r = run_counterexample_scan(&NormSpec::quartic(), &control).unwrap();
    let spread = r.bound("spread").unwrap().value;
    let control_spread = r.bound("control-spread").unwrap().value;
    o.require(spread >= QUARTIC_SPREAD_THRESHOLD, || {
        format!("spread {spread}")
    });
    o.require(control_spread <= 1e-8, || {
        format!("control spread {control_spread:e}")
    });
    o.checks(&r, &["scale-invariance"], 1e-10);
    let fd = fd_quartic_spread();
    o.require(fd >= QUARTIC_SPREAD_THRESHOLD, || {
        format!("FD oracle spread {fd}")
    });
    o.require(r.passed, || format!("{:?}", r.failures()));
    o.detail.push_str(&format!(
        "spread {spread:.6} (FD oracle {fd:.6}) >= {QUARTIC_SPREAD_THRESHOLD}, control {control_spread:.1e}"
    ));
    o
}

fn semilinear_theorem() -> Outcome {
    let mut o = Outcome::new();
    let specs = [
        NormSpec::euclidean(3).unwrap(),
        random_spd(3, 201),
        random_spd(4, 202),
        random_spd(4, 203),
    ];
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    let mut weak: f64 = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        let r = run_semilinear_suite(spec, &SamplePlan::default().with_seed(k as u64)).unwrap();
        worst = worst.max(o.checks(
            &r,
            &[
                "theorem-semilinear/quadratic",
                "theorem-semilinear/gaussian-bump",
            ],
            1e-5,
        ));
        for b in r
            .bounds
            .iter()
            .filter(|b| b.name.ends_with("convergence-order"))
        {
            min_order = min_order.min(b.value);
            o.require(b.value >= 1.8, || format!("{spec}: order {}", b.value));
        }
        let w = r.bound("weak-form-quadrature").unwrap().value;
        weak = weak.max(w);
        o.require(w <= 1e-2, || format!("{spec}: weak form {w:e}"));
        o.require(r.passed, || format!("{spec}: {:?}", r.failures()));
    }
    o.require(min_order.is_finite(), || "no convergence fit".into());
    o.detail.push_str(&format!(
        "worst {worst:.2e}, numeric order >= {min_order:.3}, weak form {weak:.1e}"
    ));
    o
}

fn nlaplace_theorem() -> Outcome {
    let mut o = Outcome::new();
    let specs = [
        NormSpec::euclidean(3).unwrap(),
        NormSpec::riemannian(SpdMatrix::diagonal(&[4.0, 1.0, 1.0]).unwrap()),
    ];
    let mut worst_affine: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let r = run_nlaplace_suite(spec, &SamplePlan::default()).unwrap();
        worst_affine = worst_affine.max(o.checks(&r, &["theorem-nlaplace/affine"], 1e-5));
        worst = worst.max(o.checks(
            &r,
            &[
                "theorem-nlaplace/half-squared-length",
                "theorem-nlaplace/half-squared-length/numeric",
            ],
            1e-4,
        ));
        for c in &r.checks {
            o.require(c.count + c.excluded == POINTS, || {
                format!("{}: row count", c.name)
            });
        }
        o.require(r.passed, || format!("{spec}: {:?}", r.failures()));
    }
    o.detail
        .push_str(&format!("affine {worst_affine:.1e}, quadratic {worst:.2e}"));
    o
}

fn fundamental_solution() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for (k, spec) in spd_family(&[3, 4]).iter().enumerate() {
        let r = check_fundamental_solution(spec, &SamplePlan::wide(POINTS, k as u64)).unwrap();
        worst = worst.max(o.checks(&r, &["dual-harmonic-fundamental-solution"], 1e-6));
    }
    o.detail.push_str(&format!("10 norms, worst {worst:.2e}"));
    o
}

fn proof_identities() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for (k, spec) in spd_family(&[2, 3, 4]).iter().enumerate() {
        let r = run_kelvin_suite(spec, &SamplePlan::wide(POINTS, 80 + k as u64)).unwrap();
        worst = worst.max(o.checks(&r, &["jacobian-flux", "jacobian-duality"], 1e-8));
    }
    o.detail.push_str(&format!("worst {worst:.2e}"));
    o
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: usize, name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_aniso-kelvin"))
            .args([
                "all",
                "--norm",
                "riemannian:random",
                "--dim",
                "3",
                "--seed",
                "17",
                "--count",
                "40",
            ])
            .args(["--threads", &threads.to_string(), "--out"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(status.status.code().is_some());
        std::fs::read(&path).unwrap_or_default()
    };
    let a = run(1, "a.json");
    let b = run(1, "b.json");
    let c = run(4, "c.json");
    o.require(!a.is_empty(), || "no report written".into());
    o.require(a == b, || "repeat run differs".into());
    o.require(a == c, || "--threads 1 and 4 differ".into());
    o.detail
        .push_str(&format!("{} bytes, threads 1/1/4 identical", a.len()));
    o
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("norm identities", identities),
        ("Kelvin map round trips", kelvin_round_trips),
        ("determinant law", determinant_law),
        ("quartic counterexample", counterexample),
        ("semilinear Kelvin theorem", semilinear_theorem),
        ("N-Laplace Kelvin theorem", nlaplace_theorem),
        ("dual harmonicity of H^(2-N)", fundamental_solution),
        ("Jacobian flux and duality identities", proof_identities),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.ok {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
