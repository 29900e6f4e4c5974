//! Acceptance suite. Each criterion prints one line and the process exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fraclap_core::norms::{
    gagliardo_energy_rn, holder_exponent_estimate, nonlocal_tail, weighted_l1s_norm,
};
use fraclap_core::ops::{
    carre_du_champ, frac_laplacian, gagliardo_functional, leibniz_residual, polarization_check,
};
use fraclap_core::poisson::{
    analyticity_radii, factorial_growth, sharmonicity_residual, wos_solve,
};
use fraclap_core::presets::{bump, constant, gaussian, holder_cusp};
use fraclap_core::{
    holder_transfer_exponents, make_cutoff, normalization_constant, preset_field, solve_dirichlet,
    AngularRule, BallProblem, FracParams, QuadratureSpec, RadialCutoff, ScalarField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn p2(s: f64) -> FracParams {
    FracParams::new(2, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// Simpson's rule on [a, b] with n (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

// J0(z) = (1/2π) ∫ cos(z sin θ) dθ by the periodic trapezoid.
fn bessel_j0(z: f64) -> f64 {
    const M: usize = 160;
    (0..M)
        .map(|k| (z * (2.0 * PI * k as f64 / M as f64).sin()).cos())
        .sum::<f64>()
        / M as f64
}

// (-Δ)^s e^{-π|x|²} in the plane from the symbol (2π|ξ|)^{2s}:
// 2π ∫ (2πk)^{2s} e^{-πk²} J0(2πk|x|) k dk, under k = v².
fn gaussian_oracle(s: f64, r: f64) -> f64 {
    let f = |v: f64| {
        let k = v * v;
        if k == 0.0 {
            return 0.0;
        }
        (2.0 * PI * k).powf(2.0 * s)
            * (-PI * k * k).exp()
            * bessel_j0(2.0 * PI * k * r)
            * k
            * 2.0
            * v
    };
    2.0 * PI * simpson(f, 0.0, 7f64.sqrt(), 6_000)
}

fn crit_normalization() -> Outcome {
    let c = normalization_constant(2, 0.5).unwrap();
    let e = rel(c, 1.0 / (2.0 * PI));
    outcome(e <= 1e-10, format!("rel err {e:.1e} (tol 1e-10)"))
}

fn crit_gaussian_oracle() -> Outcome {
    let u = gaussian();
    let spec = QuadratureSpec::default();
    let pts: [[f64; 2]; 10] = [
        [0.0, 0.0],
        [0.1, 0.0],
        [0.0, -0.25],
        [0.3, 0.2],
        [-0.35, 0.35],
        [0.7, 0.1],
        [-0.4, -0.8],
        [1.1, 0.3],
        [0.0, 1.5],
        [-1.6, 1.2],
    ];
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        let p = p2(s);
        for x in &pts {
            let v = match frac_laplacian(&u, x, &p, &spec) {
                Ok(v) => v.value,
                Err(e) => return outcome(false, format!("s = {s}, x = {x:?}: {e}")),
            };
            worst = worst.max(rel(v, gaussian_oracle(s, x[0].hypot(x[1]))));
        }
    }
    let center = frac_laplacian(&u, &[0.0, 0.0], &p2(0.5), &spec)
        .unwrap()
        .value;
    let e0 = rel(center, PI);
    outcome(
        worst <= 1e-5 && e0 <= 1e-5,
        format!("worst rel err {worst:.1e} over 30 values, |value/π - 1| = {e0:.1e} at the origin (tol 1e-5)"),
    )
}

fn crit_leibniz() -> Outcome {
    let f = bump(1.0);
    let g = bump(0.7).translated(&[0.2, -0.1]);
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<[f64; 2]> = (0..20)
        .map(|_| {
            let r = 1.2 * rng.random::<f64>().sqrt();
            let a = 2.0 * PI * rng.random::<f64>();
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        for x in &pts {
            match leibniz_residual(&f, &g, x, &p2(s), &spec) {
                Ok(c) => worst = worst.max(c.residual.abs() / c.scale),
                Err(e) => return outcome(false, format!("s = {s}, x = {x:?}: {e}")),
            }
        }
    }
    outcome(
        worst <= 1e-5,
        format!("worst residual/scale {worst:.1e} over 60 points (tol 1e-5)"),
    )
}

fn crit_polarization() -> Outcome {
    let p = p2(0.5);
    let eta = make_cutoff(0.1).unwrap();
    let spec = QuadratureSpec::monte_carlo()
        .with_samples(32_000_000)
        .with_angular(AngularRule::Fixed(32));
    let mut worst = 0.0f64;
    for name in ["constant", "affine", "gaussian", "bump(1)", "getoor"] {
        let u = preset_field(name).unwrap();
        for tau in [0.4, 0.1] {
            match polarization_check(&u, &eta, &RadialCutoff::new(tau).unwrap(), &p, &spec) {
                Ok(c) => worst = worst.max(c.residual.abs() / c.combined_stderr),
                Err(e) => return outcome(false, format!("{name}, τ = {tau}: {e}")),
            }
        }
    }
    outcome(
        worst <= 3.0,
        format!("worst |residual|/σ {worst:.2} over 5 presets × 2 τ (tol 3)"),
    )
}

fn crit_gagliardo_limit() -> Outcome {
    let p = p2(0.5);
    let eta = make_cutoff(0.05).unwrap();
    let spec = QuadratureSpec::monte_carlo().with_samples(32_000_000);
    let mut worst_gap = 0.0f64;
    let mut worst_drop = f64::NEG_INFINITY;
    for name in ["gaussian", "bump(1)", "bump(0.9)"] {
        let u = preset_field(name).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        let mut last = 0.0;
        for tau in [0.4, 0.2, 0.1, 0.05] {
            let g =
                match gagliardo_functional(&u, &eta, &RadialCutoff::new(tau).unwrap(), &p, &spec) {
                    Ok(g) => g,
                    Err(e) => return outcome(false, format!("{name}, τ = {tau}: {e}")),
                };
            if let Some((v, se)) = prev {
                // drop in units of the combined standard error
                worst_drop = worst_drop.max((v - g.value) / se.hypot(g.stderr));
            }
            prev = Some((g.value, g.stderr));
            last = g.value;
        }
        let w = ScalarField::product(&eta.to_field(), &u);
        let full = match gagliardo_energy_rn(&w, &p, 2.0, &spec) {
            Ok(f) => f.value,
            Err(e) => return outcome(false, format!("{name}: seminorm: {e}")),
        };
        worst_gap = worst_gap.max(rel(last, full));
    }
    outcome(
        worst_drop <= 3.0 && worst_gap <= 0.05,
        format!(
            "largest decrease {worst_drop:.2}σ (tol 3σ), largest gap at τ = 0.05 {:.2}% (tol 5%)",
            100.0 * worst_gap
        ),
    )
}

fn crit_poisson_constant() -> Outcome {
    let rho = 0.5;
    let pts = [
        [0.0, 0.0],
        [0.1, 0.0],
        [0.0, -0.2],
        [0.15, 0.15],
        [-0.3, 0.1],
        [0.25, -0.25],
        [0.4, 0.0],
        [0.0, 0.45],
        [-0.45 * 0.6, -0.45 * 0.8],
        [0.45 / 2f64.sqrt(), 0.45 / 2f64.sqrt()],
    ];
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        let prob = BallProblem::new(rho, constant(1.0), p2(s), QuadratureSpec::default()).unwrap();
        for x in &pts {
            match solve_dirichlet(&prob, x) {
                Ok(u) => worst = worst.max((u.value - 1.0).abs()),
                Err(e) => return outcome(false, format!("s = {s}, x = {x:?}: {e}")),
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("worst |u_h - 1| {worst:.1e} at 10 points × 3 s, up to |x| = 0.9ρ (tol 1e-4)"),
    )
}

fn crit_wos() -> Outcome {
    let p = p2(0.5);
    let rho = 0.6;
    let x = [0.2, -0.1];
    let mut worst = 0.0f64;
    for name in [
        "gaussian",
        "bump(1)",
        "holder-cusp(0.5)",
        "getoor",
        "halfspace-indicator",
    ] {
        let prob = BallProblem::new(
            rho,
            preset_field(name).unwrap(),
            p,
            QuadratureSpec::default(),
        )
        .unwrap();
        let q = solve_dirichlet(&prob, &x);
        let m = wos_solve(&prob, &x, 1_000_000, 2024);
        match (q, m) {
            (Ok(q), Ok(m)) => {
                worst = worst.max((q.value - m.mean).abs() / m.stderr.hypot(q.err_est))
            }
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("{name}: {e}")),
        }
    }
    let prob = BallProblem::new(
        rho,
        preset_field("halfspace-indicator").unwrap(),
        p,
        QuadratureSpec::default(),
    )
    .unwrap();
    let (q, m) = match (
        solve_dirichlet(&prob, &[0.0, 0.0]),
        wos_solve(&prob, &[0.0, 0.0], 1_000_000, 2025),
    ) {
        (Ok(q), Ok(m)) => (q, m),
        (Err(e), _) | (_, Err(e)) => {
            return outcome(false, format!("half-space at the center: {e}"))
        }
    };
    let sym_q = (q.value - 0.5).abs();
    let sym_m = (m.mean - 0.5).abs() / m.stderr;
    outcome(
        worst <= 3.0 && sym_q <= 1e-6 && sym_m <= 3.0,
        format!(
            "worst |quad - WoS|/σ {worst:.2} over 5 data (tol 3); half-space at center: quad |u - 1/2| {sym_q:.1e}, WoS {sym_m:.2}σ"
        ),
    )
}

fn crit_sharmonicity() -> Outcome {
    let p = p2(0.5);
    let rho = 0.75;
    let inner = QuadratureSpec::default().with_tolerance(1e-9, 1e-14);
    let outer = QuadratureSpec::default()
        .with_tolerance(1e-5, 1e-6)
        .with_angular(AngularRule::Fixed(32));
    let prob = BallProblem::new(rho, gaussian(), p, inner).unwrap();
    let pts = [
        [0.0, 0.0],
        [0.3, 0.2],
        [-0.1, 0.45],
        [-0.35, -0.35],
        [0.6, 0.0],
    ];
    let mut worst = 0.0f64;
    let mut sup = 0.0f64;
    for x in &pts {
        match (
            sharmonicity_residual(&prob, x, &outer),
            solve_dirichlet(&prob, x),
        ) {
            (Ok(r), Ok(u)) => {
                worst = worst.max(r.value.abs());
                sup = sup.max(u.value.abs());
            }
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("x = {x:?}: {e}")),
        }
    }
    let tol = 1e-3 * sup.max(1.0);
    outcome(
        worst <= tol,
        format!("worst |(-Δ)^s u_h| {worst:.1e} at 5 points, |x| ≤ 0.8ρ (tol {tol:.1e})"),
    )
}

fn crit_holder_transfer() -> Outcome {
    let spec = QuadratureSpec::default().with_tolerance(1e-6, 1e-10);
    let eta = make_cutoff(0.1).unwrap();
    let eta_field = eta.to_field();
    let g = bump(1.0);
    let mut lines = Vec::new();
    let mut pass = true;
    for (alpha, s) in [(0.4, 0.25), (0.8, 0.5), (0.9, 0.75)] {
        let p = p2(s);
        let ex = holder_transfer_exponents(alpha, s).unwrap();
        let f = holder_cusp(alpha);
        let is = |x: &[f64]| {
            carre_du_champ(&f, &g, x, &p, &spec)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        };
        let eis = |x: &[f64]| {
            let e = eta.eval(x);
            if e == 0.0 {
                return 0.0;
            }
            e * carre_du_champ(&eta_field, &f, x, &p, &spec)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        };
        let (a, b) = match (
            holder_exponent_estimate(&is, 2, 0.5, 480, 7),
            holder_exponent_estimate(&eis, 2, 0.5, 480, 7),
        ) {
            (Ok(a), Ok(b)) => (a.exponent, b.exponent),
            (Err(e), _) | (_, Err(e)) => {
                return outcome(false, format!("(α, s) = ({alpha}, {s}): {e}"))
            }
        };
        pass &= a >= ex.gamma_is - 0.05 && b >= ex.gamma_eta - 0.05;
        lines.push(format!(
            "({alpha},{s}): {a:.2} ≥ {:.2}, {b:.2} ≥ {:.2}",
            ex.gamma_is - 0.05,
            ex.gamma_eta - 0.05
        ));
    }
    outcome(pass, lines.join("; "))
}

fn crit_analyticity() -> Outcome {
    let radii = analyticity_radii(0.4).unwrap();
    let spec = QuadratureSpec::default().with_tolerance(1e-8, 1e-14);
    let prob = BallProblem::new(radii.outer, gaussian(), p2(0.5), spec).unwrap();
    match factorial_growth(&prob, radii.inner, &[1, 2, 3, 4], &spec) {
        Ok(fit) => outcome(
            fit.max_residual <= 0.2,
            format!(
                "slope {:.3}, max fit residual {:.3} log units (tol 0.2), ρ = {}, r₀ = {}",
                fit.slope, fit.max_residual, radii.outer, radii.inner
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn crit_closed_norms() -> Outcome {
    let p = p2(0.5);
    let spec = QuadratureSpec::default();
    let one = constant(1.0);
    let mut worst = 0.0f64;
    for (x0, r) in [([0.0, 0.0], 0.3), ([0.2, -0.4], 1.0), ([1.0, 2.0], 5.0)] {
        match nonlocal_tail(&one, &x0, r, &p, &spec) {
            Ok(t) => worst = worst.max((t.value - 2.0 * PI).abs()),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let exact = 4.0 * PI * PI / (3.0 * 3f64.sqrt());
    let n = match weighted_l1s_norm(&one, &p, &spec) {
        Ok(n) => (n.value - exact).abs(),
        Err(e) => return outcome(false, e.to_string()),
    };
    outcome(
        worst <= 1e-6 && n <= 1e-4,
        format!("|Tail - 2π| {worst:.1e} (tol 1e-6), |‖1‖ - 4π²/(3√3)| {n:.1e} (tol 1e-4)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        (
            "normalization constant",
            Duration::from_millis(1),
            crit_normalization,
        ),
        (
            "Gaussian Fourier oracle",
            Duration::from_secs(10),
            crit_gaussian_oracle,
        ),
        ("Leibniz identity", Duration::from_secs(60), crit_leibniz),
        (
            "polarization identity",
            Duration::from_secs(120),
            crit_polarization,
        ),
        (
            "Gagliardo limit",
            Duration::from_secs(300),
            crit_gagliardo_limit,
        ),
        (
            "Poisson constant datum",
            Duration::from_secs(30),
            crit_poisson_constant,
        ),
        (
            "quadrature vs walk-on-spheres",
            Duration::from_secs(120),
            crit_wos,
        ),
        (
            "s-harmonicity of u_h",
            Duration::from_secs(300),
            crit_sharmonicity,
        ),
        (
            "Hölder transfer",
            Duration::from_secs(300),
            crit_holder_transfer,
        ),
        (
            "analyticity growth",
            Duration::from_secs(300),
            crit_analyticity,
        ),
        (
            "closed-form norms",
            Duration::from_secs(5),
            crit_closed_norms,
        ),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let took = t.elapsed();
        let pass = o.pass && took <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  {}  [{:.3?} of {:?}]",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took,
            budget
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
