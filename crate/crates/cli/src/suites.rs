//! Suite runner. Each suite expands its configuration into independent
//! tasks; tasks run concurrently and the report is sorted by record id.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use anyhow::Result;
use fraclap_core::norms::{
    gagliardo_energy_rn, holder_exponent_estimate, nonlocal_tail, weighted_l1s_norm,
};
use fraclap_core::ops::{
    carre_du_champ, gagliardo_functional, leibniz_residual, polarization_check,
};
use fraclap_core::params::sphere_area;
use fraclap_core::poisson::{analyticity_radii, factorial_growth, wos_solve};
use fraclap_core::presets::{constant, holder_cusp};
use fraclap_core::{
    holder_transfer_exponents, make_cutoff, preset_field, solve_dirichlet, BallProblem, FracParams,
    RadialCutoff, ScalarField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Suite, SuiteConfig};
use crate::report::{Measured, Record, Report};

type Outcomes = Vec<(String, Value, Measured)>;

struct Task {
    id: String,
    inputs: Value,
    run: Box<dyn Fn() -> fraclap_core::Result<Outcomes> + Send + Sync>,
}

impl Task {
    fn new(
        id: String,
        inputs: Value,
        run: impl Fn() -> fraclap_core::Result<Outcomes> + Send + Sync + 'static,
    ) -> Self {
        Task {
            id,
            inputs,
            run: Box::new(run),
        }
    }

    /// A task with a single outcome and no sub-id.
    fn single(
        id: String,
        inputs: Value,
        run: impl Fn() -> fraclap_core::Result<Measured> + Send + Sync + 'static,
    ) -> Self {
        Task::new(id, inputs, move || {
            Ok(vec![(String::new(), Value::Null, run()?)])
        })
    }

    fn execute(&self, suite: &str) -> Vec<Record> {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| (self.run)()));
        let ms = t.elapsed().as_secs_f64() * 1e3;
        let mut records = match out {
            Ok(Ok(list)) => list
                .into_iter()
                .map(|(sub, extra, m)| {
                    let id = if sub.is_empty() {
                        self.id.clone()
                    } else {
                        format!("{}/{sub}", self.id)
                    };
                    let mut inputs = self.inputs.clone();
                    if let (Value::Object(a), Value::Object(b)) = (&mut inputs, extra) {
                        a.extend(b);
                    }
                    Record::measured(id, suite, inputs, m)
                })
                .collect(),
            Ok(Err(e)) => vec![Record::failed(
                self.id.clone(),
                suite,
                self.inputs.clone(),
                e.to_string(),
            )],
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                vec![Record::failed(
                    self.id.clone(),
                    suite,
                    self.inputs.clone(),
                    format!("panic: {msg}"),
                )]
            }
        };
        for r in &mut records {
            r.ms = ms;
        }
        records
    }
}

/// Runs the configured suite. Only an invalid configuration is an error;
/// numerical failures become failed records.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    let tasks = match config.suite {
        Suite::Leibniz => leibniz(config),
        Suite::Polarization => polarization(config),
        Suite::GagliardoLimit => gagliardo_limit(config),
        Suite::HolderTransfer => holder_transfer(config),
        Suite::Poisson => poisson(config),
        Suite::Analyticity => analyticity(config),
        Suite::Norms => norms(config),
    }?;
    let suite = config.suite.name();
    let records: Vec<Record> = tasks
        .par_iter()
        .flat_map_iter(|t| t.execute(suite))
        .collect();
    Ok(Report::new(config.clone(), records))
}

fn params(config: &SuiteConfig, s: f64) -> FracParams {
    // validated by SuiteConfig::validate
    FracParams::new(config.dim, s).expect("validated order")
}

fn field(name: &str) -> ScalarField {
    preset_field(name).expect("validated preset")
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|_| radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

fn leibniz(config: &SuiteConfig) -> Result<Vec<Task>> {
    let presets = config.presets();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<Vec<f64>> = (0..config.points)
        .map(|_| uniform_in_ball(&mut rng, config.dim, 1.2))
        .collect();
    let spec = config.quadrature();
    let tol = config.tolerance();
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for (k, x) in points.iter().enumerate() {
            let (f, g) = (field(&presets[0]), field(&presets[1]));
            let p = params(config, s);
            let x = x.clone();
            let inputs = json!({ "s": s, "f": presets[0], "g": presets[1], "x": x });
            tasks.push(Task::single(
                format!("leibniz/s={s}/p{k:03}"),
                inputs,
                move || {
                    let c = leibniz_residual(&f, &g, &x, &p, &spec)?;
                    Ok(Measured::two_sided(
                        c.residual,
                        0.0,
                        c.err_est,
                        tol * c.scale,
                    ))
                },
            ));
        }
    }
    Ok(tasks)
}

fn polarization(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let sigmas = config.tolerance();
    let eta = make_cutoff(config.delta)?;
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for name in config.presets() {
            for tau in config.taus() {
                let u = field(&name);
                let p = params(config, s);
                let cut = RadialCutoff::new(tau)?;
                let inputs = json!({ "s": s, "preset": name, "tau": tau, "delta": config.delta });
                tasks.push(Task::single(
                    format!("polarization/s={s}/{name}/tau={tau}"),
                    inputs,
                    move || {
                        let c = polarization_check(&u, &eta, &cut, &p, &spec)?;
                        Ok(Measured::two_sided(
                            c.lhs,
                            c.half_g,
                            c.combined_stderr,
                            sigmas * c.combined_stderr,
                        ))
                    },
                ));
            }
        }
    }
    Ok(tasks)
}

fn gagliardo_limit(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let gap = config.tolerance();
    let sigmas = config.sigmas;
    let eta = make_cutoff(config.delta)?;
    let mut taus = config.taus();
    taus.sort_by(|a, b| b.total_cmp(a));
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for name in config.presets() {
            let u = field(&name);
            let p = params(config, s);
            let taus = taus.clone();
            let inputs = json!({ "s": s, "preset": name, "delta": config.delta });
            tasks.push(Task::new(
                format!("gagliardo-limit/s={s}/{name}"),
                inputs,
                move || {
                    let mut out = Vec::new();
                    let mut prev: Option<(f64, f64)> = None;
                    let mut last = None;
                    for &tau in &taus {
                        let g =
                            gagliardo_functional(&u, &eta, &RadialCutoff::new(tau)?, &p, &spec)?;
                        if let Some((v, se)) = prev {
                            let sigma = se.hypot(g.stderr);
                            let m = Measured::lower_bound(g.value, v, sigma, sigmas * sigma);
                            out.push((format!("monotone/tau={tau}"), json!({ "tau": tau }), m));
                        }
                        prev = Some((g.value, g.stderr));
                        last = Some((tau, g));
                    }
                    if let Some((tau, g)) = last {
                        let w = ScalarField::product(&eta.to_field(), &u);
                        let full = gagliardo_energy_rn(&w, &p, 2.0, &spec)?;
                        let m = Measured::two_sided(
                            g.value,
                            full.value,
                            g.stderr.hypot(full.stderr),
                            gap * full.value,
                        );
                        out.push(("limit".into(), json!({ "tau": tau }), m));
                    }
                    Ok(out)
                },
            ));
        }
    }
    Ok(tasks)
}

fn holder_transfer(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let slack = config.tolerance();
    let eta = make_cutoff(config.delta)?;
    let g_name = config.presets()[0].clone();
    let (dim, seed) = (config.dim, config.seed);
    let mut tasks = Vec::new();
    for (alpha, s) in config.holder_pairs() {
        let ex = holder_transfer_exponents(alpha, s)?;
        let p = params(config, s);
        let (f, g) = (holder_cusp(alpha), field(&g_name));
        let inputs = json!({ "alpha": alpha, "s": s, "g": g_name, "delta": config.delta });
        tasks.push(Task::new(
            format!("holder-transfer/alpha={alpha}/s={s}"),
            inputs,
            move || {
                let eta_field = eta.to_field();
                let is = |x: &[f64]| {
                    carre_du_champ(&f, &g, x, &p, &spec)
                        .map(|r| r.value)
                        .unwrap_or(f64::NAN)
                };
                let eta_is = |x: &[f64]| {
                    let e = eta.eval(x);
                    if e == 0.0 {
                        return 0.0;
                    }
                    e * carre_du_champ(&eta_field, &f, x, &p, &spec)
                        .map(|r| r.value)
                        .unwrap_or(f64::NAN)
                };
                let a = holder_exponent_estimate(&is, dim, 0.5, 480, seed)?;
                let b = holder_exponent_estimate(&eta_is, dim, 0.5, 480, seed)?;
                Ok(vec![
                    (
                        "carre-du-champ".into(),
                        Value::Null,
                        Measured::lower_bound(a.exponent, ex.gamma_is, a.fit_err, slack),
                    ),
                    (
                        "eta-weighted".into(),
                        Value::Null,
                        Measured::lower_bound(b.exponent, ex.gamma_eta, b.fit_err, slack),
                    ),
                ])
            },
        ));
    }
    Ok(tasks)
}

/// Ten interior points of `B_ρ` in the `x₁x₂` plane, out to `|x| = 0.9ρ`.
fn poisson_points(dim: usize, rho: f64) -> Vec<Vec<f64>> {
    let polar = [
        (0.0, 0.0),
        (0.2, 0.0),
        (0.4, -0.5 * PI),
        (0.42, 0.25 * PI),
        (0.63, 2.82),
        (0.7, -0.25 * PI),
        (0.8, 0.0),
        (0.9, 0.5 * PI),
        (0.9, 4.07),
        (0.9, 0.25 * PI),
    ];
    polar
        .iter()
        .map(|&(r, a)| {
            let mut x = vec![0.0; dim];
            x[0] = rho * r * f64::cos(a);
            x[1] = rho * r * f64::sin(a);
            x
        })
        .collect()
}

fn poisson(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let tol = config.tolerance();
    let (sigmas, n, seed) = (config.sigmas, config.wos_samples, config.seed);
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for name in config.presets() {
            let prob = BallProblem::new(config.rho, field(&name), params(config, s), spec)?;
            for (k, x) in poisson_points(config.dim, config.rho)
                .into_iter()
                .enumerate()
            {
                let prob = prob.clone();
                let exact = name == "constant";
                let inputs = json!({ "s": s, "preset": name, "rho": config.rho, "x": x });
                tasks.push(Task::single(
                    format!("poisson/s={s}/{name}/p{k:02}"),
                    inputs,
                    move || {
                        let u = solve_dirichlet(&prob, &x)?;
                        if exact {
                            return Ok(Measured::two_sided(u.value, 1.0, u.err_est, tol));
                        }
                        let w = wos_solve(&prob, &x, n, seed.wrapping_add(k as u64))?;
                        let sigma = w.stderr.hypot(u.err_est);
                        Ok(Measured::two_sided(u.value, w.mean, sigma, sigmas * sigma))
                    },
                ));
            }
        }
    }
    Ok(tasks)
}

fn analyticity(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let tol = config.tolerance();
    let radii = analyticity_radii(config.analyticity_delta)?;
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for name in config.presets() {
            let prob = BallProblem::new(radii.outer, field(&name), params(config, s), spec)?;
            let inputs = json!({ "s": s, "preset": name, "rho": radii.outer, "r0": radii.inner, "orders": [1, 2, 3, 4] });
            tasks.push(Task::single(
                format!("analyticity/s={s}/{name}"),
                inputs,
                move || {
                    let fit = factorial_growth(&prob, radii.inner, &[1, 2, 3, 4], &spec)?;
                    Ok(Measured::two_sided(
                        fit.max_residual,
                        0.0,
                        fit.worst_rel_err,
                        tol,
                    ))
                },
            ));
        }
    }
    Ok(tasks)
}

/// `∫ |y|^{N-1} ω / (1 + |y|^{N+2s}) d|y|` in closed form.
fn weighted_norm_of_one(dim: usize, s: f64) -> f64 {
    let k = dim as f64 + 2.0 * s;
    sphere_area(dim) * PI / (k * (PI * dim as f64 / k).sin())
}

fn norms(config: &SuiteConfig) -> Result<Vec<Task>> {
    let spec = config.quadrature();
    let tol = config.tolerance();
    let dim = config.dim;
    let mut tasks = Vec::new();
    for &s in &config.orders {
        for (k, radius) in [0.3, 1.0, 5.0].into_iter().enumerate() {
            let p = params(config, s);
            let mut x0 = vec![0.0; dim];
            x0[0] = 0.2 * k as f64;
            x0[1] = -0.4 * k as f64;
            let inputs = json!({ "s": s, "x0": x0, "radius": radius });
            tasks.push(Task::single(
                format!("norms/s={s}/tail/R={radius}"),
                inputs,
                move || {
                    let t = nonlocal_tail(&constant(1.0), &x0, radius, &p, &spec)?;
                    Ok(Measured::two_sided(
                        t.value,
                        sphere_area(dim) / (2.0 * s),
                        t.stderr,
                        tol,
                    ))
                },
            ));
        }
        let p = params(config, s);
        tasks.push(Task::single(
            format!("norms/s={s}/weighted-l1"),
            json!({ "s": s }),
            move || {
                let n = weighted_l1s_norm(&constant(1.0), &p, &spec)?;
                Ok(Measured::two_sided(
                    n.value,
                    weighted_norm_of_one(dim, s),
                    n.stderr,
                    tol,
                ))
            },
        ));
    }
    Ok(tasks)
}
