//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p hnls-core --test acceptance -- --nocapture`.

use std::time::Instant;

use num_complex::Complex;

use hnls_core::boundary::{
    build_j_plus, calibrate_lambda0, find_root, frequency_split, WindowedSignal,
};
use hnls_core::cutoff::CutoffEta;
use hnls_core::diagnostics::{
    damped_wave_family, energy_identity_residual_nl, interpolation_probe, Coefficients,
};
use hnls_core::experiment::{
    continuous_dependence_experiment, ratio_spread, PerturbationFamily,
};
use hnls_core::galerkin::{
    build_basis, galerkin_solve, mass_identity_residual, sup_norm_vs_source_bound, BasisVariant,
};
use hnls_core::grid::{GridFunction, HalfLineGrid};
use hnls_core::nonlin::{solve_hnls, FixedPointOptions, RegularizedNonlinearity};
use hnls_core::problem::{BoundarySignal, ProblemSpec, SourceTerm};
use hnls_core::scenario::{build_problem, run_scenario, ScenarioConfig};
use hnls_core::weight::WeightSpec;
use hnls_core::C64;

fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion:2}: {verdict} — {detail}");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// 1. Full-line L2 conservation at spectral resolution.
#[test]
fn criterion_01_fullline_l2_conservation() {
    let start = Instant::now();
    let config = ScenarioConfig::preset("fullline-conservation").unwrap();
    let record = run_scenario::<f64>(&config).unwrap();
    // e_ident is the relative drift of ||u||^2 for spectral runs
    let drift = record
        .csv_rows
        .iter()
        .fold(0.0f64, |acc, row| acc.max(row.e_ident.abs()));
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        drift < 1e-10 && elapsed < 5.0,
        &format!("max relative drift of ||u||^2 = {drift:.3e} (< 1e-10), {elapsed:.2}s (< 5s)"),
    );
}

/// 2. Half-line L2 balance residual refines at order >= 1.8 from N = 512
///    to N = 2048.
#[test]
fn criterion_02_halfline_l2_balance_order() {
    let start = Instant::now();
    let mut residuals = Vec::new();
    for level in 0..3 {
        let n = 512usize << level;
        let m = 128usize << level;
        let text = format!(
            "name = balance\nsolver = fd\na = 1.0\nb = 2.0\n\
             grid.L = 20.0\ngrid.N = {n}\ngrid.T = 0.5\ngrid.M = {m}\n\
             initial.kind = gaussian\ninitial.center = 6.0\ninitial.width = 1.0\n\
             diagnostics = l2_balance\n"
        );
        let config = ScenarioConfig::parse(&text).unwrap();
        let record = run_scenario::<f64>(&config).unwrap();
        residuals.push(record.max_residual);
    }
    let o1 = (residuals[0] / residuals[1]).log2();
    let o2 = (residuals[1] / residuals[2]).log2();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        o1 >= 1.8 && o2 >= 1.8 && elapsed < 120.0,
        &format!(
            "balance residuals {residuals:.3e?}, orders {o1:.2} / {o2:.2} (>= 1.8), {elapsed:.1}s (< 2min)"
        ),
    );
}

fn energy_run(n: usize, gamma: f64, beta: f64, p: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let m = n / 32;
    let grid = HalfLineGrid::new(20.0, n, 0.25, m).unwrap();
    let spec = ProblemSpec {
        a: 1.0,
        b: 0.0,
        lambda: 1.0,
        beta,
        gamma,
        p,
        u0: GridFunction::from_fn(grid, |x: f64| {
            Complex::new(1.5 * (-((x - 10.0) / 1.5).powi(2)).exp(), 0.0)
        }),
        mu: BoundarySignal::Zero,
        f: SourceTerm::Zero,
    };
    let reg = RegularizedNonlinearity::new(0.25, p).unwrap();
    let run = solve_hnls(&spec, &reg, &WeightSpec::one(), &FixedPointOptions::default()).unwrap();
    let coeffs = Coefficients { a: 1.0, b: 0.0, lambda: 1.0, beta, gamma, p };
    let series = energy_identity_residual_nl(&run.history, &coeffs).unwrap();
    (series.de_dt, series.gamma_term, series.imag_defect)
}

fn interior_max(series: &[f64]) -> f64 {
    series[1..series.len() - 1].iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// 3. Energy identity: conserved when gamma = 0 or p = 2, and the gamma
///    obstruction term accounts for dE/dt when (gamma, p) = (1, 1).
#[test]
fn criterion_03_energy_identity_obstruction() {
    // (gamma = 0, p = 1) and (gamma = 1, p = 2): |dE/dt| -> 0 under refinement
    let mut shrinking = true;
    let mut details = String::new();
    for (gamma, beta, p, label) in
        [(0.0, 1.0, 1.0, "gamma=0,p=1"), (1.0, 0.0, 2.0, "gamma=1,p=2")]
    {
        let (coarse, _, _) = energy_run(1024, gamma, beta, p);
        let (fine, _, _) = energy_run(2048, gamma, beta, p);
        let (c, f) = (interior_max(&coarse), interior_max(&fine));
        shrinking &= f < 0.5 * c;
        details.push_str(&format!("{label}: |dE/dt| {c:.2e} -> {f:.2e}; "));
    }

    // (gamma = 1, p = 1): dE/dt tracks the obstruction term within 5%
    let (de_dt, gamma_term, imag_defect) = energy_run(2048, 1.0, 0.0, 1.0);
    let lo = de_dt.len() / 4;
    let hi = 3 * de_dt.len() / 4;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in lo..hi {
        num += (de_dt[k] - gamma_term[k]).powi(2);
        den += gamma_term[k].powi(2);
    }
    let rel = (num / den).sqrt();
    details.push_str(&format!(
        "gamma=1,p=1: relative mismatch {rel:.3} (< 0.05), imag defect {imag_defect:.1e}"
    ));
    report(3, shrinking && rel < 0.05 && imag_defect < 1e-10, &details);
}

/// 4. Characteristic cubic: closed-form roots at a = b = 0, lambda = +-8,
///    and residual/decay margins over 100 random coefficient draws.
#[test]
fn criterion_04_characteristic_root() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let sqrt3 = 3.0f64.sqrt();
    let plus = find_root(8.0, 0.0, 0.0).unwrap();
    let minus = find_root(-8.0, 0.0, 0.0).unwrap();
    let closed_form = (plus.r0 - C64::new(-sqrt3, -1.0)).norm() < 1e-12
        && (minus.r0 - C64::new(-sqrt3, 1.0)).norm() < 1e-12;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut worst_residual = 0.0f64;
    let mut margin_ok = true;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let cal = calibrate_lambda0(a, b).unwrap();
        let lam = rng.gen_range(cal.lambda0..100.0 * cal.lambda0)
            * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let root = find_root(lam, a, b).unwrap();
        worst_residual = worst_residual.max(root.residual);
        margin_ok &= root.r0.re <= -2.0 * cal.eps * lam.abs().powf(1.0 / 3.0) + 1e-12;
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        closed_form && worst_residual < 1e-10 && margin_ok && elapsed < 1.0,
        &format!(
            "closed form ok, worst residual {worst_residual:.2e} (< 1e-10), decay margins hold, {elapsed:.2}s (< 1s)"
        ),
    );
}

/// 5. Boundary potential: trace J+(t,0) = mu1(t) and spectral PDE residual
///    below 1e-8 for a band-limited signal.
#[test]
fn criterion_05_boundary_potential_trace() {
    let (a, b) = (1.0f64, 0.5);
    let grid = HalfLineGrid::new(10.0, 256, 1.0, 64).unwrap();
    let cal = calibrate_lambda0(a, b).unwrap();
    let period = 2.0 * grid.horizon;
    let mu = BoundarySignal::Modes {
        period,
        modes: vec![
            (5, C64::new(0.8, 0.1)),
            (-7, C64::new(0.3, -0.5)),
            (11, C64::new(0.0, 0.4)),
        ],
    };
    let eta = CutoffEta::new();
    let win = WindowedSignal::from_signal(&mu, &grid, &eta);
    let split = frequency_split(&win, cal.lambda0);
    assert!(split.low.coeffs.iter().all(|c| c.norm() == 0.0), "modes must sit above lambda0");

    let xs: Vec<f64> = (0..=80).map(|j| j as f64 * 0.025).collect();
    let jp = build_j_plus(&split.high, &xs, a, b, cal.lambda0).unwrap();
    let mu_vals = split.high.values();
    let trace_err = jp
        .values
        .iter()
        .zip(&mu_vals)
        .fold(0.0f64, |acc, (row, mv)| acc.max((row[0] - mv).norm()));
    let pde = jp.pde_residual(&split.high, a, b);
    report(
        5,
        trace_err < 1e-8 && pde < 1e-8,
        &format!("max_t |J+(t,0) - mu1(t)| = {trace_err:.2e} (< 1e-8), PDE residual {pde:.2e} (< 1e-8)"),
    );
}

/// 6. Manufactured nonlinear solution (p = 1, gamma = 0, mu != 0 via the
///    lifting): order >= 1.8 over three refinements, <= 6 fixed-point
///    iterations per step at dt = dx.
#[test]
fn criterion_06_manufactured_nonlinear_convergence() {
    let start = Instant::now();
    let mut config = ScenarioConfig::preset("nonlinear-sech").unwrap();
    let exact = hnls_core::scenario::manufactured_solution::<f64>(&config).unwrap();
    let mut errors = Vec::new();
    let mut max_iters = 0usize;
    for _ in 0..3 {
        let record = run_scenario::<f64>(&config).unwrap();
        let grid = record.history.grid;
        let last = record.history.slices.last().unwrap();
        let t_end = grid.t(record.history.len() - 1);
        let mut err = 0.0f64;
        for j in 0..grid.n_nodes() {
            err = err.max((last[j] - exact(t_end, grid.x(j))).norm());
        }
        errors.push(err);
        max_iters = max_iters.max(*record.step_log.iterations.iter().max().unwrap());
        config = config.refined();
    }
    let o1 = (errors[0] / errors[1]).log2();
    let o2 = (errors[1] / errors[2]).log2();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        6,
        o1 >= 1.8 && o2 >= 1.8 && max_iters <= 6 && elapsed < 300.0,
        &format!(
            "errors {errors:.3e?}, orders {o1:.2} / {o2:.2} (>= 1.8), max iterations {max_iters} (<= 6), {elapsed:.1}s (< 5min)"
        ),
    );
}

/// 7. Galerkin mass identity at k = 8 over [0, 1] below 1e-8, and the
///    sup-norm bound by the source L1 norm.
#[test]
fn criterion_07_galerkin_identity_and_bound() {
    let basis = build_basis::<f64>(8, BasisVariant::TwoCondition).unwrap();
    let grid = HalfLineGrid::new(40.0, 1024, 1.0, 8).unwrap();
    let hist = galerkin_solve(
        &basis,
        1.0,
        0.5,
        |t: f64| {
            GridFunction::from_fn(grid, move |x| {
                Complex::from_polar(x * x * (-x).exp() * (1.0 + 0.5 * t), 2.0 * t + 0.3 * x)
            })
        },
        &grid,
        1.0,
        1000,
    )
    .unwrap();
    let res = mass_identity_residual(&basis, &hist);
    let max_res = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (sup, bound) = sup_norm_vs_source_bound(&basis, &hist);
    report(
        7,
        max_res < 1e-8 && sup <= bound * (1.0 + 1e-9),
        &format!(
            "mass identity residual {max_res:.2e} (< 1e-8), sup ||V_k|| = {sup:.4} <= {bound:.4} = int ||F|| dt"
        ),
    );
}

/// 8. Continuous dependence (p = 1, psi = e^x): solution/data distance
///    ratios vary by less than a factor 5 across eps in {1e-1, 1e-2, 1e-3}
///    for u0, mu, f perturbations separately.
#[test]
fn criterion_08_continuous_dependence() {
    let start = Instant::now();
    let config = ScenarioConfig::preset("depend-base").unwrap();
    let base = build_problem::<f64>(&config).unwrap();
    let w = WeightSpec::exponential(0.5f64); // psi = e^x
    let reg = RegularizedNonlinearity::new(config.reg_h, config.p).unwrap();
    let families = [
        PerturbationFamily::InitialData,
        PerturbationFamily::BoundaryData,
        PerturbationFamily::Source,
    ];
    let rows = continuous_dependence_experiment(
        &base,
        &families,
        &[1e-1, 1e-2, 1e-3],
        &w,
        &reg,
        &FixedPointOptions::default(),
    )
    .unwrap();
    let spreads: Vec<f64> = families.iter().map(|f| ratio_spread(&rows, *f)).collect();
    let per_run = start.elapsed().as_secs_f64() / 10.0;
    report(
        8,
        spreads.iter().all(|s| *s < 5.0) && per_run < 60.0,
        &format!(
            "ratio spreads u0/mu/f = {:.3}/{:.3}/{:.3} (< 5), {per_run:.2}s per run (< 1min)",
            spreads[0], spreads[1], spreads[2]
        ),
    );
}

/// 9. Interpolation probe: finite empirical constants for q in {4, inf},
///    stable under 2x grid refinement within 10%.
#[test]
fn criterion_09_interpolation_probe() {
    let psi1 = WeightSpec::exponential(0.5f64); // psi1 = e^x
    let psi2 = WeightSpec::one();
    let mut ok = true;
    let mut details = String::new();
    for q in [4.0, f64::INFINITY] {
        let mut ratios = Vec::new();
        for &n in &[1024usize, 2048] {
            let xs: Vec<f64> = (0..=n).map(|j| j as f64 * 30.0 / n as f64).collect();
            let family = damped_wave_family(42, 100, &xs);
            ratios.push(interpolation_probe(&family, &xs, &psi1, &psi2, q).unwrap());
        }
        let change = (ratios[0] - ratios[1]).abs() / ratios[1];
        ok &= ratios.iter().all(|r| r.is_finite() && *r > 0.0) && change < 0.10;
        details.push_str(&format!(
            "q={}: ratio {:.4}, refinement change {:.2}%; ",
            if q.is_infinite() { "inf".into() } else { format!("{q}") },
            ratios[1],
            100.0 * change
        ));
    }
    report(9, ok, &details);
}

/// 10. Regularization inactivity: with max |u| < 1/h throughout, halving h
///     changes the final slice by < 1e-10 in the weighted norm.
#[test]
fn criterion_10_regularization_inactivity() {
    let grid = HalfLineGrid::new(12.0, 256, 0.5, 32).unwrap();
    let u0 = GridFunction::from_fn(grid, |x: f64| {
        Complex::new(0.8 * (-((x - 4.0) / 1.5).powi(2)).exp(), 0.0)
    });
    let spec = ProblemSpec {
        a: 1.0,
        b: 0.0,
        lambda: 1.0,
        beta: 0.5,
        gamma: 0.0,
        p: 1.0,
        u0,
        mu: BoundarySignal::Zero,
        f: SourceTerm::Zero,
    };
    let w = WeightSpec::exponential(0.25f64);
    let opts = FixedPointOptions::default();
    let run_h = solve_hnls(
        &spec,
        &RegularizedNonlinearity::new(0.5, 1.0).unwrap(),
        &w,
        &opts,
    )
    .unwrap();
    let run_h2 = solve_hnls(
        &spec,
        &RegularizedNonlinearity::new(0.25, 1.0).unwrap(),
        &w,
        &opts,
    )
    .unwrap();
    let inactive = run_h.log.regularization_active.iter().all(|f| !f);
    let diff = GridFunction::new(
        grid,
        run_h
            .history
            .slices
            .last()
            .unwrap()
            .iter()
            .zip(run_h2.history.slices.last().unwrap())
            .map(|(x, y)| x - y)
            .collect(),
    )
    .unwrap();
    let dist = hnls_core::norms::weighted_l2_norm(&diff, &w).unwrap();
    report(
        10,
        inactive && dist < 1e-10,
        &format!("regularization inactive, weighted-norm change under h -> h/2 = {dist:.2e} (< 1e-10)"),
    );
}
