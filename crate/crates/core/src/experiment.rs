//! Continuous-dependence experiments: perturb one datum at a time, solve
//! both problems, and compare solution distance (discrete X^psi norm) to
//! data distance (weighted L2 for u0, discrete H^{1/3} for mu, weighted
//! L1-in-time for f). Lipschitz behavior shows as ratios that stay bounded
//! across the perturbation sweep.

use num_complex::Complex;

use crate::boundary::WindowedSignal;
use crate::cutoff::CutoffEta;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SolutionHistory};
use crate::nonlin::{solve_hnls, FixedPointOptions, RegularizedNonlinearity};
use crate::norms::{weighted_l2_norm, x_psi_norm};
use crate::problem::{BoundarySignal, ProblemSpec, SourceTerm};
use crate::scalar::{rl, Scalar};
use crate::weight::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationFamily {
    InitialData,
    BoundaryData,
    Source,
}

impl PerturbationFamily {
    pub fn label(&self) -> &'static str {
        match self {
            Self::InitialData => "u0",
            Self::BoundaryData => "mu",
            Self::Source => "f",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationRow<T: Scalar> {
    pub family: PerturbationFamily,
    pub epsilon: T,
    pub data_distance: T,
    pub solution_distance: T,
    pub ratio: T,
}

/// Fixed perturbation shapes: eps e^{-x} on u0, eps times one high window
/// mode on mu, eps e^{-x} cos(2t) on f. Deterministic by construction.
fn perturbed_spec<T: Scalar>(
    base: &ProblemSpec<T>,
    family: PerturbationFamily,
    eps: T,
) -> Result<ProblemSpec<T>> {
    let mut spec = base.clone();
    let grid = base.u0.grid;
    match family {
        PerturbationFamily::InitialData => {
            let values = (0..grid.n_nodes())
                .map(|j| base.u0.values[j] + Complex::new(eps * (-grid.x(j)).exp(), T::zero()))
                .collect();
            spec.u0 = GridFunction::new(grid, values)?;
        }
        PerturbationFamily::BoundaryData => {
            let period = rl::<T>(2.0) * grid.horizon;
            let mode = (5, Complex::new(eps, T::zero()));
            spec.mu = match &base.mu {
                BoundarySignal::Zero => {
                    BoundarySignal::Modes { period, modes: vec![mode] }
                }
                BoundarySignal::Modes { period: p, modes } if (*p - period).abs() < rl::<T>(1e-12) => {
                    let mut m = modes.clone();
                    m.push(mode);
                    BoundarySignal::Modes { period, modes: m }
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "boundary perturbations need a zero or window-periodic base signal".into(),
                    ))
                }
            };
        }
        PerturbationFamily::Source => {
            let base_f = base.f.clone();
            spec.f = SourceTerm::analytic(move |t: T, x: T| {
                let add = Complex::new(eps * (-x).exp() * (rl::<T>(2.0) * t).cos(), T::zero());
                match &base_f {
                    SourceTerm::Zero => add,
                    SourceTerm::Analytic(f) => f(t, x) + add,
                    SourceTerm::Samples { .. } => add, // guarded below
                }
            });
            if matches!(base.f, SourceTerm::Samples { .. }) {
                return Err(Error::InvalidInput(
                    "source perturbations need a zero or analytic base source".into(),
                ));
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn data_distance<T: Scalar>(
    base: &ProblemSpec<T>,
    perturbed: &ProblemSpec<T>,
    w: &WeightSpec<T>,
) -> Result<T> {
    let grid = base.u0.grid;
    // weighted L2 of the initial-data difference
    let du0 = GridFunction::new(
        grid,
        base.u0
            .values
            .iter()
            .zip(&perturbed.u0.values)
            .map(|(a, b)| *b - *a)
            .collect(),
    )?;
    let d_init = weighted_l2_norm(&du0, w)?;

    // discrete H^{1/3} of the boundary difference on the window
    let eta = CutoffEta::new();
    let wb = WindowedSignal::from_signal(&base.mu, &grid, &eta);
    let wp = WindowedSignal::from_signal(&perturbed.mu, &grid, &eta);
    let diff = WindowedSignal {
        period: wb.period,
        coeffs: wb.coeffs.iter().zip(&wp.coeffs).map(|(a, b)| *b - *a).collect(),
    };
    let d_mu = diff.h_norm(rl::<T>(1.0 / 3.0));

    // weighted L1-in-time of the source difference
    let dt = grid.dt();
    let mut d_src = T::zero();
    for n_idx in 0..=grid.n_steps {
        let t = grid.t(n_idx);
        let fb = base.f.eval_slice(&grid, t);
        let fp = perturbed.f.eval_slice(&grid, t);
        let df = GridFunction::new(grid, fb.iter().zip(&fp).map(|(a, b)| *b - *a).collect())?;
        let w_t = if n_idx == 0 || n_idx == grid.n_steps { rl::<T>(0.5) } else { T::one() };
        d_src = d_src + w_t * weighted_l2_norm(&df, w)? * dt;
    }
    Ok(d_init + d_mu + d_src)
}

/// Solve base and perturbed problems, returning one table row per
/// (family, epsilon) pair.
pub fn continuous_dependence_experiment<T: Scalar>(
    base: &ProblemSpec<T>,
    families: &[PerturbationFamily],
    epsilons: &[T],
    w: &WeightSpec<T>,
    reg: &RegularizedNonlinearity<T>,
    opts: &FixedPointOptions<T>,
) -> Result<Vec<PerturbationRow<T>>> {
    base.validate()?;
    let base_run = solve_hnls(base, reg, w, opts)?;
    let mut rows = Vec::new();
    for &family in families {
        for &eps in epsilons {
            let spec = perturbed_spec(base, family, eps)?;
            let run = solve_hnls(&spec, reg, w, opts)?;
            let grid = base.u0.grid;
            let mut diff = SolutionHistory::new(grid);
            for (a, b) in base_run.history.slices.iter().zip(&run.history.slices) {
                diff.push(a.iter().zip(b).map(|(x, y)| *y - *x).collect());
            }
            let solution_distance = x_psi_norm(&diff, w);
            let dist = data_distance(base, &spec, w)?;
            if !(dist > T::zero()) {
                rows.push(PerturbationRow {
                    family,
                    epsilon: eps,
                    data_distance: dist,
                    solution_distance,
                    ratio: T::zero(),
                });
                continue;
            }
            rows.push(PerturbationRow {
                family,
                epsilon: eps,
                data_distance: dist,
                solution_distance,
                ratio: solution_distance / dist,
            });
        }
    }
    Ok(rows)
}

/// Max/min ratio within each family across the sweep; Lipschitz behavior
/// keeps this spread bounded.
pub fn ratio_spread<T: Scalar>(rows: &[PerturbationRow<T>], family: PerturbationFamily) -> T {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for row in rows.iter().filter(|r| r.family == family && r.ratio > T::zero()) {
        lo = lo.min(row.ratio);
        hi = hi.max(row.ratio);
    }
    if lo.is_finite() && lo > T::zero() {
        hi / lo
    } else {
        T::infinity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HalfLineGrid;
    use crate::scalar::cx;

    fn base_spec() -> ProblemSpec<f64> {
        let grid = HalfLineGrid::new(12.0, 192, 0.4, 24).unwrap();
        ProblemSpec {
            a: 1.0,
            b: 0.0,
            lambda: 1.0,
            beta: 0.5,
            gamma: 0.0,
            p: 1.0,
            u0: GridFunction::from_fn(grid, |x: f64| {
                cx(0.7 * (-((x - 4.0) / 1.5).powi(2)).exp(), 0.0)
            }),
            mu: BoundarySignal::Zero,
            f: SourceTerm::Zero,
        }
    }

    #[test]
    fn zero_perturbation_gives_zero_distance() {
        let base = base_spec();
        let w = WeightSpec::exponential(0.5f64);
        let reg = RegularizedNonlinearity::new(0.5, 1.0).unwrap();
        let rows = continuous_dependence_experiment(
            &base,
            &[PerturbationFamily::InitialData],
            &[0.0],
            &w,
            &reg,
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].data_distance, 0.0);
        assert_eq!(rows[0].solution_distance, 0.0);
    }

    #[test]
    fn initial_data_sweep_has_bounded_ratios() {
        let base = base_spec();
        let w = WeightSpec::exponential(0.5f64);
        let reg = RegularizedNonlinearity::new(0.5, 1.0).unwrap();
        let rows = continuous_dependence_experiment(
            &base,
            &[PerturbationFamily::InitialData],
            &[1e-1, 1e-2, 1e-3],
            &w,
            &reg,
            &FixedPointOptions::default(),
        )
        .unwrap();
        for row in &rows {
            assert!(row.ratio.is_finite() && row.ratio > 0.0, "{row:?}");
        }
        let spread = ratio_spread(&rows, PerturbationFamily::InitialData);
        assert!(spread < 5.0, "ratio spread {spread}: {rows:?}");
    }

    #[test]
    fn boundary_perturbation_respects_regime_gate() {
        let mut base = base_spec();
        base.p = 2.0;
        let w = WeightSpec::exponential(0.5f64);
        let reg = RegularizedNonlinearity::new(0.5, 2.0).unwrap();
        let err = continuous_dependence_experiment(
            &base,
            &[PerturbationFamily::BoundaryData],
            &[1e-2],
            &w,
            &reg,
            &FixedPointOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("p = 1"), "{err}");
    }
}
