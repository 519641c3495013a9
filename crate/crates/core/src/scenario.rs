//! Scenario orchestration: flat-file configuration, solve -> diagnose ->
//! report pipelines, and convergence-table generation. Fail-closed parsing:
//! unknown keys reject the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex;

use crate::diagnostics::{energy_identity_residual_nl, l2_balance_residual, Coefficients};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, HalfLineGrid, SolutionHistory};
use crate::nonlin::{solve_hnls, FixedPointOptions, RegularizedNonlinearity, StepLog};
use crate::norms::{l2_norm, l2_norm_periodic, weighted_l2_norm};
use crate::oracle::{solve_fullline_linear, PeriodicBox, SpectralBox};
use crate::problem::{BoundarySignal, ProblemSpec, SourceTerm};
use crate::report::{CsvRow, GridJson, ReportJson, SeriesJson, SummaryJson};
use crate::scalar::{rl, Scalar, C};
use crate::stencil::ux_at_left;
use crate::weight::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Crank–Nicolson half-line solver (linear or nonlinear)
    Fd,
    /// full-line spectral propagator on a periodic box (linear only)
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Zero,
    Gaussian,
    Sech,
    /// e^{i xi_k x} on the spectral box, mode index k
    PlaneWave,
    /// taken from the manufactured solution
    Manufactured,
    File,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Zero,
    BandLimited,
    SignalFile,
    Manufactured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Zero,
    ManufacturedLinear,
    ManufacturedSech,
    File,
}

/// Parsed scenario configuration; `raw` keeps the exact text for the audit
/// trail embedded in every run record.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub raw: String,
    pub name: String,
    pub solver: SolverKind,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    pub weight: String,
    pub grid_l: f64,
    pub grid_n: usize,
    pub grid_t: f64,
    pub grid_m: usize,
    pub reg_h: f64,
    pub boundary: BoundaryKind,
    pub boundary_modes: Vec<(i64, f64, f64)>,
    pub boundary_file: Option<PathBuf>,
    pub initial: InitialKind,
    pub initial_amplitude: f64,
    pub initial_center: f64,
    pub initial_width: f64,
    pub initial_mode: i64,
    pub initial_file: Option<PathBuf>,
    pub source: SourceKind,
    pub source_file: Option<PathBuf>,
    pub diagnostics: Vec<String>,
    pub output_dir: PathBuf,
    pub residual_threshold: Option<f64>,
}

const KNOWN_DIAGNOSTICS: &[&str] = &["l2_balance", "energy_nl", "sigma_plus"];

impl ScenarioConfig {
    pub fn parse(raw: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigRejected(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::ConfigRejected(format!("duplicate key {key:?}")));
            }
        }
        Self::from_map(raw.to_string(), map)
    }

    fn from_map(raw: String, mut map: BTreeMap<String, String>) -> Result<Self> {
        fn take(map: &mut BTreeMap<String, String>, key: &str) -> Option<String> {
            map.remove(key)
        }
        fn take_f64(map: &mut BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
            match take(map, key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::ConfigRejected(format!("bad number for {key}: {v:?}"))),
            }
        }
        fn take_usize(map: &mut BTreeMap<String, String>, key: &str) -> Result<usize> {
            match take(map, key) {
                None => Err(Error::ConfigRejected(format!("missing required key {key}"))),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::ConfigRejected(format!("bad integer for {key}: {v:?}"))),
            }
        }

        let name = take(&mut map, "name")
            .ok_or_else(|| Error::ConfigRejected("missing required key name".into()))?;
        let solver = match take(&mut map, "solver").as_deref() {
            None | Some("fd") => SolverKind::Fd,
            Some("spectral") => SolverKind::Spectral,
            Some(other) => {
                return Err(Error::ConfigRejected(format!("unknown solver {other:?}")))
            }
        };
        let a = take_f64(&mut map, "a", 0.0)?;
        let b = take_f64(&mut map, "b", 0.0)?;
        let lambda = take_f64(&mut map, "lambda", 0.0)?;
        let beta = take_f64(&mut map, "beta", 0.0)?;
        let gamma = take_f64(&mut map, "gamma", 0.0)?;
        let p = take_f64(&mut map, "p", 1.0)?;
        let weight = take(&mut map, "weight").unwrap_or_else(|| "one".into());
        let grid_l = take_f64(&mut map, "grid.L", f64::NAN)?;
        let grid_t = take_f64(&mut map, "grid.T", f64::NAN)?;
        if !grid_l.is_finite() || !grid_t.is_finite() {
            return Err(Error::ConfigRejected("grid.L and grid.T are required".into()));
        }
        let grid_n = take_usize(&mut map, "grid.N")?;
        let grid_m = take_usize(&mut map, "grid.M")?;
        let reg_h = take_f64(&mut map, "reg.h", 0.5)?;

        let boundary = match take(&mut map, "boundary.kind").as_deref() {
            None | Some("zero") => BoundaryKind::Zero,
            Some("band-limited") => BoundaryKind::BandLimited,
            Some("signal-file") => BoundaryKind::SignalFile,
            Some("manufactured") => BoundaryKind::Manufactured,
            Some(other) => {
                return Err(Error::ConfigRejected(format!("unknown boundary.kind {other:?}")))
            }
        };
        let mut boundary_modes = Vec::new();
        if let Some(spec) = take(&mut map, "boundary.modes") {
            for part in spec.split(',') {
                let fields: Vec<&str> = part.trim().split(':').collect();
                if fields.len() != 3 {
                    return Err(Error::ConfigRejected(format!(
                        "boundary.modes entries are k:re:im, got {part:?}"
                    )));
                }
                let k = fields[0].parse().map_err(|_| {
                    Error::ConfigRejected(format!("bad mode index {:?}", fields[0]))
                })?;
                let re = fields[1].parse().map_err(|_| {
                    Error::ConfigRejected(format!("bad mode amplitude {:?}", fields[1]))
                })?;
                let im = fields[2].parse().map_err(|_| {
                    Error::ConfigRejected(format!("bad mode amplitude {:?}", fields[2]))
                })?;
                boundary_modes.push((k, re, im));
            }
        }
        let boundary_file = take(&mut map, "boundary.file").map(PathBuf::from);

        let initial = match take(&mut map, "initial.kind").as_deref() {
            Some("zero") => InitialKind::Zero,
            None | Some("gaussian") => InitialKind::Gaussian,
            Some("sech") => InitialKind::Sech,
            Some("planewave") => InitialKind::PlaneWave,
            Some("manufactured") => InitialKind::Manufactured,
            Some("file") => InitialKind::File,
            Some(other) => {
                return Err(Error::ConfigRejected(format!("unknown initial.kind {other:?}")))
            }
        };
        let initial_amplitude = take_f64(&mut map, "initial.amplitude", 1.0)?;
        let initial_center = take_f64(&mut map, "initial.center", 3.0)?;
        let initial_width = take_f64(&mut map, "initial.width", 1.0)?;
        let initial_mode = take_f64(&mut map, "initial.mode", 1.0)? as i64;
        let initial_file = take(&mut map, "initial.file").map(PathBuf::from);

        let source = match take(&mut map, "source.kind").as_deref() {
            None | Some("zero") => SourceKind::Zero,
            Some("manufactured-linear") => SourceKind::ManufacturedLinear,
            Some("manufactured-sech") => SourceKind::ManufacturedSech,
            Some("file") => SourceKind::File,
            Some(other) => {
                return Err(Error::ConfigRejected(format!("unknown source.kind {other:?}")))
            }
        };
        let source_file = take(&mut map, "source.file").map(PathBuf::from);

        let diagnostics: Vec<String> = take(&mut map, "diagnostics")
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
            .unwrap_or_default();
        for d in &diagnostics {
            if !KNOWN_DIAGNOSTICS.contains(&d.as_str()) {
                return Err(Error::ConfigRejected(format!(
                    "unknown diagnostic {d:?} (known: {KNOWN_DIAGNOSTICS:?})"
                )));
            }
        }
        let output_dir = PathBuf::from(take(&mut map, "output_dir").unwrap_or_else(|| "out".into()));
        let residual_threshold = match take(&mut map, "residual_threshold") {
            None => None,
            Some(v) => Some(v.parse().map_err(|_| {
                Error::ConfigRejected(format!("bad number for residual_threshold: {v:?}"))
            })?),
        };

        if let Some(unknown) = map.keys().next() {
            return Err(Error::ConfigRejected(format!("unknown key {unknown:?}")));
        }

        let cfg = Self {
            raw,
            name,
            solver,
            a,
            b,
            lambda,
            beta,
            gamma,
            p,
            weight,
            grid_l,
            grid_n,
            grid_t,
            grid_m,
            reg_h,
            boundary,
            boundary_modes,
            boundary_file,
            initial,
            initial_amplitude,
            initial_center,
            initial_width,
            initial_mode,
            initial_file,
            source,
            source_file,
            diagnostics,
            output_dir,
            residual_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.p < 1.0 {
            return Err(Error::ConfigRejected(format!("p must be >= 1, got {}", self.p)));
        }
        let boundary_active = self.boundary != BoundaryKind::Zero;
        if boundary_active && (self.p != 1.0 || self.gamma != 0.0) {
            return Err(Error::ConfigRejected(format!(
                "nonzero boundary data requires p = 1 and gamma = 0 (got p = {}, gamma = {})",
                self.p, self.gamma
            )));
        }
        if self.solver == SolverKind::Spectral
            && (self.lambda != 0.0 || self.beta != 0.0 || self.gamma != 0.0)
        {
            return Err(Error::ConfigRejected(
                "the spectral solver covers the linear full-line problem only".into(),
            ));
        }
        if self.source == SourceKind::ManufacturedSech && (self.gamma != 0.0 || self.p != 1.0) {
            return Err(Error::ConfigRejected(
                "manufactured-sech requires p = 1 and gamma = 0".into(),
            ));
        }
        let manufactured = matches!(
            self.source,
            SourceKind::ManufacturedLinear | SourceKind::ManufacturedSech
        );
        if manufactured
            && (self.initial != InitialKind::Manufactured
                || (self.solver == SolverKind::Fd && self.boundary != BoundaryKind::Manufactured))
        {
            return Err(Error::ConfigRejected(
                "manufactured sources need initial.kind = manufactured and boundary.kind = manufactured".into(),
            ));
        }
        if !manufactured
            && (self.initial == InitialKind::Manufactured
                || self.boundary == BoundaryKind::Manufactured)
        {
            return Err(Error::ConfigRejected(
                "initial/boundary.kind = manufactured needs a manufactured source".into(),
            ));
        }
        if self.boundary == BoundaryKind::BandLimited && self.boundary_modes.is_empty() {
            return Err(Error::ConfigRejected(
                "band-limited boundary needs boundary.modes".into(),
            ));
        }
        if self.boundary == BoundaryKind::SignalFile && self.boundary_file.is_none() {
            return Err(Error::ConfigRejected("signal-file boundary needs boundary.file".into()));
        }
        if self.initial == InitialKind::File && self.initial_file.is_none() {
            return Err(Error::ConfigRejected("file initial data needs initial.file".into()));
        }
        if self.source == SourceKind::File && self.source_file.is_none() {
            return Err(Error::ConfigRejected("file source needs source.file".into()));
        }
        if self.initial == InitialKind::PlaneWave && self.solver != SolverKind::Spectral {
            return Err(Error::ConfigRejected(
                "planewave initial data is a spectral-box mode; use solver = spectral".into(),
            ));
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "linear-gaussian" => {
                "name = linear-gaussian\n\
                 solver = fd\n\
                 a = 1.0\nb = 0.5\nlambda = 0.0\nbeta = 0.0\ngamma = 0.0\np = 1.0\n\
                 weight = exp:0.25\n\
                 grid.L = 10.0\ngrid.N = 256\ngrid.T = 0.5\ngrid.M = 64\n\
                 initial.kind = manufactured\nboundary.kind = manufactured\n\
                 source.kind = manufactured-linear\n\
                 initial.center = 3.0\n\
                 diagnostics = l2_balance\n"
            }
            "fullline-conservation" => {
                "name = fullline-conservation\n\
                 solver = spectral\n\
                 a = 1.0\nb = 0.0\nlambda = 0.0\nbeta = 0.0\ngamma = 0.0\np = 1.0\n\
                 weight = one\n\
                 grid.L = 40.0\ngrid.N = 512\ngrid.T = 1.0\ngrid.M = 50\n\
                 initial.kind = gaussian\ninitial.center = 0.0\ninitial.width = 1.0\n\
                 diagnostics = l2_balance\n"
            }
            "halfline-balance" => {
                "name = halfline-balance\n\
                 solver = fd\n\
                 a = 1.0\nb = 2.0\nlambda = 0.0\nbeta = 0.0\ngamma = 0.0\np = 1.0\n\
                 weight = arctan\n\
                 grid.L = 20.0\ngrid.N = 512\ngrid.T = 0.5\ngrid.M = 128\n\
                 initial.kind = gaussian\ninitial.center = 6.0\ninitial.width = 1.0\n\
                 diagnostics = l2_balance,sigma_plus\n"
            }
            "nonlinear-sech" => {
                "name = nonlinear-sech\n\
                 solver = fd\n\
                 a = 1.0\nb = 0.0\nlambda = 1.0\nbeta = 0.5\ngamma = 0.0\np = 1.0\n\
                 weight = exp:0.25\nreg.h = 0.5\n\
                 grid.L = 16.0\ngrid.N = 1024\ngrid.T = 0.5\ngrid.M = 32\n\
                 initial.kind = manufactured\nboundary.kind = manufactured\n\
                 source.kind = manufactured-sech\ninitial.center = 3.0\n\
                 diagnostics = l2_balance\n"
            }
            "depend-base" => {
                "name = depend-base\n\
                 solver = fd\n\
                 a = 1.0\nb = 0.0\nlambda = 1.0\nbeta = 0.5\ngamma = 0.0\np = 1.0\n\
                 weight = exp:0.5\nreg.h = 0.5\n\
                 grid.L = 12.0\ngrid.N = 192\ngrid.T = 0.4\ngrid.M = 24\n\
                 initial.kind = gaussian\ninitial.center = 4.0\ninitial.width = 1.5\n\
                 initial.amplitude = 0.7\n\
                 diagnostics = l2_balance\n"
            }
            other => {
                return Err(Error::ConfigRejected(format!("unknown preset {other:?}")));
            }
        };
        Self::parse(text)
    }

    pub fn coefficients<T: Scalar>(&self) -> Coefficients<T> {
        Coefficients {
            a: rl(self.a),
            b: rl(self.b),
            lambda: rl(self.lambda),
            beta: rl(self.beta),
            gamma: rl(self.gamma),
            p: rl(self.p),
        }
    }

    pub fn grid<T: Scalar>(&self) -> Result<HalfLineGrid<T>> {
        HalfLineGrid::new(rl(self.grid_l), self.grid_n, rl(self.grid_t), self.grid_m)
    }

    /// Dyadic refinement of the grid keys only.
    pub fn refined(&self) -> Self {
        let mut c = self.clone();
        c.grid_n *= 2;
        c.grid_m *= 2;
        c
    }
}

type ExactFn<T> = Arc<dyn Fn(T, T) -> C<T> + Send + Sync>;

/// Manufactured solution attached to a config, when one exists.
pub fn manufactured_solution<T: Scalar>(config: &ScenarioConfig) -> Option<ExactFn<T>> {
    match config.source {
        SourceKind::ManufacturedLinear => {
            let c = rl::<T>(config.initial_center);
            Some(Arc::new(move |t: T, x: T| {
                Complex::from_polar((-(x - c) * (x - c)).exp(), t)
            }))
        }
        SourceKind::ManufacturedSech => {
            let c = rl::<T>(config.initial_center);
            let omega = rl::<T>(2.0) * T::PI() / rl::<T>(config.grid_t);
            Some(Arc::new(move |t: T, x: T| {
                Complex::from_polar((x - c).cosh().recip(), omega * t)
            }))
        }
        _ => None,
    }
}

fn manufactured_source<T: Scalar>(config: &ScenarioConfig) -> Result<SourceTerm<T>> {
    let (a, b, lambda, beta) =
        (rl::<T>(config.a), rl::<T>(config.b), rl::<T>(config.lambda), rl::<T>(config.beta));
    match config.source {
        SourceKind::ManufacturedLinear => {
            let c = rl::<T>(config.initial_center);
            // u = e^{it} e^{-(x-c)^2}: f = i u_t + a u_xx + i b u_x + i u_xxx
            //   + lambda |u|^p u + i beta (|u|^p u)_x with p arbitrary only
            //   in the linear case lambda = beta = gamma = 0
            if config.lambda != 0.0 || config.beta != 0.0 || config.gamma != 0.0 {
                return Err(Error::ConfigRejected(
                    "manufactured-linear requires lambda = beta = gamma = 0".into(),
                ));
            }
            Ok(SourceTerm::analytic(move |t: T, x: T| {
                let y = x - c;
                let g = (-y * y).exp();
                let g1 = -rl::<T>(2.0) * y * g;
                let g2 = (rl::<T>(4.0) * y * y - rl::<T>(2.0)) * g;
                let g3 = (rl::<T>(12.0) * y - rl::<T>(8.0) * y * y * y) * g;
                let rot: C<T> = Complex::from_polar(T::one(), t);
                rot * Complex::new(-g + a * g2, b * g1 + g3)
            }))
        }
        SourceKind::ManufacturedSech => {
            let c = rl::<T>(config.initial_center);
            let omega = rl::<T>(2.0) * T::PI() / rl::<T>(config.grid_t);
            Ok(SourceTerm::analytic(move |t: T, x: T| {
                let s = (x - c).cosh().recip();
                let th = (x - c).tanh();
                let s1 = -s * th;
                let s2 = s - rl::<T>(2.0) * s * s * s;
                let s3 = s1 * (T::one() - rl::<T>(6.0) * s * s);
                let rot: C<T> = Complex::from_polar(T::one(), omega * t);
                rot * Complex::new(
                    -omega * s + a * s2 + lambda * s * s,
                    b * s1 + s3 + beta * rl::<T>(2.0) * s * s1,
                )
            }))
        }
        _ => Err(Error::ConfigRejected("scenario has no manufactured source".into())),
    }
}

fn read_complex_rows<T: Scalar>(path: &Path) -> Result<Vec<Vec<C<T>>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if fields.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "{}: rows must hold re,im pairs",
                path.display()
            )));
        }
        rows.push(fields.chunks(2).map(|c| Complex::new(rl(c[0]), rl(c[1]))).collect());
    }
    Ok(rows)
}

/// Assemble the problem data for the finite-difference path.
pub fn build_problem<T: Scalar>(config: &ScenarioConfig) -> Result<ProblemSpec<T>> {
    let grid = config.grid::<T>()?;
    let exact = manufactured_solution::<T>(config);

    let u0 = match config.initial {
        InitialKind::Zero => GridFunction::zeros(grid),
        InitialKind::Gaussian => {
            let (amp, c, w) = (
                rl::<T>(config.initial_amplitude),
                rl::<T>(config.initial_center),
                rl::<T>(config.initial_width),
            );
            GridFunction::from_fn(grid, |x| {
                Complex::new(amp * (-((x - c) / w) * ((x - c) / w)).exp(), T::zero())
            })
        }
        InitialKind::Sech => {
            let (amp, c, w) = (
                rl::<T>(config.initial_amplitude),
                rl::<T>(config.initial_center),
                rl::<T>(config.initial_width),
            );
            GridFunction::from_fn(grid, |x| {
                Complex::new(amp * ((x - c) / w).cosh().recip(), T::zero())
            })
        }
        InitialKind::Manufactured => {
            let exact = exact.clone().ok_or_else(|| {
                Error::ConfigRejected("manufactured initial data without a manufactured source".into())
            })?;
            GridFunction::from_fn(grid, |x| exact(T::zero(), x))
        }
        InitialKind::File => {
            let path = config.initial_file.as_ref().unwrap();
            let rows = read_complex_rows::<T>(path)?;
            let values = rows
                .into_iter()
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("{}: empty", path.display())))?;
            GridFunction::new(grid, values)?
        }
        InitialKind::PlaneWave => {
            return Err(Error::ConfigRejected("planewave initial data is spectral-only".into()))
        }
    };

    let mu = match config.boundary {
        BoundaryKind::Zero => BoundarySignal::Zero,
        BoundaryKind::BandLimited => BoundarySignal::Modes {
            period: rl::<T>(2.0 * config.grid_t),
            modes: config
                .boundary_modes
                .iter()
                .map(|(k, re, im)| (*k, Complex::new(rl::<T>(*re), rl::<T>(*im))))
                .collect(),
        },
        BoundaryKind::SignalFile => {
            let path = config.boundary_file.as_ref().unwrap();
            let rows = read_complex_rows::<T>(path)?;
            let values: Vec<C<T>> = rows
                .into_iter()
                .map(|r| {
                    r.into_iter().next().ok_or_else(|| {
                        Error::InvalidInput(format!("{}: empty row", path.display()))
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != grid.n_steps + 1 {
                return Err(Error::ConfigRejected(format!(
                    "boundary file has {} samples, grid needs {}",
                    values.len(),
                    grid.n_steps + 1
                )));
            }
            BoundarySignal::Samples { dt: grid.dt(), values }
        }
        BoundaryKind::Manufactured => {
            let exact = exact.clone().ok_or_else(|| {
                Error::ConfigRejected("manufactured boundary without a manufactured source".into())
            })?;
            BoundarySignal::analytic(move |t: T| exact(t, T::zero()))
        }
    };

    let f = match config.source {
        SourceKind::Zero => SourceTerm::Zero,
        SourceKind::ManufacturedLinear | SourceKind::ManufacturedSech => {
            manufactured_source::<T>(config)?
        }
        SourceKind::File => {
            let path = config.source_file.as_ref().unwrap();
            let slices = read_complex_rows::<T>(path)?;
            for s in &slices {
                if s.len() != grid.n_nodes() {
                    return Err(Error::ConfigRejected(format!(
                        "source file rows must hold {} nodes",
                        grid.n_nodes()
                    )));
                }
            }
            SourceTerm::Samples { dt: grid.dt(), slices }
        }
    };

    let spec = ProblemSpec {
        a: rl(config.a),
        b: rl(config.b),
        lambda: rl(config.lambda),
        beta: rl(config.beta),
        gamma: rl(config.gamma),
        p: rl(config.p),
        u0,
        mu,
        f,
    };
    spec.validate()?;
    Ok(spec)
}

/// A finished run: the solved history plus logs, artifacts, and the config
/// snapshot for auditability.
pub struct RunRecord<T: Scalar> {
    pub config: ScenarioConfig,
    pub history: SolutionHistory<T>,
    pub step_log: StepLog,
    pub csv_rows: Vec<CsvRow>,
    pub report: ReportJson,
    pub wall_seconds: f64,
    pub max_residual: f64,
}

fn spectral_history<T: Scalar>(config: &ScenarioConfig) -> Result<SolutionHistory<T>> {
    let half = rl::<T>(0.5 * config.grid_l);
    let bx = PeriodicBox { x_left: -half, width: rl::<T>(config.grid_l), n: config.grid_n };
    let sb = SpectralBox::new(bx);
    let u0: Vec<C<T>> = match config.initial {
        InitialKind::Gaussian => {
            let (amp, c, w) = (
                rl::<T>(config.initial_amplitude),
                rl::<T>(config.initial_center),
                rl::<T>(config.initial_width),
            );
            sb.sample(|x| Complex::new(amp * (-((x - c) / w) * ((x - c) / w)).exp(), T::zero()))
        }
        InitialKind::PlaneWave => {
            let xi = bx.xi(config.initial_mode.rem_euclid(config.grid_n as i64) as usize);
            sb.sample(|x| Complex::from_polar(rl::<T>(config.initial_amplitude), xi * x))
        }
        InitialKind::Zero => sb.sample(|_| Complex::new(T::zero(), T::zero())),
        _ => {
            return Err(Error::ConfigRejected(
                "spectral solver supports zero/gaussian/planewave initial data".into(),
            ))
        }
    };
    let run = solve_fullline_linear(
        &sb,
        &u0,
        rl(config.grid_t),
        config.grid_m,
        rl(config.a),
        rl(config.b),
    )?;
    // box nodes reinterpreted as a generic uniform record for reporting
    let grid = HalfLineGrid::new(
        rl::<T>(config.grid_l),
        config.grid_n - 1,
        rl(config.grid_t),
        config.grid_m,
    )?;
    let mut history = SolutionHistory::new(grid);
    for s in run.slices {
        history.push(s);
    }
    Ok(history)
}

/// Execute a scenario: lifting (when needed) + time loop + diagnostics,
/// with CSV/JSON artifacts written under `output_dir`.
pub fn run_scenario<T: Scalar>(config: &ScenarioConfig) -> Result<RunRecord<T>> {
    let start = std::time::Instant::now();
    let weight = WeightSpec::<T>::parse(&config.weight)?;
    let coeffs = config.coefficients::<T>();
    let reg = RegularizedNonlinearity::new(rl::<T>(config.reg_h), rl(config.p))?;

    let (history, step_log) = match config.solver {
        SolverKind::Fd => {
            let spec = build_problem::<T>(config)?;
            let run = solve_hnls(&spec, &reg, &weight, &FixedPointOptions::default())?;
            (run.history, run.log)
        }
        SolverKind::Spectral => (spectral_history::<T>(config)?, StepLog::default()),
    };

    // diagnostics series for the CSV; on the periodic box the flux and the
    // half-line traces are meaningless, so e_ident becomes the relative
    // conservation drift under flat (periodic) quadrature
    let grid = history.grid;
    let dx = grid.dx();
    let balance: Vec<T> = match config.solver {
        SolverKind::Fd => {
            let f = build_problem::<T>(config)?.f;
            l2_balance_residual(&history, &coeffs, &f, &reg)?
        }
        SolverKind::Spectral => {
            let base = l2_norm_periodic(history.slice(0), dx);
            let base_sq = base * base;
            history
                .slices
                .iter()
                .map(|s| {
                    let n = l2_norm_periodic(s, dx);
                    if base_sq > T::zero() { (n * n - base_sq) / base_sq } else { T::zero() }
                })
                .collect()
        }
    };
    let energy = if config.beta + config.gamma != 0.0 {
        Some(energy_identity_residual_nl(&history, &coeffs)?)
    } else {
        None
    };

    let mut csv_rows = Vec::with_capacity(history.len());
    for idx in 0..history.len() {
        let slice = history.slice(idx);
        let (l2, wl2, flux) = match config.solver {
            SolverKind::Fd => {
                let gf = GridFunction { grid, values: slice.to_vec() };
                (
                    l2_norm(slice, dx),
                    weighted_l2_norm(&gf, &weight)?,
                    ux_at_left(slice, dx).norm_sqr(),
                )
            }
            SolverKind::Spectral => {
                let n = l2_norm_periodic(slice, dx);
                (n, n, T::zero())
            }
        };
        csv_rows.push(CsvRow {
            t: grid.t(idx).to_f64().unwrap_or(f64::NAN),
            l2: l2.to_f64().unwrap_or(f64::NAN),
            wl2: wl2.to_f64().unwrap_or(f64::NAN),
            flux: flux.to_f64().unwrap_or(f64::NAN),
            e_ident: balance[idx].to_f64().unwrap_or(f64::NAN),
            nl_energy: energy
                .as_ref()
                .map(|e| e.energy[idx].to_f64().unwrap_or(f64::NAN))
                .unwrap_or(f64::NAN),
            gamma_term: energy
                .as_ref()
                .map(|e| e.gamma_term[idx].to_f64().unwrap_or(f64::NAN))
                .unwrap_or(f64::NAN),
            iters: if idx == 0 {
                0
            } else {
                *step_log.iterations.get(idx - 1).unwrap_or(&0) as u32
            },
        });
    }

    // interior residual maximum (the one-sided endpoints are noisier)
    let max_residual = balance[1..balance.len().saturating_sub(1)]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.to_f64().unwrap_or(f64::NAN).abs()));

    let report = ReportJson {
        scenario: config.name.clone(),
        grid: GridJson {
            length: config.grid_l,
            n_cells: config.grid_n,
            horizon: config.grid_t,
            n_steps: config.grid_m,
        },
        series: SeriesJson {
            t: (0..history.len()).map(|i| grid.t(i).to_f64().unwrap_or(f64::NAN)).collect(),
            residuals: balance.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        },
        summary: SummaryJson { max_residual, convergence_order: None, ratios: Default::default() },
    };

    let record = RunRecord {
        config: config.clone(),
        history,
        step_log,
        csv_rows,
        report,
        wall_seconds: start.elapsed().as_secs_f64(),
        max_residual,
    };
    Ok(record)
}

impl<T: Scalar> RunRecord<T> {
    /// Write CSV, JSON, and the config snapshot under the output directory.
    pub fn persist(&self) -> Result<()> {
        let dir = &self.config.output_dir;
        std::fs::create_dir_all(dir)?;
        crate::report::write_csv(&dir.join(format!("{}.csv", self.config.name)), &self.csv_rows)?;
        crate::report::write_json(&dir.join(format!("{}.json", self.config.name)), &self.report)?;
        std::fs::write(dir.join(format!("{}.config", self.config.name)), &self.config.raw)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dt: f64,
    pub error: f64,
    pub order: Option<f64>,
    pub saturated: bool,
    pub flagged: bool,
}

/// Error floor below which order estimates are meaningless.
const SATURATION_FLOOR: f64 = 1e-12;

/// Dyadic refinement study against the scenario's oracle (manufactured
/// solution or exact spectral mode); Richardson log-ratio orders.
pub fn convergence_table<T: Scalar>(
    config: &ScenarioConfig,
    levels: usize,
) -> Result<Vec<ConvergenceRow>> {
    if levels < 2 {
        return Err(Error::InvalidInput("need at least two refinement levels".into()));
    }
    let exact_fd = manufactured_solution::<T>(config);
    let plane_wave = config.solver == SolverKind::Spectral
        && config.initial == InitialKind::PlaneWave;
    if exact_fd.is_none() && !plane_wave {
        return Err(Error::ConfigRejected(
            "convergence tables need a manufactured source or a planewave spectral mode".into(),
        ));
    }

    let mut cfg = config.clone();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for _ in 0..levels {
        let record = run_scenario::<T>(&cfg)?;
        let grid = record.history.grid;
        let last = record.history.slices.last().unwrap();
        let t_end = grid.t(record.history.len() - 1);
        let error = match (&exact_fd, plane_wave) {
            (Some(exact), _) => {
                let diff: Vec<C<T>> = (0..grid.n_nodes())
                    .map(|j| last[j] - exact(t_end, grid.x(j)))
                    .collect();
                l2_norm(&diff, grid.dx()).to_f64().unwrap_or(f64::NAN)
            }
            (None, true) => {
                // exact mode: e^{i(xi x + phase t)} on the box
                let half = rl::<T>(0.5 * cfg.grid_l);
                let bx = PeriodicBox {
                    x_left: -half,
                    width: rl::<T>(cfg.grid_l),
                    n: cfg.grid_n,
                };
                let xi = bx.xi(cfg.initial_mode.rem_euclid(cfg.grid_n as i64) as usize);
                let phase = crate::oracle::dispersion_phase(xi, rl(cfg.a), rl(cfg.b)) * t_end;
                let amp = rl::<T>(cfg.initial_amplitude);
                let diff: Vec<C<T>> = (0..bx.n)
                    .map(|m| last[m] - Complex::from_polar(amp, xi * bx.x(m) + phase))
                    .collect();
                l2_norm(&diff, bx.dx()).to_f64().unwrap_or(f64::NAN)
            }
            _ => unreachable!(),
        };
        let (order, saturated, flagged) = match rows.last() {
            None => (None, error < SATURATION_FLOOR, false),
            Some(prev) => {
                let saturated = error < SATURATION_FLOOR || prev.error < SATURATION_FLOOR;
                let flagged = !saturated && error >= prev.error;
                let order =
                    if saturated { None } else { Some((prev.error / error).log2()) };
                (order, saturated, flagged)
            }
        };
        rows.push(ConvergenceRow {
            dx: grid.dx().to_f64().unwrap_or(f64::NAN),
            dt: grid.dt().to_f64().unwrap_or(f64::NAN),
            error,
            order,
            saturated,
            flagged,
        });
        cfg = cfg.refined();
    }
    Ok(rows)
}
