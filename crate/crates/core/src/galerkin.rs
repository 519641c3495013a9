//! Small spectral Galerkin solver for the auxiliary half-line problems
//!   i V_t + a V_xx -+ i b V_x - + i V_xxx = F,  V(0) = 0,  V(t,0) = 0,
//! over exponentially weighted polynomial bases
//!   phi_j(x) = x^2 L_{j-1}(2x) e^{-x}   (two boundary conditions)
//!   phi_j(x) = x   L_{j-1}(2x) e^{-x}   (one boundary condition),
//! with the exact ODE-level mass identities as correctness oracles.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, HalfLineGrid};
use crate::linalg::DenseLu;
use crate::norms::{l2_norm, trapz_factor};
use crate::quad::gauss_legendre;
use crate::scalar::{rl, Scalar, C};

/// Gram condition estimate above which the basis is rejected.
pub const GRAM_COND_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisVariant {
    /// phi(0) = phi'(0) = 0
    TwoCondition,
    /// phi(0) = 0
    OneCondition,
}

/// Generalized Laguerre L_n^{(alpha)}(y) by the three-term recurrence.
fn laguerre<T: Scalar>(n: i64, alpha: usize, y: T) -> T {
    if n < 0 {
        return T::zero();
    }
    let alpha = rl::<T>(alpha as f64);
    let mut p0 = T::one();
    if n == 0 {
        return p0;
    }
    let mut p1 = T::one() + alpha - y;
    for m in 1..n {
        let mf = rl::<T>(m as f64);
        let p2 = ((mf + mf + T::one() + alpha - y) * p1 - (mf + alpha) * p0) / (mf + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// L_{j}(2x) e^{-x} x^pow and derivatives up to third order.
fn basis_eval<T: Scalar>(j: usize, pow: u32, x: T) -> [T; 4] {
    let y = rl::<T>(2.0) * x;
    let n = j as i64;
    // chain rule: d^m/dx^m L(2x) = 2^m L^(m)(2x), and
    // d/dy L_n^{(a)} = -L_{n-1}^{(a+1)}
    let l = [
        laguerre(n, 0, y),
        -laguerre(n - 1, 1, y) * rl::<T>(2.0),
        laguerre(n - 2, 2, y) * rl::<T>(4.0),
        -laguerre(n - 3, 3, y) * rl::<T>(8.0),
    ];
    let e0 = (-x).exp();
    let e = [e0, -e0, e0, -e0];
    let p = match pow {
        1 => [x, T::one(), T::zero(), T::zero()],
        2 => [x * x, rl::<T>(2.0) * x, rl::<T>(2.0), T::zero()],
        _ => unreachable!(),
    };
    let mut out = [T::zero(); 4];
    let binom: [&[f64]; 4] =
        [&[1.0], &[1.0, 1.0], &[1.0, 2.0, 1.0], &[1.0, 3.0, 3.0, 1.0]];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        // trinomial Leibniz: sum over i + jj + kk = m
        for i in 0..=m {
            for jj in 0..=(m - i) {
                let kk = m - i - jj;
                let coeff = binom[m][i] * binom[m - i][jj];
                acc = acc + rl::<T>(coeff) * p[i] * l[jj] * e[kk];
            }
        }
        *slot = acc;
    }
    out
}

/// Basis of dimension k with precomputed Gram and derivative matrices
/// (row-major k x k, entry [m][j] = integral of phi_j against phi_m^{(d)}:
/// the derivative sits on the test function, as in the weak form).
#[derive(Clone, Debug)]
pub struct GalerkinBasis<T: Scalar> {
    pub k: usize,
    pub variant: BasisVariant,
    pub gram: Vec<T>,
    pub d1_mat: Vec<T>,
    pub d2_mat: Vec<T>,
    pub d3_mat: Vec<T>,
    /// ratio of extreme Gram eigenvalues
    pub cond_estimate: T,
    /// phi_j'(0)
    pub dphi_at_0: Vec<T>,
}

impl<T: Scalar> GalerkinBasis<T> {
    fn pow(&self) -> u32 {
        match self.variant {
            BasisVariant::TwoCondition => 2,
            BasisVariant::OneCondition => 1,
        }
    }

    /// phi_j and derivatives (j = 0..k-1).
    pub fn eval(&self, j: usize, x: T) -> [T; 4] {
        basis_eval(j, self.pow(), x)
    }

    /// phi_j sampled at the grid nodes.
    pub fn sample(&self, grid: &HalfLineGrid<T>) -> Vec<Vec<T>> {
        (0..self.k)
            .map(|j| (0..grid.n_nodes()).map(|m| self.eval(j, grid.x(m))[0]).collect())
            .collect()
    }

    /// V_k(t, x) = sum_j c_j phi_j(x) on the grid nodes.
    pub fn synthesize(&self, coeffs: &[C<T>], grid: &HalfLineGrid<T>) -> Vec<C<T>> {
        let samples = self.sample(grid);
        let mut out = vec![Complex::new(T::zero(), T::zero()); grid.n_nodes()];
        for (j, col) in samples.iter().enumerate() {
            for (m, v) in col.iter().enumerate() {
                out[m] = out[m] + coeffs[j] * *v;
            }
        }
        out
    }
}

/// Jacobi eigenvalue iteration for small symmetric matrices.
fn symmetric_eigenvalues<T: Scalar>(mat: &[T], k: usize) -> Vec<T> {
    let mut a = mat.to_vec();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..k {
            for j in (i + 1)..k {
                off = off + a[i * k + j] * a[i * k + j];
            }
        }
        if off < rl::<T>(1e-28) {
            break;
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let apq = a[i * k + j];
                if apq.abs() < rl::<T>(1e-30) {
                    continue;
                }
                let app = a[i * k + i];
                let aqq = a[j * k + j];
                let theta = (aqq - app) / (rl::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for m in 0..k {
                    let aim = a[i * k + m];
                    let ajm = a[j * k + m];
                    a[i * k + m] = c * aim - s * ajm;
                    a[j * k + m] = s * aim + c * ajm;
                }
                for m in 0..k {
                    let ami = a[m * k + i];
                    let amj = a[m * k + j];
                    a[m * k + i] = c * ami - s * amj;
                    a[m * k + j] = s * ami + c * amj;
                }
            }
        }
    }
    (0..k).map(|i| a[i * k + i]).collect()
}

/// Assemble the basis matrices by composite Gauss–Legendre quadrature on a
/// truncated range wide enough for the e^{-2x} tail of every product.
pub fn build_basis<T: Scalar>(k: usize, variant: BasisVariant) -> Result<GalerkinBasis<T>> {
    if k == 0 || k > 40 {
        return Err(Error::InvalidInput(format!("basis dimension must be in 1..=40, got {k}")));
    }
    let pow = match variant {
        BasisVariant::TwoCondition => 2,
        BasisVariant::OneCondition => 1,
    };
    let x_cut = rl::<T>(30.0 + 2.5 * k as f64);
    let panels = 8 * k.max(8);

    // composite Gauss–Legendre nodes/weights, basis values cached per node
    let (gl_nodes, gl_weights) = gauss_legendre::<T>(24);
    let half = rl::<T>(0.5);
    let width = x_cut / rl::<T>(panels as f64);
    let mut xs = Vec::with_capacity(panels * gl_nodes.len());
    let mut ws = Vec::with_capacity(xs.capacity());
    for p in 0..panels {
        let lo = width * rl::<T>(p as f64);
        let mid = lo + width * half;
        for (x, w) in gl_nodes.iter().zip(&gl_weights) {
            xs.push(mid + width * half * *x);
            ws.push(*w * width * half);
        }
    }
    let vals: Vec<Vec<[T; 4]>> =
        (0..k).map(|j| xs.iter().map(|x| basis_eval(j, pow, *x)).collect()).collect();

    let mut gram = vec![T::zero(); k * k];
    let mut d1 = vec![T::zero(); k * k];
    let mut d2 = vec![T::zero(); k * k];
    let mut d3 = vec![T::zero(); k * k];
    for m in 0..k {
        for j in 0..k {
            let mut acc = [T::zero(); 4];
            for (i, w) in ws.iter().enumerate() {
                let base = *w * vals[j][i][0];
                for (d, slot) in acc.iter_mut().enumerate() {
                    *slot = *slot + base * vals[m][i][d];
                }
            }
            gram[m * k + j] = acc[0];
            d1[m * k + j] = acc[1];
            d2[m * k + j] = acc[2];
            d3[m * k + j] = acc[3];
        }
    }

    let eigs = symmetric_eigenvalues(&gram, k);
    let max_e = eigs.iter().fold(T::zero(), |a, b| a.max(*b));
    let min_e = eigs.iter().fold(T::infinity(), |a, b| a.min(*b));
    if !(min_e > T::zero()) {
        return Err(Error::IllConditionedBasis {
            cond: f64::INFINITY,
            limit: GRAM_COND_LIMIT,
        });
    }
    let cond = max_e / min_e;
    if cond.to_f64().unwrap_or(f64::INFINITY) > GRAM_COND_LIMIT {
        return Err(Error::IllConditionedBasis {
            cond: cond.to_f64().unwrap_or(f64::INFINITY),
            limit: GRAM_COND_LIMIT,
        });
    }

    let dphi_at_0 = (0..k).map(|j| basis_eval::<T>(j, pow, T::zero())[1]).collect();
    Ok(GalerkinBasis { k, variant, gram, d1_mat: d1, d2_mat: d2, d3_mat: d3, cond_estimate: cond, dphi_at_0 })
}

/// Coefficient history of a Galerkin run plus the per-time data needed by
/// the identity diagnostics.
#[derive(Clone, Debug)]
pub struct GalerkinHistory<T: Scalar> {
    pub times: Vec<T>,
    /// c(t_n), length k each
    pub coeffs: Vec<Vec<C<T>>>,
    /// projections b_m(t_n) = integral F(t_n) phi_m dx
    pub proj: Vec<Vec<C<T>>>,
    /// ||F(t_n)||_{L2} on the projection grid
    pub f_l2: Vec<T>,
}

/// Power-iteration estimate of the spectral radius of M^{-1} B; sets the
/// stable internal step of the explicit integrator. The pencil spectrum
/// comes in +-lambda pairs, which makes the normalized iteration a
/// two-cycle in norm; the geometric mean of consecutive growth factors
/// converges to |lambda| regardless.
fn spectral_radius<T: Scalar>(k: usize, bmat: &[C<T>], mass_lu: &DenseLu<T>) -> T {
    let mut v: Vec<C<T>> =
        (0..k).map(|j| Complex::new(rl::<T>(1.0 + (j % 3) as f64), rl::<T>(0.5))).collect();
    let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    for z in &mut v {
        *z = *z / norm0;
    }
    let mut prev = T::one();
    let mut rho = T::one();
    for it in 0..80 {
        let mut w: Vec<C<T>> = (0..k)
            .map(|m| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..k {
                    acc = acc + bmat[m * k + j] * v[j];
                }
                acc
            })
            .collect();
        mass_lu.solve(&mut w);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) {
            return T::one();
        }
        if it > 0 {
            rho = (norm * prev).sqrt();
        }
        prev = norm;
        for z in &mut w {
            *z = *z / norm;
        }
        v = w;
    }
    rho
}

fn project<T: Scalar>(
    slice: &[C<T>],
    samples: &[Vec<T>],
    grid: &HalfLineGrid<T>,
) -> Vec<C<T>> {
    let dx = grid.dx();
    let n = grid.n_nodes();
    samples
        .iter()
        .map(|phi| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for m in 0..n {
                acc = acc + slice[m] * (phi[m] * trapz_factor::<T>(m, n));
            }
            acc * dx
        })
        .collect()
}

/// Integrate the projected system i M c' + B c = b(t) from c(0) = 0 with
/// classical RK4; B encodes the variant's sign pattern. The source F is
/// projected in plain L2 on the supplied grid.
pub fn galerkin_solve<T: Scalar>(
    basis: &GalerkinBasis<T>,
    a: T,
    b: T,
    f: impl Fn(T) -> GridFunction<T>,
    grid: &HalfLineGrid<T>,
    horizon: T,
    n_steps: usize,
) -> Result<GalerkinHistory<T>> {
    let k = basis.k;
    let ii = Complex::new(T::zero(), T::one());
    let sign = match basis.variant {
        BasisVariant::TwoCondition => -T::one(),
        BasisVariant::OneCondition => T::one(),
    };
    // B[m][j] = a d2 + sign * (i b d1 + i d3)
    let bmat: Vec<C<T>> = (0..k * k)
        .map(|idx| {
            Complex::new(a * basis.d2_mat[idx], T::zero())
                + ii * (sign * (b * basis.d1_mat[idx] + basis.d3_mat[idx]))
        })
        .collect();
    let mass: Vec<C<T>> =
        basis.gram.iter().map(|v| Complex::new(*v, T::zero())).collect();
    let mass_lu = DenseLu::new(k, mass)?;

    let samples = basis.sample(grid);
    let h = horizon / rl::<T>(n_steps as f64);
    let zero = Complex::new(T::zero(), T::zero());

    // c' = -i M^{-1} (b(t) - B c)
    let rhs = |t: T, c: &[C<T>]| -> Vec<C<T>> {
        let slice = f(t);
        let proj = project(&slice.values, &samples, grid);
        let mut r: Vec<C<T>> = (0..k)
            .map(|m| {
                let mut acc = proj[m];
                for j in 0..k {
                    acc = acc - bmat[m * k + j] * c[j];
                }
                acc
            })
            .collect();
        mass_lu.solve(&mut r);
        for v in &mut r {
            *v = -ii * *v;
        }
        r
    };

    // explicit RK4 needs |rho h| inside its stability region: substep each
    // output interval accordingly
    let rho = spectral_radius(k, &bmat, &mass_lu);
    let substeps = ((h * rho).to_f64().unwrap_or(1.0) / 1.2).ceil().max(1.0) as usize;
    let hs = h / rl::<T>(substeps as f64);

    let mut c = vec![zero; k];
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut coeffs = Vec::with_capacity(n_steps + 1);
    let mut proj = Vec::with_capacity(n_steps + 1);
    let mut f_l2 = Vec::with_capacity(n_steps + 1);

    let record = |t: T,
                  c: &[C<T>],
                  times: &mut Vec<T>,
                  coeffs: &mut Vec<Vec<C<T>>>,
                  proj: &mut Vec<Vec<C<T>>>,
                  f_l2: &mut Vec<T>| {
        let slice = f(t);
        proj.push(project(&slice.values, &samples, grid));
        f_l2.push(l2_norm(&slice.values, grid.dx()));
        times.push(t);
        coeffs.push(c.to_vec());
    };
    record(T::zero(), &c, &mut times, &mut coeffs, &mut proj, &mut f_l2);

    let data_scale = f_l2[0] + T::one();
    let half = rl::<T>(0.5);
    let sixth = rl::<T>(1.0 / 6.0);
    for n in 0..n_steps {
        for s in 0..substeps {
            let t = h * rl::<T>(n as f64) + hs * rl::<T>(s as f64);
            let k1 = rhs(t, &c);
            let c2: Vec<C<T>> = c.iter().zip(&k1).map(|(x, d)| *x + *d * (hs * half)).collect();
            let k2 = rhs(t + hs * half, &c2);
            let c3: Vec<C<T>> = c.iter().zip(&k2).map(|(x, d)| *x + *d * (hs * half)).collect();
            let k3 = rhs(t + hs * half, &c3);
            let c4: Vec<C<T>> = c.iter().zip(&k3).map(|(x, d)| *x + *d * hs).collect();
            let k4 = rhs(t + hs, &c4);
            for j in 0..k {
                c[j] = c[j] + (k1[j] + (k2[j] + k3[j]) * rl::<T>(2.0) + k4[j]) * (hs * sixth);
            }
            let norm: T = c.iter().map(|v| v.norm_sqr()).sum();
            if !norm.is_finite() || norm.sqrt() > rl::<T>(1e12) * data_scale {
                return Err(Error::Stiffness { t: (t + hs).to_f64().unwrap_or(f64::NAN) });
            }
        }
        record(h * rl::<T>((n + 1) as f64), &c, &mut times, &mut coeffs, &mut proj, &mut f_l2);
    }

    Ok(GalerkinHistory { times, coeffs, proj, f_l2 })
}

fn mass_norm_sq<T: Scalar>(basis: &GalerkinBasis<T>, c: &[C<T>]) -> T {
    let k = basis.k;
    let mut acc = T::zero();
    for m in 0..k {
        for j in 0..k {
            acc = acc + basis.gram[m * k + j] * (c[m].conj() * c[j]).re;
        }
    }
    acc
}

fn source_pairing<T: Scalar>(c: &[C<T>], proj: &[C<T>]) -> T {
    // 2 Im integral F conj(V_k) dx = 2 Im sum_m conj(c_m) b_m
    let mut acc = Complex::new(T::zero(), T::zero());
    for (cm, bm) in c.iter().zip(proj) {
        acc = acc + cm.conj() * *bm;
    }
    rl::<T>(2.0) * acc.im
}

/// Residual of the mass identity d/dt ||V_k||^2 = 2 Im <F, V_k> in integral
/// form, accumulated with composite Simpson over step pairs; returned on the
/// even time indices.
pub fn mass_identity_residual<T: Scalar>(
    basis: &GalerkinBasis<T>,
    hist: &GalerkinHistory<T>,
) -> Vec<T> {
    identity_residual_impl(basis, hist, false)
}

/// Residual of the adjoint-variant identity, which carries the boundary
/// flux |V_kx(0)|^2 on the left-hand side.
pub fn adjoint_identity_residual<T: Scalar>(
    basis: &GalerkinBasis<T>,
    hist: &GalerkinHistory<T>,
) -> Vec<T> {
    identity_residual_impl(basis, hist, true)
}

fn identity_residual_impl<T: Scalar>(
    basis: &GalerkinBasis<T>,
    hist: &GalerkinHistory<T>,
    with_flux: bool,
) -> Vec<T> {
    let n = hist.times.len();
    debug_assert!(n >= 3);
    let h = hist.times[1] - hist.times[0];
    let base = mass_norm_sq(basis, &hist.coeffs[0]);
    let g: Vec<T> = (0..n)
        .map(|i| {
            let mut v = source_pairing(&hist.coeffs[i], &hist.proj[i]);
            if with_flux {
                let mut trace = Complex::new(T::zero(), T::zero());
                for (cj, dphi) in hist.coeffs[i].iter().zip(&basis.dphi_at_0) {
                    trace = trace + *cj * *dphi;
                }
                v = v - trace.norm_sqr();
            }
            v
        })
        .collect();
    let third = rl::<T>(1.0 / 3.0);
    let mut acc = T::zero();
    let mut out = vec![T::zero()];
    let mut i = 2;
    while i < n {
        acc = acc + (g[i - 2] + rl::<T>(4.0) * g[i - 1] + g[i]) * h * third;
        out.push(mass_norm_sq(basis, &hist.coeffs[i]) - base - acc);
        i += 2;
    }
    out
}

/// (sup_t ||V_k||, integral_0^T ||F|| dt): the first must not exceed the
/// second (exact at the ODE level).
pub fn sup_norm_vs_source_bound<T: Scalar>(
    basis: &GalerkinBasis<T>,
    hist: &GalerkinHistory<T>,
) -> (T, T) {
    let sup = hist
        .coeffs
        .iter()
        .map(|c| mass_norm_sq(basis, c).max(T::zero()).sqrt())
        .fold(T::zero(), T::max);
    let n = hist.f_l2.len();
    let h = hist.times[1] - hist.times[0];
    let mut integral = T::zero();
    for (i, v) in hist.f_l2.iter().enumerate() {
        integral = integral + trapz_factor::<T>(i, n) * *v;
    }
    (sup, integral * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use approx::assert_relative_eq;

    #[test]
    fn two_condition_basis_vanishes_to_first_order_at_zero() {
        let basis = build_basis::<f64>(4, BasisVariant::TwoCondition).unwrap();
        for j in 0..4 {
            let v = basis.eval(j, 0.0);
            assert_eq!(v[0], 0.0);
            assert_eq!(v[1], 0.0);
        }
        let one = build_basis::<f64>(4, BasisVariant::OneCondition).unwrap();
        for j in 0..4 {
            let v = one.eval(j, 0.0);
            assert_eq!(v[0], 0.0);
            assert_relative_eq!(v[1], 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn basis_derivatives_match_finite_differences() {
        let basis = build_basis::<f64>(6, BasisVariant::TwoCondition).unwrap();
        let h = 1e-5;
        for j in [0usize, 2, 5] {
            for &x in &[0.3, 1.1, 3.7] {
                let v = basis.eval(j, x);
                let plus = basis.eval(j, x + h);
                let minus = basis.eval(j, x - h);
                let fd = [
                    (plus[0] - minus[0]) / (2.0 * h),
                    (plus[1] - minus[1]) / (2.0 * h),
                    (plus[2] - minus[2]) / (2.0 * h),
                ];
                for (got, want) in fd.iter().zip(&v[1..]) {
                    assert_relative_eq!(got, want, max_relative = 1e-6, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn gram_matrix_is_positive_definite_and_matches_closed_form() {
        let basis = build_basis::<f64>(3, BasisVariant::TwoCondition).unwrap();
        // phi_1 = x^2 e^{-x}: integral x^4 e^{-2x} = 4!/2^5 = 0.75
        assert_relative_eq!(basis.gram[0], 0.75, epsilon = 1e-10);
        let eigs = symmetric_eigenvalues(&basis.gram, 3);
        assert!(eigs.iter().all(|e| *e > 0.0), "{eigs:?}");
        assert!(basis.cond_estimate >= 1.0);
    }

    #[test]
    fn gram_entries_match_quadrature_oracles() {
        // diagonal Gram entry of phi_1 = x e^{-x}: integral x^2 e^{-2x} = 1/4
        let basis = build_basis::<f64>(3, BasisVariant::OneCondition).unwrap();
        assert_relative_eq!(basis.gram[0], 0.25, epsilon = 1e-10);
        // independent check of a third-derivative entry by fine trapezoid
        // (the oracle itself is only ~1e-8 accurate at this resolution)
        let n = 400_000;
        let hi = 45.0;
        let dx = hi / n as f64;
        let mut acc = 0.0;
        for m in 0..=n {
            let x = m as f64 * dx;
            let w = if m == 0 || m == n { 0.5 } else { 1.0 };
            acc += w * basis.eval(2, x)[0] * basis.eval(1, x)[3] * dx;
        }
        assert_relative_eq!(basis.d3_mat[3 + 2], acc, max_relative = 1e-7);
    }

    #[test]
    fn zero_source_stays_zero() {
        let basis = build_basis::<f64>(4, BasisVariant::TwoCondition).unwrap();
        let grid = HalfLineGrid::new(30.0f64, 512, 1.0, 8).unwrap();
        let hist = galerkin_solve(
            &basis,
            1.0,
            0.5,
            |_t| GridFunction::zeros(grid),
            &grid,
            1.0,
            100,
        )
        .unwrap();
        assert!(hist.coeffs.iter().all(|c| c.iter().all(|v| v.norm() == 0.0)));
        let res = mass_identity_residual(&basis, &hist);
        assert!(res.iter().all(|r| r.abs() == 0.0));
    }

    #[test]
    fn scalar_mode_matches_variation_of_constants() {
        // k = 1: i m c' + B c = b(t) with b(t) = cos(t) * m1, solved in
        // closed form c(t) = -i/m int_0^t e^{i B (t-s)/ m ... } -- evaluated
        // here by fine quadrature of the Duhamel integral.
        let basis = build_basis::<f64>(1, BasisVariant::TwoCondition).unwrap();
        let grid = HalfLineGrid::new(30.0f64, 1024, 1.0, 8).unwrap();
        let (a, b) = (0.8, -0.3);
        let hist = galerkin_solve(
            &basis,
            a,
            b,
            |t: f64| GridFunction::from_fn(grid, move |x| cx(t.cos() * x * x * (-x).exp(), 0.0)),
            &grid,
            1.0,
            400,
        )
        .unwrap();

        let m = basis.gram[0];
        let bc = cx::<f64>(a * basis.d2_mat[0], -(b * basis.d1_mat[0] + basis.d3_mat[0]));
        // c' = -i/m (b(t) - bc c) = (i bc / m) c - (i/m) b(t)
        let lam = cx::<f64>(0.0, 1.0) * bc / m;
        // c' = lam c - (i/m) b(t), c(t) = -(i/m) int_0^t e^{lam (t-s)} cos(s) m ds
        let t_end = 1.0;
        let steps = 200_000;
        let ds = t_end / steps as f64;
        let mut acc = cx::<f64>(0.0, 0.0);
        for i in 0..=steps {
            let s = i as f64 * ds;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += (lam * (t_end - s)).exp() * s.cos() * w;
        }
        let exact = cx::<f64>(0.0, -1.0) * acc * ds;
        let got = hist.coeffs.last().unwrap()[0];
        assert!((got - exact).norm() < 1e-8, "got {got:?}, exact {exact:?}");
    }

    #[test]
    fn mass_identity_residual_is_ode_tolerance_small() {
        let basis = build_basis::<f64>(8, BasisVariant::TwoCondition).unwrap();
        let grid = HalfLineGrid::new(40.0f64, 1024, 1.0, 8).unwrap();
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
        let max = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        assert!(max < 1e-8, "mass identity residual {max}");
        let (sup, bound) = sup_norm_vs_source_bound(&basis, &hist);
        assert!(sup <= bound * (1.0 + 1e-9), "sup {sup} vs bound {bound}");
    }

    #[test]
    fn adjoint_identity_carries_boundary_flux() {
        let basis = build_basis::<f64>(8, BasisVariant::OneCondition).unwrap();
        let grid = HalfLineGrid::new(40.0f64, 1024, 1.0, 8).unwrap();
        let hist = galerkin_solve(
            &basis,
            0.7,
            -0.2,
            |t: f64| {
                GridFunction::from_fn(grid, move |x| {
                    Complex::from_polar(x * (-x).exp(), -t + 0.5 * x)
                })
            },
            &grid,
            1.0,
            1000,
        )
        .unwrap();
        // with the flux term the residual vanishes; without it the identity
        // must fail once the trace is active
        let with_flux = adjoint_identity_residual(&basis, &hist);
        let without = mass_identity_residual(&basis, &hist);
        let max_with = with_flux.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let max_without = without.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        assert!(max_with < 1e-8, "adjoint identity residual {max_with}");
        assert!(max_without > 1e-4, "flux term unexpectedly inactive: {max_without}");
        let (sup, bound) = sup_norm_vs_source_bound(&basis, &hist);
        assert!(sup <= bound * (1.0 + 1e-9));
    }

    /// Same problem, two solvers. The Galerkin basis carries the extra
    /// constraint phi'(0) = 0 that the Dirichlet solution's derivative trace
    /// violates, so agreement improves with k only algebraically; the test
    /// pins the trend and the absolute level at moderate k.
    #[test]
    fn cross_validation_against_finite_difference_solver() {
        use crate::linear::solve_linear;
        use crate::problem::{BoundarySignal, SourceTerm};
        let grid = HalfLineGrid::new(30.0f64, 1024, 0.25, 64).unwrap();
        let (a, b) = (1.0, 0.5);
        let f_fn = |t: f64, x: f64| {
            Complex::from_polar(x * x * (-x).exp(), 0.0) * cx::<f64>(t.cos(), 0.2 * t.sin())
        };
        let fd = solve_linear(
            grid,
            a,
            b,
            &GridFunction::zeros(grid),
            &BoundarySignal::Zero,
            &SourceTerm::analytic(f_fn),
        )
        .unwrap();
        let fd_last = fd.slices.last().unwrap();

        let mut errs = Vec::new();
        for &k in &[8usize, 24] {
            let basis = build_basis::<f64>(k, BasisVariant::TwoCondition).unwrap();
            let hist = galerkin_solve(
                &basis,
                a,
                b,
                |t: f64| GridFunction::from_fn(grid, move |x| f_fn(t, x)),
                &grid,
                0.25,
                100,
            )
            .unwrap();
            let vk = basis.synthesize(hist.coeffs.last().unwrap(), &grid);
            let mut err = 0.0f64;
            for j in 0..grid.n_nodes() {
                if grid.x(j) <= 10.0 {
                    err = err.max((vk[j] - fd_last[j]).norm());
                }
            }
            errs.push(err);
        }
        assert!(errs[1] < errs[0] * 0.8, "no improvement with k: {errs:?}");
        assert!(errs[1] < 2e-2, "Galerkin/FD mismatch too large: {errs:?}");
    }

    #[test]
    fn overgrown_basis_is_rejected_as_ill_conditioned() {
        assert!(matches!(
            build_basis::<f64>(40, BasisVariant::TwoCondition),
            Err(crate::error::Error::IllConditionedBasis { .. })
        ));
    }
}
