//! Gauss–Legendre quadrature used for the cutoff function and the Galerkin
//! matrices (grid quantities use composite trapezoid, see `norms`).

use crate::scalar::{rl, Scalar};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence, computed in f64 and cast.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes.into_iter().map(rl).collect(), weights.into_iter().map(rl).collect())
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Reusable composite Gauss–Legendre rule.
#[derive(Clone, Debug)]
pub struct GaussRule<T: Scalar> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussRule<T> {
    pub fn new(points: usize) -> Self {
        let (nodes, weights) = gauss_legendre(points);
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]` split into `panels` equal panels.
    pub fn integrate(&self, a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
        let half = rl::<T>(0.5);
        let width = (b - a) / rl::<T>(panels as f64);
        let mut total = T::zero();
        for p in 0..panels {
            let lo = a + width * rl::<T>(p as f64);
            let mid = lo + width * half;
            let scale = width * half;
            let mut acc = T::zero();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc = acc + *w * f(mid + scale * *x);
            }
            total = total + acc * scale;
        }
        total
    }
}
