//! Gauss–Legendre quadrature: cached nodes, panel sums, and a
//! halving-refinement driver used by the oscillatory-kernel integrals.

use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`; memoized.
pub fn gauss_legendre(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: LazyLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
        LazyLock::new(|| Mutex::new(HashMap::new()));
    let mut cache = CACHE.lock().unwrap();
    if let Some(v) = cache.get(&order) {
        return Arc::clone(v);
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let arc = Arc::new((nodes, weights));
    cache.insert(order, Arc::clone(&arc));
    arc
}

/// Integrates `f` over `[a, b]` with a single Gauss–Legendre panel.
pub fn gl_panel<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64, order: usize) -> Complex64 {
    let nw = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in nw.0.iter().zip(nw.1.iter()) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Integrates over `[a, b]` split into uniform panels of width ≤ `max_width`.
pub fn gl_uniform<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    max_width: f64,
    order: usize,
) -> Complex64 {
    debug_assert!(b >= a && max_width > 0.0);
    let count = (((b - a) / max_width).ceil() as usize).max(1);
    let w = (b - a) / count as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..count {
        acc += gl_panel(f, a + k as f64 * w, a + (k + 1) as f64 * w, order);
    }
    acc
}

/// Halving-refinement driver: integrates with panel width `w`, then `w/2`, …
/// until two successive refinements differ by less than
/// `max(abs_tol, rel_tol·|I|)`; errors out after `max_halvings`.
pub fn gl_refine<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    start_width: f64,
    order: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_halvings: usize,
) -> Result<Complex64> {
    let mut width = start_width;
    let mut prev = gl_uniform(f, a, b, width, order);
    let mut diff = f64::INFINITY;
    for _ in 0..max_halvings {
        width *= 0.5;
        let next = gl_uniform(f, a, b, width, order);
        diff = (next - prev).norm();
        let tol = abs_tol.max(rel_tol * next.norm());
        if diff <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergent { achieved: diff, requested: abs_tol })
}
