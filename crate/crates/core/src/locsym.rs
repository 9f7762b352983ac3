//! Kernels and convolution-bound quantities on the quotient `M = Γ\H^n`:
//! the orbit-summed wave kernel, the exponential weight `μ`, Kunze–Stein and
//! bilinear integral bounds, and the dispersive-decay experiment.
//!
//! The summed kernel truncates the Γ-sum at orbit radius `R` and bounds the
//! remainder by an empirical kernel envelope times a Poincaré tail: if
//! `|ω(d)| ≤ C(1+d)e^{-ρd}` on the computed range (the constant is measured,
//! the profile is the radial bound the theory provides), then the omitted
//! terms sum to at most `C · sup_{d≥R}[(1+d)e^{-(ρ-s)d}] · Σ_{omitted} e^{-sd}`
//! for any `s < ρ`, and the last factor is the groups-module tail bound.

use crate::geometry::HPoint;
use crate::groups::{enumerate_orbit, poincare_from_samples, GroupPresentation, OrbitSample};
use crate::kernels::{fit_decay_exponent, omega0, omega_inf_tilde, FitResult, WaveParams};
use crate::spherical::{phi_lambda, sphere_area, RadialFunction, SpaceParams};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

/// One truncated Γ-sum of a wave kernel.
#[derive(Debug, Clone, Copy)]
pub struct QuotientKernelValue {
    pub value: Complex64,
    pub truncation_radius: f64,
    /// Upper bound for the omitted orbit terms (see module docs).
    pub tail_bound: f64,
    /// True only when every summand was reliable, no orbit point sat in the
    /// light-cone band, and the tail is small against the value
    /// (`≤ 1e-3·|value|` or `≤ 1e-9` absolute).
    pub reliable: bool,
}

/// Which frequency range of the kernel to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPart {
    #[default]
    Full,
    LowOnly,
    HighOnly,
}

/// Default weight-exponent margin: halfway between the exponent estimate and
/// its ceiling, `ε = (ρ - δ̂)/2`.
pub fn default_epsilon(params: &SpaceParams, delta_hat: f64) -> f64 {
    0.5 * (params.rho - delta_hat)
}

/// Radial weight `μ(r) = e^{(δ̂+ε)r}`; requires `0 < ε < ρ - δ̂`.
pub fn weight_mu(params: &SpaceParams, delta_hat: f64, eps: f64, r: f64) -> Result<f64> {
    check_epsilon(params, delta_hat, eps)?;
    if r < 0.0 {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    Ok(((delta_hat + eps) * r).exp())
}

fn check_epsilon(params: &SpaceParams, delta_hat: f64, eps: f64) -> Result<()> {
    if !(delta_hat >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "critical-exponent estimate must be nonnegative, got {delta_hat}"
        )));
    }
    if !(eps > 0.0 && eps < params.rho - delta_hat) {
        return Err(Error::InvalidParameter(format!(
            "weight margin must satisfy 0 < eps < rho - delta = {}, got {eps}",
            params.rho - delta_hat
        )));
    }
    Ok(())
}

/// One kernel term at orbit distance `d`.
struct Term {
    value: Complex64,
    reliable: bool,
    in_band: bool,
}

fn kernel_term(
    params: &SpaceParams,
    wp: &WaveParams,
    d: f64,
    part: KernelPart,
) -> Result<Term> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut reliable = true;
    let mut in_band = false;
    if part != KernelPart::HighOnly {
        value += omega0(params, wp, d)?;
    }
    if part != KernelPart::LowOnly {
        match omega_inf_tilde(params, wp, d) {
            Ok(h) => {
                value += h.value;
                reliable &= h.reliable;
            }
            Err(Error::LightConeBand { .. }) => {
                // high part omitted for this term; flagged, never repaired
                in_band = true;
                reliable = false;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Term { value, reliable, in_band })
}

/// `ω̂_t^σ(x,y) = Σ_{d(x,γy)≤R} ω_t^σ(d(x,γy))` with a tail bound.
pub fn summed_kernel(
    gp: &GroupPresentation,
    params: &SpaceParams,
    wp: &WaveParams,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
) -> Result<QuotientKernelValue> {
    summed_kernel_part(gp, params, wp, x, y, radius, KernelPart::Full)
}

/// [`summed_kernel`] restricted to one frequency range of the kernel.
pub fn summed_kernel_part(
    gp: &GroupPresentation,
    params: &SpaceParams,
    wp: &WaveParams,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
    part: KernelPart,
) -> Result<QuotientKernelValue> {
    let orbit = enumerate_orbit(gp, x, y, radius)?;
    summed_kernel_from_orbit(gp, params, wp, x, y, radius, &orbit, part)
}

/// [`summed_kernel_part`] on a pre-enumerated orbit (the orbit does not
/// depend on `t`, so experiments enumerate once per point pair).
#[allow(clippy::too_many_arguments)]
pub fn summed_kernel_from_orbit(
    gp: &GroupPresentation,
    params: &SpaceParams,
    wp: &WaveParams,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
    orbit: &[OrbitSample],
    part: KernelPart,
) -> Result<QuotientKernelValue> {
    if gp.dim() != params.n {
        return Err(Error::DimensionMismatch { left: gp.dim(), right: params.n });
    }
    let delta = gp.delta_hint();
    if delta >= params.rho - 0.1 {
        return Err(Error::InvalidParameter(format!(
            "critical-exponent estimate {delta} too close to rho = {}; the quotient-kernel \
             theory requires delta < rho with margin",
            params.rho
        )));
    }
    let eps = default_epsilon(params, delta);
    let s = delta + eps;
    let mut cache: HashMap<u64, Term> = HashMap::new();
    let mut value = Complex64::new(0.0, 0.0);
    let mut reliable = true;
    let mut c_emp = 0.0f64;
    for o in orbit {
        let term = match cache.get(&o.distance.to_bits()) {
            Some(t) => t,
            None => {
                let t = kernel_term(params, wp, o.distance, part)?;
                cache.entry(o.distance.to_bits()).or_insert(t)
            }
        };
        value += term.value;
        reliable &= term.reliable && !term.in_band;
        let envelope = (1.0 + o.distance) * (-params.rho * o.distance).exp();
        c_emp = c_emp.max(term.value.norm() / envelope);
    }
    // sup_{d ≥ R} (1+d) e^{-(ρ-s)d}, attained at max(R, 1/(ρ-s) - 1)
    let c = params.rho - s;
    let d_star = radius.max(1.0 / c - 1.0);
    let env = (1.0 + d_star) * (-c * d_star).exp();
    let p_tail = poincare_from_samples(gp, s, x, y, radius, orbit)?.tail_bound;
    let tail_bound = c_emp * env * p_tail;
    let tail_ok = tail_bound <= 1e-3 * value.norm() || tail_bound <= 1e-9;
    Ok(QuotientKernelValue {
        value,
        truncation_radius: radius,
        tail_bound,
        reliable: reliable && tail_ok,
    })
}

/// `A_n ∫_0^∞ |ψ(r)| φ_0(r) sinh^{n-1} r dr` — the integral majorizing the
/// `L²(M) → L²(M)` convolution norm of a radial kernel `ψ`.
pub fn kunze_stein_bound(params: &SpaceParams, psi: &RadialFunction) -> Result<f64> {
    let grid = psi.grid();
    let n = params.n;
    // tail admissibility on the measure-weighted integrand
    let weighted: Vec<f64> = grid
        .iter()
        .zip(psi.values())
        .map(|(&r, v)| v.norm() * phi0_or_nan(params, r) * r.sinh().powi(n as i32 - 1))
        .collect();
    let max = weighted.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    check_integrand_tail(grid, &weighted, max, "Kunze-Stein integrand |psi| phi_0 sinh^{n-1}")?;
    let gl = crate::quad::gauss_legendre(8);
    let an = sphere_area(n);
    let mut acc = 0.0;
    for cell in grid.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&xx, &ww) in gl.0.iter().zip(gl.1.iter()) {
            let r = mid + half * xx;
            let f = psi.eval(r)?.norm();
            acc += half * ww * f * phi0_at(params, r)? * r.sinh().powi(n as i32 - 1);
        }
    }
    Ok(an * acc)
}

/// `( A_n ∫_0^∞ φ_0(r) μ(r)^{-1} |g(r)|^{q/2} sinh^{n-1} r dr )^{2/q}` — the
/// computable side of the weighted bilinear convolution bound.
pub fn bilinear_bound(
    params: &SpaceParams,
    delta_hat: f64,
    eps: f64,
    g: &RadialFunction,
    q: f64,
) -> Result<f64> {
    check_epsilon(params, delta_hat, eps)?;
    if !(q >= 2.0) {
        return Err(Error::InvalidParameter(format!("bilinear exponent needs q >= 2, got {q}")));
    }
    let grid = g.grid();
    let n = params.n;
    let s = delta_hat + eps;
    let weighted: Vec<f64> = grid
        .iter()
        .zip(g.values())
        .map(|(&r, v)| {
            phi0_or_nan(params, r)
                * (-s * r).exp()
                * v.norm().powf(q / 2.0)
                * r.sinh().powi(n as i32 - 1)
        })
        .collect();
    let max = weighted.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    check_integrand_tail(grid, &weighted, max, "bilinear integrand phi_0 mu^{-1} |g|^{q/2} sinh^{n-1}")?;
    let gl = crate::quad::gauss_legendre(8);
    let an = sphere_area(n);
    let mut acc = 0.0;
    for cell in grid.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&xx, &ww) in gl.0.iter().zip(gl.1.iter()) {
            let r = mid + half * xx;
            let f = g.eval(r)?.norm().powf(q / 2.0);
            acc += half * ww * f * (-s * r).exp() * phi0_at(params, r)? * r.sinh().powi(n as i32 - 1);
        }
    }
    Ok((an * acc).powf(2.0 / q))
}

/// Requires the trailing 10% of the sampled integrand to sit below
/// `1e-8 · max`; otherwise reports the measured growth rate of the tail.
fn check_integrand_tail(grid: &[f64], weighted: &[f64], max: f64, what: &str) -> Result<()> {
    let start = weighted.len().saturating_sub(weighted.len() / 10).min(weighted.len() - 1);
    let bad = weighted[start..].iter().any(|&v| v > 1e-8 * max);
    if bad {
        // measured exponential rate over the tail window, for the diagnostic
        let pts: Vec<(f64, f64)> = grid[start..]
            .iter()
            .zip(&weighted[start..])
            .filter(|(_, &v)| v > 0.0)
            .map(|(&r, &v)| (r, v.ln()))
            .collect();
        let rate = if pts.len() >= 2 {
            let nn = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / nn;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / nn;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            if sxx > 0.0 {
                sxy / sxx
            } else {
                f64::NAN
            }
        } else {
            f64::NAN
        };
        return Err(Error::DivergentTail {
            detail: format!(
                "{what} does not decay: tail grows at exp rate {rate:.3} per unit r \
                 (needed strongly negative) near r = {:.2}",
                grid[grid.len() - 1]
            ),
        });
    }
    Ok(())
}

fn phi0_at(params: &SpaceParams, r: f64) -> Result<f64> {
    phi_lambda(params, 0.0, r)
}

fn phi0_or_nan(params: &SpaceParams, r: f64) -> f64 {
    phi_lambda(params, 0.0, r).unwrap_or(f64::NAN)
}

/// One time-slice of the decay experiment.
#[derive(Debug, Clone)]
pub struct DispersiveRow {
    pub t: f64,
    pub values: Vec<QuotientKernelValue>,
    pub sup_kernel: f64,
    /// False as soon as any pair's kernel value is unreliable; such rows are
    /// excluded from the decay fits.
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct DispersiveReport {
    pub rows: Vec<DispersiveRow>,
    /// Fit over the small-time window, when at least 5 reliable rows land in it.
    pub small_fit: Option<FitResult>,
    pub large_fit: Option<FitResult>,
    pub small_window: (f64, f64),
    pub large_window: (f64, f64),
    /// Reference slopes: `-(n-1)/2` small-time, `-3/2` large-time.
    pub small_target: f64,
    pub large_target: f64,
}

pub const SMALL_WINDOW: (f64, f64) = (1.0 / 64.0, 0.25);
pub const LARGE_WINDOW: (f64, f64) = (4.0, 64.0);

/// Sup of `|ω̂_t^σ|` over sample pairs for each `t`, with log–log decay fits
/// over the small- and large-time windows.
#[allow(clippy::too_many_arguments)]
pub fn dispersive_decay_experiment(
    gp: &GroupPresentation,
    params: &SpaceParams,
    sigma: Complex64,
    q: f64,
    t_grid: &[f64],
    sample_pairs: &[(HPoint, HPoint)],
    part: KernelPart,
    radius: f64,
) -> Result<DispersiveReport> {
    if !(q > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "dispersive experiment needs q > 2, got {q}"
        )));
    }
    let need = (params.n as f64 + 1.0) * (0.5 - 1.0 / q);
    if sigma.re < need - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "Re sigma = {} below the dispersive hypothesis (n+1)(1/2 - 1/q) = {need}",
            sigma.re
        )));
    }
    if sample_pairs.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, need: 1 });
    }
    let orbits: Vec<Vec<OrbitSample>> = sample_pairs
        .iter()
        .map(|(x, y)| enumerate_orbit(gp, x, y, radius))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let wp = WaveParams::new(t, params.rho, params.rho + 1.0, sigma)?;
        let mut values = Vec::with_capacity(sample_pairs.len());
        for ((x, y), orbit) in sample_pairs.iter().zip(&orbits) {
            values.push(summed_kernel_from_orbit(gp, params, &wp, x, y, radius, orbit, part)?);
        }
        let sup_kernel = values.iter().map(|v| v.value.norm()).fold(0.0f64, f64::max);
        let reliable = values.iter().all(|v| v.reliable);
        rows.push(DispersiveRow { t, values, sup_kernel, reliable });
    }
    let fit_in = |window: (f64, f64)| -> Option<FitResult> {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|row| {
                row.reliable
                    && row.sup_kernel > 0.0
                    && row.t >= window.0 * (1.0 - 1e-9)
                    && row.t <= window.1 * (1.0 + 1e-9)
            })
            .map(|row| (row.t, row.sup_kernel))
            .collect();
        if pts.len() < 5 {
            return None;
        }
        fit_decay_exponent(&pts).ok()
    };
    let small_fit = fit_in(SMALL_WINDOW);
    let large_fit = fit_in(LARGE_WINDOW);
    Ok(DispersiveReport {
        rows,
        small_fit,
        large_fit,
        small_window: SMALL_WINDOW,
        large_window: LARGE_WINDOW,
        small_target: -(params.n as f64 - 1.0) / 2.0,
        large_target: -1.5,
    })
}

/// `x` and all orbit points within the experiment radius keep clear of the
/// light-cone band for every `t` in the grid (precondition helper for
/// experiment setup; returns the worst clearance found).
pub fn min_band_clearance(
    gp: &GroupPresentation,
    x: &HPoint,
    y: &HPoint,
    t_grid: &[f64],
    radius: f64,
) -> Result<f64> {
    let orbit = enumerate_orbit(gp, x, y, radius)?;
    let mut worst = f64::INFINITY;
    for o in &orbit {
        for &t in t_grid {
            worst = worst.min((o.distance - t.abs()).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply, boost, dist, origin};
    use crate::kernels::LIGHT_CONE_BAND;
    use crate::spherical::uniform_grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn h3() -> SpaceParams {
        SpaceParams::new(3).unwrap()
    }

    #[test]
    fn weight_examples_and_validation() {
        let p = h3();
        assert_abs_diff_eq!(weight_mu(&p, 0.1, 0.2, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            weight_mu(&p, 0.0, 0.5, 2.0).unwrap(),
            std::f64::consts::E,
            epsilon = 1e-12
        );
        let mut prev = 0.0;
        for r in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let m = weight_mu(&p, 0.2, 0.3, r).unwrap();
            assert!(m > prev);
            prev = m;
        }
        assert!(weight_mu(&p, 0.0, 0.0, 1.0).is_err());
        assert!(weight_mu(&p, 0.0, 1.0, 1.0).is_err()); // eps = rho - delta not allowed
        assert!(weight_mu(&p, 0.6, 0.5, 1.0).is_err());
        assert_abs_diff_eq!(default_epsilon(&p, 0.5), 0.25);
    }

    #[test]
    fn trivial_group_equals_direct_kernel() {
        let p = h3();
        let gp = GroupPresentation::trivial(3).unwrap();
        let o = origin(3).unwrap();
        let x = apply(&boost(2.0, 1, 3).unwrap(), &o).unwrap();
        let wp = WaveParams::new(0.5, 1.0, 2.0, Complex64::new(2.0, 1.0)).unwrap();
        let qv = summed_kernel(&gp, &p, &wp, &x, &o, 5.0).unwrap();
        let d = dist(&x, &o).unwrap();
        let direct = omega0(&p, &wp, d).unwrap() + omega_inf_tilde(&p, &wp, d).unwrap().value;
        assert!((qv.value - direct).norm() <= 1e-9 * direct.norm());
        assert_eq!(qv.tail_bound, 0.0);
        assert!(qv.reliable);
    }

    #[test]
    fn cyclic_sum_matches_scalar_loop_oracle() {
        let p = h3();
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        // real σ at the strip edge: the regularized high part vanishes
        // identically, so the full kernel is the low-frequency sum
        let wp = WaveParams::new(2.0, 1.0, 2.0, Complex64::new(2.0, 0.0)).unwrap();
        let qv = summed_kernel(&gp, &p, &wp, &o, &o, 12.5).unwrap();
        let mut oracle = omega0(&p, &wp, 0.0).unwrap();
        for k in 1..=3 {
            oracle += 2.0 * omega0(&p, &wp, 4.0 * k as f64).unwrap();
        }
        assert!(
            (qv.value - oracle).norm() <= 1e-10 * oracle.norm(),
            "sum {} vs oracle {}",
            qv.value,
            oracle
        );
    }

    #[test]
    fn tail_bound_decreases_with_radius() {
        let p = h3();
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        let wp = WaveParams::new(2.0, 1.0, 2.0, Complex64::new(2.0, 0.0)).unwrap();
        let mut prev = f64::INFINITY;
        for radius in [6.0, 10.0, 14.0] {
            let qv = summed_kernel(&gp, &p, &wp, &o, &o, radius).unwrap();
            assert!(qv.tail_bound <= prev, "tail grew at R = {radius}");
            assert!(qv.tail_bound >= 0.0);
            prev = qv.tail_bound;
        }
    }

    #[test]
    fn gamma_periodicity_and_symmetry() {
        let p = h3();
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        let wp = WaveParams::new(2.0, 1.0, 2.0, Complex64::new(2.0, 0.0)).unwrap();
        let base = summed_kernel(&gp, &p, &wp, &o, &o, 12.5).unwrap();
        let a = &gp.generators()[0];
        let ao = apply(a, &o).unwrap();
        let shifted = summed_kernel(&gp, &p, &wp, &ao, &o, 12.5).unwrap();
        assert!((base.value - shifted.value).norm() <= 1e-9 * base.value.norm());
        // symmetry in (x, y): orbit distances are shared under γ ↔ γ⁻¹
        let x = apply(&boost(0.4, 2, 3).unwrap(), &o).unwrap();
        let xy = summed_kernel(&gp, &p, &wp, &x, &o, 12.5).unwrap();
        let yx = summed_kernel(&gp, &p, &wp, &o, &x, 12.5).unwrap();
        assert!((xy.value - yx.value).norm() <= 1e-9 * xy.value.norm());
    }

    #[test]
    fn kunze_stein_zero_and_example() {
        let p = h3();
        let grid = uniform_grid(12.0, 0.1);
        let zero = RadialFunction::from_real_fn(grid.clone(), |_| 0.0).unwrap();
        assert_eq!(kunze_stein_bound(&p, &zero).unwrap(), 0.0);

        let grid = uniform_grid(25.0, 0.05);
        let psi = RadialFunction::from_real_fn(grid, |r| (-2.0 * r).exp()).unwrap();
        let ks = kunze_stein_bound(&p, &psi).unwrap();
        assert!(ks.is_finite() && ks > 0.0);
        // independent path: the spherical transform of |ψ| at λ = 0
        let grid = uniform_grid(25.0, 0.05);
        let psi = RadialFunction::from_real_fn(grid, |r| (-2.0 * r).exp()).unwrap();
        let tr = crate::spherical::spherical_transform(&p, &psi, 0.0).unwrap();
        assert_relative_eq!(ks, tr.re, max_relative = 1e-8);
    }

    #[test]
    fn kunze_stein_detects_divergence() {
        let p = h3();
        let grid = uniform_grid(20.0, 0.1);
        let psi = RadialFunction::from_real_fn(grid, |r| (-0.5 * r).exp()).unwrap();
        // |ψ|φ0 sinh² ~ e^{1.5r}: nonintegrable
        match kunze_stein_bound(&p, &psi) {
            Err(Error::DivergentTail { detail }) => {
                assert!(detail.contains("rate"), "diagnostic should name the rate: {detail}")
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bilinear_zero_rejects_bad_q_and_q2_reduction() {
        let p = h3();
        let grid = uniform_grid(25.0, 0.05);
        let zero = RadialFunction::from_real_fn(grid.clone(), |_| 0.0).unwrap();
        assert_eq!(bilinear_bound(&p, 0.0, 0.25, &zero, 3.0).unwrap(), 0.0);
        let g = RadialFunction::from_real_fn(grid.clone(), |r| (-3.0 * r).exp()).unwrap();
        assert!(bilinear_bound(&p, 0.0, 0.25, &g, 1.5).is_err());
        // q = 2: bilinear bound is the Kunze–Stein integral of μ^{-1}g
        let b2 = bilinear_bound(&p, 0.0, 0.25, &g, 2.0).unwrap();
        let weighted =
            RadialFunction::from_real_fn(grid, |r| (-0.25 * r).exp() * (-3.0 * r).exp()).unwrap();
        let ks = kunze_stein_bound(&p, &weighted).unwrap();
        assert_relative_eq!(b2, ks, max_relative = 1e-10);
    }

    #[test]
    fn bilinear_proof_substitution_finite_above_q2_divergent_at_q2() {
        let p = h3();
        let (delta, eps) = (0.0, 0.25);
        let grid = uniform_grid(90.0, 0.1);
        let g = RadialFunction::from_fn(grid, |r| {
            let mu = ((delta + eps) * r).exp();
            Complex64::new(mu * phi0_or_nan(&p, r), 0.0)
        })
        .unwrap();
        let b3 = bilinear_bound(&p, delta, eps, &g, 3.0).unwrap();
        assert!(b3.is_finite() && b3 > 0.0, "q=3 value should be finite, got {b3}");
        match bilinear_bound(&p, delta, eps, &g, 2.0) {
            Err(Error::DivergentTail { .. }) => {}
            other => panic!("q=2 with the proof substitution must diverge, got {other:?}"),
        }
    }

    #[test]
    fn bilinear_log_convex_in_inverse_q() {
        let p = h3();
        let grid = uniform_grid(30.0, 0.05);
        let g = RadialFunction::from_real_fn(grid, |r| (-2.0 * r).exp()).unwrap();
        let lnb = |u: f64| bilinear_bound(&p, 0.0, 0.25, &g, 1.0 / u).unwrap().ln();
        let (a, b, c) = (lnb(0.25), lnb(0.30), lnb(0.35));
        assert!(b <= 0.5 * (a + c) + 1e-9, "lnB not convex: {a} {b} {c}");
    }

    #[test]
    fn dispersive_experiment_trivial_group_structure() {
        let p = h3();
        let gp = GroupPresentation::trivial(3).unwrap();
        let o = origin(3).unwrap();
        let sigma = Complex64::new(2.0, 0.0);
        let ts: Vec<f64> = (0..9).map(|k| 4.0 * (64.0f64 / 4.0).powf(k as f64 / 8.0)).collect();
        let report = dispersive_decay_experiment(
            &gp,
            &p,
            sigma,
            4.0,
            &ts,
            &[(o.clone(), o.clone())],
            KernelPart::Full,
            5.0,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 9);
        assert!(report.rows.iter().all(|r| r.reliable));
        assert!(report.small_fit.is_none());
        let fit = report.large_fit.expect("large-window fit");
        assert!(fit.slope < -1.0, "kernel should decay, slope = {}", fit.slope);
        assert!(fit.r_squared > 0.9);
    }

    #[test]
    fn dispersive_experiment_rejects_weak_sigma() {
        let p = h3();
        let gp = GroupPresentation::trivial(3).unwrap();
        let o = origin(3).unwrap();
        let r = dispersive_decay_experiment(
            &gp,
            &p,
            Complex64::new(0.5, 0.0),
            8.0,
            &[4.0, 8.0, 16.0, 32.0, 64.0],
            &[(o.clone(), o.clone())],
            KernelPart::Full,
            5.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn band_clearance_reports_worst_case() {
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        let c = min_band_clearance(&gp, &o, &o, &[3.9, 8.05], 12.5).unwrap();
        assert_abs_diff_eq!(c, 0.05, epsilon = 1e-12);
        assert!(c < LIGHT_CONE_BAND);
    }
}
