//! Exponent arithmetic for the dispersive theory on `H^n` and its quotients:
//! admissible Strichartz pairs in the three dimensional regimes, the
//! Sobolev-shifted threshold `σ(p,q)`, and the small-data global
//! well-posedness thresholds and regularity curves for power nonlinearities.
//!
//! Everything here is closed-form real arithmetic; no quadrature is involved.

use crate::{Error, Result};

/// A pair of Lebesgue exponents stored as `(1/p, 1/q) ∈ [0, 1/2]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    inv_p: f64,
    inv_q: f64,
}

impl ExponentPair {
    pub fn new(inv_p: f64, inv_q: f64) -> Result<Self> {
        for (name, v) in [("1/p", inv_p), ("1/q", inv_q)] {
            if !v.is_finite() || !(0.0..=0.5).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1/2], got {v}"
                )));
            }
        }
        Ok(ExponentPair { inv_p, inv_q })
    }

    pub fn inv_p(&self) -> f64 {
        self.inv_p
    }

    pub fn inv_q(&self) -> f64 {
        self.inv_q
    }
}

fn check_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::BadDimension { got: n, min });
    }
    Ok(())
}

/// Membership in the admissible region for dimension `n ≥ 2`.
///
/// For `n ≥ 4` the region is the part of the open square
/// `(0,1/2) × (0,1/2)` on or above the line `1/p = ((n-1)/2)(1/2 - 1/q)`,
/// together with the two corner points `(0, 1/2)` and
/// `(1/2, 1/2 - 1/(n-1))`. For `n = 3` the line itself is excluded (strict
/// inequality) and only the corner `(0, 1/2)` survives; the `p = 2` edge is
/// excluded entirely. For `n = 2` the line has slope `1/2` and is again
/// excluded.
pub fn is_admissible(n: usize, pair: ExponentPair) -> Result<bool> {
    check_dim(n, 2)?;
    let (ip, iq) = (pair.inv_p, pair.inv_q);
    let corner = ip == 0.0 && iq == 0.5;
    let open_square = ip > 0.0 && ip < 0.5 && iq > 0.0 && iq < 0.5;
    Ok(match n {
        2 => corner || (open_square && ip > 0.5 * (0.5 - iq)),
        3 => corner || (open_square && ip > 0.5 - iq),
        _ => {
            let nf = n as f64;
            let keel_tao = ip == 0.5 && iq == 0.5 - 1.0 / (nf - 1.0);
            corner || keel_tao || (open_square && ip >= (nf - 1.0) / 2.0 * (0.5 - iq))
        }
    })
}

/// Sobolev regularity threshold
/// `σ(p,q) = ((n+1)/2)(1/2 - 1/q) + max{0, ((n-1)/2)(1/2 - 1/q) - 1/p}`.
///
/// The max term is added as an exact `0.0` whenever the pair lies on or above
/// the admissibility line, so on that region the value coincides bit-for-bit
/// with `((n+1)/2)(1/2 - 1/q)`.
pub fn sigma_pq(n: usize, pair: ExponentPair) -> Result<f64> {
    check_dim(n, 2)?;
    let nf = n as f64;
    let base = (nf + 1.0) / 2.0 * (0.5 - pair.inv_q);
    let gap = (nf - 1.0) / 2.0 * (0.5 - pair.inv_q) - pair.inv_p;
    Ok(base + if gap > 0.0 { gap } else { 0.0 })
}

/// The five nonlinearity thresholds governing small-data global
/// well-posedness, `1 < γ₁ ≤ γ₂ ≤ γ_c ≤ γ₃ ≤ γ₄`.
#[derive(Debug, Clone, Copy)]
pub struct GwpThresholds {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_c: f64,
    pub gamma3: f64,
    pub gamma4: f64,
}

/// Threshold table for dimension `n ≥ 3`. `γ₃` and `γ₄` switch closed forms
/// between `n ≤ 5` and `n ≥ 6`; the ordering invariant is checked at
/// construction in either branch.
pub fn gwp_thresholds(n: usize) -> Result<GwpThresholds> {
    check_dim(n, 3)?;
    let nf = n as f64;
    let gamma1 = 1.0 + 3.0 / nf;
    let gamma2 = 1.0 + 2.0 / ((nf - 1.0) / 2.0 + 2.0 / (nf - 1.0));
    let gamma_c = 1.0 + 4.0 / (nf - 1.0);
    let gamma3 = if n <= 5 {
        ((nf + 6.0) / 2.0
            + 2.0 / (nf - 1.0)
            + (4.0 * nf + ((6.0 - nf) / 2.0 + 2.0 / (nf - 1.0)).powi(2)).sqrt())
            / nf
    } else {
        1.0 + 2.0 / ((nf - 1.0) / 2.0 - 1.0 / (nf - 1.0))
    };
    let gamma4 = if n <= 5 {
        1.0 + 4.0 / (nf - 2.0)
    } else {
        (nf - 1.0) / 2.0 + 3.0 / (nf + 1.0)
            - (((nf - 3.0) / 2.0 + 3.0 / (nf + 1.0)).powi(2) - 4.0 * (nf - 1.0) / (nf + 1.0))
                .sqrt()
    };
    let t = GwpThresholds { gamma1, gamma2, gamma_c, gamma3, gamma4 };
    let seq = [t.gamma1, t.gamma2, t.gamma_c, t.gamma3, t.gamma4];
    for w in seq.windows(2) {
        if w[0] > w[1] + 1e-12 {
            return Err(Error::InvariantViolation {
                what: "GWP threshold ordering",
                defect: w[0] - w[1],
                tol: 1e-12,
            });
        }
    }
    Ok(t)
}

/// Regularity curve on `(γ₁, γ₂]`.
pub fn sigma1_curve(n: usize, gamma: f64) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / 4.0 - (nf + 1.0) * (nf + 5.0) / (8.0 * nf) / (gamma - (nf + 1.0) / (2.0 * nf))
}

/// Regularity curve on `(γ₂, γ_c]`.
pub fn sigma2_curve(n: usize, gamma: f64) -> f64 {
    (n as f64 + 1.0) / 4.0 - 1.0 / (gamma - 1.0)
}

/// Regularity curve on `(γ_c, γ₄]`.
pub fn sigma3_curve(n: usize, gamma: f64) -> f64 {
    n as f64 / 2.0 - 2.0 / (gamma - 1.0)
}

/// Required data regularity for small-data global well-posedness with a
/// power-`γ` nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GwpRegularity {
    /// Any strictly positive Sobolev index works ("0⁺": the threshold 0 is
    /// open, not attained).
    OpenThreshold,
    /// Data in `H^σ × H^{σ-1}` with the given `σ`.
    Sobolev(f64),
    /// `γ > γ₄`: outside the range the fixed-point scheme covers.
    AboveGamma4,
}

impl GwpRegularity {
    /// Numeric threshold, `0.0` for the open case, `None` above `γ₄`.
    pub fn sigma(&self) -> Option<f64> {
        match self {
            GwpRegularity::OpenThreshold => Some(0.0),
            GwpRegularity::Sobolev(s) => Some(*s),
            GwpRegularity::AboveGamma4 => None,
        }
    }
}

/// Piecewise regularity map: `0⁺` on `(1, γ₁]`, then `σ₁`, `σ₂`, `σ₃` on the
/// successive threshold intervals, with an out-of-range marker past `γ₄`.
/// In `n = 3` the `σ₁` interval is empty (`γ₁ = γ₂ = 2`).
pub fn gwp_regularity(n: usize, gamma: f64) -> Result<GwpRegularity> {
    check_dim(n, 3)?;
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "nonlinearity power must exceed 1, got {gamma}"
        )));
    }
    let t = gwp_thresholds(n)?;
    Ok(if gamma <= t.gamma1 {
        GwpRegularity::OpenThreshold
    } else if gamma <= t.gamma2 {
        GwpRegularity::Sobolev(sigma1_curve(n, gamma))
    } else if gamma <= t.gamma_c {
        GwpRegularity::Sobolev(sigma2_curve(n, gamma))
    } else if gamma <= t.gamma4 {
        GwpRegularity::Sobolev(sigma3_curve(n, gamma))
    } else {
        GwpRegularity::AboveGamma4
    })
}

/// `H^{σ₁,q₁} ↪ H^{σ₂,q₂}` test: true iff `σ₁ - σ₂ ≥ n/q₁ - n/q₂ ≥ 0`.
pub fn sobolev_embedding_ok(n: usize, s1: f64, q1: f64, s2: f64, q2: f64) -> Result<bool> {
    check_dim(n, 2)?;
    for (name, q) in [("q1", q1), ("q2", q2)] {
        if !q.is_finite() || !(q > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in (1, infinity), got {q}"
            )));
        }
    }
    let nf = n as f64;
    let drop = nf / q1 - nf / q2;
    Ok(drop >= 0.0 && s1 - s2 >= drop)
}

/// One grid point of the admissibility raster.
#[derive(Debug, Clone, Copy)]
pub struct RasterPoint {
    pub inv_p: f64,
    pub inv_q: f64,
    pub admissible: bool,
    pub sigma: f64,
}

/// Uniform `(cells+1)²` raster of the square `[0,1/2]²` with membership and
/// `σ(p,q)` at each node (plotting/export helper).
pub fn admissible_raster(n: usize, cells: usize) -> Result<Vec<RasterPoint>> {
    check_dim(n, 2)?;
    if cells < 2 {
        return Err(Error::InvalidParameter(format!(
            "raster needs at least 2 cells per side, got {cells}"
        )));
    }
    let mut out = Vec::with_capacity((cells + 1) * (cells + 1));
    for i in 0..=cells {
        let inv_p = 0.5 * i as f64 / cells as f64;
        for j in 0..=cells {
            let inv_q = 0.5 * j as f64 / cells as f64;
            let pair = ExponentPair::new(inv_p, inv_q)?;
            out.push(RasterPoint {
                inv_p,
                inv_q,
                admissible: is_admissible(n, pair)?,
                sigma: sigma_pq(n, pair)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn pair(ip: f64, iq: f64) -> ExponentPair {
        ExponentPair::new(ip, iq).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(ExponentPair::new(0.0, 0.5).is_ok());
        assert!(ExponentPair::new(0.6, 0.1).is_err());
        assert!(ExponentPair::new(-0.1, 0.1).is_err());
        assert!(ExponentPair::new(f64::NAN, 0.2).is_err());
        assert!(ExponentPair::new(0.2, f64::INFINITY).is_err());
    }

    #[test]
    fn admissible_examples_high_dimension() {
        // the two corners and the triangle test, n = 4
        assert!(is_admissible(4, pair(0.5, 1.0 / 6.0)).unwrap());
        assert!(is_admissible(4, pair(0.0, 0.5)).unwrap());
        assert!(is_admissible(4, pair(0.25, 1.0 / 3.0)).unwrap()); // on the line
        assert!(!is_admissible(4, pair(0.01, 0.49)).unwrap()); // below the line
        assert!(!is_admissible(4, pair(0.5, 1.0 / 3.0)).unwrap()); // p = 2 edge
        assert!(!is_admissible(4, pair(0.3, 0.5)).unwrap()); // q = 2 edge
        assert!(!is_admissible(4, pair(0.0, 0.3)).unwrap()); // p = inf edge
        assert!(is_admissible(7, pair(0.5, 0.5 - 1.0 / 6.0)).unwrap());
    }

    #[test]
    fn admissible_examples_low_dimension() {
        // n = 2: the line has slope 1/2 and is excluded
        assert!(!is_admissible(2, pair(0.1, 0.3)).unwrap());
        assert!(is_admissible(2, pair(0.11, 0.3)).unwrap());
        assert!(is_admissible(2, pair(0.0, 0.5)).unwrap());
        // n = 3: strict inequality, right edge excluded
        assert!(!is_admissible(3, pair(0.25, 0.25)).unwrap());
        assert!(is_admissible(3, pair(0.26, 0.25)).unwrap());
        assert!(is_admissible(3, pair(0.0, 0.5)).unwrap());
        assert!(!is_admissible(3, pair(0.5, 1.0 / 4.0)).unwrap());
        assert!(is_admissible(3, pair(0.3, 0.3)).unwrap());
        assert!(matches!(is_admissible(1, pair(0.1, 0.1)), Err(Error::BadDimension { .. })));
    }

    #[test]
    fn admissible_set_contains_euclidean_edge_for_high_dimension() {
        // points on the sharp Euclidean line, inside the open square, are
        // admissible here — and so are points strictly above it
        for n in [4usize, 5, 6, 7] {
            let slope = (n as f64 - 1.0) / 2.0;
            let mut on_edge = 0;
            for k in 1..40 {
                let iq = 0.5 * k as f64 / 40.0;
                let ip = slope * (0.5 - iq);
                if ip > 0.0 && ip < 0.5 {
                    assert!(is_admissible(n, pair(ip, iq)).unwrap(), "edge point n={n} iq={iq}");
                    assert!(is_admissible(n, pair((ip + 0.01).min(0.49), iq)).unwrap());
                    on_edge += 1;
                }
            }
            assert!(on_edge > 5, "edge sampling degenerate for n = {n}");
        }
    }

    #[test]
    fn sigma_pq_examples() {
        // max term active: 1/p = 0 lies under the line
        assert_abs_diff_eq!(sigma_pq(4, pair(0.0, 0.25)).unwrap(), 1.0, epsilon = 1e-15);
        // q = 2: both terms vanish identically
        assert_eq!(sigma_pq(4, pair(0.3, 0.5)).unwrap(), 0.0);
        assert_eq!(sigma_pq(2, pair(0.0, 0.5)).unwrap(), 0.0);
        // admissible pair: exact agreement with the base term
        let p = pair(0.25, 1.0 / 3.0);
        let s = sigma_pq(4, p).unwrap();
        assert_eq!(s, 2.5 * (0.5 - p.inv_q()));
        assert_relative_eq!(s, 5.0 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn sigma_pq_lower_bound_with_equality_on_triangle() {
        for n in [2usize, 3, 4, 6] {
            let nf = n as f64;
            for i in 0..=32 {
                for j in 0..=32 {
                    let p = pair(0.5 * i as f64 / 32.0, 0.5 * j as f64 / 32.0);
                    let s = sigma_pq(n, p).unwrap();
                    let base = (nf + 1.0) / 2.0 * (0.5 - p.inv_q());
                    assert!(s >= base);
                    let above_line = p.inv_p() >= (nf - 1.0) / 2.0 * (0.5 - p.inv_q());
                    assert_eq!(s == base, above_line, "n={n} pair={p:?}");
                }
            }
        }
    }

    #[test]
    fn thresholds_dimension_three_and_four() {
        let t = gwp_thresholds(3).unwrap();
        assert_abs_diff_eq!(t.gamma1, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.gamma2, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.gamma_c, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.gamma3, (5.5 + 18.25f64.sqrt()) / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.gamma4, 5.0, epsilon = 1e-15);

        let t = gwp_thresholds(4).unwrap();
        assert_abs_diff_eq!(t.gamma1, 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(t.gamma2, 25.0 / 13.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.gamma_c, 1.0 + 4.0 / 3.0, epsilon = 1e-14);
        // surd collapses: sqrt(16 + 25/9) = 13/3
        assert_abs_diff_eq!(t.gamma3, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t.gamma4, 3.0, epsilon = 1e-15);

        assert!(matches!(gwp_thresholds(2), Err(Error::BadDimension { .. })));
    }

    #[test]
    fn thresholds_ordered_and_branch_switch() {
        for n in 3..=12 {
            let t = gwp_thresholds(n).unwrap();
            assert!(t.gamma1 > 1.0);
            assert!(t.gamma1 <= t.gamma2 + 1e-12);
            assert!(t.gamma2 <= t.gamma_c + 1e-12);
            assert!(t.gamma_c <= t.gamma3 + 1e-12);
            assert!(t.gamma3 <= t.gamma4 + 1e-12);
        }
        // n >= 6 branch closed forms: gamma3(6) = 43/23, gamma4(6) = 2
        let t = gwp_thresholds(6).unwrap();
        assert_abs_diff_eq!(t.gamma3, 43.0 / 23.0, epsilon = 1e-13);
        assert_abs_diff_eq!(t.gamma4, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn regularity_branches_dimension_three() {
        assert_eq!(gwp_regularity(3, 1.5).unwrap(), GwpRegularity::OpenThreshold);
        assert_eq!(gwp_regularity(3, 2.0).unwrap(), GwpRegularity::OpenThreshold);
        // gamma1 = gamma2 = 2: the sigma1 interval is empty, sigma2 takes over
        match gwp_regularity(3, 2.0 + 1e-9).unwrap() {
            GwpRegularity::Sobolev(s) => assert!(s.abs() < 1e-8),
            other => panic!("expected Sobolev, got {other:?}"),
        }
        match gwp_regularity(3, 3.0).unwrap() {
            GwpRegularity::Sobolev(s) => assert_abs_diff_eq!(s, 0.5, epsilon = 1e-14),
            other => panic!("{other:?}"),
        }
        match gwp_regularity(3, 4.0).unwrap() {
            GwpRegularity::Sobolev(s) => assert_abs_diff_eq!(s, 1.5 - 2.0 / 3.0, epsilon = 1e-14),
            other => panic!("{other:?}"),
        }
        match gwp_regularity(3, 5.0).unwrap() {
            GwpRegularity::Sobolev(s) => assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14),
            other => panic!("{other:?}"),
        }
        assert_eq!(gwp_regularity(3, 5.0 + 1e-9).unwrap(), GwpRegularity::AboveGamma4);
        assert!(gwp_regularity(3, 1.0).is_err());
        assert!(gwp_regularity(3, 0.5).is_err());
        assert_eq!(GwpRegularity::OpenThreshold.sigma(), Some(0.0));
        assert_eq!(GwpRegularity::AboveGamma4.sigma(), None);
    }

    #[test]
    fn regularity_continuous_at_interior_thresholds() {
        for n in [3usize, 4, 5, 6, 7] {
            let t = gwp_thresholds(n).unwrap();
            // the open threshold meets sigma1 at gamma1
            assert_abs_diff_eq!(sigma1_curve(n, t.gamma1), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                sigma1_curve(n, t.gamma2),
                sigma2_curve(n, t.gamma2),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                sigma2_curve(n, t.gamma_c),
                sigma3_curve(n, t.gamma_c),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(sigma2_curve(n, t.gamma_c), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn regularity_monotone_and_continuous_sampled() {
        for n in [3usize, 4, 5, 6, 7] {
            let t = gwp_thresholds(n).unwrap();
            let lo = t.gamma1 + 1e-9;
            let hi = t.gamma4;
            let mut prev: Option<f64> = None;
            for k in 0..=1000 {
                let gamma = lo + (hi - lo) * k as f64 / 1000.0;
                let s = match gwp_regularity(n, gamma).unwrap() {
                    GwpRegularity::Sobolev(s) => s,
                    GwpRegularity::OpenThreshold => 0.0,
                    GwpRegularity::AboveGamma4 => panic!("gamma = {gamma} within range"),
                };
                if let Some(p) = prev {
                    assert!(s >= p - 1e-12, "n={n} gamma={gamma}: {s} < {p}");
                    assert!(s - p < 0.05, "jump at n={n} gamma={gamma}: {p} -> {s}");
                }
                prev = Some(s);
            }
        }
    }

    #[test]
    fn embedding_examples() {
        assert!(sobolev_embedding_ok(3, 0.7, 4.0, 0.7, 4.0).unwrap());
        assert!(sobolev_embedding_ok(3, 1.0, 2.0, 0.0, 6.0).unwrap());
        assert!(!sobolev_embedding_ok(3, 0.5, 2.0, 0.0, 6.0).unwrap());
        // negative integrability drop is never an embedding
        assert!(!sobolev_embedding_ok(3, 2.0, 6.0, 0.0, 2.0).unwrap());
        assert!(sobolev_embedding_ok(3, 1.0, 1.5, 0.2, 6.0).is_ok());
        assert!(sobolev_embedding_ok(3, 1.0, 1.0, 0.0, 6.0).is_err());
        assert!(sobolev_embedding_ok(3, 1.0, 2.0, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn raster_counts_grow_with_refinement() {
        let count = |cells: usize| {
            admissible_raster(4, cells).unwrap().iter().filter(|p| p.admissible).count()
        };
        let (c20, c40, c80) = (count(20), count(40), count(80));
        assert!(c20 > 0);
        assert!(c40 > 2 * c20, "refinement should multiply admissible nodes");
        assert!(c80 > 2 * c40);
        // fraction converges to the triangle area fraction: for n = 4 the
        // region {ip >= 1.5 (1/2 - iq)} inside the square has area fraction
        // 1 - (1/2)(1/2)(1/3)/(1/4) = 2/3
        let frac = c80 as f64 / (81.0 * 81.0);
        assert!((frac - 2.0 / 3.0).abs() < 0.03, "area fraction {frac}");
        assert!(admissible_raster(4, 1).is_err());
    }
}
