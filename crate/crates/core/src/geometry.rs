//! Hyperboloid model of `H^n`.
//!
//! Points live on the upper sheet of `⟨x,x⟩ = -1` in Minkowski space
//! `R^{1,n}` with `⟨x,y⟩ = -x_0 y_0 + x_1 y_1 + … + x_n y_n`; isometries are
//! Lorentz matrices preserving the sheet. Distances and group elements are
//! exact linear algebra — no boundary charts, no trigonometric blow-up.

use crate::{Error, Result};

/// Entry scale above which Lorentz-invariant checks are skipped: the defect
/// `MᵀJM - J` involves products of squared entries, which overflow long before
/// the entries themselves do (needed: orbit radii ~400, i.e. entries ~e^400).
const LARGE_SCALE: f64 = 1e150;

/// A point of `H^n`: future-sheet Minkowski-unit vector `(x_0,…,x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    coords: Vec<f64>,
}

/// A Lorentz matrix acting on `H^n`, stored row-major, `(n+1)×(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    m: Vec<f64>,
    dim: usize, // n
}

/// Minkowski inner product `-x_0 y_0 + Σ x_i y_i` (no dimension check).
pub fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    let mut s = -x[0] * y[0];
    for i in 1..x.len() {
        s += x[i] * y[i];
    }
    s
}

impl HPoint {
    /// Validates `⟨x,x⟩ = -1` (tolerance 1e-12, scale-relative) and `x_0 ≥ 1`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::BadDimension { got: coords.len().saturating_sub(1), min: 2 });
        }
        let scale = coords.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        if scale < LARGE_SCALE {
            let q = minkowski(&coords, &coords);
            let tol = 1e-12 * scale * scale;
            if (q + 1.0).abs() > tol.max(1e-12) {
                return Err(Error::InvariantViolation {
                    what: "HPoint Minkowski norm",
                    defect: (q + 1.0).abs(),
                    tol: tol.max(1e-12),
                });
            }
        }
        if coords[0] < 1.0 - 1e-12 {
            return Err(Error::InvariantViolation {
                what: "HPoint future sheet (x_0 >= 1)",
                defect: 1.0 - coords[0],
                tol: 1e-12,
            });
        }
        Ok(HPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Rescales so that `⟨x,x⟩ = -1` exactly (absorbs roundoff after long
    /// isometry products); skipped at large scale where the norm overflows.
    pub fn renormalized(mut self) -> Self {
        let scale = self.coords.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
        if scale < LARGE_SCALE {
            let q = minkowski(&self.coords, &self.coords);
            if q < 0.0 {
                let s = 1.0 / (-q).sqrt();
                for c in &mut self.coords {
                    *c *= s;
                }
            }
        }
        self
    }
}

/// The basepoint `(1,0,…,0)` of `H^n`.
pub fn origin(n: usize) -> Result<HPoint> {
    if n < 2 {
        return Err(Error::BadDimension { got: n, min: 2 });
    }
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    Ok(HPoint { coords: c })
}

/// Hyperbolic distance `arcosh(-⟨x,y⟩)`; the argument is clamped to `[1,∞)`
/// to absorb roundoff for near-equal points.
pub fn dist(x: &HPoint, y: &HPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    let q = -minkowski(&x.coords, &y.coords);
    Ok(q.max(1.0).acosh())
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        let d = n + 1;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Isometry { m, dim: n }
    }

    /// Wraps a raw matrix, validating the Lorentz condition.
    pub fn new(m: Vec<f64>, n: usize) -> Result<Self> {
        if m.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidParameter(format!(
                "matrix length {} does not match dimension {}",
                m.len(),
                n
            )));
        }
        let iso = Isometry { m, dim: n };
        iso.validated()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Entrywise defect of `MᵀJM = J`; `None` when the entries are too large
    /// for the products to be representable.
    pub fn lorentz_defect(&self) -> Option<f64> {
        if self.max_abs() >= LARGE_SCALE {
            return None;
        }
        let d = self.dim + 1;
        let sign = |k: usize| if k == 0 { -1.0 } else { 1.0 };
        let mut defect = 0.0f64;
        for i in 0..d {
            for j in i..d {
                // (MᵀJM)_{ij} = Σ_k sign(k) M_{ki} M_{kj}
                let mut s = 0.0;
                for k in 0..d {
                    s += sign(k) * self.m[k * d + i] * self.m[k * d + j];
                }
                let target = if i == j { sign(i) } else { 0.0 };
                defect = defect.max((s - target).abs());
            }
        }
        Some(defect)
    }

    /// Validates within the scale-relative tolerance, attempting one
    /// re-orthonormalization before giving up.
    fn validated(self) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        match self.lorentz_defect() {
            None => Ok(self), // large regime: products overflow; trust the algebra
            Some(defect) => {
                let tol = 1e-10 * scale * scale;
                if defect <= tol {
                    if self.m[0] <= 0.0 {
                        return Err(Error::InvariantViolation {
                            what: "Isometry future sheet (M_00 > 0)",
                            defect: -self.m[0],
                            tol: 0.0,
                        });
                    }
                    return Ok(self);
                }
                let renorm = self.j_orthonormalized();
                let defect2 = renorm.lorentz_defect().unwrap_or(0.0);
                if defect2 <= 1e-8 * scale * scale {
                    Ok(renorm)
                } else {
                    Err(Error::InvariantViolation {
                        what: "Isometry Lorentz condition after renormalization",
                        defect: defect2,
                        tol: 1e-8 * scale * scale,
                    })
                }
            }
        }
    }

    /// Gram–Schmidt with respect to `J = diag(-1,1,…,1)`, applied to columns:
    /// column 0 is normalized timelike, the rest spacelike. No-op at large scale.
    pub fn j_orthonormalized(&self) -> Self {
        if self.max_abs() >= LARGE_SCALE {
            return self.clone();
        }
        let d = self.dim + 1;
        let mut cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| self.m[i * d + j]).collect()).collect();
        let ip = |a: &[f64], b: &[f64]| minkowski(a, b);
        // timelike column
        let q0 = ip(&cols[0], &cols[0]);
        if q0 < 0.0 {
            let s = 1.0 / (-q0).sqrt();
            cols[0].iter_mut().for_each(|v| *v *= s);
        }
        for j in 1..d {
            // subtract J-projections on previous columns
            for k in 0..j {
                let denom = ip(&cols[k], &cols[k]); // -1 or +1 after normalization
                let coef = ip(&cols[j], &cols[k]) / denom;
                let prev = cols[k].clone();
                for (v, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *v -= coef * p;
                }
            }
            let qj = ip(&cols[j], &cols[j]);
            if qj > 0.0 {
                let s = 1.0 / qj.sqrt();
                cols[j].iter_mut().for_each(|v| *v *= s);
            }
        }
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = cols[j][i];
            }
        }
        Isometry { m, dim: self.dim }
    }

    /// Lorentz inverse `J Mᵀ J` (exact for Lorentz matrices; no factorization).
    pub fn inverse(&self) -> Self {
        let d = self.dim + 1;
        let mut m = vec![0.0; d * d];
        let sign = |k: usize| if k == 0 { -1.0 } else { 1.0 };
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = sign(i) * sign(j) * self.m[j * d + i];
            }
        }
        Isometry { m, dim: self.dim }
    }
}

/// Hyperbolic translation of rapidity `l` along coordinate `axis` (1-based):
/// identity except the `cosh/sinh` block on coordinates `(0, axis)`.
pub fn boost(l: f64, axis: usize, n: usize) -> Result<Isometry> {
    if n < 2 {
        return Err(Error::BadDimension { got: n, min: 2 });
    }
    if axis == 0 || axis > n {
        return Err(Error::AxisOutOfRange { axis, n });
    }
    let mut iso = Isometry::identity(n);
    let d = n + 1;
    let (c, s) = (l.cosh(), l.sinh());
    iso.m[0] = c;
    iso.m[axis] = s;
    iso.m[axis * d] = s;
    iso.m[axis * d + axis] = c;
    Ok(iso)
}

/// Rotation by `angle` in the spatial plane spanned by axes `i`, `j` (1-based);
/// fixes the basepoint.
pub fn rotation(angle: f64, i: usize, j: usize, n: usize) -> Result<Isometry> {
    if n < 2 {
        return Err(Error::BadDimension { got: n, min: 2 });
    }
    if i == 0 || i > n {
        return Err(Error::AxisOutOfRange { axis: i, n });
    }
    if j == 0 || j > n || i == j {
        return Err(Error::AxisOutOfRange { axis: j, n });
    }
    let mut iso = Isometry::identity(n);
    let d = n + 1;
    let (c, s) = (angle.cos(), angle.sin());
    iso.m[i * d + i] = c;
    iso.m[i * d + j] = -s;
    iso.m[j * d + i] = s;
    iso.m[j * d + j] = c;
    Ok(iso)
}

/// Matrix product `a·b`, re-validated (with one renormalization attempt).
pub fn compose(a: &Isometry, b: &Isometry) -> Result<Isometry> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    let d = a.dim + 1;
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a.m[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                m[i * d + j] += aik * b.m[k * d + j];
            }
        }
    }
    (Isometry { m, dim: a.dim }).validated()
}

/// Applies an isometry to a point; the result is renormalized onto the sheet.
pub fn apply(a: &Isometry, x: &HPoint) -> Result<HPoint> {
    if a.dim != x.dim() {
        return Err(Error::DimensionMismatch { left: a.dim, right: x.dim() });
    }
    let d = a.dim + 1;
    let mut c = vec![0.0; d];
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..d {
            s += a.m[i * d + j] * x.coords[j];
        }
        c[i] = s;
    }
    let p = (HPoint { coords: c }).renormalized();
    let scale = p.coords.iter().fold(1.0f64, |acc, &v| acc.max(v.abs()));
    if scale < LARGE_SCALE {
        let q = minkowski(&p.coords, &p.coords);
        if (q + 1.0).abs() > 1e-8 * scale * scale {
            return Err(Error::InvariantViolation {
                what: "point norm after isometry (numerical blow-up)",
                defect: (q + 1.0).abs(),
                tol: 1e-8 * scale * scale,
            });
        }
    }
    if p.coords[0] <= 0.0 {
        return Err(Error::InvariantViolation {
            what: "future sheet after isometry",
            defect: -p.coords[0],
            tol: 0.0,
        });
    }
    Ok(p)
}
