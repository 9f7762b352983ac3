//! Discrete torsion-free groups acting on `H^n`: cyclic and Schottky
//! presentations, orbit enumeration over the free-group tree, Poincaré
//! series with tail bounds, and critical-exponent estimation.
//!
//! Schottky presentations carry a numerically certified ping-pong
//! configuration: one closed half-space per generator letter, pairwise
//! disjoint, with each letter mapping the exterior of its source half-space
//! strictly inside its target. That certificate (rather than an abstract
//! convex-cocompactness assumption) is what licenses the pruned tree search
//! and the exponential orbit-growth fits downstream.

use crate::geometry::{apply, boost, compose, dist, minkowski, origin, rotation, HPoint, Isometry};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result-set cap for orbit enumeration.
pub const ORBIT_CAP: usize = 10_000_000;

/// Minimum acceptable ping-pong margin for a Schottky certificate.
pub const PING_PONG_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Trivial,
    Cyclic,
    Schottky,
}

/// A generator given as a boost, optionally conjugated by a plane rotation:
/// `g = C · boost(rapidity, axis) · C^{-1}` with `C = rotation(angle, i, j)`.
/// The conjugation relocates the translation axis without changing the
/// translation length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostDescriptor {
    pub rapidity: f64,
    pub axis: usize,
    pub rotation: Option<(usize, usize, f64)>,
}

impl BoostDescriptor {
    pub fn new(rapidity: f64, axis: usize) -> Self {
        BoostDescriptor { rapidity, axis, rotation: None }
    }

    pub fn conjugated(rapidity: f64, axis: usize, rot: (usize, usize, f64)) -> Self {
        BoostDescriptor { rapidity, axis, rotation: Some(rot) }
    }

    fn build(&self, n: usize) -> Result<Isometry> {
        if self.rapidity <= 0.0 || !self.rapidity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "generator rapidity must be positive and finite, got {}",
                self.rapidity
            )));
        }
        let b = boost(self.rapidity, self.axis, n)?;
        match self.rotation {
            None => Ok(b),
            Some((i, j, angle)) => {
                let c = rotation(angle, i, j, n)?;
                compose(&compose(&c, &b)?, &c.inverse())
            }
        }
    }

    /// Inward unit normals of the two ping-pong half-spaces of this letter.
    /// For a plain boost of rapidity `ℓ` along `axis`, the target half-space
    /// of the positive letter is `{x : x_axis/x_0 ≥ tanh(ℓ/2)}` with normal
    /// `w⁺ = (sinh(ℓ/2), …, +cosh(ℓ/2) at the axis slot, …)`, and the target
    /// of the inverse letter mirrors the sign. Conjugation maps `w ↦ C·w`.
    fn half_space_normals(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.axis < 1 || self.axis > n {
            return Err(Error::AxisOutOfRange { axis: self.axis, n });
        }
        let h = self.rapidity / 2.0;
        let mut plus = vec![0.0; n + 1];
        plus[0] = h.sinh();
        plus[self.axis] = h.cosh();
        let mut minus = vec![0.0; n + 1];
        minus[0] = h.sinh();
        minus[self.axis] = -h.cosh();
        match self.rotation {
            None => Ok((plus, minus)),
            Some((i, j, angle)) => {
                let c = rotation(angle, i, j, n)?;
                Ok((mat_vec(&c, &plus), mat_vec(&c, &minus)))
            }
        }
    }
}

fn mat_vec(a: &Isometry, v: &[f64]) -> Vec<f64> {
    let n1 = a.dim() + 1;
    let m = a.matrix();
    (0..n1).map(|r| (0..n1).map(|c| m[r * n1 + c] * v[c]).sum()).collect()
}

/// A finitely generated free group of isometries, with certificate data.
#[derive(Debug, Clone)]
pub struct GroupPresentation {
    kind: GroupKind,
    n: usize,
    descriptors: Vec<BoostDescriptor>,
    generators: Vec<Isometry>,
    labels: Vec<String>,
    ping_pong_margin: Option<f64>,
}

/// One letter of the symmetric generating set (generators and inverses).
struct Letter {
    iso: Isometry,
    label: String,
    /// id in `0..2m`; `inverse(id) = (id + m) mod 2m`.
    id: usize,
}

impl GroupPresentation {
    /// The group containing only the identity.
    pub fn trivial(n: usize) -> Result<Self> {
        origin(n)?; // dimension validation
        Ok(GroupPresentation {
            kind: GroupKind::Trivial,
            n,
            descriptors: Vec::new(),
            generators: Vec::new(),
            labels: Vec::new(),
            ping_pong_margin: None,
        })
    }

    /// Infinite cyclic group generated by one hyperbolic element.
    pub fn cyclic(n: usize, desc: BoostDescriptor, label: &str) -> Result<Self> {
        let g = desc.build(n)?;
        Ok(GroupPresentation {
            kind: GroupKind::Cyclic,
            n,
            descriptors: vec![desc],
            generators: vec![g],
            labels: vec![label.to_string()],
            ping_pong_margin: None,
        })
    }

    /// Free group on `m ≥ 2` boosts, accepted only if the ping-pong
    /// certificate holds with margin at least [`PING_PONG_THRESHOLD`].
    pub fn schottky(n: usize, descs: &[BoostDescriptor], labels: &[&str]) -> Result<Self> {
        if descs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a Schottky presentation needs at least 2 generators, got {}",
                descs.len()
            )));
        }
        if labels.len() != descs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} generators",
                labels.len(),
                descs.len()
            )));
        }
        let generators: Vec<Isometry> =
            descs.iter().map(|d| d.build(n)).collect::<Result<_>>()?;
        let margin = ping_pong_margin(n, descs, &generators)?;
        if margin < PING_PONG_THRESHOLD {
            return Err(Error::PingPongFailed { margin, threshold: PING_PONG_THRESHOLD });
        }
        Ok(GroupPresentation {
            kind: GroupKind::Schottky,
            n,
            descriptors: descs.to_vec(),
            generators,
            labels: labels.iter().map(|s| s.to_string()).collect(),
            ping_pong_margin: Some(margin),
        })
    }

    /// Cyclic example group: `H³`, one boost of translation length 4.
    pub fn preset_cyclic() -> Self {
        GroupPresentation::cyclic(3, BoostDescriptor::new(4.0, 1), "a")
            .expect("preset parameters are valid")
    }

    /// Schottky example group: `H²`, boosts of lengths 6 and 6.5 along the
    /// two coordinate axes. The half-space disjointness is strict
    /// (`tanh²3 + tanh²3.25 > 1`) with a wide margin.
    pub fn preset_schottky() -> Self {
        GroupPresentation::schottky(
            2,
            &[BoostDescriptor::new(6.0, 1), BoostDescriptor::new(6.5, 2)],
            &["a", "b"],
        )
        .expect("preset parameters satisfy ping-pong")
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn descriptors(&self) -> &[BoostDescriptor] {
        &self.descriptors
    }

    /// Certified ping-pong margin (Schottky only).
    pub fn ping_pong_margin(&self) -> Option<f64> {
        self.ping_pong_margin
    }

    /// A-priori estimate of the critical exponent, used by quotient-side
    /// code to pick tail exponents: 0 for trivial/cyclic (linear orbit
    /// growth), and the free-group growth rate `ln(2m-1)/ℓ_min` for
    /// Schottky presentations (word count `2m(2m-1)^{k-1}` against
    /// per-letter displacement `≈ ℓ_min`). This is an estimate, not a
    /// certified bound — the Poincaré tail machinery itself always uses the
    /// measured shell growth, and the estimators of [`estimate_delta`]
    /// cross-check this value on the shipped presets.
    pub fn delta_hint(&self) -> f64 {
        match self.kind {
            GroupKind::Trivial | GroupKind::Cyclic => 0.0,
            GroupKind::Schottky => {
                let m = self.generators.len() as f64;
                let lmin =
                    self.descriptors.iter().map(|d| d.rapidity).fold(f64::INFINITY, f64::min);
                (2.0 * m - 1.0).ln() / lmin
            }
        }
    }

    fn letters(&self) -> Vec<Letter> {
        let m = self.generators.len();
        let mut out = Vec::with_capacity(2 * m);
        for (i, (g, label)) in self.generators.iter().zip(&self.labels).enumerate() {
            out.push(Letter { iso: g.clone(), label: label.clone(), id: i });
        }
        for (i, (g, label)) in self.generators.iter().zip(&self.labels).enumerate() {
            out.push(Letter { iso: g.inverse(), label: label.to_uppercase(), id: i + m });
        }
        out
    }
}

/// Numerical ping-pong certificate. Checks
/// (1) pairwise disjointness of the `2m` closed half-spaces analytically
///     (ultraparallel boundaries: `⟨w_α, w_β⟩ ≤ -1` for inward unit normals),
/// (2) the mapping property on 10³ seeded sample points at radius 10: every
///     sampled point outside a letter's source half-space lands inside its
///     target with positive signed distance.
/// Returns the smallest margin observed (hyperbolic lengths).
fn ping_pong_margin(
    n: usize,
    descs: &[BoostDescriptor],
    gens: &[Isometry],
) -> Result<f64> {
    let m = descs.len();
    // normals[i] = target half-space of letter i (gen for i<m, inverse above)
    let mut normals: Vec<Vec<f64>> = vec![Vec::new(); 2 * m];
    for (i, d) in descs.iter().enumerate() {
        let (plus, minus) = d.half_space_normals(n)?;
        normals[i] = plus;
        normals[i + m] = minus;
    }
    let mut margin = f64::INFINITY;
    for a in 0..2 * m {
        for b in (a + 1)..2 * m {
            let ip = minkowski(&normals[a], &normals[b]);
            // disjoint iff boundaries ultraparallel and oriented apart;
            // the gap between the half-spaces is then arccosh(-ip)
            let sep = if -ip >= 1.0 { (-ip).acosh() } else { -ip - 1.0 };
            margin = margin.min(sep);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1_AB1E);
    let normal01 = move |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    const RADIUS: f64 = 10.0;
    for _ in 0..1000 {
        // far point in a uniform random direction
        let mut v: Vec<f64> = (0..n).map(|_| normal01(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        v.iter_mut().for_each(|x| *x /= norm);
        let mut coords = vec![RADIUS.cosh()];
        coords.extend(v.iter().map(|x| x * RADIUS.sinh()));
        let p = HPoint::new(coords)?;
        for li in 0..2 * m {
            // source of letter li is the target half-space of its inverse
            let src = &normals[(li + m) % (2 * m)];
            if minkowski(p.coords(), src) > 0.0 {
                continue; // point inside the source: no requirement
            }
            let g = if li < m { gens[li].clone() } else { gens[li - m].inverse() };
            let gp = apply(&g, &p)?;
            let sd = minkowski(gp.coords(), &normals[li]).asinh();
            margin = margin.min(sd);
        }
    }
    Ok(margin)
}

/// One orbit point `γ·y` with its reduced word and distance to `x`.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub word: String,
    pub element: Isometry,
    pub distance: f64,
}

/// All freely reduced words `w` with `d(x, w·y) ≤ R`, identity included,
/// sorted by `(distance, word)`.
///
/// Breadth-first search over the free-group tree. A prefix is extended only
/// while `d(x, prefix·y) ≤ R + 2·L_max`, where `L_max` is the largest
/// single-letter displacement of `y`: one letter moves the orbit point by at
/// most `L_max`, and for the certified presentations a reduced extension
/// regains distance after at most two letters, so deeper subtrees cannot
/// re-enter the ball. (Tests cross-check against unpruned enumeration.)
pub fn enumerate_orbit(
    gp: &GroupPresentation,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
) -> Result<Vec<OrbitSample>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("orbit radius must be positive, got {radius}")));
    }
    if x.dim() != gp.n || y.dim() != gp.n {
        return Err(Error::DimensionMismatch { left: x.dim(), right: gp.n });
    }
    let letters = gp.letters();
    let mut l_max = 0.0f64;
    for l in &letters {
        l_max = l_max.max(dist(&apply(&l.iso, y)?, y)?);
    }
    let keep_limit = radius + 2.0 * l_max;

    let mut samples: Vec<(Vec<usize>, Isometry, f64)> = Vec::new();
    let d_id = dist(x, y)?;
    if d_id <= radius {
        samples.push((Vec::new(), Isometry::identity(gp.n), d_id));
    }
    let m = letters.len() / 2;
    // frontier of retained prefixes: (letter ids, matrix, depth)
    let mut frontier: Vec<(Vec<usize>, Isometry)> = vec![(Vec::new(), Isometry::identity(gp.n))];
    let mut depth = 0usize;
    let mut explored = 1usize;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for (word, prefix) in &frontier {
            for letter in &letters {
                if let Some(&last) = word.last() {
                    if letter.id == (last + m) % (2 * m) {
                        continue; // freely reduced words only
                    }
                }
                let mut g = compose(prefix, &letter.iso)?;
                if depth % 16 == 0 && g.lorentz_defect().is_some() {
                    g = g.j_orthonormalized();
                }
                let gy = apply(&g, y)?;
                let d = dist(x, &gy)?;
                let mut w = word.clone();
                w.push(letter.id);
                if d <= radius {
                    samples.push((w.clone(), g.clone(), d));
                    if samples.len() > ORBIT_CAP {
                        return Err(Error::OrbitCapExceeded { cap: ORBIT_CAP, radius });
                    }
                }
                if d <= keep_limit {
                    next.push((w, g));
                }
                explored += 1;
                if explored > 10 * ORBIT_CAP {
                    return Err(Error::OrbitCapExceeded { cap: ORBIT_CAP, radius });
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<OrbitSample> = samples
        .into_iter()
        .map(|(ids, element, distance)| OrbitSample {
            word: render_word(&ids, &letters),
            element,
            distance,
        })
        .collect();
    out.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap()
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(out)
}

fn render_word(ids: &[usize], letters: &[Letter]) -> String {
    let pos: Vec<&Letter> = ids
        .iter()
        .map(|&id| letters.iter().find(|l| l.id == id).expect("letter id"))
        .collect();
    pos.iter().map(|l| l.label.as_str()).collect()
}

/// Exhaustive (unpruned) enumeration of all freely reduced words up to the
/// given length, used as the oracle for the pruning logic.
pub fn enumerate_words_unpruned(
    gp: &GroupPresentation,
    x: &HPoint,
    y: &HPoint,
    max_len: usize,
) -> Result<Vec<OrbitSample>> {
    let letters = gp.letters();
    let m = letters.len() / 2;
    let mut out = vec![OrbitSample {
        word: String::new(),
        element: Isometry::identity(gp.n),
        distance: dist(x, y)?,
    }];
    let mut frontier: Vec<(Vec<usize>, Isometry)> = vec![(Vec::new(), Isometry::identity(gp.n))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, prefix) in &frontier {
            for letter in &letters {
                if let Some(&last) = word.last() {
                    if letter.id == (last + m) % (2 * m) {
                        continue;
                    }
                }
                let g = compose(prefix, &letter.iso)?;
                let mut w = word.clone();
                w.push(letter.id);
                out.push(OrbitSample {
                    word: render_word(&w, &letters),
                    element: g.clone(),
                    distance: dist(x, &apply(&g, y)?)?,
                });
                next.push((w, g));
            }
        }
        frontier = next;
    }
    out.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap()
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(out)
}

/// Truncated Poincaré series with a tail bound.
#[derive(Debug, Clone, Copy)]
pub struct PoincarePartial {
    pub partial_sum: f64,
    /// Upper bound for the omitted terms. Infinite when `s` is at or below
    /// the fitted growth rate.
    pub tail_bound: f64,
    pub samples_used: usize,
}

/// `Σ_{d(x,γy) ≤ R} e^{-s·d(x,γy)}` plus a tail bound.
///
/// Cyclic groups get the exact geometric remainder: from the triangle
/// inequality `d(x, γ^k y) ≥ |k|ℓ − d(x,o) − d(y,o)`, so the omitted `|k|`
/// sum to `2 e^{-s(ℓ(K+1) − shift)}/(1 − e^{-sℓ})`, which at `x = y = o`
/// *is* the remainder of the closed-form series. Schottky groups use the
/// fitted shell growth `N_shell(k) ≈ Ĉ e^{δ̂k}`, giving
/// `Ĉ e^{(δ̂−s)⌈R⌉}/(1 − e^{δ̂−s})` for `s > δ̂` and `∞` otherwise.
pub fn poincare_partial(
    gp: &GroupPresentation,
    s: f64,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
) -> Result<PoincarePartial> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("Poincaré exponent must be positive, got {s}")));
    }
    let samples = enumerate_orbit(gp, x, y, radius)?;
    poincare_from_samples(gp, s, x, y, radius, &samples)
}

/// `poincare_partial` when the orbit has already been enumerated.
pub fn poincare_from_samples(
    gp: &GroupPresentation,
    s: f64,
    x: &HPoint,
    y: &HPoint,
    radius: f64,
    samples: &[OrbitSample],
) -> Result<PoincarePartial> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("Poincaré exponent must be positive, got {s}")));
    }
    let partial_sum: f64 = samples.iter().map(|o| (-s * o.distance).exp()).sum();
    let tail_bound = match gp.kind {
        GroupKind::Trivial => {
            if samples.is_empty() {
                (-s * dist(x, y)?).exp() // the only omitted term, exactly
            } else {
                0.0
            }
        }
        GroupKind::Cyclic => {
            let ell = gp.descriptors[0].rapidity;
            let o = origin(gp.n)?;
            let shift = dist(x, &o)? + dist(y, &o)?;
            // reduced cyclic words are a^k / A^k: word length = |k|
            let k_max = samples.iter().map(|o| o.word.len()).max().unwrap_or(0);
            let missing = (2 * k_max + 1).saturating_sub(samples.len());
            2.0 * (-s * (ell * (k_max as f64 + 1.0) - shift)).exp() / (1.0 - (-s * ell).exp())
                + missing as f64 * (-s * radius).exp()
        }
        GroupKind::Schottky => {
            let (delta_fit, c_hat) = shell_growth_fit(samples, radius, gp.n);
            if s <= delta_fit {
                f64::INFINITY
            } else {
                c_hat * ((delta_fit - s) * radius.ceil()).exp() / (1.0 - (delta_fit - s).exp())
            }
        }
    };
    Ok(PoincarePartial { partial_sum, tail_bound, samples_used: samples.len() })
}

/// Least-squares fit of `ln N_shell(j)` against `j` over the nonempty unit
/// shells in the last half of the range; returns the growth rate and an
/// envelope constant majorizing every observed shell in the window. With
/// fewer than two usable shells, falls back to the volume-growth rate
/// `n − 1` (which bounds any discrete orbit).
fn shell_growth_fit(samples: &[OrbitSample], radius: f64, n: usize) -> (f64, f64) {
    let top = radius.floor() as usize;
    let mut shells = vec![0usize; top + 1];
    for o in samples {
        let j = (o.distance.floor() as usize).min(top);
        shells[j] += 1;
    }
    let window = |from: usize| -> Vec<(f64, f64)> {
        (from..=top)
            .filter(|&j| shells[j] > 0)
            .map(|j| (j as f64, (shells[j] as f64).ln()))
            .collect()
    };
    let mut pts = window(top / 2);
    if pts.len() < 2 {
        pts = window(0);
    }
    if pts.len() < 2 {
        let delta_cap = (n as f64) - 1.0;
        let c = shells.iter().cloned().max().unwrap_or(1) as f64;
        return (delta_cap, c);
    }
    let (slope, _intercept, _r2) = linfit(&pts);
    let c_hat = pts
        .iter()
        .map(|&(j, lnc)| (lnc - slope * j).exp())
        .fold(0.0f64, f64::max);
    (slope.max(0.0), c_hat)
}

fn linfit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    let r2 = if ss_tot < 1e-30 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Critical-exponent estimates from the orbit of the basepoint.
#[derive(Debug, Clone, Copy)]
pub struct DeltaEstimates {
    /// Slope of `ln N(r)` over the last half of the range.
    pub counting: f64,
    /// Abscissa of convergence: the `s` at which the fitted shell-sum decay
    /// rate changes sign.
    pub abscissa: f64,
    /// `R²` of the counting fit.
    pub fit_r2: f64,
    /// Set when the counting fit explains less than 90% of the variance.
    pub degenerate_fit: bool,
    pub orbit_size: usize,
}

/// Estimates `δ(Γ)` two independent ways from the orbit within radius `R`.
/// Requires at least 200 orbit points.
pub fn estimate_delta(gp: &GroupPresentation, radius: f64) -> Result<DeltaEstimates> {
    let o = origin(gp.n)?;
    let samples = enumerate_orbit(gp, &o, &o, radius)?;
    if samples.len() < 200 {
        return Err(Error::InsufficientSamples { got: samples.len(), need: 200 });
    }
    let top = radius.floor() as usize;
    // cumulative counts at integer radii
    let mut cum = vec![0usize; top + 1];
    for s in &samples {
        let j = (s.distance.floor() as usize).min(top);
        cum[j] += 1;
    }
    for j in 1..=top {
        cum[j] += cum[j - 1];
    }
    let pts: Vec<(f64, f64)> = (top / 2..=top)
        .filter(|&j| cum[j] > 0)
        .map(|j| (j as f64, (cum[j] as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples { got: pts.len(), need: 2 });
    }
    let (counting, _, fit_r2) = linfit(&pts);

    // shell sums S_j(s) = Σ_{d∈[j,j+1)} e^{-sd}; the fitted slope of ln S_j
    // is ≈ δ − s, so bisect for the sign change
    let mut shells: Vec<(usize, Vec<f64>)> = Vec::new();
    for s in &samples {
        let j = (s.distance.floor() as usize).min(top);
        match shells.iter_mut().find(|(jj, _)| *jj == j) {
            Some((_, v)) => v.push(s.distance),
            None => shells.push((j, vec![s.distance])),
        }
    }
    shells.retain(|(j, _)| *j >= top / 2);
    shells.sort_by_key(|(j, _)| *j);
    let slope_at = |s: f64| -> f64 {
        let pts: Vec<(f64, f64)> = shells
            .iter()
            .map(|(j, ds)| (*j as f64, ds.iter().map(|d| (-s * d).exp()).sum::<f64>().ln()))
            .collect();
        linfit(&pts).0
    };
    let rho = (gp.n as f64 - 1.0) / 2.0;
    let abscissa = if shells.len() < 2 || slope_at(0.0) <= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 2.0 * rho);
        if slope_at(hi) > 0.0 {
            hi // growth faster than volume: report the cap
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if slope_at(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(DeltaEstimates {
        counting,
        abscissa,
        fit_r2,
        degenerate_fit: fit_r2 < 0.9,
        orbit_size: samples.len(),
    })
}

/// Partial-sum ratios `P_R(s; x, y) / P_R(s; o, o)` over sample pairs.
#[derive(Debug, Clone)]
pub struct UniformPoincareReport {
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub base_partial: f64,
}

/// Max over `sample_pairs` of the truncated-series ratio against the
/// basepoint pair. A uniform bound independent of the pair is the content
/// of the comparison lemma this feeds; divergent tails (exponent at or
/// below the fitted growth) are rejected.
pub fn check_uniform_poincare(
    gp: &GroupPresentation,
    s: f64,
    sample_pairs: &[(HPoint, HPoint)],
    radius: f64,
) -> Result<UniformPoincareReport> {
    let o = origin(gp.n)?;
    let base = poincare_partial(gp, s, &o, &o, radius)?;
    if !base.tail_bound.is_finite() {
        return Err(Error::DivergentTail {
            detail: format!("exponent s = {s} at or below the fitted orbit growth rate"),
        });
    }
    let mut ratios = Vec::with_capacity(sample_pairs.len());
    for (x, y) in sample_pairs {
        let p = poincare_partial(gp, s, x, y, radius)?;
        if !p.tail_bound.is_finite() {
            return Err(Error::DivergentTail {
                detail: format!("exponent s = {s} at or below the fitted orbit growth rate"),
            });
        }
        ratios.push(p.partial_sum / base.partial_sum);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    Ok(UniformPoincareReport { max_ratio, ratios, base_partial: base.partial_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cyclic_unit() -> GroupPresentation {
        GroupPresentation::cyclic(2, BoostDescriptor::new(1.0, 1), "a").unwrap()
    }

    #[test]
    fn cyclic_orbit_small_radius() {
        let gp = cyclic_unit();
        let o = origin(2).unwrap();
        let orbit = enumerate_orbit(&gp, &o, &o, 3.5).unwrap();
        assert_eq!(orbit.len(), 7);
        let words: Vec<&str> = orbit.iter().map(|s| s.word.as_str()).collect();
        assert_eq!(words, ["", "A", "a", "AA", "aa", "AAA", "aaa"]);
        for s in &orbit {
            assert_abs_diff_eq!(s.distance, s.word.len() as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn radius_below_min_displacement_gives_identity_only() {
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        let orbit = enumerate_orbit(&gp, &o, &o, 0.5).unwrap();
        assert_eq!(orbit.len(), 1);
        assert_eq!(orbit[0].word, "");
        assert_eq!(orbit[0].distance, 0.0);
    }

    #[test]
    fn words_are_freely_reduced() {
        let gp = GroupPresentation::preset_schottky();
        let o = origin(2).unwrap();
        let orbit = enumerate_orbit(&gp, &o, &o, 14.0).unwrap();
        assert!(orbit.len() > 5);
        for s in &orbit {
            for bad in ["aA", "Aa", "bB", "Bb"] {
                assert!(!s.word.contains(bad), "word {} not reduced", s.word);
            }
        }
    }

    #[test]
    fn pruned_matches_unpruned_to_length_8() {
        let o2 = origin(2).unwrap();
        let o3 = origin(3).unwrap();
        let cases: Vec<(GroupPresentation, HPoint)> = vec![
            (GroupPresentation::preset_schottky(), o2),
            (GroupPresentation::preset_cyclic(), o3),
        ];
        for (gp, o) in cases {
            let radius = 25.0;
            let pruned = enumerate_orbit(&gp, &o, &o, radius).unwrap();
            let brute = enumerate_words_unpruned(&gp, &o, &o, 8).unwrap();
            let a: Vec<&str> = pruned
                .iter()
                .filter(|s| s.word.len() <= 8)
                .map(|s| s.word.as_str())
                .collect();
            let b: Vec<&str> = brute
                .iter()
                .filter(|s| s.distance <= radius)
                .map(|s| s.word.as_str())
                .collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cyclic_closed_form_matches_partial_plus_tail() {
        let o = origin(2).unwrap();
        for ell in [0.5f64, 1.0, 2.0] {
            let gp = GroupPresentation::cyclic(2, BoostDescriptor::new(ell, 1), "a").unwrap();
            for s in [0.5f64, 1.0, 2.0] {
                let p = poincare_partial(&gp, s, &o, &o, 10.0).unwrap();
                let closed = 1.0 + 2.0 * (-s * ell).exp() / (1.0 - (-s * ell).exp());
                assert_abs_diff_eq!(p.partial_sum + p.tail_bound, closed, epsilon = 1e-10);
            }
        }
        // headline value for s = 1, ℓ = 1
        let gp = cyclic_unit();
        let p = poincare_partial(&gp, 1.0, &o, &o, 30.0).unwrap();
        assert_abs_diff_eq!(p.partial_sum + p.tail_bound, 2.1639534137386528, epsilon = 1e-12);
    }

    #[test]
    fn poincare_monotone_in_s_and_nondecreasing_in_radius() {
        let gp = GroupPresentation::preset_schottky();
        let o = origin(2).unwrap();
        let mut prev = f64::INFINITY;
        for s in [0.3, 0.5, 0.8, 1.2] {
            let p = poincare_partial(&gp, s, &o, &o, 14.0).unwrap();
            assert!(p.partial_sum < prev);
            prev = p.partial_sum;
        }
        let mut last = 0.0;
        for radius in [7.0, 13.0, 19.0] {
            let p = poincare_partial(&gp, 0.4, &o, &o, radius).unwrap();
            assert!(p.partial_sum >= last);
            last = p.partial_sum;
        }
    }

    #[test]
    fn trivial_group_partial_and_tail() {
        let gp = GroupPresentation::trivial(3).unwrap();
        let o = origin(3).unwrap();
        let p = poincare_partial(&gp, 1.0, &o, &o, 5.0).unwrap();
        assert_eq!(p.partial_sum, 1.0);
        assert_eq!(p.tail_bound, 0.0);
        assert_eq!(p.samples_used, 1);
    }

    #[test]
    fn schottky_certificate_margin() {
        let gp = GroupPresentation::preset_schottky();
        assert!(gp.ping_pong_margin().unwrap() >= PING_PONG_THRESHOLD);
    }

    #[test]
    fn overlapping_half_spaces_fail_certificate() {
        let r = GroupPresentation::schottky(
            2,
            &[BoostDescriptor::new(1.0, 1), BoostDescriptor::new(1.0, 2)],
            &["a", "b"],
        );
        match r {
            Err(Error::PingPongFailed { margin, .. }) => assert!(margin < 0.05),
            other => panic!("expected ping-pong failure, got {other:?}"),
        }
    }

    #[test]
    fn delta_estimates_cyclic_near_zero() {
        let gp = GroupPresentation::preset_cyclic();
        let est = estimate_delta(&gp, 400.0).unwrap();
        assert_eq!(est.orbit_size, 201);
        assert!(est.counting.abs() <= 0.05, "counting = {}", est.counting);
        assert!(est.abscissa.abs() <= 0.05, "abscissa = {}", est.abscissa);
    }

    #[test]
    fn delta_estimate_h3_schottky_below_rho() {
        // well-separated Schottky in H³: critical exponent clearly under ρ = 1
        let gp = GroupPresentation::schottky(
            3,
            &[BoostDescriptor::new(6.0, 1), BoostDescriptor::new(6.5, 2)],
            &["a", "b"],
        )
        .unwrap();
        let est = estimate_delta(&gp, 36.0).unwrap();
        assert!(est.orbit_size >= 200);
        assert!(est.counting < 1.0 && est.counting > 0.0, "counting = {}", est.counting);
        assert!(est.abscissa < 1.0, "abscissa = {}", est.abscissa);
    }

    #[test]
    fn orbit_distances_invariant_under_group_shift() {
        let gp = GroupPresentation::preset_cyclic();
        let o = origin(3).unwrap();
        let base = enumerate_orbit(&gp, &o, &o, 13.0).unwrap();
        let g = &gp.generators()[0];
        let go = apply(g, &o).unwrap();
        let shifted = enumerate_orbit(&gp, &go, &go, 13.0).unwrap();
        assert_eq!(base.len(), shifted.len());
        for (a, b) in base.iter().zip(&shifted) {
            assert_abs_diff_eq!(a.distance, b.distance, epsilon = 1e-9);
        }
    }

    #[test]
    fn uniform_poincare_basepoint_and_shifted_pairs() {
        let gp = GroupPresentation::preset_schottky();
        let o = origin(2).unwrap();
        let report =
            check_uniform_poincare(&gp, 0.4, &[(o.clone(), o.clone())], 13.0).unwrap();
        assert_abs_diff_eq!(report.max_ratio, 1.0, epsilon = 1e-12);
        let g = &gp.generators()[0];
        let go = apply(g, &o).unwrap();
        let report = check_uniform_poincare(&gp, 0.4, &[(go, o.clone())], 13.0).unwrap();
        assert!(report.max_ratio > 0.9 && report.max_ratio < 1.1, "ratio = {}", report.max_ratio);
    }

    #[test]
    fn uniform_poincare_rejects_divergent_exponent() {
        // the shell fit needs enough radius to see the true growth rate
        // (δ̂ ≈ 0.18 for this preset), so s = 0.05 sits below it
        let gp = GroupPresentation::preset_schottky();
        let o = origin(2).unwrap();
        match check_uniform_poincare(&gp, 0.05, &[(o.clone(), o.clone())], 36.0) {
            Err(Error::DivergentTail { .. }) => {}
            other => panic!("expected divergence rejection, got {other:?}"),
        }
    }
}
