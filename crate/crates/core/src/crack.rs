//! The crack family generated by an alpha-curve: sets of the form
//! `x0 + (psi + R gamma)[0, a]` with `psi` Lipschitz with constant
//! `L = c_gamma * ell^(1/alpha - 1) / 2` and `psi(0) = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::{AlphaCurve, CurveSpec};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Default number of uniform intervals for a perturbation.
pub const DEFAULT_PSI_INTERVALS: usize = 64;

const LIP_RTOL: f64 = 1e-12;
const AGREE_TOL: f64 = 1e-12;
const RECOVERY_TOL: f64 = 1e-9;

/// Orthogonal matrix `rot(angle) * diag(1, ±1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rotation {
    pub angle: f64,
    pub reflect: bool,
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { angle: 0.0, reflect: false };

    pub fn new(angle: f64, reflect: bool) -> Self {
        Rotation { angle, reflect }
    }

    /// Row-major 2×2 matrix.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.angle.sin_cos();
        let f = if self.reflect { -1.0 } else { 1.0 };
        [[c, -s * f], [s, c * f]]
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = self.matrix();
        Point::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
    }

    fn approx_eq(&self, other: &Rotation) -> bool {
        let (a, b) = (self.matrix(), other.matrix());
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= AGREE_TOL))
    }
}

/// Piecewise-linear map `[0, ell] -> R^2` given by its values at sorted knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    knots: Vec<f64>,
    values: Vec<Point>,
}

impl Perturbation {
    /// The zero map on a uniform grid of `intervals` pieces.
    pub fn zero(ell: f64, intervals: usize) -> Self {
        let n = intervals.max(1);
        Perturbation {
            knots: (0..=n).map(|i| ell * i as f64 / n as f64).collect(),
            values: vec![Point::ORIGIN; n + 1],
        }
    }

    /// Values on the uniform grid `ell * i / (values.len() - 1)`.
    pub fn uniform(ell: f64, values: Vec<Point>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation("a perturbation needs at least two knots".into()));
        }
        let n = values.len() - 1;
        let knots = (0..=n).map(|i| ell * i as f64 / n as f64).collect();
        Self::from_knots(knots, values)
    }

    /// Samples `f` on a uniform grid.
    pub fn from_fn(ell: f64, intervals: usize, f: impl Fn(f64) -> Point) -> Result<Self> {
        let n = intervals.max(1);
        let values = (0..=n).map(|i| f(ell * i as f64 / n as f64)).collect();
        Self::uniform(ell, values)
    }

    pub fn from_knots(knots: Vec<f64>, values: Vec<Point>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::Validation("knot and value counts must match (>= 2)".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("perturbation knots must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("perturbation values must be finite".into()));
        }
        Ok(Perturbation { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn eval(&self, s: f64) -> Point {
        let k = &self.knots;
        if s <= k[0] {
            return self.values[0];
        }
        if s >= k[k.len() - 1] {
            return self.values[k.len() - 1];
        }
        let i = k.partition_point(|&t| t <= s) - 1;
        let t = (s - k[i]) / (k[i + 1] - k[i]);
        self.values[i] + (self.values[i + 1] - self.values[i]) * t
    }

    /// Exact Lipschitz constant of the piecewise-linear map.
    pub fn lipschitz_constant(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| v[1].distance(v[0]) / (k[1] - k[0]))
            .fold(0.0, f64::max)
    }

    /// True when both maps agree within `tol` on `[0, upto]` (checked at every
    /// knot of either map in that range, and at `upto`).
    pub fn agrees_on(&self, other: &Perturbation, upto: f64, tol: f64) -> bool {
        self.knots
            .iter()
            .chain(other.knots.iter())
            .copied()
            .filter(|&s| s <= upto)
            .chain(std::iter::once(upto))
            .all(|s| self.eval(s).distance(other.eval(s)) <= tol)
    }
}

/// Serializable crack description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackSpec {
    pub curve: CurveSpec,
    /// `[s, vx, vy]` triples; omitted means the zero perturbation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub angle: f64,
    #[serde(default)]
    pub reflect: bool,
    pub a: f64,
    pub origin: [f64; 2],
}

/// One member of the crack family.
#[derive(Debug, Clone)]
pub struct Crack {
    curve: Arc<AlphaCurve>,
    psi: Perturbation,
    rotation: Rotation,
    a: f64,
    origin: Point,
}

/// Outcome of the sampled separation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub pass: bool,
    pub worst_ratio: f64,
    pub worst_pair: (f64, f64),
}

impl Crack {
    /// Validated constructor.
    pub fn new(
        curve: Arc<AlphaCurve>,
        psi: Perturbation,
        rotation: Rotation,
        a: f64,
        origin: Point,
    ) -> Result<Self> {
        let crack = Crack { curve, psi, rotation, a, origin };
        crack.validate()?;
        Ok(crack)
    }

    /// Builds a crack without checking the family invariants. Useful to probe
    /// the checkers with inadmissible perturbations.
    pub fn new_unchecked(
        curve: Arc<AlphaCurve>,
        psi: Perturbation,
        rotation: Rotation,
        a: f64,
        origin: Point,
    ) -> Self {
        Crack { curve, psi, rotation, a, origin }
    }

    /// Unperturbed crack `x0 + R gamma[0, a]`.
    pub fn straight(curve: Arc<AlphaCurve>, rotation: Rotation, a: f64, origin: Point) -> Result<Self> {
        let psi = Perturbation::zero(curve.ell(), DEFAULT_PSI_INTERVALS);
        Self::new(curve, psi, rotation, a, origin)
    }

    pub fn validate(&self) -> Result<()> {
        let ell = self.curve.ell();
        if !(0.0..=ell).contains(&self.a) {
            return Err(Error::Validation(format!("tip {} outside [0, {ell}]", self.a)));
        }
        let knots = self.psi.knots();
        if knots[0] != 0.0 || (knots[knots.len() - 1] - ell).abs() > 1e-12 {
            return Err(Error::Validation("perturbation must be defined on [0, ell]".into()));
        }
        if self.psi.values()[0] != Point::ORIGIN {
            return Err(Error::Validation("perturbation must vanish at 0".into()));
        }
        let lip = self.psi.lipschitz_constant();
        let bound = self.lipschitz_bound();
        if lip > bound * (1.0 + LIP_RTOL) {
            return Err(Error::Validation(format!(
                "perturbation Lipschitz constant {lip} exceeds L = {bound}"
            )));
        }
        if !self.origin.is_finite() || !self.rotation.angle.is_finite() {
            return Err(Error::Validation("origin and angle must be finite".into()));
        }
        Ok(())
    }

    pub fn curve(&self) -> &Arc<AlphaCurve> {
        &self.curve
    }

    pub fn psi(&self) -> &Perturbation {
        &self.psi
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn tip(&self) -> f64 {
        self.a
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// `L = c_gamma * ell^(1/alpha - 1) / 2`.
    pub fn lipschitz_bound(&self) -> f64 {
        lipschitz_bound(&self.curve)
    }

    /// Same perturbation, rotation and origin with a different tip.
    pub fn with_tip(&self, a: f64) -> Result<Self> {
        let mut c = self.clone();
        c.a = a;
        if !(0.0..=self.curve.ell()).contains(&a) {
            return Err(Error::Validation(format!("tip {a} outside [0, {}]", self.curve.ell())));
        }
        Ok(c)
    }

    /// `(psi + R gamma)(s)` at an exact depth-level junction, without the origin.
    fn junction_map(&self, verts: &[Point], j: usize, step: f64) -> Point {
        self.psi.eval(j as f64 * step) + self.rotation.apply(verts[j])
    }

    /// Polyline vertices with their parameters: every depth-level junction in
    /// `[0, a]`, then `a` itself (on the junction polyline) if it is not a junction.
    pub fn sample_with_parameters(&self, depth: u32) -> Vec<(f64, Point)> {
        let verts = self.curve.prefractal(depth);
        let cells = verts.len() - 1;
        let step = self.curve.ell() / cells as f64;
        let scaled = self.a / step;
        let last = (scaled.floor() as usize).min(cells);
        let mut out: Vec<(f64, Point)> = (0..=last)
            .map(|j| (j as f64 * step, self.origin + self.junction_map(&verts, j, step)))
            .collect();
        let frac = scaled - last as f64;
        if last < cells && frac > 0.0 {
            let p = out[last].1;
            let q = self.origin + self.junction_map(&verts, last + 1, step);
            out.push((self.a, p + (q - p) * frac));
        }
        out
    }

    /// Ordered crack polyline at `depth`; a single point `x0` when `a = 0`.
    pub fn sample(&self, depth: u32) -> Vec<Point> {
        self.sample_with_parameters(depth).into_iter().map(|(_, p)| p).collect()
    }

    /// Alpha-measure of the crack: its tip parameter.
    pub fn alpha_measure(&self) -> f64 {
        self.a
    }

    /// Sampled check of `|f(s1) - f(s2)| >= (c/2) |s1 - s2|^(1/alpha)` for
    /// `f = psi + R gamma` over all depth-level junction pairs of `[0, ell]`.
    pub fn verify_separation(&self, depth: u32) -> Result<SeparationReport> {
        if depth < 2 {
            return Err(Error::Domain("separation check needs depth >= 2".into()));
        }
        let verts = self.curve.prefractal(depth);
        let cells = verts.len() - 1;
        let step = self.curve.ell() / cells as f64;
        let pts: Vec<Point> = (0..=cells).map(|j| self.junction_map(&verts, j, step)).collect();
        let inv_alpha = 1.0 / self.curve.alpha();
        let scale: Vec<f64> = (0..=cells).map(|m| (m as f64 * step).powf(inv_alpha)).collect();
        let mut worst = (f64::INFINITY, (0, 0));
        for i in 0..cells {
            for j in i + 1..=cells {
                let r = pts[i].distance(pts[j]) / scale[j - i];
                if r < worst.0 {
                    worst = (r, (i, j));
                }
            }
        }
        let threshold = 0.5 * self.curve.holder_c();
        Ok(SeparationReport {
            pass: worst.0 >= threshold * (1.0 - LIP_RTOL),
            worst_ratio: worst.0,
            worst_pair: (worst.1 .0 as f64 * step, worst.1 .1 as f64 * step),
        })
    }

    /// True when both cracks describe the same set: same curve, origin,
    /// rotation and tip, and perturbations agreeing on `[0, a]`.
    pub fn same_set_as(&self, other: &Crack, tol: f64) -> bool {
        self.shares_frame(other)
            && (self.a - other.a).abs() <= tol
            && self.psi.agrees_on(&other.psi, self.a.min(other.a), tol)
    }

    fn shares_frame(&self, other: &Crack) -> bool {
        (Arc::ptr_eq(&self.curve, &other.curve) || self.curve.spec() == other.curve.spec())
            && self.origin.distance(other.origin) <= AGREE_TOL
            && self.rotation.approx_eq(&other.rotation)
    }

    pub fn to_spec(&self) -> CrackSpec {
        CrackSpec {
            curve: self.curve.spec().clone(),
            psi: Some(
                self.psi
                    .knots()
                    .iter()
                    .zip(self.psi.values())
                    .map(|(&s, v)| [s, v.x, v.y])
                    .collect(),
            ),
            angle: self.rotation.angle,
            reflect: self.rotation.reflect,
            a: self.a,
            origin: [self.origin.x, self.origin.y],
        }
    }

    /// Builds the crack of `spec` on an already certified curve. The curve must
    /// match `spec.curve`.
    pub fn from_spec_with_curve(spec: &CrackSpec, curve: Arc<AlphaCurve>) -> Result<Self> {
        if curve.spec() != &spec.curve {
            return Err(Error::Validation("crack curve does not match the supplied curve".into()));
        }
        let psi = match &spec.psi {
            None => Perturbation::zero(curve.ell(), DEFAULT_PSI_INTERVALS),
            Some(rows) => Perturbation::from_knots(
                rows.iter().map(|r| r[0]).collect(),
                rows.iter().map(|r| Point::new(r[1], r[2])).collect(),
            )?,
        };
        Crack::new(
            curve,
            psi,
            Rotation::new(spec.angle, spec.reflect),
            spec.a,
            Point::new(spec.origin[0], spec.origin[1]),
        )
    }

    pub fn from_spec(spec: &CrackSpec, certification_depth: u32) -> Result<Self> {
        let curve = Arc::new(AlphaCurve::from_spec(&spec.curve, certification_depth)?);
        Self::from_spec_with_curve(spec, curve)
    }

    /// Hex SHA-256 of the JSON description.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&self.to_spec()).expect("crack spec serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

pub fn lipschitz_bound(curve: &AlphaCurve) -> f64 {
    0.5 * curve.holder_c() * curve.ell().powf(-1.0 + 1.0 / curve.alpha())
}

/// Alpha-measure of `K \ H` for a prefix `H` of `K`.
pub fn measure_difference(k: &Crack, h: &Crack) -> Result<f64> {
    if !k.shares_frame(h) {
        return Err(Error::Precondition(
            "cracks must share curve, origin and rotation".into(),
        ));
    }
    if h.a > k.a {
        return Err(Error::Precondition(format!(
            "H (tip {}) is not contained in K (tip {})",
            h.a, k.a
        )));
    }
    if !k.psi.agrees_on(&h.psi, h.a, AGREE_TOL) {
        return Err(Error::Precondition(
            "perturbations disagree on the common prefix".into(),
        ));
    }
    Ok(k.a - h.a)
}

/// The extension `K_n` of `H_n` towards `K`: tip `max(H_n.a, K.a)`, perturbation
/// equal to `H_n`'s up to its tip and to `K`'s (shifted to stay continuous)
/// beyond it.
pub fn extend(h_n: &Crack, k: &Crack) -> Result<Crack> {
    if !h_n.shares_frame(k) {
        return Err(Error::Precondition(
            "cracks must share curve, origin and rotation".into(),
        ));
    }
    let a_n = h_n.a;
    let b_n = a_n.max(k.a);
    let shift = h_n.psi.eval(a_n) - k.psi.eval(a_n);

    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (&s, &v) in h_n.psi.knots().iter().zip(h_n.psi.values()) {
        if s < a_n {
            knots.push(s);
            values.push(v);
        }
    }
    knots.push(a_n);
    values.push(h_n.psi.eval(a_n));
    for (&s, &v) in k.psi.knots().iter().zip(k.psi.values()) {
        if s > a_n {
            knots.push(s);
            values.push(v + shift);
        }
    }
    if knots.len() < 2 {
        // a_n = ell: nothing beyond the tip
        knots = h_n.psi.knots().to_vec();
        values = h_n.psi.values().to_vec();
    }
    let psi = Perturbation::from_knots(knots, values)?;
    let lip = psi.lipschitz_constant();
    let bound = h_n.lipschitz_bound();
    if lip > bound * (1.0 + LIP_RTOL) {
        return Err(Error::Construction(format!(
            "extended perturbation has Lipschitz constant {lip} > L = {bound}"
        )));
    }
    Ok(Crack {
        curve: Arc::clone(&h_n.curve),
        psi,
        rotation: h_n.rotation,
        a: b_n,
        origin: h_n.origin,
    })
}

/// Recovers the tip parameter of a prefix sample of `crack` (any tip) at `depth`.
pub fn prefix_recovery(points: &[Point], crack: &Crack, depth: u32) -> Result<f64> {
    let full = crack.with_tip(crack.curve.ell())?.sample_with_parameters(depth);
    let n = points.len();
    if n == 0 {
        return Err(Error::Recognition("empty point list".into()));
    }
    if n > full.len() {
        return Err(Error::Recognition(format!(
            "{n} points exceed the {} vertices of the full crack",
            full.len()
        )));
    }
    for (i, p) in points[..n - 1].iter().enumerate() {
        if p.distance(full[i].1) > RECOVERY_TOL {
            return Err(Error::Recognition(format!(
                "point {i} is not the crack vertex at s = {}",
                full[i].0
            )));
        }
    }
    let last = points[n - 1];
    if last.distance(full[n - 1].1) <= RECOVERY_TOL {
        return Ok(full[n - 1].0);
    }
    if n < 2 {
        return Err(Error::Recognition("sample does not start at the crack origin".into()));
    }
    // The tip lies strictly inside the segment from vertex n-2 to vertex n-1.
    let (s0, p) = full[n - 2];
    let (s1, q) = full[n - 1];
    let d = q - p;
    let t = (last - p).dot(d) / d.dot(d);
    let foot = p + d * t;
    if !(0.0..=1.0).contains(&t) || foot.distance(last) > RECOVERY_TOL {
        return Err(Error::Recognition("last point is off the crack polyline".into()));
    }
    Ok(s0 + t * (s1 - s0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::koch_curve;

    fn curve() -> Arc<AlphaCurve> {
        Arc::new(koch_curve(5))
    }

    fn zig(curve: &Arc<AlphaCurve>, amp: f64) -> Perturbation {
        let l = lipschitz_bound(curve) * amp;
        // triangle wave of slope ±l in direction (0.6, 0.8)
        Perturbation::from_fn(curve.ell(), 64, |s| {
            let period = 0.125;
            let ph = s % period;
            let tri = if ph < period / 2.0 { ph } else { period - ph };
            Point::new(0.6, 0.8) * (l * tri)
        })
        .unwrap()
    }

    #[test]
    fn rotation_matrices_are_orthogonal() {
        for (angle, reflect) in [(0.0, false), (0.7, false), (2.1, true), (-1.3, true)] {
            let m = Rotation::new(angle, reflect).matrix();
            for i in 0..2 {
                for j in 0..2 {
                    let mtm: f64 = (0..2).map(|k| m[k][i] * m[k][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((mtm - id).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_tip_samples_to_origin() {
        let c = Crack::straight(curve(), Rotation::IDENTITY, 0.0, Point::new(0.2, 0.3)).unwrap();
        assert_eq!(c.sample(4), vec![Point::new(0.2, 0.3)]);
        assert_eq!(c.alpha_measure(), 0.0);
    }

    #[test]
    fn unperturbed_full_crack_is_the_prefractal() {
        let cv = curve();
        let c = Crack::straight(cv.clone(), Rotation::IDENTITY, 1.0, Point::ORIGIN).unwrap();
        assert_eq!(c.sample(4), cv.prefractal(4));
    }

    #[test]
    fn quarter_turn_rotates_samples() {
        let cv = curve();
        let plain = Crack::straight(cv.clone(), Rotation::IDENTITY, 1.0, Point::ORIGIN).unwrap();
        let turned = Crack::straight(
            cv,
            Rotation::new(std::f64::consts::FRAC_PI_2, false),
            1.0,
            Point::ORIGIN,
        )
        .unwrap();
        for (p, q) in plain.sample(6).iter().zip(turned.sample(6)) {
            assert!(q.distance(Point::new(-p.y, p.x)) < 1e-12);
        }
    }

    #[test]
    fn lipschitz_violation_rejected() {
        let cv = curve();
        let err = Crack::new(cv.clone(), zig(&cv, 1.5), Rotation::IDENTITY, 0.5, Point::ORIGIN);
        assert!(matches!(err, Err(Error::Validation(_))));
        assert!(Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::IDENTITY, 0.5, Point::ORIGIN).is_ok());
        let bad_tip = Crack::straight(cv, Rotation::IDENTITY, 1.2, Point::ORIGIN);
        assert!(bad_tip.is_err());
    }

    #[test]
    fn perturbation_must_vanish_at_zero() {
        let cv = curve();
        let psi = Perturbation::from_fn(1.0, 8, |_| Point::new(0.01, 0.0)).unwrap();
        assert!(Crack::new(cv, psi, Rotation::IDENTITY, 0.5, Point::ORIGIN).is_err());
    }

    #[test]
    fn alpha_measure_ignores_psi_and_rotation() {
        let cv = curve();
        for (psi, rot) in [
            (Perturbation::zero(1.0, 64), Rotation::IDENTITY),
            (zig(&cv, 1.0), Rotation::new(1.0, true)),
        ] {
            let c = Crack::new(cv.clone(), psi, rot, 0.3, Point::ORIGIN).unwrap();
            assert_eq!(c.alpha_measure(), 0.3);
        }
        let full = Crack::straight(cv.clone(), Rotation::IDENTITY, cv.ell(), Point::ORIGIN).unwrap();
        assert_eq!(full.alpha_measure(), cv.ell());
    }

    #[test]
    fn measure_difference_cases() {
        let cv = curve();
        let k = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::IDENTITY, 0.7, Point::ORIGIN).unwrap();
        assert_eq!(measure_difference(&k, &k).unwrap(), 0.0);
        let h = k.with_tip(0.4).unwrap();
        assert!((measure_difference(&k, &h).unwrap() - 0.3).abs() < 1e-15);
        let whole = k.with_tip(1.0).unwrap();
        let empty = k.with_tip(0.0).unwrap();
        assert_eq!(measure_difference(&whole, &empty).unwrap(), 1.0);
        assert!(matches!(measure_difference(&h, &k), Err(Error::Precondition(_))));
        let other = Crack::straight(cv, Rotation::IDENTITY, 0.4, Point::ORIGIN).unwrap();
        assert!(matches!(measure_difference(&k, &other), Err(Error::Precondition(_))));
    }

    #[test]
    fn extend_of_identical_cracks_is_the_crack() {
        let cv = curve();
        let k = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::IDENTITY, 0.6, Point::ORIGIN).unwrap();
        let e = extend(&k, &k).unwrap();
        assert!(e.same_set_as(&k, 1e-15));
        assert!(e.psi().agrees_on(k.psi(), 1.0, 1e-15));
    }

    #[test]
    fn extend_keeps_longer_prefix() {
        let cv = curve();
        let h = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::IDENTITY, 0.8, Point::ORIGIN).unwrap();
        let k = Crack::straight(cv, Rotation::IDENTITY, 0.5, Point::ORIGIN).unwrap();
        let e = extend(&h, &k).unwrap();
        assert_eq!(e.tip(), 0.8);
        assert!(e.same_set_as(&h, 1e-15));
    }

    #[test]
    fn extend_contains_its_prefix_and_shifts_the_tail() {
        let cv = curve();
        let h = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::IDENTITY, 0.33, Point::ORIGIN).unwrap();
        let k = Crack::straight(cv, Rotation::IDENTITY, 0.9, Point::ORIGIN).unwrap();
        let e = extend(&h, &k).unwrap();
        assert_eq!(e.tip(), 0.9);
        assert!((measure_difference(&e, &h).unwrap() - (0.9 - 0.33)).abs() < 1e-15);
        let shift = h.psi().eval(0.33);
        for s in [0.4, 0.5, 0.77, 1.0] {
            assert!(e.psi().eval(s).distance(shift) < 1e-15);
        }
    }

    #[test]
    fn extend_flags_corrupted_inputs() {
        let cv = curve();
        let h = Crack::new_unchecked(cv.clone(), zig(&cv, 3.0), Rotation::IDENTITY, 0.4, Point::ORIGIN);
        let k = Crack::straight(cv, Rotation::IDENTITY, 0.9, Point::ORIGIN).unwrap();
        assert!(matches!(extend(&h, &k), Err(Error::Construction(_))));
    }

    #[test]
    fn separation_holds_without_perturbation() {
        let cv = curve();
        let c = Crack::straight(cv.clone(), Rotation::new(0.4, true), 1.0, Point::ORIGIN).unwrap();
        let rep = c.verify_separation(4).unwrap();
        assert!(rep.pass);
        assert!(rep.worst_ratio >= cv.holder_c() * (1.0 - 1e-12));
    }

    #[test]
    fn separation_holds_at_the_lipschitz_bound() {
        let cv = curve();
        let l = lipschitz_bound(&cv);
        // linear pull of slope exactly L along the direction opposite to the chord
        let psi = Perturbation::from_fn(1.0, 64, |s| Point::new(-l * s, 0.0)).unwrap();
        assert!((psi.lipschitz_constant() - l).abs() < 1e-15);
        let c = Crack::new(cv.clone(), psi, Rotation::IDENTITY, 1.0, Point::ORIGIN).unwrap();
        let rep = c.verify_separation(4).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.worst_ratio >= 0.5 * cv.holder_c());

        let c = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::new(2.0, false), 1.0, Point::ORIGIN).unwrap();
        assert!(c.verify_separation(4).unwrap().pass);
    }

    #[test]
    fn separation_fails_for_steep_adversarial_perturbation() {
        let cv = curve();
        let l = lipschitz_bound(&cv);
        // Pull gamma(s2) towards gamma(s1) with slope 3L on [s1, s2].
        let (s1, s2) = (0.25, 0.75);
        let d = cv.evaluate(s1, 5).unwrap() - cv.evaluate(s2, 5).unwrap();
        let dir = d * (1.0 / d.norm());
        let psi = Perturbation::from_fn(1.0, 64, |s| dir * (3.0 * l * (s.clamp(s1, s2) - s1))).unwrap();
        let c = Crack::new_unchecked(cv.clone(), psi, Rotation::IDENTITY, 1.0, Point::ORIGIN);
        let rep = c.verify_separation(4).unwrap();
        assert!(!rep.pass, "{rep:?}");
        assert!(rep.worst_ratio < 0.5 * cv.holder_c());
    }

    #[test]
    fn prefix_recovery_round_trips() {
        let cv = curve();
        let c = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::new(0.3, false), 1.0, Point::new(0.1, 0.2)).unwrap();
        assert_eq!(prefix_recovery(&[c.origin()], &c, 4).unwrap(), 0.0);
        assert_eq!(prefix_recovery(&c.sample(4), &c, 4).unwrap(), 1.0);
        for a in [0.37, 0.5, 0.0625, 0.999] {
            let pts = c.with_tip(a).unwrap().sample(4);
            let sigma = prefix_recovery(&pts, &c, 4).unwrap();
            assert!((sigma - a).abs() < 1e-12, "{a} -> {sigma}");
        }
    }

    #[test]
    fn prefix_recovery_rejects_foreign_points() {
        let cv = curve();
        let c = Crack::straight(cv, Rotation::IDENTITY, 1.0, Point::ORIGIN).unwrap();
        assert!(matches!(prefix_recovery(&[], &c, 3), Err(Error::Recognition(_))));
        assert!(matches!(
            prefix_recovery(&[Point::new(0.5, 0.5)], &c, 3),
            Err(Error::Recognition(_))
        ));
        let mut pts = c.with_tip(0.5).unwrap().sample(3);
        pts[3].y += 0.01;
        assert!(matches!(prefix_recovery(&pts, &c, 3), Err(Error::Recognition(_))));
    }

    #[test]
    fn spec_round_trip() {
        let cv = curve();
        let c = Crack::new(cv.clone(), zig(&cv, 1.0), Rotation::new(0.3, true), 0.6, Point::new(0.1, 0.2)).unwrap();
        let json = serde_json::to_string(&c.to_spec()).unwrap();
        let spec: CrackSpec = serde_json::from_str(&json).unwrap();
        let back = Crack::from_spec_with_curve(&spec, cv).unwrap();
        assert!(back.same_set_as(&c, 0.0));
        assert_eq!(back.content_hash(), c.content_hash());
    }
}
