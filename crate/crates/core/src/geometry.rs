//! Planar points, Hausdorff distance between finite samples, box counting and
//! covering contents.

use std::collections::HashSet;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Point) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of(points: &[Point]) -> Option<Self> {
        let first = *points.first()?;
        let mut bb = BoundingBox { min: first, max: first };
        for p in &points[1..] {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// A finite sample of a compact planar set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    bbox: Option<BoundingBox>,
}

impl PointSet {
    /// Wraps a list of points. Coordinates must be finite.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {p:?}")));
        }
        let bbox = BoundingBox::of(&points);
        Ok(PointSet { points, bbox })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        self.bbox
    }

    /// Largest nearest-neighbour distance in the set: the scale below which the
    /// sample no longer resolves the underlying set. Zero for fewer than two points.
    pub fn sampling_resolution(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let bb = self.bbox.expect("non-empty");
        let extent = bb.width().max(bb.height());
        if extent == 0.0 {
            return 0.0;
        }
        let cell = (extent / (n as f64).sqrt()).max(f64::MIN_POSITIVE);
        let key = |p: &Point| {
            (
                ((p.x - bb.min.x) / cell).floor() as i64,
                ((p.y - bb.min.y) / cell).floor() as i64,
            )
        };
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            buckets.entry(key(p)).or_default().push(i);
        }
        let mut worst = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            let (kx, ky) = key(p);
            let mut best = f64::INFINITY;
            let mut ring = 0i64;
            // Search growing rings until the best candidate cannot be beaten.
            loop {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        if let Some(ids) = buckets.get(&(kx + dx, ky + dy)) {
                            for &j in ids {
                                if j != i {
                                    best = best.min(p.distance_squared(self.points[j]));
                                }
                            }
                        }
                    }
                }
                let reach = ring as f64 * cell;
                if best.is_finite() && best.sqrt() <= reach {
                    break;
                }
                ring += 1;
            }
            worst = worst.max(best.sqrt());
        }
        worst
    }
}

fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let mut worst = 0.0f64;
    for p in a {
        let nearest = b
            .iter()
            .map(|q| p.distance_squared(*q))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    worst.sqrt()
}

/// Exact Hausdorff distance between two finite samples, by brute force.
pub fn hausdorff_distance(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain(
            "Hausdorff distance needs two non-empty sets".into(),
        ));
    }
    Ok(directed_hausdorff(a.points(), b.points()).max(directed_hausdorff(b.points(), a.points())))
}

/// Number of half-open grid cells of side `eps` (anchored at the bounding-box
/// minimum corner) containing at least one point. Points on the far edge of the
/// bounding box are assigned to the last cell.
pub fn box_count(points: &PointSet, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("box size must be positive, got {eps}")));
    }
    let Some(bb) = points.bounding_box() else {
        return Ok(0);
    };
    let cells_along = |extent: f64| ((extent / eps).ceil() as i64).max(1);
    let (nx, ny) = (cells_along(bb.width()), cells_along(bb.height()));
    let mut occupied = HashSet::with_capacity(points.len());
    for p in points.points() {
        let ix = (((p.x - bb.min.x) / eps).floor() as i64).min(nx - 1);
        let iy = (((p.y - bb.min.y) / eps).floor() as i64).min(ny - 1);
        occupied.insert((ix, iy));
    }
    Ok(occupied.len())
}

/// Covering pre-measure `N(eps) * eps^alpha` with unit normalization.
pub fn alpha_content(points: &PointSet, eps: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    Ok(box_count(points, eps)? as f64 * eps.powf(alpha))
}

/// Least-squares fit of `log N(eps)` against `log(1/eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Set when some box size is below the sampling resolution of the input.
    pub unreliable: bool,
}

pub fn box_dimension_estimate(points: &PointSet, eps_list: &[f64]) -> Result<DimensionEstimate> {
    if eps_list.len() < 3 {
        return Err(Error::Domain("need at least three box sizes".into()));
    }
    let (lo, hi) = eps_list
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Domain("box sizes must span at least one decade".into()));
    }
    let resolution = points.sampling_resolution();
    let unreliable = eps_list.iter().any(|&e| e < resolution);

    let mut xs = Vec::with_capacity(eps_list.len());
    let mut ys = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        xs.push((1.0 / eps).ln());
        ys.push((box_count(points, eps)? as f64).ln());
    }
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    Ok(DimensionEstimate { slope, intercept, r2, unreliable })
}

/// Ordinary least squares `y = slope * x + intercept`; returns (slope, intercept, r²).
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Points along a polyline with consecutive spacing at most `spacing`; the
/// polyline vertices are kept.
pub fn densify(polyline: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    if let Some(&first) = polyline.first() {
        out.push(first);
    }
    for w in polyline.windows(2) {
        let (p, q) = (w[0], w[1]);
        let pieces = ((p.distance(q) / spacing).ceil() as usize).max(1);
        for k in 1..=pieces {
            out.push(p + (q - p) * (k as f64 / pieces as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment_samples(n: usize) -> PointSet {
        PointSet::new((0..n).map(|i| Point::new(i as f64 / (n - 1) as f64, 0.0)).collect()).unwrap()
    }

    #[test]
    fn hausdorff_of_identical_sets_is_zero() {
        let a = segment_samples(11);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_single_pair() {
        let a = PointSet::new(vec![Point::new(0.0, 0.0)]).unwrap();
        let b = PointSet::new(vec![Point::new(3.0, 4.0)]).unwrap();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn hausdorff_segment_to_endpoint() {
        let a = segment_samples(101);
        let b = PointSet::new(vec![Point::ORIGIN]).unwrap();
        // brute-force oracle: the farthest sample from the origin
        let oracle = a.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert_eq!(oracle, 1.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), oracle);
    }

    #[test]
    fn hausdorff_rejects_empty() {
        let a = PointSet::new(vec![]).unwrap();
        let b = segment_samples(3);
        assert!(matches!(hausdorff_distance(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn non_finite_points_rejected() {
        assert!(PointSet::new(vec![Point::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn box_count_single_point() {
        let a = PointSet::new(vec![Point::new(0.3, 0.7)]).unwrap();
        for eps in [1e-3, 0.1, 10.0] {
            assert_eq!(box_count(&a, eps).unwrap(), 1);
        }
    }

    #[test]
    fn box_count_unit_segment_half_open_cells() {
        // Ten cells of width 0.1 tile [0, 1]; the endpoint x = 1 joins the last cell.
        assert_eq!(box_count(&segment_samples(101), 0.1).unwrap(), 10);
    }

    #[test]
    fn box_count_rejects_nonpositive_eps() {
        assert!(box_count(&segment_samples(3), 0.0).is_err());
    }

    #[test]
    fn dimension_of_segment_and_point() {
        let seg = segment_samples(20_001);
        let eps: Vec<f64> = (1..=4).map(|k| 10f64.powi(-k)).collect();
        let est = box_dimension_estimate(&seg, &eps).unwrap();
        assert!((est.slope - 1.0).abs() < 0.1, "{est:?}");
        assert!(!est.unreliable);

        let point = PointSet::new(vec![Point::new(0.5, 0.5)]).unwrap();
        let est = box_dimension_estimate(&point, &eps).unwrap();
        assert!(est.slope.abs() < 1e-12);
    }

    #[test]
    fn dimension_flags_unresolved_scales() {
        let seg = segment_samples(11);
        let est = box_dimension_estimate(&seg, &[0.5, 0.05, 0.01]).unwrap();
        assert!(est.unreliable);
    }

    #[test]
    fn dimension_needs_a_decade() {
        let seg = segment_samples(11);
        assert!(box_dimension_estimate(&seg, &[0.5, 0.4, 0.3]).is_err());
    }

    #[test]
    fn segment_content_decays_like_eps_to_alpha_minus_one() {
        let alpha = 4f64.ln() / 3f64.ln();
        let seg = PointSet::new(densify(&[Point::ORIGIN, Point::new(1.0, 0.0)], 1e-4)).unwrap();
        let mut prev = alpha_content(&seg, 0.5, alpha).unwrap();
        let mut eps = 0.5;
        for _ in 0..5 {
            eps /= 2.0;
            let c = alpha_content(&seg, eps, alpha).unwrap();
            // N doubles, eps^alpha shrinks by 2^-alpha: ratio 2^(1 - alpha)
            assert!((c / prev - 2f64.powf(1.0 - alpha)).abs() < 0.02, "{}", c / prev);
            prev = c;
        }
    }

    #[test]
    fn area_content_bounded_by_box_area() {
        let pts: Vec<Point> = (0..50)
            .flat_map(|i| (0..30).map(move |j| Point::new(i as f64 * 0.02, j as f64 * 0.02)))
            .collect();
        let set = PointSet::new(pts).unwrap();
        let area = set.bounding_box().unwrap().area();
        for eps in [0.2, 0.1, 0.05, 0.02] {
            let c = alpha_content(&set, eps, 2.0).unwrap();
            let cells = (set.bounding_box().unwrap().width() / eps).ceil()
                * (set.bounding_box().unwrap().height() / eps).ceil();
            assert!(c <= cells * eps * eps + 1e-12);
            assert!(c <= area * 1.5 + 4.0 * eps, "eps {eps}: {c} vs {area}");
        }
    }

    #[test]
    fn sampling_resolution_of_regular_samples() {
        let seg = segment_samples(101);
        assert!((seg.sampling_resolution() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn densify_keeps_vertices_and_spacing() {
        let poly = [Point::ORIGIN, Point::new(1.0, 0.0), Point::new(1.0, 1.0)];
        let d = densify(&poly, 0.3);
        assert_eq!(d.first(), Some(&poly[0]));
        assert_eq!(d.last(), Some(&poly[2]));
        assert!(d.windows(2).all(|w| w[0].distance(w[1]) <= 0.3 + 1e-12));
        assert!(d.contains(&poly[1]));
    }
}
