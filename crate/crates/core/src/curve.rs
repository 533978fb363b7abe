//! Self-similar generator curves in their natural parametrization.
//!
//! A curve is the attractor of an end-to-end connected IFS of `k` similarities
//! with common ratio `r`, mapping the unit base segment `(0,0)-(1,0)`. The
//! parameter `s in [0, ell]` is read as a base-`k` address; the alpha-measure of
//! the arc between two parameters is the parameter difference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

const MORAN_TOL: f64 = 1e-12;
const JOINT_TOL: f64 = 1e-12;

/// Default depth at which Hölder constants are certified.
pub const DEFAULT_CERTIFICATION_DEPTH: u32 = 6;
/// Default number of random pairs added to the exhaustive vertex pairs.
pub const DEFAULT_PAIR_BUDGET: usize = 10_000;

/// `p -> ratio * rot(angle) * p + (tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Similarity {
    pub ratio: f64,
    pub angle: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Similarity {
    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(
            self.ratio * (c * p.x - s * p.y) + self.tx,
            self.ratio * (s * p.x + c * p.y) + self.ty,
        )
    }
}

/// Serializable curve description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Koch {},
    Ifs { maps: Vec<Similarity>, alpha: f64 },
}

fn koch_maps() -> Vec<Similarity> {
    let third = 1.0 / 3.0;
    let apex_y = 3f64.sqrt() / 6.0;
    let sixty = std::f64::consts::FRAC_PI_3;
    vec![
        Similarity { ratio: third, angle: 0.0, tx: 0.0, ty: 0.0 },
        Similarity { ratio: third, angle: sixty, tx: third, ty: 0.0 },
        Similarity { ratio: third, angle: -sixty, tx: 0.5, ty: apex_y },
        Similarity { ratio: third, angle: 0.0, tx: 2.0 * third, ty: 0.0 },
    ]
}

/// Empirical Hölder constants together with the pairs attaining them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub argmin: (f64, f64),
    pub argmax: (f64, f64),
    pub pairs: usize,
}

/// The generator curve of dimension `alpha` with certified Hölder constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCurve {
    spec: CurveSpec,
    maps: Vec<Similarity>,
    alpha: f64,
    ell: f64,
    holder_c: f64,
    holder_big_c: f64,
    certification_depth: u32,
}

/// The von Koch curve, certified at `depth_hint` (at least 2).
pub fn koch_curve(depth_hint: u32) -> AlphaCurve {
    AlphaCurve::from_spec(&CurveSpec::Koch {}, depth_hint).expect("Koch IFS is valid")
}

impl AlphaCurve {
    /// Builds and validates a curve, certifying its Hölder constants at
    /// `certification_depth` with the default pair budget and seed 0.
    pub fn from_spec(spec: &CurveSpec, certification_depth: u32) -> Result<Self> {
        let (maps, alpha) = match spec {
            CurveSpec::Koch {} => {
                let maps = koch_maps();
                (maps, 4f64.ln() / 3f64.ln())
            }
            CurveSpec::Ifs { maps, alpha } => (maps.clone(), *alpha),
        };
        validate_ifs(&maps, alpha)?;
        let mut curve = AlphaCurve {
            spec: spec.clone(),
            maps,
            alpha,
            ell: 1.0,
            holder_c: 0.0,
            holder_big_c: 0.0,
            certification_depth: certification_depth.max(2),
        };
        let est = curve.estimate_holder_constants(curve.certification_depth, DEFAULT_PAIR_BUDGET, 0)?;
        curve.holder_c = est.c;
        curve.holder_big_c = est.big_c;
        if !(0.0 < curve.holder_c && curve.holder_c <= curve.holder_big_c) {
            return Err(Error::Validation(format!(
                "degenerate Hölder constants c = {}, C = {}",
                curve.holder_c, curve.holder_big_c
            )));
        }
        Ok(curve)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total parameter length (alpha-measure of the whole curve).
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Certified lower Hölder constant.
    pub fn holder_c(&self) -> f64 {
        self.holder_c
    }

    /// Certified upper Hölder constant.
    pub fn holder_upper(&self) -> f64 {
        self.holder_big_c
    }

    pub fn certification_depth(&self) -> u32 {
        self.certification_depth
    }

    /// Common contraction ratio of the maps.
    pub fn ratio(&self) -> f64 {
        self.maps[0].ratio
    }

    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    /// Diameter bound of a depth-level cell (the base segment has length one).
    pub fn cell_diameter(&self, depth: u32) -> f64 {
        self.ratio().powi(depth as i32)
    }

    /// Number of depth-level cells, `k^depth`.
    pub fn cell_count(&self, depth: u32) -> usize {
        self.map_count().pow(depth)
    }

    /// Point of the curve attached to junction `index` at `depth`, i.e. the
    /// parameter `index * ell / k^depth`. Exact up to rounding.
    pub fn junction_point(&self, index: usize, depth: u32) -> Point {
        let k = self.map_count();
        let cells = self.cell_count(depth);
        debug_assert!(index <= cells);
        let (mut cell, base) = if index == cells {
            (cells - 1, Point::new(1.0, 0.0))
        } else {
            (index, Point::ORIGIN)
        };
        // Least significant digit is the innermost map.
        let mut p = base;
        for _ in 0..depth {
            p = self.maps[cell % k].apply(p);
            cell /= k;
        }
        p
    }

    /// Image of the base segment's left endpoint under the depth-level cell
    /// containing `s` (the last cell for `s = ell`, where the right endpoint is
    /// returned). Error is bounded by [`cell_diameter`](Self::cell_diameter).
    pub fn evaluate(&self, s: f64, depth: u32) -> Result<Point> {
        self.check_parameter(s)?;
        if depth < 1 {
            return Err(Error::Domain("evaluation depth must be at least 1".into()));
        }
        let cells = self.cell_count(depth);
        let scaled = s / self.ell * cells as f64;
        let index = (scaled.floor() as usize).min(cells);
        Ok(self.junction_point(index, depth))
    }

    /// Depth-level polygonal interpolant: exact at junctions, linear inside cells.
    pub fn polyline_point(&self, s: f64, depth: u32) -> Result<Point> {
        self.check_parameter(s)?;
        let cells = self.cell_count(depth);
        let scaled = s / self.ell * cells as f64;
        let index = (scaled.floor() as usize).min(cells);
        let frac = scaled - index as f64;
        let p = self.junction_point(index, depth);
        if index == cells || frac == 0.0 {
            return Ok(p);
        }
        let q = self.junction_point(index + 1, depth);
        Ok(p + (q - p) * frac)
    }

    /// Level-`n` pre-fractal: `k^n + 1` vertices in curve order.
    pub fn prefractal(&self, n: u32) -> Vec<Point> {
        let mut poly = vec![Point::ORIGIN, Point::new(1.0, 0.0)];
        for _ in 0..n {
            let last = self.maps.len() - 1;
            let mut next = Vec::with_capacity(poly.len() * self.maps.len());
            for (i, map) in self.maps.iter().enumerate() {
                let take = if i == last { poly.len() } else { poly.len() - 1 };
                next.extend(poly[..take].iter().map(|&p| map.apply(p)));
            }
            poly = next;
        }
        poly
    }

    /// Parameters of the pre-fractal vertices at `depth`.
    pub fn junction_parameters(&self, depth: u32) -> Vec<f64> {
        let cells = self.cell_count(depth);
        (0..=cells).map(|j| self.ell * j as f64 / cells as f64).collect()
    }

    /// Min and max of `|γ(s1) - γ(s2)| / |s1 - s2|^(1/alpha)` over every pair of
    /// depth-level vertices plus `pair_budget` seeded pairs of vertices two levels
    /// finer.
    pub fn estimate_holder_constants(
        &self,
        depth: u32,
        pair_budget: usize,
        seed: u64,
    ) -> Result<HolderEstimate> {
        if depth < 2 {
            return Err(Error::Domain("Hölder certification needs depth >= 2".into()));
        }
        if pair_budget < 1 {
            return Err(Error::Domain("pair budget must be at least 1".into()));
        }
        let verts = self.prefractal(depth);
        let cells = verts.len() - 1;
        let step = self.ell / cells as f64;
        let inv_alpha = 1.0 / self.alpha;
        let scale: Vec<f64> = (0..=cells)
            .map(|m| (m as f64 * step).powf(inv_alpha))
            .collect();

        let exhaustive = (0..cells)
            .into_par_iter()
            .map(|i| {
                let mut acc = Extremes::default();
                for j in i + 1..=cells {
                    let r = verts[i].distance(verts[j]) / scale[j - i];
                    acc.push(r, i, j);
                }
                acc
            })
            .reduce(Extremes::default, Extremes::merge);

        let fine_depth = depth + 2;
        let fine_cells = self.cell_count(fine_depth);
        let fine_step = self.ell / fine_cells as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = Extremes::default();
        let mut drawn = 0;
        while drawn < pair_budget {
            let a = rng.gen_range(0..=fine_cells);
            let b = rng.gen_range(0..=fine_cells);
            if a == b {
                continue;
            }
            let (i, j) = (a.min(b), a.max(b));
            let d = self.junction_point(i, fine_depth).distance(self.junction_point(j, fine_depth));
            let r = d / ((j - i) as f64 * fine_step).powf(inv_alpha);
            // Pairs are indexed on the fine grid; keep them apart from the coarse ones.
            random.push(r, i, j);
            drawn += 1;
        }

        let to_params = |(i, j): (usize, usize), st: f64| (i as f64 * st, j as f64 * st);
        let (c, argmin) = if random.min.0 < exhaustive.min.0 {
            (random.min.0, to_params(random.min.1, fine_step))
        } else {
            (exhaustive.min.0, to_params(exhaustive.min.1, step))
        };
        let (big_c, argmax) = if random.max.0 > exhaustive.max.0 {
            (random.max.0, to_params(random.max.1, fine_step))
        } else {
            (exhaustive.max.0, to_params(exhaustive.max.1, step))
        };
        Ok(HolderEstimate {
            c,
            big_c,
            argmin,
            argmax,
            pairs: cells * (cells + 1) / 2 + pair_budget,
        })
    }

    /// Alpha-measure of the arc `γ[s1, s2]`, which is `s2 - s1` by construction.
    pub fn measure_of_arc(&self, s1: f64, s2: f64) -> Result<f64> {
        self.check_parameter(s1)?;
        self.check_parameter(s2)?;
        if s1 > s2 {
            return Err(Error::Domain(format!("arc endpoints out of order: {s1} > {s2}")));
        }
        Ok(s2 - s1)
    }

    fn check_parameter(&self, s: f64) -> Result<()> {
        if !(0.0..=self.ell).contains(&s) {
            return Err(Error::Domain(format!(
                "parameter {s} outside [0, {}]",
                self.ell
            )));
        }
        Ok(())
    }
}

/// Running min/max with deterministic tie-break on the pair indices.
#[derive(Debug, Clone, Copy)]
struct Extremes {
    min: (f64, (usize, usize)),
    max: (f64, (usize, usize)),
}

impl Default for Extremes {
    fn default() -> Self {
        Extremes {
            min: (f64::INFINITY, (usize::MAX, usize::MAX)),
            max: (f64::NEG_INFINITY, (usize::MAX, usize::MAX)),
        }
    }
}

impl Extremes {
    fn push(&mut self, r: f64, i: usize, j: usize) {
        if r < self.min.0 || (r == self.min.0 && (i, j) < self.min.1) {
            self.min = (r, (i, j));
        }
        if r > self.max.0 || (r == self.max.0 && (i, j) < self.max.1) {
            self.max = (r, (i, j));
        }
    }

    fn merge(mut self, other: Extremes) -> Extremes {
        self.push(other.min.0, other.min.1 .0, other.min.1 .1);
        self.push(other.max.0, other.max.1 .0, other.max.1 .1);
        self
    }
}

fn validate_ifs(maps: &[Similarity], alpha: f64) -> Result<()> {
    if maps.len() < 2 {
        return Err(Error::Validation("an IFS needs at least two maps".into()));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Validation(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    let r = maps[0].ratio;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Validation(format!("contraction ratio {r} not in (0, 1)")));
    }
    if maps.iter().any(|m| (m.ratio - r).abs() > 1e-15) {
        return Err(Error::Validation("only equal-ratio IFSs are supported".into()));
    }
    let moran: f64 = maps.iter().map(|m| m.ratio.powf(alpha)).sum();
    if (moran - 1.0).abs() > MORAN_TOL {
        return Err(Error::Validation(format!(
            "Moran sum {moran} differs from 1 for alpha {alpha}"
        )));
    }
    let left = Point::ORIGIN;
    let right = Point::new(1.0, 0.0);
    if maps[0].apply(left).distance(left) > JOINT_TOL {
        return Err(Error::Validation("first map must fix the origin".into()));
    }
    if maps[maps.len() - 1].apply(right).distance(right) > JOINT_TOL {
        return Err(Error::Validation("last map must fix (1, 0)".into()));
    }
    for (i, pair) in maps.windows(2).enumerate() {
        let gap = pair[0].apply(right).distance(pair[1].apply(left));
        if gap > JOINT_TOL {
            return Err(Error::Validation(format!(
                "maps {i} and {} are not joined end to end (gap {gap:.3e})",
                i + 1
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn koch() -> AlphaCurve {
        koch_curve(4)
    }

    /// Bisection on the Moran function `k r^alpha - 1`, independent of the closed form.
    fn moran_root(k: f64, r: f64) -> f64 {
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k * r.powf(mid) - 1.0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn koch_dimension_matches_moran_root() {
        let c = koch();
        assert!((c.alpha() - moran_root(4.0, 1.0 / 3.0)).abs() < 1e-12);
        assert!((c.alpha() - 1.261_859_507_142_915).abs() < 1e-12);
        assert_eq!(c.ell(), 1.0);
        assert_eq!(c.map_count(), 4);
        assert!(c.maps().iter().all(|m| m.ratio == 1.0 / 3.0));
    }

    #[test]
    fn evaluate_at_endpoints_and_junctions() {
        let c = koch();
        let tol = 3f64.powi(-12);
        assert_eq!(c.evaluate(0.0, 12).unwrap(), Point::ORIGIN);
        assert!(c.evaluate(1.0, 12).unwrap().distance(Point::new(1.0, 0.0)) <= tol);
        // apex: composition of map 2 with the origin
        let apex = Point::new(0.5, 3f64.sqrt() / 6.0);
        assert_eq!(c.maps()[2].apply(Point::ORIGIN), apex);
        assert!(c.evaluate(0.5, 12).unwrap().distance(apex) <= tol);
        let third = c.maps()[1].apply(Point::ORIGIN);
        assert!(third.distance(Point::new(1.0 / 3.0, 0.0)) < 1e-15);
        assert!(c.evaluate(0.25, 12).unwrap().distance(Point::new(1.0 / 3.0, 0.0)) <= tol);
    }

    #[test]
    fn evaluate_rejects_out_of_range() {
        let c = koch();
        assert!(matches!(c.evaluate(-0.1, 4), Err(Error::Domain(_))));
        assert!(matches!(c.evaluate(1.5, 4), Err(Error::Domain(_))));
        assert!(matches!(c.evaluate(0.5, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn prefractal_levels() {
        let c = koch();
        assert_eq!(c.prefractal(0), vec![Point::ORIGIN, Point::new(1.0, 0.0)]);
        let expected = [
            Point::new(0.0, 0.0),
            Point::new(1.0 / 3.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 6.0),
            Point::new(2.0 / 3.0, 0.0),
            Point::new(1.0, 0.0),
        ];
        let l1 = c.prefractal(1);
        assert_eq!(l1.len(), 5);
        for (p, q) in l1.iter().zip(expected) {
            assert!(p.distance(q) < 1e-15, "{p:?} vs {q:?}");
        }
        assert_eq!(c.prefractal(5).len(), 1025);
    }

    #[test]
    fn prefractal_vertices_agree_with_evaluate() {
        let c = koch();
        let depth = 5;
        let verts = c.prefractal(depth);
        for (j, s) in c.junction_parameters(depth).into_iter().enumerate() {
            assert_eq!(verts[j], c.evaluate(s, depth).unwrap(), "vertex {j}");
        }
    }

    #[test]
    fn holder_estimate_brackets_endpoint_ratio() {
        let c = koch();
        let est = c.estimate_holder_constants(4, 500, 1).unwrap();
        assert!(est.c > 0.0 && est.c <= 1.0 && 1.0 <= est.big_c, "{est:?}");
        // the endpoint pair has ratio exactly 1
        let r = c.evaluate(0.0, 8).unwrap().distance(c.evaluate(1.0, 8).unwrap());
        assert_eq!(r, 1.0);
    }

    #[test]
    fn holder_ratio_is_scale_invariant_inside_a_cell() {
        // r / (1/k)^(1/alpha) = 1 for the Koch curve, so a pair inside cell 0 at
        // depth d+1 has the same ratio as the rescaled pair at depth d.
        let c = koch();
        let inv_alpha = 1.0 / c.alpha();
        let global = |i: usize, j: usize, d: u32| {
            let step = 1.0 / c.cell_count(d) as f64;
            c.junction_point(i, d).distance(c.junction_point(j, d))
                / ((j - i) as f64 * step).powf(inv_alpha)
        };
        for (i, j) in [(0, 5), (3, 17), (10, 64)] {
            let big = global(i, j, 3);
            let small = global(i, j, 4);
            assert!((big - small).abs() < 1e-12, "{big} vs {small}");
        }
    }

    #[test]
    fn holder_estimate_is_deterministic() {
        let c = koch();
        let a = c.estimate_holder_constants(3, 100, 7).unwrap();
        let b = c.estimate_holder_constants(3, 100, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn holder_estimate_preconditions() {
        let c = koch();
        assert!(c.estimate_holder_constants(1, 10, 0).is_err());
        assert!(c.estimate_holder_constants(3, 0, 0).is_err());
    }

    #[test]
    fn measure_of_arc_is_parameter_length() {
        let c = koch();
        assert_eq!(c.measure_of_arc(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(c.measure_of_arc(0.3, 0.3).unwrap(), 0.0);
        assert!((c.measure_of_arc(0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(c.measure_of_arc(0.7, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_broken_ifs() {
        let mut maps = koch_maps();
        maps[2].tx += 0.01;
        let spec = CurveSpec::Ifs { maps, alpha: 4f64.ln() / 3f64.ln() };
        assert!(matches!(AlphaCurve::from_spec(&spec, 3), Err(Error::Validation(_))));

        let spec = CurveSpec::Ifs { maps: koch_maps(), alpha: 1.3 };
        assert!(matches!(AlphaCurve::from_spec(&spec, 3), Err(Error::Validation(_))));

        let mut maps = koch_maps();
        maps[1].ratio = 0.3;
        let spec = CurveSpec::Ifs { maps, alpha: 4f64.ln() / 3f64.ln() };
        assert!(matches!(AlphaCurve::from_spec(&spec, 3), Err(Error::Validation(_))));
    }

    #[test]
    fn ifs_spec_round_trips_through_json() {
        let spec = CurveSpec::Ifs { maps: koch_maps(), alpha: 4f64.ln() / 3f64.ln() };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"ifs\""));
        let back: CurveSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let koch: CurveSpec = serde_json::from_str(r#"{"kind":"koch"}"#).unwrap();
        assert_eq!(koch, CurveSpec::Koch {});
        assert!(serde_json::from_str::<CurveSpec>(r#"{"kind":"koch","extra":1}"#).is_err());
    }

    #[test]
    fn explicit_ifs_matches_koch() {
        let spec = CurveSpec::Ifs { maps: koch_maps(), alpha: 4f64.ln() / 3f64.ln() };
        let c = AlphaCurve::from_spec(&spec, 3).unwrap();
        assert_eq!(c.prefractal(3), koch_curve(3).prefractal(3));
    }
}
