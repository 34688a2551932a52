//! Catalog of desk-scale base spaces presented as chart complexes.
//!
//! Each base is a fixed list of open parameter boxes with closed-form
//! overlap transfers and a built-in smooth partition of unity
//! subordinate to the cover.  The catalog keeps partitions analytically
//! smooth: every profile is glued from `exp(-1/t)` pieces, so it
//! vanishes with all derivatives at the support boundary.
//!
//! Curves in a base are piecewise chart-parameterised expression pairs;
//! they stand in for the local paths that horizontal lifting consumes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exprlang::{self, Dual, Env, Expr};
use crate::smooth::bump;
use std::f64::consts::TAU;

/// Stereographic chart radius for the two-disk sphere: each disk covers
/// `rho < SPHERE_R`, the overlap annulus is `1/SPHERE_R < rho < SPHERE_R`.
pub const SPHERE_R: f64 = 3.0;

const TORUS_ARCS: [(f64, f64); 2] = [(0.0, 0.6), (0.5, 1.1)];
const CIRCLE_ARCS: [(f64, f64); 2] = [(0.0, TAU), (std::f64::consts::PI, 3.0 * std::f64::consts::PI)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Interval,
    CircleTwoArcs,
    SphereTwoDisks,
    TorusFourSquares,
}

/// Open parameter box of one chart.
#[derive(Debug, Clone)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Periodic dimensions admit every coordinate value modulo the span.
    pub periodic: Vec<bool>,
    /// Closed lower edges (the radial origin of a polar chart).
    pub closed_lo: Vec<bool>,
    pub coord_names: Vec<&'static str>,
}

#[derive(Debug, Clone)]
pub struct BaseComplex {
    pub kind: BaseKind,
    pub name: String,
    pub eps: f64,
    charts: Vec<ChartBox>,
}

/// Point of the base: chart index plus parameter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl BasePoint {
    pub fn new(chart: usize, coords: Vec<f64>) -> Self {
        BasePoint { chart, coords }
    }
}

/// Builds a catalog base with the default partition parameter.
pub fn catalog(name: &str) -> Result<BaseComplex> {
    catalog_with_eps(name, 0.1)
}

/// Builds a catalog base; `eps` controls the flat ends of every bump.
pub fn catalog_with_eps(name: &str, eps: f64) -> Result<BaseComplex> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "partition eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let kind = match name {
        "interval" => BaseKind::Interval,
        "S1-two-arcs" => BaseKind::CircleTwoArcs,
        "S2-two-disks" => BaseKind::SphereTwoDisks,
        "T2-four-squares" => BaseKind::TorusFourSquares,
        _ => return Err(Error::UnknownBase(name.to_string())),
    };
    let charts = match kind {
        BaseKind::Interval => vec![ChartBox {
            lo: vec![0.0],
            hi: vec![1.0],
            periodic: vec![false],
            closed_lo: vec![false],
            coord_names: vec!["x"],
        }],
        BaseKind::CircleTwoArcs => CIRCLE_ARCS
            .iter()
            .map(|&(lo, hi)| ChartBox {
                lo: vec![lo],
                hi: vec![hi],
                periodic: vec![false],
                closed_lo: vec![false],
                coord_names: vec!["theta"],
            })
            .collect(),
        BaseKind::SphereTwoDisks => (0..2)
            .map(|_| ChartBox {
                lo: vec![0.0, 0.0],
                hi: vec![SPHERE_R, TAU],
                periodic: vec![false, true],
                closed_lo: vec![true, false],
                coord_names: vec!["rho", "phi"],
            })
            .collect(),
        BaseKind::TorusFourSquares => (0..4)
            .map(|idx| {
                let (a, b) = (idx % 2, idx / 2);
                ChartBox {
                    lo: vec![TORUS_ARCS[a].0, TORUS_ARCS[b].0],
                    hi: vec![TORUS_ARCS[a].1, TORUS_ARCS[b].1],
                    periodic: vec![false, false],
                    closed_lo: vec![false, false],
                    coord_names: vec!["u", "v"],
                }
            })
            .collect(),
    };
    Ok(BaseComplex {
        kind,
        name: name.to_string(),
        eps,
        charts,
    })
}

impl BaseComplex {
    pub fn dim(&self) -> usize {
        self.charts[0].lo.len()
    }

    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, index: usize) -> &ChartBox {
        &self.charts[index]
    }

    pub fn coord_names(&self, chart: usize) -> &[&'static str] {
        &self.charts[chart].coord_names
    }

    /// Orientation sign of a chart relative to the base's global
    /// orientation.  The second stereographic disk is reversed because
    /// the inversion transfer has negative Jacobian determinant.
    pub fn chart_orientation(&self, chart: usize) -> f64 {
        match self.kind {
            BaseKind::SphereTwoDisks if chart == 1 => -1.0,
            _ => 1.0,
        }
    }

    pub fn contains(&self, x: &BasePoint) -> bool {
        if x.chart >= self.charts.len() {
            return false;
        }
        let bx = &self.charts[x.chart];
        x.coords.iter().enumerate().all(|(d, &c)| {
            if bx.periodic[d] {
                c.is_finite()
            } else if bx.closed_lo[d] {
                c >= bx.lo[d] && c < bx.hi[d]
            } else {
                c > bx.lo[d] && c < bx.hi[d]
            }
        })
    }

    /// Chart pairs (i < j) with nonempty overlap.
    pub fn overlap_pairs(&self) -> Vec<(usize, usize)> {
        match self.kind {
            BaseKind::Interval => vec![],
            BaseKind::CircleTwoArcs | BaseKind::SphereTwoDisks => vec![(0, 1)],
            BaseKind::TorusFourSquares => {
                let mut out = Vec::new();
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        out.push((i, j));
                    }
                }
                out
            }
        }
    }

    /// Chart triples (i < j < k) with nonempty common overlap.
    pub fn triple_overlaps(&self) -> Vec<(usize, usize, usize)> {
        match self.kind {
            BaseKind::TorusFourSquares => vec![(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)],
            _ => vec![],
        }
    }

    /// Whether `x` lies in the overlap with chart `j`.
    pub fn in_overlap(&self, x: &BasePoint, j: usize) -> bool {
        if !self.contains(x) {
            return false;
        }
        if x.chart == j {
            return true;
        }
        self.transfer(x, j).is_ok()
    }

    /// Closed-form coordinate change into chart `to`.
    pub fn transfer(&self, x: &BasePoint, to: usize) -> Result<BasePoint> {
        if !self.contains(x) {
            return Err(Error::OutsideChart(format!("{x:?}")));
        }
        if x.chart == to {
            return Ok(x.clone());
        }
        match self.kind {
            BaseKind::Interval => Err(Error::OutsideOverlap(x.chart, to)),
            BaseKind::SphereTwoDisks => {
                let rho = x.coords[0];
                if rho <= 1.0 / SPHERE_R || rho >= SPHERE_R {
                    return Err(Error::OutsideOverlap(x.chart, to));
                }
                Ok(BasePoint::new(to, vec![1.0 / rho, x.coords[1]]))
            }
            BaseKind::CircleTwoArcs => {
                let theta = x.coords[0];
                let (lo, hi) = CIRCLE_ARCS[to];
                for shift in [-TAU, 0.0, TAU] {
                    let t = theta + shift;
                    if t > lo && t < hi {
                        return Ok(BasePoint::new(to, vec![t]));
                    }
                }
                Err(Error::OutsideOverlap(x.chart, to))
            }
            BaseKind::TorusFourSquares => {
                let target = &self.charts[to];
                let mut coords = Vec::with_capacity(2);
                for d in 0..2 {
                    let mut found = None;
                    for shift in [-1.0, 0.0, 1.0] {
                        let c = x.coords[d] + shift;
                        if c > target.lo[d] && c < target.hi[d] {
                            found = Some(c);
                            break;
                        }
                    }
                    match found {
                        Some(c) => coords.push(c),
                        None => return Err(Error::OutsideOverlap(x.chart, to)),
                    }
                }
                Ok(BasePoint::new(to, coords))
            }
        }
    }

    /// Transfer with derivative propagation: the coordinates of `x` are
    /// duals whose derivative slots carry a tangent direction.
    pub fn transfer_dual(&self, from: usize, to: usize, coords: &[Dual]) -> Result<Vec<Dual>> {
        if from == to {
            return Ok(coords.to_vec());
        }
        let values: Vec<f64> = coords.iter().map(|d| d.value).collect();
        let moved = self.transfer(&BasePoint::new(from, values), to)?;
        match self.kind {
            BaseKind::SphereTwoDisks => {
                // rho' = 1/rho has derivative -rho'/rho^2; phi passes through.
                let rho = &coords[0];
                let slots = rho.derivs.len();
                let mut inv = Dual::constant(moved.coords[0], slots);
                for (s, d) in rho.derivs.iter().enumerate() {
                    inv.derivs[s] = -d / (rho.value * rho.value);
                }
                Ok(vec![inv, coords[1].clone()])
            }
            // Arc and square transfers are integer translations.
            _ => Ok(coords
                .iter()
                .zip(&moved.coords)
                .map(|(d, &v)| {
                    let mut out = d.clone();
                    out.value = v;
                    out
                })
                .collect()),
        }
    }

    /// Smooth partition of unity evaluated at `x`: nonnegative weights,
    /// one per chart, summing to 1.
    pub fn partition_eval(&self, x: &BasePoint) -> Result<Vec<f64>> {
        if !self.contains(x) {
            return Err(Error::OutsideChart(format!("{x:?}")));
        }
        let eps = self.eps;
        match self.kind {
            BaseKind::Interval => Ok(vec![1.0]),
            BaseKind::SphereTwoDisks => {
                // Radial profile in tau = (log rho / log R + 1) / 2, which the
                // inversion transfer maps to 1 - tau; the split is symmetric
                // about the equator.
                let rho = x.coords[0];
                let tau = 0.5 * (rho.ln() / SPHERE_R.ln() + 1.0);
                let other = bump(tau, eps)?;
                let own = 1.0 - other;
                Ok(if x.chart == 0 {
                    vec![own, other]
                } else {
                    vec![other, own]
                })
            }
            BaseKind::CircleTwoArcs => {
                let theta = x.coords[0].rem_euclid(TAU);
                let first = circle_profile(theta, eps)?;
                Ok(vec![first, 1.0 - first])
            }
            BaseKind::TorusFourSquares => {
                let u = x.coords[0].rem_euclid(1.0);
                let v = x.coords[1].rem_euclid(1.0);
                let cu = torus_profile(u, eps)?;
                let cv = torus_profile(v, eps)?;
                let fu = [cu, 1.0 - cu];
                let fv = [cv, 1.0 - cv];
                Ok((0..4).map(|idx| fu[idx % 2] * fv[idx / 2]).collect())
            }
        }
    }

    /// Riemannian area density per chart in chart coordinates (d = 2).
    pub fn area_element(&self, chart: usize, coords: &[f64]) -> Result<f64> {
        match self.kind {
            BaseKind::SphereTwoDisks => {
                let rho = coords[0];
                let c = 1.0 + rho * rho;
                Ok(4.0 * rho / (c * c))
            }
            BaseKind::TorusFourSquares => Ok(1.0),
            _ => Err(Error::InvalidParameter(format!(
                "area element needs a 2-dimensional base, {} has d = {}",
                self.name,
                self.dim()
            ))),
        }
        .map(|a| {
            let _ = chart;
            a
        })
    }

    /// Integrates a 2-form sampler over the base: per chart, the
    /// partition-weighted tensor-product Simpson sum of
    /// `sampler(chart, x, e1, e2)` over the parameter box.  The partition
    /// of unity prevents double counting on overlaps.  Sampler calls are
    /// skipped where the chart weight vanishes exactly.
    pub fn integrate_2form<F>(&self, mut sampler: F, resolution: usize) -> Result<f64>
    where
        F: FnMut(usize, &BasePoint, &[f64], &[f64]) -> Result<f64>,
    {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter(
                "2-form integration needs a 2-dimensional base".into(),
            ));
        }
        if resolution < 8 || resolution % 2 != 0 {
            return Err(Error::InvalidParameter(
                "resolution must be an even number, at least 8".into(),
            ));
        }
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        let mut total = 0.0;
        for chart in 0..self.chart_count() {
            let bx = &self.charts[chart];
            let h: Vec<f64> = (0..2)
                .map(|d| (bx.hi[d] - bx.lo[d]) / resolution as f64)
                .collect();
            for i in 0..=resolution {
                let wi = simpson_weight(i, resolution);
                for j in 0..=resolution {
                    let wj = simpson_weight(j, resolution);
                    let x = BasePoint::new(
                        chart,
                        vec![bx.lo[0] + i as f64 * h[0], bx.lo[1] + j as f64 * h[1]],
                    );
                    let xi = match self.partition_eval(&x) {
                        Ok(p) => p[chart],
                        // Box corners can sit on the closure of the chart;
                        // the subordinate partition vanishes there.
                        Err(_) => 0.0,
                    };
                    if xi == 0.0 {
                        continue;
                    }
                    let f = sampler(chart, &x, &e1, &e2)?;
                    if !f.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "sampler at chart {chart}, {:?}",
                            x.coords
                        )));
                    }
                    total += wi * wj * xi * f * h[0] * h[1] / 9.0;
                }
            }
        }
        Ok(total)
    }

    /// Uniform random point in some chart.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> BasePoint {
        let chart = rng.gen_range(0..self.chart_count());
        self.sample_chart_point(rng, chart)
    }

    pub fn sample_chart_point<R: Rng>(&self, rng: &mut R, chart: usize) -> BasePoint {
        let bx = &self.charts[chart];
        let coords = (0..self.dim())
            .map(|d| {
                // Stay off the open edges so sampled points admit stencils.
                let margin = 1e-3 * (bx.hi[d] - bx.lo[d]);
                rng.gen_range(bx.lo[d] + margin..bx.hi[d] - margin)
            })
            .collect();
        BasePoint::new(chart, coords)
    }

    /// Random point in the overlap of charts `i` and `j`, expressed in
    /// chart `i`; `None` when the overlap is empty.
    pub fn sample_overlap<R: Rng>(&self, rng: &mut R, i: usize, j: usize) -> Option<BasePoint> {
        if !self
            .overlap_pairs()
            .iter()
            .any(|&(a, b)| (a, b) == (i.min(j), i.max(j)))
        {
            return None;
        }
        for _ in 0..10_000 {
            let x = self.sample_chart_point(rng, i);
            if self.in_overlap(&x, j) {
                return Some(x);
            }
        }
        None
    }

    /// Random point in the common overlap of three charts, in chart `i`.
    pub fn sample_triple_overlap<R: Rng>(
        &self,
        rng: &mut R,
        i: usize,
        j: usize,
        k: usize,
    ) -> Option<BasePoint> {
        for _ in 0..10_000 {
            let x = self.sample_chart_point(rng, i);
            if self.in_overlap(&x, j) && self.in_overlap(&x, k) {
                return Some(x);
            }
        }
        None
    }

    /// Equality of base points up to transfers and periodic wrapping.
    pub fn points_equal(&self, a: &BasePoint, b: &BasePoint, tol: f64) -> Result<bool> {
        let b_in_a = if b.chart == a.chart {
            b.clone()
        } else {
            match self.transfer(b, a.chart) {
                Ok(p) => p,
                Err(_) => return Ok(false),
            }
        };
        let bx = &self.charts[a.chart];
        Ok(a.coords.iter().zip(&b_in_a.coords).enumerate().all(
            |(d, (&x, &y))| {
                if bx.periodic[d] {
                    let span = bx.hi[d] - bx.lo[d];
                    let mut r = (x - y).rem_euclid(span);
                    if r > span / 2.0 {
                        r = span - r;
                    }
                    r.abs() <= tol
                } else {
                    (x - y).abs() <= tol
                }
            },
        ))
    }
}

fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Partition profile for the first circle arc: 0 flat at angle 0, 1 flat
/// at angle pi.
fn circle_profile(theta: f64, eps: f64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    if theta <= pi {
        bump(theta / pi, eps)
    } else {
        bump((TAU - theta) / pi, eps)
    }
}

/// Partition profile for the first torus arc (support inside (0, 0.6),
/// flat 1 on [0.1, 0.5]).
fn torus_profile(u: f64, eps: f64) -> Result<f64> {
    if u < 0.1 {
        bump(u / 0.1, eps)
    } else if u <= 0.5 {
        Ok(1.0)
    } else if u < 0.6 {
        bump((0.6 - u) / 0.1, eps)
    } else {
        Ok(0.0)
    }
}

/// One chart-parameterised piece of a curve: coordinate expressions in
/// the variable `t` over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct CurveSegment {
    pub chart: usize,
    pub coords: Vec<Expr>,
    pub t_start: f64,
    pub t_end: f64,
}

/// Piecewise chart-parameterised path; consecutive segment endpoints
/// must be related by the overlap transfer.
#[derive(Debug, Clone)]
pub struct ChartedCurve {
    pub segments: Vec<CurveSegment>,
}

impl ChartedCurve {
    /// Single-segment curve over `[0, 1]`.
    pub fn single(chart: usize, coords: Vec<Expr>) -> Self {
        ChartedCurve {
            segments: vec![CurveSegment {
                chart,
                coords,
                t_start: 0.0,
                t_end: 1.0,
            }],
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments.first().map(|s| s.t_start).unwrap_or(0.0),
            self.segments.last().map(|s| s.t_end).unwrap_or(0.0),
        )
    }

    /// Segment covering parameter `t` (the earlier one at junctions).
    pub fn segment_index(&self, t: f64) -> Result<usize> {
        self.segments
            .iter()
            .position(|s| t >= s.t_start && t <= s.t_end)
            .ok_or_else(|| Error::InvalidCurve(format!("parameter {t} outside curve domain")))
    }

    fn eval_segment(&self, base: &BaseComplex, seg: usize, t: f64) -> Result<(BasePoint, Vec<f64>)> {
        let segment = &self.segments[seg];
        let mut env = Env::new(1);
        env.bind("t", Dual::var(t, 0, 1));
        let mut coords = Vec::with_capacity(segment.coords.len());
        let mut velocity = Vec::with_capacity(segment.coords.len());
        for e in &segment.coords {
            let d = exprlang::eval_dual(e, &env)?;
            coords.push(d.value);
            velocity.push(d.derivs[0]);
        }
        let point = BasePoint::new(segment.chart, coords);
        if !base.contains(&point) {
            return Err(Error::OutsideChart(format!(
                "curve leaves chart {} at t = {t}: {:?}",
                segment.chart, point.coords
            )));
        }
        Ok((point, velocity))
    }

    pub fn position(&self, base: &BaseComplex, t: f64) -> Result<BasePoint> {
        let seg = self.segment_index(t)?;
        Ok(self.eval_segment(base, seg, t)?.0)
    }

    /// Position and chart-coordinate velocity at `t`, within segment `seg`.
    pub fn position_velocity_in(
        &self,
        base: &BaseComplex,
        seg: usize,
        t: f64,
    ) -> Result<(BasePoint, Vec<f64>)> {
        self.eval_segment(base, seg, t)
    }

    /// Checks monotone parameterisation and transfer-continuity at the
    /// segment junctions.
    pub fn validate(&self, base: &BaseComplex) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidCurve("curve has no segments".into()));
        }
        for s in &self.segments {
            if !(s.t_end > s.t_start) {
                return Err(Error::InvalidCurve(format!(
                    "segment range [{}, {}] is empty",
                    s.t_start, s.t_end
                )));
            }
            if s.coords.len() != base.dim() {
                return Err(Error::InvalidCurve(format!(
                    "segment has {} coordinates, base has dimension {}",
                    s.coords.len(),
                    base.dim()
                )));
            }
        }
        for w in self.segments.windows(2) {
            if (w[0].t_end - w[1].t_start).abs() > 1e-12 {
                return Err(Error::InvalidCurve(format!(
                    "segments do not abut: {} vs {}",
                    w[0].t_end, w[1].t_start
                )));
            }
            let end = self.eval_segment(base, self.index_of(&w[0]), w[0].t_end)?.0;
            let start = self.eval_segment(base, self.index_of(&w[1]), w[1].t_start)?.0;
            if !base.points_equal(&start, &end, 1e-9)? {
                return Err(Error::InvalidCurve(format!(
                    "segment endpoints disagree across the transfer: {end:?} vs {start:?}"
                )));
            }
        }
        Ok(())
    }

    fn index_of(&self, seg: &CurveSegment) -> usize {
        self.segments
            .iter()
            .position(|s| std::ptr::eq(s, seg))
            .expect("segment belongs to this curve")
    }

    pub fn is_closed(&self, base: &BaseComplex) -> Result<bool> {
        let (t0, t1) = self.domain();
        let first = self.eval_segment(base, 0, t0)?.0;
        let last = self.eval_segment(base, self.segments.len() - 1, t1)?.0;
        base.points_equal(&first, &last, 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn catalog_shapes() {
        let s2 = catalog("S2-two-disks").unwrap();
        assert_eq!(s2.chart_count(), 2);
        assert_eq!(s2.overlap_pairs(), vec![(0, 1)]);
        let t2 = catalog("T2-four-squares").unwrap();
        assert_eq!(t2.chart_count(), 4);
        assert_eq!(t2.overlap_pairs().len(), 6);
        let s1 = catalog("S1-two-arcs").unwrap();
        assert_eq!(s1.chart_count(), 2);
        let iv = catalog("interval").unwrap();
        assert_eq!(iv.chart_count(), 1);
        assert!(iv.overlap_pairs().is_empty());
        assert!(matches!(catalog("S3"), Err(Error::UnknownBase(_))));
    }

    #[test]
    fn sphere_partition_values() {
        let s2 = catalog("S2-two-disks").unwrap();
        // North pole lies far from the other chart's support.
        let north = BasePoint::new(0, vec![0.0, 0.3]);
        assert_eq!(s2.partition_eval(&north).unwrap(), vec![1.0, 0.0]);
        // Equator splits evenly by symmetry.
        let equator = BasePoint::new(0, vec![1.0, 2.0]);
        let p = s2.partition_eval(&equator).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn partitions_sum_to_one_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for name in ["S2-two-disks", "T2-four-squares", "S1-two-arcs", "interval"] {
            let base = catalog(name).unwrap();
            for _ in 0..10_000 {
                let x = base.sample_point(&mut rng);
                let p = base.partition_eval(&x).unwrap();
                let sum: f64 = p.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12, "{name}: sum {sum}");
                assert!(p.iter().all(|&w| w >= 0.0));
            }
        }
    }

    #[test]
    fn partition_agrees_across_transfer() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for name in ["S2-two-disks", "T2-four-squares", "S1-two-arcs"] {
            let base = catalog(name).unwrap();
            for &(i, j) in &base.overlap_pairs() {
                for _ in 0..200 {
                    let x = base.sample_overlap(&mut rng, i, j).unwrap();
                    let y = base.transfer(&x, j).unwrap();
                    let px = base.partition_eval(&x).unwrap();
                    let py = base.partition_eval(&y).unwrap();
                    for (a, b) in px.iter().zip(&py) {
                        assert!((a - b).abs() < 1e-12, "{name}: {px:?} vs {py:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn transfer_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for name in ["S2-two-disks", "T2-four-squares", "S1-two-arcs"] {
            let base = catalog(name).unwrap();
            for &(i, j) in &base.overlap_pairs() {
                for _ in 0..1000 {
                    let x = base.sample_overlap(&mut rng, i, j).unwrap();
                    let y = base.transfer(&x, j).unwrap();
                    let back = base.transfer(&y, i).unwrap();
                    for (a, b) in x.coords.iter().zip(&back.coords) {
                        assert!((a - b).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_transfer_fixes_equator_and_rejects_pole() {
        let s2 = catalog("S2-two-disks").unwrap();
        let x = BasePoint::new(0, vec![1.0, 0.3]);
        let y = s2.transfer(&x, 1).unwrap();
        assert!((y.coords[0] - 1.0).abs() < 1e-15);
        assert!((y.coords[1] - 0.3).abs() < 1e-15);
        let pole = BasePoint::new(0, vec![0.0, 0.0]);
        assert!(matches!(
            s2.transfer(&pole, 1),
            Err(Error::OutsideOverlap(0, 1))
        ));
    }

    #[test]
    fn partition_support_edges_are_flat() {
        // One-sided finite differences of the chart-0 weight at its
        // support edge shrink faster than linearly.
        let s2 = catalog("S2-two-disks").unwrap();
        // Support edge of the chart-1 weight seen from chart 0: the radius
        // where tau = eps.
        let rho_edge = SPHERE_R.powf(2.0 * 0.1 - 1.0);
        let weight = |rho: f64| {
            s2.partition_eval(&BasePoint::new(0, vec![rho, 0.0]))
                .unwrap()[1]
        };
        let d1 = (weight(rho_edge + 1e-3) - weight(rho_edge)) / 1e-3;
        let d2 = (weight(rho_edge + 1e-4) - weight(rho_edge)) / 1e-4;
        assert!(d1.abs() < 1e-6);
        assert!(d2.abs() > 0.0 || d2 == 0.0);
        if d2 != 0.0 {
            assert!(d1.abs() / d2.abs() >= 10.0 || d1 == 0.0);
        }
    }

    #[test]
    fn sphere_area_by_quadrature() {
        let s2 = catalog("S2-two-disks").unwrap();
        let area = s2
            .integrate_2form(
                |chart, x, _, _| s2.area_element(chart, &x.coords),
                256,
            )
            .unwrap();
        assert!(
            (area - 4.0 * std::f64::consts::PI).abs() < 1e-4,
            "area = {area}"
        );
    }

    #[test]
    fn quadrature_is_fourth_order() {
        let s2 = catalog("S2-two-disks").unwrap();
        let err = |res: usize| {
            let area = s2
                .integrate_2form(|chart, x, _, _| s2.area_element(chart, &x.coords), res)
                .unwrap();
            (area - 4.0 * std::f64::consts::PI).abs()
        };
        let e1 = err(24);
        let e2 = err(48);
        let e3 = err(96);
        assert!(e1 / e2 > 8.0, "ratio {}", e1 / e2);
        assert!(e2 / e3 > 8.0, "ratio {}", e2 / e3);
    }

    #[test]
    fn flat_torus_area_is_one() {
        // The four box grids do not align on the torus, so the Simpson
        // errors only cancel once the bump transitions are resolved.
        let t2 = catalog("T2-four-squares").unwrap();
        let area = t2.integrate_2form(|_, _, _, _| Ok(1.0), 512).unwrap();
        assert!((area - 1.0).abs() < 1e-9, "area = {area}");
    }

    #[test]
    fn zero_sampler_integrates_to_zero() {
        let t2 = catalog("T2-four-squares").unwrap();
        let v = t2.integrate_2form(|_, _, _, _| Ok(0.0), 16).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn curve_evaluation_and_continuity() {
        let s2 = catalog("S2-two-disks").unwrap();
        let equator = ChartedCurve::single(
            0,
            vec![parse("1").unwrap(), parse("2*pi*t").unwrap()],
        );
        equator.validate(&s2).unwrap();
        assert!(equator.is_closed(&s2).unwrap());
        let (p, v) = equator.position_velocity_in(&s2, 0, 0.25).unwrap();
        assert_eq!(p.chart, 0);
        assert!((p.coords[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((v[1] - TAU).abs() < 1e-12);

        // Two-segment equator crossing into the second chart.
        let two = ChartedCurve {
            segments: vec![
                CurveSegment {
                    chart: 0,
                    coords: vec![parse("1").unwrap(), parse("2*pi*t").unwrap()],
                    t_start: 0.0,
                    t_end: 0.5,
                },
                CurveSegment {
                    chart: 1,
                    coords: vec![parse("1").unwrap(), parse("2*pi*t").unwrap()],
                    t_start: 0.5,
                    t_end: 1.0,
                },
            ],
        };
        two.validate(&s2).unwrap();
        assert!(two.is_closed(&s2).unwrap());

        // A curve that leaves its chart fails.
        let escaping = ChartedCurve::single(
            0,
            vec![parse("4*t").unwrap(), parse("0.1").unwrap()],
        );
        assert!(escaping.position(&s2, 0.9).is_err());
    }
}
