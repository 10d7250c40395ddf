//! Set geometry in ℝ^d: distances, projections, neighborhoods, support
//! functions, convex-hull membership and the Hausdorff metric.
//!
//! Analytic targets (balls, segments, hulls) are projected exactly. Point
//! clouds are finite ε-nets carrying their sampling resolution `h`; every
//! analytic target can be sampled into one with [`TargetSet::to_cloud`].

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpError, Sense};

/// Absolute slack added to every "distance is zero" comparison.
pub const DIST_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * dir`
    pub fn offset(&self, dir: &[f64], s: f64) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, b)| a + s * b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Closed halfspace `{z : ⟨normal, z⟩ ≤ offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if !(norm(&normal) > 0.0) || !offset.is_finite() || normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(
                "halfspace normal must be finite and nonzero".into(),
            ));
        }
        Ok(Halfspace { normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        dot(&self.normal, z) <= self.offset + tol
    }

    /// Euclidean distance from a point inside the halfspace to its complement.
    pub fn depth(&self, z: &[f64]) -> f64 {
        (self.offset - dot(&self.normal, z)) / norm(&self.normal)
    }
}

/// Anything that can decide whether a payoff lands in it.
pub trait Region {
    fn contains(&self, z: &Point, tol: f64) -> bool;
}

impl Region for Halfspace {
    fn contains(&self, z: &Point, tol: f64) -> bool {
        Halfspace::contains(self, &z.0, tol)
    }
}

impl Region for TargetSet {
    fn contains(&self, z: &Point, tol: f64) -> bool {
        match self.project(z) {
            Ok(r) => r.distance <= tol + self.resolution(),
            Err(_) => false,
        }
    }
}

/// Compact target geometry.
///
/// Serialized as externally tagged records, e.g.
/// `{"segment":{"a":[0,0],"b":[0.5,0.5]}}` or `{"union":[...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSet {
    Ball { center: Point, radius: f64 },
    Segment { a: Point, b: Point },
    Hull { vertices: Vec<Point> },
    Cloud { points: Vec<Point>, h: f64 },
    Union(Vec<TargetSet>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NearestPoint {
    pub point: Point,
    pub distance: f64,
}

impl TargetSet {
    pub fn ball(center: impl Into<Point>, radius: f64) -> Self {
        TargetSet::Ball {
            center: center.into(),
            radius,
        }
    }

    pub fn segment(a: impl Into<Point>, b: impl Into<Point>) -> Self {
        TargetSet::Segment {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn hull(vertices: Vec<Point>) -> Self {
        TargetSet::Hull { vertices }
    }

    pub fn cloud(points: Vec<Point>, h: f64) -> Self {
        TargetSet::Cloud { points, h }
    }

    /// Checks the structural invariants: nonempty, finite, consistent dimension.
    pub fn validate(&self) -> Result<usize> {
        let check = |p: &Point, d: &mut Option<usize>| -> Result<()> {
            if !p.is_finite() || p.dim() == 0 {
                return Err(Error::InvalidGeometry("non-finite or empty point".into()));
            }
            match d {
                Some(d0) if *d0 != p.dim() => Err(Error::DimensionMismatch {
                    expected: *d0,
                    got: p.dim(),
                }),
                _ => {
                    *d = Some(p.dim());
                    Ok(())
                }
            }
        };
        let mut d = None;
        match self {
            TargetSet::Ball { center, radius } => {
                check(center, &mut d)?;
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidGeometry(
                        "ball radius must be finite and >= 0".into(),
                    ));
                }
            }
            TargetSet::Segment { a, b } => {
                check(a, &mut d)?;
                check(b, &mut d)?;
            }
            TargetSet::Hull { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::EmptySet);
                }
                for v in vertices {
                    check(v, &mut d)?;
                }
            }
            TargetSet::Cloud { points, h } => {
                if points.is_empty() {
                    return Err(Error::EmptySet);
                }
                if !(*h > 0.0) {
                    return Err(Error::InvalidGeometry(
                        "cloud resolution must be > 0".into(),
                    ));
                }
                for p in points {
                    check(p, &mut d)?;
                }
            }
            TargetSet::Union(members) => {
                if members.is_empty() {
                    return Err(Error::EmptySet);
                }
                for m in members {
                    let dm = m.validate()?;
                    match d {
                        Some(d0) if d0 != dm => {
                            return Err(Error::DimensionMismatch {
                                expected: d0,
                                got: dm,
                            })
                        }
                        _ => d = Some(dm),
                    }
                }
            }
        }
        Ok(d.expect("validated set has a dimension"))
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSet::Ball { center, .. } => center.dim(),
            TargetSet::Segment { a, .. } => a.dim(),
            TargetSet::Hull { vertices } => vertices.first().map_or(0, Point::dim),
            TargetSet::Cloud { points, .. } => points.first().map_or(0, Point::dim),
            TargetSet::Union(m) => m.first().map_or(0, TargetSet::dim),
        }
    }

    /// Discretization resolution: `h` for clouds (max over union members), 0 otherwise.
    pub fn resolution(&self) -> f64 {
        match self {
            TargetSet::Cloud { h, .. } => *h,
            TargetSet::Union(m) => m.iter().map(TargetSet::resolution).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            TargetSet::Ball { .. } | TargetSet::Segment { .. } | TargetSet::Hull { .. }
        )
    }

    /// Nearest point of the set; ties resolve to the lexicographically smallest minimizer.
    pub fn project(&self, phi: &Point) -> Result<NearestPoint> {
        match self {
            TargetSet::Ball { center, radius } => {
                let diff = phi.sub(center);
                let n = diff.norm();
                if n <= *radius {
                    Ok(NearestPoint {
                        point: phi.clone(),
                        distance: 0.0,
                    })
                } else {
                    let point = center.offset(&diff.0, radius / n);
                    Ok(NearestPoint {
                        distance: n - radius,
                        point,
                    })
                }
            }
            TargetSet::Segment { a, b } => {
                let ab = b.sub(a);
                let len2 = dot(&ab.0, &ab.0);
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (dot(&phi.sub(a).0, &ab.0) / len2).clamp(0.0, 1.0)
                };
                let point = a.offset(&ab.0, t);
                Ok(NearestPoint {
                    distance: phi.dist(&point),
                    point,
                })
            }
            TargetSet::Hull { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::EmptySet);
                }
                let shifted: Vec<Vec<f64>> = vertices.iter().map(|v| v.sub(phi).0).collect();
                let z = min_norm_point(&shifted);
                let point = phi.add(&Point(z));
                Ok(NearestPoint {
                    distance: phi.dist(&point),
                    point,
                })
            }
            TargetSet::Cloud { points, .. } => {
                let mut best: Option<(f64, &Point)> = None;
                for p in points {
                    let d2 = dist_sq(&p.0, &phi.0);
                    best = match best {
                        None => Some((d2, p)),
                        Some((bd, bp)) => {
                            if d2 < bd || (d2 == bd && p.lex_cmp(bp) == Ordering::Less) {
                                Some((d2, p))
                            } else {
                                Some((bd, bp))
                            }
                        }
                    };
                }
                let (d2, p) = best.ok_or(Error::EmptySet)?;
                Ok(NearestPoint {
                    point: p.clone(),
                    distance: d2.sqrt(),
                })
            }
            TargetSet::Union(members) => {
                let mut best: Option<NearestPoint> = None;
                for m in members {
                    let r = m.project(phi)?;
                    best = match best {
                        None => Some(r),
                        Some(b) => {
                            if r.distance < b.distance
                                || (r.distance == b.distance
                                    && r.point.lex_cmp(&b.point) == Ordering::Less)
                            {
                                Some(r)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
                best.ok_or(Error::EmptySet)
            }
        }
    }

    pub fn distance(&self, phi: &Point) -> Result<f64> {
        Ok(self.project(phi)?.distance)
    }

    /// Membership in the closed ε-neighborhood `S_ε`.
    pub fn in_neighborhood(&self, phi: &Point, eps: f64) -> Result<bool> {
        Ok(self.distance(phi)? <= eps)
    }

    /// `σ_S(λ) = sup_{z∈S} ⟨z, λ⟩`.
    pub fn support(&self, lambda: &[f64]) -> Result<f64> {
        let max_over = |pts: &[Point]| -> Result<f64> {
            pts.iter()
                .map(|p| p.dot(lambda))
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.max(v)))
                })
                .ok_or(Error::EmptySet)
        };
        match self {
            TargetSet::Ball { center, radius } => Ok(center.dot(lambda) + radius * norm(lambda)),
            TargetSet::Segment { a, b } => Ok(a.dot(lambda).max(b.dot(lambda))),
            TargetSet::Hull { vertices } => max_over(vertices),
            TargetSet::Cloud { points, .. } => max_over(points),
            TargetSet::Union(members) => {
                let mut best: Option<f64> = None;
                for m in members {
                    let v = m.support(lambda)?;
                    best = Some(best.map_or(v, |b| b.max(v)));
                }
                best.ok_or(Error::EmptySet)
            }
        }
    }

    /// Samples the set into a point cloud of resolution `h`.
    ///
    /// The result is sorted lexicographically and deduplicated, so the scan
    /// order over a sampled cloud is deterministic.
    pub fn to_cloud(&self, h: f64) -> Result<Vec<Point>> {
        if !(h > 0.0) {
            return Err(Error::NonPositiveInput("cloud resolution"));
        }
        let mut pts = Vec::new();
        self.sample_into(h, &mut pts)?;
        if pts.is_empty() {
            return Err(Error::EmptySet);
        }
        pts.sort_by(|a, b| a.lex_cmp(b));
        pts.dedup_by(|a, b| a.dist(b) <= 1e-12);
        Ok(pts)
    }

    fn sample_into(&self, h: f64, out: &mut Vec<Point>) -> Result<()> {
        match self {
            TargetSet::Ball { center, radius } => {
                let d = center.dim();
                if *radius == 0.0 {
                    out.push(center.clone());
                    return Ok(());
                }
                if d == 1 {
                    let c = center.0[0];
                    TargetSet::segment([c - radius], [c + radius]).sample_into(h, out)?;
                    return Ok(());
                }
                grid_points(
                    &center.0.iter().map(|c| c - radius).collect::<Vec<_>>(),
                    &center.0.iter().map(|c| c + radius).collect::<Vec<_>>(),
                    h,
                    |p| dist(p, &center.0) <= *radius + 1e-12,
                    out,
                );
                if d == 2 {
                    let k = ((2.0 * PI * radius) / h).ceil().max(8.0) as usize;
                    for i in 0..k {
                        let a = 2.0 * PI * i as f64 / k as f64;
                        out.push(Point(vec![
                            center.0[0] + radius * a.cos(),
                            center.0[1] + radius * a.sin(),
                        ]));
                    }
                }
            }
            TargetSet::Segment { a, b } => {
                let len = a.dist(b);
                let n = (len / h).ceil() as usize;
                if n == 0 {
                    out.push(a.clone());
                } else {
                    let ab = b.sub(a);
                    for i in 0..=n {
                        out.push(a.offset(&ab.0, i as f64 / n as f64));
                    }
                }
            }
            TargetSet::Hull { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::EmptySet);
                }
                out.extend(vertices.iter().cloned());
                for (i, u) in vertices.iter().enumerate() {
                    for v in &vertices[i + 1..] {
                        TargetSet::segment(u.clone(), v.clone()).sample_into(h, out)?;
                    }
                }
                let d = vertices[0].dim();
                if d >= 2 {
                    let lo: Vec<f64> = (0..d)
                        .map(|k| {
                            vertices
                                .iter()
                                .map(|v| v.0[k])
                                .fold(f64::INFINITY, f64::min)
                        })
                        .collect();
                    let hi: Vec<f64> = (0..d)
                        .map(|k| {
                            vertices
                                .iter()
                                .map(|v| v.0[k])
                                .fold(f64::NEG_INFINITY, f64::max)
                        })
                        .collect();
                    let shifted_cache = vertices.clone();
                    grid_points(
                        &lo,
                        &hi,
                        h,
                        |p| {
                            let phi = Point(p.to_vec());
                            let shifted: Vec<Vec<f64>> =
                                shifted_cache.iter().map(|v| v.sub(&phi).0).collect();
                            norm(&min_norm_point(&shifted)) <= 1e-10
                        },
                        out,
                    );
                }
            }
            TargetSet::Cloud { points, .. } => {
                if points.is_empty() {
                    return Err(Error::EmptySet);
                }
                out.extend(points.iter().cloned());
            }
            TargetSet::Union(members) => {
                if members.is_empty() {
                    return Err(Error::EmptySet);
                }
                for m in members {
                    m.sample_into(h, out)?;
                }
            }
        }
        Ok(())
    }
}

fn grid_points(
    lo: &[f64],
    hi: &[f64],
    h: f64,
    keep: impl Fn(&[f64]) -> bool,
    out: &mut Vec<Point>,
) {
    let d = lo.len();
    let counts: Vec<usize> = (0..d)
        .map(|k| ((hi[k] - lo[k]) / h).floor().max(0.0) as usize + 1)
        .collect();
    let mut idx = vec![0usize; d];
    let mut p = vec![0.0; d];
    loop {
        for k in 0..d {
            p[k] = lo[k] + idx[k] as f64 * h;
        }
        if keep(&p) {
            out.push(Point(p.clone()));
        }
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
pub fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0, f64::max)
        .max(1e-300);
    let tol = 1e-12 * scale;

    let start = (0..points.len())
        .min_by(|&i, &j| {
            dot(&points[i], &points[i])
                .partial_cmp(&dot(&points[j], &points[j]))
                .unwrap_or(Ordering::Equal)
        })
        .expect("nonempty");
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();

    let combine = |active: &[usize], w: &[f64]| -> Vec<f64> {
        let mut z = vec![0.0; d];
        for (&i, &wi) in active.iter().zip(w) {
            for k in 0..d {
                z[k] += wi * points[i][k];
            }
        }
        z
    };

    for _major in 0..(10 * points.len() + 50) {
        let xx = dot(&x, &x);
        let (j, xj) = (0..points.len())
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .expect("nonempty");
        if xx - xj <= tol || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);

        for _minor in 0..(points.len() + 5) {
            let alpha = match affine_min_weights(points, &active) {
                Some(a) => a,
                None => {
                    // Affinely dependent corral: drop the newest point.
                    active.pop();
                    weights.pop();
                    break;
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                x = combine(&active, &weights);
                break;
            }
            let mut theta = 1.0f64;
            for (a, w) in alpha.iter().zip(&weights) {
                if *a <= 1e-14 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= 1e-14 {
                    active.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            x = combine(&active, &weights);
        }
    }
    x
}

/// Weights of the minimum-norm point of the affine hull of `points[active]`.
fn affine_min_weights(points: &[Vec<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let k = active.len();
    let n = k + 1;
    let mut m = vec![vec![0.0; n + 1]; n];
    for a in 0..k {
        for b in 0..k {
            m[a][b] = dot(&points[active[a]], &points[active[b]]);
        }
        m[a][k] = 1.0;
        m[k][a] = 1.0;
    }
    m[k][n] = 1.0;
    let sol = solve_dense(m)?;
    Some(sol[..k].to_vec())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| {
            m[a][col]
                .abs()
                .partial_cmp(&m[b][col].abs())
                .unwrap_or(Ordering::Equal)
        })?;
        if m[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|r| m[r][n] / m[r][r]).collect())
}

/// Exact Hausdorff distance between two finite clouds.
pub fn hausdorff_clouds(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |from: &[Point], to: &[Point]| -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| dist_sq(&p.0, &q.0))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Hausdorff distance; non-cloud sets are sampled at resolution `h` first.
pub fn hausdorff(a: &TargetSet, b: &TargetSet, h: f64) -> Result<f64> {
    let ca = a.to_cloud(h)?;
    let cb = b.to_cloud(h)?;
    hausdorff_clouds(&ca, &cb)
}

/// Finite surrogate for the unit sphere used wherever a sup over directions is needed.
///
/// d = 1: ±1. d = 2: `k` equally spaced angles. d = 3: a Fibonacci sphere with `k`
/// points. d > 3: coordinate axes plus normalized pairwise differences of `generators`.
pub fn direction_grid(d: usize, k: usize, generators: &[Point]) -> Vec<Vec<f64>> {
    match d {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..k)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - y * y).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), y, r * th.sin()]
                })
                .collect()
        }
        _ => {
            let mut dirs = Vec::new();
            for axis in 0..d {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[axis] = s;
                    dirs.push(e);
                }
            }
            for (i, u) in generators.iter().enumerate() {
                for v in generators.iter().skip(i + 1) {
                    let diff = u.sub(v);
                    let n = diff.norm();
                    if n > 1e-12 {
                        dirs.push(diff.scale(1.0 / n).0);
                        dirs.push(diff.scale(-1.0 / n).0);
                    }
                }
            }
            dirs
        }
    }
}

/// Largest angle between any unit vector and its nearest grid direction (an upper bound).
pub fn direction_grid_angle(d: usize, k: usize) -> f64 {
    match d {
        1 => 0.0,
        2 => PI / k as f64,
        // Fibonacci lattices cover the sphere with caps of area ≈ 4π/k; the 2.0
        // factor absorbs the irregularity of the lattice cells.
        3 => 2.0 * (4.0 / k as f64).sqrt(),
        _ => PI / 2.0,
    }
}

/// `max_λ ⟨φ,λ⟩ − σ_S(λ)` over the grid and λ = 0.
pub fn support_gap(phi: &Point, set: &TargetSet, directions: &[Vec<f64>]) -> Result<f64> {
    if !set.is_convex() {
        return Err(Error::NonConvexSet);
    }
    let mut gap = 0.0f64;
    for lam in directions {
        gap = gap.max(phi.dot(lam) - set.support(lam)?);
    }
    Ok(gap)
}

/// Membership of a convex set through its support function, with the sup over
/// the unit ball replaced by the finite `directions` grid.
pub fn membership_via_support(
    phi: &Point,
    set: &TargetSet,
    directions: &[Vec<f64>],
    tol: f64,
) -> Result<bool> {
    Ok(support_gap(phi, set, directions)? <= tol)
}

/// Largest distance from a convex set of the given diameter at which a point can
/// still pass every grid test of [`membership_via_support`]:
/// `(tol + 2 sin(θ/2)·diameter) / cos θ`, `θ` the grid's covering angle.
/// Points inside the set always pass.
pub fn support_grid_band(d: usize, k: usize, diameter: f64, tol: f64) -> f64 {
    let theta = direction_grid_angle(d, k);
    if theta >= PI / 2.0 {
        return f64::INFINITY;
    }
    (tol + 2.0 * (theta / 2.0).sin() * diameter) / theta.cos()
}

/// Whether `phi` is a convex combination of `generators`, decided by an LP.
pub fn in_convex_hull(phi: &Point, generators: &[Point]) -> Result<bool> {
    if generators.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = phi.dim();
    let n = generators.len();
    let mut rows = Vec::with_capacity(d + 1);
    let mut rhs = Vec::with_capacity(d + 1);
    let mut senses = Vec::with_capacity(d + 1);
    for k in 0..d {
        rows.push(generators.iter().map(|g| g.0[k]).collect());
        rhs.push(phi.0[k]);
        senses.push(Sense::Eq);
    }
    rows.push(vec![1.0; n]);
    rhs.push(1.0);
    senses.push(Sense::Eq);
    let lp = LinearProgram::minimize(vec![0.0; n], rows, senses, rhs);
    match lp.solve() {
        Ok(_) => Ok(true),
        Err(LpError::Infeasible) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Convex hull of payoff vertices, with a fast ray-clipping query.
#[derive(Clone, Debug)]
pub struct PayoffHull {
    vertices: Vec<Point>,
    /// Outward facets `⟨n, z⟩ ≤ c` for d ≤ 2; empty otherwise.
    facets: Vec<(Vec<f64>, f64)>,
    d: usize,
}

impl PayoffHull {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySet);
        }
        let d = vertices[0].dim();
        let facets = match d {
            1 => {
                let lo = vertices
                    .iter()
                    .map(|v| v.0[0])
                    .fold(f64::INFINITY, f64::min);
                let hi = vertices
                    .iter()
                    .map(|v| v.0[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                vec![(vec![1.0], hi), (vec![-1.0], -lo)]
            }
            2 => polygon_facets(&vertices),
            _ => Vec::new(),
        };
        Ok(PayoffHull {
            vertices,
            facets,
            d,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Radius of the smallest origin-centred ball containing the hull.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices.iter().map(Point::norm).fold(0.0, f64::max)
    }

    pub fn contains(&self, z: &Point) -> Result<bool> {
        if self.d <= 2 {
            Ok(self.facets.iter().all(|(n, c)| dot(n, &z.0) <= c + 1e-10))
        } else {
            in_convex_hull(z, &self.vertices)
        }
    }

    /// The interval of `r` with `origin + r·dir` inside the hull, if nonempty.
    pub fn ray_interval(&self, origin: &Point, dir: &[f64]) -> Result<Option<(f64, f64)>> {
        if self.d <= 2 {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (n, c) in &self.facets {
                let a = dot(n, dir);
                let b = c - dot(n, &origin.0);
                if a.abs() <= 1e-15 {
                    if b < -1e-10 {
                        return Ok(None);
                    }
                } else if a > 0.0 {
                    hi = hi.min(b / a);
                } else {
                    lo = lo.max(b / a);
                }
            }
            return Ok(if lo <= hi + 1e-12 {
                Some((lo, hi))
            } else {
                None
            });
        }
        // General d: two LPs over (r, w) with origin + r·dir = Σ w_i v_i, Σ w = 1.
        let n = self.vertices.len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut senses = Vec::new();
        for k in 0..self.d {
            let mut row: Vec<f64> = self.vertices.iter().map(|v| v.0[k]).collect();
            row.push(-dir[k]);
            rows.push(row);
            rhs.push(origin.0[k]);
            senses.push(Sense::Eq);
        }
        let mut ones = vec![1.0; n];
        ones.push(0.0);
        rows.push(ones);
        rhs.push(1.0);
        senses.push(Sense::Eq);
        let mut free = vec![false; n + 1];
        free[n] = true;
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let hi_lp = LinearProgram::maximize(obj.clone(), rows.clone(), senses.clone(), rhs.clone())
            .with_free(free.clone());
        let hi = match hi_lp.solve() {
            Ok(s) => s.value,
            Err(LpError::Infeasible) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let lo_lp = LinearProgram::minimize(obj, rows, senses, rhs).with_free(free);
        let lo = lo_lp.solve()?.value;
        Ok(Some((lo, hi)))
    }
}

/// Facets of the 2-D convex hull (Andrew's monotone chain).
fn polygon_facets(vertices: &[Point]) -> Vec<(Vec<f64>, f64)> {
    let mut pts: Vec<(f64, f64)> = vertices.iter().map(|v| (v.0[0], v.0[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 && (a.1 - b.1).abs() <= 1e-14);
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    if pts.len() == 1 {
        let (x, y) = pts[0];
        return vec![
            (vec![1.0, 0.0], x),
            (vec![-1.0, 0.0], -x),
            (vec![0.0, 1.0], y),
            (vec![0.0, -1.0], -y),
        ];
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-14
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-14
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let ring: Vec<(f64, f64)> = lower.into_iter().chain(upper).collect();
    let mut facets = Vec::new();
    if ring.len() == 2 {
        // Degenerate hull: a segment. Bound it by its line (both sides) and its ends.
        let (a, b) = (ring[0], ring[1]);
        let t = (b.0 - a.0, b.1 - a.1);
        let len = (t.0 * t.0 + t.1 * t.1).sqrt();
        let u = (t.0 / len, t.1 / len);
        let nrm = (-u.1, u.0);
        let c = nrm.0 * a.0 + nrm.1 * a.1;
        facets.push((vec![nrm.0, nrm.1], c));
        facets.push((vec![-nrm.0, -nrm.1], -c));
        facets.push((vec![u.0, u.1], u.0 * b.0 + u.1 * b.1));
        facets.push((vec![-u.0, -u.1], -(u.0 * a.0 + u.1 * a.1)));
        return facets;
    }
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        // Counter-clockwise ring: outward normal is the edge rotated clockwise.
        let e = (b.0 - a.0, b.1 - a.1);
        let len = (e.0 * e.0 + e.1 * e.1).sqrt();
        let nrm = (e.1 / len, -e.0 / len);
        facets.push((vec![nrm.0, nrm.1], nrm.0 * a.0 + nrm.1 * a.1));
    }
    facets
}
