//! Logarithmic capacity of compact planar sets from Fekete-type point
//! configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A compact subset of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactSet {
    Disk { center: Point, radius: f64 },
    Segment { a: Point, b: Point },
    Polygon { vertices: Vec<Point> },
    Union { parts: Vec<CompactSet> },
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn project_segment(p: Point, a: Point, b: Point) -> Point {
    let d = sub(b, a);
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

fn point_in_polygon(p: Point, v: &[Point]) -> bool {
    let mut inside = false;
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl CompactSet {
    pub fn disk(center: Point, radius: f64) -> Self {
        CompactSet::Disk { center, radius }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        CompactSet::Segment { a, b }
    }

    /// Nearest point of the set.
    pub fn project(&self, p: Point) -> Point {
        match self {
            CompactSet::Disk { center, radius } => {
                let d = dist(p, *center);
                if d <= *radius * (1.0 + 4.0 * f64::EPSILON) {
                    p
                } else {
                    let s = radius / d;
                    [center[0] + s * (p[0] - center[0]), center[1] + s * (p[1] - center[1])]
                }
            }
            CompactSet::Segment { a, b } => project_segment(p, *a, *b),
            CompactSet::Polygon { vertices } => {
                if point_in_polygon(p, vertices) {
                    return p;
                }
                let n = vertices.len();
                (0..n)
                    .map(|i| project_segment(p, vertices[i], vertices[(i + 1) % n]))
                    .min_by(|x, y| dist(p, *x).total_cmp(&dist(p, *y)))
                    .unwrap_or(p)
            }
            CompactSet::Union { parts } => parts
                .iter()
                .map(|s| s.project(p))
                .min_by(|x, y| dist(p, *x).total_cmp(&dist(p, *y)))
                .unwrap_or(p),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let tol = 1e-12 * self.diameter().max(1.0);
        dist(self.project(p), p) <= tol
    }

    /// Vertices of an axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            CompactSet::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            CompactSet::Segment { a, b } => ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])]),
            CompactSet::Polygon { vertices } => vertices.iter().fold(
                ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
                |(lo, hi), v| ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])]),
            ),
            CompactSet::Union { parts } => parts.iter().map(|s| s.bounding_box()).fold(
                ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
                |(lo, hi), (a, b)| ([lo[0].min(a[0]), lo[1].min(a[1])], [hi[0].max(b[0]), hi[1].max(b[1])]),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            CompactSet::Disk { radius, .. } => 2.0 * radius.max(0.0),
            CompactSet::Segment { a, b } => dist(*a, *b),
            _ => {
                let (lo, hi) = self.bounding_box();
                dist(lo, hi)
            }
        }
    }

    pub fn is_connected_piece(&self) -> bool {
        match self {
            CompactSet::Union { parts } => parts.len() == 1 && parts[0].is_connected_piece(),
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CompactSet::Disk { radius, .. } if !(*radius > 0.0) => {
                Err(Error::Degenerate(format!("disk of radius {radius}")))
            }
            CompactSet::Segment { a, b } if dist(*a, *b) == 0.0 => {
                Err(Error::Degenerate("segment of length 0".into()))
            }
            CompactSet::Polygon { vertices } if vertices.len() < 2 || self.diameter() == 0.0 => {
                Err(Error::Degenerate("polygon without extent".into()))
            }
            CompactSet::Union { parts } if parts.is_empty() => Err(Error::Degenerate("empty union".into())),
            CompactSet::Union { parts } => parts.iter().try_for_each(|p| p.validate()),
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        match self {
            CompactSet::Segment { a, b } => {
                let t: f64 = rng.random();
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
            CompactSet::Union { parts } => {
                let i = rng.random_range(0..parts.len());
                parts[i].sample(rng)
            }
            _ => {
                let (lo, hi) = self.bounding_box();
                for _ in 0..10_000 {
                    let p = [rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])];
                    if self.contains(p) {
                        return p;
                    }
                }
                self.project([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])])
            }
        }
    }

    /// `j` points spread along the outer boundary.
    fn boundary_points(&self, j: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let jitter = |rng: &mut ChaCha8Rng| 1e-3 * (rng.random::<f64>() - 0.5);
        match self {
            CompactSet::Disk { center, radius } => (0..j)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * (i as f64 + jitter(rng)) / j as f64;
                    [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect(),
            CompactSet::Segment { a, b } => (0..j)
                .map(|i| {
                    let c = 0.5 - 0.5 * (std::f64::consts::PI * (i as f64 + 0.5 + jitter(rng)) / j as f64).cos();
                    [a[0] + c * (b[0] - a[0]), a[1] + c * (b[1] - a[1])]
                })
                .collect(),
            CompactSet::Polygon { vertices } => {
                let n = vertices.len();
                let lens: Vec<f64> = (0..n).map(|i| dist(vertices[i], vertices[(i + 1) % n])).collect();
                let total: f64 = lens.iter().sum();
                (0..j)
                    .map(|i| {
                        let mut s = total * (i as f64 + 0.5 + jitter(rng)) / j as f64;
                        let mut e = 0;
                        while e + 1 < n && s > lens[e] {
                            s -= lens[e];
                            e += 1;
                        }
                        let (a, b) = (vertices[e], vertices[(e + 1) % n]);
                        let t = (s / lens[e].max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
                        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                    })
                    .collect()
            }
            CompactSet::Union { parts } => (0..j)
                .map(|i| {
                    let part = &parts[i % parts.len()];
                    part.boundary_points(1 + i / parts.len(), rng)[i / parts.len()]
                })
                .collect(),
        }
    }
}

/// `Σ_{k<ℓ} ln |w_k - w_ℓ|`.
pub fn log_energy(points: &[Point]) -> f64 {
    let mut e = 0.0;
    for k in 0..points.len() {
        for l in k + 1..points.len() {
            e += dist(points[k], points[l]).ln();
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeketeResult {
    pub j: usize,
    pub points: Vec<Point>,
    pub log_energy: f64,
    /// `Δ_j^{1/(j(j-1))} = exp(2·log_energy / (j(j-1)))`.
    pub delta_j: f64,
}

const MAX_ITER: usize = 5000;

fn ascend(set: &CompactSet, mut w: Vec<Point>) -> (Vec<Point>, f64) {
    let diam = set.diameter();
    let mut e = log_energy(&w);
    let mut step = 0.05 * diam;
    let j = w.len();
    let mut grad = vec![[0.0; 2]; j];
    let mut cand = w.clone();
    for _ in 0..MAX_ITER {
        grad.iter_mut().for_each(|g| *g = [0.0; 2]);
        for k in 0..j {
            for l in k + 1..j {
                let d = sub(w[k], w[l]);
                let r2 = d[0] * d[0] + d[1] * d[1];
                let g = [d[0] / r2, d[1] / r2];
                grad[k][0] += g[0];
                grad[k][1] += g[1];
                grad[l][0] -= g[0];
                grad[l][1] -= g[1];
            }
        }
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g[0].hypot(g[1])));
        if !(gmax > 0.0) {
            break;
        }
        let mut improved = None;
        while step > 1e-14 * diam {
            for k in 0..j {
                let p = [w[k][0] + step * grad[k][0] / gmax, w[k][1] + step * grad[k][1] / gmax];
                cand[k] = set.project(p);
            }
            let ec = log_energy(&cand);
            if ec > e {
                improved = Some(ec);
                break;
            }
            step *= 0.5;
        }
        let Some(ec) = improved else { break };
        let rel = (ec - e) / e.abs().max(1.0);
        std::mem::swap(&mut w, &mut cand);
        e = ec;
        step *= 1.5;
        if rel < 1e-10 {
            break;
        }
    }
    (w, e)
}

fn better(a: &(Vec<Point>, f64), b: &(Vec<Point>, f64)) -> bool {
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    for (p, q) in a.0.iter().zip(&b.0) {
        for i in 0..2 {
            if p[i] != q[i] {
                return p[i] < q[i];
            }
        }
    }
    false
}

/// Maximizes the logarithmic energy of `j` points in the set over seeded restarts.
pub fn fekete_optimize(set: &CompactSet, j: usize, restarts: usize, seed: u64) -> Result<FeketeResult> {
    if j < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 points, got {j}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    set.validate()?;
    let runs: Vec<(Vec<Point>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = if r == 0 {
                set.boundary_points(j, &mut rng)
            } else {
                (0..j).map(|_| set.sample(&mut rng)).collect()
            };
            ascend(set, start)
        })
        .collect();
    let mut best = runs[0].clone();
    for run in &runs[1..] {
        if better(run, &best) {
            best = run.clone();
        }
    }
    let (points, log_energy) = best;
    let delta_j = (2.0 * log_energy / (j * (j - 1)) as f64).exp();
    Ok(FeketeResult {
        j,
        points,
        log_energy,
        delta_j,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub runs: Vec<FeketeResult>,
    /// `δ_j · j^{-1/(j-1)}` at the largest `j`.
    pub estimate: f64,
    /// `(Δ_j / ((4/e · ln j + 4)^j j^j))^{1/(j(j-1))}`, absent for disconnected sets.
    pub lower_cert: Option<f64>,
    pub seed: u64,
    pub restarts: usize,
}

/// `j = 8, 16, 32, ...` up to and including `j_max`.
pub fn j_schedule(j_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 8;
    while j < j_max {
        out.push(j);
        j *= 2;
    }
    out.push(j_max);
    out
}

pub fn capacity_estimate(set: &CompactSet, j_max: usize, restarts: usize, seed: u64) -> Result<CapacityEstimate> {
    if j_max < 8 {
        return Err(Error::InvalidParameter(format!("j_max = {j_max} must be at least 8")));
    }
    let runs = j_schedule(j_max)
        .into_iter()
        .map(|j| fekete_optimize(set, j, restarts, seed))
        .collect::<Result<Vec<_>>>()?;
    let last = runs.last().expect("nonempty schedule");
    let j = last.j as f64;
    let pairs = j * (j - 1.0);
    let estimate = last.delta_j * (-j.ln() / (j - 1.0)).exp();
    let lower_cert = set.is_connected_piece().then(|| {
        let ln_delta = 2.0 * last.log_energy;
        let ln_factor = j * (4.0 / std::f64::consts::E * j.ln() + 4.0).ln() + j * j.ln();
        ((ln_delta - ln_factor) / pairs).exp()
    });
    Ok(CapacityEstimate {
        runs,
        estimate,
        lower_cert,
        seed,
        restarts,
    })
}
