//! Gauss rules (Hermite, Laguerre, Legendre) and tensor-product integration
//! over R², R⁴ and the half line.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix (implicit QL without
//! eigenvectors), polished by Newton steps on the three-term recurrence.
//! Weights are evaluated from the Christoffel sum in log space so that the
//! weight-removed ("scaled") weights stay finite where the raw weights
//! underflow.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

pub const MAX_ORDER: usize = 2000;
pub const DEFAULT_ORDER_R2: usize = 80;
pub const DEFAULT_ORDER_R4: usize = 40;
pub const DEFAULT_ORDER_HALFLINE: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// Weight `e^{-x²}` on R.
    GaussHermite,
    /// Weight `t^α e^{-t}` on `[0, ∞)`.
    GaussLaguerre { alpha: f64 },
    /// Weight 1 on `[-1, 1]`.
    GaussLegendre,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
    log_weights: Arc<[f64]>,
    scaled_weights: Arc<[f64]>,
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights against the rule's weight function. Entries may underflow to
    /// zero for large orders; `log_weights` never does.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Weights divided by the weight function at the node, so that
    /// `Σ scaled_i f(x_i) ≈ ∫ f`.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }
}

type CacheKey = (u8, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, QuadratureRule>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, QuadratureRule>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached(key: CacheKey, build: impl FnOnce() -> Result<QuadratureRule>) -> Result<QuadratureRule> {
    if let Some(rule) = cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = build()?;
    cache()
        .write()
        .expect("rule cache poisoned")
        .entry(key)
        .or_insert_with(|| rule.clone());
    Ok(rule)
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Gauss–Hermite rule for the weight `e^{-x²}`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    check_order(order)?;
    cached((0, 0, order), || {
        let diag = vec![0.0; order];
        let off: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
        build_rule(RuleKind::GaussHermite, diag, off, 0.5 * PI.ln())
    })
}

/// Gauss–Laguerre rule for the weight `t^α e^{-t}`.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<QuadratureRule> {
    if alpha.is_nan() || alpha <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "Laguerre exponent alpha = {alpha} must exceed -1"
        )));
    }
    check_order(order)?;
    cached((1, alpha.to_bits(), order), || {
        let diag = (0..order).map(|k| 2.0 * k as f64 + 1.0 + alpha).collect();
        let off = (1..order)
            .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
            .collect();
        build_rule(
            RuleKind::GaussLaguerre { alpha },
            diag,
            off,
            ln_gamma(alpha + 1.0),
        )
    })
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    check_order(order)?;
    cached((2, 0, order), || {
        let diag = vec![0.0; order];
        let off = (1..order)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        build_rule(RuleKind::GaussLegendre, diag, off, 2f64.ln())
    })
}

fn ln_weight_fn(kind: RuleKind, x: f64) -> f64 {
    match kind {
        RuleKind::GaussHermite => -x * x,
        RuleKind::GaussLaguerre { alpha } => {
            if alpha == 0.0 {
                -x
            } else {
                alpha * x.ln() - x
            }
        }
        RuleKind::GaussLegendre => 0.0,
    }
}

fn build_rule(kind: RuleKind, diag: Vec<f64>, off: Vec<f64>, ln_mass: f64) -> Result<QuadratureRule> {
    let n = diag.len();
    let mut e = off.clone();
    e.push(0.0);
    let mut nodes = tridiagonal_eigenvalues(diag.clone(), e)?;
    nodes.sort_by(|a, b| a.total_cmp(b));
    polish_nodes(&mut nodes, &diag, &off);
    if matches!(kind, RuleKind::GaussHermite | RuleKind::GaussLegendre) {
        for i in 0..n / 2 {
            let v = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            nodes[i] = -v;
            nodes[n - 1 - i] = v;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
    }
    let mut log_weights: Vec<f64> = nodes
        .iter()
        .map(|&x| -ln_christoffel_sum(x, &diag, &off, ln_mass))
        .collect();
    if matches!(kind, RuleKind::GaussHermite | RuleKind::GaussLegendre) {
        for i in 0..n / 2 {
            let v = 0.5 * (log_weights[i] + log_weights[n - 1 - i]);
            log_weights[i] = v;
            log_weights[n - 1 - i] = v;
        }
    }
    let weights = log_weights.iter().map(|lw| lw.exp()).collect::<Vec<_>>();
    let scaled = nodes
        .iter()
        .zip(&log_weights)
        .map(|(&x, &lw)| (lw - ln_weight_fn(kind, x)).exp())
        .collect::<Vec<_>>();
    Ok(QuadratureRule {
        kind,
        nodes: nodes.into(),
        weights: weights.into(),
        log_weights: log_weights.into(),
        scaled_weights: scaled.into(),
    })
}

/// `ln Σ_{k<n} p_k(x)²` for the orthonormal polynomials of the Jacobi matrix.
fn ln_christoffel_sum(x: f64, diag: &[f64], off: &[f64], ln_mass: f64) -> f64 {
    const BIG: f64 = 1e100;
    let mut log_scale = -0.5 * ln_mass;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    for k in 0..diag.len() - 1 {
        let back = if k == 0 { 0.0 } else { off[k - 1] };
        let next = ((x - diag[k]) * cur - back * prev) / off[k];
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            sum /= BIG * BIG;
            log_scale += BIG.ln();
        }
    }
    sum.ln() + 2.0 * log_scale
}

/// Newton steps on the degree-n orthogonal polynomial, accepted only when
/// they stay well inside the gap to the neighbouring nodes.
fn polish_nodes(nodes: &mut [f64], diag: &[f64], off: &[f64]) {
    let n = nodes.len();
    if n < 2 {
        return;
    }
    let original = nodes.to_vec();
    for i in 0..n {
        let gap_lo = if i > 0 { original[i] - original[i - 1] } else { f64::INFINITY };
        let gap_hi = if i + 1 < n { original[i + 1] - original[i] } else { f64::INFINITY };
        let limit = 0.1 * gap_lo.min(gap_hi);
        let mut x = original[i];
        for _ in 0..3 {
            let (f, df) = char_poly(x, diag, off);
            if df == 0.0 || !f.is_finite() || !df.is_finite() {
                break;
            }
            let step = f / df;
            if !(step.abs() < limit) {
                break;
            }
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                break;
            }
        }
        if (x - original[i]).abs() < limit {
            nodes[i] = x;
        }
    }
}

/// Value and derivative of `(x - a_{n-1}) p_{n-1} - b_{n-1} p_{n-2}` up to a
/// common positive factor.
fn char_poly(x: f64, diag: &[f64], off: &[f64]) -> (f64, f64) {
    const BIG: f64 = 1e100;
    let n = diag.len();
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for k in 0..n - 1 {
        let back = if k == 0 { 0.0 } else { off[k - 1] };
        let p_next = ((x - diag[k]) * p - back * p_prev) / off[k];
        let d_next = (p + (x - diag[k]) * d - back * d_prev) / off[k];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if p.abs().max(d.abs()) > BIG {
            p /= BIG;
            p_prev /= BIG;
            d /= BIG;
            d_prev /= BIG;
        }
    }
    let back = if n >= 2 { off[n - 2] } else { 0.0 };
    let f = (x - diag[n - 1]) * p - back * p_prev;
    let df = p + (x - diag[n - 1]) * d - back * d_prev;
    (f, df)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
/// `e[i]` couples rows `i` and `i + 1`; `e[n-1]` is ignored.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Accuracy {
                    what: "tridiagonal QL iteration".into(),
                    discrepancy: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Affine placement of a one-dimensional rule: node `t` maps to `center + scale·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub center: f64,
    pub scale: f64,
}

impl Default for Axis {
    fn default() -> Self {
        Axis {
            center: 0.0,
            scale: 1.0,
        }
    }
}

impl Axis {
    pub fn scaled(scale: f64) -> Self {
        Axis { center: 0.0, scale }
    }
}

/// Sum over rule indices pairing `i` with `n-1-i`, so integrands odd about the
/// centre cancel exactly on symmetric rules.
fn symmetric_sum<T>(n: usize, mut term: impl FnMut(usize) -> T) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    let mut acc = T::default();
    for i in 0..n / 2 {
        acc = acc + (term(i) + term(n - 1 - i));
    }
    if n % 2 == 1 {
        acc = acc + term(n / 2);
    }
    acc
}

/// `∫_R f` with a Hermite (or Legendre) rule placed on `axis`.
pub fn integrate_r1<T, F>(f: F, rule: &QuadratureRule, axis: Axis) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let x = rule.nodes();
    let w = rule.scaled_weights();
    symmetric_sum(x.len(), |i| f(axis.center + axis.scale * x[i]) * (w[i] * axis.scale))
}

/// Tensor-product estimate of `∫∫ f(x, ξ) dx dξ` with default placement.
pub fn integrate_r2<T, F>(f: F, rule: &QuadratureRule) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: Fn(f64, f64) -> T,
{
    integrate_r2_with(f, rule, [Axis::default(); 2])
}

pub fn integrate_r2_with<T, F>(f: F, rule: &QuadratureRule, axes: [Axis; 2]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: Fn(f64, f64) -> T,
{
    integrate_r1(
        |x| integrate_r1(|y| f(x, y), rule, axes[1]),
        rule,
        axes[0],
    )
}

/// Four-fold tensor-product estimate of `∫ f` over R⁴.
pub fn integrate_r4<T, F>(f: F, rule: &QuadratureRule) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: Fn([f64; 4]) -> T,
{
    integrate_r4_with(f, rule, [Axis::default(); 4])
}

pub fn integrate_r4_with<T, F>(f: F, rule: &QuadratureRule, axes: [Axis; 4]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: Fn([f64; 4]) -> T,
{
    integrate_r1(
        |a| {
            integrate_r1(
                |b| {
                    integrate_r1(
                        |c| integrate_r1(|d| f([a, b, c, d]), rule, axes[3]),
                        rule,
                        axes[2],
                    )
                },
                rule,
                axes[1],
            )
        },
        rule,
        axes[0],
    )
}

/// Nodes and weights of a composite Gauss–Legendre rule over consecutive
/// panels `[edges[i], edges[i+1]]`.
pub fn composite_nodes(edges: &[f64], rule: &QuadratureRule) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(edges.len().saturating_sub(1) * rule.order());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes().iter().zip(rule.scaled_weights()) {
            out.push((mid + half * x, w * half));
        }
    }
    out
}

/// Composite Gauss–Legendre estimate of `∫ f` over the panels in `edges`.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, edges: &[f64], rule: &QuadratureRule) -> f64 {
    composite_nodes(edges, rule)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// `n` equal panels on `[a, b]`.
pub fn uniform_edges(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Half-line integration strategy.
#[derive(Debug, Clone)]
pub enum HalfLineRule {
    /// `∫_0^∞ f ≈ Σ (w_i e^{t_i} / rate) f(t_i / rate)`, exact for
    /// polynomials times `e^{-rate·t}`.
    Laguerre { rule: QuadratureRule, rate: f64 },
    /// Composite Gauss–Legendre on `[0, upper]` for integrands supported there.
    Finite {
        upper: f64,
        panels: usize,
        rule: QuadratureRule,
    },
}

impl HalfLineRule {
    pub fn laguerre(order: usize, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter(format!("decay rate {rate} must be positive")));
        }
        Ok(HalfLineRule::Laguerre {
            rule: gauss_laguerre(order, 0.0)?,
            rate,
        })
    }

    pub fn finite(upper: f64, panels: usize, order: usize) -> Result<Self> {
        if !(upper > 0.0) {
            return Err(Error::InvalidParameter(format!("support end {upper} must be positive")));
        }
        Ok(HalfLineRule::Finite {
            upper,
            panels: panels.max(1),
            rule: gauss_legendre(order)?,
        })
    }

    /// Picks the finite sub-rule when the integrand declares compact support.
    pub fn for_support(support: Option<f64>, order: usize) -> Result<Self> {
        match support {
            Some(c) => {
                let panels = (c.ceil() as usize).clamp(1, 4096);
                HalfLineRule::finite(c, panels, 32)
            }
            None => HalfLineRule::laguerre(order, 1.0),
        }
    }
}

/// `∫_0^∞ f(t) dt` under the given strategy.
pub fn integrate_halfline<F: Fn(f64) -> f64>(f: F, rule: &HalfLineRule) -> f64 {
    match rule {
        HalfLineRule::Laguerre { rule, rate } => rule
            .nodes()
            .iter()
            .zip(rule.scaled_weights())
            .map(|(&t, &w)| if w == 0.0 { 0.0 } else { w * f(t / rate) })
            .sum::<f64>()
            / rate,
        HalfLineRule::Finite {
            upper,
            panels,
            rule,
        } => integrate_panels(f, &uniform_edges(0.0, *upper, *panels), rule),
    }
}
