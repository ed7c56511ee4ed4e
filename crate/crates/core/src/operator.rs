//! Truncated matrices of Weyl and anti-Wick operators, the perturbed Landau
//! Hamiltonian in the `φ_{k,q}` basis, and spectral reports.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quadrature::{self, composite_nodes, gauss_hermite, gauss_laguerre, gauss_legendre, Axis};
use crate::special::{laguerre_scaled, laguerre_weighted_all, log_factorial};
use crate::symbol::{
    antiwick_to_weyl, apply_d_br, vtilde_from_omega, Frame, SeparableTerm, Sign, Structure4D, Symbol2D,
    Symbol4D,
};
use crate::wigner::wigner_table;

/// Largest Hermite truncation assembled by 2-D quadrature.
pub const MAX_WEYL_DIM: usize = 256;
/// Largest `Q·K` for the generic 4-D quadrature path.
pub const MAX_GENERIC_DIM: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    Hermite { n: usize },
    Landau { levels: usize, radial: usize, b: f64 },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Hermite { n } => n,
            Basis::Landau { levels, radial, .. } => levels * radial,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub symbol: String,
    pub orders: Vec<usize>,
    /// Largest coupling touching the last retained radial index.
    pub edge_coupling: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub basis: Basis,
    pub entries: DMatrix<Complex64>,
    pub provenance: Provenance,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |M - M†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.entries;
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeylOptions {
    /// Gauss–Hermite order per axis; `max(80, N + 24)` when unset.
    pub order: Option<usize>,
    /// Recompute at twice the order and fail if the entries move.
    pub check_convergence: bool,
}

impl Default for WeylOptions {
    fn default() -> Self {
        WeylOptions {
            order: None,
            check_convergence: false,
        }
    }
}

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::default(); n]
}

fn add_into(mut a: Vec<Complex64>, b: Vec<Complex64>) -> Vec<Complex64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Upper triangle of `⟨v, Ψ_{k,ℓ}⟩` for `k ≤ ℓ < n`, mirrored Hermitian.
fn pairing_by_quadrature(v: &Symbol2D, n: usize, order: usize) -> Result<DMatrix<Complex64>> {
    let rule = gauss_hermite(order)?;
    let [ax, ay] = v.pairing_axes();
    let t = rule.nodes();
    let sw = rule.scaled_weights();
    let acc = (0..order)
        .into_par_iter()
        .fold(
            || (zeros(n * n), zeros(n * n)),
            |(mut acc, mut tab), i| {
                let x = ax.center + ax.scale * t[i];
                for j in 0..order {
                    let xi = ay.center + ay.scale * t[j];
                    let w = sw[i] * ax.scale * sw[j] * ay.scale;
                    if w == 0.0 {
                        continue;
                    }
                    let val = v.eval(x, xi) * w;
                    if val == 0.0 {
                        continue;
                    }
                    wigner_table(n, x, xi, &mut tab);
                    for k in 0..n {
                        for l in k..n {
                            acc[k * n + l] += tab[k * n + l].conj() * val;
                        }
                    }
                }
                (acc, tab)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| zeros(n * n), add_into);
    let mut m = DMatrix::from_element(n, n, Complex64::default());
    for k in 0..n {
        m[(k, k)] = Complex64::new(acc[k * n + k].re, 0.0);
        for l in k + 1..n {
            m[(k, l)] = acc[k * n + l];
            m[(l, k)] = acc[k * n + l].conj();
        }
    }
    Ok(m)
}

/// `M_{kℓ} = ⟨op^w(v)ψ_ℓ, ψ_k⟩ = ⟨v, Ψ_{k,ℓ}⟩` for `k, ℓ < n`.
pub fn weyl_matrix(v: &Symbol2D, n: usize) -> Result<TruncatedOperator> {
    weyl_matrix_with(v, n, &WeylOptions::default())
}

pub fn weyl_matrix_with(v: &Symbol2D, n: usize, opts: &WeylOptions) -> Result<TruncatedOperator> {
    if n == 0 || n > MAX_WEYL_DIM {
        return Err(Error::InvalidParameter(format!(
            "Hermite truncation {n} outside 1..={MAX_WEYL_DIM}"
        )));
    }
    let order = opts.order.unwrap_or((n + 24).max(quadrature::DEFAULT_ORDER_R2));
    let entries = pairing_by_quadrature(v, n, order)?;
    let mut orders = vec![order];
    if opts.check_convergence {
        let doubled = (2 * order).min(quadrature::MAX_ORDER);
        let fine = pairing_by_quadrature(v, n, doubled)?;
        let scale = fine.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let discrepancy = (&entries - &fine).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if discrepancy > 1e-10 * scale + 1e-14 {
            return Err(Error::Accuracy {
                what: format!("Weyl matrix of {}", v.describe()),
                discrepancy,
            });
        }
        orders.push(doubled);
    }
    Ok(TruncatedOperator {
        basis: Basis::Hermite { n },
        entries,
        provenance: Provenance {
            symbol: v.describe(),
            orders,
            ..Default::default()
        },
    })
}

/// `∫_0^∞ f(t) L_k(t) e^{-t/2} dt` for `k < count`, by a composite rule in `u = √t`.
pub fn laguerre_function_moments<F>(f: F, support: Option<f64>, breakpoints: &[f64], count: usize) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if count == 0 {
        return Vec::new();
    }
    let c = count as f64;
    let reach = 4.0 * c + 2.0 + 20.0 * (4.0 * c).cbrt() + 80.0;
    let t_max = support.map_or(reach, |s| s.min(reach));
    if !(t_max > 0.0) {
        return vec![0.0; count];
    }
    let u_max = t_max.sqrt();
    let h = (2.0 / c.sqrt()).min(0.25);
    let mut edges: Vec<f64> = (1..=20).rev().map(|j| h.min(u_max) * 0.5f64.powi(j)).collect();
    edges.insert(0, 0.0);
    let mut u = h.min(u_max);
    while u < u_max {
        edges.push(u);
        u += h;
    }
    edges.push(u_max);
    edges.extend(breakpoints.iter().filter(|&&t| t > 0.0 && t < t_max).map(|t| t.sqrt()));
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let rule = gauss_legendre(20).expect("valid order");
    let nodes = composite_nodes(&edges, &rule);
    nodes
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = vec![0.0; count];
            let mut lag = vec![0.0; count];
            for &(u, w) in chunk {
                let t = u * u;
                let fv = f(t) * 2.0 * u * w;
                if fv == 0.0 {
                    continue;
                }
                laguerre_weighted_all(t, &mut lag);
                acc.iter_mut().zip(&lag).for_each(|(a, l)| *a += fv * l);
            }
            acc
        })
        .reduce(
            || vec![0.0; count],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Exact Gauss–Laguerre evaluation of `∫ f(t) L_k(t) e^{-t/2} dt` for
/// `f(t) = P(t) e^{-rate t}` with `deg P = degree`. `f` is evaluated directly,
/// since monomial coefficients of high-degree Laguerre sums cancel badly.
fn closed_moments(f: impl Fn(f64) -> f64 + Sync, degree: usize, rate: f64, count: usize) -> Option<Vec<f64>> {
    let total = rate + 0.5;
    if !(total > 0.0) {
        return None;
    }
    let order = (count + degree) / 2 + 16;
    if order > quadrature::MAX_ORDER {
        return None;
    }
    let rule = gauss_laguerre(order, 0.0).ok()?;
    let nodes: Vec<(f64, f64)> = rule
        .nodes()
        .iter()
        .zip(rule.scaled_weights())
        .map(|(&tau, &w)| (tau / total, w / total))
        .collect();
    let out = nodes
        .par_chunks(32)
        .map(|chunk| {
            let mut acc = vec![0.0; count];
            let mut lag = vec![0.0; count];
            for &(t, w) in chunk {
                let fv = w * f(t);
                if fv == 0.0 || !fv.is_finite() {
                    continue;
                }
                laguerre_weighted_all(t, &mut lag);
                acc.iter_mut().zip(&lag).for_each(|(a, l)| *a += fv * l);
            }
            acc
        })
        .reduce(
            || vec![0.0; count],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Some(out)
}

/// Moments of `t ↦ ℛ(c·t)` against the Laguerre functions.
fn profile_moments(profile: &RadialProfile, c: f64, count: usize) -> Vec<f64> {
    if let Some((p, a)) = profile.poly_exp() {
        let degree = p.len().saturating_sub(1);
        if let Some(m) = closed_moments(|t| profile.eval(c * t), degree, a * c, count) {
            return m;
        }
    }
    let support = profile.support().map(|s| s / c);
    let bps: Vec<f64> = profile.breakpoints().iter().map(|s| s / c).collect();
    laguerre_function_moments(|t| profile.eval(c * t), support, &bps, count)
}

/// Weyl eigenvalues `μ_k = ((-1)^k/2) ∫ ℛ(t/2) L_k(t) e^{-t/2} dt` of a radial symbol.
pub fn weyl_radial_eigs(profile: &RadialProfile, count: usize) -> Vec<f64> {
    profile_moments(profile, 0.5, count)
        .into_iter()
        .enumerate()
        .map(|(k, m)| if k % 2 == 0 { 0.5 * m } else { -0.5 * m })
        .collect()
}

/// The same eigenvalues from the radial profile of the Fourier transform,
/// `μ_k = ∫ ℛ_{F̂}(2t) L_k(t) e^{-t/2} dt`.
pub fn weyl_radial_eigs_fourier(profile_hat: &RadialProfile, count: usize) -> Vec<f64> {
    profile_moments(profile_hat, 2.0, count)
}

/// Anti-Wick eigenvalues `∫ ℛ(2t) t^k e^{-t} / k! dt`.
pub fn antiwick_radial_eigs(profile: &RadialProfile, count: usize) -> Result<Vec<f64>> {
    Ok(toeplitz_radial_eigs(profile, 0, 1.0, count)?.nu)
}

/// Diagonal of a Toeplitz operator in the `φ_{k,q}` basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToeplitzEigs {
    pub nu: Vec<f64>,
    /// `ln |ν_k|`, finite where `ν_k` itself underflows.
    pub ln_nu: Vec<f64>,
    pub sign: Vec<f64>,
}

/// `∫_0^hi sign·exp(g)` returned as `(sign, ln |·|)`, integrating only where `g`
/// is within 60 of its peak.
fn log_integral(g: &(dyn Fn(f64) -> (f64, f64) + Sync), hi: f64, breakpoints: &[f64]) -> (f64, f64) {
    const SCAN: usize = 2048;
    const DROP: f64 = 60.0;
    let root = hi.sqrt();
    let mut samples: Vec<f64> = (0..=SCAN)
        .map(|i| {
            let u = root * i as f64 / SCAN as f64;
            u * u
        })
        .collect();
    samples.extend(breakpoints.iter().copied().filter(|&t| t > 0.0 && t < hi));
    samples.sort_by(|a, b| a.total_cmp(b));
    samples.dedup();
    let logs: Vec<f64> = samples.iter().map(|&t| g(t).1).collect();
    let peak = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return (0.0, f64::NEG_INFINITY);
    }
    let first = logs.iter().position(|&v| v > peak - DROP).unwrap_or(0);
    let last = logs.iter().rposition(|&v| v > peak - DROP).unwrap_or(samples.len() - 1);
    let lo = samples[first.saturating_sub(1)];
    let up = samples[(last + 1).min(samples.len() - 1)];
    let mut edges = quadrature::uniform_edges(lo, up, 64);
    edges.extend(breakpoints.iter().copied().filter(|&t| t > lo && t < up));
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let rule = gauss_legendre(24).expect("valid order");
    let total: f64 = composite_nodes(&edges, &rule)
        .into_iter()
        .map(|(t, w)| {
            let (s, l) = g(t);
            if s == 0.0 || l == f64::NEG_INFINITY {
                0.0
            } else {
                w * s * (l - peak).exp()
            }
        })
        .sum();
    if total == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (total.signum(), peak + total.abs().ln())
}

/// `ν̃_k = ⟨ζ φ_{k,q}, φ_{k,q}⟩ = ∫ ℛ_ζ(2t/b) [Q_n^{(m)}(t)]² dt` with
/// `n = min(k, q)`, `m = |k - q|`, evaluated in log space.
pub fn toeplitz_radial_eigs(zeta: &RadialProfile, q: usize, b: f64, count: usize) -> Result<ToeplitzEigs> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("field strength b = {b} must be positive")));
    }
    let scale = 2.0 / b;
    let results: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let n = k.min(q);
            let m = k.abs_diff(q);
            let ln_norm = log_factorial(n as u64) - log_factorial((n + m) as u64);
            let mf = m as f64;
            let g = |t: f64| -> (f64, f64) {
                let (sr, lr) = zeta.ln_abs(scale * t);
                if sr == 0.0 {
                    return (0.0, f64::NEG_INFINITY);
                }
                let power = if m == 0 {
                    0.0
                } else if t == 0.0 {
                    return (0.0, f64::NEG_INFINITY);
                } else {
                    mf * t.ln()
                };
                let lag = if n == 0 {
                    0.0
                } else {
                    let l = laguerre_scaled(n, mf, t, 0.0);
                    if l.signum() == 0.0 {
                        return (0.0, f64::NEG_INFINITY);
                    }
                    2.0 * l.ln_abs()
                };
                (sr, lr + ln_norm + power - t + lag)
            };
            let kq = (k + q) as f64;
            let reach = kq + 40.0 * (kq + 1.0).sqrt() + 200.0;
            let hi = zeta.support().map_or(reach, |c| (c / scale).min(reach));
            if !(hi > 0.0) {
                return (0.0, f64::NEG_INFINITY);
            }
            let bps: Vec<f64> = zeta.breakpoints().iter().map(|s| s / scale).collect();
            log_integral(&g, hi, &bps)
        })
        .collect();
    Ok(ToeplitzEigs {
        nu: results.iter().map(|&(s, l)| s * l.exp()).collect(),
        ln_nu: results.iter().map(|&(_, l)| l).collect(),
        sign: results.iter().map(|&(s, _)| s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PositivityVerdict {
    AllNonneg,
    FirstNegative { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub coefficients: Vec<f64>,
    pub verdict: PositivityVerdict,
}

fn verdict(coefficients: Vec<f64>) -> PositivityReport {
    let scale = coefficients.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * scale;
    let verdict = match coefficients.iter().position(|&c| c < -tol) {
        Some(index) => PositivityVerdict::FirstNegative { index },
        None => PositivityVerdict::AllNonneg,
    };
    PositivityReport { coefficients, verdict }
}

/// Signs of `c_k = ⟨ℛ(·/2), (-1)^k ℒ_k⟩ = 2μ_k^w`.
pub fn positivity_laguerre_weyl(profile: &RadialProfile, count: usize) -> PositivityReport {
    verdict(weyl_radial_eigs(profile, count).into_iter().map(|m| 2.0 * m).collect())
}

/// Signs of the anti-Wick moments `∫ ℛ(2t) t^k e^{-t} / k! dt`.
pub fn positivity_laguerre_antiwick(profile: &RadialProfile, count: usize) -> Result<PositivityReport> {
    Ok(verdict(antiwick_radial_eigs(profile, count)?))
}

/// Largest entries inside and outside the band `|k - ℓ| ≤ K`.
pub fn banded_structure_check(v: &Symbol2D, n: usize) -> Result<(f64, f64)> {
    let band = v
        .angular_band()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no finite angular band", v.describe())))?
        as usize;
    let m = weyl_matrix(v, n)?;
    let mut inside: f64 = 0.0;
    let mut outside: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let a = m.get(k, l).norm();
            if k.abs_diff(l) <= band {
                inside = inside.max(a);
            } else {
                outside = outside.max(a);
            }
        }
    }
    Ok((inside, outside))
}

/// `‖F‖²_{L²}` of a symbol on R².
pub fn symbol_norm_sq(f: &Symbol2D) -> Result<f64> {
    if let Some(p) = f.to_radial() {
        if let Some((poly, a)) = p.poly_exp() {
            if a > 0.0 {
                let order = poly.len() + 16;
                let rule = quadrature::HalfLineRule::laguerre(order, 2.0 * a)?;
                return Ok(PI * quadrature::integrate_halfline(|s| p.eval(s).powi(2), &rule));
            }
        }
        if let Some(c) = p.support() {
            let mut edges = quadrature::uniform_edges(0.0, c, 64);
            edges.extend(p.breakpoints().into_iter().filter(|&s| s > 0.0 && s < c));
            edges.sort_by(|a, b| a.total_cmp(b));
            edges.dedup();
            let rule = gauss_legendre(24)?;
            return Ok(PI * quadrature::integrate_panels(|s| p.eval(s).powi(2), &edges, &rule));
        }
    }
    let a = f.envelope_rate().unwrap_or(0.5).max(1e-3);
    let rule = gauss_hermite(160)?;
    Ok(quadrature::integrate_r2_with(
        |x, xi| f.eval(x, xi).powi(2),
        &rule,
        [Axis::scaled(1.0 / (2.0 * a).sqrt()); 2],
    ))
}

/// `(Σ_{k,ℓ<N} |M_{kℓ}|², (2π)^{-1} ‖F‖²)`.
pub fn hilbert_schmidt_check(f: &Symbol2D, n: usize) -> Result<(f64, f64)> {
    let m = weyl_matrix(f, n)?;
    let matrix = m.entries.iter().map(|z| z.norm_sqr()).sum();
    Ok((matrix, symbol_norm_sq(f)? / (2.0 * PI)))
}

/// Matrix of `⟨A, Ψ_{k,ℓ}⟩`, diagonal from the radial formula when `A` is radial.
pub fn pairing_matrix(a: &Symbol2D, n: usize) -> Result<DMatrix<Complex64>> {
    if let Some(p) = a.to_radial() {
        let mu = weyl_radial_eigs(&p, n);
        return Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(mu[i], 0.0)
            } else {
                Complex64::default()
            }
        }));
    }
    Ok(weyl_matrix(a, n)?.entries)
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Include the `i^{k-ℓ-q+r}` phases of the matrix elements.
    pub phases: bool,
    /// Gauss–Hermite order per axis on the generic path.
    pub order: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            phases: true,
            order: quadrature::DEFAULT_ORDER_R4,
        }
    }
}

fn i_power(e: i64) -> Complex64 {
    match e.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Coupling matrix `m_{k,ℓ;q,r}(𝒱) = i^{k-ℓ-q+r} ⟨𝒱_b, Ψ_{q,r} ⊗ Ψ_{k,ℓ}⟩`, row index `q·K + k`.
pub fn coupling_matrix(v: &Symbol4D, levels: usize, radial: usize, opts: &AssemblyOptions) -> Result<TruncatedOperator> {
    if levels == 0 || radial == 0 {
        return Err(Error::InvalidParameter("empty truncation".into()));
    }
    let dim = levels * radial;
    let mut m = DMatrix::from_element(dim, dim, Complex64::default());
    let mut orders = Vec::new();
    match &v.structure {
        Structure4D::Separable { terms, .. } => {
            for t in terms {
                if t.coeff == 0.0 {
                    continue;
                }
                let a = pairing_matrix(&t.first, levels)?;
                let bm = pairing_matrix(&t.second, radial)?;
                for q in 0..levels {
                    for r in 0..levels {
                        let aq = a[(q, r)] * t.coeff;
                        if aq == Complex64::default() {
                            continue;
                        }
                        for k in 0..radial {
                            for l in 0..radial {
                                m[(q * radial + k, r * radial + l)] += aq * bm[(k, l)];
                            }
                        }
                    }
                }
            }
        }
        Structure4D::Generic { envelope, .. } => {
            if dim > MAX_GENERIC_DIM {
                return Err(Error::InvalidParameter(format!(
                    "generic 4-D assembly limited to Q·K ≤ {MAX_GENERIC_DIM}, got {dim}"
                )));
            }
            generic_coupling(v, levels, radial, opts.order, envelope.unwrap_or(0.0), &mut m)?;
            orders.push(opts.order);
        }
    }
    if opts.phases {
        for q in 0..levels {
            for k in 0..radial {
                for r in 0..levels {
                    for l in 0..radial {
                        let e = k as i64 - l as i64 - q as i64 + r as i64;
                        m[(q * radial + k, r * radial + l)] *= i_power(e);
                    }
                }
            }
        }
    }
    let mut edge: f64 = 0.0;
    for q in 0..levels {
        for r in 0..levels {
            for j in 0..radial {
                edge = edge
                    .max(m[(q * radial + radial - 1, r * radial + j)].norm())
                    .max(m[(q * radial + j, r * radial + radial - 1)].norm());
            }
        }
    }
    Ok(TruncatedOperator {
        basis: Basis::Landau {
            levels,
            radial,
            b: v.b,
        },
        entries: m,
        provenance: Provenance {
            symbol: v.describe(),
            orders,
            edge_coupling: edge,
            warnings: Vec::new(),
        },
    })
}

fn generic_coupling(
    v: &Symbol4D,
    levels: usize,
    radial: usize,
    order: usize,
    envelope: f64,
    m: &mut DMatrix<Complex64>,
) -> Result<()> {
    let rule = gauss_hermite(order)?;
    let s = 1.0 / (1.0 + envelope.max(0.0)).sqrt();
    let nodes: Vec<f64> = rule.nodes().iter().map(|t| s * t).collect();
    let weights: Vec<f64> = rule.scaled_weights().iter().map(|w| s * w).collect();
    let n = nodes.len();
    // Ψ_{q,r}(x, ξ) on the tensor grid of the first pair.
    let mut first = vec![Complex64::default(); n * n * levels * levels];
    for i in 0..n {
        for j in 0..n {
            let off = (i * n + j) * levels * levels;
            wigner_table(levels, nodes[i], nodes[j], &mut first[off..off + levels * levels]);
        }
    }
    let ll = levels * levels;
    let rr = radial * radial;
    let acc = (0..n * n)
        .into_par_iter()
        .fold(
            || (zeros(ll * rr), zeros(rr), zeros(ll)),
            |(mut acc, mut tab, mut g), idx| {
                let (a, c) = (idx / n, idx % n);
                let (y, eta) = (nodes[a], nodes[c]);
                let w2 = weights[a] * weights[c];
                g.iter_mut().for_each(|z| *z = Complex64::default());
                for i in 0..n {
                    for j in 0..n {
                        let val = v.eval_pulled([nodes[i], y, nodes[j], eta]) * weights[i] * weights[j];
                        if val == 0.0 {
                            continue;
                        }
                        let off = (i * n + j) * ll;
                        for (gz, psi) in g.iter_mut().zip(&first[off..off + ll]) {
                            *gz += psi.conj() * val;
                        }
                    }
                }
                wigner_table(radial, y, eta, &mut tab);
                for (qr, gz) in g.iter().enumerate() {
                    let gz = *gz * w2;
                    for (kl, psi) in tab.iter().enumerate() {
                        acc[qr * rr + kl] += gz * psi.conj();
                    }
                }
                (acc, tab, g)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(|| zeros(ll * rr), add_into);
    for q in 0..levels {
        for r in 0..levels {
            for k in 0..radial {
                for l in 0..radial {
                    m[(q * radial + k, r * radial + l)] = acc[(q * levels + r) * rr + k * radial + l];
                }
            }
        }
    }
    Ok(())
}

/// `diag(Λ_q) ± ℳ` on `Q` levels and `K` radial indices, `Λ_q = b(2q+1)`.
pub fn assemble_hv(v: &Symbol4D, levels: usize, radial: usize, sign: Sign) -> Result<TruncatedOperator> {
    assemble_hv_with(v, levels, radial, sign, &AssemblyOptions::default())
}

pub fn assemble_hv_with(
    v: &Symbol4D,
    levels: usize,
    radial: usize,
    sign: Sign,
    opts: &AssemblyOptions,
) -> Result<TruncatedOperator> {
    let mut op = coupling_matrix(v, levels, radial, opts)?;
    let s = sign.factor();
    op.entries *= Complex64::new(s, 0.0);
    for q in 0..levels {
        let lambda = v.b * (2 * q + 1) as f64;
        for k in 0..radial {
            op.entries[(q * radial + k, q * radial + k)] += lambda;
        }
    }
    Ok(op)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCount {
    pub level: usize,
    pub side: Sign,
    /// Open interval; `None` is `-∞`.
    pub lower: Option<f64>,
    pub upper: f64,
    pub count: usize,
    /// Eigenvalues inside the window but within the trust threshold of a level.
    pub untrusted: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub gap_counts: Vec<GapCount>,
    pub trust_threshold: f64,
    pub truncation: Basis,
    pub provenance: Provenance,
}

impl SpectrumReport {
    /// Gap counts recomputed from the stored eigenvalues.
    pub fn recount(&self) -> Vec<GapCount> {
        match self.truncation {
            Basis::Landau { levels, b, .. } => gap_counts(&self.eigenvalues, levels, b, self.trust_threshold),
            Basis::Hermite { .. } => Vec::new(),
        }
    }

    pub fn count(&self, level: usize, side: Sign) -> Option<usize> {
        self.gap_counts
            .iter()
            .find(|g| g.level == level && g.side == side)
            .map(|g| g.count)
    }

    /// Eigenvalues in the window `I_q^±`, trusted only.
    pub fn window_eigenvalues(&self, level: usize, side: Sign) -> Vec<f64> {
        let Basis::Landau { levels, b, .. } = self.truncation else {
            return Vec::new();
        };
        let (lo, hi) = window(level, side, b);
        self.eigenvalues
            .iter()
            .copied()
            .filter(|&e| e > lo && e < hi && trusted(e, levels, b, self.trust_threshold))
            .collect()
    }
}

fn window(level: usize, side: Sign, b: f64) -> (f64, f64) {
    let lam = |q: usize| b * (2 * q + 1) as f64;
    match side {
        Sign::Plus => (lam(level), lam(level + 1)),
        Sign::Minus if level == 0 => (f64::NEG_INFINITY, lam(0)),
        Sign::Minus => (lam(level - 1), lam(level)),
    }
}

fn trusted(e: f64, levels: usize, b: f64, threshold: f64) -> bool {
    (0..=levels).all(|q| (e - b * (2 * q + 1) as f64).abs() > threshold)
}

fn gap_counts(eigs: &[f64], levels: usize, b: f64, threshold: f64) -> Vec<GapCount> {
    let mut out = Vec::with_capacity(2 * levels);
    for q in 0..levels {
        for side in [Sign::Minus, Sign::Plus] {
            let (lo, hi) = window(q, side, b);
            let inside: Vec<f64> = eigs.iter().copied().filter(|&e| e > lo && e < hi).collect();
            let count = inside.iter().filter(|&&e| trusted(e, levels, b, threshold)).count();
            out.push(GapCount {
                level: q,
                side,
                lower: lo.is_finite().then_some(lo),
                upper: hi,
                count,
                untrusted: inside.len() - count,
            });
        }
    }
    out
}

/// Full Hermitian eigendecomposition with clustering and gap counts.
pub fn eig_hermitian(t: &TruncatedOperator) -> Result<SpectrumReport> {
    let scale = t.max_abs();
    let defect = t.hermitian_defect();
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian { defect });
    }
    let mut eigs: Vec<f64> = if t.dim() == 0 {
        Vec::new()
    } else {
        let h = (&t.entries + t.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().collect()
    };
    eigs.sort_by(|a, b| a.total_cmp(b));
    let norm = eigs.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let tol = 1e-10 * norm;
    let mut clusters: Vec<Cluster> = Vec::new();
    for &e in &eigs {
        match clusters.last_mut() {
            Some(c) if (e - c.value).abs() <= tol => {
                c.value += (e - c.value) / (c.multiplicity + 1) as f64;
                c.multiplicity += 1;
            }
            _ => clusters.push(Cluster {
                value: e,
                multiplicity: 1,
            }),
        }
    }
    let mut provenance = t.provenance.clone();
    let (threshold, gaps) = match t.basis {
        Basis::Landau { levels, b, .. } => {
            let threshold = (10.0 * provenance.edge_coupling).max(1e-9 * norm);
            let gaps = gap_counts(&eigs, levels, b, threshold);
            let untrusted: usize = gaps.iter().map(|g| g.untrusted).sum();
            if untrusted > 0 {
                provenance.warnings.push(format!(
                    "{untrusted} eigenvalues within {threshold:.3e} of a Landau level are not counted; \
                     the truncation may be too small"
                ));
            }
            (threshold, gaps)
        }
        Basis::Hermite { .. } => (0.0, Vec::new()),
    };
    Ok(SpectrumReport {
        eigenvalues: eigs,
        clusters,
        gap_counts: gaps,
        trust_threshold: threshold,
        truncation: t.basis,
        provenance,
    })
}

/// Symbol with prescribed gap eigenvalues, and the eigenvalues it should produce.
#[derive(Debug, Clone)]
pub struct Np51 {
    pub symbol: Symbol4D,
    /// `(q, k, Λ_q - C_{k,q})`.
    pub predicted: Vec<(usize, usize, f64)>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `𝒱 = (2π)² Σ_q Σ_{k<m_q} c1_q c2_k (Ψ_q ⊗ Ψ_k) ∘ κ_b⁻¹`.
pub fn construct_np51(b: f64, m: &[usize], c1: &[f64], c2: &[f64]) -> Result<Np51> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("field strength b = {b} must be positive")));
    }
    let levels: Vec<usize> = (0..m.len()).filter(|&q| m[q] > 0).collect();
    if levels.is_empty() {
        return Ok(Np51 {
            symbol: Symbol4D::zero(b),
            predicted: Vec::new(),
        });
    }
    if c1.len() < m.len() {
        return Err(Error::InvalidConstruction(format!(
            "{} level constants for {} levels",
            c1.len(),
            m.len()
        )));
    }
    let used: Vec<f64> = levels.iter().map(|&q| c1[q]).collect();
    if !strictly_decreasing(&used) {
        return Err(Error::InvalidConstruction("level constants must decrease".into()));
    }
    for &q in &levels {
        let c = c1[q];
        if !(c > 0.0) || (q > 0 && c >= 2.0 * b) {
            return Err(Error::InvalidConstruction(format!("level constant {c} at q = {q} outside (0, 2b)")));
        }
    }
    let depth = *m.iter().max().expect("nonempty");
    if c2.len() < depth {
        return Err(Error::InvalidConstruction(format!(
            "{} index constants for multiplicity {depth}",
            c2.len()
        )));
    }
    if !strictly_decreasing(&c2[..depth]) || c2[..depth].iter().any(|&c| !(c > 0.0 && c < 1.0)) {
        return Err(Error::InvalidConstruction("index constants must decrease inside (0, 1)".into()));
    }
    let mut terms = Vec::new();
    let mut predicted = Vec::new();
    for &q in &levels {
        for k in 0..m[q] {
            let c = c1[q] * c2[k];
            terms.push(SeparableTerm {
                coeff: 4.0 * PI * PI * c,
                first: Symbol2D::radial(RadialProfile::wigner_diag(q)),
                second: Symbol2D::radial(RadialProfile::wigner_diag(k)),
            });
            predicted.push((q, k, b * (2 * q + 1) as f64 - c));
        }
    }
    Ok(Np51 {
        symbol: Symbol4D::separable(b, terms, Frame::Lab),
        predicted,
    })
}

/// The perturbation built from a weight `ζ` so that the compression to level `q`
/// is unitarily equivalent to `p_r ζ p_r`.
#[derive(Debug, Clone)]
pub struct BirmanFixture {
    pub symbol: Symbol4D,
    pub zeta: RadialProfile,
    pub q: usize,
    pub r: usize,
    pub b: f64,
}

/// `ω = 𝒟_{b,r}ζ`, `ṽ` its rescaling, `v = ṽ ∗ 𝒢₁`, `𝒱 = 2π(Ψ_q ⊗ v) ∘ κ_b⁻¹`.
pub fn birman_fixture(zeta: &RadialProfile, b: f64, q: usize, r: usize) -> Result<BirmanFixture> {
    let omega = apply_d_br(&Symbol2D::radial(zeta.clone()), b, r)?;
    let vt = vtilde_from_omega(&omega, b)?;
    let v = antiwick_to_weyl(&vt);
    let symbol = Symbol4D::separable(
        b,
        vec![SeparableTerm {
            coeff: 2.0 * PI,
            first: Symbol2D::radial(RadialProfile::wigner_diag(q)),
            second: v,
        }],
        Frame::Lab,
    );
    Ok(BirmanFixture {
        symbol,
        zeta: zeta.clone(),
        q,
        r,
        b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichSide {
    pub sign: Sign,
    /// `±(λ_k - Λ_q)`, non-increasing.
    pub shifts: Vec<f64>,
    /// Smallest admissible `ε` for each shift `k₀ = 0, 1, ...`; infinite when none.
    pub eps_by_k0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub nu: Vec<f64>,
    pub k_range: (usize, usize),
    pub sides: Vec<SandwichSide>,
    /// Smallest `k₀` for which both sides hold with the requested `ε`.
    pub k0: Option<usize>,
    pub eps: f64,
    pub holds: bool,
}

/// Checks `ν_{k+k₀}/(1+ε) ≤ ±(λ_k^± - Λ_q) ≤ ν_{k-k₀}/(1-ε)` over `k_range`.
pub fn birman_sandwich_check(
    fixture: &BirmanFixture,
    eps: f64,
    radial: usize,
    k_range: (usize, usize),
    k0_max: usize,
) -> Result<SandwichReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} outside (0, 1)")));
    }
    let (k_lo, k_hi) = k_range;
    let nu_all = toeplitz_radial_eigs(&fixture.zeta, fixture.r, fixture.b, radial)?.nu;
    let mut nu: Vec<f64> = nu_all.into_iter().filter(|&v| v > 0.0).collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    let levels = fixture.q + 2;
    let lambda_q = fixture.b * (2 * fixture.q + 1) as f64;
    let mut sides = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let op = assemble_hv(&fixture.symbol, levels, radial, sign)?;
        let report = eig_hermitian(&op)?;
        let mut shifts: Vec<f64> = report
            .window_eigenvalues(fixture.q, sign)
            .into_iter()
            .map(|e| sign.factor() * (e - lambda_q))
            .collect();
        shifts.sort_by(|a, b| b.total_cmp(a));
        sides.push(SandwichSide {
            sign,
            shifts,
            eps_by_k0: Vec::new(),
        });
    }
    let vacuous = nu.is_empty() && sides.iter().all(|s| s.shifts.is_empty());
    if vacuous {
        return Ok(SandwichReport {
            nu,
            k_range,
            sides,
            k0: Some(0),
            eps,
            holds: true,
        });
    }
    for side in &mut sides {
        for k0 in 0..=k0_max {
            if k_lo < k0 || k_hi + k0 >= nu.len() || k_hi >= side.shifts.len() {
                if k_hi >= side.shifts.len() || k_hi + k0 >= nu.len() {
                    return Err(Error::Unresolved(format!(
                        "index {} needs more than the {} resolved eigenvalues at truncation {radial}",
                        k_hi + k0,
                        side.shifts.len().min(nu.len())
                    )));
                }
                side.eps_by_k0.push(f64::INFINITY);
                continue;
            }
            let mut need: f64 = 0.0;
            for k in k_lo..=k_hi {
                let lam = side.shifts[k];
                need = need
                    .max(nu[k + k0] / lam - 1.0)
                    .max(1.0 - nu[k - k0] / lam);
            }
            side.eps_by_k0.push(need.max(0.0));
        }
    }
    let k0 = (0..=k0_max).find(|&j| sides.iter().all(|s| s.eps_by_k0[j] <= eps));
    Ok(SandwichReport {
        nu,
        k_range,
        sides,
        k0,
        eps,
        holds: k0.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::DecayClass;
    use crate::special::{hermite_fns, ln_gamma_p};

    fn gaussian_symbol(a: f64) -> Symbol2D {
        Symbol2D::radial(RadialProfile::gaussian(a))
    }

    #[test]
    fn rank_one_and_constant() {
        let p = Symbol2D::radial(RadialProfile::wigner_diag(0).scaled(2.0 * PI));
        let m = weyl_matrix_with(&p, 12, &WeylOptions { order: None, check_convergence: true }).unwrap();
        for k in 0..12 {
            for l in 0..12 {
                let expect = if k == 0 && l == 0 { 1.0 } else { 0.0 };
                assert!((m.get(k, l) - expect).norm() < 1e-12, "{k} {l}");
            }
        }
        let c = Symbol2D::radial(RadialProfile::constant(2.5));
        let m = weyl_matrix(&c, 16).unwrap();
        for k in 0..16 {
            for l in 0..16 {
                let expect = if k == l { 2.5 } else { 0.0 };
                assert!((m.get(k, l) - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn matrix_elements_match_hermite_oracle() {
        // v(x, ξ) = g(ξ) is the Fourier multiplier g(D); with ψ̂_k = (-i)^k ψ_k,
        // ⟨g(D)ψ_ℓ, ψ_k⟩ = i^{k-ℓ} ∫ g ψ_k ψ_ℓ.
        let v = Symbol2D::generic("xi-gauss", DecayClass::Bounded, None, |_, xi| xi * (-xi * xi).exp());
        let n = 6;
        let m = weyl_matrix(&v, n).unwrap();
        let rule = gauss_hermite(120).unwrap();
        for k in 0..n {
            for l in 0..n {
                let integral: f64 = rule
                    .nodes()
                    .iter()
                    .zip(rule.scaled_weights())
                    .map(|(&x, &w)| {
                        let h = hermite_fns(n, x);
                        w * x * (-x * x).exp() * h[k] * h[l]
                    })
                    .sum();
                let phase = i_power(k as i64 - l as i64);
                assert!((m.get(k, l) - phase * integral).norm() < 1e-12, "{k} {l} {} {integral}", m.get(k, l));
            }
        }
    }

    #[test]
    fn radial_eigs_examples() {
        let g1 = RadialProfile::gaussian(1.0).scaled(1.0 / PI);
        let mu = weyl_radial_eigs(&g1, 20);
        assert!((mu[0] - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!(mu[1..].iter().all(|m| m.abs() < 1e-10));
        let c = weyl_radial_eigs(&RadialProfile::constant(1.7), 40);
        assert!(c.iter().all(|m| (m - 1.7).abs() < 1e-12));
        let a = 0.1;
        let diag = weyl_matrix(&gaussian_symbol(a), 33).unwrap();
        let mu = weyl_radial_eigs(&RadialProfile::gaussian(a), 33);
        for k in 0..33 {
            let exact = ((1.0 - a) / (1.0 + a)).powi(k as i32) / (1.0 + a);
            assert!((mu[k] - exact).abs() < 1e-12 * exact.abs() + 1e-14, "{k} {} {exact}", mu[k]);
            assert!((diag.get(k, k).re - mu[k]).abs() < 1e-8 * mu[k].abs(), "{k} {} {}", diag.get(k, k), mu[k]);
        }
        // The composite path agrees with the closed form.
        let composite = laguerre_function_moments(|t| (-0.5 * a * t).exp(), None, &[], 33);
        for k in 0..33 {
            let m = if k % 2 == 0 { 0.5 } else { -0.5 } * composite[k];
            assert!((m - mu[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn fourier_path_gaussian() {
        // Profile of e^{-a s} transformed with (2π)^{-1}∫e^{-iw·z}: (1/(2a)) e^{-s/(4a)}.
        for a in [0.2, 1.0, 2.5] {
            let mu = weyl_radial_eigs(&RadialProfile::gaussian(a), 24);
            let hat = RadialProfile::gaussian(1.0 / (4.0 * a)).scaled(1.0 / (2.0 * a));
            let muf = weyl_radial_eigs_fourier(&hat, 24);
            for k in 0..24 {
                assert!((mu[k] - muf[k]).abs() < 1e-12);
            }
        }
        let zero = RadialProfile::gaussian(1.0).scaled(0.0);
        assert!(weyl_radial_eigs_fourier(&zero, 5).iter().all(|&m| m == 0.0));
    }

    #[test]
    fn antiwick_examples() {
        let mu = antiwick_radial_eigs(&RadialProfile::gaussian(1.0), 30).unwrap();
        for (k, m) in mu.iter().enumerate() {
            let exact = 3f64.powi(-(k as i32 + 1));
            assert!((m - exact).abs() < 1e-12 * exact);
        }
        let c = antiwick_radial_eigs(&RadialProfile::constant(0.7), 20).unwrap();
        assert!(c.iter().all(|m| (m - 0.7).abs() < 1e-13));
        let a = 0.05;
        let aw = antiwick_radial_eigs(&RadialProfile::gaussian(a), 65).unwrap();
        let w = weyl_radial_eigs(&RadialProfile::gaussian(a).smoothed(), 65);
        for k in 0..65 {
            assert!((aw[k] - w[k]).abs() < 1e-8 * aw[k]);
        }
    }

    #[test]
    fn toeplitz_examples() {
        let (gamma, b) = (0.7, 2.0);
        let mu = 2.0 * gamma / b;
        let t = toeplitz_radial_eigs(&RadialProfile::exp_beta(gamma, 1.0), 0, b, 201).unwrap();
        for k in 0..201 {
            let exact = -((k + 1) as f64) * (1.0 + mu).ln();
            assert!((t.ln_nu[k] - exact).abs() < 1e-10 * exact.abs().max(1.0));
        }
        let d = toeplitz_radial_eigs(&RadialProfile::disk(1.0), 0, 2.0, 401).unwrap();
        assert!((d.nu[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        for k in 0..401 {
            let exact = ln_gamma_p(k as f64 + 1.0, 1.0);
            assert!((d.ln_nu[k] - exact).abs() < 1e-10 * exact.abs().max(1.0), "{k}");
        }
        let c = toeplitz_radial_eigs(&RadialProfile::constant(1.3), 3, 1.5, 12).unwrap();
        assert!(c.nu.iter().all(|v| (v - 1.3).abs() < 1e-12));
    }

    #[test]
    fn toeplitz_against_explicit_basis() {
        // ⟨ζφ_{k,q}, φ_{k,q}⟩ with φ_{k,q} from its explicit Laguerre form, by 2-D quadrature.
        let (a, b, q) = (0.4, 1.5, 2);
        let zeta = RadialProfile::gaussian(a);
        let t = toeplitz_radial_eigs(&zeta, q, b, 16).unwrap();
        let rule = gauss_legendre(40).unwrap();
        let edges = quadrature::uniform_edges(0.0, 12.0, 60);
        for k in 0..16 {
            let phi_sq = |x: f64| {
                // |φ_{k,q}|² at radius x, s = b x²/2.
                let s = b * x * x / 2.0;
                let coef = b / (2.0 * PI);
                let val = if k >= q {
                    let m = (k - q) as f64;
                    (log_factorial(q as u64) - log_factorial(k as u64)).exp()
                        * s.powf(m)
                        * crate::special::laguerre(q, m, s).powi(2)
                } else {
                    let m = (q - k) as f64;
                    (log_factorial(k as u64) - log_factorial(q as u64)).exp()
                        * s.powf(m)
                        * crate::special::laguerre(k, m, s).powi(2)
                };
                coef * val * (-s).exp()
            };
            let v = quadrature::integrate_panels(
                |x| 2.0 * PI * x * zeta.eval(x * x) * phi_sq(x),
                &edges,
                &rule,
            );
            let norm = quadrature::integrate_panels(|x| 2.0 * PI * x * phi_sq(x), &edges, &rule);
            assert!((norm - 1.0).abs() < 1e-10);
            assert!((t.nu[k] - v).abs() < 1e-7 * v, "{k}: {} vs {v}", t.nu[k]);
        }
    }

    #[test]
    fn d_br_identity() {
        for b in [1.0, 2.0] {
            let zeta = RadialProfile::gaussian(0.6);
            let d = apply_d_br(&Symbol2D::radial(zeta.clone()), b, 1).unwrap();
            let lhs = toeplitz_radial_eigs(d.as_radial().unwrap(), 0, b, 21).unwrap();
            let rhs = toeplitz_radial_eigs(&zeta, 1, b, 21).unwrap();
            for k in 0..21 {
                assert!((lhs.nu[k] - rhs.nu[k]).abs() < 1e-7 * rhs.nu[k].abs(), "{b} {k}");
            }
        }
    }

    #[test]
    fn positivity_examples() {
        let g = positivity_laguerre_weyl(&RadialProfile::gaussian(1.0).scaled(1.0 / PI), 10);
        assert_eq!(g.verdict, PositivityVerdict::AllNonneg);
        let flip = RadialProfile::wigner_diag(1).scaled(-2.0 * PI);
        let r = positivity_laguerre_weyl(&flip, 10);
        assert_eq!(r.verdict, PositivityVerdict::FirstNegative { index: 1 });
        assert!((r.coefficients[1] + 2.0).abs() < 1e-12);
        let smoothed = antiwick_to_weyl(&Symbol2D::radial(RadialProfile::disk(1.3)));
        let rep = positivity_laguerre_weyl(smoothed.as_radial().unwrap(), 12);
        assert_eq!(rep.verdict, PositivityVerdict::AllNonneg);
        let line = RadialProfile::poly_gaussian(vec![1.0, -1.0], 0.0);
        let rep = positivity_laguerre_antiwick(&line, 6).unwrap();
        assert_eq!(rep.verdict, PositivityVerdict::FirstNegative { index: 0 });
        for (k, c) in rep.coefficients.iter().enumerate() {
            assert!((c - (1.0 - 2.0 * (k as f64 + 1.0))).abs() < 1e-10);
        }
        let rep = positivity_laguerre_antiwick(&RadialProfile::gaussian(1.0), 8).unwrap();
        assert_eq!(rep.verdict, PositivityVerdict::AllNonneg);
    }

    #[test]
    fn bandedness() {
        let radial = gaussian_symbol(0.5);
        let (inside, outside) = banded_structure_check(&radial, 16).unwrap();
        assert!(outside < 1e-9 * inside);
        let cos1 = Symbol2D::AngularFourier(vec![crate::symbol::AngularMode {
            m: 1,
            cos: Some(RadialProfile::gaussian(0.5)),
            sin: None,
        }]);
        let (inside, outside) = banded_structure_check(&cos1, 16).unwrap();
        assert!(outside < 1e-9 * inside && inside > 1e-3);
    }

    #[test]
    fn hilbert_schmidt() {
        let p = Symbol2D::radial(RadialProfile::wigner_diag(0).scaled(2.0 * PI));
        let (m, s) = hilbert_schmidt_check(&p, 16).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12, "{m} {s}");
        let g = gaussian_symbol(0.5);
        let (m, s) = hilbert_schmidt_check(&g, 64).unwrap();
        assert!((s - 0.5 / 1.0).abs() < 1e-12); // π/(2a) / (2π) = 1/(4a)
        assert!((m - s).abs() < 1e-6 && m <= s + 1e-12);
        let zero = Symbol2D::zero();
        assert_eq!(hilbert_schmidt_check(&zero, 4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn eig_examples() {
        let id = TruncatedOperator {
            basis: Basis::Hermite { n: 3 },
            entries: DMatrix::identity(3, 3),
            provenance: Provenance::default(),
        };
        let r = eig_hermitian(&id).unwrap();
        assert_eq!(r.clusters, vec![Cluster { value: 1.0, multiplicity: 3 }]);
        let x = TruncatedOperator {
            basis: Basis::Hermite { n: 2 },
            entries: DMatrix::from_row_slice(
                2,
                2,
                &[Complex64::default(), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::default()],
            ),
            provenance: Provenance::default(),
        };
        let r = eig_hermitian(&x).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-15 && (r.eigenvalues[1] - 1.0).abs() < 1e-15);
        let mut bad = x.clone();
        bad.entries[(0, 1)] = Complex64::new(2.0, 0.0);
        assert!(matches!(eig_hermitian(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_perturbation_gives_landau_levels() {
        let b = 1.5;
        let op = assemble_hv(&Symbol4D::zero(b), 3, 5, Sign::Plus).unwrap();
        let r = eig_hermitian(&op).unwrap();
        assert_eq!(r.clusters.len(), 3);
        for (q, c) in r.clusters.iter().enumerate() {
            assert_eq!(c.multiplicity, 5);
            assert_eq!(c.value, b * (2 * q + 1) as f64);
        }
        assert!(r.gap_counts.iter().all(|g| g.count == 0));
        assert_eq!(r.recount(), r.gap_counts);
    }

    #[test]
    fn np51_fixture() {
        let b = 1.0;
        let f = construct_np51(b, &[2, 0, 1], &[0.8, 0.5, 0.3], &[0.5, 0.25]).unwrap();
        let op = assemble_hv(&f.symbol.scaled(-1.0), 4, 6, Sign::Plus).unwrap();
        let r = eig_hermitian(&op).unwrap();
        let counts: Vec<usize> = (0..4).map(|q| r.count(q, Sign::Minus).unwrap()).collect();
        assert_eq!(counts, vec![2, 0, 1, 0]);
        for &(_, _, e) in &f.predicted {
            assert!(r.eigenvalues.iter().any(|&x| (x - e).abs() < 1e-10));
        }
        let single = construct_np51(2.0, &[1], &[2.0], &[0.5]).unwrap();
        assert_eq!(single.predicted, vec![(0, 0, 1.0)]);
        assert!(construct_np51(1.0, &[0, 0], &[0.5, 0.4], &[]).unwrap().symbol.is_zero());
        assert!(construct_np51(1.0, &[1, 1], &[0.5, 0.6], &[0.5]).is_err());
        assert!(construct_np51(1.0, &[0, 1], &[0.5, 2.5], &[0.5]).is_err());
    }

    #[test]
    fn separable_block_is_weyl_matrix() {
        let b = 1.3;
        let q0 = 1;
        let v = Symbol2D::AngularFourier(vec![crate::symbol::AngularMode {
            m: 1,
            cos: Some(RadialProfile::gaussian(0.4)),
            sin: None,
        }]);
        let sym = Symbol4D::separable(
            b,
            vec![SeparableTerm {
                coeff: 2.0 * PI,
                first: Symbol2D::radial(RadialProfile::wigner_diag(q0)),
                second: v.clone(),
            }],
            Frame::Lab,
        );
        let k = 6;
        let m = coupling_matrix(&sym, 3, k, &AssemblyOptions::default()).unwrap();
        let w = weyl_matrix(&v, k).unwrap();
        for q in 0..3 {
            for r in 0..3 {
                for i in 0..k {
                    for j in 0..k {
                        let e = m.get(q * k + i, r * k + j);
                        if q == q0 && r == q0 {
                            let expect = i_power(i as i64 - j as i64) * w.get(i, j);
                            assert!((e - expect).norm() < 1e-12);
                        } else {
                            assert!(e.norm() < 1e-9);
                        }
                    }
                }
            }
        }
        // Phases do not move the spectrum.
        let with = eig_hermitian(&assemble_hv(&sym, 3, k, Sign::Plus).unwrap()).unwrap();
        let opts = AssemblyOptions { phases: false, ..Default::default() };
        let without = eig_hermitian(&assemble_hv_with(&sym, 3, k, Sign::Plus, &opts).unwrap()).unwrap();
        for (a, c) in with.eigenvalues.iter().zip(&without.eigenvalues) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_path_matches_separable() {
        let b = 1.0;
        let sep = Symbol4D::separable(
            b,
            vec![SeparableTerm {
                coeff: 1.0,
                first: gaussian_symbol(0.6),
                second: Symbol2D::generic("x-gauss", DecayClass::Schwartz, Some(0.5), |y, eta| {
                    y * (-0.5 * (y * y + eta * eta)).exp()
                }),
            }],
            Frame::Lab,
        );
        let lab = sep.clone();
        let generic = Symbol4D::generic(b, "same", Some(0.5), move |p| lab.eval_lab(p));
        let (levels, radial) = (3, 4);
        let a = coupling_matrix(&sep, levels, radial, &AssemblyOptions::default()).unwrap();
        let g = coupling_matrix(&generic, levels, radial, &AssemblyOptions::default()).unwrap();
        let diff = (&a.entries - &g.entries).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-9, "{diff}");
        assert!(coupling_matrix(&generic, 7, 7, &AssemblyOptions::default()).is_err());
    }

    #[test]
    fn birman_sandwich() {
        let fixture = birman_fixture(&RadialProfile::gaussian(0.25), 1.0, 0, 0).unwrap();
        let rep = birman_sandwich_check(&fixture, 0.2, 64, (5, 30), 2).unwrap();
        assert!(rep.holds, "{:?}", rep.sides.iter().map(|s| &s.eps_by_k0).collect::<Vec<_>>());
        let zero = BirmanFixture {
            symbol: Symbol4D::zero(1.0),
            zeta: RadialProfile::gaussian(1.0).scaled(0.0),
            q: 0,
            r: 0,
            b: 1.0,
        };
        assert!(birman_sandwich_check(&zero, 0.2, 16, (5, 10), 2).unwrap().holds);
    }

    #[test]
    fn long_laguerre_mix_eigenvalues() {
        // ⟨Ψ_j, Ψ_k⟩ = δ_{jk}/(2π), so the k-th coefficient over 2.
        let coeffs: Vec<f64> = (0..40).map(|j| 0.9f64.powi(j)).collect();
        let p = RadialProfile::laguerre_mix(coeffs.clone());
        let mu = weyl_radial_eigs(&p, 40);
        for k in 0..40 {
            assert!((mu[k] - coeffs[k] / 2.0).abs() < 1e-11 * coeffs[k], "{k}");
        }
        let (_, norm) = hilbert_schmidt_check(&Symbol2D::radial(p), 1).unwrap();
        let expect: f64 = coeffs.iter().map(|c| c * c / 4.0).sum();
        assert!((norm - expect).abs() < 1e-11 * expect);
    }
}
