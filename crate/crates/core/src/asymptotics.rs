//! Eigenvalue asymptotics near a Landau level: closed-form predictors, the
//! coefficients of the implicit-equation expansions, and residual statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::ln_binomial;
use crate::symbol::{phase_space_volume, Sign, Symbol2D};

/// `-k ln k + (1 + ln(b·cap²/2)) k`.
pub fn predict_compact(k: f64, b: f64, cap: f64) -> f64 {
    -k * k.ln() + (1.0 + (b * cap * cap / 2.0).ln()) * k
}

/// `μ = γ (2/b)^β`.
pub fn mu_from_weight(gamma: f64, beta: f64, b: f64) -> f64 {
    gamma * (2.0 / b).powf(beta)
}

/// Newton iteration for a root `w > -1` of a relative offset, starting from 0.
fn newton_offset(what: &str, h: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    let mut w = 0.0f64;
    for _ in 0..100 {
        let (v, d) = h(w);
        if !(d != 0.0) || !v.is_finite() {
            break;
        }
        let mut next = w - v / d;
        if next <= -1.0 {
            next = 0.5 * (w - 1.0);
        }
        if (next - w).abs() <= 1e-16 * (1.0 + w.abs()) {
            return Ok(next);
        }
        w = next;
    }
    let (v, _) = h(w);
    if v.abs() < 1e-14 {
        return Ok(w);
    }
    Err(Error::NewtonFailed(what.to_string()))
}

/// `w` with `s_<(ε) = 1 + w`: `w = -εβμ (1+w)^β`.
fn w_small(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    newton_offset("s = 1 - εβμ s^β", |w| {
        let p = (beta * w.ln_1p()).exp();
        (w + eps * beta * mu * p, 1.0 + eps * beta * beta * mu * p / (1.0 + w))
    })
}

/// `w` with `s_>(ε) = s₀(1 + w)`, `s₀ = (βμ)^{-1/β}`: `(1+w)^β - 1 + εs₀(1+w) = 0`.
fn w_large(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    let s0 = (beta * mu).powf(-1.0 / beta);
    newton_offset("βμ s^β = 1 - ε s", |w| {
        let l = w.ln_1p();
        ((beta * l).exp_m1() + eps * s0 * (1.0 + w), beta * (beta * l).exp() / (1.0 + w) + eps * s0)
    })
}

/// `s_<(ε)` solving `s = 1 - εβμ s^β`.
pub fn s_small(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    Ok(1.0 + w_small(eps, beta, mu)?)
}

/// `s_>(ε)` solving `βμ s^β = 1 - ε s`.
pub fn s_large(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    Ok((beta * mu).powf(-1.0 / beta) * (1.0 + w_large(eps, beta, mu)?))
}

/// `f(ε) - f(0)`, evaluated without cancellation against the constant.
fn f_shifted(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    let w = w_small(eps, beta, mu)?;
    Ok((w - w.ln_1p()) + eps * mu * (beta * w.ln_1p()).exp())
}

/// `g(ε) - g(0)`, evaluated without cancellation against the constant.
fn g_shifted(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    let s0 = (beta * mu).powf(-1.0 / beta);
    let w = w_large(eps, beta, mu)?;
    let l = w.ln_1p();
    Ok((beta * l).exp_m1() / beta - l + eps * s0 * (1.0 + w))
}

/// `f(ε) = F(s_<(ε); ε)` with `F(s; ε) = s - ln s + εμ s^β`.
pub fn f_implicit(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    Ok(1.0 + f_shifted(eps, beta, mu)?)
}

/// `g(ε) = G(s_>(ε); ε)` with `G(s; ε) = μ s^β - ln s + ε s`.
pub fn g_implicit(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    let s0 = (beta * mu).powf(-1.0 / beta);
    Ok(1.0 / beta - s0.ln() + g_shifted(eps, beta, mu)?)
}

/// Steps of the central differences before extrapolation.
pub const STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// `j`-th Taylor coefficient at 0 from central differences at `steps`
/// (each half the previous), Richardson-extrapolated in `h²`.
pub fn taylor_coefficient(f: &impl Fn(f64) -> Result<f64>, j: usize, steps: &[f64]) -> Result<f64> {
    let mut table = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut d = 0.0;
        for i in 0..=j {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let c = ln_binomial(j as f64, i as u64).exp();
            d += sign * c * f((j as f64 / 2.0 - i as f64) * h)?;
        }
        table.push(d / h.powi(j as i32));
    }
    let mut level = 1;
    while table.len() > 1 {
        let factor = 4f64.powi(level);
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        level += 1;
    }
    let fact: f64 = (1..=j).map(|v| v as f64).product();
    Ok(table[0] / fact)
}

/// Indices `1 ≤ j < bound` as a count, for a bound that may be infinite.
fn index_count(bound: f64) -> usize {
    if !bound.is_finite() {
        return usize::MAX;
    }
    let c = (bound - 1e-9 * bound).ceil() as usize;
    c.saturating_sub(1)
}

/// `f_j` for `1 ≤ j < 1/(1-β)`.
pub fn coeffs_f(beta: f64, mu: f64) -> Result<Vec<f64>> {
    coeffs_f_with(beta, mu, &STEPS)
}

pub fn coeffs_f_with(beta: f64, mu: f64, steps: &[f64]) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta < 1.0) || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < β < 1 and μ > 0, got ({beta}, {mu})")));
    }
    let n = index_count(1.0 / (1.0 - beta));
    if n > 12 {
        return Err(Error::InvalidParameter(format!("β = {beta} needs {n} coefficients")));
    }
    let f = |e: f64| f_shifted(e, beta, mu);
    (1..=n).map(|j| taylor_coefficient(&f, j, steps)).collect()
}

/// `g_j` for `1 ≤ j < β/(β-1)`.
pub fn coeffs_g(beta: f64, mu: f64) -> Result<Vec<f64>> {
    coeffs_g_with(beta, mu, &STEPS)
}

pub fn coeffs_g_with(beta: f64, mu: f64, steps: &[f64]) -> Result<Vec<f64>> {
    if !(beta > 1.0) || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("need β > 1 and μ > 0, got ({beta}, {mu})")));
    }
    let n = index_count(beta / (beta - 1.0));
    if n > 12 {
        return Err(Error::InvalidParameter(format!("β = {beta} needs {n} coefficients")));
    }
    let g = |e: f64| g_shifted(e, beta, mu);
    (1..=n).map(|j| taylor_coefficient(&g, j, steps)).collect()
}

/// Model of `ln ν_k` or of a counting function.
#[derive(Debug, Clone)]
pub enum AsymptoticModel {
    Compact { b: f64, capacity: f64 },
    ExpSmallBeta { beta: f64, mu: f64, coeffs: Vec<f64> },
    ExpBetaOne { mu: f64 },
    ExpLargeBeta { beta: f64, mu: f64, coeffs: Vec<f64> },
    Counting { symbol: Symbol2D, sign: Sign },
}

impl AsymptoticModel {
    /// Model for the weight `e^{-γ|x|^{2β}}` at field strength `b`.
    pub fn for_weight(gamma: f64, beta: f64, b: f64) -> Result<Self> {
        if !(gamma > 0.0 && beta > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!("need γ, β, b > 0, got ({gamma}, {beta}, {b})")));
        }
        let mu = mu_from_weight(gamma, beta, b);
        Ok(if beta < 1.0 {
            AsymptoticModel::ExpSmallBeta {
                beta,
                mu,
                coeffs: coeffs_f(beta, mu)?,
            }
        } else if beta == 1.0 {
            AsymptoticModel::ExpBetaOne { mu }
        } else {
            AsymptoticModel::ExpLargeBeta {
                beta,
                mu,
                coeffs: coeffs_g(beta, mu)?,
            }
        })
    }

    /// Predicted `ln ν_k`, or `𝔙₁^±(λ)` for the counting model with `x = λ`.
    pub fn predict(&self, x: f64) -> Result<f64> {
        Ok(match self {
            AsymptoticModel::Compact { b, capacity } => predict_compact(x, *b, *capacity),
            AsymptoticModel::ExpSmallBeta { beta, coeffs, .. } => -coeffs
                .iter()
                .enumerate()
                .map(|(i, f)| f * x.powf((beta - 1.0) * (i + 1) as f64 + 1.0))
                .sum::<f64>(),
            AsymptoticModel::ExpBetaOne { mu } => -(1.0 + mu).ln() * x,
            AsymptoticModel::ExpLargeBeta { beta, mu, coeffs } => {
                -((beta - 1.0) / beta) * x * x.ln() + ((beta - 1.0 - (mu * beta).ln()) / beta) * x
                    - coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, g)| g * x.powf((1.0 / beta - 1.0) * (i + 1) as f64 + 1.0))
                        .sum::<f64>()
            }
            AsymptoticModel::Counting { symbol, sign } => predict_counting(x, symbol, *sign)?,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            AsymptoticModel::Compact { b, capacity } => format!("compact(b={b}, capacity={capacity})"),
            AsymptoticModel::ExpSmallBeta { beta, mu, coeffs } => {
                format!("exp_small_beta(beta={beta}, mu={mu}, f={coeffs:?})")
            }
            AsymptoticModel::ExpBetaOne { mu } => format!("exp_beta_one(mu={mu})"),
            AsymptoticModel::ExpLargeBeta { beta, mu, coeffs } => {
                format!("exp_large_beta(beta={beta}, mu={mu}, g={coeffs:?})")
            }
            AsymptoticModel::Counting { symbol, sign } => format!("counting({}, {sign:?})", symbol.describe()),
        }
    }
}

/// Displayed terms of the exponential-weight asymptotics, by branch of `β`.
pub fn predict_exp(k: f64, beta: f64, mu: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("β = {beta} must be positive")));
    }
    let model = if beta < 1.0 {
        AsymptoticModel::ExpSmallBeta {
            beta,
            mu,
            coeffs: coeffs_f(beta, mu)?,
        }
    } else if beta == 1.0 {
        AsymptoticModel::ExpBetaOne { mu }
    } else {
        AsymptoticModel::ExpLargeBeta {
            beta,
            mu,
            coeffs: coeffs_g(beta, mu)?,
        }
    };
    model.predict(k)
}

/// `𝔙₁^±(λ; v)`.
pub fn predict_counting(lambda: f64, v: &Symbol2D, sign: Sign) -> Result<f64> {
    phase_space_volume(v, lambda, sign)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub ks: Vec<usize>,
    /// `ln ν_k - model(k)`.
    pub residuals: Vec<f64>,
    /// `max |r_k| / k` over the range.
    pub max_over_k: f64,
    /// `max |r_k| / ln k` over the range, ignoring `k < 2`.
    pub max_over_ln_k: f64,
}

impl ResidualReport {
    /// `(max |r_k|/k, max |r_k|/ln k)` restricted to `k ∈ [lo, hi]`.
    pub fn window(&self, lo: usize, hi: usize) -> (f64, f64) {
        stats(
            self.ks
                .iter()
                .zip(&self.residuals)
                .filter(|(&k, _)| k >= lo && k <= hi)
                .map(|(&k, &r)| (k, r)),
        )
    }
}

fn stats(items: impl Iterator<Item = (usize, f64)>) -> (f64, f64) {
    let mut over_k: f64 = 0.0;
    let mut over_ln: f64 = 0.0;
    for (k, r) in items {
        if k >= 1 {
            over_k = over_k.max(r.abs() / k as f64);
        }
        if k >= 2 {
            over_ln = over_ln.max(r.abs() / (k as f64).ln());
        }
    }
    (over_k, over_ln)
}

/// Residuals of `ln eigs[k]` against the model over `k ∈ [k_lo, k_hi]`.
pub fn compare_series(eigs: &[f64], model: &AsymptoticModel, k_range: (usize, usize)) -> Result<ResidualReport> {
    let (lo, hi) = k_range;
    for k in lo..=hi.min(eigs.len().saturating_sub(1)) {
        if !(eigs[k] > 0.0) {
            return Err(Error::NonPositiveEigenvalue { index: k });
        }
    }
    let logs: Vec<f64> = eigs.iter().map(|e| e.ln()).collect();
    compare_log_series(&logs, model, k_range)
}

/// As [`compare_series`] with eigenvalues given by their logarithms.
pub fn compare_log_series(ln_eigs: &[f64], model: &AsymptoticModel, k_range: (usize, usize)) -> Result<ResidualReport> {
    let (lo, hi) = k_range;
    let mut ks = Vec::new();
    let mut residuals = Vec::new();
    if lo <= hi {
        for k in lo..=hi.min(ln_eigs.len().saturating_sub(1)) {
            if !ln_eigs[k].is_finite() {
                return Err(Error::NonPositiveEigenvalue { index: k });
            }
            ks.push(k);
            residuals.push(ln_eigs[k] - model.predict(k as f64)?);
        }
    }
    let (max_over_k, max_over_ln_k) = stats(ks.iter().copied().zip(residuals.iter().copied()));
    Ok(ResidualReport {
        ks,
        residuals,
        max_over_k,
        max_over_ln_k,
    })
}

/// Dyadic windows `[lo, 2lo], [2lo, 4lo], ...` ending at or before `hi`.
pub fn dyadic_windows(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut a = lo.max(1);
    while 2 * a <= hi {
        out.push((a, 2 * a));
        a *= 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;

    #[test]
    fn compact_prediction() {
        for k in [2.0, 10.0, 100.0] {
            assert!((predict_compact(k, 2.0, 1.0) - (-k * k.ln() + k)).abs() < 1e-12 * k * k.ln());
            let d = predict_compact(k, 1.3, 2.0 * 0.7) - predict_compact(k, 1.3, 0.7);
            assert!((d - k * 4f64.ln()).abs() < 1e-12 * k);
        }
        let e = std::f64::consts::E;
        assert!(predict_compact(e, 2.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn implicit_equations_at_zero() {
        assert_eq!(s_small(0.0, 0.5, 2.0).unwrap(), 1.0);
        assert_eq!(f_implicit(0.0, 0.5, 2.0).unwrap(), 1.0);
        let s = s_large(0.0, 2.0, 3.0).unwrap();
        assert!((2.0 * 3.0 * s * s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_coefficients() {
        for &(beta, n) in &[(0.3, 1), (0.5, 1), (0.75, 3), (0.9, 9)] {
            for &mu in &[0.2, 1.0, 3.5] {
                let f = coeffs_f(beta, mu).unwrap();
                assert_eq!(f.len(), n);
                assert!((f[0] - mu).abs() < 1e-8, "{beta} {mu} {}", f[0]);
            }
        }
        assert_eq!(coeffs_f(0.5, 1.0).unwrap().len(), 1);
        for &beta in &[1.25, 1.5, 2.0, 3.0] {
            for &mu in &[0.2, 1.0, 3.5] {
                let g = coeffs_g(beta, mu).unwrap();
                let expect = (beta * mu).powf(-1.0 / beta);
                assert!((g[0] - expect).abs() < 1e-8 * expect);
            }
        }
        let g = coeffs_g(2.0, 1.0).unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0] - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn second_coefficient_matches_implicit_differentiation() {
        // For s = 1 - εβμ s^β: s'(0) = -βμ, and f''(0) = μβ s'(0) + (s'(0))² ... computed via
        // f'(ε) = μ s^β (envelope), so f''(0) = μβ s'(0) = -μ²β², f₂ = -μ²β²/2.
        let (beta, mu) = (0.75, 1.3);
        let f = coeffs_f(beta, mu).unwrap();
        assert_eq!(f.len(), 3);
        assert!((f[1] + mu * mu * beta * beta / 2.0).abs() < 1e-7);
    }

    fn gen_binomial(a: f64, n: usize) -> f64 {
        (0..n).map(|i| (a - i as f64) / (i + 1) as f64).product()
    }

    #[test]
    fn small_beta_coefficients_match_lagrange_inversion() {
        // f' = μ s^β, and with s = 1 + w, w = -εβμ(1+w)^β, Lagrange inversion gives
        // [ε^n] s^β = (β/n)(-βμ)^n C((n+1)β - 1, n - 1).
        for &(beta, mu) in &[(0.8, 0.9), (0.75, 1.3), (0.7, 0.4)] {
            let f = coeffs_f(beta, mu).unwrap();
            for (i, fj) in f.iter().enumerate() {
                let j = i + 1;
                let n = j - 1;
                let sb = if n == 0 {
                    1.0
                } else {
                    beta / n as f64 * (-beta * mu).powi(n as i32) * gen_binomial((n as f64 + 1.0) * beta - 1.0, n - 1)
                };
                let expect = mu * sb / j as f64;
                assert!((fj - expect).abs() < 1e-6 * expect.abs().max(1e-3), "{beta} {mu} {j}: {fj} vs {expect}");
            }
        }
    }

    #[test]
    fn large_beta_second_coefficient() {
        // g' = s_>, and differentiating βμ s^β = 1 - εs at 0 gives s'(0) = -s₀^{2-β}/(β²μ).
        for &(beta, mu) in &[(1.5, 1.0), (1.25, 0.6), (1.4, 2.2)] {
            let g = coeffs_g(beta, mu).unwrap();
            let s0 = (beta * mu).powf(-1.0 / beta);
            let expect = -s0.powf(2.0 - beta) / (beta * beta * mu) / 2.0;
            assert!(g.len() >= 2);
            assert!((g[1] - expect).abs() < 1e-7 * expect.abs(), "{} vs {expect}", g[1]);
        }
    }

    #[test]
    fn refinement_invariance() {
        let a = coeffs_f(0.8, 0.9).unwrap();
        let b = coeffs_f_with(0.8, 0.9, &[2e-2, 1e-2, 5e-3]).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-4 * x.abs());
        }
        let c = coeffs_f_with(0.8, 0.9, &STEPS).unwrap();
        assert!((a[0] - c[0]).abs() < 1e-8);
    }

    #[test]
    fn exponential_predictions() {
        let k = 50.0;
        assert!((predict_exp(k, 1.0, 1.0).unwrap() + k * 2f64.ln()).abs() < 1e-12);
        let mu = 1.7;
        assert!((predict_exp(k, 0.5, mu).unwrap() + mu * k.sqrt()).abs() < 1e-7 * k);
        let g1 = 0.5f64.sqrt();
        let expect = -0.5 * k * k.ln() + ((1.0 - 2f64.ln()) / 2.0) * k - g1 * k.sqrt();
        assert!((predict_exp(k, 2.0, 1.0).unwrap() - expect).abs() < 1e-7);
        assert!(predict_exp(k, 0.0, 1.0).is_err());
    }

    #[test]
    fn counting_prediction() {
        let v = Symbol2D::radial(RadialProfile::power(2.0));
        assert!((predict_counting(1e-2, &v, Sign::Plus).unwrap() - 49.5).abs() < 1e-8);
        assert_eq!(predict_counting(1.0, &v, Sign::Plus).unwrap(), 0.0);
        let a = predict_counting(1e-3, &v, Sign::Plus).unwrap();
        let b = predict_counting(2e-3, &v, Sign::Plus).unwrap();
        assert!(a > b);
    }

    #[test]
    fn residual_examples() {
        let mu: f64 = 0.8;
        let eigs: Vec<f64> = (0..60).map(|k| (1.0 + mu).powi(-(k + 1))).collect();
        let model = AsymptoticModel::ExpBetaOne { mu };
        let rep = compare_series(&eigs, &model, (2, 59)).unwrap();
        assert!(rep.residuals.iter().all(|r| (r + (1.0 + mu).ln()).abs() < 1e-12));
        let exact: Vec<f64> = (0..20).map(|k| model.predict(k as f64).unwrap().exp()).collect();
        let rep = compare_series(&exact, &model, (0, 19)).unwrap();
        assert!(rep.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(
            compare_series(&[1.0, 0.0], &model, (0, 1)),
            Err(Error::NonPositiveEigenvalue { index: 1 })
        ));
        assert!(compare_series(&eigs, &model, (5, 4)).unwrap().ks.is_empty());
        assert_eq!(dyadic_windows(25, 400), vec![(25, 50), (50, 100), (100, 200), (200, 400)]);
    }
}
