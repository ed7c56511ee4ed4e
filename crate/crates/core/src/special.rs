//! Hermite and Laguerre families, log-factorials, Gaussians and the
//! regularized incomplete gamma function in log space.
//!
//! Everything that can overflow is carried as a mantissa together with a
//! natural-log scale factor, so that recurrences of degree ten thousand stay
//! finite.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Mantissas are renormalized whenever they exceed this magnitude.
const RESCALE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_606_8; // ln(1e150)

/// A real number stored as `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub value: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn to_f64(self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value * self.log_scale.exp()
        }
    }

    pub fn signum(self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value.signum()
        }
    }

    /// `ln |x|`, or negative infinity at an exact zero.
    pub fn ln_abs(self) -> f64 {
        if self.value == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.value.abs().ln() + self.log_scale
        }
    }
}

fn factorial_table() -> &'static [f64; 257] {
    static TABLE: OnceLock<[f64; 257]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 257];
        for n in 2..=256 {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// `ln(n!)`: exact cumulative sums up to 256, Stirling series above.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 256 {
        return factorial_table()[n as usize];
    }
    let x = n as f64 + 1.0;
    let x2 = x * x;
    let series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2);
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=257.0).contains(&x) {
        return log_factorial(x as u64 - 1);
    }
    statrs::function::gamma::ln_gamma(x)
}

/// `ln` of the generalized binomial coefficient `C(q + ν, q)` for `q + ν > -1`.
pub fn ln_binomial(top: f64, k: u64) -> f64 {
    ln_gamma(top + 1.0) - log_factorial(k) - ln_gamma(top - k as f64 + 1.0)
}

/// Physicists' Hermite polynomial `H_q(x)`.
pub fn hermite_poly(q: usize, x: f64) -> Result<f64> {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for n in 0..q {
        let next = 2.0 * x * cur - 2.0 * n as f64 * prev;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return Err(Error::Overflow {
                what: format!("H_{q}({x})"),
            });
        }
    }
    Ok(cur)
}

/// Values `ψ_0(x), …, ψ_{n_max}(x)` of the orthonormal Hermite functions.
pub fn hermite_fns(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur * factor);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
            factor = log_scale.exp();
        }
        out.push(cur * factor);
    }
    out
}

/// Orthonormal Hermite function `ψ_q(x) = H_q(x) e^{-x²/2} / (√π 2^q q!)^{1/2}`.
pub fn hermite_fn(q: usize, x: f64) -> f64 {
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    for n in 0..q {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
    }
    Scaled {
        value: cur,
        log_scale,
    }
    .to_f64()
}

/// Generalized Laguerre polynomial `L_q^{(ν)}(ξ)`.
pub fn laguerre(q: usize, nu: f64, xi: f64) -> f64 {
    laguerre_scaled(q, nu, xi, 0.0).to_f64()
}

/// `L_q^{(ν)}(ξ) e^{-ξ/2}`, finite for large degree and argument.
pub fn laguerre_weighted(q: usize, nu: f64, xi: f64) -> f64 {
    laguerre_scaled(q, nu, xi, -0.5 * xi).to_f64()
}

/// `L_q^{(ν)}(ξ) · exp(log_weight)` kept in scaled form.
pub fn laguerre_scaled(q: usize, nu: f64, xi: f64, log_weight: f64) -> Scaled {
    let mut log_scale = log_weight;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..q {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + nu - xi) * cur - (kf + nu) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
    }
    Scaled {
        value: cur,
        log_scale,
    }
}

/// Weighted Laguerre values `L_k(t) e^{-t/2}` for `k = 0..n`, written into `out`.
pub fn laguerre_weighted_all(t: f64, out: &mut [f64]) {
    let mut log_scale = -0.5 * t;
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            let kf = (k - 1) as f64;
            let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                prev /= RESCALE;
                log_scale += LN_RESCALE;
                factor = log_scale.exp();
            }
        }
        *slot = cur * factor;
    }
}

/// Normalized Gaussian `𝒢_n(w) = π^{-n} e^{-|w|²}` with `w ∈ R^{2n}`.
pub fn gaussian_g(n: usize, w: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), 2 * n);
    let r2: f64 = w.iter().map(|v| v * v).sum();
    (-r2 - n as f64 * PI.ln()).exp()
}

/// Exponentially scaled modified Bessel function `e^{-x} I_0(x)` for `x ≥ 0`.
///
/// Uses the trapezoid rule on `(1/π)∫_0^π e^{x(cos θ - 1)} dθ`, which converges
/// geometrically for periodic analytic integrands.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    let n = 24 + (10.0 * x.sqrt()).ceil() as usize;
    let h = PI / n as f64;
    let mut sum = 0.5 * (1.0 + (-2.0 * x).exp());
    for j in 1..n {
        sum += (x * ((j as f64 * h).cos() - 1.0)).exp();
    }
    sum / n as f64
}

/// `ln P(a, x)`, the log of the regularized lower incomplete gamma function.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        ln_gamma_series(a, x)
    } else {
        let q = ln_gamma_cf(a, x).exp();
        (-q).ln_1p()
    }
}

/// `ln Q(a, x) = ln(1 - P(a, x))`.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        let p = ln_gamma_series(a, x).exp();
        (-p).ln_1p()
    } else {
        ln_gamma_cf(a, x)
    }
}

fn ln_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum.ln() - x + a * x.ln() - ln_gamma(a)
}

fn ln_gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h.ln() - x + a * x.ln() - ln_gamma(a)
}
