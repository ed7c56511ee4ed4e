//! Wigner kernels `Ψ_{k,ℓ} = W(ψ_k, ψ_ℓ)` of Hermite-function pairs, their
//! Husimi smoothing, and brute-force quadrature oracles.
//!
//! Pairings are linear in the first argument and conjugate-linear in the
//! second throughout the crate.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::quadrature::{self, integrate_r1, integrate_r2_with, Axis, QuadratureRule};
use crate::special::{laguerre, log_factorial};

pub const DEFAULT_WIGNER_ORDER: usize = 120;

/// `Q_n^{(m)}(z) = √(n!/(n+m)!) z^{m/2} L_n^{(m)}(z) e^{-z/2}`, which is bounded by 1.
pub fn laguerre_normalized(n: usize, m: usize, z: f64) -> f64 {
    let mut out = [0.0; 1];
    laguerre_normalized_run(m, z, n, |j, v| {
        if j == n {
            out[0] = v;
        }
    });
    out[0]
}

/// Runs the normalized recurrence in `n` for fixed `m`, calling `sink(n, Q_n)`
/// for `n = 0..=n_max`.
pub fn laguerre_normalized_run(m: usize, z: f64, n_max: usize, mut sink: impl FnMut(usize, f64)) {
    const BIG: f64 = 1e150;
    if m > 0 && z == 0.0 {
        for n in 0..=n_max {
            sink(n, 0.0);
        }
        return;
    }
    let mf = m as f64;
    let mut log_scale = -0.5 * z - 0.5 * log_factorial(m as u64);
    if m > 0 {
        log_scale += 0.5 * mf * z.ln();
    }
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    sink(0, cur * factor);
    for j in 0..n_max {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + mf - z) * cur - (jf * (jf + mf)).sqrt() * prev)
            / ((jf + 1.0) * (jf + mf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
            factor = log_scale.exp();
        }
        sink(j + 1, cur * factor);
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Real radial factor `Φ_{k,ℓ}(r)` with `Ψ_{k,ℓ}(r cos θ, r sin θ) = e^{-i(k-ℓ)θ} Φ_{k,ℓ}(r)`.
pub fn wigner_radial(k: usize, l: usize, r: f64) -> f64 {
    let n = k.min(l);
    let m = k.abs_diff(l);
    FRAC_1_PI * sign(n) * laguerre_normalized(n, m, 2.0 * r * r)
}

/// `Ψ_{k,ℓ}(x, ξ) = W(ψ_k, ψ_ℓ)(x, ξ)` from the closed Laguerre form
/// `(1/π)(-1)^ℓ 2^{(k-ℓ)/2} √(ℓ!/k!) (x - iξ)^{k-ℓ} L_ℓ^{(k-ℓ)}(2s) e^{-s}` for `k ≥ ℓ`
/// and its conjugate with indices swapped for `k < ℓ`.
pub fn wigner_eval(k: usize, l: usize, x: f64, xi: f64) -> Complex64 {
    let r = x.hypot(xi);
    let magnitude = wigner_radial(k, l, r);
    if k == l {
        return Complex64::new(magnitude, 0.0);
    }
    let theta = xi.atan2(x);
    let phase = (l as f64 - k as f64) * theta;
    Complex64::from_polar(1.0, phase) * magnitude
}

/// Diagonal kernel `Ψ_k = (1/π)(-1)^k L_k(2s) e^{-s}` with `s = x² + ξ²`.
pub fn wigner_diag(k: usize, x: f64, xi: f64) -> f64 {
    wigner_radial(k, k, x.hypot(xi))
}

/// All kernels `Ψ_{k,ℓ}(x, ξ)` for `k, ℓ < n`, row-major into `out[k*n + ℓ]`.
pub fn wigner_table(n: usize, x: f64, xi: f64, out: &mut [Complex64]) {
    assert_eq!(out.len(), n * n);
    let r2 = x * x + xi * xi;
    let z = 2.0 * r2;
    let theta = xi.atan2(x);
    for m in 0..n {
        let rot = Complex64::from_polar(FRAC_1_PI, -(m as f64) * theta);
        laguerre_normalized_run(m, z, n - 1 - m, |j, q| {
            let upper = rot * (sign(j) * q);
            out[(j + m) * n + j] = upper;
            out[j * n + j + m] = upper.conj();
        });
    }
}

/// Brute-force Wigner transform
/// `(2π)^{-1} ∫ e^{i x' ξ} u(x - x'/2) conj(v(x + x'/2)) dx'`.
pub fn wigner_numeric<U, V>(u: U, v: V, x: f64, xi: f64) -> Complex64
where
    U: Fn(f64) -> Complex64,
    V: Fn(f64) -> Complex64,
{
    let rule = quadrature::gauss_hermite(DEFAULT_WIGNER_ORDER).expect("valid order");
    wigner_numeric_with(u, v, x, xi, &rule)
}

pub fn wigner_numeric_with<U, V>(u: U, v: V, x: f64, xi: f64, rule: &QuadratureRule) -> Complex64
where
    U: Fn(f64) -> Complex64,
    V: Fn(f64) -> Complex64,
{
    let integral: Complex64 = integrate_r1(
        |t| Complex64::from_polar(1.0, t * xi) * u(x - t / 2.0) * v(x + t / 2.0).conj(),
        rule,
        Axis::scaled(2.0),
    );
    integral / (2.0 * PI)
}

/// Husimi function `(𝒢₁ ∗ Ψ_k)(x, ξ) = (2π k!)^{-1} (s/2)^k e^{-s/2}`.
pub fn husimi_diag(k: usize, x: f64, xi: f64) -> f64 {
    let s = x * x + xi * xi;
    if s == 0.0 {
        return if k == 0 { 1.0 / (2.0 * PI) } else { 0.0 };
    }
    (k as f64 * (s / 2.0).ln() - s / 2.0 - log_factorial(k as u64) - (2.0 * PI).ln()).exp()
}

/// Numeric convolution `∫ 𝒢₁(w - w') Ψ_k(w') dw'`.
pub fn husimi_numeric(k: usize, x: f64, xi: f64, order: usize) -> f64 {
    let rule = quadrature::gauss_hermite(order).expect("valid order");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let axes = [
        Axis {
            center: x / 2.0,
            scale,
        },
        Axis {
            center: xi / 2.0,
            scale,
        },
    ];
    integrate_r2_with(
        |a, b| {
            let d2 = (x - a).powi(2) + (xi - b).powi(2);
            let s = a * a + b * b;
            FRAC_1_PI * FRAC_1_PI * sign(k) * laguerre(k, 0.0, 2.0 * s) * (-d2 - s).exp()
        },
        &rule,
        axes,
    )
}

/// Unitary Fourier transform of `Ψ_k` at `w` by quadrature, paired with the
/// closed form `((-1)^k / 2) Ψ_k(w/2)`.
pub fn wigner_fourier_check(k: usize, w: [f64; 2]) -> (f64, f64) {
    let order = (2 * k + 40).max(80);
    let rule = quadrature::gauss_hermite(order).expect("valid order");
    let lhs: Complex64 = integrate_r2_with(
        |a, b| Complex64::from_polar(1.0, -(w[0] * a + w[1] * b)) * wigner_diag(k, a, b),
        &rule,
        [Axis::default(); 2],
    );
    let rhs = sign(k) * 0.5 * wigner_diag(k, w[0] / 2.0, w[1] / 2.0);
    (lhs.re / (2.0 * PI), rhs)
}

/// `⟨Ψ_{k,ℓ}, Ψ_{k',ℓ'}⟩_{L²(R²)}` by quadrature.
pub fn moyal_inner(a: (usize, usize), b: (usize, usize), order: usize) -> Complex64 {
    let rule = quadrature::gauss_hermite(order).expect("valid order");
    let axis = Axis::scaled(std::f64::consts::FRAC_1_SQRT_2);
    integrate_r2_with(
        |x, xi| wigner_eval(a.0, a.1, x, xi) * wigner_eval(b.0, b.1, x, xi).conj(),
        &rule,
        [axis; 2],
    )
}
