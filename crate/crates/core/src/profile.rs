//! Radial profiles `ℛ(s)` of rotation-invariant phase-space symbols, where
//! `s = x² + ξ²`.

use serde::{Deserialize, Serialize};

use crate::quadrature::{composite_nodes, gauss_legendre};
use crate::special::{bessel_i0_scaled, laguerre_weighted_all, log_factorial};

fn one() -> f64 {
    1.0
}

/// A profile `amplitude · shape(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(flatten)]
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `1`
    Constant,
    /// `e^{-a s}`
    Gaussian { a: f64 },
    /// `(1 + s)^{-γ/2}`
    Power { gamma: f64 },
    /// `𝟙_{[0, c]}(s)`, the indicator of the disk of radius `√c`.
    DiskIndicator { c: f64 },
    /// `e^{-γ s^β}`
    ExpBeta { gamma: f64, beta: f64 },
    /// `Σ c_k (-1)^k L_k(2s) e^{-s}`
    LaguerreMix { coeffs: Vec<f64> },
    /// `Σ p_j s^j e^{-rate·s}`
    PolyGaussian { coeffs: Vec<f64>, rate: f64 },
    /// Piecewise-linear interpolation, constant beyond the grid ends.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    /// `inner(factor · s)`
    Dilated { inner: Box<RadialProfile>, factor: f64 },
    /// Radial profile of `inner ∗ 𝒢₁`, evaluated by quadrature.
    Smoothed { inner: Box<RadialProfile> },
    /// Pointwise sum.
    Sum { parts: Vec<RadialProfile> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    Schwartz,
    Power { gamma: f64 },
    Compact,
    Bounded,
}

impl DecayClass {
    /// The slower of two decay classes.
    pub fn weakest(self, other: DecayClass) -> DecayClass {
        use DecayClass::*;
        match (self, other) {
            (Bounded, _) | (_, Bounded) => Bounded,
            (Power { gamma: a }, Power { gamma: b }) => Power { gamma: a.min(b) },
            (Power { gamma }, _) | (_, Power { gamma }) => Power { gamma },
            (Schwartz, _) | (_, Schwartz) => Schwartz,
            (Compact, Compact) => Compact,
        }
    }
}

impl RadialProfile {
    pub fn new(shape: Shape) -> Self {
        RadialProfile {
            amplitude: 1.0,
            shape,
        }
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile::new(Shape::Constant).scaled(c)
    }

    pub fn gaussian(a: f64) -> Self {
        RadialProfile::new(Shape::Gaussian { a })
    }

    pub fn power(gamma: f64) -> Self {
        RadialProfile::new(Shape::Power { gamma })
    }

    /// Indicator of `{s ≤ c}`.
    pub fn disk_indicator(c: f64) -> Self {
        RadialProfile::new(Shape::DiskIndicator { c })
    }

    /// Indicator of the disk of the given radius.
    pub fn disk(radius: f64) -> Self {
        RadialProfile::disk_indicator(radius * radius)
    }

    pub fn exp_beta(gamma: f64, beta: f64) -> Self {
        RadialProfile::new(Shape::ExpBeta { gamma, beta })
    }

    pub fn laguerre_mix(coeffs: Vec<f64>) -> Self {
        RadialProfile::new(Shape::LaguerreMix { coeffs })
    }

    pub fn poly_gaussian(coeffs: Vec<f64>, rate: f64) -> Self {
        RadialProfile::new(Shape::PolyGaussian { coeffs, rate })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Self {
        RadialProfile::new(Shape::Tabulated { grid, values })
    }

    /// Profile of the diagonal Wigner kernel `Ψ_k`.
    pub fn wigner_diag(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = std::f64::consts::FRAC_1_PI;
        RadialProfile::laguerre_mix(coeffs)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.amplitude *= factor;
        self
    }

    pub fn sum(parts: Vec<RadialProfile>) -> Self {
        RadialProfile::new(Shape::Sum { parts })
    }

    /// Profile of `(2π)^{-1} ∫ e^{-iw·z} ℛ(|z|²) dz` as a function of `|w|²`,
    /// for the families with a closed-form transform.
    pub fn fourier_hat(&self) -> Option<RadialProfile> {
        let amp = self.amplitude;
        match &self.shape {
            Shape::Gaussian { a } if *a > 0.0 => {
                Some(RadialProfile::gaussian(1.0 / (4.0 * a)).scaled(amp / (2.0 * a)))
            }
            Shape::LaguerreMix { coeffs } => {
                let c = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 0 { 0.5 * c } else { -0.5 * c })
                    .collect();
                Some(RadialProfile::laguerre_mix(c).dilated(0.25).scaled(amp))
            }
            Shape::Sum { parts } => {
                let hats = parts.iter().map(|p| p.fourier_hat()).collect::<Option<Vec<_>>>()?;
                Some(RadialProfile::sum(hats).scaled(amp))
            }
            _ => None,
        }
    }

    /// `s ↦ self(factor · s)`, in closed form where the family allows it.
    pub fn dilated(&self, factor: f64) -> Self {
        let amplitude = self.amplitude;
        let shape = match &self.shape {
            Shape::Constant => Shape::Constant,
            Shape::Gaussian { a } => Shape::Gaussian { a: a * factor },
            Shape::DiskIndicator { c } => Shape::DiskIndicator { c: c / factor },
            Shape::ExpBeta { gamma, beta } => Shape::ExpBeta {
                gamma: gamma * factor.powf(*beta),
                beta: *beta,
            },
            Shape::PolyGaussian { coeffs, rate } => Shape::PolyGaussian {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, p)| p * factor.powi(j as i32))
                    .collect(),
                rate: rate * factor,
            },
            Shape::Sum { parts } => Shape::Sum {
                parts: parts.iter().map(|p| p.dilated(factor)).collect(),
            },
            Shape::Dilated { inner, factor: f0 } => Shape::Dilated {
                inner: inner.clone(),
                factor: f0 * factor,
            },
            _ => Shape::Dilated {
                inner: Box::new(RadialProfile {
                    amplitude: 1.0,
                    shape: self.shape.clone(),
                }),
                factor,
            },
        };
        RadialProfile { amplitude, shape }
    }

    /// Radial profile of the Gaussian smoothing `self ∗ 𝒢₁`. Gaussians and
    /// constants are handled in closed form, everything else lazily by
    /// quadrature.
    pub fn smoothed(&self) -> Self {
        match &self.shape {
            Shape::Constant => self.clone(),
            Shape::Gaussian { a } => RadialProfile::gaussian(a / (1.0 + a)).scaled(self.amplitude / (1.0 + a)),
            Shape::ExpBeta { gamma, beta } if *beta == 1.0 => {
                RadialProfile::gaussian(*gamma).scaled(self.amplitude).smoothed()
            }
            Shape::PolyGaussian { coeffs, rate } if coeffs.len() == 1 => {
                if *rate == 0.0 {
                    RadialProfile::constant(self.amplitude * coeffs[0])
                } else {
                    RadialProfile::gaussian(*rate).scaled(self.amplitude * coeffs[0]).smoothed()
                }
            }
            Shape::Sum { parts } => RadialProfile::sum(parts.iter().map(|p| p.smoothed()).collect())
                .scaled(self.amplitude),
            _ => RadialProfile::new(Shape::Smoothed {
                inner: Box::new(self.clone()),
            }),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = self.amplitude;
        if a == 0.0 {
            return 0.0;
        }
        let v = match &self.shape {
            Shape::Constant => 1.0,
            Shape::Gaussian { a } => (-a * s).exp(),
            Shape::Power { gamma } => (1.0 + s).powf(-0.5 * gamma),
            Shape::DiskIndicator { c } => {
                if s <= *c {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::ExpBeta { gamma, beta } => (-gamma * s.powf(*beta)).exp(),
            Shape::LaguerreMix { coeffs } => {
                let mut buf = vec![0.0; coeffs.len()];
                laguerre_weighted_all(2.0 * s, &mut buf);
                coeffs
                    .iter()
                    .zip(&buf)
                    .enumerate()
                    .map(|(k, (c, l))| if k % 2 == 0 { c * l } else { -c * l })
                    .sum()
            }
            Shape::PolyGaussian { coeffs, rate } => {
                horner(coeffs, s) * (-rate * s).exp()
            }
            Shape::Tabulated { grid, values } => interpolate(grid, values, s),
            Shape::Dilated { inner, factor } => inner.eval(factor * s),
            Shape::Smoothed { inner } => smoothed_eval(inner, s),
            Shape::Sum { parts } => parts.iter().map(|p| p.eval(s)).sum(),
        };
        a * v
    }

    /// `(sign, ln |ℛ(s)|)`, exact in log space for the exponential families.
    pub fn ln_abs(&self, s: f64) -> (f64, f64) {
        let amp = self.amplitude;
        if amp == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        let (sign, ln) = match &self.shape {
            Shape::Gaussian { a } => (1.0, -a * s),
            Shape::ExpBeta { gamma, beta } => (1.0, -gamma * s.powf(*beta)),
            Shape::Power { gamma } => (1.0, -0.5 * gamma * s.ln_1p()),
            Shape::PolyGaussian { coeffs, rate } => {
                let p = horner(coeffs, s);
                (sign_of(p), p.abs().ln() - rate * s)
            }
            Shape::Dilated { inner, factor } => inner.ln_abs(factor * s),
            _ => {
                let v = self.eval(s) / amp;
                (sign_of(v), v.abs().ln())
            }
        };
        (sign * amp.signum(), ln + amp.abs().ln())
    }

    /// End of the support in `s` when it is compact.
    pub fn support(&self) -> Option<f64> {
        if self.amplitude == 0.0 {
            return Some(0.0);
        }
        match &self.shape {
            Shape::DiskIndicator { c } => Some(*c),
            Shape::Dilated { inner, factor } => inner.support().map(|c| c / factor),
            Shape::Sum { parts } => parts
                .iter()
                .map(|p| p.support())
                .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s))),
            _ => None,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support().is_some()
    }

    /// Points in `s` where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.shape {
            Shape::DiskIndicator { c } => vec![*c],
            Shape::Tabulated { grid, .. } => grid.clone(),
            Shape::Dilated { inner, factor } => {
                inner.breakpoints().into_iter().map(|b| b / factor).collect()
            }
            Shape::Sum { parts } => parts.iter().flat_map(|p| p.breakpoints()).collect(),
            Shape::ExpBeta { beta, .. } if beta.fract() != 0.0 => vec![0.0],
            _ => Vec::new(),
        };
        out.retain(|b| b.is_finite() && *b >= 0.0);
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup();
        out
    }

    /// Representation `Σ p_j s^j e^{-rate·s}` when one exists in closed form.
    pub fn poly_exp(&self) -> Option<(Vec<f64>, f64)> {
        let amp = self.amplitude;
        let (coeffs, rate) = match &self.shape {
            Shape::Constant => (vec![1.0], 0.0),
            Shape::Gaussian { a } => (vec![1.0], *a),
            Shape::ExpBeta { gamma, beta } if *beta == 1.0 => (vec![1.0], *gamma),
            Shape::PolyGaussian { coeffs, rate } => (coeffs.clone(), *rate),
            Shape::LaguerreMix { coeffs } => (laguerre_mix_poly(coeffs), 1.0),
            Shape::Dilated { inner, factor } => {
                let (p, r) = inner.poly_exp()?;
                let p = p
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * factor.powi(j as i32))
                    .collect();
                (p, r * factor)
            }
            Shape::Sum { parts } => {
                let mut acc: Option<(Vec<f64>, f64)> = None;
                for part in parts {
                    let (p, r) = part.poly_exp()?;
                    acc = Some(match acc {
                        None => (p, r),
                        Some((q, r0)) => {
                            if r0 != r {
                                return None;
                            }
                            (poly_add(&q, &p), r)
                        }
                    });
                }
                acc.unwrap_or((vec![0.0], 0.0))
            }
            _ => return None,
        };
        Some((coeffs.into_iter().map(|c| c * amp).collect(), rate))
    }

    pub fn decay_class(&self) -> DecayClass {
        match &self.shape {
            Shape::Constant | Shape::Tabulated { .. } => DecayClass::Bounded,
            Shape::Power { gamma } => DecayClass::Power { gamma: *gamma },
            Shape::DiskIndicator { .. } => DecayClass::Compact,
            Shape::PolyGaussian { rate, .. } if *rate <= 0.0 => DecayClass::Bounded,
            Shape::Gaussian { .. }
            | Shape::ExpBeta { .. }
            | Shape::LaguerreMix { .. }
            | Shape::PolyGaussian { .. } => DecayClass::Schwartz,
            Shape::Dilated { inner, .. } => inner.decay_class(),
            Shape::Smoothed { inner } => match inner.decay_class() {
                DecayClass::Compact => DecayClass::Schwartz,
                other => other,
            },
            Shape::Sum { parts } => parts
                .iter()
                .map(|p| p.decay_class())
                .reduce(DecayClass::weakest)
                .unwrap_or(DecayClass::Compact),
        }
    }

    /// Rate `a` of a Gaussian envelope `e^{-a s}` dominating the profile, if known.
    pub fn envelope_rate(&self) -> Option<f64> {
        match &self.shape {
            Shape::Gaussian { a } => Some(*a),
            Shape::ExpBeta { gamma, beta } if *beta == 1.0 => Some(*gamma),
            Shape::LaguerreMix { .. } => Some(1.0),
            Shape::PolyGaussian { rate, .. } => Some(*rate),
            Shape::Dilated { inner, factor } => inner.envelope_rate().map(|a| a * factor),
            Shape::Smoothed { inner } => inner.envelope_rate().map(|a| a / (1.0 + a)),
            Shape::Sum { parts } => parts
                .iter()
                .map(|p| p.envelope_rate())
                .try_fold(f64::INFINITY, |acc, r| r.map(|r| acc.min(r))),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        let body = match &self.shape {
            Shape::Constant => "constant".to_string(),
            Shape::Gaussian { a } => format!("gaussian(a={a})"),
            Shape::Power { gamma } => format!("power(gamma={gamma})"),
            Shape::DiskIndicator { c } => format!("disk_indicator(c={c})"),
            Shape::ExpBeta { gamma, beta } => format!("exp_beta(gamma={gamma},beta={beta})"),
            Shape::LaguerreMix { coeffs } => format!("laguerre_mix({coeffs:?})"),
            Shape::PolyGaussian { coeffs, rate } => format!("poly_gaussian({coeffs:?},rate={rate})"),
            Shape::Tabulated { grid, .. } => format!("tabulated({} points)", grid.len()),
            Shape::Dilated { inner, factor } => format!("dilated({}, {factor})", inner.describe()),
            Shape::Smoothed { inner } => format!("smoothed({})", inner.describe()),
            Shape::Sum { parts } => format!(
                "sum({})",
                parts.iter().map(|p| p.describe()).collect::<Vec<_>>().join(", ")
            ),
        };
        if self.amplitude == 1.0 {
            body
        } else {
            format!("{}*{body}", self.amplitude)
        }
    }
}

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

pub(crate) fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Coefficients of `Σ_k c_k (-1)^k L_k(2s)` as a polynomial in `s`.
fn laguerre_mix_poly(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut out = vec![0.0; n.max(1)];
    for (k, c) in coeffs.iter().enumerate() {
        let sk = if k % 2 == 0 { *c } else { -*c };
        for (i, slot) in out.iter_mut().enumerate().take(k + 1) {
            let ln_binom = log_factorial(k as u64) - log_factorial(i as u64) - log_factorial((k - i) as u64);
            let mag = (ln_binom - log_factorial(i as u64)).exp() * 2f64.powi(i as i32);
            let term = if i % 2 == 0 { mag } else { -mag };
            *slot += sk * term;
        }
    }
    out
}

fn interpolate(grid: &[f64], values: &[f64], s: f64) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    if s <= grid[0] {
        return values[0];
    }
    let last = grid.len() - 1;
    if s >= grid[last] {
        return values[last];
    }
    let i = grid.partition_point(|g| *g <= s) - 1;
    let t = (s - grid[i]) / (grid[i + 1] - grid[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// `(ℛ ∗ 𝒢₁)` at squared radius `s`:
/// `2 ∫_0^∞ ℛ(ρ²) ρ e^{-(r-ρ)²} e^{-2rρ} I₀(2rρ) dρ` with `r = √s`.
fn smoothed_eval(inner: &RadialProfile, s: f64) -> f64 {
    const HALF_WIDTH: f64 = 9.0;
    let r = s.max(0.0).sqrt();
    let lo = (r - HALF_WIDTH).max(0.0);
    let hi = r + HALF_WIDTH;
    let mut edges: Vec<f64> = Vec::new();
    let panels = ((hi - lo) / 0.5).ceil() as usize;
    for i in 0..=panels {
        edges.push(lo + (hi - lo) * i as f64 / panels as f64);
    }
    for b in inner.breakpoints() {
        let rb = b.sqrt();
        if rb > lo && rb < hi {
            edges.push(rb);
        }
    }
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let rule = gauss_legendre(16).expect("valid order");
    composite_nodes(&edges, &rule)
        .into_iter()
        .map(|(rho, w)| {
            let d = r - rho;
            w * 2.0 * inner.eval(rho * rho) * rho * (-d * d).exp() * bessel_i0_scaled(2.0 * r * rho)
        })
        .sum()
}
