//! Phase-space symbols on R² and R⁴, the symplectic map `κ_b`, and the
//! transformations between them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::profile::{horner, poly_add, DecayClass, RadialProfile};
use crate::quadrature::{self, integrate_r2_with, Axis};
use crate::special::log_factorial;
use crate::wigner::wigner_diag;

pub type Eval2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Eval4 = Arc<dyn Fn([f64; 4]) -> f64 + Send + Sync>;

/// One angular mode `r^m (C(s) cos mθ + S(s) sin mθ)` of a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMode {
    pub m: u32,
    pub cos: Option<RadialProfile>,
    pub sin: Option<RadialProfile>,
}

/// A symbol given only by an evaluator.
#[derive(Clone)]
pub struct GenericSymbol {
    pub eval: Eval2,
    pub decay: DecayClass,
    /// Rate `a` of a Gaussian envelope `e^{-a s}` dominating the symbol.
    pub envelope: Option<f64>,
    pub label: String,
}

impl fmt::Debug for GenericSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericSymbol")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("envelope", &self.envelope)
            .finish()
    }
}

/// A real symbol on the phase plane `(x, ξ)`.
#[derive(Debug, Clone)]
pub enum Symbol2D {
    Radial(RadialProfile),
    AngularFourier(Vec<AngularMode>),
    Generic(GenericSymbol),
    Combination(Vec<(f64, Symbol2D)>),
}

impl Symbol2D {
    pub fn radial(profile: RadialProfile) -> Self {
        Symbol2D::Radial(profile)
    }

    pub fn zero() -> Self {
        Symbol2D::Combination(Vec::new())
    }

    pub fn generic<F>(label: &str, decay: DecayClass, envelope: Option<f64>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Symbol2D::Generic(GenericSymbol {
            eval: Arc::new(f),
            decay,
            envelope,
            label: label.to_string(),
        })
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        match self {
            Symbol2D::Radial(p) => p.eval(x * x + xi * xi),
            Symbol2D::AngularFourier(modes) => {
                let s = x * x + xi * xi;
                let r = s.sqrt();
                let theta = xi.atan2(x);
                modes
                    .iter()
                    .map(|mode| {
                        let m = mode.m as f64;
                        let rm = if mode.m == 0 { 1.0 } else { r.powi(mode.m as i32) };
                        let c = mode.cos.as_ref().map_or(0.0, |p| p.eval(s) * (m * theta).cos());
                        let sn = mode.sin.as_ref().map_or(0.0, |p| p.eval(s) * (m * theta).sin());
                        rm * (c + sn)
                    })
                    .sum()
            }
            Symbol2D::Generic(g) => (g.eval)(x, xi),
            Symbol2D::Combination(parts) => parts.iter().map(|(c, s)| c * s.eval(x, xi)).sum(),
        }
    }

    pub fn as_radial(&self) -> Option<&RadialProfile> {
        match self {
            Symbol2D::Radial(p) => Some(p),
            _ => None,
        }
    }

    /// Flattens to a radial profile when every part is radial.
    pub fn to_radial(&self) -> Option<RadialProfile> {
        match self {
            Symbol2D::Radial(p) => Some(p.clone()),
            Symbol2D::AngularFourier(modes) => {
                let mut parts = Vec::new();
                for mode in modes {
                    if mode.m != 0 {
                        return None;
                    }
                    parts.extend(mode.cos.clone());
                }
                Some(RadialProfile::sum(parts))
            }
            Symbol2D::Combination(parts) => {
                let profiles = parts
                    .iter()
                    .map(|(c, s)| s.to_radial().map(|p| p.scaled(*c)))
                    .collect::<Option<Vec<_>>>()?;
                Some(if profiles.len() == 1 {
                    profiles.into_iter().next().expect("one element")
                } else {
                    RadialProfile::sum(profiles)
                })
            }
            Symbol2D::Generic(_) => None,
        }
    }

    /// Largest angular frequency present, when known.
    pub fn angular_band(&self) -> Option<u32> {
        match self {
            Symbol2D::Radial(_) => Some(0),
            Symbol2D::AngularFourier(modes) => Some(modes.iter().map(|m| m.m).max().unwrap_or(0)),
            Symbol2D::Generic(_) => None,
            Symbol2D::Combination(parts) => parts
                .iter()
                .map(|(_, s)| s.angular_band())
                .try_fold(0, |acc, b| b.map(|b| acc.max(b))),
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            Symbol2D::Radial(p) => p.decay_class(),
            Symbol2D::AngularFourier(modes) => modes
                .iter()
                .flat_map(|m| m.cos.iter().chain(m.sin.iter()))
                .map(|p| p.decay_class())
                .reduce(DecayClass::weakest)
                .unwrap_or(DecayClass::Compact),
            Symbol2D::Generic(g) => g.decay,
            Symbol2D::Combination(parts) => parts
                .iter()
                .map(|(_, s)| s.decay_class())
                .reduce(DecayClass::weakest)
                .unwrap_or(DecayClass::Compact),
        }
    }

    /// Rate of a Gaussian envelope `e^{-a s}` bounding the symbol, if known.
    pub fn envelope_rate(&self) -> Option<f64> {
        let fold = |rates: Vec<Option<f64>>| {
            rates
                .into_iter()
                .try_fold(f64::INFINITY, |acc, r| r.map(|r| acc.min(r)))
        };
        match self {
            Symbol2D::Radial(p) => p.envelope_rate(),
            Symbol2D::AngularFourier(modes) => fold(
                modes
                    .iter()
                    .flat_map(|m| m.cos.iter().chain(m.sin.iter()))
                    .map(|p| p.envelope_rate())
                    .collect(),
            ),
            Symbol2D::Generic(g) => g.envelope,
            Symbol2D::Combination(parts) => fold(parts.iter().map(|(_, s)| s.envelope_rate()).collect()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Symbol2D {
        match self {
            Symbol2D::Radial(p) => Symbol2D::Radial(p.clone().scaled(factor)),
            other => Symbol2D::Combination(vec![(factor, other.clone())]),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Symbol2D::Radial(p) => format!("radial[{}]", p.describe()),
            Symbol2D::AngularFourier(modes) => format!(
                "angular_fourier[{}]",
                modes
                    .iter()
                    .map(|m| format!(
                        "m={}:cos={},sin={}",
                        m.m,
                        m.cos.as_ref().map_or("-".into(), |p| p.describe()),
                        m.sin.as_ref().map_or("-".into(), |p| p.describe())
                    ))
                    .collect::<Vec<_>>()
                    .join(";")
            ),
            Symbol2D::Generic(g) => format!("generic[{}]", g.label),
            Symbol2D::Combination(parts) => format!(
                "combination[{}]",
                parts
                    .iter()
                    .map(|(c, s)| format!("{c}*{}", s.describe()))
                    .collect::<Vec<_>>()
                    .join(" + ")
            ),
        }
    }

    /// Placement of a Gauss–Hermite rule matched to the symbol's envelope when
    /// paired against kernels decaying like `e^{-s}`.
    pub fn pairing_axes(&self) -> [Axis; 2] {
        let a = self.envelope_rate().unwrap_or(0.0).max(0.0);
        [Axis::scaled(1.0 / (1.0 + a).sqrt()); 2]
    }
}

/// Which composition the stored factors of a separable symbol represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// The symbol is `𝒱 = (Σ c A⊗B) ∘ κ_b⁻¹`.
    Lab,
    /// The stored sum is `𝒱_b = 𝒱 ∘ κ_b` itself.
    KappaPulled,
}

#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub coeff: f64,
    /// Factor in the first phase-space pair `(x, ξ)`.
    pub first: Symbol2D,
    /// Factor in the second phase-space pair `(y, η)`.
    pub second: Symbol2D,
}

#[derive(Clone)]
pub enum Structure4D {
    Separable {
        terms: Vec<SeparableTerm>,
        frame: Frame,
    },
    /// Evaluator of `𝒱` in lab coordinates `(x, y, ξ, η)`.
    Generic {
        eval: Eval4,
        envelope: Option<f64>,
        label: String,
    },
}

impl fmt::Debug for Structure4D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure4D::Separable { terms, frame } => f
                .debug_struct("Separable")
                .field("terms", terms)
                .field("frame", frame)
                .finish(),
            Structure4D::Generic { label, envelope, .. } => f
                .debug_struct("Generic")
                .field("label", label)
                .field("envelope", envelope)
                .finish(),
        }
    }
}

/// A real symbol on R⁴ with coordinates ordered `(x, y, ξ, η)`.
#[derive(Debug, Clone)]
pub struct Symbol4D {
    pub b: f64,
    pub structure: Structure4D,
}

impl Symbol4D {
    pub fn separable(b: f64, terms: Vec<SeparableTerm>, frame: Frame) -> Self {
        Symbol4D {
            b,
            structure: Structure4D::Separable { terms, frame },
        }
    }

    pub fn zero(b: f64) -> Self {
        Symbol4D::separable(b, Vec::new(), Frame::Lab)
    }

    pub fn generic<F>(b: f64, label: &str, envelope: Option<f64>, f: F) -> Self
    where
        F: Fn([f64; 4]) -> f64 + Send + Sync + 'static,
    {
        Symbol4D {
            b,
            structure: Structure4D::Generic {
                eval: Arc::new(f),
                envelope,
                label: label.to_string(),
            },
        }
    }

    /// `𝒱_b(p) = 𝒱(κ_b(p))`.
    pub fn eval_pulled(&self, p: [f64; 4]) -> f64 {
        match &self.structure {
            Structure4D::Separable { terms, .. } => terms
                .iter()
                .map(|t| t.coeff * t.first.eval(p[0], p[2]) * t.second.eval(p[1], p[3]))
                .sum(),
            Structure4D::Generic { eval, .. } => eval(kappa_apply_unchecked(self.b, p)),
        }
    }

    /// `𝒱(p)` in lab coordinates.
    pub fn eval_lab(&self, p: [f64; 4]) -> f64 {
        match &self.structure {
            Structure4D::Separable { .. } => self.eval_pulled(kappa_inverse_unchecked(self.b, p)),
            Structure4D::Generic { eval, .. } => eval(p),
        }
    }

    pub fn scaled(&self, factor: f64) -> Symbol4D {
        let structure = match &self.structure {
            Structure4D::Separable { terms, frame } => Structure4D::Separable {
                terms: terms
                    .iter()
                    .map(|t| SeparableTerm {
                        coeff: t.coeff * factor,
                        ..t.clone()
                    })
                    .collect(),
                frame: *frame,
            },
            Structure4D::Generic {
                eval,
                envelope,
                label,
            } => {
                let inner = eval.clone();
                Structure4D::Generic {
                    eval: Arc::new(move |p| factor * inner(p)),
                    envelope: *envelope,
                    label: format!("{factor}*{label}"),
                }
            }
        };
        Symbol4D { b: self.b, structure }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.structure, Structure4D::Separable { terms, .. } if terms.iter().all(|t| t.coeff == 0.0))
    }

    pub fn describe(&self) -> String {
        match &self.structure {
            Structure4D::Separable { terms, frame } => format!(
                "separable[b={}, frame={:?}, {}]",
                self.b,
                frame,
                terms
                    .iter()
                    .map(|t| format!("{}*({} ⊗ {})", t.coeff, t.first.describe(), t.second.describe()))
                    .collect::<Vec<_>>()
                    .join(" + ")
            ),
            Structure4D::Generic { label, .. } => format!("generic[b={}, {label}]", self.b),
        }
    }
}

fn check_field(b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("field strength b = {b} must be positive")));
    }
    Ok(())
}

/// The linear symplectic map `κ_b` on `(x, y, ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMapKappa {
    pub b: f64,
    pub matrix: [[f64; 4]; 4],
}

impl SymplecticMapKappa {
    pub fn new(b: f64) -> Result<Self> {
        check_field(b)?;
        let r = b.sqrt();
        let matrix = [
            [1.0 / r, 0.0, 0.0, -1.0 / r],
            [0.0, -1.0 / r, 1.0 / r, 0.0],
            [0.0, r / 2.0, r / 2.0, 0.0],
            [-r / 2.0, 0.0, 0.0, -r / 2.0],
        ];
        Ok(SymplecticMapKappa { b, matrix })
    }

    /// `max |MᵀJM - J|` for the standard form `J = [[0, I], [-I, 0]]`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = standard_form();
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                let mut v = 0.0;
                for i in 0..4 {
                    for k in 0..4 {
                        v += m[i][a] * j[i][k] * m[k][c];
                    }
                }
                worst = worst.max((v - j[a][c]).abs());
            }
        }
        worst
    }
}

fn standard_form() -> [[f64; 4]; 4] {
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
}

fn kappa_apply_unchecked(b: f64, p: [f64; 4]) -> [f64; 4] {
    let [x, y, xi, eta] = p;
    let r = b.sqrt();
    [(x - eta) / r, (xi - y) / r, r * (xi + y) / 2.0, -r * (eta + x) / 2.0]
}

fn kappa_inverse_unchecked(b: f64, q: [f64; 4]) -> [f64; 4] {
    let [cx, cy, cxi, ceta] = q;
    let r = b.sqrt();
    let x = (r * cx - 2.0 * ceta / r) / 2.0;
    let eta = (-2.0 * ceta / r - r * cx) / 2.0;
    let xi = (r * cy + 2.0 * cxi / r) / 2.0;
    let y = (2.0 * cxi / r - r * cy) / 2.0;
    [x, y, xi, eta]
}

/// `κ_b(x, y, ξ, η) = (b^{-1/2}(x-η), b^{-1/2}(ξ-y), (√b/2)(ξ+y), -(√b/2)(η+x))`.
pub fn kappa_apply(b: f64, p: [f64; 4]) -> Result<[f64; 4]> {
    check_field(b)?;
    Ok(kappa_apply_unchecked(b, p))
}

pub fn kappa_inverse(b: f64, p: [f64; 4]) -> Result<[f64; 4]> {
    check_field(b)?;
    Ok(kappa_inverse_unchecked(b, p))
}

/// Symbol of the Landau Hamiltonian, `(ξ + by/2)² + (η - bx/2)²`.
pub fn landau_symbol(b: f64, p: [f64; 4]) -> f64 {
    let [x, y, xi, eta] = p;
    (xi + b * y / 2.0).powi(2) + (eta - b * x / 2.0).powi(2)
}

/// `(ℋ₀(κ_b(p)), b(x² + ξ²))`.
pub fn landau_symbol_check(b: f64, p: [f64; 4]) -> Result<(f64, f64)> {
    let q = kappa_apply(b, p)?;
    Ok((landau_symbol(b, q), b * (p[0] * p[0] + p[2] * p[2])))
}

/// `∫ A(x, ξ) Ψ_q(x, ξ) dx dξ` by Gauss–Hermite quadrature.
pub fn pair_with_wigner_diag(a: &Symbol2D, q: usize, order: usize) -> Result<f64> {
    let rule = quadrature::gauss_hermite(order)?;
    Ok(integrate_r2_with(
        |x, xi| a.eval(x, xi) * wigner_diag(q, x, xi),
        &rule,
        a.pairing_axes(),
    ))
}

fn default_pair_order(q: usize) -> usize {
    (q + 48).max(quadrature::DEFAULT_ORDER_R2).min(quadrature::MAX_ORDER / 2)
}

/// Reduced symbol `v_{b,q}(y, η) = ∫ 𝒱_b(x, y, ξ, η) Ψ_q(x, ξ) dx dξ`.
pub fn reduce_vbq(v: &Symbol4D, q: usize) -> Result<Symbol2D> {
    reduce_vbq_with(v, q, default_pair_order(q))
}

pub fn reduce_vbq_with(v: &Symbol4D, q: usize, order: usize) -> Result<Symbol2D> {
    match &v.structure {
        Structure4D::Separable { terms, .. } => {
            let mut parts = Vec::with_capacity(terms.len());
            for t in terms {
                let c = pair_with_wigner_diag(&t.first, q, order)?;
                let c2 = pair_with_wigner_diag(&t.first, q, (2 * order).min(quadrature::MAX_ORDER))?;
                let discrepancy = (c - c2).abs();
                if discrepancy > 1e-8 * c2.abs().max(1e-3) {
                    return Err(Error::Accuracy {
                        what: format!("pairing of {} with Ψ_{q}", t.first.describe()),
                        discrepancy,
                    });
                }
                parts.push((t.coeff * c2, t.second.clone()));
            }
            Ok(Symbol2D::Combination(parts))
        }
        Structure4D::Generic { envelope, label, .. } => {
            let rule = quadrature::gauss_hermite(order)?;
            let a = envelope.unwrap_or(0.0).max(0.0);
            let axes = [Axis::scaled(1.0 / (1.0 + a).sqrt()); 2];
            let sym = v.clone();
            Ok(Symbol2D::generic(
                &format!("reduced[{label}, q={q}]"),
                DecayClass::Bounded,
                *envelope,
                move |y, eta| {
                    integrate_r2_with(
                        |x, xi| sym.eval_pulled([x, y, xi, eta]) * wigner_diag(q, x, xi),
                        &rule,
                        axes,
                    )
                },
            ))
        }
    }
}

/// Weyl symbol `F ∗ 𝒢₁` of the anti-Wick operator with symbol `F`.
pub fn antiwick_to_weyl(f: &Symbol2D) -> Symbol2D {
    match f {
        Symbol2D::Radial(p) => Symbol2D::Radial(p.smoothed()),
        Symbol2D::Combination(parts) => {
            Symbol2D::Combination(parts.iter().map(|(c, s)| (*c, antiwick_to_weyl(s))).collect())
        }
        other => {
            let rule = quadrature::gauss_hermite(48).expect("valid order");
            let inner = other.clone();
            let envelope = other.envelope_rate().map(|a| a / (1.0 + a));
            let decay = match other.decay_class() {
                DecayClass::Compact => DecayClass::Schwartz,
                d => d,
            };
            Symbol2D::generic(
                &format!("smoothed[{}]", other.describe()),
                decay,
                envelope,
                move |x, xi| {
                    integrate_r2_with(
                        |a, b| inner.eval(x - a, xi - b),
                        &rule,
                        [Axis::default(); 2],
                    ) / PI
                },
            )
        }
    }
}

/// `ω(x, y) = ṽ(-√b y, -√b x)`.
pub fn omega_from_vtilde(vt: &Symbol2D, b: f64) -> Result<Symbol2D> {
    check_field(b)?;
    Ok(match vt {
        Symbol2D::Radial(p) => Symbol2D::Radial(p.dilated(b)),
        Symbol2D::Combination(parts) => Symbol2D::Combination(
            parts
                .iter()
                .map(|(c, s)| omega_from_vtilde(s, b).map(|s| (*c, s)))
                .collect::<Result<_>>()?,
        ),
        other => {
            let inner = other.clone();
            let r = b.sqrt();
            Symbol2D::generic(
                &format!("omega[{}, b={b}]", other.describe()),
                other.decay_class(),
                other.envelope_rate().map(|a| a * b),
                move |x, y| inner.eval(-r * y, -r * x),
            )
        }
    })
}

/// Inverse of [`omega_from_vtilde`]: `ṽ(x, y) = ω(-y/√b, -x/√b)`.
pub fn vtilde_from_omega(omega: &Symbol2D, b: f64) -> Result<Symbol2D> {
    check_field(b)?;
    Ok(match omega {
        Symbol2D::Radial(p) => Symbol2D::Radial(p.dilated(1.0 / b)),
        Symbol2D::Combination(parts) => Symbol2D::Combination(
            parts
                .iter()
                .map(|(c, s)| vtilde_from_omega(s, b).map(|s| (*c, s)))
                .collect::<Result<_>>()?,
        ),
        other => {
            let inner = other.clone();
            let r = b.sqrt();
            Symbol2D::generic(
                &format!("vtilde[{}, b={b}]", other.describe()),
                other.decay_class(),
                other.envelope_rate().map(|a| a / b),
                move |x, y| inner.eval(-y / r, -x / r),
            )
        }
    })
}

/// Radial Laplacian of `p(s) e^{-a s}`, as `(p̃, a)`:
/// `Δ(p e^{-as}) = 4[s(p'' - 2a p' + a² p) + p' - a p] e^{-as}`.
fn laplacian_poly_exp(p: &[f64], a: f64) -> Vec<f64> {
    let d1 = derivative(p);
    let d2 = derivative(&d1);
    let mut inner = poly_add(&poly_add(&d2, &scale(&d1, -2.0 * a)), &scale(p, a * a));
    inner.insert(0, 0.0); // multiply by s
    let rest = poly_add(&d1, &scale(p, -a));
    scale(&poly_add(&inner, &rest), 4.0)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect()
}

fn scale(p: &[f64], c: f64) -> Vec<f64> {
    p.iter().map(|v| v * c).collect()
}

/// `𝒟_{b,r} ζ = L_r(-Δ/(2b)) ζ = Σ_j C(r, j)/j! (Δ/(2b))^j ζ` on closed-form radial profiles.
pub fn apply_d_br(zeta: &Symbol2D, b: f64, r: usize) -> Result<Symbol2D> {
    check_field(b)?;
    if r == 0 {
        return Ok(zeta.clone());
    }
    if r > 4 {
        return Err(Error::InvalidParameter(format!("order r = {r} exceeds 4")));
    }
    let profile = zeta
        .to_radial()
        .ok_or_else(|| Error::UnsupportedProfile(format!("{} is not radial", zeta.describe())))?;
    let (p, a) = profile.poly_exp().ok_or_else(|| {
        Error::UnsupportedProfile(format!("{} has no closed-form Laplacian", profile.describe()))
    })?;
    let mut total = vec![0.0; 1];
    let mut power = p.clone();
    for j in 0..=r {
        if j > 0 {
            power = scale(&laplacian_poly_exp(&power, a), 1.0 / (2.0 * b));
        }
        let weight = (log_factorial(r as u64)
            - log_factorial(j as u64)
            - log_factorial((r - j) as u64)
            - log_factorial(j as u64))
        .exp();
        total = poly_add(&total, &scale(&power, weight));
    }
    while total.len() > 1 && total.last() == Some(&0.0) {
        total.pop();
    }
    Ok(Symbol2D::Radial(RadialProfile::poly_gaussian(total, a)))
}

/// Sign selector for super-level sets and perturbation signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Grid used for non-radial phase-space volumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeGrid {
    pub half_width: f64,
    pub cell: f64,
}

impl Default for VolumeGrid {
    fn default() -> Self {
        VolumeGrid {
            half_width: 20.0,
            cell: 0.02,
        }
    }
}

/// `𝔙₁^±(λ; F) = (2π)^{-1} |{±F > λ}|`.
pub fn phase_space_volume(f: &Symbol2D, lambda: f64, sign: Sign) -> Result<f64> {
    phase_space_volume_with(f, lambda, sign, VolumeGrid::default())
}

pub fn phase_space_volume_with(f: &Symbol2D, lambda: f64, sign: Sign, grid: VolumeGrid) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("level {lambda} must be positive")));
    }
    if let Some(p) = f.to_radial() {
        return Ok(radial_superlevel_measure(&p, lambda, sign) / 2.0);
    }
    let n = (2.0 * grid.half_width / grid.cell).ceil() as usize;
    let h = 2.0 * grid.half_width / n as f64;
    let s = sign.factor();
    let mut count = 0usize;
    for i in 0..n {
        let x = -grid.half_width + (i as f64 + 0.5) * h;
        for j in 0..n {
            let xi = -grid.half_width + (j as f64 + 0.5) * h;
            if s * f.eval(x, xi) > lambda {
                count += 1;
            }
        }
    }
    Ok(count as f64 * h * h / (2.0 * PI))
}

/// Lebesgue measure of `{s ≥ 0 : ±ℛ(s) > λ}` by scanning plus bisection.
pub fn radial_superlevel_measure(p: &RadialProfile, lambda: f64, sign: Sign) -> f64 {
    const S_MAX: f64 = 1e12;
    let sg = sign.factor();
    let inside = |s: f64| sg * p.eval(s) > lambda;
    let mut samples = vec![0.0];
    let mut s = 1e-8;
    let end = p.support().map_or(S_MAX, |c| (c * 1.5).max(1e-6));
    while s < end {
        samples.push(s);
        s *= 1.02;
    }
    samples.push(end);
    for bp in p.breakpoints() {
        if bp < end {
            samples.push(bp);
        }
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    samples.dedup();
    if p.support().is_none() && inside(end) {
        return f64::INFINITY;
    }
    let mut measure = 0.0;
    let mut start: Option<f64> = if inside(0.0) { Some(0.0) } else { None };
    let mut prev_state = start.is_some();
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let state = inside(b);
        if state != prev_state {
            let edge = bisect(&inside, a, b, prev_state);
            if state {
                start = Some(edge);
            } else if let Some(s0) = start.take() {
                measure += edge - s0;
            }
        }
        prev_state = state;
    }
    if let Some(s0) = start {
        measure += end - s0;
    }
    measure
}

fn bisect(inside: &impl Fn(f64) -> bool, mut a: f64, mut b: f64, state_a: bool) -> f64 {
    while b - a > 1e-12 * b.abs().max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if inside(mid) == state_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Empirical bounds of the logarithmic derivative `-λ f'(λ)/f(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionC {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `0 < γ₁ ≤ γ₂ < ∞`.
    pub satisfied: bool,
}

/// Estimates `−λ f′(λ)/f(λ)` on a 50-point logarithmic grid over the range.
pub fn condition_c_estimate(volume: impl Fn(f64) -> f64, range: (f64, f64)) -> Result<ConditionC> {
    condition_c_estimate_with(volume, range, 50)
}

pub fn condition_c_estimate_with(
    volume: impl Fn(f64) -> f64,
    range: (f64, f64),
    points: usize,
) -> Result<ConditionC> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::InvalidParameter(format!("invalid range ({lo}, {hi})")));
    }
    const STEP: f64 = 1e-4;
    let ratio = (hi / lo).ln();
    let mut gamma1 = f64::INFINITY;
    let mut gamma2 = f64::NEG_INFINITY;
    let mut last = f64::INFINITY;
    for i in 0..points {
        let lambda = lo * (ratio * i as f64 / (points - 1) as f64).exp();
        let value = volume(lambda);
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonMonotone { at: lambda });
        }
        if value > last * (1.0 + 1e-12) {
            return Err(Error::NonMonotone { at: lambda });
        }
        last = value;
        let up = volume(lambda * STEP.exp());
        let down = volume(lambda * (-STEP).exp());
        if !(up > 0.0 && down > 0.0) {
            return Err(Error::NonMonotone { at: lambda });
        }
        let d = -(up.ln() - down.ln()) / (2.0 * STEP);
        gamma1 = gamma1.min(d);
        gamma2 = gamma2.max(d);
    }
    let satisfied = gamma1 > 0.0 && gamma2.is_finite() && gamma1 <= gamma2;
    Ok(ConditionC {
        gamma1,
        gamma2,
        satisfied,
    })
}

/// Evaluates a closed-form radial symbol's profile polynomial, for tests.
pub fn poly_exp_eval(coeffs: &[f64], rate: f64, s: f64) -> f64 {
    horner(coeffs, s) * (-rate * s).exp()
}
