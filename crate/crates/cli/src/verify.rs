//! Identity suites run by `landau verify`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use landau_core::operator::{
    antiwick_radial_eigs, banded_structure_check, eig_hermitian, hilbert_schmidt_check, positivity_laguerre_antiwick,
    positivity_laguerre_weyl, toeplitz_radial_eigs, weyl_matrix, weyl_radial_eigs, weyl_radial_eigs_fourier,
    PositivityVerdict,
};
use landau_core::profile::RadialProfile;
use landau_core::quadrature::{gauss_hermite, integrate_r1, integrate_r2_with, Axis};
use landau_core::special::hermite_fn;
use landau_core::symbol::{apply_d_br, landau_symbol_check, AngularMode, Symbol2D, SymplecticMapKappa};
use landau_core::wigner::{husimi_diag, husimi_numeric, wigner_eval, wigner_fourier_check, wigner_numeric};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// `Ψ_{k,ℓ}(x, ξ)`.
pub type Kernel = fn(usize, usize, f64, f64) -> Complex64;

/// Deliberate defects for checking that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The `k < ℓ` branch of the kernel skips its complex conjugation.
    LowerBranchSign,
}

fn faulty_lower_branch(k: usize, l: usize, x: f64, xi: f64) -> Complex64 {
    if k < l {
        wigner_eval(l, k, x, xi)
    } else {
        wigner_eval(k, l, x, xi)
    }
}

pub fn kernel_for(fault: Option<Fault>) -> Kernel {
    match fault {
        None => wigner_eval,
        Some(Fault::LowerBranchSign) => faulty_lower_branch,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub identity: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
}

pub const SUITES: [&str; 10] = [
    "wigner",
    "moyal",
    "husimi",
    "fourier",
    "landau",
    "radial",
    "hs",
    "d11",
    "banded",
    "positivity",
];

struct Recorder {
    suite: &'static str,
    rows: Vec<CheckRow>,
    clock: Instant,
}

impl Recorder {
    fn check(&mut self, identity: &str, max_error: f64, tolerance: f64) {
        let seconds = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        self.rows.push(CheckRow {
            suite: self.suite,
            identity: identity.to_string(),
            max_error,
            tolerance,
            passed: max_error.is_finite() && max_error < tolerance,
            seconds,
        });
    }

    fn flag(&mut self, identity: &str, ok: bool) {
        self.check(identity, if ok { 0.0 } else { 1.0 }, 0.5);
    }

    fn fail(&mut self, identity: &str, err: impl std::fmt::Display) {
        let seconds = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        self.rows.push(CheckRow {
            suite: self.suite,
            identity: format!("{identity}: {err}"),
            max_error: f64::NAN,
            tolerance: 0.0,
            passed: false,
            seconds,
        });
    }
}

fn psi(k: usize) -> impl Fn(f64) -> Complex64 {
    move |x| Complex64::new(hermite_fn(k, x), 0.0)
}

fn wigner_suite(rec: &mut Recorder, kernel: Kernel) {
    let n = 8;
    let grid: Vec<f64> = (0..21).map(|i| -3.0 + 0.3 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        for l in 0..=n {
            for &x in &grid {
                for &xi in &grid {
                    let d = (kernel(k, l, x, xi) - wigner_numeric(psi(k), psi(l), x, xi)).norm();
                    worst = worst.max(d);
                }
            }
        }
    }
    rec.check("closed-form kernel vs Wigner transform, k,l<=8, 21x21 grid", worst, 1e-9);
}

fn moyal_suite(rec: &mut Recorder, kernel: Kernel) {
    let n = 6;
    let rule = gauss_hermite(48).expect("valid order");
    let axis = Axis::scaled(FRAC_1_SQRT_2);
    let mut worst: f64 = 0.0;
    for a in 0..=n {
        for b in 0..=n {
            for c in 0..=n {
                for d in 0..=n {
                    let v: Complex64 = integrate_r2_with(
                        |x, xi| kernel(a, b, x, xi) * kernel(c, d, x, xi).conj(),
                        &rule,
                        [axis; 2],
                    );
                    let expect = if a == c && b == d { 1.0 / (2.0 * PI) } else { 0.0 };
                    worst = worst.max((v - expect).norm());
                }
            }
        }
    }
    rec.check("Moyal orthogonality, indices<=6", worst, 1e-9);
}

fn husimi_suite(rec: &mut Recorder) {
    let mut worst: f64 = 0.0;
    for k in 0..=8 {
        for &(x, xi) in &[(0.0, 0.0), (0.5, -0.3), (1.2, 0.7), (-2.0, 1.5), (2.5, 2.5)] {
            worst = worst.max((husimi_diag(k, x, xi) - husimi_numeric(k, x, xi, 80)).abs());
        }
    }
    rec.check("Husimi closed form vs Gaussian convolution, k<=8", worst, 1e-8);
}

/// `(2π)^{-1} ∫ e^{-i w₁ x} ψ_k(x - w₂/2) ψ_ℓ(x + w₂/2) dx`, the Fourier transform of
/// `W(ψ_k, ψ_ℓ)` computed from the Hermite functions alone.
fn ambiguity(k: usize, l: usize, w: [f64; 2]) -> Complex64 {
    let rule = gauss_hermite(96).expect("valid order");
    let v: Complex64 = integrate_r1(
        |x| Complex64::from_polar(1.0, -w[0] * x) * (hermite_fn(k, x - w[1] / 2.0) * hermite_fn(l, x + w[1] / 2.0)),
        &rule,
        Axis::default(),
    );
    v / (2.0 * PI)
}

fn fourier_suite(rec: &mut Recorder, kernel: Kernel) {
    let mut pts = Vec::new();
    for i in -4..=4 {
        for j in -4..=4 {
            let w = [i as f64, j as f64];
            if w[0].hypot(w[1]) <= 4.0 {
                pts.push(w);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for k in 0..=8 {
        for &w in &pts {
            let (l, r) = wigner_fourier_check(k, w);
            worst = worst.max((l - r).abs());
        }
    }
    rec.check("diagonal Fourier identity, k<=8, |w|<=4", worst, 1e-8);
    // Off the diagonal the transform picks up (-i)^{|k-l|} (-1)^{min(k,l)} / 2.
    let mut worst: f64 = 0.0;
    for k in 0..=4usize {
        for l in 0..=4usize {
            let m = k.abs_diff(l);
            let phase = Complex64::new(0.0, -1.0).powu(m as u32) * if k.min(l) % 2 == 0 { 0.5 } else { -0.5 };
            for &w in pts.iter().step_by(3) {
                let rhs = phase * kernel(k, l, w[0] / 2.0, w[1] / 2.0);
                worst = worst.max((ambiguity(k, l, w) - rhs).norm());
            }
        }
    }
    rec.check("off-diagonal Fourier identity, k,l<=4, |w|<=4", worst, 1e-8);
}

fn landau_suite(rec: &mut Recorder) {
    let mut defect: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for b in [0.5, 1.0, 2.0] {
        match SymplecticMapKappa::new(b) {
            Ok(k) => defect = defect.max(k.symplectic_defect()),
            Err(e) => return rec.fail("symplectic map", e),
        }
        for _ in 0..100 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
            match landau_symbol_check(b, p) {
                Ok((lhs, rhs)) => worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-300)),
                Err(e) => return rec.fail("Landau symbol", e),
            }
        }
    }
    rec.check("kappa_b symplectic, b in {1/2,1,2}", defect, 1e-14);
    rec.check("Landau symbol in pulled-back coordinates, 100 points per b", worst, 1e-12);
}

fn radial_suite(rec: &mut Recorder) {
    let a = 0.1;
    let n = 24;
    let profile = RadialProfile::gaussian(a);
    let mu = weyl_radial_eigs(&profile, n);
    let m = match weyl_matrix(&Symbol2D::radial(profile.clone()), n) {
        Ok(m) => m,
        Err(e) => return rec.fail("Weyl matrix", e),
    };
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                diag = diag.max(m.get(k, k).norm());
                rel = rel.max((m.get(k, k).re - mu[k]).abs() / mu[k].abs());
            } else {
                off = off.max(m.get(k, l).norm());
            }
        }
    }
    rec.check("radial symbol gives a diagonal matrix", off / diag, 1e-9);
    rec.check("diagonal equals the Laguerre moments", rel, 1e-8);
    let hat = profile.fourier_hat().expect("gaussian transform");
    let via_hat = weyl_radial_eigs_fourier(&hat, n);
    let worst = (0..n).map(|k| (via_hat[k] - mu[k]).abs()).fold(0.0, f64::max);
    rec.check("Laguerre moments vs Fourier-side moments", worst, 1e-8);
    let a = 0.05;
    match antiwick_radial_eigs(&RadialProfile::gaussian(a), 32) {
        Ok(aw) => {
            let w = weyl_radial_eigs(&RadialProfile::gaussian(a).smoothed(), 32);
            let worst = (0..32).map(|k| (aw[k] - w[k]).abs() / aw[k]).fold(0.0, f64::max);
            rec.check("anti-Wick moments vs Weyl moments of the smoothed symbol", worst, 1e-8);
        }
        Err(e) => rec.fail("anti-Wick moments", e),
    }
}

fn hs_suite(rec: &mut Recorder) {
    let p = Symbol2D::radial(RadialProfile::wigner_diag(0).scaled(2.0 * PI));
    match weyl_matrix(&p, 16).and_then(|m| eig_hermitian(&m)) {
        Ok(r) => {
            let mut ev = r.eigenvalues.clone();
            ev.sort_by(|a, b| b.total_cmp(a));
            let worst = ev
                .iter()
                .enumerate()
                .map(|(i, e)| (e - if i == 0 { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            rec.check("Weyl quantization of 2*pi*Psi_0 is a rank-one projection", worst, 1e-9);
        }
        Err(e) => rec.fail("rank-one projection", e),
    }
    match hilbert_schmidt_check(&Symbol2D::radial(RadialProfile::gaussian(0.5)), 64) {
        Ok((m, s)) => rec.check("Hilbert-Schmidt norm vs symbol L2 norm, N=64", (m - s).abs(), 1e-6),
        Err(e) => rec.fail("Hilbert-Schmidt norm", e),
    }
}

fn d11_suite(rec: &mut Recorder) {
    let mut worst: f64 = 0.0;
    let zeta = RadialProfile::gaussian(0.6);
    for b in [1.0, 2.0] {
        let run = || -> landau_core::Result<f64> {
            let d = apply_d_br(&Symbol2D::radial(zeta.clone()), b, 1)?;
            let p = d.to_radial().expect("radial input stays radial");
            let lhs = toeplitz_radial_eigs(&p, 0, b, 21)?;
            let rhs = toeplitz_radial_eigs(&zeta, 1, b, 21)?;
            Ok((0..21)
                .map(|k| (lhs.nu[k] - rhs.nu[k]).abs() / rhs.nu[k].abs())
                .fold(0.0, f64::max))
        };
        match run() {
            Ok(w) => worst = worst.max(w),
            Err(e) => return rec.fail("level-raising identity", e),
        }
    }
    rec.check("(I + Laplacian/2b) zeta on level 0 equals zeta on level 1, k<=20", worst, 1e-7);
}

fn banded_suite(rec: &mut Recorder) {
    let v = Symbol2D::AngularFourier(vec![AngularMode {
        m: 2,
        cos: Some(RadialProfile::gaussian(0.5)),
        sin: Some(RadialProfile::gaussian(0.8).scaled(0.5)),
    }]);
    match banded_structure_check(&v, 16) {
        Ok((inside, outside)) => rec.check("angular band 2 gives bandwidth 2", outside / inside, 1e-9),
        Err(e) => rec.fail("bandedness", e),
    }
}

fn positivity_suite(rec: &mut Recorder) {
    let g = positivity_laguerre_weyl(&RadialProfile::gaussian(1.0).scaled(1.0 / PI), 10);
    rec.flag("Gaussian symbol has nonnegative Laguerre coefficients", g.verdict == PositivityVerdict::AllNonneg);
    let flip = positivity_laguerre_weyl(&RadialProfile::wigner_diag(1).scaled(-2.0 * PI), 10);
    rec.flag(
        "-2*pi*Psi_1 is flagged at index 1",
        flip.verdict == PositivityVerdict::FirstNegative { index: 1 },
    );
    match positivity_laguerre_antiwick(&RadialProfile::poly_gaussian(vec![1.0, -1.0], 0.0), 6) {
        Ok(r) => rec.flag(
            "anti-Wick symbol 1 - s is flagged at index 0",
            r.verdict == PositivityVerdict::FirstNegative { index: 0 },
        ),
        Err(e) => rec.fail("anti-Wick positivity", e),
    }
}

/// Runs the named suites (all of them when `filter` is `None`).
pub fn run(filter: Option<&str>, fault: Option<Fault>) -> Result<Vec<CheckRow>, String> {
    if let Some(f) = filter {
        if !SUITES.contains(&f) {
            return Err(format!("unknown suite {f:?}; expected one of {}", SUITES.join(", ")));
        }
    }
    let kernel = kernel_for(fault);
    let mut rows = Vec::new();
    for suite in SUITES {
        if filter.is_some_and(|f| f != suite) {
            continue;
        }
        let mut rec = Recorder {
            suite,
            rows: Vec::new(),
            clock: Instant::now(),
        };
        match suite {
            "wigner" => wigner_suite(&mut rec, kernel),
            "moyal" => moyal_suite(&mut rec, kernel),
            "husimi" => husimi_suite(&mut rec),
            "fourier" => fourier_suite(&mut rec, kernel),
            "landau" => landau_suite(&mut rec),
            "radial" => radial_suite(&mut rec),
            "hs" => hs_suite(&mut rec),
            "d11" => d11_suite(&mut rec),
            "banded" => banded_suite(&mut rec),
            "positivity" => positivity_suite(&mut rec),
            _ => unreachable!("suite list is fixed"),
        }
        rows.extend(rec.rows);
    }
    Ok(rows)
}
