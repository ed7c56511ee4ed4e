//! The batch subcommands.

use std::path::PathBuf;

use landau_core::asymptotics::{self, AsymptoticModel};
use landau_core::capacity::capacity_estimate;
use landau_core::operator::{
    antiwick_radial_eigs, assemble_hv_with, construct_np51, eig_hermitian, toeplitz_radial_eigs, weyl_radial_eigs,
    weyl_radial_eigs_fourier, AssemblyOptions,
};
use landau_core::profile::Shape;
use landau_core::symbol::{condition_c_estimate, Sign};
use serde::Serialize;

use crate::config::{section, AsymptoticsConfig, LoadedConfig};
use crate::output::{fmt_f64, fmt_opt, Outputs, RunProvenance};
use crate::CliError;

/// Everything a subcommand needs besides its own table.
pub struct Context {
    pub loaded: Option<LoadedConfig>,
    pub seed: Option<u64>,
    pub order: Option<usize>,
    pub out: PathBuf,
}

impl Context {
    fn config(&self) -> Result<&LoadedConfig, CliError> {
        self.loaded
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))
    }

    fn provenance(&self, command: &str) -> RunProvenance {
        RunProvenance::new(command, self.loaded.as_ref().map(|l| l.sha256.clone()))
    }

    fn order(&self) -> Option<usize> {
        self.order
            .or_else(|| self.loaded.as_ref()?.config.quadrature.as_ref()?.order)
    }

    fn seed(&self) -> u64 {
        self.seed
            .or_else(|| self.loaded.as_ref()?.config.seed)
            .unwrap_or(0)
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} = {v} must be positive")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be at least 1")))
    }
}

pub fn radial_eigs(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.radial_eigs, "radial_eigs")?;
    nonzero("count", cfg.count)?;
    let mut prov = ctx.provenance("radial-eigs");
    prov.truncation = Some(serde_json::json!({ "count": cfg.count }));
    let w = weyl_radial_eigs(&cfg.profile, cfg.count);
    let aw = match antiwick_radial_eigs(&cfg.profile, cfg.count) {
        Ok(v) => Some(v),
        Err(e) => {
            prov.warnings.push(format!("anti-Wick column omitted: {e}"));
            None
        }
    };
    let hat = cfg.fourier_profile.clone().or_else(|| cfg.profile.fourier_hat());
    if hat.is_none() {
        prov.warnings
            .push("Fourier column omitted: no closed-form transform for this profile".into());
    }
    let wf = hat.map(|h| weyl_radial_eigs_fourier(&h, cfg.count));
    let rows = (0..cfg.count).map(|k| {
        vec![
            k.to_string(),
            fmt_f64(w[k]),
            fmt_opt(aw.as_ref().map(|v| v[k])),
            fmt_opt(wf.as_ref().map(|v| v[k])),
        ]
    });
    let mut out = Outputs::new(&ctx.out)?;
    out.csv("radial_eigs.csv", &prov, &["k", "mu_w", "mu_aw", "mu_w_fourier"], rows)?;
    Ok(out.written)
}

pub fn spectrum(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.spectrum, "spectrum")?;
    positive("b", cfg.b)?;
    nonzero("levels", cfg.levels)?;
    nonzero("radial", cfg.radial)?;
    let symbol = cfg.symbol.build(cfg.b)?;
    let mut opts = AssemblyOptions::default();
    if let Some(o) = ctx.order() {
        opts.order = o;
    }
    let op = assemble_hv_with(&symbol, cfg.levels, cfg.radial, cfg.sign, &opts)?;
    let report = eig_hermitian(&op)?;
    let mut prov = ctx.provenance("spectrum");
    prov.orders = report.provenance.orders.clone();
    prov.warnings = report.provenance.warnings.clone();
    prov.truncation = Some(serde_json::to_value(report.truncation).map_err(|e| CliError::Io(e.to_string()))?);
    let mut out = Outputs::new(&ctx.out)?;
    #[derive(Serialize)]
    struct Body<'a> {
        report: &'a landau_core::operator::SpectrumReport,
    }
    out.json("spectrum.json", &prov, &Body { report: &report })?;
    let rows = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| vec![i.to_string(), fmt_f64(*e)]);
    out.csv("spectrum.csv", &prov, &["index", "eigenvalue"], rows)?;
    Ok(out.written)
}

/// Asymptotic model for a radial weight at field strength `b`.
fn toeplitz_model(
    zeta: &landau_core::profile::RadialProfile,
    b: f64,
    capacity: Option<f64>,
) -> Result<AsymptoticModel, CliError> {
    let model = match (&zeta.shape, capacity) {
        (_, Some(c)) if zeta.is_compact() => AsymptoticModel::Compact { b, capacity: c },
        (Shape::DiskIndicator { c }, None) => AsymptoticModel::Compact { b, capacity: c.sqrt() },
        (Shape::ExpBeta { gamma, beta }, _) => AsymptoticModel::for_weight(*gamma, *beta, b)?,
        (Shape::Gaussian { a }, _) => AsymptoticModel::for_weight(*a, 1.0, b)?,
        _ => {
            return Err(CliError::Config(format!(
                "no asymptotic model for {}; use disk_indicator, exp_beta, gaussian, or give a capacity",
                zeta.describe()
            )))
        }
    };
    Ok(model)
}

pub fn toeplitz(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.toeplitz, "toeplitz")?;
    positive("b", cfg.b)?;
    nonzero("count", cfg.count)?;
    let model = toeplitz_model(&cfg.zeta, cfg.b, cfg.capacity)?;
    let eigs = toeplitz_radial_eigs(&cfg.zeta, cfg.q, cfg.b, cfg.count)?;
    let (lo, hi) = cfg.k_range.unwrap_or((2, cfg.count - 1));
    let mut prov = ctx.provenance("toeplitz");
    prov.truncation = Some(serde_json::json!({ "count": cfg.count, "q": cfg.q, "b": cfg.b }));
    prov.warnings.push(format!("model: {}", model.describe()));
    let mut rows = Vec::new();
    if lo <= hi {
        for k in lo..=hi.min(cfg.count - 1) {
            let ln_nu = if eigs.sign[k] > 0.0 { eigs.ln_nu[k] } else { f64::NAN };
            let pred = model.predict(k as f64)?;
            let r = ln_nu - pred;
            let kf = k as f64;
            rows.push(vec![
                k.to_string(),
                fmt_f64(eigs.nu[k]),
                fmt_f64(ln_nu),
                fmt_f64(pred),
                fmt_f64(r),
                if k >= 1 { fmt_f64(r / kf) } else { String::new() },
                if k >= 2 { fmt_f64(r / kf.ln()) } else { String::new() },
            ]);
        }
    }
    let mut out = Outputs::new(&ctx.out)?;
    out.csv(
        "toeplitz.csv",
        &prov,
        &[
            "k",
            "nu_k",
            "ln_nu_k",
            "model_prediction",
            "residual",
            "residual_over_k",
            "residual_over_ln_k",
        ],
        rows,
    )?;
    Ok(out.written)
}

pub fn capacity(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.capacity, "capacity")?;
    let seed = ctx.seed();
    let est = capacity_estimate(&cfg.set, cfg.j_max, cfg.restarts, seed)?;
    let mut prov = ctx.provenance("capacity");
    prov.seed = Some(seed);
    prov.truncation = Some(serde_json::json!({ "j_max": cfg.j_max, "restarts": cfg.restarts }));
    let mut out = Outputs::new(&ctx.out)?;
    #[derive(Serialize)]
    struct Body<'a> {
        set: &'a landau_core::capacity::CompactSet,
        result: &'a landau_core::capacity::CapacityEstimate,
    }
    out.json("capacity.json", &prov, &Body { set: &cfg.set, result: &est })?;
    Ok(out.written)
}

pub fn asymptotics(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.asymptotics, "asymptotics")?;
    let prov = ctx.provenance("asymptotics");
    let mut out = Outputs::new(&ctx.out)?;
    #[derive(Serialize)]
    struct Body {
        model: String,
        mu: Option<f64>,
        coefficients: Vec<f64>,
        condition_c: Option<landau_core::symbol::ConditionC>,
    }
    let point_model = match cfg {
        AsymptoticsConfig::ExpWeight { gamma, beta, b, ks } => {
            positive("gamma", *gamma)?;
            positive("beta", *beta)?;
            positive("b", *b)?;
            Some((
                AsymptoticModel::for_weight(*gamma, *beta, *b)?,
                Some(asymptotics::mu_from_weight(*gamma, *beta, *b)),
                ks,
            ))
        }
        AsymptoticsConfig::Compact { b, capacity, ks } => {
            positive("b", *b)?;
            positive("capacity", *capacity)?;
            Some((AsymptoticModel::Compact { b: *b, capacity: *capacity }, None, ks))
        }
        AsymptoticsConfig::Counting { .. } => None,
    };
    match (point_model, cfg) {
        (Some((model, mu, ks)), _) => {
            let coefficients = match &model {
                AsymptoticModel::ExpSmallBeta { coeffs, .. } | AsymptoticModel::ExpLargeBeta { coeffs, .. } => {
                    coeffs.clone()
                }
                _ => Vec::new(),
            };
            let mut rows = Vec::new();
            for &k in ks {
                if k < 2 {
                    return Err(CliError::Config(format!("k = {k} must be at least 2")));
                }
                rows.push(vec![k.to_string(), fmt_f64(model.predict(k as f64)?)]);
            }
            out.json(
                "asymptotics.json",
                &prov,
                &Body {
                    model: model.describe(),
                    mu,
                    coefficients,
                    condition_c: None,
                },
            )?;
            out.csv("asymptotics.csv", &prov, &["k", "prediction"], rows)?;
        }
        (None, AsymptoticsConfig::Counting { symbol, sign, lambdas }) => {
            let v = symbol.build();
            let mut rows = Vec::new();
            let mut vols = Vec::new();
            for &l in lambdas {
                positive("lambda", l)?;
                let vol = asymptotics::predict_counting(l, &v, *sign)?;
                vols.push(vol);
                rows.push(vec![fmt_f64(l), fmt_f64(vol)]);
            }
            let condition_c = if lambdas.len() >= 2 {
                let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let vv = v.clone();
                let s = *sign;
                Some(condition_c_estimate(
                    move |l| asymptotics::predict_counting(l, &vv, s).unwrap_or(f64::NAN),
                    (lo, hi),
                )?)
            } else {
                None
            };
            out.json(
                "asymptotics.json",
                &prov,
                &Body {
                    model: AsymptoticModel::Counting { symbol: v, sign: *sign }.describe(),
                    mu: None,
                    coefficients: Vec::new(),
                    condition_c,
                },
            )?;
            out.csv("asymptotics.csv", &prov, &["lambda", "volume"], rows)?;
        }
        (None, _) => unreachable!("every table without a point model is a counting table"),
    }
    Ok(out.written)
}

pub fn construct_np51_cmd(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = section(&ctx.config()?.config.np51, "np51")?;
    positive("b", cfg.b)?;
    let np = construct_np51(cfg.b, &cfg.m, &cfg.c1, &cfg.c2).map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.levels < cfg.m.len() + 1 {
        return Err(CliError::Config(format!(
            "levels = {} must exceed the number of multiplicities {}",
            cfg.levels,
            cfg.m.len()
        )));
    }
    nonzero("radial", cfg.radial)?;
    let mut opts = AssemblyOptions::default();
    if let Some(o) = ctx.order() {
        opts.order = o;
    }
    let op = assemble_hv_with(&np.symbol.scaled(-1.0), cfg.levels, cfg.radial, Sign::Plus, &opts)?;
    let report = eig_hermitian(&op)?;
    let counts: Vec<usize> = (0..cfg.m.len())
        .map(|q| report.count(q, Sign::Minus).unwrap_or(0))
        .collect();
    let mut rows = Vec::new();
    let mut max_error: f64 = 0.0;
    for &(q, k, e) in &np.predicted {
        let nearest = report
            .window_eigenvalues(q, Sign::Minus)
            .into_iter()
            .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
        let err = nearest.map(|x| (x - e).abs()).unwrap_or(f64::INFINITY);
        max_error = max_error.max(err);
        rows.push(vec![q.to_string(), k.to_string(), fmt_f64(e), fmt_opt(nearest), fmt_f64(err)]);
    }
    let mut prov = ctx.provenance("construct-np51");
    prov.orders = report.provenance.orders.clone();
    prov.warnings = report.provenance.warnings.clone();
    prov.truncation = Some(serde_json::to_value(report.truncation).map_err(|e| CliError::Io(e.to_string()))?);
    #[derive(Serialize)]
    struct Body<'a> {
        predicted: &'a [(usize, usize, f64)],
        expected_counts: &'a [usize],
        gap_counts: Vec<usize>,
        max_error: f64,
        report: &'a landau_core::operator::SpectrumReport,
    }
    let mut out = Outputs::new(&ctx.out)?;
    out.json(
        "np51.json",
        &prov,
        &Body {
            predicted: &np.predicted,
            expected_counts: &cfg.m,
            gap_counts: counts.clone(),
            max_error,
            report: &report,
        },
    )?;
    out.csv("np51.csv", &prov, &["q", "k", "predicted", "computed", "abs_error"], rows)?;
    if counts != cfg.m {
        return Err(CliError::Assertion(format!(
            "gap counts {counts:?} differ from the prescribed multiplicities {:?}",
            cfg.m
        )));
    }
    Ok(out.written)
}
