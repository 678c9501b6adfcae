//! Command handlers. Each returns a report and whether every check it made
//! passed; precondition failures come back as a one-line message.

use altzeta::determinants::{alternating_sum, eta_contfrac, eta_det, eta_tridiag, gen_vandermonde_ratio, OrderedGrid};
use altzeta::ensembles::{
    avg_ratio_closed, avg_ratio_closed_displayed, avg_ratio_mc, corollary_integral_quadrature, laguerre_limit_gap,
    laguerre_norm, laguerre_norm_displayed, norm_quadrature, selberg_value, EnsembleKind, EnsembleSpec,
};
use altzeta::eta::{eta_reference, eta_series};
use altzeta::sampling::{
    eta_mc, psi_closed, psi_closed_displayed, psi_mc, psi_zero_closed, ratio_mc, MCEstimate, SamplerConfig,
};
use altzeta::suite::{run_suite, Scope, SuiteConfig};
use altzeta::{EvalResult, SParam, C64};
use serde_json::Value;

use crate::report::{num, opt_num, Report};
use crate::{Cli, Command, EnsembleArg, MethodArg, Opts};

type Outcome = std::result::Result<(Report, bool), String>;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_SAMPLES: u64 = 100_000;
const DEFAULT_N_RANGE: &str = "4,8,16,32,64";
const AGREEMENT_TOL: f64 = 1e-7;
const NORM_TOL: f64 = 1e-6;
/// Largest `N` for which `ensemble` and `selberg-check` run quadrature.
const QUADRATURE_N: usize = 2;

const ETA_COLUMNS: &[&str] = &["method", "N", "re", "im", "std_error", "n_samples", "condition_estimate"];
const CONVERGENCE_COLUMNS: &[&str] = &["N", "re", "im", "abs_error", "decreasing"];
const VALUE_COLUMNS: &[&str] = &["quantity", "re", "im", "std_error", "n_samples"];
const SUITE_COLUMNS: &[&str] = &["group", "criterion", "check", "passed", "measured", "bound"];

pub fn run(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    match &cli.command {
        Command::Eta => eta(o),
        Command::Convergence => convergence(o),
        Command::Mc => mc(o),
        Command::Psi { x } => psi(o, x),
        Command::Ratio { u } => ratio(o, u),
        Command::Ensemble => ensemble(o),
        Command::SelbergCheck => selberg_check(o),
        Command::Suite { scope } => suite(o, scope),
    }
}

fn err(e: altzeta::Error) -> String {
    e.to_string()
}

fn s_param(o: &Opts) -> Result<SParam, String> {
    o.s.as_deref().ok_or("missing --s")?.parse().map_err(err)
}

fn order(o: &Opts) -> Result<usize, String> {
    match o.n {
        Some(0) => Err("--N must be at least 1".into()),
        Some(n) => Ok(n),
        None => Err("missing --N".into()),
    }
}

fn samples(o: &Opts) -> Result<u64, String> {
    let Some(text) = o.samples.as_deref() else {
        return Ok(DEFAULT_SAMPLES);
    };
    let bad = || format!("--samples {text:?} is not a positive integer");
    if let Ok(n) = text.parse::<u64>() {
        return if n > 0 { Ok(n) } else { Err(bad()) };
    }
    let x: f64 = text.parse().map_err(|_| bad())?;
    if x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(bad())
    }
}

fn seed(o: &Opts) -> Result<u64, String> {
    if let Some(seed) = o.seed {
        return Ok(seed);
    }
    match std::env::var("ALTZETA_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("ALTZETA_SEED={v:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn sampler(o: &Opts) -> Result<SamplerConfig, String> {
    let mut cfg = SamplerConfig::with_seed(seed(o)?);
    if let Some(b) = o.burn_in {
        cfg.burn_in = b;
    }
    if let Some(t) = o.thinning {
        cfg.thinning = t;
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

fn spec(o: &Opts) -> Result<EnsembleSpec, String> {
    let n = order(o)?;
    let a = o.a.ok_or("missing --a")?;
    match o.ensemble.ok_or("missing --ensemble")? {
        EnsembleArg::Jacobi => EnsembleSpec::jacobi(n, a, o.b.ok_or("missing --b")?),
        EnsembleArg::Laguerre => EnsembleSpec::laguerre(n, a, o.theta.unwrap_or(1.0)),
    }
    .map_err(err)
}

fn spec_params(r: &mut Report, spec: &EnsembleSpec) {
    r.param("N", spec.n);
    match spec.kind {
        EnsembleKind::Jacobi { a, b } => {
            r.param("ensemble", "jacobi").param("a", num(a)).param("b", num(b));
        }
        EnsembleKind::Laguerre { a, theta } => {
            r.param("ensemble", "laguerre").param("a", num(a)).param("theta", num(theta));
        }
    }
}

fn value_row(r: &mut Report, quantity: String, v: C64) {
    r.row(vec![quantity.into(), num(v.re), num(v.im), Value::Null, Value::Null]);
}

fn estimate_row(r: &mut Report, quantity: String, e: &MCEstimate) {
    r.row(vec![quantity.into(), num(e.mean.re), num(e.mean.im), num(e.std_error), e.n_samples.into()]);
}

fn eval_row(r: &mut Report, e: &EvalResult) {
    r.row(vec![
        e.method.as_str().into(),
        e.n.into(),
        num(e.value.re),
        num(e.value.im),
        opt_num(e.meta.std_error),
        e.meta.n_samples.map_or(Value::Null, Value::from),
        opt_num(e.meta.condition_estimate),
    ]);
}

fn eta(o: &Opts) -> Outcome {
    let s = s_param(o)?;
    let n = order(o)?;
    let method = o.method.unwrap_or(MethodArg::Series);
    let mut r = Report::new("eta", ETA_COLUMNS);
    r.param("s", s.to_string()).param("N", n).param("method", format!("{method:?}").to_lowercase());
    let deterministic: &[fn(SParam, usize) -> altzeta::Result<EvalResult>] = match method {
        MethodArg::Series => &[eta_series],
        MethodArg::Det => &[eta_det],
        MethodArg::Tridiag => &[eta_tridiag],
        MethodArg::Contfrac => &[eta_contfrac],
        MethodArg::All => &[eta_series, eta_det, eta_tridiag, eta_contfrac],
        MethodArg::Mc => &[],
    };
    let results: Vec<EvalResult> = deterministic.iter().map(|f| f(s, n)).collect::<Result<_, _>>().map_err(err)?;
    for e in &results {
        eval_row(&mut r, e);
    }
    if method == MethodArg::Mc {
        let cfg = sampler(o)?;
        let count = samples(o)?;
        r.param("samples", count).param("seed", cfg.seed);
        let est = eta_mc(s, n, &cfg, count).map_err(err)?;
        r.row(vec![
            "mc".into(),
            n.into(),
            num(est.mean.re),
            num(est.mean.im),
            num(est.std_error),
            est.n_samples.into(),
            Value::Null,
        ]);
    }
    let mut agree = true;
    if method == MethodArg::All {
        let tol = o.tolerance.unwrap_or(AGREEMENT_TOL);
        let mut spread = 0.0_f64;
        for (i, a) in results.iter().enumerate() {
            for b in &results[i + 1..] {
                let scale = a.value.norm().max(b.value.norm());
                spread = spread.max((a.value - b.value).norm() / scale);
            }
        }
        r.diag("max_relative_spread", num(spread)).diag("tolerance", num(tol)).diag("agree", spread <= tol);
        agree = spread <= tol;
    }
    Ok((r, agree))
}

fn n_range(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("--N-range {text:?} is not a list like 4,8,16 or a range like 4..16");
    let list: Vec<usize> = if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if list.is_empty() || list.contains(&0) {
        return Err(bad());
    }
    Ok(list)
}

fn convergence(o: &Opts) -> Outcome {
    let s = s_param(o)?;
    let ns = n_range(o.n_range.as_deref().unwrap_or(DEFAULT_N_RANGE))?;
    let reference = eta_reference(s).map_err(err)?;
    let mut r = Report::new("convergence", CONVERGENCE_COLUMNS);
    let listed: Vec<String> = ns.iter().map(usize::to_string).collect();
    r.param("s", s.to_string()).param("N_range", listed.join(","));
    let mut previous: Option<f64> = None;
    let mut monotone = true;
    for &n in &ns {
        let v = eta_series(s, n).map_err(err)?.value;
        let e = (v - reference).norm();
        let decreasing = previous.map(|p| e < p);
        monotone &= decreasing.unwrap_or(true);
        r.row(vec![n.into(), num(v.re), num(v.im), num(e), decreasing.map_or(Value::Null, Value::Bool)]);
        previous = Some(e);
    }
    r.diag("reference_re", num(reference.re))
        .diag("reference_im", num(reference.im))
        .diag("error_decreasing", monotone);
    Ok((r, true))
}

fn mc(o: &Opts) -> Outcome {
    let s = s_param(o)?;
    let n = order(o)?;
    let cfg = sampler(o)?;
    let count = samples(o)?;
    let mut r = Report::new("mc", VALUE_COLUMNS);
    r.param("s", s.to_string()).param("N", n).param("samples", count).param("seed", cfg.seed);
    r.param("burn_in", cfg.burn_in).param("thinning", cfg.thinning);
    let est = eta_mc(s, n, &cfg, count).map_err(err)?;
    let exact = eta_series(s, n).map_err(err)?.value;
    estimate_row(&mut r, "eta_mc".into(), &est);
    value_row(&mut r, "eta_series".into(), exact);
    r.diag("z_score", num(est.z_score(exact)));
    Ok((r, true))
}

fn psi(o: &Opts, xs: &str) -> Outcome {
    let s = s_param(o)?;
    let n = order(o)?;
    let cfg = sampler(o)?;
    let count = samples(o)?;
    let xs: Vec<usize> = xs
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("--x {xs:?} is not a list of nonnegative integers")))
        .collect::<Result<_, _>>()?;
    let mut r = Report::new("psi", VALUE_COLUMNS);
    let listed: Vec<String> = xs.iter().map(usize::to_string).collect();
    r.param("s", s.to_string())
        .param("N", n)
        .param("x", listed.join(","))
        .param("samples", count)
        .param("seed", cfg.seed);
    let mut z = serde_json::Map::new();
    for &x in &xs {
        let (closed, limit) = if x == 0 {
            (psi_zero_closed(n, s).map_err(err)?, eta_reference(s).map_err(err)? * 4.0)
        } else {
            let c = s.complex();
            let limit = (c * -0.5 + 1.0).exp2() * (-c * (x as f64).ln()).exp();
            (psi_closed(x, n, s).map_err(err)?, limit)
        };
        value_row(&mut r, format!("psi_closed(x={x})"), closed);
        if x == 1 {
            value_row(&mut r, "psi_closed_displayed(x=1)".into(), psi_closed_displayed(1, n, s).map_err(err)?);
        }
        value_row(&mut r, format!("psi_limit(x={x})"), limit);
        let est = psi_mc(x, n, s, &cfg.clone_for(x), count).map_err(err)?;
        estimate_row(&mut r, format!("psi_mc(x={x})"), &est);
        z.insert(format!("x={x}"), num(est.z_score(closed)));
    }
    r.diag("z_score", Value::Object(z));
    Ok((r, true))
}

trait PerItem {
    fn clone_for(&self, k: usize) -> SamplerConfig;
}

impl PerItem for SamplerConfig {
    /// An independent stream per listed item, stable under reordering.
    fn clone_for(&self, k: usize) -> SamplerConfig {
        SamplerConfig { seed: self.seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)), ..*self }
    }
}

fn ratio(o: &Opts, u: &str) -> Outcome {
    let s = s_param(o)?;
    let nodes: Vec<f64> = u
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("--u {u:?} is not a list of numbers")))
        .collect::<Result<_, _>>()?;
    let grid = OrderedGrid::new(nodes).map_err(err)?;
    let cfg = sampler(o)?;
    let count = samples(o)?;
    let mut r = Report::new("ratio", VALUE_COLUMNS);
    r.param("s", s.to_string()).param("u", u.replace(' ', "")).param("samples", count).param("seed", cfg.seed);
    let det = gen_vandermonde_ratio(s, &grid).map_err(err)?;
    let alt = alternating_sum(s, &grid);
    let est = ratio_mc(&grid, s, &cfg, count).map_err(err)?;
    value_row(&mut r, "determinant_ratio".into(), det);
    value_row(&mut r, "alternating_sum".into(), alt);
    estimate_row(&mut r, "ratio_mc".into(), &est);
    r.diag("relative_difference", num((det - alt).norm() / alt.norm())).diag("z_score", num(est.z_score(alt)));
    Ok((r, true))
}

fn ensemble(o: &Opts) -> Outcome {
    let spec = spec(o)?;
    let s = s_param(o)?;
    spec.check_ratio(s).map_err(err)?;
    let cfg = sampler(o)?;
    let count = samples(o)?;
    let mut r = Report::new("ensemble", VALUE_COLUMNS);
    spec_params(&mut r, &spec);
    r.param("s", s.to_string()).param("samples", count).param("seed", cfg.seed);
    let closed = avg_ratio_closed(&spec, s).map_err(err)?;
    value_row(&mut r, "avg_ratio_closed".into(), closed);
    value_row(&mut r, "avg_ratio_closed_displayed".into(), avg_ratio_closed_displayed(&spec, s).map_err(err)?);
    if spec.n <= QUADRATURE_N {
        let quad = corollary_integral_quadrature(&spec, s).map_err(err)? / spec.ln_norm().exp();
        value_row(&mut r, "quadrature".into(), quad);
        r.diag("quadrature_relative_error", num((quad - closed).norm() / quad.norm()));
    }
    let est = avg_ratio_mc(&spec, s, &cfg, count).map_err(err)?;
    estimate_row(&mut r, "mc_direct".into(), &est.direct);
    estimate_row(&mut r, "mc_joint".into(), &est.joint);
    r.diag("z_direct", num(est.direct.z_score(closed)))
        .diag("z_joint", num(est.joint.z_score(closed)))
        .diag("estimator_disagreement", num(est.disagreement()));
    Ok((r, true))
}

fn selberg_check(o: &Opts) -> Outcome {
    let spec = spec(o)?;
    let tol = o.tolerance.unwrap_or(NORM_TOL);
    let mut r = Report::new("selberg-check", VALUE_COLUMNS);
    spec_params(&mut r, &spec);
    r.param("tolerance", num(tol));
    let closed = match spec.kind {
        EnsembleKind::Jacobi { a, b } => selberg_value(spec.n, a, b),
        EnsembleKind::Laguerre { a, theta } => laguerre_norm(spec.n, a, theta),
    }
    .map_err(err)?;
    value_row(&mut r, "closed_form".into(), C64::new(closed, 0.0));
    if let EnsembleKind::Laguerre { a, theta } = spec.kind {
        let shown = laguerre_norm_displayed(spec.n, a, theta).map_err(err)?;
        value_row(&mut r, "closed_form_displayed".into(), C64::new(shown, 0.0));
        let gaps: Vec<Value> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&l| laguerre_limit_gap(spec.n, a, theta, l).map(num))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        r.diag("jacobi_limit_gap_at_L_1e2_1e4_1e6", gaps);
    }
    let mut passed = true;
    if spec.n <= QUADRATURE_N {
        let quad = norm_quadrature(&spec).map_err(err)?;
        value_row(&mut r, "quadrature".into(), C64::new(quad, 0.0));
        let rel = (closed - quad).abs() / quad.abs();
        passed = rel <= tol;
        r.diag("relative_error", num(rel)).diag("passed", passed);
    } else {
        r.diag("quadrature", format!("skipped for N > {QUADRATURE_N}"));
    }
    Ok((r, passed))
}

fn suite(o: &Opts, scope: &str) -> Outcome {
    let scope: Scope = scope.parse().map_err(err)?;
    let cfg = SuiteConfig { seed: seed(o)?, samples: samples(o)? };
    let report = run_suite(scope, &cfg);
    let mut r = Report::new("suite", SUITE_COLUMNS);
    r.param("scope", scope.as_str()).param("seed", cfg.seed).param("samples", cfg.samples);
    let mut notes = Vec::new();
    let mut groups = serde_json::Map::new();
    for g in &report.groups {
        groups.insert(g.name.into(), if g.passed { "pass" } else { "fail" }.into());
        for c in &g.checks {
            r.row(vec![
                g.name.into(),
                g.criterion.map_or(Value::Null, Value::from),
                c.name.clone().into(),
                c.passed.into(),
                num(c.measured),
                num(c.bound),
            ]);
        }
        notes.extend(g.notes.iter().map(|n| format!("{}: {n}", g.name)));
    }
    let failures: Vec<String> = report.failures().map(|(g, c)| format!("{}: {}", g.name, c.name)).collect();
    r.diag("passed", report.passed)
        .diag("groups", Value::Object(groups))
        .diag("failures", failures)
        .diag("notes", notes);
    Ok((r, report.passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_range_forms() {
        assert_eq!(n_range("4,8, 16").unwrap(), vec![4, 8, 16]);
        assert_eq!(n_range("3..5").unwrap(), vec![3, 4, 5]);
        assert!(n_range("0,4").is_err());
        assert!(n_range("a..b").is_err());
        assert!(n_range("5..3").is_err());
    }
}
