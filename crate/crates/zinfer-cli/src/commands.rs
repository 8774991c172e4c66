//! Subcommand implementations: fit, simulate, compare, diagnose.

use crate::csvio::{dataset_from_table, read_table, InputError, Table};
use crate::report::{fmt_sig, Json};
use crate::{CompareArgs, DataArgs, DiagnoseArgs, FitArgs, SimulateArgs};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zinfer::fit::{fit_joint, FitOptions, FitResult, ZiSpec};
use zinfer::modelsel::{self, ComparisonRow};
use zinfer::{BaseCount, Dataset, Error, ZiModel, ZiType};

/// Process exit status used by `main`; messages are printed at the source.
pub enum Outcome {
    Ok,
    NonConvergence,
    InputError,
}

fn parse_base(s: &str) -> Result<BaseCount, InputError> {
    if s == "poisson" {
        return Ok(BaseCount::Poisson);
    }
    if let Some(rest) = s.strip_prefix("binomial:") {
        let trials: u64 = rest
            .parse()
            .map_err(|_| InputError::Invalid(format!("bad trial count in base '{s}'")))?;
        return BaseCount::binomial(trials).map_err(|e| InputError::Invalid(e.to_string()));
    }
    Err(InputError::Invalid(format!(
        "unknown base '{s}' (expected poisson or binomial:<trials>)"
    )))
}

fn parse_zi_type(s: &str) -> Result<ZiType, InputError> {
    match s {
        "multiplicative" => Ok(ZiType::multiplicative()),
        "additive" => Ok(ZiType::additive()),
        "hurdle" => Ok(ZiType::hurdle()),
        "mixture" => Ok(ZiType::Mixture),
        _ => {
            if let Some(rest) = s.strip_prefix("custom:") {
                // both separators accepted; ':' avoids clashing with the
                // comma-delimited --types list
                let parts: Vec<&str> = rest.split([',', ':']).collect();
                if parts.len() == 2 {
                    let t1 = parts[0].parse::<f64>();
                    let t2 = parts[1].parse::<f64>();
                    if let (Ok(t1), Ok(t2)) = (t1, t2) {
                        return Ok(ZiType::custom(t1, t2));
                    }
                }
            }
            Err(InputError::Invalid(format!(
                "unknown zi-type '{s}' (expected multiplicative, additive, hurdle, mixture, \
                 custom:<tau1>:<tau2> or estimate-tau)"
            )))
        }
    }
}

fn parse_zi_spec(s: &str) -> Result<ZiSpec, InputError> {
    if s == "estimate-tau" {
        Ok(ZiSpec::EstimateTau)
    } else {
        Ok(ZiSpec::Fixed(parse_zi_type(s)?))
    }
}

/// Fit options with the outer-iteration cap taken from `ZINFER_MAX_ITER`
/// (flag takes precedence over the environment).
fn fit_options(max_iter_flag: Option<usize>) -> FitOptions {
    let mut opts = FitOptions::default();
    if let Ok(v) = std::env::var("ZINFER_MAX_ITER") {
        if let Ok(n) = v.parse::<usize>() {
            opts.max_outer = n;
        }
    }
    if let Some(n) = max_iter_flag {
        opts.max_outer = n;
    }
    opts
}

fn load_dataset(args: &DataArgs) -> Result<(Dataset, Table), InputError> {
    let mut covariates: Vec<String> = Vec::new();
    for name in args
        .theta_covariates
        .iter()
        .chain(args.alpha_covariates.iter())
    {
        if name != "intercept" && !covariates.contains(name) {
            covariates.push(name.clone());
        }
    }
    let table = read_table(
        &args.data,
        &args.response,
        &covariates,
        args.drop_response_above,
    )?;
    let dataset = dataset_from_table(
        &table,
        &args.theta_covariates,
        &args.alpha_covariates,
        !args.no_intercept,
    )?;
    Ok((dataset, table))
}

fn write_output(path: Option<&str>, content: &str) -> Result<(), InputError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| InputError::Io(format!("cannot write '{p}': {e}"))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// All joint parameter estimates in covariance order: beta, alpha, tau.
fn joint_estimates(fit: &FitResult) -> Vec<f64> {
    let mut v = fit.beta.clone();
    v.extend_from_slice(&fit.alpha);
    if fit.tau_estimated {
        let (t1, t2) = fit.tau.expect("estimated tau present");
        v.push(t1);
        v.push(t2);
    }
    v
}

fn coefficient_block(fit: &FitResult, names: &[String], offset: usize, est: &[f64]) -> Json {
    let mut block = Json::obj();
    for (j, name) in names.iter().enumerate() {
        let mut entry = Json::obj();
        entry.push("estimate", Json::num(est[offset + j]));
        entry.push("se", Json::num(fit.se(offset + j)));
        block.push(name, entry);
    }
    block
}

fn fit_report(fit: &FitResult, zi_label: &str) -> Json {
    let est = joint_estimates(fit);
    let p = fit.beta.len();

    let mut model = Json::obj();
    model.push("base", Json::Str(fit.base.to_string()));
    model.push("zi_type", Json::Str(zi_label.to_string()));
    model.push(
        "tau",
        match fit.tau {
            Some((t1, t2)) => Json::Arr(vec![Json::num(t1), Json::num(t2)]),
            None => Json::Null,
        },
    );

    let mut coefficients = Json::obj();
    coefficients.push("beta", coefficient_block(fit, &fit.beta_names, 0, &est));
    coefficients.push("alpha", coefficient_block(fit, &fit.alpha_names, p, &est));

    let k = fit.k();
    let mut report = Json::obj();
    report.push("model", model);
    report.push("coefficients", coefficients);
    report.push("loglik", Json::num(fit.loglik));
    report.push("aic", Json::num(modelsel::aic(fit.loglik, k)));
    report.push("bic", Json::num(modelsel::bic(fit.loglik, k, fit.n)));
    report.push("ess", Json::num(fit.ess));
    report.push("n", Json::Int(fit.n as i64));
    report.push("n0", Json::Int(fit.n0 as i64));
    report.push("converged", Json::Bool(fit.converged));
    report.push("iterations", Json::Int(fit.iterations as i64));
    report
}

fn fit_warnings(fit: &FitResult) {
    if fit.near_singular {
        eprintln!(
            "warning: joint information matrix is near-singular; standard errors may be unreliable"
        );
    }
    if fit.pseudo_inverse_used {
        eprintln!("warning: information matrix was singular; covariance from a pseudo-inverse");
    }
    if fit.separation {
        eprintln!("warning: possible complete separation in the inflation regression");
    }
    if fit.omega_unidentified {
        eprintln!("warning: data has no zero counts; inflation degree fixed at zero");
    }
}

fn zi_label(spec: &ZiSpec, fit: &FitResult) -> String {
    match spec {
        ZiSpec::EstimateTau => "estimated-tau".to_string(),
        ZiSpec::Fixed(ty) => {
            let _ = fit;
            ty.name()
        }
    }
}

pub fn cmd_fit(args: &FitArgs) -> Outcome {
    let prepared = || -> Result<(Dataset, BaseCount, ZiSpec), InputError> {
        let (dataset, _) = load_dataset(&args.data)?;
        let base = parse_base(&args.data.base)?;
        let spec = parse_zi_spec(&args.zi_type)?;
        Ok((dataset, base, spec))
    };
    let (dataset, base, spec) = match prepared() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::InputError;
        }
    };
    let opts = fit_options(args.max_iter);
    let fit = match fit_joint(&dataset, base, spec, &opts) {
        Ok(fit) => fit,
        Err(e @ Error::NonConvergence { .. }) => {
            eprintln!("error: {e}");
            return Outcome::NonConvergence;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::InputError;
        }
    };
    fit_warnings(&fit);
    let report = fit_report(&fit, &zi_label(&spec, &fit));
    if let Err(e) = write_output(args.output.as_deref(), &report.render()) {
        eprintln!("error: {e}");
        return Outcome::InputError;
    }
    if fit.converged {
        Outcome::Ok
    } else {
        Outcome::NonConvergence
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

enum GenKind {
    Const(f64),
    Uniform(f64, f64),
    UniformInt(i64, i64),
    Bernoulli(f64),
    Normal(f64, f64),
}

struct GenSpec {
    name: String,
    kind: GenKind,
}

fn parse_gen(s: &str) -> Result<GenSpec, InputError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || InputError::Invalid(format!("bad covariate generator '{s}'"));
    if parts.len() < 2 {
        return Err(bad());
    }
    let name = parts[0].to_string();
    let params: Vec<f64> = if parts.len() > 2 {
        parts[2]
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let kind = match (parts[1], params.as_slice()) {
        ("const", [v]) => GenKind::Const(*v),
        ("uniform", [a, b]) => GenKind::Uniform(*a, *b),
        ("uniformint", [a, b]) => GenKind::UniformInt(*a as i64, *b as i64),
        ("bernoulli", [p]) => GenKind::Bernoulli(*p),
        ("normal", [mu, sd]) => GenKind::Normal(*mu, *sd),
        _ => return Err(bad()),
    };
    Ok(GenSpec { name, kind })
}

fn draw_covariate(kind: &GenKind, rng: &mut ChaCha8Rng) -> f64 {
    use rand_chacha::rand_core::RngCore;
    let mut unit = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    match kind {
        GenKind::Const(v) => *v,
        GenKind::Uniform(a, b) => a + (b - a) * unit(),
        GenKind::UniformInt(a, b) => {
            let span = (b - a + 1) as f64;
            let v = a + (unit() * span).floor() as i64;
            (*b).min(v.max(*a)) as f64
        }
        GenKind::Bernoulli(p) => {
            if unit() < *p {
                1.0
            } else {
                0.0
            }
        }
        GenKind::Normal(mu, sd) => {
            // Box-Muller; two uniforms per draw keeps the stream simple
            let u1 = unit().max(f64::MIN_POSITIVE);
            let u2 = unit();
            mu + sd * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Outcome {
    match simulate_inner(args) {
        Ok(()) => Outcome::Ok,
        Err(e) => {
            eprintln!("error: {e}");
            Outcome::InputError
        }
    }
}

fn simulate_inner(args: &SimulateArgs) -> Result<(), InputError> {
    let base = parse_base(&args.base)?;
    let zi_type = parse_zi_type(&args.zi_type)?;
    let gens: Vec<GenSpec> = args
        .gen_specs
        .iter()
        .map(|s| parse_gen(s))
        .collect::<Result<_, _>>()?;

    // design columns: intercept (unless disabled) then the generated ones
    let intercept = !args.no_intercept;
    let p_expected = gens.len() + usize::from(intercept);
    if args.beta.len() != p_expected {
        return Err(InputError::Invalid(format!(
            "--beta has {} values but the design has {p_expected} columns ({}intercept + {} generated)",
            args.beta.len(),
            if intercept { "" } else { "no " },
            gens.len()
        )));
    }
    if let Some(alpha) = &args.alpha {
        if alpha.len() != 1 {
            return Err(InputError::Invalid(
                "--alpha takes exactly one value (the inflation intercept) when simulating"
                    .to_string(),
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::new();
    out.push_str(&args.response_name);
    for g in &gens {
        out.push(',');
        out.push_str(&g.name);
    }
    out.push('\n');

    for _ in 0..args.n {
        let xs: Vec<f64> = gens
            .iter()
            .map(|g| draw_covariate(&g.kind, &mut rng))
            .collect();
        let mut theta = 0.0;
        let mut idx = 0;
        if intercept {
            theta += args.beta[0];
            idx = 1;
        }
        for (j, &x) in xs.iter().enumerate() {
            theta += args.beta[idx + j] * x;
        }
        let y = match &args.alpha {
            None => base.sample(theta, &mut rng),
            Some(alpha) => {
                let model = ZiModel::new(base, zi_type, theta, alpha[0])
                    .map_err(|e| InputError::Invalid(e.to_string()))?;
                model
                    .sample_one(&mut rng)
                    .map_err(|e| InputError::Invalid(e.to_string()))?
            }
        };
        out.push_str(&y.to_string());
        for &x in &xs {
            out.push(',');
            out.push_str(&fmt_sig(x));
        }
        out.push('\n');
    }
    write_output(args.output.as_deref(), &out)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub fn cmd_compare(args: &CompareArgs) -> Outcome {
    match compare_inner(args) {
        Ok(any_ranked) => {
            if any_ranked {
                Outcome::Ok
            } else {
                Outcome::NonConvergence
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            Outcome::InputError
        }
    }
}

fn compare_inner(args: &CompareArgs) -> Result<bool, InputError> {
    let (dataset, _) = load_dataset(&args.data)?;
    let base = parse_base(&args.data.base)?;
    let opts = fit_options(args.max_iter);

    let mut fitted: Vec<(String, FitResult)> = Vec::new();
    let mut failed: Vec<(String, String)> = Vec::new();
    for ty in &args.types {
        let spec = parse_zi_spec(ty)?;
        match fit_joint(&dataset, base, spec, &opts) {
            Ok(fit) if fit.converged => fitted.push((ty.clone(), fit)),
            Ok(_) => failed.push((ty.clone(), "did not converge".to_string())),
            Err(e) => failed.push((ty.clone(), e.to_string())),
        }
    }

    let refs: Vec<&FitResult> = fitted.iter().map(|(_, f)| f).collect();
    let rows =
        modelsel::compare(&refs, &dataset).map_err(|e| InputError::Invalid(e.to_string()))?;

    // rows come back sorted; align them with the label the user asked for
    let labelled: Vec<(ComparisonRow, String)> = rows
        .into_iter()
        .map(|row| {
            let label = fitted
                .iter()
                .find(|(_, f)| (f.loglik - row.loglik).abs() < 1e-12 && f.k() == row.k)
                .map(|(l, _)| l.clone())
                .unwrap_or_else(|| row.name.clone());
            (row, label)
        })
        .collect();

    let mut json = Json::obj();
    json.push("base", Json::Str(base.to_string()));
    json.push("n", Json::Int(dataset.n() as i64));
    json.push("n0", Json::Int(dataset.n_zero() as i64));
    let mut arr = Vec::new();
    for (row, label) in &labelled {
        let mut j = Json::obj();
        j.push("zi_type", Json::Str(label.clone()));
        j.push(
            "tau",
            match row.tau {
                Some((t1, t2)) => Json::Arr(vec![Json::num(t1), Json::num(t2)]),
                None => Json::Null,
            },
        );
        j.push("loglik", Json::num(row.loglik));
        j.push("k", Json::Int(row.k as i64));
        j.push("aic", Json::num(row.aic));
        j.push("bic", Json::num(row.bic));
        j.push("rank", Json::Int(row.rank as i64));
        j.push("status", Json::Str("ok".to_string()));
        arr.push(j);
    }
    for (label, msg) in &failed {
        let mut j = Json::obj();
        j.push("zi_type", Json::Str(label.clone()));
        j.push("tau", Json::Null);
        j.push("loglik", Json::Null);
        j.push("k", Json::Null);
        j.push("aic", Json::Null);
        j.push("bic", Json::Null);
        j.push("rank", Json::Null);
        j.push("status", Json::Str(format!("failed: {msg}")));
        arr.push(j);
    }
    json.push("rows", Json::Arr(arr));
    write_output(args.output.as_deref(), &json.render())?;

    if let Some(csv_path) = &args.output_csv {
        let mut csv = String::from("zi_type,tau1,tau2,loglik,k,aic,bic,rank,status\n");
        for (row, label) in &labelled {
            let (t1, t2) = match row.tau {
                Some((a, b)) => (fmt_sig(a), fmt_sig(b)),
                None => (String::new(), String::new()),
            };
            csv.push_str(&format!(
                "{label},{t1},{t2},{},{},{},{},{},ok\n",
                fmt_sig(row.loglik),
                row.k,
                fmt_sig(row.aic),
                fmt_sig(row.bic),
                row.rank
            ));
        }
        for (label, msg) in &failed {
            csv.push_str(&format!(
                "{label},,,,,,,,failed: {}\n",
                msg.replace(',', ";")
            ));
        }
        std::fs::write(csv_path, csv)
            .map_err(|e| InputError::Io(format!("cannot write '{csv_path}': {e}")))?;
    }

    Ok(!labelled.is_empty())
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Outcome {
    match diagnose_inner(args) {
        Ok(()) => Outcome::Ok,
        Err(DiagnoseFailure::Input(e)) => {
            eprintln!("error: {e}");
            Outcome::InputError
        }
        Err(DiagnoseFailure::NonConvergence(e)) => {
            eprintln!("error: {e}");
            Outcome::NonConvergence
        }
    }
}

enum DiagnoseFailure {
    Input(String),
    NonConvergence(String),
}

fn diagnose_inner(args: &DiagnoseArgs) -> Result<(), DiagnoseFailure> {
    let (dataset, _) =
        load_dataset(&args.data).map_err(|e| DiagnoseFailure::Input(e.to_string()))?;
    let base = parse_base(&args.data.base).map_err(|e| DiagnoseFailure::Input(e.to_string()))?;
    let spec = parse_zi_spec(&args.zi_type).map_err(|e| DiagnoseFailure::Input(e.to_string()))?;
    let opts = fit_options(args.max_iter);
    let fit = fit_joint(&dataset, base, spec, &opts).map_err(|e| match e {
        Error::NonConvergence { .. } => DiagnoseFailure::NonConvergence(e.to_string()),
        _ => DiagnoseFailure::Input(e.to_string()),
    })?;
    if !fit.converged {
        return Err(DiagnoseFailure::NonConvergence(
            "fit did not converge; diagnostics need a converged fit".to_string(),
        ));
    }
    let rows = modelsel::diagnostics_pairs(&fit, &dataset)
        .map_err(|e| DiagnoseFailure::Input(e.to_string()))?;

    // covariate columns shown alongside, skipping the intercepts
    let mut cov_cols: Vec<(String, Vec<f64>)> = Vec::new();
    for (j, name) in dataset.beta_names().iter().enumerate() {
        if name != "intercept" {
            cov_cols.push((
                name.clone(),
                (0..dataset.n()).map(|i| dataset.x_beta()[(i, j)]).collect(),
            ));
        }
    }
    for (j, name) in dataset.alpha_names().iter().enumerate() {
        if name != "intercept" && !cov_cols.iter().any(|(n, _)| n == name) {
            cov_cols.push((
                name.clone(),
                (0..dataset.n())
                    .map(|i| dataset.x_alpha()[(i, j)])
                    .collect(),
            ));
        }
    }

    let mut out = String::from("pi0,pi0_tilde,logit_pi0,logit_pi0_tilde,omega");
    for (name, _) in &cov_cols {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for row in &rows {
        out.push_str(&format!(
            "{},{},{},{},{}",
            fmt_sig(row.pi0),
            fmt_sig(row.pi0_tilde),
            fmt_sig(row.logit_pi0),
            fmt_sig(row.logit_pi0_tilde),
            fmt_sig(row.omega)
        ));
        for (_, col) in &cov_cols {
            out.push(',');
            out.push_str(&fmt_sig(col[row.obs_index]));
        }
        out.push('\n');
    }
    write_output(args.output.as_deref(), &out).map_err(|e| DiagnoseFailure::Input(e.to_string()))
}
