use log::info;

use elkit_core::correlations::{log_moment_coincident, log_moment_distinct, rho};
use elkit_core::ensemble::{mc_moment, sample, SampleConfig};
use elkit_core::kernels::{d_n, i_n, residual, s_n, EllipticParams};
use elkit_core::moments::{
    asymptotic_moment, c_script, c_script_closed, conjecture_moment, log_c_tau, log_conjecture_constant,
    log_exact_ginibre_moment, log_multipoint_asymptotic,
};
use elkit_core::specfun::QuadratureSpec;
use elkit_core::verify::{run_suite, VerifyOptions, SUITES};

use crate::args::{Command, Format, Opts};
use crate::table::{self, Cell, Table};
use crate::CliError;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_SAMPLES: usize = 100_000;
const DEFAULT_STREAMS: usize = 64;

/// Options with defaults applied.
struct Resolved {
    tau: f64,
    ns: Vec<usize>,
    ell: f64,
    mus: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    seed: u64,
    samples: Option<usize>,
    streams: usize,
    quad: QuadratureSpec,
    threads: Option<usize>,
}

fn resolve(o: &Opts, threads: Option<usize>) -> Result<Resolved, CliError> {
    let mut quad = QuadratureSpec::default();
    if let Some(t) = o.rel_tol {
        quad.rel_tol = t;
    }
    if let Some(t) = o.abs_tol {
        quad.abs_tol = t;
    }
    quad.validate()?;
    let nonempty = |v: &Option<Vec<f64>>, name: &str, default: f64| -> Result<Vec<f64>, CliError> {
        match v {
            Some(v) if v.is_empty() => Err(CliError::Usage(format!("--{name} needs at least one value"))),
            Some(v) => Ok(v.clone()),
            None => Ok(vec![default]),
        }
    };
    let ns = o.n.clone().unwrap_or_else(|| vec![10]);
    if ns.is_empty() {
        return Err(CliError::Usage("--n needs at least one value".into()));
    }
    if o.samples == Some(0) {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    if o.streams == Some(0) {
        return Err(CliError::Usage("--streams must be positive".into()));
    }
    Ok(Resolved {
        tau: o.tau.unwrap_or(0.0),
        ns,
        ell: o.ell.unwrap_or(1.0),
        mus: nonempty(&o.mu, "mu", 0.0)?,
        xs: nonempty(&o.x, "x", 0.0)?,
        ys: nonempty(&o.y, "y", 0.0)?,
        seed: o.seed.unwrap_or(DEFAULT_SEED),
        samples: o.samples,
        streams: o.streams.unwrap_or(DEFAULT_STREAMS),
        quad,
        threads,
    })
}

fn integer_ell(ell: f64) -> Option<usize> {
    (ell >= 1.0 && ell.fract() == 0.0 && ell <= 64.0).then_some(ell as usize)
}

/// `ℓ` for a product over several points must be 1.
fn check_multipoint(r: &Resolved) -> Result<(), CliError> {
    if r.mus.len() > 1 && r.ell != 1.0 {
        return Err(CliError::Usage("several --mu values describe ∏|det(A - μ_i)|; use --ell 1".into()));
    }
    Ok(())
}

/// Exact `log E ∏|det(A - μ_i)|^ℓ` by every applicable method.
fn exact_methods(r: &Resolved, n: usize) -> Result<Vec<(&'static str, f64, f64)>, CliError> {
    let mut out = Vec::new();
    if r.mus.len() > 1 {
        let v = log_moment_distinct(EllipticParams::new(r.tau, n)?, &r.mus, &r.quad)?;
        out.push(("bridge-distinct", v.log_abs, v.value()));
        return Ok(out);
    }
    let mu = r.mus[0];
    if let Some(ell) = integer_ell(r.ell) {
        let v = log_moment_coincident(EllipticParams::new(r.tau, n)?, mu, ell, &r.quad)?;
        out.push(("bridge", v.log_abs, v.value()));
    }
    if r.tau == 0.0 && mu == 0.0 && (r.ell.fract() == 0.0 || n % 2 == 0) {
        let l = log_exact_ginibre_moment(n, r.ell)?;
        out.push(("selberg", l, l.exp()));
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!(
            "no exact method for ell = {} at tau = {}, mu = {mu}, N = {n}: non-integer exponents need tau = 0, mu = 0 and even N",
            r.ell, r.tau
        )));
    }
    Ok(out)
}

fn exact_log(r: &Resolved, n: usize) -> Result<Option<f64>, CliError> {
    if !(0.0..1.0).contains(&r.tau) {
        info!("tau = {} is outside the kernel range; Monte Carlo only", r.tau);
        return Ok(None);
    }
    match exact_methods(r, n) {
        Ok(m) => Ok(m.first().map(|m| m.1)),
        Err(CliError::Usage(msg)) => {
            info!("{msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn asymptotic_log(r: &Resolved, n: usize) -> Result<Option<f64>, CliError> {
    if !(0.0..1.0).contains(&r.tau) {
        return Ok(None);
    }
    if r.mus.len() > 1 {
        return Ok(Some(log_multipoint_asymptotic(r.tau, &r.mus, n)?));
    }
    let mu = r.mus[0];
    Ok(Some(match integer_ell(r.ell) {
        Some(ell) => asymptotic_moment(r.tau, mu, ell, n)?.log_value(),
        None => conjecture_moment(r.tau, mu, r.ell, n)?.log_value(),
    }))
}

fn kernel(r: &Resolved) -> Result<Table, CliError> {
    let mut t = Table::new(table::KERNEL);
    for &n in &r.ns {
        let p = EllipticParams::new(r.tau, n)?;
        for &x in &r.xs {
            for &y in &r.ys {
                t.push(vec![
                    n.into(),
                    r.tau.into(),
                    x.into(),
                    y.into(),
                    s_n(p, x, y, &r.quad)?.into(),
                    d_n(p, x, y, &r.quad)?.into(),
                    i_n(p, x, y, &r.quad)?.into(),
                    residual(p, x, y, &r.quad)?.into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn rho_table(r: &Resolved) -> Result<Table, CliError> {
    let mut t = Table::new(table::RHO);
    for &n in &r.ns {
        let v = rho(EllipticParams::new(r.tau, n)?, &r.xs, &r.quad)?;
        t.push(vec![n.into(), r.tau.into(), Cell::Nums(r.xs.clone()), v.into()]);
    }
    Ok(t)
}

fn moment_exact(r: &Resolved) -> Result<Table, CliError> {
    check_multipoint(r)?;
    let mut t = Table::new(table::MOMENT_EXACT);
    for &n in &r.ns {
        for (method, log, value) in exact_methods(r, n)? {
            t.push(vec![
                n.into(),
                r.tau.into(),
                r.ell.into(),
                Cell::Nums(r.mus.clone()),
                method.into(),
                log.into(),
                value.into(),
            ]);
        }
    }
    Ok(t)
}

fn comparison_row(r: &Resolved, n: usize, exact: Option<f64>, asym: Option<f64>, mc: Option<(f64, f64)>) -> Vec<Cell> {
    let ratio = exact.zip(asym).map(|(e, a)| (e - a).exp());
    vec![
        n.into(),
        r.tau.into(),
        r.ell.into(),
        Cell::Nums(r.mus.clone()),
        exact.into(),
        asym.into(),
        mc.map(|m| m.0).into(),
        mc.map(|m| m.1).into(),
        ratio.into(),
    ]
}

fn moment_asymptotic(r: &Resolved) -> Result<Table, CliError> {
    check_multipoint(r)?;
    if !(0.0..1.0).contains(&r.tau) {
        return Err(CliError::Usage(format!("the prediction needs tau in [0, 1), got {}", r.tau)));
    }
    let mut t = Table::new(table::COMPARISON);
    for &n in &r.ns {
        let asym = asymptotic_log(r, n)?;
        let exact = exact_log(r, n)?;
        t.push(comparison_row(r, n, exact, asym, None));
    }
    Ok(t)
}

fn sampling(r: &Resolved, n: usize, default_samples: usize) -> Result<SampleConfig, CliError> {
    let mut c = SampleConfig::new(r.tau, n, r.seed, r.samples.unwrap_or(default_samples))?;
    c.n_streams = r.streams;
    c.threads = r.threads;
    Ok(c)
}

fn moment_mc(r: &Resolved) -> Result<Table, CliError> {
    check_multipoint(r)?;
    let mut t = Table::new(table::COMPARISON);
    for &n in &r.ns {
        let est = mc_moment(&sampling(r, n, DEFAULT_SAMPLES)?, r.ell, &r.mus)?;
        if est.n_singular > 0 {
            info!("N = {n}: {} singular draws left out", est.n_singular);
        }
        let exact = exact_log(r, n)?;
        let asym = asymptotic_log(r, n)?;
        t.push(comparison_row(r, n, exact, asym, Some((est.log_mean, est.stderr_rel))));
    }
    Ok(t)
}

fn constants(r: &Resolved) -> Result<Table, CliError> {
    if !(r.ell > -1.0) {
        return Err(CliError::Usage(format!("--ell must exceed -1, got {}", r.ell)));
    }
    let mut t = Table::new(table::CONSTANTS);
    let int = integer_ell(r.ell);
    let c_tau = int.map(|l| log_c_tau(r.tau, l)).transpose()?;
    let c_jet = match int {
        Some(l) if l <= elkit_core::skewalg::MAX_JET_HALF_DIM => Some(c_script(l)?),
        _ => None,
    };
    let closed = int.map(c_script_closed);
    let conj = log_conjecture_constant(r.tau, r.ell)?;
    t.push(vec![r.ell.into(), r.tau.into(), c_tau.into(), c_jet.into(), closed.into(), conj.into()]);
    Ok(t)
}

fn sample_table(r: &Resolved) -> Result<Table, CliError> {
    let mut t = Table::new(table::SAMPLE);
    for &n in &r.ns {
        let c = sampling(r, n, 1)?;
        for (s, d) in c.draws() {
            let a = sample(&c, s, d);
            for i in 0..n {
                for j in 0..n {
                    t.push(vec![s.into(), d.into(), i.into(), j.into(), a[(i, j)].into()]);
                }
            }
        }
    }
    Ok(t)
}

fn verify(o: &Opts, r: &Resolved) -> Result<(Table, bool), CliError> {
    let suite = o.suite.clone().unwrap_or_else(|| "all".into());
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
    let mut opts = VerifyOptions { max_n: o.max_n, threads: r.threads, quad: r.quad, ..Default::default() };
    if let Some(s) = o.seed {
        opts.seed = s;
    }
    if let Some(s) = o.samples {
        opts.samples = s;
        opts.count_samples = s;
    }
    let mut t = Table::new(table::VERIFY);
    let mut all = true;
    for name in names {
        let report = run_suite(name, &opts)?;
        let k = SUITES.iter().position(|s| *s == name).map_or(0, |k| k + 1);
        eprintln!("{} criterion {k} ({name}): {}", if report.passed() { "PASS" } else { "FAIL" }, report.summary());
        all &= report.passed();
        for c in report.checks {
            t.push(vec![c.suite.into(), c.check.into(), c.passed.into(), c.detail.into()]);
        }
    }
    Ok((t, all))
}

/// Run a parsed command; `Ok(false)` means a verification suite failed.
pub fn execute(cmd: &Command, threads: Option<usize>) -> Result<bool, CliError> {
    let o = cmd.opts();
    let r = resolve(o, threads)?;
    let (table, ok) = match cmd {
        Command::Kernel(_) => (kernel(&r)?, true),
        Command::Rho(_) => (rho_table(&r)?, true),
        Command::MomentExact(_) => (moment_exact(&r)?, true),
        Command::MomentAsymptotic(_) => (moment_asymptotic(&r)?, true),
        Command::MomentMc(_) => (moment_mc(&r)?, true),
        Command::Constants(_) => (constants(&r)?, true),
        Command::Sample(_) => (sample_table(&r)?, true),
        Command::Verify(_) => verify(o, &r)?,
    };
    table.emit(o.format.unwrap_or(Format::Csv), o.output.as_deref())?;
    Ok(ok)
}
