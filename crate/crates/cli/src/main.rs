mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use warpspec::bounds::UNCHECKED_HYPOTHESES;
use warpspec::spectrum::{oscillation_trace, OscillationVerdict};
use warpspec::verify::{self, CriterionOutcome, Measured};
use warpspec::volume::{mu_delta, DeltaExponents, VolumeReport};
use warpspec::{
    barrier_lower_bound, cross_check_with_spectrum, ess_spectrum_bottom, lambda1_exterior_fd,
    mean_curvature_bounds, nonexistence_verdict, oscillation_threshold, volume_report, ConfigFile,
    CrossCheckReport, CurvatureBounds, ManifoldSpec, QuadratureConfig, SolverConfig,
    SpectrumEstimate, TestFunction,
};

use report::{emit_json, error_record, two_column_csv, write_text, ConfigEcho};

/// Weighted volumes, growth exponents and drift-Laplacian spectrum bottoms
/// on rotationally symmetric weighted manifolds.
#[derive(Debug, Parser)]
#[command(name = "warpspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ball volumes, total volume and growth exponents.
    Volume(VolumeArgs),
    /// Bottom of the spectrum outside a ball.
    Spectrum(SpectrumArgs),
    /// Mean-curvature bounds and nonexistence verdicts from a config file.
    Bounds(BoundsArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
struct ManifoldArgs {
    /// paper-equality | euclidean | gaussian-soliton | hyperbolic-like | table
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Cap radius of the paper-equality family.
    #[arg(long)]
    r0: Option<f64>,
    /// Curvature scale of the hyperbolic-like family.
    #[arg(long)]
    k: Option<f64>,
    /// Manifold dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VolumeArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    /// Radii for Vol_f(B_r); repeat or comma-separate.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 5.0, 10.0])]
    r: Vec<f64>,
    /// Largest radius of the growth-exponent grid.
    #[arg(long, default_value_t = 1e3)]
    r_max: f64,
    /// Annulus width for the delta-exponents.
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    /// Radius of the excised ball.
    #[arg(long, default_value_t = 1.0)]
    inner: f64,
    /// Also estimate inf sigma_ess as the supremum over inner radii.
    #[arg(long)]
    ess: bool,
    /// Barrier exponent for the lower bound.
    #[arg(long)]
    beta: Option<f64>,
    /// Outer radius of a test function `e^{h_j} chi_r`; enables the Rayleigh quotient.
    #[arg(long)]
    r: Option<f64>,
    /// Cutoff ramp width of the test function.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Slope of `h_j`.
    #[arg(long, default_value_t = 0.0)]
    tf_alpha: f64,
    /// Turning point of `h_j` (defaults to the outer radius).
    #[arg(long)]
    j: Option<f64>,
    /// Writes `<prefix>_chi.csv` and `<prefix>_h.csv` for the test function.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// Writes the radial ODE solution as CSV `t,y,log10_scale`.
    #[arg(long)]
    emit_ode_trace: Option<PathBuf>,
    /// Spectral parameter of the trace (defaults to the threshold's upper edge).
    #[arg(long)]
    trace_lambda: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Config file with n, m, mu, ric_inf, grad_inf_sq, ric_nm_inf.
    #[arg(long)]
    config: PathBuf,
    /// Recompute the bounds with the numerical inf sigma_ess of the
    /// manifold described in the same file.
    #[arg(long)]
    cross_check: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Subset of criteria to run, e.g. `--criteria 1,3`.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    #[command(flatten)]
    output: OutputArgs,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(ConfigFile::parse(&text)?)
        }
        None => Ok(ConfigFile::default()),
    }
}

/// The config file with manifold flags applied on top.
fn resolve(args: &ManifoldArgs) -> Result<ConfigFile> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(family) = &args.family {
        cfg.set("family", family.as_str())?;
    }
    for (key, value) in [("alpha", args.alpha), ("r0", args.r0), ("k", args.k)] {
        if let Some(v) = value {
            cfg.set(key, v.to_string())?;
        }
    }
    if let Some(n) = args.n {
        cfg.set("n", n.to_string())?;
    }
    Ok(cfg)
}

fn echo(
    config_file: Option<&Path>,
    cfg: &ConfigFile,
    arguments: Value,
    manifold: Option<&ManifoldSpec>,
    quadrature: QuadratureConfig,
    solver: Option<SolverConfig>,
) -> ConfigEcho {
    let arguments = match arguments {
        Value::Object(map) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    ConfigEcho {
        config_file: config_file.map(|p| p.display().to_string()),
        settings: cfg.to_map(),
        arguments,
        manifold: manifold.cloned(),
        quadrature,
        solver,
    }
}

#[derive(Debug, Serialize)]
struct VolumeResult {
    #[serde(flatten)]
    report: VolumeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_exponents: Option<DeltaExponents>,
}

fn run_volume(args: &VolumeArgs) -> Result<()> {
    let cfg = resolve(&args.manifold)?;
    let spec = cfg.manifold()?;
    let q = cfg.quadrature(QuadratureConfig::default())?;
    let report = volume_report(&spec, &args.r, args.r_max, &q)?;
    let delta_exponents = match args.delta {
        Some(d) => Some(mu_delta(&spec, d, args.r_max, &q)?),
        None => None,
    };
    if let Some(path) = &args.output.out_csv {
        write_text(path, &report.to_csv())?;
    }
    let arguments = json!({ "r": args.r, "r_max": args.r_max, "delta": args.delta });
    let config = echo(
        args.manifold.config.as_deref(),
        &cfg,
        arguments,
        Some(&spec),
        q,
        None,
    );
    let result = VolumeResult {
        report,
        delta_exponents,
    };
    emit_json(
        &report::report("volume", &config, result),
        args.output.out_json.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct TestFunctionResult {
    function: TestFunction,
    rayleigh_quotient: f64,
}

#[derive(Debug, Serialize)]
struct TraceResult {
    lambda: f64,
    path: String,
    points: usize,
    verdict: OscillationVerdict,
}

#[derive(Debug, Serialize)]
struct SpectrumResult {
    /// Bracket from the oscillation threshold at `inner`.
    lambda1_lower: f64,
    lambda1_upper: f64,
    oscillation: SpectrumEstimate,
    finite_difference: SpectrumEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    barrier_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ess: Option<SpectrumEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_function: Option<TestFunctionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_trace: Option<TraceResult>,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn run_spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = resolve(&args.manifold)?;
    let spec = cfg.manifold()?;
    let q = cfg.quadrature(QuadratureConfig::default())?;
    let solver = cfg.solver(SolverConfig::default())?;

    let oscillation = oscillation_threshold(&spec, args.inner, &solver)?;
    let finite_difference = lambda1_exterior_fd(&spec, args.inner, &solver)?;
    let barrier = match args.beta {
        Some(beta) => Some(barrier_lower_bound(&spec, args.inner, beta)?),
        None => None,
    };
    let ess = if args.ess {
        Some(ess_spectrum_bottom(&spec, &solver)?)
    } else {
        None
    };

    let test_function = match args.r {
        Some(r) => {
            let tf = TestFunction::new(
                args.inner,
                args.tf_alpha,
                args.j.unwrap_or(r),
                r,
                args.delta,
            )?;
            if let Some(prefix) = &args.plot_data {
                let samples = tf.samples(1001);
                let chi = two_column_csv(("r", "chi"), samples.iter().map(|&(t, c, _)| (t, c)));
                let h = two_column_csv(("r", "h"), samples.iter().map(|&(t, _, h)| (t, h)));
                write_text(&with_suffix(prefix, "_chi.csv"), &chi)?;
                write_text(&with_suffix(prefix, "_h.csv"), &h)?;
            }
            Some(TestFunctionResult {
                rayleigh_quotient: tf.rayleigh_quotient(&spec, &q)?,
                function: tf,
            })
        }
        None => {
            if args.plot_data.is_some() {
                bail!("--plot-data needs a test function (--r)");
            }
            None
        }
    };

    let ode_trace = match &args.emit_ode_trace {
        Some(path) => {
            let lambda = args.trace_lambda.unwrap_or(oscillation.lambda1_upper);
            let (verdict, trace) = oscillation_trace(&spec, args.inner, lambda, &solver)?;
            let mut csv = String::from("t,y,log10_scale\n");
            for p in &trace {
                csv.push_str(&format!("{},{},{}\n", p.t, p.y, p.log10_scale));
            }
            write_text(path, &csv)?;
            Some(TraceResult {
                lambda,
                path: path.display().to_string(),
                points: trace.len(),
                verdict,
            })
        }
        None => None,
    };

    if let Some(path) = &args.output.out_csv {
        let rows = finite_difference
            .diagnostics
            .truncated
            .iter()
            .map(|t| (t.radius, t.eigenvalue));
        write_text(path, &two_column_csv(("radius", "eigenvalue"), rows))?;
    }

    let arguments = json!({
        "inner": args.inner,
        "ess": args.ess,
        "beta": args.beta,
        "r": args.r,
        "delta": args.delta,
        "tf_alpha": args.tf_alpha,
        "j": args.j,
        "trace_lambda": args.trace_lambda,
    });
    let config = echo(
        args.manifold.config.as_deref(),
        &cfg,
        arguments,
        Some(&spec),
        q,
        Some(solver),
    );
    let result = SpectrumResult {
        lambda1_lower: oscillation.lambda1_lower,
        lambda1_upper: oscillation.lambda1_upper,
        oscillation,
        finite_difference,
        barrier_lower_bound: barrier,
        ess,
        test_function,
        ode_trace,
    };
    emit_json(
        &report::report("spectrum", &config, result),
        args.output.out_json.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct Verdict {
    k: f64,
    regime: warpspec::GrowthRegime,
    nonexistence: bool,
}

#[derive(Debug, Serialize)]
struct BoundsResult {
    bounds: CurvatureBounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<CrossCheckReport>,
    assumptions: Vec<&'static str>,
}

fn run_bounds(args: &BoundsArgs) -> Result<()> {
    let cfg = load_config(Some(&args.config))?;
    let data = cfg.hypersurface()?;
    let bounds = mean_curvature_bounds(&data)?;
    let verdict = match cfg.regime()? {
        Some((k, regime)) => Some(Verdict {
            k,
            regime,
            nonexistence: nonexistence_verdict(k, regime)?,
        }),
        None => None,
    };
    let q = cfg.quadrature(QuadratureConfig::default())?;
    let (spec, solver, cross_check) = if args.cross_check {
        let spec = cfg.manifold()?;
        let solver = cfg.solver(SolverConfig::default())?;
        let report = cross_check_with_spectrum(&spec, &data, &solver)?;
        (Some(spec), Some(solver), Some(report))
    } else {
        (None, None, None)
    };
    if let Some(path) = &args.output.out_csv {
        let mut csv = String::from("quantity,value\n");
        csv.push_str(&format!(
            "hf_sq_lower,{}\nhf_sq_upper,{}\n",
            bounds.hf_sq_lower, bounds.hf_sq_upper
        ));
        csv.push_str(&format!(
            "consistent,{}\nforced_f_minimal,{}\n",
            bounds.consistent, bounds.forced_f_minimal
        ));
        write_text(path, &csv)?;
    }
    let arguments = json!({ "cross_check": args.cross_check });
    let config = echo(
        Some(&args.config),
        &cfg,
        arguments,
        spec.as_ref(),
        q,
        solver,
    );
    let result = BoundsResult {
        bounds,
        verdict,
        cross_check,
        assumptions: UNCHECKED_HYPOTHESES.to_vec(),
    };
    emit_json(
        &report::report("bounds", &config, result),
        args.output.out_json.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct VerifyResult {
    pass: bool,
    criteria: Vec<CriterionOutcome>,
}

fn measured_text(m: &Measured) -> String {
    match m {
        Measured::Value(v) => v.to_string(),
        Measured::Count { passed, total } => format!("{passed}/{total}"),
        Measured::Flag(b) => b.to_string(),
        Measured::Error { error } => format!("error: {error}"),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Returns whether every selected criterion passed.
fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let ids: Vec<u8> = if args.criteria.is_empty() {
        verify::CRITERIA.to_vec()
    } else {
        args.criteria.clone()
    };
    let mut criteria = Vec::with_capacity(ids.len());
    for id in &ids {
        let outcome = verify::run_criterion(*id).with_context(|| format!("no criterion {id}"))?;
        eprintln!("{}", outcome.summary_line());
        for c in &outcome.checks {
            eprintln!(
                "    [{}] {:<48} {:<24} expected {}",
                if c.pass { "ok" } else { "!!" },
                c.label,
                measured_text(&c.measured),
                c.expected
            );
        }
        criteria.push(outcome);
    }
    let pass = criteria.iter().all(|c| c.pass);
    if let Some(path) = &args.output.out_csv {
        let mut csv = String::from("criterion,label,measured,expected,pass\n");
        for c in &criteria {
            for check in &c.checks {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.id,
                    csv_field(&check.label),
                    csv_field(&measured_text(&check.measured)),
                    csv_field(&check.expected),
                    check.pass
                ));
            }
        }
        write_text(path, &csv)?;
    }
    let arguments = json!({ "criteria": ids, "seed": verify::SEED });
    let config = echo(
        None,
        &ConfigFile::default(),
        arguments,
        None,
        QuadratureConfig::default(),
        Some(SolverConfig::default()),
    );
    emit_json(
        &report::report("verify", &config, VerifyResult { pass, criteria }),
        args.output.out_json.as_deref(),
    )?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Volume(a) => run_volume(a).map(|_| true),
        Command::Spectrum(a) => run_spectrum(a).map(|_| true),
        Command::Bounds(a) => run_bounds(a).map(|_| true),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::FAILURE
        }
    }
}
