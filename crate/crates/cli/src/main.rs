use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracspec::eigen::Spectrum;
use fracspec::estimates::{
    ball_samples, cutoff_estimate_check, default_mixed_pairs, mixed_term_check, plane_wave_check, CutoffCheck,
    MixedCheck, PlaneWaveCheck,
};
use fracspec::geometry::{check_geometry, Domain};
use fracspec::operator::Discretization;
use fracspec::report::{format_number, round_sig, BoundReport, BoundRow, Format, Refinement, CSV_COLUMNS};
use fracspec::suite::{run_suite, SUITE_NAMES};
use fracspec::{ConstantsTable, FractionalOrder};
use serde::Serialize;

/// Environment variable capping the worker threads.
const THREADS_VAR: &str = "FRACSPEC_THREADS";

#[derive(Parser)]
#[command(name = "fracspec", version, about = "Spectra of the discretized fractional Laplacian and eigenvalue-sum bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension-dependent constants for one (N, s)
    Constants {
        #[arg(long = "N", value_name = "N", value_parser = parse_dim)]
        n: usize,
        #[arg(long, value_parser = parse_order)]
        s: FractionalOrder,
        #[arg(long)]
        json: bool,
    },
    /// Inradius, circumradius test and level-set constant of a domain
    Geometry {
        #[arg(long, value_parser = parse_domain)]
        domain: Domain,
        #[arg(long)]
        json: bool,
    },
    /// Lowest eigenvalues, optionally extrapolated from h, 2h, 4h
    Eig(EigArgs),
    /// Per-k report of eigenvalue sums and bounds
    Bounds {
        #[command(flatten)]
        problem: Problem,
        /// exit with status 1 if the lower/upper comparison fails
        #[arg(long)]
        check: bool,
    },
    /// Measured values of one pointwise estimate against its bound
    Estimate {
        #[arg(value_enum)]
        kind: EstimateKind,
        #[arg(long = "N", value_name = "N", value_parser = parse_ball_dim)]
        n: usize,
        #[arg(long, value_parser = parse_order)]
        s: FractionalOrder,
        #[arg(long)]
        json: bool,
    },
    /// Run verification suites
    Verify {
        /// suite name or `all`
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: String,
    },
    /// Bounds over the cartesian product of s and k values
    Sweep {
        #[arg(long, value_parser = parse_domain)]
        domain: Domain,
        #[arg(long = "s", value_parser = parse_order, value_delimiter = ',', required = true)]
        s_values: Vec<FractionalOrder>,
        #[arg(long = "k", value_parser = parse_count, value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
        #[arg(long, value_parser = parse_spacing)]
        h: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Problem {
    #[arg(long, value_parser = parse_domain)]
    domain: Domain,
    #[arg(long, value_parser = parse_order)]
    s: FractionalOrder,
    /// finest grid spacing
    #[arg(long, value_parser = parse_spacing)]
    h: f64,
    #[arg(long = "k-max", value_parser = parse_count)]
    k_max: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EigArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: Domain,
    #[arg(long, value_parser = parse_order)]
    s: FractionalOrder,
    /// finest grid spacing
    #[arg(long, value_parser = parse_spacing)]
    h: f64,
    /// number of eigenvalues
    #[arg(long, visible_alias = "k-max", value_parser = parse_count)]
    k: usize,
    /// also solve at 2h and 4h and extrapolate
    #[arg(long)]
    extrapolate: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateKind {
    /// symbol of a plane wave at |z| = 1, 2, 4
    PlaneWave,
    /// the fractional Laplacian of the cutoff at 100 interior points
    Cutoff,
    /// the cross term of a modulated cutoff at 20 (x, z) pairs
    MixedTerm,
}

#[derive(Args)]
struct Output {
    /// output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// defaults to the extension of --out, JSON otherwise
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl Output {
    fn format(&self) -> Format {
        match (self.format, &self.out) {
            (Some(OutFormat::Json), _) => Format::Json,
            (Some(OutFormat::Csv), _) => Format::Csv,
            (None, Some(p)) => Format::from_path(p),
            (None, None) => Format::Json,
        }
    }

    /// Fail before any computation when the output directory is missing.
    fn preflight(&self) -> Result<()> {
        match self.out.as_ref().and_then(|p| p.parent()) {
            Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
                bail!("output directory {} does not exist", dir.display())
            }
            _ => Ok(()),
        }
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn parse_order(v: &str) -> std::result::Result<FractionalOrder, String> {
    let s: f64 = v.parse().map_err(|e| format!("{e}"))?;
    FractionalOrder::new(s).map_err(|e| e.to_string())
}

fn parse_dim(v: &str) -> std::result::Result<usize, String> {
    match v.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a dimension >= 1, got '{v}'")),
    }
}

fn parse_ball_dim(v: &str) -> std::result::Result<usize, String> {
    match v {
        "1" => Ok(1),
        "2" => Ok(2),
        _ => Err(format!("expected 1 or 2, got '{v}'")),
    }
}

fn parse_count(v: &str) -> std::result::Result<usize, String> {
    match v.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected an integer >= 1, got '{v}'")),
    }
}

fn parse_spacing(v: &str) -> std::result::Result<f64, String> {
    match v.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(h),
        _ => Err(format!("expected a spacing > 0, got '{v}'")),
    }
}

fn parse_suite(v: &str) -> std::result::Result<String, String> {
    if v == "all" || SUITE_NAMES.contains(&v) {
        Ok(v.to_string())
    } else {
        Err(format!("unknown suite; expected `all` or one of {}", SUITE_NAMES.join(", ")))
    }
}

fn parse_domain(v: &str) -> std::result::Result<Domain, String> {
    Domain::parse_spec(v).map_err(|e| e.to_string())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).with_context(|| format!("{THREADS_VAR}='{raw}' is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().fold(String::new(), |mut out, (k, v)| {
        let _ = writeln!(out, "{k:<width$}  {v}");
        out
    })
}

fn constants(n: usize, s: FractionalOrder, json: bool) -> Result<()> {
    let t = ConstantsTable::compute(n, s)?;
    if json {
        let mut t = t;
        t.c_ns = round_sig(t.c_ns);
        t.omega_nm1 = round_sig(t.omega_nm1);
        t.vol_b1 = round_sig(t.vol_b1);
        t.e_n = t.e_n.map(round_sig);
        t.b_ns = round_sig(t.b_ns);
        println!("{}", serde_json::to_string_pretty(&t)?);
        return Ok(());
    }
    let mut rows = vec![
        ("N", n.to_string()),
        ("s", format_number(s.get())),
        ("c_ns", format_number(t.c_ns)),
        ("omega_nm1", format_number(t.omega_nm1)),
        ("vol_b1", format_number(t.vol_b1)),
    ];
    if let Some(e) = t.e_n {
        rows.push(("e_n", format_number(e)));
    }
    rows.push(("b_ns", format_number(t.b_ns)));
    print!("{}", table(&rows));
    Ok(())
}

fn geometry(d: &Domain, json: bool) -> Result<()> {
    let g = check_geometry(d)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&g)?);
        return Ok(());
    }
    let center: Vec<String> = g.center.iter().map(|&c| format_number(c)).collect();
    print!(
        "{}",
        table(&[
            ("domain", d.spec_string()),
            ("N", d.dim().to_string()),
            ("volume", format_number(g.volume)),
            ("R", format_number(g.r)),
            ("center", center.join(",")),
            ("circum_ok", g.circum_ok.to_string()),
            ("max_boundary_distance", format_number(g.max_boundary_distance)),
            ("c0", format_number(g.c0)),
        ])
    );
    Ok(())
}

#[derive(Serialize)]
struct EigMeta {
    domain: String,
    #[serde(rename = "N")]
    n: usize,
    s: f64,
    /// finest spacing first, then the coarser levels when extrapolating
    h: Vec<f64>,
    dims: Vec<usize>,
    orthonormality_residual: f64,
}

#[derive(Serialize)]
struct EigReport {
    meta: EigMeta,
    eigenvalues: Vec<f64>,
    /// observed convergence orders, `null` where the triple was flagged
    orders: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    errors: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    flagged: Vec<bool>,
    /// raw eigenvalues at h, 2h, 4h
    #[serde(skip_serializing_if = "Vec::is_empty")]
    levels: Vec<Vec<f64>>,
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| round_sig(x)).collect()
}

fn eig_report(a: &EigArgs) -> Result<EigReport> {
    let meta = |h: Vec<f64>, dims: Vec<usize>, orth: f64| EigMeta {
        domain: a.domain.spec_string(),
        n: a.domain.dim(),
        s: a.s.get(),
        h: rounded(&h),
        dims,
        orthonormality_residual: round_sig(orth),
    };
    if !a.extrapolate {
        let disc = Discretization::new(&a.domain, a.s, a.h)?;
        let sp = disc.spectrum(a.k)?;
        return Ok(EigReport {
            meta: meta(vec![sp.h], vec![disc.dim()], sp.orthonormality_residual()),
            eigenvalues: rounded(&sp.eigenvalues),
            orders: vec![],
            errors: vec![],
            flagged: vec![],
            levels: vec![],
        });
    }
    let r = Refinement::compute(&a.domain, a.s, a.h, a.k)?;
    let levels: Vec<&Spectrum> = r.spectra.iter().rev().collect();
    Ok(EigReport {
        meta: meta(
            levels.iter().map(|sp| sp.h).collect(),
            r.dims.iter().rev().copied().collect(),
            r.spectra[2].orthonormality_residual(),
        ),
        eigenvalues: rounded(&r.values()),
        orders: r.extrapolated.iter().map(|e| e.order.map(round_sig)).collect(),
        errors: r.extrapolated.iter().map(|e| round_sig(e.error)).collect(),
        flagged: r.extrapolated.iter().map(|e| e.flagged).collect(),
        levels: levels.iter().map(|sp| rounded(&sp.eigenvalues)).collect(),
    })
}

fn eig(a: &EigArgs) -> Result<()> {
    a.output.preflight()?;
    let report = eig_report(a)?;
    let text = match a.output.format() {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv if !a.extrapolate => {
            let mut out = String::from("k,lambda\n");
            for (i, l) in report.eigenvalues.iter().enumerate() {
                let _ = writeln!(out, "{},{}", i + 1, format_number(*l));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("k,lambda,error,order,flagged,lambda_h,lambda_2h,lambda_4h\n");
            for (i, l) in report.eigenvalues.iter().enumerate() {
                let order = report.orders[i].map(format_number).unwrap_or_default();
                let raw: Vec<String> = report.levels.iter().map(|lv| format_number(lv[i])).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{order},{},{}",
                    i + 1,
                    format_number(*l),
                    format_number(report.errors[i]),
                    report.flagged[i],
                    raw.join(",")
                );
            }
            out
        }
    };
    a.output.write(&text)
}

#[derive(Serialize)]
#[serde(untagged)]
enum EstimateResult {
    PlaneWave(Vec<PlaneWaveCheck>),
    Cutoff(Vec<CutoffCheck>),
    Mixed(MixedCheck),
}

/// Tolerance on the extrapolated plane-wave symbol.
const PLANE_WAVE_TOL: f64 = 1e-3;

fn estimate(kind: EstimateKind, n: usize, s: FractionalOrder, json: bool) -> Result<bool> {
    let ball = if n == 1 { Domain::interval(-1.0, 1.0)? } else { Domain::unit_disk() };
    let (result, ok) = match kind {
        EstimateKind::PlaneWave => {
            let checks = [1.0, 2.0, 4.0].iter().map(|&z| plane_wave_check(n, s, z)).collect::<fracspec::Result<Vec<_>>>()?;
            let ok = checks.iter().all(|c| c.relative_error <= PLANE_WAVE_TOL);
            (EstimateResult::PlaneWave(checks), ok)
        }
        EstimateKind::Cutoff => {
            let points = ball_samples(n, 100, 0.99);
            let checks = [0.1, 0.25]
                .iter()
                .map(|&sigma| cutoff_estimate_check(&ball, s, sigma, &points))
                .collect::<fracspec::Result<Vec<_>>>()?;
            let ok = checks.iter().all(|c| c.holds);
            (EstimateResult::Cutoff(checks), ok)
        }
        EstimateKind::MixedTerm => {
            let c = mixed_term_check(&ball, s, 0.25, 1.0, &default_mixed_pairs(n, 20))?;
            let ok = c.holds;
            (EstimateResult::Mixed(c), ok)
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(ok);
    }
    match &result {
        EstimateResult::PlaneWave(checks) => {
            println!("|z|  value  |z|^2s  relative_error");
            for c in checks {
                let exact = c.z_norm.powf(2.0 * c.s);
                println!(
                    "{}  {}  {}  {}",
                    format_number(c.z_norm),
                    format_number(c.extrapolated),
                    format_number(exact),
                    format_number(c.relative_error)
                );
            }
        }
        EstimateResult::Cutoff(checks) => {
            println!("sigma  max_measured  bound  stated_bound  holds");
            for c in checks {
                println!(
                    "{}  {}  {}  {}  {}",
                    format_number(c.sigma),
                    format_number(c.max_measured),
                    format_number(c.bound),
                    format_number(c.stated_bound),
                    c.holds
                );
            }
        }
        EstimateResult::Mixed(c) => {
            println!("|z|  measured  bound  literal_bound");
            for m in &c.samples {
                let zn = m.z.iter().map(|v| v * v).sum::<f64>().sqrt();
                println!(
                    "{}  {}  {}  {}",
                    format_number(zn),
                    format_number(m.measured),
                    format_number(m.bound.rigorous),
                    format_number(m.bound.literal)
                );
            }
            println!("worst ratio {}; literal form holds: {}", format_number(c.worst_ratio), c.literal_holds);
        }
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn bounds(p: &Problem, check: bool) -> Result<bool> {
    p.output.preflight()?;
    let report = BoundReport::compute(&p.domain, p.s, p.h, p.k_max)?;
    let text = match p.output.format() {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    p.output.write(&text)?;
    if !check {
        return Ok(true);
    }
    let c = report.sandwich();
    for f in &c.failures {
        eprintln!("check failed: {f}");
    }
    Ok(c.failures.is_empty())
}

#[derive(Serialize)]
struct SweepRow<'a> {
    s: f64,
    #[serde(flatten)]
    row: &'a BoundRow,
}

fn sweep(d: &Domain, s_values: &[FractionalOrder], k_values: &[usize], h: f64, output: &Output) -> Result<()> {
    output.preflight()?;
    let k_max = *k_values.iter().max().context("no k values")?;
    let reports = s_values.iter().map(|&s| BoundReport::compute(d, s, h, k_max)).collect::<fracspec::Result<Vec<_>>>()?;
    let text = match output.format() {
        Format::Json => {
            let rows: Vec<SweepRow> = s_values
                .iter()
                .zip(&reports)
                .flat_map(|(s, r)| k_values.iter().map(move |&k| SweepRow { s: s.get(), row: &r.rows[k - 1] }))
                .collect();
            serde_json::to_string_pretty(&rows)? + "\n"
        }
        Format::Csv => {
            let mut out = format!("s,{}\n", CSV_COLUMNS.join(","));
            for (s, r) in s_values.iter().zip(&reports) {
                for &k in k_values {
                    let line = r.rows[k - 1].csv_record().join(",");
                    let _ = writeln!(out, "{},{line}", format_number(s.get()));
                }
            }
            out
        }
    };
    output.write(&text)
}

fn verify(suite: &str) -> Result<bool> {
    let outcomes = run_suite(suite)?;
    for o in &outcomes {
        println!("{}", o.line());
        if !o.within_budget {
            println!("     note: over the {:.0}s budget", o.budget);
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} suites passed", outcomes.len() - failed, outcomes.len());
    Ok(failed == 0)
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match &cli.command {
        Command::Constants { n, s, json } => constants(*n, *s, *json).map(|_| true),
        Command::Geometry { domain, json } => geometry(domain, *json).map(|_| true),
        Command::Eig(p) => eig(p).map(|_| true),
        Command::Bounds { problem, check } => bounds(problem, *check),
        Command::Estimate { kind, n, s, json } => estimate(*kind, *n, *s, *json),
        Command::Verify { suite } => verify(suite),
        Command::Sweep { domain, s_values, k_values, h, output } => {
            sweep(domain, s_values, k_values, *h, output).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
