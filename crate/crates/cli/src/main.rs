//! `hslab`: command-line runs of the Hardy–Sobolev stability toolkit.
//!
//! Results go to stdout as JSON. With `--out` they are written to a file
//! instead: JSON when the path ends in `.json`, CSV otherwise. A directory
//! given to `--out` receives `<command>_<N>_<gamma>_<s>.csv`. Every CSV starts
//! with a `# config:` line holding the full run configuration.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical accuracy failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hslab::bubble::{Bubble, Normalization};
use hslab::experiments::{
    alpha_table, bianchi_egnell_scan_with, cfm_scan_with, default_cfm_family, write_alpha_csv, PerturbationKind,
    ScanOptions, StabilityScan,
};
use hslab::functionals::deficit_with;
use hslab::interaction::scan_and_fit;
use hslab::manifold::{greedy_multibubble_fit_with, project_with, Manifold, ProjectOptions};
use hslab::params::hardy_constant;
use hslab::radial::{read_csv, QuadratureSpec, RadialFunction};
use hslab::spectral::{spectrum_report_with, SpectrumOptions};
use hslab::{best_constant, el_normalization_constant, Error, ProblemParams};

#[derive(Parser)]
#[command(name = "hslab", version, about = "Numerical experiments on the Hardy-Sobolev inequality")]
struct Cli {
    /// Worker threads for parallel scans (falls back to HSLAB_THREADS).
    #[arg(long, global = true, env = "HSLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Best constant μ and Euler-Lagrange constant C.
    Constant(Common),
    /// Deficit of an input or synthetic function.
    Deficit(InputArgs),
    /// Distance to the bubble manifold.
    Distance(DistanceArgs),
    /// Eigenvalues of the linearized operator by sector.
    Spectrum(SpectrumArgs),
    /// Stability constant α over a parameter grid.
    AlphaTable(AlphaArgs),
    /// Two-bubble interaction integral over a scale grid, with exponent fit.
    InteractionScan(InteractionArgs),
    /// Deficit/distance² along a perturbation direction.
    StabilityScan(StabilityArgs),
    /// ‖ρ‖_γ/Γ(u) over a family of orthogonal perturbations.
    CfmScan(CfmArgs),
    /// Greedy fit of several bubbles.
    FitBubbles(FitArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constant(_) => "constant",
            Command::Deficit(_) => "deficit",
            Command::Distance(_) => "distance",
            Command::Spectrum(_) => "spectrum",
            Command::AlphaTable(_) => "alpha-table",
            Command::InteractionScan(_) => "interaction-scan",
            Command::StabilityScan(_) => "stability-scan",
            Command::CfmScan(_) => "cfm-scan",
            Command::FitBubbles(_) => "fit-bubbles",
        }
    }
}

#[derive(Args, Serialize, Clone)]
struct Common {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    s: f64,
    /// Allow γ = 0 and s = 0 (classical Sobolev and Hardy-Sobolev cases).
    #[arg(long)]
    reference_mode: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance of the radial quadrature.
    #[arg(long)]
    tol: Option<f64>,
    /// Gauss nodes of the radial quadrature.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Half-width of the quadrature window in t = ln r.
    #[arg(long)]
    t_window: Option<f64>,
    /// Output file, or a directory for `<command>_<N>_<gamma>_<s>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn params(&self) -> hslab::Result<ProblemParams> {
        if self.reference_mode {
            ProblemParams::reference(self.n, self.gamma, self.s)
        } else {
            ProblemParams::new(self.n, self.gamma, self.s)
        }
    }

    fn quadrature(&self) -> hslab::Result<QuadratureSpec> {
        let mut q = QuadratureSpec::default();
        if let Some(t) = self.tol {
            q.rel_tol = t;
        }
        if let Some(n) = self.grid_n {
            q.n = n;
        }
        if let Some(w) = self.t_window {
            q.t_min = -w;
            q.t_max = w;
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Args, Serialize)]
struct InputArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Radial function in the `r,value` CSV format.
    #[arg(long, conflicts_with = "bubble")]
    input: Option<PathBuf>,
    /// Use the bubble c·U^λ (unit normalization) as input.
    #[arg(long)]
    bubble: bool,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    coeff: f64,
    /// Add `amp·exp(−(ln r − centre)²/(2 width²))` in Emden–Fowler form; repeatable.
    #[arg(long, num_args = 3, value_names = ["AMP", "CENTRE", "WIDTH"], allow_negative_numbers = true)]
    bump: Vec<f64>,
}

impl InputArgs {
    fn function(&self, p: ProblemParams) -> hslab::Result<RadialFunction> {
        let mut u = match (&self.input, self.bubble) {
            (Some(path), _) => read_csv(path, p)?,
            (None, true) => Bubble::new(p, self.lambda, self.coeff, Normalization::UnitGammaNorm)?.to_radial(),
            (None, false) if !self.bump.is_empty() => RadialFunction::zero(p, 0),
            (None, false) => return Err(Error::Domain("give --input, --bubble or --bump".into())),
        };
        for b in self.bump.chunks(3) {
            u = u.add(&RadialFunction::log_gaussian(p, u.sector(), b[0], b[1], b[2]))?;
        }
        Ok(u)
    }
}

#[derive(Args, Serialize)]
struct DistanceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = NormArg::Unit)]
    normalization: NormArg,
    #[arg(long, default_value_t = 41)]
    seeds: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum NormArg {
    Unit,
    El,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Unit => Normalization::UnitGammaNorm,
            NormArg::El => Normalization::EulerLagrange,
        }
    }
}

#[derive(Args, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = NormArg::Unit)]
    normalization: NormArg,
    /// Eigenvalues per sector.
    #[arg(long, default_value_t = 4)]
    count: usize,
}

#[derive(Args, Serialize)]
struct AlphaArgs {
    #[arg(long = "dims", value_delimiter = ',', default_values_t = [3, 4, 6])]
    dims: Vec<usize>,
    /// γ as fractions of the Hardy constant (N−2)²/4.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 0.9])]
    gamma_fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5])]
    s_values: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct InteractionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Exponent on U; defaults to 2*(s) − 1.
    #[arg(long)]
    theta: Option<f64>,
    /// Exponent on U^λ; defaults to 2*(s) − θ.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    lambda_max: f64,
    #[arg(long, default_value_t = 24)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    ThirdEigenfunction,
    RandomOrthogonal,
    ManifoldTangent,
}

impl From<KindArg> for PerturbationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::ThirdEigenfunction => PerturbationKind::ThirdEigenfunction,
            KindArg::RandomOrthogonal => PerturbationKind::RandomOrthogonal,
            KindArg::ManifoldTangent => PerturbationKind::ManifoldTangent,
        }
    }
}

#[derive(Args, Serialize)]
struct StabilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = KindArg::ThirdEigenfunction)]
    kind: KindArg,
    /// Decreasing amplitudes in (0, 0.05].
    #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01])]
    d_grid: Vec<f64>,
}

#[derive(Args, Serialize)]
struct CfmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    family_size: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01, 0.005])]
    d_grid: Vec<f64>,
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    /// Synthetic input: unit bubbles at these scales (summed).
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    nu: usize,
    /// Re-projection sweeps after the greedy pass.
    #[arg(long, default_value_t = 0)]
    backfit: usize,
}

type CsvWriter = Box<dyn Fn(&[String], &mut dyn Write) -> hslab::Result<()>>;

/// Something that can be printed as JSON or written as CSV.
struct Output {
    json: Value,
    csv: CsvWriter,
}

fn rows_csv(header: &[String], out: &mut dyn Write, names: &[&str], rows: &[Vec<String>]) -> hslab::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{}", names.join(","))?;
    for r in rows {
        writeln!(out, "{}", r.join(","))?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn scan_output(scan: StabilityScan) -> Output {
    let mut json = scan.summary_json();
    json["rows"] = serde_json::to_value(&scan.rows).expect("plain rows");
    Output {
        json,
        csv: Box::new(move |h, w| scan.write_csv(h, w)),
    }
}

fn run(cmd: &Command) -> hslab::Result<Output> {
    match cmd {
        Command::Constant(c) => {
            let p = c.params()?;
            let mu = best_constant(&p);
            let cc = el_normalization_constant(&p);
            let d = p.derived();
            let json = json!({
                "N": p.dim(), "gamma": p.gamma(), "s": p.s(),
                "mu": mu, "C": cc, "derived": d,
            });
            let rows = vec![
                vec!["mu".into(), num(mu)],
                vec!["C".into(), num(cc)],
                vec!["epsilon".into(), num(d.epsilon)],
                vec!["two_star_s".into(), num(d.two_star_s)],
                vec!["beta_minus".into(), num(d.beta_minus)],
                vec!["beta_plus".into(), num(d.beta_plus)],
            ];
            Ok(Output {
                json,
                csv: Box::new(move |h, w| rows_csv(h, w, &["name", "value"], &rows)),
            })
        }
        Command::Deficit(a) => {
            let p = a.common.params()?;
            let q = a.common.quadrature()?;
            let r = deficit_with(&a.function(p)?, &q)?;
            let row = vec![num(r.gamma_norm_sq), num(r.hs_norm), num(r.mu), num(r.deficit)];
            Ok(Output {
                json: serde_json::to_value(&r)?,
                csv: Box::new(move |h, w| {
                    rows_csv(h, w, &["gamma_norm_sq", "hs_norm", "mu", "deficit"], std::slice::from_ref(&row))
                }),
            })
        }
        Command::Distance(a) => {
            let p = a.input.common.params()?;
            let opts = ProjectOptions {
                normalization: a.normalization.into(),
                seeds: a.seeds,
                quadrature: a.input.common.quadrature()?,
                ..Default::default()
            };
            let r = project_with(&a.input.function(p)?, Manifold::M, &opts)?;
            let b = r.best.bubble;
            let [o1, o2, o3, o4] = r.orth_residuals;
            let row = vec![
                num(b.coeff),
                num(b.lambda),
                num(r.distance),
                num(o1),
                num(o2),
                num(o3),
                num(o4),
                r.converged.to_string(),
                r.iterations.to_string(),
            ];
            let names = ["c", "lambda", "distance", "or1", "or2", "or3", "or4", "converged", "iterations"];
            Ok(Output {
                json: serde_json::to_value(&r)?,
                csv: Box::new(move |h, w| rows_csv(h, w, &names, std::slice::from_ref(&row))),
            })
        }
        Command::Spectrum(a) => {
            let p = a.common.params()?;
            let opts = SpectrumOptions {
                normalization: a.normalization.into(),
                count: a.count,
                eigenfunctions: false,
            };
            let r = spectrum_report_with(&p, &opts)?;
            let rows: Vec<Vec<String>> = r
                .sectors
                .iter()
                .flat_map(|s| {
                    s.eigenvalues
                        .iter()
                        .enumerate()
                        .map(move |(i, e)| vec![s.k.to_string(), s.multiplicity.to_string(), i.to_string(), num(*e)])
                })
                .collect();
            Ok(Output {
                json: serde_json::to_value(&r)?,
                csv: Box::new(move |h, w| rows_csv(h, w, &["k", "multiplicity", "index", "eigenvalue"], &rows)),
            })
        }
        Command::AlphaTable(a) => {
            let mut grid = Vec::new();
            for &n in &a.dims {
                for &f in &a.gamma_fractions {
                    for &s in &a.s_values {
                        grid.push(ProblemParams::new(n, f * hardy_constant(n), s)?);
                    }
                }
            }
            let rows = alpha_table(&grid);
            Ok(Output {
                json: serde_json::to_value(&rows)?,
                csv: Box::new(move |h, w| write_alpha_csv(&rows, h, w)),
            })
        }
        Command::InteractionScan(a) => {
            let p = a.common.params()?;
            let pc = p.critical_exponent();
            let theta = a.theta.unwrap_or(pc - 1.0);
            let eta = a.eta.unwrap_or(pc - theta);
            let scan = scan_and_fit(&p, theta, eta, a.lambda_min, a.lambda_max, a.points)?;
            let mut json = scan.summary_json();
            json["log_correction"] = serde_json::to_value(&scan.log_correction)?;
            json["near_degenerate"] = json!(scan.near_degenerate);
            Ok(Output {
                json,
                csv: Box::new(move |h, w| scan.write_csv(h, w)),
            })
        }
        Command::StabilityScan(a) => {
            let p = a.common.params()?;
            let opts = ScanOptions {
                seed: a.common.seed,
                quadrature: a.common.quadrature()?,
            };
            Ok(scan_output(bianchi_egnell_scan_with(&p, a.kind.into(), &a.d_grid, &opts)?))
        }
        Command::CfmScan(a) => {
            let p = a.common.params()?;
            let opts = ScanOptions {
                seed: a.common.seed,
                quadrature: a.common.quadrature()?,
            };
            let family = default_cfm_family(&p, a.family_size, a.common.seed)?;
            Ok(scan_output(cfm_scan_with(&p, &family, &a.d_grid, &opts)?))
        }
        Command::FitBubbles(a) => {
            let p = a.input.common.params()?;
            let u = if a.lambdas.is_empty() {
                a.input.function(p)?
            } else {
                let mut u = RadialFunction::zero(p, 0);
                for &l in &a.lambdas {
                    u = u.add(&Bubble::new(p, l, 1.0, Normalization::UnitGammaNorm)?.to_radial())?;
                }
                u
            };
            let opts = ProjectOptions {
                quadrature: a.input.common.quadrature()?,
                ..Default::default()
            };
            let fit = greedy_multibubble_fit_with(&u, a.nu, a.backfit, &opts)?;
            let rows: Vec<Vec<String>> = fit
                .bubbles
                .iter()
                .map(|b| vec![num(b.bubble.coeff), num(b.bubble.lambda)])
                .collect();
            let mut json = serde_json::to_value(&fit)?;
            json["residual_norm"] = json!(fit.residual_norm);
            Ok(Output {
                json,
                csv: Box::new(move |h, w| rows_csv(h, w, &["c", "lambda"], &rows)),
            })
        }
    }
}

fn out_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Constant(c) => c.out.as_deref(),
        Command::Deficit(a) => a.common.out.as_deref(),
        Command::Distance(a) => a.input.common.out.as_deref(),
        Command::Spectrum(a) => a.common.out.as_deref(),
        Command::AlphaTable(a) => a.out.as_deref(),
        Command::InteractionScan(a) => a.common.out.as_deref(),
        Command::StabilityScan(a) => a.common.out.as_deref(),
        Command::CfmScan(a) => a.common.out.as_deref(),
        Command::FitBubbles(a) => a.input.common.out.as_deref(),
    }
}

fn common(cmd: &Command) -> Option<&Common> {
    match cmd {
        Command::Constant(c) => Some(c),
        Command::Deficit(a) => Some(&a.common),
        Command::Distance(a) => Some(&a.input.common),
        Command::Spectrum(a) => Some(&a.common),
        Command::AlphaTable(_) => None,
        Command::InteractionScan(a) => Some(&a.common),
        Command::StabilityScan(a) => Some(&a.common),
        Command::CfmScan(a) => Some(&a.common),
        Command::FitBubbles(a) => Some(&a.input.common),
    }
}

/// `<command>_<N>_<gamma>_<s>.csv`, or `<command>.csv` for grid commands.
fn default_file_name(cmd: &Command) -> String {
    match common(cmd) {
        Some(c) => format!("{}_{}_{}_{}.csv", cmd.name(), c.n, c.gamma, c.s),
        None => format!("{}.csv", cmd.name()),
    }
}

fn emit(cmd: &Command, output: &Output) -> hslab::Result<()> {
    let Some(path) = out_path(cmd) else {
        let text = serde_json::to_string_pretty(&output.json)?;
        // a closed pipe (`| head`) is not an error
        return match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        };
    };
    let target = if path.is_dir() {
        path.join(default_file_name(cmd))
    } else {
        path.to_path_buf()
    };
    let mut w = BufWriter::new(File::create(&target)?);
    if target.extension().is_some_and(|e| e == "json") {
        serde_json::to_writer_pretty(&mut w, &output.json)?;
        writeln!(w)?;
    } else {
        let config = json!({ "command": cmd.name(), "args": cmd });
        (output.csv)(&[format!("config: {config}")], &mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot start {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command).and_then(|o| emit(&cli.command, &o)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
