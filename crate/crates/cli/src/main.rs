use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lorentz_embed::config::ExperimentConfig;
use lorentz_embed::embedding::{distance_matrix, phi_many, pullback_metric};
use lorentz_embed::export::{read_triples, write_field, write_matrix, write_triples};
use lorentz_embed::hilbert::{arc_length_curve, circle_family, hyperbola_family, monotone_increasing, ball_sweep, cone_check, Cone};
use lorentz_embed::invariants::{invariant_report, membership};
use lorentz_embed::lorentz::SigmaSolver;
use lorentz_embed::reconstruction::{analyze, reconstruct_grid, triple_table, PairTable, ReconstructionOptions, SampleSet, Symmetry};
use lorentz_embed::report::{CheckResult, VerificationReport};
use lorentz_embed::verify::{self, Suite, VerifyOptions};
use lorentz_embed::spacetime::{Grid, Point};
use lorentz_embed::{Error, Result};

/// Lorentzian distance fields, their embeddings and reconstruction checks.
#[derive(Debug, Parser)]
#[command(name = "lorentz-embed", version)]
struct Cli {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the JSON report (stdout when omitted).
    #[arg(short, long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the resolved configuration and basic slab data.
    Describe,
    /// σ-field of the first configured point, as CSV.
    SigmaField {
        #[arg(short, long)]
        out: PathBuf,
    },
    /// All-pairs embedding distances of the configured points.
    DistanceMatrix {
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Pullback metric at every configured point.
    PullbackMetric,
    /// Recover the boundary and causal relation from distance triples.
    Reconstruct {
        /// Distance triples to reconstruct from, instead of computing them.
        #[arg(long)]
        triples: Option<PathBuf>,
        /// Also write the computed triples.
        #[arg(long)]
        export_triples: Option<PathBuf>,
    },
    /// Invariant report and bound membership.
    Invariants {
        /// Bounds b1..b7.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bounds: Option<Vec<f64>>,
    },
    /// Run a verification suite with its reference settings.
    Verify {
        suite: SuiteArg,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Hilbert-space length experiments.
    Hilbert {
        #[arg(long, value_enum, default_value = "ball")]
        experiment: HilbertExperiment,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    All,
    Sigma,
    Noldus,
    Beem,
    Embedding,
    Reconstruction,
    Equivariance,
    Invariants,
    Hilbert,
    Degeneracy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HilbertExperiment {
    Ball,
    Cone,
    Counterexamples,
}

/// A file to write once everything has been computed.
struct Output(PathBuf, Vec<u8>);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(pass) => ExitCode::from(if pass { 0 } else { 1 }),
        Err(e @ Error::Config(_)) => {
            eprintln!("lorentz-embed: configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("lorentz-embed: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli.config.as_deref())?;
    let mut outputs = Vec::new();
    let mut report = execute(&cli.command, &cfg, &mut outputs)?;
    if cli.config.is_some() {
        report.param("config", &cfg);
    }
    eprint!("{}", report.summary());
    for Output(path, bytes) in outputs {
        std::fs::write(path, bytes)?;
    }
    match &cli.report {
        Some(p) => report.write(p)?,
        None => println!("{}", report.to_json()?),
    }
    Ok(report.pass)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn execute(cmd: &Command, cfg: &ExperimentConfig, outputs: &mut Vec<Output>) -> Result<VerificationReport> {
    match cmd {
        Command::Describe => describe(cfg),
        Command::SigmaField { out } => {
            let mut r = VerificationReport::new("sigma-field");
            let g = cfg.grid()?;
            let x = first_point(cfg)?;
            let solver = SigmaSolver::new(&g, cfg.grid.radius)?;
            let f = r.timed("sigma_field", || solver.field(&x))?;
            let finite = f.values.values.iter().all(|v| v.is_finite());
            outputs.push(Output(out.clone(), csv_bytes(|b| write_field(b, &g, &f.values.values))?));
            r.param("source", [x.t, x.s[0], x.s[1]]);
            r.param("nodes", g.len());
            r.check(CheckResult::new("finite", "sigma field finite on every node", 0.0).verdict(finite));
            Ok(r)
        }
        Command::DistanceMatrix { out } => {
            let mut r = VerificationReport::new("distance-matrix");
            let g = cfg.grid()?;
            let pts = sample_points(cfg, &g)?;
            let solver = SigmaSolver::new(&g, cfg.grid.radius)?;
            let fspec = cfg.fspec()?;
            let emb = r.timed("embed", || phi_many(&solver, &pts, fspec))?;
            let d = distance_matrix(&emb, &g, cfg.norm()?)?;
            let min_off = (0..d.len())
                .flat_map(|i| (0..d.len()).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(f64::INFINITY, |m, (i, j)| m.min(d[i][j]));
            let asym = (0..d.len()).flat_map(|i| (0..d.len()).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max((d[i][j] - d[j][i]).abs()));
            outputs.push(Output(out.clone(), csv_bytes(|b| write_matrix(b, &d))?));
            r.param("points", pts.iter().map(|p| [p.t, p.s[0], p.s[1]]).collect::<Vec<_>>());
            r.check(CheckResult::new("symmetric", "distance matrix symmetric", 0.0).value("max_asymmetry", asym).verdict(asym == 0.0));
            if d.len() > 1 {
                r.check(CheckResult::new("injective", "distinct points have distinct embeddings", 0.0).value("min_off_diagonal", min_off).verdict(min_off > 0.0));
            }
            Ok(r)
        }
        Command::PullbackMetric => {
            let mut r = VerificationReport::new("pullback-metric");
            let g = cfg.grid()?;
            let fspec = cfg.fspec()?;
            let pts = sample_points(cfg, &g)?;
            let mut rows = Vec::new();
            let mut definite = true;
            for p in &pts {
                let m = pullback_metric(&g, p, fspec)?;
                definite &= m.is_positive_definite();
                let n = g.spec().dimension();
                let comps: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| m.component(a, b)).collect()).collect();
                let mut row = BTreeMap::new();
                row.insert("point", serde_json::json!([p.t, p.s[0], p.s[1]]));
                row.insert("g", serde_json::json!(comps));
                rows.push(row);
            }
            r.datum("metrics", rows);
            r.check(CheckResult::new("positive_definite", "pullback metric is Riemannian", 0.0).verdict(definite));
            Ok(r)
        }
        Command::Reconstruct { triples, export_triples } => reconstruct(cfg, triples.as_deref(), export_triples.as_deref(), outputs),
        Command::Invariants { bounds } => {
            let mut r = VerificationReport::new("invariants");
            let g = cfg.grid()?;
            let rep = r.timed("invariants", || invariant_report(&g))?;
            if let Some(b) = bounds {
                let b: [f64; 7] = b.as_slice().try_into().map_err(|_| Error::Config("--bounds needs 7 values".into()))?;
                let m = membership(&rep, &b);
                r.param("bounds", b);
                r.datum("membership", &m);
                r.check(CheckResult::new("membership", "invariants within the bounds", 0.0).verdict(m.all));
            }
            r.check(
                CheckResult::new("gamma_within_cdiam", "injectivity scale at most the causal diameter", 0.0)
                    .value("gamma", rep.gamma)
                    .value("cdiam", rep.cdiam)
                    .verdict(rep.gamma <= rep.cdiam + g.dt),
            );
            r.datum("report", &rep);
            Ok(r)
        }
        Command::Verify { suite, resolution, seed, trials } => {
            let opts = VerifyOptions { resolution: *resolution, seed: seed.or(Some(cfg.experiment.seed)), trials: *trials };
            let suites: Vec<Suite> = match suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                s => vec![format!("{s:?}").to_lowercase().parse()?],
            };
            if suites.len() == 1 {
                return verify::run(suites[0], &opts);
            }
            let mut r = VerificationReport::new("verify all");
            for s in suites {
                r.merge(s.name(), verify::run(s, &opts)?);
            }
            Ok(r)
        }
        Command::Hilbert { experiment, trials, seed } => hilbert(*experiment, trials.unwrap_or(cfg.experiment.trials), seed.unwrap_or(cfg.experiment.seed)),
    }
}

fn first_point(cfg: &ExperimentConfig) -> Result<Point<f64>> {
    match cfg.points()?.first() {
        Some(p) => Ok(*p),
        None => {
            let spec = cfg.spec()?;
            Ok(spec.pt((spec.t_min + spec.t_max) / 2.0, 0.0))
        }
    }
}

/// Configured points, or the grid nodes when none are given.
fn sample_points(cfg: &ExperimentConfig, g: &Grid<f64>) -> Result<Vec<Point<f64>>> {
    let pts = cfg.points()?;
    Ok(if pts.is_empty() { g.nodes().to_vec() } else { pts })
}

fn describe(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let mut r = VerificationReport::new("describe");
    let spec = cfg.spec()?;
    let g = cfg.grid()?;
    r.datum("config", cfg);
    r.datum("dimension", spec.dimension());
    r.datum("constant_warp", spec.has_constant_warp());
    r.datum("volume", spec.analytic_volume());
    r.datum("nodes", g.len());
    r.datum("dt", g.dt);
    r.datum("ds", g.ds);
    let rel = (g.total_weight() - spec.analytic_volume()).abs() / spec.analytic_volume();
    r.check(CheckResult::new("quadrature_volume", "grid weights integrate the volume", 1e-6).value("relative_error", rel).verdict(rel <= 1e-6));
    Ok(r)
}

fn reconstruct(cfg: &ExperimentConfig, triples: Option<&Path>, export: Option<&Path>, outputs: &mut Vec<Output>) -> Result<VerificationReport> {
    let mut r = VerificationReport::new("reconstruct");
    let spec = cfg.spec()?;
    if spec.spatial_dims() != 1 {
        return Err(Error::Config("reconstruct supports circle slabs only".into()));
    }
    let (nt, ns) = (cfg.grid.nt, cfg.grid.ns[0]);
    let opts = ReconstructionOptions {
        quad_factor: cfg.grid.quad_factor,
        boundary_tol: cfg.tolerances.boundary,
        relation_tol: cfg.tolerances.relation,
        ..ReconstructionOptions::default()
    };
    r.param("options", &opts);
    let rep = match (triples, export) {
        (None, None) => r.timed("reconstruct", || reconstruct_grid(&spec, nt, ns, &opts))?,
        _ => {
            let coarse = Grid::build(&spec, nt, &[ns])?;
            let samples = SampleSet::from_grid(&coarse);
            let n = samples.len();
            let table = match triples {
                Some(path) => {
                    let rows = read_triples(File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    let mut map = BTreeMap::new();
                    for (i, j, t) in rows {
                        if i >= n || j >= n {
                            return Err(Error::Config(format!("triple index ({i}, {j}) outside the {n} samples")));
                        }
                        map.insert((i.min(j), i.max(j)), t);
                    }
                    for i in 0..n {
                        for j in i + 1..n {
                            if !map.contains_key(&(i, j)) {
                                return Err(Error::Config(format!("missing triple for pair ({i}, {j})")));
                            }
                        }
                    }
                    PairTable::from_fn(n, |i, j| if i == j { Default::default() } else { map[&(i.min(j), i.max(j))] })
                }
                None => {
                    let quad = Grid::build(&spec, nt * opts.quad_factor, &[ns * opts.quad_factor])?;
                    r.timed("triples", || triple_table(&quad, &samples, Symmetry::Rotation))?
                }
            };
            if let Some(path) = export {
                let rows: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, table.get(i, j))).collect();
                let mut buf = Vec::new();
                write_triples(&mut buf, &rows)?;
                outputs.push(Output(path.to_path_buf(), buf));
            }
            r.timed("analyze", || analyze(&spec, &samples, &table, &opts))?.0
        }
    };
    r.check(CheckResult::new("boundary", "boundary sets detected exactly", 0.0).value("mismatches", rep.boundary_mismatches as f64).verdict(rep.boundary_exact));
    r.check(CheckResult::new("chronological", "recovered relation matches ground truth", 0.99).value("accuracy", rep.accuracy).verdict(rep.accuracy >= 0.99));
    r.check(
        CheckResult::new("orientation", "time orientation correct on detected pairs", 1.0)
            .value("correct", rep.orientation_correct as f64)
            .value("checked", rep.orientation_checked as f64)
            .verdict(rep.orientation_correct == rep.orientation_checked),
    );
    r.datum("report", &rep);
    Ok(r)
}

fn hilbert(exp: HilbertExperiment, trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut r = VerificationReport::new(&format!("hilbert {}", format!("{exp:?}").to_lowercase()));
    r.param("seed", seed);
    match exp {
        HilbertExperiment::Ball => {
            r.param("trials", trials);
            for n in [2usize, 10, 50] {
                let s = r.timed(&format!("n{n}"), || ball_sweep(n, trials, 1.0, seed))?;
                r.check(
                    CheckResult::new(&format!("ball_n{n}"), "admissible curves have length below 1.5r", 1.5)
                        .value("max_length_ratio", s.max_length_ratio)
                        .value("max_trig_violation", s.max_trig_violation)
                        .verdict(s.admissible == trials && s.all_hold && s.max_trig_violation <= 1e-3),
                );
                r.datum(&format!("n{n}"), s);
            }
        }
        HilbertExperiment::Cone => {
            let v = [4.0, 4.0];
            let mut rows = Vec::new();
            for b in [1.0, 2.0, 3.0, 4.0] {
                let c = arc_length_curve(|x: f64| vec![x, 1.0 / x], 0.25, b, 1e-3)?;
                let verdict = cone_check(&c, &Cone::Orthant(2), &v)?;
                r.check(
                    CheckResult::new(&format!("cone_b{b}"), "cone-confined curves are bounded by sqrt(2 r |v|)", 0.0)
                        .value("length", verdict.length)
                        .value("proof_bound", verdict.proof_bound)
                        .verdict(verdict.hypotheses_met && verdict.length <= verdict.proof_bound),
                );
                rows.push(verdict);
            }
            r.datum("rows", rows);
        }
        HilbertExperiment::Counterexamples => {
            let hyp = hyperbola_family(&[10.0, 100.0], 1e-3)?;
            r.check(
                CheckResult::new("hyperbola", "hyperbola lengths grow without bound", 0.0)
                    .verdict(monotone_increasing(&hyp) && hyp.iter().all(|row| row.length > row.lower_bound)),
            );
            let circ = circle_family(&[1, 2, 4, 8], 0.5, 1e-3)?;
            r.check(
                CheckResult::new("circle", "non-self-dual cone admits unbounded lengths", 0.0)
                    .verdict(monotone_increasing(&circ) && circ.iter().all(|row| row.length > row.lower_bound)),
            );
            r.datum("hyperbola", hyp);
            r.datum("circle", circ);
        }
    }
    Ok(r)
}
