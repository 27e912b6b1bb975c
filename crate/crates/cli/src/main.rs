//! `gr` — simulate reflected Ornstein-Uhlenbeck paths on Gaussian level-set
//! domains, verify them against quadrature oracles, sample the reference
//! measures, and merge report artifacts.
//!
//! Exit codes: 0 success, 1 verifier failure, 2 invalid configuration or
//! usage, 3 runtime/scheme failure.

use clap::{Parser, Subcommand};
use gauss_reflect::engine::run_ensemble_map;
use gauss_reflect::quadrature::QuadratureRule;
use gauss_reflect::verify::{self, SummaryReport, ANALYTIC_TOL};
use gauss_reflect::{Error, GammaSource, RunConfig, TestFunction};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gr", version, about = "Reflected Ornstein-Uhlenbeck simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an ensemble of reflected paths; write path CSVs and an
    /// ensemble summary JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Run one named verifier or `all`; print a table and write JSON-line
    /// reports.
    Verify {
        /// ibp | gauss_green | energy | stationarity | revuz | qv | all
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Write gamma and conditioned-gamma samples to CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Merge report files (JSON lines) into one deterministic table.
    Report {
        /// Report files produced by `verify`.
        files: Vec<PathBuf>,
        /// Merge even if configuration hashes differ.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::UnsupportedGeometry(_) => 2,
        Error::ProjectionDiverged { .. }
        | Error::DegenerateGradient { .. }
        | Error::LowAcceptance { .. }
        | Error::EmptyEnsemble => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(raw) = std::env::var("GR_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // Worker count schedules path-indexed work; it never enters
                // the numerics.
                let _ = gauss_reflect::configure_threads(n);
            }
            _ => {
                eprintln!("error: GR_THREADS must be a positive integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }

    let outcome = match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            dt,
            paths,
        } => load_config(&config, seed, dt, paths).and_then(|cfg| simulate_cmd(&cfg, out)),
        Command::Verify {
            name,
            config,
            out,
            seed,
            dt,
            paths,
        } => load_config(&config, seed, dt, paths).and_then(|cfg| verify_cmd(&name, &cfg, out)),
        Command::Sample { config, out, seed } => {
            load_config(&config, seed, None, None).and_then(|cfg| sample_cmd(&cfg, out))
        }
        Command::Report { files, force, out } => report_cmd(&files, force, out),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Domain(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_config(
    path: &Path,
    seed: Option<u64>,
    dt: Option<f64>,
    paths: Option<usize>,
) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(v) = dt {
        cfg.sim.dt = v;
    }
    if let Some(p) = paths {
        cfg.sim.paths = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Estimators {
    n_steps: usize,
    dt: f64,
    horizon: f64,
    mean_local_time: f64,
    stderr_local_time: f64,
    hit_fraction: f64,
    mean_final: Vec<f64>,
}

#[derive(Serialize)]
struct EnsembleSummary {
    config_hash: String,
    n_paths: usize,
    estimators: Estimators,
}

#[derive(Serialize)]
struct RunMeta {
    timestamp_unix_ms: u128,
    duration_ms: u128,
    gr_threads: Option<String>,
}

fn simulate_cmd(cfg: &RunConfig, out: Option<PathBuf>) -> CliResult<u8> {
    let started = std::time::Instant::now();
    let space = cfg.build_space()?;
    let domain = cfg.build_domain()?;
    let sim = cfg.sim_config();
    let start = cfg.start_law()?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir)?;

    let csv_cap = cfg.output.csv_paths.min(sim.paths);
    struct PathStat {
        final_state: Vec<f64>,
        local_time: f64,
        hits: usize,
        steps: usize,
        csv: Option<Vec<u8>>,
    }
    let stats = run_ensemble_map(&space, &domain, &sim, &start, |p, record| {
        let csv = if (p as usize) < csv_cap {
            let mut buf = Vec::new();
            record
                .write_csv(&mut buf)
                .map_err(|e| Error::InvalidConfig(format!("csv serialization: {e}")))?;
            Some(buf)
        } else {
            None
        };
        Ok(PathStat {
            final_state: record.final_state().coords().to_vec(),
            local_time: record.total_local_time(),
            hits: record.hit_flags.iter().filter(|&&h| h).count(),
            steps: record.n_steps(),
            csv,
        })
    })?;

    for (i, stat) in stats.iter().enumerate() {
        if let Some(bytes) = &stat.csv {
            fs::write(out_dir.join(format!("path_{i:06}.csv")), bytes)?;
        }
    }

    let n = stats.len();
    let l: Vec<f64> = stats.iter().map(|s| s.local_time).collect();
    let (mean_l, se_l) = gauss_reflect::stats::mean_stderr(&l);
    let mut mean_final = vec![0.0; space.dim()];
    let mut hit_steps = 0usize;
    let mut total_steps = 0usize;
    for stat in &stats {
        for (acc, v) in mean_final.iter_mut().zip(&stat.final_state) {
            *acc += v / n as f64;
        }
        hit_steps += stat.hits;
        total_steps += stat.steps;
    }
    let summary = EnsembleSummary {
        config_hash: cfg.hash(),
        n_paths: n,
        estimators: Estimators {
            n_steps: sim.n_steps(),
            dt: sim.dt,
            horizon: sim.horizon,
            mean_local_time: mean_l,
            stderr_local_time: se_l,
            hit_fraction: if total_steps == 0 {
                0.0
            } else {
                hit_steps as f64 / total_steps as f64
            },
            mean_final,
        },
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), json.as_bytes())?;

    let meta = RunMeta {
        timestamp_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        duration_ms: started.elapsed().as_millis(),
        gr_threads: std::env::var("GR_THREADS").ok(),
    };
    fs::write(
        out_dir.join("meta.json"),
        serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )?;
    println!(
        "simulated {} paths x {} steps; E[L_T] = {:.6} +- {:.6}; artifacts in {}",
        n,
        sim.n_steps(),
        mean_l,
        se_l,
        out_dir.display()
    );
    Ok(0)
}

const VERIFIER_NAMES: [&str; 6] = [
    "ibp",
    "gauss_green",
    "energy",
    "stationarity",
    "revuz",
    "qv",
];

fn verify_cmd(name: &str, cfg: &RunConfig, out: Option<PathBuf>) -> CliResult<u8> {
    let selected: Vec<&str> = if name == "all" {
        VERIFIER_NAMES.to_vec()
    } else if VERIFIER_NAMES.contains(&name) {
        vec![name]
    } else {
        return Err(CliError::Usage(format!(
            "unknown verifier {name:?}; expected one of {VERIFIER_NAMES:?} or \"all\""
        )));
    };

    let space = cfg.build_space()?;
    let domain = cfg.build_domain()?;
    let sim = cfg.sim_config();
    let nodes = cfg.quadrature.nodes_per_axis;
    let rule = QuadratureRule::for_domain(&domain, space.dim(), nodes)?;
    let hash = cfg.hash();
    let d = space.dim();

    let mut reports: Vec<SummaryReport> = Vec::new();
    for verifier in selected {
        match verifier {
            "ibp" => {
                for k in 0..d.min(3) {
                    let phi = TestFunction::coordinate(k);
                    let res = verify::ibp_residual(&space, &domain, &phi, k, &rule)?;
                    reports.push(
                        SummaryReport::new(
                            format!("ibp.v{}[phi=x{}]", k + 1, k + 1),
                            res,
                            0.0,
                            ANALYTIC_TOL,
                            nodes as u64,
                        )
                        .with_hash(&hash),
                    );
                }
            }
            "gauss_green" => {
                for k in 0..d.min(3) {
                    let res = verify::gauss_green_residual(&space, &domain, k, &rule)?;
                    reports.push(
                        SummaryReport::new(
                            format!("gauss_green.v{}", k + 1),
                            res,
                            0.0,
                            ANALYTIC_TOL,
                            nodes as u64,
                        )
                        .with_hash(&hash),
                    );
                }
            }
            "energy" => {
                let hat1 = TestFunction::hat(&space, 0);
                let pairs: Vec<(String, TestFunction, TestFunction)> = vec![
                    (
                        "energy[phi=vhat1,psi=1]".into(),
                        hat1.clone(),
                        TestFunction::constant(1.0),
                    ),
                    (
                        "energy[phi=vhat1,psi=vhat1^2]".into(),
                        hat1.clone(),
                        hat1.product(&hat1),
                    ),
                    (
                        "energy[phi=x1^2,psi=vhat1]".into(),
                        TestFunction::coordinate_squared(0),
                        hat1.clone(),
                    ),
                ];
                for (label, phi, psi) in pairs {
                    let res =
                        verify::energy_identity_residual(&space, &domain, &phi, &psi, &rule)?;
                    reports.push(
                        SummaryReport::new(label, res, 0.0, ANALYTIC_TOL, nodes as u64)
                            .with_hash(&hash),
                    );
                }
            }
            "stationarity" => {
                let batch =
                    verify::stationarity_test(&space, &domain, &sim, cfg.verify.oracle_samples)?;
                reports.extend(batch.into_iter().map(|r| r.with_hash(&hash)));
                if let gauss_reflect::LevelSetDomain::GraphRegion {
                    profile: gauss_reflect::Profile::Constant { .. },
                    ..
                } = &domain
                {
                    reports.push(
                        verify::stationarity_closed_form(&space, &domain, &sim)?.with_hash(&hash),
                    );
                }
            }
            "revuz" => {
                let rep =
                    verify::revuz_test(&space, &domain, &sim, &TestFunction::constant(1.0), nodes)?;
                reports.push(rep.with_hash(&hash));
            }
            "qv" => {
                reports.push(verify::qv_test(&space, &domain, &sim, 0, 0)?.with_hash(&hash));
                if d >= 2 {
                    reports.push(verify::qv_test(&space, &domain, &sim, 0, 1)?.with_hash(&hash));
                }
            }
            _ => unreachable!(),
        }
    }

    print_table(&reports);
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        write_jsonl(&dir.join("reports.jsonl"), &reports)?;
    }
    let all_pass = reports.iter().all(|r| r.pass);
    Ok(if all_pass { 0 } else { 1 })
}

fn sample_cmd(cfg: &RunConfig, out: Option<PathBuf>) -> CliResult<u8> {
    let space = cfg.build_space()?;
    let domain = cfg.build_domain()?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir)?;
    let n = cfg.verify.oracle_samples;

    let header: Vec<String> = (1..=space.dim()).map(|k| format!("x_{k}")).collect();
    let mut gamma_csv = format!("{}\n", header.join(","));
    let mut src = GammaSource::new(cfg.seed, 0);
    for _ in 0..n {
        let x = space.sample_gamma(&mut src);
        let row: Vec<String> = x.coords().iter().map(|c| format!("{c}")).collect();
        gamma_csv.push_str(&row.join(","));
        gamma_csv.push('\n');
    }
    fs::write(out_dir.join("gamma.csv"), gamma_csv)?;

    let (cond, rate) = verify::rejection_oracle(&space, &domain, cfg.seed, n)?;
    let mut cond_csv = format!("{}\n", header.join(","));
    for x in &cond {
        let row: Vec<String> = x.coords().iter().map(|c| format!("{c}")).collect();
        cond_csv.push_str(&row.join(","));
        cond_csv.push('\n');
    }
    fs::write(out_dir.join("gamma_conditional.csv"), cond_csv)?;
    println!(
        "wrote {n} gamma samples and {n} conditioned samples (acceptance rate {rate:.4}) to {}",
        out_dir.display()
    );
    Ok(0)
}

fn report_cmd(files: &[PathBuf], force: bool, out: Option<PathBuf>) -> CliResult<u8> {
    if files.is_empty() {
        return Err(CliError::Usage("report needs at least one input file".into()));
    }
    let mut reports: Vec<SummaryReport> = Vec::new();
    for file in files {
        let text = fs::read_to_string(file)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let rep: SummaryReport = serde_json::from_str(line)
                .map_err(|e| CliError::Usage(format!("bad report line in {}: {e}", file.display())))?;
            reports.push(rep);
        }
    }
    if reports.is_empty() {
        return Err(CliError::Usage("no reports found in the input files".into()));
    }
    let first_hash = reports[0].config_hash.clone();
    if !force && reports.iter().any(|r| r.config_hash != first_hash) {
        return Err(CliError::Usage(
            "config hashes differ across reports; pass --force to merge anyway".into(),
        ));
    }
    reports.sort_by(|a, b| {
        a.test
            .cmp(&b.test)
            .then_with(|| a.config_hash.cmp(&b.config_hash))
    });
    print_table(&reports);
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        write_jsonl(&dir.join("merged.jsonl"), &reports)?;
    }
    let all_pass = reports.iter().all(|r| r.pass);
    println!("overall: {}", if all_pass { "PASS" } else { "FAIL" });
    Ok(if all_pass { 0 } else { 1 })
}

fn print_table(reports: &[SummaryReport]) {
    println!("{}", SummaryReport::table_header());
    for rep in reports {
        println!("{}", rep.table_row());
    }
}

fn write_jsonl(path: &Path, reports: &[SummaryReport]) -> CliResult<()> {
    let mut f = fs::File::create(path)?;
    for rep in reports {
        let line = serde_json::to_string(rep).expect("report serializes");
        writeln!(f, "{line}")?;
    }
    Ok(())
}
