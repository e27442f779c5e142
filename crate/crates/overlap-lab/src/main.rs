use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use overlap_lab::args::{parse_complex, parse_grid, parse_n_list, Grid, SizeList};
use overlap_lab::converge;
use overlap_lab::emit::{csv_bytes, json_bytes, write_output};
use overlap_lab::manifest::RunManifest;
use overlap_lab::selftest;
use overlap_lab::tabulate::{tabulate, TabulateKind};
use overlap_lab::verify;

use overlap_mc::{BinSpec, CampaignMode, EnsembleConfig};

/// Exact-formula tabulation, Monte Carlo verification and bulk-convergence
/// studies for conditional eigenvector overlaps in the complex Ginibre
/// ensemble.
#[derive(Parser, Debug)]
#[command(name = "overlap-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the numerical acceptance suite (exit code 2 on failure).
    Selftest(SelftestArgs),
    /// Tabulate exact formulas over a grid.
    Tabulate(TabulateArgs),
    /// Monte Carlo subcommands.
    Mc(McArgs),
    /// Bulk-limit subcommands.
    Bulk(BulkArgs),
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Reduced sample counts and point budgets (< 60 s); tolerances unchanged.
    #[arg(long)]
    quick: bool,
    /// Write the per-criterion results as a JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TabulateArgs {
    #[arg(value_enum)]
    kind: TabulateKind,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Grid as name=start:stop:step, e.g. r=0:4:0.05.
    #[arg(long, value_parser = parse_grid)]
    grid: Grid,
    /// Conditioning point λ1 as a+bi.
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    lambda1: Complex64,
    /// Unit direction for the second point, as a+bi.
    #[arg(long, value_parser = parse_complex, default_value = "1")]
    direction: Complex64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(subcommand)]
    command: McCommand,
}

#[derive(Subcommand, Debug)]
enum McCommand {
    /// Run a campaign and compare its estimators against the exact formulas.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Annular binning as r_max:n_r:n_theta (default √N+1:20:8).
    #[arg(long)]
    bins: Option<String>,
    /// Skip eigenvectors; density-only campaign.
    #[arg(long)]
    eigenvalues_only: bool,
    /// Write per-sample records (JSONL) here.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path stem; tables land at <out>.rho1.csv etc. for CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BulkArgs {
    #[command(subcommand)]
    command: BulkCommand,
}

#[derive(Subcommand, Debug)]
enum BulkCommand {
    /// Finite-N → bulk convergence probe around √N·z0.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Bulk base point z0 as a+bi, |z0| ≤ 0.9.
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    z0: Complex64,
    /// Strictly increasing sizes, e.g. 50,100,200.
    #[arg(long = "n-list", value_parser = parse_n_list, default_value = "50,100,200")]
    n_list: SizeList,
    /// Number of test pairs.
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 0xb01d)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    // Usage errors (including unknown subcommands/flags) exit with code 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Ok(threads) = std::env::var("OVERLAP_LAB_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<std::io::Error>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn manifest_path(explicit: &Option<PathBuf>, out: &Option<PathBuf>) -> PathBuf {
    if let Some(p) = explicit {
        return p.clone();
    }
    match out {
        Some(o) => {
            let mut s = o.as_os_str().to_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("run-manifest.json"),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let argv: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Selftest(a) => {
            let config = serde_json::json!({ "quick": a.quick });
            let mut manifest = RunManifest::begin(argv, config, None);
            let results = selftest::run_all(a.quick);
            for r in &results {
                println!("{}", r.line());
            }
            let all_pass = results.iter().all(|r| r.passed);
            manifest.finish(if all_pass { "ok" } else { "failed: acceptance" });
            if let Some(out) = &a.out {
                let bytes = json_bytes(&manifest, &serde_json::json!({ "criteria": results }))?;
                write_output(&mut manifest, out, &bytes)?;
            }
            manifest.write(&manifest_path(&a.manifest, &a.out))?;
            println!(
                "{}",
                if all_pass {
                    "selftest: ALL CRITERIA PASSED"
                } else {
                    "selftest: FAILURES PRESENT"
                }
            );
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }

        Command::Tabulate(a) => {
            let config = serde_json::json!({
                "kind": format!("{:?}", a.kind),
                "n": a.n,
                "k": a.k,
                "grid": format!("{}={}:{}:{}", a.grid.name, a.grid.start, a.grid.stop, a.grid.step),
                "lambda1": [a.lambda1.re, a.lambda1.im],
                "direction": [a.direction.re, a.direction.im],
            });
            let mut manifest = RunManifest::begin(argv, config, None);
            let result = tabulate(a.kind, a.n, a.k, &a.grid, a.lambda1, a.direction);
            let table = match result {
                Ok(t) => t,
                Err(e) => {
                    manifest.finish(&format!("failed: {e}"));
                    manifest.write(&manifest_path(&a.manifest, &a.out))?;
                    return Err(e);
                }
            };
            let bytes = match a.format {
                Format::Csv => csv_bytes(&table.header, &table.csv_rows())?,
                Format::Json => {
                    manifest.finish("ok");
                    json_bytes(&manifest, &serde_json::json!({ "rows": table.rows }))?
                }
            };
            match &a.out {
                Some(path) => write_output(&mut manifest, path, &bytes)?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            manifest.finish("ok");
            manifest.write(&manifest_path(&a.manifest, &a.out))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Mc(mc) => match mc.command {
            McCommand::Verify(a) => {
                let mut config = EnsembleConfig::new(a.n, a.samples, a.seed);
                if let Some(spec) = &a.bins {
                    config.bin_spec = parse_bins(spec)?;
                }
                if a.eigenvalues_only {
                    config.mode = CampaignMode::EigenvaluesOnly;
                }
                let mut manifest = RunManifest::begin(
                    argv,
                    serde_json::to_value(&config)?,
                    Some(a.seed),
                );
                let mut archive_file = match &a.archive {
                    Some(p) => Some(std::fs::File::create(p)?),
                    None => None,
                };
                let payload = match verify::verify(
                    &config,
                    archive_file.as_mut().map(|f| f as &mut dyn std::io::Write),
                    200,
                ) {
                    Ok(p) => p,
                    Err(e) => {
                        manifest.finish(&format!("failed: {e}"));
                        manifest.write(&manifest_path(&a.manifest, &a.out))?;
                        return Err(e);
                    }
                };
                if let Some(p) = &a.archive {
                    let bytes = std::fs::read(p)?;
                    manifest.record_output(Path::new(p), &bytes);
                }
                match a.format {
                    Format::Csv => {
                        let stem = a.out.clone().unwrap_or_else(|| PathBuf::from("mc-verify"));
                        let (h1, r1) = verify::csv_rows_single(&payload.rho1);
                        write_output(&mut manifest, &suffixed(&stem, "rho1.csv"), &csv_bytes(&h1, &r1)?)?;
                        let (h2, r2) = verify::csv_rows_single(&payload.d11);
                        write_output(&mut manifest, &suffixed(&stem, "d11.csv"), &csv_bytes(&h2, &r2)?)?;
                        let (h3, r3) = verify::csv_rows_pair(&payload.d12);
                        write_output(&mut manifest, &suffixed(&stem, "d12.csv"), &csv_bytes(&h3, &r3)?)?;
                    }
                    Format::Json => {
                        manifest.finish("ok");
                        let bytes = json_bytes(&manifest, &payload)?;
                        match &a.out {
                            Some(path) => write_output(&mut manifest, path, &bytes)?,
                            None => print!("{}", String::from_utf8_lossy(&bytes)),
                        }
                    }
                }
                println!(
                    "mc verify: rejection rate {:.2e}; matching overlap convention: {}",
                    payload.report.rejection_rate(),
                    payload.convention.matching
                );
                manifest.finish("ok");
                manifest.write(&manifest_path(&a.manifest, &a.out))?;
                Ok(ExitCode::SUCCESS)
            }
        },

        Command::Bulk(bulk) => match bulk.command {
            BulkCommand::Converge(a) => {
                let config = serde_json::json!({
                    "z0": [a.z0.re, a.z0.im],
                    "n_list": a.n_list.0,
                    "points": a.points,
                    "seed": a.seed,
                });
                let mut manifest = RunManifest::begin(argv, config, Some(a.seed));
                let payload = match converge::converge(a.z0, &a.n_list.0, a.points, a.seed) {
                    Ok(p) => p,
                    Err(e) => {
                        manifest.finish(&format!("failed: {e}"));
                        manifest.write(&manifest_path(&a.manifest, &a.out))?;
                        return Err(e.into());
                    }
                };
                let bytes = match a.format {
                    Format::Csv => {
                        let (h, r) = converge::csv_rows(&payload);
                        csv_bytes(&h, &r)?
                    }
                    Format::Json => {
                        manifest.finish("ok");
                        json_bytes(&manifest, &payload)?
                    }
                };
                match &a.out {
                    Some(path) => write_output(&mut manifest, path, &bytes)?,
                    None => print!("{}", String::from_utf8_lossy(&bytes)),
                }
                for (i, n) in payload.n_list.iter().enumerate() {
                    println!(
                        "N = {n}: sup|R_N − K11_bulk| = {:.3e}, (1/N)·D11(√N z0) = {:.6} (bulk {:.6})",
                        payload.sup_error[i],
                        payload.k1_value[i],
                        (1.0 - a.z0.norm_sqr()) / std::f64::consts::PI
                    );
                }
                manifest.finish("ok");
                manifest.write(&manifest_path(&a.manifest, &a.out))?;
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_bins(spec: &str) -> anyhow::Result<BinSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        anyhow::bail!("--bins must be r_max:n_r:n_theta");
    }
    Ok(BinSpec::Annular {
        r_max: parts[0].parse()?,
        n_r: parts[1].parse()?,
        n_theta: parts[2].parse()?,
    })
}
