use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use sumsq_core::basisrewrite::{expand_commutator, growth_fit, BasisForm};
use sumsq_core::estimsim::{max_weight, Mode, SimParams};
use sumsq_core::fields::{iterated_bracket, BracketWord};
use sumsq_core::normalform::{SampleGrid, Status};
use sumsq_core::pipeline::{check_expectation, run_pipeline, PipelineOptions, PipelineOutcome};
use sumsq_core::specfile::{parse_field, parse_spec, SpecDocument, SpecError};
use sumsq_core::symcore::rat;

const EXIT_IO: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_COORDS: u8 = 3;
const EXIT_PARSE: u8 = 4;

/// Classify sums of squares of three vector fields near a characteristic point.
#[derive(Parser)]
#[command(name = "sumsq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full classification and print a report.
    Classify {
        file: PathBuf,
        /// Also write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Series truncation order (default 2(q+1)).
        #[arg(long)]
        trunc: Option<u32>,
        /// Sample points per axis for the independence check.
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Print the bracket stratification layers.
    Stratify {
        file: PathBuf,
        #[arg(long)]
        max_level: usize,
    },
    /// Print an iterated bracket such as [X1, [X1, X3]] for word 1,1,3.
    Bracket {
        file: PathBuf,
        #[arg(long)]
        word: BracketWord,
    },
    /// Expand [X_j, D3^m] in the X basis (straightened coordinates).
    Expand {
        file: PathBuf,
        #[arg(short)]
        j: u8,
        #[arg(short)]
        m: u32,
        #[arg(long, default_value_t = 8)]
        trunc: u32,
    },
    /// Write a field `α D1 + β x1^{p-1} D2 + γ x1^{q-1} D3` (straightened
    /// coordinates) as a X1 + b X2 + c X3.
    Basis {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 8)]
        trunc: u32,
    },
    /// Search the exponent bookkeeping of the iterated estimate.
    EstimateSim {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        q: u64,
        #[arg(short)]
        r: u64,
        #[arg(long, default_value = "dp")]
        mode: Mode,
        /// Write the maximizing derivation here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Cutoff derivative budget as a multiple of r (default max(3, ⌈q/p⌉)).
        #[arg(long)]
        cutoff_factor: Option<u64>,
        /// Print the result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Classify every `.op` file in a directory and compare with its
    /// `expect:` line.
    Corpus { dir: PathBuf },
}

/// Error carrying the process exit code.
struct Failure(u8, anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure(EXIT_IO, e)
    }
}

fn parse_error(path: &Path, e: SpecError) -> Failure {
    Failure(EXIT_PARSE, anyhow!("{}:{e}", path.display()))
}

fn load(path: &Path) -> Result<SpecDocument, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&text).map_err(|e| parse_error(path, e))
}

fn doc_name(doc: &SpecDocument, path: &Path) -> String {
    doc.name
        .clone()
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Classified => 0,
        Status::AssumptionViolated => EXIT_VIOLATED,
        Status::NeedsCoordinateChange => EXIT_COORDS,
    }
}

/// Runs the pipeline and insists on a usable straightened standard form.
fn classified(path: &Path, trunc: Option<u32>) -> Result<(SpecDocument, PipelineOutcome), Failure> {
    let doc = load(path)?;
    let opts = PipelineOptions { trunc, ..Default::default() };
    let out = run_pipeline(&doc_name(&doc, path), &doc.spec, &opts);
    if out.standard_form.is_none() {
        let why = out.report.stages.iter().find(|s| s.outcome == "error").map(|s| s.detail.clone()).unwrap_or_default();
        return Err(Failure(status_code(out.report.status), anyhow!("classification failed: {why}")));
    }
    Ok((doc, out))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Classify { file, json, trunc, grid } => {
            let doc = load(&file)?;
            let opts = PipelineOptions { trunc, grid: SampleGrid { half_width: rat(1, 4), n: grid }, max_level: None };
            let out = run_pipeline(&doc_name(&doc, &file), &doc.spec, &opts);
            match json.as_deref() {
                Some(p) if p == Path::new("-") => println!("{}", out.report.to_json()),
                Some(p) => {
                    print!("{}", out.report);
                    std::fs::write(p, out.report.to_json() + "\n")
                        .with_context(|| format!("writing {}", p.display()))?;
                }
                None => print!("{}", out.report),
            }
            Ok(status_code(out.report.status))
        }
        Command::Stratify { file, max_level } => {
            let doc = load(&file)?;
            let opts = PipelineOptions { max_level: Some(max_level), ..Default::default() };
            let out = run_pipeline(&doc_name(&doc, &file), &doc.spec, &opts);
            let Some(straight) = &out.straightened else {
                return Err(Failure(status_code(out.report.status), anyhow!("could not straighten the characteristic set")));
            };
            let layers = sumsq_core::fields::stratification(straight, max_level)
                .map_err(|e| Failure(EXIT_COORDS, anyhow!("{e}")))?;
            for l in layers {
                println!("Σ_{:<3} {:<13} {}", l.level, l.change.to_string(), l.shape);
            }
            Ok(0)
        }
        Command::Bracket { file, word } => {
            let doc = load(&file)?;
            println!("{word} = {}", iterated_bracket(&doc.spec, &word));
            Ok(0)
        }
        Command::Expand { file, j, m, trunc } => {
            let (_, out) = classified(&file, None)?;
            let sf = out.standard_form.as_ref().expect("checked");
            let straight = out.straightened.as_ref().expect("checked");
            let basis = BasisForm::from_spec(straight, sf.p, sf.q).map_err(|e| Failure(EXIT_VIOLATED, anyhow!("{e}")))?;
            let table = expand_commutator(&basis, j, m, trunc).map_err(|e| Failure(EXIT_VIOLATED, anyhow!("{e}")))?;
            println!("[X{j}, D3^{m}] = Σ_ℓ C({m},ℓ) Σ_h γ_{j}h^(ℓ) X_h D3^({m}-ℓ), truncated below degree {trunc}");
            for (l, row) in table.entries.iter().enumerate() {
                for (h, g) in row.iter().enumerate() {
                    println!("  γ_{j}{}^({l}) = {g}", h + 1);
                }
            }
            let fit = growth_fit(&table, trunc);
            let norms: Vec<String> = fit.norms.iter().map(|n| format!("{n:.4}")).collect();
            println!("norms (degree ≤ {}): [{}], fitted C = {:.4}", fit.degree, norms.join(", "), fit.c);
            Ok(0)
        }
        Command::Basis { file, target, trunc } => {
            let (doc, out) = classified(&file, None)?;
            let sf = out.standard_form.as_ref().expect("checked");
            let straight = out.straightened.as_ref().expect("checked");
            let basis = BasisForm::from_spec(straight, sf.p, sf.q).map_err(|e| Failure(EXIT_VIOLATED, anyhow!("{e}")))?;
            let target = parse_field(&target, &doc.vars).map_err(|e| Failure(EXIT_PARSE, anyhow!("target: {e}")))?;
            let coeffs = basis.solve_basis(&target, trunc).map_err(|e| Failure(EXIT_VIOLATED, anyhow!("{e}")))?;
            println!("a = {}", coeffs.a);
            println!("b = {}", coeffs.b);
            println!("c = {}", coeffs.c);
            let res = basis.residual(&target, &coeffs);
            println!("residual below degree {trunc}: {}", if res.is_zero() { "0".to_string() } else { res.to_string() });
            Ok(0)
        }
        Command::EstimateSim { p, q, r, mode, trace, cutoff_factor, json } => {
            let params = SimParams::new(p, q, r, cutoff_factor).map_err(|e| Failure(EXIT_PARSE, anyhow!("{e}")))?;
            let res = max_weight(&params, mode);
            if json {
                println!("{}", serde_json::to_string_pretty(&res).context("serialising result")?);
            } else {
                let w = res.weight.map_or_else(|| "none (no complete derivation)".into(), |w| w.to_string());
                println!("p={p} q={q} r={r} mode={mode} budget={}", params.budget);
                println!("max K+L = {w}  (⌈qr/p⌉ = {}, states explored {})", params.bound(), res.states_explored);
                if let Some(w) = res.weight {
                    println!("ratio (K+L)/r = {:.4}  (q/p = {:.4})", w as f64 / r as f64, q as f64 / p as f64);
                }
            }
            if let Some(path) = trace {
                std::fs::write(&path, res.trace.to_text(mode)).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(0)
        }
        Command::Corpus { dir } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "op"))
                .collect();
            paths.sort();
            let results: Vec<(PathBuf, Result<Vec<String>, String>)> = std::thread::scope(|s| {
                let handles: Vec<_> = paths
                    .iter()
                    .map(|p| {
                        s.spawn(move || {
                            let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
                            let doc = parse_spec(&text).map_err(|e| e.to_string())?;
                            if doc.expect.is_empty() {
                                return Ok(vec!["no expectations declared".to_string()]);
                            }
                            let out = run_pipeline(&doc_name(&doc, p), &doc.spec, &PipelineOptions::default());
                            Ok(check_expectation(&doc.expect, &out.report))
                        })
                    })
                    .collect();
                paths.iter().cloned().zip(handles.into_iter().map(|h| h.join().expect("worker panicked"))).collect()
            });
            let mut failed = 0;
            for (path, res) in &results {
                let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                match res {
                    Ok(m) if m.is_empty() => println!("PASS {name}"),
                    Ok(m) => {
                        failed += 1;
                        println!("FAIL {name}: {}", m.join("; "));
                    }
                    Err(e) => {
                        failed += 1;
                        println!("FAIL {name}: {e}");
                    }
                }
            }
            println!("{} of {} passed", results.len() - failed, results.len());
            Ok(if failed == 0 { 0 } else { EXIT_IO })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
