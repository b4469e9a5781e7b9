//! `legone` — analyze approximation algorithms for Nash equilibria.
//!
//! Exit codes: 0 on success, 1 on compile diagnostics, 2 on solver failure.

use clap::{Args, Parser, Subcommand};
use legone_core::discovery::{self, DiscoveryConfig, HttpTransport, MockTransport, Transport};
use legone_core::frontend;
use legone_core::optprob::BuildOptions;
use legone_core::solver::{self, ExportDialect, SolverConfig};
use legone_core::{bench, oracle, pipeline};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "legone", version, about = "Compile ANE algorithms into provable approximation bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// builtin | export:wolfram | export:json
    #[arg(long, default_value = "builtin")]
    solver: String,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0x1e90)]
    seed: u64,
    /// Feasibility/optimality epsilon.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    /// Case-split constraint min/max into explicit disjuncts (capped).
    #[arg(long, default_value_t = false)]
    full_case_split: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            restarts: self.restarts,
            seed: self.seed,
            tolerance: self.tol,
            max_iterations: self.max_iterations,
            ..Default::default()
        }
    }
    fn build_options(&self) -> BuildOptions {
        BuildOptions { split_constraints: self.full_case_split, ..Default::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a program.
    Check {
        path: PathBuf,
        /// Emit the canonical AST JSON.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Compute and prove the approximation bound of a program.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the certificate (or export script) here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        report: String,
    },
    /// Run the benchmark corpus against golden bounds.
    Bench {
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "table")]
        report: String,
    },
    /// Validate a program empirically on random concrete games.
    Oracle {
        #[arg(long)]
        prog: PathBuf,
        #[arg(long, default_value_t = 1000)]
        games: usize,
        /// Actions per player.
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// bound | encoding | both
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long)]
        save_witness: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Drive an LLM to propose algorithms, graded by the analyzer.
    Discover {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Offline mode: a JSON array of scripted completions.
        #[arg(long)]
        mock: Option<PathBuf>,
    },
    /// Emit the canonical AST JSON.
    DumpAst { path: PathBuf },
    /// Emit the program encoding (phi and the proof goal) as JSON.
    DumpLogic { path: PathBuf },
    /// Emit the instantiated and forgotten comparison system as JSON.
    DumpAbstract { path: PathBuf },
    /// Emit the per-disjunct maximization problem as JSON.
    DumpProblem {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{}", msg);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check { path, dump_ast } => {
            let source = read(&path)?;
            match frontend::check(&source) {
                Ok((prog, warnings)) => {
                    for w in &warnings {
                        eprintln!("{}", w);
                    }
                    if dump_ast {
                        println!("{}", pretty_json(&frontend::dump_ast_json(&prog)));
                    } else {
                        println!(
                            "ok: {} players, {} statements, {} custom blocks",
                            prog.player_count,
                            prog.algorithm.statement_count(),
                            prog.blocks.len()
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(diags) => {
                    eprintln!("{}", frontend::render(&diags));
                    Ok(ExitCode::from(1))
                }
            }
        }

        Command::Analyze { path, solver, out, report } => {
            let source = read(&path)?;
            match solver.solver.as_str() {
                "builtin" => {
                    let output = analyze(&source, &solver)?;
                    let cert = &output.certificate;
                    if !cert.valid {
                        eprintln!("solver failure: a disjunct did not converge");
                        return Ok(ExitCode::from(2));
                    }
                    if report == "json" {
                        println!("{}", pretty_json(&serde_json::to_value(cert).unwrap()));
                    } else {
                        for w in &output.warnings {
                            eprintln!("{}", w);
                        }
                        println!("{}", cert.bound_text());
                    }
                    if let Some(out_path) = out {
                        std::fs::write(&out_path, pretty_json(&serde_json::to_value(cert).unwrap()))
                            .map_err(|e| e.to_string())?;
                    }
                    Ok(ExitCode::SUCCESS)
                }
                s if s.starts_with("export:") => {
                    let dialect = ExportDialect::parse(&s["export:".len()..])
                        .ok_or_else(|| format!("unknown export dialect '{}'", s))?;
                    let output = analyze(&source, &solver)?;
                    let script = solver::export_script(&output.problem, dialect)
                        .map_err(|e| e.to_string())?;
                    match out {
                        Some(out_path) => {
                            std::fs::write(&out_path, &script).map_err(|e| e.to_string())?;
                            println!("script written to {}", out_path.display());
                        }
                        None => println!("{}", script),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                other => Err(format!("unknown solver '{}'", other)),
            }
        }

        Command::Bench { filter, solver, report } => {
            let r = bench::run_benchmarks(filter.as_deref(), &solver.config());
            if report == "json" {
                println!("{}", pretty_json(&serde_json::to_value(&r).unwrap()));
            } else {
                print!("{}", bench::render_table(&r));
            }
            Ok(if r.all_ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }

        Command::Oracle { prog, games, size, mode, save_witness, solver } => {
            let source = read(&prog)?;
            let (program, _) = frontend::check(&source).map_err(|d| frontend::render(&d))?;
            let actions = vec![size; program.player_count];
            // one seed drives both the game stream and the solver
            let seed = solver.seed;
            let mut failed = false;

            if mode == "encoding" || mode == "both" {
                let report = oracle::validate_encoding(&program, games, &actions, seed)
                    .map_err(|e| e.to_string())?;
                println!(
                    "encoding: {} games, {} constraints checked, worst slack {:.2e}, {} partial, {} other-branch",
                    report.games, report.constraints_checked, report.worst_slack,
                    report.partial_traces, report.other_branch
                );
                if let Some(v) = &report.violation {
                    failed = true;
                    println!("ENCODING VIOLATION: {} by {:.3e} (seed {})", v.constraint, v.violation, v.seed);
                    save_witness_game(&save_witness, &v.game)?;
                }
            }
            if mode == "bound" || mode == "both" {
                let output = analyze(&source, &solver)?;
                let report =
                    oracle::validate_bound(&program, &output.certificate, games, &actions, seed)
                        .map_err(|e| e.to_string())?;
                println!(
                    "bound: certified {} — max observed regret {:.6} over {} games ({} partial, {} other-branch)",
                    output.certificate.bound_text(),
                    report.max_observed_regret,
                    report.games,
                    report.partial_traces,
                    report.other_branch
                );
                if let Some(v) = &report.violation {
                    failed = true;
                    println!("BOUND VIOLATION: observed {:.6} > certified {:.6} (seed {})", v.observed, v.bound, v.seed);
                    save_witness_game(&save_witness, &v.game)?;
                }
            }
            Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }

        Command::Discover { config, mock } => {
            let raw = read(&config)?;
            let cfg: DiscoveryConfig = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
            let report = match mock {
                Some(mock_path) => {
                    let responses: Vec<String> =
                        serde_json::from_str(&read(&mock_path)?).map_err(|e| e.to_string())?;
                    let mut transport = MockTransport::new(responses);
                    discovery::run_loop(&cfg, &mut transport).map_err(|e| e.to_string())?
                }
                None => {
                    let mut transport = HttpTransport::new(
                        &cfg.endpoint,
                        &cfg.model,
                        cfg.temperature,
                        &cfg.api_key_env,
                    );
                    run_live(&cfg, &mut transport)?
                }
            };
            println!(
                "session: {} rounds, best bound {}, {} restarts; details in {}",
                report.rounds_run,
                report
                    .best_bound
                    .map(|b| format!("{:.5}{}", b, if report.best_delta { "+delta" } else { "" }))
                    .unwrap_or_else(|| "none".to_string()),
                report.restarts,
                cfg.session_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::DumpAst { path } => {
            let source = read(&path)?;
            let (prog, _) = frontend::check(&source).map_err(|d| frontend::render(&d))?;
            println!("{}", pretty_json(&frontend::dump_ast_json(&prog)));
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpLogic { path } => {
            let source = read(&path)?;
            let (prog, _) = frontend::check(&source).map_err(|d| frontend::render(&d))?;
            let prog = if prog.options.auto_return_optimal_mixing {
                legone_core::blocks::auto_return(&prog).map_err(|e| e.to_string())?
            } else {
                prog
            };
            let enc = legone_core::logic::encode_program(&prog).map_err(|e| e.to_string())?;
            println!("{}", pretty_json(&legone_core::logic::encoding_to_json(&enc)));
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpAbstract { path } => {
            let source = read(&path)?;
            let output = analyze_shallow(&source)?;
            println!("{}", pretty_json(&serde_json::to_value(&output.system).unwrap()));
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpProblem { path, solver } => {
            let source = read(&path)?;
            let (prog, _) = frontend::check(&source).map_err(|d| frontend::render(&d))?;
            let output = pipeline::analyze_program(
                &prog,
                solver.build_options(),
                &SolverConfig { restarts: 1, max_iterations: 1, ..solver.config() },
            )
            .map_err(|e| e.to_string())?;
            println!("{}", pretty_json(&serde_json::to_value(&output.problem).unwrap()));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_live(cfg: &DiscoveryConfig, transport: &mut dyn Transport) -> Result<discovery::SessionReport, String> {
    discovery::run_loop(cfg, transport).map_err(|e| e.to_string())
}

fn analyze(source: &str, solver: &SolverArgs) -> Result<pipeline::AnalysisOutput, String> {
    pipeline::analyze_source(source, solver.build_options(), &solver.config()).map_err(|e| match e {
        pipeline::PipelineError::Diagnostics(d) => frontend::render(&d),
        other => other.to_string(),
    })
}

fn analyze_shallow(source: &str) -> Result<pipeline::AnalysisOutput, String> {
    let quick = SolverConfig { restarts: 1, max_iterations: 1, ..Default::default() };
    pipeline::analyze_source(source, BuildOptions::default(), &quick).map_err(|e| e.to_string())
}

fn save_witness_game(path: &Option<PathBuf>, game: &oracle::ConcreteGame) -> Result<(), String> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(game).unwrap()).map_err(|e| e.to_string())?;
        eprintln!("witness game written to {}", p.display());
    }
    Ok(())
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))
}

fn pretty_json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json renders")
}
