//! LLM-in-the-loop algorithm discovery: propose, compile, grade, iterate.
//!
//! The loop is transport-agnostic: a [`Transport`] produces one completion
//! per round. Production use points at a chat-completions HTTP endpoint;
//! every test runs offline through [`MockTransport`]. Session state is
//! persisted after every round, so a crashed session resumes from disk.

mod prompts;
mod transport;

pub use prompts::{build_feedback_prompt, build_initial_prompt, FeedbackContext, PROMPT_VERSION};
pub use transport::{ChatMessage, HttpTransport, MockTransport, Transport, TransportError};

use crate::frontend::{self, has_errors};
use crate::optprob::BuildOptions;
use crate::pipeline::analyze_source;
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    pub players: usize,
    pub max_rounds: usize,
    /// Consecutive duplicates triggering a restart.
    pub duplicate_threshold: usize,
    /// Chat-history length (messages) triggering a restart.
    pub history_restart: usize,
    pub line_cap: usize,
    pub strategy_cap: usize,
    pub block_allowlist: Vec<String>,
    pub require_stationary_point: bool,
    /// Restarts clear the chat history; the dedup record survives unless
    /// this is set.
    pub clear_dedup_on_restart: bool,
    pub session_dir: PathBuf,
    pub analyzer_timeout_secs: u64,
    pub solver: SolverConfig,
}

impl DiscoveryConfig {
    pub fn offline_defaults(players: usize, session_dir: PathBuf) -> Self {
        DiscoveryConfig {
            endpoint: String::new(),
            model: "mock".into(),
            api_key_env: "LEGONE_API_KEY".into(),
            temperature: 0.8,
            players,
            max_rounds: 12,
            duplicate_threshold: 3,
            history_restart: 20,
            line_cap: 60,
            strategy_cap: 12,
            block_allowlist: default_allowlist(players),
            require_stationary_point: true,
            clear_dedup_on_restart: false,
            session_dir,
            analyzer_timeout_secs: 300,
            solver: SolverConfig::default(),
        }
    }
}

pub fn default_allowlist(players: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..=players {
        out.push(format!("Random{}", i));
        out.push(format!("BestResponse{}", i));
        out.push(format!("UniformMixing{}", i));
        out.push(format!("EqMix{}", i));
        for j in 1..=players {
            if i != j {
                out.push(format!("ZeroSumNE{}{}", i, j));
                out.push(format!("StationaryPoint{}{}", i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Outcome {
    SyntaxError { diagnostics: String },
    TooComplex { reason: String },
    Duplicate { of_round: usize },
    AnalyzerTimeout,
    TransportError { message: String },
    Analyzed { bound: f64, delta: bool, certificate: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub round: usize,
    pub program: String,
    /// Rename-invariant hash of the canonicalized IR (or of the raw text
    /// when the program does not parse).
    pub canonical_hash: String,
    pub outcome: Outcome,
    pub unix_time: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionReport {
    pub attempts: Vec<AttemptRecord>,
    pub best_bound: Option<f64>,
    pub best_delta: bool,
    pub best_round: Option<usize>,
    pub restarts: usize,
    pub rounds_run: usize,
}

/// Rename-invariant canonical hash: identifiers are renamed in definition
/// order, so trivially renamed duplicates collide.
pub fn canonical_hash(source: &str) -> String {
    let canonical = match frontend::parse(source) {
        Ok(prog) => {
            let mut renamed = prog.clone();
            renamed.algorithm.name = "Main".to_string();
            let mut map: Vec<(String, String)> = Vec::new();
            for (i, a) in prog.algorithm.assignments().enumerate() {
                for (k, out) in a.outputs.iter().enumerate() {
                    map.push((out.clone(), format!("v{}_{}", i, k)));
                }
            }
            let rename = |n: &str| -> String {
                map.iter().find(|(from, _)| from == n).map(|(_, to)| to.clone()).unwrap_or_else(|| n.to_string())
            };
            for stmt in &mut renamed.algorithm.statements {
                match stmt {
                    frontend::Statement::Assign(a) => {
                        for out in &mut a.outputs {
                            *out = rename(out);
                        }
                        for arg in &mut a.args {
                            if let frontend::Arg::Ident(n) = arg {
                                *n = rename(n);
                            }
                        }
                        a.line = 0;
                    }
                    frontend::Statement::Branch { condition, line } => {
                        *line = 0;
                        for side in [&mut condition.lhs, &mut condition.rhs] {
                            *side = side.map_atoms(&mut |t| {
                                let mut t = t.clone();
                                for slot in t.strategy_args_mut() {
                                    if let crate::logic::StrategyArg::Var(n) = slot {
                                        *n = rename(n);
                                    }
                                }
                                crate::logic::Expr::Atom(t)
                            });
                        }
                    }
                }
            }
            if let Some(profile) = &mut renamed.algorithm.return_profile {
                for n in profile {
                    *n = rename(n);
                }
            }
            renamed.algorithm.return_line = None;
            frontend::pretty(&renamed)
        }
        Err(_) => source.trim().to_string(),
    };
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Extract the program from a completion: fenced code block when present,
/// otherwise the raw text.
pub fn extract_program(completion: &str) -> String {
    if let Some(start) = completion.find("```") {
        let after = &completion[start + 3..];
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after[body_start..];
        if let Some(end) = body.find("```") {
            return body[..end].trim().to_string();
        }
    }
    completion.trim().to_string()
}

/// Iterate propose → compile → analyze → feedback until the round budget,
/// persisting every attempt and certificate.
pub fn run_loop(cfg: &DiscoveryConfig, transport: &mut dyn Transport) -> std::io::Result<SessionReport> {
    std::fs::create_dir_all(cfg.session_dir.join("attempts"))?;
    let stop_file = cfg.session_dir.join("stop");

    let mut report = SessionReport {
        attempts: Vec::new(),
        best_bound: None,
        best_delta: false,
        best_round: None,
        restarts: 0,
        rounds_run: 0,
    };
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut hash_round: Vec<(String, usize)> = Vec::new();
    let mut history: Vec<ChatMessage> = vec![ChatMessage::user(build_initial_prompt(cfg))];
    let mut consecutive_duplicates = 0usize;

    for round in 1..=cfg.max_rounds {
        if stop_file.exists() {
            break;
        }
        report.rounds_run = round;

        let completion = match send_with_backoff(transport, &history) {
            Ok(c) => c,
            Err(e) => {
                let record = AttemptRecord {
                    round,
                    program: String::new(),
                    canonical_hash: String::new(),
                    outcome: Outcome::TransportError { message: e.to_string() },
                    unix_time: now(),
                };
                persist(cfg, &record, None)?;
                report.attempts.push(record);
                save_session(cfg, &report)?;
                continue;
            }
        };
        history.push(ChatMessage::assistant(&completion));
        let program = extract_program(&completion);
        let hash = canonical_hash(&program);

        let outcome = if seen.contains(&hash) {
            consecutive_duplicates += 1;
            let of_round = hash_round.iter().find(|(h, _)| *h == hash).map(|(_, r)| *r).unwrap_or(0);
            Outcome::Duplicate { of_round }
        } else {
            consecutive_duplicates = 0;
            seen.insert(hash.clone());
            hash_round.push((hash.clone(), round));
            grade(cfg, &program, round)
        };

        let record = AttemptRecord {
            round,
            program: program.clone(),
            canonical_hash: hash,
            outcome: outcome.clone(),
            unix_time: now(),
        };
        if let Outcome::Analyzed { bound, delta, .. } = &outcome {
            let better = report.best_bound.map(|b| *bound < b).unwrap_or(true);
            if better {
                report.best_bound = Some(*bound);
                report.best_delta = *delta;
                report.best_round = Some(round);
            }
        }
        persist(cfg, &record, None)?;
        report.attempts.push(record);
        save_session(cfg, &report)?;

        // restarts: persistent duplicates or an overlong conversation
        let dup_restart = consecutive_duplicates >= cfg.duplicate_threshold;
        let history_restart = history.len() >= cfg.history_restart;
        if dup_restart || history_restart {
            report.restarts += 1;
            history = vec![ChatMessage::user(build_initial_prompt(cfg))];
            consecutive_duplicates = 0;
            if cfg.clear_dedup_on_restart {
                seen.clear();
                hash_round.clear();
            }
            continue;
        }

        let feedback = build_feedback_prompt(
            cfg,
            &FeedbackContext {
                last: report.attempts.last().unwrap(),
                best_bound: report.best_bound,
                best_delta: report.best_delta,
                past: &report.attempts,
            },
        );
        history.push(ChatMessage::user(&feedback));
    }

    save_session(cfg, &report)?;
    Ok(report)
}

fn send_with_backoff(
    transport: &mut dyn Transport,
    history: &[ChatMessage],
) -> Result<String, TransportError> {
    let mut delay = Duration::from_millis(250);
    let mut last = None;
    for _ in 0..3 {
        match transport.complete(history) {
            Ok(c) => return Ok(c),
            Err(e) if e.retryable() => {
                last = Some(e);
                std::thread::sleep(delay);
                delay *= 4;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(TransportError::Exhausted))
}

/// Compile and analyze one proposal; every failure mode becomes a recorded
/// outcome rather than an error.
fn grade(cfg: &DiscoveryConfig, program: &str, _round: usize) -> Outcome {
    let parsed = match frontend::parse(program) {
        Ok(p) => p,
        Err(diags) => {
            return Outcome::SyntaxError { diagnostics: frontend::render(&diags) };
        }
    };
    let diags = frontend::typecheck(&parsed);
    if has_errors(&diags) {
        return Outcome::SyntaxError { diagnostics: frontend::render(&diags) };
    }

    let line_count = program.lines().filter(|l| !l.trim().is_empty()).count();
    if line_count > cfg.line_cap {
        return Outcome::TooComplex {
            reason: format!("{} code lines exceed the cap of {}; simplify the algorithm", line_count, cfg.line_cap),
        };
    }
    if let Ok(by_player) = crate::blocks::strategies_by_player(&parsed) {
        let strategies: usize = by_player.iter().map(|v| v.len()).sum();
        if strategies > cfg.strategy_cap {
            return Outcome::TooComplex {
                reason: format!(
                    "{} constructed strategies exceed the cap of {}; simplify the algorithm",
                    strategies, cfg.strategy_cap
                ),
            };
        }
    }
    if cfg.require_stationary_point
        && !parsed.algorithm.assignments().any(|a| a.block.starts_with("StationaryPoint"))
    {
        return Outcome::SyntaxError {
            diagnostics: "0:0: error[TypeMismatch]: the task requires at least one StationaryPoint block".into(),
        };
    }

    // the analyzer runs on a worker so a runaway solve cannot stall the loop
    let deadline = Duration::from_secs(cfg.analyzer_timeout_secs);
    let src = program.to_string();
    let solver = cfg.solver.clone();
    let (tx, rx) = std::sync::mpsc::channel();
    let started = Instant::now();
    std::thread::spawn(move || {
        let result = analyze_source(&src, BuildOptions::default(), &solver)
            .map(|out| (out.certificate.bound, out.certificate.delta_flag, out.certificate));
        let _ = tx.send(result);
    });
    match rx.recv_timeout(deadline) {
        Ok(Ok((bound, delta, cert))) => {
            let _ = started;
            Outcome::Analyzed {
                bound,
                delta,
                certificate: serde_json::to_string_pretty(&cert).unwrap_or_default(),
            }
        }
        Ok(Err(e)) => Outcome::SyntaxError { diagnostics: e.to_string() },
        Err(_) => Outcome::AnalyzerTimeout,
    }
}

fn persist(cfg: &DiscoveryConfig, record: &AttemptRecord, _extra: Option<()>) -> std::io::Result<()> {
    let base = cfg.session_dir.join("attempts");
    std::fs::write(base.join(format!("{:03}.lne", record.round)), &record.program)?;
    if let Outcome::Analyzed { certificate, .. } = &record.outcome {
        std::fs::write(base.join(format!("{:03}.cert.json", record.round)), certificate)?;
    }
    Ok(())
}

fn save_session(cfg: &DiscoveryConfig, report: &SessionReport) -> std::io::Result<()> {
    std::fs::write(
        cfg.session_dir.join("session.json"),
        serde_json::to_string_pretty(report).expect("session serializes"),
    )
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_hash_is_rename_invariant() {
        let a = "game 2 players\n\nalgorithm A:\n    x: Strategy1 = Random1()\n    y: Strategy2 = BestResponse2(x)\n    return x, y\nend\n";
        let b = "game 2 players\n\nalgorithm B:\n    foo: Strategy1 = Random1()\n    bar: Strategy2 = BestResponse2(foo)\n    return foo, bar\nend\n";
        assert_eq!(canonical_hash(a), canonical_hash(b));
        let c = a.replace("BestResponse2(x)", "Random2()");
        assert_ne!(canonical_hash(a), canonical_hash(&c));
    }

    #[test]
    fn extract_program_prefers_fences() {
        let text = "Here is my algorithm:\n```\ngame 2 players\n```\nhope it works";
        assert_eq!(extract_program(text), "game 2 players");
        assert_eq!(extract_program("raw text"), "raw text");
    }
}
