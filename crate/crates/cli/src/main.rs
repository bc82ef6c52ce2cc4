//! `cbnorm` command-line front end.
//!
//! Every run emits one report (JSON by default) that embeds the tolerances and
//! seed it used. Exit status: 0 on success, 2 when the mathematics says no (a
//! certification verdict is false or a precondition was refused), 1 when the
//! run itself broke (bad input, solver failure).

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cbnorm::acceptance::{run_all, AcceptanceConfig};
use cbnorm::channel::{map_from_json, map_to_json, named_map};
use cbnorm::game::{
    analyze_game, construct_game, decompose_wh_equivalent, explore_hermitian_inflation, named_game,
    orthogonal_reversible_pair, GameTriple,
};
use cbnorm::inflation::{corollary_check, transpose_factorization, verify_saturation};
use cbnorm::isometry::{certify_complete_isometry, extract_isometry_structure};
use cbnorm::linalg::{rng_from_seed, trace_norm};
use cbnorm::norms::{
    diamond_norm_certificate, diamond_norm_seesaw, hermitian_induced_norm, induced_trace_norm, multiplicity_norm,
    SeesawOptions,
};
use cbnorm::{CertificationReport, Error, LinearMapRep};

#[derive(Parser, Debug)]
#[command(name = "cbnorm", version, about = "Trace-norm and completely bounded norm analyses of linear maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Config,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Config {
    /// Tolerance for certification checks.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = positive)]
    tol: f64,
    /// Tolerance for the SDP solver.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = positive)]
    sdp_tol: f64,
    /// Random restarts per see-saw search.
    #[arg(long, global = true, default_value_t = 50, value_parser = at_least_one)]
    restarts: usize,
    #[arg(long, global = true, env = "CBNORM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

/// Maps are given as `transpose:n`, `identity:n`, `depolarizing:n`, `wh0:n`,
/// `wh1:n`, or a path to a JSON file; games as `wh:n` or a JSON path.
#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Choi matrix and structural predicates of a map.
    Choi {
        #[arg(long)]
        map: String,
    },
    /// Induced, multiplicity and completely bounded trace norms.
    Norms {
        #[arg(long)]
        map: String,
        /// Multiplicity (defaults to the input dimension).
        #[arg(short)]
        k: Option<usize>,
    },
    /// Certifies that a map is a complete trace-norm isometry.
    CertifyIsometry {
        #[arg(long)]
        map: String,
    },
    /// Decomposes a complete isometry as X ↦ U(X ⊗ σ)V*.
    ExtractStructure {
        #[arg(long)]
        map: String,
    },
    /// Searches for saturation of ‖Φ ⊗ id_k‖₁ ≤ k‖Φ‖₁ and factors saturating maps.
    Saturation {
        #[arg(long)]
        map: String,
        /// Multiplicity (defaults to the input dimension).
        #[arg(short)]
        k: Option<usize>,
    },
    /// Checks the equivalent characterizations of a maximal norm gap.
    Corollary {
        #[arg(long)]
        map: String,
    },
    /// Entangled and unentangled values of a discrimination game.
    GameAnalyze {
        #[arg(long)]
        game: String,
    },
    /// Builds a maximal-gap game from reversible channels.
    GameConstruct {
        /// Weight of the first reversible channel, in [0, 1].
        #[arg(long)]
        r: f64,
        /// Input dimension.
        #[arg(short, long)]
        n: usize,
        #[arg(long)]
        psi0: Option<String>,
        #[arg(long)]
        psi1: Option<String>,
        /// Output dimension of randomly drawn channels (defaults to 2n·env_dim).
        #[arg(long)]
        m: Option<usize>,
        /// Environment dimension of randomly drawn channels.
        #[arg(long, default_value_t = 1)]
        env_dim: usize,
    },
    /// Writes a maximal-gap game in terms of the Werner-Holevo game.
    GameDecompose {
        #[arg(long)]
        game: String,
    },
    /// Compares Hermitian-restricted norms with and without an ancilla.
    ExploreHermitian {
        #[arg(long)]
        map: String,
        #[arg(short, default_value_t = 2)]
        k: usize,
    },
    /// Runs the acceptance suite.
    Selftest,
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err("must be a positive number".into())
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    let x: usize = s.parse().map_err(|e| format!("{e}"))?;
    if x >= 1 {
        Ok(x)
    } else {
        Err("must be at least 1".into())
    }
}

/// A finished analysis: its result and whether it passed.
struct Outcome {
    result: Value,
    pass: bool,
}

impl Outcome {
    fn new(result: impl Serialize, pass: bool) -> Self {
        Self {
            result: serde_json::to_value(result).expect("results serialize"),
            pass,
        }
    }
}

enum Failure {
    /// A precondition was checked and failed; the report says which.
    Refused(String, CertificationReport),
    Broken(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Refusal { reason, report } => Failure::Refused(reason, *report),
            other => Failure::Broken(other.to_string()),
        }
    }
}

type RunResult = Result<Outcome, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Broken(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Broken(format!("{}: {e}", path.display())))
}

fn parse_map(spec: &str) -> Result<LinearMapRep, Failure> {
    let path = Path::new(spec);
    let phi = if path.is_file() {
        map_from_json(&read_json(path)?).map_err(|e| Failure::Broken(format!("{spec}: {e}")))?
    } else {
        named_map(spec)?
    };
    log_predicates(spec, &phi);
    Ok(phi)
}

fn parse_game(spec: &str) -> Result<GameTriple, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        GameTriple::from_json(&read_json(path)?).map_err(|e| match e {
            Error::Refusal { .. } => e.into(),
            e => Failure::Broken(format!("{spec}: {e}")),
        })
    } else {
        Ok(named_game(spec)?)
    }
}

fn log_predicates(spec: &str, phi: &LinearMapRep) {
    let tol = cbnorm::game::VALIDATION_TOL;
    log::info!(
        "{spec}: M_{} -> M_{}, residuals: Hermiticity-preserving {:.3e}, CP {:.3e}, TP {:.3e}",
        phi.in_dim(),
        phi.out_dim(),
        phi.hermiticity_preserving(tol).residual,
        phi.completely_positive(tol).residual,
        phi.trace_preserving(tol).residual
    );
}

fn run(command: &Command, cfg: &Config) -> RunResult {
    let opts = SeesawOptions::with_seed(cfg.seed).restarts(cfg.restarts);
    match command {
        Command::Choi { map } => {
            let phi = parse_map(map)?;
            let tol = cfg.tol;
            Ok(Outcome::new(
                json!({
                    "map": map_to_json(&phi),
                    "choi_trace_norm": trace_norm(phi.choi())?,
                    "hermiticity_preserving": phi.hermiticity_preserving(tol),
                    "completely_positive": phi.completely_positive(tol),
                    "trace_preserving": phi.trace_preserving(tol),
                }),
                true,
            ))
        }
        Command::Norms { map, k } => {
            let phi = parse_map(map)?;
            let k = k.unwrap_or(phi.in_dim());
            let hermitian = if phi.is_hermiticity_preserving(cfg.tol) {
                Some(hermitian_induced_norm(&phi, &opts)?)
            } else {
                None
            };
            Ok(Outcome::new(
                json!({
                    "choi_trace_norm": trace_norm(phi.choi())?,
                    "induced_trace_norm": induced_trace_norm(&phi, &opts)?,
                    "multiplicity": multiplicity_norm(&phi, k, &opts, cfg.tol)?,
                    "cb_norm_seesaw": diamond_norm_seesaw(&phi, &opts)?,
                    "cb_norm_sdp": diamond_norm_certificate(&phi, cfg.sdp_tol)?,
                    "hermitian_induced_norm": hermitian,
                }),
                true,
            ))
        }
        Command::CertifyIsometry { map } => {
            let rep = certify_complete_isometry(&parse_map(map)?, cfg.tol);
            let pass = rep.verdict;
            Ok(Outcome::new(rep, pass))
        }
        Command::ExtractStructure { map } => {
            let phi = parse_map(map)?;
            let s = extract_isometry_structure(&phi, cfg.tol)?;
            let residual = s.reconstruction_residual(&phi)?;
            Ok(Outcome::new(
                json!({ "structure": s, "reconstruction_residual": residual }),
                residual <= cfg.tol,
            ))
        }
        Command::Saturation { map, k } => {
            let phi = parse_map(map)?;
            let k = k.unwrap_or(phi.in_dim());
            let (rep, witness) = verify_saturation(&phi, k, &opts, cfg.tol)?;
            let mut pass = rep.verdict;
            let factorization = match (&witness, rep.verdict) {
                (Some(w), true) => match transpose_factorization(&phi, w, cfg.tol) {
                    Ok(f) => {
                        pass &= f.verdict;
                        json!(f)
                    }
                    Err(Error::Refusal { reason, report }) => {
                        pass = false;
                        json!({ "refused": reason, "report": report })
                    }
                    Err(e) => return Err(e.into()),
                },
                _ => Value::Null,
            };
            Ok(Outcome::new(
                json!({ "report": rep, "witness": witness, "factorization": factorization }),
                pass,
            ))
        }
        Command::Corollary { map } => {
            let c = corollary_check(&parse_map(map)?, &opts, cfg.tol, cfg.sdp_tol)?;
            let pass = c.report.verdict;
            Ok(Outcome::new(c, pass))
        }
        Command::GameAnalyze { game } => {
            let a = analyze_game(&parse_game(game)?, &opts, cfg.tol, cfg.sdp_tol)?;
            let pass = a.gap_certificate.verdict;
            Ok(Outcome::new(a, pass))
        }
        Command::GameConstruct {
            r,
            n,
            psi0,
            psi1,
            m,
            env_dim,
        } => {
            let (p0, p1) = if psi0.is_none() && psi1.is_none() {
                let m = m.unwrap_or(2 * n * env_dim);
                let mut rng = rng_from_seed(cfg.seed);
                let (a, b) = orthogonal_reversible_pair(*n, m, *env_dim, *env_dim, &mut rng)?;
                (Some(a), Some(b))
            } else {
                (
                    psi0.as_deref().map(parse_map).transpose()?,
                    psi1.as_deref().map(parse_map).transpose()?,
                )
            };
            let g = construct_game(*r, p0.as_ref(), p1.as_ref(), *n, cfg.tol)?;
            Ok(Outcome::new(
                json!({
                    "game": g.to_json(),
                    "psi0": p0.as_ref().map(map_to_json),
                    "psi1": p1.as_ref().map(map_to_json),
                }),
                true,
            ))
        }
        Command::GameDecompose { game } => {
            let d = decompose_wh_equivalent(&parse_game(game)?, &opts, cfg.tol, cfg.sdp_tol)?;
            let pass = d.report.verdict;
            Ok(Outcome::new(d, pass))
        }
        Command::ExploreHermitian { map, k } => {
            let e = explore_hermitian_inflation(&parse_map(map)?, *k, &opts)?;
            Ok(Outcome::new(e, true))
        }
        Command::Selftest => {
            let suite = AcceptanceConfig {
                seed: cfg.seed,
                restarts: cfg.restarts,
                ..AcceptanceConfig::default()
            };
            let results = run_all(&suite);
            for r in &results {
                log::info!("{}", r.line());
            }
            let pass = results.iter().all(|r| r.pass);
            Ok(Outcome::new(json!({ "criteria": results }), pass))
        }
    }
}

fn emit(report: &Value, cfg: &Config) -> std::io::Result<()> {
    let mut text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize"),
        Format::Text => render::text(report),
    };
    text.push('\n');
    match &cfg.output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = &cli.config;
    let (status, code, result) = match run(&cli.command, cfg) {
        Ok(o) if o.pass => ("pass", 0, o.result),
        Ok(o) => ("fail", 2, o.result),
        Err(Failure::Refused(reason, report)) => ("fail", 2, json!({ "refused": reason, "report": report })),
        Err(Failure::Broken(msg)) => {
            eprintln!("error: {msg}");
            ("error", 1, json!({ "error": msg }))
        }
    };
    let report = json!({
        "invocation": cli.command,
        "config": cfg,
        "status": status,
        "result": result,
    });
    if let Err(e) = emit(&report, cfg) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
