//! Command-line front end: solve cases, run the relaxation, verify
//! solutions, emit prices and traces, and batch-run robustness studies.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use slopf_core::analysis::{self, OracleFixture};
use slopf_core::case_io::emit_json;
use slopf_core::lp::write_lp_text;
use slopf_core::report::{NetworkSummary, ReportDocument, SolveReport, SolveStatus};
use slopf_core::slp::toy2d;
use slopf_core::{
    build_skeleton, FormulationOptions, Mode, Network, RawCase, SlpParams, StartStrategy,
    ThermalMode,
};

#[derive(Parser)]
#[command(name = "slopf", version, about = "Sequential-LP AC optimal power flow solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the AC OPF (radial or meshed driver chosen by topology).
    Solve(SolveArgs),
    /// Solve the cone-relaxation outer approximation.
    Relax(SolveArgs),
    /// Re-verify a solution report against the original constraints.
    Check(CheckArgs),
    /// Solve and emit LMP / Q-LMP tables.
    Price(SolveArgs),
    /// Convert a MATPOWER case file to canonical JSON (or LP text).
    Convert(ConvertArgs),
    /// Run the two-variable demonstration problem.
    Demo2d(DemoArgs),
    /// Run a matrix of solves and aggregate the results.
    Batch(BatchArgs),
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// MATPOWER case file.
    case: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long = "eps-th", default_value_t = 1e-3)]
    eps_th: f64,
    #[arg(long, default_value_t = 0.9)]
    zeta: f64,
    /// Initial penalty weight (default: derived from the cost coefficients).
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    gamma: f64,
    #[arg(long = "rho-max-factor", default_value_t = 625.0)]
    rho_max_factor: f64,
    #[arg(long, default_value_t = 50)]
    kmax: usize,
    /// fs1 | fs2 | fs3 | dc | random
    #[arg(long, default_value = "fs1")]
    start: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// mva | current | none
    #[arg(long, default_value = "mva")]
    thermal: String,
    #[arg(long)]
    prune: bool,
    #[arg(long = "cost-accuracy", default_value_t = 1e-5)]
    cost_accuracy: f64,
    /// Reference fixture for the optimality gap.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Additionally write a bus,LMP,QLMP table ("-" for stdout).
    #[arg(long = "csv-prices")]
    csv_prices: Option<PathBuf>,
    /// Use the meshed driver even on radial networks.
    #[arg(long = "force-meshed")]
    force_meshed: bool,
}

#[derive(Args)]
struct CheckArgs {
    case: PathBuf,
    /// Report JSON produced by `solve`.
    solution: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long = "eps-th", default_value_t = 1e-3)]
    eps_th: f64,
}

#[derive(Args)]
struct ConvertArgs {
    case: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump the static LP skeleton in LP text format instead of case JSON.
    #[arg(long = "lp-skeleton")]
    lp_skeleton: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 10.0)]
    rho: f64,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON run matrix: [{"case": path, "start": "fs1|fs2|fs3|dc|random", "seed": n}, ...]
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Convenience: run COUNT random starts per listed case.
    #[arg(long = "random-starts")]
    random_starts: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Case files (used with --random-starts).
    cases: Vec<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SLOPF_LOG")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            4
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve(args) => solve_cmd(args, false),
        Cmd::Relax(args) => solve_cmd(args, true),
        Cmd::Price(mut args) => {
            if args.csv_prices.is_none() {
                args.csv_prices = Some(PathBuf::from("-"));
            }
            solve_cmd(args, false)
        }
        Cmd::Check(args) => check_cmd(args),
        Cmd::Convert(args) => convert_cmd(args),
        Cmd::Demo2d(args) => demo_cmd(args),
        Cmd::Batch(args) => batch_cmd(args),
    }
}

fn load_network(path: &Path) -> Result<(RawCase, Network)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let case = RawCase::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let net = slopf_core::network::build_network(&case)?;
    Ok((case, net))
}

fn parse_start(name: &str, seed: u64) -> Result<StartStrategy> {
    Ok(match name {
        "fs1" => StartStrategy::Fs1,
        "fs2" => StartStrategy::Fs2,
        "fs3" => StartStrategy::Fs3,
        "dc" => StartStrategy::DcWarm,
        "random" => StartStrategy::Random(seed),
        other => return Err(anyhow!("unknown start strategy `{other}`")),
    })
}

fn parse_thermal(name: &str) -> Result<ThermalMode> {
    Ok(match name {
        "mva" => ThermalMode::Mva,
        "current" => ThermalMode::Current,
        "none" => ThermalMode::None,
        other => return Err(anyhow!("unknown thermal mode `{other}`")),
    })
}

fn params_of(args: &SolveArgs) -> Result<SlpParams> {
    Ok(SlpParams {
        eps: args.eps,
        eps_th: args.eps_th,
        zeta: args.zeta,
        rho0: args.rho0,
        gamma: args.gamma,
        rho_max_factor: args.rho_max_factor,
        k_max: args.kmax,
        start: parse_start(&args.start, args.seed)?,
        prune: args.prune,
        prune_window: 3,
        cost_accuracy: args.cost_accuracy,
        thermal: parse_thermal(&args.thermal)?,
    })
}

fn exit_code_of(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::IterationLimit => 2,
        SolveStatus::LpFailure => 3,
    }
}

fn solve_cmd(args: SolveArgs, relaxation: bool) -> Result<u8> {
    let (_, net) = load_network(&args.case)?;
    let params = params_of(&args)?;
    log::info!("solving {} ({:?})", net.name, net.topology);
    let report = if relaxation {
        slopf_core::run_algorithm1(&net, &params)?
    } else if args.force_meshed {
        slopf_core::run_algorithm3(&net, &params)?
    } else {
        slopf_core::solve_auto(&net, &params)?
    };

    let pricing = report
        .duals
        .as_ref()
        .map(|_| analysis::extract_prices(&net, &report))
        .transpose()?;

    let mut meta = json!({
        "case_file": args.case.display().to_string(),
        "algorithm": report.algorithm,
        "start": report.start_used,
        "eps": params.eps,
        "eps_th": params.eps_th,
        "zeta": params.zeta,
        "gamma": params.gamma,
        "k_max": params.k_max,
    });
    if let Some(oracle_path) = &args.oracle {
        let oracle = OracleFixture::load(oracle_path).map_err(|e| anyhow!(e))?;
        if let Some(obj) = report.objective {
            let gap = analysis::optimality_gap(oracle.objective, obj)?;
            meta["gap_percent"] = json!(gap);
            meta["reference_objective"] = json!(oracle.objective);
        }
    }

    if let Some(csv) = &args.csv_prices {
        if let Some(p) = &pricing {
            let mut table = String::from("bus,LMP,QLMP\n");
            for ((id, lmp), qlmp) in p.bus_ids.iter().zip(&p.lmp).zip(&p.qlmp) {
                table.push_str(&format!("{id},{lmp},{qlmp}\n"));
            }
            if csv.as_os_str() == "-" {
                print!("{table}");
            } else {
                std::fs::write(csv, table)?;
            }
        } else {
            eprintln!("no duals available; price table not written");
        }
    }

    let status = report.status;
    let summary = format!(
        "{}: {:?} objective={} iterations={} mean(F u H)={:.3e}",
        net.name,
        status,
        report
            .objective
            .map(|o| format!("{o:.2}"))
            .unwrap_or_else(|| "n/a".into()),
        report.iterations,
        report.mean_f_h
    );
    let doc = ReportDocument::new(meta, NetworkSummary::of(&net), report, pricing);
    let text = emit_json(&doc);
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    eprintln!("{summary}");
    Ok(exit_code_of(status))
}

fn check_cmd(args: CheckArgs) -> Result<u8> {
    let (_, net) = load_network(&args.case)?;
    let text = std::fs::read_to_string(&args.solution)?;
    let doc: ReportDocument = serde_json::from_str(&text)
        .with_context(|| "solution file is not a report document")?;
    let primal = doc
        .solution
        .primal
        .as_ref()
        .ok_or_else(|| anyhow!("report carries no primal solution"))?;
    let rep = analysis::verify(&net, primal, args.eps, args.eps_th)?;
    println!("{}", emit_json(&rep));
    if rep.pass {
        eprintln!(
            "check passed: max|F|={:.3e} max|H|={:.3e} max G={:.3e}",
            rep.max_f, rep.max_h, rep.max_g
        );
        Ok(0)
    } else {
        eprintln!(
            "check FAILED: max|F|={:.3e} max|H|={:.3e} max G={:.3e} worst loading={:.4}",
            rep.max_f, rep.max_h, rep.max_g, rep.worst_loading
        );
        Ok(2)
    }
}

fn convert_cmd(args: ConvertArgs) -> Result<u8> {
    let (case, net) = load_network(&args.case)?;
    let text = if args.lp_skeleton {
        let skel = build_skeleton(
            &net,
            &FormulationOptions {
                mode: match net.topology {
                    slopf_core::Topology::Radial => Mode::Radial,
                    slopf_core::Topology::Meshed => Mode::Meshed,
                },
                ..Default::default()
            },
        );
        write_lp_text(&skel.model)
    } else {
        case.to_json()
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn demo_cmd(args: DemoArgs) -> Result<u8> {
    let rhos = if args.rho == 10.0 {
        vec![1.0, 10.0, 100.0]
    } else {
        vec![args.rho]
    };
    let mut rows = Vec::new();
    for projection in [false, true] {
        let summaries = toy2d::robustness(args.starts, args.seed, &rhos, projection, args.eps, 500);
        for s in &summaries {
            eprintln!(
                "{} rho={:<6} converged {}/{} iterations mean {:.2} min {} max {}",
                if projection { "projection" } else { "plain     " },
                s.rho,
                s.converged,
                s.starts,
                s.mean_iterations,
                s.min_iterations,
                s.max_iterations
            );
        }
        rows.extend(summaries);
    }
    let text = emit_json(&rows);
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(0)
}

#[derive(serde::Deserialize)]
struct MatrixEntry {
    case: PathBuf,
    #[serde(default = "default_start")]
    start: String,
    #[serde(default)]
    seed: u64,
}

fn default_start() -> String {
    "fs1".into()
}

struct RunOutcome {
    case: String,
    ok: bool,
    status: String,
    objective: Option<f64>,
    iterations: usize,
}

fn batch_cmd(args: BatchArgs) -> Result<u8> {
    let mut entries: Vec<MatrixEntry> = Vec::new();
    if let Some(path) = &args.matrix {
        let text = std::fs::read_to_string(path)?;
        entries = serde_json::from_str(&text)?;
    }
    if let Some(n) = args.random_starts {
        for case in &args.cases {
            for k in 0..n {
                entries.push(MatrixEntry {
                    case: case.clone(),
                    start: "random".into(),
                    seed: args.seed + k as u64,
                });
            }
        }
    }
    if entries.is_empty() {
        println!("{}", emit_json(&Vec::<serde_json::Value>::new()));
        return Ok(0);
    }

    let outcomes: Vec<RunOutcome> = entries
        .par_iter()
        .map(|e| {
            let run = || -> Result<SolveReport> {
                let (_, net) = load_network(&e.case)?;
                let params = SlpParams {
                    eps: args.eps,
                    start: parse_start(&e.start, e.seed)?,
                    ..Default::default()
                };
                Ok(slopf_core::solve_auto(&net, &params)?)
            };
            match run() {
                Ok(r) => RunOutcome {
                    case: e.case.display().to_string(),
                    ok: r.status == SolveStatus::Converged,
                    status: format!("{:?}", r.status),
                    objective: r.objective,
                    iterations: r.iterations,
                },
                Err(err) => RunOutcome {
                    case: e.case.display().to_string(),
                    ok: false,
                    status: format!("error: {err}"),
                    objective: None,
                    iterations: 0,
                },
            }
        })
        .collect();

    let mut cases: Vec<String> = outcomes.iter().map(|o| o.case.clone()).collect();
    cases.sort();
    cases.dedup();
    let mut aggregate = Vec::new();
    for case in &cases {
        let runs: Vec<&RunOutcome> = outcomes.iter().filter(|o| &o.case == case).collect();
        let converged: Vec<&&RunOutcome> = runs.iter().filter(|o| o.ok).collect();
        let iters: Vec<usize> = converged.iter().map(|o| o.iterations).collect();
        let objs: Vec<f64> = converged.iter().filter_map(|o| o.objective).collect();
        let (obj_min, obj_max) = objs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
                (lo.min(*o), hi.max(*o))
            });
        let spread = if objs.is_empty() || obj_min == 0.0 {
            0.0
        } else {
            (obj_max - obj_min) / obj_min.abs()
        };
        aggregate.push(json!({
            "case": case,
            "runs": runs.len(),
            "converged": converged.len(),
            "failed": runs.iter().filter(|o| !o.ok).map(|o| o.status.clone()).collect::<Vec<_>>(),
            "iterations": {
                "min": iters.iter().min().copied().unwrap_or(0),
                "mean": if iters.is_empty() { 0.0 } else { iters.iter().sum::<usize>() as f64 / iters.len() as f64 },
                "max": iters.iter().max().copied().unwrap_or(0),
            },
            "objective": {
                "min": if objs.is_empty() { serde_json::Value::Null } else { json!(obj_min) },
                "max": if objs.is_empty() { serde_json::Value::Null } else { json!(obj_max) },
                "relative_spread": spread,
            },
        }));
        eprintln!(
            "{case}: {}/{} converged, iterations {:?}..{:?}, objective spread {:.2e}",
            converged.len(),
            runs.len(),
            iters.iter().min(),
            iters.iter().max(),
            spread
        );
    }
    let text = emit_json(&aggregate);
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(0)
}
