//! `graphweave` — run, verify, benchmark, and autotune graph DSL programs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphweave_cli::driver::{self, RunSpec};
use graphweave_cli::kinds::ProgramKind;
use graphweave_cli::stats::{self, StatsReport, SCHEMA_VERSION};
use graphweave_cli::verify::{verify_program, VerifyConfig};
use graphweave_core::exec::RunOptions;
use graphweave_core::gen;
use graphweave_core::gis::{self, DumpStyle, Mode};
use graphweave_core::graph;
use graphweave_core::pretty;
use graphweave_core::report;
use graphweave_core::tuner::{self, ScheduleSpace, TuneConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "graphweave", version, about = "Graph DSL toolchain: schedule-driven graph traversal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonRunArgs {
    /// Graph file (.el, .wel, or .csr cache)
    #[arg(long)]
    graph: PathBuf,
    /// Schedule file applied after any schedule section in the program
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Iteration count bound to `maxIters`
    #[arg(long, default_value_t = 10)]
    iters: i64,
    /// Source vertex bound to `source`
    #[arg(long, default_value_t = 0)]
    source: i64,
    /// Extra runtime parameters / const overrides, name=value
    #[arg(long = "param")]
    params: Vec<String>,
    /// Worker threads (GRAPHWEAVE_THREADS overrides)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Duplicate every edge in both directions at load time
    #[arg(long)]
    symmetrize: bool,
    /// Hybrid direction selector threshold (default: m / 20)
    #[arg(long)]
    hybrid_threshold: Option<u64>,
    /// Accepted for compatibility; segment-parallel execution emulates NUMA
    /// placement with per-partition buffers, no socket binding happens
    #[arg(long)]
    numa_bind: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, lower, and execute a program on a graph
    Run {
        program: PathBuf,
        #[command(flatten)]
        common: CommonRunArgs,
        /// Write final vectors as TSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict the TSV dump to one vector
        #[arg(long)]
        dump_vector: Option<String>,
        /// Write run statistics as JSON
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Run the schedule matrix and compare every run against the serial
    /// reference oracle
    Verify {
        program: PathBuf,
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Median runtimes and counters for programs × graphs × schedules
    Bench {
        /// Comma-separated program files
        #[arg(long, value_delimiter = ',')]
        programs: Vec<PathBuf>,
        /// Comma-separated graph files
        #[arg(long, value_delimiter = ',')]
        graphs: Vec<PathBuf>,
        /// Comma-separated schedule files ("default" for none)
        #[arg(long, value_delimiter = ',', default_value = "default")]
        schedules: Vec<String>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 10)]
        iters: i64,
        #[arg(long, default_value_t = 0)]
        source: i64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        symmetrize: bool,
        /// Write the table as JSON instead of CSV on stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Autotune the schedule of one labeled edgeset apply
    Tune {
        program: PathBuf,
        #[command(flatten)]
        common: CommonRunArgs,
        /// Label of the edgeset apply statement to tune
        #[arg(long, default_value = "s1")]
        label: String,
        /// Trial budget
        #[arg(long)]
        trials: Option<usize>,
        /// Wall-clock budget in seconds
        #[arg(long)]
        seconds: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file restricting the search space axes
        #[arg(long)]
        space: Option<PathBuf>,
        /// Write the full trial history as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print execution plans as graph-iteration-space vectors
    DumpIr {
        program: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// ASCII fallback notation
        #[arg(long)]
        ascii: bool,
    },
    /// Print per-vector distance vectors, access classes, and sync choices
    DumpDeps {
        program: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Print pseudo-code for each traversal plan
    DumpPlan {
        program: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Pretty-print the parsed program (round-trips through the parser)
    DumpAst { program: PathBuf },
    /// Convert between text edge lists and the binary CSR cache
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        symmetrize: bool,
    },
    /// Generate a test graph
    Gen {
        /// rmat | path | grid | star | uniform | bipartite
        kind: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        scale: u32,
        #[arg(long, default_value_t = 8)]
        edge_factor: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        rows: usize,
        #[arg(long, default_value_t = 100)]
        cols: usize,
        #[arg(long, default_value_t = 1000)]
        leaves: usize,
        #[arg(long, default_value_t = 500)]
        users: usize,
        #[arg(long, default_value_t = 200)]
        items: usize,
        #[arg(long, default_value_t = 20)]
        per_user: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Keep generated weights in the output
        #[arg(long)]
        weighted: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(driver::exit_code_for(&e));
        }
    }
}

fn build_opts(common: &CommonRunArgs, kind: Option<ProgramKind>) -> Result<RunOptions> {
    let mut params = driver::default_params(kind, common.iters, common.source);
    params.extend(driver::parse_params(&common.params)?);
    Ok(RunOptions {
        threads: driver::effective_threads(common.threads),
        hybrid_threshold: common.hybrid_threshold,
        params,
    })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { program, common, out, dump_vector, stats: stats_path } => {
            let source = driver::read_source(&program)?;
            let schedule = driver::read_schedule(common.schedule.as_deref())?;
            let graph = driver::load_graph(&common.graph, common.symmetrize)?;
            let kind = ProgramKind::detect(&program);
            let opts = build_opts(&common, kind)?;
            let (ex, run_out) = driver::run_program(RunSpec {
                source: &source,
                schedule: schedule.as_deref(),
                mode: Mode::Strict,
                graph,
                opts,
            })?;
            if let Some(path) = &out {
                std::fs::write(path, stats::dump_tsv(&ex, dump_vector.as_deref()))
                    .with_context(|| format!("cannot write `{}`", path.display()))?;
            }
            let report = StatsReport {
                schema_version: SCHEMA_VERSION,
                program: &program.display().to_string(),
                graph: &common.graph.display().to_string(),
                schedule: &common
                    .schedule
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "default".into()),
                threads: driver::effective_threads(common.threads),
                wall_time_ns: run_out.wall_time_ns,
                totals: run_out.counters,
                traversals: &run_out.records,
            };
            match &stats_path {
                Some(path) => stats::write_stats(&report, path)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            Ok(0)
        }

        Command::Verify { program, common } => {
            let source = driver::read_source(&program)?;
            let graph = driver::load_graph(&common.graph, common.symmetrize)?;
            let kind = ProgramKind::detect(&program).ok_or_else(|| {
                driver::frontend(anyhow!(
                    "cannot infer the reference oracle from `{}`; expected one of the shipped program names",
                    program.display()
                ))
            })?;
            let cfg = VerifyConfig {
                iters: common.iters,
                source: common.source,
                threads: driver::effective_threads(common.threads),
                extra_params: driver::parse_params(&common.params)?,
            };
            let reports = verify_program(kind, &source, &graph, &cfg)?;
            let mut failed = 0;
            for r in &reports {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] {:<28} edges_examined={:<10} {}",
                    r.schedule, r.edges_examined, r.detail
                );
                if !r.passed {
                    failed += 1;
                }
            }
            println!("{} schedules, {} failed", reports.len(), failed);
            Ok(if failed > 0 { 2 } else { 0 })
        }

        Command::Bench {
            programs,
            graphs,
            schedules,
            repeats,
            iters,
            source,
            threads,
            symmetrize,
            out,
        } => {
            if repeats == 0 {
                return Err(driver::frontend(anyhow!("repeats must be positive")));
            }
            let threads = driver::effective_threads(threads);
            let mut rows = Vec::new();
            for program in &programs {
                let src = driver::read_source(program)?;
                let kind = ProgramKind::detect(program);
                for graph_path in &graphs {
                    let graph = driver::load_graph(graph_path, symmetrize)?;
                    for sched_name in &schedules {
                        let schedule = if sched_name == "default" {
                            None
                        } else {
                            Some(
                                std::fs::read_to_string(sched_name)
                                    .with_context(|| format!("cannot read `{sched_name}`"))
                                    .map_err(driver::frontend)?,
                            )
                        };
                        let mut params = driver::default_params(kind, iters, source);
                        params.extend(driver::parse_params(&[])?);
                        let opts =
                            RunOptions { threads, hybrid_threshold: None, params };
                        let mut times = Vec::new();
                        let mut counters = None;
                        let mut error = None;
                        for _ in 0..repeats {
                            match driver::run_program(RunSpec {
                                source: &src,
                                schedule: schedule.as_deref(),
                                mode: Mode::Strict,
                                graph: graph.clone(),
                                opts: opts.clone(),
                            }) {
                                Ok((_, run_out)) => {
                                    times.push(run_out.wall_time_ns);
                                    counters = Some(run_out.counters);
                                }
                                Err(e) => {
                                    error = Some(format!("{e:#}"));
                                    break;
                                }
                            }
                        }
                        rows.push(serde_json::json!({
                            "program": program.display().to_string(),
                            "graph": graph_path.display().to_string(),
                            "schedule": sched_name,
                            "median_ns": if times.is_empty() { serde_json::Value::Null } else { serde_json::json!(driver::median(times)) },
                            "counters": counters,
                            "error": error,
                        }));
                    }
                }
            }
            match out {
                Some(path) => {
                    let doc = serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "rows": rows,
                    });
                    std::fs::write(&path, serde_json::to_string_pretty(&doc)?)
                        .with_context(|| format!("cannot write `{}`", path.display()))?;
                }
                None => {
                    println!("program,graph,schedule,median_ns,edges_examined,error");
                    for r in &rows {
                        println!(
                            "{},{},{},{},{},{}",
                            r["program"].as_str().unwrap_or(""),
                            r["graph"].as_str().unwrap_or(""),
                            r["schedule"].as_str().unwrap_or(""),
                            r["median_ns"],
                            r["counters"]["edges_examined"],
                            r["error"].as_str().unwrap_or("")
                        );
                    }
                }
            }
            Ok(0)
        }

        Command::Tune { program, common, label, trials, seconds, seed, space, out } => {
            let source = driver::read_source(&program)?;
            let sched_src = driver::read_schedule(common.schedule.as_deref())?;
            let graph = driver::load_graph(&common.graph, common.symmetrize)?;
            let kind = ProgramKind::detect(&program);
            let opts = build_opts(&common, kind)?;
            let parsed = graphweave_core::parse_source(&source)
                .map_err(|e| driver::frontend(anyhow!("{e}")))?;
            let mut base_schedule = parsed.schedule;
            if let Some(s) = &sched_src {
                let extra = graphweave_core::parse_schedule(s)
                    .map_err(|e| driver::frontend(anyhow!("{e}")))?;
                base_schedule.calls.extend(extra.calls);
            }
            let space: ScheduleSpace = match space {
                None => ScheduleSpace::default(),
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read `{}`", path.display()))
                        .map_err(driver::frontend)?;
                    serde_json::from_str(&text)
                        .map_err(|e| driver::frontend(anyhow!("bad space file: {e}")))?
                }
            };
            if trials == Some(0) {
                return Err(driver::frontend(anyhow!("trial budget must be positive")));
            }
            let cfg = TuneConfig {
                max_trials: trials.or(if seconds.is_none() { Some(60) } else { None }),
                max_seconds: seconds,
                seed,
                ..TuneConfig::default()
            };
            let outcome =
                tuner::tune(&parsed.program, &base_schedule, &graph, &label, &space, &cfg, &opts)
                    .map_err(|e| driver::frontend(anyhow!("{e}")))?;
            println!(
                "best after {} trials: {} ns\n{}",
                outcome.trials,
                outcome
                    .best
                    .median_runtime_ns
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| "-".into()),
                outcome.best.schedule
            );
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&outcome)?)
                    .with_context(|| format!("cannot write `{}`", path.display()))?;
            }
            Ok(0)
        }

        Command::DumpIr { program, schedule, ascii } => {
            let source = driver::read_source(&program)?;
            let sched = driver::read_schedule(schedule.as_deref())?;
            let compiled = driver::compile(&source, sched.as_deref(), Mode::Strict)?;
            let style = if ascii { DumpStyle::Ascii } else { DumpStyle::Unicode };
            print!("{}", gis::dump_ir(&compiled.lowered, style));
            Ok(0)
        }

        Command::DumpDeps { program, schedule } => {
            let source = driver::read_source(&program)?;
            let sched = driver::read_schedule(schedule.as_deref())?;
            let compiled = driver::compile(&source, sched.as_deref(), Mode::Strict)?;
            print!("{}", report::dump_deps_report(&compiled));
            Ok(0)
        }

        Command::DumpPlan { program, schedule } => {
            let source = driver::read_source(&program)?;
            let sched = driver::read_schedule(schedule.as_deref())?;
            let compiled = driver::compile(&source, sched.as_deref(), Mode::Strict)?;
            print!("{}", report::dump_plan_report(&compiled));
            Ok(0)
        }

        Command::DumpAst { program } => {
            let source = driver::read_source(&program)?;
            let ir = graphweave_core::parse_program(&source)
                .map_err(|e| driver::frontend(anyhow!("{e}")))?;
            print!("{}", pretty::pretty_program(&ir));
            Ok(0)
        }

        Command::Convert { input, output, symmetrize } => {
            let in_ext = input.extension().and_then(|e| e.to_str()).unwrap_or("");
            let out_ext = output.extension().and_then(|e| e.to_str()).unwrap_or("");
            match (in_ext, out_ext) {
                (_, "csr") => {
                    let g = driver::load_graph(&input, symmetrize)?;
                    graph::write_cache(&g, &output).map_err(|e| driver::frontend(anyhow!("{e}")))?;
                }
                ("csr", _) => {
                    let g = driver::load_graph(&input, symmetrize)?;
                    std::fs::write(&output, gen::to_edge_list(&g))
                        .with_context(|| format!("cannot write `{}`", output.display()))?;
                }
                _ => bail!("convert needs a .csr on one side"),
            }
            println!("wrote {}", output.display());
            Ok(0)
        }

        Command::Gen {
            kind,
            out,
            scale,
            edge_factor,
            n,
            rows,
            cols,
            leaves,
            users,
            items,
            per_user,
            seed,
            weighted,
        } => {
            let g = match kind.as_str() {
                "rmat" => {
                    if weighted {
                        gen::rmat_weighted(scale, edge_factor, seed)
                    } else {
                        gen::rmat(scale, edge_factor, seed)
                    }
                }
                "path" => {
                    if weighted {
                        gen::path_weighted(n, seed)
                    } else {
                        gen::path(n)
                    }
                }
                "grid" => gen::grid(rows, cols),
                "star" => gen::star(leaves),
                "uniform" => gen::uniform(n, n * edge_factor, seed),
                "bipartite" => gen::random_bipartite(users, items, per_user, seed),
                other => {
                    return Err(driver::frontend(anyhow!(
                        "unknown graph kind `{other}` (rmat|path|grid|star|uniform|bipartite)"
                    )))
                }
            };
            std::fs::write(&out, gen::to_edge_list(&g))
                .with_context(|| format!("cannot write `{}`", out.display()))?;
            println!("wrote {} (n={}, m={})", out.display(), g.n, g.m);
            Ok(0)
        }
    }
}
