//! Command-line front end.
//!
//! `contact-lab <command> [lemma] [--config <path>] [--key <value> ...]`
//!
//! The command and its keys can come from a config document, from flags, or
//! both; flags win. Each command renders one CSV table, written to
//! `<out>.<command>.csv` when an output prefix is set and to standard output
//! otherwise. Exit status: 0 on success, 2 when a verified bound came back
//! Violated, 1 on any error (reported as a single `error[<class>] ...` line
//! on standard error).

use crate::config::{
    build_config, parse_document, Command, ConfigError, GraphFamily, InitSpec, Lemma, Location,
    Pair, RunConfig,
};
use crate::exact::{ctmc_survival, ExactError};
use crate::experiments::{
    compute_proof_schedule, run_replicas, verify_path_transmission, verify_rw_interval,
    verify_star_extinction, verify_tree_extinction, Estimate, ExperimentError, Verdict,
    VerdictKind,
};
use crate::graphs::{
    build_interval, build_star, build_sv_tree, remove_edge, BuildBudget, EdgeRemoval, Graph,
    GraphError, VertexId,
};
use crate::randomness::replica_seed;
use crate::report::{
    estimate_fields, float_field, verdict_fields, Table, ESTIMATE_COLUMNS, VERDICT_COLUMNS,
};
use crate::simulate::{
    run_direct, run_direct_with, Configuration, DirectOptions, SimError, StopReason, StopRule,
    TraceEvent,
};
use crate::svg::space_time_svg;
use thiserror::Error;

const USAGE: &str = "\
usage: contact-lab <command> [lemma] [--config <path>] [--key <value> ...]

commands:
  build      materialise a graph (text format plus a summary table)
  simulate   run one trajectory; `trace = true` adds a trace CSV and an SVG
  estimate   Monte Carlo survival probability at a fixed horizon
  verify     check a proven bound: rw_interval, star_extinction,
             tree_extinction or path_transmission
  sweep      survival curves over a rate grid
  oracle     exact survival curve for graphs of up to 12 vertices
  schedule   proof-scale time quantities for a given depth

common keys: graph (interval|star|sv_tree|sv_plus|sv_minus), n, pad, i_max,
lambda, times, horizon, n_runs, seed, init, ci, budget, out, threads
(CONTACT_LAB_THREADS is the fallback for --threads).
";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

impl CliError {
    fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Graph(_) => "graph",
            CliError::Sim(_) => "sim",
            CliError::Exact(_) => "exact",
            CliError::Experiment(ExperimentError::HypothesisViolated(_)) => "hypothesis",
            CliError::Experiment(_) => "experiment",
        }
    }
}

/// Parses `std::env::args`, runs, writes artifacts, returns the exit code.
pub fn run_from_args() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") || args.first().map(String::as_str) == Some("help")
    {
        print!("{USAGE}");
        return 0;
    }
    match run(&args) {
        Ok(code) => code,
        Err(err) => {
            let one_line = err.to_string().replace('\n', "; ");
            eprintln!("error[{}] {}", err.class(), one_line);
            1
        }
    }
}

fn run(args: &[String]) -> Result<i32, CliError> {
    let cfg = config_from_args(args)?;
    let execution = execute(&cfg)?;
    match &cfg.out {
        Some(prefix) => {
            for (suffix, contents) in &execution.artifacts {
                let path = format!("{prefix}.{suffix}");
                std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
            }
        }
        None => print!("{}", execution.artifacts[0].1),
    }
    Ok(if execution.violated { 2 } else { 0 })
}

/// Resolves command, document and flag overrides into one validated config.
pub fn config_from_args(args: &[String]) -> Result<RunConfig, CliError> {
    let mut positional: Vec<&str> = Vec::new();
    let mut flags: Vec<Pair> = Vec::new();
    let mut config_path: Option<&str> = None;
    let flag_loc = Location { line: 0, column: 0 };

    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if let Some(key) = arg.strip_prefix("--") {
            let value = iter.next().ok_or_else(|| {
                ConfigError::TypeMismatch {
                    location: flag_loc,
                    key: key.to_string(),
                    message: format!("flag --{key} needs a value"),
                }
            })?;
            if key == "config" {
                config_path = Some(value);
            } else {
                flags.push(Pair::from_flag(key, value));
            }
        } else {
            positional.push(arg);
        }
    }
    if positional.len() > 2 {
        return Err(CliError::Usage(format!(
            "unexpected argument `{}`\n{USAGE}",
            positional[2]
        )));
    }

    let arg_command = positional
        .first()
        .map(|name| {
            Command::parse(name).ok_or_else(|| {
                CliError::Usage(format!("unknown command `{name}`\n{USAGE}"))
            })
        })
        .transpose()?;

    let mut pairs: Vec<Pair> = Vec::new();
    let (command, section_location) = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_string(),
                source,
            })?;
            let doc = parse_document(&text)?;
            if let Some(cmd) = arg_command {
                if cmd != doc.command {
                    return Err(ConfigError::TypeMismatch {
                        location: doc.section_location,
                        key: "command".into(),
                        message: format!(
                            "document section is `{}` but the command line says `{}`",
                            doc.command.name(),
                            cmd.name()
                        ),
                    }
                    .into());
                }
            }
            pairs.extend(doc.pairs);
            (doc.command, doc.section_location)
        }
        None => {
            let cmd = arg_command
                .ok_or_else(|| {
                    CliError::Usage("missing command; run `contact-lab --help` for usage".into())
                })?;
            (cmd, flag_loc)
        }
    };

    if let Some(lemma) = positional.get(1) {
        if command != Command::Verify {
            return Err(CliError::Usage(format!(
                "`{}` takes no positional argument; only `verify` names a lemma\n{USAGE}",
                command.name()
            )));
        }
        pairs.push(Pair::from_flag("lemma", lemma));
    }
    pairs.extend(flags);

    Ok(build_config(command, section_location, &pairs)?)
}

/// Rendered outputs, not yet on disk. The first artifact is the primary one
/// and goes to standard output when no `out` prefix is configured.
#[derive(Debug)]
pub struct Execution {
    /// `(file suffix, contents)` pairs.
    pub artifacts: Vec<(String, String)>,
    pub violated: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<Execution, CliError> {
    match cfg.command {
        Command::Build => execute_build(cfg),
        Command::Simulate => execute_simulate(cfg),
        Command::Estimate => execute_estimate(cfg),
        Command::Verify => execute_verify(cfg),
        Command::Sweep => execute_sweep(cfg),
        Command::Oracle => execute_oracle(cfg),
        Command::Schedule => execute_schedule(cfg),
    }
}

fn build_graph(cfg: &RunConfig) -> Result<Graph, CliError> {
    let family = cfg.graph.expect("validated config has a graph");
    Ok(match family {
        GraphFamily::Interval => build_interval(cfg.n.unwrap(), cfg.pad),
        GraphFamily::Star => {
            let n = cfg.n.unwrap();
            if n < 2 {
                return Err(ConfigError::TypeMismatch {
                    location: Location { line: 0, column: 0 },
                    key: "n".into(),
                    message: "a star needs at least 2 vertices".into(),
                }
                .into());
            }
            build_star(n)
        }
        GraphFamily::SvTree => build_sv_tree(cfg.i_max.unwrap(), &BuildBudget::default())?,
        GraphFamily::SvPlus | GraphFamily::SvMinus => {
            let full = build_sv_tree(cfg.i_max.unwrap(), &BuildBudget::default())?;
            let (u, v) = cut_edge(&full);
            match remove_edge(&full, u, v)? {
                EdgeRemoval::Split {
                    containing_u,
                    containing_v,
                } => {
                    if family == GraphFamily::SvMinus {
                        containing_u
                    } else {
                        containing_v
                    }
                }
                EdgeRemoval::Connected(_) => {
                    unreachable!("a tree edge is always a bridge")
                }
            }
        }
    })
}

/// The distinguished cut edge between line coordinates 0 and 1.
fn cut_edge(g: &Graph) -> (VertexId, VertexId) {
    (
        g.line_vertex(0).expect("line position 0 is always built"),
        g.line_vertex(1).expect("line position 1 is always built"),
    )
}

fn initial_configuration(cfg: &RunConfig, g: &Graph) -> Result<Configuration, CliError> {
    match &cfg.init {
        InitSpec::Full => Ok(Configuration::full(g)),
        InitSpec::Vertices(ids) => {
            for &id in ids {
                if id as usize >= g.vertex_count() {
                    return Err(ConfigError::TypeMismatch {
                        location: Location { line: 0, column: 0 },
                        key: "init".into(),
                        message: format!(
                            "vertex {id} is out of range for a graph with {} vertices",
                            g.vertex_count()
                        ),
                    }
                    .into());
                }
            }
            Ok(Configuration::from_vertices(
                g.vertex_count(),
                ids.iter().map(|&id| VertexId(id)),
            ))
        }
    }
}

fn execute_build(cfg: &RunConfig) -> Result<Execution, CliError> {
    let g = build_graph(cfg)?;
    let mut table = Table::new(
        &cfg.echo_pairs(),
        &["family", "vertices", "edges", "max_degree"],
    );
    table.row(&[
        cfg.graph.unwrap().name().to_string(),
        g.vertex_count().to_string(),
        g.edge_count().to_string(),
        g.max_degree().to_string(),
    ]);
    Ok(Execution {
        artifacts: vec![
            ("graph.txt".into(), crate::graphs::write_graph(&g)),
            ("build.csv".into(), table.finish()),
        ],
        violated: false,
    })
}

fn stop_rule(cfg: &RunConfig) -> StopRule {
    let mut stop = StopRule::extinction();
    if let Some(h) = cfg.horizon {
        stop = stop.with_time_horizon(h);
    }
    if let Some(b) = cfg.budget {
        stop = stop.with_event_budget(b);
    }
    stop
}

fn reason_field(reason: StopReason) -> &'static str {
    match reason {
        StopReason::Extinction => "extinction",
        StopReason::TimeHorizon => "time_horizon",
        StopReason::Escape => "escape",
        StopReason::EventBudget => "event_budget",
        StopReason::OccupancyReached => "occupancy",
    }
}

fn execute_simulate(cfg: &RunConfig) -> Result<Execution, CliError> {
    let g = build_graph(cfg)?;
    let init = initial_configuration(cfg, &g)?;
    let stop = stop_rule(cfg);
    let lambda = cfg.lambda.unwrap();

    let mut events: Vec<TraceEvent> = Vec::new();
    let outcome = if cfg.trace {
        run_direct_with(&g, lambda, &init, &stop, cfg.seed, DirectOptions::default(), |e| {
            events.push(*e)
        })?
    } else {
        run_direct(&g, lambda, &init, &stop, cfg.seed)?
    };

    let mut table = Table::new(
        &cfg.echo_pairs(),
        &["reason", "stop_time", "extinct", "peak_infected", "total_events"],
    );
    table.row(&[
        reason_field(outcome.reason).to_string(),
        float_field(outcome.stop_time),
        outcome.extinct.to_string(),
        outcome.peak_infected.to_string(),
        outcome.total_events.to_string(),
    ]);

    let mut artifacts = vec![("summary.csv".to_string(), table.finish())];
    if cfg.trace {
        let mut trace = Table::new(&cfg.echo_pairs(), &["time", "kind", "vertex", "source"]);
        for event in &events {
            let row = match *event {
                TraceEvent::Infection { time, vertex, source } => [
                    float_field(time),
                    "T".to_string(),
                    vertex.index().to_string(),
                    source.index().to_string(),
                ],
                TraceEvent::Recovery { time, vertex } => [
                    float_field(time),
                    "R".to_string(),
                    vertex.index().to_string(),
                    String::new(),
                ],
            };
            trace.row(&row);
        }
        artifacts.push(("trace.csv".to_string(), trace.finish()));
        let window = cfg.horizon.unwrap_or(outcome.stop_time).max(f64::MIN_POSITIVE);
        artifacts.push(("svg".to_string(), space_time_svg(&g, &init, &events, window)));
    }
    Ok(Execution {
        artifacts,
        violated: false,
    })
}

fn execute_estimate(cfg: &RunConfig) -> Result<Execution, CliError> {
    let g = build_graph(cfg)?;
    let init = initial_configuration(cfg, &g)?;
    let stop = stop_rule(cfg);
    let lambda = cfg.lambda.unwrap();
    run_direct(&g, lambda, &init, &stop, cfg.seed)?;

    let trial = |seed: u64| {
        !run_direct(&g, lambda, &init, &stop, seed)
            .expect("inputs validated by the probe run")
            .extinct
    };
    let est = crate::experiments::estimate_event_with(trial, cfg.n_runs, cfg.seed, cfg.threads, cfg.ci);

    let mut columns = vec!["lambda", "horizon"];
    columns.extend(ESTIMATE_COLUMNS);
    columns.push("n_success");
    let mut table = Table::new(&cfg.echo_pairs(), &columns);
    let mut fields = vec![float_field(lambda), float_field(cfg.horizon.unwrap())];
    fields.extend(estimate_fields(&est));
    fields.push(est.n_success.to_string());
    table.row(&fields);
    Ok(Execution {
        artifacts: vec![("estimate.csv".into(), table.finish())],
        violated: false,
    })
}

fn execute_verify(cfg: &RunConfig) -> Result<Execution, CliError> {
    let lambda = cfg.lambda.unwrap();
    let lemma = cfg.lemma.expect("validated config has a lemma");
    let mut violated = false;
    let mut check = |verdict: &Verdict| violated |= verdict.kind == VerdictKind::Violated;

    let table = match lemma {
        Lemma::RwInterval => {
            let verdict =
                verify_rw_interval(cfg.n.unwrap(), lambda, cfg.n_runs, cfg.seed, cfg.threads);
            check(&verdict);
            let mut table = lemma_table(cfg, &["n", "lambda"]);
            let mut fields = vec![cfg.n.unwrap().to_string(), float_field(lambda)];
            fields.extend(verdict_fields(&verdict));
            table.row(&fields);
            table
        }
        Lemma::StarExtinction => {
            let verdict =
                verify_star_extinction(cfg.n.unwrap(), lambda, cfg.n_runs, cfg.seed, cfg.threads);
            check(&verdict);
            let mut table = lemma_table(cfg, &["n", "lambda", "t1"]);
            let t1 = 3.0 * (1.0 / lambda).ln();
            let mut fields = vec![
                cfg.n.unwrap().to_string(),
                float_field(lambda),
                float_field(t1),
            ];
            fields.extend(verdict_fields(&verdict));
            table.row(&fields);
            table
        }
        Lemma::TreeExtinction => {
            let g = build_graph(cfg)?;
            let report =
                verify_tree_extinction(&g, lambda, &cfg.times, cfg.n_runs, cfg.seed, cfg.threads)?;
            let mut columns = vec!["t"];
            columns.extend(VERDICT_COLUMNS);
            columns.push("oracle");
            columns.push("oracle_error");
            let mut table = Table::new(&cfg.echo_pairs(), &columns);
            for (idx, verdict) in report.verdicts.iter().enumerate() {
                check(verdict);
                let mut fields = vec![float_field(report.times[idx])];
                fields.extend(verdict_fields(verdict));
                match &report.oracle {
                    Some(curve) => {
                        fields.push(float_field(curve.probabilities[idx]));
                        fields.push(float_field(curve.error_bound));
                    }
                    None => {
                        fields.push(String::new());
                        fields.push(String::new());
                    }
                }
                table.row(&fields);
            }
            table
        }
        Lemma::PathTransmission => {
            let verdict = verify_path_transmission(
                cfg.len.unwrap(),
                lambda,
                cfg.t.unwrap(),
                cfg.n_runs,
                cfg.seed,
                cfg.threads,
            )?;
            check(&verdict);
            let mut table = lemma_table(cfg, &["len", "lambda", "t"]);
            let mut fields = vec![
                cfg.len.unwrap().to_string(),
                float_field(lambda),
                float_field(cfg.t.unwrap()),
            ];
            fields.extend(verdict_fields(&verdict));
            table.row(&fields);
            table
        }
    };

    Ok(Execution {
        artifacts: vec![("verify.csv".into(), table.finish())],
        violated,
    })
}

fn lemma_table(cfg: &RunConfig, head: &[&str]) -> Table {
    let mut columns = head.to_vec();
    columns.extend(VERDICT_COLUMNS);
    Table::new(&cfg.echo_pairs(), &columns)
}

fn execute_sweep(cfg: &RunConfig) -> Result<Execution, CliError> {
    let g = build_graph(cfg)?;
    let init = initial_configuration(cfg, &g)?;
    let mut times = cfg.times.clone();
    times.sort_by(f64::total_cmp);
    let horizon = times.last().copied().unwrap().max(f64::MIN_POSITIVE);
    let stop = StopRule::extinction().with_time_horizon(horizon);
    let grid = cfg.lambda_grid();
    run_direct(&g, grid[0], &init, &stop, cfg.seed)?;

    let mut columns = vec!["lambda", "t"];
    columns.extend(ESTIMATE_COLUMNS);
    columns.push("n_success");
    let mut table = Table::new(&cfg.echo_pairs(), &columns);

    for (row, &lambda) in grid.iter().enumerate() {
        let row_seed = replica_seed(cfg.seed, row);
        let outcomes = run_replicas(cfg.n_runs, row_seed, cfg.threads, |_, seed| {
            let out = run_direct(&g, lambda, &init, &stop, seed)
                .expect("inputs validated by the probe run");
            (out.extinct, out.stop_time)
        });
        // One shared set of runs per rate: the per-run survival indicators
        // are non-increasing in t by construction, so each row's curve is
        // exactly monotone rather than monotone up to resampling noise.
        for &t in &times {
            let survivors = outcomes
                .iter()
                .filter(|&&(extinct, stop_time)| !extinct || stop_time > t)
                .count() as u64;
            let est = Estimate::from_counts(survivors, cfg.n_runs, row_seed, cfg.ci);
            let mut fields = vec![float_field(lambda), float_field(t)];
            fields.extend(estimate_fields(&est));
            fields.push(est.n_success.to_string());
            table.row(&fields);
        }
    }
    Ok(Execution {
        artifacts: vec![("sweep.csv".into(), table.finish())],
        violated: false,
    })
}

fn execute_oracle(cfg: &RunConfig) -> Result<Execution, CliError> {
    let g = build_graph(cfg)?;
    let init = initial_configuration(cfg, &g)?;
    let curve = ctmc_survival(&g, cfg.lambda.unwrap(), &init, &cfg.times)?;
    let mut table = Table::new(&cfg.echo_pairs(), &["t", "survival", "error_bound"]);
    for (t, p) in curve.iter() {
        table.row(&[
            float_field(t),
            float_field(p),
            float_field(curve.error_bound),
        ]);
    }
    Ok(Execution {
        artifacts: vec![("oracle.csv".into(), table.finish())],
        violated: false,
    })
}

fn execute_schedule(cfg: &RunConfig) -> Result<Execution, CliError> {
    let schedule = compute_proof_schedule(cfg.i.unwrap(), cfg.lambda.unwrap());
    let mut table = Table::new(
        &cfg.echo_pairs(),
        &["i", "lambda", "log_tau", "t1", "big_l"],
    );
    table.row(&[
        schedule.i.to_string(),
        float_field(schedule.lambda),
        schedule.log_tau.to_string(),
        float_field(schedule.t1),
        float_field(schedule.big_l),
    ]);
    Ok(Execution {
        artifacts: vec![("schedule.csv".into(), table.finish())],
        violated: false,
    })
}
