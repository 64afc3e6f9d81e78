//! `tt`: batch pipeline for course timetabling.
//!
//! Typical run: `tt gen`, `tt subgroup`, then `tt solve` on the refined
//! groups, `tt validate` and `tt report`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use tt_core::gen::{generate, GenParams};
use tt_core::ingest::{
    parse_instance, validate_instance, write_availability, write_groups, write_rooms, write_sections, Severity,
};
use tt_core::mipcore::{
    parse_solution, solve_exact, solve_external, write_lp, write_solution, ExternalConfig, Limits, Model, SolveResult,
    SolveStatus,
};
use tt_core::model::{Group, Instance};
use tt_core::report::{group_grids, professor_grids, room_grids, WeekGrid};
use tt_core::subgroup::{run_subgroup, SubgroupError, DEFAULT_MAX_ITER};
use tt_core::tip::{
    build_tip, decode_solution, parse_timetable, read_index_map, write_index_map, write_timetable, CapacityMode,
    Timetable, Weights,
};
use tt_core::validate::{audit, check_hard, score_soft, violations_csv, AUDIT_TOL};

const EXIT_DATA: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "tt", version, about = "Course timetabling by integer programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the input tables and print every issue found.
    CheckData(Inputs),
    /// Split groups until every course's groups fit its sections.
    Subgroup {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Write the timetabling program as model.lp plus its index map.
    Build {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build, solve, decode and audit.
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        program: ProgramArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Audit a timetable file, or a solver solution file next to its index map.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long)]
        solution: PathBuf,
        /// Index map for a solver solution file [default: index.csv beside it].
        #[arg(long)]
        index: Option<PathBuf>,
        /// Objective the solution claims; read from the solution file when absent.
        #[arg(long)]
        objective: Option<f64>,
    },
    /// Render weekly grids per group, professor and room.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate an instance together with a timetable that satisfies it.
    Gen {
        #[arg(long, default_value = "toy", value_parser = clap::builder::PossibleValuesParser::new(GenParams::PRESETS))]
        preset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fill each group's week as far as possible.
        #[arg(long)]
        dense: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long, default_value = "groups.csv")]
    groups: PathBuf,
    #[arg(long, default_value = "sections.csv")]
    sections: PathBuf,
    #[arg(long, default_value = "rooms.csv")]
    rooms: PathBuf,
    #[arg(long, default_value = "availability.csv")]
    availability: PathBuf,
}

#[derive(Args)]
struct ProgramArgs {
    /// `key = value` weights file; defaults apply to missing keys.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Hard)]
    mode: Mode,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Hard,
    Soft,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SolverKind {
    Internal,
    External,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Internal)]
    solver: SolverKind,
    /// External solver command; `{lp}` and `{sol}` are replaced by file paths.
    #[arg(long)]
    cmd: Option<String>,
    #[arg(long, default_value_t = 600.0)]
    max_seconds: f64,
    #[arg(long, default_value_t = 20_000_000)]
    max_nodes: u64,
}

/// Wrong flag combinations found after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

enum Solver {
    Internal(Limits),
    External(ExternalConfig),
}

impl SolverArgs {
    fn resolve(&self, workdir: &Path) -> Result<Solver> {
        match (self.solver, &self.cmd) {
            (SolverKind::External, Some(cmd)) => {
                Ok(Solver::External(ExternalConfig { command_template: cmd.clone(), workdir: workdir.to_path_buf() }))
            }
            (SolverKind::External, None) => Err(Usage("--solver external needs --cmd".into()).into()),
            (SolverKind::Internal, _) => {
                let cap = std::env::var("TT_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
                let avail = std::thread::available_parallelism().map_or(1, usize::from);
                let threads = cap.map_or(avail, |c| c.clamp(1, avail.max(1)));
                Ok(Solver::Internal(Limits { max_nodes: self.max_nodes, max_seconds: self.max_seconds, threads }))
            }
        }
    }
}

impl Solver {
    fn solve(&self, model: &Model) -> Result<SolveResult> {
        Ok(match self {
            Solver::Internal(limits) => solve_exact(model, limits)?,
            Solver::External(cfg) => solve_external(model, cfg)?,
        })
    }
}

impl ProgramArgs {
    fn weights(&self) -> Result<Weights> {
        match &self.weights {
            None => Ok(Weights::default()),
            Some(p) => Ok(Weights::parse(&read(p)?).with_context(|| format!("{}", p.display()))?),
        }
    }

    fn mode(&self) -> CapacityMode {
        match self.mode {
            Mode::Hard => CapacityMode::Hard,
            Mode::Soft => CapacityMode::Soft,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl Inputs {
    fn load(&self) -> Result<Instance> {
        let parsed = parse_instance(&self.groups, &self.sections, &self.rooms, &self.availability)?;
        for w in &parsed.warnings {
            warn!("{w}");
        }
        Ok(parsed.instance)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::CheckData(inputs) => check_data(&inputs),
        Command::Subgroup { inputs, solver, out, max_iter } => subgroup(&inputs, &solver, &out, max_iter),
        Command::Build { inputs, program, out } => build(&inputs, &program, &out),
        Command::Solve { inputs, program, solver, out } => solve(&inputs, &program, &solver, &out),
        Command::Validate { inputs, program, solution, index, objective } => {
            validate(&inputs, &program, &solution, index.as_deref(), objective)
        }
        Command::Report { inputs, solution, index, out } => report(&inputs, &solution, index.as_deref(), &out),
        Command::Gen { preset, seed, dense, out } => gen(&preset, seed, dense, &out),
    }
}

fn check_data(inputs: &Inputs) -> Result<u8> {
    let inst = inputs.load()?;
    let issues = validate_instance(&inst);
    for i in &issues {
        println!("{i}");
    }
    let errors = issues.iter().filter(|i| i.severity == Severity::Error).count();
    println!("{} issues, {errors} errors", issues.len());
    Ok(if errors > 0 { EXIT_DATA } else { 0 })
}

fn subgroup(inputs: &Inputs, solver: &SolverArgs, out: &Path, max_iter: usize) -> Result<u8> {
    let inst = inputs.load()?;
    let solver = solver.resolve(&out.join("ipa"))?;
    match run_subgroup(&inst, |m| solver.solve(m), max_iter) {
        Ok(res) => {
            write(&out.join("groups.csv"), &write_groups(&res.final_groups))?;
            write(&out.join("subgroup_log.csv"), &res.log_csv())?;
            for r in &res.history {
                info!("{r}");
            }
            println!(
                "{} groups after {} splits; over-enrollment {}",
                res.final_groups.len(),
                res.iterations,
                res.z_trace.iter().map(u64::to_string).collect::<Vec<_>>().join(" -> ")
            );
            Ok(0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(match e {
                SubgroupError::Infeasible => EXIT_INFEASIBLE,
                SubgroupError::NotOptimal(_) | SubgroupError::IterationLimit { .. } => EXIT_LIMIT,
                _ => EXIT_DATA,
            })
        }
    }
}

fn build(inputs: &Inputs, program: &ProgramArgs, out: &Path) -> Result<u8> {
    let inst = inputs.load()?;
    let (model, index) = build_tip(&inst, &inst.groups, &program.weights()?, program.mode())?;
    write(&out.join("model.lp"), &write_lp(&model)?)?;
    write(&out.join("index.csv"), &write_index_map(&model, &inst, &index))?;
    println!("{} rows, {} columns, {} nonzeros", model.num_constraints(), model.num_vars(), model.num_nonzeros());
    Ok(0)
}

fn solve(inputs: &Inputs, program: &ProgramArgs, solver: &SolverArgs, out: &Path) -> Result<u8> {
    let inst = inputs.load()?;
    let weights = program.weights()?;
    let solver = solver.resolve(out)?;
    let (model, index) = build_tip(&inst, &inst.groups, &weights, program.mode())?;
    write(&out.join("model.lp"), &write_lp(&model)?)?;
    write(&out.join("index.csv"), &write_index_map(&model, &inst, &index))?;
    let res = solver.solve(&model)?;
    println!("status {}", res.status);
    let (Some(a), Some(objective)) = (&res.assignment, res.objective) else {
        return Ok(match res.status {
            SolveStatus::Infeasible => EXIT_INFEASIBLE,
            _ => EXIT_LIMIT,
        });
    };
    write(&out.join("solution.sol"), &write_solution(&model, a, res.status, objective))?;
    let tt = decode_solution(&inst, &index, a)?;
    write(&out.join("timetable.csv"), &write_timetable(&tt, &inst.groups, &inst))?;
    let ok = write_audit(&inst, &tt, &weights, Some(objective), out)?;
    if !ok {
        bail!("the decoded timetable failed its audit");
    }
    Ok(match res.status {
        SolveStatus::Optimal | SolveStatus::Feasible => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        _ => EXIT_LIMIT,
    })
}

/// Reads either a timetable file or a solver solution file. Returns the
/// timetable, the groups it enrolls and the objective the file states.
fn load_timetable(inst: &Instance, path: &Path, index: Option<&Path>) -> Result<(Timetable, Vec<Group>, Option<f64>)> {
    let text = read(path)?;
    if text.starts_with("kind,") {
        let (tt, groups) = parse_timetable(&text, inst).with_context(|| format!("{}", path.display()))?;
        return Ok((tt, groups, None));
    }
    let index_path = match index {
        Some(p) => p.to_path_buf(),
        None => path.with_file_name("index.csv"),
    };
    let (model, idx) =
        read_index_map(&read(&index_path)?, inst, &inst.groups).with_context(|| format!("{}", index_path.display()))?;
    let parsed = parse_solution(&text, &model).with_context(|| format!("{}", path.display()))?;
    for w in &parsed.warnings {
        warn!("{w}");
    }
    let claimed = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim().strip_prefix("objective:"))
        .find_map(|v| v.trim().parse().ok());
    let tt = decode_solution(inst, &idx, &parsed.assignment)?;
    Ok((tt, inst.groups.clone(), claimed))
}

/// Writes violations.csv, penalties.csv and audit.txt; returns whether the
/// audit passed.
fn write_audit(inst: &Instance, tt: &Timetable, weights: &Weights, claimed: Option<f64>, out: &Path) -> Result<bool> {
    let (ok, recomputed, violations) = match claimed {
        Some(c) => {
            let a = audit(inst, tt, weights, c);
            (a.ok, a.recomputed, a.violations)
        }
        None => {
            let v = check_hard(inst, tt);
            (v.is_empty(), score_soft(inst, tt, weights).total, v)
        }
    };
    let penalties = score_soft(inst, tt, weights);
    write(&out.join("violations.csv"), &violations_csv(&violations))?;
    write(&out.join("penalties.csv"), &penalties.to_csv(weights, inst))?;
    let mut summary = format!("ok {ok}\nviolations {}\nrecomputed {recomputed}\n", violations.len());
    if let Some(c) = claimed {
        summary.push_str(&format!("claimed {c}\ntolerance {AUDIT_TOL}\n"));
    }
    write(&out.join("audit.txt"), &summary)?;
    for v in violations.iter().take(20) {
        println!("{v}");
    }
    println!(
        "audit {}: {} hard violations, soft penalty {recomputed}",
        if ok { "ok" } else { "FAILED" },
        violations.len()
    );
    Ok(ok)
}

fn validate(
    inputs: &Inputs,
    program: &ProgramArgs,
    solution: &Path,
    index: Option<&Path>,
    objective: Option<f64>,
) -> Result<u8> {
    let inst = inputs.load()?;
    let weights = program.weights()?;
    let (mut tt, groups, stated) = load_timetable(&inst, solution, index)?;
    if matches!(program.mode, Mode::Hard) && !tt.over_capacity.is_empty() {
        warn!("hard capacity mode: ignoring declared over-capacity");
        tt.over_capacity.clear();
    }
    let inst = inst.with_groups(groups)?;
    let out = solution.parent().unwrap_or(Path::new("."));
    let ok = write_audit(&inst, &tt, &weights, objective.or(stated), out)?;
    Ok(if ok { 0 } else { EXIT_DATA })
}

fn report(inputs: &Inputs, solution: &Path, index: Option<&Path>, out: &Path) -> Result<u8> {
    let inst = inputs.load()?;
    let (tt, groups, _) = load_timetable(&inst, solution, index)?;
    let dump = |kind: &str, grids: std::collections::BTreeMap<String, WeekGrid>| -> Result<()> {
        for (id, grid) in grids {
            write(&out.join(kind).join(format!("{id}.csv")), &grid.to_csv())?;
        }
        Ok(())
    };
    dump("groups", group_grids(&inst, &tt, &groups))?;
    dump("professors", professor_grids(&inst, &tt))?;
    dump("rooms", room_grids(&inst, &tt))?;
    println!("grids written under {}", out.display());
    Ok(0)
}

fn gen(preset: &str, seed: u64, dense: bool, out: &Path) -> Result<u8> {
    let mut params = GenParams::preset(preset, seed).with_context(|| format!("unknown preset {preset:?}"))?;
    params.dense |= dense;
    let g = generate(&params)?;
    write(&out.join("groups.csv"), &write_groups(&g.instance.groups))?;
    write(&out.join("sections.csv"), &write_sections(&g.instance))?;
    write(&out.join("rooms.csv"), &write_rooms(&g.instance))?;
    write(&out.join("availability.csv"), &write_availability(&g.instance))?;
    write(&out.join("witness.csv"), &write_timetable(&g.witness, &g.witness_groups, &g.instance))?;
    println!(
        "{} groups, {} sections, {} professors, {} rooms",
        g.instance.groups.len(),
        g.instance.sections.len(),
        g.instance.professors.len(),
        g.instance.rooms.len()
    );
    Ok(0)
}
