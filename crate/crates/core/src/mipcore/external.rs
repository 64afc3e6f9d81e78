//! Runs an external MILP solver on an LP file and reads back its solution.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

use super::solution::SolutionError;
use super::{evaluate, parse_solution, write_lp, Model, ModelError, SolveResult, SolveStats, SolveStatus};

/// Shell command template. `{lp}` and `{sol}` are replaced with the model and
/// solution paths, then the command is run through `sh -c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    pub command_template: String,
    pub workdir: PathBuf,
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error in {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("solver exited with {code:?}\n{output}")]
    SolverFailure { code: Option<i32>, output: String },
    #[error("solution file: {0}")]
    Solution(#[from] SolutionError),
    #[error("solver returned an infeasible point: {0}")]
    Verification(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExternalError + '_ {
    move |source| ExternalError::Io { path: path.to_path_buf(), source }
}

/// Writes `model.lp` in the work directory, runs the configured command and
/// verifies the returned assignment against the model. The solution is
/// reported optimal only when the solver marks it so.
pub fn solve_external(model: &Model, config: &ExternalConfig) -> Result<SolveResult, ExternalError> {
    fs::create_dir_all(&config.workdir).map_err(io_err(&config.workdir))?;
    // Absolute paths, since the command runs inside the work directory.
    let dir = &fs::canonicalize(&config.workdir).map_err(io_err(&config.workdir))?;
    let lp_path = dir.join("model.lp");
    let sol_path = dir.join("model.sol");
    fs::write(&lp_path, write_lp(model)?).map_err(io_err(&lp_path))?;
    if sol_path.exists() {
        fs::remove_file(&sol_path).map_err(io_err(&sol_path))?;
    }
    let cmd = config
        .command_template
        .replace("{lp}", &lp_path.display().to_string())
        .replace("{sol}", &sol_path.display().to_string());
    let out = Command::new("sh").arg("-c").arg(&cmd).current_dir(dir).output().map_err(io_err(dir))?;
    let output = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    if !out.status.success() {
        return Err(ExternalError::SolverFailure { code: out.status.code(), output });
    }
    let text = fs::read_to_string(&sol_path).map_err(io_err(&sol_path))?;
    let parsed = parse_solution(&text, model)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    let eval = evaluate(model, &parsed.assignment).map_err(|e| ExternalError::Verification(e.to_string()))?;
    if !eval.feasible {
        let names: Vec<&str> = eval.violated.iter().take(5).map(|v| v.name()).collect();
        return Err(ExternalError::Verification(format!(
            "{} violations, first: {}",
            eval.violated.len(),
            names.join(", ")
        )));
    }
    let status = match parsed.declared_status {
        Some(SolveStatus::Optimal) => SolveStatus::Optimal,
        _ => SolveStatus::Feasible,
    };
    Ok(SolveResult {
        status,
        objective: Some(eval.objective),
        assignment: Some(parsed.assignment),
        proof_gap: if status == SolveStatus::Optimal { 0.0 } else { f64::INFINITY },
        stats: SolveStats::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mipcore::{write_solution, Assignment, Sense};

    fn model() -> Model {
        let mut m = Model::new();
        let x = m.add_binary("x").unwrap();
        m.add_objective(2.0, x);
        m.add_constraint("need", vec![(1.0, x)], Sense::Ge, 1.0).unwrap();
        m
    }

    fn config(dir: &Path, template: &str) -> ExternalConfig {
        ExternalConfig { command_template: template.to_string(), workdir: dir.to_path_buf() }
    }

    #[test]
    fn reads_precomputed_solution() {
        let dir = tempfile::tempdir().unwrap();
        let m = model();
        let canned = dir.path().join("canned.sol");
        let text = write_solution(&m, &Assignment { values: vec![1.0] }, SolveStatus::Optimal, 2.0);
        fs::write(&canned, text).unwrap();
        let cfg = config(dir.path(), &format!("cp {} {{sol}}", canned.display()));
        let r = solve_external(&m, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(2.0));
        assert!(dir.path().join("model.lp").exists());
    }

    #[test]
    fn unmarked_solution_is_only_feasible() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "echo 'x 1' > {sol}");
        assert_eq!(solve_external(&model(), &cfg).unwrap().status, SolveStatus::Feasible);
    }

    #[test]
    fn nonzero_exit_is_failure() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "echo broken; exit 1");
        match solve_external(&model(), &cfg) {
            Err(ExternalError::SolverFailure { code, output }) => {
                assert_eq!(code, Some(1));
                assert!(output.contains("broken"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_point_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "echo 'x 0' > {sol}");
        assert!(matches!(solve_external(&model(), &cfg), Err(ExternalError::Verification(_))));
    }
}
