//! Line-oriented solution files: `name value` pairs, `#` comments.
//!
//! This is the format Gurobi writes for `.sol` files. A comment line of the
//! form `# status: optimal` marks the solution as proven optimal.

use std::fmt::Write;

use thiserror::Error;

use super::lp::fmt_num;
use super::{Assignment, Model, SolveStatus, FEAS_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionError {
    #[error("line {line}: expected `name value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: value {value:?} for {name:?} is not a number")]
    NotANumber { line: usize, name: String, value: String },
    #[error("line {line}: value {value} for {name:?} outside bounds [{lower}, {upper}]")]
    OutOfBounds { line: usize, name: String, value: f64, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub assignment: Assignment,
    pub warnings: Vec<String>,
    /// Status declared in a `# status:` comment, if any.
    pub declared_status: Option<SolveStatus>,
}

fn parse_status(comment: &str) -> Option<SolveStatus> {
    let body = comment.trim_start_matches('#').trim();
    let (key, value) = body.split_once([':', '='])?;
    if !key.trim().eq_ignore_ascii_case("status") {
        return None;
    }
    match value.trim().to_ascii_lowercase().as_str() {
        "optimal" => Some(SolveStatus::Optimal),
        "feasible" => Some(SolveStatus::Feasible),
        "limit" => Some(SolveStatus::Limit),
        _ => None,
    }
}

/// Reads a solution file against `model`. Variables absent from the file
/// are set to zero and reported as warnings.
pub fn parse_solution(text: &str, model: &Model) -> Result<ParsedSolution, SolutionError> {
    let mut values: Vec<Option<f64>> = vec![None; model.num_vars()];
    let mut warnings = Vec::new();
    let mut declared_status = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            declared_status = declared_status.or_else(|| parse_status(line));
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolutionError::Malformed { line: line_no, text: raw.to_string() });
        };
        let val: f64 = value.parse().map_err(|_| SolutionError::NotANumber {
            line: line_no,
            name: name.to_string(),
            value: value.to_string(),
        })?;
        if !val.is_finite() {
            return Err(SolutionError::NotANumber { line: line_no, name: name.to_string(), value: value.to_string() });
        }
        let Some(id) = model.var_by_name(name) else {
            warnings.push(format!("line {line_no}: unknown variable {name:?} ignored"));
            continue;
        };
        let v = model.var(id);
        if val < v.lower - FEAS_TOL || val > v.upper + FEAS_TOL {
            return Err(SolutionError::OutOfBounds {
                line: line_no,
                name: name.to_string(),
                value: val,
                lower: v.lower,
                upper: v.upper,
            });
        }
        values[id.0] = Some(val);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.unwrap_or_else(|| {
                warnings.push(format!("variable {:?} missing, set to 0", model.vars()[i].name));
                0.0
            })
        })
        .collect();
    Ok(ParsedSolution { assignment: Assignment { values }, warnings, declared_status })
}

/// Writes every variable of `model` as a `name value` line.
pub fn write_solution(model: &Model, assignment: &Assignment, status: SolveStatus, objective: f64) -> String {
    let mut out = String::with_capacity(24 * model.num_vars() + 64);
    let _ = writeln!(out, "# status: {status}");
    let _ = writeln!(out, "# objective: {}", fmt_num(objective));
    for (name, v) in assignment.named(model) {
        let _ = writeln!(out, "{name} {}", fmt_num(v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mipcore::VarKind;

    fn model() -> Model {
        let mut m = Model::new();
        m.add_binary("x").unwrap();
        m.add_var("n", VarKind::Integer, 0.0, 10.0).unwrap();
        m
    }

    #[test]
    fn reads_pairs_and_comments() {
        let m = model();
        let p = parse_solution("# Objective value = 3\nx 1\nn 7\n", &m).unwrap();
        assert_eq!(p.assignment.values, vec![1.0, 7.0]);
        assert!(p.warnings.is_empty());
        assert_eq!(p.declared_status, None);
    }

    #[test]
    fn empty_text_gives_zeros_with_warnings() {
        let m = model();
        let p = parse_solution("", &m).unwrap();
        assert_eq!(p.assignment.values, vec![0.0, 0.0]);
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn rejects_garbage() {
        let m = model();
        assert!(matches!(parse_solution("x one", &m), Err(SolutionError::NotANumber { .. })));
        assert!(matches!(parse_solution("x 1 2", &m), Err(SolutionError::Malformed { .. })));
        assert!(matches!(parse_solution("x 2", &m), Err(SolutionError::OutOfBounds { .. })));
    }

    #[test]
    fn status_comment_and_roundtrip() {
        let m = model();
        let a = Assignment { values: vec![1.0, 4.0] };
        let text = write_solution(&m, &a, SolveStatus::Optimal, 4.0);
        let p = parse_solution(&text, &m).unwrap();
        assert_eq!(p.assignment, a);
        assert_eq!(p.declared_status, Some(SolveStatus::Optimal));
    }
}
