//! CPLEX LP-format writer.

use std::fmt::Write;

use super::{Model, ModelError, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

/// True if `name` can be written to an LP file unquoted.
pub(crate) fn valid_lp_name(name: &str) -> bool {
    const EXTRA: &str = "!\"#$%&()/,.;?@_`'{}|~";
    let Some(first) = name.chars().next() else { return false };
    if first.is_ascii_digit() || first == '.' || name.len() > 255 {
        return false;
    }
    name.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

/// Formats a number with at most 12 significant digits and no trailing zeros.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

fn write_expr(out: &mut String, model: &Model, terms: &[(f64, VarId)]) {
    for (i, &(c, v)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.var(v).name;
        let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
        if i == 0 && sign == "+" {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag == 1.0 {
            out.push_str(name);
        } else {
            let _ = write!(out, "{} {}", fmt_num(mag), name);
        }
    }
}

/// Renders `model` as a CPLEX LP file. Output is a pure function of the
/// model: same model, same bytes.
pub fn write_lp(model: &Model) -> Result<String, ModelError> {
    for v in model.vars() {
        if !valid_lp_name(&v.name) {
            return Err(ModelError::InvalidName(v.name.clone()));
        }
    }
    for c in model.constraints() {
        if !valid_lp_name(&c.name) {
            return Err(ModelError::InvalidName(c.name.clone()));
        }
        if c.terms.is_empty() {
            return Err(ModelError::EmptyRow(c.name.clone()));
        }
    }

    let mut out = String::with_capacity(64 * (model.num_constraints() + model.num_vars()) + 64);
    out.push_str("Minimize\n obj:");
    write_expr(&mut out, model, model.objective());
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.sense, fmt_num(c.rhs));
    }

    out.push_str("Bounds\n");
    for v in model.vars() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let lo_default = v.lower == 0.0;
        let hi_inf = v.upper == f64::INFINITY;
        match (v.lower == f64::NEG_INFINITY, hi_inf) {
            (true, true) => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (true, false) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, fmt_num(v.upper));
            }
            (false, true) if lo_default => {}
            (false, true) => {
                let _ = writeln!(out, " {} >= {}", v.name, fmt_num(v.lower));
            }
            (false, false) => {
                let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
            }
        }
    }

    let section = |out: &mut String, title: &str, kind: VarKind| {
        let names: Vec<&str> = model.vars().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            return;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    };
    section(&mut out, "Generals", VarKind::Integer);
    section(&mut out, "Binaries", VarKind::Binary);
    out.push_str("End\n");
    Ok(out)
}
