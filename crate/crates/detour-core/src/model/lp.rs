//! LP-format text export of a [`MilpInstance`], for reproducing runs with
//! external solvers.

use std::fmt::Write as _;

use crate::model::{MilpInstance, Sense, VarKind};

/// Render the instance in CPLEX LP format. Variable names are sanitized to
/// the LP-safe alphabet; rows are named r0, r1, ... in declaration order.
pub fn write_lp(inst: &MilpInstance) -> String {
    let names: Vec<String> = inst.var_names.iter().map(|n| sanitize(n)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", inst.name);
    out.push_str("Minimize\n obj:");
    if inst.objective.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
    }
    for &(v, c) in &inst.objective {
        push_term(&mut out, c, &names[v]);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in inst.rows.iter().enumerate() {
        let _ = write!(out, " r{i}:");
        if row.terms.is_empty() {
            // degenerate but legal: encode as 0 * first variable
            push_term(&mut out, 0.0, &names[0]);
        }
        for &(v, c) in &row.terms {
            push_term(&mut out, c, &names[v]);
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
    }

    out.push_str("Bounds\n");
    for (v, kind) in inst.vars.iter().enumerate() {
        match *kind {
            VarKind::Binary => {}
            VarKind::Integer { ub } => {
                let _ = writeln!(out, " 0 <= {} <= {}", names[v], fmt_num(ub));
            }
            VarKind::Continuous { lb, ub } => {
                if ub.is_finite() {
                    let _ = writeln!(
                        out,
                        " {} <= {} <= {}",
                        fmt_num(lb),
                        names[v],
                        fmt_num(ub)
                    );
                } else if lb != 0.0 {
                    let _ = writeln!(out, " {} >= {}", names[v], fmt_num(lb));
                }
            }
        }
    }

    let binaries: Vec<&str> = inst
        .vars
        .iter()
        .enumerate()
        .filter(|(_, k)| matches!(k, VarKind::Binary))
        .map(|(v, _)| names[v].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    let generals: Vec<&str> = inst
        .vars
        .iter()
        .enumerate()
        .filter(|(_, k)| matches!(k, VarKind::Integer { .. }))
        .map(|(v, _)| names[v].as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for chunk in generals.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", fmt_num(-coef), name);
    } else {
        let _ = write!(out, " + {} {}", fmt_num(coef), name);
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "[],_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}
