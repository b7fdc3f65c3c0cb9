//! CPLEX-LP-dialect export of a [`MipProblem`].
//!
//! Variable names come from the structured tags and are stable across
//! builds, so an external solver run on the exported file yields solution
//! vectors that line up with the in-process problem variable by variable.

use alloc::string::String;
use alloc::vec::Vec;

use super::{Cmp, MipProblem, ObjSense, VarKind};

const WRAP_COLUMN: usize = 200;

fn push_wrapped(out: &mut String, line: &mut String, piece: &str) {
    if line.len() + piece.len() > WRAP_COLUMN {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push(' ');
    }
    line.push_str(piece);
}

fn fmt_num(x: f64) -> String {
    // Display of f64 round-trips exactly and never uses exponents for the
    // magnitudes that occur here.
    alloc::format!("{x}")
}

fn fmt_term(first: bool, coeff: f64, name: &str) -> String {
    let sign = if coeff < 0.0 {
        "- "
    } else if first {
        ""
    } else {
        "+ "
    };
    let mag = coeff.abs();
    if mag == 1.0 {
        alloc::format!("{sign}{name} ")
    } else {
        alloc::format!("{sign}{} {name} ", fmt_num(mag))
    }
}

/// Renders the problem in LP format with objective, `Subject To`, `Bounds`
/// and `Binaries` sections.
pub fn write_lp(problem: &MipProblem) -> String {
    let mut out = String::new();
    out.push_str(&alloc::format!(
        "\\ inverse mr-sort program: criteria={} examples={} categories={}\n",
        problem.meta.n,
        problem.meta.num_examples,
        problem.meta.p
    ));
    out.push_str(match problem.sense() {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });

    let names: Vec<String> = problem.vars().iter().map(|v| v.tag.name()).collect();

    let mut line = String::from(" obj: ");
    for (k, &(id, coeff)) in problem.objective().iter().enumerate() {
        let term = fmt_term(k == 0, coeff, &names[id.0]);
        push_wrapped(&mut out, &mut line, &term);
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in problem.constraints() {
        let mut line = alloc::format!(" {}: ", c.name);
        for (k, &(id, coeff)) in c.terms.iter().enumerate() {
            let term = fmt_term(k == 0, coeff, &names[id.0]);
            push_wrapped(&mut out, &mut line, &term);
        }
        let cmp = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        push_wrapped(&mut out, &mut line, &alloc::format!("{cmp} {}", fmt_num(c.rhs)));
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for v in problem.vars() {
        if let VarKind::Continuous { lo, hi } = v.kind {
            out.push_str(&alloc::format!(
                " {} <= {} <= {}\n",
                fmt_num(lo),
                names[v.id.0],
                fmt_num(hi)
            ));
        }
    }

    out.push_str("Binaries\n");
    let mut line = String::from(" ");
    for v in problem.vars() {
        if v.kind.is_binary() {
            push_wrapped(&mut out, &mut line, &alloc::format!("{} ", names[v.id.0]));
        }
    }
    out.push_str(&line);
    out.push('\n');
    out.push_str("End\n");
    out
}
