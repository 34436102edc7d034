//! Writes a program in the CPLEX LP file layout, for cross-checking with
//! external solvers.

use std::fmt::Write;

use crate::lp::model::{LinearProgramSpec, Relation, Sense};

fn sanitize(name: &str, fallback: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("{fallback}{s}")
    } else {
        s
    }
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    let mut line_len = 0;
    for (c, name) in terms {
        if c == 0.0 {
            continue;
        }
        let piece = if first {
            format!("{c} {name}")
        } else if c < 0.0 {
            format!(" - {} {name}", -c)
        } else {
            format!(" + {c} {name}")
        };
        if line_len + piece.len() > 240 {
            out.push_str("\n   ");
            line_len = 0;
        }
        line_len += piece.len();
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push_str("0 x_zero_");
    }
}

pub fn to_lp_format(spec: &LinearProgramSpec) -> String {
    let names: Vec<String> = spec
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| sanitize(&v.name, &format!("x{j}_")))
        .collect();
    let mut out = String::new();
    out.push_str(match spec.sense {
        Sense::Min => "Minimize\n",
        Sense::Max => "Maximize\n",
    });
    out.push_str(" obj: ");
    write_terms(
        &mut out,
        spec.objective.iter().zip(&names).map(|(&c, n)| (c, n.clone())),
    );
    out.push_str("\nSubject To\n");
    for (i, c) in spec.constraints.iter().enumerate() {
        let _ = write!(out, " {}: ", sanitize(&c.name, &format!("c{i}_")));
        write_terms(&mut out, c.coeffs.iter().map(|&(j, a)| (a, names[j].clone())));
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, n) in spec.variables.iter().zip(&names) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {n} = {}", v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {n} <= {}", v.lower, v.upper);
            }
            (true, false) if v.lower == 0.0 => {}
            (true, false) => {
                let _ = writeln!(out, " {n} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {n} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {n} free");
            }
        }
    }
    let ints: Vec<&String> = spec
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n)
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for n in ints {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
