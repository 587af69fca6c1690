//! CPLEX LP text export. Output order follows the model exactly, so two
//! builds of the same instance produce byte-identical files.

use std::fmt::Write;

use super::model::{MilpModel, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.var(v).name;
        if a < 0.0 {
            let _ = write!(out, " - {} {name}", -a);
        } else if k == 0 {
            let _ = write!(out, " {a} {name}");
        } else {
            let _ = write!(out, " + {a} {name}");
        }
    }
}

fn fmt_bound(b: f64) -> String {
    if b == f64::INFINITY {
        "+inf".to_string()
    } else if b == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{b}")
    }
}

pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ lot sizing and scheduling model\nMinimize\n obj:");
    let objective: Vec<(VarId, f64)> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(k, v)| (VarId(k), v.objective))
        .collect();
    write_terms(&mut out, model, &objective);
    out.push_str("\nSubject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.name);
        if row.terms.is_empty() {
            // The LP grammar needs at least one term on the left-hand side.
            let _ = write!(out, " 0 {}", model.vars()[0].name);
        } else {
            write_terms(&mut out, model, &row.terms);
        }
        let _ = writeln!(out, " {} {}", row.sense, row.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.vars() {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, v.lower);
        } else if v.lower == 0.0 && v.upper == f64::INFINITY {
            continue;
        } else {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_bound(v.lower),
                v.name,
                fmt_bound(v.upper)
            );
        }
    }
    let binaries: Vec<&str> = model
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Sense;

    #[test]
    fn small_model_text() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Binary, 0.0, 1.0, 1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, f64::INFINITY, 2.5);
        let z = m.add_var("z", VarKind::Continuous, 1.0, 4.0, 0.0);
        m.add_row("c1", vec![(x, 1.0), (y, -2.0), (z, 1.0)], Sense::Ge, 3.0)
            .unwrap();
        let text = write_lp(&m);
        assert_eq!(
            text,
            "\\ lot sizing and scheduling model\nMinimize\n obj: 1 x + 2.5 y\n\
             Subject To\n c1: 1 x - 2 y + 1 z >= 3\nBounds\n 1 <= z <= 4\n\
             Binaries\n x\nEnd\n"
        );
    }
}
