//! Post-solve KKT validation and a plain-text model dump for external
//! cross-checking.

use super::{LpModel, LpSolution, Sense};

/// Infinity-norm KKT residuals of a claimed optimal solution.
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    /// Row and bound violations.
    pub primal: f64,
    /// Stationarity violation of the reduced costs against the bound signs.
    pub dual: f64,
    /// max |lambda_i * slack_i| over inequality rows.
    pub complementarity: f64,
}

pub fn kkt_residuals(model: &LpModel, sol: &LpSolution) -> KktReport {
    let x = &sol.primal;
    let mut primal = 0.0f64;
    let mut comp = 0.0f64;

    for (i, row) in model.rows.iter().enumerate() {
        let Some(row) = row else { continue };
        let act: f64 = row.coeffs.iter().map(|(v, c)| c * x[v.0]).sum();
        let (viol, slack) = match row.sense {
            Sense::Eq => ((act - row.rhs).abs(), 0.0),
            Sense::Le => ((act - row.rhs).max(0.0), (row.rhs - act).max(0.0)),
            Sense::Ge => ((row.rhs - act).max(0.0), (act - row.rhs).max(0.0)),
        };
        primal = primal.max(viol);
        if row.sense != Sense::Eq {
            comp = comp.max((sol.duals[i] * slack).abs());
        }
    }

    // reduced costs: d_j = c_j - sum_i lambda_i a_ij
    let mut reduced: Vec<f64> = model.objective.clone();
    for (i, row) in model.rows.iter().enumerate() {
        let Some(row) = row else { continue };
        let lam = sol.duals[i];
        if lam != 0.0 {
            for (v, c) in &row.coeffs {
                reduced[v.0] -= lam * c;
            }
        }
    }
    let mut dual = 0.0f64;
    for (j, var) in model.vars.iter().enumerate() {
        primal = primal.max(var.lower - x[j]).max(x[j] - var.upper);
        if var.lower == var.upper {
            continue; // fixed variables carry no sign condition
        }
        let band = 1e-7 * (1.0 + x[j].abs());
        let at_lo = var.lower.is_finite() && x[j] - var.lower <= band;
        let at_hi = var.upper.is_finite() && var.upper - x[j] <= band;
        let d = reduced[j];
        let viol = if at_lo && at_hi {
            0.0
        } else if at_lo {
            (-d).max(0.0)
        } else if at_hi {
            d.max(0.0)
        } else {
            d.abs()
        };
        dual = dual.max(viol);
    }
    KktReport {
        primal,
        dual,
        complementarity: comp,
    }
}

/// Dump the model in a conventional LP text format (objective, subject-to
/// rows, bounds) so it can be fed to external tools for cross-checking.
pub fn write_lp_text(model: &LpModel) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, c) in model.objective.iter().enumerate() {
        if *c != 0.0 {
            let sign = if *c >= 0.0 && !first { " +" } else { " " };
            let _ = write!(out, "{sign}{c} {}", model.vars[j].name);
            first = false;
        }
    }
    if model.objective_constant != 0.0 {
        let _ = write!(out, " + {}", model.objective_constant);
    }
    out.push_str("\nSubject To\n");
    for row in model.rows.iter().flatten() {
        let _ = write!(out, " {}:", row.tag);
        let mut first = true;
        for (v, c) in &row.coeffs {
            if *c == 0.0 {
                continue;
            }
            let sign = if *c >= 0.0 && !first { " +" } else { " " };
            let _ = write!(out, "{sign}{c} {}", model.vars[v.0].name);
            first = false;
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for var in &model.vars {
        let _ = match (var.lower.is_finite(), var.upper.is_finite()) {
            (true, true) => writeln!(out, " {} <= {} <= {}", var.lower, var.name, var.upper),
            (true, false) => writeln!(out, " {} >= {}", var.name, var.lower),
            (false, true) => writeln!(out, " {} <= {}", var.name, var.upper),
            (false, false) => writeln!(out, " {} free", var.name),
        };
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpModel, RowTag, Sense};

    #[test]
    fn lp_text_dump_contains_rows_and_bounds() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 0.0, 10.0);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY);
        m.set_objective_coeff(x, 2.0);
        m.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 4.0, RowTag::NodalP(0))
            .unwrap();
        let txt = write_lp_text(&m);
        assert!(txt.contains("Minimize"));
        assert!(txt.contains("nodal-P:0"));
        assert!(txt.contains("y free"));
        assert!(txt.contains("<= 4"));
    }

    #[test]
    fn kkt_flags_a_corrupted_solution() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 0.0, 10.0);
        m.set_objective_coeff(x, 1.0);
        m.add_row(vec![(x, 1.0)], Sense::Ge, 3.0, RowTag::Custom("lb".into()))
            .unwrap();
        let mut sol = solve_lp(&m).unwrap();
        sol.primal[0] = 1.0; // violates the row
        let k = kkt_residuals(&m, &sol);
        assert!(k.primal > 1.0);
    }
}
