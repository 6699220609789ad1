//! Backend contract plus the bundled interior-point backend.
//!
//! The bundled backend hands the equilibrated model to Clarabel (a
//! primal-dual interior-point method whose duals need no crossover) and maps
//! the cone duals back to the crate's `d(objective)/d(rhs)` convention.

use super::{LpError, LpModel, LpSolution, LpStatus, Sense};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus,
    SupportedConeT, ZeroConeT,
};

/// Contract every LP engine must satisfy: solve a model, return primal
/// values, row duals in the crate convention and a status.
///
/// Backends may reuse internal state between solves (warm starts); drivers
/// must not depend on it.
pub trait LpBackend {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError>;
    fn name(&self) -> &'static str;
}

/// Interior-point backend with crossover-free duals.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    /// Feasibility/gap tolerance handed to the engine.
    pub tolerance: f64,
    pub max_iterations: u32,
    /// Row/column max-abs equilibration applied before the engine's own scaling.
    pub equilibrate: bool,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        ClarabelBackend {
            tolerance: 1e-9,
            max_iterations: 200,
            equilibrate: true,
        }
    }
}

impl LpBackend for ClarabelBackend {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError> {
        solve_clarabel(self, model)
    }
    fn name(&self) -> &'static str {
        "clarabel"
    }
}

/// One conic row of the assembled problem: coefficients over variables,
/// rhs, link back to the model row (structural rows only) and its scale.
struct ConicRow {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
    model_row: Option<usize>,
    /// Sign applied when mapping the cone dual back to the model row dual.
    dual_sign: f64,
    row_scale: f64,
}

fn solve_clarabel(cfg: &ClarabelBackend, model: &LpModel) -> Result<LpSolution, LpError> {
    let n = model.n_vars();

    // Column equilibration: x = S x~ with S from max-abs over structural rows.
    let mut col_scale = vec![1.0f64; n];
    if cfg.equilibrate {
        let mut col_max = vec![0.0f64; n];
        for row in model.rows.iter().flatten() {
            for (v, c) in &row.coeffs {
                col_max[v.0] = col_max[v.0].max(c.abs());
            }
        }
        for j in 0..n {
            if col_max[j] > 0.0 {
                // powers of two keep the scaling exactly invertible
                col_scale[j] = exp2_near(1.0 / col_max[j].sqrt());
            }
        }
    }

    // Structural rows first (equalities, then inequalities), then bound rows.
    let mut eq_rows: Vec<ConicRow> = Vec::new();
    let mut ineq_rows: Vec<ConicRow> = Vec::new();
    for (i, row) in model.rows.iter().enumerate() {
        let Some(row) = row else { continue };
        let scaled: Vec<(usize, f64)> = row
            .coeffs
            .iter()
            .map(|(v, c)| (v.0, c * col_scale[v.0]))
            .collect();
        let row_scale = if cfg.equilibrate {
            let m = scaled.iter().map(|(_, c)| c.abs()).fold(0.0f64, f64::max);
            if m > 0.0 {
                exp2_near(1.0 / m)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let (sign, flip) = match row.sense {
            Sense::Eq => (1.0, false),
            Sense::Le => (1.0, false),
            Sense::Ge => (-1.0, true),
        };
        let coeffs: Vec<(usize, f64)> = scaled
            .iter()
            .map(|(j, c)| (*j, sign * c * row_scale))
            .collect();
        let conic = ConicRow {
            coeffs,
            rhs: sign * row.rhs * row_scale,
            model_row: Some(i),
            // lambda = d obj / d rhs = -z for Eq/Le rows, +z for Ge rows
            dual_sign: if flip { 1.0 } else { -1.0 },
            row_scale,
        };
        match row.sense {
            Sense::Eq => eq_rows.push(conic),
            _ => ineq_rows.push(conic),
        }
    }
    for (j, var) in model.vars.iter().enumerate() {
        let (lo, hi) = (var.lower / col_scale[j], var.upper / col_scale[j]);
        if lo == hi {
            eq_rows.push(ConicRow {
                coeffs: vec![(j, 1.0)],
                rhs: lo,
                model_row: None,
                dual_sign: 0.0,
                row_scale: 1.0,
            });
            continue;
        }
        if hi.is_finite() {
            ineq_rows.push(ConicRow {
                coeffs: vec![(j, 1.0)],
                rhs: hi,
                model_row: None,
                dual_sign: 0.0,
                row_scale: 1.0,
            });
        }
        if lo.is_finite() {
            ineq_rows.push(ConicRow {
                coeffs: vec![(j, -1.0)],
                rhs: -lo,
                model_row: None,
                dual_sign: 0.0,
                row_scale: 1.0,
            });
        }
    }

    let n_eq = eq_rows.len();
    let all_rows: Vec<&ConicRow> = eq_rows.iter().chain(ineq_rows.iter()).collect();
    let m_rows = all_rows.len();

    // CSC assembly
    let mut entries_per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, row) in all_rows.iter().enumerate() {
        for (j, c) in &row.coeffs {
            if *c != 0.0 {
                entries_per_col[*j].push((r, *c));
            }
        }
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in entries_per_col.iter_mut() {
        col.sort_by_key(|(r, _)| *r);
        for (r, c) in col.iter() {
            rowval.push(*r);
            nzval.push(*c);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m_rows, n, colptr, rowval, nzval);
    let b: Vec<f64> = all_rows.iter().map(|r| r.rhs).collect();
    // objective scaling by the reciprocal of the largest coefficient
    let mut q: Vec<f64> = (0..n).map(|j| model.objective[j] * col_scale[j]).collect();
    let obj_scale = if cfg.equilibrate {
        let m = q.iter().map(|c| c.abs()).fold(0.0f64, f64::max);
        if m > 0.0 {
            exp2_near(1.0 / m)
        } else {
            1.0
        }
    } else {
        1.0
    };
    for c in q.iter_mut() {
        *c *= obj_scale;
    }
    let p = CscMatrix::zeros((n, n));
    let cones: Vec<SupportedConeT<f64>> = vec![ZeroConeT(n_eq), NonnegativeConeT(m_rows - n_eq)];

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(cfg.max_iterations)
        .tol_feas(cfg.tolerance)
        .tol_gap_abs(cfg.tolerance)
        .tol_gap_rel(cfg.tolerance)
        .build()
        .map_err(|e| LpError::Backend(format!("bad settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
        .map_err(|e| LpError::Backend(format!("{e:?}")))?;
    solver.solve();

    let status = match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => LpStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            LpStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => LpStatus::Unbounded,
        _ => LpStatus::NumericalFailure,
    };

    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: f64::NAN,
        });
    }

    let primal: Vec<f64> = solver
        .solution
        .x
        .iter()
        .enumerate()
        .map(|(j, x)| x * col_scale[j])
        .collect();
    let mut duals = vec![0.0; model.rows.len()];
    for (r, row) in all_rows.iter().enumerate() {
        if let Some(i) = row.model_row {
            duals[i] = row.dual_sign * solver.solution.z[r] * row.row_scale / obj_scale;
        }
    }
    let objective = model.objective_value(&primal);
    Ok(LpSolution {
        status,
        primal,
        duals,
        objective,
    })
}

/// Nearest power of two, for loss-free scaling.
fn exp2_near(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    (x.log2().round()).exp2()
}
