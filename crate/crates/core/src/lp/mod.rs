//! Abstract linear program with incremental row management plus a backend
//! contract for solving and returning primal values and row duals.
//!
//! Dual sign convention, fixed for the whole crate: for a minimization, the
//! dual `lambda` of any row satisfies `d(objective)/d(rhs) = lambda`. With
//! that convention the dual of a binding `>=` row is nonnegative and the dual
//! of a binding `<=` row is nonpositive.

mod backend;
mod checks;

pub use backend::{ClarabelBackend, LpBackend};
pub use checks::{kkt_residuals, write_lp_text, KktReport};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("row references unknown variable {0}")]
    UnknownVariable(usize),
    #[error("duplicate row tag `{0}`")]
    DuplicateTag(String),
    #[error("unknown row {0}")]
    UnknownRow(usize),
    #[error("inverted bounds on variable {0}: [{1}, {2}]")]
    InvertedBounds(usize, f64, f64),
    #[error("LP solve failed: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Fwd,
    Rev,
}

/// Identifies the constraint family a row belongs to; unique per row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowTag {
    NodalP(usize),
    NodalQ(usize),
    FlowP(usize, Dir),
    FlowQ(usize, Dir),
    AngleLo(usize),
    AngleHi(usize),
    SocAngleLo(usize),
    SocAngleHi(usize),
    CostLink(usize),
    /// One row of the lifted polyhedral cost approximation.
    Lift { pair: usize, serial: usize },
    CostTangent { pair: usize, iter: usize },
    CurrentLimit(usize, Dir),
    SocHyperplane(usize),
    SocCut { branch: usize, iter: usize },
    ThermalCut { branch: usize, dir: Dir, iter: usize },
    Atan2Lo(usize),
    Atan2Hi(usize),
    DcFlow(usize),
    DcNodal(usize),
    Custom(String),
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::NodalP(i) => write!(f, "nodal-P:{i}"),
            RowTag::NodalQ(i) => write!(f, "nodal-Q:{i}"),
            RowTag::FlowP(b, d) => write!(f, "flow-P:{b}:{d:?}"),
            RowTag::FlowQ(b, d) => write!(f, "flow-Q:{b}:{d:?}"),
            RowTag::AngleLo(b) => write!(f, "angle-lo:{b}"),
            RowTag::AngleHi(b) => write!(f, "angle-hi:{b}"),
            RowTag::SocAngleLo(b) => write!(f, "soc-angle-lo:{b}"),
            RowTag::SocAngleHi(b) => write!(f, "soc-angle-hi:{b}"),
            RowTag::CostLink(g) => write!(f, "cost-link:{g}"),
            RowTag::Lift { pair, serial } => write!(f, "cost-lift:{pair}:{serial}"),
            RowTag::CostTangent { pair, iter } => write!(f, "cost-tangent:{pair}:{iter}"),
            RowTag::CurrentLimit(b, d) => write!(f, "current-limit:{b}:{d:?}"),
            RowTag::SocHyperplane(b) => write!(f, "hyperplane-soc:{b}"),
            RowTag::SocCut { branch, iter } => write!(f, "cut-soc:{branch}:{iter}"),
            RowTag::ThermalCut { branch, dir, iter } => {
                write!(f, "cut-thermal:{branch}:{dir:?}:{iter}")
            }
            RowTag::Atan2Lo(b) => write!(f, "cut-atan2-lo:{b}"),
            RowTag::Atan2Hi(b) => write!(f, "cut-atan2-hi:{b}"),
            RowTag::DcFlow(b) => write!(f, "dc-flow:{b}"),
            RowTag::DcNodal(i) => write!(f, "dc-nodal:{i}"),
            RowTag::Custom(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

/// Linear program: variables with bounds, linear objective, tagged rows.
///
/// Rows may be added, replaced (re-anchored cuts) or removed (pruning)
/// between solves without rebuilding the static part of the model.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub(crate) vars: Vec<VarDef>,
    pub(crate) objective: Vec<f64>,
    pub(crate) objective_constant: f64,
    pub(crate) rows: Vec<Option<Row>>,
    tags: HashMap<RowTag, RowId>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        debug_assert!(lower <= upper);
        self.vars.push(VarDef {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Number of live (non-removed) rows.
    pub fn n_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    pub fn bounds(&self, v: VarId) -> (f64, f64) {
        (self.vars[v.0].lower, self.vars[v.0].upper)
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) -> Result<(), LpError> {
        if lower > upper {
            return Err(LpError::InvertedBounds(v.0, lower, upper));
        }
        self.vars[v.0].lower = lower;
        self.vars[v.0].upper = upper;
        Ok(())
    }

    pub fn set_objective_coeff(&mut self, v: VarId, c: f64) {
        self.objective[v.0] = c;
    }

    pub fn objective_coeff(&self, v: VarId) -> f64 {
        self.objective[v.0]
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_constant += c;
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    /// Append a row. The tag must be unique among live rows.
    pub fn add_row(
        &mut self,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
        tag: RowTag,
    ) -> Result<RowId, LpError> {
        for (v, _) in &coeffs {
            if v.0 >= self.vars.len() {
                return Err(LpError::UnknownVariable(v.0));
            }
        }
        if self.tags.contains_key(&tag) {
            return Err(LpError::DuplicateTag(tag.to_string()));
        }
        let id = RowId(self.rows.len());
        self.tags.insert(tag.clone(), id);
        self.rows.push(Some(Row {
            coeffs,
            sense,
            rhs,
            tag,
        }));
        Ok(id)
    }

    /// Replace the coefficients and rhs of an existing row, keeping tag and sense.
    pub fn replace_row(
        &mut self,
        id: RowId,
        coeffs: Vec<(VarId, f64)>,
        rhs: f64,
    ) -> Result<(), LpError> {
        for (v, _) in &coeffs {
            if v.0 >= self.vars.len() {
                return Err(LpError::UnknownVariable(v.0));
            }
        }
        let row = self
            .rows
            .get_mut(id.0)
            .and_then(|r| r.as_mut())
            .ok_or(LpError::UnknownRow(id.0))?;
        row.coeffs = coeffs;
        row.rhs = rhs;
        Ok(())
    }

    /// Remove a row (cut pruning). Its dual slot reports 0 afterwards.
    pub fn remove_row(&mut self, id: RowId) -> Result<(), LpError> {
        let row = self
            .rows
            .get_mut(id.0)
            .ok_or(LpError::UnknownRow(id.0))?
            .take()
            .ok_or(LpError::UnknownRow(id.0))?;
        self.tags.remove(&row.tag);
        Ok(())
    }

    pub fn row_id(&self, tag: &RowTag) -> Option<RowId> {
        self.tags.get(tag).copied()
    }

    /// Evaluate the row activity `a . x`.
    pub fn row_activity(&self, id: RowId, x: &[f64]) -> Option<f64> {
        self.rows[id.0]
            .as_ref()
            .map(|r| r.coeffs.iter().map(|(v, c)| c * x[v.0]).sum())
    }

    pub fn row_rhs(&self, id: RowId) -> Option<f64> {
        self.rows[id.0].as_ref().map(|r| r.rhs)
    }

    /// Objective value `c . x + const` at a primal point.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.objective_constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Primal/dual solution of an [`LpModel`]. `duals` is indexed by row id;
/// removed rows report 0.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.primal[v.0]
    }
    pub fn dual(&self, r: RowId) -> f64 {
        self.duals[r.0]
    }
}

/// Solve with the default backend.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution, LpError> {
    ClarabelBackend::default().solve(model)
}
