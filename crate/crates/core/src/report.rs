//! Solve reports and the canonical JSON document emitted by the CLI.

use crate::analysis::PricingReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    LpFailure,
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// LP objective (lifted cost + penalties).
    pub lp_objective: f64,
    /// True quadratic dispatch cost at this iterate, $/h.
    pub cost: f64,
    pub max_f: f64,
    pub mean_f: f64,
    /// Signed minimum of F (relaxation-side violation measure).
    pub min_f_signed: f64,
    pub max_g: f64,
    pub max_h: f64,
    pub cuts_soc_added: usize,
    pub cuts_thermal_added: usize,
    pub cuts_pruned: usize,
    /// Branch counts at penalty level rho0 * gamma^j, j = 0..
    pub rho_histogram: Vec<usize>,
    pub lp_status: String,
    pub wall_ms: f64,
}

/// Final primal values in natural units (voltages pu, flows pu, power pu).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimalSolution {
    pub v: Vec<f64>,
    pub theta: Option<Vec<f64>>,
    pub w: Vec<f64>,
    pub wr: Vec<f64>,
    pub wi: Vec<f64>,
    pub p_from: Vec<f64>,
    pub q_from: Vec<f64>,
    pub p_to: Vec<f64>,
    pub q_to: Vec<f64>,
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    pub slack: Option<Vec<f64>>,
}

/// Nodal-balance duals of the final LP, in $/(pu h).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalDuals {
    pub lam_p: Vec<f64>,
    pub lam_q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub case: String,
    pub algorithm: String,
    pub status: SolveStatus,
    /// True dispatch cost at the final iterate, $/h; None when no LP solved.
    pub objective: Option<f64>,
    /// Number of LP solves performed.
    pub iterations: usize,
    pub start_used: String,
    pub max_f: f64,
    pub mean_f: f64,
    pub max_g: f64,
    pub max_h: f64,
    pub mean_h: f64,
    /// Mean of |F| and |H| over the concatenated vectors.
    pub mean_f_h: f64,
    pub wall_ms: f64,
    pub primal: Option<PrimalSolution>,
    pub duals: Option<NodalDuals>,
    pub trace: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Network summary block of the report document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub name: String,
    pub base_mva: f64,
    pub buses: usize,
    pub branches: usize,
    pub generators: usize,
    pub topology: String,
    pub bus_ids: Vec<i64>,
}

impl NetworkSummary {
    pub fn of(net: &crate::network::Network) -> Self {
        NetworkSummary {
            name: net.name.clone(),
            base_mva: net.base_mva,
            buses: net.n_buses(),
            branches: net.n_branches(),
            generators: net.n_gens(),
            topology: format!("{:?}", net.topology),
            bus_ids: net.buses.iter().map(|b| b.id).collect(),
        }
    }
}

/// Top-level JSON document: meta, network, solution, pricing, trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub meta: serde_json::Value,
    pub network: NetworkSummary,
    pub solution: SolveReport,
    pub pricing: Option<PricingReport>,
    pub trace: Vec<IterationRecord>,
}

impl ReportDocument {
    pub fn new(
        meta: serde_json::Value,
        network: NetworkSummary,
        mut solution: SolveReport,
        pricing: Option<PricingReport>,
    ) -> Self {
        let trace = std::mem::take(&mut solution.trace);
        ReportDocument {
            meta,
            network,
            solution,
            pricing,
            trace,
        }
    }
}
