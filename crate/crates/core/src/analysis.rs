//! Independent verification of solutions against the original nonconvex
//! model, angle recovery for radial runs, optimality-gap arithmetic and
//! LMP / Q-LMP extraction from the final LP duals.
//!
//! Everything here works from primal values (and, for prices, the nodal
//! duals); LP row slacks are never consulted.

use crate::network::{two_port, Network, Topology};
use crate::report::{PrimalSolution, SolveReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("operation requires a radial network")]
    NotRadial,
    #[error("reference objective is zero")]
    DivisionByZero,
    #[error("report carries no duals (was the final LP solved?)")]
    MissingDuals,
    #[error("primal block missing from the report")]
    MissingPrimal,
}

/// Residual statistics of a primal point against the original constraints,
/// plus the full-AC nodal mismatch at (v, theta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_f: f64,
    pub mean_f: f64,
    pub max_h: f64,
    pub mean_h: f64,
    pub max_g: f64,
    /// Largest active/reactive nodal imbalance of the AC equations at
    /// (v, theta) with the reported dispatch, pu.
    pub max_p_mismatch: f64,
    pub max_q_mismatch: f64,
    /// Largest apparent loading fraction over rated branches.
    pub worst_loading: f64,
    pub pass: bool,
}

/// Re-verify a solution from scratch: cone and angle residuals from the
/// lifted variables, nodal balance from the full AC power-flow equations.
pub fn verify(
    net: &Network,
    primal: &PrimalSolution,
    eps: f64,
    eps_th: f64,
) -> Result<FeasibilityReport, AnalysisError> {
    let theta = match (&primal.theta, net.topology) {
        (Some(t), _) => t.clone(),
        (None, Topology::Radial) => recover_angles(net, &primal.wr, &primal.wi)?,
        (None, Topology::Meshed) => return Err(AnalysisError::NotRadial),
    };
    let v: Vec<f64> = primal.v.clone();

    let nl = net.n_branches();
    let mut f = Vec::with_capacity(nl);
    let mut h = Vec::with_capacity(nl);
    let mut max_g = 0.0f64;
    let mut worst_loading = 0.0f64;

    // complex bus voltages for the AC recomputation
    let volts: Vec<Complex64> = v
        .iter()
        .zip(&theta)
        .map(|(v, t)| Complex64::from_polar(*v, *t))
        .collect();
    let mut p_inj = vec![0.0f64; net.n_buses()];
    let mut q_inj = vec![0.0f64; net.n_buses()];

    for (b, br) in net.branches.iter().enumerate() {
        let (wr, wi) = (primal.wr[b], primal.wi[b]);
        f.push(primal.w[br.from] - (wr * wr + wi * wi) / primal.w[br.to]);
        h.push(theta[br.from] - theta[br.to] - wi.atan2(wr));
        if br.s_max > 0.0 {
            let s2 = br.s_max * br.s_max;
            for (p, q) in [
                (primal.p_from[b], primal.q_from[b]),
                (primal.p_to[b], primal.q_to[b]),
            ] {
                max_g = max_g.max(p * p + q * q - s2);
            }
        }
        let (yff, yft, ytf, ytt) = two_port(br.y_series, br.b_ch, br.tau, br.theta_shift);
        let s_f = volts[br.from] * (yff * volts[br.from] + yft * volts[br.to]).conj();
        let s_t = volts[br.to] * (ytf * volts[br.from] + ytt * volts[br.to]).conj();
        p_inj[br.from] += s_f.re;
        q_inj[br.from] += s_f.im;
        p_inj[br.to] += s_t.re;
        q_inj[br.to] += s_t.im;
        if br.s_max > 0.0 {
            worst_loading = worst_loading
                .max(s_f.norm() / br.s_max)
                .max(s_t.norm() / br.s_max);
        }
    }

    let mut max_p_mismatch = 0.0f64;
    let mut max_q_mismatch = 0.0f64;
    for (i, bus) in net.buses.iter().enumerate() {
        let gen_p: f64 = net.gens_at[i].iter().map(|&g| primal.p_gen[g]).sum();
        let gen_q: f64 = net.gens_at[i].iter().map(|&g| primal.q_gen[g]).sum();
        let vi2 = v[i] * v[i];
        let p_bal = gen_p - bus.p_d - bus.g_sh * vi2 - p_inj[i];
        let q_bal = gen_q - bus.q_d + bus.b_sh * vi2 - q_inj[i];
        max_p_mismatch = max_p_mismatch.max(p_bal.abs());
        max_q_mismatch = max_q_mismatch.max(q_bal.abs());
    }

    let stat = |xs: &[f64]| -> (f64, f64) {
        if xs.is_empty() {
            (0.0, 0.0)
        } else {
            (
                xs.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64,
            )
        }
    };
    let (max_f, mean_f) = stat(&f);
    let (max_h, mean_h) = stat(&h);
    Ok(FeasibilityReport {
        max_f,
        mean_f,
        max_h,
        mean_h,
        max_g,
        max_p_mismatch,
        max_q_mismatch,
        worst_loading,
        pass: max_f <= eps && max_h <= eps && max_g <= eps_th,
    })
}

/// Recover bus angles of a radial network from (wr, wi) by walking the tree
/// from the reference bus.
pub fn recover_angles(net: &Network, wr: &[f64], wi: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if net.topology != Topology::Radial {
        return Err(AnalysisError::NotRadial);
    }
    let n = net.n_buses();
    let mut theta = vec![f64::NAN; n];
    theta[net.ref_bus] = 0.0;
    let mut stack = vec![net.ref_bus];
    while let Some(i) = stack.pop() {
        for &(b, from_side) in &net.incidence[i] {
            let br = &net.branches[b];
            let other = if from_side { br.to } else { br.from };
            if !theta[other].is_nan() {
                continue;
            }
            let diff = wi[b].atan2(wr[b]); // theta_from - theta_to
            theta[other] = if from_side {
                theta[i] - diff
            } else {
                theta[i] + diff
            };
            stack.push(other);
        }
    }
    Ok(theta)
}

/// Signed relative optimality gap in percent: positive when the reference
/// is cheaper, negative when the sequential solve beat the reference.
pub fn optimality_gap(p_ref: f64, p_slp: f64) -> Result<f64, AnalysisError> {
    if p_ref == 0.0 {
        return Err(AnalysisError::DivisionByZero);
    }
    Ok((p_ref - p_slp) / p_ref * 100.0)
}

/// Nodal prices extracted from the final LP duals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PricingReport {
    /// $/MWh per bus.
    pub lmp: Vec<f64>,
    /// $/MVArh per bus.
    pub qlmp: Vec<f64>,
    pub bus_ids: Vec<i64>,
}

/// LMP and Q-LMP: duals of the nodal balance rows rescaled from the pu
/// power basis to $/MWh and $/MVArh.
pub fn extract_prices(net: &Network, report: &SolveReport) -> Result<PricingReport, AnalysisError> {
    let duals = report.duals.as_ref().ok_or(AnalysisError::MissingDuals)?;
    Ok(PricingReport {
        lmp: duals.lam_p.iter().map(|l| l / net.base_mva).collect(),
        qlmp: duals.lam_q.iter().map(|l| l / net.base_mva).collect(),
        bus_ids: net.buses.iter().map(|b| b.id).collect(),
    })
}

/// Committed reference produced once by an external trusted solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleFixture {
    pub case: String,
    pub objective: f64,
    #[serde(default)]
    pub lmp: Vec<f64>,
    #[serde(default)]
    pub qlmp: Vec<f64>,
    #[serde(default)]
    pub v: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    pub source_solver: String,
    pub tolerance: f64,
    /// Cone-relaxation optimum, when computed for this case.
    #[serde(default)]
    pub socp_objective: Option<f64>,
}

impl OracleFixture {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::RawCase;
    use crate::network::build_network;
    use crate::slp::{run_algorithm2, run_algorithm3, SlpParams};
    use approx::assert_relative_eq;

    fn net_of(text: &str) -> Network {
        build_network(&RawCase::parse(text).unwrap()).unwrap()
    }

    fn two_bus(r: f64, x: f64, c1: f64) -> Network {
        net_of(&format!(
            r#"
function mpc = two
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 100 20 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 {r} {x} 0.0 0 0 0 0 0 1 -30 30; ];
mpc.gencost = [ 2 0 0 3 0 {c1} 0; ];
"#
        ))
    }

    /// An exact AC point built directly from (v, theta) passes verification
    /// at machine precision.
    #[test]
    fn exact_ac_point_passes() {
        let net = two_bus(0.02, 0.1, 10.0);
        let (v1, v2, th2) = (1.02f64, 0.98f64, -0.05f64);
        let br = &net.branches[0];
        let (w1, w2) = (v1 * v1, v2 * v2);
        let wr = v1 * v2 * th2.cos();
        let wi = v1 * v2 * (0.0 - th2).sin();
        // wi is v1 v2 sin(theta_1 - theta_2) = v1 v2 sin(-th2)... theta_2 = th2
        let wi = -wi; // theta_1 = 0, theta_2 = th2 -> sin(0 - th2) = -sin(th2)
        let _ = wi;
        let wi = v1 * v2 * (-th2).sin();
        let (pf, qf, pr, qr) = br.flows(w1, w2, wr, wi);
        let primal = PrimalSolution {
            v: vec![v1, v2],
            theta: Some(vec![0.0, th2]),
            w: vec![w1, w2],
            wr: vec![wr],
            wi: vec![wi],
            p_from: vec![pf],
            q_from: vec![qf],
            p_to: vec![pr],
            q_to: vec![qr],
            // generator balances the from-side; bus 2 load absorbed exactly
            // only if (pr, qr) = -(load); here we just check mismatch math,
            // so pick dispatch that balances bus 1 and ignore bus 2 residual.
            p_gen: vec![pf],
            q_gen: vec![qf],
            slack: None,
        };
        let rep = verify(&net, &primal, 1e-8, 1e-8).unwrap();
        assert!(rep.max_f <= 1e-12, "F {}", rep.max_f);
        assert!(rep.max_h <= 1e-12, "H {}", rep.max_h);
        // bus 1 balances exactly; bus 2 mismatch equals load minus arriving power
        let expect = ((-pr - 1.0).powi(2)).sqrt();
        assert_relative_eq!(rep.max_p_mismatch, expect, epsilon = 1e-10);
    }

    #[test]
    fn flat_start_mismatch_equals_demand() {
        let net = two_bus(0.0, 0.1, 10.0);
        let primal = PrimalSolution {
            v: vec![1.0, 1.0],
            theta: Some(vec![0.0, 0.0]),
            w: vec![1.0, 1.0],
            wr: vec![1.0],
            wi: vec![0.0],
            p_from: vec![0.0],
            q_from: vec![0.0],
            p_to: vec![0.0],
            q_to: vec![0.0],
            p_gen: vec![0.0],
            q_gen: vec![0.0],
            slack: None,
        };
        let rep = verify(&net, &primal, 1e-5, 1e-3).unwrap();
        assert_relative_eq!(rep.max_p_mismatch, 1.0, epsilon = 1e-12); // 100 MW load
        assert_relative_eq!(rep.max_q_mismatch, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn angle_recovery_single_branch() {
        let net = two_bus(0.01, 0.1, 10.0);
        let theta = recover_angles(&net, &[1.0], &[0.1]).unwrap();
        assert_relative_eq!(theta[0], 0.0);
        assert_relative_eq!(theta[1], -(0.1f64).atan2(1.0), epsilon = 1e-12);
        let theta = recover_angles(&net, &[1.0], &[0.0]).unwrap();
        assert_relative_eq!(theta[1], 0.0);
    }

    #[test]
    fn angle_recovery_rejects_meshed() {
        let mut case = RawCase::parse(
            r#"
function mpc = loop3
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 10 0 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.01 0.1 0 0 0 0 0 0 1 -30 30; ];
mpc.gencost = [ 2 0 0 3 0 10 0; ];
"#,
        )
        .unwrap();
        case.branch.push(case.branch[0].clone());
        let net = build_network(&case).unwrap();
        assert!(matches!(
            recover_angles(&net, &[1.0, 1.0], &[0.0, 0.0]),
            Err(AnalysisError::NotRadial)
        ));
    }

    #[test]
    fn gap_arithmetic() {
        assert_relative_eq!(optimality_gap(100.0, 99.9).unwrap(), 0.1, epsilon = 1e-12);
        assert_relative_eq!(optimality_gap(50.0, 50.0).unwrap(), 0.0);
        assert!(matches!(
            optimality_gap(0.0, 1.0),
            Err(AnalysisError::DivisionByZero)
        ));
        // published-pair check: reference 1868511.83 with a -9.1e-3 % gap
        let p_ref = 1868511.83;
        let p_slp = p_ref * (1.0 + 9.1e-5);
        assert_relative_eq!(optimality_gap(p_ref, p_slp).unwrap(), -9.1e-3, epsilon = 1e-9);
    }

    #[test]
    fn lossless_uncongested_prices_equal_marginal_cost() {
        let net = two_bus(0.0, 0.1, 10.0);
        let report = run_algorithm3(&net, &SlpParams::default()).unwrap();
        assert!(report.converged());
        let prices = extract_prices(&net, &report).unwrap();
        assert_relative_eq!(prices.lmp[0], 10.0, epsilon = 2e-3);
        assert_relative_eq!(prices.lmp[1], 10.0, epsilon = 2e-3);
    }

    #[test]
    fn resistive_line_prices_load_bus_higher() {
        let net = two_bus(0.05, 0.1, 10.0);
        let report = run_algorithm2(&net, &SlpParams::default()).unwrap();
        assert!(report.converged());
        let prices = extract_prices(&net, &report).unwrap();
        assert!(
            prices.lmp[1] > prices.lmp[0] + 0.1,
            "load bus {} vs gen bus {}",
            prices.lmp[1],
            prices.lmp[0]
        );
    }

    #[test]
    fn missing_duals_is_reported() {
        let net = two_bus(0.0, 0.1, 10.0);
        let mut report = run_algorithm3(&net, &SlpParams::default()).unwrap();
        report.duals = None;
        assert!(matches!(
            extract_prices(&net, &report),
            Err(AnalysisError::MissingDuals)
        ));
    }

    /// Angle recovery consistency: recovered angles drive the atan2 residual
    /// of a converged radial solution to within the tolerance.
    #[test]
    fn recovered_angles_close_the_cycle_equations() {
        let net = net_of(
            r#"
function mpc = feeder4
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0  0  0 0 1 1 0 135 1 1.05 0.95;
    2 1 40 10 0 0 1 1 0 135 1 1.05 0.95;
    3 1 30 10 0 0 1 1 0 135 1 1.05 0.95;
    4 1 30  5 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [
    1 2 0.02 0.06 0 0 0 0 0 0 1 -30 30;
    2 3 0.03 0.08 0 0 0 0 0 0 1 -30 30;
    2 4 0.025 0.07 0 0 0 0 0 0 1 -30 30;
];
mpc.gencost = [ 2 0 0 3 0.01 25 0; ];
"#,
        );
        let report = run_algorithm2(&net, &SlpParams::default()).unwrap();
        assert!(report.converged());
        let primal = report.primal.as_ref().unwrap();
        let rep = verify(&net, primal, 1e-5, 1e-3).unwrap();
        assert!(rep.pass, "feasibility report: {rep:?}");
        assert!(rep.max_h <= 1e-5);
        // path independence: identical primal, identical report
        let rep2 = verify(&net, primal, 1e-5, 1e-3).unwrap();
        assert_eq!(
            serde_json::to_string(&rep).unwrap(),
            serde_json::to_string(&rep2).unwrap()
        );
    }
}
