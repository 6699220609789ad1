//! Lossless B-theta DC OPF, used only to produce warm-start voltage angles.

use super::lifted::install_lifted_cost;
use crate::lp::{LpBackend, LpModel, LpStatus, RowTag, Sense, VarId};
use crate::network::Network;

#[derive(Debug, thiserror::Error)]
pub enum DcError {
    #[error("DC OPF is infeasible")]
    Infeasible,
    #[error("DC OPF failed: {0}")]
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct DcSolution {
    pub p_g: Vec<f64>,
    pub theta: Vec<f64>,
    /// Directed flow per branch, from side.
    pub flows: Vec<f64>,
    pub objective: f64,
}

/// Solve the standard DC approximation: `p_ij = (theta_i - theta_j - shift) / (x tau)`
/// with generator boxes, RATE_A limits on |p_ij| and the angle-difference box.
/// Voltages are taken as 1 pu by the warm start that consumes this.
pub fn dc_opf(net: &Network, backend: &dyn LpBackend) -> Result<DcSolution, DcError> {
    let mut m = LpModel::new();
    let theta: Vec<VarId> = net
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if b.is_ref {
                m.add_var(format!("th{i}"), 0.0, 0.0)
            } else {
                m.add_var(format!("th{i}"), f64::NEG_INFINITY, f64::INFINITY)
            }
        })
        .collect();
    let p_g: Vec<VarId> = net
        .generators
        .iter()
        .enumerate()
        .map(|(g, gen)| m.add_var(format!("pg{g}"), gen.p_min, gen.p_max))
        .collect();
    let flows: Vec<VarId> = net
        .branches
        .iter()
        .enumerate()
        .map(|(b, br)| {
            if br.s_max > 0.0 {
                m.add_var(format!("p{b}"), -br.s_max, br.s_max)
            } else {
                m.add_var(format!("p{b}"), f64::NEG_INFINITY, f64::INFINITY)
            }
        })
        .collect();

    for (b, br) in net.branches.iter().enumerate() {
        let z = br.y_series.inv();
        let x = if z.im.abs() < 1e-9 { 1e-9 } else { z.im };
        let susceptance = 1.0 / (x * br.tau);
        m.add_row(
            vec![
                (flows[b], 1.0),
                (theta[br.from], -susceptance),
                (theta[br.to], susceptance),
            ],
            Sense::Eq,
            -susceptance * br.theta_shift,
            RowTag::DcFlow(b),
        )
        .unwrap();
        let diff = vec![(theta[br.from], 1.0), (theta[br.to], -1.0)];
        m.add_row(diff.clone(), Sense::Le, br.theta_max, RowTag::AngleHi(b)).unwrap();
        m.add_row(diff, Sense::Ge, br.theta_min, RowTag::AngleLo(b)).unwrap();
    }
    for (i, bus) in net.buses.iter().enumerate() {
        let mut terms: Vec<(VarId, f64)> = net.gens_at[i].iter().map(|&g| (p_g[g], 1.0)).collect();
        for &(b, from_side) in &net.incidence[i] {
            terms.push((flows[b], if from_side { -1.0 } else { 1.0 }));
        }
        // shunt conductance drawn at the assumed 1 pu voltage
        m.add_row(terms, Sense::Eq, bus.p_d + bus.g_sh, RowTag::DcNodal(i)).unwrap();
    }
    install_lifted_cost(&mut m, &net.generators, &p_g, 1e-5);

    let sol = backend.solve(&m).map_err(|e| DcError::Failed(e.to_string()))?;
    match sol.status {
        LpStatus::Optimal => Ok(DcSolution {
            p_g: p_g.iter().map(|v| sol.value(*v)).collect(),
            theta: theta.iter().map(|v| sol.value(*v)).collect(),
            flows: flows.iter().map(|v| sol.value(*v)).collect(),
            objective: sol.objective,
        }),
        LpStatus::Infeasible => Err(DcError::Infeasible),
        s => Err(DcError::Failed(format!("{s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::RawCase;
    use crate::lp::ClarabelBackend;
    use crate::network::build_network;
    use approx::assert_relative_eq;

    fn two_bus(load_mw: f64, angmax_deg: f64) -> Network {
        let text = format!(
            r#"
function mpc = dc2
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 {load_mw} 0 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.0 0.1 0.0 0 0 0 0 0 1 {angmin} {angmax}; ];
mpc.gencost = [ 2 0 0 3 0 20 5; ];
"#,
            load_mw = load_mw,
            angmin = -angmax_deg,
            angmax = angmax_deg
        );
        build_network(&RawCase::parse(&text).unwrap()).unwrap()
    }

    #[test]
    fn hand_solved_single_line() {
        let net = two_bus(100.0, 30.0);
        let dc = dc_opf(&net, &ClarabelBackend::default()).unwrap();
        assert_relative_eq!(dc.flows[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(dc.theta[1], -0.1, epsilon = 1e-6);
        assert_relative_eq!(dc.p_g[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_load_settles_at_lower_bounds() {
        let net = two_bus(0.0, 30.0);
        let dc = dc_opf(&net, &ClarabelBackend::default()).unwrap();
        assert_relative_eq!(dc.p_g[0], 0.0, epsilon = 1e-7);
        // objective reduces to the constant coefficient
        assert_relative_eq!(dc.objective, 5.0, epsilon = 1e-6);
    }

    #[test]
    fn unservable_angle_bound_is_infeasible() {
        // 1 pu over x = 0.1 needs 0.1 rad; cap the angle at ~0.017 rad
        let net = two_bus(100.0, 1.0);
        assert!(matches!(
            dc_opf(&net, &ClarabelBackend::default()),
            Err(DcError::Infeasible)
        ));
    }
}
