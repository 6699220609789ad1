//! Assembly of the static LP skeleton shared by all three drivers: variable
//! blocks with their boxes, nodal balance, branch-flow definitions, angle
//! rows, the lifted cost polyhedron and optional current-limit rows.
//!
//! The skeleton never contains cut rows; those are added and re-anchored by
//! the drivers between solves.

mod dc;
mod lifted;

pub use dc::{dc_opf, DcError, DcSolution};
pub use lifted::{btn_accuracy, btn_depth, install_lifted_cost, install_pair, CostLift, LiftPair};

use crate::lp::{Dir, LpModel, RowId, RowTag, Sense, VarId};
use crate::network::{wi_bounds, wr_bounds, Branch, Network};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("branch {0} has no current rating")]
    MissingCurrentRating(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Outer approximation of the cone relaxation: no angles, no slacks.
    SocpRelax,
    /// Radial driver: slack variables, no angle variables.
    Radial,
    /// Meshed driver: angle variables, angle box rows, slack variables.
    Meshed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThermalMode {
    /// Apparent-power ratings enforced by dynamically generated halfspaces.
    Mva,
    /// Linear squared-current rows installed statically.
    Current,
    /// Ratings ignored.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulationOptions {
    pub mode: Mode,
    pub thermal: ThermalMode,
    pub cost_accuracy: f64,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        FormulationOptions {
            mode: Mode::Meshed,
            thermal: ThermalMode::Mva,
            cost_accuracy: 1e-5,
        }
    }
}

/// Handles of every variable block, indexed by network entity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarMap {
    pub p_g: Vec<VarId>,
    pub q_g: Vec<VarId>,
    pub w: Vec<VarId>,
    /// Present in Meshed mode only.
    pub theta: Option<Vec<VarId>>,
    pub wr: Vec<VarId>,
    pub wi: Vec<VarId>,
    pub p_fwd: Vec<VarId>,
    pub q_fwd: Vec<VarId>,
    pub p_rev: Vec<VarId>,
    pub q_rev: Vec<VarId>,
    /// Slack r per branch; present in Radial and Meshed modes.
    pub slack: Option<Vec<VarId>>,
    pub lift: CostLift,
}

/// Iteration-independent part of the LP, cloned per solve when batch-running.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub model: LpModel,
    pub vars: VarMap,
    pub options: FormulationOptions,
}

pub fn build_skeleton(net: &Network, options: &FormulationOptions) -> Skeleton {
    let mut m = LpModel::new();
    let _nb = net.n_buses();
    let nl = net.n_branches();

    let p_g: Vec<VarId> = net
        .generators
        .iter()
        .enumerate()
        .map(|(g, gen)| m.add_var(format!("pg{g}"), gen.p_min, gen.p_max))
        .collect();
    let q_g: Vec<VarId> = net
        .generators
        .iter()
        .enumerate()
        .map(|(g, gen)| m.add_var(format!("qg{g}"), gen.q_min, gen.q_max))
        .collect();
    let w: Vec<VarId> = net
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| m.add_var(format!("w{i}"), b.v_min * b.v_min, b.v_max * b.v_max))
        .collect();
    let theta: Option<Vec<VarId>> = match options.mode {
        Mode::Meshed => Some(
            net.buses
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    if b.is_ref {
                        m.add_var(format!("th{i}"), 0.0, 0.0)
                    } else {
                        m.add_var(format!("th{i}"), f64::NEG_INFINITY, f64::INFINITY)
                    }
                })
                .collect(),
        ),
        _ => None,
    };

    let mut wr = Vec::with_capacity(nl);
    let mut wi = Vec::with_capacity(nl);
    for (b, br) in net.branches.iter().enumerate() {
        let (bi, bj) = (&net.buses[br.from], &net.buses[br.to]);
        let (lo, hi) = wr_bounds(bi, bj, br.theta_min, br.theta_max);
        wr.push(m.add_var(format!("wr{b}"), lo, hi));
        let (lo, hi) = wi_bounds(bi, bj, br.theta_min, br.theta_max);
        wi.push(m.add_var(format!("wi{b}"), lo, hi));
    }

    // Directed flow variables. Under MVA ratings the box |p|,|q| <= s_max is
    // implied by the disk and keeps the pre-cut LPs bounded.
    let flow_bound = |br: &Branch| -> (f64, f64) {
        if options.thermal == ThermalMode::Mva && br.s_max > 0.0 {
            (-br.s_max, br.s_max)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    };
    let mut p_fwd = Vec::with_capacity(nl);
    let mut q_fwd = Vec::with_capacity(nl);
    let mut p_rev = Vec::with_capacity(nl);
    let mut q_rev = Vec::with_capacity(nl);
    for (b, br) in net.branches.iter().enumerate() {
        let (lo, hi) = flow_bound(br);
        p_fwd.push(m.add_var(format!("pf{b}"), lo, hi));
        q_fwd.push(m.add_var(format!("qf{b}"), lo, hi));
        p_rev.push(m.add_var(format!("pr{b}"), lo, hi));
        q_rev.push(m.add_var(format!("qr{b}"), lo, hi));
    }

    let slack = match options.mode {
        Mode::SocpRelax => None,
        _ => Some(
            (0..nl)
                .map(|b| m.add_var(format!("r{b}"), 0.0, f64::INFINITY))
                .collect::<Vec<_>>(),
        ),
    };

    // Nodal balance rows.
    for (i, bus) in net.buses.iter().enumerate() {
        let mut p_terms: Vec<(VarId, f64)> = net.gens_at[i].iter().map(|&g| (p_g[g], 1.0)).collect();
        let mut q_terms: Vec<(VarId, f64)> = net.gens_at[i].iter().map(|&g| (q_g[g], 1.0)).collect();
        for &(b, from_side) in &net.incidence[i] {
            p_terms.push((if from_side { p_fwd[b] } else { p_rev[b] }, -1.0));
            q_terms.push((if from_side { q_fwd[b] } else { q_rev[b] }, -1.0));
        }
        if bus.g_sh != 0.0 {
            p_terms.push((w[i], -bus.g_sh));
        }
        if bus.b_sh != 0.0 {
            q_terms.push((w[i], bus.b_sh));
        }
        m.add_row(p_terms, Sense::Eq, bus.p_d, RowTag::NodalP(i)).unwrap();
        m.add_row(q_terms, Sense::Eq, bus.q_d, RowTag::NodalQ(i)).unwrap();
    }

    // Branch-flow definitions, both directions.
    for (b, br) in net.branches.iter().enumerate() {
        let f = &br.coeff_fwd;
        let r = &br.coeff_rev;
        let (i, j) = (br.from, br.to);
        m.add_row(
            vec![(p_fwd[b], 1.0), (w[i], -f.g_c), (wr[b], f.g), (wi[b], -f.b)],
            Sense::Eq,
            0.0,
            RowTag::FlowP(b, Dir::Fwd),
        )
        .unwrap();
        m.add_row(
            vec![(q_fwd[b], 1.0), (w[i], -f.b_c), (wr[b], f.b), (wi[b], f.g)],
            Sense::Eq,
            0.0,
            RowTag::FlowQ(b, Dir::Fwd),
        )
        .unwrap();
        m.add_row(
            vec![(p_rev[b], 1.0), (w[j], -r.g_c), (wr[b], r.g), (wi[b], r.b)],
            Sense::Eq,
            0.0,
            RowTag::FlowP(b, Dir::Rev),
        )
        .unwrap();
        m.add_row(
            vec![(q_rev[b], 1.0), (w[j], -r.b_c), (wr[b], r.b), (wi[b], -r.g)],
            Sense::Eq,
            0.0,
            RowTag::FlowQ(b, Dir::Rev),
        )
        .unwrap();
    }

    // Cone-angle rows tan(th_min) wr <= wi <= tan(th_max) wr.
    for (b, br) in net.branches.iter().enumerate() {
        m.add_row(
            vec![(wi[b], 1.0), (wr[b], -br.theta_max.tan())],
            Sense::Le,
            0.0,
            RowTag::SocAngleHi(b),
        )
        .unwrap();
        m.add_row(
            vec![(wi[b], 1.0), (wr[b], -br.theta_min.tan())],
            Sense::Ge,
            0.0,
            RowTag::SocAngleLo(b),
        )
        .unwrap();
    }

    // Angle-difference box on the angle variables (meshed runs only).
    if let Some(theta) = &theta {
        for (b, br) in net.branches.iter().enumerate() {
            let terms = vec![(theta[br.from], 1.0), (theta[br.to], -1.0)];
            m.add_row(terms.clone(), Sense::Le, br.theta_max, RowTag::AngleHi(b)).unwrap();
            m.add_row(terms, Sense::Ge, br.theta_min, RowTag::AngleLo(b)).unwrap();
        }
    }

    // Static current-limit rows when requested; unrated branches are skipped.
    if options.thermal == ThermalMode::Current {
        for (b, br) in net.branches.iter().enumerate() {
            if br.i_max.is_some() {
                let vars = CurrentRowVars {
                    w_from: w[br.from],
                    w_to: w[br.to],
                    wr: wr[b],
                    wi: wi[b],
                };
                current_limit_rows(&mut m, b, br, &vars).unwrap();
            }
        }
    }

    let lift = install_lifted_cost(&mut m, &net.generators, &p_g, options.cost_accuracy);

    Skeleton {
        model: m,
        vars: VarMap {
            p_g,
            q_g,
            w,
            theta,
            wr,
            wi,
            p_fwd,
            q_fwd,
            p_rev,
            q_rev,
            slack,
            lift,
        },
        options: *options,
    }
}

/// Variable handles a current-limit row pair needs.
pub struct CurrentRowVars {
    pub w_from: VarId,
    pub w_to: VarId,
    pub wr: VarId,
    pub wi: VarId,
}

/// Install the two linear squared-current rows of a branch:
/// `l_dir <= i_max^2` with `l` expanded in (w_from, w_to, wr, wi).
pub fn current_limit_rows(
    model: &mut LpModel,
    b: usize,
    br: &Branch,
    vars: &CurrentRowVars,
) -> Result<(RowId, RowId), FormulationError> {
    let i_max = br.i_max.ok_or(FormulationError::MissingCurrentRating(b))?;
    let lim = i_max * i_max;
    let cf = &br.cur_fwd;
    let fwd = model
        .add_row(
            vec![
                (vars.w_from, cf.a_wf),
                (vars.w_to, cf.a_wt),
                (vars.wr, cf.a_wr),
                (vars.wi, cf.a_wi),
            ],
            Sense::Le,
            lim,
            RowTag::CurrentLimit(b, Dir::Fwd),
        )
        .unwrap();
    let cr = &br.cur_rev;
    let rev = model
        .add_row(
            vec![
                (vars.w_from, cr.a_wf),
                (vars.w_to, cr.a_wt),
                (vars.wr, cr.a_wr),
                (vars.wi, cr.a_wi),
            ],
            Sense::Le,
            lim,
            RowTag::CurrentLimit(b, Dir::Rev),
        )
        .unwrap();
    Ok((fwd, rev))
}
