//! The three sequential-LP drivers sharing one state machine.
//!
//! Every driver solves at least one LP, evaluates the residual families on
//! the fresh iterate and keeps iterating while any monitored family is
//! violated and the iteration budget allows:
//!
//! * cone relaxation: per-branch halfspaces accumulate at every iterate,
//!   convergence when no branch violates the relaxed cone outward;
//! * radial: a penalized hyperplane re-anchored at the latest iterate plus
//!   halfspaces accumulated where the cone equality was violated;
//! * meshed: additionally a pair of atan2 rows per branch sharing the same
//!   slack variable as the hyperplane.
//!
//! Thermal halfspaces are generated in all drivers at iterates whose
//! apparent flow exceeds the loading gate.

use super::{
    initial_iterate, penalty_update, residuals, starting_point, Iterate, Residuals, SlpError,
    SlpParams,
};
use crate::cuts::{atan2_tangent, soc_tangent, thermal_halfspace};
use crate::formulation::{build_skeleton, FormulationOptions, Mode, Skeleton, ThermalMode};
use crate::lp::{
    ClarabelBackend, Dir, LpBackend, LpSolution, LpStatus, RowId, RowTag, Sense, VarId,
};
use crate::network::{Network, Topology};
use crate::report::{IterationRecord, NodalDuals, PrimalSolution, SolveReport, SolveStatus};
use std::time::Instant;

/// Outer approximation of the cone relaxation.
pub fn run_algorithm1(net: &Network, params: &SlpParams) -> Result<SolveReport, SlpError> {
    run_algorithm1_with(net, params, &ClarabelBackend::default())
}

pub fn run_algorithm1_with(
    net: &Network,
    params: &SlpParams,
    backend: &dyn LpBackend,
) -> Result<SolveReport, SlpError> {
    Driver::new(net, params, backend, Mode::SocpRelax)?.run()
}

/// Radial OPF driver.
pub fn run_algorithm2(net: &Network, params: &SlpParams) -> Result<SolveReport, SlpError> {
    run_algorithm2_with(net, params, &ClarabelBackend::default())
}

pub fn run_algorithm2_with(
    net: &Network,
    params: &SlpParams,
    backend: &dyn LpBackend,
) -> Result<SolveReport, SlpError> {
    if net.topology != Topology::Radial {
        return Err(SlpError::Network(
            "the radial driver requires a radial network".into(),
        ));
    }
    Driver::new(net, params, backend, Mode::Radial)?.run()
}

/// Meshed OPF driver (applicable to any connected topology).
pub fn run_algorithm3(net: &Network, params: &SlpParams) -> Result<SolveReport, SlpError> {
    run_algorithm3_with(net, params, &ClarabelBackend::default())
}

pub fn run_algorithm3_with(
    net: &Network,
    params: &SlpParams,
    backend: &dyn LpBackend,
) -> Result<SolveReport, SlpError> {
    Driver::new(net, params, backend, Mode::Meshed)?.run()
}

/// Radial networks go to the radial driver, everything else to the meshed one.
pub fn solve_auto(net: &Network, params: &SlpParams) -> Result<SolveReport, SlpError> {
    match net.topology {
        Topology::Radial => run_algorithm2(net, params),
        Topology::Meshed => run_algorithm3(net, params),
    }
}

struct Driver<'a> {
    net: &'a Network,
    params: &'a SlpParams,
    backend: &'a dyn LpBackend,
    mode: Mode,
    skel: Skeleton,
    rho: Vec<f64>,
    rho0: f64,
    rho_max: f64,
    hyper_rows: Vec<RowId>,
    atan_rows: Vec<(RowId, RowId)>,
    /// Iterations registered as cone halfspaces, per branch.
    i_reg: Vec<Vec<usize>>,
    /// Iterations registered as thermal halfspaces, per directed branch.
    t_reg: Vec<Vec<usize>>,
    /// Live prunable cut rows with their consecutive-slack counters.
    prune_state: Vec<(RowId, usize)>,
    trace: Vec<IterationRecord>,
    start_label: &'static str,
}

impl<'a> Driver<'a> {
    fn new(
        net: &'a Network,
        params: &'a SlpParams,
        backend: &'a dyn LpBackend,
        mode: Mode,
    ) -> Result<Self, SlpError> {
        params.validate()?;
        let options = FormulationOptions {
            mode,
            thermal: params.thermal,
            cost_accuracy: params.cost_accuracy,
        };
        let skel = build_skeleton(net, &options);
        let nl = net.n_branches();
        let rho0 = params.rho0_for(net);
        Ok(Driver {
            net,
            params,
            backend,
            mode,
            skel,
            rho: vec![rho0; nl],
            rho0,
            rho_max: rho0 * params.rho_max_factor,
            hyper_rows: Vec::new(),
            atan_rows: Vec::new(),
            i_reg: vec![Vec::new(); nl],
            t_reg: vec![Vec::new(); 2 * nl],
            prune_state: Vec::new(),
            trace: Vec::new(),
            start_label: "",
        })
    }

    fn run(mut self) -> Result<SolveReport, SlpError> {
        let t_start = Instant::now();
        let sp = starting_point(self.net, &self.params.start, self.backend);
        self.start_label = sp.label;
        let mut prev = initial_iterate(self.net, &sp, self.mode == Mode::Meshed);

        if self.mode != Mode::SocpRelax {
            for (b, &r) in self.skel.vars.slack.as_ref().unwrap().iter().enumerate() {
                let _ = b;
                self.skel.model.set_objective_coeff(r, self.rho[0]);
            }
        }

        let mut status = SolveStatus::IterationLimit;
        let mut last: Option<(Iterate, LpSolution, Residuals)> = None;

        for k in 1..=self.params.k_max {
            let t_iter = Instant::now();
            let mut cuts_soc = 0usize;
            let mut cuts_thermal = 0usize;

            self.anchor_rows(k, &prev, &mut cuts_soc);

            let sol = self.backend.solve(&self.skel.model)?;
            if sol.status != LpStatus::Optimal {
                // no silent restarts: report the failure with the trace so far
                self.trace.push(IterationRecord {
                    k,
                    lp_objective: f64::NAN,
                    cost: f64::NAN,
                    max_f: f64::NAN,
                    mean_f: f64::NAN,
                    min_f_signed: f64::NAN,
                    max_g: f64::NAN,
                    max_h: f64::NAN,
                    cuts_soc_added: cuts_soc,
                    cuts_thermal_added: 0,
                    cuts_pruned: 0,
                    rho_histogram: self.rho_histogram(),
                    lp_status: format!("{:?}", sol.status),
                    wall_ms: t_iter.elapsed().as_secs_f64() * 1e3,
                });
                status = SolveStatus::LpFailure;
                break;
            }

            let it = self.extract_iterate(&sol);
            let res = residuals(self.net, &it);

            let f_ok = match self.mode {
                Mode::SocpRelax => res.min_signed_f() >= -self.params.eps,
                _ => res.max_abs_f() <= self.params.eps,
            };
            let g_ok = res.max_g() <= self.params.eps_th;
            let h_ok = self.mode != Mode::Meshed || res.max_abs_h() <= self.params.eps;
            let cost_ok = self.refine_cost_if_needed(&sol, k);
            let converged = f_ok && g_ok && h_ok && cost_ok;

            let mut cuts_pruned = 0usize;
            if !converged && k < self.params.k_max {
                self.register_cuts(k, &prev, &it, &res, &mut cuts_soc, &mut cuts_thermal);
                if self.mode != Mode::SocpRelax {
                    let slack = it.slack.as_ref().unwrap();
                    penalty_update(
                        &mut self.rho,
                        slack,
                        self.params.eps,
                        self.params.gamma,
                        self.rho_max,
                    );
                    let slack_vars = self.skel.vars.slack.as_ref().unwrap().clone();
                    for (b, &r) in slack_vars.iter().enumerate() {
                        self.skel.model.set_objective_coeff(r, self.rho[b]);
                    }
                }
                if self.params.prune {
                    cuts_pruned = self.prune_cuts(&sol);
                }
            }

            self.trace.push(IterationRecord {
                k,
                lp_objective: sol.objective,
                cost: self.net.dispatch_cost(&it.p_g),
                max_f: res.max_abs_f(),
                mean_f: res.mean_abs_f(),
                min_f_signed: res.min_signed_f(),
                max_g: res.max_g(),
                max_h: res.max_abs_h(),
                cuts_soc_added: cuts_soc,
                cuts_thermal_added: cuts_thermal,
                cuts_pruned,
                rho_histogram: self.rho_histogram(),
                lp_status: "Optimal".into(),
                wall_ms: t_iter.elapsed().as_secs_f64() * 1e3,
            });

            prev = it.clone();
            last = Some((it, sol, res));
            if converged {
                status = SolveStatus::Converged;
                break;
            }
        }

        Ok(self.report(status, last, t_start))
    }

    /// Rows anchored at the previous iterate: the accumulating halfspaces of
    /// the relaxation driver, the penalized hyperplane, and the atan2 pair.
    fn anchor_rows(&mut self, k: usize, prev: &Iterate, cuts_soc: &mut usize) {
        let nl = self.net.n_branches();
        for b in 0..nl {
            let br = &self.net.branches[b];
            let tan = soc_tangent(prev.wr[b], prev.wi[b], prev.w[br.to])
                .expect("iterate w stays above the positive voltage floor");
            let v = &self.skel.vars;
            let base = vec![
                (v.wr[b], tan.a[0]),
                (v.wi[b], tan.a[1]),
                (v.w[br.to], tan.a[2]),
                (v.w[br.from], -1.0),
            ];
            match self.mode {
                Mode::SocpRelax => {
                    let id = self
                        .skel
                        .model
                        .add_row(
                            base,
                            Sense::Le,
                            -tan.constant,
                            RowTag::SocCut { branch: b, iter: k - 1 },
                        )
                        .expect("one relaxation cut per branch and iteration");
                    self.prune_state.push((id, 0));
                    *cuts_soc += 1;
                }
                Mode::Radial | Mode::Meshed => {
                    let mut row = base;
                    row.push((v.slack.as_ref().unwrap()[b], 1.0));
                    if k == 1 {
                        let id = self
                            .skel
                            .model
                            .add_row(row, Sense::Eq, -tan.constant, RowTag::SocHyperplane(b))
                            .expect("one hyperplane per branch");
                        self.hyper_rows.push(id);
                    } else {
                        self.skel
                            .model
                            .replace_row(self.hyper_rows[b], row, -tan.constant)
                            .expect("hyperplane rows persist");
                    }
                }
            }
        }
        if self.mode == Mode::Meshed {
            for b in 0..nl {
                let br = &self.net.branches[b];
                let tan = atan2_tangent(prev.wi[b], prev.wr[b])
                    .expect("wr stays positive inside the angle box");
                let v = &self.skel.vars;
                let theta = v.theta.as_ref().unwrap();
                let r = v.slack.as_ref().unwrap()[b];
                let body = vec![
                    (theta[br.from], 1.0),
                    (theta[br.to], -1.0),
                    (v.wi[b], -tan.d_wi),
                    (v.wr[b], -tan.d_wr),
                ];
                let mut hi = body.clone();
                hi.push((r, -1.0));
                let mut lo = body;
                lo.push((r, 1.0));
                if k == 1 {
                    let hi_id = self
                        .skel
                        .model
                        .add_row(hi, Sense::Le, tan.constant, RowTag::Atan2Hi(b))
                        .expect("one atan2 pair per branch");
                    let lo_id = self
                        .skel
                        .model
                        .add_row(lo, Sense::Ge, tan.constant, RowTag::Atan2Lo(b))
                        .expect("one atan2 pair per branch");
                    self.atan_rows.push((hi_id, lo_id));
                } else {
                    let (hi_id, lo_id) = self.atan_rows[b];
                    self.skel.model.replace_row(hi_id, hi, tan.constant).unwrap();
                    self.skel.model.replace_row(lo_id, lo, tan.constant).unwrap();
                }
            }
        }
    }

    /// Registry updates after a solve: cone halfspaces where the fresh
    /// iterate left the cone boundary (anchored at the previous iterate),
    /// thermal halfspaces where loading exceeded the gate (anchored at the
    /// fresh iterate).
    fn register_cuts(
        &mut self,
        k: usize,
        prev: &Iterate,
        it: &Iterate,
        res: &Residuals,
        cuts_soc: &mut usize,
        cuts_thermal: &mut usize,
    ) {
        if self.mode != Mode::SocpRelax {
            for b in 0..self.net.n_branches() {
                if res.f[b].abs() > self.params.eps {
                    let br = &self.net.branches[b];
                    let tan = soc_tangent(prev.wr[b], prev.wi[b], prev.w[br.to])
                        .expect("previous iterate in domain");
                    let v = &self.skel.vars;
                    let row = vec![
                        (v.wr[b], tan.a[0]),
                        (v.wi[b], tan.a[1]),
                        (v.w[br.to], tan.a[2]),
                        (v.w[br.from], -1.0),
                    ];
                    let tag = RowTag::SocCut { branch: b, iter: k - 1 };
                    if self.skel.model.row_id(&tag).is_none() {
                        let id = self
                            .skel
                            .model
                            .add_row(row, Sense::Le, -tan.constant, tag)
                            .unwrap();
                        self.i_reg[b].push(k - 1);
                        self.prune_state.push((id, 0));
                        *cuts_soc += 1;
                    }
                }
            }
        }
        if self.params.thermal != ThermalMode::Mva {
            return;
        }
        for b in 0..self.net.n_branches() {
            let br = &self.net.branches[b];
            if br.s_max <= 0.0 {
                continue;
            }
            let gate = (self.params.zeta * br.s_max).powi(2);
            let v = &self.skel.vars;
            let dirs = [
                (Dir::Fwd, it.p_fwd[b], it.q_fwd[b], v.p_fwd[b], v.q_fwd[b]),
                (Dir::Rev, it.p_rev[b], it.q_rev[b], v.p_rev[b], v.q_rev[b]),
            ];
            for (dir, p, q, pv, qv) in dirs {
                if p * p + q * q > gate {
                    let Ok(cut) = thermal_halfspace(p, q, br.s_max) else {
                        continue; // flow below the degeneracy floor cannot pass the gate
                    };
                    let id = self
                        .skel
                        .model
                        .add_row(
                            vec![(pv, cut.coef_p), (qv, cut.coef_q)],
                            Sense::Le,
                            cut.rhs,
                            RowTag::ThermalCut { branch: b, dir, iter: k },
                        )
                        .expect("loading gate fires once per iteration");
                    self.t_reg[2 * b + usize::from(dir == Dir::Rev)].push(k);
                    self.prune_state.push((id, 0));
                    *cuts_thermal += 1;
                }
            }
        }
    }

    /// Terminal check of the lifted cost: when a pair's epigraph variable
    /// under-approximates the true quadratic by more than the requested
    /// accuracy, add a tangent of the true epigraph and keep iterating.
    fn refine_cost_if_needed(&mut self, sol: &LpSolution, k: usize) -> bool {
        let mut ok = true;
        let pairs = self.skel.vars.lift.pairs.clone();
        for (n, pair) in pairs.iter().enumerate() {
            let pa_var = self.skel.vars.lift.p_lift[pair.members.0];
            let pb_var = pair.members.1.and_then(|g| self.skel.vars.lift.p_lift[g]);
            let pa = pa_var.map(|v| sol.value(v)).unwrap_or(0.0);
            let pb = pb_var.map(|v| sol.value(v)).unwrap_or(0.0);
            let truth = pa * pa + pb * pb;
            let alpha = sol.value(pair.alpha);
            // relative check above the tower's accuracy floor; below it the
            // absolute objective impact is bounded by accuracy * floor
            let floor = 1e-3 * pair.scale * pair.scale;
            if truth - alpha > self.params.cost_accuracy * truth.max(floor) {
                ok = false;
                let mut row: Vec<(VarId, f64)> = vec![(pair.alpha, -1.0)];
                if let Some(v) = pa_var {
                    row.push((v, 2.0 * pa));
                }
                if let Some(v) = pb_var {
                    row.push((v, 2.0 * pb));
                }
                let _ = self
                    .skel
                    .model
                    .add_row(row, Sense::Le, truth, RowTag::CostTangent { pair: n, iter: k });
            }
        }
        ok
    }

    /// Drop accumulated halfspaces whose LP slack stayed above threshold for
    /// the configured number of consecutive iterations.
    fn prune_cuts(&mut self, sol: &LpSolution) -> usize {
        let mut pruned = 0;
        let window = self.params.prune_window;
        let model = &mut self.skel.model;
        let mut keep = Vec::with_capacity(self.prune_state.len());
        for (id, mut count) in self.prune_state.drain(..) {
            let Some(activity) = model.row_activity(id, &sol.primal) else {
                continue;
            };
            let slack = model.row_rhs(id).unwrap() - activity;
            count = if slack > 1e-6 { count + 1 } else { 0 };
            if count >= window {
                model.remove_row(id).unwrap();
                pruned += 1;
            } else {
                keep.push((id, count));
            }
        }
        self.prune_state = keep;
        pruned
    }

    fn extract_iterate(&self, sol: &LpSolution) -> Iterate {
        let v = &self.skel.vars;
        let grab = |ids: &[VarId]| ids.iter().map(|x| sol.value(*x)).collect::<Vec<f64>>();
        Iterate {
            w: grab(&v.w),
            wr: grab(&v.wr),
            wi: grab(&v.wi),
            theta: v.theta.as_deref().map(grab),
            p_fwd: grab(&v.p_fwd),
            q_fwd: grab(&v.q_fwd),
            p_rev: grab(&v.p_rev),
            q_rev: grab(&v.q_rev),
            p_g: grab(&v.p_g),
            q_g: grab(&v.q_g),
            slack: v.slack.as_deref().map(grab),
            lp_objective: sol.objective,
        }
    }

    fn rho_histogram(&self) -> Vec<usize> {
        if self.mode == Mode::SocpRelax {
            return Vec::new();
        }
        let mut hist = vec![0usize; 6];
        for &r in &self.rho {
            let level = if r <= self.rho0 {
                0
            } else {
                ((r / self.rho0).ln() / self.params.gamma.ln()).round() as usize
            };
            hist[level.min(5)] += 1;
        }
        hist
    }

    fn report(
        self,
        status: SolveStatus,
        last: Option<(Iterate, LpSolution, Residuals)>,
        t_start: Instant,
    ) -> SolveReport {
        let algorithm = match self.mode {
            Mode::SocpRelax => "socp-relaxation",
            Mode::Radial => "radial",
            Mode::Meshed => "meshed",
        };
        let (objective, primal, duals, resid) = match &last {
            None => (None, None, None, None),
            Some((it, sol, res)) => {
                let primal = PrimalSolution {
                    v: it.w.iter().map(|w| w.sqrt()).collect(),
                    theta: it.theta.clone(),
                    w: it.w.clone(),
                    wr: it.wr.clone(),
                    wi: it.wi.clone(),
                    p_from: it.p_fwd.clone(),
                    q_from: it.q_fwd.clone(),
                    p_to: it.p_rev.clone(),
                    q_to: it.q_rev.clone(),
                    p_gen: it.p_g.clone(),
                    q_gen: it.q_g.clone(),
                    slack: it.slack.clone(),
                };
                let duals = NodalDuals {
                    lam_p: (0..self.net.n_buses())
                        .map(|i| {
                            self.skel
                                .model
                                .row_id(&RowTag::NodalP(i))
                                .map(|r| sol.dual(r))
                                .unwrap_or(0.0)
                        })
                        .collect(),
                    lam_q: (0..self.net.n_buses())
                        .map(|i| {
                            self.skel
                                .model
                                .row_id(&RowTag::NodalQ(i))
                                .map(|r| sol.dual(r))
                                .unwrap_or(0.0)
                        })
                        .collect(),
                };
                (
                    Some(self.net.dispatch_cost(&it.p_g)),
                    Some(primal),
                    Some(duals),
                    Some(res.clone()),
                )
            }
        };
        let nan = f64::NAN;
        SolveReport {
            case: self.net.name.clone(),
            algorithm: algorithm.into(),
            status,
            objective,
            iterations: self.trace.len(),
            start_used: self.start_label.to_string(),
            max_f: resid.as_ref().map(|r| r.max_abs_f()).unwrap_or(nan),
            mean_f: resid.as_ref().map(|r| r.mean_abs_f()).unwrap_or(nan),
            max_g: resid.as_ref().map(|r| r.max_g()).unwrap_or(nan),
            max_h: resid.as_ref().map(|r| r.max_abs_h()).unwrap_or(nan),
            mean_h: resid.as_ref().map(|r| r.mean_abs_h()).unwrap_or(nan),
            mean_f_h: resid.as_ref().map(|r| r.mean_abs_f_h()).unwrap_or(nan),
            wall_ms: t_start.elapsed().as_secs_f64() * 1e3,
            primal,
            duals,
            trace: self.trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::RawCase;
    use crate::network::build_network;
    use approx::assert_relative_eq;

    fn net_of(text: &str) -> Network {
        build_network(&RawCase::parse(text).unwrap()).unwrap()
    }

    fn feeder3() -> Network {
        // 3-bus radial feeder with losses and a quadratic generator
        net_of(
            r#"
function mpc = feeder3
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0  0  0 0 1 1 0 135 1 1.05 0.95;
    2 1 60 20 0 0 1 1 0 135 1 1.05 0.95;
    3 1 40 15 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [
    1 2 0.02 0.06 0 0 0 0 0 0 1 -30 30;
    2 3 0.025 0.08 0 0 0 0 0 0 1 -30 30;
];
mpc.gencost = [ 2 0 0 3 0.01 25 0; ];
"#,
        )
    }

    fn ring3() -> Network {
        net_of(
            r#"
function mpc = ring3
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0  0  0 0 1 1 0 135 1 1.05 0.95;
    2 1 80 30 0 0 1 1 0 135 1 1.05 0.95;
    3 1 50 10 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.gen = [
    1 0 0 150 -150 1 100 1 250 0;
    3 0 0 100 -100 1 100 1 120 0;
];
mpc.branch = [
    1 2 0.02 0.08 0.02 120 0 0 0 0 1 -30 30;
    2 3 0.03 0.09 0.02 120 0 0 0 0 1 -30 30;
    1 3 0.02 0.07 0.02 120 0 0 0 0 1 -30 30;
];
mpc.gencost = [
    2 0 0 3 0.02 30 0;
    2 0 0 3 0.05 35 0;
];
"#,
        )
    }

    #[test]
    fn radial_driver_converges_on_feeder() {
        let net = feeder3();
        let report = run_algorithm2(&net, &SlpParams::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert!(report.max_f <= 1e-5, "max F {}", report.max_f);
        assert!(report.iterations <= 6);
        // generation covers load plus positive losses
        let p_total: f64 = report.primal.as_ref().unwrap().p_gen.iter().sum();
        assert!(p_total > 1.0 && p_total < 1.05, "dispatch {p_total}");
        let obj = report.objective.unwrap();
        assert!(obj > 25.0 * 100.0 * 0.01, "objective {obj}");
    }

    #[test]
    fn radial_driver_rejects_meshed_networks() {
        let net = ring3();
        assert!(matches!(
            run_algorithm2(&net, &SlpParams::default()),
            Err(SlpError::Network(_))
        ));
    }

    #[test]
    fn meshed_driver_converges_on_ring() {
        let net = ring3();
        let report = run_algorithm3(&net, &SlpParams::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert!(report.max_f <= 1e-5);
        assert!(report.max_h <= 1e-5);
        assert!(report.max_g <= 1e-3);
        // angles recovered in the primal block for meshed runs
        assert!(report.primal.as_ref().unwrap().theta.is_some());
    }

    #[test]
    fn relaxation_driver_objective_is_monotone() {
        let net = ring3();
        let report = run_algorithm1(&net, &SlpParams::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        for pair in report.trace.windows(2) {
            assert!(
                pair[1].lp_objective >= pair[0].lp_objective - 1e-7,
                "objective decreased: {} -> {}",
                pair[0].lp_objective,
                pair[1].lp_objective
            );
        }
        // relaxation-side convergence: no branch violates the cone outward
        assert!(report.trace.last().unwrap().min_f_signed >= -1e-5);
    }

    #[test]
    fn unconstrained_relaxation_converges_first_iteration() {
        // lossless line, no binding cone or thermal row at the LP optimum
        let net = net_of(
            r#"
function mpc = easy2
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 100 20 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.0 0.1 0.0 0 0 0 0 0 1 -30 30; ];
mpc.gencost = [ 2 0 0 3 0 20 0; ];
"#,
        );
        let report = run_algorithm1(&net, &SlpParams::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.trace[0].cuts_thermal_added, 0);
    }

    #[test]
    fn dc_fallback_switches_to_flat_start() {
        // angle box too tight for the DC model but workable for AC
        let net = net_of(
            r#"
function mpc = sadish
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 100 30 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.01 0.05 0.0 0 0 0 0 0 1 -2.5 2.5; ];
mpc.gencost = [ 2 0 0 3 0 20 0; ];
"#,
        );
        let params = SlpParams {
            start: super::super::StartStrategy::DcWarm,
            ..Default::default()
        };
        let report = run_algorithm3(&net, &params).unwrap();
        assert_eq!(report.start_used, "fs1 (dc fallback)");
        assert_eq!(report.status, SolveStatus::Converged);
    }

    #[test]
    fn traces_are_deterministic() {
        let net = ring3();
        let mut a = run_algorithm3(&net, &SlpParams::default()).unwrap();
        let mut b = run_algorithm3(&net, &SlpParams::default()).unwrap();
        for rec in a.trace.iter_mut().chain(b.trace.iter_mut()) {
            rec.wall_ms = 0.0; // wall clock is the only nondeterministic field
        }
        assert_eq!(
            serde_json::to_string(&a.trace).unwrap(),
            serde_json::to_string(&b.trace).unwrap()
        );
        assert_eq!(a.objective, b.objective);
        assert_eq!(
            serde_json::to_string(&a.primal).unwrap(),
            serde_json::to_string(&b.primal).unwrap()
        );
    }

    #[test]
    fn radial_and_meshed_agree_on_radial_networks() {
        let net = feeder3();
        // tight tolerances keep termination noise below the comparison band
        let params = SlpParams {
            eps: 1e-9,
            eps_th: 1e-9,
            ..Default::default()
        };
        let radial = run_algorithm2(&net, &params).unwrap();
        let meshed = run_algorithm3(&net, &params).unwrap();
        assert_eq!(radial.status, SolveStatus::Converged);
        assert_eq!(meshed.status, SolveStatus::Converged);
        assert_relative_eq!(
            radial.objective.unwrap(),
            meshed.objective.unwrap(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn registries_only_grow_and_penalties_are_monotone() {
        let net = ring3();
        let report = run_algorithm3(&net, &SlpParams::default()).unwrap();
        // cumulative cut counts never shrink (pruning off)
        let mut total = 0usize;
        for rec in &report.trace {
            assert_eq!(rec.cuts_pruned, 0);
            total += rec.cuts_soc_added + rec.cuts_thermal_added;
        }
        let _ = total;
        // penalty histogram mass never moves to lower levels
        let mass =
            |h: &[usize]| -> Vec<usize> { h.iter().rev().scan(0, |acc, x| { *acc += x; Some(*acc) }).collect() };
        for pair in report.trace.windows(2) {
            if pair[0].rho_histogram.is_empty() {
                continue;
            }
            for (a, b) in mass(&pair[0].rho_histogram).iter().zip(mass(&pair[1].rho_histogram)) {
                assert!(b >= *a);
            }
        }
    }

    #[test]
    fn thermal_cuts_fire_on_congested_branch() {
        let mut net = ring3();
        // tighten one rating so the gate must fire
        net.branches[0].s_max = 0.55;
        let report = run_algorithm3(&net, &SlpParams::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert!(report.max_g <= 1e-3);
        let fired: usize = report.trace.iter().map(|r| r.cuts_thermal_added).sum();
        assert!(fired > 0, "expected thermal cuts on the congested ring");
    }
}
