//! Sequential-LP drivers: parameters, iterates, residual families,
//! starting-point strategies and the penalty schedule.

mod driver;
pub mod toy2d;

pub use driver::{
    run_algorithm1, run_algorithm1_with, run_algorithm2, run_algorithm2_with, run_algorithm3,
    run_algorithm3_with, solve_auto,
};

use crate::formulation::{dc_opf, DcError, ThermalMode};
use crate::lp::LpBackend;
use crate::network::Network;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SlpError {
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("{0}")]
    Network(String),
    #[error("LP backend error: {0}")]
    Lp(#[from] crate::lp::LpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StartStrategy {
    /// Flat start, v = 1, theta = 0.
    Fs1,
    /// Flat start at the voltage lower bounds.
    Fs2,
    /// Flat start at the voltage upper bounds.
    Fs3,
    /// DC warm start; falls back to Fs1 when the DC OPF is infeasible.
    DcWarm,
    /// v ~ U(v_min, v_max) per bus, theta = 0, reproducible by seed.
    Random(u64),
    /// Explicit (v, theta).
    Given(Vec<f64>, Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlpParams {
    /// Cone / atan2 residual tolerance.
    pub eps: f64,
    /// Thermal residual tolerance.
    pub eps_th: f64,
    /// Loading gate for thermal cut generation, in (0, 1).
    pub zeta: f64,
    /// Initial penalty weight; None derives 10 * max(c2, c1) over generators
    /// (pu-rescaled coefficients).
    pub rho0: Option<f64>,
    /// Penalty growth factor.
    pub gamma: f64,
    /// Penalty cap as a multiple of rho0 (gamma^4 by default).
    pub rho_max_factor: f64,
    /// Iteration cap (number of LP solves).
    pub k_max: usize,
    pub start: StartStrategy,
    /// Drop halfspaces that stayed slack for `prune_window` iterations.
    pub prune: bool,
    pub prune_window: usize,
    pub cost_accuracy: f64,
    pub thermal: ThermalMode,
}

impl Default for SlpParams {
    fn default() -> Self {
        SlpParams {
            eps: 1e-5,
            eps_th: 1e-3,
            zeta: 0.9,
            rho0: None,
            gamma: 5.0,
            rho_max_factor: 625.0,
            k_max: 50,
            start: StartStrategy::Fs1,
            prune: false,
            prune_window: 3,
            cost_accuracy: 1e-5,
            thermal: ThermalMode::Mva,
        }
    }
}

impl SlpParams {
    pub fn validate(&self) -> Result<(), SlpError> {
        let in_range = |v: f64| (1e-10..=1e-3).contains(&v);
        if !in_range(self.eps) {
            return Err(SlpError::BadParameter(format!("eps = {}", self.eps)));
        }
        if !in_range(self.eps_th) {
            return Err(SlpError::BadParameter(format!("eps_th = {}", self.eps_th)));
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(SlpError::BadParameter(format!("zeta = {}", self.zeta)));
        }
        if self.gamma <= 1.0 {
            return Err(SlpError::BadParameter(format!("gamma = {}", self.gamma)));
        }
        if let Some(r) = self.rho0 {
            if r <= 0.0 {
                return Err(SlpError::BadParameter(format!("rho0 = {r}")));
            }
        }
        if self.rho_max_factor < 1.0 {
            return Err(SlpError::BadParameter(format!(
                "rho_max_factor = {}",
                self.rho_max_factor
            )));
        }
        if self.k_max == 0 {
            return Err(SlpError::BadParameter("k_max = 0".into()));
        }
        Ok(())
    }

    /// Initial penalty weight for a network.
    pub fn rho0_for(&self, net: &Network) -> f64 {
        self.rho0.unwrap_or_else(|| {
            let m = net
                .generators
                .iter()
                .map(|g| g.c2.max(g.c1))
                .fold(0.0f64, f64::max);
            10.0 * m.max(1.0)
        })
    }
}

/// Values of one SLP iterate, extracted from an LP solution or derived from
/// a starting voltage profile.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub w: Vec<f64>,
    pub wr: Vec<f64>,
    pub wi: Vec<f64>,
    pub theta: Option<Vec<f64>>,
    pub p_fwd: Vec<f64>,
    pub q_fwd: Vec<f64>,
    pub p_rev: Vec<f64>,
    pub q_rev: Vec<f64>,
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    pub slack: Option<Vec<f64>>,
    pub lp_objective: f64,
}

/// Residual families: F over branches, G over rated directed branches,
/// H over branches when angles are modeled.
#[derive(Debug, Clone)]
pub struct Residuals {
    pub f: Vec<f64>,
    pub g_fwd: Vec<Option<f64>>,
    pub g_rev: Vec<Option<f64>>,
    pub h: Option<Vec<f64>>,
}

impl Residuals {
    pub fn max_abs_f(&self) -> f64 {
        self.f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
    pub fn min_signed_f(&self) -> f64 {
        self.f.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }
    pub fn mean_abs_f(&self) -> f64 {
        if self.f.is_empty() {
            0.0
        } else {
            self.f.iter().map(|v| v.abs()).sum::<f64>() / self.f.len() as f64
        }
    }
    pub fn max_g(&self) -> f64 {
        self.g_fwd
            .iter()
            .chain(self.g_rev.iter())
            .flatten()
            .fold(f64::NEG_INFINITY, |m, v| m.max(*v))
            .max(0.0)
    }
    pub fn max_abs_h(&self) -> f64 {
        self.h
            .as_ref()
            .map(|h| h.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(0.0)
    }
    pub fn mean_abs_h(&self) -> f64 {
        match &self.h {
            Some(h) if !h.is_empty() => h.iter().map(|v| v.abs()).sum::<f64>() / h.len() as f64,
            _ => 0.0,
        }
    }
    /// Arithmetic mean of |F| and |H| over the concatenated vectors.
    pub fn mean_abs_f_h(&self) -> f64 {
        let mut sum: f64 = self.f.iter().map(|v| v.abs()).sum();
        let mut n = self.f.len();
        if let Some(h) = &self.h {
            sum += h.iter().map(|v| v.abs()).sum::<f64>();
            n += h.len();
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

/// Residual families of an iterate against the original constraints.
pub fn residuals(net: &Network, it: &Iterate) -> Residuals {
    let mut f = Vec::with_capacity(net.n_branches());
    let mut g_fwd = Vec::with_capacity(net.n_branches());
    let mut g_rev = Vec::with_capacity(net.n_branches());
    let mut h = it.theta.as_ref().map(|_| Vec::with_capacity(net.n_branches()));
    for (b, br) in net.branches.iter().enumerate() {
        let (wr, wi) = (it.wr[b], it.wi[b]);
        f.push(it.w[br.from] - (wr * wr + wi * wi) / it.w[br.to]);
        if br.s_max > 0.0 {
            let s2 = br.s_max * br.s_max;
            g_fwd.push(Some(it.p_fwd[b] * it.p_fwd[b] + it.q_fwd[b] * it.q_fwd[b] - s2));
            g_rev.push(Some(it.p_rev[b] * it.p_rev[b] + it.q_rev[b] * it.q_rev[b] - s2));
        } else {
            g_fwd.push(None);
            g_rev.push(None);
        }
        if let (Some(h), Some(theta)) = (h.as_mut(), it.theta.as_ref()) {
            h.push(theta[br.from] - theta[br.to] - wi.atan2(wr));
        }
    }
    Residuals { f, g_fwd, g_rev, h }
}

/// Starting voltage profile and the strategy actually used (after fallback).
#[derive(Debug, Clone)]
pub struct StartingPoint {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub label: &'static str,
}

/// Resolve a starting strategy into a voltage profile within bounds.
pub fn starting_point(
    net: &Network,
    strategy: &StartStrategy,
    backend: &dyn LpBackend,
) -> StartingPoint {
    let nb = net.n_buses();
    match strategy {
        StartStrategy::Fs1 => StartingPoint {
            v: net.buses.iter().map(|b| 1.0f64.clamp(b.v_min, b.v_max)).collect(),
            theta: vec![0.0; nb],
            label: "fs1",
        },
        StartStrategy::Fs2 => StartingPoint {
            v: net.buses.iter().map(|b| b.v_min).collect(),
            theta: vec![0.0; nb],
            label: "fs2",
        },
        StartStrategy::Fs3 => StartingPoint {
            v: net.buses.iter().map(|b| b.v_max).collect(),
            theta: vec![0.0; nb],
            label: "fs3",
        },
        StartStrategy::Random(seed) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            StartingPoint {
                v: net
                    .buses
                    .iter()
                    .map(|b| rng.gen_range(b.v_min..b.v_max))
                    .collect(),
                theta: vec![0.0; nb],
                label: "random",
            }
        }
        StartStrategy::Given(v, theta) => StartingPoint {
            v: v.clone(),
            theta: theta.clone(),
            label: "given",
        },
        StartStrategy::DcWarm => match dc_opf(net, backend) {
            Ok(dc) => StartingPoint {
                v: net.buses.iter().map(|b| 1.0f64.clamp(b.v_min, b.v_max)).collect(),
                theta: dc.theta,
                label: "dc",
            },
            // infeasible DC models fall back to the flat start
            Err(DcError::Infeasible) | Err(DcError::Failed(_)) => {
                let mut sp = starting_point(net, &StartStrategy::Fs1, backend);
                sp.label = "fs1 (dc fallback)";
                sp
            }
        },
    }
}

/// Derive the initial iterate from a voltage profile: w from the defining
/// substitution, flows from the branch-flow definitions.
pub fn initial_iterate(net: &Network, sp: &StartingPoint, with_theta: bool) -> Iterate {
    let _nb = net.n_buses();
    let nl = net.n_branches();
    let w: Vec<f64> = sp.v.iter().map(|v| v * v).collect();
    let mut wr = Vec::with_capacity(nl);
    let mut wi = Vec::with_capacity(nl);
    let mut p_fwd = vec![0.0; nl];
    let mut q_fwd = vec![0.0; nl];
    let mut p_rev = vec![0.0; nl];
    let mut q_rev = vec![0.0; nl];
    for (b, br) in net.branches.iter().enumerate() {
        let dth = sp.theta[br.from] - sp.theta[br.to];
        let prod = sp.v[br.from] * sp.v[br.to];
        wr.push(prod * dth.cos());
        wi.push(prod * dth.sin());
        let (pf, qf, pr, qr) = br.flows(w[br.from], w[br.to], wr[b], wi[b]);
        p_fwd[b] = pf;
        q_fwd[b] = qf;
        p_rev[b] = pr;
        q_rev[b] = qr;
    }
    Iterate {
        w,
        wr,
        wi,
        theta: with_theta.then(|| sp.theta.clone()),
        p_fwd,
        q_fwd,
        p_rev,
        q_rev,
        p_g: vec![0.0; net.n_gens()],
        q_g: vec![0.0; net.n_gens()],
        slack: None,
        lp_objective: f64::NAN,
    }
}

/// Per-branch penalty update: grow by gamma where the slack stayed active,
/// capped at rho_max.
pub fn penalty_update(rho: &mut [f64], slack: &[f64], eps: f64, gamma: f64, rho_max: f64) {
    for (r, s) in rho.iter_mut().zip(slack) {
        if *s >= eps {
            *r = (*r * gamma).min(rho_max);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::RawCase;
    use crate::lp::ClarabelBackend;
    use crate::network::build_network;
    use approx::assert_relative_eq;

    fn small_net() -> Network {
        build_network(
            &RawCase::parse(
                r#"
function mpc = s2
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 100 20 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.0 0.1 0.0 0 0 0 0 0 1 -30 30; ];
mpc.gencost = [ 2 0 0 3 0 20 0; ];
"#,
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn fs_profiles() {
        let net = small_net();
        let be = ClarabelBackend::default();
        let fs1 = starting_point(&net, &StartStrategy::Fs1, &be);
        assert_eq!(fs1.v, vec![1.0, 1.0]);
        let fs2 = starting_point(&net, &StartStrategy::Fs2, &be);
        assert_eq!(fs2.v, vec![0.9, 0.9]);
        let fs3 = starting_point(&net, &StartStrategy::Fs3, &be);
        assert_eq!(fs3.v, vec![1.1, 1.1]);
    }

    #[test]
    fn flat_start_lifts_to_unit_w() {
        let net = small_net();
        let be = ClarabelBackend::default();
        let sp = starting_point(&net, &StartStrategy::Fs1, &be);
        let it = initial_iterate(&net, &sp, false);
        assert_eq!(it.w, vec![1.0, 1.0]);
        assert_eq!(it.wr, vec![1.0]);
        assert_eq!(it.wi, vec![0.0]);
        // consistent start has zero cone residual
        let r = residuals(&net, &it);
        assert_relative_eq!(r.max_abs_f(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn random_start_is_reproducible_and_in_bounds() {
        let net = small_net();
        let be = ClarabelBackend::default();
        let a = starting_point(&net, &StartStrategy::Random(7), &be);
        let b = starting_point(&net, &StartStrategy::Random(7), &be);
        assert_eq!(a.v, b.v);
        for (v, bus) in a.v.iter().zip(&net.buses) {
            assert!(*v >= bus.v_min && *v <= bus.v_max);
        }
        let c = starting_point(&net, &StartStrategy::Random(8), &be);
        assert_ne!(a.v, c.v);
    }

    #[test]
    fn dc_warm_start_matches_hand_solution() {
        let net = small_net();
        let be = ClarabelBackend::default();
        let sp = starting_point(&net, &StartStrategy::DcWarm, &be);
        assert_eq!(sp.label, "dc");
        assert_relative_eq!(sp.theta[1], -0.1, epsilon = 1e-6);
        let it = initial_iterate(&net, &sp, true);
        // theta_1 - theta_2 = +0.1, so wi = v1 v2 sin(+0.1)
        assert_relative_eq!(it.wi[0], (0.1f64).sin(), epsilon = 1e-6);
        // warm start satisfies the atan2 identity exactly
        let r = residuals(&net, &it);
        assert_relative_eq!(r.max_abs_h(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_arithmetic() {
        let net = small_net();
        let be = ClarabelBackend::default();
        let sp = starting_point(&net, &StartStrategy::Fs1, &be);
        let mut it = initial_iterate(&net, &sp, false);
        // exact cone point: w_i w_j = wr^2 + wi^2
        it.w = vec![1.21, 1.0];
        it.wr = vec![1.1];
        it.wi = vec![0.0];
        let r = residuals(&net, &it);
        assert_relative_eq!(r.f[0], 0.0, epsilon = 1e-12);
        it.w[0] = 1.22;
        let r = residuals(&net, &it);
        assert_relative_eq!(r.f[0], 0.01, epsilon = 1e-12);
    }

    #[test]
    fn thermal_residual_on_the_circle_is_zero() {
        let mut net = small_net();
        net.branches[0].s_max = 1.0;
        let be = ClarabelBackend::default();
        let sp = starting_point(&net, &StartStrategy::Fs1, &be);
        let mut it = initial_iterate(&net, &sp, false);
        it.p_fwd = vec![0.6];
        it.q_fwd = vec![0.8];
        let r = residuals(&net, &it);
        assert_relative_eq!(r.g_fwd[0].unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn penalty_schedule_grows_and_caps() {
        let mut rho = vec![10.0, 10.0, 625.0 * 10.0];
        penalty_update(&mut rho, &[0.0, 1e-3, 1e-3], 1e-5, 5.0, 6250.0);
        assert_eq!(rho, vec![10.0, 50.0, 6250.0]);
        // three consecutive violations: gamma^3 growth
        let mut rho = vec![10.0];
        for _ in 0..3 {
            penalty_update(&mut rho, &[1.0], 1e-5, 5.0, 1e9);
        }
        assert_relative_eq!(rho[0], 1250.0);
    }

    #[test]
    fn params_validation() {
        let mut p = SlpParams::default();
        assert!(p.validate().is_ok());
        p.eps = 1e-2;
        assert!(p.validate().is_err());
        p.eps = 1e-5;
        p.zeta = 1.5;
        assert!(p.validate().is_err());
        p.zeta = 0.9;
        p.gamma = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rho0_default_tracks_cost_scale() {
        let net = small_net(); // c1 = 20 $/MWh -> 2000 pu-based
        let p = SlpParams::default();
        assert_relative_eq!(p.rho0_for(&net), 20_000.0);
        let explicit = SlpParams {
            rho0: Some(42.0),
            ..Default::default()
        };
        assert_relative_eq!(explicit.rho0_for(&net), 42.0);
    }
}
