//! Per-unit network model built from a raw case: buses, branches with derived
//! flow coefficients, generators with pu-rescaled costs, topology class.
//!
//! A branch is modeled by its two-port admittances. With series admittance
//! `y`, total charging susceptance `b_ch` and complex tap `t = tau e^{i shift}`
//! on the from side,
//!
//! ```text
//!   Yff = (y + i b_ch/2) / tau^2     Yft = -y / conj(t)
//!   Ytf = -y / t                     Ytt =  y + i b_ch/2
//! ```
//!
//! and the directed flows are linear in (w_i, wr, wi):
//!
//! ```text
//!   p_ij = g_c w_i - g wr + b wi        q_ij = b_c w_i - b wr - g wi
//! ```
//!
//! with one (g_c, b_c, g, b) tuple per direction. The same two-port view
//! yields the linear squared-current expression used for current limits.

use crate::case_io::{cols, RawCase};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default angle-difference box when the case marks the bounds unbounded.
pub const DEFAULT_ANGLE_BOUND: f64 = std::f64::consts::FRAC_PI_3;
/// Widest angle-difference box accepted by the formulation.
const MAX_ANGLE_BOUND: f64 = 1.4;

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("network is disconnected ({0} buses unreachable from the reference)")]
    Disconnected(usize),
    #[error("no in-service reference bus")]
    NoReferenceBus,
    #[error("bus {0} has non-positive voltage lower bound {1}")]
    NonPositiveVoltageLowerBound(i64, f64),
    #[error("bus {0}: voltage bounds inverted ({1} > {2})")]
    InvertedVoltageBounds(i64, f64, f64),
    #[error("branch {0}: non-positive tap ratio {1}")]
    NonPositiveTap(usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Radial,
    Meshed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    /// External (case file) bus id.
    pub id: i64,
    pub p_d: f64,
    pub q_d: f64,
    pub g_sh: f64,
    pub b_sh: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub is_ref: bool,
}

/// Coefficients (g_c, b_c, g, b) of one flow direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowCoeffs {
    pub g_c: f64,
    pub b_c: f64,
    pub g: f64,
    pub b: f64,
}

/// Row coefficients of the squared current magnitude in one direction:
/// `l = a_wf * w_from + a_wt * w_to + a_wr * wr + a_wi * wi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentCoeffs {
    pub a_wf: f64,
    pub a_wt: f64,
    pub a_wr: f64,
    pub a_wi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    /// Internal from/to bus indices.
    pub from: usize,
    pub to: usize,
    /// Discriminator for parallel branches on the same bus pair.
    pub idx: usize,
    #[serde(with = "complex_serde")]
    pub y_series: Complex64,
    pub b_ch: f64,
    pub tau: f64,
    pub theta_shift: f64,
    /// Apparent-power rating (pu); 0 means unlimited.
    pub s_max: f64,
    /// Optional current rating (pu).
    pub i_max: Option<f64>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub coeff_fwd: FlowCoeffs,
    pub coeff_rev: FlowCoeffs,
    pub cur_fwd: CurrentCoeffs,
    pub cur_rev: CurrentCoeffs,
}

impl Branch {
    /// Directed flows (p_ij, q_ij, p_ji, q_ji) for given (w_i, w_j, wr, wi).
    pub fn flows(&self, w_i: f64, w_j: f64, wr: f64, wi: f64) -> (f64, f64, f64, f64) {
        let f = &self.coeff_fwd;
        let r = &self.coeff_rev;
        (
            f.g_c * w_i - f.g * wr + f.b * wi,
            f.b_c * w_i - f.b * wr - f.g * wi,
            r.g_c * w_j - r.g * wr - r.b * wi,
            r.b_c * w_j - r.b * wr + r.g * wi,
        )
    }

    /// Squared current magnitudes (l_ij, l_ji).
    pub fn currents_sq(&self, w_i: f64, w_j: f64, wr: f64, wi: f64) -> (f64, f64) {
        let cf = &self.cur_fwd;
        let cr = &self.cur_rev;
        (
            cf.a_wf * w_i + cf.a_wt * w_j + cf.a_wr * wr + cf.a_wi * wi,
            cr.a_wf * w_i + cr.a_wt * w_j + cr.a_wr * wr + cr.a_wi * wi,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    /// Internal bus index.
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Cost coefficients on pu power: cost = c2 p^2 + c1 p + c0 in $/h.
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub topology: Topology,
    pub ref_bus: usize,
    /// Generators attached to each bus.
    pub gens_at: Vec<Vec<usize>>,
    /// Directed branch incidence per bus: (branch index, true if bus is the from side).
    pub incidence: Vec<Vec<(usize, bool)>>,
}

impl Network {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }
    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }
    pub fn n_gens(&self) -> usize {
        self.generators.len()
    }

    /// True quadratic generation cost in $/h for a pu dispatch vector.
    pub fn dispatch_cost(&self, p_g: &[f64]) -> f64 {
        self.generators
            .iter()
            .zip(p_g)
            .map(|(g, &p)| g.c2 * p * p + g.c1 * p + g.c0)
            .sum()
    }
}

/// Two-port admittances (Yff, Yft, Ytf, Ytt) of a branch.
pub fn two_port(
    y_series: Complex64,
    b_ch: f64,
    tau: f64,
    theta_shift: f64,
) -> (Complex64, Complex64, Complex64, Complex64) {
    let t = Complex64::from_polar(tau, theta_shift);
    let y_sh = y_series + Complex64::new(0.0, 0.5 * b_ch);
    (y_sh / (tau * tau), -y_series / t.conj(), -y_series / t, y_sh)
}

/// Derived flow coefficients for both directions.
pub fn branch_coefficients(
    y_series: Complex64,
    b_ch: f64,
    tau: f64,
    theta_shift: f64,
) -> (FlowCoeffs, FlowCoeffs) {
    let (yff, yft, ytf, ytt) = two_port(y_series, b_ch, tau, theta_shift);
    let fwd = FlowCoeffs {
        g_c: yff.re,
        b_c: -yff.im,
        g: -yft.conj().re,
        b: -yft.conj().im,
    };
    let rev = FlowCoeffs {
        g_c: ytt.re,
        b_c: -ytt.im,
        g: -ytf.conj().re,
        b: -ytf.conj().im,
    };
    (fwd, rev)
}

/// Row coefficients of the squared branch currents in both directions.
pub fn current_coefficients(
    y_series: Complex64,
    b_ch: f64,
    tau: f64,
    theta_shift: f64,
) -> (CurrentCoeffs, CurrentCoeffs) {
    let (yff, yft, ytf, ytt) = two_port(y_series, b_ch, tau, theta_shift);
    let cross_f = yff * yft.conj();
    let cross_r = ytt * ytf.conj();
    let fwd = CurrentCoeffs {
        a_wf: yff.norm_sqr(),
        a_wt: yft.norm_sqr(),
        a_wr: 2.0 * cross_f.re,
        a_wi: -2.0 * cross_f.im,
    };
    let rev = CurrentCoeffs {
        a_wf: ytf.norm_sqr(),
        a_wt: ytt.norm_sqr(),
        a_wr: 2.0 * cross_r.re,
        a_wi: 2.0 * cross_r.im,
    };
    (fwd, rev)
}

/// Variable box for `wr` implied by voltage and angle bounds.
pub fn wr_bounds(bi: &Bus, bj: &Bus, theta_min: f64, theta_max: f64) -> (f64, f64) {
    let cos_min = theta_min.cos().min(theta_max.cos());
    let cos_max = if theta_min <= 0.0 && 0.0 <= theta_max {
        1.0
    } else {
        theta_min.cos().max(theta_max.cos())
    };
    (
        bi.v_min * bj.v_min * cos_min,
        bi.v_max * bj.v_max * cos_max,
    )
}

/// Variable box for `wi` implied by voltage and angle bounds.
pub fn wi_bounds(bi: &Bus, bj: &Bus, theta_min: f64, theta_max: f64) -> (f64, f64) {
    let s_min = theta_min.sin();
    let s_max = theta_max.sin();
    let lo = if s_min < 0.0 {
        bi.v_max * bj.v_max * s_min
    } else {
        bi.v_min * bj.v_min * s_min
    };
    let hi = if s_max > 0.0 {
        bi.v_max * bj.v_max * s_max
    } else {
        bi.v_min * bj.v_min * s_max
    };
    (lo, hi)
}

/// Build the immutable per-unit network from a validated raw case.
pub fn build_network(case: &RawCase) -> Result<Network, NetworkError> {
    let base = case.base_mva;

    // In-service buses (type 4 rows are isolated and dropped).
    let mut buses = Vec::new();
    let mut index_of = std::collections::BTreeMap::new();
    let mut ref_bus = None;
    for row in &case.bus {
        let bus_type = row[cols::BUS_TYPE] as i64;
        if bus_type == 4 {
            continue;
        }
        let id = row[cols::BUS_I] as i64;
        let v_min = row[cols::VMIN];
        let v_max = row[cols::VMAX];
        if v_min <= 0.0 {
            return Err(NetworkError::NonPositiveVoltageLowerBound(id, v_min));
        }
        if v_min > v_max {
            return Err(NetworkError::InvertedVoltageBounds(id, v_min, v_max));
        }
        let is_ref = bus_type == 3;
        if is_ref {
            ref_bus = Some(buses.len());
        }
        index_of.insert(id, buses.len());
        buses.push(Bus {
            id,
            p_d: row[cols::PD] / base,
            q_d: row[cols::QD] / base,
            g_sh: row[cols::GS] / base,
            b_sh: row[cols::BS] / base,
            v_min,
            v_max,
            is_ref,
        });
    }
    let ref_bus = ref_bus.ok_or(NetworkError::NoReferenceBus)?;

    let mut branches = Vec::new();
    let mut pair_count = std::collections::HashMap::new();
    for (r, row) in case.branch.iter().enumerate() {
        if row[cols::BR_STATUS] == 0.0 {
            continue;
        }
        let from = index_of[&(row[cols::F_BUS] as i64)];
        let to = index_of[&(row[cols::T_BUS] as i64)];
        let tau = if row[cols::TAP] == 0.0 { 1.0 } else { row[cols::TAP] };
        if tau <= 0.0 {
            return Err(NetworkError::NonPositiveTap(r, tau));
        }
        let z = Complex64::new(row[cols::BR_R], row[cols::BR_X]);
        let y_series = z.inv();
        let b_ch = row[cols::BR_B];
        let shift = row[cols::SHIFT].to_radians();
        let (theta_min, theta_max) = angle_box(row[cols::ANGMIN], row[cols::ANGMAX]);
        let s_max = row[cols::RATE_A] / base;
        let (coeff_fwd, coeff_rev) = branch_coefficients(y_series, b_ch, tau, shift);
        let (cur_fwd, cur_rev) = current_coefficients(y_series, b_ch, tau, shift);
        let idx = {
            let key = (from.min(to), from.max(to));
            let c = pair_count.entry(key).or_insert(0usize);
            let idx = *c;
            *c += 1;
            idx
        };
        branches.push(Branch {
            from,
            to,
            idx,
            y_series,
            b_ch,
            tau,
            theta_shift: shift,
            s_max,
            i_max: if s_max > 0.0 { Some(s_max) } else { None },
            theta_min,
            theta_max,
            coeff_fwd,
            coeff_rev,
            cur_fwd,
            cur_rev,
        });
    }

    let mut generators = Vec::new();
    for (g, row) in case.gen.iter().enumerate() {
        if row[cols::GEN_STATUS] <= 0.0 {
            continue;
        }
        let (c2, c1, c0) = case.cost_coefficients(g);
        generators.push(Generator {
            bus: index_of[&(row[cols::GEN_BUS] as i64)],
            p_min: row[cols::PMIN] / base,
            p_max: row[cols::PMAX] / base,
            q_min: row[cols::QMIN] / base,
            q_max: row[cols::QMAX] / base,
            c2: c2 * base * base,
            c1: c1 * base,
            c0,
        });
    }

    let n = buses.len();
    let mut incidence = vec![Vec::new(); n];
    for (b, br) in branches.iter().enumerate() {
        incidence[br.from].push((b, true));
        incidence[br.to].push((b, false));
    }
    let mut gens_at = vec![Vec::new(); n];
    for (g, gen) in generators.iter().enumerate() {
        gens_at[gen.bus].push(g);
    }

    let unreachable = count_unreachable(n, ref_bus, &incidence, &branches);
    if unreachable > 0 {
        return Err(NetworkError::Disconnected(unreachable));
    }
    let topology = classify_topology(n, &branches);

    Ok(Network {
        name: case.name.clone(),
        base_mva: base,
        buses,
        branches,
        generators,
        topology,
        ref_bus,
        gens_at,
        incidence,
    })
}

fn angle_box(angmin_deg: f64, angmax_deg: f64) -> (f64, f64) {
    let unbounded = (angmin_deg == 0.0 && angmax_deg == 0.0)
        || angmin_deg <= -180.0
        || angmax_deg >= 180.0;
    if unbounded {
        return (-DEFAULT_ANGLE_BOUND, DEFAULT_ANGLE_BOUND);
    }
    let lo = angmin_deg.to_radians().clamp(-MAX_ANGLE_BOUND, MAX_ANGLE_BOUND);
    let hi = angmax_deg.to_radians().clamp(lo, MAX_ANGLE_BOUND);
    (lo, hi)
}

fn count_unreachable(
    n: usize,
    start: usize,
    incidence: &[Vec<(usize, bool)>],
    branches: &[Branch],
) -> usize {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for &(b, is_from) in &incidence[i] {
            let other = if is_from { branches[b].to } else { branches[b].from };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    seen.iter().filter(|s| !**s).count()
}

/// Cycle detection by union-find over in-service branches.
fn classify_topology(n: usize, branches: &[Branch]) -> Topology {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for br in branches {
        let a = find(&mut parent, br.from);
        let b = find(&mut parent, br.to);
        if a == b {
            return Topology::Meshed;
        }
        parent[a] = b;
    }
    Topology::Radial
}

mod complex_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        (c.re, c.im).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
