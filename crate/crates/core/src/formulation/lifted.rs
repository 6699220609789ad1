//! Lifted polyhedral approximation of the quadratic cost terms.
//!
//! Each quadratic generator contributes a scaled variable
//! `p_lift = sqrt(c2) * p_g`; consecutive lifted variables are paired and
//! each pair (pa, pb) gets an epigraph variable `alpha >= pa^2 + pb^2`,
//! represented by the cone identity
//!
//! ```text
//!   pa^2 + pb^2 <= alpha   <=>   ||(pa/s, pb/s, (alpha/s^2 - 1)/2)|| <= (alpha/s^2 + 1)/2
//! ```
//!
//! whose 3-d second-order cones are outer-approximated by tower-of-variables
//! polyhedra. The tower depth is chosen from the requested relative accuracy;
//! an odd generator count leaves the second pair slot empty (a fixed zero).

use crate::lp::{LpModel, RowTag, Sense, VarId};
use crate::network::Generator;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftPair {
    /// Generator indices feeding this pair (second slot empty for odd counts).
    pub members: (usize, Option<usize>),
    pub alpha: VarId,
    pub scale: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostLift {
    /// Lift variable per generator; None when c2 = 0.
    pub p_lift: Vec<Option<VarId>>,
    pub pairs: Vec<LiftPair>,
    pub depth: usize,
}

/// Tower depth needed for a per-tower cone accuracy compatible with the
/// requested relative cost accuracy on the generator box.
pub fn btn_depth(accuracy: f64) -> usize {
    let per_tower = (0.5e-3 * accuracy).max(1e-13);
    for depth in 4..=24 {
        let angle = std::f64::consts::PI / f64::powi(2.0, depth as i32 + 1);
        if 1.0 / angle.cos() - 1.0 <= per_tower {
            return depth;
        }
    }
    24
}

/// Cone accuracy of a tower of the given depth: points admitted by the
/// polyhedron satisfy ||(x,y)|| <= (1 + delta) t.
pub fn btn_accuracy(depth: usize) -> f64 {
    let angle = std::f64::consts::PI / f64::powi(2.0, depth as i32 + 1);
    1.0 / angle.cos() - 1.0
}

/// Affine expression over model variables.
type Affine = (Vec<(VarId, f64)>, f64);

fn combine(ca: f64, a: &Affine, cb: f64, b: &Affine) -> Affine {
    let mut terms = Vec::with_capacity(a.0.len() + b.0.len());
    for (v, c) in &a.0 {
        terms.push((*v, ca * c));
    }
    for (v, c) in &b.0 {
        terms.push((*v, cb * c));
    }
    (terms, ca * a.1 + cb * b.1)
}

/// Install rows for `t >= ||(x, y)||` where x, y, t are affine expressions.
/// Returns the number of rows added.
fn install_tower(
    model: &mut LpModel,
    pair: usize,
    serial: &mut usize,
    x: Affine,
    y: Affine,
    t: Affine,
    depth: usize,
) {
    let tag = |serial: &mut usize| {
        let s = *serial;
        *serial += 1;
        RowTag::Lift { pair, serial: s }
    };
    let add = |model: &mut LpModel, mut lhs: Affine, sense: Sense, serial: &mut usize| {
        let rhs = -lhs.1;
        lhs.0.retain(|(_, c)| *c != 0.0);
        model
            .add_row(lhs.0, sense, rhs, tag(serial))
            .expect("lift tags are generated uniquely");
    };

    let xi0 = model.add_var(format!("lift{pair}_xi0"), 0.0, f64::INFINITY);
    let eta0 = model.add_var(format!("lift{pair}_eta0"), 0.0, f64::INFINITY);
    let unit = |v: VarId| -> Affine { (vec![(v, 1.0)], 0.0) };

    // xi0 >= |x|, eta0 >= |y|
    add(model, combine(1.0, &unit(xi0), -1.0, &x), Sense::Ge, serial);
    add(model, combine(1.0, &unit(xi0), 1.0, &x), Sense::Ge, serial);
    add(model, combine(1.0, &unit(eta0), -1.0, &y), Sense::Ge, serial);
    add(model, combine(1.0, &unit(eta0), 1.0, &y), Sense::Ge, serial);

    let (mut xi, mut eta) = (xi0, eta0);
    for j in 1..=depth {
        let angle = std::f64::consts::PI / f64::powi(2.0, j as i32 + 1);
        let (c, s) = (angle.cos(), angle.sin());
        let xi_j = model.add_var(format!("lift{pair}_xi{j}"), 0.0, f64::INFINITY);
        let eta_j = model.add_var(format!("lift{pair}_eta{j}"), 0.0, f64::INFINITY);
        // xi_j = c xi + s eta
        add(
            model,
            (vec![(xi_j, 1.0), (xi, -c), (eta, -s)], 0.0),
            Sense::Eq,
            serial,
        );
        // eta_j >= |-s xi + c eta|
        add(
            model,
            (vec![(eta_j, 1.0), (xi, -s), (eta, c)], 0.0),
            Sense::Ge,
            serial,
        );
        add(
            model,
            (vec![(eta_j, 1.0), (xi, s), (eta, -c)], 0.0),
            Sense::Ge,
            serial,
        );
        xi = xi_j;
        eta = eta_j;
    }
    // closing: xi_d <= t, eta_d <= tan(pi/2^(d+1)) xi_d
    add(model, combine(1.0, &t, -1.0, &unit(xi)), Sense::Ge, serial);
    let tan = (std::f64::consts::PI / f64::powi(2.0, depth as i32 + 1)).tan();
    add(
        model,
        (vec![(xi, tan), (eta, -1.0)], 0.0),
        Sense::Ge,
        serial,
    );
}

/// Install the epigraph polyhedron for one pair: `alpha >= xa^2 + xb^2`,
/// accurate on |xa|, |xb| <= scale.
pub fn install_pair(
    model: &mut LpModel,
    pair: usize,
    xa: Option<VarId>,
    xb: Option<VarId>,
    alpha: VarId,
    scale: f64,
    depth: usize,
) {
    let s = scale.max(1e-6);
    let mut serial = 0usize;
    let affine_of = |v: Option<VarId>, c: f64| -> Affine {
        match v {
            Some(v) => (vec![(v, c)], 0.0),
            None => (Vec::new(), 0.0),
        }
    };
    // u >= ||(xa/s, xb/s)||
    let u = model.add_var(format!("lift{pair}_u"), 0.0, f64::INFINITY);
    install_tower(
        model,
        pair,
        &mut serial,
        affine_of(xa, 1.0 / s),
        affine_of(xb, 1.0 / s),
        (vec![(u, 1.0)], 0.0),
        depth,
    );
    // (alpha/s^2 + 1)/2 >= ||(u, (alpha/s^2 - 1)/2)||
    let s2 = s * s;
    install_tower(
        model,
        pair,
        &mut serial,
        (vec![(u, 1.0)], 0.0),
        (vec![(alpha, 0.5 / s2)], -0.5),
        (vec![(alpha, 0.5 / s2)], 0.5),
        depth,
    );
}

/// Install lifted cost machinery for all quadratic generators and the linear
/// objective terms for every generator. Returns the lift bookkeeping.
pub fn install_lifted_cost(
    model: &mut LpModel,
    generators: &[Generator],
    p_g: &[VarId],
    accuracy: f64,
) -> CostLift {
    let depth = btn_depth(accuracy);
    let mut p_lift: Vec<Option<VarId>> = vec![None; generators.len()];

    for (g, gen) in generators.iter().enumerate() {
        model.set_objective_coeff(p_g[g], gen.c1);
        model.add_objective_constant(gen.c0);
        if gen.c2 > 0.0 {
            let root = gen.c2.sqrt();
            let v = model.add_var(
                format!("pl{g}"),
                root * gen.p_min,
                root * gen.p_max,
            );
            model
                .add_row(
                    vec![(v, 1.0), (p_g[g], -root)],
                    Sense::Eq,
                    0.0,
                    RowTag::CostLink(g),
                )
                .expect("one cost link per generator");
            p_lift[g] = Some(v);
        }
    }

    let lifted: Vec<usize> = (0..generators.len()).filter(|g| p_lift[*g].is_some()).collect();
    let mut pairs = Vec::new();
    for (pair, chunk) in lifted.chunks(2).enumerate() {
        let a = chunk[0];
        let b = chunk.get(1).copied();
        let bound = |g: usize| {
            let gen = &generators[g];
            let root = gen.c2.sqrt();
            (root * gen.p_min).abs().max((root * gen.p_max).abs())
        };
        let scale = bound(a).max(b.map(bound).unwrap_or(0.0));
        let alpha = model.add_var(format!("alpha{pair}"), 0.0, f64::INFINITY);
        model.set_objective_coeff(alpha, 1.0);
        install_pair(
            model,
            pair,
            p_lift[a],
            b.and_then(|g| p_lift[g]),
            alpha,
            scale,
            depth,
        );
        pairs.push(LiftPair {
            members: (a, b),
            alpha,
            scale,
        });
    }
    CostLift {
        p_lift,
        pairs,
        depth,
    }
}
