//! Two-variable nonconvex demonstration problem:
//!
//! ```text
//!   minimize  x1 - x2
//!   s.t.      g(x) = 3 x1^2 - 2 x1 x2 + x2^2 - 1 = 0,   -2 <= x <= 2
//! ```
//!
//! solved by the same hyperplane-plus-halfspace scheme as the network
//! drivers: a penalized equality anchored at the current point (or at its
//! projection onto {g = 0}) plus accumulated halfspaces at all previous
//! anchors. The optimum is x* = [0, 1].

use crate::lp::{ClarabelBackend, LpBackend, LpModel, LpStatus, RowTag, Sense};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const Q: [[f64; 2]; 2] = [[3.0, -1.0], [-1.0, 1.0]];

fn g(x: [f64; 2]) -> f64 {
    3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1] * x[1] - 1.0
}

fn grad_g(x: [f64; 2]) -> [f64; 2] {
    [6.0 * x[0] - 2.0 * x[1], -2.0 * x[0] + 2.0 * x[1]]
}

/// Projection of y onto the ellipse boundary {x : g(x) = 0}, by solving
/// x(t) = (I + 2 t Q)^(-1) y for the multiplier t with g(x(t)) = 0.
pub fn project_to_boundary(y: [f64; 2]) -> [f64; 2] {
    if y[0].hypot(y[1]) < 1e-12 {
        // center of the ellipse: any boundary point is nearest; pick the top
        return [0.0, 1.0];
    }
    let x_of = |t: f64| -> [f64; 2] {
        let a = 1.0 + 2.0 * t * Q[0][0];
        let b = 2.0 * t * Q[0][1];
        let c = 2.0 * t * Q[1][0];
        let d = 1.0 + 2.0 * t * Q[1][1];
        let det = a * d - b * c;
        [(d * y[0] - b * y[1]) / det, (a * y[1] - c * y[0]) / det]
    };
    // eigenvalues of Q are 2 +- sqrt(2); (I + 2tQ) stays definite above t_lo
    let t_lo = -1.0 / (2.0 * (2.0 + std::f64::consts::SQRT_2)) + 1e-9;
    let (mut lo, mut hi);
    if g(y) >= 0.0 {
        lo = 0.0;
        hi = 1.0;
        while g(x_of(hi)) > 0.0 {
            hi *= 2.0;
        }
    } else {
        lo = t_lo;
        hi = 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(x_of(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x_of(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyResult {
    pub x: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

/// Run the toy problem from a starting point. `use_projection` anchors each
/// linearization at the boundary projection of the iterate instead of the
/// iterate itself.
pub fn solve_toy(
    rho: f64,
    start: [f64; 2],
    use_projection: bool,
    eps: f64,
    k_max: usize,
    backend: &dyn LpBackend,
) -> ToyResult {
    let mut m = LpModel::new();
    let x1 = m.add_var("x1", -2.0, 2.0);
    let x2 = m.add_var("x2", -2.0, 2.0);
    let r = m.add_var("r", 0.0, f64::INFINITY);
    m.set_objective_coeff(x1, 1.0);
    m.set_objective_coeff(x2, -1.0);
    m.set_objective_coeff(r, rho);

    let anchor_of = |x: [f64; 2]| -> [f64; 2] {
        if use_projection {
            project_to_boundary(x)
        } else {
            x
        }
    };

    let mut x = start;
    let mut hyper = None;
    for k in 1..=k_max {
        let a = anchor_of(x);
        let (ga, da) = (g(a), grad_g(a));
        // g(a) + da . (x - a) = -r   and the frozen halfspace version <= 0
        let rhs = da[0] * a[0] + da[1] * a[1] - ga;
        let row = vec![(x1, da[0]), (x2, da[1]), (r, 1.0)];
        match hyper {
            None => {
                hyper = Some(
                    m.add_row(row, Sense::Eq, rhs, RowTag::Custom("hyperplane".into()))
                        .unwrap(),
                );
            }
            Some(id) => m.replace_row(id, row, rhs).unwrap(),
        }
        m.add_row(
            vec![(x1, da[0]), (x2, da[1])],
            Sense::Le,
            rhs,
            RowTag::Custom(format!("halfspace{}", k - 1)),
        )
        .unwrap();

        let sol = backend.solve(&m).expect("toy LP solve");
        if sol.status != LpStatus::Optimal {
            return ToyResult {
                x,
                iterations: k,
                converged: false,
            };
        }
        x = [sol.value(x1), sol.value(x2)];
        if g(x).abs() <= eps {
            return ToyResult {
                x,
                iterations: k,
                converged: true,
            };
        }
    }
    ToyResult {
        x,
        iterations: k_max,
        converged: false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub rho: f64,
    pub projection: bool,
    pub starts: usize,
    pub converged: usize,
    pub mean_iterations: f64,
    pub min_iterations: usize,
    pub max_iterations: usize,
}

/// Protocol: many uniform starts in (-10, 10)^2 for a set of penalty
/// weights, plain and projection-anchored variants.
pub fn robustness(
    n_starts: usize,
    seed: u64,
    rhos: &[f64],
    use_projection: bool,
    eps: f64,
    k_max: usize,
) -> Vec<RobustnessSummary> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<[f64; 2]> = (0..n_starts)
        .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)])
        .collect();
    rhos.iter()
        .map(|&rho| {
            let results: Vec<ToyResult> = starts
                .par_iter()
                .map(|s| solve_toy(rho, *s, use_projection, eps, k_max, &ClarabelBackend::default()))
                .collect();
            let converged = results.iter().filter(|r| r.converged).count();
            let iters: Vec<usize> = results.iter().map(|r| r.iterations).collect();
            RobustnessSummary {
                rho,
                projection: use_projection,
                starts: n_starts,
                converged,
                mean_iterations: iters.iter().sum::<usize>() as f64 / iters.len().max(1) as f64,
                min_iterations: iters.iter().copied().min().unwrap_or(0),
                max_iterations: iters.iter().copied().max().unwrap_or(0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn converges_to_known_optimum() {
        // plain anchoring approaches the optimum at rate ~1/2 along the
        // boundary; projection anchoring lands an order of magnitude closer
        let plain = solve_toy(10.0, [-2.0, 2.0], false, 1e-4, 200, &ClarabelBackend::default());
        assert!(plain.converged);
        assert!((plain.x[0]).abs() <= 1e-2, "x1 = {}", plain.x[0]);
        assert!((plain.x[1] - 1.0).abs() <= 1e-2, "x2 = {}", plain.x[1]);
        let proj = solve_toy(10.0, [-2.0, 2.0], true, 1e-4, 200, &ClarabelBackend::default());
        assert!(proj.converged);
        assert!((proj.x[0]).abs() <= 1e-3, "x1 = {}", proj.x[0]);
        assert!((proj.x[1] - 1.0).abs() <= 1e-3, "x2 = {}", proj.x[1]);
        assert!(proj.iterations < plain.iterations);
    }

    #[test]
    fn zero_gradient_start_is_feasible_thanks_to_slack() {
        // the gradient vanishes at the ellipse center; without the slack the
        // first LP would be infeasible
        let r = solve_toy(10.0, [0.0, 0.0], false, 1e-4, 200, &ClarabelBackend::default());
        assert!(r.converged);
        assert!((r.x[1] - 1.0).abs() <= 1e-2);
    }

    #[test]
    fn projection_lands_on_boundary() {
        for y in [[3.0, -2.0], [0.1, 0.2], [-5.0, 7.0], [0.0, 0.5]] {
            let p = project_to_boundary(y);
            assert_relative_eq!(g(p), 0.0, epsilon = 1e-9);
        }
        // projecting a boundary point returns it
        let b = project_to_boundary([0.0, 1.0]);
        assert_relative_eq!(b[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(b[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_variant_converges_faster_on_average() {
        let plain = robustness(60, 1, &[10.0], false, 1e-4, 500);
        let proj = robustness(60, 1, &[10.0], true, 1e-4, 500);
        assert_eq!(plain[0].converged, 60);
        assert_eq!(proj[0].converged, 60);
        assert!(
            proj[0].mean_iterations < plain[0].mean_iterations,
            "projection {} vs plain {}",
            proj[0].mean_iterations,
            plain[0].mean_iterations
        );
    }
}
