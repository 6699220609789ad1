fn main() {
    use slopf_core::lp::ClarabelBackend;
    use slopf_core::slp::toy2d::*;
    for proj in [false, true] {
        let mut k_hist = vec![];
        for eps in [1e-4f64] {
            let r = solve_toy(10.0, [-2.0, 2.0], proj, eps, 500, &ClarabelBackend::default());
            let d = (r.x[0].powi(2) + (r.x[1]-1.0).powi(2)).sqrt();
            println!("proj={proj} eps={eps:.0e} iters={} dist={:.3e} x=({:+.6},{:+.6})", r.iterations, d, r.x[0], r.x[1]);
            k_hist.push(r.iterations);
        }
    }
    // robustness quick check
    for proj in [false, true] {
        let s = robustness(200, 1, &[1.0, 10.0, 100.0], proj, 1e-4, 500);
        for row in s {
            println!("proj={} rho={:<5} conv={}/{} mean={:.2} min={} max={}", row.projection, row.rho, row.converged, row.starts, row.mean_iterations, row.min_iterations, row.max_iterations);
        }
    }
}
