// Manual driver: run a case end to end and print a summary line.
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).expect("usage: run_case <case.m> [alg1|alg2|alg3] [start]");
    let text = std::fs::read_to_string(path).unwrap();
    let case = slopf_core::RawCase::parse(&text).unwrap();
    let net = slopf_core::network::build_network(&case).unwrap();
    let mut params = slopf_core::SlpParams::default();
    if let Some(s) = args.get(3) {
        params.start = match s.as_str() {
            "fs2" => slopf_core::StartStrategy::Fs2,
            "fs3" => slopf_core::StartStrategy::Fs3,
            "dc" => slopf_core::StartStrategy::DcWarm,
            _ => slopf_core::StartStrategy::Fs1,
        };
    }
    let t0 = std::time::Instant::now();
    let report = match args.get(2).map(|s| s.as_str()) {
        Some("alg1") => slopf_core::run_algorithm1(&net, &params).unwrap(),
        Some("alg3") => slopf_core::run_algorithm3(&net, &params).unwrap(),
        Some("alg2") => slopf_core::run_algorithm2(&net, &params).unwrap(),
        _ => slopf_core::solve_auto(&net, &params).unwrap(),
    };
    let pg: f64 = report.primal.as_ref().map(|p| p.p_gen.iter().sum()).unwrap_or(f64::NAN);
    println!(
        "{}: status={:?} obj={:.4} k={} meanF={:.3e} maxF={:.3e} maxG={:.3e} maxH={:.3e} pg={:.6} t={:.2}s",
        net.name, report.status, report.objective.unwrap_or(f64::NAN), report.iterations,
        report.mean_f, report.max_f, report.max_g, report.max_h, pg, t0.elapsed().as_secs_f64()
    );
    for rec in &report.trace {
        println!("  k={} lp={:.4} cost={:.4} maxF={:.2e} minF={:+.2e} maxG={:+.2e} maxH={:.2e} soc+{} th+{} t={:.0}ms",
            rec.k, rec.lp_objective, rec.cost, rec.max_f, rec.min_f_signed, rec.max_g, rec.max_h,
            rec.cuts_soc_added, rec.cuts_thermal_added, rec.wall_ms);
    }
}
