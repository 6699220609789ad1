fn main() {
    let path = std::env::args().nth(1).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let case = slopf_core::RawCase::parse(&text).unwrap();
    let net = slopf_core::network::build_network(&case).unwrap();
    let report = slopf_core::solve_auto(&net, &slopf_core::SlpParams::default()).unwrap();
    let rep = slopf_core::verify(&net, report.primal.as_ref().unwrap(), 1e-5, 1e-3).unwrap();
    println!("obj={:?} verify: {}", report.objective, serde_json::to_string_pretty(&rep).unwrap());
}
