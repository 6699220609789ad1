// Reproduce the case57 run and dump the first failing LP in text form.
use slopf_core::lp::{LpBackend, ClarabelBackend, LpModel, LpSolution, LpError, write_lp_text};
use std::cell::RefCell;

struct Recording {
    inner: ClarabelBackend,
    last: RefCell<Option<LpModel>>,
}
impl LpBackend for Recording {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError> {
        let sol = self.inner.solve(model)?;
        if sol.status != slopf_core::lp::LpStatus::Optimal {
            *self.last.borrow_mut() = Some(model.clone());
        }
        Ok(sol)
    }
    fn name(&self) -> &'static str { "recording" }
}

fn main() {
    let path = std::env::args().nth(1).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let case = slopf_core::RawCase::parse(&text).unwrap();
    let net = slopf_core::network::build_network(&case).unwrap();
    let params = slopf_core::SlpParams { thermal: slopf_core::ThermalMode::None, ..Default::default() };
    let backend = Recording { inner: ClarabelBackend::default(), last: RefCell::new(None) };
    let (status, iters) = {
        let report = slopf_core::slp::run_algorithm3_with(&net, &params, &backend).unwrap();
        (report.status, report.iterations)
    };
    println!("status {:?} after {} iters", status, iters);
    let guard = backend.last.borrow();
    if let Some(model) = guard.as_ref() {
        std::fs::write("/tmp/failing.lp", write_lp_text(model)).unwrap();
        println!("dumped /tmp/failing.lp ({} rows)", model.n_rows());
    }
}
