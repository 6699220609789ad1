//! Sequential-LP solver for the AC optimal power flow problem.
//!
//! The solver works on the alternative formulation of the OPF, in which the
//! voltage products are replaced by the variables `w_i = v_i^2`,
//! `wr_ij = v_i v_j cos(theta_i - theta_j)` and `wi_ij = v_i v_j sin(theta_i - theta_j)`.
//! All nonlinearity is then concentrated in a rotated-cone boundary equality,
//! an atan2 cycle equation and the quadratic thermal limits, each of which is
//! handled by first-order supporting hyperplanes and halfspaces inside a
//! sequence of linear programs. Three drivers are provided:
//!
//! * [`slp::run_algorithm1`] — outer approximation of the SOCP relaxation,
//! * [`slp::run_algorithm2`] — radial networks (cone boundary via penalized
//!   hyperplanes plus accumulated halfspaces),
//! * [`slp::run_algorithm3`] — meshed networks (adds the atan2 rows).
//!
//! Locational marginal prices (LMP and Q-LMP) are read off the nodal-balance
//! duals of the final LP by [`analysis::extract_prices`].

pub mod analysis;
pub mod case_io;
pub mod cuts;
pub mod formulation;
pub mod lp;
pub mod network;
pub mod report;
pub mod slp;


pub use analysis::{extract_prices, optimality_gap, recover_angles, verify, FeasibilityReport, PricingReport};
pub use case_io::RawCase;
pub use formulation::{build_skeleton, dc_opf, FormulationOptions, Mode, Skeleton, ThermalMode, VarMap};

pub use lp::{LpBackend, LpModel, LpSolution, LpStatus, RowTag, Sense};
pub use network::{Branch, Bus, Generator, Network, Topology};
pub use report::{SolveReport, SolveStatus};
pub use slp::{run_algorithm1, run_algorithm2, run_algorithm3, solve_auto, SlpParams, StartStrategy};


