//! AC/DC optimal power flow for meshed grids coupled by VSC-based
//! multi-terminal DC (MTDC) systems.
//!
//! The crate models hybrid grids in which several independent AC regions are
//! linked through a meshed DC network via voltage-source converter stations,
//! and solves the resulting nonconvex optimal power flow three ways:
//!
//! * **centrally** — one sparse NLP over all regions, solved by the built-in
//!   primal-dual interior-point method ([`central`]);
//! * **ADMM** — consensus alternating direction method of multipliers over
//!   duplicated boundary variables ([`admm`]);
//! * **ALADIN** — augmented-Lagrangian based alternating direction inexact
//!   Newton with exact or damped-BFGS Hessians and a Schur-complement
//!   coupled QP ([`aladin`]).
//!
//! The distributed solvers operate on a [`partition::Decomposition`]: one
//! subproblem per AC region plus one for the MTDC grid, tied together by
//! sparse consensus constraints on the converter-station boundary voltages.

pub mod admm;
pub mod aladin;
pub mod central;
pub mod partition;
pub mod formulation;
pub mod model;
pub mod nlp;
pub mod report;

pub use admm::{solve_admm, AdmmSettings, DistIter, DistributedRun};
pub use aladin::{solve_aladin, AladinInit, AladinRun, AladinSettings, HessianMode};
pub use central::{solve_centralized, CentralSolution};
pub use partition::{decompose, Decomposition};
pub use model::{load_case, Network};
pub use nlp::{IpmSettings, Nlp, SolveStatus};
