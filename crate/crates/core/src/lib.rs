//! Quantum clique gossiping on networks of qubits.
//!
//! A clique of `k` qubits interacts through a cyclic permutation `π` of its
//! members: the network state is replaced by the uniform mixture of its
//! conjugates by `U_π, U_π², .., U_π^k`. This crate simulates that map under
//! deterministic and randomized clique schedules and computes its convergence
//! behavior exactly where possible:
//!
//! - [`permgroup`]: permutations, the cyclic permutations of a clique, the set
//!   `P_k` of all `k`-cycles and generated subgroups.
//! - [`hypergraph`]: clique graphs, the reduced-state consensus condition,
//!   finite-time feasibility and an exact schedule search.
//! - [`qstate`]: density matrices, permutation unitaries, partial traces.
//! - [`evolution`]: the step maps, schedules, trajectories and group-average
//!   limits.
//! - [`analysis`]: averaging-matrix moments, the reduced rate
//!   `(n-k)/(n-1)`, the full-state rate from the mean-square matrix `M`,
//!   Monte Carlo estimators and rate fits.
//!
//! ```
//! use qgossip::analysis::{exact_h_series, fit_decay_rate, nu_reduced};
//! use qgossip::qstate::StandardState;
//!
//! let states: Vec<_> = "01+-0".chars().cycle().take(10)
//!     .map(|c| StandardState::from_symbol(c).unwrap().state())
//!     .collect();
//! let h = exact_h_series(&states, 3, 40).unwrap();
//! let rate = fit_decay_rate(&h, 10).unwrap();
//! assert!((rate - nu_reduced(10, 3).unwrap()).abs() < 1e-9);
//! ```
//!
//! The `book/` directory next to this crate explains the model chapter by
//! chapter; its code listings are compiled as doc-tests of this crate.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod hypergraph;
pub mod io;
pub mod permgroup;
pub mod qstate;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/permutations.md")]
    mod permutations {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/deterministic.md")]
    mod deterministic {}
    #[doc = include_str!("../../../book/src/finite_time.md")]
    mod finite_time {}
    #[doc = include_str!("../../../book/src/random_reduced.md")]
    mod random_reduced {}
    #[doc = include_str!("../../../book/src/network_rate.md")]
    mod network_rate {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
