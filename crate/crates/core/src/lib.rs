//! Symmetric random matrices whose upper triangle is filled, through a
//! bijection, from a correlated stationary process.
//!
//! * [`process`]: Markov, binary, Gaussian and Gibbs generators with exact
//!   moment oracles and fitted decay constants.
//! * [`filling`]: index-to-cell bijections and their combinatorics.
//! * [`spectra`]: matrix assembly, eigenvalues and semicircle comparisons.
//! * [`verify`]: brute-force trace moments and assumption checkers.
//! * [`experiment`]: the config-driven runner used by the CLI.

pub mod error;
pub mod experiment;
pub mod filling;
pub mod process;
pub mod seed;
pub mod spectra;
pub mod verify;

pub use error::{Error, FillingError, ProcessError, SpectraError, VerifyError};
pub use filling::{FillingKind, FillingMap};
pub use process::{
    binary_closed_form_moment, fit_decay_constants, gaussian_isserlis_moment, gibbs_to_chain,
    sample_path, BinaryChain, FiniteMarkovChain, GaussianMarkov, GibbsPotential, MomentOracle,
    Path, ProcessSpec,
};
pub use seed::seed_for_trial;
pub use spectra::{EnsembleSample, Histogram, HistogramSpec, SpectralSummary};
pub use verify::{expected_trace_moment_bruteforce, VerificationReport};
