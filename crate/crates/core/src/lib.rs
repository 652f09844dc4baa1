//! Peak finding on synthetic spectra with a quanvolutional network and its
//! classical twin.
//!
//! The crate provides everything the comparison needs end to end:
//!
//! * [`sim`] — dense 5-qubit state-vector simulation with amplitude
//!   embedding, Pauli-Z readout, an amplitude-damping readout channel, and
//!   parameter-shift / adjoint / finite-difference gradients.
//! * [`ansatz`] — the three kernel circuits (strongly entangling,
//!   simplified two-design, seeded random).
//! * [`model`] — the fixed network: a pluggable convolution front end
//!   (quantum or classical), max pooling, and a dense head, with exact
//!   forward and backward passes.
//! * [`loss`] — binary cross-entropy on the peak mask plus a
//!   permutation-invariant assignment loss on peak positions.
//! * [`specgen`] — the Lorentzian spectra generator with difficulty presets
//!   and stratified dataset splits.
//! * [`trainer`] — Adam with cosine annealing, SPSA for noisy circuits, and
//!   the training loop with checkpointing.
//! * [`metrics`] — peak-counting classification metrics, position errors,
//!   and the one-sided Wilcoxon signed-rank test.

pub mod ansatz;
pub mod assignment;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sim;
pub mod specgen;
pub mod trainer;

pub use error::{Error, Result};
