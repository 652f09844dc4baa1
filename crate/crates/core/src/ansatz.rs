//! The three quanvolution kernel circuits and their parameter initialization.
//!
//! * Strongly entangling: three layers, each a general `Rot` per qubit
//!   followed by a wrap-around CNOT ring — 45 trainable angles.
//! * Simplified two-design: an initial RY layer, then three blocks of
//!   staggered CZ pairs with RY rotations — 29 trainable angles.
//! * Random: a seeded arrangement of rotation and CNOT gates with every
//!   rotation trainable.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::{seeded, Prng};
use crate::sim::{CircuitSpec, Gate, N_QUBITS};

/// Default gate count for the random ansatz. The source circuit is only
/// shown as an excerpt, so this approximates its visual density; it is
/// configurable wherever an [`AnsatzKind`] is accepted.
pub const RANDOM_DEFAULT_GATE_COUNT: usize = 30;

/// Selects one of the three kernel circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzKind {
    StronglyEntangling,
    TwoDesign,
    Random { seed: u64, gate_count: usize },
}

impl AnsatzKind {
    pub fn build(&self) -> Result<CircuitSpec> {
        match *self {
            AnsatzKind::StronglyEntangling => Ok(build_strongly_entangling()),
            AnsatzKind::TwoDesign => Ok(build_two_design()),
            AnsatzKind::Random { seed, gate_count } => build_random(seed, gate_count),
        }
    }
}

/// Three repetitions of one `Rot(α, β, γ)` per qubit followed by the CNOT
/// ring (0→1), (1→2), (2→3), (3→4), (4→0). 45 parameters.
pub fn build_strongly_entangling() -> CircuitSpec {
    let mut gates = Vec::with_capacity(3 * 2 * N_QUBITS);
    let mut slot = 0;
    for _layer in 0..3 {
        for q in 0..N_QUBITS {
            gates.push(Gate::rot(q, [slot, slot + 1, slot + 2]));
            slot += 3;
        }
        for q in 0..N_QUBITS {
            gates.push(Gate::cnot(q, (q + 1) % N_QUBITS));
        }
    }
    CircuitSpec::new("strongly_entangling", slot, gates).expect("static circuit is well-formed")
}

/// Initial RY(γ₀..γ₄) on all qubits, then three blocks of
/// CZ(0,1), CZ(2,3) + RY on qubits 0–3 and CZ(1,2), CZ(3,4) + RY on
/// qubits 1–4. 5 + 3·8 = 29 parameters.
pub fn build_two_design() -> CircuitSpec {
    let mut gates = Vec::new();
    let mut slot = 0;
    for q in 0..N_QUBITS {
        gates.push(Gate::ry(q, slot));
        slot += 1;
    }
    for _block in 0..3 {
        gates.push(Gate::cz(0, 1));
        gates.push(Gate::cz(2, 3));
        for q in 0..4 {
            gates.push(Gate::ry(q, slot));
            slot += 1;
        }
        gates.push(Gate::cz(1, 2));
        gates.push(Gate::cz(3, 4));
        for q in 1..5 {
            gates.push(Gate::ry(q, slot));
            slot += 1;
        }
    }
    CircuitSpec::new("two_design", slot, gates).expect("static circuit is well-formed")
}

/// Seeded random arrangement of `gate_count` gates: each draw is a rotation
/// (uniform over RX/RY/RZ on a uniform qubit, consuming a fresh slot) with
/// probability 2/3, or a CNOT on a distinct random pair with probability 1/3.
pub fn build_random(seed: u64, gate_count: usize) -> Result<CircuitSpec> {
    if gate_count == 0 {
        return Err(crate::error::Error::invalid(
            "random ansatz needs gate_count >= 1",
        ));
    }
    let mut rng = seeded(seed);
    let mut gates = Vec::with_capacity(gate_count);
    let mut slot = 0;
    for _ in 0..gate_count {
        if rng.random::<f64>() < 2.0 / 3.0 {
            let qubit = rng.random_range(0..N_QUBITS);
            let gate = match rng.random_range(0..3) {
                0 => Gate::rx(qubit, slot),
                1 => Gate::ry(qubit, slot),
                _ => Gate::rz(qubit, slot),
            };
            gates.push(gate);
            slot += 1;
        } else {
            let control = rng.random_range(0..N_QUBITS);
            // Draw the target from the remaining qubits so exactly two draws
            // are consumed per CNOT.
            let offset = rng.random_range(1..N_QUBITS);
            gates.push(Gate::cnot(control, (control + offset) % N_QUBITS));
        }
    }
    CircuitSpec::new(format!("random_{seed}_{gate_count}"), slot, gates)
}

/// Draws one angle per parameter slot, uniform over the full period
/// `[−π, π)`.
pub fn init_params(circuit: &CircuitSpec, rng: &mut Prng) -> Vec<f64> {
    (0..circuit.n_params)
        .map(|_| rng.random_range(-PI..PI))
        .collect()
}
