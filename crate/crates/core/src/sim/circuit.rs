//! Circuit description: gates, trainable-parameter slots, validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::N_QUBITS;

/// Rotation axis of a Pauli rotation `exp(-i θ/2 P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Gate inventory of the simulator.
///
/// `Rot` is the general single-qubit rotation, stored as a composite of three
/// Pauli rotations applied in order RZ(a), RY(b), RZ(c) with three
/// independent parameter slots; every parameterized primitive is therefore of
/// Pauli-rotation form and admits the two-point parameter-shift rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rot,
    Cnot,
    Cz,
}

impl GateKind {
    /// Number of qubits the gate acts on.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rot => 1,
            GateKind::Cnot | GateKind::Cz => 2,
        }
    }

    /// Number of trainable-parameter slots the gate consumes.
    pub fn slot_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rot => 3,
            GateKind::Cnot | GateKind::Cz => 0,
        }
    }
}

/// One gate instance: kind, target qubits, and indices into the flat
/// trainable-parameter vector (empty for CNOT/CZ).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub param_slots: Vec<usize>,
}

impl Gate {
    pub fn rx(qubit: usize, slot: usize) -> Self {
        Gate {
            kind: GateKind::Rx,
            targets: vec![qubit],
            param_slots: vec![slot],
        }
    }

    pub fn ry(qubit: usize, slot: usize) -> Self {
        Gate {
            kind: GateKind::Ry,
            targets: vec![qubit],
            param_slots: vec![slot],
        }
    }

    pub fn rz(qubit: usize, slot: usize) -> Self {
        Gate {
            kind: GateKind::Rz,
            targets: vec![qubit],
            param_slots: vec![slot],
        }
    }

    pub fn rot(qubit: usize, slots: [usize; 3]) -> Self {
        Gate {
            kind: GateKind::Rot,
            targets: vec![qubit],
            param_slots: slots.to_vec(),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            targets: vec![control, target],
            param_slots: vec![],
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate {
            kind: GateKind::Cz,
            targets: vec![a, b],
            param_slots: vec![],
        }
    }

    fn validate(&self, n_params: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::invalid(format!(
                "{:?} expects {} target(s), got {}",
                self.kind,
                self.kind.arity(),
                self.targets.len()
            )));
        }
        for &q in &self.targets {
            if q >= N_QUBITS {
                return Err(Error::invalid(format!(
                    "qubit index {q} out of range 0..{N_QUBITS}"
                )));
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::invalid(format!(
                "{:?} requires two distinct qubits",
                self.kind
            )));
        }
        if self.param_slots.len() != self.kind.slot_count() {
            return Err(Error::invalid(format!(
                "{:?} expects {} slot(s), got {}",
                self.kind,
                self.kind.slot_count(),
                self.param_slots.len()
            )));
        }
        for &s in &self.param_slots {
            if s >= n_params {
                return Err(Error::invalid(format!(
                    "param slot {s} out of range 0..{n_params}"
                )));
            }
        }
        Ok(())
    }
}

/// Ordered gate list with the size of its flat trainable-parameter vector.
///
/// Serializable to JSON so checkpoints can carry the exact circuit they were
/// trained with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub label: String,
    pub n_params: usize,
    pub gates: Vec<Gate>,
}

impl CircuitSpec {
    pub fn new(label: impl Into<String>, n_params: usize, gates: Vec<Gate>) -> Result<Self> {
        let spec = CircuitSpec {
            label: label.into(),
            n_params,
            gates,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks all gate invariants plus that every slot in `0..n_params` is
    /// referenced by at least one gate.
    pub fn validate(&self) -> Result<()> {
        let mut referenced = vec![false; self.n_params];
        for gate in &self.gates {
            gate.validate(self.n_params)?;
            for &s in &gate.param_slots {
                referenced[s] = true;
            }
        }
        if let Some(unused) = referenced.iter().position(|r| !r) {
            return Err(Error::invalid(format!(
                "param slot {unused} is referenced by no gate"
            )));
        }
        Ok(())
    }

    /// Decomposes the gate list into primitive operations: every `Rot`
    /// becomes RZ, RY, RZ (applied in that order), everything else maps 1:1.
    pub(crate) fn lowered(&self) -> Vec<PrimOp> {
        let mut ops = Vec::with_capacity(self.gates.len() * 2);
        for gate in &self.gates {
            match gate.kind {
                GateKind::Rx => ops.push(PrimOp::Rotation {
                    axis: Axis::X,
                    qubit: gate.targets[0],
                    slot: gate.param_slots[0],
                }),
                GateKind::Ry => ops.push(PrimOp::Rotation {
                    axis: Axis::Y,
                    qubit: gate.targets[0],
                    slot: gate.param_slots[0],
                }),
                GateKind::Rz => ops.push(PrimOp::Rotation {
                    axis: Axis::Z,
                    qubit: gate.targets[0],
                    slot: gate.param_slots[0],
                }),
                GateKind::Rot => {
                    let q = gate.targets[0];
                    ops.push(PrimOp::Rotation {
                        axis: Axis::Z,
                        qubit: q,
                        slot: gate.param_slots[0],
                    });
                    ops.push(PrimOp::Rotation {
                        axis: Axis::Y,
                        qubit: q,
                        slot: gate.param_slots[1],
                    });
                    ops.push(PrimOp::Rotation {
                        axis: Axis::Z,
                        qubit: q,
                        slot: gate.param_slots[2],
                    });
                }
                GateKind::Cnot => ops.push(PrimOp::Cnot {
                    control: gate.targets[0],
                    target: gate.targets[1],
                }),
                GateKind::Cz => ops.push(PrimOp::Cz {
                    a: gate.targets[0],
                    b: gate.targets[1],
                }),
            }
        }
        ops
    }

    /// Number of primitive Pauli rotations after lowering. With unique slots
    /// this equals `n_params`; parameter shift costs two circuit evaluations
    /// per rotation occurrence.
    pub fn rotation_count(&self) -> usize {
        self.gates.iter().map(|g| g.param_slots.len()).sum()
    }
}

/// Primitive operation after `Rot` decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PrimOp {
    Rotation {
        axis: Axis,
        qubit: usize,
        slot: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cz {
        a: usize,
        b: usize,
    },
}
