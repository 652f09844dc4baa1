//! Dense state-vector simulation of 5-qubit circuits.
//!
//! The register is fixed at five qubits (32 complex amplitudes), matching the
//! quanvolution kernel size of 32 spectral points. All expectations are
//! analytic — there is no shot sampling — so identical inputs produce
//! bit-identical outputs.
//!
//! # Bit convention
//!
//! Qubit 0 is the **most significant bit** of the basis index: basis state
//! `|q0 q1 q2 q3 q4⟩` has index `q0·16 + q1·8 + q2·4 + q3·2 + q4`. The CNOT
//! truth-table tests pin this convention.

mod circuit;
mod grad;

pub use circuit::{Axis, CircuitSpec, Gate, GateKind};
pub use grad::{
    adjoint_grad, adjoint_sweeps, circuit_jacobian, circuit_vjp, finite_diff_grad,
    param_shift_evaluations, param_shift_grad, GradBackend, Jacobian,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use circuit::PrimOp;

/// Number of qubits in the register.
pub const N_QUBITS: usize = 5;
/// Dimension of the state space, `2^N_QUBITS`.
pub const DIM: usize = 1 << N_QUBITS;

/// Pure state of the 5-qubit register: 32 complex amplitudes with unit
/// Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: [Complex64; DIM],
}

impl StateVector {
    /// The all-zeros basis state `|00000⟩`.
    pub fn zero_state() -> Self {
        let mut amps = [Complex64::ZERO; DIM];
        amps[0] = Complex64::ONE;
        StateVector { amps }
    }

    /// Builds a state from explicit amplitudes; fails unless the vector is
    /// normalized to within 1e-8.
    pub fn from_amplitudes(amps: [Complex64; DIM]) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "amplitudes have squared norm {norm_sqr}, want 1"
            )));
        }
        Ok(StateVector { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    /// Σ|amplitude|², equal to 1 up to floating-point error on any valid state.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64; DIM] {
        &mut self.amps
    }
}

/// Readout-noise model: one amplitude-damping channel of strength `gamma`
/// applied to every qubit at measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub gamma: f64,
}

impl NoiseConfig {
    pub const DEFAULT_GAMMA: f64 = 0.02;

    /// Noise disabled (ideal simulation).
    pub fn ideal() -> Self {
        NoiseConfig {
            enabled: false,
            gamma: Self::DEFAULT_GAMMA,
        }
    }

    /// Damping enabled with the given strength.
    pub fn damping(gamma: f64) -> Result<Self> {
        let cfg = NoiseConfig {
            enabled: true,
            gamma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        Ok(())
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::ideal()
    }
}

/// Bit mask selecting `qubit` inside a basis index (qubit 0 = MSB).
#[inline]
pub(crate) fn qubit_mask(qubit: usize) -> usize {
    debug_assert!(qubit < N_QUBITS);
    1 << (N_QUBITS - 1 - qubit)
}

/// Embeds a 32-point window as probability amplitudes, `a_j = x_j / ‖x‖₂`.
///
/// A zero-norm window (a silent spectral region) embeds as the uniform
/// superposition, the limit of a constant window under ℓ2 normalization.
pub fn amplitude_embed(window: &[f64]) -> Result<StateVector> {
    if window.len() != DIM {
        return Err(Error::invalid(format!(
            "window length {}, want {DIM}",
            window.len()
        )));
    }
    if window.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric(
            "window contains a non-finite entry".to_string(),
        ));
    }
    let norm = window.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut amps = [Complex64::ZERO; DIM];
    if norm == 0.0 {
        let a = 1.0 / (DIM as f64).sqrt();
        amps.fill(Complex64::new(a, 0.0));
    } else {
        for (a, &x) in amps.iter_mut().zip(window) {
            *a = Complex64::new(x / norm, 0.0);
        }
    }
    Ok(StateVector { amps })
}

/// 2×2 unitary of a Pauli rotation `exp(-i θ/2 P)`.
#[inline]
pub(crate) fn rotation_matrix(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(c, -s), Complex64::ZERO],
            [Complex64::ZERO, Complex64::new(c, s)],
        ],
    }
}

/// Derivative of `rotation_matrix` with respect to θ.
#[inline]
pub(crate) fn rotation_matrix_deriv(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match axis {
        Axis::X => [
            [Complex64::new(-s / 2.0, 0.0), Complex64::new(0.0, -c / 2.0)],
            [Complex64::new(0.0, -c / 2.0), Complex64::new(-s / 2.0, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(-s / 2.0, 0.0), Complex64::new(-c / 2.0, 0.0)],
            [Complex64::new(c / 2.0, 0.0), Complex64::new(-s / 2.0, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(-s / 2.0, -c / 2.0), Complex64::ZERO],
            [Complex64::ZERO, Complex64::new(-s / 2.0, c / 2.0)],
        ],
    }
}

#[inline]
pub(crate) fn apply_single_qubit(
    amps: &mut [Complex64; DIM],
    qubit: usize,
    m: &[[Complex64; 2]; 2],
) {
    let mask = qubit_mask(qubit);
    for i in 0..DIM {
        if i & mask == 0 {
            let j = i | mask;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

#[inline]
pub(crate) fn apply_cnot(amps: &mut [Complex64; DIM], control: usize, target: usize) {
    let cmask = qubit_mask(control);
    let tmask = qubit_mask(target);
    for i in 0..DIM {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

#[inline]
pub(crate) fn apply_cz(amps: &mut [Complex64; DIM], a: usize, b: usize) {
    let mask = qubit_mask(a) | qubit_mask(b);
    for i in 0..DIM {
        if i & mask == mask {
            amps[i] = -amps[i];
        }
    }
}

/// Applies a primitive op in place. `invert` applies the inverse (rotations
/// by -θ; CNOT and CZ are involutions).
#[inline]
pub(crate) fn apply_prim(amps: &mut [Complex64; DIM], op: &PrimOp, params: &[f64], invert: bool) {
    match *op {
        PrimOp::Rotation { axis, qubit, slot } => {
            let theta = if invert { -params[slot] } else { params[slot] };
            apply_single_qubit(amps, qubit, &rotation_matrix(axis, theta));
        }
        PrimOp::Cnot { control, target } => apply_cnot(amps, control, target),
        PrimOp::Cz { a, b } => apply_cz(amps, a, b),
    }
}

pub(crate) fn check_finite_params(params: &[f64]) -> Result<()> {
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::numeric(format!("non-finite rotation angle {bad}")));
    }
    Ok(())
}

fn check_params(circuit: &CircuitSpec, params: &[f64]) -> Result<()> {
    if params.len() != circuit.n_params {
        return Err(Error::invalid(format!(
            "circuit '{}' expects {} parameters, got {}",
            circuit.label,
            circuit.n_params,
            params.len()
        )));
    }
    check_finite_params(params)
}

/// Applies one gate to a state, returning the new state.
pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    if gate.targets.len() != gate.kind.arity()
        || gate.targets.iter().any(|&q| q >= N_QUBITS)
        || (gate.targets.len() == 2 && gate.targets[0] == gate.targets[1])
        || gate.param_slots.len() != gate.kind.slot_count()
    {
        return Err(Error::invalid(format!("malformed gate {gate:?}")));
    }
    for &s in &gate.param_slots {
        if s >= params.len() {
            return Err(Error::invalid(format!(
                "param slot {s} out of range 0..{}",
                params.len()
            )));
        }
        if !params[s].is_finite() {
            return Err(Error::numeric(format!(
                "non-finite rotation angle {}",
                params[s]
            )));
        }
    }
    let spec = CircuitSpec {
        label: String::new(),
        n_params: params.len(),
        gates: vec![gate.clone()],
    };
    let mut out = state.clone();
    for op in spec.lowered() {
        apply_prim(out.amps_mut(), &op, params, false);
    }
    Ok(out)
}

/// ⟨Z⟩ of one qubit: Σ over basis states of ±|amplitude|², the sign given by
/// the qubit's bit (+ for 0, − for 1).
pub fn expect_z(state: &StateVector, qubit: usize) -> Result<f64> {
    if qubit >= N_QUBITS {
        return Err(Error::invalid(format!(
            "qubit index {qubit} out of range 0..{N_QUBITS}"
        )));
    }
    let mask = qubit_mask(qubit);
    let mut z = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if i & mask == 0 {
            z += p;
        } else {
            z -= p;
        }
    }
    Ok(z)
}

pub(crate) fn expect_all_z(amps: &[Complex64; DIM]) -> [f64; N_QUBITS] {
    let mut z = [0.0; N_QUBITS];
    for (i, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        for (q, zq) in z.iter_mut().enumerate() {
            if i & qubit_mask(q) == 0 {
                *zq += p;
            } else {
                *zq -= p;
            }
        }
    }
    z
}

/// Image of a Z expectation under the single-qubit amplitude-damping channel
/// of strength `gamma`: `(1 − gamma)·z + gamma`.
///
/// This affine map is exact: with Kraus operators K₀ = diag(1, √(1−γ)) and
/// K₁ = |0⟩⟨1|·√γ, Tr(Z K₀ρK₀† + Z K₁ρK₁†) = (1−γ)Tr(Zρ) + γ for any
/// single-qubit ρ.
pub fn readout_damping(z: f64, gamma: f64) -> f64 {
    (1.0 - gamma) * z + gamma
}

/// Evaluates the full quanvolution kernel on one window: amplitude embedding,
/// the circuit's gates in order, then per-qubit ⟨Z⟩ (damped when noise is
/// enabled).
pub fn run_circuit(
    window: &[f64],
    circuit: &CircuitSpec,
    params: &[f64],
    noise: &NoiseConfig,
) -> Result<[f64; N_QUBITS]> {
    check_params(circuit, params)?;
    noise.validate()?;
    let mut state = amplitude_embed(window)?;
    for op in circuit.lowered() {
        apply_prim(state.amps_mut(), &op, params, false);
    }
    let mut z = expect_all_z(state.amplitudes());
    if noise.enabled {
        for zq in &mut z {
            *zq = readout_damping(*zq, noise.gamma);
        }
    }
    Ok(z)
}

/// Same as [`run_circuit`] but on pre-lowered ops with caller-provided
/// scratch; the hot path used by the feature-map sweep.
pub(crate) fn run_lowered(
    embedded: &StateVector,
    ops: &[PrimOp],
    params: &[f64],
    scratch: &mut StateVector,
) -> [f64; N_QUBITS] {
    scratch.amps.copy_from_slice(&embedded.amps);
    for op in ops {
        apply_prim(scratch.amps_mut(), op, params, false);
    }
    expect_all_z(scratch.amplitudes())
}
