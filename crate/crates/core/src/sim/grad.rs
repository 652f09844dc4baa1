//! Differentiation backends for circuit expectations.
//!
//! Three interchangeable backends compute `∂⟨Z_q⟩/∂ϑ_j` for every qubit and
//! parameter of a circuit (a 5×n_params Jacobian):
//!
//! * **Parameter shift** — exact: for each Pauli-rotation occurrence with
//!   angle ϑ, the partial derivative is `½(f(ϑ+π/2) − f(ϑ−π/2))`, two circuit
//!   evaluations per occurrence. Occurrences sharing a slot are shifted one
//!   at a time and summed, which keeps the rule exact for tied parameters.
//! * **Adjoint** — exact: one forward pass plus one reverse sweep that drags
//!   a bra per observable back through the inverted gates. Cost is a small
//!   constant number of state-vector sweeps regardless of parameter count.
//! * **Finite differences** — approximate central differences, used as an
//!   independent numerical cross-check.
//!
//! Parameter shift and adjoint are defined for ideal circuits only; noisy
//! training uses SPSA instead (see the trainer).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{
    amplitude_embed, apply_prim, apply_single_qubit, check_finite_params, expect_all_z, qubit_mask,
    rotation_matrix, rotation_matrix_deriv, CircuitSpec, PrimOp, StateVector, DIM, N_QUBITS,
};

/// Which differentiation backend to use for quantum-layer gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradBackend {
    ParamShift,
    #[default]
    Adjoint,
    FiniteDiff,
}

/// Central-difference step used by the finite-difference backend.
const FD_STEP: f64 = 1e-4;

/// Dense 5×n_params Jacobian of per-qubit Z expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    n_params: usize,
    /// Row-major: `data[qubit * n_params + param]`.
    data: Vec<f64>,
}

impl Jacobian {
    fn zeros(n_params: usize) -> Self {
        Jacobian {
            n_params,
            data: vec![0.0; N_QUBITS * n_params],
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// `∂⟨Z_qubit⟩/∂ϑ_param`.
    pub fn get(&self, qubit: usize, param: usize) -> f64 {
        self.data[qubit * self.n_params + param]
    }

    /// All parameter derivatives of one qubit's expectation.
    pub fn row(&self, qubit: usize) -> &[f64] {
        &self.data[qubit * self.n_params..(qubit + 1) * self.n_params]
    }

    fn add(&mut self, qubit: usize, param: usize, value: f64) {
        self.data[qubit * self.n_params + param] += value;
    }

    /// Contracts the Jacobian with per-qubit upstream weights:
    /// `out[j] = Σ_q weights[q] · ∂⟨Z_q⟩/∂ϑ_j`.
    pub fn vjp(&self, weights: &[f64; N_QUBITS]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params];
        for (q, w) in weights.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(self.row(q)) {
                *o += w * d;
            }
        }
        out
    }

    /// Largest absolute entry-wise difference to another Jacobian.
    pub fn max_abs_diff(&self, other: &Jacobian) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dispatches to the chosen backend. Parameter shift and adjoint reject
/// unsupported circuits identically (every parameterized gate must lower to a
/// Pauli rotation, which holds for the whole gate inventory by construction).
pub fn circuit_jacobian(
    window: &[f64],
    circuit: &CircuitSpec,
    params: &[f64],
    backend: GradBackend,
) -> Result<Jacobian> {
    match backend {
        GradBackend::ParamShift => param_shift_grad(window, circuit, params),
        GradBackend::Adjoint => adjoint_grad(window, circuit, params),
        GradBackend::FiniteDiff => finite_diff_grad(window, circuit, params, FD_STEP),
    }
}

/// Loss-to-parameter pullback: `Σ_q weights[q]·∂⟨Z_q⟩/∂ϑ`. The adjoint
/// backend folds the weights into a single bra and avoids materializing the
/// Jacobian; the others contract it.
pub fn circuit_vjp(
    window: &[f64],
    circuit: &CircuitSpec,
    params: &[f64],
    weights: &[f64; N_QUBITS],
    backend: GradBackend,
) -> Result<Vec<f64>> {
    match backend {
        GradBackend::Adjoint => {
            adjoint_sweep(window, circuit, params, Some(weights)).map(|jac| jac.data)
        }
        _ => Ok(circuit_jacobian(window, circuit, params, backend)?.vjp(weights)),
    }
}

/// Exact gradient via the two-point parameter-shift rule,
/// `½(f(ϑ+π/2·e_j) − f(ϑ−π/2·e_j))` per rotation occurrence.
pub fn param_shift_grad(window: &[f64], circuit: &CircuitSpec, params: &[f64]) -> Result<Jacobian> {
    check_circuit_params(circuit, params)?;
    let ops = circuit.lowered();
    let embedded = amplitude_embed(window)?;
    let mut scratch = StateVector::zero_state();
    let mut jac = Jacobian::zeros(circuit.n_params);

    for (idx, op) in ops.iter().enumerate() {
        let PrimOp::Rotation { slot, .. } = *op else {
            continue;
        };
        let plus = run_with_shift(
            &embedded,
            &ops,
            params,
            idx,
            std::f64::consts::FRAC_PI_2,
            &mut scratch,
        );
        let minus = run_with_shift(
            &embedded,
            &ops,
            params,
            idx,
            -std::f64::consts::FRAC_PI_2,
            &mut scratch,
        );
        for q in 0..N_QUBITS {
            jac.add(q, slot, 0.5 * (plus[q] - minus[q]));
        }
    }
    Ok(jac)
}

/// Evaluates the lowered circuit with occurrence `shift_idx`'s angle offset
/// by `delta`, leaving all other occurrences at their base angles.
fn run_with_shift(
    embedded: &StateVector,
    ops: &[PrimOp],
    params: &[f64],
    shift_idx: usize,
    delta: f64,
    scratch: &mut StateVector,
) -> [f64; N_QUBITS] {
    scratch.amps_mut().copy_from_slice(embedded.amplitudes());
    for (i, op) in ops.iter().enumerate() {
        match *op {
            PrimOp::Rotation { axis, qubit, slot } => {
                let theta = params[slot] + if i == shift_idx { delta } else { 0.0 };
                apply_single_qubit(scratch.amps_mut(), qubit, &rotation_matrix(axis, theta));
            }
            _ => apply_prim(scratch.amps_mut(), op, params, false),
        }
    }
    expect_all_z(scratch.amplitudes())
}

/// Exact gradient via adjoint differentiation (reverse sweep through the
/// inverted circuit). Simulator-only and valid for ideal circuits;
/// numerically identical to parameter shift.
pub fn adjoint_grad(window: &[f64], circuit: &CircuitSpec, params: &[f64]) -> Result<Jacobian> {
    adjoint_sweep(window, circuit, params, None)
}

/// Shared adjoint implementation. With `weights == None` it drags one bra
/// per qubit observable and returns the full 5×n Jacobian; with weights it
/// drags the single combined bra Σ_q w_q·Z_q|ψ⟩ and returns the contracted
/// gradient in a 1×n Jacobian.
fn adjoint_sweep(
    window: &[f64],
    circuit: &CircuitSpec,
    params: &[f64],
    weights: Option<&[f64; N_QUBITS]>,
) -> Result<Jacobian> {
    check_circuit_params(circuit, params)?;
    let ops = circuit.lowered();

    let mut ket = amplitude_embed(window)?;
    for op in &ops {
        apply_prim(ket.amps_mut(), op, params, false);
    }

    // One bra per observable: bra_q = Z_q|ψ⟩ (Z is diagonal, so this is an
    // element-wise sign flip). With upstream weights, a single combined bra.
    let n_obs = if weights.is_some() { 1 } else { N_QUBITS };
    let mut bras: Vec<[Complex64; DIM]> = Vec::with_capacity(n_obs);
    match weights {
        Some(w) => {
            let mut bra = *ket.amplitudes();
            for (i, amp) in bra.iter_mut().enumerate() {
                let mut factor = 0.0;
                for (q, wq) in w.iter().enumerate() {
                    factor += if i & qubit_mask(q) == 0 { *wq } else { -*wq };
                }
                *amp *= factor;
            }
            bras.push(bra);
        }
        None => {
            for q in 0..N_QUBITS {
                let mut bra = *ket.amplitudes();
                let mask = qubit_mask(q);
                for (i, amp) in bra.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *amp = -*amp;
                    }
                }
                bras.push(bra);
            }
        }
    }

    let mut jac = Jacobian {
        n_params: circuit.n_params,
        data: vec![0.0; n_obs * circuit.n_params],
    };
    let mut d_ket = [Complex64::ZERO; DIM];

    for op in ops.iter().rev() {
        // ket becomes the state *before* this op.
        apply_prim(ket.amps_mut(), op, params, true);

        if let PrimOp::Rotation { axis, qubit, slot } = *op {
            d_ket.copy_from_slice(ket.amplitudes());
            apply_single_qubit(
                &mut d_ket,
                qubit,
                &rotation_matrix_deriv(axis, params[slot]),
            );
            for (row, bra) in bras.iter().enumerate() {
                let mut inner = Complex64::ZERO;
                for (b, d) in bra.iter().zip(&d_ket) {
                    inner += b.conj() * d;
                }
                jac.data[row * circuit.n_params + slot] += 2.0 * inner.re;
            }
        }

        for bra in &mut bras {
            apply_prim(bra, op, params, true);
        }
    }
    Ok(jac)
}

/// Central-difference Jacobian with step `h` on the flat parameter vector.
pub fn finite_diff_grad(
    window: &[f64],
    circuit: &CircuitSpec,
    params: &[f64],
    h: f64,
) -> Result<Jacobian> {
    check_circuit_params(circuit, params)?;
    let ops = circuit.lowered();
    let embedded = amplitude_embed(window)?;
    let mut scratch = StateVector::zero_state();
    let mut shifted = params.to_vec();
    let mut jac = Jacobian::zeros(circuit.n_params);
    for j in 0..circuit.n_params {
        shifted[j] = params[j] + h;
        let plus = crate::sim::run_lowered(&embedded, &ops, &shifted, &mut scratch);
        shifted[j] = params[j] - h;
        let minus = crate::sim::run_lowered(&embedded, &ops, &shifted, &mut scratch);
        shifted[j] = params[j];
        for q in 0..N_QUBITS {
            jac.add(q, j, (plus[q] - minus[q]) / (2.0 * h));
        }
    }
    Ok(jac)
}

/// Full circuit evaluations consumed by one parameter-shift Jacobian: two per
/// rotation occurrence (equal to `2·n_params` when slots are unique).
pub fn param_shift_evaluations(circuit: &CircuitSpec) -> usize {
    2 * circuit.rotation_count()
}

/// Full passes over the gate list consumed by one adjoint Jacobian: the
/// forward pass, the ket reversal, and one bra reversal per observable —
/// independent of the parameter count.
pub fn adjoint_sweeps(_circuit: &CircuitSpec) -> usize {
    2 + N_QUBITS
}

fn check_circuit_params(circuit: &CircuitSpec, params: &[f64]) -> Result<()> {
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
