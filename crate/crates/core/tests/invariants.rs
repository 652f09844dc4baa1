//! Property tests over randomly generated inputs.

use proptest::prelude::*;

use quanv_core::ansatz::build_random;
use quanv_core::loss::{combined_loss, decode, hungarian_loss, TargetLabel};
use quanv_core::model::ModelParams;
use quanv_core::sim::{amplitude_embed, readout_damping, run_circuit, NoiseConfig, DIM};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any embedded window followed by any gate sequence keeps the state on
    /// the unit sphere, and every expectation stays in [−1, 1].
    #[test]
    fn norm_preserved_through_random_circuits(
        seed in 0u64..1_000_000,
        gate_count in 1usize..48,
        window in prop::collection::vec(0.0f64..1.0, DIM),
    ) {
        let circuit = build_random(seed, gate_count).unwrap();
        let params: Vec<f64> = (0..circuit.n_params)
            .map(|i| ((seed as f64 + i as f64) * 0.7).sin() * 3.0)
            .collect();
        let embedded = amplitude_embed(&window).unwrap();
        prop_assert!((embedded.norm_sqr() - 1.0).abs() < 1e-10);
        let mut state = embedded;
        for gate in &circuit.gates {
            state = quanv_core::sim::apply_gate(&state, gate, &params).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
        let z = run_circuit(&window, &circuit, &params, &NoiseConfig::ideal()).unwrap();
        prop_assert!(z.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
    }

    /// Damped expectations live in [2γ − 1, 1].
    #[test]
    fn damping_respects_shifted_bounds(z in -1.0f64..=1.0, gamma in 0.0f64..=1.0) {
        let damped = readout_damping(z, gamma);
        prop_assert!(damped >= 2.0 * gamma - 1.0 - 1e-12);
        prop_assert!(damped <= 1.0 + 1e-12);
    }

    /// Permuting either argument's slots never changes the assignment loss.
    #[test]
    fn hungarian_loss_permutation_invariant(
        a in prop::array::uniform5(0.0f64..1.0),
        b in prop::array::uniform5(0.0f64..1.0),
        perm_seed in 0usize..120,
    ) {
        let perm = nth_permutation(perm_seed);
        let base = hungarian_loss(&a, &b);
        let a_perm: [f64; 5] = std::array::from_fn(|i| a[perm[i]]);
        prop_assert!((hungarian_loss(&a_perm, &b) - base).abs() < 1e-12);
        let b_perm: [f64; 5] = std::array::from_fn(|i| b[perm[i]]);
        prop_assert!((hungarian_loss(&a, &b_perm) - base).abs() < 1e-12);
    }

    /// The combined loss is nonnegative and its decode is consistent with
    /// the 0.5 threshold.
    #[test]
    fn loss_nonnegative_and_decode_consistent(
        pred in prop::array::uniform10(0.0f64..1.0),
        count in 0usize..=5,
        positions in prop::array::uniform5(0.0f64..1.0),
    ) {
        let mut mask = [0u8; 5];
        let mut pos = [0.0; 5];
        for i in 0..count {
            mask[i] = 1;
            pos[i] = positions[i];
        }
        let target = TargetLabel::new(mask, pos).unwrap();
        let (loss, _) = combined_loss(&pred, &target);
        prop_assert!(loss >= 0.0);

        let decoded = decode(&pred);
        let expected: usize = (0..5).filter(|&i| pred[i] >= 0.5).count();
        prop_assert_eq!(decoded.count, expected);
        for i in 0..5 {
            if pred[i] >= 0.5 {
                prop_assert_eq!(decoded.positions[i], pred[5 + i]);
            } else {
                prop_assert_eq!(decoded.positions[i], 0.0);
            }
        }
    }

    /// Flat parameter views round-trip losslessly for any weight shape.
    #[test]
    fn flat_view_round_trips(
        frontend_len in 1usize..64,
        fill in prop::collection::vec(-10.0f64..10.0, 16),
    ) {
        let mut params = ModelParams::zeros(frontend_len);
        let mut flat = params.to_flat();
        for (i, x) in flat.iter_mut().enumerate() {
            *x = fill[i % fill.len()] + i as f64 * 1e-9;
        }
        params.from_flat(&flat).unwrap();
        prop_assert_eq!(params.to_flat(), flat);
    }
}

/// Deterministic n-th permutation of 0..5 (Lehmer code).
fn nth_permutation(mut n: usize) -> [usize; 5] {
    let mut pool: Vec<usize> = (0..5).collect();
    let mut out = [0usize; 5];
    let mut radix = 24; // 4!
    for (i, slot) in out.iter_mut().enumerate() {
        let idx = (n / radix).min(pool.len() - 1);
        *slot = pool.remove(idx);
        n %= radix;
        if i < 4 {
            radix /= 4 - i;
        }
    }
    out
}
