//! P1 diagonalization checked against the independent brute-force oracle.

mod common;

use common::{p1_oracle, JT_AXES};
use nvmag_core::constants::TESLA_PER_GAUSS;
use nvmag_core::spin::{p1_eigenvalues, p1_hamiltonian, BiasField, P1Constants};

fn oracle_eigs(consts: &P1Constants, bias: [f64; 3], axis_index: usize) -> [f64; 4] {
    let h = p1_oracle::hamiltonian(
        consts.a_parallel_hz,
        consts.a_perp_hz,
        consts.zeeman_hz_per_tesla,
        bias,
        JT_AXES[axis_index - 1],
    );
    p1_oracle::eigenvalues(&h)
}

#[test]
fn reference_field_matches_oracle_to_1e9_relative() {
    let consts = P1Constants::default();
    let bias = [2.23 * TESLA_PER_GAUSS, 0.0, 0.0];
    for axis_index in 1..=4 {
        let got = p1_eigenvalues(&consts, &BiasField::new(bias), axis_index).unwrap();
        let expect = oracle_eigs(&consts, bias, axis_index);
        for (g, e) in got.iter().zip(&expect) {
            let rel = ((g - e) / e.abs().max(1.0)).abs();
            assert!(
                rel < 1e-9,
                "axis {axis_index}: {g} vs oracle {e} (rel {rel:.2e})"
            );
        }
    }
}

#[test]
fn random_fields_match_oracle() {
    // a few deterministic pseudo-random field vectors, gauss scale
    let consts = P1Constants::default();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64 - 0.5) * 10.0 * TESLA_PER_GAUSS
    };
    for _ in 0..12 {
        let bias = [next(), next(), next()];
        for axis_index in 1..=4 {
            let got = p1_eigenvalues(&consts, &BiasField::new(bias), axis_index).unwrap();
            let expect = oracle_eigs(&consts, bias, axis_index);
            for (g, e) in got.iter().zip(&expect) {
                let rel = ((g - e) / e.abs().max(1.0)).abs();
                assert!(rel < 1e-9, "B {bias:?}: {g} vs {e}");
            }
        }
    }
}

#[test]
fn principal_z_field_matches_symbolic_construction() {
    // Field along the JT axis: H is block-diagonal in the principal frame
    // with closed-form eigenvalues; compare both implementation and oracle
    // against the symbolic values to 1e-12 relative.
    let consts = P1Constants::default();
    let b0 = 2.23 * TESLA_PER_GAUSS;
    let axis_index = 1;
    let axis = {
        let a = JT_AXES[0];
        let n = 3f64.sqrt();
        [a[0] / n * b0, a[1] / n * b0, a[2] / n * b0]
    };
    let (ap, aper, gz) = (
        consts.a_parallel_hz,
        consts.a_perp_hz,
        consts.zeeman_hz_per_tesla,
    );
    let w = gz * b0;
    // basis |m_s m_I⟩: |↑↑⟩,|↓↓⟩ energies ±w/2 + ap/4; the m=0 block mixes
    let e_pp = 0.5 * w + 0.25 * ap;
    let e_mm = -0.5 * w + 0.25 * ap;
    let disc = (w * w + aper * aper).sqrt();
    let e_mid1 = -0.25 * ap + 0.5 * disc;
    let e_mid2 = -0.25 * ap - 0.5 * disc;
    let mut symbolic = [e_pp, e_mm, e_mid1, e_mid2];
    symbolic.sort_by(f64::total_cmp);

    let got = p1_eigenvalues(&consts, &BiasField::new(axis), axis_index).unwrap();
    for (g, e) in got.iter().zip(&symbolic) {
        assert!(((g - e) / e).abs() < 1e-12, "impl {g} vs symbolic {e}");
    }
    let oracle = oracle_eigs(&consts, axis, axis_index);
    for (g, e) in oracle.iter().zip(&symbolic) {
        assert!(((g - e) / e).abs() < 1e-10, "oracle {g} vs symbolic {e}");
    }
}

#[test]
fn hamiltonian_matrices_agree_entrywise_after_frame_change() {
    // The implementation works in the principal frame, the oracle in the
    // cube frame; their spectra agree, and the invariants (trace, Frobenius
    // norm) match entrywise-derived values to 1e-12 relative.
    let consts = P1Constants::default();
    let bias = [
        1.1 * TESLA_PER_GAUSS,
        -0.4 * TESLA_PER_GAUSS,
        2.9 * TESLA_PER_GAUSS,
    ];
    for axis_index in 1..=4 {
        let h_impl = p1_hamiltonian(&consts, &BiasField::new(bias), axis_index).unwrap();
        let h_oracle = p1_oracle::hamiltonian(
            consts.a_parallel_hz,
            consts.a_perp_hz,
            consts.zeeman_hz_per_tesla,
            bias,
            JT_AXES[axis_index - 1],
        );
        let trace_impl: f64 = (0..4).map(|i| h_impl[(i, i)].re).sum();
        let trace_oracle: f64 = (0..4).map(|i| h_oracle[i][i].0).sum();
        assert!((trace_impl - trace_oracle).abs() < 1e-3); // both ~0 in Hz
        let frob_impl: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| h_impl[(i, j)].norm_sqr())
            .sum();
        let frob_oracle: f64 = h_oracle
            .iter()
            .flatten()
            .map(|(re, im)| re * re + im * im)
            .sum();
        assert!(
            ((frob_impl - frob_oracle) / frob_oracle).abs() < 1e-12,
            "axis {axis_index}: Frobenius {frob_impl} vs {frob_oracle}"
        );
    }
}
