//! P1-center (substitutional nitrogen, S = 1/2, 15N I = 1/2) transition
//! frequencies and dipole matrix elements.
//!
//! For each of the four ⟨111⟩ Jahn-Teller orientations the spin Hamiltonian
//! is built in that orientation's principal frame,
//!
//!   H/h = (gμ_B/h)·B₀·S + A_∥·S_z·I_z + A_⊥·(S_x·I_x + S_y·I_y),
//!
//! diagonalized exactly, and all eigenenergy differences are reported. The
//! allowedness weight of a transition is |⟨i|S_t|j⟩|² where S_t is the
//! electron spin operator along the *transverse* part of the drive-field
//! direction in the principal frame; the longitudinal drive component flips
//! no electron spin, and including it would mark the Δm = 0 transition
//! between the two m_s+m_I = 0 eigenstates (≈114 MHz at 2.23 G) as strongly
//! allowed, which is not observed.

use super::{BiasField, P1Constants, AXES_111};
use crate::{Error, Result};
use nalgebra::{Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// One merged P1 transition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct P1Transition {
    pub frequency_hz: f64,
    /// Dipole allowedness, normalized so the strongest transition is 1.
    pub weight: f64,
    /// weight ≥ 0.1 × max
    pub allowed: bool,
}

/// Spin-1/2 operators (x, y, z), in units of ħ.
fn spin_half() -> [nalgebra::Matrix2<C64>; 3] {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    let z = C64::new(0.0, 0.0);
    [
        nalgebra::Matrix2::new(z, h, h, z),
        nalgebra::Matrix2::new(z, -ih, ih, z),
        nalgebra::Matrix2::new(h, z, z, -h),
    ]
}

/// Kronecker product of two 2×2 complex matrices.
fn kron2(a: &nalgebra::Matrix2<C64>, b: &nalgebra::Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Orthonormal frame (rows x̂, ŷ, ẑ) with ẑ along the given axis.
fn principal_frame(axis: [f64; 3]) -> [Vector3<f64>; 3] {
    let z = Vector3::from(axis).normalize();
    let seed = if z.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let x = seed.cross(&z).normalize();
    let y = z.cross(&x);
    [x, y, z]
}

/// Electron spin operator along a (not necessarily unit) direction in the
/// principal frame, tensored with the nuclear identity.
fn electron_operator(direction: Vector3<f64>) -> Matrix4<C64> {
    let s = spin_half();
    let id = nalgebra::Matrix2::identity();
    let mut out = Matrix4::zeros();
    for (c, op) in direction.iter().zip(s.iter()) {
        out += kron2(op, &id) * C64::new(*c, 0.0);
    }
    out
}

/// P1 spin Hamiltonian for one Jahn-Teller orientation, Hz units, in the
/// S = 1/2 ⊗ I = 1/2 product basis of that orientation's principal frame.
///
/// `jt_axis_index` is 1-based into the four ⟨111⟩ axes.
pub fn p1_hamiltonian(
    consts: &P1Constants,
    bias: &BiasField,
    jt_axis_index: usize,
) -> Result<Matrix4<C64>> {
    consts.validate()?;
    if !(1..=4).contains(&jt_axis_index) {
        return Err(Error::InvalidParameter(format!(
            "Jahn-Teller axis index must be 1..=4, got {jt_axis_index}"
        )));
    }
    let frame = principal_frame(AXES_111[jt_axis_index - 1]);
    let b = Vector3::from(bias.vector_tesla);
    let b_principal = Vector3::new(frame[0].dot(&b), frame[1].dot(&b), frame[2].dot(&b));

    let s = spin_half();
    let zeeman = electron_operator(b_principal) * C64::new(consts.zeeman_hz_per_tesla, 0.0);
    let hyperfine = kron2(&s[2], &s[2]) * C64::new(consts.a_parallel_hz, 0.0)
        + (kron2(&s[0], &s[0]) + kron2(&s[1], &s[1])) * C64::new(consts.a_perp_hz, 0.0);
    Ok(zeeman + hyperfine)
}

/// Sorted eigenvalues (Hz) of one orientation's Hamiltonian.
pub fn p1_eigenvalues(
    consts: &P1Constants,
    bias: &BiasField,
    jt_axis_index: usize,
) -> Result<[f64; 4]> {
    let h = p1_hamiltonian(consts, bias, jt_axis_index)?;
    let eig = h.symmetric_eigen();
    let mut vals = [
        eig.eigenvalues[0],
        eig.eigenvalues[1],
        eig.eigenvalues[2],
        eig.eigenvalues[3],
    ];
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// All P1 transitions for a drive field along `drive_axis` (cube frame),
/// merged over the four Jahn-Teller orientations, sorted by frequency, with
/// weights normalized to a maximum of 1.
pub fn p1_transitions(
    consts: &P1Constants,
    bias: &BiasField,
    drive_axis: [f64; 3],
) -> Result<Vec<P1Transition>> {
    let norm = (drive_axis.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if !((norm - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "drive axis must be a unit vector, |d| = {norm}"
        )));
    }
    let drive = Vector3::from(drive_axis);

    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(24);
    for axis_index in 1..=4 {
        let h = p1_hamiltonian(consts, bias, axis_index)?;
        let eig = h.symmetric_eigen();
        let frame = principal_frame(AXES_111[axis_index - 1]);
        let d_principal = Vector3::new(
            frame[0].dot(&drive),
            frame[1].dot(&drive),
            frame[2].dot(&drive),
        );
        // Transverse projection of the drive in the principal frame.
        let s_t = electron_operator(Vector3::new(d_principal.x, d_principal.y, 0.0));
        for i in 0..4 {
            for j in (i + 1)..4 {
                let f = (eig.eigenvalues[j] - eig.eigenvalues[i]).abs();
                let vi = eig.eigenvectors.column(i);
                let vj = eig.eigenvectors.column(j);
                let elem: C64 = (vi.adjoint() * s_t * vj)[(0, 0)];
                raw.push((f, elem.norm_sqr()));
            }
        }
    }

    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Merge orientation-degenerate frequencies (1 Hz window, far below any
    // physical splitting in scope).
    let mut merged: Vec<(f64, f64, usize)> = Vec::new();
    for (f, w) in raw {
        match merged.last_mut() {
            Some((f0, w0, n)) if (f - *f0 / *n as f64).abs() <= 1.0 => {
                *f0 += f;
                *w0 += w;
                *n += 1;
            }
            _ => merged.push((f, w, 1)),
        }
    }
    let max_w = merged.iter().map(|m| m.1).fold(0.0, f64::max);
    if max_w == 0.0 {
        return Err(Error::InvalidParameter(
            "drive axis produces no transverse coupling on any orientation".into(),
        ));
    }
    Ok(merged
        .into_iter()
        .map(|(fsum, w, n)| {
            let weight = w / max_w;
            P1Transition {
                frequency_hz: fsum / n as f64,
                weight,
                allowed: weight >= 0.1,
            }
        })
        .collect())
}
