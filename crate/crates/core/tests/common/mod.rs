//! Shared test oracles, independent of the library implementation paths.
#![allow(clippy::needless_range_loop)]

/// Brute-force P1 eigenvalues: the Hamiltonian is assembled in the *cube*
/// frame with the hyperfine tensor rotated (A = Rᵀ·diag(A⊥,A⊥,A∥)·R) from
/// explicit element-wise 4×4 construction, then diagonalized with a
/// hand-rolled Jacobi sweep on the real 8×8 embedding of the complex
/// Hermitian matrix. No code is shared with `nvmag_core::spin`.
pub mod p1_oracle {
    /// Complex value as (re, im).
    type C = (f64, f64);

    const ZERO: C = (0.0, 0.0);

    fn cadd(a: C, b: C) -> C {
        (a.0 + b.0, a.1 + b.1)
    }

    fn cscale(s: f64, a: C) -> C {
        (s * a.0, s * a.1)
    }

    /// Spin-1/2 operator matrices in the |↑⟩, |↓⟩ basis as element tables.
    fn sx(i: usize, j: usize) -> C {
        if i != j {
            (0.5, 0.0)
        } else {
            ZERO
        }
    }

    fn sy(i: usize, j: usize) -> C {
        match (i, j) {
            (0, 1) => (0.0, -0.5),
            (1, 0) => (0.0, 0.5),
            _ => ZERO,
        }
    }

    fn sz(i: usize, j: usize) -> C {
        if i == j {
            (if i == 0 { 0.5 } else { -0.5 }, 0.0)
        } else {
            ZERO
        }
    }

    fn spin_elem(axis: usize, i: usize, j: usize) -> C {
        match axis {
            0 => sx(i, j),
            1 => sy(i, j),
            _ => sz(i, j),
        }
    }

    /// Rows of an orthonormal frame with ẑ along `axis` (same convention as
    /// the implementation's frame so both describe the same physical
    /// defect, but used differently: here it rotates the tensor, not the
    /// field).
    fn frame(axis: [f64; 3]) -> [[f64; 3]; 3] {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let z = [axis[0] / n, axis[1] / n, axis[2] / n];
        let seed = if z[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let mut x = [
            seed[1] * z[2] - seed[2] * z[1],
            seed[2] * z[0] - seed[0] * z[2],
            seed[0] * z[1] - seed[1] * z[0],
        ];
        let xn = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        x = [x[0] / xn, x[1] / xn, x[2] / xn];
        let y = [
            z[1] * x[2] - z[2] * x[1],
            z[2] * x[0] - z[0] * x[2],
            z[0] * x[1] - z[1] * x[0],
        ];
        [x, y, z]
    }

    /// Hyperfine tensor in the cube frame: Rᵀ·diag(a_perp, a_perp, a_par)·R.
    fn hyperfine_cube(a_par: f64, a_perp: f64, axis: [f64; 3]) -> [[f64; 3]; 3] {
        let r = frame(axis);
        let diag = [a_perp, a_perp, a_par];
        let mut out = [[0.0; 3]; 3];
        for (a, row_a) in out.iter_mut().enumerate() {
            for (b, slot) in row_a.iter_mut().enumerate() {
                *slot = (0..3).map(|c| r[c][a] * diag[c] * r[c][b]).sum();
            }
        }
        out
    }

    /// 4×4 complex Hermitian P1 Hamiltonian in the cube frame,
    /// basis |m_s, m_I⟩ with electron first.
    pub fn hamiltonian(
        a_par_hz: f64,
        a_perp_hz: f64,
        zeeman_hz_per_tesla: f64,
        bias_tesla: [f64; 3],
        jt_axis: [f64; 3],
    ) -> [[C; 4]; 4] {
        let a = hyperfine_cube(a_par_hz, a_perp_hz, jt_axis);
        let mut h = [[ZERO; 4]; 4];
        for row in 0..4 {
            let (es_r, ns_r) = (row / 2, row % 2);
            for col in 0..4 {
                let (es_c, ns_c) = (col / 2, col % 2);
                let mut elem = ZERO;
                // electron Zeeman ⊗ nuclear identity
                if ns_r == ns_c {
                    for (axis, &b) in bias_tesla.iter().enumerate() {
                        elem = cadd(
                            elem,
                            cscale(zeeman_hz_per_tesla * b, spin_elem(axis, es_r, es_c)),
                        );
                    }
                }
                // S·A·I
                for (ai, row_a) in a.iter().enumerate() {
                    for (bi, &a_ab) in row_a.iter().enumerate() {
                        let s = spin_elem(ai, es_r, es_c);
                        let n = spin_elem(bi, ns_r, ns_c);
                        // (s.0 + i s.1)(n.0 + i n.1)
                        let prod = (s.0 * n.0 - s.1 * n.1, s.0 * n.1 + s.1 * n.0);
                        elem = cadd(elem, cscale(a_ab, prod));
                    }
                }
                h[row][col] = elem;
            }
        }
        h
    }

    /// Eigenvalues of a 4×4 complex Hermitian matrix via cyclic Jacobi on
    /// the real symmetric 8×8 embedding [[X, −Y], [Y, X]]; each eigenvalue
    /// appears twice.
    pub fn eigenvalues(h: &[[C; 4]; 4]) -> [f64; 4] {
        let mut m = [[0.0f64; 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                let (re, im) = h[i][j];
                m[i][j] = re;
                m[i + 4][j + 4] = re;
                m[i + 4][j] = im;
                m[i][j + 4] = -im;
            }
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..8 {
                for q in (p + 1)..8 {
                    off += m[p][q] * m[p][q];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..8 {
                for q in (p + 1)..8 {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (2.0 * m[p][q]).atan2(m[q][q] - m[p][p]);
                    let (s, c) = theta.sin_cos();
                    for k in 0..8 {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..8 {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut diag: Vec<f64> = (0..8).map(|i| m[i][i]).collect();
        diag.sort_by(f64::total_cmp);
        // duplicated pairs: take every other
        [diag[0], diag[2], diag[4], diag[6]]
    }
}

/// 1/sqrt(3)-scaled ⟨111⟩ axes, duplicated from first principles for test
/// independence.
pub const JT_AXES: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];
