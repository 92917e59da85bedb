//! Small dense matrix helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-item seed derived from a run seed (splitmix64 finaliser).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Gram matrix of `ω = Σ dx_i∧dy_i`: `ω(u, v) = uᵀ Ω v`.
pub fn omega_matrix(n: usize) -> Mat {
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

/// The standard complex structure `∂x ↦ ∂y`, `∂y ↦ −∂x`.
pub fn standard_j(n: usize) -> Mat {
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(n + i, i)] = 1.0;
        m[(i, n + i)] = -1.0;
    }
    m
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Apply `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let eig = symmetrize(m).symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn exp_symmetric(m: &Mat) -> Mat {
    sym_apply(m, f64::exp)
}

pub fn min_sym_eigenvalue(m: &Mat) -> f64 {
    symmetrize(m).symmetric_eigen().eigenvalues.min()
}

pub fn sorted_sym_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_symmetric<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Mat {
    symmetrize(&gaussian_matrix(n, n, rng)) * scale
}

/// Symmetric element `[[A, B], [B, −A]]` of the symplectic Lie algebra.
pub fn sp_symmetric_block(a: &Mat, b: &Mat) -> Mat {
    let n = a.nrows();
    let mut x = Mat::zeros(2 * n, 2 * n);
    x.view_mut((0, 0), (n, n)).copy_from(a);
    x.view_mut((0, n), (n, n)).copy_from(b);
    x.view_mut((n, 0), (n, n)).copy_from(b);
    x.view_mut((n, n), (n, n)).copy_from(&(-a));
    x
}

pub fn random_sp_symmetric<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Mat {
    let a = random_symmetric(n, scale, rng);
    let b = random_symmetric(n, scale, rng);
    sp_symmetric_block(&a, &b)
}

/// Haar-distributed unitary matrix (Gram–Schmidt on complex Gaussian columns).
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut u = CMat::from_fn(n, n, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    for j in 0..n {
        for i in 0..j {
            let proj: C64 = (0..n).map(|r| u[(r, i)].conj() * u[(r, j)]).sum();
            for r in 0..n {
                let v = u[(r, i)];
                u[(r, j)] -= proj * v;
            }
        }
        let norm = (0..n).map(|r| u[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            u[(r, j)] /= norm;
        }
    }
    u
}

/// The real form `[[A, −B], [B, A]]` of `U = A + iB`; orthogonal and
/// symplectic when `U` is unitary.
pub fn unitary_to_real(u: &CMat) -> Mat {
    let n = u.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = u[(i, j)];
            m[(i, j)] = z.re;
            m[(i, n + j)] = -z.im;
            m[(n + i, j)] = z.im;
            m[(n + i, n + j)] = z.re;
        }
    }
    m
}

/// Random symplectic matrix `u · exp(X)` with `u` orthogonal-symplectic and
/// `X` a symmetric element of `sp` with entries of size about `scale`.
pub fn random_symplectic<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Mat {
    let u = unitary_to_real(&haar_unitary(n, rng));
    let x = random_sp_symmetric(n, scale, rng);
    u * exp_symmetric(&x)
}

/// Determinant of a small square matrix given in row-major order.
pub fn small_det(buf: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = buf[col * k + col].abs();
        for r in col + 1..k {
            let v = buf[r * k + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..k {
                buf.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = buf[col * k + col];
        det *= p;
        for r in col + 1..k {
            let f = buf[r * k + col] / p;
            if f != 0.0 {
                for c in col + 1..k {
                    buf[r * k + c] -= f * buf[col * k + c];
                }
            }
        }
    }
    det
}

/// Complex determinant of a small square matrix given in row-major order.
pub fn small_det_complex(buf: &mut [C64], k: usize) -> C64 {
    let mut det = C64::new(1.0, 0.0);
    for col in 0..k {
        let mut piv = col;
        let mut best = buf[col * k + col].norm();
        for r in col + 1..k {
            let v = buf[r * k + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..k {
                buf.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = buf[col * k + col];
        det *= p;
        for r in col + 1..k {
            let f = buf[r * k + col] / p;
            for c in col + 1..k {
                let v = buf[col * k + c];
                buf[r * k + c] -= f * v;
            }
        }
    }
    det
}

/// Roots of `a_0 + a_1 z + … + a_d z^d` (`a_d ≠ 0`) as companion-matrix
/// eigenvalues.
pub fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    // Zero roots are split off exactly; the QR iteration handles them poorly.
    if let Some(m) = coeffs.iter().position(|c| *c != C64::new(0.0, 0.0)).filter(|&m| m > 0) {
        let mut roots = vec![C64::new(0.0, 0.0); m];
        roots.extend(polynomial_roots(&coeffs[m..]));
        return roots;
    }
    let lead = coeffs[d];
    let mut comp = CMat::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -coeffs[i] / lead;
    }
    match nalgebra::linalg::Schur::try_new(comp.clone(), 1e-15, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..d).map(|i| t[(i, i)]).collect()
        }
        None => comp.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default(),
    }
}

/// Frobenius norm of `m − m'`.
pub fn dist(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm()
}

pub fn column(m: &Mat, j: usize) -> DVector<f64> {
    m.column(j).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        let n = 2;
        let om = omega_matrix(n);
        let j = standard_j(n);
        assert!(dist(&(&om * &j), &Mat::identity(4, 4)) < 1e-15);
        assert!(dist(&(&j * &j), &(-Mat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn random_symplectic_preserves_omega() {
        let mut rng = rng_from_seed(3);
        for n in 1..=3 {
            let g = random_symplectic(n, 0.7, &mut rng);
            let om = omega_matrix(n);
            assert!(dist(&(g.transpose() * &om * &g), &om) < 1e-10);
        }
    }

    #[test]
    fn dets() {
        let mut a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        assert!((small_det(&mut a, 3) - 18.0).abs() < 1e-12);
        let mut b = vec![0.0, 1.0, 1.0, 0.0];
        assert_eq!(small_det(&mut b, 2), -1.0);
    }

    #[test]
    fn roots_of_cubic() {
        let c = |x: f64| C64::new(x, 0.0);
        let roots = polynomial_roots(&[c(2.0), c(0.0), c(0.0), c(1.0)]);
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!((r.norm() - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
            assert!((r * r * r + c(2.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
