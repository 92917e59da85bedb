//! The Lagrangian Grassmannian: frames, the phase loop and the minimum of
//! `|Ω|` over Lagrangian planes.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{Blade, ExteriorForm, Multivector, C64};
use crate::linalg::{self, CMat, Mat};

/// Default number of restarts for [`min_abs_on_lgr`].
pub const DEFAULT_RESTARTS: usize = 64;

/// Maximal bisection depth when unwrapping the phase loop.
pub const MAX_WINDING_DEPTH: u32 = 20;

/// A basis of a Lagrangian subspace, stored as the columns of a `2n × n`
/// matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    half_dim: usize,
    matrix: Mat,
}

impl LagrangianFrame {
    pub fn new(matrix: Mat) -> Result<Self> {
        let (rows, n) = matrix.shape();
        if n == 0 || rows != 2 * n {
            return Err(Error::Shape(format!("expected a 2n x n matrix, got {rows}x{n}")));
        }
        let scale = matrix.norm().max(f64::MIN_POSITIVE);
        let iso = (matrix.transpose() * linalg::omega_matrix(n) * &matrix).norm();
        if iso > 1e-8 * scale * scale {
            return Err(Error::NotLagrangian(format!("isotropy residual {iso:.3e}")));
        }
        let sv = matrix.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if !(smin > 1e-10 * smax) {
            return Err(Error::NotLagrangian(format!("rank deficient (smallest singular value {smin:.3e})")));
        }
        Ok(Self { half_dim: n, matrix })
    }

    /// `[I; 0]`, the span of the `x`-axes.
    pub fn standard(n: usize) -> Self {
        let mut m = Mat::zeros(2 * n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        Self { half_dim: n, matrix: m }
    }

    /// `[Re U; Im U]` for a unitary `U`; orthonormal by construction.
    pub fn from_unitary(u: &CMat) -> Self {
        let n = u.nrows();
        let m = Mat::from_fn(2 * n, n, |r, c| if r < n { u[(r, c)].re } else { u[(r - n, c)].im });
        Self { half_dim: n, matrix: m }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Same subspace, orthonormal columns.
    pub fn orthonormalized(&self) -> Self {
        let q = self.matrix.clone().qr().q();
        Self { half_dim: self.half_dim, matrix: q }
    }

    /// `exp(θJ)` applied to every column.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = crate::symplectic::ComplexStructure::standard(self.half_dim).rotation(theta);
        Self { half_dim: self.half_dim, matrix: r * &self.matrix }
    }
}

/// `v_1 ∧ … ∧ v_n` for the columns of the frame.
pub fn decomposable_from_frame(frame: &LagrangianFrame) -> Multivector {
    let n = frame.half_dim();
    let cols = (0..n).map(|j| {
        let v: Vec<f64> = frame.matrix().column(j).iter().copied().collect();
        Multivector::from_vector(n, &v).expect("column has length 2n")
    });
    crate::exterior::wedge_all(n, cols)
}

/// `Ω(v_1, …, v_n)` for the columns `v_j` of `frame`, computed from minors.
pub fn evaluate_on_matrix(omega: &ExteriorForm, frame: &Mat) -> C64 {
    let k = omega.degree();
    debug_assert_eq!(frame.ncols(), k);
    let mut buf = vec![0.0; k * k];
    let mut acc = C64::default();
    for (blade, c) in omega.terms() {
        for (r, i) in blade.indices().enumerate() {
            for s in 0..k {
                buf[r * k + s] = frame[(i, s)];
            }
        }
        acc += c * linalg::small_det(&mut buf, k);
    }
    acc
}

pub fn evaluate_on_frame(omega: &ExteriorForm, frame: &LagrangianFrame) -> Result<C64> {
    if omega.half_dim() != frame.half_dim() {
        return Err(Error::HalfDimMismatch(omega.half_dim(), frame.half_dim()));
    }
    if omega.degree() != frame.half_dim() {
        return Err(Error::DegreeMismatch { expected: frame.half_dim(), found: omega.degree() });
    }
    Ok(evaluate_on_matrix(omega, frame.matrix()))
}

/// Frame of a Haar-random unitary applied to `[I; 0]`.
pub fn sample_lagrangian(n: usize, seed: u64) -> LagrangianFrame {
    let mut rng = linalg::rng_from_seed(seed);
    LagrangianFrame::from_unitary(&linalg::haar_unitary(n, &mut rng))
}

/// One point of the phase loop.
#[derive(Clone, Copy, Debug)]
pub struct PhaseSample {
    pub theta: f64,
    pub value: C64,
    /// `arg(value)` reduced to `[0, π)`.
    pub phase: f64,
}

/// Values of `Ω` along `θ ↦ exp(θJ)F` at `samples` equally spaced angles.
pub fn phase_samples(omega: &ExteriorForm, frame: &LagrangianFrame, samples: usize) -> Result<Vec<PhaseSample>> {
    (0..samples)
        .map(|i| {
            let theta = TAU * i as f64 / samples as f64;
            let value = evaluate_on_frame(omega, &frame.rotated(theta))?;
            Ok(PhaseSample { theta, value, phase: value.arg().rem_euclid(PI) })
        })
        .collect()
}

/// Winding number of `θ ↦ Ω(exp(θJ)F)` over `[0, 2π]`.
///
/// Consecutive samples whose phase differs by more than `π/2` are bisected,
/// up to [`MAX_WINDING_DEPTH`] levels.
pub fn loop_winding(omega: &ExteriorForm, frame: &LagrangianFrame, samples: usize) -> Result<i64> {
    evaluate_on_frame(omega, frame)?;
    let samples = samples.max(8);
    let floor = 1e-12 * omega.norm();
    let eval = |theta: f64| -> Result<C64> {
        let v = evaluate_on_matrix(omega, frame.rotated(theta).matrix());
        if v.norm() <= floor {
            return Err(Error::NearZero { theta, modulus: v.norm() });
        }
        Ok(v)
    };
    let mut total = 0.0;
    let mut prev_theta = 0.0;
    let mut prev = eval(0.0)?;
    for i in 1..=samples {
        let theta = TAU * i as f64 / samples as f64;
        let v = eval(theta)?;
        total += unwrap_step(&eval, prev_theta, prev, theta, v, 0)?;
        prev_theta = theta;
        prev = v;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::Inconclusive(format!("winding {turns} is not an integer")));
    }
    Ok(rounded as i64)
}

fn unwrap_step<F>(eval: &F, t0: f64, v0: C64, t1: f64, v1: C64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<C64>,
{
    let delta = (v1 / v0).arg();
    if delta.abs() <= PI / 2.0 {
        return Ok(delta);
    }
    if depth >= MAX_WINDING_DEPTH {
        return Err(Error::Inconclusive(format!("phase jump {delta:.3} near theta = {t0:.6} unresolved")));
    }
    let tm = 0.5 * (t0 + t1);
    let vm = eval(tm)?;
    Ok(unwrap_step(eval, t0, v0, tm, vm, depth + 1)? + unwrap_step(eval, tm, vm, t1, v1, depth + 1)?)
}

/// `Re(c̄_1 c_2)` for the coefficients of `dx_1∧…∧dx_n` and
/// `dy_1∧dx_2∧…∧dx_n`. Informational only; orientation is decided by
/// [`loop_winding`].
pub fn coefficient_orientation_diagnostic(omega: &ExteriorForm) -> f64 {
    let n = omega.half_dim();
    let xs: Vec<usize> = (0..n).collect();
    let c1 = omega.coeff(Blade::from_indices(&xs).expect("distinct"));
    let mut ys = xs.clone();
    ys[0] = n;
    // The sorted blade is dx_2∧…∧dx_n∧dy_1.
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let c2 = omega.coeff(Blade::from_indices(&ys).expect("distinct")) * sign;
    (c1.conj() * c2).re
}

/// Result of [`min_abs_on_lgr`].
#[derive(Clone, Debug)]
pub struct LgrMinimum {
    /// Smallest `|Ω(w)|` found over unit decomposables `w`.
    pub m: f64,
    pub frame: LagrangianFrame,
    pub unitary: CMat,
}

/// Minimum of `|Ω|` over orthonormal Lagrangian frames, by multi-start
/// Levenberg–Marquardt over `U ↦ U exp(iS)`, `S` real symmetric.
pub fn min_abs_on_lgr(omega: &ExteriorForm, restarts: usize, seed: u64) -> Result<LgrMinimum> {
    let n = omega.half_dim();
    if omega.degree() != n {
        return Err(Error::DegreeMismatch { expected: n, found: omega.degree() });
    }
    let runs: Vec<(f64, usize, CMat)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = linalg::rng_from_seed(seed ^ r as u64);
            let start = linalg::haar_unitary(n, &mut rng);
            let (val, u) = local_descent(omega, start);
            (val, r, u)
        })
        .collect();
    let (m, _, unitary) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    Ok(LgrMinimum { m, frame: LagrangianFrame::from_unitary(&unitary), unitary })
}

/// Symmetric basis `E_ab` (`a ≤ b`), orthonormal for the Frobenius product.
fn symmetric_basis(n: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            out.push((a, b, if a == b { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 }));
        }
    }
    out
}

fn frame_value(omega: &ExteriorForm, u: &CMat) -> C64 {
    evaluate_on_matrix(omega, LagrangianFrame::from_unitary(u).matrix())
}

/// `U exp(iS)` for real symmetric `S`.
fn rotate_unitary(u: &CMat, s: &Mat) -> CMat {
    let eig = linalg::symmetrize(s).symmetric_eigen();
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l)));
    u * (&v * d * v.transpose())
}

fn gradient_columns(omega: &ExteriorForm, frame: &Mat, basis: &[(usize, usize, f64)]) -> Vec<C64> {
    let n = frame.ncols();
    let jf = linalg::standard_j(n) * frame;
    let replace = |col: usize, src: usize| {
        let mut f = frame.clone();
        f.set_column(col, &jf.column(src));
        evaluate_on_matrix(omega, &f)
    };
    basis
        .iter()
        .map(|&(a, b, w)| if a == b { replace(a, a) } else { (replace(b, a) + replace(a, b)) * w })
        .collect()
}

fn local_descent(omega: &ExteriorForm, start: CMat) -> (f64, CMat) {
    let n = start.nrows();
    let basis = symmetric_basis(n);
    let p = basis.len();
    let scale = omega.norm().max(f64::MIN_POSITIVE);
    let mut u = start;
    let mut f = frame_value(omega, &u);
    let mut mu = 1e-3 * scale * scale;
    for _ in 0..400 {
        let frame = LagrangianFrame::from_unitary(&u);
        let cols = gradient_columns(omega, frame.matrix(), &basis);
        let jac = Mat::from_fn(2, p, |r, c| if r == 0 { cols[c].re } else { cols[c].im });
        let res = nalgebra::DVector::from_row_slice(&[f.re, f.im]);
        let grad = jac.transpose() * &res;
        if grad.norm() <= 1e-15 * scale * scale {
            break;
        }
        let h = jac.transpose() * &jac;
        let mut accepted = false;
        while mu < 1e12 * scale * scale {
            let lhs = &h + Mat::identity(p, p) * mu;
            let Some(step) = lhs.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                mu *= 4.0;
                continue;
            };
            let mut s = Mat::zeros(n, n);
            for (k, &(a, b, w)) in basis.iter().enumerate() {
                s[(a, b)] += step[k] * w;
                if a != b {
                    s[(b, a)] += step[k] * w;
                }
            }
            let cand = rotate_unitary(&u, &s);
            let fc = frame_value(omega, &cand);
            if fc.norm() < f.norm() {
                let gain = f.norm() - fc.norm();
                u = cand;
                f = fc;
                mu = (mu / 3.0).max(1e-12 * scale * scale);
                accepted = true;
                if gain <= 1e-15 * scale {
                    return (f.norm(), u);
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (f.norm(), u)
}
