//! Exterior algebra of `R^{2n}` with complex coefficients.
//!
//! Coordinates are ordered `x_1..x_n, y_1..y_n`; index `i < n` is `dx_{i+1}`
//! and index `n + i` is `dy_{i+1}`. Basis elements are stored as bitmasks
//! ([`Blade`]) and ordered lexicographically on their sorted index tuples, so
//! `dx_1 ∧ … ∧ dx_n` is the first basis element of middle degree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Coefficients with modulus at or below this are dropped.
pub const STORAGE_EPS: f64 = 1e-14;

/// Largest supported half-dimension; blades live in a `u32`.
pub const MAX_HALF_DIM: usize = 15;

/// A sorted index set `i_1 < … < i_k` encoded as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Blade(u32);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn from_bits(bits: u32) -> Self {
        Blade(bits)
    }

    /// Zero-based indices; duplicates are rejected.
    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i >= 32 || bits & (1 << i) != 0 {
                return None;
            }
            bits |= 1 << i;
        }
        Some(Blade(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, other: Blade) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_disjoint(self, other: Blade) -> bool {
        self.0 & other.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Sign of the permutation sorting the concatenation `self ++ other`.
    /// Both blades must be disjoint.
    pub fn wedge_sign(self, other: Blade) -> f64 {
        debug_assert!(self.is_disjoint(other));
        let mut inversions = 0u32;
        for j in other.indices() {
            inversions += (self.0 >> (j + 1)).count_ones();
        }
        if inversions % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// All blades of grade `k` in `{0..dim}`, in lexicographic order.
    pub fn all_of_grade(dim: usize, k: usize) -> Vec<Blade> {
        let mut out = Vec::new();
        if k > dim {
            return out;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(Blade::from_indices(&idx).expect("distinct indices"));
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] < dim - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // The smallest index present in exactly one of the two sets decides.
        let low = diff & diff.wrapping_neg();
        if self.0 & low != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<usize> = self.indices().map(|i| i + 1).collect();
        write!(f, "Blade{idx:?}")
    }
}

/// Marker for covariant elements (forms).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {}

/// Marker for contravariant elements (multivectors).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorKind {}

/// Homogeneous element of the exterior algebra over `R^{2n}`.
///
/// `K` only distinguishes forms from multivectors; the algebra is the same.
pub struct Graded<K> {
    half_dim: usize,
    degree: usize,
    coeffs: BTreeMap<Blade, C64>,
    _kind: PhantomData<K>,
}

pub type ExteriorForm = Graded<FormKind>;
pub type Multivector = Graded<VectorKind>;

impl<K> Clone for Graded<K> {
    fn clone(&self) -> Self {
        Self { half_dim: self.half_dim, degree: self.degree, coeffs: self.coeffs.clone(), _kind: PhantomData }
    }
}

impl<K> PartialEq for Graded<K> {
    fn eq(&self, other: &Self) -> bool {
        self.half_dim == other.half_dim && self.degree == other.degree && self.coeffs == other.coeffs
    }
}

impl<K> fmt::Debug for Graded<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graded")
            .field("half_dim", &self.half_dim)
            .field("degree", &self.degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<K> Graded<K> {
    pub fn zero(half_dim: usize, degree: usize) -> Result<Self> {
        if half_dim == 0 || half_dim > MAX_HALF_DIM {
            return Err(Error::Shape(format!("unsupported half dimension {half_dim}")));
        }
        if degree > 2 * half_dim {
            return Err(Error::DegreeOverflow { degree, dim: 2 * half_dim });
        }
        Ok(Self { half_dim, degree, coeffs: BTreeMap::new(), _kind: PhantomData })
    }

    /// The scalar `c` as a degree-zero element.
    pub fn scalar(half_dim: usize, c: C64) -> Result<Self> {
        let mut s = Self::zero(half_dim, 0)?;
        s.add_term(Blade::EMPTY, c);
        Ok(s)
    }

    pub fn from_terms<I>(half_dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Blade, C64)>,
    {
        let mut out = Self::zero(half_dim, degree)?;
        let dim = 2 * half_dim;
        for (blade, c) in terms {
            if blade.grade() != degree {
                return Err(Error::Shape(format!(
                    "{blade:?} has grade {} but degree {degree} was requested",
                    blade.grade()
                )));
            }
            if blade.bits() >> dim != 0 {
                return Err(Error::Shape(format!("{blade:?} exceeds dimension {dim}")));
            }
            out.add_term(blade, c);
        }
        Ok(out)
    }

    /// Single basis element from zero-based indices in any order; the sign of
    /// the sorting permutation is applied.
    pub fn basis(half_dim: usize, indices: &[usize]) -> Result<Self> {
        let blade = Blade::from_indices(indices)
            .ok_or_else(|| Error::Shape(format!("repeated index in {indices:?}")))?;
        let mut sign = 1.0;
        for a in 0..indices.len() {
            for b in a + 1..indices.len() {
                if indices[a] > indices[b] {
                    sign = -sign;
                }
            }
        }
        Self::from_terms(half_dim, indices.len(), [(blade, C64::new(sign, 0.0))])
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, blade: Blade) -> C64 {
        self.coeffs.get(&blade).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, C64)> + '_ {
        self.coeffs.iter().map(|(b, c)| (*b, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    fn add_term(&mut self, blade: Blade, c: C64) {
        let entry = self.coeffs.entry(blade).or_default();
        *entry += c;
        if entry.norm() <= STORAGE_EPS {
            self.coeffs.remove(&blade);
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.half_dim == other.half_dim && self.degree == other.degree
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.half_dim != other.half_dim {
            return Err(Error::HalfDimMismatch(self.half_dim, other.half_dim));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        Ok(())
    }

    /// Sum that reports shape mismatches instead of panicking.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self + other)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Hermitian coefficient inner product `Σ conj(a_I) b_I`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coeffs
            .iter()
            .filter_map(|(b, c)| other.coeffs.get(b).map(|d| c.conj() * d))
            .sum()
    }

    /// Distance in coefficient norm; shapes must agree.
    pub fn distance(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "shape mismatch in distance");
        (self - other).norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn re(&self) -> Self {
        self.map(|v| C64::new(v.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|v| C64::new(v.im, 0.0))
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> Self {
        let mut out = Self { coeffs: BTreeMap::new(), ..self.clone_shape() };
        for (b, c) in &self.coeffs {
            out.add_term(*b, f(*c));
        }
        out
    }

    fn clone_shape(&self) -> Self {
        Self { half_dim: self.half_dim, degree: self.degree, coeffs: BTreeMap::new(), _kind: PhantomData }
    }

    /// Reinterpret the coefficients with the other variance.
    pub fn transpose_kind<L>(&self) -> Graded<L> {
        Graded { half_dim: self.half_dim, degree: self.degree, coeffs: self.coeffs.clone(), _kind: PhantomData }
    }

    /// Dense coefficient vector over the lexicographic basis.
    pub fn to_dense(&self) -> Vec<C64> {
        Blade::all_of_grade(self.dim(), self.degree).into_iter().map(|b| self.coeff(b)).collect()
    }

    pub fn from_dense(half_dim: usize, degree: usize, values: &[C64]) -> Result<Self> {
        let blades = Blade::all_of_grade(2 * half_dim, degree);
        if blades.len() != values.len() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                blades.len(),
                values.len()
            )));
        }
        Self::from_terms(half_dim, degree, blades.into_iter().zip(values.iter().copied()))
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.half_dim != other.half_dim {
            return Err(Error::HalfDimMismatch(self.half_dim, other.half_dim));
        }
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.half_dim, degree)?;
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if a.is_disjoint(*b) {
                    let sign = a.wedge_sign(*b);
                    out.add_term(Blade(a.0 | b.0), ca * cb * sign);
                }
            }
        }
        Ok(out)
    }
}

impl<K> Add for &Graded<K> {
    type Output = Graded<K>;
    fn add(self, rhs: Self) -> Graded<K> {
        assert!(self.same_shape(rhs), "shape mismatch in addition");
        let mut out = self.clone();
        for (b, c) in &rhs.coeffs {
            out.add_term(*b, *c);
        }
        out
    }
}

impl<K> Sub for &Graded<K> {
    type Output = Graded<K>;
    fn sub(self, rhs: Self) -> Graded<K> {
        assert!(self.same_shape(rhs), "shape mismatch in subtraction");
        let mut out = self.clone();
        for (b, c) in &rhs.coeffs {
            out.add_term(*b, -c);
        }
        out
    }
}

impl<K> Add for Graded<K> {
    type Output = Graded<K>;
    fn add(self, rhs: Self) -> Graded<K> {
        &self + &rhs
    }
}

impl<K> Sub for Graded<K> {
    type Output = Graded<K>;
    fn sub(self, rhs: Self) -> Graded<K> {
        &self - &rhs
    }
}

impl<K> Neg for &Graded<K> {
    type Output = Graded<K>;
    fn neg(self) -> Graded<K> {
        self.map(|c| -c)
    }
}

impl<K> Mul<C64> for &Graded<K> {
    type Output = Graded<K>;
    fn mul(self, rhs: C64) -> Graded<K> {
        self.scale(rhs)
    }
}

impl<K> Mul<f64> for &Graded<K> {
    type Output = Graded<K>;
    fn mul(self, rhs: f64) -> Graded<K> {
        self.scale_real(rhs)
    }
}

impl ExteriorForm {
    /// `dx_{i+1}` (zero-based `i`).
    pub fn dx(half_dim: usize, i: usize) -> Self {
        Self::basis(half_dim, &[i]).expect("index in range")
    }

    /// `dy_{i+1}` (zero-based `i`).
    pub fn dy(half_dim: usize, i: usize) -> Self {
        Self::basis(half_dim, &[half_dim + i]).expect("index in range")
    }

    /// `dz_{i+1} = dx_{i+1} + i dy_{i+1}`.
    pub fn dz(half_dim: usize, i: usize) -> Self {
        &Self::dx(half_dim, i) + &Self::dy(half_dim, i).scale(C64::i())
    }

    pub fn dzbar(half_dim: usize, i: usize) -> Self {
        Self::dz(half_dim, i).conj()
    }

    /// `dZ = dz_1 ∧ … ∧ dz_n`.
    pub fn holomorphic_volume(half_dim: usize) -> Self {
        wedge_all(half_dim, (0..half_dim).map(|i| Self::dz(half_dim, i)))
    }

    /// The standard symplectic form `Σ dx_i ∧ dy_i`.
    pub fn omega(half_dim: usize) -> Self {
        let terms = (0..half_dim).map(|i| {
            (Blade::from_indices(&[i, half_dim + i]).expect("distinct"), C64::new(1.0, 0.0))
        });
        Self::from_terms(half_dim, 2, terms).expect("valid shape")
    }

    /// `ω^k`.
    pub fn omega_power(half_dim: usize, k: usize) -> Self {
        let omega = Self::omega(half_dim);
        let mut out = Self::scalar(half_dim, C64::new(1.0, 0.0)).expect("valid");
        for _ in 0..k {
            out = omega.wedge(&out).expect("degree within range");
        }
        out
    }

    /// `ω^n / n!`, equal to `dx_1∧dy_1∧…∧dx_n∧dy_n`.
    pub fn symplectic_volume(half_dim: usize) -> Self {
        let top = Blade((1u32 << (2 * half_dim)) - 1);
        Self::from_terms(half_dim, 2 * half_dim, [(top, C64::new(top_sign(half_dim), 0.0))])
            .expect("valid shape")
    }

    /// Evaluation on a multivector of the same degree.
    pub fn evaluate(&self, w: &Multivector) -> Result<C64> {
        if self.half_dim != w.half_dim {
            return Err(Error::HalfDimMismatch(self.half_dim, w.half_dim));
        }
        if self.degree != w.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: w.degree });
        }
        Ok(self
            .coeffs
            .iter()
            .filter_map(|(b, c)| w.coeffs.get(b).map(|d| c * d))
            .sum())
    }

    /// The scalar `c` with `self = c · ω^n/n!`.
    pub fn top_coefficient(&self) -> Result<C64> {
        if self.degree != self.dim() {
            return Err(Error::DegreeMismatch { expected: self.dim(), found: self.degree });
        }
        let top = Blade((1u32 << self.dim()) - 1);
        Ok(self.coeff(top) * top_sign(self.half_dim))
    }

    /// Lefschetz operator `L(a) = ω ∧ a`.
    pub fn lefschetz(&self) -> Result<Self> {
        Self::omega(self.half_dim).wedge(self)
    }

    /// `L^k(a)`.
    pub fn lefschetz_power(&self, k: usize) -> Result<Self> {
        if self.degree + 2 * k > self.dim() {
            return Err(Error::DegreeOverflow { degree: self.degree + 2 * k, dim: self.dim() });
        }
        let mut out = self.clone();
        for _ in 0..k {
            out = out.lefschetz()?;
        }
        Ok(out)
    }

    /// Dual Lefschetz operator: the adjoint of `L` for the coefficient inner
    /// product, i.e. contraction with `Σ ∂x_i ∧ ∂y_i`.
    pub fn dual_lefschetz(&self) -> Result<Self> {
        if self.degree < 2 {
            return Err(Error::DegreeMismatch { expected: 2, found: self.degree });
        }
        let n = self.half_dim;
        let mut out = Self::zero(n, self.degree - 2)?;
        for (b, c) in &self.coeffs {
            for i in 0..n {
                let pair = Blade((1 << i) | (1 << (n + i)));
                if b.contains(pair) {
                    let rest = Blade(b.0 & !pair.0);
                    out.add_term(rest, c * pair.wedge_sign(rest));
                }
            }
        }
        Ok(out)
    }

    /// `Λ^k(a)`.
    pub fn dual_lefschetz_power(&self, k: usize) -> Result<Self> {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.dual_lefschetz()?;
        }
        Ok(out)
    }

    /// Maximal residual of the primitivity condition `ω^{n-k+1} ∧ a = 0`.
    pub fn primitivity_residual(&self) -> f64 {
        if self.degree > self.half_dim {
            return self.norm();
        }
        // Degrees 0 and 1 are pushed past the top degree, where everything vanishes.
        self.lefschetz_power(self.half_dim - self.degree + 1).map_or(0.0, |f| f.max_abs())
    }

    pub fn is_primitive(&self, tol: f64) -> bool {
        self.primitivity_residual() <= tol * self.max_abs().max(1.0)
    }

    /// Decomposition `a = Σ_j ω^j ∧ α_{k-2j}` into primitive pieces.
    pub fn primitive_decompose(&self) -> LefschetzDecomposition {
        let n = self.half_dim;
        let k = self.degree;
        let jmin = k.saturating_sub(n);
        let jmax = k / 2;
        let mut pieces: Vec<ExteriorForm> =
            (0..=jmax).map(|j| Self::zero(n, k - 2 * j).expect("valid")).collect();
        let mut residual = self.clone();
        for j in (jmin..=jmax).rev() {
            let p = k - 2 * j;
            let c = sl2_constant(n, p, j);
            let piece = residual.dual_lefschetz_power(j).expect("j ≤ k/2").scale_real(1.0 / c);
            let lifted = piece.lefschetz_power(j).expect("p + 2j = k");
            residual = &residual - &lifted;
            pieces[j] = piece;
        }
        LefschetzDecomposition { degree: k, pieces }
    }

    /// Primitive part `α_k` of the Lefschetz decomposition.
    pub fn primitive_part(&self) -> Self {
        self.primitive_decompose().pieces.swap_remove(0)
    }
}

impl Multivector {
    /// `∂x_{i+1}` (zero-based `i`).
    pub fn d_x(half_dim: usize, i: usize) -> Self {
        Self::basis(half_dim, &[i]).expect("index in range")
    }

    /// `∂y_{i+1}` (zero-based `i`).
    pub fn d_y(half_dim: usize, i: usize) -> Self {
        Self::basis(half_dim, &[half_dim + i]).expect("index in range")
    }

    /// A real vector of length `2n` as a degree-one multivector.
    pub fn from_vector(half_dim: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * half_dim {
            return Err(Error::Shape(format!("vector of length {} in dimension {}", v.len(), 2 * half_dim)));
        }
        Self::from_terms(
            half_dim,
            1,
            v.iter().enumerate().map(|(i, x)| (Blade(1 << i), C64::new(*x, 0.0))),
        )
    }

    /// Contraction `self ⌞ a` into the leading slots:
    /// `(w ⌞ a)(u) = a(w ∧ u)`, so `(v_1∧v_2) ⌞ a = ι_{v_2} ι_{v_1} a`.
    pub fn contract(&self, a: &ExteriorForm) -> Result<ExteriorForm> {
        if self.half_dim != a.half_dim {
            return Err(Error::HalfDimMismatch(self.half_dim, a.half_dim));
        }
        if self.degree > a.degree {
            return Err(Error::DegreeMismatch { expected: a.degree, found: self.degree });
        }
        let mut out = ExteriorForm::zero(a.half_dim, a.degree - self.degree)?;
        for (v, cv) in &self.coeffs {
            for (b, cb) in &a.coeffs {
                if b.contains(*v) {
                    let rest = Blade(b.0 & !v.0);
                    out.add_term(rest, cv * cb * v.wedge_sign(rest));
                }
            }
        }
        Ok(out)
    }
}

/// Form with independent standard complex Gaussian coefficients.
pub fn random_form<R: rand::Rng>(half_dim: usize, degree: usize, rng: &mut R) -> ExteriorForm {
    let values: Vec<C64> = Blade::all_of_grade(2 * half_dim, degree)
        .iter()
        .map(|_| C64::new(crate::linalg::gaussian(rng), crate::linalg::gaussian(rng)))
        .collect();
    ExteriorForm::from_dense(half_dim, degree, &values).expect("valid shape")
}

/// Primitive part of a [`random_form`] of degree `n`.
pub fn random_primitive<R: rand::Rng>(half_dim: usize, rng: &mut R) -> ExteriorForm {
    random_form(half_dim, half_dim, rng).primitive_part()
}

/// Interior product `v ⌞ a`; see [`Multivector::contract`].
pub fn interior_contract(v: &Multivector, a: &ExteriorForm) -> Result<ExteriorForm> {
    v.contract(a)
}

/// Wedge of a sequence of elements of the same half-dimension.
pub fn wedge_all<K, I>(half_dim: usize, items: I) -> Graded<K>
where
    I: IntoIterator<Item = Graded<K>>,
{
    let mut out = Graded::<K>::scalar(half_dim, C64::new(1.0, 0.0)).expect("valid");
    for item in items {
        out = out.wedge(&item).expect("caller keeps degrees in range");
    }
    out
}

/// Sign relating `dx_1∧dy_1∧…∧dx_n∧dy_n` to the sorted top blade.
fn top_sign(half_dim: usize) -> f64 {
    if (half_dim * (half_dim.saturating_sub(1)) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Λ^j L^j α = c α` for primitive `α` of degree `p`.
fn sl2_constant(n: usize, p: usize, j: usize) -> f64 {
    (1..=j).map(|i| (i * (n + 1 - p - i)) as f64).product()
}

/// Pieces `α_{k-2j}`, indexed by the Lefschetz power `j`.
#[derive(Clone, Debug)]
pub struct LefschetzDecomposition {
    pub degree: usize,
    pub pieces: Vec<ExteriorForm>,
}

impl LefschetzDecomposition {
    /// `Σ_j ω^j ∧ α_{k-2j}`.
    pub fn reconstruct(&self) -> ExteriorForm {
        let n = self.pieces[0].half_dim();
        let mut out = ExteriorForm::zero(n, self.degree).expect("valid");
        for (j, piece) in self.pieces.iter().enumerate() {
            if let Ok(lifted) = piece.lefschetz_power(j) {
                out = &out + &lifted;
            }
        }
        out
    }
}

/// `dim Λ^k_pr = C(2n,k) − C(2n,k−2)` for `0 ≤ k ≤ n`.
pub fn primitive_dim(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Err(Error::Shape(format!("primitive degree {k} exceeds half dimension {n}")));
    }
    let top = binomial(2 * n as u64, k as u64);
    let lower = if k >= 2 { binomial(2 * n as u64, k as u64 - 2) } else { 0 };
    Ok(top - lower)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Catalan number `C_m = C(2m, m)/(m+1)`.
pub fn catalan(m: u64) -> u64 {
    binomial(2 * m, m) / (m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn blade_order_is_lexicographic() {
        let blades = Blade::all_of_grade(4, 2);
        let tuples: Vec<Vec<usize>> = blades.iter().map(|b| b.indices().collect()).collect();
        assert_eq!(
            tuples,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut sorted = blades.clone();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, blades);
    }

    #[test]
    fn wedge_generators() {
        let w = ExteriorForm::dx(1, 0).wedge(&ExteriorForm::dy(1, 0)).unwrap();
        assert_eq!(w.coeff(Blade::from_indices(&[0, 1]).unwrap()), c(1.0, 0.0));
        assert_eq!(w.num_terms(), 1);
    }

    #[test]
    fn omega_squared_in_dim_four() {
        let o = ExteriorForm::omega(2);
        let o2 = o.wedge(&o).unwrap();
        // dx1∧dy1∧dx2∧dy2 = -dx1∧dx2∧dy1∧dy2 in sorted order
        assert_eq!(o2.num_terms(), 1);
        assert_eq!(o2.coeff(Blade::from_indices(&[0, 1, 2, 3]).unwrap()), c(-2.0, 0.0));
        assert_eq!(o2.top_coefficient().unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn odd_forms_square_to_zero() {
        let a = &ExteriorForm::dx(3, 0).scale(c(0.3, 1.0)) + &ExteriorForm::dy(3, 2);
        assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn degree_overflow_and_mismatch() {
        let a = ExteriorForm::omega_power(2, 2);
        assert!(matches!(a.wedge(&ExteriorForm::dx(2, 0)), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(
            ExteriorForm::dx(2, 0).wedge(&ExteriorForm::dx(3, 0)),
            Err(Error::HalfDimMismatch(2, 3))
        ));
    }

    #[test]
    fn contraction_examples() {
        let dxdy = ExteriorForm::dx(1, 0).wedge(&ExteriorForm::dy(1, 0)).unwrap();
        assert_eq!(Multivector::d_x(1, 0).contract(&dxdy).unwrap(), ExteriorForm::dy(1, 0));
        let r = Multivector::d_y(2, 0).contract(&ExteriorForm::omega(2)).unwrap();
        assert_eq!(r, -&ExteriorForm::dx(2, 0));
        let v = Multivector::d_x(2, 0).wedge(&Multivector::d_y(2, 0)).unwrap();
        let vol = ExteriorForm::omega_power(2, 2).scale_real(0.5);
        let expected = ExteriorForm::dx(2, 1).wedge(&ExteriorForm::dy(2, 1)).unwrap();
        assert_eq!(v.contract(&vol).unwrap(), expected);
        assert!(matches!(v.contract(&ExteriorForm::dx(2, 0)), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let dxdy = ExteriorForm::dx(1, 0).wedge(&ExteriorForm::dy(1, 0)).unwrap();
        let v = Multivector::d_x(1, 0).wedge(&Multivector::d_y(1, 0)).unwrap();
        assert_eq!(dxdy.evaluate(&v).unwrap(), c(1.0, 0.0));

        let dz = ExteriorForm::holomorphic_volume(3);
        let xs = wedge_all(3, (0..3).map(|i| Multivector::d_x(3, i)));
        assert!((dz.evaluate(&xs).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let a = ExteriorForm::basis(3, &[3, 1, 2]).unwrap();
        assert_eq!(a.evaluate(&xs).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn top_coefficient_examples() {
        for n in 1..=4 {
            let v = ExteriorForm::symplectic_volume(n);
            assert_eq!(v.top_coefficient().unwrap(), c(1.0, 0.0));
            let from_power = ExteriorForm::omega_power(n, n).scale_real(1.0 / factorial(n));
            assert!(from_power.distance(&v) < 1e-14);
        }
        let dz = ExteriorForm::holomorphic_volume(3);
        let t = dz.wedge(&dz.conj()).unwrap().top_coefficient().unwrap();
        assert!((t - c(0.0, -8.0)).norm() < 1e-13, "{t}");
        let four = ExteriorForm::basis(2, &[0, 2, 1, 3]).unwrap();
        assert_eq!(four.top_coefficient().unwrap(), c(1.0, 0.0));
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn primitive_decomposition_examples() {
        let d = ExteriorForm::omega(2).primitive_decompose();
        assert!(d.pieces[0].is_zero());
        assert!((d.pieces[1].coeff(Blade::EMPTY) - c(1.0, 0.0)).norm() < 1e-15);

        let a = ExteriorForm::dx(2, 0).wedge(&ExteriorForm::dy(2, 0)).unwrap();
        let d = a.primitive_decompose();
        let b = ExteriorForm::dx(2, 1).wedge(&ExteriorForm::dy(2, 1)).unwrap();
        let expected = (&a - &b).scale_real(0.5);
        assert!(d.pieces[0].distance(&expected) < 1e-15);
        assert!((d.pieces[1].coeff(Blade::EMPTY) - c(0.5, 0.0)).norm() < 1e-15);
        assert!(ExteriorForm::omega(2).wedge(&d.pieces[0]).unwrap().is_zero());

        let p = ExteriorForm::dx(2, 0).wedge(&ExteriorForm::dx(2, 1)).unwrap();
        assert!(p.primitivity_residual() == 0.0);
        let d = p.primitive_decompose();
        assert_eq!(d.pieces[0], p);
        assert!(d.pieces[1].is_zero());
    }

    #[test]
    fn decomposition_above_middle_degree() {
        // 3-forms on R^4 are all ω ∧ (1-form).
        let a = ExteriorForm::basis(2, &[0, 1, 2]).unwrap();
        let d = a.primitive_decompose();
        assert!(d.pieces[0].is_zero());
        assert!(d.reconstruct().distance(&a) < 1e-14);
    }

    #[test]
    fn primitive_dims() {
        assert_eq!(primitive_dim(2, 2).unwrap(), 5);
        assert_eq!(primitive_dim(3, 3).unwrap(), 14);
        assert_eq!(primitive_dim(1, 0).unwrap(), 1);
        assert!(primitive_dim(2, 3).is_err());
        for n in 1..=5u64 {
            assert_eq!(primitive_dim(n as usize, n as usize).unwrap(), catalan(n + 1));
        }
    }

    #[test]
    fn basis_applies_sorting_sign() {
        let a = ExteriorForm::basis(2, &[2, 0]).unwrap();
        assert_eq!(a.coeff(Blade::from_indices(&[0, 2]).unwrap()), c(-1.0, 0.0));
        assert!(ExteriorForm::basis(2, &[1, 1]).is_err());
    }
}
