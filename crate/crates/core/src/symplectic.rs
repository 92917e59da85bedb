//! Linear symplectic geometry acting on forms.
//!
//! Matrices act on column vectors of `R^{2n}` in the coordinate order
//! `x_1..x_n, y_1..y_n`. Forms are pulled back: `(g^*a)(v_1,…) = a(g v_1,…)`,
//! which gives a right action of `Sp(2n)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{Blade, ExteriorForm, C64};
use crate::linalg::{self, Mat};

/// Tolerance for `‖J² + I‖` when accepting a complex structure.
pub const J_SQUARE_TOL: f64 = 1e-8;

/// Minimum eigenvalue of `ω(·, J·)` required for compatibility.
pub const COMPAT_EPS: f64 = 1e-10;

/// Residual allowed in `gᵀΩg = Ω` for a map to count as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// A linear endomorphism of `R^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    half_dim: usize,
    matrix: Mat,
}

impl LinearMap {
    pub fn new(matrix: Mat) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Shape(format!("expected an even square matrix, got {r}x{c}")));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite matrix entry".into()));
        }
        Ok(Self { half_dim: r / 2, matrix })
    }

    pub fn identity(half_dim: usize) -> Self {
        Self { half_dim, matrix: Mat::identity(2 * half_dim, 2 * half_dim) }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        LinearMap { half_dim: self.half_dim, matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> Result<LinearMap> {
        self.matrix
            .clone()
            .try_inverse()
            .map(|m| LinearMap { half_dim: self.half_dim, matrix: m })
            .ok_or_else(|| Error::Singular("matrix is not invertible".into()))
    }

    /// `‖gᵀΩg − Ω‖_F`.
    pub fn symplectic_residual(&self) -> f64 {
        let om = linalg::omega_matrix(self.half_dim);
        (self.matrix.transpose() * &om * &self.matrix - om).norm()
    }
}

/// Pullback of `a` along a linear map `g: R^{2m} → R^{2n}` given as a
/// `2n × 2m` matrix: `(g^*a)_J = Σ_I a_I det g[I, J]`.
pub fn pullback(a: &ExteriorForm, g: &Mat) -> Result<ExteriorForm> {
    let (rows, cols) = g.shape();
    if rows != a.dim() {
        return Err(Error::Shape(format!("map has {rows} rows but form lives in dimension {}", a.dim())));
    }
    if cols == 0 || cols % 2 != 0 {
        return Err(Error::Shape(format!("source dimension {cols} is not even")));
    }
    let k = a.degree();
    let targets = Blade::all_of_grade(cols, k);
    let mut values = vec![C64::default(); targets.len()];
    let mut buf = vec![0.0; k * k];
    let terms: Vec<(Vec<usize>, C64)> = a.terms().map(|(b, c)| (b.indices().collect(), c)).collect();
    for (slot, tb) in targets.iter().enumerate() {
        let tcols: Vec<usize> = tb.indices().collect();
        let mut acc = C64::default();
        for (rows_idx, c) in &terms {
            for (r, &ri) in rows_idx.iter().enumerate() {
                for (s, &cj) in tcols.iter().enumerate() {
                    buf[r * k + s] = g[(ri, cj)];
                }
            }
            let det = linalg::small_det(&mut buf, k);
            if det != 0.0 {
                acc += c * det;
            }
        }
        values[slot] = acc;
    }
    ExteriorForm::from_dense(cols / 2, k, &values)
}

/// Derivative of `ε ↦ (I + εX)^* a` at zero: the derivation extending
/// `e^i ↦ Σ_j X_ij e^j`.
pub fn derivation(a: &ExteriorForm, x: &Mat) -> Result<ExteriorForm> {
    let dim = a.dim();
    if x.shape() != (dim, dim) {
        return Err(Error::Shape(format!("expected a {dim}x{dim} matrix")));
    }
    let mut values: std::collections::BTreeMap<Blade, C64> = std::collections::BTreeMap::new();
    for (blade, c) in a.terms() {
        for i in blade.indices() {
            let rest = blade.bits() & !(1u32 << i);
            for j in 0..dim {
                let xij = x[(i, j)];
                if xij == 0.0 || (j != i && rest & (1u32 << j) != 0) {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let between = if hi > lo + 1 { rest & ((1u32 << hi) - (1u32 << (lo + 1))) } else { 0 };
                let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                *values.entry(Blade::from_bits(rest | (1u32 << j))).or_default() += c * (xij * sign);
            }
        }
    }
    ExteriorForm::from_terms(a.half_dim(), a.degree(), values)
}

/// Pullback `g^*a` for invertible `g`.
pub fn group_act(g: &LinearMap, a: &ExteriorForm) -> Result<ExteriorForm> {
    if g.half_dim() != a.half_dim() {
        return Err(Error::HalfDimMismatch(g.half_dim(), a.half_dim()));
    }
    let det = g.matrix().determinant();
    if !(det.abs() > 1e-12) {
        return Err(Error::Singular(format!("determinant {det:.3e}")));
    }
    pullback(a, g.matrix())
}

/// Whether `g^*ω = ω`, with the residual `‖g^*ω − ω‖`.
pub fn is_symplectic(g: &LinearMap) -> (bool, f64) {
    let omega = ExteriorForm::omega(g.half_dim());
    let residual = pullback(&omega, g.matrix()).map(|p| p.distance(&omega)).unwrap_or(f64::INFINITY);
    (residual < SYMPLECTIC_TOL, residual)
}

/// Polar factors `g = u · exp(X)` of a symplectic map.
#[derive(Clone, Debug)]
pub struct PolarDecomposition {
    pub unitary: LinearMap,
    pub log_positive: Mat,
}

/// Cartan decomposition `Sp = U · exp(p)` via the eigendecomposition of `gᵀg`.
pub fn polar_cartan_decompose(g: &LinearMap) -> Result<PolarDecomposition> {
    let residual = g.symplectic_residual();
    if residual > SYMPLECTIC_TOL * g.matrix().norm().max(1.0).powi(2) {
        return Err(Error::NotSymplectic { residual });
    }
    let gtg = g.matrix().transpose() * g.matrix();
    if linalg::min_sym_eigenvalue(&gtg) <= 0.0 {
        return Err(Error::Singular("gᵀg is not positive definite".into()));
    }
    let x = linalg::sym_apply(&gtg, |l| 0.5 * l.ln());
    let u = g.matrix() * linalg::exp_symmetric(&(-&x));
    Ok(PolarDecomposition { unitary: LinearMap::new(u)?, log_positive: x })
}

/// A complex structure `J` on `R^{2n}` (`J² = −I`).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    half_dim: usize,
    matrix: Mat,
}

impl ComplexStructure {
    pub fn new(matrix: Mat) -> Result<Self> {
        let map = LinearMap::new(matrix)?;
        let n = map.half_dim();
        let m = map.into_matrix();
        let res = (&m * &m + Mat::identity(2 * n, 2 * n)).norm();
        if res > J_SQUARE_TOL * m.norm().max(1.0).powi(2) {
            return Err(Error::Incompatible(format!("J² + I has norm {res:.3e}")));
        }
        Ok(Self { half_dim: n, matrix: m })
    }

    pub fn standard(half_dim: usize) -> Self {
        Self { half_dim, matrix: linalg::standard_j(half_dim) }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn square_residual(&self) -> f64 {
        let n2 = 2 * self.half_dim;
        (&self.matrix * &self.matrix + Mat::identity(n2, n2)).norm()
    }

    /// `Ωmat · J`, the Gram matrix of `ω(·, J·)`.
    pub fn metric(&self) -> Mat {
        linalg::omega_matrix(self.half_dim) * &self.matrix
    }

    /// Asymmetry of `ω(·, J·)` and its minimum eigenvalue.
    pub fn compatibility(&self) -> (f64, f64) {
        let g = self.metric();
        let asym = (&g - g.transpose()).norm();
        (asym, linalg::min_sym_eigenvalue(&g))
    }

    pub fn is_compatible(&self) -> bool {
        let (asym, min_eig) = self.compatibility();
        asym < 1e-8 * self.matrix.norm().max(1.0) && min_eig > COMPAT_EPS
    }

    /// `h^{-1} J h`, the structure pulled back along `h`.
    pub fn conjugate_by(&self, h: &LinearMap) -> Result<Self> {
        let inv = h.inverse()?;
        Self::new(inv.matrix() * &self.matrix * h.matrix())
    }

    /// `cos θ · I + sin θ · J = exp(θJ)`.
    pub fn rotation(&self, theta: f64) -> Mat {
        let n2 = 2 * self.half_dim;
        Mat::identity(n2, n2) * theta.cos() + &self.matrix * theta.sin()
    }
}

/// Components `a^{p,k−p}` indexed by `p`.
#[derive(Clone, Debug)]
pub struct TypeDecomposition {
    pub degree: usize,
    pub components: Vec<ExteriorForm>,
}

impl TypeDecomposition {
    /// The `(p, k−p)` component.
    pub fn component(&self, p: usize) -> &ExteriorForm {
        &self.components[p]
    }

    pub fn sum(&self) -> ExteriorForm {
        let mut it = self.components.iter();
        let first = it.next().expect("at least one component").clone();
        it.fold(first, |acc, c| &acc + c)
    }
}

/// Splits `a` into `J`-types by Fourier analysis of `θ ↦ exp(θJ)^* a`:
/// the `(p, q)` part picks up the factor `e^{i(p−q)θ}`.
pub fn type_decompose(a: &ExteriorForm, j: &ComplexStructure) -> Result<TypeDecomposition> {
    if a.half_dim() != j.half_dim() {
        return Err(Error::HalfDimMismatch(a.half_dim(), j.half_dim()));
    }
    if !j.is_compatible() {
        let (asym, min_eig) = j.compatibility();
        return Err(Error::Incompatible(format!("asymmetry {asym:.3e}, min eigenvalue {min_eig:.3e}")));
    }
    let k = a.degree();
    let samples: Vec<ExteriorForm> = (0..=k)
        .map(|m| pullback(a, &j.rotation(PI * m as f64 / (k + 1) as f64)))
        .collect::<Result<_>>()?;
    let mut components = Vec::with_capacity(k + 1);
    for p in 0..=k {
        let freq = 2.0 * p as f64 - k as f64;
        let mut acc = ExteriorForm::zero(a.half_dim(), k)?;
        for (m, s) in samples.iter().enumerate() {
            let theta = PI * m as f64 / (k + 1) as f64;
            acc = &acc + &s.scale(C64::from_polar(1.0 / (k + 1) as f64, -freq * theta));
        }
        components.push(acc);
    }
    Ok(TypeDecomposition { degree: k, components })
}

/// A point `Z = X + iY` of Siegel space.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    x: Mat,
    y: Mat,
}

impl SiegelPoint {
    pub fn new(x: Mat, y: Mat) -> Result<Self> {
        if !x.is_square() || x.shape() != y.shape() || x.nrows() == 0 {
            return Err(Error::InvalidSiegel("X and Y must be square of equal size".into()));
        }
        let scale = x.norm().max(y.norm()).max(1.0);
        let asym = (&x - x.transpose()).norm().max((&y - y.transpose()).norm());
        if asym > 1e-10 * scale {
            return Err(Error::InvalidSiegel(format!("asymmetry {asym:.3e}")));
        }
        let min_eig = linalg::min_sym_eigenvalue(&y);
        if min_eig <= 0.0 {
            return Err(Error::InvalidSiegel(format!("Y has eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { x: linalg::symmetrize(&x), y: linalg::symmetrize(&y) })
    }

    /// `Z = iI`.
    pub fn standard(n: usize) -> Self {
        Self { x: Mat::zeros(n, n), y: Mat::identity(n, n) }
    }

    /// `X` symmetric Gaussian, `Y = Q diag(e^{s_i}) Qᵀ` with `s_i` uniform in
    /// `[−ln 2, ln 2]` and `Q` a random rotation.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let x = linalg::random_symmetric(n, 0.5, rng);
        let q = linalg::gaussian_matrix(n, n, rng).qr().q();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
            rng.random_range(-std::f64::consts::LN_2..std::f64::consts::LN_2).exp()
        }));
        let y = &q * d * q.transpose();
        Self::new(x, y).expect("construction yields a valid point")
    }

    pub fn half_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    pub fn y(&self) -> &Mat {
        &self.y
    }

    pub fn z(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.half_dim(), self.half_dim(), |i, j| C64::new(self.x[(i, j)], self.y[(i, j)]))
    }

    /// `J' = [[−XY⁻¹, −Y − XY⁻¹X], [Y⁻¹, Y⁻¹X]]`.
    pub fn complex_structure(&self) -> Result<ComplexStructure> {
        let n = self.half_dim();
        let yi = self
            .y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidSiegel("Y is singular".into()))?;
        let mut j = Mat::zeros(2 * n, 2 * n);
        j.view_mut((0, 0), (n, n)).copy_from(&(-(&self.x * &yi)));
        j.view_mut((0, n), (n, n)).copy_from(&(-(&self.y + &self.x * &yi * &self.x)));
        j.view_mut((n, 0), (n, n)).copy_from(&yi);
        j.view_mut((n, n), (n, n)).copy_from(&(&yi * &self.x));
        let cs = ComplexStructure::new(j)?;
        if !cs.is_compatible() {
            return Err(Error::Incompatible("Siegel structure failed the compatibility check".into()));
        }
        Ok(cs)
    }

    /// `∧_j (dx_j + Σ_k Z_jk dy_k)`, which evaluates on the frame `(M; N)` to
    /// `det(M + Z N)`.
    pub fn holomorphic_form(&self) -> ExteriorForm {
        let n = self.half_dim();
        let z = self.z();
        let factors = (0..n).map(|j| {
            let mut f = ExteriorForm::dx(n, j);
            for k in 0..n {
                f = &f + &ExteriorForm::dy(n, k).scale(z[(j, k)]);
            }
            f
        });
        crate::exterior::wedge_all(n, factors)
    }
}

/// `⟨Ω_1, Ω_2⟩ = (Ω̄_1 ∧ Ω_2) / (ω^n/n!)`.
///
/// Conjugate-symmetric when `n` is even and conjugate-antisymmetric when `n`
/// is odd, since swapping two `n`-forms costs `(−1)^n`.
pub fn hermitian_pairing(a: &ExteriorForm, b: &ExteriorForm) -> Result<C64> {
    if a.half_dim() != b.half_dim() {
        return Err(Error::HalfDimMismatch(a.half_dim(), b.half_dim()));
    }
    let n = a.half_dim();
    for f in [a, b] {
        if f.degree() != n {
            return Err(Error::DegreeMismatch { expected: n, found: f.degree() });
        }
    }
    a.conj().wedge(b)?.top_coefficient()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Multivector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(v: &[f64]) -> LinearMap {
        LinearMap::new(Mat::from_diagonal(&nalgebra::DVector::from_row_slice(v))).unwrap()
    }

    #[test]
    fn group_act_examples() {
        let a = ExteriorForm::omega(2);
        assert_eq!(group_act(&LinearMap::identity(2), &a).unwrap(), a);

        let dxdy = ExteriorForm::omega(1);
        let r = group_act(&diag(&[2.0, 0.5]), &dxdy).unwrap();
        assert!(r.distance(&dxdy) < 1e-15);

        let a = ExteriorForm::dx(2, 0).wedge(&ExteriorForm::dx(2, 1)).unwrap();
        let r = group_act(&diag(&[2.0, 1.0, 0.5, 1.0]), &a).unwrap();
        assert!(r.distance(&a.scale_real(2.0)) < 1e-15);

        let singular = diag(&[1.0, 0.0]);
        assert!(matches!(group_act(&singular, &dxdy), Err(Error::Singular(_))));
    }

    #[test]
    fn derivation_is_derivative_of_pullback() {
        let mut rng = linalg::rng_from_seed(21);
        let a = crate::exterior::random_form(2, 2, &mut rng);
        let x = linalg::gaussian_matrix(4, 4, &mut rng);
        let eps = 1e-6;
        let plus = pullback(&a, &(Mat::identity(4, 4) + &x * eps)).unwrap();
        let minus = pullback(&a, &(Mat::identity(4, 4) - &x * eps)).unwrap();
        let fd = (&plus - &minus).scale_real(0.5 / eps);
        assert!(fd.distance(&derivation(&a, &x).unwrap()) < 1e-8);
    }

    #[test]
    fn right_action() {
        let mut rng = linalg::rng_from_seed(11);
        let g = LinearMap::new(linalg::gaussian_matrix(6, 6, &mut rng)).unwrap();
        let h = LinearMap::new(linalg::gaussian_matrix(6, 6, &mut rng)).unwrap();
        let a = crate::exterior::random_form(3, 3, &mut rng);
        let lhs = group_act(&g.compose(&h), &a).unwrap();
        let rhs = group_act(&h, &group_act(&g, &a).unwrap()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-10 * lhs.norm());
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&LinearMap::identity(2)).0);
        assert!(!is_symplectic(&diag(&[2.0; 4])).0);
        let t: f64 = 0.4;
        let mut m = Mat::identity(4, 4);
        m[(0, 0)] = t.cos();
        m[(0, 2)] = -t.sin();
        m[(2, 0)] = t.sin();
        m[(2, 2)] = t.cos();
        assert!(is_symplectic(&LinearMap::new(m).unwrap()).0);
    }

    #[test]
    fn polar_examples() {
        let p = polar_cartan_decompose(&LinearMap::identity(2)).unwrap();
        assert!(linalg::dist(p.unitary.matrix(), &Mat::identity(4, 4)) < 1e-14);
        assert!(p.log_positive.norm() < 1e-14);

        let t = 0.3f64;
        let p = polar_cartan_decompose(&diag(&[t.exp(), (-t).exp()])).unwrap();
        assert!(linalg::dist(p.unitary.matrix(), &Mat::identity(2, 2)) < 1e-14);
        assert!((p.log_positive[(0, 0)] - t).abs() < 1e-14);
        assert!((p.log_positive[(1, 1)] + t).abs() < 1e-14);

        let mut rng = linalg::rng_from_seed(5);
        for n in 1..=3 {
            let u0 = linalg::unitary_to_real(&linalg::haar_unitary(n, &mut rng));
            let x0 = linalg::random_sp_symmetric(n, 0.5, &mut rng);
            let g = LinearMap::new(&u0 * linalg::exp_symmetric(&x0)).unwrap();
            let p = polar_cartan_decompose(&g).unwrap();
            assert!(linalg::dist(p.unitary.matrix(), &u0) < 1e-8);
            assert!(linalg::dist(&p.log_positive, &x0) < 1e-8);
        }

        assert!(matches!(polar_cartan_decompose(&diag(&[2.0, 2.0])), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn type_decompose_examples() {
        let j = ComplexStructure::standard(1);
        let d = type_decompose(&ExteriorForm::dx(1, 0), &j).unwrap();
        assert!(d.component(1).distance(&ExteriorForm::dz(1, 0).scale_real(0.5)) < 1e-15);
        assert!(d.component(0).distance(&ExteriorForm::dzbar(1, 0).scale_real(0.5)) < 1e-15);

        let dz = ExteriorForm::holomorphic_volume(3);
        let d = type_decompose(&dz, &ComplexStructure::standard(3)).unwrap();
        assert!(d.component(3).distance(&dz) < 1e-14);
        for p in 0..3 {
            assert!(d.component(p).norm() < 1e-14);
        }

        let mut rng = linalg::rng_from_seed(2);
        let js = SiegelPoint::random(2, &mut rng).complex_structure().unwrap();
        let d = type_decompose(&ExteriorForm::omega(2), &js).unwrap();
        assert!(d.component(1).distance(&ExteriorForm::omega(2)) < 1e-12);

        let bad = ComplexStructure::new(-linalg::standard_j(1)).unwrap();
        assert!(matches!(type_decompose(&ExteriorForm::dx(1, 0), &bad), Err(Error::Incompatible(_))));
    }

    #[test]
    fn siegel_examples() {
        let j = SiegelPoint::standard(2).complex_structure().unwrap();
        assert!(linalg::dist(j.matrix(), &linalg::standard_j(2)) < 1e-15);

        let y = Mat::from_diagonal(&nalgebra::DVector::from_row_slice(&[2.0, 1.0]));
        let j = SiegelPoint::new(Mat::zeros(2, 2), y).unwrap().complex_structure().unwrap();
        let mut expected = Mat::zeros(4, 4);
        expected[(0, 2)] = -2.0;
        expected[(1, 3)] = -1.0;
        expected[(2, 0)] = 0.5;
        expected[(3, 1)] = 1.0;
        assert!(linalg::dist(j.matrix(), &expected) < 1e-15);

        let x = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let j = SiegelPoint::new(x, Mat::identity(2, 2)).unwrap().complex_structure().unwrap();
        assert!(j.square_residual() < 1e-12);
        assert!(j.is_compatible());

        assert!(SiegelPoint::new(Mat::zeros(1, 1), Mat::from_element(1, 1, -1.0)).is_err());
    }

    #[test]
    fn siegel_form_is_holomorphic_for_its_structure() {
        let mut rng = linalg::rng_from_seed(8);
        for n in 1..=3 {
            let z = SiegelPoint::random(n, &mut rng);
            let j = z.complex_structure().unwrap();
            let omega_z = z.holomorphic_form();
            let d = type_decompose(&omega_z, &j).unwrap();
            assert!(d.component(n).distance(&omega_z) < 1e-10);
            assert!(omega_z.primitivity_residual() < 1e-12);
        }
    }

    #[test]
    fn siegel_form_evaluates_to_determinant() {
        let mut rng = linalg::rng_from_seed(4);
        let z = SiegelPoint::random(2, &mut rng);
        let m = linalg::gaussian_matrix(2, 2, &mut rng);
        let nn = linalg::gaussian_matrix(2, 2, &mut rng);
        let cols: Vec<Vec<f64>> = (0..2)
            .map(|a| vec![m[(0, a)], m[(1, a)], nn[(0, a)], nn[(1, a)]])
            .collect();
        let w = Multivector::from_vector(2, &cols[0]).unwrap().wedge(&Multivector::from_vector(2, &cols[1]).unwrap()).unwrap();
        let value = z.holomorphic_form().evaluate(&w).unwrap();
        let target = z.z() * nn.map(|v| c(v, 0.0)) + m.map(|v| c(v, 0.0));
        let det = target[(0, 0)] * target[(1, 1)] - target[(0, 1)] * target[(1, 0)];
        assert!((value - det).norm() < 1e-12);
    }

    #[test]
    fn pairing_values() {
        let dz = ExteriorForm::holomorphic_volume(3);
        let v = hermitian_pairing(&dz, &dz).unwrap();
        assert!((v - c(0.0, 8.0)).norm() < 1e-12, "{v}");
        let dz2 = ExteriorForm::holomorphic_volume(2);
        let v = hermitian_pairing(&dz2, &dz2).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-12, "{v}");
        assert!(hermitian_pairing(&dz, &ExteriorForm::omega(3)).is_err());
    }
}
