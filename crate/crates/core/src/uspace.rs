//! Membership in the domain of primitive middle-degree forms that vanish on
//! no Lagrangian subspace, and the structure theory built on it.
//!
//! Exact criteria are used where they exist (`n = 1, 2`); for `n = 3` the
//! positivity of `q_{Re Ω}` and `q_{Im Ω}` is a necessary test that is
//! combined with a numeric minimum of `|Ω|` over the Lagrangian Grassmannian,
//! and for `n ≥ 4` only the numeric test is available.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{ExteriorForm, Multivector, C64};
use crate::lgr::{self, LagrangianFrame};
use crate::linalg::{self, Mat};
use crate::symplectic::{self, ComplexStructure, LinearMap};

/// Relative tolerance for accepting a form as primitive.
pub const PRIMITIVE_TOL: f64 = 1e-9;

/// Default relative threshold on `min |Ω|` for the numeric membership test.
pub const NUMERIC_THRESHOLD: f64 = 1e-6;

/// Checks that `Ω` has degree `n` and is primitive.
pub fn check_middle_primitive(omega: &ExteriorForm) -> Result<()> {
    let n = omega.half_dim();
    if omega.degree() != n {
        return Err(Error::DegreeMismatch { expected: n, found: omega.degree() });
    }
    let residual = omega.primitivity_residual();
    if residual > PRIMITIVE_TOL * omega.max_abs().max(1.0) {
        return Err(Error::NotPrimitive { residual });
    }
    Ok(())
}

/// `⟨a, b⟩ = (a ∧ b)/(ω^n/n!)` for middle-degree forms.
pub fn top_pairing(a: &ExteriorForm, b: &ExteriorForm) -> Result<C64> {
    a.wedge(b)?.top_coefficient()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::NonMember => "non_member",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    ExactN1,
    ExactN2,
    NecessaryN3PlusNumeric,
    NumericOnly,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::ExactN1 => "exact_n1",
            CertificateKind::ExactN2 => "exact_n2",
            CertificateKind::NecessaryN3PlusNumeric => "necessary_n3_plus_numeric",
            CertificateKind::NumericOnly => "numeric_only",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometricity {
    Geometric,
    AlmostGeometric,
    Plain,
    Unknown,
}

impl fmt::Display for Geometricity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometricity::Geometric => "geometric",
            Geometricity::AlmostGeometric => "almost_geometric",
            Geometricity::Plain => "plain",
            Geometricity::Unknown => "unknown",
        })
    }
}

/// Settings for [`is_member_with`].
#[derive(Clone, Debug)]
pub struct MembershipConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Relative threshold on `min |Ω|`; the inconclusive band is one decade
    /// below it.
    pub threshold: f64,
    /// Also run [`classify_geometricity`] on members.
    pub classify: bool,
    /// Relative tolerance passed to [`classify_geometricity`].
    pub classify_tol: f64,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            restarts: lgr::DEFAULT_RESTARTS,
            seed: 0,
            threshold: NUMERIC_THRESHOLD,
            classify: false,
            classify_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub verdict: Verdict,
    /// `+1` or `−1` for members, `None` otherwise.
    pub sign: Option<i32>,
    /// Margin of the deciding criterion: the smallest singular value
    /// (`n = 1`), the smallest eigenvalue of `S_Ω` (`n = 2`) or `min |Ω|`.
    pub margin: f64,
    pub certificate: CertificateKind,
    /// `min |Ω|` over unit Lagrangian decomposables, when computed.
    pub lgr_minimum: Option<f64>,
    pub geometricity: Geometricity,
    /// Relative norms of the non-`(n,0)` part and of the part outside
    /// `(n,0) ⊕ (0,n)`, when classified.
    pub geometricity_residuals: Option<(f64, f64)>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

pub fn is_member(omega: &ExteriorForm) -> Result<MembershipReport> {
    is_member_with(omega, &MembershipConfig::default())
}

pub fn is_member_with(omega: &ExteriorForm, config: &MembershipConfig) -> Result<MembershipReport> {
    check_middle_primitive(omega)?;
    let n = omega.half_dim();
    let scale = omega.norm();
    let mut report = MembershipReport {
        verdict: Verdict::NonMember,
        sign: None,
        margin: 0.0,
        certificate: CertificateKind::NumericOnly,
        lgr_minimum: None,
        geometricity: Geometricity::Unknown,
        geometricity_residuals: None,
    };
    if scale == 0.0 {
        return Ok(report);
    }
    match n {
        1 => {
            report.certificate = CertificateKind::ExactN1;
            let a = omega.coeff(crate::Blade::from_bits(1));
            let b = omega.coeff(crate::Blade::from_bits(2));
            let m = Mat::from_row_slice(2, 2, &[a.re, b.re, a.im, b.im]);
            let smin = m.singular_values().min();
            report.margin = smin;
            if smin > 1e-12 * scale {
                report.verdict = Verdict::Member;
                report.sign = Some(if m.determinant() > 0.0 { 1 } else { -1 });
            }
        }
        2 => {
            report.certificate = CertificateKind::ExactN2;
            let s = s_matrix(omega)?;
            report.margin = s.min_eigenvalue();
            if report.margin > 1e-12 * scale * scale {
                report.verdict = Verdict::Member;
            }
        }
        _ => {
            let threshold = config.threshold * scale;
            if n == 3 {
                report.certificate = CertificateKind::NecessaryN3PlusNumeric;
                let q_re = q_invariants(&omega.re())?;
                let q_im = q_invariants(&omega.im())?;
                let qmin = q_re.min_eigenvalue().min(q_im.min_eigenvalue());
                if !(qmin > 0.0) {
                    report.margin = qmin;
                    return Ok(report);
                }
            }
            let min = lgr::min_abs_on_lgr(omega, config.restarts, config.seed)?;
            report.margin = min.m;
            report.lgr_minimum = Some(min.m);
            report.verdict = if min.m > threshold {
                Verdict::Member
            } else if min.m >= 0.1 * threshold {
                Verdict::Inconclusive
            } else {
                Verdict::NonMember
            };
        }
    }
    if report.verdict == Verdict::Member && report.sign.is_none() {
        report.sign = Some(component_sign(omega)?);
    }
    if report.verdict == Verdict::Member && config.classify {
        let c = classify_geometricity(omega, config.classify_tol)?;
        report.geometricity = c.class;
        report.geometricity_residuals = Some((c.non_holomorphic_residual, c.mixed_residual));
    }
    Ok(report)
}

/// Sign of the winding of the phase loop through the standard Lagrangian;
/// only meaningful for members.
pub fn component_sign(omega: &ExteriorForm) -> Result<i32> {
    let n = omega.half_dim();
    let mut frames = vec![LagrangianFrame::standard(n)];
    frames.extend((0..4).map(|s| lgr::sample_lagrangian(n, s)));
    let mut last = None;
    for f in frames {
        match lgr::loop_winding(omega, &f, 64) {
            Ok(w) if w == n as i64 => return Ok(1),
            Ok(w) if w == -(n as i64) => return Ok(-1),
            Ok(w) => return Err(Error::NonMember(format!("phase loop winds {w} times"))),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one frame tried"))
}

/// The Gram matrix `S_Ω` of `(Re Ω, Im Ω)` for the pairing
/// `⟨a, b⟩ ω²/2 = a ∧ b` on real 2-forms in dimension four.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SMatrix {
    pub aa: f64,
    pub ab: f64,
    pub bb: f64,
}

impl SMatrix {
    pub fn matrix(&self) -> Mat {
        Mat::from_row_slice(2, 2, &[self.aa, self.ab, self.ab, self.bb])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.aa + self.bb);
        let rad = (0.25 * (self.aa - self.bb).powi(2) + self.ab * self.ab).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// Parameters `(r, c)` with `Ω ~ r dz_1∧dz_2 + c dz̄_1∧dz̄_2`, `r > |c|`,
    /// for positive definite `S`.
    ///
    /// `S = 2(r² + |c|²) I + 4r [[Re c, Im c], [Im c, −Re c]]`, whose
    /// eigenvalues are `2(r ± |c|)²`.
    pub fn canonical_parameters(&self) -> Option<(f64, C64)> {
        let (lo, hi) = self.eigenvalues();
        if !(lo > 0.0) {
            return None;
        }
        let (a, b) = ((hi / 2.0).sqrt(), (lo / 2.0).sqrt());
        let r = 0.5 * (a + b);
        let modulus = 0.5 * (a - b);
        let phase = (2.0 * self.ab).atan2(self.aa - self.bb);
        Some((r, C64::from_polar(modulus, phase)))
    }
}

pub fn s_matrix(omega: &ExteriorForm) -> Result<SMatrix> {
    if omega.half_dim() != 2 {
        return Err(Error::Shape(format!("S matrix needs half dimension 2, got {}", omega.half_dim())));
    }
    if omega.degree() != 2 {
        return Err(Error::DegreeMismatch { expected: 2, found: omega.degree() });
    }
    let (a, b) = (omega.re(), omega.im());
    Ok(SMatrix {
        aa: top_pairing(&a, &a)?.re,
        ab: top_pairing(&a, &b)?.re,
        bb: top_pairing(&b, &b)?.re,
    })
}

/// `r dz_1∧dz_2 + c dz̄_1∧dz̄_2`.
pub fn u2_canonical_form(r: f64, c: C64) -> ExteriorForm {
    let dz = ExteriorForm::holomorphic_volume(2);
    &dz.scale_real(r) + &dz.conj().scale(c)
}

/// The quadratic form `q_α`, its raising `K_α` and `d_α = det K_α` for a real
/// primitive 3-form on `R^6`.
#[derive(Clone, Debug)]
pub struct QInvariants {
    pub q: Mat,
    /// `ω(K v, w) = q(v, w)`, i.e. `K = Ωmat q`.
    pub k: Mat,
    pub d: f64,
}

impl QInvariants {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_sym_eigenvalue(&self.q)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

/// `q_α(X, Y) ω³/3! = (X⌞α) ∧ (Y⌞α) ∧ ω`.
pub fn q_invariants(alpha: &ExteriorForm) -> Result<QInvariants> {
    if alpha.half_dim() != 3 {
        return Err(Error::Shape(format!("q needs half dimension 3, got {}", alpha.half_dim())));
    }
    if alpha.degree() != 3 {
        return Err(Error::DegreeMismatch { expected: 3, found: alpha.degree() });
    }
    let max_imag = alpha.max_imag();
    if max_imag > 1e-12 * alpha.max_abs().max(1.0) {
        return Err(Error::NotReal { max_imag });
    }
    let alpha = alpha.re();
    let omega = ExteriorForm::omega(3);
    let contracted: Vec<ExteriorForm> = (0..6)
        .map(|i| Multivector::basis(3, &[i]).and_then(|v| v.contract(&alpha)))
        .collect::<Result<_>>()?;
    let with_omega: Vec<ExteriorForm> =
        contracted.iter().map(|c| c.wedge(&omega)).collect::<Result<_>>()?;
    let mut q = Mat::zeros(6, 6);
    for a in 0..6 {
        for b in a..6 {
            let v = contracted[a].wedge(&with_omega[b])?.top_coefficient()?.re;
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    let k = linalg::omega_matrix(3) * &q;
    let d = k.determinant();
    Ok(QInvariants { q, k, d })
}

/// Coefficients of `p` with `Ω(exp(θJ)w) = e^{−inθ} p(e^{2iθ})`.
#[derive(Clone, Debug)]
pub struct LoopPolynomial {
    /// `a_k = Ω^{k,n−k}(w)`, lowest degree first.
    pub coeffs: Vec<C64>,
    pub roots: Vec<C64>,
    /// Degree `n` with every root in the open unit disk.
    pub roots_in_disk: bool,
}

pub fn loop_polynomial(omega: &ExteriorForm, j: &ComplexStructure, frame: &LagrangianFrame) -> Result<LoopPolynomial> {
    let n = omega.half_dim();
    let types = symplectic::type_decompose(omega, j)?;
    let coeffs: Vec<C64> = (0..=n)
        .map(|k| lgr::evaluate_on_frame(types.component(k), frame))
        .collect::<Result<_>>()?;
    let scale = omega.norm() * frame.matrix().norm().powi(n as i32).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let Some(degree) = coeffs.iter().rposition(|c| c.norm() > tol) else {
        return Err(Error::DegeneratePolynomial);
    };
    let roots = linalg::polynomial_roots(&coeffs[..=degree]);
    let roots_in_disk = degree == n && roots.iter().all(|r| r.norm() < 1.0);
    Ok(LoopPolynomial { coeffs, roots, roots_in_disk })
}

/// `Ω_t = Σ_k t^{n−k} Ω^{k,n−k}`; joins `Ω = Ω_1` to its `(n,0)` part.
pub fn retraction_path(omega: &ExteriorForm, j: &ComplexStructure, t: f64) -> Result<ExteriorForm> {
    let report = is_member(omega)?;
    if report.sign != Some(1) {
        return Err(Error::NonMember("retraction needs a member with positive sign".into()));
    }
    retraction_unchecked(omega, j, t)
}

/// [`retraction_path`] without the membership gate.
pub fn retraction_unchecked(omega: &ExteriorForm, j: &ComplexStructure, t: f64) -> Result<ExteriorForm> {
    let n = omega.half_dim();
    let types = symplectic::type_decompose(omega, j)?;
    let mut out = ExteriorForm::zero(n, omega.degree())?;
    for k in 0..=n {
        out = &out + &types.component(k).scale_real(t.powi((n - k) as i32));
    }
    Ok(out)
}

/// Orthonormal basis of the symmetric part of `sp(2n)`: matrices
/// `[[A, B], [B, −A]]` with `A`, `B` symmetric.
pub fn sp_symmetric_basis(n: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(n * (n + 1));
    for first in [true, false] {
        for a in 0..n {
            for b in a..n {
                let mut e = Mat::zeros(n, n);
                let w = if a == b { FRAC_1_SQRT_2 } else { 0.5 };
                e[(a, b)] = w;
                e[(b, a)] = w;
                let z = Mat::zeros(n, n);
                out.push(if first { linalg::sp_symmetric_block(&e, &z) } else { linalg::sp_symmetric_block(&z, &e) });
            }
        }
    }
    out
}

/// Outcome of [`git_minimize`].
#[derive(Clone, Debug)]
pub struct GitResult {
    /// Complex structure for which `Ω` has minimal norm: `g J_0 g⁻¹`.
    pub j_star: ComplexStructure,
    pub g: LinearMap,
    /// `g^*Ω`, balanced with respect to the standard structure.
    pub transported: ExteriorForm,
    pub norm_sq: f64,
    pub gradient_residual: f64,
    pub iterations: usize,
    /// `‖g_i^*Ω‖²` after each accepted step, starting with the input.
    pub history: Vec<f64>,
    pub converged: bool,
    /// The norm collapsed below `1e-12` of its initial value.
    pub suspected_non_member: bool,
}

fn git_gradient(phi: &ExteriorForm, basis: &[Mat]) -> Result<Vec<f64>> {
    basis
        .iter()
        .map(|p| Ok(2.0 * phi.inner(&symplectic::derivation(phi, p)?).re))
        .collect()
}

/// Gradient descent of `g ↦ ‖g^*Ω‖²` along `g ← g exp(X)`, `X` symmetric in
/// `sp`, with Armijo backtracking (initial step 1, factor 1/2, `c = 1e-4`).
/// Converges when the gradient norm is below `tol · ‖g^*Ω‖²`.
pub fn git_minimize(omega: &ExteriorForm, max_iter: usize, tol: f64) -> Result<GitResult> {
    let n = omega.half_dim();
    let basis = sp_symmetric_basis(n);
    let mut g = Mat::identity(2 * n, 2 * n);
    let mut phi = omega.clone();
    let mut value = phi.norm_sqr();
    let initial = value;
    let mut history = vec![value];
    let mut grad = git_gradient(&phi, &basis)?;
    let mut gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut iterations = 0;
    let mut converged = gnorm <= tol * value;
    let mut suspected = false;
    while !converged && iterations < max_iter {
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-20 {
            let mut x = Mat::zeros(2 * n, 2 * n);
            for (gk, p) in grad.iter().zip(&basis) {
                x -= p * (step * gk);
            }
            let e = linalg::exp_symmetric(&x);
            let cand = symplectic::pullback(&phi, &e)?;
            let cv = cand.norm_sqr();
            if cv <= value - 1e-4 * step * gnorm * gnorm {
                accepted = Some((e, cand, cv));
                break;
            }
            step *= 0.5;
        }
        let Some((e, cand, cv)) = accepted else { break };
        g = g * e;
        phi = cand;
        value = cv;
        history.push(value);
        iterations += 1;
        if value < 1e-12 * initial {
            suspected = true;
            break;
        }
        grad = git_gradient(&phi, &basis)?;
        gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        converged = gnorm <= tol * value;
    }
    let g = LinearMap::new(g)?;
    let j_star = ComplexStructure::new(g.matrix() * linalg::standard_j(n) * g.inverse()?.matrix())?;
    Ok(GitResult {
        j_star,
        g,
        transported: phi,
        norm_sq: value,
        gradient_residual: gnorm,
        iterations,
        history,
        converged,
        suspected_non_member: suspected,
    })
}

#[derive(Clone, Debug)]
pub struct GeometricityReport {
    pub class: Geometricity,
    /// `‖Ω − Ω^{n,0}‖ / ‖Ω‖` at the minimising structure.
    pub non_holomorphic_residual: f64,
    /// `‖Ω − Ω^{n,0} − Ω^{0,n}‖ / ‖Ω‖` at the minimising structure.
    pub mixed_residual: f64,
    pub git: GitResult,
}

/// Classifies a member by its type decomposition at the norm-minimising
/// complex structure. Forms with negative winding are never almost geometric.
pub fn classify_geometricity(omega: &ExteriorForm, tol: f64) -> Result<GeometricityReport> {
    check_middle_primitive(omega)?;
    let n = omega.half_dim();
    let git = git_minimize(omega, 5000, 1e-10)?;
    if git.suspected_non_member {
        return Err(Error::NonMember("norm minimisation escaped to zero".into()));
    }
    let phi = &git.transported;
    let scale = phi.norm();
    let types = symplectic::type_decompose(phi, &ComplexStructure::standard(n))?;
    let top = types.component(n);
    let bottom = types.component(0);
    let non_holo = (phi - top).norm() / scale;
    let mixed = (&(phi - top) - bottom).norm() / scale;
    let positive = top.norm() > bottom.norm();
    let class = if non_holo < tol {
        Geometricity::Geometric
    } else if mixed < tol && positive {
        Geometricity::AlmostGeometric
    } else {
        Geometricity::Plain
    };
    Ok(GeometricityReport { class, non_holomorphic_residual: non_holo, mixed_residual: mixed, git })
}

/// Result of [`hitchin_partner`].
#[derive(Clone, Debug)]
pub struct HitchinPartner {
    pub j: ComplexStructure,
    /// The `(3,0)` form with real part `α`.
    pub omega: ExteriorForm,
    /// Norm of the non-`(3,0)` components of `omega` relative to its norm.
    pub type_residual: f64,
}

/// For a real primitive 3-form with `q_α` positive definite, the compatible
/// complex structure `J = −K_α / d_α^{1/6}` and the `(3,0)` form
/// `α + i s α̂` with `α̂ = (1/3) D_J α`, `s = ±1`.
pub fn hitchin_partner(alpha: &ExteriorForm) -> Result<HitchinPartner> {
    let inv = q_invariants(alpha)?;
    let min_eig = inv.min_eigenvalue();
    if !(min_eig > 0.0) {
        return Err(Error::IndefiniteQ { min_eig });
    }
    let alpha = alpha.re();
    let j = ComplexStructure::new(-&inv.k / inv.d.powf(1.0 / 6.0))?;
    if !j.is_compatible() {
        return Err(Error::Incompatible("structure recovered from q is not compatible".into()));
    }
    let hat = symplectic::derivation(&alpha, j.matrix())?.scale_real(1.0 / 3.0);
    let mut best: Option<HitchinPartner> = None;
    for s in [1.0, -1.0] {
        let omega = &alpha + &hat.scale(C64::new(0.0, s));
        let types = symplectic::type_decompose(&omega, &j)?;
        let residual = (&omega - types.component(3)).norm() / omega.norm();
        if best.as_ref().is_none_or(|b| residual < b.type_residual) {
            best = Some(HitchinPartner { j: j.clone(), omega, type_residual: residual });
        }
    }
    Ok(best.expect("two candidates"))
}

/// `Re(c_1 dZ) + i Im(c_2 ∧_k (λ_k dx_k + i dy_k))` on `R^6`.
pub fn u3_normal_form(c1: C64, c2: C64, lambda: [f64; 3]) -> ExteriorForm {
    let first = ExteriorForm::holomorphic_volume(3).scale(c1).re();
    let factors = (0..3).map(|k| &ExteriorForm::dx(3, k).scale_real(lambda[k]) + &ExteriorForm::dy(3, k).scale(C64::i()));
    let second = crate::exterior::wedge_all(3, factors).scale(c2).im();
    &first + &second.scale(C64::i())
}

/// Parameters of the six-dimensional normal form.
#[derive(Clone, Debug)]
pub struct U3NormalForm {
    pub c1: C64,
    pub c2: C64,
    /// Ascending, in `(0, 1]`.
    pub lambda: [f64; 3],
    /// Symplectic map with `g^*Ω = u3_normal_form(c1, c2, λ)`.
    pub g: LinearMap,
    /// `‖g^*Ω − u3_normal_form(c1, c2, λ)‖ / ‖Ω‖`.
    pub residual: f64,
}

/// Symplectic `g` with `g⁻¹ J g = J_std`, built from a `J`-orthonormal basis
/// of the `x`-axes.
fn unitary_frame_for(j: &ComplexStructure) -> Result<Mat> {
    let n = j.half_dim();
    let metric = linalg::symmetrize(&j.metric());
    let mut us: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut v = nalgebra::DVector::zeros(2 * n);
        v[a] = 1.0;
        for u in &us {
            let proj = (u.transpose() * &metric * &v)[(0, 0)];
            v -= u * proj;
        }
        let norm = (v.transpose() * &metric * &v)[(0, 0)].sqrt();
        if !(norm > 1e-12) {
            return Err(Error::Singular("degenerate metric".into()));
        }
        us.push(v / norm);
    }
    let mut g = Mat::zeros(2 * n, 2 * n);
    for (a, u) in us.iter().enumerate() {
        g.set_column(a, u);
        g.set_column(n + a, &(j.matrix() * u));
    }
    Ok(g)
}

/// Unitary `h` (for `J_std`) with `h⁻¹ J h = [[0, −Λ⁻¹], [Λ, 0]]`,
/// `Λ = diag(λ)` ascending in `(0, 1]`.
fn diagonalize_second_structure(j: &ComplexStructure) -> Result<(Mat, [f64; 3])> {
    let n = j.half_dim();
    let p = linalg::symmetrize(&j.metric());
    let eig = p.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let jstd = linalg::standard_j(n);
    // Eigenvectors with eigenvalue ≤ 1; the λ = 1 cluster is J_std-invariant
    // and is split by complex Gram–Schmidt.
    let mut vs: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for &idx in &order {
        if vs.len() == n {
            break;
        }
        let mut v = eig.eigenvectors.column(idx).into_owned();
        for u in &vs {
            let ju = &jstd * u;
            v -= u * u.dot(&v);
            v -= &ju * ju.dot(&v);
        }
        let norm = v.norm();
        if norm < 1e-6 {
            continue;
        }
        vs.push(v / norm);
        lambdas.push(eig.eigenvalues[idx]);
    }
    if vs.len() != n {
        return Err(Error::Inconclusive("could not split the second complex structure".into()));
    }
    let mut h = Mat::zeros(2 * n, 2 * n);
    for (a, v) in vs.iter().enumerate() {
        h.set_column(a, v);
        h.set_column(n + a, &(&jstd * v));
    }
    let mut lambda = [0.0; 3];
    for (k, l) in lambdas.iter().enumerate() {
        lambda[k] = l.min(1.0);
    }
    Ok((h, lambda))
}

/// Brings a six-dimensional member to the normal form
/// `Re(c_1 dZ) + i Im(c_2 ∧(λ_k dx_k + i dy_k))` by a symplectic change of
/// coordinates. `c_1` is normalised to have argument in `[0, π)`.
pub fn normal_form_u3(omega: &ExteriorForm) -> Result<U3NormalForm> {
    check_middle_primitive(omega)?;
    if omega.half_dim() != 3 {
        return Err(Error::Shape("normal form needs half dimension 3".into()));
    }
    let report = is_member(omega)?;
    if report.verdict != Verdict::Member {
        return Err(Error::NonMember(format!("verdict {}", report.verdict)));
    }
    let first = hitchin_partner(&omega.re())?;
    let second = hitchin_partner(&omega.im())?;
    let omega2 = second.omega.scale(C64::i());

    let g1 = unitary_frame_for(&first.j)?;
    let g1_map = LinearMap::new(g1.clone())?;
    let j2 = second.j.conjugate_by(&g1_map)?;
    let (h, lambda) = diagonalize_second_structure(&j2)?;
    let mut g = g1 * h;

    let blade = crate::Blade::from_indices(&[0, 1, 2]).expect("distinct");
    let mut c1 = symplectic::pullback(&first.omega, &g)?.coeff(blade);
    let mut c2 = symplectic::pullback(&omega2, &g)?.coeff(blade) / lambda.iter().product::<f64>();
    let arg = c1.arg();
    if !(0.0..std::f64::consts::PI).contains(&arg) {
        c1 = -c1;
        c2 = -c2;
        g = -g;
    }
    let transported = symplectic::pullback(omega, &g)?;
    let residual = transported.distance(&u3_normal_form(c1, c2, lambda)) / omega.norm();
    if residual > 1e-6 {
        return Err(Error::Inconclusive(format!("normal form residual {residual:.3e}")));
    }
    Ok(U3NormalForm { c1, c2, lambda, g: LinearMap::new(g)?, residual })
}

/// Reduction `Ω ↦ ν⌞Ω|_W` to `W/W^⊥`.
///
/// `w` holds a basis of the coisotropic subspace `W` in its columns and `nu`
/// spans `Λ^j W^⊥`. The quotient is identified with `R^{2(n−j)}` by a
/// symplectic basis obtained from the standard basis vectors projected onto
/// the Euclidean complement of `W^⊥` in `W`.
pub fn reduce(omega: &ExteriorForm, w: &Mat, nu: &Multivector) -> Result<ExteriorForm> {
    check_middle_primitive(omega)?;
    let n = omega.half_dim();
    let dim = 2 * n;
    if w.nrows() != dim || w.ncols() > dim || w.ncols() < n {
        return Err(Error::Shape(format!("W must be a {dim} x k matrix with n <= k <= 2n")));
    }
    let j = dim - w.ncols();
    if nu.degree() != j || nu.half_dim() != n {
        return Err(Error::DegreeMismatch { expected: j, found: nu.degree() });
    }
    if nu.is_zero() {
        return Err(Error::ZeroMultivector);
    }
    let svd = w.clone().svd(true, false);
    let smax = svd.singular_values.max();
    if !(svd.singular_values.min() > 1e-10 * smax) {
        return Err(Error::Singular("W is rank deficient".into()));
    }
    // Orthonormal basis of W.
    let wq = w.clone().qr().q();
    let om = linalg::omega_matrix(n);
    // W^⊥ = ker(Wᵀ Ω); its dimension is at least j.
    let perp = null_space(&(wq.transpose() * &om), j)?;
    let proj_w = &wq * wq.transpose();
    let residual = (&perp - &proj_w * &perp).norm();
    if residual > 1e-9 {
        return Err(Error::NotCoisotropic { residual });
    }
    // ν must be a multiple of the wedge of the W^⊥ basis.
    let perp_wedge = crate::exterior::wedge_all(
        n,
        (0..j).map(|c| {
            let v: Vec<f64> = perp.column(c).iter().copied().collect();
            Multivector::from_vector(n, &v).expect("length 2n")
        }),
    );
    let ratio = perp_wedge.inner(nu) / perp_wedge.norm_sqr();
    if (nu - &perp_wedge.scale(ratio)).norm() > 1e-9 * nu.norm() {
        return Err(Error::Shape("nu does not span the top power of W^perp".into()));
    }
    let contracted = nu.contract(omega)?;
    // Complement of W^⊥ inside W, then a symplectic basis of it.
    let proj_perp = &perp * perp.transpose();
    let proj_c = &proj_w - &proj_perp;
    let m = n - j;
    let basis = symplectic_basis((0..dim).map(|i| proj_c.column(i).into_owned()).collect(), m)?;
    symplectic::pullback(&contracted, &basis)
}

/// Reduction along the hyperplane `v^ω = {u : ω(v, u) = 0}` with `ν = v`.
pub fn reduce_along_vector(omega: &ExteriorForm, v: &[f64]) -> Result<ExteriorForm> {
    let n = omega.half_dim();
    if v.len() != 2 * n {
        return Err(Error::Shape(format!("vector of length {} in dimension {}", v.len(), 2 * n)));
    }
    let vv = nalgebra::DVector::from_row_slice(v);
    if vv.norm() == 0.0 {
        return Err(Error::ZeroMultivector);
    }
    let row = Mat::from_row_slice(1, 2 * n, (vv.transpose() * linalg::omega_matrix(n)).as_slice());
    let w = null_space(&row, 2 * n - 1)?;
    reduce(omega, &w, &Multivector::from_vector(n, v)?)
}

/// Orthonormal basis (columns) of the kernel of `a`, which must have
/// dimension exactly `dim`.
fn null_space(a: &Mat, dim: usize) -> Result<Mat> {
    let cols = a.ncols();
    if dim == 0 {
        return Ok(Mat::zeros(cols, 0));
    }
    // Pad to a square matrix so the SVD returns a full right basis.
    let mut sq = Mat::zeros(cols, cols);
    sq.view_mut((0, 0), (a.nrows().min(cols), cols)).copy_from(&a.rows(0, a.nrows().min(cols)));
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..cols).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let scale = svd.singular_values.max().max(1.0);
    let kernel: Vec<usize> = idx.iter().copied().filter(|&i| svd.singular_values[i] <= 1e-9 * scale).collect();
    if kernel.len() != dim {
        return Err(Error::NotCoisotropic { residual: svd.singular_values[idx[dim.min(cols - 1)]] });
    }
    let mut out = Mat::zeros(cols, dim);
    for (c, &i) in kernel.iter().enumerate() {
        out.set_column(c, &vt.row(i).transpose());
    }
    Ok(out)
}

/// Symplectic Gram–Schmidt on candidate vectors spanning a symplectic
/// subspace of dimension `2m`; returns columns `[a_1..a_m, b_1..b_m]`.
fn symplectic_basis(mut cands: Vec<nalgebra::DVector<f64>>, m: usize) -> Result<Mat> {
    let dim = cands.first().map_or(0, |v| v.len());
    let om = linalg::omega_matrix(dim / 2);
    let form = |x: &nalgebra::DVector<f64>, y: &nalgebra::DVector<f64>| (x.transpose() * &om * y)[(0, 0)];
    let mut a_vecs = Vec::with_capacity(m);
    let mut b_vecs = Vec::with_capacity(m);
    while a_vecs.len() < m {
        let Some(ai) = cands.iter().position(|c| c.norm() > 1e-9) else {
            return Err(Error::Singular("quotient is not symplectic".into()));
        };
        let a = cands.remove(ai);
        let a = &a / a.norm();
        let Some(bi) = cands.iter().position(|c| form(&a, c).abs() > 1e-9) else {
            return Err(Error::Singular("quotient is not symplectic".into()));
        };
        let b = cands.remove(bi);
        let b = &b / form(&a, &b);
        for c in cands.iter_mut() {
            let (cb, ca) = (form(c, &b), form(c, &a));
            *c = &*c - &a * cb + &b * ca;
        }
        a_vecs.push(a);
        b_vecs.push(b);
    }
    let mut out = Mat::zeros(dim, 2 * m);
    for k in 0..m {
        out.set_column(k, &a_vecs[k]);
        out.set_column(m + k, &b_vecs[k]);
    }
    Ok(out)
}

/// `p_1^*Ω_1 ∧ p_2^*Ω_2` on `R^{2n_1} ⊕ R^{2n_2}`, with coordinates ordered
/// `x^{(1)}, x^{(2)}, y^{(1)}, y^{(2)}`.
pub fn product(a: &ExteriorForm, b: &ExteriorForm) -> Result<ExteriorForm> {
    let (n1, n2) = (a.half_dim(), b.half_dim());
    let n = n1 + n2;
    let mut p1 = Mat::zeros(2 * n1, 2 * n);
    for i in 0..n1 {
        p1[(i, i)] = 1.0;
        p1[(n1 + i, n + i)] = 1.0;
    }
    let mut p2 = Mat::zeros(2 * n2, 2 * n);
    for i in 0..n2 {
        p2[(i, n1 + i)] = 1.0;
        p2[(n2 + i, n + n1 + i)] = 1.0;
    }
    let out = symplectic::pullback(a, &p1)?.wedge(&symplectic::pullback(b, &p2)?)?;
    Ok(out)
}

/// `dVol_Ω / dVol_ω` with `dVol_Ω = (−1)^{n(n−1)/2} (i/2)^n Ω ∧ Ω̄`, as a
/// complex number (real up to round-off).
pub fn vol_ratio_complex(omega: &ExteriorForm) -> Result<C64> {
    let n = omega.half_dim();
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let factor = C64::new(0.0, 0.5).powu(n as u32) * sign;
    Ok(omega.wedge(&omega.conj())?.top_coefficient()? * factor)
}

pub fn vol_ratio(omega: &ExteriorForm) -> Result<f64> {
    Ok(vol_ratio_complex(omega)?.re)
}

/// Generators of test and experiment inputs.
pub mod sampling {
    use super::*;

    /// `e^{iφ} Ω_Z` for a random Siegel point `Z` and phase `φ`.
    pub fn random_geometric<R: Rng>(n: usize, rng: &mut R) -> ExteriorForm {
        let z = symplectic::SiegelPoint::random(n, rng);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        z.holomorphic_form().scale(C64::from_polar(1.0, phase))
    }

    /// `Ω + εΩ̄` with `Ω` geometric and `|ε| ≤ max_eps < 1`.
    pub fn random_almost_geometric<R: Rng>(n: usize, max_eps: f64, rng: &mut R) -> ExteriorForm {
        let base = random_geometric(n, rng);
        let eps = C64::from_polar(rng.random_range(0.0..max_eps), rng.random_range(0.0..std::f64::consts::TAU));
        &base + &base.conj().scale(eps)
    }

    /// A member of the positive component in dimension six, built from the
    /// normal form with random parameters, transported by a random
    /// symplectic map and filtered by [`is_member`].
    pub fn random_u3_member<R: Rng>(rng: &mut R) -> Result<ExteriorForm> {
        for _ in 0..200 {
            let c1 = C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
            let c2 = c1 * C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-1.2..1.2));
            let mut lambda = [rng.random_range(0.3..1.0), rng.random_range(0.3..1.0), rng.random_range(0.3..1.0)];
            lambda.sort_by(f64::total_cmp);
            let g = linalg::random_symplectic(3, 0.4, rng);
            let omega = symplectic::pullback(&u3_normal_form(c1, c2, lambda), &g)?;
            let config = MembershipConfig { restarts: 16, seed: rng.random(), ..Default::default() };
            let report = is_member_with(&omega, &config)?;
            if report.verdict == Verdict::Member {
                return Ok(if report.sign == Some(1) { omega } else { omega.conj() });
            }
        }
        Err(Error::RejectionBudget { accepted: 0, attempted: 200 })
    }

    /// Random member of the positive component in dimension four:
    /// `g^*(r dz_1∧dz_2 + c dz̄_1∧dz̄_2)` with `r > |c|`.
    pub fn random_u2_member<R: Rng>(rng: &mut R) -> ExteriorForm {
        let r = rng.random_range(0.5..2.0);
        let c = C64::from_polar(r * rng.random_range(0.0..0.9), rng.random_range(0.0..std::f64::consts::TAU));
        let g = linalg::random_symplectic(2, 0.4, rng);
        symplectic::pullback(&u2_canonical_form(r, c), &g).expect("square map")
    }

    /// Random member of the positive component in dimension two:
    /// `a dx + b dy` whose real matrix `[[Re a, Re b], [Im a, Im b]]` has
    /// positive determinant.
    pub fn random_u1_member<R: Rng>(rng: &mut R) -> ExteriorForm {
        loop {
            let mut m = linalg::gaussian_matrix(2, 2, rng);
            let det = m.determinant();
            if det.abs() < 0.1 {
                continue;
            }
            if det < 0.0 {
                m.set_column(1, &(-m.column(1)));
            }
            let a = C64::new(m[(0, 0)], m[(1, 0)]);
            let b = C64::new(m[(0, 1)], m[(1, 1)]);
            return &ExteriorForm::dx(1, 0).scale(a) + &ExteriorForm::dy(1, 0).scale(b);
        }
    }

    /// Random member of the positive component, almost geometric when
    /// `n ≤ 2` by construction.
    pub fn random_member<R: Rng>(n: usize, rng: &mut R) -> Result<ExteriorForm> {
        match n {
            1 => Ok(random_u1_member(rng)),
            2 => Ok(random_u2_member(rng)),
            3 => random_u3_member(rng),
            _ => Ok(random_almost_geometric(n, 0.5, rng)),
        }
    }

    /// Random symplectic map as a [`LinearMap`].
    pub fn random_symplectic_map<R: Rng>(n: usize, scale: f64, rng: &mut R) -> LinearMap {
        LinearMap::new(linalg::random_symplectic(n, scale, rng)).expect("square")
    }
}
