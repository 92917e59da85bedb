//! The `GL⁺(2,R)` action on `(Re Ω, Im Ω)`, the unit-volume slice and the
//! `f`-invariant `log|d_{Re Ω}|` in dimension six.
//!
//! Under `T = diag(2, 1/2)` the real part doubles, `d` picks up `2^12` and
//! `f` shifts by exactly `12 log 2`. Iterating `T` drives `f` to infinity
//! while staying in the unit-volume slice.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{random_primitive, ExteriorForm, C64};
use crate::linalg;
use crate::table::fmt12;
use crate::uspace::{self, sampling, Geometricity, MembershipConfig, Verdict};

/// `12 log 2`, the shift of `f` under [`PlaneAction::shift`].
pub const SHIFT_CONSTANT: f64 = 12.0 * std::f64::consts::LN_2;

/// A real 2×2 matrix with positive determinant acting on `(Re Ω, Im Ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneAction {
    m: [[f64; 2]; 2],
}

impl PlaneAction {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !(det > 0.0) {
            return Err(Error::Shape(format!("plane action needs positive determinant, got {det}")));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// Rotation by `θ`; acts as multiplication by `e^{iθ}`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { m: [[c, -s], [s, c]] }
    }

    pub fn diagonal(a: f64, b: f64) -> Result<Self> {
        Self::new([[a, 0.0], [0.0, b]])
    }

    /// `diag(e^t, e^{−t})`.
    pub fn flow(t: f64) -> Self {
        Self { m: [[t.exp(), 0.0], [0.0, (-t).exp()]] }
    }

    /// `T = diag(2, 1/2)`, exact in binary.
    pub fn shift() -> Self {
        Self { m: [[2.0, 0.0], [0.0, 0.5]] }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn compose(&self, other: &PlaneAction) -> PlaneAction {
        let (a, b) = (self.m, other.m);
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        PlaneAction { m }
    }

    pub fn inverse(&self) -> PlaneAction {
        let d = self.det();
        let m = self.m;
        PlaneAction { m: [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]] }
    }
}

/// Replaces `(Re Ω, Im Ω)` by `A·(Re Ω, Im Ω)`.
pub fn gl2_act(a: &PlaneAction, omega: &ExteriorForm) -> ExteriorForm {
    let m = a.m;
    omega.map(|z| C64::new(m[0][0] * z.re + m[0][1] * z.im, m[1][0] * z.re + m[1][1] * z.im))
}

/// Scales `Ω` by the positive real `vol_ratio(Ω)^{−1/2}`.
pub fn normalize_unit_volume(omega: &ExteriorForm) -> Result<ExteriorForm> {
    let v = uspace::vol_ratio(omega)?;
    if !(v > 0.0) {
        return Err(Error::NonPositiveVolume(v));
    }
    Ok(omega.scale_real(v.sqrt().recip()))
}

/// `f(Ω) = log|d_{Re Ω}|` for six-dimensional forms with definite `q_{Re Ω}`.
pub fn f_invariant(omega: &ExteriorForm) -> Result<f64> {
    if omega.half_dim() != 3 || omega.degree() != 3 {
        return Err(Error::Shape(format!(
            "f is defined on 3-forms in dimension six, got a {}-form with n = {}",
            omega.degree(),
            omega.half_dim()
        )));
    }
    let inv = uspace::q_invariants(&omega.re())?;
    let min_eig = inv.min_eigenvalue();
    if min_eig <= 0.0 {
        return Err(Error::IndefiniteQ { min_eig });
    }
    Ok(inv.d.abs().ln())
}

/// `f(TΩ) − f(Ω)` for `T = diag(2, 1/2)`.
pub fn shift_check(omega: &ExteriorForm) -> Result<f64> {
    shift_check_by(omega, &PlaneAction::shift())
}

/// `f(AΩ) − f(Ω)`.
pub fn shift_check_by(omega: &ExteriorForm, a: &PlaneAction) -> Result<f64> {
    Ok(f_invariant(&gl2_act(a, omega))? - f_invariant(omega)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// `e^{iφ} Ω_Z` for a random Siegel point `Z`.
    Geometric,
    /// Geometric plus `εΩ̄`, `|ε| < 1/2`.
    AlmostGeometric,
    /// Almost geometric plus a random primitive perturbation of relative
    /// size [`PERTURBATION_SCALE`].
    Perturbed,
}

/// Relative size of the perturbation in [`Strategy::Perturbed`].
pub const PERTURBATION_SCALE: f64 = 0.05;

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Geometric => "geometric",
            Strategy::AlmostGeometric => "ag",
            Strategy::Perturbed => "perturbed",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Strategy::Geometric),
            "ag" => Ok(Strategy::AlmostGeometric),
            "perturbed" => Ok(Strategy::Perturbed),
            _ => Err(Error::Shape(format!("unknown strategy `{s}` (expected geometric, ag or perturbed)"))),
        }
    }
}

/// One attempt of [`sample_members`]. Rejected attempts keep only their seed.
#[derive(Clone, Debug)]
pub struct FlowSample {
    pub attempt: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub accepted: bool,
    /// Unit-volume form (accepted attempts only).
    pub form: Option<ExteriorForm>,
    pub f: Option<f64>,
    pub delta_f: Option<f64>,
    pub geometricity: Option<Geometricity>,
}

impl FlowSample {
    /// `normalized` holds for every accepted sample.
    pub fn normalized(&self) -> bool {
        self.form.as_ref().is_some_and(|f| uspace::vol_ratio(f).is_ok_and(|v| (v - 1.0).abs() < 1e-10))
    }
}

/// Every attempt made, in order, up to the `count`-th acceptance.
#[derive(Clone, Debug)]
pub struct SampleRun {
    pub strategy: Strategy,
    pub seed: u64,
    pub attempts: Vec<FlowSample>,
}

impl SampleRun {
    pub fn accepted(&self) -> impl Iterator<Item = &FlowSample> {
        self.attempts.iter().filter(|s| s.accepted)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts.is_empty() {
            return 0.0;
        }
        self.accepted().count() as f64 / self.attempts.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["sample_id", "strategy", "f", "delta_f_after_T", "geometricity", "accepted", "seed"])?;
        for s in &self.attempts {
            let opt = |x: Option<f64>| x.map(fmt12).unwrap_or_default();
            wr.write_record([
                s.attempt.to_string(),
                s.strategy.to_string(),
                opt(s.f),
                opt(s.delta_f),
                s.geometricity.map(|g| g.to_string()).unwrap_or_default(),
                s.accepted.to_string(),
                s.seed.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Attempts allowed per requested sample before giving up.
pub const REJECTION_BUDGET_FACTOR: usize = 20;

fn draw(strategy: Strategy, seed: u64) -> Result<Option<ExteriorForm>> {
    let mut rng = linalg::rng_from_seed(seed);
    let candidate = match strategy {
        Strategy::Geometric => sampling::random_geometric(3, &mut rng),
        Strategy::AlmostGeometric => sampling::random_almost_geometric(3, 0.5, &mut rng),
        Strategy::Perturbed => {
            let base = sampling::random_almost_geometric(3, 0.5, &mut rng);
            let p = random_primitive(3, &mut rng);
            &base + &p.scale_real(PERTURBATION_SCALE * base.norm() / p.norm())
        }
    };
    if strategy != Strategy::Geometric {
        let cfg = MembershipConfig { restarts: 16, seed, ..Default::default() };
        let rep = uspace::is_member_with(&candidate, &cfg)?;
        if rep.verdict != Verdict::Member || rep.sign != Some(1) {
            return Ok(None);
        }
    }
    Ok(Some(normalize_unit_volume(&candidate)?))
}

fn attempt(strategy: Strategy, run_seed: u64, index: usize) -> Result<FlowSample> {
    let seed = linalg::derive_seed(run_seed, index as u64);
    let mut s = FlowSample {
        attempt: index,
        strategy,
        seed,
        accepted: false,
        form: None,
        f: None,
        delta_f: None,
        geometricity: None,
    };
    if let Some(form) = draw(strategy, seed)? {
        s.f = Some(f_invariant(&form)?);
        s.delta_f = Some(shift_check(&form)?);
        s.geometricity = Some(match uspace::classify_geometricity(&form, 1e-6) {
            Ok(r) => r.class,
            Err(_) => Geometricity::Unknown,
        });
        s.form = Some(form);
        s.accepted = true;
    }
    Ok(s)
}

/// Draws unit-volume members of the positive component in dimension six.
/// The strategies are not samples of any invariant measure.
pub fn sample_members(count: usize, seed: u64, strategy: Strategy) -> Result<SampleRun> {
    let budget = count * REJECTION_BUDGET_FACTOR;
    let mut attempts = Vec::new();
    let mut accepted = 0;
    let batch = count.max(1);
    let mut next = 0;
    while accepted < count {
        if next >= budget {
            return Err(Error::RejectionBudget { accepted, attempted: next });
        }
        let end = (next + batch).min(budget);
        let results: Vec<Result<FlowSample>> = (next..end).into_par_iter().map(|i| attempt(strategy, seed, i)).collect();
        for r in results {
            let s = r?;
            if accepted < count {
                accepted += usize::from(s.accepted);
                attempts.push(s);
            }
        }
        next = end;
    }
    Ok(SampleRun { strategy, seed, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic;

    fn dz() -> ExteriorForm {
        ExteriorForm::holomorphic_volume(3)
    }

    #[test]
    fn plane_action_examples() {
        let mut rng = linalg::rng_from_seed(1);
        let f = sampling::random_u3_member(&mut rng).unwrap();
        assert!(gl2_act(&PlaneAction::identity(), &f).distance(&f) == 0.0);
        let th = 0.7;
        let rotated = gl2_act(&PlaneAction::rotation(th), &f);
        assert!(rotated.distance(&f.scale(C64::from_polar(1.0, th))) < 1e-14 * f.norm());
        assert!(PlaneAction::new([[1.0, 0.0], [0.0, -1.0]]).is_err());
        let a = PlaneAction::new([[1.0, 2.0], [0.5, 3.0]]).unwrap();
        assert!(gl2_act(&a.inverse(), &gl2_act(&a, &f)).distance(&f) < 1e-13);
    }

    /// `Ω∧Ω̄ = −2i α∧β`, so an `SL(2)` action keeps the volume.
    #[test]
    fn unimodular_actions_keep_volume() {
        let mut rng = linalg::rng_from_seed(2);
        let f = sampling::random_u3_member(&mut rng).unwrap();
        let v = uspace::vol_ratio(&f).unwrap();
        let ab = f.re().wedge(&f.im()).unwrap().top_coefficient().unwrap().re;
        // (−1)^3 (i/2)^3 (−2i) = 1/4
        assert!((v - 0.25 * ab).abs() < 1e-10 * v);
        let t = gl2_act(&PlaneAction::diagonal(2.0, 0.5).unwrap(), &f);
        assert!((uspace::vol_ratio(&t).unwrap() - v).abs() < 1e-10 * v);
        for _ in 0..20 {
            let (a, b, c): (f64, f64, f64) = (
                rand::Rng::random_range(&mut rng, 0.3..2.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
            );
            let m = PlaneAction::new([[a, b], [c, (1.0 + b * c) / a]]).unwrap();
            assert!((m.det() - 1.0).abs() < 1e-12);
            assert!((uspace::vol_ratio(&gl2_act(&m, &f)).unwrap() - v).abs() < 1e-10 * v.max(1.0));
        }
    }

    #[test]
    fn action_commutes_with_pullback() {
        let mut rng = linalg::rng_from_seed(3);
        let f = sampling::random_u3_member(&mut rng).unwrap();
        let g = linalg::random_symplectic(3, 0.4, &mut rng);
        let a = PlaneAction::new([[1.3, -0.4], [0.2, 0.9]]).unwrap();
        let lhs = symplectic::pullback(&gl2_act(&a, &f), &g).unwrap();
        let rhs = gl2_act(&a, &symplectic::pullback(&f, &g).unwrap());
        assert!(lhs.distance(&rhs) < 1e-12 * lhs.norm());
    }

    #[test]
    fn normalization_examples() {
        assert!(normalize_unit_volume(&dz()).unwrap().distance(&dz()) < 1e-14);
        assert!(normalize_unit_volume(&dz().scale_real(2.0)).unwrap().distance(&dz()) < 1e-14);
        assert!(matches!(normalize_unit_volume(&dz().conj()), Err(Error::NonPositiveVolume(_))));
        let mut rng = linalg::rng_from_seed(4);
        let f = sampling::random_u3_member(&mut rng).unwrap();
        let n1 = normalize_unit_volume(&f).unwrap();
        assert!((uspace::vol_ratio(&n1).unwrap() - 1.0).abs() < 1e-10);
        let n2 = normalize_unit_volume(&n1).unwrap();
        assert!(n1.distance(&n2) < 1e-12);
        assert_eq!(uspace::is_member(&n1).unwrap().sign, Some(1));
    }

    #[test]
    fn f_of_dz_and_shift() {
        // q_{Re dZ} = 2I and K = Ω·2I has determinant 64.
        let f0 = f_invariant(&dz()).unwrap();
        assert!((f0 - 64f64.ln()).abs() < 1e-12);
        let f2 = f_invariant(&dz().scale_real(2.0)).unwrap();
        assert!((f2 - f0 - SHIFT_CONSTANT).abs() < 1e-9);
        assert!((shift_check(&dz()).unwrap() - 8.317766166719343).abs() < 1e-9);
        assert!((shift_check_by(&dz(), &PlaneAction::shift().inverse()).unwrap() + SHIFT_CONSTANT).abs() < 1e-9);
        assert!(matches!(f_invariant(&ExteriorForm::holomorphic_volume(2)), Err(Error::Shape(_))));
    }

    #[test]
    fn f_is_symplectic_invariant() {
        let mut rng = linalg::rng_from_seed(5);
        let f = sampling::random_u3_member(&mut rng).unwrap();
        let v = f_invariant(&f).unwrap();
        for _ in 0..20 {
            let g = linalg::random_symplectic(3, 0.4, &mut rng);
            let w = f_invariant(&symplectic::pullback(&f, &g).unwrap()).unwrap();
            assert!((w - v).abs() < 1e-9);
        }
    }

    #[test]
    fn f_drifts_linearly_along_the_flow() {
        let mut rng = linalg::rng_from_seed(6);
        let f = normalize_unit_volume(&sampling::random_u3_member(&mut rng).unwrap()).unwrap();
        let f0 = f_invariant(&f).unwrap();
        for k in 1..=10 {
            let moved = gl2_act(&PlaneAction::flow(k as f64 * std::f64::consts::LN_2), &f);
            assert!((f_invariant(&moved).unwrap() - f0 - k as f64 * SHIFT_CONSTANT).abs() < 1e-8);
            assert!((uspace::vol_ratio(&moved).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_strategies() {
        let g = sample_members(3, 7, Strategy::Geometric).unwrap();
        assert_eq!(g.accepted().count(), 3);
        for s in g.accepted() {
            assert_eq!(s.geometricity, Some(Geometricity::Geometric));
            assert!(s.normalized());
            assert!((s.delta_f.unwrap() - SHIFT_CONSTANT).abs() < 1e-9);
        }
        let ag = sample_members(3, 7, Strategy::AlmostGeometric).unwrap();
        assert!(ag.accepted().all(|s| s.geometricity == Some(Geometricity::AlmostGeometric)));
        let p = sample_members(3, 7, Strategy::Perturbed).unwrap();
        assert!(p.acceptance_rate() > 0.0);

        let again = sample_members(3, 7, Strategy::Perturbed).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        p.write_csv(&mut a).unwrap();
        again.write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [Strategy::Geometric, Strategy::AlmostGeometric, Strategy::Perturbed] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("uniform".parse::<Strategy>().is_err());
    }
}
