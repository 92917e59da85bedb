use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("half dimensions differ: {0} vs {1}")]
    HalfDimMismatch(usize, usize),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("form is not primitive (residual {residual:.3e})")]
    NotPrimitive { residual: f64 },
    #[error("form has non-real coefficients (max imaginary part {max_imag:.3e})")]
    NotReal { max_imag: f64 },
    #[error("singular linear map: {0}")]
    Singular(String),
    #[error("map is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("complex structure is not compatible: {0}")]
    Incompatible(String),
    #[error("invalid Siegel point: {0}")]
    InvalidSiegel(String),
    #[error("frame is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("form nearly vanishes along the loop at theta = {theta:.6} (modulus {modulus:.3e})")]
    NearZero { theta: f64, modulus: f64 },
    #[error("quadratic form q is not positive definite (min eigenvalue {min_eig:.3e})")]
    IndefiniteQ { min_eig: f64 },
    #[error("loop polynomial is degenerate")]
    DegeneratePolynomial,
    #[error("not a member: {0}")]
    NonMember(String),
    #[error("subspace is not coisotropic (residual {residual:.3e})")]
    NotCoisotropic { residual: f64 },
    #[error("multivector is zero")]
    ZeroMultivector,
    #[error("volume ratio is not positive ({0:.6e})")]
    NonPositiveVolume(f64),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("rejection budget exhausted: {accepted} accepted out of {attempted}")]
    RejectionBudget { accepted: usize, attempted: usize },
    #[error("invalid torus: {0}")]
    InvalidTorus(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Shape(_) | Error::HalfDimMismatch(..) => "shape",
            Error::DegreeMismatch { .. } | Error::DegreeOverflow { .. } => "degree",
            Error::NotPrimitive { .. } => "not_primitive",
            Error::NotReal { .. } => "not_real",
            Error::Singular(_) => "singular",
            Error::NotSymplectic { .. } => "not_symplectic",
            Error::Incompatible(_) => "incompatible",
            Error::InvalidSiegel(_) => "invalid_siegel",
            Error::NotLagrangian(_) => "not_lagrangian",
            Error::NearZero { .. } => "near_zero",
            Error::IndefiniteQ { .. } => "indefinite_q",
            Error::DegeneratePolynomial => "degenerate_polynomial",
            Error::NonMember(_) => "non_member",
            Error::NotCoisotropic { .. } => "not_coisotropic",
            Error::ZeroMultivector => "zero_multivector",
            Error::NonPositiveVolume(_) => "non_positive_volume",
            Error::Inconclusive(_) => "inconclusive",
            Error::RejectionBudget { .. } => "rejection_budget",
            Error::InvalidTorus(_) => "invalid_torus",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
