//! Command-line front end for `lagform`.
//!
//! [`run_command`] does all the work and returns the exit code together with
//! the text for stdout and stderr, so tests can drive the binary in-process.
//! Exit codes: 0 success, 1 domain or input error (stderr starts with
//! `error[tag]`), 2 usage error.

pub mod formfile;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lagform::flow::{self, Strategy};
use lagform::torus::{self, SystoleConfig};
use lagform::uspace::{self, MembershipConfig, Verdict};
use lagform::{ExteriorForm, C64};

pub use formfile::FormFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Domain(#[from] lagform::Error),
}

impl CliError {
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Io(_) => "io",
            CliError::Domain(e) => e.tag(),
        }
    }
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    /// CSV file written by the command, if any.
    pub csv_path: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "lagform", version, about = "Complex primitive forms that vanish on no Lagrangian subspace")]
struct Cli {
    /// Override the relative tolerance of the numeric membership test and
    /// of the shift check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Membership report: verdict, component, margin, geometricity.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = lagform::lgr::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// S matrix (n = 2) or q/d invariants (n = 3).
    Invariants { file: PathBuf },
    /// Canonical parameters of a member (n = 2 or n = 3).
    NormalForm { file: PathBuf },
    /// Reduction along the hyperplane ω-orthogonal to a vector.
    Reduce {
        file: PathBuf,
        /// Comma-separated real coordinates of the vector (length 2n).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        vector: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Product form p1*Ω1 ∧ p2*Ω2.
    Product {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Systole of the torus described by the file.
    Systole {
        file: PathBuf,
        /// Largest HNF height to enumerate.
        #[arg(long, default_value_t = 12)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ω-volume of the torus described by the file.
    Volume { file: PathBuf },
    /// Systole/volume table for random geometric and almost geometric forms.
    SystolicExperiment {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// f(TΩ) − f(Ω) for T = diag(2, 1/2).
    ShiftCheck { file: PathBuf },
    /// Unit-volume members in dimension six with their f values.
    Sample {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "geometric")]
        strategy: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the command line `argv` (including the program name).
pub fn run_command<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return CommandResult { code, stdout, stderr, csv_path: None };
        }
    };
    let mut out = Output::default();
    match dispatch(&cli, &mut out) {
        Ok(()) => CommandResult { code: 0, stdout: out.text, stderr: String::new(), csv_path: out.csv },
        Err(e) => CommandResult {
            code: 1,
            stdout: String::new(),
            stderr: format!("error[{}]: {e}\n", e.tag()),
            csv_path: None,
        },
    }
}

#[derive(Default)]
struct Output {
    text: String,
    csv: Option<PathBuf>,
}

impl Output {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}: {value}");
    }
}

fn load(path: &Path) -> Result<(FormFile, ExteriorForm), CliError> {
    let file = FormFile::read(path)?;
    let form = file.form()?;
    Ok((file, form))
}

/// Folds `-0.0` into `0.0` so reports never print "-0".
fn num(x: f64) -> f64 {
    x + 0.0
}

fn complex(z: C64) -> String {
    if z.im < 0.0 {
        format!("{} - {}i", num(z.re), -z.im)
    } else {
        format!("{} + {}i", num(z.re), num(z.im))
    }
}

fn component(sign: Option<i32>) -> &'static str {
    match sign {
        Some(1) => "U^+",
        Some(_) => "U^-",
        None => "none",
    }
}

fn write_or_print(out: &mut Output, text: &str, path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            out.line("written", p.display());
            out.csv = Some(p.clone());
        }
        None => out.text.push_str(text),
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Output) -> Result<(), CliError> {
    match &cli.command {
        Command::Check { file, seed, restarts } => {
            let (ff, form) = load(file)?;
            let config = MembershipConfig {
                restarts: *restarts,
                seed: *seed,
                threshold: cli.tol.unwrap_or(uspace::NUMERIC_THRESHOLD),
                classify: true,
                ..Default::default()
            };
            let r = uspace::is_member_with(&form, &config)?;
            out.line("form", ff.name());
            out.line("half_dim", form.half_dim());
            out.line("verdict", r.verdict);
            out.line("component", component(r.sign));
            out.line("margin", num(r.margin));
            out.line("certificate", r.certificate);
            if let Some(m) = r.lgr_minimum {
                out.line("lgr_minimum", m);
            }
            out.line("geometricity", r.geometricity);
            if let Some((a, b)) = r.geometricity_residuals {
                out.line("non_holomorphic_residual", num(a));
                out.line("mixed_residual", num(b));
            }
            let summary = match r.verdict {
                Verdict::Member => format!("member, {}, {}", component(r.sign), r.geometricity),
                v => v.to_string(),
            };
            out.line("summary", summary);
        }
        Command::Invariants { file } => {
            let (ff, form) = load(file)?;
            out.line("form", ff.name());
            out.line("half_dim", form.half_dim());
            match form.half_dim() {
                2 => {
                    let s = uspace::s_matrix(&form)?;
                    out.line("s_aa", num(s.aa));
                    out.line("s_ab", num(s.ab));
                    out.line("s_bb", num(s.bb));
                    let (lo, hi) = s.eigenvalues();
                    out.line("s_eigenvalues", format!("{}, {}", num(lo), num(hi)));
                    out.line("s_positive_definite", s.is_positive_definite());
                }
                3 => {
                    uspace::check_middle_primitive(&form)?;
                    for (name, part) in [("re", form.re()), ("im", form.im())] {
                        let q = uspace::q_invariants(&part)?;
                        let eig = lagform::linalg::sorted_sym_eigenvalues(&q.q);
                        out.line(
                            &format!("q_{name}_eigenvalues"),
                            eig.iter().map(|&e| num(e).to_string()).collect::<Vec<_>>().join(", "),
                        );
                        out.line(&format!("q_{name}_positive_definite"), q.is_positive_definite());
                        out.line(&format!("d_{name}"), q.d);
                    }
                    match flow::f_invariant(&form) {
                        Ok(f) => out.line("f", f),
                        Err(e) => out.line("f", format!("undefined ({})", e.tag())),
                    }
                }
                n => {
                    return Err(lagform::Error::Shape(format!("invariants are implemented for n = 2 and n = 3, got n = {n}")).into())
                }
            }
        }
        Command::NormalForm { file } => {
            let (ff, form) = load(file)?;
            out.line("form", ff.name());
            match form.half_dim() {
                2 => {
                    uspace::check_middle_primitive(&form)?;
                    let s = uspace::s_matrix(&form)?;
                    let (r, c) = s.canonical_parameters().ok_or_else(|| {
                        lagform::Error::NonMember(format!("S is not positive definite (eigenvalues {:?})", s.eigenvalues()))
                    })?;
                    out.line("normal_form", "r dz1∧dz2 + c dz̄1∧dz̄2");
                    out.line("r", num(r));
                    out.line("c", complex(c));
                }
                3 => {
                    let nf = uspace::normal_form_u3(&form)?;
                    out.line("normal_form", "Re(c1 dz1∧dz2∧dz3) + i Im(c2 Π(λ_j dx_j + i dy_j))");
                    out.line("c1", complex(nf.c1));
                    out.line("c2", complex(nf.c2));
                    out.line("lambda", format!("{}, {}, {}", nf.lambda[0], nf.lambda[1], nf.lambda[2]));
                    out.line("residual", num(nf.residual));
                    out.line("note", "(c1, c2) are determined up to a joint phase");
                }
                n => {
                    return Err(lagform::Error::Shape(format!("normal forms are implemented for n = 2 and n = 3, got n = {n}")).into())
                }
            }
        }
        Command::Reduce { file, vector, out: path } => {
            let (ff, form) = load(file)?;
            let reduced = uspace::reduce_along_vector(&form, vector)?;
            let label = ff.label.as_ref().map(|l| format!("reduce({l})"));
            write_or_print(out, &FormFile::from_form(&reduced, label).to_json(), path)?;
        }
        Command::Product { first, second, out: path } => {
            let (fa, a) = load(first)?;
            let (fb, b) = load(second)?;
            let p = uspace::product(&a, &b)?;
            let label = Some(format!("{} x {}", fa.name(), fb.name()));
            write_or_print(out, &FormFile::from_form(&p, label).to_json(), path)?;
        }
        Command::Systole { file, height, seed } => {
            let (ff, form) = load(file)?;
            let t = ff.torus()?;
            let cfg = SystoleConfig { seed: *seed, max_height: *height, ..Default::default() };
            let r = torus::systole_with(&form, &t, &cfg)?;
            let status = if r.certified { "certified" } else { "not certified" };
            out.text.push_str(&format!("sys = {} ({status}), witness {}\n", r.sys, r.witness.describe()));
            out.line("form", ff.name());
            out.line("certificate", if r.certified { "numerical (relies on the estimated LGr minimum)" } else { "none" });
            out.line("lgr_minimum", r.lgr_minimum);
            out.line("radius", r.radius);
            out.line("height", r.height);
            out.line("classes_scanned", r.classes_scanned);
        }
        Command::Volume { file } => {
            let (ff, form) = load(file)?;
            let t = ff.torus()?;
            out.line("form", ff.name());
            out.line("volume", torus::torus_volume(&form, &t)?);
        }
        Command::SystolicExperiment { n, samples, seed, out: path } => {
            let table = torus::systolic_experiment(*n, *samples, *seed)?;
            let mut csv = Vec::new();
            table.write_csv(&mut csv)?;
            let certified = table.rows.iter().filter(|r| r.certified).count();
            out.line("rows", table.rows.len());
            out.line("certified", certified);
            out.line("max_ratio_geometric", table.max_ratio_geometric);
            out.line("max_ratio_almost_geometric", table.max_ratio_almost_geometric);
            write_or_print(out, &String::from_utf8(csv).expect("csv is utf-8"), path)?;
        }
        Command::ShiftCheck { file } => {
            let (ff, form) = load(file)?;
            let df = flow::shift_check(&form)?;
            let dev = (df - flow::SHIFT_CONSTANT).abs();
            let tol = cli.tol.unwrap_or(1e-9);
            out.line("form", ff.name());
            out.line("f", flow::f_invariant(&form)?);
            out.line("delta_f", df);
            out.line("expected", flow::SHIFT_CONSTANT);
            out.line("deviation", format!("{dev:.3e}"));
            out.line("within_tolerance", dev < tol);
        }
        Command::Sample { count, seed, strategy, out: path } => {
            let strategy: Strategy = strategy.parse()?;
            let run = flow::sample_members(*count, *seed, strategy)?;
            let mut csv = Vec::new();
            run.write_csv(&mut csv)?;
            out.line("strategy", strategy);
            out.line("note", "sampling strategies are not draws from an invariant measure");
            out.line("accepted", run.accepted().count());
            out.line("attempts", run.attempts.len());
            out.line("acceptance_rate", run.acceptance_rate());
            write_or_print(out, &String::from_utf8(csv).expect("csv is utf-8"), path)?;
        }
    }
    Ok(())
}
