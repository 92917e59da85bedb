//! JSON form files.
//!
//! ```json
//! {
//!   "half_dim": 1,
//!   "label": "dz",
//!   "terms": [
//!     { "indices": [1], "re": "1", "im": "0" },
//!     { "indices": [2], "re": "0", "im": "1" }
//!   ]
//! }
//! ```
//!
//! Index `i ≤ n` is `dx_i`, index `n + i` is `dy_i`. Coefficients are decimal
//! strings (plain JSON numbers are accepted on input); the writer emits the
//! shortest decimal that parses back to the same `f64`.

use std::path::Path;

use lagform::torus::RationalTorus;
use lagform::{Blade, ExteriorForm, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Text(String),
    Number(serde_json::Number),
}

impl Decimal {
    fn value(&self, what: &str) -> Result<f64, CliError> {
        let text = match self {
            Decimal::Text(s) => s.clone(),
            Decimal::Number(n) => n.to_string(),
        };
        let v: f64 = text.trim().parse().map_err(|_| CliError::Parse(format!("{what}: `{text}` is not a decimal")))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("{what}: `{text}` is not finite")));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub indices: Vec<usize>,
    pub re: Decimal,
    pub im: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub half_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Needed only when `terms` is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Rational multiple of the standard symplectic form, `"p/q"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_scale: Option<String>,
    /// Elementary divisors of the torus lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisors: Option<Vec<u64>>,
    pub terms: Vec<Term>,
}

impl FormFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_form(omega: &ExteriorForm, label: Option<String>) -> Self {
        let n = omega.half_dim();
        let terms = omega
            .terms()
            .map(|(b, c)| Term {
                indices: b.indices().map(|i| i + 1).collect(),
                re: Decimal::Text(format!("{}", c.re)),
                im: Decimal::Text(format!("{}", c.im)),
            })
            .collect::<Vec<_>>();
        let degree = terms.is_empty().then_some(omega.degree());
        Self { half_dim: n, label, degree, omega_scale: None, divisors: None, terms }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("form files serialize");
        s.push('\n');
        s
    }

    pub fn form(&self) -> Result<ExteriorForm, CliError> {
        let n = self.half_dim;
        if n == 0 || n > lagform::exterior::MAX_HALF_DIM {
            return Err(CliError::Parse(format!("half_dim {n} out of range")));
        }
        let degree = match (self.terms.first(), self.degree) {
            (Some(t), Some(d)) if t.indices.len() != d => {
                return Err(CliError::Parse(format!("declared degree {d} but first term has {} indices", t.indices.len())))
            }
            (Some(t), _) => t.indices.len(),
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Parse("empty form needs an explicit degree".into())),
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut seen = std::collections::BTreeSet::new();
        for (k, t) in self.terms.iter().enumerate() {
            let what = format!("term {}", k + 1);
            if t.indices.len() != degree {
                return Err(CliError::Parse(format!("{what}: expected {degree} indices, found {}", t.indices.len())));
            }
            if t.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Parse(format!("{what}: indices {:?} are not strictly increasing", t.indices)));
            }
            if t.indices.iter().any(|&i| i == 0 || i > 2 * n) {
                return Err(CliError::Parse(format!("{what}: indices must lie in 1..={}", 2 * n)));
            }
            let zero_based: Vec<usize> = t.indices.iter().map(|i| i - 1).collect();
            let blade = Blade::from_indices(&zero_based).expect("distinct indices");
            if !seen.insert(blade) {
                return Err(CliError::Parse(format!("{what}: indices {:?} repeat an earlier term", t.indices)));
            }
            terms.push((blade, C64::new(t.re.value(&what)?, t.im.value(&what)?)));
        }
        Ok(ExteriorForm::from_terms(n, degree, terms)?)
    }

    pub fn omega_scale(&self) -> Result<(u64, u64), CliError> {
        let Some(s) = &self.omega_scale else {
            return Ok((1, 1));
        };
        let (p, q) = s.split_once('/').unwrap_or((s.as_str(), "1"));
        let p: u64 = p.trim().parse().map_err(|_| CliError::Parse(format!("omega_scale `{s}` is not p/q")))?;
        let q: u64 = q.trim().parse().map_err(|_| CliError::Parse(format!("omega_scale `{s}` is not p/q")))?;
        Ok((p, q))
    }

    pub fn torus(&self) -> Result<RationalTorus, CliError> {
        let divisors = self.divisors.clone().unwrap_or_else(|| vec![1; self.half_dim]);
        Ok(RationalTorus::new(self.half_dim, divisors, self.omega_scale()?)?)
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| "(unlabelled)".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dz_from_text() {
        let f = FormFile::parse(r#"{"half_dim":1,"terms":[{"indices":[1],"re":1,"im":0},{"indices":[2],"re":"0","im":"1"}]}"#)
            .unwrap();
        let form = f.form().unwrap();
        assert_eq!(form, ExteriorForm::dz(1, 0));
    }

    #[test]
    fn rejects_bad_indices() {
        let unsorted = r#"{"half_dim":2,"terms":[{"indices":[2,1],"re":"1","im":"0"}]}"#;
        assert!(matches!(FormFile::parse(unsorted).unwrap().form(), Err(CliError::Parse(_))));
        let out_of_range = r#"{"half_dim":1,"terms":[{"indices":[3],"re":"1","im":"0"}]}"#;
        assert!(FormFile::parse(out_of_range).unwrap().form().is_err());
        let mixed = r#"{"half_dim":2,"terms":[{"indices":[1],"re":"1","im":"0"},{"indices":[1,2],"re":"1","im":"0"}]}"#;
        assert!(FormFile::parse(mixed).unwrap().form().is_err());
        match FormFile::parse("{\"half_dim\": 1,\n \"terms\": [}") {
            Err(CliError::Parse(msg)) => assert!(msg.starts_with("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let mut rng = lagform::linalg::rng_from_seed(5);
        for k in 0..100 {
            let n = 1 + k % 3;
            let form = lagform::exterior::random_form(n, 1 + k % n, &mut rng);
            let text = FormFile::from_form(&form, Some(format!("r{k}"))).to_json();
            let parsed = FormFile::parse(&text).unwrap();
            assert_eq!(parsed.form().unwrap(), form);
            assert_eq!(parsed.to_json(), text);
        }
    }
}
