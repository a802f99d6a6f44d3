use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scalar::Scalar;

/// Outcome of checking one identity at one parameter point.
///
/// `pass` holds exactly when the residual is an exact zero, or, for a
/// p-adic residual, when it is known to be divisible by `p^tolerance`.
/// Informational entries record quantities that are not expected to
/// vanish (for instance a printed variant of an identity) and never count
/// as failures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub identity: String,
    pub params: BTreeMap<String, Value>,
    pub residual: Scalar,
    pub pass: bool,
    #[serde(default)]
    pub informational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<i64>,
    pub notes: String,
}

impl VerificationReport {
    /// Passes iff `residual` is zero (exact) or has valuation at least
    /// `tolerance` (p-adic).
    pub fn new(suite: &str, identity: &str, residual: Scalar, tolerance: Option<i64>) -> Self {
        let pass = match (&residual, tolerance) {
            (Scalar::Exact(r), _) => r.is_zero(),
            (Scalar::PAdic(x), Some(t)) => x.valuation_bound() >= t,
            (Scalar::PAdic(x), None) => x.is_zero(),
        };
        VerificationReport {
            suite: suite.to_owned(),
            identity: identity.to_owned(),
            params: BTreeMap::new(),
            residual,
            pass,
            informational: false,
            tolerance,
            notes: String::new(),
        }
    }

    /// A recorded quantity that is reported but never fails a run.
    pub fn informational(suite: &str, identity: &str, residual: Scalar) -> Self {
        VerificationReport {
            informational: true,
            pass: true,
            ..VerificationReport::new(suite, identity, residual, None)
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.to_owned(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        let text = text.into();
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&text);
        self
    }

    /// Adds a further condition to `pass`; a failed condition is noted.
    pub fn require(mut self, ok: bool, what: &str) -> Self {
        if !ok {
            self.pass = false;
            self = self.note(format!("failed: {what}"));
        }
        self
    }

    /// A failing entry for a check that could not be evaluated.
    pub fn error(suite: &str, identity: &str, err: &crate::Error) -> Self {
        VerificationReport { pass: false, ..VerificationReport::new(suite, identity, Scalar::one(), None) }
            .note(format!("error: {err}"))
    }

    /// True when the entry counts against a run.
    pub fn failed(&self) -> bool {
        !self.informational && !self.pass
    }
}

/// Pretty-printed JSON array of reports, newline-terminated.
pub fn to_json(reports: &[VerificationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{PAdic, Rat};

    #[test]
    fn pass_rules() {
        assert!(VerificationReport::new("s", "i", Scalar::zero(), None).pass);
        assert!(!VerificationReport::new("s", "i", Scalar::int(3), None).pass);
        let small = Scalar::PAdic(PAdic::from_int(125, 5, 4));
        assert!(VerificationReport::new("s", "i", small.clone(), Some(3)).pass);
        assert!(!VerificationReport::new("s", "i", small, Some(4)).pass);
        let info = VerificationReport::informational("s", "i", Scalar::Exact(Rat::new(1, 2)));
        assert!(!info.failed());
    }

    #[test]
    fn json_round_trip() {
        let r = VerificationReport::new("identity5", "addition", Scalar::zero(), None)
            .param("n", 3)
            .param("q", "2/3")
            .note("ok");
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let p = VerificationReport::new("descent", "d", Scalar::PAdic(PAdic::zero(5, 8)), Some(6));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<VerificationReport>(&s).unwrap(), p);
    }
}
