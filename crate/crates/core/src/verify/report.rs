use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::operators::TensorOperator;
use crate::scalar::{ExactField, Field, Mode, NumericField, QExponent, Scalar};
use crate::vector::StateVector;

/// Whether a check certifies an identity or exhibits a witness that the
/// identity fails off its hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Zero,
    Nonzero,
}

/// Outcome of one check.
///
/// Exact mode: `pass` iff every residual is the literal zero polynomial
/// (inverted for [`Expectation::Nonzero`]). Numeric mode: `pass` iff the
/// residual is at most `tolerance` (above it for `Nonzero`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: Value,
    pub mode: Mode,
    /// Max-norm residual; relative to the operand scale in numeric mode.
    pub residual: f64,
    pub tolerance: f64,
    pub expectation: Expectation,
    pub pass: bool,
    pub runtime_ms: Option<f64>,
    pub notes: Vec<String>,
    /// Secondary quantities, e.g. both sides of a scalar identity.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report fields serialize")
    }

    /// A failed report carrying the error that stopped the check.
    pub fn errored(check: &str, params: Value, mode: Mode, err: &crate::Error) -> Self {
        Self {
            check: check.into(),
            params,
            mode,
            residual: f64::NAN,
            tolerance: 0.0,
            expectation: Expectation::Zero,
            pass: false,
            runtime_ms: None,
            notes: vec![format!("error: {err}")],
            metrics: BTreeMap::new(),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] residual={:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.mode,
            self.residual
        )?;
        if self.expectation == Expectation::Nonzero {
            f.write_str(" (expected nonzero)")?;
        }
        if let Some(ms) = self.runtime_ms {
            write!(f, " {ms:.1}ms")?;
        }
        Ok(())
    }
}

/// Running maximum of named residuals.
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    mode: Mode,
    parts: Vec<(String, f64)>,
}

impl Tally {
    pub(crate) fn new(mode: Mode) -> Self {
        Self { mode, parts: Vec::new() }
    }

    pub(crate) fn record(&mut self, name: impl Into<String>, residual: f64) {
        self.parts.push((name.into(), residual));
    }

    fn scaled(&self, diff: f64, a: f64, b: f64) -> f64 {
        match self.mode {
            Mode::Exact => diff,
            Mode::Numeric => diff / a.max(b).max(1.0),
        }
    }

    pub(crate) fn operators<S: Scalar>(
        &mut self,
        name: impl Into<String>,
        lhs: &TensorOperator<S>,
        rhs: &TensorOperator<S>,
    ) -> Result<()> {
        let diff = lhs.sub(rhs)?.max_magnitude();
        let r = self.scaled(diff, lhs.max_magnitude(), rhs.max_magnitude());
        self.record(name, r);
        Ok(())
    }

    pub(crate) fn vanishes<S: Scalar>(&mut self, name: impl Into<String>, op: &TensorOperator<S>, scale: f64) -> Result<()> {
        let r = self.scaled(op.max_magnitude(), scale, 0.0);
        self.record(name, r);
        Ok(())
    }

    pub(crate) fn vectors<S: Scalar>(
        &mut self,
        name: impl Into<String>,
        lhs: &StateVector<S>,
        rhs: &StateVector<S>,
    ) -> Result<()> {
        let diff = lhs.sub(rhs)?.max_magnitude();
        let r = self.scaled(diff, lhs.max_magnitude(), rhs.max_magnitude());
        self.record(name, r);
        Ok(())
    }

    pub(crate) fn worst(&self) -> f64 {
        // NaN propagates so that it can never pass.
        self.parts
            .iter()
            .map(|(_, r)| *r)
            .fold(0.0, |m, r| if m.is_nan() || r.is_nan() { f64::NAN } else { m.max(r) })
    }

    pub(crate) fn len(&self) -> usize {
        self.parts.len()
    }

    /// Names and residuals of parts exceeding `tol`; NaN counts as exceeding.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub(crate) fn offenders(&self, tol: f64) -> impl Iterator<Item = &(String, f64)> {
        self.parts.iter().filter(move |(_, r)| !(*r <= tol))
    }
}

/// Collects the pieces of a report while a check runs.
pub(crate) struct ReportBuilder {
    check: String,
    params: Value,
    mode: Mode,
    tolerance: f64,
    started: Instant,
    notes: Vec<String>,
    metrics: BTreeMap<String, f64>,
}

impl ReportBuilder {
    pub(crate) fn new(check: &str, params: Value, mode: Mode, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            params,
            mode,
            tolerance: if mode == Mode::Exact { 0.0 } else { tolerance },
            started: Instant::now(),
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub(crate) fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub(crate) fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    fn passes(&self, residual: f64, expectation: Expectation) -> bool {
        match expectation {
            Expectation::Zero => residual <= self.tolerance,
            Expectation::Nonzero => residual > self.tolerance,
        }
    }

    pub(crate) fn finish(self, residual: f64, expectation: Expectation) -> VerificationReport {
        let pass = self.passes(residual, expectation);
        VerificationReport {
            pass,
            runtime_ms: Some(self.started.elapsed().as_secs_f64() * 1e3),
            check: self.check,
            params: self.params,
            mode: self.mode,
            residual,
            tolerance: self.tolerance,
            expectation,
            notes: self.notes,
            metrics: self.metrics,
        }
    }

    /// Report over a tally of identities that must all hold.
    pub(crate) fn finish_tally(mut self, tally: &Tally) -> VerificationReport {
        let tol = self.tolerance;
        let bad: Vec<String> = tally.offenders(tol).map(|(n, r)| format!("{n}: {r:e}")).collect();
        self.note(format!("{} identities", tally.len()));
        self.notes.extend(bad);
        self.finish(tally.worst(), Expectation::Zero)
    }
}

/// Check body that can run over either scalar field.
pub(crate) trait FieldCheck {
    type Output;

    fn run<F: Field>(&self, field: &F) -> Result<Self::Output>;
}

/// Runs `check` in `mode`; exact mode uses the resolution `ω = q^{1/denom}`
/// and keeps `q` for evaluation only.
pub(crate) fn dispatch<C: FieldCheck>(check: &C, mode: Mode, q: f64, denom: i64) -> Result<C::Output> {
    match mode {
        Mode::Exact => check.run(&ExactField::with_denominator(denom).with_q_value(q)),
        Mode::Numeric => check.run(&NumericField::new(q)?),
    }
}

/// Resolution covering `4L` and the halves of every given exponent.
pub(crate) fn resolution(sites: usize, exponents: &[QExponent]) -> i64 {
    exponents
        .iter()
        .fold(4 * sites as i64, |d, e| d.lcm(&(2 * e.denom())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Laurent;
    use crate::statespace::Space;
    use serde_json::json;

    #[test]
    fn exact_pass_requires_literal_zero() {
        let s = Space::full(2).unwrap();
        let id = TensorOperator::<Laurent>::identity(s);
        let mut t = Tally::new(Mode::Exact);
        t.operators("same", &id, &id).unwrap();
        let r = ReportBuilder::new("x", json!({}), Mode::Exact, 1e-3).finish_tally(&t);
        assert!(r.pass);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.tolerance, 0.0);
        let tiny = id.scale(&Laurent::ratio(1, 1_000_000).unwrap());
        t.operators("tiny", &id.add(&tiny).unwrap(), &id).unwrap();
        let r = ReportBuilder::new("x", json!({}), Mode::Exact, 1e-3).finish_tally(&t);
        assert!(!r.pass);
        assert!(r.notes.iter().any(|n| n.starts_with("tiny")));
    }

    #[test]
    fn nonzero_expectation_inverts_pass() {
        let b = ReportBuilder::new("w", json!({}), Mode::Numeric, 1e-12);
        assert!(b.finish(0.5, Expectation::Nonzero).pass);
        let b = ReportBuilder::new("w", json!({}), Mode::Numeric, 1e-12);
        assert!(!b.finish(1e-15, Expectation::Nonzero).pass);
    }

    #[test]
    fn nan_residual_fails() {
        let mut t = Tally::new(Mode::Numeric);
        t.record("nan", f64::NAN);
        assert_eq!(t.offenders(1.0).count(), 1);
    }

    #[test]
    fn json_schema_fields() {
        let r = ReportBuilder::new("c", json!({"L": 3}), Mode::Exact, 0.0).finish(0.0, Expectation::Zero);
        let j = r.to_json();
        for key in ["check", "params", "mode", "residual", "pass", "runtime_ms", "notes"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["mode"], "exact");
        let back: VerificationReport = serde_json::from_value(j).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn resolution_covers_half_powers() {
        assert_eq!(resolution(6, &[]), 24);
        assert_eq!(resolution(6, &[QExponent::new(1, 4).unwrap()]), 24);
        assert_eq!(resolution(3, &[QExponent::new(1, 5).unwrap()]), 60);
    }
}
