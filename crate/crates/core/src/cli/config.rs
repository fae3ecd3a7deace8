use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::evolution::{DrivingKind, Method};
use crate::measures::SamKind;
use crate::operators::Sign;
use crate::scalar::{Mode, QExponent};
use crate::statespace::{Configuration, PositionList};

pub(crate) const DEFAULT_Q: f64 = 1.5;
pub(crate) const DEFAULT_T: f64 = 1.0;
pub(crate) const DEFAULT_Z: f64 = 1.0;
pub(crate) const TOL_IDENTITY: f64 = 1e-12;
pub(crate) const TOL_THEOREM: f64 = 1e-9;

/// Every knob of a run. Command-line flags override the `--config` file;
/// unset fields take the documented defaults of the command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of the fields below.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Lattice size `L`; the site cap of a suite run.
    #[arg(long = "L", global = true)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,

    /// Particle number `N`.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,

    /// Shock or sector particle number `K`.
    #[arg(long = "K", global = true)]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub shocks: Option<usize>,

    /// Power of the creation/annihilation operator.
    #[arg(long = "n", global = true)]
    #[serde(rename = "n", skip_serializing_if = "Option::is_none")]
    pub power: Option<usize>,

    /// Conditioning particle number of the driving (default: `K`).
    #[arg(long = "M", global = true)]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<usize>,

    /// Shock sites, comma separated, 1-based.
    #[arg(long, visible_alias = "shocks", value_delimiter = ',', global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<usize>>,

    /// Configuration as an occupation string, e.g. `0110`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,

    /// `q`, rational (`3/2`) or decimal.
    #[arg(long, global = true, value_parser = parse_q)]
    #[serde(default, deserialize_with = "q_from_json", skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,

    /// Evolution time.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,

    /// Global fugacity.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,

    /// `+` (annihilation) or `-` (creation) generator.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,

    /// `α` as a power of `q`: `a`, `a/b`, or `w^m` for `q^{m/(2L)}`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,

    /// Boundary weight `β` as a power of `q`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,

    /// Shock-measure family, `I` or `II`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<SamKind>,

    /// `global` or `boundary`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driving: Option<DrivingKind>,

    /// Propagator: auto, dense, krylov or uniformization.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,

    /// `exact` or `numeric`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,

    /// Residual tolerance of numeric checks.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Output file, or directory for `report`; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Seed of sampled suites.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Drop runtimes from reports so reruns are byte-identical.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_timings: bool,

    /// Multiply the boundary weight of `prop1` by `q²`.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub perturb: bool,
}

pub(crate) fn parse_q(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad q '{s}'"));
    let q = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if q > 0.0 && q.is_finite() {
        Ok(q)
    } else {
        Err(Error::InvalidParameter(format!("q = {s} must be positive and finite")))
    }
}

fn q_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    match Option::<Value>::deserialize(d)? {
        None => Ok(None),
        Some(Value::Number(n)) => n
            .as_f64()
            .map(|q| parse_q(&q.to_string()))
            .transpose()
            .map_err(serde::de::Error::custom),
        Some(Value::String(s)) => parse_q(&s).map(Some).map_err(serde::de::Error::custom),
        Some(other) => Err(serde::de::Error::custom(format!("q must be a number or string, got {other}"))),
    }
}

/// `a`, `a/b` or `w^m` (`= m/(2L)`).
pub(crate) fn parse_exponent(s: &str, sites: usize) -> Result<QExponent> {
    match s.trim().strip_prefix("w^") {
        Some(m) => {
            let m: i64 = m.parse().map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
            QExponent::new(m, 2 * sites as i64)
        }
        None => s.parse(),
    }
}

impl RunConfig {
    /// Merges the `--config` file under the command-line values.
    pub fn load(self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_config(&path)?;
        let mut merged = match serde_json::to_value(&file)? {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        if let Value::Object(cli) = serde_json::to_value(&self)? {
            merged.extend(cli);
        }
        let mut out: RunConfig = serde_json::from_value(Value::Object(merged))?;
        out.config = self.config;
        out.no_timings |= file.no_timings;
        out.perturb |= file.perturb;
        Ok(out)
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn require_sites(&self) -> Result<usize> {
        self.sites.ok_or_else(|| missing("L"))
    }

    pub fn require_particles(&self) -> Result<usize> {
        self.particles.ok_or_else(|| missing("N"))
    }

    pub fn shock_list(&self, sites: usize) -> Result<PositionList> {
        let x = self.x.clone().ok_or_else(|| missing("x"))?;
        let list = PositionList::new(sites, x)?;
        if let Some(k) = self.shocks {
            if k != list.len() {
                return Err(Error::InvalidParameter(format!("K = {k} but {} shock sites given", list.len())));
            }
        }
        Ok(list)
    }

    pub fn configuration(&self, sites: usize) -> Result<Configuration> {
        let c: Configuration = self.eta.as_deref().ok_or_else(|| missing("eta"))?.parse()?;
        if c.sites() != sites {
            return Err(Error::InvalidConfiguration(format!("eta has {} sites, L = {sites}", c.sites())));
        }
        Ok(c)
    }

    pub fn alpha(&self, sites: usize) -> Result<QExponent> {
        self.alpha.as_deref().map_or(Ok(QExponent::ZERO), |a| parse_exponent(a, sites))
    }

    pub fn beta(&self, sites: usize) -> Result<Option<QExponent>> {
        self.beta.as_deref().map(|b| parse_exponent(b, sites)).transpose()
    }

    pub fn fill_numeric_defaults(&mut self) {
        self.q.get_or_insert(DEFAULT_Q);
        self.t.get_or_insert(DEFAULT_T);
        self.z.get_or_insert(DEFAULT_Z);
        self.seed.get_or_insert(0);
        self.method.get_or_insert(Method::Auto);
    }

    /// Propagator commands run in floating point only.
    pub fn require_numeric(&mut self, command: &str) -> Result<()> {
        match self.mode.get_or_insert(Mode::Numeric) {
            Mode::Numeric => Ok(()),
            Mode::Exact => Err(Error::InvalidParameter(format!("{command} needs --mode numeric"))),
        }
    }
}

fn missing(flag: &str) -> Error {
    Error::InvalidParameter(format!("--{flag} is required"))
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_accepts_rational_and_decimal() {
        assert_eq!(parse_q("3/2").unwrap(), 1.5);
        assert_eq!(parse_q("1.1").unwrap(), 1.1);
        assert!(parse_q("-2").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(parse_exponent("w^3", 6).unwrap(), QExponent::new(1, 4).unwrap());
        assert_eq!(parse_exponent("-1/6", 6).unwrap(), QExponent::new(-1, 6).unwrap());
        assert_eq!(parse_exponent("2", 6).unwrap(), QExponent::int(2));
    }

    #[test]
    fn file_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"L": 5, "q": "3/2", "t": 0.5, "no_timings": true}"#).unwrap();
        let cli = RunConfig {
            config: Some(path),
            sites: Some(7),
            ..RunConfig::default()
        };
        let c = cli.load().unwrap();
        assert_eq!(c.sites, Some(7));
        assert_eq!(c.q, Some(1.5));
        assert_eq!(c.t, Some(0.5));
        assert!(c.no_timings);
    }

    #[test]
    fn unknown_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"Lx": 5}"#).unwrap();
        let cli = RunConfig {
            config: Some(path),
            ..RunConfig::default()
        };
        assert!(matches!(cli.load(), Err(Error::Parse(_))));
    }

    #[test]
    fn exact_mode_rejected_for_propagators() {
        let mut c = RunConfig {
            mode: Some(Mode::Exact),
            ..RunConfig::default()
        };
        assert!(c.require_numeric("evolve").is_err());
        let mut c = RunConfig::default();
        c.require_numeric("evolve").unwrap();
        assert_eq!(c.mode, Some(Mode::Numeric));
    }
}
