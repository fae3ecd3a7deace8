use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evolution::{position_lists, ExpmOptions};
use crate::operators::Sign;
use crate::scalar::{Mode, QExponent};
use crate::statespace::{Configuration, PositionList, Space};

use super::algebra::{check_algebra, AlgebraFamily, AlgebraParams};
use super::appendix::{check_appendix_boundary_relations, check_pseudocommutator, BoundaryParams, PseudoParams};
use super::intertwining::{check_chain, check_proposition1, ChainKind, ChainParams, IntertwiningParams};
use super::lemmas::{check_lemmas, LemmaParams};
use super::report::VerificationReport;
use super::theorems::{check_duality_theorem1, check_shock_theorem, ShockParams, ShockTheorem};

/// Named groups of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Duality,
    Theorems,
    Appendix,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Algebra, Suite::Duality, Suite::Theorems, Suite::Appendix, Suite::All];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Duality => "duality",
            Suite::Theorems => "theorems",
            Suite::Appendix => "appendix",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "suite",
                name: s.into(),
            })
    }
}

/// Knobs shared by every check of a suite run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Largest lattice any check touches.
    pub max_sites: usize,
    /// Evaluation point; exact checks keep `q` formal and only report it.
    pub q: f64,
    /// Arithmetic of the algebraic checks; propagator checks are numeric.
    pub mode: Mode,
    pub tol_identity: f64,
    pub tol_theorem: f64,
    /// Seed of the random instance draws.
    pub seed: u64,
    /// Keep `runtime_ms`; off for byte-reproducible reports.
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_sites: 8,
            q: 1.5,
            mode: Mode::Exact,
            tol_identity: 1e-12,
            tol_theorem: 1e-9,
            seed: 0,
            timings: true,
        }
    }
}

/// One scheduled check.
#[derive(Clone, Debug)]
enum Job {
    Algebra(AlgebraFamily, AlgebraParams),
    Lemmas(LemmaParams, Mode),
    Theorem1 {
        x: PositionList,
        eta: Configuration,
        t: f64,
    },
    Prop1(IntertwiningParams),
    Chain(ChainParams),
    Shock(ShockTheorem, ShockParams),
    Boundary(BoundaryParams),
    Pseudo(PseudoParams),
}

impl Job {
    fn id(&self) -> &'static str {
        match self {
            Job::Algebra(..) => "algebra",
            Job::Lemmas(..) => "lemmas",
            Job::Theorem1 { .. } => "theorem1",
            Job::Prop1(_) => "prop1",
            Job::Chain(p) => match p.kind {
                ChainKind::Global => "theorem2.chain",
                ChainKind::Boundary => "theorem3.chain",
            },
            Job::Shock(t, _) => t.id(),
            Job::Boundary(_) => "appendix.boundary",
            Job::Pseudo(_) => "appendix.pseudocommutator",
        }
    }

    fn run(&self, c: &SuiteConfig) -> VerificationReport {
        let opts = ExpmOptions::default();
        let fallible = match self {
            Job::Algebra(f, p) => return check_algebra(*f, p, c.mode, c.q, c.tol_identity),
            Job::Lemmas(p, mode) => return check_lemmas(p, *mode, c.q, c.tol_identity),
            Job::Prop1(p) => return check_proposition1(p, c.mode, c.q, c.tol_identity),
            Job::Chain(p) => return check_chain(p, c.mode, c.q, c.tol_identity),
            Job::Boundary(p) => return check_appendix_boundary_relations(p, c.mode, c.q, c.tol_identity),
            Job::Pseudo(p) => return check_pseudocommutator(p, c.mode, c.q, c.tol_identity),
            Job::Theorem1 { x, eta, t } => check_duality_theorem1(x, eta, c.q, *t, c.tol_identity, &opts),
            Job::Shock(th, p) => check_shock_theorem(*th, p, c.tol_theorem, &opts),
        };
        fallible.unwrap_or_else(|e| VerificationReport::errored(self.id(), self.params(), Mode::Numeric, &e))
    }

    fn params(&self) -> serde_json::Value {
        match self {
            Job::Theorem1 { x, eta, t } => json!({ "x": x.positions(), "eta": eta.to_string(), "t": t }),
            Job::Shock(_, p) => json!({ "L": p.sites, "N": p.particles, "x": p.shocks.positions(), "q": p.q }),
            _ => json!({}),
        }
    }
}

fn algebra_jobs(c: &SuiteConfig) -> Vec<Job> {
    (2..=c.max_sites.min(6))
        .flat_map(|l| AlgebraFamily::ALL.into_iter().map(move |f| Job::Algebra(f, AlgebraParams::new(l))))
        .collect()
}

/// Theorem-1 instances at the largest lattice up to six sites, cycling
/// through the three times.
fn theorem1_jobs(c: &SuiteConfig) -> Result<Vec<Job>> {
    const TIMES: [f64; 3] = [0.1, 0.7, 2.0];
    const INSTANCES: usize = 21;
    let l = c.max_sites.min(6);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let full = Space::full(l)?.states();
    (0..INSTANCES)
        .map(|i| {
            let k = rng.gen_range(1..=l);
            let x = position_lists(Space::sector(l, k)?)
                .choose(&mut rng)
                .cloned()
                .expect("nonempty sector");
            let eta = Configuration::from_bits(l, *full.choose(&mut rng).expect("nonempty space"))?;
            Ok(Job::Theorem1 {
                x,
                eta,
                t: TIMES[i % TIMES.len()],
            })
        })
        .collect()
}

fn duality_jobs(c: &SuiteConfig) -> Result<Vec<Job>> {
    let mut jobs = theorem1_jobs(c)?;
    jobs.extend((1..=c.max_sites.min(6)).map(|l| Job::Lemmas(LemmaParams::new(l), c.mode)));
    if c.max_sites >= 8 {
        let p = LemmaParams {
            samples: Some(16),
            seed: c.seed,
            ..LemmaParams::new(8)
        };
        jobs.push(Job::Lemmas(p, Mode::Numeric));
    }
    Ok(jobs)
}

fn prop1_alphas(sites: usize) -> [QExponent; 4] {
    let l = sites as i64;
    [
        QExponent::ZERO,
        QExponent::ONE,
        QExponent::new(3, 2 * l).expect("positive denominator"),
        QExponent::new(-1, l).expect("positive denominator"),
    ]
}

fn prop1_jobs(c: &SuiteConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for l in [4, 6, 8].into_iter().filter(|&l| l <= c.max_sites) {
        for k in 0..=l {
            for power in 0..=2 {
                for sign in [Sign::Plus, Sign::Minus] {
                    for alpha in prop1_alphas(l) {
                        let p = IntertwiningParams {
                            sites: l,
                            particles: k,
                            power,
                            sign,
                            alpha,
                            perturb: false,
                        };
                        jobs.push(Job::Prop1(p));
                        if power > 0 {
                            jobs.push(Job::Prop1(IntertwiningParams { perturb: true, ..p }));
                        }
                    }
                }
            }
        }
    }
    jobs
}

/// `(L, N, K)` grid of the shock theorems.
const SHOCK_GRID: [(usize, usize, usize); 3] = [(6, 2, 1), (8, 3, 1), (8, 3, 2)];

/// Two shock sets per `(L, K)`: a bulk one and one touching site 1.
fn shock_sets(sites: usize, k: usize) -> Result<Vec<PositionList>> {
    let sets = match k {
        1 => vec![vec![sites / 2], vec![1]],
        _ => vec![vec![2, sites - 2], vec![1, sites]],
    };
    sets.into_iter().map(|s| PositionList::new(sites, s)).collect()
}

fn shock_jobs(c: &SuiteConfig) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for theorem in [ShockTheorem::Global, ShockTheorem::Boundary] {
        for (l, n, k) in SHOCK_GRID.into_iter().filter(|&(l, ..)| l <= c.max_sites) {
            for x in shock_sets(l, k)? {
                for q in [1.3, 2.0] {
                    for z in [0.5, 1.0] {
                        for t in [0.1, 1.0] {
                            let p = ShockParams {
                                sites: l,
                                particles: n,
                                shocks: x.clone(),
                                z,
                                q,
                                t,
                            };
                            jobs.push(Job::Shock(theorem, p));
                        }
                    }
                }
            }
        }
    }
    Ok(jobs)
}

fn chain_jobs(c: &SuiteConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for kind in [ChainKind::Global, ChainKind::Boundary] {
        for (l, n, k) in SHOCK_GRID.into_iter().filter(|&(l, ..)| l <= c.max_sites) {
            jobs.push(Job::Chain(ChainParams {
                kind,
                sites: l,
                particles: n,
                shocks: k,
            }));
        }
    }
    jobs
}

fn theorem_jobs(c: &SuiteConfig) -> Result<Vec<Job>> {
    let mut jobs = prop1_jobs(c);
    jobs.extend(chain_jobs(c));
    jobs.extend(shock_jobs(c)?);
    Ok(jobs)
}

fn appendix_jobs(c: &SuiteConfig) -> Vec<Job> {
    let half = QExponent::new(1, 2).expect("positive denominator");
    let mut jobs = Vec::new();
    for l in 3..=c.max_sites.min(5) {
        for (alpha, beta) in [(QExponent::ZERO, QExponent::ZERO), (half, QExponent::new(-5, 2).expect("positive denominator"))] {
            jobs.push(Job::Boundary(BoundaryParams::new(l, alpha, beta)));
        }
        for alpha in [QExponent::ZERO, half, QExponent::int(-1)] {
            for sign in [Sign::Plus, Sign::Minus] {
                for n in 0..=l {
                    let beta = PseudoParams::vanishing_beta(l, n, sign, alpha);
                    let p = PseudoParams {
                        sites: l,
                        particles: n,
                        sign,
                        alpha,
                        beta,
                    };
                    jobs.push(Job::Pseudo(p));
                    jobs.push(Job::Pseudo(PseudoParams {
                        beta: beta + QExponent::int(2),
                        ..p
                    }));
                }
            }
        }
    }
    jobs
}

fn jobs(suite: Suite, c: &SuiteConfig) -> Result<Vec<Job>> {
    Ok(match suite {
        Suite::Algebra => algebra_jobs(c),
        Suite::Duality => duality_jobs(c)?,
        Suite::Theorems => theorem_jobs(c)?,
        Suite::Appendix => appendix_jobs(c),
        Suite::All => {
            let mut all = algebra_jobs(c);
            all.extend(duality_jobs(c)?);
            all.extend(theorem_jobs(c)?);
            all.extend(appendix_jobs(c));
            all
        }
    })
}

/// Runs every check of `name` in parallel and returns the reports in the
/// suite's declared order. An unknown name fails before any check runs.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let suite: Suite = name.parse()?;
    if config.max_sites < 2 {
        return Err(Error::LatticeSize(config.max_sites));
    }
    let jobs = jobs(suite, config)?;
    Ok(jobs
        .par_iter()
        .map(|job| {
            let mut r = job.run(config);
            if !config.timings {
                r.runtime_ms = None;
            }
            r
        })
        .collect())
}
