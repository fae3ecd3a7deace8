use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evolution::{position_lists, positions_field};
use crate::measures::{lemma1_sides, restrict_particles, sam_vector, sam_via_algebra_scaled, SamKind, SamSpec};
use crate::scalar::{q_factorial, Field, Mode, QExponent};
use crate::statespace::{PositionList, Space};

use super::report::{dispatch, resolution, FieldCheck, ReportBuilder, Tally, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub sites: usize,
    /// Fugacity `z = q^e` of the SAMs.
    pub z: QExponent,
    /// Random subset of shock sets; all of them when `None`.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl LemmaParams {
    pub fn new(sites: usize) -> Self {
        Self {
            sites,
            z: QExponent::ONE,
            samples: None,
            seed: 0,
        }
    }

    fn shock_sets(&self) -> Result<Vec<PositionList>> {
        let mut all: Vec<PositionList> = (0..=self.sites)
            .map(|k| Space::sector(self.sites, k).map(position_lists))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if let Some(n) = self.samples {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            all.shuffle(&mut rng);
            all.truncate(n);
        }
        Ok(all)
    }
}

struct Lemmas<'a>(&'a LemmaParams);

impl FieldCheck for Lemmas<'_> {
    type Output = Tally;

    fn run<F: Field>(&self, field: &F) -> Result<Tally> {
        let p = self.0;
        let mut t = Tally::new(field.mode());
        let full = Space::full(p.sites)?;
        let z = field.q_pow(p.z)?;
        for x in p.shock_sets()? {
            let k = x.len();
            for n in 0..=(p.sites - k) {
                let (lhs, rhs) = lemma1_sides(field, &x, n)?;
                t.vectors(format!("lemma1 x={} n={n}", positions_field(&x)), &lhs, &rhs)?;
            }
            for kind in [SamKind::I, SamKind::II] {
                let v = sam_vector(field, &SamSpec::new(x.clone(), z.clone(), kind)?, full)?;
                for n in k..=p.sites {
                    let fact = q_factorial(field, (n - k) as i64)?;
                    let lhs = sam_via_algebra_scaled(field, &x, n, &z, kind)?;
                    let rhs = restrict_particles(&v, n)?.scale(&fact);
                    t.vectors(format!("lemma3 kind {kind} x={} N={n}", positions_field(&x)), &lhs, &rhs)?;
                }
            }
        }
        Ok(t)
    }
}

/// Dual-basis expansion of the summation bra and the algebraic
/// construction of sector-projected SAMs, over every shock set (or a
/// seeded sample) and every admissible particle number.
pub fn check_lemmas(params: &LemmaParams, mode: Mode, q: f64, tol: f64) -> VerificationReport {
    let jparams = json!({
        "L": params.sites,
        "z": params.z,
        "samples": params.samples,
        "seed": params.seed,
        "q": q,
    });
    let check = "lemmas";
    let b = ReportBuilder::new(check, jparams.clone(), mode, tol);
    let run = || {
        if params.sites == 0 {
            return Err(Error::LatticeSize(0));
        }
        dispatch(&Lemmas(params), mode, q, resolution(params.sites, &[params.z]))
    };
    match run() {
        Ok(t) => b.finish_tally(&t),
        Err(e) => VerificationReport::errored(check, jparams, mode, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sweep() {
        for l in 1..=5 {
            let r = check_lemmas(&LemmaParams::new(l), Mode::Exact, 1.5, 0.0);
            assert!(r.pass, "{r} {:?}", r.notes);
            assert_eq!(r.residual, 0.0);
        }
    }

    #[test]
    fn fractional_fugacity_exact() {
        let p = LemmaParams {
            z: QExponent::new(-1, 3).unwrap(),
            ..LemmaParams::new(4)
        };
        let r = check_lemmas(&p, Mode::Exact, 1.5, 0.0);
        assert!(r.pass, "{r} {:?}", r.notes);
    }

    #[test]
    fn sampled_numeric_is_seeded() {
        let p = LemmaParams {
            samples: Some(12),
            seed: 7,
            ..LemmaParams::new(8)
        };
        assert_eq!(p.shock_sets().unwrap(), p.shock_sets().unwrap());
        assert_eq!(p.shock_sets().unwrap().len(), 12);
        let r = check_lemmas(&p, Mode::Numeric, 1.3, 1e-12);
        assert!(r.pass, "{r} {:?}", r.notes);
    }
}
