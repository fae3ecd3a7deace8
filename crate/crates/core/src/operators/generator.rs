use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tensor::TensorOperator;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::statespace::{occ, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Reflecting,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "reflecting" => Ok(Boundary::Reflecting),
            other => Err(Error::Unknown {
                kind: "boundary",
                name: other.into(),
            }),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Reflecting => "reflecting",
        })
    }
}

/// Parameters of the weighted generator `H(q,α,β)` or `H̃(q,α)`.
///
/// `α = q e^s` weights bulk jumps, `β = e^{s̄}` additionally weights jumps
/// across the `(L,1)` bond, and `w` sets the time scale.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec<S> {
    pub sites: usize,
    pub q: S,
    pub alpha: S,
    pub beta: S,
    pub boundary: Boundary,
    pub rate: S,
}

impl<S: Scalar> GeneratorSpec<S> {
    pub fn periodic(sites: usize, q: S, alpha: S, beta: S) -> Self {
        Self {
            sites,
            q,
            alpha,
            beta,
            boundary: Boundary::Periodic,
            rate: S::one(),
        }
    }

    pub fn reflecting(sites: usize, q: S, alpha: S) -> Self {
        Self {
            sites,
            q,
            alpha,
            beta: S::one(),
            boundary: Boundary::Reflecting,
            rate: S::one(),
        }
    }

    pub fn with_rate(mut self, rate: S) -> Self {
        self.rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::LatticeSize(self.sites));
        }
        for (name, v) in [("q", &self.q), ("alpha", &self.alpha), ("beta", &self.beta)] {
            if v.is_zero() {
                return Err(Error::InvalidParameter(format!("{name} must be nonzero")));
            }
            if !v.is_valid_weight() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Builds the generator on `space`: `H̃ = Σ_{k<L} h_{k,k+1}`, plus
    /// `h_{L,1}` for periodic boundaries.
    pub fn build(&self, space: Space) -> Result<TensorOperator<S>> {
        self.validate()?;
        if space.sites() != self.sites {
            return Err(Error::SpaceMismatch(format!(
                "generator on {} sites, space {space}",
                self.sites
            )));
        }
        let mut bonds: Vec<(usize, usize, S)> = (1..self.sites)
            .map(|k| (k, k + 1, self.alpha.clone()))
            .collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((self.sites, 1, self.alpha.clone() * self.beta.clone()));
        }
        hopping_sum(space, &self.q, &self.rate, &bonds)
    }
}

/// Sum of hopping matrices over `(i, j, a)` bonds, built by direct action.
///
/// A particle on `i` with `j` empty contributes `w q` on the diagonal and
/// `−w a` for the jump `i → j`; a particle on `j` with `i` empty contributes
/// `w q^{-1}` and `−w a^{-1}` for `j → i`.
pub(crate) fn hopping_sum<S: Scalar>(
    space: Space,
    q: &S,
    rate: &S,
    bonds: &[(usize, usize, S)],
) -> Result<TensorOperator<S>> {
    let sites = space.sites();
    let wq = rate.clone() * q.clone();
    let wq_inv = rate.clone() * q.inv()?;
    let mut weights = Vec::with_capacity(bonds.len());
    for (i, j, a) in bonds {
        for s in [*i, *j] {
            if s == 0 || s > sites {
                return Err(Error::SiteOutOfRange { site: s, sites });
            }
        }
        let fwd = -(rate.clone() * a.clone());
        let bwd = -(rate.clone() * a.inv()?);
        weights.push((*i, *j, fwd, bwd));
    }
    TensorOperator::from_action(space, space, |bits| {
        let mut diag = S::zero();
        let mut out = Vec::with_capacity(weights.len() + 1);
        for (i, j, fwd, bwd) in &weights {
            let flip = (1u64 << (i - 1)) | (1u64 << (j - 1));
            match (occ(bits, *i), occ(bits, *j)) {
                (1, 0) => {
                    diag += wq.clone();
                    out.push((bits ^ flip, fwd.clone()));
                }
                (0, 1) => {
                    diag += wq_inv.clone();
                    out.push((bits ^ flip, bwd.clone()));
                }
                _ => {}
            }
        }
        out.push((bits, diag));
        Ok(out)
    })
}

/// `h_{k,k+1}(q,α)` with rate `w`.
pub fn hopping_bulk<S: Scalar>(
    space: Space,
    site: usize,
    q: &S,
    alpha: &S,
    rate: &S,
) -> Result<TensorOperator<S>> {
    let sites = space.sites();
    if site == 0 || site >= sites {
        return Err(Error::SiteOutOfRange {
            site,
            sites: sites - 1,
        });
    }
    hopping_sum(space, q, rate, &[(site, site + 1, alpha.clone())])
}

/// `h_{L,1}(q,α,β)`: the bulk form on bond `(L,1)` with `αβ` in place of `α`.
pub fn hopping_boundary<S: Scalar>(
    space: Space,
    q: &S,
    alpha: &S,
    beta: &S,
    rate: &S,
) -> Result<TensorOperator<S>> {
    let sites = space.sites();
    if sites < 2 {
        return Err(Error::LatticeSize(sites));
    }
    hopping_sum(space, q, rate, &[(sites, 1, alpha.clone() * beta.clone())])
}

/// `H(q,α,β)` or `H̃(q,α)` on `space`.
pub fn build_generator<S: Scalar>(spec: &GeneratorSpec<S>, space: Space) -> Result<TensorOperator<S>> {
    spec.build(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::operators::local::LocalOperator;
    use crate::operators::tensor::embed_local;
    use crate::scalar::{ExactField, Field, Laurent, QExponent};
    use crate::vector::StateVector;

    /// Oracle: the hopping matrix as the literal sum of Pauli products.
    fn hop_from_paulis<S: Scalar>(
        space: Space,
        i: usize,
        j: usize,
        q: &S,
        a: &S,
        w: &S,
    ) -> TensorOperator<S> {
        let e = |u: LocalOperator<S>, k| embed_local(&u, k, space).unwrap();
        let pair = |u, v| e(u, i).compose(&e(v, j)).unwrap();
        let t1 = pair(LocalOperator::sigma_plus(), LocalOperator::sigma_minus()).scale(a);
        let t2 = pair(LocalOperator::n_hat(), LocalOperator::v_hat()).scale(q);
        let t3 = pair(LocalOperator::sigma_minus(), LocalOperator::sigma_plus()).scale(&a.inv().unwrap());
        let t4 = pair(LocalOperator::v_hat(), LocalOperator::n_hat()).scale(&q.inv().unwrap());
        t1.sub(&t2).unwrap().add(&t3).unwrap().sub(&t4).unwrap().scale(&-w.clone())
    }

    #[test]
    fn bulk_hopping_example_entries() {
        let space = Space::full(2).unwrap();
        let h = hopping_bulk(space, 1, &2.0, &2.0, &1.0).unwrap();
        // (row ι, col ι) with ι = bits + 1
        let at = |r: u64, c: u64| h.entry(r - 1, c - 1);
        assert_eq!(at(3, 2), -2.0);
        assert_eq!(at(2, 2), 2.0);
        assert_eq!(at(2, 3), -0.5);
        assert_eq!(at(3, 3), 0.5);
        assert_eq!(h.matrix().nnz(), 4);
    }

    #[test]
    fn boundary_hopping_example_entry() {
        let space = Space::full(2).unwrap();
        let h = hopping_boundary(space, &2.0, &2.0, &3.0, &1.0).unwrap();
        // The forward jump L → 1 (site 2 to site 1, ι 3 → 2) carries αβ and
        // the backward jump 1 → L carries (αβ)^{-1}.
        assert!((h.entry(1, 2) + 6.0).abs() < 1e-15);
        assert!((h.entry(2, 1) + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(h.entry(2, 2), 2.0);
        assert_eq!(h.entry(1, 1), 0.5);
    }

    #[test]
    fn direct_action_matches_pauli_products() {
        let f = ExactField::for_sites(4);
        let q = f.q();
        let space = Space::full(4).unwrap();
        for a in [Laurent::unit(3), Laurent::unit(-5), f.q()] {
            let w = Laurent::ratio(3, 2).unwrap();
            for (i, j) in [(1, 2), (2, 3), (3, 4), (4, 1)] {
                let direct = hopping_sum(space, &q, &w, &[(i, j, a.clone())]).unwrap();
                assert_eq!(direct, hop_from_paulis(space, i, j, &q, &a, &w));
            }
        }
    }

    #[test]
    fn stochastic_at_alpha_equal_q() {
        let f = ExactField::for_sites(5);
        let q = f.q();
        for spec in [
            GeneratorSpec::periodic(5, q.clone(), q.clone(), Laurent::one()),
            GeneratorSpec::reflecting(5, q.clone(), q.clone()),
        ] {
            let space = Space::full(5).unwrap();
            let h = spec.build(space).unwrap();
            let s = StateVector::summation(space);
            assert!(h.apply_left(&s).unwrap().is_zero());
        }
    }

    #[test]
    fn empty_and_full_sectors_are_frozen() {
        let spec = GeneratorSpec::periodic(4, 1.5, 1.5, 1.0);
        for n in [0, 4] {
            let h = spec.build(Space::sector(4, n).unwrap()).unwrap();
            assert_eq!(h.matrix().rows(), 1);
            assert!(h.is_zero());
        }
    }

    #[test]
    fn reflecting_two_sites_is_single_bond() {
        let spec = GeneratorSpec::reflecting(2, 1.7, 0.4);
        let space = Space::full(2).unwrap();
        assert_eq!(
            spec.build(space).unwrap(),
            hopping_bulk(space, 1, &1.7, &0.4, &1.0).unwrap()
        );
    }

    #[test]
    fn sector_matrix_is_compression_of_full() {
        let spec = GeneratorSpec::periodic(6, 1.3, 0.8, 2.1);
        let full = spec.build(Space::full(6).unwrap()).unwrap();
        for n in 0..=6 {
            let s = Space::sector(6, n).unwrap();
            assert_eq!(spec.build(s).unwrap(), full.project_sector(n).unwrap());
        }
    }

    #[test]
    fn uniform_vector_is_null_for_transposed_sector_matrix() {
        let f = ExactField::for_sites(4);
        let q = f.q();
        let spec = GeneratorSpec::periodic(4, q.clone(), q, Laurent::one());
        let s = Space::sector(4, 2).unwrap();
        let h = spec.build(s).unwrap();
        let ones = StateVector::summation(s);
        assert!(h.transpose().apply(&ones).unwrap().is_zero());
    }

    #[test]
    fn validation() {
        assert!(GeneratorSpec::periodic(1, 1.5, 1.5, 1.0).validate().is_err());
        assert!(GeneratorSpec::periodic(3, 1.5, -1.5, 1.0).validate().is_err());
        assert!(GeneratorSpec::periodic(3, 1.5, 1.5, 0.0).validate().is_err());
        assert!(hopping_bulk(Space::full(3).unwrap(), 3, &1.5, &1.5, &1.0).is_err());
        let e = ExactField::for_sites(3);
        let q = e.q_pow(QExponent::new(1, 3).unwrap()).unwrap();
        assert!(GeneratorSpec::periodic(3, q.clone(), q, Laurent::one()).validate().is_ok());
    }
}
