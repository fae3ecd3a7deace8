use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::tensor::TensorOperator;

use crate::error::{Error, Result};
use crate::scalar::{Field, QExponent, Scalar};
use crate::statespace::{count_left, count_right, occ, Space};

/// `+` lowers the particle number (`σ^+` annihilates), `−` raises it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Change in particle number under `S^±`.
    pub fn particle_shift(self) -> i64 {
        -self.as_i64()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Unknown {
                kind: "sign",
                name: other.into(),
            }),
        }
    }
}

/// Image space of `S^±` acting on `domain`.
pub fn uq_codomain(sign: Sign, domain: Space) -> Result<Space> {
    domain.shifted(sign.particle_shift()).ok_or_else(|| {
        Error::SpaceMismatch(format!("S^{sign} maps {domain} outside the lattice"))
    })
}

/// `S_k^±(q,α) = α^{±(L+1−2k)/2} q^{(2k−L−1)/2 + N_{>k} − N_{<k}} σ_k^±`.
pub fn uq_site<F: Field>(
    field: &F,
    sign: Sign,
    site: usize,
    alpha: &F::Scalar,
    domain: Space,
) -> Result<TensorOperator<F::Scalar>> {
    uq_sum(field, sign, alpha, domain, &[site])
}

/// `S^±(q,α) = Σ_k S_k^±(q,α)`.
pub fn uq_generator<F: Field>(
    field: &F,
    sign: Sign,
    alpha: &F::Scalar,
    domain: Space,
) -> Result<TensorOperator<F::Scalar>> {
    let sites: Vec<usize> = (1..=domain.sites()).collect();
    uq_sum(field, sign, alpha, domain, &sites)
}

fn uq_sum<F: Field>(
    field: &F,
    sign: Sign,
    alpha: &F::Scalar,
    domain: Space,
    sites: &[usize],
) -> Result<TensorOperator<F::Scalar>> {
    let l = domain.sites();
    let codomain = uq_codomain(sign, domain)?;
    let s = sign.as_i64();
    let li = l as i64;
    let mut prefactors = Vec::with_capacity(sites.len());
    for &k in sites {
        if k == 0 || k > l {
            return Err(Error::SiteOutOfRange { site: k, sites: l });
        }
        let ki = k as i64;
        let a = field.pow_ratio(alpha, Ratio::new(s * (li + 1 - 2 * ki), 2))?;
        let qk = field.q_pow(QExponent::new(2 * ki - li - 1, 2)?)?;
        prefactors.push((k, a * qk));
    }
    // q^{N_> − N_<} takes values in −(L−1)..=(L−1).
    let qpows: Vec<F::Scalar> = (-(li - 1)..=(li - 1))
        .map(|e| field.q_pow(QExponent::int(e)))
        .collect::<Result<_>>()?;
    // σ^+ needs an occupied site, σ^- an empty one.
    let needed = if sign == Sign::Plus { 1 } else { 0 };
    TensorOperator::from_action(domain, codomain, |bits| {
        Ok(prefactors
            .iter()
            .filter(|(k, _)| occ(bits, *k) == needed)
            .map(|(k, pre)| {
                let e = count_right(bits, *k, l) as i64 - count_left(bits, *k) as i64;
                (
                    bits ^ (1u64 << (k - 1)),
                    pre.clone() * qpows[(e + li - 1) as usize].clone(),
                )
            })
            .collect::<Vec<_>>())
    })
}

/// `S^z = Σ_k σ_k^z / 2 = (L − 2N̂)/2`.
pub fn s_z<S: Scalar>(space: Space) -> Result<TensorOperator<S>> {
    let l = space.sites() as i64;
    TensorOperator::diagonal(space, |bits| S::from_ratio(l - 2 * bits.count_ones() as i64, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use crate::operators::local::LocalOperator;
    use crate::operators::tensor::embed_local;
    use crate::operators::transforms::q_pow_sz;
    use crate::scalar::{ExactField, Laurent};

    fn full(l: usize) -> Space {
        Space::full(l).unwrap()
    }

    #[test]
    fn alpha_one_matches_coproduct_form() {
        // S^±(k) = q^{½Σ_{j<k}σ^z_j − ½Σ_{j>k}σ^z_j} σ^±_k built from local factors.
        for l in 1..=4 {
            let f = ExactField::for_sites(l);
            let s = full(l);
            for sign in [Sign::Plus, Sign::Minus] {
                let mut total = TensorOperator::zero(s, s);
                for k in 1..=l {
                    let mut op = embed_local(
                        &if sign == Sign::Plus {
                            LocalOperator::sigma_plus()
                        } else {
                            LocalOperator::sigma_minus()
                        },
                        k,
                        s,
                    )
                    .unwrap();
                    for j in (1..=l).filter(|&j| j != k) {
                        // q^{±σ^z/2} = diag(q^{±1/2}, q^{∓1/2})
                        let e = if j < k { 1 } else { -1 };
                        let d = LocalOperator::new([
                            [f.q_pow(QExponent::new(e, 2).unwrap()).unwrap(), Laurent::zero()],
                            [Laurent::zero(), f.q_pow(QExponent::new(-e, 2).unwrap()).unwrap()],
                        ]);
                        op = embed_local(&d, j, s).unwrap().compose(&op).unwrap();
                    }
                    total = total.add(&op).unwrap();
                }
                assert_eq!(uq_generator(&f, sign, &Laurent::one(), s).unwrap(), total);
            }
        }
    }

    #[test]
    fn deformed_exchange_relations() {
        let l = 4;
        let f = ExactField::for_sites(l);
        let s = full(l);
        for sign in [Sign::Plus, Sign::Minus] {
            let q2 = f.q_pow(QExponent::int(2 * sign.as_i64())).unwrap();
            for k in 1..=l {
                let sk = uq_site(&f, sign, k, &Laurent::one(), s).unwrap();
                assert!(sk.compose(&sk).unwrap().is_zero());
                for m in 1..k {
                    let sm = uq_site(&f, sign, m, &Laurent::one(), s).unwrap();
                    let lhs = sk.compose(&sm).unwrap();
                    let rhs = sm.compose(&sk).unwrap().scale(&q2);
                    assert_eq!(lhs, rhs, "k={k} l={m} sign={sign}");
                }
            }
        }
    }

    #[test]
    fn quantum_algebra_relations() {
        for l in 1..=4 {
            let f = ExactField::for_sites(l);
            let s = full(l);
            let q = f.q();
            for alpha in [Laurent::one(), Laurent::unit(4), Laurent::unit(-2)] {
                let sp = uq_generator(&f, Sign::Plus, &alpha, s).unwrap();
                let sm = uq_generator(&f, Sign::Minus, &alpha, s).unwrap();
                let comm = sp.commutator(&sm).unwrap();
                let num = q_pow_sz(&f, QExponent::int(2), s)
                    .unwrap()
                    .sub(&q_pow_sz(&f, QExponent::int(-2), s).unwrap())
                    .unwrap();
                // (q − q^{-1}) [S^+, S^-] = q^{2S^z} − q^{−2S^z}
                let qq = q.clone() - q.inv().unwrap();
                assert_eq!(comm.scale(&qq), num);
                let up = q_pow_sz(&f, QExponent::ONE, s).unwrap();
                let down = q_pow_sz(&f, -QExponent::ONE, s).unwrap();
                assert_eq!(up.compose(&down).unwrap(), TensorOperator::identity(s));
                for (op, e) in [(&sp, 1), (&sm, -1)] {
                    let lhs = up.compose(op).unwrap().compose(&down).unwrap();
                    assert_eq!(lhs, op.scale(&f.q_pow(QExponent::int(e)).unwrap()));
                }
            }
        }
    }

    #[test]
    fn s_z_is_half_sum_of_sigma_z() {
        let s = full(3);
        let mut acc = TensorOperator::<Laurent>::zero(s, s);
        for k in 1..=3 {
            acc = acc.add(&embed_local(&LocalOperator::sigma_z(), k, s).unwrap()).unwrap();
        }
        assert_eq!(acc.scale(&Laurent::ratio(1, 2).unwrap()), s_z(s).unwrap());
    }

    #[test]
    fn sector_maps_change_particle_number() {
        let f = ExactField::for_sites(5);
        let d = Space::sector(5, 2).unwrap();
        let sp = uq_generator(&f, Sign::Plus, &Laurent::one(), d).unwrap();
        assert_eq!(sp.codomain(), Space::sector(5, 1).unwrap());
        let full_sp = uq_generator(&f, Sign::Plus, &Laurent::one(), full(5)).unwrap();
        assert_eq!(full_sp.restrict(d, sp.codomain()).unwrap(), sp);
        assert!(uq_generator(&f, Sign::Plus, &Laurent::one(), Space::sector(5, 0).unwrap()).is_err());
    }
}
