use num_rational::Ratio;
use num_traits::Zero;

use super::tensor::TensorOperator;

use crate::error::{Error, Result};
use crate::scalar::{Field, QExponent, Scalar};
use crate::statespace::{position_sum, reflect_bits, Configuration, Space};

/// `Σ_k (2k − L − 1) η(k)`.
pub(crate) fn centred_position_sum(bits: u64, sites: usize) -> i64 {
    2 * position_sum(bits) - (sites as i64 + 1) * bits.count_ones() as i64
}

/// `V(γ) = γ^{−½ Σ_k (2k−L−1) n̂_k}`.
pub fn diagonal_v<F: Field>(field: &F, gamma: &F::Scalar, space: Space) -> Result<TensorOperator<F::Scalar>> {
    if gamma.is_zero() {
        return Err(Error::InvalidParameter("gamma must be nonzero".into()));
    }
    let sites = space.sites();
    TensorOperator::diagonal(space, |bits| {
        field.pow_ratio(gamma, Ratio::new(-centred_position_sum(bits, sites), 2))
    })
}

/// `W(z) = z^{N̂}`.
pub fn number_w<S: Scalar>(z: &S, space: Space) -> Result<TensorOperator<S>> {
    if z.is_zero() {
        return Err(Error::InvalidParameter("z must be nonzero".into()));
    }
    TensorOperator::diagonal(space, |bits| z.powi(bits.count_ones() as i64))
}

/// Permutation `|η⟩ ↦ |R(η)⟩`.
pub fn reflection_operator<S: Scalar>(space: Space) -> Result<TensorOperator<S>> {
    let sites = space.sites();
    TensorOperator::from_action(space, space, |bits| Ok([(reflect_bits(bits, sites), S::one())]))
}

/// `π(η) = q^{μ N(η) + 2 Σ_i x_i}`, with `μ` a q-exponent.
pub fn reversible_weight<F: Field>(field: &F, config: &Configuration, mu: QExponent) -> Result<F::Scalar> {
    field.q_pow(mu * config.particles() as i64 + QExponent::int(2 * position_sum(config.bits())))
}

/// `π̂ = Σ_η π(η)|η⟩⟨η|`.
pub fn reversible_measure<F: Field>(field: &F, mu: QExponent, space: Space) -> Result<TensorOperator<F::Scalar>> {
    TensorOperator::diagonal(space, |bits| {
        field.q_pow(mu * bits.count_ones() as i64 + QExponent::int(2 * position_sum(bits)))
    })
}

/// `q^{x S^z}` with `S^z = (L − 2N̂)/2`.
pub fn q_pow_sz<F: Field>(field: &F, x: QExponent, space: Space) -> Result<TensorOperator<F::Scalar>> {
    let sites = space.sites() as i64;
    TensorOperator::diagonal(space, |bits| {
        let sz = QExponent::new(sites - 2 * bits.count_ones() as i64, 2)?;
        field.q_pow(QExponent::new(
            x.numer() * sz.numer(),
            x.denom() * sz.denom(),
        )?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use crate::operators::generator::GeneratorSpec;
    use crate::operators::local::LocalOperator;
    use crate::operators::tensor::embed_local;
    use crate::scalar::{ExactField, Laurent, NumericField};

    #[test]
    fn v_at_gamma_one_is_identity() {
        let f = ExactField::for_sites(4);
        let s = Space::full(4).unwrap();
        assert_eq!(diagonal_v(&f, &Laurent::one(), s).unwrap(), TensorOperator::identity(s));
        assert!(diagonal_v(&f, &Laurent::zero(), s).is_err());
    }

    #[test]
    fn v_action_on_position_states() {
        let f = NumericField::new(1.4).unwrap();
        let l = 5;
        let s = Space::full(l).unwrap();
        let gamma = 0.7f64;
        let v = diagonal_v(&f, &gamma, s).unwrap();
        for bits in s.states() {
            let c = Configuration::from_bits(l, bits).unwrap();
            let e: i64 = c.positions().positions().iter().map(|&x| 2 * x as i64 - l as i64 - 1).sum();
            let expected = gamma.powf(-0.5 * e as f64);
            assert!((v.entry(bits, bits) - expected).abs() < 1e-14 * expected);
        }
    }

    #[test]
    fn w_and_reflection_basics() {
        let s = Space::full(3).unwrap();
        assert_eq!(number_w(&Laurent::one(), s).unwrap(), TensorOperator::identity(s));
        let sec = Space::sector(5, 2).unwrap();
        let z = Laurent::unit(3);
        assert_eq!(
            number_w(&z, sec).unwrap(),
            TensorOperator::identity(sec).scale(&z.powi(2).unwrap())
        );
        let r1 = reflection_operator::<Laurent>(Space::full(1).unwrap()).unwrap();
        assert_eq!(r1, TensorOperator::identity(Space::full(1).unwrap()));
        let r = reflection_operator::<Laurent>(Space::full(4).unwrap()).unwrap();
        assert_eq!(r.compose(&r).unwrap(), TensorOperator::identity(Space::full(4).unwrap()));
    }

    #[test]
    fn reflection_maps_site_k_to_mirror() {
        let s = Space::full(4).unwrap();
        let r = reflection_operator::<Laurent>(s).unwrap();
        for k in 1..=4 {
            let u = embed_local(&LocalOperator::<Laurent>::sigma_plus(), k, s).unwrap();
            let mirrored = embed_local(&LocalOperator::<Laurent>::sigma_plus(), 5 - k, s).unwrap();
            assert_eq!(r.compose(&u).unwrap().compose(&r).unwrap(), mirrored);
        }
    }

    #[test]
    fn reversible_weight_examples() {
        let f = ExactField::for_sites(3);
        let empty = Configuration::empty(3).unwrap();
        assert_eq!(reversible_weight(&f, &empty, QExponent::ZERO).unwrap(), Laurent::one());
        let one: Configuration = "010".parse().unwrap();
        assert_eq!(
            reversible_weight(&f, &one, QExponent::ZERO).unwrap(),
            f.q_pow(QExponent::int(4)).unwrap()
        );
    }

    #[test]
    fn pi_hat_is_inverse_v_of_q_squared() {
        for l in 2..=6 {
            let f = ExactField::for_sites(l);
            let s = Space::full(l).unwrap();
            let q2 = f.q_pow(QExponent::int(2)).unwrap();
            let vinv = diagonal_v(&f, &q2.inv().unwrap(), s).unwrap();
            let pi = reversible_measure(&f, QExponent::int(-(l as i64) - 1), s).unwrap();
            assert_eq!(vinv, pi);
        }
    }

    #[test]
    fn w_commutes_with_generator() {
        let f = ExactField::for_sites(4);
        let s = Space::full(4).unwrap();
        let h = GeneratorSpec::periodic(4, f.q(), Laurent::unit(3), Laurent::unit(-2))
            .build(s)
            .unwrap();
        let z = Laurent::unit(5);
        let w = number_w(&z, s).unwrap();
        let winv = number_w(&z.inv().unwrap(), s).unwrap();
        assert_eq!(w.compose(&h).unwrap().compose(&winv).unwrap(), h);
    }
}
