use num_traits::Zero;

use crate::error::{Error, Result};
use crate::operators::{diagonal_v, uq_generator, Sign, TensorOperator};
use crate::scalar::{q_factorial, Field, QExponent, Scalar};
use crate::statespace::{count_left, count_right, occ, Configuration, PositionList, Space};
use crate::vector::StateVector;

use super::product::SamKind;

fn same_lattice(x: &PositionList, sites: usize) -> Result<()> {
    if x.sites() != sites {
        return Err(Error::SpaceMismatch(format!(
            "positions on {} sites vs lattice of {sites}",
            x.sites()
        )));
    }
    Ok(())
}

/// Exponent of `Π_j Q_{x_j}(η)`, or `None` when some `η(x_j) = 0`.
fn q_product_exponent(x: &PositionList, bits: u64) -> Option<i64> {
    let sites = x.sites();
    x.positions().iter().try_fold(0i64, |acc, &p| {
        (occ(bits, p) == 1).then(|| acc + count_left(bits, p) as i64 - count_right(bits, p, sites) as i64)
    })
}

/// `D(x⃗, η) = Π_j q^{−2x_j} Q_{x_j}(η)` with
/// `Q_x(η) = q^{Σ_{i<x} η(i) − Σ_{i>x} η(i)} η(x)`.
pub fn duality_function<F: Field>(field: &F, x: &PositionList, eta: &Configuration) -> Result<F::Scalar> {
    same_lattice(x, eta.sites())?;
    match q_product_exponent(x, eta.bits()) {
        None => Ok(F::Scalar::zero()),
        Some(e) => {
            let shift: i64 = x.positions().iter().map(|&p| 2 * p as i64).sum();
            field.q_pow(QExponent::int(e - shift))
        }
    }
}

/// `D̃(x⃗, η) = q^{|x⃗|(N(η)−1)} D(x⃗, η)`.
pub fn duality_function_tilde<F: Field>(field: &F, x: &PositionList, eta: &Configuration) -> Result<F::Scalar> {
    let k = x.len() as i64;
    let n = eta.particles() as i64;
    Ok(field.q_pow(QExponent::int(k * (n - 1)))? * duality_function(field, x, eta)?)
}

/// `Q̂_x = q^{Σ_{i<x} n̂_i − Σ_{i>x} n̂_i} n̂_x`.
pub fn q_hat_operator<F: Field>(field: &F, site: usize, space: Space) -> Result<TensorOperator<F::Scalar>> {
    let x = PositionList::new(space.sites(), vec![site])?;
    q_hat_product(field, &x, space)
}

/// `Π_i Q̂_{x_i}`, diagonal.
pub fn q_hat_product<F: Field>(field: &F, x: &PositionList, space: Space) -> Result<TensorOperator<F::Scalar>> {
    same_lattice(x, space.sites())?;
    TensorOperator::diagonal(space, |bits| match q_product_exponent(x, bits) {
        None => Ok(F::Scalar::zero()),
        Some(e) => field.q_pow(QExponent::int(e)),
    })
}

/// `S̃ = Σ_n (S̃^+)^n / [n]_q!` with `S̃^+ = S^+(q,q)` on the full space.
///
/// Exact mode can only divide by monomial `[n]_q!`, so this fails there
/// for `L ≥ 2`; use [`lemma1_sides`] for exact comparisons.
pub fn s_tilde_operator<F: Field>(field: &F, space: Space) -> Result<TensorOperator<F::Scalar>> {
    if space.particles().is_some() {
        return Err(Error::SpaceMismatch(format!("S-tilde mixes sectors, got {space}")));
    }
    let sp = uq_generator(field, Sign::Plus, &field.q(), space)?;
    let mut term = TensorOperator::identity(space);
    let mut acc = term.clone();
    for n in 1..=space.sites() {
        term = sp.compose(&term)?;
        let inv = q_factorial(field, n as i64)?.inv()?;
        acc = acc.add(&term.scale(&inv))?;
    }
    Ok(acc)
}

/// Both sides of `⟨x⃗| S̃ = ⟨s| Π_i Q̂_{x_i}` restricted to the sector with
/// `|x⃗| + n` particles and multiplied by `[n]_q!`:
/// Left and right hand sides of a row-vector identity.
pub type RowPair<S> = (StateVector<S>, StateVector<S>);

/// `(⟨x⃗| (S^+(q,q))^n, [n]_q! ⟨s| Π_i Q̂_{x_i} 𝟙_{|x⃗|+n})` as row vectors.
pub fn lemma1_sides<F: Field>(field: &F, x: &PositionList, n: usize) -> Result<RowPair<F::Scalar>> {
    let sites = x.sites();
    let k = x.len();
    let target = Space::sector(sites, k + n)?;
    let mut bra = StateVector::basis(Space::sector(sites, k)?, &x.to_configuration())?;
    let q = field.q();
    let mut space = Space::sector(sites, k)?;
    for _ in 0..n {
        // ⟨v| S^+ with S^+ : N+1 → N
        let up = space.shifted(1).expect("target sector exists");
        bra = uq_generator(field, Sign::Plus, &q, up)?.apply_left(&bra)?;
        space = up;
    }
    let fact = q_factorial(field, n as i64)?;
    let rhs = q_hat_product(field, x, target)?
        .apply_left(&StateVector::summation(target))?
        .scale(&fact);
    Ok((bra, rhs))
}

/// `[N−K]_q!` times the algebraic construction of `𝟙_N` applied to a SAM:
/// kind I `z^{N−K} (S^−(q^{−1},q))^{N−K} |x⃗⟩`, kind II
/// `z^{N−K} V(q^{2(K−N)/L}) (S^−(q^{−1},q^{1−2N/L}))^{N−K} |x⃗⟩`.
pub fn sam_via_algebra_scaled<F: Field>(
    field: &F,
    x: &PositionList,
    particles: usize,
    z: &F::Scalar,
    kind: SamKind,
) -> Result<StateVector<F::Scalar>> {
    let sites = x.sites();
    let k = x.len();
    if particles < k || particles > sites {
        return Err(Error::ParticlesOutOfRange {
            particles,
            sites,
        });
    }
    let n = particles - k;
    let (l, ni, ki) = (sites as i64, particles as i64, k as i64);
    let alpha = match kind {
        SamKind::I => field.q(),
        SamKind::II => field.q_pow(QExponent::new(l - 2 * ni, l)?)?,
    };
    let inverted = field.inverted();
    let mut v = StateVector::basis(Space::sector(sites, k)?, &x.to_configuration())?;
    for _ in 0..n {
        v = uq_generator(&inverted, Sign::Minus, &alpha, v.space())?.apply(&v)?;
    }
    if kind == SamKind::II {
        let gamma = field.q_pow(QExponent::new(2 * (ki - ni), l)?)?;
        v = diagonal_v(field, &gamma, v.space())?.apply(&v)?;
    }
    Ok(v.scale(&z.powi(n as i64)?))
}

/// `𝟙_N |SAM⟩` built from the quantum-group creation operator.
pub fn sam_via_algebra<F: Field>(
    field: &F,
    x: &PositionList,
    particles: usize,
    z: &F::Scalar,
    kind: SamKind,
) -> Result<StateVector<F::Scalar>> {
    let scaled = sam_via_algebra_scaled(field, x, particles, z, kind)?;
    let inv = q_factorial(field, (particles - x.len()) as i64)?.inv()?;
    Ok(scaled.scale(&inv))
}
