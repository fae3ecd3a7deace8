use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::operators::{
    diagonal_v, embed_local, number_w, q_pow_sz, reflection_operator, reversible_measure, s_z, uq_generator,
    uq_site, GeneratorSpec, LocalOperator, Sign, TensorOperator,
};
use crate::scalar::{Field, Mode, QExponent, Scalar};
use crate::statespace::Space;
use crate::vector::StateVector;

use super::report::{dispatch, resolution, FieldCheck, ReportBuilder, Tally, VerificationReport};

/// Families of operator identities certified by the algebra suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraFamily {
    /// Products of `σ^±`, `n̂`, `υ̂` on one site.
    Pauli,
    /// `q^{±S^z}` inverses, `q^{S^z} S^± q^{−S^z} = q^{±1} S^±`, and the
    /// `[S^+, S^−]` relation.
    QuantumGroup,
    /// `S^±_k S^±_l = q^{±2} S^±_l S^±_k` for `k > l`, `(S^±_k)² = 0`.
    Exchange,
    /// Conjugation by `R̂` of `V`, `W`, `H` and `S^±`.
    Reflection,
    /// `H^T` and `(S^±)^T`.
    Transpose,
    /// Conjugation by `V(γ)` and `W(z)`.
    Gauge,
    /// Commutation of the generators with `S^z` and `S^±`.
    Symmetry,
    /// `π̂ = V^{−1}(q²)` and `π̂^{−1} H̃ π̂ = H̃^T`.
    Reversibility,
    /// `H(q,1,1)` rebuilt from `σ^x, σ^y, σ^z`.
    Heisenberg,
    /// `⟨s| H(q,q,1) = 0`, `⟨s| H̃(q,q) = 0`.
    Stochastic,
}

impl AlgebraFamily {
    pub const ALL: [AlgebraFamily; 10] = [
        AlgebraFamily::Pauli,
        AlgebraFamily::QuantumGroup,
        AlgebraFamily::Exchange,
        AlgebraFamily::Reflection,
        AlgebraFamily::Transpose,
        AlgebraFamily::Gauge,
        AlgebraFamily::Symmetry,
        AlgebraFamily::Reversibility,
        AlgebraFamily::Heisenberg,
        AlgebraFamily::Stochastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgebraFamily::Pauli => "pauli",
            AlgebraFamily::QuantumGroup => "quantum_group",
            AlgebraFamily::Exchange => "exchange",
            AlgebraFamily::Reflection => "reflection",
            AlgebraFamily::Transpose => "transpose",
            AlgebraFamily::Gauge => "gauge",
            AlgebraFamily::Symmetry => "symmetry",
            AlgebraFamily::Reversibility => "reversibility",
            AlgebraFamily::Heisenberg => "heisenberg",
            AlgebraFamily::Stochastic => "stochastic",
        }
    }
}

/// Monomial parameters `α = q^a`, `β = q^b`, `γ = q^c`, `z = q^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraParams {
    pub sites: usize,
    pub alpha: QExponent,
    pub beta: QExponent,
    pub gamma: QExponent,
    pub z: QExponent,
}

impl AlgebraParams {
    pub fn new(sites: usize) -> Self {
        Self {
            sites,
            alpha: QExponent::new(1, 3).expect("nonzero denominator"),
            beta: QExponent::new(-1, 2).expect("nonzero denominator"),
            gamma: QExponent::new(3, 4).expect("nonzero denominator"),
            z: QExponent::int(2),
        }
    }
}

struct Values<S> {
    q: S,
    q_inv: S,
    alpha: S,
    alpha_inv: S,
    beta: S,
    beta_inv: S,
    gamma: S,
    gamma_inv: S,
    z: S,
    z_inv: S,
}

impl<S: Scalar> Values<S> {
    fn new<F: Field<Scalar = S>>(field: &F, p: &AlgebraParams) -> Result<Self> {
        let pow = |e: QExponent| field.q_pow(e);
        Ok(Self {
            q: field.q(),
            q_inv: pow(-QExponent::ONE)?,
            alpha: pow(p.alpha)?,
            alpha_inv: pow(-p.alpha)?,
            beta: pow(p.beta)?,
            beta_inv: pow(-p.beta)?,
            gamma: pow(p.gamma)?,
            gamma_inv: pow(-p.gamma)?,
            z: pow(p.z)?,
            z_inv: pow(-p.z)?,
        })
    }
}

struct FamilyCheck<'a> {
    family: AlgebraFamily,
    params: &'a AlgebraParams,
}

impl FieldCheck for FamilyCheck<'_> {
    type Output = Tally;

    fn run<F: Field>(&self, field: &F) -> Result<Tally> {
        let mut t = Tally::new(field.mode());
        let p = self.params;
        if p.sites < 2 && self.family != AlgebraFamily::Pauli {
            return Err(Error::LatticeSize(p.sites));
        }
        let v = Values::new(field, p)?;
        let s = Space::full(p.sites)?;
        match self.family {
            AlgebraFamily::Pauli => pauli(&mut t)?,
            AlgebraFamily::QuantumGroup => quantum_group(field, &v, s, &mut t)?,
            AlgebraFamily::Exchange => exchange(field, &v, s, &mut t)?,
            AlgebraFamily::Reflection => reflection(field, &v, s, &mut t)?,
            AlgebraFamily::Transpose => transpose(field, &v, s, &mut t)?,
            AlgebraFamily::Gauge => gauge(field, &v, s, &mut t)?,
            AlgebraFamily::Symmetry => symmetry(field, &v, s, &mut t)?,
            AlgebraFamily::Reversibility => reversibility(field, s, &mut t)?,
            AlgebraFamily::Heisenberg => heisenberg(field, s, &mut t)?,
            AlgebraFamily::Stochastic => stochastic(field, s, &mut t)?,
        }
        Ok(t)
    }
}

/// Runs one identity family on the full space of `params.sites` sites.
pub fn check_algebra(family: AlgebraFamily, params: &AlgebraParams, mode: Mode, q: f64, tol: f64) -> VerificationReport {
    let check = format!("algebra.{}", family.name());
    let jparams = json!({
        "L": params.sites,
        "alpha": params.alpha,
        "beta": params.beta,
        "gamma": params.gamma,
        "z": params.z,
        "q": q,
    });
    let builder = ReportBuilder::new(&check, jparams.clone(), mode, tol);
    let denom = resolution(params.sites, &[params.alpha, params.beta, params.gamma, params.z]);
    match dispatch(&FamilyCheck { family, params }, mode, q, denom) {
        Ok(tally) => builder.finish_tally(&tally),
        Err(e) => VerificationReport::errored(&check, jparams, mode, &e),
    }
}

fn pauli(t: &mut Tally) -> Result<()> {
    // The rules are field independent; rationals suffice.
    type L = LocalOperator<crate::scalar::Laurent>;
    let (sp, sm, n, v) = (L::sigma_plus(), L::sigma_minus(), L::n_hat(), L::v_hat());
    let zero = L::new(Default::default());
    let rules = [
        ("σ+σ- = υ", &sp * &sm, v.clone()),
        ("σ-σ+ = n", &sm * &sp, n.clone()),
        ("nυ = 0", &n * &v, zero.clone()),
        ("υn = 0", &v * &n, zero.clone()),
        ("σ+n = σ+", &sp * &n, sp.clone()),
        ("nσ+ = 0", &n * &sp, zero.clone()),
        ("σ+υ = 0", &sp * &v, zero.clone()),
        ("υσ+ = σ+", &v * &sp, sp.clone()),
        ("σ-n = 0", &sm * &n, zero.clone()),
        ("nσ- = σ-", &n * &sm, sm.clone()),
        ("σ-υ = σ-", &sm * &v, sm.clone()),
        ("υσ- = 0", &v * &sm, zero),
    ];
    for (name, lhs, rhs) in rules {
        let diff = lhs.add(&rhs.scale(&crate::scalar::Laurent::from_i64(-1)));
        let r = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| diff.entry(i, j).magnitude())
            .fold(0.0, f64::max);
        t.record(name, r);
    }
    Ok(())
}

fn quantum_group<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    let up = q_pow_sz(field, QExponent::ONE, s)?;
    let down = q_pow_sz(field, -QExponent::ONE, s)?;
    let id = TensorOperator::identity(s);
    t.operators("q^Sz q^-Sz = 1", &up.compose(&down)?, &id)?;
    t.operators("q^-Sz q^Sz = 1", &down.compose(&up)?, &id)?;
    let qq = v.q.clone() - v.q_inv.clone();
    let num = q_pow_sz(field, QExponent::int(2), s)?.sub(&q_pow_sz(field, QExponent::int(-2), s)?)?;
    for (label, alpha) in [("1", F::Scalar::one()), ("α", v.alpha.clone())] {
        let sp = uq_generator(field, Sign::Plus, &alpha, s)?;
        let sm = uq_generator(field, Sign::Minus, &alpha, s)?;
        t.operators(
            format!("q^Sz S+ q^-Sz = q S+ (α={label})"),
            &up.compose(&sp)?.compose(&down)?,
            &sp.scale(&v.q),
        )?;
        t.operators(
            format!("q^Sz S- q^-Sz = q^-1 S- (α={label})"),
            &up.compose(&sm)?.compose(&down)?,
            &sm.scale(&v.q_inv),
        )?;
        t.operators(format!("(q-q^-1)[S+,S-] = q^2Sz - q^-2Sz (α={label})"), &sp.commutator(&sm)?.scale(&qq), &num)?;
    }
    Ok(())
}

fn exchange<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    let l = s.sites();
    for (sign, q2) in [
        (Sign::Plus, v.q.clone() * v.q.clone()),
        (Sign::Minus, v.q_inv.clone() * v.q_inv.clone()),
    ] {
        let ops: Vec<_> = (1..=l)
            .map(|k| uq_site(field, sign, k, &F::Scalar::one(), s))
            .collect::<Result<_>>()?;
        for k in 1..=l {
            let sk = &ops[k - 1];
            t.vanishes(format!("(S{sign}_{k})^2 = 0"), &sk.compose(sk)?, 1.0)?;
            for m in 1..k {
                let sm = &ops[m - 1];
                t.operators(
                    format!("S{sign}_{k} S{sign}_{m} = q^(2·{sign}) S{sign}_{m} S{sign}_{k}"),
                    &sk.compose(sm)?,
                    &sm.compose(sk)?.scale(&q2),
                )?;
            }
        }
    }
    Ok(())
}

fn periodic<S: Scalar>(s: Space, q: &S, alpha: &S, beta: &S) -> Result<TensorOperator<S>> {
    GeneratorSpec::periodic(s.sites(), q.clone(), alpha.clone(), beta.clone()).build(s)
}

fn reflecting<F: Field>(field: &F, s: Space, alpha: &F::Scalar) -> Result<TensorOperator<F::Scalar>> {
    GeneratorSpec::reflecting(s.sites(), field.q(), alpha.clone()).build(s)
}

fn reflection<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    let r = reflection_operator::<F::Scalar>(s)?;
    let conj = |a: &TensorOperator<F::Scalar>| r.compose(a)?.compose(&r);
    t.operators("R R = 1", &r.compose(&r)?, &TensorOperator::identity(s))?;
    t.operators(
        "R V(γ) R = V(γ^-1)",
        &conj(&diagonal_v(field, &v.gamma, s)?)?,
        &diagonal_v(field, &v.gamma_inv, s)?,
    )?;
    let w = number_w(&v.z, s)?;
    t.operators("R W(z) R = W(z)", &conj(&w)?, &w)?;
    t.operators(
        "R H(q,α,β) R = H(q,α^-1,β^-1)",
        &conj(&periodic(s, &v.q, &v.alpha, &v.beta)?)?,
        &periodic(s, &v.q, &v.alpha_inv, &v.beta_inv)?,
    )?;
    let inverted = field.inverted();
    for sign in [Sign::Plus, Sign::Minus] {
        t.operators(
            format!("R S{sign}(q,α) R = S{sign}(q^-1,α^-1)"),
            &conj(&uq_generator(field, sign, &v.alpha, s)?)?,
            &uq_generator(&inverted, sign, &v.alpha_inv, s)?,
        )?;
    }
    Ok(())
}

fn transpose<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    t.operators(
        "H(q,α,β)^T = H(q,α^-1,β^-1)",
        &periodic(s, &v.q, &v.alpha, &v.beta)?.transpose(),
        &periodic(s, &v.q, &v.alpha_inv, &v.beta_inv)?,
    )?;
    for sign in [Sign::Plus, Sign::Minus] {
        t.operators(
            format!("S{sign}(q,α)^T = S{}(q,α^-1)", sign.flip()),
            &uq_generator(field, sign, &v.alpha, s)?.transpose(),
            &uq_generator(field, sign.flip(), &v.alpha_inv, s)?,
        )?;
    }
    Ok(())
}

fn gauge<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    let vg = diagonal_v(field, &v.gamma, s)?;
    let vg_inv = diagonal_v(field, &v.gamma_inv, s)?;
    let conj = |a: &TensorOperator<F::Scalar>| vg.compose(a)?.compose(&vg_inv);
    t.operators("V(γ) V(γ^-1) = 1", &vg.compose(&vg_inv)?, &TensorOperator::identity(s))?;
    let alpha_g = v.alpha.clone() * v.gamma_inv.clone();
    let beta_g = v.beta.clone() * v.gamma.powi(s.sites() as i64)?;
    t.operators(
        "V H(q,α,β) V^-1 = H(q,αγ^-1,βγ^L)",
        &conj(&periodic(s, &v.q, &v.alpha, &v.beta)?)?,
        &periodic(s, &v.q, &alpha_g, &beta_g)?,
    )?;
    t.operators(
        "V H~(q,α) V^-1 = H~(q,αγ^-1)",
        &conj(&reflecting(field, s, &v.alpha)?)?,
        &reflecting(field, s, &alpha_g)?,
    )?;
    let w = number_w(&v.z, s)?;
    let w_inv = number_w(&v.z_inv, s)?;
    let h = periodic(s, &v.q, &v.alpha, &v.beta)?;
    t.operators("W H W^-1 = H", &w.compose(&h)?.compose(&w_inv)?, &h)?;
    for (sign, factor) in [(Sign::Plus, &v.z_inv), (Sign::Minus, &v.z)] {
        let sg = uq_generator(field, sign, &v.alpha, s)?;
        t.operators(
            format!("V S{sign}(q,α) V^-1 = S{sign}(q,αγ^-1)"),
            &conj(&sg)?,
            &uq_generator(field, sign, &alpha_g, s)?,
        )?;
        t.operators(
            format!("W S{sign} W^-1 = z^(-{sign}1) S{sign}"),
            &w.compose(&sg)?.compose(&w_inv)?,
            &sg.scale(factor),
        )?;
    }
    Ok(())
}

fn symmetry<F: Field>(field: &F, v: &Values<F::Scalar>, s: Space, t: &mut Tally) -> Result<()> {
    let h = periodic(s, &v.q, &v.alpha, &v.beta)?;
    t.vanishes("[H(q,α,β), S^z] = 0", &h.commutator(&s_z(s)?)?, h.max_magnitude())?;
    for (label, alpha) in [("1", F::Scalar::one()), ("q", v.q.clone()), ("α", v.alpha.clone())] {
        let ht = reflecting(field, s, &alpha)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let sg = uq_generator(field, sign, &alpha, s)?;
            t.vanishes(
                format!("[H~(q,{label}), S{sign}(q,{label})] = 0"),
                &ht.commutator(&sg)?,
                ht.max_magnitude() * sg.max_magnitude(),
            )?;
        }
    }
    Ok(())
}

fn reversibility<F: Field>(field: &F, s: Space, t: &mut Tally) -> Result<()> {
    let l = s.sites() as i64;
    let q2 = field.q_pow(QExponent::int(2))?;
    let q2_inv = field.q_pow(QExponent::int(-2))?;
    // V^{-1}(q²) = V(q^{-2})
    let pi = diagonal_v(field, &q2_inv, s)?;
    let pi_inv = diagonal_v(field, &q2, s)?;
    t.operators(
        "V^-1(q^2) = π̂ at μ = -L-1",
        &pi,
        &reversible_measure(field, QExponent::int(-l - 1), s)?,
    )?;
    let ht = reflecting(field, s, &field.q())?;
    t.operators("π̂^-1 H~ π̂ = H~^T", &pi_inv.compose(&ht)?.compose(&pi)?, &ht.transpose())?;
    Ok(())
}

fn heisenberg<F: Field>(field: &F, s: Space, t: &mut Tally) -> Result<()> {
    type Lo<S> = LocalOperator<S>;
    let l = s.sites();
    let q = field.q();
    let q_inv = q.inv()?;
    let half = F::Scalar::from_ratio(1, 2)?;
    let delta = (q.clone() + q_inv.clone()) * half.clone();
    let h = (q - q_inv) * half.clone();
    let id = TensorOperator::identity(s);
    let embed = |u: &Lo<F::Scalar>, k: usize| embed_local(u, k, s);
    let mut total = TensorOperator::zero(s, s);
    let bonds: Vec<(usize, usize)> = (1..l).map(|k| (k, k + 1)).chain(std::iter::once((l, 1))).collect();
    for (k, m) in bonds {
        let xx = embed(&Lo::sigma_x(), k)?.compose(&embed(&Lo::sigma_x(), m)?)?;
        // σ^y σ^y = −(iσ^y)(iσ^y)
        let yy = embed(&Lo::i_sigma_y(), k)?
            .compose(&embed(&Lo::i_sigma_y(), m)?)?
            .scale(&F::Scalar::from_i64(-1));
        let zz = embed(&Lo::sigma_z(), k)?.compose(&embed(&Lo::sigma_z(), m)?)?;
        let zk = embed(&Lo::sigma_z(), k)?;
        let zm = embed(&Lo::sigma_z(), m)?;
        let bond = xx
            .add(&yy)?
            .add(&zz.sub(&id)?.scale(&delta))?
            .add(&zk.sub(&zm)?.scale(&h))?
            .scale(&(-half.clone()));
        total = total.add(&bond)?;
    }
    let one = F::Scalar::one();
    t.operators("H(q,1,1) = Heisenberg form", &periodic(s, &field.q(), &one, &one)?, &total)?;
    Ok(())
}

fn stochastic<F: Field>(field: &F, s: Space, t: &mut Tally) -> Result<()> {
    let sum = StateVector::<F::Scalar>::summation(s);
    let zero = StateVector::zeros(s);
    let q = field.q();
    let h = periodic(s, &q, &q, &F::Scalar::one())?;
    t.vectors("<s| H(q,q,1) = 0", &h.apply_left(&sum)?, &zero)?;
    let ht = reflecting(field, s, &q)?;
    t.vectors("<s| H~(q,q) = 0", &ht.apply_left(&sum)?, &zero)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_holds_exactly_up_to_five_sites() {
        for l in 2..=5 {
            let p = AlgebraParams::new(l);
            for family in AlgebraFamily::ALL {
                let r = check_algebra(family, &p, Mode::Exact, 1.5, 0.0);
                assert!(r.pass, "{r} {:?}", r.notes);
                assert_eq!(r.residual, 0.0);
            }
        }
    }

    #[test]
    fn numeric_mode_agrees() {
        let p = AlgebraParams::new(4);
        for family in AlgebraFamily::ALL {
            let r = check_algebra(family, &p, Mode::Numeric, 1.7, 1e-12);
            assert!(r.pass, "{r} {:?}", r.notes);
        }
    }

    #[test]
    fn single_site_lattice_is_rejected_for_generators() {
        let r = check_algebra(AlgebraFamily::Gauge, &AlgebraParams::new(1), Mode::Exact, 1.5, 0.0);
        assert!(!r.pass);
        assert!(r.notes[0].starts_with("error"));
    }

    #[test]
    fn pauli_family_counts_twelve_rules() {
        let r = check_algebra(AlgebraFamily::Pauli, &AlgebraParams::new(2), Mode::Exact, 1.5, 0.0);
        assert_eq!(r.notes[0], "12 identities");
    }
}
