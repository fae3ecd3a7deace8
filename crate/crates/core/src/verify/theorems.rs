use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evolution::{decompose_onto_sams, expm_action, transition_table, DrivingSpec, ExpmOptions};
use crate::measures::{duality_function, sam_vector, SamKind, SamSpec};
use crate::operators::GeneratorSpec;
use crate::scalar::{Mode, NumericField};
use crate::statespace::{Configuration, PositionList, Space};
use crate::vector::StateVector;

use super::report::{Expectation, ReportBuilder, VerificationReport};

/// Self-duality of the reflecting process `H̃ = H̃(q,q)`:
/// `Σ_ξ D(x⃗,ξ) ⟨ξ|e^{−H̃t}|η⟩ = Σ_y⃗ D(y⃗,η) ⟨y⃗|e^{−H̃t}|x⃗⟩`.
pub fn check_duality_theorem1(
    x: &PositionList,
    eta: &Configuration,
    q: f64,
    t: f64,
    tol: f64,
    opts: &ExpmOptions,
) -> Result<VerificationReport> {
    let sites = eta.sites();
    if x.sites() != sites {
        return Err(Error::SpaceMismatch(format!("positions on {} sites, η on {sites}", x.sites())));
    }
    let params = json!({
        "L": sites,
        "x": x.positions(),
        "eta": eta.to_string(),
        "q": q,
        "t": t,
    });
    let mut b = ReportBuilder::new("theorem1", params, Mode::Numeric, tol);
    let field = NumericField::new(q)?;
    let spec = GeneratorSpec::reflecting(sites, q, q);

    let eta_space = Space::sector(sites, eta.particles())?;
    let evolved_eta = expm_action(&spec.build(eta_space)?, &StateVector::basis(eta_space, eta)?, t, opts)?;
    let lhs = eta_space
        .states()
        .into_iter()
        .zip(evolved_eta.coeffs())
        .map(|(xi, p)| Ok(duality_function(&field, x, &Configuration::from_bits(sites, xi)?)? * p))
        .sum::<Result<f64>>()?;

    let x_space = Space::sector(sites, x.len())?;
    let evolved_x = expm_action(&spec.build(x_space)?, &StateVector::basis(x_space, &x.to_configuration())?, t, opts)?;
    let rhs = x_space
        .states()
        .into_iter()
        .zip(evolved_x.coeffs())
        .map(|(y, p)| {
            let y = Configuration::from_bits(sites, y)?.positions();
            Ok(duality_function(&field, &y, eta)? * p)
        })
        .sum::<Result<f64>>()?;

    b.metric("lhs", lhs);
    b.metric("rhs", rhs);
    Ok(b.finish((lhs - rhs).abs() / lhs.abs().max(1.0), Expectation::Zero))
}

/// Conditioning under which a shock measure evolves as a `K`-particle
/// process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShockTheorem {
    /// Kind-II measures under bulk driving.
    Global,
    /// Kind-I measures under boundary driving.
    Boundary,
}

impl ShockTheorem {
    pub fn kind(self) -> SamKind {
        match self {
            ShockTheorem::Global => SamKind::II,
            ShockTheorem::Boundary => SamKind::I,
        }
    }

    fn driving(self, conditioning: usize) -> DrivingSpec {
        match self {
            ShockTheorem::Global => DrivingSpec::global(conditioning),
            ShockTheorem::Boundary => DrivingSpec::boundary(conditioning),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            ShockTheorem::Global => "theorem2",
            ShockTheorem::Boundary => "theorem3",
        }
    }
}

/// Parameters of one shock-evolution comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockParams {
    pub sites: usize,
    /// `N`, particles carried by the measure.
    pub particles: usize,
    /// Shock positions `x⃗`, `K = |x⃗|`.
    pub shocks: PositionList,
    pub z: f64,
    pub q: f64,
    pub t: f64,
}

/// Evolves `𝟙_N |SAM_x⃗⟩` under the process conditioned on `K` particles,
/// decomposes it over `{𝟙_N |SAM_y⃗⟩}`, and compares the weights with the
/// `K`-particle transition probabilities conditioned on `N`.
pub fn check_shock_theorem(
    theorem: ShockTheorem,
    p: &ShockParams,
    tol: f64,
    opts: &ExpmOptions,
) -> Result<VerificationReport> {
    let k = p.shocks.len();
    if p.shocks.sites() != p.sites {
        return Err(Error::SpaceMismatch(format!("shocks on {} sites, L = {}", p.shocks.sites(), p.sites)));
    }
    if p.particles <= k || p.particles > p.sites {
        return Err(Error::InvalidParameter(format!("need K < N <= L, got K={k} N={} L={}", p.particles, p.sites)));
    }
    let params = json!({
        "L": p.sites,
        "N": p.particles,
        "K": k,
        "x": p.shocks.positions(),
        "z": p.z,
        "q": p.q,
        "t": p.t,
    });
    let mut b = ReportBuilder::new(theorem.id(), params, Mode::Numeric, tol);
    let field = NumericField::new(p.q)?;
    let kind = theorem.kind();
    let space = Space::sector(p.sites, p.particles)?;
    let v0 = sam_vector(&field, &SamSpec::new(p.shocks.clone(), p.z, kind)?, space)?;
    let h = theorem.driving(k).generator(&field, p.sites)?.build(space)?;
    let vt = expm_action(&h, &v0, p.t, opts)?;
    let d = decompose_onto_sams(&vt, k, p.z, kind, p.q)?;
    let table = transition_table(p.sites, k, theorem.driving(p.particles), p.q, p.t, opts)?;
    let column = table.column(&p.shocks)?;
    let deviation = d
        .weights
        .iter()
        .zip(&column)
        .map(|(c, pr)| (c - pr).abs())
        .fold(0.0, f64::max);
    let min_weight = d.weights.iter().copied().fold(f64::INFINITY, f64::min);
    b.metric("deviation", deviation);
    b.metric("decomposition_residual", d.residual);
    b.metric("condition", d.condition);
    b.metric("weight_sum", d.weight_sum());
    b.metric("min_weight", min_weight);
    if min_weight < -b.tolerance() {
        b.note(format!("negative weight {min_weight:e}"));
    }
    // The weights are probabilities, so an absolute deviation is the natural scale.
    let residual = deviation.max(d.residual);
    let mut r = b.finish(residual, Expectation::Zero);
    r.pass &= min_weight >= -r.tolerance;
    Ok(r)
}

pub fn check_theorem2(p: &ShockParams, tol: f64, opts: &ExpmOptions) -> Result<VerificationReport> {
    check_shock_theorem(ShockTheorem::Global, p, tol, opts)
}

pub fn check_theorem3(p: &ShockParams, tol: f64, opts: &ExpmOptions) -> Result<VerificationReport> {
    check_shock_theorem(ShockTheorem::Boundary, p, tol, opts)
}
