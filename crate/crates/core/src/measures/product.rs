use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, QExponent, Scalar};
use crate::statespace::{count_left, count_right, position_sum, PositionList, Space};
use crate::vector::StateVector;

/// The two shock/antishock families. Kind II is kind I dressed by the
/// diagonal gauge `V(q^{2K/L}) Π_j W(q^{(2x_j−L−1)/L})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SamKind {
    I,
    II,
}

impl fmt::Display for SamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamKind::I => "I",
            SamKind::II => "II",
        })
    }
}

impl FromStr for SamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(SamKind::I),
            "II" | "ii" | "2" => Ok(SamKind::II),
            other => Err(Error::Unknown {
                kind: "SAM kind",
                name: other.into(),
            }),
        }
    }
}

/// Shock sites, global fugacity and family of a shock/antishock measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SamSpec<S> {
    pub shocks: PositionList,
    pub z: S,
    pub kind: SamKind,
}

impl<S: Scalar> SamSpec<S> {
    pub fn new(shocks: PositionList, z: S, kind: SamKind) -> Result<Self> {
        check_fugacity(&z)?;
        Ok(Self { shocks, z, kind })
    }

    pub fn sites(&self) -> usize {
        self.shocks.sites()
    }
}

fn check_fugacity<S: Scalar>(z: &S) -> Result<()> {
    if z.is_zero() || z.is_valid_weight() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("fugacity {z} must be nonnegative")))
    }
}

/// Unnormalized product measure `|z⟩ = |z)^{⊗L}`: coefficient `z^{N(η)}`.
pub fn bernoulli_vector<S: Scalar>(z: &S, space: Space) -> Result<StateVector<S>> {
    check_fugacity(z)?;
    StateVector::from_fn(space, |bits| z.powi(bits.count_ones() as i64))
}

/// Exponent of `q` carried by a configuration with all shock sites occupied.
fn sam_exponent(kind: SamKind, shocks: &PositionList, bits: u64) -> Result<QExponent> {
    let sites = shocks.sites();
    let e: i64 = shocks
        .positions()
        .iter()
        .map(|&x| count_right(bits, x, sites) as i64 - count_left(bits, x) as i64)
        .sum();
    let e = QExponent::int(e);
    match kind {
        SamKind::I => Ok(e),
        SamKind::II => {
            // (2/L) Σ_j Σ_l (x_j − l) η(l) = (2/L)(N Σ_j x_j − K Σ_l l η(l))
            let n = bits.count_ones() as i64;
            let k = shocks.len() as i64;
            let sx: i64 = shocks.positions().iter().map(|&x| x as i64).sum();
            Ok(e + QExponent::new(2 * (n * sx - k * position_sum(bits)), sites as i64)?)
        }
    }
}

/// `|μ̄_x⃗⟩` (kind I) or `|μ_x⃗⟩` (kind II), unnormalized, over `space`.
pub fn sam_vector<F: Field>(field: &F, spec: &SamSpec<F::Scalar>, space: Space) -> Result<StateVector<F::Scalar>> {
    if space.sites() != spec.sites() {
        return Err(Error::SpaceMismatch(format!(
            "shocks on {} sites, space {space}",
            spec.sites()
        )));
    }
    check_fugacity(&spec.z)?;
    let mask = spec.shocks.bits();
    let k = spec.shocks.len() as i64;
    StateVector::from_fn(space, |bits| {
        if bits & mask != mask {
            return Ok(F::Scalar::zero());
        }
        let zpow = spec.z.powi(bits.count_ones() as i64 - k)?;
        Ok(zpow * field.q_pow(sam_exponent(spec.kind, &spec.shocks, bits)?)?)
    })
}

/// `𝟙_N v` for a full-space vector, in the sector basis.
pub fn restrict_particles<S: Scalar>(v: &StateVector<S>, particles: usize) -> Result<StateVector<S>> {
    if let Space::Sector { .. } = v.space() {
        return Err(Error::SpaceMismatch(format!("{} is not a full space", v.space())));
    }
    v.restrict(particles)
}

/// `ρ_k = ⟨s| n̂_k |v⟩ / ⟨s|v⟩`.
pub fn density_profile(v: &StateVector<f64>) -> Result<Vec<f64>> {
    let total = v.total();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroNormalization);
    }
    let sites = v.space().sites();
    let mut acc = vec![0.0; sites];
    for (i, c) in v.coeffs().iter().enumerate() {
        let mut bits = v.space().state_at(i);
        while bits != 0 {
            acc[bits.trailing_zeros() as usize] += c;
            bits &= bits - 1;
        }
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

/// Single-site fugacity; occupied sites carry infinite fugacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fugacity {
    Finite(f64),
    Occupied,
}

impl Fugacity {
    pub fn density(self) -> f64 {
        match self {
            Fugacity::Finite(z) => z / (1.0 + z),
            Fugacity::Occupied => 1.0,
        }
    }
}

impl fmt::Display for Fugacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fugacity::Finite(z) => write!(f, "{z:e}"),
            Fugacity::Occupied => f.write_str("inf"),
        }
    }
}

/// Local fugacities of a product measure together with the global `z`
/// and shock set that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct FugacityProfile {
    z: f64,
    shocks: PositionList,
    sites: Vec<Fugacity>,
}

impl FugacityProfile {
    /// Fugacities of the product measure proportional to `sam_vector(spec)`
    /// in every sector: `z_k = z q^{Σ_j sgn(k − x_j)}` for kind I, with the
    /// extra `q^{(2/L) Σ_j (x_j − k)}` for kind II.
    pub fn of_sam(q: f64, spec: &SamSpec<f64>) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q = {q} must be positive")));
        }
        check_fugacity(&spec.z)?;
        let l = spec.sites();
        let xs = spec.shocks.positions();
        let sites = (1..=l)
            .map(|k| {
                if xs.contains(&k) {
                    return Fugacity::Occupied;
                }
                let mut e: f64 = xs.iter().map(|&x| if k > x { 1.0 } else { -1.0 }).sum();
                if spec.kind == SamKind::II {
                    e += xs.iter().map(|&x| 2.0 * (x as f64 - k as f64) / l as f64).sum::<f64>();
                }
                Fugacity::Finite(spec.z * q.powf(e))
            })
            .collect();
        Ok(Self {
            z: spec.z,
            shocks: spec.shocks.clone(),
            sites,
        })
    }

    pub fn global_z(&self) -> f64 {
        self.z
    }

    pub fn shocks(&self) -> &PositionList {
        &self.shocks
    }

    pub fn fugacities(&self) -> &[Fugacity] {
        &self.sites
    }

    pub fn densities(&self) -> Vec<f64> {
        self.sites.iter().map(|f| f.density()).collect()
    }

    /// Rows `k,z_k,rho_k` with 1-based `k`.
    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.sites
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{},{},{:e}", i + 1, f, f.density()))
    }
}

/// `κ` such that the closed-form profiles hold, `z = q^{−κ}`.
pub fn kappa(q: f64, z: f64) -> f64 {
    -z.ln() / q.ln()
}

fn half_tanh(e: f64, sites: usize, arg: f64) -> f64 {
    0.5 * (1.0 - (e / sites as f64 * arg).tanh())
}

/// Closed-form density of the kind II measure with one shock at `x`.
pub fn closed_form_density_k1(sites: usize, x: usize, q: f64, z: f64) -> Result<Vec<f64>> {
    check_closed_form(sites, &[x], q, z)?;
    let (e, kap, l) = (q.ln(), kappa(q, z), sites as f64);
    Ok((1..=sites)
        .map(|k| {
            let d = k as f64 - x as f64;
            match k.cmp(&x) {
                std::cmp::Ordering::Less => half_tanh(e, sites, d + l * (kap + 1.0) / 2.0),
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => half_tanh(e, sites, d + l * (kap - 1.0) / 2.0),
            }
        })
        .collect())
}

/// Closed-form density of the kind II measure with shocks at `x < y`.
pub fn closed_form_density_k2(sites: usize, x: usize, y: usize, q: f64, z: f64) -> Result<Vec<f64>> {
    check_closed_form(sites, &[x, y], q, z)?;
    if x >= y {
        return Err(Error::InvalidConfiguration(format!("shocks {x}, {y} not increasing")));
    }
    let (e, kap, l) = (q.ln(), kappa(q, z), sites as f64);
    Ok((1..=sites)
        .map(|k| {
            let d = 2.0 * k as f64 - x as f64 - y as f64;
            if k == x || k == y {
                1.0
            } else if k < x {
                half_tanh(e, sites, d + l * (kap + 2.0) / 2.0)
            } else if k < y {
                half_tanh(e, sites, d + l * kap / 2.0)
            } else {
                half_tanh(e, sites, d + l * (kap - 2.0) / 2.0)
            }
        })
        .collect())
}

fn check_closed_form(sites: usize, shocks: &[usize], q: f64, z: f64) -> Result<()> {
    if let Some(&x) = shocks.iter().find(|&&x| x == 0 || x > sites) {
        return Err(Error::SiteOutOfRange { site: x, sites });
    }
    if !(q > 0.0 && q.is_finite() && q != 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must be positive and != 1")));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(format!("z = {z} must be positive")));
    }
    Ok(())
}
