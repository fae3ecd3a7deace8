use serde_json::{json, Value};


use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::statespace::{Configuration, Space};

/// Dense coefficient vector `Σ_η v(η)|η⟩` over a full space or a sector.
///
/// Entries are stored in the space's ordinal order. Vectors are unnormalized
/// unless explicitly normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<S> {
    space: Space,
    coeffs: Vec<S>,
}

impl<S: Scalar> StateVector<S> {
    pub fn zeros(space: Space) -> Self {
        Self {
            space,
            coeffs: (0..space.dim()).map(|_| S::zero()).collect(),
        }
    }

    pub fn from_coeffs(space: Space, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} coefficients for {space} of dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn from_fn(space: Space, mut f: impl FnMut(u64) -> Result<S>) -> Result<Self> {
        let coeffs = space.states().into_iter().map(&mut f).collect::<Result<_>>()?;
        Ok(Self { space, coeffs })
    }

    /// `|η⟩`.
    pub fn basis(space: Space, config: &Configuration) -> Result<Self> {
        let idx = space
            .index_of(config.bits())
            .filter(|_| config.sites() == space.sites())
            .ok_or_else(|| Error::SpaceMismatch(format!("{config} not in {space}")))?;
        let mut v = Self::zeros(space);
        v.coeffs[idx] = S::one();
        Ok(v)
    }

    /// `⟨s|ᵀ`: all ones.
    pub fn summation(space: Space) -> Self {
        Self {
            space,
            coeffs: (0..space.dim()).map(|_| S::one()).collect(),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of a configuration; zero outside the space.
    pub fn get(&self, bits: u64) -> S {
        self.space
            .index_of(bits)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            space: self.space,
            coeffs: self.coeffs.iter().map(|a| s.clone() * a.clone()).collect(),
        }
    }

    /// `Σ_η a(η) b(η)`.
    pub fn dot(&self, other: &Self) -> Result<S> {
        self.check_space(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(S::zero(), |mut acc, (a, b)| {
                acc += a.clone() * b.clone();
                acc
            }))
    }

    /// `⟨s|v⟩`.
    pub fn total(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |mut acc, a| {
            acc += a.clone();
            acc
        })
    }

    /// `𝟙_N v`, expressed in the sector basis.
    pub fn restrict(&self, particles: usize) -> Result<Self> {
        let target = Space::sector(self.space.sites(), particles)?;
        self.restrict_to(target)
    }

    /// Projection onto a subspace (or re-embedding into a superspace) of the
    /// same lattice.
    pub fn restrict_to(&self, target: Space) -> Result<Self> {
        if target.sites() != self.space.sites() {
            return Err(Error::SpaceMismatch(format!("{} vs {target}", self.space)));
        }
        Self::from_fn(target, |bits| Ok(self.get(bits)))
    }

    /// Largest coefficient magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn map<T: Scalar>(&self, f: impl FnMut(&S) -> T) -> StateVector<T> {
        StateVector {
            space: self.space,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// `{space, dim, entries: [[index, configuration, scalar], ...]}` with
    /// 1-based indices and zero entries omitted.
    pub fn to_json(&self) -> Value {
        let sites = self.space.sites();
        let entries: Vec<Value> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let cfg = Configuration::from_bits(sites, self.space.state_at(i))
                    .expect("state of a valid space");
                json!([i + 1, cfg.to_string(), c.to_json()])
            })
            .collect();
        json!({
            "space": self.space,
            "dim": self.space.dim(),
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let space: Space = serde_json::from_value(v["space"].clone())?;
        let mut out = Self::zeros(space);
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing entries".into()))?;
        for e in entries {
            let idx = e[0]
                .as_u64()
                .filter(|&i| i >= 1 && (i as usize) <= out.len())
                .ok_or_else(|| Error::Parse(format!("bad entry index in {e}")))?;
            out.coeffs[idx as usize - 1] = S::from_json(&e[2])?;
        }
        Ok(out)
    }
}

impl StateVector<f64> {
    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Divides by `⟨s|v⟩`.
    pub fn normalized(&self) -> Result<Self> {
        let z = self.total();
        if z == 0.0 || !z.is_finite() {
            return Err(Error::ZeroNormalization);
        }
        Ok(self.scale(&(1.0 / z)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_then_embed_recovers_vector() {
        let full = Space::full(4).unwrap();
        let v = StateVector::<f64>::from_fn(full, |b| Ok(1.0 + b as f64)).unwrap();
        let mut acc = StateVector::zeros(full);
        for n in 0..=4 {
            acc = acc.add(&v.restrict(n).unwrap().restrict_to(full).unwrap()).unwrap();
        }
        assert_eq!(acc, v);
    }

    #[test]
    fn json_round_trip() {
        let full = Space::full(3).unwrap();
        let v = StateVector::<f64>::from_fn(full, |b| Ok(b as f64 * 0.5)).unwrap();
        assert_eq!(StateVector::<f64>::from_json(&v.to_json()).unwrap(), v);
    }

    #[test]
    fn basis_rejects_foreign_configuration() {
        let s = Space::sector(3, 1).unwrap();
        let c: Configuration = "110".parse().unwrap();
        assert!(StateVector::<f64>::basis(s, &c).is_err());
        let c: Configuration = "010".parse().unwrap();
        let b = StateVector::<f64>::basis(s, &c).unwrap();
        assert_eq!(b.get(c.bits()), 1.0);
        assert_eq!(b.total(), 1.0);
    }
}
