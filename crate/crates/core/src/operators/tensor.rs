use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use serde_json::{json, Value};

use super::local::LocalOperator;
use super::sparse::SparseMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::statespace::{occ, Space};
use crate::vector::StateVector;

/// Sparse operator mapping `domain` into `codomain`.
///
/// Both spaces live on the same lattice. Operators built from an action on
/// configurations are implicitly compressed: `𝟙_codomain · A · 𝟙_domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator<S> {
    domain: Space,
    codomain: Space,
    mat: SparseMatrix<S>,
}

impl<S: Scalar> TensorOperator<S> {
    pub fn from_parts(domain: Space, codomain: Space, mat: SparseMatrix<S>) -> Result<Self> {
        if domain.sites() != codomain.sites()
            || mat.cols() != domain.dim()
            || mat.rows() != codomain.dim()
        {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} matrix for {domain} -> {codomain}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self {
            domain,
            codomain,
            mat,
        })
    }

    /// Builds the operator column by column: `action(η)` lists the images
    /// `(η', a)` meaning `A|η⟩ ∋ a|η'⟩`. Images outside `codomain` are dropped.
    pub fn from_action<I>(
        domain: Space,
        codomain: Space,
        mut action: impl FnMut(u64) -> Result<I>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, S)>,
    {
        if domain.sites() != codomain.sites() {
            return Err(Error::SpaceMismatch(format!("{domain} -> {codomain}")));
        }
        let mut triplets = Vec::new();
        for (col, bits) in domain.states().into_iter().enumerate() {
            for (target, value) in action(bits)? {
                if value.is_zero() {
                    continue;
                }
                if let Some(row) = codomain.index_of(target) {
                    triplets.push((row, col, value));
                }
            }
        }
        let mat = SparseMatrix::from_triplets(codomain.dim(), domain.dim(), triplets)?;
        Ok(Self {
            domain,
            codomain,
            mat,
        })
    }

    /// Diagonal operator `Σ_η f(η)|η⟩⟨η|`.
    pub fn diagonal(space: Space, mut f: impl FnMut(u64) -> Result<S>) -> Result<Self> {
        let diag = space.states().into_iter().map(&mut f).collect::<Result<_>>()?;
        Ok(Self {
            domain: space,
            codomain: space,
            mat: SparseMatrix::from_diagonal(diag),
        })
    }

    pub fn identity(space: Space) -> Self {
        Self {
            domain: space,
            codomain: space,
            mat: SparseMatrix::identity(space.dim()),
        }
    }

    pub fn zero(domain: Space, codomain: Space) -> Self {
        Self {
            domain,
            codomain,
            mat: SparseMatrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    pub fn domain(&self) -> Space {
        self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    pub fn sites(&self) -> usize {
        self.domain.sites()
    }

    pub fn matrix(&self) -> &SparseMatrix<S> {
        &self.mat
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    /// `⟨η'|A|η⟩`.
    pub fn entry(&self, target: u64, source: u64) -> S {
        match (self.codomain.index_of(target), self.domain.index_of(source)) {
            (Some(r), Some(c)) => self.mat.get(r, c).cloned().unwrap_or_else(S::zero),
            _ => S::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch(format!(
                "{} -> {} vs {} -> {}",
                self.domain, self.codomain, other.domain, other.codomain
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            mat: self.mat.add(&other.mat)?,
            ..*self
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            mat: self.mat.sub(&other.mat)?,
            ..*self
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            mat: self.mat.scale(s),
            ..*self
        }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.codomain != self.domain {
            return Err(Error::SpaceMismatch(format!(
                "cannot compose ({} -> {}) after ({} -> {})",
                self.domain, self.codomain, other.domain, other.codomain
            )));
        }
        Ok(Self {
            domain: other.domain,
            codomain: self.codomain,
            mat: self.mat.matmul(&other.mat)?,
        })
    }

    /// `self^n`; requires a square operator.
    pub fn pow(&self, n: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::SpaceMismatch(format!(
                "power of non-square operator {} -> {}",
                self.domain, self.codomain
            )));
        }
        (0..n).try_fold(Self::identity(self.domain), |acc, _| acc.compose(self))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn transpose(&self) -> Self {
        Self {
            domain: self.codomain,
            codomain: self.domain,
            mat: self.mat.transpose(),
        }
    }

    /// Compression `𝟙_codomain · A · 𝟙_domain` onto subspaces of the same lattice.
    pub fn restrict(&self, domain: Space, codomain: Space) -> Result<Self> {
        if domain.sites() != self.sites() || codomain.sites() != self.sites() {
            return Err(Error::SpaceMismatch(format!(
                "cannot restrict {} -> {} to {domain} -> {codomain}",
                self.domain, self.codomain
            )));
        }
        let mut triplets = Vec::new();
        for (r, c, v) in self.mat.triplets() {
            let (tb, sb) = (self.codomain.state_at(r), self.domain.state_at(c));
            if let (Some(r2), Some(c2)) = (codomain.index_of(tb), domain.index_of(sb)) {
                triplets.push((r2, c2, v.clone()));
            }
        }
        Ok(Self {
            domain,
            codomain,
            mat: SparseMatrix::from_triplets(codomain.dim(), domain.dim(), triplets)?,
        })
    }

    /// `𝟙_N A 𝟙_N` in the sector basis.
    pub fn project_sector(&self, particles: usize) -> Result<Self> {
        let s = Space::sector(self.sites(), particles)?;
        self.restrict(s, s)
    }

    pub fn apply(&self, v: &StateVector<S>) -> Result<StateVector<S>> {
        if v.space() != self.domain {
            return Err(Error::SpaceMismatch(format!(
                "vector on {} for operator on {}",
                v.space(),
                self.domain
            )));
        }
        StateVector::from_coeffs(self.codomain, self.mat.matvec(v.coeffs())?)
    }

    /// `⟨v| A` as a vector on the domain.
    pub fn apply_left(&self, v: &StateVector<S>) -> Result<StateVector<S>> {
        if v.space() != self.codomain {
            return Err(Error::SpaceMismatch(format!(
                "row vector on {} for operator into {}",
                v.space(),
                self.codomain
            )));
        }
        StateVector::from_coeffs(self.domain, self.mat.vecmat(v.coeffs())?)
    }

    /// Largest entry magnitude; zero iff the operator is zero.
    pub fn max_magnitude(&self) -> f64 {
        self.mat.max_magnitude()
    }

    pub fn map<T: Scalar>(&self, f: impl FnMut(&S) -> T) -> TensorOperator<T> {
        TensorOperator {
            domain: self.domain,
            codomain: self.codomain,
            mat: self.mat.map(f),
        }
    }

    /// `{domain, codomain, dim: [rows, cols], triplets: [[row, col, scalar]]}`,
    /// 1-based ordinals in each space's basis order.
    pub fn to_json(&self) -> Value {
        let triplets: Vec<Value> = self
            .mat
            .triplets()
            .map(|(r, c, v)| json!([r + 1, c + 1, v.to_json()]))
            .collect();
        json!({
            "domain": self.domain,
            "codomain": self.codomain,
            "dim": [self.mat.rows(), self.mat.cols()],
            "triplets": triplets,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let domain: Space = serde_json::from_value(v["domain"].clone())?;
        let codomain: Space = serde_json::from_value(v["codomain"].clone())?;
        let arr = v["triplets"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing triplets".into()))?;
        let mut triplets = Vec::with_capacity(arr.len());
        for t in arr {
            let idx = |k: usize| {
                t[k].as_u64()
                    .filter(|&i| i >= 1)
                    .map(|i| i as usize - 1)
                    .ok_or_else(|| Error::Parse(format!("bad triplet {t}")))
            };
            triplets.push((idx(0)?, idx(1)?, S::from_json(&t[2])?));
        }
        let mat = SparseMatrix::from_triplets(codomain.dim(), domain.dim(), triplets)?;
        Self::from_parts(domain, codomain, mat)
    }

    /// Writes JSON, gzip-compressed when the path ends in `.gz`.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json_value(&self.to_json(), path)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&read_json_value(path)?)
    }
}

impl TensorOperator<f64> {
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        self.mat.to_dense()
    }
}

pub(crate) fn write_json_value(v: &Value, path: &Path) -> Result<()> {
    let text = serde_json::to_string(v)?;
    let file = std::fs::File::create(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut enc = GzEncoder::new(file, flate2::Compression::default());
        enc.write_all(text.as_bytes())?;
        enc.finish()?;
    } else {
        let mut f = file;
        f.write_all(text.as_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_json_value(path: &Path) -> Result<Value> {
    let file = std::fs::File::open(path)?;
    let mut text = String::new();
    if path.extension().is_some_and(|e| e == "gz") {
        GzDecoder::new(file).read_to_string(&mut text)?;
    } else {
        let mut f = file;
        f.read_to_string(&mut text)?;
    }
    Ok(serde_json::from_str(&text)?)
}

/// `u_k = 𝟙^{⊗(k−1)} ⊗ u ⊗ 𝟙^{⊗(L−k)}` on `space` (compressed if a sector).
pub fn embed_local<S: Scalar>(
    u: &LocalOperator<S>,
    site: usize,
    space: Space,
) -> Result<TensorOperator<S>> {
    let sites = space.sites();
    if site == 0 || site > sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    let mask = 1u64 << (site - 1);
    TensorOperator::from_action(space, space, |bits| {
        let b = occ(bits, site) as usize;
        Ok((0..2).filter_map(move |b2| {
            let a = u.entry(b2, b);
            (!a.is_zero()).then(|| ((bits & !mask) | ((b2 as u64) << (site - 1)), a.clone()))
        }))
    })
}

/// Local operator embedded on the full space, where sector compression would
/// drop particle-changing entries.
pub fn embed_local_full<S: Scalar>(
    u: &LocalOperator<S>,
    site: usize,
    sites: usize,
) -> Result<TensorOperator<S>> {
    embed_local(u, site, Space::full(sites)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Laurent;

    #[test]
    fn n_hat_is_occupation_projector() {
        let space = Space::full(4).unwrap();
        for k in 1..=4 {
            let n = embed_local(&LocalOperator::<f64>::n_hat(), k, space).unwrap();
            for bits in space.states() {
                assert_eq!(n.entry(bits, bits), occ(bits, k) as f64);
            }
        }
    }

    #[test]
    fn identity_embeds_to_identity() {
        let space = Space::full(3).unwrap();
        for k in 1..=3 {
            let e = embed_local(&LocalOperator::<Laurent>::identity(), k, space).unwrap();
            assert_eq!(e, TensorOperator::identity(space));
        }
        assert!(embed_local(&LocalOperator::<f64>::identity(), 4, space).is_err());
    }

    #[test]
    fn disjoint_supports_commute_exactly() {
        let space = Space::full(3).unwrap();
        let ops = [
            LocalOperator::<Laurent>::sigma_plus(),
            LocalOperator::sigma_minus(),
            LocalOperator::sigma_x(),
            LocalOperator::i_sigma_y(),
            LocalOperator::sigma_z(),
            LocalOperator::n_hat(),
        ];
        for (i, u) in ops.iter().enumerate() {
            for v in &ops[i..] {
                for k in 1..=3 {
                    for l in (1..=3).filter(|&l| l != k) {
                        let a = embed_local(u, k, space).unwrap();
                        let b = embed_local(v, l, space).unwrap();
                        assert!(a.commutator(&b).unwrap().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip_with_gzip() {
        let space = Space::full(3).unwrap();
        let a = embed_local(&LocalOperator::<f64>::sigma_x(), 2, space).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.json", "a.json.gz"] {
            let p = dir.path().join(name);
            a.write_json(&p).unwrap();
            assert_eq!(TensorOperator::<f64>::read_json(&p).unwrap(), a);
        }
    }
}
