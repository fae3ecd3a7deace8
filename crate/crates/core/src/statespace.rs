//! Configurations of the exclusion process and the state spaces built on them.
//!
//! Sites are 1-indexed. Site `k` is stored in bit `k - 1` of a `u64`, so the
//! binary index of a configuration is `1 + bits`. Sector bases list their
//! configurations in increasing binary index, which makes an `N`-particle
//! sector matrix a principal submatrix of the full `2^L` matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest lattice the bit encoding supports.
pub const MAX_SITES: usize = 63;

/// Largest lattice for which full `2^L` operators may be materialised.
pub const MAX_FULL_SITES: usize = 14;

#[inline]
pub(crate) fn occ(bits: u64, site: usize) -> u64 {
    (bits >> (site - 1)) & 1
}

#[inline]
pub(crate) fn lattice_mask(sites: usize) -> u64 {
    if sites >= 64 {
        u64::MAX
    } else {
        (1u64 << sites) - 1
    }
}

/// Number of particles strictly left of `site`.
#[inline]
pub(crate) fn count_left(bits: u64, site: usize) -> u32 {
    (bits & lattice_mask(site - 1)).count_ones()
}

/// Number of particles strictly right of `site` on a lattice of `sites`.
#[inline]
pub(crate) fn count_right(bits: u64, site: usize, sites: usize) -> u32 {
    ((bits & lattice_mask(sites)) >> site).count_ones()
}

/// Sum of particle positions (1-indexed).
#[inline]
pub(crate) fn position_sum(bits: u64) -> i64 {
    let mut b = bits;
    let mut s = 0i64;
    while b != 0 {
        s += i64::from(b.trailing_zeros()) + 1;
        b &= b - 1;
    }
    s
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// An occupation string `η ∈ {0,1}^L`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    sites: usize,
    bits: u64,
}

impl Configuration {
    pub fn new(occupations: &[u8]) -> Result<Self> {
        let sites = occupations.len();
        check_sites(sites)?;
        let mut bits = 0u64;
        for (i, &o) in occupations.iter().enumerate() {
            match o {
                0 => {}
                1 => bits |= 1 << i,
                other => {
                    return Err(Error::InvalidConfiguration(format!(
                        "occupation {other} at site {}",
                        i + 1
                    )))
                }
            }
        }
        Ok(Self { sites, bits })
    }

    pub fn from_bits(sites: usize, bits: u64) -> Result<Self> {
        check_sites(sites)?;
        if bits & !lattice_mask(sites) != 0 {
            return Err(Error::InvalidConfiguration(format!(
                "bits {bits:#b} exceed {sites} sites"
            )));
        }
        Ok(Self { sites, bits })
    }

    pub fn empty(sites: usize) -> Result<Self> {
        Self::from_bits(sites, 0)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// `η(k)`.
    pub fn occupation(&self, site: usize) -> Result<u8> {
        self.check_site(site)?;
        Ok(occ(self.bits, site) as u8)
    }

    /// `υ(k) = 1 − η(k)`.
    pub fn vacancy(&self, site: usize) -> Result<u8> {
        Ok(1 - self.occupation(site)?)
    }

    pub fn occupations(&self) -> Vec<u8> {
        (1..=self.sites).map(|k| occ(self.bits, k) as u8).collect()
    }

    /// `N(η)`.
    pub fn particles(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// `V(η) = L − N(η)`.
    pub fn vacancies(&self) -> usize {
        self.sites - self.particles()
    }

    /// `ι(η) = 1 + Σ η(k) 2^{k−1}`.
    pub fn binary_index(&self) -> u64 {
        1 + self.bits
    }

    /// `N_k(η)`: particles strictly to the left of `site`.
    pub fn left_count(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        Ok(count_left(self.bits, site) as usize)
    }

    /// Particles strictly to the right of `site`.
    pub fn right_count(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        Ok(count_right(self.bits, site, self.sites) as usize)
    }

    /// Exchange of the occupations on bond `(k, k+1)`, or `(L, 1)` for `k = L`.
    pub fn local_swap(&self, site: usize) -> Result<Self> {
        self.check_site(site)?;
        let other = if site == self.sites { 1 } else { site + 1 };
        let (a, b) = (occ(self.bits, site), occ(self.bits, other));
        if a == b {
            return Ok(*self);
        }
        let flip = (1u64 << (site - 1)) | (1u64 << (other - 1));
        Ok(Self {
            sites: self.sites,
            bits: self.bits ^ flip,
        })
    }

    /// Space reflection `R(η)(k) = η(L + 1 − k)`.
    pub fn reflect(&self) -> Self {
        Self {
            sites: self.sites,
            bits: reflect_bits(self.bits, self.sites),
        }
    }

    pub fn positions(&self) -> PositionList {
        PositionList {
            sites: self.sites,
            positions: (1..=self.sites).filter(|&k| occ(self.bits, k) == 1).collect(),
        }
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(())
    }
}

pub(crate) fn reflect_bits(bits: u64, sites: usize) -> u64 {
    if sites == 0 {
        return 0;
    }
    bits.reverse_bits() >> (64 - sites)
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::LatticeSize(sites));
    }
    Ok(())
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 1..=self.sites {
            f.write_str(if occ(self.bits, k) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let occ: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("bad occupation character '{other}'"))),
            })
            .collect::<Result<_>>()?;
        Configuration::new(&occ)
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Position representation `x⃗ = {x : η(x) = 1}`, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositionList {
    sites: usize,
    positions: Vec<usize>,
}

impl PositionList {
    /// Any lattice size is accepted; only the bit forms need `sites <= MAX_SITES`.
    pub fn new(sites: usize, positions: Vec<usize>) -> Result<Self> {
        if sites == 0 {
            return Err(Error::LatticeSize(sites));
        }
        for w in positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidConfiguration(format!(
                    "positions must be strictly increasing, got {positions:?}"
                )));
            }
        }
        if let Some(&p) = positions.iter().find(|&&p| p == 0 || p > sites) {
            return Err(Error::SiteOutOfRange { site: p, sites });
        }
        Ok(Self { sites, positions })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// # Panics
    /// If `sites > MAX_SITES`.
    pub fn bits(&self) -> u64 {
        assert!(self.sites <= MAX_SITES, "{} sites do not fit a bit string", self.sites);
        self.positions.iter().fold(0u64, |b, &p| b | 1 << (p - 1))
    }

    /// # Panics
    /// If `sites > MAX_SITES`.
    pub fn to_configuration(&self) -> Configuration {
        Configuration {
            sites: self.sites,
            bits: self.bits(),
        }
    }

    /// Comma-separated site list, e.g. `2,5`.
    pub fn to_csv_field(&self) -> String {
        self.positions
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl From<&Configuration> for PositionList {
    fn from(c: &Configuration) -> Self {
        c.positions()
    }
}

/// State space an operator or vector lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Full { sites: usize },
    Sector { sites: usize, particles: usize },
}

impl Space {
    pub fn full(sites: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_FULL_SITES {
            return Err(Error::LatticeSize(sites));
        }
        Ok(Space::Full { sites })
    }

    pub fn sector(sites: usize, particles: usize) -> Result<Self> {
        check_sites(sites)?;
        if particles > sites {
            return Err(Error::ParticlesOutOfRange { particles, sites });
        }
        Ok(Space::Sector { sites, particles })
    }

    pub fn sites(&self) -> usize {
        match *self {
            Space::Full { sites } | Space::Sector { sites, .. } => sites,
        }
    }

    pub fn particles(&self) -> Option<usize> {
        match *self {
            Space::Full { .. } => None,
            Space::Sector { particles, .. } => Some(particles),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Space::Full { sites } => 1usize << sites,
            Space::Sector { sites, particles } => binomial(sites, particles) as usize,
        }
    }

    pub fn contains(&self, bits: u64) -> bool {
        match *self {
            Space::Full { sites } => bits & !lattice_mask(sites) == 0,
            Space::Sector { sites, particles } => {
                bits & !lattice_mask(sites) == 0 && bits.count_ones() as usize == particles
            }
        }
    }

    /// Ordinal of a configuration in this space, or `None` if it lies outside.
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        if !self.contains(bits) {
            return None;
        }
        match *self {
            Space::Full { .. } => Some(bits as usize),
            Space::Sector { .. } => Some(sector_rank(bits)),
        }
    }

    /// Configuration bits at a given ordinal.
    pub fn state_at(&self, index: usize) -> u64 {
        match *self {
            Space::Full { .. } => index as u64,
            Space::Sector { particles, .. } => sector_unrank(index as u64, particles),
        }
    }

    /// All configuration bits in ordinal order.
    pub fn states(&self) -> Vec<u64> {
        match *self {
            Space::Full { sites } => (0..1u64 << sites).collect(),
            Space::Sector { sites, particles } => SectorIter::new(sites, particles).collect(),
        }
    }

    /// Which sector a configuration of this space belongs to after a map that
    /// changes the particle number by `delta`.
    pub(crate) fn shifted(&self, delta: i64) -> Option<Space> {
        match *self {
            Space::Full { .. } => Some(*self),
            Space::Sector { sites, particles } => {
                let p = particles as i64 + delta;
                if p < 0 || p as usize > sites {
                    None
                } else {
                    Some(Space::Sector {
                        sites,
                        particles: p as usize,
                    })
                }
            }
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Space::Full { sites } => write!(f, "full(L={sites})"),
            Space::Sector { sites, particles } => write!(f, "sector(L={sites},N={particles})"),
        }
    }
}

/// Rank of a configuration among those with the same particle number, in
/// increasing binary-index order.
pub(crate) fn sector_rank(bits: u64) -> usize {
    let mut b = bits;
    let mut j = 1;
    let mut rank = 0u64;
    while b != 0 {
        let p = b.trailing_zeros() as usize;
        rank += binomial(p, j);
        j += 1;
        b &= b - 1;
    }
    rank as usize
}

pub(crate) fn sector_unrank(mut rank: u64, particles: usize) -> u64 {
    let mut bits = 0u64;
    let mut upper = MAX_SITES;
    for j in (1..=particles).rev() {
        let mut p = j - 1;
        while p + 1 < upper && binomial(p + 1, j) <= rank {
            p += 1;
        }
        rank -= binomial(p, j);
        bits |= 1 << p;
        upper = p;
    }
    bits
}

/// Same-popcount integers in increasing order (Gosper's hack).
struct SectorIter {
    next: Option<u64>,
    limit: u64,
}

impl SectorIter {
    fn new(sites: usize, particles: usize) -> Self {
        let first = lattice_mask(particles);
        Self {
            next: Some(first),
            limit: lattice_mask(sites),
        }
    }
}

impl Iterator for SectorIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let v = self.next?;
        self.next = if v == 0 {
            None
        } else {
            let t = v | (v - 1);
            let n = (t.wrapping_add(1)) | (((!t & t.wrapping_add(1)).wrapping_sub(1)) >> (v.trailing_zeros() + 1));
            if n > self.limit || n <= v {
                None
            } else {
                Some(n)
            }
        };
        Some(v)
    }
}

/// `Ω_N`: the deterministic basis of all `N`-particle configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    particles: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn enumerate(sites: usize, particles: usize) -> Result<Self> {
        let space = Space::sector(sites, particles)?;
        Ok(Self {
            sites,
            particles,
            states: space.states(),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn space(&self) -> Space {
        Space::Sector {
            sites: self.sites,
            particles: self.particles,
        }
    }

    pub fn configuration(&self, index: usize) -> Configuration {
        Configuration {
            sites: self.sites,
            bits: self.states[index],
        }
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        if config.sites != self.sites {
            return None;
        }
        self.space().index_of(config.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.states.iter().map(move |&bits| Configuration {
            sites: self.sites,
            bits,
        })
    }
}
