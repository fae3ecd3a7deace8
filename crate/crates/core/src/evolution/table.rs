use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::operators::GeneratorSpec;
use crate::scalar::{Field, NumericField, QExponent};
use crate::statespace::{Configuration, PositionList, Space};

use super::expm::{propagator_matrix, ExpmOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrivingKind {
    /// Bulk bias `α = q^{1−2M/L}`, `β = 1`.
    Global,
    /// `α = q`, boundary weight `β = q^{−2M}` on the `(L,1)` bond.
    Boundary,
}

impl fmt::Display for DrivingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DrivingKind::Global => "global",
            DrivingKind::Boundary => "boundary",
        })
    }
}

impl FromStr for DrivingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(DrivingKind::Global),
            "boundary" => Ok(DrivingKind::Boundary),
            other => Err(Error::Unknown {
                kind: "driving",
                name: other.into(),
            }),
        }
    }
}

/// Driving of the conditioned process, fixed by the conditioning particle
/// number `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DrivingSpec {
    pub kind: DrivingKind,
    pub conditioning: usize,
}

impl DrivingSpec {
    pub fn global(conditioning: usize) -> Self {
        Self {
            kind: DrivingKind::Global,
            conditioning,
        }
    }

    pub fn boundary(conditioning: usize) -> Self {
        Self {
            kind: DrivingKind::Boundary,
            conditioning,
        }
    }

    fn check(&self, sites: usize) -> Result<()> {
        if self.conditioning > sites {
            return Err(Error::ParticlesOutOfRange {
                particles: self.conditioning,
                sites,
            });
        }
        Ok(())
    }

    pub fn alpha<F: Field>(&self, field: &F, sites: usize) -> Result<F::Scalar> {
        self.check(sites)?;
        let (l, m) = (sites as i64, self.conditioning as i64);
        match self.kind {
            DrivingKind::Global => field.q_pow(QExponent::new(l - 2 * m, l)?),
            DrivingKind::Boundary => Ok(field.q()),
        }
    }

    pub fn beta<F: Field>(&self, field: &F, sites: usize) -> Result<F::Scalar> {
        self.check(sites)?;
        match self.kind {
            DrivingKind::Global => field.q_pow(QExponent::ZERO),
            DrivingKind::Boundary => field.q_pow(QExponent::int(-2 * self.conditioning as i64)),
        }
    }

    pub fn generator<F: Field>(&self, field: &F, sites: usize) -> Result<GeneratorSpec<F::Scalar>> {
        Ok(GeneratorSpec::periodic(
            sites,
            field.q(),
            self.alpha(field, sites)?,
            self.beta(field, sites)?,
        ))
    }

    /// Driving strength: `s = ln(α/q) = −(2M/L) ln q` for global driving,
    /// `s̄ = ln β = −2M ln q` for boundary driving.
    pub fn strength(&self, q: f64, sites: usize) -> f64 {
        let m = self.conditioning as f64;
        match self.kind {
            DrivingKind::Global => -2.0 * m / sites as f64 * q.ln(),
            DrivingKind::Boundary => -2.0 * m * q.ln(),
        }
    }
}

/// `P(y⃗, t | x⃗, 0) = ⟨y⃗| e^{−H t} |x⃗⟩` on a `K`-particle sector.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionTable {
    space: Space,
    driving: DrivingSpec,
    q: f64,
    t: f64,
    /// Rows are targets `y⃗`, columns sources `x⃗`, both in sector order.
    values: DMatrix<f64>,
}

impl TransitionTable {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn driving(&self) -> DrivingSpec {
        self.driving
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    fn index(&self, x: &PositionList) -> Result<usize> {
        self.space
            .index_of(x.bits())
            .filter(|_| x.sites() == self.space.sites())
            .ok_or_else(|| Error::SpaceMismatch(format!("{x:?} not in {}", self.space)))
    }

    pub fn get(&self, y: &PositionList, x: &PositionList) -> Result<f64> {
        Ok(self.values[(self.index(y)?, self.index(x)?)])
    }

    /// `y⃗ ↦ P(y⃗, t | x⃗, 0)` in sector order.
    pub fn column(&self, x: &PositionList) -> Result<Vec<f64>> {
        Ok(self.values.column(self.index(x)?).iter().copied().collect())
    }

    pub fn position_lists(&self) -> Vec<PositionList> {
        position_lists(self.space)
    }

    /// Rows `x,y,value` with positions joined by `;`.
    pub fn csv_rows(&self) -> Vec<String> {
        let lists = self.position_lists();
        let mut rows = Vec::with_capacity(lists.len() * lists.len());
        for (c, x) in lists.iter().enumerate() {
            for (r, y) in lists.iter().enumerate() {
                rows.push(format!("{},{},{:e}", positions_field(x), positions_field(y), self.values[(r, c)]));
            }
        }
        rows
    }

    pub fn to_json(&self) -> Value {
        let lists = self.position_lists();
        let entries: Vec<Value> = lists
            .iter()
            .enumerate()
            .flat_map(|(c, x)| {
                lists
                    .iter()
                    .enumerate()
                    .map(move |(r, y)| json!([x.positions(), y.positions(), self.values[(r, c)]]))
            })
            .collect();
        json!({
            "space": self.space,
            "driving": self.driving,
            "q": self.q,
            "t": self.t,
            "entries": entries,
        })
    }
}

/// Position lists of a sector in sector order.
pub fn position_lists(space: Space) -> Vec<PositionList> {
    space
        .states()
        .into_iter()
        .map(|b| Configuration::from_bits(space.sites(), b).expect("state of a valid space").positions())
        .collect()
}

/// `2;5` style field, safe inside CSV.
pub fn positions_field(x: &PositionList) -> String {
    x.positions().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
}

/// Transition table of the `K`-particle process under `driving`.
pub fn transition_table(
    sites: usize,
    particles: usize,
    driving: DrivingSpec,
    q: f64,
    t: f64,
    opts: &ExpmOptions,
) -> Result<TransitionTable> {
    let field = NumericField::new(q)?;
    let space = Space::sector(sites, particles)?;
    let h = driving.generator(&field, sites)?.build(space)?;
    let values = propagator_matrix(&h, t, opts)?;
    Ok(TransitionTable {
        space,
        driving,
        q,
        t,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ExactField, Laurent};
    use num_traits::One;
    use crate::evolution::expm::{dense_propagator, Method};

    #[test]
    fn driving_parameters() {
        let f = ExactField::for_sites(4);
        let g = DrivingSpec::global(2);
        assert_eq!(g.alpha(&f, 4).unwrap(), Laurent::one());
        let b = DrivingSpec::boundary(3);
        assert_eq!(b.alpha(&f, 4).unwrap(), f.q());
        assert_eq!(b.beta(&f, 4).unwrap(), f.q_pow(QExponent::int(-6)).unwrap());
        assert!(DrivingSpec::global(5).alpha(&f, 4).is_err());
        // e^s = α/q and e^{s̄} = β
        let q = 1.7f64;
        let nf = NumericField::new(q).unwrap();
        let g = DrivingSpec::global(3);
        assert!((g.strength(q, 8).exp() - g.alpha(&nf, 8).unwrap() / q).abs() < 1e-14);
        assert!((b.strength(q, 4).exp() - b.beta(&nf, 4).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let tab = transition_table(5, 2, DrivingSpec::global(1), 1.4, 0.0, &ExpmOptions::default()).unwrap();
        assert_eq!(tab.matrix(), &DMatrix::identity(10, 10));
    }

    #[test]
    fn unweighted_columns_sum_to_one() {
        // M = 0 under global driving gives α = q, β = 1.
        for method in [Method::Dense, Method::Krylov, Method::Uniformization] {
            let opts = ExpmOptions::default().with_method(method);
            let tab = transition_table(6, 2, DrivingSpec::global(0), 1.8, 0.9, &opts).unwrap();
            for c in tab.matrix().column_iter() {
                assert!((c.sum() - 1.0).abs() < 1e-12, "{method}");
                assert!(c.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn four_site_table_matches_dense_oracle() {
        let (q, t) = (1.5, 0.3);
        let tab = transition_table(4, 1, DrivingSpec::global(2), q, t, &ExpmOptions::default()).unwrap();
        // α = q^{1−2·2/4} = 1, β = 1
        let h = GeneratorSpec::periodic(4, q, 1.0, 1.0)
            .build(Space::sector(4, 1).unwrap())
            .unwrap();
        let lib = (h.to_dense() * (-t)).exp();
        assert!((tab.matrix() - &lib).amax() < 1e-13);
        let own = dense_propagator(&h.to_dense(), t).unwrap();
        assert!((tab.matrix() - own).amax() < 1e-13);
        assert_eq!(tab.csv_rows().len(), 16);
        let x = PositionList::new(4, vec![2]).unwrap();
        let y = PositionList::new(4, vec![3]).unwrap();
        assert!((tab.get(&y, &x).unwrap() - lib[(2, 1)]).abs() < 1e-13);
    }

    #[test]
    fn weighted_table_is_nonnegative() {
        for driving in [DrivingSpec::global(3), DrivingSpec::boundary(2)] {
            let tab = transition_table(7, 2, driving, 2.0, 1.0, &ExpmOptions::default()).unwrap();
            assert!(tab.matrix().iter().all(|&p| p >= 0.0), "{driving:?}");
        }
    }
}
