use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::measures::{sam_vector, SamKind, SamSpec};
use crate::scalar::NumericField;
use crate::statespace::{PositionList, Space};
use crate::vector::StateVector;

use super::table::{position_lists, positions_field};

/// Least-squares weights of a vector over the `K`-shock SAM family of its
/// sector.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub shocks: Vec<PositionList>,
    pub weights: Vec<f64>,
    /// `‖Mc − v‖₂ / ‖v‖₂`.
    pub residual: f64,
    /// Ratio of extreme singular values of the column-equilibrated family.
    pub condition: f64,
    pub rank: usize,
}

impl Decomposition {
    pub fn weight(&self, y: &PositionList) -> Option<f64> {
        self.shocks.iter().position(|s| s == y).map(|i| self.weights[i])
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.shocks
            .iter()
            .zip(&self.weights)
            .map(|(y, c)| format!("{},{c:e}", positions_field(y)))
            .collect()
    }

    pub fn to_json(&self, params: Value) -> Value {
        let weights: Map<String, Value> = self
            .shocks
            .iter()
            .zip(&self.weights)
            .map(|(y, c)| (positions_field(y), json!(c)))
            .collect();
        json!({
            "weights": weights,
            "residual": self.residual,
            "condition": self.condition,
            "rank": self.rank,
            "weight_sum": self.weight_sum(),
            "params": params,
        })
    }
}

/// `{𝟙_N |SAM_y⃗⟩ : y⃗ ∈ Ω_K}` as columns, in sector order of `y⃗`.
pub fn sam_family(
    field: &NumericField,
    space: Space,
    shocks: usize,
    z: f64,
    kind: SamKind,
) -> Result<(Vec<PositionList>, DMatrix<f64>)> {
    let lists = position_lists(Space::sector(space.sites(), shocks)?);
    let mut m = DMatrix::zeros(space.dim(), lists.len());
    for (c, y) in lists.iter().enumerate() {
        let v = sam_vector(field, &SamSpec::new(y.clone(), z, kind)?, space)?;
        m.set_column(c, &DVector::from_column_slice(v.coeffs()));
    }
    Ok((lists, m))
}

/// Solves `min ‖Mc − v‖₂` over the SAM family of `v`'s sector by QR;
/// the SVD supplies rank and condition.
pub fn decompose_onto_sams(
    v: &StateVector<f64>,
    shocks: usize,
    z: f64,
    kind: SamKind,
    q: f64,
) -> Result<Decomposition> {
    let space = v.space();
    let Some(particles) = space.particles() else {
        return Err(Error::SpaceMismatch(format!("decomposition needs a sector, got {space}")));
    };
    if shocks > particles {
        return Err(Error::ParticlesOutOfRange {
            particles: shocks,
            sites: particles,
        });
    }
    let field = NumericField::new(q)?;
    let (lists, m) = sam_family(&field, space, shocks, z, kind)?;
    let cols = m.ncols();
    // Unit columns; the scale is undone on the solution.
    let scales: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    if let Some(c) = scales.iter().position(|&s| s == 0.0) {
        return Err(Error::InvalidParameter(format!("SAM column {} vanishes", positions_field(&lists[c]))));
    }
    let mut a = m.clone();
    for (c, s) in scales.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(false, false);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let cutoff = smax * f64::EPSILON * m.nrows().max(cols) as f64;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, columns: cols });
    }
    let condition = smax / sv.min();
    let b = DVector::from_column_slice(v.coeffs());
    // Full column rank: Householder QR is backward stable, and one
    // refinement step removes the rounding left by the first solve.
    let qr = a.clone().qr();
    let (q_factor, r_factor) = (qr.q(), qr.r());
    let solve = |rhs: &DVector<f64>| {
        r_factor
            .solve_upper_triangular(&(q_factor.transpose() * rhs))
            .ok_or_else(|| Error::InvalidParameter("least squares failed: singular R".into()))
    };
    let mut y = solve(&b)?;
    y += solve(&(&b - &a * &y))?;
    let weights: Vec<f64> = y.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let fitted = &m * DVector::from_column_slice(&weights);
    let bn = b.norm();
    let residual = if bn == 0.0 { (fitted - &b).norm() } else { (fitted - &b).norm() / bn };
    Ok(Decomposition {
        shocks: lists,
        weights,
        residual,
        condition,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::expm::{expm_action, ExpmOptions};
    use crate::evolution::table::{transition_table, DrivingSpec};
    use crate::measures::restrict_particles;
    use crate::operators::GeneratorSpec;
    use crate::scalar::{Field, QExponent};

    #[test]
    fn initial_sam_decomposes_to_indicator() {
        let (l, n, q, z) = (6, 3, 1.4, 0.8);
        let f = NumericField::new(q).unwrap();
        let x = PositionList::new(l, vec![2, 5]).unwrap();
        let space = Space::sector(l, n).unwrap();
        let v = sam_vector(&f, &SamSpec::new(x.clone(), z, SamKind::II).unwrap(), space).unwrap();
        let d = decompose_onto_sams(&v, 2, z, SamKind::II, q).unwrap();
        assert!(d.residual < 1e-14);
        for (y, c) in d.shocks.iter().zip(&d.weights) {
            let expected = if *y == x { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn every_family_column_is_recovered_to_rounding() {
        // Tall, well-conditioned family where an SVD solve alone leaves ~1e-10.
        let (l, n, q, z) = (8, 3, 1.3, 1.0);
        let f = NumericField::new(q).unwrap();
        let space = Space::sector(l, n).unwrap();
        for x in position_lists(Space::sector(l, 1).unwrap()) {
            let v = sam_vector(&f, &SamSpec::new(x.clone(), z, SamKind::II).unwrap(), space).unwrap();
            let d = decompose_onto_sams(&v, 1, z, SamKind::II, q).unwrap();
            assert!(d.residual < 1e-14, "{x:?}: {}", d.residual);
            for (y, c) in d.shocks.iter().zip(&d.weights) {
                let expected = if *y == x { 1.0 } else { 0.0 };
                assert!((c - expected).abs() < 1e-14, "{x:?} {y:?}: {c}");
            }
        }
    }

    #[test]
    fn evolved_sam_weights_are_transition_column() {
        let (l, n, k, q, z, t) = (8, 3, 1, 1.5, 1.0, 0.5);
        let f = NumericField::new(q).unwrap();
        let x = PositionList::new(l, vec![3]).unwrap();
        let full = sam_vector(&f, &SamSpec::new(x.clone(), z, SamKind::II).unwrap(), Space::full(l).unwrap()).unwrap();
        let v0 = restrict_particles(&full, n).unwrap();
        let alpha = f.q_pow(QExponent::new(l as i64 - 2 * k as i64, l as i64).unwrap()).unwrap();
        let h = GeneratorSpec::periodic(l, q, alpha, 1.0).build(v0.space()).unwrap();
        let vt = expm_action(&h, &v0, t, &ExpmOptions::default()).unwrap();
        let d = decompose_onto_sams(&vt, k, z, SamKind::II, q).unwrap();
        assert!(d.residual < 1e-10, "residual {}", d.residual);
        let tab = transition_table(l, k, DrivingSpec::global(n), q, t, &ExpmOptions::default()).unwrap();
        let col = tab.column(&x).unwrap();
        for (c, p) in d.weights.iter().zip(&col) {
            assert!((c - p).abs() < 1e-10, "{c} vs {p}");
            assert!(*c >= -1e-12);
        }
    }

    #[test]
    fn rejects_full_space_and_excess_shocks() {
        let v = StateVector::<f64>::summation(Space::full(3).unwrap());
        assert!(decompose_onto_sams(&v, 1, 1.0, SamKind::I, 1.3).is_err());
        let v = StateVector::<f64>::summation(Space::sector(4, 1).unwrap());
        assert!(decompose_onto_sams(&v, 2, 1.0, SamKind::I, 1.3).is_err());
    }

    #[test]
    fn json_lists_weights_by_shock_set() {
        let (l, q) = (4, 1.3);
        let f = NumericField::new(q).unwrap();
        let x = PositionList::new(l, vec![1]).unwrap();
        let v = sam_vector(&f, &SamSpec::new(x, 1.0, SamKind::I).unwrap(), Space::sector(l, 2).unwrap()).unwrap();
        let d = decompose_onto_sams(&v, 1, 1.0, SamKind::I, q).unwrap();
        let j = d.to_json(json!({"L": 4}));
        assert!((j["weights"]["1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(j["params"]["L"], 4);
        assert_eq!(d.csv_rows().len(), 4);
    }
}
