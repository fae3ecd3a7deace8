use std::ops::Mul;


use crate::scalar::Scalar;

/// Single-site 2×2 operator in the basis `|0), |1)`.
///
/// `m[r][c]` is the amplitude of `|r)` in the image of `|c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator<S> {
    m: [[S; 2]; 2],
}

impl<S: Scalar> LocalOperator<S> {
    pub fn new(m: [[S; 2]; 2]) -> Self {
        Self { m }
    }

    fn int(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new([
            [S::from_i64(a), S::from_i64(b)],
            [S::from_i64(c), S::from_i64(d)],
        ])
    }

    pub fn identity() -> Self {
        Self::int(1, 0, 0, 1)
    }

    pub fn sigma_x() -> Self {
        Self::int(0, 1, 1, 0)
    }

    /// `iσ^y`, the real form of `σ^y`.
    pub fn i_sigma_y() -> Self {
        Self::int(0, 1, -1, 0)
    }

    pub fn sigma_z() -> Self {
        Self::int(1, 0, 0, -1)
    }

    /// `σ^+`: annihilates a particle when acting to the right.
    pub fn sigma_plus() -> Self {
        Self::int(0, 1, 0, 0)
    }

    /// `σ^-`: creates a particle when acting to the right.
    pub fn sigma_minus() -> Self {
        Self::int(0, 0, 1, 0)
    }

    /// `n̂ = diag(0, 1)`.
    pub fn n_hat() -> Self {
        Self::int(0, 0, 0, 1)
    }

    /// `υ̂ = diag(1, 0)`.
    pub fn v_hat() -> Self {
        Self::int(1, 0, 0, 0)
    }

    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.m[row][col]
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new([
            [s.clone() * self.m[0][0].clone(), s.clone() * self.m[0][1].clone()],
            [s.clone() * self.m[1][0].clone(), s.clone() * self.m[1][1].clone()],
        ])
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new([
            [
                self.m[0][0].clone() + o.m[0][0].clone(),
                self.m[0][1].clone() + o.m[0][1].clone(),
            ],
            [
                self.m[1][0].clone() + o.m[1][0].clone(),
                self.m[1][1].clone() + o.m[1][1].clone(),
            ],
        ])
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_zero())
    }
}

impl<S: Scalar> Mul for &LocalOperator<S> {
    type Output = LocalOperator<S>;

    fn mul(self, o: &LocalOperator<S>) -> LocalOperator<S> {
        let e = |r: usize, c: usize| {
            self.m[r][0].clone() * o.m[0][c].clone() + self.m[r][1].clone() * o.m[1][c].clone()
        };
        LocalOperator::new([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Laurent;

    type L = LocalOperator<Laurent>;

    #[test]
    fn product_rules_hold_exactly() {
        let (sp, sm, n, v) = (L::sigma_plus(), L::sigma_minus(), L::n_hat(), L::v_hat());
        let zero = L::new(Default::default());
        assert_eq!(&sp * &sm, v);
        assert_eq!(&sm * &sp, n);
        assert_eq!(&n * &v, zero);
        assert_eq!(&v * &n, zero);
        assert_eq!(&sp * &n, sp);
        assert_eq!(&n * &sp, zero);
        assert_eq!(&sp * &v, zero);
        assert_eq!(&v * &sp, sp);
        assert_eq!(&sm * &n, zero);
        assert_eq!(&n * &sm, sm);
        assert_eq!(&sm * &v, sm);
        assert_eq!(&v * &sm, zero);
    }

    #[test]
    fn ladder_and_projector_decompositions() {
        let two = Laurent::from_i64(2);
        let (x, iy, z, id) = (L::sigma_x(), L::i_sigma_y(), L::sigma_z(), L::identity());
        // 2σ^± = σ^x ± iσ^y
        assert_eq!(L::sigma_plus().scale(&two), x.add(&iy));
        assert_eq!(L::sigma_minus().scale(&two), x.add(&iy.scale(&Laurent::from_i64(-1))));
        // 2n̂ = 1 − σ^z, 2υ̂ = 1 + σ^z
        assert_eq!(L::n_hat().scale(&two), id.add(&z.scale(&Laurent::from_i64(-1))));
        assert_eq!(L::v_hat().scale(&two), id.add(&z));
        // (iσ^y)² = −1
        assert_eq!(&iy * &iy, id.scale(&Laurent::from_i64(-1)));
    }
}
