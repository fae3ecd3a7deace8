use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{SparseMatrix, TensorOperator};
use crate::vector::StateVector;

/// Largest dimension the dense oracle accepts.
pub const DENSE_MAX_DIM: usize = 5000;

/// Dimension up to which [`Method::Auto`] uses the dense oracle.
const AUTO_DENSE_DIM: usize = 400;

/// Uniformization steps keep `Λ dt` at or below this, so `e^{−Λ dt}` stays
/// far from underflow.
const UNIFORM_MAX_STEP: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dense Taylor scaling-and-squaring of the full matrix.
    Dense,
    Krylov,
    Uniformization,
    /// Dense for small sectors, Krylov otherwise.
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::Krylov => "krylov",
            Method::Uniformization => "uniformization",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" | "series" => Ok(Method::Dense),
            "krylov" => Ok(Method::Krylov),
            "uniformization" => Ok(Method::Uniformization),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Unknown {
                kind: "method",
                name: other.into(),
            }),
        }
    }
}

/// Accuracy and method controls for [`expm_action`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpmOptions {
    pub method: Method,
    /// Target error relative to `‖v‖₂`.
    pub tol: f64,
    pub krylov_dim: usize,
    /// Cap on Krylov time steps.
    pub max_steps: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: 1e-12,
            krylov_dim: 30,
            max_steps: 100_000,
        }
    }
}

impl ExpmOptions {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must lie in (0, 1)", self.tol)));
        }
        if self.krylov_dim < 2 {
            return Err(Error::InvalidParameter("Krylov dimension must be at least 2".into()));
        }
        Ok(())
    }
}

/// `e^{−Ht} v` for a square numeric operator.
pub fn expm_action(
    h: &TensorOperator<f64>,
    v: &StateVector<f64>,
    t: f64,
    opts: &ExpmOptions,
) -> Result<StateVector<f64>> {
    opts.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time {t} must be finite and nonnegative")));
    }
    if !h.is_square() || h.domain() != v.space() {
        return Err(Error::SpaceMismatch(format!(
            "operator {} -> {} applied to vector on {}",
            h.domain(),
            h.codomain(),
            v.space()
        )));
    }
    if t == 0.0 || v.is_zero() {
        return Ok(v.clone());
    }
    let m = h.matrix();
    let x = v.coeffs();
    let out = match resolve(opts.method, m.rows()) {
        Method::Dense => dense_action(m, x, t)?,
        Method::Krylov => krylov_action(m, x, t, opts)?,
        Method::Uniformization => uniformization_action(m, x, t, opts.tol)?,
        Method::Auto => unreachable!("resolved above"),
    };
    StateVector::from_coeffs(v.space(), out)
}

fn resolve(method: Method, dim: usize) -> Method {
    match method {
        Method::Auto if dim <= AUTO_DENSE_DIM => Method::Dense,
        Method::Auto => Method::Krylov,
        m => m,
    }
}

/// `e^{−Ht}` as a dense matrix.
///
/// With `c = t max_i H_ii` the matrix `B = c − Ht` is entrywise
/// nonnegative (off-diagonal entries of `−H` are rates), so the Taylor
/// series of `e^{B/2^s}` has no cancellation; the factor `e^{−c/2^s}` is
/// applied before each squaring.
pub fn dense_propagator(h: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !h.is_square() {
        return Err(Error::SpaceMismatch(format!("{}x{} matrix is not square", h.nrows(), h.ncols())));
    }
    if h.nrows() > DENSE_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension {} exceeds the dense limit {DENSE_MAX_DIM}",
            h.nrows()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time {t} must be finite and nonnegative")));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let c = t * (0..n).map(|i| h[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let mut b = h * (-t);
    for i in 0..n {
        b[(i, i)] += c;
    }
    let norm = b.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    b *= scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=60 {
        term = &term * &b / k as f64;
        sum += &term;
        let tn = term.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let sn = sum.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if tn <= f64::EPSILON * 0.5 * sn {
            break;
        }
    }
    sum *= (-c * scale).exp();
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// `e^{−Ht}` as a dense matrix, column by column through `opts.method`
/// unless that resolves to the dense oracle.
pub fn propagator_matrix(h: &TensorOperator<f64>, t: f64, opts: &ExpmOptions) -> Result<DMatrix<f64>> {
    opts.validate()?;
    if !h.is_square() {
        return Err(Error::SpaceMismatch(format!("{} -> {} is not square", h.domain(), h.codomain())));
    }
    let dim = h.domain().dim();
    if resolve(opts.method, dim) == Method::Dense {
        return dense_propagator(&h.to_dense(), t);
    }
    let columns = (0..dim)
        .into_par_iter()
        .map(|c| {
            let mut e = vec![0.0; dim];
            e[c] = 1.0;
            let v = StateVector::from_coeffs(h.domain(), e)?;
            Ok(expm_action(h, &v, t, opts)?.into_coeffs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
}

fn dense_action(m: &SparseMatrix<f64>, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let p = dense_propagator(&m.to_dense(), t)?;
    Ok((p * DVector::from_column_slice(x)).as_slice().to_vec())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Rounds a step size up to two significant digits.
fn round_step(s: f64) -> f64 {
    let p = 10f64.powf(s.log10().floor() - 1.0);
    (s / p).ceil() * p
}

/// Arnoldi projection with adaptive time stepping and the a-posteriori
/// error estimate of the augmented Hessenberg exponential.
fn krylov_action(m: &SparseMatrix<f64>, x: &[f64], t: f64, opts: &ExpmOptions) -> Result<Vec<f64>> {
    let n = x.len();
    let kdim = opts.krylov_dim.min(n.max(1));
    let anorm = m.norm_inf().max(f64::MIN_POSITIVE);
    let normv = norm2(x);
    // Absolute tolerance per unit time.
    let tol = opts.tol * normv;
    let btol = 1e-14 * anorm;
    let (gamma, delta) = (0.9, 1.2);
    let max_reject = 20;

    let mut w = x.to_vec();
    let mut beta = normv;
    let mut t_now = 0.0;
    let fact = ((kdim as f64 + 1.0) / std::f64::consts::E).powf(kdim as f64 + 1.0)
        * (2.0 * std::f64::consts::PI * (kdim as f64 + 1.0)).sqrt();
    let mut t_new = round_step((1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)).powf(1.0 / kdim as f64));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kdim + 1);
    let mut steps = 0usize;

    while t_now < t {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::KrylovNonConvergence(format!(
                "{} steps reached t = {t_now} of {t}",
                opts.max_steps
            )));
        }
        let mut t_step = (t - t_now).min(t_new);
        basis.clear();
        basis.push(w.iter().map(|a| a / beta).collect());
        let mut hess = DMatrix::<f64>::zeros(kdim + 2, kdim + 2);
        let mut breakdown = false;
        let mut mb = kdim;
        let mut p = vec![0.0; n];
        for j in 0..kdim {
            m.par_matvec_into(&basis[j], &mut p);
            p.iter_mut().for_each(|a| *a = -*a);
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let hij = dot(vi, &p);
                    hess[(i, j)] += hij;
                    axpy(-hij, vi, &mut p);
                }
            }
            let s = norm2(&p);
            if s < btol {
                breakdown = true;
                mb = j + 1;
                t_step = t - t_now;
                break;
            }
            hess[(j + 1, j)] = s;
            basis.push(p.iter().map(|a| a / s).collect());
        }
        let mut avnorm = 0.0;
        if !breakdown {
            hess[(kdim + 1, kdim)] = 1.0;
            m.par_matvec_into(&basis[kdim], &mut p);
            avnorm = norm2(&p);
        }
        let mut rejects = 0;
        let (f, err_loc, xm) = loop {
            let mx = if breakdown { mb } else { kdim + 2 };
            let sub = hess.view((0, 0), (mx, mx)) * (-t_step);
            // dense_propagator(X, 1) = e^{−X}
            let f = dense_propagator(&sub.into_owned(), 1.0)?;
            if breakdown {
                break (f, btol, 1.0 / kdim as f64);
            }
            let phi1 = (beta * f[(kdim, 0)]).abs();
            let phi2 = (beta * f[(kdim + 1, 0)] * avnorm).abs();
            let (err, xm) = if phi1 > 10.0 * phi2 {
                (phi2, 1.0 / kdim as f64)
            } else if phi1 > phi2 {
                (phi1 * phi2 / (phi1 - phi2), 1.0 / kdim as f64)
            } else {
                (phi1, 1.0 / (kdim as f64 - 1.0))
            };
            if err <= delta * t_step * tol {
                break (f, err, xm);
            }
            rejects += 1;
            if rejects > max_reject {
                return Err(Error::KrylovNonConvergence(format!(
                    "step rejected {max_reject} times at t = {t_now}"
                )));
            }
            t_step = round_step(gamma * t_step * (t_step * tol / err).powf(xm));
        };
        let mx = if breakdown { mb } else { kdim + 1 };
        w.iter_mut().for_each(|a| *a = 0.0);
        for (i, vi) in basis.iter().take(mx).enumerate() {
            axpy(beta * f[(i, 0)], vi, &mut w);
        }
        beta = norm2(&w);
        t_now += t_step;
        if beta == 0.0 {
            break;
        }
        t_new = round_step(gamma * t_step * (t_step * tol / err_loc.max(f64::MIN_POSITIVE)).powf(xm));
    }
    Ok(w)
}

/// `e^{−Ht} = e^{−Λt} Σ_n (Λt)^n/n! Pⁿ` with `P = 1 − H/Λ ≥ 0`.
///
/// Valid whenever the off-diagonal entries of `−H` are nonnegative. The
/// truncation bound uses `ρ = ‖P‖₁`, which is 1 for stochastic generators.
fn uniformization_action(m: &SparseMatrix<f64>, x: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    let n = x.len();
    for (r, c, v) in m.triplets() {
        if r != c && *v > 0.0 {
            return Err(Error::InvalidParameter(
                "uniformization needs nonnegative off-diagonal rates in -H".into(),
            ));
        }
    }
    let diag = m.diagonal();
    let lambda = diag.iter().cloned().fold(0.0, f64::max);
    if lambda == 0.0 {
        // H has no positive diagonal, hence (with nonpositive off-diagonal) H = 0.
        return Ok(x.to_vec());
    }
    // P = 1 − H/Λ
    let mut trip: Vec<(usize, usize, f64)> = m.triplets().map(|(r, c, v)| (r, c, -v / lambda)).collect();
    trip.extend((0..n).map(|i| (i, i, 1.0)));
    let p = SparseMatrix::from_triplets(n, n, trip)?;
    let rho = p.norm_one().max(1.0);
    let steps = (lambda * t * rho / UNIFORM_MAX_STEP).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mu = lambda * dt;
    let step_tol = tol * norm2(x) / steps as f64;
    let mut cur = x.to_vec();
    let mut term = vec![0.0; n];
    for _ in 0..steps {
        let normv: f64 = cur.iter().map(|a| a.abs()).sum();
        let mut weight = (-mu).exp();
        let mut acc: Vec<f64> = cur.iter().map(|a| weight * a).collect();
        let mut pow = cur.clone();
        let mut growth = normv;
        // Remaining mass bound: Σ_{k>j} e^{−μ}(ρμ)^k/k! ‖v‖₁ ≤ tail.
        let mut tail_weight = 1.0 - weight;
        let mut k = 0usize;
        loop {
            k += 1;
            p.par_matvec_into(&pow, &mut term);
            std::mem::swap(&mut pow, &mut term);
            weight *= mu / k as f64;
            axpy(weight, &pow, &mut acc);
            growth *= rho;
            tail_weight -= weight;
            let bound = if rho > 1.0 {
                // Crude geometric bound once the Poisson terms decay.
                let ratio = rho * mu / (k as f64 + 1.0);
                if ratio < 0.5 {
                    weight * growth * ratio / (1.0 - ratio)
                } else {
                    f64::INFINITY
                }
            } else {
                tail_weight.max(0.0) * growth
            };
            if bound <= step_tol || k > 10_000 {
                break;
            }
        }
        cur = acc;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::GeneratorSpec;
    use crate::statespace::Space;

    fn sector_generator(l: usize, n: usize, q: f64, alpha: f64, beta: f64) -> TensorOperator<f64> {
        GeneratorSpec::periodic(l, q, alpha, beta)
            .build(Space::sector(l, n).unwrap())
            .unwrap()
    }

    #[test]
    fn dense_matches_library_exponential() {
        let h = sector_generator(6, 3, 1.6, 1.2, 0.7);
        let d = h.to_dense();
        for t in [0.0, 0.3, 2.5] {
            let ours = dense_propagator(&d, t).unwrap();
            let lib = (&d * (-t)).exp();
            let err = (&ours - &lib).amax();
            assert!(err < 1e-12 * lib.amax().max(1.0), "t={t} err={err}");
        }
    }

    #[test]
    fn two_state_closed_form() {
        // L=2, K=1: H = d − [[0, b], [a, 0]] with d = q + 1/q, a = α + 1/(αβ)
        // (1 → 2) and b = 1/α + αβ (2 → 1), so e^{−Ht}|1⟩ has
        // components e^{−dt} cosh(ωt) and e^{−dt} (a/ω) sinh(ωt), ω = √(ab).
        let (q, alpha, beta, t) = (1.5f64, 1.2f64, 0.8f64, 0.45f64);
        let h = sector_generator(2, 1, q, alpha, beta);
        let d = q + 1.0 / q;
        let a = alpha + 1.0 / (alpha * beta);
        let b = 1.0 / alpha + alpha * beta;
        let w = (a * b).sqrt();
        let stay = (-d * t).exp() * (w * t).cosh();
        let go = (-d * t).exp() * a / w * (w * t).sinh();
        let v = StateVector::basis(h.domain(), &"10".parse().unwrap()).unwrap();
        for method in [Method::Dense, Method::Krylov, Method::Uniformization] {
            let out = expm_action(&h, &v, t, &ExpmOptions::default().with_method(method)).unwrap();
            assert!((out.get(0b01) - stay).abs() < 1e-12, "{method}");
            assert!((out.get(0b10) - go).abs() < 1e-12, "{method}");
        }
    }

    #[test]
    fn zero_time_returns_input() {
        let h = sector_generator(5, 2, 1.3, 1.3, 1.0);
        let v = StateVector::from_fn(h.domain(), |b| Ok(b as f64)).unwrap();
        for method in [Method::Dense, Method::Krylov, Method::Uniformization] {
            let out = expm_action(&h, &v, 0.0, &ExpmOptions::default().with_method(method)).unwrap();
            assert_eq!(out, v);
        }
        assert!(expm_action(&h, &v, -1.0, &ExpmOptions::default()).is_err());
    }

    #[test]
    fn methods_agree_on_weighted_generator() {
        let h = sector_generator(8, 3, 1.5, 0.9, 2.0);
        let v = StateVector::from_fn(h.domain(), |b| Ok(1.0 + (b % 7) as f64)).unwrap();
        let t = 0.8;
        let oracle = expm_action(&h, &v, t, &ExpmOptions::default().with_method(Method::Dense)).unwrap();
        let scale = oracle.norm2();
        for method in [Method::Krylov, Method::Uniformization] {
            let out = expm_action(&h, &v, t, &ExpmOptions::default().with_method(method)).unwrap();
            let err = out.sub(&oracle).unwrap().norm2();
            assert!(err <= 1e-12 * scale, "{method}: {err}");
        }
    }

    #[test]
    fn stochastic_evolution_conserves_probability() {
        let h = sector_generator(7, 3, 1.4, 1.4, 1.0);
        let v = StateVector::basis(h.domain(), &"1101000".parse().unwrap()).unwrap();
        for method in [Method::Dense, Method::Krylov, Method::Uniformization] {
            let out = expm_action(&h, &v, 3.0, &ExpmOptions::default().with_method(method)).unwrap();
            assert!((out.total() - 1.0).abs() < 1e-12, "{method}");
            assert!(out.coeffs().iter().all(|&p| p >= -1e-12), "{method}");
        }
    }

    #[test]
    fn uniformization_rejects_positive_off_diagonal() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(uniformization_action(&m, &[1.0, 0.0], 1.0, 1e-12).is_err());
    }
}
