//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Eigenvalues come back sorted in descending order. Eigenvectors are only
//! defined up to sign, so every decomposition is normalised so that the entry
//! of largest magnitude in each column is positive (lowest index wins a tie).
//! When two decompositions have to be compared entry by entry, use
//! [`align_signs`] against a common reference instead.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
/// Adjacent eigenvalues closer than this fraction of the trace count as tied.
pub const DEFAULT_GAP_TOLERANCE: f64 = 1e-8;

/// Relative slack under which two column entries are considered equally large
/// when picking the sign-defining entry.
const SIGN_TIE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Matrix,
    source_trace: f64,
}

impl EigenDecomposition {
    /// Assembles a decomposition from parts, sorting into descending order and
    /// applying the sign convention. Used for population quantities that are
    /// known in closed form.
    pub fn from_parts(values: Vec<f64>, vectors: Matrix) -> Result<Self> {
        let p = values.len();
        if vectors.rows() != p || vectors.cols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: vectors.cols(),
            });
        }
        let source_trace = values.iter().sum();
        let mut d = Self {
            values,
            vectors,
            source_trace,
        };
        d.sort_descending();
        d.apply_sign_convention();
        Ok(d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `k` holds the eigenvector of `values()[k]`.
    #[inline]
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// Loadings with one principal component per row.
    pub fn loadings(&self) -> Matrix {
        self.vectors.transpose()
    }

    #[inline]
    pub fn source_trace(&self) -> f64 {
        self.source_trace
    }

    /// `V·diag(values)·Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let p = self.dim();
        Matrix::from_fn(p, p, |i, j| {
            (0..p)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                .sum()
        })
    }

    /// Smallest gap between adjacent eigenvalues, with its upper index.
    pub fn min_gap(&self) -> Option<(usize, f64)> {
        self.values
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k, w[0] - w[1]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// First adjacent pair whose gap is below `rel_tol·trace`, if any.
    pub fn near_tie(&self, rel_tol: f64) -> Option<(usize, f64)> {
        let threshold = rel_tol * self.source_trace.abs();
        self.values
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k, w[0] - w[1]))
            .find(|&(_, gap)| gap <= threshold)
    }

    /// Warning state for the default tie tolerance.
    pub fn has_near_ties(&self) -> bool {
        self.near_tie(DEFAULT_GAP_TOLERANCE).is_some()
    }

    /// Refuses tied or non-positive spectra, which the asymptotic covariance
    /// formulas cannot handle (they divide by eigenvalue gaps).
    pub fn check_nondegenerate(&self, rel_tol: f64) -> Result<()> {
        let threshold = rel_tol * self.source_trace.abs();
        if let Some((index, gap)) = self.near_tie(rel_tol) {
            return Err(Error::DegenerateEigenvalues {
                index,
                gap,
                threshold,
            });
        }
        let last = self.dim() - 1;
        if self.values[last] <= threshold {
            return Err(Error::NonPositiveEigenvalue {
                index: last,
                value: self.values[last],
            });
        }
        Ok(())
    }

    /// Negates columns so the largest-magnitude entry is positive.
    pub fn apply_sign_convention(&mut self) {
        let p = self.dim();
        for k in 0..p {
            let max = (0..p).fold(0.0f64, |m, i| m.max(self.vectors[(i, k)].abs()));
            let cutoff = max * (1.0 - SIGN_TIE_SLACK);
            let lead = (0..p)
                .find(|&i| self.vectors[(i, k)].abs() >= cutoff)
                .unwrap_or(0);
            if self.vectors[(lead, k)] < 0.0 {
                self.negate_column(k);
            }
        }
    }

    fn negate_column(&mut self, k: usize) {
        for i in 0..self.dim() {
            self.vectors[(i, k)] = -self.vectors[(i, k)];
        }
    }

    fn sort_descending(&mut self) {
        let p = self.dim();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        let values = order.iter().map(|&k| self.values[k]).collect();
        let vectors = Matrix::from_fn(p, p, |i, j| self.vectors[(i, order[j])]);
        self.values = values;
        self.vectors = vectors;
    }
}

/// Eigendecomposition of a symmetric matrix.
pub fn eigendecompose(m: &Matrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOLERANCE * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let (values, vectors) = jacobi(&m.symmetrized())?;
    let mut d = EigenDecomposition {
        values,
        vectors,
        source_trace: m.trace(),
    };
    d.sort_descending();
    d.apply_sign_convention();
    Ok(d)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

fn jacobi(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let tol = OFF_DIAGONAL_TOLERANCE * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                if t == 0.0 {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t);
            }
        }
    }
    Ok((a.diagonal(), v))
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Flips the sign of column `k` whenever it points away from `reference`'s
/// column `k`. Eigenvalues are untouched.
pub fn align_signs(decomp: &EigenDecomposition, reference: &Matrix) -> Result<EigenDecomposition> {
    let p = decomp.dim();
    if reference.rows() != p || reference.cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: reference.cols(),
        });
    }
    let mut out = decomp.clone();
    for k in 0..p {
        let dot: f64 = (0..p).map(|i| decomp.vectors[(i, k)] * reference[(i, k)]).sum();
        if dot < 0.0 {
            out.negate_column(k);
        }
    }
    Ok(out)
}

/// Cumulative share of the total variance, `r_k = Σ_{i≤k} l_i / Σ_i l_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionOfVariation {
    r: Vec<f64>,
}

impl ProportionOfVariation {
    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn get(&self, k: usize) -> f64 {
        self.r[k]
    }
}

pub fn proportion_of_variation(values: &[f64]) -> Result<ProportionOfVariation> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty eigenvalue list"));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveEigenvalue { index, value });
    }
    let mut partial = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for v in values {
        acc += v;
        partial.push(acc);
    }
    let total = acc;
    // The last partial sum is the total itself, so r_p is exactly one.
    Ok(ProportionOfVariation {
        r: partial.into_iter().map(|s| s / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
        let m = Matrix::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
        m.add(&m.transpose()).unwrap()
    }

    /// Orthonormal matrix from Gram-Schmidt on random columns.
    fn random_orthonormal(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < p {
            let mut v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= dot * y;
                }
            }
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
            if norm > 1e-3 {
                cols.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        Matrix::from_fn(p, p, |i, j| cols[j][i])
    }

    #[test]
    fn diagonal_input() {
        let d = eigendecompose(&Matrix::from_diagonal(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(d.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(
            d.vectors().as_slice(),
            Matrix::from_rows(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
                .unwrap()
                .as_slice()
        );
        let d = eigendecompose(&Matrix::from_diagonal(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(d.vectors(), &Matrix::identity(3));
    }

    #[test]
    fn two_by_two_hand_solution() {
        // Characteristic polynomial x² − (4/3)x + 1/3 has roots 1 and 1/3.
        let m = Matrix::from_rows(&[[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let d = eigendecompose(&m).unwrap();
        assert!((d.values()[0] - 1.0).abs() < 1e-14);
        assert!((d.values()[1] - 1.0 / 3.0).abs() < 1e-14);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let v = d.vectors();
        assert!((v[(0, 0)] - h).abs() < 1e-14 && (v[(1, 0)] - h).abs() < 1e-14);
        assert!((v[(0, 1)] - h).abs() < 1e-14 && (v[(1, 1)] + h).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[[1.0, 0.5], [0.4, 1.0]]).unwrap();
        assert!(matches!(eigendecompose(&m), Err(Error::NotSymmetric { .. })));
        let r = Matrix::zeros(2, 3);
        assert!(matches!(eigendecompose(&r), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn random_symmetric_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let p = rng.gen_range(2..=10);
            let m = random_symmetric(&mut rng, p);
            let d = eigendecompose(&m).unwrap();
            assert!(d.values().windows(2).all(|w| w[0] >= w[1]));
            assert!(d.vectors().orthonormality_error() < 1e-8);
            let err = d.reconstruct().sub(&m).unwrap().max_abs();
            assert!(err < 1e-8 * m.max_abs());

            let mut again = d.clone();
            again.apply_sign_convention();
            assert_eq!(again, d);
        }
    }

    #[test]
    fn recovers_constructed_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = rng.gen_range(2..=8);
            let q = random_orthonormal(&mut rng, p);
            let mut v: Vec<f64> = (0..p).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let m = Matrix::from_fn(p, p, |i, j| (0..p).map(|k| q[(i, k)] * v[k] * q[(j, k)]).sum());
            let d = eigendecompose(&m.symmetrized()).unwrap();
            v.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in d.values().iter().zip(&v) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sign_convention_max_abs_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = eigendecompose(&random_symmetric(&mut rng, 6)).unwrap();
        for k in 0..6 {
            let col = d.vector(k);
            let lead = col
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn align_signs_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = eigendecompose(&random_symmetric(&mut rng, 4)).unwrap();
        assert_eq!(align_signs(&d, d.vectors()).unwrap(), d);
        let flipped = align_signs(&d, &d.vectors().scale(-1.0)).unwrap();
        assert_eq!(flipped.vectors(), &d.vectors().scale(-1.0));
        assert_eq!(flipped.values(), d.values());

        let other = eigendecompose(&random_symmetric(&mut rng, 4)).unwrap();
        let aligned = align_signs(&other, d.vectors()).unwrap();
        for k in 0..4 {
            let dot: f64 = aligned.vector(k).iter().zip(d.vector(k)).map(|(a, b)| a * b).sum();
            assert!(dot >= 0.0);
        }
    }

    #[test]
    fn degeneracy_guard() {
        let tied = eigendecompose(&Matrix::identity(3).scale(10.0)).unwrap();
        assert!(tied.has_near_ties());
        assert!(matches!(
            tied.check_nondegenerate(DEFAULT_GAP_TOLERANCE),
            Err(Error::DegenerateEigenvalues { index: 0, .. })
        ));
        let ok = eigendecompose(&Matrix::from_diagonal(&[3.0, 2.0, 1.0])).unwrap();
        assert!(ok.check_nondegenerate(DEFAULT_GAP_TOLERANCE).is_ok());
        assert_eq!(ok.min_gap(), Some((0, 1.0)));
        let zero = eigendecompose(&Matrix::zeros(1, 1)).unwrap();
        assert!(zero.check_nondegenerate(DEFAULT_GAP_TOLERANCE).is_err());
    }

    #[test]
    fn proportion_examples() {
        let r = proportion_of_variation(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.values(), &[0.5, 5.0 / 6.0, 1.0]);
        assert_eq!(proportion_of_variation(&[4.2]).unwrap().values(), &[1.0]);
        assert!(matches!(
            proportion_of_variation(&[2.0, 0.0]),
            Err(Error::NonPositiveEigenvalue { index: 1, .. })
        ));
    }

    #[test]
    fn proportion_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..7).map(|_| rng.gen_range(0.01..10.0)).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            let c = rng.gen_range(0.001..1000.0);
            let r1 = proportion_of_variation(&v).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let r2 = proportion_of_variation(&scaled).unwrap();
            for (a, b) in r1.values().iter().zip(r2.values()) {
                assert!((a - b).abs() < 1e-14);
            }
            assert_eq!(*r1.values().last().unwrap(), 1.0);
            assert!(r1.values().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
