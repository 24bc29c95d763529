//! Dense complex linear algebra for small MIMO channels.
//!
//! QR uses complex Householder reflections with the phase of every `R`
//! diagonal entry rotated onto the non-negative real axis, so a given `H`
//! always produces the same `(Q, R)`. Condition numbers come from a one-sided
//! (Hestenes) Jacobi SVD, which is exact to working precision at the sizes
//! used here (up to 8×8).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

/// Diagonal entries of `R` below this fraction of the largest column norm of
/// `H` are treated as rank deficiency.
pub const SINGULAR_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !data.iter().all(|z| z.is_finite()) {
            return Err(Error::contract("matrix entries must be finite"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::contract("ragged rows"));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != x.len() {
            return Err(Error::contract(format!(
                "cannot apply {}x{} matrix to length-{} vector",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(ComplexVector(self.mul_slice(x.as_slice())))
    }

    /// `self · x` without shape checks beyond a debug assertion.
    pub(crate) fn mul_slice(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `H·P`: column `k` of the result is column `p[k]` of `self`.
    pub fn permute_columns(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.cols {
            return Err(Error::contract(format!(
                "permutation of length {} applied to {} columns",
                p.len(),
                self.cols
            )));
        }
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (k, &src) in p.as_slice().iter().enumerate() {
                out[(i, k)] = self[(i, src)];
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks_exact(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::contract("vector must be non-empty"));
        }
        if !entries.iter().all(|z| z.is_finite()) {
            return Err(Error::contract("vector entries must be finite"));
        }
        Ok(ComplexVector(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// `‖y − H x‖²` computed directly in the channel domain.
pub fn residual_norm_sqr(y: &[Complex64], h: &ComplexMatrix, x: &[Complex64]) -> f64 {
    debug_assert_eq!(y.len(), h.rows());
    debug_assert_eq!(x.len(), h.cols());
    h.as_slice()
        .chunks_exact(h.cols())
        .zip(y)
        .map(|(row, &yi)| {
            let hx: Complex64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            (yi - hx).norm_sqr()
        })
        .sum()
}

/// Column ordering for `H·P`, stored 0-based: position `k` holds source
/// column `order[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::contract(format!("{order:?} is not a permutation")));
            }
        }
        if order.is_empty() {
            return Err(Error::contract("empty permutation"));
        }
        Ok(Permutation(order))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Full QR factors: `Q` is `rows × rows` unitary, `R` is `rows × cols` upper
/// triangular with a real non-negative diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Householder QR of `H·P`.
///
/// Returns [`Error::SingularChannel`] if any `r_kk` is below
/// [`SINGULAR_TOL`] times the largest column norm of `H`.
pub fn qr_decompose(h: &ComplexMatrix, p: &Permutation) -> Result<QrFactors> {
    if h.rows < h.cols {
        return Err(Error::contract(format!(
            "QR needs rows >= cols, got {}x{}",
            h.rows, h.cols
        )));
    }
    let mut a = h.permute_columns(p)?;
    let (m, n) = (a.rows, a.cols);
    let mut q = ComplexMatrix::identity(m);
    let mut v = vec![Complex64::new(0.0, 0.0); m];

    for k in 0..n {
        let norm = (k..m).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let len = m - k;
        for l in 0..len {
            v[l] = a[(k + l, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(Complex64::norm_sqr).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // A ← (I − τ v vᴴ) A on rows k.., columns k..
        for j in k..n {
            let s: Complex64 = (0..len).map(|l| v[l].conj() * a[(k + l, j)]).sum();
            let s = s * tau;
            for l in 0..len {
                a[(k + l, j)] -= s * v[l];
            }
        }
        // Q ← Q (I − τ v vᴴ)
        for i in 0..m {
            let t: Complex64 = (0..len).map(|l| q[(i, k + l)] * v[l]).sum();
            let t = t * tau;
            for l in 0..len {
                q[(i, k + l)] -= t * v[l].conj();
            }
        }
        a[(k, k)] = alpha;
        for i in k + 1..m {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }

    // Rotate each diagonal onto the non-negative real axis.
    for k in 0..n {
        let d = a[(k, k)];
        let mag = d.norm();
        if mag > 0.0 {
            let ph = d / mag;
            for j in k..n {
                a[(k, j)] *= ph.conj();
            }
            for i in 0..m {
                q[(i, k)] *= ph;
            }
        }
        a[(k, k)] = Complex64::new(mag, 0.0);
    }

    let max_col = (0..h.cols).map(|j| h.column_norm(j)).fold(0.0, f64::max);
    let threshold = SINGULAR_TOL * max_col;
    for k in 0..n {
        let value = a[(k, k)].re;
        if !(value >= threshold) || value == 0.0 {
            return Err(Error::SingularChannel {
                column: k,
                value,
                threshold,
            });
        }
    }

    Ok(QrFactors { q, r: a })
}

/// `Qᴴ y`.
pub fn apply_unitary_adjoint(q: &ComplexMatrix, y: &ComplexVector) -> Result<ComplexVector> {
    if q.rows != y.len() {
        return Err(Error::contract(format!(
            "Q has {} rows but y has length {}",
            q.rows,
            y.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); q.cols];
    for (i, &yi) in y.as_slice().iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += q[(i, j)].conj() * yi;
        }
    }
    Ok(ComplexVector(out))
}

/// Singular values of `H` (rows ≥ cols) sorted in descending order.
pub fn singular_values(h: &ComplexMatrix) -> Vec<f64> {
    let (m, n) = (h.rows, h.cols);
    // Work on columns stored contiguously.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| h.column(j)).collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(Complex64::norm_sqr).sum();
                let beta: f64 = cols[j].iter().map(Complex64::norm_sqr).sum();
                let gamma: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rephase column j so the cross term is real, then apply a
                // real Jacobi rotation. Column phases do not move singular values.
                let ph = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let ai = cols[i][k];
                    let aj = cols[j][k] * ph;
                    cols[i][k] = ai * c - aj * s;
                    cols[j][k] = ai * s + aj * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number `σ_max / σ_min`; `+∞` when `σ_min = 0`.
pub fn condition_number(h: &ComplexMatrix) -> f64 {
    if h.rows < h.cols {
        return f64::INFINITY;
    }
    let sv = singular_values(h);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min == 0.0 {
        f64::INFINITY
    } else {
        (max / min).max(1.0)
    }
}

/// Cheap upper bound `‖H‖_F·‖H⁺‖_F ≥ σ_max/σ_min`, from a Cholesky factor
/// of `HᴴH`. Returns `+∞` when the Gram matrix is not numerically positive
/// definite.
pub fn condition_number_upper_bound(h: &ComplexMatrix) -> f64 {
    let n = h.cols;
    if h.rows < n || n > 8 {
        return f64::INFINITY;
    }
    let mut g = [[Complex64::new(0.0, 0.0); 8]; 8];
    let mut frob = 0.0;
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h.rows {
                acc += h[(r, i)].conj() * h[(r, j)];
            }
            g[i][j] = acc;
            g[j][i] = acc.conj();
        }
        frob += g[i][i].re;
    }
    // G = L Lᴴ, in place in the lower triangle.
    for j in 0..n {
        let mut d = g[j][j].re;
        for k in 0..j {
            d -= g[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return f64::INFINITY;
        }
        let d = d.sqrt();
        g[j][j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut v = g[i][j];
            for k in 0..j {
                v -= g[i][k] * g[j][k].conj();
            }
            g[i][j] = v / d;
        }
    }
    // trace(G⁻¹) = ‖L⁻¹‖_F², by forward substitution on each unit vector.
    let mut inv_frob = 0.0;
    let mut col = [Complex64::new(0.0, 0.0); 8];
    for e in 0..n {
        for i in 0..n {
            let mut v = if i == e { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for k in e..i {
                v -= g[i][k] * col[k];
            }
            col[i] = v / g[i][i].re;
            inv_frob += col[i].norm_sqr();
        }
    }
    (frob * inv_frob).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Small LCG so unit tests do not depend on the channel module.
    fn pseudo_random_matrix(rows: usize, cols: usize, mut state: u64) -> ComplexMatrix {
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let data = (0..rows * cols).map(|_| c(next(), next())).collect();
        ComplexMatrix::from_row_major(rows, cols, data).unwrap()
    }

    fn assert_qr_contract(h: &ComplexMatrix, p: &Permutation) {
        let QrFactors { q, r } = qr_decompose(h, p).unwrap();
        let qhq = q.adjoint().matmul(&q).unwrap();
        assert!(qhq.max_abs_diff(&ComplexMatrix::identity(q.rows())) < 1e-10);
        let hp = h.permute_columns(p).unwrap();
        assert!(q.matmul(&r).unwrap().max_abs_diff(&hp) < 1e-10);
        for i in 0..r.rows() {
            for j in 0..r.cols().min(i) {
                assert_eq!(r[(i, j)], c(0.0, 0.0), "R[{i}][{j}] not zero");
            }
            if i < r.cols() {
                assert_eq!(r[(i, i)].im, 0.0);
                assert!(r[(i, i)].re >= 0.0);
            }
        }
    }

    #[test]
    fn identity_qr() {
        let h = ComplexMatrix::identity(3);
        let QrFactors { q, r } = qr_decompose(&h, &Permutation::identity(3)).unwrap();
        assert!(q.max_abs_diff(&h) < 1e-15);
        assert!(r.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn swap_matrix_qr() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let QrFactors { q, r } = qr_decompose(&h, &Permutation::identity(2)).unwrap();
        assert!((r[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((r[(1, 1)].re - 1.0).abs() < 1e-15);
        // Q is a signed permutation.
        for z in q.as_slice() {
            let m = z.norm();
            assert!(m < 1e-15 || (m - 1.0).abs() < 1e-15);
        }
        assert_qr_contract(&h, &Permutation::identity(2));
    }

    #[test]
    fn random_qr_reconstructs() {
        for seed in 0..20 {
            let h = pseudo_random_matrix(4, 4, seed);
            assert_qr_contract(&h, &Permutation::identity(4));
            assert_qr_contract(&h, &Permutation::new(vec![2, 0, 3, 1]).unwrap());
        }
        for (rows, cols) in [(6, 3), (8, 8), (5, 1)] {
            let h = pseudo_random_matrix(rows, cols, 99);
            assert_qr_contract(&h, &Permutation::identity(cols));
        }
    }

    #[test]
    fn rank_deficient_is_singular() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let err = qr_decompose(&h, &Permutation::identity(2)).unwrap_err();
        assert!(matches!(err, Error::SingularChannel { column: 1, .. }));
    }

    #[test]
    fn wide_matrix_rejected() {
        let h = pseudo_random_matrix(2, 3, 1);
        assert!(matches!(
            qr_decompose(&h, &Permutation::identity(3)),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn adjoint_application() {
        let y = ComplexVector::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0)]).unwrap();
        let same = apply_unitary_adjoint(&ComplexMatrix::identity(3), &y).unwrap();
        assert_eq!(same, y);

        let h = pseudo_random_matrix(3, 3, 7);
        let q = qr_decompose(&h, &Permutation::identity(3)).unwrap().q;
        let qy = apply_unitary_adjoint(&q, &y).unwrap();
        assert!((qy.norm() - y.norm()).abs() <= 1e-10 * y.norm());

        // Noise-free: Qᴴ H x = R Pᵀ x.
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let QrFactors { q, r: rp } = qr_decompose(&h, &p).unwrap();
        let x = ComplexVector::new(vec![c(0.5, -0.5), c(1.5, 0.5), c(-0.5, -1.5)]).unwrap();
        let hx = h.mul_vec(&x).unwrap();
        let yt = apply_unitary_adjoint(&q, &hx).unwrap();
        let xp = ComplexVector::new(p.as_slice().iter().map(|&i| x[i]).collect()).unwrap();
        let rx = rp.mul_vec(&xp).unwrap();
        for i in 0..3 {
            assert!((yt[i] - rx[i]).norm() < 1e-9);
        }

        let bad = ComplexVector::new(vec![c(1.0, 0.0)]).unwrap();
        assert!(apply_unitary_adjoint(&q, &bad).is_err());
    }

    #[test]
    fn condition_numbers() {
        assert!((condition_number(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-15);
        let d = ComplexMatrix::diagonal(&[c(10.0, 0.0), c(1.0, 0.0)]);
        assert!((condition_number(&d) - 10.0).abs() < 1e-12);
        let d = ComplexMatrix::diagonal(&[c(0.0, 3.0), c(-1.5, 0.0)]);
        assert!((condition_number(&d) - 2.0).abs() < 1e-12);
        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(condition_number(&singular) > 1e12);
        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(condition_number(&zero), f64::INFINITY);
    }

    #[test]
    fn upper_bound_dominates_condition_number() {
        for seed in 0..200 {
            let (r, c) = [(2, 2), (4, 4), (6, 3), (8, 8)][seed as usize % 4];
            let h = pseudo_random_matrix(r, c, seed);
            let k = condition_number(&h);
            let b = condition_number_upper_bound(&h);
            assert!(b >= k * (1.0 - 1e-12), "{b} < {k}");
            assert!(b <= k * (c as f64) * 1.0001);
        }
        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(condition_number_upper_bound(&singular), f64::INFINITY);
    }

    #[test]
    fn condition_number_unitary_and_scale_invariant() {
        let h = pseudo_random_matrix(4, 4, 3);
        let u = qr_decompose(&pseudo_random_matrix(4, 4, 11), &Permutation::identity(4))
            .unwrap()
            .q;
        let k = condition_number(&h);
        let k2 = condition_number(&u.matmul(&h).unwrap().scale(c(-2.5, 0.7)));
        assert!((k - k2).abs() <= 1e-8 * k);
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 0]).is_ok());
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert!(ComplexMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::from_row_major(1, 2, vec![c(1.0, 0.0)]).is_err());
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }
}
