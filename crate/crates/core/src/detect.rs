//! Hard-decision detectors: exhaustive ML, ZF-QR decision feedback and the
//! multi-pivot multiple-hypothesis trellis (MP-MHT) detector.
//!
//! # MP-MHT
//!
//! One *pivot run* takes a [`PivotOrdering`] `(o₁, o₂, …, o_N)`, permutes the
//! columns of `H` so that layer `o₁` sits in the last column, `o₂` in the one
//! before it and so on, and factors `HP = QR`. The bottom row of `R` then
//! involves the pivot alone:
//!
//! ```text
//! BM_N(x_N) = |ỹ_N − r_NN·x_N|²         for every x_N in X
//! ```
//!
//! Each pivot hypothesis is extended upward one row at a time by slicing the
//! interference-cancelled observation
//! `x̂_k = slice((ỹ_k − Σ_{j>k} r_kj·x_j) / r_kk)`, which is the argmin of the
//! conditional branch metric `|ỹ_k − Σ_{j≥k} r_kj·x_j|²` because `r_kk` is
//! real and positive. Path metrics accumulate as `PM_k = PM_{k+1} + BM_k`.
//! Every run contributes exactly `|X|` full vectors, so the list size and the
//! work are fixed by `(N_t, |X|, variant)` alone.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::linalg::{apply_unitary_adjoint, qr_decompose, ComplexMatrix, ComplexVector, Permutation};
use crate::modem::Constellation;
use crate::{Error, Result};

/// Largest search space the brute-force oracles will enumerate.
pub const ORACLE_LIMIT: u64 = 1 << 24;

/// Largest transmit dimension for which orderings are generated.
pub const MAX_LAYERS: usize = 8;

/// A full transmit hypothesis; symbols are in natural layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub symbols: Vec<usize>,
    /// Squared Euclidean distance `‖y − Hx‖²`.
    pub metric: f64,
}

impl Candidate {
    /// Total order used for every argmin: metric, then symbol vector.
    pub fn rank_cmp(&self, other: &Candidate) -> Ordering {
        self.metric
            .total_cmp(&other.metric)
            .then_with(|| self.symbols.cmp(&other.symbols))
    }

    pub fn transmit_vector(&self, c: &Constellation) -> Vec<Complex64> {
        self.symbols.iter().map(|&s| c.point(s)).collect()
    }
}

/// Union of pivot-run outputs.
#[derive(Debug, Clone)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
    pub pivot_runs: usize,
    /// Index of the pivot run that produced each entry; empty for lists not
    /// built from pivot runs.
    pub provenance: Vec<usize>,
}

impl CandidateList {
    /// A list assembled from arbitrary candidates (no pivot provenance).
    pub fn from_entries(entries: Vec<Candidate>) -> Self {
        CandidateList {
            entries,
            pivot_runs: 0,
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.entries.iter().min_by(|a, b| a.rank_cmp(b))
    }

    /// Entries sorted ascending by [`Candidate::rank_cmp`].
    pub fn sorted(&self) -> Vec<&Candidate> {
        let mut v: Vec<&Candidate> = self.entries.iter().collect();
        v.sort_by(|a, b| a.rank_cmp(b));
        v
    }
}

/// Layer enumeration order of one pivot run; the first entry is the pivot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PivotOrdering(Vec<usize>);

impl PivotOrdering {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        Permutation::new(order.clone())?;
        Ok(PivotOrdering(order))
    }

    pub fn pivot(&self) -> usize {
        self.0[0]
    }

    pub fn layers(&self) -> &[usize] {
        &self.0
    }

    /// Column permutation that places the pivot last and the remaining
    /// layers, in order, on columns `N−1 … 1`.
    pub fn column_permutation(&self) -> Permutation {
        let n = self.0.len();
        Permutation::new((0..n).map(|pos| self.0[n - 1 - pos]).collect())
            .expect("a pivot ordering is a permutation")
    }
}

impl fmt::Display for PivotOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "x{}", l + 1)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderingVariant {
    /// The `N_t` cyclic shifts of `(1, …, N_t)`.
    Cyclic,
    /// All `N_t!` permutations.
    Full,
}

impl OrderingVariant {
    pub fn run_count(self, n_t: usize) -> usize {
        match self {
            OrderingVariant::Cyclic => n_t,
            OrderingVariant::Full => (1..=n_t).product(),
        }
    }
}

pub fn pivot_orderings(n_t: usize, variant: OrderingVariant) -> Result<Vec<PivotOrdering>> {
    if n_t == 0 || n_t > MAX_LAYERS {
        return Err(Error::contract(format!(
            "pivot orderings need 1 <= n_t <= {MAX_LAYERS}, got {n_t}"
        )));
    }
    let orderings = match variant {
        OrderingVariant::Cyclic => (0..n_t)
            .map(|shift| PivotOrdering((0..n_t).map(|i| (shift + i) % n_t).collect()))
            .collect(),
        OrderingVariant::Full => {
            let mut out = Vec::with_capacity(variant.run_count(n_t));
            let mut perm: Vec<usize> = (0..n_t).collect();
            loop {
                out.push(PivotOrdering(perm.clone()));
                if !next_permutation(&mut perm) {
                    break out;
                }
            }
        }
    };
    Ok(orderings)
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Per-invocation work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComplexityCounter {
    pub branch_metric_evals: u64,
    pub slice_calls: u64,
    pub qr_decompositions: u64,
}

impl ComplexityCounter {
    /// Closed-form counts for one MP-MHT detection: per run, `|X|` pivot
    /// branch metrics plus one slice and one branch metric per hypothesis
    /// and remaining layer.
    pub fn expected(n_t: usize, order: usize, variant: OrderingVariant) -> Self {
        let runs = variant.run_count(n_t) as u64;
        let (n, m) = (n_t as u64, order as u64);
        ComplexityCounter {
            branch_metric_evals: runs * m * n,
            slice_calls: runs * m * (n - 1),
            qr_decompositions: runs,
        }
    }
}

fn check_dims(y: &ComplexVector, h: &ComplexMatrix) -> Result<()> {
    if y.len() != h.rows() {
        return Err(Error::contract(format!(
            "y has length {} but H has {} rows",
            y.len(),
            h.rows()
        )));
    }
    if h.rows() < h.cols() {
        return Err(Error::contract(format!(
            "detection needs n_r >= n_t, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    Ok(())
}

pub(crate) fn check_oracle_guard(order: usize, n_t: usize) -> Result<()> {
    let size = (order as u128).pow(n_t as u32);
    if size > ORACLE_LIMIT as u128 {
        return Err(Error::OracleTooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Calls `visit(symbols, ‖y − Hx‖²)` for every `x ∈ X^{N_t}` in
/// lexicographic order of the symbol vector.
pub(crate) fn enumerate_all(
    y: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
    mut visit: impl FnMut(&[usize], f64),
) -> Result<()> {
    check_dims(y, h)?;
    check_oracle_guard(c.order(), h.cols())?;
    let (n_r, n_t, m) = (h.rows(), h.cols(), c.order());

    // Column contributions h_t · s for every layer and symbol.
    let mut contrib = vec![Complex64::new(0.0, 0.0); n_t * m * n_r];
    for t in 0..n_t {
        for s in 0..m {
            let p = c.point(s);
            for r in 0..n_r {
                contrib[(t * m + s) * n_r + r] = h[(r, t)] * p;
            }
        }
    }

    let y = y.as_slice();
    let mut symbols = vec![0usize; n_t];
    let mut hx = vec![Complex64::new(0.0, 0.0); n_r];
    loop {
        hx.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (t, &s) in symbols.iter().enumerate() {
            let col = &contrib[(t * m + s) * n_r..(t * m + s + 1) * n_r];
            for (acc, v) in hx.iter_mut().zip(col) {
                *acc += v;
            }
        }
        let metric: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
        visit(&symbols, metric);

        // Odometer with the last layer fastest.
        let mut t = n_t;
        loop {
            if t == 0 {
                return Ok(());
            }
            t -= 1;
            symbols[t] += 1;
            if symbols[t] < m {
                break;
            }
            symbols[t] = 0;
        }
    }
}

/// Exhaustive maximum-likelihood detection. Ties resolve to the
/// lexicographically smallest symbol vector.
pub fn detect_ml(y: &ComplexVector, h: &ComplexMatrix, c: &Constellation) -> Result<Candidate> {
    let mut best = Candidate {
        symbols: vec![0; h.cols()],
        metric: f64::INFINITY,
    };
    enumerate_all(y, h, c, |symbols, metric| {
        if metric < best.metric {
            best.metric = metric;
            best.symbols.copy_from_slice(symbols);
        }
    })?;
    Ok(best)
}

/// Triangularised system `ỹ = R x̃` for one column permutation.
struct Triangular {
    r: ComplexMatrix,
    yt: Vec<Complex64>,
    /// `Σ_{i ≥ N_t} |ỹ_i|²`: energy of `y` outside the column space.
    residual: f64,
}

impl Triangular {
    fn new(y: &ComplexVector, h: &ComplexMatrix, p: &Permutation) -> Result<Self> {
        let qr = qr_decompose(h, p)?;
        let yt = apply_unitary_adjoint(&qr.q, y)?.into_inner();
        let residual = yt[h.cols()..].iter().map(Complex64::norm_sqr).sum();
        Ok(Triangular {
            r: qr.r,
            yt,
            residual,
        })
    }

    /// `ỹ_k − Σ_{j>k} r_kj x_j`.
    #[inline]
    fn cancelled(&self, k: usize, x: &[Complex64]) -> Complex64 {
        let n = self.r.cols();
        let mut z = self.yt[k];
        for j in k + 1..n {
            z -= self.r[(k, j)] * x[j];
        }
        z
    }

    /// Back-substitutes rows `top..=0` by slicing, starting from the fixed
    /// symbols already present in `x` above `top`. Returns the added metric.
    fn decide_upward(
        &self,
        c: &Constellation,
        top: usize,
        x: &mut [Complex64],
        idx: &mut [usize],
        counter: &mut ComplexityCounter,
    ) -> f64 {
        let mut pm = 0.0;
        for k in (0..=top).rev() {
            let z = self.cancelled(k, x);
            let rkk = self.r[(k, k)].re;
            let s = c.slice(z / rkk);
            counter.slice_calls += 1;
            idx[k] = s;
            x[k] = c.point(s);
            pm += (z - x[k] * rkk).norm_sqr();
            counter.branch_metric_evals += 1;
        }
        pm
    }
}

/// QR decision feedback with the natural column order: slice layer `N_t`
/// first, cancel it, and continue upward.
pub fn detect_zf_qr(y: &ComplexVector, h: &ComplexMatrix, c: &Constellation) -> Result<Candidate> {
    check_dims(y, h)?;
    let n = h.cols();
    let tri = Triangular::new(y, h, &Permutation::identity(n))?;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut symbols = vec![0; n];
    let mut counter = ComplexityCounter::default();
    let pm = tri.decide_upward(c, n - 1, &mut x, &mut symbols, &mut counter);
    Ok(Candidate {
        symbols,
        metric: pm + tri.residual,
    })
}

/// One pivot run: `|X|` candidates, one per pivot hypothesis in symbol-index
/// order.
pub fn run_pivot(
    y: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
    ordering: &PivotOrdering,
    counter: &mut ComplexityCounter,
) -> Result<Vec<Candidate>> {
    check_dims(y, h)?;
    let n = h.cols();
    if ordering.layers().len() != n {
        return Err(Error::contract(format!(
            "ordering over {} layers for a {n}-layer channel",
            ordering.layers().len()
        )));
    }
    let perm = ordering.column_permutation();
    let tri = Triangular::new(y, h, &perm)?;
    counter.qr_decompositions += 1;

    let last = n - 1;
    let r_last = tri.r[(last, last)].re;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut idx = vec![0usize; n];
    let mut out = Vec::with_capacity(c.order());
    for s in 0..c.order() {
        x[last] = c.point(s);
        idx[last] = s;
        let mut pm = (tri.yt[last] - x[last] * r_last).norm_sqr();
        counter.branch_metric_evals += 1;
        if last > 0 {
            pm += tri.decide_upward(c, last - 1, &mut x, &mut idx, counter);
        }
        let mut symbols = vec![0; n];
        for (pos, &layer) in perm.as_slice().iter().enumerate() {
            symbols[layer] = idx[pos];
        }
        out.push(Candidate {
            symbols,
            metric: pm + tri.residual,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MpmhtOutput {
    pub hard: Candidate,
    pub list: CandidateList,
    pub counter: ComplexityCounter,
}

/// MP-MHT detection over the orderings of `variant`.
pub fn detect_mpmht(
    y: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
    variant: OrderingVariant,
) -> Result<MpmhtOutput> {
    let orderings = pivot_orderings(h.cols(), variant)?;
    detect_mpmht_with(y, h, c, &orderings)
}

/// MP-MHT detection over an explicit set of orderings.
pub fn detect_mpmht_with(
    y: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
    orderings: &[PivotOrdering],
) -> Result<MpmhtOutput> {
    if orderings.is_empty() {
        return Err(Error::contract("at least one pivot ordering is required"));
    }
    let mut counter = ComplexityCounter::default();
    let mut entries = Vec::with_capacity(orderings.len() * c.order());
    let mut provenance = Vec::with_capacity(entries.capacity());
    for (run, ord) in orderings.iter().enumerate() {
        let cands = run_pivot(y, h, c, ord, &mut counter)?;
        provenance.extend(std::iter::repeat_n(run, cands.len()));
        entries.extend(cands);
    }
    let list = CandidateList {
        entries,
        pivot_runs: orderings.len(),
        provenance,
    };
    let hard = list.best().expect("non-empty list").clone();
    Ok(MpmhtOutput {
        hard,
        list,
        counter,
    })
}
