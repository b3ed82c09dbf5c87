//! Kernel functions behind a counting oracle.
//!
//! Every solver in this crate touches the kernel only through
//! [`KernelOracle`], so the number of kernel evaluations a run consumes is
//! read straight off the oracle's counter. Self-norms are computed once when
//! an example is built and are never charged.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows at least this long are computed on the rayon pool.
const PAR_ROW_THRESHOLD: usize = 2048;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// The label as `-1.0` or `+1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn from_sign(s: f64) -> Result<Label> {
        if s == 1.0 {
            Ok(Label::Positive)
        } else if s == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(Error::Data(format!("label must be -1 or +1, got {s}")))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => write!(f, "+1"),
            Label::Negative => write!(f, "-1"),
        }
    }
}

/// A labeled sparse feature vector with 0-based, strictly ascending feature ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    indices: Vec<u32>,
    values: Vec<f64>,
    label: Label,
    norm_sq: f64,
}

impl SparseExample {
    /// Builds an example, dropping explicit zeros.
    pub fn new(indices: Vec<u32>, values: Vec<f64>, label: Label) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Data(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "feature ids not strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature value {v}")));
        }
        let (indices, values): (Vec<u32>, Vec<f64>) = indices
            .into_iter()
            .zip(values)
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        let norm_sq = sparse_dot(&indices, &values, &indices, &values);
        Ok(SparseExample {
            indices,
            values,
            label,
            norm_sq,
        })
    }

    /// Builds an example from a dense slice; feature `k` gets id `k`.
    pub fn dense(values: &[f64], label: Label) -> Result<Self> {
        let indices = (0..values.len() as u32).collect();
        Self::new(indices, values.to_vec(), label)
    }

    /// A handle into a precomputed Gram matrix: the single stored value is
    /// `row + 1`.
    pub fn gram_ref(row: usize, label: Label) -> Self {
        Self::new(vec![0], vec![(row + 1) as f64], label).expect("valid gram reference")
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Label {
        self.label
    }

    /// The label as a real number.
    #[inline]
    pub fn y(&self) -> f64 {
        self.label.sign()
    }

    /// Squared Euclidean norm, precomputed at construction.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Value of feature `id` (0 when not stored).
    pub fn get(&self, id: u32) -> f64 {
        match self.indices.binary_search(&id) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// One past the largest feature id, or 0 for the empty vector.
    pub fn dimension(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }

    pub fn with_label(&self, label: Label) -> Self {
        SparseExample {
            label,
            ..self.clone()
        }
    }

    pub fn dot(&self, other: &SparseExample) -> f64 {
        sparse_dot(&self.indices, &self.values, &other.indices, &other.values)
    }

    fn gram_row(&self) -> Option<usize> {
        match (self.indices.as_slice(), self.values.as_slice()) {
            ([0], [v]) if v.fract() == 0.0 && *v >= 1.0 => Some(*v as usize - 1),
            _ => None,
        }
    }
}

/// Inner product of two sparse vectors, summed in ascending feature order.
pub fn sparse_dot(ia: &[u32], va: &[f64], ib: &[u32], vb: &[f64]) -> f64 {
    let (mut p, mut q) = (0, 0);
    let mut acc = 0.0;
    while p < ia.len() && q < ib.len() {
        match ia[p].cmp(&ib[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                acc += va[p] * vb[q];
                p += 1;
                q += 1;
            }
        }
    }
    acc
}

/// Dense symmetric matrix of kernel values, indexed by example handles built
/// with [`SparseExample::gram_ref`]. Intended for tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Kernel(format!(
                "gram matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(GramMatrix { n, entries })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// Which kernel function an oracle evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `exp(-‖a-b‖² / (2σ²))`, parameterized by σ².
    Gaussian { sigma2: f64 },
    Linear,
    PrecomputedGram(Arc<GramMatrix>),
}

impl KernelKind {
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param(format!(
                "gaussian kernel needs sigma^2 > 0, got {sigma2}"
            )));
        }
        Ok(KernelKind::Gaussian { sigma2 })
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, KernelKind::Gaussian { .. })
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Gaussian { sigma2 } => write!(f, "gaussian:{sigma2}"),
            KernelKind::Linear => write!(f, "linear"),
            KernelKind::PrecomputedGram(g) => write!(f, "precomputed:{}", g.size()),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// Accepts `linear` or `gaussian:SIGMA2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(KernelKind::Linear);
        }
        if let Some(rest) = s.strip_prefix("gaussian:") {
            let sigma2: f64 = rest
                .parse()
                .map_err(|_| Error::param(format!("bad gaussian bandwidth '{rest}'")))?;
            return KernelKind::gaussian(sigma2);
        }
        Err(Error::param(format!(
            "unknown kernel '{s}' (expected 'linear' or 'gaussian:SIGMA2')"
        )))
    }
}

/// A kernel function with a monotone evaluation counter.
#[derive(Debug)]
pub struct KernelOracle {
    kind: KernelKind,
    neg_inv_two_sigma2: f64,
    evals: AtomicU64,
}

impl KernelOracle {
    pub fn new(kind: KernelKind) -> Self {
        let neg_inv_two_sigma2 = match &kind {
            KernelKind::Gaussian { sigma2 } => -1.0 / (2.0 * sigma2),
            _ => 0.0,
        };
        KernelOracle {
            kind,
            neg_inv_two_sigma2,
            evals: AtomicU64::new(0),
        }
    }

    pub fn gaussian(sigma2: f64) -> Result<Self> {
        Ok(Self::new(KernelKind::gaussian(sigma2)?))
    }

    pub fn linear() -> Self {
        Self::new(KernelKind::Linear)
    }

    pub fn gram(gram: GramMatrix) -> Self {
        Self::new(KernelKind::PrecomputedGram(Arc::new(gram)))
    }

    /// A new oracle over the same kernel with its own zeroed counter.
    pub fn fresh(&self) -> Self {
        Self::new(self.kind.clone())
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// Total evaluations charged so far.
    pub fn evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Evaluates `K(a, b)` and charges one evaluation.
    pub fn eval(&self, a: &SparseExample, b: &SparseExample) -> Result<f64> {
        let v = self.raw(a, b)?;
        self.evals.fetch_add(1, Ordering::Relaxed);
        Ok(v)
    }

    /// Writes `K(x_i, pivot)` for every example into `out` and charges
    /// `examples.len()` evaluations.
    pub fn row_into(
        &self,
        examples: &[SparseExample],
        pivot: &SparseExample,
        out: &mut [f64],
    ) -> Result<()> {
        assert_eq!(examples.len(), out.len(), "row buffer length mismatch");
        if examples.len() >= PAR_ROW_THRESHOLD {
            out.par_iter_mut()
                .zip(examples.par_iter())
                .try_for_each(|(o, x)| {
                    *o = self.raw(x, pivot)?;
                    Ok::<(), Error>(())
                })?;
        } else {
            for (o, x) in out.iter_mut().zip(examples) {
                *o = self.raw(x, pivot)?;
            }
        }
        self.evals
            .fetch_add(examples.len() as u64, Ordering::Relaxed);
        Ok(())
    }

    /// Returns `[K(x_i, x_j)]_i` and charges `examples.len()` evaluations.
    pub fn row(&self, examples: &[SparseExample], j: usize) -> Result<Vec<f64>> {
        let pivot = examples.get(j).ok_or_else(|| {
            Error::Kernel(format!("row index {j} out of range for {}", examples.len()))
        })?;
        let mut out = vec![0.0; examples.len()];
        self.row_into(examples, pivot, &mut out)?;
        Ok(out)
    }

    /// Adds `n` evaluations performed through [`Self::raw`].
    pub(crate) fn charge(&self, n: u64) {
        self.evals.fetch_add(n, Ordering::Relaxed);
    }

    /// Evaluates without charging; callers must [`Self::charge`] the count.
    pub(crate) fn raw(&self, a: &SparseExample, b: &SparseExample) -> Result<f64> {
        match &self.kind {
            KernelKind::Gaussian { .. } => {
                let d2 = (a.norm_sq + b.norm_sq - 2.0 * a.dot(b)).max(0.0);
                Ok((d2 * self.neg_inv_two_sigma2).exp())
            }
            KernelKind::Linear => Ok(a.dot(b)),
            KernelKind::PrecomputedGram(g) => {
                let (i, j) = match (a.gram_row(), b.gram_row()) {
                    (Some(i), Some(j)) if i < g.size() && j < g.size() => (i, j),
                    _ => {
                        return Err(Error::Kernel(format!(
                            "example is not a valid handle into a {0}x{0} gram matrix",
                            g.size()
                        )))
                    }
                };
                Ok(g.get(i, j))
            }
        }
    }
}
