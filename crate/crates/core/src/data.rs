//! Datasets: LIBSVM text I/O, synthetic generators and loss evaluation.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{KernelOracle, Label, SparseExample};
use crate::model::TrainedModel;

/// An ordered collection of labeled examples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    examples: Vec<SparseExample>,
    dimension: usize,
}

impl Dataset {
    pub fn new(examples: Vec<SparseExample>) -> Self {
        let dimension = examples.iter().map(|x| x.dimension()).max().unwrap_or(0);
        Dataset {
            examples,
            dimension,
        }
    }

    pub fn examples(&self) -> &[SparseExample] {
        &self.examples
    }

    pub fn get(&self, i: usize) -> &SparseExample {
        &self.examples[i]
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// One past the largest feature id in use.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Labels as `±1.0`, in example order.
    pub fn labels(&self) -> Vec<f64> {
        self.examples.iter().map(|x| x.y()).collect()
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self
            .examples
            .iter()
            .filter(|x| x.label() == Label::Positive)
            .count();
        (pos, self.examples.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    /// Splits off the first `at` examples as one dataset and the rest as another.
    pub fn split_at(&self, at: usize) -> (Dataset, Dataset) {
        let at = at.min(self.len());
        (
            Dataset::new(self.examples[..at].to_vec()),
            Dataset::new(self.examples[at..].to_vec()),
        )
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyInput)
        } else {
            Ok(())
        }
    }
}

/// Options for [`parse_libsvm`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Label mapped to `+1`; every other label becomes `-1`. Without it only
    /// binary encodings (`±1`, `0/1`) are accepted.
    pub positive_class: Option<String>,
}

/// Parses LIBSVM / SVM-light text: `label idx:val idx:val ...` with 1-based
/// ascending feature ids. Blank lines and `#` comments are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = match line.find('#') {
            Some(p) => &line[..p],
            None => &line[..],
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        examples.push(parse_line(content, lineno, opts)?);
    }
    Ok(Dataset::new(examples))
}

pub fn parse_libsvm_str(text: &str, opts: &ParseOptions) -> Result<Dataset> {
    parse_libsvm(text.as_bytes(), opts)
}

fn parse_line(content: &str, line: usize, opts: &ParseOptions) -> Result<SparseExample> {
    let err = |msg: String| Error::Parse { line, msg };
    let mut tokens = content.split_ascii_whitespace();
    let label_tok = tokens.next().ok_or_else(|| err("missing label".into()))?;
    let label = parse_label(label_tok, opts).map_err(err)?;

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected idx:val, got '{tok}'")))?;
        let idx: u64 = idx
            .parse()
            .map_err(|_| err(format!("bad feature index '{idx}'")))?;
        if idx == 0 || idx > u32::MAX as u64 {
            return Err(err(format!("feature index {idx} out of range (1-based)")));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("bad feature value '{val}'")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite feature value '{tok}'")));
        }
        let idx = (idx - 1) as u32;
        if let Some(&prev) = indices.last() {
            if idx <= prev {
                return Err(err(format!(
                    "feature indices not ascending ({} then {})",
                    prev + 1,
                    idx + 1
                )));
            }
        }
        indices.push(idx);
        values.push(val);
    }
    SparseExample::new(indices, values, label).map_err(|e| err(e.to_string()))
}

fn parse_label(tok: &str, opts: &ParseOptions) -> std::result::Result<Label, String> {
    if let Some(pc) = &opts.positive_class {
        let same = tok == pc
            || matches!((tok.parse::<f64>(), pc.parse::<f64>()), (Ok(a), Ok(b)) if a == b);
        return Ok(if same { Label::Positive } else { Label::Negative });
    }
    match tok.parse::<f64>() {
        Ok(1.0) => Ok(Label::Positive),
        Ok(v) if v == -1.0 || v == 0.0 => Ok(Label::Negative),
        _ => Err(format!(
            "unknown label '{tok}' (expected +1/-1 or 1/0; use a positive class for multi-class data)"
        )),
    }
}

/// Writes a dataset in LIBSVM format; floats use shortest round-trip form.
pub fn write_libsvm<W: Write>(data: &Dataset, mut w: W) -> Result<()> {
    for x in data.examples() {
        write!(w, "{}", x.label())?;
        for (i, v) in x.indices().iter().zip(x.values()) {
            write!(w, " {}:{}", i + 1, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Per-feature scaling to unit root-mean-square, without centering, so
/// sparsity is kept. Off unless explicitly applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    factors: Vec<f64>,
}

impl Scaling {
    pub fn fit(data: &Dataset) -> Scaling {
        let mut sq = vec![0.0; data.dimension()];
        for x in data.examples() {
            for (&i, &v) in x.indices().iter().zip(x.values()) {
                sq[i as usize] += v * v;
            }
        }
        let n = data.len().max(1) as f64;
        let factors = sq
            .into_iter()
            .map(|s| {
                let rms = (s / n).sqrt();
                if rms > 0.0 {
                    1.0 / rms
                } else {
                    1.0
                }
            })
            .collect();
        Scaling { factors }
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        let examples = data
            .examples()
            .iter()
            .map(|x| {
                let values = x
                    .indices()
                    .iter()
                    .zip(x.values())
                    .map(|(&i, &v)| v * self.factors.get(i as usize).copied().unwrap_or(1.0))
                    .collect();
                SparseExample::new(x.indices().to_vec(), values, x.label())
                    .expect("scaling keeps a valid example")
            })
            .collect();
        Dataset::new(examples)
    }
}

/// Synthetic problem families.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    /// Mixture of `N(±(separation/2)·e₀, I)`. Labels follow the Bayes rule
    /// `sign(x₀)` and are then flipped with probability `noise_rate`, so the
    /// Bayes error equals `noise_rate`.
    TwoGaussians { separation: f64, noise_rate: f64 },
    /// Uniform points in `[-1,1]^d`; the label is the XOR of the quadrant
    /// sign `x₀·x₁ > 0` and ring membership `x₀²+x₁² > 0.5`.
    XorRing,
    /// Points in the ball of the given radius with `y·x₀ ≥ margin`. The first
    /// two examples are `±margin·e₀`, which pins the best achievable
    /// linear margin to exactly `margin` (attained by `u = e₀`).
    MarginSeparable { margin: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub dimension: usize,
    pub seed: u64,
}

/// Draws a seed-deterministic synthetic dataset.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::param("synthetic dataset needs n >= 1"));
    }
    if spec.dimension == 0 {
        return Err(Error::param("synthetic dataset needs dimension >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dimension;
    let examples = match spec.kind {
        SyntheticKind::TwoGaussians {
            separation,
            noise_rate,
        } => {
            if !(separation >= 0.0 && separation.is_finite()) {
                return Err(Error::param("two_gaussians needs separation >= 0"));
            }
            if !(0.0..=0.5).contains(&noise_rate) {
                return Err(Error::param("two_gaussians needs noise_rate in [0, 0.5]"));
            }
            (0..spec.n)
                .map(|_| {
                    let centre = if rng.random_bool(0.5) { 0.5 } else { -0.5 } * separation;
                    let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                    x[0] += centre;
                    let mut label = if x[0] >= 0.0 {
                        Label::Positive
                    } else {
                        Label::Negative
                    };
                    if noise_rate > 0.0 && rng.random_bool(noise_rate) {
                        label = label.flipped();
                    }
                    SparseExample::dense(&x, label)
                })
                .collect::<Result<Vec<_>>>()?
        }
        SyntheticKind::XorRing => {
            if d < 2 {
                return Err(Error::param("xor_ring needs dimension >= 2"));
            }
            (0..spec.n)
                .map(|_| {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let quadrant = x[0] * x[1] > 0.0;
                    let ring = x[0] * x[0] + x[1] * x[1] > 0.5;
                    let label = if quadrant != ring {
                        Label::Positive
                    } else {
                        Label::Negative
                    };
                    SparseExample::dense(&x, label)
                })
                .collect::<Result<Vec<_>>>()?
        }
        SyntheticKind::MarginSeparable { margin, radius } => {
            margin_separable(&mut rng, spec.n, d, margin, radius)?
        }
    };
    Ok(Dataset::new(examples))
}

fn margin_separable(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    margin: f64,
    radius: f64,
) -> Result<Vec<SparseExample>> {
    if !(margin > 0.0 && radius > margin && radius.is_finite()) {
        return Err(Error::param(format!(
            "margin_separable needs 0 < margin < radius, got margin={margin} radius={radius}"
        )));
    }
    if n < 2 {
        return Err(Error::param("margin_separable needs n >= 2"));
    }
    let mut out = Vec::with_capacity(n);
    let mut anchor = vec![0.0; d];
    anchor[0] = margin;
    out.push(SparseExample::dense(&anchor, Label::Positive)?);
    anchor[0] = -margin;
    out.push(SparseExample::dense(&anchor, Label::Negative)?);

    for _ in 2..n {
        let label = if rng.random_bool(0.5) {
            Label::Positive
        } else {
            Label::Negative
        };
        let mut x = vec![0.0; d];
        x[0] = label.sign() * (margin + (radius - margin) * rng.random::<f64>());
        if d > 1 {
            let room = (radius * radius - x[0] * x[0]).max(0.0).sqrt();
            let dir: Vec<f64> = (1..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let len = room * rng.random::<f64>().powf(1.0 / (d - 1) as f64);
                for (xi, di) in x[1..].iter_mut().zip(&dir) {
                    *xi = di / norm * len;
                }
            }
        }
        out.push(SparseExample::dense(&x, label)?);
    }

    // Construction guarantees these; check anyway before handing the data out.
    for x in &out {
        let m = x.y() * x.get(0);
        if m < margin || x.norm_sq().sqrt() > radius * (1.0 + 1e-12) {
            return Err(Error::Data(
                "margin_separable construction violated its margin or radius".into(),
            ));
        }
    }
    Ok(out)
}

/// Mean hinge and 0/1 losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub hinge: f64,
    pub zero_one: f64,
}

#[inline]
pub fn hinge(margin: f64) -> f64 {
    (1.0 - margin).max(0.0)
}

/// A margin `y·score ≤ 0` counts as an error.
#[inline]
pub fn zero_one(margin: f64) -> f64 {
    if margin <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Losses from signed margins `y_i · score_i`.
pub fn losses_from_margins(margins: &[f64]) -> Losses {
    if margins.is_empty() {
        return Losses {
            hinge: 0.0,
            zero_one: 0.0,
        };
    }
    let n = margins.len() as f64;
    let h: Vec<f64> = margins.iter().map(|&m| hinge(m)).collect();
    let z: Vec<f64> = margins.iter().map(|&m| zero_one(m)).collect();
    Losses {
        hinge: pairwise_sum(&h) / n,
        zero_one: pairwise_sum(&z) / n,
    }
}

/// Summation with a fixed pairwise tree, independent of thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Evaluates `model` (trained on `train`) on `data`. Charges
/// `support_size × |data|` evaluations to `oracle`, which should be an
/// evaluation counter distinct from the training one.
pub fn evaluate(
    model: &TrainedModel,
    train: &Dataset,
    data: &Dataset,
    oracle: &KernelOracle,
) -> Result<Losses> {
    data.require_nonempty()?;
    let margins = data
        .examples()
        .par_iter()
        .map(|x| Ok(x.y() * model.predict(train, x, oracle)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses_from_margins(&margins))
}
