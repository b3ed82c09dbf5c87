//! Kernel expansions `x ↦ Σ_j α_j y_j K(x_j, x) + b` and their text format.
//!
//! Model file layout (LF line endings, floats in shortest round-trip form):
//!
//! ```text
//! sbp-model 1
//! n <training set size>
//! kernel <linear | gaussian:SIGMA2>
//! bias_enabled <true | false>
//! bias <float>
//! kernel_evals <integer>
//! support <count>
//! <index> <alpha> <y>        one line per nonzero coefficient, index ascending
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelOracle, Label, SparseExample};

const MAGIC: &str = "sbp-model 1";

/// A trained kernel predictor over the examples of its training set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kernel: KernelKind,
    /// Coefficient of `y_i Φ(x_i)` for every training example.
    pub alpha: Vec<f64>,
    pub labels: Vec<Label>,
    pub use_bias: bool,
    pub bias: f64,
    /// Training kernel evaluations consumed to produce the model.
    pub kernel_evals: u64,
}

impl TrainedModel {
    pub fn new(kernel: KernelKind, alpha: Vec<f64>, labels: Vec<Label>) -> Self {
        assert_eq!(alpha.len(), labels.len());
        TrainedModel {
            kernel,
            alpha,
            labels,
            use_bias: false,
            bias: 0.0,
            kernel_evals: 0,
        }
    }

    /// The all-zero model for `train`.
    pub fn zero(kernel: KernelKind, train: &Dataset) -> Self {
        let labels = train.examples().iter().map(|x| x.label()).collect();
        Self::new(kernel, vec![0.0; train.len()], labels)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn support_size(&self) -> usize {
        self.alpha.iter().filter(|&&a| a != 0.0).count()
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| (i, a))
    }

    /// Scales coefficients and bias by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        TrainedModel {
            alpha: self.alpha.iter().map(|a| a * s).collect(),
            bias: self.bias * s,
            ..self.clone()
        }
    }

    /// Score `Σ_j α_j y_j K(x_j, x) + b`; charges one evaluation per support
    /// vector.
    pub fn predict(&self, train: &Dataset, x: &SparseExample, oracle: &KernelOracle) -> Result<f64> {
        if train.len() != self.n() {
            return Err(Error::Data(format!(
                "model expects a training set of {} examples, got {}",
                self.n(),
                train.len()
            )));
        }
        let mut score = 0.0;
        let mut count = 0u64;
        for (j, a) in self.support() {
            score += a * self.labels[j].sign() * oracle.raw(train.get(j), x)?;
            count += 1;
        }
        oracle.charge(count);
        Ok(score + self.bias)
    }

    pub fn to_text(&self) -> Result<String> {
        if let KernelKind::PrecomputedGram(_) = self.kernel {
            return Err(Error::param(
                "models over a precomputed gram matrix cannot be serialized",
            ));
        }
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "n {}", self.n());
        let _ = writeln!(s, "kernel {}", self.kernel);
        let _ = writeln!(s, "bias_enabled {}", self.use_bias);
        let _ = writeln!(s, "bias {}", self.bias);
        let _ = writeln!(s, "kernel_evals {}", self.kernel_evals);
        let _ = writeln!(s, "support {}", self.support_size());
        for (i, a) in self.support() {
            let _ = writeln!(s, "{i} {a} {}", self.labels[i]);
        }
        Ok(s)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text()?.as_bytes())?;
        Ok(())
    }

    /// Reads a model. Labels of non-support examples are not stored, so they
    /// are filled from `train` when given and set to `+1` otherwise.
    pub fn read<R: BufRead>(r: R, train: Option<&Dataset>) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l?)),
                None => Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected end of model file, expected {what}"),
                }),
            }
        };
        let (line, magic) = next("header")?;
        if magic.trim_end() != MAGIC {
            return Err(Error::Parse {
                line,
                msg: format!("not a model file (expected '{MAGIC}')"),
            });
        }
        let n: usize = header_field(&mut next, "n")?;
        let kernel: KernelKind = {
            let (line, v) = header_raw(&mut next, "kernel")?;
            v.parse().map_err(|e: Error| Error::Parse {
                line,
                msg: e.to_string(),
            })?
        };
        let use_bias: bool = header_field(&mut next, "bias_enabled")?;
        let bias: f64 = header_field(&mut next, "bias")?;
        let kernel_evals: u64 = header_field(&mut next, "kernel_evals")?;
        let support: usize = header_field(&mut next, "support")?;

        if let Some(t) = train {
            if t.len() != n {
                return Err(Error::Data(format!(
                    "model was trained on {n} examples, dataset has {}",
                    t.len()
                )));
            }
        }
        let mut labels: Vec<Label> = match train {
            Some(t) => t.examples().iter().map(|x| x.label()).collect(),
            None => vec![Label::Positive; n],
        };
        let mut alpha = vec![0.0; n];
        for _ in 0..support {
            let (line, l) = next("support line")?;
            let err = |msg: String| Error::Parse { line, msg };
            let mut it = l.split_ascii_whitespace();
            let (Some(i), Some(a), Some(y), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(err(format!("expected 'index alpha y', got '{l}'")));
            };
            let i: usize = i.parse().map_err(|_| err(format!("bad index '{i}'")))?;
            let a: f64 = a.parse().map_err(|_| err(format!("bad alpha '{a}'")))?;
            let y: f64 = y.parse().map_err(|_| err(format!("bad label '{y}'")))?;
            if i >= n {
                return Err(err(format!("index {i} out of range for n = {n}")));
            }
            let y = Label::from_sign(y).map_err(|e| err(e.to_string()))?;
            if train.is_some() && labels[i] != y {
                return Err(err(format!("label of example {i} disagrees with the dataset")));
            }
            alpha[i] = a;
            labels[i] = y;
        }
        Ok(TrainedModel {
            kernel,
            alpha,
            labels,
            use_bias,
            bias,
            kernel_evals,
        })
    }
}

fn header_raw(
    next: &mut impl FnMut(&str) -> Result<(usize, String)>,
    key: &str,
) -> Result<(usize, String)> {
    let (line, l) = next(key)?;
    match l.split_once(' ') {
        Some((k, v)) if k == key => Ok((line, v.trim().to_string())),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected '{key} <value>', got '{l}'"),
        }),
    }
}

fn header_field<T: std::str::FromStr>(
    next: &mut impl FnMut(&str) -> Result<(usize, String)>,
    key: &str,
) -> Result<T> {
    let (line, v) = header_raw(next, key)?;
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value '{v}' for {key}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> Dataset {
        Dataset::new(vec![
            SparseExample::dense(&[1.0, 0.0], Label::Positive).unwrap(),
            SparseExample::dense(&[0.0, 1.0], Label::Negative).unwrap(),
            SparseExample::dense(&[1.0, 1.0], Label::Positive).unwrap(),
        ])
    }

    #[test]
    fn empty_support_scores_bias() {
        let d = toy();
        let mut m = TrainedModel::zero(KernelKind::Linear, &d);
        m.bias = 0.75;
        let k = KernelOracle::linear();
        assert_eq!(m.predict(&d, d.get(0), &k).unwrap(), 0.75);
        assert_eq!(k.evals(), 0);
    }

    #[test]
    fn single_term_score() {
        let g = crate::kernels::GramMatrix::new(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let k = KernelOracle::gram(g);
        let d = Dataset::new(vec![
            SparseExample::gram_ref(0, Label::Positive),
            SparseExample::gram_ref(1, Label::Negative),
        ]);
        let mut m = TrainedModel::zero(k.kind().clone(), &d);
        m.alpha[0] = 1.0;
        m.bias = 0.1;
        assert!((m.predict(&d, d.get(1), &k).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(k.evals(), 1);
    }

    #[test]
    fn positive_scaling_keeps_sign() {
        let d = toy();
        let mut m = TrainedModel::zero(KernelKind::Linear, &d);
        m.alpha = vec![0.3, 1.2, 0.0];
        let k = KernelOracle::linear();
        for s in [0.01, 1.0, 250.0] {
            let ms = m.scaled(s);
            for x in d.examples() {
                let a = m.predict(&d, x, &k).unwrap();
                let b = ms.predict(&d, x, &k).unwrap();
                assert_eq!(a.signum(), b.signum());
            }
        }
    }

    #[test]
    fn rejects_wrong_training_set() {
        let d = toy();
        let m = TrainedModel::zero(KernelKind::Linear, &d);
        let (small, _) = d.split_at(2);
        assert!(m.predict(&small, d.get(0), &KernelOracle::linear()).is_err());
    }

    #[test]
    fn text_layout() {
        let d = toy();
        let mut m = TrainedModel::zero(KernelKind::gaussian(0.5).unwrap(), &d);
        m.alpha = vec![0.0, 0.1, 2.0];
        m.kernel_evals = 12;
        let t = m.to_text().unwrap();
        assert_eq!(
            t,
            "sbp-model 1\nn 3\nkernel gaussian:0.5\nbias_enabled false\nbias 0\nkernel_evals 12\nsupport 2\n1 0.1 -1\n2 2 +1\n"
        );
    }

    #[test]
    fn read_rejects_garbage() {
        assert!(TrainedModel::read("hello\n".as_bytes(), None).is_err());
        let bad = "sbp-model 1\nn 2\nkernel linear\nbias_enabled false\nbias 0\nkernel_evals 0\nsupport 1\n5 1 +1\n";
        assert!(TrainedModel::read(bad.as_bytes(), None).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(
            alpha in proptest::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3], 1..30),
            bias in -10.0f64..10.0,
            evals in any::<u32>(),
        ) {
            let labels: Vec<Label> = (0..alpha.len())
                .map(|i| if i % 3 == 0 { Label::Negative } else { Label::Positive })
                .collect();
            let mut m = TrainedModel::new(KernelKind::gaussian(2.5).unwrap(), alpha, labels.clone());
            m.use_bias = true;
            m.bias = bias;
            m.kernel_evals = evals as u64;
            let text = m.to_text().unwrap();
            let train = Dataset::new(
                labels.iter().map(|&l| SparseExample::dense(&[1.0], l).unwrap()).collect(),
            );
            let back = TrainedModel::read(text.as_bytes(), Some(&train)).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_text().unwrap(), text);
        }
    }
}
