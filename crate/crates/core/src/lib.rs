//! Kernel SVM training with the stochastic batch perceptron.
//!
//! The optimizer maximizes the margin over the unit ball subject to a total
//! slack budget `n·ν`, using stochastic supergradients sampled from the
//! water-filling distribution over the current responses. Pegasos, SDCA and
//! the online Perceptron are provided for comparison; every solver is charged
//! through the same kernel-evaluation counter.
//!
//! ```
//! use sbp_core::{generate, sbp, KernelOracle, MonitorConfig, SbpConfig, SyntheticKind, SyntheticSpec};
//!
//! let data = generate(&SyntheticSpec {
//!     kind: SyntheticKind::TwoGaussians { separation: 3.0, noise_rate: 0.0 },
//!     n: 50,
//!     dimension: 2,
//!     seed: 1,
//! })?;
//! let oracle = KernelOracle::gaussian(1.0)?;
//! let (model, _) = sbp::train(&data, &oracle, &SbpConfig::new(0.05, 200, 7), MonitorConfig::default())?;
//! assert_eq!(model.kernel_evals, 50 * 200 + 50);
//! # Ok::<(), sbp_core::Error>(())
//! ```

pub mod baselines;
pub mod bench;
pub mod data;
pub mod error;
pub mod fourier;
pub mod kernels;
pub mod model;
pub mod record;
pub mod sbp;
pub mod waterfill;

pub use baselines::{PegasosConfig, PerceptronModel, SdcaConfig};
pub use bench::{BenchPlan, Calibration, FourierPlan, Solver};
pub use data::{evaluate, generate, parse_libsvm, Dataset, Losses, ParseOptions, SyntheticKind, SyntheticSpec};
pub use error::{Error, ErrorClass, Result};
pub use fourier::FourierMap;
pub use kernels::{GramMatrix, KernelKind, KernelOracle, Label, SparseExample};
pub use model::TrainedModel;
pub use record::{MonitorConfig, RunMetadata, RunRecord, Sample};
pub use sbp::{SbpConfig, SbpState};
pub use waterfill::{PivotRule, WaterLevel, WaterLevelBias};
