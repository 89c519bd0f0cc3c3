//! Geometry analysis for contextual word-embedding spaces.
//!
//! The crate measures how an embedding space is distributed and offers a
//! cluster-based post-processing step that makes it more isotropic:
//!
//! * [`store`]: binary embedding files, per-row token metadata, frequency
//!   tables and STS pair files.
//! * [`numerics`]: PCA, k-means, Spearman correlation, seeded pair sampling and
//!   the log-space partition function.
//! * [`metrics`]: cosine-based and partition-function-based isotropy,
//!   per-dimension cosine contributions, outlier dimensions and the
//!   frequency-bias export.
//! * [`transform`]: fit/apply/serialize the cluster-based isotropy transform,
//!   in-language or zero-shot on another language's embeddings.
//! * [`sts`]: mean-pooled STS evaluation with Spearman correlation.
//! * [`synth`]: seeded synthetic embedding spaces and STS fixtures.
//!
//! ```
//! use cwr_geometry::{metrics, synth};
//!
//! let m = synth::isotropic(&synth::IsotropicSpec { rows: 500, dims: 16, seed: 3, ..Default::default() });
//! let i_cos = metrics::isotropy_cos(&m, 1000, 0).unwrap();
//! assert!(i_cos.abs() < 0.05);
//! ```

pub mod error;
pub mod metrics;
pub mod numerics;
pub mod store;
pub mod sts;
pub mod synth;
pub mod transform;

pub use error::{Error, ErrorClass, Result};
pub use store::{EmbeddingMatrix, StsDataset, StsPair, TokenMeta};
pub use transform::IsotropyTransform;
