//! Diagnostic measurements of an embedding space.
//!
//! * [`isotropy_cos`]: mean cosine similarity of random row pairs.
//! * [`isotropy_pc`]: ratio of the smallest to largest partition function
//!   `F(u) = Σ exp(uᵀw)` over the eigenvectors of `WᵀW`.
//! * [`dimension_contributions`]: additive per-dimension share of the mean
//!   cosine.
//! * [`detect_outliers`]: dimensions of the mean representation that sit
//!   at least `t·σ` from the mean of its entries.
//! * [`frequency_bias_export`]: 2-D PCA coordinates of word vectors next to
//!   their corpus frequency.

mod freqbias;
mod isotropy;
mod outliers;

pub use freqbias::{frequency_bias_export, FreqBiasExport, FreqRecord};
pub use isotropy::{
    dimension_contributions, isotropy_cos, isotropy_pc, isotropy_report, ContributionReport,
    DimContribution, IsotropyPc, IsotropyReport, ReportParams,
};
pub use outliers::{detect_outliers, outliers_from_mean, OutlierReport, OutlierScan};

/// Pairs sampled for the cosine-based metrics.
pub const DEFAULT_PAIRS: usize = 1000;
/// Rows averaged into the mean representation for outlier detection.
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_THRESHOLD_SIGMAS: f64 = 3.0;
pub const DEFAULT_TOP_K: usize = 3;
