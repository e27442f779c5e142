//! Monte Carlo verification engine for the Ginibre eigenvector-overlap
//! formulas: matrix sampling, spectral decomposition with left/right
//! overlaps, binned estimators, and reproducible parallel campaigns.

pub mod campaign;
pub mod config;
pub mod error;
pub mod histogram;
pub mod sample;

pub use campaign::{run_campaign, run_campaign_archived, BinRow, EstimateReport, PairRow};
pub use config::{BinSpec, CampaignMode, EnsembleConfig, StreamPolicy};
pub use error::{McError, Result};
pub use histogram::{Histogram2D, PairHistogram, N_BLOCKS};
pub use sample::{sample_ginibre, spectral_decompose, OverlapConvention, SpectralSample};
