//! Saliency-based seismic attribute for salt dome detection.
//!
//! Pipeline: windowed 3D-FFT spectral energies split into frame-axis and
//! in-plane parts ([`saliency`]), center-surround contrast fused into a
//! normalized saliency volume, Otsu binarization and morphological closing
//! ([`segmentation`]), and ROC/AUC scoring against a ground-truth boundary
//! band ([`evaluation`]). [`synth`] builds dome volumes with exact truth
//! masks; [`volume`] holds the grid types and on-disk format.

pub mod config;
pub mod error;
pub mod evaluation;
mod par;
pub mod saliency;
pub mod segmentation;
pub mod synth;
pub mod volume;

pub use config::{MorphologyMode, PipelineConfig};
pub use error::{Error, Result};
pub use evaluation::{auc, confusion, evaluate_report, roc_sweep, ConfusionStats, RocCurve, RocPoint, Summary};
pub use saliency::{compute_saliency, CellGrid, LocalSpectrum, SaliencyVolume};
pub use segmentation::{binarize, morph_close, otsu_threshold, quantize, segment, Histogram, StructuringElement};
pub use synth::{generate, DomeSpec, SynthCase};
pub use volume::{export_slice, load_volume, save_volume, Axis, BinaryVolume, Dims, Volume3D};
