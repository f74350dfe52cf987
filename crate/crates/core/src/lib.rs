//! olconv-core — a hybrid nuclei-classification pipeline combining
//! handcrafted object-level descriptors with features from a shallow
//! convolutional network.
//!
//! The pipeline stages are:
//!
//! 1. **dataset** – ingestion of image + centroid ground truth into labeled
//!    27×27 patches, stratified splitting, mean-image normalization, and a
//!    synthetic H&E-like patch generator for self-contained testing.
//! 2. **adasyn** – adaptive synthetic oversampling of minority classes.
//! 3. **segment** – contrast adjustment, color normalization, blue-ratio
//!    thresholding, largest-component convex hull, and masking.
//! 4. **olfeat** – nine object-level features (color mode, GLCM texture,
//!    shape moments) per segmented nucleus.
//! 5. **nn** – fixed-topology neural-network primitives with hand-derived
//!    backward passes and plain SGD.
//! 6. **model** – the three-conv-layer backbone, the fused-feature MLP
//!    head, and the training regimes (CNN-only, stagewise, end-to-end).
//! 7. **metrics** – precision/recall/F1, one-vs-rest ROC/AUC, cross-entropy
//!    loss, and the 2-fold cross-validation harness.

pub mod adasyn;
pub mod crossval;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod olfeat;
pub mod rng;
pub mod segment;

pub use error::Error;
pub use nn::tensor::TensorBuffer;
pub use olfeat::OlFeatureVector;
pub use segment::{NucleusMask, RgbPatch, SegmentedPatch};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
