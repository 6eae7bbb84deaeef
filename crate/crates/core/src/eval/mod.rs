//! Evaluation harness: corruption matrices, synthetic data, lazy
//! classification, neighborhood metrics, reconstruction and the experiment
//! drivers built from them.

mod corruption;
mod experiment;
mod knn;
mod overlap;
mod reconstruction;
mod synth;

pub use corruption::{partial_corruption, random_orthogonal, CorruptionSpec};
pub use experiment::{corruption_experiment, transfer_experiment, ExperimentConfig, Method, Source};
pub use knn::{accuracy, knn_accuracy, knn_classify, majority_vote};
pub use overlap::{cross_neighborhood_overlap, neighborhood_overlap, self_match_rate};
pub use reconstruction::{class_average_reconstruction, mean_row_correlation, pearson};
pub use synth::{manifold_sample, synth_dataset, ManifoldSpec, SynthModel, SynthSpec};
