//! Classical next-generation reservoir computing on quantum state trajectories.

mod features;
mod metrics;
mod predict;
mod ridge;

pub use features::{
    assemble_features, assemble_training, delay_vector, feature_length, feature_vector, norm_bounds,
    padded_feature_vector, padded_feature_vector_general, padded_to_classical, FeatureConfig, FeatureMatrix, Layout,
    MAX_FEATURE_LENGTH,
};
pub use metrics::{amplitude_errors, fidelity, pauli_expectation, AmplitudeErrors, Pauli};
pub use predict::{feature_for, predict_iterative, predict_iterative_with_norms, predict_skip, Prediction};
pub use ridge::{
    kappa_regularized, train_weights, train_weights_with, ModelDiagnostics, TrainOptions, WeightModel, RANK_RTOL,
};
