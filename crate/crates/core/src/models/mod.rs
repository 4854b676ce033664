//! Sentence encoders, the MLP classifier, training and evaluation.

pub mod encoder;
pub mod eval;
pub mod io;
pub mod mlp;
pub mod sigtest;
pub mod train;

pub use encoder::{pair_features, Combiner, Encoded, Encoder, EncoderKind};
pub use eval::{evaluate, symmetry_check, ConfusionMatrix, Evaluation, SymmetryReport};
pub use io::{classifier_from_json, classifier_to_json, load_classifier, save_classifier};
pub use mlp::{Mlp, CLASSES};
pub use sigtest::{two_proportion_test, ProportionTest};
pub use train::{
    finetune, mix, train, Classifier, EpochRecord, Hyperparameters, StopReason, TrainingLog,
    TrainingMeta,
};
