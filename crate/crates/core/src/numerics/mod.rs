//! Dense `f64` building blocks for the network: tensors, the LSTM cell,
//! softmax and cross-entropy, initializers, dropout, Adam and a
//! finite-difference gradient checker.

mod adam;
mod gradcheck;
mod init;
mod lstm;
mod ops;
mod params;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, adam_update, AdamConfig};
pub use gradcheck::{grad_check, relative_error, GradCheckReport, GroupCheck, DEFAULT_STEP, RELATIVE_FLOOR};
pub use init::{derive_seed, derive_seed_n, init_orthogonal, init_uniform, rng_from_seed};
pub use lstm::{
    backward_lstm, encode_sequence, lstm_step, run_lstm, LstmCell, LstmCellParams, LstmGrads, SeqTrace,
    StepCache,
};
pub(crate) use lstm::sigmoid;
pub use ops::{cross_entropy, dropout_mask, dropout_mask_with, softmax, softmax_backward, LOG_CLAMP};
pub use params::{GradStore, ParamGroup, ParamStore};
pub use tensor::{add_assign, axpy, dot, outer_acc, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension error: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("duplicate parameter group {0}")]
    DuplicateGroup(String),
}
