//! Baseline neural models: feed-forward network, LSTM (uni- and
//! bidirectional), additive attention, dropout, and cross-entropy.

mod attention;
mod dropout;
mod ffnn;
mod linear;
mod loss;
mod lstm;

pub use attention::{attention_forward, AttentionParams};
pub use dropout::{dropout_apply, DropoutConfig, Mode};
pub use ffnn::{ffnn_forward, FfnnParams};
pub use linear::LinearLayer;
pub use loss::cross_entropy;
pub use lstm::{
    lstm_cell_step, lstm_scan, lstm_sequence, Direction, GateParams, LstmCellParams,
    LstmLayerParams,
};
