//! Sequence-learning engine for market-sentiment forecasting.
//!
//! Text is cleaned, labeled and aligned with daily market bars, cut into
//! sliding windows, and fed to a CNN-GRU network whose every layer has a
//! hand-written backward pass. Predictions drive risk alerts on sentiment
//! inflections.

pub mod alert;
pub mod config;
pub mod data;
pub mod error;
pub mod layers;
pub mod loss;
pub mod model;
pub mod numeric;
pub mod optim;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
pub use numeric::Matrix;
