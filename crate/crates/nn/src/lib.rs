//! Minimal reverse-mode neural network substrate in `f64`: dense,
//! convolution, transposed convolution and masked convolution layers, four
//! activations, three losses, SGD and Adam.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod linalg;
pub mod loss;
pub mod network;
pub mod optim;
pub mod tensor;
pub mod train;

pub use error::{NnError, Result};
pub use gradcheck::{grad_check, grad_check_indices, GradCheckOptions, GradCheckReport};
pub use layers::{Activation, LayerSpec, MaskType};
pub use loss::{softmax_channels, Loss};
pub use network::{Network, NetworkSpec, Trace};
pub use optim::{Optimizer, OptimizerKind};
pub use tensor::Tensor;
pub use train::{loss_and_grad, train_step};
