//! Fixed-topology neural-network primitives: forward passes, analytic
//! backward passes, loss, and plain SGD updates. No autodiff, no graph —
//! just enough to build a small convolutional backbone and an MLP head.
//!
//! All operations are pure functions of their inputs and are safe to call
//! concurrently on disjoint data.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod init;
pub mod loss;
pub mod pool;
pub mod optim;
pub mod tensor;

pub use activation::{relu_backward, relu_forward, softmax, tansig, tansig_backward};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads};
pub use dense::{dense_backward, dense_forward, DenseGrads};
pub use loss::{cross_entropy, softmax_cross_entropy_grad};
pub use optim::sgd_step;
pub use pool::{maxpool_backward, maxpool_forward};
pub use tensor::TensorBuffer;

use crate::{Error, Result};

/// Zero-padding mode of a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// No padding; output shrinks by `kernel - 1`.
    Valid,
    /// Symmetric zero padding keeping the spatial size (odd kernels only).
    Same,
}

/// Topology of a single layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerSpec {
    Conv {
        kernel_h: usize,
        kernel_w: usize,
        in_channels: usize,
        out_channels: usize,
        padding: Padding,
    },
    Relu,
    MaxPool {
        window: usize,
        stride: usize,
    },
    Dense {
        in_dim: usize,
        out_dim: usize,
    },
    Tansig,
    Softmax,
}

impl LayerSpec {
    /// Check the structural invariants (all sizes at least 1).
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LayerSpec::Conv {
                kernel_h,
                kernel_w,
                in_channels,
                out_channels,
                ..
            } => kernel_h >= 1 && kernel_w >= 1 && in_channels >= 1 && out_channels >= 1,
            LayerSpec::MaxPool { window, stride } => window >= 1 && stride >= 1,
            LayerSpec::Dense { in_dim, out_dim } => in_dim >= 1 && out_dim >= 1,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid layer spec: {self:?}")))
        }
    }
}
