//! Dense neural-network substrate: tensors, reverse-mode differentiation,
//! RMSProp and categorical sampling.

mod ops;
mod optim;
mod params;
mod sample;
mod tape;
mod tensor;

pub use ops::{
    argmax, dense_forward, entropy, log_softmax_in_place, softmax, softmax_in_place, Activation,
};
pub use optim::{RmsProp, StepStats};
pub use params::{GradMap, ParamSet};
pub use sample::sample_categorical;
pub use tape::{GradTape, Var};
pub use tensor::Tensor;
