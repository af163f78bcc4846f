use crate::error::Result;
use crate::numcore::{dense_forward, Activation, GradTape, ParamSet, Tensor, Var};

/// Execution strategy for network code: immediate evaluation or recording on a tape.
pub trait Backend {
    type V;

    fn input(&mut self, t: Tensor) -> Self::V;
    fn dense(
        &mut self,
        params: &ParamSet,
        prefix: &str,
        x: &Self::V,
        act: Activation,
    ) -> Result<Self::V>;
    fn concat(&mut self, a: &Self::V, b: &Self::V) -> Result<Self::V>;
}

/// Evaluates immediately without recording anything.
#[derive(Debug, Default, Clone, Copy)]
pub struct Eager;

impl Backend for Eager {
    type V = Tensor;

    fn input(&mut self, t: Tensor) -> Tensor {
        t
    }

    fn dense(
        &mut self,
        params: &ParamSet,
        prefix: &str,
        x: &Tensor,
        act: Activation,
    ) -> Result<Tensor> {
        let w = params.get(&format!("{prefix}.weight"))?;
        let b = params.get(&format!("{prefix}.bias"))?;
        dense_forward(x, w, b, act)
    }

    fn concat(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rows() != b.rows() {
            return Err(crate::Error::Shape(format!(
                "cannot concatenate {:?} with {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let (wa, wb) = (a.last_dim(), b.last_dim());
        let mut data = Vec::with_capacity(a.len() + b.len());
        for r in 0..a.rows() {
            data.extend_from_slice(a.row(r));
            data.extend_from_slice(b.row(r));
        }
        let mut shape = a.shape().to_vec();
        *shape.last_mut().unwrap() = wa + wb;
        Tensor::new(shape, data)
    }
}

/// Records every operation on a [`GradTape`] for a later backward pass.
pub struct Taped<'t> {
    pub tape: &'t mut GradTape,
}

impl Backend for Taped<'_> {
    type V = Var;

    fn input(&mut self, t: Tensor) -> Var {
        self.tape.constant(t)
    }

    fn dense(&mut self, params: &ParamSet, prefix: &str, x: &Var, act: Activation) -> Result<Var> {
        self.tape.dense_layer(params, prefix, *x, act)
    }

    fn concat(&mut self, a: &Var, b: &Var) -> Result<Var> {
        self.tape.concat(*a, *b)
    }
}
