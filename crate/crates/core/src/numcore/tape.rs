use std::collections::HashMap;

use super::ops::{
    axpy, dense_dims, dense_kernel, log_softmax_in_place, sparse_support, Activation,
};
use super::{GradMap, ParamSet, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`GradTape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(String),
    Dense { x: Var, w: Var, b: Var, relu: bool },
    Relu(Var),
    Concat(Var, Var),
    LogSoftmax(Var),
    Exp(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f32),
    Square(Var),
    Gather(Var, Vec<usize>),
    SumRows(Var),
    Sum(Var),
    Flatten(Var),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Records operations in execution order so [`GradTape::backward`] can replay them in reverse.
#[derive(Debug, Default)]
pub struct GradTape {
    nodes: Vec<Node>,
    params: HashMap<String, Var>,
}

impl GradTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(Op::Constant, t, false)
    }

    /// Places a named parameter on the tape. Frozen parameters enter as constants and
    /// therefore never receive a gradient entry.
    pub fn param(&mut self, params: &ParamSet, name: &str) -> Result<Var> {
        if let Some(&v) = self.params.get(name) {
            return Ok(v);
        }
        let t = params.get(name)?.clone();
        let v = if params.is_frozen(name) {
            self.constant(t)
        } else {
            self.push(Op::Param(name.to_string()), t, true)
        };
        self.params.insert(name.to_string(), v);
        Ok(v)
    }

    /// Dense layer using `<prefix>.weight` and `<prefix>.bias` from `params`.
    pub fn dense_layer(
        &mut self,
        params: &ParamSet,
        prefix: &str,
        x: Var,
        act: Activation,
    ) -> Result<Var> {
        let w = self.param(params, &format!("{prefix}.weight"))?;
        let b = self.param(params, &format!("{prefix}.bias"))?;
        self.dense(x, w, b, act)
    }

    pub fn dense(&mut self, x: Var, w: Var, b: Var, act: Activation) -> Result<Var> {
        let (xv, wv, bv) = (self.value(x), self.value(w), self.value(b));
        let (n_out, n_in) = dense_dims(xv, wv, bv)?;
        let mut out = vec![0.0f32; xv.rows() * n_out];
        dense_kernel(xv.data(), wv.data(), bv.data(), n_in, n_out, &mut out);
        let relu = act == Activation::Relu;
        if relu {
            out.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        let mut shape = xv.shape().to_vec();
        *shape.last_mut().unwrap() = n_out;
        let ng = self.ng(x) || self.ng(w) || self.ng(b);
        Ok(self.push(Op::Dense { x, w, b, relu }, Tensor::new(shape, out)?, ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut t = self.value(x).clone();
        t.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let ng = self.ng(x);
        self.push(Op::Relu(x), t, ng)
    }

    /// Concatenation along the last dimension; leading dimensions must agree.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.rows() != bv.rows() || av.shape().len() != bv.shape().len() {
            return Err(Error::Shape(format!(
                "cannot concatenate {:?} with {:?}",
                av.shape(),
                bv.shape()
            )));
        }
        let (wa, wb) = (av.last_dim(), bv.last_dim());
        let mut data = Vec::with_capacity(av.len() + bv.len());
        for r in 0..av.rows() {
            data.extend_from_slice(av.row(r));
            data.extend_from_slice(bv.row(r));
        }
        let mut shape = av.shape().to_vec();
        *shape.last_mut().unwrap() = wa + wb;
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(Op::Concat(a, b), Tensor::new(shape, data)?, ng))
    }

    pub fn log_softmax(&mut self, x: Var) -> Var {
        let mut t = self.value(x).clone();
        let w = t.last_dim();
        for row in t.data_mut().chunks_exact_mut(w) {
            log_softmax_in_place(row);
        }
        let ng = self.ng(x);
        self.push(Op::LogSoftmax(x), t, ng)
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let mut t = self.value(x).clone();
        t.data_mut().iter_mut().for_each(|v| *v = v.exp());
        let ng = self.ng(x);
        self.push(Op::Exp(x), t, ng)
    }

    fn same_shape(&self, a: Var, b: Var) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "elementwise operands {:?} and {:?} differ",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    fn zip_with(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f32, f32) -> f32) -> Result<Var> {
        self.same_shape(a, b)?;
        let mut t = self.value(a).clone();
        for (x, &y) in t.data_mut().iter_mut().zip(self.value(b).data()) {
            *x = f(*x, y);
        }
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(op, t, ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, x: Var, c: f32) -> Var {
        let mut t = self.value(x).clone();
        t.data_mut().iter_mut().for_each(|v| *v *= c);
        let ng = self.ng(x);
        self.push(Op::Scale(x, c), t, ng)
    }

    pub fn square(&mut self, x: Var) -> Var {
        let mut t = self.value(x).clone();
        t.data_mut().iter_mut().for_each(|v| *v *= *v);
        let ng = self.ng(x);
        self.push(Op::Square(x), t, ng)
    }

    /// Picks one column per row: `[rows, k]` → `[rows]`.
    pub fn gather(&mut self, x: Var, index: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        let k = xv.last_dim();
        if index.len() != xv.rows() || index.iter().any(|&i| i >= k) {
            return Err(Error::Shape(format!(
                "gather of {} indices from {:?}",
                index.len(),
                xv.shape()
            )));
        }
        let data: Vec<f32> = index
            .iter()
            .enumerate()
            .map(|(r, &i)| xv.row(r)[i])
            .collect();
        let ng = self.ng(x);
        Ok(self.push(Op::Gather(x, index.to_vec()), Tensor::from_vec(data), ng))
    }

    /// Sums the last dimension: `[rows, k]` → `[rows]`.
    pub fn sum_rows(&mut self, x: Var) -> Var {
        let xv = self.value(x);
        let data: Vec<f32> = (0..xv.rows()).map(|r| xv.row(r).iter().sum()).collect();
        let ng = self.ng(x);
        self.push(Op::SumRows(x), Tensor::from_vec(data), ng)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s: f32 = self.value(x).data().iter().sum();
        let ng = self.ng(x);
        self.push(Op::Sum(x), Tensor::scalar(s), ng)
    }

    pub fn flatten(&mut self, x: Var) -> Var {
        let t = Tensor::from_vec(self.value(x).data().to_vec());
        let ng = self.ng(x);
        self.push(Op::Flatten(x), t, ng)
    }

    /// Reverse-mode pass from a scalar `loss`. Returns one gradient per trainable
    /// parameter reachable from `loss`.
    pub fn backward(&self, loss: Var) -> Result<GradMap> {
        if self.value(loss).len() != 1 {
            return Err(Error::Config(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f32>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        let mut out = GradMap::new();

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Constant => {}
                Op::Param(name) => {
                    let t = Tensor::new(node.value.shape().to_vec(), g)?;
                    out.insert(name.clone(), t);
                }
                Op::Dense { x, w, b, relu } => {
                    let mut g = g;
                    if *relu {
                        for (gi, &y) in g.iter_mut().zip(node.value.data()) {
                            if y <= 0.0 {
                                *gi = 0.0;
                            }
                        }
                    }
                    let wv = self.value(*w);
                    let xv = self.value(*x);
                    let (n_out, n_in) = (wv.shape()[0], wv.shape()[1]);
                    if self.ng(*b) {
                        let gb = self.acc(&mut grads, *b);
                        for gr in g.chunks_exact(n_out) {
                            axpy(1.0, gr, gb);
                        }
                    }
                    if self.ng(*w) {
                        let gw = self.acc(&mut grads, *w);
                        let mut nz = Vec::new();
                        for (gr, xr) in g.chunks_exact(n_out).zip(xv.data().chunks_exact(n_in)) {
                            let sparse = sparse_support(xr, &mut nz);
                            for (o, &go) in gr.iter().enumerate() {
                                if go == 0.0 {
                                    continue;
                                }
                                let gwr = &mut gw[o * n_in..(o + 1) * n_in];
                                if sparse {
                                    nz.iter().for_each(|&j| gwr[j] += go * xr[j]);
                                } else {
                                    axpy(go, xr, gwr);
                                }
                            }
                        }
                    }
                    if self.ng(*x) {
                        let gx = self.acc(&mut grads, *x);
                        for (gr, gxr) in g.chunks_exact(n_out).zip(gx.chunks_exact_mut(n_in)) {
                            for (o, &go) in gr.iter().enumerate() {
                                if go != 0.0 {
                                    axpy(go, &wv.data()[o * n_in..(o + 1) * n_in], gxr);
                                }
                            }
                        }
                    }
                }
                Op::Relu(x) => {
                    let gx = self.acc(&mut grads, *x);
                    for ((gxi, gi), &y) in gx.iter_mut().zip(&g).zip(node.value.data()) {
                        if y > 0.0 {
                            *gxi += gi;
                        }
                    }
                }
                Op::Concat(a, b) => {
                    let wa = self.value(*a).last_dim();
                    let wb = self.value(*b).last_dim();
                    if self.ng(*a) {
                        let ga = self.acc(&mut grads, *a);
                        for (gr, gar) in g.chunks_exact(wa + wb).zip(ga.chunks_exact_mut(wa)) {
                            axpy(1.0, &gr[..wa], gar);
                        }
                    }
                    if self.ng(*b) {
                        let gb = self.acc(&mut grads, *b);
                        for (gr, gbr) in g.chunks_exact(wa + wb).zip(gb.chunks_exact_mut(wb)) {
                            axpy(1.0, &gr[wa..], gbr);
                        }
                    }
                }
                Op::LogSoftmax(x) => {
                    // d/dx_j = g_j - softmax_j * Σ_k g_k
                    let w = node.value.last_dim();
                    let gx = self.acc(&mut grads, *x);
                    for ((gr, yr), gxr) in g
                        .chunks_exact(w)
                        .zip(node.value.data().chunks_exact(w))
                        .zip(gx.chunks_exact_mut(w))
                    {
                        let s: f32 = gr.iter().sum();
                        for ((gxi, gi), yi) in gxr.iter_mut().zip(gr).zip(yr) {
                            *gxi += gi - yi.exp() * s;
                        }
                    }
                }
                Op::Exp(x) => {
                    let gx = self.acc(&mut grads, *x);
                    for ((gxi, gi), y) in gx.iter_mut().zip(&g).zip(node.value.data()) {
                        *gxi += gi * y;
                    }
                }
                Op::Add(a, b) => {
                    if self.ng(*a) {
                        axpy(1.0, &g, self.acc(&mut grads, *a));
                    }
                    if self.ng(*b) {
                        axpy(1.0, &g, self.acc(&mut grads, *b));
                    }
                }
                Op::Sub(a, b) => {
                    if self.ng(*a) {
                        axpy(1.0, &g, self.acc(&mut grads, *a));
                    }
                    if self.ng(*b) {
                        axpy(-1.0, &g, self.acc(&mut grads, *b));
                    }
                }
                Op::Mul(a, b) => {
                    if self.ng(*a) {
                        let bv = self.value(*b).data();
                        let ga = self.acc(&mut grads, *a);
                        for ((gai, gi), bi) in ga.iter_mut().zip(&g).zip(bv) {
                            *gai += gi * bi;
                        }
                    }
                    if self.ng(*b) {
                        let av = self.value(*a).data();
                        let gb = self.acc(&mut grads, *b);
                        for ((gbi, gi), ai) in gb.iter_mut().zip(&g).zip(av) {
                            *gbi += gi * ai;
                        }
                    }
                }
                Op::Scale(x, c) => axpy(*c, &g, self.acc(&mut grads, *x)),
                Op::Square(x) => {
                    let xv = self.value(*x).data();
                    let gx = self.acc(&mut grads, *x);
                    for ((gxi, gi), xi) in gx.iter_mut().zip(&g).zip(xv) {
                        *gxi += 2.0 * gi * xi;
                    }
                }
                Op::Gather(x, index) => {
                    let k = self.value(*x).last_dim();
                    let gx = self.acc(&mut grads, *x);
                    for (r, (&i, gi)) in index.iter().zip(&g).enumerate() {
                        gx[r * k + i] += gi;
                    }
                }
                Op::SumRows(x) => {
                    let k = self.value(*x).last_dim();
                    let gx = self.acc(&mut grads, *x);
                    for (gxr, gi) in gx.chunks_exact_mut(k).zip(&g) {
                        gxr.iter_mut().for_each(|v| *v += gi);
                    }
                }
                Op::Sum(x) => {
                    let gx = self.acc(&mut grads, *x);
                    gx.iter_mut().for_each(|v| *v += g[0]);
                }
                Op::Flatten(x) => axpy(1.0, &g, self.acc(&mut grads, *x)),
            }
        }
        Ok(out)
    }

    fn acc<'g>(&self, grads: &'g mut [Option<Vec<f32>>], v: Var) -> &'g mut [f32] {
        let n = self.nodes[v.0].value.len();
        grads[v.0].get_or_insert_with(|| vec![0.0; n])
    }
}
