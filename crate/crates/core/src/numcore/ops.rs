use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

/// `act(x·Wᵀ + b)` for `x` shaped `[n_in]` or `[batch, n_in]` and `W` shaped `[n_out, n_in]`.
pub fn dense_forward(
    x: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    act: Activation,
) -> Result<Tensor> {
    let (n_out, n_in) = dense_dims(x, weight, bias)?;
    let rows = x.rows();
    let mut out = vec![0.0f32; rows * n_out];
    dense_kernel(x.data(), weight.data(), bias.data(), n_in, n_out, &mut out);
    if act == Activation::Relu {
        out.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    let mut shape = x.shape().to_vec();
    *shape.last_mut().unwrap() = n_out;
    Tensor::new(shape, out)
}

pub(crate) fn dense_dims(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<(usize, usize)> {
    if weight.shape().len() != 2 {
        return Err(Error::Shape(format!(
            "dense weight must be 2-d, got {:?}",
            weight.shape()
        )));
    }
    let (n_out, n_in) = (weight.shape()[0], weight.shape()[1]);
    if x.shape().len() > 2 || x.last_dim() != n_in {
        return Err(Error::Shape(format!(
            "dense input {:?} does not match weight {:?}",
            x.shape(),
            weight.shape()
        )));
    }
    if bias.shape() != [n_out] {
        return Err(Error::Shape(format!(
            "dense bias {:?} does not match weight {:?}",
            bias.shape(),
            weight.shape()
        )));
    }
    Ok((n_out, n_in))
}

pub(crate) fn dense_kernel(
    x: &[f32],
    w: &[f32],
    b: &[f32],
    n_in: usize,
    n_out: usize,
    out: &mut [f32],
) {
    let mut nz = Vec::new();
    for (xr, yr) in x.chunks_exact(n_in).zip(out.chunks_exact_mut(n_out)) {
        // Rendered grids are almost entirely zero; only visit occupied inputs then.
        if sparse_support(xr, &mut nz) {
            for ((y, wr), &bo) in yr.iter_mut().zip(w.chunks_exact(n_in)).zip(b) {
                *y = nz.iter().fold(bo, |acc, &j| acc + xr[j] * wr[j]);
            }
        } else {
            for ((y, wr), &bo) in yr.iter_mut().zip(w.chunks_exact(n_in)).zip(b) {
                *y = dot(xr, wr) + bo;
            }
        }
    }
}

/// Fills `nz` with the indices of nonzero entries and reports whether the row is
/// sparse enough (under 1/8 occupied) for index-based loops to pay off.
pub(crate) fn sparse_support(row: &[f32], nz: &mut Vec<usize>) -> bool {
    nz.clear();
    let limit = row.len() / 8;
    for (j, &v) in row.iter().enumerate() {
        if v != 0.0 {
            if nz.len() >= limit {
                return false;
            }
            nz.push(j);
        }
    }
    true
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    // Eight independent accumulators let the compiler vectorize the reduction.
    let mut acc = [0.0f32; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-wise softmax over the last dimension, computed with max subtraction.
pub fn softmax(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    let w = logits.last_dim();
    for row in out.data_mut().chunks_exact_mut(w) {
        softmax_in_place(row);
    }
    out
}

pub fn softmax_in_place(row: &mut [f32]) {
    let m = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut s = 0.0f32;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in row.iter_mut() {
        *v /= s;
    }
}

/// Row-wise log-softmax over the last dimension.
pub fn log_softmax_in_place(row: &mut [f32]) {
    let m = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f32>().ln();
    for v in row.iter_mut() {
        *v -= lse;
    }
}

/// Index of the largest entry; the first one on ties.
pub fn argmax(v: &[f32]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy of a probability vector, in nats.
pub fn entropy(p: &[f32]) -> f32 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f32>()
}
