//! Builds a two-layer network on the gradient tape, backpropagates a scalar loss and
//! compares one coordinate with a central finite difference.

use composenet::numcore::{Activation, GradTape, ParamSet, Tensor};
use rand::SeedableRng;

fn loss(params: &ParamSet, x: &Tensor) -> composenet::Result<(f32, composenet::numcore::GradMap)> {
    let mut tape = GradTape::new();
    let xv = tape.constant(x.clone());
    let h = tape.dense_layer(params, "l1", xv, Activation::Relu)?;
    let y = tape.dense_layer(params, "l2", h, Activation::None)?;
    let sq = tape.square(y);
    let l = tape.sum(sq);
    let value = tape.value(l).data()[0];
    Ok((value, tape.backward(l)?))
}

fn main() -> composenet::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut params = ParamSet::new();
    params.init_dense("l1", 3, 8, &mut rng);
    params.init_dense("l2", 8, 2, &mut rng);
    let x = Tensor::new(vec![2, 3], vec![0.5, -1.0, 2.0, 1.5, 0.3, -0.7])?;

    let (l, grads) = loss(&params, &x)?;
    println!("loss {l:.6}");
    for (name, g) in &grads {
        println!("d/d{name}: shape {:?}", g.shape());
    }

    let (name, i, h) = ("l1.weight", 4, 1e-3f32);
    let nudge = |delta: f32| -> composenet::Result<f32> {
        let mut p = params.clone();
        let mut data = p.get(name)?.data().to_vec();
        data[i] += delta;
        p.insert(name, Tensor::new(p.get(name)?.shape().to_vec(), data)?);
        Ok(loss(&p, &x)?.0)
    };
    let fd = (nudge(h)? - nudge(-h)?) / (2.0 * h);
    println!(
        "{name}[{i}]: tape {:.5} finite difference {fd:.5}",
        grads[name].data()[i]
    );
    Ok(())
}
