//! Saves a parameter set, prints the manifest and checks the reload is bit-exact.

use composenet::harness::Checkpoint;
use composenet::model::{init_policy, init_trunk, Skill, POLICY};
use composenet::numcore::ParamSet;
use rand::SeedableRng;

fn main() -> composenet::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut params = ParamSet::new();
    init_trunk(&mut params, &Skill::all()[0].trunk_prefix(), &mut rng);
    init_policy(&mut params, POLICY, &mut rng);
    params.freeze_prefix("trunk.");

    let ck = Checkpoint::new(params).with_meta("note", "example");
    let bytes = ck.to_bytes()?;
    let manifest_end = bytes
        .windows(4)
        .position(|w| w == b"end ")
        .expect("manifest");
    print!("{}", String::from_utf8_lossy(&bytes[..manifest_end]));
    println!("... {} bytes total", bytes.len());

    let path = std::env::temp_dir().join("composenet-example.ckpt");
    ck.save(&path)?;
    let back = Checkpoint::load(&path)?;
    println!("round trip identical: {}", back.to_bytes()? == bytes);
    Ok(())
}
