//! ComposeNet against the two baselines on one task, same budget and seeds.
//!
//!     cargo run --release --example baselines -- [skills.ckpt] [task]

use composenet::baselines::{metacontroller_train, scratch_train};
use composenet::tasklang::TaskSpec;
use composenet::trainer::{train_composition, TrainOutcome};

mod support;

fn main() -> composenet::Result<()> {
    let skills = support::skills_from_args();
    let spec: TaskSpec = std::env::args()
        .nth(2)
        .unwrap_or_else(|| "G !r & G !g".into())
        .parse()?;
    let cfg = support::quick(150_000);
    let runs: [(&str, TrainOutcome); 3] = [
        (
            "composenet",
            train_composition(&skills, &spec, &cfg, None, None)?,
        ),
        ("scratch", scratch_train(&spec, &cfg, None)?),
        (
            "metacontroller",
            metacontroller_train(&spec, &skills, &cfg, None)?,
        ),
    ];
    for (name, o) in &runs {
        println!("{name}");
        o.curve.iter().for_each(support::print_row);
    }
    Ok(())
}
