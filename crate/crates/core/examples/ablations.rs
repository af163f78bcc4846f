//! Wrong-skill substitution on "!g U r" and policy retraining on single trunks for
//! "F(r & F g)".
//!
//!     cargo run --release --example ablations -- [skills.ckpt]

use composenet::gridworld::Color::*;
use composenet::harness::{ablate_policy_retrain, ablate_wrong_skills};
use composenet::model::Skill;
use composenet::tasklang::TaskSpec;
use composenet::trainer::evaluate_random;

mod support;

fn main() -> composenet::Result<()> {
    let skills = support::skills_from_args();
    let cfg = support::quick(150_000);

    let spec: TaskSpec = "!g U r".parse()?;
    // slot order of a while tree: (evade, collect)
    for subs in [
        [Skill::evade(Green), Skill::collect(Red)],
        [Skill::evade(Red), Skill::collect(Green)],
        [Skill::evade(Blue), Skill::collect(Blue)],
    ] {
        let (o, warnings) = ablate_wrong_skills(&spec, &subs, &skills, &cfg, None)?;
        let last = o.final_row(&spec.key()).expect("evaluated");
        println!(
            "C({}, {}): final return {:+.3} {warnings:?}",
            subs[1], subs[0], last.mean_return
        );
    }
    println!(
        "random policy: {:+.3}",
        evaluate_random(&spec, 200, 0, 100)?.mean_return
    );

    let then: TaskSpec = "F(r & F g)".parse()?;
    for trunk in [Skill::collect(Red), Skill::collect(Green)] {
        let o = ablate_policy_retrain(&then, trunk, &skills, &cfg, None)?;
        println!(
            "retrain on {trunk}: final return {:+.3}",
            o.final_row(&then.key()).expect("evaluated").mean_return
        );
    }
    Ok(())
}
