mod common;

use composenet::baselines::*;
use composenet::model::{Network, Skill, EMBED_DIM, HIDDEN_DIM, INPUT_DIM, NUM_ACTIONS};
use composenet::numcore::ParamSet;
use composenet::tasklang::TaskSpec;
use composenet::trainer::TrainConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{frozen_bytes, random_skills};

fn spec(s: &str) -> TaskSpec {
    s.parse().unwrap()
}

fn tiny() -> TrainConfig {
    TrainConfig {
        total_steps: 600,
        eval_interval: 600,
        eval_episodes: 3,
        ..TrainConfig::default()
    }
}

#[test]
fn scratch_capacity_is_one_trunk_plus_policy() {
    let sp = spec("F r | F b");
    let Network::Scratch(agent) = scratch_network(&sp) else {
        panic!()
    };
    let mut p = ParamSet::new();
    scratch_network(&sp)
        .prepare(&mut p, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();
    let dense = |i: usize, o: usize| i * o + o;
    let expected = dense(INPUT_DIM, HIDDEN_DIM)
        + dense(HIDDEN_DIM, HIDDEN_DIM)
        + dense(HIDDEN_DIM, EMBED_DIM)
        + dense(EMBED_DIM, NUM_ACTIONS);
    assert_eq!(agent.capacity(&p), expected);
    assert_eq!(p.frozen_names().count(), 0);
}

#[test]
fn selector_width_matches_relevant_skills() {
    assert_eq!(
        metacontroller_network(&spec("G !r & G !g")).num_outputs(),
        2
    );
    assert_eq!(metacontroller_network(&spec("!b U r")).num_outputs(), 2);
    assert_eq!(
        metacontroller_network(&spec("(!g & !b) U r")).num_outputs(),
        3
    );
    use composenet::gridworld::Color::*;
    assert_eq!(
        relevant_skills(&spec("(!g & !b) U r")),
        vec![Skill::evade(Green), Skill::evade(Blue), Skill::collect(Red)]
    );
}

#[test]
fn metacontroller_leaves_skills_untouched() {
    let sp = spec("G !r & G !g");
    let skills = random_skills(4);
    let out = metacontroller_train(&sp, &skills, &tiny(), None).unwrap();
    assert!(out.updates > 0);
    let names: Vec<&str> = skills.names().collect();
    assert_eq!(
        out.params.snapshot_bytes(names.iter().copied()),
        skills.snapshot_bytes(names.iter().copied())
    );
    assert!(!frozen_bytes(&out.params).is_empty());
}

#[test]
fn metacontroller_needs_its_skills() {
    let mut skills = random_skills(4);
    skills.remove("trunk.evade_g.fc1.weight");
    assert!(matches!(
        metacontroller_train(&spec("G !r & G !g"), &skills, &tiny(), None),
        Err(composenet::Error::MissingPrerequisite(_))
    ));
}

#[test]
fn scratch_runs_repeat_exactly() {
    let sp = spec("F r | F b");
    let a = scratch_train(&sp, &tiny(), None).unwrap();
    let b = scratch_train(&sp, &tiny(), None).unwrap();
    assert_eq!(a.params, b.params);
}
