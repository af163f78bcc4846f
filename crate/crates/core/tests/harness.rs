mod common;

use std::path::Path;
use std::process::Command;

use composenet::harness::*;
use composenet::numcore::{ParamSet, Tensor};
use composenet::Error;

use common::random_skills;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_composenet"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let mut p = random_skills(1);
    p.insert(
        "odd",
        Tensor::new(vec![3], vec![f32::MIN_POSITIVE, -0.0, 1e-45]).unwrap(),
    );
    p.freeze_prefix("trunk.evade_g.");
    let ck = Checkpoint::new(p)
        .with_meta("seed", 7)
        .with_meta("note", "two words");
    let bytes = ck.to_bytes().unwrap();
    let back = Checkpoint::from_bytes(&bytes, Path::new("mem")).unwrap();
    assert_eq!(back.to_bytes().unwrap(), bytes);
    assert_eq!(back.metadata["note"], "two words");
    assert!(back.params.is_frozen("trunk.evade_g.fc2.weight"));
    assert!(!back.params.is_frozen("trunk.evade_r.fc2.weight"));
    let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(
        bits(back.params.get("odd").unwrap()),
        bits(ck.params.get("odd").unwrap())
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ckpt");
    ck.save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(Checkpoint::load(&path).unwrap(), back);
}

#[test]
fn checkpoint_length_is_verified() {
    let ck = Checkpoint::new(random_skills(2));
    let mut bytes = ck.to_bytes().unwrap();
    bytes.pop();
    assert!(matches!(
        Checkpoint::from_bytes(&bytes, Path::new("x")),
        Err(Error::Config(_))
    ));
    let mut bytes = ck.to_bytes().unwrap();
    bytes.extend_from_slice(&[0, 0, 0, 0]);
    assert!(Checkpoint::from_bytes(&bytes, Path::new("x")).is_err());
    assert!(Checkpoint::from_bytes(b"composenet-checkpoint 9\nend 0\n", Path::new("x")).is_err());
    assert!(matches!(
        Checkpoint::load(Path::new("/nonexistent/c.ckpt")),
        Err(Error::MissingPrerequisite(_))
    ));
}

#[test]
fn config_validation_reports_each_field() {
    let cfg = ExperimentConfig::from_toml(
        r#"
version = 2
name = "bad name"
method = "ablation_wrong_skills"
tasks = ["!g U", "F r"]
substitute_skills = ["collect_q"]
output_dir = "out"
[train]
gamma = 0.0
"#,
    )
    .unwrap();
    let Err(Error::Config(msg)) = cfg.validate(Verb::Train) else {
        panic!()
    };
    for field in [
        "version",
        "name",
        "train",
        "tasks[0]",
        "skills_checkpoint",
        "substitute_skills",
    ] {
        assert!(msg.contains(field), "missing `{field}` in:\n{msg}");
    }
    assert!(ExperimentConfig::from_toml(
        "version = 1\nname = \"x\"\noutput_dir = \"o\"\nbogus = 1\n"
    )
    .is_err());
}

#[test]
fn config_hash_tracks_content() {
    let base = "version = 1\nname = \"x\"\ntasks = [\"F r\"]\noutput_dir = \"o\"\n";
    let a = ExperimentConfig::from_toml(base).unwrap();
    let mut b = a.clone();
    assert_eq!(a.hash().unwrap(), b.hash().unwrap());
    b.train.seed = 1;
    assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    assert_eq!(a.hash().unwrap().len(), 64);
}

#[test]
fn missing_skills_checkpoint_is_refused_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(
        dir.path(),
        "c.toml",
        "version = 1\nname = \"w\"\ntasks = [\"!b U r\"]\nskills_checkpoint = \"missing.ckpt\"\noutput_dir = \"out\"\n",
    );
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    assert!(matches!(
        run(Verb::Train, &cfg),
        Err(Error::MissingPrerequisite(_))
    ));
    assert!(
        !dir.path().join("out").exists(),
        "nothing may be written before prerequisites load"
    );
    let (code, _, err) = cli(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.toml",
        "version = 1\nname = \"x\"\ntasks = [\"F q\"]\noutput_dir = \"o\"\n",
    );
    let (code, _, err) = cli(&["train", "--config", bad.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("tasks[0]"), "{err}");
    let (code, _, _) = cli(&[
        "eval",
        "--config",
        dir.path().join("none.toml").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    for verb in [
        "train-skills",
        "train",
        "transfer-train",
        "eval",
        "zero-shot",
        "ablate-skills",
        "ablate-policy",
        "plot",
    ] {
        assert!(out.contains(verb), "{verb} missing from help");
    }
}

fn scratch_config(dir: &Path) -> std::path::PathBuf {
    write(
        dir,
        "scratch.toml",
        r#"
version = 1
name = "scratch_or"
method = "scratch"
tasks = ["F r | F b"]
output_dir = "out"
trace_episodes = 2
[train]
total_steps = 2000
eval_interval = 1000
eval_episodes = 4
"#,
    )
}

#[test]
fn reruns_give_identical_metrics_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = scratch_config(dir.path());
    let (code, out, err) = cli(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("or_r_b"));
    let m = dir.path().join("out/scratch_or.seed0.csv");
    let first = std::fs::read(&m).unwrap();
    let ck1 = std::fs::read(dir.path().join("out/checkpoint.ckpt")).unwrap();
    let (code, _, _) = cli(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(&m).unwrap(), first);
    assert_eq!(
        std::fs::read(dir.path().join("out/checkpoint.ckpt")).unwrap(),
        ck1
    );

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,method,task,reward_mode,seed,steps,mean_return,mean_length,success_rate,entropy,config_hash"
    );
    let rows = read_metrics(&m).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[0].steps < w[1].steps));
    let hash = ExperimentConfig::load(&cfg_path).unwrap().hash().unwrap();
    assert!(rows
        .iter()
        .all(|r| r.config_hash == hash && r.method == "scratch"));
    assert!(dir.path().join("out/scratch_or.seed0.timing.csv").exists());

    // A different seed writes a separate file.
    let (code, _, _) = cli(&[
        "train",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(dir.path().join("out/scratch_or.seed1.csv").exists());

    // Evaluation of the trained checkpoint dumps traces, one line per tick.
    let (code, out, err) = cli(&["eval", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("or_r_b"));
    let trace =
        std::fs::read_to_string(dir.path().join("out/traces/or_r_b.seed0.ep1.txt")).unwrap();
    assert!(trace.lines().next().unwrap().starts_with("0 agent="));
    assert!(trace.lines().count() >= 2);
}

#[test]
fn plots_have_series_bands_and_mode_labels() {
    let rec = |method: &str, seed: u64, steps: u64, ret: f64, mode: &str| MetricsRecord {
        experiment: "e".into(),
        method: method.into(),
        task: "t".into(),
        reward_mode: mode.into(),
        seed,
        steps,
        mean_return: ret,
        mean_length: 10.0 * ret,
        success_rate: 0.0,
        entropy: 1.0,
        config_hash: "h".into(),
    };
    let mut rows = Vec::new();
    for m in ["composenet", "scratch", "metacontroller"] {
        for seed in 0..3 {
            for k in 0..4 {
                rows.push(rec(m, seed, k * 100, k as f64 + seed as f64, "goal"));
            }
        }
    }
    let chart = build_chart(&rows, "t").unwrap();
    assert_eq!(chart.series.len(), 3);
    assert_eq!(chart.y_label, "mean eval return");
    let p = chart.series[0].points[1];
    assert_eq!((p.0, p.1, p.2, p.3), (100.0, 2.0, 1.0, 3.0));
    let svg = render_svg(&chart);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polygon").count(), 3);

    let single = build_chart(&[rec("scratch", 0, 0, 0.5, "survival")], "s").unwrap();
    assert_eq!(single.y_label, "mean episode length");
    assert!(render_svg(&single).contains("<line"));
    assert!(build_chart(&[], "x").is_err());
}

#[test]
fn plot_verb_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = scratch_config(dir.path());
    assert_eq!(cli(&["train", "--config", cfg_path.to_str().unwrap()]).0, 0);
    let plot_cfg = write(
        dir.path(),
        "plot.toml",
        "version = 1\nname = \"p\"\noutput_dir = \"out\"\n[plot]\ninputs = [\"out/scratch_or.seed0.csv\"]\noutput = \"out/p.svg\"\n",
    );
    let (code, _, err) = cli(&["plot", "--config", plot_cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(dir.path().join("out/p.svg"))
        .unwrap()
        .contains("scratch"));
    let empty = write(dir.path(), "e.toml", "version = 1\nname = \"p\"\noutput_dir = \"out\"\n[plot]\ninputs = []\noutput = \"x.svg\"\n");
    assert_eq!(cli(&["plot", "--config", empty.to_str().unwrap()]).0, 1);
}

#[test]
fn zero_shot_evaluation_has_no_side_effects() {
    let skills = random_skills(3);
    let spec = "!g U b".parse().unwrap();
    let src = composenet::trainer::train_composition(
        &skills,
        &"!r U g".parse().unwrap(),
        &composenet::trainer::TrainConfig {
            total_steps: 400,
            eval_interval: 400,
            eval_episodes: 2,
            ..Default::default()
        },
        None,
        None,
    )
    .unwrap();
    let (sk_before, src_before) = (skills.clone(), src.params.clone());
    let a = zero_shot_eval(&skills, &src.params, &spec, 10, 0, 100).unwrap();
    let b = zero_shot_eval(&skills, &src.params, &spec, 10, 0, 100).unwrap();
    assert_eq!(a, b);
    assert_eq!(skills, sk_before);
    assert_eq!(src.params, src_before);
    assert!(matches!(
        zero_shot_eval(&skills, &ParamSet::new(), &spec, 1, 0, 100),
        Err(Error::MissingPrerequisite(_))
    ));
}

#[test]
fn wrong_skill_ablation_warns_on_correct_pair() {
    use composenet::gridworld::Color::*;
    use composenet::model::Skill;
    let skills = random_skills(5);
    let spec = "!g U r".parse().unwrap();
    let cfg = composenet::trainer::TrainConfig {
        total_steps: 200,
        eval_interval: 200,
        eval_episodes: 2,
        ..Default::default()
    };
    let (_, w) = ablate_wrong_skills(
        &spec,
        &[Skill::evade(Green), Skill::collect(Red)],
        &skills,
        &cfg,
        None,
    )
    .unwrap();
    assert_eq!(w.len(), 1);
    let (out, w) = ablate_wrong_skills(
        &spec,
        &[Skill::collect(Blue), Skill::evade(Blue)],
        &skills,
        &cfg,
        None,
    )
    .unwrap();
    assert!(w.is_empty());
    assert!(out.params.is_frozen("trunk.collect_b.fc1.weight"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let table = [
        ("skills.toml", Verb::TrainSkills),
        ("compose_while_g_b.toml", Verb::Train),
        ("scratch_while_g_b.toml", Verb::Train),
        ("compose_then_r_g.toml", Verb::Train),
        ("meta_and_r_g.toml", Verb::Train),
        ("finetune_while_g_b.toml", Verb::Train),
        ("transfer_while.toml", Verb::TransferTrain),
        ("zero_shot_while_g_b.toml", Verb::ZeroShot),
        ("ablate_skills_while_g_r.toml", Verb::AblateSkills),
        ("ablate_policy_then_r_g.toml", Verb::AblatePolicy),
        ("plot_while_g_b.toml", Verb::Plot),
    ];
    let shipped = std::fs::read_dir(&dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "toml")
        })
        .count();
    assert_eq!(shipped, table.len(), "every shipped config is listed here");
    for (file, verb) in table {
        let cfg = ExperimentConfig::load(&dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        cfg.validate(verb).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert!(
            cfg.output_dir.starts_with(&dir),
            "{file}: output resolved against the config directory"
        );
    }
}
