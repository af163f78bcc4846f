use super::*;
use crate::gridworld::{Color::*, EventSet, Role};
use crate::Error;

fn p(c: crate::gridworld::Color) -> Formula {
    Formula::Prop(c)
}

#[test]
fn parse_examples() {
    assert_eq!(
        parse("!b U r").unwrap(),
        Formula::until(Formula::not(p(Blue)), p(Red))
    );
    assert_eq!(
        parse("(!g & !b) U r").unwrap(),
        Formula::until(
            Formula::and(Formula::not(p(Green)), Formula::not(p(Blue))),
            p(Red)
        )
    );
    assert_eq!(
        parse("F(r & F g)").unwrap(),
        Formula::eventually(Formula::and(p(Red), Formula::eventually(p(Green))))
    );
}

#[test]
fn until_is_right_associative_and_loosest() {
    let f = parse("r U g U b").unwrap();
    assert_eq!(f, Formula::until(p(Red), Formula::until(p(Green), p(Blue))));
    let f = parse("r | g & b U r").unwrap();
    assert_eq!(
        f,
        Formula::until(Formula::or(p(Red), Formula::and(p(Green), p(Blue))), p(Red))
    );
    let f = parse("G !r & G !g").unwrap();
    assert_eq!(
        f,
        Formula::and(
            Formula::always(Formula::not(p(Red))),
            Formula::always(Formula::not(p(Green)))
        )
    );
}

#[test]
fn parse_errors_carry_position() {
    match parse("!x U r") {
        Err(Error::Syntax { pos, msg }) => {
            assert_eq!(pos, 1);
            assert!(msg.contains("unknown atom"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("(r & g"), Err(Error::Syntax { pos: 6, .. })));
    assert!(matches!(parse("r g"), Err(Error::Syntax { pos: 2, .. })));
    assert!(matches!(parse(""), Err(Error::Syntax { pos: 0, .. })));
}

#[test]
fn printer_round_trips_catalog() {
    for text in catalog() {
        let f = parse(&text).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f, "{text} printed as {f}");
    }
    assert_eq!(parse("F(r & F g)").unwrap().to_string(), "F(r & F g)");
    assert_eq!(parse("(!g & !b) U r").unwrap().to_string(), "!g & !b U r");
}

#[test]
fn compile_while() {
    let t = compile(&parse("!b U r").unwrap()).unwrap();
    assert_eq!(t.roles, [Role::Target, Role::Bystander, Role::Enemy]);
    assert_eq!(t.reward_mode, RewardMode::Goal);
    assert_eq!(
        t.template,
        Template::While {
            evade: Blue,
            collect: Red
        }
    );
}

#[test]
fn compile_and_evade_is_survival() {
    let t = compile(&parse("G !r & G !g").unwrap()).unwrap();
    assert_eq!(t.roles, [Role::Enemy, Role::Enemy, Role::Bystander]);
    assert_eq!(t.reward_mode, RewardMode::Survival);
    let t = compile(&parse("G !g").unwrap()).unwrap();
    assert_eq!(t.reward_mode, RewardMode::Survival);
    assert_eq!(t.key(), "evade_g");
}

#[test]
fn compile_rejects_unsupported_shapes() {
    let err = compile(&parse("r U g").unwrap()).unwrap_err();
    match err {
        Error::Unsupported(msg) => assert!(msg.starts_with("`r`"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(compile(&parse("!r U r").unwrap()).is_err());
    assert!(compile(&parse("G !r & G !r").unwrap()).is_err());
    assert!(compile(&parse("F r & F g").unwrap()).is_err());
    assert!(compile(&parse("(!r & !g) U (b | r)").unwrap()).is_err());
    assert!(compile(&parse("r").unwrap()).is_err());
}

#[test]
fn compile_is_total_on_catalog_and_commutative() {
    let all = catalog();
    assert_eq!(all.len(), 30);
    for text in &all {
        compile(&parse(text).unwrap()).unwrap_or_else(|e| panic!("{text}: {e}"));
    }
    let a = compile(&parse("F r | F b").unwrap()).unwrap();
    let b = compile(&parse("F b | F r").unwrap()).unwrap();
    assert_eq!(a.template, b.template);
    let a = compile(&parse("F(r & F g)").unwrap()).unwrap();
    let b = compile(&parse("F(F g & r)").unwrap()).unwrap();
    assert_eq!(a.template, b.template);
    let h = compile(&parse("(!b & !g) U r").unwrap()).unwrap();
    assert_eq!(
        h.template,
        Template::EvadeBothWhile {
            evade: (Green, Blue),
            collect: Red
        }
    );
}

fn collect(c: crate::gridworld::Color) -> EventSet {
    let mut e = EventSet::default();
    e.collected[c.index()] = true;
    e
}

#[test]
fn monitor_examples() {
    let spec: TaskSpec = "!g U b".parse().unwrap();
    let mut m = MonitorState::new();
    assert_eq!(m.step(&spec, &collect(Blue), false).unwrap(), (1.0, true));
    assert_eq!(m.status, MonitorStatus::Success);
    assert!(matches!(
        m.step(&spec, &EventSet::default(), false),
        Err(Error::Usage(_))
    ));

    let spec: TaskSpec = "F(r & F g)".parse().unwrap();
    let mut m = MonitorState::new();
    assert_eq!(m.step(&spec, &collect(Green), false).unwrap(), (0.0, true));
    assert_eq!(m.status, MonitorStatus::Failure);

    let mut m = MonitorState::new();
    assert_eq!(m.step(&spec, &collect(Red), false).unwrap(), (0.0, false));
    assert_eq!(m.step(&spec, &collect(Green), false).unwrap(), (1.0, true));

    let mut m = MonitorState::new();
    for _ in 0..50 {
        assert_eq!(
            m.step(&spec, &EventSet::default(), false).unwrap(),
            (0.0, false)
        );
    }
    assert_eq!(m.status, MonitorStatus::Running);
}

#[test]
fn monitor_capture_and_survival() {
    let spec: TaskSpec = "!b U r".parse().unwrap();
    let mut m = MonitorState::new();
    let mut ev = EventSet::default();
    ev.colliding[Blue.index()] = true;
    assert_eq!(m.step(&spec, &ev, false).unwrap(), (-1.0, true));

    let spec: TaskSpec = "G !r & G !g".parse().unwrap();
    let mut m = MonitorState::new();
    let mut total = 0.0;
    for t in 1..=100 {
        let (r, done) = m.step(&spec, &EventSet::default(), t == 100).unwrap();
        total += r;
        assert_eq!(done, t == 100);
    }
    assert!((total - 1.0).abs() < 1e-5);
    assert_eq!(m.status, MonitorStatus::Success);
}

#[test]
fn oracle_examples() {
    let f = parse("F r").unwrap();
    let mut trace = vec![[false; 3]; 5];
    trace[3][Red.index()] = true;
    assert_eq!(brute_force_satisfies(&f, &trace, false), Verdict::Satisfied);
    assert_eq!(
        brute_force_satisfies(&f, &trace[..3], false),
        Verdict::Undetermined
    );
    assert_eq!(
        brute_force_satisfies(&f, &trace[..3], true),
        Verdict::Violated
    );

    let f = parse("!b U r").unwrap();
    let mut trace = vec![[false; 3]; 4];
    trace[2][Blue.index()] = true;
    assert_eq!(brute_force_satisfies(&f, &trace, false), Verdict::Violated);

    let f = parse("F(r & F g)").unwrap();
    let mut trace = vec![[false; 3]; 3];
    trace[0][Green.index()] = true;
    trace[2][Red.index()] = true;
    assert_eq!(brute_force_satisfies(&f, &trace, false), Verdict::Violated);
    // a second green event is ignored: the object is already gone
    let mut trace = trace.clone();
    trace.push([false, true, false]);
    assert_eq!(brute_force_satisfies(&f, &trace, false), Verdict::Violated);
}

/// Runs the monitor over a proposition trace; returns its status when it stops.
fn run_monitor(spec: &TaskSpec, trace: &[PropSet], ended: bool) -> MonitorStatus {
    let mut m = MonitorState::new();
    for (t, props) in trace.iter().enumerate() {
        let truncated = ended && t + 1 == trace.len();
        let (_, done) = m.step(spec, &spec.events_for(props), truncated).unwrap();
        if done {
            break;
        }
    }
    m.status
}

#[test]
fn monitor_agrees_with_oracle_on_short_traces() {
    // Full enumeration to length 6 lives in the acceptance suite; length 4 here.
    for text in catalog() {
        let spec: TaskSpec = text.parse().unwrap();
        let mut trace = Vec::new();
        check_all(&spec, &mut trace, 4);
    }
}

fn check_all(spec: &TaskSpec, trace: &mut Vec<PropSet>, max_len: usize) {
    if !trace.is_empty() {
        for ended in [false, true] {
            let status = run_monitor(spec, trace, ended);
            let verdict = brute_force_satisfies(&spec.formula, trace, ended);
            let expected = match verdict {
                Verdict::Satisfied => MonitorStatus::Success,
                Verdict::Violated => MonitorStatus::Failure,
                Verdict::Undetermined => MonitorStatus::Running,
            };
            assert_eq!(
                status, expected,
                "{} on {trace:?} (ended={ended})",
                spec.formula
            );
        }
    }
    if trace.len() == max_len {
        return;
    }
    for bits in 0..8u8 {
        trace.push(std::array::from_fn(|i| bits & (1 << i) != 0));
        check_all(spec, trace, max_len);
        trace.pop();
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_supported() -> impl Strategy<Value = Formula> {
        let color = prop_oneof![Just(Red), Just(Green), Just(Blue)];
        let pair = (color.clone(), color.clone(), color)
            .prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c);
        (pair, 0..8usize).prop_map(|((a, b, c), shape)| {
            let [pa, pb, pc] = [p(a), p(b), p(c)];
            match shape {
                0 => Formula::eventually(pa),
                1 => Formula::always(Formula::not(pa)),
                2 => Formula::until(Formula::not(pa), pb),
                3 => Formula::or(Formula::eventually(pa), Formula::eventually(pb)),
                4 => Formula::and(
                    Formula::always(Formula::not(pa)),
                    Formula::always(Formula::not(pb)),
                ),
                5 => Formula::eventually(Formula::and(pa, Formula::eventually(pb))),
                6 => Formula::until(Formula::and(Formula::not(pa), Formula::not(pb)), pc),
                _ => Formula::until(Formula::not(pa), Formula::or(pb, pc)),
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn parse_print_round_trip(f in arb_supported()) {
            let printed = f.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), f.clone());
            prop_assert!(compile(&f).is_ok());
        }
    }
}
