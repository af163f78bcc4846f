//! Direct three-valued evaluation of finite-trace semantics, used as an independent
//! check on the template-driven monitor.

use super::Formula;

/// Propositions true at one tick, indexed by color.
pub type PropSet = [bool; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum K {
    T,
    F,
    U,
}

impl K {
    fn not(self) -> K {
        match self {
            K::T => K::F,
            K::F => K::T,
            K::U => K::U,
        }
    }

    fn and(self, o: K) -> K {
        match (self, o) {
            (K::F, _) | (_, K::F) => K::F,
            (K::T, K::T) => K::T,
            _ => K::U,
        }
    }

    fn or(self, o: K) -> K {
        self.not().and(o.not()).not()
    }
}

/// Colors occurring under an odd number of negations are instantaneous (collisions);
/// the others are collection events that latch.
fn polarity(f: &Formula, negated: bool, out: &mut [Option<bool>; 3]) {
    match f {
        Formula::Prop(c) => {
            let slot = &mut out[c.index()];
            *slot = Some(slot.unwrap_or(false) || negated);
        }
        Formula::Not(a) => polarity(a, !negated, out),
        Formula::Eventually(a) | Formula::Always(a) => polarity(a, negated, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
            polarity(a, negated, out);
            polarity(b, negated, out);
        }
    }
}

struct Trace {
    /// Effective proposition values per tick after latching.
    ticks: Vec<PropSet>,
    /// Value every proposition takes at any tick beyond the trace.
    future: [K; 3],
    ended: bool,
}

fn eval(f: &Formula, tr: &Trace, i: usize) -> K {
    let n = tr.ticks.len();
    if i >= n {
        return eval_future(f, tr);
    }
    match f {
        Formula::Prop(c) => {
            if tr.ticks[i][c.index()] {
                K::T
            } else {
                K::F
            }
        }
        Formula::Not(a) => eval(a, tr, i).not(),
        Formula::And(a, b) => eval(a, tr, i).and(eval(b, tr, i)),
        Formula::Or(a, b) => eval(a, tr, i).or(eval(b, tr, i)),
        Formula::Eventually(a) => eval(a, tr, i).or(eval(f, tr, i + 1)),
        Formula::Always(a) => eval(a, tr, i).and(eval(f, tr, i + 1)),
        Formula::Until(a, b) => eval(b, tr, i).or(eval(a, tr, i).and(eval(f, tr, i + 1))),
    }
}

/// Value at the first position past the known prefix.
fn eval_future(f: &Formula, tr: &Trace) -> K {
    if tr.ended {
        // The trace is complete: strong finite-trace semantics at its end.
        return match f {
            Formula::Eventually(_) | Formula::Until(..) => K::F,
            Formula::Always(_) => K::T,
            Formula::Not(a) => eval_future(a, tr).not(),
            Formula::And(a, b) => eval_future(a, tr).and(eval_future(b, tr)),
            Formula::Or(a, b) => eval_future(a, tr).or(eval_future(b, tr)),
            // no position exists; an atom cannot hold there
            Formula::Prop(_) => K::F,
        };
    }
    // Every future position looks the same, so the temporal operators collapse onto
    // their operand (Until onto its right-hand side).
    match f {
        Formula::Prop(c) => tr.future[c.index()],
        Formula::Not(a) => eval_future(a, tr).not(),
        Formula::And(a, b) => eval_future(a, tr).and(eval_future(b, tr)),
        Formula::Or(a, b) => eval_future(a, tr).or(eval_future(b, tr)),
        Formula::Eventually(a) | Formula::Always(a) => eval_future(a, tr),
        Formula::Until(_, b) => eval_future(b, tr),
    }
}

/// Three-valued verdict of `formula` on a finite prefix. A collection proposition
/// counts only on the tick its object is first collected and can never recur;
/// collision propositions hold exactly on the ticks they are observed. When `ended`
/// is true the trace is complete and no future ticks exist.
pub fn brute_force_satisfies(formula: &Formula, trace: &[PropSet], ended: bool) -> Verdict {
    let mut pol = [None; 3];
    polarity(formula, false, &mut pol);
    let mut risen = [false; 3];
    let ticks: Vec<PropSet> = trace
        .iter()
        .map(|raw| {
            std::array::from_fn(|c| {
                if pol[c] == Some(true) {
                    raw[c]
                } else {
                    let edge = raw[c] && !risen[c];
                    risen[c] |= raw[c];
                    edge
                }
            })
        })
        .collect();
    let future = std::array::from_fn(|c| {
        if pol[c] != Some(true) && risen[c] {
            K::F
        } else {
            K::U
        }
    });
    let tr = Trace {
        ticks,
        future,
        ended,
    };
    match eval(formula, &tr, 0) {
        K::T => Verdict::Satisfied,
        K::F => Verdict::Violated,
        K::U => Verdict::Undetermined,
    }
}
