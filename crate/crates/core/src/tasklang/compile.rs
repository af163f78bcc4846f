use super::Formula;
use crate::error::{Error, Result};
use crate::gridworld::{Color, EventSet, GridConfig, Role, Roles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardMode {
    /// Terminal +1 on success, −1 when caught, 0 otherwise.
    Goal,
    /// +0.01 for every tick survived.
    Survival,
}

/// The composition shape of a supported task. Symmetric pairs are stored in
/// canonical color order; ordered pairs keep their temporal meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    Collect(Color),
    Evade(Color),
    /// `!evade U collect`
    While {
        evade: Color,
        collect: Color,
    },
    /// `F a | F b`
    Or(Color, Color),
    /// `G !a & G !b`
    AndEvade(Color, Color),
    /// `F(first & F second)`
    Then {
        first: Color,
        second: Color,
    },
    /// `(!a & !b) U collect`
    EvadeBothWhile {
        evade: (Color, Color),
        collect: Color,
    },
    /// `!evade U (a | b)`
    WhileEither {
        evade: Color,
        collect: (Color, Color),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    Skill,
    While,
    Or,
    AndEvade,
    Then,
    EvadeBothWhile,
    WhileEither,
}

impl Template {
    pub fn kind(&self) -> TemplateKind {
        match self {
            Template::Collect(_) | Template::Evade(_) => TemplateKind::Skill,
            Template::While { .. } => TemplateKind::While,
            Template::Or(..) => TemplateKind::Or,
            Template::AndEvade(..) => TemplateKind::AndEvade,
            Template::Then { .. } => TemplateKind::Then,
            Template::EvadeBothWhile { .. } => TemplateKind::EvadeBothWhile,
            Template::WhileEither { .. } => TemplateKind::WhileEither,
        }
    }

    /// Colors the agent must collect.
    pub fn collect_colors(&self) -> Vec<Color> {
        match *self {
            Template::Collect(c) => vec![c],
            Template::Evade(_) | Template::AndEvade(..) => vec![],
            Template::While { collect, .. } | Template::EvadeBothWhile { collect, .. } => {
                vec![collect]
            }
            Template::Or(a, b)
            | Template::WhileEither {
                collect: (a, b), ..
            } => vec![a, b],
            Template::Then { first, second } => vec![first, second],
        }
    }

    /// Colors the agent must avoid.
    pub fn evade_colors(&self) -> Vec<Color> {
        match *self {
            Template::Evade(c) => vec![c],
            Template::Collect(_) | Template::Or(..) | Template::Then { .. } => vec![],
            Template::While { evade, .. } | Template::WhileEither { evade, .. } => vec![evade],
            Template::AndEvade(a, b) | Template::EvadeBothWhile { evade: (a, b), .. } => vec![a, b],
        }
    }

    /// Identifier used in parameter names, e.g. `while_g_b` or `collect_r`.
    pub fn key(&self) -> String {
        match *self {
            Template::Collect(c) => format!("collect_{c}"),
            Template::Evade(c) => format!("evade_{c}"),
            Template::While { evade, collect } => format!("while_{evade}_{collect}"),
            Template::Or(a, b) => format!("or_{a}_{b}"),
            Template::AndEvade(a, b) => format!("and_{a}_{b}"),
            Template::Then { first, second } => format!("then_{first}_{second}"),
            Template::EvadeBothWhile {
                evade: (a, b),
                collect,
            } => format!("and_{a}_{b}_while_{collect}"),
            Template::WhileEither {
                evade,
                collect: (a, b),
            } => format!("while_{evade}_or_{a}_{b}"),
        }
    }
}

/// A compiled task: environment roles, reward mode and composition template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub formula: Formula,
    pub template: Template,
    pub roles: Roles,
    pub reward_mode: RewardMode,
}

impl TaskSpec {
    pub fn key(&self) -> String {
        self.template.key()
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig::new(self.roles)
    }

    pub fn enemies(&self) -> impl Iterator<Item = Color> + '_ {
        Color::ALL
            .into_iter()
            .filter(|c| self.roles[c.index()] == Role::Enemy)
    }

    /// Environment events that make the given propositions true under this task's roles.
    pub fn events_for(&self, props: &[bool; 3]) -> EventSet {
        let mut ev = EventSet::default();
        for c in Color::ALL {
            if props[c.index()] {
                match self.roles[c.index()] {
                    Role::Target => ev.collected[c.index()] = true,
                    Role::Enemy => ev.colliding[c.index()] = true,
                    Role::Bystander => {}
                }
            }
        }
        ev
    }
}

/// Every supported task expression: 6 skills, 6 while, 3 or, 3 and-evade, 6 then,
/// and 3 instances of each hierarchy shape.
pub fn catalog() -> Vec<String> {
    let mut out = Vec::new();
    for c in Color::ALL {
        out.push(format!("F {c}"));
        out.push(format!("G !{c}"));
    }
    for p in Color::ALL {
        for q in Color::ALL {
            if p != q {
                out.push(format!("!{p} U {q}"));
                out.push(format!("F({p} & F {q})"));
            }
        }
    }
    for (a, b) in [
        (Color::Red, Color::Green),
        (Color::Red, Color::Blue),
        (Color::Green, Color::Blue),
    ] {
        out.push(format!("F {a} | F {b}"));
        out.push(format!("G !{a} & G !{b}"));
    }
    for s in Color::ALL {
        let others: Vec<Color> = Color::ALL.into_iter().filter(|&c| c != s).collect();
        out.push(format!("(!{} & !{}) U {s}", others[0], others[1]));
        out.push(format!("!{s} U ({} | {})", others[0], others[1]));
    }
    out
}

fn sorted(a: Color, b: Color) -> (Color, Color) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn as_prop(f: &Formula) -> Option<Color> {
    match f {
        Formula::Prop(c) => Some(*c),
        _ => None,
    }
}

fn as_not_prop(f: &Formula) -> Option<Color> {
    match f {
        Formula::Not(a) => as_prop(a),
        _ => None,
    }
}

fn as_eventually_prop(f: &Formula) -> Option<Color> {
    match f {
        Formula::Eventually(a) => as_prop(a),
        _ => None,
    }
}

fn as_always_not(f: &Formula) -> Option<Color> {
    match f {
        Formula::Always(a) => as_not_prop(a),
        _ => None,
    }
}

fn either<T>(a: &Formula, b: &Formula, f: impl Fn(&Formula, &Formula) -> Option<T>) -> Option<T> {
    f(a, b).or_else(|| f(b, a))
}

fn match_template(f: &Formula) -> std::result::Result<Template, String> {
    let unsupported = |sub: &Formula, why: &str| Err(format!("`{sub}` {why}"));
    match f {
        Formula::Eventually(inner) => {
            if let Some(c) = as_prop(inner) {
                return Ok(Template::Collect(c));
            }
            if let Formula::And(a, b) = inner.as_ref() {
                let then = either(a, b, |x, y| Some((as_prop(x)?, as_eventually_prop(y)?)));
                if let Some((first, second)) = then {
                    return Ok(Template::Then { first, second });
                }
            }
            unsupported(inner, "is not an atom or `p & F q` under F")
        }
        Formula::Always(_) => match as_always_not(f) {
            Some(c) => Ok(Template::Evade(c)),
            None => unsupported(f, "is not of the form `G !p`"),
        },
        Formula::Or(a, b) => match (as_eventually_prop(a), as_eventually_prop(b)) {
            (Some(x), Some(y)) => {
                let (x, y) = sorted(x, y);
                Ok(Template::Or(x, y))
            }
            (None, _) => unsupported(a, "is not of the form `F p` inside a disjunction"),
            (_, None) => unsupported(b, "is not of the form `F p` inside a disjunction"),
        },
        Formula::And(a, b) => match (as_always_not(a), as_always_not(b)) {
            (Some(x), Some(y)) => {
                let (x, y) = sorted(x, y);
                Ok(Template::AndEvade(x, y))
            }
            (None, _) => unsupported(a, "is not of the form `G !p` inside a conjunction"),
            (_, None) => unsupported(b, "is not of the form `G !p` inside a conjunction"),
        },
        Formula::Until(lhs, rhs) => {
            let evade = if let Some(p) = as_not_prop(lhs) {
                Ok(vec![p])
            } else if let Formula::And(a, b) = lhs.as_ref() {
                match (as_not_prop(a), as_not_prop(b)) {
                    (Some(x), Some(y)) => Ok(vec![x, y]),
                    _ => Err(lhs),
                }
            } else {
                Err(lhs)
            };
            let evade = match evade {
                Ok(e) => e,
                Err(sub) => {
                    return unsupported(
                        sub,
                        "is not a negated atom or a conjunction of two negated atoms",
                    )
                }
            };
            let collect = if let Some(q) = as_prop(rhs) {
                vec![q]
            } else if let Formula::Or(a, b) = rhs.as_ref() {
                match (as_prop(a), as_prop(b)) {
                    (Some(x), Some(y)) => vec![x, y],
                    _ => return unsupported(rhs, "is not an atom or a disjunction of two atoms"),
                }
            } else {
                return unsupported(rhs, "is not an atom or a disjunction of two atoms");
            };
            match (evade.as_slice(), collect.as_slice()) {
                (&[p], &[q]) => Ok(Template::While {
                    evade: p,
                    collect: q,
                }),
                (&[p, q], &[s]) => Ok(Template::EvadeBothWhile {
                    evade: sorted(p, q),
                    collect: s,
                }),
                (&[p], &[s, t]) => Ok(Template::WhileEither {
                    evade: p,
                    collect: sorted(s, t),
                }),
                _ => unsupported(
                    f,
                    "nests two conjunctive/disjunctive sides; only one side may be compound",
                ),
            }
        }
        Formula::Prop(_) | Formula::Not(_) => unsupported(f, "has no temporal operator"),
    }
}

/// Compiles a formula of a supported shape into a [`TaskSpec`].
pub fn compile(formula: &Formula) -> Result<TaskSpec> {
    let template = match_template(formula).map_err(Error::Unsupported)?;
    let collect = template.collect_colors();
    let evade = template.evade_colors();
    let mut seen = [false; 3];
    for c in collect.iter().chain(&evade) {
        if std::mem::replace(&mut seen[c.index()], true) {
            return Err(Error::Unsupported(format!(
                "color `{c}` appears more than once in `{formula}`"
            )));
        }
    }
    let mut roles = [Role::Bystander; 3];
    for c in &collect {
        roles[c.index()] = Role::Target;
    }
    for c in &evade {
        roles[c.index()] = Role::Enemy;
    }
    let reward_mode = match template.kind() {
        TemplateKind::AndEvade => RewardMode::Survival,
        TemplateKind::Skill if matches!(template, Template::Evade(_)) => RewardMode::Survival,
        _ => RewardMode::Goal,
    };
    Ok(TaskSpec {
        formula: formula.clone(),
        template,
        roles,
        reward_mode,
    })
}

impl std::str::FromStr for TaskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        compile(&super::parse(s)?)
    }
}
