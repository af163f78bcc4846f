//! Deterministic 15×15 collect/evade gridworld.
//!
//! The agent moves on a torus; objects never wrap. Enemy-role objects chase the agent
//! one cell per tick along a shortest non-wrapping path. Observations are single-channel
//! grayscale images.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const GRID_SIZE: usize = 15;
pub const NUM_CELLS: usize = GRID_SIZE * GRID_SIZE;

pub const AGENT_INTENSITY: f32 = 1.0;
pub const EMPTY_INTENSITY: f32 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    /// Canonical order r < g < b.
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Color::Red => 'r',
            Color::Green => 'g',
            Color::Blue => 'b',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'r' => Some(Color::Red),
            'g' => Some(Color::Green),
            'b' => Some(Color::Blue),
            _ => None,
        }
    }

    pub fn intensity(self) -> f32 {
        match self {
            Color::Red => 0.3,
            Color::Green => 0.5,
            Color::Blue => 0.7,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Target,
    Enemy,
    Bystander,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Target => "target",
            Role::Enemy => "enemy",
            Role::Bystander => "bystander",
        })
    }
}

/// Per-color roles, indexed by [`Color::index`].
pub type Roles = [Role; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    /// Tie-break order for chasing: Up < Down < Left < Right.
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// `(row, col)`; row 0 is the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// Toroidal move used by the agent.
    pub fn wrapped(self, a: Action) -> Cell {
        let (dr, dc) = a.delta();
        let n = GRID_SIZE as i32;
        Cell::new(
            (self.row as i32 + dr).rem_euclid(n) as usize,
            (self.col as i32 + dc).rem_euclid(n) as usize,
        )
    }

    /// Bounded move used by objects; `None` when it would leave the grid.
    pub fn bounded(self, a: Action) -> Option<Cell> {
        let (dr, dc) = a.delta();
        let (r, c) = (self.row as i32 + dr, self.col as i32 + dc);
        let n = GRID_SIZE as i32;
        ((0..n).contains(&r) && (0..n).contains(&c)).then(|| Cell::new(r as usize, c as usize))
    }

    fn flat(self) -> usize {
        self.row * GRID_SIZE + self.col
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridConfig {
    pub max_steps: usize,
    pub min_enemy_spawn_distance: usize,
    pub roles: Roles,
}

impl GridConfig {
    pub fn new(roles: Roles) -> Self {
        GridConfig {
            max_steps: 100,
            min_enemy_spawn_distance: 4,
            roles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        // Two cells at Manhattan distance 28 exist only in opposite corners.
        if self.min_enemy_spawn_distance > 2 * (GRID_SIZE - 1) {
            return Err(Error::Config(format!(
                "min_enemy_spawn_distance {} cannot be met on a {GRID_SIZE}x{GRID_SIZE} grid",
                self.min_enemy_spawn_distance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorldObject {
    pub cell: Cell,
    pub alive: bool,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub agent: Cell,
    pub objects: [WorldObject; 3],
    pub step_count: usize,
    pub max_steps: usize,
    pub finished: bool,
    rng: ChaCha8Rng,
}

/// Per-color flags raised during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventSet {
    pub collected: [bool; 3],
    pub colliding: [bool; 3],
}

impl EventSet {
    pub fn any(&self) -> bool {
        self.collected.iter().chain(&self.colliding).any(|&b| b)
    }
}

/// 15×15 grayscale image, row-major, values in the fixed palette.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(pub [f32; NUM_CELLS]);

impl Observation {
    pub fn pixels(&self) -> &[f32] {
        &self.0
    }

    pub fn at(&self, cell: Cell) -> f32 {
        self.0[cell.flat()]
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub events: EventSet,
    pub truncated: bool,
}

/// Places the agent and three objects on distinct cells; enemies keep the minimum
/// spawn distance from the agent.
pub fn reset(config: &GridConfig, seed: u64) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_cell =
        |rng: &mut ChaCha8Rng| Cell::new(rng.gen_range(0..GRID_SIZE), rng.gen_range(0..GRID_SIZE));
    loop {
        let agent = random_cell(&mut rng);
        let cells = [
            random_cell(&mut rng),
            random_cell(&mut rng),
            random_cell(&mut rng),
        ];
        let mut all = vec![agent];
        all.extend_from_slice(&cells);
        all.sort();
        all.dedup();
        if all.len() != 4 {
            continue;
        }
        let far_enough = Color::ALL.iter().all(|c| {
            config.roles[c.index()] != Role::Enemy
                || cells[c.index()].manhattan(agent) >= config.min_enemy_spawn_distance
        });
        if !far_enough {
            continue;
        }
        let objects = Color::ALL.map(|c| WorldObject {
            cell: cells[c.index()],
            alive: true,
            role: config.roles[c.index()],
        });
        return WorldState {
            agent,
            objects,
            step_count: 0,
            max_steps: config.max_steps,
            finished: false,
            rng,
        };
    }
}

impl WorldState {
    /// Builds a state directly, for tests and scripted scenarios.
    pub fn from_parts(agent: Cell, objects: [WorldObject; 3], max_steps: usize) -> Self {
        WorldState {
            agent,
            objects,
            step_count: 0,
            max_steps,
            finished: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn object(&self, c: Color) -> &WorldObject {
        &self.objects[c.index()]
    }

    /// Marks the episode finished; later calls to [`step`](Self::step) are rejected.
    pub fn finish(&mut self) {
        self.finished = true;
    }

    pub fn render(&self) -> Observation {
        render(self)
    }

    /// One tick: agent move, collection, enemy chase, collision, counter.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.finished {
            return Err(Error::Usage("step called on a finished episode".into()));
        }
        let mut events = agent_move(self, action);
        enemy_step(self);
        for c in Color::ALL {
            let o = self.object(c);
            if o.alive && o.cell == self.agent && o.role == Role::Enemy {
                events.colliding[c.index()] = true;
            }
        }
        self.step_count += 1;
        let truncated = self.step_count >= self.max_steps;
        if truncated {
            self.finished = true;
        }
        Ok(StepResult {
            observation: self.render(),
            events,
            truncated,
        })
    }

    /// Deterministic stream of uniform draws tied to the episode seed.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draw priority on overlap: agent > red > green > blue. Dead objects are not drawn.
pub fn render(state: &WorldState) -> Observation {
    let mut img = [EMPTY_INTENSITY; NUM_CELLS];
    for c in Color::ALL.iter().rev() {
        let o = state.object(*c);
        if o.alive {
            img[o.cell.flat()] = c.intensity();
        }
    }
    img[state.agent.flat()] = AGENT_INTENSITY;
    Observation(img)
}

/// Moves the agent one cell with wrap-around and collects an alive target on arrival.
pub fn agent_move(state: &mut WorldState, action: Action) -> EventSet {
    state.agent = state.agent.wrapped(action);
    let mut events = EventSet::default();
    for c in Color::ALL {
        let o = &mut state.objects[c.index()];
        if o.alive && o.role == Role::Target && o.cell == state.agent {
            o.alive = false;
            events.collected[c.index()] = true;
        }
    }
    events
}

/// Shortest 4-connected path length without wrapping and the first move of the
/// lexicographically-first shortest path (Up < Down < Left < Right).
pub fn bfs_distance_and_step(origin: Cell, goal: Cell) -> (usize, Option<Action>) {
    let dist = bfs_field(goal);
    let d = dist[origin.flat()];
    if d == 0 {
        return (0, None);
    }
    let step = Action::ALL
        .into_iter()
        .find(|&a| origin.bounded(a).is_some_and(|n| dist[n.flat()] + 1 == d));
    (d, step)
}

/// Breadth-first distances from `goal` to every cell on the bounded grid.
fn bfs_field(goal: Cell) -> [usize; NUM_CELLS] {
    let mut dist = [usize::MAX; NUM_CELLS];
    let mut queue = VecDeque::with_capacity(NUM_CELLS);
    dist[goal.flat()] = 0;
    queue.push_back(goal);
    while let Some(c) = queue.pop_front() {
        let d = dist[c.flat()];
        for a in Action::ALL {
            if let Some(n) = c.bounded(a) {
                if dist[n.flat()] == usize::MAX {
                    dist[n.flat()] = d + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Moves each alive enemy one cell toward the agent, in color order.
pub fn enemy_step(state: &mut WorldState) {
    let agent = state.agent;
    let mut field = None;
    for c in Color::ALL {
        let o = &mut state.objects[c.index()];
        if !o.alive || o.role != Role::Enemy || o.cell == agent {
            continue;
        }
        let dist = field.get_or_insert_with(|| bfs_field(agent));
        let d = dist[o.cell.flat()];
        if let Some(next) = Action::ALL
            .into_iter()
            .filter_map(|a| o.cell.bounded(a))
            .find(|n| dist[n.flat()] + 1 == d)
        {
            o.cell = next;
        }
    }
}

/// One line per tick: step, agent cell, per-object (cell, alive, role), events.
pub fn trace_line(state: &WorldState, events: &EventSet) -> String {
    let mut line = format!("{} agent={}", state.step_count, state.agent);
    for c in Color::ALL {
        let o = state.object(c);
        line.push_str(&format!(
            " {}={}:{}:{}",
            c,
            o.cell,
            u8::from(o.alive),
            o.role
        ));
    }
    let mut ev = Vec::new();
    for c in Color::ALL {
        if events.collected[c.index()] {
            ev.push(format!("collect_{c}"));
        }
        if events.colliding[c.index()] {
            ev.push(format!("collide_{c}"));
        }
    }
    line.push_str(" events=");
    line.push_str(if ev.is_empty() { "-" } else { "" });
    line.push_str(&ev.join(","));
    line
}

#[cfg(test)]
mod tests;
