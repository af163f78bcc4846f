use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn roles(r: Role, g: Role, b: Role) -> Roles {
    [r, g, b]
}

fn obj(row: usize, col: usize, role: Role) -> WorldObject {
    WorldObject {
        cell: Cell::new(row, col),
        alive: true,
        role,
    }
}

/// Second BFS, run forward from the origin, returning the distance to `goal` and the
/// lexicographically smallest shortest action sequence found by depth-first refinement.
fn oracle_bfs(origin: Cell, goal: Cell) -> (usize, Option<Action>) {
    let mut seen = std::collections::HashMap::new();
    let mut q = VecDeque::new();
    seen.insert(origin, 0usize);
    q.push_back(origin);
    while let Some(c) = q.pop_front() {
        for a in Action::ALL {
            if let Some(n) = c.bounded(a) {
                if !seen.contains_key(&n) {
                    seen.insert(n, seen[&c] + 1);
                    q.push_back(n);
                }
            }
        }
    }
    let d = seen[&goal];
    if d == 0 {
        return (0, None);
    }
    // first move of the lexicographically first path: any move that keeps a shortest route
    let first = Action::ALL.into_iter().find(|&a| {
        origin
            .bounded(a)
            .is_some_and(|n| n.manhattan(goal) + 1 == d)
    });
    (d, first)
}

#[test]
fn reset_is_deterministic() {
    let cfg = GridConfig::new(roles(Role::Target, Role::Enemy, Role::Bystander));
    assert_eq!(reset(&cfg, 99), reset(&cfg, 99));
}

#[test]
fn reset_respects_spawn_constraints() {
    let cfg = GridConfig::new(roles(Role::Bystander, Role::Enemy, Role::Target));
    let mut min_d = usize::MAX;
    for seed in 0..10_000 {
        let s = reset(&cfg, seed);
        let mut cells = vec![s.agent];
        cells.extend(s.objects.iter().map(|o| o.cell));
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 4, "seed {seed}");
        min_d = min_d.min(s.object(Color::Green).cell.manhattan(s.agent));
        assert_eq!(s.step_count, 0);
    }
    assert!(min_d >= 4);
}

#[test]
fn render_single_agent_pixel() {
    let mut objects = [
        obj(3, 3, Role::Target),
        obj(4, 4, Role::Target),
        obj(5, 5, Role::Target),
    ];
    objects.iter_mut().for_each(|o| o.alive = false);
    let s = WorldState::from_parts(Cell::new(0, 0), objects, 100);
    let img = s.render();
    assert_eq!(img.at(Cell::new(0, 0)), 1.0);
    assert_eq!(img.pixels().iter().filter(|&&v| v != 0.0).count(), 1);
}

#[test]
fn render_palette_and_disappearance() {
    let objects = [
        obj(3, 3, Role::Target),
        obj(4, 4, Role::Target),
        obj(5, 5, Role::Target),
    ];
    let mut s = WorldState::from_parts(Cell::new(0, 0), objects, 100);
    let img = s.render();
    assert_eq!(img.at(Cell::new(3, 3)), 0.3);
    assert_eq!(img.at(Cell::new(4, 4)), 0.5);
    assert_eq!(img.at(Cell::new(5, 5)), 0.7);
    s.objects[0].alive = false;
    assert!(s.render().pixels().iter().all(|&v| v != 0.3));
}

#[test]
fn enemy_on_agent_cell_renders_agent() {
    // green enemy adjacent to the agent steps onto it
    let objects = [
        obj(9, 9, Role::Bystander),
        obj(7, 8, Role::Enemy),
        obj(1, 1, Role::Bystander),
    ];
    let mut s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    enemy_step(&mut s);
    assert_eq!(s.object(Color::Green).cell, s.agent);
    assert_eq!(s.render().at(s.agent), 1.0);
}

#[test]
fn render_overlap_priority_red_over_blue() {
    let objects = [
        obj(2, 2, Role::Enemy),
        obj(9, 9, Role::Bystander),
        obj(2, 2, Role::Enemy),
    ];
    let s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    assert_eq!(s.render().at(Cell::new(2, 2)), 0.3);
}

#[test]
fn agent_wraps_but_objects_do_not() {
    let objects = [
        obj(9, 9, Role::Bystander),
        obj(10, 10, Role::Bystander),
        obj(11, 11, Role::Bystander),
    ];
    let mut s = WorldState::from_parts(Cell::new(0, 7), objects, 100);
    agent_move(&mut s, Action::Up);
    assert_eq!(s.agent, Cell::new(14, 7));
    let mut s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    agent_move(&mut s, Action::Right);
    assert_eq!(s.agent, Cell::new(7, 8));
    assert_eq!(Cell::new(0, 3).bounded(Action::Up), None);
    assert_eq!(
        bfs_distance_and_step(Cell::new(0, 0), Cell::new(0, 14)).0,
        14
    );
}

#[test]
fn agent_collects_target() {
    let objects = [
        obj(7, 8, Role::Target),
        obj(10, 10, Role::Bystander),
        obj(11, 11, Role::Bystander),
    ];
    let mut s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    let ev = agent_move(&mut s, Action::Right);
    assert!(!s.object(Color::Red).alive);
    assert!(ev.collected[0]);
    assert!(!ev.collected[1] && !ev.collected[2]);
}

#[test]
fn bfs_matches_independent_oracle() {
    assert_eq!(
        bfs_distance_and_step(Cell::new(4, 4), Cell::new(4, 4)),
        (0, None)
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let a = Cell::new(rng.gen_range(0..GRID_SIZE), rng.gen_range(0..GRID_SIZE));
        let b = Cell::new(rng.gen_range(0..GRID_SIZE), rng.gen_range(0..GRID_SIZE));
        assert_eq!(bfs_distance_and_step(a, b), oracle_bfs(a, b), "{a} -> {b}");
    }
}

#[test]
fn bfs_tie_break_prefers_up_then_down_then_left() {
    // goal up-left: both Up and Left shorten the path, Up wins
    assert_eq!(
        bfs_distance_and_step(Cell::new(5, 5), Cell::new(2, 2)).1,
        Some(Action::Up)
    );
    // goal down-left: Down beats Left
    assert_eq!(
        bfs_distance_and_step(Cell::new(5, 5), Cell::new(8, 2)).1,
        Some(Action::Down)
    );
    assert_eq!(
        bfs_distance_and_step(Cell::new(5, 5), Cell::new(5, 9)).1,
        Some(Action::Right)
    );
}

#[test]
fn enemy_closes_one_cell_per_tick() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = GridConfig::new(roles(Role::Enemy, Role::Enemy, Role::Bystander));
    for seed in 0..200 {
        let mut s = reset(&cfg, seed);
        for _ in 0..30 {
            if s.finished {
                break;
            }
            let action = Action::from_index(rng.gen_range(0..4));
            let before: Vec<_> = s.objects.iter().map(|o| o.cell).collect();
            agent_move(&mut s, action);
            let d_before: Vec<usize> = before.iter().map(|c| oracle_bfs(*c, s.agent).0).collect();
            enemy_step(&mut s);
            for c in [Color::Red, Color::Green] {
                let d_after = oracle_bfs(s.object(c).cell, s.agent).0;
                let d0 = d_before[c.index()];
                assert_eq!(d_after, d0.saturating_sub(1));
            }
            assert_eq!(s.object(Color::Blue).cell, before[2]);
        }
    }
}

#[test]
fn collision_flagged_when_agent_steps_onto_enemy() {
    let objects = [
        obj(7, 8, Role::Enemy),
        obj(10, 10, Role::Bystander),
        obj(11, 11, Role::Bystander),
    ];
    let mut s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    let r = s.step(Action::Right).unwrap();
    assert!(r.events.colliding[0]);
    assert!(!r.truncated);
}

#[test]
fn collect_happens_before_chase() {
    // target one step right, enemy two steps away: collection registers the same tick
    let objects = [
        obj(7, 8, Role::Target),
        obj(7, 10, Role::Enemy),
        obj(0, 0, Role::Bystander),
    ];
    let mut s = WorldState::from_parts(Cell::new(7, 7), objects, 100);
    let r = s.step(Action::Right).unwrap();
    assert!(r.events.collected[0]);
    assert!(!r.events.colliding[1]);
    assert_eq!(s.object(Color::Green).cell, Cell::new(7, 9));
}

#[test]
fn truncation_and_finished_episode() {
    let cfg = GridConfig::new(roles(Role::Bystander, Role::Bystander, Role::Bystander));
    let mut s = reset(&cfg, 3);
    for t in 1..=100 {
        let r = s.step(Action::Left).unwrap();
        assert_eq!(r.truncated, t == 100);
    }
    assert!(matches!(s.step(Action::Left), Err(crate::Error::Usage(_))));
}

#[test]
fn step_trace_is_deterministic() {
    let cfg = GridConfig::new(roles(Role::Target, Role::Enemy, Role::Enemy));
    let run = || {
        let mut s = reset(&cfg, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut lines = Vec::new();
        while !s.finished {
            let r = s.step(Action::from_index(rng.gen_range(0..4))).unwrap();
            lines.push(trace_line(&s, &r.events));
            if r.events.colliding.iter().any(|&c| c) {
                s.finish();
            }
        }
        lines
    };
    assert_eq!(run(), run());
}

#[test]
fn palette_decoding_recovers_alive_entities() {
    let cfg = GridConfig::new(roles(Role::Target, Role::Bystander, Role::Enemy));
    for seed in 0..500 {
        let s = reset(&cfg, seed);
        let img = s.render();
        assert_eq!(img.at(s.agent), 1.0);
        for c in Color::ALL {
            let pos: Vec<usize> = img
                .pixels()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == c.intensity())
                .map(|(i, _)| i)
                .collect();
            let o = s.object(c);
            assert_eq!(pos, vec![o.cell.row * GRID_SIZE + o.cell.col]);
        }
    }
}
