//! The s-pebble game as a safety game, solved by greatest-fixed-point
//! elimination over partial isomorphisms with at most `s` pairs.

use std::collections::HashMap;

use super::{Dense, ExpandedStructure, GameError, Side, Winner};
use crate::structure::Element;

/// Pebbled pairs `(a, b)`, sorted.
pub type Position = Vec<(Element, Element)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebbleOutcome {
    pub winner: Winner,
    /// Positions from which the duplicator survives forever, sorted.
    pub region: Vec<Position>,
    /// When the spoiler wins: a first placement no reply survives.
    pub spoiler_opening: Option<(Side, Element)>,
}

pub(crate) struct PebbleGraph {
    positions: Vec<Position>,
    /// For each position of size `< s` and each element of each side (A
    /// elements first, then B): the positions reached by pebbling it.
    replies: Vec<Vec<Vec<usize>>>,
    /// Positions of size `s - 1` or less that a position can drop to.
    drops: Vec<Vec<usize>>,
    s: usize,
    na: usize,
}

impl PebbleGraph {
    pub(crate) fn build(a: &Dense, b: &Dense, s: usize) -> Self {
        let (na, nb) = (a.size(), b.size());
        let mut positions: Vec<Position> = vec![Vec::new()];
        let mut ids: HashMap<Position, usize> = HashMap::from([(Vec::new(), 0)]);
        let mut level = vec![0usize];
        for _ in 0..s {
            let mut next = Vec::new();
            for &p in &level {
                let base = positions[p].clone();
                let mut abar: Vec<Element> = base.iter().map(|&(x, _)| x).collect();
                let mut bbar: Vec<Element> = base.iter().map(|&(_, y)| y).collect();
                for x in 0..na {
                    if abar.contains(&x) {
                        continue;
                    }
                    for y in 0..nb {
                        if bbar.contains(&y) {
                            continue;
                        }
                        abar.push(x);
                        bbar.push(y);
                        let ok = a.atomic_type(&abar) == b.atomic_type(&bbar);
                        abar.pop();
                        bbar.pop();
                        if !ok {
                            continue;
                        }
                        let mut q = base.clone();
                        q.push((x, y));
                        q.sort_unstable();
                        if !ids.contains_key(&q) {
                            ids.insert(q.clone(), positions.len());
                            next.push(positions.len());
                            positions.push(q);
                        }
                    }
                }
            }
            level = next;
        }

        let mut replies = vec![Vec::new(); positions.len()];
        for (id, p) in positions.iter().enumerate() {
            if p.len() >= s {
                continue;
            }
            let mut table = vec![Vec::new(); na + nb];
            for (slot, list) in table.iter_mut().enumerate() {
                let (side, e) = if slot < na { (Side::A, slot) } else { (Side::B, slot - na) };
                let pebbled = p.iter().any(|&(x, y)| match side {
                    Side::A => x == e,
                    Side::B => y == e,
                });
                if pebbled {
                    // re-pebbling a pebbled element is answered by its partner
                    list.push(id);
                    continue;
                }
                let other = match side {
                    Side::A => nb,
                    Side::B => na,
                };
                for f in 0..other {
                    let pair = match side {
                        Side::A => (e, f),
                        Side::B => (f, e),
                    };
                    let mut q = p.clone();
                    q.push(pair);
                    q.sort_unstable();
                    if let Some(&qid) = ids.get(&q) {
                        list.push(qid);
                    }
                }
            }
            replies[id] = table;
        }

        let drops = positions
            .iter()
            .map(|p| {
                (0..p.len())
                    .map(|i| {
                        let mut q = p.clone();
                        q.remove(i);
                        ids[&q]
                    })
                    .collect()
            })
            .collect();
        PebbleGraph {
            positions,
            replies,
            drops,
            s,
            na,
        }
    }

    /// Survivors of the elimination; `alive[0]` is the empty position.
    pub(crate) fn solve(&self) -> Vec<bool> {
        let count = self.positions.len();
        let mut alive = vec![true; count];
        loop {
            let answerable: Vec<bool> = (0..count)
                .map(|p| {
                    self.positions[p].len() >= self.s
                        || self.replies[p]
                            .iter()
                            .all(|list| list.iter().any(|&q| alive[q]))
                })
                .collect();
            let mut changed = false;
            for p in 0..count {
                if !alive[p] {
                    continue;
                }
                let placing_ok = self.positions[p].len() >= self.s || answerable[p];
                let moving_ok = self.drops[p].iter().all(|&q| answerable[q]);
                if !(placing_ok && moving_ok) {
                    alive[p] = false;
                    changed = true;
                }
            }
            if !changed {
                return alive;
            }
        }
    }

    pub(crate) fn opening(&self, alive: &[bool]) -> Option<(Side, Element)> {
        self.replies[0]
            .iter()
            .position(|list| !list.iter().any(|&q| alive[q]))
            .map(|slot| {
                if slot < self.na {
                    (Side::A, slot)
                } else {
                    (Side::B, slot - self.na)
                }
            })
    }
}

/// Solves the s-pebble game on the two expansions.
pub fn pebble_game_winner(
    a: &ExpandedStructure,
    b: &ExpandedStructure,
    s: usize,
) -> Result<PebbleOutcome, GameError> {
    a.shape_matches(b)?;
    if s == 0 {
        return Err(GameError::BadParams("s must be at least 1".into()));
    }
    let graph = PebbleGraph::build(&Dense::of(a), &Dense::of(b), s);
    let alive = graph.solve();
    let winner = if alive[0] {
        Winner::Duplicator
    } else {
        Winner::Spoiler
    };
    let mut region: Vec<Position> = graph
        .positions
        .iter()
        .zip(&alive)
        .filter(|(_, &ok)| ok)
        .map(|(p, _)| p.clone())
        .collect();
    region.sort();
    let spoiler_opening = match winner {
        Winner::Spoiler => graph.opening(&alive),
        Winner::Duplicator => None,
    };
    Ok(PebbleOutcome {
        winner,
        region,
        spoiler_opening,
    })
}

/// The winner only, from dense tables (used inside the relation-move search).
pub(crate) fn pebble_winner_dense(a: &Dense, b: &Dense, s: usize) -> Winner {
    let graph = PebbleGraph::build(a, b, s);
    if graph.solve()[0] {
        Winner::Duplicator
    } else {
        Winner::Spoiler
    }
}
