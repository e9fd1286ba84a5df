//! Exact minimax for the game with bounded relation moves followed by the
//! s-pebble game.
//!
//! Pruning, all sound:
//! * the spoiler only uses the smallest `k′` whose bound admits the chosen relation
//!   (a larger `k′` only widens the duplicator's choice);
//! * a duplicator reply is tried only if both expansions realize the same
//!   atomic types of `min(s, 2)`-tuples; otherwise the spoiler pebbles a
//!   tuple whose type is missing on the other side, and later relation
//!   moves can only refine types;
//! * isomorphic expansions are a duplicator win (mirror the isomorphism).

use std::collections::{BTreeSet, HashMap};

use super::pebble::{pebble_game_winner, pebble_winner_dense};
use super::{Dense, ExpandedStructure, GameError, GameParams, Side, Winner, DEFAULT_NODE_BUDGET};
use crate::eval::{count_bounded_relations, log_pow, BoundedRelations};
use crate::structure::{find_isomorphism, Element, Relation, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameOptions {
    pub node_budget: u64,
    /// Let the spoiler end the relation phase at any time instead of
    /// announcing the number of relation moves up front.
    pub stop_early: bool,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            stop_early: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMove {
    pub side: Side,
    pub arity: usize,
    pub k: u32,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptMove {
    /// The spoiler fixes the number of relation moves.
    Announce(usize),
    Spoiler(RelationMove),
    Duplicator(RelationMove),
    /// A pebble placement by the spoiler that no reply survives.
    Pebble { side: Side, element: Element },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOutcome {
    pub winner: Winner,
    /// Spoiler wins: one winning line. Duplicator wins: empty.
    pub line: Vec<TranscriptMove>,
    /// Duplicator wins with `m ≥ 1`: the reply to each first spoiler move
    /// of the longest relation phase.
    pub replies: Vec<(RelationMove, RelationMove)>,
    pub nodes: u64,
}

pub fn game_winner(a: &Structure, b: &Structure, p: GameParams) -> Result<GameOutcome, GameError> {
    game_winner_with(a, b, p, GameOptions::default())
}

pub fn game_winner_with(
    a: &Structure,
    b: &Structure,
    p: GameParams,
    opts: GameOptions,
) -> Result<GameOutcome, GameError> {
    p.check()?;
    ExpandedStructure::bare(a.clone()).shape_matches(&ExpandedStructure::bare(b.clone()))?;
    let mut solver = Solver {
        a,
        b,
        p,
        opts,
        nodes: 0,
        memo: HashMap::new(),
        candidates: HashMap::new(),
    };
    let empty = (Vec::new(), Vec::new());
    let mut line = Vec::new();
    let mut winner = Winner::Duplicator;
    if opts.stop_early {
        if solver.spoiler_wins(&empty.0, &empty.1, p.m)? {
            winner = Winner::Spoiler;
            solver.winning_line(&empty.0, &empty.1, p.m, &mut line)?;
        }
    } else {
        for m in 0..=p.m {
            if solver.spoiler_wins(&empty.0, &empty.1, m)? {
                winner = Winner::Spoiler;
                line.push(TranscriptMove::Announce(m));
                solver.winning_line(&empty.0, &empty.1, m, &mut line)?;
                break;
            }
        }
    }
    let replies = match winner {
        Winner::Duplicator if p.m > 0 => solver.reply_table(p.m)?,
        _ => Vec::new(),
    };
    Ok(GameOutcome {
        winner,
        line,
        replies,
        nodes: solver.nodes,
    })
}

type Extras = Vec<Relation>;
type TypeSet = BTreeSet<Vec<bool>>;

struct Solver<'s> {
    a: &'s Structure,
    b: &'s Structure,
    p: GameParams,
    opts: GameOptions,
    nodes: u64,
    memo: HashMap<(Extras, Extras, usize), bool>,
    /// Minimal-exponent relations per (side, arity, k′).
    candidates: HashMap<(Side, usize, u32), std::rc::Rc<Vec<Relation>>>,
}

impl Solver<'_> {
    fn base(&self, side: Side) -> &Structure {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    fn tick(&mut self, amount: u64) -> Result<(), GameError> {
        self.nodes += amount;
        if self.nodes > self.opts.node_budget {
            Err(GameError::ResourceLimit(self.opts.node_budget))
        } else {
            Ok(())
        }
    }

    fn type_width(&self) -> usize {
        self.p.s.min(2)
    }

    /// Relations of the given arity with more than `L^{k-1}` and at most
    /// `L^k` tuples (every relation for `k = 1`).
    fn candidates(
        &mut self,
        side: Side,
        arity: usize,
        k: u32,
    ) -> Result<std::rc::Rc<Vec<Relation>>, GameError> {
        if let Some(c) = self.candidates.get(&(side, arity, k)) {
            return Ok(c.clone());
        }
        let n = self.base(side).size();
        let bound = log_pow(n, k).expect("nonempty");
        let count = count_bounded_relations(n, arity, bound);
        if count > self.opts.node_budget as u128 {
            return Err(GameError::ResourceLimit(self.opts.node_budget));
        }
        let lower = if k == 1 {
            None
        } else {
            Some(log_pow(n, k - 1).expect("nonempty"))
        };
        let list: Vec<Relation> = BoundedRelations::new(n, arity, bound)
            .filter(|r| lower.is_none_or(|l| r.len() > l))
            .collect();
        let list = std::rc::Rc::new(list);
        self.candidates.insert((side, arity, k), list.clone());
        Ok(list)
    }

    fn dense(&self, side: Side, extras: &[Relation]) -> Dense {
        Dense::new(self.base(side), extras)
    }

    fn isomorphic(&self, ea: &[Relation], eb: &[Relation]) -> bool {
        if self.a.size() != self.b.size() {
            return false;
        }
        let fa = ExpandedStructure::new(self.a.clone(), ea.to_vec()).expect("in range");
        let fb = ExpandedStructure::new(self.b.clone(), eb.to_vec()).expect("in range");
        find_isomorphism(&fa.flatten(), &fb.flatten()).is_some()
    }

    fn spoiler_wins(&mut self, ea: &Extras, eb: &Extras, moves: usize) -> Result<bool, GameError> {
        let key = (ea.clone(), eb.clone(), moves);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        self.tick(1)?;
        let v = self.decide(ea, eb, moves)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn decide(&mut self, ea: &Extras, eb: &Extras, moves: usize) -> Result<bool, GameError> {
        let (da, db) = (self.dense(Side::A, ea), self.dense(Side::B, eb));
        let t = self.type_width();
        if da.type_set(t) != db.type_set(t) {
            return Ok(true);
        }
        if self.isomorphic(ea, eb) {
            return Ok(false);
        }
        let pebble_lost = || pebble_winner_dense(&da, &db, self.p.s) == Winner::Spoiler;
        if moves == 0 {
            return Ok(pebble_lost());
        }
        if self.opts.stop_early && pebble_lost() {
            return Ok(true);
        }
        Ok(self.winning_move(ea, eb, moves)?.is_some())
    }

    /// Duplicator replies on `side` grouped by the type set they produce.
    fn buckets(
        &mut self,
        side: Side,
        extras: &Extras,
        arity: usize,
        k: u32,
    ) -> Result<HashMap<TypeSet, Vec<Relation>>, GameError> {
        let n = self.base(side).size();
        let bound = log_pow(n, k).expect("nonempty");
        let count = count_bounded_relations(n, arity, bound);
        if count > self.opts.node_budget as u128 {
            return Err(GameError::ResourceLimit(self.opts.node_budget));
        }
        self.tick((count / 64) as u64)?;
        let t = self.type_width();
        let mut out: HashMap<TypeSet, Vec<Relation>> = HashMap::new();
        let mut ext = extras.clone();
        for r in BoundedRelations::new(n, arity, bound) {
            ext.push(r);
            let ts = self.dense(side, &ext).type_set(t);
            let r = ext.pop().expect("pushed");
            out.entry(ts).or_default().push(r);
        }
        Ok(out)
    }

    /// The first spoiler move that wins against every reply, if any.
    fn winning_move(
        &mut self,
        ea: &Extras,
        eb: &Extras,
        moves: usize,
    ) -> Result<Option<RelationMove>, GameError> {
        let t = self.type_width();
        for side in [Side::A, Side::B] {
            for arity in 1..=self.p.r {
                for k in 1..=self.p.k {
                    let own = self.candidates(side, arity, k)?;
                    if own.is_empty() {
                        continue;
                    }
                    let replies = self.buckets(side.other(), pick(side.other(), ea, eb), arity, k)?;
                    for r in own.iter() {
                        self.tick(1)?;
                        let mut mine = pick(side, ea, eb).clone();
                        mine.push(r.clone());
                        let ts = self.dense(side, &mine).type_set(t);
                        let mut answered = false;
                        if let Some(bucket) = replies.get(&ts) {
                            for s in bucket {
                                let mut theirs = pick(side.other(), ea, eb).clone();
                                theirs.push(s.clone());
                                let (na, nb) = match side {
                                    Side::A => (&mine, &theirs),
                                    Side::B => (&theirs, &mine),
                                };
                                if !self.spoiler_wins(na, nb, moves - 1)? {
                                    answered = true;
                                    break;
                                }
                            }
                        }
                        if !answered {
                            return Ok(Some(RelationMove {
                                side,
                                arity,
                                k,
                                relation: r.clone(),
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// A reply to `mv` that keeps the duplicator winning, if any.
    fn surviving_reply(
        &mut self,
        ea: &Extras,
        eb: &Extras,
        moves: usize,
        mv: &RelationMove,
    ) -> Result<Option<Relation>, GameError> {
        let t = self.type_width();
        let replies = self.buckets(mv.side.other(), pick(mv.side.other(), ea, eb), mv.arity, mv.k)?;
        let mut mine = pick(mv.side, ea, eb).clone();
        mine.push(mv.relation.clone());
        let ts = self.dense(mv.side, &mine).type_set(t);
        for s in replies.get(&ts).into_iter().flatten() {
            let mut theirs = pick(mv.side.other(), ea, eb).clone();
            theirs.push(s.clone());
            let (na, nb) = match mv.side {
                Side::A => (&mine, &theirs),
                Side::B => (&theirs, &mine),
            };
            if !self.spoiler_wins(na, nb, moves - 1)? {
                return Ok(Some(s.clone()));
            }
        }
        Ok(None)
    }

    /// Extends `line` with a spoiler win from a position the spoiler wins.
    fn winning_line(
        &mut self,
        ea: &Extras,
        eb: &Extras,
        moves: usize,
        line: &mut Vec<TranscriptMove>,
    ) -> Result<(), GameError> {
        let (da, db) = (self.dense(Side::A, ea), self.dense(Side::B, eb));
        let pebble_now = moves == 0
            || self.opts.stop_early && pebble_winner_dense(&da, &db, self.p.s) == Winner::Spoiler
            || da.type_set(self.type_width()) != db.type_set(self.type_width());
        if pebble_now {
            let fa = ExpandedStructure::new(self.a.clone(), ea.clone()).expect("in range");
            let fb = ExpandedStructure::new(self.b.clone(), eb.clone()).expect("in range");
            let out = pebble_game_winner(&fa, &fb, self.p.s)?;
            if let Some((side, element)) = out.spoiler_opening {
                line.push(TranscriptMove::Pebble { side, element });
            }
            return Ok(());
        }
        let mv = self
            .winning_move(ea, eb, moves)?
            .expect("position is a spoiler win");
        line.push(TranscriptMove::Spoiler(mv.clone()));
        // follow the first type-compatible reply; every reply loses
        let t = self.type_width();
        let replies = self.buckets(mv.side.other(), pick(mv.side.other(), ea, eb), mv.arity, mv.k)?;
        let mut mine = pick(mv.side, ea, eb).clone();
        mine.push(mv.relation.clone());
        let ts = self.dense(mv.side, &mine).type_set(t);
        let reply = replies.get(&ts).and_then(|b| b.first()).cloned();
        let reply = match reply {
            Some(s) => s,
            // no reply even matches types: any reply loses in the pebble phase
            None => BoundedRelations::new(
                self.base(mv.side.other()).size(),
                mv.arity,
                log_pow(self.base(mv.side.other()).size(), mv.k).expect("nonempty"),
            )
            .next()
            .expect("the empty relation"),
        };
        line.push(TranscriptMove::Duplicator(RelationMove {
            side: mv.side.other(),
            arity: mv.arity,
            k: mv.k,
            relation: reply.clone(),
        }));
        let mut theirs = pick(mv.side.other(), ea, eb).clone();
        theirs.push(reply);
        let (na, nb) = match mv.side {
            Side::A => (mine, theirs),
            Side::B => (theirs, mine),
        };
        self.winning_line(&na, &nb, moves - 1, line)
    }

    fn reply_table(&mut self, moves: usize) -> Result<Vec<(RelationMove, RelationMove)>, GameError> {
        let empty = Vec::new();
        if self.isomorphic(&empty, &empty) {
            // mirrored replies need no table
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for side in [Side::A, Side::B] {
            for arity in 1..=self.p.r {
                for k in 1..=self.p.k {
                    let own = self.candidates(side, arity, k)?;
                    for r in own.iter() {
                        let mv = RelationMove {
                            side,
                            arity,
                            k,
                            relation: r.clone(),
                        };
                        let reply = self
                            .surviving_reply(&empty, &empty, moves, &mv)?
                            .expect("duplicator wins the position");
                        out.push((
                            mv,
                            RelationMove {
                                side: side.other(),
                                arity,
                                k,
                                relation: reply,
                            },
                        ));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn pick<'e>(side: Side, ea: &'e Extras, eb: &'e Extras) -> &'e Extras {
    match side {
        Side::A => ea,
        Side::B => eb,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let sig = Signature::new([("E", 2)], false).unwrap();
        Structure::new(sig, n, [("E", edges.iter().map(|&(a, b)| vec![a, b]).collect())]).unwrap()
    }

    fn params(m: usize, r: usize, k: u32, s: usize) -> GameParams {
        GameParams::new(m, r, k, s).unwrap()
    }

    #[test]
    fn examples() {
        let out = game_winner(&graph(2, &[(0, 1)]), &graph(2, &[]), params(0, 1, 1, 2)).unwrap();
        assert_eq!(out.winner, Winner::Spoiler);
        assert!(matches!(out.line[..], [TranscriptMove::Announce(0), TranscriptMove::Pebble { .. }]));
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let out = game_winner(&p3, &p3, params(1, 2, 1, 3)).unwrap();
        assert_eq!(out.winner, Winner::Duplicator);
    }

    #[test]
    fn relation_move_separates_sizes() {
        // edgeless 2 vs 3 at s = 1: pebbles alone cannot count, but a unary
        // relation of size 1 leaves one unmarked element in A and two in B;
        // still not visible to one pebble, so the duplicator survives
        let out = game_winner(&graph(2, &[]), &graph(3, &[]), params(1, 1, 1, 1)).unwrap();
        assert_eq!(out.winner, Winner::Duplicator);
        // at s = 2 with the bound 1 vs 2 on each side, the spoiler marks
        // two elements of B; A can mark only one
        let out = game_winner(&graph(2, &[]), &graph(3, &[]), params(1, 1, 1, 2)).unwrap();
        assert_eq!(out.winner, Winner::Spoiler);
    }

    #[test]
    fn zero_moves_is_the_pebble_game() {
        let pairs = [
            (graph(3, &[(0, 1)]), graph(3, &[(1, 2)])),
            (graph(3, &[(0, 1), (1, 0)]), graph(3, &[(0, 1)])),
            (graph(2, &[]), graph(4, &[])),
        ];
        for (a, b) in pairs {
            for s in 1..=3 {
                let g = game_winner(&a, &b, params(0, 1, 1, s)).unwrap().winner;
                let pg = pebble_game_winner(
                    &ExpandedStructure::bare(a.clone()),
                    &ExpandedStructure::bare(b.clone()),
                    s,
                )
                .unwrap()
                .winner;
                assert_eq!(g, pg);
            }
        }
    }

    #[test]
    fn announcing_equals_stopping_early() {
        let pairs = [
            (graph(2, &[]), graph(3, &[])),
            (graph(3, &[(0, 1)]), graph(4, &[(0, 1)])),
            (graph(4, &[]), graph(5, &[])),
            (graph(3, &[(0, 1), (1, 2)]), graph(3, &[(0, 1), (1, 0)])),
        ];
        for (a, b) in pairs {
            for m in 0..=2 {
                for s in 1..=2 {
                    let p = params(m, 1, 1, s);
                    let up_front = game_winner(&a, &b, p).unwrap().winner;
                    let early = game_winner_with(
                        &a,
                        &b,
                        p,
                        GameOptions {
                            stop_early: true,
                            ..GameOptions::default()
                        },
                    )
                    .unwrap()
                    .winner;
                    assert_eq!(up_front, early, "m={m} s={s}");
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let out = game_winner_with(
            &graph(4, &[]),
            &graph(5, &[]),
            params(1, 2, 1, 2),
            GameOptions {
                node_budget: 10,
                stop_early: false,
            },
        );
        assert_eq!(out, Err(GameError::ResourceLimit(10)));
    }
}
