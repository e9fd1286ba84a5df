//! Finite structures, fixed-point logic with log-bounded second-order
//! quantifiers, structure encodings, interpretations and
//! Ehrenfeucht–Fraïssé games.

pub mod eval;
pub mod formula;
pub mod structure;
pub mod encode;
pub mod interp;
pub mod game;
pub mod cli;
