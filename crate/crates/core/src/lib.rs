//! Optimal Nash and political equilibria in multi-player mean-payoff games.
//!
//! The pipeline: [`mpg`] solves the two-player punishment games, [`equilibrium`]
//! builds and solves the ratio linear program for a region, [`enumeration`]
//! searches regions for the optimum, and [`synthesis`] turns the winning
//! ratios back into an infinite play. [`reductions`] generates hardness
//! instances and derived games; [`bimatrix`] handles the concurrent one-shot
//! case.

pub mod bimatrix;
pub mod enumeration;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod generate;
pub mod lp;
pub mod mpg;
pub mod rational;
pub mod reductions;
pub mod registry;
pub mod synthesis;

pub use error::{Error, Result};
pub use game::{
    lasso_payoff, parse_game, reachable, sccs, serialize_game, validate, EdgeId, Game,
    GameBuilder, GameDocument, LassoPlay, Player, Vertex, VertexSet, Violation,
};
pub use rational::Rational;
