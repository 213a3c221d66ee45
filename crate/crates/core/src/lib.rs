//! Exact jet algebra, symmetry checks, power-law maps, and a 1D integrator
//! for anomalous diffusion and reaction-diffusion equations.

pub mod catalog;
pub mod equation;
pub mod fit;
pub mod front;
pub mod flow;
pub mod jet;
pub mod map;
pub mod rational;
pub mod solver;
pub mod symmetry;

pub use equation::EvolutionEquation;
pub use jet::{Chart, Deriv, Dir, JetPoint, JetPoly, VectorField};
pub use rational::{q, Rational};
