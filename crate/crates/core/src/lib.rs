//! Dimer models with Fock weights on minimal bipartite graphs, for M-curves given
//! by Schottky uniformization, together with their degeneration limits.

pub mod error;
pub mod moebius;
pub mod schottky;
pub mod abelian;
pub mod theta;
pub mod graph;
pub mod quadrature;
pub mod fock;

pub use error::{Error, Result};
pub mod degeneration;
