//! Multi-program layout synthesis for dynamically reconfigurable neutral-atom
//! arrays.
//!
//! Pipeline: parse circuits ([`circuit`]), assign them to arrays and start
//! times ([`placer`]), compile each array's circuits one after another against
//! the atoms already committed there ([`compiler`], [`array`]), check the
//! result independently ([`validator`]), and compare against single-program
//! baselines ([`baseline`], [`bench`]).

pub mod array;
pub mod baseline;
pub mod bench;
pub mod circuit;
pub mod compiler;
pub mod placer;
pub mod solver;
pub mod validator;
