// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod derived;
pub mod materials;
pub mod schrodinger_poisson;
pub mod stack;
mod text;
pub mod trap_dynamics;
