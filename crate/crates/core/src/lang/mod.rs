//! Shared syntax, values and memories of the four language levels.

pub mod analysis;
pub mod ast;
pub mod memory;
pub mod value;

pub use analysis::{is_well_formed, proj_cmd, proj_expr, updated_vars, Vars};
pub use ast::{BinOp, Cmd, Expr, Ident, Side, UnOp};
pub use memory::{
    merge_mem, merge_sym_mem, ConcMem, HasRole, Memory, ProjView, RelConcMem, RelSymMem, Role,
    SymMem, SymView,
};
pub use value::{ConcArray, Rel, Scalar, Sort, Sym, SymArray, SymGen};
