pub mod contexts;
pub mod ctxeq;
pub mod error;
pub mod parse;
pub mod reduction;
pub mod stdlib;
pub mod syntax;
pub mod lts;
pub mod bisim;
pub mod lamshift;
pub mod gen;
