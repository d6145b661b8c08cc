//! Concrete syntax: lexer, parser, pretty-printer and name analysis.

pub mod ast;
pub mod lexer;
pub mod names;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use names::free_names;
pub use parser::{parse_module, parse_network, parse_network_in, parse_program, parse_value, ParseError, ParseErrorKind};
