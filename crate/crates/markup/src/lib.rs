//! The portal's text-and-formula markup: plain paragraphs with inline
//! `$...$` math written in a small LaTeX-like command set, rendered to HTML
//! with MathML or to plain text.
//!
//! ```
//! use belnet_markup::{parse, Target};
//!
//! let doc = parse("$\\alpha$-decay").unwrap();
//! assert_eq!(doc.render(Target::PlainText), "α-decay");
//! ```

mod ast;
mod error;
mod parser;
mod render;
pub mod symbols;
mod token;

pub use ast::{Document, MarkupNode};
pub use error::{ParseError, Position};
pub use parser::{parse, MAX_DEPTH};
pub use render::{escape_html, render, render_document, Target};
pub use token::{tokenize, Token, TokenKind};
