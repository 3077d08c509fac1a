//! Doctest harness for the guide in `book/`.
//!
//! mdbook does not run a book's code blocks as tests, so each chapter is
//! included here as a module's documentation and `cargo test --doc` runs
//! every `rust` snippet. A failing snippet names its chapter module.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/divisions.md")]
pub mod divisions {}

#[doc = include_str!("../../../book/src/moving-phantoms.md")]
pub mod moving_phantoms_chapter {}

#[doc = include_str!("../../../book/src/independent-markets.md")]
pub mod independent_markets {}

#[doc = include_str!("../../../book/src/welfare.md")]
pub mod welfare {}

#[doc = include_str!("../../../book/src/axioms.md")]
pub mod axioms {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
