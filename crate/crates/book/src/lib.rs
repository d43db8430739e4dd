//! The chapters of the guide in `book/src`, one module each, so that
//! `cargo test --doc` runs every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/basis.md")]
pub mod basis {}
#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}
#[doc = include_str!("../../../book/src/sieve.md")]
pub mod sieve {}
#[doc = include_str!("../../../book/src/bootstrap.md")]
pub mod bootstrap {}
#[doc = include_str!("../../../book/src/tuning.md")]
pub mod tuning {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
