//! Mapping degrees between the two principal SU(2)-bundles over S⁵, the
//! product S³×S⁵ and SU(3).

pub mod cohomology;
pub mod degree;
pub mod error;
pub mod manifold;
pub mod maps;
pub mod properties;
pub mod report;
pub mod scalar;
pub mod theorem;

pub use error::{Error, Result};

// The book chapters, compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/manifolds.md")]
    mod manifolds {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/degrees.md")]
    mod degrees {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
