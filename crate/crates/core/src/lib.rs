pub mod counting;
pub mod error;
pub mod field;
pub mod frft;
pub mod geometry;
pub mod green;
pub mod io;
pub mod oscillator;
pub mod propagate;
pub mod scenario;

pub use error::{Error, Result};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/frft.md")]
    mod frft {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/oscillator.md")]
    mod oscillator {}
    #[doc = include_str!("../../../book/src/green.md")]
    mod green {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
