//! Finite-level group rings over two-prime towers, refined Mazur–Tate
//! style families and Fitting ideals, with exact arithmetic modulo `p^N`.
//!
//! The guide in `book/` walks through each layer; its code blocks run as
//! doctests of this crate.

pub mod error;
pub mod fitting;
pub mod group;
pub mod group_ring;
pub mod linalg;
pub mod padic;
pub mod pipeline;
pub mod refinement;
pub mod theta;
pub mod tower;

pub use error::{Error, Result};
pub use group::{FiniteAbelianGroup, GroupHom};
pub use padic::{PadicContext, PadicInt};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/padics.md")]
    mod padics {}
    #[doc = include_str!("../../../book/src/group-rings.md")]
    mod group_rings {}
    #[doc = include_str!("../../../book/src/tower.md")]
    mod tower {}
    #[doc = include_str!("../../../book/src/refinement.md")]
    mod refinement {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
