//! Resource accounting and simulation for photonic resource-state generators.
//!
//! * [`model`]: sources, multiplexing schemes and the config format.
//! * [`bounds`]: photon budgets, optical depth and loss budgets under perfect sharing.
//! * [`heralded`]: heralded single-photon sources under a multi-photon error budget.
//! * [`sharing`]: count distributions through finite, lossy modules.
//! * [`optimizer`]: module size and count minimizing sources at a given loss.
//! * [`rus`]: seeded Monte Carlo of repeat-until-success spin modules.
//! * [`graph`]: local complementation, Pauli measurement and gate scheduling.
//!
//! The guide in `book/` walks through each module; its code blocks run as
//! doc-tests of this crate.
//!
//! ```
//! use rsg_core::bounds::n_avg;
//! use rsg_core::model::builtin_scheme;
//!
//! let cost = n_avg(&builtin_scheme("caterpillar", 2)?)?;
//! assert!(cost.eta_r_max > 0.08);
//! # Ok::<(), rsg_core::Error>(())
//! ```

// `!(v > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod graph;
pub mod heralded;
pub mod model;
pub mod optimizer;
pub mod rus;
pub mod sharing;

pub use error::{Error, Result};

// One module per chapter so a failing doc-test names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/heralded.md")]
    mod heralded {}
    #[doc = include_str!("../../../book/src/sharing.md")]
    mod sharing {}
    #[doc = include_str!("../../../book/src/tradeoff.md")]
    mod tradeoff {}
    #[doc = include_str!("../../../book/src/rus.md")]
    mod rus {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
