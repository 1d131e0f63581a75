//! The guide chapters, embedded so that every code sample in the book
//! compiles and runs under `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grid-and-spectra.md")]
pub mod grid_and_spectra {}

#[doc = include_str!("../../../book/src/smoothing-kernel.md")]
pub mod smoothing_kernel {}

#[doc = include_str!("../../../book/src/two-forms.md")]
pub mod two_forms {}

#[doc = include_str!("../../../book/src/time-stepping.md")]
pub mod time_stepping {}

#[doc = include_str!("../../../book/src/flow-map.md")]
pub mod flow_map {}

#[doc = include_str!("../../../book/src/measuring-decay.md")]
pub mod measuring_decay {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
