// mdbook cannot run snippets that depend on a workspace crate, so each
// chapter is pulled in as module docs and `cargo test --doc` runs them.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/special-functions.md")]
pub mod special_functions {}
#[doc = include_str!("../../../book/src/fading.md")]
pub mod fading {}
#[doc = include_str!("../../../book/src/link-performance.md")]
pub mod link_performance {}
#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}
#[doc = include_str!("../../../book/src/allocation.md")]
pub mod allocation {}
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
