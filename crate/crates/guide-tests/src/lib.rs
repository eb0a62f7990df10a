//! Doc-test harness for the book in `book/`.
//!
//! mdbook renders the chapters but cannot compile their code blocks
//! against this workspace; rustdoc can.  Including each chapter as the
//! documentation of an empty module makes `cargo test` build and run
//! every ```` ```rust ```` block in the guide, so the prose and the
//! library cannot drift apart.  One module per chapter keeps test
//! failures attributable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/forms.md")]
pub mod forms {}

#[doc = include_str!("../../../book/src/class-numbers.md")]
pub mod class_numbers {}

#[doc = include_str!("../../../book/src/traces-cm.md")]
pub mod traces_cm {}

#[doc = include_str!("../../../book/src/traces-series.md")]
pub mod traces_series {}

#[doc = include_str!("../../../book/src/exact-expansions.md")]
pub mod exact_expansions {}

#[doc = include_str!("../../../book/src/kloosterman.md")]
pub mod kloosterman {}

#[doc = include_str!("../../../book/src/weight-two.md")]
pub mod weight_two {}

#[doc = include_str!("../../../book/src/recognition.md")]
pub mod recognition {}

#[doc = include_str!("../../../book/src/integrality-exception.md")]
pub mod integrality_exception {}

#[doc = include_str!("../../../book/src/inner-products.md")]
pub mod inner_products {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
