//! Configuration, experiment drivers and report files for `affwalk-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
