//! Verification toolkit for the two-dimensional Dirac operator with external
//! fields on a spin manifold.

#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod clifford;
pub mod config;
pub mod conditions;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod jet;
pub mod operators;
pub mod report;
pub mod separation;
pub mod verify;
