//! Oracles and generators shared by the integration suites.
#![allow(dead_code)]

pub mod dual;
pub mod grid;
pub mod instances;
