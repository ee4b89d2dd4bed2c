//! Exact verification tools for group actions on median pretrees and real trees.

pub mod actions;
pub mod cli;
pub mod conjugacy;
pub mod ends;
pub mod f2_lab;
pub mod flows;
pub mod metrize;
pub mod pretree_core;
pub mod rational;
pub mod tree_model;
