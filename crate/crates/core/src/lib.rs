pub mod demand;
pub mod config;
pub mod error;
pub mod formulation;
pub mod model;
pub mod moo;
pub mod report;
