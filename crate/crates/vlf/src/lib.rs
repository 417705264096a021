//! Vessel location forecasting from AIS streams.
//!
//! The pipeline runs in stages: raw AIS records are cleaned into trajectories
//! (`ingest`), turned into windowed first-order-difference features
//! (`features`), fed to a recurrent forecasting model trained from scratch
//! (`nn`), optionally trained across data silos without moving raw data
//! (`fed`), and scored by horizon-bucketed displacement error (`eval`).
//! `synth` generates small seeded corpora for smoke tests and demos.

pub mod eval;
pub mod features;
pub mod fed;
pub mod ingest;
pub mod nn;
pub mod synth;
