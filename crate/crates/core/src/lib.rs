//! Offline multi-agent inspection planning over a coverage roadmap.
//!
//! The pipeline voxelizes a known structure, samples via-points and path primitives in
//! the feasible viewing shell around it, records the surface patches each primitive sees,
//! and then searches for `K` walks from a shared depot whose joint coverage meets a
//! required ratio while the longest walk is as short as possible.

pub mod app;
pub mod cprm;
pub mod geometry;
pub mod scenes;
pub mod solver;
pub mod visibility;
