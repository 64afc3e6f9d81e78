//! Course timetabling as mixed-integer programming: instance model, data
//! ingest, subgroup generation, timetable model construction, an exact
//! solver, validation and synthetic instance generation.

#![allow(clippy::needless_range_loop)]

pub mod gen;
pub mod ingest;
pub mod mipcore;
pub mod model;
pub mod report;
pub mod subgroup;
pub mod tip;
pub mod validate;
