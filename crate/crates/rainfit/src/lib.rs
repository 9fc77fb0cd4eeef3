//! File formats, the parallel fitting grid and report emitters around
//! [`rainfit_core`].
//!
//! - [`site`]: the per-site CSV format and the [`site::SiteLoader`] trait.
//! - [`manifest`]: corpus manifests naming files, generators or presets.
//! - [`run`]: run settings and the `(site, method)` grid on a worker pool.
//! - [`report`] and [`svg`]: median and class tables, boxplot statistics
//!   and plots.
//! - [`commands`]: the `fit`, `simulate`, `benchmark` and `report`
//!   subcommands.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod records;
pub mod report;
pub mod run;
pub mod site;
pub mod svg;

pub use error::{exit, AppError, AppResult};
