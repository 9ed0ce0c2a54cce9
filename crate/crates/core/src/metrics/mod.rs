//! Source figures of merit: count-rate metrics, HOM dip prediction and
//! visibility estimation from measured scans.
//!
//! Counting uncertainties are Poisson on raw counts, `rate × integration time`.

mod counts;
mod hom;
mod scan;

pub use counts::{brightness, g2_heralded, klyshko, CountSummary, Measurement};
pub use hom::{hom_dip, hom_visibility_model, HomDip};
pub use scan::{hom_visibility_from_scan, HomScan, HomVisibility, PAIR_LABELS};
