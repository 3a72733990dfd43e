//! Rows of estimate-versus-exact comparisons.

use alloc::string::String;
use alloc::vec::Vec;

use crate::exppoly::LatticePoint;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub n: u64,
    pub omega: LatticePoint,
    pub exact: f64,
    pub estimate: f64,
    /// `estimate / exact`.
    pub ratio: f64,
    pub regime: String,
    pub dist_boundary: f64,
    pub det_nb: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
    pub warnings: Vec<String>,
}

impl EstimateReport {
    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max / min` of the ratio column.
    pub fn spread(&self) -> f64 {
        self.max_ratio() / self.min_ratio()
    }

    pub fn extend(&mut self, other: EstimateReport) {
        self.rows.extend(other.rows);
        self.warnings.extend(other.warnings);
    }
}
