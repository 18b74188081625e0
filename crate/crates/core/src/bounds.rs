//! Closed-form bounds and estimators for the rank-r truncation error of a
//! horizontal concatenation, computed from per-block quantities without
//! forming the concatenated matrix.

use std::fmt;
use std::str::FromStr;

use crate::collection::Block;
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::matrix::SpectrumView;

/// Which estimator produced a bound value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Weyl,
    Residual,
    Plugin,
    Exact,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Weyl => "weyl",
            BoundKind::Residual => "residual",
            BoundKind::Plugin => "plugin",
            BoundKind::Exact => "exact",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weyl" => Ok(BoundKind::Weyl),
            "residual" => Ok(BoundKind::Residual),
            "plugin" => Ok(BoundKind::Plugin),
            "exact" => Ok(BoundKind::Exact),
            other => Err(Error::InvalidArgument(format!("unknown bound kind `{other}`"))),
        }
    }
}

/// A truncation-error value in absolute, squared and relative form.
///
/// All arithmetic happens in squared form and is clamped to
/// `[0, total_energy_sq]` before square roots; the relative form is
/// `sqrt(error_sq / total_energy_sq)` so it rounds once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub error: f64,
    pub error_sq: f64,
    pub relative: f64,
}

impl BoundValue {
    pub fn from_error_sq(kind: BoundKind, error_sq: f64, total_energy_sq: f64) -> Self {
        let total = total_energy_sq.max(0.0);
        let sq = error_sq.clamp(0.0, total);
        let relative = if total > 0.0 { (sq / total).sqrt().min(1.0) } else { 0.0 };
        Self {
            kind,
            error: sq.sqrt(),
            error_sq: sq,
            relative,
        }
    }

    /// Exact oracle value, given the measured error itself.
    pub fn from_exact_error(error: f64, total_energy_sq: f64) -> Self {
        Self::from_error_sq(BoundKind::Exact, error * error, total_energy_sq)
    }
}

/// Per-block quantities feeding the anchor-based bound: cached energy and the
/// leading squared singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    block_id: String,
    cols: usize,
    energy_sq: f64,
    leading_sv_sq: Vec<f64>,
}

impl BlockSummary {
    pub fn new(
        block_id: impl Into<String>,
        cols: usize,
        energy_sq: f64,
        leading_sv_sq: Vec<f64>,
    ) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidArgument("block summary needs positive cols".into()));
        }
        if energy_sq < 0.0 {
            return Err(Error::InvalidArgument("block energy must be non-negative".into()));
        }
        if leading_sv_sq.len() > cols {
            return Err(Error::InvalidArgument(
                "more leading singular values than columns".into(),
            ));
        }
        if leading_sv_sq.iter().any(|v| *v < 0.0)
            || leading_sv_sq.windows(2).any(|p| p[1] > p[0])
        {
            return Err(Error::InvalidArgument(
                "leading singular values must be non-negative and non-increasing".into(),
            ));
        }
        let head: f64 = leading_sv_sq.iter().sum();
        if head > energy_sq + 1e-9 * energy_sq {
            return Err(Error::InvalidArgument(
                "leading singular values exceed the block energy".into(),
            ));
        }
        Ok(Self {
            block_id: block_id.into(),
            cols,
            energy_sq,
            leading_sv_sq,
        })
    }

    /// Summarizes a block, keeping the `r` leading squared singular values.
    pub fn from_block(block: &Block, r: usize) -> Result<Self> {
        let leading = if block.cols() == 0 {
            Vec::new()
        } else {
            let s = singular_values(block.matrix())?;
            s.values().iter().take(r).map(|v| v * v).collect()
        };
        Self::new(block.id(), block.cols().max(1), block.energy_sq(), leading)
    }

    pub fn block_id(&self) -> &str {
        &self.block_id
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn energy_sq(&self) -> f64 {
        self.energy_sq
    }

    pub fn leading_sv_sq(&self) -> &[f64] {
        &self.leading_sv_sq
    }

    fn head_energy_sq(&self, r: usize) -> f64 {
        self.leading_sv_sq.iter().take(r).sum()
    }
}

/// Anchor-based upper bound: total energy minus the best single block's
/// leading rank-r energy.
pub fn weyl_bound(summaries: &[BlockSummary], r: usize) -> Result<BoundValue> {
    if summaries.is_empty() {
        return Err(Error::EmptyInput("weyl_bound needs at least one block summary"));
    }
    let total: f64 = summaries.iter().map(BlockSummary::energy_sq).sum();
    let head = summaries
        .iter()
        .map(|s| s.head_energy_sq(r))
        .fold(0.0_f64, f64::max);
    Ok(BoundValue::from_error_sq(BoundKind::Weyl, total - head, total))
}

/// Simplified anchor bound, valid when the target rank covers the head's
/// rank: everything outside the head counts as error.
pub fn weyl_tail_bound(total_energy_sq: f64, head_energy_sq: f64) -> Result<BoundValue> {
    if total_energy_sq < 0.0 || head_energy_sq < 0.0 {
        return Err(Error::InvalidArgument("energies must be non-negative".into()));
    }
    if head_energy_sq > total_energy_sq {
        return Err(Error::InvalidArgument(
            "head energy exceeds total energy".into(),
        ));
    }
    Ok(BoundValue::from_error_sq(
        BoundKind::Weyl,
        total_energy_sq - head_energy_sq,
        total_energy_sq,
    ))
}

/// Certified upper bound from pooled residual singular values.
pub fn residual_bound(total_energy_sq: f64, mu: &SpectrumView, r: usize) -> BoundValue {
    BoundValue::from_error_sq(
        BoundKind::Residual,
        total_energy_sq - mu.head_energy_sq(r),
        total_energy_sq,
    )
}

/// Plug-in estimate from tracked approximate singular values. No inequality
/// against the exact error is implied.
pub fn plugin_estimate(total_energy_sq: f64, sigma_tilde: &SpectrumView, r: usize) -> BoundValue {
    BoundValue::from_error_sq(
        BoundKind::Plugin,
        total_energy_sq - sigma_tilde.head_energy_sq(r),
        total_energy_sq,
    )
}

/// Predicted minus exact error.
pub fn slack(predicted: &BoundValue, exact: &BoundValue) -> f64 {
    predicted.error - exact.error
}
