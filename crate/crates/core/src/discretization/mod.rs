//! Uniform box grids, the monotone wide-stencil scheme and discrete norms.

mod field_io;
mod grid;
mod norms;
mod scheme;

pub use field_io::{format_field, parse_field, read_field, write_field};
pub use grid::{Grid, GridFunction};
pub use norms::{
    c1alpha_estimate, gradient, holder_seminorm, lp_norm, lp_norm_over, sup_norm, w2p_seminorm,
};
pub use scheme::{
    decompose, discretize_operator, pucci_corners, second_difference, LinearStencil,
    NodeOperator, SchemeOperator, SchemePart, StencilSet, Weight, MAX_DIRECTIONS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents and margin used by the regularity diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Lebesgue exponent, must exceed the dimension.
    pub p: f64,
    /// Hölder exponent in (0, 1).
    pub alpha: f64,
    /// Distance to the boundary of the subdomain used for interior norms.
    pub subdomain_margin: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            alpha: 0.5,
            subdomain_margin: 0.1,
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.p > dim as f64) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "diagnostic exponent p = {} must exceed the dimension {dim}",
                self.p
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hölder exponent {} not in (0, 1)",
                self.alpha
            )));
        }
        if !(self.subdomain_margin >= 0.0) {
            return Err(Error::InvalidParameter("subdomain margin must be nonnegative".into()));
        }
        Ok(())
    }
}
