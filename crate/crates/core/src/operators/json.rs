//! JSON form of [`OperatorSpec`].
//!
//! ```json
//! {"kind": "isaacs", "lambda": 1.0, "Lambda": 2.0,
//!  "matrices": [[[1.0, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 2.0]]],
//!  "offsets": [0.0, 0.0], "alpha_count": 2}
//! ```
//!
//! Matrices are full and row-major. For `isaacs`, the matrix list is split
//! into `alpha_count` consecutive groups of equal size (α-major). Pucci
//! operators carry no matrices and need an explicit `dim`.

use serde::{Deserialize, Serialize};

use super::{Control, EllipticityPair, OperatorKind, OperatorSpec, SymMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub kind: String,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_count: Option<usize>,
}

impl OperatorJson {
    /// Converts to an operator without validating coefficient bounds.
    pub fn to_spec_unchecked(&self) -> Result<OperatorSpec> {
        let e = EllipticityPair::new(self.lambda, self.big_lambda)?;
        let mats = self
            .matrices
            .iter()
            .map(|rows| SymMatrix::from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        let offsets = if self.offsets.is_empty() {
            vec![0.0; mats.len()]
        } else {
            self.offsets.clone()
        };
        if offsets.len() != mats.len() {
            return Err(Error::InvalidParameter(format!(
                "{} offsets for {} matrices",
                offsets.len(),
                mats.len()
            )));
        }
        let controls: Vec<Control> = mats
            .iter()
            .zip(&offsets)
            .map(|(a, &c)| Control::new(*a, c))
            .collect();
        let dim = match (self.dim, mats.first()) {
            (Some(d), Some(m)) if d != m.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                })
            }
            (Some(d), _) => d,
            (None, Some(m)) => m.dim(),
            (None, None) => {
                return Err(Error::InvalidParameter(format!(
                    "operator of kind '{}' needs \"dim\"",
                    self.kind
                )))
            }
        };
        let kind = match self.kind.as_str() {
            "pucci+" => OperatorKind::PucciPlus,
            "pucci-" => OperatorKind::PucciMinus,
            "affine" => {
                if controls.len() != 1 {
                    return Err(Error::InvalidParameter(
                        "affine operator takes exactly one matrix".into(),
                    ));
                }
                OperatorKind::Affine(controls[0])
            }
            "bellman" => OperatorKind::Bellman(controls),
            "isaacs" => {
                let groups = self.alpha_count.unwrap_or(1);
                if groups == 0 || controls.len() % groups != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "{} matrices cannot be split into {groups} alpha groups",
                        controls.len()
                    )));
                }
                let per = controls.len() / groups;
                OperatorKind::Isaacs(controls.chunks(per).map(<[Control]>::to_vec).collect())
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown operator kind '{other}'"
                )))
            }
        };
        OperatorSpec::new_unchecked(dim, kind, e)
    }

    /// Converts and validates coefficient bounds.
    pub fn to_spec(&self) -> Result<OperatorSpec> {
        let spec = self.to_spec_unchecked()?;
        spec.validate_bounds()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &OperatorSpec) -> Self {
        let e = spec.ellipticity();
        let (kind, alpha_count) = match spec.kind() {
            OperatorKind::PucciPlus => ("pucci+", None),
            OperatorKind::PucciMinus => ("pucci-", None),
            OperatorKind::Affine(_) => ("affine", None),
            OperatorKind::Bellman(_) => ("bellman", None),
            OperatorKind::Isaacs(groups) => ("isaacs", Some(groups.len())),
        };
        let controls = spec.controls();
        Self {
            kind: kind.to_string(),
            lambda: e.lambda(),
            big_lambda: e.big_lambda(),
            dim: Some(spec.dim()),
            matrices: controls.iter().map(|c| c.a.to_rows()).collect(),
            offsets: controls.iter().map(|c| c.c).collect(),
            alpha_count,
        }
    }
}

impl Serialize for OperatorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::from_spec(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OperatorJson::deserialize(d)?
            .to_spec()
            .map_err(serde::de::Error::custom)
    }
}
