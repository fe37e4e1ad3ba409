//! Function-spec documents: the JSON schema the CLI consumes.
//!
//! ```json
//! { "type": "gaussian",    "Q": [[4.0, 0.0], [0.0, 1.0]] }
//! { "type": "gauge_power", "q": 2.0,
//!   "body": { "normals": [[1,0],[-1,0],[0,1],[0,-1]], "offsets": [1,1,1,1] } }
//! { "type": "gauge_power", "q": 1.5, "body": { "vertices": [[1,1],[-1,1],[-1,-1],[1,-1]] } }
//! { "type": "grid", "grid": { "half_width": 8.0, "points_per_axis": 129,
//!                             "values": [ ... m^n reals, row-major ... ] } }
//! ```
//!
//! Matrices are row-major nested arrays, all reals decimal. Grid dimension is
//! inferred from the value count (m, m^2 or m^3 entries).

use super::body::ConvexBody;
use super::{FunctionOptions, LogConcaveFunction};
use crate::error::{Error, Result};
use crate::numerics::{Grid, GridLayout, SpdMatrix};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Gaussian {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    GaugePower {
        body: BodySpec,
        q: f64,
    },
    Grid {
        grid: GridSpec,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub points_per_axis: usize,
    pub values: Vec<f64>,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match (&self.normals, &self.offsets, &self.vertices) {
            (Some(normals), Some(offsets), None) => {
                let dim = normals
                    .first()
                    .map(|n| n.len())
                    .ok_or_else(|| Error::InvalidParameter("empty normal list".into()))?;
                ConvexBody::from_halfspaces(dim, normals, offsets)
            }
            (None, None, Some(vertices)) => {
                let dim = vertices
                    .first()
                    .map(|v| v.len())
                    .ok_or_else(|| Error::InvalidParameter("empty vertex list".into()))?;
                ConvexBody::from_vertices(dim, vertices)
            }
            _ => Err(Error::InvalidParameter(
                "body must give either normals+offsets or vertices".into(),
            )),
        }
    }

    pub fn from_body(body: &ConvexBody) -> BodySpec {
        BodySpec {
            normals: None,
            offsets: None,
            vertices: Some(
                body.vertices()
                    .iter()
                    .map(|v| v[..body.dim()].to_vec())
                    .collect(),
            ),
        }
    }
}

impl GridSpec {
    fn infer_dim(&self) -> Result<usize> {
        let m = self.points_per_axis;
        for dim in 1..=3usize {
            if m.checked_pow(dim as u32) == Some(self.values.len()) {
                return Ok(dim);
            }
        }
        Err(Error::InvalidGrid(format!(
            "value count {} is not {m}^n for n in 1..=3",
            self.values.len()
        )))
    }
}

impl FunctionSpec {
    /// Build the function, applying any resolution override.
    pub fn build(&self, opts: &FunctionOptions) -> Result<LogConcaveFunction> {
        match self {
            FunctionSpec::Gaussian { q } => {
                let n = q.len();
                if n == 0 || q.iter().any(|row| row.len() != n) {
                    return Err(Error::NotSpd("Q must be a square matrix".into()));
                }
                LogConcaveFunction::gaussian_with(SpdMatrix::from_rows(q)?, opts)
            }
            FunctionSpec::GaugePower { body, q } => {
                LogConcaveFunction::gauge_power_with(body.build()?, *q, opts)
            }
            FunctionSpec::Grid { grid } => {
                let dim = grid.infer_dim()?;
                let layout = GridLayout::new(dim, grid.half_width, grid.points_per_axis)?;
                LogConcaveFunction::from_potential_grid(Grid::new(layout, grid.values.clone())?)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<FunctionSpec> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("function spec parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
