// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Model-file parsing. The on-disk format is strict JSON with complex
//! numbers as explicit [re, im] pairs; unknown keys are rejected and any
//! non-finite entry is an input error.

use serde::Deserialize;
use tclq_core::linalg::{C64, CMat};
use tclq_core::model::ModelSpec;
use tclq_core::superops::{
    commutator_superoperator, gksl_superoperator, GkslSpec, Superoperator,
};

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

type ComplexPair = [f64; 2];
type ComplexMatrixData = Vec<Vec<ComplexPair>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    pub l0: GeneratorField,
    pub l_int: InteractionField,
    pub projector: ProjectorField,
    pub lambda: f64,
    pub t0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorField {
    #[serde(default)]
    pub hamiltonian: Option<ComplexMatrixData>,
    #[serde(default)]
    pub jumps: Option<Vec<JumpField>>,
    #[serde(default)]
    pub matrix: Option<ComplexMatrixData>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpField {
    pub operator: ComplexMatrixData,
    pub rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionField {
    #[serde(default)]
    pub commutator: Option<CommutatorField>,
    #[serde(default)]
    pub matrix: Option<ComplexMatrixData>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorField {
    pub operator: ComplexMatrixData,
    pub prefactor: ComplexPair,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorField {
    #[serde(default)]
    pub matrix: Option<ComplexMatrixData>,
    #[serde(default)]
    pub named: Option<String>,
}

fn to_matrix(data: &ComplexMatrixData, rows: usize, cols: usize, what: &str) -> Result<CMat, InputError> {
    if data.len() != rows {
        return Err(InputError(format!(
            "{what}: expected {rows} rows, found {}",
            data.len()
        )));
    }
    let mut m = CMat::zeros((rows, cols));
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(InputError(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, pair) in row.iter().enumerate() {
            if !pair[0].is_finite() || !pair[1].is_finite() {
                return Err(InputError(format!(
                    "{what}: non-finite entry at ({i}, {j})"
                )));
            }
            m[(i, j)] = C64::new(pair[0], pair[1]);
        }
    }
    Ok(m)
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile, InputError> {
        let mf: ModelFile = serde_json::from_str(text)
            .map_err(|e| InputError(format!("model file: {e}")))?;
        if mf.dimension == 0 || mf.dimension > 16 {
            return Err(InputError(format!(
                "dimension {} outside the supported range 1..=16",
                mf.dimension
            )));
        }
        if !mf.lambda.is_finite() || !mf.t0.is_finite() {
            return Err(InputError("lambda and t0 must be finite".into()));
        }
        Ok(mf)
    }

    pub fn build(&self) -> Result<ModelSpec, InputError> {
        let d = self.dimension;
        let n = d * d;
        let l0 = match (&self.l0.matrix, &self.l0.hamiltonian) {
            (Some(m), None) => {
                if self.l0.jumps.is_some() {
                    return Err(InputError("l0: give either matrix or hamiltonian+jumps".into()));
                }
                Superoperator::from_matrix(d, to_matrix(m, n, n, "l0.matrix")?)
                    .map_err(|e| InputError(e.to_string()))?
            }
            (None, Some(h)) => {
                let hamiltonian = to_matrix(h, d, d, "l0.hamiltonian")?;
                let mut jump_terms = Vec::new();
                for (k, j) in self.l0.jumps.as_deref().unwrap_or(&[]).iter().enumerate() {
                    if !j.rate.is_finite() {
                        return Err(InputError(format!("l0.jumps[{k}].rate is not finite")));
                    }
                    jump_terms.push((to_matrix(&j.operator, d, d, "l0 jump operator")?, j.rate));
                }
                gksl_superoperator(&GkslSpec { hamiltonian, jump_terms })
                    .map_err(|e| InputError(e.to_string()))?
            }
            _ => return Err(InputError("l0: give exactly one of matrix or hamiltonian".into())),
        };
        let l_int = match (&self.l_int.matrix, &self.l_int.commutator) {
            (Some(m), None) => Superoperator::from_matrix(d, to_matrix(m, n, n, "l_int.matrix")?)
                .map_err(|e| InputError(e.to_string()))?,
            (None, Some(c)) => {
                let op = to_matrix(&c.operator, d, d, "l_int.commutator.operator")?;
                if !c.prefactor[0].is_finite() || !c.prefactor[1].is_finite() {
                    return Err(InputError("l_int.commutator.prefactor not finite".into()));
                }
                commutator_superoperator(&op, C64::new(c.prefactor[0], c.prefactor[1]))
                    .map_err(|e| InputError(e.to_string()))?
            }
            _ => {
                return Err(InputError(
                    "l_int: give exactly one of matrix or commutator".into(),
                ))
            }
        };
        let projector = match (&self.projector.matrix, &self.projector.named) {
            (Some(m), None) => Superoperator::from_matrix(d, to_matrix(m, n, n, "projector")?)
                .map_err(|e| InputError(e.to_string()))?,
            (None, Some(name)) => match name.as_str() {
                "argyres-kelley-example" => {
                    if d != 3 {
                        return Err(InputError(
                            "named projector argyres-kelley-example needs dimension 3".into(),
                        ));
                    }
                    tclq_core::model::three_level_projector()
                }
                other => return Err(InputError(format!("unknown named projector '{other}'"))),
            },
            _ => {
                return Err(InputError(
                    "projector: give exactly one of matrix or named".into(),
                ))
            }
        };
        ModelSpec::new(l0, l_int, projector, self.lambda, self.t0)
            .map_err(|e| InputError(e.to_string()))
    }
}

/// A d x d complex matrix file (used for initial states).
pub fn parse_state(text: &str, d: usize) -> Result<CMat, InputError> {
    let data: ComplexMatrixData =
        serde_json::from_str(text).map_err(|e| InputError(format!("state file: {e}")))?;
    to_matrix(&data, d, d, "state")
}

/// FNV-1a over the raw bytes; enough to tie a report to its inputs.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
