use serde::{Deserialize, Serialize};

/// Boundary closure of the discrete Neumann Laplacian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannStencil {
    /// Cell-centred closure; boundary rows `(−1, 1)/h²`. Symmetric, zero row
    /// sums.
    #[default]
    Symmetric,
    /// Ghost-point closure; boundary rows `(−2, 2)/h²`. Zero row sums, not
    /// symmetric.
    GhostPoint,
}

/// Weight applied to spatial sums in the cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Rectangle rule: `Q = h·diag(χ)`, `R = γ̃·h·I`.
    #[default]
    Grid,
    /// Plain sums: `Q = diag(χ)`, `R = γ̃·I`.
    Unit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    #[default]
    Cos,
    Sin,
}

impl InitialProfile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            InitialProfile::Cos => (std::f64::consts::PI * x).cos(),
            InitialProfile::Sin => (std::f64::consts::PI * x).sin(),
        }
    }
}

/// Which state-dependent coefficient factorization of the Van der Pol drift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VdpForm {
    /// `A = [[0, 1], [−1, −½(1 − x₁²)]]`, for which `P = I` solves the SDRE.
    #[default]
    Baseline,
    /// `A = [[−x₂, 1 + x₁], [−1, −½(1 − x₁²)]]`.
    Alternative,
}

/// Parameters for the builtin models. Unset fields take model defaults;
/// fields a model does not use are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Zeldovich preset, 1 or 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_o: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitialProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<VdpForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stencil: Option<NeumannStencil>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Quadrature>,
    /// LQR matrices, row by row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}
