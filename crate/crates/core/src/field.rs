//! Field containers.

/// A scalar field with a grid representation (coarse N^d grid, row-major),
/// spectral coefficients (length K^d, storage order), or both.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field {
    grid: Option<Vec<f64>>,
    coeffs: Option<Vec<f64>>,
}

impl Field {
    pub fn from_grid(values: Vec<f64>) -> Self {
        Field { grid: Some(values), coeffs: None }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Field { grid: None, coeffs: Some(coeffs) }
    }

    pub(crate) fn with_both(grid: Vec<f64>, coeffs: Vec<f64>) -> Self {
        Field { grid: Some(grid), coeffs: Some(coeffs) }
    }

    pub fn grid(&self) -> Option<&[f64]> {
        self.grid.as_deref()
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    pub fn has_grid(&self) -> bool {
        self.grid.is_some()
    }

    pub fn has_coeffs(&self) -> bool {
        self.coeffs.is_some()
    }

    pub fn into_coeffs(self) -> Option<Vec<f64>> {
        self.coeffs
    }

    pub fn into_grid(self) -> Option<Vec<f64>> {
        self.grid
    }

    /// Multiplies every populated representation by `c`.
    pub fn scaled(&self, c: f64) -> Field {
        let s = |v: &Vec<f64>| v.iter().map(|x| c * x).collect();
        Field { grid: self.grid.as_ref().map(s), coeffs: self.coeffs.as_ref().map(s) }
    }
}

/// One grid array per spatial component.
#[derive(Debug, Clone, PartialEq)]
pub struct GradField {
    pub components: Vec<Vec<f64>>,
}

impl GradField {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        let n = self.components.first().map_or(0, |c| c.len());
        (0..n).map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }
}
