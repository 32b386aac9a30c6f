//! Uniform 1D grid, second-order difference operators and discrete Sobolev norms.
//!
//! Fields are node-inclusive: entry 0 and entry `n - 1` hold the boundary
//! values, entries `1..n-1` are the unknowns evolved by the time steppers.
//! Both difference operators use central stencils in the interior and
//! second-order one-sided stencils at the two end nodes, so every node of the
//! result carries an `O(h^2)` approximation.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    x0: f64,
    x1: f64,
    h: f64,
}

impl Grid {
    pub fn new(n: usize, x0: f64, x1: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        if !(x0.is_finite() && x1.is_finite() && x0 < x1) {
            return Err(Error::InvalidArgument(format!(
                "grid interval must satisfy x0 < x1, got [{x0}, {x1}]"
            )));
        }
        let h = (x1 - x0) / (n - 1) as f64;
        Ok(Grid { n, x0, x1, h })
    }

    /// Node count, boundary nodes included.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    /// Coordinate of node `i`. The last node returns `x1` exactly.
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x1
        } else {
            self.x0 + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field((0..self.n).map(|i| f(self.x(i))).collect())
    }

    pub fn zeros(&self) -> Field {
        Field(vec![0.0; self.n])
    }

    pub(crate) fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: u.len(),
            })
        }
    }
}

/// Nodal values of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Field(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field(values)
    }
}

pub fn apply_laplacian(g: &Grid, u: &Field) -> Result<Field> {
    g.check(u)?;
    let mut out = vec![0.0; g.n];
    laplacian_into(g.h, u, &mut out);
    Ok(Field(out))
}

pub fn apply_gradient(g: &Grid, u: &Field) -> Result<Field> {
    g.check(u)?;
    let mut out = vec![0.0; g.n];
    gradient_into(g.h, u, &mut out);
    Ok(Field(out))
}

pub(crate) fn laplacian_into(h: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let inv_h2 = 1.0 / (h * h);
    for i in 1..n - 1 {
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    }
    if n >= 4 {
        out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv_h2;
        out[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * inv_h2;
    } else {
        // three nodes admit no four-point stencil; reuse the only central value
        out[0] = out[1];
        out[n - 1] = out[1];
    }
}

pub(crate) fn gradient_into(h: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let inv_2h = 0.5 / h;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) * inv_2h;
    }
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv_2h;
    out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv_2h;
}

fn trapezoid_sq(h: f64, u: &[f64]) -> f64 {
    let n = u.len();
    let inner: f64 = u[1..n - 1].iter().map(|v| v * v).sum();
    h * (inner + 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1]))
}

pub fn norm_l2(g: &Grid, u: &Field) -> Result<f64> {
    g.check(u)?;
    Ok(trapezoid_sq(g.h, u).sqrt())
}

pub fn norm_h1(g: &Grid, u: &Field) -> Result<f64> {
    g.check(u)?;
    Ok(h1_sq(g, u).sqrt())
}

pub fn norm_h2(g: &Grid, u: &Field) -> Result<f64> {
    g.check(u)?;
    let mut lap = vec![0.0; g.n];
    laplacian_into(g.h, u, &mut lap);
    Ok((h1_sq(g, u) + trapezoid_sq(g.h, &lap)).sqrt())
}

fn h1_sq(g: &Grid, u: &[f64]) -> f64 {
    let mut grad = vec![0.0; g.n];
    gradient_into(g.h, u, &mut grad);
    trapezoid_sq(g.h, u) + trapezoid_sq(g.h, &grad)
}
