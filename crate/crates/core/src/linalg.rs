//! Tridiagonal solves and one-step solvers for the linear diffusion problem
//! `v' = L v + c(t) + q` with frozen source `q` and Dirichlet data `b(t)`.
//!
//! `L` is the central second difference on the interior nodes and `c(t)`
//! carries the boundary coupling `b1(t)/h^2`, `b2(t)/h^2` into the first and
//! last interior rows. The steppers solve for the increment `v - u`, so a
//! steady state produces a zero right-hand side and is reproduced exactly.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::problems::BoundarySpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal system".into()));
        }
        for off in [&lower, &upper] {
            if off.len() != m - 1 {
                return Err(Error::DimensionMismatch {
                    expected: m - 1,
                    found: off.len(),
                });
            }
        }
        Ok(TridiagonalSystem { lower, diag, upper })
    }

    /// Constant-coefficient system with `diag` on the diagonal and `off` on both off-diagonals.
    pub fn toeplitz(m: usize, off: f64, diag: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal system".into()));
        }
        TridiagonalSystem::new(vec![off; m - 1], vec![diag; m], vec![off; m - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        let m = self.dim();
        (0..m).all(|i| {
            let left = if i > 0 { self.lower[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < m { self.upper[i].abs() } else { 0.0 };
            self.diag[i].abs() > left + right
        })
    }

    /// `A x` for the tridiagonal `A`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: x.len() });
        }
        Ok((0..m)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect())
    }
}

/// Thomas algorithm, no pivoting.
pub fn thomas_solve(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = sys.dim();
    if rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: rhs.len() });
    }
    let tol = 1e-14 * sys.diag.iter().fold(0.0_f64, |a, d| a.max(d.abs()));

    let mut c = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut pivot = sys.diag[0];
    if pivot.abs() <= tol {
        return Err(Error::SingularSystem { row: 0, pivot });
    }
    if m > 1 {
        c[0] = sys.upper[0] / pivot;
    }
    x[0] = rhs[0] / pivot;
    for i in 1..m {
        let a = sys.lower[i - 1];
        pivot = sys.diag[i] - a * c[i - 1];
        if pivot.abs() <= tol {
            return Err(Error::SingularSystem { row: i, pivot });
        }
        if i + 1 < m {
            c[i] = sys.upper[i] / pivot;
        }
        x[i] = (rhs[i] - a * x[i - 1]) / pivot;
    }
    for i in (0..m - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// One step of the diffusion problem from `t` to `t + tau`.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionStepInput<'a> {
    pub grid: &'a Grid,
    /// Full state; its boundary entries are not read, `b(t)` is used instead.
    pub state: &'a Field,
    pub t: f64,
    pub tau: f64,
    /// Frozen source, full length. Only interior entries enter the step.
    pub source: &'a Field,
    pub bc: &'a BoundarySpec,
}

impl DiffusionStepInput<'_> {
    fn validate(&self) -> Result<()> {
        self.grid.check(self.state)?;
        self.grid.check(self.source)?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Accumulates `weight * (L u + c(t))` on interior nodes into `acc`, where the
/// boundary values of `u` are replaced by `b(t)`.
fn add_coupled_laplacian(acc: &mut [f64], u: &[f64], h: f64, bc: &BoundarySpec, t: f64, weight: f64) {
    let n = u.len();
    let w = weight / (h * h);
    let (left, right) = (bc.left(t), bc.right(t));
    for i in 1..n - 1 {
        let um = if i == 1 { left } else { u[i - 1] };
        let up = if i == n - 2 { right } else { u[i + 1] };
        acc[i - 1] += w * (um - 2.0 * u[i] + up);
    }
}

/// Solves `(I - theta tau L) delta = rhs` and returns `u + delta` with `b(t + tau)` injected.
fn finish_step(input: &DiffusionStepInput<'_>, theta: f64, rhs: &[f64]) -> Result<Field> {
    let n = input.grid.n();
    let r = theta * input.tau / (input.grid.h() * input.grid.h());
    let sys = TridiagonalSystem::toeplitz(n - 2, -r, 1.0 + 2.0 * r)?;
    let delta = thomas_solve(&sys, rhs)?;
    let mut out = input.state.clone();
    for (o, d) in out[1..n - 1].iter_mut().zip(&delta) {
        *o += d;
    }
    input.bc.impose(&mut out, input.t + input.tau);
    Ok(out)
}

/// Implicit Euler: `(I - tau L) v = u + tau q + tau c(t + tau)` on interior nodes.
pub fn implicit_euler_diffusion_step(input: &DiffusionStepInput<'_>) -> Result<Field> {
    input.validate()?;
    let (n, tau) = (input.grid.n(), input.tau);
    let mut rhs: Vec<f64> = input.source[1..n - 1].iter().map(|q| tau * q).collect();
    add_coupled_laplacian(&mut rhs, input.state, input.grid.h(), input.bc, input.t + tau, tau);
    finish_step(input, 1.0, &rhs)
}

/// Crank-Nicolson:
/// `(I - tau/2 L) v = (I + tau/2 L) u + tau q + tau/2 (c(t) + c(t + tau))` on interior nodes.
pub fn crank_nicolson_diffusion_step(input: &DiffusionStepInput<'_>) -> Result<Field> {
    input.validate()?;
    let (n, tau) = (input.grid.n(), input.tau);
    let h = input.grid.h();
    let mut rhs: Vec<f64> = input.source[1..n - 1].iter().map(|q| tau * q).collect();
    add_coupled_laplacian(&mut rhs, input.state, h, input.bc, input.t, 0.5 * tau);
    add_coupled_laplacian(&mut rhs, input.state, h, input.bc, input.t + tau, 0.5 * tau);
    finish_step(input, 0.5, &rhs)
}

/// Local Richardson extrapolation of implicit Euler, `2 E(tau/2)^2 - E(tau)`.
///
/// Second order and L-stable: the amplification factor of a mode with
/// `z = tau lambda` is `2/(1 + z/2)^2 - 1/(1 + z)`, which tends to zero as
/// `z` grows, where Crank-Nicolson tends to `-1`.
pub fn extrapolated_euler_diffusion_step(input: &DiffusionStepInput<'_>) -> Result<Field> {
    input.validate()?;
    let half = 0.5 * input.tau;
    let a = implicit_euler_diffusion_step(&DiffusionStepInput { tau: half, ..*input })?;
    let b = implicit_euler_diffusion_step(&DiffusionStepInput { state: &a, t: input.t + half, tau: half, ..*input })?;
    let c = implicit_euler_diffusion_step(input)?;
    let n = input.grid.n();
    let mut out = b;
    for (o, ci) in out[1..n - 1].iter_mut().zip(&c[1..n - 1]) {
        *o = 2.0 * *o - ci;
    }
    input.bc.impose(&mut out, input.t + input.tau);
    Ok(out)
}
