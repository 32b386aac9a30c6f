//! Problem data: nonlinearity `f(u, u_x)`, Dirichlet boundary data and initial data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{gradient_into, Field, Grid};

type PointMap = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type BatchMap = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Pointwise nonlinearity `f(u, p)` where `p` stands for the spatial derivative of `u`.
#[derive(Clone)]
pub struct Nonlinearity {
    label: String,
    eval: PointMap,
    // same map monomorphized over slices, for the hot explicit loops
    batch: BatchMap,
}

impl Nonlinearity {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let pointwise = eval.clone();
        Nonlinearity {
            label: label.into(),
            eval: Arc::new(pointwise),
            batch: Arc::new(move |u: &[f64], p: &[f64], out: &mut [f64]| {
                for ((o, &ui), &pi) in out.iter_mut().zip(u).zip(p) {
                    *o = eval(ui, pi);
                }
            }),
        }
    }

    pub fn zero() -> Self {
        Nonlinearity::new("0", |_, _| 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, u: f64, p: f64) -> f64 {
        (self.eval)(u, p)
    }

    /// `out[i] = f(u[i], p[i])` over equal-length slices.
    #[inline]
    pub fn eval_slice(&self, u: &[f64], p: &[f64], out: &mut [f64]) {
        (self.batch)(u, p, out)
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonlinearity({})", self.label)
    }
}

/// Dirichlet data `b1(t)` at the left end and `b2(t)` at the right end.
#[derive(Clone)]
pub struct BoundarySpec {
    left: ScalarMap,
    right: ScalarMap,
}

impl BoundarySpec {
    pub fn new(
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundarySpec {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    pub fn constant(left: f64, right: f64) -> Self {
        BoundarySpec::new(move |_| left, move |_| right)
    }

    #[inline]
    pub fn left(&self, t: f64) -> f64 {
        (self.left)(t)
    }

    #[inline]
    pub fn right(&self, t: f64) -> f64 {
        (self.right)(t)
    }

    /// Writes `b(t)` into the two end nodes of `u`.
    pub fn impose(&self, u: &mut [f64], t: f64) {
        let n = u.len();
        u[0] = self.left(t);
        u[n - 1] = self.right(t);
    }
}

impl fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BoundarySpec")
    }
}

#[derive(Clone)]
pub struct Problem {
    pub id: String,
    pub nonlinearity: Nonlinearity,
    pub bc: BoundarySpec,
    initial: ScalarMap,
    pub t_final: f64,
    pub domain: (f64, f64),
}

/// Whether the initial data matches the boundary data at `t = 0`, per end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Compatibility {
    pub left: bool,
    pub right: bool,
}

impl Compatibility {
    pub fn both(&self) -> bool {
        self.left && self.right
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("nonlinearity", &self.nonlinearity)
            .field("t_final", &self.t_final)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Problem {
    pub fn new(
        id: impl Into<String>,
        nonlinearity: Nonlinearity,
        bc: BoundarySpec,
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_final: f64,
    ) -> Result<Self> {
        Problem {
            id: id.into(),
            nonlinearity,
            bc,
            initial: Arc::new(initial),
            t_final,
            domain: (0.0, 1.0),
        }
        .validated()
    }

    pub fn with_domain(mut self, x0: f64, x1: f64) -> Result<Self> {
        self.domain = (x0, x1);
        self.validated()
    }

    pub fn with_t_final(mut self, t_final: f64) -> Result<Self> {
        self.t_final = t_final;
        self.validated()
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    fn validated(self) -> Result<Self> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.domain.0 < self.domain.1) {
            return Err(Error::InvalidArgument(format!(
                "domain must satisfy x0 < x1, got {:?}",
                self.domain
            )));
        }
        Ok(self)
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    pub fn compatibility(&self) -> Compatibility {
        let (x0, x1) = self.domain;
        Compatibility {
            left: (self.initial(x0) - self.bc.left(0.0)).abs() <= 1e-12,
            right: (self.initial(x1) - self.bc.right(0.0)).abs() <= 1e-12,
        }
    }

    /// Grid with `n` nodes over the problem's domain.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(n, self.domain.0, self.domain.1)
    }
}

/// `f(u_i, (D_h u)_i)` at every node, boundary nodes included.
pub fn evaluate_nonlinearity(g: &Grid, prob: &Problem, u: &Field) -> Result<Field> {
    g.check(u)?;
    let mut out = vec![0.0; g.n()];
    eval_into(g.h(), &prob.nonlinearity, u, &mut out)?;
    Ok(Field::from_vec(out))
}

/// Writes `f(u, D_h u)` into `out`, using `out` itself as gradient scratch.
fn eval_into(h: f64, f: &Nonlinearity, u: &[f64], out: &mut [f64]) -> Result<()> {
    gradient_into(h, u, out);
    for (i, (o, &ui)) in out.iter_mut().zip(u).enumerate() {
        let p = *o;
        let value = f.eval(ui, p);
        if !value.is_finite() {
            return Err(Error::NonFiniteNonlinearity { node: i, u: ui, p, value });
        }
        *o = value;
    }
    Ok(())
}

/// Registered problem ids with one-line descriptions.
pub const EXAMPLES: &[(&str, &str)] = &[
    ("ex1", "f = u u_x^2, b1 = 1, b2 = 3, u0 = 1 + 2 sin(pi x / 2)"),
    ("ex2", "f = u^2 u_x^2, b1 = b2 = 1, u0 = sin(pi x) + 1"),
    ("ex3", "f = 3 u u_x^2, b1 = 2, b2 = 1 + cos(3 pi t), u0 = 2 + sin(2 pi x)"),
    (
        "ex4",
        "f = u(1 - u) + u_x^2, b1 = 1 + cos(2 pi t), b2 = 2 + sin(pi t / 2), u0 = 1 + x + cos(2 pi x) (u0(1) != b2(0))",
    ),
    (
        "ex4c",
        "ex4 with compatible right boundary b2 = 3 + sin(pi t / 2)",
    ),
    ("heat", "f = 0, b1 = b2 = 0, u0 = sin(pi x)"),
    ("constant", "f = 0, b1 = b2 = 1.5, u0 = 1.5"),
];

/// Value carried by the `constant` problem.
pub const CONSTANT_STATE: f64 = 1.5;

const EXAMPLE_T_FINAL: f64 = 0.5;

pub fn example_ids() -> Vec<&'static str> {
    EXAMPLES.iter().map(|(id, _)| *id).collect()
}

pub fn make_example(id: &str) -> Result<Problem> {
    let t = EXAMPLE_T_FINAL;
    match id {
        "ex1" => Problem::new(
            id,
            Nonlinearity::new("u*p^2", |u, p| u * p * p),
            BoundarySpec::constant(1.0, 3.0),
            |x| 1.0 + 2.0 * (0.5 * PI * x).sin(),
            t,
        ),
        "ex2" => Problem::new(
            id,
            Nonlinearity::new("u^2*p^2", |u, p| u * u * p * p),
            BoundarySpec::constant(1.0, 1.0),
            |x| (PI * x).sin() + 1.0,
            t,
        ),
        "ex3" => Problem::new(
            id,
            Nonlinearity::new("3*u*p^2", |u, p| 3.0 * u * p * p),
            BoundarySpec::new(|_| 2.0, |t| 1.0 + (3.0 * PI * t).cos()),
            |x| 2.0 + (2.0 * PI * x).sin(),
            t,
        ),
        "ex4" => Problem::new(
            id,
            Nonlinearity::new("u*(1-u)+p^2", |u, p| u * (1.0 - u) + p * p),
            BoundarySpec::new(|t| 1.0 + (2.0 * PI * t).cos(), |t| 2.0 + (0.5 * PI * t).sin()),
            |x| 1.0 + x + (2.0 * PI * x).cos(),
            t,
        ),
        "ex4c" => Problem::new(
            id,
            Nonlinearity::new("u*(1-u)+p^2", |u, p| u * (1.0 - u) + p * p),
            BoundarySpec::new(|t| 1.0 + (2.0 * PI * t).cos(), |t| 3.0 + (0.5 * PI * t).sin()),
            |x| 1.0 + x + (2.0 * PI * x).cos(),
            t,
        ),
        "heat" => Problem::new(
            id,
            Nonlinearity::zero(),
            BoundarySpec::constant(0.0, 0.0),
            |x| (PI * x).sin(),
            t,
        ),
        "constant" => Problem::new(
            id,
            Nonlinearity::zero(),
            BoundarySpec::constant(CONSTANT_STATE, CONSTANT_STATE),
            |_| CONSTANT_STATE,
            t,
        ),
        _ => Err(Error::UnknownProblem {
            id: id.to_string(),
            valid: example_ids().join(", "),
        }),
    }
}
