//! The periodic scalar ODE `u' + θ(t)u = g(t)` on T¹.
//!
//! For `θ₀ = mean θ ∉ iℤ` the periodic solution is unique:
//!
//! ```text
//! minus: u(t) = (1 − e^{−2πθ₀})⁻¹ ∫₀^{2π} g(t−s) e^{−∫_{t−s}^t θ} ds
//! plus:  u(t) = (e^{2πθ₀} − 1)⁻¹ ∫₀^{2π} g(t+s) e^{∫_t^{t+s} θ} ds
//! ```
//!
//! Both are evaluated by exact propagation across cells,
//! `v(b) = e^{−(Θ(b)−Θ(a))} v(a) + ∫_a^b g(s) e^{−(Θ(b)−Θ(s))} ds`
//! with `Θ = ∫₀ᵗ θ`, the cell integrals done by Gauss–Legendre. The minus
//! branch runs forward from `t = 0`, the plus branch backward from `t = 2π`;
//! each is non-amplifying when the sign of `Re θ` matches its direction.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::{Error, Result, TorusFunction, C64, INT_TOL};

const TWO_PI: f64 = 2.0 * PI;

/// Default Gauss–Legendre order per cell.
pub const GL_ORDER: usize = 8;

/// `dist(θ₀, iℤ) < 1e−10`.
pub fn resonant(theta0: C64) -> bool {
    theta0.re.abs() < INT_TOL && (theta0.im - theta0.im.round()).abs() < INT_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Forward from `t = 0`; denominator `1 − e^{−2πθ₀}`.
    Minus,
    /// Backward from `t = 2π`; denominator `1 − e^{2πθ₀}`.
    Plus,
}

impl Branch {
    /// The branch whose kernel does not amplify for this `θ₀`.
    pub fn preferred(theta0: C64) -> Branch {
        if theta0.re > 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }

    /// `1 / |denominator|`.
    pub fn condition_factor(self, theta0: C64) -> f64 {
        1.0 / denominator(self, theta0 * TWO_PI).norm()
    }
}

fn denominator<S: Scalar>(branch: Branch, two_pi_theta0: S) -> S {
    let one = S::constant(C64::new(1.0, 0.0));
    match branch {
        Branch::Minus => one - (-two_pi_theta0).exp(),
        Branch::Plus => one - two_pi_theta0.exp(),
    }
}

/// Arithmetic needed by the propagation engine.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: C64) -> Self;
    fn exp(self) -> Self;
    fn value(self) -> C64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for C64 {
    fn constant(c: C64) -> Self {
        c
    }

    fn exp(self) -> Self {
        C64::exp(self)
    }

    fn value(self) -> C64 {
        self
    }

    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// A value with its first derivative in one parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub deriv: C64,
}

impl Jet {
    pub fn new(value: C64, deriv: C64) -> Self {
        Jet { value, deriv }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.deriv * o.value + self.value * o.deriv,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let v = self.value / o.value;
        Jet::new(v, (self.deriv - v * o.deriv) / o.value)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.deriv)
    }
}

impl Scalar for Jet {
    fn constant(c: C64) -> Self {
        Jet::new(c, C64::new(0.0, 0.0))
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        Jet::new(e, e * self.deriv)
    }

    fn value(self) -> C64 {
        self.value
    }

    fn scale(self, s: f64) -> Self {
        Jet::new(self.value * s, self.deriv * s)
    }
}

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform cells on `[0, 2π]` with Gauss–Legendre nodes in each.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    /// `cells + 1` boundaries, `bounds[0] = 0`, last `= 2π`.
    pub bounds: Vec<f64>,
    /// Nodes cell by cell, `order` per cell.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
    pub rule: GaussLegendre,
}

impl CellGrid {
    pub fn uniform(cells: usize, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let h = TWO_PI / cells as f64;
        let bounds: Vec<f64> = (0..=cells).map(|m| h * m as f64).collect();
        let mut nodes = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for m in 0..cells {
            for (s, w) in rule.on(bounds[m], bounds[m + 1]) {
                nodes.push(s);
                weights.push(w);
            }
        }
        CellGrid {
            bounds,
            nodes,
            weights,
            order,
            rule,
        }
    }

    pub fn cells(&self) -> usize {
        self.bounds.len() - 1
    }

    /// `∫₀^{2π} h` by the composite rule.
    pub fn integrate<S: Scalar>(&self, values: &[S]) -> S {
        let mut acc = S::constant(C64::new(0.0, 0.0));
        for (v, &w) in values.iter().zip(&self.weights) {
            acc = acc + v.scale(w);
        }
        acc
    }
}

/// Cell-by-cell solution data for one branch.
#[derive(Clone, Debug)]
pub struct Propagation<S> {
    pub branch: Branch,
    /// Particular solution `p` with `p(start) = 0`, at every cell boundary.
    pub particular: Vec<S>,
    /// Homogeneous factor `e^{−(Θ(τ) − Θ(start))}` at every cell boundary.
    pub homogeneous: Vec<S>,
    /// `p(end)`: the closing residue.
    pub residue: S,
    pub den: S,
    /// Largest real part of any kernel exponent `−(Θ(end) − Θ(s))` used.
    pub max_exponent: f64,
}

impl<S: Scalar> Propagation<S> {
    /// `I(τ) = den · u(τ) = H(τ)·R + den·p(τ)`, finite even at resonance.
    pub fn numerator(&self) -> Vec<S> {
        self.homogeneous
            .iter()
            .zip(&self.particular)
            .map(|(&h, &p)| h * self.residue + self.den * p)
            .collect()
    }

    /// Periodic solution at every cell boundary.
    pub fn solution(&self) -> Vec<S> {
        let start = self.residue / self.den;
        self.homogeneous
            .iter()
            .zip(&self.particular)
            .map(|(&h, &p)| h * start + p)
            .collect()
    }
}

/// Propagates `v' + θv = g` across `cells` from the branch's start point
/// with `v(start) = 0`.
///
/// `theta_b` and `theta_n` hold `Θ = ∫₀ᵗ θ` at cell boundaries and nodes,
/// `g_n` holds `g` at nodes. `two_pi_theta0 = Θ(2π)`.
pub fn propagate<S: Scalar>(
    cells: &CellGrid,
    branch: Branch,
    theta_b: &[S],
    theta_n: &[S],
    g_n: &[S],
) -> Propagation<S> {
    let m_cells = cells.cells();
    let order = cells.order;
    let zero = S::constant(C64::new(0.0, 0.0));
    let one = S::constant(C64::new(1.0, 0.0));
    let mut particular = vec![zero; m_cells + 1];
    let mut homogeneous = vec![one; m_cells + 1];
    let mut max_exponent = f64::NEG_INFINITY;
    match branch {
        Branch::Minus => {
            for m in 0..m_cells {
                let end = theta_b[m + 1];
                let mut inc = zero;
                for p in m * order..(m + 1) * order {
                    let e = theta_n[p] - end;
                    max_exponent = max_exponent.max(e.value().re);
                    inc = inc + (g_n[p] * e.exp()).scale(cells.weights[p]);
                }
                let carry = (theta_b[m] - end).exp();
                particular[m + 1] = carry * particular[m] + inc;
                homogeneous[m + 1] = (theta_b[0] - end).exp();
            }
        }
        Branch::Plus => {
            for m in (0..m_cells).rev() {
                let end = theta_b[m];
                let mut inc = zero;
                for p in m * order..(m + 1) * order {
                    let e = theta_n[p] - end;
                    max_exponent = max_exponent.max(e.value().re);
                    inc = inc - (g_n[p] * e.exp()).scale(cells.weights[p]);
                }
                let carry = (theta_b[m + 1] - end).exp();
                particular[m] = carry * particular[m + 1] + inc;
                homogeneous[m] = (theta_b[m_cells] - end).exp();
            }
        }
    }
    let (residue, two_pi_theta0) = match branch {
        Branch::Minus => (particular[m_cells], theta_b[m_cells] - theta_b[0]),
        Branch::Plus => (particular[0], theta_b[m_cells] - theta_b[0]),
    };
    Propagation {
        branch,
        particular,
        homogeneous,
        residue,
        den: denominator(branch, two_pi_theta0),
        max_exponent,
    }
}

/// `u' + θu = g` on T¹.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeProblem {
    pub theta: TorusFunction,
    pub g: TorusFunction,
    pub theta0: C64,
}

/// Discretisation of the closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Fourier band of the returned solution; `None` picks
    /// `max(32, 4·(K_θ + K_g))`.
    pub k_out: Option<usize>,
    /// Cells per output sample interval.
    pub cells_per_sample: usize,
    pub gl_order: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            k_out: None,
            cells_per_sample: 2,
            gl_order: GL_ORDER,
        }
    }
}

impl OdeProblem {
    pub fn new(theta: TorusFunction, g: TorusFunction) -> Self {
        let theta0 = theta.mean();
        OdeProblem { theta, g, theta0 }
    }

    pub fn is_resonant(&self) -> bool {
        resonant(self.theta0)
    }

    fn k_out(&self, opts: &OdeOptions) -> usize {
        opts.k_out
            .unwrap_or_else(|| 32.max(4 * (self.theta.k_max() + self.g.k_max())))
    }

    fn discretise(&self, opts: &OdeOptions) -> (usize, CellGrid, Vec<C64>, Vec<C64>, Vec<C64>) {
        let k_out = self.k_out(opts);
        let n_out = crate::trigfun::default_grid(k_out);
        let cells = CellGrid::uniform(n_out * opts.cells_per_sample, opts.gl_order);
        let theta_b = cells
            .bounds
            .iter()
            .map(|&t| self.theta.integral_from_zero(t))
            .collect();
        let theta_n = cells
            .nodes
            .iter()
            .map(|&t| self.theta.integral_from_zero(t))
            .collect();
        let g_n = cells.nodes.iter().map(|&t| self.g.eval(t)).collect();
        (k_out, cells, theta_b, theta_n, g_n)
    }

    fn to_function(&self, k_out: usize, stride: usize, at_bounds: &[C64]) -> TorusFunction {
        let n_out = crate::trigfun::default_grid(k_out);
        let samples: Vec<C64> = (0..n_out).map(|i| at_bounds[i * stride]).collect();
        TorusFunction::from_samples(&samples, k_out)
    }

    /// Unique periodic solution through the chosen branch.
    pub fn solve_nonresonant(&self, branch: Branch) -> Result<TorusFunction> {
        self.solve_nonresonant_with(branch, &OdeOptions::default())
    }

    pub fn solve_nonresonant_with(&self, branch: Branch, opts: &OdeOptions) -> Result<TorusFunction> {
        if self.is_resonant() {
            return Err(Error::Resonant(self.theta0));
        }
        let (k_out, cells, theta_b, theta_n, g_n) = self.discretise(opts);
        let prop = propagate(&cells, branch, &theta_b, &theta_n, &g_n);
        Ok(self.to_function(k_out, opts.cells_per_sample, &prop.solution()))
    }

    /// `∫₀^{2π} g(t) e^{∫₀ᵗ θ} dt`.
    pub fn compatibility_defect(&self) -> C64 {
        let (_, cells, _, theta_n, g_n) = self.discretise(&OdeOptions::default());
        let vals: Vec<C64> = g_n.iter().zip(&theta_n).map(|(g, th)| g * th.exp()).collect();
        cells.integrate(&vals)
    }

    /// Default defect tolerance `1e−8·(1 + ‖g‖_∞)`.
    pub fn defect_tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.g.max_abs())
    }

    /// `u_λ(t) = λe^{−Θ(t)} + ∫₀ᵗ g(s) e^{−(Θ(t)−Θ(s))} ds` for resonant `θ₀`.
    pub fn solve_resonant(&self, lambda: C64) -> Result<TorusFunction> {
        self.solve_resonant_with(lambda, &OdeOptions::default())
    }

    pub fn solve_resonant_with(&self, lambda: C64, opts: &OdeOptions) -> Result<TorusFunction> {
        if !self.is_resonant() {
            return Err(Error::NotResonant(self.theta0));
        }
        let defect = self.compatibility_defect().norm();
        let tol = self.defect_tolerance();
        if defect > tol {
            return Err(Error::IncompatibleRhs { defect, tol });
        }
        let (k_out, cells, theta_b, theta_n, g_n) = self.discretise(opts);
        let prop = propagate(&cells, Branch::Minus, &theta_b, &theta_n, &g_n);
        let vals: Vec<C64> = prop
            .homogeneous
            .iter()
            .zip(&prop.particular)
            .map(|(h, p)| lambda * h + p)
            .collect();
        Ok(self.to_function(k_out, opts.cells_per_sample, &vals))
    }

    /// `‖u' + θu − g‖_∞` on the grid of the product.
    pub fn residual(&self, u: &TorusFunction) -> f64 {
        u.derivative().add(&self.theta.mul(u)).sub(&self.g).max_abs()
    }
}
