//! Product grids on T¹ × ℝ and the partial/mixed Fourier transforms.
//!
//! Conventions:
//!
//! * `û(t,ξ) = ∫ u(t,x) e^{-ixξ} dx`, inverse `(1/2π) ∫ û(t,ξ) e^{ixξ} dξ`;
//! * `ũ(k,ξ) = (1/2π) ∫ û(t,ξ) e^{-ikt} dt`.
//!
//! The line is truncated to `[-X, X)`, so `forward_x` insists that the field
//! has decayed at the boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::classify::OperatorSpec;
use crate::exec::{for_each_chunk, Execution};
use crate::{Error, Result, C64};

/// Relative boundary-decay tolerance for `forward_x`.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub n_t: usize,
    pub n_x: usize,
    pub half_width: f64,
}

impl Default for CylinderGrid {
    fn default() -> Self {
        CylinderGrid {
            n_t: 64,
            n_x: 512,
            half_width: 20.0,
        }
    }
}

impl CylinderGrid {
    pub fn new(n_t: usize, n_x: usize, half_width: f64) -> Result<Self> {
        let g = CylinderGrid {
            n_t,
            n_x,
            half_width,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(Error::InvalidGrid(format!("n_t = {} < 2", self.n_t)));
        }
        if self.n_x < 2 || self.n_x % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_x = {} must be even and at least 2",
                self.n_x
            )));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_width = {} must be positive",
                self.half_width
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        2.0 * PI / self.n_t as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_x as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    pub fn t(&self, i: usize) -> f64 {
        self.dt() * i as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + self.dx() * j as f64
    }

    /// Signed frequency number `m ∈ [-n_x/2, n_x/2)` of column `j`.
    pub fn xi_number(&self, j: usize) -> i64 {
        j as i64 - (self.n_x / 2) as i64
    }

    pub fn xi(&self, j: usize) -> f64 {
        self.dxi() * self.xi_number(j) as f64
    }

    /// `k ∈ [-n_t/2, n_t/2)` of row `i` of a mixed spectrum.
    pub fn k(&self, i: usize) -> i64 {
        i as i64 - (self.n_t / 2) as i64
    }

    /// Largest `|ξ|` on the grid.
    pub fn xi_nyquist(&self) -> f64 {
        self.dxi() * (self.n_x / 2) as f64
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.n_t).map(|i| self.t(i)).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.x(j)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.xi(j)).collect()
    }
}

macro_rules! grid_array {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            pub grid: CylinderGrid,
            /// Row-major `n_t × n_x`.
            pub values: Vec<C64>,
        }

        impl $name {
            pub fn new(grid: CylinderGrid, values: Vec<C64>) -> Result<Self> {
                if values.len() != grid.len() {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{} x {}", grid.n_t, grid.n_x),
                        got: format!("{} values", values.len()),
                    });
                }
                Ok($name { grid, values })
            }

            pub fn zeros(grid: CylinderGrid) -> Self {
                $name {
                    grid,
                    values: vec![C64::new(0.0, 0.0); grid.len()],
                }
            }

            pub fn get(&self, i: usize, j: usize) -> C64 {
                self.values[i * self.grid.n_x + j]
            }

            pub fn row(&self, i: usize) -> &[C64] {
                let n = self.grid.n_x;
                &self.values[i * n..(i + 1) * n]
            }

            pub fn column(&self, j: usize) -> Vec<C64> {
                (0..self.grid.n_t).map(|i| self.get(i, j)).collect()
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }

            /// `‖self − other‖_∞`.
            pub fn max_diff(&self, other: &Self) -> f64 {
                self.values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            }

            pub fn map(&self, f: impl Fn(usize, usize, C64) -> C64) -> Self {
                let n = self.grid.n_x;
                let values = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(p, &v)| f(p / n, p % n, v))
                    .collect();
                $name {
                    grid: self.grid,
                    values,
                }
            }

            pub fn scale(&self, s: C64) -> Self {
                self.map(|_, _, v| v * s)
            }

            pub fn add(&self, other: &Self) -> Self {
                self.map(|i, j, v| v + other.get(i, j))
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.map(|i, j, v| v - other.get(i, j))
            }
        }
    };
}

grid_array!(Field, "Samples `u(t_i, x_j)`.");
grid_array!(HalfSpectrum, "Partial transform `û(t_i, ξ_j)`.");
grid_array!(MixedSpectrum, "Mixed transform `ũ(k_i, ξ_j)`, `k = -n_t/2..n_t/2-1`.");

impl Field {
    pub fn from_fn(grid: CylinderGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|p| f(grid.t(p / grid.n_x), grid.x(p % grid.n_x)))
            .collect();
        Field { grid, values }
    }

    /// Largest modulus on the first and last `x` column.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.n_x;
        (0..self.grid.n_t)
            .flat_map(|i| [self.get(i, 0), self.get(i, n - 1)])
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn check_boundary(&self) -> Result<()> {
        let limit = BOUNDARY_TOL * self.max_abs();
        let boundary = self.boundary_max();
        if boundary <= limit {
            Ok(())
        } else {
            Err(Error::DomainTooSmall { boundary, limit })
        }
    }
}

impl HalfSpectrum {
    pub fn from_fn(grid: CylinderGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|p| f(grid.t(p / grid.n_x), grid.xi(p % grid.n_x)))
            .collect();
        HalfSpectrum { grid, values }
    }
}

/// Cached FFT plans for one grid.
#[derive(Clone)]
pub struct Transforms {
    pub grid: CylinderGrid,
    pub exec: Execution,
    x_fwd: Arc<dyn Fft<f64>>,
    x_inv: Arc<dyn Fft<f64>>,
    t_fwd: Arc<dyn Fft<f64>>,
    t_inv: Arc<dyn Fft<f64>>,
}

impl Transforms {
    pub fn new(grid: CylinderGrid, exec: Execution) -> Self {
        let mut planner = FftPlanner::new();
        Transforms {
            grid,
            exec,
            x_fwd: planner.plan_fft_forward(grid.n_x),
            x_inv: planner.plan_fft_inverse(grid.n_x),
            t_fwd: planner.plan_fft_forward(grid.n_t),
            t_inv: planner.plan_fft_inverse(grid.n_t),
        }
    }

    /// Transforms every row between natural DFT order and centred order,
    /// applying the `(-1)^m` phase of the `x` offset.
    fn rows(&self, values: &[C64], fft: &Arc<dyn Fft<f64>>, forward: bool, scale: f64) -> Vec<C64> {
        let n = self.grid.n_x;
        let half = n / 2;
        let mut out = values.to_vec();
        for_each_chunk(self.exec, &mut out, n, |_, row| {
            if forward {
                fft.process(row);
                // centred index p holds DFT index (p - half) mod n
                row.rotate_left(half);
                for (p, v) in row.iter_mut().enumerate() {
                    let m = p as i64 - half as i64;
                    *v *= if m.rem_euclid(2) == 0 { scale } else { -scale };
                }
            } else {
                for (p, v) in row.iter_mut().enumerate() {
                    let m = p as i64 - half as i64;
                    *v *= if m.rem_euclid(2) == 0 { scale } else { -scale };
                }
                row.rotate_right(half);
                fft.process(row);
            }
        });
        out
    }

    /// Forward transform in `x` without the boundary check.
    pub fn forward_x_unchecked(&self, f: &Field) -> HalfSpectrum {
        let values = self.rows(&f.values, &self.x_fwd, true, self.grid.dx());
        HalfSpectrum {
            grid: self.grid,
            values,
        }
    }

    pub fn forward_x(&self, f: &Field) -> Result<HalfSpectrum> {
        f.check_boundary()?;
        Ok(self.forward_x_unchecked(f))
    }

    pub fn inverse_x(&self, u: &HalfSpectrum) -> Field {
        let scale = self.grid.dxi() / (2.0 * PI);
        let values = self.rows(&u.values, &self.x_inv, false, scale);
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Applies a length-`n_t` transform to every column.
    fn columns(&self, values: &[C64], forward: bool) -> Vec<C64> {
        let (n_t, n_x) = (self.grid.n_t, self.grid.n_x);
        let half = n_t / 2;
        let mut cols = vec![C64::new(0.0, 0.0); values.len()];
        for i in 0..n_t {
            for j in 0..n_x {
                cols[j * n_t + i] = values[i * n_x + j];
            }
        }
        let fft = if forward { &self.t_fwd } else { &self.t_inv };
        let scale = 1.0 / n_t as f64;
        for_each_chunk(self.exec, &mut cols, n_t, |_, col| {
            if forward {
                fft.process(col);
                col.rotate_left(half);
                col.iter_mut().for_each(|v| *v *= scale);
            } else {
                col.rotate_right(half);
                fft.process(col);
            }
        });
        let mut out = vec![C64::new(0.0, 0.0); values.len()];
        for i in 0..n_t {
            for j in 0..n_x {
                out[i * n_x + j] = cols[j * n_t + i];
            }
        }
        out
    }

    pub fn forward_t(&self, u: &HalfSpectrum) -> MixedSpectrum {
        MixedSpectrum {
            grid: self.grid,
            values: self.columns(&u.values, true),
        }
    }

    pub fn inverse_t(&self, u: &MixedSpectrum) -> HalfSpectrum {
        HalfSpectrum {
            grid: self.grid,
            values: self.columns(&u.values, false),
        }
    }

    pub fn mixed(&self, f: &Field) -> Result<MixedSpectrum> {
        Ok(self.forward_t(&self.forward_x(f)?))
    }

    /// `∂t u` through the `t` series, Nyquist mode dropped.
    pub fn dt_field(&self, u: &Field) -> Field {
        let n_x = self.grid.n_x;
        let mut spec = self.columns(&u.values, true);
        for (p, v) in spec.iter_mut().enumerate() {
            let i = p / n_x;
            let k = self.grid.k(i);
            *v *= if i == 0 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, k as f64)
            };
        }
        Field {
            grid: self.grid,
            values: self.columns(&spec, false),
        }
    }

    /// `∂x u` through the periodic `x` transform, Nyquist mode dropped.
    pub fn dx_field(&self, u: &Field) -> Field {
        let hat = self.forward_x_unchecked(u);
        let d = hat.map(|_, j, v| {
            if j == 0 {
                C64::new(0.0, 0.0)
            } else {
                v * C64::new(0.0, self.grid.xi(j))
            }
        });
        self.inverse_x(&d)
    }

    /// `Lu = ∂t u + c(t) ∂x u + q(t) u` with the boundary check on `u`.
    pub fn spectral_apply(&self, op: &OperatorSpec, u: &Field) -> Result<Field> {
        u.check_boundary()?;
        Ok(self.spectral_apply_periodic(op, u))
    }

    /// `Lu` treating `x` as periodic on `[-X, X)`; no boundary check.
    pub fn spectral_apply_periodic(&self, op: &OperatorSpec, u: &Field) -> Field {
        let du_t = self.dt_field(u);
        let du_x = self.dx_field(u);
        let cs: Vec<C64> = self.grid.ts().iter().map(|&t| op.c().eval(t)).collect();
        let qs: Vec<C64> = self.grid.ts().iter().map(|&t| op.q().eval(t)).collect();
        u.map(|i, j, v| du_t.get(i, j) + cs[i] * du_x.get(i, j) + qs[i] * v)
    }
}

/// Default threshold on the tail-to-peak ratio of the weighted spectrum.
pub const DECAY_THRESHOLD: f64 = 1e-3;
/// Entries below this fraction of the peak count as zero.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Fraction of the `ξ` range retained (the rest sits next to Nyquist).
pub const RETAINED_FRACTION: f64 = 0.9;
pub const MAX_DECAY_ORDER: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// `D(N)` for `N = 0..=n_max`.
    pub table: Vec<f64>,
    pub n_max: usize,
    /// Largest weighted value at order `n_max` over the outer band of the
    /// retained grid.
    pub tail: f64,
    pub threshold: f64,
    pub schwartz_like: bool,
    /// Fitted power-law decay rate of `max_k |ũ(k,ξ)|` in `ξ` over the outer
    /// band; `None` when fewer than three tail entries clear the noise floor.
    pub decay_order: Option<f64>,
}

/// Polynomially weighted sup-norms of a mixed spectrum.
///
/// `D(N) = max (1+k²)^{N/2}(1+ξ²)^{N/2} |ũ(k,ξ)|` over the retained grid
/// `|ξ| ≤ 0.9·ξ_nyq`, ignoring entries below `1e-12 · max|ũ|`. The spectrum
/// counts as Schwartz-like when the maximum of the order-`n_max` weight over
/// the outer band (`|ξ| ≥ half the retained range` or `|k| ≥ n_t/4`) is at
/// most `threshold · D(n_max)`: rapid decay puts the weighted peak well
/// inside the grid, polynomial decay pushes it to the edge.
pub fn decay_report(u: &MixedSpectrum, n_max: usize, threshold: f64) -> Result<DecayReport> {
    if n_max > MAX_DECAY_ORDER {
        return Err(Error::Precondition(format!(
            "decay order {n_max} exceeds {MAX_DECAY_ORDER}"
        )));
    }
    let g = u.grid;
    let floor = NOISE_FLOOR * u.max_abs();
    let xi_keep = RETAINED_FRACTION * g.xi_nyquist();
    let xi_outer = 0.5 * xi_keep;
    let k_outer = (g.n_t / 4) as i64;
    let mut table = vec![0.0f64; n_max + 1];
    let mut tail = 0.0f64;
    let mut col_max = vec![0.0f64; g.n_x];
    for i in 0..g.n_t {
        let k = g.k(i);
        for j in 0..g.n_x {
            let xi = g.xi(j);
            let a = u.get(i, j).norm();
            if xi.abs() > xi_keep || a <= floor {
                continue;
            }
            col_max[j] = col_max[j].max(a);
            let w = ((1.0 + (k * k) as f64) * (1.0 + xi * xi)).sqrt();
            let mut wn = a;
            for d in table.iter_mut() {
                *d = d.max(wn);
                wn *= w;
            }
            if xi.abs() >= xi_outer || k.abs() >= k_outer {
                tail = tail.max(a * w.powi(n_max as i32));
            }
        }
    }
    let peak = table[n_max];
    let pts: Vec<(f64, f64)> = (0..g.n_x)
        .filter(|&j| {
            let xi = g.xi(j).abs();
            xi >= xi_outer.max(1.0) && xi <= xi_keep && col_max[j] > 0.0
        })
        .map(|j| (g.xi(j).abs().ln(), col_max[j].ln()))
        .collect();
    let decay_order = (pts.len() >= 3).then(|| -fit_slope(&pts));
    Ok(DecayReport {
        table,
        n_max,
        tail,
        threshold,
        schwartz_like: tail <= threshold * peak,
        decay_order,
    })
}

/// Decay report for a field. A field that has not decayed at the `x`
/// boundary is not Schwartz at grid scale, whatever its spectrum says.
pub fn decay_report_field(
    tr: &Transforms,
    f: &Field,
    n_max: usize,
    threshold: f64,
) -> Result<DecayReport> {
    let mixed = tr.forward_t(&tr.forward_x_unchecked(f));
    let mut rep = decay_report(&mixed, n_max, threshold)?;
    if f.check_boundary().is_err() {
        rep.schwartz_like = false;
    }
    Ok(rep)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
