//! Smooth functions on the circle T¹ = ℝ/2πℤ.
//!
//! A [`TorusFunction`] is a truncated Fourier series `Σ_{|k|≤K} ĝ(k) e^{ikt}`
//! with cached samples on the uniform grid `t_j = 2πj/n_grid`. Trig
//! polynomials are dense in C∞(T¹) and every operation here is exact on them
//! up to rounding.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result, C64};

const TWO_PI: f64 = 2.0 * PI;

/// Relative tolerance used for the real-valued flag.
const REAL_TOL: f64 = 1e-12;

/// Sign tolerance factor for [`TorusFunction::changes_sign`].
pub const SIGN_TOL: f64 = 1e-12;

/// Mean tolerance for running-integral operations.
pub const MEAN_TOL: f64 = 1e-10;

/// Refinement factor applied to `n_grid` for sign and extremum scans.
pub const REFINE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusFunction {
    k_max: usize,
    coeffs: Vec<C64>,
    n_grid: usize,
    samples: Vec<C64>,
}

/// Smallest grid that keeps products of two functions alias-free.
pub fn default_grid(k_max: usize) -> usize {
    4 * k_max + 4
}

impl TorusFunction {
    /// Builds from coefficients listed for `k = -k_max..=k_max`.
    pub fn from_coeffs(k_max: usize, coeffs: Vec<C64>) -> Self {
        Self::with_grid(k_max, coeffs, default_grid(k_max))
    }

    pub fn with_grid(k_max: usize, coeffs: Vec<C64>, n_grid: usize) -> Self {
        assert_eq!(coeffs.len(), 2 * k_max + 1, "coefficient count");
        let n_grid = n_grid.max(default_grid(k_max));
        let mut f = TorusFunction {
            k_max,
            coeffs,
            n_grid,
            samples: Vec::new(),
        };
        f.samples = (0..n_grid)
            .map(|j| f.eval(TWO_PI * j as f64 / n_grid as f64))
            .collect();
        f
    }

    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::from_coeffs(0, vec![c])
    }

    /// `amp · e^{ikt}`.
    pub fn mode(k: i64, amp: C64) -> Self {
        let k_max = k.unsigned_abs() as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * k_max + 1];
        coeffs[(k + k_max as i64) as usize] = amp;
        Self::from_coeffs(k_max, coeffs)
    }

    /// `cos(kt)`.
    pub fn cos(k: usize) -> Self {
        if k == 0 {
            return Self::constant(C64::new(1.0, 0.0));
        }
        Self::mode(k as i64, C64::new(0.5, 0.0)).add(&Self::mode(-(k as i64), C64::new(0.5, 0.0)))
    }

    /// `sin(kt)`.
    pub fn sin(k: usize) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Self::mode(k as i64, C64::new(0.0, -0.5)).add(&Self::mode(-(k as i64), C64::new(0.0, 0.5)))
    }

    /// Projects an arbitrary periodic function onto modes `|k| ≤ k_max`
    /// using an oversampled DFT.
    pub fn from_fn(k_max: usize, f: impl Fn(f64) -> C64) -> Self {
        let n = (8 * k_max + 8).max(64);
        let samples: Vec<C64> = (0..n).map(|j| f(TWO_PI * j as f64 / n as f64)).collect();
        Self::from_samples(&samples, k_max)
    }

    /// Interpolates uniform samples on `[0, 2π)`, keeping modes `|k| ≤ k_max`.
    pub fn from_samples(samples: &[C64], k_max: usize) -> Self {
        let n = samples.len();
        assert!(2 * k_max < n, "need more than 2*k_max samples");
        let coeffs = (-(k_max as i64)..=k_max as i64)
            .map(|k| {
                let mut acc = C64::new(0.0, 0.0);
                for (j, s) in samples.iter().enumerate() {
                    let ang = -TWO_PI * (k * j as i64).rem_euclid(n as i64) as f64 / n as f64;
                    acc += s * C64::from_polar(1.0, ang);
                }
                acc / n as f64
            })
            .collect();
        Self::from_coeffs(k_max, coeffs)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn grid_point(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.n_grid as f64
    }

    /// `ĝ(k)`, zero outside the stored band.
    pub fn coeff(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.k_max {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.k_max as i64) as usize]
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        let z = C64::from_polar(1.0, t);
        let zi = z.conj();
        let k_max = self.k_max as i64;
        let mut acc = self.coeff(0);
        let (mut p, mut m) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for k in 1..=k_max {
            p *= z;
            m *= zi;
            acc += self.coeff(k) * p + self.coeff(-k) * m;
        }
        acc
    }

    /// Samples on a refined grid of `factor · n_grid` points.
    pub fn refined_samples(&self, factor: usize) -> Vec<C64> {
        let m = factor * self.n_grid;
        (0..m).map(|j| self.eval(TWO_PI * j as f64 / m as f64)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    pub fn real_asymmetry(&self) -> f64 {
        let k_max = self.k_max as i64;
        (0..=k_max)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        let scale = 1.0 + self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.real_asymmetry() <= REAL_TOL * scale
    }

    /// All coefficients below `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.norm() <= tol)
    }

    fn zip_coeffs(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Self {
        let k_max = self.k_max.max(other.k_max);
        let coeffs = (-(k_max as i64)..=k_max as i64)
            .map(|k| op(self.coeff(k), other.coeff(k)))
            .collect();
        Self::with_grid(k_max, coeffs, self.n_grid.max(other.n_grid))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Self::with_grid(self.k_max, coeffs, self.n_grid)
    }

    /// Exact product; the band grows to `k_max + other.k_max`.
    pub fn mul(&self, other: &Self) -> Self {
        let k_max = self.k_max + other.k_max;
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * k_max + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            let ka = i as i64 - self.k_max as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let kb = j as i64 - other.k_max as i64;
                coeffs[(ka + kb + k_max as i64) as usize] += a * b;
            }
        }
        Self::from_coeffs(k_max, coeffs)
    }

    /// Pointwise real part.
    pub fn re(&self) -> Self {
        self.conj_mix(|a, b| (a + b) * 0.5)
    }

    /// Pointwise imaginary part.
    pub fn im(&self) -> Self {
        self.conj_mix(|a, b| (a - b) * C64::new(0.0, -0.5))
    }

    fn conj_mix(&self, op: impl Fn(C64, C64) -> C64) -> Self {
        let k_max = self.k_max as i64;
        let coeffs = (-k_max..=k_max)
            .map(|k| op(self.coeff(k), self.coeff(-k).conj()))
            .collect();
        Self::with_grid(self.k_max, coeffs, self.n_grid)
    }

    pub fn derivative(&self) -> Self {
        let k_max = self.k_max as i64;
        let coeffs = (-k_max..=k_max)
            .map(|k| self.coeff(k) * C64::new(0.0, k as f64))
            .collect();
        Self::with_grid(self.k_max, coeffs, self.n_grid)
    }

    /// `ĝ(0)`.
    pub fn mean(&self) -> C64 {
        self.coeff(0)
    }

    /// `A(t) = ∫₀ᵗ g − g₀ t`: periodic, `A(0) = 0`, `A' = g − g₀`.
    pub fn antiderivative_zero_mean(&self) -> Self {
        let k_max = self.k_max as i64;
        let mut coeffs: Vec<C64> = (-k_max..=k_max)
            .map(|k| {
                if k == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    self.coeff(k) / C64::new(0.0, k as f64)
                }
            })
            .collect();
        let at_zero: C64 = coeffs.iter().sum();
        coeffs[self.k_max] = -at_zero;
        Self::with_grid(self.k_max, coeffs, self.n_grid)
    }

    /// `∫₀ᵗ g` for any real `t` (not reduced modulo 2π).
    pub fn integral_from_zero(&self, t: f64) -> C64 {
        let z = C64::from_polar(1.0, t);
        let zi = z.conj();
        let mut acc = self.mean() * t;
        let (mut p, mut m) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for k in 1..=self.k_max as i64 {
            p *= z;
            m *= zi;
            let ik = C64::new(0.0, k as f64);
            acc += self.coeff(k) * (p - 1.0) / ik - self.coeff(-k) * (m - 1.0) / ik;
        }
        acc
    }

    fn require_real(&self) -> Result<()> {
        if self.is_real() {
            Ok(())
        } else {
            Err(Error::NotReal(self.real_asymmetry()))
        }
    }

    fn require_zero_mean(&self) -> Result<()> {
        let m = self.mean().norm();
        if m < MEAN_TOL {
            Ok(())
        } else {
            Err(Error::NonzeroMean(m))
        }
    }

    /// Returns `Some((t⁺, t⁻))` (argmax, argmin on the refined grid) when the
    /// function takes values above `tol` and below `-tol`, with
    /// `tol = 1e-12 · max|g|`.
    pub fn changes_sign(&self) -> Result<Option<(f64, f64)>> {
        self.require_real()?;
        let vals: Vec<f64> = self.refined_samples(REFINE).iter().map(|s| s.re).collect();
        let m = vals.len();
        let tol = SIGN_TOL * vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let (imax, vmax) = argext(&vals, |a, b| a > b);
        let (imin, vmin) = argext(&vals, |a, b| a < b);
        if vmax > tol && vmin < -tol {
            let t = |i: usize| TWO_PI * i as f64 / m as f64;
            Ok(Some((t(imax), t(imin))))
        } else {
            Ok(None)
        }
    }

    /// Real samples of `P(t) = ∫₀ᵗ b` on the refined grid.
    fn running_integral_samples(&self) -> Vec<f64> {
        let m = REFINE * self.n_grid;
        (0..m)
            .map(|j| self.integral_from_zero(TWO_PI * j as f64 / m as f64).re)
            .collect()
    }

    /// Argmax and argmin of `P(t) = ∫₀ᵗ b` on the refined grid, ties to the
    /// smallest `t`.
    pub fn running_integral_extrema(&self) -> Result<RunningExtrema> {
        self.require_real()?;
        self.require_zero_mean()?;
        let p = self.running_integral_samples();
        let m = p.len();
        let (imax, max) = argext(&p, |a, b| a > b);
        let (imin, min) = argext(&p, |a, b| a < b);
        let t = |i: usize| TWO_PI * i as f64 / m as f64;
        Ok(RunningExtrema {
            t_max: t(imax),
            max,
            t_min: t(imin),
            min,
        })
    }

    /// Whether every sublevel set `{t : P(t) < r}` is connected.
    pub fn sublevels_connected(&self) -> Result<bool> {
        self.require_real()?;
        self.require_zero_mean()?;
        let p = self.running_integral_samples();
        Ok(test_levels(&p).all(|r| arc_count(p.iter().map(|&v| v < r)) <= 1))
    }

    /// Whether every superlevel set `{t : P(t) ≥ r}` is connected.
    pub fn superlevels_connected(&self) -> Result<bool> {
        self.require_real()?;
        self.require_zero_mean()?;
        let p = self.running_integral_samples();
        Ok(test_levels(&p).all(|r| arc_count(p.iter().map(|&v| v >= r)) <= 1))
    }

    /// Extremes of windowed integrals over the `n_grid × (n_grid+1)` grid
    /// `t, s ∈ [0, 2π]`:
    /// `B = min ∫_t^{t+s} b` and `B̃ = max ∫_{t-s}^t b`.
    pub fn windowed_integral_extrema(&self) -> Result<WindowedExtrema> {
        self.require_real()?;
        let n = self.n_grid;
        let h = TWO_PI / n as f64;
        let b0 = self.mean().re;
        let base: Vec<f64> = (0..n)
            .map(|j| self.integral_from_zero(j as f64 * h).re - b0 * j as f64 * h)
            .collect();
        let lifted = |idx: i64| -> f64 {
            let r = idx.rem_euclid(n as i64) as usize;
            base[r] + b0 * idx as f64 * h
        };
        let mut out = WindowedExtrema {
            b_min: f64::INFINITY,
            t0: 0.0,
            s0: 0.0,
            b_max: f64::NEG_INFINITY,
            t1: 0.0,
            s1: 0.0,
        };
        for i in 0..=n as i64 {
            for j in 0..=n as i64 {
                let g = lifted(i + j) - lifted(i);
                if g < out.b_min {
                    out.b_min = g;
                    out.t0 = i as f64 * h;
                    out.s0 = j as f64 * h;
                }
                let gt = lifted(i) - lifted(i - j);
                if gt > out.b_max {
                    out.b_max = gt;
                    out.t1 = i as f64 * h;
                    out.s1 = j as f64 * h;
                }
            }
        }
        Ok(out)
    }
}

/// C∞ step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunningExtrema {
    pub t_max: f64,
    pub max: f64,
    pub t_min: f64,
    pub min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowedExtrema {
    /// `B = min G(t,s)` attained at `(t0, s0)`.
    pub b_min: f64,
    pub t0: f64,
    pub s0: f64,
    /// `B̃ = max ∫_{t-s}^t b` attained at `(t1, s1)`.
    pub b_max: f64,
    pub t1: f64,
    pub s1: f64,
}

/// First index achieving the extremum selected by `better`.
fn argext(v: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if better(x, best.1) {
            best = (i, x);
        }
    }
    best
}

/// Number of maximal runs of `true` on the circular sequence.
fn arc_count(member: impl Iterator<Item = bool>) -> usize {
    let m: Vec<bool> = member.collect();
    let n = m.len();
    (0..n).filter(|&j| m[j] && !m[(j + n - 1) % n]).count()
}

/// Critical values of the circular sample sequence plus midpoints between
/// consecutive ones.
fn test_levels(p: &[f64]) -> impl Iterator<Item = f64> {
    let n = p.len();
    let mut crit: Vec<f64> = (0..n)
        .filter(|&j| {
            let prev = p[(j + n - 1) % n];
            let next = p[(j + 1) % n];
            (p[j] - prev) * (next - p[j]) <= 0.0
        })
        .map(|j| p[j])
        .collect();
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crit.dedup();
    let mids: Vec<f64> = crit.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    crit.into_iter().chain(mids)
}

#[derive(Serialize, Deserialize)]
struct TorusFunctionJson {
    k_max: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for TorusFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TorusFunctionJson {
            k_max: self.k_max,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TorusFunctionJson::deserialize(d)?;
        let n = 2 * j.k_max + 1;
        if j.re.len() != n || j.im.len() != n {
            return Err(serde::de::Error::custom(format!(
                "expected {n} coefficients for k_max = {}",
                j.k_max
            )));
        }
        let coeffs = j.re.iter().zip(&j.im).map(|(&r, &i)| C64::new(r, i)).collect();
        Ok(TorusFunction::from_coeffs(j.k_max, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn trapezoid_mean(g: &TorusFunction, n: usize) -> C64 {
        (0..n).map(|j| g.eval(TWO_PI * j as f64 / n as f64)).sum::<C64>() / n as f64
    }

    #[test]
    fn mean_examples() {
        let g = TorusFunction::constant(c(2.0, 0.0)).add(&TorusFunction::sin(1));
        assert_abs_diff_eq!(g.mean().re, 2.0, epsilon = 1e-15);
        assert!((g.mean() - trapezoid_mean(&g, g.n_grid())).norm() < 1e-12);

        // i sin²t: oracle by 4096-point quadrature of the closed form.
        let s = TorusFunction::sin(1);
        let g = s.mul(&s).scale(c(0.0, 1.0));
        let oracle: C64 = (0..4096)
            .map(|j| {
                let t = TWO_PI * j as f64 / 4096.0;
                c(0.0, t.sin().powi(2))
            })
            .sum::<C64>()
            / 4096.0;
        assert!((g.mean() - oracle).norm() < 1e-12);
        assert!((g.mean() - c(0.0, 0.5)).norm() < 1e-15);

        assert_eq!(TorusFunction::zero().mean(), c(0.0, 0.0));
    }

    #[test]
    fn antiderivative_examples() {
        let a = TorusFunction::cos(1).antiderivative_zero_mean();
        let expect = TorusFunction::sin(1);
        for j in 0..32 {
            let t = 0.2 * j as f64;
            assert!((a.eval(t) - expect.eval(t)).norm() < 1e-14);
        }
        let a = TorusFunction::constant(c(5.0, 0.0)).antiderivative_zero_mean();
        assert!(a.is_zero(1e-15));

        let g = TorusFunction::constant(c(1.0, 0.0)).add(&TorusFunction::cos(2));
        let a = g.antiderivative_zero_mean();
        assert!(a.eval(0.0).norm() < 1e-15);
        for j in 0..32 {
            let t = 0.2 * j as f64;
            assert!((a.eval(t).re - (2.0 * t).sin() / 2.0).abs() < 1e-14);
        }
        // A' = g - 1
        let d = a.derivative().sub(&g).add(&TorusFunction::constant(c(1.0, 0.0)));
        assert!(d.max_abs() < 1e-14);
    }

    #[test]
    fn sign_examples() {
        let (tp, tm) = TorusFunction::sin(1).changes_sign().unwrap().unwrap();
        assert_abs_diff_eq!(tp, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tm, 3.0 * PI / 2.0, epsilon = 1e-12);
        let g = TorusFunction::constant(c(1.0, 0.0)).add(&TorusFunction::sin(1).scale(c(0.5, 0.0)));
        assert!(g.changes_sign().unwrap().is_none());
        assert!(TorusFunction::zero().changes_sign().unwrap().is_none());
        let complex = TorusFunction::mode(1, c(1.0, 0.0));
        assert!(matches!(complex.changes_sign(), Err(Error::NotReal(_))));
    }

    #[test]
    fn running_extrema_examples() {
        let e = TorusFunction::sin(1).running_integral_extrema().unwrap();
        assert_abs_diff_eq!(e.t_max, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(e.max, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.t_min, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.min, 0.0, epsilon = 1e-12);

        let e = TorusFunction::zero().running_integral_extrema().unwrap();
        assert_eq!((e.t_max, e.max, e.t_min, e.min), (0.0, 0.0, 0.0, 0.0));

        let e = TorusFunction::cos(1).running_integral_extrema().unwrap();
        assert_abs_diff_eq!(e.t_max, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.max, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.t_min, 3.0 * PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.min, -1.0, epsilon = 1e-12);

        let shifted = TorusFunction::cos(1).add(&TorusFunction::constant(c(1.0, 0.0)));
        assert!(matches!(
            shifted.running_integral_extrema(),
            Err(Error::NonzeroMean(_))
        ));
    }

    /// Brute-force oracle: arc counts of {P < r} over a dense sweep of r.
    fn sweep_connected(b: &TorusFunction) -> bool {
        let p: Vec<f64> = (0..2000)
            .map(|j| b.integral_from_zero(TWO_PI * j as f64 / 2000.0).re)
            .collect();
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..=400).all(|i| {
            let r = lo - 0.01 + (hi - lo + 0.02) * i as f64 / 400.0;
            arc_count(p.iter().map(|&v| v < r)) <= 1
        })
    }

    #[test]
    fn sublevel_examples() {
        let b = TorusFunction::sin(1);
        assert!(b.sublevels_connected().unwrap());
        assert!(sweep_connected(&b));
        let b2 = TorusFunction::sin(2);
        assert!(!b2.sublevels_connected().unwrap());
        assert!(!sweep_connected(&b2));
        // Ω_{0.25} for P = (1 - cos 2t)/2 is two arcs.
        let p: Vec<f64> = (0..400)
            .map(|j| b2.integral_from_zero(TWO_PI * j as f64 / 400.0).re)
            .collect();
        assert_eq!(arc_count(p.iter().map(|&v| v < 0.25)), 2);
        assert!(TorusFunction::zero().sublevels_connected().unwrap());
        for b in [TorusFunction::sin(1), TorusFunction::sin(2), TorusFunction::zero()] {
            assert_eq!(
                b.sublevels_connected().unwrap(),
                b.superlevels_connected().unwrap()
            );
        }
    }

    #[test]
    fn windowed_examples() {
        let w = TorusFunction::sin(1).windowed_integral_extrema().unwrap();
        // oracle: G(t,s) = cos t - cos(t+s), exhaustive over the same grid
        let n = TorusFunction::sin(1).n_grid();
        let h = TWO_PI / n as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                let (t, s) = (i as f64 * h, j as f64 * h);
                let g = t.cos() - (t + s).cos();
                if g < best.0 - 1e-12 {
                    best = (g, t, s);
                }
            }
        }
        assert_abs_diff_eq!(w.b_min, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best.0, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.t0, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w.s0, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w.b_max, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.t1, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w.s1, PI, epsilon = 1e-12);

        let w = TorusFunction::constant(c(1.0, 0.0)).windowed_integral_extrema().unwrap();
        assert_abs_diff_eq!(w.b_min, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.s0, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.b_max, TWO_PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w.s1, TWO_PI, epsilon = 1e-12);

        let w = TorusFunction::zero().windowed_integral_extrema().unwrap();
        assert_eq!((w.b_min, w.b_max), (0.0, 0.0));
    }

    #[test]
    fn json_layout() {
        let g = TorusFunction::mode(1, c(1.0, 2.0));
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"k_max":1,"re":[0.0,0.0,1.0],"im":[0.0,0.0,2.0]}"#);
        let back: TorusFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<TorusFunction>(r#"{"k_max":1,"re":[1.0],"im":[0.0]}"#).is_err());
    }

    #[test]
    fn samples_match_series() {
        let g = TorusFunction::from_fn(8, |t| C64::new((t.sin()).exp(), t.cos()));
        for (j, s) in g.samples().iter().enumerate() {
            let direct = g.eval(g.grid_point(j));
            assert!((s - direct).norm() <= 1e-12 * direct.norm().max(1.0));
        }
        assert!(g.n_grid() >= 4 * g.k_max() + 4);
    }
}
