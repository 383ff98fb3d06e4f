//! Uniform periodic grid with second-order finite differences, rectangle-rule
//! quadrature and DFT-based Sobolev multipliers.

use ndarray::Array1;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Grid samples of a scalar quantity.
pub type Field = Array1<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    First,
    Second,
}

/// Periodic grid on `[0, L)` with nodes `x_j = j dx`, `dx = L / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    length: f64,
    n: usize,
}

impl PeriodicGrid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {length}"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "number of points must be even and >= 8, got {n}"
            )));
        }
        Ok(PeriodicGrid { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Field {
        Array1::from_shape_fn(self.n, |j| self.x(j))
    }

    pub fn sample(&self, mut f: impl FnMut(f64) -> f64) -> Field {
        Array1::from_shape_fn(self.n, |j| f(self.x(j)))
    }

    pub fn zeros(&self) -> Field {
        Array1::zeros(self.n)
    }

    pub fn constant(&self, c: f64) -> Field {
        Array1::from_elem(self.n, c)
    }

    pub fn check(&self, f: &Field) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Angular wavenumber of DFT bin `m` (`0..n`), in the signed ordering
    /// `0, 1, ..., n/2, -(n/2 - 1), ..., -1` scaled by `2 pi / L`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m <= self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        2.0 * std::f64::consts::PI * signed / self.length
    }

    pub fn derivative(&self, u: &Field, order: Derivative) -> Field {
        match order {
            Derivative::First => self.d1(u),
            Derivative::Second => self.d2(u),
        }
    }

    /// Centered first difference `(u_{j+1} - u_{j-1}) / (2 dx)`.
    pub fn d1(&self, u: &Field) -> Field {
        let n = self.n;
        let inv = 1.0 / (2.0 * self.dx());
        Array1::from_shape_fn(n, |j| (u[(j + 1) % n] - u[(j + n - 1) % n]) * inv)
    }

    /// Centered second difference `(u_{j+1} - 2 u_j + u_{j-1}) / dx^2`.
    pub fn d2(&self, u: &Field) -> Field {
        let n = self.n;
        let inv = 1.0 / (self.dx() * self.dx());
        Array1::from_shape_fn(n, |j| {
            (u[(j + 1) % n] - 2.0 * u[j] + u[(j + n - 1) % n]) * inv
        })
    }

    /// Forward difference `(u_{j+1} - u_j) / dx`.
    pub fn forward_difference(&self, u: &Field) -> Field {
        let n = self.n;
        let inv = 1.0 / self.dx();
        Array1::from_shape_fn(n, |j| (u[(j + 1) % n] - u[j]) * inv)
    }

    /// Rectangle-rule inner product `dx * sum f_j g_j`.
    pub fn inner(&self, f: &Field, g: &Field) -> f64 {
        self.dx() * f.dot(g)
    }

    pub fn l2_norm(&self, f: &Field) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Discrete mass `dx * sum f_j`.
    pub fn integral(&self, f: &Field) -> f64 {
        self.dx() * f.sum()
    }

    fn forward(&self, f: &Field) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(self.n).process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Field {
        FftPlanner::new().plan_fft_inverse(self.n).process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Applies the Fourier multiplier `symbol(k)` mode by mode.
    pub fn fourier_multiplier(&self, f: &Field, symbol: impl Fn(f64) -> Complex64) -> Field {
        let mut spec = self.forward(f);
        for (m, c) in spec.iter_mut().enumerate() {
            *c *= symbol(self.wavenumber(m));
        }
        self.inverse(spec)
    }

    /// `Lambda^s f` with `Lambda = (1 - d_x^2)^{1/2}`; `s = 0` returns `f` unchanged.
    pub fn lambda_s(&self, f: &Field, s: f64) -> Field {
        if s == 0.0 {
            return f.clone();
        }
        self.fourier_multiplier(f, |k| Complex64::new((1.0 + k * k).powf(0.5 * s), 0.0))
    }

    /// Spectral derivative; the Nyquist mode is dropped so the result stays real.
    pub fn spectral_derivative(&self, f: &Field) -> Field {
        let nyquist = self.wavenumber(self.n / 2);
        self.fourier_multiplier(f, |k| {
            if k == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        })
    }

    /// `|f|_{H^s} = |Lambda^s f|_{L^2}`.
    pub fn sobolev_norm(&self, f: &Field, s: f64) -> f64 {
        self.l2_norm(&self.lambda_s(f, s))
    }

    /// `sqrt(|f|^2_{L^2} + mu |d_x f|^2_{L^2})` with the spectral derivative.
    pub fn h1mu_norm(&self, f: &Field, mu: f64) -> f64 {
        let df = self.spectral_derivative(f);
        (self.inner(f, f) + mu * self.inner(&df, &df)).sqrt()
    }

    /// `(L / n^2) sum_m |F_m|^2`, equal to `inner(f, f)` by Parseval.
    pub fn mode_energy(&self, f: &Field) -> f64 {
        let spec = self.forward(f);
        let n = self.n as f64;
        self.length / (n * n) * spec.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs(f: &Field) -> f64 {
        f.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(PeriodicGrid::new(1.0, 7).is_err());
        assert!(PeriodicGrid::new(1.0, 6).is_err());
        assert!(PeriodicGrid::new(0.0, 16).is_err());
        let g = PeriodicGrid::new(3.0, 12).unwrap();
        assert_eq!(g.dx() * 12.0, 3.0);
    }

    #[test]
    fn derivatives_of_constant_vanish_exactly() {
        let g = PeriodicGrid::new(5.0, 32).unwrap();
        let c = g.constant(1.7);
        assert!(g.d1(&c).iter().all(|&x| x == 0.0));
        assert!(g.d2(&c).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_derivative_of_sine_is_second_order() {
        let l = 3.0;
        let kk = 2.0 * PI / l;
        let err = |n: usize| {
            let g = PeriodicGrid::new(l, n).unwrap();
            let u = g.sample(|x| (kk * x).sin());
            let exact = g.sample(|x| kk * (kk * x).cos());
            max_abs(&(g.d1(&u) - exact))
        };
        let (e1, e2) = (err(64), err(128));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
        let g = PeriodicGrid::new(l, 64).unwrap();
        assert!(e1 <= kk.powi(3) / 6.0 * g.dx().powi(2) * 1.01);
    }

    #[test]
    fn second_derivative_of_sine() {
        let g = PeriodicGrid::new(2.0 * PI, 128).unwrap();
        let u = g.sample(f64::sin);
        let err = max_abs(&(g.d2(&u) + &u));
        assert!(err <= g.dx().powi(2) / 12.0 * 1.01, "{err}");
    }

    #[test]
    fn quadrature_basics() {
        let g = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let s = g.sample(f64::sin);
        let c = g.sample(f64::cos);
        assert!(g.inner(&s, &c).abs() <= 1e-14);
        assert!((g.inner(&s, &s) - PI).abs() <= 1e-12);
        let one = g.constant(1.0);
        let l = PeriodicGrid::new(2.5, 16).unwrap();
        let one_l = l.constant(1.0);
        assert_eq!(l.inner(&one_l, &one_l), 2.5);
        assert!((g.inner(&one, &one) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn lambda_s_acts_on_modes() {
        let g = PeriodicGrid::new(2.0 * PI, 32).unwrap();
        let u = g.sample(|x| (2.0 * x).cos());
        assert_eq!(g.lambda_s(&u, 0.0), u);
        let l2 = g.lambda_s(&u, 2.0);
        assert!(max_abs(&(l2 - &u * 5.0)) < 1e-12);
        let once = g.lambda_s(&g.lambda_s(&u, 1.0), 1.0);
        let twice = g.lambda_s(&u, 2.0);
        assert!(max_abs(&(once - &twice)) <= 1e-12 * max_abs(&twice));
    }

    #[test]
    fn sobolev_norms_of_sine() {
        let g = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let s = g.sample(f64::sin);
        assert_eq!(g.sobolev_norm(&g.zeros(), 1.5), 0.0);
        assert!((g.sobolev_norm(&s, 0.0) - PI.sqrt()).abs() < 1e-10);
        let h1mu = g.h1mu_norm(&s, 0.04);
        assert!((h1mu * h1mu - 3.267_256).abs() < 1e-6);
        assert!((h1mu * h1mu - PI * 1.04).abs() < 1e-8);
    }

    #[test]
    fn summation_by_parts_and_parseval() {
        let g = PeriodicGrid::new(7.0, 48).unwrap();
        let f = g.sample(|x| (x * 0.9).sin().exp());
        let h = g.sample(|x| (2.0 * PI * x / 7.0).cos() + 0.3 * x.sin().powi(2));
        let lhs = g.inner(&g.d1(&f), &h);
        let rhs = -g.inner(&f, &g.d1(&h));
        assert!((lhs - rhs).abs() < 1e-13);
        let e = g.inner(&f, &f);
        assert!((g.mode_energy(&f) - e).abs() <= 1e-12 * e);
    }
}
