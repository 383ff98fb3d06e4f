//! The symmetric elliptic operator
//!
//! ```text
//! T V = q1 V - mu nu d_x(q2 d_x V)
//! ```
//!
//! together with the Green–Naghdi operators `Tcal[h, b]`, `Qbar`, `Rbar` and the
//! first-order operator `Qfrak[zeta, b, v]` of the quasilinear form.
//!
//! `T` is discretized in conservative form with face-averaged `q2`, which makes
//! the matrix symmetric; under positivity of `q1` and `q2` it is positive
//! definite and is inverted by a cyclic tridiagonal LDL^T factorization with a
//! Sherman–Morrison correction for the periodic corner entries.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::fields::{Bathymetry, DerivedFields};
use crate::grid::{Field, PeriodicGrid};
use crate::regime::{ModelCoefficients, RegimeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct TOperator {
    q1: Field,
    q2: Field,
    mu_nu: f64,
    face_q2: Field,
    dx: f64,
}

impl TOperator {
    pub fn new(grid: &PeriodicGrid, q1: Field, q2: Field, mu_nu: f64) -> Result<Self> {
        grid.check(&q1)?;
        grid.check(&q2)?;
        let n = grid.n();
        let face_q2 = Array1::from_shape_fn(n, |j| 0.5 * (q2[j] + q2[(j + 1) % n]));
        Ok(TOperator {
            q1,
            q2,
            mu_nu,
            face_q2,
            dx: grid.dx(),
        })
    }

    /// `T[eps zeta, beta b]` for the state the derived fields were evaluated on.
    pub fn from_derived(
        grid: &PeriodicGrid,
        df: &DerivedFields,
        params: &RegimeParams,
        coeffs: &ModelCoefficients,
    ) -> Result<Self> {
        Self::new(grid, df.q1.clone(), df.q2.clone(), params.mu * coeffs.nu)
    }

    pub fn q1(&self) -> &Field {
        &self.q1
    }

    pub fn q2(&self) -> &Field {
        &self.q2
    }

    pub fn face_q2(&self) -> &Field {
        &self.face_q2
    }

    pub fn mu_nu(&self) -> f64 {
        self.mu_nu
    }

    fn stiffness(&self) -> f64 {
        self.mu_nu / (self.dx * self.dx)
    }

    pub fn apply(&self, v: &Field) -> Field {
        let n = self.q1.len();
        let c = self.stiffness();
        let fq = &self.face_q2;
        Array1::from_shape_fn(n, |j| {
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            self.q1[j] * v[j] - c * (fq[j] * (v[jp] - v[j]) - fq[jm] * (v[j] - v[jm]))
        })
    }

    /// Factorizes the periodic tridiagonal matrix. Fails on a non-positive
    /// pivot, which cannot happen when `q1 > 0` and `q2 > 0`.
    pub fn factorize(&self) -> Result<TFactor> {
        let n = self.q1.len();
        let c = self.stiffness();
        let fq = &self.face_q2;
        let mut diag: Vec<f64> = (0..n)
            .map(|j| self.q1[j] + c * (fq[j] + fq[(j + n - 1) % n]))
            .collect();
        // off[j] couples rows j and j+1; off[n-1] is the periodic corner
        let off: Vec<f64> = (0..n).map(|j| -c * fq[j]).collect();
        let corner = off[n - 1];

        // A = A' + u w^T with u = (s, 0, .., corner), w = (1, 0, .., corner / s)
        let shift = -diag[0];
        if !(shift < 0.0) {
            return Err(Error::SolveFailure {
                pivot: diag[0],
                index: 0,
            });
        }
        diag[0] -= shift;
        diag[n - 1] -= corner * corner / shift;

        let mut pivots = vec![0.0; n];
        let mut lower = vec![0.0; n];
        pivots[0] = diag[0];
        for j in 1..n {
            lower[j] = off[j - 1] / pivots[j - 1];
            pivots[j] = diag[j] - lower[j] * off[j - 1];
            if !(pivots[j] > 0.0) {
                return Err(Error::SolveFailure {
                    pivot: pivots[j],
                    index: j,
                });
            }
        }

        let mut factor = TFactor {
            pivots,
            lower,
            off,
            w_last: corner / shift,
            z: Vec::new(),
            denom: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = shift;
        u[n - 1] = corner;
        let z = factor.tridiagonal_solve(u);
        let denom = 1.0 + z[0] + factor.w_last * z[n - 1];
        if !(denom > 0.0) {
            return Err(Error::SolveFailure {
                pivot: denom,
                index: n,
            });
        }
        factor.z = z;
        factor.denom = denom;
        Ok(factor)
    }

    pub fn solve(&self, rhs: &Field) -> Result<Field> {
        Ok(self.factorize()?.solve(rhs))
    }
}

/// LDL^T factors of the non-periodic part and the Sherman–Morrison data.
#[derive(Debug, Clone)]
pub struct TFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
    off: Vec<f64>,
    w_last: f64,
    z: Vec<f64>,
    denom: f64,
}

impl TFactor {
    fn tridiagonal_solve(&self, mut y: Vec<f64>) -> Vec<f64> {
        let n = y.len();
        for j in 1..n {
            y[j] -= self.lower[j] * y[j - 1];
        }
        y[n - 1] /= self.pivots[n - 1];
        for j in (0..n - 1).rev() {
            y[j] = (y[j] - self.off[j] * y[j + 1]) / self.pivots[j];
        }
        y
    }

    pub fn solve(&self, rhs: &Field) -> Field {
        let n = rhs.len();
        let y = self.tridiagonal_solve(rhs.to_vec());
        let coef = (y[0] + self.w_last * y[n - 1]) / self.denom;
        Array1::from_shape_fn(n, |j| y[j] - coef * self.z[j])
    }
}

/// `Tcal[h, b] V = -(1/3h) d_x(h^3 d_x V) + (1/2h)[d_x(h^2 b' V) - h^2 b' d_x V] + b'^2 V`.
///
/// Only `b'` enters; pass `bathy.scaled(beta)` for `Tcal[h, beta b]` and a flat
/// bathymetry for `Tcal[h, 0]`.
pub fn tcal_apply(grid: &PeriodicGrid, h: &Field, bathy: &Bathymetry, v: &Field) -> Field {
    let n = grid.n();
    let db = bathy.db();
    let dv = grid.d1(v);
    let flux = Array1::from_shape_fn(n, |j| h[j] * h[j] * h[j] * dv[j]);
    let dflux = grid.d1(&flux);
    let slope = Array1::from_shape_fn(n, |j| h[j] * h[j] * db[j] * v[j]);
    let dslope = grid.d1(&slope);
    Array1::from_shape_fn(n, |j| {
        -dflux[j] / (3.0 * h[j])
            + (dslope[j] - h[j] * h[j] * db[j] * dv[j]) / (2.0 * h[j])
            + db[j] * db[j] * v[j]
    })
}

/// The two velocity profiles `h1 v / (h1 + gamma h2)` and `-h2 v / (h1 + gamma h2)`.
fn layer_velocities(df: &DerivedFields, v: &Field, gamma: f64) -> (Field, Field) {
    let n = v.len();
    let den = Array1::from_shape_fn(n, |j| df.h1[j] + gamma * df.h2[j]);
    let w1 = Array1::from_shape_fn(n, |j| df.h1[j] * v[j] / den[j]);
    let w2 = Array1::from_shape_fn(n, |j| -df.h2[j] * v[j] / den[j]);
    (w1, w2)
}

/// `Qbar[h1, h2] v = Tcal[h2, beta b](h1 v / D) - gamma Tcal[h1, 0](-h2 v / D)`, `D = h1 + gamma h2`.
pub fn qbar_apply(
    grid: &PeriodicGrid,
    df: &DerivedFields,
    bathy: &Bathymetry,
    v: &Field,
    params: &RegimeParams,
) -> Field {
    let gamma = params.gamma;
    let (w1, w2) = layer_velocities(df, v, gamma);
    let lower = tcal_apply(grid, &df.h2, &bathy.scaled(params.beta), &w1);
    let upper = tcal_apply(grid, &df.h1, &Bathymetry::flat(grid), &w2);
    lower - upper * gamma
}

/// `Rbar[h1, h2] v`, the quadratic velocity term of the Green–Naghdi system.
pub fn rbar_apply(
    grid: &PeriodicGrid,
    df: &DerivedFields,
    bathy: &Bathymetry,
    v: &Field,
    params: &RegimeParams,
) -> Field {
    let n = grid.n();
    let (gamma, beta) = (params.gamma, params.beta);
    let (w1, w2) = layer_velocities(df, v, gamma);
    let dw1 = grid.d1(&w1);
    let dw2 = grid.d1(&w2);
    let db = bathy.db();
    let t_lower = tcal_apply(grid, &df.h2, &bathy.scaled(beta), &w1);
    let t_upper = tcal_apply(grid, &df.h1, &Bathymetry::flat(grid), &w2);
    Array1::from_shape_fn(n, |j| {
        let a = -df.h2[j] * dw1[j] + beta * db[j] * w1[j];
        let b = df.h1[j] * dw2[j];
        0.5 * a * a - 0.5 * gamma * b * b - w1[j] * t_lower[j] + gamma * w2[j] * t_upper[j]
    })
}

/// `Qfrak[eps zeta, beta b, v] f = 2 q1 q3 v f + mu kappa d_x(f d_x v)`.
pub fn qfrak_apply(
    grid: &PeriodicGrid,
    df: &DerivedFields,
    v: &Field,
    f: &Field,
    params: &RegimeParams,
    coeffs: &ModelCoefficients,
) -> Field {
    let n = grid.n();
    let dv = grid.d1(v);
    let prod = Array1::from_shape_fn(n, |j| f[j] * dv[j]);
    let dprod = grid.d1(&prod);
    let mk = params.mu * coeffs.kappa;
    Array1::from_shape_fn(n, |j| {
        2.0 * df.q1[j] * df.q3[j] * v[j] * f[j] + mk * dprod[j]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{derive, BathymetryProfile, State};
    use crate::regime::compute_coefficients;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_abs(f: &Field) -> f64 {
        f.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn flat_op(grid: &PeriodicGrid, mu_nu: f64) -> TOperator {
        TOperator::new(grid, grid.constant(1.0), grid.constant(1.0), mu_nu).unwrap()
    }

    fn random_op(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> TOperator {
        let q1 = grid.sample(|_| 0.3 + rng.gen::<f64>());
        let q2 = grid.sample(|_| 0.2 + rng.gen::<f64>());
        TOperator::new(grid, q1, q2, 0.04 / 3.0).unwrap()
    }

    #[test]
    fn flat_symbol_on_sine() {
        let grid = PeriodicGrid::new(2.0 * PI, 256).unwrap();
        let op = flat_op(&grid, 0.04 / 3.0);
        let s = grid.sample(f64::sin);
        let err = max_abs(&(op.apply(&s) - &s * (1.0 + 0.04 / 3.0)));
        assert!(err < 0.04 / 3.0 * grid.dx().powi(2), "{err}");
        let inv = op.solve(&s).unwrap();
        let err = max_abs(&(inv - &s / (1.0 + 0.04 / 3.0)));
        assert!(err < 0.04 / 3.0 * grid.dx().powi(2), "{err}");
    }

    #[test]
    fn constants_pass_through() {
        let grid = PeriodicGrid::new(3.0, 32).unwrap();
        let op = flat_op(&grid, 0.1);
        let c = grid.constant(2.5);
        assert_eq!(op.apply(&c), c);
        let back = op.solve(&c).unwrap();
        assert!(max_abs(&(back - &c)) < 1e-13);
    }

    #[test]
    fn random_operator_is_symmetric_and_invertible() {
        let grid = PeriodicGrid::new(5.0, 96).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let op = random_op(&grid, &mut rng);
            let u = grid.sample(|_| rng.gen::<f64>() - 0.5);
            let w = grid.sample(|_| rng.gen::<f64>() - 0.5);
            let asym = grid.inner(&op.apply(&u), &w) - grid.inner(&u, &op.apply(&w));
            assert!(asym.abs() <= 1e-13 * grid.l2_norm(&u) * grid.l2_norm(&w));

            let tu = op.apply(&u);
            let back = op.solve(&tu).unwrap();
            assert!(grid.l2_norm(&(back - &u)) <= 1e-10 * grid.l2_norm(&u));
            let resid = op.apply(&op.solve(&w).unwrap()) - &w;
            assert!(grid.l2_norm(&resid) <= 1e-11 * grid.l2_norm(&w));
        }
    }

    #[test]
    fn negative_coefficient_is_reported() {
        let grid = PeriodicGrid::new(5.0, 16).unwrap();
        let mut q1 = grid.constant(1.0);
        q1[7] = -50.0;
        let op = TOperator::new(&grid, q1, grid.constant(1.0), 0.01).unwrap();
        assert!(matches!(op.factorize(), Err(Error::SolveFailure { .. })));
    }

    #[test]
    fn tcal_constant_depth_and_constant_velocity() {
        let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let flat = Bathymetry::flat(&grid);
        let h = grid.constant(0.8);
        let v = grid.sample(|x| (2.0 * x).sin());
        let got = tcal_apply(&grid, &h, &flat, &v);
        let want = grid.d1(&grid.d1(&v)) * (-0.64 / 3.0);
        assert!(max_abs(&(got - want)) < 1e-13);

        let hv = grid.sample(|x| 1.0 + 0.2 * x.cos());
        assert!(max_abs(&tcal_apply(&grid, &hv, &flat, &grid.constant(3.0))) < 1e-13);

        // only b' matters
        let b0 = Bathymetry::from_samples(&grid, grid.constant(0.0)).unwrap();
        let b1 = Bathymetry::from_samples(&grid, grid.constant(0.4)).unwrap();
        assert_eq!(
            tcal_apply(&grid, &hv, &b0, &v),
            tcal_apply(&grid, &hv, &b1, &v)
        );
    }

    fn setup(n: usize, p: RegimeParams) -> (PeriodicGrid, RegimeParams, ModelCoefficients) {
        let grid = PeriodicGrid::new(2.0 * PI, n).unwrap();
        let c = compute_coefficients(&p).unwrap();
        (grid, p, c)
    }

    #[test]
    fn green_naghdi_operators_at_flat_rest() {
        let (grid, p, c) = setup(128, RegimeParams::new(0.04, 0.2, 1.0, 0.0, 0.2));
        let flat = Bathymetry::flat(&grid);
        let df = derive(&grid, &State::rest(&grid), &flat, &p, &c).unwrap();
        let v = grid.sample(|x| x.sin() + 0.5 * (2.0 * x).cos());
        let d1v = grid.d1(&v);
        let d11v = grid.d1(&d1v);

        let q = qbar_apply(&grid, &df, &flat, &v, &p);
        assert!(max_abs(&(q + &d11v * c.lambda)) < 1e-13);

        let r = rbar_apply(&grid, &df, &flat, &v, &p);
        let want = (&d1v * &d1v) * 0.5 + (&v * &d11v) / 3.0;
        assert!(max_abs(&(r - want * c.alpha)) < 1e-13);

        let cst = grid.constant(1.3);
        assert!(max_abs(&qbar_apply(&grid, &df, &flat, &cst, &p)) < 1e-14);
        assert!(max_abs(&rbar_apply(&grid, &df, &flat, &cst, &p)) < 1e-14);
    }

    #[test]
    fn qfrak_basic_cases() {
        let (grid, p, c) = setup(64, RegimeParams::new(0.04, 0.2, 1.0, 0.0, 0.2));
        let flat = Bathymetry::flat(&grid);
        let df = derive(&grid, &State::rest(&grid), &flat, &p, &c).unwrap();
        let v = grid.sample(f64::cos);
        assert!(qfrak_apply(&grid, &df, &v, &grid.zeros(), &p, &c)
            .iter()
            .all(|&x| x == 0.0));
        let vc = grid.constant(0.7);
        let out = qfrak_apply(&grid, &df, &vc, &grid.sample(f64::sin), &p, &c);
        assert!(max_abs(&out) < 1e-15);
    }

    #[test]
    fn qfrak_matches_composition_of_primitives() {
        let (grid, p, c) = setup(64, RegimeParams::new(0.04, 0.2, 1.3, 0.4, 0.15));
        let bathy = Bathymetry::from_profile(
            &grid,
            BathymetryProfile::Sinusoid {
                k: 1.0,
                height: 0.5,
            },
        )
        .unwrap();
        let s = State::new(
            &grid,
            0.0,
            grid.sample(|x| 0.4 * x.sin()),
            grid.sample(|x| (2.0 * x).cos()),
        )
        .unwrap();
        let df = derive(&grid, &s, &bathy, &p, &c).unwrap();
        let f = grid.sample(|x| 1.0 + 0.5 * (3.0 * x).sin());
        let got = qfrak_apply(&grid, &df, &s.v, &f, &p, &c);
        let first = &df.q1 * &df.q3 * &s.v * &f * 2.0;
        let second = grid.d1(&(&f * &grid.d1(&s.v))) * (p.mu * c.kappa);
        let want = first + second;
        assert!(max_abs(&(got - &want)) <= 1e-13 * max_abs(&want).max(1.0));
    }
}
