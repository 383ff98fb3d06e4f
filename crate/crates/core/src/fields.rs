//! Physical state, bathymetry, and the pointwise coefficient fields of the model.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid};
use crate::regime::{ModelCoefficients, RegimeParams};

/// Analytic bottom shapes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum BathymetryProfile {
    Flat,
    /// `height * exp(-d^2 / (2 width^2))`, `d` the periodic distance to `center`.
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
    },
    /// `height * sin(2 pi k x / L)`; `k` is a mode number.
    Sinusoid {
        k: f64,
        height: f64,
    },
}

/// Bottom deformation `b` with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    b: Field,
    db: Field,
    d2b: Field,
}

/// Signed periodic distance from `c` to `x`, in `[-L/2, L/2)`.
pub(crate) fn periodic_offset(x: f64, c: f64, l: f64) -> f64 {
    (x - c + 0.5 * l).rem_euclid(l) - 0.5 * l
}

impl Bathymetry {
    pub fn flat(grid: &PeriodicGrid) -> Self {
        Bathymetry {
            b: grid.zeros(),
            db: grid.zeros(),
            d2b: grid.zeros(),
        }
    }

    /// Samples `b`, `b'` and `b''` from the analytic profile.
    pub fn from_profile(grid: &PeriodicGrid, profile: BathymetryProfile) -> Result<Self> {
        match profile {
            BathymetryProfile::Flat => Ok(Self::flat(grid)),
            BathymetryProfile::Gaussian {
                center,
                width,
                height,
            } => {
                if !(center.is_finite() && width.is_finite() && height.is_finite()) {
                    return Err(Error::InvalidProfile(
                        "non-finite gaussian parameters".into(),
                    ));
                }
                if width < 4.0 * grid.dx() {
                    return Err(Error::InvalidProfile(format!(
                        "gaussian width {width} is below 4 dx = {}",
                        4.0 * grid.dx()
                    )));
                }
                let l = grid.length();
                let w2 = width * width;
                let gauss = |x: f64| {
                    let d = periodic_offset(x, center, l);
                    (d, height * (-d * d / (2.0 * w2)).exp())
                };
                Ok(Bathymetry {
                    b: grid.sample(|x| gauss(x).1),
                    db: grid.sample(|x| {
                        let (d, e) = gauss(x);
                        -d / w2 * e
                    }),
                    d2b: grid.sample(|x| {
                        let (d, e) = gauss(x);
                        (d * d / (w2 * w2) - 1.0 / w2) * e
                    }),
                })
            }
            BathymetryProfile::Sinusoid { k, height } => {
                if !(k.is_finite() && height.is_finite()) {
                    return Err(Error::InvalidProfile(
                        "non-finite sinusoid parameters".into(),
                    ));
                }
                let kk = 2.0 * std::f64::consts::PI * k / grid.length();
                Ok(Bathymetry {
                    b: grid.sample(|x| height * (kk * x).sin()),
                    db: grid.sample(|x| height * kk * (kk * x).cos()),
                    d2b: grid.sample(|x| -height * kk * kk * (kk * x).sin()),
                })
            }
        }
    }

    /// Bottom known only through samples; derivatives are the centered differences.
    pub fn from_samples(grid: &PeriodicGrid, b: Field) -> Result<Self> {
        grid.check(&b)?;
        let db = grid.d1(&b);
        let d2b = grid.d2(&b);
        Ok(Bathymetry { b, db, d2b })
    }

    /// The bottom `factor * b`, e.g. `beta b` as seen by the operator `T[h, beta b]`.
    pub fn scaled(&self, factor: f64) -> Self {
        Bathymetry {
            b: &self.b * factor,
            db: &self.db * factor,
            d2b: &self.d2b * factor,
        }
    }

    pub fn b(&self) -> &Field {
        &self.b
    }

    pub fn db(&self) -> &Field {
        &self.db
    }

    pub fn d2b(&self) -> &Field {
        &self.d2b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `|b|_{W^{2,inf}} = |b|_inf + |b'|_inf + |b''|_inf`.
    pub fn w2inf_norm(&self) -> f64 {
        let sup = |f: &Field| f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        sup(&self.b) + sup(&self.db) + sup(&self.d2b)
    }
}

/// Interface deformation and shear velocity at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub zeta: Field,
    pub v: Field,
}

impl State {
    pub fn new(grid: &PeriodicGrid, t: f64, zeta: Field, v: Field) -> Result<Self> {
        grid.check(&zeta)?;
        grid.check(&v)?;
        let s = State { t, zeta, v };
        s.check_finite()?;
        Ok(s)
    }

    pub fn rest(grid: &PeriodicGrid) -> Self {
        State {
            t: 0.0,
            zeta: grid.zeros(),
            v: grid.zeros(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        let n = self.zeta.len();
        if let Some(index) = self
            .zeta
            .iter()
            .chain(self.v.iter())
            .position(|x| !x.is_finite())
        {
            return Err(Error::NonFiniteState { index: index % n });
        }
        Ok(())
    }
}

/// Pointwise quantities evaluated from a state.
///
/// `q1bare` is `eps^2 Q1`, i.e. `Q1` with the `(eps v)^2` factor included, and
/// `dq3` is `d_x q3` from its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub h1: Field,
    pub h2: Field,
    pub f: Field,
    pub fp: Field,
    pub g: Field,
    pub q1: Field,
    pub q2: Field,
    pub q3: Field,
    pub dq3: Field,
    pub q0: Field,
    pub q1bare: Field,
}

impl DerivedFields {
    /// Evaluates every field without checking admissibility.
    pub fn evaluate(
        grid: &PeriodicGrid,
        state: &State,
        bathy: &Bathymetry,
        params: &RegimeParams,
        coeffs: &ModelCoefficients,
    ) -> Self {
        let n = grid.n();
        let (eps, beta, gamma) = (params.eps, params.beta, params.gamma);
        let gd = gamma + params.delta;
        let inv_delta = 1.0 / params.delta;
        let dzeta = grid.d1(&state.zeta);
        let (zeta, v, b, db, d2b) = (&state.zeta, &state.v, &bathy.b, &bathy.db, &bathy.d2b);

        let h1 = Array1::from_shape_fn(n, |j| 1.0 - eps * zeta[j]);
        let h2 = Array1::from_shape_fn(n, |j| inv_delta + eps * zeta[j] - beta * b[j]);
        let q1 = Array1::from_shape_fn(n, |j| {
            1.0 + coeffs.kappa1 * eps * zeta[j] + coeffs.omega1 * beta * b[j]
        });
        let q2 = Array1::from_shape_fn(n, |j| {
            1.0 + coeffs.kappa2 * eps * zeta[j] + coeffs.omega2 * beta * b[j]
        });

        let mut f = grid.zeros();
        let mut fp = grid.zeros();
        let mut g = grid.zeros();
        let mut q3 = grid.zeros();
        let mut dq3 = grid.zeros();
        let mut q0 = grid.zeros();
        let mut q1bare = grid.zeros();
        for j in 0..n {
            let (a1, a2) = (h1[j], h2[j]);
            let den = a1 + gamma * a2;
            let den3 = den * den * den;
            let sum = a1 + a2;
            f[j] = a1 * a2 / den;
            fp[j] = (a1 * a1 - gamma * a2 * a2) / (den * den);
            g[j] = (a1 / den) * (a1 / den);
            q3[j] = 0.5 * (fp[j] - coeffs.varsigma);
            dq3[j] = (-gamma * eps * dzeta[j] * sum * sum + gamma * beta * db[j] * a1 * sum) / den3;
            q0[j] = gd * q1[j] - params.mu * beta * coeffs.omega * d2b[j];
            let ev = eps * v[j];
            q1bare[j] = -gamma * q1[j] * sum * sum / den3 * (ev * ev);
        }

        DerivedFields {
            h1,
            h2,
            f,
            fp,
            g,
            q1,
            q2,
            q3,
            dq3,
            q0,
            q1bare,
        }
    }

    /// The symmetrizer weight `Q0 + eps^2 Q1`.
    pub fn h3_weight(&self) -> Field {
        &self.q0 + &self.q1bare
    }
}

/// Index and value of the smallest entry; non-finite entries count as `-inf`.
pub(crate) fn argmin(f: &Field) -> (usize, f64) {
    f.iter()
        .map(|&x| if x.is_finite() { x } else { f64::NEG_INFINITY })
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |(im, m), (i, x)| if x < m { (i, x) } else { (im, m) },
        )
}

/// Evaluates the derived fields and checks strict positivity of the layer
/// depths and of `q1`, `q2`.
pub fn derive(
    grid: &PeriodicGrid,
    state: &State,
    bathy: &Bathymetry,
    params: &RegimeParams,
    coeffs: &ModelCoefficients,
) -> Result<DerivedFields> {
    grid.check(&state.zeta)?;
    grid.check(&state.v)?;
    grid.check(&bathy.b)?;
    let df = DerivedFields::evaluate(grid, state, bathy, params, coeffs);
    for (layer, field) in [("upper", &df.h1), ("lower", &df.h2)] {
        let (index, value) = argmin(field);
        if !(value > 0.0) {
            return Err(Error::DepthViolation {
                layer,
                value,
                index,
            });
        }
    }
    for (coefficient, field) in [("q1", &df.q1), ("q2", &df.q2)] {
        let (index, value) = argmin(field);
        if !(value > 0.0) {
            return Err(Error::EllipticityViolation {
                coefficient,
                value,
                index,
            });
        }
    }
    Ok(df)
}
