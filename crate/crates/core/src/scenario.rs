//! Scenario description: parameters, grid, bottom, initial data and run control.

use crate::diagnostics::Thresholds;
use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::fields::{periodic_offset, Bathymetry, BathymetryProfile, State};
use crate::grid::{Field, PeriodicGrid};
use crate::regime::RegimeParams;

/// Initial profile of one unknown.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum InitialProfile {
    Rest,
    /// `amp * exp(-d^2 / (2 width^2))`, `d` the periodic distance to `center`.
    Gaussian {
        amp: f64,
        width: f64,
        center: f64,
    },
    /// `amp * cos(2 pi k x / L)`.
    Sinusoid {
        k: f64,
        amp: f64,
    },
}

impl InitialProfile {
    pub fn sample(&self, grid: &PeriodicGrid) -> Result<Field> {
        match *self {
            InitialProfile::Rest => Ok(grid.zeros()),
            InitialProfile::Gaussian { amp, width, center } => {
                if !(width > 0.0 && amp.is_finite() && center.is_finite()) {
                    return Err(Error::InvalidProfile(format!(
                        "gaussian initial data needs a positive width, got {width}"
                    )));
                }
                let l = grid.length();
                Ok(grid.sample(|x| {
                    let d = periodic_offset(x, center, l);
                    amp * (-d * d / (2.0 * width * width)).exp()
                }))
            }
            InitialProfile::Sinusoid { k, amp } => {
                if !(k.is_finite() && amp.is_finite()) {
                    return Err(Error::InvalidProfile(
                        "non-finite sinusoid parameters".into(),
                    ));
                }
                let kk = 2.0 * std::f64::consts::PI * k / grid.length();
                Ok(grid.sample(|x| amp * (kk * x).cos()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridSpec {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Control {
    pub cfl: f64,
    /// Horizon `T`; the run stops at `T / max(eps, beta)`.
    pub horizon: f64,
    pub snapshot_stride: usize,
    pub s_energy: f64,
    pub thresholds: Thresholds,
    pub lambda_cap: f64,
}

impl Default for Control {
    fn default() -> Self {
        Control {
            cfl: 0.5,
            horizon: 1.0,
            snapshot_stride: 10,
            s_energy: 1.0,
            thresholds: Thresholds::default(),
            lambda_cap: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Scenario {
    pub params: RegimeParams,
    pub grid: GridSpec,
    pub bathymetry: BathymetryProfile,
    pub zeta0: InitialProfile,
    pub v0: InitialProfile,
    pub control: Control,
}

impl Scenario {
    /// Gaussian interface over a Gaussian bottom bump:
    /// `mu = 0.04`, `eps = beta = 0.2`, `delta = 1`, `gamma = 0`, no surface
    /// tension, `L = 20`, `n = 512`, interface width `L/20` centred at `L/2`,
    /// bump of height 0.5 and width 1.5 centred at `3L/4`.
    pub fn gaussian_bump() -> Self {
        let length = 20.0;
        Scenario {
            params: RegimeParams::new(0.04, 0.2, 1.0, 0.0, 0.2),
            grid: GridSpec { length, n: 512 },
            bathymetry: BathymetryProfile::Gaussian {
                center: 0.75 * length,
                width: 1.5,
                height: 0.5,
            },
            zeta0: InitialProfile::Gaussian {
                amp: 1.0,
                width: length / 20.0,
                center: 0.5 * length,
            },
            v0: InitialProfile::Rest,
            control: Control::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.control;
        if !(c.cfl > 0.0 && c.cfl <= 1.0) {
            return Err(Error::InvalidProfile(format!(
                "cfl must lie in (0, 1], got {}",
                c.cfl
            )));
        }
        if !(c.horizon > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "horizon T must be positive, got {}",
                c.horizon
            )));
        }
        if !(c.s_energy >= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "energy index s must be >= 0, got {}",
                c.s_energy
            )));
        }
        PeriodicGrid::new(self.grid.length, self.grid.n)?;
        Ok(())
    }

    pub fn make_grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.length, self.grid.n)
    }

    pub fn model(&self) -> Result<Model> {
        self.validate()?;
        let grid = self.make_grid()?;
        let bathy = Bathymetry::from_profile(&grid, self.bathymetry)?;
        Model::new(grid, bathy, self.params)
    }

    pub fn initial_state(&self, grid: &PeriodicGrid) -> Result<State> {
        State::new(grid, 0.0, self.zeta0.sample(grid)?, self.v0.sample(grid)?)
    }

    /// `T / max(eps, beta)`, or `T` itself when both amplitudes vanish.
    pub fn t_final(&self) -> f64 {
        let m = self.params.nonlinearity();
        if m > 0.0 {
            self.control.horizon / m
        } else {
            self.control.horizon
        }
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid.n = n;
        self
    }
}
