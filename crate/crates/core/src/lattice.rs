//! Lattice parameters, the finite site window, and propagation-distance grids.

use core::f64::consts::PI;
use core::ops::RangeInclusive;

use crate::{Error, Result};

/// Extra sites kept between the classical excursion and the window edge.
pub const TAIL_MARGIN: usize = 10;

/// Coupling constant `C` and tilt `B` of the tight-binding lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    coupling: f64,
    tilt: f64,
}

impl LatticeParams {
    pub fn new(coupling: f64, tilt: f64) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidCoupling(coupling));
        }
        if !(tilt.is_finite() && tilt >= 0.0) {
            return Err(Error::InvalidTilt(tilt));
        }
        Ok(Self { coupling, tilt })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn is_uniform(&self) -> bool {
        self.tilt == 0.0
    }

    /// `2π / B`.
    pub fn bloch_period(&self) -> Result<f64> {
        if self.is_uniform() {
            return Err(Error::InfinitePeriod);
        }
        Ok(2.0 * PI / self.tilt)
    }

    /// Bessel argument `(4C/B) sin(Bz/2)`; `2Cz` on the uniform lattice.
    pub fn zeta(&self, z: f64) -> f64 {
        if self.is_uniform() {
            2.0 * self.coupling * z
        } else {
            4.0 * self.coupling / self.tilt * libm::sin(self.tilt * z / 2.0)
        }
    }

    /// Largest classical spread (in sites) reached by propagation up to `z_max`.
    ///
    /// For a tilted lattice this is the full Bloch amplitude `4C/B` regardless
    /// of `z_max`.
    pub fn excursion(&self, z_max: f64) -> f64 {
        if self.is_uniform() {
            2.0 * self.coupling * z_max
        } else {
            4.0 * self.coupling / self.tilt
        }
    }

    /// Minimum distance from an input site to the window edge.
    pub fn required_margin(&self, z_max: f64) -> usize {
        libm::ceil(self.excursion(z_max)) as usize + TAIL_MARGIN
    }

    /// Default Runge-Kutta step, `1e-4 · min(1/C, 1/B)`.
    pub fn default_step(&self) -> f64 {
        let scale = if self.is_uniform() {
            1.0 / self.coupling
        } else {
            (1.0 / self.coupling).min(1.0 / self.tilt)
        };
        1e-4 * scale
    }
}

/// Symmetric site range `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeWindow {
    half_width: usize,
}

impl LatticeWindow {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::InvalidHalfWidth);
        }
        Ok(Self { half_width })
    }

    /// Smallest window keeping every site in `sites` at least `margin` sites
    /// away from both edges.
    pub fn minimal_for(sites: &[i64], margin: usize) -> Self {
        let reach = sites.iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0);
        Self {
            half_width: (reach + margin).max(1),
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> i64 {
        -(self.half_width as i64)
    }

    pub fn last(&self) -> i64 {
        self.half_width as i64
    }

    pub fn sites(&self) -> RangeInclusive<i64> {
        self.first()..=self.last()
    }

    pub fn contains(&self, site: i64) -> bool {
        site.unsigned_abs() as usize <= self.half_width
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        self.contains(site)
            .then(|| (site + self.half_width as i64) as usize)
    }

    pub fn site_at(&self, index: usize) -> i64 {
        index as i64 - self.half_width as i64
    }

    /// Rejects the window unless every site keeps `margin` sites to both edges.
    pub fn check_margin(&self, sites: &[i64], margin: usize) -> Result<()> {
        let needed = Self::minimal_for(sites, margin);
        if needed.half_width > self.half_width {
            return Err(Error::WindowTooSmall {
                half_width: self.half_width,
                required: needed.half_width,
            });
        }
        Ok(())
    }

    /// Sites of the central half, `|site| <= half_width / 2`.
    pub fn central_half(&self) -> RangeInclusive<i64> {
        let h = (self.half_width / 2) as i64;
        -h..=h
    }
}

/// Closed, evenly spaced grid of propagation distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZGrid {
    start: f64,
    end: f64,
    samples: usize,
}

impl ZGrid {
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        let ok = start.is_finite() && end.is_finite() && start >= 0.0 && end > start && samples >= 2;
        if !ok {
            return Err(Error::InvalidGrid);
        }
        Ok(Self { start, end, samples })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.samples - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(move |i| self.at(i))
    }

    /// Grid index nearest to `z`.
    pub fn index_of(&self, z: f64) -> usize {
        let i = libm::round((z - self.start) / self.step());
        (i.max(0.0) as usize).min(self.samples - 1)
    }
}
