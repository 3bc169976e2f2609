//! Single-photon propagator of the tilted lattice.
//!
//! The Heisenberg evolution `a†_μ(z) = Σ_μ' U(μ, μ'; z) a†_μ'(0)` has the
//! closed form
//!
//! ```text
//! U(μ, μ'; z) = i^(μ'-μ) · exp(i B z (μ'+μ) / 2) · J_(μ'-μ)(ζ),   ζ = (4C/B) sin(Bz/2)
//! ```
//!
//! with the row index `μ` the detection site and the column index `μ'` the
//! injection site. [`integrate_coupled_modes`] solves the same equations
//! numerically and serves as an independent check of the closed form.

mod coupled_modes;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bessel::BesselTable;
use crate::{Error, LatticeParams, LatticeWindow, Result};

pub use coupled_modes::{
    integrate_coupled_modes, integrate_coupled_modes_at, CoupledModeOptions, CoupledModeSolution,
};

/// `i^n` without rounding.
pub(crate) fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_distance(z: f64) -> Result<()> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidDistance(z));
    }
    Ok(())
}

/// Site-dependent phase `exp(i B z (μ'+μ)/2)`.
fn tilt_phase(params: &LatticeParams, z: f64, out_site: i64, in_site: i64) -> Complex64 {
    if params.is_uniform() || z == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, params.tilt() * z * (in_site + out_site) as f64 / 2.0)
}

fn amplitude_from_table(
    params: &LatticeParams,
    table: &BesselTable,
    z: f64,
    out_site: i64,
    in_site: i64,
) -> Complex64 {
    let order = in_site - out_site;
    let j = table.get(order);
    if j == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    i_pow(order) * tilt_phase(params, z, out_site, in_site) * j
}

/// Amplitude for a photon injected at `in_site` to be found at `out_site`
/// after propagating a distance `z`.
pub fn green_amplitude(
    params: &LatticeParams,
    z: f64,
    out_site: i64,
    in_site: i64,
) -> Result<Complex64> {
    check_distance(z)?;
    let order = (in_site - out_site).unsigned_abs() as usize;
    let table = BesselTable::new(params.zeta(z), order);
    Ok(amplitude_from_table(params, &table, z, out_site, in_site))
}

/// `2π / B`; fails on the uniform lattice.
pub fn bloch_period(params: &LatticeParams) -> Result<f64> {
    params.bloch_period()
}

/// Dense single-photon amplitudes over a window, stored column by column
/// (one column per injection site).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    params: LatticeParams,
    z: f64,
    window: LatticeWindow,
    entries: Vec<Complex64>,
}

impl TransferMatrix {
    pub fn identity(params: LatticeParams, window: LatticeWindow) -> Self {
        let n = window.len();
        let mut entries = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { params, z: 0.0, window, entries }
    }

    pub(crate) fn from_columns(
        params: LatticeParams,
        z: f64,
        window: LatticeWindow,
        entries: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(entries.len(), window.len() * window.len());
        Self { params, z, window, entries }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    /// `U(out_site, in_site)`. Panics if either site is outside the window.
    pub fn get(&self, out_site: i64, in_site: i64) -> Complex64 {
        let n = self.window.len();
        let r = self.window.index_of(out_site).expect("output site outside window");
        let c = self.window.index_of(in_site).expect("input site outside window");
        self.entries[c * n + r]
    }

    /// Amplitudes of a photon injected at `in_site`, indexed by output
    /// window position.
    pub fn column(&self, in_site: i64) -> Result<&[Complex64]> {
        let n = self.window.len();
        let c = self
            .window
            .index_of(in_site)
            .ok_or(Error::SiteOutsideWindow(in_site))?;
        Ok(&self.entries[c * n..(c + 1) * n])
    }

    /// Largest entrywise modulus difference over the given output and input sites.
    pub fn max_deviation<I, J>(&self, other: &TransferMatrix, out_sites: I, in_sites: J) -> f64
    where
        I: IntoIterator<Item = i64> + Clone,
        J: IntoIterator<Item = i64>,
    {
        let mut worst = 0.0f64;
        for c in in_sites {
            for r in out_sites.clone() {
                worst = worst.max((self.get(r, c) - other.get(r, c)).norm());
            }
        }
        worst
    }

    /// Largest deviation from the identity over the whole window.
    pub fn identity_deviation(&self) -> f64 {
        let n = self.window.len();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in 0..n {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((self.entries[c * n + r] - want).norm());
            }
        }
        worst
    }

    /// Largest `|⟨col_a, col_b⟩ - δ_ab|` over pairs of the given input columns.
    pub fn unitarity_defect<I>(&self, in_sites: I) -> f64
    where
        I: IntoIterator<Item = i64>,
    {
        let cols: Vec<&[Complex64]> = in_sites
            .into_iter()
            .map(|s| self.column(s).expect("input site outside window"))
            .collect();
        let mut worst = 0.0f64;
        for (a, ca) in cols.iter().enumerate() {
            for (b, cb) in cols.iter().enumerate().skip(a) {
                let inner: Complex64 = ca.iter().zip(cb.iter()).map(|(x, y)| x * y.conj()).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner - want).norm());
            }
        }
        worst
    }
}

/// Closed-form transfer matrix over `window` at distance `z`.
pub fn transfer_matrix(
    params: &LatticeParams,
    z: f64,
    window: &LatticeWindow,
) -> Result<TransferMatrix> {
    check_distance(z)?;
    let n = window.len();
    let table = BesselTable::new(params.zeta(z), n - 1);
    let mut entries = Vec::with_capacity(n * n);
    for in_site in window.sites() {
        for out_site in window.sites() {
            entries.push(amplitude_from_table(params, &table, z, out_site, in_site));
        }
    }
    Ok(TransferMatrix::from_columns(*params, z, *window, entries))
}
