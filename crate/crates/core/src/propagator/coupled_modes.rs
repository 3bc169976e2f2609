//! Classical fourth-order Runge-Kutta integration of the coupled-mode
//! equations `-i dU/dz = H U`, `H = diag(μB) + C (shift_up + shift_down)`,
//! hard-truncated at the window edges.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_distance, TransferMatrix};
use crate::{Error, LatticeParams, LatticeWindow, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledModeOptions {
    /// Maximum step; `None` selects [`LatticeParams::default_step`].
    pub step: Option<f64>,
    /// Largest tolerated edge probability of any central-half column.
    pub leakage_threshold: f64,
}

impl Default for CoupledModeOptions {
    fn default() -> Self {
        Self {
            step: None,
            leakage_threshold: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledModeSolution {
    pub matrix: TransferMatrix,
    /// Largest probability seen on the two outermost sites, over all steps and
    /// all central-half input columns.
    pub edge_leakage: f64,
    pub steps: usize,
}

struct Stepper {
    diag: Vec<f64>,
    coupling: f64,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Stepper {
    fn new(params: &LatticeParams, window: &LatticeWindow) -> Self {
        let n = window.len();
        let zero = || alloc::vec![Complex64::new(0.0, 0.0); n];
        Self {
            diag: window.sites().map(|s| s as f64 * params.tilt()).collect(),
            coupling: params.coupling(),
            k: [zero(), zero(), zero(), zero()],
            tmp: zero(),
        }
    }

    // out = i H v
    fn derivative(diag: &[f64], coupling: f64, v: &[Complex64], out: &mut [Complex64]) {
        let n = v.len();
        for i in 0..n {
            let mut h = v[i] * diag[i];
            if i > 0 {
                h += v[i - 1] * coupling;
            }
            if i + 1 < n {
                h += v[i + 1] * coupling;
            }
            out[i] = Complex64::new(-h.im, h.re);
        }
    }

    fn step(&mut self, v: &mut [Complex64], h: f64) {
        let Self { diag, coupling, k, tmp } = self;
        let [k1, k2, k3, k4] = k;
        Self::derivative(diag, *coupling, v, k1);
        for i in 0..v.len() {
            tmp[i] = v[i] + k1[i] * (h / 2.0);
        }
        Self::derivative(diag, *coupling, tmp, k2);
        for i in 0..v.len() {
            tmp[i] = v[i] + k2[i] * (h / 2.0);
        }
        Self::derivative(diag, *coupling, tmp, k3);
        for i in 0..v.len() {
            tmp[i] = v[i] + k3[i] * h;
        }
        Self::derivative(diag, *coupling, tmp, k4);
        for i in 0..v.len() {
            v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Integrates the coupled-mode equations from the identity up to `z`.
///
/// Fails with [`Error::EdgeLeakage`] when a central-half column puts more
/// than `leakage_threshold` probability on the outermost sites at any step.
pub fn integrate_coupled_modes(
    params: &LatticeParams,
    z: f64,
    window: &LatticeWindow,
    options: &CoupledModeOptions,
) -> Result<CoupledModeSolution> {
    let mut out = integrate_coupled_modes_at(params, &[z], window, options)?;
    Ok(out.remove(0))
}

/// Like [`integrate_coupled_modes`], but snapshots every distance in
/// `distances` (ascending) during a single sweep.
pub fn integrate_coupled_modes_at(
    params: &LatticeParams,
    distances: &[f64],
    window: &LatticeWindow,
    options: &CoupledModeOptions,
) -> Result<Vec<CoupledModeSolution>> {
    let max_step = options.step.unwrap_or_else(|| params.default_step());
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::InvalidStep(max_step));
    }
    for &z in distances {
        check_distance(z)?;
    }
    if distances.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidDistance(f64::NAN));
    }

    let n = window.len();
    let identity = TransferMatrix::identity(*params, *window);
    let mut columns = identity.entries;
    let mut stepper = Stepper::new(params, window);
    let watched: Vec<usize> = window
        .central_half()
        .filter_map(|s| window.index_of(s))
        .collect();

    let mut z_now = 0.0;
    let mut steps = 0usize;
    let mut leakage = 0.0f64;
    let mut out = Vec::with_capacity(distances.len());
    for &target in distances {
        let span = target - z_now;
        let count = libm::ceil(span / max_step) as usize;
        if count > 0 {
            let h = span / count as f64;
            for _ in 0..count {
                for c in 0..n {
                    stepper.step(&mut columns[c * n..(c + 1) * n], h);
                }
                for &c in &watched {
                    let col = &columns[c * n..(c + 1) * n];
                    leakage = leakage.max(col[0].norm_sqr() + col[n - 1].norm_sqr());
                }
            }
            steps += count;
        }
        z_now = target;
        if leakage > options.leakage_threshold {
            return Err(Error::EdgeLeakage {
                leakage,
                threshold: options.leakage_threshold,
            });
        }
        out.push(CoupledModeSolution {
            matrix: TransferMatrix::from_columns(*params, target, *window, columns.clone()),
            edge_leakage: leakage,
            steps,
        });
    }
    Ok(out)
}
