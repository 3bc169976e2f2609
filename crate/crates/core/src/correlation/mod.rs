//! Analytic observables of a NOON state in the tilted lattice.
//!
//! The probability to detect `p` photons at site `μ` and `q = N - p` at `ν`
//! is
//!
//! ```text
//! Γ = ½ C(N,p) · | J_(a-μ)^p J_(a-ν)^q + e^{iθ} J_(b-μ)^p J_(b-ν)^q |²
//! θ(z) = φ + ½ (π + Bz) (b - a) N
//! ```
//!
//! with `a`, `b` the input sites and all Bessel functions at
//! `ζ = (4C/B) sin(Bz/2)`. Normalizing by the same expression without the
//! interference term gives the coincidence ratio `γ`: zero for bunched
//! photons, two for antibunched ones when the two branches carry equal
//! weight.

mod branch;
mod period;

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::bessel::BesselTable;
use crate::propagator::green_amplitude;
use crate::state::NoonState;
use crate::{Error, LatticeParams, LatticeWindow, Result, ZGrid};

pub use branch::{branch_centers, BranchPair};
pub use period::{estimate_period, oscillation_period, PeriodEstimate};

/// Factors below this modulus switch products to log-magnitude arithmetic.
const LOG_DOMAIN_BELOW: f64 = 1e-150;

/// Distinguishable-photon probabilities below this leave `γ` undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

/// Relative phase `θ(z)` between the two branches of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferencePhase {
    pub theta: f64,
    pub z: f64,
}

pub fn theta(state: &NoonState, params: &LatticeParams, z: f64) -> Result<InterferencePhase> {
    if params.is_uniform() {
        return Err(Error::InfinitePeriod);
    }
    let theta = state.phase()
        + 0.5
            * (core::f64::consts::PI + params.tilt() * z)
            * state.separation() as f64
            * state.n_photons() as f64;
    Ok(InterferencePhase { theta, z })
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `mantissa · exp(ln_scale)`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    ln_scale: f64,
}

/// `J_m^p · J_n^q`, falling back to log magnitudes for tiny factors.
fn bessel_product(table: &BesselTable, m: i64, p: u32, n: i64, q: u32) -> Scaled {
    let factors = [(m, p), (n, q)];
    let tiny = factors
        .iter()
        .any(|&(o, k)| k > 0 && libm::fabs(table.get(o)) < LOG_DOMAIN_BELOW);
    if !tiny {
        let mantissa = factors
            .iter()
            .filter(|&&(_, k)| k > 0)
            .fold(1.0, |acc, &(o, k)| acc * Float::powi(table.get(o), k as i32));
        return Scaled { mantissa, ln_scale: 0.0 };
    }
    let mut sign = 1.0;
    let mut ln_scale = 0.0;
    for &(o, k) in &factors {
        if k == 0 {
            continue;
        }
        let s = table.sign(o);
        if s == 0.0 {
            return Scaled { mantissa: 0.0, ln_scale: 0.0 };
        }
        if k % 2 == 1 {
            sign *= s;
        }
        ln_scale += k as f64 * table.ln_abs(o);
    }
    Scaled { mantissa: sign, ln_scale }
}

/// Interference of the two branch amplitudes on a common scale:
/// `|A + e^{iθ}B|² = exp(ln_scale) · with_interference` and
/// `|A|² + |B|² = exp(ln_scale) · without_interference`.
#[derive(Debug, Clone, Copy)]
struct BranchSum {
    with_interference: f64,
    without_interference: f64,
    ln_scale: f64,
}

fn branch_sum(a: Scaled, b: Scaled, cos_theta: f64) -> BranchSum {
    let live = |s: &Scaled| s.mantissa != 0.0;
    let ln_common = match (live(&a), live(&b)) {
        (false, false) => {
            return BranchSum {
                with_interference: 0.0,
                without_interference: 0.0,
                ln_scale: 0.0,
            }
        }
        (true, false) => a.ln_scale + libm::log(libm::fabs(a.mantissa)),
        (false, true) => b.ln_scale + libm::log(libm::fabs(b.mantissa)),
        (true, true) => (a.ln_scale + libm::log(libm::fabs(a.mantissa)))
            .max(b.ln_scale + libm::log(libm::fabs(b.mantissa))),
    };
    let rescale = |s: Scaled| {
        if s.mantissa == 0.0 {
            0.0
        } else {
            s.mantissa * libm::exp(s.ln_scale - ln_common)
        }
    };
    let (x, y) = (rescale(a), rescale(b));
    let without = x * x + y * y;
    BranchSum {
        with_interference: (without + 2.0 * x * y * cos_theta).max(0.0),
        without_interference: without,
        ln_scale: 2.0 * ln_common,
    }
}

struct Evaluator<'a> {
    state: &'a NoonState,
    table: BesselTable,
    cos_theta: f64,
    prefactor: f64,
    p: u32,
    q: u32,
}

impl<'a> Evaluator<'a> {
    fn new(state: &'a NoonState, params: &LatticeParams, z: f64, p: u32, reach: usize) -> Result<Self> {
        let n = state.n_photons();
        if p > n {
            return Err(Error::SplitOutOfRange { p, n });
        }
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::InvalidDistance(z));
        }
        let theta = theta(state, params, z)?.theta;
        Ok(Self {
            state,
            table: BesselTable::new(params.zeta(z), reach),
            cos_theta: libm::cos(theta),
            prefactor: 0.5 * binomial(n, p),
            p,
            q: n - p,
        })
    }

    fn branch_sum(&self, mu: i64, nu: i64) -> BranchSum {
        let (a, b) = (self.state.site_a(), self.state.site_b());
        let from_a = bessel_product(&self.table, a - mu, self.p, a - nu, self.q);
        let from_b = bessel_product(&self.table, b - mu, self.p, b - nu, self.q);
        branch_sum(from_a, from_b, self.cos_theta)
    }

    fn probability(&self, mu: i64, nu: i64) -> f64 {
        let s = self.branch_sum(mu, nu);
        if s.with_interference == 0.0 {
            return 0.0;
        }
        self.prefactor * s.with_interference * libm::exp(s.ln_scale)
    }
}

/// Largest Bessel order touched by any input/site combination.
fn reach(state: &NoonState, sites: &[i64]) -> usize {
    sites
        .iter()
        .flat_map(|&s| [s - state.site_a(), s - state.site_b()])
        .map(|d| d.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

/// Probability `Γ^(p, N-p)` of detecting `p` photons at `site_mu` and the
/// rest at `site_nu`.
///
/// For `site_mu == site_nu` the same expression equals `C(N,p) · P(n_μ = N)`,
/// the normally ordered moment at a single site.
pub fn detection_probability(
    state: &NoonState,
    params: &LatticeParams,
    z: f64,
    p: u32,
    site_mu: i64,
    site_nu: i64,
) -> Result<f64> {
    let ev = Evaluator::new(state, params, z, p, reach(state, &[site_mu, site_nu]))?;
    Ok(ev.probability(site_mu, site_nu))
}

/// `Γ^(p,q)` over every site pair of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    z: f64,
    p: u32,
    q: u32,
    window: LatticeWindow,
    entries: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    /// Entry at `(μ, ν)`; panics outside the window.
    pub fn get(&self, mu: i64, nu: i64) -> f64 {
        let n = self.window.len();
        let r = self.window.index_of(mu).expect("site outside window");
        let c = self.window.index_of(nu).expect("site outside window");
        self.entries[r * n + c]
    }

    /// Rows in window order.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.window.len())
    }
}

pub fn correlation_matrix(
    state: &NoonState,
    params: &LatticeParams,
    z: f64,
    p: u32,
    window: &LatticeWindow,
) -> Result<CorrelationMatrix> {
    let ev = Evaluator::new(state, params, z, p, reach(state, &[window.first(), window.last()]))?;
    let mut entries = Vec::with_capacity(window.len() * window.len());
    for mu in window.sites() {
        for nu in window.sites() {
            entries.push(ev.probability(mu, nu));
        }
    }
    Ok(CorrelationMatrix { z, p, q: ev.q, window: *window, entries })
}

fn amplitudes(params: &LatticeParams, z: f64, in_site: i64, window: &LatticeWindow) -> Result<Vec<Complex64>> {
    window
        .sites()
        .map(|mu| green_amplitude(params, z, mu, in_site))
        .collect()
}

/// Mean photon number per window site.
///
/// A single photon interferes with itself across the two inputs; for
/// `N >= 2` the two branches add incoherently.
pub fn photon_density(
    state: &NoonState,
    params: &LatticeParams,
    z: f64,
    window: &LatticeWindow,
) -> Result<Vec<f64>> {
    let ua = amplitudes(params, z, state.site_a(), window)?;
    let ub = amplitudes(params, z, state.site_b(), window)?;
    let n = state.n_photons() as f64;
    let density = if state.n_photons() == 1 {
        let phase = Complex64::from_polar(1.0, state.phase());
        ua.iter()
            .zip(&ub)
            .map(|(a, b)| 0.5 * (a + phase * b).norm_sqr())
            .collect()
    } else {
        ua.iter()
            .zip(&ub)
            .map(|(a, b)| 0.5 * n * (a.norm_sqr() + b.norm_sqr()))
            .collect()
    };
    Ok(density)
}

/// Density `N |U(μ, site)|²` of light injected into a single site.
pub fn single_site_density(
    params: &LatticeParams,
    site: i64,
    n_photons: u32,
    z: f64,
    window: &LatticeWindow,
) -> Result<Vec<f64>> {
    let u = amplitudes(params, z, site, window)?;
    Ok(u.iter().map(|a| n_photons as f64 * a.norm_sqr()).collect())
}

/// Normalized coincidence ratio `γ^(p,q)` between the branch centers.
pub fn gamma_ratio(
    state: &NoonState,
    params: &LatticeParams,
    z: f64,
    p: u32,
    pair: &BranchPair,
) -> Result<f64> {
    if pair.degenerate {
        return Err(Error::DegenerateBranches { z });
    }
    let (x, y) = (pair.right_site, pair.left_site);
    let ev = Evaluator::new(state, params, z, p, reach(state, &[x, y]))?;
    let s = ev.branch_sum(x, y);
    let ln_den = libm::log(ev.prefactor) + s.ln_scale + libm::log(s.without_interference);
    if ln_den.is_nan() || ln_den < libm::log(DENOMINATOR_FLOOR) {
        return Err(Error::DenominatorUnderflow { z, x, y });
    }
    Ok(s.with_interference / s.without_interference)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidencePoint {
    pub z: f64,
    pub right_site: i64,
    pub left_site: i64,
    pub degenerate: bool,
    /// `None` where the branches merge or the denominator underflows.
    pub gamma: Option<f64>,
}

/// `γ^(p,q)(z)` sampled on a grid, with the branch pair recomputed per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceTrace {
    pub p: u32,
    pub q: u32,
    pub state: NoonState,
    pub params: LatticeParams,
    pub grid: ZGrid,
    pub points: Vec<CoincidencePoint>,
}

impl CoincidenceTrace {
    /// Grid-aligned samples with excluded points as `None`.
    pub fn samples(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|pt| if pt.degenerate { None } else { pt.gamma })
            .collect()
    }
}

pub fn coincidence_trace(
    state: &NoonState,
    params: &LatticeParams,
    p: u32,
    grid: &ZGrid,
    window: &LatticeWindow,
) -> Result<CoincidenceTrace> {
    let n = state.n_photons();
    if p > n {
        return Err(Error::SplitOutOfRange { p, n });
    }
    let mut points = Vec::with_capacity(grid.samples());
    for z in grid.iter() {
        let pair = branch_centers(params, state.center(), z, window)?;
        let gamma = if pair.degenerate {
            None
        } else {
            match gamma_ratio(state, params, z, p, &pair) {
                Ok(g) => Some(g),
                Err(Error::DenominatorUnderflow { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        points.push(CoincidencePoint {
            z,
            right_site: pair.right_site,
            left_site: pair.left_site,
            degenerate: pair.degenerate,
            gamma,
        });
    }
    Ok(CoincidenceTrace { p, q: n - p, state: *state, params: *params, grid: *grid, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::build_noon;
    use core::f64::consts::PI;

    fn unit() -> LatticeParams {
        LatticeParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn theta_values() {
        let s = build_noon(2, 0, 1, 0.0).unwrap();
        let p = unit();
        assert!((theta(&s, &p, PI).unwrap().theta - 2.0 * PI).abs() < 1e-15);
        assert!((theta(&s, &p, 0.0).unwrap().theta - PI).abs() < 1e-15);
        let s10 = build_noon(10, 0, 1, 0.0).unwrap();
        let lam = p.bloch_period().unwrap();
        let advance = theta(&s10, &p, lam / 5.0).unwrap().theta - theta(&s10, &p, 0.0).unwrap().theta;
        assert!((advance - 2.0 * PI).abs() < 1e-12);
        let flat = LatticeParams::new(1.0, 0.0).unwrap();
        assert!(theta(&s, &flat, 1.0).is_err());
    }

    #[test]
    fn no_joint_detection_before_propagation() {
        let s = build_noon(2, 0, 1, 0.0).unwrap();
        assert_eq!(detection_probability(&s, &unit(), 0.0, 1, 0, 1).unwrap(), 0.0);
        // same site: C(2,1) · P(n_0 = 2) = 2 · ½
        assert!((detection_probability(&s, &unit(), 0.0, 1, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((detection_probability(&s, &unit(), 0.0, 2, 0, 5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_split() {
        let s = build_noon(2, 0, 1, 0.0).unwrap();
        assert_eq!(
            detection_probability(&s, &unit(), 1.0, 3, 0, 1),
            Err(Error::SplitOutOfRange { p: 3, n: 2 })
        );
    }

    #[test]
    fn symmetric_under_split_swap() {
        let s = build_noon(3, -1, 1, 0.4).unwrap();
        let p = LatticeParams::new(1.0, 0.5).unwrap();
        for &(mu, nu) in &[(0, 3), (-4, 2), (5, 5)] {
            let a = detection_probability(&s, &p, 2.3, 1, mu, nu).unwrap();
            let b = detection_probability(&s, &p, 2.3, 2, nu, mu).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn log_domain_matches_direct_products() {
        let t = BesselTable::new(1.5, 100);
        let direct = bessel_product(&t, 12, 3, 10, 2);
        assert_eq!(direct.ln_scale, 0.0);
        // J_100(1.5) ~ 1e-159
        let logged = bessel_product(&t, 100, 3, 10, 2);
        assert_eq!(logged.mantissa, 1.0);
        let want = t.ln_abs(100) * 3.0 + t.ln_abs(10) * 2.0;
        assert!((logged.ln_scale - want).abs() < 1e-12);
        assert!(libm::fabs(direct.mantissa - t.get(12).powi(3) * t.get(10).powi(2)) == 0.0);
    }

    #[test]
    fn deep_tail_probabilities_do_not_nan() {
        let s = build_noon(10, 0, 1, 0.0).unwrap();
        let g = detection_probability(&s, &unit(), 1.0, 5, 60, -60).unwrap();
        assert!(g.is_finite() && g >= 0.0);
    }

    #[test]
    fn density_sums_to_photon_number() {
        let w = LatticeWindow::new(30).unwrap();
        for n in [1, 2, 5] {
            let s = build_noon(n, 0, 1, 0.3).unwrap();
            let d = photon_density(&s, &unit(), 2.2, &w).unwrap();
            let total: f64 = d.iter().sum();
            assert!((total - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_rejects_degenerate_pair() {
        let s = build_noon(2, 0, 1, 0.0).unwrap();
        let w = LatticeWindow::new(20).unwrap();
        let pair = branch_centers(&unit(), 0.5, 0.01, &w).unwrap();
        assert!(pair.degenerate);
        assert!(matches!(
            gamma_ratio(&s, &unit(), 0.01, 1, &pair),
            Err(Error::DegenerateBranches { .. })
        ));
    }
}
