//! NOON input states and their exact N-photon output distributions.
//!
//! The input `(|N⟩_a|0⟩_b + e^{-iφ}|0⟩_a|N⟩_b)/√2` is two N-th powers of
//! single-mode creation operators. In the Schrödinger picture each operator
//! `a†_s` becomes `Σ_μ T(μ, s) a†_μ` with `T = conj(U)`, the conjugate of
//! the Heisenberg transfer matrix, so an occupation pattern `{n_μ}` carries
//! amplitude
//!
//! ```text
//! √(N!/Π n_μ!) · (1/√2) · [Π T(μ,a)^n_μ + e^{-iφ} Π T(μ,b)^n_μ]
//! ```
//!
//! The expansion walks compositions of N over the window depth first. Every
//! partial pattern knows the exact probability mass of all its completions,
//! which makes pruning both cheap and auditable.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::propagator::TransferMatrix;
use crate::{Error, LatticeWindow, Result};

/// `(|N⟩_a|0⟩_b + e^{-iφ}|0⟩_a|N⟩_b)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonState {
    n_photons: u32,
    site_a: i64,
    site_b: i64,
    phase: f64,
}

impl NoonState {
    pub fn n_photons(&self) -> u32 {
        self.n_photons
    }

    pub fn site_a(&self) -> i64 {
        self.site_a
    }

    pub fn site_b(&self) -> i64 {
        self.site_b
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Signed separation `site_b - site_a`.
    pub fn separation(&self) -> i64 {
        self.site_b - self.site_a
    }

    /// Midpoint of the two input sites.
    pub fn center(&self) -> f64 {
        (self.site_a + self.site_b) as f64 / 2.0
    }
}

pub fn build_noon(n_photons: u32, site_a: i64, site_b: i64, phase: f64) -> Result<NoonState> {
    if n_photons == 0 {
        return Err(Error::NoPhotons);
    }
    if site_a == site_b {
        return Err(Error::EqualInputSites(site_a));
    }
    Ok(NoonState { n_photons, site_a, site_b, phase })
}

/// Photon counts per occupied site, ascending by site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationPattern(Vec<(i64, u32)>);

impl OccupationPattern {
    /// Builds a pattern from `(site, count)` pairs in any order; zero counts
    /// are dropped and repeated sites merged.
    pub fn new<I: IntoIterator<Item = (i64, u32)>>(pairs: I) -> Self {
        let mut merged: BTreeMap<i64, u32> = BTreeMap::new();
        for (site, count) in pairs {
            if count > 0 {
                *merged.entry(site).or_default() += count;
            }
        }
        Self(merged.into_iter().collect())
    }

    pub fn occupied(&self) -> &[(i64, u32)] {
        &self.0
    }

    pub fn count_at(&self, site: i64) -> u32 {
        self.0
            .binary_search_by_key(&site, |&(s, _)| s)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionOptions {
    /// Subtrees (and patterns) whose amplitude cannot exceed this are dropped
    /// and their exact mass added to `pruned_mass`.
    pub amplitude_floor: f64,
    /// Largest tolerated probability missing from the window.
    pub leakage_threshold: f64,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        Self {
            amplitude_floor: 1e-14,
            leakage_threshold: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    z: f64,
    window: LatticeWindow,
    n_photons: u32,
    probabilities: BTreeMap<OccupationPattern, f64>,
    pruned_mass: f64,
    leakage: f64,
}

impl OutputDistribution {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn n_photons(&self) -> u32 {
        self.n_photons
    }

    pub fn patterns(&self) -> impl Iterator<Item = (&OccupationPattern, f64)> {
        self.probabilities.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probability(&self, pattern: &OccupationPattern) -> f64 {
        self.probabilities.get(pattern).copied().unwrap_or(0.0)
    }

    /// Sum over retained patterns.
    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// Exact mass of the patterns removed by the amplitude floor.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    /// Probability that some photon left the window.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// `P(n_μ = p, n_ν = q, all other sites empty)` for `μ ≠ ν`, `p + q = N`.
    pub fn exclusive_pair(&self, mu: i64, p: u32, nu: i64, q: u32) -> f64 {
        self.probability(&OccupationPattern::new([(mu, p), (nu, q)]))
    }
}

struct Expansion<'a> {
    a: &'a [Complex64],
    b: &'a [Complex64],
    phase: Complex64,
    // suffix sums from position k onwards
    saa: Vec<f64>,
    sbb: Vec<f64>,
    sab: Vec<Complex64>,
    ln_fact: Vec<f64>,
    n: u32,
    mass_floor: f64,
    counts: Vec<u32>,
    kept: BTreeMap<OccupationPattern, f64>,
    pruned: f64,
}

impl Expansion<'_> {
    /// Total probability of every completion of the current prefix.
    fn subtree_mass(&self, k: usize, rest: u32, ln_denom: f64, pa: Complex64, pb: Complex64) -> f64 {
        let weight = libm::exp(self.ln_fact[self.n as usize] - ln_denom - self.ln_fact[rest as usize]);
        let r = rest as i32;
        let direct = pa.norm_sqr() * Float::powi(self.saa[k], r) + pb.norm_sqr() * Float::powi(self.sbb[k], r);
        let cross = (pa * pb.conj() * self.phase.conj() * self.sab[k].powi(r)).re;
        (0.5 * weight * (direct + 2.0 * cross)).max(0.0)
    }

    fn walk(&mut self, k: usize, rest: u32, ln_denom: f64, pa: Complex64, pb: Complex64) {
        if rest == 0 {
            let amp = (pa + self.phase * pb)
                * libm::sqrt(0.5 * libm::exp(self.ln_fact[self.n as usize] - ln_denom));
            let prob = amp.norm_sqr();
            if prob < self.mass_floor {
                self.pruned += prob;
                return;
            }
            let pattern = OccupationPattern(
                self.counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i as i64, c))
                    .collect(),
            );
            self.kept.insert(pattern, prob);
            return;
        }
        let len = self.a.len();
        if k == len {
            return;
        }
        let mass = self.subtree_mass(k, rest, ln_denom, pa, pb);
        if mass < self.mass_floor {
            self.pruned += mass;
            return;
        }
        // the last site must absorb every remaining photon
        let lowest = if k + 1 == len { rest } else { 0 };
        let mut qa = pa;
        let mut qb = pb;
        for _ in 0..lowest {
            qa *= self.a[k];
            qb *= self.b[k];
        }
        for c in lowest..=rest {
            self.counts[k] = c;
            self.walk(k + 1, rest - c, ln_denom + self.ln_fact[c as usize], qa, qb);
            qa *= self.a[k];
            qb *= self.b[k];
        }
        self.counts[k] = 0;
    }
}

/// Exact output distribution of `state` after the propagation described by
/// `transfer`.
pub fn output_distribution(
    state: &NoonState,
    transfer: &TransferMatrix,
    options: &DistributionOptions,
) -> Result<OutputDistribution> {
    let window = *transfer.window();
    let margin = transfer.params().required_margin(transfer.z());
    window.check_margin(&[state.site_a, state.site_b], margin)?;

    // Schrödinger-picture amplitudes are the conjugated Heisenberg columns.
    let a: Vec<Complex64> = transfer.column(state.site_a)?.iter().map(|u| u.conj()).collect();
    let b: Vec<Complex64> = transfer.column(state.site_b)?.iter().map(|u| u.conj()).collect();
    let len = a.len();

    let mut saa = alloc::vec![0.0; len + 1];
    let mut sbb = alloc::vec![0.0; len + 1];
    let mut sab = alloc::vec![Complex64::new(0.0, 0.0); len + 1];
    for k in (0..len).rev() {
        saa[k] = saa[k + 1] + a[k].norm_sqr();
        sbb[k] = sbb[k + 1] + b[k].norm_sqr();
        sab[k] = sab[k + 1] + a[k] * b[k].conj();
    }
    let n = state.n_photons;
    let mut ln_fact = alloc::vec![0.0; n as usize + 1];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + libm::log(i as f64);
    }

    let mut exp = Expansion {
        a: &a,
        b: &b,
        phase: Complex64::from_polar(1.0, -state.phase),
        saa,
        sbb,
        sab,
        ln_fact,
        n,
        mass_floor: options.amplitude_floor * options.amplitude_floor,
        counts: alloc::vec![0; len],
        kept: BTreeMap::new(),
        pruned: 0.0,
    };
    let one = Complex64::new(1.0, 0.0);
    let root_mass = exp.subtree_mass(0, n, 0.0, one, one);
    exp.walk(0, n, 0.0, one, one);

    // walk() records positions; translate to lattice sites
    let probabilities = exp
        .kept
        .into_iter()
        .map(|(pattern, p)| {
            let sites = pattern.0.into_iter().map(|(i, c)| (window.site_at(i as usize), c));
            (OccupationPattern(sites.collect()), p)
        })
        .collect();

    let leakage = (1.0 - root_mass).max(0.0);
    if leakage > options.leakage_threshold {
        return Err(Error::EdgeLeakage {
            leakage,
            threshold: options.leakage_threshold,
        });
    }
    Ok(OutputDistribution {
        z: transfer.z(),
        window,
        n_photons: n,
        probabilities,
        pruned_mass: exp.pruned,
        leakage,
    })
}

/// Expected photon number per window site, `Σ_patterns P · n_μ`.
pub fn photon_density_from_distribution(dist: &OutputDistribution) -> Vec<f64> {
    let mut density = alloc::vec![0.0; dist.window.len()];
    for (pattern, p) in dist.patterns() {
        for &(site, count) in pattern.occupied() {
            if let Some(i) = dist.window.index_of(site) {
                density[i] += p * count as f64;
            }
        }
    }
    density
}
