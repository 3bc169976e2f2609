use crate::bessel::BesselTable;
use crate::{Error, LatticeParams, LatticeWindow, Result};

/// Sites at the center of the right and left Bloch-oscillation branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPair {
    pub right_site: i64,
    pub left_site: i64,
    pub z: f64,
    /// Set where the branches have merged back into the input region (`|ζ| < 1`).
    pub degenerate: bool,
}

/// Locates the branch centers as the peaks of the single-photon density on
/// each side of `input_center`.
///
/// A half-integer `input_center` uses the equal mixture of its two
/// neighbouring input sites. Ties go to the site farther from the center.
pub fn branch_centers(
    params: &LatticeParams,
    input_center: f64,
    z: f64,
    window: &LatticeWindow,
) -> Result<BranchPair> {
    if params.is_uniform() {
        return Err(Error::InfinitePeriod);
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidDistance(z));
    }
    let zeta = params.zeta(z);
    let lo = libm::floor(input_center) as i64;
    let hi = libm::ceil(input_center) as i64;
    let reach = window
        .sites()
        .flat_map(|s| [s - lo, s - hi])
        .map(|d| d.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let table = BesselTable::new(zeta, reach);
    let density = |site: i64| {
        let a = table.get(lo - site);
        let b = table.get(hi - site);
        0.5 * (a * a + b * b)
    };

    let mut right = None;
    for site in window.sites().filter(|&s| s as f64 > input_center) {
        let d = density(site);
        if right.map_or(true, |(_, best)| d >= best) {
            right = Some((site, d));
        }
    }
    let mut left = None;
    for site in window.sites().rev().filter(|&s| (s as f64) < input_center) {
        let d = density(site);
        if left.map_or(true, |(_, best)| d >= best) {
            left = Some((site, d));
        }
    }
    let (right_site, left_site) = match (right, left) {
        (Some((r, _)), Some((l, _))) => (r, l),
        _ => return Err(Error::SiteOutsideWindow(libm::round(input_center) as i64)),
    };
    Ok(BranchPair {
        right_site,
        left_site,
        z,
        degenerate: libm::fabs(zeta) < 1.0,
    })
}
