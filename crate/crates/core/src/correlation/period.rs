use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::CoincidenceTrace;
use crate::{Error, Result, ZGrid};

/// Minimum ratio of the spectral peak to the median spectral magnitude.
pub const PEAK_TO_MEDIAN: f64 = 5.0;
/// Required coverage in estimated periods, with 5% slack for the estimate.
const MIN_PERIODS: f64 = 2.0 * 0.95;
/// Required samples per estimated period, with the same slack.
const MIN_SAMPLES_PER_PERIOD: f64 = 64.0 * 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    pub period: f64,
    /// Interpolated peak position in DFT bins.
    pub bin: f64,
    pub peak_to_median: f64,
}

/// Dominant period of a trace; see [`estimate_period`].
pub fn oscillation_period(trace: &CoincidenceTrace) -> Result<PeriodEstimate> {
    estimate_period(&trace.grid, &trace.samples())
}

/// Period of the strongest non-zero frequency of a grid-aligned signal.
///
/// Missing samples are dropped from the mean and enter the transform as zero
/// after mean subtraction. The peak bin is refined by three-bin interpolation
/// on the complex spectrum, `δ = Re[(X₋ - X₊) / (2X₀ - X₋ - X₊)]`.
pub fn estimate_period(grid: &ZGrid, samples: &[Option<f64>]) -> Result<PeriodEstimate> {
    let n = grid.samples();
    assert_eq!(samples.len(), n, "one sample per grid point");
    let present: Vec<f64> = samples.iter().flatten().copied().collect();
    if present.len() < 4 || n < 8 {
        return Err(Error::InsufficientSampling { period: f64::NAN });
    }
    let mean = present.iter().sum::<f64>() / present.len() as f64;
    let centered: Vec<f64> = samples.iter().map(|s| s.map_or(0.0, |v| v - mean)).collect();

    let half = n / 2;
    let twiddle: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    let spectrum: Vec<Complex64> = (0..=half)
        .map(|k| {
            centered
                .iter()
                .enumerate()
                .map(|(j, &v)| twiddle[(j * k) % n] * v)
                .sum()
        })
        .collect();
    let mags: Vec<f64> = spectrum.iter().map(|x| x.norm()).collect();

    let k = (1..half)
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .expect("at least one interior bin");
    let mut sorted: Vec<f64> = mags[1..=half].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    } else {
        sorted[sorted.len() / 2]
    };
    let peak_to_median = if median > 0.0 { mags[k] / median } else { f64::INFINITY };
    if peak_to_median.is_nan() || peak_to_median < PEAK_TO_MEDIAN {
        return Err(Error::NoDominantPeak { ratio: peak_to_median });
    }

    let (prev, here, next) = (spectrum[k - 1], spectrum[k], spectrum[k + 1]);
    let denom = here * 2.0 - prev - next;
    let delta = if denom.norm() > 0.0 {
        ((prev - next) / denom).re.clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let bin = k as f64 + delta;
    let dz = grid.step();
    let period = n as f64 * dz / bin;

    let span = grid.end() - grid.start();
    if span < MIN_PERIODS * period || period < MIN_SAMPLES_PER_PERIOD * dz {
        return Err(Error::InsufficientSampling { period });
    }
    Ok(PeriodEstimate { period, bin, peak_to_median })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(t0: f64, cycles: f64, per_period: usize) -> (ZGrid, Vec<Option<f64>>) {
        let samples = (cycles * per_period as f64) as usize + 1;
        let grid = ZGrid::new(0.0, (samples - 1) as f64 * t0 / per_period as f64, samples).unwrap();
        let values = grid.iter().map(|z| Some(libm::cos(2.0 * PI * z / t0))).collect();
        (grid, values)
    }

    #[test]
    fn synthetic_cosine() {
        for &(t0, cycles) in &[(1.0, 10.3), (0.37, 20.25), (3.0, 33.7)] {
            let (grid, values) = cosine(t0, cycles, 64);
            let est = estimate_period(&grid, &values).unwrap();
            assert!((est.period / t0 - 1.0).abs() < 1e-3, "T0={t0}: {est:?}");
        }
    }

    #[test]
    fn tolerates_gaps() {
        let (grid, mut values) = cosine(1.0, 12.0, 64);
        for (i, v) in values.iter_mut().enumerate() {
            if i % 64 < 5 {
                *v = None;
            }
        }
        let est = estimate_period(&grid, &values).unwrap();
        assert!((est.period - 1.0).abs() < 1e-3, "{est:?}");
    }

    #[test]
    fn flat_signal_has_no_peak() {
        let grid = ZGrid::new(0.0, 10.0, 256).unwrap();
        let values: Vec<Option<f64>> = grid
            .iter()
            .enumerate()
            .map(|(i, _)| Some(if i % 2 == 0 { 1.0 } else { 1.0 + 1e-17 }))
            .collect();
        assert!(matches!(
            estimate_period(&grid, &values),
            Err(Error::NoDominantPeak { .. }) | Err(Error::InsufficientSampling { .. })
        ));
    }

    #[test]
    fn white_noise_is_rejected() {
        // deterministic pseudo-noise from a linear congruential generator
        let grid = ZGrid::new(0.0, 10.0, 512).unwrap();
        let mut state = 12345u64;
        let values: Vec<Option<f64>> = (0..512)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Some((state >> 11) as f64 / (1u64 << 53) as f64)
            })
            .collect();
        assert!(matches!(estimate_period(&grid, &values), Err(Error::NoDominantPeak { .. })));
    }

    #[test]
    fn too_few_cycles() {
        let (grid, values) = cosine(1.0, 1.2, 64);
        assert!(matches!(
            estimate_period(&grid, &values),
            Err(Error::InsufficientSampling { .. })
        ));
    }
}
