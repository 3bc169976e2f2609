//! Integer-order Bessel functions of the first kind.
//!
//! All orders `0..=max_order` at one argument are produced together by
//! Miller's downward recurrence, normalized with `J_0 + 2 Σ J_2k = 1`. The
//! recurrence runs in a rescaled representation so that deep-tail values keep
//! a usable logarithm even where the plain `f64` value underflows.

use alloc::vec::Vec;

const RESCALE: f64 = 1.0e200;

/// `J_n(x)` for every integer `|n| <= max_order` at a fixed argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    x: f64,
    values: Vec<f64>,
    ln_abs: Vec<f64>,
    signs: Vec<f64>,
}

impl BesselTable {
    pub fn new(x: f64, max_order: usize) -> Self {
        let ax = libm::fabs(x);
        let mut values = alloc::vec![0.0; max_order + 1];
        let mut ln_abs = alloc::vec![f64::NEG_INFINITY; max_order + 1];
        let mut signs = alloc::vec![0.0; max_order + 1];

        if ax == 0.0 {
            values[0] = 1.0;
            ln_abs[0] = 0.0;
            signs[0] = 1.0;
            return Self { x, values, ln_abs, signs };
        }

        let top = (max_order as f64).max(ax);
        let start = top + 30.0 + libm::sqrt(60.0 * top);
        // Even starting order keeps the normalization sum aligned.
        let start = 2 * (start as usize).div_ceil(2);

        // mantissa and number of rescalings already applied at that order
        let mut mant = alloc::vec![0.0f64; start + 2];
        let mut shifts = alloc::vec![0u32; start + 2];
        let mut shift = 0u32;
        let mut above = 0.0f64;
        let mut here = 1.0e-30f64;
        mant[start] = here;
        for k in (1..=start).rev() {
            let below = (2.0 * k as f64 / ax) * here - above;
            above = here;
            here = below;
            if libm::fabs(here) > RESCALE {
                here /= RESCALE;
                above /= RESCALE;
                shift += 1;
            }
            mant[k - 1] = here;
            shifts[k - 1] = shift;
        }
        // earlier (higher-order) entries were stored before later rescalings
        let ln_rescale = libm::log(RESCALE);
        let at_final = |k: usize| -> f64 {
            let lag = (shift - shifts[k]) as i32;
            if lag == 0 {
                mant[k]
            } else {
                mant[k] * libm::exp(-(lag as f64) * ln_rescale)
            }
        };
        let mut norm = at_final(0);
        let mut k = 2;
        while k <= start {
            norm += 2.0 * at_final(k);
            k += 2;
        }
        let ln_norm = libm::log(libm::fabs(norm));

        let odd_flip = x < 0.0;
        for n in 0..=max_order {
            let sign = if odd_flip && n % 2 == 1 { -1.0 } else { 1.0 };
            let v = sign * at_final(n) / norm;
            values[n] = v;
            if mant[n] != 0.0 {
                ln_abs[n] = libm::log(libm::fabs(mant[n]))
                    - ((shift - shifts[n]) as f64) * ln_rescale
                    - ln_norm;
                signs[n] = sign * libm::copysign(1.0, mant[n]) * libm::copysign(1.0, norm);
            }
        }
        Self { x, values, ln_abs, signs }
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_n(x)`, with `J_{-n} = (-1)^n J_n`.
    ///
    /// Panics if `|n|` exceeds the table's order range.
    pub fn get(&self, n: i64) -> f64 {
        let v = self.values[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -v
        } else {
            v
        }
    }

    /// `ln |J_n(x)|`, finite even where [`get`](Self::get) underflows to zero.
    pub fn ln_abs(&self, n: i64) -> f64 {
        self.ln_abs[n.unsigned_abs() as usize]
    }

    /// Sign of `J_n(x)` as `-1`, `0` or `1`, valid even where the value underflows.
    pub fn sign(&self, n: i64) -> f64 {
        let s = self.signs[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -s
        } else {
            s
        }
    }
}

/// `J_n(x)` for a single integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    BesselTable::new(x, n.unsigned_abs() as usize).get(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit arbitrary-precision evaluation.
    const J0_4: f64 = -0.397_149_809_863_847_372_286_590_768_452;
    const J_OF_2: [f64; 8] = [
        0.223_890_779_141_235_668_051_827_454_65,
        0.576_724_807_756_873_387_202_448_242_269,
        0.352_834_028_615_637_719_150_620_787_619,
        0.128_943_249_474_402_051_098_793_332_969,
        0.033_995_719_807_568_434_145_759_211_288_5,
        0.007_039_629_755_871_685_484_243_512_184_88,
        0.001_202_428_971_789_993_275_458_349_635_89,
        0.000_174_944_074_868_274_168_506_585_630_46,
    ];

    fn rel(a: f64, b: f64) -> f64 {
        libm::fabs(a - b) / libm::fabs(b)
    }

    #[test]
    fn pinned_values() {
        assert!(rel(bessel_j(0, 4.0), J0_4) < 1e-13);
        let t = BesselTable::new(2.0, 7);
        for (n, want) in J_OF_2.iter().enumerate() {
            assert!(rel(t.get(n as i64), *want) < 1e-13, "J_{n}(2)");
        }
        assert!(rel(bessel_j(3, 4.0), 0.430_171_473_875_621_940_358_183_478_853) < 1e-13);
        assert!(rel(bessel_j(10, 20.0), 0.186_482_558_023_945_083_214_108_264_512) < 1e-12);
        assert!(rel(bessel_j(7, 35.5), 0.101_214_010_210_748_391_755_153_269_074) < 1e-12);
    }

    #[test]
    fn tail_values_keep_relative_accuracy() {
        assert!(rel(bessel_j(5, 0.5), 8.053_627_241_357_474_085_978_185_330_31e-6) < 1e-12);
        assert!(rel(bessel_j(40, 15.0), 3.053_535_230_489_007_093_507_151_411_86e-14) < 1e-11);
        assert!(rel(bessel_j(90, 60.0), 1.590_777_288_412_096_524_627_909_398_5e-10) < 1e-11);
    }

    #[test]
    fn negative_orders_and_arguments() {
        assert!(rel(bessel_j(1, -3.0), -0.339_058_958_525_936_458_925_514_597_206) < 1e-13);
        let t = BesselTable::new(2.0, 7);
        for n in 1..=7i64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(t.get(-n), sign * t.get(n));
            assert_eq!(t.sign(-n), sign * t.sign(n));
        }
    }

    #[test]
    fn zero_argument() {
        let t = BesselTable::new(0.0, 5);
        assert_eq!(t.get(0), 1.0);
        assert_eq!(t.get(3), 0.0);
        assert_eq!(t.sign(3), 0.0);
        assert_eq!(t.ln_abs(0), 0.0);
    }

    #[test]
    fn log_magnitude_survives_underflow() {
        // J_300(0.5) ~ 1e-795, far below f64 range
        let t = BesselTable::new(0.5, 300);
        assert_eq!(t.get(300), 0.0);
        assert!(rel(t.ln_abs(300), -1830.794_365_922_3) < 1e-12);
        assert_eq!(t.sign(300), 1.0);
        assert!(rel(t.ln_abs(5), libm::log(8.053_627_241_357_474e-6)) < 1e-12);
    }

    #[test]
    fn squared_sum_is_one() {
        for &x in &[0.3, 4.0, 17.5, 60.0] {
            let t = BesselTable::new(x, 200);
            let s: f64 = (-200..=200).map(|n| t.get(n) * t.get(n)).sum();
            assert!(libm::fabs(s - 1.0) < 1e-13, "x={x} sum={s}");
        }
    }
}
