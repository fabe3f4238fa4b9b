//! Gray-coded QPSK.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::spectral::ComplexSample;

/// Map bit pairs to unit-energy symbols. The first bit of a pair selects the
/// sign of the imaginary part and the second the sign of the real part, a
/// zero meaning positive: `00 -> (1+j)/sqrt2`, `01 -> (-1+j)/sqrt2`,
/// `11 -> (-1-j)/sqrt2`, `10 -> (1-j)/sqrt2`.
pub fn qpsk_map(bits: &[bool]) -> Result<Vec<ComplexSample>> {
    if bits.len() % 2 != 0 {
        return Err(Error::OddBitCount(bits.len()));
    }
    let level = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Ok(bits
        .chunks_exact(2)
        .map(|p| Complex64::new(level(p[1]), level(p[0])))
        .collect())
}

/// Minimum-distance decisions, which for this constellation are the quadrant.
pub fn qpsk_demap(samples: &[ComplexSample]) -> Vec<bool> {
    samples.iter().flat_map(|s| [s.im < 0.0, s.re < 0.0]).collect()
}

/// Bit error probability of Gray QPSK over AWGN, `erfc(sqrt(Eb/N0)) / 2`.
pub fn qpsk_ber_theory(ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    0.5 * erfc(ebn0.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constellation() {
        let s = qpsk_map(&[false, false, false, true, true, true, true, false]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(
            s,
            vec![Complex64::new(r, r), Complex64::new(-r, r), Complex64::new(-r, -r), Complex64::new(r, -r)]
        );
        assert!(s.iter().all(|v| (v.norm_sqr() - 1.0).abs() < 1e-15));
        assert_eq!(qpsk_map(&[true]), Err(Error::OddBitCount(1)));
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bits: Vec<bool> = (0..10_000).map(|_| rng.random()).collect();
        assert_eq!(qpsk_demap(&qpsk_map(&bits).unwrap()), bits);
    }

    #[test]
    fn theory_values() {
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        assert!(rel(qpsk_ber_theory(0.0), 0.078_649_603_525_142_6) < 1e-9);
        assert!(rel(qpsk_ber_theory(10.0), 3.872_108_215_522_035e-6) < 1e-9);
    }
}
