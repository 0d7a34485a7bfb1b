use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::DisplacementField;
use crate::error::{Error, Result};

/// Adds i.i.d. circular complex Gaussian noise, scaled so that
/// `20·log10(‖signal‖₂ / ‖noise‖₂)` over the whole field equals `snr_db`.
///
/// `snr_db = +∞` returns the input untouched.
pub fn add_gaussian_noise(field: &DisplacementField, snr_db: f64, seed: u64) -> Result<DisplacementField> {
    if snr_db == f64::INFINITY {
        return Ok(field.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("SNR must be finite or +inf, got {snr_db}")));
    }
    let signal = field.norm();
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<Complex64> = (0..field.values().len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let raw = noise.iter().map(|n| n.norm_sqr()).sum::<f64>().sqrt();
    let scale = signal / 10f64.powf(snr_db / 20.0) / raw;
    let mut out = field.clone();
    for (v, n) in out.values_mut().iter_mut().zip(noise.iter_mut()) {
        *v += *n * scale;
    }
    Ok(out)
}

/// SNR in dB of `noisy` against the clean reference.
pub fn measured_snr_db(clean: &DisplacementField, noisy: &DisplacementField) -> f64 {
    let noise = clean
        .values()
        .iter()
        .zip(noisy.values())
        .map(|(a, b)| (b - a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    20.0 * (clean.norm() / noise).log10()
}
