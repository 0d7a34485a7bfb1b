//! Regularization weights and their data-driven schedule.
//!
//! All weights act on the solver's internal units: lengths in multiples of
//! the x spacing, moduli and pressures in kPa, displacements divided by the
//! largest measured displacement magnitude.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmParams {
    /// Weight of the wave-equation (constraint) residual.
    pub alpha_c: f64,
    /// Weight of the local-to-global elasticity consensus.
    pub alpha_mu: f64,
    /// Weight of the measured-displacement fit (ρ in the schedule; not the density).
    pub data_weight: f64,
    /// Weight of the k-space splitting in the soft-threshold step.
    pub alpha_x: f64,
    /// Weight of the k-space splitting in the displacement update.
    pub alpha_w: f64,
    /// k-space sparsity weight.
    pub gamma_u: f64,
    /// Total-variation weight on the global modulus.
    pub gamma_mu: f64,
    /// Pressure smoothness weight.
    pub gamma_p: f64,
    /// Box for Re μ in Pa.
    pub mu_re_bounds: (f64, f64),
    /// Box for Im μ in Pa.
    pub mu_im_bounds: (f64, f64),
    /// Relative stopping tolerance on `‖μᵏ − μᵏ⁻¹‖₁ / ‖μᵏ⁻¹‖₁`.
    pub tol_mu: f64,
    pub max_iter: usize,
}

pub const DEFAULT_MU_RE_BOUNDS: (f64, f64) = (330.0, 40_000.0);
pub const DEFAULT_MU_IM_BOUNDS: (f64, f64) = (0.0, 10_000.0);
pub const DEFAULT_TOL_MU: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Optional replacements for any scheduled value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub alpha_c: Option<f64>,
    pub alpha_mu: Option<f64>,
    pub data_weight: Option<f64>,
    pub alpha_x: Option<f64>,
    pub alpha_w: Option<f64>,
    pub gamma_u: Option<f64>,
    pub gamma_mu: Option<f64>,
    pub gamma_p: Option<f64>,
    pub mu_re_bounds: Option<(f64, f64)>,
    pub mu_im_bounds: Option<(f64, f64)>,
    pub tol_mu: Option<f64>,
    pub max_iter: Option<usize>,
}

/// Spectral and amplitude statistics the schedule is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamInputs {
    /// `MaxEig(𝕂_uᴴ𝕂_u)` for the measured displacement.
    pub max_eig_inversion: f64,
    /// `MaxEig([𝕂_μ − 𝕄]ᴴ[𝕂_μ − 𝕄])` for the first global modulus estimate.
    pub max_eig_wave: f64,
    /// Largest k-space coefficient magnitude of the measured displacement.
    pub max_abs_fft: f64,
    /// Largest plane-fit gradient magnitude of the first global modulus estimate.
    pub max_abs_grad_mu: f64,
    /// `MaxEig(𝕂_pᴴ𝕂_p)`.
    pub max_eig_pressure: f64,
    /// `MaxEig(∇ᵀ∇)` on the element lattice.
    pub max_eig_gradient: f64,
}

/// Default schedule:
/// `α_c = 1`, `α_μ = α_c·MaxEig(𝕂_uᴴ𝕂_u)·2⁻¹²`, `ρ = MaxEig(wave)·2⁻⁴`,
/// `α_X = 10⁻³ρ`, `α_W = 10⁻²ρ`, `γ_u = MaxAbs(FFT v)·2⁻⁷`,
/// `γ_μ = MaxAbs(∇μ)·2⁻¹⁴`, `γ_p = MaxEig(𝕂_pᴴ𝕂_p)/MaxEig(∇ᵀ∇)·2⁻¹⁶`,
/// `Tol_μ = 10⁻³`, `MaxIter = 100`; overrides replace individual values.
pub fn compute_params(inputs: &ParamInputs, overrides: &ParamOverrides) -> Result<AdmmParams> {
    let alpha_c = overrides.alpha_c.unwrap_or(1.0);
    let data_weight = overrides.data_weight.unwrap_or(inputs.max_eig_wave * 2f64.powi(-4));
    let gamma_p = overrides.gamma_p.unwrap_or(if inputs.max_eig_gradient > 0.0 {
        inputs.max_eig_pressure / inputs.max_eig_gradient * 2f64.powi(-16)
    } else {
        0.0
    });
    let p = AdmmParams {
        alpha_c,
        alpha_mu: overrides.alpha_mu.unwrap_or(alpha_c * inputs.max_eig_inversion * 2f64.powi(-12)),
        data_weight,
        alpha_x: overrides.alpha_x.unwrap_or(1e-3 * data_weight),
        alpha_w: overrides.alpha_w.unwrap_or(1e-2 * data_weight),
        gamma_u: overrides.gamma_u.unwrap_or(inputs.max_abs_fft * 2f64.powi(-7)),
        gamma_mu: overrides.gamma_mu.unwrap_or(inputs.max_abs_grad_mu * 2f64.powi(-14)),
        gamma_p,
        mu_re_bounds: overrides.mu_re_bounds.unwrap_or(DEFAULT_MU_RE_BOUNDS),
        mu_im_bounds: overrides.mu_im_bounds.unwrap_or(DEFAULT_MU_IM_BOUNDS),
        tol_mu: overrides.tol_mu.unwrap_or(DEFAULT_TOL_MU),
        max_iter: overrides.max_iter.unwrap_or(DEFAULT_MAX_ITER),
    };
    p.validate()?;
    Ok(p)
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("alpha_mu", self.alpha_mu),
            ("data_weight", self.data_weight),
            ("alpha_x", self.alpha_x),
            ("alpha_w", self.alpha_w),
            ("gamma_u", self.gamma_u),
            ("gamma_mu", self.gamma_mu),
            ("gamma_p", self.gamma_p),
        ];
        if !(self.alpha_c.is_finite() && self.alpha_c > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha_c must be positive, got {}", self.alpha_c)));
        }
        if let Some((name, v)) = weights.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {v}")));
        }
        for (name, (lo, hi)) in [("Re mu", self.mu_re_bounds), ("Im mu", self.mu_im_bounds)] {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} bounds need lo < hi, got [{lo}, {hi}]")));
            }
        }
        if !(self.tol_mu > 0.0) || self.tol_mu.is_nan() {
            return Err(Error::InvalidArgument(format!("tol_mu must be positive, got {}", self.tol_mu)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> ParamInputs {
        ParamInputs {
            max_eig_inversion: 4096.0,
            max_eig_wave: 32.0,
            max_abs_fft: 12.8,
            max_abs_grad_mu: 16384.0,
            max_eig_pressure: 6.0,
            max_eig_gradient: 12.0,
        }
    }

    #[test]
    fn fixed_entries_ignore_the_data() {
        let p = compute_params(&inputs(), &ParamOverrides::default()).unwrap();
        assert_eq!(p.alpha_c, 1.0);
        assert_eq!(p.tol_mu, 1e-3);
        assert_eq!(p.max_iter, 100);
        let q = compute_params(&ParamInputs::default(), &ParamOverrides::default()).unwrap();
        assert_eq!(q.alpha_c, 1.0);
    }

    #[test]
    fn schedule_formulas() {
        let p = compute_params(&inputs(), &ParamOverrides::default()).unwrap();
        assert_eq!(p.alpha_mu, 1.0);
        assert_eq!(p.data_weight, 2.0);
        assert_eq!(p.alpha_x, 2e-3);
        assert_eq!(p.alpha_w, 2e-2);
        assert_eq!(p.gamma_u, 0.1);
        assert_eq!(p.gamma_mu, 1.0);
        assert_eq!(p.gamma_p, 0.5 * 2f64.powi(-16));
    }

    #[test]
    fn overrides_win_and_bad_values_fail() {
        let o = ParamOverrides {
            gamma_u: Some(0.0),
            max_iter: Some(3),
            ..Default::default()
        };
        let p = compute_params(&inputs(), &o).unwrap();
        assert_eq!(p.gamma_u, 0.0);
        assert_eq!(p.max_iter, 3);
        let bad = ParamOverrides {
            mu_re_bounds: Some((5.0, 1.0)),
            ..Default::default()
        };
        assert!(compute_params(&inputs(), &bad).is_err());
        let bad = ParamOverrides {
            alpha_c: Some(0.0),
            ..Default::default()
        };
        assert!(compute_params(&inputs(), &bad).is_err());
    }
}
