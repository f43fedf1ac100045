//! Two-parameter least-squares extrapolations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `y = a + b/x`, `x` a lattice size; the intercept is the `x -> ∞` value.
    LinearInInverseN,
    /// `y = a + b x`; the intercept is the `x -> 0` value.
    LinearInMass,
    /// `y = e^a x^b`, fitted as a line in `(ln x, ln y)`; needs positive data.
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    /// `a`; for a power law the log of the prefactor.
    pub intercept: f64,
    pub intercept_err: f64,
    /// `b`; for a power law the exponent.
    pub slope: f64,
    pub slope_err: f64,
    /// Euclidean norm of the residuals in the fitted coordinates.
    pub residual_norm: f64,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            FitModel::LinearInInverseN => self.intercept + self.slope / x,
            FitModel::LinearInMass => self.intercept + self.slope * x,
            FitModel::PowerLaw => (self.intercept + self.slope * x.ln()).exp(),
        }
    }
}

pub fn extrapolate(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let mut u = Vec::with_capacity(points.len());
    let mut v = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Fit("non-finite data".into()));
        }
        let (ux, vy) = match model {
            FitModel::LinearInInverseN => {
                if x == 0.0 {
                    return Err(Error::Fit("x = 0 has no inverse".into()));
                }
                (1.0 / x, y)
            }
            FitModel::LinearInMass => (x, y),
            FitModel::PowerLaw => {
                if x <= 0.0 || y <= 0.0 {
                    return Err(Error::Fit("power law needs positive x and y".into()));
                }
                (x.ln(), y.ln())
            }
        };
        u.push(ux);
        v.push(vy);
    }
    for i in 0..u.len() {
        if u[i + 1..].contains(&u[i]) {
            return Err(Error::Fit(format!("repeated abscissa {}", points[i].0)));
        }
    }
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let mean_v = v.iter().sum::<f64>() / n;
    let suu: f64 = u.iter().map(|a| (a - mean_u).powi(2)).sum();
    let scale = u.iter().map(|a| a * a).sum::<f64>();
    if suu <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Fit("rank-deficient design".into()));
    }
    let suv: f64 = u.iter().zip(&v).map(|(a, b)| (a - mean_u) * (b - mean_v)).sum();
    let slope = suv / suu;
    let intercept = mean_v - slope * mean_u;
    let rss: f64 = u.iter().zip(&v).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let sigma2 = rss / (n - 2.0);
    Ok(FitResult {
        model,
        intercept,
        intercept_err: (sigma2 * (1.0 / n + mean_u * mean_u / suu)).sqrt(),
        slope,
        slope_err: (sigma2 / suu).sqrt(),
        residual_norm: rss.sqrt(),
    })
}
