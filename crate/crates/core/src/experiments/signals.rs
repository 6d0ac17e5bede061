use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{apply_chebyshev, apply_exact, project_chebyshev, Damping, SignalBatch};
use crate::graphs::{LaplacianOperator, SpectralDecomposition};
use crate::rng::{derive_seed, rng_from_seed, streams, SeededRng};

const BAND_SLACK: f64 = 1e-10;

/// Families of input signals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalRegime {
    GaussianIid,
    /// White noise shaped by `exp(-4 λ / λ_max)`.
    SmoothLowpass,
    /// A unit impulse at a random node diffused by `exp(-L / 2)`.
    LocalizedBump,
    /// White noise projected onto eigenvectors with `lo <= λ <= hi`.
    BandLimited { lo: f64, hi: f64 },
    /// White noise shaped by `exp(-t λ)`.
    Diffusion { t: f64 },
}

impl SignalRegime {
    pub fn name(&self) -> &'static str {
        match self {
            SignalRegime::GaussianIid => "gaussian_iid",
            SignalRegime::SmoothLowpass => "smooth_lowpass",
            SignalRegime::LocalizedBump => "localized_bump",
            SignalRegime::BandLimited { .. } => "band_limited",
            SignalRegime::Diffusion { .. } => "diffusion",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SignalRegime::BandLimited { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                Err(Error::param(format!("invalid band [{lo}, {hi}]")))
            }
            SignalRegime::Diffusion { t } if !(t.is_finite() && t >= 0.0) => {
                Err(Error::param(format!("diffusion time must be nonnegative, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// Spectral shaping applied to white noise, if the regime is of that kind.
    fn noise_response(&self, lambda_max: f64) -> Option<Box<dyn Fn(f64) -> f64>> {
        match *self {
            SignalRegime::GaussianIid => Some(Box::new(|_| 1.0)),
            SignalRegime::SmoothLowpass => {
                let scale = 4.0 / lambda_max.max(f64::MIN_POSITIVE);
                Some(Box::new(move |l| (-scale * l).exp()))
            }
            SignalRegime::Diffusion { t } => Some(Box::new(move |l| (-t * l).exp())),
            SignalRegime::BandLimited { lo, hi } => {
                Some(Box::new(move |l| if in_band(l, lo, hi) { 1.0 } else { 0.0 }))
            }
            SignalRegime::LocalizedBump => None,
        }
    }
}

/// Band membership with a little slack for round-off in computed eigenvalues.
fn in_band(lambda: f64, lo: f64, hi: f64) -> bool {
    let slack = BAND_SLACK * hi.abs().max(lo.abs()).max(1.0);
    lambda >= lo - slack && lambda <= hi + slack
}

fn draw_raw(regime: &SignalRegime, n: usize, s: usize, rng: &mut SeededRng) -> SignalBatch {
    let mut x = SignalBatch::zeros(n, s);
    for col in 0..s {
        let c = x.column_mut(col);
        match regime {
            SignalRegime::LocalizedBump => c[rng.random_range(0..n)] = 1.0,
            _ => c.iter_mut().for_each(|v| *v = StandardNormal.sample(rng)),
        }
    }
    x
}

fn bump_response(l: f64) -> f64 {
    (-0.5 * l).exp()
}

/// `S` signals of one regime on a decomposed graph.
pub fn make_signals(
    regime: &SignalRegime,
    decomp: &SpectralDecomposition,
    num_signals: usize,
    seed: u64,
) -> Result<SignalBatch> {
    if num_signals == 0 {
        return Err(Error::param("need at least one signal"));
    }
    regime.validate()?;
    if let SignalRegime::BandLimited { lo, hi } = *regime {
        if !decomp.eigenvalues().iter().any(|&l| in_band(l, lo, hi)) {
            return Err(Error::degenerate(format!("no eigenvalues inside band [{lo}, {hi}]")));
        }
    }
    let mut rng = rng_from_seed(derive_seed(seed, streams::SIGNALS));
    let raw = draw_raw(regime, decomp.num_nodes(), num_signals, &mut rng);
    let lambdas = decomp.eigenvalues();
    let response: Vec<f64> = match regime.noise_response(decomp.largest_eigenvalue()) {
        Some(f) => lambdas.iter().map(|&l| f(l)).collect(),
        None => lambdas.iter().map(|&l| bump_response(l)).collect(),
    };
    apply_exact(decomp, &response, &raw)
}

/// As [`make_signals`] without an eigendecomposition, through a degree-`R`
/// Chebyshev expansion. Band-limited signals need the eigenbasis and are refused.
pub fn make_signals_chebyshev(
    regime: &SignalRegime,
    lap: &LaplacianOperator,
    num_signals: usize,
    seed: u64,
    degree: usize,
) -> Result<SignalBatch> {
    if num_signals == 0 {
        return Err(Error::param("need at least one signal"));
    }
    regime.validate()?;
    if matches!(regime, SignalRegime::BandLimited { .. }) {
        return Err(Error::Capability(
            "band-limited signals require an eigendecomposition".into(),
        ));
    }
    let mut rng = rng_from_seed(derive_seed(seed, streams::SIGNALS));
    let raw = draw_raw(regime, lap.num_nodes(), num_signals, &mut rng);
    if matches!(regime, SignalRegime::GaussianIid) {
        return Ok(raw);
    }
    let f: Box<dyn Fn(f64) -> f64> = regime
        .noise_response(lap.lambda_max())
        .unwrap_or_else(|| Box::new(bump_response));
    let filter = project_chebyshev(f, lap.lambda_max(), degree, None, Damping::None)?;
    apply_chebyshev(&filter, lap, &raw)
}
