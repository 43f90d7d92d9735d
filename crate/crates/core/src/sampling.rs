//! Seeded random streams, the nine pdf families and weighted discrete choice.
//!
//! Every random decision in the generator goes through [`RngStream`], a
//! xoshiro256** generator seeded through SplitMix64 (the reference seeding
//! procedure published with xoshiro). Stream `k` of a seed is the base
//! generator advanced by `k` calls to the standard xoshiro256 `jump()`
//! polynomial, so each replica draws from a non-overlapping 2^128 block.
//!
//! Uniform reals are `(next_u64 >> 11) * 2^-53`, which makes the uniform
//! stream bit-identical to any other implementation following the same
//! reference code. Non-uniform transforms (normal, gamma, wald, ...) are
//! delegated to `rand_distr`; only their distribution and seed determinism
//! are guaranteed, not cross-implementation bit equality.

use rand::{RngCore, SeedableRng};
use rand_distr::{Cauchy, Distribution, Exp1, Gamma, InverseGaussian, StandardNormal};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("invalid pdf parameters: {0}")]
    InvalidParams(String),
    #[error("weights length {weights} does not match {items} items")]
    LengthMismatch { items: usize, weights: usize },
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("cannot choose from an empty list")]
    EmptyChoice,
    #[error("weights must be finite and non-negative")]
    NegativeWeight,
}

/// Deterministic random stream (xoshiro256**, SplitMix64 seeding).
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: Xoshiro256StarStar,
    seed: u64,
    stream: u64,
    draws: u64,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "xoshiro256**/splitmix64";

    pub fn new(seed: u64) -> Self {
        Self::for_stream(seed, 0)
    }

    /// Stream `stream` of `seed`: the base generator jumped `stream` times.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut inner = Xoshiro256StarStar::seed_from_u64(seed);
        for _ in 0..stream {
            inner.jump();
        }
        Self {
            inner,
            seed,
            stream,
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit words consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let k = (self.next_f64() * n as f64) as usize;
        k.min(n - 1)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdfFamily {
    Cauchy,
    Expon,
    Gamma,
    Gilbrat,
    Lognorm,
    Normal,
    Powerlaw,
    Uniform,
    Wald,
}

impl PdfFamily {
    pub const ALL: [PdfFamily; 9] = [
        PdfFamily::Cauchy,
        PdfFamily::Expon,
        PdfFamily::Gamma,
        PdfFamily::Gilbrat,
        PdfFamily::Lognorm,
        PdfFamily::Normal,
        PdfFamily::Powerlaw,
        PdfFamily::Uniform,
        PdfFamily::Wald,
    ];

    /// Whether the family takes a shape parameter (`aux`).
    pub fn needs_aux(self) -> bool {
        matches!(self, PdfFamily::Gamma | PdfFamily::Lognorm | PdfFamily::Powerlaw)
    }

    pub fn name(self) -> &'static str {
        match self {
            PdfFamily::Cauchy => "cauchy",
            PdfFamily::Expon => "expon",
            PdfFamily::Gamma => "gamma",
            PdfFamily::Gilbrat => "gilbrat",
            PdfFamily::Lognorm => "lognorm",
            PdfFamily::Normal => "normal",
            PdfFamily::Powerlaw => "powerlaw",
            PdfFamily::Uniform => "uniform",
            PdfFamily::Wald => "wald",
        }
    }
}

impl fmt::Display for PdfFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PdfFamily {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PdfFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SamplingError::InvalidParams(format!("unknown pdf family `{s}`")))
    }
}

/// A location/scale distribution, optionally with a shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfSpec {
    pub family: PdfFamily,
    pub loc: f64,
    pub scale: f64,
    pub aux: Option<f64>,
}

impl PdfSpec {
    pub fn new(family: PdfFamily, loc: f64, scale: f64, aux: Option<f64>) -> Result<Self, SamplingError> {
        let pdf = Self {
            family,
            loc,
            scale,
            aux,
        };
        pdf.validate()?;
        Ok(pdf)
    }

    pub fn uniform(loc: f64, scale: f64) -> Self {
        Self {
            family: PdfFamily::Uniform,
            loc,
            scale,
            aux: None,
        }
    }

    pub fn normal(mean: f64, sd: f64) -> Self {
        Self {
            family: PdfFamily::Normal,
            loc: mean,
            scale: sd,
            aux: None,
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if !self.loc.is_finite() || !self.scale.is_finite() {
            return Err(SamplingError::InvalidParams("loc and scale must be finite".into()));
        }
        // scale 0 is accepted as a degenerate point mass at loc
        if self.scale < 0.0 {
            return Err(SamplingError::InvalidParams(format!(
                "scale must be non-negative, got {}",
                self.scale
            )));
        }
        match (self.family.needs_aux(), self.aux) {
            (true, None) => Err(SamplingError::InvalidParams(format!(
                "{} requires aux",
                self.family
            ))),
            (true, Some(a)) if !(a.is_finite() && a > 0.0) => Err(SamplingError::InvalidParams(
                format!("{} requires aux > 0, got {a}", self.family),
            )),
            (false, Some(_)) => Err(SamplingError::InvalidParams(format!(
                "{} takes no aux parameter",
                self.family
            ))),
            _ => Ok(()),
        }
    }

    /// Scales location and scale by a unit-conversion factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            loc: self.loc * factor,
            scale: self.scale * factor,
            ..*self
        }
    }

    /// Lower bound of the support, if any.
    pub fn support_min(&self) -> Option<f64> {
        match self.family {
            PdfFamily::Normal | PdfFamily::Cauchy => None,
            _ => Some(self.loc),
        }
    }

    /// Upper bound of the support, if any.
    pub fn support_max(&self) -> Option<f64> {
        match self.family {
            PdfFamily::Uniform | PdfFamily::Powerlaw => Some(self.loc + self.scale),
            _ => None,
        }
    }
}

/// Draws one value from `pdf`.
///
/// Parameterizations follow the SciPy location/scale conventions:
/// uniform on `[loc, loc+scale]`, normal with mean `loc` and sd `scale`,
/// every other family as `loc + scale * X` for the standard variate `X`.
pub fn sample_pdf(pdf: &PdfSpec, rng: &mut RngStream) -> Result<f64, SamplingError> {
    pdf.validate()?;
    let PdfSpec { loc, scale, aux, .. } = *pdf;
    let x = match pdf.family {
        PdfFamily::Uniform => rng.next_f64(),
        PdfFamily::Normal => StandardNormal.sample(rng),
        PdfFamily::Expon => Exp1.sample(rng),
        PdfFamily::Cauchy => Cauchy::new(0.0, 1.0)
            .map_err(|e| SamplingError::InvalidParams(e.to_string()))?
            .sample(rng),
        PdfFamily::Gamma => Gamma::new(aux.unwrap_or(1.0), 1.0)
            .map_err(|e| SamplingError::InvalidParams(e.to_string()))?
            .sample(rng),
        PdfFamily::Lognorm => {
            let z: f64 = StandardNormal.sample(rng);
            (aux.unwrap_or(1.0) * z).exp()
        }
        PdfFamily::Gilbrat => {
            let z: f64 = StandardNormal.sample(rng);
            z.exp()
        }
        PdfFamily::Powerlaw => rng.next_f64().powf(1.0 / aux.unwrap_or(1.0)),
        PdfFamily::Wald => InverseGaussian::new(1.0, 1.0)
            .map_err(|e| SamplingError::InvalidParams(e.to_string()))?
            .sample(rng),
    };
    Ok(loc + scale * x)
}

/// Picks an index into `n` items, uniformly or proportionally to `weights`.
pub fn weighted_index(n: usize, weights: Option<&[f64]>, rng: &mut RngStream) -> Result<usize, SamplingError> {
    if n == 0 {
        return Err(SamplingError::EmptyChoice);
    }
    let Some(weights) = weights else {
        return Ok(rng.below(n));
    };
    if weights.len() != n {
        return Err(SamplingError::LengthMismatch {
            items: n,
            weights: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(SamplingError::NegativeWeight);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(SamplingError::AllZeroWeights);
    }
    let target = rng.next_f64() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    // float round-off: fall back to the last item with positive weight
    Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(n - 1))
}

pub fn weighted_choice<'a, T>(
    items: &'a [T],
    weights: Option<&[f64]>,
    rng: &mut RngStream,
) -> Result<&'a T, SamplingError> {
    weighted_index(items.len(), weights, rng).map(|i| &items[i])
}
