//! Histograms, Otsu's threshold and binarisation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{Image, Mask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("histogram has fewer than two distinct values")]
    DegenerateHistogram,
    #[error("invalid threshold {0:?}: expected `auto` or an integer in 0..=255")]
    InvalidMode(String),
}

/// Pixel counts per intensity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; 256],
}

impl Histogram {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { counts }
    }

    pub fn of(image: &Image) -> Self {
        let mut counts = [0u64; 256];
        for &p in image.pixels() {
            counts[p as usize] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of non-empty bins.
    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn min_value(&self) -> Option<u8> {
        self.counts.iter().position(|&c| c > 0).map(|v| v as u8)
    }

    pub fn max_value(&self) -> Option<u8> {
        self.counts.iter().rposition(|&c| c > 0).map(|v| v as u8)
    }

    /// Pixels strictly brighter than `t`.
    pub fn count_above(&self, t: u8) -> u64 {
        self.counts[t as usize + 1..].iter().sum()
    }
}

pub fn histogram(image: &Image) -> Histogram {
    Histogram::of(image)
}

/// Between-class variance at threshold `t`, scaled by `N²`, as the exact
/// fraction `(S0·N − S·n0)² / (n0·n1)`.
struct Separation {
    numerator: BigUint,
    denominator: BigUint,
}

impl Separation {
    fn cmp(&self, other: &Separation) -> Ordering {
        (&self.numerator * &other.denominator).cmp(&(&other.numerator * &self.denominator))
    }
}

/// Otsu's threshold: the smallest `t` in 0..=254 maximising
/// `ω0(t)·ω1(t)·(μ0(t) − μ1(t))²` with class 0 holding values `<= t`.
///
/// Comparisons are carried out in exact integer arithmetic so that ties
/// resolve deterministically towards the smaller threshold.
pub fn otsu(hist: &Histogram) -> Result<u8, ThresholdError> {
    if hist.occupied() < 2 {
        return Err(ThresholdError::DegenerateHistogram);
    }
    let counts = hist.counts();
    let n: u128 = hist.total() as u128;
    let sum: u128 = counts
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();

    let mut best: Option<(u8, Separation)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 0..255usize {
        n0 += counts[t] as u128;
        s0 += t as u128 * counts[t] as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (s0 * n).abs_diff(sum * n0);
        let diff = BigUint::from(diff);
        let candidate = Separation {
            numerator: &diff * &diff,
            denominator: BigUint::from(n0) * BigUint::from(n1),
        };
        match &best {
            Some((_, b)) if candidate.cmp(b) != Ordering::Greater => {}
            _ => best = Some((t as u8, candidate)),
        }
    }
    Ok(best.expect("two occupied bins give a valid split").0)
}

/// Foreground where the pixel is strictly greater than `t`.
pub fn binarize(image: &Image, t: u8) -> Mask {
    Mask::from_image(image, |p| p > t)
}

/// How the pipeline picks its threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ThresholdMode {
    #[default]
    Auto,
    Fixed(u8),
}

impl ThresholdMode {
    /// Resolves to a concrete threshold for `image`.
    pub fn resolve(self, image: &Image) -> Result<u8, ThresholdError> {
        match self {
            ThresholdMode::Auto => otsu(&Histogram::of(image)),
            ThresholdMode::Fixed(t) => Ok(t),
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::Auto => f.write_str("auto"),
            ThresholdMode::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdMode::Auto);
        }
        s.parse::<u8>()
            .map(ThresholdMode::Fixed)
            .map_err(|_| ThresholdError::InvalidMode(s.to_string()))
    }
}

impl From<ThresholdMode> for String {
    fn from(mode: ThresholdMode) -> Self {
        mode.to_string()
    }
}

impl TryFrom<String> for ThresholdMode {
    type Error = ThresholdError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
