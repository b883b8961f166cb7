//! Project records, descriptive statistics, bootstrap resampling and the
//! synthetic data generator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{log, sqrt};
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Number of environmental factors in the UCP method.
pub const FACTOR_COUNT: usize = 8;

/// Upper end of the environmental rating scale.
pub const MAX_RATING: f64 = 5.0;

/// Lowest productivity (hours per UCP) any component will produce.
pub const PRODUCTIVITY_FLOOR: f64 = 1.0;

/// The eight environmental-factor ratings of a project, each in `[0, 5]`.
///
/// Factors e1..e6 describe favourable capabilities (familiarity, experience,
/// motivation, ...); e7 and e8 are the unfavourable ones (part-time staff and
/// a difficult programming language).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; FACTOR_COUNT]", into = "[f64; FACTOR_COUNT]")]
pub struct EnvFactors([f64; FACTOR_COUNT]);

impl EnvFactors {
    pub fn new(ratings: [f64; FACTOR_COUNT]) -> Result<Self> {
        for (i, &value) in ratings.iter().enumerate() {
            if !(0.0..=MAX_RATING).contains(&value) {
                return Err(Error::RatingOutOfRange { index: i + 1, value });
            }
        }
        Ok(Self(ratings))
    }

    /// All eight factors at the same rating.
    pub fn uniform(rating: f64) -> Result<Self> {
        Self::new([rating; FACTOR_COUNT])
    }

    pub fn ratings(&self) -> &[f64; FACTOR_COUNT] {
        &self.0
    }

    pub fn get(&self, factor: usize) -> f64 {
        self.0[factor]
    }
}

impl TryFrom<[f64; FACTOR_COUNT]> for EnvFactors {
    type Error = Error;

    fn try_from(ratings: [f64; FACTOR_COUNT]) -> Result<Self> {
        Self::new(ratings)
    }
}

impl From<EnvFactors> for [f64; FACTOR_COUNT] {
    fn from(env: EnvFactors) -> Self {
        env.0
    }
}

/// A completed project. Productivity is always derived as effort / UCP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectRecord {
    env: EnvFactors,
    ucp: f64,
    effort: f64,
}

impl ProjectRecord {
    pub fn new(env: EnvFactors, ucp: f64, effort: f64) -> Result<Self> {
        if !(ucp > 0.0) || !ucp.is_finite() {
            return Err(Error::NonPositiveUcp(ucp));
        }
        if !(effort > 0.0) || !effort.is_finite() {
            return Err(Error::NonPositiveEffort(effort));
        }
        Ok(Self { env, ucp, effort })
    }

    pub fn env(&self) -> &EnvFactors {
        &self.env
    }

    pub fn ucp(&self) -> f64 {
        self.ucp
    }

    pub fn effort(&self) -> f64 {
        self.effort
    }

    /// Hours per use case point.
    pub fn productivity(&self) -> f64 {
        self.effort / self.ucp
    }

    /// FNV-1a digest of the record's ten numeric fields.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        for r in self.env.ratings() {
            h.write_f64(*r);
        }
        h.write_f64(self.ucp);
        h.write_f64(self.effort);
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Order-sensitive digest of a sequence of records.
pub fn fingerprint_records<'a>(records: impl IntoIterator<Item = &'a ProjectRecord>) -> u64 {
    let mut h = Fnv::new();
    for r in records {
        h.write_u64(r.fingerprint());
    }
    h.finish()
}

/// A named, ordered collection of projects.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    records: Vec<ProjectRecord>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, records: Vec<ProjectRecord>) -> Self {
        Self { name: name.into(), records }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[ProjectRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ucps(&self) -> Vec<f64> {
        self.records.iter().map(ProjectRecord::ucp).collect()
    }

    pub fn efforts(&self) -> Vec<f64> {
        self.records.iter().map(ProjectRecord::effort).collect()
    }

    pub fn productivities(&self) -> Vec<f64> {
        self.records.iter().map(ProjectRecord::productivity).collect()
    }

    /// The records at `indices`, in that order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            records: indices.iter().map(|&i| self.records[i]).collect(),
        }
    }

    /// Every record except the one at `index`.
    pub fn without(&self, index: usize) -> Dataset {
        let records = self
            .records
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, r)| *r)
            .collect();
        Dataset { name: self.name.clone(), records }
    }

    pub fn fingerprint(&self) -> u64 {
        fingerprint_records(&self.records)
    }

    pub(crate) fn require(&self, min: usize) -> Result<()> {
        if self.len() < min {
            Err(Error::InsufficientData { required: min, actual: self.len() })
        } else {
            Ok(())
        }
    }
}

/// Mean, sample standard deviation, skewness and (non-excess) kurtosis.
///
/// Skewness and kurtosis are `None` when every value is identical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub stdev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

/// Descriptive statistics of `values`.
///
/// The standard deviation uses the n - 1 divisor. Skewness is m3 / m2^1.5 and
/// kurtosis m4 / m2^2 with central moments taken over n, so a normal sample
/// has kurtosis near 3.
pub fn describe(values: &[f64]) -> Result<DescriptiveStats> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: values.len() });
    }
    // Sorting first makes the result independent of input order, bit for bit.
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.iter().all(|&x| x == v[0]) {
        return Ok(DescriptiveStats { mean: v[0], stdev: 0.0, skewness: None, kurtosis: None });
    }
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in &v {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let stdev = sqrt(m2 / (n - 1.0));
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Ok(DescriptiveStats {
        mean,
        stdev,
        skewness: Some(m3 / (m2 * sqrt(m2))),
        kurtosis: Some(m4 / (m2 * m2)),
    })
}

/// Index form of one bootstrap replicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapSample {
    /// `n` indices drawn uniformly with replacement, in draw order.
    pub in_bag: Vec<usize>,
    /// Indices never drawn, ascending.
    pub out_of_bag: Vec<usize>,
}

impl BootstrapSample {
    /// Draws a replicate over `n` records. Fails with
    /// [`Error::DegenerateReplicate`] if every record was drawn.
    pub fn draw(n: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InsufficientData { required: 3, actual: n });
        }
        let mut rng = rng::rng(seed);
        let mut drawn = alloc::vec![false; n];
        let in_bag: Vec<usize> = (0..n)
            .map(|_| {
                let i = rng.random_range(0..n);
                drawn[i] = true;
                i
            })
            .collect();
        let out_of_bag: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
        if out_of_bag.is_empty() {
            return Err(Error::DegenerateReplicate);
        }
        Ok(Self { in_bag, out_of_bag })
    }
}

/// Splits `dataset` into an in-bag bootstrap sample and its out-of-bag rest.
pub fn bootstrap_split(dataset: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let sample = BootstrapSample::draw(dataset.len(), seed)?;
    Ok((dataset.select(&sample.in_bag), dataset.select(&sample.out_of_bag)))
}

/// Target moments and generative link for synthetic datasets.
///
/// Ratings are drawn uniformly on `[0, 5]`; productivity is
/// `prod_mean + Σ coefficients[j] · (e_j − 2.5) + N(0, noise_stdev²)`, floored
/// at [`PRODUCTIVITY_FLOOR`]; UCP is log-normal with the requested mean and
/// standard deviation. This link is a modelling convenience, not an
/// empirical law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n: usize,
    pub prod_mean: f64,
    pub prod_stdev: f64,
    pub ucp_mean: f64,
    pub ucp_stdev: f64,
    pub coefficients: [f64; FACTOR_COUNT],
    pub noise_stdev: f64,
}

/// Variance of a rating drawn uniformly from `[0, 5]`.
const RATING_VARIANCE: f64 = MAX_RATING * MAX_RATING / 12.0;

/// Factor effects shared by the built-in profiles: better-rated e1..e6 lower
/// the hours per UCP, higher e7/e8 raise them.
pub const DEFAULT_COEFFICIENTS: [f64; FACTOR_COUNT] = [-1.2, -0.6, -1.0, -0.4, -0.8, -0.5, 1.0, 0.7];

impl DatasetProfile {
    /// Builds a profile whose noise level makes the productivity standard
    /// deviation equal `prod_stdev` given the factor coefficients.
    pub fn calibrated(
        n: usize,
        prod_mean: f64,
        prod_stdev: f64,
        ucp_mean: f64,
        ucp_stdev: f64,
        coefficients: [f64; FACTOR_COUNT],
    ) -> Result<Self> {
        let explained = Self::explained_variance(&coefficients);
        let residual = prod_stdev * prod_stdev - explained;
        if residual < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "factor effects alone give productivity stdev {:.4} above the target {prod_stdev}",
                sqrt(explained)
            )));
        }
        let profile = Self {
            n,
            prod_mean,
            prod_stdev,
            ucp_mean,
            ucp_stdev,
            coefficients,
            noise_stdev: sqrt(residual),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Industrial-style data: productivity 24.1 ± 5.1 h/UCP, UCP 739.3 ± 1563.9.
    pub fn ds1_like(n: usize) -> Self {
        Self::calibrated(n, 24.1, 5.1, 739.3, 1563.9, DEFAULT_COEFFICIENTS).expect("built-in profile is valid")
    }

    /// Student-style data: productivity 20.8 ± 4.8 h/UCP, UCP 82.6 ± 20.7.
    pub fn ds2_like(n: usize) -> Self {
        Self::calibrated(n, 20.8, 4.8, 82.6, 20.7, DEFAULT_COEFFICIENTS).expect("built-in profile is valid")
    }

    fn explained_variance(coefficients: &[f64; FACTOR_COUNT]) -> f64 {
        coefficients.iter().map(|c| c * c).sum::<f64>() * RATING_VARIANCE
    }

    /// Productivity standard deviation the generator produces before flooring.
    pub fn implied_prod_stdev(&self) -> f64 {
        sqrt(Self::explained_variance(&self.coefficients) + self.noise_stdev * self.noise_stdev)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        if self.n < 3 {
            return bad(format!("n must be at least 3, got {}", self.n));
        }
        if !(self.prod_mean > 0.0) || !self.prod_mean.is_finite() {
            return bad(format!("prod_mean must be positive, got {}", self.prod_mean));
        }
        if !(self.ucp_mean > 0.0) || !self.ucp_mean.is_finite() {
            return bad(format!("ucp_mean must be positive, got {}", self.ucp_mean));
        }
        for (name, v) in [
            ("prod_stdev", self.prod_stdev),
            ("ucp_stdev", self.ucp_stdev),
            ("noise_stdev", self.noise_stdev),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if let Some(j) = self.coefficients.iter().position(|c| !c.is_finite()) {
            return bad(format!("coef_{} is not finite", j + 1));
        }
        Ok(())
    }
}

/// Draws a synthetic dataset from `profile`. Deterministic in `seed`.
pub fn generate_synthetic(profile: &DatasetProfile, seed: u64) -> Result<Dataset> {
    profile.validate()?;
    let mut rng = rng::rng(seed);
    let ucp_dist = if profile.ucp_stdev > 0.0 {
        let ratio = profile.ucp_stdev / profile.ucp_mean;
        let sigma2 = log(1.0 + ratio * ratio);
        let mu = log(profile.ucp_mean) - 0.5 * sigma2;
        Some(LogNormal::new(mu, sqrt(sigma2)).map_err(|e| Error::InvalidProfile(format!("{e}")))?)
    } else {
        None
    };
    let mid = MAX_RATING / 2.0;
    let mut records = Vec::with_capacity(profile.n);
    for _ in 0..profile.n {
        let mut ratings = [0.0; FACTOR_COUNT];
        for r in &mut ratings {
            *r = rng.random_range(0.0..=MAX_RATING);
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let signal: f64 = profile.coefficients.iter().zip(&ratings).map(|(c, e)| c * (e - mid)).sum();
        let productivity = (profile.prod_mean + signal + profile.noise_stdev * z).max(PRODUCTIVITY_FLOOR);
        let ucp = match &ucp_dist {
            Some(d) => d.sample(&mut rng),
            None => profile.ucp_mean,
        };
        records.push(ProjectRecord::new(EnvFactors::new(ratings)?, ucp, productivity * ucp)?);
    }
    Ok(Dataset::new("synthetic", records))
}
