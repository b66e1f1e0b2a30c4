//! Monte-Carlo evaluation over the AWGN channel.
//!
//! Noise is added independently to each of the `2N` real coordinates. By
//! default `SNR = P / sigma^2` with `sigma^2` the per-coordinate variance; the
//! [`NoiseConvention::Total`] option spreads `P / SNR` over all coordinates
//! instead.
//!
//! Sweeps are reproducible: samples are split into fixed-size blocks, block
//! `b` of SNR point `i` draws from a ChaCha8 stream selected by `(i, b)`, and
//! block sums are combined in block order. The result therefore does not
//! depend on how many threads run the blocks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::codec::TorusLayerCode;
use crate::error::{Error, Result};
use crate::geometry::AmbientPoint;

/// Samples per independently seeded block.
pub const BLOCK_SIZE: usize = 4096;

/// Decoded Gaussian values are clamped to this many companding scales.
const GAUSSIAN_CLAMP: f64 = 12.0;

/// How `SNR = P / sigma^2` assigns noise to coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseConvention {
    /// `sigma^2` is the variance of every real coordinate.
    #[default]
    PerDimension,
    /// `sigma^2` is the total noise power, split evenly over `2N` coordinates.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub sigma2: f64,
    pub power: f64,
}

impl ChannelConfig {
    pub fn new(sigma2: f64, power: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !(power > 0.0) || !sigma2.is_finite() || !power.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance and power must be positive, got {sigma2} and {power}"
            )));
        }
        Ok(Self { sigma2, power })
    }

    /// Channel at `snr_db` with the given convention, for a `2N`-dimensional
    /// signal; `sigma2` is always the per-coordinate variance.
    pub fn from_snr_db(snr_db: f64, power: f64, convention: NoiseConvention, dim: usize) -> Result<Self> {
        let snr = db_to_linear(snr_db);
        let sigma2 = match convention {
            NoiseConvention::PerDimension => power / snr,
            NoiseConvention::Total => power / (snr * dim as f64),
        };
        Self::new(sigma2, power)
    }

    pub fn snr(&self) -> f64 {
        self.power / self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Adds independent `N(0, sigma^2)` noise to every coordinate.
pub fn awgn<R: Rng + ?Sized>(point: &AmbientPoint, sigma: f64, rng: &mut R) -> AmbientPoint {
    if sigma == 0.0 {
        return point.clone();
    }
    AmbientPoint(
        point
            .as_slice()
            .iter()
            .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

/// Optimal companding map for a zero-mean Gaussian source of standard
/// deviation `sigma_s`: the normalized integral of `p^(1/3)`, which is the
/// normal cdf with scale `sigma_s sqrt(3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Compander {
    sigma_s: f64,
    scale: Normal,
    source: Normal,
}

impl Compander {
    pub fn new(sigma_s: f64) -> Result<Self> {
        if !(sigma_s > 0.0) || !sigma_s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "source deviation must be positive, got {sigma_s}"
            )));
        }
        let bad = |e| Error::InvalidArgument(format!("{e}"));
        Ok(Self {
            sigma_s,
            scale: Normal::new(0.0, sigma_s * 3f64.sqrt()).map_err(bad)?,
            source: Normal::new(0.0, sigma_s).map_err(bad)?,
        })
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn g(&self, x: f64) -> f64 {
        self.scale.cdf(x)
    }

    /// Inverse of [`Compander::g`], clamped to `12 sigma_s sqrt(3)`.
    pub fn g_inv(&self, z: f64) -> f64 {
        let limit = GAUSSIAN_CLAMP * self.sigma_s * 3f64.sqrt();
        if z <= 0.0 {
            return -limit;
        }
        if z >= 1.0 {
            return limit;
        }
        self.scale.inverse_cdf(z).clamp(-limit, limit)
    }

    /// Source quantile at cumulative mass `q`.
    pub fn source_quantile(&self, q: f64) -> f64 {
        self.source.inverse_cdf(q)
    }

    pub fn source_cdf(&self, x: f64) -> f64 {
        self.source.cdf(x)
    }

    /// `(integral of p^(1/3))^3 = 6 sqrt(3) pi sigma_s^2`.
    pub fn cube_integral(&self) -> f64 {
        6.0 * 3f64.sqrt() * std::f64::consts::PI * self.sigma_s * self.sigma_s
    }
}

pub fn companding(sigma_s: f64) -> Result<Compander> {
    Compander::new(sigma_s)
}

/// Splits the real line among the curves of `code` so that each piece carries
/// source mass `L_k / L`; returns the `M - 1` cut points.
pub fn gaussian_intervals(compander: &Compander, code: &TorusLayerCode) -> Vec<f64> {
    let mut mass = 0.0;
    (0..code.len().saturating_sub(1))
        .map(|k| {
            mass += code.curves()[k].length / code.total_length();
            compander.source_quantile(mass)
        })
        .collect()
}

/// Gaussian source pushed through the compander onto a code's curves.
#[derive(Debug, Clone)]
pub struct GaussianRoute {
    compander: Compander,
    cuts: Vec<f64>,
    bounds: Vec<f64>,
}

impl GaussianRoute {
    pub fn new(compander: Compander, code: &TorusLayerCode) -> Self {
        let cuts = gaussian_intervals(&compander, code);
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(0.0);
        bounds.extend(cuts.iter().map(|&x| compander.g(x)));
        bounds.push(1.0);
        Self {
            compander,
            cuts,
            bounds,
        }
    }

    pub fn compander(&self) -> &Compander {
        &self.compander
    }

    pub fn cut_points(&self) -> &[f64] {
        &self.cuts
    }

    /// Companded interval `[g(x_{k-1}), g(x_k))` of curve `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.bounds[k], self.bounds[k + 1])
    }

    pub fn encode(&self, code: &TorusLayerCode, x: f64) -> AmbientPoint {
        let z = self.compander.g(x);
        let k = (self.bounds[1..self.bounds.len() - 1].partition_point(|&b| b <= z)).min(code.len() - 1);
        let (lo, hi) = self.interval(k);
        let f = ((z - lo) / (hi - lo)).clamp(0.0, 1.0);
        code.encode_on_curve(k, f)
    }

    pub fn decode(&self, code: &TorusLayerCode, y: &AmbientPoint) -> Result<f64> {
        let (k, f) = code.decode_curve(y)?;
        let (lo, hi) = self.interval(k);
        Ok(self.compander.g_inv(lo + f * (hi - lo)))
    }

    /// Low-noise mean squared error in the source domain:
    /// `sigma^2 (int p^(1/3))^3 / (P alpha^2) * sum_k |I_k|^3 / L_k^2`.
    pub fn analytic_low_noise(&self, code: &TorusLayerCode, sigma2: f64) -> f64 {
        let sum: f64 = (0..code.len())
            .map(|k| {
                let (lo, hi) = self.interval(k);
                (hi - lo).powi(3) / code.curves()[k].length.powi(2)
            })
            .sum();
        sigma2 * self.compander.cube_integral() / (code.power() * code.alpha().powi(2)) * sum
    }
}

#[derive(Debug, Clone, Default)]
pub enum SourceModel {
    #[default]
    Uniform,
    Gaussian { sigma_s: f64 },
}

impl SourceModel {
    pub fn name(&self) -> String {
        match self {
            SourceModel::Uniform => "uniform".into(),
            SourceModel::Gaussian { sigma_s } => format!("gaussian(sigma_s={sigma_s})"),
        }
    }
}

/// Low-noise mse predicted for `source` on `code` at per-coordinate variance
/// `sigma2`.
pub fn analytic_low_noise(code: &TorusLayerCode, source: &SourceModel, sigma2: f64) -> Result<f64> {
    Ok(match source {
        SourceModel::Uniform => code.analytic_mse(sigma2).low_noise,
        SourceModel::Gaussian { sigma_s } => {
            GaussianRoute::new(Compander::new(*sigma_s)?, code).analytic_low_noise(code, sigma2)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub samples: usize,
    pub seed: u64,
    pub noise: NoiseConvention,
}

impl SweepOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            noise: NoiseConvention::PerDimension,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub snr_db: Vec<f64>,
    pub mse: Vec<f64>,
    /// Standard error of each mse estimate.
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub code_summary: String,
}

impl SimulationResult {
    /// CSV with `#` comment lines for `header` and the summary.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for line in header.iter().chain(std::iter::once(&self.code_summary)) {
            for l in line.lines() {
                let _ = writeln!(s, "# {l}");
            }
        }
        s.push_str("snr_db,mse,inv_mse,stderr,samples,seed\n");
        for i in 0..self.snr_db.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                sig12(self.snr_db[i]),
                sig12(self.mse[i]),
                sig12(1.0 / self.mse[i]),
                sig12(self.stderr[i]),
                self.samples,
                self.seed
            );
        }
        s
    }

    /// First SNR whose mse is within twice `analytic(snr_db)`.
    pub fn threshold_snr(&self, analytic: impl Fn(f64) -> f64) -> Option<f64> {
        self.snr_db
            .iter()
            .zip(&self.mse)
            .find(|(&snr, &mse)| mse <= 2.0 * analytic(snr))
            .map(|(&snr, _)| snr)
    }
}

/// Twelve significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.err += (self.sum - t) + x;
        } else {
            self.err += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    e2: Compensated,
    e4: Compensated,
    n: usize,
}

impl Moments {
    fn push(&mut self, sq: f64) {
        self.e2.add(sq);
        self.e4.add(sq * sq);
        self.n += 1;
    }

    fn merge(&mut self, other: &Moments) {
        self.e2.add(other.e2.value());
        self.e4.add(other.e4.value());
        self.n += other.n;
    }

    fn mse_and_stderr(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.e2.value() / n;
        let var = if self.n > 1 {
            ((self.e4.value() / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    }
}

fn block_rng(seed: u64, point: usize, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | block as u64);
    rng
}

/// Runs `samples` trials per SNR point with `trial(rng, sigma)` returning the
/// squared error of one trial.
fn sweep<F>(snr_db: &[f64], power: f64, dim: usize, opts: &SweepOptions, trial: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&mut ChaCha8Rng, f64) -> Result<f64> + Sync,
{
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let blocks = opts.samples.div_ceil(BLOCK_SIZE);
    let per_point: Vec<(f64, f64)> = snr_db
        .par_iter()
        .enumerate()
        .map(|(i, &db)| {
            let sigma = ChannelConfig::from_snr_db(db, power, opts.noise, dim)?.sigma();
            let parts: Vec<Moments> = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = block_rng(opts.seed, i, b);
                    let count = BLOCK_SIZE.min(opts.samples - b * BLOCK_SIZE);
                    let mut m = Moments::default();
                    for _ in 0..count {
                        m.push(trial(&mut rng, sigma)?);
                    }
                    Ok(m)
                })
                .collect::<Result<_>>()?;
            let mut total = Moments::default();
            for p in &parts {
                total.merge(p);
            }
            Ok(total.mse_and_stderr())
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().unzip())
}

/// Monte-Carlo mse of `code` against `source` at each SNR (dB).
pub fn run_sweep(
    code: &TorusLayerCode,
    source: &SourceModel,
    snr_db: &[f64],
    opts: &SweepOptions,
) -> Result<SimulationResult> {
    let dim = 2 * code.dim();
    let (mse, stderr) = match source {
        SourceModel::Uniform => sweep(snr_db, code.power(), dim, opts, |rng, sigma| {
            let x: f64 = rng.gen();
            let y = awgn(&code.encode(x)?, sigma, rng);
            let e = code.decode(&y)? - x;
            Ok(e * e)
        })?,
        SourceModel::Gaussian { sigma_s } => {
            let route = GaussianRoute::new(Compander::new(*sigma_s)?, code);
            sweep(snr_db, code.power(), dim, opts, |rng, sigma| {
                let x = sigma_s * rng.sample::<f64, _>(StandardNormal);
                let y = awgn(&route.encode(code, x), sigma, rng);
                let e = route.decode(code, &y)? - x;
                Ok(e * e)
            })?
        }
    };
    Ok(SimulationResult {
        snr_db: snr_db.to_vec(),
        mse,
        stderr,
        samples: opts.samples,
        seed: opts.seed,
        code_summary: format!("source = {}\n{}", source.name(), code.summary()),
    })
}

/// Linear modulation `s = sqrt(P) (2x - 1)` on one of `2N` coordinates, decoded
/// by clamping; uniform source.
pub fn linear_baseline(
    power: f64,
    n: usize,
    snr_db: &[f64],
    opts: &SweepOptions,
) -> Result<SimulationResult> {
    let amp = power.sqrt();
    let (mse, stderr) = sweep(snr_db, power, 2 * n, opts, |rng, sigma| {
        let x: f64 = rng.gen();
        let y = amp * (2.0 * x - 1.0) + sigma * rng.sample::<f64, _>(StandardNormal);
        let e = ((y / amp + 1.0) / 2.0).clamp(0.0, 1.0) - x;
        Ok(e * e)
    })?;
    Ok(SimulationResult {
        snr_db: snr_db.to_vec(),
        mse,
        stderr,
        samples: opts.samples,
        seed: opts.seed,
        code_summary: format!("linear modulation, power = {power}"),
    })
}
