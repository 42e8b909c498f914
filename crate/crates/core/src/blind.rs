//! Blind joint-symbol detection from quantized outputs: empirical likelihood
//! training, dithered training with Gaussian-CDF inversion, maximum-likelihood
//! detection, and weighted minimum-distance decoding.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;

use crate::channel::MultiUserChannel;
use crate::error::{Error, Result};
use crate::gauss;
use crate::rng::gaussian;
use crate::CVector;

/// Hard floor applied to stored likelihoods so log-sums stay finite.
const PROB_FLOOR: f64 = 1e-12;

/// Joint transmit alphabet over all users.
#[derive(Debug, Clone)]
pub struct SymbolCodebook {
    /// Per-user constellation, unit average energy.
    pub constellation: Vec<Complex64>,
    pub n_users: usize,
    /// All M^{N_u} user tuples, lexicographic with user 0 most significant.
    pub joint_symbols: Vec<CVector>,
}

impl SymbolCodebook {
    pub fn new(constellation: Vec<Complex64>, n_users: usize) -> Result<Self> {
        if constellation.is_empty() || n_users == 0 {
            return Err(Error::invalid("constellation and user count must be non-empty"));
        }
        if constellation.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("constellation points must be finite"));
        }
        let energy: f64 =
            constellation.iter().map(|c| c.norm_sqr()).sum::<f64>() / constellation.len() as f64;
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "constellation average energy must be 1, got {energy}"
            )));
        }
        let m = constellation.len();
        let k = m
            .checked_pow(n_users as u32)
            .filter(|&k| k <= 1 << 24)
            .ok_or_else(|| Error::unsupported("joint codebook too large"))?;
        let mut joint_symbols = Vec::with_capacity(k);
        for idx in 0..k {
            let mut digits = vec![0usize; n_users];
            let mut rem = idx;
            for u in (0..n_users).rev() {
                digits[u] = rem % m;
                rem /= m;
            }
            joint_symbols.push(CVector::from_fn(n_users, |u, _| constellation[digits[u]]));
        }
        Ok(SymbolCodebook { constellation, n_users, joint_symbols })
    }

    pub fn bpsk(n_users: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], n_users)
    }

    pub fn qpsk(n_users: usize) -> Result<Self> {
        let s = FRAC_1_SQRT_2;
        Self::new(
            vec![
                Complex64::new(s, s),
                Complex64::new(s, -s),
                Complex64::new(-s, s),
                Complex64::new(-s, -s),
            ],
            n_users,
        )
    }

    pub fn qam16(n_users: usize) -> Result<Self> {
        let scale = 1.0 / 10f64.sqrt();
        let axis = [-3.0, -1.0, 1.0, 3.0];
        let mut points = Vec::with_capacity(16);
        for re in axis {
            for im in axis {
                points.push(Complex64::new(re * scale, im * scale));
            }
        }
        Self::new(points, n_users)
    }

    pub fn num_joint(&self) -> usize {
        self.joint_symbols.len()
    }
}

/// Dither applied during training only.
#[derive(Debug, Clone, Copy)]
pub struct DitherConfig {
    /// Dither standard deviation per real dimension.
    pub sigma_d: f64,
    /// Invert the dithered statistics back to the undithered likelihood.
    pub invert: bool,
}

impl Default for DitherConfig {
    fn default() -> Self {
        DitherConfig { sigma_d: FRAC_1_SQRT_2, invert: true }
    }
}

/// Gaussian observation model: per-real-dimension noise-free means for each
/// joint symbol, with i.i.d. noise of one fixed sigma.
#[derive(Debug)]
pub struct ObservationModel {
    /// means[k][j]: noise-free value of real dimension j under joint symbol k.
    pub means: Vec<Vec<f64>>,
    pub noise_sigma: f64,
    draws: AtomicUsize,
}

impl ObservationModel {
    pub fn new(means: Vec<Vec<f64>>, noise_sigma: f64) -> Result<Self> {
        if means.is_empty() || means[0].is_empty() {
            return Err(Error::invalid("observation model needs symbols and dimensions"));
        }
        let n_dims = means[0].len();
        if means.iter().any(|m| m.len() != n_dims) {
            return Err(Error::invalid("per-symbol mean vectors differ in length"));
        }
        if !(noise_sigma > 0.0) || !noise_sigma.is_finite() {
            return Err(Error::invalid("noise sigma must be positive and finite"));
        }
        Ok(ObservationModel { means, noise_sigma, draws: AtomicUsize::new(0) })
    }

    /// Antenna-domain model y = sqrt(snr) H s_k + n with n ~ CN(0, I);
    /// dimensions interleave (Re, Im) per antenna, noise sigma 1/sqrt(2).
    pub fn from_channel(
        channel: &MultiUserChannel,
        codebook: &SymbolCodebook,
        snr: f64,
    ) -> Result<Self> {
        if codebook.n_users != channel.n_users() {
            return Err(Error::invalid(format!(
                "codebook has {} users, channel has {}",
                codebook.n_users,
                channel.n_users()
            )));
        }
        if !(snr > 0.0) {
            return Err(Error::invalid("snr must be positive (linear scale)"));
        }
        let sqrt_rho = Complex64::new(snr.sqrt(), 0.0);
        let n_r = channel.n_antennas();
        let means = codebook
            .joint_symbols
            .iter()
            .map(|s| {
                let y = &channel.matrix * s * sqrt_rho;
                let mut dims = Vec::with_capacity(2 * n_r);
                for i in 0..n_r {
                    dims.push(y[i].re);
                    dims.push(y[i].im);
                }
                dims
            })
            .collect();
        Self::new(means, FRAC_1_SQRT_2)
    }

    pub fn n_symbols(&self) -> usize {
        self.means.len()
    }

    pub fn n_dims(&self) -> usize {
        self.means[0].len()
    }

    /// Transmissions drawn so far (training plus payload).
    pub fn draw_count(&self) -> usize {
        self.draws.load(Ordering::Relaxed)
    }

    /// One one-bit observation of joint symbol k: bin 1 when the noisy
    /// (optionally dithered) value is non-negative.
    pub fn draw_one_bit<R: Rng>(&self, k: usize, sigma_d: f64, rng: &mut R) -> Vec<u32> {
        self.draws.fetch_add(1, Ordering::Relaxed);
        self.means[k]
            .iter()
            .map(|&mu| {
                let mut x = mu + gaussian(rng, self.noise_sigma);
                if sigma_d > 0.0 {
                    x += gaussian(rng, sigma_d);
                }
                u32::from(x >= 0.0)
            })
            .collect()
    }
}

/// Estimated P(bin | joint symbol) per real dimension.
#[derive(Debug, Clone)]
pub struct LikelihoodTable {
    pub n_dims: usize,
    pub n_symbols: usize,
    pub n_bins: usize,
    pub n_tr: usize,
    pub clamp_eps: f64,
    probs: Vec<f64>,
}

impl LikelihoodTable {
    fn idx(&self, dim: usize, symbol: usize, bin: usize) -> usize {
        (dim * self.n_symbols + symbol) * self.n_bins + bin
    }

    pub fn prob(&self, dim: usize, symbol: usize, bin: usize) -> f64 {
        self.probs[self.idx(dim, symbol, bin)]
    }

    /// Builds a table from explicit probabilities (dim-major, then symbol,
    /// then bin). Values must be positive; normalization is not enforced.
    pub fn from_probs(
        n_dims: usize,
        n_symbols: usize,
        n_bins: usize,
        probs: Vec<f64>,
        clamp_eps: f64,
    ) -> Result<Self> {
        if n_dims == 0 || n_symbols == 0 || n_bins < 2 {
            return Err(Error::invalid("table needs dims, symbols, and at least 2 bins"));
        }
        if probs.len() != n_dims * n_symbols * n_bins {
            return Err(Error::invalid(format!(
                "expected {} probabilities, got {}",
                n_dims * n_symbols * n_bins,
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("probabilities must be positive and finite"));
        }
        Ok(LikelihoodTable { n_dims, n_symbols, n_bins, n_tr: 0, clamp_eps, probs })
    }
}

fn validate_clamp(clamp_eps: f64) -> Result<f64> {
    if !(clamp_eps > 0.0 && clamp_eps < 0.5) {
        return Err(Error::invalid(format!(
            "clamp_eps must lie in (0, 1/2), got {clamp_eps}"
        )));
    }
    Ok(clamp_eps)
}

/// Counts bin frequencies per (dimension, symbol), clamps each probability to
/// [eps, 1 - eps], and renormalizes. `observations[k]` holds the N_tr
/// quantized vectors seen while symbol k was transmitted; `clamp_eps`
/// defaults to 1/(2 N_tr).
pub fn train_empirical(
    observations: &[Vec<Vec<u32>>],
    codebook: &SymbolCodebook,
    n_bins: usize,
    clamp_eps: Option<f64>,
) -> Result<LikelihoodTable> {
    let n_symbols = codebook.num_joint();
    if observations.len() != n_symbols {
        return Err(Error::invalid(format!(
            "expected observations for {n_symbols} joint symbols, got {}",
            observations.len()
        )));
    }
    if n_bins < 2 {
        return Err(Error::invalid("need at least 2 quantizer bins"));
    }
    let n_tr = observations[0].len();
    if n_tr == 0 {
        return Err(Error::invalid("need at least one training repetition"));
    }
    if observations.iter().any(|per_symbol| per_symbol.len() != n_tr) {
        return Err(Error::invalid("every joint symbol needs the same N_tr"));
    }
    let n_dims = observations[0][0].len();
    if n_dims == 0 {
        return Err(Error::invalid("observations must have at least one dimension"));
    }
    let eps = validate_clamp(clamp_eps.unwrap_or(0.5 / n_tr as f64))?;

    let mut probs = vec![0.0; n_dims * n_symbols * n_bins];
    for (k, per_symbol) in observations.iter().enumerate() {
        for obs in per_symbol {
            if obs.len() != n_dims {
                return Err(Error::invalid(format!(
                    "observation length {} does not match {n_dims} dimensions",
                    obs.len()
                )));
            }
            for (j, &bin) in obs.iter().enumerate() {
                if bin as usize >= n_bins {
                    return Err(Error::invalid(format!(
                        "bin {bin} outside the {n_bins}-bin quantizer range"
                    )));
                }
                probs[(j * n_symbols + k) * n_bins + bin as usize] += 1.0;
            }
        }
    }
    for jk in 0..n_dims * n_symbols {
        let cell = &mut probs[jk * n_bins..(jk + 1) * n_bins];
        let mut total = 0.0;
        for p in cell.iter_mut() {
            *p = (*p / n_tr as f64).clamp(eps, 1.0 - eps);
            total += *p;
        }
        for p in cell.iter_mut() {
            *p /= total;
        }
    }
    Ok(LikelihoodTable { n_dims, n_symbols, n_bins, n_tr, clamp_eps: eps, probs })
}

/// One-bit training with additive Gaussian dither. With `invert` set, the
/// dithered hit rate p_d is clamped to [1/(2 N_tr), 1 - 1/(2 N_tr)] and
/// inverted through the widened Gaussian CDF: mu = sqrt(sigma_n^2 +
/// sigma_d^2) * Phi^{-1}(p_d), stored likelihood Phi(mu / sigma_n). Without
/// inversion the dithered counts are used as-is, like `train_empirical`.
pub fn train_dithered<R: Rng>(
    model: &ObservationModel,
    codebook: &SymbolCodebook,
    n_tr: usize,
    dither: &DitherConfig,
    rng: &mut R,
) -> Result<LikelihoodTable> {
    if codebook.num_joint() != model.n_symbols() {
        return Err(Error::invalid(format!(
            "codebook has {} joint symbols, model has {}",
            codebook.num_joint(),
            model.n_symbols()
        )));
    }
    if n_tr == 0 {
        return Err(Error::invalid("need at least one training repetition"));
    }
    if !(dither.sigma_d >= 0.0) || !dither.sigma_d.is_finite() {
        return Err(Error::invalid("sigma_d must be finite and non-negative"));
    }
    if dither.invert && dither.sigma_d == 0.0 {
        return Err(Error::invalid("inversion requires sigma_d > 0"));
    }

    let n_symbols = model.n_symbols();
    let n_dims = model.n_dims();
    let mut hit = vec![0.0f64; n_dims * n_symbols];
    for k in 0..n_symbols {
        for _ in 0..n_tr {
            let obs = model.draw_one_bit(k, dither.sigma_d, rng);
            for (j, &bin) in obs.iter().enumerate() {
                hit[j * n_symbols + k] += f64::from(bin);
            }
        }
    }

    let count_eps = 0.5 / n_tr as f64;
    let mut probs = vec![0.0; n_dims * n_symbols * 2];
    if dither.invert {
        let widened = (model.noise_sigma.powi(2) + dither.sigma_d.powi(2)).sqrt();
        for (jk, h) in hit.iter().enumerate() {
            let p_d = (h / n_tr as f64).clamp(count_eps, 1.0 - count_eps);
            let mu = widened * gauss::quantile(p_d);
            let p1 = gauss::cdf(mu / model.noise_sigma).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            probs[jk * 2] = 1.0 - p1;
            probs[jk * 2 + 1] = p1;
        }
        Ok(LikelihoodTable {
            n_dims,
            n_symbols,
            n_bins: 2,
            n_tr,
            clamp_eps: PROB_FLOOR,
            probs,
        })
    } else {
        for (jk, h) in hit.iter().enumerate() {
            let p1 = (h / n_tr as f64).clamp(count_eps, 1.0 - count_eps);
            probs[jk * 2] = 1.0 - p1;
            probs[jk * 2 + 1] = p1;
        }
        Ok(LikelihoodTable {
            n_dims,
            n_symbols,
            n_bins: 2,
            n_tr,
            clamp_eps: count_eps,
            probs,
        })
    }
}

/// Exact one-bit likelihoods for a Gaussian observation model.
pub fn true_table(model: &ObservationModel) -> Result<LikelihoodTable> {
    let n_symbols = model.n_symbols();
    let n_dims = model.n_dims();
    let mut probs = vec![0.0; n_dims * n_symbols * 2];
    for (k, means) in model.means.iter().enumerate() {
        for (j, &mu) in means.iter().enumerate() {
            let p1 = gauss::cdf(mu / model.noise_sigma).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            probs[(j * n_symbols + k) * 2] = 1.0 - p1;
            probs[(j * n_symbols + k) * 2 + 1] = p1;
        }
    }
    LikelihoodTable::from_probs(n_dims, n_symbols, 2, probs, PROB_FLOOR)
}

/// Maximum-likelihood joint-symbol detection; ties go to the lowest index.
pub fn detect_ml(observation: &[u32], table: &LikelihoodTable) -> Result<usize> {
    if observation.len() != table.n_dims {
        return Err(Error::invalid(format!(
            "observation has {} dimensions, table has {}",
            observation.len(),
            table.n_dims
        )));
    }
    for &bin in observation {
        if bin as usize >= table.n_bins {
            return Err(Error::invalid(format!(
                "bin {bin} outside the {}-bin quantizer range",
                table.n_bins
            )));
        }
    }
    let mut best_k = 0;
    let mut best_score = f64::NEG_INFINITY;
    for k in 0..table.n_symbols {
        let score: f64 = observation
            .iter()
            .enumerate()
            .map(|(j, &bin)| table.prob(j, k, bin as usize).ln())
            .sum();
        if score > best_score {
            best_score = score;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// Hard codewords and log-odds weights distilled from a one-bit table.
#[derive(Debug, Clone)]
pub struct WmdDecoder {
    /// codewords[k][j]: most likely bin of dimension j under symbol k.
    pub codewords: Vec<Vec<u32>>,
    /// weights[k][j] = log((1 - eps) / eps) for flip probability eps.
    pub weights: Vec<Vec<f64>>,
}

impl WmdDecoder {
    pub fn n_dims(&self) -> usize {
        self.codewords.first().map_or(0, |c| c.len())
    }
}

/// Reduces a one-bit likelihood table to weighted-minimum-distance form.
pub fn build_wmd(table: &LikelihoodTable) -> Result<WmdDecoder> {
    if table.n_bins != 2 {
        return Err(Error::unsupported(format!(
            "weighted minimum distance needs one-bit tables, got {} bins",
            table.n_bins
        )));
    }
    let mut codewords = vec![vec![0u32; table.n_dims]; table.n_symbols];
    let mut weights = vec![vec![0.0f64; table.n_dims]; table.n_symbols];
    for k in 0..table.n_symbols {
        for j in 0..table.n_dims {
            let p1 = table.prob(j, k, 1);
            let c = u32::from(p1 > 0.5);
            let eps = 1.0 - table.prob(j, k, c as usize);
            codewords[k][j] = c;
            weights[k][j] = ((1.0 - eps) / eps).ln();
        }
    }
    Ok(WmdDecoder { codewords, weights })
}

/// Weighted minimum-distance detection; ties go to the lowest index.
pub fn detect_wmd(observation: &[u32], decoder: &WmdDecoder) -> Result<usize> {
    if decoder.codewords.is_empty() {
        return Err(Error::invalid("decoder has no codewords"));
    }
    if observation.len() != decoder.n_dims() {
        return Err(Error::invalid(format!(
            "observation has {} dimensions, decoder has {}",
            observation.len(),
            decoder.n_dims()
        )));
    }
    let mut best_k = 0;
    let mut best_dist = f64::INFINITY;
    for (k, (code, w)) in decoder.codewords.iter().zip(&decoder.weights).enumerate() {
        let dist: f64 = observation
            .iter()
            .zip(code.iter().zip(w))
            .map(|(&o, (&c, &wt))| if o != c { wt } else { 0.0 })
            .sum();
        if dist < best_dist {
            best_dist = dist;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// Monte Carlo symbol error rate of a detector over fresh one-bit payload
/// transmissions with uniformly drawn joint symbols.
pub fn evaluate_ser<D, R>(
    mut detector: D,
    model: &ObservationModel,
    num_trials: usize,
    rng: &mut R,
) -> Result<f64>
where
    D: FnMut(&[u32]) -> Result<usize>,
    R: Rng,
{
    if num_trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let k_total = model.n_symbols();
    let mut errors = 0usize;
    for _ in 0..num_trials {
        let k = rng.gen_range(0..k_total);
        let obs = model.draw_one_bit(k, 0.0, rng);
        if detector(&obs)? != k {
            errors += 1;
        }
    }
    Ok(errors as f64 / num_trials as f64)
}
