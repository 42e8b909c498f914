//! Spectral efficiency under the AQNM, the component-level receiver power
//! model, energy efficiency, and Pareto frontier extraction.

use num_complex::Complex64;

use crate::channel::MultiUserChannel;
use crate::combining::{chain_power_profile, AnalogCombiner};
use crate::error::{Error, Result};
use crate::quantizer::{aqnm_linearize, DistortionTable, Resolution};
use crate::CMatrix;

/// Receiver architecture label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchTag {
    Dbf,
    HbfOneStage,
    HbfTwoStage,
    HbfAdaptive,
}

impl ArchTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ArchTag::Dbf => "dbf",
            ArchTag::HbfOneStage => "hbf_one_stage",
            ArchTag::HbfTwoStage => "hbf_two_stage",
            ArchTag::HbfAdaptive => "hbf_adaptive",
        }
    }
}

impl std::fmt::Display for ArchTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Linear digital combiner applied after the ADCs.
///
/// `Zf` nulls inter-user interference with the plain pseudo-inverse of the
/// effective channel. `ZfWhitened` additionally whitens by the total noise
/// covariance (the minimum-noise left inverse), which makes SE monotone in
/// every single chain's resolution. `Mrc` matches the effective channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DigitalCombiner {
    #[default]
    Zf,
    ZfWhitened,
    Mrc,
}

/// Component power constants (milliwatts) and ADC scaling.
#[derive(Debug, Clone)]
pub struct PowerModel {
    pub p_lna_mw: f64,
    pub p_ps_mw: f64,
    pub p_mixer_mw: f64,
    pub p_lo_mw: f64,
    pub p_lpf_mw: f64,
    pub p_bbamp_mw: f64,
    /// ADC figure of merit in joules per conversion step.
    pub adc_fom_j: f64,
    pub sampling_rate_hz: f64,
    /// Charge the second-stage phase-shifter network (off: fixed shifters).
    pub second_stage_powered: bool,
    /// Remove mixer/LPF/amplifier power on zero-bit chains.
    pub power_off_zero_bit_chains: bool,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            p_lna_mw: 39.0,
            p_ps_mw: 2.0,
            p_mixer_mw: 16.8,
            p_lo_mw: 5.0,
            p_lpf_mw: 14.0,
            p_bbamp_mw: 5.0,
            adc_fom_j: 494e-15,
            sampling_rate_hz: 1e9,
            second_stage_powered: false,
            power_off_zero_bit_chains: true,
        }
    }
}

impl PowerModel {
    fn validate(&self) -> Result<()> {
        let comps = [
            self.p_lna_mw,
            self.p_ps_mw,
            self.p_mixer_mw,
            self.p_lo_mw,
            self.p_lpf_mw,
            self.p_bbamp_mw,
            self.adc_fom_j,
        ];
        if comps.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::invalid("component powers must be non-negative"));
        }
        if !(self.sampling_rate_hz > 0.0) {
            return Err(Error::invalid("sampling_rate must be positive"));
        }
        Ok(())
    }

    /// One ADC's power in milliwatts; a zero-bit ADC is off.
    pub fn adc_power_mw(&self, bits: u8) -> f64 {
        if bits == 0 {
            0.0
        } else {
            self.adc_fom_j * self.sampling_rate_hz * 2f64.powi(bits as i32) * 1e3
        }
    }
}

/// One (SE, power, EE) evaluation of an architecture configuration.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub se_bps_hz: f64,
    pub power_w: f64,
    pub ee_bits_per_j: f64,
    pub arch: ArchTag,
    pub n_rf: usize,
    pub bits_descriptor: String,
}

impl OperatingPoint {
    pub fn new(
        se_bps_hz: f64,
        power_w: f64,
        arch: ArchTag,
        n_rf: usize,
        bits_descriptor: impl Into<String>,
        model: &PowerModel,
    ) -> Result<Self> {
        let ee_bits_per_j = energy_efficiency(se_bps_hz, power_w, model)?;
        Ok(OperatingPoint {
            se_bps_hz,
            power_w,
            ee_bits_per_j,
            arch,
            n_rf,
            bits_descriptor: bits_descriptor.into(),
        })
    }
}

/// Sum spectral efficiency of the quantized uplink under the AQNM.
///
/// The analog output y = W^H(sqrt(rho) H x + n) passes the per-chain AQNM
/// z = A y + q; the chosen linear digital combiner then separates users, and
/// the result is sum_u log2(1 + SINR_u). All chains at zero bits give zero.
pub fn spectral_efficiency(
    channel: &MultiUserChannel,
    combiner: &AnalogCombiner,
    bits: &[Resolution],
    snr: f64,
    digital: DigitalCombiner,
    table: &DistortionTable,
) -> Result<f64> {
    let n_rf = combiner.n_chains();
    if bits.len() != n_rf {
        return Err(Error::invalid(format!(
            "bits length {} does not match chain count {n_rf}",
            bits.len()
        )));
    }
    let powers = chain_power_profile(combiner, channel, snr, true)?;
    let model = aqnm_linearize(bits, &powers, table)?;
    if model.alpha.iter().all(|&a| a == 0.0) {
        return Ok(0.0);
    }

    let n_u = channel.n_users();
    let effective = combiner.matrix.adjoint() * &channel.matrix; // N_RF x N_u
    let sqrt_rho = Complex64::new(snr.sqrt(), 0.0);
    let mut g = effective;
    for i in 0..n_rf {
        let a = Complex64::new(model.alpha[i], 0.0);
        for j in 0..n_u {
            g[(i, j)] *= a * sqrt_rho;
        }
    }

    // Total noise covariance: colored thermal A W^H W A plus diagonal
    // quantization noise.
    let wgram = combiner.matrix.adjoint() * &combiner.matrix;
    let mut noise_cov = CMatrix::zeros(n_rf, n_rf);
    for i in 0..n_rf {
        for j in 0..n_rf {
            noise_cov[(i, j)] = wgram[(i, j)] * model.alpha[i] * model.alpha[j];
        }
        noise_cov[(i, i)] += Complex64::new(model.quant_noise_var[i], 0.0);
    }

    // Chains at zero bits output nothing; drop them so the noise covariance
    // stays invertible.
    let active: Vec<usize> = (0..n_rf).filter(|&i| model.alpha[i] > 0.0).collect();
    let ga = g.select_rows(active.iter());
    let ca = noise_cov.select_rows(active.iter()).select_columns(active.iter());

    let receiver: CMatrix = match digital {
        DigitalCombiner::Mrc => ga.adjoint(),
        DigitalCombiner::Zf => ga
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::degenerate(format!("pseudo-inverse failed: {e}")))?,
        DigitalCombiner::ZfWhitened => {
            let ci = match ca.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => ca.clone().pseudo_inverse(1e-12).map_err(|e| {
                    Error::degenerate(format!("noise covariance inversion failed: {e}"))
                })?,
            };
            let m = ga.adjoint() * &ci * &ga;
            let m_inv = m
                .pseudo_inverse(1e-12)
                .map_err(|e| Error::degenerate(format!("pseudo-inverse failed: {e}")))?;
            m_inv * ga.adjoint() * ci
        }
    };

    let mixed = &receiver * &ga; // N_u x N_u
    let mut se = 0.0;
    for u in 0..n_u {
        let row = receiver.row(u);
        let signal = mixed[(u, u)].norm_sqr();
        let interference: f64 = (0..n_u)
            .filter(|&v| v != u)
            .map(|v| mixed[(u, v)].norm_sqr())
            .sum();
        let noise = (row * &ca * row.adjoint())[(0, 0)].re;
        let denom = interference + noise;
        if signal > 0.0 && denom > 0.0 {
            se += (1.0 + signal / denom).log2();
        }
    }
    Ok(se)
}

/// Receiver power in watts for one architecture configuration.
///
/// `bits` is per RF chain (per antenna for `Dbf`).
pub fn receiver_power(
    arch: ArchTag,
    n_rf: usize,
    bits: &[Resolution],
    model: &PowerModel,
    n_antennas: usize,
) -> Result<f64> {
    model.validate()?;
    if n_rf == 0 || n_antennas == 0 {
        return Err(Error::invalid("n_rf and n_antennas must be >= 1"));
    }
    let expected_len = if arch == ArchTag::Dbf { n_antennas } else { n_rf };
    if bits.len() != expected_len {
        return Err(Error::invalid(format!(
            "bits length {} does not match {} chains",
            bits.len(),
            expected_len
        )));
    }
    let int_bits: Vec<u8> = bits
        .iter()
        .map(|&r| match r {
            Resolution::Bits(b) => Ok(b),
            Resolution::Infinite => Err(Error::invalid(
                "infinite resolution has no ADC power; use a finite sweep",
            )),
        })
        .collect::<Result<_>>()?;

    let n_r = n_antennas as f64;
    let chain_mw = model.p_mixer_mw + model.p_lpf_mw + model.p_bbamp_mw;
    let adc_mw: f64 = int_bits.iter().map(|&b| 2.0 * model.adc_power_mw(b)).sum();

    let total_mw = match arch {
        ArchTag::Dbf => n_r * model.p_lna_mw + n_r * chain_mw + model.p_lo_mw + adc_mw,
        ArchTag::HbfOneStage | ArchTag::HbfTwoStage => {
            let mut mw = n_r * model.p_lna_mw
                + n_r * n_rf as f64 * model.p_ps_mw
                + n_rf as f64 * chain_mw
                + model.p_lo_mw
                + adc_mw;
            if arch == ArchTag::HbfTwoStage && model.second_stage_powered {
                mw += (n_rf * n_rf) as f64 * model.p_ps_mw;
            }
            mw
        }
        ArchTag::HbfAdaptive => {
            let active = if model.power_off_zero_bit_chains {
                int_bits.iter().filter(|&&b| b > 0).count()
            } else {
                n_rf
            };
            n_r * model.p_lna_mw
                + n_r * n_rf as f64 * model.p_ps_mw
                + active as f64 * chain_mw
                + model.p_lo_mw
                + adc_mw
        }
    };
    Ok(total_mw / 1e3)
}

/// Energy efficiency f_s * SE / P in bits per joule.
pub fn energy_efficiency(se: f64, power_w: f64, model: &PowerModel) -> Result<f64> {
    if !(power_w > 0.0) {
        return Err(Error::invalid(format!(
            "power must be positive, got {power_w}"
        )));
    }
    Ok(model.sampling_rate_hz * se / power_w)
}

/// Membership mask of the (SE, EE) Pareto-maximal set.
pub fn pareto_mask(points: &[OperatingPoint]) -> Vec<bool> {
    (0..points.len())
        .map(|i| {
            !points.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.se_bps_hz >= points[i].se_bps_hz
                    && other.ee_bits_per_j >= points[i].ee_bits_per_j
                    && (other.se_bps_hz > points[i].se_bps_hz
                        || other.ee_bits_per_j > points[i].ee_bits_per_j)
            })
        })
        .collect()
}

/// The Pareto-maximal points, in stable descending-SE order.
pub fn pareto_frontier(points: &[OperatingPoint]) -> Vec<OperatingPoint> {
    let mask = pareto_mask(points);
    let mut kept: Vec<OperatingPoint> = points
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| p.clone())
        .collect();
    kept.sort_by(|a, b| b.se_bps_hz.partial_cmp(&a.se_bps_hz).unwrap());
    kept
}
