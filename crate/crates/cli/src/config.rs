//! Declarative experiment configuration: TOML parsing, defaults, validation,
//! and the canonical serialization that feeds the run hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quantlink_core::quantizer::QuantizerKind;

use crate::error::{CliError, CliResult};

/// Highest quantizer resolution the distortion tables cover.
pub const MAX_BITS: u8 = 12;

/// Which study the runner executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Rank-ordered per-chain analog output power, one-stage vs two-stage.
    Sigpow,
    /// Total quantization error vs resolution for fixed and adaptive ADCs.
    Msqe,
    /// Distribution of allocated ADC resolutions at each bit budget.
    BitallocHist,
    /// Spectral/energy-efficiency operating points for four architectures.
    SeEe,
    /// Blind-detection symbol error rate vs training length and method.
    BlindSer,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Sigpow => "sigpow",
            ExperimentKind::Msqe => "msqe",
            ExperimentKind::BitallocHist => "bitalloc_hist",
            ExperimentKind::SeEe => "se_ee",
            ExperimentKind::BlindSer => "blind_ser",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
    Qam16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondStageCfg {
    Dft,
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerCfg {
    LloydMax,
    Uniform,
}

impl QuantizerCfg {
    pub fn kind(self) -> QuantizerKind {
        match self {
            QuantizerCfg::LloydMax => QuantizerKind::LloydMax,
            QuantizerCfg::Uniform => QuantizerKind::UniformMidrise,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "d_n_antennas")]
    pub n_antennas: usize,
    #[serde(default = "d_n_rf_list")]
    pub n_rf_list: Vec<usize>,
    #[serde(default = "d_n_users")]
    pub n_users: usize,
    #[serde(default = "d_avg_paths")]
    pub avg_paths: f64,
    #[serde(default = "d_snr_db")]
    pub snr_db: f64,
    /// Antenna spacing in wavelengths.
    #[serde(default = "d_spacing")]
    pub spacing: f64,
    #[serde(default = "d_constellation")]
    pub constellation: ConstellationKind,
    #[serde(default = "d_second_stage")]
    pub second_stage: SecondStageCfg,
}

fn d_n_antennas() -> usize {
    128
}
fn d_n_rf_list() -> Vec<usize> {
    vec![16]
}
fn d_n_users() -> usize {
    4
}
fn d_avg_paths() -> f64 {
    2.0
}
fn d_snr_db() -> f64 {
    10.0
}
fn d_spacing() -> f64 {
    0.5
}
fn d_constellation() -> ConstellationKind {
    ConstellationKind::Qpsk
}
fn d_second_stage() -> SecondStageCfg {
    SecondStageCfg::Dft
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_antennas: d_n_antennas(),
            n_rf_list: d_n_rf_list(),
            n_users: d_n_users(),
            avg_paths: d_avg_paths(),
            snr_db: d_snr_db(),
            spacing: d_spacing(),
            constellation: d_constellation(),
            second_stage: d_second_stage(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizationConfig {
    /// Uniform per-chain resolutions swept by se_ee (doubles as the adaptive
    /// budget per chain there).
    #[serde(default = "d_bits_list")]
    pub bits_list: Vec<u8>,
    /// Average-bits budgets swept by msqe and bitalloc_hist.
    #[serde(default = "d_b_bar_list")]
    pub b_bar_list: Vec<u8>,
    /// Cap on any single allocated resolution.
    #[serde(default = "d_b_max")]
    pub b_max: u8,
    #[serde(default = "d_quantizer")]
    pub quantizer: QuantizerCfg,
}

fn d_bits_list() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}
fn d_b_bar_list() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}
fn d_b_max() -> u8 {
    MAX_BITS
}
fn d_quantizer() -> QuantizerCfg {
    QuantizerCfg::LloydMax
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig {
            bits_list: d_bits_list(),
            b_bar_list: d_b_bar_list(),
            b_max: d_b_max(),
            quantizer: d_quantizer(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(default = "d_p_lna_mw")]
    pub p_lna_mw: f64,
    #[serde(default = "d_p_ps_mw")]
    pub p_ps_mw: f64,
    #[serde(default = "d_p_mixer_mw")]
    pub p_mixer_mw: f64,
    #[serde(default = "d_p_lo_mw")]
    pub p_lo_mw: f64,
    #[serde(default = "d_p_lpf_mw")]
    pub p_lpf_mw: f64,
    #[serde(default = "d_p_bbamp_mw")]
    pub p_bbamp_mw: f64,
    /// ADC figure of merit in joules per conversion step.
    #[serde(default = "d_adc_fom_j")]
    pub adc_fom_j: f64,
    #[serde(default = "d_sampling_rate_hz")]
    pub sampling_rate_hz: f64,
    #[serde(default)]
    pub second_stage_powered: bool,
    #[serde(default = "d_true")]
    pub power_off_zero_bit_chains: bool,
}

fn d_p_lna_mw() -> f64 {
    39.0
}
fn d_p_ps_mw() -> f64 {
    2.0
}
fn d_p_mixer_mw() -> f64 {
    16.8
}
fn d_p_lo_mw() -> f64 {
    5.0
}
fn d_p_lpf_mw() -> f64 {
    14.0
}
fn d_p_bbamp_mw() -> f64 {
    5.0
}
fn d_adc_fom_j() -> f64 {
    494e-15
}
fn d_sampling_rate_hz() -> f64 {
    1e9
}
fn d_true() -> bool {
    true
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_lna_mw: d_p_lna_mw(),
            p_ps_mw: d_p_ps_mw(),
            p_mixer_mw: d_p_mixer_mw(),
            p_lo_mw: d_p_lo_mw(),
            p_lpf_mw: d_p_lpf_mw(),
            p_bbamp_mw: d_p_bbamp_mw(),
            adc_fom_j: d_adc_fom_j(),
            sampling_rate_hz: d_sampling_rate_hz(),
            second_stage_powered: false,
            power_off_zero_bit_chains: d_true(),
        }
    }
}

impl PowerConfig {
    pub fn model(&self) -> quantlink_core::PowerModel {
        quantlink_core::PowerModel {
            p_lna_mw: self.p_lna_mw,
            p_ps_mw: self.p_ps_mw,
            p_mixer_mw: self.p_mixer_mw,
            p_lo_mw: self.p_lo_mw,
            p_lpf_mw: self.p_lpf_mw,
            p_bbamp_mw: self.p_bbamp_mw,
            adc_fom_j: self.adc_fom_j,
            sampling_rate_hz: self.sampling_rate_hz,
            second_stage_powered: self.second_stage_powered,
            power_off_zero_bit_chains: self.power_off_zero_bit_chains,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlindConfig {
    /// Training repetitions per joint symbol, one sweep point each.
    #[serde(default = "d_n_tr_list")]
    pub n_tr_list: Vec<usize>,
    /// Payload transmissions per trial when measuring SER.
    #[serde(default = "d_n_eval")]
    pub n_eval: usize,
    /// Training dither standard deviation per real dimension.
    #[serde(default = "d_dither_sigma")]
    pub dither_sigma: f64,
}

fn d_n_tr_list() -> Vec<usize> {
    vec![20, 100, 1000]
}
fn d_n_eval() -> usize {
    2000
}
fn d_dither_sigma() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

impl Default for BlindConfig {
    fn default() -> Self {
        BlindConfig {
            n_tr_list: d_n_tr_list(),
            n_eval: d_n_eval(),
            dither_sigma: d_dither_sigma(),
        }
    }
}

/// One fully resolved run description. Field order is the canonical
/// serialization order used for hashing and --print-defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_schema_version")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "d_trials")]
    pub trials: u64,
    /// Non-negative; TOML's integer type bounds it to 0..=i64::MAX.
    #[serde(default = "d_seed")]
    pub seed: i64,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub quantization: QuantizationConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub blind: BlindConfig,
}

fn d_schema_version() -> u32 {
    1
}
fn d_trials() -> u64 {
    100
}
fn d_seed() -> i64 {
    1
}

impl ExperimentConfig {
    pub fn with_defaults(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            schema_version: d_schema_version(),
            experiment,
            trials: d_trials(),
            seed: d_seed(),
            system: SystemConfig::default(),
            quantization: QuantizationConfig::default(),
            power: PowerConfig::default(),
            blind: BlindConfig::default(),
        }
    }

    pub fn seed_u64(&self) -> u64 {
        self.seed as u64
    }
}

/// Parse without validating; callers that apply CLI overrides validate after.
pub fn parse_toml(text: &str) -> CliResult<ExperimentConfig> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config parse error: {e}")))
}

pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let cfg = parse_toml(text)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn fail(msg: String) -> CliResult<()> {
    Err(CliError::Validation(msg))
}

pub fn validate(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.schema_version != 1 {
        return fail(format!("schema_version must be 1, got {}", cfg.schema_version));
    }
    if cfg.trials == 0 {
        return fail("trials must be >= 1, got 0".into());
    }
    if cfg.seed < 0 {
        return fail(format!("seed must be non-negative, got {}", cfg.seed));
    }

    let s = &cfg.system;
    if s.n_antennas == 0 {
        return fail("system.n_antennas must be >= 1".into());
    }
    if s.n_users == 0 {
        return fail("system.n_users must be >= 1".into());
    }
    if s.n_rf_list.is_empty() {
        return fail("system.n_rf_list must be non-empty".into());
    }
    if s.n_rf_list.iter().any(|&n| n == 0) {
        return fail("system.n_rf_list entries must be >= 1".into());
    }
    if !(s.avg_paths > 0.0) || !s.avg_paths.is_finite() {
        return fail(format!("system.avg_paths must be positive and finite, got {}", s.avg_paths));
    }
    if !s.snr_db.is_finite() {
        return fail(format!("system.snr_db must be finite, got {}", s.snr_db));
    }
    if !(s.spacing > 0.0) || !s.spacing.is_finite() {
        return fail(format!("system.spacing must be positive and finite, got {}", s.spacing));
    }

    let q = &cfg.quantization;
    if q.bits_list.is_empty() {
        return fail("quantization.bits_list must be non-empty".into());
    }
    if q.b_bar_list.is_empty() {
        return fail("quantization.b_bar_list must be non-empty".into());
    }
    if !(1..=MAX_BITS).contains(&q.b_max) {
        return fail(format!("quantization.b_max must lie in 1..={MAX_BITS}, got {}", q.b_max));
    }
    if let Some(&b) = q.bits_list.iter().find(|&&b| b > MAX_BITS) {
        return fail(format!("quantization.bits_list entry {b} exceeds {MAX_BITS}"));
    }
    if let Some(&b) = q.b_bar_list.iter().find(|&&b| b > MAX_BITS) {
        return fail(format!("quantization.b_bar_list entry {b} exceeds {MAX_BITS}"));
    }

    let p = &cfg.power;
    for (key, value) in [
        ("power.p_lna_mw", p.p_lna_mw),
        ("power.p_ps_mw", p.p_ps_mw),
        ("power.p_mixer_mw", p.p_mixer_mw),
        ("power.p_lo_mw", p.p_lo_mw),
        ("power.p_lpf_mw", p.p_lpf_mw),
        ("power.p_bbamp_mw", p.p_bbamp_mw),
        ("power.adc_fom_j", p.adc_fom_j),
    ] {
        if !(value >= 0.0) || !value.is_finite() {
            return fail(format!("{key} must be non-negative and finite, got {value}"));
        }
    }
    if !(p.sampling_rate_hz > 0.0) || !p.sampling_rate_hz.is_finite() {
        return fail(format!(
            "power.sampling_rate_hz must be positive and finite, got {}",
            p.sampling_rate_hz
        ));
    }

    let b = &cfg.blind;
    if b.n_tr_list.is_empty() {
        return fail("blind.n_tr_list must be non-empty".into());
    }
    if b.n_tr_list.iter().any(|&n| n == 0) {
        return fail("blind.n_tr_list entries must be >= 1".into());
    }
    if b.n_eval == 0 {
        return fail("blind.n_eval must be >= 1".into());
    }
    if !(b.dither_sigma > 0.0) || !b.dither_sigma.is_finite() {
        return fail(format!(
            "blind.dither_sigma must be positive and finite, got {}",
            b.dither_sigma
        ));
    }
    if cfg.experiment == ExperimentKind::BlindSer {
        let m: u32 = match s.constellation {
            ConstellationKind::Bpsk => 2,
            ConstellationKind::Qpsk => 4,
            ConstellationKind::Qam16 => 16,
        };
        let joint = (m as f64).powi(s.n_users as i32);
        if joint > (1u64 << 20) as f64 {
            return fail(format!(
                "blind detection needs constellation_size^n_users <= 2^20, got {m}^{}",
                s.n_users
            ));
        }
    }
    Ok(())
}

/// Canonical TOML rendering of a resolved config; stable across runs.
pub fn canonical_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string_pretty(cfg).expect("resolved config serializes")
}

/// First 12 hex digits of the SHA-256 of the canonical rendering.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(canonical_toml(cfg).as_bytes());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn default_config_text() -> String {
    let mut text = String::from(
        "# Default configuration; `experiment` selects one of:\n\
         # sigpow, msqe, bitalloc_hist, se_ee, blind_ser.\n",
    );
    text.push_str(&canonical_toml(&ExperimentConfig::with_defaults(ExperimentKind::SeEe)));
    text
}
