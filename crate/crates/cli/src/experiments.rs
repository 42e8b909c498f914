//! The five Monte Carlo studies behind the emitted figures.
//!
//! Every experiment runs its trials in parallel on a local thread pool,
//! draws randomness from per-trial streams, and merges results in trial
//! order, so one (config, seed) pair maps to one byte sequence regardless
//! of the parallelism degree. Sweep combinations that cannot be built
//! (e.g. a Hadamard second stage at a non-power-of-two chain count) turn
//! into rows whose skip_reason column names the obstacle.

use rayon::prelude::*;

use quantlink_core::{
    bit_alloc::{
        aggregated_gains, allocate_real, allocation_msqe, round_allocation, BitAllocation,
        PowerBudget,
    },
    blind::{
        build_wmd, detect_ml, detect_wmd, evaluate_ser, train_dithered, true_table,
        ObservationModel,
    },
    channel::{draw_channel, snr_db_to_linear, ArrayGeometry, ChannelEnsembleConfig},
    combining::{
        chain_power_profile, compose_two_stage, second_stage, select_beams, AnalogCombiner,
        SecondStageKind, StageTag,
    },
    metrics::{pareto_mask, receiver_power, spectral_efficiency, OperatingPoint},
    quantizer::DistortionTable,
    rng::trial_rng,
    ArchTag, CMatrix, DigitalCombiner, DitherConfig, Resolution, SymbolCodebook,
};

use crate::config::{
    config_hash, ConstellationKind, ExperimentConfig, ExperimentKind, SecondStageCfg,
};
use crate::error::{CliError, CliResult};
use crate::table::{fmt_f64, ResultTable, RunMetadata};

pub const SIGPOW_HEADER: &[&str] = &["arch", "n_rf", "chain", "power", "skip_reason"];
pub const MSQE_HEADER: &[&str] = &["arch", "n_rf", "b", "msqe", "skip_reason"];
pub const BITALLOC_HEADER: &[&str] = &["n_rf", "b_bar", "bits", "fraction", "skip_reason"];
pub const SE_EE_HEADER: &[&str] =
    &["arch", "n_rf", "bits", "se_bps_hz", "power_w", "ee_bits_per_j", "pareto", "skip_reason"];
pub const BLIND_HEADER: &[&str] = &["n_tr", "method", "ser", "skip_reason"];

pub fn header_for(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Sigpow => SIGPOW_HEADER,
        ExperimentKind::Msqe => MSQE_HEADER,
        ExperimentKind::BitallocHist => BITALLOC_HEADER,
        ExperimentKind::SeEe => SE_EE_HEADER,
        ExperimentKind::BlindSer => BLIND_HEADER,
    }
}

/// Parallelism cap from QUANTLINK_THREADS; 0 or unset means automatic.
pub fn threads_from_env() -> CliResult<usize> {
    match std::env::var("QUANTLINK_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::Validation(format!(
                "QUANTLINK_THREADS must be a non-negative integer, got {v:?}"
            ))
        }),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    run_experiment_with_threads(cfg, threads_from_env()?)
}

pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> CliResult<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let rows = pool.install(|| match cfg.experiment {
        ExperimentKind::Sigpow => run_sigpow(cfg),
        ExperimentKind::Msqe => run_msqe(cfg),
        ExperimentKind::BitallocHist => run_bitalloc_hist(cfg),
        ExperimentKind::SeEe => run_se_ee(cfg),
        ExperimentKind::BlindSer => run_blind_ser(cfg),
    })?;
    Ok(ResultTable {
        header: header_for(cfg.experiment),
        rows,
        meta: RunMetadata {
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            trials: cfg.trials,
        },
    })
}

// ---- shared scaffolding ----

struct Scene {
    ensemble: ChannelEnsembleConfig,
    rho: f64,
    table: &'static DistortionTable,
    n_antennas: usize,
}

fn scene(cfg: &ExperimentConfig) -> Scene {
    Scene {
        ensemble: ChannelEnsembleConfig {
            geometry: ArrayGeometry {
                n_antennas: cfg.system.n_antennas,
                spacing: cfg.system.spacing,
            },
            n_users: cfg.system.n_users,
            avg_paths: cfg.system.avg_paths,
        },
        rho: snr_db_to_linear(cfg.system.snr_db),
        table: DistortionTable::for_kind(cfg.quantization.quantizer.kind()),
        n_antennas: cfg.system.n_antennas,
    }
}

fn stage_kind(cfg: SecondStageCfg) -> SecondStageKind {
    match cfg {
        SecondStageCfg::Dft => SecondStageKind::Dft,
        SecondStageCfg::Hadamard => SecondStageKind::Hadamard,
    }
}

/// Channel-independent feasibility of beam selection at one chain count.
fn one_stage_feasible(n_rf: usize, n_antennas: usize) -> Result<(), String> {
    if n_rf > n_antennas {
        Err(format!("n_rf {n_rf} exceeds n_antennas {n_antennas}"))
    } else {
        Ok(())
    }
}

/// One sweep point of the chain-count list with its prebuilt second stage.
struct RfCombo {
    n_rf: usize,
    one: Result<(), String>,
    second: Result<AnalogCombiner, String>,
}

fn rf_combos(cfg: &ExperimentConfig) -> Vec<RfCombo> {
    let kind = stage_kind(cfg.system.second_stage);
    cfg.system
        .n_rf_list
        .iter()
        .map(|&n_rf| {
            let one = one_stage_feasible(n_rf, cfg.system.n_antennas);
            let second = match &one {
                Err(reason) => Err(reason.clone()),
                Ok(()) => second_stage(n_rf, kind).map_err(|e| e.to_string()),
            };
            RfCombo { n_rf, one, second }
        })
        .collect()
}

fn uniform_allocation(bits: u8, n_rf: usize) -> BitAllocation {
    BitAllocation {
        real_bits: vec![bits as f64; n_rf],
        int_bits: vec![bits; n_rf],
        active_mask: vec![bits > 0; n_rf],
    }
}

fn adaptive_allocation(
    gains: &[f64],
    b_bar: u8,
    n_rf: usize,
    b_max: u8,
) -> CliResult<BitAllocation> {
    let budget = PowerBudget::new(b_bar, n_rf)?;
    let real = allocate_real(gains, &budget)?;
    Ok(round_allocation(&real, &budget, b_max))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn par_trials<T: Send, F>(trials: u64, f: F) -> CliResult<Vec<T>>
where
    F: Fn(u64) -> CliResult<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

fn skip_row(prefix: &[String], reason: &str, width: usize) -> Vec<String> {
    let mut row = prefix.to_vec();
    while row.len() < width - 1 {
        row.push(String::new());
    }
    row.push(reason.to_string());
    row
}

// ---- sigpow: rank-ordered per-chain analog output power ----

fn run_sigpow(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<String>>> {
    let sc = scene(cfg);
    let combos = rf_combos(cfg);
    let trials = cfg.trials;

    type TrialOut = Vec<(Option<Vec<f64>>, Option<Vec<f64>>)>;
    let outs: Vec<TrialOut> = par_trials(trials, |t| {
        let mut rng = trial_rng(cfg.seed_u64(), t);
        let ch = draw_channel(sc.ensemble, &mut rng);
        combos
            .iter()
            .map(|c| {
                if c.one.is_err() {
                    return Ok((None, None));
                }
                let w1 = select_beams(&ch, c.n_rf)?;
                let p1 = sorted_desc(chain_power_profile(&w1, &ch, sc.rho, true)?);
                let p2 = match &c.second {
                    Err(_) => None,
                    Ok(v) => {
                        let w2 = compose_two_stage(&w1, v)?;
                        Some(sorted_desc(chain_power_profile(&w2, &ch, sc.rho, true)?))
                    }
                };
                Ok((Some(p1), p2))
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    for (ci, c) in combos.iter().enumerate() {
        for (arch, pick, status) in [
            (ArchTag::HbfOneStage, 0usize, c.one.clone()),
            (ArchTag::HbfTwoStage, 1usize, c.second.as_ref().map(|_| ()).map_err(Clone::clone)),
        ] {
            match status {
                Err(reason) => rows.push(skip_row(
                    &[arch.as_str().to_string(), c.n_rf.to_string()],
                    &reason,
                    SIGPOW_HEADER.len(),
                )),
                Ok(()) => {
                    for rank in 0..c.n_rf {
                        let mean = outs
                            .iter()
                            .map(|t| {
                                let pair = &t[ci];
                                let p = if pick == 0 { &pair.0 } else { &pair.1 };
                                p.as_ref().expect("feasible combo computed")[rank]
                            })
                            .sum::<f64>()
                            / trials as f64;
                        rows.push(vec![
                            arch.as_str().to_string(),
                            c.n_rf.to_string(),
                            (rank + 1).to_string(),
                            fmt_f64(mean),
                            String::new(),
                        ]);
                    }
                }
            }
        }
    }
    Ok(rows)
}

// ---- msqe: total quantization error, fixed vs adaptive resolutions ----

// The adaptive curve allocates on the beam-selected (one-stage) combiner,
// whose chain gains are uneven; the fixed curves quantize the same chains
// (and, for the two-stage row, their unitary rotation) uniformly.
fn run_msqe(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<String>>> {
    let sc = scene(cfg);
    let combos = rf_combos(cfg);
    let b_bars = &cfg.quantization.b_bar_list;
    let b_max = cfg.quantization.b_max;

    type TrialOut = Vec<Option<(Vec<f64>, Option<Vec<f64>>, Vec<f64>)>>;
    let outs: Vec<TrialOut> = par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed_u64(), t);
        let ch = draw_channel(sc.ensemble, &mut rng);
        combos
            .iter()
            .map(|c| {
                if c.one.is_err() {
                    return Ok(None);
                }
                let w1 = select_beams(&ch, c.n_rf)?;
                let p1 = chain_power_profile(&w1, &ch, sc.rho, true)?;
                let g1 = aggregated_gains(&(w1.matrix.adjoint() * &ch.matrix));
                let p2 = match &c.second {
                    Err(_) => None,
                    Ok(v) => {
                        let w2 = compose_two_stage(&w1, v)?;
                        Some(chain_power_profile(&w2, &ch, sc.rho, true)?)
                    }
                };

                let mut fixed1 = Vec::with_capacity(b_bars.len());
                let mut fixed2 = p2.as_ref().map(|_| Vec::with_capacity(b_bars.len()));
                let mut adaptive = Vec::with_capacity(b_bars.len());
                for &bb in b_bars {
                    let uniform = uniform_allocation(bb, c.n_rf);
                    fixed1.push(allocation_msqe(&uniform, &p1, sc.table)?);
                    if let (Some(acc), Some(p2)) = (fixed2.as_mut(), p2.as_ref()) {
                        acc.push(allocation_msqe(&uniform, p2, sc.table)?);
                    }
                    let alloc = adaptive_allocation(&g1, bb, c.n_rf, b_max)?;
                    adaptive.push(allocation_msqe(&alloc, &p1, sc.table)?);
                }
                Ok(Some((fixed1, fixed2, adaptive)))
            })
            .collect()
    })?;

    let mean_of = |ci: usize, which: usize, bi: usize| {
        outs.iter()
            .map(|t| {
                let o = t[ci].as_ref().expect("feasible combo computed");
                match which {
                    0 => o.0[bi],
                    1 => o.1.as_ref().expect("second stage built")[bi],
                    _ => o.2[bi],
                }
            })
            .sum::<f64>()
            / cfg.trials as f64
    };

    let mut rows = Vec::new();
    for (ci, c) in combos.iter().enumerate() {
        let arch_status: [(ArchTag, Result<(), String>); 3] = [
            (ArchTag::HbfOneStage, c.one.clone()),
            (ArchTag::HbfTwoStage, c.second.as_ref().map(|_| ()).map_err(Clone::clone)),
            (ArchTag::HbfAdaptive, c.one.clone()),
        ];
        for (arch, status) in arch_status {
            match status {
                Err(reason) => rows.push(skip_row(
                    &[arch.as_str().to_string(), c.n_rf.to_string()],
                    &reason,
                    MSQE_HEADER.len(),
                )),
                Ok(()) => {
                    for (bi, &bb) in b_bars.iter().enumerate() {
                        let which = match arch {
                            ArchTag::HbfOneStage => 0,
                            ArchTag::HbfTwoStage => 1,
                            _ => 2,
                        };
                        let mean = mean_of(ci, which, bi);
                        rows.push(vec![
                            arch.as_str().to_string(),
                            c.n_rf.to_string(),
                            bb.to_string(),
                            fmt_f64(mean),
                            String::new(),
                        ]);
                    }
                }
            }
        }
    }
    Ok(rows)
}

// ---- bitalloc_hist: distribution of allocated resolutions ----

fn run_bitalloc_hist(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<String>>> {
    let sc = scene(cfg);
    let combos = rf_combos(cfg);
    let b_bars = &cfg.quantization.b_bar_list;
    let b_max = cfg.quantization.b_max;
    let n_bins = b_max as usize + 1;

    type TrialOut = Vec<Option<Vec<u64>>>;
    let outs: Vec<TrialOut> = par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed_u64(), t);
        let ch = draw_channel(sc.ensemble, &mut rng);
        combos
            .iter()
            .map(|c| {
                if c.one.is_err() {
                    return Ok(None);
                }
                let w1 = select_beams(&ch, c.n_rf)?;
                let g1 = aggregated_gains(&(w1.matrix.adjoint() * &ch.matrix));
                let mut counts = vec![0u64; b_bars.len() * n_bins];
                for (bi, &bb) in b_bars.iter().enumerate() {
                    let alloc = adaptive_allocation(&g1, bb, c.n_rf, b_max)?;
                    for &b in &alloc.int_bits {
                        counts[bi * n_bins + b as usize] += 1;
                    }
                }
                Ok(Some(counts))
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    for (ci, c) in combos.iter().enumerate() {
        if let Err(reason) = &c.one {
            rows.push(skip_row(&[c.n_rf.to_string()], reason, BITALLOC_HEADER.len()));
            continue;
        }
        let denom = (cfg.trials * c.n_rf as u64) as f64;
        for (bi, &bb) in b_bars.iter().enumerate() {
            for bin in 0..n_bins {
                let total: u64 = outs
                    .iter()
                    .map(|t| t[ci].as_ref().expect("feasible combo computed")[bi * n_bins + bin])
                    .sum();
                rows.push(vec![
                    c.n_rf.to_string(),
                    bb.to_string(),
                    bin.to_string(),
                    fmt_f64(total as f64 / denom),
                    String::new(),
                ]);
            }
        }
    }
    Ok(rows)
}

// ---- se_ee: operating points of the four architectures ----

/// Row order: dbf, one-stage, two-stage, adaptive; chain counts and
/// resolutions ascending inside each block. The pareto flag marks points on
/// their own architecture's frontier.
fn run_se_ee(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<String>>> {
    let sc = scene(cfg);
    let combos = rf_combos(cfg);
    let bits_list = &cfg.quantization.bits_list;
    let b_max = cfg.quantization.b_max;
    let model = cfg.power.model();
    let digital = DigitalCombiner::Zf;
    let n_ant = sc.n_antennas;

    enum Plan {
        Skip { arch: ArchTag, n_rf: usize, reason: String },
        // power is None for the adaptive architecture (per-trial quantity)
        Data { arch: ArchTag, n_rf: usize, bits: u8, power_w: Option<f64> },
    }

    let mut plans: Vec<Plan> = Vec::new();
    for &b in bits_list {
        let bits = vec![Resolution::Bits(b); n_ant];
        plans.push(Plan::Data {
            arch: ArchTag::Dbf,
            n_rf: n_ant,
            bits: b,
            power_w: Some(receiver_power(ArchTag::Dbf, n_ant, &bits, &model, n_ant)?),
        });
    }
    for (arch, needs_second) in
        [(ArchTag::HbfOneStage, false), (ArchTag::HbfTwoStage, true), (ArchTag::HbfAdaptive, true)]
    {
        for c in &combos {
            let status =
                if needs_second { c.second.as_ref().map(|_| ()).map_err(Clone::clone) } else { c.one.clone() };
            match status {
                Err(reason) => plans.push(Plan::Skip { arch, n_rf: c.n_rf, reason }),
                Ok(()) => {
                    for &b in bits_list {
                        let power_w = if arch == ArchTag::HbfAdaptive {
                            None
                        } else {
                            let bits = vec![Resolution::Bits(b); c.n_rf];
                            Some(receiver_power(arch, c.n_rf, &bits, &model, n_ant)?)
                        };
                        plans.push(Plan::Data { arch, n_rf: c.n_rf, bits: b, power_w });
                    }
                }
            }
        }
    }

    let identity =
        AnalogCombiner::from_matrix(CMatrix::identity(n_ant, n_ant), StageTag::Single, 0.0)?;

    // Per trial, per data plan: (se, adaptive receiver power or 0).
    let data_idx: Vec<usize> = plans
        .iter()
        .enumerate()
        .filter_map(|(i, p)| matches!(p, Plan::Data { .. }).then_some(i))
        .collect();
    let outs: Vec<Vec<(f64, f64)>> = par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed_u64(), t);
        let ch = draw_channel(sc.ensemble, &mut rng);

        // stage matrices per feasible chain count, built once per trial
        let mut per_rf: Vec<(usize, AnalogCombiner, Option<(AnalogCombiner, Vec<f64>)>)> =
            Vec::new();
        for c in &combos {
            if c.one.is_err() {
                continue;
            }
            let w1 = select_beams(&ch, c.n_rf)?;
            let two = match &c.second {
                Err(_) => None,
                Ok(v) => {
                    let w2 = compose_two_stage(&w1, v)?;
                    let g2 = aggregated_gains(&(w2.matrix.adjoint() * &ch.matrix));
                    Some((w2, g2))
                }
            };
            per_rf.push((c.n_rf, w1, two));
        }
        let lookup = |n_rf: usize| per_rf.iter().find(|e| e.0 == n_rf).expect("feasible");

        data_idx
            .iter()
            .map(|&pi| {
                let Plan::Data { arch, n_rf, bits, .. } = &plans[pi] else { unreachable!() };
                match arch {
                    ArchTag::Dbf => {
                        let res = vec![Resolution::Bits(*bits); n_ant];
                        let se =
                            spectral_efficiency(&ch, &identity, &res, sc.rho, digital, sc.table)?;
                        Ok((se, 0.0))
                    }
                    ArchTag::HbfOneStage => {
                        let (_, w1, _) = lookup(*n_rf);
                        let res = vec![Resolution::Bits(*bits); *n_rf];
                        let se = spectral_efficiency(&ch, w1, &res, sc.rho, digital, sc.table)?;
                        Ok((se, 0.0))
                    }
                    ArchTag::HbfTwoStage => {
                        let (_, _, two) = lookup(*n_rf);
                        let (w2, _) = two.as_ref().expect("second stage built");
                        let res = vec![Resolution::Bits(*bits); *n_rf];
                        let se = spectral_efficiency(&ch, w2, &res, sc.rho, digital, sc.table)?;
                        Ok((se, 0.0))
                    }
                    ArchTag::HbfAdaptive => {
                        let (_, _, two) = lookup(*n_rf);
                        let (w2, g2) = two.as_ref().expect("second stage built");
                        let alloc = adaptive_allocation(g2, *bits, *n_rf, b_max)?;
                        let res = alloc.resolutions();
                        let se = spectral_efficiency(&ch, w2, &res, sc.rho, digital, sc.table)?;
                        let pw = receiver_power(ArchTag::HbfAdaptive, *n_rf, &res, &model, n_ant)?;
                        Ok((se, pw))
                    }
                }
            })
            .collect()
    })?;

    // ensemble means, then per-architecture frontier flags
    let mut points: Vec<OperatingPoint> = Vec::with_capacity(data_idx.len());
    for (k, &pi) in data_idx.iter().enumerate() {
        let Plan::Data { arch, n_rf, bits, power_w } = &plans[pi] else { unreachable!() };
        let mean_se = outs.iter().map(|t| t[k].0).sum::<f64>() / cfg.trials as f64;
        let mean_pw = match power_w {
            Some(p) => *p,
            None => outs.iter().map(|t| t[k].1).sum::<f64>() / cfg.trials as f64,
        };
        points.push(OperatingPoint::new(
            mean_se,
            mean_pw,
            *arch,
            *n_rf,
            bits.to_string(),
            &model,
        )?);
    }
    let mut flags = vec![false; points.len()];
    for arch in [ArchTag::Dbf, ArchTag::HbfOneStage, ArchTag::HbfTwoStage, ArchTag::HbfAdaptive] {
        let group: Vec<usize> = (0..points.len()).filter(|&i| points[i].arch == arch).collect();
        let group_points: Vec<OperatingPoint> =
            group.iter().map(|&i| points[i].clone()).collect();
        for (i, on) in group.iter().zip(pareto_mask(&group_points)) {
            flags[*i] = on;
        }
    }

    let mut rows = Vec::new();
    let mut k = 0usize;
    for plan in &plans {
        match plan {
            Plan::Skip { arch, n_rf, reason } => rows.push(skip_row(
                &[arch.as_str().to_string(), n_rf.to_string()],
                reason,
                SE_EE_HEADER.len(),
            )),
            Plan::Data { arch, n_rf, bits, .. } => {
                let p = &points[k];
                rows.push(vec![
                    arch.as_str().to_string(),
                    n_rf.to_string(),
                    bits.to_string(),
                    fmt_f64(p.se_bps_hz),
                    fmt_f64(p.power_w),
                    fmt_f64(p.ee_bits_per_j),
                    if flags[k] { "1".into() } else { "0".into() },
                    String::new(),
                ]);
                k += 1;
            }
        }
    }
    Ok(rows)
}

// ---- blind_ser: learned detection vs training length and method ----

pub const BLIND_METHODS: &[&str] = &["ml_dithered", "ml_undithered", "ml_true", "wmd_dithered"];

fn run_blind_ser(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<String>>> {
    let sc = scene(cfg);
    let cb = match cfg.system.constellation {
        ConstellationKind::Bpsk => SymbolCodebook::bpsk(cfg.system.n_users),
        ConstellationKind::Qpsk => SymbolCodebook::qpsk(cfg.system.n_users),
        ConstellationKind::Qam16 => SymbolCodebook::qam16(cfg.system.n_users),
    }?;
    let n_trs = &cfg.blind.n_tr_list;
    let n_eval = cfg.blind.n_eval;
    let sigma_d = cfg.blind.dither_sigma;

    // Training draws come from stream 2t, payload draws from stream 2t + 1,
    // so every method sees the same payload sequence within a trial.
    let outs: Vec<Vec<f64>> = par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed_u64(), 2 * t);
        let ch = draw_channel(sc.ensemble, &mut rng);
        let model = ObservationModel::from_channel(&ch, &cb, sc.rho)?;
        let ideal = true_table(&model)?;
        let mut sers = Vec::with_capacity(n_trs.len() * BLIND_METHODS.len());
        for &n_tr in n_trs {
            let dithered = train_dithered(
                &model,
                &cb,
                n_tr,
                &DitherConfig { sigma_d, invert: true },
                &mut rng,
            )?;
            let undithered = train_dithered(
                &model,
                &cb,
                n_tr,
                &DitherConfig { sigma_d: 0.0, invert: false },
                &mut rng,
            )?;
            let wmd = build_wmd(&dithered)?;

            let eval = |detector: &mut dyn FnMut(&[u32]) -> quantlink_core::Result<usize>| {
                let mut payload = trial_rng(cfg.seed_u64(), 2 * t + 1);
                evaluate_ser(detector, &model, n_eval, &mut payload)
            };
            sers.push(eval(&mut |o| detect_ml(o, &dithered))?);
            sers.push(eval(&mut |o| detect_ml(o, &undithered))?);
            sers.push(eval(&mut |o| detect_ml(o, &ideal))?);
            sers.push(eval(&mut |o| detect_wmd(o, &wmd))?);
        }
        Ok(sers)
    })?;

    let mut rows = Vec::new();
    for (ni, &n_tr) in n_trs.iter().enumerate() {
        for (mi, method) in BLIND_METHODS.iter().enumerate() {
            let k = ni * BLIND_METHODS.len() + mi;
            let mean = outs.iter().map(|t| t[k]).sum::<f64>() / cfg.trials as f64;
            rows.push(vec![
                n_tr.to_string(),
                method.to_string(),
                fmt_f64(mean),
                String::new(),
            ]);
        }
    }
    Ok(rows)
}
