//! Resolution-adaptive ADC bit allocation.
//!
//! The real-valued solution puts 2^{3 b_i} proportional to the aggregated
//! channel gain g_i under the ADC power constraint sum_i 2^{b_i} = N_RF 2^bbar
//! (ADC power grows as 2^b). Rounding floors the real solution and greedily
//! refills the remaining budget.

use crate::error::{Error, Result};
use crate::quantizer::{DistortionTable, Resolution};
use crate::CMatrix;

/// ADC power budget in units of 2^b per ADC pair.
#[derive(Debug, Clone, Copy)]
pub struct PowerBudget {
    /// Reference uniform resolution bbar.
    pub constraint_bits: u8,
    pub n_rf: usize,
}

impl PowerBudget {
    pub fn new(constraint_bits: u8, n_rf: usize) -> Result<Self> {
        if constraint_bits == 0 {
            return Err(Error::invalid("constraint_bits must be >= 1"));
        }
        if n_rf == 0 {
            return Err(Error::invalid("n_rf must be >= 1"));
        }
        Ok(PowerBudget { constraint_bits, n_rf })
    }

    /// Total budget N_RF * 2^bbar.
    pub fn budget(&self) -> f64 {
        self.n_rf as f64 * 2f64.powi(self.constraint_bits as i32)
    }
}

/// Result of an allocation: the ideal real-valued bits, the integer bits,
/// and which chains stay powered.
#[derive(Debug, Clone)]
pub struct BitAllocation {
    pub real_bits: Vec<f64>,
    pub int_bits: Vec<u8>,
    pub active_mask: Vec<bool>,
}

impl BitAllocation {
    pub fn resolutions(&self) -> Vec<Resolution> {
        self.int_bits.iter().map(|&b| Resolution::Bits(b)).collect()
    }

    /// ADC power units consumed by active chains; switched-off pairs draw
    /// nothing.
    pub fn power_units(&self) -> f64 {
        self.int_bits
            .iter()
            .filter(|&&b| b > 0)
            .map(|&b| 2f64.powi(b as i32))
            .sum()
    }
}

/// Aggregated channel gain per RF chain: row energy of the analog-combined
/// channel W^H H.
pub fn aggregated_gains(effective_channel: &CMatrix) -> Vec<f64> {
    (0..effective_channel.nrows())
        .map(|i| effective_channel.row(i).iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Real-valued MSQE-minimizing allocation:
/// b_i = bbar + log2(g_i^{1/3} N_RF / sum_j g_j^{1/3}).
///
/// Chains with zero gain map to negative infinity (zero bits downstream).
pub fn allocate_real(gains: &[f64], budget: &PowerBudget) -> Result<Vec<f64>> {
    if gains.len() != budget.n_rf {
        return Err(Error::invalid(format!(
            "gains length {} does not match n_rf {}",
            gains.len(),
            budget.n_rf
        )));
    }
    if gains.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::invalid("gains must be non-negative and finite"));
    }
    let cube_roots: Vec<f64> = gains.iter().map(|&g| g.cbrt()).collect();
    let total: f64 = cube_roots.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("all aggregated gains are zero"));
    }
    let bbar = budget.constraint_bits as f64;
    let n_rf = budget.n_rf as f64;
    Ok(cube_roots
        .iter()
        .map(|&c| {
            if c > 0.0 {
                bbar + (n_rf * c / total).log2()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect())
}

/// Integer allocation: floor the real solution into [0, b_max], then
/// greedily refill the leftover budget, at each step incrementing the chain
/// with the largest model-MSQE decrease per unit of ADC power (ties to the
/// lowest index). Budget accounting counts every chain, active or not.
pub fn round_allocation(real_bits: &[f64], budget: &PowerBudget, b_max: u8) -> BitAllocation {
    let n = real_bits.len();
    let mut int_bits: Vec<u8> = real_bits
        .iter()
        .map(|&r| {
            if r.is_finite() {
                (r.floor().max(0.0) as u64).min(b_max as u64) as u8
            } else {
                0
            }
        })
        .collect();

    let total_budget = budget.budget();
    loop {
        let used: f64 = int_bits.iter().map(|&b| 2f64.powi(b as i32)).sum();
        let headroom = total_budget - used;
        let mut best_ratio = -1.0;
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if !real_bits[i].is_finite() || int_bits[i] >= b_max {
                continue;
            }
            let b = int_bits[i] as i32;
            let cost = 2f64.powi(b + 1) - 2f64.powi(b);
            if cost > headroom + 1e-9 {
                continue;
            }
            // Exponential-model MSQE decrease: the model gain recovered from
            // the real solution is 2^{3 r_i}, and one extra bit cuts the
            // model distortion 4^{-b} to 4^{-(b+1)}.
            let decrease =
                2f64.powf(3.0 * real_bits[i]) * (4f64.powi(-b) - 4f64.powi(-(b + 1)));
            let ratio = decrease / cost;
            if ratio > best_ratio * (1.0 + 1e-12) {
                best_ratio = ratio;
                pick = Some(i);
            }
        }
        match pick {
            Some(i) => int_bits[i] += 1,
            None => break,
        }
    }

    let active_mask = int_bits.iter().map(|&b| b > 0).collect();
    BitAllocation { real_bits: real_bits.to_vec(), int_bits, active_mask }
}

/// Total analytic MSQE sum_i beta(b_i) p_i; a zero-bit chain forfeits its
/// whole power (beta(0) = 1).
pub fn allocation_msqe(
    alloc: &BitAllocation,
    chain_powers: &[f64],
    table: &DistortionTable,
) -> Result<f64> {
    if alloc.int_bits.len() != chain_powers.len() {
        return Err(Error::invalid(format!(
            "allocation length {} does not match chain_powers {}",
            alloc.int_bits.len(),
            chain_powers.len()
        )));
    }
    let mut total = 0.0;
    for (&b, &p) in alloc.int_bits.iter().zip(chain_powers) {
        total += table.beta(Resolution::Bits(b))? * p;
    }
    Ok(total)
}

/// Exhaustive integer-allocation oracle: the exact minimizer of
/// `allocation_msqe` over all allocations with sum_i 2^{b_i} <= budget,
/// lexicographically first among ties. Guarded to small instances.
pub fn brute_force_allocation(
    gains: &[f64],
    chain_powers: &[f64],
    budget: &PowerBudget,
    b_max: u8,
    table: &DistortionTable,
) -> Result<BitAllocation> {
    if budget.n_rf > 8 || b_max > 4 {
        return Err(Error::unsupported(format!(
            "brute force limited to n_rf <= 8 and b_max <= 4, got {} and {}",
            budget.n_rf, b_max
        )));
    }
    if gains.len() != budget.n_rf || chain_powers.len() != budget.n_rf {
        return Err(Error::invalid("gains/chain_powers length must match n_rf"));
    }
    let n = budget.n_rf;
    let total_budget = budget.budget();
    let betas: Vec<f64> = (0..=b_max)
        .map(|b| table.beta(Resolution::Bits(b)))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut current = vec![0u8; n];
    // Depth-first enumeration in lexicographic order with budget pruning.
    fn recurse(
        depth: usize,
        n: usize,
        b_max: u8,
        used: f64,
        cost_so_far: f64,
        total_budget: f64,
        chain_powers: &[f64],
        betas: &[f64],
        current: &mut Vec<u8>,
        best: &mut Option<(f64, Vec<u8>)>,
    ) {
        if depth == n {
            // Strict improvement keeps the lexicographically first optimum.
            let better = match best {
                None => true,
                Some((cost, _)) => cost_so_far < *cost,
            };
            if better {
                *best = Some((cost_so_far, current.clone()));
            }
            return;
        }
        let remaining_min = (n - depth - 1) as f64; // every later chain costs >= 2^0
        for b in 0..=b_max {
            let power = 2f64.powi(b as i32);
            if used + power + remaining_min > total_budget + 1e-9 {
                break;
            }
            current[depth] = b;
            recurse(
                depth + 1,
                n,
                b_max,
                used + power,
                cost_so_far + betas[b as usize] * chain_powers[depth],
                total_budget,
                chain_powers,
                betas,
                current,
                best,
            );
        }
        current[depth] = 0;
    }
    recurse(
        0,
        n,
        b_max,
        0.0,
        0.0,
        total_budget,
        chain_powers,
        &betas,
        &mut current,
        &mut best,
    );

    let (_, int_bits) = best.ok_or_else(|| Error::degenerate("no feasible allocation"))?;
    let active_mask = int_bits.iter().map(|&b| b > 0).collect();
    let real_bits = int_bits.iter().map(|&b| b as f64).collect();
    Ok(BitAllocation { real_bits, int_bits, active_mask })
}
