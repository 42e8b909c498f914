//! Constant-modulus analog combining: DFT-codebook beam selection for the
//! first stage, DFT/Hadamard second stage, two-stage composition, and
//! per-RF-chain power profiles.

use num_complex::Complex64;

use crate::channel::MultiUserChannel;
use crate::error::{Error, Result};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageTag {
    Single,
    First,
    Second,
    Composed,
}

/// Second-stage unitary family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondStageKind {
    Dft,
    Hadamard,
}

/// An analog combining matrix with its constant-modulus contract.
///
/// `modulus` is the required per-entry magnitude; 0 means unconstrained
/// (e.g. an SVD-derived first stage or a composed two-stage matrix).
#[derive(Debug, Clone)]
pub struct AnalogCombiner {
    pub matrix: CMatrix,
    pub stage_tag: StageTag,
    pub modulus: f64,
}

impl AnalogCombiner {
    /// Wrap a matrix, validating the constant-modulus contract when claimed.
    pub fn from_matrix(matrix: CMatrix, stage_tag: StageTag, modulus: f64) -> Result<Self> {
        if modulus > 0.0 {
            for entry in matrix.iter() {
                if (entry.norm() - modulus).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "entry magnitude {} violates constant modulus {}",
                        entry.norm(),
                        modulus
                    )));
                }
            }
        }
        Ok(AnalogCombiner { matrix, stage_tag, modulus })
    }

    pub fn n_chains(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Unitary n-point DFT codebook, entry (m, k) = (1/sqrt(n)) e^{-i 2 pi m k / n}.
pub fn dft_codebook(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::invalid("dft_codebook requires n >= 1"));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let base = -2.0 * std::f64::consts::PI / n as f64;
    Ok(CMatrix::from_fn(n, n, |m, k| {
        Complex64::from_polar(norm, base * (m * k) as f64)
    }))
}

/// First-stage combiner: the n_rf DFT-codebook columns with the largest
/// aggregated gain ||f^H H||^2, ties broken by lower column index. Selected
/// columns are kept in ascending index order.
pub fn select_beams(channel: &MultiUserChannel, n_rf: usize) -> Result<AnalogCombiner> {
    let n_r = channel.n_antennas();
    if n_rf == 0 || n_rf > n_r {
        return Err(Error::invalid(format!(
            "n_rf = {n_rf} outside 1..={n_r}"
        )));
    }
    let codebook = dft_codebook(n_r)?;
    let beamspace = codebook.adjoint() * &channel.matrix;
    let mut scored: Vec<(usize, f64)> = (0..n_r)
        .map(|k| (k, beamspace.row(k).iter().map(|z| z.norm_sqr()).sum()))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut selected: Vec<usize> = scored.iter().take(n_rf).map(|&(k, _)| k).collect();
    selected.sort_unstable();

    let mut matrix = CMatrix::zeros(n_r, n_rf);
    for (out, &k) in selected.iter().enumerate() {
        matrix.set_column(out, &codebook.column(k));
    }
    let modulus = 1.0 / (n_r as f64).sqrt();
    Ok(AnalogCombiner { matrix, stage_tag: StageTag::First, modulus })
}

/// Second-stage constant-modulus unitary. Hadamard uses the Sylvester
/// construction and therefore requires a power-of-two size.
pub fn second_stage(n_rf: usize, kind: SecondStageKind) -> Result<AnalogCombiner> {
    if n_rf == 0 {
        return Err(Error::invalid("second_stage requires n_rf >= 1"));
    }
    let matrix = match kind {
        SecondStageKind::Dft => dft_codebook(n_rf)?,
        SecondStageKind::Hadamard => {
            if !n_rf.is_power_of_two() {
                return Err(Error::unsupported(format!(
                    "Sylvester Hadamard construction needs a power-of-two size, got {n_rf}"
                )));
            }
            let mut h = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
            while h.nrows() < n_rf {
                let n = h.nrows();
                let mut next = CMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        next[(i, j)] = h[(i, j)];
                        next[(i, j + n)] = h[(i, j)];
                        next[(i + n, j)] = h[(i, j)];
                        next[(i + n, j + n)] = -h[(i, j)];
                    }
                }
                h = next;
            }
            h / Complex64::new((n_rf as f64).sqrt(), 0.0)
        }
    };
    let modulus = 1.0 / (n_rf as f64).sqrt();
    Ok(AnalogCombiner { matrix, stage_tag: StageTag::Second, modulus })
}

/// Compose first and second stages into the effective N_r x N_RF combiner.
pub fn compose_two_stage(
    first: &AnalogCombiner,
    second: &AnalogCombiner,
) -> Result<AnalogCombiner> {
    if first.matrix.ncols() != second.matrix.nrows()
        || second.matrix.nrows() != second.matrix.ncols()
    {
        return Err(Error::invalid(format!(
            "cannot compose {}x{} with {}x{}",
            first.matrix.nrows(),
            first.matrix.ncols(),
            second.matrix.nrows(),
            second.matrix.ncols()
        )));
    }
    Ok(AnalogCombiner {
        matrix: &first.matrix * &second.matrix,
        stage_tag: StageTag::Composed,
        modulus: 0.0,
    })
}

/// Per-chain analog output power [W^H (rho H H^H + I) W]_{ii}, or the
/// signal-only part rho ||H^H w_i||^2 with `include_noise = false`.
pub fn chain_power_profile(
    combiner: &AnalogCombiner,
    channel: &MultiUserChannel,
    snr: f64,
    include_noise: bool,
) -> Result<Vec<f64>> {
    if combiner.matrix.nrows() != channel.n_antennas() {
        return Err(Error::invalid(format!(
            "combiner rows {} do not match antennas {}",
            combiner.matrix.nrows(),
            channel.n_antennas()
        )));
    }
    if !(snr > 0.0) {
        return Err(Error::invalid(format!("snr must be positive, got {snr}")));
    }
    let cross = channel.matrix.adjoint() * &combiner.matrix; // N_u x N_RF
    Ok((0..combiner.n_chains())
        .map(|i| {
            let signal = snr * cross.column(i).norm_squared();
            if include_noise {
                signal + combiner.matrix.column(i).norm_squared()
            } else {
                signal
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        assemble_channel, draw_channel, left_singular_basis, ArrayGeometry,
        ChannelEnsembleConfig, MultiUserChannel, Path, PathSet,
    };
    use crate::rng::trial_rng;
    use approx::assert_relative_eq;

    fn sparse_config(n_r: usize, n_u: usize) -> ChannelEnsembleConfig {
        ChannelEnsembleConfig {
            geometry: ArrayGeometry::half_wavelength(n_r),
            n_users: n_u,
            avg_paths: 2.0,
        }
    }

    fn channel_from_matrix(matrix: CMatrix) -> MultiUserChannel {
        MultiUserChannel { matrix, paths: PathSet { per_user: vec![] } }
    }

    // ---- dft_codebook ----

    #[test]
    fn dft_base_cases() {
        let f1 = dft_codebook(1).unwrap();
        assert_relative_eq!(f1[(0, 0)].re, 1.0, epsilon = 1e-12);
        let f2 = dft_codebook(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (idx, expect) in [((0, 0), s), ((0, 1), s), ((1, 0), s), ((1, 1), -s)] {
            assert_relative_eq!(f2[idx].re, expect, epsilon = 1e-12);
            assert!(f2[idx].im.abs() < 1e-12);
        }
        assert!(dft_codebook(0).is_err());
    }

    #[test]
    fn dft_is_unitary() {
        for n in [3, 8, 17] {
            let f = dft_codebook(n).unwrap();
            let gram = f.adjoint() * &f;
            let eye = CMatrix::identity(n, n);
            assert!((gram - eye).norm() < 1e-10);
        }
    }

    // ---- select_beams ----

    #[test]
    fn grid_aligned_path_is_fully_captured() {
        let n_r = 16;
        let geometry = ArrayGeometry::half_wavelength(n_r);
        // Column k of the DFT codebook matches sin(aoa) = -2k/N_r (mod 2).
        let aoa = (-2.0 * 2.0 / n_r as f64).asin();
        let paths = PathSet {
            per_user: vec![vec![Path { gain: Complex64::new(1.0, 0.5), aoa }]],
        };
        let ch = assemble_channel(paths, geometry).unwrap();
        let w = select_beams(&ch, 1).unwrap();
        let captured = (w.matrix.adjoint() * &ch.matrix).norm();
        assert_relative_eq!(captured, ch.matrix.norm(), epsilon = 1e-9);
    }

    #[test]
    fn full_codebook_captures_everything() {
        let mut rng = trial_rng(31, 0);
        let ch = draw_channel(sparse_config(16, 3), &mut rng);
        let w = select_beams(&ch, 16).unwrap();
        assert_relative_eq!(
            (w.matrix.adjoint() * &ch.matrix).norm(),
            ch.matrix.norm(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn greedy_selection_matches_exhaustive_subsets() {
        let mut rng = trial_rng(32, 0);
        let ch = draw_channel(sparse_config(16, 2), &mut rng);
        let w = select_beams(&ch, 4).unwrap();
        let selected_energy = (w.matrix.adjoint() * &ch.matrix).norm_squared();

        let codebook = dft_codebook(16).unwrap();
        let beamspace = codebook.adjoint() * &ch.matrix;
        let gains: Vec<f64> = (0..16)
            .map(|k| beamspace.row(k).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let mut best = 0.0f64;
        for a in 0..16 {
            for b in (a + 1)..16 {
                for c in (b + 1)..16 {
                    for d in (c + 1)..16 {
                        best = best.max(gains[a] + gains[b] + gains[c] + gains[d]);
                    }
                }
            }
        }
        assert_relative_eq!(selected_energy, best, epsilon = 1e-9);
    }

    #[test]
    fn capture_is_monotone_in_chain_count() {
        let mut rng = trial_rng(33, 0);
        let ch = draw_channel(sparse_config(32, 4), &mut rng);
        let mut prev = 0.0;
        for n_rf in [1, 2, 4, 8, 16, 32] {
            let w = select_beams(&ch, n_rf).unwrap();
            let captured = (w.matrix.adjoint() * &ch.matrix).norm_squared();
            assert!(captured >= prev - 1e-12);
            prev = captured;
        }
    }

    #[test]
    fn first_stage_has_constant_modulus() {
        let mut rng = trial_rng(34, 0);
        let ch = draw_channel(sparse_config(16, 2), &mut rng);
        let w = select_beams(&ch, 5).unwrap();
        let expect = 1.0 / 4.0;
        for entry in w.matrix.iter() {
            assert_relative_eq!(entry.norm(), expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn select_beams_range_check() {
        let mut rng = trial_rng(35, 0);
        let ch = draw_channel(sparse_config(8, 2), &mut rng);
        assert!(select_beams(&ch, 0).is_err());
        assert!(select_beams(&ch, 9).is_err());
    }

    // ---- second_stage ----

    #[test]
    fn dft_second_stage_matches_codebook() {
        let v = second_stage(4, SecondStageKind::Dft).unwrap();
        assert!((&v.matrix - dft_codebook(4).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn hadamard_base_and_unsupported_sizes() {
        let h2 = second_stage(2, SecondStageKind::Hadamard).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(h2.matrix[(1, 1)].re, -s, epsilon = 1e-12);
        assert!(matches!(
            second_stage(12, SecondStageKind::Hadamard),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn second_stages_are_unitary_constant_modulus() {
        for (n, kind) in [(8, SecondStageKind::Dft), (8, SecondStageKind::Hadamard), (5, SecondStageKind::Dft)] {
            let v = second_stage(n, kind).unwrap();
            let eye = CMatrix::identity(n, n);
            assert!((v.matrix.adjoint() * &v.matrix - eye).norm() < 1e-9);
            let expect = 1.0 / (n as f64).sqrt();
            for entry in v.matrix.iter() {
                assert_relative_eq!(entry.norm(), expect, epsilon = 1e-9);
            }
        }
    }

    // ---- compose_two_stage ----

    #[test]
    fn composing_with_size_one_is_identity() {
        let mut rng = trial_rng(36, 0);
        let ch = draw_channel(sparse_config(8, 2), &mut rng);
        let w1 = select_beams(&ch, 1).unwrap();
        let v = second_stage(1, SecondStageKind::Dft).unwrap();
        let composed = compose_two_stage(&w1, &v).unwrap();
        assert!((&composed.matrix - &w1.matrix).norm() < 1e-12);
    }

    #[test]
    fn composition_preserves_captured_energy_and_column_norms() {
        let mut rng = trial_rng(37, 0);
        let ch = draw_channel(sparse_config(32, 4), &mut rng);
        let w1 = select_beams(&ch, 8).unwrap();
        let v = second_stage(8, SecondStageKind::Dft).unwrap();
        let composed = compose_two_stage(&w1, &v).unwrap();
        assert_relative_eq!(
            (composed.matrix.adjoint() * &ch.matrix).norm(),
            (w1.matrix.adjoint() * &ch.matrix).norm(),
            epsilon = 1e-9
        );
        for i in 0..8 {
            assert_relative_eq!(composed.matrix.column(i).norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn compose_dimension_mismatch_rejected() {
        let mut rng = trial_rng(38, 0);
        let ch = draw_channel(sparse_config(8, 2), &mut rng);
        let w1 = select_beams(&ch, 4).unwrap();
        let v = second_stage(3, SecondStageKind::Dft).unwrap();
        assert!(compose_two_stage(&w1, &v).is_err());
    }

    // ---- chain_power_profile ----

    #[test]
    fn noise_only_profile_is_column_norms() {
        let geometry = ArrayGeometry::half_wavelength(8);
        let zero = channel_from_matrix(CMatrix::zeros(8, 2));
        let _ = geometry;
        let codebook = dft_codebook(8).unwrap();
        let w = AnalogCombiner {
            matrix: codebook.columns(0, 3).into_owned(),
            stage_tag: StageTag::First,
            modulus: 1.0 / 8f64.sqrt(),
        };
        let profile = chain_power_profile(&w, &zero, 10.0, true).unwrap();
        for p in profile {
            assert_relative_eq!(p, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_covariance_is_exactly_equalized() {
        // Diagonal input covariance + constant-modulus unitary stage:
        // every output chain sees tr(rho D + I)/n.
        let n = 6;
        let d: [f64; 6] = [0.4, 1.9, 3.3, 0.2, 2.8, 1.1];
        let h = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(d[i].sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let ch = channel_from_matrix(h);
        let v = second_stage(n, SecondStageKind::Dft).unwrap();
        let rho = 7.0;
        let profile = chain_power_profile(&v, &ch, rho, true).unwrap();
        let expect = d.iter().map(|x| rho * x + 1.0).sum::<f64>() / n as f64;
        for p in profile {
            assert_relative_eq!(p, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn total_power_is_invariant_under_second_stage() {
        let mut rng = trial_rng(39, 0);
        let ch = draw_channel(sparse_config(32, 4), &mut rng);
        let w1 = select_beams(&ch, 8).unwrap();
        let v = second_stage(8, SecondStageKind::Hadamard).unwrap();
        let composed = compose_two_stage(&w1, &v).unwrap();
        let rho = 10.0;
        let one: f64 = chain_power_profile(&w1, &ch, rho, true).unwrap().iter().sum();
        let two: f64 = chain_power_profile(&composed, &ch, rho, true).unwrap().iter().sum();
        assert_relative_eq!(one, two, epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn svd_first_stage_gives_exact_equalization() {
        let mut rng = trial_rng(40, 0);
        let ch = draw_channel(sparse_config(16, 4), &mut rng);
        let (u, _) = left_singular_basis(&ch, 4).unwrap();
        let w1 = AnalogCombiner { matrix: u, stage_tag: StageTag::First, modulus: 0.0 };
        let v = second_stage(4, SecondStageKind::Dft).unwrap();
        let composed = compose_two_stage(&w1, &v).unwrap();
        let profile = chain_power_profile(&composed, &ch, 10.0, true).unwrap();
        let mean = profile.iter().sum::<f64>() / profile.len() as f64;
        for p in &profile {
            assert!((p - mean).abs() < 1e-9, "profile {profile:?}");
        }
    }

    #[test]
    fn signal_only_flag_drops_noise_floor() {
        let mut rng = trial_rng(41, 0);
        let ch = draw_channel(sparse_config(16, 2), &mut rng);
        let w = select_beams(&ch, 4).unwrap();
        let with = chain_power_profile(&w, &ch, 10.0, true).unwrap();
        let without = chain_power_profile(&w, &ch, 10.0, false).unwrap();
        for (a, b) in with.iter().zip(&without) {
            assert_relative_eq!(a - b, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_modulus_contract_is_validated() {
        let mut m = dft_codebook(4).unwrap();
        m[(0, 0)] *= Complex64::new(2.0, 0.0);
        assert!(AnalogCombiner::from_matrix(m, StageTag::Second, 0.5).is_err());
    }
}
