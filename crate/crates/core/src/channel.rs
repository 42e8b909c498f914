//! Narrowband geometric multi-user channel for a uniform linear array.
//!
//! Each single-antenna uplink user contributes L_u = max(1, Poisson(lambda))
//! paths with i.i.d. CN(0,1) gains and AoAs uniform on [-pi/2, pi/2]; the
//! per-path scaling sqrt(N_r / L_u) normalizes the expected column energy to
//! N_r.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::standard_complex;
use crate::{CMatrix, CVector};

/// Uniform linear array description.
#[derive(Debug, Clone, Copy)]
pub struct ArrayGeometry {
    pub n_antennas: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn half_wavelength(n_antennas: usize) -> Self {
        ArrayGeometry { n_antennas, spacing: 0.5 }
    }
}

/// Ensemble parameters for channel draws.
#[derive(Debug, Clone, Copy)]
pub struct ChannelEnsembleConfig {
    pub geometry: ArrayGeometry,
    pub n_users: usize,
    /// Average path count lambda per user.
    pub avg_paths: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Path {
    pub gain: Complex64,
    /// Angle of arrival in radians.
    pub aoa: f64,
}

/// Paths drawn for every user of one realization.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub per_user: Vec<Vec<Path>>,
}

/// One channel realization, N_r x N_u, with its generating paths.
#[derive(Debug, Clone)]
pub struct MultiUserChannel {
    pub matrix: CMatrix,
    pub paths: PathSet,
}

impl MultiUserChannel {
    pub fn n_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Unit-norm ULA response vector: entry n = (1/sqrt(N_r)) e^{i 2 pi d n sin(aoa)}.
pub fn ula_response(geometry: ArrayGeometry, aoa: f64) -> Result<CVector> {
    if !aoa.is_finite() {
        return Err(Error::invalid(format!("non-finite angle of arrival: {aoa}")));
    }
    let n = geometry.n_antennas;
    let norm = 1.0 / (n as f64).sqrt();
    let phase_step = 2.0 * std::f64::consts::PI * geometry.spacing * aoa.sin();
    Ok(CVector::from_fn(n, |i, _| {
        Complex64::from_polar(norm, phase_step * i as f64)
    }))
}

/// Draw the path set of one realization.
pub fn draw_paths<R: Rng + ?Sized>(config: ChannelEnsembleConfig, rng: &mut R) -> PathSet {
    let poisson = Poisson::new(config.avg_paths).expect("positive path mean");
    let per_user = (0..config.n_users)
        .map(|_| {
            let count = (poisson.sample(rng) as u64).max(1);
            (0..count)
                .map(|_| Path {
                    gain: standard_complex(rng),
                    aoa: rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2),
                })
                .collect()
        })
        .collect();
    PathSet { per_user }
}

/// Assemble the channel matrix from a path set:
/// column u = sqrt(N_r / L_u) * sum_l gain_l a(aoa_l).
pub fn assemble_channel(paths: PathSet, geometry: ArrayGeometry) -> Result<MultiUserChannel> {
    let n_r = geometry.n_antennas;
    let n_u = paths.per_user.len();
    let mut matrix = CMatrix::zeros(n_r, n_u);
    for (u, user_paths) in paths.per_user.iter().enumerate() {
        if user_paths.is_empty() {
            return Err(Error::invalid(format!("user {u} has no paths")));
        }
        let scale = (n_r as f64 / user_paths.len() as f64).sqrt();
        let mut column = CVector::zeros(n_r);
        for path in user_paths {
            column += ula_response(geometry, path.aoa)? * (path.gain * scale);
        }
        matrix.set_column(u, &column);
    }
    Ok(MultiUserChannel { matrix, paths })
}

/// Draw a full channel realization in one call.
pub fn draw_channel<R: Rng + ?Sized>(
    config: ChannelEnsembleConfig,
    rng: &mut R,
) -> MultiUserChannel {
    let paths = draw_paths(config, rng);
    assemble_channel(paths, config.geometry).expect("draw_paths guarantees nonempty paths")
}

/// The k dominant left-singular vectors of the channel and all singular
/// values in descending order.
pub fn left_singular_basis(
    channel: &MultiUserChannel,
    k: usize,
) -> Result<(CMatrix, Vec<f64>)> {
    let min_dim = channel.n_antennas().min(channel.n_users());
    if k == 0 || k > min_dim {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={min_dim} for a {}x{} channel",
            channel.n_antennas(),
            channel.n_users()
        )));
    }
    let svd = channel.matrix.clone().svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut basis = CMatrix::zeros(channel.n_antennas(), k);
    for (out_col, &src_col) in order.iter().take(k).enumerate() {
        basis.set_column(out_col, &u.column(src_col));
    }
    Ok((basis, sigma))
}
