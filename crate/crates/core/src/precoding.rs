//! Centralized zero-forcing on the association-masked channel, per-RU power
//! normalization and per-UE SINR.
//!
//! Precoders are stored as an N × K matrix: column `k` holds the weights every
//! RU applies to UE `k`'s symbol. The transmit power of each RU is folded into
//! the weights, so `Σ_k |w[n][k]|²` is RU `n`'s transmit power in watts.

use nalgebra::{Complex, DMatrix};

use crate::association::AssociationMatrix;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Singular values below this fraction of the largest are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    /// K × N channel with unassociated entries and dropped-UE rows zeroed.
    pub h_eff: CMatrix,
    /// Non-dropped UEs with at least one serving RU, ascending.
    pub active_ues: Vec<usize>,
}

/// Un-normalized zero-forcing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPrecoder {
    /// N × K; columns of inactive UEs are zero.
    pub w: CMatrix,
    /// Numerical rank of the active effective channel.
    pub rank: usize,
    /// `max |(H_active · W_active − I)_ij|`.
    pub zf_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// N × K power-scaled weights.
    pub w: CMatrix,
    pub per_ru_tx_power: Vec<f64>,
    /// Common factor applied to the raw weights.
    pub scale: f64,
}

/// Hadamard mask of `h` by the association; dropped UEs get zero rows.
pub fn effective_channel(h: &CMatrix, a: &AssociationMatrix) -> Result<EffectiveChannel> {
    if h.nrows() != a.ue_count() || h.ncols() != a.ru_count() {
        return Err(Error::Shape(format!(
            "channel is {}x{}, association is {}x{}",
            h.nrows(),
            h.ncols(),
            a.ue_count(),
            a.ru_count()
        )));
    }
    let h_eff = CMatrix::from_fn(h.nrows(), h.ncols(), |k, n| {
        if a.get(k, n) && !a.dropped[k] {
            h[(k, n)]
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Ok(EffectiveChannel {
        h_eff,
        active_ues: a.active_ues(),
    })
}

/// Moore–Penrose pseudo-inverse via SVD, dropping singular values below
/// `PINV_RELATIVE_CUTOFF · σ_max`. Returns the inverse and the kept rank.
///
/// The factorization comes from faer: nalgebra's SVD returns unconverged
/// factors on some sparse channel matrices.
pub fn pseudo_inverse(m: &CMatrix) -> (CMatrix, usize) {
    let (r, c) = m.shape();
    if m.iter().all(|z| z.norm() == 0.0) {
        return (CMatrix::zeros(c, r), 0);
    }
    let fm = faer::Mat::<Complex<f64>>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = fm.thin_svd().expect("SVD of a finite matrix converges");
    let (u, v) = (svd.U(), svd.V());
    let sigma: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let cutoff = PINV_RELATIVE_CUTOFF * sigma[0];
    let kept: Vec<(usize, f64)> = sigma
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, s)| s > cutoff)
        .collect();
    let inv = CMatrix::from_fn(c, r, |i, j| {
        kept.iter()
            .map(|&(t, s)| v[(i, t)] * u[(j, t)].conj() / s)
            .sum()
    });
    (inv, kept.len())
}

/// Zero-forcing weights `W = pinv(H_eff[active, :])`, scattered into an
/// N × K matrix. With no active UE the result is all zeros.
pub fn czf(eff: &EffectiveChannel) -> RawPrecoder {
    let (k, n) = eff.h_eff.shape();
    let mut w = CMatrix::zeros(n, k);
    if eff.active_ues.is_empty() {
        return RawPrecoder {
            w,
            rank: 0,
            zf_residual: 0.0,
        };
    }
    // RUs serving nobody get exact zero rows
    let used_rus: Vec<usize> = (0..n)
        .filter(|&ru| {
            eff.active_ues
                .iter()
                .any(|&ue| eff.h_eff[(ue, ru)] != Complex::new(0.0, 0.0))
        })
        .collect();
    let h_act = eff
        .h_eff
        .select_rows(eff.active_ues.iter())
        .select_columns(used_rus.iter());
    let (w_act, rank) = pseudo_inverse(&h_act);
    let product = &h_act * &w_act;
    let zf_residual = product
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let (i, j) = (idx % product.nrows(), idx / product.nrows());
            let target = if i == j { 1.0 } else { 0.0 };
            (z - Complex::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    for (col, &ue) in eff.active_ues.iter().enumerate() {
        for (row, &ru) in used_rus.iter().enumerate() {
            w[(ru, ue)] = w_act[(row, col)];
        }
    }
    RawPrecoder {
        w,
        rank,
        zf_residual,
    }
}

fn row_powers(w: &CMatrix) -> Vec<f64> {
    w.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Scales all weights by one common factor so the most loaded RU transmits
/// exactly `per_ru_limit` watts. Zero weights stay zero.
pub fn normalize_power(w: &CMatrix, per_ru_limit: f64) -> Result<PrecoderSet> {
    if w.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Shape("precoder contains non-finite weights".into()));
    }
    let peak = row_powers(w).into_iter().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(PrecoderSet {
            w: w.clone(),
            per_ru_tx_power: vec![0.0; w.nrows()],
            scale: 0.0,
        });
    }
    let scale = (per_ru_limit / peak).sqrt();
    let scaled = w * Complex::new(scale, 0.0);
    Ok(PrecoderSet {
        per_ru_tx_power: row_powers(&scaled),
        w: scaled,
        scale,
    })
}

/// Per-UE linear SINR; `None` for UEs that are dropped or unserved.
///
/// Signal is `|h_k · w_k|²`; interference is `Σ_{j≠k} |h_k · w_j|²` over the
/// other served UEs, with `h_k` the full (unmasked) channel row of UE `k`.
pub fn sinr(
    h: &CMatrix,
    precoders: &PrecoderSet,
    a: &AssociationMatrix,
    noise_power: f64,
) -> Vec<Option<f64>> {
    let active = a.active_ues();
    let gains = h * &precoders.w;
    (0..h.nrows())
        .map(|k| {
            if !active.contains(&k) {
                return None;
            }
            let signal = gains[(k, k)].norm_sqr();
            let interference: f64 = active
                .iter()
                .filter(|&&j| j != k)
                .map(|&j| gains[(k, j)].norm_sqr())
                .sum();
            Some(signal / (interference + noise_power))
        })
        .collect()
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Fraction of transmitted power placed on RU–UE pairs outside the association.
pub fn off_association_power_fraction(precoders: &PrecoderSet, a: &AssociationMatrix) -> f64 {
    let total: f64 = precoders.per_ru_tx_power.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut off = 0.0;
    for n in 0..precoders.w.nrows() {
        for k in 0..precoders.w.ncols() {
            if !a.get(k, n) {
                off += precoders.w[(n, k)].norm_sqr();
            }
        }
    }
    off / total
}
