//! Linear-frequency cepstral coefficients.
//!
//! Pipeline per frame: power spectrum -> triangular filters on a linear
//! frequency scale -> floored log -> orthonormal DCT-II -> first `n_ceps`
//! coefficients, optionally extended with delta and delta-delta rows.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::{self, StftGeometry, LOG_FLOOR};

/// Front-end configuration. Defaults give 20 ms frames, 10 ms hop,
/// FFT 1024, 20 filters, 20 cepstra and 60 output dimensions with deltas.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LfccConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub n_filters: usize,
    pub n_ceps: usize,
    pub include_deltas: bool,
    /// Filterbank upper edge as a fraction of the sample rate. The default
    /// 0.25 places it at half the Nyquist frequency.
    pub f_max_fraction: f64,
}

impl Default for LfccConfig {
    fn default() -> Self {
        Self {
            frame_ms: 20.0,
            hop_ms: 10.0,
            fft_size: 1024,
            n_filters: 20,
            n_ceps: 20,
            include_deltas: true,
            f_max_fraction: 0.25,
        }
    }
}

impl LfccConfig {
    pub fn geometry(&self, sample_rate: u32) -> Result<StftGeometry> {
        let frame_len = (sample_rate as f64 * self.frame_ms / 1000.0).round() as usize;
        let hop = (sample_rate as f64 * self.hop_ms / 1000.0).round() as usize;
        StftGeometry::new(frame_len, hop, self.fft_size)
    }

    pub fn output_dim(&self) -> usize {
        if self.include_deltas {
            self.n_ceps * 3
        } else {
            self.n_ceps
        }
    }
}

/// Feature rows with their frame timing.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub features: Matrix,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FeatureMatrix {
    pub fn num_frames(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// One frame per row, comma-separated, for debugging dumps.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in 0..self.features.rows() {
            let line: Vec<String> = self
                .features
                .row(t)
                .iter()
                .map(|v| format!("{v:.9}"))
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Triangular filters with centers uniformly spaced on linear frequency
/// from 0 to `f_max`, peak 1 per filter.
pub fn linear_filterbank(
    n_filters: usize,
    fft_size: usize,
    sample_rate: u32,
    f_max: f64,
) -> Result<Matrix> {
    if n_filters == 0 {
        return Err(Error::InvalidFrequencyRange("n_filters must be positive".into()));
    }
    if f_max <= 0.0 || f_max > sample_rate as f64 / 2.0 {
        return Err(Error::InvalidFrequencyRange(format!(
            "f_max {f_max} outside (0, {}]",
            sample_rate as f64 / 2.0
        )));
    }
    let points: Vec<f64> = (0..n_filters + 2)
        .map(|i| f_max * i as f64 / (n_filters + 1) as f64)
        .collect();
    spectral::triangle_rows(&points, fft_size, sample_rate)
}

/// Orthonormal DCT-II matrix, `n_out x n_in`.
fn dct_matrix(n_out: usize, n_in: usize) -> Matrix {
    let mut m = Matrix::zeros(n_out, n_in);
    for k in 0..n_out {
        let scale = if k == 0 {
            (1.0 / n_in as f64).sqrt()
        } else {
            (2.0 / n_in as f64).sqrt()
        };
        for n in 0..n_in {
            *m.at_mut(k, n) =
                scale * (std::f64::consts::PI * (n as f64 + 0.5) * k as f64 / n_in as f64).cos();
        }
    }
    m
}

/// Extract LFCC features. A clip shorter than one frame yields an empty
/// matrix (zero rows, full width).
pub fn lfcc(clip: &AudioClip, cfg: &LfccConfig) -> Result<FeatureMatrix> {
    if cfg.n_ceps > cfg.n_filters {
        return Err(Error::InvalidConfig(format!(
            "n_ceps {} > n_filters {}",
            cfg.n_ceps, cfg.n_filters
        )));
    }
    let geometry = cfg.geometry(clip.sample_rate())?;
    let f_max = cfg.f_max_fraction * clip.sample_rate() as f64;
    let fb = linear_filterbank(cfg.n_filters, cfg.fft_size, clip.sample_rate(), f_max)?;
    let dct = dct_matrix(cfg.n_ceps, cfg.n_filters);

    let spec = spectral::stft(clip, geometry)?;
    let mags = spectral::magnitude(&spec);
    let t_count = mags.num_frames();

    let mut stat = Matrix::zeros(t_count, cfg.n_ceps);
    let mut power = vec![0.0f64; geometry.bins()];
    for t in 0..t_count {
        for (p, &m) in power.iter_mut().zip(mags.frame(t)) {
            *p = m * m;
        }
        let banked = fb.mat_vec(&power);
        let logged: Vec<f64> = banked.iter().map(|v| v.max(LOG_FLOOR).ln()).collect();
        let ceps = dct.mat_vec(&logged);
        stat.row_mut(t).copy_from_slice(&ceps);
    }

    let features = if cfg.include_deltas {
        let stat_fm = FeatureMatrix {
            features: stat.clone(),
            frame_len: geometry.frame_len,
            hop: geometry.hop,
            sample_rate: clip.sample_rate(),
        };
        let d = deltas(&stat_fm, 2);
        let dd = deltas(&d, 2);
        let mut out = Matrix::zeros(t_count, cfg.n_ceps * 3);
        for t in 0..t_count {
            let row = out.row_mut(t);
            row[..cfg.n_ceps].copy_from_slice(stat.row(t));
            row[cfg.n_ceps..2 * cfg.n_ceps].copy_from_slice(d.features.row(t));
            row[2 * cfg.n_ceps..].copy_from_slice(dd.features.row(t));
        }
        out
    } else {
        stat
    };

    Ok(FeatureMatrix {
        features,
        frame_len: geometry.frame_len,
        hop: geometry.hop,
        sample_rate: clip.sample_rate(),
    })
}

/// Regression deltas with edge replication:
/// `d_t = sum_k k*(f[t+k] - f[t-k]) / (2*sum_k k^2)`.
pub fn deltas(feat: &FeatureMatrix, width: usize) -> FeatureMatrix {
    let t_count = feat.features.rows();
    let dim = feat.features.cols();
    let denom: f64 = 2.0 * (1..=width).map(|k| (k * k) as f64).sum::<f64>();
    let mut out = Matrix::zeros(t_count, dim);
    let clamp = |t: isize| -> usize { t.clamp(0, t_count as isize - 1) as usize };
    for t in 0..t_count {
        for c in 0..dim {
            let mut acc = 0.0;
            for k in 1..=width {
                let ahead = feat.features.at(clamp(t as isize + k as isize), c);
                let behind = feat.features.at(clamp(t as isize - k as isize), c);
                acc += k as f64 * (ahead - behind);
            }
            *out.at_mut(t, c) = acc / denom;
        }
    }
    FeatureMatrix {
        features: out,
        frame_len: feat.frame_len,
        hop: feat.hop,
        sample_rate: feat.sample_rate,
    }
}
