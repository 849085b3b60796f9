//! STFT analysis/synthesis and mel projection.
//!
//! Conventions used throughout the crate:
//! - periodic Hann window,
//! - no padding: trailing samples shorter than a frame are dropped, so
//!   `T = 1 + floor((N - frame_len) / hop)`,
//! - inversion by weighted overlap-add with window-sum normalization,
//! - every log of a magnitude is floored at [`LOG_FLOOR`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Floor applied inside every `log(magnitude)` in the crate.
pub const LOG_FLOOR: f64 = 1e-9;

/// Frame/hop/FFT-size triple for STFT-based processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftGeometry {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
}

impl StftGeometry {
    pub fn new(frame_len: usize, hop: usize, fft_size: usize) -> Result<Self> {
        let g = Self {
            frame_len,
            hop,
            fft_size,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 || self.hop == 0 || self.fft_size == 0 {
            return Err(Error::InvalidGeometry(
                "frame_len, hop and fft_size must be positive".into(),
            ));
        }
        if self.hop > self.frame_len {
            return Err(Error::InvalidGeometry(format!(
                "hop {} > frame_len {}",
                self.hop, self.frame_len
            )));
        }
        if self.frame_len > self.fft_size {
            return Err(Error::InvalidGeometry(format!(
                "frame_len {} > fft_size {}",
                self.frame_len, self.fft_size
            )));
        }
        Ok(())
    }

    /// Number of frequency bins kept from a real FFT.
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frame count for a signal of `n` samples (no padding).
    pub fn frame_count(&self, n: usize) -> usize {
        if n < self.frame_len {
            0
        } else {
            1 + (n - self.frame_len) / self.hop
        }
    }
}

/// Complex STFT frames, `T x K` with `K = fft_size/2 + 1`.
#[derive(Debug, Clone)]
pub struct ComplexSpectrogram {
    pub(crate) frames: Vec<Complex64>,
    geometry: StftGeometry,
    num_frames: usize,
    sample_rate: u32,
}

impl ComplexSpectrogram {
    pub fn geometry(&self) -> StftGeometry {
        self.geometry
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn bins(&self) -> usize {
        self.geometry.bins()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let k = self.bins();
        &self.frames[t * k..(t + 1) * k]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex64] {
        let k = self.bins();
        &mut self.frames[t * k..(t + 1) * k]
    }
}

/// Non-negative magnitude frames with the same geometry as the complex view.
#[derive(Debug, Clone)]
pub struct MagnitudeSpectrogram {
    pub(crate) frames: Matrix,
    geometry: StftGeometry,
    sample_rate: u32,
}

impl MagnitudeSpectrogram {
    pub fn geometry(&self) -> StftGeometry {
        self.geometry
    }

    pub fn num_frames(&self) -> usize {
        self.frames.rows()
    }

    pub fn bins(&self) -> usize {
        self.frames.cols()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        self.frames.row(t)
    }

    pub fn frames(&self) -> &Matrix {
        &self.frames
    }

    /// Largest magnitude across all frames and bins; 0.0 if empty.
    pub fn max_value(&self) -> f64 {
        self.frames.data().iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Periodic Hann window of length `len`.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos()))
        .collect()
}

thread_local! {
    static FFT_CACHE: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn cached_fft(size: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    FFT_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((size, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(size)
                } else {
                    planner.plan_fft_forward(size)
                }
            })
            .clone()
    })
}

/// Forward STFT with a periodic Hann window. Frames shorter than
/// `frame_len` at the tail are dropped.
pub fn stft(clip: &AudioClip, geometry: StftGeometry) -> Result<ComplexSpectrogram> {
    geometry.validate()?;
    let StftGeometry {
        frame_len,
        hop,
        fft_size,
    } = geometry;
    let window = hann_window(frame_len);
    let num_frames = geometry.frame_count(clip.len());
    let bins = geometry.bins();
    let fft = cached_fft(fft_size, false);

    let mut frames = Vec::with_capacity(num_frames * bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    for t in 0..num_frames {
        let start = t * hop;
        for (j, w) in window.iter().enumerate() {
            buf[j] = Complex64::new(clip.samples()[start + j] * w, 0.0);
        }
        for b in buf.iter_mut().take(fft_size).skip(frame_len) {
            *b = Complex64::new(0.0, 0.0);
        }
        fft.process(&mut buf);
        frames.extend_from_slice(&buf[..bins]);
    }

    Ok(ComplexSpectrogram {
        frames,
        geometry,
        num_frames,
        sample_rate: clip.sample_rate(),
    })
}

/// Inverse STFT by weighted overlap-add.
///
/// Requires `hop == frame_len/2` or `hop == frame_len/4` (Hann COLA
/// geometries). Output length is `(T-1)*hop + frame_len`; the first and
/// last `frame_len` samples carry edge taper and are excluded from the
/// reconstruction guarantee.
pub fn istft(spec: &ComplexSpectrogram) -> Result<AudioClip> {
    let StftGeometry {
        frame_len,
        hop,
        fft_size,
    } = spec.geometry();
    let cola = (frame_len % 2 == 0 && hop == frame_len / 2)
        || (frame_len % 4 == 0 && hop == frame_len / 4);
    if !cola {
        return Err(Error::NonColaGeometry { frame_len, hop });
    }

    let t_count = spec.num_frames();
    if t_count == 0 {
        return Ok(AudioClip::silence(0, spec.sample_rate()));
    }

    let window = hann_window(frame_len);
    let out_len = (t_count - 1) * hop + frame_len;
    let mut acc = vec![0.0f64; out_len];
    let mut wsum = vec![0.0f64; out_len];

    let ifft = cached_fft(fft_size, true);
    let bins = spec.bins();
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    for t in 0..t_count {
        let frame = spec.frame(t);
        buf[..bins].copy_from_slice(frame);
        // Hermitian symmetry for a real time-domain frame.
        for k in 1..fft_size - bins + 1 {
            buf[bins - 1 + k] = frame[bins - 1 - k].conj();
        }
        ifft.process(&mut buf);
        let start = t * hop;
        let scale = 1.0 / fft_size as f64;
        for (j, w) in window.iter().enumerate() {
            acc[start + j] += buf[j].re * scale * w;
            wsum[start + j] += w * w;
        }
    }

    for (a, w) in acc.iter_mut().zip(&wsum) {
        *a /= w.max(1e-8);
    }
    Ok(AudioClip::new(acc, spec.sample_rate()))
}

/// Entrywise complex modulus.
pub fn magnitude(spec: &ComplexSpectrogram) -> MagnitudeSpectrogram {
    let bins = spec.bins();
    let data: Vec<f64> = spec.frames.iter().map(|c| c.norm()).collect();
    MagnitudeSpectrogram {
        frames: Matrix::from_flat(spec.num_frames(), bins, data),
        geometry: spec.geometry(),
        sample_rate: spec.sample_rate(),
    }
}

/// Rebuild a complex spectrogram from modified magnitudes, keeping the
/// phase of `reference`. Zero-magnitude reference bins take phase 0.
pub fn with_magnitudes(
    reference: &ComplexSpectrogram,
    mags: &MagnitudeSpectrogram,
) -> ComplexSpectrogram {
    assert_eq!(reference.num_frames(), mags.num_frames());
    assert_eq!(reference.bins(), mags.bins());
    let mut out = reference.clone();
    for (c, &m) in out.frames.iter_mut().zip(mags.frames.data()) {
        let norm = c.norm();
        *c = if norm > 0.0 {
            *c * (m / norm)
        } else {
            Complex64::new(m, 0.0)
        };
    }
    out
}

/// Mel scale: `2595 * log10(1 + f/700)`.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

/// Inverse of [`hz_to_mel`].
pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank, `n_mels x (fft_size/2 + 1)`, peak 1 per filter.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    weights: Matrix,
    pub f_min: f64,
    pub f_max: f64,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.weights.rows()
    }

    pub fn bins(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Project one magnitude frame onto the filterbank.
    pub fn apply(&self, frame: &[f64]) -> Vec<f64> {
        self.weights.mat_vec(frame)
    }
}

/// Build a triangular filterbank with centers uniform on the mel scale.
pub fn mel_filterbank(
    n_mels: usize,
    fft_size: usize,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
) -> Result<MelFilterbank> {
    if n_mels == 0 {
        return Err(Error::InvalidFrequencyRange("n_mels must be positive".into()));
    }
    let nyquist = sample_rate as f64 / 2.0;
    if !(0.0..nyquist).contains(&f_min) || f_max <= f_min || f_max > nyquist {
        return Err(Error::InvalidFrequencyRange(format!(
            "need 0 <= f_min < f_max <= {nyquist}, got [{f_min}, {f_max}]"
        )));
    }

    let mel_lo = hz_to_mel(f_min);
    let mel_hi = hz_to_mel(f_max);
    let points: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let weights = triangle_rows(&points, fft_size, sample_rate)?;
    Ok(MelFilterbank {
        weights,
        f_min,
        f_max,
    })
}

/// Fill triangle filter rows given `n_filters + 2` edge/center points in Hz.
pub(crate) fn triangle_rows(points: &[f64], fft_size: usize, sample_rate: u32) -> Result<Matrix> {
    let n_filters = points.len() - 2;
    let bins = fft_size / 2 + 1;
    let mut weights = Matrix::zeros(n_filters, bins);
    for i in 0..n_filters {
        let (lo, center, hi) = (points[i], points[i + 1], points[i + 2]);
        let row = weights.row_mut(i);
        let mut any = false;
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * sample_rate as f64 / fft_size as f64;
            let v = if f > lo && f <= center {
                (f - lo) / (center - lo)
            } else if f > center && f < hi {
                (hi - f) / (hi - center)
            } else {
                0.0
            };
            *w = v;
            any |= v > 0.0;
        }
        if !any {
            return Err(Error::InvalidFrequencyRange(format!(
                "filter {i} ({lo:.1}-{hi:.1} Hz) covers no FFT bins"
            )));
        }
    }
    Ok(weights)
}

/// `log(max(fb . |stft(clip)|, LOG_FLOOR))`, one row per frame.
pub fn log_mel(clip: &AudioClip, fb: &MelFilterbank, geometry: StftGeometry) -> Result<Matrix> {
    let mags = magnitude(&stft(clip, geometry)?);
    assert_eq!(fb.bins(), geometry.bins(), "filterbank/geometry mismatch");
    let t_count = mags.num_frames();
    let mut out = Matrix::zeros(t_count, fb.n_mels());
    for t in 0..t_count {
        let projected = fb.apply(mags.frame(t));
        for (o, p) in out.row_mut(t).iter_mut().zip(projected) {
            *o = p.max(LOG_FLOOR).ln();
        }
    }
    Ok(out)
}
