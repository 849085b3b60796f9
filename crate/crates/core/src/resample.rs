//! Sample-rate conversion with a 6-tap Hann-windowed sinc kernel.
//!
//! The conversion is a fixed linear map of the input signal, so the same
//! tap plan doubles as a differentiable layer (see [`crate::autograd`]).

use crate::audio::AudioClip;
use crate::error::Result;

/// Number of interpolation taps per output sample.
pub const TAPS: usize = 6;
/// Half-width of the Hann window over the tap support, in input samples.
const HALF_WIDTH: f64 = (TAPS / 2) as f64;
/// Cutoff as a fraction of the lower Nyquist frequency.
const CUTOFF_RATIO: f64 = 0.9;

/// Windowed-sinc interpolation kernel between two rates.
#[derive(Debug, Clone, Copy)]
pub struct SincKernel {
    pub source_rate: u32,
    pub target_rate: u32,
    /// Lowpass cutoff in Hz: `0.9 * min(source, target) / 2`.
    pub cutoff: f64,
}

impl SincKernel {
    pub fn new(source_rate: u32, target_rate: u32) -> Self {
        assert!(source_rate > 0 && target_rate > 0);
        let cutoff = CUTOFF_RATIO * source_rate.min(target_rate) as f64 / 2.0;
        Self {
            source_rate,
            target_rate,
            cutoff,
        }
    }

    /// Output length for an input of `n` samples.
    pub fn output_len(&self, n: usize) -> usize {
        (n as f64 * self.target_rate as f64 / self.source_rate as f64).round() as usize
    }

    /// Unnormalized kernel value at offset `t` (in input samples).
    fn kernel(&self, t: f64) -> f64 {
        if t.abs() >= HALF_WIDTH {
            return 0.0;
        }
        // Hann window over the 6-tap support.
        let window = 0.5 * (1.0 + (std::f64::consts::PI * t / HALF_WIDTH).cos());
        let fc = self.cutoff / self.source_rate as f64; // cycles per input sample
        window * 2.0 * fc * sinc(2.0 * fc * t)
    }

    /// Tap plan for an input of `n` samples: per output sample, the
    /// in-range `(input_index, weight)` pairs with weights normalized to
    /// unit sum. Out-of-range taps are dropped before normalization, which
    /// keeps constants exactly constant at the edges.
    pub fn plan(&self, n: usize) -> Vec<Vec<(usize, f64)>> {
        let m = self.output_len(n);
        let ratio = self.source_rate as f64 / self.target_rate as f64;
        let mut rows = Vec::with_capacity(m);
        for out in 0..m {
            let p = out as f64 * ratio;
            let base = p.floor() as isize;
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(TAPS);
            let mut sum = 0.0;
            for k in (base - 2)..=(base + 3) {
                if k < 0 || k >= n as isize {
                    continue;
                }
                let w = self.kernel(p - k as f64);
                sum += w;
                row.push((k as usize, w));
            }
            debug_assert!(sum.abs() > 1e-12, "degenerate tap row at output {out}");
            for (_, w) in row.iter_mut() {
                *w /= sum;
            }
            rows.push(row);
        }
        rows
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Resample a clip to `target_rate`. Equal rates are an exact identity;
/// an empty clip stays empty.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    assert!(target_rate > 0, "target_rate must be positive");
    if target_rate == clip.sample_rate() {
        return Ok(clip.clone());
    }
    let kernel = SincKernel::new(clip.sample_rate(), target_rate);
    let plan = kernel.plan(clip.len());
    let x = clip.samples();
    let out: Vec<f64> = plan
        .iter()
        .map(|row| row.iter().map(|&(i, w)| w * x[i]).sum())
        .collect();
    Ok(AudioClip::new(out, target_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn length_formula() {
        let k = SincKernel::new(22050, 16000);
        assert_eq!(k.output_len(22050), 16000);
        assert_eq!(k.output_len(0), 0);
        assert_eq!(k.output_len(1), 1);
    }

    #[test]
    fn constant_preserved() {
        let clip = AudioClip::new(vec![0.5; 2205], 22050);
        let out = resample(&clip, 16000).unwrap();
        assert_eq!(out.len(), 1600);
        for (i, &s) in out.samples().iter().enumerate() {
            assert!((s - 0.5).abs() < 1e-6, "sample {i}: {s}");
        }
    }

    #[test]
    fn identity_when_rates_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let clip = AudioClip::new((0..500).map(|_| rng.gen_range(-1.0..1.0)).collect(), 16000);
        let out = resample(&clip, 16000).unwrap();
        for (a, b) in clip.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_input_empty_output() {
        let out = resample(&AudioClip::silence(0, 22050), 16000).unwrap();
        assert_eq!(out.len(), 0);
        assert_eq!(out.sample_rate(), 16000);
    }

    #[test]
    fn linear_in_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..1000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let doubled: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        let a = resample(&AudioClip::new(x, 22050), 16000).unwrap();
        let b = resample(&AudioClip::new(doubled, 22050), 16000).unwrap();
        for (u, v) in a.samples().iter().zip(b.samples()) {
            // power-of-two scale keeps the comparison exact in IEEE arithmetic
            assert_eq!(u * 2.0, *v);
        }
    }

    #[test]
    fn matches_explicit_matrix_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 64;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let clip = AudioClip::new(x.clone(), 22050);
        let out = resample(&clip, 16000).unwrap();

        let kernel = SincKernel::new(22050, 16000);
        let plan = kernel.plan(n);
        let m = kernel.output_len(n);
        // dense M x N matrix built from the plan
        let mut matrix = vec![vec![0.0f64; n]; m];
        for (r, row) in plan.iter().enumerate() {
            for &(i, w) in row {
                matrix[r][i] = w;
            }
        }
        for r in 0..m {
            let expect: f64 = matrix[r].iter().zip(&x).map(|(w, v)| w * v).sum();
            assert!((out.samples()[r] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn tone_survives_downsampling() {
        // 1 kHz tone, amplitude 0.5, 22050 -> 16000
        let n_in = 22050;
        let clip = AudioClip::new(
            (0..n_in)
                .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 22050.0).sin())
                .collect(),
            22050,
        );
        let out = resample(&clip, 16000).unwrap();
        assert_eq!(out.len(), 16000);

        // windowed FFT of 8192 samples: 1 kHz falls exactly on bin 512
        let fft_size = 8192;
        let window = crate::spectral::hann_window(fft_size);
        let mut buf: Vec<Complex64> = (0..fft_size)
            .map(|i| Complex64::new(out.samples()[i] * window[i], 0.0))
            .collect();
        rustfft::FftPlanner::new()
            .plan_fft_forward(fft_size)
            .process(&mut buf);

        let mags: Vec<f64> = buf[..fft_size / 2 + 1].iter().map(|c| c.norm()).collect();
        let peak = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(
            (peak as isize - 512).unsigned_abs() <= 1,
            "peak at bin {peak}, expected 512 +/- 1"
        );

        let coherent_gain: f64 = window.iter().sum();
        let amplitude = mags[peak] * 2.0 / coherent_gain;
        let db = 20.0 * (amplitude / 0.5).log10();
        assert!(db.abs() <= 1.0, "amplitude error {db:.3} dB");
    }
}
