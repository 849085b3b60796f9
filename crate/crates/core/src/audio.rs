//! Waveform container shared by every stage of the toolkit.

/// A mono waveform with an associated sample rate.
///
/// Samples are stored as `f64` in nominal range `[-1, 1]`. All processing in
/// the crate is done in double precision; conversion to 16-bit PCM happens
/// only at the WAV boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    /// Wrap samples at the given rate. Panics on a zero sample rate or
    /// non-finite samples; those are construction bugs, not runtime data.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample_rate must be positive");
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    /// An all-zero clip of `len` samples.
    pub fn silence(len: usize, sample_rate: u32) -> Self {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Root-mean-square level over the whole clip; 0.0 for an empty clip.
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum_sq: f64 = self.samples.iter().map(|s| s * s).sum();
        (sum_sq / self.samples.len() as f64).sqrt()
    }

    /// Largest absolute sample value; 0.0 for an empty clip.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rms_of_constant() {
        let clip = AudioClip::new(vec![0.5; 100], 8000);
        assert!((clip.rms() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rms_and_peak_of_empty() {
        let clip = AudioClip::silence(0, 8000);
        assert_eq!(clip.rms(), 0.0);
        assert_eq!(clip.peak(), 0.0);
        assert!(clip.is_empty());
    }

    #[test]
    fn duration() {
        let clip = AudioClip::silence(16000, 16000);
        assert!((clip.duration() - 1.0).abs() < 1e-12);
    }
}
