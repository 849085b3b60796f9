//! Minimal RIFF/WAVE reader and writer for 16-bit PCM.
//!
//! Only the format the experiments need is supported: 16-bit integer PCM,
//! any channel count on read (downmixed to mono by averaging), always mono
//! on write. Everything else is rejected with a distinct error.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
// WAVE_FORMAT_EXTENSIBLE; accepted when the sub-format is PCM.
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Read a 16-bit PCM WAV file. Multi-channel input is averaged to mono.
/// Samples are scaled to `[-1, 1)` by dividing by 32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes).map_err(|e| match e {
        WavParseError::NotWav(m) => Error::NotWav(format!("{}: {m}", path.display())),
        WavParseError::Malformed(m) => Error::MalformedWav(format!("{}: {m}", path.display())),
        WavParseError::Unsupported(m) => {
            Error::UnsupportedWavEncoding(format!("{}: {m}", path.display()))
        }
    })
}

/// Write a clip as mono 16-bit PCM. Samples are clipped to `[-1, 1 - 2^-15]`
/// and quantized by rounding `s * 32768` to the nearest integer.
pub fn save_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = clip.len();
    let data_len = 2 * n;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");

    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // channels
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    let byte_rate = clip.sample_rate() * 2;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample

    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in clip.samples() {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }

    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn quantize(s: f64) -> i16 {
    let clipped = s.clamp(-1.0, 1.0 - f64::powi(2.0, -15));
    (clipped * 32768.0).round() as i16
}

enum WavParseError {
    NotWav(String),
    Malformed(String),
    Unsupported(String),
}

fn parse_wav(bytes: &[u8]) -> std::result::Result<AudioClip, WavParseError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavParseError::NotWav("missing RIFF/WAVE magic".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;

    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            return Err(WavParseError::Malformed(format!(
                "chunk '{}' overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(WavParseError::Malformed("fmt chunk too small".into()));
                }
                let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {} // skip LIST, fact, etc.
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| WavParseError::Malformed("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| WavParseError::Malformed("missing data chunk".into()))?;

    if format != FORMAT_PCM && format != FORMAT_EXTENSIBLE {
        return Err(WavParseError::Unsupported(format!(
            "format tag {format}, expected PCM"
        )));
    }
    if bits != 16 {
        return Err(WavParseError::Unsupported(format!("{bits}-bit samples")));
    }
    if channels == 0 {
        return Err(WavParseError::Malformed("zero channels".into()));
    }
    if rate == 0 {
        return Err(WavParseError::Malformed("zero sample rate".into()));
    }

    let ch = channels as usize;
    let n_frames = data.len() / (2 * ch);
    let mut samples = Vec::with_capacity(n_frames);
    for frame in 0..n_frames {
        let mut acc = 0.0f64;
        for c in 0..ch {
            let off = (frame * ch + c) * 2;
            let v = i16::from_le_bytes(data[off..off + 2].try_into().unwrap());
            acc += v as f64 / 32768.0;
        }
        samples.push(acc / ch as f64);
    }
    Ok(AudioClip::new(samples, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn raw_wav(channels: u16, rate: u32, pcm: &[i16]) -> Vec<u8> {
        let data_len = pcm.len() * 2;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * 2 * channels as u32).to_le_bytes());
        out.extend_from_slice(&(2 * channels).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data_len as u32).to_le_bytes());
        for &s in pcm {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    fn write_temp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), bytes).unwrap();
        f
    }

    #[test]
    fn scaling_definition() {
        let f = write_temp(&raw_wav(1, 16000, &[0, 16384, -32768]));
        let clip = load_wav(f.path()).unwrap();
        assert_eq!(clip.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(clip.sample_rate(), 16000);
    }

    #[test]
    fn empty_data_is_length_zero() {
        let f = write_temp(&raw_wav(1, 8000, &[]));
        let clip = load_wav(f.path()).unwrap();
        assert_eq!(clip.len(), 0);
    }

    #[test]
    fn stereo_downmix_is_mean() {
        // one frame with channels [0.2, 0.4] -> 0.3
        let l = (0.2f64 * 32768.0).round() as i16;
        let r = (0.4f64 * 32768.0).round() as i16;
        let f = write_temp(&raw_wav(2, 44100, &[l, r]));
        let clip = load_wav(f.path()).unwrap();
        assert_eq!(clip.len(), 1);
        assert!((clip.samples()[0] - 0.3).abs() < 1.0 / 32768.0);
    }

    #[test]
    fn missing_file_is_io_error() {
        match load_wav("/nonexistent/definitely-missing.wav") {
            Err(Error::Io { .. }) => {}
            other => panic!("expected Io error, got {other:?}"),
        }
    }

    #[test]
    fn garbage_is_not_wav() {
        let f = write_temp(b"this is not a wav file at all, sorry");
        match load_wav(f.path()) {
            Err(Error::NotWav(_)) => {}
            other => panic!("expected NotWav, got {other:?}"),
        }
    }

    #[test]
    fn non_pcm_rejected() {
        let mut bytes = raw_wav(1, 8000, &[0, 0]);
        // format tag lives at offset 20
        bytes[20] = 3; // IEEE float
        let f = write_temp(&bytes);
        match load_wav(f.path()) {
            Err(Error::UnsupportedWavEncoding(_)) => {}
            other => panic!("expected UnsupportedWavEncoding, got {other:?}"),
        }
    }

    #[test]
    fn truncated_chunk_rejected() {
        let mut bytes = raw_wav(1, 8000, &[1, 2, 3]);
        bytes.truncate(bytes.len() - 2);
        let f = write_temp(&bytes);
        match load_wav(f.path()) {
            Err(Error::MalformedWav(_)) => {}
            other => panic!("expected MalformedWav, got {other:?}"),
        }
    }

    #[test]
    fn save_zero_round_trips() {
        let f = tempfile::NamedTempFile::new().unwrap();
        save_wav(&AudioClip::new(vec![0.0], 16000), f.path()).unwrap();
        let back = load_wav(f.path()).unwrap();
        assert_eq!(back.samples(), &[0.0]);
    }

    #[test]
    fn save_clips_out_of_range() {
        let f = tempfile::NamedTempFile::new().unwrap();
        save_wav(&AudioClip::new(vec![2.0, -2.0], 16000), f.path()).unwrap();
        let back = load_wav(f.path()).unwrap();
        let max_16 = (32767.0f64) / 32768.0;
        assert!((back.samples()[0] - max_16).abs() < 1e-12);
        assert!((back.samples()[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_round_trip_within_one_lsb() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let clip = AudioClip::new(samples, 22050);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_wav(&clip, f.path()).unwrap();
        let back = load_wav(f.path()).unwrap();
        assert_eq!(back.len(), clip.len());
        assert_eq!(back.sample_rate(), 22050);
        let lsb = f64::powi(2.0, -15);
        for (a, b) in clip.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= lsb, "round-trip error {} > 1 LSB", (a - b).abs());
        }
    }
}
