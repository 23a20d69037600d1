use super::{AudioClip, DspError};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn malformed(msg: impl Into<String>) -> DspError {
    DspError::MalformedContainer(msg.into())
}

fn parse_fmt(body: &[u8]) -> Result<Format, DspError> {
    if body.len() < 16 {
        return Err(malformed(format!("fmt chunk is {} bytes, need 16", body.len())));
    }
    let mut tag = read_u16(body, 0);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then a GUID whose first two
        // bytes carry the real format tag.
        if body.len() < 40 {
            return Err(malformed("truncated WAVE_FORMAT_EXTENSIBLE fmt chunk"));
        }
        tag = read_u16(body, 24);
    }
    Ok(Format {
        tag,
        channels: read_u16(body, 2),
        sample_rate: read_u32(body, 4),
        bits_per_sample: read_u16(body, 14),
    })
}

/// Decodes a RIFF/WAVE byte buffer holding 16-bit PCM or 32-bit float
/// samples in one or two channels. Stereo is averaged to mono.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, DspError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing RIFF/WAVE magic"));
    }
    let riff_size = read_u32(bytes, 4) as usize;
    if riff_size + 8 > bytes.len() || riff_size < 4 {
        return Err(malformed(format!(
            "RIFF size {riff_size} inconsistent with {} byte buffer",
            bytes.len()
        )));
    }
    let end = riff_size + 8;

    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= end {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= end)
            .ok_or_else(|| {
                malformed(format!(
                    "chunk `{}` of {size} bytes overruns the container",
                    String::from_utf8_lossy(id)
                ))
            })?;
        match id {
            b"fmt " => format = Some(parse_fmt(&bytes[body_start..body_end])?),
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let format = format.ok_or_else(|| malformed("no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("no data chunk"))?;

    if format.sample_rate == 0 {
        return Err(malformed("sample rate is zero"));
    }
    if !(1..=2).contains(&format.channels) {
        return Err(DspError::UnsupportedEncoding(format!(
            "{} channels",
            format.channels
        )));
    }
    let channels = format.channels as usize;

    let interleaved: Vec<f64> = match (format.tag, format.bits_per_sample) {
        (FORMAT_PCM, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
            .collect(),
        (FORMAT_IEEE_FLOAT, 32) => {
            let mut out = Vec::with_capacity(data.len() / 4);
            for c in data.chunks_exact(4) {
                let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                if !v.is_finite() {
                    return Err(malformed("non-finite float sample"));
                }
                out.push((v as f64).clamp(-1.0, 1.0));
            }
            out
        }
        (tag, bits) => {
            return Err(DspError::UnsupportedEncoding(format!(
                "format tag {tag:#06x} with {bits} bits per sample"
            )))
        }
    };

    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if samples.is_empty() {
        return Err(DspError::EmptyAudio);
    }
    AudioClip::new(samples, format.sample_rate)
}

/// Writes mono 16-bit PCM. Samples are clamped to `[-1, 1]` and scaled by
/// 32767 with rounding.
pub fn encode_wav_pcm16(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(tag: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let block = channels * bits / 8;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&((36 + data.len()) as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * block as u32).to_le_bytes());
        out.extend_from_slice(&block.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn two_zero_samples() {
        let clip = decode_wav(&header(1, 1, 8000, 16, &[0, 0, 0, 0])).unwrap();
        assert_eq!(clip.samples(), &[0.0, 0.0]);
        assert_eq!(clip.sample_rate(), 8000);
    }

    #[test]
    fn most_negative_pcm16_is_minus_one() {
        let clip = decode_wav(&header(1, 1, 8000, 16, &i16::MIN.to_le_bytes())).unwrap();
        assert_eq!(clip.samples(), &[-1.0]);
    }

    #[test]
    fn stereo_is_averaged() {
        let mut data = Vec::new();
        for v in [16384i16, 0, -16384, -16384] {
            data.extend_from_slice(&v.to_le_bytes());
        }
        let clip = decode_wav(&header(1, 2, 8000, 16, &data)).unwrap();
        assert_eq!(clip.samples(), &[0.25, -0.5]);
    }

    #[test]
    fn float32_samples() {
        let mut data = Vec::new();
        for v in [0.5f32, -0.25] {
            data.extend_from_slice(&v.to_le_bytes());
        }
        let clip = decode_wav(&header(3, 1, 22050, 32, &data)).unwrap();
        assert_eq!(clip.samples(), &[0.5, -0.25]);
    }

    #[test]
    fn error_cases() {
        assert!(matches!(decode_wav(b"RIFX"), Err(DspError::MalformedContainer(_))));
        let mut bad_magic = header(1, 1, 8000, 16, &[0, 0]);
        bad_magic[8..12].copy_from_slice(b"AVI ");
        assert!(matches!(decode_wav(&bad_magic), Err(DspError::MalformedContainer(_))));

        let mut overrun = header(1, 1, 8000, 16, &[0, 0]);
        let n = overrun.len();
        overrun[n - 6..n - 2].copy_from_slice(&1000u32.to_le_bytes());
        assert!(matches!(decode_wav(&overrun), Err(DspError::MalformedContainer(_))));

        assert!(matches!(
            decode_wav(&header(1, 1, 8000, 8, &[0, 0])),
            Err(DspError::UnsupportedEncoding(_))
        ));
        assert!(matches!(
            decode_wav(&header(0x55, 1, 8000, 16, &[0, 0])),
            Err(DspError::UnsupportedEncoding(_))
        ));
        assert!(matches!(
            decode_wav(&header(1, 3, 8000, 16, &[0; 6])),
            Err(DspError::UnsupportedEncoding(_))
        ));
        assert_eq!(decode_wav(&header(1, 1, 8000, 16, &[])), Err(DspError::EmptyAudio));
    }

    #[test]
    fn skips_unknown_chunks_with_padding() {
        let base = header(1, 1, 8000, 16, &[1, 0]);
        // splice a 3-byte LIST chunk (padded to 4) between fmt and data
        let mut bytes = base[..36].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[9, 9, 9, 0]);
        bytes.extend_from_slice(&base[36..]);
        let riff = (bytes.len() - 8) as u32;
        bytes[4..8].copy_from_slice(&riff.to_le_bytes());
        let clip = decode_wav(&bytes).unwrap();
        assert_eq!(clip.samples(), &[1.0 / 32768.0]);
    }

    #[test]
    fn encoder_round_trip() {
        let s = vec![0.0, 0.5, -0.5, 1.0, -1.0];
        let clip = decode_wav(&encode_wav_pcm16(&s, 16000)).unwrap();
        for (a, b) in clip.samples().iter().zip(&s) {
            assert!((a - b).abs() <= 1.0 / 32768.0 + 1e-12);
        }
    }
}
