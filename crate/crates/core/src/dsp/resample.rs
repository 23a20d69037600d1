use super::AudioClip;

/// Zero crossings of the sinc kernel on each side of the output instant,
/// measured at the lower of the two rates. 8 per side = 16 taps per phase.
const HALF_ZERO_CROSSINGS: f64 = 8.0;
const KAISER_BETA: f64 = 8.6;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Polyphase kernel table. Phase `p` holds the taps for an output instant
/// sitting `p / phases` input samples past an integer input index.
struct Kernel {
    phases: usize,
    /// taps per phase; tap `j` applies to input index `base - reach + 1 + j`
    width: usize,
    reach: usize,
    taps: Vec<f64>,
}

impl Kernel {
    fn new(phases: usize, cutoff: f64) -> Kernel {
        let half_width = HALF_ZERO_CROSSINGS / cutoff;
        let reach = half_width.ceil() as usize;
        let width = 2 * reach;
        let norm = bessel_i0(KAISER_BETA);
        let mut taps = vec![0.0; phases * width];
        for p in 0..phases {
            let frac = p as f64 / phases as f64;
            let row = &mut taps[p * width..(p + 1) * width];
            for (j, tap) in row.iter_mut().enumerate() {
                // distance from the output instant to this input sample
                let d = frac - (j as f64 - reach as f64 + 1.0);
                let r = d / half_width;
                if r.abs() < 1.0 {
                    let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm;
                    *tap = cutoff * sinc(cutoff * d) * window;
                }
            }
            // unit DC gain per phase
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|t| *t /= sum);
        }
        Kernel {
            phases,
            width,
            reach,
            taps,
        }
    }
}

/// Band-limited resampling with a Kaiser-windowed sinc kernel. The signal is
/// extended past both ends by repeating the edge samples.
pub fn resample(clip: &AudioClip, target_rate: u32) -> AudioClip {
    assert!(target_rate > 0, "target_rate must be positive");
    let from = clip.sample_rate() as u64;
    let to = target_rate as u64;
    if from == to {
        return clip.clone();
    }
    let g = gcd(from, to);
    let (up, down) = (to / g, from / g);
    let cutoff = (to as f64 / from as f64).min(1.0);
    let kernel = Kernel::new(up as usize, cutoff);

    let input = clip.samples();
    let n_in = input.len() as u64;
    let n_out = ((n_in * to + from / 2) / from).max(1) as usize;
    let last = input.len() as i64 - 1;

    let mut out = Vec::with_capacity(n_out);
    for n in 0..n_out as u64 {
        // output instant n / to seconds = n * down / up input samples
        let pos = n * down;
        let base = (pos / up) as i64;
        let phase = (pos % up) as usize;
        let row = &kernel.taps[phase * kernel.width..(phase + 1) * kernel.width];
        let first = base - kernel.reach as i64 + 1;
        let mut acc = 0.0;
        for (j, w) in row.iter().enumerate() {
            let idx = (first + j as i64).clamp(0, last) as usize;
            acc += w * input[idx];
        }
        out.push(acc.clamp(-1.0, 1.0));
    }
    debug_assert_eq!(out.len(), n_out);
    debug_assert!(kernel.phases == up as usize);
    AudioClip::from_parts(out, target_rate, clip.category)
}
