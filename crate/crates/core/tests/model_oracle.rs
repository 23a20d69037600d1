use proptest::prelude::*;
use rspscrn_core::dsp::{DspConfig, MelSpectrogram};
use rspscrn_core::model::{random_model, BlstmModel, LstmParams};
use rspscrn_core::SoundCategory;
use rspscrn_oracles::lstm;

fn oracle_params(p: &LstmParams) -> lstm::LstmParams {
    lstm::LstmParams {
        input_dim: p.input_dim(),
        hidden: p.hidden_dim(),
        w: p.w().to_vec(),
        u: p.u().to_vec(),
        b: p.b().to_vec(),
    }
}

fn case() -> impl Strategy<Value = (usize, usize, u64, Vec<Vec<f64>>)> {
    (1usize..=4, 1usize..=4, any::<u64>(), 1usize..=5).prop_flat_map(|(d, h, seed, t)| {
        (
            Just(d),
            Just(h),
            Just(seed),
            prop::collection::vec(prop::collection::vec(-20.0f64..5.0, d), t),
        )
    })
}

fn spectrogram(frames: &[Vec<f64>]) -> MelSpectrogram {
    MelSpectrogram::from_frames(frames[0].len(), frames.concat(), DspConfig::default()).unwrap()
}

proptest! {
    #[test]
    fn matches_scalar_oracle((d, h, seed, frames) in case()) {
        let m = random_model(SoundCategory::VowelO, d, h, seed);
        let got = m.forward(&spectrogram(&frames)).unwrap().value.value();
        let want = lstm::blstm_score(
            &frames,
            m.feat_mean(),
            m.feat_std(),
            &oracle_params(m.forward_params()),
            &oracle_params(m.backward_params()),
            m.dense_w(),
            m.dense_b(),
        );
        prop_assert!((got - want).abs() <= 1e-10);
        prop_assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn hidden_states_bounded((d, h, seed, frames) in case()) {
        let m = random_model(SoundCategory::VowelO, d, h, seed);
        let (fwd, bwd) = m.hidden_states(&spectrogram(&frames)).unwrap();
        prop_assert_eq!(fwd.len(), frames.len());
        for v in fwd.iter().chain(&bwd).flatten() {
            prop_assert!((-1.0..=1.0).contains(v));
        }
    }

    #[test]
    fn bytes_round_trip((d, h, seed, frames) in case()) {
        let m = random_model(SoundCategory::CountingFast, d, h, seed);
        let bytes = m.to_bytes();
        let back = BlstmModel::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        let feat = spectrogram(&frames);
        prop_assert_eq!(back.forward(&feat).unwrap(), m.forward(&feat).unwrap());
    }
}
