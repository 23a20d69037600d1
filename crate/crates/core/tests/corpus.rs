use std::path::Path;
use std::sync::Arc;

use rspscrn_core::corpus::{score_corpus, write_scores_csv, Manifest};
use rspscrn_core::dsp::{encode_wav_pcm16, AdmissionConfig, DspConfig};
use rspscrn_core::model::random_model;
use rspscrn_core::pipeline::{AudioFrontEnd, ModelSet, PipelineError};
use rspscrn_core::SoundCategory;

fn tone(secs: f64, rate: u32, f: f64) -> Vec<u8> {
    let xs: Vec<f64> = (0..(secs * rate as f64) as usize)
        .map(|i| 0.4 * (2.0 * std::f64::consts::PI * f * i as f64 / rate as f64).sin())
        .collect();
    encode_wav_pcm16(&xs, rate)
}

fn setup(dir: &Path) -> (Manifest, AudioFrontEnd, ModelSet) {
    std::fs::write(dir.join("a.wav"), tone(1.5, 16000, 300.0)).unwrap();
    std::fs::write(dir.join("b.wav"), b"RIFF\x10\x00\x00\x00WAVEjunk").unwrap();
    std::fs::write(dir.join("c.wav"), tone(2.0, 44100, 900.0)).unwrap();
    std::fs::write(dir.join("d.wav"), tone(0.4, 16000, 900.0)).unwrap();
    let text = "path,category,label,subject_id\n\
                a.wav,cough-heavy,1,s1\n\
                b.wav,cough-heavy,0,s2\n\
                c.wav,vowel-a,0,s3\n\
                d.wav,vowel-a,1,s4\n\
                missing.wav,vowel-a,1,s5\n";
    let manifest = Manifest::from_reader(text.as_bytes(), dir).unwrap();
    let mut models = ModelSet::new();
    for (i, c) in [SoundCategory::CoughHeavy, SoundCategory::VowelA].into_iter().enumerate() {
        models.insert(c, Arc::new(random_model(c, 64, 8, i as u64)));
    }
    let fe = AudioFrontEnd::new(DspConfig::default(), AdmissionConfig::default()).unwrap();
    (manifest, fe, models)
}

#[test]
fn bad_files_are_flagged_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, fe, models) = setup(dir.path());
    let rows = score_corpus(&manifest, &fe, &models).unwrap();
    let outcomes: Vec<Result<(), &str>> = rows.iter().map(|r| r.outcome.as_ref().map(|_| ()).map_err(String::as_str)).collect();
    assert_eq!(
        outcomes,
        vec![Ok(()), Err("MalformedContainer"), Ok(()), Err("TooShortOrLong"), Err("Io")]
    );
    for r in &rows {
        if let Ok(s) = r.outcome {
            assert!(s > 0.0 && s < 1.0);
        }
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, fe, models) = setup(dir.path());
    let render = || {
        let mut out = Vec::new();
        write_scores_csv(&score_corpus(&manifest, &fe, &models).unwrap(), &mut out).unwrap();
        out
    };
    let first = render();
    for _ in 0..3 {
        assert_eq!(render(), first);
    }
    let text = String::from_utf8(first).unwrap();
    assert!(text.lines().nth(2).unwrap().ends_with(",error:MalformedContainer,0"));
}

#[test]
fn missing_model_fails_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, fe, mut models) = setup(dir.path());
    models.remove(&SoundCategory::VowelA);
    assert!(matches!(
        score_corpus(&manifest, &fe, &models),
        Err(PipelineError::ModelMissing(SoundCategory::VowelA))
    ));
}
