use std::sync::Arc;

use rspscrn_client::{ClientError, ScreenClient};
use rspscrn_core::api::{Metadata, SessionState};
use rspscrn_core::dsp::encode_wav_pcm16;
use rspscrn_core::model::random_model;
use rspscrn_core::symptoms::{AgeBand, DecisionTree, SymptomRecord, TriState, N_FEATURES};
use rspscrn_core::{SoundCategory, Source};
use rspscrn_service::{serve_on, AppState, ServiceConfig, SystemClock};

async fn start() -> (tempfile::TempDir, String, tokio::sync::oneshot::Sender<()>) {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    std::fs::create_dir(&models).unwrap();
    let m = random_model(SoundCategory::CountingNormal, 64, 6, 3);
    std::fs::write(models.join(m.category().model_file_name()), m.to_bytes()).unwrap();
    let tree = dir.path().join("tree.json");
    std::fs::write(&tree, DecisionTree::constant(0.6, N_FEATURES).to_json()).unwrap();
    let cfg = ServiceConfig::new(models, tree, dir.path().join("data"));
    let state = AppState::from_config(cfg, Arc::new(SystemClock)).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = tokio::sync::oneshot::channel();
    tokio::spawn(serve_on(listener, state, async {
        let _ = rx.await;
    }));
    (dir, url, tx)
}

fn speechlike(secs: f64, rate: u32) -> Vec<u8> {
    let samples: Vec<f64> = (0..(secs * rate as f64) as usize)
        .map(|i| {
            let t = i as f64 / rate as f64;
            0.4 * (2.0 * std::f64::consts::PI * 180.0 * t).sin() * (1.0 + (2.0 * std::f64::consts::PI * 3.0 * t).sin())
        })
        .collect();
    encode_wav_pcm16(&samples, rate)
}

#[tokio::test]
async fn session_over_http() {
    let (_dir, url, stop) = start().await;
    let client = ScreenClient::new(&url).unwrap();
    assert!(client.health().await.unwrap().ok);
    assert_eq!(client.categories().await.unwrap().len(), 9);

    let id = client.create_session().await.unwrap();
    client
        .put_metadata(
            &id,
            &Metadata {
                age_band: AgeBand::Age46To60,
                gender: None,
                locale: "it-IT".into(),
            },
        )
        .await
        .unwrap();
    let mut rec = SymptomRecord::baseline();
    rec.fever = true;
    rec.contact_with_positive = TriState::Unknown;
    client.put_symptoms(&id, &rec).await.unwrap();
    let report = client
        .upload_audio(&id, SoundCategory::CountingNormal, speechlike(3.0, 22050))
        .await
        .unwrap();
    assert_eq!(report.sample_rate, 22050);

    let result = client.score(&id).await.unwrap();
    assert_eq!(result.per_source[&Source::Symptoms].value(), 0.6);
    assert_eq!(result.sources_used.len(), 2);
    assert_eq!(client.score(&id).await.unwrap(), result);

    let view = client.session(&id).await.unwrap();
    assert_eq!(view.state, SessionState::Scored);
    assert_eq!(view.symptoms, Some(rec));

    let err = client.put_symptoms(&id, &rec).await.unwrap_err();
    assert_eq!(err.code(), Some("SessionClosed"));
    let _ = stop.send(());
}

#[tokio::test]
async fn api_errors_are_typed() {
    let (_dir, url, stop) = start().await;
    let client = ScreenClient::new(&url).unwrap();
    match client.session(&format!("{:032x}", 5u128)).await {
        Err(ClientError::Api { status: 404, code, .. }) => assert_eq!(code, "UnknownSession"),
        other => panic!("{other:?}"),
    }
    let id = client.create_session().await.unwrap();
    let err = client
        .upload_audio(&id, SoundCategory::VowelO, b"RIFF....WAVE".to_vec())
        .await
        .unwrap_err();
    assert_eq!(err.code(), Some("MalformedContainer"));
    let err = client
        .put_symptoms_json(&id, &serde_json::json!({"cough": true}))
        .await
        .unwrap_err();
    assert_eq!(err.code(), Some("SchemaViolation"));
    let _ = stop.send(());
}

#[tokio::test]
async fn unreachable_server_is_a_transport_error() {
    let client = ScreenClient::new("http://127.0.0.1:9").unwrap();
    assert!(matches!(client.health().await, Err(ClientError::Transport(_))));
}
