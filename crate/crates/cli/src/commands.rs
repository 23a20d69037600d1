use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};

use rspscrn_client::ScreenClient;
use rspscrn_core::corpus::{read_scores_csv, score_corpus, write_scores_csv, Manifest};
use rspscrn_core::dsp::{AdmissionConfig, DspConfig};
use rspscrn_core::eval::{compute_auc, compute_roc, RocPoint};
use rspscrn_core::features::encode_features;
use rspscrn_core::fusion::FusionConfig;
use rspscrn_core::model::{random_model, BlstmModel};
use rspscrn_core::pipeline::{load_model_dir, AudioFrontEnd};
use rspscrn_core::symptoms::{synthetic, train_tree, FeatureVector, SymptomRecord, TreeConfig, FEATURE_NAMES};
use rspscrn_core::SoundCategory;
use rspscrn_service::{AppState, ServiceConfig, SystemClock};

use crate::Command;

#[derive(Debug)]
pub enum CliError {
    /// Well-formed command line that still cannot be acted on.
    Usage(String),
    /// Bad input data or a failure while processing it.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

fn data<E: Display>(context: impl Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(data(path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(data(path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, text.as_bytes())
}

/// Pretty JSON on stdout; a reader that hung up early is not an error.
fn emit(value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(data("stdout")(e)),
        _ => Ok(()),
    }
}

fn parse_category(id: &str) -> Result<SoundCategory, CliError> {
    id.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(data("tokio runtime"))
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Serve { config } => serve(config),
        Command::Score { manifest, models, out } => score(&manifest, &models, &out),
        Command::Features { input, out } => features(&input, &out),
        Command::Eval { scores, out } => eval(&scores, &out),
        Command::GenModel {
            category,
            seed,
            out,
            input_dim,
            hidden_dim,
        } => {
            let category = parse_category(&category)?;
            if input_dim == 0 || hidden_dim == 0 {
                return Err(CliError::Usage("dimensions must be positive".into()));
            }
            write(&out, &random_model(category, input_dim, hidden_dim, seed).to_bytes())
        }
        Command::InspectModel { file } => inspect(&file),
        Command::TrainTree {
            data,
            synthetic,
            seed,
            max_depth,
            min_leaf,
            out,
        } => {
            let rows = match (data, synthetic) {
                (Some(path), _) => read_training_csv(&path)?,
                (None, Some(n)) => synthetic::generate(n, seed),
                (None, None) => unreachable!("clap requires one of --data/--synthetic"),
            };
            train(&rows, TreeConfig { max_depth, min_leaf }, &out)
        }
        Command::DemoSetup { out, seed, hidden_dim } => demo_setup(&out, seed, hidden_dim),
        Command::Screen {
            server,
            symptoms,
            audio,
        } => screen(&server, symptoms.as_deref(), &audio),
    }
}

fn serve(config: Option<PathBuf>) -> Result<(), CliError> {
    let path = ServiceConfig::locate(config).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = ServiceConfig::from_path(&path).map_err(|e| CliError::Data(e.to_string()))?;
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .try_init();
    let state = AppState::from_config(cfg, Arc::new(SystemClock)).map_err(|e| CliError::Data(e.to_string()))?;
    runtime()?
        .block_on(rspscrn_service::serve(state))
        .map_err(data("serve"))
}

fn score(manifest: &Path, models: &Path, out: &Path) -> Result<(), CliError> {
    let manifest = Manifest::from_path(manifest).map_err(data(manifest.display()))?;
    let models = load_model_dir(models).map_err(data(models.display()))?;
    let front_end = AudioFrontEnd::new(DspConfig::default(), AdmissionConfig::default()).map_err(data("dsp"))?;
    let rows = score_corpus(&manifest, &front_end, &models).map_err(data("score"))?;
    let file = File::create(out).map_err(data(out.display()))?;
    write_scores_csv(&rows, BufWriter::new(file)).map_err(data(out.display()))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    eprintln!("scored {} of {} recordings", rows.len() - failed, rows.len());
    Ok(())
}

fn features(input: &Path, out: &Path) -> Result<(), CliError> {
    let front_end = AudioFrontEnd::new(DspConfig::default(), AdmissionConfig::default()).map_err(data("dsp"))?;
    let admitted = front_end.admit_wav(&read(input)?).map_err(data(input.display()))?;
    let spec = front_end.features(&admitted.clip).map_err(data(input.display()))?;
    write(out, &encode_features(&spec))?;
    eprintln!("{} frames x {} mels", spec.n_frames(), spec.n_mels());
    Ok(())
}

#[derive(Serialize)]
struct CategoryAuc {
    n: usize,
    /// absent when only one class occurs in the category
    auc: Option<f64>,
}

#[derive(Serialize)]
struct EvalReport {
    n: usize,
    positives: usize,
    negatives: usize,
    skipped: usize,
    auc: f64,
    roc: Vec<RocPoint>,
    per_category: BTreeMap<SoundCategory, CategoryAuc>,
}

fn eval(scores: &Path, out: &Path) -> Result<(), CliError> {
    let file = File::open(scores).map_err(data(scores.display()))?;
    let table = read_scores_csv(file).map_err(data(scores.display()))?;
    let labels: Vec<bool> = table.labeled.iter().map(|r| r.label).collect();
    let values: Vec<f64> = table.labeled.iter().map(|r| r.score).collect();
    let roc = compute_roc(&labels, &values).map_err(data(scores.display()))?;

    let mut groups: BTreeMap<SoundCategory, (Vec<bool>, Vec<f64>)> = BTreeMap::new();
    for r in table.labeled.iter() {
        if let Some(c) = r.category {
            let g = groups.entry(c).or_default();
            g.0.push(r.label);
            g.1.push(r.score);
        }
    }
    let per_category = groups
        .into_iter()
        .map(|(c, (l, s))| {
            let auc = compute_auc(&l, &s).ok();
            (c, CategoryAuc { n: l.len(), auc })
        })
        .collect();
    let positives = labels.iter().filter(|&&l| l).count();
    let report = EvalReport {
        n: labels.len(),
        positives,
        negatives: labels.len() - positives,
        skipped: table.skipped,
        auc: roc.auc,
        roc: roc.points,
        per_category,
    };
    write_json(out, &report)?;
    eprintln!("AUC {:.4} over {} labeled scores", report.auc, report.n);
    Ok(())
}

fn inspect(file: &Path) -> Result<(), CliError> {
    let model = BlstmModel::from_bytes(&read(file)?).map_err(data(file.display()))?;
    let report = serde_json::json!({
        "manifest": model.manifest(),
        "parameter_count": model.parameter_count(),
    });
    emit(&report)
}

fn csv_cell(raw: &str) -> Value {
    match raw {
        "true" | "1" => Value::Bool(true),
        "false" | "0" => Value::Bool(false),
        other => Value::String(other.to_string()),
    }
}

/// Questionnaire CSV: the fourteen feature columns (booleans as `0`/`1` or
/// `true`/`false`, contact may be `unknown`, age band as e.g. `31-45`) plus
/// `label`.
fn read_training_csv(path: &Path) -> Result<Vec<(SymptomRecord, bool)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(data(path.display()))?;
    let headers = rdr.headers().map_err(data(path.display()))?.clone();
    if !headers.iter().any(|h| h == "label") {
        return Err(CliError::Data(format!("{}: no `label` column", path.display())));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(data(path.display()))?;
        let at = format!("{} row {}", path.display(), i + 1);
        let mut obj = Map::new();
        let mut label = None;
        for (h, v) in headers.iter().zip(record.iter()) {
            if h == "label" {
                label = Some(match v {
                    "1" => true,
                    "0" => false,
                    other => return Err(CliError::Data(format!("{at}: label `{other}` is not 0 or 1"))),
                });
            } else if FEATURE_NAMES.contains(&h) {
                obj.insert(h.to_string(), csv_cell(v));
            }
        }
        let rec = SymptomRecord::from_json(&Value::Object(obj)).map_err(data(&at))?;
        rows.push((rec, label.expect("label column present")));
    }
    Ok(rows)
}

fn train(rows: &[(SymptomRecord, bool)], config: TreeConfig, out: &Path) -> Result<(), CliError> {
    let encoded: Vec<(FeatureVector, bool)> = rows.iter().map(|(r, l)| (r.encode(), *l)).collect();
    let tree = train_tree(&encoded, config).map_err(data("training"))?;
    write(out, tree.to_json().as_bytes())?;
    let labels: Vec<bool> = encoded.iter().map(|(_, l)| *l).collect();
    let scores: Vec<f64> = encoded
        .iter()
        .map(|(x, _)| tree.predict(x).map(|s| s.value.value()))
        .collect::<Result<_, _>>()
        .map_err(data("training"))?;
    match compute_auc(&labels, &scores) {
        Ok(auc) => eprintln!("{} nodes, depth {}, training AUC {auc:.4}", tree.nodes.len(), tree.depth()),
        Err(_) => eprintln!("{} nodes, depth {}", tree.nodes.len(), tree.depth()),
    }
    Ok(())
}

fn demo_setup(out: &Path, seed: u64, hidden_dim: usize) -> Result<(), CliError> {
    let models = out.join("models");
    std::fs::create_dir_all(&models).map_err(data(models.display()))?;
    let n_mels = DspConfig::default().n_mels;
    for (i, c) in SoundCategory::ALL.into_iter().enumerate() {
        let m = random_model(c, n_mels, hidden_dim, seed.wrapping_add(i as u64));
        write(&models.join(c.model_file_name()), &m.to_bytes())?;
    }
    train(
        &synthetic::generate(2000, seed),
        TreeConfig::default(),
        &out.join("tree.json"),
    )?;
    write_json(&out.join("fusion.json"), &FusionConfig::default())?;
    let mut cfg = ServiceConfig::new("models".into(), "tree.json".into(), "data".into());
    cfg.fusion_path = Some("fusion.json".into());
    write_json(&out.join("service.json"), &cfg)?;
    eprintln!("wrote {}", out.join("service.json").display());
    Ok(())
}

fn screen(server: &str, symptoms: Option<&Path>, audio: &[String]) -> Result<(), CliError> {
    let mut uploads = Vec::new();
    for spec in audio {
        let (cat, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("`{spec}` is not CATEGORY=PATH")))?;
        uploads.push((parse_category(cat)?, read(Path::new(path))?));
    }
    let answers: Option<Value> = match symptoms {
        Some(p) => Some(serde_json::from_slice(&read(p)?).map_err(data(p.display()))?),
        None => None,
    };
    let client = ScreenClient::new(server).map_err(data("client"))?;
    let result = runtime()?.block_on(async {
        let id = client.create_session().await?;
        if let Some(a) = &answers {
            client.put_symptoms_json(&id, a).await?;
        }
        for (c, wav) in uploads {
            client.upload_audio(&id, c, wav).await?;
        }
        client.score(&id).await
    });
    emit(&result.map_err(data(server))?)
}
