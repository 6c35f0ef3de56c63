//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use helixq_core::featuremap::FeatureMapKind;
use helixq_core::kernel::{kernel_matrix, write_gram_csv};
use helixq_core::metrics::{evaluate_model, MetricsReport};
use helixq_core::models::{train_qnn, train_vqc};
use helixq_core::ndarray::Array2;
use helixq_core::pegasos::{PegasosModel, PegasosParams};
use helixq_core::pipeline::{
    load_sequences, load_sequences_csv, load_sequences_fasta, load_unlabeled_csv,
    stratified_split, Preprocessor, SequenceRecord,
};
use helixq_core::qsvc::{QsvcParams, SvmModel};
use helixq_core::variational::OptimizerMethod;
use helixq_core::{Error, Result};

use crate::bundle::{load_bundle, save_bundle, ModelPayload, TrainedBundle};
use crate::config::{feature_map_name, DataFormat, ModelChoice, Settings};

/// The global seed fans out to per-stage seeds by adding a fixed stage
/// index, so changing one stage's draws never shifts another's.
const SEED_STAGE_SPLIT: u64 = 0;
const SEED_STAGE_TRAIN: u64 = 1;

fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed.wrapping_add(stage)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

fn load_records(settings: &Settings) -> Result<Vec<SequenceRecord>> {
    let path = settings.data.as_deref().ok_or_else(|| {
        Error::Usage("no input data; pass --data or set data= in the config file".into())
    })?;
    let mut records = match settings.format {
        Some(DataFormat::Csv) => load_sequences_csv(open(path)?)?,
        Some(DataFormat::Fasta) => load_sequences_fasta(open(path)?)?,
        None => load_sequences(path)?,
    };
    if let Some(limit) = settings.limit {
        records.truncate(limit);
    }
    Ok(records)
}

fn warn_zero_rows(context: &str, k: usize, rows: &[usize]) {
    if !rows.is_empty() {
        eprintln!(
            "warning: {} {context} row(s) have no countable {k}-mer window and stay all-zero: {rows:?}",
            rows.len()
        );
    }
}

struct PreparedData {
    x_train: Array2<f64>,
    y_train: Vec<u8>,
    x_test: Array2<f64>,
    y_test: Vec<u8>,
    preprocessor: Preprocessor,
}

/// Split, fit the preprocessing chain on the training side only, and
/// transform both sides.
fn prepare(settings: &Settings, records: &[SequenceRecord]) -> Result<PreparedData> {
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    let (train_idx, test_idx) = stratified_split(
        &labels,
        settings.test_fraction,
        stage_seed(settings.seed, SEED_STAGE_SPLIT),
    )?;
    let pick = |idx: &[usize]| -> (Vec<String>, Vec<u8>) {
        (
            idx.iter().map(|&i| records[i].sequence.clone()).collect(),
            idx.iter().map(|&i| labels[i]).collect(),
        )
    };
    let (train_seqs, y_train) = pick(&train_idx);
    let (test_seqs, y_test) = pick(&test_idx);
    let (preprocessor, x_train, zero_train) =
        Preprocessor::fit(&train_seqs, settings.kmer, settings.qubits)?;
    warn_zero_rows("training", settings.kmer, &zero_train);
    let (x_test, zero_test) = preprocessor.transform(&test_seqs)?;
    warn_zero_rows("test", settings.kmer, &zero_test);
    Ok(PreparedData { x_train, y_train, x_test, y_test, preprocessor })
}

fn train_payload(
    choice: ModelChoice,
    kind: FeatureMapKind,
    settings: &Settings,
    x: &Array2<f64>,
    y: &[u8],
) -> Result<ModelPayload> {
    let fspec = settings.feature_map_spec(kind);
    let train_seed = stage_seed(settings.seed, SEED_STAGE_TRAIN);
    match choice {
        ModelChoice::Qsvc => {
            let mut params = QsvcParams::defaults_for(y.len());
            params.c = settings.cost;
            params.tol = settings.svm_tol;
            if let Some(p) = settings.max_passes {
                params.max_passes = p;
            }
            Ok(ModelPayload::Qsvc(SvmModel::train(fspec, x, y, &params)?))
        }
        ModelChoice::Pegasos => {
            let mut params = PegasosParams::defaults_for(y.len());
            params.lambda = settings.lambda;
            if let Some(s) = settings.steps {
                params.steps = s;
            }
            params.seed = train_seed;
            Ok(ModelPayload::Pegasos(PegasosModel::train(fspec, x, y, &params)?))
        }
        ModelChoice::Vqc => {
            let config = settings.optimizer_config(OptimizerMethod::Spsa, train_seed);
            Ok(ModelPayload::Vqc(train_vqc(fspec, settings.ansatz_spec(), x, y, &config)?))
        }
        ModelChoice::Qnn => {
            let config = settings.optimizer_config(OptimizerMethod::GradientDescent, train_seed);
            Ok(ModelPayload::Qnn(train_qnn(fspec, settings.ansatz_spec(), x, y, &config)?))
        }
    }
}

fn evaluate_payload(payload: &ModelPayload, x: &Array2<f64>, y: &[u8]) -> Result<MetricsReport> {
    evaluate_model(|row| payload.predict(row), |row| payload.score(row), x, y)
}

/// The metrics file for one trained model: both splits plus the identity
/// of the run.
#[derive(Serialize)]
struct RunReport<'a> {
    model: &'a str,
    feature_map: &'a str,
    seed: u64,
    train: MetricsReport,
    test: MetricsReport,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_trace(path: &Path, payload: &ModelPayload) -> Result<bool> {
    match payload.trace() {
        Some(trace) => {
            let mut w = BufWriter::new(File::create(path)?);
            trace.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        None => Ok(false),
    }
}

/// Validates the pieces a variational run will need before any data work.
fn validate_variational(settings: &Settings) -> Result<()> {
    settings.ansatz_spec().validate()?;
    settings.optimizer_config(OptimizerMethod::Spsa, 0).validate()
}

pub fn cmd_train(settings: &Settings) -> Result<()> {
    if matches!(settings.model, ModelChoice::Vqc | ModelChoice::Qnn) {
        validate_variational(settings)?;
    }
    let records = load_records(settings)?;
    let data = prepare(settings, &records)?;
    let payload =
        train_payload(settings.model, settings.feature_map, settings, &data.x_train, &data.y_train)?;
    let train = evaluate_payload(&payload, &data.x_train, &data.y_train)?;
    let test = evaluate_payload(&payload, &data.x_test, &data.y_test)?;

    std::fs::create_dir_all(&settings.out)?;
    let model_path = settings.out.join("model.json");
    let bundle = TrainedBundle::new(data.preprocessor, payload);
    save_bundle(&model_path, &bundle)?;
    let metrics_path = settings.out.join("metrics.json");
    let report = RunReport {
        model: settings.model.name(),
        feature_map: feature_map_name(settings.feature_map),
        seed: settings.seed,
        train,
        test,
    };
    write_json(&metrics_path, &report)?;
    let trace_path = settings.out.join("trace.csv");
    let wrote_trace = write_trace(&trace_path, &bundle.model)?;

    println!(
        "{} + {} map on {} qubits, seed {}",
        settings.model.name(),
        feature_map_name(settings.feature_map),
        settings.qubits,
        settings.seed
    );
    println!("train: accuracy {:.3}, auroc {:.3} (n = {})", train.accuracy, train.auroc, train.n);
    println!("test:  accuracy {:.3}, auroc {:.3} (n = {})", test.accuracy, test.auroc, test.n);
    print!("wrote {}, {}", model_path.display(), metrics_path.display());
    if wrote_trace {
        print!(", {}", trace_path.display());
    }
    println!();
    Ok(())
}

pub fn cmd_predict(model_file: &Path, data: &Path, out: &Path) -> Result<()> {
    let bundle = load_bundle(model_file)?;
    let sequences = load_unlabeled_csv(open(data)?)?;
    let (features, zero) = bundle.preprocessor.transform(&sequences)?;
    warn_zero_rows("input", bundle.preprocessor.k, &zero);
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "sequence_index,score,label")?;
    for (i, row) in features.rows().into_iter().enumerate() {
        let row = row.to_vec();
        writeln!(w, "{i},{},{}", bundle.model.score(&row)?, bundle.model.predict(&row)?)?;
    }
    w.flush()?;
    println!(
        "wrote {} {} prediction(s) to {}",
        sequences.len(),
        bundle.model.name(),
        out.display()
    );
    Ok(())
}

pub fn cmd_kernel(settings: &Settings) -> Result<()> {
    let records = load_records(settings)?;
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    // the Gram matrix only needs features; when the labels cannot support
    // a stratified split, fall back to every row instead of failing
    let rows: Vec<usize> = match stratified_split(
        &labels,
        settings.test_fraction,
        stage_seed(settings.seed, SEED_STAGE_SPLIT),
    ) {
        Ok((train_idx, _)) => train_idx,
        Err(Error::Data(msg)) => {
            eprintln!("note: cannot split ({msg}); using all {} row(s)", records.len());
            (0..records.len()).collect()
        }
        Err(e) => return Err(e),
    };
    let seqs: Vec<String> = rows.iter().map(|&i| records[i].sequence.clone()).collect();
    let (_, features, zero) = Preprocessor::fit(&seqs, settings.kmer, settings.qubits)?;
    warn_zero_rows("training", settings.kmer, &zero);
    let fspec = settings.feature_map_spec(settings.feature_map);
    let matrix = kernel_matrix(&fspec, &features)?;
    std::fs::create_dir_all(&settings.out)?;
    let path = settings.out.join("gram.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    write_gram_csv(&matrix, &mut w)?;
    w.flush()?;
    println!("wrote {0} x {0} Gram matrix to {1}", matrix.n(), path.display());
    Ok(())
}

/// Returns the process exit code: 0 when every cell trained, 1 when any
/// cell failed (failed cells are recorded, the rest still run).
pub fn cmd_benchmark(settings: &Settings) -> Result<i32> {
    if settings
        .models
        .iter()
        .any(|m| matches!(m, ModelChoice::Vqc | ModelChoice::Qnn))
    {
        validate_variational(settings)?;
    }
    let records = load_records(settings)?;
    let data = prepare(settings, &records)?;
    std::fs::create_dir_all(&settings.out)?;

    let mut summary: Vec<(&'static str, &'static str, MetricsReport)> = Vec::new();
    let mut failures: Vec<(&'static str, &'static str, String)> = Vec::new();
    for &choice in &settings.models {
        for &kind in &settings.feature_maps {
            let model_name = choice.name();
            let map_name = feature_map_name(kind);
            let outcome = train_payload(choice, kind, settings, &data.x_train, &data.y_train)
                .and_then(|payload| {
                    let train = evaluate_payload(&payload, &data.x_train, &data.y_train)?;
                    let test = evaluate_payload(&payload, &data.x_test, &data.y_test)?;
                    Ok((payload, train, test))
                });
            match outcome {
                Ok((payload, train, test)) => {
                    let report = RunReport {
                        model: model_name,
                        feature_map: map_name,
                        seed: settings.seed,
                        train,
                        test,
                    };
                    write_json(
                        &settings.out.join(format!("metrics_{model_name}_{map_name}.json")),
                        &report,
                    )?;
                    write_trace(
                        &settings.out.join(format!("trace_{model_name}_{map_name}.csv")),
                        &payload,
                    )?;
                    println!(
                        "{model_name} + {map_name}: test accuracy {:.3}, auroc {:.3}",
                        test.accuracy, test.auroc
                    );
                    summary.push((model_name, map_name, test));
                }
                Err(e) => {
                    eprintln!("{model_name} + {map_name} failed: {e}");
                    failures.push((model_name, map_name, e.to_string()));
                }
            }
        }
    }

    let path = settings.out.join("summary.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "model,feature_map,accuracy,precision,recall,f1,auroc")?;
    for (model, map, m) in &summary {
        writeln!(w, "{model},{map},{},{},{},{},{}", m.accuracy, m.precision, m.recall, m.f1, m.auroc)?;
    }
    w.flush()?;
    println!("wrote {} result row(s) to {}", summary.len(), path.display());

    if !failures.is_empty() {
        let fpath = settings.out.join("failures.csv");
        let mut w = BufWriter::new(File::create(&fpath)?);
        writeln!(w, "model,feature_map,error")?;
        for (model, map, msg) in &failures {
            writeln!(w, "{model},{map},\"{}\"", msg.replace('"', "\"\""))?;
        }
        w.flush()?;
        eprintln!("{} cell(s) failed; details in {}", failures.len(), fpath.display());
        return Ok(1);
    }
    Ok(0)
}
