//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use moore_ssm::active::{lstar_learn_with_budget, Budget, EqOracleConfig};
use moore_ssm::analysis::{
    collect_hidden_states, compare_convergence, latent_metrics, pca_project, projection_csv,
};
use moore_ssm::fixtures;
use moore_ssm::passive::{accuracy_sweep, rpni_learn, SweepPoint};
use moore_ssm::records::{
    ActiveTrialRecord, EvalRecord, PassiveTrialRecord, RunManifest, TrainingLog, TrialEntry,
    MANIFEST_VERSION,
};
use moore_ssm::ssm::{encode_moore_as_ssm, warm_start_init, Nonlinearity};
use moore_ssm::trace_gen::spot::parse_spot_lines;
use moore_ssm::trace_gen::walk::acceptance_percentage;
use moore_ssm::trace_gen::{
    dynamic_arbitration_transform, parse_dot, random_walk, serialize_spot, to_prefix_closed,
    write_dot, WalkConfig,
};
use moore_ssm::train::{
    examples, model_acceptance_percentage, split_train_test, train, AdamConfig, Checkpoint,
    ModelConfig, TrainConfig,
};
use moore_ssm::{MooreMachine, Status, Trace, Transducer};
use rayon::prelude::*;
use serde::Serialize;

use crate::failure::{invalid, Classify, Failure, Outcome};
use crate::opts::{Arch, Method, Opts, TraceFormat};

/// Mixed into the seed for evaluation walks so they differ from training data.
pub const EVAL_SEED_MIX: u64 = 0x5bd1_e995_0000_0001;

const DEFAULT_NUM_TRACES: usize = 1000;
const DEFAULT_TRACE_LEN: usize = 20;
const DEFAULT_EPSILON: f64 = 0.05;
const DEFAULT_K: u64 = 3;
const DEFAULT_TRIALS: usize = 3;

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Outcome<&'a T> {
    match v {
        Some(v) => Ok(v),
        None => invalid(format!("--{flag} is required")),
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(anyhow::anyhow!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).io()?;
    }
    fs::write(path, contents).map_err(|e| Failure::Io(anyhow::anyhow!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).io()?;
    text.push('\n');
    write(path, &text)
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_machine(path: &Path) -> Outcome<MooreMachine> {
    let text = read(path)?;
    parse_dot(&text).map_err(|e| Failure::Validation(anyhow::anyhow!("{}: {e}", path.display())))
}

fn load_traces(path: &Path, m: &MooreMachine) -> Outcome<Vec<Trace>> {
    let text = read(path)?;
    parse_spot_lines(&text, m.alphabet())
        .map_err(|(line, e)| Failure::Validation(anyhow::anyhow!("{}:{line}: {e}", path.display())))
}

fn machine_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "machine".into(), |s| s.to_string_lossy().into_owned())
}

fn walk_config(o: &Opts, default_len: usize) -> Outcome<WalkConfig> {
    WalkConfig::new(
        o.trace_len.unwrap_or(default_len),
        o.num_traces.unwrap_or(DEFAULT_NUM_TRACES),
        o.seed.unwrap_or(0),
    )
    .invalid()
}

fn spot_lines(traces: &[Trace], m: &MooreMachine) -> String {
    traces
        .iter()
        .map(|t| serialize_spot(t, m.alphabet()) + "\n")
        .collect()
}

pub fn gen(o: &Opts, format: TraceFormat) -> Outcome {
    let m = load_machine(need(&o.machine, "machine")?)?;
    let traces = random_walk(&m, &walk_config(o, DEFAULT_TRACE_LEN)?);
    let text = match format {
        TraceFormat::Spot => spot_lines(&traces, &m),
        TraceFormat::Prefix => to_prefix_closed(&traces).invalid()?.to_text(m.alphabet()),
    };
    emit(&o.out, &text)
}

fn grant_aps(o: &Opts, m: &MooreMachine) -> Vec<String> {
    o.grant_aps
        .clone()
        .unwrap_or_else(|| m.alphabet().output_aps().to_vec())
}

pub fn transform(o: &Opts) -> Outcome {
    let m = load_machine(need(&o.machine, "machine")?)?;
    let traces = load_traces(need(&o.traces, "traces")?, &m)?;
    let out =
        dynamic_arbitration_transform(&m, &traces, o.k.unwrap_or(DEFAULT_K), &grant_aps(o, &m))
            .invalid()?;
    emit(&o.out, &spot_lines(&out, &m))
}

fn out_dir(o: &Opts) -> Outcome<PathBuf> {
    Ok(need(&o.out, "out")?.clone())
}

pub fn learn(o: &Opts) -> Outcome {
    let path = need(&o.machine, "machine")?;
    let m = load_machine(path)?;
    let dir = out_dir(o)?;
    let seed = o.seed.unwrap_or(0);
    let trial = o.trial.unwrap_or(0);
    let file = path.display().to_string();
    let eval = |h: &MooreMachine| {
        acceptance_percentage(
            h,
            &m,
            DEFAULT_NUM_TRACES,
            DEFAULT_TRACE_LEN,
            seed ^ EVAL_SEED_MIX,
        )
    };
    match o.method.unwrap_or(Method::Lstar) {
        Method::Lstar => {
            let budget = Budget {
                max_membership_queries: o
                    .max_queries
                    .unwrap_or(Budget::default().max_membership_queries),
                wall_clock: o.timeout_secs.map(Duration::from_secs_f64),
            };
            let cfg = EqOracleConfig {
                seed,
                ..Default::default()
            };
            let outcome = lstar_learn_with_budget(&m, &cfg, budget);
            let learned = outcome.hypothesis.as_ref().map(|h| h.to_moore());
            let accuracy = match (&learned, outcome.status) {
                (Some(h), Status::Success) => eval(h),
                _ => 0.0,
            };
            if let Some(h) = &learned {
                write(&dir.join("learned.dot"), &write_dot(h, &machine_name(path)))?;
            }
            let record = ActiveTrialRecord {
                tlsf_file: file,
                trial,
                sample_size: outcome.stats.sample_size(),
                accuracy,
                status: outcome.status,
            };
            write_json(&dir.join("record.json"), &record)?;
            write_json(&dir.join("queries.json"), &outcome.stats)?;
            if outcome.status == Status::Failed {
                return Err(Failure::Timeout(format!(
                    "L* exhausted its budget on {}",
                    path.display()
                )));
            }
            Ok(())
        }
        Method::Rpni => {
            let len = o.trace_len.unwrap_or(DEFAULT_TRACE_LEN);
            let (points, learned) = if let Some(tp) = &o.traces {
                let traces = load_traces(tp, &m)?;
                let h = rpni_learn(&to_prefix_closed(&traces).invalid()?, m.alphabet())
                    .invalid()?
                    .to_moore();
                (
                    vec![SweepPoint {
                        num_traces: traces.len(),
                        accuracy: eval(&h),
                    }],
                    h,
                )
            } else {
                let sizes = o
                    .sizes
                    .clone()
                    .unwrap_or_else(|| vec![o.num_traces.unwrap_or(DEFAULT_NUM_TRACES)]);
                let points = accuracy_sweep(&m, &sizes, len, seed).invalid()?;
                let last = points.last().map_or(0, |p| p.num_traces);
                let pool = random_walk(&m, &WalkConfig::new(len, last, seed).invalid()?);
                let h = rpni_learn(&to_prefix_closed(&pool).invalid()?, m.alphabet())
                    .invalid()?
                    .to_moore();
                (points, h)
            };
            write(
                &dir.join("learned.dot"),
                &write_dot(&learned, &machine_name(path)),
            )?;
            let record = PassiveTrialRecord::from_sweep(&file, trial, len, points);
            write_json(&dir.join("record.json"), &record)
        }
        other => invalid(format!("learn does not support method {}", other.name())),
    }
}

pub fn encode(o: &Opts) -> Outcome {
    let m = load_machine(need(&o.machine, "machine")?)?;
    let (exact, enc) = encode_moore_as_ssm(&m);
    let eps = o.epsilon.unwrap_or(0.0);
    let (params, nl) = if eps == 0.0 {
        (exact, Nonlinearity::Identity)
    } else {
        (
            warm_start_init(&m, eps, o.seed.unwrap_or(0)).invalid()?,
            Nonlinearity::Tanh,
        )
    };
    let cfg = ModelConfig {
        nonlinearity: nl,
        ..ModelConfig::bilinear(m.alphabet(), m.num_states())
    };
    let model = moore_ssm::train::Model::from_ssm(cfg, params).invalid()?;
    emit(
        &o.out,
        &(Checkpoint::from_model(&model, Some(&enc)).to_json() + "\n"),
    )
}

pub fn train_cmd(o: &Opts) -> Outcome {
    let path = need(&o.machine, "machine")?;
    let m = load_machine(path)?;
    let traces = load_traces(need(&o.traces, "traces")?, &m)?;
    let dir = out_dir(o)?;
    let seed = o.seed.unwrap_or(0);
    let data = examples(&traces);
    let (train_set, test_set) = split_train_test(&data);
    let cfg = TrainConfig {
        adam: AdamConfig {
            learning_rate: o.lr.unwrap_or(1e-3),
            ..Default::default()
        },
        max_epochs: o.epochs.unwrap_or(1000),
        batch_size: o.batch_size,
        seed,
        convergence_threshold: o.threshold.unwrap_or(0.9),
        eval_every: o.eval_every.unwrap_or(100),
        stop_at: o.stop_at,
        ..Default::default()
    };
    let method = o.method.unwrap_or(Method::SsmWarmstart);
    let (model_cfg, initial, encoding) = match method {
        Method::SsmWarmstart => {
            let eps = o.epsilon.unwrap_or(DEFAULT_EPSILON);
            let (exact, enc) = encode_moore_as_ssm(&m);
            let p = if eps == 0.0 {
                exact
            } else {
                warm_start_init(&m, eps, seed).invalid()?
            };
            (
                ModelConfig::bilinear(m.alphabet(), m.num_states()),
                Some(p),
                Some(enc),
            )
        }
        Method::SsmRandom => match o.arch.unwrap_or(Arch::Baseline) {
            Arch::Baseline => (ModelConfig::baseline(m.alphabet()), None, None),
            Arch::Bilinear => (
                ModelConfig::bilinear(m.alphabet(), m.num_states()),
                None,
                None,
            ),
        },
        other => return invalid(format!("train does not support method {}", other.name())),
    };
    let outcome = train(&train_set, &test_set, model_cfg, &cfg, initial).invalid()?;
    let log = TrainingLog::new(
        &path.display().to_string(),
        data.len(),
        cfg.convergence_threshold,
        outcome.history,
    );
    write_json(&dir.join("log.json"), &log)?;
    write(
        &dir.join("checkpoint.json"),
        &(Checkpoint::from_model(&outcome.model, encoding.as_ref()).to_json() + "\n"),
    )?;
    if let Some(a) = outcome.abort {
        return Err(Failure::Numerical(format!(
            "non-finite loss {} at epoch {}",
            a.loss, a.epoch
        )));
    }
    Ok(())
}

pub fn eval(o: &Opts, candidate: &Path) -> Outcome {
    let reference = need(&o.machine, "machine")?;
    let truth = load_machine(reference)?;
    let n = o.num_traces.unwrap_or(DEFAULT_NUM_TRACES);
    let len = o.trace_len.unwrap_or(DEFAULT_TRACE_LEN);
    if len == 0 {
        return invalid("--trace-len must be positive");
    }
    let seed = o.seed.unwrap_or(0);
    let accuracy = if candidate.extension().is_some_and(|e| e == "json") {
        let model = Checkpoint::from_json(&read(candidate)?)
            .invalid()?
            .to_model()
            .invalid()?;
        model_acceptance_percentage(&model, &truth, n, len, seed).invalid()?
    } else {
        let m = load_machine(candidate)?;
        if m.alphabet() != truth.alphabet() {
            return invalid("candidate and reference alphabets differ");
        }
        acceptance_percentage(&m, &truth, n, len, seed)
    };
    println!("{accuracy}");
    if let Some(out) = &o.out {
        let record = EvalRecord {
            candidate: candidate.display().to_string(),
            reference: reference.display().to_string(),
            num_traces: n,
            trace_length: len,
            seed,
            accuracy,
        };
        write_json(out, &record)?;
    }
    Ok(())
}

pub fn analyze(o: &Opts, checkpoint: &Path) -> Outcome {
    let m = load_machine(need(&o.machine, "machine")?)?;
    let dir = out_dir(o)?;
    let model = Checkpoint::from_json(&read(checkpoint)?)
        .invalid()?
        .to_model()
        .invalid()?;
    let lp = collect_hidden_states(
        &model,
        &m,
        o.num_traces.unwrap_or(DEFAULT_NUM_TRACES),
        o.trace_len.unwrap_or(5),
        o.seed.unwrap_or(0),
    )
    .invalid()?;
    let names = m.states().to_vec();
    write_json(
        &dir.join("metrics.json"),
        &latent_metrics(&lp, &names).invalid()?,
    )?;
    let proj = pca_project(&lp.points, 2).invalid()?;
    write(
        &dir.join("projection.csv"),
        &projection_csv(&proj, &lp.labels, &names),
    )
}

fn load_log(path: &Path) -> Outcome<TrainingLog> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Validation(anyhow::anyhow!("{}: {e}", path.display())))
}

pub fn compare(o: &Opts, warm: &[PathBuf], random: &[PathBuf]) -> Outcome {
    let threshold = o.threshold.unwrap_or(0.9);
    let warm: Vec<TrainingLog> = warm.iter().map(|p| load_log(p)).collect::<Outcome<_>>()?;
    let random: Vec<TrainingLog> = random.iter().map(|p| load_log(p)).collect::<Outcome<_>>()?;
    // epochs past the longest run stand in for runs that never converged
    let censor = warm
        .iter()
        .chain(&random)
        .filter_map(|l| l.epoch_history.last().map(|r| r.epoch))
        .max()
        .unwrap_or(0)
        + 1;
    let epochs = |logs: &[TrainingLog]| -> Vec<Option<usize>> {
        logs.iter()
            .map(|l| moore_ssm::train::convergence_epoch(&l.epoch_history, threshold))
            .collect()
    };
    let summary =
        compare_convergence(&epochs(&warm), &epochs(&random), threshold, censor).invalid()?;
    let text = serde_json::to_string_pretty(&summary).io()? + "\n";
    emit(&o.out, &text)
}

/// Seed of trial `t` under base seed `seed`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    seed ^ t as u64
}

fn run_trial(o: &Opts, method: Method, t: usize, dir: &Path) -> Outcome<Vec<String>> {
    let mut to = o.clone();
    to.seed = Some(trial_seed(o.seed.unwrap_or(0), t));
    to.trial = Some(t);
    to.out = Some(dir.to_path_buf());
    match method {
        Method::Lstar | Method::Rpni => {
            learn(&to)?;
            Ok(vec!["learned.dot".into(), "record.json".into()])
        }
        Method::SsmRandom | Method::SsmWarmstart => {
            if to.traces.is_none() {
                let m = load_machine(need(&o.machine, "machine")?)?;
                let mut traces = random_walk(&m, &walk_config(&to, DEFAULT_TRACE_LEN)?);
                if to.grant_aps.is_some() || to.k.is_some() {
                    traces = dynamic_arbitration_transform(
                        &m,
                        &traces,
                        to.k.unwrap_or(DEFAULT_K),
                        &grant_aps(&to, &m),
                    )
                    .invalid()?;
                }
                let tp = dir.join("traces.txt");
                write(&tp, &spot_lines(&traces, &m))?;
                to.traces = Some(tp);
            }
            train_cmd(&to)?;
            Ok(vec![
                "traces.txt".into(),
                "log.json".into(),
                "checkpoint.json".into(),
            ])
        }
    }
}

pub fn suite(o: &Opts) -> Outcome {
    let method = *need(&o.method, "method")?;
    let machine = need(&o.machine, "machine")?.clone();
    let trials = o.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return invalid("--trials must be at least 1");
    }
    let dir = out_dir(o)?;
    let seed = o.seed.unwrap_or(0);
    let results: Vec<(usize, Outcome<Vec<String>>)> = (0..trials)
        .into_par_iter()
        .map(|t| (t, run_trial(o, method, t, &dir.join(format!("trial_{t}")))))
        .collect();
    let mut entries = Vec::new();
    let mut first_failure = None;
    for (t, r) in results {
        let (status, outputs) = match r {
            Ok(files) => (
                Status::Success,
                files
                    .into_iter()
                    .map(|f| format!("trial_{t}/{f}"))
                    .collect(),
            ),
            Err(e @ (Failure::Timeout(_) | Failure::Numerical(_))) => {
                eprintln!("trial {t}: {e}");
                (Status::Failed, vec![format!("trial_{t}/record.json")])
            }
            Err(e) => {
                first_failure.get_or_insert(e);
                (Status::Failed, Vec::new())
            }
        };
        entries.push(TrialEntry {
            trial: t,
            seed: trial_seed(seed, t),
            outputs,
            status,
        });
    }
    if let Some(e) = first_failure {
        return Err(e);
    }
    let manifest = RunManifest {
        version: MANIFEST_VERSION,
        method: method.name().into(),
        machine: machine.display().to_string(),
        seed,
        trials: entries,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn fixture(o: &Opts, name: Option<&str>, list: bool) -> Outcome {
    let corpus = fixtures::desk_corpus();
    if list {
        for (n, m) in &corpus {
            println!("{n}\t{} states", m.num_states());
        }
        return Ok(());
    }
    let Some(name) = name else {
        return invalid("give a fixture name or --list");
    };
    let Some((_, m)) = corpus.iter().find(|(n, _)| n == name) else {
        return invalid(format!("unknown fixture `{name}`"));
    };
    emit(&o.out, &write_dot(m, name))
}
