//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to the
//! real stdout so the verdicts survive output capture.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use moore_ssm::active::{lstar_learn, EqOracleConfig};
use moore_ssm::analysis::{
    adjusted_rand_index, collect_hidden_states, compare_convergence, latent_metrics,
    mann_whitney_u, normalized_mutual_information, separation_ratio, LabeledPoints,
};
use moore_ssm::fixtures;
use moore_ssm::passive::{accuracy_sweep, characteristic_sample, rpni_learn};
use moore_ssm::records::{
    schema, ActiveTrialRecord, EvalRecord, PassiveTrialRecord, RunManifest, Status, TrainingLog,
    TrialEntry, MANIFEST_VERSION,
};
use moore_ssm::ssm::{
    argmax, encode_moore_as_ssm, kron_input, one_hot, simulate_encoded_states, ssm_step,
    warm_start_init, MooreEncoding, Nonlinearity, SsmParams,
};
use moore_ssm::trace_gen::walk::acceptance_percentage;
use moore_ssm::trace_gen::{
    dynamic_arbitration_transform, parse_spot, random_walk, serialize_spot, WalkConfig,
};
use moore_ssm::train::{
    examples, model_acceptance_percentage, split_train_test, train, Architecture, Example, Model,
    ModelConfig, TrainConfig,
};
use moore_ssm::{AlphabetSpec, MooreMachine, Trace, Transducer, Valuation};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

type Verdict = Result<String, String>;

fn report(id: usize, title: &str, started: Instant, verdict: Verdict) {
    let secs = started.elapsed().as_secs_f64();
    let line = match &verdict {
        Ok(detail) => format!("PASS [{id:2}] {title}: {detail} ({secs:.1}s)"),
        Err(detail) => format!("FAIL [{id:2}] {title}: {detail} ({secs:.1}s)"),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    if let Err(detail) = verdict {
        panic!("criterion {id} failed: {detail}");
    }
}

fn all_words(letters: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = letters.pow(len as u32);
    (0..total).map(move |mut code| {
        (0..len)
            .map(|_| {
                let a = code % letters;
                code /= letters;
                a
            })
            .collect()
    })
}

fn letters_to_inputs(ab: &AlphabetSpec, word: &[usize]) -> Vec<Valuation> {
    word.iter().map(|&a| ab.input_letter(a)).collect()
}

/// Reference execution straight from the transition and output tables.
fn table_run(m: &MooreMachine, word: &[usize]) -> (Vec<usize>, Vec<Valuation>) {
    let mut s = m.initial();
    let mut states = Vec::with_capacity(word.len());
    let mut outs = Vec::with_capacity(word.len());
    for &a in word {
        s = m.transition_table()[s * m.num_letters() + a];
        states.push(s);
        outs.push(m.outputs()[s]);
    }
    (states, outs)
}

fn check_encoded(m: &MooreMachine, p: &SsmParams, enc: &MooreEncoding, word: &[usize]) -> usize {
    let (states, outs) = table_run(m, word);
    let (got, hidden) =
        simulate_encoded_states(p, enc, &letters_to_inputs(m.alphabet(), word)).unwrap();
    let mut bad = 0;
    for t in 0..word.len() {
        let x = &hidden[t];
        let one_hot = x
            .iter()
            .enumerate()
            .all(|(i, &v)| v == if i == states[t] { 1.0 } else { 0.0 });
        if got[t] != outs[t] || !one_hot {
            bad += 1;
        }
    }
    bad
}

/// Walks the whole word tree to `depth`, stepping the encoded model once
/// per node, and counts steps whose output or hidden state disagrees with
/// the machine.
fn tree_mismatches(
    m: &MooreMachine,
    p: &SsmParams,
    enc: &MooreEncoding,
    x: &DVector<f64>,
    state: usize,
    depth: usize,
) -> (usize, usize) {
    if depth == 0 {
        return (0, 0);
    }
    let l = m.num_letters();
    let (mut bad, mut steps) = (0, 0);
    for a in 0..l {
        let next = m.transition_table()[state * l + a];
        let mu = kron_input(x, &one_hot(l, a));
        let y = ssm_step(p, x, &mu, Nonlinearity::Identity).unwrap();
        let out = enc.output_valuation(argmax(&p.readout(&y)));
        let one_hot_ok = y
            .iter()
            .enumerate()
            .all(|(i, &v)| v == if i == next { 1.0 } else { 0.0 });
        bad += usize::from(out != m.outputs()[next] || !one_hot_ok);
        let (b, s) = tree_mismatches(m, p, enc, &y, next, depth - 1);
        bad += b;
        steps += s + 1;
    }
    (bad, steps)
}

#[test]
fn c01_encoding_exactness() {
    let started = Instant::now();
    let corpus = fixtures::desk_corpus();
    let mut mismatches = 0usize;
    let mut steps = 0usize;
    for (i, (_, m)) in corpus.iter().enumerate() {
        let (p, enc) = encode_moore_as_ssm(m);
        let (bad, s) = tree_mismatches(m, &p, &enc, &p.x0, m.initial(), 8);
        mismatches += bad;
        steps += s;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        for _ in 0..1000 {
            let w: Vec<usize> = (0..20)
                .map(|_| rng.random_range(0..m.num_letters()))
                .collect();
            mismatches += check_encoded(m, &p, &enc, &w);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let verdict = if corpus.len() >= 20 && mismatches == 0 && secs < 60.0 {
        Ok(format!(
            "{} machines, {steps} exhaustive steps + 1000 random words each, 0 mismatches",
            corpus.len()
        ))
    } else {
        Err(format!(
            "{} machines, {mismatches} mismatching steps, {secs:.1}s",
            corpus.len()
        ))
    };
    report(1, "encoding matches machine runs", started, verdict);
}

#[test]
fn c02_noise_placement() {
    let started = Instant::now();
    let m = fixtures::round_robin_arbiter(3);
    let (exact, _) = encode_moore_as_ssm(&m);
    let mut problems = Vec::new();
    let mut stats = Vec::new();
    for eps in [0.01, 0.1, 0.5] {
        let mut samples = Vec::new();
        for seed in 0..100 {
            let p = warm_start_init(&m, eps, seed).unwrap();
            for (got, want) in [(&p.a, &exact.a), (&p.b, &exact.b), (&p.c, &exact.c)] {
                for (g, w) in got.iter().zip(want.iter()) {
                    if *w == 0.0 {
                        samples.push(*g);
                    } else if g.to_bits() != w.to_bits() {
                        problems.push(format!(
                            "structural entry changed at eps {eps}, seed {seed}"
                        ));
                    }
                }
            }
            if p.x0 != exact.x0 {
                problems.push(format!("initial state changed at eps {eps}, seed {seed}"));
            }
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let rel = (std / eps.sqrt() - 1.0).abs();
        if samples.len() < 10_000 || rel > 0.05 {
            problems.push(format!(
                "eps {eps}: std {std:.4} vs {:.4} over {} samples",
                eps.sqrt(),
                samples.len()
            ));
        }
        stats.push(format!("eps {eps}: n {} rel dev {rel:.4}", samples.len()));
    }
    let verdict = if problems.is_empty() {
        Ok(stats.join("; "))
    } else {
        Err(problems.join("; "))
    };
    report(2, "warm-start noise only on zero entries", started, verdict);
}

#[test]
fn c03_lstar_recovers_corpus() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut log = Vec::new();
    for (name, m) in fixtures::desk_corpus() {
        for trial in 0..3u64 {
            let cfg = EqOracleConfig {
                seed: trial * 1000,
                ..EqOracleConfig::default()
            };
            let out = lstar_learn(&m, &cfg);
            let acc = out.hypothesis.as_ref().map_or(0.0, |h| {
                acceptance_percentage(h, &m, 1000, 20, 0xface + trial)
            });
            log.push(format!(
                "{name}/{trial}: mq {} eq {} acc {acc}",
                out.stats.membership_queries, out.stats.equivalence_queries
            ));
            if out.status != Status::Success || acc != 100.0 {
                failures.push(format!("{name} trial {trial}: {acc}%"));
            }
        }
    }
    {
        let mut o = std::io::stdout().lock();
        for l in &log {
            let _ = writeln!(o, "    lstar {l}");
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let verdict = if failures.is_empty() && secs < 300.0 {
        Ok(format!("{} trials at 100%", log.len()))
    } else {
        Err(format!("{failures:?}, {secs:.1}s"))
    };
    report(3, "L* recovers every fixture", started, verdict);
}

fn run_equivalent<A: Transducer + ?Sized, B: Transducer + ?Sized>(
    a: &A,
    b: &B,
    len: usize,
) -> bool {
    all_words(a.num_letters(), len).all(|w| a.run_letters(&w) == b.run_letters(&w))
}

#[test]
fn c04_rpni_recovers_small_fixtures() {
    let started = Instant::now();
    let schedule = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000];
    let mut failures = Vec::new();
    let mut count = 0;
    for (name, m) in fixtures::desk_corpus()
        .into_iter()
        .filter(|(_, m)| m.num_states() <= 8)
    {
        count += 1;
        let sample = characteristic_sample(&m, m.num_states() + 1);
        let h = rpni_learn(&sample, m.alphabet()).unwrap();
        if !run_equivalent(&h, &m, 8) {
            failures.push(format!("{name}: characteristic sample not equivalent"));
        }
        let monotone = (0..5u64).any(|seed| {
            let sweep = accuracy_sweep(&m, &schedule, 20, seed).unwrap();
            let non_decreasing = sweep.windows(2).all(|w| w[0].accuracy <= w[1].accuracy);
            let last = sweep.last().unwrap();
            let stops_at_first_perfect = last.accuracy == 100.0
                && sweep[..sweep.len() - 1].iter().all(|p| p.accuracy < 100.0);
            non_decreasing && stops_at_first_perfect
        });
        if !monotone {
            failures.push(format!("{name}: no monotone sweep reaching 100%"));
        }
    }
    let verdict = if failures.is_empty() {
        Ok(format!("{count} machines"))
    } else {
        Err(failures.join("; "))
    };
    report(
        4,
        "RPNI recovers fixtures with at most 8 states",
        started,
        verdict,
    );
}

fn reference_loss(model: &Model, ex: &Example) -> f64 {
    let cache = model.forward(&ex.inputs);
    let mut total = 0.0;
    let mut count = 0;
    for (t, z) in cache.logits.iter().enumerate() {
        for k in 0..z.len() {
            let y = match model.config.architecture {
                Architecture::BaselineEmbedded => ((ex.outputs[t] >> k) & 1) as f64,
                Architecture::WarmstartBilinear => f64::from(ex.outputs[t] == k),
            };
            total += (1.0 + z[k].exp()).ln() - y * z[k];
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn c05_gradients_match_finite_differences() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for i in 0..60u64 {
        let ins = 1 + (i % 2) as usize;
        let outs = 1 + (i / 2 % 2) as usize;
        let machine = fixtures::random_moore(i, 2 + (i % 3) as usize, ins, outs);
        let ab = machine.alphabet();
        let cfg = if i % 2 == 0 {
            ModelConfig::baseline(ab)
        } else {
            ModelConfig::bilinear(ab, machine.num_states())
        };
        let mut model = Model::random(cfg, i);
        let len = rng.random_range(1..=5);
        let ex = Example {
            inputs: (0..len)
                .map(|_| rng.random_range(0..ab.num_input_letters()))
                .collect(),
            outputs: (0..len)
                .map(|_| rng.random_range(0..ab.num_output_letters()))
                .collect(),
        };
        let (_, grads) = model.backward(&model.forward(&ex.inputs), &ex);
        let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
        let h = 1e-5;
        for (block, g) in analytic.iter().enumerate() {
            for (k, &gk) in g.iter().enumerate() {
                let orig = model.param_slices_mut()[block][k];
                model.param_slices_mut()[block][k] = orig + h;
                let up = reference_loss(&model, &ex);
                model.param_slices_mut()[block][k] = orig - h;
                let down = reference_loss(&model, &ex);
                model.param_slices_mut()[block][k] = orig;
                let fd = (up - down) / (2.0 * h);
                let rel = (gk - fd).abs() / gk.abs().max(fd.abs()).max(1e-4);
                worst = worst.max(rel);
            }
        }
        instances += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    let verdict = if worst < 1e-4 && instances >= 50 && secs < 60.0 {
        Ok(format!(
            "{instances} instances, worst relative error {worst:.2e}"
        ))
    } else {
        Err(format!(
            "worst relative error {worst:.2e} over {instances} instances, {secs:.1}s"
        ))
    };
    report(5, "backward matches finite differences", started, verdict);
}

#[test]
fn c06_baseline_learns_counter() {
    let started = Instant::now();
    let m = fixtures::mod3_counter();
    let data = examples(&random_walk(&m, &WalkConfig::new(20, 10_000, 6).unwrap()));
    let (tr, te) = split_train_test(&data);
    let mut detail = Vec::new();
    let mut successes = 0;
    for seed in 0..3 {
        let cfg = TrainConfig {
            batch_size: Some(32),
            seed,
            eval_every: 1,
            stop_at: Some(0.99),
            max_epochs: 1000,
            ..TrainConfig::default()
        };
        let out = train(&tr, &te, ModelConfig::baseline(m.alphabet()), &cfg, None).unwrap();
        let best = out
            .history
            .iter()
            .map(|r| r.test_trace_acc)
            .fold(0.0, f64::max);
        let at = out
            .history
            .iter()
            .find(|r| r.test_trace_acc >= 0.99)
            .map(|r| r.epoch);
        if best >= 0.99 {
            successes += 1;
        }
        detail.push(format!("seed {seed}: best {best:.3} at {at:?}"));
    }
    let secs = started.elapsed().as_secs_f64();
    let verdict = if successes >= 2 && secs < 900.0 {
        Ok(format!("{} (9000/1000 traces)", detail.join(", ")))
    } else {
        Err(format!("{} in {secs:.0}s", detail.join(", ")))
    };
    report(
        6,
        "baseline reaches full trace acceptance",
        started,
        verdict,
    );
}

fn first_at(history: &[moore_ssm::train::EpochRecord], threshold: f64) -> Option<usize> {
    history
        .iter()
        .find(|r| r.test_trace_acc >= threshold)
        .map(|r| r.epoch)
}

#[test]
fn c07_warm_start_converges_first() {
    let started = Instant::now();
    const SEEDS: u64 = 5;
    const MAX_EPOCHS: usize = 1000;
    let mut problems = Vec::new();
    let mut detail = Vec::new();
    let mut warm_all = Vec::new();
    let mut random_all = Vec::new();
    for n in [2, 3] {
        let m = fixtures::priority_arbiter(n);
        let grants = m.alphabet().output_aps().to_vec();
        let raw = random_walk(&m, &WalkConfig::new(20, 3000, 70 + n as u64).unwrap());
        let data = examples(&dynamic_arbitration_transform(&m, &raw, 3, &grants).unwrap());
        let (tr, te) = split_train_test(&data);
        let model_cfg = ModelConfig::bilinear(m.alphabet(), m.num_states());
        let mut wins = 0;
        let mut inits = Vec::new();
        let mut pairs = Vec::new();
        for seed in 0..SEEDS {
            let cfg = TrainConfig {
                batch_size: Some(8),
                seed,
                eval_every: 5,
                stop_at: Some(0.9),
                max_epochs: MAX_EPOCHS,
                ..TrainConfig::default()
            };
            let warm = train(
                &tr,
                &te,
                model_cfg,
                &cfg,
                Some(warm_start_init(&m, 0.03, seed).unwrap()),
            )
            .unwrap();
            let random = train(&tr, &te, model_cfg, &cfg, None).unwrap();
            let init = warm.history[0].test_trace_acc;
            inits.push(init);
            if !(0.05..=0.6).contains(&init) {
                problems.push(format!(
                    "n {n} seed {seed}: warm initial accuracy {init:.3}"
                ));
            }
            let w = first_at(&warm.history, 0.9);
            let r = first_at(&random.history, 0.9);
            let censor = MAX_EPOCHS + 1;
            if w.unwrap_or(censor) < r.unwrap_or(censor) {
                wins += 1;
            }
            warm_all.push(w);
            random_all.push(r);
            pairs.push(format!("{w:?}/{r:?}"));
        }
        if wins < 4 {
            problems.push(format!("n {n}: warm first in {wins}/{SEEDS}"));
        }
        detail.push(format!(
            "n {n}: warm/random epochs {} inits {:?}",
            pairs.join(" "),
            inits.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>()
        ));
    }
    let cmp = compare_convergence(&warm_all, &random_all, 0.9, MAX_EPOCHS + 1).unwrap();
    if cmp.p_value >= 0.05 {
        problems.push(format!("Mann-Whitney p {:.4}", cmp.p_value));
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 3600.0 {
        problems.push(format!("runtime {secs:.0}s"));
    }
    detail.push(format!("p {:.4}", cmp.p_value));
    let verdict = if problems.is_empty() {
        Ok(detail.join("; "))
    } else {
        Err(format!("{} | {}", problems.join("; "), detail.join("; ")))
    };
    report(
        7,
        "warm start converges before random init",
        started,
        verdict,
    );
}

fn cap_holds(trace: &Trace, channels: &[usize], k: u64) -> bool {
    let mut counts = vec![0u64; channels.len()];
    for &(_, o) in trace.steps() {
        for (c, &bit) in channels.iter().enumerate() {
            counts[c] += u64::from((o.bits() >> bit) & 1 == 1);
        }
        let total: u64 = counts.iter().sum();
        if counts
            .iter()
            .any(|&c| c > total / channels.len() as u64 + k)
        {
            return false;
        }
    }
    true
}

#[test]
fn c08_arbitration_data_validity() {
    let started = Instant::now();
    let arbiters = [
        ("round_robin_2", fixtures::round_robin_arbiter(2)),
        ("round_robin_3", fixtures::round_robin_arbiter(3)),
        ("priority_2", fixtures::priority_arbiter(2)),
        ("priority_3", fixtures::priority_arbiter(3)),
    ];
    let mut problems = Vec::new();
    let mut detail = Vec::new();
    for (name, m) in &arbiters {
        let grants = m.alphabet().output_aps().to_vec();
        let channels: Vec<usize> = (0..grants.len()).collect();
        let raw = random_walk(m, &WalkConfig::new(60, 1000, 8).unwrap());
        let out = dynamic_arbitration_transform(m, &raw, 3, &grants).unwrap();
        let violations = out.iter().filter(|t| !cap_holds(t, &channels, 3)).count();
        let rejected = out
            .iter()
            .filter(|t| {
                let word = t.input_letters();
                table_run(m, &word).1 != t.outputs()
            })
            .count();
        if violations > 0 || rejected == 0 {
            problems.push(format!(
                "{name}: {violations} cap violations, {rejected} rejected"
            ));
        }
        detail.push(format!("{name}: {rejected}/1000 rejected"));
    }
    let verdict = if problems.is_empty() {
        Ok(detail.join(", "))
    } else {
        Err(problems.join("; "))
    };
    report(
        8,
        "capped traces respect the cap and differ from the base",
        started,
        verdict,
    );
}

/// Every labeling of `n` points up to renaming, as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max + 1 {
            cur[i] = v;
            rec(i + 1, max.max(v), cur, out);
        }
    }
    if n == 0 {
        return out;
    }
    rec(1, 0, &mut cur, &mut out);
    out
}

fn choose2(k: usize) -> f64 {
    (k * k.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index from the pair-agreement counts.
fn oracle_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let pairs = choose2(n);
    let sa = both + only_a;
    let sb = both + only_b;
    let expected = sa * sb / pairs;
    let max = (sa + sb) / 2.0;
    let _ = neither;
    if (max - expected).abs() < 1e-15 {
        1.0
    } else {
        (both - expected) / (max - expected)
    }
}

fn entropy(labels: &[usize]) -> f64 {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    let n = labels.len() as f64;
    -counts.values().map(|&c| c / n * (c / n).ln()).sum::<f64>()
}

/// Mutual information through `I = H(a) + H(b) - H(a, b)`.
fn oracle_nmi(a: &[usize], b: &[usize]) -> f64 {
    let joint: Vec<usize> = a.iter().zip(b).map(|(&x, &y)| x * 64 + y).collect();
    let (ha, hb) = (entropy(a), entropy(b));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mi = ha + hb - entropy(&joint);
    mi / ((ha + hb) / 2.0)
}

/// Two-sided p by assigning every subset of the pooled values to `x`.
fn oracle_mann_whitney(x: &[f64], y: &[f64]) -> (f64, f64) {
    let u_of = |xs: &[f64], ys: &[f64]| -> f64 {
        xs.iter()
            .flat_map(|a| {
                ys.iter().map(move |b| {
                    if a > b {
                        1.0
                    } else if a == b {
                        0.5
                    } else {
                        0.0
                    }
                })
            })
            .sum()
    };
    let u = u_of(x, y);
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let mean = (x.len() * y.len()) as f64 / 2.0;
    let observed = (u - mean).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != x.len() {
            continue;
        }
        let xs: Vec<f64> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pooled[i])
            .collect();
        let ys: Vec<f64> = (0..n)
            .filter(|i| mask >> i & 1 == 0)
            .map(|i| pooled[i])
            .collect();
        total += 1;
        if (u_of(&xs, &ys) - mean).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    (u, hits as f64 / total as f64)
}

#[test]
fn c09_metric_fixtures() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let mut compared = 0usize;
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let parts = set_partitions(n);
        let partners: Vec<&Vec<usize>> = if n <= 7 {
            parts.iter().collect()
        } else {
            parts.iter().step_by(67).collect()
        };
        let mut relabel = ChaCha8Rng::seed_from_u64(n as u64);
        for a in &parts {
            for b in &partners {
                // Arbitrary label values exercise relabeling invariance.
                let shift: usize = relabel.random_range(0..5);
                let b: Vec<usize> = b.iter().map(|&l| (l + shift) * 3).collect();
                let ari = adjusted_rand_index(a, &b).unwrap();
                let nmi = normalized_mutual_information(a, &b).unwrap();
                worst = worst
                    .max((ari - oracle_ari(a, &b)).abs())
                    .max((nmi - oracle_nmi(a, &b)).abs());
                compared += 1;
            }
        }
    }
    if worst > 1e-10 {
        problems.push(format!("ARI/NMI deviate by {worst:.2e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mw = 0;
    for total in 2..=10usize {
        for nx in 1..total {
            for _ in 0..10 {
                let x: Vec<f64> = (0..nx).map(|_| rng.random_range(0..6) as f64).collect();
                let y: Vec<f64> = (0..total - nx)
                    .map(|_| rng.random_range(0..6) as f64)
                    .collect();
                let got = mann_whitney_u(&x, &y).unwrap();
                let (u, p) = oracle_mann_whitney(&x, &y);
                if !got.exact || got.u != u || (got.p_value - p).abs() > 1e-9 {
                    problems.push(format!(
                        "{x:?} vs {y:?}: got U {} p {} want U {u} p {p}",
                        got.u, got.p_value
                    ));
                }
                mw += 1;
            }
        }
    }
    let same = vec![DVector::from_vec(vec![0.5, 0.5]); 6];
    let coincident =
        separation_ratio(&LabeledPoints::new(same, vec![0, 0, 0, 1, 1, 1]).unwrap()).unwrap();
    if coincident != 0.0 {
        problems.push(format!("coincident classes gave {coincident}"));
    }
    let hot: Vec<DVector<f64>> = (0..9)
        .map(|i| DVector::from_fn(3, |k, _| f64::from(k == i % 3)))
        .collect();
    let labels: Vec<usize> = (0..9).map(|i| i % 3).collect();
    let separated = separation_ratio(&LabeledPoints::new(hot, labels).unwrap()).unwrap();
    if separated != f64::INFINITY {
        problems.push(format!("one-hot clusters gave {separated}"));
    }
    let verdict = if problems.is_empty() {
        Ok(format!(
            "{compared} labeling pairs (worst {worst:.1e}), {mw} rank tests, separation edge cases"
        ))
    } else {
        Err(problems.join("; "))
    };
    report(
        9,
        "metrics agree with brute-force oracles",
        started,
        verdict,
    );
}

fn validate<T: Serialize>(kind: &str, value: &T, problems: &mut Vec<String>) {
    let json = serde_json::to_value(value).unwrap();
    let s: serde_json::Value = serde_json::from_str(schema(kind).expect("shipped schema")).unwrap();
    let validator = jsonschema::validator_for(&s).unwrap();
    for e in validator.iter_errors(&json) {
        problems.push(format!("{kind}: {e}"));
    }
}

#[test]
fn c10_format_conformance() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let corpus = fixtures::desk_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..10_000 {
        let m = &corpus[i % corpus.len()].1;
        let ab = m.alphabet();
        let len = rng.random_range(1..=30);
        let steps = (0..len)
            .map(|_| {
                (
                    ab.input_letter(rng.random_range(0..ab.num_input_letters())),
                    ab.output_letter(rng.random_range(0..ab.num_output_letters())),
                )
            })
            .collect();
        let t = Trace::new(steps);
        match parse_spot(&serialize_spot(&t, ab), ab) {
            Ok(back) if back == t => {}
            other => {
                problems.push(format!("trace {i} did not round trip: {other:?}"));
                break;
            }
        }
    }

    let m = fixtures::figure4();
    let lstar = lstar_learn(&m, &EqOracleConfig::default());
    let acc = acceptance_percentage(lstar.hypothesis.as_ref().unwrap(), &m, 100, 20, 1);
    validate(
        "active_trial",
        &ActiveTrialRecord {
            tlsf_file: "figure4.dot".into(),
            trial: 0,
            sample_size: lstar.stats.sample_size(),
            accuracy: acc,
            status: lstar.status,
        },
        &mut problems,
    );
    let sweep = accuracy_sweep(&m, &[1, 10, 100, 1000], 20, 0).unwrap();
    validate(
        "passive_trial",
        &PassiveTrialRecord::from_sweep("figure4.dot", 0, 20, sweep),
        &mut problems,
    );
    validate(
        "passive_trial",
        &PassiveTrialRecord::from_sweep("figure4.dot", 1, 20, Vec::new()),
        &mut problems,
    );

    let data = examples(&random_walk(&m, &WalkConfig::new(10, 50, 2).unwrap()));
    let (tr, te) = split_train_test(&data);
    let cfg = TrainConfig {
        max_epochs: 3,
        eval_every: 1,
        ..TrainConfig::default()
    };
    let out = train(&tr, &te, ModelConfig::baseline(m.alphabet()), &cfg, None).unwrap();
    let log = TrainingLog::new("figure4.dot", data.len(), 0.9, out.history.clone());
    validate("training_log", &log, &mut problems);

    let (p, enc) = encode_moore_as_ssm(&m);
    let exact = Model::from_ssm(ModelConfig::bilinear(m.alphabet(), m.num_states()), p)
        .unwrap()
        .with_nonlinearity(Nonlinearity::Identity);
    let eval_acc = model_acceptance_percentage(&exact, &m, 100, 20, 3).unwrap();
    validate(
        "eval",
        &EvalRecord {
            candidate: "exact.json".into(),
            reference: "figure4.dot".into(),
            num_traces: 100,
            trace_length: 20,
            seed: 3,
            accuracy: eval_acc,
        },
        &mut problems,
    );
    let lp = collect_hidden_states(&exact, &m, 200, 5, 4).unwrap();
    validate(
        "latent_metrics",
        &latent_metrics(&lp, &enc.states).unwrap(),
        &mut problems,
    );
    let cmp = compare_convergence(&[Some(5), None], &[Some(10), Some(20)], 0.9, 1001).unwrap();
    validate("comparison", &cmp, &mut problems);
    validate(
        "manifest",
        &RunManifest {
            version: MANIFEST_VERSION,
            method: "lstar".into(),
            machine: "figure4.dot".into(),
            seed: 0,
            trials: vec![TrialEntry {
                trial: 0,
                seed: 0,
                outputs: vec!["trial_0/record.json".into()],
                status: Status::Success,
            }],
        },
        &mut problems,
    );

    let mut stray = serde_json::to_value(&log).unwrap();
    stray["unexpected"] = serde_json::json!(1);
    let s: serde_json::Value = serde_json::from_str(schema("training_log").unwrap()).unwrap();
    if jsonschema::is_valid(&s, &stray) {
        problems.push("schema accepted an unknown field".into());
    }
    let verdict = if problems.is_empty() {
        Ok("10000 traces round trip, 7 record kinds validate".into())
    } else {
        Err(problems.join("; "))
    };
    report(10, "trace and record formats conform", started, verdict);
}
