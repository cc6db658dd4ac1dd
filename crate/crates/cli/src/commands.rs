use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ftsum::corpus::{
    build_vocab, corpus_stats, load_pretrained_embeddings, normalize_line, read_parallel_corpus, read_sentences,
    EncodedPair, ParallelPair, Vocab,
};
use ftsum::eval::{gate_report, gate_trajectory, perplexity, read_faithfulness, score_corpus};
use ftsum::factex::{extract_facts, read_conllu, read_triples, write_facts};
use ftsum::infer::{beam_search_with, DecodeOptions, ModelStepper};
use ftsum::model::{tiny_gradcheck, train, FusionMode, Model, SavedModel, TrainLogRecord};
use ftsum::nn::SeededRng;
use rand::SeedableRng;
use serde_json::json;

use crate::config::Config;
use crate::{BuildVocabArgs, Command, CorpusArgs, DecodeArgs, EvaluateArgs, ExtractArgs, GateArgs, TrainArgs};

/// Largest relative error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

/// Runs one subcommand. Returns the exit code for outcomes that are not
/// errors but still fail (a gradient check above tolerance).
pub fn dispatch(command: Command, mut cfg: Config, quiet: bool) -> Result<i32> {
    let log = |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    match command {
        Command::ExtractFacts(a) => extract(a, &mut cfg).map(|_| 0),
        Command::Stats(a) => stats(&a).map(|_| 0),
        Command::BuildVocab(a) => vocab_cmd(&a, &cfg, &log).map(|_| 0),
        Command::Train(a) => train_cmd(a, &mut cfg, &log).map(|_| 0),
        Command::Decode(a) => decode(a, &mut cfg).map(|_| 0),
        Command::Evaluate(a) => evaluate_cmd(a, &mut cfg).map(|_| 0),
        Command::GateReport(a) => gate_cmd(a, &mut cfg).map(|_| 0),
        Command::Gradcheck => gradcheck(&cfg),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = output(None)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn required<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| anyhow!("no {key} given (flag or config key {key})"))
}

fn extract(a: ExtractArgs, cfg: &mut Config) -> Result<()> {
    if a.no_reporting_filter {
        cfg.reporting_filter = false;
    }
    if let Some(l) = &a.labels {
        cfg.set("labels", l)?;
    }
    let fc = cfg.fact_config();
    let trees = read_conllu(open(&a.conllu)?)?;
    let triples = match &a.triples {
        Some(p) => read_triples(open(p)?)?,
        None => Default::default(),
    };
    if let Some(bad) = triples.keys().find(|id| **id >= trees.len()) {
        bail!("triples reference sentence {bad} but the parse file has {} sentences", trees.len());
    }
    let seqs: Vec<_> = trees
        .iter()
        .enumerate()
        .map(|(i, t)| extract_facts(Some(t), triples.get(&i).map_or(&[][..], Vec::as_slice), &fc))
        .collect();
    write_facts(output(a.output.as_deref())?, &seqs)?;
    Ok(())
}

fn read_corpus(a: &CorpusArgs) -> Result<Vec<ParallelPair>> {
    Ok(read_parallel_corpus(&a.corpus, a.facts.as_deref())?)
}

fn stats(a: &CorpusArgs) -> Result<()> {
    let s = corpus_stats(&read_corpus(a)?)?;
    print_json(&serde_json::to_value(s)?)
}

fn vocabs_from(pairs: &[ParallelPair], cfg: &Config) -> Result<(Vocab, Vocab)> {
    let source = build_vocab(
        pairs.iter().flat_map(|p| [&p.source, &p.facts]),
        cfg.min_freq,
        cfg.source_vocab_size,
    )?;
    let target = build_vocab(pairs.iter().map(|p| &p.target), cfg.min_freq, cfg.target_vocab_size)?;
    Ok((source, target))
}

fn vocab_cmd(a: &BuildVocabArgs, cfg: &Config, log: &dyn Fn(&str)) -> Result<()> {
    let (source, target) = vocabs_from(&read_corpus(&a.input)?, cfg)?;
    source.save(&a.source_out)?;
    target.save(&a.target_out)?;
    log(&format!("source vocabulary {} entries, target {}", source.len(), target.len()));
    Ok(())
}

fn encode_all(pairs: &[ParallelPair], source: &Vocab, target: &Vocab) -> Result<Vec<EncodedPair>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| EncodedPair::encode(p, source, target).with_context(|| format!("pair {}", i + 1)))
        .collect()
}

fn train_cmd(a: TrainArgs, cfg: &mut Config, log: &dyn Fn(&str)) -> Result<()> {
    let flags = [
        ("train_corpus", &a.train),
        ("train_facts", &a.train_facts),
        ("dev_corpus", &a.dev),
        ("dev_facts", &a.dev_facts),
        ("source_vocab", &a.source_vocab),
        ("target_vocab", &a.target_vocab),
        ("embeddings", &a.embeddings),
        ("checkpoint", &a.out),
        ("train_log", &a.log),
    ];
    for (key, value) in flags {
        if let Some(p) = value {
            cfg.set(key, &p.to_string_lossy())?;
        }
    }
    let train_pairs = read_parallel_corpus(required(&cfg.train_corpus, "train_corpus")?, cfg.train_facts.as_deref())?;
    let dev_pairs = read_parallel_corpus(required(&cfg.dev_corpus, "dev_corpus")?, cfg.dev_facts.as_deref())?;
    let checkpoint = required(&cfg.checkpoint, "checkpoint")?.to_path_buf();

    let (source_vocab, target_vocab) = match (&cfg.source_vocab, &cfg.target_vocab) {
        (Some(s), Some(t)) => (Vocab::load(s)?, Vocab::load(t)?),
        (None, None) => vocabs_from(&train_pairs, cfg)?,
        _ => bail!("give both source_vocab and target_vocab, or neither"),
    };
    let train_set = encode_all(&train_pairs, &source_vocab, &target_vocab).context("training corpus")?;
    let dev_set = encode_all(&dev_pairs, &source_vocab, &target_vocab).context("development corpus")?;

    let model_cfg = cfg.model_config(source_vocab.len(), target_vocab.len());
    let mut rng = SeededRng::seed_from_u64(cfg.seed);
    let mut model = Model::init(model_cfg, &mut rng)?;
    if let Some(p) = &cfg.embeddings {
        let (src, cov) = load_pretrained_embeddings(p, &source_vocab, cfg.embed_dim, &mut rng)?;
        let (tgt, _) = load_pretrained_embeddings(p, &target_vocab, cfg.embed_dim, &mut rng)?;
        model.params.src_embed = src;
        model.params.tgt_embed = tgt;
        log(&format!("pretrained vectors cover {:.1}% of the source vocabulary", 100.0 * cov.fraction));
    }
    log(&format!(
        "training {} model on {} pairs (dev {}), vocabularies {}/{}",
        cfg.fusion,
        train_set.len(),
        dev_set.len(),
        source_vocab.len(),
        target_vocab.len()
    ));

    let mut log_out = cfg.train_log.as_deref().map(|p| output(Some(p))).transpose()?;
    let mut write_err = None;
    let outcome = train(model, &train_set, &dev_set, &cfg.train_config(), |r: &TrainLogRecord| {
        log(&format!("step {} dev cost {:.4} lr {}", r.step, r.dev_cost, r.lr));
        if let Some(w) = log_out.as_mut() {
            let line = serde_json::to_string(r).expect("log record serializes");
            if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                write_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).context("writing training log");
    }
    let saved = SavedModel {
        model: outcome.model,
        source_vocab,
        target_vocab,
    };
    saved.save(&checkpoint, cfg.checkpoint_precision)?;
    log(&format!("{} steps, final lr {}, saved {}", outcome.steps, outcome.lr, checkpoint.display()));
    Ok(())
}

fn load_checkpoint(flag: &Option<PathBuf>, cfg: &mut Config) -> Result<SavedModel> {
    if let Some(p) = flag {
        cfg.set("checkpoint", &p.to_string_lossy())?;
    }
    let path = required(&cfg.checkpoint, "checkpoint")?;
    SavedModel::load(path).with_context(|| format!("loading {}", path.display()))
}

fn decode(a: DecodeArgs, cfg: &mut Config) -> Result<()> {
    let saved = load_checkpoint(&a.checkpoint, cfg)?;
    let opts = DecodeOptions::new(a.beam.unwrap_or(cfg.beam), a.max_len.unwrap_or(cfg.max_len));
    let sentences = read_sentences(&a.input)?;
    let facts = match &a.facts {
        Some(p) => read_sentences(p)?,
        None => vec![Vec::new(); sentences.len()],
    };
    if facts.len() != sentences.len() {
        bail!("{} fact lines for {} input sentences", facts.len(), sentences.len());
    }
    let mut out = output(a.output.as_deref())?;
    let mut trace = a.gate_trace.as_deref().map(|p| output(Some(p))).transpose()?;
    for (i, (s, f)) in sentences.iter().zip(&facts).enumerate() {
        let src = saved.source_vocab.encode(s);
        let fct = saved.source_vocab.encode(f);
        let stepper = ModelStepper::new(&saved.model, &src, &fct).with_context(|| format!("input line {}", i + 1))?;
        let best = beam_search_with(&stepper, &opts)?;
        writeln!(out, "{}", saved.target_vocab.decode(best.words(opts.eos)).join(" "))?;
        if let Some(t) = trace.as_mut() {
            writeln!(t, "{}", json!({"line": i + 1, "gate_means": best.gate_trace}))?;
        }
    }
    out.flush()?;
    if let Some(mut t) = trace {
        t.flush()?;
    }
    Ok(())
}

fn read_token_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(normalize_line).collect())
}

fn evaluate_cmd(a: EvaluateArgs, cfg: &mut Config) -> Result<()> {
    let mut report = serde_json::Map::new();
    if let (Some(c), Some(r)) = (&a.candidates, &a.references) {
        let stem = a.stem || cfg.stem;
        let rouge = score_corpus(&read_token_lines(c)?, &read_token_lines(r)?, stem)?;
        report.insert("rouge".into(), serde_json::to_value(rouge)?);
    }
    if a.checkpoint.is_some() {
        let saved = load_checkpoint(&a.checkpoint, cfg)?;
        let corpus = a.corpus.clone().expect("clap enforces --corpus");
        let pairs = read_parallel_corpus(&corpus, a.facts.as_deref())?;
        let set = encode_all(&pairs, &saved.source_vocab, &saved.target_vocab)?;
        report.insert("perplexity".into(), json!(perplexity(&saved.model, &set)?));
    }
    if let Some(p) = &a.annotations {
        let tally = read_faithfulness(p)?;
        let systems: serde_json::Map<String, serde_json::Value> = tally
            .iter()
            .map(|(k, c)| {
                (
                    k.clone(),
                    json!({"faithful": c.faithful, "fake": c.fake, "unclear": c.unclear, "total": c.total()}),
                )
            })
            .collect();
        report.insert("faithfulness".into(), serde_json::Value::Object(systems));
    }
    if report.is_empty() {
        bail!("nothing to evaluate: give --candidates/--references, --checkpoint/--corpus or --annotations");
    }
    print_json(&serde_json::Value::Object(report))
}

fn gate_cmd(a: GateArgs, cfg: &mut Config) -> Result<()> {
    let saved = load_checkpoint(&a.checkpoint, cfg)?;
    if saved.model.config.fusion != FusionMode::Gated {
        bail!("gate-report needs a gated checkpoint");
    }
    let set = encode_all(&read_corpus(&a.input)?, &saved.source_vocab, &saved.target_vocab)?;
    let report = gate_report(&saved.model, &set, a.top_k.unwrap_or(cfg.top_k))?;
    let mut value = serde_json::to_value(report)?;
    if let Some(p) = &a.log {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str::<TrainLogRecord>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("parsing {}", p.display()))?;
        let traj: Vec<_> = gate_trajectory(&records)
            .into_iter()
            .map(|(step, mean, std)| json!({"step": step, "mean": mean, "std": std}))
            .collect();
        value["trajectory"] = json!(traj);
    }
    print_json(&value)
}

fn gradcheck(cfg: &Config) -> Result<i32> {
    let mut worst: f64 = 0.0;
    for fusion in [FusionMode::Concat, FusionMode::Gated] {
        let r = tiny_gradcheck(fusion, cfg.seed)?;
        let at = r.worst.as_ref().map(|w| format!(" at {}[{}]", w.0, w.1)).unwrap_or_default();
        println!("{fusion}: max relative error {:.3e} over {} components{at}", r.max_rel_error, r.checked);
        worst = worst.max(r.max_rel_error);
    }
    let ok = worst <= GRADCHECK_TOLERANCE;
    println!("{} (tolerance {GRADCHECK_TOLERANCE:e})", if ok { "ok" } else { "FAILED" });
    Ok(if ok { 0 } else { 1 })
}

