use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use clinicsum_core::corpus::{
    corpus_stats, flatten_diarized, read_pairs, read_transcripts, CorpusStats, Transcript,
    TranscriptFormat,
};
use clinicsum_core::embed::{EmbeddingProvider, HttpEmbedder, HttpEmbedderConfig, TestEmbedder};
use clinicsum_core::eval::review::{read_csv, write_csv};
use clinicsum_core::eval::{
    evaluate_pairs, irr_from_preferences, make_review_sheet, win_rate, IrrResult, KeyRow,
    PreferenceRecord, WinRateTable,
};
use clinicsum_core::index::{build_index_with, load_index, save_index, ChunkIndex};
use clinicsum_core::infer::{
    summarize_pipeline, ChatClient, ChatClientConfig, Generator, Pipeline, StubGenerator,
    SummaryRecord,
};
use clinicsum_core::io::write_json_atomic;
use clinicsum_core::retrieve::{explain, filter_index, RetrievalQuery};
use clinicsum_core::Error;

use crate::config::{AppConfig, EmbeddingSettings, GeneratorSettings};
use crate::CliError;

pub struct Context {
    pub cfg: AppConfig,
    pub pool: rayon::ThreadPool,
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Transcripts: a JSONL file, a .txt file or a directory of .txt files.
    #[arg(long = "in")]
    input: PathBuf,
    /// Input format; guessed from the path when omitted.
    #[arg(long, value_parser = ["jsonl", "txt"])]
    format: Option<String>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory, one `<id>.index.json` per transcript.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Transcripts to index on the fly.
    #[arg(
        long = "in",
        conflicts_with = "index",
        required_unless_present = "index"
    )]
    input: Option<PathBuf>,
    #[arg(long, value_parser = ["jsonl", "txt"])]
    format: Option<String>,
    /// Saved index file, or a directory of `*.index.json` files.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Output directory, one `<id>.context.json` per transcript.
    #[arg(long)]
    out: PathBuf,
    /// Also write `<id>.audit.json` with every candidate's ranks and scores.
    #[arg(long)]
    explain: bool,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory, one `<id>.summary.json` per transcript.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of `*.summary.json` files, or JSONL lines `{"id", "summary"}`.
    #[arg(long)]
    candidates: PathBuf,
    /// JSONL dataset pairs with `id`, `conversation` and reference `summary`.
    #[arg(long)]
    references: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Transcripts (JSONL or .txt).
    #[arg(
        long = "in",
        conflicts_with = "pairs",
        required_unless_present = "pairs"
    )]
    input: Option<PathBuf>,
    #[arg(long, value_parser = ["jsonl", "txt"])]
    format: Option<String>,
    /// JSONL dataset pairs; reports conversations and summaries separately.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReviewSheetArgs {
    /// JSONL dataset pairs supplying conversation and ground truth per id.
    #[arg(long)]
    data: PathBuf,
    /// First system as NAME=PATH (candidates in any `evaluate` format).
    #[arg(long, value_parser = parse_system)]
    x: (String, PathBuf),
    /// Second system as NAME=PATH.
    #[arg(long, value_parser = parse_system)]
    y: (String, PathBuf),
    #[arg(long)]
    sheet: PathBuf,
    #[arg(long)]
    key: PathBuf,
}

#[derive(Debug, Args)]
pub struct IrrArgs {
    /// CSV with rater_id, item_id, choice (A, B or AB).
    #[arg(long)]
    prefs: PathBuf,
    /// Key CSV written by review-sheet.
    #[arg(long)]
    key: PathBuf,
    /// JSON output with the win-rate table and agreement statistics.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_system(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

fn require_exists(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "input not found: {}",
            path.display()
        )))
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| {
        CliError::Runtime(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn load_transcripts(path: &Path, format: Option<&str>) -> Result<Vec<Transcript>, CliError> {
    require_exists(path)?;
    let format = match format {
        Some(f) => f
            .parse()
            .map_err(|e: Error| CliError::Usage(e.to_string()))?,
        None => TranscriptFormat::detect(path),
    };
    Ok(read_transcripts(path, format)?)
}

/// Keeps ids usable as file names.
fn file_stem(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

fn build_provider(cfg: &AppConfig) -> Result<Box<dyn EmbeddingProvider>, CliError> {
    Ok(match &cfg.embedding {
        EmbeddingSettings::Test { dim } => Box::new(TestEmbedder::new(*dim)?),
        EmbeddingSettings::Http {
            base_url,
            model,
            dim,
            timeout,
        } => {
            let mut c = HttpEmbedderConfig::new(base_url.clone(), model.clone(), *dim);
            c.timeout = *timeout;
            Box::new(HttpEmbedder::new(c)?)
        }
    })
}

fn build_generator(cfg: &AppConfig) -> Result<Box<dyn Generator>, CliError> {
    Ok(match &cfg.generator {
        GeneratorSettings::Stub { canned: None } => Box::new(StubGenerator::Echo),
        GeneratorSettings::Stub { canned: Some(path) } => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read stub file {}: {e}", path.display()))
            })?;
            Box::new(StubGenerator::Canned(text))
        }
        GeneratorSettings::Http {
            base_url,
            model,
            temperature,
            max_tokens,
            timeout,
        } => {
            let mut c = ChatClientConfig::new(base_url.clone(), model.clone());
            c.temperature = *temperature;
            c.max_tokens = *max_tokens;
            c.timeout = *timeout;
            Box::new(ChatClient::new(c)?)
        }
    })
}

/// Reports per-item failures and turns them into a batch error.
fn finish<T>(results: Vec<(String, Result<T, Error>)>) -> Result<Vec<T>, CliError> {
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (id, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                eprintln!("error: {id}: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        Err(CliError::Batch(failed))
    } else {
        Ok(ok)
    }
}

fn print_or_write<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    match out {
        Some(path) => Ok(write_json_atomic(path, value)?),
        None => {
            let s = serde_json::to_string_pretty(value)
                .map_err(|e| CliError::Runtime(Error::Precondition(e.to_string())))?;
            println!("{s}");
            Ok(())
        }
    }
}

pub fn index(ctx: &Context, args: IndexArgs) -> Result<(), CliError> {
    let transcripts = load_transcripts(&args.input.input, args.input.format.as_deref())?;
    let provider = build_provider(&ctx.cfg)?;
    create_dir(&args.out)?;
    let results = ctx.pool.install(|| {
        transcripts
            .par_iter()
            .map(|t| {
                let r = build_index_with(t, provider.as_ref(), ctx.cfg.bm25).and_then(|idx| {
                    save_index(
                        &idx,
                        &args.out.join(format!("{}.index.json", file_stem(&t.id))),
                    )
                });
                (t.id.clone(), r)
            })
            .collect()
    });
    let written = finish(results)?;
    println!(
        "indexed {} transcript(s) into {}",
        written.len(),
        args.out.display()
    );
    Ok(())
}

fn load_indices(path: &Path) -> Result<Vec<ChunkIndex>, CliError> {
    require_exists(path)?;
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".index.json"))
            .collect();
        files.sort();
        Ok(files
            .iter()
            .map(|p| load_index(p))
            .collect::<Result<_, _>>()?)
    } else {
        Ok(vec![load_index(path)?])
    }
}

pub fn retrieve(ctx: &Context, args: RetrieveArgs) -> Result<(), CliError> {
    let provider = build_provider(&ctx.cfg)?;
    let indices = match (&args.input, &args.index) {
        (_, Some(index)) => {
            let indices = load_indices(index)?;
            if let Some(bad) = indices.iter().find(|i| i.provider != provider.name()) {
                return Err(CliError::Usage(format!(
                    "index {:?} was built with provider {:?}, configured provider is {:?}",
                    bad.transcript_id,
                    bad.provider,
                    provider.name()
                )));
            }
            indices.into_iter().map(Ok).collect::<Vec<_>>()
        }
        (Some(input), None) => {
            let transcripts = load_transcripts(input, args.format.as_deref())?;
            ctx.pool.install(|| {
                transcripts
                    .par_iter()
                    .map(|t| build_index_with(t, provider.as_ref(), ctx.cfg.bm25))
                    .collect()
            })
        }
        (None, None) => return Err(CliError::Usage("one of --in or --index is required".into())),
    };
    let indices = finish(
        indices
            .into_iter()
            .map(|r| (String::from("index"), r))
            .collect(),
    )?;

    let query = RetrievalQuery::new(ctx.cfg.query.clone())?.resolve(provider.as_ref())?;
    create_dir(&args.out)?;
    let results = ctx.pool.install(|| {
        indices
            .par_iter()
            .map(|idx| {
                let r = filter_index(idx, provider.as_ref(), &query, &ctx.cfg.fusion).and_then(
                    |fused| {
                        let stem = file_stem(&idx.transcript_id);
                        write_json_atomic(&args.out.join(format!("{stem}.context.json")), &fused)?;
                        if args.explain {
                            let audit = explain(idx, &fused, &ctx.cfg.fusion);
                            write_json_atomic(
                                &args.out.join(format!("{stem}.audit.json")),
                                &audit,
                            )?;
                        }
                        Ok(())
                    },
                );
                (idx.transcript_id.clone(), r)
            })
            .collect()
    });
    let done = finish(results)?;
    println!(
        "filtered {} transcript(s) into {}",
        done.len(),
        args.out.display()
    );
    Ok(())
}

pub fn summarize(ctx: &Context, args: SummarizeArgs) -> Result<(), CliError> {
    let transcripts = load_transcripts(&args.input.input, args.input.format.as_deref())?;
    let provider = build_provider(&ctx.cfg)?;
    let generator = build_generator(&ctx.cfg)?;
    let tokenizer = ctx.cfg.tokenizer.build();
    let query = RetrievalQuery::new(ctx.cfg.query.clone())?.resolve(provider.as_ref())?;
    let pipeline = Pipeline {
        query,
        fusion: ctx.cfg.fusion,
        bm25: ctx.cfg.bm25,
        instruction: ctx.cfg.instruction.clone(),
        ..Pipeline::new(provider.as_ref(), generator.as_ref(), tokenizer.as_ref())
    };
    create_dir(&args.out)?;
    let results = ctx.pool.install(|| {
        transcripts
            .par_iter()
            .map(|t| {
                let r = summarize_pipeline(t, &pipeline).and_then(|out| {
                    let path = args.out.join(format!("{}.summary.json", file_stem(&t.id)));
                    write_json_atomic(&path, &out.record())?;
                    tracing::info!(id = %t.id, latency_ms = out.latency.as_millis() as u64, "summarized");
                    if out.is_complete() {
                        Ok(())
                    } else {
                        Err(Error::PartialSoap {
                            missing: out.missing_sections.clone(),
                            partial: Box::new(out.soap),
                        })
                    }
                });
                (t.id.clone(), r)
            })
            .collect()
    });
    let done = finish(results)?;
    println!(
        "summarized {} transcript(s) into {}",
        done.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Deserialize)]
struct CandidateLine {
    id: String,
    summary: String,
}

/// `(id, summary text)` from a directory of summary files or a JSONL file.
fn load_candidates(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    require_exists(path)?;
    let io_err = |source| {
        CliError::Runtime(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(io_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".summary.json"))
            .collect();
        files.sort();
        files
            .iter()
            .map(|p| {
                let body = fs::read_to_string(p).map_err(io_err)?;
                let rec: SummaryRecord = serde_json::from_str(&body).map_err(|e| {
                    CliError::Runtime(Error::Parse {
                        line: e.line(),
                        message: format!("{}: {e}", p.display()),
                    })
                })?;
                Ok((rec.id, rec.raw))
            })
            .collect()
    } else {
        let body = fs::read_to_string(path).map_err(io_err)?;
        body.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let c: CandidateLine = serde_json::from_str(l).map_err(|e| {
                    CliError::Runtime(Error::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })
                })?;
                Ok((c.id, c.summary))
            })
            .collect()
    }
}

pub fn evaluate(ctx: &Context, args: EvaluateArgs) -> Result<(), CliError> {
    let candidates = load_candidates(&args.candidates)?;
    require_exists(&args.references)?;
    let references = read_pairs(&args.references)?;
    let provider = build_provider(&ctx.cfg)?;
    let tokenizer = ctx.cfg.tokenizer.build();
    let report = evaluate_pairs(
        &candidates,
        &references,
        provider.as_ref(),
        tokenizer.as_ref(),
    )?;
    if report.items.len() < candidates.len() {
        eprintln!(
            "warning: {} candidate(s) had no reference and were skipped",
            candidates.len() - report.items.len()
        );
    }
    print_or_write(args.out.as_deref(), &report)
}

#[derive(Serialize)]
struct PairStats {
    conversations: CorpusStats,
    summaries: CorpusStats,
}

pub fn stats(ctx: &Context, args: StatsArgs) -> Result<(), CliError> {
    let tokenizer = ctx.cfg.tokenizer.build();
    if let Some(pairs) = &args.pairs {
        require_exists(pairs)?;
        let pairs = read_pairs(pairs)?;
        let conv: Vec<&str> = pairs.iter().map(|p| p.conversation.as_str()).collect();
        let sums: Vec<&str> = pairs.iter().map(|p| p.summary.as_str()).collect();
        let s = PairStats {
            conversations: corpus_stats(&conv, tokenizer.as_ref()),
            summaries: corpus_stats(&sums, tokenizer.as_ref()),
        };
        return print_or_write(args.out.as_deref(), &s);
    }
    let input = args
        .input
        .as_deref()
        .expect("clap enforces --in or --pairs");
    let transcripts = load_transcripts(input, args.format.as_deref())?;
    let texts = transcripts
        .iter()
        .map(flatten_diarized)
        .collect::<Result<Vec<_>, _>>()?;
    print_or_write(
        args.out.as_deref(),
        &corpus_stats(&texts, tokenizer.as_ref()),
    )
}

pub fn review_sheet(ctx: &Context, args: ReviewSheetArgs) -> Result<(), CliError> {
    let seed = ctx
        .seed
        .ok_or_else(|| CliError::Usage("review-sheet needs an explicit --seed".into()))?;
    require_exists(&args.data)?;
    let data = read_pairs(&args.data)?;
    let (x_name, x_path) = &args.x;
    let (y_name, y_path) = &args.y;
    let xs: HashMap<String, String> = load_candidates(x_path)?.into_iter().collect();
    let ys: HashMap<String, String> = load_candidates(y_path)?.into_iter().collect();

    let (mut ids, mut convs, mut pairs, mut truth) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (line, p) in data.iter().enumerate() {
        let id = p.id.clone().ok_or_else(|| {
            CliError::Runtime(Error::Parse {
                line: line + 1,
                message: "dataset pair has no id".into(),
            })
        })?;
        let x = xs
            .get(&id)
            .ok_or_else(|| Error::Key(format!("{id} (system {x_name})")))?;
        let y = ys
            .get(&id)
            .ok_or_else(|| Error::Key(format!("{id} (system {y_name})")))?;
        pairs.push((x.clone(), y.clone()));
        convs.push(p.conversation.clone());
        truth.push(p.summary.clone());
        ids.push(id);
    }
    let sheet = make_review_sheet(&ids, &convs, &pairs, &truth, [x_name, y_name], seed)?;
    write_csv(&args.sheet, &sheet.rows)?;
    write_csv(&args.key, &sheet.key)?;
    println!(
        "wrote {} item(s) to {} and key to {}",
        ids.len(),
        args.sheet.display(),
        args.key.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct IrrReport {
    win_rate: WinRateTable,
    irr: Option<IrrResult>,
}

pub fn irr(_ctx: &Context, args: IrrArgs) -> Result<(), CliError> {
    require_exists(&args.prefs)?;
    require_exists(&args.key)?;
    let prefs: Vec<PreferenceRecord> = read_csv(&args.prefs)?;
    let key: Vec<KeyRow> = read_csv(&args.key)?;
    let table = win_rate(&prefs, &key)?;
    print!("{}", table.render());
    let irr = match irr_from_preferences(&prefs) {
        Ok(r) => {
            println!("fleiss_kappa {:.5}", r.fleiss_kappa);
            println!("krippendorff_alpha {:.5}", r.krippendorff_alpha);
            Some(r)
        }
        Err(e) => {
            eprintln!("warning: agreement not computed: {e}");
            None
        }
    };
    if let Some(out) = &args.out {
        write_json_atomic(
            out,
            &IrrReport {
                win_rate: table,
                irr,
            },
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("conv-01"), "conv-01");
        assert_eq!(file_stem("a/b c"), "a_b_c");
        assert_eq!(file_stem(""), "_");
        assert_eq!(file_stem(".."), "_..");
    }

    #[test]
    fn system_flag_parsing() {
        assert_eq!(
            parse_system("CS=out/cs").unwrap(),
            ("CS".into(), PathBuf::from("out/cs"))
        );
        assert!(parse_system("CS").is_err());
        assert!(parse_system("=x").is_err());
    }
}
