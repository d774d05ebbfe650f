use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use adjprobe_core::denotation::{
    exhaustive_intersectivity, run_simulation, CategoryMix, SimulationConfig,
};
use adjprobe_core::embed::{
    load_store, CachedProvider, EmbeddingProvider, ProviderSpec, RemoteClient, RemoteConfig,
    ToyEmbedder,
};
use adjprobe_core::lexicon::{load_lexicon, Lexicon};
use adjprobe_core::phrasegen::{generate_phrases, write_corpus};
use adjprobe_core::pipeline::{
    corpus_digest, evaluate, length_label, oracle_digest, phrase_length_counts, write_outcomes,
    EvaluationConfig, RelationSet,
};
use adjprobe_core::report::{compare_against_reference, parse_table_csv, render_table, Format};
use adjprobe_core::Execution;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "adjprobe",
    version,
    about = "Metamorphic tests of adjective-noun composition in embedding models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the phrase corpus and print counts by phrase length.
    Generate(GenerateArgs),
    /// Embed the corpus, evaluate the relations and write tables.
    Evaluate(EvaluateArgs),
    /// Run the set-world simulation under Jaccard distance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Common {
    /// Lexicon file (defaults to the bundled lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    max_adjectives: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn lexicon(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => load_lexicon(p).with_context(|| format!("loading lexicon {}", p.display())),
            None => Ok(Lexicon::bundled()),
        }
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// toy:SEED:DIM | file:PATH | http:URL:MODEL
    #[arg(long, default_value = "toy:0:64")]
    provider: String,
    /// Comma-separated: intersectivity, pair, non-subsectivity, or all.
    #[arg(long, default_value = "all")]
    relations: String,
    /// Texts per request to a remote provider.
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    /// Embedding cache directory (remote providers default to OUT/cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Reference table CSV to compare against.
    #[arg(long, requires = "tolerance")]
    reference: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Reference row to compare with (defaults to the model id).
    #[arg(long)]
    reference_row: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 16)]
    universe_size: usize,
    /// Category weights, e.g. intersective=1,subsective=1,privative=1,plain=1
    #[arg(
        long,
        default_value = "intersective=1,subsective=1,privative=1,plain=1"
    )]
    mix: String,
    #[arg(long, default_value_t = 8)]
    proxy_samples: usize,
    /// Largest universe for the exhaustive intersective check (0 skips it).
    #[arg(long, default_value_t = 6)]
    exhaustive_max: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("writing {}", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let c = &args.common;
    if c.max_adjectives == 0 {
        bail!("--max-adjectives must be at least 1");
    }
    let lexicon = c.lexicon()?;
    let phrases = generate_phrases(&lexicon, c.max_adjectives);
    let out = c.out_dir()?;
    write_corpus(&phrases, create(&out.join("corpus.txt"))?).context("writing corpus")?;
    let counts = phrase_length_counts(&phrases);
    let digest = corpus_digest(&lexicon, c.max_adjectives);
    write_json(
        &out.join("corpus.meta.json"),
        &json!({
            "config_digest": digest,
            "lexicon_hash": lexicon.content_hash(),
            "max_adjectives": c.max_adjectives,
            "counts": counts,
        }),
    )?;
    let mut parts: Vec<String> = (1..=c.max_adjectives)
        .map(|k| {
            let label = length_label(k);
            format!("{label}: {}", counts.get(&label).copied().unwrap_or(0))
        })
        .collect();
    parts.push(format!("total: {}", phrases.len()));
    println!("{}", parts.join(", "));
    Ok(())
}

fn build_provider(args: &EvaluateArgs, spec: &ProviderSpec) -> Result<Box<dyn EmbeddingProvider>> {
    let out = &args.common.out;
    Ok(match spec {
        ProviderSpec::Toy { seed, dim } => {
            let toy = ToyEmbedder::new(*seed, *dim)?;
            match &args.cache_dir {
                Some(dir) => Box::new(CachedProvider::open(toy, dir)?),
                None => Box::new(toy),
            }
        }
        ProviderSpec::File { path } => Box::new(
            load_store(path).with_context(|| format!("loading vectors from {}", path.display()))?,
        ),
        ProviderSpec::Http { endpoint, model } => {
            let mut config = RemoteConfig::new(endpoint.clone(), model.clone());
            config.batch_size = args.batch_size.max(1);
            let dir = args.cache_dir.clone().unwrap_or_else(|| out.join("cache"));
            Box::new(CachedProvider::open(RemoteClient::new(config), dir)?)
        }
    })
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let c = &args.common;
    if c.max_adjectives == 0 {
        bail!("--max-adjectives must be at least 1");
    }
    let spec: ProviderSpec = args.provider.parse().map_err(anyhow::Error::msg)?;
    let relations: RelationSet = args.relations.parse()?;
    let config = EvaluationConfig {
        lexicon: c.lexicon()?,
        max_adjectives: c.max_adjectives,
        relations,
        seed: c.seed,
        provider: args.provider.clone(),
        execution: c.execution(),
    };
    let provider = build_provider(&args, &spec)?;
    let started = Instant::now();
    let output = evaluate(&config, provider.as_ref()).context("evaluation failed")?;
    let out = c.out_dir()?;

    write_outcomes(
        &output.outcomes,
        &output.bundle,
        create(&out.join("outcomes.jsonl"))?,
    )?;
    write_json(
        &out.join("results.json"),
        &serde_json::to_value(&output.bundle)?,
    )?;
    for &kind in output.bundle.tables.keys() {
        for format in [Format::Csv, Format::Markdown, Format::Records] {
            let doc = render_table(&output.bundle, kind, format)?;
            fs::write(
                out.join(format!("{}.{}", kind.file_stem(), format.extension())),
                doc,
            )?;
        }
        let md = render_table(&output.bundle, kind, Format::Markdown)?;
        let t = &output.bundle.tables[&kind];
        println!(
            "## {kind} (overall {:.4}, ties {})",
            t.overall.rate(),
            t.overall.ties
        );
        println!(
            "{}",
            md.lines()
                .take_while(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join("\n")
        );
        println!();
    }

    if let (Some(path), Some(tolerance)) = (&args.reference, args.tolerance) {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let reference = parse_table_csv(&text, None)?;
        let deviations = compare_against_reference(
            &output.bundle,
            &reference,
            tolerance,
            args.reference_row.as_deref(),
        )?;
        let mut w = create(&out.join("deviations.jsonl"))?;
        writeln!(
            w,
            "{}",
            json!({"config_digest": output.bundle.metadata.config_digest, "reference": path, "table": reference.kind.name(), "tolerance": tolerance})
        )?;
        for d in &deviations {
            let rec = json!({
                "group": d.group.to_string(),
                "observed": d.observed,
                "reference": d.reference,
                "difference": d.difference,
            });
            writeln!(w, "{rec}")?;
        }
        w.flush()?;
        println!(
            "{} deviation(s) from {} at tolerance {tolerance}",
            deviations.len(),
            reference.kind
        );
        for d in &deviations {
            println!("  {d}");
        }
    }
    eprintln!(
        "evaluated {} outcomes in {:.2?}",
        output.outcomes.len(),
        started.elapsed()
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let c = &args.common;
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mix: CategoryMix = args.mix.parse().map_err(anyhow::Error::msg)?;
    let mut config = SimulationConfig::new(c.seed, args.universe_size, args.trials, mix);
    config.proxy_samples = args.proxy_samples;
    config.execution = c.execution();
    let report = run_simulation(&config)?;
    let exhaustive = (args.exhaustive_max > 0)
        .then(|| exhaustive_intersectivity(args.exhaustive_max, config.execution));

    let digest = oracle_digest(&config);
    let extra = json!({ "config_digest": digest, "exhaustive_intersectivity": exhaustive });
    let out = c.out_dir()?;
    report.write_jsonl(create(&out.join("oracle.jsonl"))?, &extra)?;

    print!("{}", report.render_text());
    if let Some(e) = exhaustive {
        println!(
            "exhaustive intersective check (universes 1..={}): {}/{} pairs, rate {:.4}",
            e.max_universe,
            e.satisfied,
            e.checked,
            e.rate()
        );
    }
    Ok(())
}
