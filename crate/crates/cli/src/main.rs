use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use paremia::index::{
    build_index, read_sources, validate_sources, BuildOptions, Config, CorpusIndex, QueryFilter,
};
use paremia::posterity::{load_metadata, transmission_chains, PosterityEdge, Strictness};
use paremia::similarity::{Component, SimilarityScore, Weights};
use paremia::{CompletenessProfile, Mode};
use serde_json::json;

#[derive(Parser)]
#[command(name = "paremia", version)]
#[command(about = "Validate, index and compare corpora of annotated sapiential units")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse files and report syntax errors, incomplete containers and
    /// duplicate units.
    Validate {
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Build a corpus index.
    Index {
        #[arg(long)]
        out: PathBuf,
        /// JSON array of work metadata records.
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Keep duplicate units and write a report beside the index.
        #[arg(long)]
        allow_duplicates: bool,
        /// Pass unrecognized tags through instead of rejecting them.
        #[arg(long)]
        lenient: bool,
        /// Parse and derive on a single thread.
        #[arg(long)]
        sequential: bool,
        files: Vec<PathBuf>,
    },
    /// List unit ids matching every given filter.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        keyword: Option<String>,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        degree: Option<String>,
        #[arg(long)]
        work: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Rank the units most similar to one unit.
    Similar {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        unit: String,
        #[arg(long)]
        top: Option<usize>,
        /// Component weights as `kw,les,lem,str`.
        #[arg(long)]
        weights: Option<Weights>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Single-linkage clusters, one per line.
    Cluster {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        weights: Option<Weights>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Posterity edges, or transmission chains from a seed unit.
    Posterity {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value = "strict")]
        strictness: Strictness,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        #[arg(long)]
        weights: Option<Weights>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn load_index(path: &Path) -> Result<CorpusIndex> {
    CorpusIndex::load(path).with_context(|| format!("loading index {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn fmt_component(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn score_columns(s: &SimilarityScore) -> String {
    Component::ALL
        .iter()
        .map(|&c| format!("{}={}", c, fmt_component(s.component(c))))
        .collect::<Vec<_>>()
        .join("\t")
}

/// Returns whether the command succeeded; validation failures are `false`.
fn run(cli: Cli) -> Result<bool> {
    let json = cli.format == Format::Json;
    match cli.command {
        Command::Validate {
            strict: _,
            lenient,
            files,
        } => {
            let mode = if lenient { Mode::Lenient } else { Mode::Strict };
            let sources = read_sources(&files)?;
            let report = validate_sources(sources, mode, &CompletenessProfile::default());
            if json {
                print_json(&json!({ "passed": report.passed(), "report": report }))?;
            } else {
                for e in &report.errors {
                    println!("{e}");
                }
                for (id, missing) in &report.incomplete {
                    println!("incomplete {id}: missing {}", missing.join(", "));
                }
                for g in &report.duplicates.groups {
                    println!("duplicate {}: `{}`", g.ids.join(" "), g.key);
                }
                let verdict = if report.passed() { "ok" } else { "failed" };
                println!(
                    "{verdict}: {} unit(s) in {} file(s)",
                    report.units,
                    files.len()
                );
            }
            Ok(report.passed())
        }
        Command::Index {
            out,
            meta,
            config,
            allow_duplicates,
            lenient,
            sequential,
            files,
        } => {
            let config = load_config(config.as_deref())?;
            let metadata = load_metadata(BufReader::new(
                File::open(&meta).with_context(|| format!("opening {}", meta.display()))?,
            ))
            .with_context(|| format!("reading metadata {}", meta.display()))?;
            let options = BuildOptions {
                mode: if lenient { Mode::Lenient } else { Mode::Strict },
                allow_duplicates,
                parallel: !sequential,
            };
            let sources = read_sources(&files)?;
            let output = build_index(sources, metadata.into_values().collect(), &config, options)?;
            output.write(&out)?;
            let units = output.index.units.len();
            if json {
                print_json(&json!({
                    "index": out.display().to_string(),
                    "units": units,
                    "duplicates": output.duplicates,
                }))?;
            } else {
                println!("wrote {} ({units} unit(s))", out.display());
                if !output.duplicates.is_empty() {
                    println!(
                        "{} duplicate group(s) reported in {}",
                        output.duplicates.groups.len(),
                        paremia::index::duplicates_path(&out).display()
                    );
                }
            }
            Ok(true)
        }
        Command::Query {
            index,
            keyword,
            lang,
            degree,
            work,
            from,
            to,
        } => {
            let mut filter = QueryFilter::default();
            let fields = [
                ("keyword", keyword),
                ("lang", lang),
                ("degree", degree),
                ("work", work),
                ("from", from),
                ("to", to),
            ];
            for (field, value) in fields {
                if let Some(v) = value {
                    filter.set(field, &v)?;
                }
            }
            let ids = load_index(&index)?.query(&filter);
            if json {
                print_json(&ids)?;
            } else {
                for id in ids {
                    println!("{id}");
                }
            }
            Ok(true)
        }
        Command::Similar {
            index,
            unit,
            top,
            weights,
            config,
        } => {
            let weights = match weights {
                Some(w) => w,
                None => load_config(config.as_deref())?.weights,
            };
            let neighbors = load_index(&index)?.similar(&unit, top, &weights)?;
            if json {
                print_json(&neighbors)?;
            } else {
                for n in &neighbors {
                    println!(
                        "{}\t{:.4}\t{}",
                        n.id,
                        n.score.aggregate,
                        score_columns(&n.score)
                    );
                }
            }
            Ok(true)
        }
        Command::Cluster {
            index,
            threshold,
            weights,
            config,
        } => {
            let weights = match weights {
                Some(w) => w,
                None => load_config(config.as_deref())?.weights,
            };
            let clusters = load_index(&index)?.cluster(threshold, &weights)?;
            if json {
                print_json(&clusters)?;
            } else {
                for c in clusters {
                    println!("{}", c.join(" "));
                }
            }
            Ok(true)
        }
        Command::Posterity {
            index,
            threshold,
            strictness,
            seed,
            max_depth,
            weights,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let weights = weights.unwrap_or(config.weights);
            let threshold = threshold.unwrap_or(config.threshold);
            let index = load_index(&index)?;
            let edges = index.posterity(threshold, strictness, &weights)?;
            match seed {
                Some(seed) => {
                    if !index.contains(&seed) {
                        bail!("unknown seed unit `{seed}`");
                    }
                    let chains = if edges.iter().any(|e| e.from_id == seed || e.to_id == seed) {
                        transmission_chains(&edges, &seed, max_depth)?
                    } else {
                        Vec::new()
                    };
                    if json {
                        print_json(&chains)?;
                    } else {
                        for c in chains {
                            println!("{}", c.join(" -> "));
                        }
                    }
                }
                None => {
                    if json {
                        print_json(&edges)?;
                    } else {
                        for PosterityEdge {
                            from_id,
                            to_id,
                            score,
                            gap_years,
                        } in &edges
                        {
                            println!(
                                "{from_id} -> {to_id}\t{:.4}\tgap={gap_years}",
                                score.aggregate
                            );
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}
