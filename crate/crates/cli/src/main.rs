use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use pagecast_core::service::{serve, Engine};
use pagecast_core::{
    build_model, generate_trace, parse_graph, parse_trace, predict, render_trace, replay_with,
    synthetic_site, CacheMode, EngineConfig, Model, ModelError, ModificationLog, Prefetcher,
    RankAssignment, ReplayOptions, SiteGraph, TraceError, UpdateError,
};

#[derive(Parser)]
#[command(name = "pagecast", version, about = "Level/class next-page prediction for prefetching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the initial model from a site graph and write its CSV dump.
    Build {
        #[arg(long)]
        graph: PathBuf,
        /// Modification log, lines `<tick> <url>`.
        #[arg(long)]
        modlog: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print PageRank scores and ordinals as `url,score,ordinal`.
    Rank {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        damping: Option<f64>,
    },
    /// Predict the prefetch window for one URL (JSON on stdout).
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        url: String,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Replay a trace and print the hit report CSV.
    Replay {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Prediction window; repeat to compare several sizes.
        #[arg(long)]
        window: Vec<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Page modifications applied during the replay.
        #[arg(long)]
        modlog: Option<PathBuf>,
        /// Keep only the latest prediction window in the client cache.
        #[arg(long)]
        window_only_cache: bool,
        /// Prefetch uniformly random out-links instead of predictions.
        #[arg(long, value_name = "SEED")]
        random_baseline: Option<u64>,
        /// Write the final model dump here (last window only).
        #[arg(long)]
        dump_out: Option<PathBuf>,
    },
    /// Generate a synthetic session trace from a site graph.
    GenTrace {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 30)]
        sessions: usize,
        #[arg(long, default_value_t = 20)]
        length: usize,
        #[arg(long, default_value_t = 0.9)]
        affinity: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic sectioned site graph.
    GenSite {
        #[arg(long, default_value_t = 9)]
        sections: usize,
        #[arg(long, default_value_t = 10)]
        pages: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve line-delimited JSON predict/observe/snapshot requests over TCP.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the final snapshot on shutdown.
        #[arg(long)]
        snapshot_out: Option<PathBuf>,
    },
    /// Print a model dump, normalized or as an aligned table.
    Dump {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        table: bool,
    },
}

/// Failure classes, each with its own exit code.
enum Failure {
    Io(anyhow::Error),
    Invalid(anyhow::Error),
    UnknownUrl(anyhow::Error),
    Engine(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 3,
            Failure::Invalid(_) => 4,
            Failure::UnknownUrl(_) => 5,
            Failure::Engine(_) => 6,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Io(e) | Failure::Invalid(e) | Failure::UnknownUrl(e) | Failure::Engine(e) => e,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(anyhow!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(anyhow!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    match path {
        Some(p) => EngineConfig::parse(&read(p)?).map_err(|e| invalid(p, e)),
        None => Ok(EngineConfig::default()),
    }
}

fn load_graph(path: &Path) -> Result<SiteGraph> {
    parse_graph(&read(path)?).map_err(|e| invalid(path, e))
}

fn load_model(path: &Path) -> Result<Model> {
    Model::load(&read(path)?).map_err(|e| invalid(path, e))
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::UnknownUrl(_) => Failure::UnknownUrl(e.into()),
        other => Failure::Invalid(other.into()),
    }
}

fn trace_failure(e: TraceError) -> Failure {
    match e {
        TraceError::UnknownUrl { .. } | TraceError::Update(UpdateError::Model(ModelError::UnknownUrl(_))) => {
            Failure::UnknownUrl(e.into())
        }
        TraceError::Update(UpdateError::TickWentBackwards { .. }) => Failure::Invalid(e.into()),
        other => Failure::Engine(other.into()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { graph, modlog, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let g = load_graph(&graph)?;
            let log = match &modlog {
                Some(p) => ModificationLog::parse(&read(p)?, &g).map_err(|e| invalid(p, e))?,
                None => ModificationLog::default(),
            };
            let ranks =
                RankAssignment::compute(&g, &cfg.pagerank).map_err(|e| Failure::Engine(e.into()))?;
            let model =
                build_model(&g, &ranks, &log, cfg.levels).map_err(|e| Failure::Engine(e.into()))?;
            write_out(out.as_deref(), &model.dump())
        }
        Command::Rank { graph, config, damping } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(d) = damping {
                cfg.pagerank.damping = d;
            }
            let g = load_graph(&graph)?;
            let ranks = RankAssignment::compute(&g, &cfg.pagerank).map_err(|e| match e {
                pagecast_core::RankError::NotConverged { .. } => Failure::Engine(e.into()),
                other => Failure::Invalid(other.into()),
            })?;
            write_out(None, &ranks.to_csv(&g))
        }
        Command::Predict { model, url, window, config } => {
            let cfg = load_config(config.as_deref())?;
            let m = load_model(&model)?;
            let p = predict(&m, &url, window.unwrap_or(cfg.window)).map_err(model_failure)?;
            println!("{}", serde_json::to_string(&p).expect("prediction serializes"));
            Ok(())
        }
        Command::Replay {
            model,
            trace,
            window,
            config,
            modlog,
            window_only_cache,
            random_baseline,
            dump_out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let m = load_model(&model)?;
            let events = parse_trace(&read(&trace)?).map_err(|e| invalid(&trace, e))?;
            let modifications = match &modlog {
                Some(p) => {
                    ModificationLog::parse_checked(&read(p)?, |u| m.contains(u))
                        .map_err(|e| invalid(p, e))?
                        .entries
                }
                None => Vec::new(),
            };
            let windows = if window.is_empty() { vec![cfg.window] } else { window };
            let mut out = String::new();
            let mut last_model = None;
            for w in windows {
                let opts = ReplayOptions {
                    window: w,
                    cache: if window_only_cache { CacheMode::WindowOnly } else { CacheMode::Accumulate },
                    prefetcher: random_baseline
                        .map(|seed| Prefetcher::Random { seed })
                        .unwrap_or_default(),
                    modifications: modifications.clone(),
                };
                let r = replay_with(&m, &events, &cfg.update, &opts).map_err(trace_failure)?;
                let csv = r.report.to_csv();
                if out.is_empty() {
                    out.push_str(&csv);
                } else {
                    out.push_str(csv.split_once('\n').map_or("", |(_, rows)| rows));
                }
                last_model = Some(r.model);
            }
            if let (Some(path), Some(m)) = (dump_out, last_model) {
                write_out(Some(&path), &m.dump())?;
            }
            write_out(None, &out)
        }
        Command::GenTrace { graph, sessions, length, affinity, seed, out } => {
            if length == 0 {
                return Err(Failure::Invalid(anyhow!("--length must be at least 1")));
            }
            if !(0.0..=1.0).contains(&affinity) {
                return Err(Failure::Invalid(anyhow!("--affinity must lie in [0, 1]")));
            }
            let g = load_graph(&graph)?;
            let trace = generate_trace(&g, sessions, length, affinity, seed)
                .map_err(|e| invalid(&graph, e))?;
            write_out(out.as_deref(), &render_trace(&trace))
        }
        Command::GenSite { sections, pages, seed, out } => {
            if sections == 0 || pages == 0 {
                return Err(Failure::Invalid(anyhow!("--sections and --pages must be positive")));
            }
            let g = synthetic_site(sections, pages, seed);
            let header = format!(
                "# synthetic site: {sections} sections x {pages} pages, seed {seed}\n"
            );
            write_out(out.as_deref(), &(header + &g.render()))
        }
        Command::Serve { model, addr, config, snapshot_out } => {
            let cfg = load_config(config.as_deref())?;
            cfg.update.validate().map_err(|e| Failure::Invalid(e.into()))?;
            let m = load_model(&model)?;
            let listener = TcpListener::bind(&addr).map_err(|e| Failure::Io(anyhow!("{addr}: {e}")))?;
            let bound = listener.local_addr().map_err(|e| Failure::Io(e.into()))?;
            eprintln!("pagecast: serving on {bound}");
            let engine = Arc::new(Engine::new(m, cfg.update, cfg.window));
            serve(engine, listener, snapshot_out).map_err(|e| Failure::Io(e.into()))?;
            eprintln!("pagecast: shut down");
            Ok(())
        }
        Command::Dump { model, table } => {
            let m = load_model(&model)?;
            let text = if table { m.render_table() } else { m.dump() };
            write_out(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pagecast: error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
