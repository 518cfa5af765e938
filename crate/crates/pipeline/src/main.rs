use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use marginalia_pipeline::config::PageSet;
use marginalia_pipeline::corpus::{write_synthetic_corpus, CorpusSpec};
use marginalia_pipeline::stages;
use marginalia_pipeline::{Error, PipelineConfig, Result};

/// Marginalia detection, segmentation and recognition pipeline.
#[derive(Parser)]
#[command(name = "marginalia", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory of LabelMe files and page images.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Output directory shared by all stages.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-page work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic LabelMe corpus with detections and reference words.
    MakeCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 6)]
        pages: usize,
        #[arg(long, default_value_t = 350)]
        width: u32,
        #[arg(long, default_value_t = 500)]
        height: u32,
    },
    /// Parse LabelMe files and rescale pages into the page manifest.
    Ingest,
    /// Assign pages to train and test.
    Split {
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Flip, noise and brightness/contrast variants of training pages.
    Augment {
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// MSER box proposals for augmented samples.
    Proposals {
        #[arg(long)]
        delta: Option<u8>,
        #[arg(long)]
        max_variation: Option<f64>,
        #[arg(long)]
        min_area: Option<u32>,
    },
    /// Positive and negative training ROIs.
    Samples {
        #[arg(long)]
        negatives: Option<usize>,
        #[arg(long)]
        roi_size: Option<u32>,
    },
    /// Split detections into lines and words and export word crops.
    Segment {
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long, value_enum)]
        pages: Option<Pages>,
        #[arg(long)]
        export_lines: bool,
    },
    /// Score detections against ground truth.
    Eval {
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        iou_threshold: Option<f64>,
        #[arg(long, value_enum)]
        pages: Option<Pages>,
    },
    /// Deterministic stand-in recognizer for the exported word crops.
    RecognizeMock {
        /// One word per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Word accuracy and character error rate of recognizer output.
    ScoreWords {
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Recognizer output; defaults to the mock recognizer's file.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        ignore_case: bool,
    },
    /// Draw ground truth and detections on the evaluated pages.
    Overlay {
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long, value_enum)]
        pages: Option<Pages>,
    },
    /// Run every stage in order.
    Run {
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Pages {
    Train,
    Test,
    All,
}

impl From<Pages> for PageSet {
    fn from(p: Pages) -> Self {
        match p {
            Pages::Train => PageSet::Train,
            Pages::Test => PageSet::Test,
            Pages::All => PageSet::All,
        }
    }
}

fn load_config(g: &Global) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = &g.corpus {
        cfg.paths.corpus = Some(dir.clone());
    }
    if let Some(dir) = &g.out {
        cfg.paths.out = Some(dir.clone());
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_overrides(cfg: &mut PipelineConfig, command: &Command) {
    match command {
        Command::Split { ratio } => set(&mut cfg.split.ratio, *ratio),
        Command::Augment { sigma } => set(&mut cfg.augment.sigma, *sigma),
        Command::Proposals {
            delta,
            max_variation,
            min_area,
        } => {
            set(&mut cfg.proposals.mser.delta, *delta);
            set(&mut cfg.proposals.mser.max_variation, *max_variation);
            set(&mut cfg.proposals.mser.min_area, *min_area);
        }
        Command::Samples { negatives, roi_size } => {
            set(&mut cfg.samples.negatives_per_page, *negatives);
            set(&mut cfg.samples.roi_size, *roi_size);
        }
        Command::Segment {
            detections,
            pages,
            export_lines,
        } => {
            set(&mut cfg.paths.detections, detections.clone().map(Some));
            set(&mut cfg.segment.pages, pages.map(Into::into));
            cfg.segment.export_lines |= export_lines;
        }
        Command::Eval {
            detections,
            iou_threshold,
            pages,
        } => {
            set(&mut cfg.paths.detections, detections.clone().map(Some));
            set(&mut cfg.eval.iou_threshold, *iou_threshold);
            set(&mut cfg.eval.pages, pages.map(Into::into));
        }
        Command::Overlay { detections, pages } => {
            set(&mut cfg.paths.detections, detections.clone().map(Some));
            set(&mut cfg.eval.pages, pages.map(Into::into));
        }
        Command::RecognizeMock { lexicon } => set(&mut cfg.paths.lexicon, lexicon.clone().map(Some)),
        Command::ScoreWords {
            truth,
            results,
            ignore_case,
        } => {
            set(&mut cfg.paths.truth, truth.clone().map(Some));
            set(&mut cfg.paths.results, results.clone().map(Some));
            cfg.recognize.ignore_case |= ignore_case;
        }
        Command::Run { detections, truth } => {
            set(&mut cfg.paths.detections, detections.clone().map(Some));
            set(&mut cfg.paths.truth, truth.clone().map(Some));
        }
        Command::MakeCorpus { .. } | Command::Ingest => {}
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(&cli.global)?;
    apply_overrides(&mut cfg, &cli.command);
    cfg.validate()?;
    match &cli.command {
        Command::MakeCorpus {
            dir,
            pages,
            width,
            height,
        } => {
            let s = write_synthetic_corpus(
                dir,
                &CorpusSpec {
                    pages: *pages,
                    width: *width,
                    height: *height,
                    seed: cfg.seed,
                },
            )?;
            println!("{} pages, {} marginalia, {} words", s.pages, s.boxes, s.words);
        }
        Command::Ingest => {
            let s = stages::ingest(&cfg)?;
            println!("{} pages, {} marginalia, {} warnings", s.pages, s.boxes, s.warnings.len());
        }
        Command::Split { .. } => {
            let s = stages::split(&cfg)?;
            println!("{} train, {} test", s.train, s.test);
        }
        Command::Augment { .. } => println!("{} augmented samples", stages::augment(&cfg)?),
        Command::Proposals { .. } => println!("{} proposals", stages::proposals(&cfg)?),
        Command::Samples { .. } => {
            let s = stages::samples(&cfg)?;
            println!(
                "{} positive, {} negative ROIs; {} pages short of negatives",
                s.positives, s.negatives, s.shortfalls
            );
        }
        Command::Segment { .. } => {
            let s = stages::segment(&cfg)?;
            println!("{} detections, {} lines, {} words", s.detections, s.lines, s.words);
        }
        Command::Eval { .. } => print!("{}", stages::eval_table(&stages::eval(&cfg)?)),
        Command::Overlay { .. } => println!("{} overlays", stages::overlay(&cfg)?),
        Command::RecognizeMock { .. } => println!("{} words recognized", stages::recognize_mock(&cfg)?),
        Command::ScoreWords { .. } => {
            let r = stages::score_words(&cfg)?;
            println!(
                "{} words, accuracy {}, CER {}",
                r.evaluated,
                r.accuracy.map_or("n/a".into(), |v| format!("{v:.4}")),
                r.cer.map_or("n/a".into(), |v| format!("{v:.4}"))
            );
        }
        Command::Run { .. } => stages::run_all(&cfg)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")));
    let result = pool.and_then(|pool| pool.install(|| execute(&cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
