use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use ktpx::commands::{evaluate_dir, extract_file, run_batch, sibling_dump};
use ktpx::pipeline::{Pipeline, PipelineConfig};
use ktpx::schema::DATE_FORMAT;
use ktpx::service::{serve, AppState};
use ktpx::store::Store;

#[derive(Parser)]
#[command(name = "ktpx", version, about = "Field extraction for Indonesian identity cards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one card image to `<image>.ktp.json`.
    Extract {
        image: PathBuf,
        /// Frozen word dump to use instead of running the OCR engine.
        #[arg(long)]
        ocr_dump: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Extract every image in a directory. A sibling `<stem>.tsv` is used as
    /// that image's word dump.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score a directory of `*.ktp.json` predictions against gold annotations.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Where to write the JSON report (default `<pred>/eval_report.json`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 127)]
    threshold: u8,
    #[arg(long, default_value = "ind")]
    lang: String,
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long)]
    cascade: Option<PathBuf>,
    #[arg(long, default_value_t = 85)]
    review_threshold: u8,
    /// Hand the engine the grayscale page instead of the thresholded one.
    #[arg(long)]
    no_binarize: bool,
    /// Fixed `extractedAt` date, DD-MM-YYYY.
    #[arg(long, value_parser = parse_date)]
    date: Option<NaiveDate>,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, DATE_FORMAT).map_err(|e| format!("expected DD-MM-YYYY: {e}"))
}

impl ConfigArgs {
    fn pipeline(self) -> anyhow::Result<Pipeline> {
        let config = PipelineConfig {
            threshold: self.threshold,
            ocr_language: self.lang,
            grammar_path: self.grammar,
            cascade_path: self.cascade,
            confidence_review_threshold: self.review_threshold,
            binarize: !self.no_binarize,
            fixed_date: self.date,
            ..PipelineConfig::default()
        };
        Ok(Pipeline::new(config)?)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Extract {
            image,
            ocr_dump,
            out,
            config,
        } => {
            let pipeline = config.pipeline()?;
            let (path, ex) = extract_file(&pipeline, &image, ocr_dump.as_deref(), out.as_deref())?;
            println!("{}", path.display());
            if !ex.flagged.is_empty() {
                eprintln!("flagged for review: {}", ex.flagged.join(", "));
            }
            Ok(true)
        }
        Command::Batch { dir, jobs, out, config } => {
            let pipeline = config.pipeline()?;
            let summary = run_batch(&pipeline, &dir, jobs, out.as_deref())?;
            for item in &summary.items {
                match &item.error {
                    None => println!("ok    {}", item.image),
                    Some(e) => println!("FAIL  {}: {e}", item.image),
                }
            }
            let dumps = summary
                .items
                .iter()
                .filter(|i| sibling_dump(&dir.join(&i.image)).is_some())
                .count();
            println!(
                "{} images, {} ok, {} failed, {} with frozen dumps, mean {:.1} ms (excluding OCR {:.1} ms)",
                summary.total,
                summary.succeeded,
                summary.failed,
                dumps,
                summary.mean_latency_ms,
                summary.mean_excluded_ms
            );
            Ok(summary.all_succeeded())
        }
        Command::Eval { gold, pred, report } => {
            let r = evaluate_dir(&gold, &pred)?;
            print!("{}", r.table());
            let target = report.unwrap_or_else(|| pred.join("eval_report.json"));
            std::fs::write(&target, serde_json::to_string_pretty(&r)? + "\n")
                .with_context(|| format!("writing {}", target.display()))?;
            println!("report: {}", target.display());
            Ok(true)
        }
        Command::Serve {
            port,
            store,
            host,
            config,
        } => {
            let pipeline = config.pipeline()?;
            let store = Store::open(&store)?;
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(serve(AppState::new(pipeline, store), addr))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("ktpx: {e:#}");
            ExitCode::FAILURE
        }
    }
}
