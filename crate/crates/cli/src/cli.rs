//! Command-line front end: argument grammar, dispatch, and file IO.
//!
//! Commands compute every output in memory first, then stage all files as
//! temporaries and rename them into place, so a failing command leaves
//! the output locations unchanged. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 internal invariant violation.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use ddca_core::{
    generate_scenario, portscan_default, run_stream, EngineConfig, EngineError, KAlphaMode, Lcg,
    RunAnalysis, ScenarioError,
};

use crate::experiments::{sweep_cell_numbers, sweep_time_shifts, time_run_stream, SweepResult};
use crate::format::{
    parse_stream, render_results, render_run_stats, render_stream, render_sweep_summary,
    ParsedStream, RunStatsRow,
};
use crate::oracle::{oracle_run, random_small_instance};

/// Deterministic immune-inspired anomaly scoring over event streams.
#[derive(Debug, Parser)]
#[command(name = "ddca", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// K score aggregation mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Sum each presenting cell's context once per type it carries.
    #[default]
    Literal,
    /// Weight each presenting cell's context by its per-type antigen count.
    Weighted,
}

impl From<ModeArg> for KAlphaMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Literal => KAlphaMode::Literal,
            ModeArg::Weighted => KAlphaMode::Weighted,
        }
    }
}

const DEFAULT_COUNTS: [usize; 8] = [1, 5, 10, 50, 100, 500, 1000, 5000];

fn default_offsets() -> Vec<f64> {
    (-10..=10).map(|step| f64::from(step) * 2.0).collect()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario stream file.
    Gen {
        /// Generator seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Bundled scenario name.
        #[arg(long, default_value = "portscan-default")]
        spec: String,
        /// Stream file to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the engine on a stream file; write results and run statistics.
    Run {
        /// Stream file to read.
        #[arg(short, long)]
        input: PathBuf,
        /// Population size.
        #[arg(long, default_value_t = 100)]
        cells: usize,
        /// Lifespan limit.
        #[arg(long, default_value_t = 100.0)]
        limit: f64,
        /// Flush live cells' antigen at end of stream.
        #[arg(long)]
        flush: bool,
        /// K score aggregation mode.
        #[arg(long = "k-alpha-mode", value_enum, default_value_t)]
        mode: ModeArg,
        /// Directory for results.csv and run-stats.csv.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the pipeline once per population size; write per-run results
    /// and a summary table.
    SweepCells {
        /// Stream file to read.
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated population sizes.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_COUNTS)]
        counts: Vec<usize>,
        /// Lifespan limit applied to every row.
        #[arg(long, default_value_t = 100.0)]
        limit: f64,
        /// Flush live cells' antigen at end of stream.
        #[arg(long)]
        flush: bool,
        /// K score aggregation mode.
        #[arg(long = "k-alpha-mode", value_enum, default_value_t)]
        mode: ModeArg,
        /// Directory for summary.csv and cells_<n>.results.csv files.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Shift signal times by each offset and run the pipeline per shift.
    SweepShift {
        /// Stream file to read.
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated offsets in seconds (negative advances).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_offsets())]
        offsets: Vec<f64>,
        /// Population size.
        #[arg(long, default_value_t = 100)]
        cells: usize,
        /// Lifespan limit.
        #[arg(long, default_value_t = 100.0)]
        limit: f64,
        /// Flush live cells' antigen at end of stream.
        #[arg(long)]
        flush: bool,
        /// K score aggregation mode.
        #[arg(long = "k-alpha-mode", value_enum, default_value_t)]
        mode: ModeArg,
        /// Directory for summary.csv and shift_<o>.results.csv files.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare the engine against the brute-force reference on seeded
    /// random small streams.
    OracleCheck {
        /// Number of random streams to compare.
        #[arg(long, default_value_t = 500)]
        streams: u64,
        /// Seed for the stream generator.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Command failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid parameter values (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable or invalid input data, or output IO failure (exit 2).
    #[error("{0}")]
    Data(String),
    /// A broken internal invariant, e.g. an oracle mismatch (exit 3).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn engine_error(error: EngineError) -> CliError {
    match error {
        EngineError::ZeroCells | EngineError::NonPositiveLifespanLimit { .. } => {
            CliError::Usage(error.to_string())
        }
        EngineError::UnsortedStream { .. } => CliError::Data(error.to_string()),
    }
}

fn scenario_error(error: ScenarioError) -> CliError {
    CliError::Usage(error.to_string())
}

// ===== Atomic output staging =====

/// A fully rendered output file awaiting the commit step.
struct Staged {
    path: PathBuf,
    content: String,
}

fn stage(dir: &Path, name: &str, content: String) -> Staged {
    Staged {
        path: dir.join(name),
        content,
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".tmp.{name}"))
}

/// Write every staged file to a temporary sibling, then rename all into
/// place. On failure the temporaries are removed and the final paths are
/// left untouched.
fn commit_outputs(files: &[Staged]) -> Result<(), CliError> {
    let io_error = |path: &Path, err: std::io::Error| {
        CliError::Data(format!("cannot write {}: {err}", path.display()))
    };
    let cleanup = |written: &[PathBuf]| {
        for tmp in written {
            let _ = std::fs::remove_file(tmp);
        }
    };

    let mut written: Vec<PathBuf> = Vec::new();
    for file in files {
        if let Some(parent) = file.path.parent() {
            if !parent.as_os_str().is_empty() {
                if let Err(err) = std::fs::create_dir_all(parent) {
                    cleanup(&written);
                    return Err(io_error(parent, err));
                }
            }
        }
        let tmp = tmp_path(&file.path);
        if let Err(err) = std::fs::write(&tmp, &file.content) {
            cleanup(&written);
            return Err(io_error(&tmp, err));
        }
        written.push(tmp);
    }
    for (file, tmp) in files.iter().zip(&written) {
        if let Err(err) = std::fs::rename(tmp, &file.path) {
            cleanup(&written);
            return Err(io_error(&file.path, err));
        }
    }
    Ok(())
}

// ===== Input =====

fn read_input(path: &Path) -> Result<ParsedStream, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Data(format!("cannot read {}: {err}", path.display())))?;
    let parsed = parse_stream(&text)
        .map_err(|err| CliError::Data(format!("{}: {err}", path.display())))?;
    if parsed.clamp_warnings > 0 {
        eprintln!(
            "warning: clamped {} signal value(s) into [0, {}]",
            parsed.clamp_warnings, parsed.stream.meta.normalization_max
        );
    }
    Ok(parsed)
}

// ===== Subcommands =====

fn stats_row(config: &EngineConfig, analysis: &RunAnalysis, wall_time_ms: f64) -> RunStatsRow {
    RunStatsRow {
        num_cells: config.num_cells,
        lifespan_limit: config.lifespan_limit,
        i_s: analysis.thresholds.i_s,
        i_bar: analysis.stats.mean_iterations,
        mean_incarnations: analysis.stats.mean_incarnations,
        t_k: analysis.thresholds.t_k,
        mcav_threshold: analysis.thresholds.mcav_threshold,
        wall_time_ms,
    }
}

fn gen_command(seed: u64, spec_name: &str, output: &Path) -> Result<(), CliError> {
    let spec = match spec_name {
        "portscan-default" => portscan_default(seed),
        other => {
            return Err(CliError::Usage(format!(
                "unknown scenario {other:?} (bundled: \"portscan-default\")"
            )));
        }
    };
    let stream = generate_scenario(&spec).map_err(scenario_error)?;
    commit_outputs(&[Staged {
        path: output.to_path_buf(),
        content: render_stream(&stream),
    }])
}

fn run_command_impl(
    input: &Path,
    config: &EngineConfig,
    mode: KAlphaMode,
    output: &Path,
) -> Result<(), CliError> {
    let parsed = read_input(input)?;
    let (log, wall_time_ms) =
        time_run_stream(config, &parsed.stream.events).map_err(engine_error)?;
    let analysis = ddca_core::finish_analysis(config, &parsed.stream.events, log, mode);
    let files = [
        stage(output, "results.csv", render_results(&analysis.reports)),
        stage(
            output,
            "run-stats.csv",
            render_run_stats(&stats_row(config, &analysis, wall_time_ms)),
        ),
    ];
    commit_outputs(&files)
}

fn sweep_outputs(
    output: &Path,
    sweep: &SweepResult,
    row_file_name: impl Fn(&str) -> String,
) -> Vec<Staged> {
    let mut files = vec![stage(output, "summary.csv", render_sweep_summary(sweep))];
    for row in &sweep.rows {
        if let Ok(data) = &row.outcome {
            files.push(stage(
                output,
                &row_file_name(&row.swept.to_string()),
                render_results(&data.analysis.reports),
            ));
        }
    }
    files
}

fn sweep_cells_command(
    input: &Path,
    counts: &[usize],
    limit: f64,
    flush: bool,
    mode: KAlphaMode,
    output: &Path,
) -> Result<(), CliError> {
    if counts.is_empty() {
        return Err(CliError::Usage("--counts must name at least one value".into()));
    }
    let parsed = read_input(input)?;
    let sweep = sweep_cell_numbers(&parsed.stream.events, counts, limit, flush, mode);
    let files = sweep_outputs(output, &sweep, |v| format!("cells_{v}.results.csv"));
    commit_outputs(&files)?;
    report_row_errors(&sweep);
    Ok(())
}

fn sweep_shift_command(
    input: &Path,
    offsets: &[f64],
    config: &EngineConfig,
    mode: KAlphaMode,
    output: &Path,
) -> Result<(), CliError> {
    if offsets.is_empty() {
        return Err(CliError::Usage("--offsets must name at least one value".into()));
    }
    let parsed = read_input(input)?;
    let sweep = sweep_time_shifts(&parsed.stream, offsets, config, mode);
    let files = sweep_outputs(output, &sweep, |v| format!("shift_{v}.results.csv"));
    commit_outputs(&files)?;
    report_row_errors(&sweep);
    Ok(())
}

fn report_row_errors(sweep: &SweepResult) {
    for row in &sweep.rows {
        if let Err(err) = &row.outcome {
            eprintln!(
                "warning: {} {} failed: {err}",
                sweep.swept_name, row.swept
            );
        }
    }
}

fn oracle_check_command(streams: u64, seed: u64) -> Result<(), CliError> {
    let mut rng = Lcg::new(seed);
    for index in 0..streams {
        let (config, events) = random_small_instance(&mut rng);
        let from_engine = run_stream(&config, &events).map_err(engine_error)?;
        let from_oracle = oracle_run(&config, &events).map_err(engine_error)?;
        if from_engine != from_oracle {
            return Err(CliError::Internal(format!(
                "engine and reference disagree on stream {index} \
                 (cells={}, limit={}, events={})",
                config.num_cells,
                config.lifespan_limit,
                events.len()
            )));
        }
        let balance = from_engine.presented_total() + from_engine.unpresented_total();
        if balance != from_engine.antigen_counter {
            return Err(CliError::Internal(format!(
                "antigen conservation broken on stream {index}: \
                 {balance} accounted, {} ingested",
                from_engine.antigen_counter
            )));
        }
    }
    println!("oracle-check: {streams} streams compared, engine matches reference");
    Ok(())
}

/// Execute a parsed command.
pub fn run_command(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { seed, spec, output } => gen_command(seed, &spec, &output),
        Command::Run {
            input,
            cells,
            limit,
            flush,
            mode,
            output,
        } => {
            let config = EngineConfig {
                num_cells: cells,
                lifespan_limit: limit,
                flush_at_end: flush,
            };
            run_command_impl(&input, &config, mode.into(), &output)
        }
        Command::SweepCells {
            input,
            counts,
            limit,
            flush,
            mode,
            output,
        } => sweep_cells_command(&input, &counts, limit, flush, mode.into(), &output),
        Command::SweepShift {
            input,
            offsets,
            cells,
            limit,
            flush,
            mode,
            output,
        } => {
            let config = EngineConfig {
                num_cells: cells,
                lifespan_limit: limit,
                flush_at_end: flush,
            };
            sweep_shift_command(&input, &offsets, &config, mode.into(), &output)
        }
        Command::OracleCheck { streams, seed } => oracle_check_command(streams, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_grammar_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn default_offsets_span_minus_twenty_to_twenty() {
        let offsets = default_offsets();
        assert_eq!(offsets.len(), 21);
        assert_eq!(offsets[0], -20.0);
        assert_eq!(offsets[20], 20.0);
        assert!(offsets.windows(2).all(|w| w[1] - w[0] == 2.0));
    }

    #[test]
    fn exit_codes_map_by_category() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        assert_eq!(CliError::Data(String::new()).exit_code(), 2);
        assert_eq!(CliError::Internal(String::new()).exit_code(), 3);
        assert_eq!(engine_error(EngineError::ZeroCells).exit_code(), 1);
        assert_eq!(
            engine_error(EngineError::UnsortedStream {
                index: 1,
                prev_time: 2.0,
                time: 1.0
            })
            .exit_code(),
            2
        );
    }
}
