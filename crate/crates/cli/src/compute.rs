//! Value computation behind `value` and `table`, with cache lookups.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use ringpoints::cliquegraph::{i_of_report, Strategy, ValueOptions};
use ringpoints::geometry::Point;
use ringpoints::orderly::{dump_level, max_cardinality_with, OrderlyOptions, PointSetRecord, PositionMode};
use ringpoints::Error;

use crate::cache::{Cache, ResultRecord};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which quantity to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// No position constraint, any dimension (clique search).
    Unconstrained,
    SemiGeneral,
    General,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Unconstrained => "I",
            Mode::SemiGeneral => "semi-general",
            Mode::General => "general",
        }
    }

    fn position(self) -> PositionMode {
        match self {
            Mode::Unconstrained => PositionMode::Any,
            Mode::SemiGeneral => PositionMode::SemiGeneral,
            Mode::General => PositionMode::General,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "I" | "i" | "any" => Ok(Mode::Unconstrained),
            "semi-general" | "semi" => Ok(Mode::SemiGeneral),
            "general" => Ok(Mode::General),
            other => Err(format!("unknown mode {other:?} (expected I, semi-general or general)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ComputeOptions {
    pub strategy: Strategy,
    pub cartesian: bool,
    pub even_reduction: bool,
    pub threads: usize,
    pub budget: Option<Duration>,
    /// Directory receiving one file per orderly level.
    pub dump_levels: Option<PathBuf>,
}

impl ComputeOptions {
    pub fn new() -> Self {
        ComputeOptions { cartesian: true, even_reduction: true, ..Default::default() }
    }
}

fn coords(points: &[Point]) -> Vec<Vec<u32>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

/// Runs the search; a budget overrun yields a non-exact record.
pub fn compute(n: u32, m: usize, mode: Mode, opts: &ComputeOptions) -> CliResult<ResultRecord> {
    let start = Instant::now();
    let mut rec = ResultRecord {
        n,
        m,
        mode: mode.name().to_string(),
        value: 0,
        exact: true,
        witness: None,
        elapsed_ms: 0,
        variant: String::new(),
        version: VERSION.to_string(),
    };
    match mode {
        Mode::Unconstrained => {
            let vopts = ValueOptions {
                strategy: opts.strategy,
                cartesian: opts.cartesian,
                even_reduction: opts.even_reduction,
                threads: opts.threads,
                budget: opts.budget,
                ..ValueOptions::default()
            };
            let report = i_of_report(n, m, &vopts)?;
            rec.value = report.value;
            rec.exact = report.exact;
            rec.witness = Some(coords(&report.witness));
            rec.variant = report.method;
        }
        Mode::SemiGeneral | Mode::General => {
            if m != 2 {
                return Err(CliError::Usage(format!("mode {} needs m = 2, got m = {m}", mode.name())));
            }
            let on_group = match &opts.dump_levels {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    Some(level_writer(dir.clone(), n, mode))
                }
                None => None,
            };
            let oopts = OrderlyOptions { budget: opts.budget, threads: opts.threads, on_group };
            rec.variant = "orderly".to_string();
            match max_cardinality_with(n, mode.position(), &oopts) {
                Ok(report) => {
                    rec.value = report.value;
                    rec.witness = report.witness.map(|w| coords(&w.witness()));
                }
                Err(Error::Timeout { lower }) => {
                    rec.value = lower;
                    rec.exact = false;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    rec.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(rec)
}

type LevelSink = Arc<dyn Fn(&[PointSetRecord]) + Send + Sync>;

/// Appends each visited group to the file for its order. Files are created
/// (truncated) the first time an order is reached and flushed when the sink
/// is dropped.
fn level_writer(dir: PathBuf, n: u32, mode: Mode) -> LevelSink {
    let files: Mutex<HashMap<usize, BufWriter<File>>> = Mutex::default();
    Arc::new(move |group: &[PointSetRecord]| {
        let Some(first) = group.first() else { return };
        let path = dir.join(format!("n{n}-{}-r{}.txt", mode.name(), first.order()));
        let mut files = files.lock().unwrap_or_else(|e| e.into_inner());
        let out = match files.entry(first.order()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => match File::create(&path) {
                Ok(f) => e.insert(BufWriter::new(f)),
                Err(err) => {
                    eprintln!("warning: could not write {}: {err}", path.display());
                    return;
                }
            },
        };
        if let Err(err) = out.write_all(dump_level(group).as_bytes()) {
            eprintln!("warning: could not write {}: {err}", path.display());
        }
    })
}

/// Cached exact value if present, otherwise a fresh computation that is
/// recorded in the cache (exact or not).
pub fn compute_cached(
    n: u32,
    m: usize,
    mode: Mode,
    opts: &ComputeOptions,
    cache: Option<&mut Cache>,
) -> CliResult<(ResultRecord, bool)> {
    if let Some(c) = cache.as_deref() {
        if let Some(hit) = c.get(n, m, mode.name()).filter(|r| r.exact) {
            if opts.dump_levels.is_none() {
                return Ok((hit.clone(), true));
            }
        }
    }
    let rec = compute(n, m, mode, opts)?;
    if let Some(c) = cache {
        if c.insert(rec.clone()) {
            c.save()?;
        }
    }
    Ok((rec, false))
}
