//! Argument definitions and the subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ringpoints::charfield::{ptolemy_product, ring_integral_check, sphere_det, DistMatrix};
use ringpoints::cliquegraph::{build_full, build_rooted, i_of, DistanceGraph, Strategy, ValueOptions};
use ringpoints::geometry::{is_integral_set, Point};
use ringpoints::modring::{is_prime, Zn};
use ringpoints::orderly::{max_cardinality, PositionMode};
use ringpoints::reductions::{
    conjectured_i2, even_reduction_graph, hamming_predicate_i3, ilig_set, lemma1_points, lemma2_points,
    verify_conjecture, ConjectureStatus,
};
use ringpoints::Error;

use crate::cache::{resolve_path, Cache};
use crate::compute::{compute_cached, ComputeOptions, Mode};
use crate::dimacs::{write_dimacs, write_vertex_map};
use crate::error::{CliError, CliResult, EXIT_FAILURE, EXIT_INCOMPLETE, EXIT_OK};
use crate::expected::{self, Check, Expected};

#[derive(Debug, Parser)]
#[command(name = "ringpoints", version, about = "Integral point sets over the residue rings Z_n^m")]
pub struct Cli {
    /// Result cache file [default: ./ringpoints-cache.json]
    #[arg(long, global = true, env = crate::cache::CACHE_ENV)]
    pub cache: Option<PathBuf>,

    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one value.
    Value(ValueArgs),
    /// Recompute a reference table and diff it against the shipped values.
    Table(TableArgs),
    /// Run the conjecture harness and/or the theorem checks.
    Verify(VerifyArgs),
    /// Write a distance graph in DIMACS edge format.
    ExportDimacs(ExportArgs),
    /// Print a constructed integral point set.
    Construct(ConstructArgs),
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// I, semi-general or general.
    #[arg(long, default_value = "I")]
    pub mode: Mode,
    /// Clique-search graph: full, rooted, delta-family or orbit-family.
    #[arg(long, default_value = "orbit-family")]
    pub variant: Strategy,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Do not split composite moduli into coprime factors.
    #[arg(long)]
    pub no_cartesian: bool,
    /// Do not use the even-modulus reduction.
    #[arg(long)]
    pub no_even: bool,
    /// Print the full record as JSON.
    #[arg(long)]
    pub json: bool,
    /// Write every generated level to this directory (position modes).
    #[arg(long)]
    pub dump_levels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// 1: I(n,m); 2: no three collinear; 3: general position.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,
    /// Largest n [default: 17 for table 1, 30 otherwise].
    #[arg(long)]
    pub max_n: Option<u32>,
    /// Largest m (table 1 only).
    #[arg(long, default_value_t = 3)]
    pub max_m: usize,
    /// Budget per cell in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub budget: f64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Compare I(n,2) with the best construction for 2 <= n <= max-n.
    #[arg(long)]
    pub conjecture: bool,
    /// Run the theorem and identity checks.
    #[arg(long)]
    pub theorems: bool,
    #[arg(long, default_value_t = 30)]
    pub max_n: u32,
    /// Budget per search in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub budget: f64,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 20_070_101)]
    pub seed: u64,
    /// Random samples per modulus in the randomized checks.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Full,
    Rooted,
    /// Z_3^m with Hamming distance not 2 mod 3.
    Hamming,
    /// Z_{n/2}^m graph of the even-modulus reduction.
    Even,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = GraphKind::Full)]
    pub variant: GraphKind,
    #[arg(long)]
    pub out: PathBuf,
    /// Vertex map file [default: <out>.map].
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    #[value(name = "1")]
    Lemma1,
    #[value(name = "2")]
    Lemma2,
    Ilig,
    Auto,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = Construction::Auto)]
    pub lemma: Construction,
    /// Draw the set on an n x n grid.
    #[arg(long)]
    pub grid: bool,
}

fn seconds(s: f64) -> CliResult<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("invalid budget {s}")))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let mut cache = if cli.no_cache { None } else { Some(Cache::open(resolve_path(cli.cache.as_deref()))?) };
    match cli.command {
        Command::Value(a) => cmd_value(a, cache.as_mut(), out),
        Command::Table(a) => cmd_table(a, cache.as_mut(), out),
        Command::Verify(a) => cmd_verify(a, cache.as_ref(), out),
        Command::ExportDimacs(a) => cmd_export(a, out),
        Command::Construct(a) => cmd_construct(a, out),
    }
}

pub fn cmd_value(a: ValueArgs, cache: Option<&mut Cache>, out: &mut dyn Write) -> CliResult<i32> {
    let opts = ComputeOptions {
        strategy: a.variant,
        cartesian: !a.no_cartesian,
        even_reduction: !a.no_even,
        threads: a.threads,
        budget: a.budget.map(seconds).transpose()?,
        dump_levels: a.dump_levels,
    };
    let (rec, cached) = compute_cached(a.n, a.m, a.mode, &opts, cache)?;
    if a.json {
        let text = serde_json::to_string(&rec).map_err(|e| CliError::Cache(e.to_string()))?;
        writeln!(out, "{text}").map_err(io_err)?;
    } else if rec.exact {
        writeln!(out, "{}", rec.value).map_err(io_err)?;
    } else {
        writeln!(out, ">= {}", rec.value).map_err(io_err)?;
    }
    eprintln!(
        "{}({}, {}) {} {} via {}{} in {} ms",
        rec.mode,
        rec.n,
        rec.m,
        if rec.exact { "=" } else { ">=" },
        rec.value,
        rec.variant,
        if cached { " (cached)" } else { "" },
        rec.elapsed_ms
    );
    Ok(if rec.exact { EXIT_OK } else { EXIT_INCOMPLETE })
}

pub fn cmd_table(a: TableArgs, mut cache: Option<&mut Cache>, out: &mut dyn Write) -> CliResult<i32> {
    let opts = ComputeOptions { budget: Some(seconds(a.budget)?), threads: a.threads, ..ComputeOptions::new() };
    let cells: Vec<(u32, usize, Mode, Expected)> = match a.which {
        1 => {
            let max_n = a.max_n.unwrap_or(17);
            expected::table1()
                .into_iter()
                .filter(|&((n, m), _)| n <= max_n && m <= a.max_m)
                .map(|((n, m), e)| (n, m, Mode::Unconstrained, e))
                .collect()
        }
        w => {
            let (mode, table) = if w == 2 {
                (Mode::SemiGeneral, expected::table2())
            } else {
                (Mode::General, expected::table3())
            };
            let max_n = a.max_n.unwrap_or(30);
            table.into_iter().filter(|&(n, _)| n <= max_n).map(|(n, e)| (n, 2, mode, e)).collect()
        }
    };
    writeln!(out, "n\tm\texpected\tcomputed\tstatus").map_err(io_err)?;
    let (mut diffs, mut incomplete) = (0, 0);
    for (n, m, mode, expect) in cells {
        let (rec, _) = compute_cached(n, m, mode, &opts, cache.as_deref_mut())?;
        let shown = if rec.exact { rec.value.to_string() } else { format!(">= {}", rec.value) };
        let status = match expect.check(rec.value, rec.exact) {
            Check::Match => "ok",
            Check::Mismatch => {
                diffs += 1;
                "DIFF"
            }
            Check::Incomplete => {
                incomplete += 1;
                "incomplete"
            }
        };
        writeln!(out, "{n}\t{m}\t{expect}\t{shown}\t{status}").map_err(io_err)?;
    }
    writeln!(out, "diffs: {diffs}, incomplete: {incomplete}").map_err(io_err)?;
    Ok(if diffs > 0 {
        EXIT_FAILURE
    } else if incomplete > 0 {
        EXIT_INCOMPLETE
    } else {
        EXIT_OK
    })
}

/// Outcome of one named check: `None` when a budget ran out.
struct Outcome {
    name: String,
    ok: Option<bool>,
}

fn value2(n: u32, m: usize, opts: &ValueOptions) -> CliResult<Option<u64>> {
    match i_of(n, m, opts) {
        Ok(r) => Ok(Some(r.value)),
        Err(Error::Timeout { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn cmd_verify(a: VerifyArgs, cache: Option<&Cache>, out: &mut dyn Write) -> CliResult<i32> {
    if !a.conjecture && !a.theorems {
        return Err(CliError::Usage("nothing to do: pass --conjecture and/or --theorems".into()));
    }
    let budget = seconds(a.budget)?;
    let mut outcomes = Vec::new();
    if a.conjecture {
        let report = verify_conjecture(a.max_n, Some(budget), &ValueOptions::default())?;
        for e in &report.entries {
            let ok = match e.status {
                ConjectureStatus::Equal => Some(true),
                ConjectureStatus::Counterexample => Some(false),
                ConjectureStatus::Unverified => None,
            };
            outcomes.push(Outcome { name: format!("I({},2) = {} vs construction {}", e.n, e.value, e.conjectured), ok });
        }
    }
    if a.theorems {
        theorem_checks(&a, budget, cache, &mut outcomes)?;
    }
    let (mut failed, mut open) = (0, 0);
    for o in &outcomes {
        let tag = match o.ok {
            Some(true) => "PASS",
            Some(false) => {
                failed += 1;
                "FAIL"
            }
            None => {
                open += 1;
                "INCOMPLETE"
            }
        };
        writeln!(out, "{tag} {}", o.name).map_err(io_err)?;
    }
    writeln!(out, "{} checks, {failed} failed, {open} incomplete", outcomes.len()).map_err(io_err)?;
    Ok(if failed > 0 {
        EXIT_FAILURE
    } else if open > 0 {
        EXIT_INCOMPLETE
    } else {
        EXIT_OK
    })
}

fn theorem_checks(a: &VerifyArgs, budget: Duration, cache: Option<&Cache>, outcomes: &mut Vec<Outcome>) -> CliResult<()> {
    let direct = ValueOptions { budget: Some(budget), ..ValueOptions::direct(Strategy::OrbitFamily) };
    let mut push = |name: String, ok: Option<bool>| outcomes.push(Outcome { name, ok });

    for p in [3u32, 5, 7] {
        let v = value2(p, 2, &direct)?;
        push(format!("I({p},2) = {p}: got {v:?}"), v.map(|v| v == p as u64));
    }
    for p in [3u32, 5] {
        let v = value2(p * p, 2, &direct)?;
        let want = (p as u64).pow(3);
        push(format!("I({},2) = {want}: got {v:?}", p * p), v.map(|v| v == want));
    }

    for ab in 6..=40u32 {
        for a_ in 2..ab {
            let b = ab / a_;
            if ab % a_ != 0 || a_ >= b || gcd(a_, b) != 1 {
                continue;
            }
            let whole = value2(ab, 2, &direct)?;
            let (va, vb) = (value2(a_, 2, &direct)?, value2(b, 2, &direct)?);
            let ok = match (whole, va, vb) {
                (Some(w), Some(x), Some(y)) => Some(w == x * y),
                _ => None,
            };
            push(format!("I({ab},2) = I({a_},2) I({b},2): {whole:?} vs {va:?} * {vb:?}"), ok);
        }
    }

    let (i83, i23, i43) = (value2(8, 3, &direct)?, value2(2, 3, &direct)?, value2(4, 3, &direct)?);
    push(
        format!("I(8,3) = {i83:?} < I(2,3) I(4,3) = {:?}", i23.zip(i43).map(|(x, y)| x * y)),
        i83.zip(i23.zip(i43)).map(|(w, (x, y))| w == 64 && x * y == 128),
    );
    let (i33, i93) = (value2(3, 3, &direct)?, value2(9, 3, &direct)?);
    push(
        format!("I(3,3) = {i33:?} does not divide I(9,3) = {i93:?}"),
        i33.zip(i93).map(|(x, y)| x == 4 && y == 81 && y % x != 0),
    );

    let mut even: Vec<(u32, usize, u64)> = Vec::new();
    for n in (2..=20u32).step_by(2) {
        if let Some(v) = value2(n, 2, &ValueOptions { budget: Some(budget), ..ValueOptions::default() })? {
            even.push((n, 2, v));
        }
    }
    if let Some(c) = cache {
        even.extend(c.records().filter(|r| r.exact && r.mode == "I" && r.n % 2 == 0).map(|r| (r.n, r.m, r.value)));
    }
    even.sort_unstable();
    even.dedup();
    for (n, m, v) in even {
        push(format!("2^{m} divides I({n},{m}) = {v}"), Some(v % (1u64 << m) == 0));
    }

    for p in [7u32, 11, 19, 23] {
        let v = max_cardinality(p, PositionMode::SemiGeneral)?;
        push(format!("semi-general max for p = {p} is (p+1)/2: got {v}"), Some(v == (p as u64 + 1) / 2));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for n in [7u32, 12, 13] {
        let zn = Zn::new(n)?;
        let mut bad = 0;
        for _ in 0..a.samples {
            let d: [i64; 6] = std::array::from_fn(|_| rng.gen_range(0..n as i64));
            let [d12, d13, d14, d23, d24, d34] = d;
            let m = DistMatrix::new(
                &[vec![0, d12, d13, d14], vec![d12, 0, d23, d24], vec![d13, d23, 0, d34], vec![d14, d24, d34, 0]],
                n,
            )?;
            if sphere_det(&m) != zn.neg(ptolemy_product(d, n)?) {
                bad += 1;
            }
        }
        push(format!("squared-distance determinant identity mod {n}, {} samples, seed {}", a.samples, a.seed), Some(bad == 0));
    }
    for n in [6u32, 8, 9, 12] {
        let mut bad = 0;
        for _ in 0..a.samples / 10 {
            let k = rng.gen_range(1..=5);
            let pts: Vec<Point> = (0..k)
                .map(|_| Point::new(&[rng.gen_range(0..n as i64), rng.gen_range(0..n as i64)], n))
                .collect::<Result<_, _>>()?;
            if ring_integral_check(&pts, n)? != is_integral_set(&pts, n)? {
                bad += 1;
            }
        }
        push(format!("ring integrality agrees with pairwise test mod {n}, seed {}", a.seed), Some(bad == 0));
    }
    Ok(())
}

pub fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> CliResult<i32> {
    let g: DistanceGraph = match a.variant {
        GraphKind::Full => build_full(a.n, a.m)?,
        GraphKind::Rooted => build_rooted(a.n, a.m)?,
        GraphKind::Hamming => {
            if a.n != 3 {
                return Err(CliError::Usage("the Hamming graph lives on Z_3^m; pass --n 3".into()));
            }
            hamming_predicate_i3(a.m)?
        }
        GraphKind::Even => even_reduction_graph(a.n, a.m)?,
    };
    let map = a.map.unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".map");
        PathBuf::from(s)
    });
    let create = |p: &PathBuf| File::create(p).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", p.display())));
    let mut w = create(&a.out)?;
    write_dimacs(&g, &mut w).and_then(|_| w.flush()).map_err(io_err)?;
    let mut w = create(&map)?;
    write_vertex_map(&g, &mut w).and_then(|_| w.flush()).map_err(io_err)?;
    writeln!(
        out,
        "wrote {} ({} vertices, {} edges) and {}",
        a.out.display(),
        g.vertex_count(),
        g.edge_count(),
        map.display()
    )
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

pub fn cmd_construct(a: ConstructArgs, out: &mut dyn Write) -> CliResult<i32> {
    let n = a.n;
    let (points, label) = match a.lemma {
        Construction::Lemma1 => (lemma1_points(n)?.0, "lemma 1"),
        Construction::Lemma2 => (lemma2_points(n)?.0, "lemma 2"),
        Construction::Ilig => {
            if !is_prime(n) {
                return Err(Error::InvalidInput(format!("{n} is not prime")).into());
            }
            (ilig_set(n)?, "ilig")
        }
        Construction::Auto => {
            let l1 = lemma1_points(n)?.0;
            match lemma2_points(n) {
                Ok((l2, _)) if l2.len() > l1.len() => (l2, "lemma 2"),
                _ => (l1, "lemma 1"),
            }
        }
    };
    let integral = is_integral_set(&points, n)?;
    writeln!(out, "{} points over Z_{n}^2 ({label}), pairwise integral: {}", points.len(), if integral { "yes" } else { "NO" })
        .map_err(io_err)?;
    if a.lemma == Construction::Auto {
        writeln!(out, "best construction bound: {}", conjectured_i2(n)).map_err(io_err)?;
    }
    let list: Vec<String> = points.iter().map(|p| format!("({},{})", p.coords()[0], p.coords()[1])).collect();
    writeln!(out, "{}", list.join(" ")).map_err(io_err)?;
    if a.grid {
        write!(out, "{}", render_grid(&points, n)).map_err(io_err)?;
    }
    Ok(if integral { EXIT_OK } else { EXIT_FAILURE })
}

/// `n` rows, second coordinate increasing upwards; `#` marks a point.
pub fn render_grid(points: &[Point], n: u32) -> String {
    let mut cells = vec![vec!['.'; n as usize]; n as usize];
    for p in points {
        let c = p.coords();
        cells[c[1] as usize][c[0] as usize] = '#';
    }
    let mut s = String::new();
    for row in cells.iter().rev() {
        let line: Vec<String> = row.iter().map(char::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}
