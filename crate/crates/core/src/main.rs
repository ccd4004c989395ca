use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use daac::dabuild::{DEFAULT_DENSE_THRESHOLD, DEFAULT_SKIP_BLOCKS};
use daac::synth::{self, CorpusKind};
use daac::{
    build, naive_find, serialize, AcAutomaton, BuildConfig, DaacError, Dictionary,
    DoubleArrayAutomaton, Encoder, Format, Layout, MatchStats, Scheme, StoreKind, TraversalOrder,
    VacantStrategy,
};

#[derive(Parser)]
#[command(name = "daac", version, about = "Double-array Aho-Corasick automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an automaton, write the archive and print its statistics.
    Build(BuildArgs),
    /// Report every occurrence in a text file.
    Match(MatchArgs),
    /// Report occurrences by direct comparison (reference output).
    Naive(NaiveArgs),
    /// Measure builds and matching over a line corpus.
    Bench(BenchArgs),
    /// Write a synthetic dictionary and line corpus.
    GenCorpus(GenArgs),
    /// Print the statistics of an archive.
    Stats(StatsArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value = "bytewise")]
    scheme: Scheme,
    #[arg(long, default_value = "packed")]
    layout: Layout,
    #[arg(long, default_value = "compact")]
    format: Format,
    /// chain, skip-forward or skip-dense.
    #[arg(long, default_value = "skip-forward")]
    vacant: String,
    /// Blocks searched by skip-forward.
    #[arg(long = "L", default_value_t = DEFAULT_SKIP_BLOCKS)]
    skip_blocks: u32,
    /// Vacancy threshold of skip-dense.
    #[arg(long, default_value_t = DEFAULT_DENSE_THRESHOLD)]
    tau: f64,
    #[arg(long, default_value = "lex-dfs")]
    order: TraversalOrder,
    #[arg(long, default_value = "forest")]
    store: StoreKind,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    dict: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long)]
    text: PathBuf,
    /// Print totals and counters instead of occurrences.
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct NaiveArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    text: PathBuf,
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dict: PathBuf,
    /// One search text per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    #[arg(long, value_delimiter = ',')]
    layout: Vec<Layout>,
    #[arg(long, value_delimiter = ',')]
    format: Vec<Format>,
    #[arg(long, value_delimiter = ',')]
    vacant: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    order: Vec<TraversalOrder>,
    #[arg(long, value_delimiter = ',')]
    store: Vec<StoreKind>,
    #[arg(long = "L", default_value_t = DEFAULT_SKIP_BLOCKS)]
    skip_blocks: u32,
    #[arg(long, default_value_t = DEFAULT_DENSE_THRESHOLD)]
    tau: f64,
    /// Use every value on axes left unspecified.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    /// Grid cells measured in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "zipf-cjk")]
    kind: CorpusKind,
    #[arg(long, default_value_t = 10_000)]
    patterns: usize,
    #[arg(long, default_value_t = 1_000)]
    lines: usize,
    /// Characters per line.
    #[arg(long, default_value_t = 80)]
    line_len: usize,
    #[arg(long)]
    dict_out: PathBuf,
    #[arg(long)]
    corpus_out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    archive: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<DaacError> for Failure {
    fn from(e: DaacError) -> Self {
        match e {
            DaacError::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_dict(path: &Path) -> CliResult<Dictionary> {
    Dictionary::parse(&read(path)?)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_archive(path: &Path) -> CliResult<DoubleArrayAutomaton> {
    serialize::from_bytes(&read(path)?)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn vacant(name: &str, blocks: u32, tau: f64) -> CliResult<VacantStrategy> {
    VacantStrategy::parse(name, blocks, tau).map_err(Failure::Usage)
}

impl ConfigArgs {
    fn config(&self) -> CliResult<BuildConfig> {
        let cfg = BuildConfig {
            scheme: self.scheme,
            layout: self.layout,
            format: self.format,
            vacant: vacant(&self.vacant, self.skip_blocks, self.tau)?,
            order: self.order,
            store: self.store,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn build_from(dict: &Dictionary, cfg: &BuildConfig) -> CliResult<(DoubleArrayAutomaton, daac::BuildStats)> {
    let ac = AcAutomaton::new(dict, Encoder::for_scheme(cfg.scheme, dict));
    Ok(build(&ac, cfg)?)
}

fn print_rows(out: &mut impl Write, rows: &[(&str, String)]) -> io::Result<()> {
    for (k, v) in rows {
        writeln!(out, "{k}\t{v}")?;
    }
    Ok(())
}

fn config_rows(cfg: &BuildConfig) -> Vec<(&'static str, String)> {
    vec![
        ("store", cfg.store.to_string()),
        ("scheme", cfg.scheme.to_string()),
        ("layout", cfg.layout.to_string()),
        ("format", cfg.format.to_string()),
        ("vacant", cfg.vacant.to_string()),
        ("order", cfg.order.to_string()),
    ]
}

fn cmd_build(args: BuildArgs) -> CliResult {
    let cfg = args.config.config()?;
    let dict = read_dict(&args.dict)?;
    let (da, stats) = build_from(&dict, &cfg)?;
    let mut rows = config_rows(&cfg);
    rows.extend(stats.rows());
    if let Some(path) = &args.out {
        let mut f = BufWriter::new(fs::File::create(path)?);
        let n = serialize::save(&da, &mut f)?;
        rows.push(("archive_bytes", n.to_string()));
    }
    print_rows(&mut io::stdout().lock(), &rows)?;
    Ok(())
}

fn match_stats_rows(stats: &MatchStats) -> Vec<(&'static str, String)> {
    vec![
        ("occurrences", stats.occurrences.to_string()),
        ("units_consumed", stats.units_consumed.to_string()),
        ("forward_transitions", stats.forward_transitions.to_string()),
        ("failure_hops", stats.failure_hops.to_string()),
        ("visited", stats.visited().to_string()),
    ]
}

fn cmd_match(args: MatchArgs) -> CliResult {
    let da = load_archive(&args.archive)?;
    let text = read(&args.text)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut err = None;
    let stats = if args.count {
        da.for_each_match(&text, |_| {})?
    } else {
        da.for_each_match(&text, |o| {
            if err.is_none() {
                err = writeln!(out, "{}\t{}\t{}", o.pattern_id, o.start, o.end).err();
            }
        })?
    };
    if let Some(e) = err {
        return Err(e.into());
    }
    if args.count {
        print_rows(&mut out, &match_stats_rows(&stats))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_naive(args: NaiveArgs) -> CliResult {
    let dict = read_dict(&args.dict)?;
    let text = read(&args.text)?;
    let occ = naive_find(&dict, &text);
    let mut out = BufWriter::new(io::stdout().lock());
    if args.count {
        writeln!(out, "occurrences\t{}", occ.len())?;
    } else {
        for o in occ {
            writeln!(out, "{}\t{}\t{}", o.pattern_id, o.start, o.end)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> CliResult {
    let da = load_archive(&args.archive)?;
    let mut rows = config_rows(da.config());
    rows.extend(da.stats().rows());
    print_rows(&mut io::stdout().lock(), &rows)?;
    Ok(())
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let seed = synth::env_seed();
    let (dict, lines) = synth::corpus(args.kind, seed, args.patterns, args.lines, args.line_len);
    fs::write(&args.dict_out, dict.to_file_bytes())?;
    let mut f = BufWriter::new(fs::File::create(&args.corpus_out)?);
    for l in &lines {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    eprintln!(
        "seed {seed:#x}: {} patterns, {} lines",
        dict.len(),
        lines.len()
    );
    Ok(())
}

struct BenchRow {
    cfg: BuildConfig,
    stats: daac::BuildStats,
    match_secs: f64,
    matched: MatchStats,
}

fn bench_cell(dict: &Dictionary, lines: &[&[u8]], cfg: &BuildConfig, runs: u32) -> CliResult<BenchRow> {
    let (da, stats) = build_from(dict, cfg)?;
    let mut matched = MatchStats::default();
    let mut total = 0.0;
    for run in 0..runs {
        let mut acc = MatchStats::default();
        let t = Instant::now();
        for line in lines {
            acc.add(&da.for_each_match(line, |_| {})?);
        }
        total += t.elapsed().as_secs_f64();
        if run == 0 {
            matched = acc;
        }
    }
    Ok(BenchRow {
        cfg: *cfg,
        stats,
        match_secs: total / f64::from(runs),
        matched,
    })
}

fn bench_configs(args: &BenchArgs) -> CliResult<Vec<BuildConfig>> {
    fn axis<T: Copy>(given: &[T], all: &[T], default: T, grid: bool) -> Vec<T> {
        match (given.is_empty(), grid) {
            (false, _) => given.to_vec(),
            (true, true) => all.to_vec(),
            (true, false) => vec![default],
        }
    }
    let d = BuildConfig::default();
    let vacants = if args.vacant.is_empty() {
        if args.grid {
            vec!["chain".into(), "skip-forward".into(), "skip-dense".into()]
        } else {
            vec![d.vacant.name().to_string()]
        }
    } else {
        args.vacant.clone()
    };
    let vacants = vacants
        .iter()
        .map(|v| vacant(v, args.skip_blocks, args.tau))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Vec::new();
    for store in axis(&args.store, &StoreKind::ALL, d.store, args.grid) {
        for scheme in axis(&args.scheme, &Scheme::ALL, d.scheme, args.grid) {
            for layout in axis(&args.layout, Layout::ALL, d.layout, args.grid) {
                for format in axis(&args.format, Format::ALL, d.format, args.grid) {
                    for &vacant in &vacants {
                        for order in axis(&args.order, TraversalOrder::ALL, d.order, args.grid) {
                            let cfg = BuildConfig {
                                scheme,
                                layout,
                                format,
                                vacant,
                                order,
                                store,
                            };
                            match cfg.validate() {
                                Ok(()) => out.push(cfg),
                                Err(DaacError::Config(msg)) if format == Format::Compact => {
                                    eprintln!("skipping {cfg}: {msg}");
                                }
                                Err(e) => return Err(e.into()),
                            }
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("no valid configuration requested".into()));
    }
    Ok(out)
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let configs = bench_configs(&args)?;
    let dict = read_dict(&args.dict)?;
    let corpus = read(&args.corpus)?;
    let mut lines: Vec<&[u8]> = corpus.split(|&b| b == b'\n').collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }

    let threads = (args.threads as usize).min(configs.len());
    let mut rows: Vec<Option<CliResult<BenchRow>>> = (0..configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = rows.chunks_mut(configs.len().div_ceil(threads)).collect();
        let mut start = 0;
        for chunk in chunks {
            let cfgs = &configs[start..start + chunk.len()];
            start += chunk.len();
            let (dict, lines) = (&dict, &lines);
            scope.spawn(move || {
                for (slot, cfg) in chunk.iter_mut().zip(cfgs) {
                    *slot = Some(bench_cell(dict, lines, cfg, args.runs));
                }
            });
        }
    });
    let rows = rows
        .into_iter()
        .map(|r| r.expect("every cell measured"))
        .collect::<CliResult<Vec<_>>>()?;

    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(
        out,
        "store\tscheme\tlayout\tformat\tvacant\torder\tbuild_ms\tmatch_ms\tnum_states\tarray_len\t\
         vacant_proportion\tavg_verifications\tmem_states\tmem_total\tstate_mem_ratio\t\
         forward_transitions\tfailure_hops\tvisited\tunits\toccurrences"
    )?;
    for r in &rows {
        let basic = rows.iter().find(|o| {
            o.cfg.format == Format::Basic
                && BuildConfig {
                    format: Format::Basic,
                    ..r.cfg
                } == o.cfg
        });
        let ratio = basic.map_or("NA".to_string(), |b| {
            format!("{:.6}", r.stats.memory.states as f64 / b.stats.memory.states as f64)
        });
        let c = &r.cfg;
        let s = &r.stats;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.store,
            c.scheme,
            c.layout,
            c.format,
            c.vacant,
            c.order,
            s.build_time.unwrap_or_default().as_secs_f64() * 1e3,
            r.match_secs * 1e3,
            s.num_states,
            s.array_len,
            s.vacant_proportion,
            s.avg_verifications,
            s.memory.states,
            s.memory.total(),
            ratio,
            r.matched.forward_transitions,
            r.matched.failure_hops,
            r.matched.visited(),
            r.matched.units_consumed,
            r.matched.occurrences,
        )?;
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Match(a) => cmd_match(a),
        Cmd::Naive(a) => cmd_naive(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::GenCorpus(a) => cmd_gen(a),
        Cmd::Stats(a) => cmd_stats(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
