//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or I/O error,
//! 3 graph-shape error (cycle without `--condense`).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::batch::{parallel_preprocess_timed, BatchConfig, Mode, PhaseTimes};
use crate::error::GraphError;
use crate::gen::{layered_dag_edges, random_dag_edges};
use crate::graph::{condense_sccs, Graph, Vertex, VertexOrder};
use crate::io::{self, EdgeList};
use crate::labels::{label_stats, HubLabels};
use crate::oracle::{verify_cover, verify_cover_sampled, verify_minimal, ReachOracle};

/// Largest graph verified exhaustively without `--sample`.
pub const EXHAUSTIVE_VERIFY_MAX_N: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "daghl", version, about = "Reachability hub labels for DAGs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a label index from a graph file.
    Build(BuildArgs),
    /// Answer reachability queries against an index.
    Query(QueryArgs),
    /// Check an index against the graph it was built from.
    Verify(VerifyArgs),
    /// Generate a synthetic DAG in edge-list format.
    Gen(GenArgs),
    /// Time a grid of build configurations.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    El,
    Dimacs,
}

#[derive(Debug, Clone, Args)]
pub struct GraphInput {
    #[arg(long, value_enum, default_value = "el")]
    pub format: Format,
    /// Collapse strongly connected components before indexing.
    #[arg(long)]
    pub condense: bool,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[command(flatten)]
    pub graph: GraphInput,
    /// degree | random:<seed> | file:<path>
    #[arg(long, default_value = "degree")]
    pub order: String,
    #[arg(long, default_value = "par-strict")]
    pub mode: Mode,
    /// Batch width; 64 is a testing extension below the usual 128/256/512.
    #[arg(long = "batch-size", default_value_t = 256, value_parser = parse_batch_size)]
    pub batch_size: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long = "strict-fraction", default_value_t = 0.25)]
    pub strict_fraction: f64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(short = 'l', long = "labels")]
    pub labels: PathBuf,
    /// File with one "s t" pair per line.
    #[arg(long, conflicts_with = "stdin")]
    pub pairs: Option<PathBuf>,
    /// Stream "s t" pairs from standard input.
    #[arg(long)]
    pub stdin: bool,
    pub source: Option<String>,
    pub target: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(short = 'g', long = "graph")]
    pub graph_path: PathBuf,
    #[arg(short = 'l', long = "labels")]
    pub labels: PathBuf,
    #[command(flatten)]
    pub graph: GraphInput,
    /// Also report label entries that could be deleted without losing coverage.
    #[arg(long)]
    pub minimality: bool,
    /// Count a vertex's own rank as a deletable entry in the minimality check.
    #[arg(long = "include-self")]
    pub include_self: bool,
    /// Verify rows of a random fraction of source vertices instead of all pairs.
    #[arg(long)]
    pub sample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenType {
    Random,
    Layered,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long = "type", value_enum)]
    pub kind: GenType,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub epv: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long, default_value = "degree")]
    pub order: String,
    #[arg(long, value_delimiter = ',', default_value = "seq,par-strict,par-relaxed")]
    pub modes: Vec<Mode>,
    #[arg(long = "batch-sizes", value_delimiter = ',', default_value = "256", value_parser = parse_batch_size)]
    pub batch_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub threads: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long = "strict-fraction", default_value_t = 0.25)]
    pub strict_fraction: f64,
}

fn parse_batch_size(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if crate::batch::SUPPORTED_WIDTHS.contains(&k) {
        Ok(k)
    } else {
        Err(format!("batch size must be one of 64, 128, 256, 512 (got {k})"))
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable input, malformed files.
    Usage(String),
    /// The index failed verification.
    Verification(String),
    /// The input graph is not a DAG.
    Shape(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Shape(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Verification(m) | CliError::Shape(m) => m,
        }
    }
}

impl From<crate::error::IoError> for CliError {
    fn from(e: crate::error::IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Timings, totals and configuration of one build.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub mode: Mode,
    pub k: usize,
    pub threads: usize,
    pub strict_fraction: f64,
    pub order: String,
    pub n: usize,
    pub m: usize,
    pub order_time: Duration,
    pub phases: PhaseTimes,
    pub total_entries: usize,
    pub out_entries: usize,
    pub in_entries: usize,
    pub max_label: usize,
    pub mean_label: f64,
    /// Entries relative to the sequential build of the same order.
    pub redundancy: Option<f64>,
    pub repeats: Option<usize>,
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

impl RunReport {
    fn new(mode: Mode, cfg: &BatchConfig, order: &str, g: &Graph, labels: &HubLabels, order_time: Duration, phases: PhaseTimes) -> Self {
        let stats = label_stats(labels);
        RunReport {
            mode,
            k: cfg.k,
            threads: cfg.threads,
            strict_fraction: cfg.strict_fraction,
            order: order.to_string(),
            n: g.num_vertices(),
            m: g.num_edges(),
            order_time,
            phases,
            total_entries: stats.total_entries,
            out_entries: stats.out.entries,
            in_entries: stats.inc.entries,
            max_label: stats.max(),
            mean_label: stats.mean(),
            redundancy: None,
            repeats: None,
        }
    }

    pub fn total_time(&self) -> Duration {
        self.order_time + self.phases.sweep + self.phases.search + self.phases.merge
    }

    /// `key=value` pairs in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let mut f = vec![
            ("mode", self.mode.to_string()),
            ("k", self.k.to_string()),
            ("threads", self.threads.to_string()),
            ("strict_fraction", self.strict_fraction.to_string()),
            ("order", self.order.clone()),
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("order_ms", ms(self.order_time)),
            ("sweep_ms", ms(self.phases.sweep)),
            ("search_ms", ms(self.phases.search)),
            ("merge_ms", ms(self.phases.merge)),
            ("total_ms", ms(self.total_time())),
            ("total_entries", self.total_entries.to_string()),
            ("out_entries", self.out_entries.to_string()),
            ("in_entries", self.in_entries.to_string()),
            ("max_label", self.max_label.to_string()),
            ("mean_label", format!("{:.4}", self.mean_label)),
        ];
        if let Some(r) = self.repeats {
            f.push(("repeats", r.to_string()));
        }
        if let Some(r) = self.redundancy {
            f.push(("redundancy", format!("{r:.6}")));
        }
        f
    }

    pub fn to_line(&self) -> String {
        self.fields().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    pub fn write_lines(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in self.fields() {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(&a, out),
        Command::Query(a) => cmd_query(&a, input, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn read_edges(path: &Path, format: Format) -> CliResult<EdgeList> {
    let file = fs::File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    Ok(match format {
        Format::El => io::parse_edge_list(reader)?,
        Format::Dimacs => io::parse_dimacs(reader)?,
    })
}

/// Reads a graph file, optionally condensing cycles.
pub fn load_graph(path: &Path, input: &GraphInput) -> CliResult<Graph> {
    let el = read_edges(path, input.format)?;
    if input.condense {
        let n = el.n_hint.unwrap_or_else(|| {
            el.edges.iter().map(|&(u, v)| u.max(v) as usize + 1).max().unwrap_or(0)
        });
        if let Some(&(u, v)) = el.edges.iter().find(|&&(u, v)| u.max(v) as usize >= n) {
            return Err(CliError::Usage(format!("edge ({u}, {v}) references a vertex >= n = {n}")));
        }
        let (g, _) = condense_sccs(&el.edges, n);
        return Ok(g);
    }
    Graph::build(&el.edges, el.n_hint).map_err(|e| match e {
        GraphError::CycleDetected { .. } => CliError::Shape(format!("{e}; rerun with --condense")),
        e => CliError::Usage(e.to_string()),
    })
}

/// Resolves `degree`, `random:<seed>` or `file:<path>`.
pub fn resolve_order(spec: &str, g: &Graph) -> CliResult<VertexOrder> {
    if spec == "degree" {
        return Ok(VertexOrder::by_degree(g));
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed = seed.parse().map_err(|_| CliError::Usage(format!("bad order seed {seed:?}")))?;
        return Ok(VertexOrder::random(g.num_vertices(), seed));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return Ok(io::load_order(path, g.num_vertices())?);
    }
    Err(CliError::Usage(format!("unknown order {spec:?} (expected degree, random:<seed> or file:<path>)")))
}

fn build_config(mode: Mode, k: usize, threads: usize, strict_fraction: f64) -> CliResult<BatchConfig> {
    let cfg = BatchConfig { k, threads, strict_fraction, mode };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn timed_build(g: &Graph, order: &VertexOrder, cfg: &BatchConfig) -> (HubLabels, PhaseTimes) {
    parallel_preprocess_timed(g, order, cfg).expect("config validated")
}

pub fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> CliResult {
    let g = load_graph(&a.input, &a.graph)?;
    log::info!("loaded {} with n={} m={}", a.input.display(), g.num_vertices(), g.num_edges());
    let cfg = build_config(a.mode, a.batch_size, a.threads, a.strict_fraction)?;
    let t0 = Instant::now();
    let order = resolve_order(&a.order, &g)?;
    let order_time = t0.elapsed();
    let (labels, phases) = timed_build(&g, &order, &cfg);
    log::info!("built {} label entries in {:?}", labels.total_entries(), t0.elapsed());
    io::save_labels(&a.output, &labels)?;
    if g.dropped_duplicates() + g.dropped_self_loops() > 0 {
        writeln!(out, "dropped_duplicates={}", g.dropped_duplicates())?;
        writeln!(out, "dropped_self_loops={}", g.dropped_self_loops())?;
    }
    RunReport::new(a.mode, &cfg, &a.order, &g, &labels, order_time, phases).write_lines(out)?;
    Ok(())
}

fn parse_pair(line: &str, line_no: usize, n: usize) -> CliResult<Option<(Vertex, Vertex)>> {
    let t = line.trim();
    if t.is_empty() || t.starts_with('#') {
        return Ok(None);
    }
    let toks: Vec<&str> = t.split_ascii_whitespace().collect();
    if toks.len() != 2 {
        return Err(CliError::Usage(format!("line {line_no}: expected \"s t\", got {t:?}")));
    }
    let s = parse_vertex(toks[0], n)?;
    let d = parse_vertex(toks[1], n)?;
    Ok(Some((s, d)))
}

fn parse_vertex(tok: &str, n: usize) -> CliResult<Vertex> {
    let v: u64 = tok.parse().map_err(|_| CliError::Usage(format!("{tok:?} is not a vertex id")))?;
    if v >= n as u64 {
        return Err(CliError::Usage(format!("vertex {v} out of range for n = {n}")));
    }
    Ok(v as Vertex)
}

pub fn cmd_query(a: &QueryArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let labels = io::load_labels(&a.labels)?;
    let n = labels.num_vertices();
    let answer = |out: &mut dyn Write, s, t| writeln!(out, "{}", labels.query_unchecked(s, t) as u8);

    match (&a.source, &a.target) {
        (Some(s), Some(t)) => {
            if a.pairs.is_some() || a.stdin {
                return Err(CliError::Usage("give either a positional pair, --pairs or --stdin".into()));
            }
            answer(out, parse_vertex(s, n)?, parse_vertex(t, n)?)?;
            return Ok(());
        }
        (Some(_), None) => return Err(CliError::Usage("missing target vertex".into())),
        _ => {}
    }

    if let Some(path) = &a.pairs {
        let reader = BufReader::new(fs::File::open(path)?);
        for (i, line) in reader.lines().enumerate() {
            if let Some((s, t)) = parse_pair(&line?, i + 1, n)? {
                answer(out, s, t)?;
            }
        }
        return Ok(());
    }
    if a.stdin {
        let mut line = String::new();
        let mut line_no = 0;
        loop {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Ok(());
            }
            line_no += 1;
            if let Some((s, t)) = parse_pair(&line, line_no, n)? {
                answer(out, s, t)?;
                out.flush()?;
            }
        }
    }
    Err(CliError::Usage("nothing to query: give \"s t\", --pairs <file> or --stdin".into()))
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    let g = load_graph(&a.graph_path, &a.graph)?;
    let labels = io::load_labels(&a.labels)?;
    let n = g.num_vertices();
    if labels.num_vertices() != n {
        return Err(CliError::Usage(format!("index has {} vertices, graph has {n}", labels.num_vertices())));
    }

    let needs_oracle = a.sample.is_none() || a.minimality;
    if needs_oracle && n > EXHAUSTIVE_VERIFY_MAX_N {
        return Err(CliError::Usage(format!(
            "graph has {n} vertices; exhaustive checks are limited to {EXHAUSTIVE_VERIFY_MAX_N}, use --sample"
        )));
    }
    let oracle = if needs_oracle {
        Some(ReachOracle::build(&g).map_err(|e| CliError::Usage(e.to_string()))?)
    } else {
        None
    };

    let cover = match (a.sample, &oracle) {
        (Some(p), _) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("--sample {p} outside [0, 1]")));
            }
            verify_cover_sampled(&g, &labels, p, a.seed)
        }
        (None, Some(o)) => verify_cover(&labels, o),
        (None, None) => unreachable!("oracle built when not sampling"),
    };
    writeln!(out, "pairs_checked={}", cover.pairs_checked)?;
    writeln!(out, "mismatches={}", cover.mismatches.len())?;
    for &(s, t) in cover.mismatches.iter().take(20) {
        writeln!(out, "mismatch {s} {t} expected={} got={}", !labels.query_unchecked(s, t) as u8, labels.query_unchecked(s, t) as u8)?;
    }

    let mut removable = 0;
    if a.minimality {
        let report = verify_minimal(&labels, oracle.as_ref().expect("oracle"), a.include_self);
        removable = report.removable.len();
        writeln!(out, "entries_checked={}", report.entries_checked)?;
        writeln!(out, "removable={removable}")?;
        for e in report.removable.iter().take(20) {
            let side = match e.dir {
                crate::labels::Direction::Forward => "out",
                crate::labels::Direction::Backward => "in",
            };
            writeln!(out, "removable_entry vertex={} label={side} rank={}", e.vertex, e.rank)?;
        }
    }

    if !cover.is_ok() {
        return Err(CliError::Verification(format!("{} query mismatches", cover.mismatches.len())));
    }
    if removable > 0 {
        return Err(CliError::Verification(format!("{removable} removable label entries")));
    }
    writeln!(out, "status=ok")?;
    Ok(())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult {
    let missing = |flag: &str| CliError::Usage(format!("--type {:?} requires --{flag}", a.kind));
    let (n, edges) = match a.kind {
        GenType::Random => {
            let n = a.n.ok_or_else(|| missing("n"))?;
            let m = a.m.ok_or_else(|| missing("m"))?;
            if n > u32::MAX as usize {
                return Err(CliError::Usage(format!("--n {n} exceeds 32-bit ids")));
            }
            let edges = random_dag_edges(n, m, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            (n, edges)
        }
        GenType::Layered => {
            let layers = a.layers.ok_or_else(|| missing("layers"))?;
            let width = a.width.ok_or_else(|| missing("width"))?;
            let epv = a.epv.ok_or_else(|| missing("epv"))?;
            if layers == 0 || width == 0 {
                return Err(CliError::Usage("--layers and --width must be at least 1".into()));
            }
            let n = layers.checked_mul(width).filter(|&n| n <= u32::MAX as usize);
            let n = n.ok_or_else(|| CliError::Usage("layers * width exceeds 32-bit ids".into()))?;
            (n, layered_dag_edges(layers, width, epv, a.seed))
        }
    };
    match &a.output {
        Some(path) => io::write_edge_list(std::io::BufWriter::new(fs::File::create(path)?), n, &edges)?,
        None => io::write_edge_list(&mut *out, n, &edges)?,
    }
    Ok(())
}

fn median_run<F: FnMut() -> (HubLabels, PhaseTimes)>(repeats: usize, mut f: F) -> (HubLabels, PhaseTimes) {
    let mut runs: Vec<(HubLabels, PhaseTimes)> = (0..repeats.max(1)).map(|_| f()).collect();
    runs.sort_by_key(|(_, p)| p.sweep + p.search + p.merge);
    let mid = runs.len() / 2;
    runs.swap_remove(mid)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> CliResult {
    let g = load_graph(&a.input, &a.graph)?;
    let t0 = Instant::now();
    let order = resolve_order(&a.order, &g)?;
    let order_time = t0.elapsed();

    let seq_cfg = build_config(Mode::Sequential, a.batch_sizes.first().copied().unwrap_or(256), 1, a.strict_fraction)?;
    let (seq_labels, seq_phases) = median_run(a.repeats, || timed_build(&g, &order, &seq_cfg));
    let baseline = label_stats(&seq_labels).total_entries;
    let ratio = |l: &HubLabels| {
        if baseline == 0 { 1.0 } else { label_stats(l).total_entries as f64 / baseline as f64 }
    };

    if a.modes.contains(&Mode::Sequential) {
        let mut r = RunReport::new(Mode::Sequential, &seq_cfg, &a.order, &g, &seq_labels, order_time, seq_phases);
        r.redundancy = Some(1.0);
        r.repeats = Some(a.repeats.max(1));
        writeln!(out, "{}", r.to_line())?;
    }
    for &mode in a.modes.iter().filter(|&&m| m != Mode::Sequential) {
        for &k in &a.batch_sizes {
            for &threads in &a.threads {
                let cfg = build_config(mode, k, threads, a.strict_fraction)?;
                let (labels, phases) = median_run(a.repeats, || timed_build(&g, &order, &cfg));
                let mut r = RunReport::new(mode, &cfg, &a.order, &g, &labels, order_time, phases);
                r.redundancy = Some(ratio(&labels));
                r.repeats = Some(a.repeats.max(1));
                writeln!(out, "{}", r.to_line())?;
            }
        }
    }
    Ok(())
}
