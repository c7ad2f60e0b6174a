use std::fs;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lzdict::datagen::{self, SynthParams};
use lzdict::dictionary::{permutation_to_bytes, Mode};
use lzdict::fc_store::{DEFAULT_BASELINE_BUCKET, DEFAULT_PHRASE_BUCKET};
use lzdict::phrase_index::DEFAULT_THRESHOLD;
use lzdict::selftest::{self, Fault};
use lzdict::{BuildConfig, InputSet, LzDictionary, SpaceReport, Variant};

mod records;

use records::{Format, RecordError, MISSING_RECORD};

const DEFAULT_SEED: u64 = 42;
const SEED_ENV: &str = "LZDICT_SEED";

#[derive(Parser)]
#[command(name = "lzdict", version, about = "Compressed static string dictionaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dictionary from a corpus and print construction statistics.
    Build(BuildArgs),
    /// Print the string for each ID (from arguments, or stdin one per line).
    Access(AccessArgs),
    /// Print the ID of each string (from arguments, or stdin), -1 if absent.
    Lookup(LookupArgs),
    /// Print the space breakdown of a dictionary file.
    Stats(StatsArgs),
    /// Time construction, access and lookup against a corpus.
    Bench(BenchArgs),
    /// Generate the synthetic alpha-beta-alpha string set.
    GenSynth(GenSynthArgs),
    /// Run the built-in end-to-end checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "lzt-fc")]
    LztFc,
    Fc,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Base,
    Lensort,
    Omitfirst,
    Combined,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Base => Variant::Base,
            VariantArg::Lensort => Variant::LengthSorted,
            VariantArg::Omitfirst => Variant::FirstOmitted,
            VariantArg::Combined => Variant::Combined,
        }
    }
}

#[derive(Args)]
struct DictOptions {
    #[arg(long, value_enum, default_value = "lzt-fc")]
    mode: ModeArg,
    /// Phrase index layout (lzt-fc mode only) [default: base]
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Front-coding bucket size [default: 16 for lzt-fc, 8 for fc]
    #[arg(long)]
    bucket_size: Option<usize>,
    /// Phrase length up to which parsings are grouped by first-phrase length
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: usize,
}

impl DictOptions {
    fn config(&self) -> Result<BuildConfig, CliError> {
        if self.bucket_size == Some(0) {
            return Err(CliError::Usage("--bucket-size must be at least 1".into()));
        }
        let config = match self.mode {
            ModeArg::LztFc => BuildConfig {
                variant: self.variant.map_or(Variant::Base, Variant::from),
                phrase_bucket: self.bucket_size.unwrap_or(DEFAULT_PHRASE_BUCKET),
                threshold: self.threshold,
                ..BuildConfig::default()
            },
            ModeArg::Fc => {
                if self.variant.is_some() {
                    return Err(CliError::Usage("--variant applies to --mode lzt-fc only".into()));
                }
                BuildConfig {
                    baseline_bucket: self.bucket_size.unwrap_or(DEFAULT_BASELINE_BUCKET),
                    ..BuildConfig::baseline()
                }
            }
        };
        Ok(config)
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Corpus file, or - for stdin
    input: PathBuf,
    /// Dictionary file to write; the ID of each input string goes to <OUTPUT>.perm
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    dict: DictOptions,
    #[arg(long, value_enum, default_value = "lines")]
    format: Format,
    /// Print statistics as CSV
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct AccessArgs {
    dict: PathBuf,
    ids: Vec<String>,
    /// Output format; len-prefixed writes a length of 0xffffffff for misses
    #[arg(long, value_enum, default_value = "lines")]
    format: Format,
}

#[derive(Args)]
struct LookupArgs {
    dict: PathBuf,
    strings: Vec<String>,
    /// Format of queries read from stdin
    #[arg(long, value_enum, default_value = "lines")]
    format: Format,
}

#[derive(Args)]
struct StatsArgs {
    dict: PathBuf,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct BenchArgs {
    dict: PathBuf,
    /// The corpus the dictionary was built from
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "lines")]
    format: Format,
    /// Sampled IDs and strings per run; 0 skips timing
    #[arg(long, default_value_t = 1_000_000)]
    queries: usize,
    /// Sampling seed; the LZDICT_SEED environment variable takes precedence
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct GenSynthArgs {
    /// Output file; stdout if omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fraction of the full-size set to generate
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Generator seed; the LZDICT_SEED environment variable takes precedence
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the strings in sorted order instead of shuffled
    #[arg(long)]
    sorted: bool,
    #[arg(long, value_enum, default_value = "lines")]
    format: Format,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<lzdict::Error> for CliError {
    fn from(e: lzdict::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        match e {
            RecordError::Io(e) => CliError::Io(e.to_string()),
            RecordError::Malformed(m) => CliError::Data(m),
        }
    }
}

/// Write failures on stdout; `main` treats a broken pipe as a normal exit.
fn out_err(e: io::Error) -> CliError {
    CliError::Io(format!("writing output: {e}"))
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Access(a) => cmd_access(a),
        Command::Lookup(a) => cmd_lookup(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenSynth(a) => cmd_gen_synth(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(m)) if m.contains("Broken pipe") => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lzdict: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    if path == Path::new("-") {
        records::read_all(io::stdin().lock()).map_err(|e| CliError::Io(format!("stdin: {e}")))
    } else {
        fs::read(path).map_err(|e| CliError::io(path, e))
    }
}

fn read_corpus(path: &Path, format: Format) -> Result<InputSet, CliError> {
    let strings = records::parse_records(&read_input(path)?, format)?;
    if strings.is_empty() {
        return Err(CliError::Usage(format!("{}: no strings to build from", path.display())));
    }
    if let Some(i) = strings.iter().position(Vec::is_empty) {
        return Err(CliError::Data(format!("{}: record {} is an empty string", path.display(), i + 1)));
    }
    Ok(InputSet::new(strings)?)
}

fn load_dict(path: &Path) -> Result<LzDictionary, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    LzDictionary::from_bytes(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn perm_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".perm");
    PathBuf::from(s)
}

fn variant_name(dict: &LzDictionary) -> &'static str {
    dict.variant().map_or("-", Variant::name)
}

fn space_table(out: &mut impl Write, space: &SpaceReport) -> io::Result<()> {
    writeln!(out, "{:<10} {:>14} {:>8}", "component", "bits", "% orig")?;
    writeln!(out, "{:<10} {:>14} {:>8.2}", "store", space.store_bits, space.store_pct())?;
    if space.mode == Mode::LztFc {
        writeln!(out, "{:<10} {:>14} {:>8.2}", "index", space.index_bits, space.index_pct())?;
    }
    writeln!(out, "{:<10} {:>14} {:>8.2}", "total", space.total_bits(), space.total_pct())
}

fn cmd_build(a: BuildArgs) -> CliResult {
    let config = a.dict.config()?;
    let input = read_corpus(&a.input, a.format)?;
    if input.duplicates_removed() > 0 {
        eprintln!("lzdict: ignored {} duplicate strings", input.duplicates_removed());
    }
    let start = Instant::now();
    let built = LzDictionary::build(&input, &config)?;
    let elapsed = start.elapsed();

    let perm = perm_path(&a.output);
    fs::write(&a.output, built.dict.to_bytes()).map_err(|e| CliError::io(&a.output, e))?;
    fs::write(&perm, permutation_to_bytes(&built.permutation)).map_err(|e| CliError::io(&perm, e))?;

    let dict = &built.dict;
    let space = dict.space();
    let mut out = io::stdout().lock();
    if a.csv {
        writeln!(
            out,
            "mode,variant,strings,original_bytes,nodes_before,nodes_after,phrases_before,phrases_after,\
             parsing_before,parsing_after,store_bits,index_bits,total_pct,constr_s"
        )
        .map_err(out_err)?;
        let cell = |f: fn(&lzdict::BuildStats) -> usize| built.stats.as_ref().map_or(String::new(), |s| f(s).to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.3}",
            dict.mode(),
            variant_name(dict),
            dict.len(),
            dict.original_bytes(),
            cell(|s| s.nodes_before),
            cell(|s| s.nodes_after),
            cell(|s| s.phrases_before),
            cell(|s| s.phrases_after),
            cell(|s| s.parsing_before),
            cell(|s| s.parsing_after),
            space.store_bits,
            space.index_bits,
            space.total_pct(),
            elapsed.as_secs_f64(),
        )
        .map_err(out_err)?;
        return Ok(());
    }
    writeln!(
        out,
        "built {} ({} {}), {} strings, {} bytes, {:.3} s",
        a.output.display(),
        dict.mode(),
        variant_name(dict),
        dict.len(),
        dict.original_bytes(),
        elapsed.as_secs_f64()
    )
    .map_err(out_err)?;
    if let Some(stats) = &built.stats {
        write!(out, "\n{}", stats.table()).map_err(out_err)?;
        writeln!(out, "mean phrases per string: {:.2}", stats.mean_parse_len()).map_err(out_err)?;
    }
    writeln!(out).map_err(out_err)?;
    space_table(&mut out, &space).map_err(out_err)
}

fn query_inputs(args: Vec<String>, format: Format) -> Result<Vec<Vec<u8>>, CliError> {
    if !args.is_empty() {
        return Ok(args.into_iter().map(String::into_bytes).collect());
    }
    let data = read_input(Path::new("-"))?;
    Ok(records::parse_records(&data, format)?)
}

fn cmd_access(a: AccessArgs) -> CliResult {
    let dict = load_dict(&a.dict)?;
    // IDs are always text, one per line.
    let queries = query_inputs(a.ids, Format::Lines)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut s = Vec::new();
    for q in &queries {
        let text = String::from_utf8_lossy(q);
        let id = text.trim().parse::<i64>();
        let found = match id {
            Ok(id) => usize::try_from(id).ok().and_then(|id| dict.access_into(id, &mut s).ok()),
            Err(_) => None,
        };
        match (a.format, found, id) {
            (Format::Lines, Some(()), _) => match records::write_record(&mut out, &s, Format::Lines) {
                Ok(()) => {}
                Err(RecordError::Malformed(m)) => writeln!(out, "error: {m}").map_err(out_err)?,
                Err(e) => return Err(e.into()),
            },
            (Format::Lines, None, Ok(_)) => writeln!(out, "-1").map_err(out_err)?,
            (Format::Lines, None, Err(_)) => writeln!(out, "error: malformed id {text:?}").map_err(out_err)?,
            (Format::LenPrefixed, Some(()), _) => records::write_record(&mut out, &s, Format::LenPrefixed)?,
            (Format::LenPrefixed, None, _) => out.write_all(&MISSING_RECORD.to_le_bytes()).map_err(out_err)?,
        }
    }
    out.flush().map_err(out_err)
}

fn cmd_lookup(a: LookupArgs) -> CliResult {
    let dict = load_dict(&a.dict)?;
    let queries = query_inputs(a.strings, a.format)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for q in &queries {
        writeln!(out, "{}", dict.lookup_signed(q)).map_err(out_err)?;
    }
    out.flush().map_err(out_err)
}

fn cmd_stats(a: StatsArgs) -> CliResult {
    let dict = load_dict(&a.dict)?;
    let space = dict.space();
    let mut out = io::stdout().lock();
    let breakdown = dict.index().map(|i| i.size_breakdown());
    if a.csv {
        writeln!(
            out,
            "mode,variant,strings,original_bytes,phrases,store_bits,index_bits,symbol_bits,start_bits,\
             first_phrase_bits,store_pct,index_pct,total_pct"
        )
        .map_err(out_err)?;
        let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
            dict.mode(),
            variant_name(&dict),
            dict.len(),
            dict.original_bytes(),
            opt(dict.index().map(|_| dict.store().len())),
            space.store_bits,
            space.index_bits,
            opt(breakdown.map(|b| b.symbol_bits)),
            opt(breakdown.map(|b| b.start_bits)),
            opt(breakdown.map(|b| b.first_phrase_bits)),
            space.store_pct(),
            space.index_pct(),
            space.total_pct(),
        )
        .map_err(out_err)?;
        return Ok(());
    }
    writeln!(out, "mode            {}", dict.mode()).map_err(out_err)?;
    writeln!(out, "variant         {}", variant_name(&dict)).map_err(out_err)?;
    writeln!(out, "strings         {}", dict.len()).map_err(out_err)?;
    writeln!(out, "original bytes  {}", dict.original_bytes()).map_err(out_err)?;
    writeln!(out, "bucket size     {}", dict.store().bucket_size()).map_err(out_err)?;
    if let (Some(index), Some(b)) = (dict.index(), breakdown) {
        writeln!(out, "phrases         {}", dict.store().len()).map_err(out_err)?;
        writeln!(out, "index symbols   {}", index.stored_symbols()).map_err(out_err)?;
        writeln!(
            out,
            "index bits      {} symbols, {} starts, {} first-phrase",
            b.symbol_bits, b.start_bits, b.first_phrase_bits
        )
        .map_err(out_err)?;
        writeln!(out, "index share     {:.1}%", 100.0 * space.index_share()).map_err(out_err)?;
    }
    writeln!(out).map_err(out_err)?;
    space_table(&mut out, &space).map_err(out_err)
}

const BENCH_RUNS: u32 = 3;

fn per_op_us(total: Duration, ops: usize) -> f64 {
    total.as_secs_f64() * 1e6 / (ops as f64 * BENCH_RUNS as f64)
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    let dict = load_dict(&a.dict)?;
    let input = read_corpus(&a.corpus, a.format)?;
    if input.len() != dict.len() {
        return Err(CliError::Data(format!(
            "corpus has {} distinct strings but the dictionary holds {}",
            input.len(),
            dict.len()
        )));
    }
    let config = match (dict.mode(), dict.index()) {
        (Mode::LztFc, Some(index)) => BuildConfig {
            variant: index.variant(),
            phrase_bucket: dict.store().bucket_size(),
            threshold: index.threshold(),
            ..BuildConfig::default()
        },
        _ => BuildConfig { baseline_bucket: dict.store().bucket_size(), ..BuildConfig::baseline() },
    };
    let start = Instant::now();
    let rebuilt = LzDictionary::build(&input, &config)?;
    let constr = start.elapsed();
    if rebuilt.dict.to_bytes() != dict.to_bytes() {
        return Err(CliError::Data("dictionary was not built from this corpus".into()));
    }
    drop(rebuilt);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = (0..a.queries).map(|_| rng.gen_range(0..dict.len())).collect();
    let strings: Vec<&[u8]> =
        (0..a.queries).map(|_| input.strings()[rng.gen_range(0..input.len())].as_slice()).collect();
    let mut hasher = DefaultHasher::new();
    ids.hash(&mut hasher);
    strings.hash(&mut hasher);
    let digest = hasher.finish();

    let timings = if a.queries == 0 {
        None
    } else {
        let mut access = Duration::ZERO;
        let mut lookup = Duration::ZERO;
        let mut buf = Vec::new();
        for _ in 0..BENCH_RUNS {
            let t = Instant::now();
            for &id in &ids {
                dict.access_into(id, &mut buf)?;
                std::hint::black_box(&buf);
            }
            access += t.elapsed();
            let t = Instant::now();
            let mut misses = 0usize;
            for s in &strings {
                misses += std::hint::black_box(dict.lookup(s)).is_none() as usize;
            }
            lookup += t.elapsed();
            if misses > 0 {
                return Err(CliError::Data(format!("{misses} member strings not found")));
            }
        }
        Some((per_op_us(access, ids.len()), per_op_us(lookup, strings.len())))
    };

    let space = dict.space();
    let fmt_t = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{t:.3}"));
    let mut out = io::stdout().lock();
    if a.csv {
        writeln!(out, "mode,variant,strings,queries,seed,constr_s,cmpr_pct,access_us,lookup_us,sample_digest")
            .map_err(out_err)?;
        writeln!(
            out,
            "{},{},{},{},{},{:.3},{:.3},{},{},{digest:016x}",
            dict.mode(),
            variant_name(&dict),
            dict.len(),
            a.queries,
            seed,
            constr.as_secs_f64(),
            space.total_pct(),
            fmt_t(timings.map(|t| t.0)),
            fmt_t(timings.map(|t| t.1)),
        )
        .map_err(out_err)?;
        return Ok(());
    }
    writeln!(
        out,
        "{} {}: {} strings, {} queries x {BENCH_RUNS} runs, seed {seed}, sample digest {digest:016x}",
        dict.mode(),
        variant_name(&dict),
        dict.len(),
        a.queries
    )
    .map_err(out_err)?;
    writeln!(out, "{:>10} {:>8} {:>12} {:>12}", "constr s", "cmpr %", "access µs", "lookup µs").map_err(out_err)?;
    writeln!(
        out,
        "{:>10.3} {:>8.2} {:>12} {:>12}",
        constr.as_secs_f64(),
        space.total_pct(),
        fmt_t(timings.map(|t| t.0)),
        fmt_t(timings.map(|t| t.1))
    )
    .map_err(out_err)
}

fn cmd_gen_synth(a: GenSynthArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    if !(a.scale > 0.0 && a.scale.is_finite()) {
        return Err(CliError::Usage("--scale must be a positive number".into()));
    }
    let params = SynthParams::with_scale(a.scale, seed);
    let mut strings = datagen::gen_synth(&params).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.sorted {
        strings.sort_unstable();
    }
    let sink: Box<dyn Write> = match &a.output {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| CliError::io(path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    for s in &strings {
        records::write_record(&mut out, s, a.format)?;
    }
    out.flush().map_err(out_err)
}

fn cmd_selftest(a: SelftestArgs) -> CliResult {
    let fault = a.inject_fault.then_some(Fault::BrokenComparison);
    let results = selftest::run(fault);
    let mut out = io::stdout().lock();
    let mut failed = 0;
    for r in &results {
        if r.passed {
            writeln!(out, "PASS  {}", r.name).map_err(out_err)?;
        } else {
            failed += 1;
            writeln!(out, "FAIL  {}: {}", r.name, r.detail).map_err(out_err)?;
        }
    }
    writeln!(out, "{} of {} checks passed", results.len() - failed, results.len()).map_err(out_err)?;
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} self-test checks failed")));
    }
    Ok(())
}
