//! Command-line interface.
//!
//! Every flag may also be given in a config file (`--config path`) as
//! `key = value` lines, with `#` comments; keys are flag names without the
//! leading dashes. Flags on the command line take precedence.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use kvldp_core::datagen::{
    gen_regime, gen_synthetic, ingest_ratings, Dataset, FrequencyRegime, IngestOptions, MeanRegime,
    SyntheticLaw, SyntheticParams, ValueLaw,
};
use kvldp_core::mechanisms::{
    count_bound, report_size_bits, theoretical_bound, Mechanism, DEFAULT_VALUE,
};

use crate::conditional::{
    conditional_rows_table, conditional_summary_table, median_frequency_ae_by_dim, run_conditional,
    ConditionalConfig, QuerySpec,
};
use crate::emit::{emit, Cell, Format, Table};
use crate::error::{config, io, Result};
use crate::estimator::parse_estimators;
use crate::study::{
    default_value_study, study_table, StudyConfig, DEFAULT_STUDY_EPSILONS, DEFAULT_VBARS,
};
use crate::sweep::{
    check_mean_above_frequency, check_monotonicity, key_table, rows_table, run_sweep,
    summary_table, Population, SoftCheck, SweepConfig, DEFAULT_DELTA, DEFAULT_EPSILONS,
    DEFAULT_REPS,
};

#[derive(Parser, Debug)]
#[command(
    name = "kvldp",
    version,
    about = "Key-value local differential privacy experiments"
)]
pub struct Cli {
    /// Plain-text `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic dataset to a file.
    Generate(GenerateArgs),
    /// Convert a ratings file into a dataset file.
    Ingest(IngestArgs),
    /// Sweep mechanisms over privacy budgets and repetitions.
    Run(RunArgs),
    /// Conditional frequency and mean experiments.
    Conditional(ConditionalArgs),
    /// F2M error across default values.
    DefaultStudy(StudyArgs),
    /// Print theoretical error bounds.
    Bounds(BoundsArgs),
    /// Print per-report communication cost.
    Cost(CostArgs),
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct DataArgs {
    /// Comma-separated dataset specs: `gaussian`, `uniform`,
    /// `regime:<frequency>:<mean>` or a dataset file.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Users in generated datasets.
    #[arg(long)]
    pub users: Option<usize>,
    /// Keys in generated datasets.
    #[arg(long)]
    pub keys: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Ratings file with `user,item,rating[,…]` rows.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Rating range as `min,max`.
    #[arg(long)]
    pub scale: Option<String>,
    #[arg(long)]
    pub max_rows: Option<u64>,
    #[arg(long)]
    pub max_users: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated mechanisms or `all`.
    #[arg(long)]
    pub mechanisms: Option<String>,
    /// Comma-separated privacy budgets.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub reps: Option<u32>,
    /// F2M default value.
    #[arg(long)]
    pub vbar: Option<f64>,
    /// Failure probability of the bound check.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also write per-key errors.
    #[arg(long)]
    pub per_key: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ConditionalArgs {
    /// Comma-separated key-domain sizes.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub frequency_regime: Option<String>,
    #[arg(long)]
    pub mean_regime: Option<String>,
    /// Target key (`k1`); repeat together with `--cond`.
    #[arg(long)]
    pub target: Vec<String>,
    /// Condition (`k2=1,k3=0`) for the matching `--target`.
    #[arg(long)]
    pub cond: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated default values.
    #[arg(long)]
    pub vbar: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub reps: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub mechanisms: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Comma-separated report counts N.
    #[arg(long)]
    pub reports: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Key frequency used by the mean bound.
    #[arg(long)]
    pub frequency: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    /// Comma-separated key-domain sizes.
    #[arg(long)]
    pub keys: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Values from a config file, keyed by flag name.
#[derive(Debug, Default)]
pub struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config(format!("config line {}: expected key = value", i + 1)))?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_owned());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(io(path))?)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else config value, else `None`.
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| config(format!("config key '{key}': bad value '{v}'")))
            })
            .transpose()
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn list<T: FromStr + Clone>(
        &self,
        flag: Option<String>,
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>> {
        match self.get(flag, key)? {
            Some(s) => parse_list(&s, key),
            None => Ok(default.to_vec()),
        }
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| config(format!("{what}: bad list entry '{p}'")))
        })
        .collect()
}

/// A dataset named on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    Synthetic(SyntheticLaw),
    Regime(FrequencyRegime, MeanRegime),
    File(PathBuf),
}

impl DatasetSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(law) = s.parse::<SyntheticLaw>() {
            return Ok(Self::Synthetic(law));
        }
        if let Some(rest) = s.strip_prefix("regime:") {
            let (f, m) = rest.split_once(':').ok_or_else(|| {
                config(format!(
                    "regime spec '{s}' must be regime:<frequency>:<mean>"
                ))
            })?;
            return Ok(Self::Regime(
                f.parse().map_err(|e| config(format!("{e}")))?,
                m.parse().map_err(|e| config(format!("{e}")))?,
            ));
        }
        Ok(Self::File(PathBuf::from(s)))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Synthetic(law) => law.name().to_owned(),
            Self::Regime(f, m) => format!("regime:{}:{}", f.name(), m.name()),
            Self::File(p) => p.file_stem().map_or_else(
                || p.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        }
    }

    pub fn load(&self, d: usize, n: usize, seed: u64) -> Result<Dataset> {
        Ok(match self {
            Self::Synthetic(law) => gen_synthetic(*law, d, n, &SyntheticParams::default(), seed)?,
            Self::Regime(f, m) => gen_regime(*f, *m, ValueLaw::default(), d, n, seed)?,
            Self::File(p) => Dataset::read_from(p)?,
        })
    }
}

const DEFAULT_USERS: usize = 100_000;
const DEFAULT_KEYS: usize = 100;

struct DataChoice {
    specs: Vec<DatasetSpec>,
    users: usize,
    keys: usize,
    seed: u64,
}

impl DataChoice {
    fn resolve(s: &Settings, a: DataArgs) -> Result<Self> {
        let specs = s
            .or(a.dataset, "dataset", "gaussian".to_owned())?
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(DatasetSpec::parse)
            .collect::<Result<Vec<_>>>()?;
        if specs.is_empty() {
            return Err(config("no dataset given"));
        }
        Ok(Self {
            specs,
            users: s.or(a.users, "users", DEFAULT_USERS)?,
            keys: s.or(a.keys, "keys", DEFAULT_KEYS)?,
            seed: s.or(a.seed, "seed", 0)?,
        })
    }

    fn populations(&self) -> Result<Vec<Population>> {
        self.specs
            .iter()
            .map(|spec| {
                Ok(Population::new(
                    spec.label(),
                    spec.load(self.keys, self.users, self.seed)?,
                ))
            })
            .collect()
    }

    fn describe(&self) -> String {
        self.specs
            .iter()
            .map(DatasetSpec::label)
            .collect::<Vec<_>>()
            .join(",")
    }
}

struct Output {
    path: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn resolve(s: &Settings, a: OutputArgs) -> Result<Self> {
        Ok(Self {
            path: s.get(a.out, "out")?,
            format: s.or(a.format, "format", "csv".to_owned())?.parse()?,
        })
    }

    fn write(&self, table: &Table) -> Result<()> {
        emit(table, self.format, self.path.as_deref())
    }

    /// Writes `table` next to the main output as `<stem>-<suffix>.<ext>`;
    /// skipped when writing to standard output.
    fn write_sibling(&self, suffix: &str, table: &Table) -> Result<Option<PathBuf>> {
        let Some(p) = &self.path else { return Ok(None) };
        let stem = p
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let sibling = p.with_file_name(format!("{stem}-{suffix}.{}", self.format.extension()));
        emit(table, self.format, Some(&sibling))?;
        Ok(Some(sibling))
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn report_soft_checks(checks: &[SoftCheck]) {
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("soft check failed: {}: {}", c.name, c.detail);
    }
}

/// Runs a parsed command line, on a dedicated thread pool if requested.
pub fn execute(cli: Cli) -> Result<()> {
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let threads = settings.get(cli.threads, "threads")?;
    match threads {
        Some(0) => Err(config("threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config(e.to_string()))?
            .install(|| dispatch(cli.command, &settings)),
        None => dispatch(cli.command, &settings),
    }
}

fn dispatch(command: Command, s: &Settings) -> Result<()> {
    match command {
        Command::Generate(a) => generate(s, a),
        Command::Ingest(a) => ingest(s, a),
        Command::Run(a) => run(s, a),
        Command::Conditional(a) => conditional(s, a),
        Command::DefaultStudy(a) => study(s, a),
        Command::Bounds(a) => bounds(s, a),
        Command::Cost(a) => cost(s, a),
    }
}

fn generate(s: &Settings, a: GenerateArgs) -> Result<()> {
    let out: PathBuf = s
        .get(a.out, "out")?
        .ok_or_else(|| config("generate needs --out"))?;
    let data = DataChoice::resolve(s, a.data)?;
    let [spec] = data.specs.as_slice() else {
        return Err(config("generate takes exactly one dataset spec"));
    };
    if matches!(spec, DatasetSpec::File(_)) {
        return Err(config("generate needs a generator spec, not a file"));
    }
    spec.load(data.keys, data.users, data.seed)?
        .write_to(&out)?;
    Ok(())
}

fn ingest(s: &Settings, a: IngestArgs) -> Result<()> {
    let input: PathBuf = s
        .get(a.input, "input")?
        .ok_or_else(|| config("ingest needs --input"))?;
    let out: PathBuf = s
        .get(a.out, "out")?
        .ok_or_else(|| config("ingest needs --out"))?;
    let scale: Vec<f64> = parse_list(&s.or(a.scale, "scale", "1,5".to_owned())?, "scale")?;
    let [lo, hi] = scale.as_slice() else {
        return Err(config("scale must be min,max"));
    };
    let mut opts = IngestOptions::new(s.or(a.top_k, "top-k", 100)?, (*lo, *hi));
    opts.max_rows = s.get(a.max_rows, "max-rows")?;
    opts.max_users = s.get(a.max_users, "max-users")?;
    ingest_ratings(&input, &opts)?.write_to(&out)?;
    Ok(())
}

fn run(s: &Settings, a: RunArgs) -> Result<()> {
    let data = DataChoice::resolve(s, a.data)?;
    let cfg = SweepConfig {
        estimators: parse_estimators(&s.or(a.mechanisms, "mechanisms", "all".to_owned())?)?,
        epsilons: s.list(a.epsilon, "epsilon", &DEFAULT_EPSILONS)?,
        reps: s.or(a.reps, "reps", DEFAULT_REPS)?,
        seed: data.seed,
        vbar: s.or(a.vbar, "vbar", DEFAULT_VALUE)?,
        delta: s.or(a.delta, "delta", DEFAULT_DELTA)?,
    };
    cfg.validate()?;
    let per_key = a.per_key || s.or(None, "per-key", false)?;
    let output = Output::resolve(s, a.output)?;
    let result = run_sweep(&data.populations()?, &cfg)?;

    let meta = |t: Table, table: &str| {
        t.meta("tool", "kvldp run")
            .meta("table", table)
            .meta("seed", cfg.seed)
            .meta("datasets", data.describe())
            .meta("users", data.users)
            .meta("keys", data.keys)
            .meta(
                "mechanisms",
                join(&cfg.estimators.iter().map(|e| e.name()).collect::<Vec<_>>()),
            )
            .meta("epsilons", join(&cfg.epsilons))
            .meta("reps", cfg.reps)
            .meta("vbar", cfg.vbar)
            .meta("delta", cfg.delta)
    };
    output.write(&meta(summary_table(&result.cells, cfg.vbar), "summary"))?;
    output.write_sibling("rows", &meta(rows_table(&result.rows), "rows"))?;
    if per_key {
        output.write_sibling("keys", &meta(key_table(&result.rows), "keys"))?;
    }
    report_soft_checks(&check_monotonicity(&result.cells));
    report_soft_checks(&check_mean_above_frequency(&result.cells));
    Ok(())
}

fn conditional(s: &Settings, a: ConditionalArgs) -> Result<()> {
    let defaults = ConditionalConfig::default();
    let mut targets = a.target;
    let mut conds = a.cond;
    if targets.is_empty() && conds.is_empty() {
        if let (Some(t), Some(c)) = (s.raw("target"), s.raw("cond")) {
            targets = t.split(';').map(str::to_owned).collect();
            conds = c.split(';').map(str::to_owned).collect();
        }
    }
    if targets.len() != conds.len() {
        return Err(config(
            "--target and --cond must be given the same number of times",
        ));
    }
    let queries = (!targets.is_empty()).then(|| {
        targets
            .into_iter()
            .zip(conds)
            .map(|(target, condition)| QuerySpec { target, condition })
            .collect()
    });
    let cfg = ConditionalConfig {
        dims: s.list(a.dims, "dims", &defaults.dims)?,
        users: s.or(a.users, "users", defaults.users)?,
        epsilons: s.list(a.epsilon, "epsilon", &defaults.epsilons)?,
        reps: s.or(a.reps, "reps", defaults.reps)?,
        seed: s.or(a.seed, "seed", defaults.seed)?,
        frequency: s
            .or(
                a.frequency_regime,
                "frequency-regime",
                defaults.frequency.name().to_owned(),
            )?
            .parse()?,
        mean: s
            .or(
                a.mean_regime,
                "mean-regime",
                defaults.mean.name().to_owned(),
            )?
            .parse()?,
        queries,
    };
    let output = Output::resolve(s, a.output)?;
    let result = run_conditional(&cfg)?;
    let meta = |t: Table, table: &str| {
        t.meta("tool", "kvldp conditional")
            .meta("table", table)
            .meta("seed", cfg.seed)
            .meta("dims", join(&cfg.dims))
            .meta("users", cfg.users)
            .meta("epsilons", join(&cfg.epsilons))
            .meta("reps", cfg.reps)
            .meta("frequency_regime", cfg.frequency.name())
            .meta("mean_regime", cfg.mean.name())
    };
    output.write(&meta(conditional_summary_table(&result.cells), "summary"))?;
    output.write_sibling("rows", &meta(conditional_rows_table(&result.rows), "rows"))?;
    for &e in &cfg.epsilons {
        let by_dim = median_frequency_ae_by_dim(&result.cells, e);
        if let (Some(first), Some(last)) = (by_dim.first(), by_dim.last()) {
            if last.1 < first.1 {
                eprintln!(
                    "soft check failed: conditional AE at d={} ({:.4}) below d={} ({:.4}), eps={e}",
                    last.0, last.1, first.0, first.1
                );
            }
        }
    }
    Ok(())
}

fn study(s: &Settings, a: StudyArgs) -> Result<()> {
    let data = DataChoice::resolve(s, a.data)?;
    let [spec] = data.specs.as_slice() else {
        return Err(config("default-study takes exactly one dataset"));
    };
    let cfg = StudyConfig {
        vbars: s.list(a.vbar, "vbar", &DEFAULT_VBARS)?,
        epsilons: s.list(a.epsilon, "epsilon", &DEFAULT_STUDY_EPSILONS)?,
        reps: s.or(a.reps, "reps", DEFAULT_REPS)?,
        seed: data.seed,
    };
    let output = Output::resolve(s, a.output)?;
    let pop = Population::new(spec.label(), spec.load(data.keys, data.users, data.seed)?);
    let result = default_value_study(&pop, &cfg)?;
    let meta = |t: Table, table: &str| {
        t.meta("tool", "kvldp default-study")
            .meta("table", table)
            .meta("seed", cfg.seed)
            .meta("dataset", spec.label())
            .meta("users", data.users)
            .meta("keys", data.keys)
            .meta("vbars", join(&cfg.vbars))
            .meta("epsilons", join(&cfg.epsilons))
            .meta("reps", cfg.reps)
    };
    output.write(&meta(study_table(&result), "summary"))?;
    output.write_sibling("rows", &meta(rows_table(&result.rows), "rows"))?;
    Ok(())
}

fn bounds(s: &Settings, a: BoundsArgs) -> Result<()> {
    let estimators =
        parse_estimators(&s.or(a.mechanisms, "mechanisms", "kvue,kvoh,f2m".to_owned())?)?;
    let epsilons: Vec<f64> = s.list(a.epsilon, "epsilon", &DEFAULT_EPSILONS)?;
    let reports: Vec<u64> = s.list(a.reports, "reports", &[1_000, 100_000])?;
    let delta = s.or(a.delta, "delta", DEFAULT_DELTA)?;
    let f = s.or(a.frequency, "frequency", 0.5)?;
    let output = Output::resolve(s, a.output)?;
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    for e in estimators {
        if !e.has_bound() {
            return Err(config(format!("no closed-form bound for {e}")));
        }
        if !mechanisms.contains(&e.mechanism()) {
            mechanisms.push(e.mechanism());
        }
    }
    let mut t = Table::new(&[
        "mechanism",
        "epsilon",
        "reports",
        "delta",
        "frequency",
        "count_bound",
        "freq_bound",
        "mean_bound",
    ])
    .meta("tool", "kvldp bounds")
    .meta("delta", delta)
    .meta("f2m_epsilon", "per channel")
    .meta("frequency", f);
    for &m in &mechanisms {
        for &e in &epsilons {
            for &n in &reports {
                let b = theoretical_bound(m, e, n, delta, f)?;
                t.push(vec![
                    m.name().into(),
                    e.into(),
                    n.into(),
                    delta.into(),
                    f.into(),
                    count_bound(m, e, n, delta)?.into(),
                    b.frequency.into(),
                    b.mean.into(),
                ]);
            }
        }
    }
    output.write(&t)
}

fn cost(s: &Settings, a: CostArgs) -> Result<()> {
    let keys: Vec<usize> = s.list(a.keys, "keys", &[DEFAULT_KEYS])?;
    let output = Output::resolve(s, a.output)?;
    let mut t = Table::new(&["mechanism", "d", "formula", "bits"]).meta("tool", "kvldp cost");
    for &d in &keys {
        for m in Mechanism::ALL {
            let formula = match m {
                Mechanism::PrivKv | Mechanism::Kvue => "log2(3d)",
                Mechanism::F2m => "2 log2(d)",
                Mechanism::Kvoh => "3 log2(d)",
            };
            t.push(vec![
                m.name().into(),
                d.into(),
                formula.into(),
                Cell::from(report_size_bits(m, d)?),
            ]);
        }
    }
    output.write(&t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_precedence() {
        let s = Settings::parse("# comment\nreps = 7\nepsilon = 0.5, 1\nper_key = true\n").unwrap();
        assert_eq!(s.or(None::<u32>, "reps", 50).unwrap(), 7);
        assert_eq!(s.or(Some(3u32), "reps", 50).unwrap(), 3);
        assert_eq!(s.list::<f64>(None, "epsilon", &[]).unwrap(), [0.5, 1.0]);
        assert!(s.or(None::<bool>, "per-key", false).unwrap());
        assert_eq!(s.or(None::<u64>, "seed", 4).unwrap(), 4);
        assert!(Settings::parse("reps 7").is_err());
        assert!(Settings::parse("reps = x")
            .unwrap()
            .or(None::<u32>, "reps", 1)
            .is_err());
    }

    #[test]
    fn dataset_specs() {
        assert_eq!(
            DatasetSpec::parse("uniform").unwrap(),
            DatasetSpec::Synthetic(SyntheticLaw::Uniform)
        );
        assert_eq!(
            DatasetSpec::parse("regime:high:low").unwrap(),
            DatasetSpec::Regime(FrequencyRegime::High, MeanRegime::Low)
        );
        assert_eq!(
            DatasetSpec::parse("regime:high:low").unwrap().label(),
            "regime:high:low"
        );
        assert!(DatasetSpec::parse("regime:high").is_err());
        assert!(matches!(
            DatasetSpec::parse("data/x.csv").unwrap(),
            DatasetSpec::File(_)
        ));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "kvldp",
            "run",
            "--mechanisms",
            "kvue",
            "--epsilon",
            "1,2",
            "--reps",
            "2",
            "--threads",
            "1",
        ])
        .unwrap();
        assert_eq!(cli.threads, Some(1));
        let Command::Run(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.epsilon.as_deref(), Some("1,2"));
        assert_eq!(
            parse_estimators(&a.mechanisms.unwrap()).unwrap(),
            [crate::Estimator::Kvue]
        );
    }
}
