//! `nnga` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 file-system error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{normalize_minmax, unify_vocabulary, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::ga::{evolve, exhaustive_best, write_trace_csv, GaConfig, DEFAULT_MAX_EXHAUSTIVE};
use crate::knn::{classify_with_reject, recognition_rate, FeatureMask};
use crate::pca::fit_pca2;
use crate::plot::Scatter;
use crate::report::{
    feature_pairs, write_pair_csv, write_projection_csv, HoldoutReport, SelectManifest,
};
use crate::synth::{generate, SynthSpec};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "nnga",
    version,
    about = "Genetic feature selection for nearest-neighbour classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-feature train/test pair
    Synth(SynthArgs),
    /// Run the GA feature selection
    Select(SelectArgs),
    /// Evaluate a mask with the k-NN classifier
    Eval(EvalArgs),
    /// PCA or raw feature-pair scatterplots
    Project(ProjectArgs),
    /// Exhaustive search over all feature subsets (small inputs only)
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Label column: header name, 0-based index, or "last"
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Input files have no header row
    #[arg(long)]
    pub no_header: bool,
    /// Min-max scale features using bounds from the training file
    #[arg(long)]
    pub normalize: bool,
}

impl DataArgs {
    fn label(&self) -> LabelColumn {
        let l: LabelColumn = self.label_column.parse().expect("infallible");
        if self.no_header && matches!(l, LabelColumn::Name(_)) {
            LabelColumn::Last
        } else {
            l
        }
    }

    fn load(&self, path: &Path) -> Result<Dataset> {
        Dataset::load_csv(path, &self.label(), !self.no_header)
    }

    /// Loads a training file plus any number of companions on a shared vocabulary.
    fn load_set(&self, train: &Path, others: &[&Path]) -> Result<(Dataset, Vec<Dataset>)> {
        let mut train = self.load(train)?;
        let mut loaded = Vec::new();
        for p in others {
            let d = self.load(p)?;
            let (t, d) = unify_vocabulary(&train, &d)?;
            train = t;
            loaded.push(d);
        }
        let vocab = train.classes().to_vec();
        let loaded = loaded
            .into_iter()
            .map(|d| d.with_vocabulary(&vocab))
            .collect::<Result<Vec<_>>>()?;
        for d in &loaded {
            train.check_compatible(d)?;
        }
        if self.normalize {
            let refs: Vec<&Dataset> = loaded.iter().collect();
            let (t, o, _) = normalize_minmax(&train, &refs)?;
            return Ok((t, o));
        }
        Ok((train, loaded))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// 117-feature run: 50 individuals, 814 generations, alpha = beta = 0.6, seed 12957
    Lot,
    /// 27-feature run: 216 individuals, 250 generations, alpha = beta = 0.4, seed 1547
    Rgb,
}

#[derive(Debug, Args)]
pub struct GaArgs {
    /// Parameter preset the other flags override
    #[arg(long, value_enum, default_value = "lot")]
    pub preset: Preset,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Individuals per generation
    #[arg(long)]
    pub pop: Option<usize>,
    /// Last generation index (0 evaluates only the initial population)
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    /// Probability that an offspring is mutated at all
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    /// Per-bit flip probability once mutation applies (default 1/L)
    #[arg(long)]
    pub bit_flip_rate: Option<f64>,
    #[arg(long)]
    pub elite: Option<usize>,
    #[arg(long)]
    pub tournament: Option<usize>,
    /// Stop once the best fitness reaches this value
    #[arg(long)]
    pub stop_fitness: Option<f64>,
    /// Stop after this many generations without improvement
    #[arg(long)]
    pub stall: Option<usize>,
    /// Evaluate fitness on a single thread
    #[arg(long)]
    pub serial: bool,
}

impl GaArgs {
    pub fn config(&self) -> GaConfig {
        let mut c = match self.preset {
            Preset::Lot => GaConfig::lot(),
            Preset::Rgb => GaConfig::rgb(),
        };
        macro_rules! set {
            ($field:ident, $flag:ident) => {
                if let Some(v) = self.$flag {
                    c.$field = v;
                }
            };
        }
        set!(seed, seed);
        set!(k, k);
        set!(alpha, alpha);
        set!(beta, beta);
        set!(population_size, pop);
        set!(max_generations, generations);
        set!(crossover_prob, crossover_prob);
        set!(mutation_prob, mutation_prob);
        set!(elite_count, elite);
        set!(tournament_size, tournament);
        if self.bit_flip_rate.is_some() {
            c.per_bit_flip_rate = self.bit_flip_rate;
        }
        if self.stop_fitness.is_some() {
            c.stop_on_fitness = self.stop_fitness;
        }
        if self.stall.is_some() {
            c.stall_generations = self.stall;
        }
        c.parallel = !self.serial;
        c
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Base spec as a `key = value` file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix for the generated files
    #[arg(long, default_value = "")]
    pub prefix: String,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    /// Comma-separated informative feature indices
    #[arg(long, value_delimiter = ',')]
    pub informative: Option<Vec<usize>>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SynthArgs {
    pub fn spec(&self) -> Result<SynthSpec> {
        let mut s = match &self.config {
            Some(p) => SynthSpec::load_config(p)?,
            None => SynthSpec::default(),
        };
        if let Some(v) = self.classes {
            s.n_classes = v;
        }
        if let Some(v) = self.features {
            s.n_features = v;
        }
        if let Some(v) = &self.informative {
            s.informative = v.clone();
        }
        if let Some(v) = self.separation {
            s.class_separation = v;
        }
        if let Some(v) = self.noise_sd {
            s.noise_sd = v;
        }
        if let Some(v) = self.train_size {
            s.train_size = v;
        }
        if let Some(v) = self.test_size {
            s.test_size = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    pub train: PathBuf,
    /// Set whose hit count drives the fitness
    pub eval: PathBuf,
    /// Untouched set scored once with the final mask
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Print one line per generation to stderr
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub train: PathBuf,
    pub test: PathBuf,
    /// Bit string, index list, or @file holding either (default: all features)
    #[arg(long)]
    pub mask: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Report vote ties as rejections instead of breaking them
    #[arg(long)]
    pub reject: bool,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub mask: Option<String>,
    /// PCA coordinates output
    #[arg(long, default_value = "projection.csv")]
    pub out: PathBuf,
    /// Also write the PCA scatterplot here
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Raw feature pair `i,j` to plot instead of PCA; repeatable, or `all`
    /// for every pair of mask features
    #[arg(long)]
    pub pair: Vec<String>,
    /// Directory for pair plots
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub train: PathBuf,
    pub eval: PathBuf,
    /// Refuse inputs with more features than this
    #[arg(long, default_value_t = DEFAULT_MAX_EXHAUSTIVE)]
    pub max_features: usize,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub data: DataArgs,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::InvalidConfig(_) | Error::InvalidMask(_) | Error::SearchTooLarge { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_DATA,
    }
}

/// Parses `std::env::args` and runs the selected command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn parse_mask(arg: Option<&str>, len: usize) -> Result<FeatureMask> {
    match arg {
        None => Ok(FeatureMask::full(len)),
        Some(s) => match s.strip_prefix('@') {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                FeatureMask::parse(text.lines().next().unwrap_or(""), len)
            }
            None => FeatureMask::parse(s, len),
        },
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = a.spec()?;
    let (train, test) = generate(&spec)?;
    create_dir(&a.out_dir)?;
    let train_path = a.out_dir.join(format!("{}train.csv", a.prefix));
    let test_path = a.out_dir.join(format!("{}test.csv", a.prefix));
    train.write_csv(&train_path)?;
    test.write_csv(&test_path)?;
    write_file(
        &a.out_dir.join(format!("{}synth.txt", a.prefix)),
        spec.to_string(),
    )?;
    println!(
        "wrote {} ({}x{}) and {} ({}x{})",
        train_path.display(),
        train.len(),
        train.feature_count(),
        test_path.display(),
        test.len(),
        test.feature_count()
    );
    Ok(())
}

pub fn cmd_select(a: &SelectArgs) -> Result<()> {
    let cfg = a.ga.config();
    cfg.validate()?;
    let mut others: Vec<&Path> = vec![&a.eval];
    if let Some(h) = &a.holdout {
        others.push(h);
    }
    let (train, sets) = a.data.load_set(&a.train, &others)?;
    let eval = &sets[0];
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    create_dir(&a.out_dir)?;

    let started = Instant::now();
    let evolution = evolve(&train, eval, &cfg)?;
    let elapsed = started.elapsed();

    if a.verbose {
        for s in &evolution.trace {
            eprintln!(
                "gen {:>4} best {:>10} median {:>10} min {:>10} nf {:>3} hits {:>3}",
                s.generation,
                s.best_fitness,
                s.median_fitness,
                s.min_fitness,
                s.best_nf,
                s.best_hits
            );
        }
    }

    let holdout = match (&a.holdout, sets.get(1)) {
        (Some(p), Some(h)) => {
            let r = recognition_rate(&train, h, cfg.k, &evolution.best.mask())?;
            Some(HoldoutReport {
                path: p.display().to_string(),
                hits: r.hits,
                samples: h.len(),
            })
        }
        _ => None,
    };

    let mut trace = Vec::new();
    write_trace_csv(&evolution.trace, &mut trace).map_err(|e| Error::io(&a.out_dir, e))?;
    write_file(&a.out_dir.join("trace.csv"), trace)?;
    let manifest = SelectManifest {
        train_path: &a.train.display().to_string(),
        eval_path: &a.eval.display().to_string(),
        cfg: &cfg,
        feature_count: train.feature_count(),
        eval_samples: eval.len(),
        evolution: &evolution,
        normalized: a.data.normalize,
        holdout,
    }
    .render();
    write_file(&a.out_dir.join("manifest.txt"), &manifest)?;
    let best = &evolution.best;
    write_file(
        &a.out_dir.join("best_mask.txt"),
        format!("{}\n{}\n", best.mask(), best.mask().to_index_list()),
    )?;
    write_file(
        &a.out_dir.join("timing.txt"),
        format!("wall_time_seconds = {:.3}\n", elapsed.as_secs_f64()),
    )?;

    print!("{manifest}");
    println!("wall_time_seconds = {:.3}", elapsed.as_secs_f64());
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let (train, sets) = a.data.load_set(&a.train, &[&a.test])?;
    let test = &sets[0];
    let mask = parse_mask(a.mask.as_deref(), train.feature_count())?;
    let r = recognition_rate(&train, test, a.k, &mask)?;
    println!(
        "features = {} ({})",
        mask.active_count(),
        mask.to_index_list()
    );
    println!("k = {}", a.k);
    println!("hits = {} of {}", r.hits, test.len());
    println!("rate = {}", r.rate);
    println!("errors = {}", test.len() - r.hits);
    println!("sample_index,predicted,actual,correct");
    for (i, &(p, t)) in r.per_sample.iter().enumerate() {
        let predicted = if a.reject {
            match classify_with_reject(&train, test.row(i), a.k, &mask)? {
                Some(c) => train.class_name(c).to_string(),
                None => "reject".to_string(),
            }
        } else {
            train.class_name(p).to_string()
        };
        println!("{i},{predicted},{},{}", train.class_name(t), p == t);
    }
    Ok(())
}

fn parse_pair(s: &str, len: usize) -> Result<(usize, usize)> {
    let bad = || {
        Error::InvalidConfig(format!(
            "--pair expects i,j with indices below {len}, got {s:?}"
        ))
    };
    let (i, j) = s.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i >= len || j >= len {
        return Err(bad());
    }
    Ok((i, j))
}

pub fn cmd_project(a: &ProjectArgs) -> Result<()> {
    let (d, _) = a.data.load_set(&a.dataset, &[])?;
    let mask = a
        .mask
        .as_deref()
        .map(|m| parse_mask(Some(m), d.feature_count()))
        .transpose()?;

    if a.pair.is_empty() {
        let model = fit_pca2(&d, mask.as_ref())?;
        let mut csv = Vec::new();
        let points = write_projection_csv(&d, &model, &mut csv)?;
        write_file(&a.out, csv)?;
        println!(
            "eigenvalues {} {} -> {}",
            model.eigenvalue1,
            model.eigenvalue2,
            a.out.display()
        );
        if let Some(svg) = &a.svg {
            let title = format!(
                "PCA projection ({} samples, {} features)",
                d.len(),
                model.features.len()
            );
            let doc = Scatter {
                title: &title,
                x_label: "PC1",
                y_label: "PC2",
                classes: d.classes(),
                points: &points,
            }
            .to_svg();
            write_file(svg, doc)?;
        }
        return Ok(());
    }

    let mut pairs = Vec::new();
    for p in &a.pair {
        if p == "all" {
            let m = mask
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--pair all needs --mask".into()))?;
            pairs.extend(feature_pairs(&m));
        } else {
            pairs.push(parse_pair(p, d.feature_count())?);
        }
    }
    create_dir(&a.out_dir)?;
    for (i, j) in pairs {
        let mut csv = Vec::new();
        let points = write_pair_csv(&d, i, j, &mut csv)?;
        let stem = format!("pair_{i}_{j}");
        write_file(&a.out_dir.join(format!("{stem}.csv")), csv)?;
        let title = format!("Features #{i} and #{j}");
        let doc = Scatter {
            title: &title,
            x_label: &format!("feature {i}"),
            y_label: &format!("feature {j}"),
            classes: d.classes(),
            points: &points,
        }
        .to_svg();
        let path = a.out_dir.join(format!("{stem}.svg"));
        write_file(&path, doc)?;
        println!("{}", path.display());
    }
    Ok(())
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    let cfg = a.ga.config();
    cfg.validate()?;
    let (train, sets) = a.data.load_set(&a.train, &[&a.eval])?;
    let r = exhaustive_best(&train, &sets[0], &cfg, a.max_features)?;
    println!("subsets_evaluated = {}", r.subsets_evaluated);
    println!("best_mask = {}", r.mask);
    println!("selected_features = {}", r.mask.to_index_list());
    println!("fitness = {}", r.fitness);
    println!("hits = {} of {}", r.hits, sets[0].len());
    println!("nf = {}", r.nf);
    println!("alpha = {}", cfg.alpha);
    println!("beta = {}", cfg.beta);
    println!("k = {}", cfg.k);
    Ok(())
}
