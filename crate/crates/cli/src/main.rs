mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use specshift_core::cycles::{
    add_random_nodes, align_cycle_lengths, break_cycles, cycle_length_stats,
};
use specshift_core::dataset::{parse_jsonl, parse_tudataset, write_jsonl};
use specshift_core::dpattern::{d_patterns, verify_cycle_lemma, PatternInterner};
use specshift_core::gnn::{evaluate_f1, train, F1Scores, Model, ModelConfig, TrainReport};
use specshift_core::nn::{read_params, write_params};
use specshift_core::spectral::{
    graph_spectrum, similar_vs_different, spectrum_distance_matrix, DistanceMatrix, SpectrumSource,
};
use specshift_core::splits::{
    make_size_splits, SplitBundle, SplitRatios, UpsampleSpec, SPLIT_NAMES,
};
use specshift_core::{Dataset, Error, ErrorKind, Result};

use manifest::{manifest_path_for, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "specshift",
    version,
    about = "Graph-size distribution shift toolkit"
)]
struct Cli {
    /// Write the run manifest to this path instead of next to the primary output
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Validate flags and inputs without writing any output
    #[arg(long, global = true, default_value_t = false)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct DatasetArgs {
    /// TUDataset directory or JSONL file
    #[arg(long)]
    dataset: PathBuf,

    /// TUDataset file prefix [default: the directory name]
    #[arg(long)]
    name: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SourceArg {
    Eigenvalues,
    Degrees,
}

impl From<SourceArg> for SpectrumSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Eigenvalues => SpectrumSource::Eigenvalues,
            SourceArg::Degrees => SpectrumSource::Degrees,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PerturbMode {
    Break,
    Align,
    RandomNodes,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Train,
    Val,
    SmallTest,
    LargeTest,
}

impl Part {
    fn pick(self, s: &SplitBundle) -> &[usize] {
        match self {
            Part::Train => &s.train,
            Part::Val => &s.val,
            Part::SmallTest => &s.small_test,
            Part::LargeTest => &s.large_test,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a TUDataset directory (or JSONL file) to JSONL
    Convert {
        #[command(flatten)]
        data: DatasetArgs,
        /// Output JSONL path
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the sorted spectrum of one graph
    Spectrum {
        #[command(flatten)]
        data: DatasetArgs,
        /// Graph index in the dataset
        #[arg(long)]
        graph: usize,
        #[arg(long, value_enum, default_value_t = SourceArg::Eigenvalues)]
        source: SourceArg,
        /// Also write the values to this file, one per line
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise W1 distance matrix, graphs sorted by size (CSV, sizes sidecar, PGM)
    Distmat {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, value_enum, default_value_t = SourceArg::Eigenvalues)]
        source: SourceArg,
        /// Output CSV path; `<out>.sizes` and a `.pgm` heatmap are written beside it
        #[arg(long)]
        out: PathBuf,
        /// Recorded in the manifest; the computation is deterministic
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the PGM heatmap
        #[arg(long, default_value_t = false)]
        no_pgm: bool,
    },
    /// Similar-size versus different-size average distances
    Summarize {
        /// Distance matrix CSV written by `distmat`
        #[arg(long)]
        matrix: PathBuf,
        /// Sizes sidecar [default: <matrix>.sizes]
        #[arg(long)]
        sizes: Option<PathBuf>,
        /// Number of nearest-size neighbors counted as similar
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Also write the summary as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Break cycles, align cycle lengths, or attach random nodes
    Perturb {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, value_enum)]
        mode: PerturbMode,
        /// Cycle-length increments per selected graph (align)
        #[arg(long)]
        n: Option<usize>,
        /// Modify graphs whose index is a multiple of r (align, random-nodes)
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Nodes attached per selected graph (random-nodes)
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Required for align and random-nodes
        #[arg(long)]
        seed: Option<u64>,
        /// Output JSONL path
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean and std of per-graph average basis-cycle length
    CycleStats {
        #[command(flatten)]
        data: DatasetArgs,
        /// Restrict to one part of this split file
        #[arg(long, requires = "part")]
        split: Option<PathBuf>,
        #[arg(long, value_enum, requires = "split")]
        part: Option<Part>,
        /// Also write the statistics as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size-stratified train/val/small_test/large_test split
    Split {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        seed: u64,
        /// train,val,test ratios of the small-graph pool
        #[arg(long, default_value = "0.7,0.15,0.15")]
        ratios: String,
        /// Output split file
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; with --repeat k runs seeds s..s+k-1
    Train {
        #[command(flatten)]
        data: DatasetArgs,
        /// Split file written by `split`
        #[arg(long)]
        split: PathBuf,
        /// Model config file [default: built-in defaults]
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Upsampling as class:fraction:ratio items, comma separated
        #[arg(long)]
        upsample: Option<String>,
        /// Number of seeds to run
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Directory for parameters, reports, and the summary
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate stored parameters on a split
    Eval {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Parameter file written by `train`
        #[arg(long)]
        params: PathBuf,
        /// Evaluate one part only [default: all four]
        #[arg(long, value_enum)]
        part: Option<Part>,
        /// Also write the scores as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// d-pattern refinement report: the cycle lemma, or per-graph class counts
    Dpattern {
        /// Cycle lengths to check, as `a-b` or a comma list
        #[arg(long)]
        cycles: Option<String>,
        /// Dataset whose graphs are refined (uniform colors)
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// TUDataset file prefix [default: the directory name]
        #[arg(long)]
        name: Option<String>,
        /// Graph indices to refine, comma separated
        #[arg(long)]
        graphs: Option<String>,
        /// Maximum depth
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Ctx {
    dry_run: bool,
    manifest: RunManifest,
    manifest_path: PathBuf,
}

impl Ctx {
    fn new(cli: &Cli, name: &str, seed: Option<u64>, primary: Option<&Path>) -> Self {
        let manifest_path = cli.manifest.clone().unwrap_or_else(|| match primary {
            Some(p) => manifest_path_for(p),
            None => PathBuf::from(format!("{name}.manifest.json")),
        });
        Self {
            dry_run: cli.dry_run,
            manifest: RunManifest::new(
                name,
                std::env::args().skip(1).collect(),
                format!("{:?}", cli.command),
                seed,
            ),
            manifest_path,
        }
    }

    fn input(&mut self, p: &Path) -> Result<()> {
        if !p.exists() {
            return Err(Error::MissingFile(p.to_path_buf()));
        }
        self.manifest.add_input(p)
    }

    fn write(&mut self, path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        if self.dry_run {
            return Ok(());
        }
        write(path)?;
        self.manifest.add_output(path);
        Ok(())
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<()> {
        self.write(path, |p| fs::write(p, text).map_err(|e| Error::io(p, e)))
    }

    fn finish(self) -> Result<()> {
        log::info!(
            "{} finished, {} outputs",
            self.manifest.subcommand,
            self.manifest.outputs.len()
        );
        if self.dry_run {
            println!("dry run: inputs and flags are valid");
            return Ok(());
        }
        self.manifest.write(&self.manifest_path)
    }
}

fn load_dataset(ctx: &mut Ctx, data: &DatasetArgs) -> Result<Dataset> {
    load_dataset_at(ctx, &data.dataset, data.name.as_deref())
}

fn load_dataset_at(ctx: &mut Ctx, path: &Path, name: Option<&str>) -> Result<Dataset> {
    ctx.input(path)?;
    if path.is_dir() {
        let default_name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_tudataset(path, name.unwrap_or(&default_name))
    } else {
        parse_jsonl(path)
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidArgument(format!("{what} is stochastic and requires --seed")))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad index list {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn graph_at(d: &Dataset, i: usize) -> Result<&specshift_core::Graph> {
    d.graphs.get(i).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "graph index {i} out of range for {} graphs",
            d.len()
        ))
    })
}

#[derive(Serialize)]
struct MeanStd {
    mean: f64,
    std: f64,
}

fn mean_std(v: &[f64]) -> MeanStd {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Convert { data, out } => {
            let mut ctx = Ctx::new(&cli, "convert", None, Some(out));
            let d = load_dataset(&mut ctx, data)?;
            ctx.write(out, |p| write_jsonl(&d, p))?;
            println!("{} graphs, {} classes", d.len(), d.class_count);
            ctx.finish()
        }
        Command::Spectrum {
            data,
            graph,
            source,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "spectrum", None, out.as_deref());
            let d = load_dataset(&mut ctx, data)?;
            let spec = graph_spectrum(graph_at(&d, *graph)?, (*source).into())
                .map_err(|e| Error::at_graph(*graph, e))?;
            let text: String = spec.values().iter().map(|v| format!("{v}\n")).collect();
            print!("{text}");
            if let Some(out) = out {
                ctx.write_text(out, &text)?;
            }
            ctx.finish()
        }
        Command::Distmat {
            data,
            source,
            out,
            seed,
            no_pgm,
        } => {
            let mut ctx = Ctx::new(&cli, "distmat", *seed, Some(out));
            let d = load_dataset(&mut ctx, data)?;
            if ctx.dry_run {
                return ctx.finish();
            }
            let m = spectrum_distance_matrix(&d, (*source).into())?;
            ctx.write(out, |p| m.write_csv(p))?;
            ctx.write(&sizes_path_for(out), |p| m.write_sizes(p))?;
            if !no_pgm {
                ctx.write(&out.with_extension("pgm"), |p| m.write_pgm(p))?;
            }
            println!("{} graphs", m.len());
            ctx.finish()
        }
        Command::Summarize {
            matrix,
            sizes,
            k,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "summarize", None, out.as_deref());
            let sizes = sizes.clone().unwrap_or_else(|| sizes_path_for(matrix));
            ctx.input(matrix)?;
            ctx.input(&sizes)?;
            let m = DistanceMatrix::read_csv(matrix, &sizes)?;
            let s = similar_vs_different(&m, *k)?;
            println!("{s}");
            if let Some(out) = out {
                ctx.write_text(out, &to_json(&s))?;
            }
            ctx.finish()
        }
        Command::Perturb {
            data,
            mode,
            n,
            r,
            count,
            seed,
            out,
        } => {
            let seed = match mode {
                PerturbMode::Break => *seed,
                _ => Some(require_seed(*seed, "perturb --mode align/random-nodes")?),
            };
            let mut ctx = Ctx::new(&cli, "perturb", seed, Some(out));
            if *r == 0 {
                return Err(Error::InvalidArgument("--r must be at least 1".into()));
            }
            let d = load_dataset(&mut ctx, data)?;
            let mut rng = seed.map(rand_from_seed);
            let result = match mode {
                PerturbMode::Break => {
                    let graphs = d
                        .graphs
                        .par_iter()
                        .enumerate()
                        .map(|(i, g)| break_cycles(g).map_err(|e| Error::at_graph(i, e)))
                        .collect::<Result<Vec<_>>>()?;
                    Dataset::new(d.name.clone(), graphs, d.class_count)?
                }
                PerturbMode::Align => {
                    let n = n.ok_or_else(|| Error::InvalidArgument("align requires --n".into()))?;
                    align_cycle_lengths(&d, *r, n, rng.as_mut().expect("seeded"))?
                }
                PerturbMode::RandomNodes => {
                    let rng = rng.as_mut().expect("seeded");
                    let mut graphs = Vec::with_capacity(d.len());
                    for (i, g) in d.graphs.iter().enumerate() {
                        graphs.push(if i % r == 0 {
                            add_random_nodes(g, *count, rng).map_err(|e| Error::at_graph(i, e))?
                        } else {
                            g.clone()
                        });
                    }
                    Dataset::new(d.name.clone(), graphs, d.class_count)?
                }
            };
            ctx.write(out, |p| write_jsonl(&result, p))?;
            let nodes: usize = result.sizes().iter().sum();
            println!("{} graphs, {} nodes", result.len(), nodes);
            ctx.finish()
        }
        Command::CycleStats {
            data,
            split,
            part,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "cycle-stats", None, out.as_deref());
            let mut d = load_dataset(&mut ctx, data)?;
            if let (Some(split), Some(part)) = (split, part) {
                ctx.input(split)?;
                let s = SplitBundle::read(split)?;
                s.validate_against(&d)?;
                d = d.subset(part.pick(&s));
            }
            let stats = cycle_length_stats(&d)?;
            let text = to_json(&stats);
            print!("{text}");
            if let Some(out) = out {
                ctx.write_text(out, &text)?;
            }
            ctx.finish()
        }
        Command::Split {
            data,
            seed,
            ratios,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "split", Some(*seed), Some(out));
            let r: Vec<f64> = ratios
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad --ratios {ratios:?}")))?;
            let [train, val, test] = r.as_slice() else {
                return Err(Error::InvalidArgument("--ratios needs three values".into()));
            };
            let d = load_dataset(&mut ctx, data)?;
            let s = make_size_splits(
                &d,
                SplitRatios {
                    train: *train,
                    val: *val,
                    test: *test,
                },
                *seed,
            )?;
            let labels = d.labels();
            for (name, part) in SPLIT_NAMES.iter().zip(s.parts()) {
                let counts = SplitBundle::class_counts(part, &labels, d.class_count);
                let counts: Vec<String> = counts.iter().map(usize::to_string).collect();
                println!("{name}: {}", counts.join("/"));
            }
            ctx.write(out, |p| s.write(p))?;
            ctx.finish()
        }
        Command::Train {
            data,
            split,
            config,
            seed,
            upsample,
            repeat,
            out_dir,
        } => {
            let mut ctx = Ctx::new(
                &cli,
                "train",
                Some(*seed),
                Some(&out_dir.join("summary.json")),
            );
            if *repeat == 0 {
                return Err(Error::InvalidArgument("--repeat must be at least 1".into()));
            }
            let cfg = match config {
                Some(p) => {
                    ctx.input(p)?;
                    ModelConfig::read(p)?
                }
                None => ModelConfig::default(),
            };
            let up = match upsample {
                Some(s) => UpsampleSpec::parse(s)?,
                None => UpsampleSpec::new(),
            };
            let d = load_dataset(&mut ctx, data)?;
            ctx.input(split)?;
            let s = SplitBundle::read(split)?;
            s.validate_against(&d)?;
            if ctx.dry_run {
                return ctx.finish();
            }
            fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            let seeds: Vec<u64> = (0..*repeat as u64).map(|k| seed + k).collect();
            let outcomes = seeds
                .par_iter()
                .map(|&sd| train(&cfg, &d, &s, &up, sd))
                .collect::<Result<Vec<_>>>()?;
            ctx.write_text(&out_dir.join("config.txt"), &cfg.to_text())?;
            for o in &outcomes {
                let sd = o.report.seed;
                ctx.write(&out_dir.join(format!("model-seed{sd}.bin")), |p| {
                    write_params(p, &o.model.params)
                })?;
                ctx.write_text(
                    &out_dir.join(format!("report-seed{sd}.json")),
                    &to_json(&o.report),
                )?;
            }
            let reports: Vec<&TrainReport> = outcomes.iter().map(|o| &o.report).collect();
            let summary = summarize_reports(&reports);
            for (part, metrics) in &summary {
                for (metric, ms) in metrics {
                    println!("{part} {metric} = {:.4} ± {:.4}", ms.mean, ms.std);
                }
            }
            ctx.write_text(&out_dir.join("summary.json"), &to_json(&summary))?;
            ctx.finish()
        }
        Command::Eval {
            data,
            split,
            config,
            params,
            part,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "eval", None, out.as_deref());
            ctx.input(config)?;
            ctx.input(params)?;
            ctx.input(split)?;
            let cfg = ModelConfig::read(config)?;
            let model = Model::from_params(cfg, read_params(params)?)?;
            let d = load_dataset(&mut ctx, data)?;
            let s = SplitBundle::read(split)?;
            s.validate_against(&d)?;
            let parts: Vec<(&str, &[usize])> = match part {
                Some(p) => vec![(part_name(*p), p.pick(&s))],
                None => SPLIT_NAMES
                    .iter()
                    .copied()
                    .zip(s.parts().map(|v| v.as_slice()))
                    .collect(),
            };
            let mut scores: BTreeMap<&str, F1Scores> = BTreeMap::new();
            for (name, idx) in parts {
                scores.insert(name, evaluate_f1(&model, &d, idx)?);
            }
            let text = to_json(&scores);
            print!("{text}");
            if let Some(out) = out {
                ctx.write_text(out, &text)?;
            }
            ctx.finish()
        }
        Command::Dpattern {
            cycles,
            dataset,
            name,
            graphs,
            depth,
            out,
        } => {
            let mut ctx = Ctx::new(&cli, "dpattern", None, out.as_deref());
            let mut report = serde_json::Map::new();
            if cycles.is_none() && dataset.is_none() {
                return Err(Error::InvalidArgument(
                    "dpattern needs --cycles or --dataset".into(),
                ));
            }
            if let Some(c) = cycles {
                let lemma = verify_cycle_lemma(&parse_index_list(c)?, *depth)?;
                report.insert(
                    "cycle_lemma".into(),
                    serde_json::to_value(lemma).expect("serializes"),
                );
            }
            if let Some(path) = dataset {
                let d = load_dataset_at(&mut ctx, path, name.as_deref())?;
                let idx = match graphs {
                    Some(g) => parse_index_list(g)?,
                    None => (0..d.len()).collect(),
                };
                let mut interner = PatternInterner::new();
                let mut per_graph = Vec::new();
                for &i in &idx {
                    let g = graph_at(&d, i)?;
                    let t = d_patterns(g, &vec![0; g.node_count()], *depth, &mut interner)?;
                    let counts: Vec<usize> = (0..=*depth).map(|k| t.class_count(k)).collect();
                    per_graph.push(serde_json::json!({ "graph": i, "classes_per_depth": counts }));
                }
                report.insert("graphs".into(), serde_json::Value::Array(per_graph));
            }
            let text = to_json(&report);
            print!("{text}");
            if let Some(out) = out {
                ctx.write_text(out, &text)?;
            }
            ctx.finish()
        }
    }
}

fn part_name(p: Part) -> &'static str {
    match p {
        Part::Train => "train",
        Part::Val => "val",
        Part::SmallTest => "small_test",
        Part::LargeTest => "large_test",
    }
}

fn sizes_path_for(matrix: &Path) -> PathBuf {
    let mut s = matrix.as_os_str().to_owned();
    s.push(".sizes");
    PathBuf::from(s)
}

fn rand_from_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn summarize_reports(
    reports: &[&TrainReport],
) -> BTreeMap<&'static str, BTreeMap<&'static str, MeanStd>> {
    let mut out = BTreeMap::new();
    for name in SPLIT_NAMES {
        let pick = |r: &TrainReport| match name {
            "train" => r.f1.train,
            "val" => r.f1.val,
            "small_test" => r.f1.small_test,
            _ => r.f1.large_test,
        };
        let c1: Vec<f64> = reports.iter().map(|r| pick(r).f1_class1).collect();
        let mac: Vec<f64> = reports.iter().map(|r| pick(r).f1_macro).collect();
        let mut m = BTreeMap::new();
        m.insert("f1_class1", mean_std(&c1));
        m.insert("f1_macro", mean_std(&mac));
        out.insert(name, m);
    }
    out
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SPECSHIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "SPECSHIFT_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numeric => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(e) = configure_threads().and_then(|_| run(cli)) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(e.kind()));
    }
    ExitCode::SUCCESS
}
