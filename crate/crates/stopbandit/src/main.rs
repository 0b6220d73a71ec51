use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stopbandit::adversarial::{pandora_demo, prophet_demo};
use stopbandit::experiment::write_snapshots;
use stopbandit::instance::{read_instance, AnyInstance};
use stopbandit::sweep::powers_of_two;
use stopbandit::{run_experiment, sweep_and_fit, ExperimentConfig, InstanceSource, Policy, Problem};
use stopbandit_core::doubling::Constants;
use stopbandit_core::environments::FeedbackModel;
use stopbandit_core::oracle::{pandora_utility, prophet_opt, weitzman};
use stopbandit_core::pandora_learner::SearchMode;

#[derive(Parser)]
#[command(name = "stopbandit", version, about = "Bandit prophet and Pandora learners under value-only feedback")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the prophet learner (or a baseline) and write a regret trace.
    RunProphet(RunArgs),
    /// Run the Pandora learner (or a baseline) and write a regret trace.
    RunPandora(PandoraArgs),
    /// Print optimal values, thresholds and reservation values.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Fit the regret growth exponent over a range of horizons.
    Sweep(SweepArgs),
    /// Hindsight threshold versus learner on an adversarial sequence.
    AdversarialDemo {
        #[arg(long, value_enum, default_value_t = Game::Prophet)]
        game: Game,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 0.01)]
        bias: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Game {
    Prophet,
    Pandora,
}

#[derive(Clone, Copy, ValueEnum)]
enum Feedback {
    Prefix,
    Index,
    Value,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Learner,
    Optimal,
    Fixed,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant preset: desk or paper.
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long)]
    c_init: Option<f64>,
    #[arg(long)]
    c_explore: Option<f64>,
    #[arg(long, value_enum, default_value_t = Feedback::Value)]
    feedback: Feedback,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Baseline::Learner)]
    policy: Baseline,
    /// Thresholds for `--policy fixed`, separated by `;`.
    #[arg(long)]
    thresholds: Option<String>,
    /// Trace CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory used when `--out` is absent.
    #[arg(long, env = "STOPBANDIT_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PandoraArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Two boxes only: keep box 0 first and learn the second threshold.
    #[arg(long)]
    fixed_order: bool,
    /// Inspection order for `--policy fixed`, separated by `;`.
    #[arg(long)]
    order: Option<String>,
    /// JSONL file for per-phase group snapshots.
    #[arg(long)]
    snapshots: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    problem: Game,
    #[arg(long)]
    instance: PathBuf,
    /// Smallest horizon exponent (base 2).
    #[arg(long, default_value_t = 10)]
    min_exp: u32,
    #[arg(long, default_value_t = 17)]
    max_exp: u32,
    #[arg(long, default_value_t = 20)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    fixed_order: bool,
    /// Table CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn numbers<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(';')
        .map(|x| x.trim().parse::<T>().map_err(|_| anyhow::anyhow!("cannot parse {x:?}")))
        .collect()
}

fn constants(preset: &str, c_init: Option<f64>, c_explore: Option<f64>) -> Result<Constants> {
    let mut c = Constants::preset(preset).with_context(|| format!("unknown preset {preset:?}"))?;
    if let Some(x) = c_init {
        c.c_init = x;
    }
    if let Some(x) = c_explore {
        c.c_explore = x;
    }
    Ok(c)
}

fn config(problem: Problem, a: &RunArgs, name: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(problem, InstanceSource::File(a.instance.clone()), a.horizon, a.seed);
    cfg.constants = constants(&a.preset, a.c_init, a.c_explore)?;
    cfg.preset = Some(a.preset.clone());
    cfg.feedback = match a.feedback {
        Feedback::Prefix => FeedbackModel::Prefix,
        Feedback::Index => FeedbackModel::IndexValue,
        Feedback::Value => FeedbackModel::ValueOnly,
    };
    cfg.alpha = a.alpha;
    cfg.policy = match a.policy {
        Baseline::Learner => Policy::Learner,
        Baseline::Optimal => Policy::Optimal,
        Baseline::Fixed => {
            let th = a.thresholds.as_deref().context("--policy fixed needs --thresholds")?;
            Policy::Fixed { thresholds: numbers(th)?, order: None }
        }
    };
    cfg.out = a.out.clone().or_else(|| a.out_dir.as_ref().map(|d| d.join(format!("{name}-{}.csv", a.seed))));
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn execute(cfg: &ExperimentConfig) -> Result<()> {
    let e = run_experiment(cfg)?;
    let t = &e.trace;
    println!("rounds         {}", t.rounds);
    println!("benchmark      {}", t.best);
    println!("mean reward    {}", t.mean_reward());
    println!("cum regret     {}", t.cum_regret);
    if let Some(r) = &e.report {
        println!("phases         {}", r.phases.len());
        println!("truncated      {}", r.truncated);
        println!("tail rounds    {}", r.tail_rounds);
    }
    if let Some(s) = e.snapshots.last() {
        println!("final bounds   {:?}", s.intervals);
        if !s.edges.is_empty() {
            println!("constraints    {:?}", s.edges);
        }
    }
    if let Some(p) = &cfg.out {
        let mut w = create(p)?;
        t.write_csv(&mut w)?;
        w.flush()?;
        println!("trace          {}", p.display());
    }
    if let Some(p) = &cfg.snapshots {
        let mut w = create(p)?;
        write_snapshots(&mut w, &e.snapshots)?;
        w.flush()?;
    }
    Ok(())
}

fn oracle(path: &Path) -> Result<()> {
    match read_instance(path)? {
        AnyInstance::Prophet(inst) => {
            let opt = prophet_opt(&inst);
            println!("game        prophet");
            println!("opt         {:?}", opt.opt_values);
            println!("thresholds  {:?}", opt.opt_thresholds);
        }
        AnyInstance::Pandora(inst) => {
            let w = weitzman(&inst)?;
            println!("game        pandora");
            println!("sigma       {:?}", w.sigmas);
            println!("order       {:?}", w.order);
            println!("utility     {}", pandora_utility(&inst, &w.action())?);
        }
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    if a.min_exp >= a.max_exp || a.max_exp > 40 {
        bail!("need min-exp < max-exp <= 40");
    }
    let problem = match a.problem {
        Game::Prophet => Problem::Prophet,
        Game::Pandora => Problem::Pandora,
    };
    let mut cfg = ExperimentConfig::new(problem, InstanceSource::File(a.instance.clone()), 1, a.seed);
    cfg.constants = constants(&a.preset, None, None)?;
    cfg.preset = Some(a.preset.clone());
    cfg.alpha = a.alpha;
    cfg.fixed_order = a.fixed_order;
    cfg.replicates = a.replicates;
    let res = sweep_and_fit(&cfg, &powers_of_two(a.min_exp, a.max_exp))?;
    println!("{:>10} {:>14} {:>12} {:>9}", "T", "mean_regret", "std_error", "truncated");
    for r in &res.rows {
        println!("{:>10} {:>14.4} {:>12.4} {:>9}", r.horizon, r.mean_regret, r.std_error, r.truncated);
    }
    println!("slope {:.4}  intercept {:.4}{}", res.fit.slope, res.fit.intercept, if res.fit.offset { "  (offset +1)" } else { "" });
    if let Some(p) = &a.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        for r in &res.rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::RunProphet(a) => execute(&config(Problem::Prophet, &a, "prophet")?),
        Cmd::RunPandora(p) => {
            let mut cfg = config(Problem::Pandora, &p.run, "pandora")?;
            cfg.mode = match p.mode {
                Mode::Exact => SearchMode::Exact,
                Mode::Approx => SearchMode::Approx,
            };
            cfg.fixed_order = p.fixed_order;
            cfg.snapshots = p.snapshots.clone();
            if let (Policy::Fixed { order, .. }, Some(o)) = (&mut cfg.policy, &p.order) {
                *order = Some(numbers(o)?);
            }
            execute(&cfg)
        }
        Cmd::Oracle { instance } => oracle(&instance),
        Cmd::Sweep(a) => sweep(&a),
        Cmd::AdversarialDemo { game, horizon, bias, seed } => {
            let out = match game {
                Game::Prophet => prophet_demo(horizon, bias, seed, Constants::DESK)?,
                Game::Pandora => pandora_demo(horizon, bias, seed, Constants::DESK)?,
            };
            println!("hindsight threshold  {}", out.hindsight_threshold);
            println!("hindsight mean       {:.4}", out.hindsight_mean);
            println!("learner mean         {:.4}", out.learner_mean);
            Ok(())
        }
    }
}
