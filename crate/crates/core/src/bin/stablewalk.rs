//! Thin batch driver over the library: one subcommand per task, JSON
//! config in, CSV artifacts plus a manifest out. The `examples/` directory
//! is the narrative interface; this binary exists for scripted runs.

use clap::{Parser, Subcommand, ValueEnum};
use stablewalk::boundary::{classify, Boundary, ClassifyMode, HIndexSource, ALL_TESTS};
use stablewalk::config::{
    error_json, kernel_csv, renewal_csv, survival_csv, vg_csv, whbound_csv, ExperimentConfig,
    Manifest,
};
use stablewalk::htransform::{importance_survival, ConditionedKernel};
use stablewalk::increments::IncrementModel;
use stablewalk::ladder::{estimate_renewal_h, simulate_ladder, HFun, DEFAULT_LADDER_HORIZON};
use stablewalk::oracle::{dp_survival, exact_h_for};
use stablewalk::passage::{estimate_v, ratio_curve, survival_curve, PassageKind, VgVariant};
use stablewalk::rng::RngStream;
use stablewalk::whbound::bound_check;
use stablewalk::{Error, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "stablewalk", version, about = "boundary-crossing experiments for asymptotically stable random walks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Sub,
    Super,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw increments from the configured model.
    Sample {
        #[arg(long, default_value_t = 1000)]
        count: u64,
    },
    /// Simulate strict descending ladder pairs (tau, chi).
    Ladder {
        #[arg(long, default_value_t = 1000)]
        count: u64,
    },
    /// Monte Carlo renewal function h on an integer grid.
    Renewal {
        #[arg(long, default_value_t = 100)]
        x_max: u64,
    },
    /// Monte Carlo survival curve of the boundary passage time T_g.
    Passage,
    /// Exact DP survival curve (lattice models).
    Oracle,
    /// DP ratio P(T_g > n) / P(T_0 > n).
    Ratio,
    /// Trace of E[h(S_n + g(n)); T_g > n] (sub) or the shrinking-target
    /// mirror (super).
    Vg {
        #[arg(long, value_enum, default_value = "sub")]
        variant: VariantArg,
    },
    /// Run all four boundary integral tests.
    Tests,
    /// Doob h-transform kernel rows and the importance-sampling estimate.
    Htransform {
        #[arg(long, default_value_t = 50)]
        rows: u64,
    },
    /// The factorization upper bound q_n and the R(1) sandwich.
    Whbound,
    /// Summarize manifests from finished runs.
    Report {
        dirs: Vec<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            println!("{}", error_json(&e));
            let code = match e {
                Error::InvalidConfig(_)
                | Error::InvalidModel(_)
                | Error::InvalidBoundary(_)
                | Error::Inadmissible { .. }
                | Error::Precondition(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    model: IncrementModel,
    seed: u64,
    out: PathBuf,
}

impl Ctx {
    fn boundary(&self) -> Result<&Boundary> {
        self.cfg
            .boundary
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("this task needs a boundary".into()))
    }

    fn stream(&self, id: u64) -> RngStream {
        RngStream::new(self.seed, id)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.out.join(name), text)?;
        Ok(())
    }
}

fn load(cli: &Cli) -> Result<Ctx> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required for this task".into()))?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let model = cfg.model.build()?;
    std::fs::create_dir_all(&cli.out)?;
    Ok(Ctx {
        seed: cfg.seed,
        model,
        cfg,
        out: cli.out.clone(),
    })
}

fn run(cli: &Cli) -> Result<()> {
    if let Cmd::Report { dirs } = &cli.cmd {
        return report(dirs);
    }
    let started = Instant::now();
    let ctx = load(cli)?;
    let name = match &cli.cmd {
        Cmd::Sample { count } => {
            let mut rng = ctx.stream(0).rng();
            let mut csv = String::from("i,x\n");
            for i in 0..*count {
                csv.push_str(&format!("{i},{}\n", ctx.model.sample(&mut rng)));
            }
            ctx.write("samples.csv", &csv)?;
            "sample"
        }
        Cmd::Ladder { count } => {
            let mut rng = ctx.stream(1).rng();
            let mut csv = String::from("tau,chi,censored\n");
            for _ in 0..*count {
                let rec = simulate_ladder(&ctx.model, DEFAULT_LADDER_HORIZON, &mut rng);
                csv.push_str(&format!(
                    "{},{},{}\n",
                    rec.tau,
                    rec.chi.map(|c| c.to_string()).unwrap_or_default(),
                    rec.is_censored()
                ));
            }
            ctx.write("ladder.csv", &csv)?;
            "ladder"
        }
        Cmd::Renewal { x_max } => {
            let grid: Vec<f64> = (0..=*x_max).map(|x| x as f64).collect();
            let t = estimate_renewal_h(
                &ctx.model,
                &grid,
                ctx.cfg.n_paths,
                DEFAULT_LADDER_HORIZON,
                ctx.stream(2),
            )?;
            ctx.write("renewal.csv", &renewal_csv(&t))?;
            "renewal"
        }
        Cmd::Passage => {
            let curve = survival_curve(
                &ctx.model,
                ctx.boundary()?,
                PassageKind::LowerCurve,
                &ctx.cfg.grid(),
                ctx.cfg.n_paths,
                ctx.stream(3),
            )?;
            ctx.write("curve.csv", &survival_csv(&curve))?;
            "passage"
        }
        Cmd::Oracle => {
            let l = ctx.model.require_lattice()?;
            let curve = dp_survival(l, ctx.boundary()?, PassageKind::LowerCurve, ctx.cfg.horizon)?;
            ctx.write("curve.csv", &survival_csv(&curve))?;
            "oracle"
        }
        Cmd::Ratio => {
            let l = ctx.model.require_lattice()?;
            let num = dp_survival(l, ctx.boundary()?, PassageKind::LowerCurve, ctx.cfg.horizon)?;
            let den = dp_survival(l, &Boundary::zero(), PassageKind::ConstantZero, ctx.cfg.horizon)?;
            let r = ratio_curve(&num, &den, false)?;
            let mut csv = String::from("n,ratio,stderr\n");
            for i in 0..r.n.len() {
                csv.push_str(&format!("{},{},{}\n", r.n[i], r.ratio[i], r.stderr[i]));
            }
            ctx.write("ratio.csv", &csv)?;
            "ratio"
        }
        Cmd::Vg { variant } => {
            let g = ctx.boundary()?;
            let l = ctx.model.require_lattice()?;
            let reach = ctx.cfg.horizon * l.max_step().max(1) as u64
                + g.eval(ctx.cfg.horizon)?.ceil() as u64
                + 2;
            let h = exact_h_for(l, reach)?;
            let hf = HFun::from_exact(&h, ctx.model.h_index()?);
            let variant = match variant {
                VariantArg::Sub => VgVariant::Sub,
                VariantArg::Super => VgVariant::Super,
            };
            let trace = estimate_v(
                &ctx.model,
                g,
                variant,
                &hf,
                &ctx.cfg.grid(),
                ctx.cfg.n_paths,
                ctx.stream(4),
            )?;
            ctx.write("vg.csv", &vg_csv(&trace))?;
            "vg"
        }
        Cmd::Tests => {
            let g = ctx.boundary()?;
            let mut verdicts = Vec::new();
            for test in ALL_TESTS {
                let v = classify(
                    test,
                    g,
                    &ctx.model,
                    HIndexSource::ModelExponent,
                    ClassifyMode::Symbolic,
                )
                .or_else(|_| {
                    classify(
                        test,
                        g,
                        &ctx.model,
                        HIndexSource::ModelExponent,
                        ClassifyMode::Numeric { x_hi: 1e8 },
                    )
                })?;
                println!("{:?}: {:?}", test, v.verdict);
                verdicts.push(v);
            }
            ctx.write("verdicts.json", &serde_json::to_string_pretty(&verdicts)?)?;
            "tests"
        }
        Cmd::Htransform { rows } => {
            let l = ctx.model.require_lattice()?;
            let reach = ctx.cfg.horizon * l.max_step().max(1) as u64 + 2;
            let h = exact_h_for(l, reach)?;
            let kernel = ConditionedKernel::new(&ctx.model, &h)?;
            let mut triples = Vec::new();
            for x in 0..=(*rows).min(kernel.x_max()) {
                for (y, p) in kernel.row(x)? {
                    triples.push((x, y, p));
                }
            }
            ctx.write("kernel.csv", &kernel_csv(&triples))?;
            let est = importance_survival(
                &kernel,
                ctx.cfg.boundary.as_ref(),
                ctx.cfg.horizon,
                ctx.cfg.n_paths,
                ctx.stream(5),
            )?;
            ctx.write("importance.json", &serde_json::to_string_pretty(&est)?)?;
            "htransform"
        }
        Cmd::Whbound => {
            let l = ctx.model.require_lattice()?;
            let n_max = ctx.cfg.horizon.min(512);
            let report = bound_check(l, ctx.boundary()?, n_max)?;
            ctx.write("whbound.csv", &whbound_csv(&report))?;
            let summary = serde_json::json!({
                "violations": report.violations,
                "max_sandwich_ratio": report.max_sandwich_ratio,
                "r1_value": report.r1.value,
                "r1_upper": report.r1.upper,
                "r1_divergent": report.r1.divergent,
            });
            ctx.write("summary.json", &summary.to_string())?;
            "whbound"
        }
        Cmd::Report { .. } => unreachable!(),
    };
    Manifest {
        command: name.to_string(),
        config: serde_json::to_value(&ctx.cfg)?,
        seed: ctx.seed,
        workers: rayon::current_num_threads(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    }
    .write(&ctx.out)?;
    Ok(())
}

fn report(dirs: &[PathBuf]) -> Result<()> {
    for dir in dirs {
        let m: Manifest =
            serde_json::from_str(&std::fs::read_to_string(Path::new(dir).join("manifest.json"))?)?;
        println!(
            "{}: command={} seed={} workers={} version={} wall={:.2}s",
            dir.display(),
            m.command,
            m.seed,
            m.workers,
            m.version,
            m.wall_time_secs
        );
    }
    Ok(())
}
