use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lqsplit::bench::{self, SweepConfig};
use lqsplit::config::{Problem, ProblemFile};
use lqsplit::output::write_trajectory;
use lqsplit_core::games::{solve_game_with, solve_zero_sum};
use lqsplit_core::pipeline::{solve, Method};
use lqsplit_core::riccati::BackwardMethod;
use lqsplit_core::splitting::order4_composition_alphas;
use lqsplit_core::{
    build_pollution, GameProblem, Matrix, PollutionConfig, RiccatiSystem, TimeMatrix, Trajectory,
};

#[derive(Parser)]
#[command(
    name = "lqsplit",
    version,
    about = "Splitting integrators for LQ control and LQ games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem described by a TOML file.
    Solve(SolveArgs),
    /// Solve one of the built-in pollution games.
    Game(GameArgs),
    /// Run a method × resolution sweep and write the work–precision CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MethodArgs {
    /// sp1, sp2, sp4, sp6, s2c4, ni42, ni84, rk4 or dopri.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Tolerance exponent `i` for dopri: AbsTol = 1e-i, RelTol = 1e(1-i).
    #[arg(long, default_value_t = 10)]
    tol_exponent: i32,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Trajectory CSV.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GameArgs {
    /// fig1, fig2, fig3a or fig3b.
    #[arg(long)]
    preset: String,
    #[command(flatten)]
    method: MethodArgs,
    /// Keep only the first N players of the preset.
    #[arg(long)]
    players: Option<usize>,
    /// Two-player zero-sum variant; the method must be s2 or s2c4.
    #[arg(long)]
    zero_sum: bool,
    /// Cross weight `R_12 = R_21` (discounted like the own weights).
    #[arg(long, default_value_t = 100.0)]
    cross_weight: f64,
    /// Base steps of the zero-sum backward pass.
    #[arg(long, default_value_t = 16)]
    backward_steps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    preset: Option<String>,
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "sp2,sp4,sp6,rk4")]
    methods: Vec<String>,
    /// Step sizes such as 1/4,1/8 (default 1/4 … 1/256).
    #[arg(long, value_delimiter = ',')]
    h_ladder: Vec<String>,
    /// Tolerance exponents for dopri (default 4 … 12).
    #[arg(long, value_delimiter = ',')]
    tol_exponents: Vec<i32>,
    #[arg(long, default_value_t = 100)]
    reference_factor: usize,
    /// Record wall-clock seconds; without it the column is zero so that
    /// reruns are byte-identical.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    output: PathBuf,
}

fn method_for<S: RiccatiSystem>(sys: &S, args: &MethodArgs) -> anyhow::Result<Method> {
    if args.method == "dopri" {
        return Ok(Method::dopri(args.tol_exponent));
    }
    let dominant = if sys.is_autonomous() {
        Some(sys.drift(sys.t0())?)
    } else {
        None
    };
    Ok(Method::from_name(&args.method, dominant)?)
}

fn report(tr: &Trajectory, terminal: &[Matrix], output: Option<&PathBuf>) -> anyhow::Result<()> {
    let first = &tr.samples[0];
    println!("method        {}", tr.method);
    println!("evaluations   {}", tr.evaluations);
    if tr.backward_steps > 0 {
        println!("backward cf4  {} steps", tr.backward_steps);
    }
    println!("x(T)          {:?}", tr.final_state());
    for (i, p) in first.gains.iter().enumerate() {
        println!("P{}(t0)        {:?}", i + 1, p.as_slice());
    }
    println!("|P(T) - Q_T|  {:e}", tr.terminal_gain_defect(terminal));
    println!("min eig P     {:e}", tr.min_path_eigenvalue());
    if let Some(path) = output {
        write_trajectory(tr, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_solve(args: SolveArgs) -> anyhow::Result<()> {
    let file = ProblemFile::load(&args.problem)?;
    match file.build()? {
        Problem::Game(g) => {
            let tr = solve_game_with(&g, &method_for(&g, &args.method)?, args.method.steps)?;
            report(&tr, &g.terminal_gains(), args.output.as_ref())
        }
        Problem::Lq(p) => {
            let m = method_for(&p, &args.method)?;
            let tr = solve(&p, &m, args.method.steps, BackwardMethod::default_for(&p))?;
            report(&tr, &p.terminal_gains(), args.output.as_ref())
        }
    }
}

fn preset(name: &str, players: Option<usize>) -> anyhow::Result<PollutionConfig> {
    let mut cfg =
        PollutionConfig::preset(name).with_context(|| format!("unknown preset `{name}`"))?;
    if let Some(2) = players {
        // A one-player preset plays against a copy of itself.
        if cfg.players() == 1 {
            cfg.c.push(cfg.c[0]);
            cfg.d.push(cfg.d[0]);
        }
    }
    if let Some(n) = players {
        if n == 0 || n > cfg.players() {
            bail!(
                "preset {name} has {} players; cannot keep {n}",
                cfg.players()
            );
        }
        cfg.c.truncate(n);
        cfg.d.truncate(n);
    }
    Ok(cfg)
}

fn run_game(args: GameArgs) -> anyhow::Result<()> {
    let players = if args.zero_sum {
        Some(args.players.unwrap_or(2))
    } else {
        args.players
    };
    let cfg = preset(&args.preset, players)?;
    let game = build_pollution(&cfg)?;
    if !args.zero_sum {
        let tr = solve_game_with(&game, &method_for(&game, &args.method)?, args.method.steps)?;
        return report(&tr, &game.terminal_gains(), args.output.as_ref());
    }
    let alphas = match args.method.method.as_str() {
        "s2" => vec![1.0],
        "s2c4" => order4_composition_alphas(),
        other => bail!("zero-sum games are solved with s2 or s2c4, not `{other}`"),
    };
    let (w, rho) = (args.cross_weight, cfg.rho);
    let cross = || {
        if rho == 0.0 {
            TimeMatrix::constant(Matrix::scalar(w))
        } else {
            TimeMatrix::scalar_fn(move |t| w * (-rho * t).exp())
        }
    };
    let game: GameProblem = game.with_zero_sum(cross(), cross())?;
    let tr = solve_zero_sum(&game, args.backward_steps, &alphas, args.method.steps)?;
    report(&tr, &game.terminal_gains(), args.output.as_ref())
}

fn run_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let game = match (&args.preset, &args.problem) {
        (Some(p), _) => build_pollution(&preset(p, None)?)?,
        (None, Some(path)) => match ProblemFile::load(path)?.build()? {
            Problem::Game(g) => g,
            Problem::Lq(_) => bail!("sweeps run on pollution games"),
        },
        (None, None) => unreachable!("clap requires one of --preset and --problem"),
    };
    let span = game.t_final() - game.t0();
    let mut config = SweepConfig {
        methods: args.methods,
        timing: args.timing,
        reference_factor: args.reference_factor,
        ..SweepConfig::default()
    };
    if !args.h_ladder.is_empty() {
        config.steps = bench::parse_h_ladder(&args.h_ladder, span)?;
    }
    if !args.tol_exponents.is_empty() {
        config.tol_exponents = args.tol_exponents;
    }
    let sweep = bench::run_sweep(&game, &config)?;
    eprintln!(
        "reference: cf4 at {} steps (difference to {} steps {:e})",
        sweep.reference.steps,
        2 * sweep.reference.steps,
        sweep.reference.difference
    );
    for r in &sweep.rows {
        match &r.failure {
            None => eprintln!(
                "{:>6} {:>10.3e} evals {:>7} err {:.3e} defect {:.3e}{}",
                r.method,
                r.resolution_value,
                r.evaluations,
                r.x_error,
                r.gain_defect,
                if r.positivity_flag {
                    " POSITIVITY LOST"
                } else {
                    ""
                }
            ),
            Some(e) => eprintln!("{:>6} {:>10.3e} failed: {e}", r.method, r.resolution_value),
        }
    }
    bench::emit_csv(&sweep.rows, &args.output)?;
    println!(
        "wrote {} rows to {}",
        sweep.rows.len(),
        args.output.display()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => run_solve(a),
        Command::Game(a) => run_game(a),
        Command::Sweep(a) => run_sweep(a),
    }
}
