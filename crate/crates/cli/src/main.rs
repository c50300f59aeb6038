//! `positional`: simulate, batch-verify, solve, play and replay positional games.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use positional::engine::{verify, BoardKind, GameConfig, InvariantLog, Side, Transcript, Verdict};
use positional::graph::Edge;
use positional::harness::{self, BatchJob, GameResult};
use positional::solver::{solve_tau, SolveLimits, ToyGame};
use positional::strategy::{Strategy, StrategyFailure, Turn};
use positional::winset::{round_bound, BoundError, Family};

const EXIT_CONTRACT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_STRATEGY: u8 = 3;
const EXIT_CORRUPT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "positional",
    version,
    about = "Fast Maker strategies for (a:a) positional games on graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one game and print a summary line.
    Simulate(SimulateArgs),
    /// Run a seeded sweep of games and print CSV.
    Batch(BatchArgs),
    /// Exact game value on a tiny board.
    Solve(SolveArgs),
    /// Play Breaker (or Blue) against a strategy at the terminal.
    Play(PlayArgs),
    /// Re-validate a transcript and print its invariant report.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Game {
    Pm,
    Ham,
    Pkf,
    Skf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoardArg {
    Kn,
    Bip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum First {
    Maker,
    Breaker,
}

#[derive(Args, Clone)]
struct GameArgs {
    #[arg(long, value_enum)]
    game: Game,
    #[arg(long)]
    n: usize,
    /// Component size for pkf/skf.
    #[arg(long)]
    k: Option<usize>,
    /// Maker's bias.
    #[arg(long)]
    a: usize,
    /// Breaker's bias (defaults to a).
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value = "auto")]
    maker: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Strong game: Red (the Maker seat) moves first and both sides can win.
    #[arg(long)]
    strong: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value = "random")]
    breaker: String,
    /// Write the transcript JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, value_enum)]
    game: Game,
    /// LO:HI:STEP, inclusive.
    #[arg(long)]
    n_range: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    a_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "random")]
    breakers: Vec<String>,
    #[arg(long, default_value = "auto")]
    maker: String,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    strong: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "kn")]
    board: BoardArg,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    game: Game,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, value_enum, default_value = "breaker")]
    first: First,
    #[arg(long, default_value_t = SolveLimits::default().max_edges)]
    max_edges: usize,
    #[arg(long, default_value_t = SolveLimits::default().max_states)]
    max_states: usize,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    path: PathBuf,
}

/// Failure carrying the exit code to report.
struct Fail(u8, String);

impl From<BoundError> for Fail {
    fn from(e: BoundError) -> Self {
        Fail(EXIT_USAGE, e.to_string())
    }
}

fn family(game: Game, k: Option<usize>) -> Result<Family, Fail> {
    let need_k = || {
        k.ok_or_else(|| {
            Fail(
                EXIT_USAGE,
                format!("--k is required for {game:?}").to_lowercase(),
            )
        })
    };
    Ok(match game {
        Game::Pm => Family::PerfectMatching,
        Game::Ham => Family::Hamilton,
        Game::Pkf => Family::PathFactor(need_k()?),
        Game::Skf => Family::StarFactor(need_k()?),
    })
}

/// Builds and checks a game configuration, rejecting n below the validity floor.
fn config(
    family: Family,
    n: usize,
    a: usize,
    b: usize,
    seed: u64,
    strong: bool,
) -> Result<GameConfig, Fail> {
    let cfg = config_any_n(family.clone(), n, a, b, seed, strong)?;
    round_bound(&family, a, n)?;
    Ok(cfg)
}

fn config_any_n(
    family: Family,
    n: usize,
    a: usize,
    b: usize,
    seed: u64,
    strong: bool,
) -> Result<GameConfig, Fail> {
    let cfg = if strong {
        GameConfig::strong(family.clone(), n, a, b, seed)
    } else {
        GameConfig::maker_breaker(family.clone(), n, a, b, seed)
    };
    cfg.validate()
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    Ok(cfg)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Fail> {
    fs::write(path, text)
        .map_err(|e| Fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn winner_str(r: &GameResult) -> String {
    r.transcript.winner.map_or("none".into(), |w| w.to_string())
}

fn bound_str(r: &GameResult) -> String {
    r.bound.map_or("none".into(), |b| b.to_string())
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Fail> {
    let g = &args.game;
    let fam = family(g.game, g.k)?;
    let cfg = config(fam, g.n, g.a, g.b.unwrap_or(g.a), g.seed, g.strong)?;
    let result =
        harness::run_named(cfg, &g.maker, &args.breaker).map_err(|e| Fail(EXIT_USAGE, e))?;
    if let Some(path) = &args.out {
        write_file(path, &result.transcript.to_json())?;
    }
    println!(
        "winner={} maker_moves={} bound={} invariants={}",
        winner_str(&result),
        result.transcript.maker_moves_used,
        bound_str(&result),
        pass_str(result.invariants_passed())
    );
    if let Some(err) = &result.error {
        return Err(Fail(EXIT_STRATEGY, err.clone()));
    }
    if !result.within_bound() || !result.invariants_passed() {
        return Err(Fail(
            EXIT_CONTRACT,
            "the strategy's contract was not met".into(),
        ));
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<usize>, Fail> {
    let bad = || Fail(EXIT_USAGE, format!("--n-range wants LO:HI:STEP, got {s:?}"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (lo, hi, step) = match parts[..] {
        [lo, hi] => (lo, hi, 1),
        [lo, hi, step] if step > 0 => (lo, hi, step),
        _ => return Err(bad()),
    };
    Ok((lo..=hi).step_by(step).collect())
}

fn batch(args: BatchArgs) -> Result<(), Fail> {
    let ns = parse_range(&args.n_range)?;
    if ns.is_empty() {
        return Err(Fail(EXIT_USAGE, "empty --n-range".into()));
    }
    if args.a_list.is_empty() || args.breakers.is_empty() || args.runs == 0 {
        return Err(Fail(
            EXIT_USAGE,
            "--a-list, --breakers and --runs must be non-empty".into(),
        ));
    }
    let fam = family(args.game, args.k)?;
    let mut jobs = Vec::new();
    for &n in &ns {
        for &a in &args.a_list {
            if let Err(Fail(_, why)) = config(fam.clone(), n, a, a, 0, args.strong) {
                eprintln!("skipping n={n} a={a}: {why}");
                continue;
            }
            for (bi, breaker) in args.breakers.iter().enumerate() {
                for run in 0..args.runs {
                    let seed =
                        harness::derive_seed(args.seed, &[n as u64, a as u64, bi as u64, run]);
                    let config = config(fam.clone(), n, a, a, seed, args.strong)?;
                    jobs.push(BatchJob {
                        config,
                        maker: args.maker.clone(),
                        breaker: breaker.clone(),
                    });
                }
            }
        }
    }
    if jobs.is_empty() {
        return Err(Fail(EXIT_USAGE, "no valid (n, a) pair in the sweep".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    let results = pool.install(|| harness::run_batch(&jobs));
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "game",
        "n",
        "k",
        "a",
        "breaker",
        "seed",
        "winner",
        "maker_moves",
        "bound",
        "within_bound",
        "invariants",
    ];
    w.write_record(header)
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    let mut within = 0;
    for (job, res) in jobs.iter().zip(results) {
        let r = res.map_err(|e| Fail(EXIT_USAGE, e))?;
        within += r.within_bound() as usize;
        let c = &job.config;
        let record = [
            c.family.tag().to_string(),
            c.n.to_string(),
            c.family.k().map_or(String::new(), |k| k.to_string()),
            c.a.to_string(),
            job.breaker.clone(),
            c.seed.to_string(),
            winner_str(&r),
            r.transcript.maker_moves_used.to_string(),
            bound_str(&r),
            r.within_bound().to_string(),
            pass_str(r.invariants_passed()).to_string(),
        ];
        w.write_record(&record)
            .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    let total = jobs.len();
    eprintln!(
        "within_bound {within}/{total} ({:.1}%)",
        100.0 * within as f64 / total as f64
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), Fail> {
    let fam = family(args.game, args.k)?;
    let limits = SolveLimits {
        max_edges: args.max_edges,
        max_states: args.max_states,
    };
    let kind = match args.board {
        BoardArg::Kn => BoardKind::Complete,
        BoardArg::Bip => BoardKind::Bipartite,
    };
    let game = ToyGame::on(kind, args.n, &fam, args.a, args.b, limits)
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    let first = match args.first {
        First::Maker => Side::Maker,
        First::Breaker => Side::Breaker,
    };
    let tau = solve_tau(&game, first, limits).map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    println!("tau={tau}");
    Ok(())
}

/// Reads the opponent's edges from a line-based input, re-prompting on bad input.
struct Human<R: BufRead + Send> {
    input: R,
}

fn parse_edge(s: &str) -> Option<Edge> {
    let (u, v) = s.trim().split_once('-')?;
    let (u, v) = (u.trim().parse().ok()?, v.trim().parse().ok()?);
    (u != v).then(|| Edge::new(u, v))
}

impl<R: BufRead + Send> Strategy for Human<R> {
    fn name(&self) -> &str {
        "human"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let board = turn.board();
        let last: Vec<String> = turn.opponent_last().iter().map(|e| e.to_string()).collect();
        println!(
            "opponent played: {}",
            if last.is_empty() {
                "-".into()
            } else {
                last.join(" ")
            }
        );
        let mut out: Vec<Edge> = Vec::new();
        while out.len() < turn.steps {
            print!("edge {}/{} (u-v): ", out.len() + 1, turn.steps);
            io::stdout().flush().ok();
            let mut line = String::new();
            let read = self
                .input
                .read_line(&mut line)
                .map_err(|e| StrategyFailure::new("human", e.to_string()))?;
            if read == 0 {
                return Err(StrategyFailure::new("human", "input closed"));
            }
            match parse_edge(&line) {
                Some(e) if board.in_range(e) && board.is_free(e.u, e.v) && !out.contains(&e) => {
                    out.push(e)
                }
                Some(e) => println!("edge {e} is not free, try again"),
                None => println!("expected two vertices like 3-7, try again"),
            }
        }
        Ok(out)
    }
}

fn play_cmd(args: PlayArgs) -> Result<(), Fail> {
    let g = &args.game;
    let fam = family(g.game, g.k)?;
    // small boards are fine for interactive play
    let cfg = config_any_n(fam, g.n, g.a, g.b.unwrap_or(g.a), g.seed, g.strong)?;
    println!("vertices 0..{}; you play {} edges per move", g.n - 1, cfg.b);
    let mut maker = harness::maker_by_name(&g.maker, &cfg)
        .ok_or_else(|| Fail(EXIT_USAGE, format!("unknown maker {:?}", g.maker)))?;
    let mut human = Human {
        input: io::BufReader::new(io::stdin()),
    };
    let result = harness::run_game(cfg, maker.as_mut(), &mut human);
    if let Some(path) = &args.out {
        write_file(path, &result.transcript.to_json())?;
    }
    println!(
        "winner={} maker_moves={}",
        winner_str(&result),
        result.transcript.maker_moves_used
    );
    match result.error {
        Some(e) => Err(Fail(EXIT_STRATEGY, e)),
        None => Ok(()),
    }
}

fn replay_cmd(args: ReplayArgs) -> Result<(), Fail> {
    let text = fs::read_to_string(&args.path).map_err(|e| {
        Fail(
            EXIT_USAGE,
            format!("cannot read {}: {e}", args.path.display()),
        )
    })?;
    let t = Transcript::from_json(&text).map_err(|e| Fail(EXIT_CORRUPT, e.to_string()))?;
    let state = verify(&t).map_err(|e| Fail(EXIT_CORRUPT, e.to_string()))?;
    println!(
        "winner={} maker_moves={} moves={}",
        state.finished.map_or("none".into(), |w| w.to_string()),
        state.maker_moves,
        t.moves.len()
    );
    for (name, verdict) in &t.invariant_report {
        println!("{name}: {}", pass_str(*verdict == Verdict::Pass));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    let out = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Batch(a) => batch(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Play(a) => play_cmd(a),
        Cmd::Replay(a) => replay_cmd(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
