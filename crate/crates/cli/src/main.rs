use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddminlp_core::dd::{build, make_partitions, CompiledConstraint, MergePolicy};
use ddminlp_core::expr::{parse, Model};
use ddminlp_core::report::RunReport;
use ddminlp_core::sbb::{solve_traced, Action, SolverConfig, Status};
use ddminlp_core::separation::CutMethod;

#[derive(Parser, Debug)]
#[command(name = "ddminlp", version, about = "Global MINLP solver with decision-diagram relaxations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve an instance and print a result table.
    Solve(SolveArgs),
    /// Print the decision diagram of one constraint over the root box.
    DumpDd(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Merge {
    F,
    G,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Separation {
    Subgradient,
    Exact,
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    gap: f64,
    #[arg(long, default_value_t = 5000.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long, default_value_t = 50)]
    partitions: usize,
    #[arg(long, default_value_t = 5000)]
    width: usize,
    #[arg(long, value_enum, default_value_t = Merge::G)]
    merge: Merge,
    #[arg(long, value_enum, default_value_t = Separation::Subgradient)]
    separation: Separation,
    /// Fall back to the exact separator when subgradient finds no cut.
    #[arg(long)]
    exact_fallback: bool,
    #[arg(long, default_value_t = 50)]
    sg_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    sg_step: f64,
    #[arg(long, default_value_t = 20)]
    cut_rounds: usize,
    /// One trace line per node on stderr.
    #[arg(long)]
    verbose: bool,
    /// Write every nonlinear constraint's root diagram to stderr first.
    #[arg(long)]
    dump_dd: bool,
    /// Accepted for scripting; the solver is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print key=value lines instead of the table.
    #[arg(long)]
    machine: bool,
}

#[derive(Args, Debug)]
struct DumpArgs {
    file: PathBuf,
    /// 1-based constraint index.
    #[arg(long, default_value_t = 1)]
    constraint: usize,
    #[arg(long, default_value_t = 5000)]
    width: usize,
    #[arg(long, default_value_t = 50)]
    partitions: usize,
    #[arg(long, value_enum, default_value_t = Merge::G)]
    merge: Merge,
}

impl From<Merge> for MergePolicy {
    fn from(m: Merge) -> Self {
        match m {
            Merge::F => MergePolicy::F,
            Merge::G => MergePolicy::G,
        }
    }
}

impl SolveArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            gap: self.gap,
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            partitions: self.partitions,
            width: self.width,
            merge: self.merge.into(),
            separation: match self.separation {
                Separation::Subgradient => CutMethod::Subgradient,
                Separation::Exact => CutMethod::Exact,
            },
            exact_fallback: self.exact_fallback,
            sg_iters: self.sg_iters,
            sg_step: self.sg_step,
            cut_rounds: self.cut_rounds,
            ..SolverConfig::default()
        }
    }
}

fn load(path: &Path) -> Result<Model, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn dump(m: &Model, k: usize, partitions: usize, width: usize, merge: MergePolicy) -> Result<String, String> {
    let c = m.constraints.get(k).ok_or_else(|| format!("no constraint {}", k + 1))?;
    let root = m.domain();
    let p = make_partitions(&root, &m.integer, partitions);
    let d = build(&CompiledConstraint::new(c, &root), &p, width, merge).map_err(|e| e.to_string())?;
    Ok(d.dump())
}

fn run_solve(a: &SolveArgs) -> Result<ExitCode, String> {
    let m = load(&a.file)?;
    let cfg = a.config();
    if a.dump_dd {
        for (k, c) in m.constraints.iter().enumerate() {
            if !c.is_linear() {
                eprintln!("# constraint {}", k + 1);
                eprint!("{}", dump(&m, k, cfg.partitions, cfg.width, cfg.merge)?);
            }
        }
    }
    let verbose = a.verbose;
    let r = solve_traced(&m, &cfg, |e| {
        if verbose {
            let action = match e.action {
                Action::Infeasible => "prune-infeasible".to_string(),
                Action::Bound => "prune-bound".to_string(),
                Action::Feasible => "prune-feasible".to_string(),
                Action::Branch(i) => format!("branch {}", m.names[i]),
                Action::Atomic => "atomic".to_string(),
            };
            eprintln!("node {} depth {} lp {:.6} cuts {} {}", e.node, e.depth, m.reported(e.lp_value), e.cuts_added, action);
        }
    })
    .map_err(|e| e.to_string())?;
    let rep = RunReport::new(&instance_name(&a.file), &m, &r);
    if a.machine {
        print!("{}", rep.machine(true));
    } else {
        print!("{}", RunReport::table(&[rep], true));
    }
    Ok(ExitCode::from(match r.status {
        Status::Optimal => 0,
        Status::Infeasible => 2,
        Status::TimeLimit | Status::NodeLimit => 3,
    }))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Solve(a) => run_solve(&a),
        Cmd::DumpDd(a) => {
            let m = load(&a.file)?;
            if a.constraint == 0 {
                return Err("constraint index is 1-based".into());
            }
            print!("{}", dump(&m, a.constraint - 1, a.partitions, a.width, a.merge.into())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
