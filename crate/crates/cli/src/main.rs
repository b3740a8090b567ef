use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use satnav_search::equilibrium::{self, sample_e_curve, sample_f_curve, solve_equilibrium_with};
use satnav_search::model::{single_searcher_optimal_trust, GameParams, TrustProfile};
use satnav_search::output::{self, Format, Record};
use satnav_search::simulator::{estimate_payoff, SimulationConfig, DEFAULT_MAX_TURNS};
use satnav_search::suite::{self, SuiteOptions};
use satnav_search::verifier::{best_response_scan, DEFAULT_R_STEPS};
use satnav_search::Error;

/// Solve, simulate and verify the competitive search game with a faulty pointer.
#[derive(Parser)]
#[command(name = "satnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium trust for one game.
    Solve {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = equilibrium::DEFAULT_Q_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Sample the equilibrium residual E(q) as CSV.
    CurveE {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q_min: f64,
        #[arg(long)]
        q_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Sample the reliability that makes q an equilibrium, F(q), as CSV.
    CurveF {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q_min: f64,
        #[arg(long)]
        q_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Equilibrium trust over a range of population sizes, as CSV.
    SweepN {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n_from: u64,
        #[arg(long)]
        n_to: u64,
        /// Use geometrically spaced n instead of every integer.
        #[arg(long)]
        log: bool,
        /// Number of geometric points with --log.
        #[arg(long, default_value_t = 60)]
        points: usize,
    },
    /// Equilibrium trust over a range of ray counts, as CSV.
    SweepK {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k_from: u64,
        #[arg(long)]
        k_to: u64,
    },
    /// Monte Carlo estimate of the focal searcher's payoff, as JSON.
    Simulate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        /// Trust used by the other n - 1 searchers.
        #[arg(long)]
        q: f64,
        /// Trust used by the focal searcher; defaults to q.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: u64,
    },
    /// Payoff of every focal trust on a grid against opponents at q. CSV on
    /// stdout, argmax summary on stderr.
    BestResponse {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = DEFAULT_R_STEPS)]
        steps: usize,
    },
    /// Run the acceptance criteria; exits 1 if any fails.
    Verify {
        /// Smaller Monte Carlo and oracle sample sizes.
        #[arg(long)]
        quick: bool,
    },
    /// Optimal trust for a lone searcher.
    SingleSearcher {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: u64,
    },
}

enum Failure {
    Invalid(Error),
    Verification,
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn geometric_range(from: u64, to: u64, points: usize) -> Vec<u64> {
    if points < 2 || from == to {
        return vec![from];
    }
    let (a, b) = ((from as f64).ln(), (to as f64).ln());
    let mut out: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(from, to))
        .collect();
    out.dedup();
    out
}

fn range(from: u64, to: u64, what: &str) -> Result<Vec<u64>, Error> {
    if from > to {
        return Err(Error::InvalidGrid(format!("{what}-from must not exceed {what}-to")));
    }
    Ok((from..=to).collect())
}

fn run(command: Command, out: &mut impl Write) -> Result<(), Failure> {
    match command {
        Command::Solve { n, k, p, tol, format } => {
            let params = GameParams::new(n, k, p)?;
            let solution = solve_equilibrium_with(&params, tol, equilibrium::DEFAULT_MAX_ITER)?;
            out.write_all(output::solution_record(&params, &solution).render(format.into()).as_bytes())?;
        }
        Command::CurveE { n, k, p, q_min, q_max, steps } => {
            let params = GameParams::new(n, k, p)?;
            out.write_all(output::curve_csv(&sample_e_curve(&params, q_min, q_max, steps)?).as_bytes())?;
        }
        Command::CurveF { n, k, q_min, q_max, steps } => {
            out.write_all(output::curve_csv(&sample_f_curve(n, k, q_min, q_max, steps)?).as_bytes())?;
        }
        Command::SweepN { k, p, n_from, n_to, log, points } => {
            let ns = if log {
                range(n_from, n_to, "n")?;
                geometric_range(n_from, n_to, points)
            } else {
                range(n_from, n_to, "n")?
            };
            out.write_all(output::curve_csv(&equilibrium::sweep_in_n(k, p, &ns)?).as_bytes())?;
        }
        Command::SweepK { n, p, k_from, k_to } => {
            let ks = range(k_from, k_to, "k")?;
            out.write_all(output::curve_csv(&equilibrium::sweep_in_k(n, p, &ks)?).as_bytes())?;
        }
        Command::Simulate { n, k, p, q, r, rounds, seed, max_turns } => {
            let profile = TrustProfile::new(q, r.unwrap_or(q))?;
            let config = SimulationConfig::with_max_turns(GameParams::new(n, k, p)?, profile, rounds, seed, max_turns)?;
            let report = estimate_payoff(&config);
            if let Some(warning) = report.warning() {
                eprintln!("warning: {warning}");
            }
            out.write_all(output::simulation_record(&config, &report).to_json().as_bytes())?;
        }
        Command::BestResponse { n, k, p, q, steps } => {
            let scan = best_response_scan(&GameParams::new(n, k, p)?, q, steps)?;
            out.write_all(output::scan_csv(&scan).as_bytes())?;
            eprint!("{}", output::scan_summary_record(&scan).to_json());
        }
        Command::Verify { quick } => {
            let outcomes = suite::run_all(SuiteOptions { quick });
            for outcome in &outcomes {
                writeln!(out, "{outcome}")?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            writeln!(out, "{} of {} criteria passed", outcomes.len() - failed, outcomes.len())?;
            if failed > 0 {
                return Err(Failure::Verification);
            }
        }
        Command::SingleSearcher { p, k } => {
            let q = single_searcher_optimal_trust(p, k)?;
            let record = Record::new().int("k", k).real("p", p).real("q_opt", q);
            out.write_all(record.to_json().as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::Io)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
