use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;

use coset_game::bound::{format_significant, rate_envelope, to_decimal, upper_bound};
use coset_game::cosets::encoder_circuit;
use coset_game::f2::{BitMat, Subspace};
use coset_game::game::{exact_value, monte_carlo, MAX_ENUM_M, MAX_SIM_M};
use coset_game::strategy::{win_probability_formula, LocalizedForm};
use coset_game::verify::run_checks;

const THREADS_VAR: &str = "COSET_GAME_THREADS";
const DIGITS: usize = 6;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "coset-game",
    version,
    about = "Coset-guessing game simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of the exact upper bound for m = 1..=m_max.
    Bound {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
        m_max: u64,
    },
    /// Exact game value by enumeration, compared with the bound.
    Exact {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_ENUM_M as u64))]
        m: u64,
    },
    /// Seeded Monte Carlo play; prints one CSV row.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_SIM_M as u64))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Report on one subspace given by generator rows, e.g. "101001,011101,000010".
    Subspace {
        #[arg(long)]
        matrix: String,
    },
    /// Run every invariant check at size m.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_ENUM_M as u64))]
        m: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match cli.command {
        Command::Bound { m_max } => cmd_bound(m_max as usize),
        Command::Exact { m } => cmd_exact(m as usize),
        Command::Simulate { m, rounds, seed } => cmd_simulate(m as usize, rounds, seed),
        Command::Subspace { matrix } => cmd_subspace(&matrix),
        Command::Verify { m } => cmd_verify(m as usize),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn cmd_bound(m_max: usize) -> ExitCode {
    println!("m,bound,decimal,envelope");
    let mut all_ok = true;
    for m in 1..=m_max {
        let b = upper_bound(m);
        let (lo, hi) = rate_envelope(m);
        let ok = lo <= b && b <= hi;
        all_ok &= ok;
        println!(
            "{m},{b},{},{}",
            to_decimal(&b, DIGITS),
            if ok { "ok" } else { "FAIL" }
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn cmd_exact(m: usize) -> ExitCode {
    let value = match exact_value(m) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let bound = upper_bound(m);
    if value == bound {
        println!("{value} TIGHT");
        ExitCode::SUCCESS
    } else {
        println!("{value} NOT TIGHT (bound {bound})");
        ExitCode::from(EXIT_FAIL)
    }
}

fn cmd_simulate(m: usize, rounds: u64, seed: u64) -> ExitCode {
    let stats = match monte_carlo(m, rounds, seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    println!("m,rounds,seed,joint_wins,bob_wins,charlie_wins,joint_rate,bob_rate,charlie_rate");
    println!(
        "{},{},{},{},{},{},{},{},{}",
        stats.m,
        stats.rounds,
        stats.seed,
        stats.joint_wins,
        stats.bob_wins,
        stats.charlie_wins,
        format_significant(stats.joint_rate(), DIGITS),
        format_significant(stats.bob_rate(), DIGITS),
        format_significant(stats.charlie_rate(), DIGITS),
    );
    ExitCode::SUCCESS
}

fn index_set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn pair_list(v: &[(usize, usize)]) -> String {
    if v.is_empty() {
        return "none".to_string();
    }
    let items: Vec<String> = v
        .iter()
        .map(|(a, b)| format!("({},{})", a + 1, b + 1))
        .collect();
    items.join(" ")
}

fn indented(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let _ = writeln!(out, "  {line}");
    }
    if out.is_empty() {
        out.push_str("  (empty)\n");
    }
    out
}

fn subspace_report(w: &Subspace) -> String {
    let reps = w.coset_reps();
    let lf = LocalizedForm::new(w);
    let p = win_probability_formula(w);
    let mut out = String::new();
    let _ = writeln!(out, "m: {}", w.half());
    let _ = writeln!(out, "rref: {}", w.generator());
    let _ = writeln!(out, "I: {}", index_set(w.pivots()));
    let _ = writeln!(out, "J: {}", index_set(w.non_pivots()));
    let _ = writeln!(out, "CS(W) coordinates: {}", index_set(&reps.x_coords));
    let _ = writeln!(out, "CS(W_perp) coordinates: {}", index_set(&reps.z_coords));
    let _ = write!(
        out,
        "encoder circuit:\n{}",
        indented(&encoder_circuit(w).to_string())
    );
    let _ = write!(
        out,
        "bob circuit:\n{}",
        indented(&lf.bob_circuit().to_string())
    );
    let _ = write!(
        out,
        "charlie circuit:\n{}",
        indented(&lf.charlie_circuit().to_string())
    );
    let _ = writeln!(out, "bell pairs: {}", lf.num_bell_pairs());
    let _ = writeln!(out, "residual pairs: {}", pair_list(lf.residual_pairs()));
    let _ = writeln!(out, "h pairing: {}", pair_list(lf.pairing()));
    let _ = writeln!(
        out,
        "win probability: {p} ({})",
        format_significant(p.to_f64().unwrap_or(f64::NAN), DIGITS)
    );
    out
}

fn cmd_subspace(text: &str) -> ExitCode {
    let parsed = text
        .parse::<BitMat>()
        .and_then(|g| Subspace::half_dimensional(&g));
    match parsed {
        Ok(w) => {
            print!("{}", subspace_report(&w));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn cmd_verify(m: usize) -> ExitCode {
    let checks = match run_checks(m) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {failed} failed", checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
