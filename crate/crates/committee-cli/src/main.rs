//! Command-line front end for the committee library: exact vote errors,
//! analytic bounds, the adaptive confidence gate, seeded simulation sweeps
//! and the optimality-gap search.
//!
//! Every subcommand emits CSV. The first line is a `# cmd:` comment holding
//! a canonical command line (seed included, `--out`/`--threads` excluded);
//! re-running that line reproduces the file byte for byte, so any output is
//! regenerable from its own header.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use committee::bounds::{adaptive_gate, BoundReport};
use committee::exact::exact_error;
use committee::registry::{RuleContext, RulePlan, RuleRegistry};
use committee::rules::AdaptiveFallback;
use committee::sim::gap::gap_search;
use committee::sim::{
    bayes_sweep, contrast_sweep, sweep, CompetenceSource, Estimator, SweepConfig, SweepRow,
};
use committee::{BetaPriorSet, Committee, CommitteeProfile, Error};

#[derive(Parser)]
#[command(
    name = "committee",
    version,
    about = "Weighted majority voting for expert committees: exact errors, bounds and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact error probability of one or more rules on a known committee.
    Exact(ExactArgs),
    /// Committee potential and the analytic error bounds built from it.
    Bounds(BoundsArgs),
    /// Adaptive confidence gate evaluated on observed track records.
    Gate(GateArgs),
    /// Estimated rule errors swept over a grid of history lengths.
    Simulate(SimulateArgs),
    /// Rule contrast on one committee found by the optimality-gap search.
    Figure1(Figure1Args),
    /// Rule contrast with competences redrawn from flat priors every trial.
    Figure2(Figure2Args),
    /// Search for the committee where the centered rule loses the most.
    Gap(GapArgs),
}

#[derive(Args)]
struct ExactArgs {
    /// Competences as comma-separated decimals strictly inside (0,1).
    #[arg(long)]
    p: String,
    /// Comma-separated rule names (opt, maj, lc, hc, adapt, bayes).
    #[arg(long, default_value = "opt")]
    rule: String,
    /// Track records as k/m pairs, e.g. 9/10,7/10,6/10.
    #[arg(long)]
    profile: Option<String>,
    /// Beta priors as a:b pairs, e.g. 1:1,1:1,1:1.
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Competences as comma-separated decimals strictly inside (0,1).
    #[arg(long)]
    p: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GateArgs {
    /// Track records as k/m pairs, e.g. 95/100,95/100.
    #[arg(long)]
    profile: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Fixed committee competences; mutually completes --prior.
    #[arg(long)]
    p: Option<String>,
    /// Beta priors as a:b pairs. Without --p the committee is redrawn from
    /// these priors every trial; with --p they only weight the Bayes rule.
    #[arg(long)]
    prior: Option<String>,
    /// Comma-separated rule names to score on shared draws.
    #[arg(long)]
    rule: String,
    /// History-length grid lo:hi[:step].
    #[arg(long = "m-grid", default_value = "1:100")]
    m_grid: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mc)]
    estimator: EstimatorArg,
    /// What the adaptive rule does when its gate fails.
    #[arg(long, value_enum, default_value_t = FallbackArg::Decline)]
    fallback: FallbackArg,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Figure1Args {
    #[arg(long = "m-grid", default_value = "1:100")]
    m_grid: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random restarts for the committee-regenerating gap search.
    #[arg(long, default_value_t = 200)]
    restarts: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Figure2Args {
    /// Committee size drawn fresh each trial.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long = "m-grid", default_value = "1:100")]
    m_grid: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    restarts: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    /// Sample one vote per trial and count mistakes.
    Mc,
    /// Average the exact conditional error given each trial's records.
    Rb,
}

impl EstimatorArg {
    fn to_sim(self) -> Estimator {
        match self {
            EstimatorArg::Mc => Estimator::MonteCarlo,
            EstimatorArg::Rb => Estimator::RaoBlackwell,
        }
    }

    fn canonical(self) -> &'static str {
        match self {
            EstimatorArg::Mc => "mc",
            EstimatorArg::Rb => "rb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FallbackArg {
    /// Abstain, which always scores as an error.
    Decline,
    /// Fall back to the centered rule's weights.
    Lc,
}

impl FallbackArg {
    fn to_sim(self) -> AdaptiveFallback {
        match self {
            FallbackArg::Decline => AdaptiveFallback::Decline,
            FallbackArg::Lc => AdaptiveFallback::LowConfidence,
        }
    }

    fn canonical(self) -> &'static str {
        match self {
            FallbackArg::Decline => "decline",
            FallbackArg::Lc => "lc",
        }
    }
}

/// Anything that can stop a subcommand: a domain error from the library or
/// a malformed flag value caught while parsing.
#[derive(Debug)]
enum CliError {
    Domain(Error),
    Input(String),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Domain(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(err) => err.fmt(f),
            CliError::Input(msg) => msg.fmt(f),
        }
    }
}

impl CliError {
    /// Capacity problems exit 3; every other rejected input exits 2.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(Error::EnumerationCap { .. }) => 3,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Exact(args) => run_exact(args),
        Command::Bounds(args) => run_bounds(args),
        Command::Gate(args) => run_gate(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Figure1(args) => run_figure1(args),
        Command::Figure2(args) => run_figure2(args),
        Command::Gap(args) => run_gap(args),
    }
}

fn run_exact(args: ExactArgs) -> Result<(), CliError> {
    let committee = parse_committee(&args.p)?;
    let profile = args.profile.as_deref().map(parse_profile).transpose()?;
    let priors = args.prior.as_deref().map(parse_priors).transpose()?;
    let names = parse_rules(&args.rule)?;
    let registry = RuleRegistry::standard();
    let rules = registry.resolve(&names).map_err(Error::from)?;
    let ctx = RuleContext {
        committee: Some(&committee),
        profile: profile.as_ref(),
        priors: priors.as_ref(),
    };
    let mut rows = Vec::new();
    for rule in rules {
        // A declined plan abstains on every vote, hence errs with
        // certainty; reporting 1.0 keeps one row per requested rule.
        let error = match rule.plan(&ctx)? {
            RulePlan::Weights(w) => exact_error(&committee, &w)?.value(),
            RulePlan::Declined => 1.0,
        };
        rows.push(format!("{},{}", rule.name(), sci(error)));
    }
    let mut cmd = format!(
        "committee exact --p {} --rule {}",
        join_probs(committee.competences()),
        names.join(",")
    );
    if let Some(profile) = &profile {
        let _ = write!(cmd, " --profile {}", join_profile(profile));
    }
    if let Some(priors) = &priors {
        let _ = write!(cmd, " --prior {}", join_priors(priors));
    }
    emit(
        args.out.as_ref(),
        &csv_document(&cmd, &[], "rule,error", &rows),
    )
}

fn run_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let committee = parse_committee(&args.p)?;
    let report = BoundReport::for_committee(&committee);
    let row = format!(
        "{},{},{},{},{}",
        sci(report.phi),
        sci(report.upper),
        sci(report.lower),
        sci(report.hoeffding.expect("committee-built report")),
        sci(report.lc_bound.expect("committee-built report")),
    );
    let cmd = format!(
        "committee bounds --p {}",
        join_probs(committee.competences())
    );
    emit(
        args.out.as_ref(),
        &csv_document(&cmd, &[], "phi,upper,lower,hoeffding,lc_bound", &[row]),
    )
}

fn run_gate(args: GateArgs) -> Result<(), CliError> {
    let profile = parse_profile(&args.profile)?;
    let report = adaptive_gate(&profile)?;
    let row = format!(
        "{},{},{}",
        sci(report.delta),
        sci(report.gate_value),
        report.holds
    );
    let cmd = format!("committee gate --profile {}", join_profile(&profile));
    emit(
        args.out.as_ref(),
        &csv_document(&cmd, &[], "delta,gate_value,holds", &[row]),
    )
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let committee = args.p.as_deref().map(parse_committee).transpose()?;
    let priors = args.prior.as_deref().map(parse_priors).transpose()?;
    let source = match (&committee, &priors) {
        (Some(c), _) => CompetenceSource::Fixed(c.clone()),
        (None, Some(p)) => CompetenceSource::BetaDraw(p.clone()),
        (None, None) => {
            return Err(CliError::Input(
                "provide --p for a fixed committee or --prior to draw one".into(),
            ))
        }
    };
    let grid = parse_m_grid(&args.m_grid)?;
    let rules = parse_rules(&args.rule)?;
    let rows = sweep(&SweepConfig {
        source,
        m_grid: grid_values(grid),
        trials: args.trials,
        seed: args.seed,
        rules: rules.clone(),
        priors: priors.clone(),
        fallback: args.fallback.to_sim(),
        estimator: args.estimator.to_sim(),
        threads: args.threads,
    })?;
    let mut cmd = String::from("committee simulate");
    if let Some(c) = &committee {
        let _ = write!(cmd, " --p {}", join_probs(c.competences()));
    }
    if let Some(p) = &priors {
        let _ = write!(cmd, " --prior {}", join_priors(p));
    }
    let _ = write!(
        cmd,
        " --rule {} --m-grid {} --trials {} --seed {} --estimator {} --fallback {}",
        rules.join(","),
        canonical_grid(grid),
        args.trials,
        args.seed,
        args.estimator.canonical(),
        args.fallback.canonical()
    );
    emit(args.out.as_ref(), &sweep_csv(&cmd, &[], &rows))
}

fn run_figure1(args: Figure1Args) -> Result<(), CliError> {
    let grid = parse_m_grid(&args.m_grid)?;
    let found = gap_search(5, args.restarts, args.seed)?;
    let rows = contrast_sweep(
        &found.committee,
        &grid_values(grid),
        args.trials,
        args.seed,
        args.threads,
    )?;
    let cmd = format!(
        "committee figure1 --m-grid {} --trials {} --seed {} --restarts {}",
        canonical_grid(grid),
        args.trials,
        args.seed,
        args.restarts
    );
    let comments = vec![
        format!("p: {}", join_probs(found.committee.competences())),
        format!("gap: {}", sci(found.gap)),
    ];
    emit(args.out.as_ref(), &sweep_csv(&cmd, &comments, &rows))
}

fn run_figure2(args: Figure2Args) -> Result<(), CliError> {
    let grid = parse_m_grid(&args.m_grid)?;
    let rows = bayes_sweep(
        args.n,
        &grid_values(grid),
        args.trials,
        args.seed,
        args.threads,
    )?;
    let cmd = format!(
        "committee figure2 --n {} --m-grid {} --trials {} --seed {}",
        args.n,
        canonical_grid(grid),
        args.trials,
        args.seed
    );
    emit(args.out.as_ref(), &sweep_csv(&cmd, &[], &rows))
}

fn run_gap(args: GapArgs) -> Result<(), CliError> {
    let found = gap_search(args.n, args.restarts, args.seed)?;
    let best = found
        .committee
        .competences()
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let row = format!("{},{},{}", args.n, sci(found.gap), best);
    let cmd = format!(
        "committee gap --n {} --restarts {} --seed {}",
        args.n, args.restarts, args.seed
    );
    emit(args.out.as_ref(), &csv_document(&cmd, &[], "n,gap,p", &[row]))
}

/// Twelve significant digits, scientific notation; fixed width keeps files
/// diff-able and byte-stable across runs.
fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_document(cmd: &str, comments: &[String], header: &str, rows: &[String]) -> String {
    let mut doc = String::new();
    let _ = writeln!(doc, "# cmd: {cmd}");
    for comment in comments {
        let _ = writeln!(doc, "# {comment}");
    }
    let _ = writeln!(doc, "{header}");
    for row in rows {
        let _ = writeln!(doc, "{row}");
    }
    doc
}

fn sweep_csv(cmd: &str, comments: &[String], rows: &[SweepRow]) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|row| {
            format!(
                "{},{},{},{}",
                row.m,
                row.rule,
                sci(row.estimate.value()),
                sci(row.estimate.stderr().unwrap_or(0.0))
            )
        })
        .collect();
    csv_document(cmd, comments, "m,rule,error,stderr", &body)
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|err| CliError::Input(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_committee(raw: &str) -> Result<Committee, CliError> {
    let mut competences = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let p: f64 = token
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse probability {token:?}")))?;
        competences.push(p);
    }
    Ok(Committee::new(competences)?)
}

/// Track records arrive as `k/m` pairs: successes first, then queries.
fn parse_profile(raw: &str) -> Result<CommitteeProfile, CliError> {
    let mut pairs = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let (successes, queries) = token.split_once('/').ok_or_else(|| {
            CliError::Input(format!("profile entry {token:?} must look like k/m"))
        })?;
        let k: u64 = successes
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse success count {successes:?}")))?;
        let m: u64 = queries
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse query count {queries:?}")))?;
        pairs.push((m, k));
    }
    Ok(CommitteeProfile::new(pairs)?)
}

fn parse_priors(raw: &str) -> Result<BetaPriorSet, CliError> {
    let mut params = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let (alpha, beta) = token
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("prior {token:?} must look like alpha:beta")))?;
        let a: f64 = alpha
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse prior parameter {alpha:?}")))?;
        let b: f64 = beta
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse prior parameter {beta:?}")))?;
        params.push((a, b));
    }
    Ok(BetaPriorSet::new(params)?)
}

fn parse_rules(raw: &str) -> Result<Vec<String>, CliError> {
    let rules: Vec<String> = raw
        .split(',')
        .map(|token| token.trim().to_string())
        .filter(|token| !token.is_empty())
        .collect();
    if rules.is_empty() {
        return Err(CliError::Input("no rules selected".into()));
    }
    Ok(rules)
}

/// History grids are `lo:hi[:step]`, inclusive on both ends.
fn parse_m_grid(raw: &str) -> Result<(u64, u64, u64), CliError> {
    let bad = || CliError::Input(format!("m-grid {raw:?} must look like lo:hi or lo:hi:step"));
    let mut parts = raw.split(':');
    let lo: u64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let hi: u64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let step: u64 = match parts.next() {
        Some(step) => step.parse().map_err(|_| bad())?,
        None => 1,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    if step == 0 {
        return Err(CliError::Input("m-grid step must be at least 1".into()));
    }
    if lo > hi {
        return Err(CliError::Input(format!(
            "m-grid lower end {lo} exceeds upper end {hi}"
        )));
    }
    Ok((lo, hi, step))
}

fn grid_values((lo, hi, step): (u64, u64, u64)) -> Vec<u64> {
    (lo..=hi).step_by(step as usize).collect()
}

fn canonical_grid((lo, hi, step): (u64, u64, u64)) -> String {
    format!("{lo}:{hi}:{step}")
}

fn join_probs(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn join_profile(profile: &CommitteeProfile) -> String {
    profile
        .records()
        .iter()
        .map(|r| format!("{}/{}", r.successes, r.queries))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_priors(priors: &BetaPriorSet) -> String {
    priors
        .params()
        .iter()
        .map(|(a, b)| format!("{a}:{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn committee_parsing_round_trips_values() {
        let c = parse_committee("0.80, 0.7,0.6").unwrap();
        assert_eq!(c.competences(), &[0.8, 0.7, 0.6]);
        assert_eq!(join_probs(c.competences()), "0.8,0.7,0.6");
        assert!(matches!(
            parse_committee("0.8,zero"),
            Err(CliError::Input(_))
        ));
        let err = parse_committee("1.2,0.5").unwrap_err();
        assert!(err.to_string().contains("1.2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn profile_pairs_put_successes_before_queries() {
        let p = parse_profile("9/10,7/10").unwrap();
        assert_eq!(p.records()[0].queries, 10);
        assert_eq!(p.records()[0].successes, 9);
        assert_eq!(join_profile(&p), "9/10,7/10");
        assert!(matches!(parse_profile("9-10"), Err(CliError::Input(_))));
        let err = parse_profile("11/10").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn priors_parse_as_alpha_beta_pairs() {
        let priors = parse_priors("1:1, 8:2").unwrap();
        assert_eq!(priors.params(), &[(1.0, 1.0), (8.0, 2.0)]);
        assert_eq!(join_priors(&priors), "1:1,8:2");
        assert!(matches!(parse_priors("1;1"), Err(CliError::Input(_))));
        assert!(matches!(parse_priors("0:1"), Err(CliError::Domain(_))));
    }

    #[test]
    fn m_grid_parses_and_canonicalizes() {
        assert_eq!(parse_m_grid("1:100").unwrap(), (1, 100, 1));
        assert_eq!(parse_m_grid("2:10:4").unwrap(), (2, 10, 4));
        assert_eq!(grid_values((2, 10, 4)), vec![2, 6, 10]);
        assert_eq!(canonical_grid((1, 100, 1)), "1:100:1");
        assert!(parse_m_grid("5:1").is_err());
        assert!(parse_m_grid("1:10:0").is_err());
        assert!(parse_m_grid("1").is_err());
        assert!(parse_m_grid("1:2:3:4").is_err());
    }

    #[test]
    fn rule_lists_split_on_commas() {
        assert_eq!(parse_rules("opt, maj").unwrap(), vec!["opt", "maj"]);
        assert!(parse_rules(" ,").is_err());
    }

    #[test]
    fn capacity_errors_exit_three() {
        let err = CliError::from(Error::EnumerationCap { n: 25, cap: 24 });
        assert_eq!(err.exit_code(), 3);
        let err = CliError::from(Error::EmptyCommittee);
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn scientific_format_has_twelve_significant_digits() {
        assert_eq!(sci(0.2), "2.00000000000e-1");
        assert_eq!(sci(1.0), "1.00000000000e0");
        assert_eq!(sci(0.0), "0.00000000000e0");
        assert_eq!(sci(0.6258943912242243), "6.25894391224e-1");
    }
}
