//! Command-line front end for the `causabound` library.
//!
//! [`run`] takes the full argument vector and returns the process exit code:
//! 0 on success, 2 for malformed input, 3 when the inputs are well formed but
//! the requested quantity does not exist. Failures print one line to stderr
//! starting with `error:config:` or `error:infeasible:`.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use causabound::asymptotics::{limits, plan_single_observation, plan_single_observation_general, profile, profile_range, ObservationPlan};
use causabound::baselines::{covariate_construction, monotonicity_bound, CovariateKind};
use causabound::bounds::{evidence_bounds, simple_bounds, unobserved_bounds};
use causabound::extremal::{extremal_table, Extreme, Regime, Side};
use causabound::oracle::{markov_check, sharpness_check, simulate, SlackAssignment};
use causabound::{BoundsResult, Decomposition, EvidencePattern, TransitionMatrix};

use output::{profile_csv, short, sig9, table_csv, Band, Line, Plot};

pub const SEED_ENV: &str = "CAUSABOUND_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] causabound::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_infeasibility() => 3,
            _ => 2,
        }
    }

    /// The single-line message printed on failure.
    pub fn line(&self) -> String {
        let kind = if self.exit_code() == 3 { "infeasible" } else { "config" };
        format!("error:{kind}: {}", self.to_string().replace('\n', " "))
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "causabound", version, about = "Bounds on the probability of causation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simple, chain and evidence bounds for one case.
    #[command(args_override_self = true)]
    Bounds(BoundsArgs),
    /// Largest and smallest achievable bounds, with witnesses.
    #[command(args_override_self = true)]
    Extremal(TargetArgs),
    /// Homogeneous-chain bounds for n = 1..n-max, as CSV.
    #[command(args_override_self = true)]
    Profile(ProfileArgs),
    /// Limits of the homogeneous-chain bounds.
    #[command(args_override_self = true)]
    Limits(TargetArgs),
    /// Which single mediator to observe.
    #[command(args_override_self = true)]
    Plan(PlanArgs),
    /// Brute-force sharpness check and Monte Carlo simulation.
    #[command(args_override_self = true)]
    Oracle(OracleArgs),
    /// Bounds under different auxiliary information over a grid of laws.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Homogeneous-chain band plots, one CSV and SVG per rho.
    #[command(args_override_self = true)]
    Figures(FiguresArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct LawArgs {
    /// Effect `Pr(Y=1 | X<-1) - Pr(Y=1 | X<-0)`.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// `Pr(Y=1 | X<-1) - Pr(Y=0 | X<-0)`.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// `Pr(Y=1 | X<-0)`, with --p1 instead of --tau/--rho.
    #[arg(long)]
    p0: Option<f64>,
    /// `Pr(Y=1 | X<-1)`.
    #[arg(long)]
    p1: Option<f64>,
    /// A chain step `tau,rho`; repeat in order.
    #[arg(long = "step", value_name = "TAU,RHO", allow_hyphen_values = true)]
    steps: Vec<String>,
    /// Split the target law into this many identical steps.
    #[arg(long)]
    homogeneous: Option<u32>,
}

#[derive(Args, Debug)]
struct TargetArgs {
    #[command(flatten)]
    law: LawArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Observed exposure and outcome, e.g. `11`.
    #[arg(long, default_value = "11")]
    xy: String,
    /// Evidence pattern over X, the mediators and Y, e.g. `1?01`.
    #[arg(long)]
    evidence: Option<String>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 30)]
    n_max: u32,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Per-step effect of a homogeneous chain.
    #[arg(long, allow_hyphen_values = true)]
    step_tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    step_rho: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Check one pattern instead of all of them.
    #[arg(long)]
    evidence: Option<String>,
    /// Random interior slack assignments per pattern.
    #[arg(long, default_value_t = 1000)]
    interior: usize,
    /// Monte Carlo units; 0 skips the simulation.
    #[arg(long, default_value_t = 0)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    exposure_prob: f64,
    /// Explicit per-step slacks `xi1,xi2,...`.
    #[arg(long, value_delimiter = ',')]
    xi: Vec<f64>,
    /// Place every slack this fraction of the way through its range.
    #[arg(long, default_value_t = 0.5)]
    xi_frac: f64,
    #[arg(long, default_value_t = 0.01)]
    significance: f64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 0.8])]
    tau: Vec<f64>,
    /// Interior rho values per tau.
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct FiguresArgs {
    #[arg(long, default_value_t = 0.2)]
    tau: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6])]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    n_max: u32,
    #[arg(long, default_value = "figures")]
    out_dir: PathBuf,
}

/// Inputs shared by the subcommands once flags and config are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub law: TransitionMatrix,
    pub decomposition: Option<Decomposition>,
    pub evidence: Option<EvidencePattern>,
}

fn parse_step(s: &str) -> CliResult<TransitionMatrix> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::Config(format!("step `{s}` is not `tau,rho`")))?;
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("step `{s}`: `{x}` is not a number")))
    };
    Ok(TransitionMatrix::new(num(a)?, num(b)?)?)
}

impl RunConfig {
    fn resolve(law: &LawArgs, evidence: Option<&str>) -> CliResult<Self> {
        let target = match (law.tau, law.rho, law.p0, law.p1) {
            (None, None, None, None) => None,
            (Some(t), Some(r), None, None) => Some(TransitionMatrix::new(t, r)?),
            (None, None, Some(a), Some(b)) => Some(TransitionMatrix::from_conditionals(a, b)?),
            (Some(_), Some(_), _, _) | (_, _, Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give the target law either as --tau/--rho or as --p0/--p1, not both".into(),
                ))
            }
            _ => {
                return Err(CliError::Config(
                    "incomplete target law: need --tau with --rho, or --p0 with --p1".into(),
                ))
            }
        };
        let decomposition = match (law.steps.is_empty(), law.homogeneous) {
            (false, Some(_)) => {
                return Err(CliError::Config("--step and --homogeneous are exclusive".into()))
            }
            (false, None) => {
                let steps = law.steps.iter().map(|s| parse_step(s)).collect::<CliResult<Vec<_>>>()?;
                let d = Decomposition::new(steps)?;
                if let Some(t) = target {
                    let c = d.composed();
                    if (c.tau() - t.tau()).abs() > 1e-9 || (c.rho() - t.rho()).abs() > 1e-9 {
                        return Err(CliError::Config(format!("steps compose to {c}, not the target {t}")));
                    }
                }
                Some(d)
            }
            (true, Some(n)) => {
                let t = target.ok_or_else(|| CliError::Config("--homogeneous needs a target law".into()))?;
                Some(Decomposition::homogeneous_of(&t, n)?)
            }
            (true, None) => None,
        };
        let law = match (target, &decomposition) {
            (Some(t), _) => t,
            (None, Some(d)) => d.composed(),
            (None, None) => {
                return Err(CliError::Config("no law given: use --tau/--rho, --p0/--p1 or --step".into()))
            }
        };
        let evidence = evidence.map(|s| s.parse::<EvidencePattern>()).transpose()?;
        if let (Some(e), Some(d)) = (&evidence, &decomposition) {
            e.check_against(d)?;
        }
        Ok(Self { law, decomposition, evidence })
    }

    /// The decomposition, or the single-step chain of the law.
    fn chain(&self) -> Decomposition {
        self.decomposition.clone().unwrap_or_else(|| Decomposition::single(self.law))
    }
}

/// `--seed`, else `CAUSABOUND_SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn parse_xy(s: &str) -> CliResult<(bool, bool)> {
    match s {
        "00" => Ok((false, false)),
        "01" => Ok((false, true)),
        "10" => Ok((true, false)),
        "11" => Ok((true, true)),
        _ => Err(CliError::Config(format!("--xy must be one of 00, 01, 10, 11; got `{s}`"))),
    }
}

fn interval(b: &BoundsResult) -> String {
    let mark = if b.identified { "  identified" } else { "" };
    format!("[{}, {}]{mark}", short(b.lo), short(b.hi))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn describe_chain(d: &Decomposition) -> String {
    d.steps()
        .iter()
        .map(|s| format!("({}, {})", short(s.tau()), short(s.rho())))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::resolve(&a.law, a.evidence.as_deref())?;
    let (x, y) = parse_xy(&a.xy)?;
    let p = cfg.law;
    let xy = format!("x={} y={}", x as u8, y as u8);
    let mut lines = vec![format!("law        {p}")];
    lines.push(format!("simple     {xy}  {}", interval(&simple_bounds(&p, x, y)?)));
    if let Some(d) = &cfg.decomposition {
        lines.push(format!("chain      {}", describe_chain(d)));
        lines.push(format!("unobserved {xy}  {}", interval(&unobserved_bounds(d, x, y)?)));
    }
    if let Some(e) = &cfg.evidence {
        let d = cfg.chain();
        lines.push(format!("evidence   {e}  {}", interval(&evidence_bounds(&d, e)?)));
    }
    emit(out, &lines)
}

fn emit(out: &mut dyn Write, lines: &[String]) -> CliResult<()> {
    let mut text = lines.join("\n");
    text.push('\n');
    put(out, &text)
}

/// A closed pipe (`| head`) is not an error.
fn put(out: &mut dyn Write, text: &str) -> CliResult<()> {
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn cmd_extremal(a: &TargetArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::resolve(&a.law, None)?;
    let rep = extremal_table(&cfg.law)?;
    let mut lines = vec![format!("law {}", cfg.law), "cell     value        evidence  witness".to_string()];
    for c in &rep.cells {
        let star = if c.starred { "  (identified)" } else { "" };
        let kind = c.construction.map(|k| format!(" [{}]", k.name())).unwrap_or_default();
        lines.push(format!(
            "{:<8} {:<12} {:<9} {}{kind}{star}",
            c.label(),
            sig9(c.value),
            c.evidence.to_string(),
            describe_chain(&c.witness)
        ));
    }
    emit(out, &lines)
}

fn profile_plot(p: &TransitionMatrix, rows: &[causabound::asymptotics::ProfileRow]) -> Plot<'static> {
    let pts = |f: &dyn Fn(&causabound::asymptotics::ProfileRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).map(|v| (r.n as f64, v))).collect()
    };
    let n_max = rows.last().map_or(1, |r| r.n) as f64;
    Plot {
        title: format!("tau = {}, rho = {}", short(p.tau()), short(p.rho())),
        x_label: "n",
        x_range: (1.0, n_max.max(2.0)),
        bands: vec![
            Band { label: "unobserved", color: "blue", lower: pts(&|r| Some(r.u_lb)), upper: pts(&|r| Some(r.u_ub)) },
            Band { label: "observed at 1", color: "red", lower: pts(&|r| Some(r.o_lb)), upper: pts(&|r| Some(r.o_ub)) },
            Band { label: "alternating", color: "green", lower: pts(&|r| r.m_lb), upper: pts(&|r| r.m_ub) },
        ],
        lines: Vec::new(),
    }
}

fn cmd_profile(a: &ProfileArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::resolve(&a.law, None)?;
    if a.n_max == 0 {
        return Err(CliError::Config("--n-max must be at least 1".into()));
    }
    let prof = profile_range(&cfg.law, a.n_max)?;
    let csv = profile_csv(&prof.rows);
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => put(out, &csv)?,
    }
    if let Some(path) = &a.svg {
        write_file(path, &profile_plot(&cfg.law, &prof.rows).to_svg())?;
    }
    Ok(())
}

fn cmd_limits(a: &TargetArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::resolve(&a.law, None)?;
    let l = limits(&cfg.law)?;
    let o = |v: Option<f64>| v.map(sig9).unwrap_or_else(|| "undefined".into());
    let mut lines = vec![format!("law {}", cfg.law)];
    if l.degenerate {
        lines.push("degenerate: PC identified, mediators irrelevant".into());
    }
    lines.extend([
        format!("uLB_inf = {}", sig9(l.u_lb)),
        format!("uUB_inf = {}", sig9(l.u_ub)),
        format!("oLB_inf = {}", sig9(l.o_lb)),
        format!("oUB_inf = {}", sig9(l.o_ub)),
        format!("mLB_inf = {}", o(l.m_lb)),
        format!("mUB_inf = {}", o(l.m_ub)),
    ]);
    emit(out, &lines)
}

fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> CliResult<()> {
    let plan: ObservationPlan = match (a.step_tau, a.step_rho) {
        (Some(t), Some(r)) => {
            let n = a.n.ok_or_else(|| CliError::Config("--step-tau/--step-rho need --n".into()))?;
            let n32 = u32::try_from(n).map_err(|_| CliError::Config(format!("--n {n} too large")))?;
            let whole = TransitionMatrix::new(t, r)?.power(n32);
            plan_single_observation(&whole, n)?
        }
        (None, None) => {
            let cfg = RunConfig::resolve(&a.law, None)?;
            match (&cfg.decomposition, a.n) {
                (Some(d), None) => plan_single_observation_general(d)?,
                (None, Some(n)) => plan_single_observation(&cfg.law, n)?,
                (Some(_), Some(_)) => {
                    return Err(CliError::Config("--n conflicts with an explicit chain".into()))
                }
                (None, None) => return Err(CliError::Config("plan needs --n or a chain".into())),
            }
        }
        _ => return Err(CliError::Config("give both --step-tau and --step-rho".into())),
    };
    let best: Vec<String> = plan.best.iter().map(|k| k.to_string()).collect();
    let mut lines = vec![
        format!("# steps = {}", plan.n),
        format!("# no observation LB = {}", sig9(plan.baseline_lb)),
        format!("# best k = {}", best.join(" ")),
        "k,lb_if_one,posterior_one,expected_lb".to_string(),
    ];
    for r in &plan.rows {
        lines.push(format!("{},{},{},{}", r.k, sig9(r.lb_if_one), sig9(r.posterior_one), sig9(r.expected_lb)));
    }
    emit(out, &lines)
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::resolve(&a.law, a.evidence.as_deref())?;
    let seed = resolve_seed(a.seed)?;
    let d = cfg.chain();
    let patterns = match &cfg.evidence {
        Some(e) => vec![e.clone()],
        None => EvidencePattern::enumerate(d.len()),
    };
    let mut lines = vec![format!("chain {}", describe_chain(&d)), format!("seed {seed}")];
    let mut feasible = Vec::new();
    for e in &patterns {
        match sharpness_check(&d, e, a.interior, seed) {
            Ok(r) => {
                lines.push(format!(
                    "sharpness {e} {} endpoints [{}, {}] bounds {}",
                    if r.passed { "pass" } else { "FAIL" },
                    sig9(r.endpoint_min),
                    sig9(r.endpoint_max),
                    interval(&r.bounds)
                ));
                feasible.push((e.clone(), r.bounds));
            }
            Err(causabound::Error::NullEvent(_)) if cfg.evidence.is_none() => {
                lines.push(format!("sharpness {e} impossible"));
            }
            Err(err) => return Err(err.into()),
        }
    }
    if a.samples > 0 {
        let assign = if a.xi.is_empty() {
            if !(0.0..=1.0).contains(&a.xi_frac) {
                return Err(CliError::Config(format!("--xi-frac {} outside [0, 1]", a.xi_frac)));
            }
            SlackAssignment::interpolated(&d, &vec![a.xi_frac; d.len()])
        } else {
            SlackAssignment::new(&d, a.xi.clone())?
        };
        let sim = simulate(&d, &assign, a.samples, seed, a.exposure_prob)?;
        lines.push(format!("simulation samples={} exposure_prob={}", a.samples, short(a.exposure_prob)));
        if let Some(g) = sim.general_causation() {
            lines.push(format!(
                "general_causation est={} se={} prod_xi={} within_3se={}",
                sig9(g.value),
                sig9(g.standard_error),
                sig9(assign.composed()),
                g.within(assign.composed(), 3.0)
            ));
        }
        for (e, b) in &feasible {
            if let Some(pc) = sim.empirical_pc(e) {
                let inside = b.lo - 3.0 * pc.standard_error <= pc.value && pc.value <= b.hi + 3.0 * pc.standard_error;
                lines.push(format!(
                    "pc {e} est={} se={} n={} inside_bounds={inside}",
                    sig9(pc.value),
                    sig9(pc.standard_error),
                    pc.support
                ));
            }
        }
        let m = markov_check(&sim, a.significance)?;
        lines.push(format!("markov decision={:?}", m.decision).to_lowercase());
        for t in &m.nodes {
            lines.push(format!(
                "markov node={} statistic={} dof={} p={} sparse_rows={}",
                t.node,
                sig9(t.statistic),
                t.dof,
                t.p_value.map(sig9).unwrap_or_else(|| "none".into()),
                t.sparse_rows
            ));
        }
    }
    emit(out, &lines)
}

/// `points` interior values of rho for the given tau, symmetric about 0.
fn rho_grid(tau: f64, points: usize) -> Vec<f64> {
    let a = 1.0 - tau.abs();
    (1..=points).map(|j| a * (2.0 * j as f64 / (points + 1) as f64 - 1.0)).collect()
}

pub const COMPARE_HEADER: [&str; 12] = [
    "tau", "rho", "sLB", "sUB", "monotone", "hom2LB", "hom2UB", "homInfLB", "homInfUB", "best2UB", "best2LB",
    "covariate",
];

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.points == 0 {
        return Err(CliError::Config("--points must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut written = Vec::new();
    for &tau in &a.tau {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(CliError::Config(format!("compare needs tau in (0, 1), got {tau}")));
        }
        let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 10];
        for rho in rho_grid(tau, a.points) {
            let p = TransitionMatrix::new(tau, rho)?;
            let s = simple_bounds(&p, true, true)?;
            let mono = monotonicity_bound(&p)?.lo;
            let h2 = profile(&p, 2)?;
            let hi = limits(&p)?;
            let t = extremal_table(&p)?;
            let best_ub = t.value(Regime::AllPositive, Extreme::Smallest, Side::Upper);
            let best_lb = t.value(Regime::AllPositive, Extreme::Largest, Side::Lower);
            let cov = covariate_construction(&p, CovariateKind::UnobservedExtremal)?.headline_pc();
            let vals = [s.lo, s.hi, mono, h2.o_lb, h2.o_ub, hi.o_lb, hi.o_ub, best_ub, best_lb, cov];
            for (k, v) in vals.iter().enumerate() {
                series[k].push((rho, *v));
            }
            let mut row = vec![Some(tau), Some(rho)];
            row.extend(vals.iter().map(|&v| Some(v)));
            rows.push(row);
        }
        let lines = [
            ("simple", "black", 0, 1),
            ("homogeneous 2-step", "red", 3, 4),
            ("homogeneous limit", "orange", 5, 6),
        ];
        let mut plot = Plot {
            title: format!("tau = {}", short(tau)),
            x_label: "rho",
            x_range: (-(1.0 - tau), 1.0 - tau),
            bands: lines
                .iter()
                .map(|&(label, color, lo, hi)| Band { label, color, lower: series[lo].clone(), upper: series[hi].clone() })
                .collect(),
            lines: Vec::new(),
        };
        plot.lines.push(Line { label: "monotone", color: "purple", dashed: true, points: series[2].clone() });
        plot.lines.push(Line { label: "best 2-step UB", color: "teal", dashed: true, points: series[7].clone() });
        plot.lines.push(Line { label: "best 2-step LB", color: "teal", dashed: false, points: series[8].clone() });
        plot.lines.push(Line { label: "covariate", color: "gray", dashed: true, points: series[9].clone() });
        let svg = a.out_dir.join(format!("compare_tau_{}.svg", short(tau)));
        write_file(&svg, &plot.to_svg())?;
        written.push(svg);
    }
    let csv = a.out_dir.join("compare.csv");
    write_file(&csv, &table_csv(&COMPARE_HEADER, &rows))?;
    written.insert(0, csv);
    emit(out, &written.iter().map(|p| format!("wrote {}", p.display())).collect::<Vec<_>>())
}

/// File stem for one figure panel.
pub fn figure_stem(tau: f64, rho: f64) -> String {
    format!("bands_tau_{}_rho_{}", short(tau), short(rho))
}

fn cmd_figures(a: &FiguresArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.n_max < 2 {
        return Err(CliError::Config("--n-max must be at least 2".into()));
    }
    let mut written = Vec::new();
    for &rho in &a.rho {
        let p = TransitionMatrix::new(a.tau, rho)?;
        let prof = profile_range(&p, a.n_max)?;
        let stem = figure_stem(a.tau, rho);
        let csv = a.out_dir.join(format!("{stem}.csv"));
        let svg = a.out_dir.join(format!("{stem}.svg"));
        write_file(&csv, &profile_csv(&prof.rows))?;
        write_file(&svg, &profile_plot(&p, &prof.rows).to_svg())?;
        written.push(csv);
        written.push(svg);
    }
    emit(out, &written.iter().map(|p| format!("wrote {}", p.display())).collect::<Vec<_>>())
}

/// Runs the CLI with `argv` (program name first), writing results to `out`
/// and the error line, if any, to `err`. Returns the exit code.
pub fn run_with(argv: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = config::expand_config(argv).and_then(|argv| {
        let cli = match Cli::try_parse_from(argv) {
            Ok(c) => c,
            Err(e) if !e.use_stderr() => {
                let _ = write!(out, "{e}");
                return Ok(());
            }
            Err(e) => {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or("invalid arguments");
                return Err(CliError::Config(first.trim_start_matches("error: ").to_string()));
            }
        };
        match &cli.command {
            Command::Bounds(a) => cmd_bounds(a, out),
            Command::Extremal(a) => cmd_extremal(a, out),
            Command::Profile(a) => cmd_profile(a, out),
            Command::Limits(a) => cmd_limits(a, out),
            Command::Plan(a) => cmd_plan(a, out),
            Command::Oracle(a) => cmd_oracle(a, out),
            Command::Compare(a) => cmd_compare(a, out),
            Command::Figures(a) => cmd_figures(a, out),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_code()
        }
    }
}

pub fn run(argv: Vec<String>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
