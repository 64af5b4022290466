//! Command-line front end: file ingestion, built-in scenarios and report output.
//!
//! [`run`] returns the exit code together with everything meant for standard
//! output, so the binary is a thin wrapper and tests can drive it in-process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use signal_trees::boxes::{
    is_exchangeable, is_extendable, is_no_signaling, EmpiricalModel, FeasibilityVerdict, NoSignalingReport, Witness,
};
use signal_trees::fixtures::{
    self, builtin_scenario, optimum_summary, run_demo, DemoReport, Expectation, ManifestEntry, ScenarioParams,
    SummaryTable,
};
use signal_trees::play::{backward_induction_optimum, decision_matrix, optimal_pure_payoff, DecisionMatrix};
use signal_trees::policy::{classical_exchangeable_optimum, optimize_policy, Binding, PolicyError, SignalScenario};
use signal_trees::quantum::hardy_instance;
use signal_trees::symbolic::render;
use signal_trees::tree::{has_perfect_recall, is_kuhn, validate_tree, DecisionTree};
use signal_trees::{Error, PlayError, DEFAULT_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sigtrees", version, about = "Decision trees against Nature with signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Numerical tolerance for probabilities and payoff comparisons.
    #[arg(long, global = true, default_value_t = signal_trees::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Small payoff of the four-context fixtures.
    #[arg(long = "m", global = true, default_value_t = 1.0)]
    m: f64,
    /// Penalty of the four-context fixtures.
    #[arg(long = "M", global = true, default_value_t = 2.0)]
    big_m: f64,
    /// Seed for randomized fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validity, Kuhn condition, perfect recall, decision matrix and pure optimum.
    Analyze { tree: PathBuf },
    /// No-signaling and extendability verdict for an empirical model.
    Box { model: PathBuf },
    /// Best signal-contingent policy for a tree and a model.
    Solve {
        tree: PathBuf,
        #[arg(long = "box")]
        model: PathBuf,
        /// Require exchangeable per-visit sites and compare with the classical exchangeable optimum.
        #[arg(long)]
        exchangeable: bool,
    },
    /// Run a built-in scenario and check it against its manifest.
    Demo {
        scenario: String,
        /// JSON list of manifest entries replacing the built-in expectations.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Recompute the summary of optima per tree class.
    Table1,
    /// Write a built-in tree or model as JSON.
    Export { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub valid: bool,
    pub violations: Vec<String>,
    pub kuhn: bool,
    /// Information set crossed twice on some play, if any.
    pub repeated_set: Option<String>,
    pub perfect_recall: bool,
    pub matrix: DecisionMatrix,
    pub pure_optimum: f64,
    pub optimal_strategies: Vec<String>,
    /// Present for Kuhn trees with perfect recall.
    pub backward_induction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    pub sites: Vec<String>,
    pub contexts: Vec<String>,
    pub no_signaling: NoSignalingReport,
    pub extendable: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeableCheck {
    pub info_set: String,
    pub exchangeable: bool,
    pub classical_optimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub pure_optimum: f64,
    pub value: f64,
    pub display: String,
    pub policies: Vec<String>,
    pub evaluated: usize,
    /// Information sets given a one-letter silent site because the model skips them.
    pub silent_sets: Vec<String>,
    pub exchangeable: Vec<ExchangeableCheck>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Play(PlayError::TooMany { .. }) | Error::Policy(PolicyError::TooMany { .. }) => EXIT_FAILURE,
            Error::Box(signal_trees::boxes::BoxError::TooLarge { .. }) => EXIT_FAILURE,
            Error::Policy(PolicyError::Lp(_)) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<PolicyError> for Failure {
    fn from(e: PolicyError) -> Self {
        Error::from(e).into()
    }
}

impl From<PlayError> for Failure {
    fn from(e: PlayError) -> Self {
        Error::from(e).into()
    }
}

impl From<signal_trees::boxes::BoxError> for Failure {
    fn from(e: signal_trees::boxes::BoxError) -> Self {
        Error::from(e).into()
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match execute(&cli) {
        Ok(out) => out,
        Err(f) => (f.code, format!("error: {}\n", f.message)),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<DecisionTree, Failure> {
    let tree = DecisionTree::from_json(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let violations = validate_tree(&tree);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure::input(format!("{} is not a valid tree: {}", path.display(), list.join("; "))));
    }
    Ok(tree)
}

fn load_model(path: &Path, tol: f64) -> Result<EmpiricalModel, Failure> {
    EmpiricalModel::from_json(&read(path)?, tol).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

fn execute(cli: &Cli) -> Result<(i32, String), Failure> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(Failure::input(format!("--tol must be a nonnegative number, got {}", cli.tol)));
    }
    let params = ScenarioParams { m: cli.m, big_m: cli.big_m, seed: cli.seed };
    match &cli.command {
        Command::Analyze { tree } => analyze(&load_tree(tree)?, cli.format),
        Command::Box { model } => box_report(&load_model(model, cli.tol)?, cli.tol, cli.format),
        Command::Solve { tree, model, exchangeable } => {
            solve(load_tree(tree)?, load_model(model, cli.tol)?, *exchangeable, cli.tol, cli.format)
        }
        Command::Demo { scenario, manifest } => {
            let manifest = match manifest {
                Some(path) => Some(
                    serde_json::from_str::<Vec<ManifestEntry>>(&read(path)?)
                        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
                ),
                None => None,
            };
            demo(scenario, params, manifest, cli.format)
        }
        Command::Table1 => table1(cli.seed, cli.tol, cli.format),
        Command::Export { name } => export(name, params),
    }
}

pub fn analyze_tree(tree: &DecisionTree) -> Result<AnalyzeReport, Error> {
    let violations: Vec<String> = validate_tree(tree).iter().map(ToString::to_string).collect();
    let k = is_kuhn(tree);
    let recall = has_perfect_recall(tree, DEFAULT_CAP)?;
    let matrix = decision_matrix(tree, DEFAULT_CAP)?;
    let pure = optimal_pure_payoff(tree, DEFAULT_CAP)?;
    let backward = if k.kuhn && recall.perfect { Some(backward_induction_optimum(tree, DEFAULT_CAP)?) } else { None };
    Ok(AnalyzeReport {
        valid: violations.is_empty(),
        violations,
        kuhn: k.kuhn,
        repeated_set: k.offending.map(|(_, s)| tree.info_set(s).id.clone()),
        perfect_recall: recall.perfect,
        matrix,
        pure_optimum: pure.value,
        optimal_strategies: pure.argmax.iter().map(|s| s.describe(tree)).collect(),
        backward_induction: backward,
    })
}

fn analyze(tree: &DecisionTree, format: Format) -> Result<(i32, String), Failure> {
    let r = analyze_tree(tree)?;
    let out = match format {
        Format::Json => json(&r),
        Format::Csv => r.matrix.to_csv(),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "valid: {}", yes_no(r.valid)).unwrap();
            match &r.repeated_set {
                None => writeln!(s, "kuhn: yes").unwrap(),
                Some(set) => writeln!(s, "kuhn: NO (`{set}` is crossed twice on one play)").unwrap(),
            }
            writeln!(s, "perfect recall: {}", yes_no(r.perfect_recall)).unwrap();
            writeln!(s, "strategies: {}", r.matrix.rows.len()).unwrap();
            writeln!(s, "{}  payoff", r.matrix.info_sets.join("  ")).unwrap();
            for row in &r.matrix.rows {
                writeln!(s, "{}  {}", row.moves.join("  "), render(row.payoff)).unwrap();
            }
            writeln!(s, "pure optimum: {}", render(r.pure_optimum)).unwrap();
            for st in &r.optimal_strategies {
                writeln!(s, "  attained by {st}").unwrap();
            }
            if let Some(b) = r.backward_induction {
                writeln!(s, "backward induction: {}", render(b)).unwrap();
            }
            s
        }
    };
    Ok((EXIT_OK, out))
}

pub fn box_model(model: &EmpiricalModel, tol: f64) -> Result<BoxReport, Error> {
    let ns = is_no_signaling(model, tol);
    let verdict = is_extendable(model, tol, DEFAULT_CAP)?;
    let (extendable, witness) = match verdict {
        FeasibilityVerdict::Extending(_) => (true, None),
        FeasibilityVerdict::Infeasible(w) => (false, Some(w)),
    };
    Ok(BoxReport {
        sites: model.sites().iter().map(|s| s.id.clone()).collect(),
        contexts: (0..model.contexts().len()).map(|c| model.context_key(c)).collect(),
        no_signaling: ns,
        extendable,
        witness,
    })
}

fn box_report(model: &EmpiricalModel, tol: f64, format: Format) -> Result<(i32, String), Failure> {
    let r = box_model(model, tol)?;
    let out = match format {
        Format::Json => json(&r),
        Format::Csv => {
            let mut rows = vec![
                vec!["no_signaling".into(), r.no_signaling.no_signaling.to_string()],
                vec!["max_gap".into(), format!("{:e}", r.no_signaling.max_gap)],
                vec!["extendable".into(), r.extendable.to_string()],
            ];
            if let Some(w) = &r.witness {
                rows.push(vec!["witness_required_value".into(), w.required_value.to_string()]);
                rows.push(vec!["witness_max_point_value".into(), w.max_point_value.to_string()]);
            }
            csv_rows(&["quantity", "value"], rows)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "no-signaling: {}; extendable: {}", yes_no(r.no_signaling.no_signaling), yes_no(r.extendable))
                .unwrap();
            writeln!(s, "sites: {}", r.sites.join(", ")).unwrap();
            writeln!(s, "max marginal gap: {:e}", r.no_signaling.max_gap).unwrap();
            for v in &r.no_signaling.violations {
                writeln!(
                    s,
                    "  signaling on {:?} between contexts {} and {}: gap {:e}",
                    v.sites, v.context_a, v.context_b, v.gap
                )
                .unwrap();
            }
            if let Some(w) = &r.witness {
                writeln!(s, "witness: weighted sum of context probabilities").unwrap();
                for (c, coeffs) in w.coefficients.iter().enumerate() {
                    for (o, &y) in coeffs.iter().enumerate() {
                        if y.abs() > 1e-12 {
                            writeln!(s, "  {:+.6} × P({} | {})", y, model.outcome_string(c, o), r.contexts[c]).unwrap();
                        }
                    }
                }
                writeln!(s, "  equals {} on the model", render(w.required_value)).unwrap();
                writeln!(s, "  but at most {} on any joint assignment", render(w.max_point_value)).unwrap();
            }
            s
        }
    };
    Ok((EXIT_OK, out))
}

fn solve_scenario(
    tree: DecisionTree,
    model: EmpiricalModel,
    exchangeable: bool,
    tol: f64,
) -> Result<SolveReport, Failure> {
    let bound: Vec<&str> = model.sites().iter().map(|s| s.info_set.as_str()).collect();
    let silent_sets: Vec<String> = tree
        .dm_sets()
        .iter()
        .map(|&s| tree.info_set(s).id.clone())
        .filter(|id| !bound.contains(&id.as_str()))
        .collect();
    let model = model.silence_unbound(&tree);
    let pure = optimal_pure_payoff(&tree, DEFAULT_CAP)?;
    let sc = SignalScenario::new(tree, model, tol)?;
    let mut checks = Vec::new();
    if exchangeable {
        for (pos, b) in sc.bindings.iter().enumerate() {
            let Binding::PerVisit(sites) = b else { continue };
            let id = sc.tree.info_set(sc.tree.dm_sets()[pos]).id.clone();
            let ok = is_exchangeable(&sc.model, &id, tol)?;
            if !ok {
                return Err(Failure::input(format!("sites of `{id}` are not exchangeable")));
            }
            let classical = classical_exchangeable_optimum(&sc.tree, sc.alphabet_len(pos), sites.len(), DEFAULT_CAP)
                .ok()
                .map(|e| e.value);
            checks.push(ExchangeableCheck { info_set: id, exchangeable: ok, classical_optimum: classical });
        }
        if checks.is_empty() {
            return Err(Failure::input("--exchangeable needs an information set with visit-indexed sites"));
        }
    }
    let best = optimize_policy(&sc, DEFAULT_CAP)?;
    Ok(SolveReport {
        pure_optimum: pure.value,
        value: best.value,
        display: render(best.value),
        policies: best.argmax.iter().map(|p| p.describe(&sc)).collect(),
        evaluated: best.evaluated,
        silent_sets,
        exchangeable: checks,
    })
}

fn solve(
    tree: DecisionTree,
    model: EmpiricalModel,
    exchangeable: bool,
    tol: f64,
    format: Format,
) -> Result<(i32, String), Failure> {
    let r = solve_scenario(tree, model, exchangeable, tol)?;
    let out = match format {
        Format::Json => json(&r),
        Format::Csv => csv_rows(&["policy", "value"], r.policies.iter().map(|p| vec![p.clone(), r.value.to_string()])),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "optimum without signals: {}", render(r.pure_optimum)).unwrap();
            writeln!(s, "policy optimum: {} ({} policies evaluated)", r.display, r.evaluated).unwrap();
            for p in &r.policies {
                writeln!(s, "  attained by {p}").unwrap();
            }
            if !r.silent_sets.is_empty() {
                writeln!(s, "sets without signals: {}", r.silent_sets.join(", ")).unwrap();
            }
            for c in &r.exchangeable {
                let classical = c.classical_optimum.map(render).unwrap_or_else(|| "n/a".into());
                writeln!(s, "`{}`: exchangeable; classical exchangeable optimum {classical}", c.info_set).unwrap();
            }
            s
        }
    };
    Ok((EXIT_OK, out))
}

fn expectation_text(e: &Expectation) -> String {
    match e {
        Expectation::Equals { value, tolerance } => format!("= {} ± {tolerance:e}", render(*value)),
        Expectation::Matches { other, tolerance } => format!("= {other} ± {tolerance:e}"),
        Expectation::Exceeds { other, margin } => format!("> {other} + {margin:e}"),
    }
}

fn demo(
    name: &str,
    params: ScenarioParams,
    manifest: Option<Vec<ManifestEntry>>,
    format: Format,
) -> Result<(i32, String), Failure> {
    let mut bundle = builtin_scenario(name, params)?;
    if let Some(m) = manifest {
        bundle.manifest = m;
    }
    let report: DemoReport = run_demo(&bundle)?;
    let code = if report.pass { EXIT_OK } else { EXIT_MISMATCH };
    let out = match format {
        Format::Json => json(&report),
        Format::Csv => csv_rows(
            &["key", "value", "display", "expected", "pass"],
            report.measurements.iter().map(|m| {
                let check = report.checks.iter().find(|c| c.key == m.key);
                vec![
                    m.key.clone(),
                    m.value.to_string(),
                    m.display.clone(),
                    check.map(|c| expectation_text(&c.expectation)).unwrap_or_default(),
                    check.map(|c| c.pass.to_string()).unwrap_or_default(),
                ]
            }),
        ),
        Format::Text => {
            let mut s = String::new();
            writeln!(
                s,
                "scenario {} (m = {}, M = {}, seed = {})",
                report.scenario, params.m, params.big_m, params.seed
            )
            .unwrap();
            for m in &report.measurements {
                writeln!(s, "  {}: {}", m.key, m.display).unwrap();
            }
            for c in &report.checks {
                let tag = if c.pass { "ok" } else { "MISMATCH" };
                writeln!(s, "  [{tag}] {} {} ({:?})", c.key, expectation_text(&c.expectation), c.origin).unwrap();
            }
            for n in &report.notes {
                writeln!(s, "  note: {n}").unwrap();
            }
            writeln!(s, "{}", if report.pass { "PASS" } else { "FAIL" }).unwrap();
            s
        }
    };
    Ok((code, out))
}

fn table1(seed: u64, tol: f64, format: Format) -> Result<(i32, String), Failure> {
    let table: SummaryTable = optimum_summary(seed, tol)?;
    let code = if table.holds { EXIT_OK } else { EXIT_MISMATCH };
    let chain = |r: &fixtures::TableRow| {
        let mut parts = vec![format!("{} {}", r.values[0].label, r.values[0].display)];
        for (rel, v) in r.relations.iter().zip(&r.values[1..]) {
            parts.push(format!("{} {} {}", rel.symbol(), v.label, v.display));
        }
        parts.join(" ")
    };
    let out = match format {
        Format::Json => json(&table),
        Format::Csv => csv_rows(
            &["tree_class", "fixture", "relations", "holds"],
            table.rows.iter().map(|r| vec![r.tree_class.clone(), r.fixture.clone(), chain(r), r.holds.to_string()]),
        ),
        Format::Text => {
            let mut s = String::new();
            for r in &table.rows {
                let tag = if r.holds { "ok" } else { "MISMATCH" };
                writeln!(s, "[{tag}] {} ({}): {}", r.tree_class, r.fixture, chain(r)).unwrap();
            }
            writeln!(s, "{}", if table.holds { "PASS" } else { "FAIL" }).unwrap();
            s
        }
    };
    Ok((code, out))
}

fn export(name: &str, params: ScenarioParams) -> Result<(i32, String), Failure> {
    let out = match name {
        "hardy" => {
            hardy_instance().map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })?.model.to_json()
        }
        "iid-coins" => fixtures::iid_coins_model().to_json(),
        "anticorrelated-coins" => fixtures::anticorrelated_coins_model().to_json(),
        _ => builtin_scenario(name, params)?.tree.to_json(),
    };
    Ok((EXIT_OK, out + "\n"))
}
