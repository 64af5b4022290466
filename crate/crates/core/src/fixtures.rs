//! Named scenarios with expected-value manifests, and the summary table that
//! compares optimal payoffs across tree classes and signal types.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::boxes::{classical_box_from_joint, is_extendable, Context, EmpiricalModel, Site};
use crate::gen::{random_full_joint, random_no_signaling_model};
use crate::play::{backward_induction_optimum, optimal_pure_payoff};
use crate::policy::{
    classical_exchangeable_optimum, evaluate_policy, optimize_policy, JointEntry, ResponsePolicy, SignalScenario,
};
use crate::quantum::hardy_instance;
use crate::symbolic::render;
use crate::tree::{DecisionTree, InfoSetRef, NodeRef, TreeBuilder};
use crate::{Error, DEFAULT_CAP, DEFAULT_TOL, PHI};

#[derive(Debug, ThisError, Clone, PartialEq)]
pub enum FixtureError {
    #[error("unknown scenario `{0}` (expected fig8, fig10, amd, glued or perfect_recall_demo)")]
    UnknownScenario(String),
    #[error("payoffs need 0 < m < M, got m = {m}, M = {big_m}")]
    InvalidPayoffs { m: f64, big_m: f64 },
}

// ---------------------------------------------------------------------------
// Trees

fn amd_into(b: &mut TreeBuilder, x: InfoSetRef) -> NodeRef {
    let first = b.decision(x);
    let second = b.decision(x);
    let exit_first = b.terminal(0.0);
    let through = b.terminal(1.0);
    let exit_second = b.terminal(4.0);
    b.attach(first, second);
    b.attach(first, exit_first);
    b.attach(second, through);
    b.attach(second, exit_second);
    first
}

/// Absent-minded driver: one information set `X` crossed twice; moves `In`
/// (continue) and `Out` (exit). Exiting first pays 0, second pays 4, never exiting pays 1.
pub fn amd_tree() -> DecisionTree {
    let mut b = TreeBuilder::new();
    let x = b.dm_set("X", &["In", "Out"]);
    amd_into(&mut b, x);
    b.build()
}

struct CardinalSets {
    contexts: InfoSetRef,
    west: InfoSetRef,
    east: InfoSetRef,
    north: InfoSetRef,
    south: InfoSetRef,
}

fn cardinal_sets(b: &mut TreeBuilder) -> CardinalSets {
    CardinalSets {
        contexts: b.nature_set("Context", &["WN", "EN", "WS", "ES"], &[0.25; 4]),
        west: b.dm_set("West", &["U", "D"]),
        east: b.dm_set("East", &["u", "d"]),
        north: b.dm_set("North", &["T", "B"]),
        south: b.dm_set("South", &["t", "b"]),
    }
}

fn cardinal_into(b: &mut TreeBuilder, s: &CardinalSets, m: f64, big_m: f64) -> NodeRef {
    let root = b.chance(s.contexts);
    // (first set, second set, payoff for moves (a, b))
    let pay = |ctx: usize, a: usize, c: usize| match (ctx, a, c) {
        (0, 1, 1) => -big_m,
        (1, 0, 0) => -big_m,
        (2, 0, 0) => -big_m,
        (3, 0, 0) => m,
        _ => 0.0,
    };
    let layout = [(s.west, s.north), (s.east, s.north), (s.west, s.south), (s.east, s.south)];
    for (ctx, &(first, second)) in layout.iter().enumerate() {
        let d1 = b.decision(first);
        b.attach(root, d1);
        for a in 0..2 {
            let d2 = b.decision(second);
            b.attach(d1, d2);
            for c in 0..2 {
                let t = b.terminal(pay(ctx, a, c));
                b.attach(d2, t);
            }
        }
    }
    root
}

/// Kuhn tree with imperfect recall on four binary information sets.
///
/// Nature picks one of the contexts (West, North), (East, North), (West, South),
/// (East, South) with probability ¼; the DM moves at the first set, then the second.
/// Payoffs: `-M` for (D, B) in (W, N), for (u, T) in (E, N) and for (U, t) in (W, S);
/// `+m` for (u, t) in (E, S); 0 elsewhere.
pub fn four_context_tree(m: f64, big_m: f64) -> DecisionTree {
    let mut b = TreeBuilder::new();
    let s = cardinal_sets(&mut b);
    cardinal_into(&mut b, &s, m, big_m);
    b.build()
}

/// Nature picks Left or Right with probability ½; the DM, not knowing which,
/// guesses and earns 1 on a match.
pub fn matching_tree() -> DecisionTree {
    let mut b = TreeBuilder::new();
    let nature = b.nature_set("Nature", &["Left", "Right"], &[0.5, 0.5]);
    let guess = b.dm_set("Guess", &["Left", "Right"]);
    let root = b.chance(nature);
    for side in 0..2 {
        let d = b.decision(guess);
        b.attach(root, d);
        for g in 0..2 {
            let t = b.terminal(if g == side { 1.0 } else { 0.0 });
            b.attach(d, t);
        }
    }
    b.build()
}

/// Perfect-recall Kuhn tree: Nature picks one of four branches, each with its own
/// information sets (`A`, `A2` / `B` / `C` / `D`, `D2`). Optimum ¼(1.5 + 1 + 2 + 2).
pub fn perfect_recall_demo_tree() -> DecisionTree {
    let mut b = TreeBuilder::new();
    let root_set = b.nature_set("Branch", &["a", "b", "c", "d"], &[0.25; 4]);
    let mid_a = b.nature_set("CoinA", &["h", "t"], &[0.5, 0.5]);
    let mid_b = b.nature_set("CoinB", &["h", "t"], &[0.5, 0.5]);
    let mid_d = b.nature_set("CoinD", &["h", "t"], &[0.5, 0.5]);
    let a = b.dm_set("A", &["a1", "a2"]);
    let a2 = b.dm_set("A2", &["x", "y"]);
    let bs = b.dm_set("B", &["b1", "b2"]);
    let c = b.dm_set("C", &["c1", "c2"]);
    let d = b.dm_set("D", &["d1", "d2"]);
    let d2 = b.dm_set("D2", &["p", "q"]);
    let root = b.chance(root_set);

    let leaf = |b: &mut TreeBuilder, parent: NodeRef, v: f64| {
        let t = b.terminal(v);
        b.attach(parent, t);
    };
    // a1 leads to a coin and two A2 nodes; payoff table per coin side
    let with_second = |b: &mut TreeBuilder,
                       first: InfoSetRef,
                       coin: InfoSetRef,
                       second: InfoSetRef,
                       table: [[f64; 2]; 2],
                       alt: f64| {
        let n = b.decision(first);
        let ch = b.chance(coin);
        b.attach(n, ch);
        for row in table {
            let s = b.decision(second);
            b.attach(ch, s);
            for v in row {
                let t = b.terminal(v);
                b.attach(s, t);
            }
        }
        let t = b.terminal(alt);
        b.attach(n, t);
        n
    };
    let na = with_second(&mut b, a, mid_a, a2, [[2.0, 0.0], [0.0, 3.0]], 1.2);
    b.attach(root, na);

    let nb = b.decision(bs);
    b.attach(root, nb);
    leaf(&mut b, nb, 1.0);
    let coin = b.chance(mid_b);
    b.attach(nb, coin);
    leaf(&mut b, coin, 3.0);
    leaf(&mut b, coin, -2.0);

    let nc = b.decision(c);
    b.attach(root, nc);
    leaf(&mut b, nc, 0.0);
    leaf(&mut b, nc, 2.0);

    let nd = with_second(&mut b, d, mid_d, d2, [[4.0, 0.0], [0.0, 1.0]], 1.0);
    b.attach(root, nd);
    b.build()
}

/// Nature picks, with probability ½ each, the absent-minded driver or the
/// four-context tree of [`four_context_tree`].
pub fn glued_tree(m: f64, big_m: f64) -> DecisionTree {
    let mut b = TreeBuilder::new();
    let glue = b.nature_set("Glue", &["driver", "contexts"], &[0.5, 0.5]);
    let x = b.dm_set("X", &["In", "Out"]);
    let s = cardinal_sets(&mut b);
    let root = b.chance(glue);
    let left = amd_into(&mut b, x);
    let right = cardinal_into(&mut b, &s, m, big_m);
    b.attach(root, left);
    b.attach(root, right);
    b.build()
}

// ---------------------------------------------------------------------------
// Models

fn coin_pair(probs: [f64; 4]) -> EmpiricalModel {
    let sites = vec![Site::new("X1", "X", &["H", "T"]).visit(1), Site::new("X2", "X", &["H", "T"]).visit(2)];
    EmpiricalModel::new(sites, vec![Context { sites: vec![0, 1], probs: probs.to_vec() }], DEFAULT_TOL)
        .expect("valid coin model")
}

/// Independent fair coins, one per visit of `X`.
pub fn iid_coins_model() -> EmpiricalModel {
    coin_pair([0.25; 4])
}

/// Anticorrelated coins: `(H, T)` or `(T, H)`, each with probability ½.
pub fn anticorrelated_coins_model() -> EmpiricalModel {
    coin_pair([0.0, 0.5, 0.5, 0.0])
}

fn coin_model() -> EmpiricalModel {
    EmpiricalModel::new(
        vec![Site::new("Coin", "Guess", &["Heads", "Tails"])],
        vec![Context { sites: vec![0], probs: vec![0.5, 0.5] }],
        DEFAULT_TOL,
    )
    .expect("valid coin model")
}

/// Guessing tree with a fair coin drawn independently of Nature.
pub fn matching_independent_scenario() -> SignalScenario {
    SignalScenario::new(matching_tree(), coin_model(), DEFAULT_TOL).expect("valid scenario")
}

/// Guessing tree with the coin showing Heads exactly when Nature picks Left.
pub fn matching_joint_scenario() -> SignalScenario {
    let joint = vec![
        JointEntry { world: vec![0], signals: vec![0], prob: 0.5 },
        JointEntry { world: vec![1], signals: vec![1], prob: 0.5 },
    ];
    SignalScenario::with_nature_joint(matching_tree(), coin_model(), joint, DEFAULT_TOL).expect("valid scenario")
}

// ---------------------------------------------------------------------------
// Bundles and manifests

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub m: f64,
    pub big_m: f64,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams { m: 1.0, big_m: 2.0, seed: 0 }
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Closed-form value of the published analysis.
    Analytic,
    /// Value obtained by a separate calculation on the fixture.
    Computed,
    /// Relation between measured quantities rather than a number.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Equals {
        value: f64,
        tolerance: f64,
    },
    /// Equal to another measured key.
    Matches {
        other: String,
        tolerance: f64,
    },
    /// Strictly greater than another measured key by more than `margin`.
    Exceeds {
        other: String,
        margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub key: String,
    pub expectation: Expectation,
    pub origin: Origin,
}

#[derive(Debug, Clone)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: SignalScenario,
}

#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub name: String,
    pub params: ScenarioParams,
    pub tree: DecisionTree,
    pub scenarios: Vec<NamedScenario>,
    pub manifest: Vec<ManifestEntry>,
}

fn equals(key: &str, value: f64, tolerance: f64, origin: Origin) -> ManifestEntry {
    ManifestEntry { key: key.into(), expectation: Expectation::Equals { value, tolerance }, origin }
}

fn matches(key: &str, other: &str) -> ManifestEntry {
    ManifestEntry {
        key: key.into(),
        expectation: Expectation::Matches { other: other.into(), tolerance: DEFAULT_TOL },
        origin: Origin::Structural,
    }
}

fn exceeds(key: &str, other: &str) -> ManifestEntry {
    ManifestEntry {
        key: key.into(),
        expectation: Expectation::Exceeds { other: other.into(), margin: DEFAULT_TOL },
        origin: Origin::Structural,
    }
}

fn named(name: &str, scenario: SignalScenario) -> NamedScenario {
    NamedScenario { name: name.into(), scenario }
}

fn scenario(tree: &DecisionTree, model: EmpiricalModel) -> Result<SignalScenario, Error> {
    Ok(SignalScenario::new(tree.clone(), model, DEFAULT_TOL)?)
}

/// Builds a named fixture with its scenarios and manifest.
pub fn builtin_scenario(name: &str, params: ScenarioParams) -> Result<ScenarioBundle, Error> {
    let needs_payoffs = matches!(name, "fig10" | "glued");
    if needs_payoffs && !(0.0 < params.m && params.m < params.big_m && params.big_m.is_finite()) {
        return Err(FixtureError::InvalidPayoffs { m: params.m, big_m: params.big_m }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (m, big_m) = (params.m, params.big_m);
    let (tree, scenarios, manifest) = match name {
        "fig10" => {
            let tree = four_context_tree(m, big_m);
            let hardy = hardy_instance().map_err(|e| Error::Invalid(e.to_string()))?;
            let mu = random_full_joint(&mut rng, &tree);
            let contexts = vec![vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3]];
            let scenarios = vec![
                named("hardy", scenario(&tree, hardy.model)?),
                named("classical", scenario(&tree, classical_box_from_joint(&mu, &contexts))?),
            ];
            let manifest = vec![
                equals("pure_optimum", 0.0, DEFAULT_TOL, Origin::Analytic),
                equals("classical_optimum", 0.0, DEFAULT_TOL, Origin::Analytic),
                equals("hardy_optimum", m * PHI.powi(5) / 4.0, DEFAULT_TOL, Origin::Analytic),
                equals("hardy_extendable", 0.0, 0.0, Origin::Analytic),
            ];
            (tree, scenarios, manifest)
        }
        "amd" => {
            let tree = amd_tree();
            let scenarios = vec![
                named("iid", scenario(&tree, iid_coins_model())?),
                named("anticorrelated", scenario(&tree, anticorrelated_coins_model())?),
            ];
            let manifest = vec![
                equals("no_signal_optimum", 1.0, 1e-12, Origin::Analytic),
                equals("iid_fair_value", 1.25, 1e-12, Origin::Analytic),
                equals("anticorrelated_value", 2.0, 1e-12, Origin::Analytic),
                equals("exchangeable_optimum", 2.0, 1e-12, Origin::Analytic),
            ];
            (tree, scenarios, manifest)
        }
        "fig8" => {
            let scenarios =
                vec![named("independent", matching_independent_scenario()), named("joint", matching_joint_scenario())];
            let manifest = vec![
                equals("pure_optimum", 0.5, 0.0, Origin::Analytic),
                equals("independent_optimum", 0.5, 0.0, Origin::Analytic),
                equals("joint_optimum", 1.0, 0.0, Origin::Analytic),
            ];
            (matching_tree(), scenarios, manifest)
        }
        "glued" => {
            let tree = glued_tree(m, big_m);
            let hardy = hardy_instance().map_err(|e| Error::Invalid(e.to_string()))?;
            let model = anticorrelated_coins_model().disjoint_union(&hardy.model);
            let scenarios = vec![named("quantum", scenario(&tree, model)?)];
            let manifest = vec![
                exceeds("exchangeable_classical", "pure_optimum"),
                exceeds("quantum_augmented", "exchangeable_classical"),
            ];
            (tree, scenarios, manifest)
        }
        "perfect_recall_demo" => {
            let tree = perfect_recall_demo_tree();
            let mu = random_full_joint(&mut rng, &tree);
            let ns = random_no_signaling_model(&mut rng, &tree);
            let scenarios = vec![
                named("classical", scenario(&tree, mu.as_model())?),
                named("no_signaling", scenario(&tree, ns.model)?),
            ];
            let manifest = vec![
                equals("pure_optimum", 1.625, DEFAULT_TOL, Origin::Computed),
                matches("backward_induction", "pure_optimum"),
                matches("classical_optimum", "pure_optimum"),
                matches("no_signaling_optimum", "pure_optimum"),
                equals("no_signaling_extendable", 0.0, 0.0, Origin::Structural),
            ];
            (tree, scenarios, manifest)
        }
        other => return Err(FixtureError::UnknownScenario(other.into()).into()),
    };
    Ok(ScenarioBundle { name: name.into(), params, tree, scenarios, manifest })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub key: String,
    pub value: f64,
    /// Symbolic and decimal rendering.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub key: String,
    pub measured: f64,
    pub expectation: Expectation,
    pub origin: Origin,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub scenario: String,
    pub params: ScenarioParams,
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn find<'a>(b: &'a ScenarioBundle, name: &str) -> &'a SignalScenario {
    &b.scenarios.iter().find(|s| s.name == name).expect("bundle scenario").scenario
}

/// Computes every quantity a bundle's manifest refers to.
fn measure(b: &ScenarioBundle) -> Result<(Vec<(String, f64)>, Vec<String>), Error> {
    let mut out: Vec<(String, f64)> = Vec::new();
    let mut notes = Vec::new();
    let mut put = |k: &str, v: f64| out.push((k.to_string(), v));
    let pure = optimal_pure_payoff(&b.tree, DEFAULT_CAP)?;
    put("pure_optimum", pure.value);
    match b.name.as_str() {
        "fig10" => {
            let q = optimize_policy(find(b, "hardy"), DEFAULT_CAP)?;
            put("classical_optimum", optimize_policy(find(b, "classical"), DEFAULT_CAP)?.value);
            put("hardy_optimum", q.value);
            let ext = is_extendable(&find(b, "hardy").model, DEFAULT_TOL, DEFAULT_CAP)?;
            put("hardy_extendable", if ext.is_extendable() { 1.0 } else { 0.0 });
            for p in &q.argmax {
                notes.push(format!("optimal Hardy policy: {}", p.describe(find(b, "hardy"))));
            }
        }
        "amd" => {
            let in_on_heads = ResponsePolicy { maps: vec![vec![0, 1]] };
            put("no_signal_optimum", pure.value);
            put("iid_fair_value", evaluate_policy(find(b, "iid"), &in_on_heads)?);
            put("anticorrelated_value", evaluate_policy(find(b, "anticorrelated"), &in_on_heads)?);
            let ex = classical_exchangeable_optimum(&b.tree, 2, 2, DEFAULT_CAP)?;
            put("exchangeable_optimum", ex.value);
            notes.push(format!("exchangeable optimum distribution over HH, HT, TH, TT: {:?}", ex.distribution));
        }
        "fig8" => {
            put("independent_optimum", optimize_policy(find(b, "independent"), DEFAULT_CAP)?.value);
            put("joint_optimum", optimize_policy(find(b, "joint"), DEFAULT_CAP)?.value);
        }
        "glued" => {
            put("exchangeable_classical", classical_exchangeable_optimum(&b.tree, 2, 2, DEFAULT_CAP)?.value);
            put("quantum_augmented", optimize_policy(find(b, "quantum"), DEFAULT_CAP)?.value);
        }
        "perfect_recall_demo" => {
            put("backward_induction", backward_induction_optimum(&b.tree, DEFAULT_CAP)?);
            put("classical_optimum", optimize_policy(find(b, "classical"), DEFAULT_CAP)?.value);
            put("no_signaling_optimum", optimize_policy(find(b, "no_signaling"), DEFAULT_CAP)?.value);
            let ext = is_extendable(&find(b, "no_signaling").model, DEFAULT_TOL, DEFAULT_CAP)?;
            put("no_signaling_extendable", if ext.is_extendable() { 1.0 } else { 0.0 });
        }
        _ => {}
    }
    Ok((out, notes))
}

/// Measures a bundle and checks it against its manifest.
pub fn run_demo(b: &ScenarioBundle) -> Result<DemoReport, Error> {
    let (values, notes) = measure(b)?;
    let get = |k: &str| values.iter().find(|(key, _)| key == k).map(|&(_, v)| v);
    let mut checks = Vec::new();
    for e in &b.manifest {
        let measured =
            get(&e.key).ok_or_else(|| Error::Invalid(format!("manifest key `{}` is not measured", e.key)))?;
        let pass = match &e.expectation {
            Expectation::Equals { value, tolerance } => (measured - value).abs() <= *tolerance,
            Expectation::Matches { other, tolerance } => get(other).is_some_and(|o| (measured - o).abs() <= *tolerance),
            Expectation::Exceeds { other, margin } => get(other).is_some_and(|o| measured > o + margin),
        };
        checks.push(Check { key: e.key.clone(), measured, expectation: e.expectation.clone(), origin: e.origin, pass });
    }
    let measurements =
        values.iter().map(|(k, v)| Measurement { key: k.clone(), value: *v, display: render(*v) }).collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(DemoReport { scenario: b.name.clone(), params: b.params, measurements, checks, notes, pass })
}

// ---------------------------------------------------------------------------
// Summary table

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = "<")]
    Less,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "=",
            Relation::Less => "<",
        }
    }

    fn holds(self, a: f64, b: f64, tol: f64) -> bool {
        match self {
            Relation::Equal => (a - b).abs() <= tol,
            Relation::Less => a < b - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub tree_class: String,
    pub fixture: String,
    pub values: Vec<LabeledValue>,
    /// `relations[i]` relates `values[i]` to `values[i + 1]`.
    pub relations: Vec<Relation>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<TableRow>,
    pub holds: bool,
}

fn row(class: &str, fixture: &str, values: Vec<(&str, f64)>, relations: Vec<Relation>, tol: f64) -> TableRow {
    let holds = relations.iter().enumerate().all(|(i, r)| r.holds(values[i].1, values[i + 1].1, tol));
    TableRow {
        tree_class: class.into(),
        fixture: fixture.into(),
        values: values
            .into_iter()
            .map(|(l, v)| LabeledValue { label: l.into(), value: v, display: render(v) })
            .collect(),
        relations,
        holds,
    }
}

/// Recomputes, per tree class, the optimum without signals, with classical
/// signals and with non-classical signals.
pub fn optimum_summary(seed: u64, tol: f64) -> Result<SummaryTable, Error> {
    let p = ScenarioParams { seed, ..ScenarioParams::default() };
    let mut rows = Vec::new();

    let pr = builtin_scenario("perfect_recall_demo", p)?;
    let pr = measure(&pr)?.0;
    let v = |vals: &[(String, f64)], k: &str| vals.iter().find(|(x, _)| x == k).map(|&(_, v)| v).unwrap_or(f64::NAN);
    rows.push(row(
        "perfect recall",
        "perfect_recall_demo",
        vec![
            ("no signals", v(&pr, "pure_optimum")),
            ("classical", v(&pr, "classical_optimum")),
            ("no-signaling", v(&pr, "no_signaling_optimum")),
        ],
        vec![Relation::Equal, Relation::Equal],
        tol,
    ));

    let f10 = measure(&builtin_scenario("fig10", p)?)?.0;
    rows.push(row(
        "imperfect recall, Kuhn",
        "fig10",
        vec![
            ("no signals", v(&f10, "pure_optimum")),
            ("classical", v(&f10, "classical_optimum")),
            ("quantum", v(&f10, "hardy_optimum")),
        ],
        vec![Relation::Equal, Relation::Less],
        tol,
    ));

    let amd = measure(&builtin_scenario("amd", p)?)?.0;
    rows.push(row(
        "non-Kuhn",
        "amd",
        vec![("no signals", v(&amd, "no_signal_optimum")), ("classical exchangeable", v(&amd, "exchangeable_optimum"))],
        vec![Relation::Less],
        tol,
    ));

    let glued = measure(&builtin_scenario("glued", p)?)?.0;
    rows.push(row(
        "non-Kuhn",
        "glued",
        vec![
            ("classical exchangeable", v(&glued, "exchangeable_classical")),
            ("quantum", v(&glued, "quantum_augmented")),
        ],
        vec![Relation::Less],
        tol,
    ));

    let holds = rows.iter().all(|r| r.holds);
    Ok(SummaryTable { rows, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{has_perfect_recall, is_kuhn, validate_tree};

    #[test]
    fn fixtures_validate() {
        for t in
            [amd_tree(), four_context_tree(1.0, 2.0), matching_tree(), perfect_recall_demo_tree(), glued_tree(1.0, 2.0)]
        {
            assert!(validate_tree(&t).is_empty(), "{:?}", validate_tree(&t));
        }
        assert!(has_perfect_recall(&perfect_recall_demo_tree(), DEFAULT_CAP).unwrap().perfect);
        assert!(!is_kuhn(&glued_tree(1.0, 2.0)).kuhn);
    }

    #[test]
    fn four_context_elimination_argument() {
        // +m needs u at East and t at South; then (E,N) forces B at North and
        // (W,S) forces D at West, which hits -M in (W,N)
        let t = four_context_tree(1.0, 2.0);
        let opt = optimal_pure_payoff(&t, DEFAULT_CAP).unwrap();
        for s in &opt.argmax {
            assert!(!(s.choices[1] == 0 && s.choices[3] == 0));
        }
        let forced = crate::play::Strategy { choices: vec![1, 0, 1, 0] };
        assert!((crate::play::expected_payoff(&forced, &t, DEFAULT_CAP).unwrap() - (1.0 - 2.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn every_demo_passes() {
        for name in ["fig8", "fig10", "amd", "glued", "perfect_recall_demo"] {
            let b = builtin_scenario(name, ScenarioParams::default()).unwrap();
            let r = run_demo(&b).unwrap();
            assert!(r.pass, "{name}: {:?}", r.checks);
        }
    }

    #[test]
    fn glued_values() {
        let b = builtin_scenario("glued", ScenarioParams::default()).unwrap();
        let (vals, _) = measure(&b).unwrap();
        let get = |k: &str| vals.iter().find(|(x, _)| x == k).unwrap().1;
        assert!((get("exchangeable_classical") - 1.0).abs() < 1e-12);
        assert!((get("quantum_augmented") - (1.0 + PHI.powi(5) / 8.0)).abs() < 1e-9);
    }

    #[test]
    fn scenario_errors() {
        assert!(matches!(
            builtin_scenario("nope", ScenarioParams::default()),
            Err(Error::Fixture(FixtureError::UnknownScenario(_)))
        ));
        let bad = ScenarioParams { m: 3.0, big_m: 2.0, seed: 0 };
        assert!(matches!(builtin_scenario("fig10", bad), Err(Error::Fixture(FixtureError::InvalidPayoffs { .. }))));
    }

    #[test]
    fn hardy_value_scales_with_m() {
        let b = builtin_scenario("fig10", ScenarioParams { m: 3.0, big_m: 5.0, seed: 2 }).unwrap();
        assert!(run_demo(&b).unwrap().pass);
    }

    #[test]
    fn summary_table_holds() {
        let t = optimum_summary(0, DEFAULT_TOL).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.holds, "{t:?}");
        let f10 = &t.rows[1];
        assert_eq!(f10.values[2].display, "φ^5/4 ≈ 0.0225425");
    }
}
