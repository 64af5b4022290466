//! Signal-contingent policies on trees augmented with an empirical model.
//!
//! A policy holds one response map per DM information set, from the alphabet of
//! the set's signal site to the set's moves. When an information set carries
//! per-visit sites, its single map is applied to whichever visit's signal is
//! observed: the DM cannot tell the visits apart, so he cannot use different
//! maps for them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::{conditional_at_site, is_no_signaling, BoxError, EmpiricalModel, JointSignalMeasure};
use crate::lp::{LinearProgram, LpOutcome};
use crate::play::{enumerate_strategies, expected_payoff, Strategy};
use crate::tree::{is_kuhn, DecisionTree, NodeKind, NodeRef};
use crate::{PlayError, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("information set `{0}` has no signal site")]
    UnboundInfoSet(String),
    #[error("information set `{0}` mixes shared and per-visit sites, or its sites differ in alphabet")]
    BadBinding(String),
    #[error("visit {visit} to `{set}` has no site")]
    MissingVisit { set: String, visit: usize },
    #[error("model is signaling (max marginal gap {0})")]
    Signaling(f64),
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Play(#[from] PlayError),
    #[error("operation needs a Kuhn tree")]
    NotKuhn,
    #[error("policy space of {count} exceeds cap {cap}")]
    TooMany { count: usize, cap: usize },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("joint Nature-signal distribution is invalid: {0}")]
    InvalidJoint(String),
    #[error("tree needs exactly one information set crossed more than once")]
    NoRepeatedSet,
    #[error("linear program failed: {0}")]
    Lp(String),
}

/// Which model sites feed an information set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    /// One signal for the whole information set, observed once and reused on later visits.
    Shared(usize),
    /// Site for the first, second, ... visit along a play.
    PerVisit(Vec<usize>),
}

/// One point of a joint distribution of Nature's choices and the signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEntry {
    /// Branch per Nature information set, in tree order.
    pub world: Vec<usize>,
    /// Outcome per model site.
    pub signals: Vec<usize>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NatureCoupling {
    /// Signals are drawn from the model independently of Nature.
    Independent,
    /// Nature's choices and all signals are drawn together.
    Joint(Vec<JointEntry>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalScenario {
    pub tree: DecisionTree,
    pub model: EmpiricalModel,
    pub bindings: Vec<Binding>,
    pub coupling: NatureCoupling,
}

impl SignalScenario {
    /// Binds every DM information set to its sites (by `info_set` id). Sets
    /// without sites are an error; see [`EmpiricalModel::silence_unbound`].
    pub fn new(tree: DecisionTree, model: EmpiricalModel, tol: f64) -> Result<Self, PolicyError> {
        let report = is_no_signaling(&model, tol);
        if !report.no_signaling {
            return Err(PolicyError::Signaling(report.max_gap));
        }
        let bindings = bind(&tree, &model)?;
        Ok(SignalScenario { tree, model, bindings, coupling: NatureCoupling::Independent })
    }

    /// Scenario whose signals are correlated with Nature through `joint`.
    pub fn with_nature_joint(
        tree: DecisionTree,
        model: EmpiricalModel,
        joint: Vec<JointEntry>,
        tol: f64,
    ) -> Result<Self, PolicyError> {
        let bindings = bind(&tree, &model)?;
        let total: f64 = joint.iter().map(|e| e.prob).sum();
        if (total - 1.0).abs() > tol || joint.iter().any(|e| e.prob < -tol) {
            return Err(PolicyError::InvalidJoint(format!("probabilities sum to {total}")));
        }
        for e in &joint {
            let worlds_ok = e.world.len() == tree.nature_sets().len()
                && e.world.iter().zip(tree.nature_sets()).all(|(&c, &s)| c < tree.move_count(s));
            let signals_ok = e.signals.len() == model.sites().len()
                && e.signals.iter().zip(model.sites()).all(|(&o, s)| o < s.alphabet.len());
            if !worlds_ok || !signals_ok {
                return Err(PolicyError::InvalidJoint(format!("entry {:?}/{:?} does not fit", e.world, e.signals)));
            }
        }
        Ok(SignalScenario { tree, model, bindings, coupling: NatureCoupling::Joint(joint) })
    }

    /// Alphabet size of the sites bound to DM set at `pos`.
    pub fn alphabet_len(&self, pos: usize) -> usize {
        self.model.sites()[self.first_site(pos)].alphabet.len()
    }

    fn first_site(&self, pos: usize) -> usize {
        match &self.bindings[pos] {
            Binding::Shared(s) => *s,
            Binding::PerVisit(v) => v[0],
        }
    }

    fn sites_of(&self, pos: usize) -> Vec<usize> {
        match &self.bindings[pos] {
            Binding::Shared(s) => vec![*s],
            Binding::PerVisit(v) => v.clone(),
        }
    }

    /// Number of deterministic policies.
    pub fn policy_count(&self) -> Option<usize> {
        (0..self.bindings.len()).try_fold(1usize, |acc, pos| {
            let moves = self.tree.move_count(self.tree.dm_sets()[pos]);
            let per = moves.checked_pow(self.alphabet_len(pos) as u32)?;
            acc.checked_mul(per)
        })
    }
}

fn bind(tree: &DecisionTree, model: &EmpiricalModel) -> Result<Vec<Binding>, PolicyError> {
    let mut out = Vec::new();
    for &set in tree.dm_sets() {
        let id = &tree.info_set(set).id;
        let sites: Vec<usize> = (0..model.sites().len()).filter(|&i| &model.sites()[i].info_set == id).collect();
        let alphabet = match sites.first() {
            None => return Err(PolicyError::UnboundInfoSet(id.clone())),
            Some(&s) => &model.sites()[s].alphabet,
        };
        if sites.iter().any(|&s| &model.sites()[s].alphabet != alphabet) {
            return Err(PolicyError::BadBinding(id.clone()));
        }
        let visits: Vec<Option<usize>> = sites.iter().map(|&s| model.sites()[s].visit_index).collect();
        if let [None] = visits.as_slice() {
            out.push(Binding::Shared(sites[0]));
        } else if visits.iter().all(Option::is_some) {
            let mut ordered: Vec<(usize, usize)> =
                sites.iter().map(|&s| (model.sites()[s].visit_index.unwrap(), s)).collect();
            ordered.sort();
            if ordered.iter().enumerate().any(|(i, &(v, _))| v != i + 1) {
                return Err(PolicyError::BadBinding(id.clone()));
            }
            out.push(Binding::PerVisit(ordered.into_iter().map(|(_, s)| s).collect()));
        } else {
            return Err(PolicyError::BadBinding(id.clone()));
        }
    }
    Ok(out)
}

/// Deterministic policy: `maps[pos][outcome]` is the 0-based move at DM set `pos`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResponsePolicy {
    pub maps: Vec<Vec<usize>>,
}

/// Serialized policy: per site id, outcome label to move label.
pub type PolicyDoc = BTreeMap<String, BTreeMap<String, String>>;

impl ResponsePolicy {
    /// Policy ignoring signals: plays strategy `s` at every outcome.
    pub fn constant(sc: &SignalScenario, s: &Strategy) -> Self {
        ResponsePolicy { maps: (0..sc.bindings.len()).map(|p| vec![s.choices[p]; sc.alphabet_len(p)]).collect() }
    }

    pub fn validate(&self, sc: &SignalScenario) -> Result<(), PolicyError> {
        if self.maps.len() != sc.bindings.len() {
            return Err(PolicyError::InvalidPolicy(format!("{} maps for {} sets", self.maps.len(), sc.bindings.len())));
        }
        for (pos, map) in self.maps.iter().enumerate() {
            let moves = sc.tree.move_count(sc.tree.dm_sets()[pos]);
            if map.len() != sc.alphabet_len(pos) || map.iter().any(|&m| m >= moves) {
                return Err(PolicyError::InvalidPolicy(format!("map {pos} is {map:?}")));
            }
        }
        Ok(())
    }

    pub fn to_doc(&self, sc: &SignalScenario) -> PolicyDoc {
        let mut doc = PolicyDoc::new();
        for (pos, map) in self.maps.iter().enumerate() {
            let labels = sc.tree.move_labels(sc.tree.dm_sets()[pos]);
            for s in sc.sites_of(pos) {
                let site = &sc.model.sites()[s];
                let entry = site.alphabet.iter().cloned().zip(map.iter().map(|&m| labels[m].clone())).collect();
                doc.insert(site.id.clone(), entry);
            }
        }
        doc
    }

    pub fn from_doc(doc: &PolicyDoc, sc: &SignalScenario) -> Result<Self, PolicyError> {
        let mut maps = Vec::new();
        for pos in 0..sc.bindings.len() {
            let labels = sc.tree.move_labels(sc.tree.dm_sets()[pos]);
            let mut found: Option<Vec<usize>> = None;
            for s in sc.sites_of(pos) {
                let site = &sc.model.sites()[s];
                let Some(entry) = doc.get(&site.id) else { continue };
                let map = site
                    .alphabet
                    .iter()
                    .map(|o| {
                        let mv = entry
                            .get(o)
                            .ok_or_else(|| PolicyError::InvalidPolicy(format!("{}: no move for `{o}`", site.id)))?;
                        labels
                            .iter()
                            .position(|l| l == mv)
                            .ok_or_else(|| PolicyError::InvalidPolicy(format!("unknown move `{mv}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                match &found {
                    Some(prev) if prev != &map => {
                        return Err(PolicyError::InvalidPolicy(format!("visits of `{}` disagree", site.info_set)))
                    }
                    _ => found = Some(map),
                }
            }
            let id = &sc.tree.info_set(sc.tree.dm_sets()[pos]).id;
            maps.push(found.ok_or_else(|| PolicyError::InvalidPolicy(format!("no map for `{id}`")))?);
        }
        let p = ResponsePolicy { maps };
        p.validate(sc)?;
        Ok(p)
    }

    /// Compact description, e.g. `West: G→U, R→D; North: ...`.
    pub fn describe(&self, sc: &SignalScenario) -> String {
        self.maps
            .iter()
            .enumerate()
            .map(|(pos, map)| {
                let set = sc.tree.dm_sets()[pos];
                let labels = sc.tree.move_labels(set);
                let alphabet = &sc.model.sites()[sc.first_site(pos)].alphabet;
                let parts: Vec<String> = alphabet.iter().zip(map).map(|(o, &m)| format!("{o}→{}", labels[m])).collect();
                format!("{}: {}", sc.tree.info_set(set).id, parts.join(", "))
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Randomized policy: `maps[pos][outcome]` is a distribution over moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehavioralPolicy {
    pub maps: Vec<Vec<Vec<f64>>>,
}

// ---------------------------------------------------------------------------
// Evaluation

enum Source<'a> {
    Model,
    Fixed(&'a [usize]),
}

struct Walker<'a, F: Fn(usize, usize) -> Vec<(usize, f64)>> {
    sc: &'a SignalScenario,
    choose: F,
    source: Source<'a>,
    world: Option<&'a [usize]>,
}

#[derive(Default)]
struct WalkState {
    observed: Vec<(usize, usize)>,
    visits: Vec<usize>,
    nature: Vec<Option<usize>>,
}

impl<F: Fn(usize, usize) -> Vec<(usize, f64)>> Walker<'_, F> {
    fn walk(&self, n: NodeRef, st: &mut WalkState) -> Result<f64, PolicyError> {
        let tree = &self.sc.tree;
        let node = tree.node(n);
        let child = |b: usize| tree.child(n, b).ok_or(PolicyError::Play(PlayError::InvalidStrategy));
        match node.kind {
            NodeKind::Terminal => Ok(node.payoff.unwrap_or(0.0)),
            NodeKind::Nature => {
                let set = node.info_set.ok_or(PlayError::InvalidTree)?;
                let pos = tree.nature_position(set).ok_or(PlayError::InvalidTree)?;
                if let Some(w) = self.world {
                    return self.walk(child(w[pos])?, st);
                }
                // a Nature set crossed twice repeats its first choice, as in a world state
                if let Some(b) = st.nature[pos] {
                    return self.walk(child(b)?, st);
                }
                let probs = tree.nature_probs(set).ok_or(PlayError::InvalidTree)?;
                let mut total = 0.0;
                for (b, &p) in probs.iter().enumerate() {
                    if p > 0.0 {
                        st.nature[pos] = Some(b);
                        total += p * self.walk(child(b)?, st)?;
                    }
                }
                st.nature[pos] = None;
                Ok(total)
            }
            NodeKind::Dm => {
                let set = node.info_set.ok_or(PlayError::InvalidTree)?;
                let pos = tree.dm_position(set).ok_or(PlayError::InvalidTree)?;
                let visit = st.visits[pos];
                let site = match &self.sc.bindings[pos] {
                    Binding::Shared(s) => *s,
                    Binding::PerVisit(v) => *v.get(visit).ok_or_else(|| PolicyError::MissingVisit {
                        set: tree.info_set(set).id.clone(),
                        visit: visit + 1,
                    })?,
                };
                let known = st.observed.iter().find(|(s, _)| *s == site).map(|&(_, o)| o);
                let dist: Vec<(usize, f64)> = match (known, &self.source) {
                    (Some(o), _) => vec![(o, 1.0)],
                    (None, Source::Fixed(sig)) => vec![(sig[site], 1.0)],
                    (None, Source::Model) => match conditional_at_site(&self.sc.model, site, &st.observed, None) {
                        Ok(d) => d.into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect(),
                        // zero-probability branches contribute nothing
                        Err(BoxError::UnreachableBranch) => return Ok(0.0),
                        Err(e) => return Err(e.into()),
                    },
                };
                st.visits[pos] += 1;
                let mut total = 0.0;
                for (o, p) in dist {
                    let fresh = known.is_none();
                    if fresh {
                        st.observed.push((site, o));
                    }
                    for (mv, q) in (self.choose)(pos, o) {
                        if q > 0.0 {
                            total += p * q * self.walk(child(mv)?, st)?;
                        }
                    }
                    if fresh {
                        st.observed.pop();
                    }
                }
                st.visits[pos] -= 1;
                Ok(total)
            }
        }
    }
}

fn run_walk<F: Fn(usize, usize) -> Vec<(usize, f64)>>(sc: &SignalScenario, choose: F) -> Result<f64, PolicyError> {
    let root = sc.tree.root().ok_or(PlayError::InvalidTree)?;
    let fresh = || WalkState {
        observed: Vec::new(),
        visits: vec![0; sc.tree.dm_sets().len()],
        nature: vec![None; sc.tree.nature_sets().len()],
    };
    match &sc.coupling {
        NatureCoupling::Independent => {
            Walker { sc, choose, source: Source::Model, world: None }.walk(root, &mut fresh())
        }
        NatureCoupling::Joint(entries) => {
            let mut total = 0.0;
            for e in entries.iter().filter(|e| e.prob > 0.0) {
                let w = Walker { sc, choose: &choose, source: Source::Fixed(&e.signals), world: Some(&e.world) };
                total += e.prob * w.walk(root, &mut fresh())?;
            }
            Ok(total)
        }
    }
}

/// Expected payoff of a deterministic policy, by a weighted walk that draws each
/// signal from its conditional given the signals already seen on the play.
pub fn evaluate_policy(sc: &SignalScenario, policy: &ResponsePolicy) -> Result<f64, PolicyError> {
    policy.validate(sc)?;
    run_walk(sc, |pos, o| vec![(policy.maps[pos][o], 1.0)])
}

pub fn evaluate_behavioral(sc: &SignalScenario, policy: &BehavioralPolicy) -> Result<f64, PolicyError> {
    run_walk(sc, |pos, o| policy.maps[pos][o].iter().copied().enumerate().collect())
}

/// `Σ_m (μ∘f⁻¹)(m) π(m)`: pushes a joint measure through the policy's maps to a
/// distribution over pure strategies and averages their expected payoffs.
///
/// Each DM set must carry exactly one site of `mu`, matched by `info_set`.
pub fn pushforward_payoff(
    mu: &JointSignalMeasure,
    policy: &ResponsePolicy,
    tree: &DecisionTree,
    cap: usize,
) -> Result<f64, PolicyError> {
    if !is_kuhn(tree).kuhn {
        return Err(PolicyError::NotKuhn);
    }
    let site_of: Vec<usize> = tree
        .dm_sets()
        .iter()
        .map(|&s| {
            let id = &tree.info_set(s).id;
            mu.sites.iter().position(|x| &x.info_set == id).ok_or_else(|| PolicyError::UnboundInfoSet(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    if policy.maps.len() != site_of.len() {
        return Err(PolicyError::InvalidPolicy("map count does not match the tree".into()));
    }
    let mut mass: BTreeMap<Strategy, f64> = BTreeMap::new();
    for (i, &p) in mu.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let point = mu.point(i);
        let choices = site_of
            .iter()
            .enumerate()
            .map(|(pos, &s)| policy.maps[pos].get(point[s]).copied())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| PolicyError::InvalidPolicy("map shorter than alphabet".into()))?;
        *mass.entry(Strategy { choices }).or_insert(0.0) += p;
    }
    mass.iter().try_fold(0.0, |acc, (s, &p)| Ok(acc + p * expected_payoff(s, tree, cap)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOptimum {
    pub value: f64,
    /// Every policy within tolerance of the optimum, in enumeration order.
    pub argmax: Vec<ResponsePolicy>,
    pub evaluated: usize,
}

/// Decodes policy number `index`: DM sets in order (first most significant),
/// then outcomes in alphabet order.
pub fn policy_at(sc: &SignalScenario, mut index: usize) -> ResponsePolicy {
    let mut maps: Vec<Vec<usize>> = (0..sc.bindings.len()).map(|pos| vec![0; sc.alphabet_len(pos)]).collect();
    for pos in (0..maps.len()).rev() {
        let moves = sc.tree.move_count(sc.tree.dm_sets()[pos]);
        for slot in maps[pos].iter_mut().rev() {
            *slot = index % moves;
            index /= moves;
        }
    }
    ResponsePolicy { maps }
}

/// Best deterministic policy by exhaustive enumeration.
pub fn optimize_policy(sc: &SignalScenario, cap: usize) -> Result<PolicyOptimum, PolicyError> {
    let count = sc.policy_count().unwrap_or(usize::MAX);
    if count > cap {
        return Err(PolicyError::TooMany { count, cap });
    }
    let values: Vec<f64> =
        (0..count).into_par_iter().map(|i| evaluate_policy(sc, &policy_at(sc, i))).collect::<Result<_, _>>()?;
    let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = (0..count).filter(|&i| values[i] >= value - DEFAULT_TOL).map(|i| policy_at(sc, i)).collect();
    Ok(PolicyOptimum { value, argmax, evaluated: count })
}

// ---------------------------------------------------------------------------
// Exchangeable per-visit signals

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeableOptimum {
    pub value: f64,
    /// The information set crossed more than once.
    pub info_set: String,
    /// Probability per outcome sequence in `k^v`, first visit most significant.
    pub distribution: Vec<f64>,
    /// Response map at the repeated set, outcome to move.
    pub map: Vec<usize>,
    /// Moves at every DM set; the entry of the repeated set is its move on outcome 0.
    pub others: Strategy,
}

/// Expected payoff when the repeated set `pos` plays `map[o_i]` on its i-th visit and
/// every other DM set follows `base`.
fn sequence_payoff(
    tree: &DecisionTree,
    pos: usize,
    base: &Strategy,
    map: &[usize],
    seq: &[usize],
) -> Result<f64, PolicyError> {
    fn go(
        tree: &DecisionTree,
        n: NodeRef,
        pos: usize,
        base: &Strategy,
        moves: &[usize],
        visit: usize,
        nature: &mut Vec<Option<usize>>,
    ) -> Result<f64, PolicyError> {
        let node = tree.node(n);
        let set = node.info_set;
        match node.kind {
            NodeKind::Terminal => Ok(node.payoff.unwrap_or(0.0)),
            NodeKind::Nature => {
                let set = set.ok_or(PlayError::InvalidTree)?;
                let npos = tree.nature_position(set).ok_or(PlayError::InvalidTree)?;
                let probs = tree.nature_probs(set).ok_or(PlayError::InvalidTree)?;
                if let Some(b) = nature[npos] {
                    return go(tree, tree.child(n, b).ok_or(PlayError::InvalidTree)?, pos, base, moves, visit, nature);
                }
                let mut total = 0.0;
                for (b, &p) in probs.iter().enumerate() {
                    if p > 0.0 {
                        nature[npos] = Some(b);
                        let c = tree.child(n, b).ok_or(PlayError::InvalidTree)?;
                        total += p * go(tree, c, pos, base, moves, visit, nature)?;
                    }
                }
                nature[npos] = None;
                Ok(total)
            }
            NodeKind::Dm => {
                let set = set.ok_or(PlayError::InvalidTree)?;
                let p = tree.dm_position(set).ok_or(PlayError::InvalidTree)?;
                let (mv, next) = if p == pos {
                    let mv = *moves.get(visit).ok_or_else(|| PolicyError::MissingVisit {
                        set: tree.info_set(set).id.clone(),
                        visit: visit + 1,
                    })?;
                    (mv, visit + 1)
                } else {
                    (base.choices[p], visit)
                };
                go(tree, tree.child(n, mv).ok_or(PlayError::InvalidStrategy)?, pos, base, moves, next, nature)
            }
        }
    }
    let moves: Vec<usize> = seq.iter().map(|&o| map[o]).collect();
    let root = tree.root().ok_or(PlayError::InvalidTree)?;
    go(tree, root, pos, base, &moves, 0, &mut vec![None; tree.nature_sets().len()])
}

/// Maximises expected payoff over deterministic response maps at the repeated
/// information set, pure moves elsewhere, and exchangeable distributions of the
/// `v` per-visit signals on a `k`-letter alphabet (one LP per map).
pub fn classical_exchangeable_optimum(
    tree: &DecisionTree,
    k: usize,
    v: usize,
    cap: usize,
) -> Result<ExchangeableOptimum, PolicyError> {
    let repeated: Vec<usize> = (0..tree.dm_sets().len()).filter(|&p| tree.max_visits(tree.dm_sets()[p]) > 1).collect();
    let [pos] = repeated.as_slice() else { return Err(PolicyError::NoRepeatedSet) };
    let pos = *pos;
    let set = tree.dm_sets()[pos];
    if tree.max_visits(set) > v {
        return Err(PolicyError::MissingVisit { set: tree.info_set(set).id.clone(), visit: v + 1 });
    }
    let moves = tree.move_count(set);
    let points = k.checked_pow(v as u32).ok_or(PolicyError::TooMany { count: usize::MAX, cap })?;
    let maps = moves.checked_pow(k as u32).ok_or(PolicyError::TooMany { count: usize::MAX, cap })?;
    let bases = enumerate_strategies(tree, cap)?;
    let bases: Vec<Strategy> = bases.into_iter().filter(|s| s.choices[pos] == 0).collect();
    let total = bases.len().saturating_mul(maps).saturating_mul(points);
    if total > cap {
        return Err(PolicyError::TooMany { count: total, cap });
    }
    let digits = |mut i: usize, radix: usize, len: usize| {
        let mut d = vec![0; len];
        for slot in d.iter_mut().rev() {
            *slot = i % radix;
            i /= radix;
        }
        d
    };
    // exchangeability: μ(ω) = μ(ω with visits i, i+1 swapped)
    let mut rows = vec![vec![1.0; points]];
    let mut rhs = vec![1.0];
    for i in 0..points {
        let d = digits(i, k, v);
        for a in 0..v.saturating_sub(1) {
            let mut s = d.clone();
            s.swap(a, a + 1);
            let j = s.iter().fold(0, |acc, &x| acc * k + x);
            if j > i {
                let mut row = vec![0.0; points];
                row[i] = 1.0;
                row[j] = -1.0;
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }
    let mut best: Option<ExchangeableOptimum> = None;
    for base in &bases {
        for m in 0..maps {
            let map = digits(m, moves, k);
            let coeff: Vec<f64> = (0..points)
                .map(|i| sequence_payoff(tree, pos, base, &map, &digits(i, k, v)))
                .collect::<Result<_, _>>()?;
            let lp = LinearProgram {
                num_vars: points,
                rows: rows.clone(),
                rhs: rhs.clone(),
                objective: coeff.iter().map(|c| -c).collect(),
            };
            let (x, value) = match lp.solve(DEFAULT_TOL) {
                LpOutcome::Optimal { x, value } => (x, -value),
                other => return Err(PolicyError::Lp(format!("{other:?}"))),
            };
            if best.as_ref().is_none_or(|b| value > b.value + DEFAULT_TOL) {
                let mut others = base.clone();
                others.choices[pos] = map[0];
                best = Some(ExchangeableOptimum {
                    value,
                    info_set: tree.info_set(set).id.clone(),
                    distribution: x,
                    map,
                    others,
                });
            }
        }
    }
    best.ok_or(PolicyError::NoRepeatedSet)
}
