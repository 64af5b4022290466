//! Finite decision trees against Nature.
//!
//! A [`DecisionTree`] holds nodes tagged as DM decisions, Nature chance moves or
//! terminals, the edges between them (with 1-based branch numbering), an explicit
//! partition of non-terminal nodes into information sets, Nature's branch
//! probabilities and terminal payoffs.
//!
//! Construction only rejects dangling references. Everything else (single root,
//! branch counts, probability sums, ...) is reported by [`validate_tree`] as data,
//! so that candidate structures read from files can be diagnosed rather than refused.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::play::{enumerate_strategies, enumerate_world_states, induced_path, Strategy, WorldState};
use crate::{PlayError, DEFAULT_TOL};

/// Index of a node inside its owning [`DecisionTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef(pub usize);

/// Index of an information set inside its owning [`DecisionTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InfoSetRef(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Dm,
    Nature,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Dm,
    Nature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub info_set: Option<InfoSetRef>,
    pub payoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeRef,
    pub to: NodeRef,
    pub label: String,
    /// 1-based branch number, shared by corresponding branches across an information set.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoSet {
    pub id: String,
    pub player: Player,
    pub members: Vec<NodeRef>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge refers to unknown node `{0}`")]
    UnknownNode(String),
    #[error("nature_probs refers to unknown information set `{0}`")]
    UnknownInfoSet(String),
    #[error("information set `{0}` mixes DM and Nature nodes")]
    MixedInfoSet(String),
    #[error("node `{0}` of kind {1:?} cannot carry an information set")]
    MisplacedInfoSet(String, NodeKind),
    #[error("information set `{set}` has several immediate predecessors: {candidates:?}")]
    AmbiguousPredecessor { set: String, candidates: Vec<String> },
}

/// A finite rooted decision tree with a DM and Nature.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    info_sets: Vec<InfoSet>,
    nature_probs: Vec<Option<Vec<f64>>>,
    // edge indices per node, sorted by branch index
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    dm_sets: Vec<InfoSetRef>,
    nature_sets: Vec<InfoSetRef>,
}

impl DecisionTree {
    fn assemble(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        info_sets: Vec<InfoSet>,
        nature_probs: Vec<Option<Vec<f64>>>,
    ) -> Self {
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            out_edges[edge.from.0].push(e);
            in_edges[edge.to.0].push(e);
        }
        for list in &mut out_edges {
            list.sort_by_key(|&e| edges[e].index);
        }
        let dm_sets = (0..info_sets.len()).filter(|&i| info_sets[i].player == Player::Dm).map(InfoSetRef).collect();
        let nature_sets =
            (0..info_sets.len()).filter(|&i| info_sets[i].player == Player::Nature).map(InfoSetRef).collect();
        DecisionTree { nodes, edges, info_sets, nature_probs, out_edges, in_edges, dm_sets, nature_sets }
    }

    pub fn from_doc(doc: &TreeDoc) -> Result<Self, TreeError> {
        let mut node_index: HashMap<&str, usize> = HashMap::new();
        for (i, n) in doc.nodes.iter().enumerate() {
            if node_index.insert(n.id.as_str(), i).is_some() {
                return Err(TreeError::DuplicateNode(n.id.clone()));
            }
        }
        let mut set_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut info_sets: Vec<InfoSet> = Vec::new();
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (i, n) in doc.nodes.iter().enumerate() {
            let info_set = match n.kind {
                NodeKind::Terminal => {
                    if n.info_set.is_some() {
                        return Err(TreeError::MisplacedInfoSet(n.id.clone(), n.kind));
                    }
                    None
                }
                NodeKind::Dm | NodeKind::Nature => {
                    let player = if n.kind == NodeKind::Dm { Player::Dm } else { Player::Nature };
                    // nodes without an explicit set form their own singleton set
                    let name = n.info_set.clone().unwrap_or_else(|| n.id.clone());
                    let idx = *set_index.entry(name.clone()).or_insert_with(|| {
                        info_sets.push(InfoSet { id: name.clone(), player, members: Vec::new() });
                        info_sets.len() - 1
                    });
                    if info_sets[idx].player != player {
                        return Err(TreeError::MixedInfoSet(name));
                    }
                    info_sets[idx].members.push(NodeRef(i));
                    Some(InfoSetRef(idx))
                }
            };
            nodes.push(Node { id: n.id.clone(), kind: n.kind, info_set, payoff: n.payoff });
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let from = *node_index.get(e.from.as_str()).ok_or_else(|| TreeError::UnknownNode(e.from.clone()))?;
            let to = *node_index.get(e.to.as_str()).ok_or_else(|| TreeError::UnknownNode(e.to.clone()))?;
            edges.push(Edge {
                from: NodeRef(from),
                to: NodeRef(to),
                label: e.branch_label.clone(),
                index: e.branch_index,
            });
        }
        let mut nature_probs = vec![None; info_sets.len()];
        for (name, probs) in &doc.nature_probs {
            let idx = *set_index.get(name).ok_or_else(|| TreeError::UnknownInfoSet(name.clone()))?;
            if info_sets[idx].player != Player::Nature {
                return Err(TreeError::UnknownInfoSet(name.clone()));
            }
            nature_probs[idx] = Some(probs.clone());
        }
        Ok(Self::assemble(nodes, edges, info_sets, nature_probs))
    }

    pub fn to_doc(&self) -> TreeDoc {
        // first members of each information set lead, so that re-reading the
        // document reproduces the information-set order
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        let rank = |i: usize| {
            self.info_sets
                .iter()
                .position(|s| s.members.first() == Some(&NodeRef(i)))
                .unwrap_or(self.info_sets.len() + i)
        };
        order.sort_by_key(|&i| rank(i));
        let nodes = order
            .iter()
            .map(|&i| &self.nodes[i])
            .map(|n| NodeDoc {
                id: n.id.clone(),
                kind: n.kind,
                info_set: n.info_set.map(|s| self.info_sets[s.0].id.clone()),
                payoff: n.payoff,
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeDoc {
                from: self.nodes[e.from.0].id.clone(),
                to: self.nodes[e.to.0].id.clone(),
                branch_label: e.label.clone(),
                branch_index: e.index,
            })
            .collect();
        let nature_probs = self
            .nature_probs
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|p| (self.info_sets[i].id.clone(), p.clone())))
            .collect();
        TreeDoc { nodes, edges, nature_probs }
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let doc: TreeDoc = serde_json::from_str(text)?;
        Ok(Self::from_doc(&doc)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("tree documents always serialize")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, n: NodeRef) -> &Node {
        &self.nodes[n.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn info_sets(&self) -> &[InfoSet] {
        &self.info_sets
    }

    pub fn info_set(&self, s: InfoSetRef) -> &InfoSet {
        &self.info_sets[s.0]
    }

    /// DM information sets in declaration order; strategies are indexed by this order.
    pub fn dm_sets(&self) -> &[InfoSetRef] {
        &self.dm_sets
    }

    /// Nature information sets in declaration order; world states are indexed by this order.
    pub fn nature_sets(&self) -> &[InfoSetRef] {
        &self.nature_sets
    }

    /// Position of a DM set in [`Self::dm_sets`].
    pub fn dm_position(&self, s: InfoSetRef) -> Option<usize> {
        self.dm_sets.iter().position(|&x| x == s)
    }

    pub fn nature_position(&self, s: InfoSetRef) -> Option<usize> {
        self.nature_sets.iter().position(|&x| x == s)
    }

    pub fn find_node(&self, id: &str) -> Option<NodeRef> {
        self.nodes.iter().position(|n| n.id == id).map(NodeRef)
    }

    pub fn find_info_set(&self, id: &str) -> Option<InfoSetRef> {
        self.info_sets.iter().position(|s| s.id == id).map(InfoSetRef)
    }

    pub fn nature_probs(&self, s: InfoSetRef) -> Option<&[f64]> {
        self.nature_probs[s.0].as_deref()
    }

    /// Children ordered by branch index.
    pub fn children(&self, n: NodeRef) -> impl Iterator<Item = NodeRef> + '_ {
        self.out_edges[n.0].iter().map(move |&e| self.edges[e].to)
    }

    pub fn child(&self, n: NodeRef, branch: usize) -> Option<NodeRef> {
        self.out_edges[n.0].get(branch).map(|&e| self.edges[e].to)
    }

    pub fn branch_count(&self, n: NodeRef) -> usize {
        self.out_edges[n.0].len()
    }

    /// Number of moves at an information set, taken from its first member.
    pub fn move_count(&self, s: InfoSetRef) -> usize {
        self.info_sets[s.0].members.first().map_or(0, |&n| self.branch_count(n))
    }

    /// Branch labels of an information set, taken from its first member.
    pub fn move_labels(&self, s: InfoSetRef) -> Vec<String> {
        match self.info_sets[s.0].members.first() {
            Some(&n) => self.out_edges[n.0].iter().map(|&e| self.edges[e].label.clone()).collect(),
            None => Vec::new(),
        }
    }

    pub fn parent(&self, n: NodeRef) -> Option<NodeRef> {
        self.in_edges[n.0].first().map(|&e| self.edges[e].from)
    }

    /// Branch position (0-based) through which `n` is entered from its parent.
    pub fn entry_branch(&self, n: NodeRef) -> Option<usize> {
        let e = *self.in_edges[n.0].first()?;
        let parent = self.edges[e].from;
        self.out_edges[parent.0].iter().position(|&x| x == e)
    }

    pub fn root(&self) -> Option<NodeRef> {
        let roots: Vec<_> = (0..self.nodes.len()).filter(|&i| self.in_edges[i].is_empty()).collect();
        match roots.as_slice() {
            [r] => Some(NodeRef(*r)),
            _ => None,
        }
    }

    /// Nodes from the root down to `n`, inclusive.
    pub fn path_to(&self, n: NodeRef) -> Vec<NodeRef> {
        let mut path = vec![n];
        let mut cur = n;
        while let Some(p) = self.parent(cur) {
            if path.len() > self.nodes.len() {
                break;
            }
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Every root-to-terminal path, as node lists.
    pub fn terminal_paths(&self) -> Vec<Vec<NodeRef>> {
        let mut out = Vec::new();
        if let Some(root) = self.root() {
            let mut stack = vec![vec![root]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if self.branch_count(last) == 0 || path.len() > self.nodes.len() {
                    out.push(path);
                    continue;
                }
                for c in self.children(last).collect::<Vec<_>>().into_iter().rev() {
                    let mut next = path.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
        out
    }

    /// Sets of DM information sets that co-occur on some root-to-terminal path.
    pub fn dm_cooccurrences(&self) -> Vec<BTreeSet<InfoSetRef>> {
        let mut seen = BTreeSet::new();
        for path in self.terminal_paths() {
            let sets: BTreeSet<InfoSetRef> = path
                .iter()
                .filter(|&&n| self.nodes[n.0].kind == NodeKind::Dm)
                .filter_map(|&n| self.nodes[n.0].info_set)
                .collect();
            seen.insert(sets);
        }
        seen.into_iter().collect()
    }

    /// Maximum number of visits to `s` along any root-to-terminal path.
    pub fn max_visits(&self, s: InfoSetRef) -> usize {
        self.terminal_paths()
            .iter()
            .map(|p| p.iter().filter(|&&n| self.nodes[n.0].info_set == Some(s)).count())
            .max()
            .unwrap_or(0)
    }

    /// Returns a copy with every terminal payoff mapped through `f`.
    pub fn map_payoffs(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut t = self.clone();
        for n in &mut t.nodes {
            if let Some(p) = n.payoff.as_mut() {
                *p = f(*p);
            }
        }
        t
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

// ---------------------------------------------------------------------------
// JSON document form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub nature_probs: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info_set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub branch_label: String,
    pub branch_index: usize,
}

// ---------------------------------------------------------------------------
// Builder used by fixtures and generators

/// Incremental construction of trees in code.
///
/// Children are numbered in the order they are attached; branch labels come from
/// the information set's move labels.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    info_sets: Vec<InfoSet>,
    labels: Vec<Vec<String>>,
    nature_probs: Vec<Option<Vec<f64>>>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dm_set(&mut self, id: &str, moves: &[&str]) -> InfoSetRef {
        self.info_sets.push(InfoSet { id: id.to_string(), player: Player::Dm, members: Vec::new() });
        self.labels.push(moves.iter().map(|s| s.to_string()).collect());
        self.nature_probs.push(None);
        InfoSetRef(self.info_sets.len() - 1)
    }

    pub fn nature_set(&mut self, id: &str, moves: &[&str], probs: &[f64]) -> InfoSetRef {
        self.info_sets.push(InfoSet { id: id.to_string(), player: Player::Nature, members: Vec::new() });
        self.labels.push(moves.iter().map(|s| s.to_string()).collect());
        self.nature_probs.push(Some(probs.to_vec()));
        InfoSetRef(self.info_sets.len() - 1)
    }

    fn push(&mut self, kind: NodeKind, info_set: Option<InfoSetRef>, payoff: Option<f64>) -> NodeRef {
        let id = format!("n{}", self.nodes.len());
        self.nodes.push(Node { id, kind, info_set, payoff });
        let n = NodeRef(self.nodes.len() - 1);
        if let Some(s) = info_set {
            self.info_sets[s.0].members.push(n);
        }
        n
    }

    pub fn decision(&mut self, set: InfoSetRef) -> NodeRef {
        self.push(NodeKind::Dm, Some(set), None)
    }

    pub fn chance(&mut self, set: InfoSetRef) -> NodeRef {
        self.push(NodeKind::Nature, Some(set), None)
    }

    pub fn terminal(&mut self, payoff: f64) -> NodeRef {
        self.push(NodeKind::Terminal, None, Some(payoff))
    }

    /// Attaches `child` as the next branch of `parent`.
    pub fn attach(&mut self, parent: NodeRef, child: NodeRef) {
        let index = self.edges.iter().filter(|e| e.from == parent).count() + 1;
        let label = self.nodes[parent.0]
            .info_set
            .and_then(|s| self.labels[s.0].get(index - 1).cloned())
            .unwrap_or_else(|| index.to_string());
        self.edges.push(Edge { from: parent, to: child, label, index });
    }

    pub fn build(self) -> DecisionTree {
        DecisionTree::assemble(self.nodes, self.edges, self.info_sets, self.nature_probs)
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NoRoot,
    MultipleRoots,
    MultipleParents,
    Unreachable,
    LeafNotTerminal,
    TerminalWithChildren,
    MissingPayoff,
    NonFinitePayoff,
    BranchNumbering,
    BranchCountMismatch,
    MissingNatureProbs,
    InvalidNatureProbs,
    EmptyInfoSet,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::NoRoot => "no root",
            ViolationKind::MultipleRoots => "multiple roots",
            ViolationKind::MultipleParents => "multiple parents",
            ViolationKind::Unreachable => "unreachable node",
            ViolationKind::LeafNotTerminal => "leaf is not terminal",
            ViolationKind::TerminalWithChildren => "terminal has children",
            ViolationKind::MissingPayoff => "missing payoff",
            ViolationKind::NonFinitePayoff => "non-finite payoff",
            ViolationKind::BranchNumbering => "branch numbering",
            ViolationKind::BranchCountMismatch => "branch count mismatch",
            ViolationKind::MissingNatureProbs => "missing nature probabilities",
            ViolationKind::InvalidNatureProbs => "invalid nature probabilities",
            ViolationKind::EmptyInfoSet => "empty information set",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

/// Checks every structural condition on a candidate tree except the Kuhn
/// condition, which [`is_kuhn`] reports separately. An empty list means valid.
pub fn validate_tree(tree: &DecisionTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });
    let n = tree.nodes.len();
    let roots: Vec<usize> = (0..n).filter(|&i| tree.in_edges[i].is_empty()).collect();
    match roots.len() {
        0 => push(ViolationKind::NoRoot, "every node has a parent".into()),
        1 => {}
        _ => push(
            ViolationKind::MultipleRoots,
            roots.iter().map(|&i| tree.nodes[i].id.clone()).collect::<Vec<_>>().join(", "),
        ),
    }
    for i in 0..n {
        if tree.in_edges[i].len() > 1 {
            push(ViolationKind::MultipleParents, tree.nodes[i].id.clone());
        }
    }
    if let [root] = roots.as_slice() {
        let mut seen = vec![false; n];
        let mut stack = vec![*root];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            stack.extend(tree.out_edges[i].iter().map(|&e| tree.edges[e].to.0));
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                push(ViolationKind::Unreachable, tree.nodes[i].id.clone());
            }
        }
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        let k = tree.out_edges[i].len();
        match node.kind {
            NodeKind::Terminal => {
                if k > 0 {
                    push(ViolationKind::TerminalWithChildren, node.id.clone());
                }
                match node.payoff {
                    None => push(ViolationKind::MissingPayoff, node.id.clone()),
                    Some(p) if !p.is_finite() => push(ViolationKind::NonFinitePayoff, node.id.clone()),
                    _ => {}
                }
            }
            _ if k == 0 => push(ViolationKind::LeafNotTerminal, node.id.clone()),
            _ => {}
        }
        let numbering: Vec<usize> = tree.out_edges[i].iter().map(|&e| tree.edges[e].index).collect();
        if numbering.iter().enumerate().any(|(pos, &idx)| idx != pos + 1) {
            push(ViolationKind::BranchNumbering, format!("{} has branches {:?}", node.id, numbering));
        }
    }
    for (s, set) in tree.info_sets.iter().enumerate() {
        if set.members.is_empty() {
            push(ViolationKind::EmptyInfoSet, set.id.clone());
            continue;
        }
        let counts: Vec<usize> = set.members.iter().map(|&m| tree.branch_count(m)).collect();
        if counts.iter().any(|&c| c != counts[0]) {
            push(ViolationKind::BranchCountMismatch, format!("{} has branch counts {:?}", set.id, counts));
        }
        if set.player == Player::Nature {
            match &tree.nature_probs[s] {
                None => push(ViolationKind::MissingNatureProbs, set.id.clone()),
                Some(p) => {
                    let sum: f64 = p.iter().sum();
                    if p.len() != counts[0]
                        || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite())
                        || (sum - 1.0).abs() > DEFAULT_TOL
                    {
                        push(ViolationKind::InvalidNatureProbs, format!("{}: {:?}", set.id, p));
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Kuhn condition

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuhnReport {
    pub kuhn: bool,
    /// First root-to-terminal path crossing an information set twice, with that set.
    pub offending: Option<(Vec<NodeRef>, InfoSetRef)>,
}

/// True iff every root-to-terminal path crosses each information set (DM or
/// Nature) at most once.
pub fn is_kuhn(tree: &DecisionTree) -> KuhnReport {
    for path in tree.terminal_paths() {
        let mut seen = BTreeSet::new();
        for &n in &path {
            if let Some(s) = tree.nodes[n.0].info_set {
                if !seen.insert(s) {
                    return KuhnReport { kuhn: false, offending: Some((path.clone(), s)) };
                }
            }
        }
    }
    KuhnReport { kuhn: true, offending: None }
}

// ---------------------------------------------------------------------------
// Allowed nodes, perfect recall, precedence

/// Node or information set target for [`allowed_under`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Node(NodeRef),
    InfoSet(InfoSetRef),
}

/// Whether some world state routes `s` through the target.
///
/// A node is reachable under `s` exactly when every DM choice on its root path
/// agrees with `s` and Nature's choices on that path are consistent per Nature
/// information set, so the path is checked directly instead of enumerating states.
pub fn allowed_under(target: Target, s: &Strategy, tree: &DecisionTree) -> bool {
    match target {
        Target::Node(n) => node_allowed(n, Some(s), tree),
        Target::InfoSet(set) => tree.info_sets[set.0].members.iter().any(|&n| node_allowed(n, Some(s), tree)),
    }
}

/// Path consistency check; `None` for the strategy means any DM choices are allowed
/// as long as they are consistent within each DM information set.
fn node_allowed(n: NodeRef, s: Option<&Strategy>, tree: &DecisionTree) -> bool {
    let path = tree.path_to(n);
    let mut fixed: HashMap<InfoSetRef, usize> = HashMap::new();
    for w in path.windows(2) {
        let (parent, child) = (w[0], w[1]);
        let Some(set) = tree.nodes[parent.0].info_set else { return false };
        let Some(branch) = tree.entry_branch(child) else { return false };
        if let (Some(s), Player::Dm) = (s, tree.info_sets[set.0].player) {
            match tree.dm_position(set) {
                Some(pos) if s.choices.get(pos) == Some(&branch) => {}
                _ => return false,
            }
        }
        if *fixed.entry(set).or_insert(branch) != branch {
            return false;
        }
    }
    true
}

/// Witness that perfect recall fails: under `strategy`, node `allowed` of
/// `info_set` is reachable while `not_allowed` is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallViolation {
    pub strategy: Strategy,
    pub info_set: InfoSetRef,
    pub allowed: NodeRef,
    pub not_allowed: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub perfect: bool,
    pub counterexample: Option<RecallViolation>,
}

/// Checks perfect recall by quantifying over all strategies, DM information sets
/// and node pairs. Bounded by the strategy cap.
pub fn has_perfect_recall(tree: &DecisionTree, cap: usize) -> Result<RecallReport, PlayError> {
    for s in enumerate_strategies(tree, cap)? {
        for &set in tree.dm_sets() {
            let members = &tree.info_sets[set.0].members;
            let allowed: Vec<bool> = members.iter().map(|&n| node_allowed(n, Some(&s), tree)).collect();
            if let (Some(a), Some(b)) = (allowed.iter().position(|&x| x), allowed.iter().position(|&x| !x)) {
                return Ok(RecallReport {
                    perfect: false,
                    counterexample: Some(RecallViolation {
                        strategy: s,
                        info_set: set,
                        allowed: members[a],
                        not_allowed: members[b],
                    }),
                });
            }
        }
    }
    Ok(RecallReport { perfect: true, counterexample: None })
}

/// `first` precedes `second` if the root path of some node of `second` passes
/// strictly through some node of `first`. On non-Kuhn trees this may hold with
/// `first == second`.
pub fn precedes(first: InfoSetRef, second: InfoSetRef, tree: &DecisionTree) -> bool {
    tree.info_sets[second.0].members.iter().any(|&n2| {
        let path = tree.path_to(n2);
        path[..path.len() - 1].iter().any(|&a| tree.nodes[a.0].info_set == Some(first))
    })
}

/// The immediate DM predecessor of `set` under the precedence relation.
///
/// Uniqueness is only guaranteed with perfect recall and non-trivial decision
/// nodes; when it fails the candidates are returned as an error.
pub fn immediate_predecessor(set: InfoSetRef, tree: &DecisionTree) -> Result<Option<InfoSetRef>, TreeError> {
    let preds: Vec<InfoSetRef> =
        tree.dm_sets().iter().copied().filter(|&p| p != set && precedes(p, set, tree)).collect();
    let immediate: Vec<InfoSetRef> = preds
        .iter()
        .copied()
        .filter(|&p| !preds.iter().any(|&k| k != p && precedes(p, k, tree) && precedes(k, set, tree)))
        .collect();
    match immediate.as_slice() {
        [] => Ok(None),
        [one] => Ok(Some(*one)),
        many => Err(TreeError::AmbiguousPredecessor {
            set: tree.info_sets[set.0].id.clone(),
            candidates: many.iter().map(|s| tree.info_sets[s.0].id.clone()).collect(),
        }),
    }
}

/// The event `[I]`: world states under which some strategy reaches `set`.
///
/// Computed by enumerating strategies and world states.
pub fn info_event(set: InfoSetRef, tree: &DecisionTree, cap: usize) -> Result<Vec<WorldState>, PlayError> {
    let strategies = enumerate_strategies(tree, cap)?;
    let states = enumerate_world_states(tree, cap)?;
    if strategies.len().saturating_mul(states.len()) > cap {
        return Err(PlayError::TooMany { count: strategies.len().saturating_mul(states.len()), cap });
    }
    Ok(states
        .into_iter()
        .filter(|w| {
            strategies.iter().any(|s| {
                induced_path(s, w, tree)
                    .map(|p| p.nodes.iter().any(|&n| tree.nodes[n.0].info_set == Some(set)))
                    .unwrap_or(false)
            })
        })
        .collect())
}
