//! Random trees and signal models for property tests and randomized demos.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::boxes::{Context, EmpiricalModel, JointSignalMeasure, Site};
use crate::tree::{has_perfect_recall, is_kuhn, DecisionTree, InfoSetRef, NodeKind, TreeBuilder};
use crate::{DEFAULT_CAP, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_nodes: usize,
    /// Probability that an internal node is a Nature node.
    pub nature_share: f64,
    /// Force a Nature node at the root.
    pub nature_root: bool,
    /// Reject trees whose binary-signal policy space exceeds this.
    pub max_policies: usize,
    /// Chance that a perfect-recall candidate joins the previous compatible set.
    pub merge_prob: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 4,
            max_branching: 3,
            max_nodes: 16,
            nature_share: 0.4,
            nature_root: false,
            max_policies: 1 << 16,
            merge_prob: 0.7,
        }
    }
}

impl TreeConfig {
    /// Shallow trees under a wide Nature root, so that several DM sets lie on
    /// disjoint plays and non-classical cores can be placed on them.
    pub fn wide_nature() -> Self {
        TreeConfig {
            max_depth: 3,
            max_branching: 4,
            max_nodes: 20,
            nature_share: 0.2,
            nature_root: true,
            max_policies: 1 << 16,
            merge_prob: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
struct Raw {
    kind: NodeKind,
    children: Vec<usize>,
    parent: Option<usize>,
    payoff: f64,
    probs: Vec<f64>,
}

fn raw_tree<R: Rng>(rng: &mut R, cfg: &TreeConfig) -> Vec<Raw> {
    let mut nodes = vec![Raw { kind: NodeKind::Terminal, children: vec![], parent: None, payoff: 0.0, probs: vec![] }];
    let mut queue = vec![(0usize, 0usize)];
    let mut qi = 0;
    while qi < queue.len() {
        let (i, depth) = queue[qi];
        qi += 1;
        let k = rng.gen_range(2..=cfg.max_branching.max(2));
        let expand = depth < cfg.max_depth
            && nodes.len() + k <= cfg.max_nodes
            && (i == 0 || rng.gen_bool(if depth < 2 { 0.7 } else { 0.4 }));
        if !expand {
            nodes[i].payoff = rng.gen_range(-4..=6) as f64;
            continue;
        }
        let nature = if i == 0 && cfg.nature_root { true } else { rng.gen_bool(cfg.nature_share) };
        if nature {
            nodes[i].kind = NodeKind::Nature;
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(1..=4) as f64).collect();
            let s: f64 = w.iter().sum();
            nodes[i].probs = w.iter().map(|x| x / s).collect();
        } else {
            nodes[i].kind = NodeKind::Dm;
        }
        for _ in 0..k {
            let c = nodes.len();
            nodes.push(Raw { kind: NodeKind::Terminal, children: vec![], parent: Some(i), payoff: 0.0, probs: vec![] });
            nodes[i].children.push(c);
            queue.push((c, depth + 1));
        }
    }
    nodes
}

fn is_ancestor(nodes: &[Raw], a: usize, mut b: usize) -> bool {
    while let Some(p) = nodes[b].parent {
        if p == a {
            return true;
        }
        b = p;
    }
    false
}

/// Builds a tree from raw nodes and a DM set label per node (`usize::MAX` for none).
fn assemble(nodes: &[Raw], dm_set: &[usize]) -> DecisionTree {
    let mut b = TreeBuilder::new();
    let mut set_refs: BTreeMap<usize, InfoSetRef> = BTreeMap::new();
    let mut refs = vec![None; nodes.len()];
    // breadth-first order so set declaration follows first appearance
    let mut order = vec![0usize];
    let mut qi = 0;
    while qi < order.len() {
        order.extend(nodes[order[qi]].children.iter().copied());
        qi += 1;
    }
    let mut nature_count = 0;
    for &i in &order {
        let n = &nodes[i];
        let r = match n.kind {
            NodeKind::Terminal => b.terminal(n.payoff),
            NodeKind::Nature => {
                let labels: Vec<String> = (1..=n.children.len()).map(|k| format!("c{k}")).collect();
                let l: Vec<&str> = labels.iter().map(String::as_str).collect();
                let s = b.nature_set(&format!("N{nature_count}"), &l, &n.probs);
                nature_count += 1;
                b.chance(s)
            }
            NodeKind::Dm => {
                let next = set_refs.len();
                let s = *set_refs.entry(dm_set[i]).or_insert_with(|| {
                    let labels: Vec<String> = (1..=n.children.len()).map(|k| format!("m{k}")).collect();
                    let l: Vec<&str> = labels.iter().map(String::as_str).collect();
                    b.dm_set(&format!("I{next}"), &l)
                });
                b.decision(s)
            }
        };
        refs[i] = Some(r);
    }
    for &i in &order {
        for &c in &nodes[i].children {
            b.attach(refs[i].unwrap(), refs[c].unwrap());
        }
    }
    b.build()
}

/// Binary-signal policy space size: product over DM sets of moves².
pub fn binary_policy_space(tree: &DecisionTree) -> usize {
    tree.dm_sets().iter().fold(1usize, |acc, &s| acc.saturating_mul(tree.move_count(s).pow(2)))
}

/// Kuhn tree with perfect recall: DM nodes are merged only when their own
/// (information set, move) histories coincide, so no strategy can tell them apart.
pub fn random_perfect_recall_tree<R: Rng>(rng: &mut R, cfg: &TreeConfig) -> DecisionTree {
    loop {
        let nodes = raw_tree(rng, cfg);
        let mut dm_set = vec![usize::MAX; nodes.len()];
        let mut history: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
        let mut next_set = 0;
        // process nodes level by level in DM-ancestor count
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        let dm_depth = |i: usize| {
            let mut d = 0;
            let mut cur = i;
            while let Some(p) = nodes[cur].parent {
                if nodes[p].kind == NodeKind::Dm {
                    d += 1;
                }
                cur = p;
            }
            d
        };
        order.sort_by_key(|&i| (dm_depth(i), i));
        let mut start = 0;
        while start < order.len() {
            let d = dm_depth(order[start]);
            let end = start + order[start..].iter().take_while(|&&i| dm_depth(i) == d).count();
            // histories of this level are final: ancestors have their sets
            for &i in &order[start..end] {
                let mut h = Vec::new();
                let mut cur = i;
                while let Some(p) = nodes[cur].parent {
                    if nodes[p].kind == NodeKind::Dm {
                        let branch = nodes[p].children.iter().position(|&c| c == cur).unwrap();
                        h.push((dm_set[p], branch));
                    }
                    cur = p;
                }
                h.reverse();
                history[i] = h;
            }
            let mut groups: BTreeMap<(Vec<(usize, usize)>, usize), Vec<usize>> = BTreeMap::new();
            for &i in &order[start..end] {
                if nodes[i].kind == NodeKind::Dm {
                    groups.entry((history[i].clone(), nodes[i].children.len())).or_default().push(i);
                }
            }
            for (_, members) in groups {
                let mut current = None;
                for i in members {
                    let set = match current {
                        Some(s) if rng.gen_bool(cfg.merge_prob) => s,
                        _ => {
                            next_set += 1;
                            next_set - 1
                        }
                    };
                    current = Some(set);
                    dm_set[i] = set;
                }
            }
            start = end;
        }
        let tree = assemble(&nodes, &dm_set);
        if binary_policy_space(&tree) <= cfg.max_policies {
            return tree;
        }
    }
}

/// Kuhn tree without perfect recall, built by merging DM nodes with equal branch
/// counts that never lie on a common path.
pub fn random_imperfect_kuhn_tree<R: Rng>(rng: &mut R, cfg: &TreeConfig) -> DecisionTree {
    loop {
        let nodes = raw_tree(rng, cfg);
        let mut dm: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].kind == NodeKind::Dm).collect();
        if dm.len() < 2 {
            continue;
        }
        dm.shuffle(rng);
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for &i in &dm {
            let candidates: Vec<usize> = (0..sets.len())
                .filter(|&s| {
                    nodes[sets[s][0]].children.len() == nodes[i].children.len()
                        && sets[s].iter().all(|&j| !is_ancestor(&nodes, i, j) && !is_ancestor(&nodes, j, i))
                })
                .collect();
            match candidates.choose(rng) {
                Some(&s) if rng.gen_bool(0.8) => sets[s].push(i),
                _ => sets.push(vec![i]),
            }
        }
        let mut dm_set = vec![usize::MAX; nodes.len()];
        for (s, members) in sets.iter().enumerate() {
            for &i in members {
                dm_set[i] = s;
            }
        }
        let tree = assemble(&nodes, &dm_set);
        if binary_policy_space(&tree) > cfg.max_policies {
            continue;
        }
        debug_assert!(is_kuhn(&tree).kuhn);
        if !has_perfect_recall(&tree, DEFAULT_CAP).map(|r| r.perfect).unwrap_or(true) {
            return tree;
        }
    }
}

/// Random probability vector of length `n` with strictly positive entries.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-9..1.0f64).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random joint measure over binary sites bound to up to `max_sites` DM sets of `tree`.
pub fn random_joint<R: Rng>(rng: &mut R, tree: &DecisionTree, max_sites: usize) -> JointSignalMeasure {
    let mut sets: Vec<InfoSetRef> = tree.dm_sets().to_vec();
    sets.shuffle(rng);
    let count = rng.gen_range(1..=max_sites.max(1)).min(sets.len());
    let mut chosen: Vec<InfoSetRef> = sets[..count].to_vec();
    chosen.sort();
    let sites: Vec<Site> = chosen
        .iter()
        .map(|&s| {
            let id = &tree.info_set(s).id;
            Site::new(&format!("{id}.sig"), id, &["0", "1"])
        })
        .collect();
    let n = 1usize << sites.len();
    JointSignalMeasure::new(sites, random_distribution(rng, n), DEFAULT_TOL).expect("normalized")
}

/// Joint measure with one binary site per DM set of `tree`.
pub fn random_full_joint<R: Rng>(rng: &mut R, tree: &DecisionTree) -> JointSignalMeasure {
    let sites: Vec<Site> = tree
        .dm_sets()
        .iter()
        .map(|&s| {
            let id = &tree.info_set(s).id;
            Site::new(&format!("{id}.sig"), id, &["0", "1"])
        })
        .collect();
    let n = 1usize << sites.len();
    JointSignalMeasure::new(sites, random_distribution(rng, n), DEFAULT_TOL).expect("normalized")
}

/// Non-classical correlations placed on information sets that never share a play.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Core {
    /// Popescu–Rohrlich box mixed with white noise, on four sets `x0, x1, y0, y1`.
    Pr { visibility: f64 },
    /// Three sites with `a = b`, `b = c`, `a ≠ c` each holding with probability `(1+v)/2`.
    Triangle { visibility: f64 },
}

#[derive(Debug, Clone)]
pub struct NoSignalingInstance {
    pub model: EmpiricalModel,
    pub core: Option<Core>,
}

/// DM sets pairwise never crossed on a common play, chosen greedily in random order.
pub fn exclusive_sets<R: Rng>(rng: &mut R, tree: &DecisionTree, max: usize) -> Vec<InfoSetRef> {
    let co = tree.dm_cooccurrences();
    let together = |a: InfoSetRef, b: InfoSetRef| co.iter().any(|c| c.contains(&a) && c.contains(&b));
    let mut sets = tree.dm_sets().to_vec();
    sets.shuffle(rng);
    let mut out: Vec<InfoSetRef> = Vec::new();
    for s in sets {
        if out.len() < max && out.iter().all(|&o| !together(o, s)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

/// A no-signaling model with one binary site per DM set.
///
/// Each play's set of DM information sets is a context. Sites outside the core
/// follow a random classical joint; core sites are uniform within plays and
/// additionally share contexts carrying the core's correlations. With a core and
/// visibility above the classical threshold the model is not extendable.
pub fn random_no_signaling_model<R: Rng>(rng: &mut R, tree: &DecisionTree) -> NoSignalingInstance {
    let dm = tree.dm_sets();
    let sites: Vec<Site> = dm
        .iter()
        .map(|&s| {
            let id = &tree.info_set(s).id;
            Site::new(&format!("{id}.sig"), id, &["0", "1"])
        })
        .collect();
    let site_of = |s: InfoSetRef| tree.dm_position(s).expect("dm set");
    let excl = exclusive_sets(rng, tree, 4);
    let visibility = rng.gen_range(0.6..=1.0);
    let (core, core_sites): (Option<Core>, Vec<usize>) = match excl.len() {
        4 => (Some(Core::Pr { visibility }), excl.iter().map(|&s| site_of(s)).collect()),
        3 => (Some(Core::Triangle { visibility }), excl.iter().map(|&s| site_of(s)).collect()),
        _ => (None, Vec::new()),
    };
    let classical: Vec<usize> = (0..sites.len()).filter(|s| !core_sites.contains(s)).collect();
    let mu = random_distribution(rng, 1 << classical.len());
    let mu_marginal = |subset: &[usize]| -> Vec<f64> {
        let mut out = vec![0.0; 1 << subset.len()];
        for (i, &p) in mu.iter().enumerate() {
            let idx = subset.iter().fold(0, |acc, s| {
                let pos = classical.iter().position(|c| c == s).unwrap();
                let bit = (i >> (classical.len() - 1 - pos)) & 1;
                acc * 2 + bit
            });
            out[idx] += p;
        }
        out
    };
    let mut contexts = Vec::new();
    for play in tree.dm_cooccurrences() {
        let ctx: Vec<usize> = play.iter().map(|&s| site_of(s)).collect();
        if ctx.is_empty() {
            continue;
        }
        let cl: Vec<usize> = ctx.iter().copied().filter(|s| classical.contains(s)).collect();
        let marg = mu_marginal(&cl);
        let probs = (0..1usize << ctx.len())
            .map(|i| {
                let mut idx = 0;
                let mut uniform = 1.0;
                for (pos, s) in ctx.iter().enumerate() {
                    let bit = (i >> (ctx.len() - 1 - pos)) & 1;
                    if classical.contains(s) {
                        idx = idx * 2 + bit;
                    } else {
                        uniform *= 0.5;
                    }
                }
                marg[idx] * uniform
            })
            .collect();
        contexts.push(Context { sites: ctx, probs });
    }
    match core {
        Some(Core::Pr { visibility: v }) => {
            let (x, y) = ([core_sites[0], core_sites[1]], [core_sites[2], core_sites[3]]);
            for (xi, &xs) in x.iter().enumerate() {
                for (yi, &ys) in y.iter().enumerate() {
                    let probs = (0..4)
                        .map(|o| {
                            let (a, b) = (o >> 1, o & 1);
                            let pr = if (a ^ b) == (xi & yi) { 0.5 } else { 0.0 };
                            v * pr + (1.0 - v) * 0.25
                        })
                        .collect();
                    contexts.push(Context { sites: vec![xs, ys], probs });
                }
            }
        }
        Some(Core::Triangle { visibility: v }) => {
            let [a, b, c] = [core_sites[0], core_sites[1], core_sites[2]];
            let same = |v: f64| vec![(1.0 + v) / 4.0, (1.0 - v) / 4.0, (1.0 - v) / 4.0, (1.0 + v) / 4.0];
            let differ = |v: f64| vec![(1.0 - v) / 4.0, (1.0 + v) / 4.0, (1.0 + v) / 4.0, (1.0 - v) / 4.0];
            contexts.push(Context { sites: vec![a, b], probs: same(v) });
            contexts.push(Context { sites: vec![b, c], probs: same(v) });
            contexts.push(Context { sites: vec![a, c], probs: differ(v) });
        }
        None => {}
    }
    let model = EmpiricalModel::new(sites, contexts, 1e-9).expect("generated model is valid");
    NoSignalingInstance { model, core }
}
