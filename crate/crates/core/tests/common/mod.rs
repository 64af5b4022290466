//! Checkers shared by the property and acceptance suites. They recompute tree
//! facts from raw paths rather than through the library's own helpers.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use signal_trees::play::{enumerate_strategies, Strategy};
use signal_trees::policy::{ResponsePolicy, SignalScenario};
use signal_trees::tree::{allowed_under, info_event, precedes, DecisionTree, InfoSetRef, NodeKind, NodeRef, Target};
use signal_trees::DEFAULT_CAP;

/// Every root-to-leaf node sequence, by explicit depth-first walk.
pub fn leaf_paths(tree: &DecisionTree) -> Vec<Vec<NodeRef>> {
    fn go(tree: &DecisionTree, n: NodeRef, path: &mut Vec<NodeRef>, out: &mut Vec<Vec<NodeRef>>) {
        path.push(n);
        let children: Vec<NodeRef> = tree.children(n).collect();
        if children.is_empty() {
            out.push(path.clone());
        }
        for c in children {
            go(tree, c, path, out);
        }
        path.pop();
    }
    let mut out = Vec::new();
    go(tree, tree.root().expect("rooted"), &mut Vec::new(), &mut out);
    out
}

/// No root-to-leaf path meets an information set twice.
pub fn brute_kuhn(tree: &DecisionTree) -> bool {
    leaf_paths(tree).iter().all(|p| {
        let sets: Vec<InfoSetRef> = p.iter().filter_map(|&n| tree.node(n).info_set).collect();
        let distinct: BTreeSet<InfoSetRef> = sets.iter().copied().collect();
        distinct.len() == sets.len()
    })
}

/// The DM's own (information set, branch) choices leading to `n`, as a set.
fn own_history(tree: &DecisionTree, n: NodeRef) -> BTreeSet<(InfoSetRef, usize)> {
    let mut out = BTreeSet::new();
    let mut cur = n;
    while let Some(p) = tree.parent(cur) {
        let node = tree.node(p);
        if node.kind == NodeKind::Dm {
            let branch = tree.children(p).position(|c| c == cur).expect("child of parent");
            out.insert((node.info_set.expect("dm node has a set"), branch));
        }
        cur = p;
    }
    out
}

/// Perfect recall on Kuhn trees with at least two branches per DM node: all
/// nodes of an information set share one own-choice history.
pub fn brute_perfect_recall(tree: &DecisionTree) -> bool {
    tree.dm_sets().iter().all(|&s| {
        let members: Vec<NodeRef> =
            (0..tree.nodes().len()).map(NodeRef).filter(|&n| tree.node(n).info_set == Some(s)).collect();
        members.windows(2).all(|w| own_history(tree, w[0]) == own_history(tree, w[1]))
    })
}

/// Pairs of strategies to quantify over: all of them when few, a sample otherwise.
fn strategy_pairs<R: Rng>(rng: &mut R, strategies: &[Strategy], limit: usize) -> Vec<(usize, usize)> {
    let n = strategies.len();
    if n * n <= limit {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        (0..limit).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    }
}

/// If `later` is allowed under `s` and `s2` and `earlier` precedes it, then
/// `earlier` is allowed under both and the strategies agree there.
pub fn check_remembers_choices<R: Rng>(rng: &mut R, tree: &DecisionTree) -> Result<(), String> {
    let strategies = enumerate_strategies(tree, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let sets = tree.dm_sets();
    let ordered: Vec<(InfoSetRef, InfoSetRef)> = sets
        .iter()
        .flat_map(|&a| sets.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a != b && precedes(a, b, tree))
        .collect();
    for (i, j) in strategy_pairs(rng, &strategies, 2500) {
        let (s, t) = (&strategies[i], &strategies[j]);
        for &(earlier, later) in &ordered {
            if !(allowed_under(Target::InfoSet(later), s, tree) && allowed_under(Target::InfoSet(later), t, tree)) {
                continue;
            }
            let pos = tree.dm_position(earlier).expect("dm set");
            let ok = allowed_under(Target::InfoSet(earlier), s, tree)
                && allowed_under(Target::InfoSet(earlier), t, tree)
                && s.choices[pos] == t.choices[pos];
            if !ok {
                return Err(format!(
                    "{} precedes {} but {} and {} differ or miss it",
                    tree.info_set(earlier).id,
                    tree.info_set(later).id,
                    s.describe(tree),
                    t.describe(tree)
                ));
            }
        }
    }
    Ok(())
}

/// If `earlier` precedes `later`, every world state reaching `later` reaches `earlier`.
pub fn check_remembers_knowledge(tree: &DecisionTree) -> Result<(), String> {
    let sets = tree.dm_sets();
    let events: Vec<Vec<Vec<usize>>> = sets
        .iter()
        .map(|&s| info_event(s, tree, DEFAULT_CAP).map(|ws| ws.into_iter().map(|w| w.choices).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (a, &earlier) in sets.iter().enumerate() {
        for (b, &later) in sets.iter().enumerate() {
            if a != b && precedes(earlier, later, tree) && !events[b].iter().all(|w| events[a].contains(w)) {
                return Err(format!(
                    "[{}] is not contained in [{}]",
                    tree.info_set(later).id,
                    tree.info_set(earlier).id
                ));
            }
        }
    }
    Ok(())
}

/// Uniformly random deterministic policy for a scenario.
pub fn random_policy<R: Rng>(rng: &mut R, sc: &SignalScenario) -> ResponsePolicy {
    let maps = sc
        .tree
        .dm_sets()
        .iter()
        .enumerate()
        .map(|(pos, &s)| (0..sc.alphabet_len(pos)).map(|_| rng.gen_range(0..sc.tree.move_count(s))).collect())
        .collect();
    ResponsePolicy { maps }
}
