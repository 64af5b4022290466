//! Strategies, world states, induced plays and expected payoffs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tree::{has_perfect_recall, is_kuhn, DecisionTree, NodeKind, NodeRef, Player};
use crate::{PlayError, DEFAULT_TOL};

/// A pure strategy: one 0-based branch choice per DM information set, in
/// [`DecisionTree::dm_sets`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Strategy {
    pub choices: Vec<usize>,
}

impl Strategy {
    /// Move labels of this strategy, e.g. `(U, u, B, t)`.
    pub fn describe(&self, tree: &DecisionTree) -> String {
        let labels: Vec<String> = tree
            .dm_sets()
            .iter()
            .zip(&self.choices)
            .map(|(&s, &c)| tree.move_labels(s).get(c).cloned().unwrap_or_else(|| (c + 1).to_string()))
            .collect();
        format!("({})", labels.join(", "))
    }
}

/// Nature's choice per Nature information set, with its product probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub choices: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeRef>,
    pub payoff: f64,
}

fn mixed_radix(radices: &[usize], cap: usize) -> Result<Vec<Vec<usize>>, PlayError> {
    let count = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).unwrap_or(usize::MAX);
    if count > cap {
        return Err(PlayError::TooMany { count, cap });
    }
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; radices.len()];
    for _ in 0..count {
        out.push(digits.clone());
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// All pure strategies, lexicographic over DM information sets (first set most significant).
pub fn enumerate_strategies(tree: &DecisionTree, cap: usize) -> Result<Vec<Strategy>, PlayError> {
    let radices: Vec<usize> = tree.dm_sets().iter().map(|&s| tree.move_count(s)).collect();
    Ok(mixed_radix(&radices, cap)?.into_iter().map(|choices| Strategy { choices }).collect())
}

/// All world states with their probabilities (product over Nature information sets).
pub fn enumerate_world_states(tree: &DecisionTree, cap: usize) -> Result<Vec<WorldState>, PlayError> {
    let radices: Vec<usize> = tree.nature_sets().iter().map(|&s| tree.move_count(s)).collect();
    let probs: Vec<&[f64]> = tree.nature_sets().iter().map(|&s| tree.nature_probs(s).unwrap_or(&[])).collect();
    Ok(mixed_radix(&radices, cap)?
        .into_iter()
        .map(|choices| {
            let probability = choices.iter().zip(&probs).map(|(&c, p)| p.get(c).copied().unwrap_or(0.0)).product();
            WorldState { choices, probability }
        })
        .collect())
}

/// The unique play induced by `(s, w)`.
pub fn induced_path(s: &Strategy, w: &WorldState, tree: &DecisionTree) -> Result<Path, PlayError> {
    let mut cur = tree.root().ok_or(PlayError::InvalidTree)?;
    let mut nodes = vec![cur];
    loop {
        let node = tree.node(cur);
        if node.kind == NodeKind::Terminal {
            return Ok(Path { nodes, payoff: node.payoff.unwrap_or(0.0) });
        }
        let set = node.info_set.ok_or(PlayError::InvalidTree)?;
        let branch = match tree.info_set(set).player {
            Player::Dm => tree.dm_position(set).and_then(|p| s.choices.get(p)),
            Player::Nature => tree.nature_position(set).and_then(|p| w.choices.get(p)),
        }
        .copied()
        .ok_or(PlayError::InvalidStrategy)?;
        cur = tree.child(cur, branch).ok_or(PlayError::InvalidStrategy)?;
        nodes.push(cur);
        if nodes.len() > tree.nodes().len() {
            return Err(PlayError::InvalidTree);
        }
    }
}

/// Expected payoff of `s`, averaging over world states.
pub fn expected_payoff(s: &Strategy, tree: &DecisionTree, cap: usize) -> Result<f64, PlayError> {
    let states = enumerate_world_states(tree, cap)?;
    expected_over(s, &states, tree)
}

fn expected_over(s: &Strategy, states: &[WorldState], tree: &DecisionTree) -> Result<f64, PlayError> {
    states.iter().try_fold(0.0, |acc, w| Ok(acc + w.probability * induced_path(s, w, tree)?.payoff))
}

/// Reach probability of every terminal under `s`.
pub fn terminal_distribution(
    s: &Strategy,
    tree: &DecisionTree,
    cap: usize,
) -> Result<BTreeMap<NodeRef, f64>, PlayError> {
    let mut out = BTreeMap::new();
    for w in enumerate_world_states(tree, cap)? {
        let path = induced_path(s, &w, tree)?;
        *out.entry(*path.nodes.last().unwrap()).or_insert(0.0) += w.probability;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub strategy: Strategy,
    /// Move label per DM information set.
    pub moves: Vec<String>,
    pub payoff: f64,
}

/// Expected payoff for every pure strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionMatrix {
    pub info_sets: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

impl DecisionMatrix {
    pub fn max(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.payoff).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.info_sets.clone();
        header.push("payoff".into());
        w.write_record(&header).expect("in-memory csv");
        for row in &self.rows {
            let mut rec = row.moves.clone();
            rec.push(format!("{}", row.payoff));
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

pub fn decision_matrix(tree: &DecisionTree, cap: usize) -> Result<DecisionMatrix, PlayError> {
    let states = enumerate_world_states(tree, cap)?;
    let strategies = enumerate_strategies(tree, cap)?;
    let payoffs: Vec<f64> = strategies.par_iter().map(|s| expected_over(s, &states, tree)).collect::<Result<_, _>>()?;
    let rows = strategies
        .into_iter()
        .zip(payoffs)
        .map(|(strategy, payoff)| {
            let moves = tree
                .dm_sets()
                .iter()
                .zip(&strategy.choices)
                .map(|(&s, &c)| tree.move_labels(s).get(c).cloned().unwrap_or_default())
                .collect();
            MatrixRow { strategy, moves, payoff }
        })
        .collect();
    Ok(DecisionMatrix { info_sets: tree.dm_sets().iter().map(|&s| tree.info_set(s).id.clone()).collect(), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureOptimum {
    pub value: f64,
    /// Every strategy within tolerance of the maximum, in enumeration order.
    pub argmax: Vec<Strategy>,
}

/// Best expected payoff without signals, by exhaustive enumeration.
pub fn optimal_pure_payoff(tree: &DecisionTree, cap: usize) -> Result<PureOptimum, PlayError> {
    let m = decision_matrix(tree, cap)?;
    let value = m.max().ok_or(PlayError::InvalidTree)?;
    let argmax = m.rows.into_iter().filter(|r| r.payoff >= value - DEFAULT_TOL).map(|r| r.strategy).collect();
    Ok(PureOptimum { value, argmax })
}

/// Optimum of a perfect-recall Kuhn tree by backward induction over the
/// information-set forest.
///
/// Each DM node is keyed by the last DM (set, move) on its root path. Perfect
/// recall makes that key identical across an information set, so the value of
/// a move is the Nature-weighted payoff reached directly plus the best values of
/// the sets that hang below it.
pub fn backward_induction_optimum(tree: &DecisionTree, cap: usize) -> Result<f64, PlayError> {
    if !is_kuhn(tree).kuhn || !has_perfect_recall(tree, cap)?.perfect {
        return Err(PlayError::NotPerfectRecall);
    }
    type Key = Option<(usize, usize)>;
    // direct[key]: Nature-weighted terminal payoff reached after `key` without another DM node
    let mut direct: BTreeMap<Key, f64> = BTreeMap::new();
    // children[key]: DM sets whose nodes follow `key` immediately
    let mut children: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    let mut set_key: BTreeMap<usize, Key> = BTreeMap::new();
    let root = tree.root().ok_or(PlayError::InvalidTree)?;
    let mut stack: Vec<(NodeRef, Key, f64)> = vec![(root, None, 1.0)];
    while let Some((n, key, weight)) = stack.pop() {
        let node = tree.node(n);
        match node.kind {
            NodeKind::Terminal => *direct.entry(key).or_insert(0.0) += weight * node.payoff.unwrap_or(0.0),
            NodeKind::Nature => {
                let set = node.info_set.ok_or(PlayError::InvalidTree)?;
                let probs = tree.nature_probs(set).ok_or(PlayError::InvalidTree)?;
                for (b, c) in tree.children(n).enumerate() {
                    stack.push((c, key, weight * probs[b]));
                }
            }
            NodeKind::Dm => {
                let set = node.info_set.ok_or(PlayError::InvalidTree)?;
                let pos = tree.dm_position(set).ok_or(PlayError::InvalidTree)?;
                if *set_key.entry(pos).or_insert(key) != key {
                    return Err(PlayError::NotPerfectRecall);
                }
                let list = children.entry(key).or_default();
                if !list.contains(&pos) {
                    list.push(pos);
                }
                for (b, c) in tree.children(n).enumerate() {
                    stack.push((c, Some((pos, b)), weight));
                }
            }
        }
    }
    fn value(
        key: Option<(usize, usize)>,
        tree: &DecisionTree,
        direct: &BTreeMap<Option<(usize, usize)>, f64>,
        children: &BTreeMap<Option<(usize, usize)>, Vec<usize>>,
    ) -> f64 {
        let mut v = direct.get(&key).copied().unwrap_or(0.0);
        for &pos in children.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
            let moves = tree.move_count(tree.dm_sets()[pos]);
            v += (0..moves).map(|b| value(Some((pos, b)), tree, direct, children)).fold(f64::NEG_INFINITY, f64::max);
        }
        v
    }
    Ok(value(None, tree, &direct, &children))
}
