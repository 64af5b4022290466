mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signal_trees::boxes::{
    classical_box_from_joint, conditional_at_site, is_extendable, is_no_signaling, BoxError, Context, EmpiricalModel,
    FeasibilityVerdict, JointSignalMeasure, Site,
};
use signal_trees::fixtures::{
    amd_tree, anticorrelated_coins_model, four_context_tree, glued_tree, iid_coins_model, matching_joint_scenario,
};
use signal_trees::gen::{
    random_distribution, random_full_joint, random_imperfect_kuhn_tree, random_no_signaling_model,
    random_perfect_recall_tree, TreeConfig,
};
use signal_trees::play::{
    backward_induction_optimum, enumerate_strategies, enumerate_world_states, expected_payoff, induced_path,
    optimal_pure_payoff, terminal_distribution,
};
use signal_trees::policy::{evaluate_behavioral, evaluate_policy, optimize_policy, BehavioralPolicy, SignalScenario};
use signal_trees::quantum::hardy_instance;
use signal_trees::tree::{has_perfect_recall, immediate_predecessor, is_kuhn, precedes, DecisionTree, NodeKind};
use signal_trees::{DEFAULT_CAP, DEFAULT_TOL};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn any_kuhn_tree(r: &mut ChaCha8Rng, max_nodes: usize) -> DecisionTree {
    let cfg = TreeConfig { max_nodes, ..TreeConfig::default() };
    if r.gen_bool(0.5) {
        random_perfect_recall_tree(r, &cfg)
    } else {
        random_imperfect_kuhn_tree(r, &cfg)
    }
}

/// Renames every information set and move label and reverses the branch order
/// of every DM set, keeping the same decision problem.
fn relabel(tree: &DecisionTree) -> DecisionTree {
    let mut doc = tree.to_doc();
    let rename = |id: &str| format!("set-{id}");
    let dm: Vec<String> = tree.dm_sets().iter().map(|&s| tree.info_set(s).id.clone()).collect();
    let set_of = |node: &str, doc: &signal_trees::tree::TreeDoc| {
        doc.nodes.iter().find(|n| n.id == node).and_then(|n| n.info_set.clone())
    };
    let counts: Vec<(String, usize)> =
        tree.dm_sets().iter().map(|&s| (tree.info_set(s).id.clone(), tree.move_count(s))).collect();
    let reversed: Vec<(usize, String)> = doc
        .edges
        .iter()
        .map(|e| match set_of(&e.from, &doc) {
            Some(set) if dm.contains(&set) => {
                let k = counts.iter().find(|(id, _)| *id == set).unwrap().1;
                (k + 1 - e.branch_index, format!("mv-{}", e.branch_label))
            }
            _ => (e.branch_index, e.branch_label.clone()),
        })
        .collect();
    for (e, (index, label)) in doc.edges.iter_mut().zip(reversed) {
        e.branch_index = index;
        e.branch_label = label;
    }
    for n in &mut doc.nodes {
        if let Some(s) = n.info_set.as_mut() {
            *s = rename(s);
        }
    }
    doc.nature_probs = doc.nature_probs.into_iter().map(|(k, v)| (rename(&k), v)).collect();
    DecisionTree::from_doc(&doc).expect("relabelled tree is valid")
}

fn random_model(r: &mut ChaCha8Rng, sites: usize) -> EmpiricalModel {
    let site_list: Vec<Site> = (0..sites).map(|i| Site::new(&format!("s{i}"), &format!("I{i}"), &["0", "1"])).collect();
    let mut contexts: Vec<Context> = Vec::new();
    for s in 0..sites {
        let mut ctx = vec![s];
        for t in 0..sites {
            if t != s && r.gen_bool(0.4) {
                ctx.push(t);
            }
        }
        ctx.sort();
        let probs = random_distribution(r, 1 << ctx.len());
        contexts.push(Context { sites: ctx, probs });
    }
    EmpiricalModel::new(site_list, contexts, DEFAULT_TOL).expect("valid model")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_strategy_and_state_induce_one_terminating_play(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = any_kuhn_tree(&mut r, 14);
        for s in enumerate_strategies(&tree, DEFAULT_CAP).unwrap() {
            for w in enumerate_world_states(&tree, DEFAULT_CAP).unwrap() {
                let path = induced_path(&s, &w, &tree).unwrap();
                prop_assert_eq!(Some(path.nodes[0]), tree.root());
                prop_assert_eq!(tree.node(*path.nodes.last().unwrap()).kind, NodeKind::Terminal);
                for pair in path.nodes.windows(2) {
                    prop_assert_eq!(tree.parent(pair[1]), Some(pair[0]));
                }
                prop_assert_eq!(path, induced_path(&s, &w, &tree).unwrap());
            }
        }
    }

    #[test]
    fn precedence_is_a_strict_order_with_unique_predecessors(seed in any::<u64>()) {
        let tree = random_perfect_recall_tree(&mut rng(seed), &TreeConfig::default());
        let sets = tree.dm_sets();
        for &a in sets {
            prop_assert!(!precedes(a, a, &tree));
            prop_assert!(immediate_predecessor(a, &tree).is_ok());
            for &b in sets {
                for &c in sets {
                    if precedes(a, b, &tree) && precedes(b, c, &tree) {
                        prop_assert!(precedes(a, c, &tree));
                    }
                }
            }
        }
    }

    #[test]
    fn perfect_recall_remembers_choices_and_knowledge(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_perfect_recall_tree(&mut r, &TreeConfig::default());
        prop_assert_eq!(common::check_remembers_choices(&mut r, &tree), Ok(()));
        prop_assert_eq!(common::check_remembers_knowledge(&tree), Ok(()));
    }

    #[test]
    fn structural_checks_agree_with_brute_force(seed in any::<u64>()) {
        let tree = any_kuhn_tree(&mut rng(seed), 12);
        prop_assert!(common::brute_kuhn(&tree));
        prop_assert!(is_kuhn(&tree).kuhn);
        let recall = has_perfect_recall(&tree, DEFAULT_CAP).unwrap().perfect;
        prop_assert_eq!(recall, common::brute_perfect_recall(&tree));
    }

    #[test]
    fn expected_payoff_is_reach_weighted_payoff(seed in any::<u64>()) {
        let tree = any_kuhn_tree(&mut rng(seed), 16);
        for s in enumerate_strategies(&tree, DEFAULT_CAP).unwrap() {
            let reach = terminal_distribution(&s, &tree, DEFAULT_CAP).unwrap();
            let total: f64 = reach.values().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let weighted: f64 = reach.iter().map(|(&n, p)| p * tree.node(n).payoff.unwrap()).sum();
            prop_assert!((weighted - expected_payoff(&s, &tree, DEFAULT_CAP).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_ignores_labels_and_branch_order(seed in any::<u64>()) {
        let tree = any_kuhn_tree(&mut rng(seed), 16);
        let a = optimal_pure_payoff(&tree, DEFAULT_CAP).unwrap();
        let b = optimal_pure_payoff(&relabel(&tree), DEFAULT_CAP).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-12);
        prop_assert_eq!(a.argmax.len(), b.argmax.len());
    }

    #[test]
    fn affine_payoff_maps_move_the_optimum_along(seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let tree = any_kuhn_tree(&mut rng(seed), 16);
        let base = optimal_pure_payoff(&tree, DEFAULT_CAP).unwrap();
        let moved = optimal_pure_payoff(&tree.map_payoffs(|x| a * x + b), DEFAULT_CAP).unwrap();
        prop_assert!((moved.value - (a * base.value + b)).abs() < 1e-9);
        prop_assert_eq!(moved.argmax, base.argmax);
    }

    #[test]
    fn backward_induction_matches_enumeration(seed in any::<u64>()) {
        let tree = random_perfect_recall_tree(&mut rng(seed), &TreeConfig::default());
        let enumerated = optimal_pure_payoff(&tree, DEFAULT_CAP).unwrap().value;
        prop_assert!((backward_induction_optimum(&tree, DEFAULT_CAP).unwrap() - enumerated).abs() < 1e-9);
    }

    #[test]
    fn classical_boxes_extend_to_a_measure_with_their_marginals(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let sites: Vec<Site> = (0..n).map(|i| Site::new(&format!("s{i}"), &format!("I{i}"), &["0", "1"])).collect();
        let mu = JointSignalMeasure::new(sites, random_distribution(&mut r, 1 << n), DEFAULT_TOL).unwrap();
        let mut contexts: Vec<Vec<usize>> = (0..n).map(|s| vec![s]).collect();
        for _ in 0..3 {
            let ctx: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.6)).collect();
            if !ctx.is_empty() {
                contexts.push(ctx);
            }
        }
        let model = classical_box_from_joint(&mu, &contexts);
        let FeasibilityVerdict::Extending(ext) = is_extendable(&model, DEFAULT_TOL, DEFAULT_CAP).unwrap() else {
            return Err(TestCaseError::fail("classical box judged non-extendable"));
        };
        for ctx in &contexts {
            for (x, y) in ext.marginal(ctx).iter().zip(mu.marginal(ctx)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn extendable_models_are_no_signaling(seed in any::<u64>(), n in 2usize..=4) {
        let model = random_model(&mut rng(seed), n);
        if is_extendable(&model, DEFAULT_TOL, DEFAULT_CAP).unwrap().is_extendable() {
            prop_assert!(is_no_signaling(&model, 1e-7).no_signaling);
        }
    }

    #[test]
    fn witnesses_separate_the_model_from_every_assignment(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_perfect_recall_tree(&mut r, &TreeConfig::wide_nature());
        let inst = random_no_signaling_model(&mut r, &tree);
        let model = inst.model;
        if let FeasibilityVerdict::Infeasible(w) = is_extendable(&model, DEFAULT_TOL, DEFAULT_CAP).unwrap() {
            let n = model.sites().len();
            let mut best = f64::NEG_INFINITY;
            for p in 0..1usize << n {
                let bit = |s: usize| (p >> (n - 1 - s)) & 1;
                let v: f64 = model.contexts().iter().enumerate().map(|(c, ctx)| {
                    let o = ctx.sites.iter().fold(0, |acc, &s| acc * 2 + bit(s));
                    w.coefficients[c][o]
                }).sum();
                best = best.max(v);
            }
            let required: f64 = model.contexts().iter().enumerate()
                .map(|(c, ctx)| ctx.probs.iter().zip(&w.coefficients[c]).map(|(p, y)| p * y).sum::<f64>())
                .sum();
            prop_assert!(best <= 1e-9, "point value {}", best);
            prop_assert!(required > 1e-9, "required value {}", required);
        } else {
            prop_assert!(inst.core.is_none());
        }
    }

    #[test]
    fn chained_conditionals_rebuild_each_context(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_perfect_recall_tree(&mut r, &TreeConfig::wide_nature());
        let model = random_no_signaling_model(&mut r, &tree).model;
        for (c, ctx) in model.contexts().iter().enumerate() {
            let k = ctx.sites.len();
            for o in 0..ctx.probs.len() {
                let digits: Vec<usize> = (0..k).map(|i| (o >> (k - 1 - i)) & 1).collect();
                let mut p = 1.0;
                for i in 0..k {
                    let observed: Vec<(usize, usize)> = (0..i).map(|j| (ctx.sites[j], digits[j])).collect();
                    match conditional_at_site(&model, ctx.sites[i], &observed, Some(c)) {
                        Ok(d) => p *= d[digits[i]],
                        Err(BoxError::UnreachableBranch) => { p = 0.0; break; }
                        Err(e) => return Err(TestCaseError::fail(e.to_string())),
                    }
                }
                prop_assert!((p - ctx.probs[o]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn duplicating_an_outcome_keeps_the_optimum(seed in any::<u64>(), fraction in 0.05f64..0.95) {
        let mut r = rng(seed);
        let cfg = TreeConfig { max_nodes: 10, ..TreeConfig::default() };
        let tree = any_kuhn_tree(&mut r, cfg.max_nodes);
        prop_assume!(!tree.dm_sets().is_empty());
        let model = random_full_joint(&mut r, &tree).as_model();
        let site = r.gen_range(0..model.sites().len());
        let split = model.split_outcome(site, r.gen_range(0..2), fraction);
        let a = optimize_policy(&SignalScenario::new(tree.clone(), model, DEFAULT_TOL).unwrap(), DEFAULT_CAP).unwrap();
        let b = optimize_policy(&SignalScenario::new(tree, split, DEFAULT_TOL).unwrap(), DEFAULT_CAP).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-9);
    }
}

fn random_behavioral(r: &mut ChaCha8Rng, sc: &SignalScenario) -> BehavioralPolicy {
    let maps = sc
        .tree
        .dm_sets()
        .iter()
        .enumerate()
        .map(|(pos, &s)| (0..sc.alphabet_len(pos)).map(|_| random_distribution(r, sc.tree.move_count(s))).collect())
        .collect();
    BehavioralPolicy { maps }
}

// Payoff is linear in each set's randomization only if no play crosses a set
// twice, so the comparison is made on Kuhn trees.
#[test]
fn randomized_policies_never_beat_the_deterministic_optimum() {
    let hardy = hardy_instance().unwrap().model;
    let mut scenarios =
        vec![SignalScenario::new(four_context_tree(1.0, 2.0), hardy, DEFAULT_TOL).unwrap(), matching_joint_scenario()];
    let mut r = rng(404);
    for _ in 0..4 {
        let tree = random_perfect_recall_tree(&mut r, &TreeConfig::wide_nature());
        let model = random_no_signaling_model(&mut r, &tree).model.silence_unbound(&tree);
        scenarios.push(SignalScenario::new(tree, model, DEFAULT_TOL).unwrap());
    }
    for sc in &scenarios {
        let best = optimize_policy(sc, DEFAULT_CAP).unwrap().value;
        for _ in 0..1000 {
            let v = evaluate_behavioral(sc, &random_behavioral(&mut r, sc)).unwrap();
            assert!(v <= best + 1e-9, "randomized {v} beats deterministic {best}");
        }
    }
}

#[test]
fn randomizing_at_a_repeated_set_can_beat_deterministic_policies() {
    // continuing with probability 2/3 on every visit gives 4/3, above the 5/4
    // that deterministic maps of independent fair coins reach
    let sc = SignalScenario::new(amd_tree(), iid_coins_model(), DEFAULT_TOL).unwrap();
    let best = optimize_policy(&sc, DEFAULT_CAP).unwrap().value;
    assert!((best - 1.25).abs() < 1e-12);
    let labels = sc.tree.move_labels(sc.tree.dm_sets()[0]);
    let cont = labels.iter().position(|l| l == "In").unwrap();
    let mut mix = vec![1.0 / 3.0; 2];
    mix[cont] = 2.0 / 3.0;
    let v = evaluate_behavioral(&sc, &BehavioralPolicy { maps: vec![vec![mix.clone(), mix]] }).unwrap();
    assert!((v - 4.0 / 3.0).abs() < 1e-12);
    let anti = SignalScenario::new(amd_tree(), anticorrelated_coins_model(), DEFAULT_TOL).unwrap();
    assert!((optimize_policy(&anti, DEFAULT_CAP).unwrap().value - 2.0).abs() < 1e-12);
}

#[test]
fn point_mass_behavioral_policies_match_deterministic_ones() {
    let mut r = rng(405);
    for _ in 0..50 {
        let tree = any_kuhn_tree(&mut r, 12);
        let sc = SignalScenario::new(tree.clone(), random_full_joint(&mut r, &tree).as_model(), DEFAULT_TOL).unwrap();
        let p = common::random_policy(&mut r, &sc);
        let maps = p
            .maps
            .iter()
            .enumerate()
            .map(|(pos, map)| {
                let k = sc.tree.move_count(sc.tree.dm_sets()[pos]);
                map.iter().map(|&m| (0..k).map(|j| if j == m { 1.0 } else { 0.0 }).collect()).collect()
            })
            .collect();
        let det = evaluate_policy(&sc, &p).unwrap();
        let beh = evaluate_behavioral(&sc, &BehavioralPolicy { maps }).unwrap();
        assert!((det - beh).abs() < 1e-12);
    }
}

#[test]
fn non_kuhn_fixtures_fail_both_kuhn_checks() {
    for tree in [amd_tree(), glued_tree(1.0, 2.0)] {
        assert!(!common::brute_kuhn(&tree));
        assert!(!is_kuhn(&tree).kuhn);
    }
    assert!(common::brute_kuhn(&four_context_tree(1.0, 2.0)));
    assert!(!common::brute_perfect_recall(&four_context_tree(1.0, 2.0)));
}
