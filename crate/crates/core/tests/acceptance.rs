//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use signal_trees::boxes::{is_extendable, is_no_signaling, zero_forcing, FeasibilityVerdict};
use signal_trees::fixtures::{
    amd_tree, anticorrelated_coins_model, four_context_tree, glued_tree, iid_coins_model,
    matching_independent_scenario, matching_joint_scenario,
};
use signal_trees::gen::{
    random_full_joint, random_imperfect_kuhn_tree, random_joint, random_no_signaling_model, random_perfect_recall_tree,
    TreeConfig,
};
use signal_trees::play::{enumerate_strategies, optimal_pure_payoff};
use signal_trees::policy::{
    classical_exchangeable_optimum, evaluate_policy, optimize_policy, pushforward_payoff, SignalScenario,
};
use signal_trees::quantum::{hardy_instance, hardy_point_number};
use signal_trees::{DEFAULT_CAP, DEFAULT_TOL, PHI};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{label}: got {got}, want {want} ± {tol:e}"))
}

fn in_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn four_context_pure_optimum() -> Outcome {
    let start = Instant::now();
    let tree = four_context_tree(1.0, 2.0);
    let count = enumerate_strategies(&tree, DEFAULT_CAP).map_err(e)?.len();
    ensure(count == 16, || format!("{count} strategies"))?;
    let best = optimal_pure_payoff(&tree, DEFAULT_CAP).map_err(e)?;
    ensure(best.value == 0.0, || format!("optimum {}", best.value))?;
    in_time(start, Duration::from_secs(1))?;
    Ok(format!("optimum 0 over {count} strategies"))
}

fn hardy_policy_optimum() -> Outcome {
    let start = Instant::now();
    let hardy = hardy_instance().map_err(e)?;
    let sc = SignalScenario::new(four_context_tree(1.0, 2.0), hardy.model, DEFAULT_TOL).map_err(e)?;
    let best = optimize_policy(&sc, DEFAULT_CAP).map_err(e)?;
    within("value", best.value, PHI.powi(5) / 4.0, 1e-9)?;
    ensure(best.evaluated == 256, || format!("{} policies", best.evaluated))?;
    let described: Vec<String> = best.argmax.iter().map(|p| p.describe(&sc)).collect();
    let want = "West: G→U, R→D; East: G→u, R→d; North: G→T, R→B; South: G→t, R→b";
    ensure(described == [want], || format!("argmax {described:?}"))?;
    in_time(start, Duration::from_secs(1))?;
    Ok(format!("value {:.10} from 256 policies", best.value))
}

fn classical_signals_never_help() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let cfg = TreeConfig { max_nodes: 10, ..TreeConfig::default() };
    for i in 0..100 {
        let tree = random_imperfect_kuhn_tree(&mut rng, &cfg);
        let mu = random_joint(&mut rng, &tree, 3);
        let model = mu.as_model().silence_unbound(&tree);
        let sc = SignalScenario::new(tree.clone(), model, DEFAULT_TOL).map_err(e)?;
        let with = optimize_policy(&sc, DEFAULT_CAP).map_err(e)?.value;
        let without = optimal_pure_payoff(&tree, DEFAULT_CAP).map_err(e)?.value;
        within(&format!("tree {i}"), with, without, 1e-9)?;
    }
    in_time(start, Duration::from_secs(60))?;
    Ok("100 imperfect-recall Kuhn trees".into())
}

fn no_signaling_never_helps_with_perfect_recall() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let cfg = TreeConfig::wide_nature();
    let mut non_extendable = 0;
    for i in 0..100 {
        let tree = random_perfect_recall_tree(&mut rng, &cfg);
        let inst = random_no_signaling_model(&mut rng, &tree);
        if !is_extendable(&inst.model, DEFAULT_TOL, DEFAULT_CAP).map_err(e)?.is_extendable() {
            non_extendable += 1;
        }
        let model = inst.model.silence_unbound(&tree);
        let sc = SignalScenario::new(tree.clone(), model, DEFAULT_TOL).map_err(e)?;
        let with = optimize_policy(&sc, DEFAULT_CAP).map_err(e)?.value;
        let without = optimal_pure_payoff(&tree, DEFAULT_CAP).map_err(e)?.value;
        within(&format!("tree {i}"), with, without, 1e-9)?;
    }
    ensure(non_extendable > 0, || "no non-extendable model was generated".into())?;
    in_time(start, Duration::from_secs(60))?;
    Ok(format!("100 perfect-recall trees, {non_extendable} with non-extendable models"))
}

fn hardy_not_extendable() -> Outcome {
    let start = Instant::now();
    let hardy = hardy_instance().map_err(e)?;
    let model = &hardy.model;
    match is_extendable(model, DEFAULT_TOL, DEFAULT_CAP).map_err(e)? {
        FeasibilityVerdict::Extending(_) => return Err("LP found an extension".into()),
        FeasibilityVerdict::Infeasible(w) => {
            let (required, max_point) = w.check(model, DEFAULT_CAP).map_err(e)?;
            ensure(required > 1e-6 && max_point <= 1e-9, || format!("witness {required} vs {max_point}"))?;
        }
    }
    let zf = zero_forcing(model, 1e-12, DEFAULT_CAP).map_err(e)?;
    let ids: Vec<&str> = model.sites().iter().map(|s| s.id.as_str()).collect();
    let red = model.sites()[0].alphabet.iter().position(|a| a == "R").ok_or("no R outcome")?;
    let mut numbers = BTreeSet::new();
    for &p in &zf.forced {
        // mixed radix over binary sites, first site most significant
        let reds: BTreeSet<&str> =
            (0..ids.len()).filter(|&s| (p >> (ids.len() - 1 - s)) & 1 == red).map(|s| ids[s]).collect();
        numbers.insert(hardy_point_number(&reds).ok_or("unnumbered point")?);
    }
    let want: BTreeSet<usize> = [1, 2, 3, 4, 5, 6, 7, 9, 12, 15, 16].into();
    ensure(numbers == want, || format!("forced {numbers:?}"))?;
    let (c, o, prob) = zf.contradiction.ok_or("zero forcing found no contradiction")?;
    ensure(model.context_key(c) == "East,South" && model.outcome_string(c, o) == "GG", || {
        format!("contradiction at {} {}", model.context_key(c), model.outcome_string(c, o))
    })?;
    within("contradicted probability", prob, PHI.powi(5), 1e-9)?;
    in_time(start, Duration::from_secs(1))?;
    Ok(format!("witness checked; forced points {numbers:?}"))
}

fn hardy_no_signaling() -> Outcome {
    let hardy = hardy_instance().map_err(e)?;
    let model = &hardy.model;
    let report = is_no_signaling(model, 1e-12);
    ensure(report.no_signaling && report.max_gap < 1e-10, || format!("max gap {:e}", report.max_gap))?;
    let west = model.site_index("West").ok_or("no West site")?;
    let mut seen = 0;
    for c in 0..model.contexts().len() {
        if model.contexts()[c].sites.contains(&west) {
            within(&format!("West marginal in {}", model.context_key(c)), model.marginal(c, &[west])[0], PHI, 1e-9)?;
            seen += 1;
        }
    }
    ensure(seen == 2, || format!("West in {seen} contexts"))?;
    Ok(format!("max gap {:.1e}", report.max_gap))
}

fn hardy_table_entries() -> Outcome {
    let hardy = hardy_instance().map_err(e)?;
    let model = &hardy.model;
    let ctx = |key: &str| (0..model.contexts().len()).find(|&c| model.context_key(c) == key).ok_or(format!("no {key}"));
    let wn = &model.contexts()[ctx("West,North")?].probs;
    let want = [PHI.powi(3), PHI.powi(2), PHI.powi(2), 0.0];
    for (i, (&got, &w)) in wn.iter().zip(&want).enumerate() {
        within(&format!("West,North outcome {i}"), got, w, 1e-9)?;
    }
    within("GG | East,North", model.contexts()[ctx("East,North")?].probs[0], 0.0, 1e-9)?;
    within("GG | West,South", model.contexts()[ctx("West,South")?].probs[0], 0.0, 1e-9)?;
    let gg = model.contexts()[ctx("East,South")?].probs[0];
    within("GG | East,South", gg, (5.0 * 5f64.sqrt() - 11.0) / 2.0, 1e-9)?;
    Ok(format!("P(GG | East,South) = {gg:.10}"))
}

fn absent_minded_driver() -> Outcome {
    let start = Instant::now();
    let tree = amd_tree();
    within("no-signal optimum", optimal_pure_payoff(&tree, DEFAULT_CAP).map_err(e)?.value, 1.0, 1e-12)?;
    let iid = SignalScenario::new(tree.clone(), iid_coins_model(), DEFAULT_TOL).map_err(e)?;
    within("independent fair coins", optimize_policy(&iid, DEFAULT_CAP).map_err(e)?.value, 1.25, 1e-12)?;
    let anti = SignalScenario::new(tree.clone(), anticorrelated_coins_model(), DEFAULT_TOL).map_err(e)?;
    within("anticorrelated coins", optimize_policy(&anti, DEFAULT_CAP).map_err(e)?.value, 2.0, 1e-12)?;
    let ex = classical_exchangeable_optimum(&tree, 2, 2, DEFAULT_CAP).map_err(e)?;
    within("exchangeable optimum", ex.value, 2.0, 1e-12)?;
    in_time(start, Duration::from_secs(1))?;
    Ok("1 / 1.25 / 2 / 2".into())
}

fn correlation_with_nature() -> Outcome {
    let joint = optimize_policy(&matching_joint_scenario(), DEFAULT_CAP).map_err(e)?.value;
    let independent = optimize_policy(&matching_independent_scenario(), DEFAULT_CAP).map_err(e)?.value;
    ensure(joint == 1.0 && independent == 0.5, || format!("joint {joint}, independent {independent}"))?;
    Ok("joint 1, independent 1/2".into())
}

fn oracle_equivalence_and_recall_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let small = TreeConfig { max_nodes: 12, ..TreeConfig::default() };
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let tree = if i % 2 == 0 {
            random_perfect_recall_tree(&mut rng, &small)
        } else {
            random_imperfect_kuhn_tree(&mut rng, &small)
        };
        let mu = random_full_joint(&mut rng, &tree);
        let sc = SignalScenario::new(tree.clone(), mu.as_model(), DEFAULT_TOL).map_err(e)?;
        let policy = common::random_policy(&mut rng, &sc);
        let walked = evaluate_policy(&sc, &policy).map_err(e)?;
        let pushed = pushforward_payoff(&mu, &policy, &tree, DEFAULT_CAP).map_err(e)?;
        worst = worst.max((walked - pushed).abs());
        within(&format!("scenario {i}"), walked, pushed, 1e-12)?;
    }
    let cfg = TreeConfig::default();
    for i in 0..200 {
        let tree = random_perfect_recall_tree(&mut rng, &cfg);
        common::check_remembers_choices(&mut rng, &tree).map_err(|m| format!("tree {i}: {m}"))?;
        common::check_remembers_knowledge(&tree).map_err(|m| format!("tree {i}: {m}"))?;
    }
    Ok(format!("500 scenarios (max gap {worst:.1e}); recall properties on 200 trees"))
}

fn glued_tree_gap() -> Outcome {
    let tree = glued_tree(1.0, 2.0);
    let classical = classical_exchangeable_optimum(&tree, 2, 2, DEFAULT_CAP).map_err(e)?.value;
    let hardy = hardy_instance().map_err(e)?;
    let model = anticorrelated_coins_model().disjoint_union(&hardy.model);
    let sc = SignalScenario::new(tree, model, DEFAULT_TOL).map_err(e)?;
    let quantum = optimize_policy(&sc, DEFAULT_CAP).map_err(e)?.value;
    ensure(quantum > classical + DEFAULT_TOL, || format!("quantum {quantum} vs classical {classical}"))?;
    Ok(format!("classical exchangeable {classical} < quantum-augmented {quantum:.7}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1  four-context tree, pure optimum", four_context_pure_optimum),
        ("2  four-context tree with Hardy signals", hardy_policy_optimum),
        ("3  classical signals, imperfect recall", classical_signals_never_help),
        ("4  no-signaling models, perfect recall", no_signaling_never_helps_with_perfect_recall),
        ("5  Hardy model not extendable", hardy_not_extendable),
        ("6  Hardy model no-signaling", hardy_no_signaling),
        ("7  Hardy context probabilities", hardy_table_entries),
        ("8  absent-minded driver", absent_minded_driver),
        ("9  signals correlated with Nature", correlation_with_nature),
        ("10 oracle equivalence and recall properties", oracle_equivalence_and_recall_properties),
        ("+  glued tree", glued_tree_gap),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{t:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{t:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
