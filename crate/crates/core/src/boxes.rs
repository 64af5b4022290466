//! Empirical signal models: a family of outcome distributions, one per context
//! of jointly observed signal sites.
//!
//! Outcomes of a context are indexed in mixed radix over the context's sites in
//! order, first site most significant. The same convention indexes points of the
//! full product space in [`JointSignalMeasure`], over all sites of the model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpOutcome};
use crate::tree::DecisionTree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxError {
    #[error("site `{0}` is not part of the model")]
    UnknownSite(String),
    #[error("outcome `{outcome}` is not in the alphabet of `{site}`")]
    UnknownOutcome { site: String, outcome: String },
    #[error("context {0} has {1} probabilities, expected {2}")]
    ContextSize(usize, usize, usize),
    #[error("context {0} distribution is invalid (sum {1})")]
    BadDistribution(usize, f64),
    #[error("site `{0}` appears in no context")]
    UncoveredSite(String),
    #[error("context {0} repeats a site")]
    RepeatedSite(usize),
    #[error("no context covers sites {0:?}")]
    NoCoveringContext(Vec<String>),
    #[error("conditioning event has zero probability")]
    UnreachableBranch,
    #[error("product space has {count} points, cap is {cap}")]
    TooLarge { count: usize, cap: usize },
    #[error("information set `{0}` needs at least two visit-indexed sites with one alphabet in a common context")]
    NotExchangeableShape(String),
    #[error("cannot parse outcome string `{0}`")]
    BadOutcomeString(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    /// Information set the signal is observed at.
    pub info_set: String,
    /// 1-based visit number for per-node signals inside a repeated information set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visit_index: Option<usize>,
    pub alphabet: Vec<String>,
}

impl Site {
    pub fn new(id: &str, info_set: &str, alphabet: &[&str]) -> Self {
        Site {
            id: id.to_string(),
            info_set: info_set.to_string(),
            visit_index: None,
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn visit(mut self, index: usize) -> Self {
        self.visit_index = Some(index);
        self
    }

    /// Single-outcome site, i.e. no signal.
    pub fn silent(info_set: &str) -> Self {
        Site::new(&format!("{info_set}#silent"), info_set, &["-"])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub sites: Vec<usize>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    sites: Vec<Site>,
    contexts: Vec<Context>,
}

fn radix_index(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

fn radix_digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for pos in (0..radices.len()).rev() {
        out[pos] = index % radices[pos];
        index /= radices[pos];
    }
    out
}

impl EmpiricalModel {
    /// Builds a model, checking that distributions are normalised and every site is covered.
    pub fn new(sites: Vec<Site>, contexts: Vec<Context>, tol: f64) -> Result<Self, BoxError> {
        for (c, ctx) in contexts.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &s in &ctx.sites {
                if s >= sites.len() {
                    return Err(BoxError::UnknownSite(format!("#{s}")));
                }
                if !seen.insert(s) {
                    return Err(BoxError::RepeatedSite(c));
                }
            }
            let size: usize = ctx.sites.iter().map(|&s| sites[s].alphabet.len()).product();
            if ctx.probs.len() != size {
                return Err(BoxError::ContextSize(c, ctx.probs.len(), size));
            }
            let sum: f64 = ctx.probs.iter().sum();
            if ctx.probs.iter().any(|&p| !(p >= -tol) || !p.is_finite()) || (sum - 1.0).abs() > tol {
                return Err(BoxError::BadDistribution(c, sum));
            }
        }
        for (i, site) in sites.iter().enumerate() {
            if !contexts.iter().any(|c| c.sites.contains(&i)) {
                return Err(BoxError::UncoveredSite(site.id.clone()));
            }
        }
        Ok(EmpiricalModel { sites, contexts })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn site_index(&self, id: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    fn radices(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().map(|&s| self.sites[s].alphabet.len()).collect()
    }

    /// Probability of one outcome of a context, given as alphabet indices.
    pub fn prob(&self, context: usize, outcome: &[usize]) -> f64 {
        let ctx = &self.contexts[context];
        self.contexts[context].probs[radix_index(outcome, &self.radices(&ctx.sites))]
    }

    /// Marginal of a context distribution on `subset` (sites, in the given order).
    pub fn marginal(&self, context: usize, subset: &[usize]) -> Vec<f64> {
        let ctx = &self.contexts[context];
        let radices = self.radices(&ctx.sites);
        let sub_radices = self.radices(subset);
        let positions: Vec<usize> =
            subset.iter().map(|s| ctx.sites.iter().position(|x| x == s).expect("subset of context")).collect();
        let mut out = vec![0.0; sub_radices.iter().product()];
        for (i, &p) in ctx.probs.iter().enumerate() {
            let digits = radix_digits(i, &radices);
            let sub: Vec<usize> = positions.iter().map(|&q| digits[q]).collect();
            out[radix_index(&sub, &sub_radices)] += p;
        }
        out
    }

    /// Adds a single-outcome site for every DM information set of `tree` that
    /// has no site yet.
    pub fn silence_unbound(&self, tree: &DecisionTree) -> Self {
        let mut m = self.clone();
        for &s in tree.dm_sets() {
            let id = &tree.info_set(s).id;
            if !m.sites.iter().any(|x| &x.info_set == id) {
                m.sites.push(Site::silent(id));
                m.contexts.push(Context { sites: vec![m.sites.len() - 1], probs: vec![1.0] });
            }
        }
        m
    }

    /// Model holding both sets of sites and contexts side by side; `other`'s
    /// site indices are shifted past `self`'s.
    pub fn disjoint_union(&self, other: &EmpiricalModel) -> Self {
        let shift = self.sites.len();
        let mut m = self.clone();
        m.sites.extend(other.sites.iter().cloned());
        m.contexts.extend(
            other
                .contexts
                .iter()
                .map(|c| Context { sites: c.sites.iter().map(|s| s + shift).collect(), probs: c.probs.clone() }),
        );
        m
    }

    /// Splits outcome `outcome` of `site` into two labels carrying fractions
    /// `fraction` and `1 - fraction` of its probability, independently of
    /// everything else.
    pub fn split_outcome(&self, site: usize, outcome: usize, fraction: f64) -> Self {
        let mut m = self.clone();
        let old = self.sites[site].alphabet.len();
        let label = format!("{}'", self.sites[site].alphabet[outcome]);
        m.sites[site].alphabet.push(label);
        for (c, ctx) in self.contexts.iter().enumerate() {
            let Some(pos) = ctx.sites.iter().position(|&s| s == site) else { continue };
            let radices = self.radices(&ctx.sites);
            let mut new_radices = radices.clone();
            new_radices[pos] = old + 1;
            let mut probs = vec![0.0; new_radices.iter().product()];
            for (i, &p) in ctx.probs.iter().enumerate() {
                let mut d = radix_digits(i, &radices);
                if d[pos] == outcome {
                    probs[radix_index(&d, &new_radices)] += p * fraction;
                    d[pos] = old;
                    probs[radix_index(&d, &new_radices)] += p * (1.0 - fraction);
                } else {
                    probs[radix_index(&d, &new_radices)] += p;
                }
            }
            m.contexts[c].probs = probs;
        }
        m
    }

    /// Outcome label string for a context outcome index.
    pub fn outcome_string(&self, context: usize, index: usize) -> String {
        let ctx = &self.contexts[context];
        let digits = radix_digits(index, &self.radices(&ctx.sites));
        ctx.sites.iter().zip(digits).map(|(&s, d)| self.sites[s].alphabet[d].as_str()).collect()
    }

    pub fn context_key(&self, context: usize) -> String {
        self.contexts[context].sites.iter().map(|&s| self.sites[s].id.as_str()).collect::<Vec<_>>().join(",")
    }

    pub fn to_doc(&self) -> ModelDoc {
        let contexts =
            self.contexts.iter().map(|c| c.sites.iter().map(|&s| self.sites[s].id.clone()).collect()).collect();
        let distributions = (0..self.contexts.len())
            .map(|c| {
                let dist = (0..self.contexts[c].probs.len())
                    .map(|i| (self.outcome_string(c, i), self.contexts[c].probs[i]))
                    .collect();
                (self.context_key(c), dist)
            })
            .collect();
        ModelDoc { sites: self.sites.clone(), contexts, distributions }
    }

    pub fn from_doc(doc: &ModelDoc, tol: f64) -> Result<Self, BoxError> {
        let index =
            |id: &str| doc.sites.iter().position(|s| s.id == id).ok_or_else(|| BoxError::UnknownSite(id.to_string()));
        let mut contexts = Vec::new();
        for ctx in &doc.contexts {
            let sites = ctx.iter().map(|id| index(id)).collect::<Result<Vec<_>, _>>()?;
            let alphabets: Vec<&[String]> = sites.iter().map(|&s| doc.sites[s].alphabet.as_slice()).collect();
            let radices: Vec<usize> = alphabets.iter().map(|a| a.len()).collect();
            let mut probs = vec![0.0; radices.iter().product()];
            let key = ctx.join(",");
            if let Some(dist) = doc.distributions.get(&key) {
                for (outcome, &p) in dist {
                    let digits = parse_outcome(outcome, &alphabets)
                        .ok_or_else(|| BoxError::BadOutcomeString(outcome.clone()))?;
                    probs[radix_index(&digits, &radices)] += p;
                }
            }
            contexts.push(Context { sites, probs });
        }
        Self::new(doc.sites.clone(), contexts, tol)
    }

    pub fn from_json(text: &str, tol: f64) -> Result<Self, crate::Error> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        Ok(Self::from_doc(&doc, tol)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("model documents always serialize")
    }
}

/// Splits a concatenated outcome string into alphabet indices, backtracking
/// over labels that are prefixes of one another.
fn parse_outcome(s: &str, alphabets: &[&[String]]) -> Option<Vec<usize>> {
    let Some((first, rest)) = alphabets.split_first() else {
        return s.is_empty().then(Vec::new);
    };
    for (i, label) in first.iter().enumerate() {
        if let Some(tail) = s.strip_prefix(label.as_str()) {
            if let Some(mut more) = parse_outcome(tail, rest) {
                more.insert(0, i);
                return Some(more);
            }
        }
    }
    None
}

/// JSON form: sites, contexts as lists of site ids, and per context key (site
/// ids joined by `,`) a map from concatenated outcome labels to probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub sites: Vec<Site>,
    pub contexts: Vec<Vec<String>>,
    pub distributions: BTreeMap<String, BTreeMap<String, f64>>,
}

/// A probability measure on the full product of the sites' alphabets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSignalMeasure {
    pub sites: Vec<Site>,
    pub probs: Vec<f64>,
}

impl JointSignalMeasure {
    pub fn new(sites: Vec<Site>, probs: Vec<f64>, tol: f64) -> Result<Self, BoxError> {
        let size: usize = sites.iter().map(|s| s.alphabet.len()).product();
        if probs.len() != size {
            return Err(BoxError::ContextSize(0, probs.len(), size));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= -tol)) || (sum - 1.0).abs() > tol {
            return Err(BoxError::BadDistribution(0, sum));
        }
        Ok(JointSignalMeasure { sites, probs })
    }

    pub fn radices(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.alphabet.len()).collect()
    }

    /// Alphabet indices of point `index`.
    pub fn point(&self, index: usize) -> Vec<usize> {
        radix_digits(index, &self.radices())
    }

    pub fn index_of(&self, point: &[usize]) -> usize {
        radix_index(point, &self.radices())
    }

    pub fn marginal(&self, subset: &[usize]) -> Vec<f64> {
        let radices = self.radices();
        let sub_radices: Vec<usize> = subset.iter().map(|&s| radices[s]).collect();
        let mut out = vec![0.0; sub_radices.iter().product()];
        for (i, &p) in self.probs.iter().enumerate() {
            let d = radix_digits(i, &radices);
            let sub: Vec<usize> = subset.iter().map(|&s| d[s]).collect();
            out[radix_index(&sub, &sub_radices)] += p;
        }
        out
    }

    /// Single-context model over all sites.
    pub fn as_model(&self) -> EmpiricalModel {
        EmpiricalModel {
            sites: self.sites.clone(),
            contexts: vec![Context { sites: (0..self.sites.len()).collect(), probs: self.probs.clone() }],
        }
    }
}

/// The model whose context distributions are marginals of `measure`.
pub fn classical_box_from_joint(measure: &JointSignalMeasure, contexts: &[Vec<usize>]) -> EmpiricalModel {
    let contexts = contexts.iter().map(|c| Context { sites: c.clone(), probs: measure.marginal(c) }).collect();
    EmpiricalModel { sites: measure.sites.clone(), contexts }
}

// ---------------------------------------------------------------------------
// No-signaling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingViolation {
    pub sites: Vec<usize>,
    pub context_a: usize,
    pub context_b: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    pub no_signaling: bool,
    /// Largest marginal disagreement over all context pairs sharing sites.
    pub max_gap: f64,
    pub violations: Vec<SignalingViolation>,
}

/// Compares, for every pair of overlapping contexts, their marginals on the shared sites.
pub fn is_no_signaling(model: &EmpiricalModel, tol: f64) -> NoSignalingReport {
    let mut max_gap: f64 = 0.0;
    let mut violations = Vec::new();
    let n = model.contexts.len();
    for a in 0..n {
        for b in a + 1..n {
            let shared: Vec<usize> =
                model.contexts[a].sites.iter().copied().filter(|s| model.contexts[b].sites.contains(s)).collect();
            if shared.is_empty() {
                continue;
            }
            let ma = model.marginal(a, &shared);
            let mb = model.marginal(b, &shared);
            let gap = ma.iter().zip(&mb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            max_gap = max_gap.max(gap);
            if gap > tol {
                violations.push(SignalingViolation { sites: shared, context_a: a, context_b: b, gap });
            }
        }
    }
    NoSignalingReport { no_signaling: violations.is_empty(), max_gap, violations }
}

// ---------------------------------------------------------------------------
// Extendability

/// Linear functional over (context, outcome) pairs certifying that no joint
/// measure reproduces the model.
///
/// For every point of the product space the functional's value
/// `Σ coeff[c][o]·[point restricts to o on c]` is at most `max_point_value <= 0`,
/// so any nonnegative measure with the model's marginals would give
/// `required_value <= 0`; yet the model itself gives `required_value > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub coefficients: Vec<Vec<f64>>,
    pub required_value: f64,
    pub max_point_value: f64,
}

impl Witness {
    /// Recomputes both sides of the certificate against `model`.
    pub fn check(&self, model: &EmpiricalModel, cap: usize) -> Result<(f64, f64), BoxError> {
        let all: Vec<usize> = (0..model.sites.len()).collect();
        let radices = model.radices(&all);
        let count = product_size(&radices, cap)?;
        let mut max_point = f64::NEG_INFINITY;
        for p in 0..count {
            let d = radix_digits(p, &radices);
            let v: f64 = model
                .contexts
                .iter()
                .enumerate()
                .map(|(c, ctx)| {
                    let sub: Vec<usize> = ctx.sites.iter().map(|&s| d[s]).collect();
                    self.coefficients[c][radix_index(&sub, &model.radices(&ctx.sites))]
                })
                .sum();
            max_point = max_point.max(v);
        }
        let required = model
            .contexts
            .iter()
            .enumerate()
            .map(|(c, ctx)| ctx.probs.iter().zip(&self.coefficients[c]).map(|(p, y)| p * y).sum::<f64>())
            .sum();
        Ok((required, max_point))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityVerdict {
    Extending(JointSignalMeasure),
    Infeasible(Witness),
}

impl FeasibilityVerdict {
    pub fn is_extendable(&self) -> bool {
        matches!(self, FeasibilityVerdict::Extending(_))
    }
}

fn product_size(radices: &[usize], cap: usize) -> Result<usize, BoxError> {
    let count = radices.iter().try_fold(1usize, |a, &r| a.checked_mul(r)).unwrap_or(usize::MAX);
    if count > cap {
        return Err(BoxError::TooLarge { count, cap });
    }
    Ok(count)
}

/// Decides whether one measure on the product of all alphabets has every
/// context distribution as a marginal, by phase-one simplex.
pub fn is_extendable(model: &EmpiricalModel, tol: f64, cap: usize) -> Result<FeasibilityVerdict, BoxError> {
    let all: Vec<usize> = (0..model.sites.len()).collect();
    let radices = model.radices(&all);
    let count = product_size(&radices, cap)?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut row_of: Vec<(usize, usize)> = Vec::new();
    for (c, ctx) in model.contexts.iter().enumerate() {
        let sub_radices = model.radices(&ctx.sites);
        let mut block = vec![vec![0.0; count]; ctx.probs.len()];
        for p in 0..count {
            let d = radix_digits(p, &radices);
            let sub: Vec<usize> = ctx.sites.iter().map(|&s| d[s]).collect();
            block[radix_index(&sub, &sub_radices)][p] = 1.0;
        }
        for (o, row) in block.into_iter().enumerate() {
            rows.push(row);
            rhs.push(ctx.probs[o]);
            row_of.push((c, o));
        }
    }
    let lp = LinearProgram::feasibility(count, rows, rhs);
    match lp.solve(tol) {
        LpOutcome::Optimal { x, .. } => {
            let sum: f64 = x.iter().sum();
            let probs = x.iter().map(|v| v / sum).collect();
            Ok(FeasibilityVerdict::Extending(JointSignalMeasure { sites: model.sites.clone(), probs }))
        }
        LpOutcome::Infeasible { farkas, .. } => {
            let mut coefficients: Vec<Vec<f64>> = model.contexts.iter().map(|c| vec![0.0; c.probs.len()]).collect();
            let scale = farkas.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(f64::MIN_POSITIVE);
            for (&(c, o), y) in row_of.iter().zip(&farkas) {
                coefficients[c][o] = y / scale;
            }
            let mut w = Witness { coefficients, required_value: 0.0, max_point_value: 0.0 };
            let (required, max_point) = w.check(model, cap)?;
            w.required_value = required;
            w.max_point_value = max_point;
            Ok(FeasibilityVerdict::Infeasible(w))
        }
        LpOutcome::Unbounded => unreachable!("feasibility programs have no objective"),
    }
}

/// Result of propagating zero-probability context outcomes to the product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroForcing {
    /// Product-space points that any extending measure must leave at zero.
    pub forced: BTreeSet<usize>,
    /// A context outcome with positive probability all of whose points are forced,
    /// with that probability.
    pub contradiction: Option<(usize, usize, f64)>,
}

/// Combinatorial infeasibility check independent of the LP: every point
/// restricting to a zero-probability context outcome must carry zero mass; if a
/// positive-probability outcome only has such points above it, no extension exists.
pub fn zero_forcing(model: &EmpiricalModel, tol: f64, cap: usize) -> Result<ZeroForcing, BoxError> {
    let all: Vec<usize> = (0..model.sites.len()).collect();
    let radices = model.radices(&all);
    let count = product_size(&radices, cap)?;
    let restrict = |p: usize, c: usize| {
        let d = radix_digits(p, &radices);
        let ctx = &model.contexts[c];
        let sub: Vec<usize> = ctx.sites.iter().map(|&s| d[s]).collect();
        radix_index(&sub, &model.radices(&ctx.sites))
    };
    let forced: BTreeSet<usize> = (0..count)
        .filter(|&p| (0..model.contexts.len()).any(|c| model.contexts[c].probs[restrict(p, c)] <= tol))
        .collect();
    let mut contradiction = None;
    'outer: for (c, ctx) in model.contexts.iter().enumerate() {
        for (o, &prob) in ctx.probs.iter().enumerate() {
            if prob > tol && (0..count).filter(|&p| restrict(p, c) == o).all(|p| forced.contains(&p)) {
                contradiction = Some((c, o, prob));
                break 'outer;
            }
        }
    }
    Ok(ZeroForcing { forced, contradiction })
}

// ---------------------------------------------------------------------------
// Exchangeability and conditionals

/// Whether the joint law of the visit-indexed sites of `info_set` is invariant
/// under permutations of the visits.
pub fn is_exchangeable(model: &EmpiricalModel, info_set: &str, tol: f64) -> Result<bool, BoxError> {
    let mut visits: Vec<(usize, usize)> = model
        .sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.info_set == info_set)
        .filter_map(|(i, s)| s.visit_index.map(|v| (v, i)))
        .collect();
    visits.sort();
    let sites: Vec<usize> = visits.iter().map(|&(_, i)| i).collect();
    let shape_err = || BoxError::NotExchangeableShape(info_set.to_string());
    if sites.len() < 2 || sites.iter().any(|&s| model.sites[s].alphabet != model.sites[sites[0]].alphabet) {
        return Err(shape_err());
    }
    let c = model.contexts.iter().position(|ctx| sites.iter().all(|s| ctx.sites.contains(s))).ok_or_else(shape_err)?;
    let joint = model.marginal(c, &sites);
    let radices = model.radices(&sites);
    // adjacent transpositions generate every permutation
    for i in 0..joint.len() {
        let d = radix_digits(i, &radices);
        for k in 0..d.len() - 1 {
            let mut swapped = d.clone();
            swapped.swap(k, k + 1);
            if (joint[i] - joint[radix_index(&swapped, &radices)]).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Distribution of `target` given observed outcomes at other sites.
///
/// Single-outcome sites carry no information and are ignored when looking for a
/// covering context. `hint` selects a context if it covers the query; otherwise
/// the first covering context is used. For no-signaling models the answer does
/// not depend on that choice.
pub fn conditional_at_site(
    model: &EmpiricalModel,
    target: usize,
    observed: &[(usize, usize)],
    hint: Option<usize>,
) -> Result<Vec<f64>, BoxError> {
    let k = model.sites[target].alphabet.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let relevant: Vec<(usize, usize)> =
        observed.iter().copied().filter(|&(s, _)| model.sites[s].alphabet.len() > 1 && s != target).collect();
    let covers = |c: usize| {
        let ctx = &model.contexts[c];
        ctx.sites.contains(&target) && relevant.iter().all(|(s, _)| ctx.sites.contains(s))
    };
    let c = match hint {
        Some(h) if h < model.contexts.len() && covers(h) => h,
        _ => (0..model.contexts.len()).find(|&c| covers(c)).ok_or_else(|| {
            let mut ids: Vec<String> = relevant.iter().map(|&(s, _)| model.sites[s].id.clone()).collect();
            ids.push(model.sites[target].id.clone());
            BoxError::NoCoveringContext(ids)
        })?,
    };
    let mut subset: Vec<usize> = relevant.iter().map(|&(s, _)| s).collect();
    subset.push(target);
    let marg = model.marginal(c, &subset);
    let radices = model.radices(&subset);
    let mut digits: Vec<usize> = relevant.iter().map(|&(_, o)| o).collect();
    digits.push(0);
    let mut out = Vec::with_capacity(k);
    for o in 0..k {
        *digits.last_mut().unwrap() = o;
        out.push(marg[radix_index(&digits, &radices)].max(0.0));
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(BoxError::UnreachableBranch);
    }
    Ok(out.into_iter().map(|p| p / total).collect())
}
