//! Set-world counterpart of the embedding relations.
//!
//! Nouns and intersective adjectives denote subsets of a finite universe of
//! individuals; other adjectives are set-to-set operators. Distances are
//! Jaccard distances, compared exactly as rationals.
//!
//! Operators have no set of their own. To keep the relations evaluable they
//! get a proxy set: the union of their images over sampled noun sets. The
//! proxy is a modelling device, not a denotation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

pub const MAX_UNIVERSE: usize = 128;

#[derive(Debug, Error, PartialEq)]
pub enum DenotationError {
    #[error("universe size must be in 1..={MAX_UNIVERSE}, got {0}")]
    UniverseSize(usize),
    #[error("set {0} is not contained in the universe")]
    OutsideUniverse(IndividualSet),
    #[error("unknown noun {0:?}")]
    UnknownNoun(String),
    #[error("unknown adjective {0:?}")]
    UnknownAdjective(String),
    #[error("{0}")]
    Contract(String),
}

/// Subset of the individuals `0..128`, as a bit mask.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct IndividualSet(u128);

impl IndividualSet {
    pub const EMPTY: Self = Self(0);

    pub fn from_bits(bits: u128) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    /// All individuals `0..size`.
    pub fn universe(size: usize) -> Self {
        if size >= 128 {
            Self(u128::MAX)
        } else {
            Self((1u128 << size) - 1)
        }
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, x: usize) -> bool {
        x < 128 && self.0 >> x & 1 == 1
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }
}

impl FromIterator<usize> for IndividualSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self(iter.into_iter().fold(0, |acc, x| acc | 1u128 << x))
    }
}

impl fmt::Display for IndividualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = (0..128)
            .filter(|&i| self.contains(i))
            .map(|i| i.to_string())
            .collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Jaccard distance as the exact fraction `num / den`.
#[derive(Debug, Clone, Copy)]
pub struct JaccardRatio {
    num: u32,
    den: u32,
}

impl JaccardRatio {
    pub fn of(x: IndividualSet, y: IndividualSet) -> Self {
        let union = x.union(y).len();
        if union == 0 {
            // d(∅, ∅) = 0
            return Self { num: 0, den: 1 };
        }
        Self {
            num: union - x.intersection(y).len(),
            den: union,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_one(self) -> bool {
        self.num == self.den
    }
}

impl PartialEq for JaccardRatio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for JaccardRatio {}

impl PartialOrd for JaccardRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JaccardRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

/// `1 - |x ∩ y| / |x ∪ y|`, with `d(∅, ∅) = 0`.
pub fn jaccard_distance(x: IndividualSet, y: IndividualSet) -> f64 {
    JaccardRatio::of(x, y).value()
}

fn d(x: IndividualSet, y: IndividualSet) -> JaccardRatio {
    JaccardRatio::of(x, y)
}

/// `d(P,W) <= d(W,C) && d(P,C) <= d(W,C)` for phrase `P`, noun `W`, adjective `C`.
pub fn intersectivity_holds(
    phrase: IndividualSet,
    noun: IndividualSet,
    adjective: IndividualSet,
) -> bool {
    let bound = d(noun, adjective);
    d(phrase, noun) <= bound && d(phrase, adjective) <= bound
}

/// `max_i d(P, T_i) <= min_{j<k} d(T_j, T_k)`.
pub fn stacked_intersectivity_holds(phrase: IndividualSet, terms: &[IndividualSet]) -> bool {
    let Some(max) = terms.iter().map(|&t| d(phrase, t)).max() else {
        return true;
    };
    let min = (0..terms.len())
        .flat_map(|j| (j + 1..terms.len()).map(move |k| (j, k)))
        .map(|(j, k)| d(terms[j], terms[k]))
        .min();
    min.is_none_or(|min| max <= min)
}

/// `d(P, A) <= d(P, N)`.
pub fn nonsubsectivity_holds(
    phrase: IndividualSet,
    adjective: IndividualSet,
    noun: IndividualSet,
) -> bool {
    d(phrase, adjective) <= d(phrase, noun)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Subsective,
    Privative,
    Plain,
}

/// Set-to-set adjective meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `X ∩ mask`; always a subset of the input.
    Subsective { mask: IndividualSet },
    /// `mask \ X`; always disjoint from the input.
    Privative { mask: IndividualSet },
    /// `(X ∩ keep) ∪ (add \ X)`; inclusion in the input is undetermined.
    Plain {
        keep: IndividualSet,
        add: IndividualSet,
    },
}

impl Operator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Operator::Subsective { .. } => OperatorKind::Subsective,
            Operator::Privative { .. } => OperatorKind::Privative,
            Operator::Plain { .. } => OperatorKind::Plain,
        }
    }

    pub fn apply(&self, input: IndividualSet) -> IndividualSet {
        match *self {
            Operator::Subsective { mask } => input.intersection(mask),
            Operator::Privative { mask } => mask.difference(input),
            Operator::Plain { keep, add } => input.intersection(keep).union(add.difference(input)),
        }
    }

    /// Whether the output for `input` meets the operator's category definition.
    pub fn respects_kind(&self, input: IndividualSet) -> bool {
        let out = self.apply(input);
        match self.kind() {
            OperatorKind::Subsective => out.is_subset(input),
            OperatorKind::Privative => out.is_disjoint(input),
            OperatorKind::Plain => true,
        }
    }

    fn masks(&self) -> [IndividualSet; 2] {
        match *self {
            Operator::Subsective { mask } | Operator::Privative { mask } => {
                [mask, IndividualSet::EMPTY]
            }
            Operator::Plain { keep, add } => [keep, add],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjectiveMeaning {
    Intersective(IndividualSet),
    Operator(Operator),
}

/// Named nouns and adjectives over a finite universe.
#[derive(Debug, Clone)]
pub struct DenotationUniverse {
    size: usize,
    nouns: BTreeMap<String, IndividualSet>,
    adjectives: BTreeMap<String, AdjectiveMeaning>,
}

impl DenotationUniverse {
    pub fn new(size: usize) -> Result<Self, DenotationError> {
        if size == 0 || size > MAX_UNIVERSE {
            return Err(DenotationError::UniverseSize(size));
        }
        Ok(Self {
            size,
            nouns: BTreeMap::new(),
            adjectives: BTreeMap::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn all(&self) -> IndividualSet {
        IndividualSet::universe(self.size)
    }

    fn check(&self, set: IndividualSet) -> Result<(), DenotationError> {
        if set.is_subset(self.all()) {
            Ok(())
        } else {
            Err(DenotationError::OutsideUniverse(set))
        }
    }

    pub fn add_noun(&mut self, name: &str, set: IndividualSet) -> Result<(), DenotationError> {
        self.check(set)?;
        self.nouns.insert(name.to_string(), set);
        Ok(())
    }

    pub fn add_adjective(
        &mut self,
        name: &str,
        meaning: AdjectiveMeaning,
    ) -> Result<(), DenotationError> {
        match meaning {
            AdjectiveMeaning::Intersective(set) => self.check(set)?,
            AdjectiveMeaning::Operator(op) => {
                for m in op.masks() {
                    self.check(m)?;
                }
            }
        }
        self.adjectives.insert(name.to_string(), meaning);
        Ok(())
    }

    pub fn noun(&self, name: &str) -> Result<IndividualSet, DenotationError> {
        self.nouns
            .get(name)
            .copied()
            .ok_or_else(|| DenotationError::UnknownNoun(name.to_string()))
    }

    pub fn adjective(&self, name: &str) -> Result<AdjectiveMeaning, DenotationError> {
        self.adjectives
            .get(name)
            .copied()
            .ok_or_else(|| DenotationError::UnknownAdjective(name.to_string()))
    }

    fn apply(
        &self,
        adjective: &str,
        input: IndividualSet,
    ) -> Result<IndividualSet, DenotationError> {
        Ok(match self.adjective(adjective)? {
            AdjectiveMeaning::Intersective(set) => set.intersection(input),
            AdjectiveMeaning::Operator(op) => op.apply(input),
        })
    }

    /// Denotation of `adjective noun`.
    pub fn compose(&self, adjective: &str, noun: &str) -> Result<IndividualSet, DenotationError> {
        self.apply(adjective, self.noun(noun)?)
    }

    /// Denotation of `a_1 ... a_k noun`, applying adjectives right to left.
    pub fn compose_phrase(
        &self,
        adjectives: &[&str],
        noun: &str,
    ) -> Result<IndividualSet, DenotationError> {
        adjectives
            .iter()
            .rev()
            .try_fold(self.noun(noun)?, |acc, a| self.apply(a, acc))
    }

    /// The adjective's own set, or for operators the union of their images
    /// over every registered noun set.
    pub fn proxy_set(&self, adjective: &str) -> Result<IndividualSet, DenotationError> {
        Ok(match self.adjective(adjective)? {
            AdjectiveMeaning::Intersective(set) => set,
            AdjectiveMeaning::Operator(op) => self
                .nouns
                .values()
                .fold(IndividualSet::EMPTY, |acc, &n| acc.union(op.apply(n))),
        })
    }

    fn require_nonempty_noun(&self, noun: &str) -> Result<IndividualSet, DenotationError> {
        let set = self.noun(noun)?;
        if set.is_empty() {
            return Err(DenotationError::Contract(format!(
                "noun {noun:?} has an empty set"
            )));
        }
        Ok(set)
    }

    pub fn check_intersectivity(
        &self,
        adjective: &str,
        noun: &str,
    ) -> Result<bool, DenotationError> {
        let w = self.require_nonempty_noun(noun)?;
        let p = self.compose(adjective, noun)?;
        Ok(intersectivity_holds(p, w, self.proxy_set(adjective)?))
    }

    pub fn check_stacked_intersectivity(
        &self,
        adjectives: &[&str],
        noun: &str,
    ) -> Result<bool, DenotationError> {
        if adjectives.len() < 2 {
            return Err(DenotationError::Contract(
                "stacked intersectivity needs at least two adjectives".into(),
            ));
        }
        let w = self.require_nonempty_noun(noun)?;
        let p = self.compose_phrase(adjectives, noun)?;
        let mut terms = adjectives
            .iter()
            .map(|a| self.proxy_set(a))
            .collect::<Result<Vec<_>, _>>()?;
        terms.push(w);
        Ok(stacked_intersectivity_holds(p, &terms))
    }

    pub fn check_nonsubsectivity(
        &self,
        adjective: &str,
        noun: &str,
    ) -> Result<bool, DenotationError> {
        let n = self.require_nonempty_noun(noun)?;
        let p = self.compose(adjective, noun)?;
        Ok(nonsubsectivity_holds(p, self.proxy_set(adjective)?, n))
    }
}

/// Outcome of checking the intersective relation for every pair of
/// nonempty sets in every universe up to a size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExhaustiveCheck {
    pub max_universe: usize,
    pub checked: u64,
    pub satisfied: u64,
}

impl ExhaustiveCheck {
    pub fn rate(&self) -> f64 {
        self.satisfied as f64 / self.checked as f64
    }
}

/// For every universe size `1..=max_universe` and every nonempty `C`, `W`,
/// checks the intersective relation with `P = C ∩ W`. Cost grows as 4^n.
pub fn exhaustive_intersectivity(max_universe: usize, exec: Execution) -> ExhaustiveCheck {
    let mut checked = 0;
    let mut satisfied = 0;
    for size in 1..=max_universe {
        let all = IndividualSet::universe(size).bits();
        let per_c = exec.map_range(all as usize, |c| {
            let c = IndividualSet::from_bits(c as u128 + 1);
            (1..=all)
                .filter(|&w| {
                    let w = IndividualSet::from_bits(w);
                    intersectivity_holds(c.intersection(w), w, c)
                })
                .count() as u64
        });
        checked += (all as u64) * (all as u64);
        satisfied += per_c.iter().sum::<u64>();
    }
    ExhaustiveCheck {
        max_universe,
        checked,
        satisfied,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Intersective,
    Subsective,
    Privative,
    Plain,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Intersective,
        Category::Subsective,
        Category::Privative,
        Category::Plain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Intersective => "intersective",
            Category::Subsective => "subsective",
            Category::Privative => "privative",
            Category::Plain => "plain",
        }
    }
}

/// Relative weights of the categories among the trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMix {
    pub intersective: u32,
    pub subsective: u32,
    pub privative: u32,
    pub plain: u32,
}

impl Default for CategoryMix {
    fn default() -> Self {
        Self {
            intersective: 1,
            subsective: 1,
            privative: 1,
            plain: 1,
        }
    }
}

impl CategoryMix {
    const ZERO: Self = Self {
        intersective: 0,
        subsective: 0,
        privative: 0,
        plain: 0,
    };

    pub fn only(category: Category) -> Self {
        let mut mix = Self::ZERO;
        *mix.weight_mut(category) = 1;
        mix
    }

    pub fn weight(&self, category: Category) -> u32 {
        match category {
            Category::Intersective => self.intersective,
            Category::Subsective => self.subsective,
            Category::Privative => self.privative,
            Category::Plain => self.plain,
        }
    }

    fn weight_mut(&mut self, category: Category) -> &mut u32 {
        match category {
            Category::Intersective => &mut self.intersective,
            Category::Subsective => &mut self.subsective,
            Category::Privative => &mut self.privative,
            Category::Plain => &mut self.plain,
        }
    }

    /// Splits `trials` proportionally to the weights (largest remainder,
    /// ties to the earlier category).
    pub fn allocate(&self, trials: u64) -> [(Category, u64); 4] {
        let total: u64 = Category::ALL.iter().map(|&c| self.weight(c) as u64).sum();
        let mut out = Category::ALL.map(|c| (c, 0u64));
        if total == 0 {
            return out;
        }
        let mut remainders = Vec::with_capacity(4);
        let mut assigned = 0;
        for (i, &c) in Category::ALL.iter().enumerate() {
            let exact = trials as u128 * self.weight(c) as u128;
            out[i].1 = (exact / total as u128) as u64;
            assigned += out[i].1;
            remainders.push((exact % total as u128, i));
        }
        remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in remainders.iter().take((trials - assigned) as usize) {
            out[i].1 += 1;
        }
        out
    }
}

impl FromStr for CategoryMix {
    type Err = String;

    /// `intersective=2,privative=1`; a bare name means weight 1, omitted
    /// categories get weight 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut mix = Self::ZERO;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, weight) = part.split_once('=').unwrap_or((part, "1"));
            let category = Category::ALL
                .into_iter()
                .find(|c| c.name() == name.trim())
                .ok_or_else(|| format!("unknown category {name:?}"))?;
            *mix.weight_mut(category) = weight
                .trim()
                .parse()
                .map_err(|_| format!("bad weight in {part:?}"))?;
        }
        if Category::ALL.iter().all(|&c| mix.weight(c) == 0) {
            return Err(format!("mix {s:?} gives every category zero weight"));
        }
        Ok(mix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub seed: u64,
    pub universe_size: usize,
    pub trials: u64,
    pub mix: CategoryMix,
    /// Noun sets sampled (besides the trial's own noun) to build operator proxy sets.
    pub proxy_samples: usize,
    pub execution: Execution,
}

impl SimulationConfig {
    pub fn new(seed: u64, universe_size: usize, trials: u64, mix: CategoryMix) -> Self {
        Self {
            seed,
            universe_size,
            trials,
            mix,
            proxy_samples: 8,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub trials: u64,
    pub an_intersective: u64,
    pub aan_intersective: u64,
    pub nonsubsective: u64,
    /// Trials whose phrase set was nonempty.
    pub nonempty_phrase: u64,
    /// Nonempty-phrase trials with `d(P, N) = 1`.
    pub phrase_noun_distance_one: u64,
}

impl CategoryStats {
    fn add(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.an_intersective += t.an as u64;
        self.aan_intersective += t.aan as u64;
        self.nonsubsective += t.nonsub as u64;
        self.nonempty_phrase += t.nonempty as u64;
        self.phrase_noun_distance_one += (t.nonempty && t.disjoint_from_noun) as u64;
    }

    fn ratio(n: u64, total: u64) -> Option<f64> {
        (total > 0).then(|| n as f64 / total as f64)
    }

    pub fn an_intersectivity_rate(&self) -> Option<f64> {
        Self::ratio(self.an_intersective, self.trials)
    }

    pub fn aan_intersectivity_rate(&self) -> Option<f64> {
        Self::ratio(self.aan_intersective, self.trials)
    }

    pub fn nonsubsectivity_rate(&self) -> Option<f64> {
        Self::ratio(self.nonsubsective, self.trials)
    }

    pub fn distance_one_rate(&self) -> Option<f64> {
        Self::ratio(self.phrase_noun_distance_one, self.nonempty_phrase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRelationReport {
    pub seed: u64,
    pub universe_size: usize,
    pub trials: u64,
    pub proxy_samples: usize,
    /// Only categories that received at least one trial.
    pub categories: BTreeMap<Category, CategoryStats>,
}

impl SetRelationReport {
    pub fn stats(&self, category: Category) -> Option<&CategoryStats> {
        self.categories.get(&category)
    }

    /// One JSON object per line: a header, then one record per category.
    pub fn write_jsonl<W: Write>(&self, mut out: W, extra: &serde_json::Value) -> io::Result<()> {
        let mut header = serde_json::json!({
            "kind": "set_relation_report",
            "seed": self.seed,
            "universe_size": self.universe_size,
            "trials": self.trials,
            "proxy_samples": self.proxy_samples,
            "proxy_note": "non-intersective adjectives use a proxy set (union of operator images); modelling device only",
        });
        if let (Some(h), Some(e)) = (header.as_object_mut(), extra.as_object()) {
            h.extend(e.clone());
        }
        writeln!(out, "{header}")?;
        for (cat, s) in &self.categories {
            let rec = serde_json::json!({
                "category": cat.name(),
                "trials": s.trials,
                "an_intersectivity_rate": s.an_intersectivity_rate(),
                "aan_intersectivity_rate": s.aan_intersectivity_rate(),
                "nonsubsectivity_rate": s.nonsubsectivity_rate(),
                "nonempty_phrase": s.nonempty_phrase,
                "phrase_noun_distance_one_rate": s.distance_one_rate(),
                "stats": s,
            });
            writeln!(out, "{rec}")?;
        }
        out.flush()
    }

    /// Category × relation table; absent categories print `-`.
    pub fn render_text(&self) -> String {
        let fmt = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        let mut out = format!(
            "{:<13} {:>8} {:>8} {:>8} {:>8} {:>10}\n",
            "category", "trials", "AN", "AAN", "non-sub", "d(P,N)=1"
        );
        for cat in Category::ALL {
            let s = self.stats(cat);
            out.push_str(&format!(
                "{:<13} {:>8} {:>8} {:>8} {:>8} {:>10}\n",
                cat.name(),
                s.map_or(0, |s| s.trials),
                fmt(s.and_then(|s| s.an_intersectivity_rate())),
                fmt(s.and_then(|s| s.aan_intersectivity_rate())),
                fmt(s.and_then(|s| s.nonsubsectivity_rate())),
                fmt(s.and_then(|s| s.distance_one_rate())),
            ));
        }
        out
    }
}

struct TrialOutcome {
    an: bool,
    aan: bool,
    nonsub: bool,
    nonempty: bool,
    disjoint_from_noun: bool,
}

fn random_set<R: Rng>(rng: &mut R, all: IndividualSet) -> IndividualSet {
    IndividualSet::from_bits(rng.random::<u128>() & all.bits())
}

fn random_nonempty<R: Rng>(rng: &mut R, all: IndividualSet) -> IndividualSet {
    loop {
        let s = random_set(rng, all);
        if !s.is_empty() {
            return s;
        }
    }
}

fn random_operator<R: Rng>(rng: &mut R, kind: OperatorKind, all: IndividualSet) -> Operator {
    match kind {
        OperatorKind::Subsective => Operator::Subsective {
            mask: random_set(rng, all),
        },
        OperatorKind::Privative => Operator::Privative {
            mask: random_set(rng, all),
        },
        OperatorKind::Plain => Operator::Plain {
            keep: random_set(rng, all),
            add: random_set(rng, all),
        },
    }
}

fn run_trial(config: &SimulationConfig, category: Category, index: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let all = IndividualSet::universe(config.universe_size);
    let noun = random_nonempty(&mut rng, all);
    let second = random_nonempty(&mut rng, all);

    let (phrase, proxy, phrase2) = match category {
        Category::Intersective => {
            let adj = random_nonempty(&mut rng, all);
            let p = adj.intersection(noun);
            (p, adj, adj.intersection(second).intersection(noun))
        }
        Category::Subsective | Category::Privative | Category::Plain => {
            let kind = match category {
                Category::Subsective => OperatorKind::Subsective,
                Category::Privative => OperatorKind::Privative,
                _ => OperatorKind::Plain,
            };
            let op = random_operator(&mut rng, kind, all);
            let mut proxy = op.apply(noun);
            for _ in 0..config.proxy_samples {
                proxy = proxy.union(op.apply(random_nonempty(&mut rng, all)));
            }
            (op.apply(noun), proxy, op.apply(second.intersection(noun)))
        }
    };

    TrialOutcome {
        an: intersectivity_holds(phrase, noun, proxy),
        aan: stacked_intersectivity_holds(phrase2, &[proxy, second, noun]),
        nonsub: nonsubsectivity_holds(phrase, proxy, noun),
        nonempty: !phrase.is_empty(),
        disjoint_from_noun: d(phrase, noun).is_one(),
    }
}

/// Samples random sets and operators per category and tallies how often
/// each relation holds. Trial `i` draws from ChaCha8 stream `i` of the seed,
/// so the report does not depend on execution mode.
pub fn run_simulation(config: &SimulationConfig) -> Result<SetRelationReport, DenotationError> {
    if config.universe_size == 0 || config.universe_size > MAX_UNIVERSE {
        return Err(DenotationError::UniverseSize(config.universe_size));
    }
    let mut plan = Vec::with_capacity(config.trials as usize);
    for (cat, n) in config.mix.allocate(config.trials) {
        plan.extend(std::iter::repeat_n(cat, n as usize));
    }
    let outcomes = config
        .execution
        .map_range(plan.len(), |i| run_trial(config, plan[i], i as u64));

    let mut categories = BTreeMap::new();
    for (cat, outcome) in plan.iter().zip(&outcomes) {
        categories
            .entry(*cat)
            .or_insert_with(CategoryStats::default)
            .add(outcome);
    }
    Ok(SetRelationReport {
        seed: config.seed,
        universe_size: config.universe_size,
        trials: config.trials,
        proxy_samples: config.proxy_samples,
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> IndividualSet {
        items.iter().copied().collect()
    }

    #[test]
    fn jaccard_examples() {
        let x = set(&[1, 4, 5]);
        assert_eq!(jaccard_distance(x, x), 0.0);
        assert!((jaccard_distance(set(&[1, 2]), set(&[2, 3])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            jaccard_distance(IndividualSet::EMPTY, IndividualSet::EMPTY),
            0.0
        );
        assert_eq!(jaccard_distance(IndividualSet::EMPTY, set(&[0])), 1.0);
    }

    #[test]
    fn compose_intersective_and_operators() {
        let mut u = DenotationUniverse::new(8).unwrap();
        u.add_noun("writer", set(&[1, 2])).unwrap();
        u.add_adjective("canadian", AdjectiveMeaning::Intersective(set(&[0, 1])))
            .unwrap();
        u.add_adjective(
            "fake",
            AdjectiveMeaning::Operator(Operator::Privative {
                mask: set(&[1, 2, 3, 4]),
            }),
        )
        .unwrap();
        u.add_adjective(
            "skilful",
            AdjectiveMeaning::Operator(Operator::Subsective { mask: set(&[2, 5]) }),
        )
        .unwrap();
        assert_eq!(u.compose("canadian", "writer").unwrap(), set(&[1]));
        let fake = u.compose("fake", "writer").unwrap();
        assert!(fake.is_disjoint(set(&[1, 2])));
        assert_eq!(fake, set(&[3, 4]));
        assert!(u
            .compose("skilful", "writer")
            .unwrap()
            .is_subset(set(&[1, 2])));
        assert_eq!(
            u.compose("tall", "writer"),
            Err(DenotationError::UnknownAdjective("tall".into()))
        );
        assert_eq!(
            u.compose("canadian", "poet"),
            Err(DenotationError::UnknownNoun("poet".into()))
        );
    }

    #[test]
    fn universe_bounds() {
        assert!(DenotationUniverse::new(0).is_err());
        assert!(DenotationUniverse::new(129).is_err());
        let mut u = DenotationUniverse::new(3).unwrap();
        assert!(matches!(
            u.add_noun("x", set(&[3])),
            Err(DenotationError::OutsideUniverse(_))
        ));
    }

    #[test]
    fn intersectivity_examples() {
        let mut u = DenotationUniverse::new(6).unwrap();
        u.add_noun("w", set(&[0, 1])).unwrap();
        u.add_adjective("same", AdjectiveMeaning::Intersective(set(&[0, 1])))
            .unwrap();
        assert!(u.check_intersectivity("same", "w").unwrap());
        // W = {0,1}, C = {1,2}, P = {3}: d(P,W) = 1 > d(W,C) = 2/3.
        assert!(!intersectivity_holds(set(&[3]), set(&[0, 1]), set(&[1, 2])));
    }

    #[test]
    fn stacked_intersectivity_examples() {
        let a = set(&[0]);
        let b = set(&[0, 1]);
        let w = set(&[0, 1, 2]);
        // P = A; max d(P,T) = d(A,W) = 2/3 > min pair d = d(A,B) = 1/2.
        assert!(!stacked_intersectivity_holds(a, &[a, b, w]));
        assert!(stacked_intersectivity_holds(w, &[w, w, w]));
        let (x, y, z) = (set(&[0]), set(&[1]), set(&[2]));
        assert!(stacked_intersectivity_holds(
            IndividualSet::EMPTY,
            &[x, y, z]
        ));
    }

    #[test]
    fn nonsubsectivity_examples() {
        let n = set(&[0, 1, 2]);
        assert!(nonsubsectivity_holds(set(&[5]), set(&[5, 6]), n));
        // intersective, |A| = |N|
        let a = set(&[2, 3, 4]);
        assert!(nonsubsectivity_holds(a.intersection(n), a, n));
        assert_eq!(
            jaccard_distance(a.intersection(n), a),
            jaccard_distance(a.intersection(n), n)
        );
        // intersective, |A| > |N|
        let big = set(&[2, 3, 4, 5]);
        assert!(!nonsubsectivity_holds(big.intersection(n), big, n));
    }

    #[test]
    fn allocation() {
        let mix = CategoryMix::default();
        let alloc = mix.allocate(10);
        assert_eq!(alloc.iter().map(|a| a.1).collect::<Vec<_>>(), [3, 3, 2, 2]);
        assert_eq!(
            CategoryMix::only(Category::Privative).allocate(7)[2],
            (Category::Privative, 7)
        );
    }

    #[test]
    fn simulation_intersective_always_holds() {
        let report =
            run_simulation(&SimulationConfig::new(3, 12, 2000, CategoryMix::default())).unwrap();
        let s = report.stats(Category::Intersective).unwrap();
        assert_eq!(s.an_intersectivity_rate(), Some(1.0));
        let p = report.stats(Category::Privative).unwrap();
        assert_eq!(p.distance_one_rate(), Some(1.0));
    }

    #[test]
    fn absent_category_reported_absent() {
        let mix: CategoryMix = "intersective,subsective,plain".parse().unwrap();
        assert_eq!(
            mix,
            CategoryMix {
                privative: 0,
                ..CategoryMix::default()
            }
        );
        let report = run_simulation(&SimulationConfig::new(1, 8, 100, mix)).unwrap();
        assert!(report.stats(Category::Privative).is_none());
        assert!(report
            .render_text()
            .contains("privative            0        -"));
    }

    #[test]
    fn single_trial() {
        let report = run_simulation(&SimulationConfig::new(
            1,
            8,
            1,
            CategoryMix::only(Category::Plain),
        ))
        .unwrap();
        let r = report
            .stats(Category::Plain)
            .unwrap()
            .an_intersectivity_rate()
            .unwrap();
        assert!(r == 0.0 || r == 1.0);
    }
}
