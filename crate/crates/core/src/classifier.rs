//! Closed-form decision procedure for triples `{r_n, r_m, r_k}`.
//!
//! [`classify`] walks a fixed rule list and records the first decisive rule.
//! Negative verdicts carry a [`Certificate`] that can be checked mechanically
//! against the generators; positive verdicts can be backed by a [`Witness`]
//! built from explicit group elements.

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::grouptest::{
    self, all_even, cycle_distance, find_nontrivial_block_system, lemma_ncycle_3cycle,
    lemma_ncycle_transposition, orbit_of, verify_block_partition, verify_invariant_set,
    GeneratorSet, GroupError, PointSet, ThreeCycleOutcome,
};
use crate::perm::{Permutation, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("invalid triple ({n},{m},{k}): need 2 <= k < m < n")]
    InvalidTriple { n: usize, m: usize, k: usize },
    #[error("witness mismatch for {triple}: {detail}")]
    WitnessMismatch { triple: Triple, detail: String },
    #[error("{0} is not classified as generating")]
    NotGenerating(Triple),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Indices of `{r_n, r_m, r_k}` with `2 <= k < m < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl Triple {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Triple, ClassifierError> {
        if !(2 <= k && k < m && m < n && n <= MAX_DEGREE) {
            return Err(ClassifierError::InvalidTriple { n, m, k });
        }
        Ok(Triple { n, m, k })
    }

    /// `n - m`.
    pub fn gap(&self) -> usize {
        self.n - self.m
    }

    pub fn generators(&self) -> GeneratorSet {
        GeneratorSet::reversals(self.n, &[self.n, self.m, self.k]).expect("valid triple")
    }

    /// Every valid triple of degree `n`, ordered by `(m, k)`.
    pub fn all_of_degree(n: usize) -> impl Iterator<Item = Triple> {
        (3..n).flat_map(move |m| (2..m).map(move |k| Triple { n, m, k }))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Some index must exceed `floor(n/2)`.
    #[serde(rename = "c2_large_index")]
    LargeIndex,
    /// Some index must be even.
    #[serde(rename = "c3_even_index")]
    EvenIndex,
    /// Some reversal must be odd.
    #[serde(rename = "c4_odd_permutation")]
    OddPermutation,
    /// The indices must be coprime.
    #[serde(rename = "c5_coprime_indices")]
    CoprimeIndices,
    #[serde(rename = "k_eq_2")]
    KTwo,
    #[serde(rename = "k_eq_3")]
    KThree,
    #[serde(rename = "m_eq_n_minus_1")]
    TopAdjacent,
    #[serde(rename = "m_eq_n_minus_2")]
    TopSkipOne,
    /// Residues of the outer `2k` points modulo `n - m`.
    #[serde(rename = "residue_invariant_set")]
    ResidueSet,
    /// Multiples of `n - m` when it divides `n + 1`.
    #[serde(rename = "divisor_invariant_set")]
    DivisorSet,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::LargeIndex => "c2_large_index",
            Rule::EvenIndex => "c3_even_index",
            Rule::OddPermutation => "c4_odd_permutation",
            Rule::CoprimeIndices => "c5_coprime_indices",
            Rule::KTwo => "k_eq_2",
            Rule::KThree => "k_eq_3",
            Rule::TopAdjacent => "m_eq_n_minus_1",
            Rule::TopSkipOne => "m_eq_n_minus_2",
            Rule::ResidueSet => "residue_invariant_set",
            Rule::DivisorSet => "divisor_invariant_set",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Proof object for a negative verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A nonempty proper subset mapped onto itself by every generator.
    InvariantSet {
        points: Vec<usize>,
    },
    /// A nontrivial partition whose parts are permuted by every generator.
    InvariantPartition {
        parts: Vec<Vec<usize>>,
        block_size: Option<usize>,
    },
    /// Every generator is an even permutation.
    AllEvenSubgroup,
    Uncertified {
        note: String,
    },
}

impl Certificate {
    fn partition(parts: Vec<Vec<usize>>) -> Certificate {
        let size = parts.first().map(|p| p.len());
        let block_size = size.filter(|&s| parts.iter().all(|p| p.len() == s));
        Certificate::InvariantPartition { parts, block_size }
    }

    /// Checks the certificate against the generators. `Uncertified` never
    /// verifies.
    pub fn verify(&self, gens: &GeneratorSet) -> bool {
        match self {
            Certificate::InvariantSet { points } => {
                verify_invariant_set(gens, &points.iter().copied().collect())
            }
            Certificate::InvariantPartition { parts, .. } => {
                verify_block_partition(gens, parts).unwrap_or(false)
            }
            Certificate::AllEvenSubgroup => all_even(gens),
            Certificate::Uncertified { .. } => false,
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Certificate::Uncertified { .. })
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Certificate::InvariantSet { .. } => "invariant_set",
            Certificate::InvariantPartition { .. } => "block_partition",
            Certificate::AllEvenSubgroup => "all_even",
            Certificate::Uncertified { .. } => "uncertified",
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("type", self.type_name())?;
        match self {
            Certificate::InvariantSet { points } => map.serialize_entry("data", points)?,
            Certificate::InvariantPartition { parts, block_size } => {
                map.serialize_entry("data", parts)?;
                map.serialize_entry("block_size", block_size)?;
            }
            Certificate::AllEvenSubgroup => map.serialize_entry("data", &[0usize; 0])?,
            Certificate::Uncertified { note } => {
                map.serialize_entry("data", &[0usize; 0])?;
                map.serialize_entry("note", note)?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Generates {
        rule: Rule,
    },
    NotGenerates {
        reason: Rule,
        certificate: Option<Certificate>,
    },
    Unknown,
}

impl Verdict {
    /// `Some(true)` / `Some(false)` when decisive.
    pub fn decision(&self) -> Option<bool> {
        match self {
            Verdict::Generates { .. } => Some(true),
            Verdict::NotGenerates { .. } => Some(false),
            Verdict::Unknown => None,
        }
    }

    pub fn rule(&self) -> Option<Rule> {
        match self {
            Verdict::Generates { rule } => Some(*rule),
            Verdict::NotGenerates { reason, .. } => Some(*reason),
            Verdict::Unknown => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::NotGenerates { certificate, .. } => certificate.as_ref(),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Generates { .. } => "generates",
            Verdict::NotGenerates { .. } => "not_generates",
            Verdict::Unknown => "unknown",
        }
    }
}

/// JSON view of a classification.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRecord<'a> {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub verdict: &'static str,
    pub rule: Option<&'static str>,
    pub certificate: Option<&'a Certificate>,
}

impl<'a> VerdictRecord<'a> {
    pub fn new(t: Triple, v: &'a Verdict) -> Self {
        VerdictRecord {
            n: t.n,
            m: t.m,
            k: t.k,
            verdict: v.label(),
            rule: v.rule().map(|r| r.as_str()),
            certificate: v.certificate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NecessaryOutcome {
    Pass,
    Fail {
        reason: Rule,
        certificate: Certificate,
    },
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn consecutive_blocks(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..n / size)
        .map(|a| (a * size + 1..=a * size + size).collect())
        .collect()
}

/// Two parts of `{1..n}` split by residue modulo `modulus`.
fn residue_split(n: usize, modulus: usize, first: &[usize]) -> Vec<Vec<usize>> {
    let (a, b): (Vec<usize>, Vec<usize>) = (1..=n).partition(|t| first.contains(&(t % modulus)));
    vec![a, b]
}

fn parity_split(n: usize) -> Vec<Vec<usize>> {
    residue_split(n, 2, &[1])
}

/// Cheap combinatorial obstructions. Certified obstructions are tested
/// before the uncertified large-index condition.
pub fn necessary_conditions(t: Triple) -> NecessaryOutcome {
    let Triple { n, m, k } = t;
    if n % 2 == 1 && m % 2 == 1 && k % 2 == 1 {
        return NecessaryOutcome::Fail {
            reason: Rule::EvenIndex,
            certificate: Certificate::partition(parity_split(n)),
        };
    }
    if [n, m, k].iter().all(|&i| (i / 2) % 2 == 0) {
        return NecessaryOutcome::Fail {
            reason: Rule::OddPermutation,
            certificate: Certificate::AllEvenSubgroup,
        };
    }
    let g = gcd(gcd(n, m), k);
    if g > 1 {
        return NecessaryOutcome::Fail {
            reason: Rule::CoprimeIndices,
            certificate: Certificate::partition(consecutive_blocks(n, g)),
        };
    }
    if m <= n / 2 {
        return NecessaryOutcome::Fail {
            reason: Rule::LargeIndex,
            certificate: Certificate::Uncertified {
                note: "no index in (n/2, n): 2-transitivity fails".into(),
            },
        };
    }
    NecessaryOutcome::Pass
}

/// Invariant set built from the residues of `{1..k} ∪ {n-k+1..n}` modulo
/// `l = n - m`, offered when `l >= 2k + 1` and only if it verifies.
pub fn prop1_certificate(t: Triple) -> Option<Certificate> {
    let Triple { n, k, .. } = t;
    let l = t.gap();
    if l < 2 * k + 1 {
        return None;
    }
    let residues: Vec<usize> = (1..=k).chain(n - k + 1..=n).map(|s| s % l).collect();
    let delta: PointSet = (1..=n).filter(|x| residues.contains(&(x % l))).collect();
    checked_invariant_set(t, delta)
}

/// Multiples of `l = n - m`, offered when `l >= k + 1` and `l | n + 1`.
pub fn prop2_certificate(t: Triple) -> Option<Certificate> {
    let l = t.gap();
    if l < t.k + 1 || (t.n + 1) % l != 0 {
        return None;
    }
    let delta: PointSet = (l..=t.n).step_by(l).collect();
    checked_invariant_set(t, delta)
}

fn checked_invariant_set(t: Triple, delta: PointSet) -> Option<Certificate> {
    verify_invariant_set(&t.generators(), &delta).then(|| Certificate::InvariantSet {
        points: delta.into_iter().collect(),
    })
}

/// Block systems known in closed form for particular triple shapes.
pub fn closed_form_partition(t: Triple) -> Option<Vec<Vec<usize>>> {
    let Triple { n, m, k } = t;
    match (k, t.gap()) {
        (2, 3) if n % 3 == 0 => Some(consecutive_blocks(n, 3)),
        (2, 3) if n % 6 == 4 => Some(residue_split(n, 6, &[0, 1, 2])),
        (3, 4) if n % 4 == 0 => Some(consecutive_blocks(n, 4)),
        (3, 4) if n % 8 == 6 => Some(residue_split(n, 8, &[0, 1, 2, 3])),
        (3, 4) if n % 8 == 2 => Some(residue_split(n, 8, &[1, 3, 4, 6])),
        _ if n % 2 == 0 && m % 2 == 1 && k % 2 == 1 => Some(parity_split(n)),
        _ => None,
    }
}

/// Best available certificate for a triple already known not to generate:
/// a closed-form block system, then the orbit of 1, then a searched block
/// system. Every returned certificate has been verified.
pub fn structural_certificate(t: Triple) -> Option<Certificate> {
    let gens = t.generators();
    if let Some(parts) = closed_form_partition(t) {
        let cert = Certificate::partition(parts);
        if cert.verify(&gens) {
            return Some(cert);
        }
    }
    let orbit = orbit_of(&gens, 1).expect("point 1 exists");
    if orbit.len() < t.n {
        return Some(Certificate::InvariantSet {
            points: orbit.into_iter().collect(),
        });
    }
    find_nontrivial_block_system(&gens)
        .ok()
        .flatten()
        .map(|p| Certificate::partition(p.parts().to_vec()))
}

/// Exact characterization for `k = 2`.
pub fn rule_k2(t: Triple) -> Option<bool> {
    let Triple { n, m, k } = t;
    if k != 2 {
        return None;
    }
    Some(if n % 2 == 0 {
        m == n - 1
    } else if n % 3 == 1 {
        n - m <= 3
    } else {
        n - m <= 2
    })
}

/// Exact characterization for `k = 3`.
pub fn rule_k3(t: Triple) -> Option<bool> {
    let Triple { n, m, k } = t;
    if k != 3 {
        return None;
    }
    let gap = n - m;
    Some(
        (n % 2 == 0 && gap == 2)
            || ((gap == 3 || gap == 1) && (n % 6 == 1 || n % 6 == 5))
            || (gap == 1 && n % 6 == 3),
    )
}

/// Exact characterization for `m = n - 1`.
pub fn rule_top_adjacent(t: Triple) -> Option<bool> {
    let Triple { n, k, .. } = t;
    if t.gap() != 1 {
        return None;
    }
    Some((n % 2 == 0 && k % 2 == 0) || n % 4 == 3 || (n % 4 == 1 && (k % 4 == 2 || k % 4 == 3)))
}

/// Exact characterization for `m = n - 2`.
pub fn rule_top_skip_one(t: Triple) -> Option<bool> {
    if t.gap() != 2 {
        return None;
    }
    Some(t.n % 2 != t.k % 2)
}

/// Every exact characterization that applies to `t`, with its answer.
pub fn applicable_rules(t: Triple) -> Vec<(Rule, bool)> {
    [
        (Rule::KTwo, rule_k2(t)),
        (Rule::KThree, rule_k3(t)),
        (Rule::TopAdjacent, rule_top_adjacent(t)),
        (Rule::TopSkipOne, rule_top_skip_one(t)),
    ]
    .into_iter()
    .filter_map(|(r, v)| v.map(|v| (r, v)))
    .collect()
}

fn negative(reason: Rule, t: Triple) -> Verdict {
    Verdict::NotGenerates {
        reason,
        certificate: Some(
            structural_certificate(t).unwrap_or_else(|| Certificate::Uncertified {
                note: "no invariant set or block system found".into(),
            }),
        ),
    }
}

pub fn classify(t: Triple) -> Verdict {
    if let NecessaryOutcome::Fail {
        reason,
        certificate,
    } = necessary_conditions(t)
    {
        let certificate = if certificate.is_certified() {
            certificate
        } else {
            structural_certificate(t).unwrap_or(certificate)
        };
        return Verdict::NotGenerates {
            reason,
            certificate: Some(certificate),
        };
    }
    for (rule, decide) in [
        (Rule::KTwo, rule_k2 as fn(Triple) -> Option<bool>),
        (Rule::KThree, rule_k3),
        (Rule::TopAdjacent, rule_top_adjacent),
        (Rule::TopSkipOne, rule_top_skip_one),
    ] {
        match decide(t) {
            Some(true) => return Verdict::Generates { rule },
            Some(false) => return negative(rule, t),
            None => {}
        }
    }
    if let Some(cert) = prop1_certificate(t) {
        return Verdict::NotGenerates {
            reason: Rule::ResidueSet,
            certificate: Some(cert),
        };
    }
    if let Some(cert) = prop2_certificate(t) {
        return Verdict::NotGenerates {
            reason: Rule::DivisorSet,
            certificate: Some(cert),
        };
    }
    Verdict::Unknown
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// An `n`-cycle and a 3-cycle from the group.
    ThreeCycle,
    /// An `n`-cycle and a transposition from the group.
    NcyclePlusTransposition,
    /// A transposition joining the two cycles of an element with coprime
    /// cycle lengths, so conjugates give every adjacent transposition.
    AdjacentTranspositions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessElement {
    pub name: String,
    /// Reversal indices whose product (rightmost first) gives the element,
    /// when the element is a plain word.
    pub word: Option<String>,
    pub element: Permutation,
    pub cycles: String,
}

impl WitnessElement {
    fn new(name: &str, word: Option<String>, element: Permutation) -> Self {
        WitnessElement {
            name: name.to_string(),
            word,
            cycles: element.cycle_string(),
            element,
        }
    }
}

/// Constructive evidence that a triple generates the symmetric group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub elements: Vec<WitnessElement>,
    /// Cycle form the key element was claimed (and checked) to have.
    pub claimed: String,
    pub s: Option<usize>,
    pub exponent: Option<usize>,
    pub gcd: Option<usize>,
    /// Index of an odd generator, needed when the lemma only yields the
    /// alternating group.
    pub odd_generator: Option<usize>,
}

impl Witness {
    pub fn element(&self, name: &str) -> Option<&Permutation> {
        self.elements
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.element)
    }
}

fn r(n: usize, i: usize) -> Permutation {
    Permutation::reversal(n, i).expect("index in range")
}

fn product(n: usize, factors: &[&Permutation]) -> Permutation {
    factors.iter().fold(Permutation::identity(n), |acc, f| {
        acc.compose(f).expect("same degree")
    })
}

fn cycle(n: usize, points: Vec<usize>) -> Permutation {
    Permutation::from_cycles(n, &[points]).expect("valid cycle")
}

fn step3(from: usize, to: usize) -> impl Iterator<Item = usize> {
    (from..=to).step_by(3)
}

/// The closed-form `n`-cycle `r_n r_{n-3} r_2` for `n = 6s + 1`.
pub fn claimed_sigma(n: usize) -> Permutation {
    let s = n / 6;
    let mut pts = vec![1];
    pts.extend(step3(5, 6 * s - 1));
    pts.extend(step3(3, 6 * s));
    pts.push(2);
    pts.extend(step3(4, 6 * s + 1));
    cycle(n, pts)
}

/// The closed-form `n`-cycle `r_n r_{n-3} r_3` for `n = 6s + 1`.
pub fn claimed_sigma1(n: usize) -> Permutation {
    let s = n / 6;
    let mut pts = vec![1];
    pts.extend(step3(6, 6 * s));
    pts.push(2);
    pts.extend(step3(5, 6 * s - 1));
    pts.push(3);
    pts.extend(step3(4, 6 * s + 1));
    cycle(n, pts)
}

/// The closed-form `n`-cycle `r_n r_{n-3} r_3` for `n = 6s + 5`.
pub fn claimed_sigma2(n: usize) -> Permutation {
    let s = n / 6;
    let mut pts = vec![1];
    pts.extend(step3(6, 6 * s + 3));
    pts.push(3);
    pts.extend(step3(4, 6 * s + 4));
    pts.push(2);
    pts.extend(step3(5, 6 * s + 5));
    cycle(n, pts)
}

/// Closed form of `r_{n-2} r_n`: descending by twos from `n`, then from
/// `n - 1`; one cycle for even `n`, two for odd `n`.
pub fn claimed_skip_product(n: usize) -> Permutation {
    let from_n: Vec<usize> = (1..=n).rev().step_by(2).collect();
    let from_n1: Vec<usize> = (1..n).rev().step_by(2).collect();
    if n % 2 == 0 {
        cycle(n, from_n.into_iter().chain(from_n1).collect())
    } else {
        Permutation::from_cycles(n, &[from_n, from_n1]).expect("disjoint cycles")
    }
}

fn three_cycle_witness(t: Triple) -> Result<Witness, String> {
    let Triple { n, k, .. } = t;
    let (rn, rm, rk) = (r(n, n), r(n, n - 1), r(n, k));
    let l = product(n, &[&rn, &rm]);
    let rr = product(n, &[&rm, &rn]);
    let ncycle = cycle(n, (1..=n).collect());
    if l != ncycle {
        return Err(format!("L = {} is not (1 2 ... n)", l.cycle_string()));
    }
    if rr != l.inverse() {
        return Err("R is not the inverse of L".into());
    }
    let sigma = product(n, &[&rk, &l, &rk, &l, &rk, &rr, &rk, &rr]);
    let claimed = cycle(n, vec![1, k, k + 2]);
    if sigma != claimed {
        return Err(format!(
            "sigma = {} differs from {}",
            sigma.cycle_string(),
            claimed.cycle_string()
        ));
    }
    let d = gcd(gcd(2, k + 1), n);
    let outcome = lemma_ncycle_3cycle(n, 1, k + 2, k).map_err(|e| e.to_string())?;
    let odd_generator = [n, n - 1, k].into_iter().find(|&i| (i / 2) % 2 == 1);
    let generates = match outcome {
        ThreeCycleOutcome::FullSym => true,
        ThreeCycleOutcome::Alternating => odd_generator.is_some(),
        ThreeCycleOutcome::Smaller => false,
    };
    if !generates {
        return Err(format!(
            "lemma outcome {outcome:?} with odd generator {odd_generator:?}"
        ));
    }
    Ok(Witness {
        kind: WitnessKind::ThreeCycle,
        elements: vec![
            WitnessElement::new("L", Some(format!("{n}.{}", n - 1)), l),
            WitnessElement::new("R", Some(format!("{}.{n}", n - 1)), rr),
            WitnessElement::new("sigma", None, sigma),
        ],
        claimed: claimed.cycle_string(),
        s: None,
        exponent: None,
        gcd: Some(d),
        odd_generator: if n % 2 == 1 { odd_generator } else { None },
    })
}

fn ncycle_witness(t: Triple) -> Result<Witness, String> {
    let Triple { n, k, .. } = t;
    let s = n / 6;
    let sigma = product(n, &[&r(n, n), &r(n, n - 3), &r(n, k)]);
    let (name, claimed, exponent, target) = match (k, n % 6) {
        (2, 1) => ("sigma", claimed_sigma(n), 4 * s, 2),
        (3, 1) => ("sigma1", claimed_sigma1(n), 4 * s, 3),
        (3, 5) => ("sigma2", claimed_sigma2(n), 2 * s + 1, 3),
        _ => return Err("no n-cycle construction for this shape".into()),
    };
    if sigma != claimed {
        return Err(format!(
            "{name} = {} differs from {}",
            sigma.cycle_string(),
            claimed.cycle_string()
        ));
    }
    if sigma.pow(exponent as u64).apply(1).ok() != Some(target) {
        return Err(format!("{name}^{exponent}(1) != {target}"));
    }
    let d = gcd(exponent, n);
    if d != 1 || cycle_distance(&sigma, 1, target) != exponent {
        return Err(format!("gcd({exponent}, {n}) = {d}"));
    }
    if !lemma_ncycle_transposition(&sigma, 1, target).map_err(|e| e.to_string())? {
        return Err("transposition lemma rejects".into());
    }
    let transposition = cycle(n, vec![1, target]);
    if r(n, k) != transposition {
        return Err(format!("r_{k} is not (1 {target})"));
    }
    Ok(Witness {
        kind: WitnessKind::NcyclePlusTransposition,
        elements: vec![
            WitnessElement::new(name, Some(format!("{n}.{}.{k}", n - 3)), sigma),
            WitnessElement::new("transposition", Some(k.to_string()), transposition),
        ],
        claimed: claimed.cycle_string(),
        s: Some(s),
        exponent: Some(exponent),
        gcd: Some(d),
        odd_generator: None,
    })
}

fn skip_one_witness(t: Triple) -> Result<Witness, String> {
    let Triple { n, k, .. } = t;
    let c = product(n, &[&r(n, n - 2), &r(n, n)]);
    if c != claimed_skip_product(n) {
        return Err(format!(
            "r_(n-2) r_n = {} differs from closed form",
            c.cycle_string()
        ));
    }
    let (target, exponent, outer) = if n % 2 == 0 {
        (3, (k - 3) / 2, n - 3)
    } else {
        (2, (k - 2) / 2, n - 2)
    };
    let t_elem = c
        .pow(exponent as u64)
        .compose(&r(n, k))
        .expect("same degree");
    let transposition = cycle(n, vec![1, target]);
    let mut shape = t_elem.cycle_type().nontrivial();
    shape.sort_unstable();
    let mut want = vec![2, outer];
    want.sort_unstable();
    if shape != want || !t_elem.cycles().contains(&vec![1, target]) {
        return Err(format!(
            "intermediate element {} has the wrong shape",
            t_elem.cycle_string()
        ));
    }
    let power = t_elem.pow(outer as u64);
    if power != transposition {
        return Err(format!(
            "power is {}, not (1 {target})",
            power.cycle_string()
        ));
    }
    let kind = if n % 2 == 0 {
        if !lemma_ncycle_transposition(&c, 1, target).map_err(|e| e.to_string())? {
            return Err("transposition lemma rejects".into());
        }
        WitnessKind::NcyclePlusTransposition
    } else {
        let cycles = c.cycles();
        let apart = cycles
            .iter()
            .all(|cy| !(cy.contains(&1) && cy.contains(&2)));
        if cycles.len() != 2 || gcd(cycles[0].len(), cycles[1].len()) != 1 || !apart {
            return Err("cycles of r_(n-2) r_n are not coprime or 1, 2 share a cycle".into());
        }
        WitnessKind::AdjacentTranspositions
    };
    Ok(Witness {
        kind,
        elements: vec![
            WitnessElement::new("c", Some(format!("{}.{n}", n - 2)), c),
            WitnessElement::new("t", None, t_elem),
            WitnessElement::new("transposition", None, transposition.clone()),
        ],
        claimed: transposition.cycle_string(),
        s: None,
        exponent: Some(exponent),
        gcd: None,
        odd_generator: None,
    })
}

/// Builds and checks an explicit witness for a generating triple. Returns
/// `Ok(None)` for the shapes whose generation is taken from known results
/// rather than constructed here (`m = n - 2` with `k` in `{2, 3}`).
pub fn build_generates_witness(t: Triple) -> Result<Option<Witness>, ClassifierError> {
    if classify(t).decision() != Some(true) {
        return Err(ClassifierError::NotGenerating(t));
    }
    let built = match (t.gap(), t.k) {
        (1, _) => three_cycle_witness(t),
        (3, 2) | (3, 3) => ncycle_witness(t),
        (2, 2) | (2, 3) => return Ok(None),
        (2, _) => skip_one_witness(t),
        _ => return Ok(None),
    };
    built
        .map(Some)
        .map_err(|detail| ClassifierError::WitnessMismatch { triple: t, detail })
}

/// Re-checks a witness from its stored elements: the transposition or
/// 3-cycle lemma must report the generating outcome.
pub fn verify_witness(t: Triple, w: &Witness) -> bool {
    let n = t.n;
    match w.kind {
        WitnessKind::ThreeCycle => {
            let Some(sigma) = w.element("sigma") else {
                return false;
            };
            let Some(l) = w.element("L") else {
                return false;
            };
            let cycles = sigma.cycles();
            if cycles.len() != 1 || cycles[0].len() != 3 || *l != cycle(n, (1..=n).collect()) {
                return false;
            }
            let mut pts = cycles[0].clone();
            pts.sort_unstable();
            match lemma_ncycle_3cycle(n, pts[0], pts[2], pts[1]) {
                Ok(ThreeCycleOutcome::FullSym) => true,
                Ok(ThreeCycleOutcome::Alternating) => w
                    .odd_generator
                    .is_some_and(|i| r(n, i).parity().is_odd() && [t.n, t.m, t.k].contains(&i)),
                _ => false,
            }
        }
        WitnessKind::NcyclePlusTransposition => {
            let Some(tr) = w.element("transposition") else {
                return false;
            };
            let Some(ncycle) = w.elements.first().map(|e| &e.element) else {
                return false;
            };
            let c = tr.cycles();
            c.len() == 1
                && c[0].len() == 2
                && lemma_ncycle_transposition(ncycle, c[0][0], c[0][1]).unwrap_or(false)
        }
        WitnessKind::AdjacentTranspositions => {
            let (Some(c), Some(tr)) = (w.element("c"), w.element("transposition")) else {
                return false;
            };
            let cycles = c.cycles();
            let tc = tr.cycles();
            cycles.len() == 2
                && cycles[0].len() + cycles[1].len() == n
                && gcd(cycles[0].len(), cycles[1].len()) == 1
                && tc.len() == 1
                && tc[0].len() == 2
                && cycles
                    .iter()
                    .all(|cy| cy.contains(&tc[0][0]) != cy.contains(&tc[0][1]))
        }
    }
}

/// Closed-form residues (mod `n - m`) that the orbit of 1 can reach for
/// `k in {2, 3}`: `{1, 2, m, m-1}` for `k = 2`, `{1, 3, m, m-2}` for `k = 3`.
pub fn orbit_residues(t: Triple) -> Option<Vec<usize>> {
    let l = t.gap();
    let m = t.m;
    match t.k {
        2 => Some(vec![1 % l, 2 % l, m % l, (m - 1) % l]),
        3 => Some(vec![1 % l, 3 % l, m % l, (m - 2) % l]),
        _ => None,
    }
}

/// Whether the generated group is transitive, as a convenience for callers
/// that only hold a triple.
pub fn is_transitive(t: Triple) -> bool {
    grouptest::is_transitive(&t.generators())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, m: usize, k: usize) -> Triple {
        Triple::new(n, m, k).unwrap()
    }

    #[test]
    fn triple_validation() {
        assert!(Triple::new(5, 4, 4).is_err());
        assert!(Triple::new(5, 4, 1).is_err());
        assert!(Triple::new(5, 5, 2).is_err());
        assert_eq!(Triple::all_of_degree(5).count(), 3);
        assert_eq!(
            (4..=12)
                .map(|n| Triple::all_of_degree(n).count())
                .sum::<usize>(),
            165
        );
    }

    #[test]
    fn necessary_condition_examples() {
        match necessary_conditions(t(8, 6, 4)) {
            NecessaryOutcome::Fail {
                reason,
                certificate,
            } => {
                assert_eq!(reason, Rule::CoprimeIndices);
                assert_eq!(
                    certificate,
                    Certificate::InvariantPartition {
                        parts: vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
                        block_size: Some(2)
                    }
                );
            }
            other => panic!("{other:?}"),
        }
        match necessary_conditions(t(9, 7, 5)) {
            NecessaryOutcome::Fail {
                reason,
                certificate,
            } => {
                assert_eq!(reason, Rule::EvenIndex);
                assert!(certificate.verify(&t(9, 7, 5).generators()));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            necessary_conditions(t(9, 8, 4)),
            NecessaryOutcome::Fail {
                reason: Rule::OddPermutation,
                certificate: Certificate::AllEvenSubgroup
            }
        );
        assert!(matches!(
            necessary_conditions(t(10, 5, 2)),
            NecessaryOutcome::Fail {
                reason: Rule::LargeIndex,
                ..
            }
        ));
        assert_eq!(necessary_conditions(t(7, 6, 5)), NecessaryOutcome::Pass);
    }

    #[test]
    fn prop1_examples() {
        let cert = prop1_certificate(t(11, 6, 2)).unwrap();
        assert_eq!(
            cert,
            Certificate::InvariantSet {
                points: vec![1, 2, 5, 6, 7, 10, 11]
            }
        );
        assert!(prop1_certificate(t(9, 7, 2)).is_none());
        let cert = prop1_certificate(t(17, 10, 3)).unwrap();
        assert!(cert.verify(&t(17, 10, 3).generators()));
    }

    #[test]
    fn prop2_examples() {
        assert_eq!(
            prop2_certificate(t(13, 6, 2)),
            Some(Certificate::InvariantSet { points: vec![7] })
        );
        assert_eq!(
            prop2_certificate(t(11, 8, 2)),
            Some(Certificate::InvariantSet {
                points: vec![3, 6, 9]
            })
        );
        assert!(prop2_certificate(t(10, 8, 2)).is_none());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(t(7, 6, 5)),
            Verdict::Generates {
                rule: Rule::TopAdjacent
            }
        );
        let v = classify(t(9, 5, 2));
        assert_eq!(v.rule(), Some(Rule::KTwo));
        assert!(matches!(
            v.certificate(),
            Some(Certificate::InvariantSet { .. })
        ));
        assert_eq!(classify(t(8, 7, 2)).decision(), Some(true));
        let v = classify(t(33, 30, 2));
        assert_eq!(v.decision(), Some(false));
        assert_eq!(
            v.certificate(),
            Some(&Certificate::InvariantPartition {
                parts: (0..11)
                    .map(|a| vec![3 * a + 1, 3 * a + 2, 3 * a + 3])
                    .collect(),
                block_size: Some(3)
            })
        );
        assert_eq!(classify(t(10, 7, 4)), Verdict::Unknown);
    }

    #[test]
    fn closed_form_blocks_verify() {
        for n in 7..=40 {
            for (m, k) in [(n - 3, 2), (n - 4, 3)] {
                if m <= k {
                    continue;
                }
                let tr = t(n, m, k);
                if let Some(parts) = closed_form_partition(tr) {
                    assert!(
                        verify_block_partition(&tr.generators(), &parts).unwrap(),
                        "{tr} {parts:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn witness_examples() {
        let w = build_generates_witness(t(5, 4, 2)).unwrap().unwrap();
        assert_eq!(w.claimed, "(1 2 4)");
        assert_eq!(w.kind, WitnessKind::ThreeCycle);
        let w = build_generates_witness(t(7, 4, 2)).unwrap().unwrap();
        assert_eq!(w.claimed, "(1 5 3 6 2 4 7)");
        assert_eq!((w.s, w.exponent, w.gcd), (Some(1), Some(4), Some(1)));
        let w = build_generates_witness(t(8, 6, 5)).unwrap().unwrap();
        assert_eq!(w.claimed, "(1 3)");
        let tel = w.element("t").unwrap();
        let mut shape = tel.cycle_type().nontrivial();
        shape.sort_unstable();
        assert_eq!(shape, vec![2, 5]);
        assert!(verify_witness(t(8, 6, 5), &w));
        assert_eq!(build_generates_witness(t(7, 5, 2)).unwrap(), None);
        assert!(matches!(
            build_generates_witness(t(8, 5, 4)),
            Err(ClassifierError::NotGenerating(_))
        ));
    }

    #[test]
    fn certificate_json() {
        let v = classify(t(8, 6, 4));
        let json = serde_json::to_value(VerdictRecord::new(t(8, 6, 4), &v)).unwrap();
        assert_eq!(json["verdict"], "not_generates");
        assert_eq!(json["rule"], "c5_coprime_indices");
        assert_eq!(json["certificate"]["type"], "block_partition");
        assert_eq!(json["certificate"]["data"][0], serde_json::json!([1, 2]));
        let v = classify(t(7, 6, 5));
        let json = serde_json::to_value(VerdictRecord::new(t(7, 6, 5), &v)).unwrap();
        assert_eq!(json["verdict"], "generates");
        assert!(json["certificate"].is_null());
        let v = classify(t(10, 7, 4));
        let json = serde_json::to_value(VerdictRecord::new(t(10, 7, 4), &v)).unwrap();
        assert_eq!(json["verdict"], "unknown");
        assert!(json["rule"].is_null());
    }
}
