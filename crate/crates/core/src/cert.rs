//! The local certification execution model.
//!
//! A scheme pairs a prover (graph -> certificate assignment) with a radius-1
//! verifier (local view -> accept/reject). The view of a vertex holds its own
//! id and certificate plus the (id, certificate) multiset of its neighbors,
//! and nothing else: a vertex cannot see which edges run among its neighbors.
//! Verifiers are total over all bit strings; malformed data means local
//! rejection, never an error.
//!
//! Per-vertex verification and adversarial search are embarrassingly
//! parallel, so both run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::graph::{Graph, GraphError, VertexId};

/// A certificate: a finite bit string. Its size is its exact length in bits.
pub type Certificate = Bits;

/// A total map from the graph's vertices to certificates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    map: BTreeMap<VertexId, Certificate>,
}

impl Assignment {
    pub fn new(map: BTreeMap<VertexId, Certificate>) -> Self {
        Assignment { map }
    }

    pub fn get(&self, v: VertexId) -> Option<&Certificate> {
        self.map.get(&v)
    }

    pub fn insert(&mut self, v: VertexId, cert: Certificate) {
        self.map.insert(v, cert);
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Certificate)> {
        self.map.iter().map(|(&v, c)| (v, c))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_total_on(&self, g: &Graph) -> bool {
        g.vertices().iter().all(|v| self.map.contains_key(v))
    }

    /// All-empty certificates on `g`; the baseline adversary and the unit of
    /// several soundness tests.
    pub fn empty_on(g: &Graph) -> Self {
        Assignment { map: g.vertices().iter().map(|&v| (v, Bits::new())).collect() }
    }
}

/// Assignment file format: JSON map from decimal id to the sentinel-hex
/// payload encoding (see `bits`).
pub fn parse_assignment(text: &str) -> Result<Assignment, GraphError> {
    let raw: BTreeMap<String, String> =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let mut map = BTreeMap::new();
    for (id, hex) in raw {
        let v = id.parse::<u64>().map_err(|_| GraphError::Parse(format!("bad id {id}")))?;
        let cert =
            Bits::from_hex(&hex).map_err(|_| GraphError::Parse(format!("bad payload for {id}")))?;
        map.insert(VertexId::new(v)?, cert);
    }
    Ok(Assignment { map })
}

pub fn serialize_assignment(a: &Assignment) -> String {
    let raw: BTreeMap<String, String> =
        a.iter().map(|(v, c)| (v.value().to_string(), c.to_hex())).collect();
    serde_json::to_string(&raw).expect("serializable")
}

/// What a single vertex sees: itself and its neighbor multiset.
#[derive(Debug, Clone)]
pub struct LocalView {
    pub self_id: VertexId,
    pub self_cert: Certificate,
    /// One entry per incident edge, sorted by id for determinism. Verifiers
    /// must not read any meaning into the order.
    pub neighbors: Vec<(VertexId, Certificate)>,
}

impl LocalView {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbor_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors.iter().map(|(v, _)| *v)
    }

    pub fn has_neighbor(&self, v: VertexId) -> bool {
        self.neighbors.iter().any(|(u, _)| *u == v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn accepted(self) -> bool {
        self == Decision::Accept
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertError {
    #[error("prover refused: {0}")]
    ProverRefused(String),
    #[error("assignment is not total on the graph")]
    PartialAssignment,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A certification scheme. The verifier must be deterministic, depend only
/// on the view and the scheme's fixed parameters, and never panic on any
/// payload.
pub trait Scheme: Sync {
    fn name(&self) -> &'static str;

    /// Declared certificate size bound, for documentation and reports.
    fn declared_size(&self) -> String;

    /// Honest prover. May refuse (e.g. on a no-instance); must never emit a
    /// partial assignment.
    fn prove(&self, g: &Graph) -> Result<Assignment, CertError>;

    /// Radius-1 verifier, total over all bit strings.
    fn verify(&self, view: &LocalView) -> Decision;

    /// Scheme-shaped forged payloads over the graph's own ids, used by the
    /// structured part of the adversary. The same pool serves every vertex.
    fn structured_payloads(&self, g: &Graph) -> Vec<Certificate> {
        let _ = g;
        Vec::new()
    }
}

/// Builds the view of `v` under assignment `a`. Exactly v's id/certificate
/// plus the (id, certificate) pairs of its neighbors.
pub fn make_view(g: &Graph, a: &Assignment, v: VertexId) -> Result<LocalView, CertError> {
    if !g.contains(v) {
        return Err(GraphError::NoSuchVertex(v).into());
    }
    if !a.is_total_on(g) {
        return Err(CertError::PartialAssignment);
    }
    let self_cert = a.get(v).expect("total").clone();
    let neighbors = g.neighbors(v).map(|u| (u, a.get(u).expect("total").clone())).collect();
    Ok(LocalView { self_id: v, self_cert, neighbors })
}

/// Runs the verifier at every vertex. Vertices are evaluated independently
/// over the immutable (graph, assignment), in parallel when enabled.
pub fn run_verification(
    s: &dyn Scheme,
    g: &Graph,
    a: &Assignment,
) -> Result<BTreeMap<VertexId, Decision>, CertError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if g.n() >= 64 {
            if !a.is_total_on(g) {
                return Err(CertError::PartialAssignment);
            }
            return g
                .vertices()
                .par_iter()
                .map(|&v| Ok((v, s.verify(&make_view(g, a, v)?))))
                .collect();
        }
    }
    run_verification_seq(s, g, a)
}

/// Sequential verification; always available, used by the benches as the
/// baseline.
pub fn run_verification_seq(
    s: &dyn Scheme,
    g: &Graph,
    a: &Assignment,
) -> Result<BTreeMap<VertexId, Decision>, CertError> {
    g.vertices().iter().map(|&v| Ok((v, s.verify(&make_view(g, a, v)?)))).collect()
}

/// Global acceptance: every vertex accepts.
pub fn all_accept(decisions: &BTreeMap<VertexId, Decision>) -> bool {
    decisions.values().all(|d| d.accepted())
}

fn accepts_everywhere(s: &dyn Scheme, g: &Graph, a: &Assignment) -> bool {
    // Short-circuits on the first rejecting vertex.
    g.vertices().iter().all(|&v| match make_view(g, a, v) {
        Ok(view) => s.verify(&view).accepted(),
        Err(_) => false,
    })
}

/// Completeness check on a yes-instance: the honest assignment is accepted
/// everywhere. Prover refusal propagates.
pub fn check_completeness(s: &dyn Scheme, g: &Graph) -> Result<bool, CertError> {
    let a = s.prove(g)?;
    let decisions = run_verification(s, g, &a)?;
    Ok(all_accept(&decisions))
}

/// Size of an assignment: the maximum certificate length in bits.
pub fn measure_size(a: &Assignment) -> usize {
    a.iter().map(|(_, c)| c.len()).max().unwrap_or(0)
}

/// Adversary configuration. The search is exhaustive over the structured
/// per-vertex pools whenever the product space is at most `exhaustive_cap`;
/// otherwise it mixes structured samples, mutations of the seed assignments,
/// and uniformly random payloads, `sample_budget` candidates in total.
#[derive(Debug, Clone)]
pub struct AttackBudget {
    pub exhaustive_cap: u64,
    pub sample_budget: u64,
    pub seed: u64,
    /// Honest assignments from related yes-instances, mutated into forgeries.
    pub seed_assignments: Vec<Assignment>,
    /// Length cap for uniformly random payloads.
    pub max_random_bits: usize,
}

impl Default for AttackBudget {
    fn default() -> Self {
        AttackBudget {
            exhaustive_cap: 1 << 24,
            sample_budget: 1_000_000,
            seed: 0xCE27_11AB,
            seed_assignments: Vec::new(),
            max_random_bits: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AttackOutcome {
    /// An assignment accepted at every vertex of a graph handed to the
    /// adversary. On a no-instance this falsifies soundness.
    Forged(Assignment),
    NoneFound { tried: u64 },
}

impl AttackOutcome {
    pub fn forged(&self) -> Option<&Assignment> {
        match self {
            AttackOutcome::Forged(a) => Some(a),
            AttackOutcome::NoneFound { .. } => None,
        }
    }
}

/// Searches for a globally accepted assignment on `g`. Exhaustive over the
/// structured space when small enough, sampled otherwise.
pub fn adversary_search(s: &dyn Scheme, g: &Graph, budget: &AttackBudget) -> AttackOutcome {
    let mut pool = s.structured_payloads(g);
    pool.push(Bits::new());
    pool.sort_by(|a, b| a.to_hex().cmp(&b.to_hex()));
    pool.dedup();

    let n = g.n() as u32;
    let space = (pool.len() as u64).checked_pow(n);
    if let Some(total) = space {
        if total <= budget.exhaustive_cap {
            return exhaustive_search(s, g, &pool, total);
        }
    }
    sampled_search(s, g, &pool, budget)
}

fn assignment_from_choice(g: &Graph, pool: &[Certificate], mut index: u64) -> Assignment {
    let mut map = BTreeMap::new();
    for &v in g.vertices() {
        map.insert(v, pool[(index % pool.len() as u64) as usize].clone());
        index /= pool.len() as u64;
    }
    Assignment::new(map)
}

fn exhaustive_search(s: &dyn Scheme, g: &Graph, pool: &[Certificate], total: u64) -> AttackOutcome {
    let hit = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..total).into_par_iter().find_any(|&i| {
                let a = assignment_from_choice(g, pool, i);
                accepts_everywhere(s, g, &a)
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..total).find(|&i| {
                let a = assignment_from_choice(g, pool, i);
                accepts_everywhere(s, g, &a)
            })
        }
    };
    match hit {
        Some(i) => AttackOutcome::Forged(assignment_from_choice(g, pool, i)),
        None => AttackOutcome::NoneFound { tried: total },
    }
}

/// Candidate `i` is derived from its own RNG stream so the search is
/// deterministic regardless of scheduling.
fn sampled_candidate(
    g: &Graph,
    pool: &[Certificate],
    budget: &AttackBudget,
    i: u64,
) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let kind = rng.gen_range(0..3u8);
    match kind {
        0 => {
            // structured: independent picks from the pool
            let mut map = BTreeMap::new();
            for &v in g.vertices() {
                map.insert(v, pool[rng.gen_range(0..pool.len())].clone());
            }
            Assignment::new(map)
        }
        1 if !budget.seed_assignments.is_empty() => {
            // mutate an honest assignment from a related instance
            let base = &budget.seed_assignments[rng.gen_range(0..budget.seed_assignments.len())];
            let mut map: BTreeMap<VertexId, Certificate> = g
                .vertices()
                .iter()
                .map(|&v| (v, base.get(v).cloned().unwrap_or_default()))
                .collect();
            for _ in 0..rng.gen_range(1..=3) {
                let &v = &g.vertices()[rng.gen_range(0..g.n())];
                let cert = map.get_mut(&v).expect("present");
                *cert = mutate_bits(cert, &mut rng);
            }
            Assignment::new(map)
        }
        _ => {
            // uniformly random payloads
            let mut map = BTreeMap::new();
            for &v in g.vertices() {
                let len = rng.gen_range(0..=budget.max_random_bits);
                let mut bits = Bits::new();
                for _ in 0..len {
                    bits.push(rng.gen());
                }
                map.insert(v, bits);
            }
            Assignment::new(map)
        }
    }
}

fn mutate_bits(bits: &Bits, rng: &mut ChaCha8Rng) -> Bits {
    let mut out = Bits::new();
    if bits.is_empty() || rng.gen_bool(0.2) {
        // resize: truncate or extend with random bits
        let len = rng.gen_range(0..=bits.len() + 8);
        for i in 0..len {
            out.push(bits.get(i).unwrap_or_else(|| rng.gen()));
        }
    } else {
        let flip = rng.gen_range(0..bits.len());
        for (i, b) in bits.iter().enumerate() {
            out.push(if i == flip { !b } else { b });
        }
    }
    out
}

fn sampled_search(
    s: &dyn Scheme,
    g: &Graph,
    pool: &[Certificate],
    budget: &AttackBudget,
) -> AttackOutcome {
    let total = budget.sample_budget;
    let hit = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..total).into_par_iter().find_any(|&i| {
                let a = sampled_candidate(g, pool, budget, i);
                accepts_everywhere(s, g, &a)
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..total).find(|&i| {
                let a = sampled_candidate(g, pool, budget, i);
                accepts_everywhere(s, g, &a)
            })
        }
    };
    match hit {
        Some(i) => AttackOutcome::Forged(sampled_candidate(g, pool, budget, i)),
        None => AttackOutcome::NoneFound { tried: total },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_cycle, make_star, vid};

    struct AcceptAll;
    impl Scheme for AcceptAll {
        fn name(&self) -> &'static str {
            "accept-all"
        }
        fn declared_size(&self) -> String {
            "0".into()
        }
        fn prove(&self, g: &Graph) -> Result<Assignment, CertError> {
            Ok(Assignment::empty_on(g))
        }
        fn verify(&self, _view: &LocalView) -> Decision {
            Decision::Accept
        }
    }

    #[test]
    fn views_have_one_entry_per_edge() {
        let g = crate::graph::make_path(2).unwrap();
        let a = Assignment::empty_on(&g);
        let view = make_view(&g, &a, vid(1)).unwrap();
        assert_eq!(view.degree(), 1);
        assert_eq!(view.neighbors[0].0, vid(2));

        let star = make_star(5).unwrap();
        let a = Assignment::empty_on(&star);
        assert_eq!(make_view(&star, &a, vid(1)).unwrap().degree(), 5);

        let c8 = make_cycle(8).unwrap();
        let a = Assignment::empty_on(&c8);
        for &v in c8.vertices() {
            assert_eq!(make_view(&c8, &a, v).unwrap().degree(), 2);
        }
    }

    #[test]
    fn view_requires_membership_and_totality() {
        let g = make_cycle(4).unwrap();
        let a = Assignment::empty_on(&g);
        assert!(make_view(&g, &a, vid(9)).is_err());
        let mut partial = Assignment::default();
        partial.insert(vid(1), Bits::new());
        assert!(matches!(make_view(&g, &partial, vid(1)), Err(CertError::PartialAssignment)));
    }

    #[test]
    fn empty_assignment_measures_zero() {
        let g = make_cycle(4).unwrap();
        assert_eq!(measure_size(&Assignment::empty_on(&g)), 0);
    }

    #[test]
    fn assignment_file_round_trip() {
        let g = make_star(3).unwrap();
        let mut a = Assignment::empty_on(&g);
        let mut bits = Bits::new();
        for b in [true, false, true, true, false] {
            bits.push(b);
        }
        a.insert(vid(2), bits);
        let text = serialize_assignment(&a);
        assert_eq!(parse_assignment(&text).unwrap(), a);
    }

    #[test]
    fn trivial_scheme_completeness() {
        let g = make_cycle(5).unwrap();
        assert!(check_completeness(&AcceptAll, &g).unwrap());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let g = make_cycle(5).unwrap();
        let a = Assignment::empty_on(&g);
        let par = run_verification(&AcceptAll, &g, &a).unwrap();
        let seq = run_verification_seq(&AcceptAll, &g, &a).unwrap();
        assert_eq!(par, seq);
    }
}
