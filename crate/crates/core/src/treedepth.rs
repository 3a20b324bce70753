//! Exact treedepth oracles and coherent elimination trees.
//!
//! Two conventions coexist in the literature and both are exposed:
//! `levels` counts vertices on the longest root-leaf path (a single vertex
//! has levels 1), while `edge_depth = levels - 1` counts edges. The
//! cops-and-robber number equals `levels`. Scheme parameters `t` always
//! bound the edge depth (ancestor lists of length at most t+1).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graph::{Graph, GraphError, RootedTree, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreedepthError {
    #[error("graph has {0} vertices, above the oracle cap {1}")]
    CapExceeded(usize, usize),
    #[error("not a model: {0}")]
    NotAModel(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An elimination tree over the graph's vertex set: every graph edge joins
/// an ancestor/descendant pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    tree: RootedTree,
    levels: BTreeMap<VertexId, usize>,
}

impl Model {
    /// Wraps a rooted tree as a model of `g`, checking the model property.
    pub fn new(g: &Graph, tree: RootedTree) -> Result<Self, TreedepthError> {
        let tree_nodes: BTreeSet<VertexId> = tree.nodes().collect();
        let graph_nodes: BTreeSet<VertexId> = g.vertices().iter().copied().collect();
        if tree_nodes != graph_nodes {
            return Err(TreedepthError::NotAModel(
                "tree node set differs from the vertex set".into(),
            ));
        }
        for (a, b) in g.edges() {
            let anc_a = tree.ancestors(a)?;
            if !anc_a.contains(&b) {
                let anc_b = tree.ancestors(b)?;
                if !anc_b.contains(&a) {
                    return Err(TreedepthError::NotAModel(format!(
                        "edge {a}-{b} joins unrelated tree nodes"
                    )));
                }
            }
        }
        let levels = tree.nodes().map(|v| (v, tree.depth(v).unwrap() + 1)).collect();
        Ok(Model { tree, levels })
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn root(&self) -> VertexId {
        self.tree.root()
    }

    /// Level of a vertex, root = 1.
    pub fn level(&self, v: VertexId) -> usize {
        self.levels[&v]
    }

    /// Edge-depth of a vertex, root = 0.
    pub fn depth(&self, v: VertexId) -> usize {
        self.levels[&v] - 1
    }

    /// Height of the model in the levels convention.
    pub fn height_levels(&self) -> usize {
        *self.levels.values().max().expect("non-empty")
    }

    pub fn height_edge_depth(&self) -> usize {
        self.height_levels() - 1
    }
}

#[derive(Debug, Clone)]
pub struct TreedepthResult {
    pub levels: usize,
    pub edge_depth: usize,
    pub witness: Model,
}

/// Caps keeping the exponential oracles desk-scale.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Vertex cap for the bitmask treedepth recursion.
    pub treedepth_cap: usize,
    /// Vertex cap for the cops-and-robber game search.
    pub cops_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { treedepth_cap: 20, cops_cap: 14 }
    }
}

/// Exact treedepth by the elimination recursion
/// `td(C) = 1 + min over roots v of max over components of C - v`,
/// memoized on vertex bitmasks. Ties break toward the minimum id so the
/// witness is deterministic.
pub fn treedepth_exact(g: &Graph) -> Result<TreedepthResult, TreedepthError> {
    treedepth_exact_with(g, OracleConfig::default())
}

pub fn treedepth_exact_with(
    g: &Graph,
    config: OracleConfig,
) -> Result<TreedepthResult, TreedepthError> {
    if g.n() > config.treedepth_cap {
        return Err(TreedepthError::CapExceeded(g.n(), config.treedepth_cap));
    }
    let mut solver = TdSolver { g, memo: HashMap::new() };
    let full = full_mask(g.n());
    let (levels, _) = solver.solve(full);
    let mut parent = BTreeMap::new();
    let root = solver.build_witness(full, None, &mut parent);
    let witness = Model::new(g, RootedTree::new(root, parent)?)?;
    debug_assert_eq!(witness.height_levels(), levels);
    Ok(TreedepthResult { levels, edge_depth: levels - 1, witness })
}

type Mask = u32;

fn full_mask(n: usize) -> Mask {
    if n == 32 {
        Mask::MAX
    } else {
        (1 << n) - 1
    }
}

struct TdSolver<'a> {
    g: &'a Graph,
    memo: HashMap<Mask, (usize, usize)>, // mask -> (levels, best root index)
}

impl TdSolver<'_> {
    /// Levels of the connected induced subgraph `mask`.
    fn solve(&mut self, mask: Mask) -> (usize, usize) {
        if let Some(&hit) = self.memo.get(&mask) {
            return hit;
        }
        if mask.count_ones() == 1 {
            let v = mask.trailing_zeros() as usize;
            self.memo.insert(mask, (1, v));
            return (1, v);
        }
        let mut best = (usize::MAX, 0);
        for v in iter_mask(mask) {
            let rest = mask & !(1 << v);
            let mut worst = 0;
            for comp in components(self.g, rest) {
                worst = worst.max(self.solve(comp).0);
                if worst + 1 >= best.0 {
                    break;
                }
            }
            if worst + 1 < best.0 {
                best = (worst + 1, v);
            }
        }
        self.memo.insert(mask, best);
        best
    }

    /// Re-walks the memoized choices to emit parent pointers.
    fn build_witness(
        &mut self,
        mask: Mask,
        parent_of_root: Option<VertexId>,
        parent: &mut BTreeMap<VertexId, VertexId>,
    ) -> VertexId {
        let (_, root_idx) = self.solve(mask);
        let root = self.g.id(root_idx);
        if let Some(p) = parent_of_root {
            parent.insert(root, p);
        }
        let rest = mask & !(1 << root_idx);
        for comp in components(self.g, rest) {
            self.build_witness(comp, Some(root), parent);
        }
        root
    }
}

fn iter_mask(mask: Mask) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Connected components of the induced subgraph `mask`, as masks, in
/// ascending order of their lowest vertex.
fn components(g: &Graph, mask: Mask) -> Vec<Mask> {
    let mut out = Vec::new();
    let mut remaining = mask;
    while remaining != 0 {
        let start = remaining.trailing_zeros() as usize;
        let mut comp: Mask = 1 << start;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in g.neighbors_idx(u) {
                let bit = 1 << v;
                if mask & bit != 0 && comp & bit == 0 {
                    comp |= bit;
                    stack.push(v);
                }
            }
        }
        out.push(comp);
        remaining &= !comp;
    }
    out
}

/// Minimum number of immobile cops that catch the robber in the placement
/// game. Decided by iterative deepening over the cop budget with a game-tree
/// search memoized on (robber territory, budget); placements outside the
/// territory never help and are skipped.
pub fn cops_robber_number(g: &Graph) -> Result<usize, TreedepthError> {
    cops_robber_number_with(g, OracleConfig::default())
}

pub fn cops_robber_number_with(
    g: &Graph,
    config: OracleConfig,
) -> Result<usize, TreedepthError> {
    if g.n() > config.cops_cap {
        return Err(TreedepthError::CapExceeded(g.n(), config.cops_cap));
    }
    let full = full_mask(g.n());
    let mut memo: HashMap<(Mask, usize), bool> = HashMap::new();
    for budget in 1..=g.n() {
        if cops_catch(g, full, budget, &mut memo) {
            return Ok(budget);
        }
    }
    unreachable!("n cops always catch the robber");
}

/// Can `budget` cops catch a robber whose territory is the connected set
/// `territory`? The next cop position is announced, the robber settles in a
/// component of territory minus that position, and play continues there.
fn cops_catch(
    g: &Graph,
    territory: Mask,
    budget: usize,
    memo: &mut HashMap<(Mask, usize), bool>,
) -> bool {
    if budget == 0 {
        return false;
    }
    if let Some(&hit) = memo.get(&(territory, budget)) {
        return hit;
    }
    let mut caught = false;
    'placements: for c in iter_mask(territory) {
        let rest = territory & !(1 << c);
        if rest == 0 {
            caught = true;
            break;
        }
        for comp in components(g, rest) {
            if !cops_catch(g, comp, budget - 1, memo) {
                continue 'placements;
            }
        }
        caught = true;
        break;
    }
    memo.insert((territory, budget), caught);
    caught
}

/// True iff for every non-root `v`, some vertex of `v`'s subtree is adjacent
/// in `g` to `v`'s parent. Errors if `m` is not a model of `g`.
pub fn is_coherent(g: &Graph, m: &Model) -> Result<bool, TreedepthError> {
    // Re-validate the model property so a bogus tree errors instead of
    // silently reporting incoherence.
    Model::new(g, m.tree().clone())?;
    Ok(coherence_ok(g, m.tree()))
}

fn coherence_ok(g: &Graph, tree: &RootedTree) -> bool {
    tree.nodes().all(|v| match tree.parent(v) {
        None => true,
        Some(p) => tree.subtree(v).iter().any(|&x| g.adjacent(x, p)),
    })
}

/// Rewrites a model into a coherent one of no greater height by repeatedly
/// reattaching detached subtrees to the deepest ancestor they touch. Each
/// reattachment strictly lowers the sum of depths, so this terminates.
pub fn coherentize(g: &Graph, m: &Model) -> Result<Model, TreedepthError> {
    Model::new(g, m.tree().clone())?;
    let mut tree = m.tree().clone();
    loop {
        let mut changed = false;
        let nodes: Vec<VertexId> = tree.nodes().collect();
        for v in nodes {
            let Some(p) = tree.parent(v) else { continue };
            let sub = tree.subtree(v);
            if sub.iter().any(|&x| g.adjacent(x, p)) {
                continue;
            }
            // Deepest proper ancestor of p (inclusive) adjacent to the subtree.
            let anc = tree.ancestors(p).expect("in tree");
            let new_parent = anc
                .iter()
                .copied()
                .find(|&a| sub.iter().any(|&x| g.adjacent(x, a)))
                .expect("connected graph: some ancestor touches the subtree");
            let mut parent_map: BTreeMap<VertexId, VertexId> =
                tree.nodes().filter_map(|u| tree.parent(u).map(|q| (u, q))).collect();
            parent_map.insert(v, new_parent);
            tree = RootedTree::new(tree.root(), parent_map)?;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    debug_assert!(coherence_ok(g, &tree));
    let out = Model::new(g, tree)?;
    debug_assert!(out.height_levels() <= m.height_levels());
    Ok(out)
}

/// Coherent model of `g` within `bound` levels, or `None` when the treedepth
/// exceeds the bound. Runs the exact oracle, so it is subject to its cap.
pub fn coherent_model(g: &Graph, bound: usize) -> Result<Option<Model>, TreedepthError> {
    let exact = treedepth_exact(g)?;
    if exact.levels > bound {
        return Ok(None);
    }
    Ok(Some(coherentize(g, &exact.witness)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_clique, make_cycle, make_path, make_star, vid};

    #[test]
    fn single_vertex() {
        let g = make_path(1).unwrap();
        let r = treedepth_exact(&g).unwrap();
        assert_eq!(r.levels, 1);
        assert_eq!(r.edge_depth, 0);
    }

    #[test]
    fn p7_has_levels_3() {
        let r = treedepth_exact(&make_path(7).unwrap()).unwrap();
        assert_eq!(r.levels, 3);
        assert_eq!(r.edge_depth, 2);
        assert_eq!(r.witness.root(), vid(4));
    }

    #[test]
    fn c8_has_levels_4() {
        let r = treedepth_exact(&make_cycle(8).unwrap()).unwrap();
        assert_eq!(r.levels, 4);
    }

    #[test]
    fn paths_of_length_pow2_minus_1() {
        for k in 1..=4 {
            let n = (1usize << k) - 1;
            let r = treedepth_exact(&make_path(n).unwrap()).unwrap();
            assert_eq!(r.levels, k, "path on {n} vertices");
        }
    }

    #[test]
    fn cliques_and_stars() {
        assert_eq!(treedepth_exact(&make_clique(5).unwrap()).unwrap().levels, 5);
        assert_eq!(treedepth_exact(&make_star(6).unwrap()).unwrap().levels, 2);
    }

    #[test]
    fn cops_match_treedepth_on_small_graphs() {
        for g in [
            make_path(7).unwrap(),
            make_cycle(5).unwrap(),
            make_cycle(8).unwrap(),
            make_star(4).unwrap(),
            make_clique(4).unwrap(),
        ] {
            let td = treedepth_exact(&g).unwrap().levels;
            assert_eq!(cops_robber_number(&g).unwrap(), td);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = make_path(15).unwrap();
        assert!(matches!(cops_robber_number(&g), Err(TreedepthError::CapExceeded(15, 14))));
    }

    #[test]
    fn witness_is_a_model_of_minimum_height() {
        let g = make_cycle(6).unwrap();
        let r = treedepth_exact(&g).unwrap();
        assert_eq!(r.witness.height_levels(), r.levels);
    }

    #[test]
    fn coherence_checks() {
        let g = make_path(7).unwrap();
        let m = coherent_model(&g, 3).unwrap().expect("P7 fits in 3 levels");
        assert!(is_coherent(&g, &m).unwrap());
        assert!(m.height_levels() <= 3);
        assert!(coherent_model(&make_cycle(8).unwrap(), 3).unwrap().is_none());
    }

    #[test]
    fn coherent_model_of_clique_is_a_chain() {
        let g = make_clique(3).unwrap();
        let m = coherent_model(&g, 3).unwrap().unwrap();
        // every model of a clique is a chain: one leaf per level
        assert_eq!(m.height_levels(), 3);
        assert!(is_coherent(&g, &m).unwrap());
    }

    #[test]
    fn incoherent_model_detected_and_repaired() {
        // P3 = 1-2-3 modeled as the chain 2 -> 1 -> 3 is a valid model
        // (both edges touch the root 2), but 3's subtree {3} is not adjacent
        // to its parent 1, so the model is incoherent.
        let g = make_path(3).unwrap();
        let parent: BTreeMap<VertexId, VertexId> =
            [(vid(1), vid(2)), (vid(3), vid(1))].into_iter().collect();
        let m = Model::new(&g, RootedTree::new(vid(2), parent).unwrap()).unwrap();
        assert!(!is_coherent(&g, &m).unwrap());
        let fixed = coherentize(&g, &m).unwrap();
        assert!(is_coherent(&g, &fixed).unwrap());
        assert!(fixed.height_levels() <= m.height_levels());
    }

    #[test]
    fn model_rejects_non_ancestor_edges() {
        // P3 = 1-2-3 with root 1 and both 2,3 as children: edge 2-3 violates ancestry.
        let g = make_path(3).unwrap();
        let parent: BTreeMap<VertexId, VertexId> =
            [(vid(2), vid(1)), (vid(3), vid(1))].into_iter().collect();
        let tree = RootedTree::new(vid(1), parent).unwrap();
        assert!(Model::new(&g, tree).is_err());
    }
}
