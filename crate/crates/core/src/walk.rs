//! Nearest neighbour random walks with absorbing leaves and their exact
//! kernels: hitting probabilities, return probabilities, the Green kernel,
//! the reversible measure and edge conductances, harmonic (absorption)
//! measures, Poisson transforms, the tree Dirichlet form, and an exact
//! identity-check report.
//!
//! Hitting probabilities are computed by two linear sweeps rather than a
//! dense solve. Writing `F(x,y)` for the probability of ever reaching `y`
//! from `x`:
//!
//! * up sweep, leaves to root: `F(x,x⁻) = p(x,x⁻) / (1 − Σ_y p(x,y)F(y,x))`
//!   over children `y`, starting from `F(leaf, ·) = 0`;
//! * down sweep, root to leaves: `F(x⁻,x) = p(x⁻,x) / (1 − Σ_z p(x⁻,z)F(z,x⁻))`
//!   over neighbours `z ≠ x` of `x⁻`.
//!
//! Both denominators are at least the transition probability in the
//! numerator (the subtracted sum is a strict sub-probability), so the sweeps
//! are well defined, exact and linear time. General `F(x,y)` is the product
//! of edge values along the geodesic; everything else derives from `F`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::ratio::{fmt_rat, Rat};
use crate::report::IdentityEntry;
use crate::simulate::Rng64;
use crate::tree::{Tree, Vertex};
use crate::Result;

/// A validated nearest neighbour transition matrix on a tree, with absorbing
/// leaves. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    tree: Tree,
    /// Outgoing (neighbour, probability) rows, in neighbour order (parent
    /// first, then children); empty for leaves.
    rows: Vec<Vec<(Vertex, Rat)>>,
}

impl Walk {
    /// Validate transition probabilities against a tree: every interior
    /// vertex carries a full positive row over exactly its neighbours,
    /// summing to 1; leaves carry nothing.
    pub fn new(tree: Tree, p: &BTreeMap<Vertex, BTreeMap<Vertex, Rat>>) -> Result<Walk> {
        let mut rows: Vec<Vec<(Vertex, Rat)>> = vec![Vec::new(); tree.vertex_count()];
        for (&x, row) in p {
            if x >= tree.vertex_count() {
                return Err(Error::InvalidWalk(format!("unknown vertex {x}")));
            }
            if tree.is_leaf(x) {
                return Err(Error::InvalidWalk(format!(
                    "outgoing probability from leaf {x}; leaves are absorbing"
                )));
            }
            let neighbors = tree.neighbors(x);
            let mut sum = Rat::zero();
            let mut stored = Vec::with_capacity(neighbors.len());
            for &y in &neighbors {
                match row.get(&y) {
                    Some(q) if *q > Rat::zero() => {
                        sum += q;
                        stored.push((y, q.clone()));
                    }
                    Some(_) => {
                        return Err(Error::InvalidWalk(format!(
                            "probability on edge ({x},{y}) must be positive"
                        )))
                    }
                    None => {
                        return Err(Error::InvalidWalk(format!(
                            "missing probability on edge ({x},{y})"
                        )))
                    }
                }
            }
            if row.len() != neighbors.len() {
                let bad = row.keys().find(|y| !neighbors.contains(y)).unwrap();
                return Err(Error::InvalidWalk(format!(
                    "probability on non-edge ({x},{bad})"
                )));
            }
            if !sum.is_one() {
                return Err(Error::InvalidWalk(format!(
                    "row at vertex {x} sums to {}, not 1",
                    fmt_rat(&sum)
                )));
            }
            rows[x] = stored;
        }
        for v in tree.interior_vertices() {
            if rows[v].is_empty() {
                return Err(Error::InvalidWalk(format!("no row for interior vertex {v}")));
            }
        }
        Ok(Walk { tree, rows })
    }

    /// Simple random walk: uniform over the neighbours of each interior
    /// vertex.
    pub fn simple(tree: Tree) -> Walk {
        let mut p = BTreeMap::new();
        for v in tree.interior_vertices() {
            let nbrs = tree.neighbors(v);
            let deg = nbrs.len() as i64;
            let row: BTreeMap<Vertex, Rat> =
                nbrs.into_iter().map(|y| (y, Rat::new(1.into(), deg.into()))).collect();
            p.insert(v, row);
        }
        Walk::new(tree, &p).expect("uniform rows are stochastic")
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Outgoing row of an interior vertex (empty for leaves).
    pub fn outgoing(&self, v: Vertex) -> &[(Vertex, Rat)] {
        &self.rows[v]
    }

    /// Transition probability along an existing directed edge.
    pub fn prob(&self, x: Vertex, y: Vertex) -> &Rat {
        self.rows[x]
            .iter()
            .find(|(v, _)| *v == y)
            .map(|(_, p)| p)
            .expect("prob() queried on a non-edge")
    }

    /// The transition rows as nested maps (the wire format).
    pub fn to_map(&self) -> BTreeMap<Vertex, BTreeMap<Vertex, Rat>> {
        let mut out = BTreeMap::new();
        for v in self.tree.interior_vertices() {
            out.insert(v, self.rows[v].iter().cloned().collect());
        }
        out
    }
}

/// A fully supported probability measure on the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMeasure {
    /// Masses aligned with the tree's leaf order.
    mass: Vec<Rat>,
    /// Prefix sums for O(1) branch masses.
    prefix: Vec<Rat>,
}

impl BoundaryMeasure {
    /// Validate: strictly positive masses, one per leaf, summing to 1.
    pub fn new(tree: &Tree, mass: Vec<Rat>) -> Result<BoundaryMeasure> {
        if mass.len() != tree.leaf_count() {
            return Err(Error::InvalidMeasure(format!(
                "{} masses for {} leaves",
                mass.len(),
                tree.leaf_count()
            )));
        }
        let mut prefix = Vec::with_capacity(mass.len() + 1);
        let mut acc = Rat::zero();
        prefix.push(acc.clone());
        for (i, m) in mass.iter().enumerate() {
            if *m <= Rat::zero() {
                return Err(Error::InvalidMeasure(format!(
                    "mass at leaf {} must be positive (full support)",
                    tree.leaves()[i]
                )));
            }
            acc += m;
            prefix.push(acc.clone());
        }
        if !acc.is_one() {
            return Err(Error::InvalidMeasure(format!("masses sum to {}, not 1", fmt_rat(&acc))));
        }
        Ok(BoundaryMeasure { mass, prefix })
    }

    /// Build from a map keyed by leaf vertex id.
    pub fn from_map(tree: &Tree, map: &BTreeMap<Vertex, Rat>) -> Result<BoundaryMeasure> {
        let mut mass = Vec::with_capacity(tree.leaf_count());
        for &l in tree.leaves() {
            match map.get(&l) {
                Some(m) => mass.push(m.clone()),
                None => {
                    return Err(Error::InvalidMeasure(format!("no mass for leaf {l}")));
                }
            }
        }
        if map.len() != tree.leaf_count() {
            let bad = map.keys().find(|v| tree.leaf_position(**v).is_none()).unwrap();
            return Err(Error::InvalidMeasure(format!("mass on non-leaf vertex {bad}")));
        }
        BoundaryMeasure::new(tree, mass)
    }

    /// Uniform measure on the leaves.
    pub fn uniform(tree: &Tree) -> BoundaryMeasure {
        let n = tree.leaf_count() as i64;
        BoundaryMeasure::new(tree, vec![Rat::new(1.into(), n.into()); n as usize]).unwrap()
    }

    /// Mass of the i-th leaf in leaf order.
    pub fn mass_at(&self, leaf_index: usize) -> &Rat {
        &self.mass[leaf_index]
    }

    /// Mass of a leaf by vertex id.
    pub fn mass_of_leaf(&self, tree: &Tree, leaf: Vertex) -> &Rat {
        &self.mass[tree.leaf_position(leaf).expect("not a leaf")]
    }

    /// Total mass of the leaves below `v` (the measure of the ball `∂T_v`).
    pub fn branch_mass(&self, tree: &Tree, v: Vertex) -> Rat {
        let (lo, hi) = tree.leaf_range(v);
        &self.prefix[hi] - &self.prefix[lo]
    }

    pub fn masses(&self) -> &[Rat] {
        &self.mass
    }

    pub fn to_map(&self, tree: &Tree) -> BTreeMap<Vertex, Rat> {
        tree.leaves().iter().copied().zip(self.mass.iter().cloned()).collect()
    }
}

/// Exact derived kernels of a walk. Immutable after computation; all values
/// are rationals in lowest terms.
#[derive(Debug, Clone)]
pub struct WalkKernels {
    tree: Tree,
    /// F(x, x⁻) for non-root x (0 at leaves); unused slot at the root.
    hit_to_parent: Vec<Rat>,
    /// F(x⁻, x) for non-root x; unused slot at the root.
    hit_from_parent: Vec<Rat>,
    /// U(x,x): return probability; 0 at leaves.
    return_prob: Vec<Rat>,
    /// G(x,x) = 1/(1 − U(x,x)); 1 at leaves.
    green_diag: Vec<Rat>,
    /// Reversible measure m, defined on interior vertices, m(root) = 1.
    weight: Vec<Option<Rat>>,
    /// Conductance of the edge [x⁻,x], indexed by the lower vertex x:
    /// a(x⁻,x) = m(x⁻) p(x⁻,x). For interior x this equals m(x) p(x,x⁻) by
    /// reversibility; for a leaf x it is the only well-defined variant.
    conductance: Vec<Rat>,
}

impl WalkKernels {
    /// Run both sweeps and derive all kernels.
    pub fn compute(walk: &Walk) -> WalkKernels {
        let tree = walk.tree().clone();
        let n = tree.vertex_count();
        let mut hit_to_parent = vec![Rat::zero(); n];
        let mut hit_from_parent = vec![Rat::zero(); n];

        // Vertices in order of decreasing depth for the up sweep.
        let mut by_depth: Vec<Vertex> = (0..n).collect();
        by_depth.sort_by_key(|&v| std::cmp::Reverse(tree.depth(v)));

        // Up sweep. S(v) = Σ_{children y} p(v,y) F(y,v).
        let mut child_sum = vec![Rat::zero(); n];
        for &v in &by_depth {
            if tree.is_leaf(v) {
                continue; // F(leaf, parent) = 0
            }
            let mut s = Rat::zero();
            for &c in tree.children(v) {
                if !hit_to_parent[c].is_zero() {
                    s += walk.prob(v, c) * &hit_to_parent[c];
                }
            }
            child_sum[v] = s;
            if let Some(parent) = tree.parent(v) {
                let denom = Rat::one() - &child_sum[v];
                let f = walk.prob(v, parent) / denom;
                debug_assert!(f > Rat::zero());
                assert!(f < Rat::one(), "F(x, x⁻) must be < 1 in the absorbing model");
                hit_to_parent[v] = f;
            }
        }

        // Down sweep in preorder, carrying U(v,v) as we descend.
        let mut return_prob = vec![Rat::zero(); n];
        let mut stack = vec![tree.root()];
        while let Some(v) = stack.pop() {
            let u = match tree.parent(v) {
                Some(p) => &child_sum[v] + walk.prob(v, p) * &hit_from_parent[v],
                None => child_sum[v].clone(),
            };
            assert!(u < Rat::one(), "return probability must be < 1 in the absorbing model");
            for &x in tree.children(v) {
                // Σ_{z ∼ v, z ≠ x} p(v,z) F(z,v) = U(v,v) − p(v,x) F(x,v)
                let others = &u - walk.prob(v, x) * &hit_to_parent[x];
                let denom = Rat::one() - others;
                hit_from_parent[x] = walk.prob(v, x) / denom;
                debug_assert!(hit_from_parent[x] > Rat::zero());
                if tree.is_interior(x) {
                    stack.push(x);
                }
            }
            return_prob[v] = u;
        }

        let green_diag: Vec<Rat> = (0..n)
            .map(|v| {
                if tree.is_leaf(v) {
                    Rat::one()
                } else {
                    Rat::one() / (Rat::one() - &return_prob[v])
                }
            })
            .collect();

        // Reversible measure on interior vertices, m(root) = 1, then edge
        // conductances a(x⁻,x) = m(x⁻) p(x⁻,x) for every edge.
        let mut weight: Vec<Option<Rat>> = vec![None; n];
        weight[tree.root()] = Some(Rat::one());
        let mut conductance = vec![Rat::zero(); n];
        let mut stack = vec![tree.root()];
        while let Some(v) = stack.pop() {
            let mv = weight[v].clone().expect("parent weight set before descent");
            for &x in tree.children(v) {
                conductance[x] = &mv * walk.prob(v, x);
                if tree.is_interior(x) {
                    weight[x] = Some(&mv * walk.prob(v, x) / walk.prob(x, v));
                    stack.push(x);
                }
            }
        }

        WalkKernels {
            tree,
            hit_to_parent,
            hit_from_parent,
            return_prob,
            green_diag,
            weight,
            conductance,
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// F(x, x⁻) for a non-root vertex.
    pub fn hit_up(&self, x: Vertex) -> &Rat {
        &self.hit_to_parent[x]
    }

    /// F(x⁻, x) for a non-root vertex.
    pub fn hit_down(&self, x: Vertex) -> &Rat {
        &self.hit_from_parent[x]
    }

    /// U(x,x): probability of returning to `x` after leaving it.
    pub fn return_prob(&self, x: Vertex) -> &Rat {
        &self.return_prob[x]
    }

    /// G(x,x): expected number of visits to `x` starting there.
    pub fn green_diag(&self, x: Vertex) -> &Rat {
        &self.green_diag[x]
    }

    /// m(x) for interior x, with m(root) = 1.
    pub fn weight(&self, x: Vertex) -> &Rat {
        self.weight[x].as_ref().expect("reversible measure lives on interior vertices")
    }

    /// Conductance of the edge [x⁻, x], indexed by the non-root endpoint.
    pub fn conductance(&self, x: Vertex) -> &Rat {
        &self.conductance[x]
    }

    /// Deliberately corrupt one Green diagonal entry. Harness self-test
    /// hook: a corrupted table must make the identity suites fail.
    #[doc(hidden)]
    pub fn corrupt_green_for_testing(&mut self, v: Vertex) {
        self.green_diag[v] += Rat::one();
    }

    /// The oriented edge factor F(u, w) for neighbours u ∼ w.
    fn edge_hit(&self, u: Vertex, w: Vertex) -> &Rat {
        if self.tree.parent(u) == Some(w) {
            &self.hit_to_parent[u]
        } else {
            debug_assert_eq!(self.tree.parent(w), Some(u));
            &self.hit_from_parent[w]
        }
    }

    /// F(x,y): probability of ever hitting `y` from `x`, as the product of
    /// edge values along the geodesic.
    pub fn hit(&self, x: Vertex, y: Vertex) -> Rat {
        let path = self.tree.path(x, y);
        let mut f = Rat::one();
        for w in path.windows(2) {
            let step = self.edge_hit(w[0], w[1]);
            if step.is_zero() {
                return Rat::zero();
            }
            f *= step;
        }
        f
    }

    /// F(v, target) for every vertex `v`, in one traversal.
    pub fn hit_to_all(&self, target: Vertex) -> Vec<Rat> {
        let n = self.tree.vertex_count();
        let mut out = vec![Rat::zero(); n];
        out[target] = Rat::one();
        // Expand outward from the target; each vertex's value is the edge
        // factor towards the target times the neighbour's value.
        let mut stack = vec![target];
        let mut seen = vec![false; n];
        seen[target] = true;
        while let Some(v) = stack.pop() {
            for w in self.tree.neighbors(v) {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                if !out[v].is_zero() {
                    out[w] = self.edge_hit(w, v) * &out[v];
                }
                stack.push(w);
            }
        }
        out
    }

    /// G(x,y) = F(x,y) G(y,y).
    pub fn green(&self, x: Vertex, y: Vertex) -> Rat {
        self.hit(x, y) * &self.green_diag[y]
    }

    /// The Green column g(v) = G(v, x0) as a vertex function. `x0` must be
    /// interior (a leaf column is the coincidence indicator and is
    /// rejected).
    pub fn green_column(&self, x0: Vertex) -> Result<Vec<Rat>> {
        if self.tree.is_leaf(x0) {
            return Err(Error::InvalidInput(format!(
                "green column at leaf {x0} is degenerate"
            )));
        }
        let hits = self.hit_to_all(x0);
        Ok(hits.into_iter().map(|f| f * &self.green_diag[x0]).collect())
    }

    /// F(x, v) for every vertex `v`, in one traversal from the source.
    pub fn hit_from_all(&self, x: Vertex) -> Vec<Rat> {
        let n = self.tree.vertex_count();
        let mut from_x = vec![Rat::zero(); n];
        from_x[x] = Rat::one();
        let mut stack = vec![x];
        let mut seen = vec![false; n];
        seen[x] = true;
        while let Some(v) = stack.pop() {
            for w in self.tree.neighbors(v) {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                if !from_x[v].is_zero() {
                    from_x[w] = self.edge_hit(v, w) * &from_x[v];
                }
                stack.push(w);
            }
        }
        from_x
    }

    /// Raw absorption probabilities from any start, aligned with the leaf
    /// order: ν_x({l}) = F(x, l). A leaf start gives its point mass. The
    /// masses always sum to 1 exactly; that is asserted here.
    pub fn absorption_vector(&self, x: Vertex) -> Vec<Rat> {
        let from_x = self.hit_from_all(x);
        let mass: Vec<Rat> = self.tree.leaves().iter().map(|&l| from_x[l].clone()).collect();
        let total: Rat = mass.iter().sum();
        assert!(total.is_one(), "absorption masses from {x} sum to {}", fmt_rat(&total));
        mass
    }

    /// Limit (absorption) distribution from an interior start as a fully
    /// supported boundary measure: ν_x({l}) = F(x, l).
    pub fn harmonic_measure(&self, x: Vertex) -> Result<BoundaryMeasure> {
        if self.tree.is_leaf(x) {
            return Err(Error::InvalidInput(format!(
                "harmonic measure of leaf start {x} is a point mass; use absorption_vector"
            )));
        }
        BoundaryMeasure::new(&self.tree, self.absorption_vector(x)).map_err(|e| {
            Error::Internal(format!("absorption masses from {x} are not a probability: {e}"))
        })
    }

    /// ν_x(∂T_y) by the branch formula (the two-case expression in terms of
    /// edge hitting probabilities), used to cross-check the atomic sums.
    pub fn harmonic_measure_branch(&self, x: Vertex, y: Vertex) -> Rat {
        if y == self.tree.root() {
            return Rat::one();
        }
        let fy_up = &self.hit_to_parent[y]; // F(y, y⁻)
        let fy_down = &self.hit_from_parent[y]; // F(y⁻, y)
        let denom = Rat::one() - fy_down * fy_up;
        if self.tree.is_ancestor_or_self(y, x) {
            // x in T_y
            let f = self.hit(x, y);
            Rat::one() - f * (fy_up - fy_down * fy_up) / denom
        } else {
            self.hit(x, y) * (Rat::one() - fy_up) / denom
        }
    }

    /// The full absorption matrix: row v is `absorption_vector(v)`.
    pub fn absorption_matrix(&self) -> Vec<Vec<Rat>> {
        (0..self.tree.vertex_count()).map(|v| self.absorption_vector(v)).collect()
    }

    /// Harmonic extension of a leaf function against a precomputed
    /// absorption matrix: h(x) = Σ_l u(l) ν_x({l}).
    pub fn extend_with(&self, absorption: &[Vec<Rat>], u: &[Rat]) -> Vec<Rat> {
        assert_eq!(u.len(), self.tree.leaf_count());
        absorption
            .iter()
            .map(|row| {
                let mut acc = Rat::zero();
                for (ul, m) in u.iter().zip(row.iter()) {
                    if ul.is_zero() || m.is_zero() {
                        continue;
                    }
                    if ul.is_one() {
                        acc += m;
                    } else {
                        acc += ul * m;
                    }
                }
                acc
            })
            .collect()
    }

    /// Poisson transform: the harmonic extension of a leaf function,
    /// h(x) = Σ_l u(l) ν_x({l}). Input aligned with the tree's leaf order.
    /// On leaves, h coincides with u. For many functions on one walk,
    /// compute [`WalkKernels::absorption_matrix`] once and use
    /// [`WalkKernels::extend_with`].
    pub fn poisson_transform(&self, u: &[Rat]) -> Vec<Rat> {
        self.extend_with(&self.absorption_matrix(), u)
    }

    /// The Dirichlet form of the network: Σ over edges of
    /// (f(x) − f(x⁻)) (g(x) − g(x⁻)) a(x⁻,x), for vertex functions.
    pub fn dirichlet_form(&self, f: &[Rat], g: &[Rat]) -> Rat {
        assert_eq!(f.len(), self.tree.vertex_count());
        assert_eq!(g.len(), self.tree.vertex_count());
        let mut acc = Rat::zero();
        for x in 0..self.tree.vertex_count() {
            if let Some(p) = self.tree.parent(x) {
                let df = &f[x] - &f[p];
                if df.is_zero() {
                    continue;
                }
                let dg = &g[x] - &g[p];
                if dg.is_zero() {
                    continue;
                }
                acc += df * dg * &self.conductance[x];
            }
        }
        acc
    }
}

/// Harmonic extension of a leaf function by tree-structured elimination:
/// express h(x) = shift(x) + slope(x) h(x⁻) going up (leaves first), then
/// substitute downward from the root. Exact, linear time, and equal to the
/// Poisson transform (the harmonic extension on a finite absorbing chain is
/// unique).
pub fn harmonic_extension(walk: &Walk, u: &[Rat]) -> Vec<Rat> {
    let tree = walk.tree();
    assert_eq!(u.len(), tree.leaf_count());
    let n = tree.vertex_count();
    let mut shift = vec![Rat::zero(); n];
    let mut slope = vec![Rat::zero(); n];
    let mut by_depth: Vec<Vertex> = (0..n).collect();
    by_depth.sort_by_key(|&v| std::cmp::Reverse(tree.depth(v)));
    for &x in &by_depth {
        if tree.is_leaf(x) {
            shift[x] = u[tree.leaf_position(x).unwrap()].clone();
            // slope stays 0: boundary values are pinned
            continue;
        }
        let mut self_coeff = Rat::one();
        let mut constant = Rat::zero();
        for (y, p) in walk.outgoing(x) {
            if Some(*y) == tree.parent(x) {
                continue; // contributes the slope term
            }
            self_coeff -= p * &slope[*y];
            if !shift[*y].is_zero() {
                constant += p * &shift[*y];
            }
        }
        shift[x] = &constant / &self_coeff;
        if let Some(parent) = tree.parent(x) {
            slope[x] = walk.prob(x, parent) / &self_coeff;
        }
    }
    let mut h = vec![Rat::zero(); n];
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        h[v] = match tree.parent(v) {
            Some(p) if !slope[v].is_zero() => &shift[v] + &slope[v] * &h[p],
            _ => shift[v].clone(),
        };
        for &c in tree.children(v) {
            stack.push(c);
        }
    }
    h
}

/// Exact pass/fail entries over the kernel identity suite, one per checked
/// identity instance, with both sides rendered.
///
/// Per-vertex and per-edge identities are checked exhaustively; pair-indexed
/// identities are checked on all adjacent pairs plus a seeded pseudo-random
/// sample of general pairs (the acceptance tests additionally compare the
/// full Green matrix against the dense oracle).
pub fn check_kernel_identities(walk: &Walk, kernels: &WalkKernels) -> Vec<IdentityEntry> {
    let tree = walk.tree();
    let n = tree.vertex_count();
    let mut report: Vec<IdentityEntry> = Vec::new();

    let entry =
        |report: &mut Vec<IdentityEntry>, identity: &str, loc: Vec<Vertex>, lhs: Rat, rhs: Rat| {
            report.push(IdentityEntry {
                identity: identity.to_string(),
                location: loc,
                lhs: fmt_rat(&lhs),
                rhs: fmt_rat(&rhs),
                pass: lhs == rhs,
            });
        };

    // Green diagonal versus return probability.
    for x in tree.interior_vertices() {
        let lhs = kernels.green_diag(x) * (Rat::one() - kernels.return_prob(x));
        entry(&mut report, "gu", vec![x], lhs, Rat::one());
    }

    // Return probability as a first-step sum of hitting probabilities.
    for x in tree.interior_vertices() {
        let mut rhs = Rat::zero();
        for (y, p) in walk.outgoing(x) {
            rhs += p * kernels.hit(*y, x);
        }
        entry(&mut report, "uf", vec![x], kernels.return_prob(x).clone(), rhs);
    }

    // Pair sample: all adjacent pairs, everything when small, otherwise a
    // seeded sample of general ordered pairs.
    let mut pairs: Vec<(Vertex, Vertex)> = Vec::new();
    for x in 0..n {
        if let Some(p) = tree.parent(x) {
            pairs.push((x, p));
            pairs.push((p, x));
        }
    }
    if n <= 24 {
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    pairs.push((x, y));
                }
            }
        }
    } else {
        let mut rng = Rng64::new(0x7265706f72740000 ^ n as u64);
        for _ in 0..256 {
            let x = (rng.next_u64() % n as u64) as usize;
            let y = (rng.next_u64() % n as u64) as usize;
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    // Green kernel: one-step route versus hitting-probability route.
    for &(x, y) in &pairs {
        let rhs = kernels.hit(x, y) * kernels.green_diag(y);
        let mut lhs = if x == y { Rat::one() } else { Rat::zero() };
        for (z, p) in walk.outgoing(x) {
            lhs += p * kernels.green(*z, y);
        }
        entry(&mut report, "fg", vec![x, y], lhs, rhs);
    }

    // Multiplicativity along geodesics, split at the path midpoint.
    for &(x, y) in &pairs {
        let path = tree.path(x, y);
        if path.len() < 3 {
            continue;
        }
        let z = path[path.len() / 2];
        let lhs = kernels.hit(x, y);
        let rhs = kernels.hit(x, z) * kernels.hit(z, y);
        entry(&mut report, "ff", vec![x, z, y], lhs, rhs);
    }

    // G(x,x) p(x,y) = F(x,y) / (1 − F(x,y)F(y,x)) for neighbours.
    for x in tree.interior_vertices() {
        for (y, p) in walk.outgoing(x) {
            let lhs = kernels.green_diag(x) * p;
            let fxy = kernels.hit(x, *y);
            let fyx = kernels.hit(*y, x);
            let rhs = &fxy / (Rat::one() - &fxy * fyx);
            entry(&mut report, "green-step-ratio", vec![x, *y], lhs, rhs);
        }
    }

    // G(x,x) = 1 + Σ_y F(x,y)F(y,x) / (1 − F(x,y)F(y,x)).
    for x in tree.interior_vertices() {
        let mut rhs = Rat::one();
        for (y, _) in walk.outgoing(x) {
            let prod = kernels.hit(x, *y) * kernels.hit(*y, x);
            if !prod.is_zero() {
                rhs += &prod / (Rat::one() - &prod);
            }
        }
        entry(&mut report, "green-diag-sum", vec![x], kernels.green_diag(x).clone(), rhs);
    }

    // Branch mass of a raw absorption vector.
    let branch_mass = |nu: &[Rat], v: Vertex| -> Rat {
        let (lo, hi) = tree.leaf_range(v);
        nu[lo..hi].iter().sum()
    };

    // F(x⁻,x) from the branch measure of the root's absorption distribution.
    let nu_root = kernels.absorption_vector(tree.root());
    for x in 0..n {
        let Some(parent) = tree.parent(x) else { continue };
        let ratio = branch_mass(&nu_root, x) / kernels.hit(tree.root(), parent);
        let fup = kernels.hit_up(x);
        let rhs = &ratio / (Rat::one() - fup + fup * &ratio);
        entry(&mut report, "downward-hit-from-mass", vec![parent, x], kernels.hit_down(x).clone(), rhs);
    }

    // Branch formula for the limit distributions versus atomic sums.
    for y in tree.interior_vertices() {
        if y == tree.root() {
            continue;
        }
        let mut sources = vec![tree.root(), y];
        sources.push(pairs[(y * 7) % pairs.len()].0);
        sources.sort_unstable();
        sources.dedup();
        for x in sources {
            let lhs = branch_mass(&kernels.absorption_vector(x), y);
            let rhs = kernels.harmonic_measure_branch(x, y);
            entry(&mut report, "nu-branch", vec![x, y], lhs, rhs);
        }
    }

    // ν_x(∂T_x) = 1 − p(x,x⁻)(G(x,x) − G(x⁻,x)) for non-root interior x.
    for x in tree.interior_vertices() {
        let Some(parent) = tree.parent(x) else { continue };
        let lhs = branch_mass(&kernels.absorption_vector(x), x);
        let rhs = Rat::one()
            - walk.prob(x, parent) * (kernels.green_diag(x) - kernels.green(parent, x));
        entry(&mut report, "own-branch-mass", vec![x], lhs, rhs);
    }

    // m-reversibility of the Green kernel on interior pairs.
    for &(x, y) in &pairs {
        if tree.is_leaf(x) || tree.is_leaf(y) {
            continue;
        }
        let lhs = kernels.weight(x) * kernels.green(x, y);
        let rhs = kernels.weight(y) * kernels.green(y, x);
        entry(&mut report, "reversibility", vec![x, y], lhs, rhs);
    }

    report
}
