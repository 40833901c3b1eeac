//! Finite rooted trees with leaf boundary, ultrametric elements, the induced
//! boundary metric, balls, and the ball-tree construction from a raw
//! ultrametric distance matrix.
//!
//! Leaves are the boundary: a leaf stands in for an isolated boundary point
//! and interior vertices for the balls of the boundary metric. Interior
//! vertices are required to have at least two children (the construction
//! from a metric never produces forward degree 1, so unary vertices carry no
//! metric information); an explicit opt-in flag relaxes this for walks on
//! hand-built trees.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::Error;
use crate::ratio::Rat;
use crate::Result;

/// Vertex id: a dense index into the tree's arenas.
pub type Vertex = usize;

/// A validated finite rooted tree. Immutable after construction.
///
/// Leaves are stored in depth-first order following the children lists, and
/// every vertex knows the contiguous range of that ordering spanned by its
/// branch, so "the set of leaves below x" is an index range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    root: Vertex,
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    depth: Vec<usize>,
    /// Leaves in DFS order.
    leaves: Vec<Vertex>,
    /// Position of each leaf in `leaves`; None for interior vertices.
    leaf_pos: Vec<Option<usize>>,
    /// Half-open range of `leaves` spanned by the branch rooted at each vertex.
    leaf_range: Vec<(usize, usize)>,
}

/// Plain description of a tree, as found in input files.
#[derive(Debug, Clone, Default)]
pub struct TreeDescription {
    pub root: Vertex,
    pub children: BTreeMap<Vertex, Vec<Vertex>>,
    /// Permit interior vertices with a single child (default: reject).
    pub allow_unary: bool,
}

impl Tree {
    /// Build and validate a tree from a description.
    ///
    /// Requires dense vertex ids `0..n`, exactly one root, no cycles, at
    /// least two leaves, an interior root, and (without `allow_unary`) at
    /// least two children on every interior vertex.
    pub fn build(desc: &TreeDescription) -> Result<Tree> {
        // Ids must be dense 0..n. Establish that from the mentioned ids
        // before sizing any arena, so a stray huge id cannot force a huge
        // allocation.
        let mut mentioned: Vec<Vertex> = vec![desc.root];
        for (&v, kids) in &desc.children {
            mentioned.push(v);
            mentioned.extend_from_slice(kids);
        }
        mentioned.sort_unstable();
        mentioned.dedup();
        let n = mentioned.last().map_or(0, |m| m + 1);
        if n != mentioned.len() {
            let gap = (0..n).find(|v| mentioned.binary_search(v).is_err()).unwrap();
            return Err(Error::InvalidTree(format!(
                "vertex ids are not contiguous: {} ids mentioned but the largest is {}, first gap at {gap}",
                mentioned.len(),
                n - 1
            )));
        }
        let mut children = vec![Vec::new(); n];
        let mut parent: Vec<Option<Vertex>> = vec![None; n];
        for (&v, kids) in &desc.children {
            for &c in kids {
                if c == desc.root {
                    return Err(Error::InvalidTree(format!(
                        "cycle detected: root {c} listed as a child of {v}"
                    )));
                }
                if c == v {
                    return Err(Error::InvalidTree(format!("cycle detected: {v} is its own child")));
                }
                if parent[c].is_some() {
                    return Err(Error::InvalidTree(format!(
                        "vertex {c} has more than one parent"
                    )));
                }
                parent[c] = Some(v);
            }
            children[v] = kids.clone();
        }
        // Reachability from the root distinguishes the remaining failure
        // modes: an unreachable vertex without a parent is a second root, an
        // unreachable vertex with a parent sits on a cycle.
        let mut seen = vec![false; n];
        let mut stack = vec![desc.root];
        seen[desc.root] = true;
        let mut reached = 0usize;
        while let Some(v) = stack.pop() {
            reached += 1;
            for &c in &children[v] {
                if seen[c] {
                    return Err(Error::InvalidTree(format!("cycle detected at vertex {c}")));
                }
                seen[c] = true;
                stack.push(c);
            }
        }
        if reached != n {
            let stray = (0..n).find(|&v| !seen[v]).unwrap();
            if parent[stray].is_none() {
                return Err(Error::InvalidTree(format!(
                    "multiple roots: vertex {stray} is not reachable from root {} and has no parent",
                    desc.root
                )));
            }
            return Err(Error::InvalidTree(format!(
                "cycle detected: vertex {stray} is not reachable from the root"
            )));
        }
        if !desc.allow_unary {
            if let Some(v) = (0..n).find(|&v| children[v].len() == 1) {
                return Err(Error::InvalidTree(format!(
                    "interior vertex {v} has a single child (pass allow_unary to permit)"
                )));
            }
        }
        if children[desc.root].is_empty() {
            return Err(Error::InvalidTree("root has no children".into()));
        }

        let mut depth = vec![0usize; n];
        let mut leaves = Vec::new();
        let mut leaf_pos = vec![None; n];
        let mut leaf_range = vec![(0usize, 0usize); n];
        // Iterative DFS computing depth, leaf order and leaf ranges.
        enum Step {
            Enter(Vertex),
            Exit(Vertex),
        }
        let mut stack = vec![Step::Enter(desc.root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(v) => {
                    leaf_range[v].0 = leaves.len();
                    if children[v].is_empty() {
                        leaf_pos[v] = Some(leaves.len());
                        leaves.push(v);
                        leaf_range[v].1 = leaves.len();
                    } else {
                        stack.push(Step::Exit(v));
                        for &c in children[v].iter().rev() {
                            depth[c] = depth[v] + 1;
                            stack.push(Step::Enter(c));
                        }
                    }
                }
                Step::Exit(v) => leaf_range[v].1 = leaves.len(),
            }
        }
        if leaves.len() < 2 {
            return Err(Error::InvalidTree(format!(
                "tree has {} leaf(s); at least 2 are required",
                leaves.len()
            )));
        }
        Ok(Tree {
            root: desc.root,
            parent,
            children,
            depth,
            leaves,
            leaf_pos,
            leaf_range,
        })
    }

    /// The complete rooted tree in which every interior vertex has
    /// `branching` children, with leaves at distance `depth` from the root.
    /// Vertices are numbered level by level, root = 0.
    pub fn regular(branching: usize, depth: usize) -> Result<Tree> {
        if branching < 2 {
            return Err(Error::InvalidInput(format!("branching {branching} < 2")));
        }
        if depth < 1 {
            return Err(Error::InvalidInput(format!("depth {depth} < 1")));
        }
        let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        let mut level = vec![0usize];
        let mut next_id = 1usize;
        for _ in 0..depth {
            let mut next_level = Vec::with_capacity(level.len() * branching);
            for &v in &level {
                let kids: Vec<Vertex> = (0..branching).map(|i| next_id + i).collect();
                next_id += branching;
                next_level.extend_from_slice(&kids);
                children.insert(v, kids);
            }
            level = next_level;
        }
        Tree::build(&TreeDescription { root: 0, children, allow_unary: false })
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    pub fn depth(&self, v: Vertex) -> usize {
        self.depth[v]
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        self.children[v].is_empty()
    }

    pub fn is_interior(&self, v: Vertex) -> bool {
        !self.is_leaf(v)
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> &[Vertex] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Position of a leaf in the DFS leaf order.
    pub fn leaf_position(&self, v: Vertex) -> Option<usize> {
        self.leaf_pos.get(v).copied().flatten()
    }

    /// Half-open index range into `leaves()` of the leaves below `v`.
    pub fn leaf_range(&self, v: Vertex) -> (usize, usize) {
        self.leaf_range[v]
    }

    /// The leaves of the branch rooted at `v`.
    pub fn branch_leaves(&self, v: Vertex) -> &[Vertex] {
        let (lo, hi) = self.leaf_range[v];
        &self.leaves[lo..hi]
    }

    /// True when `anc` lies on the geodesic from the root to `v`.
    pub fn is_ancestor_or_self(&self, anc: Vertex, v: Vertex) -> bool {
        let mut cur = v;
        loop {
            if cur == anc {
                return true;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).filter(|&v| self.is_interior(v))
    }

    /// Neighbours of `v`: parent (if any) followed by children.
    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(1 + self.children[v].len());
        if let Some(p) = self.parent[v] {
            out.push(p);
        }
        out.extend_from_slice(&self.children[v]);
        out
    }

    /// Geodesic from the root to `v`, inclusive.
    pub fn path_from_root(&self, v: Vertex) -> Vec<Vertex> {
        let mut path = Vec::with_capacity(self.depth[v] + 1);
        let mut cur = v;
        loop {
            path.push(cur);
            match self.parent[cur] {
                Some(p) => cur = p,
                None => break,
            }
        }
        path.reverse();
        path
    }

    /// Last common ancestor of `u` and `v` (confluent with respect to the
    /// root), by walking parent links; trees here are small, so no LCA
    /// preprocessing.
    pub fn meet(&self, u: Vertex, v: Vertex) -> Vertex {
        let pu = self.path_from_root(u);
        let pv = self.path_from_root(v);
        let mut last = self.root;
        for (a, b) in pu.iter().zip(pv.iter()) {
            if a == b {
                last = *a;
            } else {
                break;
            }
        }
        last
    }

    /// Geodesic from `u` to `v`, inclusive of both.
    pub fn path(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let w = self.meet(u, v);
        let mut up = Vec::new();
        let mut cur = u;
        while cur != w {
            up.push(cur);
            cur = self.parent[cur].expect("meet is an ancestor");
        }
        up.push(w);
        let mut down = Vec::new();
        cur = v;
        while cur != w {
            down.push(cur);
            cur = self.parent[cur].expect("meet is an ancestor");
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Last common vertex of the geodesics from `base` to `u` and to `v`.
    pub fn confluent(&self, u: Vertex, v: Vertex, base: Vertex) -> Vertex {
        let pu = self.path(base, u);
        let pv = self.path(base, v);
        let mut last = base;
        for (a, b) in pu.iter().zip(pv.iter()) {
            if a == b {
                last = *a;
            } else {
                break;
            }
        }
        last
    }
}

/// A strictly decreasing positive radius labelling of the interior vertices,
/// inducing the metric `d(ξ,η) = value at the confluent` on the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltrametricElement {
    values: Vec<Option<Rat>>,
}

impl UltrametricElement {
    /// Validate a labelling against a tree: positive everywhere, defined
    /// exactly on interior vertices, strictly smaller than the parent's
    /// value.
    pub fn new(tree: &Tree, values: BTreeMap<Vertex, Rat>) -> Result<UltrametricElement> {
        let mut store: Vec<Option<Rat>> = vec![None; tree.vertex_count()];
        for (v, r) in values {
            if v >= tree.vertex_count() {
                return Err(Error::InvalidElement(format!("unknown vertex {v}")));
            }
            if tree.is_leaf(v) {
                return Err(Error::InvalidElement(format!(
                    "value given for leaf {v}; radii live on interior vertices"
                )));
            }
            if r <= Rat::zero() {
                return Err(Error::InvalidElement(format!("value at vertex {v} is not positive")));
            }
            store[v] = Some(r);
        }
        for v in tree.interior_vertices() {
            if store[v].is_none() {
                return Err(Error::InvalidElement(format!("no value for interior vertex {v}")));
            }
            if let Some(p) = tree.parent(v) {
                if store[v] >= store[p] {
                    return Err(Error::InvalidElement(format!(
                        "value must strictly decrease along edges: vertex {v} >= its parent {p}"
                    )));
                }
            }
        }
        Ok(UltrametricElement { values: store })
    }

    /// Radius at an interior vertex.
    pub fn radius(&self, v: Vertex) -> &Rat {
        self.values[v].as_ref().expect("radius queried at a leaf")
    }

    pub fn try_radius(&self, v: Vertex) -> Option<&Rat> {
        self.values.get(v).and_then(|o| o.as_ref())
    }

    /// Diameter of the boundary: the radius at the root.
    pub fn diameter(&self, tree: &Tree) -> &Rat {
        self.radius(tree.root())
    }

    /// Scale every radius by a positive constant.
    pub fn scaled(&self, c: &Rat) -> UltrametricElement {
        UltrametricElement {
            values: self.values.iter().map(|o| o.as_ref().map(|r| r * c)).collect(),
        }
    }

    /// All interior (vertex, radius) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vertex, &Rat)> + '_ {
        self.values.iter().enumerate().filter_map(|(v, o)| o.as_ref().map(|r| (v, r)))
    }
}

/// Boundary metric: the radius at the confluent of two distinct leaves,
/// zero on the diagonal.
pub fn boundary_distance(
    tree: &Tree,
    phi: &UltrametricElement,
    xi: Vertex,
    eta: Vertex,
) -> Result<Rat> {
    if !tree.is_leaf(xi) || !tree.is_leaf(eta) {
        return Err(Error::InvalidInput(format!(
            "boundary distance takes leaves, got {xi} and {eta}"
        )));
    }
    if xi == eta {
        return Ok(Rat::zero());
    }
    let w = tree.confluent(xi, eta, tree.root());
    Ok(phi.radius(w).clone())
}

/// The vertex whose branch is the closed ball of radius `r` around leaf
/// `xi`: the vertex `x` on the root geodesic with `radius(x) <= r <
/// radius(parent(x))`, the root for `r >= diameter`, and `xi` itself when
/// `r` falls below every interior radius on the path (atomic ball).
///
/// Interior degrees are >= 2 here, so every vertex of the root geodesic
/// separates boundary points and the returned vertex is unique.
pub fn ball(tree: &Tree, phi: &UltrametricElement, xi: Vertex, r: &Rat) -> Result<Vertex> {
    if !tree.is_leaf(xi) {
        return Err(Error::InvalidInput(format!("ball centre must be a leaf, got {xi}")));
    }
    if *r <= Rat::zero() {
        return Err(Error::InvalidInput("ball radius must be positive".into()));
    }
    let path = tree.path_from_root(xi);
    // Walk down: the first vertex with radius <= r is the ball.
    for &v in &path {
        if tree.is_leaf(v) {
            return Ok(v);
        }
        if phi.radius(v) <= r {
            return Ok(v);
        }
    }
    unreachable!("path ends at the leaf");
}

/// A finite ultrametric space given by labelled points and an exact distance
/// matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltrametricSpace {
    pub points: Vec<String>,
    pub dist: Vec<Vec<Rat>>,
}

impl UltrametricSpace {
    /// Validate: square symmetric matrix, zero exactly on the diagonal,
    /// positive off it, ultrametric inequality on every triple.
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<UltrametricSpace> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidInput("an ultrametric space needs at least 2 points".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!("distance matrix is not {n}x{n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidInput(format!(
                    "nonzero diagonal at point {}",
                    points[i]
                )));
            }
            for j in 0..i {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric distances between {} and {}",
                        points[i], points[j]
                    )));
                }
                if dist[i][j] < Rat::zero() {
                    return Err(Error::InvalidInput(format!(
                        "negative distance between {} and {}",
                        points[i], points[j]
                    )));
                }
                if dist[i][j].is_zero() {
                    return Err(Error::DuplicatePoints {
                        a: points[j].clone(),
                        b: points[i].clone(),
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let max = std::cmp::max(&dist[i][j], &dist[j][k]);
                    if &dist[i][k] > max {
                        return Err(Error::UltrametricViolation {
                            a: points[i].clone(),
                            b: points[j].clone(),
                            c: points[k].clone(),
                        });
                    }
                }
            }
        }
        Ok(UltrametricSpace { points, dist })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Result of the ball-tree construction: the tree, its radius labelling,
/// and the leaf assigned to each input point (indexed like `points`).
#[derive(Debug, Clone)]
pub struct MetricTree {
    pub tree: Tree,
    pub phi: UltrametricElement,
    /// leaf vertex of point `i`.
    pub point_leaf: Vec<Vertex>,
}

/// Build the tree of closed balls of an ultrametric space.
///
/// Interior vertices are the balls with at least two points, labelled by the
/// ball's diameter; single points become leaves. The boundary metric of the
/// result reproduces the input matrix entry for entry.
pub fn tree_from_ultrametric(space: &UltrametricSpace) -> Result<MetricTree> {
    let n = space.len();
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut phi_values: BTreeMap<Vertex, Rat> = BTreeMap::new();
    let mut point_leaf = vec![usize::MAX; n];
    let mut next_id = 0usize;

    // Stack of (vertex id, point indices of the ball).
    let all: Vec<usize> = (0..n).collect();
    let root = next_id;
    next_id += 1;
    let mut stack = vec![(root, all)];
    while let Some((id, pts)) = stack.pop() {
        if pts.len() == 1 {
            point_leaf[pts[0]] = id;
            continue;
        }
        // Diameter of this ball.
        let mut diam = Rat::zero();
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                if space.dist[i][j] > diam {
                    diam = space.dist[i][j].clone();
                }
            }
        }
        phi_values.insert(id, diam.clone());
        // Split into the equivalence classes of "distance < diameter";
        // ultrametricity makes this transitive, so one representative per
        // class suffices.
        let mut classes: Vec<Vec<usize>> = Vec::new();
        'pts: for &p in &pts {
            for class in classes.iter_mut() {
                if space.dist[class[0]][p] < diam {
                    class.push(p);
                    continue 'pts;
                }
            }
            classes.push(vec![p]);
        }
        debug_assert!(classes.len() >= 2, "a positive-diameter ball must split");
        let mut kids = Vec::with_capacity(classes.len());
        for class in classes {
            let id_child = next_id;
            next_id += 1;
            kids.push(id_child);
            stack.push((id_child, class));
        }
        children.insert(id, kids);
    }

    let tree = Tree::build(&TreeDescription { root, children, allow_unary: false })?;
    let phi = UltrametricElement::new(&tree, phi_values)?;
    // Exact round-trip of the metric is a construction invariant; verify.
    for i in 0..n {
        for j in 0..n {
            let d = boundary_distance(&tree, &phi, point_leaf[i], point_leaf[j])?;
            if d != space.dist[i][j] {
                return Err(Error::Internal(format!(
                    "ball tree does not reproduce d({},{})",
                    space.points[i], space.points[j]
                )));
            }
        }
    }
    Ok(MetricTree { tree, phi, point_leaf })
}

/// The boundary metric of `(tree, phi)` as an ultrametric space whose points
/// are the leaves, labelled by their vertex ids.
pub fn metric_of_tree(tree: &Tree, phi: &UltrametricElement) -> Result<UltrametricSpace> {
    let leaves = tree.leaves();
    let n = leaves.len();
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let d = boundary_distance(tree, phi, leaves[i], leaves[j])?;
            dist[i][j] = d.clone();
            dist[j][i] = d;
        }
    }
    UltrametricSpace::new(leaves.iter().map(|v| v.to_string()).collect(), dist)
}

/// Rooted-tree isomorphism respecting the radius labelling, via canonical
/// forms. Used by the round-trip checks.
pub fn isomorphic_with_radii(
    a: &Tree,
    phi_a: &UltrametricElement,
    b: &Tree,
    phi_b: &UltrametricElement,
) -> bool {
    fn canon(tree: &Tree, phi: &UltrametricElement, v: Vertex) -> String {
        if tree.is_leaf(v) {
            return "*".into();
        }
        let mut kids: Vec<String> =
            tree.children(v).iter().map(|&c| canon(tree, phi, c)).collect();
        kids.sort();
        format!("({}|{})", phi.radius(v), kids.join(","))
    }
    canon(a, phi_a, a.root()) == canon(b, phi_b, b.root())
}
