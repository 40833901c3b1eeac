//! Shared fixtures: the canonical two-level binary tree with its simple
//! walk, and seeded random generators for trees, walks, labellings,
//! measures and CDF tables. Used by the test suites and by the
//! verification harnesses' randomized runs.

use std::collections::BTreeMap;

use num_traits::One;

use crate::boundary::{JumpProcessSpec, SigmaMeasure};
use crate::ratio::{rat, Rat};
use crate::simulate::Rng64;
use crate::tree::{Tree, TreeDescription, UltrametricElement, Vertex};
use crate::walk::{BoundaryMeasure, Walk};

/// The canonical fixture: root 0 with interior children 1, 2; leaves 3, 4
/// under 1 and 5, 6 under 2.
pub fn b2_tree() -> Tree {
    let mut children = BTreeMap::new();
    children.insert(0, vec![1, 2]);
    children.insert(1, vec![3, 4]);
    children.insert(2, vec![5, 6]);
    Tree::build(&TreeDescription { root: 0, children, allow_unary: false }).unwrap()
}

/// Simple-walk transition rows on the fixture tree.
pub fn b2_probabilities() -> BTreeMap<Vertex, BTreeMap<Vertex, Rat>> {
    let mut p = BTreeMap::new();
    p.insert(0, BTreeMap::from([(1, rat(1, 2)), (2, rat(1, 2))]));
    p.insert(1, BTreeMap::from([(0, rat(1, 3)), (3, rat(1, 3)), (4, rat(1, 3))]));
    p.insert(2, BTreeMap::from([(0, rat(1, 3)), (5, rat(1, 3)), (6, rat(1, 3))]));
    p
}

pub fn b2_walk() -> Walk {
    Walk::new(b2_tree(), &b2_probabilities()).unwrap()
}

/// Radii 3/2 at the root and 1/2 at both interior children.
pub fn b2_phi(tree: &Tree) -> UltrametricElement {
    let values = BTreeMap::from([(0, rat(3, 2)), (1, rat(1, 2)), (2, rat(1, 2))]);
    UltrametricElement::new(tree, values).unwrap()
}

/// Fixture process with the standard radius distribution and uniform
/// measure.
pub fn b2_standard_spec() -> (JumpProcessSpec, BoundaryMeasure) {
    let tree = b2_tree();
    let phi = b2_phi(&tree);
    let mu = BoundaryMeasure::uniform(&tree);
    let spec = JumpProcessSpec::new(tree, phi, mu.clone(), SigmaMeasure::standard()).unwrap();
    (spec, mu)
}

/// Fixture process with a tabulated CDF (1/4 at radius 1/2, 1/2 at radius
/// 3/2) and uniform measure.
pub fn b2_tabulated_spec() -> (JumpProcessSpec, BoundaryMeasure) {
    let tree = b2_tree();
    let phi = b2_phi(&tree);
    let mu = BoundaryMeasure::uniform(&tree);
    let sigma =
        SigmaMeasure::tabulated(vec![(rat(1, 2), rat(1, 4)), (rat(3, 2), rat(1, 2))]).unwrap();
    let spec = JumpProcessSpec::new(tree, phi, mu.clone(), sigma).unwrap();
    (spec, mu)
}

/// Random rooted tree with interior degrees >= 2: each vertex at depth
/// below `max_depth` sprouts 2..=max_branching children, and each child
/// continues with probability ~1/2. At least two leaves by construction.
pub fn random_tree(rng: &mut Rng64, max_depth: usize, max_branching: usize) -> Tree {
    assert!(max_branching >= 2);
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut next_id = 1usize;
    // (vertex, depth) queue of interior vertices to expand
    let mut queue = vec![(0usize, 0usize)];
    while let Some((v, depth)) = queue.pop() {
        let b = 2 + (rng.next_u64() as usize) % (max_branching - 1);
        let kids: Vec<Vertex> = (0..b).map(|i| next_id + i).collect();
        next_id += b;
        for &k in &kids {
            if depth + 1 < max_depth && rng.next_u64().is_multiple_of(2) {
                queue.push((k, depth + 1));
            }
        }
        children.insert(v, kids);
    }
    Tree::build(&TreeDescription { root: 0, children, allow_unary: false }).unwrap()
}

/// Random tree grown to a vertex budget: repeatedly expand a random leaf
/// into 2..=3 children until at least `target` vertices exist. Gives
/// irregular trees of controlled size (final count < target + 3).
pub fn random_tree_grown(rng: &mut Rng64, target: usize) -> Tree {
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut leaves: Vec<Vertex> = vec![0];
    let mut count = 1usize;
    let mut next_id = 1usize;
    while count < target {
        let slot = (rng.next_u64() % leaves.len() as u64) as usize;
        let v = leaves.swap_remove(slot);
        let b = 2 + (rng.next_u64() % 2) as usize;
        let kids: Vec<Vertex> = (0..b).map(|i| next_id + i).collect();
        next_id += b;
        count += b;
        leaves.extend_from_slice(&kids);
        children.insert(v, kids);
    }
    Tree::build(&TreeDescription { root: 0, children, allow_unary: false }).unwrap()
}

/// Random strictly decreasing positive radius labelling.
pub fn random_phi(rng: &mut Rng64, tree: &Tree) -> UltrametricElement {
    let mut values: BTreeMap<Vertex, Rat> = BTreeMap::new();
    let root_radius = rat(1 + (rng.next_u64() % 12) as i64, 1 + (rng.next_u64() % 3) as i64);
    let mut stack = vec![(tree.root(), root_radius)];
    while let Some((v, r)) = stack.pop() {
        for &c in tree.children(v) {
            if tree.is_interior(c) {
                let den = 2 + (rng.next_u64() % 8) as i64;
                let num = 1 + (rng.next_u64() % (den as u64 - 1)) as i64;
                stack.push((c, &r * rat(num, den)));
            }
        }
        values.insert(v, r);
    }
    UltrametricElement::new(tree, values).unwrap()
}

pub fn random_tree_with_phi(
    rng: &mut Rng64,
    max_depth: usize,
    max_branching: usize,
) -> (Tree, UltrametricElement) {
    let tree = random_tree(rng, max_depth, max_branching);
    let phi = random_phi(rng, &tree);
    (tree, phi)
}

/// Random walk: transition rows from integer weights 1..=9 per neighbour.
pub fn random_walk(rng: &mut Rng64, tree: Tree) -> Walk {
    let mut p = BTreeMap::new();
    for v in tree.interior_vertices() {
        let nbrs = tree.neighbors(v);
        let weights: Vec<i64> = nbrs.iter().map(|_| 1 + (rng.next_u64() % 9) as i64).collect();
        let total: i64 = weights.iter().sum();
        let row: BTreeMap<Vertex, Rat> = nbrs
            .into_iter()
            .zip(weights)
            .map(|(y, w)| (y, rat(w, total)))
            .collect();
        p.insert(v, row);
    }
    Walk::new(tree, &p).expect("weighted rows are stochastic")
}

/// Random fully supported probability measure from integer weights.
pub fn random_measure(rng: &mut Rng64, tree: &Tree) -> BoundaryMeasure {
    let weights: Vec<i64> =
        (0..tree.leaf_count()).map(|_| 1 + (rng.next_u64() % 9) as i64).collect();
    let total: i64 = weights.iter().sum();
    BoundaryMeasure::new(tree, weights.into_iter().map(|w| rat(w, total)).collect()).unwrap()
}

/// Random CDF table on the labelling's radius set: strictly increasing
/// rational values in (0, 1).
pub fn random_sigma(rng: &mut Rng64, tree: &Tree, phi: &UltrametricElement) -> SigmaMeasure {
    let mut radii: Vec<Rat> = tree.interior_vertices().map(|v| phi.radius(v).clone()).collect();
    radii.sort();
    radii.dedup();
    let increments: Vec<i64> = radii.iter().map(|_| 1 + (rng.next_u64() % 9) as i64).collect();
    let headroom = 1 + (rng.next_u64() % 9) as i64;
    let total: i64 = increments.iter().sum::<i64>() + headroom;
    let mut acc = 0i64;
    let entries: Vec<(Rat, Rat)> = radii
        .into_iter()
        .zip(increments)
        .map(|(r, w)| {
            acc += w;
            (r, rat(acc, total))
        })
        .collect();
    let sigma = SigmaMeasure::tabulated(entries).unwrap();
    sigma.validate_for(tree, phi).expect("increasing table is valid");
    sigma
}

/// Random rational function on the leaves (values in [-9/d, 9/d] for small
/// denominators d).
pub fn random_leaf_function(rng: &mut Rng64, leaf_count: usize) -> Vec<Rat> {
    (0..leaf_count)
        .map(|_| {
            let num = (rng.next_u64() % 19) as i64 - 9;
            let den = 1 + (rng.next_u64() % 4) as i64;
            rat(num, den)
        })
        .collect()
}

/// Random positive rational constant with numerator and denominator in
/// 1..=bound.
pub fn random_positive_rat(rng: &mut Rng64, bound: u64) -> Rat {
    let r = rat(
        (1 + rng.next_u64() % bound) as i64,
        (1 + rng.next_u64() % bound) as i64,
    );
    if r.is_one() {
        rat(2, 1)
    } else {
        r
    }
}
