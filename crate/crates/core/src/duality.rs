//! Both directions of the correspondence between nearest neighbour walks
//! and isotropic boundary jump processes, the Naim kernel, the harmonic
//! Dirichlet form on boundary functions, and exact verification harnesses.
//!
//! Forward: a walk induces the radius labelling `φ(x) = G(x, root)` and the
//! measure `μ = ν_root`; its boundary process is the standard jump process
//! of that pair, witnessed by the exact equality of the jump kernel and the
//! Naim kernel on every leaf pair.
//!
//! Backward: a radius labelling and a fully supported measure determine a
//! unique time constant `C` and a unique walk whose Green values towards
//! the root are `C·φ` and whose limit distribution is `μ`. The
//! reconstruction follows the hitting-probability recursions and refuses to
//! return on any exact postcondition failure (stochasticity, Green match,
//! measure match): those are mathematically guaranteed, so a failure is an
//! implementation bug, never bad input.

use num_traits::{One, Zero};

use crate::error::Error;
use crate::ratio::{fmt_rat, Rat};
use crate::report::{CheckReport, IdentityEntry};
use crate::simulate::Rng64;
use crate::tree::{Tree, UltrametricElement, Vertex};
use crate::walk::{BoundaryMeasure, Walk, WalkKernels};
use crate::Result;

/// The (radius labelling, boundary measure) pair induced by a walk.
#[derive(Debug, Clone)]
pub struct DualityResult {
    /// φ(x) = G(x, root) on interior vertices; strictly decreasing along
    /// edges because hitting probabilities towards the root are < 1.
    pub phi: UltrametricElement,
    /// The limit distribution from the root.
    pub mu: BoundaryMeasure,
}

/// Forward direction: Green values towards the root and the root's limit
/// distribution.
pub fn walk_to_process(walk: &Walk, kernels: &WalkKernels) -> Result<DualityResult> {
    let tree = walk.tree();
    let green_col = kernels.green_column(tree.root())?;
    let values = tree
        .interior_vertices()
        .map(|v| (v, green_col[v].clone()))
        .collect();
    let phi = UltrametricElement::new(tree, values)
        .map_err(|e| Error::Internal(format!("Green radii are not a labelling: {e}")))?;
    let mu = kernels.harmonic_measure(tree.root())?;
    Ok(DualityResult { phi, mu })
}

/// Everything the backward reconstruction produces: the time constant, the
/// would-be hitting probabilities and Green diagonal it passed through, and
/// the final validated walk.
#[derive(Debug, Clone)]
pub struct ReconstructionTrace {
    /// The unique constant with `C·φ(x) = G(x, root)`.
    pub c: Rat,
    /// Would-be F(x, x⁻) per non-root vertex (0 at leaves).
    pub hit_up: Vec<Rat>,
    /// Would-be F(x⁻, x) per non-root vertex.
    pub hit_down: Vec<Rat>,
    /// Would-be G(x, x) per interior vertex (slot unused at leaves).
    pub green_diag: Vec<Rat>,
    pub walk: Walk,
}

impl ReconstructionTrace {
    /// Would-be F(x, y) as the product of edge values along the geodesic.
    pub fn hit(&self, tree: &Tree, x: Vertex, y: Vertex) -> Rat {
        let path = tree.path(x, y);
        let mut f = Rat::one();
        for w in path.windows(2) {
            let step = if tree.parent(w[0]) == Some(w[1]) {
                &self.hit_up[w[0]]
            } else {
                &self.hit_down[w[1]]
            };
            if step.is_zero() {
                return Rat::zero();
            }
            f *= step;
        }
        f
    }
}

/// Backward direction: reconstruct the unique walk and time constant from a
/// radius labelling and a fully supported boundary measure.
pub fn process_to_walk(
    tree: &Tree,
    phi: &UltrametricElement,
    mu: &BoundaryMeasure,
) -> Result<ReconstructionTrace> {
    let n = tree.vertex_count();
    let root = tree.root();

    // Would-be upward hitting probabilities: radius ratios on interior
    // edges, zero out of a leaf (absorbed walkers never return).
    let mut hit_up = vec![Rat::zero(); n];
    for v in 0..n {
        let Some(p) = tree.parent(v) else { continue };
        if tree.is_interior(v) {
            hit_up[v] = phi.radius(v) / phi.radius(p);
        }
    }

    // Downward recursion from the root: with r = μ(∂T_x) / F(root, x⁻),
    //   F(x⁻, x) = r / (1 − F(x,x⁻) + F(x,x⁻) r),
    // and F(root, x) extends multiplicatively. For a leaf x the upward
    // value is 0 and this reduces to F(x⁻,x) = μ({x}) / F(root, x⁻).
    let mut hit_down = vec![Rat::zero(); n];
    let mut from_root = vec![Rat::zero(); n]; // would-be F(root, x)
    from_root[root] = Rat::one();
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for &x in tree.children(v) {
            let branch = mu.branch_mass(tree, x);
            let ratio = &branch / &from_root[v];
            let denom = Rat::one() - &hit_up[x] + &hit_up[x] * &ratio;
            hit_down[x] = ratio / denom;
            from_root[x] = &from_root[v] * &hit_down[x];
            if hit_down[x] <= Rat::zero() || hit_down[x] > Rat::one() {
                return Err(Error::Internal(format!(
                    "reconstructed F({v},{x}) = {} outside (0,1]",
                    fmt_rat(&hit_down[x])
                )));
            }
            // Exact re-derivation of the branch mass, and the sandwich
            // μ(∂T_x) <= F(root,x) <= 1, both guaranteed by construction.
            let re_mu = &from_root[v]
                * &hit_down[x]
                * (Rat::one() - &hit_up[x])
                / (Rat::one() - &hit_up[x] * &hit_down[x]);
            if re_mu != branch || branch > from_root[x] || from_root[x] > Rat::one() {
                return Err(Error::Internal(format!(
                    "branch-mass consistency failed at vertex {x}"
                )));
            }
            if tree.is_interior(x) {
                stack.push(x);
            }
        }
    }

    // The time constant, from the Green diagonal identity at the root
    // written in terms of radii; leaf children contribute nothing.
    let diam = phi.diameter(tree);
    let mut c = Rat::one() / diam;
    for &x in tree.children(root) {
        if tree.is_interior(x) {
            let r = phi.radius(x);
            c += (r / diam) / (diam - r) * mu.branch_mass(tree, x);
        }
    }

    // Would-be Green diagonal on interior vertices.
    let mut green_diag = vec![Rat::zero(); n];
    for v in tree.interior_vertices() {
        let mut g = Rat::one();
        for y in tree.neighbors(v) {
            let prod = if tree.parent(v) == Some(y) {
                &hit_up[v] * &hit_down[v]
            } else {
                &hit_down[y] * &hit_up[y]
            };
            if !prod.is_zero() {
                g += &prod / (Rat::one() - &prod);
            }
        }
        green_diag[v] = g;
    }
    if green_diag[root] != &c * diam {
        return Err(Error::Internal(
            "Green diagonal at the root disagrees with the time constant".into(),
        ));
    }

    // Transition probabilities, then the stochasticity that the recursion
    // guarantees is enforced by the walk validator.
    let mut p: std::collections::BTreeMap<Vertex, std::collections::BTreeMap<Vertex, Rat>> =
        std::collections::BTreeMap::new();
    for v in tree.interior_vertices() {
        let mut row = std::collections::BTreeMap::new();
        for y in tree.neighbors(v) {
            let (f_vy, f_yv) = if tree.parent(v) == Some(y) {
                (&hit_up[v], &hit_down[v])
            } else {
                (&hit_down[y], &hit_up[y])
            };
            let prob = f_vy / (&green_diag[v] * (Rat::one() - f_vy * f_yv));
            row.insert(y, prob);
        }
        p.insert(v, row);
    }
    let walk = Walk::new(tree.clone(), &p)
        .map_err(|e| Error::Internal(format!("reconstructed matrix is not a walk: {e}")))?;

    let trace =
        ReconstructionTrace { c: c.clone(), hit_up, hit_down, green_diag, walk };

    // Postconditions: the real kernels of the reconstructed walk reproduce
    // C·φ as Green values towards the root and μ as the limit distribution.
    let kernels = WalkKernels::compute(&trace.walk);
    let green_col = kernels.green_column(root)?;
    for v in tree.interior_vertices() {
        if green_col[v] != &c * phi.radius(v) {
            return Err(Error::Internal(format!(
                "Green value at vertex {v} is {}, expected C*phi = {}",
                fmt_rat(&green_col[v]),
                fmt_rat(&(&c * phi.radius(v)))
            )));
        }
    }
    let nu = kernels.harmonic_measure(root)?;
    if nu.masses() != mu.masses() {
        return Err(Error::Internal(
            "limit distribution of the reconstructed walk differs from the input measure".into(),
        ));
    }
    // The would-be Green column solves the one-step equation with a unit
    // charge at the base (checked at the root and two interior vertices).
    let interior: Vec<Vertex> = tree.interior_vertices().collect();
    let mut bases = vec![root];
    if interior.len() > 1 {
        bases.push(interior[interior.len() / 2]);
        bases.push(interior[interior.len() - 1]);
    }
    bases.dedup();
    for &x0 in &bases {
        for &x in &interior {
            let g_x = trace.hit(tree, x, x0) * &trace.green_diag[x0];
            let mut pg = Rat::zero();
            for (y, prob) in trace.walk.outgoing(x) {
                pg += prob * trace.hit(tree, *y, x0) * &trace.green_diag[x0];
            }
            let expected = if x == x0 { &g_x - Rat::one() } else { g_x.clone() };
            if pg != expected {
                return Err(Error::Internal(format!(
                    "one-step identity for the reconstructed Green column fails at ({x}, {x0})"
                )));
            }
        }
    }

    Ok(trace)
}

/// The Naim kernel at a base vertex: for distinct leaves with confluent `c`
/// taken with respect to `base`,
/// `Θ_base(ξ,η) = m(base) / (G(base,base) F(base,c) F(c,base))`,
/// with the measure normalised globally by m(root) = 1.
pub fn naim_kernel(
    walk: &Walk,
    kernels: &WalkKernels,
    base: Vertex,
    xi: Vertex,
    eta: Vertex,
) -> Result<Rat> {
    let tree = walk.tree();
    if xi == eta {
        return Err(Error::InvalidInput(
            "Naim kernel diagonal is +infinity and never evaluated".into(),
        ));
    }
    if !tree.is_leaf(xi) || !tree.is_leaf(eta) {
        return Err(Error::InvalidInput("Naim kernel takes two leaves".into()));
    }
    if tree.is_leaf(base) {
        return Err(Error::InvalidInput("Naim kernel base must be interior".into()));
    }
    let c = tree.confluent(xi, eta, base);
    let denom = kernels.green_diag(base) * kernels.hit(base, c) * kernels.hit(c, base);
    Ok(kernels.weight(base) / denom)
}

/// The harmonic Dirichlet form on boundary functions: the tree form of the
/// harmonic extensions, `(u, v) ↦ D_T(h_u, h_v)`.
pub fn hd_form(kernels: &WalkKernels, u: &[Rat], v: &[Rat]) -> Rat {
    let hu = kernels.poisson_transform(u);
    let hv = kernels.poisson_transform(v);
    kernels.dirichlet_form(&hu, &hv)
}

/// The indicator basis `{1_{∂T_x}}` over all vertices, with names. These
/// generate all boundary functions, so exact equality of a bilinear
/// identity on them (plus random functions) is a thorough certificate.
pub fn indicator_basis(tree: &Tree) -> Vec<(String, Vec<Rat>)> {
    let mut out = Vec::with_capacity(tree.vertex_count());
    for v in 0..tree.vertex_count() {
        let (lo, hi) = tree.leaf_range(v);
        let mut f = vec![Rat::zero(); tree.leaf_count()];
        for slot in f.iter_mut().take(hi).skip(lo) {
            *slot = Rat::one();
        }
        out.push((format!("1_branch_{v}"), f));
    }
    out
}

/// The boundary side of the Doob-Naim identity as a quadratic form:
/// `(1/2) ΣΣ (u(ξ)−u(η))(v(ξ)−v(η)) Θ_o(ξ,η) ν_o(ξ) ν_o(η) = uᵀ(D − W)v`,
/// where `W(ξ,η) = Θ_o ν_o ν_o` off the diagonal and `D` holds W's row
/// sums.
///
/// W is never materialised: the kernel is constant on confluent levels, so
/// `(Wv)(ξ)` telescopes along the root path of ξ over the branch sums of
/// ν·v, giving `O(depth)` work per leaf instead of `O(leaves)`.
pub struct NaimForm {
    tree: Tree,
    /// ν_root per leaf, in leaf order.
    nu: Vec<Rat>,
    /// Naim kernel value for pairs whose confluent is this interior vertex.
    theta: Vec<Option<Rat>>,
    /// Row sums of W, in leaf order.
    row_sum: Vec<Rat>,
}

impl NaimForm {
    pub fn new(walk: &Walk, kernels: &WalkKernels) -> Result<NaimForm> {
        let tree = walk.tree().clone();
        let root = tree.root();
        let nu = kernels.absorption_vector(root);
        let from_root = kernels.hit_from_all(root);
        let to_root = kernels.hit_to_all(root);
        let mut theta = vec![None; tree.vertex_count()];
        for v in tree.interior_vertices() {
            theta[v] = Some(
                kernels.weight(root) / (kernels.green_diag(root) * &from_root[v] * &to_root[v]),
            );
        }
        let mut form = NaimForm { tree, nu, theta, row_sum: Vec::new() };
        form.row_sum = form.kernel_apply(&vec![Rat::one(); form.nu.len()]);
        Ok(form)
    }

    /// Branch sums of ν·v: S(x) = Σ_{leaves below x} ν(η) v(η), per vertex.
    fn branch_sums(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.nu.len();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(Rat::zero());
        for i in 0..n {
            let w = if v[i].is_zero() {
                Rat::zero()
            } else {
                &self.nu[i] * &v[i]
            };
            let acc = &prefix[i] + w;
            prefix.push(acc);
        }
        (0..self.tree.vertex_count())
            .map(|x| {
                let (lo, hi) = self.tree.leaf_range(x);
                &prefix[hi] - &prefix[lo]
            })
            .collect()
    }

    /// (Wv) at every leaf: ν(ξ) Σ_{c on path} Θ(c) (S(c) − S(next)).
    fn kernel_apply(&self, v: &[Rat]) -> Vec<Rat> {
        let sums = self.branch_sums(v);
        self.tree
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, &leaf)| {
                let path = self.tree.path_from_root(leaf);
                let mut acc = Rat::zero();
                for step in path.windows(2) {
                    let diff = &sums[step[0]] - &sums[step[1]];
                    if !diff.is_zero() {
                        acc += self.theta[step[0]].as_ref().expect("interior") * diff;
                    }
                }
                acc * &self.nu[i]
            })
            .collect()
    }

    /// t = (D − W)v at the leaves; the boundary form is then `Σ u(ξ) t(ξ)`.
    pub fn transform(&self, v: &[Rat]) -> Vec<Rat> {
        let wv = self.kernel_apply(v);
        (0..self.nu.len())
            .map(|i| {
                if v[i].is_zero() {
                    -&wv[i]
                } else {
                    &self.row_sum[i] * &v[i] - &wv[i]
                }
            })
            .collect()
    }

    /// Pairing of a leaf function against a transformed one.
    pub fn pair(&self, u: &[Rat], transformed_v: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (ui, ti) in u.iter().zip(transformed_v.iter()) {
            if !ui.is_zero() && !ti.is_zero() {
                acc += ui * ti;
            }
        }
        acc
    }

    /// The boundary double sum for a pair of leaf functions.
    pub fn apply(&self, u: &[Rat], v: &[Rat]) -> Rat {
        self.pair(u, &self.transform(v))
    }
}

/// Check the Doob-Naim identity — tree Dirichlet form of harmonic
/// extensions against the Naim-weighted boundary double sum — exactly, for
/// the given function pairs.
pub fn check_doob_naim_pairs(
    walk: &Walk,
    kernels: &WalkKernels,
    functions: &[(String, Vec<Rat>)],
    pairs: &[(usize, usize)],
) -> Result<CheckReport> {
    let mut report = CheckReport::new("doob-naim");
    let form = NaimForm::new(walk, kernels)?;
    // Harmonic extensions by tree elimination and transformed boundary
    // vectors, one of each per function; every pair is then linear work.
    let extensions: Vec<Vec<Rat>> =
        functions.iter().map(|(_, u)| crate::walk::harmonic_extension(walk, u)).collect();
    let transformed: Vec<Vec<Rat>> =
        functions.iter().map(|(_, u)| form.transform(u)).collect();
    for &(i, j) in pairs {
        let tree_side = kernels.dirichlet_form(&extensions[i], &extensions[j]);
        let boundary_side = form.pair(&functions[i].1, &transformed[j]);
        report.record(IdentityEntry {
            identity: format!("doob-naim[{},{}]", functions[i].0, functions[j].0),
            location: vec![i, j],
            lhs: fmt_rat(&tree_side),
            rhs: fmt_rat(&boundary_side),
            pass: tree_side == boundary_side,
        });
    }
    Ok(report)
}

/// Doob-Naim over every unordered pair of the given functions (including
/// diagonal pairs).
pub fn check_doob_naim(
    walk: &Walk,
    kernels: &WalkKernels,
    functions: &[(String, Vec<Rat>)],
) -> Result<CheckReport> {
    let mut pairs = Vec::new();
    for i in 0..functions.len() {
        for j in i..functions.len() {
            pairs.push((i, j));
        }
    }
    check_doob_naim_pairs(walk, kernels, functions, &pairs)
}

/// Check that the jump kernel of the induced standard process — radius
/// labelling `G(·, root)`, measure `ν_root` — equals the Naim kernel at the
/// root on every off-diagonal leaf pair, exactly.
pub fn check_jump_naim_equality(walk: &Walk, kernels: &WalkKernels) -> Result<CheckReport> {
    let mut report = CheckReport::new("theorem1");
    let tree = walk.tree();
    let dual = walk_to_process(walk, kernels)?;
    let leaves = tree.leaves();
    for (i, &xi) in leaves.iter().enumerate() {
        for &eta in leaves.iter().take(i) {
            let j = crate::boundary::jump_kernel(tree, &dual.phi, &dual.mu, xi, eta)?;
            let theta = naim_kernel(walk, kernels, tree.root(), xi, eta)?;
            let pass = j == theta;
            report.record_with(pass, || IdentityEntry {
                identity: "jump-equals-naim".into(),
                location: vec![xi, eta],
                lhs: fmt_rat(&j),
                rhs: fmt_rat(&theta),
                pass,
            });
        }
    }
    Ok(report)
}

/// Check base-point invariance of the Naim-weighted pair measure:
/// `Θ_base(ξ,η) ν_base(ξ) ν_base(η)` is the same for every interior base,
/// and the limit-distribution densities are the Martin kernel ratios
/// `ν_b({l})/ν_root({l}) = G(b, b∧l) / G(root, b∧l)` (confluent with
/// respect to the root). All exact.
pub fn check_base_point_invariance(walk: &Walk, kernels: &WalkKernels) -> Result<CheckReport> {
    let mut report = CheckReport::new("invariance");
    let tree = walk.tree();
    let root = tree.root();
    let leaves = tree.leaves();
    let n = leaves.len();

    // Confluent of two leaves with respect to an arbitrary base is the
    // median of the three vertices: the deepest of the three pairwise
    // root-based meets. Precompute leaf-pair meets once and (base, leaf)
    // meets per base; each pair is then O(1).
    let mut pair_meet = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..i {
            let m = tree.meet(leaves[i], leaves[j]);
            pair_meet[i][j] = m;
            pair_meet[j][i] = m;
        }
    }
    let deepest3 = |a: Vertex, b: Vertex, c: Vertex| -> Vertex {
        let mut best = a;
        if tree.depth(b) > tree.depth(best) {
            best = b;
        }
        if tree.depth(c) > tree.depth(best) {
            best = c;
        }
        best
    };

    let nu_root = kernels.absorption_vector(root);
    // The kernel value per base depends only on the confluent; tabulate it
    // over the interior vertices once per base.
    let theta_table = |base: Vertex| -> Vec<Option<Rat>> {
        let from_b = kernels.hit_from_all(base);
        let to_b = kernels.hit_to_all(base);
        (0..tree.vertex_count())
            .map(|c| {
                tree.is_interior(c).then(|| {
                    kernels.weight(base) / (kernels.green_diag(base) * &from_b[c] * &to_b[c])
                })
            })
            .collect()
    };
    // Reference pair measure at the root.
    let theta_root = theta_table(root);
    let mut reference = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let c = pair_meet[i][j];
            reference[i][j] =
                theta_root[c].as_ref().expect("confluents are interior") * &nu_root[i] * &nu_root[j];
        }
    }
    for base in tree.interior_vertices() {
        let nu_b = kernels.absorption_vector(base);
        let from_b = kernels.hit_from_all(base);
        let from_root = kernels.hit_from_all(root);
        let theta_b = theta_table(base);
        let base_meets: Vec<Vertex> = leaves.iter().map(|&l| tree.meet(base, l)).collect();
        for i in 0..n {
            for j in 0..i {
                let c = deepest3(pair_meet[i][j], base_meets[i], base_meets[j]);
                let w = theta_b[c].as_ref().expect("confluents are interior")
                    * &nu_b[i]
                    * &nu_b[j];
                let pass = w == reference[i][j];
                report.record_with(pass, || IdentityEntry {
                    identity: "pair-measure-invariance".into(),
                    location: vec![base, leaves[i], leaves[j]],
                    lhs: fmt_rat(&w),
                    rhs: fmt_rat(&reference[i][j]),
                    pass,
                });
            }
        }
        // Martin kernel ratios ν_b({l})/ν_root({l}) = G(b,c)/G(root,c) with
        // the confluent c = b ∧ l taken at the root. Cross-multiplied, and
        // with the common factor G(c,c) cancelled, the exact identity reads
        // ν_b({l}) F(root,c) = ν_root({l}) F(b,c).
        for (i, &l) in leaves.iter().enumerate() {
            let c = base_meets[i];
            let lhs = &nu_b[i] * &from_root[c];
            let rhs = &nu_root[i] * &from_b[c];
            let pass = lhs == rhs;
            report.record_with(pass, || IdentityEntry {
                identity: "martin-kernel".into(),
                location: vec![base, l],
                lhs: fmt_rat(&lhs),
                rhs: fmt_rat(&rhs),
                pass,
            });
        }
    }
    Ok(report)
}

/// Round-trip checks: walk → (φ, μ) → (C, walk) recovers C = 1 and the
/// identical matrix; scaling φ by c divides C by c with the same walk; and
/// (φ, μ) → walk → (φ', μ') recovers φ' = C·φ and μ' = μ.
pub fn check_roundtrip(walk: &Walk, kernels: &WalkKernels, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("roundtrip");
    let tree = walk.tree();
    let dual = walk_to_process(walk, kernels)?;
    let trace = process_to_walk(tree, &dual.phi, &dual.mu)?;
    report.record(IdentityEntry {
        identity: "time-constant".into(),
        location: vec![],
        lhs: fmt_rat(&trace.c),
        rhs: "1".into(),
        pass: trace.c.is_one(),
    });
    report.record(IdentityEntry {
        identity: "matrix-recovered".into(),
        location: vec![],
        lhs: if trace.walk == *walk { "identical".into() } else { "differs".into() },
        rhs: "identical".into(),
        pass: trace.walk == *walk,
    });
    // Scaling by a random positive rational.
    let mut rng = Rng64::new(seed);
    let c = Rat::new(
        ((rng.next_u64() % 19) + 1).into(),
        ((rng.next_u64() % 13) + 1).into(),
    );
    let scaled = process_to_walk(tree, &dual.phi.scaled(&c), &dual.mu)?;
    let expected = Rat::one() / &c;
    report.record(IdentityEntry {
        identity: "scaling".into(),
        location: vec![],
        lhs: fmt_rat(&scaled.c),
        rhs: fmt_rat(&expected),
        pass: scaled.c == expected && scaled.walk == *walk,
    });
    Ok(report)
}

/// The (φ, μ) → walk → (φ', μ') direction for arbitrary inputs: the
/// recovered labelling is C·φ and the measure comes back exactly.
pub fn check_phi_mu_roundtrip(
    tree: &Tree,
    phi: &UltrametricElement,
    mu: &BoundaryMeasure,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("roundtrip-phi-mu");
    let trace = process_to_walk(tree, phi, mu)?;
    let kernels = WalkKernels::compute(&trace.walk);
    let dual = walk_to_process(&trace.walk, &kernels)?;
    let expected = phi.scaled(&trace.c);
    report.record(IdentityEntry {
        identity: "labelling-recovered".into(),
        location: vec![],
        lhs: if dual.phi == expected { "C*phi".into() } else { "differs".into() },
        rhs: "C*phi".into(),
        pass: dual.phi == expected,
    });
    report.record(IdentityEntry {
        identity: "measure-recovered".into(),
        location: vec![],
        lhs: if dual.mu == *mu { "mu".into() } else { "differs".into() },
        rhs: "mu".into(),
        pass: dual.mu == *mu,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratio::rat;
    use proptest::prelude::*;

    #[test]
    fn b2_forward_direction() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let dual = walk_to_process(&walk, &kernels).unwrap();
        assert_eq!(dual.phi.radius(0), &rat(3, 2));
        assert_eq!(dual.phi.radius(1), &rat(1, 2));
        assert_eq!(dual.phi.radius(2), &rat(1, 2));
        for i in 0..4 {
            assert_eq!(dual.mu.mass_at(i), &rat(1, 4));
        }
        // telescoping of the inverse radii along the edge to a
        let lhs = rat(1, 1) / dual.phi.radius(1) - rat(1, 1) / dual.phi.radius(0);
        assert_eq!(lhs, rat(2, 1) - rat(2, 3));
    }

    #[test]
    fn b2_backward_direction() {
        let tree = fixtures::b2_tree();
        let phi = fixtures::b2_phi(&tree);
        let mu = BoundaryMeasure::uniform(&tree);
        let trace = process_to_walk(&tree, &phi, &mu).unwrap();
        assert_eq!(trace.c, rat(1, 1));
        assert_eq!(trace.walk, fixtures::b2_walk());
        assert_eq!(trace.green_diag[1], rat(5, 4));
        assert_eq!(trace.hit_down[3], rat(5, 12)); // F(a, l1)
        // doubling the radii halves the constant, same walk
        let trace2 = process_to_walk(&tree, &phi.scaled(&rat(2, 1)), &mu).unwrap();
        assert_eq!(trace2.c, rat(1, 2));
        assert_eq!(trace2.walk, fixtures::b2_walk());
    }

    #[test]
    fn backward_rejects_bad_inputs() {
        let tree = fixtures::b2_tree();
        let mu = BoundaryMeasure::uniform(&tree);
        // non-decreasing labelling is rejected at construction
        let mut vals = std::collections::BTreeMap::new();
        vals.insert(0, rat(1, 2));
        vals.insert(1, rat(1, 2));
        vals.insert(2, rat(1, 2));
        assert!(UltrametricElement::new(&tree, vals).is_err());
        // measure must be a fully supported probability vector
        assert!(BoundaryMeasure::new(&tree, vec![rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)])
            .is_err());
        assert!(BoundaryMeasure::new(&tree, vec![rat(1, 2); 4]).is_err());
        let _ = mu;
    }

    #[test]
    fn b2_naim_kernel_values() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        // confluent at the root
        assert_eq!(naim_kernel(&walk, &kernels, 0, 3, 5).unwrap(), rat(2, 3));
        // confluent at a
        assert_eq!(naim_kernel(&walk, &kernels, 0, 3, 4).unwrap(), rat(10, 3));
        // base a: confluent of l1, l3 with respect to a is a itself
        assert_eq!(naim_kernel(&walk, &kernels, 1, 3, 5).unwrap(), rat(6, 5));
        // diagonal rejected
        assert!(naim_kernel(&walk, &kernels, 0, 3, 3).is_err());
        // symmetry
        assert_eq!(
            naim_kernel(&walk, &kernels, 1, 5, 3).unwrap(),
            naim_kernel(&walk, &kernels, 1, 3, 5).unwrap()
        );
    }

    #[test]
    fn b2_hd_form_values() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let u = vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)];
        assert_eq!(hd_form(&kernels, &u, &u), rat(1, 6));
        let ones = vec![rat(1, 1); 4];
        assert_eq!(hd_form(&kernels, &ones, &u), rat(0, 1));
        // the two branch indicators are complementary, so the cross form
        // flips the sign
        let v = vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1)];
        assert_eq!(hd_form(&kernels, &u, &v), rat(-1, 6));
    }

    #[test]
    fn b2_doob_naim_full_basis() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let mut funcs = indicator_basis(walk.tree());
        let mut rng = Rng64::new(17);
        for k in 0..8 {
            funcs.push((format!("rand_{k}"), fixtures::random_leaf_function(&mut rng, 4)));
        }
        let report = check_doob_naim(&walk, &kernels, &funcs).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
    }

    #[test]
    fn b2_jump_equals_naim() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let report = check_jump_naim_equality(&walk, &kernels).unwrap();
        assert!(report.passed());
        assert_eq!(report.instances, 6); // unordered off-diagonal leaf pairs
    }

    #[test]
    fn b2_base_point_invariance() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let report = check_base_point_invariance(&walk, &kernels).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        // the worked pair-measure number at (l1, l3)
        let theta_a = naim_kernel(&walk, &kernels, 1, 3, 5).unwrap();
        let nu_a = kernels.absorption_vector(1);
        assert_eq!(theta_a * &nu_a[0] * &nu_a[2], rat(1, 24));
    }

    #[test]
    fn b2_roundtrips() {
        let walk = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&walk);
        let report = check_roundtrip(&walk, &kernels, 23).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        let tree = fixtures::b2_tree();
        let phi = fixtures::b2_phi(&tree);
        let mu = BoundaryMeasure::uniform(&tree);
        let report = check_phi_mu_roundtrip(&tree, &phi, &mu).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn star_tree_reconstruction() {
        // Root with only leaf children: the walk jumps straight to μ.
        let tree = Tree::regular(3, 1).unwrap();
        let phi = UltrametricElement::new(
            &tree,
            std::collections::BTreeMap::from([(0, rat(5, 1))]),
        )
        .unwrap();
        let mu = BoundaryMeasure::new(&tree, vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        let trace = process_to_walk(&tree, &phi, &mu).unwrap();
        assert_eq!(trace.c, rat(1, 5));
        assert_eq!(trace.walk.prob(0, 1), &rat(1, 2));
        assert_eq!(trace.walk.prob(0, 3), &rat(1, 6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_roundtrips(seed in 0u64..2048) {
            let mut rng = Rng64::new(seed);
            let (tree, phi) = fixtures::random_tree_with_phi(&mut rng, 3, 3);
            let walk = fixtures::random_walk(&mut rng, tree.clone());
            let kernels = WalkKernels::compute(&walk);
            let report = check_roundtrip(&walk, &kernels, seed).unwrap();
            prop_assert!(report.passed(), "{:?}", report.failures);
            // and from the (phi, mu) side with independent random data
            let mu = fixtures::random_measure(&mut rng, &tree);
            let report = check_phi_mu_roundtrip(&tree, &phi, &mu).unwrap();
            prop_assert!(report.passed(), "{:?}", report.failures);
        }
    }
}
