//! Isotropic jump processes on the leaf boundary: ball-averaging operators,
//! the Markov transition semigroup, standardization, the jump kernel, the
//! boundary Dirichlet form and the generator matrix.
//!
//! A process is specified by a radius labelling of the interior vertices, a
//! fully supported probability measure on the leaves, and a distribution of
//! jump radii given through its CDF. One transition step draws a radius and
//! lands measure-proportionally inside the ball of that radius around the
//! current point; the t-th semigroup power replaces the CDF by its t-th
//! power.
//!
//! Everything evaluated only at the tree's radius values is exact; real
//! powers of CDF values force binary64, so semigroup operators come in an
//! exact flavour (tabulated CDF, integer t) and a float flavour (anything).

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::ratio::{fmt_rat, rat_from_f64, rat_to_f64, Rat};
use crate::tree::{Tree, UltrametricElement, Vertex};
use crate::walk::{BoundaryMeasure, WalkKernels};
use crate::Result;

/// Distribution of jump radii, described by its CDF `F(r) = σ([0, r))`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaMeasure {
    /// The inverse exponential distribution, CDF `r ↦ e^{−1/r}`. Fixed
    /// point of standardization.
    Standard,
    /// A finite CDF table `(radius, value)`, strictly meaningful only at
    /// the radius values of the labelling it is used with; sorted by
    /// radius, values nondecreasing in [0, 1].
    Tabulated(Vec<(Rat, Rat)>),
}

impl SigmaMeasure {
    pub fn standard() -> SigmaMeasure {
        SigmaMeasure::Standard
    }

    /// Validate and sort a CDF table.
    pub fn tabulated(mut entries: Vec<(Rat, Rat)>) -> Result<SigmaMeasure> {
        if entries.is_empty() {
            return Err(Error::InvalidSigma("empty CDF table".into()));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 != pair[1].1 {
                return Err(Error::InvalidSigma(format!(
                    "conflicting CDF values at radius {}",
                    fmt_rat(&pair[0].0)
                )));
            }
            if pair[0].1 > pair[1].1 {
                return Err(Error::InvalidSigma(format!(
                    "CDF decreases between radii {} and {}",
                    fmt_rat(&pair[0].0),
                    fmt_rat(&pair[1].0)
                )));
            }
        }
        entries.dedup();
        for (r, v) in &entries {
            if *r <= Rat::zero() {
                return Err(Error::InvalidSigma(format!("non-positive radius {}", fmt_rat(r))));
            }
            if *v < Rat::zero() || *v > Rat::one() {
                return Err(Error::InvalidSigma(format!(
                    "CDF value {} outside [0, 1]",
                    fmt_rat(v)
                )));
            }
        }
        Ok(SigmaMeasure::Tabulated(entries))
    }

    /// Exact CDF value at a radius: table lookup for Tabulated (the table
    /// must contain the radius), undefined for Standard.
    pub fn cdf_exact(&self, r: &Rat) -> Result<Rat> {
        match self {
            SigmaMeasure::Standard => Err(Error::InvalidSigma(
                "the standard CDF e^{-1/r} has no exact rational values".into(),
            )),
            SigmaMeasure::Tabulated(entries) => entries
                .iter()
                .find(|(t, _)| t == r)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| {
                    Error::InvalidSigma(format!("no CDF entry at radius {}", fmt_rat(r)))
                }),
        }
    }

    /// CDF value at a radius in binary64.
    pub fn cdf_f64(&self, r: &Rat) -> Result<f64> {
        match self {
            SigmaMeasure::Standard => Ok((-1.0 / rat_to_f64(r)).exp()),
            SigmaMeasure::Tabulated(_) => self.cdf_exact(r).map(|v| rat_to_f64(&v)),
        }
    }

    /// Check compatibility with a radius labelling: every interior radius
    /// has a CDF value, the value at the diameter is < 1, and the CDF is
    /// strictly increasing across every interior parent-child radius pair
    /// (so it is strictly increasing on each root-to-leaf radius set).
    pub fn validate_for(&self, tree: &Tree, phi: &UltrametricElement) -> Result<()> {
        if let SigmaMeasure::Standard = self {
            return Ok(()); // e^{-1/r} is strictly increasing and < 1
        }
        let diam = phi.diameter(tree);
        let at_diam = self.cdf_exact(diam)?;
        if at_diam >= Rat::one() {
            return Err(Error::InvalidSigma(format!(
                "CDF at the diameter {} is {} >= 1; the process could never leave a branch",
                fmt_rat(diam),
                fmt_rat(&at_diam)
            )));
        }
        for v in tree.interior_vertices() {
            let fv = self.cdf_exact(phi.radius(v))?;
            if let Some(p) = tree.parent(v) {
                if tree.is_interior(p) {
                    let fp = self.cdf_exact(phi.radius(p))?;
                    if fv >= fp {
                        return Err(Error::InvalidSigma(format!(
                            "CDF not strictly increasing across radii {} (vertex {v}) and {} (vertex {p})",
                            fmt_rat(phi.radius(v)),
                            fmt_rat(phi.radius(p)),
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Dense operator on boundary functions, indexed by the tree's leaf order.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafMatrix<T> {
    pub leaves: Vec<Vertex>,
    rows: Vec<Vec<T>>,
}

impl<T: Clone> LeafMatrix<T> {
    pub fn from_rows(leaves: Vec<Vertex>, rows: Vec<Vec<T>>) -> LeafMatrix<T> {
        assert!(rows.iter().all(|r| r.len() == leaves.len()));
        assert_eq!(rows.len(), leaves.len());
        LeafMatrix { leaves, rows }
    }

    pub fn dim(&self) -> usize {
        self.leaves.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }
}

impl LeafMatrix<f64> {
    pub fn mul(&self, other: &LeafMatrix<f64>) -> LeafMatrix<f64> {
        let n = self.dim();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let a = self.rows[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    rows[i][j] += a * other.rows[k][j];
                }
            }
        }
        LeafMatrix { leaves: self.leaves.clone(), rows }
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &LeafMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (ra, rb) in self.rows.iter().zip(other.rows.iter()) {
            for (a, b) in ra.iter().zip(rb.iter()) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    /// Largest deviation of a row sum from 1.
    pub fn markov_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from μ-self-adjointness: μ(ξ)M[ξ,η] − μ(η)M[η,ξ].
    pub fn self_adjoint_defect(&self, mu: &[f64]) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((mu[i] * self.rows[i][j] - mu[j] * self.rows[j][i]).abs());
            }
        }
        worst
    }
}

impl LeafMatrix<Rat> {
    /// Exact matrix product.
    pub fn mul_exact(&self, other: &LeafMatrix<Rat>) -> LeafMatrix<Rat> {
        let n = self.dim();
        let mut rows = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.rows[k][j];
                    if !b.is_zero() {
                        rows[i][j] += a * b;
                    }
                }
            }
        }
        LeafMatrix { leaves: self.leaves.clone(), rows }
    }

    /// Exact conversion to binary64 entries.
    pub fn to_f64(&self) -> LeafMatrix<f64> {
        LeafMatrix {
            leaves: self.leaves.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(rat_to_f64).collect()).collect(),
        }
    }

    /// Exact check that every row sums to 1.
    pub fn is_markov(&self) -> bool {
        self.rows.iter().all(|r| r.iter().sum::<Rat>().is_one())
    }

    /// Exact μ-self-adjointness.
    pub fn is_self_adjoint(&self, mu: &BoundaryMeasure) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if mu.mass_at(i) * &self.rows[i][j] != mu.mass_at(j) * &self.rows[j][i] {
                    return false;
                }
            }
        }
        true
    }
}

/// Average of a boundary function over the ball of radius `r` around each
/// leaf: the row at ξ is the measure conditioned on ball(ξ, r). Exact.
pub fn averaging_operator(
    tree: &Tree,
    phi: &UltrametricElement,
    mu: &BoundaryMeasure,
    r: &Rat,
) -> Result<LeafMatrix<Rat>> {
    let leaves = tree.leaves().to_vec();
    let n = leaves.len();
    let mut rows = vec![vec![Rat::zero(); n]; n];
    for (i, &xi) in leaves.iter().enumerate() {
        let b = crate::tree::ball(tree, phi, xi, r)?;
        let (lo, hi) = tree.leaf_range(b);
        let mass = mu.branch_mass(tree, b);
        for j in lo..hi {
            rows[i][j] = mu.mass_at(j) / &mass;
        }
    }
    Ok(LeafMatrix::from_rows(leaves, rows))
}

/// A validated isotropic jump process: tree, radius labelling, fully
/// supported leaf measure, radius distribution compatible with the
/// labelling. Immutable.
#[derive(Debug, Clone)]
pub struct JumpProcessSpec {
    tree: Tree,
    phi: UltrametricElement,
    mu: BoundaryMeasure,
    sigma: SigmaMeasure,
    /// Binary64 CDF values at each interior radius, cached.
    cdf: Vec<Option<f64>>,
}

impl JumpProcessSpec {
    pub fn new(
        tree: Tree,
        phi: UltrametricElement,
        mu: BoundaryMeasure,
        sigma: SigmaMeasure,
    ) -> Result<JumpProcessSpec> {
        sigma.validate_for(&tree, &phi)?;
        Self::assemble(tree, phi, mu, sigma)
    }

    /// Like [`JumpProcessSpec::new`] but without the strict-increase part of
    /// the CDF validation: a flat CDF only means some ball levels are never
    /// drawn, and the operator stays Markov and self-adjoint as long as the
    /// value at the diameter is below 1. Degenerate distributions such as
    /// "all mass above the diameter" (every jump averages over the whole
    /// boundary) are legitimate simulation inputs.
    pub fn new_relaxed(
        tree: Tree,
        phi: UltrametricElement,
        mu: BoundaryMeasure,
        sigma: SigmaMeasure,
    ) -> Result<JumpProcessSpec> {
        if let SigmaMeasure::Tabulated(_) = &sigma {
            let at_diam = sigma.cdf_exact(phi.diameter(&tree))?;
            if at_diam >= Rat::one() {
                return Err(Error::InvalidSigma(format!(
                    "CDF at the diameter is {} >= 1",
                    fmt_rat(&at_diam)
                )));
            }
        }
        Self::assemble(tree, phi, mu, sigma)
    }

    fn assemble(
        tree: Tree,
        phi: UltrametricElement,
        mu: BoundaryMeasure,
        sigma: SigmaMeasure,
    ) -> Result<JumpProcessSpec> {
        let mut cdf = vec![None; tree.vertex_count()];
        for v in tree.interior_vertices() {
            cdf[v] = Some(sigma.cdf_f64(phi.radius(v))?);
        }
        Ok(JumpProcessSpec { tree, phi, mu, sigma, cdf })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn radius_labelling(&self) -> &UltrametricElement {
        &self.phi
    }

    pub fn measure(&self) -> &BoundaryMeasure {
        &self.mu
    }

    pub fn sigma(&self) -> &SigmaMeasure {
        &self.sigma
    }

    /// Binary64 CDF value at the radius of an interior vertex.
    pub fn cdf_at(&self, v: Vertex) -> f64 {
        self.cdf[v].expect("CDF cached for interior vertices")
    }

    /// The t-th semigroup operator in binary64, assembled row by row from
    /// the telescoping CDF-power coefficients along each leaf's root path:
    /// with interior path x_0 … x_{k−1} above leaf ξ,
    ///
    /// * `1 − F(φ(x_0))^t` multiplies the average over the whole boundary,
    /// * `F(φ(x_{n−1}))^t − F(φ(x_n))^t` the average over the branch at x_n,
    /// * `F(φ(x_{k−1}))^t` the atom at ξ.
    pub fn transition_operator(&self, t: f64) -> Result<LeafMatrix<f64>> {
        if t <= 0.0 {
            return Err(Error::InvalidInput(format!("semigroup time {t} must be positive")));
        }
        let tree = &self.tree;
        let leaves = tree.leaves().to_vec();
        let n = leaves.len();
        let mu: Vec<f64> = (0..n).map(|i| rat_to_f64(self.mu.mass_at(i))).collect();
        let branch_mass = |v: Vertex| -> f64 {
            let (lo, hi) = tree.leaf_range(v);
            mu[lo..hi].iter().sum()
        };
        let mut rows = vec![vec![0.0; n]; n];
        for (i, &xi) in leaves.iter().enumerate() {
            let mut path = tree.path_from_root(xi);
            path.pop(); // interior prefix
            // Whole-boundary term.
            let f_root = self.cdf_at(path[0]).powf(t);
            for j in 0..n {
                rows[i][j] += (1.0 - f_root) * mu[j];
            }
            // Branch terms below the root.
            for w in path.windows(2) {
                let (upper, lower) = (w[0], w[1]);
                let c = self.cdf_at(upper).powf(t) - self.cdf_at(lower).powf(t);
                let (lo, hi) = tree.leaf_range(lower);
                let mass = branch_mass(lower);
                for j in lo..hi {
                    rows[i][j] += c * mu[j] / mass;
                }
            }
            // Atom.
            let last = *path.last().expect("root path has an interior prefix");
            rows[i][i] += self.cdf_at(last).powf(t);
        }
        Ok(LeafMatrix::from_rows(leaves, rows))
    }

    /// Exact semigroup operator for integer t; requires a tabulated CDF so
    /// the coefficients stay rational. t = 1 is the one-step operator.
    pub fn transition_operator_exact(&self, t: u32) -> Result<LeafMatrix<Rat>> {
        if t < 1 {
            return Err(Error::InvalidInput("exact semigroup time must be >= 1".into()));
        }
        let tree = &self.tree;
        let leaves = tree.leaves().to_vec();
        let n = leaves.len();
        let powt = |r: &Rat| -> Rat {
            let mut acc = Rat::one();
            for _ in 0..t {
                acc *= r;
            }
            acc
        };
        let mut rows = vec![vec![Rat::zero(); n]; n];
        for (i, &xi) in leaves.iter().enumerate() {
            let mut path = tree.path_from_root(xi);
            path.pop();
            let f_root = powt(&self.sigma.cdf_exact(self.phi.radius(path[0]))?);
            for j in 0..n {
                rows[i][j] += (Rat::one() - &f_root) * self.mu.mass_at(j);
            }
            for w in path.windows(2) {
                let (upper, lower) = (w[0], w[1]);
                let c = powt(&self.sigma.cdf_exact(self.phi.radius(upper))?)
                    - powt(&self.sigma.cdf_exact(self.phi.radius(lower))?);
                let (lo, hi) = tree.leaf_range(lower);
                let mass = self.mu.branch_mass(tree, lower);
                for j in lo..hi {
                    rows[i][j] += &c * self.mu.mass_at(j) / &mass;
                }
            }
            let last = *path.last().unwrap();
            let atom = powt(&self.sigma.cdf_exact(self.phi.radius(last))?);
            rows[i][i] += atom;
        }
        Ok(LeafMatrix::from_rows(leaves, rows))
    }
}

/// The radius labelling that turns a (phi, mu, sigma) process into the
/// standard process with the same measure: `φ*(x) = −1 / log F_σ(φ(x))`.
///
/// The standard sigma is the exact fixed point and returns `phi` unchanged.
/// For a tabulated sigma the logarithm forces binary64; each value is
/// stored as the exact rational of its f64, so the resulting operators
/// agree with the originals to f64 rounding. Rejected when any interior
/// CDF value is 0 or 1 (the logarithm degenerates).
pub fn standardize(
    tree: &Tree,
    phi: &UltrametricElement,
    sigma: &SigmaMeasure,
) -> Result<UltrametricElement> {
    match sigma {
        SigmaMeasure::Standard => Ok(phi.clone()),
        SigmaMeasure::Tabulated(_) => {
            let mut values = std::collections::BTreeMap::new();
            for v in tree.interior_vertices() {
                let f = sigma.cdf_exact(phi.radius(v))?;
                if f.is_zero() || f.is_one() {
                    return Err(Error::InvalidSigma(format!(
                        "CDF value at vertex {v} is {}; standardization needs 0 < F < 1",
                        fmt_rat(&f)
                    )));
                }
                let star = -1.0 / rat_to_f64(&f).ln();
                values.insert(v, rat_from_f64(star)?);
            }
            UltrametricElement::new(tree, values)
        }
    }
}

/// Find the sigma that realises a walk's boundary process on a prescribed
/// radius labelling: a CDF table with `F(φ(x)) = e^{−1/G(x, root)}`.
///
/// Requires the labelling to be constant on Green-equipotential sets and
/// ordered compatibly with the Green values; either violation is reported
/// with the offending vertex pair.
pub fn sigma_for_phi(
    tree: &Tree,
    phi_target: &UltrametricElement,
    kernels: &WalkKernels,
) -> Result<SigmaMeasure> {
    let root = tree.root();
    let interior: Vec<Vertex> = tree.interior_vertices().collect();
    let greens: Vec<Rat> = interior.iter().map(|&v| kernels.green(v, root)).collect();
    for (i, &x) in interior.iter().enumerate() {
        for (j, &y) in interior.iter().enumerate().skip(i + 1) {
            let (px, py) = (phi_target.radius(x), phi_target.radius(y));
            let (gx, gy) = (&greens[i], &greens[j]);
            if gx == gy && px != py {
                return Err(Error::InvalidInput(format!(
                    "vertices {x} and {y} are Green-equipotential but carry different radii"
                )));
            }
            if px == py && gx != gy {
                return Err(Error::InvalidInput(format!(
                    "vertices {x} and {y} share a radius but have different Green values"
                )));
            }
            if (px < py) != (gx < gy) && px != py {
                return Err(Error::InvalidInput(format!(
                    "radius ordering of vertices {x} and {y} is incompatible with their Green values (the CDF would not be monotone)"
                )));
            }
        }
    }
    let mut entries: Vec<(Rat, Rat)> = Vec::with_capacity(interior.len());
    for (i, &v) in interior.iter().enumerate() {
        let f = (-1.0 / rat_to_f64(&greens[i])).exp();
        entries.push((phi_target.radius(v).clone(), rat_from_f64(f)?));
    }
    let sigma = SigmaMeasure::tabulated(entries)?;
    sigma.validate_for(tree, phi_target)?;
    Ok(sigma)
}

/// Off-diagonal jump-kernel values of the standard process, as exact path
/// sums. The diagonal is absent by construction; every consumer skips it.
#[derive(Debug, Clone)]
pub struct JumpKernelTable {
    values: Vec<Vec<Option<Rat>>>,
}

impl JumpKernelTable {
    /// Value at a pair of leaf indices; None exactly on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<&Rat> {
        self.values[i][j].as_ref()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Jump kernel of the standard (phi, mu) process between two distinct
/// leaves: the integral of `1/μ(ball(ξ, 1/t))` over `t` in
/// `[0, 1/d(ξ,η)]`, which the ball structure makes a finite sum,
///
/// `J(ξ,η) = 1/φ(root) + Σ (1/φ(x) − 1/φ(x⁻)) / μ(∂T_x)`
///
/// over the vertices x strictly below the root on the path from the root to
/// the confluent ξ∧η (inclusive). Exact and symmetric.
pub fn jump_kernel(
    tree: &Tree,
    phi: &UltrametricElement,
    mu: &BoundaryMeasure,
    xi: Vertex,
    eta: Vertex,
) -> Result<Rat> {
    if xi == eta {
        return Err(Error::InvalidInput(
            "jump kernel diagonal is +infinity and never evaluated".into(),
        ));
    }
    if !tree.is_leaf(xi) || !tree.is_leaf(eta) {
        return Err(Error::InvalidInput("jump kernel takes two leaves".into()));
    }
    let confluent = tree.meet(xi, eta);
    let mut acc = Rat::one() / phi.diameter(tree);
    for &x in tree.path_from_root(confluent).iter().skip(1) {
        let inv_here = Rat::one() / phi.radius(x);
        let inv_parent = Rat::one() / phi.radius(tree.parent(x).unwrap());
        acc += (inv_here - inv_parent) / mu.branch_mass(tree, x);
    }
    Ok(acc)
}

/// All off-diagonal jump-kernel values.
pub fn jump_kernel_table(
    tree: &Tree,
    phi: &UltrametricElement,
    mu: &BoundaryMeasure,
) -> Result<JumpKernelTable> {
    let leaves = tree.leaves();
    let n = leaves.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = jump_kernel(tree, phi, mu, leaves[i], leaves[j])?;
            values[i][j] = Some(v.clone());
            values[j][i] = Some(v);
        }
    }
    Ok(JumpKernelTable { values })
}

/// The boundary Dirichlet form: half the double sum over ordered distinct
/// leaf pairs of `(u(ξ)−u(η))(v(ξ)−v(η)) J(ξ,η) μ(ξ) μ(η)`. Exact;
/// functions are indexed by leaf order.
pub fn boundary_dirichlet_form(
    u: &[Rat],
    v: &[Rat],
    jk: &JumpKernelTable,
    mu: &BoundaryMeasure,
) -> Rat {
    let n = jk.dim();
    assert_eq!(u.len(), n);
    assert_eq!(v.len(), n);
    let mut acc = Rat::zero();
    // Sum over unordered pairs; the ordered double sum halved is the same.
    for i in 0..n {
        for j in 0..i {
            let du = &u[i] - &u[j];
            if du.is_zero() {
                continue;
            }
            let dv = &v[i] - &v[j];
            if dv.is_zero() {
                continue;
            }
            let jij = jk.get(i, j).expect("off-diagonal");
            acc += du * dv * jij * mu.mass_at(i) * mu.mass_at(j);
        }
    }
    acc
}

/// The generator matrix: `Λ[ξ,η] = −J(ξ,η) μ(η)` off the diagonal and row
/// sums zero, so that `Λu(ξ) = Σ_{η≠ξ} (u(ξ)−u(η)) J(ξ,η) μ(η)`. Exact,
/// μ-self-adjoint, and `Σ_ξ u(ξ)(Λu)(ξ)μ(ξ)` is the Dirichlet form.
pub fn generator_matrix(tree: &Tree, jk: &JumpKernelTable, mu: &BoundaryMeasure) -> LeafMatrix<Rat> {
    let n = jk.dim();
    let mut rows = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let mut diag = Rat::zero();
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = jk.get(i, j).expect("off-diagonal") * mu.mass_at(j);
            diag += &v;
            rows[i][j] = -v;
        }
        rows[i][i] = diag;
    }
    LeafMatrix::from_rows(tree.leaves().to_vec(), rows)
}

/// `exp(−t Λ)` by scaling and squaring with a truncated series; used only
/// by the generator diagnostic, which reports a residual without pass/fail
/// semantics.
pub fn exp_neg_generator(gen: &LeafMatrix<Rat>, t: f64) -> LeafMatrix<f64> {
    let n = gen.dim();
    let a = gen.to_f64();
    // scale so the scaled norm is comfortably below 1
    let norm: f64 = a
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * t / scale > 0.5 {
        squarings += 1;
        scale *= 2.0;
    }
    let step = -t / scale;
    // truncated Taylor series of exp(step * A)
    let mut result: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = result.clone();
    for k in 1..=24u32 {
        // term <- term * (step/k) * A
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                let v = term[i][l] * step / k as f64;
                if v == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += v * a.rows()[l][j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += next[i][j];
            }
        }
        term = next;
    }
    let mut m = LeafMatrix::from_rows(gen.leaves.clone(), result);
    for _ in 0..squarings {
        m = m.mul(&m);
    }
    m
}
