//! Acceptance suite: every criterion checked at its stated tolerance (exact
//! rational equality unless noted), over the canonical fixture and a shared
//! set of 100 seeded random instances (trees up to 200 vertices, random
//! rational walks). One PASS/FAIL line per criterion; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;
use std::time::Instant;

use treejump::boundary::{
    jump_kernel, jump_kernel_table, standardize, JumpProcessSpec, SigmaMeasure,
};
use treejump::duality::{
    check_base_point_invariance, check_doob_naim, check_doob_naim_pairs, check_jump_naim_equality,
    check_phi_mu_roundtrip, check_roundtrip, indicator_basis, naim_kernel, process_to_walk,
    walk_to_process,
};
use treejump::fixtures;
use treejump::linalg::{absorbing_oracle, hitting_oracle};
use treejump::ratio::{rat, rat_to_f64, Rat};
use treejump::simulate::{simulate_jump_chain, simulate_walk, Rng64, SimConfig};
use treejump::tree::{
    boundary_distance, isomorphic_with_radii, metric_of_tree, tree_from_ultrametric, Tree,
};
use treejump::walk::{check_kernel_identities, Walk, WalkKernels};

struct Instance {
    id: usize,
    walk: Walk,
    kernels: WalkKernels,
}

impl Instance {
    fn tree(&self) -> &Tree {
        self.walk.tree()
    }
}

/// The shared instance set: the fixture plus 100 seeded random instances,
/// sizes mostly small with a tail up to the 200-vertex cap.
fn instances() -> &'static Vec<Instance> {
    static SET: OnceLock<Vec<Instance>> = OnceLock::new();
    SET.get_or_init(|| {
        let mut out = Vec::new();
        let b2 = fixtures::b2_walk();
        let kernels = WalkKernels::compute(&b2);
        out.push(Instance { id: 0, walk: b2, kernels });
        let mut rng = Rng64::new(0xACCE97);
        for i in 1..=100 {
            let tree = match i % 25 {
                // a few mid-sized and four large instances near the cap
                24 => fixtures::random_tree_grown(&mut rng, 140 + (i / 2) % 55),
                12 => fixtures::random_tree_grown(&mut rng, 40 + i),
                _ => fixtures::random_tree(&mut rng, 3, 3),
            };
            assert!(tree.vertex_count() <= 200);
            let walk = fixtures::random_walk(&mut rng, tree);
            let kernels = WalkKernels::compute(&walk);
            out.push(Instance { id: i, walk, kernels });
        }
        out
    })
}

fn criterion(number: u32, name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {number} ({name}): PASS"),
        Err(msg) => {
            println!("criterion {number} ({name}): FAIL - {msg}");
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

#[test]
fn criterion_1_doob_naim() {
    criterion(1, "Doob-Naim formula, exact", || {
        let start = Instant::now();
        for inst in instances() {
            let mut funcs = indicator_basis(inst.tree());
            let mut rng = Rng64::new(0xD00B ^ inst.id as u64);
            for k in 0..20 {
                funcs.push((
                    format!("rand_{k}"),
                    fixtures::random_leaf_function(&mut rng, inst.tree().leaf_count()),
                ));
            }
            let report = if inst.id == 0 {
                // fixture: every unordered pair of the whole function set
                check_doob_naim(&inst.walk, &inst.kernels, &funcs)
            } else {
                // all quadratic-form pairs (which generate the bilinear
                // identity) plus sampled cross pairs
                let mut pairs: Vec<(usize, usize)> = (0..funcs.len()).map(|i| (i, i)).collect();
                for _ in 0..10 {
                    let i = (rng.next_u64() % funcs.len() as u64) as usize;
                    let j = (rng.next_u64() % funcs.len() as u64) as usize;
                    pairs.push((i.min(j), i.max(j)));
                }
                check_doob_naim_pairs(&inst.walk, &inst.kernels, &funcs, &pairs)
            }
            .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !report.passed() {
                return Err(format!(
                    "instance {}: {} failures, first: {:?}",
                    inst.id,
                    report.failures.len(),
                    report.failures.first()
                ));
            }
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs() >= 60 {
            return Err(format!("runtime {elapsed:?} exceeds the 60 s budget"));
        }
        println!("  doob-naim over {} instances in {elapsed:?}", instances().len());
        Ok(())
    });
}

#[test]
fn criterion_2_jump_kernel_equals_naim() {
    criterion(2, "jump kernel = Naim kernel, exact", || {
        // fixture spot values
        let b2 = &instances()[0];
        let dual = walk_to_process(&b2.walk, &b2.kernels).map_err(|e| e.to_string())?;
        let j_root = jump_kernel(b2.tree(), &dual.phi, &dual.mu, 3, 5).map_err(|e| e.to_string())?;
        if j_root != rat(2, 3) {
            return Err("fixture value at confluent root is not 2/3".into());
        }
        let j_branch =
            jump_kernel(b2.tree(), &dual.phi, &dual.mu, 3, 4).map_err(|e| e.to_string())?;
        if j_branch != rat(10, 3) {
            return Err("fixture value at confluent below root is not 10/3".into());
        }
        for inst in instances() {
            let report = check_jump_naim_equality(&inst.walk, &inst.kernels)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !report.passed() {
                return Err(format!("instance {}: {:?}", inst.id, report.failures.first()));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_3_reconstruction_roundtrips() {
    criterion(3, "walk/process reconstruction round trips, exact", || {
        for inst in instances() {
            let report = check_roundtrip(&inst.walk, &inst.kernels, 0x0401 ^ inst.id as u64)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !report.passed() {
                return Err(format!("instance {}: {:?}", inst.id, report.failures.first()));
            }
            // independent (phi, mu) inputs on the same tree
            let mut rng = Rng64::new(0x0402 ^ inst.id as u64);
            let phi = fixtures::random_phi(&mut rng, inst.tree());
            let mu = fixtures::random_measure(&mut rng, inst.tree());
            let report = check_phi_mu_roundtrip(inst.tree(), &phi, &mu)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !report.passed() {
                return Err(format!("instance {} (phi,mu): {:?}", inst.id, report.failures.first()));
            }
            // scaling the labelling divides the constant, same walk
            let c = fixtures::random_positive_rat(&mut rng, 12);
            let base = process_to_walk(inst.tree(), &phi, &mu)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            let scaled = process_to_walk(inst.tree(), &phi.scaled(&c), &mu)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if scaled.c != &base.c / &c || scaled.walk != base.walk {
                return Err(format!("instance {}: scaling by {c} not inverse-linear", inst.id));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_4_kernel_identities_and_oracle() {
    criterion(4, "kernel identity suite + dense oracle, exact", || {
        for inst in instances() {
            let entries = check_kernel_identities(&inst.walk, &inst.kernels);
            if let Some(bad) = entries.iter().find(|e| !e.pass) {
                return Err(format!("instance {}: {bad:?}", inst.id));
            }
            let oracle = absorbing_oracle(&inst.walk)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            let k = &inst.kernels;
            for (i, &x) in oracle.interior.iter().enumerate() {
                for (j, &y) in oracle.interior.iter().enumerate() {
                    // recursive Green kernel equals the fundamental matrix
                    if k.green(x, y) != oracle.green[(i, j)] {
                        return Err(format!("instance {}: G({x},{y}) mismatch", inst.id));
                    }
                    // m-reversibility across the full interior matrix
                    if k.weight(x) * &oracle.green[(i, j)] != k.weight(y) * &oracle.green[(j, i)] {
                        return Err(format!("instance {}: reversibility at ({x},{y})", inst.id));
                    }
                }
                // absorption matrix equals the atomic limit distributions
                let nu = k.absorption_vector(x);
                for (jl, mass) in nu.iter().enumerate() {
                    if *mass != oracle.absorption[(i, jl)] {
                        return Err(format!("instance {}: absorption at ({x},{jl})", inst.id));
                    }
                }
            }
            // independent first-step systems for sampled targets
            let mut targets = vec![inst.tree().root()];
            if inst.tree().vertex_count() <= 60 {
                targets.push(oracle.interior[oracle.interior.len() / 2]);
                targets.push(*inst.tree().leaves().last().unwrap());
            }
            for target in targets {
                let column = hitting_oracle(&inst.walk, target)
                    .map_err(|e| format!("instance {}: {e}", inst.id))?;
                for v in 0..inst.tree().vertex_count() {
                    if k.hit(v, target) != column[v] {
                        return Err(format!("instance {}: F({v},{target}) mismatch", inst.id));
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_5_base_point_invariance() {
    criterion(5, "base-point invariance + Martin kernel, exact", || {
        for inst in instances() {
            let report = check_base_point_invariance(&inst.walk, &inst.kernels)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !report.passed() {
                return Err(format!("instance {}: {:?}", inst.id, report.failures.first()));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_6_semigroup_properties() {
    criterion(6, "semigroup properties at 1e-12 / exact", || {
        for inst in instances() {
            let tree = inst.tree().clone();
            let mut rng = Rng64::new(0x5E6 ^ inst.id as u64);
            let phi = fixtures::random_phi(&mut rng, &tree);
            let mu = fixtures::random_measure(&mut rng, &tree);
            let sigma = fixtures::random_sigma(&mut rng, &tree, &phi);
            let mu_f: Vec<f64> = mu.masses().iter().map(rat_to_f64).collect();
            let spec = JumpProcessSpec::new(tree.clone(), phi.clone(), mu.clone(), sigma.clone())
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            // Markov rows, self-adjointness, semigroup law: 10 random pairs
            for _ in 0..10 {
                let s = 0.05 + 9.95 * rng.uniform();
                let t = 0.05 + 9.95 * rng.uniform();
                let ps = spec.transition_operator(s).map_err(|e| e.to_string())?;
                let pt = spec.transition_operator(t).map_err(|e| e.to_string())?;
                let pst = spec.transition_operator(s + t).map_err(|e| e.to_string())?;
                if ps.markov_defect() > 1e-12 || pt.markov_defect() > 1e-12 {
                    return Err(format!("instance {}: row sums off", inst.id));
                }
                if ps.self_adjoint_defect(&mu_f) > 1e-12 {
                    return Err(format!("instance {}: self-adjointness off", inst.id));
                }
                let defect = ps.mul(&pt).max_abs_diff(&pst);
                if defect > 1e-12 {
                    return Err(format!("instance {}: semigroup law defect {defect}", inst.id));
                }
            }
            // standardization invariance
            let star = standardize(&tree, &phi, &sigma).map_err(|e| e.to_string())?;
            let std_spec =
                JumpProcessSpec::new(tree.clone(), star, mu.clone(), SigmaMeasure::standard())
                    .map_err(|e| e.to_string())?;
            for t in [0.3, 1.0, 4.0] {
                let a = spec.transition_operator(t).map_err(|e| e.to_string())?;
                let b = std_spec.transition_operator(t).map_err(|e| e.to_string())?;
                if a.max_abs_diff(&b) > 1e-12 {
                    return Err(format!(
                        "instance {}: standardization differs by {}",
                        inst.id,
                        a.max_abs_diff(&b)
                    ));
                }
            }
            // sigma-insensitivity on the radius set: exact in rational mode.
            // Pad with entries off the radius set, monotone by construction:
            // below the smallest radius, between the first two, above the
            // diameter.
            let SigmaMeasure::Tabulated(mut entries) = sigma else { unreachable!() };
            let (r_min, v_min) = entries.first().cloned().unwrap();
            let (r_max, v_max) = entries.last().cloned().unwrap();
            let mut extra = vec![
                (&r_min / rat(2, 1), &v_min / rat(2, 1)),
                (&r_max * rat(2, 1), (&v_max + rat(1, 1)) / rat(2, 1)),
            ];
            if entries.len() >= 2 {
                let (r2, _) = entries[1].clone();
                extra.push(((&r_min + &r2) / rat(2, 1), v_min.clone()));
            }
            entries.extend(extra);
            let padded = SigmaMeasure::tabulated(entries).map_err(|e| e.to_string())?;
            let spec2 = JumpProcessSpec::new(tree, phi, mu, padded).map_err(|e| e.to_string())?;
            if spec.transition_operator_exact(1).map_err(|e| e.to_string())?
                != spec2.transition_operator_exact(1).map_err(|e| e.to_string())?
            {
                return Err(format!("instance {}: padded CDF changed the operator", inst.id));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_metric_tree_roundtrips() {
    criterion(7, "metric/tree round trips, exact", || {
        for inst in instances() {
            let mut rng = Rng64::new(0x707 ^ inst.id as u64);
            let phi = fixtures::random_phi(&mut rng, inst.tree());
            let space = metric_of_tree(inst.tree(), &phi)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            let mt = tree_from_ultrametric(&space)
                .map_err(|e| format!("instance {}: {e}", inst.id))?;
            if !isomorphic_with_radii(inst.tree(), &phi, &mt.tree, &mt.phi) {
                return Err(format!("instance {}: rebuilt tree not isomorphic", inst.id));
            }
            // the rebuilt boundary metric is the input matrix, exactly
            for (i, &li) in mt.point_leaf.iter().enumerate() {
                for (j, &lj) in mt.point_leaf.iter().enumerate() {
                    let d = boundary_distance(&mt.tree, &mt.phi, li, lj)
                        .map_err(|e| e.to_string())?;
                    if d != space.dist[i][j] {
                        return Err(format!("instance {}: metric differs at ({i},{j})", inst.id));
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_8_monte_carlo() {
    criterion(8, "Monte Carlo: absorption + jump chain, seeded", || {
        let start = Instant::now();
        let b2 = &instances()[0];
        let config = SimConfig { seed: 42, trials: 100_000, start: 0, max_steps: 100_000 };
        let stats =
            simulate_walk(&b2.walk, &b2.kernels, &config).map_err(|e| e.to_string())?;
        for (i, e) in stats.empirical.iter().enumerate() {
            if (e - 0.25).abs() > 0.006 {
                return Err(format!("leaf {i} frequency {e} off 1/4 by more than 0.006"));
            }
        }
        let again = simulate_walk(&b2.walk, &b2.kernels, &config).map_err(|e| e.to_string())?;
        if stats.counts != again.counts || stats.tv.to_bits() != again.tv.to_bits() {
            return Err("rerun under the same seed is not bit-identical".into());
        }
        // jump chain: one step from the first leaf, standard radius law
        let (spec, _) = fixtures::b2_standard_spec();
        let jconfig = SimConfig { seed: 7, trials: 100_000, start: 3, max_steps: 1 };
        let jstats = simulate_jump_chain(&spec, &jconfig, 1).map_err(|e| e.to_string())?;
        if jstats.tv > 0.01 {
            return Err(format!("one-step TV {} exceeds 0.01", jstats.tv));
        }
        let jagain = simulate_jump_chain(&spec, &jconfig, 1).map_err(|e| e.to_string())?;
        if jstats.counts != jagain.counts {
            return Err("jump-chain rerun is not bit-identical".into());
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs() >= 10 {
            return Err(format!("runtime {elapsed:?} exceeds the 10 s budget"));
        }
        println!("  monte carlo in {elapsed:?}");
        Ok(())
    });
}

#[test]
fn criterion_9_fixture_table() {
    criterion(9, "fixture value table: oracle first, then implementations", || {
        let walk = fixtures::b2_walk();
        // oracle route
        let oracle = absorbing_oracle(&walk).map_err(|e| e.to_string())?;
        let pos = |v: usize| oracle.interior_pos[v].unwrap();
        let to_root = hitting_oracle(&walk, 0).map_err(|e| e.to_string())?;
        let to_a = hitting_oracle(&walk, 1).map_err(|e| e.to_string())?;
        let table: Vec<(&str, Rat, Rat)> = vec![
            ("G(o,o)", oracle.green[(pos(0), pos(0))].clone(), rat(3, 2)),
            ("G(a,a)", oracle.green[(pos(1), pos(1))].clone(), rat(5, 4)),
            ("F(a,o)", to_root[1].clone(), rat(1, 3)),
            ("F(o,a)", to_a[0].clone(), rat(3, 5)),
            ("G(a,o)", oracle.green[(pos(1), pos(0))].clone(), rat(1, 2)),
        ];
        for (name, got, want) in &table {
            if got != want {
                return Err(format!("oracle {name} = {got}, expected {want}"));
            }
        }
        for j in 0..4 {
            if oracle.absorption[(pos(0), j)] != rat(1, 4) {
                return Err("oracle absorption row at the root is not uniform".into());
            }
        }
        // main implementations
        let k = WalkKernels::compute(&walk);
        if k.green_diag(0) != &rat(3, 2)
            || k.green_diag(1) != &rat(5, 4)
            || k.hit(1, 0) != rat(1, 3)
            || k.hit(0, 1) != rat(3, 5)
            || k.green(1, 0) != rat(1, 2)
            || k.weight(1) != &rat(3, 2)
        {
            return Err("kernel sweep values differ from the fixture table".into());
        }
        let nu = k.harmonic_measure(0).map_err(|e| e.to_string())?;
        if nu.masses().iter().any(|m| *m != rat(1, 4)) {
            return Err("limit distribution at the root is not uniform".into());
        }
        let dual = walk_to_process(&walk, &k).map_err(|e| e.to_string())?;
        let trace = process_to_walk(walk.tree(), &dual.phi, &dual.mu).map_err(|e| e.to_string())?;
        if !num_traits::One::is_one(&trace.c) {
            return Err(format!("reconstruction constant is {}, not 1", trace.c));
        }
        // Dirichlet form of the branch indicator, via both routes
        let u = vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)];
        let h = k.poisson_transform(&u);
        if k.dirichlet_form(&h, &h) != rat(1, 6) {
            return Err("tree Dirichlet form of the branch indicator is not 1/6".into());
        }
        let jk = jump_kernel_table(walk.tree(), &dual.phi, &dual.mu).map_err(|e| e.to_string())?;
        let b = treejump::boundary::boundary_dirichlet_form(&u, &u, &jk, &dual.mu);
        if b != rat(1, 6) {
            return Err("boundary Dirichlet form of the branch indicator is not 1/6".into());
        }
        // Naim kernel spot values
        if naim_kernel(&walk, &k, 0, 3, 5).map_err(|e| e.to_string())? != rat(2, 3)
            || naim_kernel(&walk, &k, 0, 3, 4).map_err(|e| e.to_string())? != rat(10, 3)
        {
            return Err("Naim kernel fixture values differ".into());
        }
        Ok(())
    });
}
