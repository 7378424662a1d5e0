//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use hilmod_core::duality::DualElement;
use hilmod_core::fredholm::{index_via_kernels, k0_class};
use hilmod_core::operator::{image, kernel};
use hilmod_core::scenarios::{
    build_counterexample, counterexample_diagnostics, random_scenario, run_scenario,
};
use hilmod_core::{
    AdjointableOperator, AlgebraElement, AlgebraShape, ComplexMatrix, HilbertModule, MatrixOverA,
    Report, ScenarioKind, Tolerances, C64,
};
use hilmod_core::module::inner;
use nalgebra::DMatrix;

const SHAPES: [&[usize]; 5] = [&[1], &[2], &[1, 2], &[1, 1, 1], &[2, 3]];

fn shape(i: usize) -> AlgebraShape {
    AlgebraShape::new(SHAPES[i % SHAPES.len()].to_vec()).unwrap()
}

/// Outcome of one criterion: a summary line, or the reasons it failed.
type Verdict = Result<String, String>;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn require(failures: Vec<String>, summary: String) -> Verdict {
    if failures.is_empty() {
        Ok(summary)
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Err(format!("{} failure(s): {}", failures.len(), shown.join("; ")))
    }
}

fn residual(r: &Report, key: &str) -> f64 {
    r.residuals.get(key).copied().unwrap_or(f64::NAN)
}

/// Runs `samples` instances per shape and checks the named residuals.
fn suite(kind: ScenarioKind, samples: usize, bounds: &[(&str, f64)]) -> Verdict {
    let mut failures = Vec::new();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for (i, dims) in SHAPES.iter().enumerate() {
        let mut s = random_scenario(kind, 1000 + i as u64, &shape(i), &[]);
        s.samples = samples;
        let r = run_scenario(&s).unwrap();
        for flag in &r.flags {
            failures.push(format!("shape {dims:?}: {flag}"));
        }
        for &(key, bound) in bounds {
            let v = residual(&r, key);
            let w = worst.entry(key).or_insert(0.0);
            *w = w.max(v);
            if v.is_nan() || v > bound {
                failures.push(format!("shape {dims:?}: {key} = {v:e} > {bound:e}"));
            }
        }
    }
    let summary = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    require(failures, format!("{samples} samples x {} shapes; worst {summary}", SHAPES.len()))
}

/// Index scenarios over the shape list with source/target ranks in `2..=4`,
/// so every instance has room for two separated singular values.
fn index_reports() -> Vec<Report> {
    (0..100u64)
        .map(|seed| {
            let dims = [2 + (seed % 3) as usize, 2 + ((seed / 5) % 3) as usize];
            run_scenario(&random_scenario(
                ScenarioKind::IndexCrossCheck,
                seed,
                &shape(seed as usize),
                &dims,
            ))
            .unwrap()
        })
        .collect()
}

fn index_agreement(reports: &[Report]) -> Verdict {
    let mut failures = Vec::new();
    for r in reports {
        if r.index_decomp.is_none() || r.index_decomp != r.index_kernels {
            failures.push(format!(
                "seed {}: decomposition {:?} vs kernels {:?}",
                r.seed, r.index_decomp, r.index_kernels
            ));
        }
        for flag in r.flags.iter().filter(|f| f.contains("ToleranceAmbiguity")) {
            failures.push(format!("seed {}: {flag}", r.seed));
        }
    }
    require(failures, format!("{} operators, indices equal, no ambiguity flags", reports.len()))
}

fn decomposition_independence(reports: &[Report]) -> Verdict {
    let mut failures = Vec::new();
    let mut total = 0.0;
    for r in reports {
        let count = r.values.get("alternative_decompositions").copied().unwrap_or(0.0);
        total += count;
        if count < 3.0 {
            failures.push(format!("seed {}: only {count} alternative thresholds", r.seed));
        }
        for key in ["alternative.invalid", "alternative.index_gap"] {
            if residual(r, key) != 0.0 {
                failures.push(format!("seed {}: {key} = {}", r.seed, residual(r, key)));
            }
        }
    }
    require(
        failures,
        format!("{total} alternative decompositions, all valid with index [M] - [N]"),
    )
}

fn counterexample_divergence() -> Verdict {
    let tol = Tolerances::default();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for n in [2usize, 4, 8, 16, 32, 64] {
        let d = counterexample_diagnostics(&build_counterexample(n).unwrap(), &tol).unwrap();
        let norm_error = (d.inv_sqrt_norm - n as f64).abs();
        if norm_error > 1e-9 * n as f64 {
            failures.push(format!("n = {n}: |norm - n| = {norm_error:e}"));
        }
        if d.tail_norms.len() != n {
            failures.push(format!("n = {n}: {} tail norms", d.tail_norms.len()));
        }
        let tail_error = d.tail_norms.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
        if tail_error > 1e-10 {
            failures.push(format!("n = {n}: tail error {tail_error:e}"));
        }
        rows.push(format!("{n}->{:.9}", d.inv_sqrt_norm));
    }
    require(failures, format!("norms {}", rows.join(" ")))
}

// Independent oracle: flatten everything to complex matrices and recompute
// with nalgebra's SVD and Hermitian eigensolver.

type Dense = DMatrix<C64>;

fn dense(m: &ComplexMatrix) -> Dense {
    Dense::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn flat_a(a: &AlgebraElement) -> Dense {
    dense(&a.to_faithful())
}

fn flat_m(m: &MatrixOverA) -> Dense {
    dense(&m.to_faithful())
}

fn gap(a: &Dense, b: &Dense) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).norm()
}

fn spectral(m: &Dense) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Moore-Penrose inverse dropping singular values below `rel · σ_max`.
fn pinv(m: &Dense, rel: f64) -> Dense {
    let cutoff = rel * spectral(m);
    m.clone().svd(true, true).pseudo_inverse(cutoff.max(f64::MIN_POSITIVE)).unwrap()
}


fn psd_function(m: &Dense, f: impl Fn(f64) -> f64) -> Dense {
    let e = m.clone().symmetric_eigen();
    let d = Dense::from_diagonal(&e.eigenvalues.map(|l| C64::new(f(l), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// `I_k ⊗ e_i`: restriction to the `i`-th summand on `A^k`.
fn summand(shape: &AlgebraShape, k: usize, i: usize) -> Dense {
    let e = flat_a(&AlgebraElement::block_unit(shape, i));
    let d = e.nrows();
    let mut out = Dense::zeros(k * d, k * d);
    for j in 0..k {
        out.view_mut((j * d, j * d), (d, d)).copy_from(&e);
    }
    out
}

/// Block ranks of a projection: its singular values are 0 or 1.
fn k0_oracle(p: &Dense, shape: &AlgebraShape, k: usize) -> Vec<i64> {
    (0..shape.num_blocks())
        .map(|i| {
            let restricted = p * summand(shape, k, i);
            restricted.singular_values().iter().filter(|&&x| x > 0.5).count() as i64
        })
        .collect()
}

/// Largest disagreement between the library and the oracle on one instance.
fn oracle_instance(seed: u64) -> f64 {
    let tol = Tolerances::default();
    let sh = shape(seed as usize);
    let s = seed * 16;
    let mut errors: Vec<f64> = Vec::new();

    // Algebra arithmetic and functional calculus.
    let a = AlgebraElement::random(&sh, s);
    let b = AlgebraElement::random(&sh, s + 1);
    let (fa, fb) = (flat_a(&a), flat_a(&b));
    errors.push(gap(&flat_a(&a.mul(&b).unwrap()), &(&fa * &fb)));
    errors.push(gap(&flat_a(&a.add(&b).unwrap()), &(&fa + &fb)));
    errors.push(gap(&flat_a(&a.adjoint()), &fa.adjoint()));
    errors.push((a.norm() - spectral(&fa)).abs());
    let pos = a.adjoint().mul(&a).unwrap().add(&AlgebraElement::one(&sh)).unwrap();
    let fpos = flat_a(&pos);
    errors.push(gap(&flat_a(&pos.sqrt_pos(&tol).unwrap()), &psd_function(&fpos, f64::sqrt)));
    errors.push(gap(&flat_a(&pos.pinv_pos(&tol).unwrap()), &pinv(&fpos, tol.rank_rel)));

    // Matrices over A.
    let x = MatrixOverA::random(&sh, 3, 2, s + 2);
    let y = MatrixOverA::random(&sh, 2, 4, s + 3);
    let (fx, fy) = (flat_m(&x), flat_m(&y));
    errors.push(gap(&flat_m(&x.mul(&y).unwrap()), &(&fx * &fy)));
    errors.push(gap(&flat_m(&x.adjoint()), &fx.adjoint()));
    errors.push((x.norm() - spectral(&fx)).abs());
    let mut right = Dense::zeros(fx.ncols(), fx.ncols());
    let d = fa.nrows();
    for j in 0..2 {
        right.view_mut((j * d, j * d), (d, d)).copy_from(&fa);
    }
    errors.push(gap(&flat_m(&x.mul_right(&a).unwrap()), &(&fx * right)));

    // Modules: projections, inner products, norms, K0 classes.
    let (ks, kt) = (3, 2);
    let m = HilbertModule::random(&sh, ks, s + 4);
    let n = HilbertModule::random(&sh, kt, s + 5);
    let (pm, pn) = (flat_m(m.projection()), flat_m(n.projection()));
    errors.push(gap(&(&pm * &pm), &pm));
    errors.push(gap(&pm.adjoint(), &pm));
    let k0 = k0_class(&m, &tol).unwrap();
    if k0.ranks() != k0_oracle(&pm, &sh, ks).as_slice() {
        errors.push(f64::INFINITY);
    }
    let u = m.project(&MatrixOverA::random(&sh, ks, 1, s + 6)).unwrap();
    let v = m.project(&MatrixOverA::random(&sh, ks, 1, s + 7)).unwrap();
    let (fu, fv) = (flat_m(u.vec()), flat_m(v.vec()));
    errors.push(gap(&fu, &(&pm * flat_m(&MatrixOverA::random(&sh, ks, 1, s + 6)))));
    errors.push(gap(&flat_a(&inner(&u, &v).unwrap()), &(fu.adjoint() * &fv)));
    errors.push((u.norm() - spectral(&fu)).abs());

    // Functionals through their Riesz vectors.
    let f = DualElement::from_riesz(v.clone());
    errors.push(gap(&flat_a(&f.eval(&u).unwrap()), &(fu.adjoint() * &fv)));
    errors.push((f.op_norm().unwrap() - spectral(&fv)).abs());

    // Operators, kernels, images and the index.
    let t = AdjointableOperator::new(&m, &n, MatrixOverA::random(&sh, kt, ks, s + 8)).unwrap();
    let ft = flat_m(t.matrix());
    errors.push(gap(&ft, &(&pn * flat_m(&MatrixOverA::random(&sh, kt, ks, s + 8)) * &pm)));
    errors.push(gap(&flat_m(t.apply(&u).unwrap().vec()), &(&ft * &fu)));
    errors.push(gap(&flat_m(t.adjoint().matrix()), &ft.adjoint()));
    errors.push((t.norm() - spectral(&ft)).abs());
    let back = AdjointableOperator::new(&n, &m, MatrixOverA::random(&sh, ks, kt, s + 9)).unwrap();
    errors.push(gap(&flat_m(back.compose(&t).unwrap().matrix()), &(flat_m(back.matrix()) * &ft)));
    let ft_pinv = pinv(&ft, tol.rank_rel);
    let ker = &pm - &ft_pinv * &ft;
    let coker = &pn - &ft * &ft_pinv;
    errors.push(gap(&flat_m(kernel(&t, &tol).unwrap().projection()), &ker));
    errors.push(gap(&flat_m(image(&t, &tol).unwrap().projection()), &(&ft * &ft_pinv)));
    let index = index_via_kernels(&t, &tol).unwrap();
    let want: Vec<i64> = k0_oracle(&ker, &sh, ks)
        .iter()
        .zip(k0_oracle(&coker, &sh, kt))
        .map(|(a, b)| a - b)
        .collect();
    if index.ranks() != want.as_slice() {
        errors.push(f64::INFINITY);
    }

    errors.into_iter().fold(0.0, |acc, e| if e.is_nan() { f64::NAN } else { acc.max(e) })
}

fn oracle_equivalence() -> Verdict {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let e = oracle_instance(seed);
        worst = worst.max(e);
        if e.is_nan() || e > 1e-10 {
            failures.push(format!("instance {seed}: disagreement {e:e}"));
        }
    }
    require(failures, format!("100 instances, worst disagreement {worst:.1e}"))
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_hilmod");
    let invocations: Vec<Vec<&str>> = vec![
        vec!["verify", "--suite", "fredholm", "--shape", "1,2", "--seeds", "0..9"],
        vec!["verify", "--suite", "duality", "--shape", "2,3", "--seeds", "0..4", "--samples", "3"],
        vec!["verify", "--suite", "polar", "--shape", "1,1,1", "--seeds", "0..4"],
        vec!["counterexample", "--n", "2..16", "--format", "json"],
    ];
    let mut failures = Vec::new();
    for (i, args) in invocations.iter().enumerate() {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|run| {
                let path = dir.path().join(format!("out-{i}-{run}.json"));
                let status = Command::new(bin)
                    .args(args)
                    .arg("--out")
                    .arg(&path)
                    .status()
                    .unwrap();
                if !status.success() {
                    failures.push(format!("{args:?} exited with {status}"));
                }
                std::fs::read(&path).unwrap_or_default()
            })
            .collect();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            failures.push(format!("{args:?}: outputs differ"));
        }
    }
    require(failures, format!("{} invocations repeated byte-identically", invocations.len()))
}

fn main() -> ExitCode {
    let index = std::sync::OnceLock::new();
    let index = || index.get_or_init(index_reports);
    let criteria: Vec<Criterion> = vec![
        ("index via kernels equals decomposition index", Box::new(|| index_agreement(index()))),
        ("index independent of the decomposition", Box::new(|| decomposition_independence(index()))),
        (
            "duality identities",
            Box::new(|| {
                suite(
                    ScenarioKind::Duality,
                    50,
                    &[
                        ("dot_evaluation", 1e-8),
                        ("bidual_inner_extension", 1e-8),
                        ("restriction_after_lift", 1e-8),
                        ("embedding_restriction", 1e-8),
                        ("norm_coincidence", 1e-8),
                    ],
                )
            }),
        ),
        (
            "sharp map of a complemented inclusion",
            Box::new(|| {
                suite(
                    ScenarioKind::SharpIsometry,
                    50,
                    &[("left_inverse", 1e-8), ("right_inverse", 1e-8), ("isometry", 1e-8)],
                )
            }),
        ),
        (
            "dual-module polar isomorphism is unitary",
            Box::new(|| {
                suite(
                    ScenarioKind::PolarIsomorphism,
                    50,
                    &[("unitary_source", 1e-8), ("unitary_target", 1e-8)],
                )
            }),
        ),
        (
            "complement decomposition and cokernel",
            Box::new(|| {
                suite(
                    ScenarioKind::ComplementDecomposition,
                    50,
                    &[
                        ("rr_star_identity", 1e-9),
                        ("kernel_is_complement", 1e-8),
                        ("cokernel_is_adjoint_kernel", 1e-8),
                    ],
                )
            }),
        ),
        ("counterexample divergence", Box::new(counterexample_divergence)),
        ("faithful-representation oracle", Box::new(oracle_equivalence)),
        ("CLI determinism", Box::new(cli_determinism)),
    ];

    let mut all_passed = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                all_passed = false;
                println!("criterion {} FAIL  {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
