//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use equitile::analysis::{matrix_norm, theta_residual, weyl_check, NormKind};
use equitile::linalg::{self, c64};
use equitile::partition::{coarsest_front_equitable_refinement, check_equitable, suitable_indexing_permutation};
use equitile::rectangular::{
    block_svd, deviation_rect, deviation_svd, rayleigh_quotient_rect, rayleigh_quotient_svd, rect_transform,
    singular_value_gap, BlockDiagonal, BlockSvd,
};
use equitile::reflector::{beta0, build_reflector, gamma, op_count, reset_op_count, ElementaryUnitary};
use equitile::triangularize::{
    block_triangularize, build_block_reflector, deviation_matrices, generalized_quotient, spectrum_split, Phases,
};
use equitile::{CMatrix, Partition, Phase, Side, WeightedIndicator, C64};
use rand::rngs::StdRng;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Tracks the worst observed value of a quantity against its bound.
#[derive(Default)]
struct Worst {
    value: f64,
    failures: usize,
}

impl Worst {
    fn check(&mut self, value: f64, bound: f64) {
        self.value = self.value.max(value);
        if value > bound || value.is_nan() {
            self.failures += 1;
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// ---------------------------------------------------------------- criterion 1

fn displayed_e() -> CMatrix {
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    real(3, 3, &[1., 4. / s2, 9. / s3, 4. / s2, 5., 6. * s2 / s3, 9. / s3, 6. * s2 / s3, 6.])
}

fn displayed_f() -> CMatrix {
    let s3 = 3f64.sqrt();
    real(3, 3, &[3., -3. + s3, -3. - s3, -3. + s3, s3 - 1., -6., -3. - s3, -6., -s3 - 1.])
}

fn interleave(e: &CMatrix, f: &CMatrix, e_pos: &[usize], f_pos: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            m[(e_pos[i], e_pos[j])] = e[(i, j)];
            m[(f_pos[i], f_pos[j])] = f[(i, j)];
        }
    }
    m
}

fn golden_example() -> Outcome {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let a = a0();
    let wi = WeightedIndicator::unit(pi0());
    let indexed = suitable_indexing_permutation(&pi0()).permute_symmetric(&a);
    let expected_indexed = real(
        6,
        6,
        &[
            1., 2., 2., 3., 3., 3., 2., 4., 1., 1., 2., 3., 2., 1., 4., 3., 2., 1., 3., 1., 3., 0., 2., 4., 3., 2.,
            2., 2., 3., 1., 3., 3., 1., 4., 1., 1.,
        ],
    );
    let e_minus = generalized_quotient(&a, &wi, -1.0).unwrap().entries;
    let expected_e_minus = real(3, 3, &[1., 4., 9., 2., 5., 6., 3., 4., 6.]);
    let r = block_triangularize(&a, &wi, &Phases::Auto).unwrap();
    let elapsed = start.elapsed();

    let tilde = interleave(&displayed_e(), &displayed_f(), &[0, 1, 3], &[2, 4, 5]);
    let hat = interleave(&displayed_e(), &displayed_f(), &[0, 1, 2], &[3, 4, 5]);
    let parts = [
        ("indexed A", max_abs_diff(&indexed, &expected_indexed)),
        ("E-", max_abs_diff(&e_minus, &expected_e_minus)),
        ("E", max_abs_diff(&r.e, &displayed_e())),
        ("F", max_abs_diff(&r.f, &displayed_f())),
        ("A~", max_abs_diff(&r.transformed(), &tilde)),
        ("A^", max_abs_diff(&r.assembled(), &hat)),
    ];
    let mut pass = elapsed.as_secs_f64() < 1.0;
    let mut detail = Vec::new();
    for (name, err) in parts {
        let ok = err <= TOL;
        pass &= ok;
        detail.push(format!("{name} {} ({err:.1e})", if ok { "ok" } else { "MISMATCH" }));
    }
    if !pass {
        let mut bad = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let (got, shown) = (r.f[(i, j)].re, displayed_f()[(i, j)].re);
                if (got - shown).abs() > TOL {
                    bad.push(format!("F[{},{}]={got:.6} vs displayed {shown:.6}", i + 1, j + 1));
                }
            }
        }
        if !bad.is_empty() {
            detail.push(format!(
                "displayed F has |F|_F^2={:.3}, but a unitary similarity requires |A|_F^2-|E|_F^2={:.3}; {}",
                displayed_f().norm_squared(),
                a.norm_squared() - r.e.norm_squared(),
                bad.join(", ")
            ));
        }
    }
    detail.push(format!("{:.3}s", secs(elapsed)));
    Outcome::new(pass, detail.join("; "))
}

// ---------------------------------------------------------------- criterion 2

fn spectrum_split_exactness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = Worst::default();
    let mut not_exact = 0;
    for _ in 0..200 {
        let k = r.random_range(1..=6);
        let n = r.random_range(k..=60);
        let p = random_partition(&mut r, n, k);
        let theta = random_matrix(&mut r, k, k).scale(4.0);
        let a = planted_front_equitable(&mut r, &p, &theta, 1.0);
        let res = block_triangularize(&a, &WeightedIndicator::unit(p), &Phases::Auto).unwrap();
        let split = spectrum_split(&res, 1e-10 * a.norm()).unwrap();
        if !split.exact {
            not_exact += 1;
        }
        let reference = linalg::eigenvalues(&a).unwrap();
        worst.check(linalg::multiset_distance(&split.joint(), &reference), 1e-9);
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst.failures == 0 && not_exact == 0 && elapsed.as_secs_f64() < 30.0,
        format!(
            "200 planted instances, max eigenvalue gap {:.1e} (bound 1e-9), {} failures, {not_exact} not flagged exact, {:.2}s",
            worst.value,
            worst.failures,
            secs(elapsed)
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

/// Largest singular-value gap relative to the leading singular value of `t`.
fn relative_sv_gap(d: &CMatrix, t: &CMatrix) -> f64 {
    let scale = linalg::spectral_norm(t);
    let gap = singular_value_gap(d, t);
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

fn deviation_singular_values() -> Outcome {
    let mut r = rng(3);
    let mut worst = Worst::default();
    for _ in 0..200 {
        let n = r.random_range(2..=64);
        let k = r.random_range(1..n.min(9));
        let a = random_matrix(&mut r, n, n);
        let wi = random_weighted(&mut r, n, k);
        let res = block_triangularize(&a, &wi, &Phases::Auto).unwrap();
        let (front, rear) = deviation_matrices(&a, &wi).unwrap();
        worst.check(relative_sv_gap(&res.d_minus, &front.assembled), 1e-11);
        worst.check(relative_sv_gap(&res.d_plus(), &rear.assembled), 1e-11);
    }
    Outcome::new(
        worst.failures == 0,
        format!(
            "200 instances, max relative singular-value gap D± vs T± {:.1e} (bound 1e-11), {} failures",
            worst.value, worst.failures
        ),
    )
}

// ---------------------------------------------------------------- criterion 4

fn front_quotient_minimality() -> Outcome {
    let mut r = rng(4);
    let mut equality = Worst::default();
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..50 {
        let n = r.random_range(2..=30);
        let k = r.random_range(1..=n.min(6));
        let a = random_matrix(&mut r, n, n);
        let wi = random_weighted(&mut r, n, k);
        let e_minus = generalized_quotient(&a, &wi, -1.0).unwrap().entries;
        let (front, _) = deviation_matrices(&a, &wi).unwrap();
        let scale = e_minus.norm().max(1.0);
        for kind in NormKind::ALL {
            let best = theta_residual(&a, &wi, &e_minus, Side::Front, kind).unwrap();
            let reference = matrix_norm(&front.assembled, kind);
            equality.check((best - reference).abs(), 1e-12 * reference.max(1.0));
        }
        for _ in 0..200 {
            let delta = random_matrix(&mut r, k, k);
            let size = 10f64.powf(r.random_range(-4.0..0.0)) * scale / delta.norm();
            let theta = &e_minus + delta.scale(size);
            for kind in NormKind::ALL {
                let best = theta_residual(&a, &wi, &e_minus, Side::Front, kind).unwrap();
                let other = theta_residual(&a, &wi, &theta, Side::Front, kind).unwrap();
                let margin = other - best;
                worst_margin = worst_margin.min(margin / best.max(1.0));
                if margin < -1e-12 * best.max(1.0) {
                    violations += 1;
                }
            }
        }
    }
    Outcome::new(
        violations == 0 && equality.failures == 0,
        format!(
            "50 instances x 200 perturbations x 3 norms, {violations} violations, smallest relative margin {worst_margin:.1e}, \
             max |residual(E-) - |T-|| {:.1e}",
            equality.value
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn weyl_bound() -> Outcome {
    let mut r = rng(5);
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..500 {
        let n = r.random_range(1..=40);
        let k = r.random_range(1..=n.min(8));
        let a = random_hermitian(&mut r, n);
        let wi = random_weighted(&mut r, n, k);
        let res = block_triangularize(&a, &wi, &Phases::Auto).unwrap();
        let check = weyl_check(&a, &res).unwrap();
        if !check.holds {
            failures += 1;
        }
        if check.tau_spec > 0.0 {
            worst_ratio = worst_ratio.max(check.max_gap / check.tau_spec);
        }
    }
    let a = real(2, 2, &[0., 0., 0., 1.]);
    let res = block_triangularize(&a, &WeightedIndicator::unit(Partition::single_cell(2).unwrap()), &Phases::Auto)
        .unwrap();
    let tight = weyl_check(&a, &res).unwrap();
    let tight_gap = (tight.max_gap - tight.tau_spec).abs();
    Outcome::new(
        failures == 0 && tight.holds && tight_gap <= 1e-12,
        format!(
            "500 Hermitian instances, {failures} violations, max gap/tau {worst_ratio:.3}; diag(0,1) single cell: \
             gap {:.3} tau {:.3} (|difference| {tight_gap:.1e})",
            tight.max_gap, tight.tau_spec
        ),
    )
}

// ---------------------------------------------------------------- criterion 6

/// Front equitability by exact block row sums, independent of the library.
fn row_sum_equitable(a: &CMatrix, p: &Partition) -> bool {
    p.cells().iter().all(|ci| {
        p.cells().iter().all(|cj| {
            let sum = |u: usize| cj.iter().map(|&v| a[(u, v)]).sum::<C64>();
            let first = sum(ci[0]);
            ci.iter().all(|&u| sum(u) == first)
        })
    })
}

fn brute_force_coarsest(a: &CMatrix, initial: &Partition, lattice: &[Partition]) -> Option<Partition> {
    let candidates: Vec<&Partition> =
        lattice.iter().filter(|p| p.refines(initial) && row_sum_equitable(a, p)).collect();
    // the coarsest is refined by every other candidate
    candidates.iter().find(|c| candidates.iter().all(|o| o.refines(c))).map(|c| c.canonical())
}

fn adjacency(n: usize, edges: &[(usize, usize)], directed: bool) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for &(u, v) in edges {
        m[(u, v)] = c64(1.0, 0.0);
        if !directed {
            m[(v, u)] = c64(1.0, 0.0);
        }
    }
    m
}

fn small_corpus(r: &mut StdRng) -> Vec<CMatrix> {
    let mut corpus = vec![
        a0(),
        adjacency(3, &[(0, 1), (1, 2)], false),
        adjacency(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], false),
        adjacency(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], false),
        adjacency(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], false),
        adjacency(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], true),
        adjacency(4, &[(0, 1), (1, 2), (2, 0), (3, 0)], true),
        CMatrix::zeros(4, 4),
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)])),
    ];
    for _ in 0..60 {
        let n = r.random_range(1..=6);
        let complex = r.random_bool(0.2);
        corpus.push(CMatrix::from_fn(n, n, |_, _| {
            let re = r.random_range(0..3) as f64;
            let im = if complex { r.random_range(0..2) as f64 } else { 0.0 };
            if r.random_bool(0.5) {
                c64(re, im)
            } else {
                c64(0.0, 0.0)
            }
        }));
    }
    corpus
}

/// Front equitable w.r.t. `p` by construction: each row of block `(i, j)`
/// places `d_ij` unit entries (with repetition) in cell `j`.
fn planted_cover(r: &mut StdRng, p: &Partition) -> CMatrix {
    let n = p.n();
    let k = p.k();
    let mut a = CMatrix::zeros(n, n);
    let d: Vec<Vec<usize>> = (0..k).map(|_| (0..k).map(|_| if r.random_bool(0.4) { r.random_range(1..4) } else { 0 }).collect()).collect();
    for (i, row) in d.iter().enumerate() {
        for &u in p.cell(i) {
            for (j, &count) in row.iter().enumerate() {
                let cell = p.cell(j);
                for _ in 0..count {
                    let v = cell[r.random_range(0..cell.len())];
                    a[(u, v)] += c64(1.0, 0.0);
                }
            }
        }
    }
    a
}

fn refinement_correctness() -> Outcome {
    let mut r = rng(6);
    let lattices: Vec<Vec<Partition>> = (0..=6).map(|n| if n == 0 { Vec::new() } else { all_partitions(n) }).collect();
    let corpus = small_corpus(&mut r);
    let mut small_cases = 0;
    let mut small_failures = Vec::new();
    for (idx, a) in corpus.iter().enumerate() {
        let n = a.nrows();
        let mut initials = vec![Partition::single_cell(n).unwrap()];
        for _ in 0..3 {
            let k = r.random_range(1..=n);
            initials.push(random_partition(&mut r, n, k));
        }
        for initial in initials {
            small_cases += 1;
            let got = coarsest_front_equitable_refinement(a, &initial).unwrap();
            let oracle = brute_force_coarsest(a, &initial, &lattices[n]);
            if oracle.as_ref() != Some(&got) {
                small_failures.push(format!("corpus #{idx}: got {:?}, oracle {:?}", got.cells(), oracle.map(|o| o.cells().to_vec())));
            }
        }
    }

    let mut large_failures = 0;
    let mut large_cases = 0;
    for trial in 0..60 {
        let n = r.random_range(1..=200);
        let (a, planted) = if trial % 2 == 0 {
            let density = r.random_range(0.005..0.1);
            let a = CMatrix::from_fn(n, n, |_, _| {
                if r.random_bool(density) {
                    c64(r.random_range(1..4) as f64, 0.0)
                } else {
                    c64(0.0, 0.0)
                }
            });
            (a, None)
        } else {
            let k = r.random_range(1..=n.min(12));
            let p = random_partition(&mut r, n, k);
            (planted_cover(&mut r, &p), Some(p))
        };
        let initial = Partition::single_cell(n).unwrap();
        let out = coarsest_front_equitable_refinement(&a, &initial).unwrap();
        let verdict = check_equitable(&a, &WeightedIndicator::unit(out.clone()), Side::Front, 0.0).unwrap();
        let idempotent = coarsest_front_equitable_refinement(&a, &out).unwrap() == out;
        let covers = planted.as_ref().is_none_or(|p| p.refines(&out));
        large_cases += 1;
        if verdict.max_residual != 0.0 || !idempotent || !covers {
            large_failures += 1;
        }
    }
    let mut detail = format!(
        "{small_cases} small cases vs exhaustive lattice, {} mismatches; {large_cases} matrices with N <= 200 \
         (sparse and planted covers), {large_failures} failures",
        small_failures.len()
    );
    if let Some(first) = small_failures.first() {
        detail.push_str(&format!("; first mismatch {first}"));
    }
    Outcome::new(small_failures.is_empty() && large_failures == 0, detail)
}

// ---------------------------------------------------------------- criterion 7

fn random_side(r: &mut StdRng, max_rows: usize) -> BlockDiagonal {
    let mut blocks = Vec::new();
    let mut rows = 0;
    loop {
        let m = r.random_range(1..=8);
        if rows + m > max_rows {
            break;
        }
        let q = r.random_range(1..=m);
        blocks.push(random_matrix(r, m, q));
        rows += m;
        if r.random_bool(0.25) {
            break;
        }
    }
    if blocks.is_empty() {
        blocks.push(random_matrix(r, 1, 1));
    }
    BlockDiagonal::new(blocks).unwrap()
}

fn random_twist(r: &mut StdRng, svd: &BlockSvd) -> BlockSvd {
    let phases: Vec<Vec<Phase>> = svd
        .blocks
        .iter()
        .map(|b| (0..b.rank()).map(|_| Phase::from_angle(r.random_range(0.0..std::f64::consts::TAU))).collect())
        .collect();
    svd.twisted(&phases).unwrap()
}

fn rectangular_pipeline() -> Outcome {
    const TOL: f64 = 1e-11;
    let mut r = rng(7);
    let mut sv_a = Worst::default();
    let mut sv_d = Worst::default();
    let mut sv_e = Worst::default();
    let mut twist = Worst::default();
    let mut ranks_mixed = 0;
    for _ in 0..100 {
        let wm = random_side(&mut r, 48);
        let wp = random_side(&mut r, 48);
        if wm.blocks().iter().chain(wp.blocks()).any(|b| b.ncols() < b.nrows())
            && wm.blocks().iter().chain(wp.blocks()).any(|b| b.ncols() > 1)
        {
            ranks_mixed += 1;
        }
        let a = random_matrix(&mut r, wm.nrows(), wp.nrows());
        let (left, right) = (block_svd(&wm).unwrap(), block_svd(&wp).unwrap());
        let res = rect_transform(&a, &left, &right).unwrap();
        sv_a.check(singular_value_gap(&res.assembled(), &a), TOL);
        let (tm, tp) = deviation_rect(&a, &wm, &wp).unwrap();
        sv_d.check(singular_value_gap(&res.d_minus, &tm), TOL);
        sv_d.check(singular_value_gap(&res.d_plus(), &tp), TOL);
        let e0 = rayleigh_quotient_rect(&a, &wm, &wp).unwrap();
        sv_e.check(singular_value_gap(&res.e, &e0), TOL);

        let (tl, tr) = (random_twist(&mut r, &left), random_twist(&mut r, &right));
        let e0_svd = rayleigh_quotient_svd(&a, &left, &right).unwrap();
        let e0_twisted = rayleigh_quotient_svd(&a, &tl, &tr).unwrap();
        let (sm, sp) = deviation_svd(&a, &tl, &tr).unwrap();
        twist.check(max_abs_diff(&e0_twisted, &e0), TOL);
        twist.check(max_abs_diff(&e0_svd, &e0), TOL);
        twist.check(max_abs_diff(&sm, &tm), TOL);
        twist.check(max_abs_diff(&sp, &tp), TOL);
        twist.check(max_abs_diff(&rect_transform(&a, &tl, &tr).unwrap().e0(), &e0), TOL);
    }
    let failures = sv_a.failures + sv_d.failures + sv_e.failures + twist.failures;
    Outcome::new(
        failures == 0,
        format!(
            "100 instances ({ranks_mixed} with mixed block ranks), max gaps: sigma(A^) vs sigma(A) {:.1e}, D± vs T± {:.1e}, \
             E vs E0 {:.1e}, twisted E0/T± {:.1e} (bound 1e-11), {failures} failures",
            sv_a.value, sv_d.value, sv_e.value, twist.value
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn random_vector(r: &mut StdRng, n: usize) -> (Vec<C64>, f64) {
    let scale = 10f64.powf(r.random_range(-6.0..6.0));
    loop {
        let x: Vec<C64> = (0..n).map(|_| complex_entry(r) * scale).collect();
        if x.iter().any(|z| z.norm() > 1e-3 * scale) {
            return (x, scale);
        }
    }
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn reflector_properties() -> Outcome {
    const TOL: f64 = 1e-13;
    const TRIALS: usize = 1000;
    let start = Instant::now();
    let mut r = rng(8);
    let random_phase = |r: &mut StdRng| Phase::from_angle(r.random_range(0.0..std::f64::consts::TAU));
    let mut unitarity = Worst::default();
    let mut mapping = Worst::default();
    let mut scaling = Worst::default();
    let mut hermitian = Worst::default();
    let mut real_case = Worst::default();

    for _ in 0..TRIALS {
        let n = r.random_range(1..=32);
        let (x, _) = random_vector(&mut r, n);
        let beta = random_phase(&mut r);
        let d = build_reflector(&x, beta).unwrap().dense();
        unitarity.check(max_abs_diff(&(d.adjoint() * &d), &CMatrix::identity(n, n)), TOL);
    }
    for _ in 0..TRIALS {
        let n = r.random_range(1..=32);
        let (x, _) = random_vector(&mut r, n);
        let nx = norm(&x);
        let beta = random_phase(&mut r);
        let h = build_reflector(&x, beta).unwrap();
        let mut f = vec![c64(0.0, 0.0); n];
        f[0] = c64(1.0, 0.0);
        let hf = h.apply(&f).unwrap();
        let err_f = hf.iter().zip(&x).map(|(a, b)| (a - b * beta.value() / nx).norm()).fold(0.0, f64::max);
        mapping.check(err_f, TOL);
        let hx = h.apply_adjoint(&x).unwrap();
        let err_x = hx.iter().zip(&f).map(|(a, e)| (a - e * nx / beta.value()).norm()).fold(0.0, f64::max);
        mapping.check(err_x / nx, TOL);
    }
    for _ in 0..TRIALS {
        let n = r.random_range(1..=32);
        let (x, _) = random_vector(&mut r, n);
        let beta = random_phase(&mut r);
        let h = build_reflector(&x, beta).unwrap().dense();
        let s = 10f64.powf(r.random_range(-6.0..6.0));
        let sx: Vec<C64> = x.iter().map(|z| z * s).collect();
        scaling.check(max_abs_diff(&build_reflector(&sx, beta).unwrap().dense(), &h), TOL);
        // a complex factor rotates the phase along with the vector
        let c = C64::from_polar(10f64.powf(r.random_range(-6.0..6.0)), r.random_range(0.0..std::f64::consts::TAU));
        let cx: Vec<C64> = x.iter().map(|z| z * c).collect();
        let rotated = Phase::normalize(beta.value() * c.conj()).unwrap();
        scaling.check(max_abs_diff(&build_reflector(&cx, rotated).unwrap().dense(), &h), TOL);
        let auto = build_reflector(&x, beta0(&x)).unwrap().dense();
        scaling.check(max_abs_diff(&build_reflector(&cx, beta0(&cx)).unwrap().dense(), &auto), TOL);
        // U(γ, c y) = U(γ, y) for any complex c ≠ 0
        let g = gamma(&x, beta).unwrap();
        let y: Vec<C64> = (0..n).map(|_| complex_entry(&mut r)).collect();
        let cy: Vec<C64> = y.iter().map(|z| z * c).collect();
        let u = ElementaryUnitary::from_update(g, &y).dense();
        scaling.check(max_abs_diff(&ElementaryUnitary::from_update(g, &cy).dense(), &u), TOL);
    }
    for _ in 0..TRIALS {
        let n = r.random_range(1..=32);
        let (x, _) = random_vector(&mut r, n);
        // β x¹ real ⇒ γ = 0 ⇒ H Hermitian
        let d = build_reflector(&x, beta0(&x)).unwrap().dense();
        hermitian.check(linalg::hermitian_defect(&d), TOL);
        let flipped = beta0(&x) * Phase::MINUS_ONE;
        let d = build_reflector(&x, flipped).unwrap().dense();
        hermitian.check(linalg::hermitian_defect(&d), TOL);
    }
    for _ in 0..TRIALS {
        let n = r.random_range(1..=32);
        let (x, _) = random_vector(&mut r, n);
        let xr: Vec<C64> = x.iter().map(|z| c64(z.re, 0.0)).collect();
        if norm(&xr) == 0.0 {
            continue;
        }
        let beta = if r.random_bool(0.5) { Phase::ONE } else { Phase::MINUS_ONE };
        let h = build_reflector(&xr, beta).unwrap();
        let imag = h.dense().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let stored = h.direction().map_or(0.0, |y| y.iter().map(|z| z.im.abs()).fold(0.0, f64::max)) + h.coeff().im.abs();
        real_case.check(imag + stored, 0.0);
        let d = h.dense();
        real_case.check(max_abs_diff(&(d.transpose() * &d), &CMatrix::identity(n, n)), TOL);
    }
    let elapsed = start.elapsed();
    let groups = [
        ("unitarity", &unitarity),
        ("mapping", &mapping),
        ("scale invariance", &scaling),
        ("Hermitian", &hermitian),
        ("real", &real_case),
    ];
    let failures: usize = groups.iter().map(|(_, w)| w.failures).sum();
    let summary: Vec<String> =
        groups.iter().map(|(name, w)| format!("{name} {:.1e}/{} fail", w.value, w.failures)).collect();
    Outcome::new(
        failures == 0 && elapsed.as_secs_f64() < 10.0,
        format!("{TRIALS} trials each: {}; {:.2}s", summary.join(", "), secs(elapsed)),
    )
}

// ---------------------------------------------------------------- criterion 9

fn performance_shape() -> Outcome {
    let mut r = rng(9);
    let sizes = [64usize, 128, 256];
    let mut counts = Vec::new();
    for &n in &sizes {
        let k = n / 8;
        let wi = WeightedIndicator::new(random_partition(&mut r, n, k), random_weights(&mut r, n)).unwrap();
        let h = build_block_reflector(&wi, &Phases::Auto).unwrap();
        let a = random_matrix(&mut r, n, n);
        reset_op_count();
        let _ = h.transform(&a).unwrap();
        counts.push(op_count() as f64);
    }
    // least-squares fit count ≈ c·N²
    let num: f64 = sizes.iter().zip(&counts).map(|(&n, c)| c * (n * n) as f64).sum();
    let den: f64 = sizes.iter().map(|&n| ((n * n) as f64).powi(2)).sum();
    let c = num / den;
    let ratios: Vec<f64> = sizes.iter().zip(&counts).map(|(&n, cnt)| cnt / (c * (n * n) as f64)).collect();
    let within = ratios.iter().all(|&q| (1.0 / 1.3..=1.3).contains(&q));
    let slope = (counts[2] / counts[0]).ln() / (sizes[2] as f64 / sizes[0] as f64).ln();
    Outcome::new(
        within && slope < 2.5,
        format!(
            "ops {:?} at N = {sizes:?}, fit {c:.3}·N², ratios to fit {:?}, log-log slope {slope:.3}",
            counts.iter().map(|&x| x as u64).collect::<Vec<_>>(),
            ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("golden example", golden_example),
        ("spectrum split exactness", spectrum_split_exactness),
        ("deviation singular values", deviation_singular_values),
        ("front quotient minimality", front_quotient_minimality),
        ("Weyl bound", weyl_bound),
        ("refinement correctness", refinement_correctness),
        ("rectangular pipeline", rectangular_pipeline),
        ("reflector properties", reflector_properties),
        ("performance shape", performance_shape),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
            });
        if !outcome.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, i + 1, outcome.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
