#![allow(dead_code)]

use equitile::linalg::c64;
use equitile::{CMatrix, Partition, WeightedIndicator, C64};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
}

pub fn complex_entry(rng: &mut StdRng) -> C64 {
    c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_entry(rng))
}

pub fn random_hermitian(rng: &mut StdRng, n: usize) -> CMatrix {
    let m = random_matrix(rng, n, n);
    (&m + m.adjoint()).scale(0.5)
}

/// Random partition of `0..n` into exactly `k` non-empty cells, cells in
/// random order and indices scattered.
pub fn random_partition(rng: &mut StdRng, n: usize, k: usize) -> Partition {
    let mut labels: Vec<usize> = (0..k).chain((k..n).map(|_| rng.random_range(0..k))).collect();
    labels.shuffle(rng);
    let mut cells = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        cells[l].push(v);
    }
    cells.shuffle(rng);
    Partition::new(n, cells).unwrap()
}

pub fn random_weights(rng: &mut StdRng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| loop {
            let z = complex_entry(rng);
            if z.norm() > 0.1 {
                break z;
            }
        })
        .collect()
}

pub fn random_weighted(rng: &mut StdRng, n: usize, k: usize) -> WeightedIndicator {
    let p = random_partition(rng, n, k);
    if rng.random_bool(0.25) {
        WeightedIndicator::unit(p)
    } else {
        let w = random_weights(rng, n);
        WeightedIndicator::new(p, w).unwrap()
    }
}

/// Front equitable matrix w.r.t. the unit indicator of `p`: block `(i, j)` is
/// `(θ_ij / n_j)·ones` plus noise whose rows sum to zero.
pub fn planted_front_equitable(rng: &mut StdRng, p: &Partition, theta: &CMatrix, noise: f64) -> CMatrix {
    let n = p.n();
    let labels = p.labels();
    let sizes = p.sizes();
    let mut a = CMatrix::zeros(n, n);
    for u in 0..n {
        for j in 0..p.k() {
            let cell = p.cell(j);
            let raw: Vec<C64> = cell.iter().map(|_| complex_entry(rng) * noise).collect();
            let mean = raw.iter().sum::<C64>() / cell.len() as f64;
            for (&v, r) in cell.iter().zip(&raw) {
                a[(u, v)] = theta[(labels[u], j)] / sizes[j] as f64 + (r - mean);
            }
        }
    }
    a
}

pub const A0: [f64; 36] = [
    1., 2., 3., 3., 3., 2., //
    2., 4., 3., 1., 2., 1., //
    3., 3., 1., 4., 1., 1., //
    3., 1., 4., 0., 2., 3., //
    3., 2., 1., 2., 3., 2., //
    2., 1., 1., 3., 2., 4.,
];

pub fn a0() -> CMatrix {
    real(6, 6, &A0)
}

/// `Π₀ = (1 | 2, 6 | 3, 4, 5)`.
pub fn pi0() -> Partition {
    Partition::from_one_based(6, &[vec![1], vec![2, 6], vec![3, 4, 5]]).unwrap()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// All set partitions of `0..n` in restricted-growth order.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn rec(v: usize, n: usize, labels: &mut Vec<usize>, max: usize, out: &mut Vec<Partition>) {
        if v == n {
            out.push(Partition::from_labels(labels).unwrap());
            return;
        }
        for l in 0..=max + 1 {
            labels.push(l);
            rec(v + 1, n, labels, max.max(l), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    let mut labels = vec![0];
    rec(1, n, &mut labels, 0, &mut out);
    out
}

/// Hermitian matrix that is front and rear equitable w.r.t. the unit
/// indicator of `p`: `S_{l(u) l(v)}` for Hermitian `S` plus rank-one
/// noise blocks `x yᵀ` with `x`, `y` summing to zero.
pub fn planted_hermitian_equitable(rng: &mut StdRng, p: &Partition, noise: f64) -> CMatrix {
    let k = p.k();
    let s = random_hermitian(rng, k);
    let labels = p.labels();
    let n = p.n();
    let mut a = CMatrix::from_fn(n, n, |u, v| s[(labels[u], labels[v])]);
    let centered = |rng: &mut StdRng, len: usize| {
        let raw: Vec<C64> = (0..len).map(|_| complex_entry(rng) * noise).collect();
        let mean = raw.iter().sum::<C64>() / len as f64;
        raw.into_iter().map(|z| z - mean).collect::<Vec<_>>()
    };
    for i in 0..k {
        for j in i..k {
            let x = centered(rng, p.cell(i).len());
            let y = if i == j { x.iter().map(|z| z.conj()).collect() } else { centered(rng, p.cell(j).len()) };
            for (a_idx, &u) in p.cell(i).iter().enumerate() {
                for (b_idx, &v) in p.cell(j).iter().enumerate() {
                    let z = x[a_idx] * y[b_idx];
                    a[(u, v)] += z;
                    if i != j {
                        a[(v, u)] += z.conj();
                    }
                }
            }
        }
    }
    a
}
