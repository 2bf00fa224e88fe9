//! Partitions of `{0, …, N-1}`, weighted indicator matrices and the
//! equitability notions built on them.
//!
//! Indices are 0-based here; the 1-based convention lives only in the file
//! formats of the command line tool.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cmp_complex, CMatrix, C64};
use crate::permutation::Permutation;

/// Ordered, disjoint, non-empty cells covering `{0, …, n-1}`.
///
/// Indices inside a cell are kept ascending. The order of the cells is the
/// caller's; [`Partition::canonical`] orders cells by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, mut cells: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("ground set is empty".into()));
        }
        let mut seen = vec![false; n];
        for (i, cell) in cells.iter_mut().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {i} is empty")));
            }
            cell.sort_unstable();
            for &v in cell.iter() {
                if v >= n {
                    return Err(Error::InvalidPartition(format!("index {v} out of range 0..{n}")));
                }
                if seen[v] {
                    return Err(Error::InvalidPartition(format!("index {v} appears twice")));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {v} is not covered")));
        }
        Ok(Self { n, cells })
    }

    /// Cells given with 1-based indices.
    pub fn from_one_based(n: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let cells = cells
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| {
                        v.checked_sub(1)
                            .ok_or_else(|| Error::InvalidPartition("index 0 in a 1-based partition".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, cells)
    }

    /// Groups indices by label; cells come out in canonical order.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut slot = std::collections::HashMap::new();
        for (v, &l) in labels.iter().enumerate() {
            let idx = *slot.entry(l).or_insert_with(|| {
                cells.push(Vec::new());
                cells.len() - 1
            });
            cells[idx].push(v);
        }
        Self::new(labels.len(), cells)
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|v| vec![v]).collect())
    }

    pub fn single_cell(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).collect()])
    }

    /// Size of the ground set.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells.
    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// `labels[v]` is the cell containing `v`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (i, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                labels[v] = i;
            }
        }
        labels
    }

    pub fn canonical(&self) -> Partition {
        let mut cells = self.cells.clone();
        cells.sort_by_key(|c| c[0]);
        Partition { n: self.n, cells }
    }

    pub fn is_canonical(&self) -> bool {
        self.cells.windows(2).all(|w| w[0][0] < w[1][0])
    }

    /// True when every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n != coarser.n {
            return false;
        }
        let labels = coarser.labels();
        self.cells.iter().all(|c| c.iter().all(|&v| labels[v] == labels[c[0]]))
    }

    /// True when cell `i` occupies a contiguous range and cells follow each
    /// other in order.
    pub fn is_contiguous(&self) -> bool {
        let mut next = 0;
        for cell in &self.cells {
            for &v in cell {
                if v != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.cells.iter().map(|c| c.iter().map(|v| v + 1).collect()).collect()
    }
}

/// Which side of the equitability relation is examined: `A W = W E⁻` (front,
/// row sums) or `W′A = E⁺W′` (rear, column sums).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Front,
    Rear,
}

/// A partition together with a complex weight per index.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedIndicator {
    partition: Partition,
    weights: Vec<C64>,
}

impl WeightedIndicator {
    pub fn new(partition: Partition, weights: Vec<C64>) -> Result<Self> {
        if weights.len() != partition.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a partition of {} indices",
                weights.len(),
                partition.n()
            )));
        }
        Ok(Self { partition, weights })
    }

    /// All-ones weights: the ordinary indicator matrix.
    pub fn unit(partition: Partition) -> Self {
        let weights = vec![C64::new(1.0, 0.0); partition.n()];
        Self { partition, weights }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Weight subvector `w_i` of cell `i`, in the cell's index order.
    pub fn block(&self, i: usize) -> Vec<C64> {
        self.partition.cell(i).iter().map(|&v| self.weights[v]).collect()
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.partition
            .cells()
            .iter()
            .map(|c| c.iter().map(|&v| self.weights[v].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    pub fn is_admissible(&self) -> bool {
        self.block_norms().iter().all(|&n| n > 0.0)
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        match self.block_norms().iter().position(|&n| n.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            Some(cell) => Err(Error::Inadmissible { cell }),
            None => Ok(()),
        }
    }

    /// Dense `N×k` matrix `W` with `W[v, i] = w_v` for `v ∈ c_i`.
    pub fn dense(&self) -> CMatrix {
        let mut w = CMatrix::zeros(self.partition.n(), self.partition.k());
        for (i, cell) in self.partition.cells().iter().enumerate() {
            for &v in cell {
                w[(v, i)] = self.weights[v];
            }
        }
        w
    }

    /// Multiplies the weight block of cell `i` by `factors[i]`.
    pub fn rescaled(&self, factors: &[C64]) -> Result<Self> {
        if factors.len() != self.partition.k() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for {} cells",
                factors.len(),
                self.partition.k()
            )));
        }
        let labels = self.partition.labels();
        let weights = self.weights.iter().zip(&labels).map(|(w, &l)| w * factors[l]).collect();
        Ok(Self { partition: self.partition.clone(), weights })
    }
}

/// Dense 0/1 indicator matrix `B` (`N×k`).
pub fn indicator_matrix(p: &Partition) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(p.n(), p.k());
    for (i, cell) in p.cells().iter().enumerate() {
        for &v in cell {
            b[(v, i)] = 1.0;
        }
    }
    b
}

/// Relabeling that makes cell `i` occupy the `i`-th contiguous index range.
///
/// Indices already inside their cell's target range keep their position; the
/// remaining indices of a cell fill its free slots in ascending order.
pub fn suitable_indexing_permutation(p: &Partition) -> Permutation {
    let n = p.n();
    let mut map = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut start = 0;
    let mut ranges = Vec::with_capacity(p.k());
    for cell in p.cells() {
        let range = start..start + cell.len();
        for &v in cell {
            if range.contains(&v) {
                map[v] = v;
                taken[v] = true;
            }
        }
        start = range.end;
        ranges.push(range);
    }
    for (cell, range) in p.cells().iter().zip(&ranges) {
        let mut free = range.clone().filter(|&s| !taken[s]);
        for &v in cell {
            if map[v] == usize::MAX {
                map[v] = free.next().expect("cell has as many free slots as misplaced members");
            }
        }
    }
    Permutation::from_map(map).expect("slots are assigned bijectively")
}

pub fn is_admissible(wi: &WeightedIndicator) -> bool {
    wi.is_admissible()
}

pub(crate) fn ensure_square(a: &CMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, partition covers {} indices",
            a.nrows(),
            a.ncols(),
            n
        )));
    }
    Ok(())
}

/// `A W` as an `N×k` matrix.
pub(crate) fn a_times_w(a: &CMatrix, wi: &WeightedIndicator) -> CMatrix {
    let p = wi.partition();
    let mut out = CMatrix::zeros(p.n(), p.k());
    for (j, cell) in p.cells().iter().enumerate() {
        let mut col = out.column_mut(j);
        for &v in cell {
            col.axpy(wi.weights()[v], &a.column(v), C64::new(1.0, 0.0));
        }
    }
    out
}

/// `A′ W` as an `N×k` matrix.
pub(crate) fn a_adjoint_times_w(a: &CMatrix, wi: &WeightedIndicator) -> CMatrix {
    a_times_w(&a.adjoint(), wi)
}

/// `W′ M` for an `N×m` matrix `M`, computed cellwise.
pub(crate) fn w_adjoint_times(wi: &WeightedIndicator, m: &CMatrix) -> CMatrix {
    let p = wi.partition();
    let mut out = CMatrix::zeros(p.k(), m.ncols());
    for (i, cell) in p.cells().iter().enumerate() {
        for c in 0..m.ncols() {
            out[(i, c)] = cell.iter().map(|&v| wi.weights()[v].conj() * m[(v, c)]).sum();
        }
    }
    out
}

/// Outcome of an equitability test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquitabilityVerdict {
    pub side: Side,
    pub is_equitable: bool,
    pub tolerance: f64,
    pub max_residual: f64,
    /// `per_block_residuals[i][j] = ‖t_ij‖` (front: `‖A_ij w_j − e⁻_ij w_i‖/‖w_j‖`).
    pub per_block_residuals: Vec<Vec<f64>>,
}

/// Tests `A W = W E⁻` (front) or `W′A = E⁺W′` (rear) blockwise.
pub fn check_equitable(a: &CMatrix, wi: &WeightedIndicator, side: Side, tol: f64) -> Result<EquitabilityVerdict> {
    let p = wi.partition();
    ensure_square(a, p.n())?;
    wi.ensure_admissible()?;
    let norms = wi.block_norms();
    let w = wi.weights();
    let k = p.k();
    let prod = match side {
        Side::Front => a_times_w(a, wi),
        Side::Rear => a_adjoint_times_w(a, wi),
    };
    let mut per_block = vec![vec![0.0; k]; k];
    let mut max_residual = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            // front: rows of cell i in column j of AW, against w_i, normalized by ‖w_j‖
            // rear:  rows of cell j in column i of A′W, against w_j, normalized by ‖w_i‖
            let (rows, col, scale) = match side {
                Side::Front => (p.cell(i), j, norms[j]),
                Side::Rear => (p.cell(j), i, norms[i]),
            };
            let dot: C64 = rows.iter().map(|&u| w[u].conj() * prod[(u, col)]).sum();
            let rows_norm_sq: f64 = rows.iter().map(|&u| w[u].norm_sqr()).sum();
            let e = dot / rows_norm_sq;
            let res_sq: f64 = rows.iter().map(|&u| (prod[(u, col)] - e * w[u]).norm_sqr()).sum();
            let r = res_sq.sqrt() / scale;
            per_block[i][j] = r;
            max_residual = max_residual.max(r);
        }
    }
    Ok(EquitabilityVerdict { side, is_equitable: max_residual <= tol, tolerance: tol, max_residual, per_block_residuals: per_block })
}

/// Row sums `r_ij = A_ij j` for every block, as an `N×k` matrix `A B`.
fn block_row_sums(a: &CMatrix, p: &Partition) -> CMatrix {
    a_times_w(a, &WeightedIndicator::unit(p.clone()))
}

/// Smallest `ε` for which `p` is ε-equitable: the largest spread
/// `max |r_ij,u − r_ij,v|` of block row sums.
pub fn epsilon_equitability(a: &CMatrix, p: &Partition) -> Result<f64> {
    ensure_square(a, p.n())?;
    let r = block_row_sums(a, p);
    let mut eps = 0.0f64;
    for cell in p.cells() {
        for j in 0..p.k() {
            for (s, &u) in cell.iter().enumerate() {
                for &v in &cell[s + 1..] {
                    eps = eps.max((r[(u, j)] - r[(v, j)]).norm());
                }
            }
        }
    }
    Ok(eps)
}

/// Every block row-sum vector is either entrywise nonzero or identically zero.
pub fn check_regular_equivalence(a: &CMatrix, p: &Partition) -> Result<bool> {
    ensure_square(a, p.n())?;
    let r = block_row_sums(a, p);
    let zero = C64::new(0.0, 0.0);
    for cell in p.cells() {
        for j in 0..p.k() {
            let zeros = cell.iter().filter(|&&u| r[(u, j)] == zero).count();
            if zeros != 0 && zeros != cell.len() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Splits `members` into classes of equal color. Colors are compared with an
/// absolute tolerance against the first member of each class; classes are
/// discovered in (re, im) order of their colors.
fn split_by_color(members: &[usize], color: impl Fn(usize) -> C64, tol: f64) -> Vec<Vec<usize>> {
    let mut keyed: Vec<(C64, usize)> = members.iter().map(|&u| (color(u), u)).collect();
    keyed.sort_by(|a, b| cmp_complex(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let mut classes: Vec<(C64, Vec<usize>)> = Vec::new();
    for (c, u) in keyed {
        let hit = match classes.last() {
            Some((anchor, _)) if (anchor - c).norm() <= tol => Some(classes.len() - 1),
            _ if tol > 0.0 => classes.iter().position(|(anchor, _)| (anchor - c).norm() <= tol),
            _ => None,
        };
        match hit {
            Some(idx) => classes[idx].1.push(u),
            None => classes.push((c, vec![u])),
        }
    }
    classes.into_iter().map(|(_, m)| m).collect()
}

/// Coarsest refinement of `initial` that `a` is (unweighted) front equitable
/// against, with exact color comparison.
pub fn coarsest_front_equitable_refinement(a: &CMatrix, initial: &Partition) -> Result<Partition> {
    coarsest_front_equitable_refinement_with_tol(a, initial, 0.0)
}

/// Color refinement: every cell is split by the colors `A_ij j` of all current
/// cells `j`, cells in ascending order, until a pass splits nothing. The
/// result is in canonical form.
pub fn coarsest_front_equitable_refinement_with_tol(a: &CMatrix, initial: &Partition, tol: f64) -> Result<Partition> {
    ensure_square(a, initial.n())?;
    let mut current = initial.canonical();
    loop {
        let colors = block_row_sums(a, &current);
        let mut next_cells = Vec::with_capacity(current.k());
        for cell in current.cells() {
            let mut groups = vec![cell.clone()];
            for j in 0..current.k() {
                if groups.len() == cell.len() {
                    break;
                }
                groups = groups.iter().flat_map(|g| split_by_color(g, |u| colors[(u, j)], tol)).collect();
            }
            next_cells.extend(groups);
        }
        let next = Partition::new(current.n(), next_cells)?.canonical();
        if next.k() == current.k() {
            return Ok(current);
        }
        current = next;
    }
}

/// Coarsest refinement of `initial` that is front equitable for the weight
/// vector `w`, via the unweighted refinement of `diag(w)⁻¹ A diag(w)`.
pub fn weighted_refinement(a: &CMatrix, w: &[C64], initial: &Partition, tol: f64) -> Result<Partition> {
    ensure_square(a, initial.n())?;
    if w.len() != initial.n() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} indices", w.len(), initial.n())));
    }
    if let Some(index) = w.iter().position(|x| x.norm() == 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    let scaled = CMatrix::from_fn(a.nrows(), a.ncols(), |u, v| a[(u, v)] * w[v] / w[u]);
    coarsest_front_equitable_refinement_with_tol(&scaled, initial, tol)
}
