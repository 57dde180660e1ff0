//! One-to-one optimal assignment between predicted and ground-truth
//! elements.
//!
//! Costs are element distances in meters; class-mismatched pairs carry
//! `+inf` and are never matched. The solver minimizes total cost over all
//! maximal one-to-one matchings (matching as many finite pairs as possible
//! always beats leaving entities unmatched). Among equal-cost optima the
//! lexicographically smallest (pred index, gt index) sequence is returned,
//! so reports are reproducible across runs and platforms.

use crate::dataset::FramePrediction;
use crate::geometry::segment_distance;
use crate::perturb::FrameGroundTruth;

/// Rectangular cost matrix: rows are predictions, columns ground truth.
/// Entries are non-negative finite costs or `+inf` for forbidden pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    /// A matrix of the given shape with every pair forbidden.
    pub fn filled_infinite(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![f64::INFINITY; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::filled_infinite(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(!v.is_nan() && v >= 0.0, "costs must be >= 0 or +inf");
        self.data[i * self.cols + j] = v;
    }
}

/// Result of an assignment: matched pairs plus explicit leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched (pred index, gt index, cost) triples, sorted by pred index.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
    /// Sum of matched pair costs.
    pub total_cost: f64,
}

/// Entry (i, j) is the element distance when classes match, `+inf`
/// otherwise.
pub fn build_cost_matrix(preds: &FramePrediction, gts: &FrameGroundTruth) -> CostMatrix {
    CostMatrix::from_fn(preds.elements.len(), gts.elements.len(), |i, j| {
        let p = &preds.elements[i].segment;
        let g = &gts.elements[j].segment;
        if p.class == g.class {
            segment_distance(p, g)
        } else {
            f64::INFINITY
        }
    })
}

/// Minimum-cost maximal one-to-one assignment with deterministic
/// lexicographic tie-breaking.
pub fn hungarian_assign(costs: &CostMatrix) -> Assignment {
    let (rows, cols) = (costs.rows, costs.cols);
    if rows == 0 || cols == 0 {
        return Assignment {
            pairs: vec![],
            unmatched_preds: (0..rows).collect(),
            unmatched_gts: (0..cols).collect(),
            total_cost: 0.0,
        };
    }

    let solver = Padded::new(costs);
    let (base_total, base_assign) = solver.solve(&all(solver.dim), &all(solver.dim));
    let pairs = refine_lexicographic(&solver, base_total, base_assign);

    let matched_preds: Vec<bool> = {
        let mut v = vec![false; rows];
        for &(i, _, _) in &pairs {
            v[i] = true;
        }
        v
    };
    let matched_gts: Vec<bool> = {
        let mut v = vec![false; cols];
        for &(_, j, _) in &pairs {
            v[j] = true;
        }
        v
    };
    let total_cost = pairs.iter().map(|&(_, _, c)| c).sum();
    Assignment {
        pairs,
        unmatched_preds: (0..rows).filter(|&i| !matched_preds[i]).collect(),
        unmatched_gts: (0..cols).filter(|&j| !matched_gts[j]).collect(),
        total_cost,
    }
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Square view of the cost matrix, padded to `dim x dim`. Forbidden and
/// padding entries cost `big`, which exceeds any finite assignment total, so
/// maximal finite cardinality always wins.
struct Padded<'a> {
    costs: &'a CostMatrix,
    dim: usize,
    big: f64,
}

impl<'a> Padded<'a> {
    fn new(costs: &'a CostMatrix) -> Self {
        let dim = costs.rows.max(costs.cols);
        let finite_sum: f64 = costs.data.iter().filter(|v| v.is_finite()).sum();
        Self { costs, dim, big: finite_sum + 1.0 }
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        if i < self.costs.rows && j < self.costs.cols {
            let c = self.costs.get(i, j);
            if c.is_finite() {
                c
            } else {
                self.big
            }
        } else {
            self.big
        }
    }

    /// O(k^3) shortest-augmenting-path assignment over the given (equal
    /// length) row and column subsets. Returns the total padded cost and the
    /// row -> column matching in global indices.
    fn solve(&self, rows: &[usize], cols: &[usize]) -> (f64, Vec<(usize, usize)>) {
        let n = rows.len();
        assert_eq!(n, cols.len(), "assignment subproblems stay square");
        if n == 0 {
            return (0.0, vec![]);
        }
        // Potentials u, v; p[j] is the row (1-based) matched to column j.
        let mut u = vec![0.0f64; n + 1];
        let mut v = vec![0.0f64; n + 1];
        let mut p = vec![0usize; n + 1];
        let mut way = vec![0usize; n + 1];
        for i in 1..=n {
            p[0] = i;
            let mut j0 = 0usize;
            let mut minv = vec![f64::INFINITY; n + 1];
            let mut used = vec![false; n + 1];
            loop {
                used[j0] = true;
                let i0 = p[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0usize;
                for j in 1..=n {
                    if !used[j] {
                        let cur = self.cost(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
                        if cur < minv[j] {
                            minv[j] = cur;
                            way[j] = j0;
                        }
                        if minv[j] < delta {
                            delta = minv[j];
                            j1 = j;
                        }
                    }
                }
                for j in 0..=n {
                    if used[j] {
                        u[p[j]] += delta;
                        v[j] -= delta;
                    } else {
                        minv[j] -= delta;
                    }
                }
                j0 = j1;
                if p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                p[j0] = p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        let mut assign = Vec::with_capacity(n);
        let mut total = 0.0;
        for j in 1..=n {
            let i = p[j];
            assign.push((rows[i - 1], cols[j - 1]));
            total += self.cost(rows[i - 1], cols[j - 1]);
        }
        assign.sort_unstable();
        (total, assign)
    }
}

/// Rewrites an optimal padded assignment into the lexicographically smallest
/// optimal (pred, gt) pair sequence: for each row in ascending order, commit
/// the smallest finite column that still admits an optimal completion.
///
/// Rows that cannot be matched finitely are deferred without consuming a
/// column: pinning them to a particular cost-`big` column too early could
/// rob a later row of its preferred finite match. The sub-solver keeps
/// assigning deferred rows to whichever big columns preserve the optimum.
fn refine_lexicographic(
    solver: &Padded<'_>,
    base_total: f64,
    base_assign: Vec<(usize, usize)>,
) -> Vec<(usize, usize, f64)> {
    let dim = solver.dim;
    let real_rows = solver.costs.rows;
    let real_cols = solver.costs.cols;
    let tol = 1e-9 * (1.0 + base_total.abs());

    let mut current: Vec<usize> = vec![0; dim];
    for &(i, j) in &base_assign {
        current[i] = j;
    }
    let mut free_cols: Vec<usize> = all(dim);
    let mut deferred: Vec<usize> = Vec::new();
    let mut fixed_cost = 0.0;
    let mut pairs = Vec::new();

    for i in 0..dim {
        let cur_j = current[i];
        let cur_is_finite = is_finite_pair(solver, i, cur_j);

        // Finite candidates ascending; when the current partner is already
        // a finite match it is known feasible, so larger columns need not
        // be tried.
        let finite_candidates: Vec<usize> = free_cols
            .iter()
            .copied()
            .filter(|&j| {
                i < real_rows && j < real_cols && solver.costs.get(i, j).is_finite()
            })
            .take_while(|&j| !cur_is_finite || j <= cur_j)
            .collect();

        let mut committed = None;
        for &j in &finite_candidates {
            if cur_is_finite && j == cur_j {
                committed = Some(j);
                break;
            }
            let remaining_rows: Vec<usize> =
                deferred.iter().copied().chain(i + 1..dim).collect();
            let sub_cols: Vec<usize> =
                free_cols.iter().copied().filter(|&c| c != j).collect();
            let (sub_total, sub_assign) = solver.solve(&remaining_rows, &sub_cols);
            let trial = fixed_cost + solver.cost(i, j) + sub_total;
            if (trial - base_total).abs() <= tol {
                committed = Some(j);
                for &(r, c) in &sub_assign {
                    current[r] = c;
                }
                break;
            }
        }
        match committed {
            Some(j) => {
                fixed_cost += solver.cost(i, j);
                free_cols.retain(|&c| c != j);
                pairs.push((i, j, solver.costs.get(i, j)));
            }
            None => deferred.push(i),
        }
    }
    pairs
}

fn is_finite_pair(solver: &Padded<'_>, i: usize, j: usize) -> bool {
    i < solver.costs.rows && j < solver.costs.cols && solver.costs.get(i, j).is_finite()
}
