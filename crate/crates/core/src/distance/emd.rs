//! Earth mover's distance routes: a closed-form prefix-sum formula for
//! equal-mass 1-D histograms, and a transportation-simplex solver for the
//! general (possibly unequal-mass) problem.
//!
//! Both return cost per unit of transported mass, with ground distance
//! `|i - j|` in bin-index units, so they can cross-check each other.

use super::DistanceError;

/// Closed-form 1-D EMD for equal-mass inputs: the L1 distance between the
/// two cumulative distributions, divided by the transported mass.
pub fn emd_cdf(x: &[f64], y: &[f64]) -> f64 {
    let total_x: f64 = x.iter().sum();
    let total_y: f64 = y.iter().sum();
    let flow = total_x.min(total_y);
    if flow <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut cost = 0.0;
    for i in 0..x.len().saturating_sub(1) {
        acc += x[i] - y[i];
        cost += acc.abs();
    }
    cost / flow
}

/// EMD via the transportation solver. Handles unequal total masses by
/// partial matching: the cost of shipping `min(sum x, sum y)` mass, divided
/// by that mass.
pub fn emd_transport(x: &[f64], y: &[f64]) -> Result<f64, DistanceError> {
    let xs: Vec<(usize, f64)> = positive_masses(x);
    let ys: Vec<(usize, f64)> = positive_masses(y);
    if xs.is_empty() || ys.is_empty() {
        return Err(DistanceError::ZeroMass);
    }
    let supply: Vec<f64> = xs.iter().map(|&(_, m)| m).collect();
    let demand: Vec<f64> = ys.iter().map(|&(_, m)| m).collect();
    let cost = min_cost_transport(&supply, &demand, |i, j| {
        (xs[i].0 as f64 - ys[j].0 as f64).abs()
    })?;
    let flow = supply.iter().sum::<f64>().min(demand.iter().sum::<f64>());
    Ok(cost / flow)
}

fn positive_masses(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|&(_, &m)| m > 0.0)
        .map(|(i, &m)| (i, m))
        .collect()
}

/// Minimum total cost of shipping `min(sum supply, sum demand)` mass from
/// suppliers to consumers under per-pair unit costs, by the transportation
/// simplex (u-v method). Unequal totals are balanced with a zero-cost dummy
/// node on the deficit side.
pub fn min_cost_transport(
    supply: &[f64],
    demand: &[f64],
    cost: impl Fn(usize, usize) -> f64,
) -> Result<f64, DistanceError> {
    let sum_s: f64 = supply.iter().sum();
    let sum_d: f64 = demand.iter().sum();
    if supply.is_empty() || demand.is_empty() || sum_s <= 0.0 || sum_d <= 0.0 {
        return Err(DistanceError::ZeroMass);
    }

    let mut s: Vec<f64> = supply.to_vec();
    let mut d: Vec<f64> = demand.to_vec();
    let imbalance = sum_s - sum_d;
    let tol_balance = 1e-12 * sum_s.max(sum_d);
    // Dummy rows/columns absorb the slack of the partial-matching problem.
    let mut dummy_row = usize::MAX;
    let mut dummy_col = usize::MAX;
    if imbalance > tol_balance {
        dummy_col = d.len();
        d.push(imbalance);
    } else if imbalance < -tol_balance {
        dummy_row = s.len();
        s.push(-imbalance);
    }

    let m = s.len();
    let n = d.len();
    let costs: Vec<f64> = (0..m * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == dummy_row || j == dummy_col {
                0.0
            } else {
                cost(i, j)
            }
        })
        .collect();
    let c = |i: usize, j: usize| costs[i * n + j];
    let cost_scale = costs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-12 * (1.0 + cost_scale);

    let mut basis = northwest_corner(&s, &d);
    debug_assert_eq!(basis.len(), m + n - 1);

    // Most-negative entering rule normally; first-negative (Bland) once the
    // pivot count suggests possible cycling.
    let bland_after = 50 * (m + n);
    let max_pivots = 2000 * (m + n);
    for pivot in 0..max_pivots {
        let (u, v) = compute_duals(&basis, m, n, &c);
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -tol;
        'scan: for i in 0..m {
            for j in 0..n {
                let rc = c(i, j) - u[i] - v[j];
                if rc < best {
                    best = rc;
                    entering = Some((i, j));
                    if pivot >= bland_after {
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let total = basis.iter().map(|b| b.flow * c(b.row, b.col)).sum();
            return Ok(total);
        };
        pivot_basis(&mut basis, m, n, ei, ej);
    }
    Err(DistanceError::NoConvergence)
}

#[derive(Debug, Clone, Copy)]
struct BasicCell {
    row: usize,
    col: usize,
    flow: f64,
}

/// Northwest-corner initial basic feasible solution: exactly m + n - 1
/// cells forming a spanning tree, zero-flow cells included on degeneracy.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<BasicCell> {
    let m = supply.len();
    let n = demand.len();
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let flow = s[i].min(d[j]);
        basis.push(BasicCell { row: i, col: j, flow });
        s[i] -= flow;
        d[j] -= flow;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 {
            i += 1;
        } else if s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

/// Dual values solved over the basis spanning tree with u[0] = 0.
fn compute_duals(
    basis: &[BasicCell],
    m: usize,
    n: usize,
    c: &impl Fn(usize, usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut row_cells: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut col_cells: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, cell) in basis.iter().enumerate() {
        row_cells[cell.row].push(idx);
        col_cells[cell.col].push(idx);
    }
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut stack: Vec<(bool, usize)> = vec![(true, 0)]; // (is_row, index)
    while let Some((is_row, idx)) = stack.pop() {
        if is_row {
            for &ci in &row_cells[idx] {
                let cell = basis[ci];
                if v[cell.col].is_nan() {
                    v[cell.col] = c(cell.row, cell.col) - u[idx];
                    stack.push((false, cell.col));
                }
            }
        } else {
            for &ci in &col_cells[idx] {
                let cell = basis[ci];
                if u[cell.row].is_nan() {
                    u[cell.row] = c(cell.row, cell.col) - v[idx];
                    stack.push((true, cell.row));
                }
            }
        }
    }
    (u, v)
}

/// Brings (ei, ej) into the basis: finds the unique tree cycle it closes,
/// shifts the bottleneck flow around it, and drops the blocking cell.
fn pivot_basis(basis: &mut Vec<BasicCell>, m: usize, n: usize, ei: usize, ej: usize) {
    // Node ids: rows 0..m, columns m..m+n.
    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes]; // (neighbor, cell idx)
    for (idx, cell) in basis.iter().enumerate() {
        adj[cell.row].push((m + cell.col, idx));
        adj[m + cell.col].push((cell.row, idx));
    }
    // BFS path from the entering row to the entering column through the tree.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut visited = vec![false; nodes];
    visited[ei] = true;
    let mut queue = std::collections::VecDeque::from([ei]);
    while let Some(node) = queue.pop_front() {
        if node == m + ej {
            break;
        }
        for &(next, cell_idx) in &adj[node] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, cell_idx));
                queue.push_back(next);
            }
        }
    }

    // Walk back from the entering column; alternate -, +, -, ... along the
    // path (the entering cell itself takes +).
    let mut minus_cells = Vec::new();
    let mut plus_cells = Vec::new();
    let mut node = m + ej;
    let mut negative = true;
    while let Some((prev, cell_idx)) = parent[node] {
        if negative {
            minus_cells.push(cell_idx);
        } else {
            plus_cells.push(cell_idx);
        }
        negative = !negative;
        node = prev;
    }
    debug_assert!(!minus_cells.is_empty());

    let theta = minus_cells
        .iter()
        .map(|&ci| basis[ci].flow)
        .fold(f64::INFINITY, f64::min);
    // Among bottleneck ties, drop the smallest (row, col) so the pivot is
    // deterministic and the Bland fallback cannot cycle.
    let leaving_cell = minus_cells
        .iter()
        .copied()
        .filter(|&ci| basis[ci].flow <= theta)
        .min_by_key(|&ci| (basis[ci].row, basis[ci].col))
        .expect("cycle always has a minus edge");

    for &ci in &minus_cells {
        basis[ci].flow = (basis[ci].flow - theta).max(0.0);
    }
    for &ci in &plus_cells {
        basis[ci].flow += theta;
    }
    basis[leaving_cell] = BasicCell {
        row: ei,
        col: ej,
        flow: theta,
    };
}
