//! Maximum-weight perfect matching on a square matrix with forbidden cells.

/// Minimum-cost assignment (Hungarian method with potentials, O(n^3)).
/// Returns `col_of_row`.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = i64::MAX / 4;
    // 1-based arrays; p[j] is the row matched to column j
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        col_of_row[p[j] - 1] = j - 1;
    }
    col_of_row
}

/// Best total weight over rows `rows` and columns `cols`, `None` when no
/// assignment avoids the forbidden (`None`) cells.
pub(crate) fn best_value(w: &[Vec<Option<i64>>], rows: &[usize], cols: &[usize]) -> Option<i64> {
    best_assignment(w, rows, cols).map(|(v, _)| v)
}

fn best_assignment(
    w: &[Vec<Option<i64>>],
    rows: &[usize],
    cols: &[usize],
) -> Option<(i64, Vec<usize>)> {
    let m = rows.len();
    debug_assert_eq!(m, cols.len());
    if m == 0 {
        return Some((0, Vec::new()));
    }
    let finite = rows
        .iter()
        .flat_map(|&i| cols.iter().filter_map(move |&j| w[i][j]));
    let (lo, hi) = finite.fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo > hi {
        return None;
    }
    // Any assignment using fewer forbidden cells beats any using more.
    let big = (m as i64 + 1) * (hi - lo + 1) + 1;
    let cost: Vec<Vec<i64>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| match w[i][j] {
                    Some(x) => hi - x,
                    None => big,
                })
                .collect()
        })
        .collect();
    let assign = min_cost_assignment(&cost);
    let mut total = 0;
    for (r, &c) in assign.iter().enumerate() {
        total += w[rows[r]][cols[c]]?;
    }
    Some((total, assign.iter().map(|&c| cols[c]).collect()))
}

/// Maximum-weight transversal. Among optimal transversals, returns the one
/// whose row-to-column assignment is lexicographically smallest.
pub(crate) fn max_transversal(w: &[Vec<Option<i64>>]) -> Option<(i64, Vec<(usize, usize)>)> {
    let n = w.len();
    let all: Vec<usize> = (0..n).collect();
    let (value, _) = best_assignment(w, &all, &all)?;
    let mut chosen = Vec::with_capacity(n);
    let mut free_cols: Vec<usize> = all.clone();
    let mut acc = 0;
    for i in 0..n {
        let rest_rows: Vec<usize> = (i + 1..n).collect();
        let mut picked = None;
        for (pos, &j) in free_cols.iter().enumerate() {
            let Some(x) = w[i][j] else { continue };
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(pos);
            if let Some(r) = best_value(w, &rest_rows, &rest_cols) {
                if acc + x + r == value {
                    picked = Some((pos, j, x));
                    break;
                }
            }
        }
        let (pos, j, x) = picked.expect("an optimal completion exists");
        free_cols.remove(pos);
        chosen.push((i, j));
        acc += x;
    }
    Some((value, chosen))
}
