//! Maximum-weight bipartite assignment (Hungarian method with potentials).

/// Assigns rows to distinct columns maximizing the summed weight. Returns,
/// for each row, its column or `None` when the row is left unassigned
/// (only possible with more rows than columns). Weights must be >= 0.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let n = rows.max(cols);
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0);
    // Square cost matrix; padding has zero weight.
    let cost = |i: usize, j: usize| -> i64 {
        let w = weights.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
        max_w - w
    };

    // 1-based arrays; column 0 is a sentinel.
    let inf = i64::MAX / 4;
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
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
    let mut out = vec![None; rows];
    for (j, &i) in p.iter().enumerate().take(n + 1).skip(1) {
        if i >= 1 && i <= rows && j <= cols {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

pub fn assignment_weight(weights: &[Vec<i64>], assignment: &[Option<usize>]) -> i64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.and_then(|c| weights[i].get(c).copied()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive optimum over all injective row-to-column maps.
    fn brute_force(weights: &[Vec<i64>], cols: usize) -> i64 {
        fn go(weights: &[Vec<i64>], row: usize, used: &mut Vec<bool>, cols: usize) -> i64 {
            if row == weights.len() {
                return 0;
            }
            let mut best = go(weights, row + 1, used, cols);
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    let w = weights[row].get(c).copied().unwrap_or(0);
                    best = best.max(w + go(weights, row + 1, used, cols));
                    used[c] = false;
                }
            }
            best
        }
        go(weights, 0, &mut vec![false; cols], cols)
    }

    #[test]
    fn small_known_case() {
        let w = vec![vec![60, 40], vec![0, 0]];
        let a = max_weight_assignment(&w);
        assert_eq!(assignment_weight(&w, &a), 60);
        let w = vec![vec![5, 9, 1], vec![10, 3, 2], vec![8, 7, 4]];
        assert_eq!(assignment_weight(&w, &max_weight_assignment(&w)), 9 + 10 + 4);
    }

    #[test]
    fn rectangular_inputs() {
        let tall = vec![vec![3], vec![7], vec![5]];
        let a = max_weight_assignment(&tall);
        assert_eq!(a, vec![None, Some(0), None]);
        let wide = vec![vec![1, 8, 2]];
        assert_eq!(max_weight_assignment(&wide), vec![Some(1)]);
        assert!(max_weight_assignment(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn matches_brute_force(rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(0i64..50, 36)) {
            let w: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 6 + j]).collect()).collect();
            let a = max_weight_assignment(&w);
            let used: Vec<usize> = a.iter().flatten().copied().collect();
            let mut dedup = used.clone();
            dedup.sort();
            dedup.dedup();
            prop_assert_eq!(used.len(), dedup.len());
            prop_assert_eq!(assignment_weight(&w, &a), brute_force(&w, cols));
        }
    }
}
