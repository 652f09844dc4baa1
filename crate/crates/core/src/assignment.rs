//! Minimum-cost assignment on square cost matrices.
//!
//! The shortest-augmenting-path formulation of the Hungarian method with row
//! and column potentials, O(n³). The peak-matching use cases are all n = 5,
//! where exhaustive search over the 120 permutations would also do; the
//! tests hold this implementation to that brute-force oracle.

/// Returns the column assigned to each row, minimizing the total cost of a
/// square matrix given as `cost[row][col]`.
///
/// All costs must be finite. Ties in total cost may resolve to any optimal
/// permutation.
pub fn solve(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(
        cost.iter().all(|row| row.len() == n),
        "cost matrix must be square"
    );
    debug_assert!(
        cost.iter().flatten().all(|c| c.is_finite()),
        "cost matrix must be finite"
    );
    if n == 0 {
        return Vec::new();
    }

    // Potentials and matching are 1-indexed over a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // way[j] = previous column on the alternating path to column j.
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Total cost of an assignment.
pub fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| cost[row][col])
        .sum()
}
