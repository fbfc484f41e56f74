//! Randomized positive spanning poll directions on the MADS mesh.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Generates N+1 integer mesh directions forming a positive spanning set of
/// R^N: a random nonsingular lower-triangular basis (diagonal +/-`ratio`,
/// sub-diagonal entries in (-`ratio`, `ratio`)), row/column shuffled, plus
/// the negated sum of the basis. `ratio` is the frame-to-mesh size ratio,
/// so the poll points sit on the mesh lattice at frame-size distance.
pub fn poll_directions(n: usize, ratio: i64, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    assert!(n >= 1, "dimension must be positive");
    assert!(ratio >= 1, "frame/mesh ratio must be at least 1");
    let mut basis = vec![vec![0i64; n]; n];
    for i in 0..n {
        basis[i][i] = if rng.gen::<bool>() { ratio } else { -ratio };
        for j in 0..i {
            basis[i][j] = rng.gen_range(-(ratio - 1)..=(ratio - 1));
        }
    }
    // Shuffle rows and columns so the triangular structure does not bias
    // the poll toward the leading dimensions.
    let row_perm = random_permutation(n, rng);
    let col_perm = random_permutation(n, rng);
    let mut dirs: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| basis[row_perm[i]][col_perm[j]]).collect())
        .collect();
    let negated_sum: Vec<i64> = (0..n).map(|j| -dirs.iter().map(|d| d[j]).sum::<i64>()).collect();
    dirs.push(negated_sum);
    dirs
}

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// True when the N+1 directions positively span R^N, using the standard
/// certificate for minimal positive bases: the first N directions are
/// linearly independent and the last is a strictly negative combination of
/// them (here, their exact negated sum, i.e. all weights equal to one).
pub fn positively_spans(dirs: &[Vec<i64>]) -> bool {
    let n = match dirs.first() {
        Some(d) => d.len(),
        None => return false,
    };
    if dirs.len() != n + 1 || dirs.iter().any(|d| d.len() != n) {
        return false;
    }
    for j in 0..n {
        if dirs.iter().map(|d| d[j]).sum::<i64>() != 0 {
            return false;
        }
    }
    integer_determinant(&dirs[..n]) != 0
}

/// Exact determinant of an integer matrix (rows) via fraction-free Bareiss
/// elimination in i128.
fn integer_determinant(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| c as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn produces_n_plus_one_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let dirs = poll_directions(n, 4, &mut rng);
            assert_eq!(dirs.len(), n + 1);
            assert!(dirs.iter().all(|d| d.len() == n));
        }
    }

    #[test]
    fn last_direction_is_negated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dirs = poll_directions(5, 8, &mut rng);
        for j in 0..5 {
            let total: i64 = dirs.iter().map(|d| d[j]).sum();
            assert_eq!(total, 0);
        }
    }

    #[test]
    fn directions_positively_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for ratio in [1, 2, 8, 64] {
                for _ in 0..20 {
                    let dirs = poll_directions(n, ratio, &mut rng);
                    assert!(positively_spans(&dirs), "n={n} ratio={ratio}");
                }
            }
        }
    }

    #[test]
    fn entries_bounded_by_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ratio = 16;
        let dirs = poll_directions(4, ratio, &mut rng);
        for d in dirs.iter().take(4) {
            assert!(d.iter().all(|&c| c.abs() <= ratio));
            assert!(d.iter().any(|&c| c.abs() == ratio));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = poll_directions(5, 4, &mut ChaCha8Rng::seed_from_u64(99));
        let b = poll_directions(5, 4, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
    }
}
