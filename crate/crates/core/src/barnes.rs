//! Sign lifting of binary check matrices.
//!
//! Takes rows over {0,1} and searches for a replacement of the 1-entries by
//! +-1 such that the real symplectic products between rows reproduce a
//! prescribed antisymmetric pattern over {0, +-1}. This is how discrete-code
//! check matrices get imported into the continuous-variable setting.

use crate::error::{Error, Result};
use crate::phase::PhaseVector;
use crate::scalar::Scalar;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Target symplectic-product pattern: `target[i][j] = <row_i, row_j>`,
/// antisymmetric with entries in {-1, 0, 1}.
pub type PairingPattern = Vec<Vec<i8>>;

/// Pattern with every product zero: fully commuting rows.
pub fn zero_pattern(rows: usize) -> PairingPattern {
    vec![vec![0; rows]; rows]
}

const EXHAUSTIVE_SIGN_LIMIT: u32 = 20;
const DFS_NODE_BUDGET: u64 = 1 << 22;
const HILL_CLIMB_RESTARTS: u32 = 64;
const HILL_CLIMB_SWEEPS: u32 = 200;

/// Assigns signs to the 1-entries of `binary_rows` (dimension `2n`, split
/// `(p|x)`) so that all pairwise symplectic products match `target`.
/// Zero entries stay zero.
///
/// Up to 20 free signs the search is exhaustive (depth-first over rows with
/// pruning, enumeration order all-plus first), so a failure is a proof that
/// no assignment exists. Beyond that, exhaustion falls back to seeded
/// hill-climbing restarts on the number of violated pattern entries;
/// a failure then only means the search gave up.
pub fn barnes_lift(binary_rows: &[Vec<u8>], target: &PairingPattern) -> Result<Vec<PhaseVector>> {
    let nrows = binary_rows.len();
    if target.len() != nrows || target.iter().any(|r| r.len() != nrows) {
        return Err(Error::BadShape {
            rows: target.len(),
            cols: target.first().map_or(0, |r| r.len()),
        });
    }
    for i in 0..nrows {
        for j in 0..nrows {
            if target[i][j] != -target[j][i] || target[i][j].abs() > 1 {
                return Err(Error::Unsolvable(format!(
                    "pattern is not antisymmetric over {{0,±1}} at ({i},{j})"
                )));
            }
        }
    }
    let dim = binary_rows.first().map_or(0, |r| r.len());
    if dim % 2 != 0 || binary_rows.iter().any(|r| r.len() != dim) {
        return Err(Error::BadShape {
            rows: nrows,
            cols: dim,
        });
    }
    if binary_rows.iter().any(|r| r.iter().any(|&b| b > 1)) {
        return Err(Error::Unsolvable("rows must be binary".into()));
    }

    let free_signs: u32 = binary_rows
        .iter()
        .map(|r| r.iter().filter(|&&b| b == 1).count() as u32)
        .sum();

    let mut signed: Vec<Vec<i8>> = binary_rows
        .iter()
        .map(|r| r.iter().map(|&b| b as i8).collect())
        .collect();

    let mut budget = DFS_NODE_BUDGET;
    if dfs_assign(binary_rows, target, &mut signed, 0, &mut budget) {
        return Ok(to_vectors(&signed));
    }
    if free_signs <= EXHAUSTIVE_SIGN_LIMIT && budget > 0 {
        // The search space was fully enumerated: provably unsatisfiable.
        return Err(Error::SignSearchExhausted);
    }
    if let Some(found) = hill_climb(binary_rows, target) {
        return Ok(to_vectors(&found));
    }
    Err(Error::SignSearchExhausted)
}

fn to_vectors(signed: &[Vec<i8>]) -> Vec<PhaseVector> {
    signed
        .iter()
        .map(|r| {
            let flat: Vec<Scalar> = r.iter().map(|&v| Scalar::from_int(v as i64)).collect();
            PhaseVector::from_flat(&flat).expect("even dimension checked")
        })
        .collect()
}

fn product(a: &[i8], b: &[i8]) -> i64 {
    let m = a.len() / 2;
    let mut acc = 0i64;
    for i in 0..m {
        acc += a[i] as i64 * b[m + i] as i64;
        acc -= a[m + i] as i64 * b[i] as i64;
    }
    acc
}

/// Depth-first assignment row by row, checking each candidate row against
/// all rows already fixed. Sign masks enumerate ascending, so the all-plus
/// assignment is tried first and the result is deterministic.
fn dfs_assign(
    binary: &[Vec<u8>],
    target: &PairingPattern,
    signed: &mut Vec<Vec<i8>>,
    row: usize,
    budget: &mut u64,
) -> bool {
    if row == binary.len() {
        return true;
    }
    let one_positions: Vec<usize> = binary[row]
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| i)
        .collect();
    if one_positions.len() >= 63 {
        // Too wide to enumerate; drain the budget so the caller falls back
        // to hill climbing.
        *budget = 0;
        return false;
    }
    let combos: u64 = 1 << one_positions.len();
    for mask in 0..combos {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        for (bit, &pos) in one_positions.iter().enumerate() {
            signed[row][pos] = if mask >> bit & 1 == 0 { 1 } else { -1 };
        }
        let consistent =
            (0..row).all(|prev| product(&signed[prev], &signed[row]) == target[prev][row] as i64);
        if consistent && dfs_assign(binary, target, signed, row + 1, budget) {
            return true;
        }
    }
    // Restore the all-plus pattern for this row before backtracking.
    for &pos in &one_positions {
        signed[row][pos] = 1;
    }
    false
}

fn violations(signed: &[Vec<i8>], target: &PairingPattern) -> u32 {
    let mut count = 0;
    for i in 0..signed.len() {
        for j in (i + 1)..signed.len() {
            if product(&signed[i], &signed[j]) != target[i][j] as i64 {
                count += 1;
            }
        }
    }
    count
}

/// Greedy descent on the violation count with seeded random restarts.
fn hill_climb(binary: &[Vec<u8>], target: &PairingPattern) -> Option<Vec<Vec<i8>>> {
    let slots: Vec<(usize, usize)> = binary
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba11);
    for _ in 0..HILL_CLIMB_RESTARTS {
        let mut signed: Vec<Vec<i8>> = binary
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&b| {
                        if b == 0 {
                            0
                        } else if rng.gen::<bool>() {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect()
            })
            .collect();
        let mut current = violations(&signed, target);
        for _ in 0..HILL_CLIMB_SWEEPS {
            if current == 0 {
                return Some(signed);
            }
            let mut improved = false;
            for &(i, j) in &slots {
                signed[i][j] = -signed[i][j];
                let next = violations(&signed, target);
                if next < current {
                    current = next;
                    improved = true;
                } else {
                    signed[i][j] = -signed[i][j];
                }
            }
            if !improved {
                // Kick a random slot to escape the plateau.
                let &(i, j) = &slots[rng.gen_range(0..slots.len())];
                signed[i][j] = -signed[i][j];
                current = violations(&signed, target);
            }
        }
        if current == 0 {
            return Some(signed);
        }
    }
    None
}
