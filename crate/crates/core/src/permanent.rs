//! Matrix permanents via Ryser's formula with Gray-code subset iteration.

use nalgebra::{DMatrix, Scalar};
use num_traits::{One, Zero};
use std::ops::{AddAssign, Mul, SubAssign};

use crate::{Result, SimError, C64};

/// Practical size cap: cost is O(k·2^k).
pub const MAX_PERMANENT_DIM: usize = 30;

/// Permanent of a square matrix, O(k·2^k).
///
/// Works over any commutative ring scalar, so integer matrices are exact.
/// The 0x0 permanent is 1 (empty product convention).
pub fn permanent<T>(matrix: &DMatrix<T>) -> Result<T>
where
    T: Scalar + Copy + Zero + One + AddAssign + SubAssign + Mul<Output = T>,
{
    let k = matrix.nrows();
    if k != matrix.ncols() {
        return Err(SimError::NotSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    if k > MAX_PERMANENT_DIM {
        return Err(SimError::Parameter(format!(
            "permanent dimension {k} exceeds cap {MAX_PERMANENT_DIM}"
        )));
    }
    if k == 0 {
        return Ok(T::one());
    }
    // Per(A) = sum over non-empty column subsets S of
    // (-1)^(k-|S|) * prod_i sum_{j in S} a_ij.
    // Gray-code order toggles one column per step, keeping the row sums
    // incremental.
    let mut row_sums = vec![T::zero(); k];
    let mut total = T::zero();
    let mut gray: u64 = 0;
    for t in 1u64..(1u64 << k) {
        let j = t.trailing_zeros() as usize;
        let bit = 1u64 << j;
        gray ^= bit;
        if gray & bit != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += matrix[(i, j)];
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= matrix[(i, j)];
            }
        }
        let mut prod = T::one();
        for rs in &row_sums {
            prod = prod * *rs;
        }
        if (k as u32 - gray.count_ones()).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Submatrix of `u` with row `i` repeated `row_occ[i]` times and column `j`
/// repeated `col_occ[j]` times, in index order.
///
/// Occupation vectors are aligned with the matrix dimensions; the result is
/// square when the occupations sum to the same total.
pub fn occupation_submatrix(u: &DMatrix<C64>, row_occ: &[usize], col_occ: &[usize]) -> DMatrix<C64> {
    let rows: Vec<usize> = expand_occupations(row_occ);
    let cols: Vec<usize> = expand_occupations(col_occ);
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])])
}

/// Index list with index `i` repeated `occ[i]` times.
pub fn expand_occupations(occ: &[usize]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn identity_permanent_is_one() {
        for k in 0..=5 {
            let m = DMatrix::<C64>::identity(k, k);
            let p = permanent(&m).unwrap();
            assert!((p - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn all_ones_integer_exact() {
        // Per(J_k) = k!
        let mut expect = 1i64;
        for k in 1..=7usize {
            expect *= k as i64;
            let m = DMatrix::<i64>::from_element(k, k, 1);
            assert_eq!(permanent(&m).unwrap(), expect);
        }
    }

    #[test]
    fn two_by_two_formula() {
        let m = dmatrix![
            C64::new(1.0, 2.0), C64::new(0.5, -1.0);
            C64::new(-2.0, 0.0), C64::new(3.0, 1.0)
        ];
        let want = m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)];
        assert!((permanent(&m).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn balanced_splitter_permanent_vanishes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = dmatrix![
            C64::new(s, 0.0), C64::new(-s, 0.0);
            C64::new(s, 0.0), C64::new(s, 0.0)
        ];
        assert!(permanent(&m).unwrap().norm() < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        let m = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(
            permanent(&m),
            Err(SimError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn occupation_expansion() {
        assert_eq!(expand_occupations(&[2, 0, 1]), vec![0, 0, 2]);
        let u = DMatrix::<C64>::from_fn(2, 2, |r, c| C64::new((2 * r + c) as f64, 0.0));
        let s = occupation_submatrix(&u, &[2, 0], &[1, 1]);
        assert_eq!(s.nrows(), 2);
        assert_eq!(s[(0, 0)], u[(0, 0)]);
        assert_eq!(s[(1, 1)], u[(0, 1)]);
    }
}
