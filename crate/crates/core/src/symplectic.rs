//! Symplectic matrices, subspaces of phase space, and symplectic
//! Gram-Schmidt orthogonalization.
//!
//! The form is `<u,v> = u_p . v_x - u_x . v_p`, i.e. `J = [[0, I], [-I, 0]]`
//! in `(p|x)` block ordering. Row vectors transform by `u -> u Y^T`, which
//! preserves the form whenever `Y J Y^T = J`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase::{symplectic_product, PhaseVector};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real `2n x 2n` matrix with `Y J Y^T = J`, stored in `(p|x)` block order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    modes: usize,
    rows: Vec<Vec<Scalar>>,
}

impl SymplecticMatrix {
    /// Wraps a square even-dimensional matrix without checking the
    /// symplectic condition; see [`SymplecticMatrix::is_symplectic`].
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n % 2 != 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadShape {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Ok(SymplecticMatrix { modes: n / 2, rows })
    }

    pub fn identity(modes: usize) -> Self {
        let dim = 2 * modes;
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            Scalar::one()
                        } else {
                            Scalar::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        SymplecticMatrix { modes, rows }
    }

    /// The standard form matrix `J = [[0, I], [-I, 0]]`, itself symplectic.
    pub fn standard_form(modes: usize) -> Self {
        let dim = 2 * modes;
        let mut rows = vec![vec![Scalar::zero(); dim]; dim];
        for i in 0..modes {
            rows[i][modes + i] = Scalar::one();
            rows[modes + i][i] = Scalar::from_int(-1);
        }
        SymplecticMatrix { modes, rows }
    }

    /// Relabels modes: entry `new_of_old[m]` is the new index of mode `m`.
    /// Permutations act identically on both quadrature halves, so the
    /// result is symplectic.
    pub fn mode_permutation(new_of_old: &[usize]) -> Result<Self> {
        let modes = new_of_old.len();
        let mut seen = vec![false; modes];
        for &m in new_of_old {
            if m >= modes || seen[m] {
                return Err(Error::BadShape {
                    rows: modes,
                    cols: m,
                });
            }
            seen[m] = true;
        }
        let dim = 2 * modes;
        let mut rows = vec![vec![Scalar::zero(); dim]; dim];
        for (old, &new) in new_of_old.iter().enumerate() {
            rows[new][old] = Scalar::one();
            rows[modes + new][modes + old] = Scalar::one();
        }
        Ok(SymplecticMatrix { modes, rows })
    }

    pub fn dim_modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.rows[i][j]
    }

    pub fn transpose(&self) -> Self {
        let dim = self.dim();
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| self.rows[j][i].clone()).collect())
            .collect();
        SymplecticMatrix {
            modes: self.modes,
            rows,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: other.modes,
            });
        }
        Ok(SymplecticMatrix {
            modes: self.modes,
            rows: linalg::matmul(&self.rows, &other.rows),
        })
    }

    /// `max |Y J Y^T - J|` over all entries.
    pub fn symplectic_residual(&self) -> f64 {
        let j = Self::standard_form(self.modes);
        let prod = linalg::matmul(&linalg::matmul(&self.rows, &j.rows), &self.transpose().rows);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                let diff = &prod[i][k] - &j.rows[i][k];
                worst = worst.max(diff.magnitude());
            }
        }
        worst
    }

    /// Exact residual test: `Y J Y^T == J` entrywise for exact matrices,
    /// `|residual| <= tol` otherwise.
    pub fn is_symplectic(&self, tol: f64) -> bool {
        let all_exact = self.rows.iter().all(|r| r.iter().all(|s| s.is_exact()));
        let effective = if all_exact { 0.0 } else { tol };
        self.symplectic_residual() <= effective
    }

    /// Inverse through the form: `Y^{-1} = -J Y^T J`. Exact for exact
    /// entries; meaningful only when the matrix is symplectic.
    pub fn inverse_symplectic(&self) -> Self {
        let j = Self::standard_form(self.modes);
        let minus_j: Vec<Vec<Scalar>> = j
            .rows
            .iter()
            .map(|r| r.iter().map(|s| -s).collect())
            .collect();
        let yt = self.transpose();
        let rows = linalg::matmul(&linalg::matmul(&minus_j, &yt.rows), &j.rows);
        SymplecticMatrix {
            modes: self.modes,
            rows,
        }
    }

    /// Row action `u -> u Y^T`: how observable vectors (check and gauge
    /// rows) transform under the encoding this matrix represents.
    pub fn apply_to_row(&self, u: &PhaseVector) -> Result<PhaseVector> {
        if u.dim_modes() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: u.dim_modes(),
            });
        }
        let flat = u.to_flat();
        let dim = self.dim();
        let mut out = vec![Scalar::zero(); dim];
        for (j, out_j) in out.iter_mut().enumerate() {
            let mut acc = Scalar::zero();
            for (k, u_k) in flat.iter().enumerate() {
                acc += &(u_k * &self.rows[j][k]);
            }
            *out_j = acc;
        }
        PhaseVector::from_flat(&out)
    }

    /// Covariant image of an error vector: the unique map such that the
    /// syndrome pairing of any transformed row against the image equals the
    /// pairing of the original row against the original error.
    pub fn covariant_error_image(&self, e: &PhaseVector) -> Result<PhaseVector> {
        Ok(self.apply_to_row(&e.flip_p())?.flip_p())
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_f64()).collect())
            .collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.modes == other.modes
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(u, v)| u.approx_eq(v, tol)))
    }
}

/// Convenience check mirroring [`SymplecticMatrix::is_symplectic`] on raw
/// rows; rejects odd dimensions.
pub fn is_symplectic_rows(rows: &[Vec<Scalar>], tol: f64) -> Result<bool> {
    let m = SymplecticMatrix::from_rows(rows.to_vec())?;
    Ok(m.is_symplectic(tol))
}

/// Row-spanned subspace of phase space over `ambient` modes.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<PhaseVector>,
}

impl Subspace {
    /// Requires the rows to be linearly independent.
    pub fn new(ambient: usize, basis: Vec<PhaseVector>, tol: f64) -> Result<Self> {
        for (i, v) in basis.iter().enumerate() {
            if v.dim_modes() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: v.dim_modes(),
                });
            }
            let prior: Vec<Vec<Scalar>> = basis[..i].iter().map(|b| b.to_flat()).collect();
            if linalg::in_span(&prior, &v.to_flat(), tol) {
                return Err(Error::LinearlyDependent { index: i });
            }
        }
        Ok(Subspace { ambient, basis })
    }

    /// Spanning rows that may be dependent; keeps an independent subset.
    pub fn spanned_by(ambient: usize, rows: &[PhaseVector], tol: f64) -> Result<Self> {
        let mut basis: Vec<PhaseVector> = Vec::new();
        for v in rows {
            if v.dim_modes() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: v.dim_modes(),
                });
            }
            let flat: Vec<Vec<Scalar>> = basis.iter().map(|b| b.to_flat()).collect();
            if !linalg::in_span(&flat, &v.to_flat(), tol) {
                basis.push(v.clone());
            }
        }
        Ok(Subspace { ambient, basis })
    }

    pub fn ambient_modes(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[PhaseVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Membership in the row span.
    pub fn contains(&self, v: &PhaseVector, tol: f64) -> Result<bool> {
        if v.dim_modes() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got: v.dim_modes(),
            });
        }
        let rows: Vec<Vec<Scalar>> = self.basis.iter().map(|b| b.to_flat()).collect();
        Ok(linalg::in_span(&rows, &v.to_flat(), tol))
    }

    /// Membership in the symplectic dual: `<v, b> = 0` for every basis row.
    pub fn dual_contains(&self, v: &PhaseVector, tol: f64) -> Result<bool> {
        if v.dim_modes() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got: v.dim_modes(),
            });
        }
        for b in &self.basis {
            if !symplectic_product(v, b)?.is_zero_within(tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Splits independent rows into hyperbolic pairs and an isotropic remainder
/// spanning the same subspace.
///
/// Within each returned pair `<u,v> = 1`; every other product among the
/// returned vectors vanishes. Rational input keeps every product exact.
/// Partner selection is deterministic: exact rows pick the first nonzero
/// product, float rows the largest magnitude, ties by lowest index.
pub fn symplectic_gram_schmidt(
    rows: &[PhaseVector],
    tol: f64,
) -> Result<(Vec<(PhaseVector, PhaseVector)>, Vec<PhaseVector>)> {
    // Independence check up front, reporting the offending row.
    let mut seen: Vec<Vec<Scalar>> = Vec::new();
    for (i, v) in rows.iter().enumerate() {
        if linalg::in_span(&seen, &v.to_flat(), tol) {
            return Err(Error::LinearlyDependent { index: i });
        }
        seen.push(v.to_flat());
    }

    let mut pool: Vec<PhaseVector> = rows.to_vec();
    let mut pairs = Vec::new();
    let mut isotropic = Vec::new();
    while !pool.is_empty() {
        let u = pool.remove(0);
        let mut partner: Option<(usize, Scalar)> = None;
        for (i, w) in pool.iter().enumerate() {
            let prod = symplectic_product(&u, w)?;
            if prod.is_zero_within(tol) {
                continue;
            }
            match &partner {
                None => partner = Some((i, prod)),
                Some((_, best)) => {
                    if !prod.is_exact() && prod.magnitude() > best.magnitude() {
                        partner = Some((i, prod));
                    }
                }
            }
            if partner.as_ref().is_some_and(|(_, p)| p.is_exact()) {
                break;
            }
        }
        match partner {
            None => isotropic.push(u),
            Some((idx, prod)) => {
                let v = pool.remove(idx).scale(&prod.recip());
                // Sweep the pair out of everything left in the pool.
                for w in pool.iter_mut() {
                    let a = symplectic_product(&v, w)?;
                    let b = symplectic_product(&u, w)?;
                    *w = w.add(&u.scale(&a))?.sub(&v.scale(&b))?;
                }
                pairs.push((u, v));
            }
        }
    }
    Ok((pairs, isotropic))
}

/// Completes a partial symplectic family to a full basis.
///
/// `pairs` are existing hyperbolic pairs (product one inside, zero across)
/// and `isotropic` vectors commute with everything given. Returns one
/// partner per isotropic vector (product one with its mate, zero elsewhere)
/// plus hyperbolic pairs spanning the untouched remainder of phase space.
pub fn complete_symplectic_basis(
    pairs: &[(PhaseVector, PhaseVector)],
    isotropic: &[PhaseVector],
    modes: usize,
    tol: f64,
) -> Result<(Vec<PhaseVector>, Vec<(PhaseVector, PhaseVector)>)> {
    let dim = 2 * modes;

    // A functional row for the constraint <w, d> = c on the unknown d,
    // in flat (p|x) coordinates: <w, d> = (-w_x | w_p) . (d_p | d_x).
    let functional = |w: &PhaseVector| -> Vec<Scalar> {
        let mut row = Vec::with_capacity(dim);
        for i in 0..modes {
            row.push(-w.x_at(i));
        }
        for i in 0..modes {
            row.push(w.p_at(i).clone());
        }
        row
    };

    let mut constraint_rows: Vec<Vec<Scalar>> = Vec::new();
    for s in isotropic {
        constraint_rows.push(functional(s));
    }
    for (u, v) in pairs {
        constraint_rows.push(functional(u));
        constraint_rows.push(functional(v));
    }

    // One partner per isotropic vector: product one with its own mate, zero
    // with the other isotropic vectors and with every existing pair.
    let mut partners: Vec<PhaseVector> = Vec::new();
    for i in 0..isotropic.len() {
        let mut rhs = vec![Scalar::zero(); constraint_rows.len()];
        rhs[i] = Scalar::one();
        let x = linalg::solve_particular(&constraint_rows, &rhs, tol).ok_or_else(|| {
            Error::Unsolvable(format!("no symplectic partner for isotropic vector {i}"))
        })?;
        partners.push(PhaseVector::from_flat(&x)?);
    }
    // Partners may pair among themselves; cancel with the isotropic mates.
    for i in 0..partners.len() {
        for j in 0..i {
            let overlap = symplectic_product(&partners[i], &partners[j])?;
            if !overlap.is_zero_within(tol) {
                let corrected = partners[i].sub(&isotropic[j].scale(&overlap))?;
                partners[i] = corrected;
            }
        }
    }

    // The leftover symplectic complement: everything orthogonal to the
    // pairs, the isotropic vectors and their partners.
    let mut all_rows = constraint_rows;
    for d in &partners {
        all_rows.push(functional(d));
    }
    let kernel = linalg::nullspace(&all_rows, dim, tol);
    let kernel_vecs: Vec<PhaseVector> = kernel
        .iter()
        .map(|v| PhaseVector::from_flat(v))
        .collect::<Result<_>>()?;
    let (extra_pairs, leftover) = symplectic_gram_schmidt(&kernel_vecs, tol)?;
    if !leftover.is_empty() {
        return Err(Error::Unsolvable(
            "symplectic complement is degenerate".into(),
        ));
    }
    Ok((partners, extra_pairs))
}

/// Deterministic random symplectic matrix with exact rational entries,
/// built by running symplectic Gram-Schmidt to completion on random
/// small-integer rows and stacking the resulting basis.
pub fn random_symplectic(modes: usize, seed: u64) -> SymplecticMatrix {
    let dim = 2 * modes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let rows: Vec<PhaseVector> = (0..dim)
            .map(|_| {
                let flat: Vec<Scalar> = (0..dim)
                    .map(|_| Scalar::from_int(rng.gen_range(-2..=2)))
                    .collect();
                PhaseVector::from_flat(&flat).expect("even length")
            })
            .collect();
        let Ok((pairs, isotropic)) = symplectic_gram_schmidt(&rows, 0.0) else {
            continue; // dependent sample, draw again
        };
        if !isotropic.is_empty() || pairs.len() != modes {
            continue;
        }
        // Basis ordered (u_1..u_n, v_1..v_n) has Gram matrix J, so the
        // stack is symplectic.
        let mut stacked: Vec<Vec<Scalar>> = Vec::with_capacity(dim);
        for (u, _) in &pairs {
            stacked.push(u.to_flat());
        }
        for (_, v) in &pairs {
            stacked.push(v.to_flat());
        }
        let m = SymplecticMatrix::from_rows(stacked).expect("square even");
        debug_assert!(m.is_symplectic(0.0));
        return m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(p: &[i64], x: &[i64]) -> PhaseVector {
        PhaseVector::new(
            p.iter().map(|&n| Scalar::from_int(n)).collect(),
            x.iter().map(|&n| Scalar::from_int(n)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_and_form_are_symplectic() {
        assert!(SymplecticMatrix::identity(3).is_symplectic(0.0));
        assert!(SymplecticMatrix::standard_form(2).is_symplectic(0.0));
    }

    #[test]
    fn anisotropic_scaling_is_not_symplectic() {
        // p -> 2p, x -> x scales the form by two.
        let rows = vec![
            vec![Scalar::from_int(2), Scalar::zero()],
            vec![Scalar::zero(), Scalar::one()],
        ];
        let m = SymplecticMatrix::from_rows(rows).unwrap();
        assert!(!m.is_symplectic(0.0));
    }

    #[test]
    fn odd_dimension_rejected() {
        let rows = vec![vec![Scalar::one(); 3]; 3];
        assert!(SymplecticMatrix::from_rows(rows).is_err());
    }

    #[test]
    fn squeeze_is_symplectic_and_inverts() {
        // p -> p/2, x -> 2x preserves the form.
        let rows = vec![
            vec![Scalar::ratio(1, 2), Scalar::zero()],
            vec![Scalar::zero(), Scalar::from_int(2)],
        ];
        let m = SymplecticMatrix::from_rows(rows).unwrap();
        assert!(m.is_symplectic(0.0));
        let inv = m.inverse_symplectic();
        let prod = m.matmul(&inv).unwrap();
        assert!(prod.approx_eq(&SymplecticMatrix::identity(1), 0.0));
    }

    #[test]
    fn row_action_preserves_products() {
        let y = SymplecticMatrix::standard_form(2);
        let u = pv(&[1, 2], &[3, 4]);
        let v = pv(&[0, 1], &[-1, 2]);
        let before = symplectic_product(&u, &v).unwrap();
        let after =
            symplectic_product(&y.apply_to_row(&u).unwrap(), &y.apply_to_row(&v).unwrap()).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn covariant_image_preserves_syndrome_pairing() {
        use crate::phase::syndrome_pairing;
        let y = SymplecticMatrix::standard_form(2);
        let f = pv(&[1, -1], &[0, 2]);
        let e = pv(&[2, 0], &[1, 1]);
        let lhs = syndrome_pairing(
            &y.apply_to_row(&f).unwrap(),
            &y.covariant_error_image(&e).unwrap(),
        )
        .unwrap();
        let rhs = syndrome_pairing(&f, &e).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn subspace_membership_and_dual() {
        let s = Subspace::new(1, vec![pv(&[1], &[0])], 0.0).unwrap();
        assert!(s.contains(&PhaseVector::zero(1), 0.0).unwrap());
        assert!(s.contains(&pv(&[3], &[0]), 0.0).unwrap());
        assert!(!s.contains(&pv(&[0], &[1]), 0.0).unwrap());
        // Self-orthogonality puts the spanning row in its own dual.
        assert!(s.dual_contains(&pv(&[1], &[0]), 0.0).unwrap());
        assert!(!s.dual_contains(&pv(&[0], &[1]), 0.0).unwrap());
    }

    #[test]
    fn subspace_rejects_dependent_basis() {
        let err = Subspace::new(1, vec![pv(&[1], &[0]), pv(&[2], &[0])], 0.0).unwrap_err();
        match err {
            Error::LinearlyDependent { index } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gram_schmidt_pairs_the_plane() {
        let rows = vec![pv(&[1], &[0]), pv(&[0], &[1])];
        let (pairs, iso) = symplectic_gram_schmidt(&rows, 0.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(iso.is_empty());
        let (u, v) = &pairs[0];
        assert_eq!(symplectic_product(u, v).unwrap(), Scalar::one());
    }

    #[test]
    fn gram_schmidt_single_row_is_isotropic() {
        let rows = vec![pv(&[1], &[0])];
        let (pairs, iso) = symplectic_gram_schmidt(&rows, 0.0).unwrap();
        assert!(pairs.is_empty());
        assert_eq!(iso.len(), 1);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_rows() {
        let rows = vec![pv(&[1], &[1]), pv(&[2], &[2])];
        match symplectic_gram_schmidt(&rows, 0.0).unwrap_err() {
            Error::LinearlyDependent { index } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gram_schmidt_output_products_are_clean() {
        let rows = vec![
            pv(&[1, 1], &[0, 1]),
            pv(&[0, 1], &[1, 0]),
            pv(&[1, 0], &[0, 2]),
            pv(&[0, 0], &[0, 1]),
        ];
        let (pairs, iso) = symplectic_gram_schmidt(&rows, 0.0).unwrap();
        assert_eq!(2 * pairs.len() + iso.len(), 4);
        let mut all: Vec<PhaseVector> = Vec::new();
        for (u, v) in &pairs {
            all.push(u.clone());
            all.push(v.clone());
        }
        all.extend(iso.iter().cloned());
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let prod = symplectic_product(a, b).unwrap();
                let expect = pair_table_entry(&pairs, i, j);
                assert_eq!(prod, Scalar::from_int(expect), "products ({i},{j})");
            }
        }
    }

    // Expected product table when pairs are stored flat ahead of isotropic
    // vectors: (2k, 2k+1) -> +1, (2k+1, 2k) -> -1, everything else zero.
    fn pair_table_entry(pairs: &[(PhaseVector, PhaseVector)], i: usize, j: usize) -> i64 {
        let np = 2 * pairs.len();
        if i < np && j < np && i / 2 == j / 2 {
            if i + 1 == j && i % 2 == 0 {
                return 1;
            }
            if j + 1 == i && j % 2 == 0 {
                return -1;
            }
        }
        0
    }

    #[test]
    fn random_symplectic_is_exactly_symplectic() {
        for seed in 0..4 {
            let m = random_symplectic(3, seed);
            assert!(m.is_symplectic(0.0));
            let inv = m.inverse_symplectic();
            let prod = m.matmul(&inv).unwrap();
            assert!(prod.approx_eq(&SymplecticMatrix::identity(3), 0.0));
        }
    }

    #[test]
    fn completion_builds_a_full_basis() {
        // One isotropic stabilizer on mode 0 plus one existing pair on mode 1
        // of a three-mode space; completion must add one partner and one pair.
        let iso = vec![pv(&[1, 0, 0], &[0, 0, 0])];
        let pairs = vec![(pv(&[0, 1, 0], &[0, 0, 0]), pv(&[0, 0, 0], &[0, 1, 0]))];
        let (partners, extra) = complete_symplectic_basis(&pairs, &iso, 3, 0.0).unwrap();
        assert_eq!(partners.len(), 1);
        assert_eq!(extra.len(), 1);
        assert_eq!(
            symplectic_product(&iso[0], &partners[0]).unwrap(),
            Scalar::one()
        );
        for (u, v) in pairs.iter().chain(extra.iter()) {
            assert!(symplectic_product(u, &partners[0])
                .unwrap()
                .is_zero_within(0.0));
            assert!(symplectic_product(v, &partners[0])
                .unwrap()
                .is_zero_within(0.0));
        }
    }
}
