//! Phase-space vectors and the two bilinear pairings of the formalism.
//!
//! A vector over `m` modes is written `(p_1..p_m | x_1..x_m)`: the first
//! half holds momentum-kick parameters, the second half position
//! displacements. Displacement errors, check rows, gauge rows and syndromes
//! all live in this representation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fmt;

/// Real vector in `R^{2m}`, split into a momentum half and a position half.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    p: Vec<Scalar>,
    x: Vec<Scalar>,
}

impl PhaseVector {
    pub fn new(p: Vec<Scalar>, x: Vec<Scalar>) -> Result<Self> {
        if p.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: x.len(),
            });
        }
        Ok(PhaseVector { p, x })
    }

    pub fn zero(modes: usize) -> Self {
        PhaseVector {
            p: vec![Scalar::zero(); modes],
            x: vec![Scalar::zero(); modes],
        }
    }

    /// Unit momentum kick on `mode` (0-based).
    pub fn unit_p(modes: usize, mode: usize) -> Self {
        let mut v = Self::zero(modes);
        v.p[mode] = Scalar::one();
        v
    }

    /// Unit position displacement on `mode` (0-based).
    pub fn unit_x(modes: usize, mode: usize) -> Self {
        let mut v = Self::zero(modes);
        v.x[mode] = Scalar::one();
        v
    }

    /// Builds from a flat `(p_1..p_m, x_1..x_m)` slice of even length.
    pub fn from_flat(flat: &[Scalar]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::BadShape {
                rows: 1,
                cols: flat.len(),
            });
        }
        let m = flat.len() / 2;
        Ok(PhaseVector {
            p: flat[..m].to_vec(),
            x: flat[m..].to_vec(),
        })
    }

    pub fn dim_modes(&self) -> usize {
        self.p.len()
    }

    pub fn p_part(&self) -> &[Scalar] {
        &self.p
    }

    pub fn x_part(&self) -> &[Scalar] {
        &self.x
    }

    pub fn p_at(&self, mode: usize) -> &Scalar {
        &self.p[mode]
    }

    pub fn x_at(&self, mode: usize) -> &Scalar {
        &self.x[mode]
    }

    pub fn set_p(&mut self, mode: usize, v: Scalar) {
        self.p[mode] = v;
    }

    pub fn set_x(&mut self, mode: usize, v: Scalar) {
        self.x[mode] = v;
    }

    /// Flat `(p | x)` layout.
    pub fn to_flat(&self) -> Vec<Scalar> {
        self.p.iter().chain(self.x.iter()).cloned().collect()
    }

    pub fn to_f64_flat(&self) -> Vec<f64> {
        self.p
            .iter()
            .chain(self.x.iter())
            .map(|s| s.to_f64())
            .collect()
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.p
            .iter()
            .chain(self.x.iter())
            .all(|s| s.is_zero_within(tol))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim_modes() == other.dim_modes()
            && self
                .p
                .iter()
                .zip(&other.p)
                .chain(self.x.iter().zip(&other.x))
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(PhaseVector {
            p: zip_with(&self.p, &other.p, |a, b| a + b),
            x: zip_with(&self.x, &other.x, |a, b| a + b),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(PhaseVector {
            p: zip_with(&self.p, &other.p, |a, b| a - b),
            x: zip_with(&self.x, &other.x, |a, b| a - b),
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        PhaseVector {
            p: self.p.iter().map(|a| a * c).collect(),
            x: self.x.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::from_int(-1))
    }

    /// Concatenates two vectors mode-wise: `(p_a p_b | x_a x_b)`.
    pub fn concat(&self, other: &Self) -> Self {
        PhaseVector {
            p: self.p.iter().chain(&other.p).cloned().collect(),
            x: self.x.iter().chain(&other.x).cloned().collect(),
        }
    }

    /// Restriction to a mode range `[lo, hi)`.
    pub fn slice_modes(&self, lo: usize, hi: usize) -> Self {
        PhaseVector {
            p: self.p[lo..hi].to_vec(),
            x: self.x[lo..hi].to_vec(),
        }
    }

    /// Flips the sign of the momentum half. Composing a flip, a row action
    /// and another flip yields the covariant transform of error vectors.
    pub fn flip_p(&self) -> Self {
        PhaseVector {
            p: self.p.iter().map(|a| -a).collect(),
            x: self.x.clone(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim_modes() != other.dim_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_modes(),
                got: other.dim_modes(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for PhaseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.p.iter().map(|s| s.to_string()).collect();
        let xs: Vec<String> = self.x.iter().map(|s| s.to_string()).collect();
        write!(f, "({} | {})", ps.join(" "), xs.join(" "))
    }
}

fn zip_with(a: &[Scalar], b: &[Scalar], f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Vec<Scalar> {
    a.iter().zip(b).map(|(u, v)| f(u, v)).collect()
}

/// Antisymmetric symplectic form `<u,v> = u_p . v_x - u_x . v_p`.
///
/// Two quadrature observables commute, and two displacements commute up to
/// phase, exactly when this vanishes.
pub fn symplectic_product(u: &PhaseVector, v: &PhaseVector) -> Result<Scalar> {
    if u.dim_modes() != v.dim_modes() {
        return Err(Error::DimensionMismatch {
            expected: u.dim_modes(),
            got: v.dim_modes(),
        });
    }
    let mut acc = Scalar::zero();
    for i in 0..u.dim_modes() {
        acc += &(u.p_at(i) * v.x_at(i));
        acc -= &(u.x_at(i) * v.p_at(i));
    }
    Ok(acc)
}

/// Syndrome pairing `s(f,e) = f_p . e_x + f_x . e_p`: the c-number shift a
/// displacement by `e` induces on the observable described by `f`, relative
/// to a zero-eigenvalue initial state.
///
/// This is the symmetric companion of [`symplectic_product`]; the cross
/// layout comes from observables pairing momentum coefficients with position
/// operators and vice versa.
pub fn syndrome_pairing(f: &PhaseVector, e: &PhaseVector) -> Result<Scalar> {
    if f.dim_modes() != e.dim_modes() {
        return Err(Error::DimensionMismatch {
            expected: f.dim_modes(),
            got: e.dim_modes(),
        });
    }
    let mut acc = Scalar::zero();
    for i in 0..f.dim_modes() {
        acc += &(f.p_at(i) * e.x_at(i));
        acc += &(f.x_at(i) * e.p_at(i));
    }
    Ok(acc)
}
