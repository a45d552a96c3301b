//! Linear-optical encoding-circuit synthesis: factors a symplectic encoding
//! matrix into passive-squeeze-passive stages (the Bloch-Messiah form).
//!
//! A passive stage is photon-number preserving, i.e. orthogonal and
//! symplectic at once; the middle stage is a bank of single-mode squeezers
//! `diag(1/d_1..1/d_n, d_1..d_n)` in `(p|x)` ordering. This module is
//! float-only: squeeze gains are singular values and generally irrational.

use crate::error::{Error, Result};
use crate::symplectic::SymplecticMatrix;
use nalgebra::{Complex, DMatrix, DVector};

/// Photon-number-preserving stage: orthogonal and symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveNetwork {
    matrix: DMatrix<f64>,
}

impl PassiveNetwork {
    /// Validates orthogonality and symplecticity within `tol`.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let net = PassiveNetwork { matrix };
        let residual = net.orthogonality_residual().max(net.symplectic_residual());
        if residual > tol {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(net)
    }

    pub fn identity(modes: usize) -> Self {
        PassiveNetwork {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let prod = self.matrix.transpose() * &self.matrix;
        (prod - DMatrix::identity(n, n)).amax()
    }

    pub fn symplectic_residual(&self) -> f64 {
        let j = standard_form_matrix(self.dim_modes());
        (&self.matrix * &j * self.matrix.transpose() - j).amax()
    }
}

/// Bank of single-mode squeezers with positive gains; gain `d` scales the
/// position quadrature by `d` and the momentum quadrature by `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeStage {
    gains: Vec<f64>,
}

impl SqueezeStage {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::DecompositionFailed {
                reason: "squeeze gains must be positive and finite".into(),
                cond: f64::NAN,
            });
        }
        Ok(SqueezeStage { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn gains_db(&self) -> Vec<f64> {
        self.gains.iter().map(|d| 20.0 * d.log10()).collect()
    }

    /// `diag(1/d_1..1/d_n, d_1..d_n)`.
    pub fn stage_matrix(&self) -> DMatrix<f64> {
        let n = self.gains.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (i, &d) in self.gains.iter().enumerate() {
            m[(i, i)] = 1.0 / d;
            m[(n + i, n + i)] = d;
        }
        m
    }
}

/// Passive-squeeze-passive factorization of a symplectic matrix: applying
/// `pre`, then the squeezers, then `post` reproduces the input.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDecomposition {
    pub pre: PassiveNetwork,
    pub squeeze: SqueezeStage,
    pub post: PassiveNetwork,
}

impl CircuitDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.post.matrix() * self.squeeze.stage_matrix() * self.pre.matrix()
    }

    pub fn reconstruction_residual(&self, upsilon: &DMatrix<f64>) -> f64 {
        (self.reconstruct() - upsilon).amax()
    }

    pub fn reconstruction_residual_vs(&self, upsilon: &SymplecticMatrix) -> f64 {
        let rows = upsilon.to_f64_rows();
        let dim = rows.len();
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        self.reconstruction_residual(&m)
    }
}

fn standard_form_matrix(modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        j[(i, modes + i)] = 1.0;
        j[(modes + i, i)] = -1.0;
    }
    j
}

/// `J v`: swaps the halves of a column vector with a sign, mapping a
/// singular direction of gain `d` onto its partner of gain `1/d`.
fn j_apply(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = v[n + i];
        out[n + i] = -v[i];
    }
    out
}

/// Position-half weight minus momentum-half weight; decides which member of
/// a singular pair plays the position role. Antisymmetric under `J`, which
/// is what makes the inverse matrix come out with reciprocal gains.
fn half_balance(v: &DVector<f64>) -> f64 {
    let n = v.len() / 2;
    let mut balance = 0.0;
    for i in 0..n {
        balance += v[n + i] * v[n + i] - v[i] * v[i];
    }
    balance
}

/// Projects onto the nearest orthogonal-symplectic matrix through the
/// unitary representation: `[[A, B], [-B, A]] <-> A + iB`, polar-projected
/// by SVD.
fn polar_clean(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows() / 2;
    let mut u = DMatrix::<Complex<f64>>::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let a = (q[(i, k)] + q[(n + i, n + k)]) / 2.0;
            let b = (q[(i, n + k)] - q[(n + i, k)]) / 2.0;
            u[(i, k)] = Complex::new(a, b);
        }
    }
    let svd = u.svd(true, true);
    let w = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let unitary = w * vt;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            out[(i, k)] = unitary[(i, k)].re;
            out[(n + i, n + k)] = unitary[(i, k)].re;
            out[(i, n + k)] = unitary[(i, k)].im;
            out[(n + i, k)] = -unitary[(i, k)].im;
        }
    }
    out
}

/// Deterministic random passive network: a Gaussian random matrix in the
/// `[[A, B], [-B, A]]` form, polar-projected onto the orthogonal-symplectic
/// manifold.
pub fn random_passive(modes: usize, seed: u64) -> PassiveNetwork {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * modes;
    let mut q = DMatrix::zeros(dim, dim);
    for i in 0..modes {
        for k in 0..modes {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            q[(i, k)] = a;
            q[(modes + i, modes + k)] = a;
            q[(i, modes + k)] = b;
            q[(modes + i, k)] = -b;
        }
    }
    let cleaned = polar_clean(&q);
    PassiveNetwork::new(cleaned, 1e-9).expect("polar projection is orthogonal-symplectic")
}

struct ModeTriple {
    gain: f64,
    x_col: DVector<f64>,
    x_row: DVector<f64>,
}

/// Bloch-Messiah decomposition of a symplectic matrix.
///
/// Singular vectors come in `J`-conjugate pairs with reciprocal singular
/// values; each pair yields one mode of the squeeze stage. Which member
/// takes the position role follows the half-balance of the pair, so the
/// gains of the inverse matrix are exactly the reciprocal gains of the
/// input. Gains are sorted descending; each stage is polar-projected onto
/// the orthogonal-symplectic manifold before the reconstruction check.
pub fn bloch_messiah(upsilon: &SymplecticMatrix, tol: f64) -> Result<CircuitDecomposition> {
    if !upsilon.is_symplectic(tol) {
        return Err(Error::NotSymplectic {
            residual: upsilon.symplectic_residual(),
        });
    }
    let n = upsilon.dim_modes();
    let dim = 2 * n;
    let rows = upsilon.to_f64_rows();
    let y = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);

    let svd = y.clone().svd(true, true);
    let u_mat = svd.u.as_ref().expect("requested");
    let vt_mat = svd.v_t.as_ref().expect("requested");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let sigma_max = svd.singular_values.amax();
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = sigma_max / sigma_min;
    if !(sigma_min > 0.0) || !cond.is_finite() {
        return Err(Error::DecompositionFailed {
            reason: "singular spectrum collapsed".into(),
            cond,
        });
    }

    // One representative per J-plane, largest singular values first.
    let mut modes: Vec<ModeTriple> = Vec::with_capacity(n);
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for &k in &order {
        if modes.len() == n {
            break;
        }
        let sigma = svd.singular_values[k];
        let mut u: DVector<f64> = u_mat.column(k).into_owned();
        // Remove components along planes already claimed.
        for basis in &chosen {
            let overlap = basis.dot(&u);
            u -= basis * overlap;
        }
        let norm = u.norm();
        if norm < 0.5 {
            continue; // plane already covered by an earlier, equal singular value
        }
        u /= norm;
        let vt_row: DVector<f64> = vt_mat.row(k).transpose().into_owned();
        let v = if (norm - 1.0).abs() < 1e-12 {
            vt_row
        } else {
            // Recompute the right partner of the cleaned direction.
            let w = y.transpose() * &u;
            &w / w.norm()
        };
        let sigma_eff = (y.transpose() * &u).norm().max(f64::MIN_POSITIVE);
        let sigma = if (sigma_eff - sigma).abs() / sigma.max(1.0) > 1e-9 {
            sigma_eff
        } else {
            sigma
        };

        let balance = half_balance(&u) + half_balance(&v);
        let (gain, mut x_col, mut x_row) = if balance >= 0.0 {
            (sigma, u.clone(), v.clone())
        } else {
            (1.0 / sigma, j_apply(&u), j_apply(&v))
        };
        // Deterministic sign: the largest-magnitude entry of the position
        // column is positive.
        let mut lead = 0;
        for i in 0..dim {
            if x_col[i].abs() > x_col[lead].abs() {
                lead = i;
            }
        }
        if x_col[lead] < 0.0 {
            x_col = -x_col;
            x_row = -x_row;
        }
        chosen.push(x_col.clone());
        chosen.push(j_apply(&x_col));
        modes.push(ModeTriple { gain, x_col, x_row });
    }
    if modes.len() != n {
        return Err(Error::DecompositionFailed {
            reason: format!("found {} singular planes, expected {}", modes.len(), n),
            cond,
        });
    }

    modes.sort_by(|a, b| {
        b.gain
            .partial_cmp(&a.gain)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut q2 = DMatrix::zeros(dim, dim);
    let mut q1 = DMatrix::zeros(dim, dim);
    for (i, mode) in modes.iter().enumerate() {
        let p_col = j_apply(&mode.x_col);
        let p_row = j_apply(&mode.x_row);
        q2.set_column(i, &p_col);
        q2.set_column(n + i, &mode.x_col);
        q1.set_row(i, &p_row.transpose());
        q1.set_row(n + i, &mode.x_row.transpose());
    }
    let q2 = polar_clean(&q2);
    let mut q1 = polar_clean(&q1);
    let gains: Vec<f64> = modes.iter().map(|m| m.gain).collect();
    let squeeze = SqueezeStage::new(gains)?;

    // Reconstruction check, with one refinement pass pushing all residual
    // error into the pre stage.
    let stage = squeeze.stage_matrix();
    let residual = (&q2 * &stage * &q1 - &y).amax();
    if residual > tol {
        let mut stage_inv = DMatrix::zeros(dim, dim);
        for (i, &d) in squeeze.gains().iter().enumerate() {
            stage_inv[(i, i)] = d;
            stage_inv[(n + i, n + i)] = 1.0 / d;
        }
        q1 = polar_clean(&(stage_inv * q2.transpose() * &y));
    }

    let pre = PassiveNetwork::new(q1, tol.max(1e-12))?;
    let post = PassiveNetwork::new(q2, tol.max(1e-12))?;
    let decomposition = CircuitDecomposition { pre, squeeze, post };
    let final_residual = decomposition.reconstruction_residual(&y);
    if final_residual > tol {
        return Err(Error::DecompositionFailed {
            reason: format!("reconstruction residual {final_residual:.3e} exceeds {tol:.3e}"),
            cond,
        });
    }
    Ok(decomposition)
}

/// Renders a decomposition as text: a `PASSIVE` matrix section, a `SQUEEZE`
/// section with one `mode i: <dB> dB` line per mode, and the second
/// `PASSIVE` section. Deterministic; parseable by [`parse_circuit`].
pub fn emit_circuit(d: &CircuitDecomposition) -> String {
    let mut out = String::new();
    out.push_str("# encoding circuit: apply stages top to bottom\n");
    emit_passive(&mut out, &d.pre);
    out.push_str("SQUEEZE\n");
    for (i, db) in d.squeeze.gains_db().iter().enumerate() {
        out.push_str(&format!("mode {}: {:.4} dB\n", i + 1, db));
    }
    emit_passive(&mut out, &d.post);
    out
}

fn emit_passive(out: &mut String, net: &PassiveNetwork) {
    out.push_str("PASSIVE\n");
    let m = net.matrix();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Parses the output of [`emit_circuit`]. Passive stages are re-validated
/// within `tol`; squeeze gains are recovered from their decibel values.
pub fn parse_circuit(text: &str, tol: f64) -> Result<CircuitDecomposition> {
    let mut sections: Vec<(usize, Vec<(usize, String)>)> = Vec::new();
    let mut current: Option<Vec<(usize, String)>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "PASSIVE" || line == "SQUEEZE" {
            if let Some(block) = current.take() {
                sections.push((sections.len(), block));
            }
            current = Some(vec![(idx + 1, line.to_string())]);
        } else if let Some(block) = current.as_mut() {
            block.push((idx + 1, line.to_string()));
        } else {
            return Err(Error::parse(idx + 1, "expected PASSIVE or SQUEEZE header"));
        }
    }
    if let Some(block) = current.take() {
        sections.push((sections.len(), block));
    }
    if sections.len() != 3 {
        return Err(Error::parse(
            1,
            format!(
                "expected 3 sections (PASSIVE, SQUEEZE, PASSIVE), found {}",
                sections.len()
            ),
        ));
    }
    let headers: Vec<&str> = sections
        .iter()
        .map(|(_, block)| block[0].1.as_str())
        .collect();
    if headers != ["PASSIVE", "SQUEEZE", "PASSIVE"] {
        return Err(Error::parse(
            1,
            "sections must be PASSIVE, SQUEEZE, PASSIVE",
        ));
    }

    let pre = parse_passive(&sections[0].1[1..], tol)?;
    let gains = parse_squeeze(&sections[1].1[1..])?;
    let post = parse_passive(&sections[2].1[1..], tol)?;
    if pre.dim_modes() != gains.len() || post.dim_modes() != gains.len() {
        return Err(Error::parse(
            sections[1].1[0].0,
            format!(
                "stage sizes disagree: {} and {} passive modes, {} squeeze lines",
                pre.dim_modes(),
                post.dim_modes(),
                gains.len()
            ),
        ));
    }
    Ok(CircuitDecomposition {
        pre,
        squeeze: SqueezeStage::new(gains)?,
        post,
    })
}

fn parse_passive(lines: &[(usize, String)], tol: f64) -> Result<PassiveNetwork> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(*lineno, format!("bad float `{tok}`")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::parse(
            lines.first().map_or(0, |(l, _)| *l),
            "passive stage must be a square matrix",
        ));
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    PassiveNetwork::new(m, tol)
}

fn parse_squeeze(lines: &[(usize, String)]) -> Result<Vec<f64>> {
    let mut gains = Vec::new();
    for (expected, (lineno, line)) in lines.iter().enumerate() {
        let rest = line
            .strip_prefix("mode ")
            .ok_or_else(|| Error::parse(*lineno, "expected `mode i: <dB> dB`"))?;
        let (index_str, tail) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse(*lineno, "expected `mode i: <dB> dB`"))?;
        let index: usize = index_str
            .trim()
            .parse()
            .map_err(|_| Error::parse(*lineno, "bad mode index"))?;
        if index != expected + 1 {
            return Err(Error::parse(
                *lineno,
                format!("modes must be consecutive, expected {}", expected + 1),
            ));
        }
        let db_str = tail
            .trim()
            .strip_suffix("dB")
            .ok_or_else(|| Error::parse(*lineno, "squeeze line must end in `dB`"))?;
        let db: f64 = db_str
            .trim()
            .parse()
            .map_err(|_| Error::parse(*lineno, "bad decibel value"))?;
        gains.push(10f64.powf(db / 20.0));
    }
    Ok(gains)
}
