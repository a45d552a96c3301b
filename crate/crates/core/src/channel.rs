//! Heisenberg-picture simulation of displacement-error channels: syndrome
//! extraction, recovery, residual logical error and Monte Carlo trials.
//!
//! Errors are displacement vectors on the sender's `n` modes; the receiver's
//! entangled halves are noise-free by assumption. A syndrome is the tuple of
//! measured observable shifts `(a, a1, a2)` split by check-row kind. The
//! decoder cancels exactly the components the syndrome determines (the
//! destabilizer and ebit-pair coefficients) plus whatever linear prediction
//! of the logical components the configuration supplies.

use crate::code::{build_symplectic_basis, CheckKind, Code, CodeParams, ModeRole};
use crate::error::{Error, Result};
use crate::linalg;
use crate::phase::{syndrome_pairing, PhaseVector};
use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

/// A displacement error on the sender's modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector {
    pub alice: PhaseVector,
}

impl ErrorVector {
    pub fn new(alice: PhaseVector) -> Self {
        ErrorVector { alice }
    }

    pub fn zero(modes: usize) -> Self {
        ErrorVector {
            alice: PhaseVector::zero(modes),
        }
    }
}

/// Measured observable shifts, grouped by row kind: `a` from ancilla rows,
/// `a1` from the relative-position family, `a2` from the total-momentum
/// family, each in check-row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Syndrome {
    pub a: Vec<Scalar>,
    pub a1: Vec<Scalar>,
    pub a2: Vec<Scalar>,
}

impl Syndrome {
    pub fn zero(params: &CodeParams) -> Self {
        Syndrome {
            a: vec![Scalar::zero(); params.l],
            a1: vec![Scalar::zero(); params.c],
            a2: vec![Scalar::zero(); params.c],
        }
    }

    /// Components flattened in the grouped order `(a | a1 | a2)`.
    pub fn grouped(&self) -> Vec<Scalar> {
        self.a
            .iter()
            .chain(&self.a1)
            .chain(&self.a2)
            .cloned()
            .collect()
    }

    /// Components in check-row order for the given code.
    pub fn row_major(&self, code: &Code) -> Vec<Scalar> {
        let (mut ia, mut iz, mut ix) = (0, 0, 0);
        code.checks
            .iter()
            .map(|row| match row.kind {
                CheckKind::Ancilla => {
                    ia += 1;
                    self.a[ia - 1].clone()
                }
                CheckKind::EbitZ => {
                    iz += 1;
                    self.a1[iz - 1].clone()
                }
                CheckKind::EbitX => {
                    ix += 1;
                    self.a2[ix - 1].clone()
                }
            })
            .collect()
    }

    fn from_row_major(code: &Code, values: Vec<Scalar>) -> Self {
        let mut s = Syndrome {
            a: Vec::new(),
            a1: Vec::new(),
            a2: Vec::new(),
        };
        for (row, v) in code.checks.iter().zip(values) {
            match row.kind {
                CheckKind::Ancilla => s.a.push(v),
                CheckKind::EbitZ => s.a1.push(v),
                CheckKind::EbitX => s.a2.push(v),
            }
        }
        s
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.a
            .iter()
            .chain(&self.a1)
            .chain(&self.a2)
            .all(|v| v.is_zero_within(tol))
    }
}

/// Linear syndrome-to-logical predictions: `alpha` for momentum kicks and
/// `beta` for position shifts, both `k x (l + 2c)` against the grouped
/// syndrome `(a | a1 | a2)`. Defaults to zero, which reproduces the plain
/// recovery map.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    pub alpha: Vec<Vec<Scalar>>,
    pub beta: Vec<Vec<Scalar>>,
}

impl DecoderConfig {
    pub fn zero(params: &CodeParams) -> Self {
        let cols = params.check_rows();
        DecoderConfig {
            alpha: vec![vec![Scalar::zero(); cols]; params.k],
            beta: vec![vec![Scalar::zero(); cols]; params.k],
        }
    }

    pub fn new(alpha: Vec<Vec<Scalar>>, beta: Vec<Vec<Scalar>>) -> Self {
        DecoderConfig { alpha, beta }
    }

    fn check_shape(&self, params: &CodeParams) -> Result<()> {
        let cols = params.check_rows();
        let ok = self.alpha.len() == params.k
            && self.beta.len() == params.k
            && self.alpha.iter().all(|r| r.len() == cols)
            && self.beta.iter().all(|r| r.len() == cols);
        if ok {
            Ok(())
        } else {
            Err(Error::DecoderShape(format!(
                "expected {} x {} alpha/beta matrices",
                params.k, cols
            )))
        }
    }

    fn apply(matrix: &[Vec<Scalar>], grouped: &[Scalar]) -> Vec<Scalar> {
        matrix
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (m, s) in row.iter().zip(grouped) {
                    acc += &(m * s);
                }
                acc
            })
            .collect()
    }
}

/// Reads the syndrome of an error: the shift of each measured observable.
/// The receiver's halves carry no error, so only sender parts contribute.
/// Deterministic, linear, and blind to any component of the error lying
/// along the code's own gauge or stabilizer displacements.
pub fn extract_syndrome(code: &Code, e: &ErrorVector) -> Result<Syndrome> {
    if e.alice.dim_modes() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            got: e.alice.dim_modes(),
        });
    }
    let values = code
        .checks
        .iter()
        .map(|row| syndrome_pairing(&row.alice, &e.alice))
        .collect::<Result<Vec<_>>>()?;
    Ok(Syndrome::from_row_major(code, values))
}

/// The closed-form recovery of the canonical code: cancel the measured
/// ancilla and ebit shifts in place and apply the configured logical
/// prediction on the information modes. Gauge slots stay untouched.
///
/// Returns the displacement `u'` to subtract from the accumulated error.
pub fn canonical_recovery(
    syndrome: &Syndrome,
    cfg: &DecoderConfig,
    params: &CodeParams,
) -> Result<ErrorVector> {
    cfg.check_shape(params)?;
    if syndrome.a.len() != params.l
        || syndrome.a1.len() != params.c
        || syndrome.a2.len() != params.c
    {
        return Err(Error::DecoderShape(format!(
            "syndrome lengths ({},{},{}) do not match (l,c,c)=({},{},{})",
            syndrome.a.len(),
            syndrome.a1.len(),
            syndrome.a2.len(),
            params.l,
            params.c,
            params.c
        )));
    }
    let grouped = syndrome.grouped();
    let alpha = DecoderConfig::apply(&cfg.alpha, &grouped);
    let beta = DecoderConfig::apply(&cfg.beta, &grouped);

    let n = params.n;
    let ancilla0 = params.k;
    let ebit0 = params.k + params.l + params.r;
    let mut u = PhaseVector::zero(n);
    for j in 0..params.k {
        u.set_p(j, alpha[j].clone());
        u.set_x(j, beta[j].clone());
    }
    for i in 0..params.l {
        u.set_x(ancilla0 + i, syndrome.a[i].clone());
    }
    for i in 0..params.c {
        u.set_p(ebit0 + i, syndrome.a2[i].clone());
        u.set_x(ebit0 + i, syndrome.a1[i].clone());
    }
    Ok(ErrorVector::new(u))
}

/// Columns the decoder may cancel: destabilizers then the flattened ebit
/// pairs of the adapted basis.
fn decode_columns(
    code: &Code,
    tol: f64,
) -> Result<(Vec<PhaseVector>, crate::code::SymplecticBasis)> {
    let basis = build_symplectic_basis(code, tol)?;
    let mut cols: Vec<PhaseVector> = basis.destabilizers.clone();
    for (ez, ex) in &basis.ebit_pairs {
        cols.push(ez.clone());
        cols.push(ex.clone());
    }
    Ok((cols, basis))
}

/// General recovery through the adapted basis: solves for the combination
/// of destabilizer and ebit-pair displacements reproducing the measured
/// syndrome, then adds the configured logical prediction. For canonical
/// codes this reproduces [`canonical_recovery`] exactly.
///
/// The post-recovery syndrome of `e - decode(..)` is zero for whatever `e`
/// produced the syndrome, and the map is linear in the syndrome for a fixed
/// configuration.
pub fn decode(
    code: &Code,
    syndrome: &Syndrome,
    cfg: &DecoderConfig,
    tol: f64,
) -> Result<ErrorVector> {
    cfg.check_shape(&code.params)?;
    let p = &code.params;
    if syndrome.a.len() != p.l || syndrome.a1.len() != p.c || syndrome.a2.len() != p.c {
        return Err(Error::DecoderShape(format!(
            "syndrome lengths ({},{},{}) do not match (l,c,c)=({},{},{})",
            syndrome.a.len(),
            syndrome.a1.len(),
            syndrome.a2.len(),
            p.l,
            p.c,
            p.c
        )));
    }
    let (cols, basis) = decode_columns(code, tol)?;
    let rows = syndrome.row_major(code);

    // A[j][k] = shift that cancel-column k induces on measured row j.
    let a_mat: Vec<Vec<Scalar>> = code
        .checks
        .iter()
        .map(|row| {
            cols.iter()
                .map(|col| syndrome_pairing(&row.alice, col))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let inv = linalg::invert(&a_mat, tol).ok_or_else(|| {
        Error::Unsolvable("syndrome map is singular on the cancelable subspace".into())
    })?;

    let n = code.n();
    let mut u = PhaseVector::zero(n);
    for (inv_row, col) in inv.iter().zip(&cols) {
        let mut coeff = Scalar::zero();
        for (w, s) in inv_row.iter().zip(&rows) {
            coeff += &(w * s);
        }
        u = u.add(&col.scale(&coeff))?;
    }

    let grouped = syndrome.grouped();
    let alpha = DecoderConfig::apply(&cfg.alpha, &grouped);
    let beta = DecoderConfig::apply(&cfg.beta, &grouped);
    for (j, (lz, lx)) in basis.logical_pairs.iter().enumerate() {
        u = u.add(&lz.scale(&alpha[j]))?.add(&lx.scale(&beta[j]))?;
    }
    Ok(ErrorVector::new(u))
}

/// Logical displacement left on each information mode: the logical-pair
/// coefficients of `net` in the adapted basis, one `(p-kick, x-shift)` per
/// mode. Stabilizer, destabilizer, ebit and gauge components all vanish
/// under the extraction, so adding any of them to `net` changes nothing.
pub fn residual_logical(code: &Code, net: &ErrorVector, tol: f64) -> Result<Vec<(Scalar, Scalar)>> {
    if net.alice.dim_modes() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            got: net.alice.dim_modes(),
        });
    }
    let basis = build_symplectic_basis(code, tol)?;
    basis.logical_components(&net.alice)
}

/// Error channel sampled per trial.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// Independent Gaussian displacement on every quadrature.
    GaussianIid { sigma: f64 },
    /// The structured family the canonical code corrects exactly: Gaussian
    /// block parameters assembled by mode role, with the information-mode
    /// components predicted by the given linear maps.
    StructuredS0 { sigma: f64, coeffs: DecoderConfig },
    /// A fixed single-mode kick and shift, identical every trial.
    SingleMode {
        mode: usize,
        p_kick: f64,
        x_shift: f64,
    },
    /// A fixed displacement vector, identical every trial.
    Fixed(ErrorVector),
}

impl NoiseModel {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseModel::GaussianIid { .. } => "gaussian",
            NoiseModel::StructuredS0 { .. } => "s0",
            NoiseModel::SingleMode { .. } => "single",
            NoiseModel::Fixed(_) => "fixed",
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            NoiseModel::GaussianIid { sigma } | NoiseModel::StructuredS0 { sigma, .. } => *sigma,
            _ => 0.0,
        }
    }

    fn check(&self, code: &Code) -> Result<()> {
        match self {
            NoiseModel::GaussianIid { sigma } | NoiseModel::StructuredS0 { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidNoise(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
            }
            NoiseModel::SingleMode { mode, .. } => {
                if *mode >= code.n() {
                    return Err(Error::InvalidNoise(format!(
                        "mode {} out of range for n={}",
                        mode,
                        code.n()
                    )));
                }
            }
            NoiseModel::Fixed(e) => {
                if e.alice.dim_modes() != code.n() {
                    return Err(Error::InvalidNoise(format!(
                        "fixed error has {} modes, code has {}",
                        e.alice.dim_modes(),
                        code.n()
                    )));
                }
            }
        }
        if let NoiseModel::StructuredS0 { coeffs, .. } = self {
            coeffs.check_shape(&code.params)?;
        }
        Ok(())
    }
}

/// Exact structured error of the correctable family, assembled by mode
/// role: momentum half `(alpha, b, c, a2)`, position half `(beta, a, d, a1)`
/// with `alpha = A (a|a1|a2)` and `beta = B (a|a1|a2)` from `coeffs`.
pub fn structured_error(
    code: &Code,
    coeffs: &DecoderConfig,
    a: &[Scalar],
    b: &[Scalar],
    c: &[Scalar],
    d: &[Scalar],
    a1: &[Scalar],
    a2: &[Scalar],
) -> Result<ErrorVector> {
    let p = &code.params;
    coeffs.check_shape(p)?;
    if a.len() != p.l
        || b.len() != p.l
        || c.len() != p.r
        || d.len() != p.r
        || a1.len() != p.c
        || a2.len() != p.c
    {
        return Err(Error::DecoderShape("structured error block lengths".into()));
    }
    let grouped: Vec<Scalar> = a.iter().chain(a1).chain(a2).cloned().collect();
    let alpha = DecoderConfig::apply(&coeffs.alpha, &grouped);
    let beta = DecoderConfig::apply(&coeffs.beta, &grouped);

    let mut u = PhaseVector::zero(p.n);
    for (idx, mode) in code
        .roles
        .modes_with(ModeRole::Information)
        .iter()
        .enumerate()
    {
        u.set_p(*mode, alpha[idx].clone());
        u.set_x(*mode, beta[idx].clone());
    }
    for (idx, mode) in code.roles.modes_with(ModeRole::Ancilla).iter().enumerate() {
        u.set_p(*mode, b[idx].clone());
        u.set_x(*mode, a[idx].clone());
    }
    for (idx, mode) in code.roles.modes_with(ModeRole::Gauge).iter().enumerate() {
        u.set_p(*mode, c[idx].clone());
        u.set_x(*mode, d[idx].clone());
    }
    for (idx, mode) in code.roles.modes_with(ModeRole::Ebit).iter().enumerate() {
        u.set_p(*mode, a2[idx].clone());
        u.set_x(*mode, a1[idx].clone());
    }
    Ok(ErrorVector::new(u))
}

/// Additive Gaussian noise on each measured syndrome component, standing in
/// for finitely squeezed ancilla and ebit resources. `None` decibels means
/// ideal (infinite squeezing): exact syndromes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingModel {
    db: Option<f64>,
}

impl SqueezingModel {
    pub fn ideal() -> Self {
        SqueezingModel { db: None }
    }

    pub fn finite_db(db: f64) -> Result<Self> {
        if !(db >= 0.0) {
            return Err(Error::InvalidNoise(format!(
                "squeezing must be >= 0 dB, got {db}"
            )));
        }
        Ok(SqueezingModel { db: Some(db) })
    }

    pub fn db(&self) -> Option<f64> {
        self.db
    }

    /// Standard deviation of the per-component syndrome noise:
    /// variance `10^(-db/10) / 2`.
    pub fn noise_sigma(&self) -> Option<f64> {
        self.db.map(|db| (10f64.powf(-db / 10.0) / 2.0).sqrt())
    }
}

/// Aggregates over a batch of Monte Carlo trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub trials: u64,
    /// RMS residual logical momentum kick, over all trials and information
    /// modes.
    pub rms_logical_p: f64,
    /// RMS residual logical position shift.
    pub rms_logical_x: f64,
    /// Mean Euclidean norm of the residual logical vector per trial.
    pub mean_residual_norm: f64,
    /// Fraction of trials with every logical component within 1e-9.
    pub frac_within_1e9: f64,
    /// Fraction of trials with every logical component within 1e-2.
    pub frac_within_1e2: f64,
}

impl TrialStats {
    pub const CSV_HEADER: &'static str = "code,noise,sigma,squeezing_db,trials,seed,\
rms_logical_p,rms_logical_x,mean_residual_norm,frac_within_1e-9,frac_within_1e-2";

    pub fn csv_row(
        &self,
        code_label: &str,
        noise: &NoiseModel,
        squeezing: &SqueezingModel,
        seed: u64,
    ) -> String {
        let db = match squeezing.db() {
            Some(db) => format!("{db}"),
            None => "inf".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{:.12e},{:.12e},{:.12e},{},{}",
            code_label,
            noise.label(),
            noise.sigma(),
            db,
            self.trials,
            seed,
            self.rms_logical_p,
            self.rms_logical_x,
            self.mean_residual_norm,
            self.frac_within_1e9,
            self.frac_within_1e2,
        )
    }
}

/// Everything the trial loop needs, lowered to `f64` once.
struct CompiledSim {
    n: usize,
    k: usize,
    /// Syndrome functionals: one row per check, over flat `(p|x)` errors.
    syn_rows: Vec<Vec<f64>>,
    /// Recovery map from row-major syndromes to flat displacements.
    recovery: Vec<Vec<f64>>,
    /// Logical extraction: `2k` rows (p-kick then x-shift per mode).
    logical: Vec<Vec<f64>>,
    info_modes: Vec<usize>,
    ancilla_modes: Vec<usize>,
    gauge_modes: Vec<usize>,
    ebit_modes: Vec<usize>,
    alpha_f64: Vec<Vec<f64>>,
    beta_f64: Vec<Vec<f64>>,
}

fn to_f64_matrix(rows: &[Vec<Scalar>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|s| s.to_f64()).collect())
        .collect()
}

fn compile_sim(code: &Code, cfg: &DecoderConfig, tol: f64) -> Result<CompiledSim> {
    cfg.check_shape(&code.params)?;
    let n = code.n();
    let m = code.params.check_rows();

    // Syndrome functional: s(f, e) over flat e = (e_p | e_x) has
    // coefficients (f_x | f_p).
    let syn_rows: Vec<Vec<f64>> = code
        .checks
        .iter()
        .map(|row| {
            let mut r = Vec::with_capacity(2 * n);
            r.extend(row.alice.x_part().iter().map(|s| s.to_f64()));
            r.extend(row.alice.p_part().iter().map(|s| s.to_f64()));
            r
        })
        .collect();

    // Exact recovery matrix: columns * A^{-1}, as in `decode`.
    let (cols, basis) = decode_columns(code, tol)?;
    let a_mat: Vec<Vec<Scalar>> = code
        .checks
        .iter()
        .map(|row| {
            cols.iter()
                .map(|col| syndrome_pairing(&row.alice, col))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let inv = linalg::invert(&a_mat, tol).ok_or_else(|| {
        Error::Unsolvable("syndrome map is singular on the cancelable subspace".into())
    })?;
    // recovery[flat coord][syndrome row] = sum_k cols[k][coord] * inv[k][row]
    let mut recovery = vec![vec![Scalar::zero(); m]; 2 * n];
    for (inv_row, col) in inv.iter().zip(&cols) {
        let flat = col.to_flat();
        for (coord, cv) in flat.iter().enumerate() {
            for (row, w) in inv_row.iter().enumerate() {
                let delta = cv * w;
                recovery[coord][row] = &recovery[coord][row] + &delta;
            }
        }
    }
    // Fold the configured logical prediction into the same matrix. The
    // alpha/beta maps act on grouped syndromes, so permute columns.
    let grouped_of_row = {
        let (mut ia, mut iz, mut ix) = (0usize, 0usize, 0usize);
        let (l, c) = (code.params.l, code.params.c);
        code.checks
            .iter()
            .map(|row| match row.kind {
                CheckKind::Ancilla => {
                    ia += 1;
                    ia - 1
                }
                CheckKind::EbitZ => {
                    iz += 1;
                    l + iz - 1
                }
                CheckKind::EbitX => {
                    ix += 1;
                    l + c + ix - 1
                }
            })
            .collect::<Vec<usize>>()
    };
    for (j, (lz, lx)) in basis.logical_pairs.iter().enumerate() {
        let lz_flat = lz.to_flat();
        let lx_flat = lx.to_flat();
        for (row, &gidx) in grouped_of_row.iter().enumerate() {
            for coord in 0..2 * n {
                let delta = &(&lz_flat[coord] * &cfg.alpha[j][gidx])
                    + &(&lx_flat[coord] * &cfg.beta[j][gidx]);
                recovery[coord][row] = &recovery[coord][row] + &delta;
            }
        }
    }

    // Logical extraction rows over flat nets: <net, w> has coefficients
    // (w_x | -w_p); the x-shift row negates the pairing against lz.
    let mut logical = Vec::with_capacity(2 * code.params.k);
    for (lz, lx) in &basis.logical_pairs {
        let mut p_row = Vec::with_capacity(2 * n);
        p_row.extend(lx.x_part().iter().map(|s| s.to_f64()));
        p_row.extend(lx.p_part().iter().map(|s| -s.to_f64()));
        logical.push(p_row);
        let mut x_row = Vec::with_capacity(2 * n);
        x_row.extend(lz.x_part().iter().map(|s| -s.to_f64()));
        x_row.extend(lz.p_part().iter().map(|s| s.to_f64()));
        logical.push(x_row);
    }

    Ok(CompiledSim {
        n,
        k: code.params.k,
        syn_rows,
        recovery: to_f64_matrix(&recovery),
        logical,
        info_modes: code.roles.modes_with(ModeRole::Information),
        ancilla_modes: code.roles.modes_with(ModeRole::Ancilla),
        gauge_modes: code.roles.modes_with(ModeRole::Gauge),
        ebit_modes: code.roles.modes_with(ModeRole::Ebit),
        alpha_f64: to_f64_matrix(&cfg.alpha),
        beta_f64: to_f64_matrix(&cfg.beta),
    })
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

impl CompiledSim {
    fn sample_error(&self, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.n;
        match noise {
            NoiseModel::GaussianIid { sigma } => {
                let dist = Normal::new(0.0, *sigma).expect("validated sigma");
                (0..2 * n).map(|_| dist.sample(rng)).collect()
            }
            NoiseModel::StructuredS0 { sigma, coeffs: _ } => {
                let dist = Normal::new(0.0, *sigma).expect("validated sigma");
                let l = self.ancilla_modes.len();
                let r = self.gauge_modes.len();
                let c = self.ebit_modes.len();
                let a: Vec<f64> = (0..l).map(|_| dist.sample(rng)).collect();
                let b: Vec<f64> = (0..l).map(|_| dist.sample(rng)).collect();
                let cg: Vec<f64> = (0..r).map(|_| dist.sample(rng)).collect();
                let d: Vec<f64> = (0..r).map(|_| dist.sample(rng)).collect();
                let a1: Vec<f64> = (0..c).map(|_| dist.sample(rng)).collect();
                let a2: Vec<f64> = (0..c).map(|_| dist.sample(rng)).collect();
                let grouped: Vec<f64> = a.iter().chain(&a1).chain(&a2).copied().collect();
                let alpha = matvec(&self.alpha_f64, &grouped);
                let beta = matvec(&self.beta_f64, &grouped);
                let mut e = vec![0.0; 2 * n];
                for (idx, &mode) in self.info_modes.iter().enumerate() {
                    e[mode] = alpha[idx];
                    e[n + mode] = beta[idx];
                }
                for (idx, &mode) in self.ancilla_modes.iter().enumerate() {
                    e[mode] = b[idx];
                    e[n + mode] = a[idx];
                }
                for (idx, &mode) in self.gauge_modes.iter().enumerate() {
                    e[mode] = cg[idx];
                    e[n + mode] = d[idx];
                }
                for (idx, &mode) in self.ebit_modes.iter().enumerate() {
                    e[mode] = a2[idx];
                    e[n + mode] = a1[idx];
                }
                e
            }
            NoiseModel::SingleMode {
                mode,
                p_kick,
                x_shift,
            } => {
                let mut e = vec![0.0; 2 * n];
                e[*mode] = *p_kick;
                e[n + mode] = *x_shift;
                e
            }
            NoiseModel::Fixed(err) => err.alice.to_f64_flat(),
        }
    }

    fn run_one(
        &self,
        noise: &NoiseModel,
        squeeze_sigma: Option<f64>,
        rng: &mut ChaCha8Rng,
    ) -> TrialOutcome {
        let e = self.sample_error(noise, rng);
        let mut syn = matvec(&self.syn_rows, &e);
        if let Some(sigma) = squeeze_sigma {
            let dist = Normal::new(0.0, sigma).expect("validated squeezing");
            for s in syn.iter_mut() {
                *s += dist.sample(rng);
            }
        }
        let rec = matvec(&self.recovery, &syn);
        let net: Vec<f64> = e.iter().zip(&rec).map(|(a, b)| a - b).collect();
        let logical = matvec(&self.logical, &net);

        let mut sum_p2 = 0.0;
        let mut sum_x2 = 0.0;
        let mut norm2 = 0.0;
        let mut max_abs: f64 = 0.0;
        for j in 0..self.k {
            let p = logical[2 * j];
            let x = logical[2 * j + 1];
            sum_p2 += p * p;
            sum_x2 += x * x;
            norm2 += p * p + x * x;
            max_abs = max_abs.max(p.abs()).max(x.abs());
        }
        TrialOutcome {
            sum_p2,
            sum_x2,
            norm: norm2.sqrt(),
            max_abs,
        }
    }
}

struct TrialOutcome {
    sum_p2: f64,
    sum_x2: f64,
    norm: f64,
    max_abs: f64,
}

/// Runs `trials` independent channel-and-recovery rounds and aggregates the
/// residual logical displacements.
///
/// Each trial draws from its own counter-derived random stream
/// `(seed, trial index)`, so results are bitwise identical for a fixed seed
/// regardless of thread count; aggregation folds per-trial outcomes in trial
/// order.
pub fn run_trials(
    code: &Code,
    noise: &NoiseModel,
    cfg: &DecoderConfig,
    squeezing: &SqueezingModel,
    trials: u64,
    seed: u64,
) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::InvalidNoise("trials must be >= 1".into()));
    }
    noise.check(code)?;
    let sim = compile_sim(code, cfg, crate::scalar::DEFAULT_TOL)?;
    let squeeze_sigma = squeezing.noise_sigma();

    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            sim.run_one(noise, squeeze_sigma, &mut rng)
        })
        .collect();

    let mut sum_p2 = 0.0;
    let mut sum_x2 = 0.0;
    let mut sum_norm = 0.0;
    let mut within_1e9 = 0u64;
    let mut within_1e2 = 0u64;
    for o in &outcomes {
        sum_p2 += o.sum_p2;
        sum_x2 += o.sum_x2;
        sum_norm += o.norm;
        if o.max_abs <= 1e-9 {
            within_1e9 += 1;
        }
        if o.max_abs <= 1e-2 {
            within_1e2 += 1;
        }
    }
    let k = sim.k.max(1) as f64;
    let t = trials as f64;
    Ok(TrialStats {
        trials,
        rms_logical_p: (sum_p2 / (t * k)).sqrt(),
        rms_logical_x: (sum_x2 / (t * k)).sqrt(),
        mean_residual_norm: sum_norm / t,
        frac_within_1e9: within_1e9 as f64 / t,
        frac_within_1e2: within_1e2 as f64 / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{canonical_code, example_code};
    use rand::Rng;

    fn exact(vals: &[i64]) -> Vec<Scalar> {
        vals.iter().map(|&v| Scalar::from_int(v)).collect()
    }

    #[test]
    fn zero_error_zero_syndrome() {
        let code = canonical_code(1, 2, 1, 1);
        let syn = extract_syndrome(&code, &ErrorVector::zero(code.n())).unwrap();
        assert!(syn.is_zero_within(0.0));
    }

    #[test]
    fn canonical_syndrome_reads_structured_blocks() {
        // The structured error exposes exactly (a, a1, a2).
        let code = canonical_code(2, 2, 1, 1);
        let cfg = DecoderConfig::zero(&code.params);
        let a = exact(&[3, -1]);
        let b = exact(&[7, 2]);
        let c = exact(&[5]);
        let d = exact(&[-4]);
        let a1 = exact(&[9]);
        let a2 = exact(&[-6]);
        let e = structured_error(&code, &cfg, &a, &b, &c, &d, &a1, &a2).unwrap();
        let syn = extract_syndrome(&code, &e).unwrap();
        assert_eq!(syn.a, a);
        assert_eq!(syn.a1, a1);
        assert_eq!(syn.a2, a2);
    }

    #[test]
    fn example_unit_x_syndrome_in_row_order() {
        let code = example_code();
        let e = ErrorVector::new(PhaseVector::unit_x(8, 0));
        let syn = extract_syndrome(&code, &e).unwrap();
        // Row-major: rows 1,2 read the displacement, everything else silent.
        let rows = syn.row_major(&code);
        let expect = exact(&[1, 1, 0, 0, 0, 0]);
        assert_eq!(rows, expect);
        assert_eq!(syn.a, exact(&[1, 1, 0, 0]));
        assert_eq!(syn.a1, exact(&[0]));
        assert_eq!(syn.a2, exact(&[0]));
    }

    #[test]
    fn syndrome_blind_to_gauge_components() {
        let code = example_code();
        let e = ErrorVector::new(PhaseVector::unit_x(8, 1));
        let mut shifted = e.alice.clone();
        for g in code.gauge.rows() {
            shifted = shifted.add(&g.scale(&Scalar::ratio(3, 2))).unwrap();
        }
        let s1 = extract_syndrome(&code, &e).unwrap();
        let s2 = extract_syndrome(&code, &ErrorVector::new(shifted)).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn canonical_recovery_matches_reverse_map() {
        let params = canonical_code(1, 2, 1, 1).params;
        let cfg = DecoderConfig::zero(&params);
        let syn = Syndrome {
            a: exact(&[4, -2]),
            a1: exact(&[5]),
            a2: exact(&[7]),
        };
        let u = canonical_recovery(&syn, &cfg, &params).unwrap().alice;
        // (0, 0, 0, 0, a2 | 0, a, 0, a1) over (info, anc, anc, gauge, ebit).
        assert_eq!(u.p_part(), &exact(&[0, 0, 0, 0, 7])[..]);
        assert_eq!(u.x_part(), &exact(&[0, 4, -2, 0, 5])[..]);
    }

    #[test]
    fn decode_agrees_with_canonical_recovery() {
        let code = canonical_code(2, 2, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = DecoderConfig {
            alpha: (0..2)
                .map(|_| {
                    (0..6)
                        .map(|_| Scalar::ratio(rng.gen_range(-3..=3), 2))
                        .collect()
                })
                .collect(),
            beta: (0..2)
                .map(|_| {
                    (0..6)
                        .map(|_| Scalar::ratio(rng.gen_range(-3..=3), 2))
                        .collect()
                })
                .collect(),
        };
        for _ in 0..100 {
            let syn = Syndrome {
                a: (0..2)
                    .map(|_| Scalar::from_int(rng.gen_range(-5..=5)))
                    .collect(),
                a1: (0..2)
                    .map(|_| Scalar::from_int(rng.gen_range(-5..=5)))
                    .collect(),
                a2: (0..2)
                    .map(|_| Scalar::from_int(rng.gen_range(-5..=5)))
                    .collect(),
            };
            let direct = canonical_recovery(&syn, &cfg, &code.params).unwrap();
            let general = decode(&code, &syn, &cfg, 0.0).unwrap();
            assert_eq!(direct.alice, general.alice);
        }
    }

    #[test]
    fn decode_is_linear_in_the_syndrome() {
        let code = example_code();
        let cfg = DecoderConfig {
            alpha: vec![vec![Scalar::ratio(1, 3); 6]],
            beta: vec![vec![Scalar::from_int(-2); 6]],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rand_syn = || Syndrome {
            a: (0..4)
                .map(|_| Scalar::from_int(rng.gen_range(-4..=4)))
                .collect(),
            a1: vec![Scalar::from_int(rng.gen_range(-4..=4))],
            a2: vec![Scalar::from_int(rng.gen_range(-4..=4))],
        };
        for _ in 0..10 {
            let s1 = rand_syn();
            let s2 = rand_syn();
            let sum = Syndrome {
                a: s1.a.iter().zip(&s2.a).map(|(a, b)| a + b).collect(),
                a1: s1.a1.iter().zip(&s2.a1).map(|(a, b)| a + b).collect(),
                a2: s1.a2.iter().zip(&s2.a2).map(|(a, b)| a + b).collect(),
            };
            let u1 = decode(&code, &s1, &cfg, 0.0).unwrap();
            let u2 = decode(&code, &s2, &cfg, 0.0).unwrap();
            let u_sum = decode(&code, &sum, &cfg, 0.0).unwrap();
            assert_eq!(u_sum.alice, u1.alice.add(&u2.alice).unwrap());
        }
    }

    #[test]
    fn decode_cancels_the_syndrome() {
        let code = example_code();
        let cfg = DecoderConfig::zero(&code.params);
        let e = ErrorVector::new(PhaseVector::unit_p(8, 2));
        let syn = extract_syndrome(&code, &e).unwrap();
        let rec = decode(&code, &syn, &cfg, 0.0).unwrap();
        let net = ErrorVector::new(e.alice.sub(&rec.alice).unwrap());
        let post = extract_syndrome(&code, &net).unwrap();
        assert!(post.is_zero_within(0.0));
    }

    #[test]
    fn example_single_mode_errors_decode_consistently() {
        // The decoder cancels whatever the syndrome determines, so two
        // single-mode errors with equal syndromes must leave identical
        // residual logical displacements, and the residual equals the
        // error's own logical coordinates.
        let code = example_code();
        let cfg = DecoderConfig::zero(&code.params);
        let mut seen: Vec<(Vec<Scalar>, Vec<(Scalar, Scalar)>)> = Vec::new();
        for mode in 0..8 {
            for unit in [PhaseVector::unit_p(8, mode), PhaseVector::unit_x(8, mode)] {
                let e = ErrorVector::new(unit.clone());
                let syn = extract_syndrome(&code, &e).unwrap();
                let rec = decode(&code, &syn, &cfg, 0.0).unwrap();
                let net = ErrorVector::new(e.alice.sub(&rec.alice).unwrap());
                // Recovery always cancels the full syndrome.
                assert!(extract_syndrome(&code, &net).unwrap().is_zero_within(0.0));
                let res = residual_logical(&code, &net, 0.0).unwrap();
                // Identical syndromes force identical residuals; that is the
                // single-mode correctability of this code at work.
                let key = syn.row_major(&code);
                for (other_key, other_res) in &seen {
                    if *other_key == key {
                        assert_eq!(*other_res, res);
                    }
                }
                seen.push((key, res));
            }
        }
    }

    #[test]
    fn example_unit_error_logical_coordinates_frozen() {
        // Regression values for the adapted-basis decomposition: logical
        // (p-kick, x-shift) coordinates of every unit single-mode error.
        let code = example_code();
        let basis = crate::code::build_symplectic_basis(&code, 0.0).unwrap();
        let expect_p = [1, 1, 1, 0, 0, 0, 0, 0];
        let expect_x = [0, 0, 1, 0, 0, 1, 0, 1];
        for mode in 0..8 {
            let lp = basis
                .logical_components(&PhaseVector::unit_p(8, mode))
                .unwrap();
            assert_eq!(lp[0].0, Scalar::from_int(expect_p[mode]), "p unit {mode}");
            assert_eq!(lp[0].1, Scalar::zero());
            let lx = basis
                .logical_components(&PhaseVector::unit_x(8, mode))
                .unwrap();
            assert_eq!(lx[0].0, Scalar::zero());
            assert_eq!(lx[0].1, Scalar::from_int(expect_x[mode]), "x unit {mode}");
        }
    }

    #[test]
    fn residual_logical_reads_information_displacements() {
        let code = canonical_code(1, 1, 1, 1);
        let net = ErrorVector::new(PhaseVector::unit_x(4, 0));
        let res = residual_logical(&code, &net, 0.0).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].0, Scalar::zero());
        assert_eq!(res[0].1, Scalar::one());
        // Gauge components are invisible.
        let g = code.gauge.rows()[0].clone();
        let res_g = residual_logical(&code, &ErrorVector::new(g), 0.0).unwrap();
        assert_eq!(res_g[0].0, Scalar::zero());
        assert_eq!(res_g[0].1, Scalar::zero());
    }

    #[test]
    fn structured_errors_recover_exactly() {
        // Nonzero alpha/beta shared between error family and decoder.
        let code = canonical_code(1, 1, 1, 1);
        let cfg = DecoderConfig {
            alpha: vec![vec![
                Scalar::ratio(1, 2),
                Scalar::from_int(2),
                Scalar::from_int(-1),
            ]],
            beta: vec![vec![
                Scalar::from_int(3),
                Scalar::zero(),
                Scalar::ratio(-2, 3),
            ]],
        };
        let e = structured_error(
            &code,
            &cfg,
            &exact(&[5]),
            &exact(&[-7]),
            &exact(&[2]),
            &exact(&[9]),
            &exact(&[4]),
            &exact(&[-3]),
        )
        .unwrap();
        let syn = extract_syndrome(&code, &e).unwrap();
        let rec = decode(&code, &syn, &cfg, 0.0).unwrap();
        let net = ErrorVector::new(e.alice.sub(&rec.alice).unwrap());
        for (p, x) in residual_logical(&code, &net, 0.0).unwrap() {
            assert!(p.is_zero_within(0.0));
            assert!(x.is_zero_within(0.0));
        }
    }

    #[test]
    fn fixed_zero_noise_gives_zero_stats() {
        let code = canonical_code(1, 1, 0, 1);
        let cfg = DecoderConfig::zero(&code.params);
        let stats = run_trials(
            &code,
            &NoiseModel::Fixed(ErrorVector::zero(code.n())),
            &cfg,
            &SqueezingModel::ideal(),
            10,
            1,
        )
        .unwrap();
        assert_eq!(stats.trials, 10);
        assert_eq!(stats.rms_logical_p, 0.0);
        assert_eq!(stats.rms_logical_x, 0.0);
        assert_eq!(stats.frac_within_1e9, 1.0);
    }

    #[test]
    fn trials_are_bitwise_reproducible() {
        let code = canonical_code(1, 1, 1, 1);
        let cfg = DecoderConfig::zero(&code.params);
        let noise = NoiseModel::GaussianIid { sigma: 0.3 };
        let squeeze = SqueezingModel::finite_db(15.0).unwrap();
        let s1 = run_trials(&code, &noise, &cfg, &squeeze, 500, 42).unwrap();
        let s2 = run_trials(&code, &noise, &cfg, &squeeze, 500, 42).unwrap();
        assert_eq!(s1.rms_logical_p.to_bits(), s2.rms_logical_p.to_bits());
        assert_eq!(s1.rms_logical_x.to_bits(), s2.rms_logical_x.to_bits());
        assert_eq!(
            s1.mean_residual_norm.to_bits(),
            s2.mean_residual_norm.to_bits()
        );
        let s3 = run_trials(&code, &noise, &cfg, &squeeze, 500, 43).unwrap();
        assert_ne!(s1.rms_logical_p.to_bits(), s3.rms_logical_p.to_bits());
    }

    #[test]
    fn squeezing_noise_variance_follows_decibels() {
        assert_eq!(SqueezingModel::ideal().noise_sigma(), None);
        // 10 dB: variance 10^-1 / 2 = 0.05.
        let sigma = SqueezingModel::finite_db(10.0)
            .unwrap()
            .noise_sigma()
            .unwrap();
        assert!((sigma - 0.05f64.sqrt()).abs() < 1e-15);
        // 0 dB leaves the vacuum-scale half-unit variance.
        let raw = SqueezingModel::finite_db(0.0)
            .unwrap()
            .noise_sigma()
            .unwrap();
        assert!((raw - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_noise_rejected() {
        let code = canonical_code(1, 1, 0, 0);
        let cfg = DecoderConfig::zero(&code.params);
        let bad = NoiseModel::GaussianIid { sigma: 0.0 };
        assert!(run_trials(&code, &bad, &cfg, &SqueezingModel::ideal(), 5, 0).is_err());
        let oob = NoiseModel::SingleMode {
            mode: 9,
            p_kick: 1.0,
            x_shift: 0.0,
        };
        assert!(run_trials(&code, &oob, &cfg, &SqueezingModel::ideal(), 5, 0).is_err());
        assert!(SqueezingModel::finite_db(-3.0).is_err());
    }
}
