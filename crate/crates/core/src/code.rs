//! Construction, transformation, validation and analysis of
//! continuous-variable entanglement-assisted operator codes.
//!
//! A code protects `k` information modes with `l` ancilla modes (zero-position
//! eigenstates), `r` gauge modes (arbitrary mixed states) and `c` entangled
//! mode pairs shared with the receiver. The check matrix rows describe the
//! observables the receiver measures; the gauge matrix rows span the
//! displacement directions that are passively harmless. The canonical code
//! simply appends the redundancy modes; every other code is a symplectic
//! transform of it.

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase::{symplectic_product, PhaseVector};
use crate::scalar::Scalar;
use crate::symplectic::{complete_symplectic_basis, SymplecticMatrix};
use std::fmt;

/// Mode counts `(n, k, l, r, c)` with `n = k + l + r + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub c: usize,
}

impl CodeParams {
    pub fn new(k: usize, l: usize, r: usize, c: usize) -> Self {
        CodeParams {
            n: k + l + r + c,
            k,
            l,
            r,
            c,
        }
    }

    pub fn check_rows(&self) -> usize {
        self.l + 2 * self.c
    }
}

/// Role of a single sender-side mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeRole {
    Information,
    Ancilla,
    Gauge,
    Ebit,
}

/// Explicit per-mode role labels. Every operation consults these rather than
/// mode position, because different codes order their modes differently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRoles {
    roles: Vec<ModeRole>,
}

impl ModeRoles {
    pub fn new(roles: Vec<ModeRole>) -> Self {
        ModeRoles { roles }
    }

    /// Canonical layout: information, ancilla, gauge, ebit blocks in order.
    pub fn canonical(params: &CodeParams) -> Self {
        let mut roles = Vec::with_capacity(params.n);
        roles.extend(std::iter::repeat(ModeRole::Information).take(params.k));
        roles.extend(std::iter::repeat(ModeRole::Ancilla).take(params.l));
        roles.extend(std::iter::repeat(ModeRole::Gauge).take(params.r));
        roles.extend(std::iter::repeat(ModeRole::Ebit).take(params.c));
        ModeRoles { roles }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, mode: usize) -> ModeRole {
        self.roles[mode]
    }

    pub fn as_slice(&self) -> &[ModeRole] {
        &self.roles
    }

    /// Mode indices carrying `role`, ascending.
    pub fn modes_with(&self, role: ModeRole) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == role)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, role: ModeRole) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    pub fn matches(&self, params: &CodeParams) -> bool {
        self.len() == params.n
            && self.count(ModeRole::Information) == params.k
            && self.count(ModeRole::Ancilla) == params.l
            && self.count(ModeRole::Gauge) == params.r
            && self.count(ModeRole::Ebit) == params.c
    }
}

/// Which observable family a check row belongs to.
///
/// `Ancilla` rows read ancilla displacements and have no receiver half.
/// `EbitZ` rows carry the receiver's momentum-block unit, `EbitX` rows the
/// position-block unit; the two rows referencing the same entangled pair
/// commute only through that receiver contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Ancilla,
    EbitZ,
    EbitX,
}

impl CheckKind {
    pub fn label(&self) -> &'static str {
        match self {
            CheckKind::Ancilla => "ancilla",
            CheckKind::EbitZ => "ebit_z",
            CheckKind::EbitX => "ebit_x",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "ancilla" => Some(CheckKind::Ancilla),
            "ebit_z" => Some(CheckKind::EbitZ),
            "ebit_x" => Some(CheckKind::EbitX),
            _ => None,
        }
    }
}

/// One measured observable: a sender part over `n` modes and a receiver part
/// over the `c` entangled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub alice: PhaseVector,
    pub bob: PhaseVector,
    pub kind: CheckKind,
}

impl CheckRow {
    /// The row as one vector over `n + c` modes, sender modes first.
    pub fn full_vector(&self) -> PhaseVector {
        self.alice.concat(&self.bob)
    }

    /// Index of the receiver mode this row references, if any.
    pub fn bob_mode(&self) -> Option<usize> {
        let c = self.bob.dim_modes();
        (0..c).find(|&m| {
            !self.bob.p_at(m).is_zero_within(0.0) || !self.bob.x_at(m).is_zero_within(0.0)
        })
    }
}

/// Rows spanning the passively correctable displacement directions,
/// arranged as conjugate pairs: rows `2i` and `2i+1` pair to product one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrix {
    rows: Vec<PhaseVector>,
}

impl GaugeMatrix {
    pub fn new(rows: Vec<PhaseVector>) -> Result<Self> {
        if rows.len() % 2 != 0 {
            return Err(Error::BadShape {
                rows: rows.len(),
                cols: 0,
            });
        }
        Ok(GaugeMatrix { rows })
    }

    pub fn empty() -> Self {
        GaugeMatrix { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[PhaseVector] {
        &self.rows
    }

    pub fn num_pairs(&self) -> usize {
        self.rows.len() / 2
    }

    pub fn pair(&self, i: usize) -> (&PhaseVector, &PhaseVector) {
        (&self.rows[2 * i], &self.rows[2 * i + 1])
    }
}

/// A continuous-variable entanglement-assisted operator code.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    pub params: CodeParams,
    pub roles: ModeRoles,
    pub checks: Vec<CheckRow>,
    pub gauge: GaugeMatrix,
    /// Symplectic transform relating this code to its canonical ancestor,
    /// when known.
    pub upsilon: Option<SymplecticMatrix>,
}

impl Code {
    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Sender parts of the check rows with the given kind, in row order.
    pub fn alice_rows(&self, kind: CheckKind) -> Vec<&PhaseVector> {
        self.checks
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| &r.alice)
            .collect()
    }

    /// Sender parts of both ebit-kind row families, in row order.
    pub fn ebit_alice_rows(&self) -> Vec<&PhaseVector> {
        self.checks
            .iter()
            .filter(|r| r.kind != CheckKind::Ancilla)
            .map(|r| &r.alice)
            .collect()
    }

    pub fn approx_eq(&self, other: &Code, tol: f64) -> bool {
        self.params == other.params
            && self.roles == other.roles
            && self.checks.len() == other.checks.len()
            && self.checks.iter().zip(&other.checks).all(|(a, b)| {
                a.kind == b.kind && a.alice.approx_eq(&b.alice, tol) && a.bob.approx_eq(&b.bob, tol)
            })
            && self.gauge.rows().len() == other.gauge.rows().len()
            && self
                .gauge
                .rows()
                .iter()
                .zip(other.gauge.rows())
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// The canonical code: the encoder appends `l` ancilla modes, `r` gauge
/// modes and `c` entangled modes to the `k` information modes, in that
/// order. Check rows are the ancilla position observables, the relative
/// position and the total momentum of each entangled pair.
pub fn canonical_code(k: usize, l: usize, r: usize, c: usize) -> Code {
    let params = CodeParams::new(k, l, r, c);
    let n = params.n;
    let roles = ModeRoles::canonical(&params);
    let ancilla0 = k;
    let gauge0 = k + l;
    let ebit0 = k + l + r;

    let mut checks = Vec::with_capacity(params.check_rows());
    for i in 0..l {
        checks.push(CheckRow {
            alice: PhaseVector::unit_p(n, ancilla0 + i),
            bob: PhaseVector::zero(c),
            kind: CheckKind::Ancilla,
        });
    }
    for i in 0..c {
        // Relative position: x_A - x_B.
        let mut bob = PhaseVector::zero(c);
        bob.set_p(i, Scalar::from_int(-1));
        checks.push(CheckRow {
            alice: PhaseVector::unit_p(n, ebit0 + i),
            bob,
            kind: CheckKind::EbitZ,
        });
    }
    for i in 0..c {
        // Total momentum: p_A + p_B.
        let mut bob = PhaseVector::zero(c);
        bob.set_x(i, Scalar::one());
        checks.push(CheckRow {
            alice: PhaseVector::unit_x(n, ebit0 + i),
            bob,
            kind: CheckKind::EbitX,
        });
    }

    let mut gauge_rows = Vec::with_capacity(2 * r);
    for j in 0..r {
        gauge_rows.push(PhaseVector::unit_p(n, gauge0 + j));
        gauge_rows.push(PhaseVector::unit_x(n, gauge0 + j));
    }

    Code {
        params,
        roles,
        checks,
        gauge: GaugeMatrix { rows: gauge_rows },
        upsilon: Some(SymplecticMatrix::identity(n)),
    }
}

/// Transforms a code by a symplectic matrix: every check row's sender part
/// and every gauge row is replaced by its image `row Y^T`. Receiver blocks,
/// kinds, roles and parameters are untouched; the stored encoding map
/// becomes the composition.
pub fn apply_symplectic(code: &Code, upsilon: &SymplecticMatrix, tol: f64) -> Result<Code> {
    if upsilon.dim_modes() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            got: upsilon.dim_modes(),
        });
    }
    if !upsilon.is_symplectic(tol) {
        return Err(Error::NotSymplectic {
            residual: upsilon.symplectic_residual(),
        });
    }
    let checks = code
        .checks
        .iter()
        .map(|row| {
            Ok(CheckRow {
                alice: upsilon.apply_to_row(&row.alice)?,
                bob: row.bob.clone(),
                kind: row.kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gauge_rows = code
        .gauge
        .rows()
        .iter()
        .map(|g| upsilon.apply_to_row(g))
        .collect::<Result<Vec<_>>>()?;
    let composed = match &code.upsilon {
        Some(prev) => Some(upsilon.matmul(prev)?),
        None => Some(upsilon.clone()),
    };
    Ok(Code {
        params: code.params,
        roles: code.roles.clone(),
        checks,
        gauge: GaugeMatrix { rows: gauge_rows },
        upsilon: composed,
    })
}

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Per-invariant pass/fail report; failures carry the offending indices.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            let status = if check.passed { "ok" } else { "FAIL" };
            if check.detail.is_empty() {
                writeln!(f, "{:<14} {}", check.name, status)?;
            } else {
                writeln!(f, "{:<14} {} ({})", check.name, status, check.detail)?;
            }
        }
        Ok(())
    }
}

/// Checks every structural invariant of a code: parameter bookkeeping, row
/// shapes, receiver-block patterns, pairwise commutation of the measured
/// observables, check-matrix rank and gauge pairing.
pub fn validate(code: &Code, tol: f64) -> ValidationReport {
    let mut checks = Vec::new();
    let p = &code.params;
    let mut push = |name: &'static str, passed: bool, detail: String| {
        checks.push(ValidationCheck {
            name,
            passed,
            detail,
        });
    };

    let params_ok = p.n == p.k + p.l + p.r + p.c && code.roles.matches(p);
    push(
        "params",
        params_ok,
        if params_ok {
            String::new()
        } else {
            format!(
                "n={} k={} l={} r={} c={}, role counts ({},{},{},{})",
                p.n,
                p.k,
                p.l,
                p.r,
                p.c,
                code.roles.count(ModeRole::Information),
                code.roles.count(ModeRole::Ancilla),
                code.roles.count(ModeRole::Gauge),
                code.roles.count(ModeRole::Ebit),
            )
        },
    );

    // Row and kind bookkeeping.
    let mut shape_bad = Vec::new();
    for (i, row) in code.checks.iter().enumerate() {
        if row.alice.dim_modes() != p.n || row.bob.dim_modes() != p.c {
            shape_bad.push(i);
        }
    }
    let n_anc = code.alice_rows(CheckKind::Ancilla).len();
    let n_ez = code.alice_rows(CheckKind::EbitZ).len();
    let n_ex = code.alice_rows(CheckKind::EbitX).len();
    let counts_ok =
        n_anc == p.l && n_ez == p.c && n_ex == p.c && code.checks.len() == p.check_rows();
    push(
        "row-shape",
        shape_bad.is_empty() && counts_ok,
        if shape_bad.is_empty() && counts_ok {
            String::new()
        } else {
            format!(
                "bad rows {:?}, kind counts ancilla={} ebit_z={} ebit_x={}",
                shape_bad, n_anc, n_ez, n_ex
            )
        },
    );

    // Receiver blocks: ancilla rows empty; each ebit row holds one +-1 unit
    // in its own half, one row of each kind per receiver mode.
    let mut bob_bad = Vec::new();
    let mut seen_z = vec![0usize; p.c];
    let mut seen_x = vec![0usize; p.c];
    for (i, row) in code.checks.iter().enumerate() {
        match row.kind {
            CheckKind::Ancilla => {
                if !row.bob.is_zero_within(tol) {
                    bob_bad.push(i);
                }
            }
            CheckKind::EbitZ | CheckKind::EbitX => {
                let (own, other): (&[Scalar], &[Scalar]) = if row.kind == CheckKind::EbitZ {
                    (row.bob.p_part(), row.bob.x_part())
                } else {
                    (row.bob.x_part(), row.bob.p_part())
                };
                let nonzero: Vec<usize> = own
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero_within(tol))
                    .map(|(m, _)| m)
                    .collect();
                let other_clean = other.iter().all(|s| s.is_zero_within(tol));
                let unit =
                    nonzero.len() == 1 && own[nonzero[0]].abs().approx_eq(&Scalar::one(), tol);
                if !(other_clean && unit) {
                    bob_bad.push(i);
                } else if row.kind == CheckKind::EbitZ {
                    seen_z[nonzero[0]] += 1;
                } else {
                    seen_x[nonzero[0]] += 1;
                }
            }
        }
    }
    let coverage_ok = seen_z.iter().all(|&s| s == 1) && seen_x.iter().all(|&s| s == 1);
    push(
        "bob-blocks",
        bob_bad.is_empty() && coverage_ok,
        if bob_bad.is_empty() && coverage_ok {
            String::new()
        } else {
            format!(
                "bad rows {:?}, z coverage {:?}, x coverage {:?}",
                bob_bad, seen_z, seen_x
            )
        },
    );

    // All measured observables must commute, receiver halves included.
    let fulls: Vec<PhaseVector> = code.checks.iter().map(|r| r.full_vector()).collect();
    let mut nc_pairs = Vec::new();
    for i in 0..fulls.len() {
        for j in (i + 1)..fulls.len() {
            match symplectic_product(&fulls[i], &fulls[j]) {
                Ok(prod) if prod.is_zero_within(tol) => {}
                _ => nc_pairs.push((i, j)),
            }
        }
    }
    push(
        "commutation",
        nc_pairs.is_empty(),
        if nc_pairs.is_empty() {
            String::new()
        } else {
            format!("non-commuting row pairs {:?}", nc_pairs)
        },
    );

    let flat: Vec<Vec<Scalar>> = fulls.iter().map(|v| v.to_flat()).collect();
    let rank = linalg::rank(&flat, tol);
    push(
        "rank",
        rank == code.checks.len(),
        if rank == code.checks.len() {
            String::new()
        } else {
            format!("rank {} of {} rows", rank, code.checks.len())
        },
    );

    // Gauge rows: conjugate pairs inside, orthogonal across, each of
    // dimension n, and commuting with every check row.
    let mut gauge_bad = Vec::new();
    let g = &code.gauge;
    let pairs_ok = g.rows().len() == 2 * p.r;
    for (i, row) in g.rows().iter().enumerate() {
        if row.dim_modes() != p.n {
            gauge_bad.push(format!("row {i} dimension"));
        }
    }
    if pairs_ok && gauge_bad.is_empty() {
        for a in 0..g.rows().len() {
            for b in (a + 1)..g.rows().len() {
                let expect = if a / 2 == b / 2 { 1 } else { 0 };
                match symplectic_product(&g.rows()[a], &g.rows()[b]) {
                    Ok(prod) => {
                        if !(&prod - &Scalar::from_int(expect)).is_zero_within(tol) {
                            gauge_bad.push(format!("pair product ({a},{b})"));
                        }
                    }
                    Err(_) => gauge_bad.push(format!("pair product ({a},{b})")),
                }
            }
        }
        for (gi, grow) in g.rows().iter().enumerate() {
            let gfull = grow.concat(&PhaseVector::zero(p.c));
            for (fi, frow) in fulls.iter().enumerate() {
                match symplectic_product(&gfull, frow) {
                    Ok(prod) if prod.is_zero_within(tol) => {}
                    _ => gauge_bad.push(format!("gauge {gi} vs check {fi}")),
                }
            }
        }
    } else if !pairs_ok {
        gauge_bad.push(format!("{} rows for r={}", g.rows().len(), p.r));
    }
    push("gauge-pairing", gauge_bad.is_empty(), gauge_bad.join(", "));

    if let Some(upsilon) = &code.upsilon {
        let ok = upsilon.dim_modes() == p.n && upsilon.is_symplectic(tol);
        push(
            "upsilon",
            ok,
            if ok {
                String::new()
            } else {
                format!("residual {:.3e}", upsilon.symplectic_residual())
            },
        );
    }

    ValidationReport { checks }
}

fn int_rows(rows: &[&[i64]], n: usize) -> Vec<PhaseVector> {
    rows.iter()
        .map(|flat| {
            let p = flat[..n].iter().map(|&v| Scalar::from_int(v)).collect();
            let x = flat[n..].iter().map(|&v| Scalar::from_int(v)).collect();
            PhaseVector::new(p, x).unwrap()
        })
        .collect()
}

/// Eight-mode example: one information mode protected by four ancilla
/// modes, two gauge modes and one entangled pair, lifted from a discrete
/// subsystem code by sign assignment. Mode roles: information is mode 8,
/// the sender ebit half is mode 4, ancillas are modes 1,2,3,5 and gauge
/// modes are 6,7 (1-based). Returns the encoded code.
pub fn example_code() -> Code {
    let mut code = example_code_raw();
    // The generating transform is reconstructed from the unencoded and
    // encoded check systems; any symplectic completion agreeing on the rows
    // is equally valid.
    if let Ok(map) = example_encoding_map() {
        code.upsilon = Some(map);
    }
    code
}

fn example_roles() -> ModeRoles {
    use ModeRole::*;
    ModeRoles::new(vec![
        Ancilla,
        Ancilla,
        Ancilla,
        Ebit,
        Ancilla,
        Gauge,
        Gauge,
        Information,
    ])
}

fn example_bob_rows() -> (PhaseVector, PhaseVector) {
    // Receiver halves of the two ebit rows, as printed in the augmented
    // check matrix: the position-block unit on the X-type row and the
    // momentum-block unit on the Z-type row, both positive.
    let mut bob_x = PhaseVector::zero(1);
    bob_x.set_x(0, Scalar::one());
    let mut bob_z = PhaseVector::zero(1);
    bob_z.set_p(0, Scalar::one());
    (bob_x, bob_z)
}

fn example_check_rows(f_rows: Vec<PhaseVector>) -> Vec<CheckRow> {
    let (bob_x, bob_z) = example_bob_rows();
    let kinds = [
        (CheckKind::Ancilla, None),
        (CheckKind::Ancilla, None),
        (CheckKind::Ancilla, None),
        (CheckKind::EbitX, Some(bob_x)),
        (CheckKind::EbitZ, Some(bob_z)),
        (CheckKind::Ancilla, None),
    ];
    f_rows
        .into_iter()
        .zip(kinds)
        .map(|(alice, (kind, bob))| CheckRow {
            alice,
            bob: bob.unwrap_or_else(|| PhaseVector::zero(1)),
            kind,
        })
        .collect()
}

fn example_code_raw() -> Code {
    let n = 8;
    let params = CodeParams::new(1, 4, 2, 1);
    let f_rows = int_rows(
        &[
            &[
                1, -1, 0, 1, -1, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0,
            ],
            &[
                1, 0, -1, 1, 0, -1, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0,
            ],
            &[0, 0, 0, 0, 0, 0, 1, -1, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[
                0, 0, 0, 0, 0, 0, 0, 0, /* | */ 1, 1, 1, 0, 0, 0, -1, -1,
            ],
            &[0, 0, 0, 0, 0, 0, 0, 1, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[
                0, 0, 0, 0, 0, 0, 0, 0, /* | */ 1, 1, 1, -1, -1, -1, 0, 0,
            ],
        ],
        n,
    );
    let g_rows = int_rows(
        &[
            &[0, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 1, 0, 0, -1, 0, 0, 0],
            &[1, -1, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 1, 0, -1, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 1, 0, 0, -1, 0, 0],
        ],
        n,
    );
    Code {
        params,
        roles: example_roles(),
        checks: example_check_rows(f_rows),
        gauge: GaugeMatrix { rows: g_rows },
        upsilon: None,
    }
}

/// The unencoded starting point of the example: position observables on the
/// four ancilla modes, the ebit row pair on mode 4, and position/momentum
/// gauge pairs on modes 6 and 7 (1-based), with the same role labels and
/// receiver halves as the encoded form.
pub fn example_code_unencoded() -> Code {
    let n = 8;
    let params = CodeParams::new(1, 4, 2, 1);
    let f_rows = int_rows(
        &[
            &[1, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 1, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 1, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 1, 0, 0, 0, 0],
            &[0, 0, 0, 0, 1, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
        ],
        n,
    );
    let g_rows = int_rows(
        &[
            &[0, 0, 0, 0, 0, 1, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 1, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1, 0, /* | */ 0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0, /* | */ 0, 0, 0, 0, 0, 0, 1, 0],
        ],
        n,
    );
    Code {
        params,
        roles: example_roles(),
        checks: example_check_rows(f_rows),
        gauge: GaugeMatrix { rows: g_rows },
        upsilon: Some(SymplecticMatrix::identity(n)),
    }
}

/// Reconstructs a symplectic matrix carrying the unencoded example's check
/// and gauge rows onto the encoded ones. The images of those rows are fixed;
/// the rest of the map is a symplectic completion, canonical only up to the
/// deterministic construction used here.
pub fn example_encoding_map() -> Result<SymplecticMatrix> {
    let source = example_code_unencoded();
    let target = example_code_raw();
    let from = build_symplectic_basis(&source, 0.0)?;
    let to = build_symplectic_basis(&target, 0.0)?;
    let m_from: Vec<Vec<Scalar>> = from.ordered_vectors().iter().map(|v| v.to_flat()).collect();
    let m_to: Vec<Vec<Scalar>> = to.ordered_vectors().iter().map(|v| v.to_flat()).collect();
    // Row action u -> u Y^T on each basis vector: M_from Y^T = M_to.
    let inv = linalg::invert(&m_from, 0.0)
        .ok_or_else(|| Error::Unsolvable("basis matrix is singular".into()))?;
    let yt = linalg::matmul(&inv, &m_to);
    let y = SymplecticMatrix::from_rows(yt)?.transpose();
    if !y.is_symplectic(0.0) {
        return Err(Error::NotSymplectic {
            residual: y.symplectic_residual(),
        });
    }
    Ok(y)
}

/// A full symplectic basis of the sender's phase space adapted to a code:
/// stabilizers (sender parts of ancilla rows) with completed destabilizer
/// partners, the ebit conjugate pairs, the gauge pairs and the logical
/// pairs. Every named pair has product one; all other products vanish.
#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    pub stabilizers: Vec<PhaseVector>,
    pub destabilizers: Vec<PhaseVector>,
    pub ebit_pairs: Vec<(PhaseVector, PhaseVector)>,
    pub gauge_pairs: Vec<(PhaseVector, PhaseVector)>,
    pub logical_pairs: Vec<(PhaseVector, PhaseVector)>,
}

impl SymplecticBasis {
    /// All `2n` vectors in the fixed order: stabilizers, destabilizers,
    /// ebit pairs flattened, gauge pairs, logical pairs.
    pub fn ordered_vectors(&self) -> Vec<PhaseVector> {
        let mut out = Vec::new();
        out.extend(self.stabilizers.iter().cloned());
        out.extend(self.destabilizers.iter().cloned());
        for (u, v) in &self.ebit_pairs {
            out.push(u.clone());
            out.push(v.clone());
        }
        for (u, v) in &self.gauge_pairs {
            out.push(u.clone());
            out.push(v.clone());
        }
        for (u, v) in &self.logical_pairs {
            out.push(u.clone());
            out.push(v.clone());
        }
        out
    }

    /// Coefficients of `net` along the logical pairs: one `(p-kick, x-shift)`
    /// per information mode. Extracted by pairing against the conjugate
    /// partner, so every non-logical component drops out.
    pub fn logical_components(&self, net: &PhaseVector) -> Result<Vec<(Scalar, Scalar)>> {
        self.logical_pairs
            .iter()
            .map(|(lz, lx)| {
                let p_kick = symplectic_product(net, lx)?;
                let x_shift = -symplectic_product(net, lz)?;
                Ok((p_kick, x_shift))
            })
            .collect()
    }
}

/// Builds the adapted symplectic basis for a validated code. The syndrome
/// determines the destabilizer and ebit coefficients of an error in this
/// basis; the decoder cancels exactly those.
pub fn build_symplectic_basis(code: &Code, tol: f64) -> Result<SymplecticBasis> {
    let report = validate(code, tol);
    if !report.all_passed() {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        return Err(Error::InvalidCode(names.join(", ")));
    }
    let stabilizers: Vec<PhaseVector> = code
        .alice_rows(CheckKind::Ancilla)
        .into_iter()
        .cloned()
        .collect();

    // One conjugate pair per receiver mode, normalized to product one. The
    // receiver halves guarantee the sender parts pair to +-1.
    let mut ebit_pairs = Vec::with_capacity(code.params.c);
    for m in 0..code.params.c {
        let ez = code
            .checks
            .iter()
            .find(|r| r.kind == CheckKind::EbitZ && r.bob_mode() == Some(m))
            .ok_or_else(|| Error::InvalidCode(format!("missing ebit_z row for pair {m}")))?;
        let ex = code
            .checks
            .iter()
            .find(|r| r.kind == CheckKind::EbitX && r.bob_mode() == Some(m))
            .ok_or_else(|| Error::InvalidCode(format!("missing ebit_x row for pair {m}")))?;
        let omega = symplectic_product(&ez.alice, &ex.alice)?;
        if omega.is_zero_within(tol) {
            return Err(Error::InvalidCode(format!(
                "degenerate ebit pair {m}: sender parts do not pair"
            )));
        }
        ebit_pairs.push((ez.alice.scale(&omega.recip()), ex.alice.clone()));
    }

    let gauge_pairs: Vec<(PhaseVector, PhaseVector)> = (0..code.gauge.num_pairs())
        .map(|i| {
            let (u, v) = code.gauge.pair(i);
            (u.clone(), v.clone())
        })
        .collect();

    let mut known_pairs = ebit_pairs.clone();
    known_pairs.extend(gauge_pairs.iter().cloned());
    let (destabilizers, logical_pairs) =
        complete_symplectic_basis(&known_pairs, &stabilizers, code.n(), tol)?;
    if logical_pairs.len() != code.params.k {
        return Err(Error::Unsolvable(format!(
            "expected {} logical pairs, completion produced {}",
            code.params.k,
            logical_pairs.len()
        )));
    }
    Ok(SymplecticBasis {
        stabilizers,
        destabilizers,
        ebit_pairs,
        gauge_pairs,
        logical_pairs,
    })
}

/// Flattened sender rows used by the correctability tests: the ancilla-kind
/// rows and the gauge rows.
fn harmless_span(code: &Code) -> Vec<Vec<Scalar>> {
    let mut span: Vec<Vec<Scalar>> = code
        .alice_rows(CheckKind::Ancilla)
        .iter()
        .map(|v| v.to_flat())
        .collect();
    span.extend(code.gauge.rows().iter().map(|v| v.to_flat()));
    span
}

/// Whether the code can tell the two errors apart or absorb their
/// difference: true when `e - e2` either fails to commute with some measured
/// row (the difference is detected) or lies in the span of the ancilla rows
/// and the gauge rows (the difference acts trivially).
pub fn correctable_pair(code: &Code, e: &PhaseVector, e2: &PhaseVector, tol: f64) -> Result<bool> {
    if e.dim_modes() != code.n() || e2.dim_modes() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            got: e.dim_modes().max(e2.dim_modes()),
        });
    }
    let diff = e.sub(e2)?;

    // Detected: outside the symplectic dual of span(F_I) + span(F_E).
    for row in code
        .alice_rows(CheckKind::Ancilla)
        .iter()
        .chain(code.ebit_alice_rows().iter())
    {
        if !symplectic_product(&diff, row)?.is_zero_within(tol) {
            return Ok(true);
        }
    }

    // Harmless: inside span(F_I) + span(G).
    Ok(linalg::in_span(&harmless_span(code), &diff.to_flat(), tol))
}

/// Decides correctability of every single-mode error pair at once: for each
/// mode pair `(i, j)`, any vector supported on those modes that evades all
/// measured rows must lie in the span of the ancilla and gauge rows.
pub fn single_mode_correctability(code: &Code, tol: f64) -> Result<bool> {
    let report = validate(code, tol);
    if !report.all_passed() {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        return Err(Error::InvalidCode(names.join(", ")));
    }
    let n = code.n();
    let harmless = harmless_span(code);
    let detect_rows: Vec<PhaseVector> = code
        .alice_rows(CheckKind::Ancilla)
        .into_iter()
        .chain(code.ebit_alice_rows())
        .cloned()
        .collect();

    for i in 0..n {
        for j in i..n {
            let mut support = vec![PhaseVector::unit_p(n, i), PhaseVector::unit_x(n, i)];
            if j != i {
                support.push(PhaseVector::unit_p(n, j));
                support.push(PhaseVector::unit_x(n, j));
            }
            // Coefficient-space constraints: one row per measured observable.
            let constraints: Vec<Vec<Scalar>> = detect_rows
                .iter()
                .map(|f| {
                    support
                        .iter()
                        .map(|s| symplectic_product(f, s))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            for coeffs in linalg::nullspace(&constraints, support.len(), tol) {
                let mut v = PhaseVector::zero(n);
                for (c, s) in coeffs.iter().zip(&support) {
                    v = v.add(&s.scale(c))?;
                }
                if !linalg::in_span(&harmless, &v.to_flat(), tol) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::syndrome_pairing;

    #[test]
    fn canonical_small_matches_block_pattern() {
        let code = canonical_code(1, 1, 1, 1);
        assert_eq!(code.n(), 4);
        assert_eq!(code.checks.len(), 3);
        assert_eq!(code.gauge.rows().len(), 2);
        // Ancilla position observable on mode 2 (0-based 1).
        assert_eq!(code.checks[0].alice, PhaseVector::unit_p(4, 1));
        assert!(code.checks[0].bob.is_zero_within(0.0));
        // Relative position: sender momentum-block unit on the ebit mode,
        // receiver -1 in the momentum block.
        assert_eq!(code.checks[1].alice, PhaseVector::unit_p(4, 3));
        assert_eq!(*code.checks[1].bob.p_at(0), Scalar::from_int(-1));
        // Total momentum: position-block units, receiver +1.
        assert_eq!(code.checks[2].alice, PhaseVector::unit_x(4, 3));
        assert_eq!(*code.checks[2].bob.x_at(0), Scalar::one());
        assert!(validate(&code, 0.0).all_passed());
    }

    #[test]
    fn canonical_ebit_rows_commute_through_bob() {
        let code = canonical_code(1, 1, 1, 1);
        let z = code.checks[1].full_vector();
        let x = code.checks[2].full_vector();
        assert!(symplectic_product(&z, &x).unwrap().is_zero_within(0.0));
        // Sender parts alone form the hyperbolic pair.
        let alice = symplectic_product(&code.checks[1].alice, &code.checks[2].alice).unwrap();
        assert_eq!(alice, Scalar::one());
    }

    #[test]
    fn canonical_trivial_code_is_bare() {
        let code = canonical_code(1, 0, 0, 0);
        assert_eq!(code.n(), 1);
        assert!(code.checks.is_empty());
        assert!(code.gauge.rows().is_empty());
        assert!(validate(&code, 0.0).all_passed());
    }

    #[test]
    fn validate_catches_flipped_bob_sign() {
        let mut code = canonical_code(1, 1, 0, 1);
        // Flip the receiver sign on the total-momentum row.
        code.checks[2].bob.set_x(0, Scalar::from_int(-1));
        let report = validate(&code, 0.0);
        assert!(!report.all_passed());
        let failing: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        assert!(failing.contains(&"commutation"), "failing: {failing:?}");
    }

    #[test]
    fn apply_identity_is_noop() {
        let code = canonical_code(2, 1, 1, 1);
        let out = apply_symplectic(&code, &SymplecticMatrix::identity(code.n()), 0.0).unwrap();
        assert!(out.approx_eq(&code, 0.0));
    }

    #[test]
    fn apply_standard_form_swaps_blocks() {
        let code = canonical_code(1, 1, 0, 0);
        let j = SymplecticMatrix::standard_form(code.n());
        let out = apply_symplectic(&code, &j, 0.0).unwrap();
        // Row (p|x) maps to (x|-p): the ancilla position row becomes a
        // momentum row with sign.
        let expect = PhaseVector::unit_x(2, 1).neg();
        assert_eq!(out.checks[0].alice, expect);
    }

    #[test]
    fn apply_composes_the_stored_encoding() {
        let code = canonical_code(1, 1, 0, 1);
        let j = SymplecticMatrix::standard_form(code.n());
        let once = apply_symplectic(&code, &j, 0.0).unwrap();
        let twice = apply_symplectic(&once, &j, 0.0).unwrap();
        let expect = j.matmul(&j).unwrap();
        assert!(twice.upsilon.as_ref().unwrap().approx_eq(&expect, 0.0));
        assert_eq!(twice.params, code.params);
        assert_eq!(twice.roles, code.roles);
    }

    #[test]
    fn apply_rejects_non_symplectic() {
        let code = canonical_code(1, 1, 0, 0);
        let rows = vec![
            vec![
                Scalar::from_int(2),
                Scalar::zero(),
                Scalar::zero(),
                Scalar::zero(),
            ],
            vec![
                Scalar::zero(),
                Scalar::one(),
                Scalar::zero(),
                Scalar::zero(),
            ],
            vec![
                Scalar::zero(),
                Scalar::zero(),
                Scalar::one(),
                Scalar::zero(),
            ],
            vec![
                Scalar::zero(),
                Scalar::zero(),
                Scalar::zero(),
                Scalar::one(),
            ],
        ];
        let m = SymplecticMatrix::from_rows(rows).unwrap();
        assert!(matches!(
            apply_symplectic(&code, &m, 0.0),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn larger_canonical_codes_validate() {
        assert!(validate(&canonical_code(2, 3, 1, 2), 0.0).all_passed());
    }

    #[test]
    fn canonical_ebit_alice_parts_form_one_hyperbolic_pair() {
        use crate::symplectic::symplectic_gram_schmidt;
        let code = canonical_code(1, 1, 1, 1);
        let rows: Vec<PhaseVector> = code.ebit_alice_rows().into_iter().cloned().collect();
        let (pairs, isotropic) = symplectic_gram_schmidt(&rows, 0.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(isotropic.is_empty());
    }

    #[test]
    fn permuted_canonical_matches_unencoded_example() {
        // canonical(1,4,2,1) in canonical mode order, relabeled into the
        // example's role layout, reproduces the example's unencoded sender
        // rows (receiver sign conventions differ and are not compared).
        let code = canonical_code(1, 4, 2, 1);
        // Canonical modes (info, anc x4, gauge x2, ebit) land on example
        // modes (8; 1,2,3,5; 6,7; 4), zero-based below.
        let perm = SymplecticMatrix::mode_permutation(&[7, 0, 1, 2, 4, 5, 6, 3]).unwrap();
        let moved = apply_symplectic(&code, &perm, 0.0).unwrap();
        let target = example_code_unencoded();
        // Row correspondence: canonical [anc0..anc3, ez, ex] appear in the
        // example as rows [0, 1, 2, 5, 3, 4].
        let row_map = [0usize, 1, 2, 5, 3, 4];
        for (ours, theirs) in row_map.iter().enumerate() {
            assert_eq!(
                moved.checks[ours].alice, target.checks[*theirs].alice,
                "check row {ours}"
            );
        }
        for (ours, theirs) in moved.gauge.rows().iter().zip(target.gauge.rows()) {
            assert_eq!(ours, theirs);
        }
    }

    #[test]
    fn example_code_validates() {
        let code = example_code();
        let report = validate(&code, 0.0);
        assert!(report.all_passed(), "{report}");
        let unenc = example_code_unencoded();
        assert!(validate(&unenc, 0.0).all_passed());
    }

    #[test]
    fn example_code_frozen_entries() {
        let code = example_code();
        // First encoded check row, momentum block.
        let expect: Vec<Scalar> = [1i64, -1, 0, 1, -1, 0, 0, 0]
            .iter()
            .map(|&v| Scalar::from_int(v))
            .collect();
        assert_eq!(code.checks[0].alice.p_part(), &expect[..]);
        // Second gauge row, momentum block.
        let expect_g: Vec<Scalar> = [1i64, -1, 0, 0, 0, 0, 0, 0]
            .iter()
            .map(|&v| Scalar::from_int(v))
            .collect();
        assert_eq!(code.gauge.rows()[1].p_part(), &expect_g[..]);
    }

    #[test]
    fn example_encoding_map_carries_rows() {
        let y = example_encoding_map().unwrap();
        assert!(y.is_symplectic(0.0));
        let unenc = example_code_unencoded();
        let image = apply_symplectic(&unenc, &y, 0.0).unwrap();
        let target = example_code();
        assert!(image.approx_eq(&target, 0.0));
    }

    #[test]
    fn canonical_basis_is_the_standard_one() {
        let code = canonical_code(1, 1, 1, 1);
        let basis = build_symplectic_basis(&code, 0.0).unwrap();
        assert_eq!(basis.stabilizers.len(), 1);
        assert_eq!(basis.destabilizers.len(), 1);
        assert_eq!(basis.ebit_pairs.len(), 1);
        assert_eq!(basis.gauge_pairs.len(), 1);
        assert_eq!(basis.logical_pairs.len(), 1);
        // Logical pair sits on the information mode as unit p and unit x.
        assert_eq!(basis.logical_pairs[0].0, PhaseVector::unit_p(4, 0));
        assert_eq!(basis.logical_pairs[0].1, PhaseVector::unit_x(4, 0));
        // Destabilizer is the ancilla position displacement.
        assert_eq!(basis.destabilizers[0], PhaseVector::unit_x(4, 1));
    }

    #[test]
    fn basis_product_table_is_standard() {
        for code in [canonical_code(2, 1, 1, 1), example_code()] {
            let basis = build_symplectic_basis(&code, 0.0).unwrap();
            let vecs = basis.ordered_vectors();
            assert_eq!(vecs.len(), 2 * code.n());
            let iso = basis.stabilizers.len();
            for (a, va) in vecs.iter().enumerate() {
                for (b, vb) in vecs.iter().enumerate() {
                    let prod = symplectic_product(va, vb).unwrap();
                    let expect = expected_product(iso, a, b);
                    assert_eq!(prod, Scalar::from_int(expect), "entry ({a},{b})");
                }
            }
        }
    }

    // Product table for the ordering [stabs | destabs | pairs...]: stab i
    // pairs with destab i; after that block, consecutive (even, odd) slots
    // pair up.
    fn expected_product(n_stab: usize, a: usize, b: usize) -> i64 {
        let block = 2 * n_stab;
        let classify = |i: usize| -> (usize, i64) {
            if i < n_stab {
                (i, 1) // stabilizer slot of plane i
            } else if i < block {
                (i - n_stab, -1) // destabilizer slot of plane i
            } else {
                let off = i - block;
                (n_stab + off / 2, if off % 2 == 0 { 1 } else { -1 })
            }
        };
        let (pa, sa) = classify(a);
        let (pb, sb) = classify(b);
        if pa != pb || sa == sb {
            0
        } else if sa > sb {
            1
        } else {
            -1
        }
    }

    #[test]
    fn syndrome_reads_destabilizer_coefficients() {
        // Canonical stabilizers are momentum-block units, so the syndrome
        // pairing against their own destabilizers is one.
        let code = canonical_code(1, 2, 0, 1);
        let basis = build_symplectic_basis(&code, 0.0).unwrap();
        for (stab, d) in basis.stabilizers.iter().zip(&basis.destabilizers) {
            assert_eq!(syndrome_pairing(stab, d).unwrap(), Scalar::one());
        }
    }

    #[test]
    fn gauge_difference_is_correctable() {
        let code = canonical_code(1, 1, 2, 1);
        let e = PhaseVector::unit_x(code.n(), 0);
        let g = code.gauge.rows()[1].clone();
        let e2 = e.add(&g).unwrap();
        assert!(correctable_pair(&code, &e, &e2, 0.0).unwrap());
    }

    #[test]
    fn ancilla_kick_is_absorbed() {
        let code = canonical_code(1, 2, 1, 1);
        let e = PhaseVector::unit_p(code.n(), 1); // momentum kick on an ancilla
        let zero = PhaseVector::zero(code.n());
        assert!(correctable_pair(&code, &e, &zero, 0.0).unwrap());
    }

    #[test]
    fn information_displacement_is_not_correctable() {
        let code = canonical_code(1, 2, 1, 1);
        let e = PhaseVector::unit_x(code.n(), 0); // displacement on the information mode
        let zero = PhaseVector::zero(code.n());
        assert!(!correctable_pair(&code, &e, &zero, 0.0).unwrap());
    }

    #[test]
    fn bare_code_has_no_single_mode_protection() {
        let code = canonical_code(1, 0, 0, 0);
        assert!(!single_mode_correctability(&code, 0.0).unwrap());
    }
}
