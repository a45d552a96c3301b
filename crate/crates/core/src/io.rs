//! Text formats for codes, matrices and vectors.
//!
//! Code files:
//!
//! ```text
//! params n=8 k=1 l=4 r=2 c=1
//! roles info:8 ancilla:1,2,3,5 gauge:6,7 ebit:4
//! F
//! ancilla 1 -1 0 1 -1 0 0 0 0 0 0 0 0 0 0 0 ; 0 0
//! ...
//! G
//! 0 0 0 0 0 0 0 0 0 1 0 0 -1 0 0 0
//! ```
//!
//! Check rows list the kind, the `2n` sender entries `(p|x)`, a `;`, then
//! the `2c` receiver entries. Mode indices in `roles` are 1-based. Matrix
//! files hold one row per line, whitespace-separated entries, rationals as
//! `p/q` or decimal literals; blank lines separate blocks; `#` starts a
//! comment.

use crate::code::{CheckKind, CheckRow, Code, CodeParams, GaugeMatrix, ModeRole, ModeRoles};
use crate::error::{Error, Result};
use crate::phase::PhaseVector;
use crate::scalar::Scalar;
use crate::symplectic::SymplecticMatrix;

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim_end()
}

/// Parses whitespace-separated blocks of numeric rows; blank lines separate
/// blocks. Returns at least one block when any row is present.
pub fn parse_matrix_blocks(text: &str) -> Result<Vec<Vec<Vec<Scalar>>>> {
    let mut blocks: Vec<Vec<Vec<Scalar>>> = Vec::new();
    let mut current: Vec<Vec<Scalar>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let row: Vec<Scalar> = line
            .split_whitespace()
            .map(|tok| Scalar::parse(tok).map_err(|msg| Error::parse(idx + 1, msg)))
            .collect::<Result<_>>()?;
        current.push(row);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

/// Renders rows as one matrix block.
pub fn format_matrix_block(rows: &[Vec<Scalar>]) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a single matrix (first block) from text; errors when absent or
/// ragged.
pub fn parse_single_matrix(text: &str) -> Result<Vec<Vec<Scalar>>> {
    let blocks = parse_matrix_blocks(text)?;
    let rows = blocks
        .into_iter()
        .next()
        .ok_or_else(|| Error::parse(1, "no matrix rows found"))?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::parse(1, "rows have inconsistent lengths"));
    }
    Ok(rows)
}

/// Reads a square even-dimensional matrix as a symplectic-matrix candidate.
pub fn parse_symplectic(text: &str) -> Result<SymplecticMatrix> {
    SymplecticMatrix::from_rows(parse_single_matrix(text)?)
}

/// Reads a single phase-space vector: one row of `2m` entries, or one `p`
/// row and one `x` row.
pub fn parse_phase_vector(text: &str) -> Result<PhaseVector> {
    let rows = parse_single_matrix(text)?;
    match rows.len() {
        1 => PhaseVector::from_flat(&rows[0]),
        2 if rows[0].len() == rows[1].len() => PhaseVector::new(rows[0].clone(), rows[1].clone()),
        _ => Err(Error::parse(
            1,
            "expected one flat row or separate p and x rows",
        )),
    }
}

fn format_mode_list(modes: &[usize]) -> String {
    if modes.is_empty() {
        return "-".to_string();
    }
    modes
        .iter()
        .map(|m| (m + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes a code in the text format; parseable by [`parse_code`].
pub fn format_code(code: &Code) -> String {
    let p = &code.params;
    let mut out = String::new();
    out.push_str(&format!(
        "params n={} k={} l={} r={} c={}\n",
        p.n, p.k, p.l, p.r, p.c
    ));
    out.push_str(&format!(
        "roles info:{} ancilla:{} gauge:{} ebit:{}\n",
        format_mode_list(&code.roles.modes_with(ModeRole::Information)),
        format_mode_list(&code.roles.modes_with(ModeRole::Ancilla)),
        format_mode_list(&code.roles.modes_with(ModeRole::Gauge)),
        format_mode_list(&code.roles.modes_with(ModeRole::Ebit)),
    ));
    out.push_str("F\n");
    for row in &code.checks {
        let alice: Vec<String> = row.alice.to_flat().iter().map(|s| s.to_string()).collect();
        let bob: Vec<String> = row.bob.to_flat().iter().map(|s| s.to_string()).collect();
        out.push_str(&format!(
            "{} {} ; {}\n",
            row.kind.label(),
            alice.join(" "),
            if bob.is_empty() {
                "-".to_string()
            } else {
                bob.join(" ")
            }
        ));
    }
    out.push_str("G\n");
    for row in code.gauge.rows() {
        let cells: Vec<String> = row.to_flat().iter().map(|s| s.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn parse_kv<'a>(token: &'a str, key: &str, lineno: usize) -> Result<&'a str> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(':').or_else(|| rest.strip_prefix('=')))
        .ok_or_else(|| Error::parse(lineno, format!("expected `{key}=...` or `{key}:...`")))
}

fn parse_mode_list(text: &str, n: usize, lineno: usize) -> Result<Vec<usize>> {
    if text == "-" || text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            let idx: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad mode index `{tok}`")))?;
            if idx == 0 || idx > n {
                return Err(Error::parse(
                    lineno,
                    format!("mode index {idx} out of range 1..={n}"),
                ));
            }
            Ok(idx - 1)
        })
        .collect()
}

/// Parses the code text format. Structural problems surface as parse errors
/// with line numbers; semantic problems are left to `validate`.
pub fn parse_code(text: &str) -> Result<Code> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, strip_comment(raw)))
        .filter(|(_, l)| !l.trim().is_empty());

    let (params_line_no, params_line) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty code file"))?;
    let tokens: Vec<&str> = params_line.split_whitespace().collect();
    if tokens.first() != Some(&"params") || tokens.len() != 6 {
        return Err(Error::parse(
            params_line_no,
            "expected `params n=<int> k=<int> l=<int> r=<int> c=<int>`",
        ));
    }
    let mut nums = [0usize; 5];
    for (slot, (token, key)) in tokens[1..]
        .iter()
        .zip(["n", "k", "l", "r", "c"])
        .enumerate()
    {
        let value = parse_kv(token, key, params_line_no)?;
        nums[slot] = value
            .parse()
            .map_err(|_| Error::parse(params_line_no, format!("bad integer `{value}`")))?;
    }
    let [n, k, l, r, c] = nums;
    let params = CodeParams::new(k, l, r, c);
    if params.n != n {
        return Err(Error::parse(
            params_line_no,
            format!("n={} but k+l+r+c={}", n, params.n),
        ));
    }

    let (roles_line_no, roles_line) = lines
        .next()
        .ok_or_else(|| Error::parse(params_line_no, "missing roles line"))?;
    let tokens: Vec<&str> = roles_line.split_whitespace().collect();
    if tokens.first() != Some(&"roles") || tokens.len() != 5 {
        return Err(Error::parse(
            roles_line_no,
            "expected `roles info:<...> ancilla:<...> gauge:<...> ebit:<...>`",
        ));
    }
    let mut roles = vec![None::<ModeRole>; n];
    for (token, (key, role)) in tokens[1..].iter().zip([
        ("info", ModeRole::Information),
        ("ancilla", ModeRole::Ancilla),
        ("gauge", ModeRole::Gauge),
        ("ebit", ModeRole::Ebit),
    ]) {
        let list = parse_kv(token, key, roles_line_no)?;
        for mode in parse_mode_list(list, n, roles_line_no)? {
            if roles[mode].is_some() {
                return Err(Error::parse(
                    roles_line_no,
                    format!("mode {} assigned twice", mode + 1),
                ));
            }
            roles[mode] = Some(role);
        }
    }
    let roles: Vec<ModeRole> = roles
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.ok_or_else(|| Error::parse(roles_line_no, format!("mode {} has no role", i + 1)))
        })
        .collect::<Result<_>>()?;

    let (f_line_no, f_line) = lines
        .next()
        .ok_or_else(|| Error::parse(roles_line_no, "missing F section"))?;
    if f_line.trim() != "F" {
        return Err(Error::parse(f_line_no, "expected `F` section header"));
    }

    let mut checks: Vec<CheckRow> = Vec::new();
    let mut gauge_rows: Vec<PhaseVector> = Vec::new();
    let mut in_gauge = false;
    for (lineno, line) in lines {
        let trimmed = line.trim();
        if trimmed == "G" {
            if in_gauge {
                return Err(Error::parse(lineno, "duplicate G section"));
            }
            in_gauge = true;
            continue;
        }
        if in_gauge {
            let row: Vec<Scalar> = trimmed
                .split_whitespace()
                .map(|tok| Scalar::parse(tok).map_err(|m| Error::parse(lineno, m)))
                .collect::<Result<_>>()?;
            if row.len() != 2 * n {
                return Err(Error::parse(
                    lineno,
                    format!("gauge row has {} entries, expected {}", row.len(), 2 * n),
                ));
            }
            gauge_rows.push(PhaseVector::from_flat(&row)?);
        } else {
            let mut parts = trimmed.split_whitespace();
            let kind_tok = parts
                .next()
                .ok_or_else(|| Error::parse(lineno, "empty check row"))?;
            let kind = CheckKind::from_label(kind_tok)
                .ok_or_else(|| Error::parse(lineno, format!("unknown check kind `{kind_tok}`")))?;
            let rest: Vec<&str> = parts.collect();
            let split_at = rest.iter().position(|&t| t == ";").ok_or_else(|| {
                Error::parse(lineno, "check row needs `;` before receiver entries")
            })?;
            let alice: Vec<Scalar> = rest[..split_at]
                .iter()
                .map(|tok| Scalar::parse(tok).map_err(|m| Error::parse(lineno, m)))
                .collect::<Result<_>>()?;
            if alice.len() != 2 * n {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "sender part has {} entries, expected {}",
                        alice.len(),
                        2 * n
                    ),
                ));
            }
            let bob_tokens = &rest[split_at + 1..];
            let bob: Vec<Scalar> = if bob_tokens == ["-"] {
                Vec::new()
            } else {
                bob_tokens
                    .iter()
                    .map(|tok| Scalar::parse(tok).map_err(|m| Error::parse(lineno, m)))
                    .collect::<Result<_>>()?
            };
            if bob.len() != 2 * c {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "receiver part has {} entries, expected {}",
                        bob.len(),
                        2 * c
                    ),
                ));
            }
            checks.push(CheckRow {
                alice: PhaseVector::from_flat(&alice)?,
                bob: if c == 0 {
                    PhaseVector::zero(0)
                } else {
                    PhaseVector::from_flat(&bob)?
                },
                kind,
            });
        }
    }
    if !in_gauge {
        return Err(Error::parse(1, "missing G section"));
    }

    Ok(Code {
        params,
        roles: ModeRoles::new(roles),
        checks,
        gauge: GaugeMatrix::new(gauge_rows)?,
        upsilon: None,
    })
}

pub fn read_code(path: &std::path::Path) -> Result<Code> {
    parse_code(&std::fs::read_to_string(path)?)
}

pub fn write_code(path: &std::path::Path, code: &Code) -> Result<()> {
    std::fs::write(path, format_code(code))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{canonical_code, example_code, validate};

    #[test]
    fn code_round_trip() {
        for code in [
            canonical_code(1, 1, 1, 1),
            canonical_code(2, 3, 1, 2),
            canonical_code(1, 2, 0, 0),
            canonical_code(1, 0, 0, 0),
            example_code(),
        ] {
            let text = format_code(&code);
            let parsed = parse_code(&text).unwrap();
            assert!(parsed.approx_eq(&code, 0.0), "round trip failed:\n{text}");
            assert!(validate(&parsed, 0.0).all_passed());
        }
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        match parse_code("") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_code("# only a comment\n").is_err());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "params n=2 k=1 l=1 r=0 c=0\nroles info:1 ancilla:2 gauge:- ebit:-\nF\nancilla 0 1 0 0 zz ; -\nG\n";
        match parse_code(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rationals_and_decimals_parse_exactly() {
        let blocks = parse_matrix_blocks("1/2 0.25 -3\n\n7 1e-2\n").unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0][0][0], Scalar::ratio(1, 2));
        assert_eq!(blocks[0][0][1], Scalar::ratio(1, 4));
        assert_eq!(blocks[1][0][1], Scalar::ratio(1, 100));
    }

    #[test]
    fn phase_vector_forms() {
        let flat = parse_phase_vector("1 2 3 4\n").unwrap();
        assert_eq!(flat.dim_modes(), 2);
        let split = parse_phase_vector("1 2\n3 4\n").unwrap();
        assert_eq!(split.dim_modes(), 2);
        assert_eq!(*split.x_at(0), Scalar::from_int(3));
    }

    #[test]
    fn comments_and_blank_lines_ignored_in_code_files() {
        let code = canonical_code(1, 1, 0, 1);
        let mut text = String::from("# header comment\n\n");
        text.push_str(&format_code(&code));
        text.push_str("\n# trailing\n");
        let parsed = parse_code(&text).unwrap();
        assert!(parsed.approx_eq(&code, 0.0));
    }
}
