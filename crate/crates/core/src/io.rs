//! Text formats.
//!
//! * `.dmat`: one row per block, `0`/`1` characters, optional whitespace
//!   between entries. Several matrices may share a file; they are separated
//!   by blank lines or label lines (any line containing a letter). Lines
//!   starting with `#` are ignored.
//! * `.om`: `v k lambda`, then the point orbit sizes, the block orbit sizes,
//!   and one line of entries per block orbit.
//! * `.perms`: the degree, then one generator per line as an image list.

use std::fmt::Write as _;

use crate::design::{DesignParams, IncidenceStructure};
use crate::error::{Error, Result};
use crate::orbmat::OrbitMatrix;
use crate::permgroup::{PermGroup, Permutation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixBundle {
    pub structures: Vec<IncidenceStructure>,
    /// One entry per structure.
    pub labels: Vec<Option<String>>,
}

impl MatrixBundle {
    pub fn new(structures: Vec<IncidenceStructure>, labels: Vec<Option<String>>) -> Result<Self> {
        if structures.len() != labels.len() {
            return Err(Error::InvalidStructure(format!(
                "{} labels for {} structures",
                labels.len(),
                structures.len()
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            let Some(label) = label else { continue };
            if !label.chars().any(|c| c.is_ascii_alphabetic()) || label.contains('\n') || label.trim() != label {
                return Err(Error::InvalidStructure(format!("label {label:?} cannot be written back")));
            }
            if labels[..i].iter().flatten().any(|l| l == label) {
                return Err(Error::InvalidStructure(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { structures, labels })
    }

    pub fn unlabeled(structures: Vec<IncidenceStructure>) -> Self {
        let labels = vec![None; structures.len()];
        Self { structures, labels }
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    /// Label of structure `i`, or its 1-based position.
    pub fn name(&self, i: usize) -> String {
        self.labels[i].clone().unwrap_or_else(|| format!("#{}", i + 1))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Pending {
    label: Option<String>,
    rows: Vec<Vec<bool>>,
    first_line: usize,
}

pub fn parse_matrix_bytes(bytes: &[u8]) -> Result<MatrixBundle> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        parse_err(line, "input is not valid UTF-8")
    })?;
    parse_matrix_text(text)
}

pub fn parse_matrix_text(text: &str) -> Result<MatrixBundle> {
    let mut structures = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut label: Option<String> = None;
    let mut label_line = 0;
    let mut current: Option<Pending> = None;

    let mut flush = |current: &mut Option<Pending>| -> Result<()> {
        if let Some(p) = current.take() {
            let s = IncidenceStructure::from_rows(&p.rows).map_err(|e| parse_err(p.first_line, e.to_string()))?;
            if let Some(l) = &p.label {
                if labels.iter().flatten().any(|x| x == l) {
                    return Err(parse_err(p.first_line, format!("duplicate label {l:?}")));
                }
            }
            structures.push(s);
            labels.push(p.label);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut current)?;
            continue;
        }
        if line.chars().any(char::is_alphabetic) {
            flush(&mut current)?;
            label_line = line_no;
            label = Some(match label.take() {
                Some(prev) => format!("{prev}; {line}"),
                None => line.to_string(),
            });
            continue;
        }
        let mut row = Vec::with_capacity(line.len());
        for c in line.chars() {
            match c {
                '0' => row.push(false),
                '1' => row.push(true),
                c if c.is_whitespace() => {}
                c => return Err(parse_err(line_no, format!("unexpected character {c:?}"))),
            }
        }
        match &mut current {
            Some(p) => {
                if row.len() != p.rows[0].len() {
                    return Err(parse_err(
                        line_no,
                        format!("row has {} entries, expected {}", row.len(), p.rows[0].len()),
                    ));
                }
                p.rows.push(row);
            }
            None => {
                current = Some(Pending {
                    label: label.take(),
                    rows: vec![row],
                    first_line: line_no,
                })
            }
        }
    }
    flush(&mut current)?;
    if let Some(l) = label {
        return Err(parse_err(label_line, format!("label {l:?} is not followed by a matrix")));
    }
    if structures.is_empty() {
        return Err(parse_err(text.lines().count().max(1), "no matrix found"));
    }
    Ok(MatrixBundle { structures, labels })
}

pub fn serialize_structure(s: &IncidenceStructure) -> String {
    let mut out = String::with_capacity(s.b() * (s.v() + 1));
    for blk in 0..s.b() {
        out.extend((0..s.v()).map(|p| if s.get(blk, p) { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

pub fn serialize_bundle(bundle: &MatrixBundle) -> String {
    let mut out = String::new();
    for (i, (s, label)) in bundle.structures.iter().zip(&bundle.labels).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if let Some(l) = label {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&serialize_structure(s));
    }
    out
}

/// Non-comment, non-blank lines with their numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("expected a nonnegative integer, found {t:?}")))
        })
        .collect()
}

pub fn parse_orbit_matrix(text: &str) -> Result<OrbitMatrix> {
    let mut lines = content_lines(text);
    let mut next = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (n, l) = lines.next().ok_or_else(|| parse_err(text.lines().count().max(1), format!("missing {what}")))?;
        Ok((n, numbers(n, l)?))
    };
    let (n, head) = next("the `v k lambda` line")?;
    let [v, k, lambda] = head[..] else {
        return Err(parse_err(n, "expected `v k lambda`"));
    };
    let params = DesignParams::symmetric(v, k, lambda).map_err(|e| parse_err(n, e.to_string()))?;
    let (_, omega) = next("point orbit sizes")?;
    let (n_big, big_omega) = next("block orbit sizes")?;
    let mut entries = Vec::with_capacity(big_omega.len());
    for _ in 0..big_omega.len() {
        entries.push(next("an orbit matrix row")?.1);
    }
    if let Some((n, _)) = lines.next() {
        return Err(parse_err(n, "trailing data after the last row"));
    }
    OrbitMatrix::new(params, omega, big_omega, entries).map_err(|e| parse_err(n_big, e.to_string()))
}

pub fn serialize_orbit_matrix(om: &OrbitMatrix) -> String {
    let join = |xs: &[usize]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let mut out = format!("{} {} {}\n", om.params.v, om.params.k, om.params.lambda);
    writeln!(out, "{}", join(&om.point_orbit_sizes)).unwrap();
    writeln!(out, "{}", join(&om.block_orbit_sizes)).unwrap();
    for row in &om.entries {
        writeln!(out, "{}", join(row)).unwrap();
    }
    out
}

pub fn parse_group(text: &str) -> Result<PermGroup> {
    let mut lines = content_lines(text);
    let (n, head) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing the degree line"))?;
    let [degree] = numbers(n, head)?[..] else {
        return Err(parse_err(n, "expected the degree alone"));
    };
    if degree == 0 {
        return Err(parse_err(n, "degree must be positive"));
    }
    let mut gens = Vec::new();
    for (n, l) in lines {
        let images = numbers(n, l)?;
        if images.len() != degree {
            return Err(parse_err(n, format!("{} images for degree {degree}", images.len())));
        }
        gens.push(Permutation::from_images(images).map_err(|e| parse_err(n, e.to_string()))?);
    }
    PermGroup::new(degree, gens)
}

pub fn serialize_group(g: &PermGroup) -> String {
    let mut out = format!("{}\n", g.degree());
    for p in g.generators() {
        let images: Vec<String> = p.images().map(|x| x.to_string()).collect();
        writeln!(out, "{}", images.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matrix() {
        let b = parse_matrix_text("10\n01").unwrap();
        assert_eq!(b.len(), 1);
        let s = &b.structures[0];
        assert_eq!((s.v(), s.b()), (2, 2));
        assert!(s.get(0, 0) && s.get(1, 1) && !s.get(0, 1) && !s.get(1, 0));
    }

    #[test]
    fn blank_lines_and_labels_split() {
        let b = parse_matrix_text("# comment\nfirst one\n1 0 1\n0 1 1\n\n\n110\n011\nthird\n1\n").unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.labels, vec![Some("first one".to_string()), None, Some("third".to_string())]);
        assert_eq!(b.structures[2].v(), 1);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = parse_matrix_text("101\n11\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_matrix_text("101\n1-1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_matrix_text("\n# nothing\n").is_err());
        assert!(parse_matrix_text("a\n1\nb\n1\na\n1\n").is_err());
    }

    #[test]
    fn orbit_matrix_format() {
        let om = parse_orbit_matrix("# M\n176 50 14\n80 96\n80 96\n26 24\n20 30\n").unwrap();
        assert_eq!(om.entries, vec![vec![26, 24], vec![20, 30]]);
        assert_eq!(parse_orbit_matrix(&serialize_orbit_matrix(&om)).unwrap(), om);
        assert!(matches!(
            parse_orbit_matrix("176 50 14\n80 96\n80 96\n26 24\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(parse_orbit_matrix("176 50 14\n80 96\n80 96\n26 x\n20 30\n").is_err());
    }

    #[test]
    fn group_format() {
        let g = parse_group("7\n# shift\n1 2 3 4 5 6 0\n").unwrap();
        assert_eq!(g.order(), 7u32.into());
        assert_eq!(serialize_group(&g), "7\n1 2 3 4 5 6 0\n");
        assert!(parse_group("3\n0 0 1\n").is_err());
        assert!(parse_group("3\n0 1\n").is_err());
        assert_eq!(parse_group("4\n").unwrap().order(), 1u32.into());
    }
}
