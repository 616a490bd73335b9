//! Fixed-column reader for the ATOM, HELIX, SHEET and TURN records of the
//! PDB v2.3 format. Every other record type is skipped.

use serde::{Deserialize, Serialize};

use super::PdbError;
use crate::ssclass::MotifClass;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: String,
    pub residue: i32,
    pub res_name: String,
    pub chain: String,
    pub name: String,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsAnnotation {
    pub class: MotifClass,
    pub chain: String,
    pub first: i32,
    pub last: i32,
}

impl SsAnnotation {
    pub fn contains(&self, chain: &str, residue: i32) -> bool {
        self.chain == chain && (self.first..=self.last).contains(&residue)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub atoms: Vec<Atom>,
    pub annotations: Vec<SsAnnotation>,
}

impl Structure {
    /// Motif class of a residue: the first annotation covering it, else `Other`.
    pub fn label_of(&self, chain: &str, residue: i32) -> MotifClass {
        self.annotations
            .iter()
            .find(|a| a.contains(chain, residue))
            .map(|a| a.class)
            .unwrap_or(MotifClass::Other)
    }
}

/// Columns `first..=last` (1-based, inclusive), trimmed. Short lines yield
/// the available part or an empty string.
fn cols(line: &str, first: usize, last: usize) -> &str {
    let bytes = line.as_bytes();
    let start = (first - 1).min(bytes.len());
    let end = last.min(bytes.len());
    line.get(start..end).unwrap_or("").trim()
}

fn parse_field<T: std::str::FromStr>(line_no: usize, line: &str, first: usize, last: usize, what: &str) -> Result<T, PdbError> {
    let raw = cols(line, first, last);
    raw.parse::<T>().map_err(|_| PdbError {
        line: line_no,
        msg: format!("cannot parse {what} from columns {first}-{last}: {raw:?}"),
    })
}

fn annotation(
    line_no: usize,
    line: &str,
    class: MotifClass,
    chain_col: usize,
    first_cols: (usize, usize),
    last_cols: (usize, usize),
) -> Result<SsAnnotation, PdbError> {
    let chain = cols(line, chain_col, chain_col).to_string();
    let first = parse_field(line_no, line, first_cols.0, first_cols.1, "initial residue")?;
    let last = parse_field(line_no, line, last_cols.0, last_cols.1, "terminal residue")?;
    if first > last {
        return Err(PdbError { line: line_no, msg: format!("residue range {first}..{last} is reversed") });
    }
    Ok(SsAnnotation { class, chain, first, last })
}

pub fn parse_pdb_subset(text: &str) -> Result<Structure, PdbError> {
    let mut s = Structure::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let record = cols(line, 1, 6);
        match record {
            "ATOM" => {
                let altloc = cols(line, 17, 17);
                if !(altloc.is_empty() || altloc == "A" || altloc == "1") {
                    continue;
                }
                let x: f64 = parse_field(line_no, line, 31, 38, "x coordinate")?;
                let y: f64 = parse_field(line_no, line, 39, 46, "y coordinate")?;
                let z: f64 = parse_field(line_no, line, 47, 54, "z coordinate")?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(PdbError { line: line_no, msg: "non-finite coordinate".into() });
                }
                let residue: i32 = parse_field(line_no, line, 23, 26, "residue number")?;
                let name = cols(line, 13, 16).to_string();
                let mut element = cols(line, 77, 78).to_string();
                if element.is_empty() {
                    element = name.chars().filter(|c| c.is_ascii_alphabetic()).take(1).collect();
                }
                s.atoms.push(Atom {
                    element,
                    residue,
                    res_name: cols(line, 18, 20).to_string(),
                    chain: cols(line, 22, 22).to_string(),
                    name,
                    position: [x, y, z],
                });
            }
            "HELIX" => s.annotations.push(annotation(line_no, line, MotifClass::Helix, 20, (22, 25), (34, 37))?),
            "SHEET" => s.annotations.push(annotation(line_no, line, MotifClass::Strand, 22, (23, 26), (34, 37))?),
            "TURN" => s.annotations.push(annotation(line_no, line, MotifClass::Turn, 20, (21, 24), (32, 35))?),
            "ENDMDL" => break,
            _ => {}
        }
    }
    let atoms = &s.atoms;
    s.annotations.retain(|a| {
        let present = atoms.iter().any(|at| a.contains(&at.chain, at.residue));
        if !present {
            log::warn!("dropping {} annotation {}:{}-{} with no atoms", a.class, a.chain, a.first, a.last);
        }
        present
    });
    Ok(s)
}
