//! MATPOWER case-file parsing and canonical JSON serialization.
//!
//! The parser accepts the standard MATPOWER `.m` case format: a
//! `function mpc = name` header followed by `mpc.baseMVA`, `mpc.bus`,
//! `mpc.branch`, `mpc.gen` and `mpc.gencost` matrix assignments. Comments
//! (`%`) and arbitrary whitespace are ignored. Out-of-service rows are kept
//! in the raw record and only dropped when the network model is built.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

/// MATPOWER column indices used throughout the crate.
pub mod cols {
    // bus: [BUS_I, TYPE, PD, QD, GS, BS, AREA, VM, VA, BASE_KV, ZONE, VMAX, VMIN]
    pub const BUS_I: usize = 0;
    pub const BUS_TYPE: usize = 1;
    pub const PD: usize = 2;
    pub const QD: usize = 3;
    pub const GS: usize = 4;
    pub const BS: usize = 5;
    pub const VMAX: usize = 11;
    pub const VMIN: usize = 12;

    // branch: [F_BUS, T_BUS, R, X, B, RATE_A, RATE_B, RATE_C, TAP, SHIFT, STATUS, ANGMIN, ANGMAX]
    pub const F_BUS: usize = 0;
    pub const T_BUS: usize = 1;
    pub const BR_R: usize = 2;
    pub const BR_X: usize = 3;
    pub const BR_B: usize = 4;
    pub const RATE_A: usize = 5;
    pub const TAP: usize = 8;
    pub const SHIFT: usize = 9;
    pub const BR_STATUS: usize = 10;
    pub const ANGMIN: usize = 11;
    pub const ANGMAX: usize = 12;

    // gen: [BUS, PG, QG, QMAX, QMIN, VG, MBASE, STATUS, PMAX, PMIN, ...]
    pub const GEN_BUS: usize = 0;
    pub const QMAX: usize = 3;
    pub const QMIN: usize = 4;
    pub const GEN_STATUS: usize = 7;
    pub const PMAX: usize = 8;
    pub const PMIN: usize = 9;

    // gencost: [MODEL, STARTUP, SHUTDOWN, NCOST, c..., c1, c0]
    pub const COST_MODEL: usize = 0;
    pub const NCOST: usize = 3;
    pub const COST_COEFF: usize = 4;
}

/// Number of columns each section must at least provide.
const BUS_COLS: usize = 13;
const BRANCH_COLS: usize = 13;
const GEN_COLS: usize = 10;
const GENCOST_COLS: usize = 5; // MODEL STARTUP SHUTDOWN NCOST + at least one coefficient

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("missing section `{0}`")]
    MissingSection(&'static str),
    #[error("malformed matrix in `{section}` row {row}: {detail}")]
    MalformedMatrix {
        section: &'static str,
        row: usize,
        detail: String,
    },
    #[error("gencost row {0} uses MODEL=1 (piecewise linear); only polynomial costs are supported")]
    UnsupportedCostModel(usize),
    #[error("gencost row {row} has NCOST={ncost}; polynomial costs support at most 3 coefficients")]
    UnsupportedCostDegree { row: usize, ncost: usize },
    #[error("baseMVA must be positive, got {0}")]
    NonPositiveBase(f64),
    #[error("{section} row {row} references unknown bus {bus}")]
    UnknownBus {
        section: &'static str,
        row: usize,
        bus: i64,
    },
    #[error("expected exactly one in-service reference (type-3) bus, found {0}")]
    ReferenceBusCount(usize),
    #[error("duplicate bus id {0}")]
    DuplicateBus(i64),
    #[error("gencost has {got} rows for {gens} generators (expected {gens} or {twice})", twice = 2 * gens)]
    GencostRowCount { got: usize, gens: usize },
    #[error("invalid JSON case: {0}")]
    Json(String),
}

/// Raw MATPOWER case: matrices as parsed, out-of-service rows included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCase {
    pub name: String,
    pub base_mva: f64,
    pub bus: Vec<Vec<f64>>,
    pub branch: Vec<Vec<f64>>,
    pub gen: Vec<Vec<f64>>,
    pub gencost: Vec<Vec<f64>>,
}

impl RawCase {
    /// Parse MATPOWER case-file text.
    pub fn parse(text: &str) -> Result<RawCase, CaseError> {
        let stripped = strip_comments(text);

        let name = find_function_name(&stripped).unwrap_or_else(|| "case".to_string());
        let base_mva = find_scalar(&stripped, "baseMVA")
            .ok_or(CaseError::MissingSection("mpc.baseMVA"))?;
        if !(base_mva > 0.0) {
            return Err(CaseError::NonPositiveBase(base_mva));
        }

        let bus = find_matrix(&stripped, "bus", BUS_COLS)?
            .ok_or(CaseError::MissingSection("mpc.bus"))?;
        let branch = find_matrix(&stripped, "branch", BRANCH_COLS)?
            .ok_or(CaseError::MissingSection("mpc.branch"))?;
        let gen = find_matrix(&stripped, "gen", GEN_COLS)?
            .ok_or(CaseError::MissingSection("mpc.gen"))?;
        let gencost = find_matrix(&stripped, "gencost", GENCOST_COLS)?
            .ok_or(CaseError::MissingSection("mpc.gencost"))?;

        let case = RawCase {
            name,
            base_mva,
            bus,
            branch,
            gen,
            gencost,
        };
        case.validate()?;
        Ok(case)
    }

    /// Structural validation: cost models, bus references, reference bus count.
    pub fn validate(&self) -> Result<(), CaseError> {
        let mut ids = HashSet::new();
        for row in &self.bus {
            let id = row[cols::BUS_I] as i64;
            if !ids.insert(id) {
                return Err(CaseError::DuplicateBus(id));
            }
        }
        for (r, row) in self.branch.iter().enumerate() {
            for col in [cols::F_BUS, cols::T_BUS] {
                let b = row[col] as i64;
                if !ids.contains(&b) {
                    return Err(CaseError::UnknownBus {
                        section: "branch",
                        row: r,
                        bus: b,
                    });
                }
            }
        }
        for (r, row) in self.gen.iter().enumerate() {
            let b = row[cols::GEN_BUS] as i64;
            if !ids.contains(&b) {
                return Err(CaseError::UnknownBus {
                    section: "gen",
                    row: r,
                    bus: b,
                });
            }
        }
        // MATPOWER allows a second block of gencost rows for reactive costs;
        // only the first |gen| rows (active power) are used.
        let ng = self.gen.len();
        if self.gencost.len() != ng && self.gencost.len() != 2 * ng {
            return Err(CaseError::GencostRowCount {
                got: self.gencost.len(),
                gens: ng,
            });
        }
        for (r, row) in self.gencost.iter().take(ng).enumerate() {
            let model = row[cols::COST_MODEL] as i64;
            if model == 1 {
                return Err(CaseError::UnsupportedCostModel(r));
            }
            if model != 2 {
                return Err(CaseError::MalformedMatrix {
                    section: "gencost",
                    row: r,
                    detail: format!("unknown cost MODEL {model}"),
                });
            }
            let ncost = row[cols::NCOST] as usize;
            if ncost > 3 {
                return Err(CaseError::UnsupportedCostDegree { row: r, ncost });
            }
            if row.len() < cols::COST_COEFF + ncost {
                return Err(CaseError::MalformedMatrix {
                    section: "gencost",
                    row: r,
                    detail: format!("NCOST={ncost} but only {} coefficients", row.len() - cols::COST_COEFF),
                });
            }
        }
        let refs = self
            .bus
            .iter()
            .filter(|b| b[cols::BUS_TYPE] as i64 == 3)
            .count();
        if refs != 1 {
            return Err(CaseError::ReferenceBusCount(refs));
        }
        Ok(())
    }

    /// Quadratic cost coefficients (c2, c1, c0) in file units ($/MW^2 h, $/MWh, $/h)
    /// for generator row `g`.
    pub fn cost_coefficients(&self, g: usize) -> (f64, f64, f64) {
        let row = &self.gencost[g];
        let ncost = row[cols::NCOST] as usize;
        let c = &row[cols::COST_COEFF..cols::COST_COEFF + ncost];
        match ncost {
            0 => (0.0, 0.0, 0.0),
            1 => (0.0, 0.0, c[0]),
            2 => (0.0, c[0], c[1]),
            _ => (c[0], c[1], c[2]),
        }
    }

    /// Serialize to the canonical key-ordered JSON form.
    pub fn to_json(&self) -> String {
        emit_json(self)
    }

    /// Parse the canonical JSON form back into a case.
    pub fn from_json(text: &str) -> Result<RawCase, CaseError> {
        serde_json::from_str(text).map_err(|e| CaseError::Json(e.to_string()))
    }
}

impl fmt::Display for RawCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} buses, {} branches, {} generators (base {} MVA)",
            self.name,
            self.bus.len(),
            self.branch.len(),
            self.gen.len(),
            self.base_mva
        )
    }
}

/// Deterministic key-ordered JSON for any serializable value.
///
/// Field order follows the struct declaration (serde preserves it), and
/// non-finite floats are emitted as `null` rather than bare NaN/Inf.
pub fn emit_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("JSON serialization cannot fail for report types")
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        // '%' starts a MATLAB comment; the case format never quotes one.
        let code = match line.find('%') {
            Some(idx) => &line[..idx],
            None => line,
        };
        out.push_str(code);
        out.push('\n');
    }
    out
}

fn find_function_name(text: &str) -> Option<String> {
    for line in text.lines() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("function") {
            if let Some(eq) = rest.find('=') {
                return Some(rest[eq + 1..].trim().trim_end_matches(';').to_string());
            }
        }
    }
    None
}

fn find_scalar(text: &str, field: &str) -> Option<f64> {
    let needle = format!("mpc.{field}");
    let start = text.find(&needle)?;
    let rest = &text[start + needle.len()..];
    let eq = rest.find('=')?;
    let tail = rest[eq + 1..].trim_start();
    let end = tail.find(';')?;
    tail[..end].trim().parse().ok()
}

fn find_matrix(
    text: &str,
    field: &'static str,
    min_cols: usize,
) -> Result<Option<Vec<Vec<f64>>>, CaseError> {
    let needle = format!("mpc.{field}");
    // Exact-field match: `mpc.gen` must not match `mpc.gencost`.
    let mut search = 0;
    let start = loop {
        match text[search..].find(&needle) {
            None => return Ok(None),
            Some(off) => {
                let pos = search + off;
                let after = text[pos + needle.len()..].trim_start();
                if after.starts_with('=') {
                    break pos;
                }
                search = pos + needle.len();
            }
        }
    };
    let rest = &text[start..];
    let open = match rest.find('[') {
        Some(i) => i,
        None => return Ok(None),
    };
    let close = rest[open..]
        .find(']')
        .ok_or(CaseError::MalformedMatrix {
            section: field,
            row: 0,
            detail: "unterminated matrix".into(),
        })?;
    let body = &rest[open + 1..open + close];

    let mut rows = Vec::new();
    for (r, raw_row) in body
        .split(|c| c == ';' || c == '\n')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
    {
        let mut row = Vec::new();
        for tok in raw_row.split([' ', '\t', ',']).filter(|s| !s.is_empty()) {
            let v = match tok {
                "Inf" | "inf" => f64::INFINITY,
                "-Inf" | "-inf" => f64::NEG_INFINITY,
                _ => tok.parse::<f64>().map_err(|_| CaseError::MalformedMatrix {
                    section: field,
                    row: r,
                    detail: format!("bad number `{tok}`"),
                })?,
            };
            row.push(v);
        }
        rows.push(row);
    }
    // All rows must agree in length and meet the format's minimum width.
    if let Some(first) = rows.first() {
        let n = first.len();
        if n < min_cols {
            return Err(CaseError::MalformedMatrix {
                section: field,
                row: 0,
                detail: format!("{n} columns, need at least {min_cols}"),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CaseError::MalformedMatrix {
                    section: field,
                    row: r,
                    detail: format!("row has {} columns, expected {n}", row.len()),
                });
            }
        }
    }
    Ok(Some(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TWO_BUS: &str = r#"
function mpc = case2
% minimal two-bus case
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
    1  3  0    0   0  0  1  1  0  135  1  1.1  0.9;
    2  1  100  40  0  0  1  1  0  135  1  1.1  0.9;
];
mpc.gen = [
    1  0  0  150  -150  1  100  1  250  0;
];
mpc.branch = [
    1  2  0.01  0.1  0.02  250  250  250  0  0  1  -360  360;
];
mpc.gencost = [
    2  0  0  3  0.02  20  0;
];
"#;

    #[test]
    fn parses_minimal_two_bus_case() {
        let case = RawCase::parse(TWO_BUS).unwrap();
        assert_eq!(case.name, "case2");
        assert_eq!(case.base_mva, 100.0);
        assert_eq!(case.bus.len(), 2);
        assert_eq!(case.branch.len(), 1);
        assert_eq!(case.gen.len(), 1);
        assert_eq!(case.cost_coefficients(0), (0.02, 20.0, 0.0));
    }

    #[test]
    fn missing_gencost_is_an_error() {
        let text = TWO_BUS.replace("mpc.gencost", "mpc.nope");
        match RawCase::parse(&text) {
            Err(CaseError::MissingSection(s)) => assert_eq!(s, "mpc.gencost"),
            other => panic!("expected MissingSection, got {other:?}"),
        }
    }

    #[test]
    fn piecewise_linear_cost_is_rejected() {
        let text = TWO_BUS.replace("2  0  0  3  0.02  20  0;", "1  0  0  2  0 0 10 200;");
        match RawCase::parse(&text) {
            Err(CaseError::UnsupportedCostModel(0)) => {}
            other => panic!("expected UnsupportedCostModel, got {other:?}"),
        }
    }

    #[test]
    fn row_length_mismatch_is_reported() {
        let text = TWO_BUS.replace("1  2  0.01  0.1  0.02  250  250  250  0  0  1  -360  360;", "1  2  0.01;");
        match RawCase::parse(&text) {
            Err(CaseError::MalformedMatrix { section, .. }) => assert_eq!(section, "branch"),
            other => panic!("expected MalformedMatrix, got {other:?}"),
        }
    }

    #[test]
    fn unknown_branch_endpoint_is_reported() {
        let text = TWO_BUS.replace("1  2  0.01", "1  7  0.01");
        assert!(matches!(
            RawCase::parse(&text),
            Err(CaseError::UnknownBus { section: "branch", bus: 7, .. })
        ));
    }

    #[test]
    fn json_round_trip_is_identity() {
        let case = RawCase::parse(TWO_BUS).unwrap();
        let json = case.to_json();
        let back = RawCase::from_json(&json).unwrap();
        assert_eq!(case, back);
    }

    #[test]
    fn out_of_service_rows_are_retained() {
        let text = TWO_BUS.replace(
            "1  2  0.01  0.1  0.02  250  250  250  0  0  1  -360  360;",
            "1  2  0.01  0.1  0.02  250  250  250  0  0  1  -360  360;\n    1  2  0.02  0.2  0.0  250  250  250  0  0  0  -360  360;",
        );
        let case = RawCase::parse(&text).unwrap();
        assert_eq!(case.branch.len(), 2);
        assert_eq!(case.branch[1][cols::BR_STATUS], 0.0);
    }

    #[test]
    fn gen_does_not_match_gencost_prefix() {
        // `mpc.gencost` appearing before `mpc.gen` must not shadow it.
        let reordered = r#"
function mpc = case2
mpc.baseMVA = 100;
mpc.gencost = [ 2 0 0 2 20 0; ];
mpc.bus = [
    1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
    2 1 10 5 0 0 1 1 0 135 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 150 -150 1 100 1 250 0; ];
mpc.branch = [ 1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360; ];
"#;
        let case = RawCase::parse(reordered).unwrap();
        assert_eq!(case.gen.len(), 1);
        assert_eq!(case.gencost.len(), 1);
        assert_eq!(case.cost_coefficients(0), (0.0, 20.0, 0.0));
    }
}
