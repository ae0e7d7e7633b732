//! End-to-end run over the shipped dataset: invariant lattices, Picard
//! lattices and the three Weierstrass fibrations.

use std::fmt;
use std::path::{Path, PathBuf};

use k3lat::curveconf::{CurveConfig, DivisorClass};
use k3lat::finquad::parse_form;
use k3lat::lattice::identify;
use k3lat::weierstrass::{euler_sum, fiber_census, shioda_tate, KodairaFiber, ModelFile};
use num_traits::Signed;
use serde::Serialize;

use crate::error::CliError;

/// Candidate names for the invariant lattices.
pub const INVARIANT_MENU: [&str; 6] = [
    "U+E8+A3",
    "T(2,5,6)",
    "U(2)+D4+<-8>",
    "T(4,4,4)",
    "T(3,4,4)",
    "U+D4+<-8>",
];

/// Candidate names for the Picard lattices.
pub const PICARD_MENU: [&str; 3] = ["U+E8+D4", "U(2)+D4+E8", "U+D4+D4+D4"];

struct InvariantCase {
    id: &'static str,
    file: &'static str,
    automorphism: &'static str,
    rank: usize,
    name: &'static str,
    form: Option<&'static str>,
}

const INVARIANT_CASES: [InvariantCase; 6] = [
    InvariantCase { id: "X2", file: "x2.json", automorphism: "sigma", rank: 13, name: "U+E8+A3", form: Some("w(2,2,5)") },
    InvariantCase { id: "X4", file: "x4_sigma.json", automorphism: "sigma", rank: 11, name: "T(2,5,6)", form: Some("w(2,3,-5)") },
    InvariantCase {
        id: "X4",
        file: "x4_sigma_prime.json",
        automorphism: "sigma_prime",
        rank: 7,
        name: "U(2)+D4+<-8>",
        form: Some("u(1)+v(1)+w(2,3,-1)"),
    },
    InvariantCase { id: "X6", file: "x6_sigma8.json", automorphism: "sigma8", rank: 10, name: "T(4,4,4)", form: None },
    InvariantCase { id: "X6", file: "x6_sigma.json", automorphism: "sigma", rank: 9, name: "T(3,4,4)", form: Some("w(2,3,5)") },
    InvariantCase {
        id: "X6",
        file: "x6_sigma_prime.json",
        automorphism: "sigma_prime",
        rank: 7,
        name: "U+D4+<-8>",
        form: Some("v(1)+w(2,3,-1)"),
    },
];

struct PicardCase {
    id: &'static str,
    file: &'static str,
    name: &'static str,
    disc_order: u64,
    form: Option<&'static str>,
}

const PICARD_CASES: [PicardCase; 3] = [
    PicardCase { id: "X2", file: "x2.json", name: "U+E8+D4", disc_order: 4, form: Some("v(1)") },
    PicardCase { id: "X4", file: "x4_sigma.json", name: "U(2)+D4+E8", disc_order: 16, form: None },
    PicardCase { id: "X6", file: "x6_picard.json", name: "U+D4+D4+D4", disc_order: 64, form: None },
];

struct FibrationCase {
    id: &'static str,
    file: &'static str,
    fibers: &'static [(KodairaFiber, usize)],
    mw_rank: usize,
}

const FIBRATION_CASES: [FibrationCase; 3] = [
    FibrationCase {
        id: "X2",
        file: "model_x2.json",
        fibers: &[(KodairaFiber::I(1), 8), (KodairaFiber::IStar(0), 1), (KodairaFiber::IIStar, 1)],
        mw_rank: 0,
    },
    FibrationCase {
        id: "X4",
        file: "model_x4.json",
        fibers: &[(KodairaFiber::III, 5), (KodairaFiber::IIIStar, 1)],
        mw_rank: 0,
    },
    FibrationCase {
        id: "X6",
        file: "model_x6.json",
        fibers: &[(KodairaFiber::I(1), 16), (KodairaFiber::IVStar, 1)],
        mw_rank: 6,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Invariant,
    Picard,
    Fibration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub kind: RowKind,
    pub case: String,
    pub automorphism: String,
    /// Rank of the lattice, or the Mordell-Weil rank for fibration rows.
    pub r: usize,
    pub identified: String,
    pub expected: String,
    pub note: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = ["kind", "case", "automorphism", "r", "identified", "expected", "result", "note"];
        let cells: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    format!("{:?}", r.kind).to_lowercase(),
                    r.case.clone(),
                    r.automorphism.clone(),
                    r.r.to_string(),
                    r.identified.clone(),
                    r.expected.clone(),
                    if r.pass { "PASS" } else { "FAIL" }.to_string(),
                    r.note.clone(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String]| -> fmt::Result {
            let parts: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            writeln!(f, "{}", parts.join("  ").trim_end())
        };
        line(f, &header.map(String::from))?;
        for row in &cells {
            line(f, row)?;
        }
        let passed = self.rows.iter().filter(|r| r.pass).count();
        write!(f, "{passed}/{} rows pass", self.rows.len())
    }
}

/// `K3LAT_DATASET` if set, else the `data` directory of the workspace.
pub fn default_dataset_dir() -> PathBuf {
    match std::env::var_os("K3LAT_DATASET") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

pub fn verify_dataset(dir: &Path) -> Result<VerificationReport, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("dataset directory {} not found", dir.display())));
    }
    let mut rows = Vec::new();
    for case in &INVARIANT_CASES {
        rows.push(invariant_row(dir, case).map_err(|e| e.in_case(case.file))?);
    }
    for case in &PICARD_CASES {
        rows.push(picard_row(dir, case).map_err(|e| e.in_case(case.file))?);
    }
    for case in &FIBRATION_CASES {
        rows.push(fibration_row(dir, case).map_err(|e| e.in_case(case.file))?);
    }
    Ok(VerificationReport { rows })
}

fn load_config(dir: &Path, file: &str) -> Result<CurveConfig, CliError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(CliError::Io(format!("missing dataset file {}", path.display())));
    }
    Ok(CurveConfig::from_path(path)?)
}

fn name_or_none(n: Option<String>) -> String {
    n.unwrap_or_else(|| "none".into())
}

fn invariant_row(dir: &Path, case: &InvariantCase) -> Result<ReportRow, CliError> {
    let config = load_config(dir, case.file)?;
    let basis = config
        .declared_basis()
        .ok_or_else(|| CliError::Usage(format!("{} declares no basis", case.file)))?
        .to_vec();
    let g = config.automorphism(case.automorphism)?;
    let inv = config.invariant_lattice(&basis, &g)?;
    let l = &inv.lattice;
    let identified = name_or_none(identify(l, &INVARIANT_MENU)?);
    let q = l.discriminant_form()?;
    let form_ok = match case.form {
        Some(form) => q.is_isomorphic(&parse_form(form)?)?,
        None => true,
    };
    let mut note = format!("disc {q}");
    if let Some(form) = case.form {
        note.push_str(&format!(" ~ {form}: {form_ok}"));
    }
    Ok(ReportRow {
        kind: RowKind::Invariant,
        case: case.id.into(),
        automorphism: case.automorphism.into(),
        r: l.rank(),
        pass: l.rank() == case.rank && identified == case.name && form_ok,
        identified,
        expected: case.name.into(),
        note,
    })
}

fn picard_row(dir: &Path, case: &PicardCase) -> Result<ReportRow, CliError> {
    let config = load_config(dir, case.file)?;
    let curves: Vec<DivisorClass> = config.ids().iter().map(|i| DivisorClass::curve(i)).collect();
    let l = config.lattice_of(&curves)?;
    let identified = name_or_none(identify(&l, &PICARD_MENU)?);
    let order = l.det().abs();
    let form_ok = match case.form {
        Some(form) => l.discriminant_form()?.is_isomorphic(&parse_form(form)?)?,
        None => true,
    };
    let mut note = format!("|disc| = {order}");
    if let Some(form) = case.form {
        note.push_str(&format!(", disc ~ {form}: {form_ok}"));
    }
    Ok(ReportRow {
        kind: RowKind::Picard,
        case: case.id.into(),
        automorphism: "-".into(),
        r: l.rank(),
        pass: identified == case.name && order == case.disc_order.into() && form_ok,
        identified,
        expected: case.name.into(),
        note,
    })
}

/// `8 I1 + I0* + II*` style summary.
pub fn census_string(census: &[(KodairaFiber, usize)]) -> String {
    census
        .iter()
        .map(|(f, n)| if *n == 1 { f.to_string() } else { format!("{n} {f}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn fibration_row(dir: &Path, case: &FibrationCase) -> Result<ReportRow, CliError> {
    let path = dir.join(case.file);
    if !path.is_file() {
        return Err(CliError::Io(format!("missing dataset file {}", path.display())));
    }
    let model = ModelFile::from_path(path)?;
    let fibers = model.model.fibers()?;
    let census = fiber_census(&fibers);
    let euler = euler_sum(&census);
    let mw = shioda_tate(model.picard_rank, &census, 1)?;
    let identified = census_string(&census);
    Ok(ReportRow {
        kind: RowKind::Fibration,
        case: case.id.into(),
        automorphism: "-".into(),
        r: mw,
        pass: census == case.fibers && euler == 24 && mw == case.mw_rank,
        identified,
        expected: format!("{}, MW rank {}", census_string(case.fibers), case.mw_rank),
        note: format!(
            "A = {}, B = {}, euler {euler}, rho {}",
            model.model.a(),
            model.model.b(),
            model.picard_rank
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_strings() {
        let c = [(KodairaFiber::I(1), 8), (KodairaFiber::IStar(0), 1)];
        assert_eq!(census_string(&c), "8 I1 + I0*");
        assert_eq!(census_string(&[]), "");
    }

    #[test]
    fn missing_directory() {
        let err = verify_dataset(Path::new("/nonexistent/k3lat")).unwrap_err();
        assert!(matches!(err, CliError::Io(_)));
    }

    #[test]
    fn missing_file_names_the_case() {
        let dir = std::env::temp_dir().join(format!("k3lat-verify-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let err = verify_dataset(&dir).unwrap_err();
        std::fs::remove_dir_all(&dir).unwrap();
        assert!(err.to_string().starts_with("x2.json: "), "{err}");
    }

    #[test]
    fn report_table() {
        let report = VerificationReport {
            rows: vec![ReportRow {
                kind: RowKind::Picard,
                case: "X".into(),
                automorphism: "-".into(),
                r: 2,
                identified: "U".into(),
                expected: "U".into(),
                note: String::new(),
                pass: false,
            }],
        };
        let text = report.to_string();
        assert!(text.contains("FAIL"));
        assert!(text.ends_with("0/1 rows pass"));
        assert!(!report.all_pass());
    }
}
