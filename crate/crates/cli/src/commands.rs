use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use k3lat::curveconf::{CurveConfig, DivisorClass};
use k3lat::finquad::parse_form;
use k3lat::lattice::{identify, parse_lattice_expr, Lattice};
use k3lat::weierstrass::{euler_sum, fiber_census, shioda_tate, RatPoly, WeierstrassModel};
use k3lat::IntMatrix;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::verify::{census_string, default_dataset_dir, verify_dataset, INVARIANT_MENU};

#[derive(Debug, Parser)]
#[command(name = "k3lat", version, about = "Exact lattice computations for K3 surfaces")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattices given by expressions such as `U+E8+A3` or `T(2,5,6)`.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Finite quadratic forms such as `u(1)+w(2,3,-1)`.
    #[command(subcommand)]
    Fqf(FqfCmd),
    /// Rational-curve configurations stored as JSON.
    #[command(subcommand)]
    Config(ConfigCmd),
    /// Weierstrass fibrations y^2 = x^3 + A(t) x + B(t).
    #[command(subcommand)]
    Fibration(FibrationCmd),
    /// Recompute every reference case in the dataset directory.
    Verify {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatticeCmd {
    Info { expr: String },
    Identify {
        /// Gram matrix as a JSON array of rows or whitespace-separated rows.
        #[arg(long)]
        gram: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        menu: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FqfCmd {
    Sign { expr: String },
    Iso { left: String, right: String },
}

#[derive(Debug, Args)]
pub struct BasisArg {
    /// Comma-separated curve ids; defaults to the basis declared in the file.
    #[arg(long, value_delimiter = ',')]
    basis: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
pub enum ConfigCmd {
    Gram {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
    },
    Invariant {
        file: PathBuf,
        /// Automorphism name, optionally as a power: `sigma^2`.
        #[arg(long)]
        auto: String,
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long, num_args = 1..)]
        menu: Option<Vec<String>>,
    },
    Divisible {
        file: PathBuf,
        /// Class such as `4*E0+2*E1-S0`.
        #[arg(long)]
        class: String,
        #[arg(long)]
        k: i64,
        #[command(flatten)]
        basis: BasisArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum FibrationCmd {
    Classify {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: String,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: String,
        /// Picard number, for the Mordell-Weil rank.
        #[arg(long)]
        rho: Option<usize>,
    },
}

/// Result of a command: text and JSON renderings plus whether the check it
/// performed came out positive.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub success: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Outcome { text, json, success: true }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            serde_json::to_string_pretty(&self.json).expect("serializable")
        } else {
            self.text.trim_end().to_string()
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.success {
            0
        } else {
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Lattice(LatticeCmd::Info { expr }) => lattice_info(expr),
        Command::Lattice(LatticeCmd::Identify { gram, menu }) => lattice_identify(gram, menu),
        Command::Fqf(FqfCmd::Sign { expr }) => fqf_sign(expr),
        Command::Fqf(FqfCmd::Iso { left, right }) => fqf_iso(left, right),
        Command::Config(ConfigCmd::Gram { file, subset }) => config_gram(file, subset.as_deref()),
        Command::Config(ConfigCmd::Invariant { file, auto, basis, menu }) => {
            config_invariant(file, auto, basis, menu.as_deref())
        }
        Command::Config(ConfigCmd::Divisible { file, class, k, basis }) => config_divisible(file, class, *k, basis),
        Command::Fibration(FibrationCmd::Classify { a, b, rho }) => fibration_classify(a, b, *rho),
        Command::Verify { dataset } => {
            let dir = dataset.clone().unwrap_or_else(default_dataset_dir);
            let report = verify_dataset(&dir)?;
            Ok(Outcome {
                text: report.to_string(),
                json: serde_json::to_value(&report).expect("serializable"),
                success: report.all_pass(),
            })
        }
    }
}

fn matrix_json(m: &IntMatrix) -> Value {
    match m.to_i64_rows() {
        Some(rows) => json!(rows),
        None => json!(m
            .to_rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>()),
    }
}

fn matrix_text(m: &IntMatrix) -> String {
    let rows: Vec<Vec<String>> = m.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    let w = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    rows.iter()
        .map(|r| r.iter().map(|c| format!("{c:>w$}")).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Lattice summary shared by several commands.
fn describe(l: &Lattice) -> Result<(String, Value), CliError> {
    let q = l.discriminant_form()?;
    let sign = q.signature_mod8().ok();
    let (p, m) = l.signature();
    let mut text = format!("rank {}\nsignature ({p},{m})\ndet {}\n", l.rank(), l.det());
    let _ = writeln!(text, "discriminant group {:?} (length {})", q.group_type(), q.length());
    let _ = writeln!(text, "discriminant form {q}");
    if let Some(s) = sign {
        let _ = writeln!(text, "form signature mod 8: {s}");
    }
    let json = json!({
        "rank": l.rank(),
        "signature": [p, m],
        "det": l.det().to_string(),
        "group_type": q.group_type(),
        "length": q.length(),
        "form": q.to_string(),
        "form_signature_mod8": sign,
    });
    Ok((text, json))
}

fn lattice_info(expr: &str) -> Result<Outcome, CliError> {
    let l = parse_lattice_expr(expr)?;
    let (text, mut json) = describe(&l)?;
    json["expr"] = json!(expr);
    Ok(Outcome::ok(text, json))
}

fn read_gram(path: &Path) -> Result<IntMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<i64>> = match serde_json::from_str(&text) {
        Ok(rows) => rows,
        Err(_) => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().map_err(|_| CliError::Usage(format!("bad Gram entry '{t}'"))))
                    .collect()
            })
            .collect::<Result<_, _>>()?,
    };
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage("Gram matrix must be square".into()));
    }
    Ok(IntMatrix::from_rows(&rows))
}

fn lattice_identify(gram: &Path, menu: &[String]) -> Result<Outcome, CliError> {
    let l = Lattice::from_gram(&read_gram(gram)?)?;
    let found = identify(&l, menu)?;
    let text = match &found {
        Some(name) => format!("{name}\n{l}"),
        None => format!("no match\n{l}"),
    };
    Ok(Outcome {
        text,
        json: json!({ "identified": found, "rank": l.rank(), "det": l.det().to_string() }),
        success: found.is_some(),
    })
}

fn fqf_sign(expr: &str) -> Result<Outcome, CliError> {
    let q = parse_form(expr)?;
    let exact = q.signature_mod8()?;
    let float = q.signature_mod8_float()?;
    Ok(Outcome {
        text: format!("{q}\nsignature mod 8: {exact}"),
        json: json!({ "form": q.to_string(), "order": q.order().to_string(), "signature_mod8": exact, "float_signature_mod8": float }),
        success: exact == float,
    })
}

fn fqf_iso(left: &str, right: &str) -> Result<Outcome, CliError> {
    let iso = parse_form(left)?.is_isomorphic(&parse_form(right)?)?;
    Ok(Outcome {
        text: if iso { "isomorphic" } else { "not isomorphic" }.into(),
        json: json!({ "left": left, "right": right, "isomorphic": iso }),
        success: iso,
    })
}

fn load(file: &Path) -> Result<CurveConfig, CliError> {
    Ok(CurveConfig::from_path(file)?)
}

fn resolve_basis(c: &CurveConfig, arg: &BasisArg) -> Result<Vec<String>, CliError> {
    match (&arg.basis, c.declared_basis()) {
        (Some(b), _) => Ok(b.clone()),
        (None, Some(b)) => Ok(b.to_vec()),
        (None, None) => Err(CliError::Usage(format!("{} declares no basis; pass --basis", c.name()))),
    }
}

fn config_gram(file: &Path, subset: Option<&[String]>) -> Result<Outcome, CliError> {
    let c = load(file)?;
    let ids: Vec<String> = subset.map_or_else(|| c.ids().to_vec(), <[String]>::to_vec);
    let g = c.gram_of(&ids)?;
    let l = Lattice::from_gram(&g)?;
    let text = format!("{}\n{}\n{l}", ids.join(" "), matrix_text(&g));
    Ok(Outcome::ok(
        text,
        json!({ "ids": ids, "gram": matrix_json(&g), "rank": l.rank(), "det": l.det().to_string() }),
    ))
}

fn config_invariant(file: &Path, auto: &str, basis: &BasisArg, menu: Option<&[String]>) -> Result<Outcome, CliError> {
    let c = load(file)?;
    let basis = resolve_basis(&c, basis)?;
    let g = c.automorphism(auto)?;
    let inv = c.invariant_lattice(&basis, &g)?;
    let default_menu: Vec<String> = INVARIANT_MENU.iter().map(|s| s.to_string()).collect();
    let found = identify(&inv.lattice, menu.unwrap_or(&default_menu))?;
    let (mut text, mut json) = describe(&inv.lattice)?;
    let gens: Vec<String> = inv.orbit_generators.iter().map(ToString::to_string).collect();
    let _ = writeln!(text, "identified {}", found.as_deref().unwrap_or("none"));
    let _ = writeln!(text, "basis {}", basis.join(" "));
    let _ = writeln!(text, "kernel coordinates\n{}", matrix_text(&inv.coordinates));
    let _ = writeln!(text, "orbit generators {}", gens.join(", "));
    json["identified"] = json!(found);
    json["basis"] = json!(basis);
    json["coordinates"] = matrix_json(&inv.coordinates);
    json["orbit_generators"] = json!(gens);
    Ok(Outcome::ok(text, json))
}

fn config_divisible(file: &Path, class: &str, k: i64, basis: &BasisArg) -> Result<Outcome, CliError> {
    let c = load(file)?;
    let basis = resolve_basis(&c, basis)?;
    let d = DivisorClass::parse(class)?;
    let coords = c
        .in_span(&basis, &d)?
        .ok_or_else(|| k3lat::Error::NotInSpan(d.to_string()))?;
    let divisible = c.divisible_by(&basis, &d, k)?;
    let coords: Vec<String> = coords.iter().map(ToString::to_string).collect();
    let text = format!(
        "{d} = ({}) in basis {}\ndivisible by {k}: {divisible}",
        coords.join(", "),
        basis.join(" ")
    );
    Ok(Outcome {
        text,
        json: json!({ "class": d.to_string(), "basis": basis, "coordinates": coords, "k": k, "divisible": divisible }),
        success: divisible,
    })
}

fn fibration_classify(a: &str, b: &str, rho: Option<usize>) -> Result<Outcome, CliError> {
    let model = WeierstrassModel::new(RatPoly::parse(a)?, RatPoly::parse(b)?)?;
    let fibers = model.fibers()?;
    let census = fiber_census(&fibers);
    let euler = euler_sum(&census);
    let mw = rho.map(|r| shioda_tate(r, &census, 1)).transpose()?;
    let mut text = format!("A = {}\nB = {}\nDelta = {}\n", model.a(), model.b(), model.discriminant());
    let mut places = Vec::new();
    for (p, f) in &fibers {
        let _ = writeln!(
            text,
            "place {} (x{}): a={} b={} delta={} -> {f}",
            p.place,
            p.count(),
            p.a,
            p.b,
            p.delta
        );
        places.push(json!({
            "place": p.place.to_string(),
            "count": p.count(),
            "a": p.a.to_string(),
            "b": p.b.to_string(),
            "delta": p.delta.to_string(),
            "fiber": f.to_string(),
        }));
    }
    let _ = writeln!(text, "singular fibers {}", census_string(&census));
    let _ = writeln!(text, "euler sum {euler}");
    if let Some(mw) = mw {
        let _ = writeln!(text, "Mordell-Weil rank {mw}");
    }
    Ok(Outcome {
        text,
        json: json!({
            "A": model.a().to_string(),
            "B": model.b().to_string(),
            "places": places,
            "fibers": census_string(&census),
            "euler_sum": euler,
            "mordell_weil_rank": mw,
        }),
        success: euler == 24,
    })
}
