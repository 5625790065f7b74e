//! Command-line front end: one JSON document in, one JSON result out.
//!
//! Exit codes: 0 success, 1 malformed document, 2 validation failure (the
//! diagnostic on stdout names the violated invariant, and the offending
//! endomorphism index for oracle failures). Results are byte-stable across
//! runs; `--explain` writes a human-readable transcript to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use fatf::closure::{
    closure_of_basis, enumerate_stabilizers, is_endo_fixed_basis, qp_pairs, ClosureCase,
    ClosureResult, OracleSet,
};
use fatf::fix::{fix_type_i_family, fix_type_ii, FixResult, TypeIFamily};
use fatf::group::{subgroup_basis, Endomorphism, FatfElement, SubgroupBasis, TypeIIEndo};
use fatf::intlin::{smith_normal_form, IntMatrix};
use fatf::stallings;
use fatf::words::Word;

#[derive(Parser)]
#[command(
    name = "fatf",
    about = "Exact computations in free-abelian times free groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GroupArgs {
    /// Ambient dimensions: m (free-abelian rank) and n (free rank)
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    ambient: Vec<usize>,
    /// Input document (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Write a human-readable transcript to stderr
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct ClosureArgs {
    #[command(flatten)]
    common: GroupArgs,
    /// Free-part oracle document (required for non-abelian subgroups)
    #[arg(long)]
    oracle: Option<PathBuf>,
}

#[derive(Args)]
struct EnumArgs {
    #[command(flatten)]
    common: GroupArgs,
    /// Maximum letter-image / stable-letter length
    #[arg(long, default_value_t = 1)]
    bound_words: usize,
    /// Maximum absolute value of matrix and vector entries
    #[arg(long, default_value_t = 1)]
    bound_matrices: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a subgroup basis from generators
    Basis(GroupArgs),
    /// Decide membership of an element in a subgroup
    Member(GroupArgs),
    /// Fixed subgroup of a stable-letter endomorphism
    FixIi(GroupArgs),
    /// Fixed subgroup of a family of matrix pairs over a free part
    FixFamily(GroupArgs),
    /// Spanning matrix pairs of the vector constraints of a subgroup
    QpPairs(GroupArgs),
    /// Endo-fixed closure of a subgroup
    Closure(ClosureArgs),
    /// Decide whether a subgroup is endo-fixed
    IsEndoFixed(ClosureArgs),
    /// Smith normal form of an integer matrix
    Snf {
        #[arg(long)]
        input: PathBuf,
    },
    /// Brute-force enumeration of bounded endomorphisms fixing a subgroup
    EnumerateStabilizers(EnumArgs),
}

// ---------------------------------------------------------------------------
// failures

enum Failure {
    /// Unreadable or structurally invalid document (exit 1).
    Malformed(String),
    /// Well-formed but invalid content (exit 2).
    Validation {
        message: String,
        invariant: &'static str,
        phi_index: Option<usize>,
    },
}

impl Failure {
    fn validation(message: impl Into<String>, invariant: &'static str) -> Self {
        Failure::Validation {
            message: message.into(),
            invariant,
            phi_index: None,
        }
    }
}

impl From<fatf::Error> for Failure {
    fn from(e: fatf::Error) -> Self {
        let (invariant, phi_index) = match &e {
            fatf::Error::IdentityWord => ("nontrivial_word", None),
            fatf::Error::ZeroGcdInput => ("nonzero_gcd_input", None),
            fatf::Error::NotSaturated => ("saturated_lattice", None),
            fatf::Error::InfiniteIndex => ("finite_index", None),
            fatf::Error::InvalidStableLetter => ("stable_letter_primitive", None),
            fatf::Error::ZeroStableVector => ("stable_vector_nonzero", None),
            fatf::Error::Dimension(_) => ("dimension", None),
            fatf::Error::NotAbelian => ("abelian_input", None),
            fatf::Error::Abelian => ("nonabelian_input", None),
            fatf::Error::MissingOracle => ("oracle_required", None),
            fatf::Error::OracleNotStabilizing { index } => {
                ("oracle_stabilizes_projection", Some(*index))
            }
            fatf::Error::OracleFixMismatch { index, .. } => {
                ("oracle_fixed_words_fixed", Some(*index))
            }
        };
        Failure::Validation {
            message: e.to_string(),
            invariant,
            phi_index,
        }
    }
}

#[derive(Serialize)]
struct Diagnostic {
    error: String,
    invariant: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_index: Option<usize>,
}

// ---------------------------------------------------------------------------
// wire formats

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    vec: Vec<i128>,
    word: Vec<i128>,
}

#[derive(Deserialize)]
struct MemberDoc {
    subgroup: Vec<ElementDoc>,
    element: ElementDoc,
}

#[derive(Serialize)]
#[serde(tag = "type")]
enum EndoDoc {
    I {
        phi: Vec<Vec<i128>>,
        #[serde(rename = "Q")]
        q: Vec<Vec<i128>>,
        #[serde(rename = "P")]
        p: Vec<Vec<i128>>,
    },
    II {
        z: Vec<i128>,
        ell: Vec<i128>,
        h: Vec<i128>,
        #[serde(rename = "Q")]
        q: Vec<Vec<i128>>,
        #[serde(rename = "P")]
        p: Vec<Vec<i128>>,
    },
}

/// Input twin of [`EndoDoc`]. Internally tagged enums buffer their content
/// through a representation without 128-bit integers, so the input side
/// sticks to i64 (plain structs elsewhere parse i128 directly).
#[derive(Deserialize)]
#[serde(tag = "type")]
enum EndoInDoc {
    I {
        #[allow(dead_code)]
        phi: Vec<Vec<i64>>,
        #[serde(rename = "Q")]
        #[allow(dead_code)]
        q: Vec<Vec<i64>>,
        #[serde(rename = "P")]
        #[allow(dead_code)]
        p: Vec<Vec<i64>>,
    },
    II {
        z: Vec<i64>,
        ell: Vec<i64>,
        h: Vec<i64>,
        #[serde(rename = "Q")]
        q: Vec<Vec<i64>>,
        #[serde(rename = "P")]
        p: Vec<Vec<i64>>,
    },
}

fn widen(v: &[i64]) -> Vec<i128> {
    v.iter().map(|&x| x as i128).collect()
}

fn widen2(v: &[Vec<i64>]) -> Vec<Vec<i128>> {
    v.iter().map(|r| widen(r)).collect()
}

#[derive(Serialize, Deserialize)]
struct PairDoc {
    #[serde(rename = "Q")]
    q: Vec<Vec<i128>>,
    #[serde(rename = "P")]
    p: Vec<Vec<i128>>,
}

#[derive(Deserialize)]
struct FamilyDoc {
    pairs: Vec<PairDoc>,
    free_part: Vec<Vec<i128>>,
}

#[derive(Deserialize)]
struct OracleEndoDoc {
    images: Vec<Vec<i128>>,
}

#[derive(Deserialize)]
struct OracleDoc {
    endos: Vec<OracleEndoDoc>,
    fix_bases: Vec<Vec<Vec<i128>>>,
}

#[derive(Serialize)]
struct BasisDoc {
    decorated: Vec<ElementDoc>,
    lattice: Vec<Vec<i128>>,
}

#[derive(Serialize)]
struct FixDoc {
    verdict: &'static str,
    basis: Option<BasisDoc>,
    witness: Option<Vec<i128>>,
}

#[derive(Serialize)]
struct ClosureDoc {
    verdict: &'static str,
    basis: Option<BasisDoc>,
    witness: Option<Vec<i128>>,
    witnesses: Vec<EndoDoc>,
    qp_pairs: Vec<PairDoc>,
    case: &'static str,
}

#[derive(Serialize)]
struct DecisionDoc {
    endo_fixed: bool,
    certificate: Option<ElementDoc>,
    witnesses: Vec<EndoDoc>,
}

#[derive(Serialize)]
struct SnfDoc {
    #[serde(rename = "U")]
    u: Vec<Vec<i128>>,
    #[serde(rename = "D")]
    d: Vec<Vec<i128>>,
    #[serde(rename = "V")]
    v: Vec<Vec<i128>>,
}

// ---------------------------------------------------------------------------
// conversions

fn big(x: i128) -> BigInt {
    BigInt::from(x)
}

fn small(x: &BigInt) -> i128 {
    i128::try_from(x).expect("result entry fits in the wire format")
}

fn word_from_wire(n: usize, letters: &[i128]) -> Result<Word, Failure> {
    let mut ls = Vec::with_capacity(letters.len());
    for &raw in letters {
        let l = i32::try_from(raw)
            .map_err(|_| Failure::validation(format!("letter {raw} out of range"), "alphabet"))?;
        if l == 0 || l.unsigned_abs() as usize > n {
            return Err(Failure::validation(
                format!("letter {l} outside the alphabet of size {n}"),
                "alphabet",
            ));
        }
        ls.push(l);
    }
    Ok(Word::new(n, ls))
}

fn word_to_wire(w: &Word) -> Vec<i128> {
    w.letters().iter().map(|&l| l as i128).collect()
}

fn element_from_wire(m: usize, n: usize, doc: &ElementDoc) -> Result<FatfElement, Failure> {
    if doc.vec.len() != m {
        return Err(Failure::validation(
            format!("vector has {} entries, ambient needs {m}", doc.vec.len()),
            "dimension",
        ));
    }
    Ok(FatfElement::new(
        doc.vec.iter().map(|&x| big(x)).collect(),
        word_from_wire(n, &doc.word)?,
    ))
}

fn element_to_wire(e: &FatfElement) -> ElementDoc {
    ElementDoc {
        vec: e.vec().iter().map(small).collect(),
        word: word_to_wire(e.word()),
    }
}

fn matrix_from_wire(
    rows: usize,
    cols: usize,
    doc: &[Vec<i128>],
    what: &str,
) -> Result<IntMatrix, Failure> {
    if doc.len() != rows || doc.iter().any(|r| r.len() != cols) {
        return Err(Failure::validation(
            format!("{what} must be {rows} x {cols}"),
            "dimension",
        ));
    }
    Ok(IntMatrix::from_rows(
        cols,
        doc.iter()
            .map(|r| r.iter().map(|&x| big(x)).collect())
            .collect(),
    ))
}

fn matrix_to_wire(m: &IntMatrix) -> Vec<Vec<i128>> {
    (0..m.rows())
        .map(|r| m.row_slice(r).iter().map(small).collect())
        .collect()
}

fn vector_from_wire(len: usize, doc: &[i128], what: &str) -> Result<Vec<BigInt>, Failure> {
    if doc.len() != len {
        return Err(Failure::validation(
            format!("{what} must have {len} entries"),
            "dimension",
        ));
    }
    Ok(doc.iter().map(|&x| big(x)).collect())
}

fn basis_to_wire(s: &SubgroupBasis) -> BasisDoc {
    BasisDoc {
        decorated: s
            .decorated()
            .iter()
            .map(|(a, u)| ElementDoc {
                vec: a.iter().map(small).collect(),
                word: word_to_wire(u),
            })
            .collect(),
        lattice: matrix_to_wire(s.lattice().basis()),
    }
}

fn fix_to_wire(r: &FixResult) -> FixDoc {
    match r {
        FixResult::FinitelyGenerated(b) => FixDoc {
            verdict: "finitely_generated",
            basis: Some(basis_to_wire(b)),
            witness: None,
        },
        FixResult::NotFinitelyGenerated { witness } => FixDoc {
            verdict: "not_finitely_generated",
            basis: None,
            witness: Some(witness.iter().map(small).collect()),
        },
    }
}

fn endo_to_wire(e: &Endomorphism) -> EndoDoc {
    match e {
        Endomorphism::I(t) => EndoDoc::I {
            phi: t.phi().iter().map(word_to_wire).collect(),
            q: matrix_to_wire(t.q()),
            p: matrix_to_wire(t.p()),
        },
        Endomorphism::II(t) => EndoDoc::II {
            z: word_to_wire(t.z()),
            ell: t.ell().iter().map(small).collect(),
            h: t.h().iter().map(small).collect(),
            q: matrix_to_wire(t.q()),
            p: matrix_to_wire(t.p()),
        },
    }
}

fn closure_to_wire(r: &ClosureResult) -> ClosureDoc {
    let fix = fix_to_wire(&r.closure);
    ClosureDoc {
        verdict: fix.verdict,
        basis: fix.basis,
        witness: fix.witness,
        witnesses: r.witnesses.iter().map(endo_to_wire).collect(),
        qp_pairs: r
            .qp_pairs
            .iter()
            .map(|(q, p)| PairDoc {
                q: matrix_to_wire(q),
                p: matrix_to_wire(p),
            })
            .collect(),
        case: r.case.tag(),
    }
}

// ---------------------------------------------------------------------------
// drivers

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Malformed(format!("invalid document {}: {e}", path.display())))
}

fn ambient(args: &GroupArgs) -> Result<(usize, usize), Failure> {
    if args.ambient.len() != 2 {
        return Err(Failure::validation(
            "--ambient takes exactly m and n",
            "ambient",
        ));
    }
    let (m, n) = (args.ambient[0], args.ambient[1]);
    if m < 1 {
        return Err(Failure::validation(
            "free-abelian rank m must be positive",
            "ambient",
        ));
    }
    if n < 2 {
        return Err(Failure::validation(
            "free rank n must be at least 2 for the endomorphism classification",
            "ambient",
        ));
    }
    Ok((m, n))
}

fn load_subgroup(m: usize, n: usize, path: &Path) -> Result<SubgroupBasis, Failure> {
    let docs: Vec<ElementDoc> = read_doc(path)?;
    let gens = docs
        .iter()
        .map(|d| element_from_wire(m, n, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(subgroup_basis(m, n, &gens))
}

fn load_oracle(n: usize, path: &Path) -> Result<OracleSet, Failure> {
    let doc: OracleDoc = read_doc(path)?;
    let endos = doc
        .endos
        .iter()
        .map(|e| {
            e.images
                .iter()
                .map(|w| word_from_wire(n, w))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fix_bases = doc
        .fix_bases
        .iter()
        .map(|ws| {
            ws.iter()
                .map(|w| word_from_wire(n, w))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OracleSet::new(endos, fix_bases)?)
}

fn explain_closure(r: &ClosureResult) {
    match &r.case {
        ClosureCase::NonAbelian {
            endo_count,
            pair_count,
        } => {
            eprintln!(
                "subgroup: non-abelian; free-part endomorphisms (identity included): {}; \
                 constraint pairs q = {}; witnesses = {}",
                endo_count,
                pair_count,
                r.witnesses.len()
            );
        }
        other => {
            eprintln!("subgroup: abelian; case: {}; witnesses = 1", other.tag());
        }
    }
    match &r.closure {
        FixResult::FinitelyGenerated(b) => eprintln!(
            "closure: finitely generated; projection rank {}; lattice rank {}",
            b.rank(),
            b.lattice().rank()
        ),
        FixResult::NotFinitelyGenerated { .. } => eprintln!("closure: not finitely generated"),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Basis(args) => {
            let (m, n) = ambient(&args)?;
            let s = load_subgroup(m, n, &args.input)?;
            if args.explain {
                eprintln!(
                    "basis: projection rank {}; lattice rank {}; abelian: {}",
                    s.rank(),
                    s.lattice().rank(),
                    s.is_abelian()
                );
            }
            Ok(serde_json::to_string(&basis_to_wire(&s)).expect("serializable"))
        }
        Command::Member(args) => {
            let (m, n) = ambient(&args)?;
            let doc: MemberDoc = read_doc(&args.input)?;
            let gens = doc
                .subgroup
                .iter()
                .map(|d| element_from_wire(m, n, d))
                .collect::<Result<Vec<_>, _>>()?;
            let s = subgroup_basis(m, n, &gens);
            let x = element_from_wire(m, n, &doc.element)?;
            let member = s.member(&x);
            if args.explain {
                eprintln!("member: {member}");
            }
            Ok(
                serde_json::to_string(&serde_json::json!({ "member": member }))
                    .expect("serializable"),
            )
        }
        Command::FixIi(args) => {
            let (m, n) = ambient(&args)?;
            let doc: EndoInDoc = read_doc(&args.input)?;
            let EndoInDoc::II { z, ell, h, q, p } = doc else {
                return Err(Failure::validation(
                    "fix-ii expects a stable-letter endomorphism document",
                    "endomorphism_type",
                ));
            };
            let endo = TypeIIEndo::new(
                word_from_wire(n, &widen(&z))?,
                vector_from_wire(m, &widen(&ell), "ell")?,
                vector_from_wire(n, &widen(&h), "h")?,
                matrix_from_wire(m, m, &widen2(&q), "Q")?,
                matrix_from_wire(n, m, &widen2(&p), "P")?,
            )?;
            let basis = fix_type_ii(&endo);
            if args.explain {
                eprintln!(
                    "fixed subgroup: abelian; projection rank {}; lattice rank {}",
                    basis.rank(),
                    basis.lattice().rank()
                );
            }
            let out = FixDoc {
                verdict: "finitely_generated",
                basis: Some(basis_to_wire(&basis)),
                witness: None,
            };
            Ok(serde_json::to_string(&out).expect("serializable"))
        }
        Command::FixFamily(args) => {
            let (m, n) = ambient(&args)?;
            let doc: FamilyDoc = read_doc(&args.input)?;
            let pairs = doc
                .pairs
                .iter()
                .map(|pd| {
                    Ok((
                        matrix_from_wire(m, m, &pd.q, "Q")?,
                        matrix_from_wire(n, m, &pd.p, "P")?,
                    ))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let words = doc
                .free_part
                .iter()
                .map(|w| word_from_wire(n, w))
                .collect::<Result<Vec<_>, _>>()?;
            let family = TypeIFamily::new(m, pairs, stallings::build(n, &words))?;
            let result = fix_type_i_family(&family);
            if args.explain {
                match &result {
                    FixResult::FinitelyGenerated(b) => eprintln!(
                        "fixed subgroup: finitely generated; projection rank {}; lattice rank {}",
                        b.rank(),
                        b.lattice().rank()
                    ),
                    FixResult::NotFinitelyGenerated { .. } => {
                        eprintln!("fixed subgroup: not finitely generated")
                    }
                }
            }
            Ok(serde_json::to_string(&fix_to_wire(&result)).expect("serializable"))
        }
        Command::QpPairs(args) => {
            let (m, n) = ambient(&args)?;
            let s = load_subgroup(m, n, &args.input)?;
            let pairs = qp_pairs(&s);
            if args.explain {
                eprintln!("constraint pairs q = {}", pairs.len());
            }
            let out = serde_json::json!({
                "pairs": pairs
                    .iter()
                    .map(|(q, p)| PairDoc { q: matrix_to_wire(q), p: matrix_to_wire(p) })
                    .collect::<Vec<_>>()
            });
            Ok(serde_json::to_string(&out).expect("serializable"))
        }
        Command::Closure(args) => {
            let (m, n) = ambient(&args.common)?;
            let s = load_subgroup(m, n, &args.common.input)?;
            let oracle = match &args.oracle {
                Some(path) => Some(load_oracle(n, path)?),
                None => None,
            };
            let result = closure_of_basis(&s, oracle.as_ref())?;
            if args.common.explain {
                explain_closure(&result);
            }
            Ok(serde_json::to_string(&closure_to_wire(&result)).expect("serializable"))
        }
        Command::IsEndoFixed(args) => {
            let (m, n) = ambient(&args.common)?;
            let s = load_subgroup(m, n, &args.common.input)?;
            let oracle = match &args.oracle {
                Some(path) => Some(load_oracle(n, path)?),
                None => None,
            };
            let decision = is_endo_fixed_basis(&s, oracle.as_ref())?;
            if args.common.explain {
                explain_closure(&decision.closure);
                eprintln!("endo-fixed: {}", decision.endo_fixed);
            }
            let out = DecisionDoc {
                endo_fixed: decision.endo_fixed,
                certificate: decision.certificate.as_ref().map(element_to_wire),
                witnesses: decision.witnesses.iter().map(endo_to_wire).collect(),
            };
            Ok(serde_json::to_string(&out).expect("serializable"))
        }
        Command::Snf { input } => {
            let doc: Vec<Vec<i128>> = read_doc(&input)?;
            let rows = doc.len();
            let cols = doc.first().map_or(0, |r| r.len());
            let a = matrix_from_wire(rows, cols, &doc, "matrix")?;
            let snf = smith_normal_form(&a);
            let out = SnfDoc {
                u: matrix_to_wire(&snf.u),
                d: matrix_to_wire(&snf.d),
                v: matrix_to_wire(&snf.v),
            };
            Ok(serde_json::to_string(&out).expect("serializable"))
        }
        Command::EnumerateStabilizers(args) => {
            let (m, n) = ambient(&args.common)?;
            let s = load_subgroup(m, n, &args.common.input)?;
            let endos = enumerate_stabilizers(&s, args.bound_words, args.bound_matrices);
            if args.common.explain {
                eprintln!(
                    "stabilizers found: {} (word bound {}, entry bound {})",
                    endos.len(),
                    args.bound_words,
                    args.bound_matrices
                );
            }
            let out = serde_json::json!({
                "endos": endos.iter().map(endo_to_wire).collect::<Vec<_>>()
            });
            Ok(serde_json::to_string(&out).expect("serializable"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(doc) => {
            println!("{doc}");
            ExitCode::SUCCESS
        }
        Err(Failure::Malformed(message)) => {
            let diag = Diagnostic {
                error: message,
                invariant: "well_formed_document",
                phi_index: None,
            };
            println!("{}", serde_json::to_string(&diag).expect("serializable"));
            ExitCode::from(1)
        }
        Err(Failure::Validation {
            message,
            invariant,
            phi_index,
        }) => {
            let diag = Diagnostic {
                error: message,
                invariant,
                phi_index,
            };
            println!("{}", serde_json::to_string(&diag).expect("serializable"));
            ExitCode::from(2)
        }
    }
}
