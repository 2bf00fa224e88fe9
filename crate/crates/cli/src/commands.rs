use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use equitile::analysis::{deviation_report, weyl_check};
use equitile::linalg;
use equitile::partition::{
    check_equitable, check_regular_equivalence, coarsest_front_equitable_refinement_with_tol, epsilon_equitability,
    weighted_refinement,
};
use equitile::rectangular::{block_svd, deviation_rect, rayleigh_quotient_rect, rect_transform, singular_value_gap};
use equitile::triangularize::{
    block_triangularize, deviation_matrices, generalized_quotient, recover_eigenvector, spectrum_split, Phases,
    TriangularizationResult,
};
use equitile::{CMatrix, Error as CoreError, Partition, Side, WeightedIndicator, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{exit, CliError, Result};
use crate::inputs::{self, PartitionFile};
use crate::matrix_market;
use crate::report::{self, DeviationJson, InputDigest, QuotientJson, RunReport, SplitJson, Timing};

/// JSON for stdout and the process exit code.
pub struct Outcome {
    pub json: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(value: impl Serialize) -> Self {
        Self { json: serde_json::to_value(value).expect("serializable"), code: exit::SUCCESS }
    }
}

#[derive(Args, Debug)]
pub struct Tolerance {
    /// Absolute tolerance; overrides EQUITILE_TOL.
    #[arg(long, env = "EQUITILE_TOL", default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    /// Square matrix in Matrix Market format.
    pub matrix: PathBuf,
    /// Partition to refine (defaults to a single cell).
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Entrywise nonzero weights; refines `diag(w)⁻¹ A diag(w)` instead of `A`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Front,
    Rear,
    Both,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub matrix: PathBuf,
    pub partition: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SideArg::Front)]
    pub side: SideArg,
    /// Also report the smallest ε for which the partition is ε-equitable.
    #[arg(long)]
    pub epsilon: bool,
    /// Also test regular equivalence.
    #[arg(long)]
    pub regular: bool,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Emit {
    #[value(name = "E", alias = "e")]
    E,
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "D", alias = "d")]
    D,
    Full,
    Eigvecs,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    pub matrix: PathBuf,
    pub partition: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// `auto` or a JSON file with one phase per cell.
    #[arg(long, default_value = "auto")]
    pub phases: String,
    /// Blocks to write to the output directory.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Vec<Emit>,
    /// Generalized quotients `E^α` to include in the report.
    #[arg(long = "quotient", value_name = "ALPHA", allow_negative_numbers = true)]
    pub quotients: Vec<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    pub matrix: PathBuf,
    pub partition: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Args, Debug)]
pub struct RectArgs {
    /// `m×n` matrix.
    pub matrix: PathBuf,
    /// Block sizes of the two side matrices.
    #[arg(long)]
    pub structure: PathBuf,
    /// Dense `m×q` block-diagonal side matrix `W⁻`.
    #[arg(long)]
    pub wminus: PathBuf,
    /// Dense `n×r` block-diagonal side matrix `W⁺`.
    #[arg(long)]
    pub wplus: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub tol: Tolerance,
}

fn load_matrix(path: &Path) -> Result<CMatrix> {
    let m = matrix_market::load(path)?.matrix;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::input(format!("{}: non-finite entry", path.display())));
    }
    Ok(m)
}

fn load_square(path: &Path) -> Result<CMatrix> {
    let m = load_matrix(path)?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(CliError::input(format!("{}: expected a non-empty square matrix, got {}x{}", path.display(), m.nrows(), m.ncols())));
    }
    Ok(m)
}

fn ensure_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::numerical(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn weighted(p: Partition, weights: Option<&Path>) -> Result<WeightedIndicator> {
    match weights {
        None => Ok(WeightedIndicator::unit(p)),
        Some(path) => Ok(WeightedIndicator::new(p, inputs::load_weights(path)?)?),
    }
}

fn ensure_size(a: &CMatrix, p: &Partition) -> Result<()> {
    if p.n() != a.nrows() {
        return Err(CliError::input(format!("partition covers {} indices, matrix is {}x{}", p.n(), a.nrows(), a.ncols())));
    }
    Ok(())
}

pub fn refine(args: &RefineArgs) -> Result<Outcome> {
    let a = load_square(&args.matrix)?;
    let initial = match &args.initial {
        Some(path) => inputs::load_partition(path)?,
        None => Partition::single_cell(a.nrows())?,
    };
    ensure_size(&a, &initial)?;
    let refined = match &args.weights {
        None => coarsest_front_equitable_refinement_with_tol(&a, &initial, args.tol.tol)?,
        Some(path) => weighted_refinement(&a, &inputs::load_weights(path)?, &initial, args.tol.tol)?,
    };
    Ok(Outcome::ok(PartitionFile::from_partition(&refined)))
}

pub fn check(args: &CheckArgs) -> Result<Outcome> {
    let a = load_square(&args.matrix)?;
    let p = inputs::load_partition(&args.partition)?;
    ensure_size(&a, &p)?;
    let wi = weighted(p.clone(), args.weights.as_deref())?;
    let sides: &[Side] = match args.side {
        SideArg::Front => &[Side::Front],
        SideArg::Rear => &[Side::Rear],
        SideArg::Both => &[Side::Front, Side::Rear],
    };
    let verdicts =
        sides.iter().map(|&s| check_equitable(&a, &wi, s, args.tol.tol)).collect::<std::result::Result<Vec<_>, _>>()?;
    let is_equitable = verdicts.iter().all(|v| v.is_equitable);
    let max_residual = verdicts.iter().map(|v| v.max_residual).fold(0.0, f64::max);
    let mut out = json!({
        "side": args.side.to_possible_value().expect("no skipped variants").get_name(),
        "is_equitable": is_equitable,
        "max_residual": max_residual,
        "tolerance": args.tol.tol,
        "verdicts": verdicts,
    });
    if args.epsilon {
        out["epsilon"] = json!(epsilon_equitability(&a, &p)?);
    }
    if args.regular {
        out["regular"] = json!(check_regular_equivalence(&a, &p)?);
    }
    Ok(Outcome { json: out, code: if is_equitable { exit::SUCCESS } else { exit::NEGATIVE } })
}

fn split_json(a: &CMatrix, r: &TriangularizationResult, tol: f64) -> Result<SplitJson> {
    let split = spectrum_split(r, tol * a.norm())?;
    let weyl_holds = match weyl_check(a, r) {
        Ok(check) => Some(check.holds),
        Err(CoreError::NotHermitian(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(SplitJson {
        eigs_e: report::spectrum(&split.eigs_e),
        eigs_f: report::spectrum(&split.eigs_f),
        tau_spec: linalg::spectral_norm(&r.d_minus),
        weyl_holds,
        exact: split.exact,
    })
}

pub fn split(args: &SplitArgs) -> Result<Outcome> {
    let a = load_square(&args.matrix)?;
    let p = inputs::load_partition(&args.partition)?;
    ensure_size(&a, &p)?;
    let wi = weighted(p, args.weights.as_deref())?;
    let r = block_triangularize(&a, &wi, &Phases::Auto)?;
    Ok(Outcome::ok(split_json(&a, &r, args.tol.tol)?))
}

fn digests(entries: &[(&str, Option<&Path>)]) -> Result<BTreeMap<String, InputDigest>> {
    let mut out = BTreeMap::new();
    for (role, path) in entries {
        if let Some(path) = path {
            let digest = InputDigest { path: path.display().to_string(), sha256: inputs::digest(path)? };
            out.insert(role.to_string(), digest);
        }
    }
    Ok(out)
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}

/// Writes `m` as `<dir>/<name>.mtx` and records the file name.
fn emit(dir: &Path, name: &str, m: &CMatrix, outputs: &mut Vec<String>) -> Result<()> {
    let file = format!("{name}.mtx");
    matrix_market::store(&dir.join(&file), m)?;
    outputs.push(file);
    Ok(())
}

#[derive(Serialize)]
struct EigenPair {
    value: report::ComplexJson,
    block: &'static str,
    /// `‖Az − λz‖₂` for the lifted vector `z`.
    residual: f64,
}

/// Eigenvectors of `E` and `F` lifted to `A`'s coordinates. A lifted vector is
/// an eigenvector of `A` when the off-diagonal block below (for `E`) or above
/// (for `F`) vanishes; the residuals report how far each one is from that.
fn lifted_eigenvectors(a: &CMatrix, r: &TriangularizationResult) -> Result<(CMatrix, Vec<EigenPair>)> {
    let n = r.n();
    let k = r.k();
    let mut vectors = CMatrix::zeros(n, n);
    let mut pairs = Vec::with_capacity(n);
    for (block, offset, name) in [(&r.e, 0, "E"), (&r.f, k, "F")] {
        if block.nrows() == 0 {
            continue;
        }
        let (values, vecs) = linalg::eigen_decomposition(block)?;
        for (j, &lambda) in values.iter().enumerate() {
            let mut z_hat = vec![C64::new(0.0, 0.0); n];
            for i in 0..block.nrows() {
                z_hat[offset + i] = vecs[(i, j)];
            }
            let z = recover_eigenvector(r, &z_hat)?;
            let residual = (a * &z - &z * lambda).norm();
            vectors.set_column(offset + j, &z);
            pairs.push(EigenPair { value: report::complex(lambda), block: name, residual });
        }
    }
    Ok((vectors, pairs))
}

pub fn transform(args: &TransformArgs, command: Vec<String>) -> Result<Outcome> {
    let start = Instant::now();
    let a = load_square(&args.matrix)?;
    let p = inputs::load_partition(&args.partition)?;
    ensure_size(&a, &p)?;
    let wi = weighted(p.clone(), args.weights.as_deref())?;
    let phases_path = (args.phases != "auto").then(|| PathBuf::from(&args.phases));
    let phases = match &phases_path {
        None => Phases::Auto,
        Some(path) => Phases::Explicit(inputs::load_phases(path)?),
    };
    let emits: std::collections::BTreeSet<Emit> = args.emit.iter().copied().collect();
    if !emits.is_empty() && args.out_dir.is_none() {
        return Err(CliError::input("--emit requires --out-dir"));
    }

    let r = block_triangularize(&a, &wi, &phases)?;
    ensure_finite(&r.assembled(), "the transformed matrix")?;
    let (front, rear) = deviation_matrices(&a, &wi)?;
    let quotients = args
        .quotients
        .iter()
        .map(|&alpha| {
            let q = generalized_quotient(&a, &wi, alpha)?;
            Ok(QuotientJson { alpha, entries: report::matrix(&q.entries) })
        })
        .collect::<Result<Vec<_>>>()?;
    let spectrum = split_json(&a, &r, args.tol.tol)?;

    let mut outputs = Vec::new();
    let mut details = None;
    if let Some(dir) = &args.out_dir {
        prepare_out_dir(dir)?;
        for e in &emits {
            match e {
                Emit::E => emit(dir, "E", &r.e, &mut outputs)?,
                Emit::F => emit(dir, "F", &r.f, &mut outputs)?,
                Emit::D => {
                    emit(dir, "D_minus", &r.d_minus, &mut outputs)?;
                    emit(dir, "D_plus_conj", &r.d_plus_conj, &mut outputs)?;
                }
                Emit::Full => emit(dir, "A_hat", &r.assembled(), &mut outputs)?,
                Emit::Eigvecs => {
                    let (vectors, pairs) = lifted_eigenvectors(&a, &r)?;
                    emit(dir, "eigvecs", &vectors, &mut outputs)?;
                    details = Some(json!({ "eigenpairs": pairs }));
                }
            }
        }
    }

    let inputs = digests(&[
        ("matrix", Some(&args.matrix)),
        ("partition", Some(&args.partition)),
        ("weights", args.weights.as_deref()),
        ("phases", phases_path.as_deref()),
    ])?;
    let report = RunReport {
        command,
        inputs,
        partition: Some(PartitionFile::from_partition(&p)),
        quotients,
        deviation: Some(DeviationJson { front: deviation_report(&front), rear: deviation_report(&rear) }),
        spectrum: Some(spectrum),
        details,
        outputs,
        timing: Timing { elapsed_seconds: start.elapsed().as_secs_f64() },
    };
    Ok(Outcome::ok(report))
}

pub fn rect(args: &RectArgs, command: Vec<String>) -> Result<Outcome> {
    let start = Instant::now();
    let a = load_matrix(&args.matrix)?;
    let s = inputs::load_structure(&args.structure)?;
    let wm = inputs::block_diagonal(&load_matrix(&args.wminus)?, &s.left.m_sizes, &s.left.q_sizes, "W-")?;
    let wp = inputs::block_diagonal(&load_matrix(&args.wplus)?, &s.right.n_sizes, &s.right.r_sizes, "W+")?;
    if a.nrows() != wm.nrows() || a.ncols() != wp.nrows() {
        return Err(CliError::input(format!(
            "matrix is {}x{}, structure covers {} rows and {} columns",
            a.nrows(),
            a.ncols(),
            wm.nrows(),
            wp.nrows()
        )));
    }
    let left = block_svd(&wm)?;
    let right = block_svd(&wp)?;
    let res = rect_transform(&a, &left, &right)?;
    ensure_finite(&res.assembled(), "the transformed matrix")?;
    let (t_minus, t_plus) = deviation_rect(&a, &wm, &wp)?;
    let e0 = rayleigh_quotient_rect(&a, &wm, &wp)?;

    prepare_out_dir(&args.out_dir)?;
    let mut outputs = Vec::new();
    emit(&args.out_dir, "E", &res.e, &mut outputs)?;
    emit(&args.out_dir, "D_minus", &res.d_minus, &mut outputs)?;
    emit(&args.out_dir, "D_plus_conj", &res.d_plus_conj, &mut outputs)?;
    emit(&args.out_dir, "F", &res.f, &mut outputs)?;

    let d_scale = args.tol.tol * a.norm();
    let details = json!({
        "singular_values": {
            "A": linalg::singular_values(&a),
            "A_hat": linalg::singular_values(&res.assembled()),
            "E": linalg::singular_values(&res.e),
            "F": linalg::singular_values(&res.f),
        },
        "gaps": {
            "A_hat_vs_A": singular_value_gap(&res.assembled(), &a),
            "D_minus_vs_T_minus": singular_value_gap(&res.d_minus, &t_minus),
            "D_plus_vs_T_plus": singular_value_gap(&res.d_plus(), &t_plus),
            "E_vs_E0": singular_value_gap(&res.e, &e0),
        },
        "deviation": {
            "d_minus_frobenius": res.d_minus.norm(),
            "d_plus_frobenius": res.d_plus_conj.norm(),
            "exact": res.d_minus.norm().min(res.d_plus_conj.norm()) <= d_scale,
        },
        "structure": s,
    });
    let inputs = digests(&[
        ("matrix", Some(&args.matrix)),
        ("structure", Some(&args.structure)),
        ("wminus", Some(&args.wminus)),
        ("wplus", Some(&args.wplus)),
    ])?;
    let report = RunReport {
        command,
        inputs,
        partition: None,
        quotients: Vec::new(),
        deviation: None,
        spectrum: None,
        details: Some(details),
        outputs,
        timing: Timing { elapsed_seconds: start.elapsed().as_secs_f64() },
    };
    Ok(Outcome::ok(report))
}
