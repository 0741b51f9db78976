//! One handler per subcommand.
//!
//! Every handler returns the fully resolved config (defaults included)
//! plus either a payload or a classified failure, so the caller can wrap
//! both success and error in the same envelope.  Handlers never print.

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;
use num_traits::{ToPrimitive, Zero};
use serde_json::Value;

use phaselab::moduli::{self, BlockKind, ComplexStructure, OrthogonalMap, RSBlocks};
use phaselab::qseries::{self, QSeries, ThetaKind};
use phaselab::{fock_boson, fock_fermion, matrix_model};

use crate::emit::{
    complex_matrix_json, csv17, num17, obj, quarter_exponent_string, rational_string,
    real_matrix_json,
};

/// What a handler produced on success.
pub enum Payload {
    Json(Value),
    Csv(String),
}

/// What a handler produced on failure; `classify` maps this to an exit
/// code and error kind.
pub enum Failure {
    /// Bad command-line input (unparseable matrix, missing seed, ...).
    Usage(String),
    /// A requested tolerance was exceeded; carries the residual.
    Validation { message: String, residual: f64 },
    /// An error surfaced from the library.
    Core(phaselab::Error),
}

impl From<phaselab::Error> for Failure {
    fn from(e: phaselab::Error) -> Self {
        Failure::Core(e)
    }
}

/// (exit code, error kind, residual if one is available).
pub fn classify(f: &Failure) -> (i32, &'static str, Option<f64>) {
    use phaselab::Error as E;
    match f {
        Failure::Usage(_) => (2, "invalid-arguments", None),
        Failure::Validation { residual, .. } => (4, "numerical-validation", Some(*residual)),
        Failure::Core(e) => match e {
            E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::Structural(_) => {
                (2, "invalid-arguments", None)
            }
            E::ResourceBudget { .. } => (3, "resource-budget", None),
            E::InvariantViolation { residual, .. } => {
                (4, "numerical-validation", Some(*residual))
            }
            E::CutoffTooSmall { leakage, .. } => (4, "numerical-validation", Some(*leakage)),
            E::Singular { condition, .. } => (4, "numerical-validation", Some(*condition)),
            E::DegenerateKernel { dim } => (4, "numerical-validation", Some(*dim as f64)),
            E::NonFinite { .. } => (4, "numerical-validation", None),
        },
    }
}

pub fn failure_message(f: &Failure) -> String {
    match f {
        Failure::Usage(m) => m.clone(),
        Failure::Validation { message, .. } => message.clone(),
        Failure::Core(e) => e.to_string(),
    }
}

pub type CmdResult = Result<Payload, Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SampleKind {
    Orthogonal,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MmInit {
    /// Positions and velocities drawn at the same Frobenius scale.
    Bounded,
    /// Velocity scale matched to the potential so orbits stay bounded.
    Confined,
}

fn kind_name(k: SampleKind) -> &'static str {
    match k {
        SampleKind::Orthogonal => "orthogonal",
        SampleKind::Unitary => "unitary",
    }
}

fn format_name(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    }
}

fn init_name(i: MmInit) -> &'static str {
    match i {
        MmInit::Bounded => "bounded",
        MmInit::Confined => "confined",
    }
}

fn int(n: u64) -> Value {
    Value::from(n)
}

fn big_int(n: u128) -> Value {
    let parsed: serde_json::Number =
        serde_json::from_str(&n.to_string()).expect("decimal integer parses");
    Value::Number(parsed)
}

fn opt<T, F: FnOnce(T) -> Value>(v: Option<T>, f: F) -> Value {
    v.map(f).unwrap_or(Value::Null)
}

// ---------------------------------------------------------------------
// input parsing

/// Matrix-like arguments are inline JSON if they start with a bracket,
/// otherwise a path to a JSON file.
fn resolve_source(src: &str) -> Result<Value, Failure> {
    let trimmed = src.trim_start();
    let text = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        src.to_owned()
    } else {
        std::fs::read_to_string(src)
            .map_err(|e| Failure::Usage(format!("cannot read {src}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid JSON input: {e}")))
}

fn parse_real_matrix(v: &Value, dim: usize) -> Result<Array2<f64>, Failure> {
    let rows = v
        .as_array()
        .ok_or_else(|| Failure::Usage("matrix must be a JSON array of rows".into()))?;
    if rows.len() != dim {
        return Err(Failure::Usage(format!(
            "matrix must be {dim}x{dim}, got {} rows",
            rows.len()
        )));
    }
    let mut flat = Vec::with_capacity(dim * dim);
    for row in rows {
        let entries = row
            .as_array()
            .ok_or_else(|| Failure::Usage("matrix rows must be JSON arrays".into()))?;
        if entries.len() != dim {
            return Err(Failure::Usage(format!(
                "matrix must be {dim}x{dim}, got a row of length {}",
                entries.len()
            )));
        }
        for e in entries {
            flat.push(
                e.as_f64()
                    .ok_or_else(|| Failure::Usage("real matrix entries must be numbers".into()))?,
            );
        }
    }
    Array2::from_shape_vec((dim, dim), flat)
        .map_err(|e| Failure::Usage(format!("matrix shape error: {e}")))
}

/// A complex entry is a bare number (imaginary part zero) or `[re, im]`.
fn parse_complex_entry(v: &Value) -> Result<C64, Failure> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            if let (Some(re), Some(im)) = (pair[0].as_f64(), pair[1].as_f64()) {
                return Ok(C64::new(re, im));
            }
        }
    }
    Err(Failure::Usage(
        "complex entries must be a number or [re, im]".into(),
    ))
}

fn parse_complex_matrix(v: &Value) -> Result<Array2<C64>, Failure> {
    let rows = v
        .as_array()
        .ok_or_else(|| Failure::Usage("matrix must be a JSON array of rows".into()))?;
    let nrows = rows.len();
    let ncols = rows
        .first()
        .and_then(|r| r.as_array())
        .map(|r| r.len())
        .ok_or_else(|| Failure::Usage("matrix rows must be nonempty JSON arrays".into()))?;
    let mut flat = Vec::with_capacity(nrows * ncols);
    for row in rows {
        let entries = row
            .as_array()
            .ok_or_else(|| Failure::Usage("matrix rows must be JSON arrays".into()))?;
        if entries.len() != ncols {
            return Err(Failure::Usage("matrix rows have unequal lengths".into()));
        }
        for e in entries {
            flat.push(parse_complex_entry(e)?);
        }
    }
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Failure::Usage(format!("matrix shape error: {e}")))
}

fn parse_complex_vector(v: &Value, len: usize) -> Result<Vec<C64>, Failure> {
    let entries = v
        .as_array()
        .ok_or_else(|| Failure::Usage("expected a JSON array".into()))?;
    if entries.len() != len {
        return Err(Failure::Usage(format!(
            "expected {len} entries, got {}",
            entries.len()
        )));
    }
    entries.iter().map(parse_complex_entry).collect()
}

// ---------------------------------------------------------------------
// moduli

pub fn moduli_sample(n: usize, seed: u64, kind: SampleKind) -> (Value, CmdResult) {
    let config = obj(vec![
        ("n", int(n as u64)),
        ("seed", int(seed)),
        ("kind", Value::String(kind_name(kind).into())),
    ]);
    let run = || -> CmdResult {
        let o = match kind {
            SampleKind::Orthogonal => moduli::random_orthogonal(n, seed)?,
            SampleKind::Unitary => moduli::embed_unitary(&moduli::random_unitary(n, seed)?),
        };
        let j = moduli::pushforward(&o, &ComplexStructure::reference(n))?;
        let rs = moduli::extract_rs(&o)?;
        let res = rs.residuals();
        Ok(Payload::Json(obj(vec![
            ("orthogonal", real_matrix_json(o.matrix())),
            ("structure", real_matrix_json(j.matrix())),
            ("s_max_norm", num17(rs.s_max_norm())),
            ("residual_derived", num17(res.derived)),
            ("residual_textbook", num17(res.textbook)),
        ])))
    };
    (config, run())
}

pub fn moduli_check_cr(n: usize, matrix_src: &str, tol: f64) -> (Value, CmdResult) {
    let parsed = resolve_source(matrix_src).and_then(|v| parse_real_matrix(&v, 2 * n));
    let config = obj(vec![
        ("n", int(n as u64)),
        (
            "matrix",
            parsed
                .as_ref()
                .map(real_matrix_json)
                .unwrap_or(Value::String(matrix_src.into())),
        ),
        ("tol", num17(tol)),
    ]);
    let run = || -> CmdResult {
        let o = OrthogonalMap::new(parsed?)?;
        let rs = moduli::extract_rs(&o)?;
        let s_norm = rs.s_max_norm();
        Ok(Payload::Json(obj(vec![
            ("holomorphic", Value::Bool(s_norm <= tol)),
            ("s_norm", num17(s_norm)),
        ])))
    };
    (config, run())
}

pub fn moduli_rs_residuals(
    n: usize,
    matrix_src: Option<&str>,
    seed: Option<u64>,
) -> (Value, CmdResult) {
    let parsed = matrix_src.map(|src| resolve_source(src).and_then(|v| parse_real_matrix(&v, 2 * n)));
    let config = obj(vec![
        ("n", int(n as u64)),
        (
            "matrix",
            match (&parsed, matrix_src) {
                (Some(Ok(m)), _) => real_matrix_json(m),
                (Some(Err(_)), Some(src)) => Value::String(src.into()),
                _ => Value::Null,
            },
        ),
        ("seed", opt(seed, int)),
    ]);
    let run = || -> CmdResult {
        let o = match (parsed, seed) {
            (Some(m), None) => OrthogonalMap::new(m?)?,
            (None, Some(s)) => moduli::random_orthogonal(n, s)?,
            _ => {
                return Err(Failure::Usage(
                    "provide exactly one of --matrix or --seed".into(),
                ))
            }
        };
        let rs = moduli::extract_rs(&o)?;
        let res = rs.residuals();
        Ok(Payload::Json(obj(vec![
            ("r", complex_matrix_json(rs.r())),
            ("s", complex_matrix_json(rs.s())),
            ("s_max_norm", num17(rs.s_max_norm())),
            ("residual_derived", num17(res.derived)),
            ("residual_textbook", num17(res.textbook)),
        ])))
    };
    (config, run())
}

// ---------------------------------------------------------------------
// fock (bosonic)

pub fn fock_coherent(modes: usize, cutoff: usize, z_src: &str, budget: u128) -> (Value, CmdResult) {
    let parsed = resolve_source(z_src).and_then(|v| parse_complex_vector(&v, modes));
    let config = obj(vec![
        ("modes", int(modes as u64)),
        ("cutoff", int(cutoff as u64)),
        (
            "z",
            parsed
                .as_ref()
                .map(|zs| {
                    Value::Array(
                        zs.iter()
                            .map(|z| Value::Array(vec![num17(z.re), num17(z.im)]))
                            .collect(),
                    )
                })
                .unwrap_or(Value::String(z_src.into())),
        ),
        ("budget_bytes", big_int(budget)),
    ]);
    let run = || -> CmdResult {
        let z = parsed?;
        let fock = fock_boson::build_fock_with_budget(modes, cutoff, budget)?;
        let state = fock_boson::coherent_state(&fock, &z)?;
        let measured: Vec<Value> = (0..modes)
            .map(|j| num17(fock_boson::coherent_eigen_residual(&state, j, z[j])))
            .collect();
        let closed: Vec<Value> = z
            .iter()
            .map(|&zj| num17(fock_boson::coherent_cutoff_residual(zj, cutoff)))
            .collect();
        Ok(Payload::Json(obj(vec![
            ("dim", int(fock.dim() as u64)),
            ("norm", num17(state.norm())),
            ("eigen_residuals", Value::Array(measured)),
            ("cutoff_residuals", Value::Array(closed)),
        ])))
    };
    (config, run())
}

#[allow(clippy::too_many_arguments)]
pub fn fock_resolution(
    modes: usize,
    cutoff: usize,
    radial: usize,
    angular: usize,
    k_max: usize,
    tol: Option<f64>,
    budget: u128,
) -> (Value, CmdResult) {
    let config = obj(vec![
        ("modes", int(modes as u64)),
        ("cutoff", int(cutoff as u64)),
        ("radial", int(radial as u64)),
        ("angular", int(angular as u64)),
        ("k_max", int(k_max as u64)),
        ("tol", opt(tol, num17)),
        ("budget_bytes", big_int(budget)),
    ]);
    let run = || -> CmdResult {
        let fock = fock_boson::build_fock_with_budget(modes, cutoff, budget)?;
        let rule = fock_boson::QuadratureRule::gauss_laguerre(radial, angular)?;
        let deviation = fock_boson::resolution_check(&fock, &rule, k_max)?;
        if let Some(t) = tol {
            if deviation > t {
                return Err(Failure::Validation {
                    message: format!(
                        "resolution-of-identity deviation {deviation:.3e} exceeds tolerance {t:.3e}"
                    ),
                    residual: deviation,
                });
            }
        }
        Ok(Payload::Json(obj(vec![
            ("dim", int(fock.dim() as u64)),
            ("max_deviation", num17(deviation)),
        ])))
    };
    (config, run())
}

pub fn fock_squeeze(r: f64, cutoff: usize, budget: u128) -> (Value, CmdResult) {
    let config = obj(vec![
        ("r", num17(r)),
        ("cutoff", int(cutoff as u64)),
        ("budget_bytes", big_int(budget)),
    ]);
    let run = || -> CmdResult {
        let blocks = RSBlocks::new(
            array![[C64::new(r.cosh(), 0.0)]],
            array![[C64::new(r.sinh(), 0.0)]],
            BlockKind::Symplectic,
        )?;
        let fock = fock_boson::build_fock_with_budget(1, cutoff, budget)?;
        let vac = fock_boson::bogoliubov_vacuum(&fock, &blocks)?;
        let predicted = r.sinh().powi(2);
        Ok(Payload::Json(obj(vec![
            ("mean_old_quanta", num17(vac.mean_old_quanta)),
            ("predicted_mean", num17(predicted)),
            ("mean_error", num17((vac.mean_old_quanta - predicted).abs())),
            ("b_residual", num17(vac.b_residual)),
            ("ccr_residual", num17(vac.ccr_residual)),
            ("top_weight", num17(vac.top_weight)),
        ])))
    };
    (config, run())
}

// ---------------------------------------------------------------------
// fermion

fn fermion_setup(
    n: usize,
    seed: u64,
    budget: u128,
) -> Result<(fock_fermion::FermionFock, RSBlocks), Failure> {
    let fock = fock_fermion::build_fermion_fock_with_budget(n, budget)?;
    let o = moduli::random_orthogonal(n, seed)?;
    Ok((fock, moduli::extract_rs(&o)?))
}

pub fn fermion_vacuum(n: usize, seed: u64, budget: u128) -> (Value, CmdResult) {
    let config = obj(vec![
        ("n", int(n as u64)),
        ("seed", int(seed)),
        ("budget_bytes", big_int(budget)),
    ]);
    let run = || -> CmdResult {
        let (fock, rs) = fermion_setup(n, seed, budget)?;
        let vac = fock_fermion::fermion_bogoliubov_vacuum(&fock, &rs)?;
        // Trace rule: <N> = tr(S S†) = ‖S‖_F².
        let predicted: f64 = rs.s().iter().map(|z| z.norm_sqr()).sum();
        Ok(Payload::Json(obj(vec![
            ("dim", int(fock.dim() as u64)),
            ("car_residual", num17(vac.car_residual)),
            ("b_residual", num17(vac.b_residual)),
            ("mean_old_quanta", num17(vac.mean_old_quanta)),
            ("predicted_mean", num17(predicted)),
            ("odd_parity_weight", num17(vac.state.odd_parity_weight())),
        ])))
    };
    (config, run())
}

pub fn fermion_crosscheck(n: usize, seed: u64, budget: u128) -> (Value, CmdResult) {
    let config = obj(vec![
        ("n", int(n as u64)),
        ("seed", int(seed)),
        ("budget_bytes", big_int(budget)),
    ]);
    let run = || -> CmdResult {
        let (fock, rs) = fermion_setup(n, seed, budget)?;
        let out = match fock_fermion::thouless_crosscheck(&fock, &rs)? {
            fock_boson::PairingCrosscheck::Checked {
                overlap_error,
                r_condition,
            } => obj(vec![
                ("checked", Value::Bool(true)),
                ("overlap_error", num17(overlap_error)),
                ("r_condition", num17(r_condition)),
            ]),
            fock_boson::PairingCrosscheck::SkippedSingularR { r_condition } => obj(vec![
                ("checked", Value::Bool(false)),
                ("r_condition", num17(r_condition)),
            ]),
        };
        Ok(Payload::Json(out))
    };
    (config, run())
}

// ---------------------------------------------------------------------
// series

fn series_payload(series: &QSeries, format: OutputFormat) -> Payload {
    match format {
        OutputFormat::Json => {
            let coeffs: Vec<Value> = series
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(exp4, c)| {
                    obj(vec![
                        (
                            "exponent",
                            Value::String(quarter_exponent_string(exp4)),
                        ),
                        ("numerator", Value::String(c.numer().to_string())),
                        ("denominator", Value::String(c.denom().to_string())),
                    ])
                })
                .collect();
            Payload::Json(obj(vec![("coefficients", Value::Array(coeffs))]))
        }
        OutputFormat::Csv => {
            let mut text = String::from("exponent,numerator,denominator\n");
            for (exp4, c) in series.iter().filter(|(_, c)| !c.is_zero()) {
                text.push_str(&format!(
                    "{},{},{}\n",
                    quarter_exponent_string(exp4),
                    c.numer(),
                    c.denom()
                ));
            }
            Payload::Csv(text)
        }
    }
}

pub fn series_poincare(order: u32, format: OutputFormat) -> (Value, CmdResult) {
    let config = obj(vec![
        ("order", int(order as u64)),
        ("format", Value::String(format_name(format).into())),
    ]);
    let series = qseries::poincare_series(order);
    (config, Ok(series_payload(&series, format)))
}

pub fn series_theta(which: u8, order: u32, format: OutputFormat) -> (Value, CmdResult) {
    let config = obj(vec![
        ("which", int(which as u64)),
        ("order", int(order as u64)),
        ("format", Value::String(format_name(format).into())),
    ]);
    let kind = match which {
        2 => ThetaKind::Two,
        3 => ThetaKind::Three,
        _ => ThetaKind::Four,
    };
    let series = qseries::theta_series(kind, order);
    (config, Ok(series_payload(&series, format)))
}

pub fn series_verify(order: u32) -> (Value, CmdResult) {
    let config = obj(vec![("order", int(order as u64))]);
    let diff = qseries::verify_theta_identity(order);
    let result = if diff.is_zero() {
        Ok(Payload::Json(obj(vec![(
            "max_coeff_diff",
            Value::String("0".into()),
        )])))
    } else {
        Err(Failure::Validation {
            message: format!(
                "theta identity fails: max coefficient difference {}",
                rational_string(&diff)
            ),
            residual: diff.to_f64().unwrap_or(f64::INFINITY),
        })
    };
    (config, result)
}

// ---------------------------------------------------------------------
// matrix model

fn mm_config_json(cfg: &matrix_model::MatrixConfig) -> Value {
    let xs: Vec<Value> = (0..matrix_model::NUM_DIRECTIONS)
        .map(|mu| complex_matrix_json(cfg.x(mu)))
        .collect();
    let vs: Vec<Value> = (0..matrix_model::NUM_DIRECTIONS)
        .map(|mu| complex_matrix_json(cfg.v(mu)))
        .collect();
    obj(vec![
        ("r11", num17(cfg.r11())),
        ("x", Value::Array(xs)),
        ("v", Value::Array(vs)),
    ])
}

fn parse_mm_config(v: &Value, default_r11: f64) -> Result<matrix_model::MatrixConfig, Failure> {
    let map = v
        .as_object()
        .ok_or_else(|| Failure::Usage("config must be a JSON object with x and v".into()))?;
    let r11 = match map.get("r11") {
        Some(x) => x
            .as_f64()
            .ok_or_else(|| Failure::Usage("r11 must be a number".into()))?,
        None => default_r11,
    };
    let grab = |key: &str| -> Result<Vec<Array2<C64>>, Failure> {
        map.get(key)
            .and_then(|x| x.as_array())
            .ok_or_else(|| Failure::Usage(format!("config needs a JSON array under {key:?}")))?
            .iter()
            .map(parse_complex_matrix)
            .collect()
    };
    Ok(matrix_model::MatrixConfig::new(r11, grab("x")?, grab("v")?)?)
}

struct MmSource<'a> {
    n_size: Option<usize>,
    r11: f64,
    seed: Option<u64>,
    scale: f64,
    init: MmInit,
    config_src: Option<&'a str>,
}

impl MmSource<'_> {
    /// Resolved-config fields shared by `mm evolve` and `mm energy`.
    fn echo(&self, parsed: &Option<Result<matrix_model::MatrixConfig, Failure>>) -> Vec<(&str, Value)> {
        vec![
            ("n_size", opt(self.n_size, |n| int(n as u64))),
            ("r11", num17(self.r11)),
            ("seed", opt(self.seed, int)),
            ("scale", num17(self.scale)),
            ("init", Value::String(init_name(self.init).into())),
            (
                "config",
                match (parsed, self.config_src) {
                    (Some(Ok(cfg)), _) => mm_config_json(cfg),
                    (Some(Err(_)), Some(src)) => Value::String(src.into()),
                    _ => Value::Null,
                },
            ),
        ]
    }

    fn build(
        &self,
        parsed: Option<Result<matrix_model::MatrixConfig, Failure>>,
    ) -> Result<matrix_model::MatrixConfig, Failure> {
        match (parsed, self.seed) {
            (Some(_), Some(_)) => Err(Failure::Usage(
                "--config conflicts with --seed; pass one initial-data source".into(),
            )),
            (Some(cfg), None) => {
                let cfg = cfg?;
                if let Some(n) = self.n_size {
                    if n != cfg.n_size() {
                        return Err(Failure::Usage(format!(
                            "--N {n} disagrees with the {}x{} matrices in --config",
                            cfg.n_size(),
                            cfg.n_size()
                        )));
                    }
                }
                Ok(cfg)
            }
            (None, Some(seed)) => {
                let n = self.n_size.ok_or_else(|| {
                    Failure::Usage("--N is required for random initial data".into())
                })?;
                Ok(match self.init {
                    MmInit::Bounded => {
                        matrix_model::MatrixConfig::random_bounded(n, self.r11, seed, self.scale)?
                    }
                    MmInit::Confined => {
                        matrix_model::MatrixConfig::random_confined(n, self.r11, seed, self.scale)?
                    }
                })
            }
            (None, None) => Err(Failure::Usage(
                "random initial data needs --seed (or pass --config)".into(),
            )),
        }
    }
}

fn tr_x_sq(cfg: &matrix_model::MatrixConfig) -> f64 {
    // tr X² = ‖X‖_F² for Hermitian X.
    (0..matrix_model::NUM_DIRECTIONS)
        .map(|mu| cfg.x(mu).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum()
}

#[allow(clippy::too_many_arguments)]
pub fn mm_evolve(
    source: &MmSourceArgs,
    dt: f64,
    steps: usize,
    stride: usize,
    format: OutputFormat,
) -> (Value, CmdResult) {
    let (src, parsed) = source.resolve();
    let mut fields = src.echo(&parsed);
    fields.extend(vec![
        ("dt", num17(dt)),
        ("steps", int(steps as u64)),
        ("stride", int(stride as u64)),
        ("format", Value::String(format_name(format).into())),
    ]);
    let config = obj(fields);
    let run = || -> CmdResult {
        let cfg = src.build(parsed)?;
        let traj = matrix_model::evolve(&cfg, dt, steps, stride)?;
        match format {
            OutputFormat::Csv => {
                let mut text = String::from("step,time,energy,tr_x_sq,gauss_norm\n");
                for s in &traj.samples {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        s.step,
                        csv17(s.time),
                        csv17(s.energy),
                        csv17(s.tr_x_sq),
                        csv17(s.gauss_norm)
                    ));
                }
                Ok(Payload::Csv(text))
            }
            OutputFormat::Json => {
                let first = traj.samples.first().expect("evolve always samples step 0");
                let last = traj.samples.last().expect("evolve always samples the end");
                let e0 = first.energy;
                let drift = if e0.abs() > 0.0 {
                    (last.energy - e0).abs() / e0.abs()
                } else {
                    (last.energy - e0).abs()
                };
                let samples: Vec<Value> = traj
                    .samples
                    .iter()
                    .map(|s| {
                        obj(vec![
                            ("step", int(s.step as u64)),
                            ("time", num17(s.time)),
                            ("energy", num17(s.energy)),
                            ("tr_x_sq", num17(s.tr_x_sq)),
                            ("gauss_norm", num17(s.gauss_norm)),
                        ])
                    })
                    .collect();
                Ok(Payload::Json(obj(vec![
                    ("initial_energy", num17(first.energy)),
                    ("final_energy", num17(last.energy)),
                    ("relative_energy_drift", num17(drift)),
                    ("initial_gauss", num17(first.gauss_norm)),
                    ("final_gauss", num17(last.gauss_norm)),
                    ("samples", Value::Array(samples)),
                    ("final_config", mm_config_json(&traj.final_config)),
                ])))
            }
        }
    };
    (config, run())
}

pub fn mm_energy(source: &MmSourceArgs) -> (Value, CmdResult) {
    let (src, parsed) = source.resolve();
    let config = obj(src.echo(&parsed));
    let run = || -> CmdResult {
        let cfg = src.build(parsed)?;
        Ok(Payload::Json(obj(vec![
            ("energy", num17(matrix_model::energy(&cfg))),
            ("gauss_norm", num17(matrix_model::gauss_constraint(&cfg))),
            ("tr_x_sq", num17(tr_x_sq(&cfg))),
            ("configuration", mm_config_json(&cfg)),
        ])))
    };
    (config, run())
}

/// Owned bundle of the shared `mm` initial-data flags.
pub struct MmSourceArgs {
    pub n_size: Option<usize>,
    pub r11: f64,
    pub seed: Option<u64>,
    pub scale: f64,
    pub init: MmInit,
    pub config: Option<String>,
}

impl MmSourceArgs {
    fn resolve(&self) -> (MmSource<'_>, Option<Result<matrix_model::MatrixConfig, Failure>>) {
        let parsed = self
            .config
            .as_deref()
            .map(|src| resolve_source(src).and_then(|v| parse_mm_config(&v, self.r11)));
        (
            MmSource {
                n_size: self.n_size,
                r11: self.r11,
                seed: self.seed,
                scale: self.scale,
                init: self.init,
                config_src: self.config.as_deref(),
            },
            parsed,
        )
    }
}
