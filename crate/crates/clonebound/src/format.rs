//! Task input files and report serialization.
//!
//! Input is a family plus copy counts:
//!
//! ```json
//! {"n": 2, "priors": [0.5, 0.5],
//!  "gram": [[{"re": 1, "im": 0}, {"re": 0.5, "im": 0}],
//!           [{"re": 0.5, "im": 0}, {"re": 1, "im": 0}]],
//!  "M": 1, "N": 2}
//! ```
//!
//! or `"vectors": [[{"re": …, "im": …}, …], …]` in place of `"gram"`.
//! `"N"` is an integer or the string `"inf"`.
//!
//! Reports are written with 17 significant digits per float.

use std::io;

use clonebound_core::bounds::{
    BoundReport, CopyCount, EstimationReport, LambdaDiagnostic, SignPattern,
};
use clonebound_core::numerics::{Mat, C64};
use clonebound_core::oracle::OracleResult;
use clonebound_core::states::{family_from_gram, family_from_vectors, PureStateFamily};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Complex number as `{"re": …, "im": …}`; `im` defaults to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(m: &Mat) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|&z| z.into()).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<Mat, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Input("matrix rows have different lengths".into()));
    }
    let data = rows.iter().flatten().map(|&z| C64::from(z)).collect();
    Mat::from_row_major(r, c, data).map_err(|e| CliError::Input(e.to_string()))
}

/// `N` in an input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CopiesField {
    Finite(u32),
    Text(String),
}

impl CopiesField {
    pub fn to_count(&self) -> Result<CopyCount, CliError> {
        match self {
            Self::Finite(n) => Ok(CopyCount::Finite(*n)),
            Self::Text(t) if t == "inf" => Ok(CopyCount::Infinite),
            Self::Text(t) => Err(CliError::Input(format!(
                "N must be an integer or \"inf\", found {t:?}"
            ))),
        }
    }

    pub fn from_count(c: CopyCount) -> Self {
        match c {
            CopyCount::Finite(n) => Self::Finite(n),
            CopyCount::Infinite => Self::Text("inf".into()),
        }
    }
}

/// Family and task input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub priors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<JsonComplex>>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m_copies: Option<u32>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_copies: Option<CopiesField>,
}

impl TaskFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("cannot parse input: {e}")))
    }

    /// Builds and validates the family.
    pub fn family(&self) -> Result<PureStateFamily, CliError> {
        let family = match (&self.gram, &self.vectors) {
            (Some(_), Some(_)) => {
                return Err(CliError::Input(
                    "give either \"gram\" or \"vectors\", not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Input(
                    "input needs \"gram\" or \"vectors\"".into(),
                ))
            }
            (Some(g), None) => family_from_gram(matrix_from_json(g)?, self.priors.clone())?,
            (None, Some(v)) => {
                let vectors = v
                    .iter()
                    .map(|row| row.iter().map(|&z| z.into()).collect())
                    .collect();
                family_from_vectors(vectors, self.priors.clone())?
            }
        };
        if let Some(n) = self.n {
            if n != family.n() {
                return Err(CliError::Input(format!(
                    "\"n\" is {n} but the family has {} states",
                    family.n()
                )));
            }
        }
        Ok(family)
    }

    pub fn from_family(family: &PureStateFamily, m: Option<u32>, n: Option<CopyCount>) -> Self {
        let (gram, vectors) = match family.vectors() {
            Some(v) => (
                None,
                Some(
                    v.iter()
                        .map(|row| row.iter().map(|&z| z.into()).collect())
                        .collect(),
                ),
            ),
            None => (Some(matrix_to_json(family.gram())), None),
        };
        Self {
            n: Some(family.n()),
            priors: family.priors().to_vec(),
            gram,
            vectors,
            m_copies: m,
            n_copies: n.map(CopiesField::from_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: Vec<i8>,
    pub trace_norm: f64,
    pub feasible: bool,
}

fn diagnostics_json(d: &[LambdaDiagnostic]) -> Vec<LambdaRow> {
    d.iter()
        .map(|row| LambdaRow {
            lambda: row.lambda.as_slice().to_vec(),
            trace_norm: row.trace_norm,
            feasible: row.feasible,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleJson {
    pub f_opt_numeric: f64,
    pub restarts_used: usize,
    pub converged: bool,
    pub best_restart_index: usize,
    pub seed: u64,
    pub v_best: JsonMatrix,
}

impl OracleJson {
    pub fn new(r: &OracleResult, seed: u64) -> Self {
        Self {
            f_opt_numeric: r.f_opt_numeric,
            restarts_used: r.restarts_used,
            converged: r.converged,
            best_restart_index: r.best_restart_index,
            seed,
            v_best: matrix_to_json(&r.v_best),
        }
    }
}

/// Serialized [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundJson {
    #[serde(rename = "M")]
    pub m_copies: u32,
    #[serde(rename = "N")]
    pub n_copies: u32,
    pub fprime_opt: f64,
    pub fidelity_lower_bound: f64,
    pub lambda: Vec<i8>,
    pub feasible: bool,
    pub coefficients: JsonMatrix,
    pub v_opt: JsonMatrix,
    pub rank_m: usize,
    pub rank_n: usize,
    pub output_gram_residual: f64,
    pub diagnostics: Vec<LambdaRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleJson>,
}

impl BoundJson {
    pub fn new(r: &BoundReport, m: u32, n: u32, output_gram_residual: f64) -> Self {
        Self {
            m_copies: m,
            n_copies: n,
            fprime_opt: r.fprime_opt,
            fidelity_lower_bound: r.fidelity_lower_bound,
            lambda: r.lambda_chosen.as_slice().to_vec(),
            feasible: r.feasible,
            coefficients: matrix_to_json(&r.coeffs),
            v_opt: matrix_to_json(&r.v_opt),
            rank_m: r.rank_m,
            rank_n: r.rank_n,
            output_gram_residual,
            diagnostics: diagnostics_json(&r.diagnostics),
            oracle: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.lambda.len();
        check_unit_interval("fprime_opt", self.fprime_opt)?;
        check_unit_interval("fidelity_lower_bound", self.fidelity_lower_bound)?;
        check_signs(&self.lambda)?;
        check_square("coefficients", &self.coefficients, n)?;
        if self.n_copies < self.m_copies {
            return Err(CliError::Input("N must be at least M".into()));
        }
        if let Some(o) = &self.oracle {
            check_unit_interval("f_opt_numeric", o.f_opt_numeric)?;
        }
        Ok(())
    }
}

/// Serialized [`EstimationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationJson {
    #[serde(rename = "M")]
    pub m_copies: u32,
    #[serde(rename = "N")]
    pub n_copies: CopiesField,
    pub p_lower_bound: f64,
    pub fprime_opt: f64,
    pub lambda: Vec<i8>,
    pub feasible: bool,
    pub correct_probs: Vec<f64>,
    pub achieved_p: f64,
    pub e_matrix: JsonMatrix,
    pub e_residual: f64,
    pub coefficients: JsonMatrix,
    pub diagnostics: Vec<LambdaRow>,
}

impl EstimationJson {
    pub fn new(r: &EstimationReport, m: u32) -> Self {
        Self {
            m_copies: m,
            n_copies: CopiesField::from_count(CopyCount::Infinite),
            p_lower_bound: r.p_lower_bound,
            fprime_opt: r.fprime_opt,
            lambda: r.lambda_chosen.as_slice().to_vec(),
            feasible: r.feasible,
            correct_probs: r.correct_probs.clone(),
            achieved_p: r.achieved_p,
            e_matrix: matrix_to_json(&r.e_mat),
            e_residual: r.e_residual(),
            coefficients: matrix_to_json(&r.coeffs),
            diagnostics: diagnostics_json(&r.diagnostics),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.lambda.len();
        check_unit_interval("p_lower_bound", self.p_lower_bound)?;
        check_unit_interval("fprime_opt", self.fprime_opt)?;
        check_signs(&self.lambda)?;
        if self.correct_probs.len() != n {
            return Err(CliError::Input(
                "correct_probs length does not match lambda".into(),
            ));
        }
        for &p in &self.correct_probs {
            check_unit_interval("correct_probs", p)?;
        }
        check_square("e_matrix", &self.e_matrix, n)?;
        check_square("coefficients", &self.coefficients, n)?;
        Ok(())
    }
}

/// Serialized oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReportJson {
    #[serde(rename = "M")]
    pub m_copies: u32,
    #[serde(rename = "N")]
    pub n_copies: u32,
    pub fidelity_lower_bound: f64,
    pub fprime_opt: f64,
    pub oracle: OracleJson,
}

impl OracleReportJson {
    pub fn validate(&self) -> Result<(), CliError> {
        check_unit_interval("fidelity_lower_bound", self.fidelity_lower_bound)?;
        check_unit_interval("f_opt_numeric", self.oracle.f_opt_numeric)?;
        Ok(())
    }
}

/// Serialized tensor-power check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJson {
    #[serde(rename = "M")]
    pub m_copies: u32,
    pub dimension: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

fn check_unit_interval(name: &str, x: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CliError::Input(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_signs(lambda: &[i8]) -> Result<(), CliError> {
    if SignPattern::new(lambda.to_vec()).is_none() {
        return Err(CliError::Input(format!("invalid sign pattern {lambda:?}")));
    }
    Ok(())
}

fn check_square(name: &str, m: &JsonMatrix, n: usize) -> Result<(), CliError> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(CliError::Input(format!("{name} is not {n}x{n}")));
    }
    Ok(())
}

/// `serde_json` formatter writing every float with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        writer.write_all(significant(value, 17).as_bytes())
    }
}

/// Pretty JSON with 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PrettySignificant::default());
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Pretty printer that delegates float formatting to [`SignificantDigits`].
#[derive(Default)]
struct PrettySignificant {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()>
            where
                W: ?Sized + io::Write,
            {
                self.pretty.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for PrettySignificant {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        SignificantDigits.write_f64(writer, value)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// `value` rounded to `digits` significant digits, positional when the
/// decimal exponent is in `[-5, digits)`, scientific otherwise.
pub fn significant(value: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if value == 0.0 {
        return if value.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    if !value.is_finite() {
        // JSON has no representation; reports never contain these.
        return "null".into();
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(1) as usize;
        format!("{value:.decimals$}")
    } else {
        sci
    }
}
