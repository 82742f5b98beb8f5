use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matops::{hermitian_eig_dense, ComplexMatrix};
use crate::pauli::{measure_dense, measure_factor, Measurable, SensingEnsemble};
use crate::scalar::Real;

const FACTOR_FORMAT: &str = "projfgd-factor-v1";

/// Tolerance for Hermiticity, PSD and trace checks on states.
pub const STATE_TOL: f64 = 1e-8;

/// Dense `d × d` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    data: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps a square Hermitian matrix of power-of-two size; the input is symmetrized.
    pub fn new(data: ComplexMatrix<T>) -> Result<Self> {
        if !data.rows().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix size {} is not a power of two",
                data.rows()
            )));
        }
        let data = data.symmetrized_checked()?;
        Ok(Self { data })
    }

    /// Like [`new`](Self::new) and additionally requires PSD with trace at most one.
    pub fn new_state(data: ComplexMatrix<T>) -> Result<Self> {
        let rho = Self::new(data)?;
        rho.check_state()?;
        Ok(rho)
    }

    pub fn from_factor(a: &Factor<T>) -> Self {
        Self {
            data: a.as_matrix().matmul_adjoint(a.as_matrix()).hermitian_part(),
        }
    }

    pub(crate) fn from_hermitian_unchecked(data: ComplexMatrix<T>) -> Self {
        Self { data }
    }

    pub fn check_state(&self) -> Result<()> {
        let eig = hermitian_eig_dense(&self.data)?;
        let tol = T::lit(STATE_TOL);
        if let Some(&min) = eig.eigenvalues.last() {
            if min < -tol {
                return Err(Error::NotPsd(min.as_f64()));
            }
        }
        let tr = self.trace();
        if tr > T::one() + tol {
            return Err(Error::InvalidArgument(format!("trace {tr} exceeds one")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn n_qubits(&self) -> u32 {
        self.dim().trailing_zeros()
    }

    pub fn trace(&self) -> T {
        self.data.trace().re
    }

    pub fn as_matrix(&self) -> &ComplexMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.data
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.frobenius_norm()
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            data: ComplexMatrix::zeros(d, d),
        }
    }
}

/// A `d × r` factor `A` with `ρ = AA†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor<T: Real> {
    data: ComplexMatrix<T>,
}

impl<T: Real> Factor<T> {
    pub fn new(data: ComplexMatrix<T>) -> Result<Self> {
        if data.cols() > data.rows() {
            return Err(Error::RankTooLarge {
                rank: data.cols(),
                dim: data.rows(),
            });
        }
        if !data.is_finite() {
            return Err(Error::NonFinite("factor"));
        }
        Ok(Self { data })
    }

    pub fn zeros(d: usize, r: usize) -> Self {
        Self {
            data: ComplexMatrix::zeros(d, r),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn rank(&self) -> usize {
        self.data.cols()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix<T> {
        &self.data
    }

    pub fn as_matrix_mut(&mut self) -> &mut ComplexMatrix<T> {
        &mut self.data
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.data
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.frobenius_norm()
    }

    /// `Tr(AA†) = ‖A‖_F²`.
    pub fn trace(&self) -> T {
        self.data.frobenius_norm_sq()
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_factor(self)
    }

    /// `‖AA†‖_F = ‖A†A‖_F`.
    pub fn gram_norm(&self) -> T {
        self.data.adjoint_matmul(&self.data).frobenius_norm()
    }
}

impl<T: Real> Measurable<T> for Factor<T> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>> {
        measure_factor(ens, &self.data)
    }
}

impl<T: Real> Measurable<T> for DensityMatrix<T> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>> {
        measure_dense(ens, &self.data)
    }
}

/// Writes a factor as text: header, then one row per line as `re im` pairs.
pub fn write_factor<T: Real, W: Write>(out: &mut W, a: &Factor<T>) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# factor A with rho = A A^dagger, rows of re im pairs");
    let _ = writeln!(s, "format = {FACTOR_FORMAT}");
    let _ = writeln!(s, "d = {}", a.dim());
    let _ = writeln!(s, "r = {}", a.rank());
    let _ = writeln!(s, "data");
    for i in 0..a.dim() {
        let row: Vec<String> = a
            .as_matrix()
            .row(i)
            .iter()
            .map(|z| format!("{:.16e} {:.16e}", z.re.as_f64(), z.im.as_f64()))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_factor<T: Real, R: BufRead>(input: R) -> Result<Factor<T>> {
    let mut d = None;
    let mut r = None;
    let mut format_ok = false;
    let mut in_data = false;
    let mut entries = Vec::new();
    let mut rows = 0usize;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        if !in_data {
            if t == "data" {
                in_data = true;
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got {t:?}")))?;
            match k.trim() {
                "format" => format_ok = v.trim() == FACTOR_FORMAT,
                "d" => d = Some(v.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "r" => r = Some(v.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        } else {
            let vals = t
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let want = 2 * r.unwrap_or(0);
            if vals.len() != want {
                return Err(bad(format!("expected {want} numbers, got {}", vals.len())));
            }
            entries.extend(vals.chunks(2).map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))));
            rows += 1;
        }
    }
    let parse = |msg: &str| Error::Parse {
        line: 0,
        msg: msg.to_string(),
    };
    if !format_ok {
        return Err(parse("missing or unsupported format line"));
    }
    let d = d.ok_or_else(|| parse("missing d"))?;
    let r = r.ok_or_else(|| parse("missing r"))?;
    if rows != d {
        return Err(parse(&format!("expected {d} rows, got {rows}")));
    }
    Factor::new(ComplexMatrix::from_vec(d, r, entries)?)
}
