use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ensemble::{measure_dense, measure_factor, SensingEnsemble};
use super::string::PauliString;
use crate::error::{Error, Result};
use crate::matops::ComplexMatrix;
use crate::scalar::Real;

const DATASET_FORMAT: &str = "projfgd-measurements-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// I.i.d. real Gaussian entries with standard deviation `noise_param/√m`, so `E‖e‖₂² = noise_param²`.
    GaussianSigma,
    /// Uniformly random direction scaled to `‖e‖₂ = noise_param`.
    FixedNorm,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::GaussianSigma => "gaussian_sigma",
            NoiseKind::FixedNorm => "fixed_norm",
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseKind::None),
            "gaussian_sigma" => Ok(NoiseKind::GaussianSigma),
            "fixed_norm" => Ok(NoiseKind::FixedNorm),
            other => Err(Error::InvalidArgument(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Anything the sensing map can be evaluated on.
pub trait Measurable<T: Real> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>>;
}

/// A `d × r` factor `A` standing for `AA†`.
pub struct FactorRef<'a, T: Real>(pub &'a ComplexMatrix<T>);

/// A dense `d × d` matrix.
pub struct DenseRef<'a, T: Real>(pub &'a ComplexMatrix<T>);

impl<T: Real> Measurable<T> for FactorRef<'_, T> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>> {
        measure_factor(ens, self.0)
    }
}

impl<T: Real> Measurable<T> for DenseRef<'_, T> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>> {
        measure_dense(ens, self.0)
    }
}

/// Observed vector `y = M(ρ⋆) + e` with its noise metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet<T: Real> {
    pub y: Vec<T>,
    pub noise_kind: NoiseKind,
    pub noise_param: f64,
    pub seed: u64,
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(y: Vec<T>, noise_kind: NoiseKind, noise_param: f64, seed: u64) -> Result<Self> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement vector"));
        }
        Ok(Self {
            y,
            noise_kind,
            noise_param,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn check_against(&self, ens: &SensingEnsemble) -> Result<()> {
        if self.y.len() != ens.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} measurements for an ensemble of {}",
                self.y.len(),
                ens.len()
            )));
        }
        Ok(())
    }
}

/// Draws the noise vector for a measurement set.
pub fn noise_vector<T: Real>(m: usize, kind: NoiseKind, param: f64, seed: u64) -> Result<Vec<T>> {
    if !(param >= 0.0) || !param.is_finite() {
        return Err(Error::InvalidArgument(format!("noise parameter must be finite and nonnegative, got {param}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = match kind {
        NoiseKind::None => vec![T::zero(); m],
        NoiseKind::GaussianSigma => {
            let sd = param / (m.max(1) as f64).sqrt();
            (0..m)
                .map(|_| T::lit(sd * rng.sample::<f64, _>(StandardNormal)))
                .collect()
        }
        NoiseKind::FixedNorm => {
            let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                vec![T::zero(); m]
            } else {
                g.iter().map(|x| T::lit(x * param / norm)).collect()
            }
        }
    };
    Ok(v)
}

/// `y = M(truth) + e`, deterministic in `seed`.
pub fn generate_measurements<T: Real, S: Measurable<T> + ?Sized>(
    ens: &SensingEnsemble,
    truth: &S,
    noise_kind: NoiseKind,
    noise_param: f64,
    seed: u64,
) -> Result<MeasurementSet<T>> {
    let clean = truth.measure(ens)?;
    let e = noise_vector::<T>(ens.len(), noise_kind, noise_param, seed)?;
    let y = clean.iter().zip(&e).map(|(a, b)| *a + *b).collect();
    MeasurementSet::new(y, noise_kind, noise_param, seed)
}

/// Writes an ensemble and its measurements as a self-describing text file.
pub fn write_dataset<T: Real, W: Write>(out: &mut W, ens: &SensingEnsemble, meas: &MeasurementSet<T>) -> Result<()> {
    meas.check_against(ens)?;
    let mut s = String::new();
    let _ = writeln!(s, "# Pauli measurement dataset: one row per string, x_mask z_mask y");
    let _ = writeln!(s, "format = {DATASET_FORMAT}");
    let _ = writeln!(s, "n = {}", ens.n_qubits());
    let _ = writeln!(s, "m = {}", ens.len());
    let _ = writeln!(s, "seed = {}", ens.seed());
    let _ = writeln!(s, "normalization = {:.16e}", ens.normalization());
    let _ = writeln!(s, "noise_kind = {}", meas.noise_kind.as_str());
    let _ = writeln!(s, "noise_param = {:.16e}", meas.noise_param);
    let _ = writeln!(s, "noise_seed = {}", meas.seed);
    let _ = writeln!(s, "data");
    for (p, y) in ens.paulis().iter().zip(&meas.y) {
        let _ = writeln!(s, "{} {} {:.16e}", p.x_mask, p.z_mask, y.as_f64());
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Parses a file written by [`write_dataset`].
pub fn read_dataset<T: Real, R: BufRead>(input: R) -> Result<(SensingEnsemble, MeasurementSet<T>)> {
    let mut header = std::collections::HashMap::new();
    let mut rows: Vec<(u32, u32, f64)> = Vec::new();
    let mut in_data = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !in_data {
            if t == "data" {
                in_data = true;
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected `key = value`, got {t:?}"),
            })?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected three columns".into(),
                });
            }
            let bad = |msg: String| Error::Parse { line: lineno, msg };
            let x = parts[0].parse().map_err(|e| bad(format!("x_mask: {e}")))?;
            let z = parts[1].parse().map_err(|e| bad(format!("z_mask: {e}")))?;
            let y = parts[2].parse().map_err(|e| bad(format!("y: {e}")))?;
            rows.push((x, z, y));
        }
    }
    let get = |k: &str| {
        header.get(k).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing header key {k:?}"),
        })
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|e| Error::Parse {
            line: 0,
            msg: format!("{k}: {e}"),
        })
    };
    let int = |k: &str| -> Result<u64> {
        get(k)?.parse().map_err(|e| Error::Parse {
            line: 0,
            msg: format!("{k}: {e}"),
        })
    };
    if get("format")? != DATASET_FORMAT {
        return Err(Error::Parse {
            line: 0,
            msg: format!("unsupported format {:?}", get("format")?),
        });
    }
    let n = int("n")? as u32;
    let m = int("m")? as usize;
    if rows.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header says m = {m} but {} rows follow", rows.len()),
        });
    }
    let paulis = rows
        .iter()
        .map(|&(x, z, _)| PauliString::new(n, x, z))
        .collect::<Result<Vec<_>>>()?;
    let ens = SensingEnsemble::with_normalization(n, paulis, int("seed")?, num("normalization")?)?;
    let y = rows.iter().map(|r| T::lit(r.2)).collect();
    let meas = MeasurementSet::new(y, get("noise_kind")?.parse()?, num("noise_param")?, int("noise_seed")?)?;
    Ok((ens, meas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::sample_ensemble;

    fn pure_factor(d: usize) -> ComplexMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut a = ComplexMatrix::random_gaussian(d, 1, &mut rng);
        let n = a.frobenius_norm();
        a.scale_mut(1.0 / n);
        a
    }

    #[test]
    fn noiseless_is_exact() {
        let ens = sample_ensemble(3, 20, 1).unwrap();
        let a = pure_factor(8);
        let meas = generate_measurements(&ens, &FactorRef(&a), NoiseKind::None, 0.0, 3).unwrap();
        assert_eq!(meas.y, measure_factor(&ens, &a).unwrap());
    }

    #[test]
    fn fixed_norm_noise() {
        let ens = sample_ensemble(4, 100, 1).unwrap();
        let a = pure_factor(16);
        let meas = generate_measurements(&ens, &FactorRef(&a), NoiseKind::FixedNorm, 1e-3, 3).unwrap();
        let clean = measure_factor(&ens, &a).unwrap();
        let e: f64 = meas.y.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!((e - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn gaussian_sigma_sets_expected_norm() {
        let m = 10_000;
        let e = noise_vector::<f64>(m, NoiseKind::GaussianSigma, 0.05, 11).unwrap();
        let mean = e.iter().sum::<f64>() / m as f64;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        assert!((var.sqrt() * (m as f64).sqrt() / 0.05 - 1.0).abs() < 0.05);
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm / 0.05 - 1.0).abs() < 0.05);
    }

    #[test]
    fn negative_noise_rejected() {
        assert!(noise_vector::<f64>(3, NoiseKind::FixedNorm, -1.0, 0).is_err());
    }

    #[test]
    fn dataset_round_trip_is_bit_exact() {
        let ens = sample_ensemble(4, 50, 13).unwrap();
        let a = pure_factor(16);
        let meas = generate_measurements(&ens, &FactorRef(&a), NoiseKind::GaussianSigma, 0.01, 2).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ens, &meas).unwrap();
        let (ens2, meas2) = read_dataset::<f64, _>(&buf[..]).unwrap();
        assert_eq!(ens2, ens);
        assert_eq!(meas2, meas);
        for (a, b) in meas.y.iter().zip(&meas2.y) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_dataset() {
        let text = "format = projfgd-measurements-v1\nn = 1\nm = 2\nseed = 0\nnormalization = 1\nnoise_kind = none\nnoise_param = 0\nnoise_seed = 0\ndata\n0 0 1.0\n";
        assert!(matches!(read_dataset::<f64, _>(text.as_bytes()), Err(Error::Parse { .. })));
        assert!(read_dataset::<f64, _>("garbage\n".as_bytes()).is_err());
    }
}
