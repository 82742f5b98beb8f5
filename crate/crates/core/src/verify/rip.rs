use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CheckReport, TheoryParams};
use crate::error::{Error, Result};
use crate::matops::ComplexMatrix;
use crate::pauli::{measure_factor, SensingEnsemble};

const MAX_QUBITS: u32 = 8;

/// Rank at which `δ_4r` is probed: `4r`, capped at `d`.
pub fn probe_rank(r: usize, d: usize) -> usize {
    (4 * r).min(d)
}

/// `δ̂ = max |‖M(ρ)‖₂²/‖ρ‖_F² − 1|` over random rank-`r` unit-trace states.
///
/// Reporting only: a trial counts as a violation when its deviation reaches 1.
pub fn rip_probe(ens: &SensingEnsemble, r: usize, trials: usize, seed: u64) -> Result<(TheoryParams, CheckReport)> {
    let n = ens.n_qubits();
    if n > MAX_QUBITS {
        return Err(Error::AboveDenseCap { n, cap: MAX_QUBITS });
    }
    let d = ens.dim();
    if r == 0 || r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("rip_probe needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("rip", false);
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, 0.0f64, 0.0);
    let mut delta = 0.0f64;
    for _ in 0..trials {
        let mut g = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
        let norm = g.frobenius_norm();
        g.scale_mut(1.0 / norm);
        let rho_sq = g.adjoint_matmul(&g).frobenius_norm_sq();
        let y = measure_factor(ens, &g)?;
        let ratio = y.iter().map(|v| v * v).sum::<f64>() / rho_sq;
        let dev = (ratio - 1.0).abs();
        delta = delta.max(dev);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        sum += ratio;
        report.record(1.0 - dev, dev < 1.0);
    }
    report.estimate = Some(delta);
    report.details = format!(
        "rank {r}, m {}, ratio min {lo:.6} mean {:.6} max {hi:.6}",
        ens.len(),
        sum / trials as f64
    );
    Ok((TheoryParams::from_delta(delta, r), report))
}
