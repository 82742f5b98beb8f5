mod common;

use common::{kron_pauli, trace_prod, DenseSensing};
use proptest::prelude::*;
use projfgd_core::pauli::{
    adjoint_dense, adjoint_times_factor, apply_pauli, dense_pauli, measure_dense, measure_factor, sample_ensemble,
    PauliString,
};
use projfgd_core::{Cplx, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<Cplx<f64>> {
    (0..d).map(|_| Cplx::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::random_gaussian(d, d, rng);
    g.add(&g.adjoint()).scaled(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_string_is_an_involution(n in 1u32..=10, idx in any::<u64>(), seed in any::<u64>()) {
        let p = PauliString::from_index(n, idx % (1u64 << (2 * n)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vector(p.dim(), &mut rng);
        let back = apply_pauli(&p, &apply_pauli(&p, &v).unwrap()).unwrap();
        let dev = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-12);
    }

    #[test]
    fn dense_strings_are_hermitian(n in 1u32..=5, idx in any::<u64>()) {
        let p = PauliString::from_index(n, idx % (1u64 << (2 * n)));
        let m: Matrix = dense_pauli(&p).unwrap();
        let adj = m.adjoint();
        prop_assert_eq!(m.as_slice(), adj.as_slice());
    }

    #[test]
    fn adjoint_identity(n in 1u32..=5, frac in 0.05f64..1.0, seed in any::<u64>()) {
        let d = 1usize << n;
        let m = ((frac * (d * d) as f64) as usize).max(1);
        let ens = sample_ensemble(n, m, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let rho = random_hermitian(d, &mut rng);
        let b: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
        let lhs: f64 = measure_dense(&ens, &rho).unwrap().iter().zip(&b).map(|(x, y)| x * y).sum();
        let rhs = rho.inner_re(&adjoint_dense(&ens, &b).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn matrix_free_matches_kronecker_oracle(n in 1u32..=4, r in 1usize..=3, frac in 0.1f64..1.0, seed in any::<u64>()) {
        let d = 1usize << n;
        let m = ((frac * (d * d) as f64) as usize).max(1);
        let ens = sample_ensemble(n, m, seed).unwrap();
        let oracle = DenseSensing::new(&ens);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5);
        let a = Matrix::random_gaussian(d, r, &mut rng);
        let rho = a.matmul_adjoint(&a);
        let want = oracle.measure(&rho);
        for (x, y) in measure_factor(&ens, &a).unwrap().iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
        for (x, y) in measure_dense(&ens, &rho).unwrap().iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
        let c: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
        let adj = oracle.adjoint(&c);
        prop_assert!(adjoint_dense(&ens, &c).unwrap().sub(&adj).frobenius_norm() <= 1e-10 * adj.frobenius_norm().max(1.0));
        let prod = adj.matmul(&a);
        let got = adjoint_times_factor(&ens, &c, &a).unwrap();
        prop_assert!(got.sub(&prod).frobenius_norm() <= 1e-10 * prod.frobenius_norm().max(1.0));
    }
}

#[test]
fn strings_are_trace_orthogonal() {
    for n in 1..=3u32 {
        let d = 1usize << n;
        let all: Vec<Matrix> = (0..(1u64 << (2 * n))).map(|i| dense_pauli(&PauliString::from_index(n, i)).unwrap()).collect();
        for (i, p) in all.iter().enumerate() {
            for (j, q) in all.iter().enumerate() {
                let want = if i == j { d as f64 } else { 0.0 };
                let t = trace_prod(p, q);
                assert!((t.re - want).abs() < 1e-12 && t.im.abs() < 1e-12, "n {n}: Tr(P{i} P{j}) = {t}");
            }
        }
    }
}

#[test]
fn dense_strings_match_kronecker_products() {
    for n in 1..=4u32 {
        for i in 0..(1u64 << (2 * n)) {
            let p = PauliString::from_index(n, i);
            let m: Matrix = dense_pauli(&p).unwrap();
            assert_eq!(m.as_slice(), kron_pauli(&p).as_slice(), "{p:?}");
        }
    }
}
