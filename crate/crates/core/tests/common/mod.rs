//! Dense full-space oracles shared by the integration suites: Kronecker
//! assembly of per-site matrices, an independent series exponential, and a
//! reference circuit built from explicit matrix-vector products.
#![allow(dead_code)] // each test target uses a different subset

use num_complex::Complex64;

use evqaoa::hilbert::{build_ladder_operators, LadderFamily, SiteOperator};
use evqaoa::problem::{build_register, EncodingKind, ProblemInstance};
use evqaoa::qaoa::QaoaParams;

/// Series exponential exp(-iH) by scaling and squaring, independent of the
/// library's spectral-decomposition path.
pub fn taylor_expm(h: &SiteOperator) -> SiteOperator {
    let d = h.dim;
    let norm: f64 = h.elements.iter().map(|e| e.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let scale = Complex64::new(0.0, -1.0) / 2f64.powi(squarings as i32);
    let a = h.scale(scale);
    let mut result = SiteOperator::identity(d);
    let mut term = SiteOperator::identity(d);
    for n in 1..48 {
        term = term.matmul(&a).scale(Complex64::new(1.0 / n as f64, 0.0));
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Kronecker product in site order (site 0 most significant).
pub fn kron(a: &[Complex64], na: usize, b: &[Complex64], nb: usize) -> (Vec<Complex64>, usize) {
    let n = na * nb;
    let mut out = vec![Complex64::ZERO; n * n];
    for ra in 0..na {
        for ca in 0..na {
            let va = a[ra * na + ca];
            if va == Complex64::ZERO {
                continue;
            }
            for rb in 0..nb {
                for cb in 0..nb {
                    out[(ra * nb + rb) * n + (ca * nb + cb)] = va * b[rb * nb + cb];
                }
            }
        }
    }
    (out, n)
}

pub fn kron_all(factors: &[SiteOperator]) -> (Vec<Complex64>, usize) {
    let mut acc = vec![Complex64::ONE];
    let mut n = 1usize;
    for factor in factors {
        let (next, m) = kron(&acc, n, &factor.elements, factor.dim);
        acc = next;
        n = m;
    }
    (acc, n)
}

pub fn matvec(m: &[Complex64], n: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; n];
    for r in 0..n {
        let row = &m[r * n..(r + 1) * n];
        let mut acc = Complex64::ZERO;
        for (a, b) in row.iter().zip(v) {
            acc += a * b;
        }
        out[r] = acc;
    }
    out
}

/// Per-site mixer factor assembled independently: ladder x plus the site's
/// squared eigenvalues, exponentiated by the series oracle.
pub fn dense_mixer_factor(
    dim: usize,
    eigenvalues: &[f64],
    beta1: f64,
    beta2: Option<f64>,
) -> SiteOperator {
    let ops = build_ladder_operators(dim, LadderFamily::TripInteger).unwrap();
    let mut h = ops.x.scale(Complex64::new(beta1, 0.0));
    if let Some(beta2) = beta2 {
        let z2: Vec<f64> = eigenvalues.iter().map(|v| v * v).collect();
        h = h.add(&SiteOperator::from_diagonal(&z2).scale(Complex64::new(beta2, 0.0)));
    }
    taylor_expm(&h)
}

/// Reference circuit: explicit dense mixer matrices applied by full-space
/// matrix-vector products, diagonal phases applied elementwise.
pub fn dense_run_circuit(
    instance: &ProblemInstance,
    enc: EncodingKind,
    params: &QaoaParams,
    energy_table: &[f64],
) -> Vec<Complex64> {
    let register = build_register(instance, enc).unwrap();
    let n = register.total_size();
    assert_eq!(energy_table.len(), n);
    let mut state = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    for l in 0..params.layers() {
        let gamma = params.gammas[l];
        for (amp, &e) in state.iter_mut().zip(energy_table) {
            let (sin, cos) = (-gamma * e).sin_cos();
            *amp *= Complex64::new(cos, sin);
        }
        let beta2 = params.beta2s.as_ref().map(|b| b[l]);
        let factors: Vec<SiteOperator> = register
            .sites()
            .iter()
            .map(|site| dense_mixer_factor(site.dim, &site.eigenvalues, params.beta1s[l], beta2))
            .collect();
        let (mixer, m) = kron_all(&factors);
        assert_eq!(m, n);
        state = matvec(&mixer, n, &state);
    }
    state
}

pub fn max_amplitude_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
