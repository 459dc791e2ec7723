//! QAOA circuit construction and execution: uniform initial state,
//! alternating cost-phase and mixer layers, and shot-based cost estimation.
//!
//! One layer applies the diagonal cost phase `exp(-i gamma H_C)` followed by
//! the mixer `exp(-i (beta1 sum_s x_s + beta2 sum_s z_s^2))`, which splits
//! exactly into commuting per-site factors. The mixer covers every site,
//! charging and trip alike; without trip-site mixing the trip marginals
//! could never leave the uniform distribution. On registers where every
//! site is two-level the `z^2` term is dropped and the parameter vector
//! shrinks from 3L to 2L.

use rand::Rng;
use thiserror::Error;

use crate::hilbert::{
    build_ladder_operators, hermitian_exponential, Configuration, HilbertError, LadderFamily,
    Register, SiteOperator, StateVector,
};
use crate::problem::{evaluate, register_arc, EncodingKind, ProblemError, ProblemInstance};

use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Error)]
pub enum QaoaError {
    #[error("parameter arrays have inconsistent lengths")]
    ParameterLengths,
    #[error("flat parameter vector of length {got} does not pack {layers} layers of width {width}")]
    FlatLength { got: usize, layers: usize, width: usize },
    #[error("register {} a site of dimension >= 3, but beta2 is {}",
        if *.register_mixed { "contains" } else { "does not contain" },
        if *.beta2_present { "present" } else { "absent" })]
    Beta2Mismatch { register_mixed: bool, beta2_present: bool },
    #[error("energy table has length {got}, expected {expected}")]
    EnergyTableLength { expected: usize, got: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Variational parameters of an L-layer circuit.
///
/// `beta2` is `None` in the two-level-only reduction, where the squared-z
/// term is a global phase; the flattened layout is then `(gamma, beta1)`
/// per layer instead of `(gamma, beta1, beta2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub beta1s: Vec<f64>,
    pub beta2s: Option<Vec<f64>>,
}

impl QaoaParams {
    pub fn zeros(layers: usize, include_beta2: bool) -> Self {
        Self {
            gammas: vec![0.0; layers],
            beta1s: vec![0.0; layers],
            beta2s: include_beta2.then(|| vec![0.0; layers]),
        }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    pub fn validate(&self) -> Result<(), QaoaError> {
        let l = self.gammas.len();
        let ok = self.beta1s.len() == l
            && self.beta2s.as_ref().map_or(true, |b| b.len() == l);
        if ok {
            Ok(())
        } else {
            Err(QaoaError::ParameterLengths)
        }
    }

    /// Number of scalar parameters: 3L, or 2L without beta2.
    pub fn dimension(&self) -> usize {
        self.gammas.len() * self.width()
    }

    fn width(&self) -> usize {
        if self.beta2s.is_some() {
            3
        } else {
            2
        }
    }

    /// Whether a register needs the beta2 parameters (any site above
    /// two levels).
    pub fn register_needs_beta2(register: &Register) -> bool {
        !register.all_two_level()
    }

    /// Flatten layer-major: `(gamma_l, beta1_l[, beta2_l])` per layer.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.dimension());
        for l in 0..self.layers() {
            flat.push(self.gammas[l]);
            flat.push(self.beta1s[l]);
            if let Some(beta2s) = &self.beta2s {
                flat.push(beta2s[l]);
            }
        }
        flat
    }

    pub fn from_flat(
        flat: &[f64],
        layers: usize,
        include_beta2: bool,
    ) -> Result<Self, QaoaError> {
        let width = if include_beta2 { 3 } else { 2 };
        if flat.len() != layers * width {
            return Err(QaoaError::FlatLength { got: flat.len(), layers, width });
        }
        let mut params = Self::zeros(layers, include_beta2);
        for l in 0..layers {
            params.gammas[l] = flat[l * width];
            params.beta1s[l] = flat[l * width + 1];
            if include_beta2 {
                params.beta2s.as_mut().unwrap()[l] = flat[l * width + 2];
            }
        }
        Ok(params)
    }
}

/// Shot-based estimate of the cost expectation, with the raw samples.
#[derive(Debug, Clone)]
pub struct ShotEstimate {
    pub mean_energy: f64,
    pub samples: Vec<Configuration>,
    pub shots: usize,
}

/// Equal superposition of all basis states.
pub fn initial_state(register: &Arc<Register>) -> StateVector {
    StateVector::uniform(register.clone())
}

/// Per-site mixer factors `exp(-i (beta1 x_s + beta2 z_s^2))`.
///
/// Factors on distinct sites commute; their product is the full mixer
/// unitary. Sites sharing a dimension and eigenvalue ladder share a factor.
pub fn mixer_unitary_factors(
    register: &Register,
    beta1: f64,
    beta2: Option<f64>,
) -> Result<Vec<SiteOperator>, QaoaError> {
    if QaoaParams::register_needs_beta2(register) != beta2.is_some() {
        return Err(QaoaError::Beta2Mismatch {
            register_mixed: QaoaParams::register_needs_beta2(register),
            beta2_present: beta2.is_some(),
        });
    }
    let mut unique: Vec<(usize, &[f64], SiteOperator)> = Vec::new();
    let mut factors = Vec::with_capacity(register.site_count());
    for site in register.sites() {
        let cached = unique
            .iter()
            .find(|(dim, eigs, _)| *dim == site.dim && *eigs == site.eigenvalues.as_slice())
            .map(|(_, _, u)| u.clone());
        let factor = match cached {
            Some(u) => u,
            None => {
                // x has the same digit-basis matrix for every family of a
                // given dimension; the family only fixes the z eigenvalues.
                let ops = build_ladder_operators(site.dim, LadderFamily::TripInteger)?;
                let mut h = ops.x.scale(Complex64::new(beta1, 0.0));
                if let Some(beta2) = beta2 {
                    let z_squared = SiteOperator::from_diagonal(
                        &site.eigenvalues.iter().map(|v| v * v).collect::<Vec<_>>(),
                    );
                    h = h.add(&z_squared.scale(Complex64::new(beta2, 0.0)));
                }
                let u = hermitian_exponential(&h)?;
                unique.push((site.dim, &site.eigenvalues, u.clone()));
                u
            }
        };
        factors.push(factor);
    }
    Ok(factors)
}

/// Run the L-layer circuit on the uniform initial state: within each layer
/// the cost phase acts first, then the mixer.
pub fn run_circuit(
    instance: &ProblemInstance,
    enc: EncodingKind,
    params: &QaoaParams,
    energy_table: &[f64],
) -> Result<StateVector, QaoaError> {
    params.validate()?;
    let register = register_arc(instance, enc)?;
    if energy_table.len() != register.total_size() {
        return Err(QaoaError::EnergyTableLength {
            expected: register.total_size(),
            got: energy_table.len(),
        });
    }
    let needs_beta2 = QaoaParams::register_needs_beta2(&register);
    if params.beta2s.is_some() != needs_beta2 {
        return Err(QaoaError::Beta2Mismatch {
            register_mixed: needs_beta2,
            beta2_present: params.beta2s.is_some(),
        });
    }

    let mut state = initial_state(&register);
    for l in 0..params.layers() {
        state.apply_diagonal_phase(params.gammas[l], energy_table)?;
        let beta2 = params.beta2s.as_ref().map(|b| b[l]);
        let factors = mixer_unitary_factors(&register, params.beta1s[l], beta2)?;
        for (site, factor) in factors.iter().enumerate() {
            state.apply_site_unitary(site, factor)?;
        }
    }
    let norm = state.norm_sq();
    assert!(
        (norm - 1.0).abs() < 1e-10,
        "state norm drifted to {norm} after {} layers",
        params.layers()
    );
    Ok(state)
}

/// Estimate the cost expectation from `m` Born samples of a state.
pub fn estimate_cost<R: Rng>(
    state: &StateVector,
    instance: &ProblemInstance,
    enc: EncodingKind,
    m: usize,
    rng: &mut R,
) -> Result<ShotEstimate, QaoaError> {
    let samples = state.born_sample(m, rng)?;
    let mut sum = 0.0;
    for sample in &samples {
        sum += evaluate(instance, enc, sample)?.total_energy;
    }
    Ok(ShotEstimate { mean_energy: sum / m as f64, samples, shots: m })
}

/// Exact cost expectation `sum_k |amp_k|^2 E_k`; the test-side reference for
/// the shot estimator, not used in the benchmark optimization loop.
pub fn exact_cost(state: &StateVector, energy_table: &[f64]) -> Result<f64, QaoaError> {
    if energy_table.len() != state.amplitudes().len() {
        return Err(QaoaError::EnergyTableLength {
            expected: state.amplitudes().len(),
            got: energy_table.len(),
        });
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(energy_table)
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::taylor_expm;
    use crate::oracle::enumerate;
    use crate::problem::{generate_instance, ClassSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uni_instance(r: usize, seed: u64) -> ProblemInstance {
        generate_instance(&ClassSpec::unidirectional_benchmark(r), seed).unwrap()
    }

    #[test]
    fn initial_state_is_uniform() {
        let inst = uni_instance(2, 1);
        let register = register_arc(&inst, EncodingKind::IntegerTrips).unwrap();
        let state = initial_state(&register);
        let expected = 1.0 / (register.total_size() as f64).sqrt();
        for a in state.amplitudes() {
            assert!((a.re - expected).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn zero_layer_circuit_estimates_table_average() {
        let inst = uni_instance(2, 4);
        let enc = EncodingKind::IntegerTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams::zeros(0, true);
        let state = run_circuit(&inst, enc, &params, table).unwrap();

        let exact = exact_cost(&state, table).unwrap();
        let average = table.iter().sum::<f64>() / table.len() as f64;
        assert!((exact - average).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let estimate = estimate_cost(&state, &inst, enc, 65536, &mut rng).unwrap();
        let spread = {
            let var = estimate
                .samples
                .iter()
                .map(|s| evaluate(&inst, enc, s).unwrap().total_energy)
                .map(|e| (e - estimate.mean_energy).powi(2))
                .sum::<f64>()
                / (estimate.shots as f64 - 1.0);
            (var / estimate.shots as f64).sqrt()
        };
        assert!(
            (estimate.mean_energy - average).abs() < 3.0 * spread,
            "estimate {} vs average {average} (3 SE = {})",
            estimate.mean_energy,
            3.0 * spread
        );
    }

    #[test]
    fn mixer_factors_identity_at_zero_angles() {
        let inst = uni_instance(2, 5);
        let register = register_arc(&inst, EncodingKind::IntegerTrips).unwrap();
        let factors = mixer_unitary_factors(&register, 0.0, Some(0.0)).unwrap();
        for factor in &factors {
            let identity = SiteOperator::identity(factor.dim);
            for (a, b) in factor.elements.iter().zip(&identity.elements) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_factor_is_x_rotation() {
        // On a two-level site, x = X/2, so the factor is the standard
        // rotation cos(b/2) I - i sin(b/2) X.
        let inst = uni_instance(2, 5);
        let register = register_arc(&inst, EncodingKind::BinaryTrips).unwrap();
        assert!(register.all_two_level());
        let beta = 0.83;
        let factors = mixer_unitary_factors(&register, beta, None).unwrap();
        let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        for factor in &factors {
            assert!((factor.get(0, 0) - Complex64::new(c, 0.0)).norm() < 1e-12);
            assert!((factor.get(1, 1) - Complex64::new(c, 0.0)).norm() < 1e-12);
            assert!((factor.get(0, 1) - Complex64::new(0.0, -s)).norm() < 1e-12);
            assert!((factor.get(1, 0) - Complex64::new(0.0, -s)).norm() < 1e-12);
        }
    }

    #[test]
    fn generic_factor_matches_series_oracle() {
        let inst = generate_instance(&ClassSpec::bidirectional_benchmark(), 2).unwrap();
        let register = register_arc(&inst, EncodingKind::IntegerTrips).unwrap();
        let (beta1, beta2) = (0.71, -0.37);
        let factors = mixer_unitary_factors(&register, beta1, Some(beta2)).unwrap();
        for (site, factor) in register.sites().iter().zip(&factors) {
            let ops = build_ladder_operators(site.dim, LadderFamily::TripInteger).unwrap();
            let z_squared = SiteOperator::from_diagonal(
                &site.eigenvalues.iter().map(|v| v * v).collect::<Vec<_>>(),
            );
            let h = ops
                .x
                .scale(Complex64::new(beta1, 0.0))
                .add(&z_squared.scale(Complex64::new(beta2, 0.0)));
            let oracle = taylor_expm(&h);
            for (a, b) in factor.elements.iter().zip(&oracle.elements) {
                assert!((a - b).norm() < 1e-9);
            }
            assert!(factor.is_unitary(1e-10));
        }
    }

    #[test]
    fn parameter_count_rule() {
        // 3L whenever any site has dimension >= 3; 2L only for the
        // all-two-level case (uni-directional d=2 with binary trips).
        let bi = generate_instance(&ClassSpec::bidirectional_benchmark(), 0).unwrap();
        let uni = uni_instance(2, 0);
        let needs = |inst: &ProblemInstance, enc| {
            QaoaParams::register_needs_beta2(&register_arc(inst, enc).unwrap())
        };
        assert!(needs(&bi, EncodingKind::BinaryTrips));
        assert!(needs(&bi, EncodingKind::IntegerTrips));
        assert!(needs(&uni, EncodingKind::IntegerTrips));
        assert!(!needs(&uni, EncodingKind::BinaryTrips));

        let params = QaoaParams::zeros(4, true);
        assert_eq!(params.dimension(), 12);
        let params = QaoaParams::zeros(4, false);
        assert_eq!(params.dimension(), 8);
    }

    #[test]
    fn flat_roundtrip() {
        let params = QaoaParams {
            gammas: vec![0.1, 0.2],
            beta1s: vec![0.3, 0.4],
            beta2s: Some(vec![0.5, 0.6]),
        };
        let flat = params.to_flat();
        assert_eq!(flat, vec![0.1, 0.3, 0.5, 0.2, 0.4, 0.6]);
        assert_eq!(QaoaParams::from_flat(&flat, 2, true).unwrap(), params);

        let params = QaoaParams { gammas: vec![0.1], beta1s: vec![0.3], beta2s: None };
        assert_eq!(QaoaParams::from_flat(&params.to_flat(), 1, false).unwrap(), params);
        assert!(QaoaParams::from_flat(&[0.0; 5], 2, true).is_err());
    }

    #[test]
    fn beta2_mismatch_rejected() {
        let inst = uni_instance(2, 7);
        let oracle = enumerate(&inst, EncodingKind::BinaryTrips).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams::zeros(1, true);
        assert!(matches!(
            run_circuit(&inst, EncodingKind::BinaryTrips, &params, table).unwrap_err(),
            QaoaError::Beta2Mismatch { .. }
        ));
    }

    #[test]
    fn two_level_register_keeps_uniform_magnitudes_at_zero_gamma() {
        // With gamma = 0 the mixer acts on a per-site uniform product
        // state; on two-level sites the uniform vector is an eigenvector of
        // x, so the magnitudes stay flat. (False for sites of dimension
        // >= 3, where the uniform vector is not an x eigenvector.)
        let inst = uni_instance(2, 9);
        let enc = EncodingKind::BinaryTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams {
            gammas: vec![0.0, 0.0],
            beta1s: vec![0.9, -1.7],
            beta2s: None,
        };
        let state = run_circuit(&inst, enc, &params, table).unwrap();
        let expected = 1.0 / oracle.total_count as f64;
        for a in state.amplitudes() {
            assert!((a.norm_sqr() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_on_basis_state_is_exact() {
        let inst = uni_instance(2, 10);
        let enc = EncodingKind::IntegerTrips;
        let register = register_arc(&inst, enc).unwrap();
        let index = 123 % register.total_size();
        let state = StateVector::basis(register.clone(), index);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let estimate = estimate_cost(&state, &inst, enc, 64, &mut rng).unwrap();
        let expected = evaluate(&inst, enc, &register.decode_index(index))
            .unwrap()
            .total_energy;
        assert_eq!(estimate.mean_energy, expected);
        assert_eq!(estimate.samples.len(), 64);
    }

    #[test]
    fn shot_accounting() {
        // 200 evaluations at M = 256 consume exactly 51200 shots.
        let evaluations = 200usize;
        let m = 256usize;
        let inst = uni_instance(2, 11);
        let enc = EncodingKind::IntegerTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams::zeros(1, true);
        let state = run_circuit(&inst, enc, &params, table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut shots = 0usize;
        for _ in 0..evaluations {
            shots += estimate_cost(&state, &inst, enc, m, &mut rng).unwrap().shots;
        }
        assert_eq!(shots, 51200);
    }

    #[test]
    fn exact_cost_reference_values() {
        let inst = uni_instance(2, 12);
        let enc = EncodingKind::IntegerTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let register = register_arc(&inst, enc).unwrap();

        let uniform = StateVector::uniform(register.clone());
        let mean = table.iter().sum::<f64>() / table.len() as f64;
        assert!((exact_cost(&uniform, table).unwrap() - mean).abs() < 1e-10);

        let basis = StateVector::basis(register, 37);
        assert_eq!(exact_cost(&basis, table).unwrap(), table[37]);
    }

    #[test]
    fn diagonal_phase_invisible_in_exact_cost() {
        let inst = uni_instance(3, 13);
        let enc = EncodingKind::IntegerTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams {
            gammas: vec![0.31],
            beta1s: vec![1.1],
            beta2s: Some(vec![0.2]),
        };
        let state = run_circuit(&inst, enc, &params, table).unwrap();
        let before = exact_cost(&state, table).unwrap();
        let mut phased = state.clone();
        phased.apply_diagonal_phase(2.9, table).unwrap();
        let after = exact_cost(&phased, table).unwrap();
        assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn two_pi_periodicity_in_beta1_on_two_level_sites() {
        // exp(-i beta x) with x eigenvalues +/- 1/2 gains a global sign at
        // beta + 2 pi; sampling distributions coincide.
        let inst = uni_instance(2, 14);
        let enc = EncodingKind::BinaryTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let beta = 0.77;
        let make = |beta1: f64| QaoaParams {
            gammas: vec![0.5],
            beta1s: vec![beta1],
            beta2s: None,
        };
        let a = run_circuit(&inst, enc, &make(beta), table).unwrap();
        let b = run_circuit(&inst, enc, &make(beta + 2.0 * std::f64::consts::PI), table)
            .unwrap();
        // global phase: all amplitude ratios equal, probabilities identical
        let phase = b.amplitudes()[0] / a.amplitudes()[0];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((y - phase * x).norm() < 1e-10);
            assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn law_of_large_numbers_convergence() {
        let inst = uni_instance(2, 15);
        let enc = EncodingKind::IntegerTrips;
        let oracle = enumerate(&inst, enc).unwrap();
        let table = oracle.energy_table.as_ref().unwrap();
        let params = QaoaParams {
            gammas: vec![0.21],
            beta1s: vec![0.6],
            beta2s: Some(vec![0.15]),
        };
        let state = run_circuit(&inst, enc, &params, table).unwrap();
        let exact = exact_cost(&state, table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let estimate = estimate_cost(&state, &inst, enc, 65536, &mut rng).unwrap();
        // generous envelope: energies live on a penalty scale of ~10-40
        assert!(
            (estimate.mean_energy - exact).abs() < 0.5,
            "estimate {} vs exact {exact}",
            estimate.mean_energy
        );
    }
}
