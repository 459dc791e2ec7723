//! EV charging and trip-assignment problem model: instances, random
//! instance generation, encoding layouts, feasibility checking, and the
//! penalized classical cost function for both trip encodings.
//!
//! Conventions: time steps and trip indices are 0-based; EVs are 0-based
//! internally, and the integer trip digit `q` maps `q = 0` to "unserved"
//! and `q = n + 1` to EV `n`. Running state-of-charge checks at step `t`
//! include step `t`'s charging and all trips with start time `<= t`, so the
//! final-SOC constraint coincides with the running check at the last step.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{
    family_eigenvalues, Configuration, HilbertError, LadderFamily, Register, Site, SiteRole,
};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("configuration does not match the encoding's register: {0}")]
    ConfigMismatch(#[from] HilbertError),
    #[error("mapping undefined: configuration is infeasible under the integer encoding")]
    MappingUndefined,
    #[error("instance file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("instance file parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Whether charging levels may be negative (discharge to grid).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargingMode {
    Bidirectional,
    Unidirectional,
}

/// How trip assignments are mapped onto quantum variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    /// One two-level site per EV-trip pair.
    BinaryTrips,
    /// One (N_EV + 1)-level site per trip holding the assigned EV index.
    IntegerTrips,
}

impl EncodingKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EncodingKind::BinaryTrips => "binary",
            EncodingKind::IntegerTrips => "integer",
        }
    }
}

/// One customer trip request: a closed time window and an energy demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub start: usize,
    pub end: usize,
    pub energy: f64,
}

impl Trip {
    pub fn overlaps(&self, other: &Trip) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// All physical and economic parameters of one EV scheduling problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n_ev: usize,
    /// Number of discrete time steps T.
    pub horizon: usize,
    pub trips: Vec<Trip>,
    /// Number of charging levels per site.
    pub d: usize,
    pub mode: ChargingMode,
    /// Cost per unit energy at each time step, length `horizon`.
    pub prices: Vec<f64>,
    pub delta_t: f64,
    /// Initial state of charge per EV.
    pub e0: Vec<f64>,
    /// Required final state of charge per EV.
    pub e_min: Vec<f64>,
    /// Battery capacity per EV.
    pub e_cap: Vec<f64>,
    pub p_min: f64,
    pub p_max: f64,
    /// Cost added per unserved trip.
    pub lambda: f64,
    /// Penalty factor multiplying constraint violations.
    pub alpha: f64,
}

impl ProblemInstance {
    pub fn n_trips(&self) -> usize {
        self.trips.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let fail = |msg: String| Err(ProblemError::InvalidInstance(msg));
        if self.n_ev == 0 || self.horizon == 0 {
            return fail("need at least one EV and one time step".into());
        }
        if self.d < 2 {
            return fail(format!("charging-level count {} must be >= 2", self.d));
        }
        if self.mode == ChargingMode::Bidirectional && self.d % 2 == 0 {
            return fail(format!("bi-directional charging requires odd d, got {}", self.d));
        }
        if self.prices.len() != self.horizon {
            return fail(format!(
                "prices length {} != horizon {}",
                self.prices.len(),
                self.horizon
            ));
        }
        for v in [&self.e0, &self.e_min, &self.e_cap] {
            if v.len() != self.n_ev {
                return fail(format!("per-EV array length {} != n_ev {}", v.len(), self.n_ev));
            }
        }
        for n in 0..self.n_ev {
            if !(0.0 <= self.e_min[n] && self.e_min[n] <= self.e_cap[n]) {
                return fail(format!("EV {n}: need 0 <= e_min <= e_cap"));
            }
        }
        if self.p_min > self.p_max {
            return fail("p_min > p_max".into());
        }
        if !(self.lambda > 0.0) || !(self.alpha > 0.0) {
            return fail("lambda and alpha must be positive".into());
        }
        for (i, trip) in self.trips.iter().enumerate() {
            if trip.start > trip.end || trip.end >= self.horizon {
                return fail(format!("trip {i}: window must satisfy start <= end <= T-1"));
            }
            if trip.energy < 0.0 {
                return fail(format!("trip {i}: energy must be nonnegative"));
            }
        }
        Ok(())
    }

    fn charging_family(&self) -> LadderFamily {
        match self.mode {
            ChargingMode::Bidirectional => LadderFamily::ChargingBidirectional,
            ChargingMode::Unidirectional => LadderFamily::ChargingUnidirectional,
        }
    }

    /// Charging level represented by a digit of a charging site.
    fn charging_level(&self, digit: u8) -> f64 {
        match self.mode {
            ChargingMode::Bidirectional => f64::from(digit) - (self.d as f64 - 1.0) / 2.0,
            ChargingMode::Unidirectional => f64::from(digit),
        }
    }

    fn site_counts(&self, enc: EncodingKind) -> (usize, usize) {
        let charging = self.n_ev * self.horizon;
        let trip = match enc {
            EncodingKind::BinaryTrips => self.n_ev * self.n_trips(),
            EncodingKind::IntegerTrips => self.n_trips(),
        };
        (charging, trip)
    }

    fn expected_digit_count(&self, enc: EncodingKind) -> usize {
        let (c, t) = self.site_counts(enc);
        c + t
    }
}

/// Per-constraint violation magnitudes; all zero iff the configuration is
/// feasible. Equality constraints contribute absolute values, inequality
/// constraints contribute their shortfall.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintReport {
    /// At most one EV per trip (binary encoding only).
    pub valid_assignment: f64,
    /// No EV serves two overlapping trips.
    pub no_overlap: f64,
    /// No charging or discharging while serving a trip.
    pub no_charge_during_trip: f64,
    /// Running SOC stays nonnegative.
    pub soc_lower: f64,
    /// Running SOC stays at or below capacity.
    pub soc_upper: f64,
    /// Final SOC reaches the required minimum.
    pub soc_final: f64,
    /// Total power stays at or above the grid lower bound.
    pub grid_lower: f64,
    /// Total power stays at or below the grid upper bound.
    pub grid_upper: f64,
}

impl ConstraintReport {
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("valid_assignment", self.valid_assignment),
            ("no_overlap", self.no_overlap),
            ("no_charge_during_trip", self.no_charge_during_trip),
            ("soc_lower", self.soc_lower),
            ("soc_upper", self.soc_upper),
            ("soc_final", self.soc_final),
            ("grid_lower", self.grid_lower),
            ("grid_upper", self.grid_upper),
        ]
    }

    pub fn total_violation(&self) -> f64 {
        self.entries().iter().map(|(_, v)| v).sum()
    }

    pub fn is_feasible(&self) -> bool {
        self.entries().iter().all(|&(_, v)| v == 0.0)
    }
}

/// Result of evaluating the penalized cost of one configuration.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Charging cost plus unserved-trip terms, no penalties.
    pub base_cost: f64,
    pub report: ConstraintReport,
    /// `base_cost + alpha * total violation`.
    pub total_energy: f64,
}

/// Build the site register for an instance under a trip encoding.
///
/// Layout: charging sites first, ordered lexicographically by (EV, step),
/// then trip sites ordered by (EV, trip) for the binary encoding or by trip
/// index for the integer encoding.
pub fn build_register(
    instance: &ProblemInstance,
    enc: EncodingKind,
) -> Result<Register, ProblemError> {
    instance.validate()?;
    let mut sites = Vec::with_capacity(instance.expected_digit_count(enc));
    let charging_eigs = family_eigenvalues(instance.d, instance.charging_family())?;
    for ev in 0..instance.n_ev {
        for step in 0..instance.horizon {
            sites.push(Site {
                dim: instance.d,
                role: SiteRole::Charging { ev, step },
                eigenvalues: charging_eigs.clone(),
            });
        }
    }
    match enc {
        EncodingKind::BinaryTrips => {
            let eigs = family_eigenvalues(2, LadderFamily::TripBinary)?;
            for ev in 0..instance.n_ev {
                for trip in 0..instance.n_trips() {
                    sites.push(Site {
                        dim: 2,
                        role: SiteRole::TripBinary { ev, trip },
                        eigenvalues: eigs.clone(),
                    });
                }
            }
        }
        EncodingKind::IntegerTrips => {
            let dim = instance.n_ev + 1;
            let eigs = family_eigenvalues(dim, LadderFamily::TripInteger)?;
            for trip in 0..instance.n_trips() {
                sites.push(Site {
                    dim,
                    role: SiteRole::TripInteger { trip },
                    eigenvalues: eigs.clone(),
                });
            }
        }
    }
    Ok(Register::new(sites)?)
}

/// Ratio of integer- to binary-encoding configuration counts,
/// `2^(-R N_EV + R log2(N_EV + 1))`. Independent of the charging layout.
pub fn dimension_ratio(n_ev: usize, r: usize) -> f64 {
    let exponent = -((r * n_ev) as f64) + r as f64 * ((n_ev + 1) as f64).log2();
    exponent.exp2()
}

/// Served indicator per (EV, trip) for a digit assignment.
struct DecodedConfig<'a> {
    instance: &'a ProblemInstance,
    enc: EncodingKind,
    digits: &'a [u8],
}

impl<'a> DecodedConfig<'a> {
    fn new(
        instance: &'a ProblemInstance,
        enc: EncodingKind,
        config: &'a Configuration,
    ) -> Result<Self, ProblemError> {
        let expected = instance.expected_digit_count(enc);
        if config.digits.len() != expected {
            return Err(ProblemError::ConfigMismatch(HilbertError::SiteCountMismatch {
                expected,
                got: config.digits.len(),
            }));
        }
        let decoded = Self { instance, enc, digits: &config.digits };
        for (site, &digit) in config.digits.iter().enumerate() {
            let dim = decoded.site_dim(site);
            if usize::from(digit) >= dim {
                return Err(ProblemError::ConfigMismatch(HilbertError::DigitOutOfRange {
                    site,
                    digit,
                    dim,
                }));
            }
        }
        Ok(decoded)
    }

    fn site_dim(&self, site: usize) -> usize {
        let charging = self.instance.n_ev * self.instance.horizon;
        if site < charging {
            self.instance.d
        } else {
            match self.enc {
                EncodingKind::BinaryTrips => 2,
                EncodingKind::IntegerTrips => self.instance.n_ev + 1,
            }
        }
    }

    /// Charging level of EV `n` at step `t`.
    fn level(&self, n: usize, t: usize) -> f64 {
        self.instance.charging_level(self.digits[n * self.instance.horizon + t])
    }

    /// Whether EV `n` serves trip `i`.
    fn served(&self, n: usize, i: usize) -> bool {
        let base = self.instance.n_ev * self.instance.horizon;
        match self.enc {
            EncodingKind::BinaryTrips => {
                self.digits[base + n * self.instance.n_trips() + i] == 1
            }
            EncodingKind::IntegerTrips => usize::from(self.digits[base + i]) == n + 1,
        }
    }

    /// Integer-encoding trip digit (0 = unserved).
    fn assignment(&self, i: usize) -> u8 {
        debug_assert_eq!(self.enc, EncodingKind::IntegerTrips);
        self.digits[self.instance.n_ev * self.instance.horizon + i]
    }

    fn trip_unserved(&self, i: usize) -> bool {
        match self.enc {
            EncodingKind::BinaryTrips => {
                (0..self.instance.n_ev).all(|n| !self.served(n, i))
            }
            EncodingKind::IntegerTrips => self.assignment(i) == 0,
        }
    }
}

/// Evaluate the base cost, constraint report, and penalized total energy of
/// one configuration.
pub fn evaluate(
    instance: &ProblemInstance,
    enc: EncodingKind,
    config: &Configuration,
) -> Result<Evaluation, ProblemError> {
    let decoded = DecodedConfig::new(instance, enc, config)?;
    let n_ev = instance.n_ev;
    let horizon = instance.horizon;
    let trips = &instance.trips;

    let mut base_cost = 0.0;
    for t in 0..horizon {
        let mut level_sum = 0.0;
        for n in 0..n_ev {
            level_sum += decoded.level(n, t);
        }
        base_cost += instance.delta_t * instance.prices[t] * level_sum;
    }
    for i in 0..trips.len() {
        if decoded.trip_unserved(i) {
            base_cost += instance.lambda;
        }
    }

    let mut report = ConstraintReport::default();

    if enc == EncodingKind::BinaryTrips {
        for i in 0..trips.len() {
            for n in 0..n_ev {
                if !decoded.served(n, i) {
                    continue;
                }
                for m in n + 1..n_ev {
                    if decoded.served(m, i) {
                        report.valid_assignment += 1.0;
                    }
                }
            }
        }
    }

    for i in 0..trips.len() {
        for j in i + 1..trips.len() {
            if !trips[i].overlaps(&trips[j]) {
                continue;
            }
            match enc {
                EncodingKind::BinaryTrips => {
                    for n in 0..n_ev {
                        if decoded.served(n, i) && decoded.served(n, j) {
                            report.no_overlap += 1.0;
                        }
                    }
                }
                EncodingKind::IntegerTrips => {
                    let (qi, qj) = (decoded.assignment(i), decoded.assignment(j));
                    if qi != 0 && qi == qj {
                        report.no_overlap += 1.0;
                    }
                }
            }
        }
    }

    for (i, trip) in trips.iter().enumerate() {
        for n in 0..n_ev {
            if !decoded.served(n, i) {
                continue;
            }
            for t in trip.start..=trip.end {
                report.no_charge_during_trip += decoded.level(n, t).abs();
            }
        }
    }

    for n in 0..n_ev {
        let mut soc = instance.e0[n];
        for t in 0..horizon {
            soc += instance.delta_t * decoded.level(n, t);
            for (i, trip) in trips.iter().enumerate() {
                if trip.start == t && decoded.served(n, i) {
                    soc -= trip.energy;
                }
            }
            report.soc_lower += (-soc).max(0.0);
            report.soc_upper += (soc - instance.e_cap[n]).max(0.0);
        }
        // soc now holds the final state of charge
        report.soc_final += (instance.e_min[n] - soc).max(0.0);
    }

    for t in 0..horizon {
        let mut total: f64 = 0.0;
        for n in 0..n_ev {
            total += decoded.level(n, t);
        }
        report.grid_lower += (instance.p_min - total).max(0.0);
        report.grid_upper += (total - instance.p_max).max(0.0);
    }

    let total_energy = base_cost + instance.alpha * report.total_violation();
    Ok(Evaluation { base_cost, report, total_energy })
}

/// True iff every constraint-report entry is exactly zero.
pub fn is_feasible(
    instance: &ProblemInstance,
    enc: EncodingKind,
    config: &Configuration,
) -> Result<bool, ProblemError> {
    Ok(evaluate(instance, enc, config)?.report.is_feasible())
}

/// Map a feasible integer-encoding configuration to the binary-encoding
/// configuration with the same charging schedule and trip assignment.
pub fn map_feasible(
    instance: &ProblemInstance,
    config_int: &Configuration,
) -> Result<Configuration, ProblemError> {
    if !is_feasible(instance, EncodingKind::IntegerTrips, config_int)? {
        return Err(ProblemError::MappingUndefined);
    }
    let charging = instance.n_ev * instance.horizon;
    let r = instance.n_trips();
    let mut digits = Vec::with_capacity(charging + instance.n_ev * r);
    digits.extend_from_slice(&config_int.digits[..charging]);
    for n in 0..instance.n_ev {
        for i in 0..r {
            let q = usize::from(config_int.digits[charging + i]);
            digits.push(u8::from(q == n + 1));
        }
    }
    Ok(Configuration::new(digits))
}

/// Problem-class parameters for the random instance generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub mode: ChargingMode,
    pub d: usize,
    pub n_ev: usize,
    pub horizon: usize,
    pub n_trips: usize,
}

impl ClassSpec {
    /// Bi-directional benchmark class: d = 3, 3 EVs, 2 steps, 2 trips.
    pub fn bidirectional_benchmark() -> Self {
        Self { mode: ChargingMode::Bidirectional, d: 3, n_ev: 3, horizon: 2, n_trips: 2 }
    }

    /// Uni-directional benchmark class: d = 2, 2 EVs, 3 steps, R trips.
    pub fn unidirectional_benchmark(n_trips: usize) -> Self {
        Self { mode: ChargingMode::Unidirectional, d: 2, n_ev: 2, horizon: 3, n_trips }
    }

    pub fn tag(&self) -> String {
        let mode = match self.mode {
            ChargingMode::Bidirectional => "bi",
            ChargingMode::Unidirectional => "uni",
        };
        format!(
            "{mode}_d{}_n{}_t{}_r{}",
            self.d, self.n_ev, self.horizon, self.n_trips
        )
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if self.mode == ChargingMode::Bidirectional && self.d % 2 == 0 {
            return Err(ProblemError::InvalidInstance(
                "bi-directional class requires odd d".into(),
            ));
        }
        if self.d < 2 || self.n_ev == 0 || self.horizon == 0 {
            return Err(ProblemError::InvalidInstance("degenerate class parameters".into()));
        }
        Ok(())
    }
}

/// Fixed generator constants shared by both benchmark classes.
pub mod generator_constants {
    pub const PRICE_LOW: f64 = 0.3;
    pub const PRICE_HIGH: f64 = 4.0;
    pub const DEFICIT_HIGH: f64 = 2.0;
    pub const TRIP_ENERGY_HIGH: f64 = 2.0;
    pub const P_MAX: f64 = 10.0;
    pub const DELTA_T: f64 = 1.0;
    pub const LAMBDA: f64 = 3.0;
    pub const ALPHA: f64 = 10.0;
    /// Initial SOC; only the difference e_min - e0 is sampled.
    pub const E0: f64 = 3.0;
    pub const E_CAP: f64 = 100.0;
}

/// Sample one instance of a problem class. Deterministic per seed.
///
/// Draw order: per-step prices, then per-trip (start, energy), then per-EV
/// SOC deficits.
pub fn generate_instance(class: &ClassSpec, seed: u64) -> Result<ProblemInstance, ProblemError> {
    use generator_constants as gc;
    class.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prices: Vec<f64> =
        (0..class.horizon).map(|_| rng.gen_range(gc::PRICE_LOW..gc::PRICE_HIGH)).collect();
    let trips: Vec<Trip> = (0..class.n_trips)
        .map(|_| {
            let start = rng.gen_range(0..class.horizon);
            Trip { start, end: start, energy: rng.gen_range(0.0..gc::TRIP_ENERGY_HIGH) }
        })
        .collect();
    let e0 = vec![gc::E0; class.n_ev];
    let e_min: Vec<f64> =
        (0..class.n_ev).map(|_| gc::E0 + rng.gen_range(0.0..gc::DEFICIT_HIGH)).collect();
    let instance = ProblemInstance {
        n_ev: class.n_ev,
        horizon: class.horizon,
        trips,
        d: class.d,
        mode: class.mode,
        prices,
        delta_t: gc::DELTA_T,
        e0,
        e_min,
        e_cap: vec![gc::E_CAP; class.n_ev],
        p_min: -gc::P_MAX,
        p_max: gc::P_MAX,
        lambda: gc::LAMBDA,
        alpha: gc::ALPHA,
    };
    instance.validate()?;
    Ok(instance)
}

/// Self-describing on-disk form of one generated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub class: ClassSpec,
    pub seed: u64,
    pub instance: ProblemInstance,
}

impl InstanceFile {
    pub fn save(&self, path: &Path) -> Result<(), ProblemError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Shared handle to a register, reused across circuit runs.
pub fn register_arc(
    instance: &ProblemInstance,
    enc: EncodingKind,
) -> Result<Arc<Register>, ProblemError> {
    Ok(Arc::new(build_register(instance, enc)?))
}
