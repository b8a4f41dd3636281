//! Seeded synthesis of a random but physically structured DMA model.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{Band, CavityMode, CouplingOperator, Polarizability, PortCoupling, Resonance};
use super::{DmaConfiguration, PhysicsError, PhysicsModel};

/// Contraction bound reached at `mc_strength = 1`.
pub const BOUND_PER_UNIT_STRENGTH: f64 = 0.45;
/// Ceiling on the contraction bound after scaling.
pub const MAX_CONTRACTION: f64 = 0.9;

/// Transmitter location relative to the DMA aperture center (DMA lies in the z = 0 plane).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Angle from the aperture normal.
    pub polar_deg: f64,
    pub azimuth_deg: f64,
    pub distance_m: f64,
}

impl Placement {
    pub fn cartesian(&self) -> [f64; 3] {
        let (t, p) = (self.polar_deg.to_radians(), self.azimuth_deg.to_radians());
        [
            self.distance_m * t.sin() * p.cos(),
            self.distance_m * t.sin() * p.sin(),
            self.distance_m * t.cos(),
        ]
    }
}

/// Synthesis parameters. Everything not listed here is drawn from the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub n_atoms: usize,
    pub mc_strength: f64,
    pub band: Band,
    pub n_modes: usize,
    /// Range of cavity-mode half widths; drawn log-uniformly.
    pub mode_half_width_hz: [f64; 2],
    pub aperture_m: f64,
    pub min_spacing_m: f64,
    pub substrate_permittivity: f64,
    pub feed_direct_amplitude: f64,
    pub feed_modal_amplitude: f64,
    pub on_resonance_hz: f64,
    pub off_resonance_hz: f64,
    pub resonance_jitter_hz: f64,
    pub resonance_half_width_hz: f64,
    /// Log-normal spread (natural-log standard deviation) of per-element
    /// oscillator strength, shared by both diode states.
    pub strength_spread: f64,
    pub desired: Placement,
    pub undesired: Placement,
    /// Feed-to-transmitter leakage `[desired, undesired]`.
    pub direct: [Complex64; 2],
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_atoms: 96,
            mc_strength: 2.0,
            band: Band::default(),
            n_modes: 120,
            mode_half_width_hz: [200e6, 2000e6],
            aperture_m: 0.15,
            min_spacing_m: 0.006,
            substrate_permittivity: 3.0,
            feed_direct_amplitude: 1.0,
            feed_modal_amplitude: 0.5,
            on_resonance_hz: 19.25e9,
            off_resonance_hz: 17.25e9,
            resonance_jitter_hz: 1000e6,
            resonance_half_width_hz: 300e6,
            strength_spread: 1.0,
            desired: Placement { polar_deg: 25.0, azimuth_deg: 10.0, distance_m: 1.0 },
            undesired: Placement { polar_deg: 40.0, azimuth_deg: 200.0, distance_m: 1.2 },
            direct: [Complex64::new(0.0, 0.0); 2],
        }
    }
}

impl ModelParams {
    pub fn with_size(n_atoms: usize, mc_strength: f64) -> Self {
        Self { n_atoms, mc_strength, ..Self::default() }
    }

    fn validate(&self) -> Result<(), PhysicsError> {
        Band::new(self.band.start_hz, self.band.stop_hz)?;
        if self.n_atoms == 0 {
            return Err(PhysicsError::InvalidParameter("n_atoms must be at least 1".into()));
        }
        if !(self.mc_strength >= 0.0 && self.mc_strength.is_finite()) {
            return Err(PhysicsError::InvalidParameter(format!(
                "mc_strength must be finite and nonnegative, got {}",
                self.mc_strength
            )));
        }
        let [lo, hi] = self.mode_half_width_hz;
        if !(lo > 0.0 && hi >= lo) {
            return Err(PhysicsError::InvalidParameter("mode half-width range must be positive".into()));
        }
        if !(self.strength_spread >= 0.0 && self.strength_spread.is_finite()) {
            return Err(PhysicsError::InvalidParameter("strength_spread must be finite and nonnegative".into()));
        }
        if self.aperture_m <= 0.0 || self.min_spacing_m < 0.0 || self.resonance_half_width_hz <= 0.0 {
            return Err(PhysicsError::InvalidParameter("geometry and resonance widths must be positive".into()));
        }
        Ok(())
    }
}

/// Spec-level constructor: default geometry with the given size, strength and band.
pub fn build_model(seed: u64, n_atoms: usize, mc_strength: f64, band: Band) -> Result<PhysicsModel, PhysicsError> {
    PhysicsModel::build(seed, &ModelParams { n_atoms, mc_strength, band, ..ModelParams::default() })
}

impl PhysicsModel {
    /// Deterministically synthesizes a model from `seed` and `params`.
    pub fn build(seed: u64, params: &ModelParams) -> Result<Self, PhysicsError> {
        params.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = params.n_atoms;
        let band = params.band;

        let positions = place_elements(n, params.aperture_m, params.min_spacing_m, &mut rng);

        let (log_lo, log_hi) = (params.mode_half_width_hz[0].ln(), params.mode_half_width_hz[1].ln());
        let shape_scale = 1.0 / (n as f64).sqrt();
        let modes: Vec<CavityMode> = (0..params.n_modes)
            .map(|_| {
                let center_hz = rng.random_range(band.start_hz..=band.stop_hz);
                let half_width_hz = if log_hi > log_lo { rng.random_range(log_lo..log_hi).exp() } else { log_lo.exp() };
                let shape = (0..n).map(|_| shape_scale * rng.sample::<f64, _>(StandardNormal)).collect();
                let feed_weight = rng.sample(StandardNormal);
                CavityMode { center_hz, half_width_hz, shape, feed_weight }
            })
            .collect();

        let jitter = Normal::new(0.0, params.resonance_jitter_hz.max(0.0))
            .map_err(|e| PhysicsError::InvalidParameter(e.to_string()))?;
        let mut resonances = |center: f64| -> Vec<Resonance> {
            (0..n)
                .map(|_| Resonance {
                    amplitude: 1.0,
                    center_hz: center + jitter.sample(&mut rng),
                    half_width_hz: params.resonance_half_width_hz,
                })
                .collect()
        };
        let mut off = resonances(params.off_resonance_hz);
        let mut on = resonances(params.on_resonance_hz);
        for (a, b) in off.iter_mut().zip(on.iter_mut()) {
            let strength = (params.strength_spread * rng.sample::<f64, _>(StandardNormal)).exp();
            a.amplitude = strength;
            b.amplitude = strength;
        }

        let mut model = PhysicsModel {
            seed: Some(seed),
            n_atoms: n,
            mc_strength: params.mc_strength,
            coupling_scale: 0.0,
            contraction_bound: 0.0,
            band,
            positions,
            coupling: CouplingOperator::Modes { modes },
            polarizability: Polarizability::Lorentzian { off, on },
            feed: PortCoupling::CavityFeed {
                position: [0.0, 0.0],
                direct_amplitude: params.feed_direct_amplitude,
                modal_amplitude: params.feed_modal_amplitude,
                permittivity: params.substrate_permittivity,
            },
            desired: PortCoupling::FreeSpace { position: params.desired.cartesian(), amplitude: 1.0 },
            undesired: PortCoupling::FreeSpace { position: params.undesired.cartesian(), amplitude: 1.0 },
            direct: params.direct,
        };
        model.validate()?;
        model.normalize_coupling(params)?;
        Ok(model)
    }

    /// Frequencies at which the contraction bound is evaluated: a uniform grid
    /// finer than the narrowest mode plus every in-band mode center.
    fn probe_grid(&self) -> Vec<f64> {
        let band = self.band;
        let narrowest = match &self.coupling {
            CouplingOperator::Modes { modes } => {
                modes.iter().map(|m| m.half_width_hz).fold(f64::INFINITY, f64::min)
            }
            CouplingOperator::Fixed { .. } => f64::INFINITY,
        };
        let step = (narrowest / 2.0).min(band.width() / 64.0);
        let points = (band.width() / step).ceil() as usize;
        let mut grid: Vec<f64> =
            (0..=points).map(|k| band.start_hz + band.width() * k as f64 / points as f64).collect();
        if let CouplingOperator::Modes { modes } = &self.coupling {
            grid.extend(modes.iter().map(|m| m.center_hz).filter(|f| band.contains(*f)));
        }
        grid.sort_by(f64::total_cmp);
        grid
    }

    fn normalize_coupling(&mut self, params: &ModelParams) -> Result<(), PhysicsError> {
        let n = self.n_atoms;
        let grid = self.probe_grid();
        let (mut worst_bound, mut worst_freq) = (0.0_f64, self.band.start_hz);
        for &f in &grid {
            let w = self.coupling.matrix(n, f);
            let (off, on) = self.polarizability.at(f);
            let chi_max = off.iter().chain(&on).map(|c| c.norm()).fold(0.0, f64::max);
            let bound = spectral_norm(&w) * chi_max;
            if bound > worst_bound {
                worst_bound = bound;
                worst_freq = f;
            }
        }
        if worst_bound == 0.0 {
            // No inter-element coupling at all (e.g. a single element).
            self.coupling_scale = 0.0;
            self.contraction_bound = 0.0;
            return Ok(());
        }
        let target = (params.mc_strength * BOUND_PER_UNIT_STRENGTH).min(MAX_CONTRACTION);
        let mut scale = target / worst_bound;
        for _ in 0..4 {
            self.coupling_scale = scale;
            self.contraction_bound = scale * worst_bound;
            match self.verify_invertible(&[worst_freq]) {
                Ok(()) => return Ok(()),
                Err(PhysicsError::Singular { .. }) => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
        Err(PhysicsError::Construction {
            freq_hz: worst_freq,
            detail: "resolvent remained singular after rescaling".into(),
        })
    }
}

/// Rejection-samples element positions in a square aperture centered on the
/// feed, relaxing the spacing if the aperture is too crowded.
fn place_elements<R: Rng>(n: usize, aperture: f64, min_spacing: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let half = aperture / 2.0;
    let mut spacing = min_spacing;
    loop {
        let mut placed: Vec<[f64; 2]> = Vec::with_capacity(n);
        let mut attempts = 0;
        while placed.len() < n && attempts < 200 * n {
            attempts += 1;
            let p = [rng.random_range(-half..half), rng.random_range(-half..half)];
            let far = |q: &[f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() >= spacing;
            if far(&[0.0, 0.0]) && placed.iter().all(far) {
                placed.push(p);
            }
        }
        if placed.len() == n {
            return placed;
        }
        spacing *= 0.8;
    }
}

/// Largest singular value by power iteration on `A^H A`.
pub(crate) fn spectral_norm(a: &nalgebra::DMatrix<Complex64>) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.1));
    v /= Complex64::new(v.norm(), 0.0);
    let adjoint = a.adjoint();
    let mut sigma_sq = 0.0;
    for _ in 0..200 {
        let av = a * &v;
        let w = &adjoint * av;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = ((norm - sigma_sq) / norm).abs() < 1e-10;
        sigma_sq = norm;
        v = w / Complex64::new(norm, 0.0);
        if converged {
            break;
        }
    }
    sigma_sq.sqrt()
}

/// Convenience for tests and tooling: a random configuration from a seeded stream.
pub fn seeded_configuration(n: usize, seed: u64) -> DmaConfiguration {
    DmaConfiguration::random(n, &mut ChaCha20Rng::seed_from_u64(seed))
}
