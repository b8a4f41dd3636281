use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelPair, DmaConfiguration, PhysicsError};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Closed frequency interval in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub start_hz: f64,
    pub stop_hz: f64,
}

impl Band {
    pub fn new(start_hz: f64, stop_hz: f64) -> Result<Self, PhysicsError> {
        if !(start_hz.is_finite() && stop_hz.is_finite() && start_hz > 0.0 && start_hz < stop_hz) {
            return Err(PhysicsError::InvalidBand { start_hz, stop_hz });
        }
        Ok(Self { start_hz, stop_hz })
    }

    pub fn contains(&self, freq_hz: f64) -> bool {
        // Grid points generated by accumulation may land a few ulps outside.
        let slack = 1e-9 * self.stop_hz.abs();
        freq_hz >= self.start_hz - slack && freq_hz <= self.stop_hz + slack
    }

    pub fn width(&self) -> f64 {
        self.stop_hz - self.start_hz
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.start_hz + self.stop_hz)
    }
}

impl Default for Band {
    fn default() -> Self {
        Self { start_hz: 18.5e9, stop_hz: 20.0e9 }
    }
}

/// Normalized Lorentzian `w / (f - f0 - i w)`; unit magnitude at resonance.
///
/// The `-i w` sign places the pole so that the response is causal under the
/// `exp(+i 2 pi f t)` synthesis convention used by the baseband link.
pub fn lorentzian(freq_hz: f64, center_hz: f64, half_width_hz: f64) -> Complex64 {
    Complex64::new(half_width_hz, 0.0) / Complex64::new(freq_hz - center_hz, -half_width_hz)
}

/// One resonant cavity mode contributing a rank-one term to the coupling operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    pub center_hz: f64,
    pub half_width_hz: f64,
    /// Real mode amplitude at each meta-atom.
    pub shape: Vec<f64>,
    /// Mode amplitude at the feed.
    pub feed_weight: f64,
}

impl CavityMode {
    pub fn line(&self, freq_hz: f64) -> Complex64 {
        lorentzian(freq_hz, self.center_hz, self.half_width_hz)
    }
}

/// Element-to-element coupling through the cavity, before strength scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingOperator {
    /// Sum of rank-one cavity modes with the self-coupling diagonal removed.
    Modes { modes: Vec<CavityMode> },
    /// Frequency-independent symmetric matrix with zero diagonal.
    Fixed { matrix: Vec<Vec<Complex64>> },
}

impl CouplingOperator {
    fn modes(&self) -> Option<&[CavityMode]> {
        match self {
            CouplingOperator::Modes { modes } => Some(modes),
            CouplingOperator::Fixed { .. } => None,
        }
    }

    /// Unscaled operator at one frequency.
    pub fn matrix(&self, n: usize, freq_hz: f64) -> DMatrix<Complex64> {
        match self {
            CouplingOperator::Fixed { matrix } => DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
            CouplingOperator::Modes { modes } => {
                let mut upper = vec![Complex64::new(0.0, 0.0); n * n];
                for mode in modes {
                    let line = mode.line(freq_hz);
                    let u = &mode.shape;
                    for i in 0..n {
                        let a = line * u[i];
                        let row = &mut upper[i * n..(i + 1) * n];
                        for j in (i + 1)..n {
                            row[j] += a * u[j];
                        }
                    }
                }
                DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                    std::cmp::Ordering::Less => upper[i * n + j],
                    std::cmp::Ordering::Greater => upper[j * n + i],
                    std::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
                })
            }
        }
    }
}

/// Single-pole resonance `amplitude * lorentzian(f; center, half_width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub amplitude: f64,
    pub center_hz: f64,
    pub half_width_hz: f64,
}

impl Resonance {
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        lorentzian(freq_hz, self.center_hz, self.half_width_hz) * self.amplitude
    }
}

/// Per-element response in each of the two diode states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Polarizability {
    Lorentzian { off: Vec<Resonance>, on: Vec<Resonance> },
    Fixed { off: Vec<Complex64>, on: Vec<Complex64> },
}

impl Polarizability {
    fn len(&self) -> (usize, usize) {
        match self {
            Polarizability::Lorentzian { off, on } => (off.len(), on.len()),
            Polarizability::Fixed { off, on } => (off.len(), on.len()),
        }
    }

    /// `(off, on)` responses of every element at one frequency.
    pub fn at(&self, freq_hz: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        match self {
            Polarizability::Lorentzian { off, on } => (
                off.iter().map(|r| r.response(freq_hz)).collect(),
                on.iter().map(|r| r.response(freq_hz)).collect(),
            ),
            Polarizability::Fixed { off, on } => (off.clone(), on.clone()),
        }
    }
}

/// How a port (the DMA feed or a transmitter) couples to each meta-atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PortCoupling {
    /// In-cavity feed: cylindrical direct wave plus excitation of the cavity modes.
    CavityFeed {
        position: [f64; 2],
        direct_amplitude: f64,
        modal_amplitude: f64,
        permittivity: f64,
    },
    /// Transmitter in free space; spherical wave with free-space path loss.
    FreeSpace { position: [f64; 3], amplitude: f64 },
    /// Explicit frequency-independent coupling vector.
    Fixed { vector: Vec<Complex64> },
}

impl PortCoupling {
    pub fn vector(
        &self,
        freq_hz: f64,
        positions: &[[f64; 2]],
        modes: Option<&[CavityMode]>,
    ) -> Vec<Complex64> {
        match self {
            PortCoupling::Fixed { vector } => vector.clone(),
            PortCoupling::FreeSpace { position, amplitude } => {
                let k0 = 2.0 * std::f64::consts::PI * freq_hz / SPEED_OF_LIGHT;
                let wavelength = SPEED_OF_LIGHT / freq_hz;
                positions
                    .iter()
                    .map(|p| {
                        let dx = p[0] - position[0];
                        let dy = p[1] - position[1];
                        let r = (dx * dx + dy * dy + position[2] * position[2]).sqrt();
                        let loss = amplitude * wavelength / (4.0 * std::f64::consts::PI * r);
                        Complex64::from_polar(loss, -k0 * r)
                    })
                    .collect()
            }
            PortCoupling::CavityFeed { position, direct_amplitude, modal_amplitude, permittivity } => {
                let kc = 2.0 * std::f64::consts::PI * freq_hz * permittivity.sqrt() / SPEED_OF_LIGHT;
                let mut out: Vec<Complex64> = positions
                    .iter()
                    .map(|p| {
                        let d = ((p[0] - position[0]).powi(2) + (p[1] - position[1]).powi(2))
                            .sqrt()
                            .max(1e-3);
                        Complex64::from_polar(direct_amplitude / (kc * d).sqrt(), -kc * d)
                    })
                    .collect();
                if let Some(modes) = modes {
                    if *modal_amplitude != 0.0 {
                        for mode in modes {
                            let a = mode.line(freq_hz) * (modal_amplitude * mode.feed_weight);
                            for (o, &u) in out.iter_mut().zip(&mode.shape) {
                                *o += a * u;
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

/// Explicit description of a model, used for hand-built instances.
#[derive(Clone, Debug)]
pub struct ModelParts {
    pub n_atoms: usize,
    pub mc_strength: f64,
    pub band: Band,
    pub positions: Vec<[f64; 2]>,
    pub coupling: CouplingOperator,
    pub polarizability: Polarizability,
    pub feed: PortCoupling,
    pub desired: PortCoupling,
    pub undesired: PortCoupling,
    pub direct: [Complex64; 2],
}

/// Which transmitter a port-swap acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transmitter {
    Desired,
    Undesired,
}

/// Ground-truth channel model of the metasurface receiver.
///
/// The channel from transmitter `t` to the feed is
/// `h_t = d_t + w_r^T X (I - s W X)^{-1} w_t`, where `X` holds the
/// state-selected polarizabilities and `s W` is the scaled inter-element
/// coupling. With `s = 0` the map is affine in the configuration bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsModel {
    pub(crate) seed: Option<u64>,
    pub(crate) n_atoms: usize,
    pub(crate) mc_strength: f64,
    /// Factor applied to the unscaled coupling operator.
    pub(crate) coupling_scale: f64,
    /// Largest `||s W(f)|| * max|chi(f)|` found on the probe grid.
    pub(crate) contraction_bound: f64,
    pub(crate) band: Band,
    pub(crate) positions: Vec<[f64; 2]>,
    pub(crate) coupling: CouplingOperator,
    pub(crate) polarizability: Polarizability,
    pub(crate) feed: PortCoupling,
    pub(crate) desired: PortCoupling,
    pub(crate) undesired: PortCoupling,
    pub(crate) direct: [Complex64; 2],
}

impl PhysicsModel {
    /// Assembles a model from explicit parts. The coupling is used as given,
    /// scaled only by `mc_strength`.
    pub fn from_parts(parts: ModelParts) -> Result<Self, PhysicsError> {
        let model = Self {
            seed: None,
            n_atoms: parts.n_atoms,
            mc_strength: parts.mc_strength,
            coupling_scale: parts.mc_strength,
            contraction_bound: f64::NAN,
            band: parts.band,
            positions: parts.positions,
            coupling: parts.coupling,
            polarizability: parts.polarizability,
            feed: parts.feed,
            desired: parts.desired,
            undesired: parts.undesired,
            direct: parts.direct,
        };
        model.validate()?;
        model.verify_invertible(&[model.band.start_hz, model.band.center(), model.band.stop_hz])?;
        Ok(model)
    }

    pub(crate) fn validate(&self) -> Result<(), PhysicsError> {
        let n = self.n_atoms;
        if n == 0 {
            return Err(PhysicsError::InvalidParameter("n_atoms must be at least 1".into()));
        }
        if !(self.mc_strength >= 0.0 && self.mc_strength.is_finite()) {
            return Err(PhysicsError::InvalidParameter(format!(
                "mc_strength must be finite and nonnegative, got {}",
                self.mc_strength
            )));
        }
        let need_positions = [&self.feed, &self.desired, &self.undesired]
            .iter()
            .any(|p| !matches!(p, PortCoupling::Fixed { .. }));
        if need_positions && self.positions.len() != n {
            return Err(PhysicsError::DimensionMismatch {
                what: "positions",
                expected: n,
                found: self.positions.len(),
            });
        }
        for (what, port) in [("feed", &self.feed), ("desired", &self.desired), ("undesired", &self.undesired)] {
            if let PortCoupling::Fixed { vector } = port {
                if vector.len() != n {
                    return Err(PhysicsError::DimensionMismatch { what, expected: n, found: vector.len() });
                }
            }
        }
        let (off, on) = self.polarizability.len();
        if off != n || on != n {
            return Err(PhysicsError::DimensionMismatch {
                what: "polarizability",
                expected: n,
                found: off.min(on),
            });
        }
        match &self.coupling {
            CouplingOperator::Fixed { matrix } => {
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(PhysicsError::DimensionMismatch {
                        what: "coupling matrix",
                        expected: n,
                        found: matrix.len(),
                    });
                }
                for i in 0..n {
                    if matrix[i][i] != Complex64::new(0.0, 0.0) {
                        return Err(PhysicsError::InvalidParameter(format!(
                            "coupling matrix has nonzero diagonal at {i}"
                        )));
                    }
                    for j in 0..i {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(PhysicsError::InvalidParameter(format!(
                                "coupling matrix is not symmetric at ({i}, {j})"
                            )));
                        }
                    }
                }
            }
            CouplingOperator::Modes { modes } => {
                if let Some(bad) = modes.iter().find(|m| m.shape.len() != n) {
                    return Err(PhysicsError::DimensionMismatch {
                        what: "mode shape",
                        expected: n,
                        found: bad.shape.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks the resolvent on a fixed probe set of configurations.
    pub(crate) fn verify_invertible(&self, freqs: &[f64]) -> Result<(), PhysicsError> {
        let n = self.n_atoms;
        let mut probes = vec![DmaConfiguration::zeros(n), DmaConfiguration::ones(n)];
        probes.push(DmaConfiguration::from_bools((0..n).map(|i| i % 2 == 0).collect()));
        probes.push(DmaConfiguration::from_bools((0..n).map(|i| i % 3 == 0).collect()));
        for &f in freqs {
            let snap = self.snapshot(f)?;
            for p in &probes {
                snap.channel(p)?;
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn mc_strength(&self) -> f64 {
        self.mc_strength
    }

    /// Scale actually applied to the unscaled coupling operator.
    pub fn coupling_scale(&self) -> f64 {
        self.coupling_scale
    }

    /// Upper bound on the spectral radius of the scaled `W X` over the probe grid
    /// (NaN for hand-built models).
    pub fn contraction_bound(&self) -> f64 {
        self.contraction_bound
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn coupling(&self) -> &CouplingOperator {
        &self.coupling
    }

    /// Same model with the feed and one transmitter exchanging roles.
    pub fn with_swapped_ports(&self, which: Transmitter) -> Self {
        let mut out = self.clone();
        match which {
            Transmitter::Desired => std::mem::swap(&mut out.feed, &mut out.desired),
            Transmitter::Undesired => std::mem::swap(&mut out.feed, &mut out.undesired),
        }
        out
    }

    /// All frequency-dependent quantities at `freq_hz`, ready for repeated evaluation.
    pub fn snapshot(&self, freq_hz: f64) -> Result<FrequencySnapshot, PhysicsError> {
        if !self.band.contains(freq_hz) {
            return Err(PhysicsError::OutOfBand { freq_hz, band: self.band });
        }
        let n = self.n_atoms;
        let mut coupling = self.coupling.matrix(n, freq_hz);
        coupling *= Complex64::new(self.coupling_scale, 0.0);
        let (chi_off, chi_on) = self.polarizability.at(freq_hz);
        let modes = self.coupling.modes();
        Ok(FrequencySnapshot {
            freq_hz,
            coupling,
            chi_off,
            chi_on,
            feed: self.feed.vector(freq_hz, &self.positions, modes),
            desired: self.desired.vector(freq_hz, &self.positions, modes),
            undesired: self.undesired.vector(freq_hz, &self.positions, modes),
            direct: self.direct,
        })
    }

    /// Desired and undesired channels for one configuration and frequency.
    pub fn channel(&self, config: &DmaConfiguration, freq_hz: f64) -> Result<ChannelPair, PhysicsError> {
        self.snapshot(freq_hz)?.channel(config)
    }

    pub fn to_json(&self) -> Result<String, PhysicsError> {
        serde_json::to_string_pretty(self).map_err(|e| PhysicsError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, PhysicsError> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| PhysicsError::Serialization(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}

/// Model quantities frozen at one frequency.
#[derive(Clone, Debug)]
pub struct FrequencySnapshot {
    pub freq_hz: f64,
    /// Scaled coupling operator.
    pub coupling: DMatrix<Complex64>,
    pub chi_off: Vec<Complex64>,
    pub chi_on: Vec<Complex64>,
    pub feed: Vec<Complex64>,
    pub desired: Vec<Complex64>,
    pub undesired: Vec<Complex64>,
    pub direct: [Complex64; 2],
}

impl FrequencySnapshot {
    pub fn n_atoms(&self) -> usize {
        self.chi_off.len()
    }

    pub fn polarizabilities(&self, config: &DmaConfiguration) -> Vec<Complex64> {
        config
            .as_bools()
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { self.chi_on[i] } else { self.chi_off[i] })
            .collect()
    }

    pub fn channel(&self, config: &DmaConfiguration) -> Result<ChannelPair, PhysicsError> {
        let n = self.n_atoms();
        if config.len() != n {
            return Err(PhysicsError::DimensionMismatch {
                what: "configuration",
                expected: n,
                found: config.len(),
            });
        }
        let chi = self.polarizabilities(config);
        // Left solve: (I - X W) z = X w_r, so that z^T = w_r^T X (I - W X)^{-1}.
        let system = DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            delta - chi[i] * self.coupling[(i, j)]
        });
        let rhs = DVector::from_iterator(n, chi.iter().zip(&self.feed).map(|(c, w)| c * w));
        let lu = system.lu();
        let z = lu.solve(&rhs).ok_or_else(|| self.singular_error(&lu))?;
        let contract = |w: &[Complex64]| z.iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>();
        let pair = ChannelPair {
            h_des: self.direct[0] + contract(&self.desired),
            h_und: self.direct[1] + contract(&self.undesired),
        };
        if !(pair.h_des.is_finite() && pair.h_und.is_finite()) {
            return Err(PhysicsError::Singular {
                freq_hz: self.freq_hz,
                detail: "non-finite channel".into(),
            });
        }
        Ok(pair)
    }

    fn singular_error(&self, lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> PhysicsError {
        let u = lu.u();
        let pivots: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        PhysicsError::Singular {
            freq_hz: self.freq_hz,
            detail: format!("LU pivot magnitudes span [{min:.3e}, {max:.3e}]"),
        }
    }
}
