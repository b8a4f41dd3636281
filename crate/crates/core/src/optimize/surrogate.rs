use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OptimizeError;
use crate::physics::{ChannelPair, DmaConfiguration};

/// `intercept + sum_i bit_i * coefficients[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub intercept: Complex64,
    pub coefficients: Vec<Complex64>,
}

impl AffineMap {
    pub fn predict(&self, config: &DmaConfiguration) -> Complex64 {
        self.intercept
            + config
                .as_bools()
                .iter()
                .zip(&self.coefficients)
                .filter(|(&b, _)| b)
                .map(|(_, c)| c)
                .sum::<Complex64>()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub samples: usize,
    /// RMS of in-sample residuals `[desired, undesired]`.
    pub residual_rms: [f64; 2],
    /// Residual RMS divided by the RMS channel magnitude.
    pub relative_residual_rms: [f64; 2],
    /// Elements whose state never varied; their coefficients are zero.
    pub constant_bits: Vec<usize>,
    /// Numerical rank of the design matrix (intercept column included).
    pub rank: usize,
    pub warnings: Vec<String>,
}

/// Mutual-coupling-unaware model: each channel affine in the configuration bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSurrogate {
    pub desired: AffineMap,
    pub undesired: AffineMap,
    pub diagnostics: FitDiagnostics,
}

impl LinearSurrogate {
    pub fn n_atoms(&self) -> usize {
        self.desired.coefficients.len()
    }

    pub fn predict(&self, config: &DmaConfiguration) -> ChannelPair {
        ChannelPair { h_des: self.desired.predict(config), h_und: self.undesired.predict(config) }
    }
}

/// Least-squares affine fit of both complex channels to the configuration bits.
///
/// Elements that are constant across the samples cannot be identified; they
/// get zero coefficients and a warning. Any remaining rank deficiency is
/// resolved by the minimum-norm solution and also reported.
pub fn fit_linear_surrogate<'a, I>(samples: I) -> Result<LinearSurrogate, OptimizeError>
where
    I: IntoIterator<Item = (&'a DmaConfiguration, &'a ChannelPair)>,
{
    let samples: Vec<_> = samples.into_iter().collect();
    let Some((first, _)) = samples.first() else {
        return Err(OptimizeError::Surrogate("no samples".into()));
    };
    let n = first.len();
    let k = samples.len();
    if let Some((bad, _)) = samples.iter().find(|(c, _)| c.len() != n) {
        return Err(OptimizeError::Surrogate(format!("mixed configuration lengths {n} and {}", bad.len())));
    }
    if k < n + 1 {
        return Err(OptimizeError::Surrogate(format!("{k} samples cannot determine {} parameters", n + 1)));
    }
    if samples.iter().all(|(c, _)| *c == *first) {
        return Err(OptimizeError::Surrogate("all sample configurations are identical".into()));
    }

    let mut diagnostics = FitDiagnostics { samples: k, ..Default::default() };
    let active: Vec<usize> = (0..n)
        .filter(|&i| {
            let b0 = first.bit(i);
            let varies = samples.iter().any(|(c, _)| c.bit(i) != b0);
            if !varies {
                diagnostics.constant_bits.push(i);
            }
            varies
        })
        .collect();
    if !diagnostics.constant_bits.is_empty() {
        let msg = format!(
            "elements {:?} never change state; their coefficients are set to zero",
            diagnostics.constant_bits
        );
        warn!("{msg}");
        diagnostics.warnings.push(msg);
    }

    // Centered 0/1 columns keep the problem well conditioned.
    let cols = active.len() + 1;
    let design = DMatrix::from_fn(k, cols, |r, col| {
        if col == 0 {
            1.0
        } else {
            samples[r].0.bit(active[col - 1]) as u8 as f64 - 0.5
        }
    });
    let targets = DMatrix::from_fn(k, 4, |r, col| {
        let p = samples[r].1;
        match col {
            0 => p.h_des.re,
            1 => p.h_des.im,
            2 => p.h_und.re,
            _ => p.h_und.im,
        }
    });
    let svd = design.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = sigma_max * f64::EPSILON * k.max(cols) as f64;
    diagnostics.rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if diagnostics.rank < cols {
        let msg = format!("design matrix has rank {} < {cols}; using minimum-norm solution", diagnostics.rank);
        warn!("{msg}");
        diagnostics.warnings.push(msg);
    }
    let solution = svd.solve(&targets, tol).map_err(|e| OptimizeError::Surrogate(e.to_string()))?;

    let residual = &design * &solution - &targets;
    for t in 0..2 {
        let res_sq: f64 = (0..k).map(|r| residual[(r, 2 * t)].powi(2) + residual[(r, 2 * t + 1)].powi(2)).sum();
        let mag_sq: f64 = (0..k).map(|r| targets[(r, 2 * t)].powi(2) + targets[(r, 2 * t + 1)].powi(2)).sum();
        diagnostics.residual_rms[t] = (res_sq / k as f64).sqrt();
        diagnostics.relative_residual_rms[t] = if mag_sq > 0.0 { (res_sq / mag_sq).sqrt() } else { 0.0 };
    }

    // Undo the centering: intercept absorbs -0.5 * sum of coefficients.
    let map = |t: usize| {
        let coef = |row: usize| Complex64::new(solution[(row, 2 * t)], solution[(row, 2 * t + 1)]);
        let mut coefficients = vec![Complex64::new(0.0, 0.0); n];
        let mut intercept = coef(0);
        for (j, &i) in active.iter().enumerate() {
            coefficients[i] = coef(j + 1);
            intercept -= coefficients[i] * 0.5;
        }
        AffineMap { intercept, coefficients }
    };
    Ok(LinearSurrogate { desired: map(0), undesired: map(1), diagnostics })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn planted(n: usize) -> AffineMap {
        AffineMap {
            intercept: Complex64::new(1.0, 0.0),
            coefficients: (1..=n).map(|i| Complex64::new(0.0, i as f64 * 1e-2)).collect(),
        }
    }

    #[test]
    fn recovers_planted_affine_map() {
        let n = 24;
        let truth_des = planted(n);
        let truth_und = AffineMap {
            intercept: Complex64::new(-0.2, 0.7),
            coefficients: (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()) * 0.05).collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let configs: Vec<_> = (0..200).map(|_| DmaConfiguration::random(n, &mut rng)).collect();
        let pairs: Vec<_> = configs
            .iter()
            .map(|c| ChannelPair { h_des: truth_des.predict(c), h_und: truth_und.predict(c) })
            .collect();
        let fit = fit_linear_surrogate(configs.iter().zip(&pairs)).unwrap();
        assert!((fit.desired.intercept - truth_des.intercept).norm() < 1e-10);
        for i in 0..n {
            assert!((fit.desired.coefficients[i] - truth_des.coefficients[i]).norm() < 1e-10);
            assert!((fit.undesired.coefficients[i] - truth_und.coefficients[i]).norm() < 1e-10);
        }
        assert!(fit.diagnostics.relative_residual_rms[0] < 1e-12);
        assert_eq!(fit.diagnostics.rank, n + 1);
        assert!(fit.diagnostics.warnings.is_empty());
    }

    #[test]
    fn constant_bit_gets_zero_coefficient_and_warning() {
        let n = 6;
        let truth = planted(n);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let configs: Vec<_> = (0..40)
            .map(|_| {
                let mut c = DmaConfiguration::random(n, &mut rng);
                c.set(2, true);
                c
            })
            .collect();
        let pairs: Vec<_> =
            configs.iter().map(|c| ChannelPair { h_des: truth.predict(c), h_und: truth.predict(c) }).collect();
        let fit = fit_linear_surrogate(configs.iter().zip(&pairs)).unwrap();
        assert_eq!(fit.diagnostics.constant_bits, vec![2]);
        assert_eq!(fit.desired.coefficients[2], Complex64::new(0.0, 0.0));
        assert_eq!(fit.diagnostics.warnings.len(), 1);
        // Predictions on the sampled support stay exact.
        for (c, p) in configs.iter().zip(&pairs) {
            assert!((fit.predict(c).h_des - p.h_des).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_underdetermined_and_degenerate_inputs() {
        let c = DmaConfiguration::zeros(4);
        let p = ChannelPair { h_des: Complex64::new(1.0, 0.0), h_und: Complex64::new(1.0, 0.0) };
        let few = vec![(c.clone(), p); 3];
        assert!(fit_linear_surrogate(few.iter().map(|(c, p)| (c, p))).is_err());
        let same = vec![(c, p); 10];
        assert!(fit_linear_surrogate(same.iter().map(|(c, p)| (c, p))).is_err());
    }
}
