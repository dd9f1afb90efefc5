use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Family;

/// All experiment knobs. Every default is the acceptance setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub haar: HaarConfig,
    pub coupling: CouplingConfig,
    pub level_d: LevelDConfig,
    pub product_free: ProductFreeConfig,
    pub mixing: MixingConfig,
    pub doubling: DoublingConfig,
    pub repr: ReprConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets every Monte-Carlo sample count.
    pub fn override_samples(&mut self, s: usize) {
        self.haar.samples = s;
        let c = &mut self.coupling;
        c.roundtrip_samples = s;
        c.forward_samples = s;
        c.diagonal_samples = s;
        c.off_diagonal_samples = s;
        c.gmd_samples = s;
        c.regression_samples = s;
        c.noise_samples = s;
        c.projection_samples = s;
        c.norm_samples = s;
        self.level_d.n_eval = s;
        self.product_free.pairs = s;
        self.mixing.samples = s;
        self.doubling.n_outer = s;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HaarConfig {
    pub family: Family,
    pub n: usize,
    pub samples: usize,
    pub unitarity_tol: f64,
    pub det_tol: f64,
    /// Absolute tolerance on E|X₁₁|² = 1/n.
    pub second_moment_tol: f64,
}

impl Default for HaarConfig {
    fn default() -> Self {
        HaarConfig { family: Family::SO, n: 8, samples: 100_000, unitarity_tol: 1e-10, det_tol: 1e-10, second_moment_tol: 0.005 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub roundtrip_n: usize,
    pub roundtrip_samples: usize,
    pub roundtrip_tol: f64,
    pub forward_samples: usize,
    pub covariance_pairs: usize,
    pub lambda_ns: Vec<usize>,
    pub lambda_dmax: usize,
    pub diagonal_n: usize,
    pub diagonal_dmax: usize,
    pub diagonal_samples: usize,
    pub off_diagonal_ns: Vec<usize>,
    pub off_diagonal_samples: usize,
    pub gmd_ns: Vec<usize>,
    pub gmd_samples: usize,
    pub regression_n: usize,
    pub regression_samples: usize,
    pub noise_n: usize,
    pub noise_ds: Vec<usize>,
    pub noise_rhos: Vec<f64>,
    pub noise_samples: usize,
    pub projection_samples: usize,
    pub norm_n: usize,
    pub norm_dmax: usize,
    pub norm_eps: f64,
    pub norm_samples: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            roundtrip_n: 16,
            roundtrip_samples: 1_000,
            roundtrip_tol: 1e-9,
            forward_samples: 100_000,
            covariance_pairs: 200,
            lambda_ns: vec![36, 100],
            lambda_dmax: 6,
            diagonal_n: 16,
            diagonal_dmax: 4,
            diagonal_samples: 1_000_000,
            off_diagonal_ns: vec![16, 64],
            off_diagonal_samples: 100_000,
            gmd_ns: vec![8, 16, 64],
            gmd_samples: 100_000,
            regression_n: 16,
            regression_samples: 100_000,
            noise_n: 16,
            noise_ds: vec![1, 2, 3],
            noise_rhos: vec![0.3, 0.5, 0.8],
            noise_samples: 20_000,
            projection_samples: 50_000,
            norm_n: 64,
            norm_dmax: 3,
            norm_eps: 0.2,
            norm_samples: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelDConfig {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub ds: Vec<usize>,
    /// Envelope constant in α²(C·log(1/α)/d)^d.
    pub envelope: f64,
    pub n_fit: usize,
    pub n_eval: usize,
}

impl Default for LevelDConfig {
    fn default() -> Self {
        LevelDConfig { n: 12, alphas: vec![0.05, 0.1, 0.2], ds: vec![0, 1, 2, 3], envelope: 100.0, n_fit: 100_000, n_eval: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductFreeConfig {
    pub ns: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub pairs: usize,
    /// Thresholds at or below this are asserted product-free.
    pub safe_threshold: f64,
}

impl Default for ProductFreeConfig {
    fn default() -> Self {
        ProductFreeConfig { ns: vec![4, 8], thresholds: vec![-0.6, 0.0], pairs: 100_000, safe_threshold: -0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingConfig {
    pub samples: usize,
    pub whole_n: usize,
    pub typical_n: usize,
    pub typical_measure: f64,
    pub aligned_n: usize,
    pub aligned_ab: f64,
    pub aligned_c: f64,
    pub anti_n: usize,
    pub anti_t: f64,
    pub sweep_n: usize,
    pub sweep_alphas: Vec<f64>,
    pub sweep_outer: usize,
    pub sweep_inner: usize,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            samples: 100_000,
            whole_n: 6,
            typical_n: 6,
            typical_measure: 0.4,
            aligned_n: 4,
            aligned_ab: 0.8,
            aligned_c: 0.5,
            anti_n: 6,
            anti_t: 0.5,
            sweep_n: 4,
            sweep_alphas: vec![0.05, 0.1, 0.2, 0.4],
            sweep_outer: 2_000,
            sweep_inner: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoublingConfig {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub n_outer: usize,
    pub n_inner: usize,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig { n: 3, alphas: vec![1.0, 0.5, 0.05], n_outer: 2_000, n_inner: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReprConfig {
    pub lb1_ns: Vec<usize>,
    pub lb1_dmax: u32,
    pub lb2_ns: Vec<usize>,
    pub lb2_extra_levels: u32,
    pub quasirandom_c: f64,
    pub quasirandom_ns: Vec<usize>,
    pub lr_conservation_ns: Vec<usize>,
    pub lr_conservation_size: u32,
    pub lr_top_ns: Vec<usize>,
    pub lr_top_size: u32,
    pub step_ns: Vec<usize>,
    pub step_size: u32,
    pub laplacian_dmax: u32,
    pub laplacian_nmax: usize,
    pub oracle_max: u32,
    pub oracle_nmax: usize,
}

impl Default for ReprConfig {
    fn default() -> Self {
        ReprConfig {
            lb1_ns: vec![10, 20],
            lb1_dmax: 6,
            lb2_ns: vec![10, 12],
            lb2_extra_levels: 3,
            quasirandom_c: 0.125,
            quasirandom_ns: vec![10, 12, 16],
            lr_conservation_ns: vec![5, 8],
            lr_conservation_size: 4,
            lr_top_ns: vec![6, 8],
            lr_top_size: 5,
            step_ns: vec![4, 8, 13],
            step_size: 12,
            laplacian_dmax: 8,
            laplacian_nmax: 12,
            oracle_max: 20,
            oracle_nmax: 30,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_override_fields() {
        let c = ExperimentConfig::from_toml("[haar]\nn = 5\nfamily = \"SU\"\n[level_d]\nalphas = [0.3]\n").unwrap();
        assert_eq!(c.haar.n, 5);
        assert_eq!(c.haar.family, Family::SU);
        assert_eq!(c.haar.samples, 100_000);
        assert_eq!(c.level_d.alphas, vec![0.3]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("[haar]\nsamplez = 3\n"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_toml("[nope]\n"), Err(Error::Config(_))));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }
}
