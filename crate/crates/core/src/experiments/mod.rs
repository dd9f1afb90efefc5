//! Scripted end-to-end runs: each returns a report of cells with values, bounds and verdicts.
//! Cell streams are `(seed, experiment id)` children, so reports depend only on config and seed.

mod config;
mod coupling;
mod haar;
mod level_d;
mod mixing;
mod report;
mod repr;

pub use config::{CouplingConfig, DoublingConfig, ExperimentConfig, HaarConfig, LevelDConfig, MixingConfig, ProductFreeConfig, ReprConfig};
pub use coupling::{diagonal_tuples, run_coupling_suite, GMD_MULTISETS, OFF_DIAGONAL_PAIRS, PROJECTION_CASES, REGRESSION_SETS};
pub use haar::run_haar_check;
pub use level_d::{level_d_envelope, run_level_d};
pub use mixing::{run_doubling, run_mixing, run_product_free};
pub use report::{fmt_num, render_text, Cell, Ctx, ExperimentReport, RunOutput, Status, Tally, SCHEMA_VERSION};
pub use repr::{dimension_bound, dimension_rows, laplacian_rows, run_repr_audits, BoundKind, DimensionRow, LaplacianRow};

pub(crate) use crate::empirical::ErrSlot;
use crate::empirical::Mergeable;
use crate::error::Result;

/// Running maximum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Worst(pub f64);

impl Worst {
    pub fn push(&mut self, x: f64) {
        if x > self.0 || x.is_nan() {
            self.0 = x;
        }
    }
}

impl Mergeable for Worst {
    fn merge(&mut self, o: Self) {
        self.push(o.0);
    }
}

/// The experiments `all` runs, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Haar,
    Coupling,
    ReprAudit,
    LevelD,
    ProductFree,
    Mixing,
    Doubling,
}

impl Experiment {
    pub const ALL: [Experiment; 7] =
        [Experiment::Haar, Experiment::Coupling, Experiment::ReprAudit, Experiment::LevelD, Experiment::ProductFree, Experiment::Mixing, Experiment::Doubling];

    pub fn run(self, cfg: &ExperimentConfig, ctx: &Ctx) -> Result<ExperimentReport> {
        match self {
            Experiment::Haar => run_haar_check(&cfg.haar, ctx),
            Experiment::Coupling => run_coupling_suite(&cfg.coupling, ctx),
            Experiment::ReprAudit => run_repr_audits(&cfg.repr, ctx),
            Experiment::LevelD => run_level_d(&cfg.level_d, ctx),
            Experiment::ProductFree => run_product_free(&cfg.product_free, ctx),
            Experiment::Mixing => run_mixing(&cfg.mixing, ctx),
            Experiment::Doubling => run_doubling(&cfg.doubling, ctx),
        }
    }
}

pub fn run_all(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<ExperimentReport>> {
    Experiment::ALL.iter().map(|e| e.run(cfg, ctx)).collect()
}
