use std::time::Instant;

use serde_json::json;

use super::config::LevelDConfig;
use super::report::{Cell, Ctx, ExperimentReport, Status};
use crate::empirical::{fit_basis_with, project_low_degree_norm, FeatureFamily, IndicatorSpec, Sense, Target, Z_BAND};
use crate::error::{Error, Result};
use crate::group::GroupSpec;

pub(crate) const STREAM: u64 = 3;

/// α²(C·log(1/α)/d)^d, equal to α² at d = 0.
pub fn level_d_envelope(alpha: f64, d: usize, c: f64) -> f64 {
    if d == 0 {
        return alpha * alpha;
    }
    alpha * alpha * (c * (1.0 / alpha).ln() / d as f64).powi(d as i32)
}

/// ‖f^{≤d}‖² for caps of measure α on SO(n) against [α², min(envelope, α)] with the 3·se band.
pub fn run_level_d(cfg: &LevelDConfig, ctx: &Ctx) -> Result<ExperimentReport> {
    let g = GroupSpec::so(cfg.n);
    if cfg.alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::Config(format!("cap measures must lie in (0, 1], got {:?}", cfg.alphas)));
    }
    let mut cells = Vec::new();
    for (di, &d) in cfg.ds.iter().enumerate() {
        let in_range: Vec<(usize, f64)> = cfg.alphas.iter().copied().enumerate().filter(|&(_, a)| d as f64 <= 0.5 * (1.0 / a).ln() || d == 0).collect();
        let basis = if in_range.is_empty() || 2 * d >= cfg.n {
            None
        } else {
            Some(fit_basis_with(&g, d, FeatureFamily::Zonal, cfg.n_fit, &ctx.stream(STREAM, 1000 + di as u64))?)
        };
        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
            let params = json!({"n": cfg.n, "alpha": alpha, "d": d});
            let id = format!("level_d n={} α={alpha} d={d}", cfg.n);
            if 2 * d >= cfg.n {
                cells.push(Cell::skipped(id, params, format!("d = {d} needs d < n/2")));
                continue;
            }
            if !in_range.iter().any(|&(i, _)| i == ai) {
                cells.push(Cell::skipped(id, params, format!("d > ½·log(1/α) = {:.3}", 0.5 * (1.0 / alpha).ln())));
                continue;
            }
            let basis = basis.as_ref().expect("basis fitted for in-range cells");
            let start = Instant::now();
            let cap = IndicatorSpec::cap_with_measure(cfg.n, alpha, Sense::Gt);
            let rng = ctx.stream(STREAM, (di * cfg.alphas.len() + ai) as u64);
            let e = project_low_degree_norm(Target::Indicator(&cap), basis, cfg.n_eval, &rng)?;
            let envelope = level_d_envelope(alpha, d, cfg.envelope);
            let upper = envelope.min(alpha);
            let lo = alpha * alpha;
            let ok = e.value >= lo - Z_BAND * e.std_error && e.value <= upper + Z_BAND * e.std_error;
            let mut c = Cell::estimate(
                id,
                json!({"n": cfg.n, "alpha": alpha, "d": d, "threshold": cap_threshold(&cap), "envelope": envelope, "rank": basis.rank, "n_fit": basis.n_fit}),
                &e,
                format!("∈ [α² = {lo:.4e}, min(α²({}·log(1/α)/d)^d, α) = {upper:.4e}] ± 3·se", cfg.envelope),
                Status::from_bool(ok),
            );
            ctx.stamp(&mut c, start);
            cells.push(c);
        }
    }
    let notes = vec![
        "caps {X11 > t} are bi-invariant under the stabilizer of e1, so the projection uses the zonal features 1, X11, …, X11^d".to_string(),
        format!("envelope constant C = {}; cells with d > ½·log(1/α) lie outside the hypotheses and are skipped", cfg.envelope),
    ];
    Ok(ExperimentReport::new("level-d", Some(g.to_string()), ctx.seed, notes, cells))
}

fn cap_threshold(cap: &IndicatorSpec) -> Option<f64> {
    match cap {
        IndicatorSpec::Cap { t, .. } => Some(*t),
        _ => None,
    }
}
