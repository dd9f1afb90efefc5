use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use super::config::HaarConfig;
use super::report::{Cell, Ctx, ExperimentReport, Status};
use super::{ErrSlot, Worst};
use crate::empirical::{monte_carlo, Moments};
use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};
use crate::matrix::{determinant, phi_embedding, Matrix};
use crate::sampling::haar;
use crate::scalar::{Quaternion, Scalar};

pub(crate) const STREAM: u64 = 1;

/// One Haar draw reduced to (unitarity defect, |det − 1|, |X₁₁|²).
fn draw(family: Family, n: usize, rng: &mut crate::RngStream) -> Result<(f64, f64, f64)> {
    fn stats<T: Scalar>(x: &Matrix<T>, det: Complex64) -> (f64, f64, f64) {
        (x.unitarity_defect(), (det - Complex64::new(1.0, 0.0)).norm(), x[(0, 0)].norm_sqr())
    }
    Ok(match family {
        Family::SO => {
            let x = haar::<f64, _>(n, rng)?;
            let d = determinant(&x);
            stats(&x, Complex64::new(d, 0.0))
        }
        Family::SU => {
            let x = haar::<Complex64, _>(n, rng)?;
            let d = determinant(&x);
            stats(&x, d)
        }
        Family::Sp => {
            let x = haar::<Quaternion, _>(n, rng)?;
            let d = determinant(&phi_embedding(&x));
            stats(&x, d)
        }
        Family::Spin => return Err(Error::Unsupported("Spin(n) has no matrix sampler".into())),
    })
}

/// Per-sample unitarity and determinant checks plus the second moment E|X₁₁|² = 1/n.
pub fn run_haar_check(cfg: &HaarConfig, ctx: &Ctx) -> Result<ExperimentReport> {
    let g = GroupSpec::new(cfg.family, cfg.n)?;
    if g.family == Family::Spin {
        return Err(Error::Config("haar-check needs SO, SU or Sp".into()));
    }
    let rng = ctx.stream(STREAM, 0);
    let start = Instant::now();
    let (m, (unit, (det, err))) = monte_carlo(
        cfg.samples,
        &rng,
        || (Moments::default(), (Worst::default(), (Worst::default(), ErrSlot::default()))),
        |r, (m, (unit, (det, err)))| match draw(g.family, g.n, r) {
            Ok((u, d, x)) => {
                unit.push(u);
                det.push(d);
                m.push(x);
            }
            Err(e) => err.0 = Some(e),
        },
    );
    if let Some(e) = err.0 {
        return Err(e);
    }
    let est = m.estimate(&rng);
    let target = 1.0 / g.n as f64;
    let params = json!({"samples": cfg.samples});
    let with_provenance = |mut c: Cell| {
        c.n_samples = Some(cfg.samples);
        c.stream = Some(rng.stream_id());
        c
    };
    let unit = with_provenance(Cell::exact("max_unitarity_defect", params.clone(), unit.0, format!("< {:e}", cfg.unitarity_tol), Status::from_bool(unit.0 < cfg.unitarity_tol)));
    let det = with_provenance(Cell::exact("max_det_deviation", params, det.0, format!("< {:e}", cfg.det_tol), Status::from_bool(det.0 < cfg.det_tol)));
    let mut second = Cell::estimate(
        "second_moment",
        json!({"target": target, "tolerance": cfg.second_moment_tol}),
        &est,
        format!("|E|X11|² − {target}| ≤ {}", cfg.second_moment_tol),
        Status::from_bool((est.value - target).abs() <= cfg.second_moment_tol),
    );
    ctx.stamp(&mut second, start);
    Ok(ExperimentReport::new("haar-check", Some(g.to_string()), ctx.seed, vec![], vec![unit, det, second]))
}
