use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;
use serde_json::json;

use super::config::CouplingConfig;
use super::report::{Cell, Ctx, ExperimentReport, Status};
use super::{ErrSlot, Worst};
use crate::empirical::{
    comf_projection_mc, gmd_moment, lambda_s_regression, mc_means, monte_carlo, noise_pairing_with_floor, norm_under, off_diagonal_pairing, Distribution,
    EstimateWithCI, Z_BAND,
};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::matrix::Matrix;
use crate::partitions::{partitions_of, Partition};
use crate::sampling::{couple, gaussian_matrix, haar, over_gaussian_block, sample_gmd};
use crate::weyl::{comfortable_junta, lambda_s, MonomialIndex};

pub(crate) const STREAM: u64 = 2;

/// Off-diagonal pairs as 1-based column tuples over rows 1..d.
pub const OFF_DIAGONAL_PAIRS: [(&[usize], &[usize]); 10] = [
    (&[1], &[2]),
    (&[1, 2], &[1, 3]),
    (&[1, 2], &[2, 1]),
    (&[1, 2], &[3, 4]),
    (&[1, 2, 3], &[1, 2, 4]),
    (&[1, 2, 3], &[2, 1, 3]),
    (&[1, 2, 3], &[2, 3, 1]),
    (&[1, 2, 3, 4], &[1, 2, 3, 5]),
    (&[1, 2, 3, 4], &[2, 1, 4, 3]),
    (&[1, 2, 3, 4], &[1, 3, 2, 4]),
];

/// GMD index multisets, 0-based.
pub const GMD_MULTISETS: [&[(usize, usize)]; 10] = [
    &[(0, 1)],
    &[(0, 1), (0, 1)],
    &[(0, 0), (0, 0)],
    &[(0, 0)],
    &[(0, 1), (0, 2)],
    &[(0, 0), (1, 1), (0, 1)],
    &[(1, 2), (1, 2), (0, 0)],
    &[(0, 1), (0, 1), (2, 3), (2, 3)],
    &[(1, 1), (1, 1), (2, 2), (2, 2)],
    &[(0, 3), (0, 3), (1, 3), (1, 3)],
];

/// Column-comfortable monomials for the λ_S regression, 0-based.
pub const REGRESSION_SETS: [&[(usize, usize)]; 4] = [&[(0, 0)], &[(0, 0), (1, 1)], &[(0, 1), (1, 0)], &[(0, 2), (1, 0), (2, 1)]];

/// Junta shapes for the projection identity, with n.
pub const PROJECTION_CASES: [(&[u32], usize); 3] = [(&[1], 8), (&[1, 1], 10), (&[2], 10)];

pub fn run_coupling_suite(cfg: &CouplingConfig, ctx: &Ctx) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    let mut label = 0u64;
    let mut next = || {
        label += 1;
        ctx.stream(STREAM, label)
    };
    cells.extend(roundtrip(cfg, ctx, &next())?);
    cells.extend(forward(cfg, ctx, &next())?);
    cells.extend(lambda_bracket(cfg, ctx)?);
    for d in 1..=cfg.diagonal_dmax {
        cells.extend(diagonal(cfg, ctx, d, &next())?);
    }
    for &n in &cfg.off_diagonal_ns {
        for (i, j) in OFF_DIAGONAL_PAIRS {
            let rng = next();
            let start = Instant::now();
            let s = row_form(i);
            let t = row_form(j);
            let b = off_diagonal_pairing(&s, &t, n, cfg.off_diagonal_samples, &rng)?;
            let mut c = Cell::estimate(
                format!("offdiag n={n} I={} J={}", tuple(i), tuple(j)),
                json!({"n": n, "I": i, "J": j, "ell": b.ell, "d": i.len()}),
                &b.estimate,
                format!("|·| ≤ ε_{} = {:.4} + 3·se", b.ell, b.bound),
                Status::from_bool(b.abs_within(Z_BAND)),
            );
            ctx.stamp(&mut c, start);
            cells.push(c);
        }
    }
    for &n in &cfg.gmd_ns {
        for idx in GMD_MULTISETS {
            let rng = next();
            let start = Instant::now();
            let b = gmd_moment(idx, n, cfg.gmd_samples, &rng)?;
            let one_based: Vec<(usize, usize)> = idx.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
            let mut c = Cell::estimate(
                format!("gmd n={n} {}", multiset(idx)),
                json!({"n": n, "indices": one_based, "ell": b.ell}),
                &b.estimate,
                format!("≤ n^(−{}/2) = {:.4} + 3·se", b.ell, b.bound),
                Status::from_bool(b.within(Z_BAND)),
            );
            ctx.stamp(&mut c, start);
            cells.push(c);
        }
    }
    for s in REGRESSION_SETS {
        let rng = next();
        let start = Instant::now();
        let m = MonomialIndex::from_pairs(s);
        let r = lambda_s_regression(&m, cfg.regression_n, cfg.regression_samples, &rng)?;
        let mut c = Cell::estimate(
            format!("lambda_regression n={} S={m}", cfg.regression_n),
            json!({"n": cfg.regression_n, "S": m, "exact": r.exact}),
            &r.slope,
            format!("= λ_S = {:.6} ± 3·se", r.exact),
            Status::from_bool(r.slope.agrees_with(r.exact, Z_BAND)),
        );
        ctx.stamp(&mut c, start);
        cells.push(c);
    }
    let g = GroupSpec::so(cfg.noise_n);
    for &d in &cfg.noise_ds {
        for lam in partitions_of(d as u32, d) {
            let f = comfortable_junta(&lam, cfg.noise_n)?;
            for &rho in &cfg.noise_rhos {
                let rng = next();
                let start = Instant::now();
                let floor = (rho / 4.0).powi(d as i32);
                let p = noise_pairing_with_floor(&f, rho, &g, floor, cfg.noise_samples, &rng)?;
                let mut c = Cell::estimate(
                    format!("noise n={} λ={lam} ρ={rho}", cfg.noise_n),
                    json!({"n": cfg.noise_n, "partition": lam, "rho": rho, "floor": floor, "norm_sq": p.norm_sq.value, "gap": p.floor_gap.value, "gap_se": p.floor_gap.std_error}),
                    &p.pairing,
                    format!("≥ (ρ/4)^{d}·‖f‖²_μ − 3·se (gap {:.4e} ± {:.1e})", p.floor_gap.value, p.floor_gap.std_error),
                    Status::from_bool(p.floor_gap.value >= -Z_BAND * p.floor_gap.std_error),
                );
                ctx.stamp(&mut c, start);
                cells.push(c);
            }
        }
    }
    for (shape, n) in PROJECTION_CASES {
        let rng = next();
        let start = Instant::now();
        let lam = Partition::from_slice(shape);
        let f = comfortable_junta(&lam, n)?;
        let p = comf_projection_mc(&f, cfg.projection_samples, &rng)?;
        let mut c = Cell::estimate(
            format!("comf_projection n={n} λ={lam}"),
            json!({"n": n, "partition": lam, "factor": p.factor, "lhs": p.lhs.value, "rhs": p.rhs.value}),
            &p.diff,
            format!("Σ⟨R_V f, H_S⟩² − {:.4}·f(√nV)² = 0 ± 3·se", p.factor),
            Status::from_bool(p.diff.agrees_with(0.0, Z_BAND)),
        );
        ctx.stamp(&mut c, start);
        cells.push(c);
    }
    for d in 1..=cfg.norm_dmax {
        for lam in partitions_of(d as u32, d) {
            let f = comfortable_junta(&lam, cfg.norm_n)?;
            let start = Instant::now();
            let mu = norm_under(Distribution::Mu, &f, cfg.norm_samples, &next())?;
            let gamma = norm_under(Distribution::Gamma, &f, cfg.norm_samples, &next())?;
            let ratio = norm_ratio(&mu, &gamma);
            let (lo, hi) = (1.0 / (1.0 + cfg.norm_eps), 1.0 + cfg.norm_eps);
            let ok = ratio.value + Z_BAND * ratio.std_error >= lo && ratio.value - Z_BAND * ratio.std_error <= hi;
            let mut c = Cell::estimate(
                format!("norm_ratio n={} λ={lam}", cfg.norm_n),
                json!({"n": cfg.norm_n, "partition": lam, "mu_sq": mu.value, "gamma_sq": gamma.value, "eps": cfg.norm_eps}),
                &ratio,
                format!("‖f‖_μ/‖f‖_γ ∈ [{lo:.4}, {hi:.4}] ± 3·se"),
                Status::from_bool(ok),
            );
            ctx.stamp(&mut c, start);
            cells.push(c);
        }
    }
    let notes = vec![
        "ν-diagonal cells share draws within each degree".to_string(),
        format!("covariance cells use {} entry pairs, each held to 3·se", cfg.covariance_pairs),
    ];
    Ok(ExperimentReport::new("coupling", None, ctx.seed, notes, cells))
}

fn row_form(cols: &[usize]) -> MonomialIndex {
    MonomialIndex::from_pairs(&cols.iter().enumerate().map(|(k, &c)| (k, c - 1)).collect::<Vec<_>>())
}

fn tuple(cols: &[usize]) -> String {
    let s: Vec<String> = cols.iter().map(|c| c.to_string()).collect();
    format!("({})", s.join(","))
}

fn multiset(idx: &[(usize, usize)]) -> String {
    let s: Vec<String> = idx.iter().map(|(i, j)| format!("g{},{}", i + 1, j + 1)).collect();
    s.join("·")
}

/// √(a/b) with a delta-method standard error.
fn norm_ratio(a: &EstimateWithCI, b: &EstimateWithCI) -> EstimateWithCI {
    let r = (a.value / b.value).sqrt();
    let rel = ((a.std_error / a.value).powi(2) + (b.std_error / b.value).powi(2)).sqrt();
    EstimateWithCI { value: r, std_error: 0.5 * r * rel, n_samples: a.n_samples + b.n_samples, seed: a.seed, stream: a.stream }
}

/// √n·GS(Y)·G reproduces Y.
fn roundtrip(cfg: &CouplingConfig, ctx: &Ctx, rng: &crate::RngStream) -> Result<Vec<Cell>> {
    let n = cfg.roundtrip_n;
    let start = Instant::now();
    let sqrt_n = (n as f64).sqrt();
    let (worst, err) = monte_carlo(
        cfg.roundtrip_samples,
        rng,
        || (Worst::default(), ErrSlot::default()),
        |r, (w, err)| {
            let y: Matrix<f64> = gaussian_matrix(n, n, r);
            match couple(&y) {
                Ok(c) => w.push(c.x.scaled(sqrt_n).matmul(c.g.as_matrix()).max_abs_diff(&y)),
                Err(e) => err.0 = Some(e),
            }
        },
    );
    if let Some(e) = err.0 {
        return Err(e);
    }
    let mut c = Cell::exact(
        format!("roundtrip n={n}"),
        json!({"n": n, "samples": cfg.roundtrip_samples}),
        worst.0,
        format!("max |√n·X·G − Y| < {:e}", cfg.roundtrip_tol),
        Status::from_bool(worst.0 < cfg.roundtrip_tol),
    );
    c.n_samples = Some(cfg.roundtrip_samples);
    c.stream = Some(rng.stream_id());
    ctx.stamp(&mut c, start);
    Ok(vec![c])
}

/// Pairs of distinct flat entry indices, drawn without repetition.
fn entry_pairs(n: usize, k: usize, rng: &crate::RngStream) -> Result<Vec<(usize, usize)>> {
    let total = n * n * (n * n - 1) / 2;
    if k > total {
        return Err(Error::Config(format!("{k} covariance pairs requested, only {total} exist")));
    }
    let mut r = rng.child(u64::MAX);
    let mut set = BTreeSet::new();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let a = r.gen_range(0..n * n);
        let b = r.gen_range(0..n * n);
        let p = (a.min(b), a.max(b));
        if a != b && set.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// √n·X·G with X Haar and G ~ GMD: pooled entry mean and variance, and entry-pair covariances.
fn forward(cfg: &CouplingConfig, ctx: &Ctx, rng: &crate::RngStream) -> Result<Vec<Cell>> {
    let n = cfg.roundtrip_n;
    let start = Instant::now();
    let pairs = entry_pairs(n, cfg.covariance_pairs, rng)?;
    let sqrt_n = (n as f64).sqrt();
    let nn = (n * n) as f64;
    let est = mc_means(2 + pairs.len(), cfg.forward_samples, rng, |r, out| {
        let x = haar::<f64, _>(n, r).expect("Gaussian matrix has full rank");
        let g = sample_gmd::<f64, _>(n, r);
        let y = x.scaled(sqrt_n).matmul(g.as_matrix());
        let e = y.as_slice();
        out[0] = e.iter().sum::<f64>() / nn;
        out[1] = e.iter().map(|v| v * v).sum::<f64>() / nn;
        for (o, &(a, b)) in out[2..].iter_mut().zip(&pairs) {
            *o = e[a] * e[b];
        }
    });
    let mut cells = vec![
        Cell::estimate(format!("forward_mean n={n}"), json!({"n": n}), &est[0], "0 ± 3·se", Status::from_bool(est[0].agrees_with(0.0, Z_BAND))),
        Cell::estimate(format!("forward_variance n={n}"), json!({"n": n}), &est[1], "1 ± 3·se", Status::from_bool(est[1].agrees_with(1.0, Z_BAND))),
    ];
    for (e, &(a, b)) in est[2..].iter().zip(&pairs) {
        let (ai, aj, bi, bj) = (a / n + 1, a % n + 1, b / n + 1, b % n + 1);
        cells.push(Cell::estimate(
            format!("forward_cov n={n} y{ai},{aj}·y{bi},{bj}"),
            json!({"n": n, "a": [ai, aj], "b": [bi, bj]}),
            e,
            "0 ± 3·se",
            Status::from_bool(e.agrees_with(0.0, Z_BAND)),
        ));
    }
    if let Some(c) = cells.first_mut() {
        ctx.stamp(c, start);
    }
    Ok(cells)
}

/// Exhaustive λ_S over column-comfortable S inside the d×d box: 2^{−d} ≤ λ_S ≤ 1 and |λ_S − 1| ≤ 2d²/n.
fn lambda_bracket(cfg: &CouplingConfig, ctx: &Ctx) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &n in &cfg.lambda_ns {
        for d in 1..=cfg.lambda_dmax.min(n / 2) {
            let start = Instant::now();
            let (lo, tol) = (0.5f64.powi(d as i32), 2.0 * (d * d) as f64 / n as f64);
            let mut count = 0usize;
            let mut min_lambda = f64::INFINITY;
            let mut worst_gap = 0.0f64;
            let mut ok = true;
            // choice[j] = 0 leaves column j out, r > 0 puts x_{r,j} in S
            let mut choice = vec![0usize; d];
            loop {
                let pairs: Vec<(usize, usize)> = choice.iter().enumerate().filter(|(_, &r)| r > 0).map(|(j, &r)| (r - 1, j)).collect();
                let l = lambda_s(&MonomialIndex::from_pairs(&pairs), n)?;
                count += 1;
                min_lambda = min_lambda.min(l);
                worst_gap = worst_gap.max((l - 1.0).abs());
                ok &= lo <= l && l <= 1.0 && (l - 1.0).abs() <= tol;
                let mut k = 0;
                while k < d && choice[k] == d {
                    choice[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
                choice[k] += 1;
            }
            let mut c = Cell::exact(
                format!("lambda_bracket n={n} d={d}"),
                json!({"n": n, "d": d, "sets": count, "min_lambda": min_lambda}),
                worst_gap,
                format!("max |λ_S − 1| ≤ 2d²/n = {tol:.4}, min λ_S = {min_lambda:.4} ≥ 2^−{d}"),
                Status::from_bool(ok),
            );
            ctx.stamp(&mut c, start);
            cells.push(c);
        }
    }
    Ok(cells)
}

/// Column tuples (0-based) for the ν-diagonal cells of degree d: all permutations of [d], then the last d columns.
pub fn diagonal_tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn perms(rest: Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for (i, &x) in rest.iter().enumerate() {
            let mut r = rest.clone();
            r.remove(i);
            cur.push(x);
            perms(r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    perms((0..d).collect(), &mut Vec::new(), &mut out);
    out.push((0..d).map(|k| n - 1 - k).collect());
    out
}

/// ‖x_I‖²_ν = 1 for every row-distinct, column-distinct I.
fn diagonal(cfg: &CouplingConfig, ctx: &Ctx, d: usize, rng: &crate::RngStream) -> Result<Vec<Cell>> {
    let n = cfg.diagonal_n;
    if d > n {
        return Err(Error::Config(format!("diagonal degree {d} exceeds n = {n}")));
    }
    let start = Instant::now();
    let tuples = diagonal_tuples(d, n);
    let est = mc_means(tuples.len(), cfg.diagonal_samples, rng, |r, out| {
        let z = over_gaussian_block(n, d, n, r);
        for (o, t) in out.iter_mut().zip(&tuples) {
            *o = t.iter().enumerate().map(|(i, &c)| z[(i, c)] * z[(i, c)]).product();
        }
    });
    let mut cells: Vec<Cell> = tuples
        .iter()
        .zip(&est)
        .map(|(t, e)| {
            let cols: Vec<usize> = t.iter().map(|c| c + 1).collect();
            Cell::estimate(
                format!("diag n={n} d={d} I={}", tuple(&cols)),
                json!({"n": n, "d": d, "columns": cols}),
                e,
                "1 ± 3·se",
                Status::from_bool(e.agrees_with(1.0, Z_BAND)),
            )
        })
        .collect();
    if let Some(c) = cells.first_mut() {
        ctx.stamp(c, start);
    }
    Ok(cells)
}
