use std::time::Instant;

use num::bigint::BigInt;
use num::{BigRational, One};
use serde::Serialize;
use serde_json::json;

use super::config::ReprConfig;
use super::report::{Cell, Ctx, ExperimentReport, Status};
use crate::error::Result;
use crate::group::{Family, GroupSpec};
use crate::laplacian::{check_eigenvalue_bound, format_rational, laplacian_eigenvalue_exact, laplacian_eigenvalue_mirrored};
use crate::partitions::{
    dually_efficient_truncation, efficient_truncation, level, littlewood_richardson_su, partitions_of, partitions_of_level, quasirandom_profile,
    step_vector, to_f64, weyl_dimension, Partition,
};

fn factorial(d: u32) -> BigInt {
    (1..=d).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Which dimension lower bound applies at level d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// (n−d)^d/d! for SO/Spin/Sp, C(⌊n/2⌋, d) for SU; levels d < n/2.
    Low,
    /// exp(n/32) for SO/Spin, exp(n/16) for Sp; levels d ≥ n/2.
    High,
    /// SU above n/2: no bound is claimed.
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionRow {
    pub family: Family,
    pub n: usize,
    pub partition: Partition,
    pub level: u32,
    pub dimension: String,
    pub bound: Option<f64>,
    pub kind: BoundKind,
    pub pass: bool,
}

/// Checks `dim` against the level-`d` bound; the low-level bounds are compared exactly.
pub fn dimension_bound(g: &GroupSpec, d: u32, dim: &BigInt) -> (BoundKind, Option<f64>, bool) {
    let n = g.n as u64;
    if 2 * (d as u64) < n {
        match g.family {
            Family::SU => {
                let b = binomial(n / 2, d as u64);
                (BoundKind::Low, Some(to_f64(&b)), *dim >= b)
            }
            _ => {
                let num = BigInt::from(n - d as u64).pow(d);
                let den = factorial(d);
                let b = BigRational::new(num.clone(), den.clone());
                (BoundKind::Low, Some(to_f64(&num) / to_f64(&den)), BigRational::from_integer(dim.clone()) >= b)
            }
        }
    } else {
        let b = match g.family {
            Family::SO | Family::Spin => (n as f64 / 32.0).exp(),
            Family::Sp => (n as f64 / 16.0).exp(),
            Family::SU => return (BoundKind::None, None, true),
        };
        (BoundKind::High, Some(b), to_f64(dim) >= b)
    }
}

/// Every valid highest weight of level ≤ dmax with its dimension and bound.
pub fn dimension_rows(g: &GroupSpec, dmax: u32) -> Result<Vec<DimensionRow>> {
    let mut rows = Vec::new();
    for d in 0..=dmax {
        rows.extend(dimension_rows_at(g, d)?);
    }
    Ok(rows)
}

fn dimension_rows_at(g: &GroupSpec, d: u32) -> Result<Vec<DimensionRow>> {
    partitions_of_level(g, d)
        .into_iter()
        .map(|lam| {
            let dim = weyl_dimension(g, &lam)?;
            let (kind, bound, pass) = dimension_bound(g, d, &dim);
            Ok(DimensionRow { family: g.family, n: g.n, partition: lam, level: d, dimension: dim.to_string(), bound, kind, pass })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LaplacianRow {
    pub family: Family,
    pub n: usize,
    pub partition: Partition,
    pub level: u32,
    pub eigenvalue: String,
    pub bound: i64,
    pub pass: bool,
}

/// λ_v for every highest weight of level ≤ dmax against 0 ≥ λ_v ≥ −2D² − 2nD.
pub fn laplacian_rows(g: &GroupSpec, dmax: u32) -> Result<Vec<LaplacianRow>> {
    let mut rows = Vec::new();
    for d in 0..=dmax {
        for lam in partitions_of_level(g, d) {
            let check = check_eigenvalue_bound(g.family, &lam, g.n)?;
            let ev = laplacian_eigenvalue_exact(g.family, &lam, g.n)?;
            let mirror_ok = laplacian_eigenvalue_mirrored(g.family, &lam, g.n)? == ev;
            rows.push(LaplacianRow {
                family: g.family,
                n: g.n,
                partition: lam,
                level: check.level,
                eigenvalue: format_rational(&ev),
                bound: check.bound as i64,
                pass: check.pass && mirror_ok,
            });
        }
    }
    Ok(rows)
}

fn audit_cell(id: String, params: serde_json::Value, checked: usize, failures: &[String], bound: &str) -> Cell {
    let mut c = Cell::exact(id, params, checked as f64, bound, Status::from_bool(failures.is_empty()));
    if !failures.is_empty() {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        c.note = Some(format!("{} failures, first: {}", failures.len(), shown.join("; ")));
    }
    c
}

/// Exact dimension, LR, step-vector and Laplacian audits. Cell values count the cases checked.
pub fn run_repr_audits(cfg: &ReprConfig, ctx: &Ctx) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    let mut push = |mut c: Cell, start: Instant| {
        ctx.stamp(&mut c, start);
        cells.push(c);
    };

    let start = Instant::now();
    let (checked, failures) = dimension_oracles(cfg)?;
    push(audit_cell("dimension_oracles".into(), json!({"max": cfg.oracle_max, "nmax": cfg.oracle_nmax}), checked, &failures, "exact equality"), start);

    for family in [Family::SO, Family::Sp, Family::SU] {
        for &n in &cfg.lb1_ns {
            let start = Instant::now();
            let g = GroupSpec::new(family, n)?;
            let (mut checked, mut failures) = (0, Vec::new());
            for d in 0..=cfg.lb1_dmax {
                if 2 * d as usize >= n {
                    break;
                }
                for row in dimension_rows_at(&g, d)? {
                    checked += 1;
                    if !row.pass {
                        failures.push(format!("{} dim {} < {:?}", row.partition, row.dimension, row.bound));
                    }
                }
            }
            let bound = if family == Family::SU { "dim ≥ C(⌊n/2⌋, d)" } else { "dim ≥ (n−d)^d/d!" };
            push(audit_cell(format!("lb1 {g}"), json!({"n": n, "dmax": cfg.lb1_dmax}), checked, &failures, bound), start);
        }
    }

    for family in [Family::SO, Family::Sp] {
        for &n in &cfg.lb2_ns {
            let start = Instant::now();
            let g = GroupSpec::new(family, n)?;
            let lo = n.div_ceil(2) as u32;
            let (checked, failures) = high_level(&g, lo..=lo + cfg.lb2_extra_levels)?;
            let bound = if family == Family::Sp { "dim ≥ exp(n/16)" } else { "dim ≥ exp(n/32)" };
            push(audit_cell(format!("lb2 {g}"), json!({"n": n, "levels": [lo, lo + cfg.lb2_extra_levels]}), checked, &failures, bound), start);
        }
    }
    let start = Instant::now();
    let (checked, failures) = high_level(&GroupSpec::sp(6), 7..=7)?;
    push(audit_cell("lb2 Sp(6) level 7".into(), json!({"n": 6, "levels": [7, 7]}), checked, &failures, "dim ≥ exp(n/16)"), start);

    let profile_c = cfg.quasirandom_c;
    for family in [Family::SO, Family::SU, Family::Sp] {
        for &n in &cfg.quasirandom_ns {
            let start = Instant::now();
            let g = GroupSpec::new(family, n)?;
            let minima = level_minima(&g, (n / 2 + 3) as u32)?;
            let passes = |c: f64| -> Result<bool> {
                let q = quasirandom_profile(n, c)?;
                Ok(minima.iter().all(|&(d, m)| m >= q.q(d)))
            };
            let ok = passes(profile_c)?;
            let max_c = max_passing_c(&passes)?;
            let mut c = Cell::exact(
                format!("quasirandom {g}"),
                json!({"n": n, "c": profile_c, "levels": minima.len(), "min_dims": minima.iter().map(|&(d, m)| json!([d, m])).collect::<Vec<_>>()}),
                max_c,
                format!("min dim at level d ≥ Q_d with c = {profile_c}"),
                Status::from_bool(ok),
            );
            c.note = Some(format!("largest passing c on this range: {max_c:.4}"));
            push(c, start);
        }
    }

    for &n in &cfg.lr_conservation_ns {
        let start = Instant::now();
        let (checked, failures) = lr_conservation(n, cfg.lr_conservation_size)?;
        push(audit_cell(format!("lr_conservation SU({n})"), json!({"n": n, "max_size": cfg.lr_conservation_size}), checked, &failures, "dim α·dim β = Σ mult·dim λ"), start);
    }
    for &n in &cfg.lr_top_ns {
        let start = Instant::now();
        let (checked, failures) = lr_top(n, cfg.lr_top_size)?;
        push(audit_cell(format!("lr_top SU({n})"), json!({"n": n, "max_size": cfg.lr_top_size}), checked, &failures, "one constituent at level |α| + level(β), the rest lower"), start);
    }
    for &n in &cfg.step_ns {
        let start = Instant::now();
        let (mut checked, mut failures) = (0, Vec::new());
        for size in 0..=cfg.step_size {
            for lam in partitions_of(size, n - 1) {
                checked += 1;
                if step_vector(&lam, n)?.to_partition() != lam {
                    failures.push(lam.to_string());
                }
            }
        }
        push(audit_cell(format!("step_roundtrip n={n}"), json!({"n": n, "max_size": cfg.step_size}), checked, &failures, "steps → partition is the identity"), start);
    }

    for family in Family::ALL {
        let start = Instant::now();
        let (mut checked, mut failures) = (0, Vec::new());
        let mut wide_failures = Vec::new();
        let lo = family.min_n().max(if matches!(family, Family::SO | Family::Spin) { 3 } else { 1 });
        for n in lo..=cfg.laplacian_nmax {
            for row in laplacian_rows(&GroupSpec::new(family, n)?, cfg.laplacian_dmax)? {
                checked += 1;
                if !row.pass {
                    failures.push(format!("{family}({n}) {} λ = {} bound {}", row.partition, row.eigenvalue, row.bound));
                }
                if family == Family::Sp {
                    let ev = laplacian_eigenvalue_exact(family, &row.partition, n)?;
                    let d = row.level as i64;
                    if ev < BigRational::from_integer(BigInt::from(-2 * d * d - 4 * n as i64 * d)) {
                        wide_failures.push(format!("Sp({n}) {}", row.partition));
                    }
                }
            }
        }
        let mut c = audit_cell(format!("laplacian {family}"), json!({"nmax": cfg.laplacian_nmax, "dmax": cfg.laplacian_dmax}), checked, &failures, "0 ≥ λ_v ≥ −2D² − 2nD");
        if family == Family::Sp && !failures.is_empty() {
            let note = c.note.take().unwrap_or_default();
            c.note = Some(format!("{note}; with ‖u_j‖² = 2, ⟨v, ρ⟩ ≤ 2nD gives only λ_v ≥ −2D² − 4nD, and the vector rep attains −4n − 2"));
        }
        push(c, start);
        if family == Family::Sp {
            let start = Instant::now();
            let mut c = audit_cell("laplacian Sp 4nD".into(), json!({"nmax": cfg.laplacian_nmax, "dmax": cfg.laplacian_dmax}), checked, &wide_failures, "0 ≥ λ_v ≥ −2D² − 4nD");
            if wide_failures.is_empty() {
                c.status = Status::Info;
            }
            push(c, start);
        }
    }
    let start = Instant::now();
    let mut failures = Vec::new();
    for l in 0..=cfg.oracle_max {
        let ev = laplacian_eigenvalue_exact(Family::SO, &Partition::from_slice(&[l]), 3)?;
        let want = BigRational::from_integer(BigInt::from(-2 * l as i64 - 2 * (l * l) as i64));
        if ev != want {
            failures.push(format!("ℓ = {l}: {}", format_rational(&ev)));
        }
    }
    push(audit_cell("laplacian SO(3) spherical".into(), json!({"max": cfg.oracle_max}), cfg.oracle_max as usize + 1, &failures, "λ = −2ℓ − 2ℓ²"), start);

    let notes = vec!["exact arithmetic throughout; cell values count the cases checked".to_string()];
    Ok(ExperimentReport::new("repr-audit", None, ctx.seed, notes, cells))
}

fn dimension_oracles(cfg: &ReprConfig) -> Result<(usize, Vec<String>)> {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |what: String, got: BigInt, want: u64| {
        checked += 1;
        if got != BigInt::from(want) {
            failures.push(format!("{what}: {got} ≠ {want}"));
        }
    };
    for l in 0..=cfg.oracle_max {
        let lam = Partition::from_slice(&[l]);
        check(format!("SO(3) ({l})"), weyl_dimension(&GroupSpec::so(3), &lam)?, 2 * l as u64 + 1);
        check(format!("SU(2) ({l})"), weyl_dimension(&GroupSpec::su(2), &lam)?, l as u64 + 1);
        check(format!("Sp(1) ({l})"), weyl_dimension(&GroupSpec::sp(1), &lam)?, l as u64 + 1);
    }
    let std = Partition::from_slice(&[1]);
    for n in 1..=cfg.oracle_nmax {
        if n >= 3 {
            check(format!("SO({n}) (1)"), weyl_dimension(&GroupSpec::so(n), &std)?, n as u64);
        }
        if n >= 2 {
            check(format!("SU({n}) (1)"), weyl_dimension(&GroupSpec::su(n), &std)?, n as u64);
        }
        check(format!("Sp({n}) (1)"), weyl_dimension(&GroupSpec::sp(n), &std)?, 2 * n as u64);
    }
    Ok((checked, failures))
}

fn high_level(g: &GroupSpec, levels: std::ops::RangeInclusive<u32>) -> Result<(usize, Vec<String>)> {
    let (mut checked, mut failures) = (0, Vec::new());
    for d in levels {
        for lam in partitions_of_level(g, d) {
            let dim = weyl_dimension(g, &lam)?;
            let (_, bound, pass) = dimension_bound(g, d, &dim);
            checked += 1;
            if !pass {
                failures.push(format!("{lam} dim {dim} < {bound:?}"));
            }
        }
    }
    Ok((checked, failures))
}

/// (level, smallest dimension at that level) for levels 1..=dmax that have a representation.
fn level_minima(g: &GroupSpec, dmax: u32) -> Result<Vec<(u32, f64)>> {
    let mut out = Vec::new();
    for d in 1..=dmax {
        let mut best: Option<BigInt> = None;
        for lam in partitions_of_level(g, d) {
            let dim = weyl_dimension(g, &lam)?;
            if best.as_ref().map_or(true, |b| dim < *b) {
                best = Some(dim);
            }
        }
        if let Some(b) = best {
            out.push((d, to_f64(&b)));
        }
    }
    Ok(out)
}

/// Largest c ∈ (0, 1] passing; Q_d grows with c, so bisection applies.
fn max_passing_c(passes: &dyn Fn(f64) -> Result<bool>) -> Result<f64> {
    if passes(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn lr_conservation(n: usize, max_size: u32) -> Result<(usize, Vec<String>)> {
    let g = GroupSpec::su(n);
    let shapes: Vec<Partition> = (0..=max_size).flat_map(|s| partitions_of(s, n - 1)).collect();
    let (mut checked, mut failures) = (0, Vec::new());
    for a in &shapes {
        let da = weyl_dimension(&g, a)?;
        for b in &shapes {
            let db = weyl_dimension(&g, b)?;
            let mut total = BigInt::from(0);
            for (lam, m) in littlewood_richardson_su(a, b, n) {
                total += weyl_dimension(&g, &lam)? * m;
            }
            checked += 1;
            if total != &da * &db {
                failures.push(format!("{a}⊗{b}: {total} ≠ {}", &da * &db));
            }
        }
    }
    Ok((checked, failures))
}

fn lr_top(n: usize, max_size: u32) -> Result<(usize, Vec<String>)> {
    let g = GroupSpec::su(n);
    let all: Vec<Partition> = (0..=max_size).flat_map(|s| partitions_of(s, n - 1)).collect();
    let efficient: Vec<&Partition> = all.iter().filter(|a| efficient_truncation(a, n).as_ref() == Ok(*a)).collect();
    let dual: Vec<&Partition> = all.iter().filter(|b| dually_efficient_truncation(b, n).as_ref() == Ok(*b)).collect();
    let (mut checked, mut failures) = (0, Vec::new());
    for a in &efficient {
        for b in &dual {
            if a.size() + b.size() > max_size {
                continue;
            }
            let top = a.size() + level(&g, b)?;
            let mut at_top = 0;
            let mut above = 0;
            for (lam, m) in littlewood_richardson_su(a, b, n) {
                let l = level(&g, &lam)?;
                if l == top {
                    at_top += m;
                } else if l > top {
                    above += m;
                }
            }
            checked += 1;
            if at_top != 1 || above != 0 {
                failures.push(format!("{a}⊗{b}: {at_top} at level {top}, {above} above"));
            }
        }
    }
    Ok((checked, failures))
}
