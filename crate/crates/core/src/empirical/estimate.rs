use rayon::prelude::*;
use serde::Serialize;

use crate::rng::RngStream;

/// Samples per Monte-Carlo chunk; chunk `c` draws from `rng.child(c)`, so results do not depend on threads.
pub const CHUNK: usize = 4096;

/// Acceptance band in standard errors.
pub const Z_BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub stream: u64,
}

impl EstimateWithCI {
    pub fn exact(value: f64) -> Self {
        EstimateWithCI { value, std_error: 0.0, n_samples: 0, seed: 0, stream: 0 }
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.std_error
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.std_error
    }

    /// |value − target| ≤ z·se.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.value - target).abs() <= z * self.std_error
    }

    pub fn scaled(&self, s: f64) -> Self {
        EstimateWithCI { value: self.value * s, std_error: self.std_error * s.abs(), ..*self }
    }

    pub fn record(&self, op: &str, params: serde_json::Value, wall_time: Option<f64>) -> EstimateRecord {
        EstimateRecord {
            op: op.to_string(),
            params,
            value: self.value,
            std_error: self.std_error,
            n_samples: self.n_samples,
            seed: self.seed,
            wall_time,
        }
    }
}

/// JSON form of an estimator call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub op: String,
    pub params: serde_json::Value,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

pub trait Mergeable: Send {
    fn merge(&mut self, other: Self);
}

/// Mean and centred second moment, merged by Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self, rng: &RngStream) -> EstimateWithCI {
        let se = if self.n == 0 { f64::INFINITY } else { (self.variance() / self.n as f64).sqrt() };
        EstimateWithCI { value: self.mean, std_error: se, n_samples: self.n, seed: rng.seed(), stream: rng.stream_id() }
    }
}

impl Mergeable for Moments {
    fn merge(&mut self, o: Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o;
            return;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        self.mean += delta * o.n as f64 / n as f64;
        self.m2 += o.m2 + delta * delta * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }
}

impl<A: Mergeable, B: Mergeable> Mergeable for (A, B) {
    fn merge(&mut self, o: Self) {
        self.0.merge(o.0);
        self.1.merge(o.1);
    }
}

impl<T: Mergeable> Mergeable for Vec<T> {
    fn merge(&mut self, o: Self) {
        assert_eq!(self.len(), o.len());
        for (a, b) in self.iter_mut().zip(o) {
            a.merge(b);
        }
    }
}

/// Runs `body` once per sample over fixed-size chunks in parallel and merges chunk states in order.
pub fn monte_carlo<A, I, F>(n_samples: usize, rng: &RngStream, init: I, body: F) -> A
where
    A: Mergeable,
    I: Fn() -> A + Sync,
    F: Fn(&mut RngStream, &mut A) + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c as u64);
            let mut acc = init();
            let len = CHUNK.min(n_samples - c * CHUNK);
            for _ in 0..len {
                body(&mut r, &mut acc);
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let mut total = it.next().unwrap_or_else(&init);
    for p in it {
        total.merge(p);
    }
    total
}

/// Mean of a scalar sample function with standard error.
pub fn mc_mean<F>(n_samples: usize, rng: &RngStream, f: F) -> EstimateWithCI
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    monte_carlo(n_samples, rng, Moments::default, |r, m| m.push(f(r))).estimate(rng)
}

/// Means of several sample functions computed on shared draws.
pub fn mc_means<F>(k: usize, n_samples: usize, rng: &RngStream, f: F) -> Vec<EstimateWithCI>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    let acc = monte_carlo(
        n_samples,
        rng,
        || (vec![Moments::default(); k], vec![0.0; k]),
        |r, (m, buf)| {
            f(r, buf);
            for (mi, &x) in m.iter_mut().zip(buf.iter()) {
                mi.push(x);
            }
        },
    );
    acc.0.iter().map(|m| m.estimate(rng)).collect()
}

/// Scratch buffers are not merged.
impl Mergeable for Vec<f64> {
    fn merge(&mut self, _o: Self) {}
}
