use serde::Serialize;

use super::sparsifier::{class_seed, classes, layer_sample, SparseEdge, Sparsifier, SparsifierParams};
use crate::error::{Error, Result};

/// Edges sampled under promise weights, waiting for their true values.
#[derive(Clone, Debug, Serialize)]
pub struct DeferredSketch {
    pub n: usize,
    pub endpoints: Vec<(usize, usize)>,
    pub promise: Vec<f64>,
    pub chi: f64,
    pub lambda0: f64,
    pub xi: f64,
    /// Positions of stored edges, ascending.
    pub stored: Vec<usize>,
    /// Sampling probability of each stored edge.
    pub prob: Vec<f64>,
}

/// Probability boost exponent: sampling rates are multiplied by 2^shift >= chi^2.
fn boost_shift(chi: f64) -> usize {
    (2.0 * chi.log2() - 1e-12).ceil().max(0.0) as usize
}

pub fn build_deferred(
    n: usize,
    endpoints: &[(usize, usize)],
    promise: &[f64],
    chi: f64,
    lambda0: f64,
    params: &SparsifierParams,
    seed: u64,
) -> Result<DeferredSketch> {
    if endpoints.len() != promise.len() {
        return Err(Error::IndexMismatch(format!(
            "{} edges but {} promise weights",
            endpoints.len(),
            promise.len()
        )));
    }
    if !(chi >= 1.0) || !(lambda0 >= 1.0) {
        return Err(Error::InvalidParameter(format!("chi {chi} and lambda0 {lambda0} must be >= 1")));
    }
    for (p, &v) in promise.iter().enumerate() {
        let tol = 1.0 + 1e-9;
        if !(v > 0.0) || v * lambda0 * tol < 1.0 || v > lambda0 * tol {
            return Err(Error::InvalidParameter(format!("promise {v} on edge {p} outside range")));
        }
    }
    let shift = boost_shift(chi);
    let forests = params.forests(n);
    let mut picked = Vec::new();
    for (class, members) in classes(promise) {
        for s in layer_sample(n, endpoints, &members, forests, class_seed(seed, class)) {
            let need = s.exponent.saturating_sub(shift);
            if s.depth >= need {
                picked.push((s.pos, 2f64.powi(-(need as i32))));
            }
        }
    }
    picked.sort_by_key(|p| p.0);
    Ok(DeferredSketch {
        n,
        endpoints: endpoints.to_vec(),
        promise: promise.to_vec(),
        chi,
        lambda0,
        xi: params.xi,
        stored: picked.iter().map(|p| p.0).collect(),
        prob: picked.iter().map(|p| p.1).collect(),
    })
}

impl DeferredSketch {
    pub fn stored_count(&self) -> usize {
        self.stored.len()
    }
}

/// Reveals true values on stored edges; `u` is indexed like the input edges.
pub fn refine_deferred(d: &DeferredSketch, u: &[f64]) -> Result<Sparsifier> {
    if u.len() != d.endpoints.len() {
        return Err(Error::IndexMismatch(format!(
            "{} values for {} edges",
            u.len(),
            d.endpoints.len()
        )));
    }
    let mut edges = Vec::with_capacity(d.stored.len());
    for (&p, &prob) in d.stored.iter().zip(&d.prob) {
        let v = u[p];
        if v == 0.0 {
            continue;
        }
        let lo = d.promise[p] / d.chi;
        let hi = d.promise[p] * d.chi;
        if v < lo * (1.0 - 1e-9) || v > hi * (1.0 + 1e-9) {
            return Err(Error::PromiseViolation { edge: p, value: v, lo, hi });
        }
        let (i, j) = d.endpoints[p];
        edges.push(SparseEdge { edge: p, i, j, value: v / prob });
    }
    Ok(Sparsifier { n: d.n, edges, xi: d.xi })
}
