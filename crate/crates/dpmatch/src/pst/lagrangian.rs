use serde::Serialize;

use super::{Mixable, TOL};
use crate::error::{Error, Result};

/// Answer of a penalized oracle at multiplier rho: either a point with its
/// covering value and packing value, or a primal certificate.
pub enum MicroReply<P, C> {
    Step { x: P, cover: f64, pack: f64 },
    Cert(C),
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SearchStats {
    pub calls: usize,
    pub rho_low: f64,
    pub rho_high: f64,
}

pub enum LagrangeOutcome<P, C> {
    Inner { x: P, cover: f64, pack: f64, stats: SearchStats },
    PrimalCert(C),
}

/// Checks cover - rho pack >= (1 - eps/16)(uc - rho zq).
fn lag_inner(cover: f64, pack: f64, rho: f64, uc: f64, zq: f64, eps: f64) -> bool {
    let lhs = cover - rho * pack;
    let rhs = (1.0 - eps / 16.0) * (uc - rho * zq);
    lhs >= rhs - TOL * (cover.abs() + rho * pack.abs() + uc.abs() + rho * zq.abs())
}

/// Searches the penalty multiplier until the penalized oracle yields a point
/// with packing value at most 13/12 zq and covering value at least
/// (1 - eps/8) uc.
pub fn lagrangian_search<P, C, F>(uc: f64, zq: f64, eps: f64, mut micro: F) -> Result<LagrangeOutcome<P, C>>
where
    P: Mixable + Default,
    F: FnMut(f64) -> Result<MicroReply<P, C>>,
{
    if !(uc > 0.0) || !(zq > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("lagrangian search needs uc {uc}, zq {zq}, eps {eps} > 0")));
    }
    let cap = 13.0 / 12.0 * zq;
    let mut stats = SearchStats::default();
    let mut call = |rho: f64, stats: &mut SearchStats| -> Result<MicroReply<P, C>> {
        stats.calls += 1;
        let r = micro(rho)?;
        if let MicroReply::Step { cover, pack, .. } = &r {
            if !lag_inner(*cover, *pack, rho, uc, zq, eps) {
                return Err(Error::Contract(format!(
                    "penalized oracle output fails its inequality at rho {rho}: cover {cover}, pack {pack}"
                )));
            }
        }
        Ok(r)
    };

    let rho_init = eps * uc / (16.0 * zq);
    let (mut x1, mut c1, mut p1) = match call(rho_init, &mut stats)? {
        MicroReply::Cert(c) => return Ok(LagrangeOutcome::PrimalCert(c)),
        MicroReply::Step { x, cover, pack } => {
            if pack <= cap * (1.0 + TOL) {
                stats.rho_low = rho_init;
                stats.rho_high = rho_init;
                return finish(x, cover, pack, uc, cap, eps, stats);
            }
            (x, cover, pack)
        }
    };
    let rho0 = 12.0 * uc / (13.0 * zq);
    let (mut r1, mut r2) = (rho_init, rho0);
    let (mut x2, mut c2, mut p2) = (P::default(), 0.0, 0.0);
    while r2 - r1 > eps * rho0 / 16.0 {
        let mid = (r1 * r2).sqrt();
        match call(mid, &mut stats)? {
            MicroReply::Cert(c) => return Ok(LagrangeOutcome::PrimalCert(c)),
            MicroReply::Step { x, cover, pack } => {
                if pack > cap {
                    (x1, c1, p1, r1) = (x, cover, pack, mid);
                } else {
                    (x2, c2, p2, r2) = (x, cover, pack, mid);
                }
            }
        }
    }
    stats.rho_low = r1;
    stats.rho_high = r2;
    let s1 = (cap - p2) / (p1 - p2);
    let mut x = x2;
    x.mix(&x1, s1);
    let cover = (1.0 - s1) * c2 + s1 * c1;
    let pack = (1.0 - s1) * p2 + s1 * p1;
    finish(x, cover, pack, uc, cap, eps, stats)
}

fn finish<P, C>(x: P, cover: f64, pack: f64, uc: f64, cap: f64, eps: f64, stats: SearchStats) -> Result<LagrangeOutcome<P, C>> {
    if pack > cap * (1.0 + TOL) || cover < (1.0 - eps / 8.0) * uc * (1.0 - TOL) {
        return Err(Error::Contract(format!(
            "lagrangian search output misses its bounds: cover {cover} vs {uc}, pack {pack} vs {cap}"
        )));
    }
    Ok(LagrangeOutcome::Inner { x, cover, pack, stats })
}
