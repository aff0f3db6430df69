use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Exact rational from a finite float.
pub fn q(v: f64) -> Q {
    BigRational::from_float(v).expect("finite value")
}

pub fn qi(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// max c.y subject to A y <= b, y >= 0, where b >= 0.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub c: Vec<Q>,
    pub rows: Vec<(Vec<(usize, Q)>, Q)>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: Q,
    pub y: Vec<Q>,
    pub pivots: usize,
}

impl Lp {
    pub fn new(c: Vec<Q>) -> Self {
        Lp { c, rows: Vec::new() }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Q)>, rhs: Q) {
        self.rows.push((coeffs, rhs));
    }

    /// Dense-tableau primal simplex from the slack basis with Bland's rule.
    pub fn solve(&self) -> Result<LpSolution> {
        let nv = self.c.len();
        let m = self.rows.len();
        let width = nv + m + 1;
        let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
        for (r, (coeffs, rhs)) in self.rows.iter().enumerate() {
            if rhs.is_negative() {
                return Err(Error::InvalidParameter("negative right-hand side".into()));
            }
            let mut row = vec![Q::zero(); width];
            for (j, a) in coeffs {
                row[*j] += a;
            }
            row[nv + r] = Q::one();
            row[width - 1] = rhs.clone();
            t.push(row);
        }
        // Objective row holds reduced costs -c; the last entry is the value.
        let mut obj = vec![Q::zero(); width];
        for (j, cj) in self.c.iter().enumerate() {
            obj[j] = -cj.clone();
        }
        t.push(obj);
        let mut basis: Vec<usize> = (nv..nv + m).collect();
        let mut pivots = 0;
        loop {
            let Some(col) = (0..width - 1).find(|&j| t[m][j].is_negative()) else { break };
            let mut best: Option<(Q, usize)> = None;
            for r in 0..m {
                if t[r][col].is_positive() {
                    let ratio = &t[r][width - 1] / &t[r][col];
                    let better = match &best {
                        None => true,
                        Some((b, br)) => ratio < *b || (ratio == *b && basis[r] < basis[*br]),
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            let Some((_, pr)) = best else {
                return Err(Error::Contract("linear program is unbounded".into()));
            };
            let piv = t[pr][col].clone();
            for v in t[pr].iter_mut() {
                *v = &*v / &piv;
            }
            let prow = t[pr].clone();
            for (r, row) in t.iter_mut().enumerate() {
                if r == pr || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
            basis[pr] = col;
            pivots += 1;
        }
        let mut y = vec![Q::zero(); nv];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < nv {
                y[bv] = t[r][width - 1].clone();
            }
        }
        Ok(LpSolution { value: t[m][width - 1].clone(), y, pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let mut lp = Lp::new(vec![qi(3), qi(5)]);
        lp.add_row(vec![(0, qi(1))], qi(4));
        lp.add_row(vec![(1, qi(2))], qi(12));
        lp.add_row(vec![(0, qi(3)), (1, qi(2))], qi(18));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, qi(36));
        assert_eq!(s.y, vec![qi(2), qi(6)]);
    }

    #[test]
    fn degenerate_and_unbounded() {
        let mut lp = Lp::new(vec![qi(1), qi(1)]);
        lp.add_row(vec![(0, qi(1)), (1, qi(1))], qi(0));
        lp.add_row(vec![(0, qi(1)), (1, qi(-1))], qi(0));
        assert_eq!(lp.solve().unwrap().value, qi(0));
        let mut lp = Lp::new(vec![qi(1)]);
        lp.add_row(vec![(0, qi(-1))], qi(1));
        assert!(lp.solve().is_err());
    }
}
