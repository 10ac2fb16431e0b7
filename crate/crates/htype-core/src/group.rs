//! Group-element arithmetic: the step-2 BCH product, inverses, nonisotropic
//! dilations and the homogeneous norm.

use crate::error::{Error, Result};
use crate::structure::HTypeStructure;
use serde::{Deserialize, Serialize};

/// An element (x, t) of G = R^{m+n}. Plain data: structure-dependent
/// operations take the `HTypeStructure` explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Self {
        GroupPoint { x, t }
    }

    pub fn origin(m: usize, n: usize) -> Self {
        GroupPoint {
            x: vec![0.0; m],
            t: vec![0.0; n],
        }
    }

    /// Parse from a flat JSON array [x..., t...].
    pub fn from_flat(m: usize, n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != m + n {
            return Err(Error::Shape {
                m,
                n,
                got_m: v.len(),
                got_n: 0,
            });
        }
        Ok(GroupPoint {
            x: v[..m].to_vec(),
            t: v[m..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.t);
        v
    }
}

fn check_dims(s: &HTypeStructure, p: &GroupPoint) -> Result<()> {
    if p.x.len() != s.m || p.t.len() != s.n {
        return Err(Error::Shape {
            m: s.m,
            n: s.n,
            got_m: p.x.len(),
            got_n: p.t.len(),
        });
    }
    Ok(())
}

/// Group product: x-part a.x + b.x, t-part_j = a.t_j + b.t_j + (1/2)<a.x, U^(j) b.x>.
pub fn multiply(s: &HTypeStructure, a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    check_dims(s, a)?;
    check_dims(s, b)?;
    let x: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect();
    let mut t = Vec::with_capacity(s.n);
    for j in 0..s.n {
        let mut pair = 0.0;
        for i in 0..s.m {
            let mut row = 0.0;
            for k in 0..s.m {
                row += s.u(j, i, k) * b.x[k];
            }
            pair += a.x[i] * row;
        }
        t.push(a.t[j] + b.t[j] + 0.5 * pair);
    }
    Ok(GroupPoint { x, t })
}

/// Group inverse (-x, -t).
pub fn inverse(a: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: a.x.iter().map(|v| -v).collect(),
        t: a.t.iter().map(|v| -v).collect(),
    }
}

/// Nonisotropic dilation (lambda x, lambda^2 t).
pub fn dilate(lambda: f64, a: &GroupPoint) -> Result<GroupPoint> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "dilation parameter must be positive, got {lambda}"
        )));
    }
    Ok(GroupPoint {
        x: a.x.iter().map(|v| lambda * v).collect(),
        t: a.t.iter().map(|v| lambda * lambda * v).collect(),
    })
}

/// Homogeneous norm (|x|^4/16 + |t|^2)^{1/4}.
pub fn hom_norm(a: &GroupPoint) -> f64 {
    let x2: f64 = a.x.iter().map(|v| v * v).sum();
    let t2: f64 = a.t.iter().map(|v| v * v).sum();
    (x2 * x2 / 16.0 + t2).powf(0.25)
}
