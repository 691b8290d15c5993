use crate::{Error, Result};

/// Fractional-coordinate tolerance for momentum congruences.
pub const K_TOL: f64 = 1e-8;

/// Crystal-momentum sampling points in fractional reciprocal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct KMesh {
    points: Vec<[f64; 3]>,
}

fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if (1.0 - w) < K_TOL {
        0.0
    } else {
        w
    }
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= K_TOL
}

impl KMesh {
    /// Coordinates are wrapped into `[0, 1)`; duplicates are rejected.
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("k-mesh must contain at least one point"));
        }
        let points: Vec<[f64; 3]> = points
            .into_iter()
            .map(|p| [wrap(p[0]), wrap(p[1]), wrap(p[2])])
            .collect();
        for i in 0..points.len() {
            for j in 0..i {
                if (0..3).all(|c| is_integer(points[i][c] - points[j][c])) {
                    return Err(Error::invalid(format!(
                        "k-points {} and {} coincide",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn gamma() -> Self {
        Self {
            points: vec![[0.0; 3]],
        }
    }

    /// `n` points `j/n` along the first reciprocal axis.
    pub fn line(n: usize) -> Self {
        Self {
            points: (0..n).map(|j| [j as f64 / n as f64, 0.0, 0.0]).collect(),
        }
    }

    pub fn nkpt(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        self.points[i]
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn is_gamma_only(&self) -> bool {
        self.points.len() == 1 && self.points[0].iter().all(|&c| c == 0.0)
    }

    /// Signed sum `Σ k(creations) − Σ k(annihilations)` in fractional units.
    pub fn transfer(&self, creations: &[usize], annihilations: &[usize]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for &k in creations {
            for (c, v) in s.iter_mut().enumerate() {
                *v += self.points[k][c];
            }
        }
        for &k in annihilations {
            for (c, v) in s.iter_mut().enumerate() {
                *v -= self.points[k][c];
            }
        }
        s
    }

    /// Whether the transfer is a reciprocal lattice vector.
    pub fn conserves(&self, creations: &[usize], annihilations: &[usize]) -> bool {
        self.transfer(creations, annihilations)
            .iter()
            .all(|&c| is_integer(c))
    }

    /// Index of the point equivalent to `−k`, if present.
    pub fn negation_partner(&self, i: usize) -> Option<usize> {
        let p = self.points[i];
        self.points
            .iter()
            .position(|q| (0..3).all(|c| is_integer(p[c] + q[c])))
    }

    pub fn is_negation_closed(&self) -> bool {
        (0..self.nkpt()).all(|i| self.negation_partner(i).is_some())
    }
}
