//! Area-preserving lattice maps `x ↦ A·x + b` of the grid torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{TorusGrid, LINK};

/// `A ∈ SL(2, Z)` acting on vertex indices, followed by a translation in
/// grid units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSymplectomorphism {
    pub matrix: [[i64; 2]; 2],
    pub translation: (i64, i64),
}

impl LatticeSymplectomorphism {
    pub fn new(matrix: [[i64; 2]; 2], translation: (i64, i64)) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        if a * d - b * c != 1 {
            return Err(Error::NotUnimodular(a, b, c, d));
        }
        Ok(Self { matrix, translation })
    }

    pub fn identity() -> Self {
        Self { matrix: [[1, 0], [0, 1]], translation: (0, 0) }
    }

    pub fn translation(di: i64, dj: i64) -> Self {
        Self { matrix: [[1, 0], [0, 1]], translation: (di, dj) }
    }

    /// Rotations of the triangulation's hexagonal link: the six elements of
    /// `SL(2, Z)` that permute the edge directions `±(1,0), ±(0,1), ±(1,1)`.
    pub fn hexagonal_rotations() -> [[[i64; 2]; 2]; 6] {
        let r = [[1, -1], [1, 0]];
        let mut out = [[[1, 0], [0, 1]]; 6];
        for k in 1..6 {
            out[k] = mul(r, out[k - 1]);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.matrix, self.translation).map(|_| ())
    }

    #[inline]
    pub fn apply(&self, (i, j): (i64, i64)) -> (i64, i64) {
        let [[a, b], [c, d]] = self.matrix;
        (a * i + b * j + self.translation.0, c * i + d * j + self.translation.1)
    }

    pub fn apply_vertex(&self, grid: &TorusGrid, v: usize) -> usize {
        let (i, j) = self.apply(grid.coords(v));
        grid.vertex(i, j)
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.matrix;
        let inv = [[d, -b], [-c, a]];
        let (ti, tj) = self.translation;
        Self {
            matrix: inv,
            translation: (-(inv[0][0] * ti + inv[0][1] * tj), -(inv[1][0] * ti + inv[1][1] * tj)),
        }
    }

    /// True when the linear part maps grid edges to grid edges, so the map is
    /// a simplicial automorphism of the triangulation.
    pub fn preserves_triangulation(&self) -> bool {
        let [[a, b], [c, d]] = self.matrix;
        LINK.iter().all(|&(x, y)| LINK.contains(&(a * x + b * y, c * x + d * y)))
    }
}

fn mul(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unimodular() {
        assert!(LatticeSymplectomorphism::new([[2, 0], [0, 1]], (0, 0)).is_err());
        assert!(LatticeSymplectomorphism::new([[0, 1], [1, 0]], (0, 0)).is_err());
        assert!(LatticeSymplectomorphism::new([[1, 1], [0, 1]], (3, 4)).is_ok());
    }

    #[test]
    fn hexagonal_rotations_preserve_triangulation() {
        let rots = LatticeSymplectomorphism::hexagonal_rotations();
        for m in rots {
            let phi = LatticeSymplectomorphism::new(m, (0, 0)).unwrap();
            assert!(phi.preserves_triangulation());
        }
        assert_eq!(mul(rots[5], [[1, -1], [1, 0]]), [[1, 0], [0, 1]]);
        let shear = LatticeSymplectomorphism::new([[1, 1], [0, 1]], (0, 0)).unwrap();
        assert!(!shear.preserves_triangulation());
    }

    #[test]
    fn inverse_undoes_map() {
        let g = TorusGrid::new(12).unwrap();
        let phi = LatticeSymplectomorphism::new([[2, 1], [1, 1]], (5, -3)).unwrap();
        let inv = phi.inverse();
        for v in 0..g.vertex_count() {
            assert_eq!(inv.apply_vertex(&g, phi.apply_vertex(&g, v)), v);
        }
    }

    #[test]
    fn acts_as_bijection() {
        let g = TorusGrid::new(10).unwrap();
        let phi = LatticeSymplectomorphism::new([[1, 1], [0, 1]], (3, 7)).unwrap();
        let mut seen = vec![false; g.vertex_count()];
        for v in 0..g.vertex_count() {
            let w = phi.apply_vertex(&g, v);
            assert!(!seen[w]);
            seen[w] = true;
        }
    }
}
