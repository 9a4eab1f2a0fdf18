//! Standardized boundaries of the binomial/normal quantile coupling.

use serde::{Deserialize, Serialize};

use crate::couplings::binomial::FmTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub j: u64,
    /// `2 (j - 1/2 - m/2) / sqrt(m)`.
    pub u: f64,
    /// `Phi^{-1}(F_m(j - 1/2))`.
    pub z: f64,
}

/// Boundaries `z_j` next to their normal-approximation counterparts `u_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TusnadyBoundaryTable {
    pub m: u64,
    pub rows: Vec<BoundaryRow>,
}

impl TusnadyBoundaryTable {
    /// Rows with `u_j^2 <= m / 2`, where the Tusnády bound is asserted.
    pub fn admissible(&self) -> impl Iterator<Item = &BoundaryRow> {
        let limit = 0.5 * self.m as f64;
        self.rows.iter().filter(move |r| r.u * r.u <= limit)
    }
}

/// Boundaries for `j = 1..=m`.
pub fn tusnady_boundaries(m: u64) -> Result<TusnadyBoundaryTable> {
    if m == 0 {
        return Err(Error::Domain("boundary table needs m >= 1".into()));
    }
    Ok(boundaries_from(&FmTable::new(m)))
}

pub(crate) fn boundaries_from(table: &FmTable) -> TusnadyBoundaryTable {
    let m = table.m();
    let root = (m as f64).sqrt();
    let rows = (1..=m)
        .map(|j| BoundaryRow {
            j,
            u: 2.0 * (j as f64 - 0.5 - 0.5 * m as f64) / root,
            z: table.boundary(j),
        })
        .collect();
    TusnadyBoundaryTable { m, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial() {
        let t = tusnady_boundaries(1).unwrap();
        assert_eq!(t.rows, vec![BoundaryRow { j: 1, u: 0.0, z: 0.0 }]);
        assert!(tusnady_boundaries(0).is_err());
    }

    #[test]
    fn central_boundary_even_m() {
        let m = 16;
        let t = tusnady_boundaries(m).unwrap();
        let row = t.rows[(m / 2 - 1) as usize];
        assert_eq!(row.j, m / 2);
        assert!((row.u + 1.0 / (m as f64).sqrt()).abs() < 1e-15);
        assert!(row.z < 0.0);
        // Mirror boundary j' = m + 1 - j.
        let mirror = t.rows[(m / 2) as usize];
        assert_eq!(row.z, -mirror.z);
    }

    #[test]
    fn rows_increase_and_are_symmetric() {
        for m in [64u64, 256, 1024] {
            let t = tusnady_boundaries(m).unwrap();
            assert!(t.rows.windows(2).all(|w| w[0].z < w[1].z));
            for (a, b) in t.rows.iter().zip(t.rows.iter().rev()) {
                assert_eq!(a.z, -b.z);
            }
            assert!(t.admissible().count() > 0);
        }
    }
}
