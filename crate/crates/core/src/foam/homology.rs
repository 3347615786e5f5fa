use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Foam;

/// Cellular chain data of a foam with rational Betti numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellularReport {
    /// `V × E`, column `e` is `target − source`.
    pub boundary1: Vec<Vec<i64>>,
    /// `E × F`, entry `(e, f)` is the net exponent of `e` in face `f`.
    pub boundary2: Vec<Vec<i64>>,
    /// `(b₀, b₁, b₂)` over ℚ.
    pub betti: [usize; 3],
    pub euler: i64,
}

/// Exact rank over ℚ by fraction-free (Bareiss) elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..m {
            for j in col + 1..n {
                let v = (&a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Boundary matrices and Betti numbers of the cellular chain complex.
pub fn cellular_homology(foam: &Foam) -> CellularReport {
    let (v, e, f) = (foam.n_vertices(), foam.n_edges(), foam.n_faces());
    let mut d1 = vec![vec![0i64; e]; v];
    for (j, edge) in foam.edges.iter().enumerate() {
        d1[edge.target][j] += 1;
        d1[edge.source][j] -= 1;
    }
    let mut d2 = vec![vec![0i64; f]; e];
    for (k, face) in foam.faces.iter().enumerate() {
        for l in &face.letters {
            d2[l.edge][k] += l.exponent as i64;
        }
    }
    let r1 = integer_rank(&d1);
    let r2 = integer_rank(&d2);
    CellularReport {
        boundary1: d1,
        boundary2: d2,
        betti: [v - r1, e - r1 - r2, f - r2],
        euler: foam.euler_characteristic(),
    }
}

impl CellularReport {
    /// `∂₁ ∂₂`, which must vanish.
    pub fn boundary_product(&self) -> Vec<Vec<i64>> {
        let v = self.boundary1.len();
        let e = self.boundary2.len();
        let f = self.boundary2.first().map_or(0, |r| r.len());
        (0..v)
            .map(|i| {
                (0..f)
                    .map(|k| (0..e).map(|j| self.boundary1[i][j] * self.boundary2[j][k]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
