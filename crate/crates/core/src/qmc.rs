//! Scrambled Sobol points on the unit cube.

use nalgebra::DMatrix;

/// Largest supported number of points.
pub const MAX_POINTS: usize = 1 << 16;

/// `n` Owen-scrambled Sobol points in `[0,1)^dim`, one per row.
///
/// Panics if `n` exceeds 2^16 or `dim` exceeds the underlying table.
pub fn sobol_points(n: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    assert!(n <= MAX_POINTS, "at most 2^16 Sobol points are supported");
    let seed = (seed ^ (seed >> 32)) as u32;
    DMatrix::from_fn(n, dim, |i, d| {
        f64::from(sobol_burley::sample(i as u32, d as u32, seed))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_in_unit_cube_and_seeded() {
        let a = sobol_points(256, 3, 1);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(a, sobol_points(256, 3, 1));
        assert_ne!(a, sobol_points(256, 3, 2));
        // one point per stratum of width 1/256 in each coordinate
        for d in 0..3 {
            let mut strata: Vec<usize> = (0..256).map(|i| (a[(i, d)] * 256.0) as usize).collect();
            strata.sort_unstable();
            strata.dedup();
            assert_eq!(strata.len(), 256);
        }
    }
}
