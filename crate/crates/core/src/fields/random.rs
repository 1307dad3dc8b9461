use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::GridGeometry;
use super::map::{MapField, VectorSpinorField};
use crate::target::TargetChart;
use crate::{Error, Result};

/// Band-limited periodic samples, node-major with `comps` components.
///
/// Each component is `Σ_{|m|∞ ≤ band} (a_m cos + b_m sin)(2π m·x / L)` with
/// coefficients uniform in `[-amp, amp] / (1 + |m|²)`.
pub fn band_limited(grid: &GridGeometry, comps: usize, band: usize, amplitude: f64, rng: &mut impl Rng) -> Vec<f64> {
    let nodes = grid.node_count();
    let b = band as i64;
    let mut out = vec![0.0; nodes * comps];
    for c in 0..comps {
        for m1 in -b..=b {
            for m2 in -b..=b {
                // (m, -m) give the same functions; keep one half-plane
                if m2 < 0 || (m2 == 0 && m1 < 0) {
                    continue;
                }
                let decay = amplitude / (1.0 + (m1 * m1 + m2 * m2) as f64);
                let a = decay * rng.gen_range(-1.0..=1.0);
                let s = if m1 == 0 && m2 == 0 { 0.0 } else { decay * rng.gen_range(-1.0..=1.0) };
                let k = [TAU * m1 as f64 / grid.side_length, TAU * m2 as f64 / grid.side_length];
                for node in 0..nodes {
                    let [x, y] = grid.position(node);
                    let phase = k[0] * x + k[1] * y;
                    out[node * comps + c] += a * phase.cos() + s * phase.sin();
                }
            }
        }
    }
    out
}

fn check_band(grid: &GridGeometry, band: usize) -> Result<()> {
    if 2 * band >= grid.nodes_per_side {
        return Err(Error::InvalidConfig(format!("band limit {band} must be below N/2 = {}", grid.nodes_per_side / 2)));
    }
    Ok(())
}

/// A random map near the chart origin. The oscillating part is halved until
/// every node is inside the chart domain.
pub fn random_map(
    chart: &TargetChart,
    grid: &GridGeometry,
    band: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<MapField> {
    check_band(grid, band)?;
    let n = chart.dim();
    let periodic = band_limited(grid, n, band, amplitude, rng);
    let mut map = MapField::new(*grid, n, periodic, vec![[0.0; 2]; n])?;
    for _ in 0..60 {
        if map.check_domain(chart).is_ok() {
            return Ok(map);
        }
        map.periodic_mut().iter_mut().for_each(|v| *v *= 0.5);
    }
    map.check_domain(chart)?;
    Ok(map)
}

pub fn random_spinor(
    grid: &GridGeometry,
    dim: usize,
    band: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<VectorSpinorField> {
    check_band(grid, band)?;
    let re = band_limited(grid, 2 * dim, band, amplitude, rng);
    let im = band_limited(grid, 2 * dim, band, amplitude, rng);
    VectorSpinorField::from_data(dim, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// A random variation direction `η` for the periodic part of a map.
pub fn random_vector(
    grid: &GridGeometry,
    dim: usize,
    band: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    check_band(grid, band)?;
    Ok(band_limited(grid, dim, band, amplitude, rng))
}

/// Deterministic `(φ, ψ)` pair for a seed.
pub fn random_smooth_fields(
    chart: &TargetChart,
    grid: &GridGeometry,
    seed: u64,
    band: usize,
    amplitude: f64,
) -> Result<(MapField, VectorSpinorField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = random_map(chart, grid, band, amplitude, &mut rng)?;
    let psi = random_spinor(grid, chart.dim(), band, amplitude, &mut rng)?;
    Ok((map, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Differentiator;
    use crate::target::catalog;

    fn grid() -> GridGeometry {
        GridGeometry::new(16, TAU, 1.0).unwrap()
    }

    #[test]
    fn same_seed_same_fields() {
        let chart = catalog::sphere(2);
        let a = random_smooth_fields(&chart, &grid(), 7, 3, 0.5).unwrap();
        let b = random_smooth_fields(&chart, &grid(), 7, 3, 0.5).unwrap();
        assert_eq!(a, b);
        let c = random_smooth_fields(&chart, &grid(), 8, 3, 0.5).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn band_zero_is_constant() {
        let (map, psi) = random_smooth_fields(&catalog::flat(3), &grid(), 1, 0, 1.0).unwrap();
        let v0 = map.value(0);
        assert!((0..256).all(|node| map.value(node) == v0));
        assert!((0..256).all(|node| (0..3).all(|i| psi.get(node, i) == psi.get(0, i))));
    }

    #[test]
    fn band_limit_respected() {
        let g = grid();
        let (map, _) = random_smooth_fields(&catalog::flat(2), &g, 3, 2, 1.0).unwrap();
        let diff = Differentiator::new(&g);
        // fourth derivative of band-2 data is bounded by 2^4 times the data
        let mut d = map.periodic().to_vec();
        for _ in 0..4 {
            d = diff.derivative_real(&d, 2, 0);
        }
        let top = map.periodic().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dtop = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dtop <= 16.0 * top * 9.0 + 1e-9);
        assert!(random_smooth_fields(&catalog::flat(2), &g, 3, 8, 1.0).is_err());
    }

    #[test]
    fn sphere_map_inside_domain() {
        let chart = catalog::sphere(2);
        for seed in 0..5 {
            let (map, _) = random_smooth_fields(&chart, &grid(), seed, 3, 50.0).unwrap();
            assert!(map.check_domain(&chart).is_ok());
        }
    }
}
