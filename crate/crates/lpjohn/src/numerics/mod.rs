//! Grids, quadrature, the discrete Legendre-Fenchel transform, and SPD
//! matrix utilities shared by every other module.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and safe to share across threads. Reductions run in a
//! fixed order so results are bitwise deterministic.

pub mod grid;
pub mod legendre;
pub mod spd;

pub use grid::{Grid, GridLayout, MultiIndexIter, DECAY_LIMIT, MAX_DIM, SENTINEL};
pub use legendre::{
    double_conjugate_check, estimate_dual_layout, legendre_transform, legendre_transform_onto,
    refined_dual_layout,
};
pub use spd::{condition_number, SpdMatrix};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;

    // Fenchel-Young identity at grid points: u(x) + u*(grad u(x)) = <x, grad u(x)>
    // within 10 * spacing^2.
    fn fenchel_young_worst(u: &Grid, conj: &Grid) -> Result<f64> {
        let m = u.layout().points_per_axis();
        let dim = u.layout().dim();
        let mut worst: f64 = 0.0;
        for idx in u.layout().indices() {
            let interior = (0..dim).all(|a| idx[a] > 2 && idx[a] < m - 3);
            if !interior {
                continue;
            }
            let x = u.layout().node(&idx);
            let g = match u.node_gradient(&idx) {
                Some(g) => g,
                None => continue,
            };
            if !conj.layout().contains(&g[..dim]) {
                continue;
            }
            let ustar = conj.interpolate(&g[..dim])?;
            let dot: f64 = (0..dim).map(|a| x[a] * g[a]).sum();
            worst = worst.max((u.value(&idx) + ustar - dot).abs());
        }
        Ok(worst)
    }

    #[test]
    fn fenchel_young_quadratic_2d() {
        let layout = GridLayout::new(2, 8.0, 129).unwrap();
        let u = Grid::from_fn(layout, |x| (x[0] * x[0] + x[1] * x[1]) / 2.0).unwrap();
        let conj = legendre_transform(&u).unwrap();
        let h = layout.spacing();
        let worst = fenchel_young_worst(&u, &conj).unwrap();
        assert!(worst < 10.0 * h * h, "residual {worst}");
    }

    #[test]
    fn fenchel_young_quartic_1d() {
        let layout = GridLayout::new(1, 3.4, 513).unwrap();
        let u = Grid::from_fn(layout, |x| x[0].powi(4) / 4.0).unwrap();
        let conj = legendre_transform_onto(&u, refined_dual_layout(&u)).unwrap();
        let h = layout.spacing();
        let worst = fenchel_young_worst(&u, &conj).unwrap();
        assert!(worst < 10.0 * h * h, "residual {worst}");
    }
}
