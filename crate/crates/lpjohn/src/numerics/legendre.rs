//! Discrete Legendre-Fenchel transform.
//!
//! The conjugate u*(y) = sup_x { <x,y> - u(x) } over a product grid factors
//! into one-dimensional passes: starting from w = -u, each axis pass replaces
//! the axis variable x_k by its dual y_k via out(y_k) = max_{x_k} (x_k y_k + w).
//! Iterated maxima commute, so the factored result equals the brute-force
//! discrete supremum over the full grid exactly. Each pass is a direct O(N^2)
//! scan per line, which is plenty at desk scale.

use super::grid::{Grid, GridLayout, MAX_DIM};
use crate::error::{Error, Result};

/// Reject potentials whose finite values never rise at least this far above
/// the minimum (counting sentinels as +infinity): the gradient range is
/// degenerate and the transform untrustworthy.
const MIN_RANGE: f64 = 1.0;

fn check_nondegenerate(u: &Grid) -> Result<()> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut has_sentinel = false;
    for &v in u.values() {
        if v.is_finite() {
            min = min.min(v);
            max = max.max(v);
        } else {
            has_sentinel = true;
        }
    }
    if has_sentinel || max - min >= MIN_RANGE {
        Ok(())
    } else {
        Err(Error::DegenerateTransform(format!(
            "potential range {:.3e} above its minimum is below {MIN_RANGE}",
            max - min
        )))
    }
}

/// Dual box estimate: the gradient range of `u` from finite-difference slopes,
/// padded by 10%, with a unit floor for nearly flat (indicator-like) inputs.
pub fn estimate_dual_layout(u: &Grid) -> GridLayout {
    let slope = u.max_finite_slope();
    let half_width = 1.1 * slope.max(1.0);
    GridLayout::new(u.layout().dim(), half_width, u.layout().points_per_axis())
        .expect("dual layout inherits a valid shape")
}

/// One conjugate pass along `axis`, exchanging primal coordinates `xs` for
/// dual coordinates `ys`. `shape` is the per-axis length of `data`.
fn conjugate_pass(
    data: &[f64],
    shape: &[usize; MAX_DIM],
    dim: usize,
    axis: usize,
    xs: &[f64],
    ys: &[f64],
) -> (Vec<f64>, [usize; MAX_DIM]) {
    let m_in = shape[axis];
    let m_out = ys.len();
    debug_assert_eq!(m_in, xs.len());

    let mut out_shape = *shape;
    out_shape[axis] = m_out;

    let stride_after = |s: &[usize; MAX_DIM]| -> usize { s[axis + 1..dim].iter().product() };
    let in_stride = stride_after(shape);
    let out_stride = stride_after(&out_shape);
    let outer: usize = shape[..axis].iter().product();
    let in_block = m_in * in_stride;
    let out_block = m_out * out_stride;

    let mut out = vec![f64::NEG_INFINITY; out_shape[..dim].iter().product()];
    let mut line = vec![0.0f64; m_in];

    for o in 0..outer {
        for s in 0..in_stride {
            let in_base = o * in_block + s;
            for i in 0..m_in {
                line[i] = data[in_base + i * in_stride];
            }
            let out_base = o * out_block + s;
            for (j, &y) in ys.iter().enumerate() {
                let mut best = f64::NEG_INFINITY;
                for (i, &x) in xs.iter().enumerate() {
                    let cand = x * y + line[i];
                    if cand > best {
                        best = cand;
                    }
                }
                out[out_base + j * out_stride] = best;
            }
        }
    }
    (out, out_shape)
}

/// Conjugate of `u` sampled on an explicit dual layout (same dimension).
///
/// The caller is responsible for the dual box covering the gradient range of
/// `u` wherever the result will be read.
pub fn legendre_transform_onto(u: &Grid, dual: GridLayout) -> Result<Grid> {
    if dual.dim() != u.layout().dim() {
        return Err(Error::InvalidParameter(format!(
            "dual dimension {} != primal dimension {}",
            dual.dim(),
            u.layout().dim()
        )));
    }
    check_nondegenerate(u)?;

    let dim = u.layout().dim();
    let m_in = u.layout().points_per_axis();
    let xs: Vec<f64> = (0..m_in).map(|i| u.layout().axis_coord(i)).collect();
    let ys: Vec<f64> = (0..dual.points_per_axis())
        .map(|j| dual.axis_coord(j))
        .collect();

    // w = -u, with sentinels dropping out of the maxima as -infinity.
    let mut data: Vec<f64> = u.values().iter().map(|&v| -v).collect();
    let mut shape = [1usize; MAX_DIM];
    shape[..dim].copy_from_slice(&vec![m_in; dim]);

    for axis in 0..dim {
        let (next, next_shape) = conjugate_pass(&data, &shape, dim, axis, &xs, &ys);
        data = next;
        shape = next_shape;
    }
    Grid::new(dual, data)
}

/// Conjugate of `u` on an automatically estimated dual grid.
pub fn legendre_transform(u: &Grid) -> Result<Grid> {
    legendre_transform_onto(u, estimate_dual_layout(u))
}

/// Dual layout with the node count scaled up (capped at 8x per axis) when
/// the dual box is much wider than the primal one, so the dual spacing does
/// not degrade. Conjugates of flat-ish potentials have steep curvature near
/// the origin, and diagnostics read them there.
pub fn refined_dual_layout(u: &Grid) -> GridLayout {
    let est = estimate_dual_layout(u);
    let ratio = est.half_width() / u.layout().half_width();
    let k = (ratio.ceil() as usize).clamp(1, 8);
    let m = (u.layout().points_per_axis() - 1) * k + 1;
    GridLayout::new(u.layout().dim(), est.half_width(), m).expect("scaled layout stays valid")
}

/// Max |u** - u| over interior nodes with finite u: a convexity and
/// consistency diagnostic (the double conjugate is the convex envelope).
pub fn double_conjugate_check(u: &Grid) -> Result<f64> {
    let conj = legendre_transform_onto(u, refined_dual_layout(u))?;
    let back = legendre_transform_onto(&conj, u.layout())?;
    let m = u.layout().points_per_axis();
    let mut worst: f64 = 0.0;
    for idx in u.layout().indices() {
        let interior = (0..u.layout().dim()).all(|a| idx[a] > 0 && idx[a] < m - 1);
        if !interior {
            continue;
        }
        let v = u.value(&idx);
        if !v.is_finite() {
            continue;
        }
        worst = worst.max((back.value(&idx) - v).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::SENTINEL;
    use approx::assert_abs_diff_eq;

    fn grid(dim: usize, r: f64, m: usize, f: impl Fn(&[f64]) -> f64) -> Grid {
        Grid::from_fn(GridLayout::new(dim, r, m).unwrap(), f).unwrap()
    }

    #[test]
    fn quadratic_is_self_dual_2d() {
        let u = grid(2, 8.0, 129, |x| (x[0] * x[0] + x[1] * x[1]) / 2.0);
        let conj = legendre_transform(&u).unwrap();
        let mut worst: f64 = 0.0;
        for idx in conj.layout().indices() {
            let y = conj.layout().node(&idx);
            if y[0].abs() > 6.0 || y[1].abs() > 6.0 {
                continue; // stay inside the primal gradient range
            }
            let exact = (y[0] * y[0] + y[1] * y[1]) / 2.0;
            worst = worst.max((conj.value(&idx) - exact).abs());
        }
        let h = u.layout().spacing();
        assert!(worst < 5.0 * h * h, "worst error {worst}");
    }

    #[test]
    fn cube_indicator_conjugates_to_l1_support() {
        // Sentinel outside the unit cube; conjugate is h(y) = sum |y_i|.
        let u = grid(2, 2.0, 65, |x| {
            if x[0].abs() <= 1.0 && x[1].abs() <= 1.0 {
                0.0
            } else {
                SENTINEL
            }
        });
        let dual = GridLayout::new(2, 2.0, 65).unwrap();
        let conj = legendre_transform_onto(&u, dual).unwrap();
        for idx in dual.indices() {
            let y = dual.node(&idx);
            assert_abs_diff_eq!(conj.value(&idx), y[0].abs() + y[1].abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quartic_conjugate_matches_closed_form() {
        // u = x^4/4 has conjugate (3/4)|y|^{4/3}.
        let u = grid(1, 3.4, 513, |x| x[0].powi(4) / 4.0);
        let conj = legendre_transform(&u).unwrap();
        let mut worst: f64 = 0.0;
        for idx in conj.layout().indices() {
            let y = conj.layout().axis_coord(idx[0]);
            if y.abs() > 30.0 {
                continue;
            }
            let exact = 0.75 * y.abs().powf(4.0 / 3.0);
            worst = worst.max((conj.value(&idx) - exact).abs());
        }
        assert!(worst < 5e-3, "worst error {worst}");
    }

    #[test]
    fn rejects_flat_potential() {
        let u = grid(1, 1.0, 33, |_| 0.3);
        assert!(matches!(
            legendre_transform(&u),
            Err(Error::DegenerateTransform(_))
        ));
    }

    #[test]
    fn output_convex_along_axes() {
        let u = grid(2, 6.0, 65, |x| (x[0].abs().powf(1.7) + x[1] * x[1]) / 1.7);
        let conj = legendre_transform(&u).unwrap();
        let m = conj.layout().points_per_axis();
        for idx in conj.layout().indices() {
            for a in 0..2 {
                if idx[a] == 0 || idx[a] == m - 1 {
                    continue;
                }
                let mut lo = idx;
                lo[a] -= 1;
                let mut hi = idx;
                hi[a] += 1;
                let mid = conj.value(&idx);
                let avg = 0.5 * (conj.value(&lo) + conj.value(&hi));
                assert!(mid <= avg + 1e-9, "midpoint violation {mid} > {avg}");
            }
        }
    }

    #[test]
    fn double_conjugate_small_for_convex_inputs() {
        let u = grid(1, 3.2, 257, |x| x[0].powi(4) / 4.0);
        assert!(double_conjugate_check(&u).unwrap() < 1e-2);

        let flat = grid(1, 9.0, 257, |x| {
            let t = (x[0].abs() - 1.0).max(0.0);
            t * t
        });
        assert!(double_conjugate_check(&flat).unwrap() < 1e-2);

        let q = grid(2, 8.0, 65, |x| (x[0] * x[0] + x[1] * x[1]) / 2.0);
        let h = q.layout().spacing();
        assert!(double_conjugate_check(&q).unwrap() < 5.0 * h * h);
    }

    #[test]
    fn order_reversing() {
        let u = grid(1, 4.0, 65, |x| x[0] * x[0]);
        let v = grid(1, 4.0, 65, |x| x[0] * x[0] / 2.0); // v <= u nodewise
        let cu = legendre_transform_onto(&u, GridLayout::new(1, 4.0, 65).unwrap()).unwrap();
        let cv = legendre_transform_onto(&v, GridLayout::new(1, 4.0, 65).unwrap()).unwrap();
        for i in 0..65 {
            assert!(cv.values()[i] >= cu.values()[i] - 1e-12);
        }
    }
}
