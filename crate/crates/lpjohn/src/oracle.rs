//! Brute-force ground truth: exhaustive searches, Monte Carlo masses, and
//! dense conjugates. Everything here is deliberately independent of the
//! solver's optimization path; it exists so that derived values in tests are
//! computed, not assumed.

use crate::error::{Error, Result};
use crate::functions::LogConcaveFunction;
use crate::numerics::{GridLayout, SpdMatrix, MAX_DIM};
use crate::variation::{golden_max, surface_cloud};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Search and sampling configuration. Acceptance runs keep the defaults.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Log-spaced eigenvalue-ratio grid for the 2-d search, t in [1/16, 16].
    pub eigen_ratio_steps: usize,
    /// Rotation grid over [0, pi).
    pub rotation_steps: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            eigen_ratio_steps: 49,
            rotation_steps: 36,
            mc_samples: 200_000,
            seed: 42,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.eigen_ratio_steps == 0 || self.rotation_steps == 0 || self.mc_samples == 0 {
            return Err(Error::InvalidParameter(
                "oracle grids and sample counts must be nonempty".into(),
            ));
        }
        Ok(())
    }
}

fn rotation(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

fn q_of(t: f64, theta: f64) -> SpdMatrix {
    let r = rotation(theta);
    let d = DMatrix::from_row_slice(2, 2, &[t, 0.0, 0.0, 1.0 / t]);
    SpdMatrix::new(&r * d * r.transpose()).expect("t > 0 keeps the form positive definite")
}

/// Exhaustive minimization of delta-bar J_p(f, gamma_Q) over determinant-one
/// matrices Q(t, theta) = R(theta) diag(t, 1/t) R(theta)^t, refined by
/// alternating golden section. Dimension 1 is the scalar case Q = 1;
/// dimension 3 is out of the oracle's scope.
pub fn grid_search_sbar(
    f: &LogConcaveFunction,
    p: f64,
    config: &OracleConfig,
) -> Result<(SpdMatrix, f64)> {
    config.validate()?;
    let cloud = surface_cloud(f, p)?;
    let objective = |q: &SpdMatrix| -> f64 {
        let p_mat = q.inverse();
        let delta = cloud
            .delta_jp(|z| Ok(p_mat.quad_form(z) / 2.0))
            .expect("quadratic support evaluation is total");
        cloud.normalize_delta(delta)
    };

    match f.dim() {
        1 => {
            let q = SpdMatrix::identity(1);
            let delta = objective(&q);
            Ok((q, delta))
        }
        2 => {
            let mut best = f64::INFINITY;
            let mut best_t = 1.0;
            let mut best_theta = 0.0;
            let lo = (1.0f64 / 16.0).ln();
            let hi = 16.0f64.ln();
            for i in 0..config.eigen_ratio_steps {
                let t = (lo + (hi - lo) * i as f64 / (config.eigen_ratio_steps - 1).max(1) as f64)
                    .exp();
                for j in 0..config.rotation_steps {
                    let theta = std::f64::consts::PI * j as f64 / config.rotation_steps as f64;
                    let v = objective(&q_of(t, theta));
                    if v < best {
                        best = v;
                        best_t = t;
                        best_theta = theta;
                    }
                }
            }
            // Local refinement: alternate golden section in log t and theta.
            let dt = (hi - lo) / (config.eigen_ratio_steps - 1).max(1) as f64;
            let dth = std::f64::consts::PI / config.rotation_steps as f64;
            let mut lt = best_t.ln();
            for _ in 0..3 {
                let theta_now = best_theta;
                let mut eval_t = |x: f64| -objective(&q_of(x.exp(), theta_now));
                let (lt_star, neg) = golden_max(lt - dt, lt + dt, 1e-6, &mut eval_t);
                lt = lt_star;
                if -neg < best {
                    best = -neg;
                    best_t = lt.exp();
                }
                let t_now = best_t;
                let mut eval_th = |x: f64| -objective(&q_of(t_now, x));
                let (th_star, neg) =
                    golden_max(best_theta - dth, best_theta + dth, 1e-7, &mut eval_th);
                if -neg < best {
                    best = -neg;
                    best_theta = th_star;
                }
            }
            Ok((q_of(best_t, best_theta), best))
        }
        _ => Err(Error::Unsupported(
            "the search oracle covers dimensions 1 and 2 only".into(),
        )),
    }
}

/// Importance-sampled total mass with a Gaussian proposal fitted to the
/// second moments of f. Returns (estimate, standard error).
pub fn mc_total_mass(f: &LogConcaveFunction, config: &OracleConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let dim = f.dim();

    // Second moments via a coarse quadrature of f itself.
    let coarse = GridLayout::new(dim, f.domain().half_width(), 65)?;
    let mut mass = 0.0;
    let mut sm = [[0.0f64; MAX_DIM]; MAX_DIM];
    for idx in coarse.indices() {
        let x = coarse.node(&idx);
        let v = f.density(&x[..dim]);
        mass += v;
        for a in 0..dim {
            for b in 0..dim {
                sm[a][b] += v * x[a] * x[b];
            }
        }
    }
    if mass <= 0.0 {
        return Err(Error::InvalidParameter("function vanishes on its box".into()));
    }
    let mut sigma = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            sigma[(a, b)] = sm[a][b] / mass;
        }
    }
    let sigma = SpdMatrix::new(sigma)?;
    let chol = sigma.sqrt();
    let norm_const =
        (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0) * sigma.det().sqrt();

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let n = config.mc_samples;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut weight_sum = 0.0;
    let mut weight_sq = 0.0;
    for _ in 0..n {
        let mut zraw = [0.0f64; MAX_DIM];
        for za in zraw.iter_mut().take(dim) {
            // Box-Muller on seeded uniforms keeps the stream reproducible.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            *za = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        let x = chol.apply(&zraw[..dim]);
        let z2: f64 = zraw[..dim].iter().map(|c| c * c).sum();
        let proposal_pdf = (-z2 / 2.0).exp() / norm_const;
        let w = f.density(&x[..dim]) / proposal_pdf;
        sum += w;
        sum_sq += w * w;
        weight_sum += w;
        weight_sq += w * w;
    }
    let estimate = sum / n as f64;
    let variance = (sum_sq / n as f64 - estimate * estimate).max(0.0);
    let stderr = (variance / n as f64).sqrt();

    let ess = if weight_sq > 0.0 {
        weight_sum * weight_sum / weight_sq
    } else {
        0.0
    };
    if ess < 0.01 * n as f64 {
        return Err(Error::LowEffectiveSampleSize { ess, n });
    }
    Ok((estimate, stderr))
}

/// Brute-force Fenchel conjugate at a single dual point: the supremum of
/// <x, y> - u(x) over a dense sample of [-radius, radius]^n. Errors when the
/// argmax sits on the sample boundary (radius too small to trust).
pub fn dense_conjugate(
    u: impl Fn(&[f64]) -> f64,
    dim: usize,
    y: &[f64],
    radius: f64,
    samples_per_axis: usize,
) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dimension {dim}")));
    }
    if samples_per_axis < 3 {
        return Err(Error::InvalidParameter("need at least 3 samples per axis".into()));
    }
    let m = samples_per_axis;
    let h = 2.0 * radius / (m - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = [0usize; MAX_DIM];
    let mut idx = [0usize; MAX_DIM];
    loop {
        let mut x = [0.0f64; MAX_DIM];
        for a in 0..dim {
            x[a] = -radius + idx[a] as f64 * h;
        }
        let uv = u(&x[..dim]);
        if uv.is_finite() {
            let dot: f64 = (0..dim).map(|a| x[a] * y[a]).sum();
            let cand = dot - uv;
            if cand > best {
                best = cand;
                best_idx = idx;
            }
        }
        // advance the multi-index
        let mut axis = dim;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < m {
                break;
            }
            idx[axis] = 0;
        }
        if idx == [0; MAX_DIM] {
            break;
        }
    }
    if !best.is_finite() {
        return Err(Error::InvalidParameter(
            "potential infinite on the whole sample".into(),
        ));
    }
    for a in 0..dim {
        if best_idx[a] == 0 || best_idx[a] == m - 1 {
            return Err(Error::OutOfDomain(format!(
                "conjugate argmax on the sample boundary (axis {a}); enlarge the radius"
            )));
        }
    }
    Ok(best)
}

/// Area of the planar convex body { x : <x, w> <= h(w) for all w } given its
/// support function, via the radial function r(theta) = min_w h(w) / <d, w>
/// on dense angle grids. Ground truth for L_p combinations of bodies, which
/// are not polytopes for p > 1.
pub fn support_body_area(h: impl Fn(&[f64]) -> f64, angle_steps: usize) -> f64 {
    let omega_steps = 4 * angle_steps;
    let supports: Vec<(f64, [f64; 2])> = (0..omega_steps)
        .map(|j| {
            let a = 2.0 * std::f64::consts::PI * j as f64 / omega_steps as f64;
            let w = [a.cos(), a.sin()];
            (h(&w), w)
        })
        .collect();
    let mut acc = 0.0;
    for i in 0..angle_steps {
        let a = 2.0 * std::f64::consts::PI * i as f64 / angle_steps as f64;
        let d = [a.cos(), a.sin()];
        let mut r = f64::INFINITY;
        for (hv, w) in &supports {
            let dot = d[0] * w[0] + d[1] * w[1];
            if dot > 1e-9 {
                r = r.min(hv / dot);
            }
        }
        acc += r * r;
    }
    0.5 * acc * 2.0 * std::f64::consts::PI / angle_steps as f64
}

/// Monte Carlo volume of a planar body given by a gauge, over a bounding box.
pub fn gauge_body_area(gauge: impl Fn(&[f64]) -> f64, half_width: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = [
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        ];
        if gauge(&x) <= 1.0 {
            hits += 1;
        }
    }
    (hits as f64 / samples as f64) * (2.0 * half_width) * (2.0 * half_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dense_conjugate_quadratic() {
        let v = dense_conjugate(
            |x| (x[0] * x[0] + x[1] * x[1]) / 2.0,
            2,
            &[1.0, 2.0],
            6.0,
            801,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-4);
    }

    #[test]
    fn dense_conjugate_quartic() {
        let v = dense_conjugate(|x| x[0].powi(4) / 4.0, 1, &[1.0], 3.0, 200_001).unwrap();
        assert_abs_diff_eq!(v, 0.75, epsilon = 1e-8);
    }

    #[test]
    fn dense_conjugate_cube_indicator() {
        let v = dense_conjugate(
            |x| {
                if x[0].abs() <= 1.0 && x[1].abs() <= 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            },
            2,
            &[1.0, 1.0],
            2.0,
            401,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn dense_conjugate_detects_boundary_argmax() {
        // Linear potential: the sup is always attained at the boundary.
        let err = dense_conjugate(|x| x[0], 1, &[3.0], 2.0, 101).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain(_)));
    }

    #[test]
    fn support_area_of_square() {
        let a = support_body_area(|w| w[0].abs() + w[1].abs(), 4096);
        assert_abs_diff_eq!(a, 4.0, epsilon = 2e-3);
    }
}

#[cfg(test)]
mod search_tests {
    use super::*;
    use crate::functions::{ConvexBody, LogConcaveFunction};
    use crate::solver::{solve_sbar, SolveOptions};
    use approx::assert_abs_diff_eq;

    #[test]
    fn search_recovers_gaussian_normalized_solution() {
        let f = LogConcaveFunction::standard_gaussian(2).unwrap();
        let (q, delta) = grid_search_sbar(&f, 2.0, &OracleConfig::default()).unwrap();
        assert!(q.operator_distance(&SpdMatrix::identity(2)) < 1e-2);
        assert_abs_diff_eq!(delta, 1.0, epsilon = 1e-4);

        let g = LogConcaveFunction::gaussian(SpdMatrix::from_diag(&[4.0, 1.0]).unwrap()).unwrap();
        let (qa, da) = grid_search_sbar(&g, 1.0, &OracleConfig::default()).unwrap();
        assert!(qa.operator_distance(&SpdMatrix::from_diag(&[2.0, 0.5]).unwrap()) < 2e-2);
        assert_abs_diff_eq!(da, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn search_agrees_with_fixed_point_on_gauge_power() {
        let f = LogConcaveFunction::gauge_power(ConvexBody::unit_cube(2).unwrap(), 2.0).unwrap();
        for p in [1.0, 2.0] {
            let (q_oracle, d_oracle) = grid_search_sbar(&f, p, &OracleConfig::default()).unwrap();
            let sol = solve_sbar(&f, p, &SolveOptions::default()).unwrap();
            assert!(
                q_oracle.operator_distance(&sol.q_bar) < 1e-2,
                "p={p}: oracle {:?} solver {:?}",
                q_oracle.to_rows(),
                sol.q_bar.to_rows()
            );
            let rel = (d_oracle - sol.delta_bar).abs() / sol.delta_bar;
            assert!(rel < 1e-3, "p={p}: {d_oracle} vs {}", sol.delta_bar);
        }
    }

    #[test]
    fn search_self_consistent_under_refinement() {
        let f = LogConcaveFunction::gauge_power(ConvexBody::unit_cube(2).unwrap(), 2.0).unwrap();
        let coarse = OracleConfig::default();
        let fine = OracleConfig {
            eigen_ratio_steps: 2 * coarse.eigen_ratio_steps,
            rotation_steps: 2 * coarse.rotation_steps,
            ..coarse.clone()
        };
        let (_, d1) = grid_search_sbar(&f, 2.0, &coarse).unwrap();
        let (_, d2) = grid_search_sbar(&f, 2.0, &fine).unwrap();
        assert!((d1 - d2).abs() / d2 < 1e-3, "{d1} vs {d2}");
    }

    #[test]
    fn search_scalar_case() {
        let f = LogConcaveFunction::gaussian(SpdMatrix::from_diag(&[3.0]).unwrap()).unwrap();
        let (q, delta) = grid_search_sbar(&f, 2.0, &OracleConfig::default()).unwrap();
        assert_eq!(q.dim(), 1);
        assert_abs_diff_eq!(q.entry(0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(delta, 3.0, epsilon = 1e-6);
    }
}

#[cfg(test)]
mod mc_tests {
    use super::*;
    use crate::functions::{ConvexBody, LogConcaveFunction};

    fn assert_within_3_sigma(f: &LogConcaveFunction, expected: f64) {
        let (est, stderr) = mc_total_mass(f, &OracleConfig::default()).unwrap();
        assert!(
            (est - expected).abs() <= 3.0 * stderr,
            "estimate {est} +- {stderr} vs {expected}"
        );
    }

    #[test]
    fn mc_standard_gaussian() {
        let f = LogConcaveFunction::standard_gaussian(2).unwrap();
        assert_within_3_sigma(&f, 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn mc_anisotropic_gaussian() {
        let f =
            LogConcaveFunction::gaussian(SpdMatrix::from_diag(&[4.0, 1.0]).unwrap()).unwrap();
        assert_within_3_sigma(&f, std::f64::consts::PI);
    }

    #[test]
    fn mc_square_indicator() {
        let f = LogConcaveFunction::indicator(ConvexBody::unit_cube(2).unwrap()).unwrap();
        assert_within_3_sigma(&f, 4.0);
    }

    #[test]
    fn mc_agrees_with_quadrature() {
        for f in [
            LogConcaveFunction::standard_gaussian(2).unwrap(),
            LogConcaveFunction::gauge_power(ConvexBody::unit_cube(2).unwrap(), 2.0).unwrap(),
        ] {
            let (est, stderr) = mc_total_mass(&f, &OracleConfig::default()).unwrap();
            let quad = f.total_mass_quadrature().unwrap();
            assert!((est - quad).abs() <= 3.0 * stderr, "{est} vs {quad} ({stderr})");
        }
    }

    #[test]
    fn mc_is_deterministic_for_fixed_seed() {
        let f = LogConcaveFunction::standard_gaussian(2).unwrap();
        let a = mc_total_mass(&f, &OracleConfig::default()).unwrap();
        let b = mc_total_mass(&f, &OracleConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
