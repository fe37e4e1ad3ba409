//! Surface-measure clouds and first variations of the total mass.
//!
//! The surface measure of f = e^{-u} is the pushforward of f times Lebesgue
//! measure under grad u; its L_p version carries the extra density
//! h_f^{1-p}. Discretized, that is one weighted point per quadrature cell:
//! z = grad u(x), a weight f(x) dx, and the support value h_f(z) obtained
//! from the Fenchel-Young identity h_f(grad u(x)) = <x, grad u(x)> - u(x),
//! which needs no dual interpolation.
//!
//! The first variation of the mass along g is
//!   delta J_p(f, g) = (1/p) * integral of h_g^p d mu_p(f, .)
//! and its normalized form rescales by the entropy-adjusted mass so that
//! delta-bar J_p(f, f) = 1. Computations run on the ratio rho = h_g / h_f,
//! which keeps p up to 32 inside f64 range and matches the probability-
//! measure form of the normalization.

use crate::error::{Error, Result};
use crate::functions::{LogConcaveFunction, Potential, SumLayout, SupportEval};
use crate::numerics::MAX_DIM;
use serde::{Deserialize, Serialize};

/// Cells with h_f below this are singular for p > 1 and get dropped.
pub const EPS_H: f64 = 1e-8;

/// Dropped cells whose gradient is also near zero sit at the potential's
/// minimum; their integrand limit is zero, so they are legitimate drops.
/// Dropped cells with a sizable gradient indicate a degenerate function or a
/// resolution problem and count against the exclusion budget.
const EPS_Z: f64 = 1e-2;

/// Budget for suspicious dropped mass, relative to J(f).
const EXCLUDED_MASS_BUDGET: f64 = 1e-3;

/// Finite-p computations are capped here; beyond it the sup-ratio path is
/// authoritative (h^p overflows and the p-monotone chain bridges to
/// infinity).
pub const P_CAP: f64 = 32.0;

pub(crate) fn check_finite_p(p: f64) -> Result<()> {
    if !(p.is_finite() && (1.0..=P_CAP).contains(&p)) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in [1, {P_CAP}] for cloud-based computations"
        )));
    }
    Ok(())
}

/// Serialize f64 values that may legitimately be infinite as the string
/// "inf" (JSON has no infinity literal).
pub mod inf_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Quadrature discretization of the L_p surface measure of f.
#[derive(Clone, Debug)]
pub struct SurfaceCloud {
    dim: usize,
    p: f64,
    /// Gradient points z_i = grad u(x_i).
    pub points: Vec<[f64; MAX_DIM]>,
    /// h_f(z_i) from the Fenchel-Young identity (nonnegative).
    pub hf: Vec<f64>,
    /// f(x_i) times the trapezoid cell weight.
    pub weights: Vec<f64>,
    /// f-mass of suspicious dropped cells (small h_f, gradient not small).
    pub excluded_mass: f64,
    /// f-mass of cells at the potential minimum (z and h_f both ~ 0),
    /// where the variation integrand vanishes in the limit.
    pub minimum_cell_mass: f64,
    full_mass: f64,
    full_entropy_integral: f64,
    /// J(f-diamond) from [`LogConcaveFunction::entropy_mass`] (closed form
    /// for analytic variants): the normalizer of delta-bar.
    entropy_mass: f64,
    second_moment: [[f64; MAX_DIM]; MAX_DIM],
    max_abs_z: f64,
}

impl SurfaceCloud {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sup-norm radius of the gradient points; evaluators for h_g must
    /// cover this box.
    pub fn max_abs_z(&self) -> f64 {
        self.max_abs_z
    }

    /// Quadrature total mass over every cell (including dropped ones).
    pub fn quadrature_mass(&self) -> f64 {
        self.full_mass
    }

    /// The normalizer J(f-diamond) used by [`Self::normalize_delta`].
    pub fn entropy_mass(&self) -> f64 {
        self.entropy_mass
    }

    /// Entropy-adjusted mass n J(f) - integral of u e^{-u} recomputed with
    /// the cloud's own quadrature weights. Diagnostic: its gap from
    /// [`Self::entropy_mass`] measures the cell-level quadrature error.
    pub fn matched_entropy_mass(&self) -> f64 {
        self.dim as f64 * self.full_mass - self.full_entropy_integral
    }

    /// Second-moment matrix of f: integral of x x^t f dx over the box.
    pub fn second_moment(&self) -> [[f64; MAX_DIM]; MAX_DIM] {
        self.second_moment
    }

    /// delta J_p(f, g) for h_g given by an evaluator.
    pub fn delta_jp<F: Fn(&[f64]) -> Result<f64>>(&self, h_g: F) -> Result<f64> {
        let p = self.p;
        let mut acc = 0.0;
        if p == 1.0 {
            for (z, &w) in self.points.iter().zip(&self.weights) {
                acc += w * h_g(&z[..self.dim])?.max(0.0);
            }
            return Ok(acc);
        }
        for ((z, &hf), &w) in self.points.iter().zip(&self.hf).zip(&self.weights) {
            let rho = h_g(&z[..self.dim])?.max(0.0) / hf;
            acc += w * hf * rho.powf(p);
        }
        Ok(acc / p)
    }

    /// (p delta / entropy mass)^{1/p}.
    pub fn normalize_delta(&self, delta: f64) -> f64 {
        (self.p * delta / self.entropy_mass).powf(1.0 / self.p)
    }
}

/// Build the L_p surface cloud of f: one point per quadrature cell.
pub fn surface_cloud(f: &LogConcaveFunction, p: f64) -> Result<SurfaceCloud> {
    check_finite_p(p)?;
    match f.potential() {
        Potential::Indicator { .. } | Potential::PointMass => {
            return Err(Error::Unsupported(
                "indicator potentials have no gradient; the surface cloud is undefined".into(),
            ))
        }
        _ => {}
    }

    let dim = f.dim();
    let layout = f.domain();
    let entropy_mass = f.entropy_mass()?;
    let mut cloud = SurfaceCloud {
        dim,
        p,
        points: Vec::with_capacity(layout.node_count()),
        hf: Vec::with_capacity(layout.node_count()),
        weights: Vec::with_capacity(layout.node_count()),
        excluded_mass: 0.0,
        minimum_cell_mass: 0.0,
        full_mass: 0.0,
        full_entropy_integral: 0.0,
        entropy_mass,
        second_moment: [[0.0; MAX_DIM]; MAX_DIM],
        max_abs_z: 0.0,
    };

    let grid_potential = match f.potential() {
        Potential::SampledGrid { grid } => Some(grid),
        _ => None,
    };

    let h = layout.spacing();
    let cell = h.powi(dim as i32);
    let m = layout.points_per_axis();

    for idx in layout.indices() {
        let x = layout.node(&idx);
        let (u, z) = match grid_potential {
            Some(grid) => {
                let u = grid.value(&idx);
                if !u.is_finite() {
                    continue; // zero density
                }
                match grid.node_gradient_ho(&idx) {
                    Some(g) => (u, g),
                    None => {
                        // Finite node whose stencil touches a sentinel:
                        // unprocessable, so its mass counts as excluded.
                        let mut w = cell * (-u).exp();
                        for a in 0..dim {
                            if idx[a] == 0 || idx[a] == m - 1 {
                                w *= 0.5;
                            }
                        }
                        cloud.excluded_mass += w;
                        cloud.full_mass += w;
                        cloud.full_entropy_integral += w * u;
                        continue;
                    }
                }
            }
            None => {
                let u = f.potential_value(&x[..dim]);
                if !u.is_finite() {
                    continue;
                }
                (u, f.potential_gradient(&x[..dim])?)
            }
        };

        let mut w = cell * (-u).exp();
        for a in 0..dim {
            if idx[a] == 0 || idx[a] == m - 1 {
                w *= 0.5;
            }
        }
        if w == 0.0 {
            continue;
        }
        cloud.full_mass += w;
        cloud.full_entropy_integral += w * u;
        for a in 0..dim {
            for b in 0..dim {
                cloud.second_moment[a][b] += w * x[a] * x[b];
            }
        }

        let dot: f64 = (0..dim).map(|a| x[a] * z[a]).sum();
        let hf = (dot - u).max(0.0);
        let abs_z = (0..dim).map(|a| z[a].abs()).fold(0.0f64, f64::max);

        if p > 1.0 && hf < EPS_H {
            if abs_z <= EPS_Z {
                cloud.minimum_cell_mass += w;
            } else {
                cloud.excluded_mass += w;
            }
            continue;
        }

        cloud.max_abs_z = cloud.max_abs_z.max(abs_z);
        cloud.points.push(z);
        cloud.hf.push(hf);
        cloud.weights.push(w);
    }

    let budget = EXCLUDED_MASS_BUDGET * cloud.full_mass;
    if cloud.excluded_mass > budget {
        return Err(Error::ExcludedMassTooLarge {
            dropped: cloud.excluded_mass,
            limit: budget,
            p,
        });
    }
    Ok(cloud)
}

/// First variation of the total mass at f along g, with its normalization.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VariationReport {
    #[serde(with = "inf_format")]
    pub p: f64,
    /// Absent for p = infinity (the sup-ratio carries no scale).
    pub delta_jp: Option<f64>,
    #[serde(with = "inf_format")]
    pub normalized: f64,
    pub entropy_mass_used: Option<f64>,
    pub cloud_size: usize,
    pub excluded_mass: f64,
}

/// delta J_p(f, g) over the surface cloud, normalized per the probability
/// form: delta-bar = (p delta / J(f-diamond))^{1/p}.
pub fn lp_first_variation(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    p: f64,
) -> Result<VariationReport> {
    if matches!(g.potential(), Potential::Quadratic { .. }) && p >= f.gaussian_admissible_p_sup()
    {
        return Err(Error::Unsupported(format!(
            "inadmissible perturbation: the first variation of this function along Gaussians              diverges for p >= {:.3}",
            f.gaussian_admissible_p_sup()
        )));
    }
    let cloud = surface_cloud(f, p)?;
    let eval = g.support_evaluator(cloud.max_abs_z() * 1.001)?;
    lp_first_variation_on_cloud(&cloud, &eval)
}

/// delta-bar J_p(f, f), evaluating h_f on the cloud through the same
/// Fenchel-Young values that define the measure density. For grid-backed
/// potentials this avoids amplifying dual-interpolation noise through the
/// p-th power of a ratio that is identically one.
pub fn lp_self_variation(f: &LogConcaveFunction, p: f64) -> Result<VariationReport> {
    let cloud = surface_cloud(f, p)?;
    let delta: f64 = if p == 1.0 {
        cloud
            .points
            .iter()
            .zip(&cloud.hf)
            .zip(&cloud.weights)
            .map(|((_, &hf), &w)| w * hf)
            .sum()
    } else {
        cloud.hf.iter().zip(&cloud.weights).map(|(&hf, &w)| w * hf).sum::<f64>() / p
    };
    Ok(VariationReport {
        p,
        delta_jp: Some(delta),
        normalized: cloud.normalize_delta(delta),
        entropy_mass_used: Some(cloud.entropy_mass()),
        cloud_size: cloud.len(),
        excluded_mass: cloud.excluded_mass,
    })
}

/// Same, reusing a prebuilt cloud (grid searches evaluate many candidates).
pub fn lp_first_variation_on_cloud(
    cloud: &SurfaceCloud,
    h_g: &SupportEval,
) -> Result<VariationReport> {
    let delta = cloud.delta_jp(|z| h_g.eval(z))?;
    Ok(VariationReport {
        p: cloud.p(),
        delta_jp: Some(delta),
        normalized: cloud.normalize_delta(delta),
        entropy_mass_used: Some(cloud.entropy_mass()),
        cloud_size: cloud.len(),
        excluded_mass: cloud.excluded_mass,
    })
}

/// One-sided difference quotient (J(f (+)_p t ._p g) - J(f)) / t.
///
/// Independent oracle for [`lp_first_variation`]: it goes through the
/// Asplund-sum grid route and quadrature masses only, never through the
/// surface cloud. The perturbed and baseline masses are computed on
/// identical dual/primal grids so the conjugation bias cancels in the
/// difference; without that the bias divided by t would swamp the quotient.
pub fn lp_first_variation_fd(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    p: f64,
    t: f64,
) -> Result<f64> {
    check_finite_p(p)?;
    if !(1e-4..=1e-1).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "step t = {t} outside [1e-4, 1e-1]"
        )));
    }
    let mut layout = None;
    fd_quotient_pinned(f, g, p, t, &mut layout)
}

/// Richardson extrapolation of the one-sided quotient: 2 q(t/2) - q(t)
/// cancels the leading O(t) term.
pub fn lp_first_variation_fd_richardson(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    p: f64,
    t: f64,
) -> Result<f64> {
    let mut layout = None;
    let q_t = fd_quotient_pinned(f, g, p, t, &mut layout)?;
    let q_half = fd_quotient_pinned(f, g, p, t / 2.0, &mut layout)?;
    Ok(2.0 * q_half - q_t)
}

/// Difference quotient with the sum layouts pinned across calls. The dual
/// grid is oversampled (capped at 513 nodes per axis above one dimension)
/// so the conjugation-bias drift in t stays below the quotient's Taylor
/// term without blowing up the transform cost.
pub(crate) fn fd_quotient_pinned(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    p: f64,
    t: f64,
    layout: &mut Option<SumLayout>,
) -> Result<f64> {
    let m = f.domain().points_per_axis().max(g.domain().points_per_axis());
    let mut dual_points = 4 * (m - 1) + 1;
    if f.dim() > 1 {
        dual_points = dual_points.min(513);
    }
    let (sum_t, used) =
        crate::functions::lp_asplund_sum_grid_scaled(f, g, 1.0, t, p, *layout, dual_points)?;
    *layout = Some(used);
    let (sum_0, _) =
        crate::functions::lp_asplund_sum_grid_scaled(f, g, 1.0, 0.0, p, *layout, dual_points)?;
    Ok((sum_t.total_mass()? - sum_0.total_mass()?) / t)
}

/// Result of the p = infinity variation: sup of h_g / h_f.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupRatioReport {
    #[serde(with = "inf_format")]
    pub value: f64,
    /// Set when the ratio was still growing at the search boundary (or at
    /// the origin); the sup is then reported as +infinity.
    pub unbounded: bool,
    pub argmax_direction: Vec<f64>,
    pub argmax_radius: f64,
}

pub(crate) fn golden_max(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    f: &mut impl FnMut(f64) -> f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Unit directions: the two signs (n = 1), a uniform circle (n = 2), or a
/// Fibonacci sphere (n = 3).
pub fn unit_directions(dim: usize, count: usize) -> Vec<[f64; MAX_DIM]> {
    match dim {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                [a.cos(), a.sin(), 0.0]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    [r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}

struct RaySearch<'a> {
    dim: usize,
    hf: &'a SupportEval,
    hg: &'a SupportEval,
    r_min: f64,
    r_max: f64,
}

impl RaySearch<'_> {
    fn ratio(&self, dir: &[f64; MAX_DIM], r: f64) -> f64 {
        let y: Vec<f64> = dir[..self.dim].iter().map(|&c| c * r).collect();
        let hf = match self.hf.eval(&y) {
            Ok(v) if v > 1e-300 => v,
            _ => return f64::NEG_INFINITY,
        };
        match self.hg.eval(&y) {
            Ok(v) => v.max(0.0) / hf,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Best ratio along a ray: coarse log-spaced scan, golden refinement,
    /// growth detection at both ends.
    fn along(&self, dir: &[f64; MAX_DIM]) -> (f64, f64, bool) {
        let steps = 32;
        let lr_min = self.r_min.ln();
        let lr_max = self.r_max.ln();
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0;
        let mut vals = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let r = (lr_min + (lr_max - lr_min) * i as f64 / steps as f64).exp();
            let v = self.ratio(dir, r);
            vals.push(v);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        if !best.is_finite() {
            return (f64::NEG_INFINITY, self.r_min, false);
        }
        // Growth must be a trend over the last scan decade, not a one-node
        // interpolation wiggle at the search edge.
        let growing = if best_i == steps {
            vals[steps] > vals[steps - 2] * (1.0 + 1e-4)
                && vals[steps - 1] > vals[steps - 3] * (1.0 + 1e-5)
        } else if best_i == 0 {
            vals[0] > vals[2] * (1.0 + 1e-4) && vals[1] > vals[3] * (1.0 + 1e-5)
        } else {
            false
        };
        let lo = (lr_min + (lr_max - lr_min) * best_i.saturating_sub(1) as f64 / steps as f64).exp();
        let hi = (lr_min + (lr_max - lr_min) * (best_i + 1).min(steps) as f64 / steps as f64).exp();
        let mut eval = |r: f64| self.ratio(dir, r);
        let (r_star, v_star) = golden_max(lo, hi, (hi - lo) * 1e-8 + 1e-12, &mut eval);
        (v_star.max(best), r_star, growing)
    }
}

/// delta-bar J_infinity(f, g): the supremum of h_g / h_f over sampled
/// directions, each maximized over the radius by golden section. The best
/// direction is refined locally, so smooth maxima are located well below
/// the angular sampling scale. A ratio still growing at the search edge is
/// reported as +infinity with the `unbounded` flag set.
pub fn sup_ratio_variation(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
) -> Result<SupRatioReport> {
    let dim = f.dim();
    if dim != g.dim() {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }

    // Radial range: inside every grid-backed evaluator's box, capped for
    // analytic pairs; start above the dual spacing where grid support data
    // is meaningful.
    let mut r_max: f64 = 1e3;
    let mut r_min: f64 = 1e-3;
    let mut account = |func: &LogConcaveFunction| {
        if let Potential::SampledGrid { .. } = func.potential() {
            let bound = func.gradient_sup_bound().max(1.0);
            r_max = r_max.min(bound);
            r_min = r_min.max(bound * 1e-4);
        }
    };
    account(f);
    account(g);
    let hf = f.support_evaluator(r_max * 1.05)?;
    let hg = g.support_evaluator(r_max * 1.05)?;
    let search = RaySearch {
        dim,
        hf: &hf,
        hg: &hg,
        r_min,
        r_max: r_max * 0.999,
    };

    let count = if dim == 3 { 256 } else { 64 };
    let dirs = unit_directions(dim, count);
    let mut best = f64::NEG_INFINITY;
    let mut best_dir = dirs[0];
    let mut best_r = r_min;
    let mut unbounded = false;
    let mut coarse = Vec::with_capacity(dirs.len());
    for dir in &dirs {
        let (v, r, grow) = search.along(dir);
        unbounded |= grow;
        coarse.push(v);
        if v > best {
            best = v;
            best_dir = *dir;
            best_r = r;
        }
    }

    // Refine every near-best local maximum, not only the single best sample:
    // symmetric functions have several competing angular maxima and the true
    // sup may sit in a bracket whose sample is slightly below another's.
    match dim {
        1 => {}
        2 => {
            let delta = 2.0 * std::f64::consts::PI / count as f64;
            for i in 0..count {
                let prev = coarse[(i + count - 1) % count];
                let next = coarse[(i + 1) % count];
                let local_max = coarse[i] >= prev && coarse[i] >= next;
                if !(local_max && coarse[i].is_finite() && coarse[i] >= 0.6 * best) {
                    continue;
                }
                let base = (dirs[i][1]).atan2(dirs[i][0]);
                let mut eval = |a: f64| {
                    let d = [a.cos(), a.sin(), 0.0];
                    let (v, r, grow) = search.along(&d);
                    unbounded |= grow;
                    if v > best {
                        best = v;
                        best_dir = d;
                        best_r = r;
                    }
                    v
                };
                golden_max(base - delta, base + delta, 1e-9, &mut eval);
            }
        }
        _ => {
            // Refine the strongest coarse samples with two rounds of
            // coordinate golden section in spherical angles.
            let mut order: Vec<usize> = (0..dirs.len()).collect();
            order.sort_by(|&a, &b| coarse[b].partial_cmp(&coarse[a]).unwrap());
            for &i in order.iter().take(12) {
                if !(coarse[i].is_finite() && coarse[i] >= 0.6 * best) {
                    continue;
                }
                let mut theta = dirs[i][2].clamp(-1.0, 1.0).acos();
                let mut phi = dirs[i][1].atan2(dirs[i][0]);
                let mut delta = (4.0 / count as f64).sqrt() * std::f64::consts::PI;
                for _ in 0..2 {
                    let mut eval_phi = |a: f64| {
                        let d = [theta.sin() * a.cos(), theta.sin() * a.sin(), theta.cos()];
                        let (v, r, grow) = search.along(&d);
                        unbounded |= grow;
                        if v > best {
                            best = v;
                            best_dir = d;
                            best_r = r;
                        }
                        v
                    };
                    let (phi_star, _) = golden_max(phi - delta, phi + delta, 1e-7, &mut eval_phi);
                    phi = phi_star;
                    let mut eval_theta = |a: f64| {
                        let d = [a.sin() * phi.cos(), a.sin() * phi.sin(), a.cos()];
                        let (v, r, grow) = search.along(&d);
                        unbounded |= grow;
                        if v > best {
                            best = v;
                            best_dir = d;
                            best_r = r;
                        }
                        v
                    };
                    let (theta_star, _) =
                        golden_max(theta - delta, theta + delta, 1e-7, &mut eval_theta);
                    theta = theta_star;
                    delta *= 0.25;
                }
            }
        }
    }

    if !best.is_finite() {
        return Err(Error::InvalidParameter(
            "support ratio undefined on the whole search range".into(),
        ));
    }
    Ok(SupRatioReport {
        value: if unbounded { f64::INFINITY } else { best },
        unbounded,
        argmax_direction: best_dir[..dim].to_vec(),
        argmax_radius: best_r,
    })
}

/// Lipschitz diagnostic: |delta-bar(f,g) - delta-bar(f,g0)| against
/// sup|h_g - h_g0| / min h_f, the minimum restricted to cloud points with
/// ||z|| >= r0 (one grid spacing) since h_f vanishes at the origin.
/// Diagnostic only: reported, never asserted.
pub fn lipschitz_diagnostic(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    g0: &LogConcaveFunction,
    p: f64,
) -> Result<(f64, f64)> {
    let cloud = surface_cloud(f, p)?;
    let eg = g.support_evaluator(cloud.max_abs_z() * 1.001)?;
    let eg0 = g0.support_evaluator(cloud.max_abs_z() * 1.001)?;
    let dg = cloud.delta_jp(|z| eg.eval(z))?;
    let dg0 = cloud.delta_jp(|z| eg0.eval(z))?;
    let lhs = (cloud.normalize_delta(dg) - cloud.normalize_delta(dg0)).abs();

    let r0 = f.domain().spacing();
    let mut sup_diff: f64 = 0.0;
    let mut min_hf = f64::INFINITY;
    for (z, &hf) in cloud.points.iter().zip(&cloud.hf) {
        let zs = &z[..f.dim()];
        let norm: f64 = zs.iter().map(|c| c * c).sum::<f64>().sqrt();
        sup_diff = sup_diff.max((eg.eval(zs)? - eg0.eval(zs)?).abs());
        if norm >= r0 {
            min_hf = min_hf.min(hf.max(EPS_H));
        }
    }
    Ok((lhs, sup_diff / min_hf))
}
