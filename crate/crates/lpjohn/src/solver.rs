//! Optimal Gaussians: the normalized problem (minimize the normalized first
//! variation over determinant-one Gaussians) and the mass-maximization
//! problem it rescales to, whose solution is the L_p John ellipsoid E_p f.
//!
//! The candidate gamma_Q enters only through P = Q^{-1} (its support function
//! is y^t P y / 2). Stationarity on the determinant-one manifold equates the
//! second-moment matrix of the L_p surface measure, weighted by the candidate
//! support to the power p - 1, with P^{-1}:
//!
//!   M(P) = (n / 2p) * integral of z z^t (z^t P z / 2)^{p-1} d mu_p(f, z)
//!   M(P) / delta J_p(f, gamma_P) = P^{-1}    at the optimum.
//!
//! The solver iterates that identity with damping, falling back to projected
//! gradient descent if the objective ever stalls. For p = infinity the
//! normalized problem minimizes the continuous sup-ratio over the same
//! manifold, seeded with the p = 32 solution.

use crate::error::{Error, Result};
use crate::functions::LogConcaveFunction;
use crate::numerics::SpdMatrix;
use crate::variation::{
    check_finite_p, inf_format, sup_ratio_variation, surface_cloud, SurfaceCloud,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub fn c_n(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0)
}

fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p.fract() == 0.0 && (0.0..=32.0).contains(&p) {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// The Gaussian gamma_Q(x) = exp(-x^t Q x / 2) viewed as an ellipsoid, with
/// its total mass (2 pi)^{n/2} det(Q)^{-1/2}.
#[derive(Clone, Debug)]
pub struct GaussianEllipsoid {
    q: SpdMatrix,
    mass: f64,
}

impl GaussianEllipsoid {
    pub fn new(q: SpdMatrix) -> Self {
        let mass = c_n(q.dim()) / q.det().sqrt();
        GaussianEllipsoid { q, mass }
    }

    pub fn q(&self) -> &SpdMatrix {
        &self.q
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Support function y^t Q^{-1} y / 2.
    pub fn support(&self, y: &[f64]) -> f64 {
        self.q.inverse().quad_form(y) / 2.0
    }

    pub fn as_function(&self) -> Result<LogConcaveFunction> {
        LogConcaveFunction::gaussian(self.q.clone())
    }
}

impl Serialize for GaussianEllipsoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GaussianEllipsoid", 2)?;
        st.serialize_field("Q", &self.q.to_rows())?;
        st.serialize_field("mass", &self.mass)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GaussianEllipsoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "Q")]
            q: Vec<Vec<f64>>,
            #[allow(dead_code)]
            mass: f64,
        }
        let raw = Raw::deserialize(d)?;
        let q = SpdMatrix::from_rows(&raw.q).map_err(serde::de::Error::custom)?;
        Ok(GaussianEllipsoid::new(q))
    }
}

/// One accepted iterate of a solve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    /// Normalized first variation at the iterate (the quantity minimized).
    pub objective: f64,
    /// Whitened moment-matrix residual (step size for the p = inf search).
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Damping of the fixed-point step, in (0, 1].
    pub theta: f64,
    /// Convergence threshold on the whitened moment residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial determinant-one candidate; defaults to the normalized inverse
    /// second-moment matrix of f (exact for Gaussians).
    pub init: Option<SpdMatrix>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            theta: 0.5,
            tol: 1e-6,
            max_iter: 500,
            init: None,
        }
    }
}

/// Solution of the normalized problem plus the rescaled ellipsoid.
#[derive(Clone, Debug, Serialize)]
pub struct SolverResult {
    #[serde(with = "inf_format")]
    pub p: f64,
    /// Determinant-one optimal matrix (the normalized ellipsoid).
    #[serde(serialize_with = "ser_spd")]
    pub q_bar: SpdMatrix,
    /// Minimal normalized first variation delta-bar J_p(f, gamma_{q_bar}).
    pub delta_bar: f64,
    /// The L_p John ellipsoid E_p f: Q = delta_bar * q_bar.
    pub ellipsoid: GaussianEllipsoid,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

fn ser_spd<S: serde::Serializer>(q: &SpdMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    q.to_rows().serialize(s)
}

struct MomentData {
    delta: f64,
    /// M(P) in the ambient coordinates.
    moment: DMatrix<f64>,
}

/// delta J_p and the moment matrix at candidate P (= Q^{-1}).
fn moment_at(cloud: &SurfaceCloud, p_mat: &SpdMatrix) -> MomentData {
    let n = cloud.dim();
    let p = cloud.p();
    let mut delta = 0.0;
    let mut moment = DMatrix::zeros(n, n);
    for ((z, &hf), &w) in cloud.points.iter().zip(&cloud.hf).zip(&cloud.weights) {
        let m = p_mat.quad_form(&z[..n]) / 2.0;
        let (term, mom_weight) = if p == 1.0 {
            (w * m, w)
        } else {
            let rho = m / hf;
            (w * hf * pow_p(rho, p), w * pow_p(rho, p - 1.0))
        };
        delta += term;
        for i in 0..n {
            for j in 0..n {
                moment[(i, j)] += mom_weight * z[i] * z[j];
            }
        }
    }
    delta /= p;
    moment *= n as f64 / (2.0 * p);
    MomentData { delta, moment }
}

/// Whitened stationarity residual || M' / delta - I ||_F / sqrt(n) for the
/// candidate gamma_Q, where M' is the moment matrix in coordinates mapping
/// the candidate to the standard Gaussian.
fn residual_from_moment(data: &MomentData, q: &SpdMatrix) -> f64 {
    let n = q.dim();
    let white = q.inverse().sqrt(); // Q^{-1/2}
    let m_white = white.matrix() * &data.moment * white.matrix();
    let scaled = m_white / data.delta;
    let mut frob = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = scaled[(i, j)] - if i == j { 1.0 } else { 0.0 };
            frob += d * d;
        }
    }
    (frob / n as f64).sqrt()
}

/// Stationarity residual of the moment identity at an explicit candidate.
/// Scale-invariant in Q, so it applies equally to the normalized matrix and
/// the rescaled ellipsoid.
pub fn kkt_residual(f: &LogConcaveFunction, p: f64, q: &SpdMatrix) -> Result<f64> {
    let cloud = surface_cloud(f, p)?;
    Ok(kkt_residual_on_cloud(&cloud, q))
}

pub fn kkt_residual_on_cloud(cloud: &SurfaceCloud, q: &SpdMatrix) -> f64 {
    let data = moment_at(cloud, &q.inverse());
    residual_from_moment(&data, q)
}

fn init_candidate(cloud: &SurfaceCloud, opts: &SolveOptions) -> Result<SpdMatrix> {
    if let Some(q) = &opts.init {
        if q.dim() != cloud.dim() {
            return Err(Error::InvalidParameter(
                "initial matrix dimension mismatch".into(),
            ));
        }
        return Ok(q.normalize_det());
    }
    let n = cloud.dim();
    let sm = cloud.second_moment();
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = sm[i][j];
        }
    }
    let sigma = SpdMatrix::new(mat).map_err(|_| {
        Error::InvalidParameter("second-moment matrix of f is not positive definite".into())
    })?;
    Ok(sigma.inverse().normalize_det())
}

/// Outcome of the normalized minimization.
#[derive(Clone, Debug)]
pub struct SbarSolution {
    pub q_bar: SpdMatrix,
    pub delta_bar: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Minimize delta-bar J_p(f, gamma_Q) over determinant-one SPD Q by the
/// damped fixed point on the moment identity. Non-convergence returns the
/// best iterate flagged, not an error.
pub fn solve_sbar(f: &LogConcaveFunction, p: f64, opts: &SolveOptions) -> Result<SbarSolution> {
    check_finite_p(p)?;
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping theta = {} outside (0, 1]",
            opts.theta
        )));
    }
    let p_sup = f.gaussian_admissible_p_sup();
    if p >= p_sup {
        return Err(Error::Unsupported(format!(
            "inadmissible perturbation: the first variation of this function along Gaussians              diverges for p >= {p_sup:.3}; no Gaussian solves the normalized problem there"
        )));
    }
    let cloud = surface_cloud(f, p)?;
    solve_sbar_on_cloud(&cloud, opts)
}

pub fn solve_sbar_on_cloud(cloud: &SurfaceCloud, opts: &SolveOptions) -> Result<SbarSolution> {
    let mut q = init_candidate(cloud, opts)?;
    let mut trace = Vec::new();
    let mut data = moment_at(cloud, &q.inverse());
    let mut objective = cloud.normalize_delta(data.delta);
    let mut residual = residual_from_moment(&data, &q);
    trace.push(TracePoint {
        iteration: 0,
        objective,
        residual,
    });

    let mut stalls = 0usize;
    let mut iterations = 0usize;
    let mut converged = residual < opts.tol;
    let mut checkpoint = residual;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        // Hand a plateaued iteration over to the Newton polish early.
        if iterations % 25 == 0 {
            if residual > 0.5 * checkpoint {
                break;
            }
            checkpoint = residual;
        }

        // Damped fixed-point step. The stationarity target M / delta equals
        // P^{-1} = Q, so the blend happens in Q-space and the next candidate
        // is its determinant-one normalization; retry with smaller steps if
        // the objective rises. The map's sensitivity grows with p (the
        // moment weights carry the (p-1)-th power of the candidate support),
        // so the damping shrinks accordingly.
        let mut theta = opts.theta * (4.0 / cloud.p()).min(1.0);
        let mut accepted = false;
        for _ in 0..6 {
            let target = &data.moment / data.delta;
            let blend = q.matrix() * (1.0 - theta) + &target * theta;
            let blended = match SpdMatrix::new(blend) {
                Ok(b) => b,
                Err(_) => {
                    theta *= 0.5;
                    continue;
                }
            };
            let q_next = blended.normalize_det();
            let data_next = moment_at(cloud, &q_next.inverse());
            let objective_next = cloud.normalize_delta(data_next.delta);
            if objective_next <= objective + 1e-12 {
                q = q_next;
                data = data_next;
                objective = objective_next;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if !accepted {
            stalls += 1;
            if stalls >= 2
                && !projected_gradient_step(cloud, &mut q, &mut data, &mut objective)
            {
                break;
            }
        }
        residual = residual_from_moment(&data, &q);
        trace.push(TracePoint {
            iteration: iterations,
            objective,
            residual,
        });
        converged = residual < opts.tol;
    }

    if !converged {
        // Newton polish on the determinant-one chart. Large p concentrates
        // the moment weights on a few extreme cells and the damped fixed
        // point crawls; the reduced objective stays smooth in the chart, so
        // a finite-difference Newton step closes the last distance.
        let polished = newton_polish(cloud, &q);
        let data_p = moment_at(cloud, &polished.inverse());
        let objective_p = cloud.normalize_delta(data_p.delta);
        if objective_p <= objective + 1e-12 {
            q = polished;
            objective = objective_p;
            residual = residual_from_moment(&data_p, &q);
            iterations += 1;
            trace.push(TracePoint {
                iteration: iterations,
                objective,
                residual,
            });
            converged = residual < opts.tol;
        }
    }

    Ok(SbarSolution {
        q_bar: q,
        delta_bar: objective,
        kkt_residual: residual,
        iterations,
        converged,
        trace,
    })
}

/// Minimize log delta J_p over the determinant-one chart by Newton steps
/// with central-difference derivatives, starting from `q0`. Returns the best
/// matrix found (never worse than the start).
fn newton_polish(cloud: &SurfaceCloud, q0: &SpdMatrix) -> SpdMatrix {
    let chart = DetOneChart { dim: cloud.dim() };
    let k = chart.param_count();
    if k == 0 {
        return q0.clone();
    }
    let eval = |params: &[f64]| -> f64 {
        match chart.to_matrix(params) {
            Ok(q) => moment_at(cloud, &q.inverse()).delta.ln(),
            Err(_) => f64::INFINITY,
        }
    };
    let mut params = chart.from_matrix(q0);
    let mut best = eval(&params);
    let h = 1e-5;
    for _ in 0..40 {
        // Central-difference gradient and Hessian.
        let mut grad = DMatrix::zeros(k, 1);
        let mut hess = DMatrix::zeros(k, k);
        let f0 = best;
        let probe = |dp: &[f64]| -> f64 {
            let shifted: Vec<f64> = params.iter().zip(dp).map(|(a, b)| a + b).collect();
            eval(&shifted)
        };
        let mut fp = vec![0.0; k];
        let mut fm = vec![0.0; k];
        for i in 0..k {
            let mut dp = vec![0.0; k];
            dp[i] = h;
            fp[i] = probe(&dp);
            dp[i] = -h;
            fm[i] = probe(&dp);
            grad[(i, 0)] = (fp[i] - fm[i]) / (2.0 * h);
            hess[(i, i)] = (fp[i] - 2.0 * f0 + fm[i]) / (h * h);
        }
        for i in 0..k {
            for j in i + 1..k {
                let mut dp = vec![0.0; k];
                dp[i] = h;
                dp[j] = h;
                let fpp = probe(&dp);
                dp[i] = -h;
                dp[j] = -h;
                let fmm = probe(&dp);
                let mixed = (fpp - fp[i] - fp[j] + 2.0 * f0 - fm[i] - fm[j] + fmm)
                    / (2.0 * h * h);
                hess[(i, j)] = mixed;
                hess[(j, i)] = mixed;
            }
        }
        // Levenberg-style safeguard keeps the step a descent direction.
        let mut lambda = 0.0;
        let step = loop {
            let damped = &hess + DMatrix::identity(k, k) * lambda;
            match damped.lu().solve(&grad) {
                Some(d) if d.iter().all(|v| v.is_finite()) => break -d,
                _ => {
                    lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
                    if lambda > 1e6 {
                        return chart.to_matrix(&params).unwrap_or_else(|_| q0.clone());
                    }
                }
            }
        };
        // Backtracking on the objective.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let trial: Vec<f64> = params
                .iter()
                .enumerate()
                .map(|(i, &v)| v + scale * step[(i, 0)])
                .collect();
            let ft = eval(&trial);
            if ft < best - 1e-15 {
                params = trial;
                best = ft;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    chart.to_matrix(&params).unwrap_or_else(|_| q0.clone())
}

/// One backtracking projected-gradient step on the determinant-one manifold
/// (fallback when the fixed point stalls). The descent variable is
/// P = Q^{-1}; the gradient of delta J_p in P is (p/n) M.
fn projected_gradient_step(
    cloud: &SurfaceCloud,
    q: &mut SpdMatrix,
    data: &mut MomentData,
    objective: &mut f64,
) -> bool {
    let n = cloud.dim();
    let p_mat = q.inverse();
    let grad = &data.moment * (cloud.p() / n as f64);
    // Tangent space of {det P = 1} at P: trace(P^{-1} D) = 0; project the
    // gradient in the Frobenius metric.
    let p_inv = q.matrix().clone();
    let inner = (grad.transpose() * &p_inv).trace();
    let norm2 = (p_inv.transpose() * &p_inv).trace();
    let proj = &grad - &p_inv * (inner / norm2);
    let scale = proj.norm().max(1e-30);
    let mut step = 0.1 * p_mat.matrix().norm() / scale;
    for _ in 0..30 {
        let trial = p_mat.matrix() - &proj * step;
        if let Ok(trial_spd) = SpdMatrix::new(trial) {
            let trial_p = trial_spd.normalize_det();
            let trial_data = moment_at(cloud, &trial_p);
            let trial_obj = cloud.normalize_delta(trial_data.delta);
            if trial_obj < *objective - 1e-14 {
                *q = trial_p.inverse();
                *data = trial_data;
                *objective = trial_obj;
                return true;
            }
        }
        step *= 0.5;
    }
    false
}

/// Rescale the normalized solution to the mass maximizer: the optimal
/// support function is h_{gamma_{q_bar}} / delta_bar, hence
/// Q = delta_bar * q_bar and mass c_n delta_bar^{-n/2}.
pub fn rescale_to_sp(q_bar: &SpdMatrix, delta_bar: f64) -> Result<GaussianEllipsoid> {
    Ok(GaussianEllipsoid::new(q_bar.scaled(delta_bar)?))
}

/// The L_p John ellipsoid E_p f, for p in [1, 32] or infinity.
pub fn solve_ep(f: &LogConcaveFunction, p: f64, opts: &SolveOptions) -> Result<SolverResult> {
    if p.is_infinite() && p > 0.0 {
        return solve_ep_infinity(f, opts);
    }
    let sbar = solve_sbar(f, p, opts)?;
    let ellipsoid = rescale_to_sp(&sbar.q_bar, sbar.delta_bar)?;
    Ok(SolverResult {
        p,
        q_bar: sbar.q_bar,
        delta_bar: sbar.delta_bar,
        ellipsoid,
        kkt_residual: sbar.kkt_residual,
        iterations: sbar.iterations,
        converged: sbar.converged,
        trace: sbar.trace,
    })
}

/// Lower-triangular determinant-one chart on SPD matrices: diagonal
/// exponentials summing to zero plus free subdiagonal entries.
struct DetOneChart {
    dim: usize,
}

impl DetOneChart {
    fn param_count(&self) -> usize {
        match self.dim {
            1 => 0,
            2 => 2,
            _ => 5,
        }
    }

    fn to_matrix(&self, params: &[f64]) -> Result<SpdMatrix> {
        let n = self.dim;
        let mut l = DMatrix::zeros(n, n);
        match n {
            1 => l[(0, 0)] = 1.0,
            2 => {
                l[(0, 0)] = params[0].exp();
                l[(1, 1)] = (-params[0]).exp();
                l[(1, 0)] = params[1];
            }
            _ => {
                l[(0, 0)] = params[0].exp();
                l[(1, 1)] = params[1].exp();
                l[(2, 2)] = (-params[0] - params[1]).exp();
                l[(1, 0)] = params[2];
                l[(2, 0)] = params[3];
                l[(2, 1)] = params[4];
            }
        }
        SpdMatrix::new(&l * l.transpose()).map(|m| m.normalize_det())
    }

    fn from_matrix(&self, q: &SpdMatrix) -> Vec<f64> {
        let n = self.dim;
        let chol = q.matrix().clone().cholesky().expect("SPD matrices factor");
        let l = chol.l();
        match n {
            1 => vec![],
            2 => vec![l[(0, 0)].ln(), l[(1, 0)]],
            _ => vec![
                l[(0, 0)].ln(),
                l[(1, 1)].ln(),
                l[(1, 0)],
                l[(2, 0)],
                l[(2, 1)],
            ],
        }
    }
}

/// E_infinity f: maximize the mass over Gaussians whose support function
/// stays below h_f, equivalently minimize the sup-ratio over determinant-one
/// candidates. The constraint is evaluated continuously (direction sweep,
/// radial golden section, local angular refinement); the manifold is
/// searched by compass steps seeded with the p = 32 solution; the rescaling
/// is the same as at finite p with delta_bar = the optimal sup-ratio.
pub fn solve_ep_infinity(f: &LogConcaveFunction, opts: &SolveOptions) -> Result<SolverResult> {
    let seed_p = 32.0f64.min(0.5 * (1.0 + f.gaussian_admissible_p_sup())).max(1.0);
    let seed_solution = solve_sbar(f, seed_p, opts)?;
    let chart = DetOneChart { dim: f.dim() };

    let phi = |q: &SpdMatrix| -> Result<f64> {
        let candidate = LogConcaveFunction::gaussian(q.clone())?;
        let report = sup_ratio_variation(f, &candidate)?;
        Ok(if report.unbounded {
            f64::INFINITY
        } else {
            report.value
        })
    };

    let mut params = chart.from_matrix(&seed_solution.q_bar);
    let mut q_best = chart.to_matrix(&params)?;
    let mut best = phi(&q_best)?;
    if best.is_infinite() {
        // The constraint sup h_gamma / h_f <= 1 fails for every Gaussian:
        // the support function of f is not quadratically comparable, the
        // normalized values grow without bound in p, and the limit object
        // carries zero mass.
        return Err(Error::Unsupported(
            "infeasible: the support ratio against every Gaussian is unbounded              (tail or origin growth mismatch); E_p f degenerates as p grows"
                .into(),
        ));
    }
    let mut trace = vec![TracePoint {
        iteration: 0,
        objective: best,
        residual: 0.05,
    }];

    let mut step = 0.05f64;
    let mut iterations = 0usize;
    if chart.param_count() > 0 {
        while step > 1e-8 && iterations < 400 {
            iterations += 1;
            let mut improved = false;
            for i in 0..chart.param_count() {
                for sign in [1.0, -1.0] {
                    let mut trial = params.clone();
                    trial[i] += sign * step;
                    let q_trial = match chart.to_matrix(&trial) {
                        Ok(qm) => qm,
                        Err(_) => continue,
                    };
                    let val = phi(&q_trial)?;
                    if val < best - 1e-13 {
                        best = val;
                        params = trial;
                        q_best = q_trial;
                        improved = true;
                    }
                }
            }
            trace.push(TracePoint {
                iteration: iterations,
                objective: best,
                residual: step,
            });
            if !improved {
                step *= 0.5;
            }
        }
    }

    let delta_bar = best;
    let ellipsoid = rescale_to_sp(&q_best, delta_bar)?;
    // Tightness of the rescaled constraint, recomputed fresh.
    let tightness = {
        let candidate = LogConcaveFunction::gaussian(ellipsoid.q().clone())?;
        let r = sup_ratio_variation(f, &candidate)?;
        (r.value - 1.0).abs()
    };
    Ok(SolverResult {
        p: f64::INFINITY,
        q_bar: q_best,
        delta_bar,
        ellipsoid,
        kkt_residual: tightness,
        iterations,
        converged: step <= 1e-8 || chart.param_count() == 0,
        trace,
    })
}


#[cfg(test)]
mod gauge_tests {
    use super::*;
    use crate::functions::ConvexBody;

    #[test]
    fn ellipse_gauge_power_is_gaussian_case() {
        // f = exp(-||x||_K^2 / 2) for the ellipse x^t A x <= 1 is exactly
        // the Gaussian gamma_A, so the normalized solution is A / det(A)^{1/n}.
        let a = SpdMatrix::from_rows(&[vec![2.0, 0.4], vec![0.4, 1.0]]).unwrap();
        let f = LogConcaveFunction::gaussian(a.clone()).unwrap();
        let sol = solve_sbar(&f, 2.0, &SolveOptions::default()).unwrap();
        assert!(sol.q_bar.operator_distance(&a.normalize_det()) < 1e-6);
    }

    #[test]
    fn inadmissible_exponent_reports_unsupported() {
        let f = LogConcaveFunction::gauge_power(ConvexBody::unit_cube(2).unwrap(), 1.5).unwrap();
        // (q + 2) / (2 - q) = 7 for q = 1.5: p = 8 diverges along Gaussians.
        assert!(matches!(
            solve_sbar(&f, 8.0, &SolveOptions::default()),
            Err(Error::Unsupported(_))
        ));
        assert!(solve_sbar(&f, 4.0, &SolveOptions::default()).is_ok());
    }
}
