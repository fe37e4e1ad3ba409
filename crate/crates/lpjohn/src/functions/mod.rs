//! Log-concave functions f = e^{-u} and their calculus.
//!
//! The working class requires u convex, u >= 0, u(o) = 0 and u = u**, so f
//! peaks at the origin with f(o) = 1 and has finite positive mass. Three
//! analytic potential families carry closed forms (quadratics, gauge powers
//! of a polytope, polytope indicators); everything else lives on a sampled
//! grid. The support function h_f = u* is the Fenchel conjugate of the
//! potential; sums and scalar multiples act on p-th powers of support
//! functions and conjugate back.

pub mod body;
pub mod spec_io;

pub use body::ConvexBody;
pub use spec_io::{BodySpec, FunctionSpec, GridSpec};

use crate::error::{Error, Result};
use crate::numerics::{
    condition_number, legendre_transform_onto, Grid, GridLayout, SpdMatrix, MAX_DIM, SENTINEL,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::gamma;

/// Internal box-sizing target: boundary potential at least this large, so the
/// density and the entropy integrand both clear the quadrature decay limit.
const BOX_POTENTIAL_TARGET: f64 = 33.0;

/// Loader acceptance threshold: f < 1e-12 on the boundary, i.e. u > 27.7.
const LOADER_MIN_BOUNDARY_POTENTIAL: f64 = 27.7;

const BOX_PAD: f64 = 1.05;

/// Slope assigned to indicator support data when a conjugate needs a dual
/// box: it sets the ramp width (~1/40) of indicator approximations.
const INDICATOR_DUAL_RANGE: f64 = 40.0;

/// Default points per axis by dimension (1, 2, 3). The two-dimensional
/// default is 257: polytope gauges carry first-order quadrature error from
/// sector jumps of grad u, and 129 points leave too little margin for the
/// percent-level acceptance identities.
pub fn default_points_per_axis(dim: usize) -> usize {
    match dim {
        1 => 513,
        2 => 257,
        _ => 65,
    }
}

/// Resolution / box overrides for function construction.
#[derive(Clone, Copy, Debug, Default)]
pub struct FunctionOptions {
    pub points_per_axis: Option<usize>,
    pub half_width: Option<f64>,
}

impl FunctionOptions {
    pub fn with_resolution(points_per_axis: usize) -> Self {
        FunctionOptions {
            points_per_axis: Some(points_per_axis),
            half_width: None,
        }
    }

    fn points(&self, dim: usize) -> usize {
        self.points_per_axis.unwrap_or_else(|| default_points_per_axis(dim))
    }
}

/// Convex potential variants.
#[derive(Clone, Debug)]
pub enum Potential {
    /// u = x^t Q x / 2 (the function is the Gaussian gamma_Q).
    Quadratic { q: SpdMatrix, q_inv: SpdMatrix },
    /// u = ||x||_K^q / q with q in (1, 8].
    GaugePower {
        body: ConvexBody,
        exponent: f64,
        conj_exponent: f64,
    },
    /// u = 0 on K, +infinity outside: the characteristic function chi_K.
    /// Supported in analytic identities only (no gradient path).
    Indicator { body: ConvexBody },
    /// Sampled potential on a grid.
    SampledGrid { grid: Grid },
    /// Degenerate point mass at the origin (the alpha = beta = 0 convention
    /// of the Asplund sum). Mass 0, support function 0.
    PointMass,
}

/// A log-concave function f = e^{-u} together with its quadrature box.
#[derive(Clone, Debug)]
pub struct LogConcaveFunction {
    dim: usize,
    domain: GridLayout,
    potential: Potential,
    /// Cached h_f = u* for grid-backed potentials.
    support_grid: Option<Grid>,
}

impl LogConcaveFunction {
    // ------------------------------------------------------------------
    // constructors
    // ------------------------------------------------------------------

    pub fn standard_gaussian(dim: usize) -> Result<Self> {
        Self::gaussian(SpdMatrix::identity(dim))
    }

    pub fn gaussian(q: SpdMatrix) -> Result<Self> {
        Self::gaussian_with(q, &FunctionOptions::default())
    }

    pub fn gaussian_with(q: SpdMatrix, opts: &FunctionOptions) -> Result<Self> {
        let dim = q.dim();
        if dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension {dim} > 3")));
        }
        let r = opts
            .half_width
            .unwrap_or_else(|| (2.0 * BOX_POTENTIAL_TARGET / q.min_eigenvalue()).sqrt() * BOX_PAD);
        let domain = GridLayout::new(dim, r, opts.points(dim))?;
        let q_inv = q.inverse();
        Ok(LogConcaveFunction {
            dim,
            domain,
            potential: Potential::Quadratic { q, q_inv },
            support_grid: None,
        })
    }

    pub fn gauge_power(body: ConvexBody, exponent: f64) -> Result<Self> {
        Self::gauge_power_with(body, exponent, &FunctionOptions::default())
    }

    pub fn gauge_power_with(
        body: ConvexBody,
        exponent: f64,
        opts: &FunctionOptions,
    ) -> Result<Self> {
        if !(exponent > 1.0 && exponent <= 8.0) {
            return Err(Error::InvalidParameter(format!(
                "gauge exponent {exponent} outside (1, 8]"
            )));
        }
        let dim = body.dim();
        let conj_exponent = exponent / (exponent - 1.0);
        let g_min = body.min_gauge_on_unit_box_boundary();
        if g_min <= 0.0 {
            return Err(Error::InvalidParameter(
                "body gauge vanishes on the unit box boundary".into(),
            ));
        }
        let r = opts
            .half_width
            .unwrap_or_else(|| (BOX_POTENTIAL_TARGET * exponent).powf(1.0 / exponent) / g_min * BOX_PAD);
        let domain = GridLayout::new(dim, r, opts.points(dim))?;
        Ok(LogConcaveFunction {
            dim,
            domain,
            potential: Potential::GaugePower {
                body,
                exponent,
                conj_exponent,
            },
            support_grid: None,
        })
    }

    pub fn indicator(body: ConvexBody) -> Result<Self> {
        let dim = body.dim();
        let r = body.circumradius() * 1.1;
        let domain = GridLayout::new(dim, r, default_points_per_axis(dim))?;
        Ok(LogConcaveFunction {
            dim,
            domain,
            potential: Potential::Indicator { body },
            support_grid: None,
        })
    }

    pub fn point_mass(dim: usize) -> Self {
        let domain = GridLayout::new(dim, 1.0, 33).expect("static layout");
        LogConcaveFunction {
            dim,
            domain,
            potential: Potential::PointMass,
            support_grid: None,
        }
    }

    /// Loader for sampled potentials. Validates class membership: u(o) = 0,
    /// u >= 0, midpoint convexity on seeded node triples, coercive growth
    /// estimated on the boundary, and f < 1e-12 on every face.
    pub fn from_potential_grid(grid: Grid) -> Result<Self> {
        Self::from_potential_grid_with_support(grid, None)
    }

    fn from_potential_grid_with_support(grid: Grid, support: Option<Grid>) -> Result<Self> {
        let layout = grid.layout();
        let dim = layout.dim();
        let center_idx = [layout.center(); MAX_DIM];
        let at_origin = grid.value(&center_idx);
        if !(at_origin.abs() <= 1e-9) {
            return Err(Error::NotInClass(format!(
                "u(o) = {at_origin:.3e} is not 0"
            )));
        }
        let min = grid
            .values()
            .iter()
            .cloned()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NotInClass(format!(
                "minimum value {min:.3e} is negative"
            )));
        }

        // Midpoint convexity on 1000 seeded node triples.
        let m = layout.points_per_axis();
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_c0de);
        for _ in 0..1000 {
            let mut a = [0usize; MAX_DIM];
            let mut b = [0usize; MAX_DIM];
            let mut mid = [0usize; MAX_DIM];
            for axis in 0..dim {
                loop {
                    let i = rng.gen_range(0..m);
                    let j = rng.gen_range(0..m);
                    if (i + j) % 2 == 0 {
                        a[axis] = i;
                        b[axis] = j;
                        mid[axis] = (i + j) / 2;
                        break;
                    }
                }
            }
            let va = grid.value(&a);
            let vb = grid.value(&b);
            if !va.is_finite() || !vb.is_finite() {
                continue;
            }
            let vm = grid.value(&mid);
            let bound = 0.5 * (va + vb) + 1e-9 * (1.0 + va.abs() + vb.abs());
            if !(vm <= bound) {
                return Err(Error::NotInClass(format!(
                    "midpoint convexity fails at {a:?}/{b:?}: {vm:.6e} > {bound:.6e}"
                )));
            }
        }

        // Coercivity: u(x) >= a ||x|| on the boundary with a > 0; convexity
        // and u(o) = 0 extend the bound along rays beyond the box.
        let mut slope = f64::INFINITY;
        let mut all_sentinel = true;
        for idx in layout.indices() {
            let boundary = (0..dim).any(|a| idx[a] == 0 || idx[a] == m - 1);
            if !boundary {
                continue;
            }
            let v = grid.value(&idx);
            if !v.is_finite() {
                continue;
            }
            all_sentinel = false;
            let x = layout.node(&idx);
            let norm = x[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
            slope = slope.min(v / norm);
        }
        if !all_sentinel && slope <= 1e-6 {
            return Err(Error::NotInClass(format!(
                "coercivity slope estimate {slope:.3e} is not positive"
            )));
        }

        // Boundary decay of the density.
        let bmin = grid.min_boundary_value();
        if bmin < LOADER_MIN_BOUNDARY_POTENTIAL {
            return Err(Error::DecayCheckFailed {
                face: "potential grid boundary".into(),
                max_abs: (-bmin).exp(),
                limit: 1e-12,
            });
        }

        let support_grid = match support {
            Some(s) => Some(s),
            None => Some(crate::numerics::legendre_transform(&grid)?),
        };
        Ok(LogConcaveFunction {
            dim,
            domain: layout,
            potential: Potential::SampledGrid { grid },
            support_grid,
        })
    }

    // ------------------------------------------------------------------
    // accessors and pointwise evaluation
    // ------------------------------------------------------------------

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> GridLayout {
        self.domain
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.potential, Potential::PointMass)
    }

    /// u(x); sentinel (+infinity) where the function vanishes. Grid
    /// potentials return the sentinel outside their box.
    pub fn potential_value(&self, x: &[f64]) -> f64 {
        match &self.potential {
            Potential::Quadratic { q, .. } => q.quad_form(x) / 2.0,
            Potential::GaugePower { body, exponent, .. } => {
                body.gauge(x).powf(*exponent) / exponent
            }
            Potential::Indicator { body } => {
                if body.gauge(x) <= 1.0 + 1e-12 {
                    0.0
                } else {
                    SENTINEL
                }
            }
            Potential::SampledGrid { grid } => grid.interpolate(x).unwrap_or(SENTINEL),
            Potential::PointMass => {
                if x.iter().all(|&c| c == 0.0) {
                    0.0
                } else {
                    SENTINEL
                }
            }
        }
    }

    /// f(x) = e^{-u(x)}.
    pub fn density(&self, x: &[f64]) -> f64 {
        let u = self.potential_value(x);
        if u.is_finite() {
            (-u).exp()
        } else {
            0.0
        }
    }

    /// grad u(x). Errors on indicator and point-mass potentials.
    pub fn potential_gradient(&self, x: &[f64]) -> Result<[f64; MAX_DIM]> {
        match &self.potential {
            Potential::Quadratic { q, .. } => Ok(q.apply(x)),
            Potential::GaugePower { body, exponent, .. } => {
                let g = body.gauge(x);
                if g == 0.0 {
                    return Ok([0.0; MAX_DIM]);
                }
                let gg = body.gauge_gradient(x);
                let scale = g.powf(exponent - 1.0);
                let mut out = [0.0; MAX_DIM];
                for a in 0..self.dim {
                    out[a] = scale * gg[a];
                }
                Ok(out)
            }
            Potential::SampledGrid { grid } => {
                let g = grid.gradient_at(x)?;
                let mut out = [0.0; MAX_DIM];
                out[..g.len()].copy_from_slice(&g);
                Ok(out)
            }
            Potential::Indicator { .. } | Potential::PointMass => Err(Error::Unsupported(
                "indicator potentials have no gradient".into(),
            )),
        }
    }

    /// Support function h_f(y) = u*(y).
    pub fn support_function(&self, y: &[f64]) -> Result<f64> {
        match &self.potential {
            Potential::Quadratic { q_inv, .. } => Ok(q_inv.quad_form(y) / 2.0),
            Potential::GaugePower {
                body,
                conj_exponent,
                ..
            } => Ok(body.support(y).max(0.0).powf(*conj_exponent) / conj_exponent),
            Potential::Indicator { body } => Ok(body.support(y)),
            Potential::SampledGrid { .. } => {
                let grid = self
                    .support_grid
                    .as_ref()
                    .expect("grid potentials cache their support");
                grid.interpolate(y)
            }
            Potential::PointMass => Ok(0.0),
        }
    }

    /// Support evaluator valid on the box [-needed_half_width, ..]^n.
    /// Grid-backed functions re-conjugate onto a larger dual box on demand.
    pub fn support_evaluator(&self, needed_half_width: f64) -> Result<SupportEval> {
        match &self.potential {
            Potential::Quadratic { q_inv, .. } => Ok(SupportEval::Quadratic {
                q_inv: q_inv.clone(),
            }),
            Potential::GaugePower {
                body,
                conj_exponent,
                ..
            } => Ok(SupportEval::GaugePower {
                body: body.clone(),
                conj_exponent: *conj_exponent,
            }),
            Potential::Indicator { body } => Ok(SupportEval::Indicator { body: body.clone() }),
            Potential::SampledGrid { grid } => {
                let cached = self.support_grid.as_ref().expect("cached support");
                if cached.layout().half_width() >= needed_half_width {
                    Ok(SupportEval::Grid {
                        grid: cached.clone(),
                    })
                } else {
                    let layout = GridLayout::new(
                        self.dim,
                        needed_half_width * 1.05,
                        grid.layout().points_per_axis(),
                    )?;
                    Ok(SupportEval::Grid {
                        grid: legendre_transform_onto(grid, layout)?,
                    })
                }
            }
            Potential::PointMass => Ok(SupportEval::Zero),
        }
    }

    /// Largest sup-norm of grad u over the box: the dual (gradient) range.
    pub fn gradient_sup_bound(&self) -> f64 {
        let r = self.domain.half_width();
        match &self.potential {
            Potential::Quadratic { q, .. } => {
                let mut bound: f64 = 0.0;
                for corner in 0..(1usize << self.dim) {
                    let mut x = [0.0; MAX_DIM];
                    for a in 0..self.dim {
                        x[a] = if corner & (1 << a) != 0 { r } else { -r };
                    }
                    let g = q.apply(&x);
                    for a in 0..self.dim {
                        bound = bound.max(g[a].abs());
                    }
                }
                bound
            }
            Potential::GaugePower { .. } => {
                let mut bound: f64 = 0.0;
                let steps = 64;
                let mut probe = |x: &[f64]| {
                    if let Ok(g) = self.potential_gradient(x) {
                        for a in 0..self.dim {
                            bound = bound.max(g[a].abs());
                        }
                    }
                };
                match self.dim {
                    1 => {
                        probe(&[r]);
                        probe(&[-r]);
                    }
                    _ => {
                        for i in 0..=steps {
                            let t = -r + 2.0 * r * i as f64 / steps as f64;
                            probe(&[r, t]);
                            probe(&[-r, t]);
                            probe(&[t, r]);
                            probe(&[t, -r]);
                        }
                    }
                }
                bound
            }
            Potential::Indicator { .. } => INDICATOR_DUAL_RANGE,
            Potential::SampledGrid { grid } => grid.max_finite_slope(),
            Potential::PointMass => 1.0,
        }
    }

    /// Largest p for which the first variation along quadratically growing
    /// directions (Gaussians) converges. Gauge powers with exponent q < 2
    /// have support functions of homogeneity degree q' > 2, so near the
    /// origin the density h_f^{1-p} outgrows h_gamma^p once
    /// p >= (q + 2) / (2 - q); beyond that the integral diverges and no
    /// Gaussian is an admissible perturbation. Other variants have
    /// quadratic-comparable origin behavior and admit every finite p.
    pub fn gaussian_admissible_p_sup(&self) -> f64 {
        match &self.potential {
            Potential::GaugePower { exponent, .. } if *exponent < 2.0 => {
                (exponent + 2.0) / (2.0 - exponent)
            }
            _ => f64::INFINITY,
        }
    }

    /// Spot-check evenness f(x) = f(-x) at seeded sample points.
    pub fn is_even(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let r = self.domain.half_width() * 0.9;
        for _ in 0..samples {
            let mut x = [0.0; MAX_DIM];
            for a in 0..self.dim {
                x[a] = rng.gen_range(-r..r);
            }
            let neg: Vec<f64> = x[..self.dim].iter().map(|&c| -c).collect();
            let fx = self.density(&x[..self.dim]);
            let fn_ = self.density(&neg);
            if (fx - fn_).abs() > 1e-9 * (1.0 + fx.abs()) {
                return false;
            }
        }
        true
    }

    // ------------------------------------------------------------------
    // masses
    // ------------------------------------------------------------------

    /// Density samples on the quadrature box.
    pub fn density_grid(&self) -> Result<Grid> {
        Grid::from_fn(self.domain, |x| self.density(x))
    }

    /// Total mass J(f). Closed forms for the analytic variants:
    /// (2 pi)^{n/2} det(Q)^{-1/2} for Gaussians,
    /// n V(K) q^{n/q - 1} Gamma(n/q) for gauge powers, V(K) for indicators.
    pub fn total_mass(&self) -> Result<f64> {
        match &self.potential {
            Potential::Quadratic { q, .. } => {
                let n = self.dim as f64;
                Ok((2.0 * std::f64::consts::PI).powf(n / 2.0) / q.det().sqrt())
            }
            Potential::GaugePower { body, exponent, .. } => {
                let n = self.dim as f64;
                Ok(n * body.volume() * exponent.powf(n / exponent - 1.0) * gamma(n / exponent))
            }
            Potential::Indicator { body } => Ok(body.volume()),
            Potential::SampledGrid { .. } => self.total_mass_quadrature(),
            Potential::PointMass => Ok(0.0),
        }
    }

    /// Trapezoid cross-check path for the mass.
    pub fn total_mass_quadrature(&self) -> Result<f64> {
        self.density_grid()?.integrate()
    }

    /// Entropy-adjusted mass n J(f) + integral of f log f
    /// (= n J(f) - integral of u e^{-u}).
    pub fn entropy_mass(&self) -> Result<f64> {
        let n = self.dim as f64;
        match &self.potential {
            Potential::Quadratic { .. } => Ok(self.total_mass()? * n / 2.0),
            Potential::GaugePower { exponent, .. } => {
                Ok(self.total_mass()? * n * (1.0 - 1.0 / exponent))
            }
            Potential::Indicator { body } => Ok(n * body.volume()),
            Potential::SampledGrid { .. } => {
                let j = self.total_mass_quadrature()?;
                let weighted = Grid::from_fn(self.domain, |x| {
                    let u = self.potential_value(x);
                    if u.is_finite() {
                        u * (-u).exp()
                    } else {
                        0.0
                    }
                })?;
                Ok(n * j - weighted.integrate()?)
            }
            Potential::PointMass => Ok(0.0),
        }
    }

    // ------------------------------------------------------------------
    // GL(n) images and polars
    // ------------------------------------------------------------------

    /// x -> f(Tx) for invertible T.
    pub fn gl_image(&self, t: &DMatrix<f64>) -> Result<Self> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{}, function is dimension {}",
                t.nrows(),
                t.ncols(),
                self.dim
            )));
        }
        let cond = condition_number(t);
        if !cond.is_finite() || cond > 1e8 {
            return Err(Error::NearSingular(cond));
        }
        let opts = FunctionOptions {
            points_per_axis: Some(self.domain.points_per_axis()),
            half_width: None,
        };
        match &self.potential {
            Potential::Quadratic { q, .. } => Self::gaussian_with(q.congruence(t)?, &opts),
            Potential::GaugePower { body, exponent, .. } => {
                Self::gauge_power_with(body.preimage(t)?, *exponent, &opts)
            }
            Potential::Indicator { body } => Self::indicator(body.preimage(t)?),
            Potential::SampledGrid { grid } => {
                // Resample u(Tx) on a box guaranteed to map inside the old one.
                let norm_inf = (0..self.dim)
                    .map(|i| (0..self.dim).map(|j| t[(i, j)].abs()).sum::<f64>())
                    .fold(0.0f64, f64::max);
                let r_new = grid.layout().half_width() / norm_inf;
                let layout = GridLayout::new(self.dim, r_new, grid.layout().points_per_axis())?;
                let resampled = Grid::from_fn(layout, |x| {
                    let mut tx = [0.0; MAX_DIM];
                    for i in 0..self.dim {
                        for j in 0..self.dim {
                            tx[i] += t[(i, j)] * x[j];
                        }
                    }
                    grid.interpolate(&tx[..self.dim]).unwrap_or(SENTINEL)
                })?;
                Self::from_potential_grid(resampled)
            }
            Potential::PointMass => Ok(Self::point_mass(self.dim)),
        }
    }

    /// Polar function e^{-u*}. Gaussians invert their matrix; gauge powers
    /// swap (K, q) for (K polar, q/(q-1)); grid potentials conjugate onto a
    /// dual box enlarged until the polar density decays.
    pub fn polar(&self) -> Result<Self> {
        match &self.potential {
            Potential::Quadratic { q_inv, .. } => Self::gaussian_with(
                q_inv.clone(),
                &FunctionOptions {
                    points_per_axis: Some(self.domain.points_per_axis()),
                    half_width: None,
                },
            ),
            Potential::GaugePower {
                body,
                exponent,
                conj_exponent,
            } => {
                if !(*conj_exponent > 1.0 && *conj_exponent <= 8.0) {
                    return Err(Error::Unsupported(format!(
                        "polar exponent {conj_exponent} falls outside the supported (1, 8]; \
                         gauge exponent was {exponent}"
                    )));
                }
                Self::gauge_power_with(
                    body.polar()?,
                    *conj_exponent,
                    &FunctionOptions {
                        points_per_axis: Some(self.domain.points_per_axis()),
                        half_width: None,
                    },
                )
            }
            Potential::SampledGrid { grid } => {
                let m = grid.layout().points_per_axis();
                let mut r = crate::numerics::estimate_dual_layout(grid).half_width();
                for _ in 0..10 {
                    let layout = GridLayout::new(self.dim, r, m)?;
                    let conj = legendre_transform_onto(grid, layout)?;
                    if conj.min_boundary_value() >= LOADER_MIN_BOUNDARY_POTENTIAL * 1.02 {
                        return Self::from_potential_grid(conj);
                    }
                    r *= 1.6;
                }
                Err(Error::DecayCheckFailed {
                    face: "polar dual box".into(),
                    max_abs: f64::NAN,
                    limit: 1e-12,
                })
            }
            Potential::Indicator { .. } => Err(Error::Unsupported(
                "polar of an indicator leaves the supported potential families".into(),
            )),
            Potential::PointMass => Err(Error::Unsupported(
                "polar of the point mass is not integrable".into(),
            )),
        }
    }
}

/// Support-function evaluator decoupled from the owning function.
#[derive(Clone, Debug)]
pub enum SupportEval {
    Quadratic { q_inv: SpdMatrix },
    GaugePower { body: ConvexBody, conj_exponent: f64 },
    Indicator { body: ConvexBody },
    Grid { grid: Grid },
    Zero,
}

impl SupportEval {
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            SupportEval::Quadratic { q_inv } => Ok(q_inv.quad_form(y) / 2.0),
            SupportEval::GaugePower {
                body,
                conj_exponent,
            } => Ok(body.support(y).max(0.0).powf(*conj_exponent) / conj_exponent),
            SupportEval::Indicator { body } => Ok(body.support(y)),
            SupportEval::Grid { grid } => grid.interpolate(y),
            SupportEval::Zero => Ok(0.0),
        }
    }
}

// ----------------------------------------------------------------------
// L_p scalar multiplication and Asplund sum
// ----------------------------------------------------------------------

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must be a finite real >= 1"
        )));
    }
    Ok(())
}

/// lambda ._p f: the function whose support function is lambda^{1/p} h_f.
/// For Gaussians this is gamma_{Q / lambda^{1/p}}; for grids it is the right
/// scalar multiple u -> c u(x/c) with c = lambda^{1/p}.
pub fn lp_scalar_mult(lambda: f64, f: &LogConcaveFunction, p: f64) -> Result<LogConcaveFunction> {
    check_p(p)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be a positive real"
        )));
    }
    if (lambda - 1.0).abs() < 1e-15 {
        return Ok(f.clone());
    }
    let c = lambda.powf(1.0 / p);
    let opts = FunctionOptions {
        points_per_axis: Some(f.domain.points_per_axis()),
        half_width: None,
    };
    match &f.potential {
        Potential::Quadratic { q, .. } => LogConcaveFunction::gaussian_with(q.scaled(1.0 / c)?, &opts),
        Potential::GaugePower {
            body,
            exponent,
            conj_exponent,
        } => LogConcaveFunction::gauge_power_with(
            body.scaled(c.powf(1.0 / conj_exponent))?,
            *exponent,
            &opts,
        ),
        Potential::Indicator { body } => LogConcaveFunction::indicator(body.scaled(c)?),
        Potential::SampledGrid { grid } => {
            // (u c)(x) = c u(x/c): same node values scaled by c on a box
            // scaled by c. Shrinking (c < 1) can lose boundary decay, which
            // the loader reports honestly.
            let layout = GridLayout::new(
                f.dim,
                grid.layout().half_width() * c,
                grid.layout().points_per_axis(),
            )?;
            let values: Vec<f64> = grid.values().iter().map(|&v| v * c).collect();
            LogConcaveFunction::from_potential_grid(Grid::new(layout, values)?)
        }
        Potential::PointMass => Ok(LogConcaveFunction::point_mass(f.dim)),
    }
}

/// Layouts used by the grid path of the Asplund sum, exposed so difference
/// quotients can pin them across evaluations.
#[derive(Clone, Copy, Debug)]
pub struct SumLayout {
    pub dual: GridLayout,
    pub primal: GridLayout,
}

/// Grid route of the L_p Asplund sum: build (alpha h_f^p + beta h_g^p)^{1/p}
/// on a dual grid and conjugate back. Returns the layouts so a caller can
/// replay the construction with different coefficients on identical grids.
pub(crate) fn lp_asplund_sum_grid(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    alpha: f64,
    beta: f64,
    p: f64,
    pinned: Option<SumLayout>,
) -> Result<(LogConcaveFunction, SumLayout)> {
    let m = f.domain.points_per_axis().max(g.domain.points_per_axis());
    lp_asplund_sum_grid_scaled(f, g, alpha, beta, p, pinned, 2 * (m - 1) + 1)
}

/// Same with an explicit dual node count: the conjugate-back bias scales
/// with the square of the dual spacing, and difference quotients use a
/// denser dual grid to keep the bias drift below the Taylor term.
pub(crate) fn lp_asplund_sum_grid_scaled(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    alpha: f64,
    beta: f64,
    p: f64,
    pinned: Option<SumLayout>,
    dual_points: usize,
) -> Result<(LogConcaveFunction, SumLayout)> {
    let dim = f.dim;
    let dual = match pinned {
        Some(l) => l.dual,
        None => {
            let range = f.gradient_sup_bound().max(g.gradient_sup_bound()).max(1.0);
            GridLayout::new(dim, 1.2 * range, dual_points)?
        }
    };

    let hf = support_values_on(f, dual)?;
    let hg = support_values_on(g, dual)?;
    let mut h_values = Vec::with_capacity(hf.len());
    for (a, b) in hf.iter().zip(hg.iter()) {
        let v = (alpha * a.max(0.0).powf(p) + beta * b.max(0.0).powf(p)).powf(1.0 / p);
        h_values.push(v);
    }
    let h_grid = Grid::new(dual, h_values)?;

    let build = |primal: GridLayout| -> Result<LogConcaveFunction> {
        let w = legendre_transform_onto(&h_grid, primal)?;
        LogConcaveFunction::from_potential_grid_with_support(w, Some(h_grid.clone()))
    };

    match pinned {
        Some(l) => Ok((build(l.primal)?, l)),
        None => {
            // The sum's density spreads at the scale of the summands' boxes
            // (wider when coefficients exceed one); grow until it decays.
            let mut r = f.domain().half_width().max(g.domain().half_width());
            let mut last_err = None;
            for _ in 0..8 {
                let primal = GridLayout::new(dim, r, dual.points_per_axis())?;
                let w = legendre_transform_onto(&h_grid, primal)?;
                if w.min_boundary_value() >= LOADER_MIN_BOUNDARY_POTENTIAL * 1.05 {
                    let func = LogConcaveFunction::from_potential_grid_with_support(
                        w,
                        Some(h_grid.clone()),
                    )?;
                    return Ok((func, SumLayout { dual, primal }));
                }
                last_err = Some(Error::DecayCheckFailed {
                    face: "asplund sum primal box".into(),
                    max_abs: (-w.min_boundary_value()).exp(),
                    limit: 1e-12,
                });
                r *= 1.5;
            }
            Err(last_err.unwrap_or_else(|| Error::InvalidParameter("empty enlargement loop".into())))
        }
    }
}

/// h_f sampled on a layout: one exact conjugate pass for grid potentials,
/// closed forms otherwise.
fn support_values_on(f: &LogConcaveFunction, layout: GridLayout) -> Result<Vec<f64>> {
    match &f.potential {
        Potential::SampledGrid { grid } => {
            Ok(legendre_transform_onto(grid, layout)?.values().to_vec())
        }
        _ => {
            let mut values = Vec::with_capacity(layout.node_count());
            for idx in layout.indices() {
                let y = layout.node(&idx);
                values.push(f.support_function(&y[..f.dim])?);
            }
            Ok(values)
        }
    }
}

/// alpha ._p f (+)_p beta ._p g.
///
/// Fast paths: pure scalar multiples when one coefficient vanishes, exact
/// Gaussian algebra when both summands are quadratic and either p = 1 or the
/// matrices are proportional. Everything else goes through the grid route.
pub fn lp_asplund_sum(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    alpha: f64,
    beta: f64,
    p: f64,
) -> Result<LogConcaveFunction> {
    check_p(p)?;
    if alpha < 0.0 || beta < 0.0 || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coefficients ({alpha}, {beta}) must be nonnegative reals"
        )));
    }
    if f.dim != g.dim {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    if alpha == 0.0 && beta == 0.0 {
        return Ok(LogConcaveFunction::point_mass(f.dim));
    }
    if beta == 0.0 {
        return lp_scalar_mult(alpha, f, p);
    }
    if alpha == 0.0 {
        return lp_scalar_mult(beta, g, p);
    }

    if let (Potential::Quadratic { q: qf, q_inv: qf_inv }, Potential::Quadratic { q: qg, q_inv: qg_inv }) =
        (&f.potential, &g.potential)
    {
        let opts = FunctionOptions {
            points_per_axis: Some(f.domain.points_per_axis().max(g.domain.points_per_axis())),
            half_width: None,
        };
        if p == 1.0 {
            // h = alpha h_f + beta h_g is quadratic: Q = (a Qf^-1 + b Qg^-1)^-1.
            let sum_inv = SpdMatrix::new(qf_inv.matrix() * alpha + qg_inv.matrix() * beta)?;
            return LogConcaveFunction::gaussian_with(sum_inv.inverse(), &opts);
        }
        // Proportional pair: Qg = c Qf makes h_g = h_f / c.
        let c = qg.matrix().trace() / qf.matrix().trace();
        if c > 0.0 {
            let diff = qg.matrix() - qf.matrix() * c;
            let scale = qg.matrix().norm().max(1.0);
            if diff.norm() <= 1e-12 * scale {
                let factor = (alpha + beta * c.powf(-p)).powf(1.0 / p);
                return LogConcaveFunction::gaussian_with(qf.scaled(1.0 / factor)?, &opts);
            }
        }
    }

    lp_asplund_sum_grid(f, g, alpha, beta, p, None).map(|(func, _)| func)
}

#[cfg(test)]
mod tests;
