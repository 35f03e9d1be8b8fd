//! Instance samplers: unplanted, planted, correlated pairs, ensembles and
//! interpolation paths.
//!
//! Planting conditions an n-dimensional Gaussian on `|<sigma*, X>| <=
//! sqrt(n) * C^-n`, an event of probability ~C^-n, so rejection sampling is
//! hopeless. Instead the sigma*-component is conditioned linearly: draw
//! Z ~ N(0, I_n), quantize, then shift along sigma* so that `<sigma*, X>`
//! lands exactly on a freshly drawn truncated-Gaussian target. The
//! orthogonal component is untouched, so the conditional law is exact up to
//! quantization, and the planting inequality holds as an exact integer
//! comparison in every sample.

use crate::energy::{BoundMultiplier, Threshold};
use crate::fixed::{FixedReal, DEFAULT_FRAC_BITS};
use crate::instance::{Instance, Planting};
use crate::partition::Partition;
use crate::rng::{self, derive, substream};
use crate::wide::I256;
use crate::CoreError;

/// Description of one planted draw.
#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub n: usize,
    /// Conditioning base C > 2; the planted objective is at most C^-n.
    pub base_c: f64,
    /// Hidden partition; `None` means all +1.
    pub sigma_star: Option<Partition>,
    pub bound: BoundMultiplier,
    pub frac_bits: u32,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        PlantedSpec {
            n,
            base_c: 3.0,
            sigma_star: None,
            bound: BoundMultiplier::One,
            frac_bits: DEFAULT_FRAC_BITS,
            seed,
        }
    }

    pub fn with_base(mut self, base_c: f64) -> Self {
        self.base_c = base_c;
        self
    }

    pub fn with_sigma_star(mut self, sigma: Partition) -> Self {
        self.sigma_star = Some(sigma);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bound(mut self, bound: BoundMultiplier) -> Self {
        self.bound = bound;
        self
    }

    fn validate(&self) -> Result<(), CoreError> {
        if self.n == 0 {
            return Err(CoreError::EmptyInstance);
        }
        if !(self.base_c > 2.0) || !self.base_c.is_finite() {
            return Err(CoreError::BadBase(self.base_c));
        }
        if let Some(s) = &self.sigma_star {
            if s.n() != self.n {
                return Err(CoreError::DimensionMismatch(s.n(), self.n));
            }
        }
        Ok(())
    }

    fn resolved_sigma_star(&self) -> Partition {
        self.sigma_star
            .clone()
            .unwrap_or_else(|| Partition::all_plus(self.n))
    }
}

/// A planted ensemble: `replicas + 1` independent planted instances
/// X_0..X_m sharing sigma* and C.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub base: PlantedSpec,
    pub replicas: usize,
}

/// n i.i.d. standard normals on the grid; deterministic in (n, seed).
pub fn sample_unplanted(n: usize, seed: u64) -> Result<Instance, CoreError> {
    sample_unplanted_with(n, DEFAULT_FRAC_BITS, seed)
}

pub fn sample_unplanted_with(
    n: usize,
    frac_bits: u32,
    seed: u64,
) -> Result<Instance, CoreError> {
    if n == 0 {
        return Err(CoreError::EmptyInstance);
    }
    let mut rng = substream(seed, 0);
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(FixedReal::quantize(
            rng::standard_normal(&mut rng),
            frac_bits,
        )?);
    }
    Instance::new(x, frac_bits, None)
}

/// One exact conditional sample from the planted measure.
pub fn sample_planted(spec: &PlantedSpec) -> Result<Instance, CoreError> {
    spec.validate()?;
    let n = spec.n;
    let sigma_star = spec.resolved_sigma_star();
    let mut rng = substream(spec.seed, 0);

    let mut x: Vec<I256> = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(
            FixedReal::quantize(rng::standard_normal(&mut rng), spec.frac_bits)?
                .numerator(),
        );
    }

    // Exact numerator of the conditioning bound sqrt(n) * mult * C^-n.
    let bound =
        Threshold::planting_bound(n as u32, spec.frac_bits, spec.base_c, spec.bound)?;
    let bound_num = bound.numerator();

    // Signed component along sigma*, before conditioning.
    let mut s = I256::ZERO;
    for (i, v) in x.iter().enumerate() {
        if sigma_star.sign(i) == 1 {
            s += *v;
        } else {
            s -= *v;
        }
    }

    // Fresh target: G/sqrt(n) ~ N(0,1) truncated to [-mult*C^-n, mult*C^-n],
    // quantized and clamped inside the exact bound.
    let mult = (spec.bound.squared() as f64).sqrt();
    let g = rng::truncated_standard_normal(mult * spec.base_c.powi(-(n as i32)), &mut rng);
    let mut target = FixedReal::quantize((n as f64).sqrt() * g, spec.frac_bits)?.numerator();
    if target.abs() > bound_num {
        target = if target.is_negative() {
            -bound_num
        } else {
            bound_num
        };
    }

    // Distribute the correction S - target over coordinates in integer
    // arithmetic: the first r coordinates absorb one extra grid step.
    let diff = s - target;
    let (q, r) = diff.div_rem_euclid_u64(n as u64);
    for (i, v) in x.iter_mut().enumerate() {
        let mut c = q;
        if (i as u64) < r {
            c += I256::ONE;
        }
        if sigma_star.sign(i) == 1 {
            *v -= c;
        } else {
            *v += c;
        }
    }

    let mut inst = Instance::new(
        x.into_iter().map(FixedReal::from_numerator).collect(),
        spec.frac_bits,
        None,
    )?;
    inst.set_planting(Planting {
        sigma_star,
        base_c: spec.base_c,
        bound: spec.bound,
        target: FixedReal::from_numerator(target),
    });
    debug_assert!(inst.verify_planting()?);
    Ok(inst)
}

/// `replicas + 1` independent planted instances, one RNG substream each.
pub fn sample_planted_ensemble(spec: &EnsembleSpec) -> Result<Vec<Instance>, CoreError> {
    if spec.replicas == 0 {
        return Err(CoreError::BadParameter("replicas must be >= 1".into()));
    }
    (0..=spec.replicas)
        .map(|j| {
            let mut s = spec.base.clone();
            s.seed = derive(spec.base.seed, j as u64);
            sample_planted(&s)
        })
        .collect()
}

/// A pair (X, Y) of standard normal instances with coordinate correlation
/// rho: `Y = rho X + sqrt(1 - rho^2) W`.
pub fn correlated_pair(
    n: usize,
    rho: f64,
    seed: u64,
) -> Result<(Instance, Instance), CoreError> {
    correlated_pair_with(n, DEFAULT_FRAC_BITS, rho, seed)
}

pub fn correlated_pair_with(
    n: usize,
    frac_bits: u32,
    rho: f64,
    seed: u64,
) -> Result<(Instance, Instance), CoreError> {
    if n == 0 {
        return Err(CoreError::EmptyInstance);
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(CoreError::BadParameter(format!(
            "correlation must lie in [0, 1), got {rho}"
        )));
    }
    let mut rng = substream(seed, 0);
    let comp = (1.0 - rho * rho).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng::standard_normal(&mut rng);
        let w = rng::standard_normal(&mut rng);
        xs.push(FixedReal::quantize(x, frac_bits)?);
        ys.push(FixedReal::quantize(rho * x + comp * w, frac_bits)?);
    }
    Ok((
        Instance::new(xs, frac_bits, None)?,
        Instance::new(ys, frac_bits, None)?,
    ))
}

/// `Y(tau) = cos(tau) X_0 + sin(tau) X_i`, coordinate-wise in f64 then
/// quantized. The endpoints are special-cased so that `Y(0) = X_0` and
/// `Y(pi/2) = X_i` bit-exactly.
pub fn interpolated_instance(
    x0: &Instance,
    xi: &Instance,
    tau: f64,
) -> Result<Instance, CoreError> {
    if x0.n() != xi.n() {
        return Err(CoreError::DimensionMismatch(x0.n(), xi.n()));
    }
    if x0.frac_bits() != xi.frac_bits() {
        return Err(CoreError::BadParameter(
            "interpolation endpoints must share frac_bits".into(),
        ));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&tau) {
        return Err(CoreError::BadParameter(format!(
            "tau must lie in [0, pi/2], got {tau}"
        )));
    }
    if tau == 0.0 {
        return Ok(Instance::new(x0.values().to_vec(), x0.frac_bits(), None)?);
    }
    if tau == std::f64::consts::FRAC_PI_2 {
        return Ok(Instance::new(xi.values().to_vec(), xi.frac_bits(), None)?);
    }
    let (c, s) = (tau.cos(), tau.sin());
    let f = x0.frac_bits();
    let x = x0
        .values()
        .iter()
        .zip(xi.values())
        .map(|(a, b)| FixedReal::quantize(c * a.to_f64(f) + s * b.to_f64(f), f))
        .collect::<Result<Vec<_>, _>>()?;
    Instance::new(x, f, None)
}

/// The grid tau_k = pi k / (2Q), k = 0..=Q.
pub fn tau_grid(q: usize) -> Vec<f64> {
    assert!(q >= 1);
    (0..=q)
        .map(|k| {
            if k == q {
                std::f64::consts::FRAC_PI_2
            } else {
                std::f64::consts::FRAC_PI_2 * k as f64 / q as f64
            }
        })
        .collect()
}
