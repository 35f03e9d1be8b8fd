//! Closed-form predictors and exact combinatorial identities.
//!
//! These are the analytic comparison targets for the Monte Carlo
//! experiments: entropy-scale binomial estimates, Gaussian small-box
//! probability brackets, the overlap Gram determinant and eigenvalue
//! formulas, first-moment level-set counts, and the parameter
//! prescriptions for the multi-overlap-gap and stability-hardness
//! regimes.

use num_bigint::BigUint;

use crate::partition::Partition;
use crate::CoreError;

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)`; endpoints 0 by
/// continuity.
pub fn binary_entropy(p: f64) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::BadParameter(format!(
            "entropy argument must lie in [0,1], got {p}"
        )));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Inverse of binary entropy on [0, 1/2]: the p <= 1/2 with h(p) = y.
pub fn binary_entropy_inv(y: f64) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(CoreError::BadParameter(format!(
            "entropy value must lie in [0,1], got {y}"
        )));
    }
    Ok(bisect(
        |p| binary_entropy(p).expect("p stays in [0,1]") - y,
        0.0,
        0.5,
    ))
}

/// Root of an increasing function by bisection to ~1e-14.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial coefficient.
pub fn binom_exact(n: u64, k: u64) -> Result<BigUint, CoreError> {
    if k > n {
        return Err(CoreError::BadParameter(format!(
            "binomial needs k <= n, got C({n},{k})"
        )));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

/// Sum of C(n, i) for i = 0..=k, exact.
pub fn binom_partial_sum(n: u64, k: u64) -> Result<BigUint, CoreError> {
    if k > n {
        return Err(CoreError::BadParameter(format!(
            "partial sum needs k <= n, got {k} > {n}"
        )));
    }
    let mut acc = BigUint::from(0u32);
    let mut c = BigUint::from(1u32);
    acc += &c;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        acc += &c;
    }
    Ok(acc)
}

/// log2 of a positive big integer, accurate to ~1e-12.
pub fn log2_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        let mut x = 0u64;
        for (i, d) in v.iter_u64_digits().enumerate() {
            x |= d << (64 * i);
        }
        (x as f64).log2()
    } else {
        let shift = bits - 53;
        let top: BigUint = v >> shift;
        let mut x = 0u64;
        for (i, d) in top.iter_u64_digits().enumerate() {
            x |= d << (64 * i);
        }
        (x as f64).log2() + shift as f64
    }
}

/// Entropy-scale sandwich for C(n,k), 1 <= k <= n-1, as log2 values:
/// `(lower, exact, upper)` with
/// lower = log2(sqrt(n/(8k(n-k)))) + n h(k/n) and
/// upper = log2(sqrt(n/(pi k(n-k)))) + n h(k/n).
pub fn binom_entropy_sandwich(n: u64, k: u64) -> Result<(f64, f64, f64), CoreError> {
    if k == 0 || k >= n {
        return Err(CoreError::BadParameter(format!(
            "sandwich needs 1 <= k <= n-1, got C({n},{k})"
        )));
    }
    let exact = log2_biguint(&binom_exact(n, k)?);
    let (nf, kf) = (n as f64, k as f64);
    let ent = nf * binary_entropy(kf / nf)?;
    let lower = 0.5 * (nf / (8.0 * kf * (nf - kf))).log2() + ent;
    let upper = 0.5 * (nf / (std::f64::consts::PI * kf * (nf - kf))).log2() + ent;
    Ok((lower, exact, upper))
}

/// Exact check of the convolution identity
/// `sum_k C(k0, k) C(n-k0, k) = C(n, k0)` for `k0 <= n/2`.
pub fn vandermonde_convolution_holds(n: u64, k0: u64) -> Result<bool, CoreError> {
    if 2 * k0 > n {
        return Err(CoreError::BadParameter(format!(
            "needs k0 <= n/2, got k0 = {k0}, n = {n}"
        )));
    }
    let mut sum = BigUint::from(0u32);
    for k in 0..=k0 {
        sum += binom_exact(k0, k)? * binom_exact(n - k0, k)?;
    }
    Ok(sum == binom_exact(n, k0)?)
}

/// Two-sided bracket for P[|Z| <= z] on 0 < z < 1, plus the leading-order
/// point estimate sqrt(2/pi) z. The cubic constant is 1/(3 sqrt(2 pi)),
/// the third Taylor coefficient of the Gaussian error integral, and the
/// bracket is validated against quadrature rather than trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBox1 {
    pub lower: f64,
    pub upper: f64,
    pub approx: f64,
}

pub fn gauss_box_1(z: f64) -> Result<GaussBox1, CoreError> {
    if !(0.0 < z && z < 1.0) {
        return Err(CoreError::BadParameter(format!(
            "box half-width must lie in (0,1), got {z}"
        )));
    }
    let s = (2.0 / std::f64::consts::PI).sqrt();
    let c = 1.0 / (3.0 * (2.0 * std::f64::consts::PI).sqrt());
    Ok(GaussBox1 {
        lower: s * z - c * z * z * z,
        upper: s * z,
        approx: s * z,
    })
}

/// Two-sided bracket for P[|Z| <= z1, |Z_rho| <= z2]:
/// `(2 z1 z2 / pi sqrt(1-rho^2)) (1 - (z1^2+z2^2)/sqrt(1-rho^2)) <= P <=
///  2 z1 z2 / (pi sqrt(1-rho^2))`,
/// valid while `(z1^2+z2^2)/sqrt(1-rho^2) < 1`.
pub fn gauss_box_2(z1: f64, z2: f64, rho: f64) -> Result<(f64, f64), CoreError> {
    if z1 <= 0.0 || z2 <= 0.0 {
        return Err(CoreError::BadParameter(
            "box half-widths must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(CoreError::BadParameter(format!(
            "correlation must lie in [0,1), got {rho}"
        )));
    }
    let comp = (1.0 - rho * rho).sqrt();
    let slack = (z1 * z1 + z2 * z2) / comp;
    if slack >= 1.0 {
        return Err(CoreError::BadParameter(format!(
            "bracket needs (z1^2+z2^2)/sqrt(1-rho^2) < 1, got {slack}"
        )));
    }
    let main = 2.0 * z1 * z2 / (std::f64::consts::PI * comp);
    Ok((main * (1.0 - slack), main))
}

/// Smallest eigenvalue of the 3x3 overlap covariance with unit diagonal
/// and off-diagonals (r^2, r, r), r = 1 - 2 rho:
/// `lambda(rho) = (r^2 + 2 - |r| sqrt(r^2 + 8)) / 2`.
pub fn overlap_gram_min_eigenvalue(rho: f64) -> Result<f64, CoreError> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(CoreError::BadParameter(format!(
            "distance fraction must lie in (0,1), got {rho}"
        )));
    }
    let r = (1.0 - 2.0 * rho).abs();
    Ok((r * r + 2.0 - r * (r * r + 8.0).sqrt()) / 2.0)
}

/// The matrix whose spectrum `overlap_gram_min_eigenvalue` describes.
pub fn overlap_gram_matrix(rho: f64) -> [[f64; 3]; 3] {
    let r = 1.0 - 2.0 * rho;
    [[1.0, r * r, r], [r * r, 1.0, r], [r, r, 1.0]]
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, by the trigonometric
/// closed form.
pub fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2)
        + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (detb / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Exact determinant of the overlap Gram matrix of three partitions,
/// returned as `det(n Sigma)`, an integer; `det(Sigma)` is that over n^3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramDet {
    pub n: usize,
    /// `det(n Sigma) = n^3 det(Sigma)`, exact.
    pub scaled: i128,
}

impl GramDet {
    pub fn value(self) -> f64 {
        self.scaled as f64 / (self.n as f64).powi(3)
    }
}

pub fn gram_det3(
    s1: &Partition,
    s2: &Partition,
    s3: &Partition,
) -> Result<GramDet, CoreError> {
    let n = s1.n();
    let pairs = [(s1, s2), (s1, s3), (s2, s3)];
    for (a, b) in pairs {
        let d = a.hamming_distance(b)?;
        if d == 0 || d == n {
            return Err(CoreError::BadParameter(
                "partitions must be pairwise distinct and non-antipodal".into(),
            ));
        }
    }
    let a = s1.overlap(s2)?.numerator as i128;
    let b = s1.overlap(s3)?.numerator as i128;
    let c = s2.overlap(s3)?.numerator as i128;
    let n128 = n as i128;
    let scaled = n128 * n128 * n128 + 2 * a * b * c - n128 * (a * a + b * b + c * c);
    Ok(GramDet { n, scaled })
}

/// Regime of a first-moment count as the scale function grows or shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Vanishing,
    Diverging,
}

/// Leading-order expected number of partitions at Hamming distance
/// `rho n` from sigma* with `H <= scale * sqrt(n) * 2^(-n h(rho))`:
/// `C(n, rho n) * 2 scale sqrt(n) 2^(-n h(rho)) / sqrt(2 pi (1 - r^2))`,
/// with `r = 1 - 2 rho`; the (1 + o(1)) factor is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPrediction {
    pub n: u64,
    pub rho: f64,
    pub scale: f64,
    pub expected_count: f64,
    pub log2_expected: f64,
    pub regime: Regime,
}

pub fn expected_count_at_distance(
    n: u64,
    rho: f64,
    scale: f64,
) -> Result<MomentPrediction, CoreError> {
    if !(0.0 < rho && rho <= 0.5) {
        return Err(CoreError::BadParameter(format!(
            "needs 0 < rho <= 1/2, got {rho}"
        )));
    }
    let k = rho * n as f64;
    if (k - k.round()).abs() > 1e-9 {
        return Err(CoreError::BadParameter(format!(
            "rho n must be an integer, got {k}"
        )));
    }
    if !(scale > 0.0) {
        return Err(CoreError::BadParameter("scale must be positive".into()));
    }
    let nf = n as f64;
    let r = 1.0 - 2.0 * rho;
    let log2_binom = log2_biguint(&binom_exact(n, k.round() as u64)?);
    let log2_expected = log2_binom + 1.0 + scale.log2() + 0.5 * nf.log2()
        - nf * binary_entropy(rho)?
        - 0.5 * (2.0 * std::f64::consts::PI * (1.0 - r * r)).log2();
    Ok(MomentPrediction {
        n,
        rho,
        scale,
        expected_count: 2f64.powf(log2_expected),
        log2_expected,
        regime: if log2_expected < 0.0 {
            Regime::Vanishing
        } else {
            Regime::Diverging
        },
    })
}

/// Parameters of the forbidden-overlap prescription for near-optimal
/// m-tuples below `2^(-eps n)` on instances correlated through a grid
/// with resolution delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OgpParams {
    pub eps: f64,
    pub delta: f64,
    pub m: u64,
    pub c: f64,
    pub beta: f64,
    pub eta: f64,
}

/// `m = ceil(8 (1 + log2 3) / (eps - delta))`, `c = (eps - delta) / 2`,
/// beta solving `h((1 - beta)/2 + (1 - beta)/(4m)) = (eps - delta)/4`, and
/// `eta = (1 - beta) / (2m)`.
pub fn ogp_parameters(eps: f64, delta: f64) -> Result<OgpParams, CoreError> {
    if !(0.0 <= delta && delta < eps && eps <= 1.0) {
        return Err(CoreError::BadParameter(format!(
            "needs 0 <= delta < eps <= 1, got eps = {eps}, delta = {delta}"
        )));
    }
    let gap = eps - delta;
    let m = (8.0 * (1.0 + 3f64.log2()) / gap).ceil() as u64;
    let c = gap / 2.0;
    let target = gap / 4.0;
    // h((1-beta)(1/2 + 1/(4m))) decreases in beta once the argument drops
    // below 1/2, i.e. for beta >= 1/(2m+1); the root is unique there.
    let mf = m as f64;
    let lo = 1.0 / (2.0 * mf + 1.0);
    let phi = |beta: f64| {
        binary_entropy((1.0 - beta) * (0.5 + 0.25 / mf)).expect("argument stays in [0,1]")
    };
    debug_assert!(phi(lo) >= target);
    let beta = bisect(|b| target - phi(b), lo, 1.0 - 1e-15);
    let eta = (1.0 - beta) / (2.0 * mf);
    let params = OgpParams {
        eps,
        delta,
        m,
        c,
        beta,
        eta,
    };
    debug_assert!(params.eta < (1.0 - params.beta) / mf);
    Ok(params)
}

/// eta* solving `h(eta*/2) = eps/2`: the orthogonality margin below which
/// near-optima of independent replicas must disagree.
pub fn chaos_eta_star(eps: f64) -> Result<f64, CoreError> {
    if !(0.0 < eps && eps <= 1.0) {
        return Err(CoreError::BadParameter(format!(
            "needs 0 < eps <= 1, got {eps}"
        )));
    }
    Ok(2.0 * binary_entropy_inv(eps / 2.0)?)
}

/// Derived constants of the stability-hardness regime. `T` is a double
/// exponential and overflows anything, so it is reported through
/// `log2 log2 T = log2(4 m Q log2 Q)`-free form below; the failure,
/// stability and localization probabilities are exposed as the finite
/// excess of `log2(1/p)` over `log2 T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardnessParams {
    pub eps: f64,
    pub l: f64,
    pub eta: f64,
    pub m: u64,
    pub c2: f64,
    /// C1 = eta^2 / 1600 (the stability offset is C1 * n).
    pub c1: f64,
    /// Q = 40 C2 pi sqrt(L) / eta.
    pub q: f64,
    /// rho = cos(pi / (2Q)).
    pub rho: f64,
    /// log2 log2 T = 4 m Q log2 Q.
    pub log2_log2_t: f64,
}

impl HardnessParams {
    /// `log2(1/p_f) - log2 T` at instance size n, for
    /// `p_f = 3^-n / (108 Q T sqrt(pi))`.
    pub fn log2_inv_pf_excess(&self, n: u64) -> f64 {
        n as f64 * 3f64.log2() + (108.0 * std::f64::consts::PI.sqrt() * self.q).log2()
    }

    /// `log2(1/p_st) - log2 T`, for `p_st = pi / (648 Q^2 T)`.
    pub fn log2_inv_pst_excess(&self) -> f64 {
        (648.0 * self.q * self.q / std::f64::consts::PI).log2()
    }

    /// `log2(1/p_l) - log2 T`, for `p_l = 1 / (54 T)`.
    pub fn log2_inv_pl_excess(&self) -> f64 {
        54f64.log2()
    }
}

pub fn hardness_parameters(
    eps: f64,
    l: f64,
    eta: f64,
    m: u64,
    c2: f64,
) -> Result<HardnessParams, CoreError> {
    if l <= 0.0 || eta <= 0.0 || m == 0 || c2 <= 0.0 {
        return Err(CoreError::BadParameter(
            "hardness parameters must be positive".into(),
        ));
    }
    let q = 40.0 * c2 * std::f64::consts::PI * l.sqrt() / eta;
    Ok(HardnessParams {
        eps,
        l,
        eta,
        m,
        c2,
        c1: eta * eta / 1600.0,
        q,
        rho: (std::f64::consts::FRAC_PI_2 / q).cos(),
        log2_log2_t: 4.0 * m as f64 * q * q.log2(),
    })
}
