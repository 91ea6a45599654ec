//! Distributions used by the potentials, plus k-means.
//!
//! Every distribution supports log-density evaluation, maximum-likelihood
//! fitting with parameter clamps, and seeded sampling. Out-of-support points
//! have log-density `-inf`; nothing here returns NaN for valid parameters.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution as _, Exp, LogNormal, StandardNormal, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;

pub const WEIBULL_SHAPE_RANGE: (f64, f64) = (0.1, 50.0);
pub const VON_MISES_MAX_KAPPA: f64 = 100.0;
pub const LOG_NORMAL_MIN_SIGMA: f64 = 0.05;
pub const BERNOULLI_RANGE: (f64, f64) = (0.01, 0.99);

/// Below this many samples [`fit_mle`] returns a weak prior instead.
pub const MIN_FIT_SAMPLES: usize = 3;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Weibull,
    VonMises,
    LogNormal,
    Exponential,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Weibull { shape: f64, scale: f64 },
    VonMises { mean: f64, kappa: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Bernoulli { p: f64 },
}

impl Distribution {
    pub fn kind(&self) -> DistributionKind {
        match self {
            Distribution::Weibull { .. } => DistributionKind::Weibull,
            Distribution::VonMises { .. } => DistributionKind::VonMises,
            Distribution::LogNormal { .. } => DistributionKind::LogNormal,
            Distribution::Exponential { .. } => DistributionKind::Exponential,
            Distribution::Bernoulli { .. } => DistributionKind::Bernoulli,
        }
    }

    /// Projects parameters onto their valid domains.
    pub fn clamped(self) -> Distribution {
        match self {
            Distribution::Weibull { shape, scale } => Distribution::Weibull {
                shape: shape.clamp(WEIBULL_SHAPE_RANGE.0, WEIBULL_SHAPE_RANGE.1),
                scale: scale.max(f64::MIN_POSITIVE),
            },
            Distribution::VonMises { mean, kappa } => Distribution::VonMises {
                mean: wrap_angle(mean),
                kappa: kappa.clamp(0.0, VON_MISES_MAX_KAPPA),
            },
            Distribution::LogNormal { mu, sigma } => Distribution::LogNormal {
                mu,
                sigma: sigma.max(LOG_NORMAL_MIN_SIGMA),
            },
            Distribution::Exponential { rate } => Distribution::Exponential {
                rate: rate.max(f64::MIN_POSITIVE),
            },
            Distribution::Bernoulli { p } => Distribution::Bernoulli {
                p: p.clamp(BERNOULLI_RANGE.0, BERNOULLI_RANGE.1),
            },
        }
    }

    /// Prior used for cells that received no samples at all.
    pub fn default_prior(kind: DistributionKind) -> Distribution {
        match kind {
            DistributionKind::Weibull => Distribution::Weibull { shape: 1.0, scale: 1.0 },
            DistributionKind::VonMises => Distribution::VonMises { mean: 0.0, kappa: 0.0 },
            DistributionKind::LogNormal => Distribution::LogNormal {
                mu: 10f64.ln(),
                sigma: 1.0,
            },
            DistributionKind::Exponential => Distribution::Exponential { rate: 1.0 },
            DistributionKind::Bernoulli => Distribution::Bernoulli { p: 0.5 },
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        log_pdf(self, x)
    }

    /// `ln P(X >= x)` for the positive-valued kinds; `None` for von Mises
    /// and Bernoulli.
    pub fn log_survival(&self, x: f64) -> Option<f64> {
        match *self {
            Distribution::LogNormal { mu, sigma } => Some(if x <= 0.0 {
                0.0
            } else {
                ln_half_erfc((x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
            }),
            Distribution::Weibull { shape, scale } => Some(-(x.max(0.0) / scale).powf(shape)),
            Distribution::Exponential { rate } => Some(-rate * x.max(0.0)),
            Distribution::VonMises { .. } | Distribution::Bernoulli { .. } => None,
        }
    }

    /// Mode of a log-normal, `exp(mu - sigma^2)`; `None` for other kinds.
    pub fn log_normal_mode(&self) -> Option<f64> {
        match *self {
            Distribution::LogNormal { mu, sigma } => Some((mu - sigma * sigma).exp()),
            _ => None,
        }
    }
}

/// `ln(erfc(z) / 2)`, with the asymptotic series where `erfc` underflows.
fn ln_half_erfc(z: f64) -> f64 {
    if z < 20.0 {
        return (0.5 * libm::erfc(z)).ln();
    }
    let z2 = z * z;
    -z2 - (z * PI.sqrt()).ln() + (1.0 - 0.5 / z2 + 0.75 / (z2 * z2)).ln() - std::f64::consts::LN_2
}

/// `ln I0(x)` for `x >= 0` by direct power series (exact to rounding for the
/// clamped concentration range).
pub fn ln_bessel_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x > 700.0 {
        // asymptotic expansion; unreachable for clamped kappa
        return x - 0.5 * (2.0 * PI * x).ln() + (1.0 + 1.0 / (8.0 * x)).ln();
    }
    let q = 0.25 * x * x;
    let (mut term, mut sum, mut m) = (1.0f64, 1.0f64, 1.0f64);
    loop {
        term *= q / (m * m);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        m += 1.0;
    }
    sum.ln()
}

fn ln_bessel_i1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum, mut m) = (1.0f64, 1.0f64, 1.0f64);
    loop {
        term *= q / (m * (m + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        m += 1.0;
    }
    (0.5 * x).ln() + sum.ln()
}

/// Mean resultant length of a von Mises with concentration `kappa`.
pub fn von_mises_mean_resultant(kappa: f64) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        (ln_bessel_i1(kappa) - ln_bessel_i0(kappa)).exp()
    }
}

pub fn log_pdf(d: &Distribution, x: f64) -> f64 {
    if x.is_nan() {
        return f64::NEG_INFINITY;
    }
    match *d {
        Distribution::Weibull { shape, scale } => {
            if x <= 0.0 || x.is_infinite() {
                return f64::NEG_INFINITY;
            }
            let z = x / scale;
            let v = shape.ln() - scale.ln() + (shape - 1.0) * z.ln() - z.powf(shape);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        Distribution::VonMises { mean, kappa } => {
            if x.is_infinite() {
                return f64::NEG_INFINITY;
            }
            kappa * (x - mean).cos() - LN_2PI - ln_bessel_i0(kappa)
        }
        Distribution::LogNormal { mu, sigma } => {
            if x <= 0.0 || x.is_infinite() {
                return f64::NEG_INFINITY;
            }
            let l = x.ln();
            -l - sigma.ln() - 0.5 * LN_2PI - (l - mu).powi(2) / (2.0 * sigma * sigma)
        }
        Distribution::Exponential { rate } => {
            if x < 0.0 || x.is_infinite() {
                return f64::NEG_INFINITY;
            }
            rate.ln() - rate * x
        }
        Distribution::Bernoulli { p } => {
            if x == 1.0 {
                p.ln()
            } else if x == 0.0 {
                (1.0 - p).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

fn in_support(kind: DistributionKind, x: f64) -> bool {
    match kind {
        DistributionKind::Weibull | DistributionKind::LogNormal => x > 0.0 && x.is_finite(),
        DistributionKind::Exponential => x >= 0.0 && x.is_finite(),
        DistributionKind::VonMises => x.is_finite(),
        DistributionKind::Bernoulli => x == 0.0 || x == 1.0,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn circular_mean(xs: &[f64]) -> (f64, f64) {
    let (s, c) = xs
        .iter()
        .fold((0.0, 0.0), |(s, c), &a| (s + a.sin(), c + a.cos()));
    let n = xs.len() as f64;
    let r = (s / n).hypot(c / n);
    (s.atan2(c), r)
}

/// Maximum-likelihood fit with parameter clamps; fewer than
/// [`MIN_FIT_SAMPLES`] samples fall back to weak priors centred on the data.
pub fn fit_mle(kind: DistributionKind, samples: &[f64]) -> Result<Distribution> {
    if samples.is_empty() {
        return Err(Error::precondition(format!("cannot fit {kind:?} to no samples")));
    }
    if let Some(bad) = samples.iter().find(|&&x| !in_support(kind, x)) {
        return Err(Error::precondition(format!("sample {bad} outside the {kind:?} support")));
    }
    let few = samples.len() < MIN_FIT_SAMPLES;
    let d = match kind {
        DistributionKind::Weibull if few => Distribution::Weibull {
            shape: 1.0,
            scale: mean(samples),
        },
        DistributionKind::Weibull => fit_weibull(samples),
        DistributionKind::VonMises => {
            let (mu, r) = circular_mean(samples);
            let kappa = if few {
                1.0
            } else if r >= 1.0 - 1e-12 {
                VON_MISES_MAX_KAPPA
            } else {
                r * (2.0 - r * r) / (1.0 - r * r)
            };
            Distribution::VonMises { mean: mu, kappa }
        }
        DistributionKind::LogNormal => {
            let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
            let mu = mean(&logs);
            let sigma = if few {
                0.5
            } else {
                (logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / logs.len() as f64).sqrt()
            };
            Distribution::LogNormal { mu, sigma }
        }
        DistributionKind::Exponential => {
            let m = mean(samples);
            Distribution::Exponential {
                rate: if m > 0.0 { 1.0 / m } else { f64::MAX },
            }
        }
        DistributionKind::Bernoulli => Distribution::Bernoulli { p: mean(samples) },
    };
    Ok(d.clamped())
}

/// Newton–Raphson on the profile score of the shape parameter, starting at
/// shape 1, with the scale recovered in closed form.
fn fit_weibull(samples: &[f64]) -> Distribution {
    const MAX_ITER: usize = 50;
    const TOL: f64 = 1e-8;
    let (lo, hi) = WEIBULL_SHAPE_RANGE;

    // Work with x / max(x) so that powers stay in (0, 1].
    let xmax = samples.iter().cloned().fold(f64::MIN, f64::max);
    let logs: Vec<f64> = samples.iter().map(|x| (x / xmax).ln()).collect();
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;

    let profile = |k: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &logs {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let g = 1.0 / k + mean_log - s1 / s0;
        let dg = -1.0 / (k * k) - (s2 * s0 - s1 * s1) / (s0 * s0);
        (g, dg)
    };

    let mut k = 1.0f64;
    for _ in 0..MAX_ITER {
        let (g, dg) = profile(k);
        if !g.is_finite() || !dg.is_finite() || dg == 0.0 {
            break;
        }
        let mut next = k - g / dg;
        if !next.is_finite() || next <= 0.0 {
            next = 0.5 * k;
        }
        let next = next.clamp(lo, hi);
        let step = (next - k).abs();
        k = next;
        if step < TOL * k.max(1.0) {
            break;
        }
        if (k == hi && g > 0.0) || (k == lo && g < 0.0) {
            break;
        }
    }
    let mean_pow = logs.iter().map(|l| (k * l).exp()).sum::<f64>() / n;
    let scale = xmax * mean_pow.powf(1.0 / k);
    Distribution::Weibull { shape: k, scale }
}

/// Best–Fisher rejection sampler for the von Mises distribution.
fn sample_von_mises<R: Rng + ?Sized>(mean: f64, kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return wrap_angle(rng.random_range(-PI..PI));
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.random();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let theta = if u3 > 0.5 { f.acos() } else { -f.acos() };
            return wrap_angle(mean + theta);
        }
    }
}

/// One draw; deterministic given the rng state.
pub fn sample<R: Rng + ?Sized>(d: &Distribution, rng: &mut R) -> f64 {
    match *d {
        Distribution::Weibull { shape, scale } => Weibull::new(scale, shape)
            .expect("valid weibull parameters")
            .sample(rng),
        Distribution::VonMises { mean, kappa } => sample_von_mises(mean, kappa, rng),
        Distribution::LogNormal { mu, sigma } => LogNormal::new(mu, sigma)
            .expect("valid log-normal parameters")
            .sample(rng),
        Distribution::Exponential { rate } => Exp::new(rate).expect("valid rate").sample(rng),
        Distribution::Bernoulli { p } => {
            if rng.random::<f64>() < p {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Standard normal draw, shared by the synthetic generator.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Independent deterministic generator for stream `index` of a run seeded by `seed`.
pub fn substream(seed: u64, index: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub feature_dim: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after each Lloyd iteration (diagnostic).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding; stops after 200 iterations or
/// when inertia changes by less than 1e-6 relative.
pub fn kmeans_fit<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Result<KMeansModel> {
    const MAX_ITER: usize = 200;
    const REL_TOL: f64 = 1e-6;
    if k == 0 || k > points.len() {
        return Err(Error::precondition(format!(
            "k-means with k = {k} on {} points",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::precondition("k-means points of mixed dimension"));
    }

    // k-means++ seeding
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && u < w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[idx].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }

    let mut assign = vec![0usize; points.len()];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_ITER {
        for (a, p) in assign.iter_mut().zip(points) {
            *a = nearest(&centroids, p).0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assign.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
        // inertia of the updated centroids under the current assignment
        let updated: f64 = assign
            .iter()
            .zip(points)
            .map(|(&a, p)| sq_dist(&centroids[a], p))
            .sum();
        trace.push(updated);
        let converged = prev.is_finite() && (prev - updated).abs() <= REL_TOL * prev.max(f64::MIN_POSITIVE);
        prev = updated;
        if converged || updated == 0.0 {
            break;
        }
    }
    Ok(KMeansModel {
        k,
        feature_dim: dim,
        centroids,
        inertia_trace: trace,
    })
}

/// Nearest centroid, ties to the lowest index.
pub fn kmeans_assign(model: &KMeansModel, point: &[f64]) -> Result<usize> {
    if point.len() != model.feature_dim {
        return Err(Error::precondition(format!(
            "point of dimension {} for a {}-dimensional codebook",
            point.len(),
            model.feature_dim
        )));
    }
    Ok(nearest(&model.centroids, point).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn log_survival_matches_closed_forms() {
        let ln = Distribution::LogNormal { mu: 20f64.ln(), sigma: 0.5 };
        assert!((ln.log_survival(20.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(ln.log_survival(0.0), Some(0.0));
        // continuity across the asymptotic switch at z = 20
        let z = |x: f64| (x.ln() - 20f64.ln()) / (0.5 * std::f64::consts::SQRT_2);
        let x_switch = (20f64.ln() + 20.0 * 0.5 * std::f64::consts::SQRT_2).exp();
        let below = ln.log_survival(x_switch * (1.0 - 1e-9)).unwrap();
        let above = ln.log_survival(x_switch * (1.0 + 1e-9)).unwrap();
        assert!((below - above).abs() < 1e-6 * below.abs(), "{below} {above} {}", z(x_switch));
        assert!(ln.log_survival(1e30).unwrap().is_finite());
        let w = Distribution::Weibull { shape: 2.0, scale: 3.0 };
        assert!((w.log_survival(3.0).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(Distribution::Exponential { rate: 2.0 }.log_survival(1.5), Some(-3.0));
        assert_eq!(Distribution::Bernoulli { p: 0.5 }.log_survival(1.0), None);
    }

    #[test]
    fn log_pdf_examples() {
        let w = Distribution::Weibull { shape: 1.0, scale: 2.0 };
        assert!((log_pdf(&w, 1.0) - (0.5f64 * (-0.5f64).exp()).ln()).abs() < 1e-12);
        assert!((log_pdf(&w, 1.0) + 1.193_147_180_559_945).abs() < 1e-12);
        let vm = Distribution::VonMises { mean: 1.3, kappa: 0.0 };
        for x in [-3.0, 0.0, 2.5] {
            assert!((log_pdf(&vm, x) + (2.0 * PI).ln()).abs() < 1e-12);
        }
        let ln = Distribution::LogNormal {
            mu: 20f64.ln(),
            sigma: 0.5,
        };
        let expect = (1.0 / (20.0 * 0.5 * (2.0 * PI).sqrt())).ln();
        assert!((log_pdf(&ln, 20.0) - expect).abs() < 1e-12);
        assert!((log_pdf(&ln, 20.0) + (20.0 * 0.5 * (2.0 * std::f64::consts::PI).sqrt()).ln()).abs() < 1e-12);
    }

    #[test]
    fn out_of_support_is_negative_infinity() {
        let cases = [
            (Distribution::Weibull { shape: 2.0, scale: 1.0 }, 0.0),
            (Distribution::Weibull { shape: 2.0, scale: 1.0 }, -1.0),
            (Distribution::LogNormal { mu: 0.0, sigma: 1.0 }, -0.5),
            (Distribution::Exponential { rate: 1.0 }, -0.5),
            (Distribution::Bernoulli { p: 0.3 }, 0.5),
        ];
        for (d, x) in cases {
            assert_eq!(log_pdf(&d, x), f64::NEG_INFINITY);
        }
        assert_eq!(log_pdf(&Distribution::Exponential { rate: 1.0 }, f64::NAN), f64::NEG_INFINITY);
    }

    #[test]
    fn bessel_matches_reference_values() {
        // I0(1) = 1.2660658777520082, I0(10) = 2815.716628466254
        assert!((ln_bessel_i0(1.0) - 1.266_065_877_752_008_2f64.ln()).abs() < 1e-14);
        assert!((ln_bessel_i0(10.0) - 2815.716_628_466_254f64.ln()).abs() < 1e-12);
        // A1(1) = I1(1)/I0(1) = 0.5651591039924851 / 1.2660658777520082
        assert!((von_mises_mean_resultant(1.0) - 0.446_389_965_896_64).abs() < 1e-12);
    }

    fn trapezoid(d: &Distribution, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| {
                let x = a + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * log_pdf(d, x).exp()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn densities_integrate_to_one() {
        let cases = [
            (Distribution::Weibull { shape: 1.5, scale: 0.3 }, 1e-9, 5.0),
            (Distribution::Weibull { shape: 4.0, scale: 1.2 }, 1e-9, 6.0),
            (Distribution::VonMises { mean: 0.7, kappa: 8.0 }, -PI, PI),
            (Distribution::VonMises { mean: -2.0, kappa: 100.0 }, -PI, PI),
            (Distribution::LogNormal { mu: 20f64.ln(), sigma: 0.5 }, 1e-9, 300.0),
            (Distribution::Exponential { rate: 2.0 }, 0.0, 30.0),
        ];
        for (d, a, b) in cases {
            let total = trapezoid(&d, a, b, 400_000);
            assert!((total - 1.0).abs() < 1e-3, "{d:?} integrates to {total}");
        }
        let b = Distribution::Bernoulli { p: 0.37 };
        assert!((log_pdf(&b, 0.0).exp() + log_pdf(&b, 1.0).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_fits() {
        let e = fit_mle(DistributionKind::Exponential, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e, Distribution::Exponential { rate: 0.5 });
        let ln = fit_mle(DistributionKind::LogNormal, &[1.0, 2f64.exp(), 1.0, 2f64.exp()]).unwrap();
        match ln {
            Distribution::LogNormal { mu, sigma } => {
                assert!((mu - 1.0).abs() < 1e-12 && (sigma - 1.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        assert!(fit_mle(DistributionKind::Weibull, &[]).is_err());
        assert!(fit_mle(DistributionKind::Weibull, &[1.0, -1.0, 2.0]).is_err());
    }

    #[test]
    fn log_normal_fit_of_two_points_is_the_fallback() {
        // n < 3: sigma fixed at 0.5, mu at the mean log
        let ln = fit_mle(DistributionKind::LogNormal, &[1.0, 2f64.exp()]).unwrap();
        assert_eq!(ln, Distribution::LogNormal { mu: 1.0, sigma: 0.5 });
    }

    #[test]
    fn small_sample_fallbacks() {
        assert_eq!(
            fit_mle(DistributionKind::Weibull, &[1.0, 3.0]).unwrap(),
            Distribution::Weibull { shape: 1.0, scale: 2.0 }
        );
        match fit_mle(DistributionKind::VonMises, &[0.2]).unwrap() {
            Distribution::VonMises { mean, kappa } => {
                assert!((mean - 0.2).abs() < 1e-12);
                assert_eq!(kappa, 1.0);
            }
            _ => unreachable!(),
        }
        assert_eq!(
            fit_mle(DistributionKind::Exponential, &[0.5]).unwrap(),
            Distribution::Exponential { rate: 2.0 }
        );
    }

    #[test]
    fn degenerate_fits_are_clamped() {
        let w = fit_mle(DistributionKind::Weibull, &[1e-4; 10]).unwrap();
        match w {
            Distribution::Weibull { shape, scale } => {
                assert_eq!(shape, WEIBULL_SHAPE_RANGE.1);
                assert!((scale - 1e-4).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        assert!(log_pdf(&w, 1e-4).is_finite());
        let ln = fit_mle(DistributionKind::LogNormal, &[20.0; 5]).unwrap();
        assert_eq!(ln, Distribution::LogNormal { mu: 20f64.ln(), sigma: LOG_NORMAL_MIN_SIGMA });
        assert_eq!(
            fit_mle(DistributionKind::Bernoulli, &[1.0; 7]).unwrap(),
            Distribution::Bernoulli { p: 0.99 }
        );
        match fit_mle(DistributionKind::VonMises, &[0.4; 6]).unwrap() {
            Distribution::VonMises { kappa, .. } => assert_eq!(kappa, VON_MISES_MAX_KAPPA),
            _ => unreachable!(),
        }
    }

    #[test]
    fn weibull_fit_recovers_parameters() {
        let truth = Distribution::Weibull { shape: 1.5, scale: 0.3 };
        let mut r = rng(11);
        let xs: Vec<f64> = (0..5_000).map(|_| sample(&truth, &mut r)).collect();
        match fit_mle(DistributionKind::Weibull, &xs).unwrap() {
            Distribution::Weibull { shape, scale } => {
                assert!((shape / 1.5 - 1.0).abs() < 0.05, "shape {shape}");
                assert!((scale / 0.3 - 1.0).abs() < 0.05, "scale {scale}");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sampling_laws_of_large_numbers() {
        let mut r = rng(5);
        let b = fit_mle(DistributionKind::Bernoulli, &[1.0; 4]).unwrap();
        let hits: f64 = (0..10_000).map(|_| sample(&b, &mut r)).sum();
        assert!((0.985..=0.995).contains(&(hits / 10_000.0)), "{hits}");

        let e = Distribution::Exponential { rate: 2.0 };
        let m: f64 = (0..10_000).map(|_| sample(&e, &mut r)).sum::<f64>() / 10_000.0;
        assert!((0.48..=0.52).contains(&m), "{m}");

        let vm = Distribution::VonMises { mean: 0.0, kappa: 50.0 };
        let xs: Vec<f64> = (0..10_000).map(|_| sample(&vm, &mut r)).collect();
        let (mu, _) = circular_mean(&xs);
        assert!(mu.abs() < 0.05, "{mu}");
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let d = Distribution::VonMises { mean: 1.0, kappa: 3.0 };
        let a: Vec<f64> = (0..20).map({
            let mut r = rng(3);
            move |_| sample(&d, &mut r)
        }).collect();
        let b: Vec<f64> = (0..20).map({
            let mut r = rng(3);
            move |_| sample(&d, &mut r)
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn kmeans_examples() {
        let pts: Vec<Vec<f64>> = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0].iter().map(|&x| vec![x]).collect();
        let m = kmeans_fit(&pts, 2, &mut rng(1)).unwrap();
        let mut cs: Vec<f64> = m.centroids.iter().map(|c| c[0]).collect();
        cs.sort_by(f64::total_cmp);
        assert_eq!(cs, vec![0.0, 10.0]);
        for p in &pts {
            let c = kmeans_assign(&m, p).unwrap();
            assert_eq!(m.centroids[c][0], p[0]);
        }

        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let m = kmeans_fit(&pts, 1, &mut rng(2)).unwrap();
        assert!((m.centroids[0][0] - 3.0).abs() < 1e-12);
        assert!((m.centroids[0][1] - 13.0).abs() < 1e-12);

        let m = kmeans_fit(&pts, 7, &mut rng(3)).unwrap();
        assert_eq!(*m.inertia_trace.last().unwrap(), 0.0);

        assert!(kmeans_fit(&pts, 8, &mut rng(3)).is_err());
    }

    #[test]
    fn kmeans_assign_ties_and_dimension() {
        let m = KMeansModel {
            k: 5,
            feature_dim: 1,
            centroids: vec![vec![9.0], vec![0.0], vec![7.0], vec![5.0], vec![2.0]],
            inertia_trace: vec![],
        };
        assert_eq!(kmeans_assign(&m, &[5.0]).unwrap(), 3);
        assert_eq!(kmeans_assign(&m, &[1.0]).unwrap(), 1);
        assert!(kmeans_assign(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn kmeans_inertia_non_increasing() {
        let mut r = rng(9);
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|i| {
                let c = (i % 4) as f64 * 3.0;
                vec![c + standard_normal(&mut r), c - standard_normal(&mut r)]
            })
            .collect();
        let m = kmeans_fit(&pts, 6, &mut rng(4)).unwrap();
        for w in m.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }
}
