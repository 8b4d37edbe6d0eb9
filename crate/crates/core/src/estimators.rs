//! Statistics comparing event logs and density series with Born densities.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::Bins;
use crate::kinetics::DensitySeries;
use crate::pointprocess::EventLog;
use crate::quadrature::{self, Tolerance};

/// Bins below this expected count are merged with a neighbour before the χ²
/// test.
pub const MIN_EXPECTED_PER_BIN: f64 = 5.0;

/// Counts or weights per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution {
    bins: Bins,
    weights: Vec<f64>,
}

impl BinnedDistribution {
    pub fn new(bins: Bins, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != bins.len() {
            return Err(Error::domain(format!("{} weights for {} bins", weights.len(), bins.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::domain(format!("bin weights must be finite and non-negative, found {w}")));
        }
        Ok(Self { bins, weights })
    }

    pub fn bins(&self) -> &Bins {
        &self.bins
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Probability mass per bin; errors on an empty distribution.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::domain("cannot normalize an empty distribution"));
        }
        Ok(Self {
            bins: self.bins.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
        })
    }

    /// Weight divided by bin width.
    pub fn densities(&self) -> Vec<f64> {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w / self.bins.width(i))
            .collect()
    }
}

fn histogram<'a>(events: impl Iterator<Item = &'a crate::pointprocess::BirthDeathEvent>, bins: &Bins) -> Result<BinnedDistribution> {
    let mut counts = vec![0.0; bins.len()];
    for e in events {
        let i = bins
            .locate(e.position)
            .ok_or_else(|| Error::Accounting(format!("birth {} at {} lies outside the bins", e.id, e.position)))?;
        counts[i] += 1.0;
    }
    BinnedDistribution::new(bins.clone(), counts)
}

/// Birth positions counted per bin.
pub fn birth_histogram(log: &EventLog, bins: &Bins) -> Result<BinnedDistribution> {
    histogram(log.births(), bins)
}

/// Histogram of the first `n` births in time order.
pub fn birth_histogram_first(log: &EventLog, bins: &Bins, n: usize) -> Result<BinnedDistribution> {
    let available = log.birth_count();
    if n > available {
        return Err(Error::domain(format!("requested {n} births, log holds {available}")));
    }
    histogram(log.births().take(n), bins)
}

/// Integral of a non-negative profile over each bin, by adaptive quadrature.
pub fn bin_integrals<F: Fn(f64) -> f64>(profile: F, bins: &Bins) -> Result<Vec<f64>> {
    (0..bins.len())
        .map(|i| {
            let (a, b) = bins.bounds(i);
            let est = quadrature::integrate(&profile, a, b, &[], 1, Tolerance::relative(1e-11).with_abs(1e-300))?;
            Ok(est.value.max(0.0))
        })
        .collect()
}

/// Probability mass of a non-negative profile per bin.
pub fn reference_distribution<F: Fn(f64) -> f64>(profile: F, bins: &Bins) -> Result<BinnedDistribution> {
    BinnedDistribution::new(bins.clone(), bin_integrals(profile, bins)?)?.normalized()
}

/// `Σ|aᵢ − bᵢ|` of the normalized forms, in `[0, 2]`.
pub fn l1_distance(a: &BinnedDistribution, b: &BinnedDistribution) -> Result<f64> {
    if a.bins != b.bins {
        return Err(Error::domain("l1 distance needs distributions on the same bins"));
    }
    let (a, b) = (a.normalized()?, b.normalized()?);
    Ok(a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).sum())
}

/// `(max − min)/(max + min)`.
pub fn visibility(profile: &[f64]) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::domain("visibility of an empty profile"));
    }
    if let Some(v) = profile.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!("profile values must be finite and non-negative, found {v}")));
    }
    let max = profile.iter().copied().fold(f64::MIN, f64::max);
    let min = profile.iter().copied().fold(f64::MAX, f64::min);
    if max == 0.0 {
        return Err(Error::domain("visibility of an all-zero profile"));
    }
    Ok((max - min) / (max + min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// `expected ± nsigma·√expected`, floored at zero.
pub fn poisson_band(expected: f64, nsigma: f64) -> Interval {
    let half = nsigma * expected.sqrt();
    Interval {
        lo: (expected - half).max(0.0),
        hi: expected + half,
    }
}

/// Sup-norm deviation of a density series from its Born reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornDeviation {
    /// `max |p − ref| / max ref` over sampled `(t, r)` with `t ≥ transient`.
    pub sup: f64,
    /// Time average over the same samples of `max_r |p − ref| / max ref`.
    pub mean: f64,
    /// Largest pointwise `|p/ref − 1|` where `ref > 0`.
    pub max_ratio_error: f64,
}

/// Compares a series against `reference(r, t)` at every sample with
/// `t ≥ transient`.
pub fn born_deviation<F>(series: &DensitySeries, reference: F, transient: f64) -> Result<BornDeviation>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let grid = series.grid().points();
    let rows: Vec<usize> = (0..series.times().len())
        .filter(|&i| series.times()[i] >= transient)
        .collect();
    if rows.is_empty() {
        return Err(Error::domain(format!("no samples at or after the transient {transient}")));
    }
    let mut refs = Vec::with_capacity(rows.len() * grid.len());
    for &i in &rows {
        let t = series.times()[i];
        for &r in grid {
            let v = reference(r, t)?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("reference at (t = {t}, r = {r}) is {v}")));
            }
            refs.push(v);
        }
    }
    let scale = refs.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::domain("the Born reference vanishes on every sample"));
    }
    let (mut sup, mut sum, mut ratio): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (k, &i) in rows.iter().enumerate() {
        let row = series.row(i);
        let reference = &refs[k * grid.len()..(k + 1) * grid.len()];
        let mut row_max: f64 = 0.0;
        for (p, q) in row.iter().zip(reference) {
            row_max = row_max.max((p - q).abs());
            if *q > 0.0 {
                ratio = ratio.max((p / q - 1.0).abs());
            }
        }
        sup = sup.max(row_max);
        sum += row_max;
    }
    Ok(BornDeviation {
        sup: sup / scale,
        mean: sum / rows.len() as f64 / scale,
        max_ratio_error: ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after merging sparse bins.
    pub cells: usize,
}

/// Pearson χ² of observed counts against a reference distribution scaled to
/// the observed total. Adjacent bins are merged left to right until every
/// cell expects at least five counts.
pub fn chi_square_test(observed: &BinnedDistribution, reference: &BinnedDistribution) -> Result<ChiSquareTest> {
    if observed.bins != reference.bins {
        return Err(Error::domain("chi-square test needs distributions on the same bins"));
    }
    let n = observed.total();
    if n <= 0.0 {
        return Err(Error::domain("chi-square test of an empty histogram"));
    }
    let pmf = reference.normalized()?;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (o, p) in observed.weights.iter().zip(&pmf.weights) {
        obs += o;
        exp += p * n;
        if exp >= MIN_EXPECTED_PER_BIN {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if obs > 0.0 || exp > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain("too few counts for a chi-square test"));
    }
    let mut statistic = 0.0;
    for &(o, e) in &cells {
        if e == 0.0 {
            if o > 0.0 {
                return Err(Error::Accounting("counts observed where the reference has no mass".into()));
            }
            continue;
        }
        statistic += (o - e) * (o - e) / e;
    }
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        cells: cells.len(),
    })
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("KS statistic of an empty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value `√(−½ ln(α/2)) / √n`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

fn periodogram_power(x: &[f64], y: &[f64], mean: f64, f: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f;
    let (mut c, mut s) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let d = yi - mean;
        c += d * (w * xi).cos();
        s += d * (w * xi).sin();
    }
    c * c + s * s
}

/// Period of the strongest spatial oscillation in `values` sampled at
/// uniformly spaced `positions`, from a periodogram scan refined by
/// golden-section search.
pub fn dominant_period(positions: &[f64], values: &[f64]) -> Result<f64> {
    if positions.len() != values.len() || positions.len() < 4 {
        return Err(Error::domain("dominant period needs at least four matching samples"));
    }
    let n = positions.len();
    let spacing = (positions[n - 1] - positions[0]) / (n - 1) as f64;
    let extent = spacing * n as f64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let (f_lo, f_hi, step) = (1.5 / extent, 0.5 / spacing, 0.125 / extent);
    if f_lo >= f_hi {
        return Err(Error::domain("too few samples to resolve a period"));
    }
    let power = |f: f64| periodogram_power(positions, values, mean, f);
    let mut best = (f_lo, power(f_lo));
    let mut f = f_lo;
    while f <= f_hi {
        let p = power(f);
        if p > best.1 {
            best = (f, p);
        }
        f += step;
    }
    if best.1 == 0.0 {
        return Err(Error::domain("profile has no oscillating component"));
    }
    let (mut a, mut b) = ((best.0 - step).max(f_lo), (best.0 + step).min(f_hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut pc, mut pd) = (power(c), power(d));
    for _ in 0..80 {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - phi * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + phi * (b - a);
            pd = power(d);
        }
    }
    Ok(2.0 / (a + b))
}

/// `y ≈ mean + amplitude·cos(Ωt − phase)` by linear least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub mean: f64,
    pub amplitude: f64,
    pub phase: f64,
}

pub fn harmonic_fit(times: &[f64], values: &[f64], omega: f64) -> Result<HarmonicFit> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::domain("harmonic fit needs at least three matching samples"));
    }
    // normal equations for the basis (1, cos Ωt, sin Ωt)
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (&t, &y) in times.iter().zip(values) {
        let basis = [1.0, (omega * t).cos(), (omega * t).sin()];
        for i in 0..3 {
            v[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-12 * m[0][0].powi(3) {
        return Err(Error::domain("harmonic fit is singular; samples do not resolve the frequency"));
    }
    let mut coef = [0.0; 3];
    for (k, c) in coef.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = v[i];
        }
        *c = det(&mk) / d;
    }
    Ok(HarmonicFit {
        mean: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        phase: coef[2].atan2(coef[1]),
    })
}
