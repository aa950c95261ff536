//! Forward map from normal parameters to total photon-number statistics.
//!
//! With `λ′ = 1/(λ + 1)` the generating function of anti-normally ordered
//! moments is
//!
//! ```text
//! G(z) = Πᵢ [λ′ᵢ/(λ′ᵢ + z/2)]^{kᵢ/2} · exp(−z dᵢ² λ′ᵢ / (2(λ′ᵢ + z/2)))
//! ```
//!
//! and the probability generating function `Σ pₙ wⁿ = (1+z)^S G(z)` at
//! `z = (1−w)/w` factorizes into terms analytic at `w = 0`:
//!
//! ```text
//! hᵢ(w) = [2λ′ᵢ/(1 − cᵢw)]^{kᵢ/2} · exp(−dᵢ² λ′ᵢ (1−w)/(1 − cᵢw)),   cᵢ = 1 − 2λ′ᵢ.
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompositions::{validate_normal_parameters, NormalParameters};
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::series::{TruncatedSeries, MAX_ORDER};

pub const DEFAULT_TAIL_EPS: f64 = 1e-12;
/// Entries above `−NEGATIVE_DUST` are treated as rounding noise around zero.
pub const NEGATIVE_DUST: f64 = 1e-14;

/// `λ′ = 1/(λ + 1)`.
pub fn lambda_prime(lambda: f64) -> f64 {
    1.0 / (lambda + 1.0)
}

fn require_valid(params: &NormalParameters) -> Result<()> {
    let report = validate_normal_parameters(params);
    if !report.valid {
        return Err(Error::InvalidParameters(report.failures.join("; ")));
    }
    Ok(())
}

/// Closed-form `G(z)`, defined for `z > −2 min λ′ᵢ`.
pub fn g_closed(params: &NormalParameters, z: f64) -> Result<f64> {
    let pole = params
        .triples()
        .iter()
        .map(|t| -2.0 * lambda_prime(t.lambda))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(z > pole) {
        return Err(Error::Domain(format!("G(z) needs z > {pole} (nearest pole at −2 min λ′), got {z}")));
    }
    let log_g: f64 = params
        .triples()
        .iter()
        .map(|t| {
            let lp = lambda_prime(t.lambda);
            let denom = lp + 0.5 * z;
            0.5 * t.k as f64 * (lp / denom).ln() - z * t.d * t.d * lp / (2.0 * denom)
        })
        .sum();
    Ok(log_g.exp())
}

/// Coefficients `p₀ … p_nmax` of the probability generating function.
pub fn pgf_series(params: &NormalParameters, nmax: usize) -> Result<TruncatedSeries> {
    require_valid(params)?;
    let mut result = TruncatedSeries::one(nmax);
    for t in params.triples() {
        let lp = lambda_prime(t.lambda);
        let c = 1.0 - 2.0 * lp;
        let base = TruncatedSeries::geometric(c, nmax).scale(2.0 * lp);
        let mut factor = base.pow_half_integer(t.k as u32)?;
        if t.d != 0.0 {
            let exponent = TruncatedSeries::linear(1.0, -1.0, nmax)
                .div_one_minus(c)
                .scale(-t.d * t.d * lp);
            factor = factor.mul(&exponent.exp()?)?;
        }
        result = result.mul(&factor)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionConfig {
    /// Fixed cutoff; when absent the smallest cutoff meeting `tail_eps` is used.
    pub nmax: Option<usize>,
    pub tail_eps: f64,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        Self { nmax: None, tail_eps: DEFAULT_TAIL_EPS }
    }
}

/// Photon-number probabilities `p₀ … p_nmax` and a bound on the missing mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionJson", into = "DistributionJson")]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    probs: Vec<f64>,
    #[serde(default)]
    tail_bound: f64,
}

impl TryFrom<DistributionJson> for PhotonDistribution {
    type Error = Error;

    fn try_from(j: DistributionJson) -> Result<Self> {
        Self::new(j.probs, j.tail_bound)
    }
}

impl From<PhotonDistribution> for DistributionJson {
    fn from(p: PhotonDistribution) -> Self {
        Self { probs: p.clamped(), tail_bound: p.tail_bound.max(0.0) }
    }
}

impl PhotonDistribution {
    /// Checks entries, tail and normalization (to `1e−8`).
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no probabilities given".into()));
        }
        if let Some((n, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < -NEGATIVE_DUST) {
            return Err(Error::InvalidDistribution(format!("p[{n}] = {p} is not a probability")));
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidDistribution(format!("tail bound {tail_bound} must be non-negative")));
        }
        let total = compensated_sum(probs.iter().copied()) + tail_bound;
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDistribution(format!("probabilities plus tail sum to {total}, not 1")));
        }
        Ok(Self { probs, tail_bound })
    }

    pub(crate) fn from_parts(probs: Vec<f64>, tail_bound: f64) -> Self {
        Self { probs, tail_bound }
    }

    /// All mass on `n = 0`.
    pub fn vacuum() -> Self {
        Self { probs: vec![1.0], tail_bound: 0.0 }
    }

    /// Raw probabilities, possibly carrying negative rounding dust.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probabilities with negative dust replaced by zero.
    pub fn clamped(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.max(0.0)).collect()
    }

    pub fn nmax(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `pₙ`, zero beyond the cutoff.
    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Keeps `p₀ … p_nmax`, moving the rest into the tail.
    pub fn truncated(&self, nmax: usize) -> Self {
        if nmax >= self.nmax() {
            return self.clone();
        }
        let probs = self.probs[..=nmax].to_vec();
        let dropped = compensated_sum(self.probs[nmax + 1..].iter().copied());
        Self { probs, tail_bound: self.tail_bound + dropped.max(0.0) }
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(n, p)| n as f64 * p))
    }

    /// Largest entrywise difference over the common range, zero-padding the
    /// shorter distribution.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.probs.len().max(other.probs.len());
        (0..n).map(|i| (self.get(i) - other.get(i)).abs()).fold(0.0, f64::max)
    }

    /// Plot-ready `n,p_n` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_n\n");
        for (n, p) in self.clamped().iter().enumerate() {
            out.push_str(&format!("{n},{p:e}\n"));
        }
        out
    }
}

/// Photon-number distribution of any state with the given normal parameters.
pub fn photon_distribution(params: &NormalParameters, config: &DistributionConfig) -> Result<PhotonDistribution> {
    if let Some(nmax) = config.nmax {
        if nmax > MAX_ORDER {
            return Err(Error::Domain(format!("nmax {nmax} exceeds the series order cap {MAX_ORDER}")));
        }
        let probs = pgf_series(params, nmax)?.into_coeffs();
        let tail = (1.0 - compensated_sum(probs.iter().copied())).max(0.0);
        return Ok(PhotonDistribution::from_parts(probs, tail));
    }

    let mut order = 64.min(MAX_ORDER);
    loop {
        let probs = pgf_series(params, order)?.into_coeffs();
        let mut acc = 0.0;
        let mut comp = 0.0;
        let mut partial = Vec::with_capacity(probs.len());
        for &p in &probs {
            // Neumaier running sum so the tail estimate is not swamped by rounding
            let t = acc + p;
            if acc.abs() >= p.abs() {
                comp += (acc - t) + p;
            } else {
                comp += (p - t) + acc;
            }
            acc = t;
            partial.push(acc + comp);
        }
        if let Some(n) = partial.iter().position(|&s| 1.0 - s <= config.tail_eps) {
            let tail = (1.0 - partial[n]).max(0.0);
            return Ok(PhotonDistribution::from_parts(probs[..=n].to_vec(), tail));
        }
        if order == MAX_ORDER {
            let achieved = 1.0 - partial[order];
            return Err(Error::Truncation {
                message: format!("tail {achieved:e} still above {:e} at the order cap {MAX_ORDER}", config.tail_eps),
                achieved,
            });
        }
        order = (2 * order).min(MAX_ORDER);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Antinormal,
    Ordinary,
}

/// Moments `m₀ … m_jmax` of the photon number in one ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub ordering: Ordering,
    pub values: Vec<f64>,
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MomentVector {
    pub fn jmax(&self) -> usize {
        self.values.len() - 1
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Taylor coefficients of `G(z)` about `z = 0` up to `zʲᵐᵃˣ`.
pub fn g_series_from_params(params: &NormalParameters, jmax: usize) -> Result<TruncatedSeries> {
    let mut g = TruncatedSeries::one(jmax);
    for t in params.triples() {
        let lp = lambda_prime(t.lambda);
        // λ′/(λ′ + z/2) = 1/(1 + z/(2λ′))
        let geom = TruncatedSeries::geometric(-1.0 / (2.0 * lp), jmax);
        let mut factor = geom.pow_half_integer(t.k as u32)?;
        if t.d != 0.0 {
            let exponent = geom.shift_up().scale(-0.5 * t.d * t.d);
            factor = factor.mul(&exponent.exp()?)?;
        }
        g = g.mul(&factor)?;
    }
    Ok(g)
}

/// `mⱼ = (−1)ʲ j! [zʲ] G(z)`.
pub fn antinormal_moments_from_params(params: &NormalParameters, jmax: usize) -> Result<MomentVector> {
    require_valid(params)?;
    let g = g_series_from_params(params, jmax)?;
    let values = (0..=jmax)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(j) * g.coeff(j)
        })
        .collect();
    Ok(MomentVector { ordering: Ordering::Antinormal, values, modes: params.modes(), warnings: Vec::new() })
}

/// Rising factorial `x (x+1) ⋯ (x+j−1)`.
fn rising(x: f64, j: usize) -> f64 {
    (0..j).map(|i| x + i as f64).product()
}

/// `mⱼ = Σₙ pₙ (n+S)(n+S+1)⋯(n+S+j−1)`.
///
/// A warning is recorded for every order whose worst-case tail contribution
/// exceeds `1e−8` relative.
pub fn antinormal_moments_from_distribution(p: &PhotonDistribution, modes: usize, jmax: usize) -> MomentVector {
    let s = modes as f64;
    let mut values = Vec::with_capacity(jmax + 1);
    let mut warnings = Vec::new();
    for j in 0..=jmax {
        let m = compensated_sum(p.probs().iter().enumerate().map(|(n, pn)| pn * rising(n as f64 + s, j)));
        let tail = p.tail_bound() * rising(p.nmax() as f64 + 1.0 + s, j);
        if tail > 1e-8 * m.abs().max(1.0) {
            warnings.push(format!("moment {j}: tail may contribute up to {tail:e}"));
        }
        values.push(m);
    }
    MomentVector { ordering: Ordering::Antinormal, values, modes, warnings }
}

/// `mⱼ = Σₙ nʲ pₙ`, tagged with the mode count needed for conversions.
pub fn ordinary_moments(p: &PhotonDistribution, modes: usize, jmax: usize) -> MomentVector {
    let values = (0..=jmax)
        .map(|j| compensated_sum(p.probs().iter().enumerate().map(|(n, pn)| pn * (n as f64).powi(j as i32))))
        .collect();
    MomentVector { ordering: Ordering::Ordinary, values, modes, warnings: Vec::new() }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for k in 1..=i {
            c[i][k] = c[i - 1][k - 1] + if k < i { c[i - 1][k] } else { 0.0 };
        }
    }
    c
}

/// Unsigned Stirling numbers of the first kind: `x^{(j)} = Σₖ c(j,k) xᵏ`.
fn stirling_first(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    c[0][0] = 1.0;
    for j in 1..=n {
        for k in 1..=j {
            c[j][k] = c[j - 1][k - 1] + (j - 1) as f64 * c[j - 1][k];
        }
    }
    c
}

/// Stirling numbers of the second kind.
fn stirling_second(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for k in 1..=n {
        for j in 1..=k {
            s[k][j] = s[k - 1][j - 1] + j as f64 * s[k - 1][j];
        }
    }
    s
}

/// Converts between ordinary moments `⟨n̂ʲ⟩` and anti-normally ordered ones
/// `⟨(n̂+S)(n̂+S+1)⋯(n̂+S+j−1)⟩`; each order is a combination of lower orders.
pub fn moment_convert(m: &MomentVector, target: Ordering) -> MomentVector {
    if m.ordering == target {
        return m.clone();
    }
    let jmax = m.jmax();
    let s = m.modes as f64;
    let binom = binomials(jmax);
    let shift_powers = |shift: f64, moments: &[f64]| -> Vec<f64> {
        // E[(n + shift)ᵏ] from E[nˡ]
        (0..=jmax)
            .map(|k| compensated_sum((0..=k).map(|l| binom[k][l] * shift.powi((k - l) as i32) * moments[l])))
            .collect()
    };
    let values = match target {
        Ordering::Antinormal => {
            let shifted = shift_powers(s, &m.values);
            let c = stirling_first(jmax);
            (0..=jmax)
                .map(|j| compensated_sum((0..=j).map(|k| c[j][k] * shifted[k])))
                .collect()
        }
        Ordering::Ordinary => {
            let s2 = stirling_second(jmax);
            let powers: Vec<f64> = (0..=jmax)
                .map(|k| {
                    compensated_sum((0..=k).map(|j| {
                        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * s2[k][j] * m.values[j]
                    }))
                })
                .collect();
            shift_powers(-s, &powers)
        }
    };
    MomentVector { ordering: target, values, modes: m.modes, warnings: m.warnings.clone() }
}

/// I.i.d. photon counts by inverse-CDF sampling; draws landing in the tail
/// are reported as `nmax + 1`.
pub fn sample_counts(p: &PhotonDistribution, n_samples: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(p.probs().len());
    let mut acc = 0.0;
    for q in p.clamped() {
        acc += q;
        cdf.push(acc);
    }
    let total = acc + p.tail_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cdf.partition_point(|&c| c <= u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::NormalTriple;

    fn params(modes: usize, t: &[(f64, usize, f64)]) -> NormalParameters {
        NormalParameters::new(modes, t.iter().map(|&(l, k, d)| NormalTriple::new(l, k, d)).collect())
    }

    #[test]
    fn closed_form_values() {
        let vac = NormalParameters::vacuum(1);
        assert_eq!(g_closed(&vac, 0.0).unwrap(), 1.0);
        assert!((g_closed(&vac, 1.0).unwrap() - 0.5).abs() < 1e-15);
        for nu in [1.0, 2.5, 7.0] {
            let th = params(1, &[(nu, 2, 0.0)]);
            for z in [-0.1, 0.3, 2.0] {
                let expected = 1.0 / (1.0 + z * (nu + 1.0) / 2.0);
                assert!((g_closed(&th, z).unwrap() - expected).abs() < 1e-14);
            }
        }
        // pole at −2λ′ = −1/2 for ν = 3
        assert!(matches!(g_closed(&params(1, &[(3.0, 2, 0.0)]), -0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn elementary_distributions() {
        let cfg = DistributionConfig { nmax: Some(40), ..Default::default() };
        let p = photon_distribution(&NormalParameters::vacuum(3), &cfg).unwrap();
        assert_eq!(p.get(0), 1.0);
        assert!(p.probs()[1..].iter().all(|&x| x.abs() < 1e-16));

        let p = photon_distribution(&params(1, &[(3.0, 2, 0.0)]), &cfg).unwrap();
        for n in 0..=40 {
            assert!((p.get(n) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }

        let d = 1.7_f64;
        let mu = d * d / 2.0;
        let p = photon_distribution(&params(1, &[(1.0, 2, d)]), &cfg).unwrap();
        let mut poisson = (-mu).exp();
        for n in 0..=40 {
            assert!((p.get(n) - poisson).abs() < 1e-14);
            poisson *= mu / (n + 1) as f64;
        }
    }

    #[test]
    fn squeezed_vacuum() {
        let r = 0.8_f64;
        let e = (2.0 * r).exp();
        let f = params(1, &[(e, 1, 0.0), (1.0 / e, 1, 0.0)]);
        let p = photon_distribution(&f, &DistributionConfig { nmax: Some(30), ..Default::default() }).unwrap();
        let t2 = r.tanh().powi(2);
        let mut even = 1.0 / r.cosh();
        for n in 0..=15 {
            assert!((p.get(2 * n) - even).abs() < 1e-14);
            if 2 * n + 1 <= 30 {
                assert!(p.get(2 * n + 1).abs() < 1e-15);
            }
            // (2n+2)!/(2^{n+1}(n+1)!)² = (2n)!/(2ⁿn!)² · (2n+1)/(2n+2)
            even *= t2 * (2 * n + 1) as f64 / (2 * n + 2) as f64;
        }
    }

    #[test]
    fn automatic_cutoff_meets_tail_target() {
        let f = params(2, &[(9.0, 1, 1.0), (2.0, 1, 0.0), (0.5, 2, 0.3)]);
        let p = photon_distribution(&f, &DistributionConfig::default()).unwrap();
        assert!(p.tail_bound() <= DEFAULT_TAIL_EPS);
        let shorter = photon_distribution(&f, &DistributionConfig { nmax: Some(p.nmax() - 1), ..Default::default() }).unwrap();
        assert!(shorter.tail_bound() > DEFAULT_TAIL_EPS);
        assert!((compensated_sum(p.probs().iter().copied()) + p.tail_bound() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgf_matches_closed_form() {
        let f = params(2, &[(4.0, 1, 0.5), (3.0, 1, 1.2), (1.0, 2, 0.0)]);
        let series = pgf_series(&f, 400).unwrap();
        for w in [0.1_f64, 0.5] {
            let z = 1.0 / w - 1.0;
            let expected = (1.0 + z).powi(2) * g_closed(&f, z).unwrap();
            assert!((series.eval(w) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = params(2, &[(1.0, 1, 0.0), (0.5, 1, 0.0), (0.25, 1, 0.0), (0.125, 1, 0.0)]);
        assert!(matches!(pgf_series(&bad, 5), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn antinormal_moments() {
        let m = antinormal_moments_from_params(&NormalParameters::vacuum(1), 3).unwrap();
        assert!((m.values[0] - 1.0).abs() < 1e-15 && (m.values[1] - 1.0).abs() < 1e-15);
        let nu = 3.0;
        let th = params(1, &[(nu, 2, 0.0)]);
        let m = antinormal_moments_from_params(&th, 10).unwrap();
        for j in 0..=10 {
            let expected = factorial(j) * ((nu + 1.0) / 2.0).powi(j as i32);
            assert!((m.values[j] - expected).abs() <= 1e-12 * expected);
        }
        let p = photon_distribution(&th, &DistributionConfig { nmax: Some(400), ..Default::default() }).unwrap();
        let from_p = antinormal_moments_from_distribution(&p, 1, 10);
        for j in 0..=10 {
            assert!((from_p.values[j] - m.values[j]).abs() <= 1e-10 * m.values[j], "j={j}");
        }
        let vac = antinormal_moments_from_distribution(&PhotonDistribution::vacuum(), 1, 2);
        assert_eq!(vac.values, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn ordinary_moments_of_known_laws() {
        let vac = ordinary_moments(&PhotonDistribution::vacuum(), 1, 4);
        assert_eq!(vac.values, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let cfg = DistributionConfig { nmax: Some(300), ..Default::default() };
        let th = photon_distribution(&params(1, &[(3.0, 2, 0.0)]), &cfg).unwrap();
        assert!((ordinary_moments(&th, 1, 1).values[1] - 1.0).abs() < 1e-12);
        let d = 2.0_f64;
        let mu = d * d / 2.0;
        let coh = photon_distribution(&params(1, &[(1.0, 2, d)]), &cfg).unwrap();
        let m = ordinary_moments(&coh, 1, 2);
        assert!((m.values[1] - mu).abs() < 1e-12 && (m.values[2] - mu * mu - mu).abs() < 1e-12);
    }

    #[test]
    fn conversion_examples() {
        let ord = MomentVector { ordering: Ordering::Ordinary, values: vec![1.0, 0.7], modes: 1, warnings: vec![] };
        let anti = moment_convert(&ord, Ordering::Antinormal);
        assert_eq!(anti.values, vec![1.0, 1.7]);
        let m = MomentVector { ordering: Ordering::Antinormal, values: vec![1.0, 2.0, 7.0, 30.0, 160.0], modes: 3, warnings: vec![] };
        let back = moment_convert(&moment_convert(&m, Ordering::Ordinary), Ordering::Antinormal);
        for (a, b) in back.values.iter().zip(&m.values) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sampling() {
        assert!(sample_counts(&PhotonDistribution::vacuum(), 100, 3).iter().all(|&n| n == 0));
        let th = photon_distribution(&params(1, &[(3.0, 2, 0.0)]), &DistributionConfig { nmax: Some(4), ..Default::default() }).unwrap();
        let a = sample_counts(&th, 1000, 42);
        assert_eq!(a, sample_counts(&th, 1000, 42));
        assert!(a.iter().all(|&n| n <= 5));
        assert!(a.iter().any(|&n| n == 5));
    }

    #[test]
    fn json_round_trip_clamps_dust() {
        let p = PhotonDistribution::from_parts(vec![1.0, -1e-16], 0.0);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"probs":[1.0,0.0],"tail_bound":0.0}"#);
        let back: PhotonDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back.probs(), &[1.0, 0.0]);
        assert!(serde_json::from_str::<PhotonDistribution>(r#"{"probs":[0.5],"tail_bound":0.0}"#).is_err());
    }
}
