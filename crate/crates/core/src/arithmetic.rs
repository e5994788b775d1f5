//! Continued fractions, the Gauss map and certified Diophantine checks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::real::{dist_z, int, real, to_f64, Real, PRECISION_BITS};

/// Denominators beyond this are not needed to pin the value to full precision.
const Q_LIMIT: u128 = 1 << 124;

/// `{1/x}` at working precision.
pub fn gauss_map(x: Real) -> Result<Real> {
    if x <= Real::ZERO {
        return Err(Error::Domain("gauss map needs x > 0".to_string()));
    }
    let y = x.recip();
    Ok(y - y.floor())
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    /// `[0; prefix..., period, period, ...]`; an empty period means the
    /// expansion terminates after the prefix.
    Quotients { prefix: Vec<u64>, period: Vec<u64> },
    /// Only an enclosure of the value is known.
    Enclosure,
}

/// An angle in (0, 1) described by its continued fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationNumber {
    source: Source,
    lo: Real,
    hi: Real,
    exact: Option<(u128, u128)>,
}

/// First terms of a continued-fraction expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct CfExpansion {
    pub partial_quotients: Vec<u64>,
    /// `(p_n, q_n)` for `n = 1, 2, …`.
    pub convergents: Vec<(u128, u128)>,
    /// The expansion terminated: the number is rational.
    pub rational: bool,
    pub precision_bits: u32,
}

impl RotationNumber {
    /// `(√5 − 1)/2 = [0; 1, 1, 1, …]`.
    pub fn golden_mean() -> Self {
        Self::from_quotients(&[], &[1]).expect("valid period")
    }

    /// `√2 − 1 = [0; 2, 2, 2, …]`.
    pub fn silver_mean() -> Self {
        Self::from_quotients(&[], &[2]).expect("valid period")
    }

    /// `[0; prefix, period, period, …]`. An empty period describes the
    /// rational number `[0; prefix]`.
    pub fn from_quotients(prefix: &[u64], period: &[u64]) -> Result<Self> {
        if prefix.iter().chain(period).any(|&a| a == 0) {
            return Err(Error::Usage(
                "partial quotients must be positive".to_string(),
            ));
        }
        if prefix.is_empty() && period.is_empty() {
            return Err(Error::Usage("no partial quotients given".to_string()));
        }
        if period.is_empty() && prefix == [1] {
            return Err(Error::Domain("[0; 1] = 1 is not in (0, 1)".to_string()));
        }
        let source = Source::Quotients {
            prefix: prefix.to_vec(),
            period: period.to_vec(),
        };
        let mut out = RotationNumber {
            source,
            lo: Real::ZERO,
            hi: Real::ONE,
            exact: None,
        };
        out.pin_from_convergents()?;
        Ok(out)
    }

    /// `p/q` with `0 < p < q`, expanded by Euclid's algorithm.
    pub fn rational(p: u128, q: u128) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::Domain(format!("{p}/{q} is not in (0, 1)")));
        }
        let (mut num, mut den) = (q, p);
        let mut quotients = Vec::new();
        while den != 0 {
            quotients.push((num / den) as u64);
            let r = num % den;
            num = den;
            den = r;
        }
        // Canonical form never ends in a 1 unless the whole expansion is [1].
        if quotients.len() > 1 && *quotients.last().unwrap() == 1 {
            quotients.pop();
            *quotients.last_mut().unwrap() += 1;
        }
        let mut out = Self::from_quotients(&quotients, &[])?;
        out.exact = Some((p, q));
        Ok(out)
    }

    /// A value known to lie in `[lo, hi] ⊂ (0, 1)`.
    pub fn from_enclosure(lo: Real, hi: Real) -> Result<Self> {
        if !(Real::ZERO < lo && lo <= hi && hi < Real::ONE) {
            return Err(Error::Domain(
                "enclosure must lie inside (0, 1)".to_string(),
            ));
        }
        Ok(RotationNumber {
            source: Source::Enclosure,
            lo,
            hi,
            exact: None,
        })
    }

    /// Parses `p/q`, `[a1, a2, ...]`, `[a1; (b1, b2)]` (periodic tail in
    /// parentheses) or a decimal literal. A decimal with `D` fractional
    /// digits is read as the interval of half a unit in the last place.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p
                .trim()
                .parse::<u128>()
                .map_err(|e| Error::Usage(e.to_string()))?;
            let q = q
                .trim()
                .parse::<u128>()
                .map_err(|e| Error::Usage(e.to_string()))?;
            return Self::rational(p, q);
        }
        if let Some(body) = s.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let body = body.trim().trim_start_matches("0;").trim();
            let (head, tail) = match body.find('(') {
                Some(i) => {
                    let tail = body[i + 1..]
                        .strip_suffix(')')
                        .ok_or_else(|| Error::Usage("unclosed period".to_string()))?;
                    (&body[..i], tail)
                }
                None => (body, ""),
            };
            let nums = |part: &str| -> Result<Vec<u64>> {
                part.split([',', ';', ' '])
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .map_err(|e| Error::Usage(e.to_string()))
                    })
                    .collect()
            };
            return Self::from_quotients(&nums(head)?, &nums(tail)?);
        }
        match s {
            "golden" => return Ok(Self::golden_mean()),
            "silver" => return Ok(Self::silver_mean()),
            _ => {}
        }
        let x = Real::from_str(s).map_err(|_| Error::Usage(format!("cannot parse {s:?}")))?;
        let digits = s.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
        let half_unit = Real::TEN.powi(-digits).div2();
        let lo = (x - half_unit).next_down();
        let hi = (x + half_unit).next_up();
        Self::from_enclosure(lo, hi)
    }

    fn quotient(&self, i: usize) -> Option<u64> {
        match &self.source {
            Source::Quotients { prefix, period } => {
                if i < prefix.len() {
                    Some(prefix[i])
                } else if period.is_empty() {
                    None
                } else {
                    Some(period[(i - prefix.len()) % period.len()])
                }
            }
            Source::Enclosure => None,
        }
    }

    fn pin_from_convergents(&mut self) -> Result<()> {
        let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
        let mut i = 0;
        let mut previous = None;
        loop {
            let Some(a) = self.quotient(i) else {
                // Terminated: the value is p1/q1.
                let v = Real::from(p1) / Real::from(q1);
                self.lo = v.next_down();
                self.hi = v.next_up();
                return Ok(());
            };
            let a = a as u128;
            let (p2, q2) = match (a.checked_mul(p1), a.checked_mul(q1)) {
                (Some(ap), Some(aq)) => match (ap.checked_add(p0), aq.checked_add(q0)) {
                    (Some(p), Some(q)) => (p, q),
                    _ => break,
                },
                _ => break,
            };
            previous = Some((p1, q1));
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            i += 1;
            if q1 > Q_LIMIT && q0 > 1 {
                break;
            }
        }
        let (pa, qa) =
            previous.ok_or_else(|| Error::Precision("first quotient overflows".to_string()))?;
        let x = Real::from(pa) / Real::from(qa);
        let y = Real::from(p1) / Real::from(q1);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        self.lo = lo.next_down();
        self.hi = hi.next_up();
        Ok(())
    }

    /// Midpoint of the certified enclosure.
    pub fn value(&self) -> Real {
        self.lo.midpoint(self.hi)
    }

    /// Half-width of the certified enclosure.
    pub fn radius(&self) -> Real {
        (self.hi - self.lo).div2()
    }

    pub fn enclosure(&self) -> (Real, Real) {
        (self.lo, self.hi)
    }

    pub fn exact_rational(&self) -> Option<(u128, u128)> {
        self.exact
    }

    pub fn precision_bits(&self) -> u32 {
        PRECISION_BITS
    }

    /// The value rounded down to `bits` significant bits; successive
    /// evaluations at increasing `bits` agree on their shared bits.
    pub fn evaluate(&self, bits: u32) -> Real {
        let bits = bits.clamp(1, PRECISION_BITS);
        let v = self.value();
        let mut scale = 0u32;
        let mut x = v;
        while x < Real::ONE.div2() {
            x = x.mul2();
            scale += 1;
        }
        let kept = x.mul_pow2(bits).floor();
        kept.div_pow2(bits + scale)
    }

    /// `[0; a_1, …, a_n]` and the convergents `p_k/q_k`, `k ≤ n`.
    pub fn expand(&self, n: usize) -> Result<CfExpansion> {
        let mut quotients = Vec::with_capacity(n);
        let mut rational = false;
        match &self.source {
            Source::Quotients { .. } => {
                for i in 0..n {
                    match self.quotient(i) {
                        Some(a) => quotients.push(a),
                        None => {
                            rational = true;
                            break;
                        }
                    }
                }
            }
            Source::Enclosure => {
                let (mut lo, mut hi) = (self.lo, self.hi);
                for i in 0..n {
                    if hi.eq_zero() {
                        rational = true;
                        break;
                    }
                    if lo <= Real::ZERO {
                        return Err(Error::Precision(format!(
                            "enclosure reaches 0 at quotient {}: cannot tell whether the expansion stops",
                            i + 1
                        )));
                    }
                    let top = lo.recip().next_up();
                    let bottom = hi.recip().next_down();
                    let a = bottom.floor();
                    if top.floor() != a {
                        return Err(Error::Precision(format!(
                            "quotient {} lies between {} and {}",
                            i + 1,
                            a,
                            top.floor()
                        )));
                    }
                    let ai = u64::try_from(&a)
                        .map_err(|_| Error::Precision("quotient overflow".to_string()))?;
                    quotients.push(ai);
                    (lo, hi) = (
                        (bottom - a).next_down().max(Real::ZERO),
                        (top - a).next_up(),
                    );
                }
            }
        }
        let convergents = convergents(&quotients)?;
        Ok(CfExpansion {
            partial_quotients: quotients,
            convergents,
            rational,
            precision_bits: PRECISION_BITS,
        })
    }

    /// The image `G^n(α)` under the Gauss map, as a rotation number.
    pub fn gauss_shift(&self, n: usize) -> Result<Self> {
        match &self.source {
            Source::Quotients { prefix, period } => {
                if n < prefix.len() {
                    Self::from_quotients(&prefix[n..], period)
                } else if period.is_empty() {
                    Err(Error::Domain(
                        "expansion terminated before the requested shift".to_string(),
                    ))
                } else {
                    let r = (n - prefix.len()) % period.len();
                    let mut rotated = period[r..].to_vec();
                    rotated.extend_from_slice(&period[..r]);
                    Self::from_quotients(&[], &rotated)
                }
            }
            Source::Enclosure => {
                let (mut lo, mut hi) = (self.lo, self.hi);
                for _ in 0..n {
                    let top = lo.recip().next_up();
                    let bottom = hi.recip().next_down();
                    let a = bottom.floor();
                    if top.floor() != a {
                        return Err(Error::Precision(
                            "enclosure too wide for the Gauss shift".to_string(),
                        ));
                    }
                    (lo, hi) = ((bottom - a).next_down(), (top - a).next_up());
                }
                Self::from_enclosure(lo, hi)
            }
        }
    }

    /// `|||kα|||` with a bound on its error.
    pub fn dist_multiple(&self, k: i64) -> (Real, Real) {
        if let Some((p, q)) = self.exact {
            let r = (k.unsigned_abs() as u128 * p) % q;
            let d = r.min(q - r);
            return (Real::from(d) / Real::from(q), Real::EPSILON);
        }
        let kk = int(k);
        let d = dist_z(kk * self.value());
        let err = kk.abs() * self.radius() + Real::EPSILON.mul_pow2(2) * (Real::ONE + kk.abs());
        (d, err)
    }

    /// `|||a − kα|||` with a bound on its error.
    pub fn dist_shifted(&self, a: Real, k: i64) -> (Real, Real) {
        let kk = int(k);
        let d = dist_z(a - kk * self.value());
        let err =
            kk.abs() * self.radius() + Real::EPSILON.mul_pow2(2) * (Real::ONE + kk.abs() + a.abs());
        (d, err)
    }
}

fn convergents(quotients: &[u64]) -> Result<Vec<(u128, u128)>> {
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
    let mut out = Vec::with_capacity(quotients.len());
    for &a in quotients {
        let a = a as u128;
        let p = a.checked_mul(p1).and_then(|v| v.checked_add(p0));
        let q = a.checked_mul(q1).and_then(|v| v.checked_add(q0));
        let (Some(p), Some(q)) = (p, q) else {
            return Err(Error::Precision("convergent exceeds 128 bits".to_string()));
        };
        out.push((p, q));
        (p0, q0, p1, q1) = (p1, q1, p, q);
    }
    Ok(out)
}

/// Outcome of a finite-horizon Diophantine scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineReport {
    pub gamma: Real,
    pub tau: Real,
    pub horizon: u64,
    /// The `k` achieving the smallest margin (signed for shifted scans).
    pub worst_k: i64,
    /// `min_k |||·|||·|k|^τ·γ`; at least 1 exactly when the condition holds.
    pub worst_margin: Real,
    pub holds: bool,
}

/// Finite-horizon RDC evidence: `G^n(α) ∈ DC(γ, τ)` up to a horizon for
/// each `n` in a window. Says nothing about infinitely many returns.
#[derive(Debug, Clone, PartialEq)]
pub struct RdcReport {
    pub per_shift: Vec<(usize, DiophantineReport)>,
    pub returns: Vec<usize>,
    pub note: String,
}

fn pow_real(k: u64, tau: Real) -> Real {
    (Real::from(k).ln() * tau).exp()
}

/// Shared scan: `dist(k)` returns `|||·|||` and its error bound.
fn scan(
    gamma: Real,
    tau: Real,
    k_max: u64,
    ks: impl Iterator<Item = i64>,
    dist: impl Fn(i64) -> (Real, Real),
) -> Result<DiophantineReport> {
    if k_max < 1 {
        return Err(Error::Usage("horizon must be at least 1".to_string()));
    }
    if gamma <= Real::ZERO {
        return Err(Error::Usage("gamma must be positive".to_string()));
    }
    let (g64, t64) = (to_f64(gamma), to_f64(tau));
    let mut worst: Option<(i64, f64)> = None;
    let mut holds = true;
    for k in ks {
        let (d, err) = dist(k);
        let m64 = to_f64(d) * libm::pow(k.unsigned_abs() as f64, t64) * g64;
        let fresh = worst.map_or(true, |(_, w)| m64 < w);
        if fresh {
            worst = Some((k, m64));
        }
        if m64 >= 1.0 + 1e-9 && to_f64(err) < 1e-9 * to_f64(d) {
            continue;
        }
        if m64 < 1.0 - 1e-9
            && to_f64(d + err) * libm::pow(k.unsigned_abs() as f64, t64) * g64 < 1.0 - 1e-9
        {
            holds = false;
            continue;
        }
        // Too close to the threshold for doubles: decide at full precision.
        let weight = pow_real(k.unsigned_abs(), tau) * gamma;
        let low = (d - err) * weight;
        let high = (d + err) * weight;
        if low >= Real::ONE {
            continue;
        }
        if high < Real::ONE {
            holds = false;
            continue;
        }
        return Err(Error::Precision(format!(
            "cannot decide the Diophantine comparison at k = {k}"
        )));
    }
    let (worst_k, _) = worst.expect("non-empty scan");
    let (d, _) = dist(worst_k);
    let worst_margin = d * pow_real(worst_k.unsigned_abs(), tau) * gamma;
    Ok(DiophantineReport {
        gamma,
        tau,
        horizon: k_max,
        worst_k,
        worst_margin,
        holds,
    })
}

/// `|||kα||| ≥ γ⁻¹|k|^{−τ}` for `1 ≤ k ≤ K_max`, decided with certified
/// error bounds.
pub fn check_dc(
    alpha: &RotationNumber,
    gamma: Real,
    tau: Real,
    k_max: u64,
) -> Result<DiophantineReport> {
    scan(gamma, tau, k_max, 1..=k_max as i64, |k| {
        alpha.dist_multiple(k)
    })
}

/// `|||a − kα||| ≥ γ⁻¹|k|^{−τ}` for `0 < |k| ≤ K_max`.
pub fn check_dc_alpha(
    a: Real,
    alpha: &RotationNumber,
    gamma: Real,
    tau: Real,
    k_max: u64,
) -> Result<DiophantineReport> {
    let km = k_max as i64;
    let ks = (1..=km).flat_map(|k| [k, -k]);
    scan(gamma, tau, k_max, ks, |k| alpha.dist_shifted(a, k))
}

/// Checks `G^n(α) ∈ DC(γ, τ)` up to `k_max` for each `n` in `shifts`.
pub fn check_rdc(
    alpha: &RotationNumber,
    gamma: Real,
    tau: Real,
    k_max: u64,
    shifts: core::ops::RangeInclusive<usize>,
) -> Result<RdcReport> {
    let mut per_shift = Vec::new();
    let mut returns = Vec::new();
    for n in shifts {
        let shifted = alpha.gauss_shift(n)?;
        let report = check_dc(&shifted, gamma, tau, k_max)?;
        if report.holds {
            returns.push(n);
        }
        per_shift.push((n, report));
    }
    let note =
        "finite evidence only: each listed shift satisfies the condition up to the horizon; \
                recurrence for infinitely many shifts is not verifiable"
            .to_string();
    Ok(RdcReport {
        per_shift,
        returns,
        note,
    })
}

/// Smallest `γ` (rounded up slightly) for which `α ∈ DC(γ, τ)` up to `k_max`.
pub fn calibrate_gamma(alpha: &RotationNumber, tau: Real, k_max: u64) -> Result<Real> {
    let probe = check_dc(alpha, Real::ONE, tau, k_max)?;
    if probe.worst_margin <= Real::ZERO {
        return Err(Error::Domain(format!(
            "|||kα||| vanishes at k = {}",
            probe.worst_k
        )));
    }
    Ok(probe.worst_margin.recip() * real(1.0001))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Real, b: Real, tol: f64) -> bool {
        (a - b).abs() <= real(tol)
    }

    #[test]
    fn gauss_map_fixed_points_and_values() {
        let g = RotationNumber::golden_mean().value();
        assert!(close(gauss_map(g).unwrap(), g, 1e-68));
        let s = RotationNumber::silver_mean().value();
        assert!(close(gauss_map(s).unwrap(), s, 1e-68));
        let third = Real::ONE / int(3);
        let x = Real::from_str("0.3").unwrap();
        assert!(close(gauss_map(x).unwrap(), third, 1e-68));
        assert!(matches!(gauss_map(Real::ZERO), Err(Error::Domain(_))));
    }

    #[test]
    fn golden_expansion_is_fibonacci() {
        let e = RotationNumber::golden_mean().expand(5).unwrap();
        assert_eq!(e.partial_quotients, [1, 1, 1, 1, 1]);
        assert_eq!(e.convergents, [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]);
        assert!(!e.rational);
        let v = RotationNumber::golden_mean().value();
        let exact = (f256::consts::SQRT_5 - Real::ONE).div2();
        assert!(close(v, exact, 1e-70));
    }

    #[test]
    fn silver_and_rational_expansions() {
        let e = RotationNumber::silver_mean().expand(4).unwrap();
        assert_eq!(e.partial_quotients, [2, 2, 2, 2]);
        let r = RotationNumber::parse("7/10").unwrap().expand(10).unwrap();
        assert_eq!(r.partial_quotients, [1, 2, 3]);
        assert!(r.rational);
        assert_eq!(r.convergents.last(), Some(&(7, 10)));
    }

    #[test]
    fn decimal_literal_certifies_a_limited_number_of_quotients() {
        let a = RotationNumber::parse("0.61803398874989484820458683436563811772").unwrap();
        let e = a.expand(20).unwrap();
        assert!(e.partial_quotients.iter().all(|&q| q == 1));
        assert!(matches!(a.expand(200), Err(Error::Precision(_))));
    }

    #[test]
    fn dc_examples() {
        let g = RotationNumber::golden_mean();
        assert!(check_dc(&g, int(3), int(2), 10_000).unwrap().holds);
        let weak = check_dc(&g, Real::ONE, int(2), 100).unwrap();
        assert!(!weak.holds);
        let fib = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        assert!(fib.contains(&weak.worst_k));
        let r = RotationNumber::rational(3, 5).unwrap();
        let rep = check_dc(&r, int(1000), real(2.5), 5).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.worst_k, 5);
        assert!(rep.worst_margin.eq_zero());
    }

    #[test]
    fn dc_alpha_examples() {
        let g = RotationNumber::golden_mean();
        let a = crate::real::frac01(int(3) * g.value());
        let rep = check_dc_alpha(a, &g, int(3), int(2), 50).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.worst_k, 3);
        assert!(rep.worst_margin < real(1e-60));
        let zero = check_dc_alpha(Real::ZERO, &g, int(3), int(2), 200).unwrap();
        let plain = check_dc(&g, int(3), int(2), 200).unwrap();
        assert!(close(zero.worst_margin, plain.worst_margin, 1e-60));
        let half = check_dc_alpha(half_real(), &g, int(3), int(2), 30).unwrap();
        assert!(half.worst_margin > Real::ZERO);
    }

    fn half_real() -> Real {
        Real::ONE.div2()
    }

    #[test]
    fn rdc_window_on_periodic_expansion() {
        let g = RotationNumber::golden_mean();
        let r = check_rdc(&g, int(3), int(2), 500, 0..=3).unwrap();
        assert_eq!(r.returns, [0, 1, 2, 3]);
    }

    #[test]
    fn evaluation_refines_monotonically() {
        let g = RotationNumber::golden_mean();
        let coarse = g.evaluate(64);
        let fine = g.evaluate(128);
        assert!(fine >= coarse);
        assert!(fine - coarse < real(2f64.powi(-64)));
    }
}
