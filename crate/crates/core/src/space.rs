//! Homogeneous ultrametric spaces and their eigenvalue profiles.
//!
//! A homogeneous space is determined by its degree sequence n_k (the number of
//! successors of each level-k ball) plus the dichotomy between a bi-infinite
//! hierarchy with levels in ℤ (perfect spaces such as the p-adic line) and a
//! one-sided hierarchy with levels in ℕ (discrete groups). Volumes follow
//! V(0) = 1 and V(k)/V(k-1) = n_k exactly. An eigenvalue profile is a strictly
//! decreasing positive sequence λ_k with λ_k → 0 upward (and λ_k → ∞ downward
//! in the bi-infinite case); its reciprocals are the intrinsic ball diameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{Domain, SequenceRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CaseKind {
    /// Levels in ℤ; every point is an accumulation point.
    BiInfinite,
    /// Levels in ℕ with r_0 = 0; the space is countable and discrete.
    OneSided,
}

#[derive(Clone, Debug)]
pub struct HomogeneousSpace {
    case: CaseKind,
    degree: SequenceRule,
    distance: Option<SequenceRule>,
}

/// Probe window used by structural validation of rules.
const PROBE_LO: i64 = -48;
const PROBE_HI: i64 = 64;

impl HomogeneousSpace {
    pub fn new(
        case: CaseKind,
        degree: SequenceRule,
        distance: Option<SequenceRule>,
    ) -> Result<Self> {
        let lo = match case {
            CaseKind::BiInfinite => PROBE_LO,
            CaseKind::OneSided => 1,
        };
        for k in lo..=PROBE_HI {
            let n = degree.eval(k)?;
            if n < 2.0 || n.fract() != 0.0 || n > u64::MAX as f64 {
                return Err(Error::config(format!(
                    "degree n_{k} = {n} must be an integer >= 2"
                )));
            }
        }
        if let Some(r) = &distance {
            let mut prev = None;
            for k in lo..=PROBE_HI {
                let rk = r.eval(k)?;
                if let Some(p) = prev {
                    if rk <= p {
                        return Err(Error::config(format!(
                            "distances must be strictly increasing, violated at index {k}"
                        )));
                    }
                }
                prev = Some(rk);
            }
        }
        Ok(HomogeneousSpace {
            case,
            degree,
            distance,
        })
    }

    /// The p-adic line with the spectral-multiplier metric: constant degree p,
    /// distances r_k = p^{k-1}, volume V(k) = p^k.
    pub fn p_adic(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::config("p must be at least 2"));
        }
        let pf = p as f64;
        Self::new(
            CaseKind::BiInfinite,
            SequenceRule::constant(pf, Domain::AllIntegers),
            Some(SequenceRule::geometric(1.0 / pf, pf, Domain::AllIntegers)),
        )
    }

    /// Direct sum of countably many copies of Z(q); levels index the finite
    /// partial sums, distances count the top coordinate.
    pub fn direct_sum(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::config("q must be at least 2"));
        }
        Self::new(
            CaseKind::OneSided,
            SequenceRule::constant(q as f64, Domain::from_index(1)),
            Some(SequenceRule::power(1.0, 0.0, 1.0, Domain::from_index(1))),
        )
    }

    /// The finitary symmetric group: level-k balls are cosets of the
    /// permutations of {1..k+1}, so n_k = k+1 and V(k) = (k+1)!.
    pub fn symmetric_group() -> Self {
        Self::new(
            CaseKind::OneSided,
            SequenceRule::power(1.0, 1.0, 1.0, Domain::from_index(1)),
            Some(SequenceRule::power(1.0, 0.0, 1.0, Domain::from_index(1))),
        )
        .expect("static space definition is valid")
    }

    pub fn case(&self) -> CaseKind {
        self.case
    }

    pub fn degree_rule(&self) -> &SequenceRule {
        &self.degree
    }

    pub fn distance_rule(&self) -> Option<&SequenceRule> {
        self.distance.as_ref()
    }

    fn check_level(&self, k: i64) -> Result<()> {
        if self.case == CaseKind::OneSided && k < 0 {
            return Err(Error::domain(format!(
                "level {k} is negative on a one-sided hierarchy"
            )));
        }
        Ok(())
    }

    /// n_k as an integer. Levels start at 1 in the one-sided case.
    pub fn degree(&self, k: i64) -> Result<u64> {
        self.check_level(k)?;
        if self.case == CaseKind::OneSided && k < 1 {
            return Err(Error::domain("degrees are indexed from 1"));
        }
        Ok(self.degree.eval(k)? as u64)
    }

    /// r_k; in the one-sided case r_0 = 0 by definition.
    pub fn distance(&self, k: i64) -> Result<f64> {
        self.check_level(k)?;
        let rule = self
            .distance
            .as_ref()
            .ok_or_else(|| Error::config("space has no distance rule"))?;
        if self.case == CaseKind::OneSided && k == 0 {
            return Ok(0.0);
        }
        rule.eval(k)
    }

    /// V(k) as an f64: exact integer arithmetic while the value fits in u128,
    /// log-space beyond that.
    pub fn volume(&self, k: i64) -> Result<f64> {
        match self.volume_exact(k)? {
            VolumeValue::Exact(v) => Ok(v as f64),
            VolumeValue::ReciprocalExact(v) => Ok(1.0 / v as f64),
            VolumeValue::Log(ln) => Ok(ln.exp()),
        }
    }

    /// ln V(k).
    pub fn ln_volume(&self, k: i64) -> Result<f64> {
        self.check_level(k)?;
        let mut acc = 0.0f64;
        if k >= 0 {
            for j in 1..=k {
                acc += (self.degree.eval(j)?).ln();
            }
        } else {
            for j in (k + 1)..=0 {
                acc -= (self.degree.eval(j)?).ln();
            }
        }
        Ok(acc)
    }

    /// Exact volume when representable: V(k) for k >= 0, 1/V(k) for k < 0.
    pub fn volume_exact(&self, k: i64) -> Result<VolumeValue> {
        self.check_level(k)?;
        if k >= 0 {
            let mut acc: u128 = 1;
            for j in 1..=k {
                let n = self.degree.eval(j)? as u128;
                match acc.checked_mul(n) {
                    Some(v) if v < (1u128 << 90) => acc = v,
                    _ => return Ok(VolumeValue::Log(self.ln_volume(k)?)),
                }
            }
            Ok(VolumeValue::Exact(acc))
        } else {
            let mut acc: u128 = 1;
            for j in (k + 1)..=0 {
                let n = self.degree.eval(j)? as u128;
                match acc.checked_mul(n) {
                    Some(v) if v < (1u128 << 90) => acc = v,
                    _ => return Ok(VolumeValue::Log(self.ln_volume(k)?)),
                }
            }
            Ok(VolumeValue::ReciprocalExact(acc))
        }
    }
}

/// Exact or log-space volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolumeValue {
    /// V(k) itself (k >= 0).
    Exact(u128),
    /// The reciprocal 1/V(k) is the integer given (k < 0).
    ReciprocalExact(u128),
    /// ln V(k) for values outside integer range.
    Log(f64),
}

/// How a profile was obtained; recorded for diagnostics only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    StandardFromMetric,
    FractionalPower,
    FromStepWeights,
    Explicit,
}

/// Strictly decreasing positive eigenvalues λ_k, one per ball level.
#[derive(Clone, Debug)]
pub struct EigenvalueProfile {
    lambda: SequenceRule,
    provenance: Provenance,
}

impl EigenvalueProfile {
    pub fn explicit(lambda: SequenceRule) -> Self {
        EigenvalueProfile {
            lambda,
            provenance: Provenance::Explicit,
        }
    }

    pub fn with_provenance(lambda: SequenceRule, provenance: Provenance) -> Self {
        EigenvalueProfile { lambda, provenance }
    }

    /// λ_k = 1/r_k, the standard profile of the metric.
    pub fn standard_from_metric(space: &HomogeneousSpace) -> Result<Self> {
        let rule = space
            .distance_rule()
            .ok_or_else(|| Error::config("standard profile needs a distance rule"))?;
        Ok(EigenvalueProfile {
            lambda: rule.pow(-1.0),
            provenance: Provenance::StandardFromMetric,
        })
    }

    /// Entrywise power λ_k^alpha; realizes the fractional operator calculus.
    pub fn fractional(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("exponent {alpha} must be positive")));
        }
        Ok(EigenvalueProfile {
            lambda: self.lambda.pow(alpha),
            provenance: Provenance::FractionalPower,
        })
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn lambda_rule(&self) -> &SequenceRule {
        &self.lambda
    }

    pub fn lambda(&self, k: i64) -> Result<f64> {
        self.lambda.eval(k)
    }

    /// λ_k with overflow clamped to +∞ deep in the head of a bi-infinite
    /// profile and underflow clamped to 0 far in the tail; the heat-kernel
    /// terms attached to such levels are exactly the corresponding limits.
    pub fn lambda_extended(&self, k: i64) -> Result<f64> {
        match self.lambda.eval(k) {
            Ok(v) => Ok(v),
            Err(_) => {
                let ln = self.lambda.ln_eval(k)?;
                Ok(ln.exp())
            }
        }
    }

    /// C_k = λ_k − λ_{k+1}, the per-level choice weight.
    pub fn choice_coefficient(&self, k: i64) -> Result<f64> {
        Ok(self.lambda(k)? - self.lambda(k + 1)?)
    }

    /// Intrinsic diameters s_k = 1/λ_k.
    pub fn intrinsic_diameters(&self) -> SequenceRule {
        self.lambda.pow(-1.0)
    }
}

/// Outcome of one validation check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CheckOutcome {
    Pass,
    Fail { at: i64, detail: String },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// Diagnostics report for an eigenvalue profile over a scan range.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub scan_lo: i64,
    pub scan_hi: i64,
    pub strictly_decreasing: CheckOutcome,
    pub positive_choice: CheckOutcome,
    /// Numeric evidence that λ_k → 0 at the upper end of the scan.
    pub tail_to_zero: CheckOutcome,
    /// Numeric evidence that λ_k → ∞ at the lower end (bi-infinite only).
    pub head_to_infinity: Option<CheckOutcome>,
}

impl ProfileReport {
    pub fn passed(&self) -> bool {
        self.strictly_decreasing.passed()
            && self.positive_choice.passed()
            && self.tail_to_zero.passed()
            && self.head_to_infinity.as_ref().is_none_or(|c| c.passed())
    }
}

/// Checks the defining conditions of a profile over a finite scan range:
/// strict monotonicity, positivity of the choice weights, and decay/blow-up
/// evidence at the scan ends. Always returns a report.
pub fn validate_profile(
    profile: &EigenvalueProfile,
    space: &HomogeneousSpace,
    scan_lo: i64,
    scan_hi: i64,
) -> ProfileReport {
    let lo = match space.case() {
        CaseKind::BiInfinite => scan_lo,
        CaseKind::OneSided => scan_lo.max(1),
    };
    let hi = scan_hi.max(lo + 8);

    let mut monotone = CheckOutcome::Pass;
    let mut choice = CheckOutcome::Pass;
    let mut values = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        match profile.lambda(k) {
            Ok(v) => values.push(v),
            Err(e) => {
                let fail = CheckOutcome::Fail {
                    at: k,
                    detail: e.to_string(),
                };
                return ProfileReport {
                    scan_lo: lo,
                    scan_hi: hi,
                    strictly_decreasing: fail.clone(),
                    positive_choice: fail.clone(),
                    tail_to_zero: fail.clone(),
                    head_to_infinity: (space.case() == CaseKind::BiInfinite).then_some(fail),
                };
            }
        }
    }
    for (i, w) in values.windows(2).enumerate() {
        let k = lo + i as i64;
        if w[1] >= w[0] {
            if monotone.passed() {
                monotone = CheckOutcome::Fail {
                    at: k,
                    detail: format!("λ_{} = {} !> λ_{} = {}", k, w[0], k + 1, w[1]),
                };
            }
            if choice.passed() {
                choice = CheckOutcome::Fail {
                    at: k,
                    detail: format!("C_{} = {} is not positive", k, w[0] - w[1]),
                };
            }
        }
    }

    let first = values[0];
    let mid = values[values.len() / 2];
    let last = *values.last().unwrap();
    let tail_to_zero = if last < 0.5 * mid && monotone.passed() {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail {
            at: hi,
            detail: format!("λ at scan end {last} shows no decay (midpoint {mid})"),
        }
    };
    let head_to_infinity = (space.case() == CaseKind::BiInfinite).then(|| {
        if first > 2.0 * mid && monotone.passed() {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail {
                at: lo,
                detail: format!("λ at scan start {first} shows no blow-up (midpoint {mid})"),
            }
        }
    });

    ProfileReport {
        scan_lo: lo,
        scan_hi: hi,
        strictly_decreasing: monotone,
        positive_choice: choice,
        tail_to_zero,
        head_to_infinity,
    }
}
