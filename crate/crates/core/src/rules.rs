//! Closed-form positive sequences over integer indices.
//!
//! Bi-infinite hierarchies need evaluation at arbitrarily negative indices, so
//! sequences are represented by rules, never by materialized arrays. Every
//! rule evaluates to a finite positive real on its domain and also exposes a
//! log-space evaluation for values that overflow f64 (factorial volumes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ln_gamma;

/// Index set of a rule: all of ℤ, or a one-sided range with a stated start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Domain {
    #[default]
    AllIntegers,
    From(i64),
}

impl Domain {
    pub fn from_index(start: i64) -> Self {
        Domain::From(start)
    }

    pub fn contains(&self, k: i64) -> bool {
        match self {
            Domain::AllIntegers => true,
            Domain::From(from) => k >= *from,
        }
    }

    pub fn start(&self) -> Option<i64> {
        match self {
            Domain::AllIntegers => None,
            Domain::From(from) => Some(*from),
        }
    }
}

/// The slowly varying factors used by regularly varying eigenvalue laws:
/// φ(τ) = coeff · τ^gamma · (ln(e+τ))^delta for τ >= 1, continued as the
/// constant φ(1) below τ = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlowlyVarying {
    pub coeff: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
}

impl SlowlyVarying {
    pub const ONE: SlowlyVarying = SlowlyVarying {
        coeff: 1.0,
        gamma: 0.0,
        delta: 0.0,
    };

    pub fn value(&self, tau: f64) -> f64 {
        let tau = tau.max(1.0);
        self.coeff * tau.powf(self.gamma) * (std::f64::consts::E + tau).ln().powf(self.delta)
    }

    /// dφ/dτ, zero on the constant continuation below τ = 1.
    pub fn derivative(&self, tau: f64) -> f64 {
        if tau < 1.0 {
            return 0.0;
        }
        let l = (std::f64::consts::E + tau).ln();
        let base = self.coeff * tau.powf(self.gamma) * l.powf(self.delta);
        base * (self.gamma / tau + self.delta / (l * (std::f64::consts::E + tau)))
    }

    /// φ^a, again of the same closed family.
    pub fn pow(&self, a: f64) -> SlowlyVarying {
        SlowlyVarying {
            coeff: self.coeff.powf(a),
            gamma: self.gamma * a,
            delta: self.delta * a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coeff > 0.0 && self.coeff.is_finite()) {
            return Err(Error::config("slowly varying coeff must be positive"));
        }
        if !self.gamma.is_finite() || !self.delta.is_finite() {
            return Err(Error::config("slowly varying exponents must be finite"));
        }
        Ok(())
    }
}

/// Closed-form expression of a rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RuleExpr {
    /// f(k) = value
    Constant { value: f64 },
    /// f(k) = base · ratio^k
    Geometric { base: f64, ratio: f64 },
    /// f(k) = coeff · (k + shift)^exponent
    Power {
        coeff: f64,
        shift: f64,
        exponent: f64,
    },
    /// f(k) = (k + offset)!
    FactorialVolume { offset: i64 },
    /// f(k) = of(k)^power · phi(ln of(k))
    PowerTimesSlowlyVarying {
        of: Box<SequenceRule>,
        power: f64,
        phi: SlowlyVarying,
    },
    /// Explicit leading values; evaluation past the table uses the mandatory
    /// tail rule, evaluation before it uses the head rule when present and is
    /// a domain error otherwise. Never extrapolates silently.
    FiniteTableWithTailRule {
        start: i64,
        values: Vec<f64>,
        tail: Box<SequenceRule>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        head: Option<Box<SequenceRule>>,
    },
    /// f(k) = Σ terms(k)
    PointwiseSumOfRules { terms: Vec<SequenceRule> },
    /// f(k) = of(k)^exponent
    Pow {
        of: Box<SequenceRule>,
        exponent: f64,
    },
}

/// A positive sequence rule together with its index domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceRule {
    #[serde(flatten)]
    pub expr: RuleExpr,
    #[serde(default)]
    pub domain: Domain,
}

impl SequenceRule {
    pub fn constant(value: f64, domain: Domain) -> Self {
        SequenceRule {
            expr: RuleExpr::Constant { value },
            domain,
        }
    }

    pub fn geometric(base: f64, ratio: f64, domain: Domain) -> Self {
        SequenceRule {
            expr: RuleExpr::Geometric { base, ratio },
            domain,
        }
    }

    pub fn power(coeff: f64, shift: f64, exponent: f64, domain: Domain) -> Self {
        SequenceRule {
            expr: RuleExpr::Power {
                coeff,
                shift,
                exponent,
            },
            domain,
        }
    }

    pub fn factorial_volume(offset: i64, domain: Domain) -> Self {
        SequenceRule {
            expr: RuleExpr::FactorialVolume { offset },
            domain,
        }
    }

    pub fn sum(terms: Vec<SequenceRule>, domain: Domain) -> Self {
        SequenceRule {
            expr: RuleExpr::PointwiseSumOfRules { terms },
            domain,
        }
    }

    pub fn finite_table(start: i64, values: Vec<f64>, tail: SequenceRule) -> Self {
        let domain = tail
            .domain
            .start()
            .map_or(Domain::AllIntegers, |_| Domain::from_index(start));
        SequenceRule {
            expr: RuleExpr::FiniteTableWithTailRule {
                start,
                values,
                tail: Box::new(tail),
                head: None,
            },
            domain,
        }
    }

    /// f(k) as an f64; finite and positive on the domain or a domain error.
    pub fn eval(&self, k: i64) -> Result<f64> {
        if !self.domain.contains(k) {
            return Err(Error::domain(format!("index {k} outside rule domain")));
        }
        let v = match &self.expr {
            RuleExpr::Constant { value } => *value,
            RuleExpr::Geometric { base, ratio } => {
                if k.unsigned_abs() <= 1024 {
                    base * ratio.powi(k as i32)
                } else {
                    (base.ln() + k as f64 * ratio.ln()).exp()
                }
            }
            RuleExpr::Power {
                coeff,
                shift,
                exponent,
            } => {
                let x = k as f64 + shift;
                if x <= 0.0 {
                    return Err(Error::domain(format!(
                        "power rule base {x} not positive at index {k}"
                    )));
                }
                coeff * x.powf(*exponent)
            }
            RuleExpr::FactorialVolume { offset } => {
                let m = k + offset;
                if m < 0 {
                    return Err(Error::domain(format!(
                        "factorial volume undefined at index {k} (argument {m})"
                    )));
                }
                factorial_f64(m as u64)
            }
            RuleExpr::PowerTimesSlowlyVarying { of, power, phi } => {
                let w = of.ln_eval(k)?;
                (power * w).exp() * phi.value(w)
            }
            RuleExpr::FiniteTableWithTailRule {
                start,
                values,
                tail,
                head,
            } => {
                let end = start + values.len() as i64;
                if k >= *start && k < end {
                    values[(k - start) as usize]
                } else if k >= end {
                    tail.eval(k)?
                } else if let Some(head) = head {
                    head.eval(k)?
                } else {
                    return Err(Error::domain(format!(
                        "index {k} below table start {start} and no head rule given"
                    )));
                }
            }
            RuleExpr::PointwiseSumOfRules { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval(k)?;
                }
                acc
            }
            RuleExpr::Pow { of, exponent } => of.eval(k)?.powf(*exponent),
        };
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::domain(format!(
                "rule value {v} at index {k} is not a finite positive real"
            )));
        }
        Ok(v)
    }

    /// ln f(k); exact evaluation route for values beyond f64 range.
    pub fn ln_eval(&self, k: i64) -> Result<f64> {
        if !self.domain.contains(k) {
            return Err(Error::domain(format!("index {k} outside rule domain")));
        }
        match &self.expr {
            RuleExpr::Constant { value } => Ok(value.ln()),
            RuleExpr::Geometric { base, ratio } => Ok(base.ln() + k as f64 * ratio.ln()),
            RuleExpr::Power {
                coeff,
                shift,
                exponent,
            } => {
                let x = k as f64 + shift;
                if x <= 0.0 {
                    return Err(Error::domain(format!(
                        "power rule base {x} not positive at index {k}"
                    )));
                }
                Ok(coeff.ln() + exponent * x.ln())
            }
            RuleExpr::FactorialVolume { offset } => {
                let m = k + offset;
                if m < 0 {
                    return Err(Error::domain(format!(
                        "factorial volume undefined at index {k} (argument {m})"
                    )));
                }
                Ok(ln_gamma(m as f64 + 1.0))
            }
            RuleExpr::PowerTimesSlowlyVarying { of, power, phi } => {
                let w = of.ln_eval(k)?;
                Ok(power * w + phi.value(w).ln())
            }
            RuleExpr::PointwiseSumOfRules { terms } => {
                // log-sum-exp: stable even when individual terms overflow
                let lns = terms
                    .iter()
                    .map(|t| t.ln_eval(k))
                    .collect::<Result<Vec<_>>>()?;
                let m = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = lns.iter().map(|l| (l - m).exp()).sum();
                Ok(m + s.ln())
            }
            RuleExpr::Pow { of, exponent } => Ok(exponent * of.ln_eval(k)?),
            RuleExpr::FiniteTableWithTailRule { .. } => Ok(self.eval(k)?.ln()),
        }
    }

    /// Entrywise power f(k)^a, staying inside the closed families where the
    /// algebra allows it.
    pub fn pow(&self, a: f64) -> SequenceRule {
        let expr = match &self.expr {
            RuleExpr::Constant { value } => RuleExpr::Constant {
                value: value.powf(a),
            },
            RuleExpr::Geometric { base, ratio } => RuleExpr::Geometric {
                base: base.powf(a),
                ratio: ratio.powf(a),
            },
            RuleExpr::Power {
                coeff,
                shift,
                exponent,
            } => RuleExpr::Power {
                coeff: coeff.powf(a),
                shift: *shift,
                exponent: exponent * a,
            },
            RuleExpr::PowerTimesSlowlyVarying { of, power, phi } => {
                RuleExpr::PowerTimesSlowlyVarying {
                    of: of.clone(),
                    power: power * a,
                    phi: phi.pow(a),
                }
            }
            RuleExpr::FiniteTableWithTailRule {
                start,
                values,
                tail,
                head,
            } => RuleExpr::FiniteTableWithTailRule {
                start: *start,
                values: values.iter().map(|v| v.powf(a)).collect(),
                tail: Box::new(tail.pow(a)),
                head: head.as_ref().map(|h| Box::new(h.pow(a))),
            },
            RuleExpr::Pow { of, exponent } => RuleExpr::Pow {
                of: of.clone(),
                exponent: exponent * a,
            },
            RuleExpr::FactorialVolume { .. } | RuleExpr::PointwiseSumOfRules { .. } => {
                RuleExpr::Pow {
                    of: Box::new(self.clone()),
                    exponent: a,
                }
            }
        };
        SequenceRule {
            expr,
            domain: self.domain,
        }
    }

    /// Checks positivity and finiteness over a probe window of the domain.
    pub fn validate_on(&self, lo: i64, hi: i64) -> Result<()> {
        for k in lo..=hi {
            if self.domain.contains(k) {
                self.eval(k)?;
            }
        }
        Ok(())
    }
}

fn factorial_f64(m: u64) -> f64 {
    if m > 170 {
        return f64::INFINITY;
    }
    let mut acc = 1.0f64;
    for j in 2..=m {
        acc *= j as f64;
    }
    acc
}
