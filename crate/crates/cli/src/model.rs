use specgap_core::models::{
    bdmc_chain, mh_chain, mh_limit_profile, proposal_rw, rw_chain, two_down_one_up, BdmcSpec,
    TargetRatios,
};
use specgap_core::spectral::{alpha0_from_profile, alpha0_reversible, solve_tau};
use specgap_core::{Alpha0Result, BandChain, Error, LimitProfile, Result, SparseRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Poisson { lambda: f64 },
    LinearGeometric { tau: f64 },
    Geometric { tau: f64 },
}

impl Target {
    fn ratios(&self) -> Result<TargetRatios> {
        match *self {
            Target::Poisson { lambda } => TargetRatios::poisson(lambda),
            Target::LinearGeometric { tau } => TargetRatios::linear_geometric(tau),
            Target::Geometric { tau } => TargetRatios::geometric(tau),
        }
    }

    fn tau(&self) -> f64 {
        match *self {
            Target::Poisson { .. } => 0.0,
            Target::LinearGeometric { tau } | Target::Geometric { tau } => tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Walk {
        g: usize,
        d: usize,
        a: Vec<f64>,
        boundary: Vec<SparseRow>,
    },
    TwoDownOneUp {
        a: f64,
        b: f64,
    },
    Bdmc {
        p: f64,
        r: f64,
        q: f64,
        r0: f64,
    },
    MetropolisHastings {
        target: Target,
        q: f64,
        r: f64,
    },
    Explicit {
        boundary: Vec<SparseRow>,
        band: Vec<f64>,
    },
}

impl ModelConfig {
    pub fn chain(&self) -> Result<BandChain> {
        match self {
            ModelConfig::Walk { g, d, a, boundary } => rw_chain(*g, *d, a, boundary.clone()),
            ModelConfig::TwoDownOneUp { a, b } => two_down_one_up(*a, *b),
            ModelConfig::Bdmc { p, r, q, r0 } => bdmc_chain(&BdmcSpec::constant(*p, *r, *q, *r0)?),
            ModelConfig::MetropolisHastings { target, q, r } => {
                mh_chain(&target.ratios()?, &proposal_rw(*r, *q)?)
            }
            ModelConfig::Explicit { boundary, band } => {
                BandChain::with_constant_band(boundary.clone(), band.clone())
            }
        }
    }

    /// Asymptotic increment law, plus the tail ratio when it is known in
    /// closed form.
    pub fn profile(&self) -> Result<(LimitProfile, Option<f64>)> {
        match self {
            ModelConfig::Walk { g, d, a, .. } => {
                let n = *g.max(d);
                let mut c = vec![0.0; 2 * n + 1];
                c[n - g..=n + d].copy_from_slice(a);
                Ok((LimitProfile::new(c)?, None))
            }
            ModelConfig::TwoDownOneUp { .. } => {
                Ok((specgap_core::models::two_down_one_up_profile(), None))
            }
            ModelConfig::Bdmc { p, r, q, .. } => Ok((LimitProfile::new(vec![*p, *r, *q])?, None)),
            ModelConfig::MetropolisHastings { target, q, .. } => {
                if !(*q > 0.0 && *q <= 0.5) {
                    return Err(Error::ParameterDomain(format!(
                        "q must lie in (0, 1/2], got {q}"
                    )));
                }
                let tau = target.tau();
                Ok((mh_limit_profile(&[*q, 1.0 - 2.0 * q, *q], tau)?, Some(tau)))
            }
            ModelConfig::Explicit { band, .. } => Ok((LimitProfile::new(band.clone())?, None)),
        }
    }

    /// Tail ratio: closed form when available, otherwise the root of `psi`.
    pub fn tau(&self) -> Result<f64> {
        let (profile, known) = self.profile()?;
        if let Some(t) = known {
            return Ok(t);
        }
        match solve_tau(&profile) {
            Err(Error::DegenerateTailZero) => Ok(0.0),
            other => other,
        }
    }

    pub fn alpha0(&self) -> Result<Alpha0Result> {
        if let ModelConfig::Bdmc { p, r, q, .. } = self {
            if p <= q {
                return Err(Error::NotPositiveRecurrent { ratio: q / p });
            }
            let mut out = alpha0_reversible(&LimitProfile::new(vec![*p, *r, *q])?);
            out.tau = Some(q / p);
            return Ok(out);
        }
        let (profile, _) = self.profile()?;
        alpha0_from_profile(&profile, self.tau()?)
    }

    /// Sets a scalar parameter by name, for sweeps. Changing `p` or `q` of a
    /// birth-death chain moves `r` so that rows stay stochastic.
    pub fn set(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        if let ModelConfig::Bdmc { p, r, q, .. } = self {
            match name {
                "p" => *p = value,
                "q" => *q = value,
                _ => {}
            }
            *r = 1.0 - *p - *q;
        }
        let slot = match (self, name) {
            (ModelConfig::TwoDownOneUp { a, .. }, "a") => a,
            (ModelConfig::TwoDownOneUp { b, .. }, "b") => b,
            (ModelConfig::Bdmc { p, .. }, "p") => p,
            (ModelConfig::Bdmc { q, .. }, "q") => q,
            (ModelConfig::Bdmc { r0, .. }, "r0") => r0,
            (ModelConfig::MetropolisHastings { q, .. }, "q") => q,
            (ModelConfig::MetropolisHastings { r, .. }, "r") => r,
            (
                ModelConfig::MetropolisHastings {
                    target: Target::Poisson { lambda },
                    ..
                },
                "lambda",
            ) => lambda,
            (
                ModelConfig::MetropolisHastings {
                    target: Target::LinearGeometric { tau } | Target::Geometric { tau },
                    ..
                },
                "tau",
            ) => tau,
            (model, _) => {
                return Err(format!(
                    "parameter {name:?} cannot be swept for model {}",
                    model.tag()
                ))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ModelConfig::Walk { .. } => "rw",
            ModelConfig::TwoDownOneUp { .. } => "rw-g2d1",
            ModelConfig::Bdmc { .. } => "bdmc",
            ModelConfig::MetropolisHastings { .. } => "mh",
            ModelConfig::Explicit { .. } => "explicit",
        }
    }
}
