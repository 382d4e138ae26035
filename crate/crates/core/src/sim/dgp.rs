//! Null and alternative data-generating processes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::Series;

/// Default burn-in for recursions that start away from their stationary law.
pub const DEFAULT_BURN_IN: usize = 500;

/// Slope on `y_(t-1)^2` that places the GARCH(1,1) of N8/N9 on the
/// strict-stationarity boundary.
pub const BOUNDARY_ARCH: f64 = 0.1096508;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// i.i.d. N(0, 1)
    N1,
    /// GARCH(1,1), `0.001 + 0.05 y^2 + 0.90 sigma^2`
    N2,
    /// N2 with t(5) innovations
    N3,
    /// EGARCH
    N4,
    /// Mixture of N(0, 1/2) and N(0, 1)
    N5,
    /// `sqrt(t) e_t`
    N6,
    /// Time-varying GARCH with a variance break at `t/T = 1/2`
    N7,
    /// Non-stationary GARCH
    N8,
    /// Zero-drift GARCH
    N9,
    /// All-pass ARMA(1,1)
    N10,
    /// Bilinear
    N11,
    /// Nonlinear MA
    N12,
    /// `y_t = b1 y_(t-1) + b2 y_(t-2) + e_t`
    A1 { b1: f64, b2: f64 },
    /// `y_t = b1 y_(t-1) + b2 y_(t-3) + e_t`
    A2 { b1: f64, b2: f64 },
    /// A1 with `sqrt(t) e_t` innovations
    A3 { b1: f64, b2: f64 },
    /// A2 with `sqrt(t) e_t` innovations
    A4 { b1: f64, b2: f64 },
    /// `y_t = beta y_(t-lag) + e_t`
    Ar { lag: usize, beta: f64 },
}

impl Model {
    /// Models indexed by `t/T` or `sqrt(t)`; these never take a burn-in.
    pub fn is_time_indexed(&self) -> bool {
        matches!(
            self,
            Model::N6 | Model::N7 | Model::A3 { .. } | Model::A4 { .. }
        )
    }

    pub fn default_burn_in(&self) -> usize {
        match self {
            Model::N1 | Model::N5 | Model::N8 | Model::N9 => 0,
            m if m.is_time_indexed() => 0,
            _ => DEFAULT_BURN_IN,
        }
    }

    pub fn default_innovation(&self) -> Innovation {
        match self {
            Model::N3 => Innovation::T5,
            Model::N5 => Innovation::Mixture,
            _ => Innovation::Gaussian,
        }
    }

    /// Null model used for size adjustment: the alternative with its
    /// autoregressive coefficients set to zero.
    pub fn null_model(&self) -> Model {
        match self {
            Model::A3 { .. } | Model::A4 { .. } => Model::N6,
            Model::A1 { .. } | Model::A2 { .. } | Model::Ar { .. } => Model::N1,
            other => *other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Model::A1 { b1, b2 }
            | Model::A2 { b1, b2 }
            | Model::A3 { b1, b2 }
            | Model::A4 { b1, b2 } => {
                if !(b1.is_finite() && b2.is_finite()) || b1.abs() + b2.abs() >= 1.0 {
                    return bad(format!(
                        "autoregressive coefficients ({b1}, {b2}) need |b1| + |b2| < 1"
                    ));
                }
            }
            Model::Ar { lag, beta } => {
                if lag == 0 {
                    return bad("autoregressive lag must be at least 1".into());
                }
                if !beta.is_finite() || beta.abs() >= 1.0 {
                    return bad(format!(
                        "autoregressive coefficient {beta} needs |beta| < 1"
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::A1 { b1, b2 } => write!(f, "A1({b1},{b2})"),
            Model::A2 { b1, b2 } => write!(f, "A2({b1},{b2})"),
            Model::A3 { b1, b2 } => write!(f, "A3({b1},{b2})"),
            Model::A4 { b1, b2 } => write!(f, "A4({b1},{b2})"),
            Model::Ar { lag, beta } => write!(f, "AR({lag},{beta})"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    /// Accepts `N1`..`N12`, `A1(b1,b2)`..`A4(b1,b2)` and `AR(lag,beta)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse model `{s}`"));
        let (head, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(bad()),
            None => (s, None),
        };
        let nums = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let head = head.trim().to_ascii_uppercase();
        let model = match (head.as_str(), args) {
            ("N1", None) => Model::N1,
            ("N2", None) => Model::N2,
            ("N3", None) => Model::N3,
            ("N4", None) => Model::N4,
            ("N5", None) => Model::N5,
            ("N6", None) => Model::N6,
            ("N7", None) => Model::N7,
            ("N8", None) => Model::N8,
            ("N9", None) => Model::N9,
            ("N10", None) => Model::N10,
            ("N11", None) => Model::N11,
            ("N12", None) => Model::N12,
            (a @ ("A1" | "A2" | "A3" | "A4"), Some(args)) => {
                let v = nums(args)?;
                let [b1, b2] = v[..] else { return Err(bad()) };
                match a {
                    "A1" => Model::A1 { b1, b2 },
                    "A2" => Model::A2 { b1, b2 },
                    "A3" => Model::A3 { b1, b2 },
                    _ => Model::A4 { b1, b2 },
                }
            }
            ("AR", Some(args)) => {
                let v = nums(args)?;
                let [lag, beta] = v[..] else {
                    return Err(bad());
                };
                if lag < 1.0 || lag.fract() != 0.0 {
                    return Err(bad());
                }
                Model::Ar {
                    lag: lag as usize,
                    beta,
                }
            }
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    /// Raw Student t(5), variance 5/3.
    T5,
    /// Student t(5) rescaled to unit variance.
    T5Standardized,
    /// N(0, 1/2) or N(0, 1) with probability 1/2 each.
    Mixture,
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Innovation::Gaussian => "gaussian",
            Innovation::T5 => "t5",
            Innovation::T5Standardized => "t5std",
            Innovation::Mixture => "mixture",
        })
    }
}

enum Sampler {
    Gaussian,
    T5 { dist: StudentT<f64>, scale: f64 },
    Mixture,
}

impl Sampler {
    fn new(innovation: Innovation) -> Self {
        match innovation {
            Innovation::Gaussian => Sampler::Gaussian,
            Innovation::T5 | Innovation::T5Standardized => Sampler::T5 {
                dist: StudentT::new(5.0).expect("five degrees of freedom"),
                scale: if innovation == Innovation::T5 {
                    1.0
                } else {
                    (3.0f64 / 5.0).sqrt()
                },
            },
            Innovation::Mixture => Sampler::Mixture,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            Sampler::T5 { dist, scale } => scale * dist.sample(rng),
            Sampler::Mixture => {
                let e: f64 = StandardNormal.sample(rng);
                if rng.gen_bool(0.5) {
                    e * 0.5f64.sqrt()
                } else {
                    e
                }
            }
        }
    }
}

/// Model, innovation law, retained length and burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub model: Model,
    pub innovation: Innovation,
    pub len: usize,
    pub burn_in: usize,
}

impl DgpSpec {
    pub fn new(model: Model, len: usize) -> Self {
        DgpSpec {
            model,
            innovation: model.default_innovation(),
            len,
            burn_in: model.default_burn_in(),
        }
    }

    pub fn null(&self) -> DgpSpec {
        DgpSpec::new(self.model.null_model(), self.len)
    }

    /// Stable identifier; replication seeds are derived from it.
    pub fn label(&self) -> String {
        format!(
            "{}|T={}|{}|burn={}",
            self.model, self.len, self.innovation, self.burn_in
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.len < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: self.len,
            });
        }
        if self.model.is_time_indexed() && self.burn_in > 0 {
            return Err(Error::InvalidParameter(format!(
                "{} is indexed by t and takes no burn-in",
                self.model
            )));
        }
        Ok(())
    }
}

/// Deterministic simulation from a 64-bit seed.
pub fn simulate(spec: &DgpSpec, seed: u64) -> Result<Series> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_rng(spec, &mut rng)
}

fn garch_path<R: Rng + ?Sized>(
    rng: &mut R,
    sampler: &Sampler,
    n: usize,
    omega: f64,
    alpha: f64,
    beta: f64,
    sigma2_init: f64,
) -> Vec<f64> {
    let mut sigma2 = sigma2_init;
    let mut prev = 0.0;
    let mut first = true;
    (0..n)
        .map(|_| {
            if !first {
                sigma2 = omega + alpha * prev * prev + beta * sigma2;
            }
            first = false;
            prev = sigma2.sqrt() * sampler.draw(rng);
            prev
        })
        .collect()
}

/// Draws one path. Observations are indexed `t = 1..=T` after burn-in.
pub fn simulate_with_rng<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Result<Series> {
    spec.validate()?;
    let sampler = Sampler::new(spec.innovation);
    let len = spec.len;
    let n = len + spec.burn_in;
    let mut eps = || sampler.draw(rng);

    let path: Vec<f64> = match spec.model {
        Model::N1 | Model::N5 => (0..n).map(|_| eps()).collect(),
        Model::N2 | Model::N3 => {
            let (omega, alpha, beta) = (0.001, 0.05, 0.90);
            garch_path(
                rng,
                &sampler,
                n,
                omega,
                alpha,
                beta,
                omega / (1.0 - alpha - beta),
            )
        }
        Model::N4 => {
            // log s2_t = 0.001 + 0.5|e_(t-1)| - 0.2 e_(t-1) + 0.95 log s2_(t-1)
            let mean_abs = (2.0 / std::f64::consts::PI).sqrt();
            let mut log_s2 = (0.001 + 0.5 * mean_abs) / 0.05;
            let mut prev_e: Option<f64> = None;
            (0..n)
                .map(|_| {
                    if let Some(e) = prev_e {
                        log_s2 = 0.001 + 0.5 * e.abs() - 0.2 * e + 0.95 * log_s2;
                    }
                    let e = eps();
                    prev_e = Some(e);
                    (0.5 * log_s2).exp() * e
                })
                .collect()
        }
        Model::N6 => (1..=len).map(|t| (t as f64).sqrt() * eps()).collect(),
        Model::N7 => {
            let u = garch_path(rng, &sampler, len, 0.05, 0.05, 0.90, 1.0);
            u.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let x = (i + 1) as f64 / len as f64;
                    let tau = if 0.0 < x && x < 0.5 {
                        1.0
                    } else if (0.5..1.0).contains(&x) {
                        2.0
                    } else {
                        0.0
                    };
                    tau * v
                })
                .collect()
        }
        Model::N8 => garch_path(rng, &sampler, n, 0.001, BOUNDARY_ARCH, 0.90, 0.001 + 0.001),
        Model::N9 => garch_path(rng, &sampler, n, 0.0, BOUNDARY_ARCH, 0.90, 1.0),
        Model::N10 => {
            let (mut y_prev, mut e_prev) = (0.0, 0.0);
            (0..n)
                .map(|_| {
                    let e = eps();
                    let y = 0.8 * y_prev + e - e_prev / 0.8;
                    y_prev = y;
                    e_prev = e;
                    y
                })
                .collect()
        }
        Model::N11 => {
            let mut y = vec![0.0; n + 2];
            let mut e_prev = 0.0;
            for t in 2..n + 2 {
                let e = eps();
                y[t] = e + 0.5 * e_prev * y[t - 2];
                e_prev = e;
            }
            y.split_off(2)
        }
        Model::N12 => {
            let (mut e1, mut e2) = (0.0, 0.0);
            (0..n)
                .map(|_| {
                    let e = eps();
                    let y = e + 0.5 * e1 * e2;
                    e2 = e1;
                    e1 = e;
                    y
                })
                .collect()
        }
        Model::A1 { b1, b2 } => autoregression(n, &[(1, b1), (2, b2)], |_| eps()),
        Model::A2 { b1, b2 } => autoregression(n, &[(1, b1), (3, b2)], |_| eps()),
        Model::A3 { b1, b2 } => {
            autoregression(n, &[(1, b1), (2, b2)], |t| ((t + 1) as f64).sqrt() * eps())
        }
        Model::A4 { b1, b2 } => {
            autoregression(n, &[(1, b1), (3, b2)], |t| ((t + 1) as f64).sqrt() * eps())
        }
        Model::Ar { lag, beta } => autoregression(n, &[(lag, beta)], |_| eps()),
    };
    let kept = path[path.len() - len..].to_vec();
    Series::new(kept)
}

/// `y_t = sum_k c_k y_(t - lag_k) + shock(t)`, zero pre-sample values.
fn autoregression(
    n: usize,
    terms: &[(usize, f64)],
    mut shock: impl FnMut(usize) -> f64,
) -> Vec<f64> {
    let mut y = Vec::with_capacity(n);
    for t in 0..n {
        let ar: f64 = terms
            .iter()
            .filter(|(lag, _)| *lag <= t)
            .map(|&(lag, c)| c * y[t - lag])
            .sum();
        y.push(ar + shock(t));
    }
    y
}
