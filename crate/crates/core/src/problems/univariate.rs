use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// Univariate test functions. Derivatives of every order are analytic.
#[derive(Debug, Clone, PartialEq)]
pub enum UnivariateFunction {
    Cos,
    /// `a·sin(b t)`
    Sin {
        a: f64,
        b: f64,
    },
    /// `(e^t − 1)²`
    ExpMinusOneSquared,
    /// `e^{rate·t}`
    Exp {
        rate: f64,
    },
    /// `a·(e^{b t} − 1)`
    ScaledExpm1 {
        a: f64,
        b: f64,
    },
    /// `Σ c_k t^k`, coefficients in ascending order.
    Polynomial(Vec<f64>),
}

fn falling(k: usize, j: usize) -> f64 {
    (0..j).map(|i| (k - i) as f64).product()
}

impl UnivariateFunction {
    /// `t⁴ + 3t² − 10t`
    pub fn quartic() -> Self {
        Self::Polynomial(alloc::vec![0.0, -10.0, 3.0, 0.0, 1.0])
    }

    /// `10000t³ + 0.01t² + 5t`
    pub fn cubic() -> Self {
        Self::Polynomial(alloc::vec![0.0, 5.0, 0.01, 10000.0])
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// The `k`-th derivative; `k = 0` is the value.
    pub fn derivative(&self, k: u32, t: f64) -> f64 {
        match self {
            Self::Cos => {
                let (s, c) = t.sin_cos();
                [c, -s, -c, s][k as usize % 4]
            }
            Self::Sin { a, b } => {
                let (s, c) = (b * t).sin_cos();
                a * b.powi(k as i32) * [s, c, -s, -c][k as usize % 4]
            }
            Self::ExpMinusOneSquared => match k {
                0 => t.exp_m1().powi(2),
                1 => 2.0 * t.exp_m1() * t.exp(),
                _ => 2f64.powi(k as i32) * (2.0 * t).exp() - 2.0 * t.exp(),
            },
            Self::Exp { rate } => rate.powi(k as i32) * (rate * t).exp(),
            Self::ScaledExpm1 { a, b } => match k {
                0 => a * (b * t).exp_m1(),
                _ => a * b.powi(k as i32) * (b * t).exp(),
            },
            Self::Polynomial(c) => {
                let k = k as usize;
                c.iter()
                    .enumerate()
                    .skip(k)
                    .rev()
                    .fold(0.0, |acc, (j, cj)| acc * t + cj * falling(j, k))
            }
        }
    }

    /// Parses `name[:p1,p2,...]`.
    pub fn parse(spec: &str) -> Result<Self, Error> {
        let unknown = || Error::UnknownName(spec.to_string());
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let values: Vec<f64> = match params {
            Some(p) => p
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| unknown()))
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let pair = |da: f64, db: f64| -> Result<(f64, f64), Error> {
            match values.as_slice() {
                [] => Ok((da, db)),
                [a, b] => Ok((*a, *b)),
                _ => Err(unknown()),
            }
        };
        let none = |f: Self| {
            if values.is_empty() {
                Ok(f)
            } else {
                Err(unknown())
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "cos" => none(Self::Cos),
            "sin" => pair(1.0, 1.0).map(|(a, b)| Self::Sin { a, b }),
            "expm1sq" => none(Self::ExpMinusOneSquared),
            "exp" => match values.as_slice() {
                [] => Ok(Self::Exp { rate: 100.0 }),
                [r] => Ok(Self::Exp { rate: *r }),
                _ => Err(unknown()),
            },
            "expm1" => pair(1.0, 1.0).map(|(a, b)| Self::ScaledExpm1 { a, b }),
            "quartic" => none(Self::quartic()),
            "cubic" => none(Self::cubic()),
            "poly" if !values.is_empty() => Ok(Self::Polynomial(values.clone())),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Cos => "cos".into(),
            Self::Sin { a, b } => format!("sin:{a},{b}"),
            Self::ExpMinusOneSquared => "expm1sq".into(),
            Self::Exp { rate } => format!("exp:{rate}"),
            Self::ScaledExpm1 { a, b } => format!("expm1:{a},{b}"),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
                format!("poly:{}", parts.join(","))
            }
        }
    }
}

/// The univariate functions used in the experiments, with their lookup names.
pub fn univariate_registry() -> Vec<(&'static str, UnivariateFunction)> {
    alloc::vec![
        ("cos", UnivariateFunction::Cos),
        ("sin", UnivariateFunction::Sin { a: 1.0, b: 1.0 }),
        ("expm1sq", UnivariateFunction::ExpMinusOneSquared),
        ("exp", UnivariateFunction::Exp { rate: 100.0 }),
        ("quartic", UnivariateFunction::quartic()),
        ("cubic", UnivariateFunction::cubic()),
        ("expm1", UnivariateFunction::ScaledExpm1 { a: 1.0, b: 1.0 }),
        (
            "poly",
            UnivariateFunction::Polynomial(alloc::vec![1.0, -2.0, 0.5, 3.0])
        ),
    ]
}
