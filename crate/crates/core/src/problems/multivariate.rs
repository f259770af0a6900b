use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// A smooth unconstrained objective with a standard start point.
pub trait Problem {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian_diagonal(&self, _x: &[f64]) -> Result<Vec<f64>, Error> {
        Err(Error::MissingAnalyticDerivatives(self.name()))
    }
    fn start(&self) -> Vec<f64>;
    /// Known optimal value, if documented for this dimension.
    fn optimal_value(&self) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Arwhead,
    Tridia,
    Nondia,
    Dqrtic,
    Woods,
    Engval1,
    Genrose,
    Cube,
    Sisser,
    Box3,
    Brkmcc,
    Zangwil2,
}

const ALL: [ProblemKind; 12] = [
    ProblemKind::Arwhead,
    ProblemKind::Tridia,
    ProblemKind::Nondia,
    ProblemKind::Dqrtic,
    ProblemKind::Woods,
    ProblemKind::Engval1,
    ProblemKind::Genrose,
    ProblemKind::Cube,
    ProblemKind::Sisser,
    ProblemKind::Box3,
    ProblemKind::Brkmcc,
    ProblemKind::Zangwil2,
];

/// ENGVAL1 minimum at `n = 100`, computed by solving to a gradient norm of 1e-12.
const ENGVAL1_100: f64 = 109.088_136_143_09;

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Arwhead => "ARWHEAD",
            Self::Tridia => "TRIDIA",
            Self::Nondia => "NONDIA",
            Self::Dqrtic => "DQRTIC",
            Self::Woods => "WOODS",
            Self::Engval1 => "ENGVAL1",
            Self::Genrose => "GENROSE",
            Self::Cube => "CUBE",
            Self::Sisser => "SISSER",
            Self::Box3 => "BOX3",
            Self::Brkmcc => "BRKMCC",
            Self::Zangwil2 => "ZANGWIL2",
        }
    }

    pub fn default_dim(&self) -> usize {
        match self {
            Self::Cube | Self::Sisser | Self::Brkmcc | Self::Zangwil2 => 2,
            Self::Box3 => 3,
            _ => 100,
        }
    }

    fn resizable(&self) -> bool {
        self.default_dim() == 100
    }

    fn from_name(name: &str) -> Option<Self> {
        let upper = name.to_ascii_uppercase();
        if upper == "QUARTC" {
            return Some(Self::Dqrtic);
        }
        ALL.into_iter().find(|k| k.name() == upper)
    }
}

/// One of the registry problems at a given dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestProblem {
    kind: ProblemKind,
    dim: usize,
}

impl TestProblem {
    pub fn new(kind: ProblemKind, dim: usize) -> Result<Self, Error> {
        let ok = match kind {
            _ if !kind.resizable() => dim == kind.default_dim(),
            ProblemKind::Woods => dim >= 4 && dim.is_multiple_of(4),
            _ => dim >= 2,
        };
        if ok {
            Ok(Self { kind, dim })
        } else {
            Err(Error::InvalidConfig(
                "dimension not supported by this problem",
            ))
        }
    }

    pub fn with_default_dim(kind: ProblemKind) -> Self {
        Self {
            kind,
            dim: kind.default_dim(),
        }
    }

    /// Parses `NAME[:dim]`.
    pub fn parse(spec: &str) -> Result<Self, Error> {
        let (name, dim) = match spec.split_once(':') {
            Some((n, d)) => (
                n,
                Some(
                    d.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::UnknownName(spec.to_string()))?,
                ),
            ),
            None => (spec, None),
        };
        let kind = ProblemKind::from_name(name.trim())
            .ok_or_else(|| Error::UnknownName(spec.to_string()))?;
        Self::new(kind, dim.unwrap_or(kind.default_dim()))
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }
}

fn box3_terms() -> impl Iterator<Item = (f64, f64)> {
    (1..=10).map(|i| {
        let t = 0.1 * i as f64;
        (t, (-t).exp() - (-10.0 * t).exp())
    })
}

fn brkmcc_parts(x: &[f64]) -> (f64, f64) {
    let g = -x[0] * x[0] / 4.0 - x[1] * x[1] + 1.0;
    let h = x[0] - 2.0 * x[1] + 1.0;
    (g, h)
}

impl Problem for TestProblem {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        match self.kind {
            ProblemKind::Arwhead => {
                let xn2 = x[n - 1] * x[n - 1];
                x[..n - 1]
                    .iter()
                    .map(|xi| (xi * xi + xn2).powi(2) - 4.0 * xi + 3.0)
                    .sum()
            }
            ProblemKind::Tridia => {
                (x[0] - 1.0).powi(2)
                    + (1..n)
                        .map(|k| (k + 1) as f64 * (2.0 * x[k] - x[k - 1]).powi(2))
                        .sum::<f64>()
            }
            ProblemKind::Nondia => {
                (x[0] - 1.0).powi(2)
                    + x[..n - 1]
                        .iter()
                        .map(|xj| 100.0 * (x[0] - xj * xj).powi(2))
                        .sum::<f64>()
            }
            ProblemKind::Dqrtic => x
                .iter()
                .enumerate()
                .map(|(i, xi)| (xi - (i + 1) as f64).powi(4))
                .sum(),
            ProblemKind::Woods => x
                .chunks_exact(4)
                .map(|c| {
                    let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
                    100.0 * (b - a * a).powi(2)
                        + (1.0 - a).powi(2)
                        + 90.0 * (d - cc * cc).powi(2)
                        + (1.0 - cc).powi(2)
                        + 10.1 * ((b - 1.0).powi(2) + (d - 1.0).powi(2))
                        + 19.8 * (b - 1.0) * (d - 1.0)
                })
                .sum(),
            ProblemKind::Engval1 => x
                .windows(2)
                .map(|w| (w[0] * w[0] + w[1] * w[1]).powi(2) - 4.0 * w[0] + 3.0)
                .sum(),
            ProblemKind::Genrose => {
                1.0 + x
                    .windows(2)
                    .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[1] - 1.0).powi(2))
                    .sum::<f64>()
            }
            ProblemKind::Cube => (x[0] - 1.0).powi(2) + 100.0 * (x[1] - x[0].powi(3)).powi(2),
            ProblemKind::Sisser => {
                let (a, b) = (x[0] * x[0], x[1] * x[1]);
                3.0 * a * a - 2.0 * a * b + 3.0 * b * b
            }
            ProblemKind::Box3 => box3_terms()
                .map(|(t, c)| ((-t * x[0]).exp() - (-t * x[1]).exp() - x[2] * c).powi(2))
                .sum(),
            ProblemKind::Brkmcc => {
                let (g, h) = brkmcc_parts(x);
                (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2) + 0.04 / g + 5.0 * h * h
            }
            ProblemKind::Zangwil2 => {
                (16.0 * x[0] * x[0] + 16.0 * x[1] * x[1]
                    - 8.0 * x[0] * x[1]
                    - 56.0 * x[0]
                    - 256.0 * x[1]
                    + 991.0)
                    / 15.0
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut g = vec![0.0; n];
        match self.kind {
            ProblemKind::Arwhead => {
                let xn = x[n - 1];
                for i in 0..n - 1 {
                    let s = x[i] * x[i] + xn * xn;
                    g[i] = 4.0 * x[i] * s - 4.0;
                    g[n - 1] += 4.0 * xn * s;
                }
            }
            ProblemKind::Tridia => {
                g[0] = 2.0 * (x[0] - 1.0);
                for k in 1..n {
                    let r = 2.0 * x[k] - x[k - 1];
                    let w = 2.0 * (k + 1) as f64 * r;
                    g[k] += 2.0 * w;
                    g[k - 1] -= w;
                }
            }
            ProblemKind::Nondia => {
                g[0] = 2.0 * (x[0] - 1.0);
                for j in 0..n - 1 {
                    let r = x[0] - x[j] * x[j];
                    g[0] += 200.0 * r;
                    g[j] -= 400.0 * x[j] * r;
                }
            }
            ProblemKind::Dqrtic => {
                for (i, gi) in g.iter_mut().enumerate() {
                    *gi = 4.0 * (x[i] - (i + 1) as f64).powi(3);
                }
            }
            ProblemKind::Woods => {
                for (c, gc) in x.chunks_exact(4).zip(g.chunks_exact_mut(4)) {
                    let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
                    gc[0] = -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
                    gc[1] = 200.0 * (b - a * a) + 20.2 * (b - 1.0) + 19.8 * (d - 1.0);
                    gc[2] = -360.0 * cc * (d - cc * cc) - 2.0 * (1.0 - cc);
                    gc[3] = 180.0 * (d - cc * cc) + 20.2 * (d - 1.0) + 19.8 * (b - 1.0);
                }
            }
            ProblemKind::Engval1 => {
                for i in 0..n - 1 {
                    let s = x[i] * x[i] + x[i + 1] * x[i + 1];
                    g[i] += 4.0 * x[i] * s - 4.0;
                    g[i + 1] += 4.0 * x[i + 1] * s;
                }
            }
            ProblemKind::Genrose => {
                for k in 1..n {
                    let r = x[k] - x[k - 1] * x[k - 1];
                    g[k] += 200.0 * r + 2.0 * (x[k] - 1.0);
                    g[k - 1] -= 400.0 * x[k - 1] * r;
                }
            }
            ProblemKind::Cube => {
                let r = x[1] - x[0].powi(3);
                g[0] = 2.0 * (x[0] - 1.0) - 600.0 * x[0] * x[0] * r;
                g[1] = 200.0 * r;
            }
            ProblemKind::Sisser => {
                g[0] = 12.0 * x[0].powi(3) - 4.0 * x[0] * x[1] * x[1];
                g[1] = 12.0 * x[1].powi(3) - 4.0 * x[0] * x[0] * x[1];
            }
            ProblemKind::Box3 => {
                for (t, c) in box3_terms() {
                    let (e1, e2) = ((-t * x[0]).exp(), (-t * x[1]).exp());
                    let r = e1 - e2 - x[2] * c;
                    g[0] += 2.0 * r * (-t * e1);
                    g[1] += 2.0 * r * (t * e2);
                    g[2] += 2.0 * r * (-c);
                }
            }
            ProblemKind::Brkmcc => {
                let (gg, h) = brkmcc_parts(x);
                let inv2 = 0.04 / (gg * gg);
                g[0] = 2.0 * (x[0] - 2.0) + inv2 * x[0] / 2.0 + 10.0 * h;
                g[1] = 2.0 * (x[1] - 1.0) + inv2 * 2.0 * x[1] - 20.0 * h;
            }
            ProblemKind::Zangwil2 => {
                g[0] = (32.0 * x[0] - 8.0 * x[1] - 56.0) / 15.0;
                g[1] = (32.0 * x[1] - 8.0 * x[0] - 256.0) / 15.0;
            }
        }
        g
    }

    fn hessian_diagonal(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.dim;
        let mut h = vec![0.0; n];
        match self.kind {
            ProblemKind::Arwhead => {
                let xn2 = x[n - 1] * x[n - 1];
                for i in 0..n - 1 {
                    let xi2 = x[i] * x[i];
                    h[i] = 12.0 * xi2 + 4.0 * xn2;
                    h[n - 1] += 4.0 * xi2 + 12.0 * xn2;
                }
            }
            ProblemKind::Tridia => {
                h[0] = 2.0;
                for k in 1..n {
                    let w = 2.0 * (k + 1) as f64;
                    h[k] += 4.0 * w;
                    h[k - 1] += w;
                }
            }
            ProblemKind::Nondia => {
                h[0] = 2.0
                    + 200.0 * (n - 2) as f64
                    + 200.0 * ((1.0 - 2.0 * x[0]).powi(2) - 2.0 * (x[0] - x[0] * x[0]));
                for j in 1..n - 1 {
                    h[j] = 1200.0 * x[j] * x[j] - 400.0 * x[0];
                }
            }
            ProblemKind::Dqrtic => {
                for (i, hi) in h.iter_mut().enumerate() {
                    *hi = 12.0 * (x[i] - (i + 1) as f64).powi(2);
                }
            }
            ProblemKind::Woods => {
                for (c, hc) in x.chunks_exact(4).zip(h.chunks_exact_mut(4)) {
                    hc[0] = 1200.0 * c[0] * c[0] - 400.0 * c[1] + 2.0;
                    hc[1] = 220.2;
                    hc[2] = 1080.0 * c[2] * c[2] - 360.0 * c[3] + 2.0;
                    hc[3] = 200.2;
                }
            }
            ProblemKind::Engval1 => {
                for i in 0..n - 1 {
                    let (a, b) = (x[i] * x[i], x[i + 1] * x[i + 1]);
                    h[i] += 12.0 * a + 4.0 * b;
                    h[i + 1] += 4.0 * a + 12.0 * b;
                }
            }
            ProblemKind::Genrose => {
                for k in 1..n {
                    h[k] += 202.0;
                    h[k - 1] += 1200.0 * x[k - 1] * x[k - 1] - 400.0 * x[k];
                }
            }
            ProblemKind::Cube => {
                let r = x[1] - x[0].powi(3);
                h[0] = 2.0 + 1800.0 * x[0].powi(4) - 1200.0 * x[0] * r;
                h[1] = 200.0;
            }
            ProblemKind::Sisser => {
                h[0] = 36.0 * x[0] * x[0] - 4.0 * x[1] * x[1];
                h[1] = 36.0 * x[1] * x[1] - 4.0 * x[0] * x[0];
            }
            ProblemKind::Box3 => {
                for (t, c) in box3_terms() {
                    let (e1, e2) = ((-t * x[0]).exp(), (-t * x[1]).exp());
                    let r = e1 - e2 - x[2] * c;
                    h[0] += 2.0 * (t * e1).powi(2) + 2.0 * r * t * t * e1;
                    h[1] += 2.0 * (t * e2).powi(2) - 2.0 * r * t * t * e2;
                    h[2] += 2.0 * c * c;
                }
            }
            ProblemKind::Brkmcc => {
                let (g, _) = brkmcc_parts(x);
                let (g2, g3) = (g * g, g * g * g);
                h[0] = 12.0 + 0.02 / g2 + 0.02 * x[0] * x[0] / g3;
                h[1] = 42.0 + 0.08 / g2 + 0.32 * x[1] * x[1] / g3;
            }
            ProblemKind::Zangwil2 => {
                h[0] = 32.0 / 15.0;
                h[1] = 32.0 / 15.0;
            }
        }
        Ok(h)
    }

    fn start(&self) -> Vec<f64> {
        let n = self.dim;
        match self.kind {
            ProblemKind::Arwhead | ProblemKind::Tridia => vec![1.0; n],
            ProblemKind::Nondia => vec![-1.0; n],
            ProblemKind::Dqrtic | ProblemKind::Engval1 => vec![2.0; n],
            ProblemKind::Woods => (0..n)
                .map(|i| if i % 2 == 0 { -3.0 } else { -1.0 })
                .collect(),
            ProblemKind::Genrose => (1..=n).map(|i| i as f64 / (n + 1) as f64).collect(),
            ProblemKind::Cube => vec![-1.2, 1.0],
            ProblemKind::Sisser => vec![1.0, 0.1],
            ProblemKind::Box3 => vec![0.0, 10.0, 20.0],
            ProblemKind::Brkmcc => vec![2.0, 2.0],
            ProblemKind::Zangwil2 => vec![3.0, 8.0],
        }
    }

    fn optimal_value(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::Engval1 => (self.dim == 100).then_some(ENGVAL1_100),
            ProblemKind::Genrose => Some(1.0),
            ProblemKind::Brkmcc => Some(0.169_042_679_196_45),
            ProblemKind::Zangwil2 => Some(-18.2),
            _ => Some(0.0),
        }
    }
}

/// All registry problems at their default dimensions.
pub fn multivariate_registry() -> Vec<TestProblem> {
    ALL.into_iter().map(TestProblem::with_default_dim).collect()
}
