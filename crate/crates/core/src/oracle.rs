//! Noisy function oracles with frozen noise.
//!
//! The noise at a point is a pure function of the seed and the IEEE bit
//! patterns of the point's coordinates, so re-evaluating the bitwise-identical
//! point returns the bitwise-identical value.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Error;

/// A univariate noisy function.
pub trait Oracle1d {
    fn sample(&mut self, t: f64) -> f64;
    /// The noise bound `ε_f`.
    fn noise_level(&self) -> f64;
    /// Number of underlying function evaluations so far.
    fn evaluations(&self) -> u64;
}

impl<O: Oracle1d + ?Sized> Oracle1d for &mut O {
    fn sample(&mut self, t: f64) -> f64 {
        (**self).sample(t)
    }
    fn noise_level(&self) -> f64 {
        (**self).noise_level()
    }
    fn evaluations(&self) -> u64 {
        (**self).evaluations()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    /// No injected noise; `ε_f` is still reported as the noise level.
    None,
    /// Frozen uniform noise on `[−ε_f, ε_f]`.
    #[default]
    Uniform,
    /// A fresh uniform draw on every call. Disables caching.
    UniformFresh,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

/// Deterministic value in `[−1, 1]` determined by `seed`, the point and a
/// draw counter.
pub fn unit_noise(seed: u64, point: &[f64], draw: u64) -> f64 {
    let mut h = splitmix64(seed ^ 0x6A09_E667_F3BC_C908);
    for &x in point {
        h = splitmix64(h ^ canonical_bits(x));
    }
    h = splitmix64(h ^ draw);
    let top = (h >> 11) as f64;
    2.0 * top / ((1u64 << 53) - 1) as f64 - 1.0
}

#[derive(Debug, Clone)]
struct NoiseSource {
    eps_f: f64,
    seed: u64,
    kind: NoiseKind,
    draws: u64,
}

impl NoiseSource {
    fn new(eps_f: f64, seed: u64, kind: NoiseKind) -> Self {
        assert!(eps_f >= 0.0, "noise level must be nonnegative");
        Self {
            eps_f,
            seed,
            kind,
            draws: 0,
        }
    }

    fn noise(&mut self, point: &[f64]) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Uniform => self.eps_f * unit_noise(self.seed, point, 0),
            NoiseKind::UniformFresh => {
                self.draws += 1;
                self.eps_f * unit_noise(self.seed, point, self.draws)
            }
        }
    }

    fn level(&self) -> f64 {
        self.eps_f
    }
}

/// `f(t) = φ(t) + ε(t)` for a univariate `φ`, caching values by bit pattern.
#[derive(Debug, Clone)]
pub struct NoisyOracle<F> {
    phi: F,
    noise: NoiseSource,
    evaluations: u64,
    cache: BTreeMap<u64, f64>,
    declared_level: Option<f64>,
}

impl<F: Fn(f64) -> f64> NoisyOracle<F> {
    pub fn new(phi: F, eps_f: f64, seed: u64, kind: NoiseKind) -> Self {
        Self {
            phi,
            noise: NoiseSource::new(eps_f, seed, kind),
            evaluations: 0,
            cache: BTreeMap::new(),
            declared_level: None,
        }
    }

    /// Frozen uniform noise.
    pub fn uniform(phi: F, eps_f: f64, seed: u64) -> Self {
        Self::new(phi, eps_f, seed, NoiseKind::Uniform)
    }

    /// Overrides the noise level reported to callers (for misspecified
    /// `ε_f` experiments). The injected noise is unchanged.
    pub fn with_declared_level(mut self, eps_hat: f64) -> Self {
        self.declared_level = Some(eps_hat);
        self
    }

    /// Noiseless value, not counted.
    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed
    }
}

impl<F: Fn(f64) -> f64> Oracle1d for NoisyOracle<F> {
    fn sample(&mut self, t: f64) -> f64 {
        let frozen = self.noise.kind != NoiseKind::UniformFresh;
        if frozen {
            if let Some(&v) = self.cache.get(&t.to_bits()) {
                return v;
            }
        }
        self.evaluations += 1;
        let value = (self.phi)(t) + self.noise.noise(&[t]);
        if frozen {
            self.cache.insert(t.to_bits(), value);
        }
        value
    }

    fn noise_level(&self) -> f64 {
        self.declared_level.unwrap_or_else(|| self.noise.level())
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// `a·f(t) + b` over an inner oracle, with noise level `|a|·ε_f`.
#[derive(Debug)]
pub struct AffineView<O> {
    inner: O,
    a: f64,
    b: f64,
}

impl<O: Oracle1d> AffineView<O> {
    pub fn new(inner: O, a: f64, b: f64) -> Result<Self, Error> {
        if a == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok(Self { inner, a, b })
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Oracle1d> Oracle1d for AffineView<O> {
    fn sample(&mut self, t: f64) -> f64 {
        self.a * self.inner.sample(t) + self.b
    }
    fn noise_level(&self) -> f64 {
        self.a.abs() * self.inner.noise_level()
    }
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

/// Reports a fixed noise level over an inner oracle.
#[derive(Debug)]
pub struct WithNoiseLevel<O> {
    inner: O,
    eps_f: f64,
}

impl<O: Oracle1d> WithNoiseLevel<O> {
    pub fn new(inner: O, eps_f: f64) -> Self {
        Self { inner, eps_f }
    }
}

impl<O: Oracle1d> Oracle1d for WithNoiseLevel<O> {
    fn sample(&mut self, t: f64) -> f64 {
        self.inner.sample(t)
    }
    fn noise_level(&self) -> f64 {
        self.eps_f
    }
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

/// Memoizes an inner oracle by bit pattern of the abscissa.
#[derive(Debug)]
pub struct CachedOracle<O> {
    inner: O,
    cache: BTreeMap<u64, f64>,
}

impl<O: Oracle1d> CachedOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            cache: BTreeMap::new(),
        }
    }

    pub fn preseed(&mut self, t: f64, value: f64) {
        self.cache.insert(t.to_bits(), value);
    }
}

impl<O: Oracle1d> Oracle1d for CachedOracle<O> {
    fn sample(&mut self, t: f64) -> f64 {
        if let Some(&v) = self.cache.get(&t.to_bits()) {
            return v;
        }
        let v = self.inner.sample(t);
        self.cache.insert(t.to_bits(), v);
        v
    }
    fn noise_level(&self) -> f64 {
        self.inner.noise_level()
    }
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

/// A multivariate noisy objective. Every call is a counted evaluation.
#[derive(Debug, Clone)]
pub struct NoisyObjective<F> {
    phi: F,
    dim: usize,
    noise: NoiseSource,
    evaluations: u64,
}

impl<F: Fn(&[f64]) -> f64> NoisyObjective<F> {
    pub fn new(phi: F, dim: usize, eps_f: f64, seed: u64, kind: NoiseKind) -> Self {
        Self {
            phi,
            dim,
            noise: NoiseSource::new(eps_f, seed, kind),
            evaluations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_level(&self) -> f64 {
        self.noise.level()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn value(&mut self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.evaluations += 1;
        (self.phi)(x) + self.noise.noise(x)
    }

    /// Noiseless value, not counted.
    pub fn true_value(&self, x: &[f64]) -> f64 {
        (self.phi)(x)
    }

    /// `t ↦ f(x + t e_i)`.
    pub fn coordinate_slice(
        &mut self,
        x: &[f64],
        i: usize,
    ) -> Result<CoordinateSlice<'_, F>, Error> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        Ok(CoordinateSlice {
            anchor: x[i],
            point: x.to_vec(),
            index: i,
            objective: self,
        })
    }

    /// `t ↦ f(x + t p)`.
    pub fn directional_slice(
        &mut self,
        x: &[f64],
        p: &[f64],
    ) -> Result<DirectionalSlice<'_, F>, Error> {
        if p.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(DirectionalSlice {
            anchor: x.to_vec(),
            direction: p.to_vec(),
            point: x.to_vec(),
            objective: self,
        })
    }
}

pub struct CoordinateSlice<'a, F> {
    objective: &'a mut NoisyObjective<F>,
    point: Vec<f64>,
    anchor: f64,
    index: usize,
}

impl<F: Fn(&[f64]) -> f64> Oracle1d for CoordinateSlice<'_, F> {
    fn sample(&mut self, t: f64) -> f64 {
        self.point[self.index] = self.anchor + t;
        self.objective.value(&self.point)
    }
    fn noise_level(&self) -> f64 {
        self.objective.noise_level()
    }
    fn evaluations(&self) -> u64 {
        self.objective.evaluations()
    }
}

pub struct DirectionalSlice<'a, F> {
    objective: &'a mut NoisyObjective<F>,
    anchor: Vec<f64>,
    direction: Vec<f64>,
    point: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Oracle1d for DirectionalSlice<'_, F> {
    fn sample(&mut self, t: f64) -> f64 {
        for ((p, x), d) in self.point.iter_mut().zip(&self.anchor).zip(&self.direction) {
            *p = x + t * d;
        }
        self.objective.value(&self.point)
    }
    fn noise_level(&self) -> f64 {
        self.objective.noise_level()
    }
    fn evaluations(&self) -> u64 {
        self.objective.evaluations()
    }
}
