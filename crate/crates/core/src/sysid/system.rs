//! Random stable discrete-time systems and data simulation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::kernels::InputSignal;

/// Number of lags used to normalize a generated system to unit impulse-response energy.
pub const ENERGY_LAGS: usize = 4096;

/// Rational transfer function `G(q) = b(q⁻¹) / a(q⁻¹)` with `a₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    /// `b₀, b₁, …` in powers of `q⁻¹`.
    pub num: Vec<f64>,
    /// `1, a₁, …, a_n` in powers of `q⁻¹`.
    pub den: Vec<f64>,
    pub poles: Vec<Complex64>,
    pub zeros: Vec<Complex64>,
}

/// Real coefficients of `Π (1 − r_k x)` in increasing powers of `x`.
fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= r * ck;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

impl LtiSystem {
    /// Strictly proper system `gain · q⁻¹ Π(1 − z_k q⁻¹) / Π(1 − p_k q⁻¹)`.
    /// Complex roots must come in conjugate pairs.
    pub fn from_poles_zeros(poles: Vec<Complex64>, zeros: Vec<Complex64>, gain: f64) -> Result<Self> {
        if poles.iter().any(|p| !(p.norm() < 1.0)) {
            return Err(Error::InvalidInput("poles must lie strictly inside the unit disk".into()));
        }
        if zeros.len() >= poles.len().max(1) {
            return Err(Error::InvalidInput("need fewer zeros than poles".into()));
        }
        let den = poly_from_roots(&poles);
        let mut num = vec![0.0];
        num.extend(poly_from_roots(&zeros).into_iter().map(|b| gain * b));
        Ok(Self { num, den, poles, zeros })
    }

    /// System given directly by its coefficients; `den[0]` must be 1.
    pub fn from_coeffs(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if den.first() != Some(&1.0) || num.is_empty() {
            return Err(Error::InvalidInput("denominator must start with 1".into()));
        }
        Ok(Self { num, den, poles: Vec::new(), zeros: Vec::new() })
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    /// `g(0), …, g(len − 1)` from `g(k) = b_k − Σ_j a_j g(k − j)`.
    pub fn impulse(&self, len: usize) -> Vec<f64> {
        let mut g = vec![0.0; len];
        for k in 0..len {
            let mut v = self.num.get(k).copied().unwrap_or(0.0);
            for (j, &a) in self.den.iter().enumerate().skip(1).take(k) {
                v -= a * g[k - j];
            }
            g[k] = v;
        }
        g
    }

    fn scale(&mut self, factor: f64) {
        for b in &mut self.num {
            *b *= factor;
        }
    }
}

/// Conjugate-closed set of `count` roots with moduli uniform in `range`.
///
/// The number of real roots has the parity of `count` and is otherwise drawn
/// uniformly, so a 10th-order system has 0, 2, …, 10 real poles.
fn random_roots(rng: &mut ChaCha8Rng, count: usize, range: (f64, f64)) -> Vec<Complex64> {
    let pairs_max = count / 2;
    let pairs = rng.random_range(0..=pairs_max);
    let n_real = count - 2 * pairs;
    let mut out = Vec::with_capacity(count);
    for _ in 0..n_real {
        let r = rng.random_range(range.0..=range.1);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        out.push(Complex64::new(sign * r, 0.0));
    }
    for _ in 0..pairs {
        let r = rng.random_range(range.0..=range.1);
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let z = Complex64::from_polar(r, theta);
        out.push(z);
        out.push(z.conj());
    }
    out
}

/// Random stable strictly proper system of the given order, normalized to
/// `Σ_k g(k)² = 1` over [`ENERGY_LAGS`] lags. Zeros (`order − 1` of them)
/// are drawn the same way as the poles inside the unit disk.
pub fn generate_random_system(order: usize, pole_modulus_range: (f64, f64), seed: u64) -> Result<LtiSystem> {
    let (lo, hi) = pole_modulus_range;
    if order == 0 || !(0.0 <= lo && lo <= hi && hi < 1.0) {
        return Err(Error::InvalidInput("need order ≥ 1 and 0 ≤ r_min ≤ r_max < 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poles = random_roots(&mut rng, order, pole_modulus_range);
    let zeros = random_roots(&mut rng, order - 1, (0.0, 0.95));
    let mut sys = LtiSystem::from_poles_zeros(poles, zeros, 1.0)?;
    let energy: f64 = sys.impulse(ENERGY_LAGS).iter().map(|g| g * g).sum();
    sys.scale(1.0 / energy.sqrt());
    Ok(sys)
}

/// Simulated data on the grid `t = 1, …, N`.
#[derive(Debug, Clone)]
pub struct SimData {
    pub y: Vec<f64>,
    /// Noise-free output.
    pub clean: Vec<f64>,
    /// True impulse response `g⁰(1), …, g⁰(N)`.
    pub g0: Vec<f64>,
    pub noise_std: f64,
}

/// `y(t) = Σ_{k=0}^{t} g(k) u(t − k) + ε(t)` for `t = 1..N`, with Gaussian
/// noise of variance `var(clean) / snr`. An infinite `snr` gives noise-free data.
pub fn simulate(system: &LtiSystem, input: &InputSignal, n: usize, snr: f64, seed: u64) -> Result<SimData> {
    if !(snr > 0.0) {
        return Err(Error::InvalidInput("snr must be positive".into()));
    }
    let g = system.impulse(n + 1);
    let u: Vec<f64> = (0..=n as i64).map(|k| input.sample(k)).collect();
    let clean: Vec<f64> = (1..=n).map(|t| (0..=t).map(|k| g[k] * u[t - k]).sum()).collect();
    let mean = clean.iter().sum::<f64>() / n as f64;
    let var = clean.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let noise_std = if snr.is_infinite() { 0.0 } else { (var / snr).sqrt() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std).expect("finite positive std");
        clean.iter().map(|c| c + normal.sample(&mut rng)).collect()
    } else {
        clean.clone()
    };
    Ok(SimData { y, clean, g0: g[1..].to_vec(), noise_std })
}
