//! Flat `key = value` configuration with command-line overrides.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use gvr_core::criteria::Criterion;
use gvr_core::kernels::InputSignal;
use gvr_core::sysid::{KernelFamily, Method};

/// Input variant of the experiments: `S1` is the unit impulse, `S2` the
/// exponential `e^{−αt}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputVariant {
    S1,
    S2,
}

impl FromStr for InputVariant {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(InputVariant::S1),
            "S2" => Ok(InputVariant::S2),
            _ => bail!("unknown input {s:?} (expected S1 or S2)"),
        }
    }
}

/// All experiment settings. Defaults follow the paper's experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub input: InputVariant,
    pub alpha: f64,
    pub rho: f64,
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    pub methods: Vec<Method>,
    pub snr: f64,
    pub order: usize,
    pub pole_min: f64,
    pub pole_max: f64,
    pub family: KernelFamily,
    pub criterion: Criterion,
    pub sizes: Vec<usize>,
    pub repeats: usize,
    /// Criterion evaluations timed per repeat.
    pub evals: usize,
    /// Evaluations per repeat for the dense reference, which is O(N³).
    pub ref_evals: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 1,
            threads: 0,
            n: None,
            trials: None,
            input: InputVariant::S1,
            alpha: 0.5,
            rho: 0.6,
            gamma: 1e-4,
            lambdas: (2..=9).map(|k| k as f64 / 10.0).collect(),
            methods: Method::ALL.to_vec(),
            snr: 10.0,
            order: 10,
            pole_min: 0.1,
            pole_max: 0.9,
            family: KernelFamily::Dc,
            criterion: Criterion::Gcv,
            sizes: vec![300, 600, 1200, 2400, 4800],
            repeats: 10,
            evals: 200,
            ref_evals: 1,
        }
    }
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow!("{s:?}: {e}")))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl Settings {
    pub fn input_signal(&self) -> InputSignal {
        match self.input {
            InputVariant::S1 => InputSignal::UnitImpulse,
            InputVariant::S2 => InputSignal::exponential_dt(self.alpha),
        }
    }

    /// Sets one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let ctx = || format!("bad value for {key}: {v:?}");
        match key.trim() {
            "seed" => self.seed = v.parse().with_context(ctx)?,
            "threads" => self.threads = v.parse().with_context(ctx)?,
            "n" => self.n = Some(v.parse().with_context(ctx)?),
            "trials" => self.trials = Some(v.parse().with_context(ctx)?),
            "input" => self.input = v.parse().with_context(ctx)?,
            "alpha" => self.alpha = v.parse().with_context(ctx)?,
            "rho" => self.rho = v.parse().with_context(ctx)?,
            "gamma" => self.gamma = v.parse().with_context(ctx)?,
            "lambdas" => self.lambdas = list(v).with_context(ctx)?,
            "methods" => self.methods = list(v).with_context(ctx)?,
            "snr" => self.snr = v.parse().with_context(ctx)?,
            "order" => self.order = v.parse().with_context(ctx)?,
            "pole_min" => self.pole_min = v.parse().with_context(ctx)?,
            "pole_max" => self.pole_max = v.parse().with_context(ctx)?,
            "family" => {
                self.family = match v.to_ascii_uppercase().as_str() {
                    "DC" => KernelFamily::Dc,
                    "TC" => KernelFamily::Tc,
                    "SS" => KernelFamily::Ss,
                    _ => bail!("unknown kernel family {v:?}"),
                }
            }
            "criterion" => self.criterion = v.parse().with_context(ctx)?,
            "sizes" => self.sizes = list(v).with_context(ctx)?,
            "repeats" => self.repeats = v.parse().with_context(ctx)?,
            "evals" => self.evals = v.parse().with_context(ctx)?,
            "ref_evals" => self.ref_evals = v.parse().with_context(ctx)?,
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Applies a config file. Blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            self.set(k, v).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_str(&text)
    }

    /// `# key=value` lines recording every setting that shapes the output.
    /// `threads` is left out because it never changes the results.
    pub fn provenance(&self, command: &str, n: usize, trials: usize) -> String {
        let family = match self.family {
            KernelFamily::Dc => "DC",
            KernelFamily::Tc => "TC",
            KernelFamily::Ss => "SS",
        };
        let input = match self.input {
            InputVariant::S1 => "S1",
            InputVariant::S2 => "S2",
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "# {k}={v}");
        };
        kv("command", command.to_string());
        kv("seed", self.seed.to_string());
        kv("n", n.to_string());
        kv("trials", trials.to_string());
        kv("input", input.to_string());
        kv("alpha", self.alpha.to_string());
        kv("rho", self.rho.to_string());
        kv("gamma", self.gamma.to_string());
        kv("lambdas", join(&self.lambdas));
        kv("methods", join(&self.methods));
        kv("snr", self.snr.to_string());
        kv("snr_definition", "var(noise-free output)/noise variance".to_string());
        kv("order", self.order.to_string());
        kv("pole_moduli", format!("{},{}", self.pole_min, self.pole_max));
        kv("family", family.to_string());
        kv("criterion", self.criterion.to_string());
        kv("sizes", join(&self.sizes));
        kv("repeats", self.repeats.to_string());
        kv("evals", self.evals.to_string());
        kv("ref_evals", self.ref_evals.to_string());
        out
    }
}
