//! Hyper-parameter selection criteria computed from `α̂ = M⁻¹y`, `ŷ = Ψα̂`,
//! `log det M` and `tr(M⁻¹)` with `M = Ψ + γI`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Selection objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criterion {
    /// Empirical Bayes: `yᵀM⁻¹y + log det M`.
    Eb,
    /// Stein's unbiased risk: `‖y − ŷ‖² + 2γ tr(H)`.
    Sure,
    /// Generalized cross validation: `N²‖y − ŷ‖² / (γ tr M⁻¹)²`.
    Gcv,
    /// Generalized maximum likelihood: `N ln(yᵀM⁻¹y) + log det M − N ln N`.
    Gml,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Eb, Criterion::Sure, Criterion::Gcv, Criterion::Gml];
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Eb => "EB",
            Criterion::Sure => "SURE",
            Criterion::Gcv => "GCV",
            Criterion::Gml => "GML",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "EB" => Ok(Criterion::Eb),
            "SURE" => Ok(Criterion::Sure),
            "GCV" => Ok(Criterion::Gcv),
            "GML" => Ok(Criterion::Gml),
            _ => Err(Error::InvalidInput(format!("unknown criterion {s:?}"))),
        }
    }
}

/// All four criteria plus the quantities they are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub eb: f64,
    pub sure: f64,
    pub gcv: f64,
    pub gml: f64,
    pub alpha_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub logdet: f64,
    pub tr_minv: f64,
    pub y_minv_y: f64,
    pub gamma: f64,
}

impl CriterionReport {
    pub fn from_parts(y: &[f64], alpha_hat: Vec<f64>, y_hat: Vec<f64>, logdet: f64, tr_minv: f64, gamma: f64) -> Self {
        let n = y.len() as f64;
        let rss: f64 = y.iter().zip(&y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
        let y_minv_y: f64 = y.iter().zip(&alpha_hat).map(|(a, b)| a * b).sum();
        let g_tr = gamma * tr_minv;
        Self {
            eb: y_minv_y + logdet,
            sure: rss + 2.0 * gamma * (n - g_tr),
            gcv: n * n * rss / (g_tr * g_tr),
            gml: n * y_minv_y.ln() + logdet - n * n.ln(),
            alpha_hat,
            y_hat,
            logdet,
            tr_minv,
            y_minv_y,
            gamma,
        }
    }

    pub fn value(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Eb => self.eb,
            Criterion::Sure => self.sure,
            Criterion::Gcv => self.gcv,
            Criterion::Gml => self.gml,
        }
    }

    /// `tr(H) = N − γ tr(M⁻¹)` for the hat matrix `H = ΨM⁻¹`.
    pub fn trace_hat(&self) -> f64 {
        self.alpha_hat.len() as f64 - self.gamma * self.tr_minv
    }

    pub fn is_finite(&self) -> bool {
        [self.eb, self.sure, self.gcv, self.gml].iter().all(|x| x.is_finite())
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report is serializable")
    }
}
