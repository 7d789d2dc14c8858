use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Side;

/// Measured rates of one side's setting reader, port order `(1, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideRates {
    /// Total click rates `r_i`, Hz.
    pub total_hz: [f64; 2],
    pub total_sigma_hz: [f64; 2],
    /// Rates with the telescope shuttered, `n_i`, Hz.
    pub noise_hz: [f64; 2],
    pub noise_sigma_hz: [f64; 2],
    /// `(f_1→2, f_2→1)`: probability that a photon of the color assigned to
    /// one port is routed to the other.
    pub wrong_way: [f64; 2],
    /// Relative 1σ uncertainty of each wrong-way fraction.
    #[serde(default = "default_wrong_way_rel_sigma")]
    pub wrong_way_rel_sigma: f64,
    /// Integration times behind the total and noise rates, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_duration_s: Option<f64>,
}

fn default_wrong_way_rel_sigma() -> f64 {
    0.1
}

impl SideRates {
    pub fn validate(&self, side: Side) -> Result<()> {
        let all = self
            .total_hz
            .iter()
            .chain(&self.total_sigma_hz)
            .chain(&self.noise_hz)
            .chain(&self.noise_sigma_hz)
            .chain(&self.wrong_way);
        let bad = |m: &str| Err(Error::InvalidInput(format!("side {} rates: {m}", side.label())));
        if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("values must be finite and non-negative");
        }
        if self.total_hz.iter().any(|r| *r <= 0.0) {
            return bad("total rates must be positive");
        }
        if (0..2).any(|i| self.noise_hz[i] > self.total_hz[i]) {
            return bad("noise rate exceeds total rate");
        }
        if self.wrong_way.iter().any(|f| *f > 1.0) || !(self.wrong_way_rel_sigma >= 0.0) {
            return bad("wrong-way fractions must lie in [0, 1]");
        }
        Ok(())
    }

    /// Counting-statistics uncertainties `(σ_r, σ_n)` implied by the recorded
    /// durations, if both are present.
    pub fn poisson_sigmas(&self) -> Option<([f64; 2], [f64; 2])> {
        let (dr, dn) = (self.total_duration_s?, self.noise_duration_s?);
        Some((
            self.total_hz.map(|r| poisson_sigma(r, dr)),
            self.noise_hz.map(|n| poisson_sigma(n, dn)),
        ))
    }

    /// `f_{i'→i}`: fraction of the other port's photons arriving at port `i`.
    pub fn wrong_way_into(&self, port: usize) -> f64 {
        self.wrong_way[1 - port]
    }
}

/// Counting-statistics error convention: `ceil(sqrt(r / Δt))`.
pub fn poisson_sigma(rate_hz: f64, duration_s: f64) -> f64 {
    (rate_hz / duration_s).sqrt().ceil()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBudget {
    pub a: SideRates,
    pub b: SideRates,
}

impl RateBudget {
    pub fn side(&self, side: Side) -> &SideRates {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StellarRates {
    /// Per-port stellar rates `s_i`.
    pub per_port_hz: [f64; 2],
    /// `s = Σ (r_i - n_i)`, independent of the wrong-way fractions.
    pub total_hz: f64,
}

/// Invert `r_i = (1 - f_{i→i'}) s_i + f_{i'→i} s_{i'} + n_i` for one side.
pub fn stellar_rates(rates: &SideRates, side: Side) -> Result<StellarRates> {
    let [f12, f21] = rates.wrong_way;
    let det = 1.0 - f12 - f21;
    if det.abs() < 1e-15 {
        return Err(Error::SingularSystem(side.label()));
    }
    let y1 = rates.total_hz[0] - rates.noise_hz[0];
    let y2 = rates.total_hz[1] - rates.noise_hz[1];
    let s1 = ((1.0 - f21) * y1 - f21 * y2) / det;
    let s2 = ((1.0 - f12) * y2 - f12 * y1) / det;
    for (port, s) in [s1, s2].into_iter().enumerate() {
        if s < 0.0 {
            return Err(Error::NegativeStellarRate {
                side: side.label(),
                port: port + 1,
                rate: s,
            });
        }
    }
    Ok(StellarRates {
        per_port_hz: [s1, s2],
        total_hz: y1 + y2,
    })
}

/// Excess predictabilities with propagated 1σ uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityTable {
    pub s_a_hz: f64,
    pub s_b_hz: f64,
    pub eps_a: [f64; 2],
    pub sigma_eps_a: [f64; 2],
    pub eps_b: [f64; 2],
    pub sigma_eps_b: [f64; 2],
    /// `ε_a_i + ε_b_j`, clamped to 1, cell order `11, 12, 21, 22`.
    pub eps_ij: [f64; 4],
    pub sigma_eps_ij: [f64; 4],
    /// Largest cell predictability.
    pub eps: f64,
    pub sigma_eps: f64,
    /// `Σ ε_ij / (1 - ε_ij)`.
    pub eps_bar: f64,
}

fn side_epsilon(r: &SideRates) -> ([f64; 2], [f64; 2], f64) {
    let s = r.total_hz[0] + r.total_hz[1] - r.noise_hz[0] - r.noise_hz[1];
    let mut eps = [0.0; 2];
    let mut sigma = [0.0; 2];
    for i in 0..2 {
        let j = 1 - i;
        let f = r.wrong_way_into(i);
        let sf = r.wrong_way_rel_sigma * f;
        let (ri, ni, rj, nj) = (r.total_hz[i], r.noise_hz[i], r.total_hz[j], r.noise_hz[j]);
        eps[i] = (ni + f * s) / ri;
        // first-order propagation in r_i, r_j, n_i, n_j, f
        let d_ri = -(ni * (1.0 - f) + f * (rj - nj)) / (ri * ri);
        let d_ni = (1.0 - f) / ri;
        let d_rj = f / ri;
        let d_nj = -f / ri;
        let d_f = s / ri;
        sigma[i] = ((d_ri * r.total_sigma_hz[i]).powi(2)
            + (d_ni * r.noise_sigma_hz[i]).powi(2)
            + (d_rj * r.total_sigma_hz[j]).powi(2)
            + (d_nj * r.noise_sigma_hz[j]).powi(2)
            + (d_f * sf).powi(2))
        .sqrt();
    }
    (eps, sigma, s)
}

fn argmax2(v: [f64; 2]) -> usize {
    usize::from(v[1] > v[0])
}

pub fn predictability(budget: &RateBudget) -> Result<PredictabilityTable> {
    budget.a.validate(Side::A)?;
    budget.b.validate(Side::B)?;
    let (eps_a, sigma_eps_a, s_a) = side_epsilon(&budget.a);
    let (eps_b, sigma_eps_b, s_b) = side_epsilon(&budget.b);
    let mut eps_ij = [0.0; 4];
    let mut sigma_eps_ij = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            eps_ij[2 * i + j] = (eps_a[i] + eps_b[j]).min(1.0);
            sigma_eps_ij[2 * i + j] = sigma_eps_a[i].hypot(sigma_eps_b[j]);
        }
    }
    let (ia, jb) = (argmax2(eps_a), argmax2(eps_b));
    let eps_bar = eps_ij.iter().map(|e| e / (1.0 - e)).sum();
    Ok(PredictabilityTable {
        s_a_hz: s_a,
        s_b_hz: s_b,
        eps_a,
        sigma_eps_a,
        eps_b,
        sigma_eps_b,
        eps_ij,
        sigma_eps_ij,
        eps: (eps_a[ia] + eps_b[jb]).min(1.0),
        sigma_eps: sigma_eps_a[ia].hypot(sigma_eps_b[jb]),
        eps_bar,
    })
}
