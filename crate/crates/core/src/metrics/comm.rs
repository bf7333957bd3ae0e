use crate::error::{JcrError, Result};

/// Power allocation from water-filling.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    /// Per-subchannel power coefficients with mean 1.
    pub allocation: Vec<f64>,
    /// Common level `w` with `xi_n = max(0, w - 1/g_n)`.
    pub water_level: f64,
}

/// Maximizes `sum log2(1 + g_n xi_n)` subject to `mean(xi) = 1`, `xi >= 0`.
pub fn waterfill(gains: &[f64]) -> Result<WaterFill> {
    if gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(JcrError::InvalidArgument("gains must be finite and non-negative".into()));
    }
    let n = gains.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return Err(JcrError::AllZeroGains);
    }
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));

    // Grow the active set from the strongest subchannel while the level
    // stays above the next inverse gain.
    let budget = n as f64;
    let mut inv_sum = 0.0;
    let mut level = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        let inv = 1.0 / gains[idx];
        let candidate = (budget + inv_sum + inv) / (i + 1) as f64;
        if i > 0 && candidate <= inv {
            break;
        }
        inv_sum += inv;
        level = candidate;
    }
    let allocation = gains.iter().map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 }).collect();
    Ok(WaterFill { allocation, water_level: level })
}

/// `r = (1/N) sum log2(1 + snr lambda_n xi_n)` and the per-subchannel terms.
pub fn spectral_efficiency(snr: f64, eigenvalues: &[f64], allocation: &[f64]) -> (f64, Vec<f64>) {
    let per: Vec<f64> = eigenvalues.iter().zip(allocation).map(|(l, x)| (snr * l * x).ln_1p() / std::f64::consts::LN_2).collect();
    let r = per.iter().sum::<f64>() / per.len().max(1) as f64;
    (r, per)
}

/// `(phi_c, dmmse_db)` from the per-subchannel rates.
///
/// MMSE entries are `2^(-r_i)`, DMMSE entries `MMSE^mu`, and
/// `phi_c = mean log2 DMMSE`.
pub fn dmmse_scalar(mu: f64, rates: &[f64]) -> (f64, f64) {
    let n = rates.len().max(1) as f64;
    let phi_c = rates.iter().map(|r| (-r).exp2().powf(mu).log2()).sum::<f64>() / n;
    (phi_c, 10.0 * std::f64::consts::LOG10_2 * phi_c)
}

/// Communication metrics at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct CommMetrics {
    /// Spectral efficiency in bits/s/Hz.
    pub r: f64,
    /// `mu * r`.
    pub r_eff: f64,
    pub allocation: Vec<f64>,
    pub rates: Vec<f64>,
    /// Mean log2 of the DMMSE diagonal, in bits.
    pub phi_c: f64,
    pub dmmse_db: f64,
}

impl CommMetrics {
    pub fn evaluate(snr: f64, eigenvalues: &[f64], mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(JcrError::InvalidArgument(format!("data fraction must lie in [0, 1], got {mu}")));
        }
        let gains: Vec<f64> = eigenvalues.iter().map(|l| snr * l).collect();
        let wf = waterfill(&gains)?;
        let (r, rates) = spectral_efficiency(snr, eigenvalues, &wf.allocation);
        let (phi_c, dmmse_db) = dmmse_scalar(mu, &rates);
        Ok(Self { r, r_eff: mu * r, allocation: wf.allocation, rates, phi_c, dmmse_db })
    }
}
