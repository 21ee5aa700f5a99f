//! Closed-form analysis of a uniform linear array steered with phase shifters.
//!
//! With `s = (d/λ₀)·sin θ₀`, the per-element group delay is `s` carrier cycles.
//! Phase shifters cancel the carrier phase `2π·s` per element but leave the
//! delay, so a frequency offset `δ = f/f_o − 1` sees a residual progressive
//! phase `2π·s·δ` and the array response at the steer angle is
//! `|sin(Nπsδ) / (N sin(πsδ))|`.
//!
//! The 3 dB point of that response sits where `Nπsδ ≈ 1.3916` (half-power
//! argument of `sin x / x`); with `d = λ₀/2` this gives the familiar
//! `BW_c ≈ 1.77 / (N sin θ₀)`. The rounded constant 1.77 is used throughout
//! (the exact value is about 1.7718).

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

/// Coherent-bandwidth constant for half-wavelength spacing.
pub const COHERENT_BW_CONSTANT: f64 = 1.77;

const SINGULAR_EPS: f64 = 1e-12;
const BROADSIDE_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_elements: usize,
    /// Element spacing as a fraction of the center wavelength (d/λ₀).
    pub spacing_ratio: f64,
    /// Steering angle from broadside, radians.
    pub steer_angle: f64,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing_ratio: f64, steer_angle: f64) -> Result<Self> {
        let cfg = ArrayConfig {
            n_elements,
            spacing_ratio,
            steer_angle,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Half-wavelength array steered to `theta_deg` degrees.
    pub fn half_wave(n_elements: usize, theta_deg: f64) -> Result<Self> {
        Self::new(n_elements, 0.5, theta_deg.to_radians())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::InvalidConfig("n_elements must be at least 1".into()));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "spacing_ratio must be in (0, 1], got {}",
                self.spacing_ratio
            )));
        }
        if !self.steer_angle.is_finite() || self.steer_angle.abs() >= PI / 2.0 {
            return Err(Error::InvalidConfig(format!(
                "steer_angle must be in (-π/2, π/2), got {}",
                self.steer_angle
            )));
        }
        Ok(())
    }

    /// Spacing above half a wavelength admits grating lobes.
    pub fn grating_lobe_risk(&self) -> bool {
        self.spacing_ratio > 0.5
    }

    /// Per-element group delay in carrier cycles, `(d/λ₀)·sin θ₀`. Signed.
    pub fn delay_step(&self) -> f64 {
        self.spacing_ratio * self.steer_angle.sin()
    }

    /// Progressive phase-shifter step `2π(d/λ₀)sin θ₀`, radians.
    pub fn phase_step(&self) -> f64 {
        2.0 * PI * self.delay_step()
    }

    pub fn is_broadside(&self) -> bool {
        self.steer_angle.sin().abs() < BROADSIDE_EPS
    }

    fn squint_scale(&self) -> Result<f64> {
        if self.is_broadside() {
            return Err(Error::DegenerateSteer);
        }
        Ok(self.delay_step().abs())
    }
}

/// `|sin(N x) / (N sin x)|`, with the removable singularity at `x = kπ`.
fn dirichlet(n: usize, x: f64) -> f64 {
    // |sin(N(x+kπ))| = |sin(Nx)| and |sin(x+kπ)| = |sin x|, so reduce first.
    let r = x - (x / PI).round() * PI;
    if r.abs() < SINGULAR_EPS {
        return 1.0;
    }
    let nf = n as f64;
    ((nf * r).sin() / (nf * r.sin())).abs().min(1.0)
}

/// Normalized space-factor magnitude `|SF_n(θ, f)|` of the steered array.
///
/// `f_ratio` is `f/f_o`. Closed form; see [`space_factor_sum`] for the direct
/// element sum.
pub fn space_factor(cfg: &ArrayConfig, theta: f64, f_ratio: f64) -> f64 {
    let x = PI * cfg.spacing_ratio * (f_ratio * theta.sin() - cfg.steer_angle.sin());
    dirichlet(cfg.n_elements, x)
}

/// `|SF_n|` evaluated as the explicit sum of `N` unit phasors.
pub fn space_factor_sum(cfg: &ArrayConfig, theta: f64, f_ratio: f64) -> f64 {
    let step = 2.0 * PI * cfg.spacing_ratio * (f_ratio * theta.sin() - cfg.steer_angle.sin());
    let (mut re, mut im) = (0.0, 0.0);
    for n in 0..cfg.n_elements {
        let (s, c) = (step * n as f64).sin_cos();
        re += c;
        im += s;
    }
    re.hypot(im) / cfg.n_elements as f64
}

/// `|SF_n(θ₀, f)|` in the reduced form that assumes `d = λ₀/2`.
pub fn space_factor_at_steer(cfg: &ArrayConfig, f_ratio: f64) -> Result<f64> {
    if (cfg.spacing_ratio - 0.5).abs() > 1e-12 {
        return Err(Error::SpacingAssumption(cfg.spacing_ratio));
    }
    let x = PI / 2.0 * cfg.steer_angle.sin() * (f_ratio - 1.0);
    Ok(dirichlet(cfg.n_elements, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthMode {
    /// `1.77 / (N sin θ₀)`, scaled by `0.5 / (d/λ₀)` for other spacings.
    Approx,
    /// Bisection of the direct element sum for the 1/√2 point.
    Numeric,
}

/// Fractional 3 dB coherent bandwidth at the steer angle.
pub fn coherent_bandwidth(cfg: &ArrayConfig, mode: BandwidthMode) -> Result<f64> {
    let s = cfg.squint_scale()?;
    let n = cfg.n_elements as f64;
    match mode {
        BandwidthMode::Approx => Ok(COHERENT_BW_CONSTANT * 0.5 / (n * s)),
        BandwidthMode::Numeric => {
            if cfg.n_elements < 2 {
                return Err(Error::InvalidConfig(
                    "numeric coherent bandwidth needs at least 2 elements".into(),
                ));
            }
            // |SF| falls monotonically from 1 to its first null at δ = 1/(N s).
            let response = |delta: f64| space_factor_sum(cfg, cfg.steer_angle, 1.0 + delta);
            let (mut lo, mut hi) = (0.0, 1.0 / (n * s));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if response(mid) > FRAC_1_SQRT_2 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            Ok(lo + hi)
        }
    }
}

/// Closest nulls of the steer-angle response, as `(f_low/f_o, f_high/f_o)`.
pub fn null_fractions(cfg: &ArrayConfig) -> Result<(f64, f64)> {
    let s = cfg.squint_scale()?;
    if cfg.n_elements < 2 {
        return Err(Error::InvalidConfig("a single element has no nulls".into()));
    }
    let offset = 1.0 / (cfg.n_elements as f64 * s);
    Ok((1.0 - offset, 1.0 + offset))
}

/// Upper bound on signal fractional bandwidth that keeps the symbol period
/// above the array's delay spread: `2 / (N sin θ₀)` at half-wave spacing.
pub fn isi_bandwidth_limit(cfg: &ArrayConfig) -> Result<f64> {
    let s = cfg.squint_scale()?;
    Ok(1.0 / (cfg.n_elements as f64 * s))
}

/// `T_spread-max · f_o = N·(d/λ₀)·|sin θ₀|`, carrier cycles.
pub fn max_delay_spread(cfg: &ArrayConfig) -> f64 {
    cfg.n_elements as f64 * cfg.delay_step().abs()
}

/// Deep-fade and 3 dB tone predictions for an OFDM signal centered at `M/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneBounds {
    pub null_low: f64,
    pub null_high: f64,
    /// Nearest tone index of `null_low`, absent when outside `[0, M)`.
    pub null_low_tone: Option<usize>,
    pub null_high_tone: Option<usize>,
    /// Number of tones around the center within the 3 dB coherent bandwidth.
    pub tones_3db: f64,
}

pub fn ofdm_tone_bounds(cfg: &ArrayConfig, m_carriers: usize, bw_sig: f64) -> Result<ToneBounds> {
    let s = cfg.squint_scale()?;
    if !(bw_sig > 0.0) || m_carriers == 0 {
        return Err(Error::InvalidConfig(
            "tone bounds need bw_sig > 0 and at least one carrier".into(),
        ));
    }
    let m = m_carriers as f64;
    let null_offset = 1.0 / (cfg.n_elements as f64 * s * bw_sig);
    let null_low = m * (0.5 - null_offset);
    let null_high = m * (0.5 + null_offset);
    let to_tone = |x: f64| {
        let r = x.round();
        (r >= 0.0 && r < m).then_some(r as usize)
    };
    let bw_c = coherent_bandwidth(cfg, BandwidthMode::Approx)?;
    Ok(ToneBounds {
        null_low,
        null_high,
        null_low_tone: to_tone(null_low),
        null_high_tone: to_tone(null_high),
        tones_3db: m * bw_c / bw_sig,
    })
}

/// Reduced spatial-IDFT dimensions.
///
/// Sub-arrays of `n_sub` (N_o) contiguous elements are pre-combined into
/// `n_groups` (N_r) streams; each of the `m_groups` (M_r) IDFT outputs serves
/// `m_group` (M_o) contiguous tones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedSizing {
    pub n_sub: usize,
    pub m_group: usize,
    pub n_groups: usize,
    pub m_groups: usize,
}

impl ReducedSizing {
    pub fn new(n_elements: usize, m_carriers: usize, n_sub: usize, m_group: usize) -> Result<Self> {
        if n_sub == 0 || m_group == 0 || n_elements % n_sub != 0 || m_carriers % m_group != 0 {
            return Err(Error::IndivisibleSizing(format!(
                "N_o = {n_sub} must divide N = {n_elements} and M_o = {m_group} must divide M = {m_carriers}"
            )));
        }
        Ok(ReducedSizing {
            n_sub,
            m_group,
            n_groups: n_elements / n_sub,
            m_groups: m_carriers / m_group,
        })
    }
}

/// Smallest divisor sizing with `N_r, M_r > N·BW_sig·sin θ₀ / 1.77`.
///
/// The bound is `BW_sig / BW_c`; at broadside it is zero and the trivial
/// sizing (one sub-array, one tone group) is returned.
pub fn reduced_sizing(cfg: &ArrayConfig, m_carriers: usize, bw_sig: f64) -> Result<ReducedSizing> {
    if !(bw_sig > 0.0) || m_carriers == 0 {
        return Err(Error::InvalidConfig(
            "sizing needs bw_sig > 0 and at least one carrier".into(),
        ));
    }
    let n = cfg.n_elements;
    let bound = n as f64 * bw_sig * cfg.delay_step().abs() * 2.0 / COHERENT_BW_CONSTANT;
    let smallest_divisor_above = |total: usize| (1..=total).find(|d| total % d == 0 && *d as f64 > bound);
    let n_groups = smallest_divisor_above(n)
        .ok_or_else(|| Error::Infeasible(format!("no divisor of N = {n} exceeds {bound:.3}")))?;
    let m_groups = smallest_divisor_above(m_carriers).ok_or_else(|| {
        Error::Infeasible(format!("no divisor of M = {m_carriers} exceeds {bound:.3}"))
    })?;
    ReducedSizing::new(n, m_carriers, n / n_groups, m_carriers / m_groups)
}

/// Overall EVM (dB) from output SNR and SSIR (dB): `EVM² = SNR⁻² + SSIR⁻²`
/// with amplitude ratios. `+∞` disables a term.
pub fn combine_evm(snr_db: f64, ssir_db: f64) -> f64 {
    let power = |db: f64| 10f64.powf(-db / 10.0);
    let total = power(snr_db) + power(ssir_db);
    (10.0 * total.log10()).max(crate::dsp::EVM_FLOOR_DB)
}

/// SSIR referred to a single channel input: `SSIR − 10 log N`.
pub fn input_referred_ssir(ssir_db: f64, cfg: &ArrayConfig) -> f64 {
    ssir_db - 10.0 * (cfg.n_elements as f64).log10()
}

/// Summary of every closed-form prediction for one array / signal pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub coherent_bw: f64,
    pub null_fractions: (f64, f64),
    pub isi_bw_limit: f64,
    /// Carrier cycles.
    pub max_delay_spread: f64,
    pub eirp_gain_db: f64,
    pub rx_snr_gain_db: f64,
    pub tone_bounds: Option<ToneBounds>,
    pub reduced_sizing: Option<ReducedSizing>,
}

impl AnalyticReport {
    /// Fails with [`Error::DegenerateSteer`] at broadside.
    pub fn compute(cfg: &ArrayConfig, bw_sig: f64, m_carriers: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_elements as f64;
        let coherent_bw = coherent_bandwidth(cfg, BandwidthMode::Approx)?;
        let null_fractions = if cfg.n_elements >= 2 {
            null_fractions(cfg)?
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        let (tone_bounds, reduced) = match m_carriers {
            Some(m) => (
                Some(ofdm_tone_bounds(cfg, m, bw_sig)?),
                Some(reduced_sizing(cfg, m, bw_sig)?),
            ),
            None => (None, None),
        };
        Ok(AnalyticReport {
            coherent_bw,
            null_fractions,
            isi_bw_limit: isi_bandwidth_limit(cfg)?,
            max_delay_spread: max_delay_spread(cfg),
            eirp_gain_db: 20.0 * n.log10(),
            rx_snr_gain_db: 10.0 * n.log10(),
            tone_bounds,
            reduced_sizing: reduced,
        })
    }
}
