//! Covering-number and generalization bounds for variational circuits.
//!
//! Covering numbers overflow any float for realistic circuits (exponents in
//! the hundreds on bases in the thousands), so every covering bound is
//! returned as its natural logarithm.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::GateCounts;
use crate::error::{Error, Result};

/// Symbols shared by the covering and generalization bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    /// Trainable gates.
    pub n_gt: usize,
    /// All gates.
    pub n_g: usize,
    /// Local dimension of each qudit.
    pub d: u32,
    /// Largest number of qudits a gate acts on.
    pub k: u32,
    /// Operator norm of the observable.
    pub norm_o: f64,
    pub epsilon: f64,
    /// Per-gate depolarizing rate.
    pub p: f64,
    /// Sample count.
    pub n: usize,
    pub l1: f64,
    pub c1: f64,
    pub delta: f64,
    /// Skips the `0 < ε < 1/10` check for exploratory sweeps.
    #[serde(default)]
    pub allow_any_epsilon: bool,
}

impl Default for BoundInput {
    fn default() -> Self {
        Self {
            n_gt: 1,
            n_g: 1,
            d: 2,
            k: 1,
            norm_o: 1.0,
            epsilon: 0.1 - 1e-12,
            p: 0.0,
            n: 1,
            l1: 2.0,
            c1: 1.0,
            delta: 0.05,
            allow_any_epsilon: false,
        }
    }
}

impl BoundInput {
    /// Fills the circuit-derived fields from gate counts. `k` is taken from
    /// the widest trainable gate, since only trainable gates are covered.
    pub fn from_counts(counts: GateCounts, norm_o: f64, epsilon: f64) -> Self {
        Self {
            n_gt: counts.n_gt,
            n_g: counts.n_g,
            k: counts.k_trainable.max(1) as u32,
            norm_o,
            epsilon,
            ..Self::default()
        }
    }

    fn check_covering(&self) -> Result<()> {
        if !self.allow_any_epsilon && !(self.epsilon > 0.0 && self.epsilon < 0.1) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !(self.norm_o > 0.0) || !self.norm_o.is_finite() {
            return Err(Error::InvalidArgument(format!("‖O‖ must be positive, got {}", self.norm_o)));
        }
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!("qudit dimension must be ≥ 2, got {}", self.d)));
        }
        if self.k < 1 {
            return Err(Error::InvalidArgument("k must be ≥ 1".into()));
        }
        if self.n_gt > self.n_g {
            return Err(Error::InvalidArgument(format!(
                "N_gt = {} exceeds N_g = {}",
                self.n_gt, self.n_g
            )));
        }
        Ok(())
    }

    fn check_noise(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::NoiseOutOfRange(self.p));
        }
        Ok(())
    }

    /// d^{2k}
    fn unitary_dim_sq(&self) -> f64 {
        (self.d as f64).powi(2 * self.k as i32)
    }
}

/// Which formula produced a [`LogBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    Ideal,
    NoisyGeneral,
    Depolarizing,
    HardwareEfficient,
    HardwareEfficientDepolarizing,
    Mps,
    MpsDepolarizing,
    Tree,
    TreeDepolarizing,
    Uccsd,
    UccsdDepolarizing,
}

impl FormulaId {
    pub fn name(self) -> &'static str {
        match self {
            FormulaId::Ideal => "ideal",
            FormulaId::NoisyGeneral => "noisy_general",
            FormulaId::Depolarizing => "depolarizing",
            FormulaId::HardwareEfficient => "hardware_efficient",
            FormulaId::HardwareEfficientDepolarizing => "hardware_efficient_depolarizing",
            FormulaId::Mps => "mps",
            FormulaId::MpsDepolarizing => "mps_depolarizing",
            FormulaId::Tree => "tree",
            FormulaId::TreeDepolarizing => "tree_depolarizing",
            FormulaId::Uccsd => "uccsd",
            FormulaId::UccsdDepolarizing => "uccsd_depolarizing",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Natural log of a covering-number bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub ln_value: f64,
    pub formula_id: FormulaId,
}

impl LogBound {
    fn new(ln_value: f64, formula_id: FormulaId) -> Result<Self> {
        if !ln_value.is_finite() {
            return Err(Error::InvalidArgument(format!("{formula_id} bound is not finite")));
        }
        Ok(Self { ln_value, formula_id })
    }
}

/// `a · ln(b)` with the convention `0 · ln(0) = 0` (an empty trainable set
/// has a single hypothesis).
fn exponent_times_ln(exponent: f64, base: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * base.ln()
    }
}

/// ln N(H, ε) ≤ d^{2k}·N_gt · ln(7·N_gt·‖O‖/ε).
pub fn ln_covering_ideal(input: &BoundInput) -> Result<LogBound> {
    input.check_covering()?;
    let n_gt = input.n_gt as f64;
    let v = exponent_times_ln(input.unitary_dim_sq() * n_gt, 7.0 * n_gt * input.norm_o / input.epsilon);
    LogBound::new(v, FormulaId::Ideal)
}

/// Any noise channel: ln(2‖O‖) + d^{2k}·N_gt · ln(7·N_gt/ε).
pub fn ln_covering_noisy_general(input: &BoundInput) -> Result<LogBound> {
    input.check_covering()?;
    let n_gt = input.n_gt as f64;
    let v = (2.0 * input.norm_o).ln() + exponent_times_ln(input.unitary_dim_sq() * n_gt, 7.0 * n_gt / input.epsilon);
    LogBound::new(v, FormulaId::NoisyGeneral)
}

/// Per-gate depolarizing noise: N_g·ln(1−p) + the ideal bound.
pub fn ln_covering_depolarizing(input: &BoundInput) -> Result<LogBound> {
    input.check_noise()?;
    let ideal = ln_covering_ideal(input)?;
    let v = input.n_g as f64 * (1.0 - input.p).ln() + ideal.ln_value;
    LogBound::new(v, FormulaId::Depolarizing)
}

/// Ansatz families with closed-form covering bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnsatzFamily {
    HardwareEfficient { n: usize, layers: usize },
    Mps { n: usize },
    Tree { n: usize },
    /// Gate count modelled as N⁵ with unit constant.
    Uccsd { n: usize, k: u32 },
}

impl AnsatzFamily {
    pub fn label(&self) -> String {
        match *self {
            AnsatzFamily::HardwareEfficient { n, layers } => format!("hardware_efficient(N={n},L={layers})"),
            AnsatzFamily::Mps { n } => format!("mps(N={n})"),
            AnsatzFamily::Tree { n } => format!("tree(N={n})"),
            AnsatzFamily::Uccsd { n, k } => format!("uccsd(N={n},k={k})"),
        }
    }

    /// (exponent, base/(‖O‖/ε), noise exponent) of the closed-form bound
    /// `(1−p)^{noise} · (base·‖O‖/ε)^{exponent}`.
    fn closed_form(&self) -> Result<(f64, f64, f64)> {
        match *self {
            AnsatzFamily::HardwareEfficient { n, layers } => {
                if n < 2 || layers < 1 {
                    return Err(Error::InvalidArgument(format!(
                        "hardware-efficient family needs N ≥ 2, L ≥ 1 (got N = {n}, L = {layers})"
                    )));
                }
                let nl = (n * layers) as f64;
                Ok((6.0 * nl, 21.0 * nl, 4.0 * nl))
            }
            AnsatzFamily::Mps { n } => {
                if n < 3 {
                    return Err(Error::InvalidArgument(format!("MPS family needs N ≥ 3, got {n}")));
                }
                let m = n as f64 + 2.0 * (n as f64).sqrt();
                Ok((6.0 * m, 21.0 * m, 4.0 * m))
            }
            AnsatzFamily::Tree { n } => {
                if n < 4 || !n.is_power_of_two() {
                    return Err(Error::InvalidArgument(format!(
                        "tree family needs a power-of-two N ≥ 4, got {n}"
                    )));
                }
                let n = n as f64;
                Ok((10.5 * n, 73.5 * n, 7.0 * n))
            }
            AnsatzFamily::Uccsd { n, k } => {
                if n < 1 || k < 1 {
                    return Err(Error::InvalidArgument(format!(
                        "UCCSD family needs N ≥ 1, k ≥ 1 (got N = {n}, k = {k})"
                    )));
                }
                let n5 = (n as f64).powi(5);
                Ok((4f64.powi(k as i32) * n5, 7.0 * n5, n5))
            }
        }
    }

    fn ids(&self) -> (FormulaId, FormulaId) {
        match self {
            AnsatzFamily::HardwareEfficient { .. } => {
                (FormulaId::HardwareEfficient, FormulaId::HardwareEfficientDepolarizing)
            }
            AnsatzFamily::Mps { .. } => (FormulaId::Mps, FormulaId::MpsDepolarizing),
            AnsatzFamily::Tree { .. } => (FormulaId::Tree, FormulaId::TreeDepolarizing),
            AnsatzFamily::Uccsd { .. } => (FormulaId::Uccsd, FormulaId::UccsdDepolarizing),
        }
    }
}

/// Closed-form covering bound of an ansatz family, optionally with per-gate
/// depolarizing noise at rate `p`.
pub fn ln_covering_ansatz_family(
    family: AnsatzFamily,
    norm_o: f64,
    epsilon: f64,
    p: Option<f64>,
) -> Result<LogBound> {
    let check = BoundInput {
        norm_o,
        epsilon,
        ..BoundInput::default()
    };
    check.check_covering()?;
    let (exponent, base, noise_exponent) = family.closed_form()?;
    let (ideal_id, noisy_id) = family.ids();
    let ideal = exponent * (base * norm_o / epsilon).ln();
    match p {
        None => LogBound::new(ideal, ideal_id),
        Some(p) => {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::NoiseOutOfRange(p));
            }
            LogBound::new(noise_exponent * (1.0 - p).ln() + ideal, noisy_id)
        }
    }
}

/// (ln lower, ln upper) bounds on the ε-covering number of U(d^k):
/// `d^{2k}·ln(3/(4ε))` and `d^{2k}·ln(7/ε)`.
pub fn ln_unitary_group_covering(d: u32, k: u32, epsilon: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 0.1) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if d < 2 || k < 1 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2 and k ≥ 1, got d = {d}, k = {k}")));
    }
    let dim_sq = (d as f64).powi(2 * k as i32);
    Ok((dim_sq * (3.0 / (4.0 * epsilon)).ln(), dim_sq * (7.0 / epsilon).ln()))
}

/// Closed-form Rademacher bound obtained from the Dudley integral with
/// cut-off α = 1/√n:
/// `4/√n + (12/√n)·d^k·√N_gt·(ln(7√n·N_gt·‖O‖) + 1)`.
pub fn rademacher_bound(n: usize, d: u32, k: u32, n_gt: usize, norm_o: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
    }
    let sqrt_n = (n as f64).sqrt();
    let dk = (d as f64).powi(k as i32);
    let n_gt_f = n_gt as f64;
    let complexity = if n_gt == 0 {
        0.0
    } else {
        (12.0 / sqrt_n) * dk * n_gt_f.sqrt() * ((7.0 * sqrt_n * n_gt_f * norm_o).ln() + 1.0)
    };
    Ok(4.0 / sqrt_n + complexity)
}

/// Dudley entropy integral `4α + (12/√n)∫_α^1 √(ln N(ε)) dε` evaluated by
/// composite Simpson quadrature, with `ln N(ε) = d^{2k}·N_gt·ln(7√n·N_gt·‖O‖/ε)`
/// clamped at zero.
pub fn rademacher_dudley(n: usize, d: u32, k: u32, n_gt: usize, norm_o: f64, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("cut-off α must lie in (0, 1], got {alpha}")));
    }
    let sqrt_n = (n as f64).sqrt();
    let dim_sq = (d as f64).powi(2 * k as i32);
    let scale = 7.0 * sqrt_n * n_gt as f64 * norm_o;
    let integrand = |eps: f64| {
        if n_gt == 0 {
            return 0.0;
        }
        (dim_sq * n_gt as f64 * (scale / eps).ln()).max(0.0).sqrt()
    };
    const PANELS: usize = 2000;
    let h = (1.0 - alpha) / PANELS as f64;
    let mut sum = integrand(alpha) + integrand(1.0);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(alpha + i as f64 * h);
    }
    Ok(4.0 * alpha + (12.0 / sqrt_n) * sum * h / 3.0)
}

/// Generalization-gap bound holding with probability at least 1−δ:
/// `2L₁·rademacher_bound + 3C₁·√(ln(1/δ)/(2n))`.
#[allow(clippy::too_many_arguments)]
pub fn generalization_bound(
    n: usize,
    d: u32,
    k: u32,
    n_gt: usize,
    norm_o: f64,
    l1: f64,
    c1: f64,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, 1), got {delta}")));
    }
    let rad = rademacher_bound(n, d, k, n_gt, norm_o)?;
    Ok(2.0 * l1 * rad + 3.0 * c1 * ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// [`generalization_bound`] fed from a [`BoundInput`].
pub fn generalization_bound_for(input: &BoundInput) -> Result<f64> {
    generalization_bound(
        input.n,
        input.d,
        input.k,
        input.n_gt,
        input.norm_o,
        input.l1,
        input.c1,
        input.delta,
    )
}

/// Complexity penalty added to the empirical risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SrmPenalty {
    /// λ‖θ‖₂
    L2,
    /// λ·#{j : |θ_j| > 1e-12}
    L0,
    /// λ‖θ‖₂ + ‖O‖ for a trainable observable
    L2PlusObsNorm { norm_o: f64 },
}

const L0_THRESHOLD: f64 = 1e-12;

/// Structural-risk objective: empirical risk plus a parameter-dependent
/// complexity term.
pub fn srm_objective(empirical_risk: f64, theta: &[f64], lambda: f64, mode: SrmPenalty) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be non-negative, got {lambda}")));
    }
    let l2 = || theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    Ok(match mode {
        SrmPenalty::L2 => empirical_risk + lambda * l2(),
        SrmPenalty::L0 => empirical_risk + lambda * theta.iter().filter(|t| t.abs() > L0_THRESHOLD).count() as f64,
        SrmPenalty::L2PlusObsNorm { norm_o } => empirical_risk + lambda * l2() + norm_o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BoundInput {
        BoundInput {
            n_gt: 1,
            n_g: 1,
            d: 2,
            k: 1,
            norm_o: 1.0,
            epsilon: 0.1 - 1e-15,
            ..BoundInput::default()
        }
    }

    #[test]
    fn epsilon_guard_and_override() {
        let mut b = base();
        b.epsilon = 0.1;
        assert_eq!(ln_covering_ideal(&b).unwrap_err(), Error::EpsilonOutOfRange(0.1));
        b.allow_any_epsilon = true;
        assert!((ln_covering_ideal(&b).unwrap().ln_value - 4.0 * 70f64.ln()).abs() < 1e-12);
        b.epsilon = 0.0;
        assert!(ln_covering_ideal(&b).is_err());
    }

    #[test]
    fn base_one_gives_zero() {
        let b = BoundInput {
            epsilon: 0.05,
            norm_o: 1.0 / 140.0,
            ..base()
        };
        assert!(ln_covering_ideal(&b).unwrap().ln_value.abs() < 1e-12);
    }

    #[test]
    fn general_noise_term_vanishes_at_half_norm() {
        let b = BoundInput { norm_o: 0.5, ..base() };
        let v = ln_covering_noisy_general(&b).unwrap().ln_value;
        let expected = 4.0 * (7.0 / b.epsilon).ln();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_edges() {
        let b = base();
        assert_eq!(
            ln_covering_depolarizing(&b).unwrap().ln_value,
            ln_covering_ideal(&b).unwrap().ln_value
        );
        let b1 = BoundInput { p: 1.0, ..base() };
        assert_eq!(ln_covering_depolarizing(&b1).unwrap_err(), Error::NoiseOutOfRange(1.0));
    }

    #[test]
    fn invalid_inputs() {
        assert!(ln_covering_ideal(&BoundInput { norm_o: 0.0, ..base() }).is_err());
        assert!(ln_covering_ideal(&BoundInput { n_gt: 3, n_g: 2, ..base() }).is_err());
        assert!(ln_covering_ideal(&BoundInput { d: 1, ..base() }).is_err());
        assert!(ln_unitary_group_covering(2, 1, 0.2).is_err());
        assert!(rademacher_bound(0, 2, 1, 1, 1.0).is_err());
        assert!(generalization_bound(10, 2, 1, 1, 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(ln_covering_ansatz_family(AnsatzFamily::Tree { n: 6 }, 1.0, 0.05, None).is_err());
        assert!(ln_covering_ansatz_family(AnsatzFamily::HardwareEfficient { n: 7, layers: 0 }, 1.0, 0.05, None).is_err());
    }

    #[test]
    fn zero_trainable_gates() {
        let b = BoundInput { n_gt: 0, ..base() };
        assert_eq!(ln_covering_ideal(&b).unwrap().ln_value, 0.0);
        assert_eq!(rademacher_bound(4, 2, 1, 0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn delta_near_one_drops_confidence_term() {
        let g = generalization_bound(60, 2, 1, 42, 1.0, 2.0, 1.0, 1.0 - 1e-15).unwrap();
        let r = rademacher_bound(60, 2, 1, 42, 1.0).unwrap();
        assert!((g - 4.0 * r).abs() < 1e-6);
    }

    #[test]
    fn srm_modes() {
        assert_eq!(srm_objective(0.3, &[1.0, 2.0], 0.0, SrmPenalty::L2).unwrap(), 0.3);
        assert_eq!(srm_objective(0.5, &[3.0, 4.0], 1.0, SrmPenalty::L2).unwrap(), 5.5);
        assert_eq!(srm_objective(0.5, &[0.0, 1e-15, 2.0], 1.0, SrmPenalty::L0).unwrap(), 1.5);
        assert_eq!(
            srm_objective(0.5, &[3.0, 4.0], 1.0, SrmPenalty::L2PlusObsNorm { norm_o: 2.0 }).unwrap(),
            7.5
        );
        assert!(srm_objective(0.5, &[], -1.0, SrmPenalty::L2).is_err());
    }

    #[test]
    fn dudley_integral_below_closed_form() {
        // √(ln N) ≤ ln N wherever ln N ≥ 1, which holds across [α, 1] here.
        for (n, n_gt) in [(60, 42), (400, 21), (10, 3)] {
            let alpha = 1.0 / (n as f64).sqrt();
            let q = rademacher_dudley(n, 2, 1, n_gt, 1.0, alpha).unwrap();
            let closed = rademacher_bound(n, 2, 1, n_gt, 1.0).unwrap();
            assert!(q <= closed, "n = {n}: {q} > {closed}");
        }
    }
}
