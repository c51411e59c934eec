//! Machine verification of the rate inequalities along concrete
//! trajectories: per-step identities, the self-damping decay recursion,
//! the cycle-decay ledger for alternating runs, log-log rate fitting, and
//! the predicted per-step factor comparison.

use std::ops::Range;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::hilbert::{SubspaceFamily, Vector};
use crate::iterates::{run, Policy, RunOptions, Trajectory};
use crate::quantities::{friedrichs_number, nu_along, nu_decomposition, s_norm, DEFAULT_SNORM_TOL};

/// One verified inequality: its tolerance, the worst violation observed,
/// and where it occurred.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// What is being checked, in words.
    pub statement: String,
    pub tolerance: f64,
    pub max_violation: f64,
    /// Step or cycle index of the worst violation, when meaningful.
    pub worst_index: Option<usize>,
    pub pass: bool,
}

impl CheckResult {
    /// Starts an empty check that passes until a violation above
    /// `tolerance` is observed.
    pub fn new(name: &str, statement: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            statement: statement.to_string(),
            tolerance,
            max_violation: f64::NEG_INFINITY,
            worst_index: None,
            pass: true,
        }
    }

    /// Feeds one violation measurement (negative values mean margin).
    pub fn observe(&mut self, violation: f64, index: usize) {
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst_index = Some(index);
        }
    }

    /// Settles the pass flag.
    pub fn finish(mut self) -> Self {
        if !self.max_violation.is_finite() {
            self.max_violation = 0.0;
        }
        self.pass = self.max_violation <= self.tolerance;
        self
    }
}

/// A bundle of checks; `pass` is the conjunction.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub checks: Vec<CheckResult>,
}

impl CertificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.max_violation)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "pass": self.pass(),
            "checks": self.checks,
        })
    }
}

/// Verifies the per-step identities of a trajectory on its family:
/// monotone norms (relative slack 1e-12), the per-step Pythagoras identity
/// |x_{n+1}|^2 + d_n^2 = |x_n|^2 at relative tolerance `tol`, and, for
/// cyclic runs with stored iterates, the per-cycle decay identity
/// |T y|^2 = |y|^2 (1 - nu(y)^2) with nu computed independently of the
/// engine.
pub fn step_identities(
    t: &Trajectory,
    family: &SubspaceFamily,
    tol: f64,
) -> Result<CertificationReport> {
    if t.family_fingerprint != 0 && t.family_fingerprint != family.fingerprint() {
        return Err(Error::InvalidArgument(
            "trajectory was not produced on this family".into(),
        ));
    }
    let mut monotone = CheckResult::new(
        "monotone_norms",
        "|x_{n+1}| <= |x_n| (relative)",
        1e-12,
    );
    let mut pythagoras = CheckResult::new(
        "step_pythagoras",
        "|x_{n+1}|^2 + step_dist_n^2 = |x_n|^2 (relative)",
        tol,
    );
    // all identities are checked on per-step ratios, so deep-decay runs
    // whose squared norms would underflow verify just as well
    for n in 0..t.steps() {
        let a = t.norms[n];
        let b = t.norms[n + 1];
        if a > 0.0 {
            monotone.observe((b - a) / a, n + 1);
            let r = b / a;
            let s = t.step_dists[n] / a;
            pythagoras.observe((r * r + s * s - 1.0).abs(), n + 1);
        }
    }
    let mut checks = vec![monotone.finish(), pythagoras.finish()];

    if let (Some(cycle), Some(iterates)) = (t.cycle_len, &t.iterates) {
        let mut cycle_identity = CheckResult::new(
            "cycle_decay_identity",
            "|x_{(j+1)s}|^2 = |x_{js}|^2 (1 - nu_j^2) per full cycle (relative)",
            tol,
        );
        let full_cycles = t.steps() / cycle;
        for j in 0..full_cycles {
            let a = t.norms[j * cycle];
            if a == 0.0 {
                break;
            }
            let y_hat = &iterates[j * cycle] / a;
            let order = &t.indices[j * cycle..(j + 1) * cycle];
            let nu = nu_along(family, order, &y_hat)?;
            let r = t.norms[(j + 1) * cycle] / a;
            cycle_identity.observe((r * r - (1.0 - nu.nu * nu.nu)).abs(), j);
        }
        checks.push(cycle_identity.finish());
    }
    Ok(CertificationReport { checks })
}

/// Outcome of testing a sequence against the self-damping decay recursion
/// c_{n+1} <= c_n (1 - c_n / cap), whose conclusion is c_n <= cap / n.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRecursionOutcome {
    pub hypothesis_holds: bool,
    /// Checked only when the hypothesis holds.
    pub conclusion_holds: Option<bool>,
    pub first_violation: Option<usize>,
}

impl DecayRecursionOutcome {
    /// Hypothesis and conclusion both hold.
    pub fn holds(&self) -> bool {
        self.hypothesis_holds && self.conclusion_holds == Some(true)
    }
}

/// Checks the decay recursion on `seq` (seq[0] is c_1). Hypothesis
/// violations are reported, not panicked on; the conclusion is asserted
/// only for hypothesis-satisfying sequences.
pub fn decay_recursion_check(seq: &[f64], cap: f64) -> DecayRecursionOutcome {
    if seq.is_empty() || cap.is_nan() || cap <= 0.0 {
        return DecayRecursionOutcome {
            hypothesis_holds: false,
            conclusion_holds: None,
            first_violation: Some(0),
        };
    }
    let slack = 1e-15 * cap;
    let mut hypothesis = seq[0] <= cap + slack && seq.iter().all(|&c| c >= 0.0);
    let mut first_violation = None;
    if hypothesis {
        for n in 0..seq.len() - 1 {
            if seq[n + 1] > seq[n] * (1.0 - seq[n] / cap) + slack {
                hypothesis = false;
                first_violation = Some(n + 1);
                break;
            }
        }
    } else {
        first_violation = Some(0);
    }
    if !hypothesis {
        return DecayRecursionOutcome {
            hypothesis_holds: false,
            conclusion_holds: None,
            first_violation,
        };
    }
    for (i, &c) in seq.iter().enumerate() {
        let n = (i + 1) as f64;
        if c > cap / n * (1.0 + 1e-12) + slack {
            return DecayRecursionOutcome {
                hypothesis_holds: true,
                conclusion_holds: Some(false),
                first_violation: Some(i),
            };
        }
    }
    DecayRecursionOutcome {
        hypothesis_holds: true,
        conclusion_holds: Some(true),
        first_violation: None,
    }
}

/// Per-cycle ledger certifying the polynomial decay of alternating runs
/// started inside the sum of the complements.
///
/// With a_n the cycle norms, nu_n the per-cycle decay ratios, and
/// b_{n+1} = b_n + sqrt(K) a_n nu_n seeded at a certified upper bound on
/// s(x0), the ledger verifies: the cycle identity, monotonicity of a and
/// b, the monotone product a_n^2 b_n^alpha, the harmonic ratio bound
/// a_n^2 / b_n^2 <= K^2 / n, the lower bound nu_n >= a_n / (K b_n), and
/// the final polynomial bound a_n <= c(x0) n^(-1/(4 K sqrt(K) + 2)).
#[derive(Debug, Clone)]
pub struct CycleDecayLedger {
    /// a_n = |x_{nK}| for n = 0..cycles_run.
    pub norms: Vec<f64>,
    /// The auxiliary non-decreasing caps b_n (b_n >= s(x_{nK})).
    pub s_caps: Vec<f64>,
    /// nu_n per cycle.
    pub nus: Vec<f64>,
    /// alpha = K^(-3/2).
    pub alpha_exp: f64,
    /// c(x0) = |x0|^(2/(2+alpha)) s_ub^(alpha/(2+alpha)) K^(alpha/(2+alpha)).
    pub bound_coeff: f64,
    /// 1 / (4 K sqrt(K) + 2).
    pub exponent: f64,
    /// Certified upper bound on s(x0) used as b_0.
    pub s_ub_x0: f64,
    pub cycles_run: usize,
    pub requested_cycles: usize,
    pub checks: Vec<CheckResult>,
}

impl CycleDecayLedger {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "pass": self.pass(),
            "alpha_exp": self.alpha_exp,
            "exponent": self.exponent,
            "bound_coeff": self.bound_coeff,
            "s_ub_x0": self.s_ub_x0,
            "cycles_run": self.cycles_run,
            "requested_cycles": self.requested_cycles,
            "checks": self.checks,
        })
    }
}

/// Norm floor below which the ledger stops iterating; bounds beyond that
/// point hold trivially because a is non-increasing and b non-decreasing.
const LEDGER_FLOOR: f64 = 1e-140;

pub fn cycle_decay_ledger(
    family: &SubspaceFamily,
    x0: &Vector,
    n_cycles: usize,
) -> Result<CycleDecayLedger> {
    if n_cycles == 0 {
        return Err(Error::InvalidArgument("need n_cycles >= 1".into()));
    }
    let residual = family.complement_sum_residual(x0)?;
    if residual > 1e-8 * (1.0 + x0.norm()) {
        return Err(Error::NotInComplementSum { residual });
    }
    let s0 = s_norm(family, x0, DEFAULT_SNORM_TOL)?;
    if !s0.certified {
        return Err(Error::NotCertified(format!(
            "s-norm gap {} after {} iterations",
            s0.gap, s0.iterations
        )));
    }
    let k = family.k();
    let kf = k as f64;
    let alpha = kf.powf(-1.5);
    let exponent = 1.0 / (4.0 * kf * kf.sqrt() + 2.0);
    let a0 = x0.norm();
    let bound_coeff = a0.powf(2.0 / (2.0 + alpha))
        * s0.value.powf(alpha / (2.0 + alpha))
        * kf.powf(alpha / (2.0 + alpha));

    let traj = run(
        family,
        x0,
        &Policy::Cyclic,
        n_cycles * k,
        RunOptions {
            stop_norm: LEDGER_FLOOR,
            store_iterates: true,
        },
    )?;
    let iterates = traj.iterates.as_ref().expect("iterates stored");
    let cycles_run = traj.steps() / k;

    let mut norms = Vec::with_capacity(cycles_run + 1);
    let mut s_caps = Vec::with_capacity(cycles_run + 1);
    let mut nus = Vec::with_capacity(cycles_run);
    norms.push(a0);
    s_caps.push(s0.value);

    let mut cycle_identity = CheckResult::new(
        "cycle_decay_identity",
        "a_{n+1}^2 = a_n^2 (1 - nu_n^2) (relative)",
        1e-9,
    );
    let mut a_monotone = CheckResult::new("a_monotone", "a non-increasing (relative)", 1e-12);
    let mut b_monotone = CheckResult::new("b_monotone", "b non-decreasing", 0.0);
    let mut nu_lower = CheckResult::new(
        "nu_lower_bound",
        "nu_n >= a_n / (K b_n)",
        1e-9,
    );
    let mut product = CheckResult::new(
        "product_monotone",
        "a_n^2 b_n^alpha <= a_0^2 b_0^alpha",
        1e-9,
    );
    let mut ratio = CheckResult::new(
        "harmonic_ratio",
        "a_n^2 / b_n^2 <= K^2 / n",
        1e-9,
    );
    let mut final_bound = CheckResult::new(
        "polynomial_bound",
        "a_n <= c(x0) n^(-1/(4 K sqrt(K) + 2))",
        1e-9,
    );

    for j in 0..cycles_run {
        let y = &iterates[j * k];
        let a_j = norms[j];
        if y.norm() == 0.0 {
            break;
        }
        let nu = nu_decomposition(family, y)?;
        let a_next = traj.norms[(j + 1) * k];
        cycle_identity.observe(
            (a_next * a_next - a_j * a_j * (1.0 - nu.nu * nu.nu)).abs() / (a_j * a_j),
            j,
        );
        nu_lower.observe(a_j / (kf * s_caps[j]) - nu.nu, j);
        let b_next = s_caps[j] + kf.sqrt() * a_j * nu.nu;
        nus.push(nu.nu);
        norms.push(a_next);
        s_caps.push(b_next);
    }

    let prod0 = norms[0] * norms[0] * s_caps[0].powf(alpha);
    for (j, (&a, &b)) in norms.iter().zip(s_caps.iter()).enumerate() {
        if j + 1 < norms.len() {
            if norms[j] > 0.0 {
                a_monotone.observe((norms[j + 1] - norms[j]) / norms[j], j + 1);
            }
            b_monotone.observe(s_caps[j] - s_caps[j + 1], j + 1);
        }
        product.observe(a * a * b.powf(alpha) - prod0, j);
        if j >= 1 {
            let n = j as f64;
            ratio.observe(a * a / (b * b) - kf * kf / n, j);
            final_bound.observe(a - bound_coeff * n.powf(-exponent), j);
        }
    }
    // bounds continue trivially past an early stop: a is non-increasing, so
    // any later a_n stays below the stop value, which sits far under the
    // bound evaluated at the latest requested cycle
    let actual_cycles = norms.len() - 1;
    if actual_cycles < n_cycles {
        let a_stop = *norms.last().expect("nonempty");
        let b_stop = *s_caps.last().expect("nonempty");
        let n = n_cycles as f64;
        final_bound.observe(a_stop - bound_coeff * n.powf(-exponent), n_cycles);
        ratio.observe(a_stop * a_stop / (b_stop * b_stop) - kf * kf / n, n_cycles);
    }

    let checks = vec![
        cycle_identity.finish(),
        a_monotone.finish(),
        b_monotone.finish(),
        nu_lower.finish(),
        product.finish(),
        ratio.finish(),
        final_bound.finish(),
    ];
    Ok(CycleDecayLedger {
        norms,
        s_caps,
        nus,
        alpha_exp: alpha,
        bound_coeff,
        exponent,
        s_ub_x0: s0.value,
        cycles_run: actual_cycles,
        requested_cycles: n_cycles,
        checks,
    })
}

/// Least-squares fit of log |x_n| against log n over an index window,
/// with an R^2 linearity diagnostic. Exponent assertions downstream should
/// fire only when `r_squared > 0.99`, so that geometric decay is not
/// misread as a power law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn rate_fit(norms: &[f64], window: Range<usize>) -> Result<RateFit> {
    if window.start < 1 || window.end > norms.len() {
        return Err(Error::InvalidArgument(format!(
            "window {}..{} out of bounds for {} norms (start must be >= 1)",
            window.start,
            window.end,
            norms.len()
        )));
    }
    if window.len() < 10 {
        return Err(Error::InvalidArgument("window must contain at least 10 points".into()));
    }
    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    for n in window {
        if norms[n].is_nan() || norms[n] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "nonpositive norm {} at n={n} in fit window",
                norms[n]
            )));
        }
        xs.push((n as f64).ln());
        ys.push(norms[n].ln());
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit { slope, intercept, r_squared })
}

/// Predicted per-step norm-decay factors of the two engines on a family:
/// the remotest factor sqrt(1 - rho*_lb^2) from the Friedrichs lower bound
/// rho*_lb = (1-c)/(K-1), and the alternating factor
/// sqrt(1 - ((1-c)/(4K))^2). The remotest factor never exceeds the
/// alternating one.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub friedrichs_c: f64,
    pub remotest_factor: f64,
    pub alternating_factor: f64,
    /// Observed |x_{n+1}| / |x_n| along a supplied trajectory.
    pub empirical_factors: Option<Vec<f64>>,
}

pub fn bound_report(family: &SubspaceFamily) -> Result<RateReport> {
    let c = friedrichs_number(family)?;
    let k = family.k() as f64;
    let rho_star_lb = ((1.0 - c) / (k - 1.0)).clamp(0.0, 1.0);
    let alt = (1.0 - c) / (4.0 * k);
    let report = RateReport {
        friedrichs_c: c,
        remotest_factor: (1.0 - rho_star_lb * rho_star_lb).max(0.0).sqrt(),
        alternating_factor: (1.0 - alt * alt).max(0.0).sqrt(),
        empirical_factors: None,
    };
    debug_assert!(report.remotest_factor <= report.alternating_factor + 1e-15);
    Ok(report)
}

pub fn bound_report_with_trajectory(
    family: &SubspaceFamily,
    t: &Trajectory,
) -> Result<RateReport> {
    let mut report = bound_report(family)?;
    let factors = (0..t.steps())
        .filter(|&n| t.norms[n] > 0.0)
        .map(|n| t.norms[n + 1] / t.norms[n])
        .collect();
    report.empirical_factors = Some(factors);
    Ok(report)
}

/// Checks the weak-greedy contraction along a greedy trajectory against a
/// certified lower bound on the dictionary constant:
/// |x_{k+1}|^2 <= |x_k|^2 (1 - t_k^2 rho_lb^2) per step, and cumulatively
/// |x_n| <= |x_0| prod (1 - t_k^2 rho_lb^2)^(1/2).
pub fn greedy_rate_bound(
    t: &Trajectory,
    rho_lb: f64,
    weakness: &[f64],
    tol: f64,
) -> CheckResult {
    let mut check = CheckResult::new(
        "greedy_contraction",
        "|x_{k+1}|^2 <= |x_k|^2 (1 - t_k^2 rho_lb^2) and its cumulative product",
        tol,
    );
    let t_at = |k: usize| -> f64 {
        if weakness.is_empty() {
            1.0
        } else {
            weakness[k % weakness.len()]
        }
    };
    let mut cumulative = t.norms[0] * t.norms[0];
    for n in 0..t.steps() {
        let factor = 1.0 - t_at(n).powi(2) * rho_lb * rho_lb;
        check.observe(t.norms[n + 1].powi(2) - t.norms[n].powi(2) * factor, n + 1);
        cumulative *= factor;
        check.observe(t.norms[n + 1].powi(2) - cumulative, n + 1);
    }
    check.finish()
}

/// Checks the square-root decay bound |x_n| <= s_ub / sqrt(n) along a
/// remotest trajectory of a two-member family, where s_ub is a certified
/// upper bound on s(x_1).
pub fn sqrt_decay_bound(t: &Trajectory, s_ub_x1: f64, tol: f64) -> CheckResult {
    let mut check = CheckResult::new(
        "sqrt_decay_bound",
        "|x_n| <= s_ub(x_1) / sqrt(n)",
        tol,
    );
    for n in 1..t.norms.len() {
        check.observe(t.norms[n] - s_ub_x1 / (n as f64).sqrt(), n);
    }
    check.finish()
}
