//! Deterministic generators for the concrete families the experiments run
//! on: the four-lines family in the plane, two-subspace block families with
//! per-block angles, the baker's-map driven family of three planes in R^4,
//! slow-convergence witnesses, and seeded random families.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{Matrix, Subspace, SubspaceFamily, Vector};

/// Two subspaces of R^(2M) assembled from M orthogonal 2-dimensional
/// blocks. Block m hosts unit vectors e_m^1, e_m^2 at angle `angles[m]`,
/// and the complement directions y_m^1 perp e_m^1, y_m^2 perp e_m^2 at
/// angle pi - angles[m] from each other. The distinguished starting point
/// is x0 = sum of coeffs[m] * (y_m^1 + y_m^2).
#[derive(Debug, Clone)]
pub struct BlockConstruction {
    pub angles: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl BlockConstruction {
    pub fn new(angles: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || angles.len() != coeffs.len() {
            return Err(Error::InvalidArgument(
                "need one positive angle and one coefficient per block".into(),
            ));
        }
        for &a in &angles {
            if !(a > 0.0 && a <= std::f64::consts::FRAC_PI_2) {
                return Err(Error::InvalidArgument(format!(
                    "block angle {a} outside (0, pi/2]"
                )));
            }
        }
        for &c in &coeffs {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!("coefficient {c} must be positive")));
            }
        }
        Ok(Self { angles, coeffs })
    }

    /// The harmonic preset: angles 1/m and coefficients m^(-1/2-epsilon)
    /// for m = 1..blocks. The alternating norms then decay like a power of
    /// n with exponent between -(1+epsilon)/2 and -1/2.
    pub fn harmonic(epsilon: f64, blocks: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if blocks == 0 {
            return Err(Error::InvalidArgument("need at least one block".into()));
        }
        let angles = (1..=blocks).map(|m| 1.0 / m as f64).collect();
        let coeffs = (1..=blocks).map(|m| (m as f64).powf(-0.5 - epsilon)).collect();
        Self::new(angles, coeffs)
    }

    pub fn blocks(&self) -> usize {
        self.angles.len()
    }

    /// Ambient dimension of the assembled family, 2M.
    pub fn ambient_dim(&self) -> usize {
        2 * self.blocks()
    }

    /// Upper bound on the squared-norm truncation error of x0 relative to
    /// the same construction continued with harmonic data beyond the given
    /// truncation: sum over m > M of m^(-3-2 eps) <= M^(-2-2 eps)/(2+2 eps).
    pub fn harmonic_tail_bound(epsilon: f64, blocks: usize) -> f64 {
        (blocks as f64).powf(-2.0 - 2.0 * epsilon) / (2.0 + 2.0 * epsilon)
    }
}

/// Builds the two-member family of a block construction, together with its
/// distinguished starting point x0 (an element of the sum of complements
/// by construction).
pub fn block_family(cfg: &BlockConstruction) -> Result<(SubspaceFamily, Vector)> {
    let m_blocks = cfg.blocks();
    let d = cfg.ambient_dim();
    let mut e1 = Matrix::zeros(d, m_blocks);
    let mut e2 = Matrix::zeros(d, m_blocks);
    let mut y1 = Matrix::zeros(d, m_blocks);
    let mut y2 = Matrix::zeros(d, m_blocks);
    let mut x0 = Vector::zeros(d);
    for (m, (&a, &c)) in cfg.angles.iter().zip(&cfg.coeffs).enumerate() {
        let i = 2 * m;
        e1[(i, m)] = 1.0;
        e2[(i, m)] = a.cos();
        e2[(i + 1, m)] = a.sin();
        y1[(i + 1, m)] = 1.0;
        y2[(i, m)] = a.sin();
        y2[(i + 1, m)] = -a.cos();
        // y_m = y_m^1 + y_m^2 has squared norm 4 sin^2(a/2)
        x0[i] += c * a.sin();
        x0[i + 1] += c * (1.0 - a.cos());
    }
    let members = vec![Subspace::from_orthonormal(e1)?, Subspace::from_orthonormal(e2)?];
    let complements = vec![Subspace::from_orthonormal(y1)?, Subspace::from_orthonormal(y2)?];
    let family = SubspaceFamily::with_complements(members, complements)?;
    Ok((family, x0))
}

/// Closed-form norm after n full cycles of the alternating engine on the
/// block construction started at x0:
/// |T^n x0|^2 = sum_m coeffs[m]^2 sin^2(a_m) cos^(4n-2)(a_m),
/// evaluated with compensated summation.
pub fn cycle_norm_closed_form(cfg: &BlockConstruction, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("closed form needs n >= 1".into()));
    }
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for (&a, &c) in cfg.angles.iter().zip(&cfg.coeffs) {
        let term = c * c * a.sin().powi(2) * a.cos().powi(4 * n as i32 - 2);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    Ok((sum + comp).sqrt())
}

/// Closed-form cycle norms for every n in 1..=n_max, computed by the
/// per-block geometric recurrence. Entry j of the result is the norm after
/// j cycles; entry 0 is |x0|.
pub fn cycle_norms_closed_form(cfg: &BlockConstruction, n_max: usize) -> Vec<f64> {
    let blocks = cfg.blocks();
    let mut terms = vec![0.0_f64; blocks];
    let mut ratios = vec![0.0_f64; blocks];
    let mut x0_sq = 0.0_f64;
    for (m, (&a, &c)) in cfg.angles.iter().zip(&cfg.coeffs).enumerate() {
        terms[m] = c * c * a.sin().powi(2) * a.cos().powi(2);
        ratios[m] = a.cos().powi(4);
        x0_sq += c * c * 4.0 * (a / 2.0).sin().powi(2);
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(x0_sq.sqrt());
    for _ in 1..=n_max {
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for t in &terms {
            let s = sum + t;
            comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
            sum = s;
        }
        out.push((sum + comp).sqrt());
        for (t, r) in terms.iter_mut().zip(&ratios) {
            *t *= r;
        }
    }
    out
}

/// Parameters of the baker's-map family: the four defining angles and the
/// shifts of the interval map f(t) = t - a (t >= 0), t + b (t < 0).
#[derive(Debug, Clone, serde::Serialize)]
pub struct BakersParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// ln(cos^2 beta / cos^2 gamma) > 0.
    pub a: f64,
    /// ln(cos^2 delta / cos^2 alpha) > a.
    pub b: f64,
}

impl BakersParams {
    /// Validates the angle conditions: alpha > gamma > beta > delta >
    /// alpha/2, and cos^2 delta - cos^2 gamma = cos^2 beta - cos^2 alpha
    /// within 1e-12.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(alpha > gamma && gamma > beta && beta > delta && delta > alpha / 2.0) {
            return Err(Error::InvalidArgument(
                "angles must satisfy alpha > gamma > beta > delta > alpha/2".into(),
            ));
        }
        let c2 = |t: f64| t.cos() * t.cos();
        let lhs = c2(delta) - c2(gamma);
        let rhs = c2(beta) - c2(alpha);
        if (lhs - rhs).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "cos^2 balance violated: {lhs} vs {rhs}"
            )));
        }
        let a = (c2(beta) / c2(gamma)).ln();
        let b = (c2(delta) / c2(alpha)).ln();
        if !(b > a && a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shifts must satisfy b > a > 0, got a={a}, b={b}"
            )));
        }
        Ok(Self { alpha, beta, gamma, delta, a, b })
    }

    /// The rational contraction ratios r1 = cos^2 alpha / cos^2 delta and
    /// r2 = cos^2 gamma / cos^2 beta.
    pub fn contraction_ratios(&self) -> (f64, f64) {
        let c2 = |t: f64| t.cos() * t.cos();
        (c2(self.alpha) / c2(self.delta), c2(self.gamma) / c2(self.beta))
    }
}

/// Three 2-dimensional subspaces of R^4 = R^2 (+) R^2 whose remotest-index
/// sequence is driven by a baker's map and never becomes cyclic. Angle
/// preset: alpha = arccos sqrt(1/11), gamma = arccos sqrt(2/11),
/// beta = arccos sqrt(3/11), delta = arccos sqrt(4/11), for which the map
/// shifts are a = ln(3/2) and b = ln 4 and the contraction ratios are the
/// rationals 1/4 and 2/3 (whose powers never coincide).
pub fn bakers_family() -> Result<(SubspaceFamily, BakersParams)> {
    let alpha = (1.0_f64 / 11.0).sqrt().acos();
    let gamma = (2.0_f64 / 11.0).sqrt().acos();
    let beta = (3.0_f64 / 11.0).sqrt().acos();
    let delta = (4.0_f64 / 11.0).sqrt().acos();
    let params = BakersParams::new(alpha, beta, gamma, delta)?;

    let plane = |t: f64, lower: bool| -> Vector {
        let mut v = Vector::zeros(4);
        if lower {
            v[0] = t.cos();
            v[1] = t.sin();
        } else {
            v[2] = t.cos();
            v[3] = t.sin();
        }
        v
    };
    // e_3 lies between e_1 and e_2 (beta < alpha); u_2 between u_1 and u_3
    // (delta < gamma)
    let e = [plane(0.0, true), plane(alpha, true), plane(beta, true)];
    let u = [plane(0.0, false), plane(delta, false), plane(gamma, false)];
    let members = (0..3)
        .map(|j| Subspace::from_orthonormal(Matrix::from_columns(&[e[j].clone(), u[j].clone()])))
        .collect::<Result<Vec<_>>>()?;
    let family = SubspaceFamily::new(members)?;
    Ok((family, params))
}

/// The canonical starting element for the baker's-map family:
/// x0 = e_1 + phi u_1 with the golden ratio phi, whose log-ratio
/// lambda_0 = ln(phi) starts a never-cyclic orbit.
pub fn bakers_start() -> (Vector, f64) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut x0 = Vector::zeros(4);
    x0[0] = 1.0;
    x0[2] = phi;
    (x0, phi.ln())
}

/// Exact log-domain reference dynamics for the baker's-map family.
#[derive(Debug, Clone)]
pub struct BakersOracle {
    /// lambda_0 .. lambda_n.
    pub lambdas: Vec<f64>,
    /// Predicted member index (0-based) at even step 2k, for k = 0..n-1:
    /// 2 (third member) when lambda_k > 0, 1 (second member) otherwise.
    pub even_indices: Vec<usize>,
    /// Pair indices k at which |lambda_k| < 1e-12 made the prediction an
    /// unresolvable tie.
    pub tie_steps: Vec<usize>,
}

impl BakersOracle {
    /// Predicted member index (0-based) at engine step n; odd steps always
    /// return to the first member.
    pub fn predicted_index(&self, step: usize) -> usize {
        if step % 2 == 1 {
            0
        } else {
            self.even_indices[step / 2]
        }
    }
}

/// Iterates the interval map lambda_{k+1} = f(lambda_k) for n pairs of
/// steps, recording predictions. The iteration is exact in the log domain:
/// no norms are formed, so there is no underflow however deep the decay.
pub fn bakers_oracle(params: &BakersParams, lambda0: f64, n: usize) -> BakersOracle {
    let mut lambdas = Vec::with_capacity(n + 1);
    let mut even_indices = Vec::with_capacity(n);
    let mut tie_steps = Vec::new();
    let mut lam = lambda0;
    lambdas.push(lam);
    for k in 0..n {
        if lam.abs() < 1e-12 {
            tie_steps.push(k);
        }
        even_indices.push(if lam > 0.0 { 2 } else { 1 });
        lam = if lam >= 0.0 { lam - params.a } else { lam + params.b };
        lambdas.push(lam);
    }
    BakersOracle { lambdas, even_indices, tie_steps }
}

/// The four lines of R^2 generated by (1,0), (0,1), (1,1), (1, eps-1).
/// The third and fourth are mutual remotest neighbors, so remotest
/// projections of diagonal starting points bounce between them forever,
/// while the cycle through the first two annihilates immediately.
pub fn four_lines_family(eps: f64) -> Result<SubspaceFamily> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 0.5)")));
    }
    let gens = [
        Vector::from_vec(vec![1.0, 0.0]),
        Vector::from_vec(vec![0.0, 1.0]),
        Vector::from_vec(vec![1.0, 1.0]),
        Vector::from_vec(vec![1.0, eps - 1.0]),
    ];
    SubspaceFamily::new(
        gens.iter()
            .map(Subspace::line)
            .collect::<Result<Vec<_>>>()?,
    )
}

/// A slow-convergence witness on a block family.
#[derive(Debug, Clone)]
pub struct SlowWitness {
    pub x0: Vector,
    /// Input rescaling applied so the scaled targets stay at or below 1/2.
    pub scale: f64,
    /// The separation thresholds m_n of the construction.
    pub m_seq: Vec<usize>,
    /// Block hosting the n-th term (0-based block index per term n = 1, 2, ...).
    pub term_blocks: Vec<usize>,
}

/// Smallest harmonic-angle block count able to host the witness for the
/// given target sequence (targets indexed from n = 1).
pub fn slow_witness_required_blocks(target: &[f64]) -> Result<usize> {
    let plan = witness_plan(target)?;
    match plan {
        None => Ok(1),
        Some((_, _, m_seq)) => {
            let mut blocks = 0usize;
            let mut prev = 0usize;
            for &mn in &m_seq {
                let mut b = prev + 1;
                while (0.5 / b as f64).sin() > 1.0 / mn as f64 {
                    b += 1;
                }
                blocks = b;
                prev = b;
            }
            Ok(blocks)
        }
    }
}

/// scale, n(m) per target entry, m_seq; None for the all-zero target.
#[allow(clippy::type_complexity)]
fn witness_plan(target: &[f64]) -> Result<Option<(f64, Vec<usize>, Vec<usize>)>> {
    if target.is_empty() {
        return Err(Error::InvalidArgument("target must be non-empty".into()));
    }
    if target.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
        return Err(Error::InvalidArgument("target entries must be finite and >= 0".into()));
    }
    let alpha_max = target.iter().cloned().fold(0.0_f64, f64::max);
    if alpha_max == 0.0 {
        return Ok(None);
    }
    // the construction realizes sequences decaying to zero; a finite input
    // must at least be strictly decreasing until it reaches zero
    for w in target.windows(2) {
        if w[1] > 0.0 && w[1] >= w[0] {
            return Err(Error::InvalidArgument(
                "target must be strictly decreasing towards zero".into(),
            ));
        }
    }
    let scale = if alpha_max > 0.5 { 2.0 * alpha_max } else { 1.0 };
    let scaled: Vec<f64> = target.iter().map(|t| t / scale).collect();
    let mut n_of_m = Vec::with_capacity(scaled.len());
    for &t in &scaled {
        if t == 0.0 {
            n_of_m.push(0); // unconstrained
            continue;
        }
        // choose n with 1/(2(n+1)) <= t <= 1/(2n)
        let n = ((1.0 / (2.0 * t)).floor() as usize).max(1);
        n_of_m.push(n);
    }
    let n_max = n_of_m.iter().cloned().max().unwrap_or(0).max(1);
    let mut m_seq = Vec::with_capacity(n_max);
    let mut prev = 0usize;
    for n in 1..=n_max {
        let cutoff = 1.0 / (2.0 * n as f64 + 2.0);
        let biggest = scaled
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t >= cutoff)
            .map(|(i, _)| i + 1)
            .max()
            .unwrap_or(0);
        let mn = (4 * n * biggest).max(prev + 1).max(1);
        m_seq.push(mn);
        prev = mn;
    }
    Ok(Some((scale, n_of_m, m_seq)))
}

/// Builds a starting point on the family of `cfg` whose remotest residuals
/// stay above `target[n-1]` for n = 1..=target.len().
///
/// The witness combines per-block worst unit vectors w_b (the directions
/// least visible to the complement dictionary, with visibility value
/// sin(angle_b / 2)), one per term, picking for the n-th term the first
/// unused block with sin(angle/2) <= 1/m_n. Errors when the construction
/// has too few blocks, reporting how many are needed.
pub fn slow_witness(cfg: &BlockConstruction, target: &[f64]) -> Result<SlowWitness> {
    let d = cfg.ambient_dim();
    let plan = witness_plan(target)?;
    let (scale, _, m_seq) = match plan {
        None => {
            // a zero target is met by any unit vector; use the first
            // block's worst direction
            let mut x0 = Vector::zeros(d);
            let half = cfg.angles[0] / 2.0;
            x0[0] = half.cos();
            x0[1] = half.sin();
            return Ok(SlowWitness {
                x0,
                scale: 1.0,
                m_seq: Vec::new(),
                term_blocks: vec![0],
            });
        }
        Some(p) => p,
    };

    let mut term_blocks = Vec::with_capacity(m_seq.len());
    let mut prev: Option<usize> = None;
    for &mn in &m_seq {
        let threshold = 1.0 / mn as f64;
        let start = prev.map_or(0, |p| p + 1);
        let found = (start..cfg.blocks()).find(|&b| (cfg.angles[b] / 2.0).sin() <= threshold);
        match found {
            Some(b) => {
                term_blocks.push(b);
                prev = Some(b);
            }
            None => {
                let required = slow_witness_required_blocks(target)?;
                return Err(Error::InvalidArgument(format!(
                    "block construction too small for the witness: needs a block \
                     with sin(angle/2) <= {threshold:.3e} beyond index {start}; \
                     with harmonic angles, {required} blocks suffice"
                )));
            }
        }
    }

    let mut x0 = Vector::zeros(d);
    for (n, &b) in term_blocks.iter().enumerate() {
        let half = cfg.angles[b] / 2.0;
        let i = 2 * b;
        let weight = scale / (n + 1) as f64;
        x0[i] += weight * half.cos();
        x0[i + 1] += weight * half.sin();
    }
    Ok(SlowWitness { x0, scale, m_seq, term_blocks })
}

/// Seeded random family: K subspaces of R^d with ranks drawn from
/// [1, d-1] subject to the trivial-intersection constraint.
pub fn random_family<R: Rng>(d: usize, k: usize, rng: &mut R) -> Result<SubspaceFamily> {
    if d < 2 || k < 2 {
        return Err(Error::InvalidArgument("need d >= 2 and K >= 2".into()));
    }
    for _ in 0..100 {
        let ranks: Vec<usize> = (0..k).map(|_| rng.random_range(1..d)).collect();
        let complement_total: usize = ranks.iter().map(|&r| d - r).sum();
        if complement_total < d {
            continue;
        }
        if let Ok(f) = random_family_with_ranks(d, &ranks, rng) {
            return Ok(f);
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not draw a valid family with d={d}, K={k}"
    )))
}

/// Seeded random family with prescribed member ranks.
pub fn random_family_with_ranks<R: Rng>(
    d: usize,
    ranks: &[usize],
    rng: &mut R,
) -> Result<SubspaceFamily> {
    let members = ranks
        .iter()
        .map(|&r| {
            let spanning: Vec<Vector> = (0..r)
                .map(|_| Vector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            Subspace::from_spanning(&spanning, d, 1e-10)
        })
        .collect::<Result<Vec<_>>>()?;
    SubspaceFamily::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterates::{run, Policy, RunOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_orthogonal_block_annihilates_in_one_cycle() {
        let cfg = BlockConstruction::new(vec![std::f64::consts::FRAC_PI_2], vec![1.0]).unwrap();
        let (family, x0) = block_family(&cfg).unwrap();
        assert_eq!(family.ambient_dim(), 2);
        assert!((x0.clone() - Vector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
        let t = run(&family, &x0, &Policy::Cyclic, 2, RunOptions::default()).unwrap();
        // cos(pi/2) in floats is ~6e-17, so the cycle annihilates to
        // rounding rather than to an exact zero
        assert!(t.norms[2] < 1e-15);
        assert!(cycle_norm_closed_form(&cfg, 1).unwrap() < 1e-12);
    }

    #[test]
    fn harmonic_preset_start_norm_matches_series() {
        let cfg = BlockConstruction::harmonic(0.25, 400).unwrap();
        let (_, x0) = block_family(&cfg).unwrap();
        // |x0|^2 = 4 sum_{m<=400} sin^2(1/(2m)) / m^1.5
        let direct: f64 = (1..=400)
            .map(|m| {
                let m = m as f64;
                4.0 * (0.5 / m).sin().powi(2) / m.powf(1.5)
            })
            .sum();
        assert!((x0.norm_squared() - direct).abs() < 1e-13);
        assert!((direct - 1.044_044_864_785_066_6).abs() < 1e-10);
    }

    #[test]
    fn block_x0_lies_in_complement_sum() {
        let cfg = BlockConstruction::harmonic(0.25, 50).unwrap();
        let (family, x0) = block_family(&cfg).unwrap();
        assert!(family.complement_sum_residual(&x0).unwrap() < 1e-8);
        assert!(family.sum_of_complements_is_full(1e-10));
    }

    #[test]
    fn closed_form_matches_simulation() {
        let cfg = BlockConstruction::harmonic(0.25, 50).unwrap();
        let (family, x0) = block_family(&cfg).unwrap();
        let t = run(&family, &x0, &Policy::Cyclic, 200, RunOptions::default()).unwrap();
        let per_cycle = t.per_cycle_norms().unwrap();
        for (n, &sim) in per_cycle.iter().enumerate().skip(1).take(100) {
            let cf = cycle_norm_closed_form(&cfg, n).unwrap();
            assert!(
                (cf - sim).abs() <= 1e-10 * cf.max(sim),
                "n={n}: closed form {cf} vs simulated {sim}"
            );
        }
        // the batch evaluation agrees with the single-n closed form
        let batch = cycle_norms_closed_form(&cfg, 100);
        for (n, &b) in batch.iter().enumerate().skip(1) {
            let one = cycle_norm_closed_form(&cfg, n).unwrap();
            assert!((b - one).abs() <= 1e-12 * one.max(b));
        }
    }

    #[test]
    fn bakers_preset_satisfies_published_identities() {
        let (family, p) = bakers_family().unwrap();
        assert_eq!(family.ambient_dim(), 4);
        assert_eq!(family.k(), 3);
        // cos^2 balance: 4/11 - 2/11 = 3/11 - 1/11 = 2/11
        let c2 = |t: f64| t.cos() * t.cos();
        assert!((c2(p.delta) - c2(p.gamma) - 2.0 / 11.0).abs() < 1e-14);
        assert!((c2(p.beta) - c2(p.alpha) - 2.0 / 11.0).abs() < 1e-14);
        let (r1, r2) = p.contraction_ratios();
        assert!((r1 - 0.25).abs() < 1e-14);
        assert!((r2 - 2.0 / 3.0).abs() < 1e-14);
        assert!((p.a - 1.5_f64.ln()).abs() < 1e-14);
        assert!((p.b - 4.0_f64.ln()).abs() < 1e-14);
        assert!(p.b > p.a && p.a > 0.0);
        let c = crate::quantities::friedrichs_number(&family).unwrap();
        assert!(c < 1.0);
        let sampled = crate::quantities::friedrichs_rayleigh_sample(&family, 8, 20_000, 5).unwrap();
        assert!((c - sampled).abs() < 1e-3, "eigen {c} vs sampled {sampled}");
    }

    #[test]
    fn bakers_oracle_hand_iteration() {
        let (_, p) = bakers_family().unwrap();
        let o = bakers_oracle(&p, 0.1, 2);
        assert!((o.lambdas[1] - (0.1 - p.a)).abs() < 1e-15);
        assert!((o.lambdas[1] + 0.305_465_108_108_164_4).abs() < 1e-12);
        assert!((o.lambdas[2] - (o.lambdas[1] + p.b)).abs() < 1e-15);
        assert!((o.lambdas[2] - 1.080_829_253_011_726).abs() < 1e-12);
        assert_eq!(o.predicted_index(0), 2); // lambda_0 > 0: third member
        assert_eq!(o.predicted_index(1), 0);
        assert_eq!(o.predicted_index(2), 1); // lambda_1 < 0: second member
        assert!(o.tie_steps.is_empty());
    }

    #[test]
    fn bakers_map_preserves_half_interval() {
        let (_, p) = bakers_family().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let lam0 = rng.random::<f64>() * (p.a + p.b) - p.a;
            let o = bakers_oracle(&p, lam0, 1000);
            for &l in &o.lambdas {
                assert!(l >= -p.a - 1e-12 && l < p.b + 1e-12);
            }
        }
    }

    #[test]
    fn bakers_oracle_no_short_period_from_golden_start() {
        let (_, p) = bakers_family().unwrap();
        let (_, lambda0) = bakers_start();
        let o = bakers_oracle(&p, lambda0, 500);
        assert!(o.tie_steps.is_empty());
        for period in 1..=20usize {
            let cyclic = (0..500 - period).all(|k| o.even_indices[k] == o.even_indices[k + period]);
            assert!(!cyclic, "even-step indices have period {period}");
        }
    }

    #[test]
    fn simulated_bakers_indices_match_oracle_on_a_short_window() {
        let (family, p) = bakers_family().unwrap();
        let (x0, lambda0) = bakers_start();
        let o = bakers_oracle(&p, lambda0, 60);
        let t = run(&family, &x0, &Policy::Remotest, 120, RunOptions::default()).unwrap();
        for n in 0..120 {
            assert_eq!(t.indices[n], o.predicted_index(n), "step {n}");
        }
    }

    #[test]
    fn simulated_bakers_pair_coordinates_follow_the_exact_recurrence() {
        let (family, p) = bakers_family().unwrap();
        let (x0, _) = bakers_start();
        let t = run(&family, &x0, &Policy::Remotest, 100, RunOptions::default()).unwrap();
        let iterates = t.iterates.as_ref().unwrap();
        // even iterates sit in the first member: xi = <x, e_1> is coordinate
        // 0, eta = <x, u_1> is coordinate 2
        let c2 = |t: f64| t.cos() * t.cos();
        for k in 0..49 {
            let (xi, eta) = (iterates[2 * k][0], iterates[2 * k][2]);
            let (xi_next, eta_next) = (iterates[2 * k + 2][0], iterates[2 * k + 2][2]);
            let (fx, fe) = if t.indices[2 * k] == 2 {
                (c2(p.beta), c2(p.gamma))
            } else {
                (c2(p.alpha), c2(p.delta))
            };
            assert!(
                (xi_next - xi * fx).abs() <= 1e-12 * xi.abs(),
                "pair {k}: xi {xi} -> {xi_next}, factor {fx}"
            );
            assert!(
                (eta_next - eta * fe).abs() <= 1e-12 * eta.abs(),
                "pair {k}: eta {eta} -> {eta_next}, factor {fe}"
            );
        }
    }

    #[test]
    fn four_lines_validation() {
        assert!(four_lines_family(0.1).is_ok());
        assert!(four_lines_family(0.0).is_err());
        assert!(four_lines_family(0.5).is_err());
    }

    #[test]
    fn slow_witness_meets_logarithmic_target() {
        let target: Vec<f64> = (1..=50).map(|n| 1.0 / ((n + 2) as f64).ln()).collect();
        let required = slow_witness_required_blocks(&target).unwrap();
        let cfg = BlockConstruction::harmonic(0.25, required).unwrap();
        let w = slow_witness(&cfg, &target).unwrap();
        // the witness terms are invisible enough to the dictionary:
        // sin(angle/2) <= 1/m_n per term
        for (n, (&b, &mn)) in w.term_blocks.iter().zip(&w.m_seq).enumerate() {
            assert!(
                (cfg.angles[b] / 2.0).sin() <= 1.0 / mn as f64,
                "term {n}: block {b} too visible for m_n = {mn}"
            );
        }
        let (family, _) = block_family(&cfg).unwrap();
        let t = run(&family, &w.x0, &Policy::Remotest, 50, RunOptions::default()).unwrap();
        for n in 1..=50 {
            assert!(
                t.norms[n] >= target[n - 1],
                "residual {} below target {} at n={n}",
                t.norms[n],
                target[n - 1]
            );
        }
    }

    #[test]
    fn slow_witness_rejects_constant_target() {
        let cfg = BlockConstruction::harmonic(0.25, 10).unwrap();
        assert!(slow_witness(&cfg, &[0.3, 0.3, 0.3]).is_err());
    }

    #[test]
    fn slow_witness_zero_target_returns_first_block_direction() {
        let cfg = BlockConstruction::harmonic(0.25, 3).unwrap();
        let w = slow_witness(&cfg, &[0.0, 0.0]).unwrap();
        assert_eq!(w.term_blocks, vec![0]);
        assert!((w.x0.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slow_witness_reports_required_truncation() {
        let target: Vec<f64> = (1..=50).map(|n| 1.0 / ((n + 2) as f64).ln()).collect();
        let small = BlockConstruction::harmonic(0.25, 5).unwrap();
        let err = slow_witness(&small, &target).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("blocks suffice"), "unexpected message: {msg}");
    }

    #[test]
    fn random_families_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let f = random_family(5, 3, &mut rng).unwrap();
            assert_eq!(f.k(), 3);
            assert!(f.sum_of_complements_is_full(1e-10));
        }
    }
}
