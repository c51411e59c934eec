//! Scalar constants and directional quantities that govern the convergence
//! rates of the projection engines: the Friedrichs number, the sphere
//! constants rho and rho* with optimization-based estimators, the greedy
//! direction cosine rho(x), and the per-cycle decay nu(y).
//!
//! The rho estimators return upper bounds on the true infima (the exact
//! min-max is nonconvex); downstream checks only ever use the direction of
//! inequality that an upper bound certifies. The Friedrichs number, by
//! contrast, is an eigenvalue computation, exact to solver tolerance.

mod snorm;

pub use snorm::{s_norm, SNormResult, DEFAULT_SNORM_TOL, MEMBERSHIP_TOL, SNORM_MAX_ITERS};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{ensure_dim, ensure_finite, Matrix, SubspaceFamily, Vector};

/// Grid step (radians) of the deterministic sphere search used for
/// ambient dimensions <= 3 and for explicit dictionaries in the plane.
pub const GRID_STEP: f64 = 1e-3;

/// Subgradient iterations per restart in the sphere estimators.
pub const SUBGRADIENT_ITERS: usize = 400;

/// Assembles the symmetric block matrix with zero diagonal blocks and
/// off-diagonal blocks B_j^T B_k over the members with nonzero rank.
/// Returns the matrix together with the member index of each block row.
fn block_gram(family: &SubspaceFamily) -> (Matrix, Vec<usize>) {
    let active: Vec<usize> = (0..family.k())
        .filter(|&i| family.member(i).rank() > 0)
        .collect();
    let sizes: Vec<usize> = active.iter().map(|&i| family.member(i).rank()).collect();
    let total: usize = sizes.iter().sum();
    let mut m = Matrix::zeros(total, total);
    let mut row = 0;
    for (a, &i) in active.iter().enumerate() {
        let mut col = 0;
        for (b, &j) in active.iter().enumerate() {
            if a != b {
                let cross = family.member(i).basis().tr_mul(family.member(j).basis());
                m.view_mut((row, col), (sizes[a], sizes[b])).copy_from(&cross);
            }
            col += sizes[b];
        }
        row += sizes[a];
    }
    (m, active)
}

/// The generalized Friedrichs number c of the family, via the eigenproblem
/// c = lambda_max(M) / (K - 1) for the block matrix M with zero diagonal
/// blocks and off-diagonal blocks B_j^T B_k. Substituting y_j = B_j z_j in
/// the defining supremum over y_j in L_j shows the equivalence. Clamped to
/// [0, 1]; members of rank zero contribute nothing.
pub fn friedrichs_number(family: &SubspaceFamily) -> Result<f64> {
    let (m, active) = block_gram(family);
    if active.is_empty() {
        return Err(Error::AllMembersZeroRank);
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lmax / (family.k() as f64 - 1.0)).clamp(0.0, 1.0))
}

/// Sampling oracle for the Friedrichs number: multistart power iteration
/// maximizing the Rayleigh quotient, with every reported value recomputed
/// from raw member vectors y_j = B_j z_j (not from the assembled matrix),
/// so it is an independent check of [`friedrichs_number`].
pub fn friedrichs_rayleigh_sample(
    family: &SubspaceFamily,
    starts: usize,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    let (m, active) = block_gram(family);
    if active.is_empty() {
        return Err(Error::AllMembersZeroRank);
    }
    let total = m.nrows();
    if total == 0 {
        return Ok(0.0);
    }
    let k = family.k() as f64;
    let sizes: Vec<usize> = active.iter().map(|&i| family.member(i).rank()).collect();

    // Raw Rayleigh quotient: sum_{j != l} <y_j, y_l> / ((K-1) sum |z_j|^2),
    // with the numerator computed as |sum y_j|^2 - sum |y_j|^2.
    let raw_quotient = |z: &Vector| -> f64 {
        let mut sum = Vector::zeros(family.ambient_dim());
        let mut sq = 0.0;
        let mut at = 0;
        for (b, &i) in active.iter().enumerate() {
            let zj = z.rows(at, sizes[b]).into_owned();
            let yj = family.member(i).basis() * &zj;
            sq += yj.norm_squared();
            sum += yj;
            at += sizes[b];
        }
        let cross = sum.norm_squared() - sq;
        cross / ((k - 1.0) * z.norm_squared())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = k - 1.0; // makes M + shift*I positive semidefinite
    let mut best = f64::NEG_INFINITY;
    for _ in 0..starts.max(1) {
        let mut z = Vector::from_fn(total, |_, _| rng.random::<f64>() - 0.5);
        if z.norm() == 0.0 {
            z[0] = 1.0;
        }
        z /= z.norm();
        best = best.max(raw_quotient(&z));
        for _ in 0..iters {
            z = &m * &z + &z * shift;
            let n = z.norm();
            if n == 0.0 {
                break;
            }
            z /= n;
        }
        best = best.max(raw_quotient(&z));
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Search domain of [`rho_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhoMode {
    /// Minimize max_k dist(x, L_k) over the whole unit sphere (rho).
    FullSphere,
    /// Minimize over the unit spheres of the members only (rho*).
    Restricted,
}

/// Result of a sphere-constant estimation; `value` is an upper bound on the
/// true infimum, attained at `witness`.
#[derive(Debug, Clone, Serialize)]
pub struct RhoEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    pub mode: RhoMode,
    pub restarts: usize,
    pub iterations_per_restart: usize,
    pub seed: u64,
}

fn family_objective(family: &SubspaceFamily, x: &Vector) -> f64 {
    family
        .members()
        .iter()
        .map(|m| m.distance(x).expect("dims validated"))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Projected subgradient descent of f(x) = max_k dist(x, L_k) on the unit
/// sphere, returning the best visited point.
fn subgradient_refine(
    family: &SubspaceFamily,
    start: &Vector,
    iters: usize,
) -> (f64, Vector) {
    let mut x = start.clone();
    let n = x.norm();
    if n == 0.0 {
        return (f64::INFINITY, x);
    }
    x /= n;
    let mut best = (family_objective(family, &x), x.clone());
    for t in 0..iters {
        // subgradient of the active max term
        let mut max_d = f64::NEG_INFINITY;
        let mut grad = Vector::zeros(x.len());
        for m in family.members() {
            let p = m.project(&x).expect("dims validated");
            let r = &x - &p;
            let d = r.norm();
            if d > max_d {
                max_d = d;
                grad = if d > 1e-300 { r / d } else { Vector::zeros(x.len()) };
            }
        }
        let eta = 0.4 / ((t + 1) as f64).sqrt();
        x -= grad * eta;
        let n = x.norm();
        if n == 0.0 {
            break;
        }
        x /= n;
        let f = family_objective(family, &x);
        if f < best.0 {
            best = (f, x.clone());
        }
    }
    best
}

/// Golden-section minimization of a scalar function on [a, b].
fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (f(mid), mid)
}

fn unit2(theta: f64) -> Vector {
    Vector::from_vec(vec![theta.cos(), theta.sin()])
}

fn unit3(theta: f64, phi: f64) -> Vector {
    Vector::from_vec(vec![
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ])
}

/// Deterministic grid + local refinement on the unit circle.
fn grid_min_2d(f: &dyn Fn(&Vector) -> f64, step: f64) -> (f64, Vector) {
    let n = (std::f64::consts::PI / step).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=n {
        let th = i as f64 * step;
        let v = f(&unit2(th));
        if v < best.0 {
            best = (v, th);
        }
    }
    let (val, th) = golden_min(|t| f(&unit2(t)), best.1 - step, best.1 + step, 1e-12);
    if val < best.0 {
        (val, unit2(th))
    } else {
        (best.0, unit2(best.1))
    }
}

/// Deterministic grid + coordinatewise refinement on the unit 2-sphere
/// (half of it; the objectives here are symmetric under negation).
fn grid_min_3d(f: &dyn Fn(&Vector) -> f64, step: f64) -> (f64, Vector) {
    let pi = std::f64::consts::PI;
    let nt = (pi / step).ceil() as usize;
    let np = (pi / step).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nt {
        let th = i as f64 * step;
        let st = th.sin();
        // poles: all phi coincide
        let cols = if st.abs() < step { 1 } else { np };
        for j in 0..cols {
            let ph = j as f64 * step * (pi / (cols as f64 * step));
            let v = f(&unit3(th, ph));
            if v < best.0 {
                best = (v, th, ph);
            }
        }
    }
    let (_, mut th, mut ph) = best;
    for _ in 0..3 {
        let (_, t2) = golden_min(|t| f(&unit3(t, ph)), th - step, th + step, 1e-12);
        th = t2;
        let (_, p2) = golden_min(|p| f(&unit3(th, p)), ph - step, ph + step, 1e-12);
        ph = p2;
    }
    let refined = f(&unit3(th, ph));
    if refined < best.0 {
        (refined, unit3(th, ph))
    } else {
        (best.0, unit3(best.1, best.2))
    }
}

/// Principal-pair midpoint of two members: the normalized sum of the unit
/// vectors attaining the smallest principal angle. For K = 2 its objective
/// value never exceeds sin(pi/4) = 1/sqrt(2).
fn principal_midpoint(family: &SubspaceFamily, i: usize, j: usize) -> Option<Vector> {
    let bi = family.member(i).basis();
    let bj = family.member(j).basis();
    if bi.ncols() == 0 || bj.ncols() == 0 {
        return None;
    }
    let cross = bi.tr_mul(bj);
    let svd = cross.svd(true, true);
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (t, &s)| if s > acc.1 { (t, s) } else { acc });
    let u = svd.u.as_ref()?.column(idx).into_owned();
    let vt = svd.v_t.as_ref()?.row(idx).transpose();
    let a = bi * u;
    let b = bj * vt;
    let mut sum = &a + &b;
    if a.dot(&b) < 0.0 {
        sum = a - b;
    }
    let n = sum.norm();
    if n == 0.0 {
        None
    } else {
        Some(sum / n)
    }
}

/// Multi-start estimation of rho (full-sphere mode) or rho* (restricted
/// mode). Returns the best value found, an upper bound on the infimum.
///
/// Full-sphere candidates: seeded random starts, refined by projected
/// subgradient descent; principal-pair midpoints of all member pairs; and
/// for ambient dimension <= 3 a deterministic angular grid at
/// [`GRID_STEP`] with local refinement. Restricted mode optimizes over each
/// member's unit sphere and takes the minimum over members.
pub fn rho_estimate(
    family: &SubspaceFamily,
    mode: RhoMode,
    restarts: usize,
    seed: u64,
) -> Result<RhoEstimate> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    rho_estimate_with_candidates(family, mode, restarts, seed, &[])
}

pub(crate) fn rho_estimate_with_candidates(
    family: &SubspaceFamily,
    mode: RhoMode,
    restarts: usize,
    seed: u64,
    extra_candidates: &[Vector],
) -> Result<RhoEstimate> {
    let d = family.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: (f64, Vector) = (f64::INFINITY, Vector::zeros(d));
    let consider = |cand: (f64, Vector), best: &mut (f64, Vector)| {
        if cand.0 < best.0 {
            *best = cand;
        }
    };

    match mode {
        RhoMode::FullSphere => {
            let obj = |x: &Vector| family_objective(family, x);
            for _ in 0..restarts {
                let start = Vector::from_fn(d, |_, _| rng.random::<f64>() - 0.5);
                if start.norm() == 0.0 {
                    continue;
                }
                consider(subgradient_refine(family, &start, SUBGRADIENT_ITERS), &mut best);
            }
            for i in 0..family.k() {
                for j in (i + 1)..family.k() {
                    if let Some(mid) = principal_midpoint(family, i, j) {
                        consider(subgradient_refine(family, &mid, SUBGRADIENT_ITERS), &mut best);
                    }
                }
            }
            for c in extra_candidates {
                if c.len() == d && c.norm() > 0.0 {
                    let x = c / c.norm();
                    consider((obj(&x), x.clone()), &mut best);
                    consider(subgradient_refine(family, &x, SUBGRADIENT_ITERS), &mut best);
                }
            }
            if d == 2 {
                consider(grid_min_2d(&obj, GRID_STEP), &mut best);
            } else if d == 3 {
                consider(grid_min_3d(&obj, GRID_STEP), &mut best);
            }
        }
        RhoMode::Restricted => {
            for member in family.members() {
                let r = member.rank();
                if r == 0 {
                    continue;
                }
                let basis = member.basis().clone();
                let emb = |z: &Vector| -> Vector { &basis * z };
                let obj_z = |z: &Vector| family_objective(family, &emb(z));
                if r == 1 {
                    let x = basis.column(0).into_owned();
                    consider((family_objective(family, &x), x), &mut best);
                } else if r == 2 {
                    let (v, z) = grid_min_2d(&|z: &Vector| obj_z(z), GRID_STEP);
                    consider((v, emb(&z)), &mut best);
                } else {
                    for _ in 0..restarts {
                        let mut z = Vector::from_fn(r, |_, _| rng.random::<f64>() - 0.5);
                        let n = z.norm();
                        if n == 0.0 {
                            continue;
                        }
                        z /= n;
                        // subgradient descent in member coordinates
                        let mut bz = (obj_z(&z), z.clone());
                        for t in 0..SUBGRADIENT_ITERS {
                            let x = emb(&z);
                            let mut max_d = f64::NEG_INFINITY;
                            let mut grad_x = Vector::zeros(d);
                            for m in family.members() {
                                let p = m.project(&x).expect("dims validated");
                                let res = &x - &p;
                                let dist = res.norm();
                                if dist > max_d {
                                    max_d = dist;
                                    grad_x = if dist > 1e-300 { res / dist } else { Vector::zeros(d) };
                                }
                            }
                            let gz = basis.tr_mul(&grad_x);
                            let eta = 0.4 / ((t + 1) as f64).sqrt();
                            z -= gz * eta;
                            let n = z.norm();
                            if n == 0.0 {
                                break;
                            }
                            z /= n;
                            let f = obj_z(&z);
                            if f < bz.0 {
                                bz = (f, z.clone());
                            }
                        }
                        consider((bz.0, emb(&bz.1)), &mut best);
                    }
                }
            }
        }
    }

    if !best.0.is_finite() {
        return Err(Error::InvalidArgument(
            "estimator found no admissible point (all members zero-rank?)".into(),
        ));
    }
    Ok(RhoEstimate {
        value: best.0,
        witness: best.1.iter().cloned().collect(),
        mode,
        restarts,
        iterations_per_restart: SUBGRADIENT_ITERS,
        seed,
    })
}

/// rho(D) estimation for an explicit dictionary: multi-start minimization of
/// max_g |<x, g>| over the unit sphere; deterministic grid + refinement in
/// the plane. A non-spanning dictionary yields 0 with a normal vector of the
/// atom span as witness.
#[derive(Debug, Clone, Serialize)]
pub struct DictionaryRho {
    pub value: f64,
    pub witness: Vec<f64>,
    pub spanning: bool,
}

pub fn dictionary_rho(dict: &crate::iterates::Dictionary, restarts: usize, seed: u64) -> Result<DictionaryRho> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let d = dict.dim();
    let obj = |x: &Vector| -> f64 {
        dict.atoms()
            .iter()
            .map(|g| g.dot(x).abs())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if !dict.spans(1e-10) {
        let span = crate::hilbert::Subspace::from_spanning(dict.atoms(), d, 1e-10)?;
        let normal = span.complement().basis().column(0).into_owned();
        return Ok(DictionaryRho {
            value: 0.0,
            witness: normal.iter().cloned().collect(),
            spanning: false,
        });
    }
    let mut best: (f64, Vector) = (f64::INFINITY, Vector::zeros(d));
    if d == 2 {
        let (v, x) = grid_min_2d(&obj, GRID_STEP);
        best = (v, x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let mut x = Vector::from_fn(d, |_, _| rng.random::<f64>() - 0.5);
        let n = x.norm();
        if n == 0.0 {
            continue;
        }
        x /= n;
        let mut bl = (obj(&x), x.clone());
        for t in 0..SUBGRADIENT_ITERS {
            let mut max_s = f64::NEG_INFINITY;
            let mut grad = Vector::zeros(d);
            for g in dict.atoms() {
                let c = g.dot(&x);
                if c.abs() > max_s {
                    max_s = c.abs();
                    grad = g * c.signum();
                }
            }
            let eta = 0.4 / ((t + 1) as f64).sqrt();
            x -= grad * eta;
            let n = x.norm();
            if n == 0.0 {
                break;
            }
            x /= n;
            let f = obj(&x);
            if f < bl.0 {
                bl = (f, x.clone());
            }
        }
        if bl.0 < best.0 {
            best = bl;
        }
    }
    Ok(DictionaryRho {
        value: best.0,
        witness: best.1.iter().cloned().collect(),
        spanning: true,
    })
}

/// Certified lower bound on rho(D) for dictionaries in the plane: the
/// objective is 1-Lipschitz in the angle, so the grid minimum minus half the
/// step bounds the true infimum from below.
pub fn dictionary_rho_lower_bound_2d(dict: &crate::iterates::Dictionary, step: f64) -> Result<f64> {
    if dict.dim() != 2 {
        return Err(Error::InvalidArgument(
            "the certified grid lower bound requires ambient dimension 2".into(),
        ));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let n = (std::f64::consts::PI / step).ceil() as usize;
    let mut min = f64::INFINITY;
    for i in 0..=n {
        let x = unit2(i as f64 * step);
        let v = dict
            .atoms()
            .iter()
            .map(|g| g.dot(&x).abs())
            .fold(f64::NEG_INFINITY, f64::max);
        min = min.min(v);
    }
    Ok((min - 0.5 * step).max(0.0))
}

/// The dictionary direction closest to x among unit vectors of the
/// complements: g = P_k^perp x / |P_k^perp x| for the remotest member k,
/// together with the cosine rho(x) = <x, g> / |x|.
#[derive(Debug, Clone)]
pub struct GreedyDirection {
    pub direction: Vector,
    pub rho_x: f64,
    /// Member index (0-based) whose complement contains the direction;
    /// equals the remotest index for x.
    pub achieving_index: usize,
}

pub fn greedy_direction(family: &SubspaceFamily, x: &Vector) -> Result<GreedyDirection> {
    ensure_dim(family.ambient_dim(), x.len())?;
    ensure_finite(x)?;
    let xn = x.norm();
    if xn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let (k, _) = crate::iterates::remotest_choice(family, x)?;
    let p = family.complement(k).project(x)?;
    let pn = p.norm();
    if pn == 0.0 {
        return Err(Error::InvalidArgument(
            "x lies in every member; no greedy direction exists".into(),
        ));
    }
    Ok(GreedyDirection {
        direction: &p / pn,
        rho_x: (pn / xn).clamp(0.0, 1.0),
        achieving_index: k,
    })
}

/// One sweep of the cycle: components v_j = P_j^perp P_{j-1} ... P_1 y and
/// the decay ratio nu(y) = sqrt(sum |v_j|^2) / |y|, which satisfies
/// |Ty|^2 = |y|^2 (1 - nu^2) for the cycle operator T.
#[derive(Debug, Clone)]
pub struct NuDecomposition {
    pub components: Vec<Vector>,
    pub nu: f64,
    /// The vector after the full cycle, T y.
    pub after_cycle: Vector,
}

/// Cycle sweep in the natural member order 1..K.
pub fn nu_decomposition(family: &SubspaceFamily, y: &Vector) -> Result<NuDecomposition> {
    let order: Vec<usize> = (0..family.k()).collect();
    nu_along(family, &order, y)
}

/// Cycle sweep in an explicit member order (for explicit-schedule cycles).
pub fn nu_along(family: &SubspaceFamily, order: &[usize], y: &Vector) -> Result<NuDecomposition> {
    ensure_dim(family.ambient_dim(), y.len())?;
    ensure_finite(y)?;
    let yn = y.norm();
    if yn == 0.0 {
        return Err(Error::ZeroVector);
    }
    if order.is_empty() {
        return Err(Error::InvalidArgument("cycle order must be non-empty".into()));
    }
    if let Some(&bad) = order.iter().find(|&&i| i >= family.k()) {
        return Err(Error::InvalidArgument(format!(
            "cycle order index {bad} out of range for K = {}",
            family.k()
        )));
    }
    let mut w = y.clone();
    let mut components = Vec::with_capacity(order.len());
    let mut sq = 0.0;
    for &j in order {
        let p = family.member(j).project(&w)?;
        let v = &w - &p;
        sq += v.norm_squared();
        components.push(v);
        w = p;
    }
    Ok(NuDecomposition {
        components,
        nu: (sq.sqrt() / yn).min(1.0),
        after_cycle: w,
    })
}

/// Bundle of the family constants with estimation metadata, as serialized
/// by the measurement interface. Witnesses are raw coordinate lists;
/// `zero_rank_members` uses 1-based labels.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityReport {
    pub schema_version: u32,
    pub friedrichs_c: f64,
    pub rho_est: f64,
    pub rho_witness: Vec<f64>,
    pub rho_star_est: f64,
    pub rho_star_witness: Vec<f64>,
    pub zero_rank_members: Vec<usize>,
    pub restarts: usize,
    pub subgradient_iterations: usize,
    pub seed: u64,
}

/// Computes the Friedrichs number and both sphere constants. The restricted
/// witness is fed to the full-sphere search as a candidate, so the reported
/// rho estimate never exceeds the rho* estimate.
pub fn measure(family: &SubspaceFamily, restarts: usize, seed: u64) -> Result<QuantityReport> {
    let c = friedrichs_number(family)?;
    let star = rho_estimate(family, RhoMode::Restricted, restarts, seed)?;
    let star_witness = Vector::from_vec(star.witness.clone());
    let full = rho_estimate_with_candidates(
        family,
        RhoMode::FullSphere,
        restarts,
        seed.wrapping_add(1),
        std::slice::from_ref(&star_witness),
    )?;
    let zero_rank = (0..family.k())
        .filter(|&i| family.member(i).rank() == 0)
        .map(|i| i + 1)
        .collect();
    Ok(QuantityReport {
        schema_version: 1,
        friedrichs_c: c,
        rho_est: full.value,
        rho_witness: full.witness,
        rho_star_est: star.value,
        rho_star_witness: star.witness,
        zero_rank_members: zero_rank,
        restarts,
        subgradient_iterations: SUBGRADIENT_ITERS,
        seed,
    })
}
