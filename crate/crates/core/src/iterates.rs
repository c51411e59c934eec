//! Projection engines: cyclic (alternating), remotest, and greedy over
//! finite dictionaries. Each run produces a [`Trajectory`] record.
//!
//! Index conventions: in-memory indices are 0-based throughout; serialized
//! artifacts (CSV, JSON) carry 1-based subspace labels matching the usual
//! mathematical naming L_1..L_K.
//!
//! Deep decay: engines rescale the working vector by an exact power of two
//! whenever its norm drops below 2^-332, so index decisions and recorded
//! norms stay accurate far below the naive squared-norm underflow threshold
//! (~1e-154). Recorded values equal the unscaled ones bit for bit while
//! they remain representable.

use std::io::Write;

use serde_json::json;

use crate::error::{Error, Result};
use crate::hilbert::{ensure_dim, ensure_finite, qr_rank, Matrix, SubspaceFamily, Vector};

/// Relative tolerance for tie-breaking a non-unique remotest index:
/// the lowest index among all members whose distance is within
/// `REMOTEST_TIE_TOL * |x|` of the maximum wins.
pub const REMOTEST_TIE_TOL: f64 = 1e-12;

/// Default early-stop threshold; small enough to permit deep-decay studies.
pub const DEFAULT_STOP_NORM: f64 = 1e-300;

const RESCALE_LIMIT: f64 = 1.0e-100;
const RESCALE_LOG2: i32 = 332;

/// Which subspace to project onto at each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// k_n = n mod K.
    Cyclic,
    /// Project onto the member farthest from the current iterate.
    Remotest,
    /// A fixed schedule of 0-based member indices, cycled when shorter
    /// than the run.
    Explicit(Vec<usize>),
}

impl Policy {
    fn describe(&self) -> String {
        match self {
            Policy::Cyclic => "cyclic".to_string(),
            Policy::Remotest => "remotest".to_string(),
            Policy::Explicit(s) => {
                let labels: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
                format!("explicit[{}]", labels.join(","))
            }
        }
    }
}

/// Knobs for a single run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Stop once the recorded norm is at or below this value.
    pub stop_norm: f64,
    /// Keep the full iterate vectors (norms, indices, and step distances
    /// are always kept). Disable for very long runs.
    pub store_iterates: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stop_norm: DEFAULT_STOP_NORM,
            store_iterates: true,
        }
    }
}

/// Ordered record of a run: norms |x_n|, chosen indices, per-step distances,
/// and (optionally) the iterates themselves.
///
/// `indices[n]` and `step_dists[n]` describe the step that produced
/// `norms[n + 1]`. For projection runs they are member indices; for
/// explicit-dictionary greedy runs they are atom indices.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub norms: Vec<f64>,
    pub indices: Vec<usize>,
    pub step_dists: Vec<f64>,
    pub iterates: Option<Vec<Vector>>,
    /// Steps per cycle for cyclic/explicit runs (K or schedule length).
    pub cycle_len: Option<usize>,
    /// Set when the run halted because the norm left the normal f64 range.
    pub subnormal_flagged: bool,
    /// Which engine produced the record ("cyclic", "remotest",
    /// "explicit[..]", "greedy").
    pub engine: String,
    /// Fingerprint of the family the run was produced on; 0 for
    /// explicit-dictionary greedy runs.
    pub family_fingerprint: u64,
}

impl Trajectory {
    /// Number of steps taken (= number of recorded indices).
    pub fn steps(&self) -> usize {
        self.indices.len()
    }

    /// Norms sampled at whole cycles: entry j is |x_{j * cycle_len}|, the
    /// norm after j applications of the full cycle operator.
    pub fn per_cycle_norms(&self) -> Option<Vec<f64>> {
        self.cycle_len
            .map(|k| self.norms.iter().copied().step_by(k).collect())
    }

    /// Iterates sampled at whole cycles (requires stored iterates).
    pub fn per_cycle_iterates(&self) -> Option<Vec<&Vector>> {
        match (self.cycle_len, &self.iterates) {
            (Some(k), Some(xs)) => Some(xs.iter().step_by(k).collect()),
            _ => None,
        }
    }

    /// CSV with header `n,norm,index,step_dist`; the index and step
    /// distance on row n belong to the step that produced x_n, so they are
    /// empty on row 0. Indices are written 1-based.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,norm,index,step_dist")?;
        writeln!(w, "0,{},,", self.norms[0])?;
        for n in 1..self.norms.len() {
            writeln!(
                w,
                "{},{},{},{}",
                n,
                self.norms[n],
                self.indices[n - 1] + 1,
                self.step_dists[n - 1]
            )?;
        }
        Ok(())
    }

    /// JSON record with run metadata; indices are 1-based, iterates are
    /// not included.
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "policy": self.engine,
            "family_fingerprint": format!("{:016x}", self.family_fingerprint),
            "tolerances": {
                "remotest_tie_rel": REMOTEST_TIE_TOL,
            },
            "subnormal_flagged": self.subnormal_flagged,
            "cycle_len": self.cycle_len,
            "norms": self.norms,
            "indices": self.indices.iter().map(|i| i + 1).collect::<Vec<usize>>(),
            "step_dists": self.step_dists,
        })
    }
}

/// A finite dictionary: unit vectors in R^d.
#[derive(Debug, Clone)]
pub struct Dictionary {
    atoms: Vec<Vector>,
    dim: usize,
}

impl Dictionary {
    /// Validates unit norms (within 1e-12) and consistent dimensions.
    pub fn new(atoms: Vec<Vector>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("dictionary must be non-empty".into()));
        }
        let dim = atoms[0].len();
        for a in &atoms {
            ensure_dim(dim, a.len())?;
            ensure_finite(a)?;
            if (a.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "dictionary atom has norm {} (must be 1)",
                    a.norm()
                )));
            }
        }
        Ok(Self { atoms, dim })
    }

    pub fn standard_basis(d: usize) -> Self {
        let atoms = (0..d)
            .map(|i| {
                let mut v = Vector::zeros(d);
                v[i] = 1.0;
                v
            })
            .collect();
        Self { atoms, dim: d }
    }

    pub fn atoms(&self) -> &[Vector] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether the atoms span R^d at rank tolerance `tol`.
    pub fn spans(&self, tol: f64) -> bool {
        qr_rank(&Matrix::from_columns(&self.atoms), tol) == self.dim
    }
}

/// Input to the greedy engine: an explicit atom list, or a subspace family
/// standing for the (continuum) dictionary of unit vectors in the union of
/// its complements.
#[derive(Debug, Clone, Copy)]
pub enum GreedySource<'a> {
    Atoms(&'a Dictionary),
    Complements(&'a SubspaceFamily),
}

/// The remotest member for `x`: argmax over k of dist(x, L_k), plus all K
/// distances. Ties resolve to the lowest index within
/// [`REMOTEST_TIE_TOL`] * |x| of the maximum; x = 0 yields index 0.
pub fn remotest_choice(family: &SubspaceFamily, x: &Vector) -> Result<(usize, Vec<f64>)> {
    ensure_dim(family.ambient_dim(), x.len())?;
    ensure_finite(x)?;
    let (k, dists, _) = remotest_step(family, x)?;
    Ok((k, dists))
}

/// Distances to every member, the tie-broken argmax, and the projection of
/// `x` onto the winning member (reused by the engines so that selection and
/// application share one arithmetic path).
fn remotest_step(family: &SubspaceFamily, x: &Vector) -> Result<(usize, Vec<f64>, Vector)> {
    let mut dists = Vec::with_capacity(family.k());
    let mut projs = Vec::with_capacity(family.k());
    for m in family.members() {
        let p = m.project(x)?;
        dists.push((x - &p).norm());
        projs.push(p);
    }
    let max = dists.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie = REMOTEST_TIE_TOL * x.norm();
    let k = dists
        .iter()
        .position(|&d| d >= max - tie)
        .expect("nonempty family");
    let proj = projs.swap_remove(k);
    Ok((k, dists, proj))
}

fn descale(v: f64, chunks: u32) -> f64 {
    let f = 2.0_f64.powi(-RESCALE_LOG2);
    let mut r = v;
    for _ in 0..chunks {
        r *= f;
    }
    r
}

struct Recorder {
    norms: Vec<f64>,
    indices: Vec<usize>,
    step_dists: Vec<f64>,
    iterates: Option<Vec<Vector>>,
    chunks: u32,
    subnormal: bool,
    stop_norm: f64,
}

impl Recorder {
    fn new(x0: &Vector, opts: &RunOptions) -> Self {
        let mut r = Self {
            norms: Vec::new(),
            indices: Vec::new(),
            step_dists: Vec::new(),
            iterates: opts.store_iterates.then(Vec::new),
            chunks: 0,
            subnormal: false,
            stop_norm: opts.stop_norm,
        };
        r.norms.push(x0.norm());
        if let Some(it) = &mut r.iterates {
            it.push(x0.clone());
        }
        r
    }

    /// Records one step; returns false when the run should halt. May rescale
    /// `x` in place (exact power-of-two scaling).
    fn record(&mut self, x: &mut Vector, k: usize, dist_scaled: f64) -> bool {
        let scaled_norm = x.norm();
        let norm = descale(scaled_norm, self.chunks);
        self.indices.push(k);
        self.step_dists.push(descale(dist_scaled, self.chunks));
        self.norms.push(norm);
        if let Some(it) = &mut self.iterates {
            it.push(x.map(|v| descale(v, self.chunks)));
        }
        if norm == 0.0 && scaled_norm > 0.0 {
            // true value fell below the representable range
            self.subnormal = true;
            return false;
        }
        if norm > 0.0 && !norm.is_normal() {
            self.subnormal = true;
            return false;
        }
        if norm <= self.stop_norm {
            return false;
        }
        let factor = 2.0_f64.powi(RESCALE_LOG2);
        let mut s = scaled_norm;
        while s > 0.0 && s < RESCALE_LIMIT {
            *x *= factor;
            s *= factor;
            self.chunks += 1;
        }
        true
    }

    fn finish(self, engine: String, cycle_len: Option<usize>, fp: u64) -> Trajectory {
        Trajectory {
            norms: self.norms,
            indices: self.indices,
            step_dists: self.step_dists,
            iterates: self.iterates,
            cycle_len,
            subnormal_flagged: self.subnormal,
            engine,
            family_fingerprint: fp,
        }
    }
}

/// Runs one projection per step under the given policy. Stops early when
/// the norm reaches `opts.stop_norm` or leaves the normal f64 range (the
/// latter flags the trajectory).
pub fn run(
    family: &SubspaceFamily,
    x0: &Vector,
    policy: &Policy,
    n_steps: usize,
    opts: RunOptions,
) -> Result<Trajectory> {
    ensure_dim(family.ambient_dim(), x0.len())?;
    ensure_finite(x0)?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
    }
    if opts.stop_norm < 0.0 || !opts.stop_norm.is_finite() {
        return Err(Error::InvalidArgument("stop_norm must be >= 0".into()));
    }
    let cycle_len = match policy {
        Policy::Cyclic => Some(family.k()),
        Policy::Remotest => None,
        Policy::Explicit(s) => {
            if s.is_empty() {
                return Err(Error::InvalidArgument("explicit schedule must be non-empty".into()));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= family.k()) {
                return Err(Error::InvalidArgument(format!(
                    "schedule index {bad} out of range for K = {}",
                    family.k()
                )));
            }
            Some(s.len())
        }
    };

    let mut x = x0.clone();
    let mut rec = Recorder::new(&x, &opts);
    for n in 0..n_steps {
        let (k, dist, proj) = match policy {
            Policy::Cyclic => {
                let k = n % family.k();
                let p = family.member(k).project(&x)?;
                let dist = (&x - &p).norm();
                (k, dist, p)
            }
            Policy::Explicit(s) => {
                let k = s[n % s.len()];
                let p = family.member(k).project(&x)?;
                let dist = (&x - &p).norm();
                (k, dist, p)
            }
            Policy::Remotest => {
                let (k, dists, p) = remotest_step(family, &x)?;
                (k, dists[k], p)
            }
        };
        x = proj;
        if !rec.record(&mut x, k, dist) {
            break;
        }
    }
    Ok(rec.finish(policy.describe(), cycle_len, family.fingerprint()))
}

/// Greedy residual reduction. Each step subtracts the best single-atom
/// approximation: x_{n+1} = x_n - <x_n, g> g for the atom g maximizing
/// |<x_n, g>| (ties: lowest atom index). `step_dists` records |<x_n, g>|.
///
/// `weakness` holds weak-greedy parameters t_k in (0, 1], cycled when
/// shorter than the run; empty means the pure algorithm. The chosen atom is
/// always the overall max-scorer (which passes any threshold), so the
/// selection is deterministic; the parameters matter to rate certificates.
///
/// For [`GreedySource::Complements`] the step coincides with the remotest
/// projection step, and the run shares the remotest engine's arithmetic
/// path, so the two produce identical trajectories bit for bit.
pub fn greedy_run(
    source: GreedySource<'_>,
    x0: &Vector,
    weakness: &[f64],
    n_steps: usize,
    opts: RunOptions,
) -> Result<Trajectory> {
    if let Some(&t) = weakness.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "weakness parameter {t} outside (0, 1]"
        )));
    }
    match source {
        GreedySource::Complements(family) => run(family, x0, &Policy::Remotest, n_steps, opts),
        GreedySource::Atoms(dict) => {
            ensure_dim(dict.dim(), x0.len())?;
            ensure_finite(x0)?;
            if n_steps == 0 {
                return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
            }
            let mut x = x0.clone();
            let mut rec = Recorder::new(&x, &opts);
            for _ in 0..n_steps {
                let mut best = 0usize;
                let mut best_score = f64::NEG_INFINITY;
                let mut best_coef = 0.0;
                for (i, g) in dict.atoms().iter().enumerate() {
                    let c = g.dot(&x);
                    if c.abs() > best_score {
                        best_score = c.abs();
                        best_coef = c;
                        best = i;
                    }
                }
                x -= dict.atoms()[best].clone() * best_coef;
                if !rec.record(&mut x, best, best_score) {
                    break;
                }
            }
            let label = if weakness.is_empty() { "greedy" } else { "weak-greedy" };
            Ok(rec.finish(label.to_string(), None, 0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coordinate_axes, Subspace};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    fn four_lines(eps: f64) -> SubspaceFamily {
        let gens = [
            vec2(1.0, 0.0),
            vec2(0.0, 1.0),
            vec2(1.0, 1.0),
            vec2(1.0, eps - 1.0),
        ];
        SubspaceFamily::new(gens.iter().map(|v| Subspace::line(v).unwrap()).collect()).unwrap()
    }

    #[test]
    fn remotest_choice_axes() {
        let f = coordinate_axes(2).unwrap();
        let (k, dists) = remotest_choice(&f, &vec2(1.0, 2.0)).unwrap();
        assert_eq!(k, 0); // dist to the x-axis (member 1) is 2 > 1
        assert!((dists[0] - 2.0).abs() < 1e-12);
        assert!((dists[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn remotest_choice_zero_vector_tie_breaks_low() {
        let f = coordinate_axes(2).unwrap();
        let (k, dists) = remotest_choice(&f, &vec2(0.0, 0.0)).unwrap();
        assert_eq!(k, 0);
        assert_eq!(dists, vec![0.0, 0.0]);
    }

    #[test]
    fn remotest_choice_four_lines_from_diagonal() {
        let f = four_lines(0.1);
        let (k, _) = remotest_choice(&f, &vec2(1.0, 1.0)).unwrap();
        assert_eq!(k, 3); // L4 is remotest for elements of L3
    }

    #[test]
    fn remotest_run_orthogonal_axes_annihilates_in_two_steps() {
        let f = coordinate_axes(2).unwrap();
        let t = run(&f, &vec2(1.0, 2.0), &Policy::Remotest, 2, RunOptions::default()).unwrap();
        let it = t.iterates.as_ref().unwrap();
        assert_eq!(it[1], vec2(1.0, 0.0));
        assert_eq!(it[2], vec2(0.0, 0.0));
        assert_eq!(t.norms[2], 0.0);
    }

    #[test]
    fn four_lines_explicit_12_kills_in_one_cycle() {
        let f = four_lines(0.1);
        let t = run(
            &f,
            &vec2(1.0, 1.0),
            &Policy::Explicit(vec![0, 1]),
            4,
            RunOptions::default(),
        )
        .unwrap();
        assert_eq!(t.norms[2], 0.0); // P2 P1 x0 = 0 exactly
        assert_eq!(t.cycle_len, Some(2));
    }

    #[test]
    fn four_lines_remotest_alternates_4_3_forever() {
        let f = four_lines(0.1);
        let t = run(&f, &vec2(1.0, 1.0), &Policy::Remotest, 100, RunOptions::default()).unwrap();
        assert_eq!(t.steps(), 100);
        for (n, &idx) in t.indices.iter().enumerate() {
            assert_eq!(idx, if n % 2 == 0 { 3 } else { 2 });
        }
        assert!(t.norms.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn greedy_standard_basis_strips_largest_coordinate() {
        let d = Dictionary::standard_basis(3);
        let x0 = Vector::from_vec(vec![3.0, 2.0, 1.0]);
        let t = greedy_run(GreedySource::Atoms(&d), &x0, &[], 3, RunOptions::default()).unwrap();
        let it = t.iterates.as_ref().unwrap();
        assert_eq!(it[1], Vector::from_vec(vec![0.0, 2.0, 1.0]));
        assert_eq!(it[2], Vector::from_vec(vec![0.0, 0.0, 1.0]));
        assert_eq!(it[3], Vector::from_vec(vec![0.0, 0.0, 0.0]));
    }

    #[test]
    fn greedy_two_atoms_brute_force_agrees() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let atoms = vec![vec2(1.0, 0.0), vec2(s, s)];
        let d = Dictionary::new(atoms.clone()).unwrap();
        let x0 = vec2(0.0, 1.0);

        // brute force over both atoms
        let scores: Vec<f64> = atoms.iter().map(|g| g.dot(&x0).abs()).collect();
        let best = if scores[0] >= scores[1] { 0 } else { 1 };
        assert_eq!(best, 1);

        let t = greedy_run(GreedySource::Atoms(&d), &x0, &[], 1, RunOptions::default()).unwrap();
        assert_eq!(t.indices[0], 1);
        let x1 = &t.iterates.as_ref().unwrap()[1];
        assert!((x1 - vec2(-0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn greedy_on_complements_coincides_with_remotest_bit_for_bit() {
        let f = coordinate_axes(2).unwrap();
        let x0 = vec2(1.0, 2.0);
        let a = run(&f, &x0, &Policy::Remotest, 5, RunOptions::default()).unwrap();
        let b = greedy_run(GreedySource::Complements(&f), &x0, &[], 5, RunOptions::default()).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.norms, b.norms);
        assert_eq!(a.iterates.unwrap(), b.iterates.unwrap());
    }

    #[test]
    fn monotone_norms_and_pythagoras_on_random_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let f = crate::constructions::random_family(4, 3, &mut rng).unwrap();
            let x0 = Vector::from_fn(4, |_, _| rng.random::<f64>() - 0.5);
            let policy = match trial % 3 {
                0 => Policy::Cyclic,
                1 => Policy::Remotest,
                _ => Policy::Explicit(vec![2, 0, 1]),
            };
            let t = run(&f, &x0, &policy, 40, RunOptions::default()).unwrap();
            for n in 0..t.steps() {
                assert!(t.norms[n + 1] <= t.norms[n] * (1.0 + 1e-12));
                let lhs = t.norms[n + 1].powi(2) + t.step_dists[n].powi(2);
                let rhs = t.norms[n].powi(2);
                if rhs > 0.0 {
                    assert!((lhs - rhs).abs() <= 1e-9 * rhs);
                }
            }
        }
    }

    #[test]
    fn membership_in_complement_sum_is_preserved_by_projections() {
        // Two planes of R^3 sharing the z-axis: their complements span only
        // the xy-plane, so Y is a proper subspace of the ambient model.
        // Projections must keep vectors of Y inside Y.
        let v = |a, b, c| Vector::from_vec(vec![a, b, c]);
        let s1 = Subspace::from_spanning(&[v(1.0, 0.0, 0.0), v(0.0, 0.0, 1.0)], 3, 1e-10).unwrap();
        let s2 = Subspace::from_spanning(&[v(1.0, 1.0, 0.0), v(0.0, 0.0, 1.0)], 3, 1e-10).unwrap();
        let y_span = Subspace::from_spanning(
            &[s1.complement().basis().column(0).into_owned(), s2.complement().basis().column(0).into_owned()],
            3,
            1e-10,
        )
        .unwrap();
        assert_eq!(y_span.rank(), 2);
        let mut x = y_span.project(&v(0.3, -0.7, 0.9)).unwrap();
        for step in 0..30 {
            let s = if step % 2 == 0 { &s1 } else { &s2 };
            x = s.project(&x).unwrap();
            assert!(y_span.distance(&x).unwrap() < 1e-8);
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let f = coordinate_axes(2).unwrap();
        let x0 = vec2(1.0, 1.0);
        assert!(run(&f, &x0, &Policy::Explicit(vec![]), 3, RunOptions::default()).is_err());
        assert!(run(&f, &x0, &Policy::Explicit(vec![5]), 3, RunOptions::default()).is_err());
        assert!(run(&f, &Vector::zeros(3), &Policy::Cyclic, 3, RunOptions::default()).is_err());
        let d = Dictionary::standard_basis(2);
        assert!(greedy_run(GreedySource::Atoms(&d), &x0, &[1.5], 3, RunOptions::default()).is_err());
        assert!(Dictionary::new(vec![]).is_err());
        assert!(Dictionary::new(vec![vec2(2.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_layout_matches_contract() {
        let f = coordinate_axes(2).unwrap();
        let t = run(&f, &vec2(1.0, 2.0), &Policy::Remotest, 2, RunOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,norm,index,step_dist");
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",,"));
        assert!(lines[2].starts_with("1,1,1,")); // |x_1| = 1, applied member label 1
    }
}
