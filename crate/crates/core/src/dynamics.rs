//! Time propagation ρ(t) = e^{Lt} ρ(0) and the stationary state L[ρ∞] = 0.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{stacked_index, unstack, DensityMatrix, Superoperator};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default internal step of the stepped exponential (1 fs).
pub const DEFAULT_STEP_PS: f64 = 1e-3;

/// Condition number above which the spectral propagator is refused.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e12;

/// Strictly increasing sample times in ps, starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.points
    }
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        match points.first() {
            None => return Err(Error::InvalidGrid("empty grid".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidGrid(format!("first point is {t0}, expected 0")))
            }
            _ => {}
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n_steps + 1` evenly spaced points on [0, t_max].
    pub fn uniform(t_max: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid("need t_max > 0 and at least one step".into()));
        }
        Self::new(
            (0..=n_steps)
                .map(|k| t_max * k as f64 / n_steps as f64)
                .collect(),
        )
    }

    /// 0 followed by `n` logarithmically spaced points on [t_min, t_max].
    pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || n < 2 {
            return Err(Error::InvalidGrid("need 0 < t_min < t_max and n >= 2".into()));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let mut points = Vec::with_capacity(n + 1);
        points.push(0.0);
        points.extend((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()));
        Self::new(points)
    }

    /// 200 log-spaced points over [1e-3, 10] ps.
    pub fn default_log() -> Self {
        Self::log_spaced(1e-3, 10.0, 200).expect("constant grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn uniform_spacing(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let dt = self.points[1] - self.points[0];
        let uniform = self
            .points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
        uniform.then_some(dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Eigendecompose L once and evaluate e^{λt} per grid point.
    Spectral,
    /// Scaling-and-squaring exponential of L·h reused over uniform steps.
    SteppedExponential,
    /// Dormand–Prince 5(4) on dρ/dt, relative tolerance 1e-9.
    AdaptiveIntegrator,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is non-empty")
    }
}

/// Evolves `rho0` over `grid` with the requested method.
pub fn propagate(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    method: Method,
) -> Result<Trajectory> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        });
    }
    let d = l.dim();
    let v0 = rho0.to_vec();
    let vecs = match method {
        Method::Spectral => SpectralPropagator::new(l)?.evaluate(&v0, grid.points()),
        Method::SteppedExponential => stepped(l, &v0, grid.points(), DEFAULT_STEP_PS)?,
        Method::AdaptiveIntegrator => dormand_prince(l, &v0, grid.points(), 1e-9, 1e-13)?,
    };
    let mut states = Vec::with_capacity(vecs.len());
    states.push(rho0.clone());
    for v in vecs.iter().skip(1) {
        states.push(DensityMatrix::new(unstack(d, v))?);
    }
    Ok(Trajectory {
        grid: grid.clone(),
        states,
    })
}

/// Spectral propagation, falling back to the stepped exponential when the
/// eigenbasis is ill-conditioned. Returns the method that was used.
pub fn propagate_with_fallback(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<(Trajectory, Method)> {
    match propagate(l, rho0, grid, Method::Spectral) {
        Ok(t) => Ok((t, Method::Spectral)),
        Err(Error::IllConditioned(_)) | Err(Error::Linalg(_)) => {
            propagate(l, rho0, grid, Method::SteppedExponential)
                .map(|t| (t, Method::SteppedExponential))
        }
        Err(e) => Err(e),
    }
}

/// L = V Λ V⁻¹ with the eigenbasis condition number checked.
///
/// L is first split into the connected components of its sparsity pattern
/// (for this model: populations with excited coherences, and the two
/// vacuum-coherence sectors). Each block is decomposed on its own, which
/// keeps the optical frequencies of the vacuum coherences out of the
/// rounding error of the population block.
pub struct SpectralPropagator {
    blocks: Vec<SpectralBlock>,
    values: Vec<Complex64>,
    condition: f64,
    len: usize,
}

struct SpectralBlock {
    indices: Vec<usize>,
    vectors: Mat<Complex64>,
    values: Vec<Complex64>,
    lu: faer::linalg::solvers::PartialPivLu<Complex64>,
}

/// Index sets of the connected components of the nonzero pattern of `m`.
fn components(m: &Mat<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != Complex64::new(0.0, 0.0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..n {
        let r = root(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    groups.into_values().collect()
}

impl SpectralPropagator {
    pub fn new(l: &Superoperator) -> Result<Self> {
        let m = l.matrix();
        let mut blocks = Vec::new();
        let mut values = Vec::with_capacity(m.nrows());
        let mut condition = 1.0f64;
        for indices in components(m) {
            let sub = Mat::from_fn(indices.len(), indices.len(), |i, j| m[(indices[i], indices[j])]);
            let evd = sub
                .eigen()
                .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
            let vectors = evd.U().to_owned();
            let s = evd.S().column_vector();
            let block_values: Vec<Complex64> = (0..s.nrows()).map(|k| s[k]).collect();
            let sv = vectors
                .singular_values()
                .map_err(|e| Error::Linalg(format!("svd failed: {e:?}")))?;
            let smin = *sv.last().unwrap_or(&0.0);
            let c = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
            if !(c <= MAX_EIGENBASIS_CONDITION) {
                return Err(Error::IllConditioned(c));
            }
            condition = condition.max(c);
            values.extend_from_slice(&block_values);
            let lu = vectors.partial_piv_lu();
            blocks.push(SpectralBlock {
                indices,
                vectors,
                values: block_values,
                lu,
            });
        }
        Ok(Self {
            blocks,
            values,
            condition,
            len: m.nrows(),
        })
    }

    /// Largest eigenbasis condition number over the blocks.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.values
    }

    pub fn evaluate(&self, v0: &Col<Complex64>, times: &[f64]) -> Vec<Col<Complex64>> {
        let mut out = vec![Col::<Complex64>::zeros(self.len); times.len()];
        for b in &self.blocks {
            let local = Col::from_fn(b.indices.len(), |k| v0[b.indices[k]]);
            if local.norm_max() == 0.0 {
                continue;
            }
            let coeffs = b.lu.solve(&local);
            for (slot, &t) in out.iter_mut().zip(times) {
                let scaled = Col::from_fn(coeffs.nrows(), |k| coeffs[k] * (b.values[k] * t).exp());
                let part = &b.vectors * &scaled;
                for (k, &idx) in b.indices.iter().enumerate() {
                    slot[idx] = part[k];
                }
            }
        }
        out
    }
}

/// Maximum absolute column sum.
fn norm_one(m: &Mat<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &Mat<Complex64>) -> Result<Mat<Complex64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = norm_one(a);
    if !norm.is_finite() {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let a = a.map(|z| z * scale);
    let ident = Mat::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Mat<Complex64> {
        Mat::from_fn(n, n, |i, j| {
            a6[(i, j)] * c6 + a4[(i, j)] * c4 + a2[(i, j)] * c2 + ident[(i, j)] * c0
        })
    };
    let u_inner = &a6 * lin(B[13], B[11], B[9], 0.0) + lin(B[7], B[5], B[3], B[1]);
    let u = &a * &u_inner;
    let v = &a6 * lin(B[12], B[10], B[8], 0.0) + lin(B[6], B[4], B[2], B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.as_ref().is_all_finite() {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(r)
}

/// e^{A} v by a scaled Taylor series; used for sub-step remainders.
fn expm_action_taylor(a: &Mat<Complex64>, v: &Col<Complex64>, scale: f64) -> Col<Complex64> {
    let pieces = (norm_one(a) * scale).ceil().max(1.0) as usize;
    let h = scale / pieces as f64;
    let mut out = v.clone();
    for _ in 0..pieces {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..60 {
            term = (a * &term).map(|z| z * (h / k as f64));
            acc += &term;
            if term.norm_l2() <= 1e-18 * acc.norm_l2() {
                break;
            }
        }
        out = acc;
    }
    out
}

fn stepped(
    l: &Superoperator,
    v0: &Col<Complex64>,
    times: &[f64],
    max_step: f64,
) -> Result<Vec<Col<Complex64>>> {
    let a = l.matrix();
    let h = match TimeGrid::new(times.to_vec())?.uniform_spacing() {
        Some(dt) => dt / (dt / max_step).ceil(),
        None => max_step,
    };
    let step = expm(&a.map(|z| z * h))?;
    let mut out = Vec::with_capacity(times.len());
    let mut v = v0.clone();
    out.push(v.clone());
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let ratio = gap / h;
        let near = ratio.round();
        let (full, rem) = if (ratio - near).abs() <= 1e-9 * ratio.max(1.0) {
            (near as usize, 0.0)
        } else {
            let f = ratio.floor();
            (f as usize, gap - f * h)
        };
        for _ in 0..full {
            v = &step * &v;
        }
        if rem > 0.0 {
            v = expm_action_taylor(a, &v, rem);
        }
        out.push(v.clone());
    }
    Ok(out)
}

fn dormand_prince(
    l: &Superoperator,
    v0: &Col<Complex64>,
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Col<Complex64>>> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let _ = C;
    let a = l.matrix();
    let n = v0.nrows();
    let f = |v: &Col<Complex64>| -> Col<Complex64> { a * v };
    let mut out = Vec::with_capacity(times.len());
    let mut v = v0.clone();
    out.push(v.clone());
    let mut t = times[0];
    let mut h = (0.01 / norm_one(a).max(1e-300)).min(times.last().copied().unwrap_or(0.0));
    let mut k1 = f(&v);
    let mut steps = 0usize;
    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::Integrator("step budget exhausted".into()));
            }
            let last = t + h >= target;
            let hs = if last { target - t } else { h };
            let mut k: Vec<Col<Complex64>> = Vec::with_capacity(7);
            k.push(k1.clone());
            for stage in 1..7 {
                let mut y = v.clone();
                for (j, kj) in k.iter().enumerate() {
                    let c = A[stage][j];
                    if c != 0.0 {
                        y += kj.map(|z| z * (hs * c));
                    }
                }
                k.push(f(&y));
            }
            let mut y5 = v.clone();
            let mut err = Col::<Complex64>::zeros(n);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5 += k[s].map(|z| z * (hs * B5[s]));
                }
                let e = B5[s] - B4[s];
                if e != 0.0 {
                    err += k[s].map(|z| z * (hs * e));
                }
            }
            let mut ratio = 0.0f64;
            for i in 0..n {
                let sc = atol + rtol * v[i].norm().max(y5[i].norm());
                ratio = ratio.max(err[i].norm() / sc);
            }
            if !ratio.is_finite() {
                return Err(Error::Integrator("non-finite error estimate".into()));
            }
            if ratio <= 1.0 {
                t = if last { target } else { t + hs };
                v = y5;
                k1 = k.pop().expect("seven stages");
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && ratio <= 1.0) {
                h = hs * factor;
            }
            if h < 1e-18 {
                return Err(Error::Integrator("step size underflow".into()));
            }
        }
        out.push(v.clone());
    }
    Ok(out)
}

/// Stationary state of `l` from the trace-augmented square system.
///
/// One population row of L (all of them are linearly dependent through the
/// trace identity) is replaced by the trace row; the row with the smallest
/// norm is chosen. The solution is checked against
/// ‖L·vec ρ‖₂ ≤ 1e-10 ‖L‖_F ‖vec ρ‖₂, and on failure the singular values of L
/// decide between non-uniqueness and a plain residual error.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let d = l.dim();
    let n = d * d;
    let norm_f = l.frobenius_norm();
    let m = l.matrix();
    let replaced = (0..d)
        .map(|k| stacked_index(d, k, k))
        .map(|r| (r, (0..n).map(|j| m[(r, j)].norm_sqr()).sum::<f64>()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(r, _)| r)
        .expect("dim >= 1");
    let row_scale = Complex64::new(norm_f.max(1.0) / n as f64, 0.0);
    let mut aug = m.clone();
    for j in 0..n {
        aug[(replaced, j)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..d {
        aug[(replaced, stacked_index(d, k, k))] = row_scale;
    }
    let mut rhs = Col::<Complex64>::zeros(n);
    rhs[replaced] = row_scale;
    let x = aug.partial_piv_lu().solve(&rhs);

    let residual_ok = |x: &Col<Complex64>| -> (bool, f64, f64) {
        let res = (m * x).norm_l2();
        let bound = 1e-10 * norm_f * x.norm_l2();
        (x.as_ref().is_all_finite() && res <= bound, res, bound)
    };
    let (ok, res, bound) = residual_ok(&x);
    if !ok {
        let (s1, s2) = smallest_singular_values(l)?;
        let threshold = 1e-8 * norm_f;
        if s1 < threshold && s2 < threshold {
            return Err(Error::NonUniqueSteadyState {
                first: s1,
                second: s2,
                threshold,
            });
        }
        return Err(Error::SteadyStateResidual {
            residual: res,
            bound,
        });
    }
    let rho = DensityMatrix::new(unstack(d, &x))?;
    let herm = rho.hermitian_part();
    let tr: f64 = (0..d).map(|k| herm[(k, k)].re).sum();
    DensityMatrix::new(herm.map(|z| z / tr))?.repair()
}

/// Two smallest singular values of L, ascending.
pub fn smallest_singular_values(l: &Superoperator) -> Result<(f64, f64)> {
    let sv = l
        .matrix()
        .singular_values()
        .map_err(|e| Error::Linalg(format!("svd failed: {e:?}")))?;
    let k = sv.len();
    if k < 2 {
        return Ok((sv[0], f64::INFINITY));
    }
    Ok((sv[k - 1], sv[k - 2]))
}

/// Stationary state from the right singular vector of the smallest singular
/// value. Verification path for [`steady_state`]; costs a full SVD.
pub fn nullspace_steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let d = l.dim();
    let svd = l
        .matrix()
        .svd()
        .map_err(|e| Error::Linalg(format!("svd failed: {e:?}")))?;
    let v = svd.V();
    let last = v.ncols() - 1;
    let col = Col::from_fn(v.nrows(), |i| v[(i, last)]);
    let mut m = unstack(d, &col);
    let tr: Complex64 = (0..d).map(|k| m[(k, k)]).sum();
    let inv = ONE / tr;
    m = m.map(|z| z * inv);
    let rho = DensityMatrix::new(m)?;
    DensityMatrix::new(rho.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{apply_liouvillian, build_liouvillian};
    use crate::model::{build_hamiltonian, build_jump_channels, sample_disorder, BasisIndex, ModelParams};

    fn generator(p: &ModelParams, seed: u64) -> Superoperator {
        let r = sample_disorder(p, seed);
        build_liouvillian(&build_hamiltonian(p, &r).unwrap(), &build_jump_channels(p)).unwrap()
    }

    fn decay_only(n: usize) -> ModelParams {
        let mut p = ModelParams::reference(n);
        p.gamma_dephasing = 0.0;
        p.kappa = 0.0;
        p.gamma_in = 0.0;
        p.gamma_out = 0.0;
        p
    }

    fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        let d = a.dim();
        let mut w = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                w = w.max((a.matrix()[(i, j)] - b.matrix()[(i, j)]).norm());
            }
        }
        w
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        let g = TimeGrid::default_log();
        assert_eq!(g.len(), 201);
        assert_eq!(g.points()[0], 0.0);
        assert!((g.points()[1] - 1e-3).abs() < 1e-15);
        assert!((g.points()[200] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn expm_matches_diagonal_and_nilpotent_cases() {
        let mut a = Mat::<Complex64>::zeros(3, 3);
        a[(0, 0)] = Complex64::new(-2.0, 30.0);
        a[(1, 1)] = Complex64::new(0.5, 0.0);
        a[(0, 2)] = Complex64::new(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - a[(0, 0)].exp()).norm() < 1e-12);
        assert!((e[(1, 1)] - a[(1, 1)].exp()).norm() < 1e-12);
        assert!((e[(2, 2)] - ONE).norm() < 1e-14);
        // d/dx block [[λ,1],[0,0]]: (e^λ − 1)/λ
        let lam = a[(0, 0)];
        assert!((e[(0, 2)] - (lam.exp() - ONE) / lam).norm() < 1e-12);
    }

    #[test]
    fn amplitude_damping_all_methods() {
        let p = decay_only(1);
        let l = generator(&p, 0);
        let rho0 = DensityMatrix::basis_state(3, BasisIndex::Site(1));
        let grid = TimeGrid::new(vec![0.0, 0.1, 1.0, 5.0]).unwrap();
        for method in [Method::Spectral, Method::SteppedExponential, Method::AdaptiveIntegrator] {
            let tr = propagate(&l, &rho0, &grid, method).unwrap();
            for (state, &t) in tr.states.iter().zip(grid.points()) {
                let want = (-p.gamma_decay * t).exp();
                let got = state.population(BasisIndex::Site(1));
                assert!((got - want).abs() < 1e-9, "{method:?} t={t}: {got} vs {want}");
                assert!((state.trace().re - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let p = ModelParams::reference(4).with_coupling(0.4).with_disorder(0.2);
        let l = generator(&p, 2);
        let rho0 = DensityMatrix::vacuum(6);
        let whole = propagate(&l, &rho0, &TimeGrid::new(vec![0.0, 0.7]).unwrap(), Method::SteppedExponential).unwrap();
        let first = propagate(&l, &rho0, &TimeGrid::new(vec![0.0, 0.3]).unwrap(), Method::SteppedExponential).unwrap();
        let second = propagate(
            &l,
            first.last(),
            &TimeGrid::new(vec![0.0, 0.4]).unwrap(),
            Method::SteppedExponential,
        )
        .unwrap();
        assert!(max_diff(whole.last(), second.last()) < 1e-8);
    }

    #[test]
    fn vacuum_is_the_dark_steady_state() {
        let mut p = ModelParams::reference(5).with_coupling(0.2);
        p.gamma_in = 0.0;
        let l = generator(&p, 0);
        let rho = steady_state(&l).unwrap();
        assert!(max_diff(&rho, &DensityMatrix::vacuum(7)) < 1e-12);
    }

    #[test]
    fn steady_state_is_stationary_and_unique() {
        let p = ModelParams::reference(6).with_coupling(0.4).with_disorder(0.2);
        let l = generator(&p, 11);
        let rho = steady_state(&l).unwrap();
        let out = apply_liouvillian(&l, &rho).unwrap();
        let worst = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .map(|(i, j)| out[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
        let (s1, s2) = smallest_singular_values(&l).unwrap();
        assert!(s1 < 1e-8 * l.frobenius_norm());
        assert!(s2 > 1e-8 * l.frobenius_norm());
        let alt = nullspace_steady_state(&l).unwrap();
        assert!(max_diff(&rho, &alt) < 1e-9);
    }

    #[test]
    fn degenerate_generator_reports_non_uniqueness() {
        // no dissipation at all: every diagonal state is stationary
        let d = 3;
        let h = Mat::<Complex64>::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let l = build_liouvillian(&h, &[]).unwrap();
        assert!(matches!(
            steady_state(&l),
            Err(Error::NonUniqueSteadyState { .. })
        ));
    }
}
