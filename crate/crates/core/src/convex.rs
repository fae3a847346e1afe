//! Small concave-maximization kernel over products of trace-capped PSD cones.
//!
//! The surrogate problem for one satellite is
//!
//! ```text
//! maximize   sum_c  f_c(Q) - gbar_c(Q; Q^n)
//! subject to trace(Q_k) <= P,  Q_k ⪰ 0   for every served user k
//! ```
//!
//! where `f_c = B log2(sigma^2 + sum_k h_c^H Q_k h_c)` and `gbar_c` is the
//! first-order expansion of the interference term at the anchor `Q^n`.
//!
//! The objective only sees `Q_k` through `h_c^H Q_k h_c`, so the solver works
//! on the compression `U^H Q_k U` onto an orthonormal basis `U` of the channel
//! span, in units where `sigma^2 = 1`, `P = 1` and `B = 1`. Nothing outside
//! the span changes the objective, and compressing never raises the trace.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::math::{self, LN_2};
use crate::{CMatrix, CVector, C64};

/// Relative Hermitian tolerance accepted by [`psd_project`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Absolute slack on PSD and trace checks (scaled by `max(1, P)`).
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;

/// `‖M - M^H‖_F / ‖M‖_F`, zero for the zero matrix.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / scale
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    SymmetricEigen::new(hermitian_part(m))
}

fn reconstruct(vectors: &CMatrix, values: &[f64]) -> CMatrix {
    let n = vectors.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()) * C64::new(lambda, 0.0);
    }
    out
}

/// Frobenius-nearest PSD matrix: negative eigenvalues are clipped to zero.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix> {
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { asymmetry });
    }
    let eig = eigen(m);
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok(reconstruct(&eig.eigenvectors, &clipped))
}

/// Euclidean projection of `values` onto `{x >= 0, sum x <= cap}`.
pub fn project_capped_simplex(values: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    let mut sorted = clipped.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut shift = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        prefix += v;
        let candidate = (prefix - cap) / (i + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        } else {
            break;
        }
    }
    clipped.iter().map(|v| (v - shift).max(0.0)).collect()
}

/// Projection onto `{X ⪰ 0, trace(X) <= cap}` of the Hermitian part of `m`.
pub fn project_capped_psd(m: &CMatrix, cap: f64) -> CMatrix {
    let eig = eigen(m);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    reconstruct(&eig.eigenvectors, &project_capped_simplex(&values, cap))
}

/// Checks Hermitian, PSD and trace-cap feasibility of one block.
pub fn check_feasible(q: &CMatrix, power: f64) -> core::result::Result<(), &'static str> {
    let slack = FEASIBILITY_TOLERANCE * power.max(1.0);
    if hermitian_asymmetry(q) > HERMITIAN_TOLERANCE {
        return Err("block is not Hermitian");
    }
    if q.trace().re > power + slack {
        return Err("block trace exceeds the power cap");
    }
    let min_eig = eigen(q)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -slack {
        return Err("block is not positive semidefinite");
    }
    Ok(())
}

/// Data of one per-satellite surrogate subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateProblem {
    /// Channels of the served users, in served order.
    pub channels: Vec<CVector>,
    /// Expansion point, one block per served user.
    pub anchor: Vec<CMatrix>,
    pub noise_power: f64,
    pub bandwidth: f64,
    pub power: f64,
}

/// `h^H Q h`, real part.
pub(crate) fn quad_form(h: &CVector, q: &CMatrix) -> f64 {
    h.dotc(&(q * h)).re
}

impl SurrogateProblem {
    pub fn new(
        channels: Vec<CVector>,
        anchor: Vec<CMatrix>,
        noise_power: f64,
        bandwidth: f64,
        power: f64,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptyServedSet);
        }
        if channels.len() != anchor.len() {
            return Err(Error::DimensionMismatch("one anchor block per served user"));
        }
        let n = channels[0].len();
        if channels.iter().any(|h| h.len() != n)
            || anchor.iter().any(|q| q.nrows() != n || q.ncols() != n)
        {
            return Err(Error::DimensionMismatch(
                "channel and anchor sizes disagree",
            ));
        }
        for q in &anchor {
            check_feasible(q, power).map_err(Error::InfeasibleAnchor)?;
        }
        Ok(Self {
            channels,
            anchor,
            noise_power,
            bandwidth,
            power,
        })
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    /// `(total received, interference)` power at each user under `q`.
    pub fn received(&self, q: &[CMatrix]) -> (Vec<f64>, Vec<f64>) {
        let k = self.users();
        let mut total = alloc::vec![0.0; k];
        let mut interference = alloc::vec![0.0; k];
        for (c, h) in self.channels.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                let v = quad_form(h, qj);
                total[c] += v;
                if j != c {
                    interference[c] += v;
                }
            }
        }
        (total, interference)
    }

    fn anchor_interference(&self) -> Vec<f64> {
        self.received(&self.anchor).1
    }

    /// Per-user surrogate values `f_c(Q) - gbar_c(Q; anchor)`.
    pub fn per_user_objective(&self, q: &[CMatrix]) -> Vec<f64> {
        let (total, interference) = self.received(q);
        let anchor = self.anchor_interference();
        let b = self.bandwidth;
        let s2 = self.noise_power;
        (0..self.users())
            .map(|c| {
                let f = b * math::log2(s2 + total[c]);
                let gbar = b * math::log2(anchor[c] + s2)
                    + b * (interference[c] - anchor[c]) / (LN_2 * (anchor[c] + s2));
                f - gbar
            })
            .collect()
    }

    /// Surrogate objective `sum_c f_c(Q) - gbar_c(Q; anchor)`.
    pub fn objective(&self, q: &[CMatrix]) -> f64 {
        self.per_user_objective(q).iter().sum()
    }

    /// Gradient with respect to each block under `<A, B> = Re tr(A^H B)`.
    pub fn gradient(&self, q: &[CMatrix]) -> Vec<CMatrix> {
        let (total, _) = self.received(q);
        let anchor = self.anchor_interference();
        let b = self.bandwidth;
        let s2 = self.noise_power;
        let gain: Vec<f64> = total.iter().map(|t| b / (LN_2 * (s2 + t))).collect();
        let penalty: Vec<f64> = anchor.iter().map(|a| b / (LN_2 * (s2 + a))).collect();
        let n = self.channels[0].len();
        (0..self.users())
            .map(|k| {
                let mut g = CMatrix::zeros(n, n);
                for (c, h) in self.channels.iter().enumerate() {
                    let weight = if c == k {
                        gain[c]
                    } else {
                        gain[c] - penalty[c]
                    };
                    g += (h * h.adjoint()) * C64::new(weight, 0.0);
                }
                g
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative stationarity tolerance on the projected-gradient residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Keep an `(iteration, objective, residual)` log.
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 5000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTracePoint {
    pub iteration: usize,
    /// Surrogate objective in bits/s.
    pub objective: f64,
    pub residual: f64,
}

/// Optimizer output. When `converged` is false, `q` is the best feasible
/// iterate found within the iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSolution {
    pub q: Vec<CMatrix>,
    /// Surrogate objective in bits/s.
    pub objective: f64,
    /// Final projected-gradient residual in normalized units.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<SolverTracePoint>,
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt with one
/// re-orthogonalization pass).
fn span_basis(vectors: &[CVector]) -> Vec<CVector> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&r);
                r -= b * coeff;
            }
        }
        let norm = r.norm();
        if norm > 1e-10 * scale {
            basis.push(r / C64::new(norm, 0.0));
        }
    }
    basis
}

/// Normalized problem on the channel span.
struct Reduced {
    /// `U^H h_c sqrt(P) / sigma`.
    g: Vec<CVector>,
    /// Outer products `g_c g_c^H`.
    outer: Vec<CMatrix>,
    /// Anchor interference over noise.
    anchor: Vec<f64>,
}

impl Reduced {
    fn received(&self, x: &[CMatrix]) -> (Vec<f64>, Vec<f64>) {
        let k = self.g.len();
        let mut total = alloc::vec![0.0; k];
        let mut interference = alloc::vec![0.0; k];
        for (c, g) in self.g.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                let v = quad_form(g, xj);
                total[c] += v;
                if j != c {
                    interference[c] += v;
                }
            }
        }
        (total, interference)
    }

    fn value_and_gradient(&self, x: &[CMatrix]) -> (f64, Vec<CMatrix>) {
        let (total, interference) = self.received(x);
        let mut value = 0.0;
        let mut gain = Vec::with_capacity(total.len());
        let mut penalty = Vec::with_capacity(total.len());
        for c in 0..total.len() {
            let a = self.anchor[c];
            value += math::log2(1.0 + total[c])
                - math::log2(1.0 + a)
                - (interference[c] - a) / (LN_2 * (1.0 + a));
            gain.push(1.0 / (LN_2 * (1.0 + total[c])));
            penalty.push(1.0 / (LN_2 * (1.0 + a)));
        }
        let r = self.g.first().map_or(0, |g| g.len());
        let grad = (0..x.len())
            .map(|k| {
                let mut m = CMatrix::zeros(r, r);
                for c in 0..self.g.len() {
                    let w = if c == k {
                        gain[c]
                    } else {
                        gain[c] - penalty[c]
                    };
                    m += &self.outer[c] * C64::new(w, 0.0);
                }
                m
            })
            .collect();
        (value, grad)
    }
}

fn project_all(x: &[CMatrix]) -> Vec<CMatrix> {
    x.iter().map(|m| project_capped_psd(m, 1.0)).collect()
}

fn inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
}

fn axpy(x: &[CMatrix], t: f64, d: &[CMatrix]) -> Vec<CMatrix> {
    x.iter()
        .zip(d)
        .map(|(a, b)| a + b * C64::new(t, 0.0))
        .collect()
}

fn diff(a: &[CMatrix], b: &[CMatrix]) -> Vec<CMatrix> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn frob(a: &[CMatrix]) -> f64 {
    math::sqrt(a.iter().map(|m| m.norm_squared()).sum())
}

const ARMIJO: f64 = 1e-4;
const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;

/// Maximizes the surrogate with a monotone spectral projected-gradient method
/// (Barzilai-Borwein steps with Armijo backtracking along the projection arc).
///
/// Stops once the unit-step projected-gradient residual, measured in
/// normalized units, falls below `tol * (1 + |F|)`.
pub fn solve_surrogate(
    problem: &SurrogateProblem,
    options: &SolverOptions,
) -> Result<SurrogateSolution> {
    let sigma = math::sqrt(problem.noise_power);
    let amplitude = math::sqrt(problem.power) / sigma;
    let basis = span_basis(&problem.channels);
    let r = basis.len();
    let project_down = |v: &CVector| CVector::from_iterator(r, basis.iter().map(|b| b.dotc(v)));
    let g: Vec<CVector> = problem
        .channels
        .iter()
        .map(|h| project_down(h) * C64::new(amplitude, 0.0))
        .collect();
    let outer = g.iter().map(|v| v * v.adjoint()).collect();
    let anchor_interference = problem.received(&problem.anchor).1;
    let reduced = Reduced {
        g,
        outer,
        anchor: anchor_interference
            .iter()
            .map(|a| a / problem.noise_power)
            .collect(),
    };

    let to_reduced = |q: &CMatrix| -> CMatrix {
        CMatrix::from_fn(r, r, |i, j| basis[i].dotc(&(q * &basis[j])))
            / C64::new(problem.power, 0.0)
    };
    let lift = |x: &CMatrix| -> CMatrix {
        let n = problem.channels[0].len();
        let mut q = CMatrix::zeros(n, n);
        for i in 0..r {
            for j in 0..r {
                q += (&basis[i] * basis[j].adjoint()) * x[(i, j)];
            }
        }
        hermitian_part(&q) * C64::new(problem.power, 0.0)
    };

    let mut x: Vec<CMatrix> = if r == 0 {
        Vec::new()
    } else {
        project_all(&problem.anchor.iter().map(to_reduced).collect::<Vec<_>>())
    };
    let mut trace = Vec::new();
    if r == 0 {
        // All channels vanish: every feasible point is optimal.
        let n = problem.channels[0].len();
        return Ok(SurrogateSolution {
            q: alloc::vec![CMatrix::zeros(n, n); problem.users()],
            objective: problem.objective(&problem.anchor),
            residual: 0.0,
            iterations: 0,
            converged: true,
            trace,
        });
    }

    let (mut value, mut grad) = reduced.value_and_gradient(&x);
    let mut step = {
        let gn = frob(&grad);
        if gn > 0.0 {
            (1.0 / gn).clamp(STEP_MIN, STEP_MAX)
        } else {
            1.0
        }
    };
    let mut residual = frob(&diff(&x, &project_all(&axpy(&x, 1.0, &grad))));
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if options.record_trace {
            trace.push(SolverTracePoint {
                iteration: iterations,
                objective: value * problem.bandwidth,
                residual,
            });
        }
        if residual <= options.tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
        if iterations >= options.max_iters {
            break;
        }
        iterations += 1;

        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = project_all(&axpy(&x, t, &grad));
            let d = diff(&candidate, &x);
            let (cand_value, cand_grad) = reduced.value_and_gradient(&candidate);
            if cand_value >= value + ARMIJO * inner(&grad, &d) {
                accepted = Some((candidate, d, cand_value, cand_grad));
                break;
            }
            t *= 0.5;
        }
        let Some((candidate, d, cand_value, cand_grad)) = accepted else {
            // No ascent possible at machine precision.
            break;
        };
        let y = diff(&cand_grad, &grad);
        let curvature = -inner(&d, &y);
        step = if curvature > 0.0 {
            (inner(&d, &d) / curvature).clamp(STEP_MIN, STEP_MAX)
        } else {
            STEP_MAX
        };
        x = candidate;
        value = cand_value;
        grad = cand_grad;
        residual = frob(&diff(&x, &project_all(&axpy(&x, 1.0, &grad))));
    }

    let q: Vec<CMatrix> = x.iter().map(lift).collect();
    Ok(SurrogateSolution {
        objective: value * problem.bandwidth,
        q,
        residual,
        iterations,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        hermitian_part(&a)
    }

    fn random_feasible(rng: &mut ChaCha8Rng, n: usize, power: f64) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let scale = power * rng.random::<f64>() / m.trace().re;
        m * C64::new(scale, 0.0)
    }

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn psd_project_clips_negative_eigenvalues() {
        let out = psd_project(&diag(&[2.0, -1.0])).unwrap();
        assert!((out - diag(&[2.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn psd_project_is_idempotent_on_psd_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let q = random_feasible(&mut rng, 4, 3.0);
            let out = psd_project(&q).unwrap();
            assert!((&out - &q).norm() <= 1e-12 * q.norm().max(1.0));
        }
    }

    #[test]
    fn psd_project_rejects_non_hermitian() {
        let mut m = diag(&[1.0, 1.0]);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(psd_project(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_projection_variational_inequality() {
        // X* is the projection of M iff <M - X*, Y - X*> <= 0 for every PSD Y.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 4);
            let x = psd_project(&m).unwrap();
            let base = (&m - &x).norm();
            for _ in 0..200 {
                let y = random_feasible(&mut rng, 4, 2.0);
                assert!((&m - &x).dotc(&(&y - &x)).re <= 1e-10);
                for eps in [1e-3, 1e-2, 1e-1] {
                    let near = &x + &y * C64::new(eps, 0.0);
                    assert!((&m - &near).norm() >= base - 1e-12);
                }
            }
        }
    }

    #[test]
    fn capped_simplex_projection() {
        assert_eq!(
            project_capped_simplex(&[0.2, -1.0, 0.3], 1.0),
            alloc::vec![0.2, 0.0, 0.3]
        );
        let p = project_capped_simplex(&[2.0, 1.0, -3.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15 && p[2] == 0.0);
        let p = project_capped_simplex(&[1.0, 1.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_surrogate_hits_the_power_cap() {
        let h = CVector::from_element(1, C64::new(0.3, -0.4));
        let problem = SurrogateProblem::new(
            alloc::vec![h],
            alloc::vec![CMatrix::zeros(1, 1)],
            0.1,
            2.0,
            5.0,
        )
        .unwrap();
        let sol = solve_surrogate(&problem, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.q[0][(0, 0)].re - 5.0).abs() < 1e-8);
        let expected = 2.0 * (1.0f64 + 5.0 * 0.25 / 0.1).log2();
        assert!((problem.objective(&sol.q) - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn single_user_surrogate_matches_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_vector(&mut rng, 2);
            let power = 1.0 + 9.0 * rng.random::<f64>();
            let noise = 0.05 + rng.random::<f64>();
            let problem = SurrogateProblem::new(
                alloc::vec![h.clone()],
                alloc::vec![CMatrix::zeros(2, 2)],
                noise,
                3.0,
                power,
            )
            .unwrap();
            let sol = solve_surrogate(&problem, &SolverOptions::default()).unwrap();
            let hat = &h / C64::new(h.norm(), 0.0);
            let optimum = (&hat * hat.adjoint()) * C64::new(power, 0.0);
            let closed = 3.0 * (1.0 + power * h.norm_squared() / noise).log2();
            assert!((sol.objective - closed).abs() <= 1e-4 * closed);
            assert!((&sol.q[0] - &optimum).norm() <= 1e-3 * power);
        }
    }

    #[test]
    fn infeasible_anchor_is_rejected() {
        let h = CVector::from_element(2, C64::new(1.0, 0.0));
        let too_big = diag(&[3.0, 3.0]);
        assert!(matches!(
            SurrogateProblem::new(alloc::vec![h.clone()], alloc::vec![too_big], 1.0, 1.0, 5.0),
            Err(Error::InfeasibleAnchor(_))
        ));
        let indefinite = diag(&[2.0, -1.0]);
        assert!(matches!(
            SurrogateProblem::new(alloc::vec![h], alloc::vec![indefinite], 1.0, 1.0, 5.0),
            Err(Error::InfeasibleAnchor(_))
        ));
    }

    #[test]
    fn iteration_budget_reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let channels: Vec<CVector> = (0..3).map(|_| random_vector(&mut rng, 4)).collect();
        let anchor: Vec<CMatrix> = (0..3).map(|_| random_feasible(&mut rng, 4, 2.0)).collect();
        let problem = SurrogateProblem::new(channels, anchor, 0.01, 1.0, 2.0).unwrap();
        let opts = SolverOptions {
            tol: 1e-14,
            max_iters: 2,
            record_trace: true,
        };
        let sol = solve_surrogate(&problem, &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
        assert_eq!(sol.trace.len(), 3);
        for q in &sol.q {
            check_feasible(q, 2.0).unwrap();
        }
    }

    fn random_problem(rng: &mut ChaCha8Rng) -> SurrogateProblem {
        let n = 1 + rng.random_range(0..6);
        let k = 1 + rng.random_range(0..3);
        let power = 0.5 + 4.0 * rng.random::<f64>();
        let channels = (0..k).map(|_| random_vector(rng, n)).collect();
        let anchor = (0..k).map(|_| random_feasible(rng, n, power)).collect();
        SurrogateProblem::new(
            channels,
            anchor,
            0.01 + 0.2 * rng.random::<f64>(),
            1.0 + rng.random::<f64>(),
            power,
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn solver_stays_feasible_and_ascends(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let problem = random_problem(&mut rng);
            let sol = solve_surrogate(&problem, &SolverOptions::default()).unwrap();
            for q in &sol.q {
                prop_assert!(hermitian_asymmetry(q) <= HERMITIAN_TOLERANCE);
                prop_assert!(check_feasible(q, problem.power).is_ok());
            }
            let start = problem.objective(&problem.anchor);
            prop_assert!(problem.objective(&sol.q) >= start - 1e-9 * (1.0 + start.abs()));
            let again = solve_surrogate(&problem, &SolverOptions::default()).unwrap();
            prop_assert_eq!(sol, again);
        }

        #[test]
        fn reported_objective_matches_full_space_value(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let problem = random_problem(&mut rng);
            let sol = solve_surrogate(&problem, &SolverOptions::default()).unwrap();
            let full = problem.objective(&sol.q);
            prop_assert!((sol.objective - full).abs() <= 1e-8 * (1.0 + full.abs()));
        }

        #[test]
        fn gradient_matches_central_differences(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let problem = random_problem(&mut rng);
            let n = problem.channels[0].len();
            let point: Vec<CMatrix> = (0..problem.users()).map(|_| random_feasible(&mut rng, n, problem.power)).collect();
            let dir: Vec<CMatrix> = (0..problem.users()).map(|_| random_hermitian(&mut rng, n)).collect();
            let grad = problem.gradient(&point);
            let analytic = inner(&grad, &dir);
            let eps = 1e-6 * problem.power;
            let fd = (problem.objective(&axpy(&point, eps, &dir)) - problem.objective(&axpy(&point, -eps, &dir))) / (2.0 * eps);
            prop_assert!((analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0), "{} vs {}", analytic, fd);
        }
    }
}
