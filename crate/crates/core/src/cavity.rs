//! Transient incompressible lid-driven cavity solver.
//!
//! Second-order central differences on a uniform collocated grid, explicit
//! time integration with a pressure projection: provisional advect+diffuse
//! step, pressure Poisson solve on the provisional divergence, velocity
//! correction `-(dt/rho) grad p`, then the velocity boundary conditions are
//! re-applied with the current lid velocity.
//!
//! Storage is y-major: node `(i, j)` (column `i` along x, row `j` along y)
//! lives at flat index `j * nx + i`. Snapshot components are ordered
//! `(P, u, v)`.
//!
//! Boundary conditions: `u = lid(t), v = 0` on the top row, no-slip on the
//! other three walls; `p = 0` on the top row, homogeneous Neumann on the
//! remaining walls.

use crate::error::{Error, Result};
use crate::io::FieldSnapshots;
use crate::rbi::{fit_rbi, LoadProfile, RbiInterpolant};

/// Pressure-solve strategy for the projection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonMode {
    /// A fixed number of Jacobi sweeps per projection.
    FixedIterations(usize),
    /// Sweep until the relative residual drops below `tol`, failing after
    /// `max_iter` sweeps.
    Tolerance { tol: f64, max_iter: usize },
}

impl Default for PoissonMode {
    fn default() -> Self {
        PoissonMode::FixedIterations(50)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub rho: f64,
    pub mu: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_snapshots: usize,
    pub poisson: PoissonMode,
}

impl CavityParams {
    /// Full-resolution configuration: 121x41 grid, dt = 2e-4, 10000 steps,
    /// 25 snapshots.
    pub fn reference() -> Self {
        Self {
            lx: 3.0,
            ly: 1.0,
            nx: 121,
            ny: 41,
            rho: 1.0,
            mu: 0.1,
            dt: 2e-4,
            n_steps: 10_000,
            n_snapshots: 25,
            poisson: PoissonMode::default(),
        }
    }

    /// Coarse configuration for quick runs: 61x21 grid.
    pub fn coarse() -> Self {
        Self {
            nx: 61,
            ny: 21,
            dt: 1e-3,
            n_steps: 2_000,
            ..Self::reference()
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        self.lx / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / (self.ny - 1) as f64
    }

    pub fn t_total(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Node coordinates as `[N x 2]` row-major `(x, y)` pairs.
    pub fn coords(&self) -> Vec<f64> {
        let mut coords = Vec::with_capacity(self.n_nodes() * 2);
        for j in 0..self.ny {
            for i in 0..self.nx {
                coords.push(i as f64 * self.dx());
                coords.push(j as f64 * self.dy());
            }
        }
        coords
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::InvalidArgument("grid must be at least 3x3".into()));
        }
        if !(self.dt > 0.0) || !(self.rho > 0.0) || !(self.mu >= 0.0) {
            return Err(Error::InvalidArgument(
                "dt and rho must be positive, mu non-negative".into(),
            ));
        }
        if self.n_snapshots == 0 || self.n_steps == 0 {
            return Err(Error::InvalidArgument(
                "n_steps and n_snapshots must be >= 1".into(),
            ));
        }
        if self.n_steps % self.n_snapshots != 0 {
            return Err(Error::InvalidArgument(format!(
                "n_steps ({}) must be divisible by n_snapshots ({})",
                self.n_steps, self.n_snapshots
            )));
        }
        Ok(())
    }
}

/// Collocated velocity and pressure fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl FlowState {
    pub fn zeros(params: &CavityParams) -> Self {
        let n = params.n_nodes();
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
            p: vec![0.0; n],
            t: 0.0,
        }
    }
}

/// Per-snapshot solver diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotDiagnostics {
    pub step: usize,
    /// Advective CFL number `dt * max|u| / dx`.
    pub cfl: f64,
    pub divergence_norm: f64,
    pub poisson_residual: f64,
}

/// Snapshots plus diagnostics for one simulated case.
#[derive(Debug, Clone)]
pub struct CavityCaseResult {
    pub snapshots: FieldSnapshots,
    pub diagnostics: Vec<SnapshotDiagnostics>,
}

#[inline(always)]
fn ix(j: usize, i: usize, nx: usize) -> usize {
    j * nx + i
}

/// Set `u = lid_u, v = 0` on the top row and no-slip on the other walls.
/// Interior nodes are untouched.
pub fn apply_velocity_bcs(state: &mut FlowState, lid_u: f64, params: &CavityParams) {
    let (nx, ny) = (params.nx, params.ny);
    for j in 0..ny {
        state.u[ix(j, 0, nx)] = 0.0;
        state.v[ix(j, 0, nx)] = 0.0;
        state.u[ix(j, nx - 1, nx)] = 0.0;
        state.v[ix(j, nx - 1, nx)] = 0.0;
    }
    // lid last, so the top corners carry the lid velocity
    for i in 0..nx {
        state.u[ix(0, i, nx)] = 0.0;
        state.v[ix(0, i, nx)] = 0.0;
        state.u[ix(ny - 1, i, nx)] = lid_u;
        state.v[ix(ny - 1, i, nx)] = 0.0;
    }
}

fn apply_pressure_bcs(p: &mut [f64], nx: usize, ny: usize) {
    // Neumann sides first, then bottom, then the Dirichlet top row, so the
    // corner values are well-defined.
    for j in 0..ny {
        p[ix(j, 0, nx)] = p[ix(j, 1, nx)];
        p[ix(j, nx - 1, nx)] = p[ix(j, nx - 2, nx)];
    }
    for i in 0..nx {
        p[ix(0, i, nx)] = p[ix(1, i, nx)];
        p[ix(ny - 1, i, nx)] = 0.0;
    }
}

fn poisson_residual_norms(p: &[f64], rhs: &[f64], params: &CavityParams) -> (f64, f64) {
    let (nx, ny) = (params.nx, params.ny);
    let (dx2, dy2) = (params.dx() * params.dx(), params.dy() * params.dy());
    let mut res_sq = 0.0;
    let mut rhs_sq = 0.0;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            let lap = (p[n + 1] - 2.0 * p[n] + p[n - 1]) / dx2
                + (p[n + nx] - 2.0 * p[n] + p[n - nx]) / dy2;
            let r = lap - rhs[n];
            res_sq += r * r;
            rhs_sq += rhs[n] * rhs[n];
        }
    }
    (res_sq.sqrt(), rhs_sq.sqrt())
}

/// Jacobi relaxation of the pressure Poisson equation under the cavity
/// pressure boundary conditions, warm-started from `state.p`.
///
/// Returns the relative residual (absolute when the right-hand side is zero).
pub fn solve_pressure_poisson(
    state: &mut FlowState,
    rhs: &[f64],
    params: &CavityParams,
) -> Result<f64> {
    let (nx, ny) = (params.nx, params.ny);
    let (dx2, dy2) = (params.dx() * params.dx(), params.dy() * params.dy());
    let denom = 2.0 * (dx2 + dy2);

    apply_pressure_bcs(&mut state.p, nx, ny);
    let mut next = state.p.clone();

    let relative_residual = |p: &[f64]| {
        let (res, rhs_norm) = poisson_residual_norms(p, rhs, params);
        if rhs_norm > 0.0 {
            res / rhs_norm
        } else {
            res
        }
    };

    match params.poisson {
        PoissonMode::FixedIterations(k) => {
            for _ in 0..k {
                jacobi_sweep(&state.p, &mut next, rhs, nx, ny, dx2, dy2, denom);
                std::mem::swap(&mut state.p, &mut next);
            }
            Ok(relative_residual(&state.p))
        }
        PoissonMode::Tolerance { tol, max_iter } => {
            let mut residual = relative_residual(&state.p);
            if residual <= tol {
                return Ok(residual);
            }
            for _ in 0..max_iter {
                jacobi_sweep(&state.p, &mut next, rhs, nx, ny, dx2, dy2, denom);
                std::mem::swap(&mut state.p, &mut next);
                residual = relative_residual(&state.p);
                if residual <= tol {
                    return Ok(residual);
                }
            }
            Err(Error::PoissonNoConvergence {
                tol,
                max_iter,
                residual,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn jacobi_sweep(
    p: &[f64],
    next: &mut [f64],
    rhs: &[f64],
    nx: usize,
    ny: usize,
    dx2: f64,
    dy2: f64,
    denom: f64,
) {
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            next[n] = ((p[n + 1] + p[n - 1]) * dy2 + (p[n + nx] + p[n - nx]) * dx2
                - rhs[n] * dx2 * dy2)
                / denom;
        }
    }
    apply_pressure_bcs(next, nx, ny);
}

/// L2 norm of the central-difference divergence over interior nodes.
pub fn divergence_norm(state: &FlowState, params: &CavityParams) -> f64 {
    let (nx, ny) = (params.nx, params.ny);
    let (dx, dy) = (params.dx(), params.dy());
    let mut sum = 0.0;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            let div = (state.u[n + 1] - state.u[n - 1]) / (2.0 * dx)
                + (state.v[n + nx] - state.v[n - nx]) / (2.0 * dy);
            sum += div * div;
        }
    }
    sum.sqrt()
}

/// Advance one explicit time step; returns the Poisson residual.
pub fn step(state: &mut FlowState, lid_u: f64, params: &CavityParams) -> Result<f64> {
    let (nx, ny) = (params.nx, params.ny);
    let (dx, dy) = (params.dx(), params.dy());
    let (dx2, dy2) = (dx * dx, dy * dy);
    let (dt, rho, mu) = (params.dt, params.rho, params.mu);

    // Provisional advect+diffuse step; boundaries carry the old values.
    let mut u_star = state.u.clone();
    let mut v_star = state.v.clone();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            let (u, v) = (state.u[n], state.v[n]);
            let du_dx = (state.u[n + 1] - state.u[n - 1]) / (2.0 * dx);
            let du_dy = (state.u[n + nx] - state.u[n - nx]) / (2.0 * dy);
            let dv_dx = (state.v[n + 1] - state.v[n - 1]) / (2.0 * dx);
            let dv_dy = (state.v[n + nx] - state.v[n - nx]) / (2.0 * dy);
            let lap_u = (state.u[n + 1] - 2.0 * u + state.u[n - 1]) / dx2
                + (state.u[n + nx] - 2.0 * u + state.u[n - nx]) / dy2;
            let lap_v = (state.v[n + 1] - 2.0 * v + state.v[n - 1]) / dx2
                + (state.v[n + nx] - 2.0 * v + state.v[n - nx]) / dy2;
            u_star[n] = u + dt * (mu * lap_u - (u * du_dx + v * du_dy));
            v_star[n] = v + dt * (mu * lap_v - (u * dv_dx + v * dv_dy));
        }
    }

    // Poisson source from the provisional divergence.
    let mut rhs = vec![0.0; nx * ny];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            rhs[n] = (rho / dt)
                * ((u_star[n + 1] - u_star[n - 1]) / (2.0 * dx)
                    + (v_star[n + nx] - v_star[n - nx]) / (2.0 * dy));
        }
    }

    state.u = u_star;
    state.v = v_star;
    let residual = solve_pressure_poisson(state, &rhs, params)?;

    // Divergence-removing correction.
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            state.u[n] -= dt / rho * (state.p[n + 1] - state.p[n - 1]) / (2.0 * dx);
            state.v[n] -= dt / rho * (state.p[n + nx] - state.p[n - nx]) / (2.0 * dy);
        }
    }

    apply_velocity_bcs(state, lid_u, params);
    state.t += dt;

    for field in [&state.u, &state.v, &state.p] {
        if field.iter().any(|x| !x.is_finite()) {
            let step_idx = (state.t / dt).round() as usize;
            return Err(Error::Diverged {
                t: state.t,
                step: step_idx,
                case: String::new(),
            });
        }
    }
    Ok(residual)
}

/// Run a full transient with the lid velocity supplied per step time.
///
/// Snapshots are recorded at steps `k * (n_steps / S)`, `k = 1..=S`; the
/// all-zero initial state is not stored.
pub fn run_cavity_with(
    params: &CavityParams,
    mut lid: impl FnMut(f64) -> Result<f64>,
) -> Result<CavityCaseResult> {
    params.validate()?;
    let stride = params.n_steps / params.n_snapshots;
    let n = params.n_nodes();
    let mut state = FlowState::zeros(params);
    let mut snapshots = FieldSnapshots::zeros(params.n_snapshots, n, 3);
    let mut diagnostics = Vec::with_capacity(params.n_snapshots);

    for k in 0..params.n_steps {
        let t_next = (k + 1) as f64 * params.dt;
        let lid_u = lid(t_next)?;
        let residual = step(&mut state, lid_u, params)?;
        if (k + 1) % stride == 0 {
            let snap = (k + 1) / stride - 1;
            for node in 0..n {
                *snapshots.at_mut(snap, node, 0) = state.p[node];
                *snapshots.at_mut(snap, node, 1) = state.u[node];
                *snapshots.at_mut(snap, node, 2) = state.v[node];
            }
            let max_u = state
                .u
                .iter()
                .chain(state.v.iter())
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            diagnostics.push(SnapshotDiagnostics {
                step: k + 1,
                cfl: params.dt * max_u / params.dx().min(params.dy()),
                divergence_norm: divergence_norm(&state, params),
                poisson_residual: residual,
            });
        }
    }
    Ok(CavityCaseResult {
        snapshots,
        diagnostics,
    })
}

/// Simulate one sampled load case, evaluating the smooth lid profile at every
/// step time.
pub fn run_cavity_case(profile: &LoadProfile, params: &CavityParams) -> Result<CavityCaseResult> {
    let interp: RbiInterpolant = fit_rbi(&profile.control)?;
    let horizon = params.t_total();
    let t_max = profile.t_total();
    if horizon > t_max * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "profile covers [0, {t_max}] but the run needs [0, {horizon}]"
        )));
    }
    run_cavity_with(params, |t| interp.eval(t.min(t_max)))
}
