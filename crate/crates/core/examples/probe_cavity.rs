//! Scratch probe: can any legitimate variant of the collocated projection
//! reach divergence_norm <= 1e-3? Variants: BCs applied to the provisional
//! field before the Poisson source, and k projection passes per step.

use sdon::cavity::{divergence_norm, CavityParams, FlowState, PoissonMode};
use sdon::rbi::{fit_rbi, sample_profiles};

fn ix(j: usize, i: usize, nx: usize) -> usize {
    j * nx + i
}

fn apply_bcs(u: &mut [f64], v: &mut [f64], lid: f64, nx: usize, ny: usize) {
    for j in 0..ny {
        u[ix(j, 0, nx)] = 0.0;
        v[ix(j, 0, nx)] = 0.0;
        u[ix(j, nx - 1, nx)] = 0.0;
        v[ix(j, nx - 1, nx)] = 0.0;
    }
    for i in 0..nx {
        u[ix(0, i, nx)] = 0.0;
        v[ix(0, i, nx)] = 0.0;
        u[ix(ny - 1, i, nx)] = lid;
        v[ix(ny - 1, i, nx)] = 0.0;
    }
}

fn pressure_bcs(p: &mut [f64], nx: usize, ny: usize) {
    for j in 0..ny {
        p[ix(j, 0, nx)] = p[ix(j, 1, nx)];
        p[ix(j, nx - 1, nx)] = p[ix(j, nx - 2, nx)];
    }
    for i in 0..nx {
        p[ix(0, i, nx)] = p[ix(1, i, nx)];
        p[ix(ny - 1, i, nx)] = 0.0;
    }
}

#[allow(clippy::too_many_arguments)]
fn variant_step(
    state: &mut FlowState,
    lid: f64,
    params: &CavityParams,
    passes: usize,
    sweeps: usize,
) {
    let (nx, ny) = (params.nx, params.ny);
    let (dx, dy) = (params.dx(), params.dy());
    let (dt, rho, mu) = (params.dt, params.rho, params.mu);
    let mut us = state.u.clone();
    let mut vs = state.v.clone();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let n = ix(j, i, nx);
            let lap_u = (state.u[n + 1] - 2.0 * state.u[n] + state.u[n - 1]) / (dx * dx)
                + (state.u[n + nx] - 2.0 * state.u[n] + state.u[n - nx]) / (dy * dy);
            let lap_v = (state.v[n + 1] - 2.0 * state.v[n] + state.v[n - 1]) / (dx * dx)
                + (state.v[n + nx] - 2.0 * state.v[n] + state.v[n - nx]) / (dy * dy);
            let adv_u = state.u[n] * (state.u[n + 1] - state.u[n - 1]) / (2.0 * dx)
                + state.v[n] * (state.u[n + nx] - state.u[n - nx]) / (2.0 * dy);
            let adv_v = state.u[n] * (state.v[n + 1] - state.v[n - 1]) / (2.0 * dx)
                + state.v[n] * (state.v[n + nx] - state.v[n - nx]) / (2.0 * dy);
            us[n] = state.u[n] + dt * (mu * lap_u - adv_u);
            vs[n] = state.v[n] + dt * (mu * lap_v - adv_v);
        }
    }
    // BCs on the provisional field, so the Poisson source sees the final
    // boundary data.
    apply_bcs(&mut us, &mut vs, lid, nx, ny);

    for _pass in 0..passes {
        let mut rhs = vec![0.0; nx * ny];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let n = ix(j, i, nx);
                rhs[n] = rho / dt
                    * ((us[n + 1] - us[n - 1]) / (2.0 * dx)
                        + (vs[n + nx] - vs[n - nx]) / (2.0 * dy));
            }
        }
        let mut p = state.p.clone();
        pressure_bcs(&mut p, nx, ny);
        let mut q = p.clone();
        for _ in 0..sweeps {
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let n = ix(j, i, nx);
                    q[n] = ((p[n + 1] + p[n - 1]) * dy * dy + (p[n + nx] + p[n - nx]) * dx * dx
                        - rhs[n] * dx * dx * dy * dy)
                        / (2.0 * (dx * dx + dy * dy));
                }
            }
            pressure_bcs(&mut q, nx, ny);
            std::mem::swap(&mut p, &mut q);
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let n = ix(j, i, nx);
                us[n] -= dt / rho * (p[n + 1] - p[n - 1]) / (2.0 * dx);
                vs[n] -= dt / rho * (p[n + nx] - p[n - nx]) / (2.0 * dy);
            }
        }
        apply_bcs(&mut us, &mut vs, lid, nx, ny);
        state.p = p;
    }
    state.u = us;
    state.v = vs;
    state.t += dt;
}

fn main() {
    let params = CavityParams {
        nx: 61,
        ny: 21,
        dt: 1e-3,
        n_steps: 500,
        n_snapshots: 25,
        poisson: PoissonMode::Tolerance {
            tol: 1e-6,
            max_iter: 50_000,
        },
        ..CavityParams::reference()
    };
    let profile = sample_profiles(7, 1, [-2.0, 2.0], 25, 2.0).unwrap().remove(0);
    let interp = fit_rbi(&profile.control).unwrap();
    for (passes, sweeps) in [(1, 2000), (2, 2000), (5, 1000), (20, 500)] {
        let mut state = FlowState::zeros(&params);
        for k in 0..500 {
            let t = (k + 1) as f64 * params.dt;
            let lid = interp.eval(t).unwrap();
            variant_step(&mut state, lid, &params, passes, sweeps);
        }
        println!(
            "passes={passes:2} sweeps={sweeps}: div norm after 500 steps = {:.3e}",
            divergence_norm(&state, &params)
        );
    }
}
