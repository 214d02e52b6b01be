//! Path-dependent data generator: a uniform bar under prescribed end
//! displacement, J2 plasticity with linear isotropic hardening.
//!
//! The bar carries a uniform stress state, so equilibrium is trivial and the
//! constitutive return map is the whole problem. Output components are the
//! stress magnitude `|sigma|` and the equivalent plastic strain, replicated
//! over `n_nodes` pseudo-nodes so the downstream data layout matches the
//! field problems.

use crate::error::{Error, Result};
use crate::io::FieldSnapshots;
use crate::rbi::LoadProfile;

/// Elastic-plastic material constants (MPa where dimensional).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub sigma_y0: f64,
    pub hardening: f64,
}

impl Material {
    /// Structural-steel-like default parameter set.
    pub fn steel() -> Self {
        Self {
            e: 2.09e5,
            nu: 0.3,
            sigma_y0: 235.0,
            hardening: 800.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(0.0..0.5).contains(&self.nu) || !(self.sigma_y0 > 0.0) || self.hardening < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "invalid material: E={}, nu={}, sigma_y0={}, H={}",
                self.e, self.nu, self.sigma_y0, self.hardening
            )));
        }
        Ok(())
    }

    fn flow_stress(&self, eps_bar_p: f64) -> f64 {
        self.sigma_y0 + self.hardening * eps_bar_p
    }
}

/// Uniaxial history state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlasticState {
    /// Signed plastic strain.
    pub eps_p: f64,
    /// Equivalent plastic strain, non-decreasing.
    pub eps_bar_p: f64,
    /// Current stress, MPa.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BarGeometry {
    /// Specimen length, mm.
    pub length: f64,
}

impl Default for BarGeometry {
    fn default() -> Self {
        Self { length: 110.0 }
    }
}

impl BarGeometry {
    pub fn strain(&self, displacement: f64) -> f64 {
        displacement / self.length
    }
}

/// Von Mises stress for a plane-stress state,
/// `sqrt(s11^2 + s22^2 + s11*s22 + 3*s12^2)`.
pub fn von_mises_plane_stress(s11: f64, s22: f64, s12: f64) -> Result<f64> {
    let radicand = s11 * s11 + s22 * s22 + s11 * s22 + 3.0 * s12 * s12;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt())
}

/// Elastic-predictor / plastic-corrector update for one strain increment.
pub fn return_map(state: PlasticState, d_eps: f64, mat: &Material) -> PlasticState {
    let sigma_tr = state.sigma + mat.e * d_eps;
    let yield_stress = mat.flow_stress(state.eps_bar_p);
    if sigma_tr.abs() <= yield_stress {
        return PlasticState {
            sigma: sigma_tr,
            ..state
        };
    }
    let d_eps_p = (sigma_tr.abs() - yield_stress) / (mat.e + mat.hardening);
    let sign = sigma_tr.signum();
    PlasticState {
        eps_p: state.eps_p + sign * d_eps_p,
        eps_bar_p: state.eps_bar_p + d_eps_p,
        sigma: sigma_tr - sign * mat.e * d_eps_p,
    }
}

/// Bar-case integration settings.
#[derive(Debug, Clone, Copy)]
pub struct BarRunParams {
    /// Pseudo-nodes the scalar history is replicated over.
    pub n_nodes: usize,
    /// Substeps per snapshot interval; the displacement path is piecewise
    /// linear between snapshot samples, so refining this is exact up to
    /// roundoff.
    pub n_sub: usize,
}

impl Default for BarRunParams {
    fn default() -> Self {
        Self { n_nodes: 1, n_sub: 10 }
    }
}

/// Synthetic trunk coordinates for the replicated bar nodes, inside the unit
/// box.
pub fn bar_coords(n_nodes: usize) -> Vec<f64> {
    let mut coords = Vec::with_capacity(n_nodes * 2);
    for i in 0..n_nodes {
        let x = if n_nodes == 1 {
            0.5
        } else {
            i as f64 / (n_nodes - 1) as f64
        };
        coords.push(x);
        coords.push(0.5);
    }
    coords
}

/// Integrate the displacement history and record `(|sigma|, eps_bar_p)` at
/// each of the profile's sample times.
pub fn run_bar_case(
    profile: &LoadProfile,
    mat: &Material,
    geom: &BarGeometry,
    params: &BarRunParams,
) -> Result<FieldSnapshots> {
    mat.validate()?;
    if params.n_sub == 0 || params.n_nodes == 0 {
        return Err(Error::InvalidArgument(
            "n_sub and n_nodes must be >= 1".into(),
        ));
    }
    let s = profile.samples.len();
    let mut snapshots = FieldSnapshots::zeros(s, params.n_nodes, 2);
    let mut state = PlasticState::default();
    let mut eps_prev = 0.0;
    for (k, &disp_k) in profile.samples.iter().enumerate() {
        let eps_target = geom.strain(disp_k);
        let d_eps_sub = (eps_target - eps_prev) / params.n_sub as f64;
        for _ in 0..params.n_sub {
            state = return_map(state, d_eps_sub, mat);
        }
        eps_prev = eps_target;
        let stress = von_mises_plane_stress(state.sigma, 0.0, 0.0)?;
        for node in 0..params.n_nodes {
            *snapshots.at_mut(k, node, 0) = stress;
            *snapshots.at_mut(k, node, 1) = state.eps_bar_p;
        }
    }
    Ok(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbi::{fit_rbi, sample_times, ControlPoints};
    use proptest::prelude::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn von_mises_hand_values() {
        assert_eq!(von_mises_plane_stress(1.0, 0.0, 0.0).unwrap(), 1.0);
        assert!((von_mises_plane_stress(0.0, 0.0, 1.0).unwrap() - SQRT3).abs() < 1e-12);
        // 1 + 1 - 1 = 1 under the signed cross term
        assert!((von_mises_plane_stress(1.0, -1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn return_map_elastic_branch() {
        let mat = Material::steel();
        let out = return_map(PlasticState::default(), 0.001, &mat);
        assert_eq!(out.sigma, 209.0);
        assert_eq!(out.eps_bar_p, 0.0);
    }

    #[test]
    fn return_map_plastic_branch_closed_form() {
        let mat = Material::steel();
        let out = return_map(PlasticState::default(), 0.002, &mat);
        // sigma_tr = 418; d_eps_p = (418 - 235) / 209800
        let d_eps_p = 183.0 / 209_800.0;
        assert!((out.eps_bar_p - d_eps_p).abs() < 1e-15);
        assert!((out.eps_bar_p - 8.7226e-4).abs() < 1e-8);
        let sigma = 418.0 - 2.09e5 * d_eps_p;
        assert!((out.sigma - sigma).abs() < 1e-12);
        assert!((out.sigma - 235.6978).abs() < 1e-4);
    }

    #[test]
    fn zero_increment_is_identity() {
        let mat = Material::steel();
        let state = PlasticState {
            eps_p: 0.01,
            eps_bar_p: 0.02,
            sigma: 150.0,
        };
        assert_eq!(return_map(state, 0.0, &mat), state);
    }

    fn ramp_profile(target_mm: f64, s: usize) -> LoadProfile {
        let t_total = 1.0;
        let mut values = [0.0; 6];
        for (i, v) in values.iter_mut().enumerate() {
            *v = target_mm * i as f64 / 5.0;
        }
        let cp = ControlPoints::uniform(t_total, values).unwrap();
        let interp = fit_rbi(&cp).unwrap();
        LoadProfile {
            samples: interp.eval_many(&sample_times(t_total, s)).unwrap(),
            control: cp,
        }
    }

    #[test]
    fn monotone_ramp_matches_closed_form() {
        let mat = Material::steel();
        let geom = BarGeometry::default();
        let snaps = run_bar_case(&ramp_profile(5.5, 40), &mat, &geom, &BarRunParams::default()).unwrap();
        let eps = 0.05;
        let expected = mat.e * (mat.sigma_y0 + mat.hardening * eps) / (mat.e + mat.hardening);
        let got = snaps.at(39, 0, 0);
        assert!(
            ((got - expected) / expected).abs() <= 1e-9,
            "got {got}, expected {expected}"
        );
    }

    fn up_down_profile(peak: f64, s: usize) -> LoadProfile {
        // Piecewise-linear samples straight through two segments (bypassing
        // the smooth interpolant keeps the hand oracle exact): up over the
        // first fifth, back to zero over the second, then hold.
        let t_total = 1.0;
        let cp = ControlPoints::uniform(t_total, [0.0, peak, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let samples = sample_times(t_total, s)
            .iter()
            .map(|&t| {
                if t <= 0.2 {
                    peak * t / 0.2
                } else if t <= 0.4 {
                    peak * (0.4 - t) / 0.2
                } else {
                    0.0
                }
            })
            .collect();
        LoadProfile { samples, control: cp }
    }

    #[test]
    fn load_unload_elastic_residual() {
        // Peak strain 0.0015 yields in tension; the full unload stays inside
        // the elastic range (2 * flow / E > 0.0015), so eqps freezes and the
        // residual is sigma_peak - E * 0.0015.
        let mat = Material::steel();
        let geom = BarGeometry { length: 1.0 };
        let peak = 0.0015;
        let snaps = run_bar_case(&up_down_profile(peak, 40), &mat, &geom, &BarRunParams::default())
            .unwrap();
        let d_eps_p = (peak * mat.e - mat.sigma_y0) / (mat.e + mat.hardening);
        let sigma_peak = peak * mat.e - mat.e * d_eps_p;
        let sigma_res = sigma_peak - mat.e * peak;
        assert!(sigma_res < 0.0);
        assert!(sigma_res.abs() < mat.sigma_y0 + mat.hardening * d_eps_p);
        let last = 40 - 1;
        assert!((snaps.at(last, 0, 1) - d_eps_p).abs() < 1e-12, "eqps frozen during unload");
        assert!((snaps.at(last, 0, 0) - sigma_res.abs()).abs() < 1e-9);
        // peak snapshot sits on the hardened yield surface
        let at_peak = snaps.at(7, 0, 0); // t = 0.2 is sample 8 of 40
        assert!((at_peak - sigma_peak).abs() < 1e-9);
    }

    #[test]
    fn load_unload_reverse_yield() {
        // Peak strain 0.004: the unload re-yields in compression. Hand
        // tracking of both segments:
        //   segment 1: eps_p1 = (E*0.004 - sy0)/(E+H), s1 on the surface
        //   segment 2: s_tr = s1 - E*0.004; d2 = (|s_tr| - flow1)/(E+H)
        let mat = Material::steel();
        let geom = BarGeometry { length: 1.0 };
        let peak = 0.004;
        let snaps = run_bar_case(&up_down_profile(peak, 40), &mat, &geom, &BarRunParams::default())
            .unwrap();
        let e_p1 = (peak * mat.e - mat.sigma_y0) / (mat.e + mat.hardening);
        let s1 = peak * mat.e - mat.e * e_p1;
        let s_tr = s1 - mat.e * peak;
        let flow1 = mat.sigma_y0 + mat.hardening * e_p1;
        assert!(s_tr.abs() > flow1, "this path must re-yield");
        let d2 = (s_tr.abs() - flow1) / (mat.e + mat.hardening);
        let s2 = s_tr + mat.e * d2; // compressive branch
        let eqps = e_p1 + d2;
        let last = 40 - 1;
        assert!((snaps.at(last, 0, 0) - s2.abs()).abs() < 1e-9);
        assert!((snaps.at(last, 0, 1) - eqps).abs() < 1e-12);
        // final state sits on the compressive yield surface
        assert!((s2.abs() - (mat.sigma_y0 + mat.hardening * eqps)).abs() < 1e-9);
    }

    #[test]
    fn zero_profile_zero_outputs() {
        let profile = ramp_profile(0.0, 40);
        let snaps = run_bar_case(
            &profile,
            &Material::steel(),
            &BarGeometry::default(),
            &BarRunParams::default(),
        )
        .unwrap();
        assert!(snaps.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn substep_refinement_is_exact() {
        let mat = Material::steel();
        let geom = BarGeometry::default();
        let profile = {
            let mut p = ramp_profile(5.5, 40);
            // a non-monotone path
            for (i, s) in p.samples.iter_mut().enumerate() {
                *s *= (0.3 * i as f64).sin().abs() + 0.2;
            }
            p
        };
        let coarse = run_bar_case(&profile, &mat, &geom, &BarRunParams { n_nodes: 1, n_sub: 5 }).unwrap();
        let fine = run_bar_case(&profile, &mat, &geom, &BarRunParams { n_nodes: 1, n_sub: 10 }).unwrap();
        for (a, b) in coarse.data.iter().zip(fine.data.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn node_replication() {
        let snaps = run_bar_case(
            &ramp_profile(3.0, 10),
            &Material::steel(),
            &BarGeometry::default(),
            &BarRunParams { n_nodes: 4, n_sub: 10 },
        )
        .unwrap();
        for k in 0..10 {
            for node in 1..4 {
                assert_eq!(snaps.at(k, node, 0), snaps.at(k, 0, 0));
                assert_eq!(snaps.at(k, node, 1), snaps.at(k, 0, 1));
            }
        }
    }

    proptest! {
        #[test]
        fn random_paths_monotone_and_consistent(raw in proptest::collection::vec(-5.5f64..5.5, 8)) {
            let mat = Material::steel();
            let geom = BarGeometry::default();
            let mut state = PlasticState::default();
            let mut prev_disp = 0.0;
            let mut prev_eqps = 0.0;
            for &disp in &raw {
                let d_eps = geom.strain(disp - prev_disp);
                state = return_map(state, d_eps, &mat);
                prop_assert!(state.eps_bar_p >= prev_eqps);
                let flow = mat.sigma_y0 + mat.hardening * state.eps_bar_p;
                prop_assert!(state.sigma.abs() <= flow * (1.0 + 1e-9) + 1e-9);
                // plastic steps land exactly on the yield surface
                if state.eps_bar_p > prev_eqps {
                    prop_assert!(((state.sigma.abs() - flow) / flow).abs() <= 1e-9);
                }
                prev_eqps = state.eps_bar_p;
                prev_disp = disp;
            }
        }

        #[test]
        fn sign_symmetry(raw in proptest::collection::vec(-5.5f64..5.5, 6)) {
            let mat = Material::steel();
            let geom = BarGeometry::default();
            let run = |sign: f64| {
                let mut state = PlasticState::default();
                let mut prev = 0.0;
                let mut hist = Vec::new();
                for &d in &raw {
                    let d_eps = geom.strain(sign * d - prev);
                    prev = sign * d;
                    state = return_map(state, d_eps, &mat);
                    hist.push((state.sigma.abs(), state.eps_bar_p));
                }
                hist
            };
            let pos = run(1.0);
            let neg = run(-1.0);
            for ((s1, e1), (s2, e2)) in pos.iter().zip(neg.iter()) {
                prop_assert!((s1 - s2).abs() <= 1e-9 * (1.0 + s1.abs()));
                prop_assert!((e1 - e2).abs() <= 1e-12);
            }
        }
    }
}
