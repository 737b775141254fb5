use nalgebra::{DMatrix, DVector};

use super::{
    Discretization, FluidParams, SolverConfig, SolverError, SpaceTimeState, TimeStepControl,
};
use crate::kernels::{convective_residual, ElementMatrices};
use crate::linsys::{
    bicgstab_solve, cg_solve, BlockJacobi, BlockSparseMatrix, ConstantMode, KrylovReport,
};
use crate::real::{Real, Vec2};

/// `dt = CFL / (2p + 1) * h_min / s_max`.
pub fn cfl_time_step<T: Real>(cfl: T, p: usize, h_min: T, s_max: T) -> T {
    cfl / T::from_usize_lossy(2 * p + 1) * h_min / s_max
}

/// Maximum of `2 max(|v_a . n|, |v_b . n|)` over the trace nodes of every
/// dual interface, for end-of-slab velocities.
pub fn max_signal_speed<T: Real>(disc: &Discretization<T>, velocity: &[Vec<T>; 2]) -> T {
    let n = disc.order.n_psi();
    let mut s_max = T::zero();
    for seg in &disc.matrices.segments {
        let [qa, qb] = seg.elements;
        for (&ka, &kb) in seg.nodes[0].iter().zip(&seg.nodes[1]) {
            let va = Vec2::new(velocity[0][qa * n + ka], velocity[1][qa * n + ka]);
            let vb = Vec2::new(velocity[0][qb * n + kb], velocity[1][qb * n + kb]);
            let s = T::lit(2.0) * va.dot(&seg.normal).abs().max(vb.dot(&seg.normal).abs());
            s_max = s_max.max(s);
        }
    }
    s_max
}

/// CFL step from the end-of-slab velocity of `state`, clamped so that
/// `state.t_end + dt` does not pass `t_final`. Updates `control`.
pub fn compute_timestep<T: Real>(
    disc: &Discretization<T>,
    state: &SpaceTimeState<T>,
    control: &mut TimeStepControl<T>,
    t_final: T,
) -> T {
    control.s_max = max_signal_speed(disc, &state.end_velocity());
    let mut dt = if control.s_max > T::zero() {
        cfl_time_step(control.cfl, disc.order.p, control.h_min, control.s_max).min(control.dt_max)
    } else {
        control.dt_max
    };
    let remaining = t_final - state.t_end;
    if dt >= remaining {
        dt = remaining;
    }
    control.dt = dt;
    dt
}

pub(crate) fn pressure_operator<T: Real>(
    matrices: &ElementMatrices<T>,
    n_triangles: usize,
    n_phi: usize,
) -> BlockSparseMatrix<T> {
    let mut blocks = Vec::new();
    for (q, adj) in matrices.gradient.iter().enumerate() {
        let minv = &matrices.mass_inverse[q];
        for a in adj {
            for b in adj {
                let mut blk = DMatrix::zeros(n_phi, n_phi);
                for c in 0..2 {
                    blk += a.blocks[c].transpose() * minv * &b.blocks[c];
                }
                blocks.push((a.triangle, b.triangle, blk));
            }
        }
    }
    BlockSparseMatrix::from_blocks(n_triangles, n_triangles, n_phi, blocks)
}

/// Pressure system for the potential `q` of one temporal node:
/// `(G^T M^{-1} G) q = G^T v* = -D v*`.
///
/// Returns the operator and one right-hand side per temporal node
/// (`n_phi` per triangle each).
pub fn assemble_pressure_system<T: Real>(
    disc: &Discretization<T>,
    predictor: &SpaceTimeState<T>,
) -> (BlockSparseMatrix<T>, Vec<Vec<T>>) {
    let rhs = (0..disc.order.n_gamma())
        .map(|l| {
            disc.matrices
                .apply_divergence(&predictor.velocity_node(l))
                .into_iter()
                .map(|x| -x)
                .collect()
        })
        .collect();
    (disc.pressure_matrix().clone(), rhs)
}

fn apply_mass_inverse<T: Real>(
    matrices: &ElementMatrices<T>,
    g: &[[Vec<T>; 2]],
) -> Vec<[Vec<T>; 2]> {
    g.iter()
        .enumerate()
        .map(|(q, gc)| {
            std::array::from_fn(|c| {
                let v = &matrices.mass_inverse[q] * DVector::from_column_slice(&gc[c]);
                v.as_slice().to_vec()
            })
        })
        .collect()
}

/// Subtract `M^{-1} G q_l` from temporal node `l` of `velocity`.
fn correct_with_potential<T: Real>(
    disc: &Discretization<T>,
    velocity: &mut [Vec<T>; 2],
    potential: &[Vec<T>],
) {
    let (n_psi, ng, n_phi) = (disc.order.n_psi(), disc.order.n_gamma(), disc.order.n_phi());
    for (l, q_l) in potential.iter().enumerate() {
        let corr = apply_mass_inverse(&disc.matrices, &disc.matrices.apply_gradient(q_l, n_phi));
        for (q, cq) in corr.iter().enumerate() {
            for c in 0..2 {
                let base = (q * ng + l) * n_psi;
                for k in 0..n_psi {
                    velocity[c][base + k] -= cq[c][k];
                }
            }
        }
    }
}

fn split_nodes<T: Real>(x: &[T], n: usize, ng: usize) -> Vec<Vec<T>> {
    (0..ng)
        .map(|l| {
            x.chunks(n * ng)
                .flat_map(|b| b[l * n..(l + 1) * n].to_vec())
                .collect()
        })
        .collect()
}

fn merge_nodes<T: Real>(nodes: &[Vec<T>], n: usize) -> Vec<T> {
    let n_blocks = nodes[0].len() / n;
    (0..n_blocks)
        .flat_map(|b| {
            nodes
                .iter()
                .flat_map(move |x| x[b * n..(b + 1) * n].to_vec())
        })
        .collect()
}

fn time_mix<T: Real>(w: &DMatrix<T>, nodes: &[Vec<T>]) -> Vec<Vec<T>> {
    (0..w.nrows())
        .map(|m| {
            let mut out = vec![T::zero(); nodes[0].len()];
            for (l, x) in nodes.iter().enumerate() {
                let c = w[(m, l)];
                out.iter_mut().zip(x).for_each(|(o, xi)| *o += c * *xi);
            }
            out
        })
        .collect()
}

/// `nu M_p^{-1} r` for the pressure right-hand side `r = -D v*` of one
/// temporal node.
///
/// The pressure system only sees the mass part of the momentum operator;
/// this term stands in for the viscous part of the Schur complement. It
/// vanishes once `D v* = 0`, so the Picard fixed point is unchanged.
fn viscous_pressure_part<T: Real>(disc: &Discretization<T>, nu: T, rhs: &[T]) -> Vec<T> {
    let n_phi = disc.order.n_phi();
    if nu == T::zero() {
        return vec![T::zero(); rhs.len()];
    }
    let inv = disc
        .tensors
        .triangle_mass
        .clone()
        .try_inverse()
        .expect("reference mass is SPD");
    let mut out = Vec::with_capacity(rhs.len());
    for (t, map) in disc.geom.triangles.iter().enumerate() {
        let r = DVector::from_column_slice(&rhs[t * n_phi..(t + 1) * n_phi]);
        let x = &inv * r * (nu / map.det.abs());
        out.extend(x.iter().copied());
    }
    out
}

/// Velocity correction `v = v* - (dt K_t^{-1} M_t (x) M^{-1} G) dp` for a
/// pressure increment `dp` in the state layout.
pub fn velocity_correction<T: Real>(
    disc: &Discretization<T>,
    predictor: &[Vec<T>; 2],
    delta_p: &[T],
) -> [Vec<T>; 2] {
    let (n_phi, ng) = (disc.order.n_phi(), disc.order.n_gamma());
    let potential = time_mix(disc.time_weight(), &split_nodes(delta_p, n_phi, ng));
    let mut v = predictor.clone();
    correct_with_potential(disc, &mut v, &potential);
    v
}

/// Momentum predictor of one Picard iteration.
///
/// Solves `(K_t (x) M + dt M_t (x) V) v* = gamma(0) (x) M v_prev
/// - dt (M_t (x) I) (C(v_k) + G p_k - M S)` per velocity component, where
/// `v_prev` holds the previous slab's end values, `C` is the convective
/// operator of the current iterate and `p_k` its pressure.
pub fn momentum_predictor<T: Real>(
    disc: &Discretization<T>,
    params: &FluidParams<T>,
    previous_end: &[Vec<T>; 2],
    iterate: &SpaceTimeState<T>,
    config: &SolverConfig,
) -> Result<([Vec<T>; 2], [KrylovReport; 2]), SolverError> {
    let order = disc.order;
    let (n_psi, ng, n_phi) = (order.n_psi(), order.n_gamma(), order.n_phi());
    let bs = order.n_psi_st();
    let n_el = disc.n_elements();
    let m = &disc.matrices;
    let dt = m.dt;
    let tensors = &disc.tensors;

    // forcing per temporal node: -C(v_l) - G p_l + M S_l
    let mut forcing: Vec<Vec<[Vec<T>; 2]>> = Vec::with_capacity(ng);
    for (l, tau) in disc.basis.temporal.nodes().iter().enumerate() {
        let v_l = iterate.velocity_node(l);
        let mut f = convective_residual(tensors, m, &v_l);
        let gp = m.apply_gradient(&iterate.pressure_node(l), n_phi);
        for (fq, gq) in f.iter_mut().zip(&gp) {
            for c in 0..2 {
                fq[c]
                    .iter_mut()
                    .zip(&gq[c])
                    .for_each(|(a, b)| *a = -*a - *b);
            }
        }
        if let Some(source) = &params.source {
            let t = iterate.t_start + *tau * dt;
            for (q, fq) in f.iter_mut().enumerate() {
                let s: Vec<Vec2<T>> = (0..n_psi)
                    .map(|k| source(Vec2::new(v_l[q][0][k], v_l[q][1][k]), disc.nodes[q][k], t))
                    .collect();
                for c in 0..2 {
                    let sc = DVector::from_iterator(n_psi, s.iter().map(|v| v[c]));
                    let ms = &m.mass[q] * sc;
                    fq[c].iter_mut().zip(ms.iter()).for_each(|(a, b)| *a += *b);
                }
            }
        }
        forcing.push(f);
    }

    let pre = BlockJacobi::new(&m.spacetime)?;
    let mut out: [Vec<T>; 2] = [Vec::new(), Vec::new()];
    let mut reports = [KrylovReport {
        iterations: 0,
        relative_residual: 0.0,
        converged: true,
    }; 2];
    for c in 0..2 {
        let mut rhs = vec![T::zero(); n_el * bs];
        for q in 0..n_el {
            let mv = &m.mass[q]
                * DVector::from_column_slice(&previous_end[c][q * n_psi..(q + 1) * n_psi]);
            for mm in 0..ng {
                let row = &mut rhs[q * bs + mm * n_psi..q * bs + (mm + 1) * n_psi];
                let g0 = tensors.time_start[mm];
                for k in 0..n_psi {
                    let mut acc = g0 * mv[k];
                    for l in 0..ng {
                        acc += dt * tensors.time_mass[(mm, l)] * forcing[l][q][c][k];
                    }
                    row[k] = acc;
                }
            }
        }
        let (x, report) = bicgstab_solve(
            &m.spacetime,
            &rhs,
            Some(&iterate.velocity[c]),
            &pre,
            T::lit(config.momentum_tol),
            config.max_iter,
        )?;
        report.into_result("momentum BiCGStab")?;
        out[c] = x;
        reports[c] = report;
    }
    Ok((out, reports))
}

/// Diagnostics of one slab.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepReport {
    pub t_start: f64,
    pub dt: f64,
    /// Max-norm change of the velocity coefficients per Picard iteration.
    pub picard_changes: Vec<f64>,
    /// `max_l |D v_l|_inf` after the last correction.
    pub divergence: f64,
    pub momentum_iterations: usize,
    pub pressure_iterations: usize,
}

/// Advance `state` by one slab of length `dt` with the configured number of
/// Picard iterations.
pub fn advance_time_step<T: Real>(
    disc: &mut Discretization<T>,
    params: &FluidParams<T>,
    state: &SpaceTimeState<T>,
    dt: T,
    config: &SolverConfig,
) -> Result<(SpaceTimeState<T>, StepReport), SolverError> {
    if !(dt > T::zero()) {
        return Err(SolverError::Parameter(format!(
            "time step {dt} must be positive"
        )));
    }
    if config.picard.n_pic == 0 {
        return Err(SolverError::Parameter("N_pic must be at least 1".into()));
    }
    disc.set_time_step(dt);
    let disc = &*disc;
    let order = disc.order;
    let (n_phi, ng) = (order.n_phi(), order.n_gamma());
    let previous_end = state.end_velocity();
    let mut iterate = SpaceTimeState::replicated(
        order,
        &state.end_pressure(),
        &previous_end,
        state.t_end,
        state.t_end + dt,
    );
    let mut report = StepReport {
        t_start: state.t_end.to_f64_lossy(),
        dt: dt.to_f64_lossy(),
        picard_changes: Vec::with_capacity(config.picard.n_pic),
        divergence: 0.0,
        momentum_iterations: 0,
        pressure_iterations: 0,
    };

    for k in 0..config.picard.n_pic {
        let (v_star, reports) = momentum_predictor(disc, params, &previous_end, &iterate, config)?;
        report.momentum_iterations += reports.iter().map(|r| r.iterations).sum::<usize>();

        let a = disc.pressure_matrix();
        let mut potential = Vec::with_capacity(ng);
        let mut viscous_part = Vec::with_capacity(ng);
        let predictor = SpaceTimeState {
            velocity: v_star,
            ..iterate.clone()
        };
        for l in 0..ng {
            let mut rhs: Vec<T> = disc
                .matrices
                .apply_divergence(&predictor.velocity_node(l))
                .into_iter()
                .map(|x| -x)
                .collect();
            ConstantMode.project(&mut rhs);
            viscous_part.push(viscous_pressure_part(disc, params.nu, &rhs));
            let (q, r) = cg_solve(
                a,
                &rhs,
                T::lit(config.pressure_tol),
                config.max_iter,
                Some(ConstantMode),
            )?;
            r.into_result("pressure CG")?;
            report.pressure_iterations += r.iterations;
            potential.push(q);
        }
        let mut velocity = predictor.velocity;
        correct_with_potential(disc, &mut velocity, &potential);
        let mut delta_p = time_mix(disc.time_weight_inverse(), &potential);
        for (d, v) in delta_p.iter_mut().zip(&viscous_part) {
            d.iter_mut().zip(v).for_each(|(a, b)| *a += *b);
        }
        let delta_p = merge_nodes(&delta_p, n_phi);

        let change = velocity
            .iter()
            .zip(&iterate.velocity)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        report.picard_changes.push(change.to_f64_lossy());
        if config.picard.log_residuals {
            eprintln!(
                "t = {:.6e} picard {k}: |dv| = {:.3e}",
                report.t_start,
                change.to_f64_lossy()
            );
        }
        iterate.velocity = velocity;
        iterate
            .pressure
            .iter_mut()
            .zip(&delta_p)
            .for_each(|(p, d)| *p += *d);
    }

    report.divergence = (0..ng)
        .map(|l| {
            disc.matrices
                .apply_divergence(&iterate.velocity_node(l))
                .iter()
                .fold(0.0f64, |m, x| m.max(x.to_f64_lossy().abs()))
        })
        .fold(0.0, f64::max);
    Ok((iterate, report))
}

/// March from `state` to `t_final` with CFL-controlled steps, calling
/// `on_slab` after every slab.
pub fn run_to<T: Real>(
    disc: &mut Discretization<T>,
    params: &FluidParams<T>,
    mut state: SpaceTimeState<T>,
    control: &mut TimeStepControl<T>,
    t_final: T,
    config: &SolverConfig,
    mut on_slab: impl FnMut(&SpaceTimeState<T>, &StepReport),
) -> Result<SpaceTimeState<T>, SolverError> {
    // steps shorter than this are rounding leftovers
    let eps = T::lit(1e-12) * (T::one() + t_final.abs());
    while t_final - state.t_end > eps {
        let dt = compute_timestep(disc, &state, control, t_final);
        let (next, report) = advance_time_step(disc, params, &state, dt, config)?;
        on_slab(&next, &report);
        state = next;
    }
    Ok(state)
}
