//! Master-equation dynamics and photon indistinguishability.
//!
//! The emitter-cavity system is truncated to the one-excitation manifold
//! {|e,0>, |g,1>, |g,0>}: a single photon is emitted after perfect pulsed
//! preparation, so higher rungs are never populated. The Hamiltonian is the
//! resonant Jaynes-Cummings exchange with polaron-renormalized coupling B*g;
//! dissipators are cavity escape kappa, background emitter decay Gamma_B,
//! optional extra pure dephasing, and phonon-assisted transfer between the
//! two polariton eigenstates at their splitting 2 sqrt((Bg)^2 + (delta/2)^2).
//!
//! The generator is a constant 9x9 superoperator. The fixed-step fourth-order
//! update on a linear, time-invariant system equals the degree-4 Taylor
//! polynomial of exp(dt L), which we build once and apply as a matrix; the
//! two-time correlation G1(t, tau) then follows from the quantum regression
//! theorem by propagating a rho(t) with the same matrix.

use crate::emission::EmitterCavityParams;
use crate::error::{Error, Result};
use crate::phonon::polaron_transform;
use num_complex::Complex64;
use rayon::prelude::*;

const DIM: usize = 3;
const SDIM: usize = 9;
/// residual excitation threshold that ends the integration
const RESIDUAL: f64 = 1e-8;
/// hard cap on fine integration steps
const MAX_STEPS: usize = 40_000_000;
/// target number of outer grid points for the correlation grid
const TARGET_OUTER: usize = 1400;

type Vec9 = [Complex64; SDIM];
type Mat9 = [Complex64; SDIM * SDIM];

/// Density operator on the one-excitation basis {|e,0>, |g,1>, |g,0>}.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub rho: [[Complex64; DIM]; DIM],
    /// time since preparation, s
    pub time: f64,
}

impl SystemState {
    /// Initial state |e,0><e,0| (perfect excited-state preparation).
    pub fn excited() -> SystemState {
        let mut rho = [[Complex64::ZERO; DIM]; DIM];
        rho[0][0] = Complex64::ONE;
        SystemState { rho, time: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        (self.rho[0][0] + self.rho[1][1] + self.rho[2][2]).re
    }

    /// Remaining excitation (emitter + cavity photon populations).
    pub fn excitation(&self) -> f64 {
        (self.rho[0][0] + self.rho[1][1]).re
    }

    pub fn n_cav(&self) -> f64 {
        self.rho[1][1].re
    }

    pub fn n_qd(&self) -> f64 {
        self.rho[0][0].re
    }

    /// Eigenvalues of the (Hermitian) density matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; DIM] {
        hermitian_eigenvalues(&self.rho)
    }

    /// Check physicality: Hermitian to 1e-12, trace in [0, 1 + 1e-10],
    /// positive semidefinite to -1e-10.
    pub fn validate(&self) -> Result<()> {
        for i in 0..DIM {
            if self.rho[i][i].im.abs() > 1e-12 {
                return Err(Error::invalid("density matrix has complex diagonal"));
            }
            for j in (i + 1)..DIM {
                if (self.rho[i][j] - self.rho[j][i].conj()).norm() > 1e-12 {
                    return Err(Error::invalid("density matrix not Hermitian"));
                }
            }
        }
        let tr = self.trace();
        if !(0.0..=1.0 + 1e-10).contains(&tr) {
            return Err(Error::invalid(format!("density matrix trace {tr} outside [0, 1]")));
        }
        let eig = self.eigenvalues();
        if eig[0] < -1e-10 {
            return Err(Error::invalid(format!("density matrix not PSD: min eigenvalue {}", eig[0])));
        }
        Ok(())
    }
}

/// Eigenvalues of a Hermitian 3x3 matrix by cyclic complex Jacobi rotations
/// (the closed-form cubic loses sqrt(machine-eps) accuracy near degenerate
/// eigenvalues, which matters for the PSD tolerance of 1e-10).
fn hermitian_eigenvalues(a: &[[Complex64; DIM]; DIM]) -> [f64; DIM] {
    let mut m = *a;
    let scale: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..60 {
        let off = m[0][1].norm_sqr() + m[0][2].norm_sqr() + m[1][2].norm_sqr();
        if off.sqrt() < 1e-16 * scale {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let b = m[p][q];
            let babs = b.norm();
            if babs == 0.0 {
                continue;
            }
            let u = b / babs; // phase of the pivot
            let tau = (m[q][q].re - m[p][p].re) / (2.0 * babs);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // unitary J = I except J[p][p] = c, J[p][q] = s u,
            // J[q][p] = -s conj(u), J[q][q] = c; apply m <- J^dag m J
            let mut next = m;
            for k in 0..DIM {
                next[k][p] = m[k][p] * c - m[k][q] * (s * u.conj());
                next[k][q] = m[k][p] * (s * u) + m[k][q] * c;
            }
            let row_p: Vec<Complex64> = (0..DIM).map(|k| next[p][k]).collect();
            let row_q: Vec<Complex64> = (0..DIM).map(|k| next[q][k]).collect();
            for k in 0..DIM {
                next[p][k] = row_p[k] * c - row_q[k] * (s * u);
                next[q][k] = row_p[k] * (s * u.conj()) + row_q[k] * c;
            }
            next[p][q] = Complex64::ZERO;
            next[q][p] = Complex64::ZERO;
            next[p][p] = Complex64::new(next[p][p].re, 0.0);
            next[q][q] = Complex64::new(next[q][q].re, 0.0);
            m = next;
        }
    }
    let mut eig = [m[0][0].re, m[1][1].re, m[2][2].re];
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Two-time correlation data on a uniform (t, tau) grid. The outer grid
/// spacing `dt_outer` is an integer multiple of the fine integration step, so
/// n_cav(t_i + tau_j) = n_cav[i + j] exactly.
#[derive(Debug, Clone)]
pub struct CorrelationGrid {
    /// outer grid times, s
    pub t: Vec<f64>,
    /// cavity photon population at the outer times
    pub n_cav: Vec<f64>,
    /// emitter excited-state population at the outer times
    pub n_qd: Vec<f64>,
    /// g1[i][j] = G1(t_i, tau = j * dt_outer), j in 0..len-i
    pub g1: Vec<Vec<Complex64>>,
    pub dt_outer: f64,
    /// kappa * Int n_cav dt: probability the photon left through the cavity
    pub cavity_yield: f64,
    /// Gamma_B * Int n_qd dt: probability lost to background decay
    pub background_yield: f64,
    /// excitation left when integration stopped
    pub residual_excitation: f64,
    pub fine_steps: usize,
    pub dt_fine: f64,
}

/// 9x9 superoperator utilities; vec(rho) is row-major, v[3 i + j] = rho_ij.
fn mat_zero() -> Mat9 {
    [Complex64::ZERO; SDIM * SDIM]
}

fn mat_identity() -> Mat9 {
    let mut m = mat_zero();
    for i in 0..SDIM {
        m[i * SDIM + i] = Complex64::ONE;
    }
    m
}

fn mat_mul(a: &Mat9, b: &Mat9) -> Mat9 {
    let mut out = mat_zero();
    for i in 0..SDIM {
        for k in 0..SDIM {
            let aik = a[i * SDIM + k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..SDIM {
                out[i * SDIM + j] += aik * b[k * SDIM + j];
            }
        }
    }
    out
}

fn mat_vec(m: &Mat9, v: &Vec9) -> Vec9 {
    let mut out = [Complex64::ZERO; SDIM];
    for i in 0..SDIM {
        let mut acc = Complex64::ZERO;
        let row = &m[i * SDIM..(i + 1) * SDIM];
        for j in 0..SDIM {
            acc += row[j] * v[j];
        }
        out[i] = acc;
    }
    out
}

fn mat_pow(m: &Mat9, mut n: usize) -> Mat9 {
    let mut result = mat_identity();
    let mut base = *m;
    while n > 0 {
        if n & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        n >>= 1;
    }
    result
}

/// Add coeff * A rho B to the superoperator: M[(i,j),(k,l)] += c A_ik B_lj.
fn add_sandwich(m: &mut Mat9, a: &[[Complex64; DIM]; DIM], b: &[[Complex64; DIM]; DIM], c: Complex64) {
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    m[(DIM * i + j) * SDIM + (DIM * k + l)] += c * a[i][k] * b[l][j];
                }
            }
        }
    }
}

fn dagger(a: &[[Complex64; DIM]; DIM]) -> [[Complex64; DIM]; DIM] {
    let mut out = [[Complex64::ZERO; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn small_mul(a: &[[Complex64; DIM]; DIM], b: &[[Complex64; DIM]; DIM]) -> [[Complex64; DIM]; DIM] {
    let mut out = [[Complex64::ZERO; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

const IDENTITY3: [[Complex64; DIM]; DIM] = {
    let mut m = [[Complex64::new(0.0, 0.0); DIM]; DIM];
    m[0][0] = Complex64::new(1.0, 0.0);
    m[1][1] = Complex64::new(1.0, 0.0);
    m[2][2] = Complex64::new(1.0, 0.0);
    m
};

/// Build the Lindblad generator L with vec(L rho) = M vec(rho).
fn liouvillian(h: &[[Complex64; DIM]; DIM], collapse: &[[[Complex64; DIM]; DIM]]) -> Mat9 {
    let mut m = mat_zero();
    // -i [H, rho]
    add_sandwich(&mut m, h, &IDENTITY3, Complex64::new(0.0, -1.0));
    add_sandwich(&mut m, &IDENTITY3, h, Complex64::new(0.0, 1.0));
    for c in collapse {
        let cd = dagger(c);
        let cdc = small_mul(&cd, c);
        add_sandwich(&mut m, c, &cd, Complex64::ONE);
        add_sandwich(&mut m, &cdc, &IDENTITY3, Complex64::new(-0.5, 0.0));
        add_sandwich(&mut m, &IDENTITY3, &cdc, Complex64::new(-0.5, 0.0));
    }
    m
}

/// One-step propagator over dt. The fourth-order fixed-step update on a
/// linear system is the degree-4 Taylor polynomial of exp(dt L); evaluating
/// it directly at dt ~ 1/(50 max_rate) leaves O(1e-10) negative density
/// eigenvalues, so the polynomial is applied to dt/2^k and squared k times
/// (equivalent to 2^k fourth-order substeps), making the map exact to
/// machine precision.
fn rk4_propagator(l: &Mat9, dt: f64) -> Mat9 {
    // max row sum as a cheap norm estimate for the scaling exponent
    let norm = (0..SDIM)
        .map(|i| l[i * SDIM..(i + 1) * SDIM].iter().map(|z| z.norm()).sum::<f64>() * dt)
        .fold(0.0_f64, f64::max);
    // threshold 1e-3: degree-4 remainder per substep ~ (1e-3)^5/120, so the
    // squared-up map is exact to ~1e-15
    let k = if norm > 1e-3 { (norm / 1e-3).log2().ceil() as u32 } else { 0 };
    let scale = dt / (1u64 << k) as f64;
    let mut a = mat_zero();
    for (ai, li) in a.iter_mut().zip(l.iter()) {
        *ai = li * scale;
    }
    let a2 = mat_mul(&a, &a);
    let a3 = mat_mul(&a2, &a);
    let a4 = mat_mul(&a3, &a);
    let mut p = mat_identity();
    for i in 0..SDIM * SDIM {
        p[i] += a[i] + a2[i] / 2.0 + a3[i] / 6.0 + a4[i] / 24.0;
    }
    for _ in 0..k {
        p = mat_mul(&p, &p);
    }
    enforce_structure(&mut p);
    p
}

/// Restore the exact structural properties of a Lindblad propagator that
/// floating-point evaluation erodes: Hermiticity preservation
/// (P[(ji),(lk)] = conj P[(ij),(kl)]) and trace preservation (the three
/// diagonal rows of each column sum to the column's identity weight). The
/// corrections are O(1e-15) per entry but stop systematic drift over the
/// ~1e6 applications of a long integration.
fn enforce_structure(p: &mut Mat9) {
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let r1 = (DIM * i + j) * SDIM + (DIM * k + l);
                    let r2 = (DIM * j + i) * SDIM + (DIM * l + k);
                    if r1 <= r2 {
                        let avg = 0.5 * (p[r1] + p[r2].conj());
                        p[r1] = avg;
                        p[r2] = avg.conj();
                    }
                }
            }
        }
    }
    for k in 0..DIM {
        for l in 0..DIM {
            let col = DIM * k + l;
            let want = if k == l { Complex64::ONE } else { Complex64::ZERO };
            let sum = p[col] + p[4 * SDIM + col] + p[8 * SDIM + col];
            // push the defect into the sink population row |g,0><g,0|
            p[8 * SDIM + col] -= sum - want;
        }
    }
}

fn vec_of(rho: &[[Complex64; DIM]; DIM]) -> Vec9 {
    let mut v = [Complex64::ZERO; SDIM];
    for i in 0..DIM {
        for j in 0..DIM {
            v[DIM * i + j] = rho[i][j];
        }
    }
    v
}

fn rho_of(v: &Vec9) -> [[Complex64; DIM]; DIM] {
    let mut rho = [[Complex64::ZERO; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            rho[i][j] = v[DIM * i + j];
        }
    }
    rho
}

/// Composite-Simpson accumulator over a uniform grid, fed one sample at a
/// time; a trailing odd interval falls back to the trapezoid rule (the
/// integrands here have decayed to ~1e-8 by then).
struct SimpsonAccum {
    dt: f64,
    total: f64,
    window: [f64; 3],
    count: usize,
}

impl SimpsonAccum {
    fn new(dt: f64) -> SimpsonAccum {
        SimpsonAccum { dt, total: 0.0, window: [0.0; 3], count: 0 }
    }

    fn push(&mut self, f: f64) {
        self.window[self.count % 3] = f;
        if self.count >= 2 && self.count % 2 == 0 {
            let f0 = self.window[(self.count - 2) % 3];
            let f1 = self.window[(self.count - 1) % 3];
            self.total += self.dt / 3.0 * (f0 + 4.0 * f1 + f);
        }
        self.count += 1;
    }

    fn value(&self) -> f64 {
        if self.count >= 2 && self.count % 2 == 0 {
            // odd number of intervals: add the last one with the trapezoid
            let f0 = self.window[(self.count - 2) % 3];
            let f1 = self.window[(self.count - 1) % 3];
            self.total + 0.5 * self.dt * (f0 + f1)
        } else {
            self.total
        }
    }
}

struct Generator {
    p_fine: Mat9,
    dt: f64,
}

fn build_generator(params: &EmitterCavityParams, dt_scale: f64) -> Result<(Generator, f64)> {
    let polaron = polaron_transform(&params.phonon)?;
    let bg = polaron.b_factor * params.g;
    let delta = params.detuning;
    let splitting = 2.0 * (bg * bg + 0.25 * delta * delta).sqrt();
    let (rate_down, rate_up) = if splitting > 0.0 {
        (polaron.rate(splitting), polaron.rate(-splitting))
    } else {
        (0.0, 0.0)
    };

    // basis indices: 0 = |e,0>, 1 = |g,1>, 2 = |g,0>
    let z = Complex64::ZERO;
    let mut h = [[z; DIM]; DIM];
    h[0][0] = Complex64::new(delta, 0.0);
    h[0][1] = Complex64::new(bg, 0.0);
    h[1][0] = Complex64::new(bg, 0.0);

    let mut collapse: Vec<[[Complex64; DIM]; DIM]> = Vec::new();
    if params.kappa > 0.0 {
        let mut a = [[z; DIM]; DIM];
        a[2][1] = Complex64::new(params.kappa.sqrt(), 0.0);
        collapse.push(a);
    }
    if params.gamma_b > 0.0 {
        let mut c = [[z; DIM]; DIM];
        c[2][0] = Complex64::new(params.gamma_b.sqrt(), 0.0);
        collapse.push(c);
    }
    if params.gamma_pd > 0.0 {
        let mut c = [[z; DIM]; DIM];
        c[0][0] = Complex64::new((2.0 * params.gamma_pd).sqrt(), 0.0);
        collapse.push(c);
    }
    if rate_down > 0.0 || rate_up > 0.0 {
        // polariton eigenvectors |+> = c|e0> + s|g1>, |-> = -s|e0> + c|g1>
        let theta = 0.5 * f64::atan2(2.0 * bg, delta);
        let (s, c) = theta.sin_cos();
        if rate_down > 0.0 {
            // |-><+| scaled by sqrt(rate)
            let r = rate_down.sqrt();
            let mut op = [[z; DIM]; DIM];
            op[0][0] = Complex64::new(-s * c * r, 0.0);
            op[0][1] = Complex64::new(-s * s * r, 0.0);
            op[1][0] = Complex64::new(c * c * r, 0.0);
            op[1][1] = Complex64::new(c * s * r, 0.0);
            collapse.push(op);
        }
        if rate_up > 0.0 {
            // |+><-|
            let r = rate_up.sqrt();
            let mut op = [[z; DIM]; DIM];
            op[0][0] = Complex64::new(-c * s * r, 0.0);
            op[0][1] = Complex64::new(c * c * r, 0.0);
            op[1][0] = Complex64::new(-s * s * r, 0.0);
            op[1][1] = Complex64::new(s * c * r, 0.0);
            collapse.push(op);
        }
    }

    let max_rate = [params.kappa, params.gamma_b, 2.0 * params.gamma_pd, rate_down, rate_up, delta.abs()]
        .into_iter()
        .fold(0.0_f64, f64::max);
    if max_rate == 0.0 && bg == 0.0 {
        return Err(Error::invalid("no dynamics: all rates and the coupling are zero"));
    }
    let mut dt = f64::INFINITY;
    if max_rate > 0.0 {
        dt = dt.min(1.0 / (50.0 * max_rate));
    }
    if bg > 0.0 {
        dt = dt.min(std::f64::consts::PI / (50.0 * bg));
    }
    dt *= dt_scale;
    let l = liouvillian(&h, &collapse);
    Ok((Generator { p_fine: rk4_propagator(&l, dt), dt }, splitting))
}

/// Integrate the master equation from |e,0> and build the two-time
/// correlation grid of the cavity field via the quantum regression theorem.
pub fn evolve(params: &EmitterCavityParams) -> Result<CorrelationGrid> {
    evolve_with_step_scale(params, 1.0)
}

/// Same as [`evolve`] with the automatic fine step multiplied by
/// `dt_scale` (< 1 refines); used for convergence studies.
pub fn evolve_with_step_scale(params: &EmitterCavityParams, dt_scale: f64) -> Result<CorrelationGrid> {
    if !(dt_scale > 0.0 && dt_scale <= 1.0) {
        return Err(Error::invalid("step scale must be in (0, 1]"));
    }
    if params.g > 0.0 && params.kappa == 0.0 && params.gamma_b == 0.0 {
        return Err(Error::invalid("excitation cannot decay: kappa and Gamma_B are both zero"));
    }
    if params.g == 0.0 && params.gamma_b == 0.0 {
        return Err(Error::invalid("excitation cannot decay: the emitter is fully decoupled"));
    }
    let (gen, _) = build_generator(params, dt_scale)?;
    let dt = gen.dt;

    // pass 1: march until the excitation is spent; accumulate the photon
    // bookkeeping integrals on the fine grid
    let mut v = vec_of(&SystemState::excited().rho);
    let mut cav = SimpsonAccum::new(dt);
    let mut qd = SimpsonAccum::new(dt);
    cav.push(v[4].re);
    qd.push(v[0].re);
    let mut steps = 0usize;
    loop {
        v = mat_vec(&gen.p_fine, &v);
        steps += 1;
        cav.push(v[4].re);
        qd.push(v[0].re);
        let excitation = v[0].re + v[4].re;
        if excitation < RESIDUAL {
            break;
        }
        if steps >= MAX_STEPS {
            return Err(Error::IntegrationFailure(format!(
                "no decay below {RESIDUAL} within {MAX_STEPS} steps (dt = {dt:.3e} s, \
                 residual excitation {excitation:.3e})"
            )));
        }
    }
    let residual = v[0].re + v[4].re;
    let cavity_yield = params.kappa * cav.value();
    let background_yield = params.gamma_b * qd.value();

    // outer grid: stride the fine grid so tau steps reuse the same propagator
    let stride = steps.div_ceil(TARGET_OUTER).max(1);
    let n_outer = steps / stride + 1;
    let p_outer = if stride == 1 {
        gen.p_fine
    } else {
        let mut p = mat_pow(&gen.p_fine, stride);
        enforce_structure(&mut p);
        p
    };
    let dt_outer = dt * stride as f64;

    // pass 2: store the state at the outer nodes
    let mut states: Vec<Vec9> = Vec::with_capacity(n_outer);
    let mut v = vec_of(&SystemState::excited().rho);
    states.push(v);
    for _ in 1..n_outer {
        v = mat_vec(&p_outer, &v);
        states.push(v);
    }
    let mut t = Vec::with_capacity(n_outer);
    let mut n_cav = Vec::with_capacity(n_outer);
    let mut n_qd = Vec::with_capacity(n_outer);
    for (i, sv) in states.iter().enumerate() {
        let state = SystemState { rho: rho_of(sv), time: i as f64 * dt_outer };
        state.validate()?;
        t.push(state.time);
        n_cav.push(state.n_cav());
        n_qd.push(state.n_qd());
    }

    // regression theorem: propagate M(tau) = Phi_tau(a rho(t_i)) with the
    // same generator; G1(t, tau) = Tr[a^dag M] = M_{g0 row, g1 col}
    let g1: Vec<Vec<Complex64>> = states
        .par_iter()
        .enumerate()
        .map(|(i, sv)| {
            let mut m = [Complex64::ZERO; SDIM];
            // (a rho) has only the |g,0> row: (a rho)_{2j} = rho_{1j}
            m[6] = sv[3];
            m[7] = sv[4];
            m[8] = sv[5];
            let mut row = Vec::with_capacity(n_outer - i);
            row.push(m[7]);
            for _ in 1..(n_outer - i) {
                m = mat_vec(&p_outer, &m);
                row.push(m[7]);
            }
            row
        })
        .collect();

    Ok(CorrelationGrid {
        t,
        n_cav,
        n_qd,
        g1,
        dt_outer,
        cavity_yield,
        background_yield,
        residual_excitation: residual,
        fine_steps: steps,
        dt_fine: dt,
    })
}

/// Photon indistinguishability from the correlation grid:
/// eta = Int Int |G1(t, tau)|^2 / Int Int n(t) n(t + tau), both over tau >= 0
/// (trapezoid weights on the uniform triangular grid).
pub fn indistinguishability(grid: &CorrelationGrid) -> Result<f64> {
    let n = grid.t.len();
    if n < 3 {
        return Err(Error::invalid("correlation grid too short"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let row = &grid.g1[i];
        let mut row_num = 0.0;
        let mut row_den = 0.0;
        let last = row.len() - 1;
        for (j, g) in row.iter().enumerate() {
            let wj = if j == 0 || j == last { 0.5 } else { 1.0 };
            row_num += wj * g.norm_sqr();
            row_den += wj * grid.n_cav[i] * grid.n_cav[i + j];
        }
        num += wi * row_num;
        den += wi * row_den;
    }
    if den <= 0.0 {
        return Err(Error::UndefinedEta);
    }
    Ok((num / den).min(1.0))
}

/// Map a labelled parameter sweep to indistinguishabilities. Failures are
/// recorded per point; the sweep always completes.
pub fn eta_vs_design(points: &[(String, EmitterCavityParams)]) -> Vec<(String, Result<f64>)> {
    points
        .par_iter()
        .map(|(label, params)| {
            let eta = evolve(params).and_then(|grid| indistinguishability(&grid));
            (label.clone(), eta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonon::PhononEnv;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(g: f64, kappa: f64, gamma_b: f64, gamma_pd: f64, phonon: PhononEnv) -> EmitterCavityParams {
        EmitterCavityParams::new(g, kappa, gamma_b, 1e9, 0.0, gamma_pd, phonon).unwrap()
    }

    #[test]
    fn decoupled_cavity_is_pure_emitter_decay() {
        let grid = evolve(&params(0.0, 5e10, 1e9, 0.0, PhononEnv::off())).unwrap();
        assert!(grid.n_cav.iter().all(|&x| x.abs() < 1e-14));
        assert_relative_eq!(grid.background_yield, 1.0, max_relative = 1e-6);
        // exponential decay check at a grid point
        let k = grid.t.len() / 2;
        assert_relative_eq!(grid.n_qd[k], (-1e9 * grid.t[k]).exp(), max_relative = 1e-6);
    }

    #[test]
    fn excitation_bookkeeping_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..12 {
            let g = 10f64.powf(rng.gen_range(9.0..11.0));
            let kappa = 10f64.powf(rng.gen_range(10.5..12.0));
            let gamma_b = 10f64.powf(rng.gen_range(6.0..9.0));
            let gamma_pd = if rng.gen_bool(0.5) { 10f64.powf(rng.gen_range(7.0..9.0)) } else { 0.0 };
            let phonon = if rng.gen_bool(0.5) { PhononEnv::inas_4k() } else { PhononEnv::off() };
            let grid = evolve(&params(g, kappa, gamma_b, gamma_pd, phonon)).unwrap();
            let total = grid.cavity_yield + grid.background_yield;
            assert!(
                (total - 1.0).abs() < 1e-6,
                "bookkeeping violated: {total} (g={g:.3e}, kappa={kappa:.3e}, gamma_b={gamma_b:.3e})"
            );
        }
    }

    #[test]
    fn bad_cavity_yield_matches_rate_model() {
        // kappa >> g: adiabatic elimination gives Gamma_C = 4 g^2 / kappa,
        // so the cavity yield must equal beta = F_p/(F_p + Gamma_B/Gamma_Bulk)
        for (g, kappa, gamma_b) in
            [(1e10, 2e12, 5e7), (2e10, 4e12, 1e8), (5e9, 1e12, 2e7)]
        {
            let grid = evolve(&params(g, kappa, gamma_b, 0.0, PhononEnv::off())).unwrap();
            let gamma_c = 4.0 * g * g / kappa;
            let beta = gamma_c / (gamma_c + gamma_b);
            assert_relative_eq!(grid.cavity_yield, beta, max_relative = 0.01);
        }
    }

    #[test]
    fn eta_is_unity_without_dephasing() {
        for (g, kappa) in [(1e10, 2e12), (3.7e10, 6.8e10)] {
            let grid = evolve(&params(g, kappa, 5e7, 0.0, PhononEnv::off())).unwrap();
            let eta = indistinguishability(&grid).unwrap();
            assert!((eta - 1.0).abs() < 1e-4, "eta = {eta}");
        }
    }

    #[test]
    fn g1_diagonal_and_cauchy_schwarz() {
        let grid = evolve(&params(3e10, 3e11, 5e7, 3e8, PhononEnv::inas_4k())).unwrap();
        for (i, row) in grid.g1.iter().enumerate() {
            assert!((row[0].re - grid.n_cav[i]).abs() < 1e-10);
            assert!(row[0].im.abs() < 1e-12);
            for (j, g) in row.iter().enumerate() {
                let bound = grid.n_cav[i] * grid.n_cav[i + j];
                assert!(g.norm_sqr() <= bound + 1e-10, "Cauchy-Schwarz violated at ({i}, {j})");
            }
        }
    }

    #[test]
    fn pure_dephasing_matches_analytic_eta() {
        // bad cavity, Gamma_B = 0: effective two-level decay Gamma = 4g^2/kappa
        // and eta = Gamma/(Gamma + 2 gamma_pd)
        let kappa = 2e12;
        let g = 2.2360679774997896e10; // 4 g^2 / kappa = 1e9
        let gamma = 4.0 * g * g / kappa;
        for ratio in [0.5, 2.0] {
            let gamma_pd = ratio * gamma;
            let grid = evolve(&params(g, kappa, 0.0, gamma_pd, PhononEnv::off())).unwrap();
            let eta = indistinguishability(&grid).unwrap();
            let expect = gamma / (gamma + 2.0 * gamma_pd);
            assert_relative_eq!(eta, expect, max_relative = 0.01);
        }
    }

    #[test]
    fn analytic_two_level_grid_reproduces_formula() {
        // brute-force oracle: feed the analytic two-level G1 into the same
        // quadrature. G1(t, tau) = n(t) exp(-(Gamma/2 + gamma_pd) tau),
        // n(t) = exp(-Gamma t) => eta = Gamma/(Gamma + 2 gamma_pd).
        let gamma = 1e9;
        let gamma_pd = 5e8;
        let n = 2000usize;
        let dt = 20.0 / gamma / n as f64;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let n_cav: Vec<f64> = t.iter().map(|&ti| (-gamma * ti).exp()).collect();
        let g1: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n - i)
                    .map(|j| {
                        let tau = j as f64 * dt;
                        Complex64::new(n_cav[i] * (-(0.5 * gamma + gamma_pd) * tau).exp(), 0.0)
                    })
                    .collect()
            })
            .collect();
        let grid = CorrelationGrid {
            t,
            n_qd: n_cav.clone(),
            n_cav,
            g1,
            dt_outer: dt,
            cavity_yield: 1.0,
            background_yield: 0.0,
            residual_excitation: 0.0,
            fine_steps: n,
            dt_fine: dt,
        };
        let eta = indistinguishability(&grid).unwrap();
        assert_relative_eq!(eta, gamma / (gamma + 2.0 * gamma_pd), max_relative = 1e-3);
    }

    #[test]
    fn eta_stable_under_time_refinement() {
        let p = params(3.7e10, 6.8e10, 5e7, 0.0, PhononEnv::inas_4k());
        let coarse = indistinguishability(&evolve(&p).unwrap()).unwrap();
        let fine = indistinguishability(&evolve_with_step_scale(&p, 0.5).unwrap()).unwrap();
        assert!((coarse - fine).abs() < 1e-3, "{coarse} vs {fine}");
    }

    /// kappa grid mimicking a growing mirror count: Q rises, kappa falls,
    /// g is pinned by the (constant) mode volume.
    fn kappa_grid() -> Vec<f64> {
        (0..10).map(|i| 2e12 / 2.4f64.powi(i)).collect()
    }

    #[test]
    fn phonon_rollover_along_quality_factor() {
        // Gamma_B and g fixed, kappa decreasing (increasing Q): eta first
        // rises (faster Purcell emission outruns the phonon transfer) then
        // falls once the system enters strong coupling and the photon
        // lingers at the polariton splitting
        let g = 3.7e10;
        let etas: Vec<f64> = kappa_grid()
            .iter()
            .map(|&kappa| {
                indistinguishability(&evolve(&params(g, kappa, 5e7, 0.0, PhononEnv::inas_4k())).unwrap())
                    .unwrap()
            })
            .collect();
        let peak = etas
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(peak > 0 && peak < etas.len() - 1, "no interior maximum: {etas:?}");
        assert!(etas[etas.len() - 1] < etas[peak] - 1e-3, "no rolloff: {etas:?}");
        assert!(etas[0] < etas[peak] - 1e-3, "no rising branch: {etas:?}");
    }

    #[test]
    fn no_rollover_without_phonons() {
        let g = 3.7e10;
        let etas: Vec<f64> = kappa_grid()
            .iter()
            .map(|&kappa| {
                indistinguishability(&evolve(&params(g, kappa, 5e7, 0.0, PhononEnv::off())).unwrap())
                    .unwrap()
            })
            .collect();
        for w in etas.windows(2) {
            assert!(w[1] > w[0] - 2e-4, "unexpected drop without phonons: {etas:?}");
        }
        assert!(etas.iter().all(|&e| e > 0.999), "eta should stay near 1: {etas:?}");
    }

    #[test]
    fn sweep_records_per_point_errors() {
        let good = ("ok".to_string(), params(1e10, 2e12, 5e7, 0.0, PhononEnv::off()));
        let bad = ("bad".to_string(), params(0.0, 2e12, 0.0, 0.0, PhononEnv::off()));
        let out = eta_vs_design(&[good, bad]);
        assert!(out[0].1.is_ok());
        assert!(out[1].1.is_err());
    }

    #[test]
    fn state_validation_catches_bad_matrices() {
        let mut s = SystemState::excited();
        s.validate().unwrap();
        s.rho[0][1] = Complex64::new(0.1, 0.0); // not Hermitian vs rho[1][0]=0
        assert!(s.validate().is_err());
        let mut s = SystemState::excited();
        s.rho[1][1] = Complex64::new(0.5, 0.0); // trace 1.5
        assert!(s.validate().is_err());
        let mut s = SystemState::excited();
        s.rho[0][0] = Complex64::new(0.5, 0.0);
        s.rho[1][1] = Complex64::new(-0.2, 0.0); // negative population
        assert!(s.validate().is_err());
    }
}
