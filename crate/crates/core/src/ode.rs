//! Adaptive Dormand–Prince integration (5(4) or 8(5,3)) with dense output,
//! a domain guard and optional continuation through the guard, plus uniform
//! resampling.

use alloc::vec::Vec;

use crate::math;
use crate::model::{BjjSystem, Channel, PolePassage, State, Termination, Trajectory};
use crate::{Error, Result};

mod dop853;

/// A first-order system `ẏ = f(t, y)` on `N` real coordinates.
pub trait OdeSystem<const N: usize> {
    /// Rates at `(t, y)`, or `None` if `y` lies outside the domain of `f`.
    fn rates(&self, t: f64, y: &[f64; N]) -> Option<[f64; N]>;

    /// Distance to the singular set; the guard fires once this is `<= 0`.
    fn margin(&self, _y: &[f64; N], _guard_delta: f64) -> f64 {
        f64::INFINITY
    }

    /// Maps a state sitting on the guard to the state the trajectory leaves
    /// with. `None` means the singularity cannot be continued.
    fn pass_singularity(&self, _t: f64, _y: &[f64; N]) -> Option<[f64; N]> {
        None
    }

    /// Separation used for Lyapunov estimates.
    fn separation(&self, a: &[f64; N], b: &[f64; N]) -> f64 {
        math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
    }

    /// Moves `perturbed` towards `reference`, scaling their separation by `factor`.
    fn rescale(&self, reference: &[f64; N], perturbed: &[f64; N], factor: f64) -> [f64; N] {
        let mut out = *reference;
        for i in 0..N {
            out[i] += factor * (perturbed[i] - reference[i]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Adaptive,
    /// Constant step, no error control. Used for convergence checks.
    Fixed(f64),
}

/// Embedded Runge–Kutta pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Dormand–Prince 5(4), seven stages with FSAL and a quartic interpolant.
    #[default]
    Dopri5,
    /// Dormand–Prince 8(5,3), twelve stages with a seventh-order interpolant.
    /// Far less secular drift at tight tolerances.
    Dop853,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardPolicy {
    /// End the run at the first guard crossing.
    Stop,
    /// Continue through the guard with [`OdeSystem::pass_singularity`].
    Continue { max_passages: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub guard_delta: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub mode: StepMode,
    pub method: Method,
    pub guard: GuardPolicy,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 0.1,
            guard_delta: 1e-9,
            t_start: 0.0,
            t_end: 100.0,
            sample_dt: 0.05,
            mode: StepMode::Adaptive,
            method: Method::Dopri5,
            guard: GuardPolicy::Stop,
        }
    }
}

impl IntegratorSettings {
    /// Defaults with `max_step` capped at a twentieth of the drive period.
    pub fn for_drive(omega_p: f64, t_end: f64, sample_dt: f64) -> Self {
        let mut s = IntegratorSettings {
            t_end,
            sample_dt,
            ..Default::default()
        };
        if omega_p > 0.0 {
            s.max_step = s.max_step.min(math::TAU / (20.0 * omega_p));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive"));
        }
        if !(self.guard_delta > 0.0 && self.guard_delta < 1e-3) {
            return Err(Error::InvalidParameter("guard_delta must lie in (0, 1e-3)"));
        }
        if !(self.sample_dt > 0.0) {
            return Err(Error::InvalidParameter("sample_dt must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be positive"));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidParameter("t_end must exceed t_start"));
        }
        if let StepMode::Fixed(h) = self.mode {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter("fixed step must be positive"));
            }
        }
        Ok(())
    }
}

/// Sampled output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub terminated_by: Termination,
    /// `(t, state on the guard, state after continuation)`.
    pub passages: Vec<(f64, [f64; N], [f64; N])>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<const N: usize> Solution<N> {
    pub fn final_state(&self) -> Option<&[f64; N]> {
        self.states.last()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output coefficients (Hairer & Wanner, dopri5).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolant on one step: `y0 + θ(f0 + (1−θ)(f1 + θ(f2 + …)))`.
struct Dense<const N: usize> {
    y0: [f64; N],
    f: [[f64; N]; 7],
    terms: usize,
}

struct Step<const N: usize> {
    y1: [f64; N],
    /// Rate at the new point, reused as the first stage of the next step.
    k_end: [f64; N],
    dense: Dense<N>,
    /// Scaled error norm; below 1 means accept.
    err: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn scale<const N: usize>(s: &IntegratorSettings, y0: &[f64; N], y1: &[f64; N]) -> [f64; N] {
    let mut sc = [0.0; N];
    for i in 0..N {
        sc[i] = s.abs_tol + s.rel_tol * y0[i].abs().max(y1[i].abs());
    }
    sc
}

fn dp5_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s: &IntegratorSettings,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Option<Step<N>> {
    let k2 = sys.rates(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = sys.rates(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rates(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = sys.rates(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rates(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y1 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    if !all_finite(&y1) {
        return None;
    }
    let k7 = sys.rates(t + h, &y1)?;
    let sc = scale(s, y, &y1);
    let mut acc = 0.0;
    let mut f = [[0.0; N]; 7];
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        acc += (e / sc[i]) * (e / sc[i]);
        let ydiff = y1[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        f[0][i] = ydiff;
        f[1][i] = bspl;
        f[2][i] = ydiff - h * k7[i] - bspl;
        f[3][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Some(Step {
        y1,
        k_end: k7,
        dense: Dense {
            y0: *y,
            f,
            terms: 4,
        },
        err: math::sqrt(acc / N as f64),
    })
}

/// `y + h Σ_j a[j] k[j]` over the first `n` stages, skipping zero weights.
fn stage_point<const N: usize>(y: &[f64; N], h: f64, a: &[f64], k: &[[f64; N]]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, kj) in a.iter().zip(k) {
            if *c != 0.0 {
                acc += c * kj[i];
            }
        }
        out[i] += h * acc;
    }
    out
}

fn dop853_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s: &IntegratorSettings,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Option<Step<N>> {
    use dop853::{A, B, C, D, E3, E5, STAGES, STAGES_EXTENDED};
    let mut k = [[0.0; N]; STAGES_EXTENDED];
    k[0] = *k1;
    for j in 1..STAGES {
        let yj = stage_point(y, h, &A[j][..j], &k[..j]);
        k[j] = sys.rates(t + C[j] * h, &yj)?;
    }
    let y1 = stage_point(y, h, &B, &k[..STAGES]);
    if !all_finite(&y1) {
        return None;
    }
    k[STAGES] = sys.rates(t + h, &y1)?;

    let sc = scale(s, y, &y1);
    let (mut e5, mut e3) = (0.0, 0.0);
    for i in 0..N {
        let (mut a5, mut a3) = (0.0, 0.0);
        for j in 0..=STAGES {
            a5 += E5[j] * k[j][i];
            a3 += E3[j] * k[j][i];
        }
        e5 += (a5 / sc[i]) * (a5 / sc[i]);
        e3 += (a3 / sc[i]) * (a3 / sc[i]);
    }
    let err = if e5 == 0.0 && e3 == 0.0 {
        0.0
    } else {
        h.abs() * e5 / math::sqrt((e5 + 0.01 * e3) * N as f64)
    };

    // The interpolant needs three more stages.
    for j in STAGES + 1..STAGES_EXTENDED {
        let yj = stage_point(y, h, &A[j][..j], &k[..j]);
        k[j] = sys.rates(t + C[j] * h, &yj)?;
    }
    let mut f = [[0.0; N]; 7];
    for i in 0..N {
        let dy = y1[i] - y[i];
        f[0][i] = dy;
        f[1][i] = h * k[0][i] - dy;
        f[2][i] = 2.0 * dy - h * (k[STAGES][i] + k[0][i]);
        for (r, d) in D.iter().enumerate() {
            let mut acc = 0.0;
            for j in 0..STAGES_EXTENDED {
                acc += d[j] * k[j][i];
            }
            f[3 + r][i] = h * acc;
        }
    }
    Some(Step {
        y1,
        k_end: k[STAGES],
        dense: Dense {
            y0: *y,
            f,
            terms: 7,
        },
        err,
    })
}

fn take_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s: &IntegratorSettings,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Option<Step<N>> {
    match s.method {
        Method::Dopri5 => dp5_step(sys, s, t, y, k1, h),
        Method::Dop853 => dop853_step(sys, s, t, y, k1, h),
    }
}

fn dense_eval<const N: usize>(d: &Dense<N>, theta: f64) -> [f64; N] {
    let th1 = 1.0 - theta;
    let mut out = [0.0; N];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = d.f[d.terms - 1][i];
        for j in (0..d.terms - 1).rev() {
            let g = if (j + 1) % 2 == 0 { theta } else { th1 };
            acc = d.f[j][i] + g * acc;
        }
        *o = d.y0[i] + theta * acc;
    }
    out
}

struct Sampler {
    t0: f64,
    dt: f64,
    next: u64,
    last: u64,
}

impl Sampler {
    fn new(s: &IntegratorSettings) -> Self {
        let n = math::floor((s.t_end - s.t_start) / s.sample_dt + 1e-9);
        Sampler {
            t0: s.t_start,
            dt: s.sample_dt,
            next: 0,
            last: n as u64,
        }
    }

    fn time(&self, k: u64) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}

/// Integrates `sys` from `settings.t_start` to `settings.t_end`, emitting
/// samples every `sample_dt`.
///
/// Runs are deterministic: the same inputs give bit-identical output.
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    y0: [f64; N],
    settings: &IntegratorSettings,
) -> Result<Solution<N>> {
    settings.validate()?;
    if !all_finite(&y0) || sys.margin(&y0, settings.guard_delta) <= 0.0 {
        return Err(Error::Precondition(
            "initial state lies outside the guarded domain",
        ));
    }
    let mut k1 = sys
        .rates(settings.t_start, &y0)
        .ok_or(Error::Precondition("rates undefined at the initial state"))?;

    let mut sol = Solution {
        times: Vec::new(),
        states: Vec::new(),
        terminated_by: Termination::ReachedEnd,
        passages: Vec::new(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut sampler = Sampler::new(settings);
    let mut t = settings.t_start;
    let mut y = y0;
    let t_end = settings.t_end;
    // Step-size exponent −1/(q+1) for error estimator order q.
    let exponent = match settings.method {
        Method::Dopri5 => -0.2,
        Method::Dop853 => -0.125,
    };
    let (mut h, fixed) = match settings.mode {
        StepMode::Adaptive => (settings.max_step.min(1e-2).min(t_end - t), false),
        StepMode::Fixed(h) => (h, true),
    };

    while t < t_end {
        // Absorb a sliver left over from accumulated rounding into this step.
        let last = t_end - t <= h * (1.0 + 1e-9);
        if last {
            h = t_end - t;
        }
        let h_floor = 1e-15 * t.abs().max(1.0);
        if h < h_floor {
            return Err(Error::StepUnderflow { t, h });
        }
        let step = match take_step(sys, settings, t, &y, &k1, h) {
            Some(st) => st,
            None if fixed => {
                return Err(Error::Precondition(
                    "fixed step left the domain of the system",
                ));
            }
            None => {
                sol.rejected_steps += 1;
                h *= 0.25;
                continue;
            }
        };
        let err = if fixed { 0.0 } else { step.err };
        if err > 1.0 {
            sol.rejected_steps += 1;
            h *= (0.9 * math::powf(err, exponent)).max(0.2);
            continue;
        }

        let t1 = if last { t_end } else { t + h };
        let crossed = sys.margin(&step.y1, settings.guard_delta) <= 0.0;
        if crossed {
            // Locate the first crossing on the dense output.
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if sys.margin(&dense_eval(&step.dense, mid), settings.guard_delta) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_ev = t + lo * h;
            let y_ev = dense_eval(&step.dense, lo);
            emit(&mut sol, &mut sampler, t, h, t_ev, &step.dense, false);
            sol.accepted_steps += 1;
            match settings.guard {
                GuardPolicy::Stop => {
                    if sol.times.last().is_none_or(|&tl| tl < t_ev) {
                        sol.times.push(t_ev);
                        sol.states.push(y_ev);
                    }
                    sol.terminated_by = Termination::SingularityGuard;
                    return Ok(sol);
                }
                GuardPolicy::Continue { max_passages } => {
                    if sol.passages.len() >= max_passages {
                        sol.terminated_by = Termination::SingularityGuard;
                        return Ok(sol);
                    }
                    let Some(y_new) = sys.pass_singularity(t_ev, &y_ev) else {
                        sol.terminated_by = Termination::SingularityGuard;
                        return Ok(sol);
                    };
                    let Some(k_new) = sys.rates(t_ev, &y_new) else {
                        sol.terminated_by = Termination::SingularityGuard;
                        return Ok(sol);
                    };
                    sol.passages.push((t_ev, y_ev, y_new));
                    t = t_ev;
                    y = y_new;
                    k1 = k_new;
                    if !fixed {
                        h = h.max(1e-6);
                    }
                    continue;
                }
            }
        }

        emit(&mut sol, &mut sampler, t, h, t1, &step.dense, last);
        sol.accepted_steps += 1;
        t = t1;
        y = step.y1;
        k1 = step.k_end;
        if !fixed {
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * math::powf(err, exponent)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(settings.max_step);
        }
    }
    Ok(sol)
}

/// Emits grid samples falling in `[t, t_stop]` of the current step.
fn emit<const N: usize>(
    sol: &mut Solution<N>,
    sampler: &mut Sampler,
    t: f64,
    h: f64,
    t_stop: f64,
    dense: &Dense<N>,
    final_step: bool,
) {
    while sampler.next <= sampler.last {
        let ts = sampler.time(sampler.next);
        let inside = ts <= t_stop || (final_step && sampler.next == sampler.last);
        if !inside {
            break;
        }
        let theta = ((ts - t) / h).clamp(0.0, 1.0);
        sol.times.push(ts);
        sol.states.push(dense_eval(dense, theta));
        sampler.next += 1;
    }
}

/// Integrates the nonlinear junction and packages the samples as a [`Trajectory`].
pub fn integrate_bjj(
    sys: &BjjSystem,
    s0: State,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    if s0.w.abs() >= 1.0 - settings.guard_delta {
        return Err(Error::Precondition("|w0| must be below 1 - guard_delta"));
    }
    let sol = integrate(sys, s0.as_array(), settings)?;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.into_iter().map(State::from_array).collect(),
        terminated_by: sol.terminated_by,
        passages: sol
            .passages
            .into_iter()
            .map(|(t, a, b)| PolePassage {
                t,
                w: a[0],
                phi_before: a[1],
                phi_after: b[1],
            })
            .collect(),
    })
}

/// Equally spaced samples of one scalar channel.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl UniformSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("series spacing must be positive"));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter("series needs at least two samples"));
        }
        Ok(UniformSeries { t0, dt, values })
    }

    pub fn from_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..n).map(|i| f(t0 + i as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn span(&self) -> f64 {
        self.t_end() - self.t0
    }

    /// Sub-series covering `[ta, tb]`.
    pub fn window(&self, ta: f64, tb: f64) -> Result<Self> {
        let n = self.values.len();
        let i0 = math::floor(((ta - self.t0) / self.dt).max(0.0) + 0.5) as usize;
        let i1 = (math::floor((tb - self.t0) / self.dt + 0.5).max(0.0) as usize).min(n - 1);
        if i0 >= i1 {
            return Err(Error::Precondition("window lies outside the series"));
        }
        Self::new(self.time(i0), self.dt, self.values[i0..=i1].to_vec())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Local cubic (4-point Lagrange) interpolation of `ys` sampled at `ts`.
fn cubic_at(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if n == 1 {
        return ys[0];
    }
    // Index of the interval [ts[i], ts[i+1]] containing t.
    let i = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap_or(core::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let lo = if n < 4 {
        0
    } else {
        i.saturating_sub(1).min(n - 4)
    };
    let hi = (lo + 4).min(n);
    let mut acc = 0.0;
    for j in lo..hi {
        let mut l = 1.0;
        for m in lo..hi {
            if m != j {
                l *= (t - ts[m]) / (ts[j] - ts[m]);
            }
        }
        acc += l * ys[j];
    }
    acc
}

/// Resamples one channel of `traj` onto a uniform grid of spacing `dt`.
pub fn resample(traj: &Trajectory, channel: Channel, dt: f64) -> Result<UniformSeries> {
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory"));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive"));
    }
    let span = traj.span();
    if dt > span {
        return Err(Error::Precondition("dt exceeds the trajectory span"));
    }
    let ys = traj.channel(channel);
    let t0 = traj.times[0];
    let n = math::floor(span / dt + 1e-9) as usize + 1;
    let values = (0..n)
        .map(|i| cubic_at(&traj.times, &ys, t0 + i as f64 * dt))
        .collect();
    UniformSeries::new(t0, dt, values)
}
