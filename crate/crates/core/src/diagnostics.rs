//! Signal analysis over trajectories: dominant frequency, amplitude envelope,
//! asymptotic classification, phase slips, mean imbalance and the largest
//! Lyapunov exponent.

use alloc::vec::Vec;

use crate::math::{self, PI, TAU};
use crate::model::{Drive, Termination, Trajectory};
use crate::ode::{integrate, IntegratorSettings, OdeSystem, UniformSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Periodogram-refined angular frequency.
    pub omega: f64,
    /// Estimate from zero-crossing counting alone.
    pub zero_crossing: f64,
    /// `2π / window length`.
    pub resolution: f64,
    pub crossings: usize,
}

/// Zero crossings of `x` (mean already removed), linearly interpolated.
fn crossing_times(series: &UniformSeries, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..x.len() - 1 {
        let (a, b) = (x[i], x[i + 1]);
        if (a < 0.0) != (b < 0.0) {
            out.push(series.time(i) + series.dt * a / (a - b));
        }
    }
    out
}

fn tapered_power(series: &UniformSeries, x: &[f64], omega: f64) -> f64 {
    let n = x.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        let hann = 0.5 - 0.5 * math::cos(TAU * i as f64 / (n - 1) as f64);
        let ph = omega * series.time(i);
        re += hann * v * math::cos(ph);
        im -= hann * v * math::sin(ph);
    }
    re * re + im * im
}

/// Dominant angular frequency of `series`. The mean is removed first.
pub fn dominant_frequency(series: &UniformSeries) -> Result<FrequencyEstimate> {
    let mean = series.mean();
    let x: Vec<f64> = series.values.iter().map(|v| v - mean).collect();
    let crossings = crossing_times(series, &x);
    let nc = crossings.len();
    if nc < 4 {
        return Err(Error::NoOscillation { crossings: nc });
    }
    let zc = PI * (nc - 1) as f64 / (crossings[nc - 1] - crossings[0]);
    let resolution = TAU / series.span();

    // Scan ±resolution around the crossing estimate, then refine the peak
    // with a parabola through the best grid point and its neighbours.
    const GRID: usize = 41;
    let lo = (zc - resolution).max(0.5 * zc);
    let step = (zc + resolution - lo) / (GRID - 1) as f64;
    let powers: Vec<f64> = (0..GRID)
        .map(|k| tapered_power(series, &x, lo + k as f64 * step))
        .collect();
    let mut best = 0;
    for k in 1..GRID {
        if powers[k] > powers[best] {
            best = k;
        }
    }
    let mut omega = lo + best as f64 * step;
    if best > 0 && best < GRID - 1 {
        let (pm, p0, pp) = (powers[best - 1], powers[best], powers[best + 1]);
        let denom = pm - 2.0 * p0 + pp;
        if denom < 0.0 {
            omega += 0.5 * step * (pm - pp) / denom;
        }
    }
    Ok(FrequencyEstimate {
        omega,
        zero_crossing: zc,
        resolution,
        crossings: nc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    /// Alternating local maxima and minima.
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
    /// Least-squares slope of `ln(half peak-to-peak)` against time.
    pub fitted_rate: f64,
}

/// Local extrema with parabolic refinement, forced to alternate max/min.
fn extrema(times: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ts: Vec<f64> = Vec::new();
    let mut vs: Vec<f64> = Vec::new();
    let mut kinds: Vec<bool> = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        let is_max = v[i] > v[i - 1] && v[i] >= v[i + 1];
        let is_min = v[i] < v[i - 1] && v[i] <= v[i + 1];
        if !(is_max || is_min) {
            continue;
        }
        let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
        let denom = a - 2.0 * b + c;
        let (mut t, mut val) = (times[i], b);
        if denom != 0.0 {
            let off = (0.5 * (a - c) / denom).clamp(-1.0, 1.0);
            let dt = 0.5 * (times[i + 1] - times[i - 1]);
            t += off * dt;
            val = b - 0.25 * (a - c) * off;
        }
        if let Some(&last) = kinds.last() {
            if last == is_max {
                // Same kind twice: keep the more extreme one.
                let j = vs.len() - 1;
                if (is_max && val > vs[j]) || (!is_max && val < vs[j]) {
                    ts[j] = t;
                    vs[j] = val;
                }
                continue;
            }
        }
        ts.push(t);
        vs.push(val);
        kinds.push(is_max);
    }
    (ts, vs)
}

/// Ordinary least-squares slope of `y` on `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

fn envelope_of(times: &[f64], v: &[f64]) -> Result<Envelope> {
    let (ts, vs) = extrema(times, v);
    if ts.len() < 4 {
        return Err(Error::TooFewExtrema { found: ts.len() });
    }
    let mut x = Vec::with_capacity(ts.len());
    let mut y = Vec::with_capacity(ts.len());
    for j in 0..ts.len() - 1 {
        let half = 0.5 * (vs[j] - vs[j + 1]).abs();
        if half > 0.0 {
            x.push(0.5 * (ts[j] + ts[j + 1]));
            y.push(math::ln(half));
        }
    }
    if x.len() < 3 {
        return Err(Error::TooFewExtrema { found: ts.len() });
    }
    Ok(Envelope {
        fitted_rate: ls_slope(&x, &y),
        peak_times: ts,
        peak_values: vs,
    })
}

/// Amplitude envelope of an oscillating series; a positive rate means growth.
pub fn envelope(series: &UniformSeries) -> Result<Envelope> {
    let times: Vec<f64> = (0..series.len()).map(|i| series.time(i)).collect();
    envelope_of(&times, &series.values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    DecayToFixedPoint,
    SustainedPeriodic,
    Chaotic,
    SingularTerminated,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::DecayToFixedPoint => "decay_to_fixed_point",
            RegimeLabel::SustainedPeriodic => "sustained_periodic",
            RegimeLabel::Chaotic => "chaotic",
            RegimeLabel::SingularTerminated => "singular_terminated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "decay_to_fixed_point" => RegimeLabel::DecayToFixedPoint,
            "sustained_periodic" => RegimeLabel::SustainedPeriodic,
            "chaotic" => RegimeLabel::Chaotic,
            "singular_terminated" => RegimeLabel::SingularTerminated,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSettings {
    /// Trailing fraction of the run used for the verdict.
    pub window_fraction: f64,
    /// Half peak-to-peak of `w` below which the run counts as decayed.
    pub amplitude_tol: f64,
    /// Lyapunov exponent above which the run counts as chaotic.
    pub lambda_tol: f64,
    /// Envelope decay rate beyond which an oscillation still counts as decaying.
    pub decay_rate_tol: f64,
    /// Minimum span in drive periods.
    pub min_drive_periods: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            window_fraction: 0.3,
            amplitude_tol: 1e-4,
            lambda_tol: 0.01,
            decay_rate_tol: 1e-3,
            min_drive_periods: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: RegimeLabel,
    /// `(w̄, φ̄)` over the analysis window.
    pub center: (f64, f64),
    /// Half peak-to-peak of `w` over the analysis window.
    pub amplitude: f64,
    /// Envelope rate over the window, when it was needed and measurable.
    pub window_rate: Option<f64>,
    /// Lyapunov exponent, when it was needed.
    pub lyapunov: Option<f64>,
}

/// Labels the long-time behaviour of `traj`.
///
/// The order of tests: guard termination, amplitude below tolerance (decay),
/// Lyapunov exponent above tolerance (chaos), envelope still shrinking faster
/// than `decay_rate_tol` (decay), otherwise sustained. `lyapunov` is only
/// called when the amplitude test does not settle the question.
pub fn classify_asymptotic<F>(
    traj: &Trajectory,
    drive: &Drive,
    settings: &ClassifierSettings,
    lyapunov: F,
) -> Result<Classification>
where
    F: FnOnce() -> Result<LyapunovEstimate>,
{
    if traj.len() < 2 {
        return Err(Error::Inconclusive("trajectory has fewer than two samples"));
    }
    let (t0, t1) = (traj.times[0], traj.times[traj.len() - 1]);
    let start = t1 - settings.window_fraction * (t1 - t0);
    let i0 = traj.times.partition_point(|&t| t < start);
    let window = &traj.states[i0..];
    let (mut wmin, mut wmax, mut wsum, mut psum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0.0);
    for s in window {
        wmin = wmin.min(s.w);
        wmax = wmax.max(s.w);
        wsum += s.w;
        psum += s.phi;
    }
    let n = window.len().max(1) as f64;
    let mut out = Classification {
        label: RegimeLabel::SingularTerminated,
        center: (wsum / n, psum / n),
        amplitude: 0.5 * (wmax - wmin),
        window_rate: None,
        lyapunov: None,
    };
    if traj.terminated_by == Termination::SingularityGuard {
        return Ok(out);
    }
    if let Some(period) = drive.period() {
        if t1 - t0 < settings.min_drive_periods * period {
            return Err(Error::Inconclusive("run spans too few drive periods"));
        }
    }
    if window.len() < 8 {
        return Err(Error::Inconclusive("analysis window has too few samples"));
    }
    if out.amplitude < settings.amplitude_tol {
        out.label = RegimeLabel::DecayToFixedPoint;
        return Ok(out);
    }
    let lyap = lyapunov()?;
    out.lyapunov = Some(lyap.lambda_max);
    if lyap.lambda_max > settings.lambda_tol {
        out.label = RegimeLabel::Chaotic;
        return Ok(out);
    }
    let ws: Vec<f64> = window.iter().map(|s| s.w).collect();
    out.window_rate = envelope_of(&traj.times[i0..], &ws)
        .ok()
        .map(|e| e.fitted_rate);
    out.label = match out.window_rate {
        Some(r) if r < -settings.decay_rate_tol => RegimeLabel::DecayToFixedPoint,
        _ => RegimeLabel::SustainedPeriodic,
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSlipSettings {
    /// Natural oscillation period that sets the window lengths.
    pub natural_period: f64,
    /// Plateau averaging window, in natural periods.
    pub plateau_periods: f64,
    /// Smallest jump reported as a slip.
    pub slip_min: f64,
    /// Longest allowed gap between two plateaus, in natural periods.
    pub slip_window_periods: f64,
    /// Plateaus drifting faster than this (rad per unit time) are ramps.
    pub ramp_tol: f64,
}

impl PhaseSlipSettings {
    pub fn for_period(natural_period: f64) -> Self {
        let slip_min = PI / 2.0;
        let slip_window_periods = 5.0;
        PhaseSlipSettings {
            natural_period,
            plateau_periods: 3.0,
            slip_min,
            slip_window_periods,
            ramp_tol: slip_min / (2.0 * slip_window_periods * natural_period),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSlipEvent {
    pub t_mid: f64,
    pub jump: f64,
    pub pre_plateau: f64,
    pub post_plateau: f64,
}

#[derive(Debug, Clone, Copy)]
struct Plateau {
    /// First and last window index.
    first: usize,
    last: usize,
    mean: f64,
}

/// Finds jumps between flat stretches of the unwrapped phase.
///
/// Sliding means over `plateau_periods` natural periods (stride one third of
/// the window) are grouped into plateaus whose members stay within
/// `slip_min / 2` of the plateau's running mean. Plateaus that drift faster
/// than `ramp_tol` are discarded, so a running phase produces no events.
pub fn detect_phase_slips(
    phi: &UniformSeries,
    settings: &PhaseSlipSettings,
) -> Result<Vec<PhaseSlipEvent>> {
    if !(settings.natural_period > 0.0 && settings.plateau_periods > 0.0) {
        return Err(Error::InvalidParameter(
            "natural period and plateau window must be positive",
        ));
    }
    let win = ((settings.plateau_periods * settings.natural_period / phi.dt) as usize).max(1);
    let stride = (win / 3).max(1);
    if phi.len() < win {
        return Ok(Vec::new());
    }
    // Window means via a prefix sum; centre time of window k is centres[k].
    let mut prefix = Vec::with_capacity(phi.len() + 1);
    prefix.push(0.0);
    for v in &phi.values {
        prefix.push(prefix[prefix.len() - 1] + v);
    }
    let mut means = Vec::new();
    let mut centres = Vec::new();
    let mut start = 0;
    while start + win <= phi.len() {
        means.push((prefix[start + win] - prefix[start]) / win as f64);
        centres.push(phi.time(start) + 0.5 * (win - 1) as f64 * phi.dt);
        start += stride;
    }

    let tol = settings.slip_min / 2.0;
    let mut plateaus: Vec<Plateau> = Vec::new();
    let mut cur = Plateau {
        first: 0,
        last: 0,
        mean: means[0],
    };
    let mut sum = means[0];
    for (k, &m) in means.iter().enumerate().skip(1) {
        if (m - cur.mean).abs() <= tol {
            cur.last = k;
            sum += m;
            cur.mean = sum / (k - cur.first + 1) as f64;
        } else {
            plateaus.push(cur);
            cur = Plateau {
                first: k,
                last: k,
                mean: m,
            };
            sum = m;
        }
    }
    plateaus.push(cur);

    // A plateau must cover at least one full averaging window and be flat.
    let min_windows = (win / stride).max(1);
    let flat: Vec<Plateau> = plateaus
        .into_iter()
        .filter(|p| {
            if p.last - p.first < min_windows {
                return false;
            }
            let dt = centres[p.last] - centres[p.first];
            (means[p.last] - means[p.first]).abs() <= settings.ramp_tol * dt
        })
        .collect();

    let max_gap = settings.slip_window_periods * settings.natural_period;
    let mut events = Vec::new();
    for pair in flat.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let jump = b.mean - a.mean;
        if jump.abs() < settings.slip_min {
            continue;
        }
        if centres[b.first] - centres[a.last]
            > max_gap + settings.plateau_periods * settings.natural_period
        {
            continue;
        }
        let mid = 0.5 * (a.mean + b.mean);
        let mut t_mid = 0.5 * (centres[a.last] + centres[b.first]);
        for k in a.last..b.first {
            let (m0, m1) = (means[k] - mid, means[k + 1] - mid);
            if (m0 < 0.0) != (m1 < 0.0) {
                t_mid = centres[k] + (centres[k + 1] - centres[k]) * m0 / (m0 - m1);
                break;
            }
        }
        events.push(PhaseSlipEvent {
            t_mid,
            jump,
            pre_plateau: a.mean,
            post_plateau: b.mean,
        });
    }
    Ok(events)
}

/// Arithmetic mean of `w` over `[ta, tb]`.
pub fn mean_imbalance(w: &UniformSeries, ta: f64, tb: f64) -> Result<f64> {
    Ok(w.window(ta, tb)?.mean())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSettings {
    /// Initial offset applied to coordinate `perturb_index`.
    pub offset: f64,
    pub perturb_index: usize,
    pub renorm_interval: f64,
    pub horizon: f64,
    /// Leading fraction of the horizon excluded from the average.
    pub discard_fraction: f64,
    /// Tolerances and guard policy; times are overridden per interval.
    pub integrator: IntegratorSettings,
    /// Minimum number of renormalization intervals for an accepted estimate.
    pub min_intervals: usize,
}

impl LyapunovSettings {
    /// One renormalization per drive period.
    pub fn for_drive(drive: &Drive, horizon: f64, integrator: IntegratorSettings) -> Self {
        LyapunovSettings {
            offset: 1e-8,
            perturb_index: 0,
            renorm_interval: drive.period().unwrap_or(TAU),
            horizon,
            discard_fraction: 0.2,
            integrator,
            min_intervals: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub lambda_max: f64,
    pub horizon: f64,
    pub renorm_interval: f64,
}

/// Largest Lyapunov exponent by the two-trajectory method with periodic
/// renormalization of the separation.
pub fn lyapunov_max<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t0: f64,
    settings: &LyapunovSettings,
) -> Result<LyapunovEstimate> {
    let dt = settings.renorm_interval;
    if !(dt > 0.0 && settings.horizon > 0.0 && settings.offset > 0.0) {
        return Err(Error::InvalidParameter(
            "Lyapunov interval, horizon and offset must be positive",
        ));
    }
    if settings.perturb_index >= N {
        return Err(Error::InvalidParameter(
            "perturbed coordinate index out of range",
        ));
    }
    let n = math::floor(settings.horizon / dt + 1e-9) as usize;
    if n < settings.min_intervals {
        return Err(Error::Inconclusive(
            "Lyapunov horizon covers too few renormalization intervals",
        ));
    }
    let skip = math::floor(settings.discard_fraction * n as f64) as usize;

    let mut a = y0;
    let mut b = y0;
    b[settings.perturb_index] += settings.offset;
    let d0 = sys.separation(&a, &b);
    if !(d0 > 0.0) {
        return Err(Error::Precondition("initial offset produces no separation"));
    }
    let mut acc = 0.0;
    for k in 0..n {
        let ta = t0 + k as f64 * dt;
        let seg = IntegratorSettings {
            t_start: ta,
            t_end: ta + dt,
            sample_dt: dt,
            ..settings.integrator
        };
        a = advance(sys, a, &seg)?;
        b = advance(sys, b, &seg)?;
        let mut d = sys.separation(&a, &b);
        if !(d > 0.0) {
            // Coincident copies: restart the offset without counting a stretch.
            d = d0;
            b = a;
            b[settings.perturb_index] += settings.offset;
        } else {
            b = sys.rescale(&a, &b, d0 / d);
        }
        if k >= skip {
            acc += math::ln(d / d0);
        }
    }
    Ok(LyapunovEstimate {
        lambda_max: acc / ((n - skip) as f64 * dt),
        horizon: n as f64 * dt,
        renorm_interval: dt,
    })
}

fn advance<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    y: [f64; N],
    seg: &IntegratorSettings,
) -> Result<[f64; N]> {
    let sol = integrate(sys, y, seg)?;
    if sol.terminated_by == Termination::SingularityGuard {
        return Err(Error::GuardedEstimate {
            t: sol.times.last().copied().unwrap_or(seg.t_start),
        });
    }
    sol.final_state()
        .copied()
        .ok_or(Error::Inconclusive("empty integration segment"))
}
