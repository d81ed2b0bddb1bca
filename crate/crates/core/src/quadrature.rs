//! One-dimensional quadrature building blocks.
//!
//! Everything here works on panels: a Gauss-Kronrod (7, 15) pair supplies a
//! value and an error estimate per panel, [`integrate_adaptive`] bisects the
//! worst panels of a breakpoint-aligned partition, and [`OctaveSum`] drives
//! integrals over `[a, inf)` by radius doubling, detecting tail divergence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

impl<T: Real> Estimate<T> {
    pub fn zero() -> Self {
        Self { value: T::zero(), error: T::zero(), evaluations: 0 }
    }

    pub fn add(&mut self, other: Estimate<T>) {
        self.value = self.value + other.value;
        self.error = self.error + other.error;
        self.evaluations += other.evaluations;
    }
}

/// The 15-point Kronrod extension of the 7-point Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussKronrod15<T> {
    xgk: [T; 8],
    wgk: [T; 8],
    wg: [T; 4],
}

impl<T: Real> Default for GaussKronrod15<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> GaussKronrod15<T> {
    pub fn new() -> Self {
        Self { xgk: XGK.map(T::c), wgk: WGK.map(T::c), wg: WG.map(T::c) }
    }

    /// Abscissae of the rule mapped to `[a, b]`, in the order used by
    /// [`GaussKronrod15::combine`].
    pub fn nodes(&self, a: T, b: T) -> [T; 15] {
        let c = (a + b) * T::half();
        let h = (b - a) * T::half();
        let mut out = [c; 15];
        for j in 0..7 {
            out[2 * j] = c - h * self.xgk[j];
            out[2 * j + 1] = c + h * self.xgk[j];
        }
        out
    }

    /// Combines integrand values at [`GaussKronrod15::nodes`] into an estimate.
    pub fn combine(&self, a: T, b: T, f: &[T; 15]) -> Estimate<T> {
        let h = (b - a) * T::half();
        let mut kron = f[14] * self.wgk[7];
        let mut gauss = f[14] * self.wg[3];
        for j in 0..7 {
            let pair = f[2 * j] + f[2 * j + 1];
            kron = kron + self.wgk[j] * pair;
            if j % 2 == 1 {
                gauss = gauss + self.wg[j / 2] * pair;
            }
        }
        let value = kron * h;
        let error = ((kron - gauss) * h).abs();
        Estimate { value, error, evaluations: 15 }
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> Estimate<T> {
        let xs = self.nodes(a, b);
        let mut fx = [T::zero(); 15];
        for (v, &x) in fx.iter_mut().zip(xs.iter()) {
            *v = f(x);
        }
        self.combine(a, b, &fx)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration on `P_n`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes.into_iter().map(T::c).collect(), weights.into_iter().map(T::c).collect())
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    est: Estimate<T>,
    depth: u32,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.partial_cmp(&other.est.error).unwrap_or(Ordering::Equal)
    }
}

/// Sorted, deduplicated breakpoints of `[a, b]` including both ends.
pub fn partition<T: Real>(a: T, b: T, breaks: &[T]) -> Vec<T> {
    let mut pts: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    pts.dedup_by(|x, y| (*x - *y).abs() <= T::epsilon() * (x.abs() + y.abs()));
    pts
}

/// Globally adaptive Gauss-Kronrod quadrature on `[a, b]`, starting from the
/// partition induced by `breaks`. Stops once the summed error falls below
/// `max(abs_tol, rel_tol * |value|)` or `max_panels` is reached.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    breaks: &[T],
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Estimate<T> {
    if !(b > a) {
        return Estimate::zero();
    }
    let gk = GaussKronrod15::new();
    let mut heap = BinaryHeap::new();
    let mut total = Estimate::zero();
    for w in partition(a, b, breaks).windows(2) {
        let est = gk.integrate(&mut f, w[0], w[1]);
        total.add(est);
        heap.push(Panel { a: w[0], b: w[1], est, depth: 0 });
    }
    let mut evaluations = total.evaluations;
    while heap.len() < max_panels {
        let (value, error) = heap
            .iter()
            .fold((T::zero(), T::zero()), |(v, e), p| (v + p.est.value, e + p.est.error));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        if worst.depth > 60 {
            heap.push(worst);
            break;
        }
        let mid = (worst.a + worst.b) * T::half();
        let left = gk.integrate(&mut f, worst.a, mid);
        let right = gk.integrate(&mut f, mid, worst.b);
        evaluations += 30;
        heap.push(Panel { a: worst.a, b: mid, est: left, depth: worst.depth + 1 });
        heap.push(Panel { a: mid, b: worst.b, est: right, depth: worst.depth + 1 });
    }
    let (value, error) =
        heap.iter().fold((T::zero(), T::zero()), |(v, e), p| (v + p.est.value, e + p.est.error));
    Estimate { value, error, evaluations }
}

/// How a doubling sequence ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStatus {
    Converged,
    Divergent,
    Exhausted,
}

/// Outcome of an integral over `[start, inf)` accumulated octave by octave.
#[derive(Debug, Clone)]
pub struct TailSum<T> {
    pub value: T,
    pub quad_error: T,
    pub extrapolation_error: T,
    /// Extrapolated contribution beyond the last radius.
    pub remainder: T,
    /// Share of the value coming from radii above half of the final radius.
    pub tail_share: T,
    pub status: TailStatus,
    pub evaluations: usize,
    /// Truncated partial sums after each doubling; used by divergence studies.
    pub partial_sums: Vec<(T, T)>,
}

/// Accumulates `int_start^inf f` given a panel integrator, first over a fixed
/// block of octaves up to `tail_start`, then by doubling the outer radius.
///
/// Divergence: the per-doubling increments stop decaying over 3 consecutive
/// doublings while the `root`-th root of the partial sum still grows by more
/// than 5% per doubling at least once in that run.
/// Convergence: increments decay geometrically and the extrapolated total
/// changes by less than `rel_tol / 10` over 3 consecutive doublings.
pub struct OctaveSum<T> {
    pub panels_per_octave: usize,
    pub rel_tol: T,
    pub root: T,
    pub max_doublings: usize,
    pub min_doublings: usize,
}

impl<T: Real> OctaveSum<T> {
    pub fn run<P>(&self, start: T, tail_start: T, breaks: &[T], mut panel: P) -> TailSum<T>
    where
        P: FnMut(T, T) -> Estimate<T>,
    {
        let mut acc = Estimate::zero();
        let ppo = self.panels_per_octave.max(1);
        let step = T::two().powf(T::one() / T::from_usize_lossy(ppo));
        // Fixed block: geometric panels from `start` to `tail_start`, split at breaks.
        let mut grid = Vec::new();
        let mut x = start;
        while x < tail_start {
            grid.push(x);
            x = x * step;
        }
        grid.push(tail_start);
        let mut pts: Vec<T> = grid;
        pts.extend(breaks.iter().copied().filter(|&b| b > start && b < tail_start));
        let pts = partition(start, tail_start, &pts);
        for w in pts.windows(2) {
            acc.add(panel(w[0], w[1]));
        }

        let mut partial_sums = vec![(tail_start, acc.value)];
        let mut prev_inc: Option<T> = None;
        let mut prev_extrap: Option<T> = None;
        let mut growth_run = 0usize;
        let mut nondecay_run = 0usize;
        let mut stable_run = 0usize;
        let mut zero_run = 0usize;
        let mut radius = tail_start;
        let mut status = TailStatus::Exhausted;
        let mut remainder = T::zero();
        let mut extrap_err = T::zero();
        let mut last_inc = T::zero();
        let five = T::c(1.05);
        for k in 0..self.max_doublings {
            let next = radius * T::two();
            let mut inc = Estimate::zero();
            let pts = {
                let mut g = Vec::with_capacity(ppo + 1);
                let mut y = radius;
                for _ in 0..ppo {
                    g.push(y);
                    y = y * step;
                }
                g.extend(breaks.iter().copied().filter(|&b| b > radius && b < next));
                partition(radius, next, &g)
            };
            for w in pts.windows(2) {
                inc.add(panel(w[0], w[1]));
            }
            let before = acc.value;
            acc.add(inc);
            radius = next;
            partial_sums.push((radius, acc.value));
            last_inc = inc.value;

            if inc.value.abs() <= T::epsilon() * acc.value.abs() || inc.value == T::zero() {
                zero_run += 1;
                remainder = T::zero();
                extrap_err = inc.value.abs();
                if zero_run >= 2 && k + 1 >= self.min_doublings {
                    status = TailStatus::Converged;
                    break;
                }
                prev_inc = Some(inc.value);
                continue;
            }
            zero_run = 0;

            let grew = before > T::zero()
                && (acc.value / before).powf(T::one() / self.root) > five;
            let ratio = prev_inc.filter(|&p| p > T::zero()).map(|p| inc.value / p);
            nondecay_run = match ratio {
                Some(r) if r >= T::one() - T::c(1e-9) && inc.value > T::zero() => nondecay_run + 1,
                _ => 0,
            };
            growth_run = if nondecay_run == 0 { 0 } else { growth_run + usize::from(grew) };
            if nondecay_run >= 3 && growth_run >= 1 {
                status = TailStatus::Divergent;
                break;
            }
            if let Some(r) = ratio.filter(|&r| r > T::zero() && r < T::one()) {
                remainder = inc.value * r / (T::one() - r);
                let total = acc.value + remainder;
                if let Some(pe) = prev_extrap {
                    let change = (total - pe).abs();
                    extrap_err = change;
                    if change <= self.rel_tol * T::c(0.1) * total.abs() {
                        stable_run += 1;
                    } else {
                        stable_run = 0;
                    }
                }
                prev_extrap = Some(total);
                if stable_run >= 3 && k + 1 >= self.min_doublings {
                    status = TailStatus::Converged;
                    break;
                }
            } else {
                stable_run = 0;
                prev_extrap = None;
            }
            prev_inc = Some(inc.value);
        }
        let value = match status {
            TailStatus::Divergent => acc.value,
            _ => acc.value + remainder,
        };
        let half_radius_sum = partial_sums
            .iter()
            .rev()
            .find(|(r, _)| *r <= radius * T::half())
            .map(|&(_, v)| v)
            .unwrap_or(T::zero());
        let tail_share = if value.abs() > T::zero() {
            ((value - half_radius_sum) / value).abs()
        } else {
            T::zero()
        };
        let _ = last_inc;
        TailSum {
            value,
            quad_error: acc.error,
            extrapolation_error: extrap_err,
            remainder,
            tail_share,
            status,
            evaluations: acc.evaluations,
            partial_sums,
        }
    }
}
