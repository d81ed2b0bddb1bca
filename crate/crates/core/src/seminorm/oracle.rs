//! Brute-force reference for one-dimensional Gagliardo seminorms.
//!
//! A direct double midpoint sum over a uniform grid on `[-L, L]`, with the
//! diagonal cells integrated from the local slope, the exterior `|y| > L`
//! added in closed form, and Richardson extrapolation over successive
//! doublings of the grid. Slow and simple on purpose.

use rayon::prelude::*;

use crate::scalar::{abs_pow, Real};

/// Sum at one resolution: `m` cells of width `2 L / m`.
pub fn midpoint_sum<T: Real, F: Fn(T) -> T + Sync>(u: &F, half_width: T, s: T, q: T, m: usize) -> T {
    let h = T::two() * half_width / T::from_usize_lossy(m);
    let beta = q * s;
    let xs: Vec<T> = (0..m).map(|i| -half_width + (T::from_usize_lossy(i) + T::half()) * h).collect();
    let us: Vec<T> = xs.iter().map(|&x| u(x)).collect();

    // off-diagonal pairs, grouped by offset k
    let off: T = (1..m)
        .into_par_iter()
        .map(|k| {
            let w = (T::from_usize_lossy(k) * h).powf(-T::one() - beta);
            let s: T = us.windows(k + 1).map(|win| abs_pow(win[0] - win[k], q)).sum();
            s * w
        })
        .sum();
    let off = T::two() * off * h * h;

    // diagonal cells from the centred slope
    let gamma = q - T::one() - beta;
    let cell = h.powf(q + T::one() - beta) * T::two() / ((gamma + T::one()) * (gamma + T::two()));
    let diag: T = (0..m)
        .map(|i| {
            let slope = if i == 0 || i + 1 == m {
                T::zero()
            } else {
                (us[i + 1] - us[i - 1]) / (T::two() * h)
            };
            abs_pow(slope, q) * cell
        })
        .sum();

    // pairs with one point outside [-L, L], where u vanishes
    let ext: T = xs
        .iter()
        .zip(&us)
        .map(|(&x, &v)| abs_pow(v, q) * ((half_width - x).powf(-beta) + (half_width + x).powf(-beta)))
        .sum();
    let ext = T::two() * h * ext / beta;
    off + diag + ext
}

/// `[u]_{s,q}` on the line for `u` supported in `[-L, L]`: midpoint sums on
/// `base_cells * 2^j` cells for `j = 0..=refinement`, combined by repeated
/// Richardson elimination of the error terms `h^e` for each `e` in
/// `exponents` (in order).
pub fn brute_force_oracle_with<T: Real, F: Fn(T) -> T + Sync>(
    u: F,
    half_width: T,
    s: T,
    q: T,
    base_cells: usize,
    refinement: usize,
    exponents: &[T],
) -> T {
    let mut table: Vec<T> = (0..=refinement).map(|j| midpoint_sum(&u, half_width, s, q, base_cells << j)).collect();
    for &e in exponents.iter().take(refinement) {
        let f = T::two().powf(e);
        table = table.windows(2).map(|w| (f * w[1] - w[0]) / (f - T::one())).collect();
    }
    let last = *table.last().expect("at least one level");
    last.max(T::zero()).powf(T::one() / q)
}

/// `[u]_{s,q}` on the line by brute force with `refinement + 1` levels
/// starting from 1024 cells. The leading error terms of the midpoint sum
/// scale like `h^(q (1 - s))` (cells near the diagonal) and `h^2`.
pub fn brute_force_oracle<T: Real, F: Fn(T) -> T + Sync>(u: F, half_width: T, s: T, q: T, refinement: usize) -> T {
    let exponents = [q * (T::one() - s), T::two(), q * (T::one() - s) + T::one()];
    brute_force_oracle_with(u, half_width, s, q, 1024, refinement, &exponents)
}
