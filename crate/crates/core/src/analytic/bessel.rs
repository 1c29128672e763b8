use std::f64::consts::PI;

/// Switch-over point between the power series and the Hankel asymptotic expansion.
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order one.
pub fn bessel_j1(u: f64) -> f64 {
    if u < 0.0 {
        return -bessel_j1(-u);
    }
    if u <= SERIES_LIMIT {
        series(u)
    } else {
        asymptotic(u)
    }
}

fn series(u: f64) -> f64 {
    let half = 0.5 * u;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// somb(u) = 2·J₁(u)/u with somb(0) = 1.
pub fn somb(u: f64) -> f64 {
    let a = u.abs();
    if a < 1e-4 {
        // 2J₁(u)/u = 1 − u²/8 + u⁴/192 − …
        let s = a * a;
        1.0 - s / 8.0 + s * s / 192.0
    } else {
        2.0 * bessel_j1(a) / a
    }
}

/// Find a root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-15 * mid.abs().max(1.0) {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of J₁.
pub fn first_j1_zero() -> f64 {
    bisect(bessel_j1, 3.0, 4.5)
}

/// Argument u at which somb(u)^power falls to one half.
pub fn half_max_argument(power: u32) -> f64 {
    let target = 0.5f64.powf(1.0 / power as f64);
    bisect(|u| somb(u) - target, 1e-6, first_j1_zero())
}
