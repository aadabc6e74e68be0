//! Trigonometric kernels and the sine integral.

use rustfft::num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// `sin(pi x)` with the argument reduced to `[-1/2, 1/2]` first, so large
/// `x` keeps full absolute accuracy.
pub fn sin_pi(x: f64) -> f64 {
    let k = x.round();
    let r = x - k;
    let s = (PI * r).sin();
    if (k as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

pub fn cos_pi(x: f64) -> f64 {
    let k = x.round();
    let r = x - k;
    let c = (PI * r).cos();
    if (k as i64) & 1 == 0 {
        c
    } else {
        -c
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let y = PI * x;
        1.0 - y * y / 6.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Sum of `sinc(x + m n)` over all integers `m`, taken symmetrically.
///
/// For even `n` this is `sin(pi x) / (n tan(pi x / n))`, i.e. the Dirichlet
/// kernel with half weight on the harmonic at index `n / 2`; for odd `n` it
/// is `sin(pi x) / (n sin(pi x / n))`. Periodic in `x` with period `n`.
pub fn periodic_sinc(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let r = x - nf * (x / nf).round();
    if r.abs() < 1e-5 {
        let y2 = PI * PI * r * r;
        return if n % 2 == 0 {
            1.0 - y2 / 6.0 - y2 / (3.0 * nf * nf)
        } else {
            1.0 - y2 / 6.0 + y2 / (6.0 * nf * nf)
        };
    }
    let theta = PI * r / nf;
    if n % 2 == 0 {
        sin_pi(r) * theta.cos() / (nf * theta.sin())
    } else {
        sin_pi(r) / (nf * theta.sin())
    }
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`.
///
/// Power series below `|x| = 2`, continued fraction for the complex
/// exponential integral above; both are accurate to a few ulps.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let si = if ax < 2.0 {
        si_series(ax)
    } else {
        si_continued_fraction(ax)
    };
    if x < 0.0 {
        -si
    } else {
        si
    }
}

fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        let n = (2 * k) as f64;
        term *= -x2 / (n * (n + 1.0));
        let add = term / (n + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() || k > 60 {
            break;
        }
    }
    sum
}

fn si_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    FRAC_PI_2 + h.im
}

/// Step response of the unity-gain ideal low-pass filter with cutoff
/// `1/(2T)`, evaluated at `x = t / T`: `1/2 + Si(pi x) / pi`.
pub fn lowpass_step(x: f64) -> f64 {
    0.5 + sine_integral(PI * x) / PI
}
