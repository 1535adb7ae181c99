//! Small special-function helpers shared by the scheme modules.

use std::f64::consts::PI;

/// Scaled complementary error function e^{x^2} erfc(x) for x >= 0.
///
/// Three regimes, each a few ulp accurate on its own range:
/// - x < 1: the Maclaurin series for erf converges fast and nearly without
///   cancellation there, and e^{x^2}(1 - erf x) amplifies its error by at
///   most e * 1/(1 - erf 1) ~ 17x;
/// - 1 <= x <= 8: the Laplace continued fraction
///   erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
///   evaluated by the modified Lentz scheme (worst case ~220 terms at x = 1);
/// - x > 8: the asymptotic expansion
///   (1/(x sqrt(pi))) sum_k (-1)^k (2k-1)!!/(2x^2)^k, whose 12th term is
///   already below 1e-13 at the crossover.
pub(crate) fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = x;
        let mut k = 0u32;
        loop {
            sum += term / (2 * k + 1) as f64;
            k += 1;
            term *= -x * x / k as f64;
            if term.abs() < 1e-18 * sum || k > 60 {
                break;
            }
        }
        (x * x).exp() * (1.0 - 2.0 / PI.sqrt() * sum)
    } else if x <= 8.0 {
        let tiny = 1e-300;
        let mut f = tiny;
        let mut c = f;
        let mut d = 0.0;
        for n in 1..=300u32 {
            let a = if n == 1 { 1.0 } else { (n - 1) as f64 / 2.0 };
            d = x + a * d;
            if d == 0.0 {
                d = tiny;
            }
            c = x + a / c;
            if c == 0.0 {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        f / PI.sqrt()
    } else {
        let inv = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=12u32 {
            term *= -((2 * k - 1) as f64) * inv;
            sum += term;
        }
        sum / (x * PI.sqrt())
    }
}

/// Radially integrated Gaussian angle profile
///
/// ```text
/// p(a, x) = (1/pi) \int_0^inf r dr exp{-[r cos x - a]^2 - [r sin x]^2}
///         = (1/2pi) e^{-a^2} [1 + sqrt(pi) u e^{u^2} (1 + erf u)],   u = a cos x
/// ```
///
/// the single-peak density at angle x from the peak for displacement a. This
/// is both the strong-field direct limit and the per-mode marginal of the
/// indirect scheme. Evaluated through erfcx so that e^{u^2} never appears
/// bare: for u >= 0 use e^{u^2}(1 + erf u) = 2 e^{u^2} - erfcx(u) and fold
/// e^{-a^2} e^{u^2} = e^{-a^2 sin^2 x}; for u < 0 use 1 + erf u = erfcx(-u) e^{-u^2}.
pub(crate) fn radial_gaussian_profile(a: f64, x: f64) -> f64 {
    debug_assert!(a >= 0.0);
    let u = a * x.cos();
    let ea = (-a * a).exp();
    let sqrt_pi = PI.sqrt();
    let v = if u >= 0.0 {
        let s = a * x.sin();
        ea + sqrt_pi * u * (2.0 * (-s * s).exp() - ea * erfcx(u))
    } else {
        ea * (1.0 + sqrt_pi * u * erfcx(-u))
    };
    v / (2.0 * PI)
}

/// ln k! via the log-gamma function.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// Regularized upper incomplete gamma function Q(a, x) = Γ(a, x)/Γ(a) for
/// a > 0, x >= 0; the chi-square survival function is Q(k/2, x/2).
///
/// Series for the lower function when x < a + 1 (rapid there), Lentz-evaluated
/// continued fraction for the upper function otherwise — the standard split
/// that keeps both expansions in their fast, cancellation-free regimes.
pub(crate) fn regularized_gamma_upper(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let ln_scale = -x + a * x.ln() - statrs::function::gamma::ln_gamma(a);
    if x < a + 1.0 {
        // P(a, x) = x^a e^{-x} / Γ(a) · Σ_k x^k / (a(a+1)...(a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 0u32;
        loop {
            n += 1;
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * 1e-17 || n > 500 {
                break;
            }
        }
        1.0 - sum * ln_scale.exp()
    } else {
        // Q(a, x) = x^a e^{-x} / Γ(a) · 1/(x+1−a − 1·(1−a)/(x+3−a − ...))
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=500u32 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * ln_scale.exp()
    }
}
