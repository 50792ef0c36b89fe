//! Exact-rational reference implementations of the per-cycle laws and a
//! derivative-free maximizer, used to validate the floating-point code
//! paths independently.

use dissem_core::ModelParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rpow(x: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn binom_coeff(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn binom_pmf(trials: u32, q: &BigRational, r: u32) -> BigRational {
    let one = BigRational::one();
    BigRational::from(binom_coeff(trials, r)) * rpow(q, r) * rpow(&(one - q), trials - r)
}

/// Rational gossip-phase adoption probability with the same truncation
/// depth as the library (tail beyond k_max dropped).
pub fn adopt_rat(
    n: u32,
    m: u32,
    big_n: u32,
    prior_matches: bool,
    rho_g: &BigRational,
    k_max: u32,
) -> BigRational {
    let one = BigRational::one();
    let q = if prior_matches {
        rat((big_n + m - 1) as i64, (n - 1) as i64)
    } else {
        rat((big_n + m) as i64, (n - 1) as i64)
    };
    let hold = &one - rho_g;
    let mut total = if prior_matches {
        hold.clone()
    } else {
        BigRational::zero()
    };
    let mut geom = hold;
    for k in 1..=k_max {
        geom *= rho_g;
        let mut adopt_given_k = BigRational::zero();
        for j in 0..=k {
            let w = binom_pmf(k, &q, j);
            if 2 * j > k {
                adopt_given_k += w;
            } else if 2 * j == k {
                adopt_given_k += w * rat(1, 2);
            }
        }
        total += &geom * adopt_given_k;
    }
    total
}

/// Rational phase-S law: weight of K_s = k for k = 0..=budget, where the
/// budget is m while at least m nodes are incorrect and n - N otherwise;
/// the final entry carries the completion mass rho_s^budget.
pub fn ks_rat(n: u32, m: u32, big_n: u32, rho_s: &BigRational) -> Vec<BigRational> {
    let budget = if big_n < n.saturating_sub(m) {
        m
    } else {
        n - big_n
    };
    let one = BigRational::one();
    let mut out = Vec::with_capacity(budget as usize + 1);
    for k in 0..budget {
        out.push(rpow(rho_s, k) * (&one - rho_s));
    }
    out.push(rpow(rho_s, budget));
    out
}

/// Rational law of the gossip-phase adopter count
/// N' ~ Bin(N, P_T1) + Bin(n - N - m, P_T2), indexed 0..=n-m.
pub fn nprime_rat(
    n: u32,
    m: u32,
    big_n: u32,
    rho_g: &BigRational,
    k_max: u32,
) -> Vec<BigRational> {
    let p1 = if big_n >= 1 {
        adopt_rat(n, m, big_n, true, rho_g, k_max)
    } else {
        BigRational::zero()
    };
    let p2 = adopt_rat(n, m, big_n, false, rho_g, k_max);
    let free = n - big_n - m;
    let mut out = vec![BigRational::zero(); (n - m) as usize + 1];
    for a in 0..=big_n {
        let wa = binom_pmf(big_n, &p1, a);
        for b in 0..=free {
            out[(a + b) as usize] += &wa * binom_pmf(free, &p2, b);
        }
    }
    out
}

/// Rational end-of-cycle law N'' | N, indexed 0..=n.
pub fn ndp_rat(
    n: u32,
    m: u32,
    big_n: u32,
    rho_s: &BigRational,
    rho_g: &BigRational,
    k_max: u32,
) -> Vec<BigRational> {
    let ks = ks_rat(n, m, big_n, rho_s);
    let mut out = vec![BigRational::zero(); n as usize + 1];
    if big_n < n.saturating_sub(m) {
        for (k, w) in ks.iter().enumerate().take(m as usize) {
            out[big_n as usize + k] += w;
        }
        let enter = &ks[m as usize];
        for (j, w) in nprime_rat(n, m, big_n, rho_g, k_max).iter().enumerate() {
            out[m as usize + j] += enter * w;
        }
    } else {
        let budget = (n - big_n) as usize;
        for (k, w) in ks.iter().enumerate().take(budget) {
            out[big_n as usize + k] += w;
        }
        out[n as usize] += &ks[budget];
    }
    out
}

/// Largest |pmf(v) - exact(v)| over the full state range.
pub fn max_gap(pmf: &dissem_core::Pmf, exact: &[BigRational]) -> f64 {
    exact
        .iter()
        .enumerate()
        .map(|(v, w)| {
            let e = w.to_f64().expect("rational fits in f64");
            (pmf.prob(v as i64) - e).abs()
        })
        .fold(0.0, f64::max)
}

/// Rational race probabilities for integer rates.
pub fn ratios_rat(params: &ModelParams) -> (BigRational, BigRational) {
    let as_int = |x: f64| -> i64 {
        assert_eq!(x.fract(), 0.0, "oracle requires integer rates");
        x as i64
    };
    let (ls, le, l) = (
        as_int(params.lambda_s),
        as_int(params.lambda_e),
        as_int(params.lambda),
    );
    (rat(ls, ls + le), rat(l, l + le))
}

/// Golden-section maximizer of a unimodal function on [lo, hi].
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

pub fn rational_is_probability(x: &BigRational) -> bool {
    !x.is_negative() && *x <= BigRational::one()
}
