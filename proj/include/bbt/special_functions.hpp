#pragma once

// Scalar special functions shared by the prior family, the likelihood and
// the samplers. Everything is a pure function of its arguments.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace bbt {

namespace detail {

// Kahan-compensated accumulator for the short recurrence sums below; the
// trigamma recurrence adds terms as large as 1/x^2 and we want the result
// good to ~1 ulp.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double term) {
        double y = term - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

// psi(x) for x > 0. Upward recurrence psi(x) = psi(x+1) - 1/x until
// x >= 10, then the Bernoulli asymptotic series; truncation error at the
// switch point is below 1e-14.
inline double digamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("digamma: requires x > 0");
    detail::CompensatedSum shift;
    while (x < 10.0) {
        shift.add(-1.0 / x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double z = inv * inv;
    // log x - 1/(2x) - sum_{n>=1} B_{2n} / (2n x^{2n})
    const double tail =
        z * (1.0 / 12.0 -
             z * (1.0 / 120.0 -
                  z * (1.0 / 252.0 -
                       z * (1.0 / 240.0 -
                            z * (1.0 / 132.0 - z * (691.0 / 32760.0))))));
    shift.add(std::log(x) - 0.5 * inv - tail);
    return shift.sum;
}

// psi'(x) for x > 0, by the same recurrence/asymptotic-series split:
// psi'(x) = psi'(x+1) + 1/x^2.
inline double trigamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("trigamma: requires x > 0");
    detail::CompensatedSum shift;
    while (x < 10.0) {
        shift.add(1.0 / (x * x));
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double z = inv * inv;
    const double tail =
        inv * z *
        (1.0 / 6.0 -
         z * (1.0 / 30.0 -
              z * (1.0 / 42.0 -
                   z * (1.0 / 30.0 -
                        z * (5.0 / 66.0 - z * (691.0 / 2730.0))))));
    shift.add(inv + 0.5 * z + tail);
    return shift.sum;
}

// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a+b).
inline double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("log_beta: requires a, b > 0");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// log(1 + e^x) without overflow; exact in the far tails.
inline double log1p_exp(double x) {
    if (x > 33.3)
        return x;  // e^{-x} below double resolution of x
    if (x > 18.0)
        return x + std::exp(-x);
    if (x > -37.0)
        return std::log1p(std::exp(x));
    return std::exp(x);
}

// 1 / (1 + e^{-x}).
inline double logistic(double x) {
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(e^a + e^b), stable for any finite inputs; absorbs -inf entries.
inline double log_add_exp(double a, double b) {
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    if (hi == -std::numeric_limits<double>::infinity())
        return hi;
    return hi + log1p_exp(lo - hi);
}

// log sum_i e^{v_i} over a nonempty sequence, shift-by-max form.
inline double log_sum_exp(std::span<const double> values) {
    if (values.empty())
        throw std::domain_error("log_sum_exp: empty sequence");
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : values)
        if (v > hi)
            hi = v;
    if (hi == -std::numeric_limits<double>::infinity())
        return hi;
    double acc = 0.0;
    for (double v : values)
        acc += std::exp(v - hi);
    return hi + std::log(acc);
}

}  // namespace bbt
