#pragma once

// Convergence diagnostics over per-chain draw sequences: split-Rhat,
// autocorrelation-based effective sample size, and interpolated quantiles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bbt {

namespace detail {

// Halve each chain so that a trending unconverged chain shows up as
// between-sequence variance.
inline std::vector<std::vector<double>> split_sequences(
    const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        if (half == 0)
            continue;
        out.emplace_back(c.begin(), c.begin() + half);
        out.emplace_back(c.begin() + half, c.begin() + 2 * half);
    }
    return out;
}

struct SequenceStats {
    std::vector<double> means;
    std::vector<double> vars;  // with 1/(n-1)
    double w = 0.0;            // mean within-sequence variance
    double var_plus = 0.0;     // pooled variance estimate
    std::size_t n = 0;
};

inline SequenceStats sequence_stats(const std::vector<std::vector<double>>& seqs) {
    SequenceStats s;
    s.n = seqs.front().size();
    for (const auto& q : seqs) {
        double m = 0.0;
        for (double x : q)
            m += x;
        m /= static_cast<double>(q.size());
        double v = 0.0;
        for (double x : q)
            v += (x - m) * (x - m);
        v /= static_cast<double>(q.size() - 1);
        s.means.push_back(m);
        s.vars.push_back(v);
    }
    for (double v : s.vars)
        s.w += v;
    s.w /= static_cast<double>(s.vars.size());
    double grand = 0.0;
    for (double m : s.means)
        grand += m;
    grand /= static_cast<double>(s.means.size());
    double b_over_n = 0.0;
    for (double m : s.means)
        b_over_n += (m - grand) * (m - grand);
    b_over_n /= static_cast<double>(s.means.size() - 1);
    s.var_plus = (static_cast<double>(s.n) - 1.0) / static_cast<double>(s.n) * s.w + b_over_n;
    return s;
}

}  // namespace detail

// Split-Rhat = sqrt(var_plus / W). NaN when the draws are constant (the
// diagnostic is undefined) or when fewer than two sequences are available.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
    auto seqs = detail::split_sequences(chains);
    if (seqs.size() < 2 || seqs.front().size() < 4)
        return std::numeric_limits<double>::quiet_NaN();
    auto s = detail::sequence_stats(seqs);
    if (s.w <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(s.var_plus / s.w);
}

// Multi-chain effective sample size from within-sequence autocovariances,
// truncated by Geyer's initial monotone positive pair sequence.
inline double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    auto seqs = detail::split_sequences(chains);
    if (seqs.empty() || seqs.front().size() < 8)
        return std::numeric_limits<double>::quiet_NaN();
    auto s = detail::sequence_stats(seqs);
    if (s.var_plus <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = s.n;
    const std::size_t m = seqs.size();

    auto mean_autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t q = 0; q < m; ++q) {
            const auto& x = seqs[q];
            const double mu = s.means[q];
            double c = 0.0;
            for (std::size_t k = 0; k + lag < n; ++k)
                c += (x[k] - mu) * (x[k + lag] - mu);
            acc += c / static_cast<double>(n);
        }
        return acc / static_cast<double>(m);
    };

    auto rho = [&](std::size_t lag) { return 1.0 - (s.w - mean_autocov(lag)) / s.var_plus; };

    // Geyer pairs: sum rho(2k) + rho(2k+1) while positive and monotone
    // nonincreasing.
    double pair_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair < 0.0)
            break;
        pair = std::min(pair, prev_pair);
        pair_sum += pair;
        prev_pair = pair;
    }
    const double tau = std::max(2.0 * pair_sum - 1.0, 1.0 / 64.0);
    const double total = static_cast<double>(m) * static_cast<double>(n);
    return std::min(total * std::log10(total + 10.0), total / tau);
}

// Type-7 (linear interpolation) quantile of an unsorted sample.
inline double quantile(std::vector<double> xs, double p) {
    if (xs.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const double h = p * (static_cast<double>(xs.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= xs.size())
        return xs.back();
    const double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

}  // namespace bbt
