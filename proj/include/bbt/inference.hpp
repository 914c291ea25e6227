#pragma once

// Likelihood and posterior evaluation with derivatives, the fixed-point
// MLE and MAP solvers, and the Gamma hyperprior construction.
//
// Model: team i beats team j with probability
//     p_ij = e^{lambda_i} / (e^{lambda_i} + e^{lambda_j}),
// lambda_i ~ N(0, sigma^2) i.i.d., and (optionally) sigma ~ Gamma(shape, rate).
//
// With a flat prior on sigma the log-posterior is, up to a constant,
//     l = sum_{i != j} V_ij [lambda_i - log(e^{lambda_i} + e^{lambda_j})]
//         - sum_i lambda_i^2 / (2 sigma^2) - N log sigma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

// Gamma(shape, rate) distribution over the log-strength scale sigma.
struct HyperPrior {
    double shape = 1.0;
    double rate = 1.0;

    double mean() const { return shape / rate; }
    double variance() const { return shape / (rate * rate); }

    double log_density(double sigma) const {
        if (!(sigma > 0.0))
            throw std::domain_error("HyperPrior::log_density: requires sigma > 0");
        return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(sigma) -
               rate * sigma;
    }
};

inline void validate(const HyperPrior& h) {
    if (!(h.shape > 0.0) || !(h.rate > 0.0))
        throw std::domain_error("HyperPrior: shape and rate must be positive");
}

// Root mean square of the log-strengths: the self-consistent scale estimate.
inline double sigma_hat_of(const Strengths& lambda) {
    if (lambda.size() == 0)
        return 0.0;
    double ss = 0.0;
    for (double v : lambda.lambda)
        ss += v * v;
    return std::sqrt(ss / lambda.size());
}

// Variance attached to sigma_hat from the block-diagonal curvature
// approximation: 1 / H_sigma_sigma = sigma_hat^2 / (2N).
inline double varsigma_hat_of(double sigma_hat, int n_teams) {
    if (!(sigma_hat > 0.0))
        throw std::domain_error("varsigma_hat_of: requires sigma_hat > 0");
    if (n_teams < 2)
        throw std::domain_error("varsigma_hat_of: requires at least two teams");
    return sigma_hat * sigma_hat / (2.0 * n_teams);
}

// Gamma distribution matching the given mean and variance exactly:
// shape = sigma_hat^2 / varsigma_hat, rate = sigma_hat / varsigma_hat.
inline HyperPrior hyperprior_from(double sigma_hat, double varsigma_hat) {
    if (!(sigma_hat > 0.0) || !(varsigma_hat > 0.0))
        throw std::domain_error("hyperprior_from: requires positive inputs");
    return HyperPrior{sigma_hat * sigma_hat / varsigma_hat, sigma_hat / varsigma_hat};
}

namespace detail {

inline void require_dims(const Strengths& lambda, const WinMatrix& v, const char* where) {
    if (lambda.size() != v.n_teams)
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

}  // namespace detail

// sum_{i != j} V_ij [lambda_i - log(e^{lambda_i} + e^{lambda_j})], the
// season log-likelihood without the lambda-independent binomial constant.
// Pairs are accumulated in ascending (i, j) order.
inline double log_likelihood(const Strengths& lambda, const WinMatrix& v) {
    detail::require_dims(lambda, v, "log_likelihood");
    double ll = 0.0;
    for (int i = 0; i < v.n_teams; ++i) {
        for (int j = i + 1; j < v.n_teams; ++j) {
            const std::int64_t n = v.games_between(i, j);
            if (n == 0)
                continue;
            const double l = log_add_exp(lambda[i], lambda[j]);
            ll += static_cast<double>(v(i, j)) * (lambda[i] - l) +
                  static_cast<double>(v(j, i)) * (lambda[j] - l);
        }
    }
    return ll;
}

// Log-posterior at (lambda, sigma), dropping lambda- and sigma-independent
// constants. A flat prior on sigma contributes only the -N log sigma from
// the Gaussian normalization; supplying a hyperprior adds its Gamma
// log-density in sigma.
inline double log_posterior(const Strengths& lambda, double sigma, const WinMatrix& v,
                            const HyperPrior* hyper = nullptr) {
    if (!(sigma > 0.0))
        throw std::domain_error("log_posterior: requires sigma > 0");
    detail::require_dims(lambda, v, "log_posterior");
    double ss = 0.0;
    for (double x : lambda.lambda)
        ss += x * x;
    double lp = log_likelihood(lambda, v) - ss / (2.0 * sigma * sigma) -
                lambda.size() * std::log(sigma);
    if (hyper)
        lp += hyper->log_density(sigma);
    return lp;
}

struct PosteriorGradient {
    std::vector<double> dlambda;
    double dsigma = 0.0;
};

// Partial derivatives of the log-posterior:
//   dl/dlambda_i = sum_j (V_ij - n_ij p_ij) - lambda_i / sigma^2
//   dl/dsigma    = sigma^{-3} sum_i lambda_i^2 - N / sigma
// plus the hyperprior terms (shape-1)/sigma - rate when one is supplied.
// Verified against central finite differences in the test suite.
inline PosteriorGradient grad_log_posterior(const Strengths& lambda, double sigma,
                                            const WinMatrix& v,
                                            const HyperPrior* hyper = nullptr) {
    if (!(sigma > 0.0))
        throw std::domain_error("grad_log_posterior: requires sigma > 0");
    detail::require_dims(lambda, v, "grad_log_posterior");
    const int n = v.n_teams;
    PosteriorGradient g{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0};
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::int64_t nij = v.games_between(i, j);
            if (nij == 0)
                continue;
            const double l = log_add_exp(lambda[i], lambda[j]);
            const double pij = std::exp(lambda[i] - l);
            const double pji = std::exp(lambda[j] - l);
            g.dlambda[static_cast<std::size_t>(i)] += static_cast<double>(v(i, j)) - nij * pij;
            g.dlambda[static_cast<std::size_t>(j)] += static_cast<double>(v(j, i)) - nij * pji;
        }
    }
    const double inv2 = 1.0 / (sigma * sigma);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        g.dlambda[static_cast<std::size_t>(i)] -= lambda[i] * inv2;
        ss += lambda[i] * lambda[i];
    }
    g.dsigma = ss * inv2 / sigma - n / sigma;
    if (hyper)
        g.dsigma += (hyper->shape - 1.0) / sigma - hyper->rate;
    return g;
}

struct DenseMatrix {
    int dim = 0;
    std::vector<double> a;

    explicit DenseMatrix(int d = 0)
        : dim(d), a(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0) {}

    double operator()(int i, int j) const {
        return a[static_cast<std::size_t>(i) * dim + j];
    }
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
};

// H = -(second derivatives of the flat-sigma log-posterior), laid out with
// the N lambda rows first and sigma last:
//   H_{li lj}   = delta_ij (sigma^{-2} + sum_k n_ik p_ik p_ki) - n_ij p_ij p_ji
//   H_{s s}     = 3 sigma^{-4} sum lambda^2 - N sigma^{-2}
//   H_{s li}    = -2 lambda_i sigma^{-3}
// The lambda-block row sums collapse to sigma^{-2}.
inline DenseMatrix hessian(const Strengths& lambda, double sigma, const WinMatrix& v) {
    if (!(sigma > 0.0))
        throw std::domain_error("hessian: requires sigma > 0");
    detail::require_dims(lambda, v, "hessian");
    const int n = v.n_teams;
    DenseMatrix h(n + 1);
    const double inv2 = 1.0 / (sigma * sigma);
    for (int i = 0; i < n; ++i)
        h.at(i, i) = inv2;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        ss += lambda[i] * lambda[i];
        for (int j = i + 1; j < n; ++j) {
            const std::int64_t nij = v.games_between(i, j);
            if (nij == 0)
                continue;
            // p_ij p_ji = e^{li + lj} / (e^{li} + e^{lj})^2
            const double l = log_add_exp(lambda[i], lambda[j]);
            const double w = nij * std::exp(lambda[i] + lambda[j] - 2.0 * l);
            h.at(i, i) += w;
            h.at(j, j) += w;
            h.at(i, j) -= w;
            h.at(j, i) -= w;
        }
    }
    h.at(n, n) = 3.0 * ss * inv2 * inv2 - n * inv2;
    for (int i = 0; i < n; ++i) {
        const double c = -2.0 * lambda[i] * inv2 / sigma;
        h.at(n, i) = c;
        h.at(i, n) = c;
    }
    return h;
}

struct FitOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

// The maximum-likelihood equations have a finite normalized solution only
// when every subset of teams has wins crossing its boundary in both
// directions. Winless or lossless teams are the common failure; deeper
// partitions show up as a win digraph that is not strongly connected.
inline void check_ford_condition(const WinMatrix& v) {
    const int n = v.n_teams;
    if (n < 2)
        throw data_error("fit requires at least two teams");
    std::vector<int> bad;
    for (int i = 0; i < n; ++i)
        if (v.wins_of(i) == 0 || v.losses_of(i) == 0)
            bad.push_back(i);
    if (!bad.empty()) {
        std::string msg = "Ford condition fails: team index";
        for (int i : bad)
            msg += ' ' + std::to_string(i);
        msg += (bad.size() == 1) ? " is winless or lossless" : " are winless or lossless";
        throw ford_error(msg, bad);
    }
    // Strong connectivity of the beats-digraph: reachability from team 0
    // along wins and along losses.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                const std::int64_t w = pass == 0 ? v(i, j) : v(j, i);
                if (w > 0 && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        std::vector<int> unreachable;
        for (int i = 0; i < n; ++i)
            if (!seen[static_cast<std::size_t>(i)])
                unreachable.push_back(i);
        if (!unreachable.empty())
            throw ford_error(
                "Ford condition fails: the win digraph is not strongly connected",
                unreachable);
    }
}

namespace detail {

// One Jacobi sweep of the maximum-likelihood fixed-point update
//   lambda_i <- log{ V_i / sum_j n_ij / (e^{lambda_i} + e^{lambda_j}) }.
// The Ford precondition guarantees V_i >= 1 for every team.
inline std::vector<double> fixed_point_update(const std::vector<double>& lambda,
                                              const WinMatrix& v) {
    const int n = v.n_teams;
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const std::int64_t nij = v.games_between(i, j);
            if (nij == 0)
                continue;
            denom += nij * std::exp(-log_add_exp(lambda[static_cast<std::size_t>(i)],
                                                 lambda[static_cast<std::size_t>(j)]));
        }
        next[static_cast<std::size_t>(i)] =
            std::log(static_cast<double>(v.wins_of(i))) - std::log(denom);
    }
    return next;
}

struct FixedPointResult {
    std::vector<double> lambda;
    double residual = 0.0;
    int iterations = 0;
};

// Damped fixed-point iteration: full steps while the residual shrinks,
// halved steps while it oscillates. The residual is measured at the
// iterate that gets returned.
template <typename UpdateFn>
inline FixedPointResult solve_fixed_point(std::vector<double> lambda, UpdateFn&& update,
                                          const FitOptions& opt, const char* what) {
    double damping = 1.0;
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        const std::vector<double> target = update(lambda);
        double residual = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i)
            residual = std::max(residual, std::abs(target[i] - lambda[i]));
        if (residual < opt.tol)
            return {std::move(lambda), residual, iter};
        // A non-improving residual covers both growth and perfect cycling.
        if (!(residual < prev_residual))
            damping = std::max(damping * 0.5, 1.0 / 64.0);
        else
            damping = std::min(damping * 1.5, 1.0);
        for (std::size_t i = 0; i < lambda.size(); ++i)
            lambda[i] += damping * (target[i] - lambda[i]);
        prev_residual = residual;
    }
    throw numerical_error(std::string(what) + ": no convergence in " +
                          std::to_string(opt.max_iter) + " iterations (residual " +
                          std::to_string(prev_residual) + ")");
}

}  // namespace detail

// Maximum-likelihood log-strengths by fixed-point sweeps, re-centered to
// sum zero after every sweep.
inline Strengths fit_mle(const WinMatrix& v, const FitOptions& opt = {},
                         int* sweeps = nullptr) {
    check_ford_condition(v);
    auto update = [&](const std::vector<double>& lam) {
        std::vector<double> next = detail::fixed_point_update(lam, v);
        double mean = 0.0;
        for (double x : next)
            mean += x;
        mean /= static_cast<double>(next.size());
        for (double& x : next)
            x -= mean;
        return next;
    };
    auto res = detail::solve_fixed_point(
        std::vector<double>(static_cast<std::size_t>(v.n_teams), 0.0), update, opt, "fit_mle");
    if (sweeps)
        *sweeps = res.iterations;
    return Strengths{std::move(res.lambda), Normalization::SumZero};
}

namespace detail {

// Solve H x = b for symmetric positive definite H (in-place Cholesky).
inline std::vector<double> solve_spd(DenseMatrix h, std::vector<double> b) {
    const int n = h.dim;
    for (int k = 0; k < n; ++k) {
        double d = h(k, k);
        for (int m = 0; m < k; ++m)
            d -= h(k, m) * h(k, m);
        if (!(d > 0.0))
            throw numerical_error("solve_spd: matrix not positive definite");
        const double rkk = std::sqrt(d);
        h.at(k, k) = rkk;
        for (int i = k + 1; i < n; ++i) {
            double s = h(i, k);
            for (int m = 0; m < k; ++m)
                s -= h(i, m) * h(k, m);
            h.at(i, k) = s / rkk;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int m = 0; m < i; ++m)
            s -= h(i, m) * b[static_cast<std::size_t>(m)];
        b[static_cast<std::size_t>(i)] = s / h(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int m = i + 1; m < n; ++m)
            s -= h(m, i) * b[static_cast<std::size_t>(m)];
        b[static_cast<std::size_t>(i)] = s / h(i, i);
    }
    return b;
}

}  // namespace detail

// MAP log-strengths for a fixed Gaussian scale sigma (no re-centering: the
// prior breaks the translation symmetry). The objective is strictly concave
// in lambda, so a damped Newton iteration converges from zero for any
// record, including winless, lossless and gameless teams.
inline Strengths fit_map_fixed_sigma(const WinMatrix& v, double sigma,
                                     const FitOptions& opt = {}, int* newton_iters = nullptr) {
    if (!(sigma > 0.0))
        throw std::domain_error("fit_map_fixed_sigma: requires sigma > 0");
    const int n = v.n_teams;
    const double inv2 = 1.0 / (sigma * sigma);

    Strengths lam = zero_strengths(n);
    lam.normalization = Normalization::Raw;
    auto objective = [&](const Strengths& l) {
        double ss = 0.0;
        for (double x : l.lambda)
            ss += x * x;
        return log_likelihood(l, v) - 0.5 * ss * inv2;
    };

    double value = objective(lam);
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        PosteriorGradient g = grad_log_posterior(lam, sigma, v);
        double gmax = 0.0;
        for (double d : g.dlambda)
            gmax = std::max(gmax, std::abs(d));

        DenseMatrix h_full = hessian(lam, sigma, v);
        DenseMatrix h(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                h.at(i, j) = h_full(i, j);
        const std::vector<double> step = detail::solve_spd(std::move(h), g.dlambda);

        double smax = 0.0;
        for (double d : step)
            smax = std::max(smax, std::abs(d));
        if (smax < opt.tol && gmax < std::sqrt(opt.tol)) {
            if (newton_iters)
                *newton_iters += iter;
            return lam;
        }

        double alpha = 1.0;
        for (int back = 0; back < 60; ++back) {
            Strengths trial = lam;
            for (int i = 0; i < n; ++i)
                trial[i] += alpha * step[static_cast<std::size_t>(i)];
            const double trial_value = objective(trial);
            if (trial_value >= value - 1e-14 * std::abs(value)) {
                lam = std::move(trial);
                value = trial_value;
                break;
            }
            alpha *= 0.5;
        }
    }
    throw numerical_error("fit_map_fixed_sigma: no convergence in " +
                          std::to_string(opt.max_iter) + " iterations");
}

enum class MapMode {
    Coupled,    // jointly solve the lambda equations with sigma = rms(lambda)
    MLEPlugin,  // sigma from the MLE strengths, then solve lambda at that sigma
};

struct MapEstimate {
    Strengths lambda_hat;
    double sigma_hat = 0.0;
    double varsigma_hat = 0.0;
    bool degenerate = false;  // self-consistency collapsed to lambda = 0, sigma = 0
    int iterations = 0;
};

// Joint (lambda, sigma) estimation. The coupled system is solved by
// profiling: lambda*(sigma) is the unique fixed-sigma solution (the target
// is strictly concave in lambda), and the scalar self-consistency condition
// rms(lambda*(sigma)) = sigma is bisected at its outermost sign change,
// which is the local maximum of the sigma-profile. When rms(lambda*(sigma))
// stays below sigma for every sigma, the only self-consistent point is the
// collapse at lambda = 0, sigma = 0, and the estimate is returned with the
// degenerate flag set. Fully symmetric records are the simplest such case;
// near-parity seasons can collapse the same way.
inline MapEstimate fit_map(const WinMatrix& v, MapMode mode, const FitOptions& opt = {}) {
    const int n = v.n_teams;
    if (n < 2)
        throw data_error("fit_map requires at least two teams");
    constexpr double kDegenerate = 1e-6;

    if (mode == MapMode::MLEPlugin) {
        MapEstimate est;
        const Strengths mle = fit_mle(v, opt, &est.iterations);
        const double sig = sigma_hat_of(mle);
        est.sigma_hat = sig;
        est.degenerate = sig < kDegenerate;
        est.varsigma_hat = est.degenerate ? 0.0 : varsigma_hat_of(sig, n);
        est.lambda_hat = est.degenerate ? zero_strengths(n)
                                        : fit_map_fixed_sigma(v, sig, opt, &est.iterations);
        return est;
    }

    int iterations = 0;
    auto profile_gap = [&](double sigma, Strengths* out = nullptr) {
        Strengths lam = fit_map_fixed_sigma(v, sigma, opt, &iterations);
        const double rms = sigma_hat_of(lam);
        if (out)
            *out = std::move(lam);
        return rms - sigma;
    };

    // Geometric scan for the outermost positive-to-negative crossing of
    // rms(lambda*(sigma)) - sigma.
    double lo = 0.0, hi = 0.0;
    {
        double prev_sigma = 0.0;
        double prev_gap = -1.0;  // the gap is negative as sigma -> 0
        for (double sigma = 0.005; sigma <= 40.0; sigma *= 1.18) {
            const double gap = profile_gap(sigma);
            if (prev_gap > 0.0 && gap <= 0.0) {
                lo = prev_sigma;
                hi = sigma;  // keep scanning: the outermost crossing wins
            }
            prev_sigma = sigma;
            prev_gap = gap;
        }
        if (prev_gap > 0.0)
            throw numerical_error(
                "fit_map(Coupled): no self-consistent scale below 40");
    }

    MapEstimate est;
    if (hi == 0.0) {
        est.lambda_hat = zero_strengths(n);
        est.degenerate = true;
        est.iterations = iterations;
        return est;
    }

    while (hi - lo > 0.01 * opt.tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (profile_gap(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    Strengths lam;
    profile_gap(0.5 * (lo + hi), &lam);
    est.sigma_hat = sigma_hat_of(lam);
    est.lambda_hat = std::move(lam);
    est.iterations = iterations;
    est.degenerate = est.sigma_hat < kDegenerate;
    est.varsigma_hat = est.degenerate ? 0.0 : varsigma_hat_of(est.sigma_hat, n);
    return est;
}

}  // namespace bbt
