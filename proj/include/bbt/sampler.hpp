#pragma once

// Full-posterior MCMC over (lambda, sigma) for the hierarchical model
//
//     sigma ~ Gamma(shape, rate)
//     lambda_i | sigma ~ N(0, sigma^2)
//     V | lambda ~ pairwise Bradley-Terry(exp(lambda))
//
// sampled on the unconstrained space (lambda, u = log sigma) with the
// log-sigma Jacobian included. The default algorithm is Hamiltonian Monte
// Carlo with jittered leapfrog trajectories, dual-averaging step-size
// adaptation toward a target acceptance rate, and one diagonal mass-matrix
// adaptation window; an adaptive random-walk Metropolis fallback is
// available for debugging.
//
// Every random draw is keyed by (seed, chain, iteration, dimension label)
// and all cross-dimension reductions run in label order, so chains are
// reproducible in parallel and a permuted team order permutes the draws
// bit-for-bit (given a permutation-adjusted explicit init).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbt/diagnostics.hpp"
#include "bbt/errors.hpp"
#include "bbt/inference.hpp"
#include "bbt/rng.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

struct SamplerConfig {
    int chains = 4;
    int warmup = 1000;
    int draws_per_chain = 1000;
    std::uint64_t seed = 0;
    double target_accept = 0.8;
    double init_step_size = 0.2;
    double trajectory_time = 1.5;  // in mass-standardized units
    int max_leapfrog = 64;
    double init_jitter = 1.0;  // chain-init spread, in initial-scale units

    enum class Algorithm { Hmc, RandomWalk };
    Algorithm algorithm = Algorithm::Hmc;

    // Per-team random stream labels (defaults to 0..N-1). Supplying stable
    // team-derived labels makes the draws equivariant under team reordering.
    std::vector<std::uint64_t> stream_labels;

    // Optional explicit start point (lambda_1..lambda_N, sigma); otherwise
    // chains start from the MAP strengths at the hyperprior mean scale.
    std::optional<std::vector<double>> init;
};

// Post-warmup draws, one row per (chain, iteration): lambda_1..lambda_N,
// then sigma.
struct PosteriorDraws {
    int n_teams = 0;
    int chains = 0;
    int draws_per_chain = 0;
    std::vector<double> data;

    std::vector<double> chain_accept;    // mean acceptance probability
    std::vector<double> chain_step;      // adapted leapfrog step size / RW scale
    std::vector<int> chain_divergences;  // post-warmup divergent trajectories
    std::vector<std::string> warnings;

    int n_params() const { return n_teams + 1; }

    double value(int chain, int draw, int param) const {
        return data[(static_cast<std::size_t>(chain) * draws_per_chain + draw) * n_params() +
                    param];
    }

    std::span<const double> row(int chain, int draw) const {
        return {data.data() +
                    (static_cast<std::size_t>(chain) * draws_per_chain + draw) * n_params(),
                static_cast<std::size_t>(n_params())};
    }

    // One parameter's series, per chain.
    std::vector<std::vector<double>> series(int param) const {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(chains));
        for (int c = 0; c < chains; ++c) {
            out[static_cast<std::size_t>(c)].reserve(static_cast<std::size_t>(draws_per_chain));
            for (int d = 0; d < draws_per_chain; ++d)
                out[static_cast<std::size_t>(c)].push_back(value(c, d, param));
        }
        return out;
    }
};

namespace detail {

inline constexpr std::uint64_t kSigmaStreamLabel = 0xf1d05ea50f5163a1ull;
inline constexpr std::uint64_t kChainTag = 0xc4a12f9d0b1e77c3ull;
inline constexpr std::uint64_t kInitTag = 0x1217a3bd52c90e4full;
inline constexpr std::uint64_t kAcceptTag = 0xacce97ull;
inline constexpr std::uint64_t kLengthTag = 0x7a9e51ull;

// Log-density and gradient of the unconstrained posterior. All reductions
// over dimensions follow the label-sorted traversal in `order`.
class HierarchicalTarget {
  public:
    HierarchicalTarget(const WinMatrix& v, const HyperPrior& prior,
                       const std::vector<std::uint64_t>& labels)
        : v_(&v), prior_(prior) {
        const int n = v.n_teams;
        order_.resize(static_cast<std::size_t>(n));
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](int a, int b) { return labels[a] < labels[b]; });
        gamma_const_ = prior.shape * std::log(prior.rate) - std::lgamma(prior.shape);
    }

    int n_teams() const { return v_->n_teams; }
    int dim() const { return v_->n_teams + 1; }
    const std::vector<int>& order() const { return order_; }

    // theta = (lambda..., u); grad resized to dim().
    double log_density_grad(std::span<const double> theta, std::vector<double>& grad) const {
        const int n = v_->n_teams;
        const double u = theta[static_cast<std::size_t>(n)];
        const double sigma = std::exp(u);
        grad.assign(static_cast<std::size_t>(n) + 1, 0.0);

        double ll = 0.0;
        for (std::size_t oi = 0; oi < order_.size(); ++oi) {
            const int i = order_[oi];
            for (std::size_t oj = oi + 1; oj < order_.size(); ++oj) {
                const int j = order_[oj];
                const std::int64_t nij = v_->games_between(i, j);
                if (nij == 0)
                    continue;
                const double li = theta[static_cast<std::size_t>(i)];
                const double lj = theta[static_cast<std::size_t>(j)];
                const double l = log_add_exp(li, lj);
                const double pij = std::exp(li - l);
                const double pji = std::exp(lj - l);
                ll += static_cast<double>((*v_)(i, j)) * (li - l) +
                      static_cast<double>((*v_)(j, i)) * (lj - l);
                grad[static_cast<std::size_t>(i)] += static_cast<double>((*v_)(i, j)) - nij * pij;
                grad[static_cast<std::size_t>(j)] += static_cast<double>((*v_)(j, i)) - nij * pji;
            }
        }

        const double inv2 = 1.0 / (sigma * sigma);
        double ss = 0.0;
        for (int oi : order_) {
            const double li = theta[static_cast<std::size_t>(oi)];
            ss += li * li;
            grad[static_cast<std::size_t>(oi)] -= li * inv2;
        }

        // N(0, sigma^2) prior, Gamma hyperprior in sigma, log-sigma Jacobian.
        const double lp = ll - 0.5 * ss * inv2 - n * u + gamma_const_ +
                          (prior_.shape - 1.0) * u - prior_.rate * sigma + u;
        grad[static_cast<std::size_t>(n)] =
            ss * inv2 - n + (prior_.shape - 1.0) - prior_.rate * sigma + 1.0;
        return lp;
    }

  private:
    const WinMatrix* v_;
    HyperPrior prior_;
    std::vector<int> order_;
    double gamma_const_ = 0.0;
};

// Nesterov dual averaging of log(eps) toward a target acceptance rate.
struct DualAveraging {
    double mu = 0.0;
    double log_eps = 0.0;
    double log_eps_bar = 0.0;
    double h_bar = 0.0;
    int t = 0;

    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;

    void reset(double eps0) {
        mu = std::log(10.0 * eps0);
        log_eps = std::log(eps0);
        log_eps_bar = std::log(eps0);
        h_bar = 0.0;
        t = 0;
    }

    void update(double accept_prob, double target) {
        ++t;
        const double eta = 1.0 / (t + kT0);
        h_bar = (1.0 - eta) * h_bar + eta * (target - accept_prob);
        log_eps = mu - std::sqrt(static_cast<double>(t)) / kGamma * h_bar;
        const double w = std::pow(static_cast<double>(t), -kKappa);
        log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
    }

    double eps() const { return std::exp(log_eps); }
    double eps_bar() const { return std::exp(log_eps_bar); }
};

struct ChainResult {
    std::vector<double> draws;  // draws_per_chain x (N+1), lambda then sigma
    double accept_mean = 0.0;
    double step_size = 0.0;
    int divergences = 0;
    int warmup_divergences = 0;
};

struct ChainSettings {
    std::vector<double> init_theta;   // unconstrained
    std::vector<double> init_scale;   // per-dim scale guess (posterior sd)
    std::vector<std::uint64_t> label; // per-dim stream labels, u last
};

inline ChainResult run_chain_hmc(const HierarchicalTarget& target, const SamplerConfig& cfg,
                                 const ChainSettings& cs, int chain) {
    const int dim = target.dim();
    const int total_iters = cfg.warmup + cfg.draws_per_chain;
    const std::uint64_t ck =
        rng::key(cfg.seed, kChainTag, static_cast<std::uint64_t>(chain));

    std::vector<double> theta = cs.init_theta;
    for (int d = 0; d < dim; ++d)
        theta[static_cast<std::size_t>(d)] +=
            cfg.init_jitter * cs.init_scale[static_cast<std::size_t>(d)] *
            rng::normal(rng::key(ck, kInitTag, cs.label[static_cast<std::size_t>(d)]));

    std::vector<double> scale = cs.init_scale;
    std::vector<double> grad(static_cast<std::size_t>(dim));
    double lp = target.log_density_grad(theta, grad);
    if (!std::isfinite(lp))
        throw numerical_error("sample_posterior: non-finite log density at initialization");

    DualAveraging da;
    da.reset(cfg.init_step_size);
    double eps = cfg.init_step_size;

    // One mass window covering the middle of warmup.
    const bool adapt_mass = cfg.warmup >= 40;
    const int w1 = adapt_mass ? std::max(10, cfg.warmup * 15 / 100) : cfg.warmup;
    const int w3 = adapt_mass ? std::max(10, cfg.warmup * 10 / 100) : 0;
    const int mass_end = cfg.warmup - w3;
    std::vector<double> wsum(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> wsum2(static_cast<std::size_t>(dim), 0.0);
    int wcount = 0;

    std::vector<double> p(static_cast<std::size_t>(dim));
    std::vector<double> theta_prop(static_cast<std::size_t>(dim));
    std::vector<double> grad_prop(static_cast<std::size_t>(dim));

    ChainResult out;
    out.draws.reserve(static_cast<std::size_t>(cfg.draws_per_chain) * dim);
    double accept_acc = 0.0;

    for (int iter = 0; iter < total_iters; ++iter) {
        const bool warm = iter < cfg.warmup;
        const std::uint64_t ik = static_cast<std::uint64_t>(iter);

        for (int d = 0; d < dim; ++d)
            p[static_cast<std::size_t>(d)] =
                rng::normal(rng::key(ck, ik, cs.label[static_cast<std::size_t>(d)]));

        double kinetic0 = 0.0;
        for (int od : target.order())
            kinetic0 += p[static_cast<std::size_t>(od)] * p[static_cast<std::size_t>(od)];
        kinetic0 += p[static_cast<std::size_t>(dim - 1)] * p[static_cast<std::size_t>(dim - 1)];
        kinetic0 *= 0.5;
        const double h0 = -lp + kinetic0;

        const int l_cap = std::clamp(
            static_cast<int>(std::lround(cfg.trajectory_time / eps)), 1, cfg.max_leapfrog);
        const int steps =
            1 + static_cast<int>(rng::below(rng::key(ck, ik, kLengthTag),
                                            static_cast<std::uint64_t>(l_cap)));

        theta_prop = theta;
        grad_prop = grad;
        double lp_prop = lp;
        bool divergent = false;
        for (int s = 0; s < steps; ++s) {
            for (int d = 0; d < dim; ++d)
                p[static_cast<std::size_t>(d)] += 0.5 * eps *
                                                  scale[static_cast<std::size_t>(d)] *
                                                  grad_prop[static_cast<std::size_t>(d)];
            for (int d = 0; d < dim; ++d)
                theta_prop[static_cast<std::size_t>(d)] +=
                    eps * scale[static_cast<std::size_t>(d)] * p[static_cast<std::size_t>(d)];
            lp_prop = target.log_density_grad(theta_prop, grad_prop);
            if (!std::isfinite(lp_prop)) {
                divergent = true;
                break;
            }
            for (int d = 0; d < dim; ++d)
                p[static_cast<std::size_t>(d)] += 0.5 * eps *
                                                  scale[static_cast<std::size_t>(d)] *
                                                  grad_prop[static_cast<std::size_t>(d)];
        }

        double accept_prob = 0.0;
        if (!divergent) {
            double kinetic1 = 0.0;
            for (int od : target.order())
                kinetic1 +=
                    p[static_cast<std::size_t>(od)] * p[static_cast<std::size_t>(od)];
            kinetic1 +=
                p[static_cast<std::size_t>(dim - 1)] * p[static_cast<std::size_t>(dim - 1)];
            kinetic1 *= 0.5;
            const double h1 = -lp_prop + kinetic1;
            if (!std::isfinite(h1) || h1 - h0 > 1000.0)
                divergent = true;
            else
                accept_prob = std::min(1.0, std::exp(h0 - h1));
        }

        if (!divergent &&
            rng::uniform01(rng::key(ck, ik, kAcceptTag)) < accept_prob) {
            theta = theta_prop;
            grad = grad_prop;
            lp = lp_prop;
        }

        if (warm) {
            if (divergent)
                ++out.warmup_divergences;
            da.update(accept_prob, cfg.target_accept);
            eps = da.eps();
            if (adapt_mass && iter >= w1 && iter < mass_end) {
                for (int d = 0; d < dim; ++d) {
                    wsum[static_cast<std::size_t>(d)] += theta[static_cast<std::size_t>(d)];
                    wsum2[static_cast<std::size_t>(d)] +=
                        theta[static_cast<std::size_t>(d)] * theta[static_cast<std::size_t>(d)];
                }
                ++wcount;
                if (iter + 1 == mass_end && wcount >= 20) {
                    const double nw = static_cast<double>(wcount);
                    for (int d = 0; d < dim; ++d) {
                        const double mean = wsum[static_cast<std::size_t>(d)] / nw;
                        double var =
                            wsum2[static_cast<std::size_t>(d)] / nw - mean * mean;
                        // Shrink toward the curvature-based guess.
                        const double v0 = cs.init_scale[static_cast<std::size_t>(d)] *
                                          cs.init_scale[static_cast<std::size_t>(d)];
                        var = (nw * std::max(var, 0.0) + 5.0 * v0) / (nw + 5.0);
                        scale[static_cast<std::size_t>(d)] =
                            std::sqrt(std::clamp(var, 1e-10, 1e4));
                    }
                    da.reset(da.eps_bar());
                    eps = da.eps();
                }
            }
            if (iter + 1 == cfg.warmup)
                eps = da.eps_bar();
        } else {
            if (divergent)
                ++out.divergences;
            accept_acc += accept_prob;
            out.draws.insert(out.draws.end(), theta.begin(), theta.end());
            // store sigma, not u
            out.draws.back() = std::exp(theta[static_cast<std::size_t>(dim - 1)]);
        }
    }

    out.accept_mean = cfg.draws_per_chain > 0 ? accept_acc / cfg.draws_per_chain : 0.0;
    out.step_size = eps;
    return out;
}

inline ChainResult run_chain_rw(const HierarchicalTarget& target, const SamplerConfig& cfg,
                                const ChainSettings& cs, int chain) {
    const int dim = target.dim();
    const int total_iters = cfg.warmup + cfg.draws_per_chain;
    const std::uint64_t ck =
        rng::key(cfg.seed, kChainTag, static_cast<std::uint64_t>(chain));

    std::vector<double> theta = cs.init_theta;
    for (int d = 0; d < dim; ++d)
        theta[static_cast<std::size_t>(d)] +=
            cfg.init_jitter * cs.init_scale[static_cast<std::size_t>(d)] *
            rng::normal(rng::key(ck, kInitTag, cs.label[static_cast<std::size_t>(d)]));

    std::vector<double> grad(static_cast<std::size_t>(dim));
    double lp = target.log_density_grad(theta, grad);
    if (!std::isfinite(lp))
        throw numerical_error("sample_posterior: non-finite log density at initialization");

    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
    std::vector<double> prop(static_cast<std::size_t>(dim));

    ChainResult out;
    out.draws.reserve(static_cast<std::size_t>(cfg.draws_per_chain) * dim);
    double accept_acc = 0.0;
    constexpr double kTargetRw = 0.3;

    for (int iter = 0; iter < total_iters; ++iter) {
        const bool warm = iter < cfg.warmup;
        const std::uint64_t ik = static_cast<std::uint64_t>(iter);
        const double s = std::exp(log_scale);
        for (int d = 0; d < dim; ++d)
            prop[static_cast<std::size_t>(d)] =
                theta[static_cast<std::size_t>(d)] +
                s * cs.init_scale[static_cast<std::size_t>(d)] *
                    rng::normal(rng::key(ck, ik, cs.label[static_cast<std::size_t>(d)]));
        const double lp_prop = target.log_density_grad(prop, grad);
        const double accept_prob =
            std::isfinite(lp_prop) ? std::min(1.0, std::exp(lp_prop - lp)) : 0.0;
        if (rng::uniform01(rng::key(ck, ik, kAcceptTag)) < accept_prob) {
            theta = prop;
            lp = lp_prop;
        }
        if (warm) {
            log_scale += (accept_prob - kTargetRw) /
                         std::pow(static_cast<double>(iter + 1), 0.6);
        } else {
            accept_acc += accept_prob;
            out.draws.insert(out.draws.end(), theta.begin(), theta.end());
            out.draws.back() = std::exp(theta[static_cast<std::size_t>(dim - 1)]);
        }
    }
    out.accept_mean = cfg.draws_per_chain > 0 ? accept_acc / cfg.draws_per_chain : 0.0;
    out.step_size = std::exp(log_scale);
    return out;
}

}  // namespace detail

inline PosteriorDraws sample_posterior(const WinMatrix& v, const HyperPrior& hyper,
                                       const SamplerConfig& config) {
    validate(hyper);
    const int n = v.n_teams;
    if (n < 1)
        throw std::invalid_argument("sample_posterior: empty win matrix");
    if (config.chains < 2)
        throw std::invalid_argument("sample_posterior: at least 2 chains required");
    if (config.draws_per_chain < 1 || config.warmup < 0)
        throw std::invalid_argument("sample_posterior: bad iteration counts");
    if (!config.stream_labels.empty() &&
        static_cast<int>(config.stream_labels.size()) != n)
        throw std::invalid_argument("sample_posterior: stream_labels size mismatch");

    std::vector<std::uint64_t> labels(static_cast<std::size_t>(n));
    if (config.stream_labels.empty())
        std::iota(labels.begin(), labels.end(), 0);
    else
        labels = config.stream_labels;

    detail::HierarchicalTarget target(v, hyper, labels);

    detail::ChainSettings cs;
    cs.label = labels;
    cs.label.push_back(detail::kSigmaStreamLabel);

    const double sigma0 = hyper.mean();
    if (config.init) {
        if (static_cast<int>(config.init->size()) != n + 1)
            throw std::invalid_argument("sample_posterior: init size mismatch");
        if (!((*config.init)[static_cast<std::size_t>(n)] > 0.0))
            throw std::invalid_argument("sample_posterior: init sigma must be positive");
        cs.init_theta = *config.init;
        cs.init_theta[static_cast<std::size_t>(n)] =
            std::log(cs.init_theta[static_cast<std::size_t>(n)]);
    } else {
        const Strengths start = fit_map_fixed_sigma(v, sigma0);
        cs.init_theta = start.lambda;
        cs.init_theta.push_back(std::log(sigma0));
    }

    // Curvature-based initial scales: 1/sqrt(diag H) for the strengths and
    // the sigma-block curvature 2*sum(lambda^2)/sigma^2 + rate*sigma for u.
    // Sums run in label order, like every other reduction in the sampler.
    cs.init_scale.assign(static_cast<std::size_t>(n) + 1, 0.0);
    double ss = 0.0;
    for (int i : target.order()) {
        double hii = 1.0 / (sigma0 * sigma0);
        for (int j : target.order()) {
            if (j == i)
                continue;
            const std::int64_t nij = v.games_between(i, j);
            if (nij == 0)
                continue;
            const double l = log_add_exp(cs.init_theta[static_cast<std::size_t>(i)],
                                         cs.init_theta[static_cast<std::size_t>(j)]);
            hii += nij * std::exp(cs.init_theta[static_cast<std::size_t>(i)] +
                                  cs.init_theta[static_cast<std::size_t>(j)] - 2.0 * l);
        }
        cs.init_scale[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(hii);
        ss += cs.init_theta[static_cast<std::size_t>(i)] *
              cs.init_theta[static_cast<std::size_t>(i)];
    }
    const double h_uu =
        std::max(2.0 * ss / (sigma0 * sigma0) + hyper.rate * sigma0, 1.0);
    cs.init_scale[static_cast<std::size_t>(n)] = 1.0 / std::sqrt(h_uu);

    PosteriorDraws out;
    out.n_teams = n;
    out.chains = config.chains;
    out.draws_per_chain = config.draws_per_chain;
    out.data.reserve(static_cast<std::size_t>(config.chains) * config.draws_per_chain *
                     (static_cast<std::size_t>(n) + 1));

    int divergences = 0;
    for (int c = 0; c < config.chains; ++c) {
        detail::ChainResult r = config.algorithm == SamplerConfig::Algorithm::Hmc
                                    ? detail::run_chain_hmc(target, config, cs, c)
                                    : detail::run_chain_rw(target, config, cs, c);
        out.data.insert(out.data.end(), r.draws.begin(), r.draws.end());
        out.chain_accept.push_back(r.accept_mean);
        out.chain_step.push_back(r.step_size);
        out.chain_divergences.push_back(r.divergences);
        divergences += r.divergences;
    }

    const int total_draws = config.chains * config.draws_per_chain;
    if (divergences > total_draws / 20)
        throw numerical_error("sample_posterior: " + std::to_string(divergences) + " of " +
                              std::to_string(total_draws) +
                              " post-warmup trajectories diverged");
    if (divergences > 0)
        out.warnings.push_back(std::to_string(divergences) +
                               " divergent post-warmup trajectories");

    for (int param = 0; param <= n; ++param) {
        const double rhat = split_rhat(out.series(param));
        if (std::isfinite(rhat) && rhat > 1.01) {
            out.warnings.push_back("split-Rhat " + std::to_string(rhat) + " on parameter " +
                                   std::to_string(param));
        }
    }
    return out;
}

}  // namespace bbt
