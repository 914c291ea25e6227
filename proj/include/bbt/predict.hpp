#pragma once

// Posterior-predictive and plug-in forecasts of test-set wins, the
// absolute-error metrics, and the train/test partition sweep.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/game_log.hpp"
#include "bbt/inference.hpp"
#include "bbt/rng.hpp"
#include "bbt/sampler.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/team_index.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

// E[wins_i | V] under the posterior: the exact conditional expectation
// sum_j n~_ij logistic(lambda_i - lambda_j) per draw, averaged over draws.
// No binomial noise is added.
inline std::vector<double> expected_wins_bayes(const PosteriorDraws& draws,
                                               const ScheduleMatrix& test_schedule) {
    if (draws.n_teams != test_schedule.n_teams)
        throw std::invalid_argument("expected_wins_bayes: dimension mismatch");
    const int n = draws.n_teams;
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::int64_t count = 0;
    for (int c = 0; c < draws.chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d) {
            const auto row = draws.row(c, d);
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    const std::int64_t nij = test_schedule(i, j);
                    if (nij == 0)
                        continue;
                    const double p = logistic(row[static_cast<std::size_t>(i)] -
                                              row[static_cast<std::size_t>(j)]);
                    acc[static_cast<std::size_t>(i)] += nij * p;
                    acc[static_cast<std::size_t>(j)] += nij * (1.0 - p);
                }
            }
            ++count;
        }
    }
    if (count == 0)
        throw std::invalid_argument("expected_wins_bayes: no draws");
    for (double& x : acc)
        x /= static_cast<double>(count);
    return acc;
}

// Plug-in expectation at a point estimate.
inline std::vector<double> expected_wins_mle(const Strengths& lambda,
                                             const ScheduleMatrix& test_schedule) {
    if (lambda.size() != test_schedule.n_teams)
        throw std::invalid_argument("expected_wins_mle: dimension mismatch");
    const int n = test_schedule.n_teams;
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::int64_t nij = test_schedule(i, j);
            if (nij == 0)
                continue;
            const double p = logistic(lambda[i] - lambda[j]);
            acc[static_cast<std::size_t>(i)] += nij * p;
            acc[static_cast<std::size_t>(j)] += nij * (1.0 - p);
        }
    }
    return acc;
}

struct ErrorMetrics {
    std::vector<double> per_team;  // |predicted - actual|
    double mean = 0.0;
    double sd = 0.0;  // population form, 1/N
};

inline ErrorMetrics error_metrics(std::span<const double> predicted,
                                  std::span<const double> actual) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("error_metrics: length mismatch");
    if (predicted.empty())
        throw std::invalid_argument("error_metrics: empty input");
    ErrorMetrics m;
    m.per_team.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i)
        m.per_team.push_back(std::abs(predicted[i] - actual[i]));
    for (double e : m.per_team)
        m.mean += e;
    m.mean /= static_cast<double>(m.per_team.size());
    for (double e : m.per_team)
        m.sd += (e - m.mean) * (e - m.mean);
    m.sd = std::sqrt(m.sd / static_cast<double>(m.per_team.size()));
    return m;
}

struct PartitionLabel {
    std::string label;
    Date cutoff;
};

struct PartitionOutcome {
    std::string label;
    Date cutoff;
    bool skipped = false;       // empty train or empty test
    bool mle_fallback = false;  // Ford condition failed; ridge-stabilized
    std::int64_t train_games = 0;
    std::int64_t test_games = 0;
    double error_bayes = 0.0, error_mle = 0.0;
    double sd_bayes = 0.0, sd_mle = 0.0;
    std::vector<double> predicted_bayes, predicted_mle, actual;
};

struct SweepReport {
    std::vector<PartitionOutcome> partitions;  // chronological
};

struct PredictOptions {
    TiePolicy ties = TiePolicy::Reject;
    // The cross convention spreads the Bayes per-team errors around the
    // other method's mean; the default uses each method's own errors.
    bool cross_sd_convention = false;
};

namespace detail {

inline double cross_sd(const std::vector<double>& errors, double center) {
    double acc = 0.0;
    for (double e : errors)
        acc += (e - center) * (e - center);
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

}  // namespace detail

// Fit both methods on the train split and score them on the test split.
// The MLE branch falls back to a ridge-stabilized fit (MAP with sigma fixed
// at the hyperprior mean) when the train record fails the Ford condition.
inline PartitionOutcome evaluate_partition(const std::vector<Game>& games,
                                           const TeamIndex& index, const PartitionLabel& cut,
                                           const HyperPrior& hyper, const SamplerConfig& config,
                                           const PredictOptions& opt = {}) {
    PartitionOutcome out;
    out.label = cut.label;
    out.cutoff = cut.cutoff;

    auto [train, test] = split_by_date(games, cut.cutoff);
    out.train_games = static_cast<std::int64_t>(train.size());
    out.test_games = static_cast<std::int64_t>(test.size());
    if (train.empty() || test.empty()) {
        out.skipped = true;
        return out;
    }

    const WinMatrix train_v = build_win_matrix(train, index, opt.ties);
    const WinMatrix test_v = build_win_matrix(test, index, opt.ties);
    const ScheduleMatrix test_n = schedule_from(test_v);

    out.actual.reserve(static_cast<std::size_t>(index.size()));
    for (int i = 0; i < index.size(); ++i)
        out.actual.push_back(static_cast<double>(test_v.wins_of(i)));

    SamplerConfig cfg = config;
    if (cfg.stream_labels.empty())
        cfg.stream_labels = index.stream_labels();
    const PosteriorDraws draws = sample_posterior(train_v, hyper, cfg);
    out.predicted_bayes = expected_wins_bayes(draws, test_n);

    Strengths point;
    try {
        point = fit_mle(train_v);
    } catch (const ford_error&) {
        point = fit_map_fixed_sigma(train_v, hyper.mean());
        out.mle_fallback = true;
    }
    out.predicted_mle = expected_wins_mle(point, test_n);

    const ErrorMetrics mb = error_metrics(out.predicted_bayes, out.actual);
    const ErrorMetrics mm = error_metrics(out.predicted_mle, out.actual);
    out.error_bayes = mb.mean;
    out.error_mle = mm.mean;
    out.sd_bayes = mb.sd;
    out.sd_mle = opt.cross_sd_convention ? detail::cross_sd(mb.per_team, mm.mean) : mm.sd;
    return out;
}

// Sweep over successive cutoffs. Partitions with an empty train or test
// split are recorded as skipped. Each partition derives its own sampler
// seed from (seed, ordinal) so results do not depend on evaluation order.
inline SweepReport partition_sweep(const std::vector<Game>& games, const TeamIndex& index,
                                   const std::vector<PartitionLabel>& partitions,
                                   const HyperPrior& hyper, const SamplerConfig& config,
                                   const PredictOptions& opt = {}) {
    SweepReport report;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        SamplerConfig cfg = config;
        cfg.seed = rng::key(config.seed, 0x5a33e9ull, k);
        report.partitions.push_back(
            evaluate_partition(games, index, partitions[k], hyper, cfg, opt));
    }
    return report;
}

// The standard eleven in-season cutoffs, Apr15 through Sep15.
inline std::vector<PartitionLabel> default_partitions(int year) {
    std::vector<PartitionLabel> out;
    const std::pair<unsigned, unsigned> cuts[] = {{4, 15}, {5, 1},  {5, 15}, {6, 1},
                                                  {6, 15}, {7, 1},  {7, 15}, {8, 1},
                                                  {8, 15}, {9, 1},  {9, 15}};
    static const char* names[] = {"Apr15", "May1", "May15", "Jun1", "Jun15", "Jul1",
                                  "Jul15", "Aug1", "Aug15", "Sep1", "Sep15"};
    for (std::size_t k = 0; k < 11; ++k)
        out.push_back(PartitionLabel{
            names[k], Date{std::chrono::year{year}, std::chrono::month{cuts[k].first},
                           std::chrono::day{cuts[k].second}}});
    return out;
}

// Accepts either an 8-digit YYYYMMDD date or a month-day label such as
// "Apr15"/"Sep1", resolved within the given season year.
inline PartitionLabel parse_partition(const std::string& text, int year) {
    if (auto date = parse_date(text))
        return PartitionLabel{text, *date};
    static const char* months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (unsigned m = 0; m < 12; ++m) {
        const std::string name = months[m];
        if (text.size() > name.size() && text.compare(0, name.size(), name) == 0) {
            int day = 0;
            const std::string rest = text.substr(name.size());
            auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), day);
            if (ec != std::errc{} || ptr != rest.data() + rest.size())
                break;
            const Date d{std::chrono::year{year}, std::chrono::month{m + 1},
                         std::chrono::day{static_cast<unsigned>(day)}};
            if (!d.ok())
                throw data_error("partition '" + text + "' is not a valid date in " +
                                 std::to_string(year));
            return PartitionLabel{text, d};
        }
    }
    throw data_error("unrecognized partition '" + text +
                     "': use YYYYMMDD or a label like Apr15");
}

}  // namespace bbt
