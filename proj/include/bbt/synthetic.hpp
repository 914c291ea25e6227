#pragma once

// Synthetic season generation for calibration studies and oracle tests.
// A balanced schedule is built by cycling the circle-method round-robin:
// every team plays exactly one game per round, so pair counts stay within
// one game of each other.

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/game_log.hpp"
#include "bbt/rng.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/team_index.hpp"

namespace bbt {

// Pairings for one round of the circle method (teams must be even).
inline std::vector<std::pair<int, int>> round_robin_pairs(int n_teams, int round) {
    if (n_teams < 2 || n_teams % 2 != 0)
        throw std::invalid_argument("round_robin_pairs: team count must be even and >= 2");
    const int m = n_teams - 1;
    const int r = round % m;
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n_teams) / 2);
    pairs.emplace_back(0, 1 + r);
    for (int k = 1; k < n_teams / 2; ++k) {
        const int a = 1 + (r + k) % m;
        const int b = 1 + (r - k + m) % m;
        pairs.emplace_back(a, b);
    }
    return pairs;
}

// Calendar date of a round: rounds are spread evenly over a 183-day season
// starting April 1 (dates are strictly increasing per round whenever the
// round count fits the season).
inline Date synthetic_round_date(int round, int games_per_team, int year) {
    constexpr int kSeasonDays = 183;
    const int offset = static_cast<int>((static_cast<std::int64_t>(round) * kSeasonDays) /
                                        games_per_team);
    return add_days(Date{std::chrono::year{year}, std::chrono::April, std::chrono::day{1}},
                    offset);
}

inline std::vector<std::string> synthetic_team_codes(int n_teams) {
    std::vector<std::string> codes;
    codes.reserve(static_cast<std::size_t>(n_teams));
    for (int i = 0; i < n_teams; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "T%02d", i + 1);
        codes.emplace_back(buf);
    }
    return codes;
}

// True strengths lambda_i ~ N(0, sigma_star^2).
inline Strengths draw_strengths(int n_teams, double sigma_star, std::uint64_t seed) {
    Strengths s{std::vector<double>(static_cast<std::size_t>(n_teams)), Normalization::Raw};
    for (int i = 0; i < n_teams; ++i)
        s[i] = sigma_star * rng::normal(rng::key(seed, 0x7472757468ull /* "truth" */,
                                                 static_cast<std::uint64_t>(i)));
    return s;
}

struct SyntheticSeason {
    TeamIndex index;
    Strengths truth;
    std::vector<Game> games;
};

// Full synthetic season: games_per_team rounds at one game per team per
// round, outcomes drawn from the pairwise win probabilities. Winner scores
// 1-0; home side alternates with the round parity.
inline SyntheticSeason simulate_game_log(const Strengths& truth, int games_per_team, int year,
                                         std::uint64_t seed) {
    const int n_teams = truth.size();
    SyntheticSeason out{TeamIndex::from_codes(synthetic_team_codes(n_teams)), truth, {}};
    out.games.reserve(static_cast<std::size_t>(n_teams) * games_per_team / 2);
    for (int round = 0; round < games_per_team; ++round) {
        const Date date = synthetic_round_date(round, games_per_team, year);
        for (auto [a, b] : round_robin_pairs(n_teams, round)) {
            const int home = (round % 2 == 0) ? a : b;
            const int away = (round % 2 == 0) ? b : a;
            const double p_home = logistic(truth[home] - truth[away]);
            const bool home_wins =
                rng::uniform01(rng::key(seed, static_cast<std::uint64_t>(round),
                                        static_cast<std::uint64_t>(home),
                                        static_cast<std::uint64_t>(away))) < p_home;
            out.games.push_back(Game{date, out.index.code(home), out.index.code(away),
                                     home_wins ? 1 : 0, home_wins ? 0 : 1});
        }
    }
    return out;
}

inline SyntheticSeason simulate_game_log(int n_teams, int games_per_team, double sigma_star,
                                         int year, std::uint64_t seed) {
    return simulate_game_log(draw_strengths(n_teams, sigma_star, seed), games_per_team, year,
                             seed);
}

}  // namespace bbt
