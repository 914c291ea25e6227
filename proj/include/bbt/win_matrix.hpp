#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/game_log.hpp"
#include "bbt/rng.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/team_index.hpp"

namespace bbt {

// V[i][j] = number of wins of team i over team j. Zero diagonal; the pair
// game counts n_ij = V_ij + V_ji are derived, never stored.
struct WinMatrix {
    int n_teams = 0;
    std::vector<std::int64_t> v;

    explicit WinMatrix(int n = 0)
        : n_teams(n), v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

    std::int64_t operator()(int i, int j) const {
        return v[static_cast<std::size_t>(i) * n_teams + j];
    }
    std::int64_t& at(int i, int j) { return v[static_cast<std::size_t>(i) * n_teams + j]; }

    std::int64_t games_between(int i, int j) const { return (*this)(i, j) + (*this)(j, i); }

    std::int64_t wins_of(int i) const {
        std::int64_t w = 0;
        for (int j = 0; j < n_teams; ++j)
            w += (*this)(i, j);
        return w;
    }

    std::int64_t losses_of(int i) const {
        std::int64_t l = 0;
        for (int j = 0; j < n_teams; ++j)
            l += (*this)(j, i);
        return l;
    }

    std::int64_t total_games() const {
        std::int64_t t = 0;
        for (std::int64_t x : v)
            t += x;
        return t;
    }

    WinMatrix transposed() const {
        WinMatrix t(n_teams);
        for (int i = 0; i < n_teams; ++i)
            for (int j = 0; j < n_teams; ++j)
                t.at(j, i) = (*this)(i, j);
        return t;
    }
};

// Symmetric pair game counts with zero diagonal.
struct ScheduleMatrix {
    int n_teams = 0;
    std::vector<std::int64_t> n;

    explicit ScheduleMatrix(int nt = 0)
        : n_teams(nt), n(static_cast<std::size_t>(nt) * static_cast<std::size_t>(nt), 0) {}

    std::int64_t operator()(int i, int j) const {
        return n[static_cast<std::size_t>(i) * n_teams + j];
    }
    std::int64_t& at(int i, int j) { return n[static_cast<std::size_t>(i) * n_teams + j]; }

    std::int64_t total_games() const {
        std::int64_t t = 0;
        for (std::int64_t x : n)
            t += x;
        return t / 2;
    }
};

enum class TiePolicy { Reject, Skip };

// Count wins per ordered pair. Home/away is irrelevant here: only the score
// comparison matters. Tied games are rejected unless the policy says skip,
// in which case they are counted into *ties_skipped.
inline WinMatrix build_win_matrix(const std::vector<Game>& games, const TeamIndex& index,
                                  TiePolicy ties = TiePolicy::Reject,
                                  int* ties_skipped = nullptr) {
    WinMatrix w(index.size());
    for (const Game& g : games) {
        const int hi = index.index_of(g.home);
        const int ai = index.index_of(g.away);
        if (hi == ai)
            throw data_error("game with identical teams '" + g.home + "'");
        if (g.tied()) {
            if (ties == TiePolicy::Reject)
                throw data_error("tied game " + g.home + " vs " + g.away + " on " +
                                 std::to_string(date_to_int(g.date)) +
                                 " cannot enter a win matrix");
            if (ties_skipped)
                ++*ties_skipped;
            continue;
        }
        if (g.home_score > g.away_score)
            ++w.at(hi, ai);
        else
            ++w.at(ai, hi);
    }
    return w;
}

inline ScheduleMatrix schedule_of(const std::vector<Game>& games, const TeamIndex& index) {
    ScheduleMatrix s(index.size());
    for (const Game& g : games) {
        const int hi = index.index_of(g.home);
        const int ai = index.index_of(g.away);
        if (hi == ai)
            throw data_error("game with identical teams '" + g.home + "'");
        ++s.at(hi, ai);
        ++s.at(ai, hi);
    }
    return s;
}

inline ScheduleMatrix schedule_from(const WinMatrix& w) {
    ScheduleMatrix s(w.n_teams);
    for (int i = 0; i < w.n_teams; ++i)
        for (int j = 0; j < w.n_teams; ++j)
            s.at(i, j) = w.games_between(i, j);
    return s;
}

// Draw V_ij ~ Binomial(n_ij, logistic(lambda_i - lambda_j)) for each pair,
// with V_ji = n_ij - V_ij. Each game outcome has its own (seed, i, j, game)
// key, so the result is reproducible and independent of evaluation order.
inline WinMatrix simulate_season(const Strengths& lambda, const ScheduleMatrix& schedule,
                                 std::uint64_t seed) {
    if (lambda.size() != schedule.n_teams)
        throw std::invalid_argument("simulate_season: dimension mismatch");
    for (int i = 0; i < schedule.n_teams; ++i) {
        if (schedule(i, i) != 0)
            throw std::invalid_argument("simulate_season: schedule diagonal must be zero");
        for (int j = i + 1; j < schedule.n_teams; ++j)
            if (schedule(i, j) != schedule(j, i))
                throw std::invalid_argument("simulate_season: schedule must be symmetric");
    }
    WinMatrix w(schedule.n_teams);
    for (int i = 0; i < schedule.n_teams; ++i) {
        for (int j = i + 1; j < schedule.n_teams; ++j) {
            const std::int64_t n = schedule(i, j);
            if (n == 0)
                continue;
            const double p = logistic(lambda[i] - lambda[j]);
            std::int64_t wins = 0;
            for (std::int64_t g = 0; g < n; ++g)
                if (rng::uniform01(rng::key(seed, static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(g))) < p)
                    ++wins;
            w.at(i, j) = wins;
            w.at(j, i) = n - wins;
        }
    }
    return w;
}

// Win-matrix file: first line "N code_1 ... code_N", then N rows of N
// whitespace-separated integers. Lines starting with '#' are ignored.
inline void write_win_matrix(std::ostream& out, const TeamIndex& index, const WinMatrix& w) {
    out << index.size();
    for (const auto& c : index.codes())
        out << ' ' << c;
    out << '\n';
    for (int i = 0; i < w.n_teams; ++i) {
        for (int j = 0; j < w.n_teams; ++j)
            out << (j ? " " : "") << w(i, j);
        out << '\n';
    }
}

struct LabeledWinMatrix {
    TeamIndex index;
    WinMatrix wins;
};

inline LabeledWinMatrix read_win_matrix(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            auto sv = detail::trim(line);
            if (!sv.empty() && sv.front() != '#') {
                line = std::string(sv);
                return true;
            }
        }
        return false;
    };
    if (!next_line())
        throw data_error("win-matrix file: empty input");
    std::istringstream head(line);
    int n = 0;
    if (!(head >> n) || n <= 0)
        throw data_error("win-matrix file: first line must start with the team count");
    std::vector<std::string> codes;
    std::string code;
    while (head >> code)
        codes.push_back(code);
    if (static_cast<int>(codes.size()) != n)
        throw data_error("win-matrix file: expected " + std::to_string(n) + " team codes, got " +
                         std::to_string(codes.size()));
    LabeledWinMatrix out{TeamIndex::from_codes(std::move(codes)), WinMatrix(n)};
    for (int i = 0; i < n; ++i) {
        if (!next_line())
            throw data_error("win-matrix file: missing row " + std::to_string(i + 1));
        std::istringstream row(line);
        for (int j = 0; j < n; ++j) {
            std::int64_t x;
            if (!(row >> x) || x < 0)
                throw data_error("win-matrix file: bad entry at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(j + 1));
            out.wins.at(i, j) = x;
        }
    }
    for (int i = 0; i < n; ++i)
        if (out.wins(i, i) != 0)
            throw data_error("win-matrix file: nonzero diagonal at " + out.index.code(i));
    return out;
}

}  // namespace bbt
