#pragma once

// Game-log ingestion. The accepted format is newline-delimited UTF-8 with
// comma-separated fields
//
//     date,home,away,home_score,away_score
//
// where date is 8-digit YYYYMMDD. A header line is permitted and detected,
// lines starting with '#' are ignored, and malformed records are collected
// into a report instead of aborting the parse.

#include <charconv>
#include <chrono>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bbt {

using Date = std::chrono::year_month_day;

inline std::optional<Date> date_from_int(int yyyymmdd) {
    const int y = yyyymmdd / 10000;
    const int m = (yyyymmdd / 100) % 100;
    const int d = yyyymmdd % 100;
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok())
        return std::nullopt;
    return date;
}

inline std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 8)
        return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return date_from_int(value);
}

inline int date_to_int(Date d) {
    return static_cast<int>(d.year()) * 10000 + static_cast<int>(unsigned(d.month())) * 100 +
           static_cast<int>(unsigned(d.day()));
}

inline Date add_days(Date d, int days) {
    return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

struct Game {
    Date date;
    std::string home;
    std::string away;
    int home_score = 0;
    int away_score = 0;

    bool tied() const { return home_score == away_score; }
    const std::string& winner() const { return home_score > away_score ? home : away; }
    const std::string& loser() const { return home_score > away_score ? away : home; }
};

struct ParseIssue {
    std::size_t line;  // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<Game> games;
    std::vector<ParseIssue> issues;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

inline std::optional<int> parse_score(std::string_view s) {
    if (s.empty())
        return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value < 0)
        return std::nullopt;
    return value;
}

}  // namespace detail

inline ParseResult parse_game_log(std::istream& in) {
    ParseResult out;
    std::string line;
    std::size_t lineno = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#')
            continue;
        auto fields = detail::split_csv(sv);
        if (fields.size() != 5) {
            out.issues.push_back({lineno, "expected 5 comma-separated fields, got " +
                                              std::to_string(fields.size())});
            continue;
        }
        auto date = parse_date(fields[0]);
        if (!date) {
            if (!seen_data) {
                seen_data = true;  // header line
                continue;
            }
            out.issues.push_back({lineno, "unparseable date '" + std::string(fields[0]) + "'"});
            continue;
        }
        seen_data = true;
        auto hs = detail::parse_score(fields[3]);
        auto as = detail::parse_score(fields[4]);
        if (!hs || !as) {
            out.issues.push_back({lineno, "unparseable score"});
            continue;
        }
        if (fields[1].empty() || fields[2].empty()) {
            out.issues.push_back({lineno, "empty team code"});
            continue;
        }
        if (fields[1] == fields[2]) {
            out.issues.push_back({lineno, "home equals away ('" + std::string(fields[1]) + "')"});
            continue;
        }
        out.games.push_back(
            Game{*date, std::string(fields[1]), std::string(fields[2]), *hs, *as});
    }
    return out;
}

// Train = games strictly before the cutoff; the cutoff day itself belongs
// to the test set.
inline std::pair<std::vector<Game>, std::vector<Game>> split_by_date(
    const std::vector<Game>& games, Date cutoff) {
    std::pair<std::vector<Game>, std::vector<Game>> out;
    for (const Game& g : games) {
        if (g.date < cutoff)
            out.first.push_back(g);
        else
            out.second.push_back(g);
    }
    return out;
}

// Year of the earliest game; used to resolve month-day partition labels.
inline std::optional<int> season_year(const std::vector<Game>& games) {
    std::optional<Date> lo;
    for (const Game& g : games)
        if (!lo || g.date < *lo)
            lo = g.date;
    if (!lo)
        return std::nullopt;
    return static_cast<int>(lo->year());
}

}  // namespace bbt
