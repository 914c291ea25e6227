#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/game_log.hpp"

namespace bbt {

// FNV-1a; used both for stable per-team random stream labels and for
// config hashes in output metadata.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Ordered universe of team codes with a bidirectional code <-> index map.
// The default ordering is lexicographic over the codes seen in a log, so a
// season's index does not depend on game order.
class TeamIndex {
  public:
    TeamIndex() = default;

    static TeamIndex from_codes(std::vector<std::string> codes) {
        TeamIndex idx;
        idx.codes_ = std::move(codes);
        for (std::size_t i = 0; i < idx.codes_.size(); ++i) {
            auto [it, inserted] = idx.pos_.emplace(idx.codes_[i], static_cast<int>(i));
            if (!inserted)
                throw data_error("TeamIndex: duplicate team code '" + idx.codes_[i] + "'");
        }
        return idx;
    }

    static TeamIndex from_games(const std::vector<Game>& games) {
        std::vector<std::string> codes;
        for (const Game& g : games) {
            codes.push_back(g.home);
            codes.push_back(g.away);
        }
        std::sort(codes.begin(), codes.end());
        codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
        return from_codes(std::move(codes));
    }

    int size() const { return static_cast<int>(codes_.size()); }

    bool contains(const std::string& code) const { return pos_.count(code) != 0; }

    int index_of(const std::string& code) const {
        auto it = pos_.find(code);
        if (it == pos_.end())
            throw data_error("unknown team code '" + code + "'");
        return it->second;
    }

    const std::string& code(int i) const { return codes_.at(static_cast<std::size_t>(i)); }

    const std::vector<std::string>& codes() const { return codes_; }

    // Per-team random stream labels, stable under reordering.
    std::vector<std::uint64_t> stream_labels() const {
        std::vector<std::uint64_t> labels;
        labels.reserve(codes_.size());
        for (const auto& c : codes_)
            labels.push_back(fnv1a64(c));
        return labels;
    }

  private:
    std::vector<std::string> codes_;
    std::unordered_map<std::string, int> pos_;
};

}  // namespace bbt
