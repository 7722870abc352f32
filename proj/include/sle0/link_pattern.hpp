#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sle0/errors.hpp"

namespace sle0 {

/// Non-crossing perfect matching of {1,...,2n}, stored as (a,b) pairs with
/// a < b, sorted by a.
struct LinkPattern {
  std::vector<std::pair<int, int>> pairs;

  LinkPattern() = default;
  explicit LinkPattern(std::vector<std::pair<int, int>> p) : pairs(std::move(p)) {
    for (auto& pr : pairs)
      if (pr.first > pr.second) std::swap(pr.first, pr.second);
    std::sort(pairs.begin(), pairs.end());
  }

  int n() const { return static_cast<int>(pairs.size()); }

  bool operator==(const LinkPattern& o) const { return pairs == o.pairs; }
  bool operator<(const LinkPattern& o) const { return pairs < o.pairs; }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(pairs[i].first) + "-" + std::to_string(pairs[i].second);
    }
    return s;
  }
};

inline bool is_perfect_matching(const LinkPattern& a) {
  const int n = a.n();
  std::vector<bool> seen(2 * n + 1, false);
  for (auto [p, q] : a.pairs) {
    if (p < 1 || q < 1 || p > 2 * n || q > 2 * n || p == q) return false;
    if (seen[p] || seen[q]) return false;
    seen[p] = seen[q] = true;
  }
  return true;
}

inline bool is_noncrossing(const LinkPattern& a) {
  if (!is_perfect_matching(a)) return false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < a.pairs.size(); ++j) {
      auto [p, q] = a.pairs[i];
      auto [r, s] = a.pairs[j];
      // crossing iff the pairs interleave
      const bool r_in = p < r && r < q;
      const bool s_in = p < s && s < q;
      if (r_in != s_in) return false;
    }
  }
  return true;
}

inline std::uint64_t catalan(int n) {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

/// All C_n non-crossing pairings of {1,...,2n}, in a fixed lexicographic
/// order (point 1 pairs to increasing partners, recursing inside/outside).
inline std::vector<LinkPattern> enumerate_noncrossing(int n) {
  std::vector<LinkPattern> out;
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, const std::vector<int>& pts) -> std::vector<std::vector<std::pair<int, int>>> {
    std::vector<std::vector<std::pair<int, int>>> res;
    if (pts.empty()) {
      res.push_back({});
      return res;
    }
    const int a = pts[0];
    for (std::size_t i = 1; i < pts.size(); i += 2) {
      const int b = pts[i];
      std::vector<int> inside(pts.begin() + 1, pts.begin() + i);
      std::vector<int> outside(pts.begin() + i + 1, pts.end());
      for (const auto& pin : self(self, inside))
        for (const auto& pout : self(self, outside)) {
          std::vector<std::pair<int, int>> m{{a, b}};
          m.insert(m.end(), pin.begin(), pin.end());
          m.insert(m.end(), pout.begin(), pout.end());
          res.push_back(std::move(m));
        }
    }
    return res;
  };
  std::vector<int> pts(2 * n);
  for (int i = 0; i < 2 * n; ++i) pts[i] = i + 1;
  for (auto& m : rec(rec, pts)) out.emplace_back(std::move(m));
  std::sort(out.begin(), out.end());
  return out;
}

inline LinkPattern parse_pattern(const std::string& s) {
  // "1-2,3-4"
  std::vector<std::pair<int, int>> pairs;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t dash = s.find('-', pos);
    if (dash == std::string::npos) throw InvalidInput("pattern: expected 'a-b' pairs");
    std::size_t comma = s.find(',', dash);
    if (comma == std::string::npos) comma = s.size();
    pairs.emplace_back(std::stoi(s.substr(pos, dash - pos)),
                       std::stoi(s.substr(dash + 1, comma - dash - 1)));
    pos = comma + (comma < s.size() ? 1 : 0);
  }
  LinkPattern a(std::move(pairs));
  if (!is_noncrossing(a)) throw InvalidInput("pattern: not a non-crossing pairing");
  return a;
}

}  // namespace sle0
