#include "dpgcl/grouping.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dpgcl/rng.hpp"

namespace dpgcl {

GroupAssignment assign_groups(std::size_t B, std::size_t S, std::int64_t seed,
                              std::int64_t step) {
  if (B < 1) throw std::invalid_argument("batch size must be >= 1");
  if (S < 1) throw std::invalid_argument("group size must be >= 1");

  std::vector<std::size_t> perm(B);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(StreamKind::kGrouping, static_cast<std::uint64_t>(seed),
          static_cast<std::uint64_t>(step));
  for (std::size_t i = B; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(perm[i - 1], perm[j]);
  }

  GroupAssignment g;
  g.S = S;
  g.seed = seed;
  g.step = step;
  g.K = (B + S - 1) / S;
  g.groups.reserve(g.K);
  for (std::size_t start = 0; start < B; start += S) {
    const std::size_t end = std::min(start + S, B);
    std::vector<std::size_t> grp(perm.begin() + start, perm.begin() + end);
    std::sort(grp.begin(), grp.end());
    g.groups.push_back(std::move(grp));
  }
  // Canonical order: full groups ascending by smallest member, the short
  // group (if any) pinned last. Group order carries no meaning beyond "the
  // short group is last", so this only fixes reduction order.
  const bool has_short = g.groups.back().size() < S;
  auto full_end = g.groups.end() - (has_short ? 1 : 0);
  std::sort(g.groups.begin(), full_end,
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return g;
}

GroupAssignment couple_neighbor(const GroupAssignment& g, std::size_t B,
                                std::size_t S) {
  if (!is_valid_assignment(g, B, S)) {
    throw std::invalid_argument("assignment not valid for (B, S)");
  }
  GroupAssignment out = g;
  if (out.groups.back().size() < S) {
    out.groups.back().push_back(B);
  } else {
    out.groups.push_back({B});
    out.K += 1;
  }
  return out;
}

bool is_valid_assignment(const GroupAssignment& g, std::size_t B,
                         std::size_t S) {
  if (g.K != g.groups.size()) return false;
  if (g.K != (B + S - 1) / S) return false;
  std::vector<bool> seen(B, false);
  std::size_t short_groups = 0;
  for (const auto& grp : g.groups) {
    if (grp.empty() || grp.size() > S) return false;
    if (grp.size() < S) ++short_groups;
    for (std::size_t idx : grp) {
      if (idx >= B || seen[idx]) return false;
      seen[idx] = true;
    }
  }
  if (short_groups > 1) return false;
  if (short_groups == 1 && g.groups.back().size() == S) return false;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace dpgcl
