#pragma once

#include <cstdint>
#include <vector>

namespace dpgcl {

// Disjoint partition of batch indices 0..B-1 into K = ceil(B/S) groups of at
// most S members. At most one group is short and it is always the last one.
struct GroupAssignment {
  std::vector<std::vector<std::size_t>> groups;
  std::size_t S = 0;
  std::size_t K = 0;
  std::int64_t seed = 0;
  std::int64_t step = 0;
};

// A uniformly random permutation of 0..B-1 chunked into blocks of S. Members
// are listed ascending within a group and full groups are ordered by their
// smallest member, so degenerate settings (S=1, S=B) reduce bit-exactly to
// the per-sample and whole-batch orderings.
GroupAssignment assign_groups(std::size_t B, std::size_t S, std::int64_t seed,
                              std::int64_t step);

// Grouping for the neighboring batch of size B+1 used by the sensitivity
// proofs: indices 0..B-1 keep their groups exactly; index B joins the last
// group when it has room, otherwise it forms a new singleton group.
GroupAssignment couple_neighbor(const GroupAssignment& g, std::size_t B,
                                std::size_t S);

// Partition validity: disjoint cover of 0..B-1, every group <= S, exactly
// ceil(B/S) groups. Used by tests and the sensitivity oracle.
bool is_valid_assignment(const GroupAssignment& g, std::size_t B,
                         std::size_t S);

}  // namespace dpgcl
