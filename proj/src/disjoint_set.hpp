#pragma once

#include <numeric>
#include <vector>

namespace seedloop::detail {

// Union-find with union by rank and path halving; tracks component sizes.
class DisjointSet {
 public:
  explicit DisjointSet(int n) : parent_(n), rank_(n, 0), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns the new root. Both arguments must be roots.
  int join(int a, int b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    --components_;
    return a;
  }

  int size(int root) const { return size_[root]; }
  int components() const { return components_; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  std::vector<int> size_;
  int components_;
};

}  // namespace seedloop::detail
