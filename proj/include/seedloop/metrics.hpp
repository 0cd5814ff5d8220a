#pragma once

#include <cstdint>
#include <string>

#include "seedloop/matrix.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

/// Rows are ground truth, columns predictions; ignored gt pixels are skipped.
struct ConfusionMatrix {
  Dense<std::uint64_t> counts;

  explicit ConfusionMatrix(std::size_t n_classes = 0) : counts(n_classes, n_classes, 0) {}

  std::size_t n_classes() const { return counts.rows(); }
  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

struct Scores {
  double accu;
  double miou;
  double fiou;
};

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, std::size_t n_classes);

Scores scores(const ConfusionMatrix& cm);

/// "accu=0.1234 mIoU=0.1234 fIoU=0.1234"
std::string format_scores(const Scores& s);

}  // namespace seedloop
