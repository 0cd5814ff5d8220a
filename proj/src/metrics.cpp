#include "seedloop/metrics.hpp"

#include <cstdio>
#include <string>

#include "seedloop/error.hpp"

namespace seedloop {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto v : counts.data()) t += v;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  require(o.n_classes() == n_classes(), ErrorCode::ShapeMismatch, "confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts.data().size(); ++i) counts.data()[i] += o.counts.data()[i];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, std::size_t n_classes) {
  require(n_classes >= 1 && n_classes < kIgnoreLabel, ErrorCode::InvalidArgument, "class count must be 1..254");
  pred.validate();
  gt.validate();
  require(pred.width == gt.width && pred.height == gt.height, ErrorCode::DimensionMismatch,
          "prediction and ground truth differ in size");
  ConfusionMatrix cm(n_classes);
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const auto g = gt.labels[p];
    if (g == kIgnoreLabel) continue;
    const auto q = pred.labels[p];
    require(q != kIgnoreLabel, ErrorCode::UnlabeledPrediction, "prediction leaves a labelled pixel unlabelled");
    require(g < n_classes && q < n_classes, ErrorCode::LabelOutOfRange, "label exceeds class count");
    ++cm.counts(g, q);
  }
  return cm;
}

Scores scores(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  require(total > 0, ErrorCode::EmptyConfusion, "confusion matrix is empty");
  const std::size_t C = cm.n_classes();
  std::uint64_t trace = 0;
  double iou_sum = 0.0, fiou = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < C; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < C; ++k) {
      row += cm.counts(c, k);
      col += cm.counts(k, c);
    }
    const std::uint64_t tp = cm.counts(c, c);
    trace += tp;
    if (row + col == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(row + col - tp);
    iou_sum += iou;
    ++present;
    fiou += static_cast<double>(row) / static_cast<double>(total) * iou;
  }
  return {static_cast<double>(trace) / static_cast<double>(total), iou_sum / static_cast<double>(present), fiou};
}

std::string format_scores(const Scores& s) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "accu=%.4f mIoU=%.4f fIoU=%.4f", s.accu, s.miou, s.fiou);
  return buf;
}

}  // namespace seedloop
