#include <doctest.h>

#include <numeric>
#include <random>

#include "../oracles.hpp"

using namespace seedloop;

namespace {

LabelMap random_labels(std::mt19937_64& rng, int w, int h, int C, double p_ignore) {
  std::uniform_int_distribution<int> cat(0, C - 1);
  std::bernoulli_distribution ignore(p_ignore);
  LabelMap m(w, h, 0);
  for (auto& l : m.labels) l = ignore(rng) ? kIgnoreLabel : static_cast<std::uint8_t>(cat(rng));
  return m;
}

ConfusionMatrix from_counts(std::initializer_list<std::uint64_t> v, std::size_t C) {
  ConfusionMatrix cm(C);
  std::copy(v.begin(), v.end(), cm.counts.data().begin());
  return cm;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("identical maps fill the diagonal") {
    std::mt19937_64 rng(1);
    const LabelMap gt = random_labels(rng, 4, 4, 2, 0.0);
    const ConfusionMatrix cm = confusion(gt, gt, 2);
    CHECK(cm.counts(0, 0) + cm.counts(1, 1) == 16);
    CHECK(cm.total() == 16);
    const Scores s = scores(cm);
    CHECK(s.accu == 1.0);
    CHECK(s.miou == 1.0);
    CHECK(s.fiou == 1.0);
  }

  TEST_CASE("ignored ground truth contributes nothing") {
    const LabelMap gt(4, 4, kIgnoreLabel);
    const LabelMap pred(4, 4, kIgnoreLabel);
    const ConfusionMatrix cm = confusion(pred, gt, 3);
    CHECK(cm.total() == 0);
    try {
      scores(cm);
      FAIL("expected EmptyConfusion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyConfusion);
    }
  }

  TEST_CASE("two-class hand example") {
    const Scores s = scores(from_counts({3, 1, 1, 3}, 2));
    CHECK(s.accu == doctest::Approx(0.75));
    CHECK(s.miou == doctest::Approx(0.6));
    CHECK(s.fiou == doctest::Approx(0.6));
  }

  TEST_CASE("absent classes are left out of the mean") {
    // Class 2 never occurs in either map.
    const Scores s = scores(from_counts({3, 1, 0, 1, 3, 0, 0, 0, 0}, 3));
    CHECK(s.miou == doctest::Approx(0.6));
  }

  TEST_CASE("confusion and scores agree with pixel-by-pixel counting") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
      const LabelMap gt = random_labels(rng, 16, 16, 4, 0.1);
      LabelMap pred = random_labels(rng, 16, 16, 4, 0.0);
      // Bias predictions toward the truth so IoUs spread out.
      for (std::size_t p = 0; p < pred.labels.size(); ++p)
        if (gt.labels[p] != kIgnoreLabel && p % 3) pred.labels[p] = gt.labels[p];
      const ConfusionMatrix cm = confusion(pred, gt, 4);
      const oracle::Counts c = oracle::count_pixels(pred, gt);
      CHECK(cm.total() == c.total);
      for (int g = 0; g < 4; ++g)
        for (int q = 0; q < 4; ++q) {
          auto it = c.cell.find({g, q});
          CHECK(cm.counts(g, q) == (it == c.cell.end() ? 0 : it->second));
        }
      const Scores s = scores(cm);
      const oracle::ScoreTriple o = oracle::score_counts(c, 4);
      CHECK(s.accu == doctest::Approx(o.accu).epsilon(1e-12));
      CHECK(s.miou == doctest::Approx(o.miou).epsilon(1e-12));
      CHECK(s.fiou == doctest::Approx(o.fiou).epsilon(1e-12));
      for (double v : {s.accu, s.miou, s.fiou}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }

  TEST_CASE("renaming classes leaves scores unchanged") {
    std::mt19937_64 rng(3);
    const LabelMap gt = random_labels(rng, 12, 12, 4, 0.05);
    const LabelMap pred = random_labels(rng, 12, 12, 4, 0.0);
    const std::uint8_t perm[4] = {2, 0, 3, 1};
    LabelMap gp = gt, pp = pred;
    for (auto& l : gp.labels)
      if (l != kIgnoreLabel) l = perm[l];
    for (auto& l : pp.labels) l = perm[l];
    const Scores a = scores(confusion(pred, gt, 4)), b = scores(confusion(pp, gp, 4));
    CHECK(a.accu == doctest::Approx(b.accu));
    CHECK(a.miou == doctest::Approx(b.miou));
    CHECK(a.fiou == doctest::Approx(b.fiou));
  }

  TEST_CASE("error cases") {
    LabelMap gt(3, 3, 0), pred(3, 3, 0);
    pred.labels[4] = kIgnoreLabel;
    try {
      confusion(pred, gt, 2);
      FAIL("expected UnlabeledPrediction");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnlabeledPrediction);
    }
    try {
      confusion(LabelMap(3, 2, 0), gt, 2);
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    pred.labels[4] = 5;
    try {
      confusion(pred, gt, 2);
      FAIL("expected LabelOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::LabelOutOfRange);
    }
    // An unlabelled prediction over an ignored pixel is fine.
    gt.labels[4] = kIgnoreLabel;
    pred.labels[4] = kIgnoreLabel;
    CHECK(confusion(pred, gt, 2).total() == 8);
  }

  TEST_CASE("confusion accumulation and formatting") {
    ConfusionMatrix a = from_counts({1, 2, 3, 4}, 2);
    a += from_counts({4, 3, 2, 1}, 2);
    CHECK(a.counts.data() == std::vector<std::uint64_t>{5, 5, 5, 5});
    ConfusionMatrix three(3);
    CHECK_THROWS_AS(a += three, Error);
    CHECK(format_scores({0.75, 0.6, 0.123456}) == "accu=0.7500 mIoU=0.6000 fIoU=0.1235");
  }
}
