#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "../support.hpp"

using namespace seedloop;

namespace {

SeedState state(std::size_t C, std::size_t N, std::initializer_list<double> row_major) {
  SeedState s(C, N);
  std::copy(row_major.begin(), row_major.end(), s.probs.data().begin());
  return s;
}

RelationshipMatrix from_rel(const BinaryMatrix& rel) { return relationship_matrix(rel, BinaryMatrix(rel.rows(), rel.cols(), 1)); }

RelationshipMatrix chain(std::size_t n) {
  BinaryMatrix m(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = 1;
  }
  return from_rel(m);
}

SeedState random_state(std::mt19937_64& rng, std::size_t C, std::size_t N, double p_zero) {
  std::bernoulli_distribution zero(p_zero);
  std::uniform_real_distribution<double> peak(0.3, 1.0);
  SeedState s(C, N);
  for (std::size_t j = 0; j < N; ++j) {
    if (zero(rng)) continue;
    const auto col = oracle::random_column(rng, C, peak(rng));
    for (std::size_t c = 0; c < C; ++c) s(c, j) = col[c];
  }
  return s;
}

RelationshipMatrix random_rel(std::mt19937_64& rng, std::size_t N, double density) {
  std::bernoulli_distribution edge(density);
  BinaryMatrix m(N, N, 0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) m(i, j) = (i == j || edge(rng)) ? 1 : 0;
  return from_rel(m);
}

std::set<std::size_t> support(const SeedState& s, std::size_t c) {
  std::set<std::size_t> out;
  for (std::size_t j = 0; j < s.n_regions(); ++j)
    if (s(c, j) > 0.0) out.insert(j);
  return out;
}

bool subset(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_SUITE("seeds") {
  TEST_CASE("gate examples") {
    const SeedState keep = state(2, 1, {0.95, 0.05});
    CHECK(gate(keep, 0.9, 0.9) == keep);
    const SeedState drop = state(2, 1, {0.10, 0.80});
    CHECK(gate(drop, 0.9, 0.9) == SeedState(2, 1));
    // Background and foreground thresholds are applied by dominant category.
    const SeedState mix = state(2, 2, {0.85, 0.2, 0.15, 0.8});
    const SeedState g = gate(mix, 0.75, 0.9);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(1, 1) == 0.8);
    // Argmax tie goes to background, so the background threshold applies.
    const SeedState tie = state(2, 1, {0.5, 0.5});
    CHECK(gate(tie, 0.4, 0.6) == SeedState(2, 1));
    CHECK(gate(tie, 0.6, 0.4) == tie);
  }

  TEST_CASE("gate with zero thresholds is the identity and gating is idempotent") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
      const SeedState s = random_state(rng, 4, 15, 0.2);
      CHECK(gate(s, 0.0, 0.0) == s);
      const SeedState g = gate(s, 0.7, 0.8);
      CHECK(gate(g, 0.7, 0.8) == g);
    }
    CHECK_THROWS_AS(gate(SeedState(2, 2), 1.5, 0.5), Error);
  }

  TEST_CASE("walk step on a four-region chain") {
    SeedState s(1, 4);
    s(0, 0) = 1.0;
    SeedState nout(1, 4);
    for (int j = 0; j < 4; ++j) nout(0, j) = 0.8;
    const SeedState out = walk_step(s, chain(4), nout);
    CHECK(out(0, 0) == doctest::Approx(0.8));
    CHECK(out(0, 1) == doctest::Approx(0.8));
    CHECK(out(0, 2) == 0.0);
    CHECK(out(0, 3) == 0.0);
  }

  TEST_CASE("walk step with identity relation and zero seeds") {
    std::mt19937_64 rng(2);
    BinaryMatrix eye(6, 6, 0);
    for (int i = 0; i < 6; ++i) eye(i, i) = 1;
    const SeedState s = random_state(rng, 3, 6, 0.3), n = random_state(rng, 3, 6, 0.3);
    const SeedState out = walk_step(s, from_rel(eye), n);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t j = 0; j < 6; ++j) CHECK(out(c, j) == s(c, j) * n(c, j));
    CHECK(walk_step(SeedState(3, 6), random_rel(rng, 6, 0.5), n) == SeedState(3, 6));
  }

  TEST_CASE("walk step clamps fan-in before the product") {
    SeedState s(1, 3);
    s(0, 0) = 0.9;
    s(0, 1) = 0.9;
    SeedState nout(1, 3);
    nout(0, 2) = 0.5;
    BinaryMatrix m(3, 3, 0);
    for (int i = 0; i < 3; ++i) m(i, i) = 1;
    m(0, 2) = m(1, 2) = 1;
    CHECK(walk_step(s, from_rel(m), nout)(0, 2) == doctest::Approx(0.5));
  }

  TEST_CASE("walk step shape checks") {
    CHECK_THROWS_AS(walk_step(SeedState(2, 3), chain(3), SeedState(2, 4)), Error);
    CHECK_THROWS_AS(walk_step(SeedState(2, 3), chain(4), SeedState(2, 3)), Error);
  }

  TEST_CASE("custom walk on a six-region toy equals straight-line arithmetic") {
    // Two categories over six regions; rel is a ring with one chord.
    BinaryMatrix m(6, 6, 0);
    for (int i = 0; i < 6; ++i) {
      m(i, i) = 1;
      m(i, (i + 1) % 6) = 1;
    }
    m(0, 3) = 1;
    const RelationshipMatrix rel = from_rel(m);
    const SeedState s = state(2, 6, {0.95, 0.0, 0.0, 0.2, 0.0, 0.0,  //
                                     0.05, 0.0, 0.0, 0.8, 0.0, 0.0});
    const SeedState n = state(2, 6, {0.92, 0.95, 0.3, 0.1, 0.91, 0.5,  //
                                     0.08, 0.05, 0.7, 0.9, 0.09, 0.5});
    const GateParams g;  // 0.90/0.90/0.75/0.90

    // start = gate(s): column 3 has fg 0.8 < 0.9 and is dropped.
    double start[2][6] = {{0.95, 0, 0, 0, 0, 0}, {0.05, 0, 0, 0, 0, 0}};
    // guide = gate(n): columns 0,1,4 pass as bg; 2 fails (0.7 < 0.75); 3 passes as fg; 5 ties to bg 0.5 < 0.9.
    double guide[2][6] = {{0.92, 0.95, 0, 0.1, 0.91, 0}, {0.08, 0.05, 0, 0.9, 0.09, 0}};
    double cur[2][6];
    std::copy(&start[0][0], &start[0][0] + 12, &cur[0][0]);
    for (int step = 0; step < 2; ++step) {
      double next[2][6] = {};
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 6; ++j) {
          double acc = 0.0;
          for (int i = 0; i < 6; ++i) acc += cur[c][i] * m(i, j);
          next[c][j] = std::min(acc, 1.0) * guide[c][j];
        }
      std::copy(&next[0][0], &next[0][0] + 12, &cur[0][0]);
    }
    const SeedState strict = custom_walk(s, rel, n, g, 2, true);
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < 6; ++j) CHECK(strict(c, j) == doctest::Approx(cur[c][j]).epsilon(1e-15));

    const SeedState mixed = custom_walk(s, rel, n, g, 2);
    for (int j = 0; j < 6; ++j) {
      double col[2], sum = 0;
      for (int c = 0; c < 2; ++c) sum += (col[c] = std::max(start[c][j], cur[c][j]));
      for (int c = 0; c < 2; ++c) CHECK(mixed(c, j) == doctest::Approx(sum > 1 ? col[c] / sum : col[c]));
    }
    // Hand values: region 3 is fed by the chord and by itself.
    CHECK(cur[0][3] == doctest::Approx((0.95 * 0.92 + 0.95 * 0.1) * 0.1));
    CHECK(cur[1][1] == doctest::Approx(0.05 * 0.05 * 0.05 + 0.05 * 0.08 * 0.05));
  }

  TEST_CASE("custom walk with a fully gated-out network output returns the gated seeds") {
    std::mt19937_64 rng(3);
    const SeedState s = random_state(rng, 3, 10, 0.2);
    SeedState weak(3, 10);
    for (auto& v : weak.probs.data()) v = 0.2;
    const GateParams g;
    const RelationshipMatrix rel = random_rel(rng, 10, 0.4);
    CHECK(custom_walk(s, rel, weak, g, 2) == gate(s, g.alpha_fg, g.alpha_bg));
    CHECK(custom_walk(s, rel, SeedState(3, 10), g, 3) == gate(s, g.alpha_fg, g.alpha_bg));
  }

  TEST_CASE("custom walk output is a valid seed state") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
      const std::size_t N = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
      const SeedState s = random_state(rng, 3, N, 0.4), n = random_state(rng, 3, N, 0.1);
      const SeedState mixed = custom_walk(s, random_rel(rng, N, 0.3), n, GateParams{}, 2);
      CHECK_NOTHROW(mixed.validate());
    }
    CHECK_THROWS_AS(custom_walk(SeedState(2, 2), chain(2), SeedState(2, 2), GateParams{}, 0), Error);
  }

  TEST_CASE("walk support equals the gated reachability oracle and grows with steps") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> thr(0.3, 0.95);
    for (int t = 0; t < 100; ++t) {
      const std::size_t N = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
      const std::size_t C = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
      const SeedState s = random_state(rng, C, N, 0.5), n = random_state(rng, C, N, 0.1);
      const RelationshipMatrix rel = random_rel(rng, N, 0.25);
      const GateParams g{thr(rng), thr(rng), thr(rng), thr(rng)};
      std::vector<std::set<std::size_t>> prev;
      for (int steps = 1; steps <= 4; ++steps) {
        const SeedState strict = custom_walk(s, rel, n, g, steps, true);
        const SeedState mixed = custom_walk(s, rel, n, g, steps);
        const auto want_strict = oracle::walk_support(s, rel.rel, n, g, steps, false);
        const auto want_mixed = oracle::walk_support(s, rel.rel, n, g, steps, true);
        std::vector<std::set<std::size_t>> cur(C);
        for (std::size_t c = 0; c < C; ++c) {
          CHECK(support(strict, c) == want_strict[c]);
          cur[c] = support(mixed, c);
          CHECK(cur[c] == want_mixed[c]);
          if (!prev.empty()) CHECK(subset(prev[c], cur[c]));
        }
        prev = std::move(cur);
      }
    }
  }

  TEST_CASE("seed update examples") {
    const SeedState a = state(1, 1, {0.5}), b = state(1, 1, {0.9});
    CHECK(seed_update(a, b, 0.2)(0, 0) == doctest::Approx(0.58));
    std::mt19937_64 rng(6);
    const SeedState s = random_state(rng, 3, 8, 0.2), n = random_state(rng, 3, 8, 0.0);
    CHECK(seed_update(s, n, 0.0) == s);
    CHECK(seed_update(s, n, 1.0) == n);
    try {
      seed_update(s, n, 1.2);
      FAIL("expected WOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::WOutOfRange);
    }
    CHECK_THROWS_AS(seed_update(s, SeedState(3, 7), 0.5), Error);
  }

  TEST_CASE("seed update stays between its inputs and converges geometrically") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uw(0.05, 0.95);
    for (int t = 0; t < 30; ++t) {
      const SeedState s0 = random_state(rng, 3, 12, 0.3), n = random_state(rng, 3, 12, 0.0);
      const double w = uw(rng);
      const SeedState s1 = seed_update(s0, n, w);
      for (std::size_t i = 0; i < s0.probs.data().size(); ++i) {
        const double lo = std::min(s0.probs.data()[i], n.probs.data()[i]);
        const double hi = std::max(s0.probs.data()[i], n.probs.data()[i]);
        CHECK(s1.probs.data()[i] >= lo - 1e-15);
        CHECK(s1.probs.data()[i] <= hi + 1e-15);
      }
      CHECK_NOTHROW(s1.validate());
      CHECK(seed_update(n, n, w) == n);

      auto linf = [&](const SeedState& a) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.probs.data().size(); ++i)
          m = std::max(m, std::abs(a.probs.data()[i] - n.probs.data()[i]));
        return m;
      };
      const double d0 = linf(s0);
      SeedState cur = s0;
      int stop_at = -1;
      for (int k = 1; k <= 200 && stop_at < 0; ++k) {
        const SeedState next = seed_update(cur, n, w);
        CHECK(linf(next) == doctest::Approx(std::pow(1.0 - w, k) * d0).epsilon(1e-9));
        if (convergence_check(cur, next, ConvergenceParams{}).stopped) stop_at = k;
        cur = next;
      }
      CHECK(stop_at > 0);
    }
  }

  TEST_CASE("convergence check examples") {
    std::mt19937_64 rng(8);
    const SeedState s = random_state(rng, 2, 20, 0.0);
    const auto same = convergence_check(s, s, ConvergenceParams{});
    CHECK(same.stopped);
    CHECK(same.unchanged_fraction == 1.0);

    SeedState base(2, 20);
    for (std::size_t j = 0; j < 20; ++j) base(0, j) = 0.5;
    SeedState one = base;
    one(0, 7) += 0.2;
    const auto r1 = convergence_check(base, one, ConvergenceParams{0.1, 0.95});
    CHECK(r1.stopped);
    CHECK(r1.unchanged_fraction == doctest::Approx(0.95));

    SeedState all = base;
    for (std::size_t j = 0; j < 20; ++j) all(0, j) += 0.2;
    const auto r2 = convergence_check(base, all, ConvergenceParams{0.1, 0.95});
    CHECK_FALSE(r2.stopped);
    CHECK(r2.unchanged_fraction == 0.0);

    CHECK_THROWS_AS(convergence_check(base, SeedState(2, 19), ConvergenceParams{}), Error);
    CHECK_THROWS_AS(convergence_check(base, base, ConvergenceParams{0.0, 0.5}), Error);
    CHECK_THROWS_AS(convergence_check(base, base, ConvergenceParams{0.1, 1.5}), Error);
  }

  TEST_CASE("labels from state") {
    const SuperpixelMap sp = relabel_contiguous(3, 2, {0, 0, 1, 2, 2, 1});
    const LabelMap empty = labels_from_state(SeedState(2, 3), sp);
    for (auto l : empty.labels) CHECK(l == kIgnoreLabel);

    const SeedState s = state(2, 3, {0.1, 0.5, 0.0,  //
                                     0.7, 0.5, 0.0});
    const LabelMap m = labels_from_state(s, sp);
    CHECK(m.labels == std::vector<std::uint8_t>{1, 1, 0, kIgnoreLabel, kIgnoreLabel, 0});
    CHECK_THROWS_AS(labels_from_state(SeedState(2, 4), sp), Error);
  }

  TEST_CASE("seed state validation and tensor round trip") {
    CHECK_THROWS_AS(state(2, 1, {0.7, 0.7}).validate(), Error);
    CHECK_THROWS_AS(state(2, 1, {-0.1, 0.5}).validate(), Error);
    std::mt19937_64 rng(9);
    const SeedState s = random_state(rng, 4, 9, 0.3);
    const Tensor t = seeds_to_tensor(s);
    CHECK(t.dims == std::vector<std::uint32_t>{4, 9});
    const SeedState back = seeds_from_tensor(t);
    for (std::size_t i = 0; i < s.probs.data().size(); ++i)
      CHECK(back.probs.data()[i] == doctest::Approx(s.probs.data()[i]).epsilon(1e-7));
  }
}
