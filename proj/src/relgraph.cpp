#include "seedloop/relgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seedloop/error.hpp"

namespace seedloop {

DistanceMatrix distance_matrix(const FeatureMatrix& f) {
  const std::size_t N = f.n_regions(), D = f.dims();
  DistanceMatrix out(N, N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < D; ++k) {
        const double d = f.values(i, k) - f.values(j, k);
        s += d * d;
      }
      out(i, j) = out(j, i) = std::sqrt(s);
    }
  return out;
}

BinaryMatrix similarity_matrix(const DistanceMatrix& d, int m, Symmetrize sym) {
  require(m >= 1, ErrorCode::InvalidParams, "top-m must be >= 1");
  require(d.rows() == d.cols(), ErrorCode::ShapeMismatch, "distance matrix must be square");
  const std::size_t N = d.rows();
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(m), N);
  BinaryMatrix out(N, N, 0);
  std::vector<std::size_t> order(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::swap(order[0], order[i]);
    auto rest = order.begin() + 1;
    std::sort(rest, order.end(), [&](std::size_t a, std::size_t b) {
      return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
    });
    for (std::size_t k = 0; k < keep; ++k) out(i, order[k]) = 1;
  }
  if (sym != Symmetrize::None) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i + 1; j < N; ++j) {
        const unsigned char v = sym == Symmetrize::Or ? (out(i, j) | out(j, i)) : (out(i, j) & out(j, i));
        out(i, j) = out(j, i) = v;
      }
  }
  return out;
}

BinaryMatrix adjacency_matrix(const SuperpixelMap& spmap) {
  const std::size_t N = spmap.n_regions;
  BinaryMatrix out(N, N, 0);
  for (std::size_t i = 0; i < N; ++i) out(i, i) = 1;
  const int W = spmap.width, H = spmap.height;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const auto r = static_cast<std::size_t>(spmap.at(x, y));
      if (x + 1 < W) {
        const auto s = static_cast<std::size_t>(spmap.at(x + 1, y));
        out(r, s) = out(s, r) = 1;
      }
      if (y + 1 < H) {
        const auto s = static_cast<std::size_t>(spmap.at(x, y + 1));
        out(r, s) = out(s, r) = 1;
      }
    }
  return out;
}

RelationshipMatrix relationship_matrix(BinaryMatrix siml, BinaryMatrix adj) {
  require(siml.rows() == siml.cols() && siml.same_shape(adj), ErrorCode::ShapeMismatch,
          "similarity and adjacency matrices must be square and equally sized");
  BinaryMatrix rel(siml.rows(), siml.cols(), 0);
  for (std::size_t i = 0; i < rel.data().size(); ++i) rel.data()[i] = siml.data()[i] & adj.data()[i];
  return RelationshipMatrix{std::move(siml), std::move(adj), std::move(rel)};
}

RelationshipMatrix build_relationship(const FeatureMatrix& f, const SuperpixelMap& spmap, int m, Symmetrize sym) {
  require(f.n_regions() == static_cast<std::size_t>(spmap.n_regions), ErrorCode::ShapeMismatch,
          "feature rows do not match region count");
  return relationship_matrix(similarity_matrix(distance_matrix(f), m, sym), adjacency_matrix(spmap));
}

Tensor relationship_to_tensor(const RelationshipMatrix& r) {
  const auto N = static_cast<std::uint32_t>(r.size());
  std::vector<std::uint8_t> v;
  v.reserve(3 * r.rel.data().size());
  for (const BinaryMatrix* m : {&r.siml, &r.adj, &r.rel}) v.insert(v.end(), m->data().begin(), m->data().end());
  return Tensor::u8({3, N, N}, std::move(v));
}

RelationshipMatrix relationship_from_tensor(const Tensor& t) {
  require(t.dtype() == DType::U8 && t.dims.size() == 3 && t.dims[0] == 3 && t.dims[1] == t.dims[2],
          ErrorCode::ShapeMismatch, "relationship tensor must be u8 with dims [3,N,N]");
  const std::size_t N = t.dims[1];
  const auto& v = t.values<std::uint8_t>();
  auto slice = [&](std::size_t k) {
    BinaryMatrix m(N, N);
    for (std::size_t i = 0; i < N * N; ++i) {
      require(v[k * N * N + i] <= 1, ErrorCode::InvalidArgument, "relationship tensor is not binary");
      m.data()[i] = v[k * N * N + i];
    }
    return m;
  };
  RelationshipMatrix r = relationship_matrix(slice(0), slice(1));
  require(r.rel == slice(2), ErrorCode::InvalidArgument, "stored rel differs from siml AND adj");
  return r;
}

Symmetrize parse_symmetrize(const std::string& s) {
  if (s == "none") return Symmetrize::None;
  if (s == "or") return Symmetrize::Or;
  if (s == "and") return Symmetrize::And;
  fail(ErrorCode::InvalidParams, "symmetrize must be none, or, and; got " + s);
}

}  // namespace seedloop
