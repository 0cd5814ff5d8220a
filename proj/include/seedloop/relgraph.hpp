#pragma once

#include "seedloop/features.hpp"
#include "seedloop/matrix.hpp"
#include "seedloop/superpixel.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

using DistanceMatrix = Dense<double>;

enum class Symmetrize { None, Or, And };

/// Binary superpixel relationship: rel = siml AND adj, entrywise.
struct RelationshipMatrix {
  BinaryMatrix siml;
  BinaryMatrix adj;
  BinaryMatrix rel;

  std::size_t size() const { return rel.rows(); }
};

DistanceMatrix distance_matrix(const FeatureMatrix& f);

/// Row-wise top-m nearest columns. The diagonal is always selected first; the
/// remaining m-1 slots go to the smallest distances, ties to the smaller column.
BinaryMatrix similarity_matrix(const DistanceMatrix& d, int m = 10, Symmetrize sym = Symmetrize::None);

/// 4-connected region adjacency with unit diagonal.
BinaryMatrix adjacency_matrix(const SuperpixelMap& spmap);

RelationshipMatrix relationship_matrix(BinaryMatrix siml, BinaryMatrix adj);

RelationshipMatrix build_relationship(const FeatureMatrix& f, const SuperpixelMap& spmap, int m = 10,
                                      Symmetrize sym = Symmetrize::None);

/// u8 tensor [3,N,N] stacking siml, adj, rel.
Tensor relationship_to_tensor(const RelationshipMatrix& r);
RelationshipMatrix relationship_from_tensor(const Tensor& t);

Symmetrize parse_symmetrize(const std::string& s);

}  // namespace seedloop
