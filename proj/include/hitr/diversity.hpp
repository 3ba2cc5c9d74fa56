#pragma once

#include <vector>

#include "hitr/sparse_distribution.hpp"

namespace hitr {

// Angular distance between two distributions treated as vectors:
//   (2/pi) * arccos(cos_similarity)
// with the cosine clamped into [0, 1] before arccos. Ranges over [0, 1];
// 0 for parallel vectors, 1 for orthogonal ones. Throws DataError if either
// argument has zero norm (empty support).
double angular_distance(const SparseDistribution& a,
                        const SparseDistribution& b);

// Pairwise angular distances between topic word distributions. Symmetric
// with a zero diagonal. Row-parallel.
std::vector<std::vector<double>> topic_distance_matrix(
    const std::vector<SparseDistribution>& phi);

// Rao's coefficient for one document: sum over ordered topic pairs of
// p_i * p_j * distance(i, j). The matrix must cover every topic in the
// support. Bounded by max pairwise distance; 0 when the document sits on a
// single topic.
double rao_diversity(const SparseDistribution& topic_mixture,
                     const std::vector<std::vector<double>>& distances);

// Rao's coefficient for every row of a document-topic matrix.
// Document-parallel.
std::vector<double> rao_diversity_all(
    const std::vector<SparseDistribution>& rows,
    const std::vector<std::vector<double>>& distances);

}  // namespace hitr
