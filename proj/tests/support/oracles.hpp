#pragma once

// Independent reference implementations used to verify the library:
// centrality from Floyd-Warshall distances and explicit path counting,
// eigenvectors from a dense Jacobi eigendecomposition, and the maximum
// independent set by exhaustive subset search. None of these share code
// with the implementations they check.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "natbd/annotations.hpp"
#include "natbd/curate.hpp"
#include "natbd/subset.hpp"

namespace oracle {

using WeightMatrix = std::vector<std::vector<natbd::Count>>;  // 0 = no edge

std::vector<double> degree(const WeightMatrix& w, bool weighted);
std::vector<double> betweenness(const WeightMatrix& w, bool weighted);
std::vector<double> closeness(const WeightMatrix& w, bool weighted);

struct EigenDecomposition {
    std::vector<double> values;                 // descending
    std::vector<std::vector<double>> vectors;   // vectors[k] pairs with values[k], unit norm
};
EigenDecomposition symmetric_eigen(const WeightMatrix& w, bool weighted);

// Cosine between x and its projection onto the eigenspace of the largest
// eigenvalue (eigenvalues within tol of the maximum). Equals the plain
// cosine to the dominant eigenvector when that eigenvalue is simple.
double dominant_cosine(const EigenDecomposition& eig, const std::vector<double>& x, double tol = 1e-9);

// Exhaustive maximum independent set size over all 2^n subsets (n <= 24).
std::size_t max_independent_set_size(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

bool is_independent(const natbd::InducedSubgraph& sub, const std::vector<natbd::ClassId>& classes);
bool is_maximal(const natbd::InducedSubgraph& sub, const std::vector<natbd::ClassId>& classes);

// Per-record unordered pair enumeration into a map, for checking the
// co-occurrence matrix build.
std::map<std::pair<natbd::ClassId, natbd::ClassId>, natbd::Count>
pair_counts(const natbd::AnnotationSet& set);

// Re-scans every manifest image against the raw annotations and returns the
// list of membership-rule violations (empty = clean bill).
std::vector<std::string> audit_manifest(const natbd::AnnotationSet& set,
                                        const natbd::BackdoorManifest& manifest);

}  // namespace oracle
