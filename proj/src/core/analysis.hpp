#pragma once

#include <vector>

#include "core/graph.hpp"

namespace sign {

struct Histogram {
    std::vector<double> bin_edges;         // num_bins + 1, sorted
    std::vector<double> normalized_counts; // num_bins, sums to 1 (nonempty input)
    std::size_t num_samples = 0;
};

// For each node: the triangle-operator weights across its *original*
// neighborhood (0 for neighbors supporting no triangle, self-loops ignored),
// reduced to a population standard deviation. Degree-0 nodes yield 0.
std::vector<double> triangle_row_std(const Graph& g);

// Uniform bins over [min, max]; right-inclusive last bin; one degenerate bin
// when min == max. Errors on empty input.
Histogram histogram(const std::vector<double>& values, std::size_t num_bins);

} // namespace sign
