#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/operators.hpp"

namespace sign {

std::vector<double> triangle_row_std(const Graph& g) {
    require(!g.directed, ErrorCode::InvalidArgument,
            "triangle analysis requires an undirected graph");
    const SparseMatrix t = triangle_operator(g);
    const SparseMatrix& a = g.adjacency;

    std::vector<double> out(g.num_nodes, 0.0);
    std::vector<double> weights;
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        weights.clear();
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
            const std::size_t j = a.col_indices[k];
            if (j == i) continue; // a self-loop is not part of the neighborhood
            weights.push_back(t.get(i, j));
        }
        if (weights.empty()) continue;
        double mean = 0.0;
        for (double w : weights) mean += w;
        mean /= static_cast<double>(weights.size());
        double var = 0.0;
        for (double w : weights) var += (w - mean) * (w - mean);
        var /= static_cast<double>(weights.size());
        out[i] = std::sqrt(var);
    }
    return out;
}

Histogram histogram(const std::vector<double>& values, std::size_t num_bins) {
    require(!values.empty(), ErrorCode::InvalidArgument, "histogram: empty input");
    require(num_bins >= 1, ErrorCode::InvalidArgument, "histogram: num_bins must be >= 1");

    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    Histogram h;
    h.num_samples = values.size();
    if (lo == hi) {
        h.bin_edges = {lo, hi};
        h.normalized_counts = {1.0};
        return h;
    }

    h.bin_edges.resize(num_bins + 1);
    for (std::size_t k = 0; k <= num_bins; ++k)
        h.bin_edges[k] = lo + (hi - lo) * static_cast<double>(k) /
                                  static_cast<double>(num_bins);
    h.bin_edges.front() = lo;
    h.bin_edges.back() = hi;

    std::vector<std::size_t> counts(num_bins, 0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) *
                                            static_cast<double>(num_bins));
        if (idx >= num_bins) idx = num_bins - 1; // right-inclusive last bin
        ++counts[idx];
    }
    h.normalized_counts.resize(num_bins);
    for (std::size_t k = 0; k < num_bins; ++k)
        h.normalized_counts[k] =
            static_cast<double>(counts[k]) / static_cast<double>(values.size());
    return h;
}

} // namespace sign
