#pragma once

#include <cstdint>

#include "core/dataio.hpp"
#include "core/dense.hpp"
#include "core/graph.hpp"
#include "core/nn.hpp"

namespace sign {

// Stochastic block model with class-separated Gaussian features: a synthetic
// node-classification task where graph structure carries most of the signal.
struct SbmSpec {
    std::size_t num_nodes = 0;
    std::size_t num_blocks = 2;
    double p_in = 0.1;
    double p_out = 0.01;
    std::size_t feature_dim = 8;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;
    double train_frac = 0.6;
    double val_frac = 0.2;
    double test_frac = 0.2;

    void validate() const;
};

struct SbmData {
    Graph graph;         // undirected
    DenseMatrix features; // n x feature_dim
    Labels labels;        // multiclass, block id
    Splits splits;
};

// Deterministic in `spec.seed`: blocks are contiguous index ranges (remainder
// spread over the earlier blocks); each i<j pair draws one Bernoulli edge;
// features are one-hot-at-(block mod d) means plus Gaussian noise; splits are
// a seeded shuffle cut at the requested fractions.
SbmData sbm_generate(const SbmSpec& spec);

} // namespace sign
