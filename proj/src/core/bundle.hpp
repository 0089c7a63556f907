#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dense.hpp"
#include "core/graph.hpp"
#include "core/kvfile.hpp"
#include "core/operators.hpp"

namespace sign {

// Precomputed diffusion cache: the raw features X plus one diffused matrix
// per operator spec. Everything downstream (training, inference) works off
// this object alone and never touches the graph again.
struct FeatureBundle {
    DenseMatrix base;                  // X, n x d
    std::vector<DenseMatrix> diffused; // A_1 X ... A_r X, each n x d
    std::vector<OperatorSpec> specs;   // length r, request order
    std::uint64_t graph_fingerprint = 0;

    std::size_t num_nodes() const { return base.n_rows; }
    std::size_t feature_dim() const { return base.n_cols; }
    std::size_t num_operators() const { return specs.size(); }
};

// Applies each operator to X. Powers 1..p of one operator family are computed
// in a single incremental sweep (Y_j = B * Y_{j-1}); distinct families never
// share work. Output order matches `specs` order.
FeatureBundle precompute_features(const Graph& g, const DenseMatrix& x,
                                  const std::vector<OperatorSpec>& specs);

// Writes block_0.sgnm .. block_r.sgnm plus manifest.txt into `dir` (created
// if missing). All writes are atomic (.tmp + rename). Returns manifest path.
std::string save_bundle(const FeatureBundle& b, const std::string& dir);

// Loads and checksum-verifies a bundle. If `expected_fingerprint` is nonzero
// and differs from the manifest's, a human-readable note is appended to
// `*warning` (when non-null) instead of failing.
FeatureBundle load_bundle(const std::string& dir,
                          std::uint64_t expected_fingerprint = 0,
                          std::string* warning = nullptr);

// Row-gathered copy of base and every diffused matrix (minibatch assembly).
FeatureBundle slice_rows(const FeatureBundle& b, const std::vector<std::size_t>& rows);

// Shared spec <-> key=value mapping used by both bundle manifests and run
// configs: operator.N.kind / .power / .alpha / .iterations (PPR only). Only
// `kind` is mandatory when reading; absent fields keep the spec defaults.
void append_operator_spec(KvFile& kv, std::size_t index, const OperatorSpec& spec);
OperatorSpec read_operator_spec(const KvFile& kv, std::size_t index);

} // namespace sign
