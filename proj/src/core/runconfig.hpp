#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/datagen.hpp"
#include "core/kvfile.hpp"
#include "core/nn.hpp"
#include "core/operators.hpp"
#include "core/train_eval.hpp"

namespace sign {

// Parsed and validated flat config. Unknown keys are rejected; operator
// blocks must be 1-based and contiguous. `model.num_classes == 0` means
// "infer from the labels file".
struct RunConfig {
    // paths (empty string = not set)
    std::string edges, features, labels, splits;
    std::string bundle_dir, checkpoint_dir;
    std::string report, predictions, histogram;

    // graph handling
    bool directed = false;
    bool symmetrize = false;
    std::optional<std::uint64_t> num_nodes;

    std::vector<OperatorSpec> operators;
    ModelConfig model;
    TrainConfig training;

    std::uint64_t bench_runs = 10;
    std::uint64_t bins = 50;
    bool nonzero_only = false;

    SbmSpec sbm;

    std::vector<std::size_t> rows; // infer row subset; empty = all rows
    bool has_rows = false;

    static RunConfig parse_text(const std::string& text, const std::string& origin);
    static RunConfig parse_file(const std::string& path);
};

} // namespace sign
