#pragma once

#include <string>
#include <vector>

#include "core/dense.hpp"
#include "core/nn.hpp"

namespace sign {

struct Splits {
    std::vector<std::size_t> train, val, test;
};

// Labels file: one line per node. Multiclass rows are a single integer class
// id; multilabel rows are comma-separated 0/1 flags (constant width). The
// format is autodetected from the first data line.
Labels load_labels(const std::string& path);
void save_labels(const Labels& labels, const std::string& path);

// Splits file: lines "train:", "val:", "test:" followed by space-separated
// indices on the same line, or "-" for an empty split.
Splits load_splits(const std::string& path);
void save_splits(const Splits& s, const std::string& path);

// Enforces: pairwise disjoint, all indices < num_nodes, train nonempty.
void validate_splits(const Splits& s, std::size_t num_nodes);

// Prediction rows as produced by predict(): multiclass n x 1 class ids,
// multilabel n x c 0/1 flags. Written in the labels file grammar.
void save_predictions(const DenseMatrix& preds, TaskKind task, const std::string& path);

} // namespace sign
