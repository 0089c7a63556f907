#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "core/bundle.hpp"
#include "core/dataio.hpp"
#include "core/graph.hpp"
#include "core/nn.hpp"

namespace sign {

// Training hyperparameters (the tunable grid: learning rate, dropout, weight
// decay, batch size, epochs, patience). `dropout` and `task` are copied into
// the ModelConfig when the model is built.
struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t batch_size = 128;
    double dropout = 0.0;
    double weight_decay = 0.0;
    std::size_t max_epochs = 100;
    std::size_t patience = 15;
    std::uint64_t seed = 0;
    TaskKind task = TaskKind::Multiclass;

    void validate() const;
};

struct Metrics {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double loss = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double val_f1 = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0; // 1-based; 0 until first epoch completes
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool early_stopped = false;
    std::size_t epochs_run() const { return epochs.size(); }
};

// Early-stopping bookkeeping, separated out so synthetic loss sequences can
// drive it directly. Improvement is strict (<); stopping triggers after
// `patience` consecutive non-improving observations.
class BestTracker {
public:
    explicit BestTracker(std::size_t patience);
    bool observe(double val_loss); // true iff this observation improved
    bool should_stop() const { return since_best_ >= patience_; }
    std::size_t best_index() const { return best_index_; } // 0-based
    double best_value() const { return best_; }

private:
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t best_index_ = 0;
    std::size_t observed_ = 0;
    std::size_t since_best_ = 0;
};

// Minibatch training with seeded shuffling, Adam, and early stopping on
// validation loss. On return `model` holds the best-validation-loss epoch's
// parameters (including batch-norm running stats). With an empty validation
// split the training loss drives early stopping instead (documented choice).
TrainHistory train(SignModel& model, AdamState& adam, const FeatureBundle& bundle,
                   const Labels& labels, const Splits& splits, const TrainConfig& cfg);

// Eval-mode metrics over `rows` (chunked forward; no graph access anywhere).
Metrics evaluate(SignModel& model, const FeatureBundle& bundle, const Labels& labels,
                 const std::vector<std::size_t>& rows);

// Pooled-cell micro-averaged F1 on boolean matrices (nonzero = true):
// F1 = 2TP / (2TP + FP + FN), 0 when the denominator is 0.
double micro_f1(const DenseMatrix& pred, const DenseMatrix& truth);

struct BenchmarkResult {
    std::size_t runs = 0;
    double precompute_mean = 0.0, precompute_std = 0.0;
    double epoch_mean = 0.0, epoch_std = 0.0;
    double inference_mean = 0.0, inference_std = 0.0;
    std::size_t num_nodes = 0;
    std::size_t num_edges = 0; // stored directed arcs
    std::size_t num_operators = 0;
};

// Wall-clock means/stds over `runs` timed repetitions (one untimed warm-up
// each). Inference timing touches only the bundle and the model.
BenchmarkResult benchmark(const Graph& g, const DenseMatrix& x,
                          const std::vector<OperatorSpec>& specs, const ModelConfig& mcfg,
                          const TrainConfig& tcfg, std::size_t runs);

// History report: header key=value lines, then a CSV block
// "epoch,train_loss,val_loss,val_acc,val_f1,seconds".
std::string history_report_text(const TrainHistory& h, const KvFile& header);

void mean_std(const std::vector<double>& xs, double* mean, double* std_out);

} // namespace sign
