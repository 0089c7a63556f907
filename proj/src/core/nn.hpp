#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/bundle.hpp"
#include "core/dense.hpp"
#include "core/rng.hpp"

namespace sign {

enum class Activation { Relu, Prelu };
enum class TaskKind { Multiclass, Multilabel };
enum class Mode { Train, Eval };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);
const char* task_name(TaskKind t);
TaskKind task_from_name(const std::string& name);

// Ground-truth labels. Multiclass stores one class index per row; multilabel
// stores a row-per-node 0/1 matrix with one column per class.
struct Labels {
    TaskKind task = TaskKind::Multiclass;
    std::size_t num_classes = 0;
    std::vector<std::size_t> classes; // multiclass only
    DenseMatrix indicator;            // multilabel only, n x c of 0/1

    std::size_t size() const {
        return task == TaskKind::Multiclass ? classes.size() : indicator.n_rows;
    }
    Labels slice(const std::vector<std::size_t>& rows) const;
};

// Architecture hyperparameters, mirroring the inception/classification
// layer+unit split of the model: each branch is an MLP d -> d' (hidden_dim)
// with branch_layers layers; the head maps (r+1)*d' through head_layers
// layers (hidden width head_hidden) to num_classes logits.
struct ModelConfig {
    std::size_t hidden_dim = 64;   // d', inception units
    std::size_t branch_layers = 1; // inception layers, >= 1
    std::size_t head_layers = 1;   // classification layers, >= 1
    std::size_t head_hidden = 64;  // classification units (head_layers >= 2)
    Activation activation = Activation::Prelu;
    bool batchnorm = true;
    double dropout = 0.0; // in [0,1)
    std::size_t num_classes = 0;
    TaskKind task = TaskKind::Multiclass;

    void validate() const;
};

struct BatchNorm {
    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
    std::vector<double> d_gamma, d_beta;
    double momentum = 0.1;
    double epsilon = 1e-5;

    // train-mode caches for backward
    DenseMatrix xhat;
    std::vector<double> inv_std;

    void init(std::size_t width);
};

// One MLP layer: linear -> batch-norm -> activation -> dropout. The final
// head layer switches everything but the linear part off (logits out).
struct MlpLayer {
    DenseMatrix weight; // fan_in x fan_out
    std::vector<double> bias;
    DenseMatrix d_weight;
    std::vector<double> d_bias;

    bool use_batchnorm = false;
    BatchNorm bn;
    bool use_activation = true;
    Activation activation = Activation::Prelu;
    double prelu_alpha = 0.25; // scalar, shared across the layer
    double d_prelu_alpha = 0.0;
    double dropout_rate = 0.0;

    // Train-mode caches. `rng == nullptr` in Train mode reuses the previous
    // dropout masks (finite-difference checks need a frozen mask).
    DenseMatrix input, preact, mask;
    bool has_mask = false;

    std::size_t fan_in() const { return weight.n_rows; }
    std::size_t fan_out() const { return weight.n_cols; }

    DenseMatrix forward(const DenseMatrix& x, Mode mode, Rng* rng);
    DenseMatrix backward(const DenseMatrix& grad_out); // after Train forward
    void zero_grad();
};

struct Mlp {
    std::vector<MlpLayer> layers;
    DenseMatrix forward(const DenseMatrix& x, Mode mode, Rng* rng);
    DenseMatrix backward(const DenseMatrix& grad_out);
};

// View into one parameter tensor and its gradient. `decay` marks tensors
// subject to L2 weight decay (weight matrices only).
struct ParamRef {
    double* value;
    double* grad;
    std::size_t size;
    bool decay;
};

struct SignModel {
    ModelConfig config;
    std::size_t feature_dim = 0;   // d
    std::vector<Mlp> branches;     // r+1, branch 0 consumes the base features
    Mlp head;

    std::size_t num_branches() const { return branches.size(); }

    static SignModel init(const ModelConfig& cfg, std::size_t num_operators,
                          std::size_t feature_dim, std::uint64_t seed);

    // Eq.-(4) forward: per-branch MLPs, feature-axis concat, head; returns
    // logits (softmax/sigmoid live in the losses and predict).
    DenseMatrix forward(const FeatureBundle& batch, Mode mode, Rng* rng = nullptr);

    std::vector<ParamRef> params(); // fixed traversal order
    std::size_t num_params();
    void zero_grad();
    bool params_finite();
};

// Logit-level losses; mean over rows (multiclass) or over all entries
// (multilabel). When `dlogits` is non-null it receives d(loss)/d(logits).
double softmax_ce_loss(const DenseMatrix& logits, const std::vector<std::size_t>& classes,
                       DenseMatrix* dlogits);
double sigmoid_bce_loss(const DenseMatrix& logits, const DenseMatrix& targets,
                        DenseMatrix* dlogits);

// Full training-step objective: Train-mode forward, task loss, L2 weight
// decay (weights only), reverse pass filling every grad buffer.
double loss_and_grad(SignModel& m, const FeatureBundle& batch, const Labels& y,
                     double weight_decay, Rng* rng);

// Objective value alone (no gradients); used for validation loss and
// finite-difference checks.
double model_loss(SignModel& m, const FeatureBundle& batch, const Labels& y,
                  double weight_decay, Mode mode, Rng* rng);

// Multiclass: n x 1 argmax class indices (lowest index wins ties).
// Multilabel: n x c 0/1 at sigmoid threshold 0.5 inclusive (logit >= 0).
DenseMatrix predict_from_logits(const DenseMatrix& logits, TaskKind task);
DenseMatrix predict(SignModel& m, const FeatureBundle& rows);

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m, v; // flat, concatenated over params() order
    std::uint64_t t = 0;

    static AdamState init(std::size_t num_params);
};

// Bias-corrected Adam. Rejects non-finite gradients before touching params.
void adam_step(const std::vector<ParamRef>& params, AdamState& state, const AdamConfig& cfg);

// Checkpoint directory: manifest.txt (architecture, PReLU alphas, optimizer
// step count, file checksums) plus SGNM tensors. Returns manifest path.
std::string save_checkpoint(const SignModel& m, const AdamState& adam, const std::string& dir);
SignModel load_checkpoint(const std::string& dir, AdamState* adam = nullptr);

} // namespace sign
