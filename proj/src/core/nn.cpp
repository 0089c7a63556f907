#include "core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "core/error.hpp"
#include "core/kvfile.hpp"

namespace sign {

namespace {

bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

} // namespace

const char* activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "prelu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "prelu") return Activation::Prelu;
    fail(ErrorCode::Parse, "unknown activation '" + name + "' (expected relu|prelu)");
}

const char* task_name(TaskKind t) {
    return t == TaskKind::Multiclass ? "multiclass" : "multilabel";
}

TaskKind task_from_name(const std::string& name) {
    if (name == "multiclass") return TaskKind::Multiclass;
    if (name == "multilabel") return TaskKind::Multilabel;
    fail(ErrorCode::Parse, "unknown task '" + name + "' (expected multiclass|multilabel)");
}

Labels Labels::slice(const std::vector<std::size_t>& rows) const {
    Labels out;
    out.task = task;
    out.num_classes = num_classes;
    if (task == TaskKind::Multiclass) {
        out.classes.reserve(rows.size());
        for (std::size_t r : rows) {
            require(r < classes.size(), ErrorCode::InvalidArgument,
                    "label index out of range");
            out.classes.push_back(classes[r]);
        }
    } else {
        out.indicator = DenseMatrix(rows.size(), num_classes, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i] < indicator.n_rows, ErrorCode::InvalidArgument,
                    "label index out of range");
            std::copy(indicator.row(rows[i]), indicator.row(rows[i]) + num_classes,
                      out.indicator.row(i));
        }
    }
    return out;
}

void ModelConfig::validate() const {
    require(hidden_dim >= 1, ErrorCode::InvalidArgument, "hidden_dim must be >= 1");
    require(branch_layers >= 1, ErrorCode::InvalidArgument, "branch_layers must be >= 1");
    require(head_layers >= 1, ErrorCode::InvalidArgument, "head_layers must be >= 1");
    require(head_hidden >= 1, ErrorCode::InvalidArgument, "head_hidden must be >= 1");
    require(num_classes >= 1, ErrorCode::InvalidArgument, "num_classes must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorCode::InvalidArgument,
            "dropout must be in [0, 1)");
}

void BatchNorm::init(std::size_t width) {
    gamma.assign(width, 1.0);
    beta.assign(width, 0.0);
    running_mean.assign(width, 0.0);
    running_var.assign(width, 1.0);
    d_gamma.assign(width, 0.0);
    d_beta.assign(width, 0.0);
}

DenseMatrix MlpLayer::forward(const DenseMatrix& x, Mode mode, Rng* rng) {
    require(x.n_cols == fan_in(), ErrorCode::InvalidArgument,
            "layer forward: input width " + std::to_string(x.n_cols) + " != fan_in " +
                std::to_string(fan_in()));
    const bool train = mode == Mode::Train;
    if (train) input = x;

    DenseMatrix z = matmul(x, weight);
    for (std::size_t i = 0; i < z.n_rows; ++i) {
        double* row = z.row(i);
        for (std::size_t j = 0; j < z.n_cols; ++j) row[j] += bias[j];
    }

    if (use_batchnorm) {
        const std::size_t b = z.n_rows;
        const std::size_t f = z.n_cols;
        if (train) {
            require(b >= 1, ErrorCode::InvalidArgument, "batch-norm needs a nonempty batch");
            std::vector<double> mean(f, 0.0), var(f, 0.0);
            for (std::size_t i = 0; i < b; ++i) {
                const double* row = z.row(i);
                for (std::size_t j = 0; j < f; ++j) mean[j] += row[j];
            }
            for (std::size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(b);
            for (std::size_t i = 0; i < b; ++i) {
                const double* row = z.row(i);
                for (std::size_t j = 0; j < f; ++j) {
                    const double d = row[j] - mean[j];
                    var[j] += d * d;
                }
            }
            for (std::size_t j = 0; j < f; ++j) var[j] /= static_cast<double>(b);

            bn.inv_std.resize(f);
            for (std::size_t j = 0; j < f; ++j)
                bn.inv_std[j] = 1.0 / std::sqrt(var[j] + bn.epsilon);
            bn.xhat = DenseMatrix(b, f, 0.0);
            for (std::size_t i = 0; i < b; ++i) {
                const double* row = z.row(i);
                double* xh = bn.xhat.row(i);
                for (std::size_t j = 0; j < f; ++j)
                    xh[j] = (row[j] - mean[j]) * bn.inv_std[j];
            }
            for (std::size_t i = 0; i < b; ++i) {
                double* row = z.row(i);
                const double* xh = bn.xhat.row(i);
                for (std::size_t j = 0; j < f; ++j)
                    row[j] = bn.gamma[j] * xh[j] + bn.beta[j];
            }
            // biased batch variance feeds the running estimate as well
            for (std::size_t j = 0; j < f; ++j) {
                bn.running_mean[j] =
                    (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mean[j];
                bn.running_var[j] =
                    (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var[j];
            }
        } else {
            for (std::size_t i = 0; i < b; ++i) {
                double* row = z.row(i);
                for (std::size_t j = 0; j < f; ++j) {
                    const double xh = (row[j] - bn.running_mean[j]) /
                                      std::sqrt(bn.running_var[j] + bn.epsilon);
                    row[j] = bn.gamma[j] * xh + bn.beta[j];
                }
            }
        }
    }

    if (use_activation) {
        if (train) preact = z;
        if (activation == Activation::Relu) {
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        } else {
            for (double& v : z.data) v = v >= 0.0 ? v : prelu_alpha * v;
        }
    }

    if (dropout_rate > 0.0 && train) {
        if (rng != nullptr) {
            mask = DenseMatrix(z.n_rows, z.n_cols, 0.0);
            const double keep = 1.0 - dropout_rate;
            const double scale = 1.0 / keep;
            for (std::size_t i = 0; i < mask.data.size(); ++i)
                mask.data[i] = rng->uniform() < dropout_rate ? 0.0 : scale;
            has_mask = true;
        } else {
            require(has_mask && mask.same_shape(z), ErrorCode::Internal,
                    "dropout mask reuse requested without a matching cached mask");
        }
        for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] *= mask.data[i];
    }

    return z;
}

DenseMatrix MlpLayer::backward(const DenseMatrix& grad_out) {
    DenseMatrix grad = grad_out;

    if (dropout_rate > 0.0) {
        require(has_mask && mask.same_shape(grad), ErrorCode::Internal,
                "layer backward without cached dropout mask");
        for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] *= mask.data[i];
    }

    if (use_activation) {
        require(preact.same_shape(grad), ErrorCode::Internal,
                "layer backward without cached pre-activation");
        if (activation == Activation::Relu) {
            for (std::size_t i = 0; i < grad.data.size(); ++i)
                if (preact.data[i] <= 0.0) grad.data[i] = 0.0;
        } else {
            double da = 0.0;
            for (std::size_t i = 0; i < grad.data.size(); ++i) {
                if (preact.data[i] < 0.0) {
                    da += grad.data[i] * preact.data[i];
                    grad.data[i] *= prelu_alpha;
                }
            }
            d_prelu_alpha += da;
        }
    }

    if (use_batchnorm) {
        const std::size_t b = grad.n_rows;
        const std::size_t f = grad.n_cols;
        require(bn.xhat.same_shape(grad), ErrorCode::Internal,
                "layer backward without cached batch-norm state");
        std::vector<double> sum_dy(f, 0.0), sum_dy_xhat(f, 0.0);
        for (std::size_t i = 0; i < b; ++i) {
            const double* gr = grad.row(i);
            const double* xh = bn.xhat.row(i);
            for (std::size_t j = 0; j < f; ++j) {
                sum_dy[j] += gr[j];
                sum_dy_xhat[j] += gr[j] * xh[j];
            }
        }
        for (std::size_t j = 0; j < f; ++j) {
            bn.d_gamma[j] += sum_dy_xhat[j];
            bn.d_beta[j] += sum_dy[j];
        }
        const double invb = 1.0 / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
            double* gr = grad.row(i);
            const double* xh = bn.xhat.row(i);
            for (std::size_t j = 0; j < f; ++j) {
                gr[j] = bn.gamma[j] * bn.inv_std[j] *
                        (gr[j] - sum_dy[j] * invb - xh[j] * sum_dy_xhat[j] * invb);
            }
        }
    }

    require(input.n_rows == grad.n_rows, ErrorCode::Internal,
            "layer backward without cached input");
    const DenseMatrix dw = matmul_at_b(input, grad);
    for (std::size_t i = 0; i < dw.data.size(); ++i) d_weight.data[i] += dw.data[i];
    for (std::size_t i = 0; i < grad.n_rows; ++i) {
        const double* gr = grad.row(i);
        for (std::size_t j = 0; j < grad.n_cols; ++j) d_bias[j] += gr[j];
    }
    return matmul_a_bt(grad, weight);
}

void MlpLayer::zero_grad() {
    std::fill(d_weight.data.begin(), d_weight.data.end(), 0.0);
    std::fill(d_bias.begin(), d_bias.end(), 0.0);
    if (use_batchnorm) {
        std::fill(bn.d_gamma.begin(), bn.d_gamma.end(), 0.0);
        std::fill(bn.d_beta.begin(), bn.d_beta.end(), 0.0);
    }
    d_prelu_alpha = 0.0;
}

DenseMatrix Mlp::forward(const DenseMatrix& x, Mode mode, Rng* rng) {
    DenseMatrix z = x;
    for (MlpLayer& layer : layers) z = layer.forward(z, mode, rng);
    return z;
}

DenseMatrix Mlp::backward(const DenseMatrix& grad_out) {
    DenseMatrix g = grad_out;
    for (std::size_t i = layers.size(); i-- > 0;) g = layers[i].backward(g);
    return g;
}

namespace {

MlpLayer make_layer(std::size_t fan_in, std::size_t fan_out, const ModelConfig& cfg,
                    bool is_output) {
    MlpLayer layer;
    layer.weight = DenseMatrix(fan_in, fan_out, 0.0);
    layer.bias.assign(fan_out, 0.0);
    layer.d_weight = DenseMatrix(fan_in, fan_out, 0.0);
    layer.d_bias.assign(fan_out, 0.0);
    layer.use_batchnorm = cfg.batchnorm && !is_output;
    if (layer.use_batchnorm) layer.bn.init(fan_out);
    layer.use_activation = !is_output;
    layer.activation = cfg.activation;
    layer.prelu_alpha = 0.25;
    layer.dropout_rate = is_output ? 0.0 : cfg.dropout;
    return layer;
}

// Layer widths are fully determined by the config, so init and checkpoint
// loading share this skeleton builder.
SignModel build_skeleton(const ModelConfig& cfg, std::size_t num_operators,
                         std::size_t feature_dim) {
    cfg.validate();
    require(feature_dim >= 1, ErrorCode::InvalidArgument, "feature_dim must be >= 1");
    SignModel m;
    m.config = cfg;
    m.feature_dim = feature_dim;
    m.branches.resize(num_operators + 1);
    for (Mlp& branch : m.branches) {
        std::size_t in = feature_dim;
        for (std::size_t l = 0; l < cfg.branch_layers; ++l) {
            branch.layers.push_back(make_layer(in, cfg.hidden_dim, cfg, false));
            in = cfg.hidden_dim;
        }
    }
    std::size_t in = (num_operators + 1) * cfg.hidden_dim;
    for (std::size_t l = 0; l + 1 < cfg.head_layers; ++l) {
        m.head.layers.push_back(make_layer(in, cfg.head_hidden, cfg, false));
        in = cfg.head_hidden;
    }
    m.head.layers.push_back(make_layer(in, cfg.num_classes, cfg, true));
    return m;
}

void glorot_fill(DenseMatrix& w, Rng& rng) {
    const double lim =
        std::sqrt(6.0 / static_cast<double>(w.n_rows + w.n_cols));
    for (double& v : w.data) v = rng.uniform(-lim, lim);
}

} // namespace

SignModel SignModel::init(const ModelConfig& cfg, std::size_t num_operators,
                          std::size_t feature_dim, std::uint64_t seed) {
    SignModel m = build_skeleton(cfg, num_operators, feature_dim);
    Rng rng(mix_seed(seed, 0x6d6f64656cull)); // "model" stream
    for (Mlp& branch : m.branches)
        for (MlpLayer& layer : branch.layers) glorot_fill(layer.weight, rng);
    for (MlpLayer& layer : m.head.layers) glorot_fill(layer.weight, rng);
    return m;
}

DenseMatrix SignModel::forward(const FeatureBundle& batch, Mode mode, Rng* rng) {
    require(batch.diffused.size() + 1 == branches.size(), ErrorCode::InvalidArgument,
            "model expects " + std::to_string(branches.size()) + " bundle matrices, got " +
                std::to_string(batch.diffused.size() + 1));
    require(batch.feature_dim() == feature_dim, ErrorCode::InvalidArgument,
            "bundle feature_dim " + std::to_string(batch.feature_dim()) +
                " != model feature_dim " + std::to_string(feature_dim));

    const std::size_t n = batch.num_nodes();
    const std::size_t dprime = config.hidden_dim;
    DenseMatrix concat(n, branches.size() * dprime, 0.0);
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const DenseMatrix& x = k == 0 ? batch.base : batch.diffused[k - 1];
        DenseMatrix z = branches[k].forward(x, mode, rng);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(z.row(i), z.row(i) + dprime, concat.row(i) + k * dprime);
    }
    return head.forward(concat, mode, rng);
}

std::vector<ParamRef> SignModel::params() {
    std::vector<ParamRef> out;
    const auto add_layer = [&](MlpLayer& layer) {
        out.push_back({layer.weight.data.data(), layer.d_weight.data.data(),
                       layer.weight.data.size(), true});
        out.push_back({layer.bias.data(), layer.d_bias.data(), layer.bias.size(), false});
        if (layer.use_batchnorm) {
            out.push_back({layer.bn.gamma.data(), layer.bn.d_gamma.data(),
                           layer.bn.gamma.size(), false});
            out.push_back({layer.bn.beta.data(), layer.bn.d_beta.data(),
                           layer.bn.beta.size(), false});
        }
        if (layer.use_activation && layer.activation == Activation::Prelu)
            out.push_back({&layer.prelu_alpha, &layer.d_prelu_alpha, 1, false});
    };
    for (Mlp& branch : branches)
        for (MlpLayer& layer : branch.layers) add_layer(layer);
    for (MlpLayer& layer : head.layers) add_layer(layer);
    return out;
}

std::size_t SignModel::num_params() {
    std::size_t total = 0;
    for (const ParamRef& p : params()) total += p.size;
    return total;
}

void SignModel::zero_grad() {
    for (Mlp& branch : branches)
        for (MlpLayer& layer : branch.layers) layer.zero_grad();
    for (MlpLayer& layer : head.layers) layer.zero_grad();
}

bool SignModel::params_finite() {
    for (const ParamRef& p : params())
        if (!all_finite(p.value, p.size)) return false;
    return true;
}

double softmax_ce_loss(const DenseMatrix& logits, const std::vector<std::size_t>& classes,
                       DenseMatrix* dlogits) {
    const std::size_t b = logits.n_rows;
    const std::size_t c = logits.n_cols;
    require(classes.size() == b, ErrorCode::InvalidArgument,
            "softmax loss: label count != batch rows");
    require(b >= 1, ErrorCode::InvalidArgument, "softmax loss: empty batch");
    if (dlogits != nullptr) *dlogits = DenseMatrix(b, c, 0.0);

    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t y = classes[i];
        require(y < c, ErrorCode::InvalidArgument,
                "label " + std::to_string(y) + " out of range for " + std::to_string(c) +
                    " classes");
        const double* z = logits.row(i);
        double zmax = z[0];
        for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(z[j] - zmax);
        const double lse = zmax + std::log(sum);
        total += lse - z[y];
        if (dlogits != nullptr) {
            double* d = dlogits->row(i);
            for (std::size_t j = 0; j < c; ++j)
                d[j] = (std::exp(z[j] - lse) - (j == y ? 1.0 : 0.0)) / static_cast<double>(b);
        }
    }
    return total / static_cast<double>(b);
}

double sigmoid_bce_loss(const DenseMatrix& logits, const DenseMatrix& targets,
                        DenseMatrix* dlogits) {
    require(logits.same_shape(targets), ErrorCode::InvalidArgument,
            "sigmoid loss: logits/targets shape mismatch");
    require(logits.n_rows >= 1, ErrorCode::InvalidArgument, "sigmoid loss: empty batch");
    const double denom = static_cast<double>(logits.data.size());
    if (dlogits != nullptr) *dlogits = DenseMatrix(logits.n_rows, logits.n_cols, 0.0);

    double total = 0.0;
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        const double z = logits.data[i];
        const double y = targets.data[i];
        // stable form of -y*log(sigmoid(z)) - (1-y)*log(1-sigmoid(z))
        total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
        if (dlogits != nullptr)
            dlogits->data[i] = (1.0 / (1.0 + std::exp(-z)) - y) / denom;
    }
    return total / denom;
}

namespace {

double weight_decay_term(SignModel& m, double weight_decay, bool add_grad) {
    if (weight_decay == 0.0) return 0.0;
    double total = 0.0;
    for (const ParamRef& p : m.params()) {
        if (!p.decay) continue;
        for (std::size_t i = 0; i < p.size; ++i) {
            total += p.value[i] * p.value[i];
            if (add_grad) p.grad[i] += weight_decay * p.value[i];
        }
    }
    return 0.5 * weight_decay * total;
}

double task_loss(const SignModel& m, const DenseMatrix& logits, const Labels& y,
                 DenseMatrix* dlogits) {
    require(y.task == m.config.task, ErrorCode::InvalidArgument,
            "labels task kind does not match model task kind");
    require(y.num_classes == m.config.num_classes, ErrorCode::InvalidArgument,
            "labels class count does not match model");
    require(y.size() == logits.n_rows, ErrorCode::InvalidArgument,
            "label rows != batch rows");
    return y.task == TaskKind::Multiclass ? softmax_ce_loss(logits, y.classes, dlogits)
                                          : sigmoid_bce_loss(logits, y.indicator, dlogits);
}

} // namespace

double loss_and_grad(SignModel& m, const FeatureBundle& batch, const Labels& y,
                     double weight_decay, Rng* rng) {
    m.zero_grad();
    const DenseMatrix logits = m.forward(batch, Mode::Train, rng);
    DenseMatrix dlogits;
    double loss = task_loss(m, logits, y, &dlogits);
    loss += weight_decay_term(m, weight_decay, true);

    const DenseMatrix dconcat = m.head.backward(dlogits);
    const std::size_t dprime = m.config.hidden_dim;
    for (std::size_t k = 0; k < m.branches.size(); ++k) {
        DenseMatrix slice(dconcat.n_rows, dprime, 0.0);
        for (std::size_t i = 0; i < dconcat.n_rows; ++i)
            std::copy(dconcat.row(i) + k * dprime, dconcat.row(i) + (k + 1) * dprime,
                      slice.row(i));
        m.branches[k].backward(slice);
    }
    return loss;
}

double model_loss(SignModel& m, const FeatureBundle& batch, const Labels& y,
                  double weight_decay, Mode mode, Rng* rng) {
    const DenseMatrix logits = m.forward(batch, mode, rng);
    return task_loss(m, logits, y, nullptr) + weight_decay_term(m, weight_decay, false);
}

DenseMatrix predict_from_logits(const DenseMatrix& logits, TaskKind task) {
    if (task == TaskKind::Multiclass) {
        DenseMatrix out(logits.n_rows, 1, 0.0);
        for (std::size_t i = 0; i < logits.n_rows; ++i) {
            const double* z = logits.row(i);
            std::size_t best = 0;
            for (std::size_t j = 1; j < logits.n_cols; ++j)
                if (z[j] > z[best]) best = j; // ties keep the lowest index
            out.at(i, 0) = static_cast<double>(best);
        }
        return out;
    }
    DenseMatrix out(logits.n_rows, logits.n_cols, 0.0);
    for (std::size_t i = 0; i < logits.data.size(); ++i)
        out.data[i] = logits.data[i] >= 0.0 ? 1.0 : 0.0; // sigmoid(0)=0.5 counts positive
    return out;
}

DenseMatrix predict(SignModel& m, const FeatureBundle& rows) {
    return predict_from_logits(m.forward(rows, Mode::Eval, nullptr), m.config.task);
}

AdamState AdamState::init(std::size_t num_params) {
    AdamState s;
    s.m.assign(num_params, 0.0);
    s.v.assign(num_params, 0.0);
    s.t = 0;
    return s;
}

void adam_step(const std::vector<ParamRef>& params, AdamState& state, const AdamConfig& cfg) {
    std::size_t total = 0;
    for (const ParamRef& p : params) {
        require(all_finite(p.grad, p.size), ErrorCode::InvalidArgument,
                "adam_step: non-finite gradient; step aborted");
        total += p.size;
    }
    require(state.m.size() == total && state.v.size() == total, ErrorCode::InvalidArgument,
            "adam_step: state size does not match parameter count");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    std::size_t off = 0;
    for (const ParamRef& p : params) {
        for (std::size_t i = 0; i < p.size; ++i) {
            const double g = p.grad[i];
            double& mi = state.m[off + i];
            double& vi = state.v[off + i];
            mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * g;
            vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * g * g;
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        off += p.size;
    }
    for (const ParamRef& p : params)
        require(all_finite(p.value, p.size), ErrorCode::Internal,
                "adam_step: parameters became non-finite");
}

// ---------------------------------------------------------------------------
// Checkpoint persistence

namespace {

std::string layer_stem(std::size_t branch, std::size_t layer, bool is_head) {
    return is_head ? "h_l" + std::to_string(layer)
                   : "b" + std::to_string(branch) + "_l" + std::to_string(layer);
}

DenseMatrix row_vector(const std::vector<double>& v) {
    DenseMatrix m(1, v.size(), 0.0);
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
}

DenseMatrix bn_matrix(const BatchNorm& bn) {
    DenseMatrix m(4, bn.gamma.size(), 0.0);
    std::copy(bn.gamma.begin(), bn.gamma.end(), m.row(0));
    std::copy(bn.beta.begin(), bn.beta.end(), m.row(1));
    std::copy(bn.running_mean.begin(), bn.running_mean.end(), m.row(2));
    std::copy(bn.running_var.begin(), bn.running_var.end(), m.row(3));
    return m;
}

} // namespace

std::string save_checkpoint(const SignModel& m, const AdamState& adam,
                            const std::string& dir) {
    std::filesystem::create_directories(dir);

    KvFile kv;
    kv.set_u64("version", 1);
    kv.set("task", task_name(m.config.task));
    kv.set("activation", activation_name(m.config.activation));
    kv.set_bool("batchnorm", m.config.batchnorm);
    kv.set_double("dropout", m.config.dropout);
    kv.set_u64("feature_dim", m.feature_dim);
    kv.set_u64("hidden_dim", m.config.hidden_dim);
    kv.set_u64("branch_layers", m.config.branch_layers);
    kv.set_u64("head_layers", m.config.head_layers);
    kv.set_u64("head_hidden", m.config.head_hidden);
    kv.set_u64("num_classes", m.config.num_classes);
    kv.set_u64("num_branches", m.branches.size());
    kv.set_u64("adam_t", adam.t);

    std::vector<std::pair<std::string, DenseMatrix>> files;
    const auto add_layer = [&](const MlpLayer& layer, std::size_t b, std::size_t l,
                               bool is_head) {
        const std::string stem = layer_stem(b, l, is_head);
        files.emplace_back(stem + "_w.sgnm", layer.weight);
        files.emplace_back(stem + "_bias.sgnm", row_vector(layer.bias));
        if (layer.use_batchnorm) files.emplace_back(stem + "_bn.sgnm", bn_matrix(layer.bn));
        if (layer.use_activation && layer.activation == Activation::Prelu)
            kv.set_double(stem + "_prelu_alpha", layer.prelu_alpha);
    };
    for (std::size_t b = 0; b < m.branches.size(); ++b)
        for (std::size_t l = 0; l < m.branches[b].layers.size(); ++l)
            add_layer(m.branches[b].layers[l], b, l, false);
    for (std::size_t l = 0; l < m.head.layers.size(); ++l)
        add_layer(m.head.layers[l], 0, l, true);
    files.emplace_back("adam_m.sgnm", row_vector(adam.m));
    files.emplace_back("adam_v.sgnm", row_vector(adam.v));

    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string path = (std::filesystem::path(dir) / files[i].first).string();
        save_sgnm(files[i].second, path);
        kv.set("file." + std::to_string(i), files[i].first);
        kv.set("checksum." + std::to_string(i), hex_u64(fnv1a_file(path)));
    }

    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    kv.write_file(manifest);
    return manifest;
}

SignModel load_checkpoint(const std::string& dir, AdamState* adam) {
    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    require(std::filesystem::exists(manifest), ErrorCode::Io,
            "checkpoint manifest missing: " + manifest);
    const KvFile kv = KvFile::parse_file(manifest);
    const std::uint64_t version = kv.get_u64("version");
    require(version == 1, ErrorCode::Parse,
            manifest + ": unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    cfg.task = task_from_name(kv.get("task"));
    cfg.activation = activation_from_name(kv.get("activation"));
    cfg.batchnorm = kv.get_bool("batchnorm");
    cfg.dropout = kv.get_double("dropout");
    cfg.hidden_dim = kv.get_u64("hidden_dim");
    cfg.branch_layers = kv.get_u64("branch_layers");
    cfg.head_layers = kv.get_u64("head_layers");
    cfg.head_hidden = kv.get_u64("head_hidden");
    cfg.num_classes = kv.get_u64("num_classes");
    const std::uint64_t num_branches = kv.get_u64("num_branches");
    require(num_branches >= 1, ErrorCode::Parse, manifest + ": num_branches must be >= 1");
    const std::uint64_t feature_dim = kv.get_u64("feature_dim");

    SignModel m = build_skeleton(cfg, num_branches - 1, feature_dim);

    // verify checksums before deserializing any tensor
    for (std::size_t i = 0; kv.has("file." + std::to_string(i)); ++i) {
        const std::string name = kv.get("file." + std::to_string(i));
        const std::string path = (std::filesystem::path(dir) / name).string();
        require(std::filesystem::exists(path), ErrorCode::Io,
                "checkpoint file missing: " + path);
        const std::uint64_t expect =
            parse_hex_u64(kv.get("checksum." + std::to_string(i)), manifest);
        const std::uint64_t actual = fnv1a_file(path);
        require(actual == expect, ErrorCode::Corrupt,
                path + ": checksum mismatch (manifest " + hex_u64(expect) + ", file " +
                    hex_u64(actual) + ")");
    }

    const auto load_matrix = [&](const std::string& name, std::size_t rows,
                                 std::size_t cols) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        DenseMatrix mat = load_sgnm(path);
        require(mat.n_rows == rows && mat.n_cols == cols, ErrorCode::Corrupt,
                path + ": unexpected tensor shape");
        return mat;
    };

    const auto fill_layer = [&](MlpLayer& layer, std::size_t b, std::size_t l,
                                bool is_head) {
        const std::string stem = layer_stem(b, l, is_head);
        layer.weight = load_matrix(stem + "_w.sgnm", layer.fan_in(), layer.fan_out());
        const DenseMatrix bias = load_matrix(stem + "_bias.sgnm", 1, layer.fan_out());
        layer.bias.assign(bias.data.begin(), bias.data.end());
        if (layer.use_batchnorm) {
            const DenseMatrix bnm = load_matrix(stem + "_bn.sgnm", 4, layer.fan_out());
            layer.bn.gamma.assign(bnm.row(0), bnm.row(0) + bnm.n_cols);
            layer.bn.beta.assign(bnm.row(1), bnm.row(1) + bnm.n_cols);
            layer.bn.running_mean.assign(bnm.row(2), bnm.row(2) + bnm.n_cols);
            layer.bn.running_var.assign(bnm.row(3), bnm.row(3) + bnm.n_cols);
        }
        if (layer.use_activation && layer.activation == Activation::Prelu)
            layer.prelu_alpha = kv.get_double(stem + "_prelu_alpha");
    };
    for (std::size_t b = 0; b < m.branches.size(); ++b)
        for (std::size_t l = 0; l < m.branches[b].layers.size(); ++l)
            fill_layer(m.branches[b].layers[l], b, l, false);
    for (std::size_t l = 0; l < m.head.layers.size(); ++l)
        fill_layer(m.head.layers[l], 0, l, true);

    if (adam != nullptr) {
        const std::size_t total = m.num_params();
        const DenseMatrix am = load_matrix("adam_m.sgnm", 1, total);
        const DenseMatrix av = load_matrix("adam_v.sgnm", 1, total);
        adam->m.assign(am.data.begin(), am.data.end());
        adam->v.assign(av.data.begin(), av.data.end());
        adam->t = kv.get_u64("adam_t");
    }
    return m;
}

} // namespace sign
