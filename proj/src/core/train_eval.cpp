#include "core/train_eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/error.hpp"

namespace sign {

namespace {

constexpr std::size_t kEvalChunk = 4096;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

} // namespace

void TrainConfig::validate() const {
    require(learning_rate > 0.0, ErrorCode::InvalidArgument, "learning_rate must be > 0");
    require(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorCode::InvalidArgument,
            "dropout must be in [0, 1)");
    require(weight_decay >= 0.0, ErrorCode::InvalidArgument, "weight_decay must be >= 0");
    require(max_epochs >= 1, ErrorCode::InvalidArgument, "max_epochs must be >= 1");
    require(patience >= 1, ErrorCode::InvalidArgument, "patience must be >= 1");
}

BestTracker::BestTracker(std::size_t patience) : patience_(patience) {
    require(patience >= 1, ErrorCode::InvalidArgument, "patience must be >= 1");
}

bool BestTracker::observe(double val_loss) {
    const bool improved = val_loss < best_;
    if (improved) {
        best_ = val_loss;
        best_index_ = observed_;
        since_best_ = 0;
    } else {
        ++since_best_;
    }
    ++observed_;
    return improved;
}

double micro_f1(const DenseMatrix& pred, const DenseMatrix& truth) {
    require(pred.same_shape(truth), ErrorCode::InvalidArgument,
            "micro_f1: shape mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0.0;
        const bool t = truth.data[i] != 0.0;
        if (p && t) ++tp;
        else if (p && !t) ++fp;
        else if (!p && t) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

Metrics evaluate(SignModel& model, const FeatureBundle& bundle, const Labels& labels,
                 const std::vector<std::size_t>& rows) {
    require(!rows.empty(), ErrorCode::InvalidArgument, "evaluate: empty row set");
    require(labels.size() == bundle.num_nodes(), ErrorCode::InvalidArgument,
            "evaluate: labels do not cover the bundle");

    const std::size_t c = model.config.num_classes;
    Metrics out;
    double loss_sum = 0.0;
    std::size_t correct_cells = 0, total_cells = 0;
    DenseMatrix pred_all(rows.size(), c, 0.0);
    DenseMatrix truth_all(rows.size(), c, 0.0);

    for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
        const std::size_t stop = std::min(rows.size(), start + kEvalChunk);
        const std::vector<std::size_t> chunk(rows.begin() + start, rows.begin() + stop);
        const FeatureBundle view = slice_rows(bundle, chunk);
        const Labels y = labels.slice(chunk);
        const DenseMatrix logits = model.forward(view, Mode::Eval, nullptr);

        if (labels.task == TaskKind::Multiclass) {
            loss_sum += softmax_ce_loss(logits, y.classes, nullptr) *
                        static_cast<double>(chunk.size());
        } else {
            loss_sum += sigmoid_bce_loss(logits, y.indicator, nullptr) *
                        static_cast<double>(chunk.size());
        }

        const DenseMatrix pred = predict_from_logits(logits, labels.task);
        if (labels.task == TaskKind::Multiclass) {
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                const auto p = static_cast<std::size_t>(pred.at(i, 0));
                if (p == y.classes[i]) ++correct_cells;
                ++total_cells;
                pred_all.at(start + i, p) = 1.0;
                truth_all.at(start + i, y.classes[i]) = 1.0;
            }
        } else {
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                for (std::size_t j = 0; j < c; ++j) {
                    const bool p = pred.at(i, j) != 0.0;
                    const bool t = y.indicator.at(i, j) != 0.0;
                    if (p == t) ++correct_cells;
                    ++total_cells;
                    pred_all.at(start + i, j) = p ? 1.0 : 0.0;
                    truth_all.at(start + i, j) = t ? 1.0 : 0.0;
                }
            }
        }
    }

    out.loss = loss_sum / static_cast<double>(rows.size());
    out.accuracy = static_cast<double>(correct_cells) / static_cast<double>(total_cells);
    out.micro_f1 = micro_f1(pred_all, truth_all);
    return out;
}

TrainHistory train(SignModel& model, AdamState& adam, const FeatureBundle& bundle,
                   const Labels& labels, const Splits& splits, const TrainConfig& cfg) {
    cfg.validate();
    validate_splits(splits, bundle.num_nodes());
    require(labels.size() == bundle.num_nodes(), ErrorCode::InvalidArgument,
            "train: labels do not cover the bundle");
    require(labels.task == cfg.task && model.config.task == cfg.task,
            ErrorCode::InvalidArgument, "train: task kind mismatch");
    require(adam.m.size() == model.num_params(), ErrorCode::InvalidArgument,
            "train: optimizer state does not match model");

    Rng shuffle_rng(mix_seed(cfg.seed, 0x73687566ull)); // shuffle stream
    Rng dropout_rng(mix_seed(cfg.seed, 0x64726f70ull)); // dropout stream
    const AdamConfig adam_cfg{cfg.learning_rate, 0.9, 0.999, 1e-8};
    const std::vector<ParamRef> params = model.params();

    TrainHistory history;
    BestTracker tracker(cfg.patience);
    SignModel best_model = model;

    std::vector<std::size_t> order = splits.train;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double t0 = now_seconds();
        shuffle_rng.shuffle(order);

        double train_loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::vector<std::size_t> batch(order.begin() + start,
                                                 order.begin() + stop);
            const FeatureBundle view = slice_rows(bundle, batch);
            const Labels y = labels.slice(batch);
            const double loss =
                loss_and_grad(model, view, y, cfg.weight_decay, &dropout_rng);
            require(std::isfinite(loss), ErrorCode::Internal,
                    "train: non-finite loss at epoch " + std::to_string(epoch));
            adam_step(params, adam, adam_cfg);
            train_loss_sum += loss * static_cast<double>(batch.size());
        }
        const double train_loss = train_loss_sum / static_cast<double>(order.size());

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss;
        if (!splits.val.empty()) {
            const Metrics vm = evaluate(model, bundle, labels, splits.val);
            rec.val_loss = vm.loss;
            rec.val_acc = vm.accuracy;
            rec.val_f1 = vm.micro_f1;
        } else {
            rec.val_loss = train_loss; // no validation split: stop on train loss
        }
        rec.seconds = now_seconds() - t0;
        history.epochs.push_back(rec);

        if (tracker.observe(rec.val_loss)) {
            best_model = model;
            history.best_epoch = epoch;
            history.best_val_loss = rec.val_loss;
        }
        if (tracker.should_stop()) {
            history.early_stopped = true;
            break;
        }
    }

    model = best_model;
    return history;
}

void mean_std(const std::vector<double>& xs, double* mean, double* std_out) {
    require(!xs.empty(), ErrorCode::InvalidArgument, "mean_std: empty sample");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    var /= static_cast<double>(xs.size());
    *mean = m;
    *std_out = std::sqrt(var);
}

BenchmarkResult benchmark(const Graph& g, const DenseMatrix& x,
                          const std::vector<OperatorSpec>& specs, const ModelConfig& mcfg,
                          const TrainConfig& tcfg, std::size_t runs) {
    require(runs >= 1, ErrorCode::InvalidArgument, "benchmark: runs must be >= 1");

    BenchmarkResult out;
    out.runs = runs;
    out.num_nodes = g.num_nodes;
    out.num_edges = num_stored_edges(g);
    out.num_operators = specs.size();

    // --- precompute ---
    FeatureBundle bundle = precompute_features(g, x, specs); // warm-up, reused below
    std::vector<double> pre_times;
    for (std::size_t r = 0; r < runs; ++r) {
        const double t0 = now_seconds();
        const FeatureBundle timed = precompute_features(g, x, specs);
        pre_times.push_back(now_seconds() - t0);
        (void)timed;
    }
    mean_std(pre_times, &out.precompute_mean, &out.precompute_std);

    // --- one training epoch (forward + backward + update over all nodes) ---
    SignModel model = SignModel::init(mcfg, specs.size(), x.n_cols, tcfg.seed);
    AdamState adam = AdamState::init(model.num_params());
    const std::vector<ParamRef> params = model.params();
    const AdamConfig adam_cfg{tcfg.learning_rate, 0.9, 0.999, 1e-8};
    Labels synth; // synthetic labels: timing only
    synth.task = mcfg.task;
    synth.num_classes = mcfg.num_classes;
    if (mcfg.task == TaskKind::Multiclass) {
        synth.classes.resize(bundle.num_nodes());
        for (std::size_t i = 0; i < synth.classes.size(); ++i)
            synth.classes[i] = i % mcfg.num_classes;
    } else {
        synth.indicator = DenseMatrix(bundle.num_nodes(), mcfg.num_classes, 0.0);
        for (std::size_t i = 0; i < bundle.num_nodes(); ++i)
            synth.indicator.at(i, i % mcfg.num_classes) = 1.0;
    }
    const std::vector<std::size_t> all_rows = iota_rows(bundle.num_nodes());
    Rng dropout_rng(mix_seed(tcfg.seed, 0x64726f70ull));
    const auto one_epoch = [&]() {
        for (std::size_t start = 0; start < all_rows.size(); start += tcfg.batch_size) {
            const std::size_t stop = std::min(all_rows.size(), start + tcfg.batch_size);
            const std::vector<std::size_t> batch(all_rows.begin() + start,
                                                 all_rows.begin() + stop);
            const FeatureBundle view = slice_rows(bundle, batch);
            const Labels y = synth.slice(batch);
            loss_and_grad(model, view, y, tcfg.weight_decay, &dropout_rng);
            adam_step(params, adam, adam_cfg);
        }
    };
    one_epoch(); // warm-up
    std::vector<double> epoch_times;
    for (std::size_t r = 0; r < runs; ++r) {
        const double t0 = now_seconds();
        one_epoch();
        epoch_times.push_back(now_seconds() - t0);
    }
    mean_std(epoch_times, &out.epoch_mean, &out.epoch_std);

    // --- full inference over the bundle (never touches g) ---
    const auto infer_all = [&]() {
        for (std::size_t start = 0; start < all_rows.size(); start += kEvalChunk) {
            const std::size_t stop = std::min(all_rows.size(), start + kEvalChunk);
            const std::vector<std::size_t> chunk(all_rows.begin() + start,
                                                 all_rows.begin() + stop);
            const FeatureBundle view = slice_rows(bundle, chunk);
            predict(model, view);
        }
    };
    infer_all(); // warm-up
    std::vector<double> infer_times;
    for (std::size_t r = 0; r < runs; ++r) {
        const double t0 = now_seconds();
        infer_all();
        infer_times.push_back(now_seconds() - t0);
    }
    mean_std(infer_times, &out.inference_mean, &out.inference_std);

    return out;
}

std::string history_report_text(const TrainHistory& h, const KvFile& header) {
    std::string text = header.to_text();
    text += "epoch,train_loss,val_loss,val_acc,val_f1,seconds\n";
    for (const EpochRecord& r : h.epochs) {
        text += std::to_string(r.epoch);
        text += ',' + format_double(r.train_loss);
        text += ',' + format_double(r.val_loss);
        text += ',' + format_double(r.val_acc);
        text += ',' + format_double(r.val_f1);
        text += ',' + format_double(r.seconds);
        text += '\n';
    }
    return text;
}

} // namespace sign
