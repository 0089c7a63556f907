#include "core/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "core/analysis.hpp"
#include "core/bundle.hpp"
#include "core/dataio.hpp"
#include "core/error.hpp"
#include "core/train_eval.hpp"

namespace sign {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

const std::string& require_key(const std::string& value, const char* key) {
    require(!value.empty(), ErrorCode::InvalidArgument,
            std::string("config key '") + key + "' is required for this command");
    return value;
}

void require_input_file(const std::string& path, const char* key) {
    require(std::filesystem::exists(path), ErrorCode::Io,
            std::string(key) + " file not found: " + path);
}

// Shared graph ingestion: honors `directed` and the symmetrize switch (a
// directed graph averaged with its transpose becomes undirected input for the
// spectral operators).
Graph load_config_graph(const RunConfig& cfg) {
    require_key(cfg.edges, "edges");
    require_input_file(cfg.edges, "edges");
    require(!cfg.symmetrize || cfg.directed, ErrorCode::InvalidArgument,
            "symmetrize=true requires directed=true");
    Graph g = load_edge_list(cfg.edges, cfg.directed,
                             cfg.num_nodes ? std::optional<std::size_t>(*cfg.num_nodes)
                                           : std::nullopt);
    if (cfg.symmetrize) g = symmetrize(g);
    return g;
}

DenseMatrix load_config_features(const RunConfig& cfg, const Graph& g) {
    require_key(cfg.features, "features");
    require_input_file(cfg.features, "features");
    DenseMatrix x = load_sgnm(cfg.features);
    require(x.n_rows == g.num_nodes, ErrorCode::InvalidArgument,
            "features have " + std::to_string(x.n_rows) + " rows but the graph has " +
                std::to_string(g.num_nodes) + " nodes");
    return x;
}

Labels load_config_labels(const RunConfig& cfg, std::size_t num_nodes,
                          ModelConfig* model) {
    require_key(cfg.labels, "labels");
    require_input_file(cfg.labels, "labels");
    Labels labels = load_labels(cfg.labels);
    require(labels.size() == num_nodes, ErrorCode::InvalidArgument,
            "labels file has " + std::to_string(labels.size()) + " rows but the bundle has " +
                std::to_string(num_nodes) + " nodes");
    require(labels.task == model->task, ErrorCode::InvalidArgument,
            std::string("labels file looks ") + task_name(labels.task) +
                " but config task is " + task_name(model->task));
    if (model->num_classes == 0) {
        model->num_classes = labels.num_classes;
    } else if (labels.task == TaskKind::Multiclass) {
        require(model->num_classes >= labels.num_classes, ErrorCode::InvalidArgument,
                "num_classes " + std::to_string(model->num_classes) +
                    " is smaller than the largest label class " +
                    std::to_string(labels.num_classes - 1) + " + 1");
        labels.num_classes = model->num_classes;
    } else {
        require(model->num_classes == labels.num_classes, ErrorCode::InvalidArgument,
                "num_classes " + std::to_string(model->num_classes) +
                    " != multilabel width " + std::to_string(labels.num_classes));
    }
    return labels;
}

} // namespace

void cmd_precompute(const RunConfig& cfg, std::ostream& out) {
    require_key(cfg.bundle_dir, "bundle_dir");
    const double t0 = now_seconds();
    const Graph g = load_config_graph(cfg);
    const DenseMatrix x = load_config_features(cfg, g);
    const FeatureBundle bundle = precompute_features(g, x, cfg.operators);
    const std::string manifest = save_bundle(bundle, cfg.bundle_dir);
    out << "precompute: nodes=" << g.num_nodes << " edges=" << num_stored_edges(g)
        << " operators=" << cfg.operators.size() << " feature_dim=" << x.n_cols
        << " wall=" << fmt("%.3f", now_seconds() - t0) << "s manifest=" << manifest
        << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
    require_key(cfg.bundle_dir, "bundle_dir");
    require_key(cfg.checkpoint_dir, "checkpoint_dir");
    require_key(cfg.splits, "splits");
    require_input_file(cfg.splits, "splits");

    const double t0 = now_seconds();
    const FeatureBundle bundle = load_bundle(cfg.bundle_dir);
    ModelConfig mcfg = cfg.model;
    const Labels labels = load_config_labels(cfg, bundle.num_nodes(), &mcfg);
    const Splits splits = load_splits(cfg.splits);
    validate_splits(splits, bundle.num_nodes());

    SignModel model = SignModel::init(mcfg, bundle.num_operators(), bundle.feature_dim(),
                                      cfg.training.seed);
    AdamState adam = AdamState::init(model.num_params());
    const TrainHistory history = train(model, adam, bundle, labels, splits, cfg.training);

    KvFile header;
    header.set_u64("seed", cfg.training.seed);
    header.set("task", task_name(mcfg.task));
    header.set_u64("epochs_run", history.epochs_run());
    header.set_u64("best_epoch", history.best_epoch);
    header.set_double("best_val_loss", history.best_val_loss);
    header.set_bool("early_stopped", history.early_stopped);

    std::string test_summary;
    if (!splits.test.empty()) {
        const Metrics tm = evaluate(model, bundle, labels, splits.test);
        header.set_double("test_loss", tm.loss);
        header.set_double("test_accuracy", tm.accuracy);
        header.set_double("test_micro_f1", tm.micro_f1);
        test_summary = " test_acc=" + fmt("%.4f", tm.accuracy) +
                       " test_f1=" + fmt("%.4f", tm.micro_f1);
    }

    const std::string manifest = save_checkpoint(model, adam, cfg.checkpoint_dir);
    const double wall = now_seconds() - t0;
    header.set_double("wall_seconds", wall);

    if (!cfg.report.empty()) {
        const std::string text = history_report_text(history, header);
        write_file_bytes_atomic(cfg.report, text.data(), text.size());
    }

    out << "train: epochs=" << history.epochs_run() << " best_epoch=" << history.best_epoch
        << " best_val_loss=" << fmt("%.6f", history.best_val_loss) << test_summary
        << " wall=" << fmt("%.3f", wall) << "s checkpoint=" << manifest << "\n";
}

// Deliberately ignorant of cfg.edges: inference consumes the precomputed
// bundle and the checkpoint only.
void cmd_infer(const RunConfig& cfg, std::ostream& out) {
    require_key(cfg.bundle_dir, "bundle_dir");
    require_key(cfg.checkpoint_dir, "checkpoint_dir");
    require_key(cfg.predictions, "predictions");

    const double t0 = now_seconds();
    const FeatureBundle bundle = load_bundle(cfg.bundle_dir);
    SignModel model = load_checkpoint(cfg.checkpoint_dir);
    require(model.feature_dim == bundle.feature_dim() &&
                model.num_branches() == bundle.num_operators() + 1,
            ErrorCode::InvalidArgument,
            "bundle/checkpoint dimension mismatch: model expects feature_dim=" +
                std::to_string(model.feature_dim) + ", branches=" +
                std::to_string(model.num_branches()) + "; bundle has feature_dim=" +
                std::to_string(bundle.feature_dim()) + ", matrices=" +
                std::to_string(bundle.num_operators() + 1));

    std::vector<std::size_t> rows;
    if (cfg.has_rows) {
        rows = cfg.rows;
    } else {
        rows.resize(bundle.num_nodes());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }

    const std::size_t c = model.config.num_classes;
    const std::size_t width = model.config.task == TaskKind::Multiclass ? 1 : c;
    DenseMatrix preds(rows.size(), width, 0.0);
    constexpr std::size_t kChunk = 4096;
    for (std::size_t start = 0; start < rows.size(); start += kChunk) {
        const std::size_t stop = std::min(rows.size(), start + kChunk);
        const std::vector<std::size_t> chunk(rows.begin() + start, rows.begin() + stop);
        const DenseMatrix p = predict(model, slice_rows(bundle, chunk));
        for (std::size_t i = 0; i < chunk.size(); ++i)
            std::copy(p.row(i), p.row(i) + width, preds.row(start + i));
    }
    save_predictions(preds, model.config.task, cfg.predictions);

    out << "infer: rows=" << rows.size() << " task=" << task_name(model.config.task)
        << " wall=" << fmt("%.3f", now_seconds() - t0) << "s predictions=" << cfg.predictions
        << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
    require_key(cfg.bundle_dir, "bundle_dir");
    require_key(cfg.checkpoint_dir, "checkpoint_dir");
    require_key(cfg.splits, "splits");
    require_input_file(cfg.splits, "splits");

    const FeatureBundle bundle = load_bundle(cfg.bundle_dir);
    SignModel model = load_checkpoint(cfg.checkpoint_dir);
    ModelConfig mcfg = model.config;
    const Labels labels = load_config_labels(cfg, bundle.num_nodes(), &mcfg);
    require(mcfg.num_classes == model.config.num_classes, ErrorCode::InvalidArgument,
            "labels class count does not match the checkpoint");
    const Splits splits = load_splits(cfg.splits);
    validate_splits(splits, bundle.num_nodes());

    KvFile report;
    const auto run_split = [&](const char* name, const std::vector<std::size_t>& rowset) {
        if (rowset.empty()) return;
        const Metrics m = evaluate(model, bundle, labels, rowset);
        out << "eval " << name << ": loss=" << fmt("%.6f", m.loss)
            << " acc=" << fmt("%.4f", m.accuracy) << " micro_f1=" << fmt("%.4f", m.micro_f1)
            << "\n";
        report.set_double(std::string(name) + ".loss", m.loss);
        report.set_double(std::string(name) + ".accuracy", m.accuracy);
        report.set_double(std::string(name) + ".micro_f1", m.micro_f1);
    };
    run_split("train", splits.train);
    run_split("val", splits.val);
    run_split("test", splits.test);

    if (!cfg.report.empty()) report.write_file(cfg.report);
}

void cmd_bench(const RunConfig& cfg, std::ostream& out) {
    const Graph g = load_config_graph(cfg);
    const DenseMatrix x = load_config_features(cfg, g);
    ModelConfig mcfg = cfg.model;
    if (mcfg.num_classes == 0) mcfg.num_classes = 2; // timing-only default

    const BenchmarkResult r =
        benchmark(g, x, cfg.operators, mcfg, cfg.training, cfg.bench_runs);

    out << "bench: runs=" << r.runs << " nodes=" << r.num_nodes << " edges=" << r.num_edges
        << " operators=" << r.num_operators << "\n";
    out << "precompute: mean=" << fmt("%.6f", r.precompute_mean)
        << "s std=" << fmt("%.6f", r.precompute_std) << "s\n";
    out << "train_epoch: mean=" << fmt("%.6f", r.epoch_mean)
        << "s std=" << fmt("%.6f", r.epoch_std) << "s\n";
    out << "inference: mean=" << fmt("%.6f", r.inference_mean)
        << "s std=" << fmt("%.6f", r.inference_std) << "s\n";

    if (!cfg.report.empty()) {
        KvFile report;
        report.set_u64("runs", r.runs);
        report.set_u64("num_nodes", r.num_nodes);
        report.set_u64("num_edges", r.num_edges);
        report.set_u64("num_operators", r.num_operators);
        report.set_double("precompute_mean_s", r.precompute_mean);
        report.set_double("precompute_std_s", r.precompute_std);
        report.set_double("train_epoch_mean_s", r.epoch_mean);
        report.set_double("train_epoch_std_s", r.epoch_std);
        report.set_double("inference_mean_s", r.inference_mean);
        report.set_double("inference_std_s", r.inference_std);
        report.write_file(cfg.report);
    }
}

void cmd_gen_sbm(const RunConfig& cfg, std::ostream& out) {
    require_key(cfg.edges, "edges");
    require_key(cfg.features, "features");
    require_key(cfg.labels, "labels");
    require_key(cfg.splits, "splits");

    const double t0 = now_seconds();
    const SbmData data = sbm_generate(cfg.sbm);
    save_edge_list(data.graph, cfg.edges);
    save_sgnm(data.features, cfg.features);
    save_labels(data.labels, cfg.labels);
    save_splits(data.splits, cfg.splits);

    out << "gen-sbm: nodes=" << data.graph.num_nodes
        << " blocks=" << cfg.sbm.num_blocks << " edges=" << num_stored_edges(data.graph)
        << " feature_dim=" << cfg.sbm.feature_dim
        << " wall=" << fmt("%.3f", now_seconds() - t0) << "s\n";
}

void cmd_analyze_triangles(const RunConfig& cfg, std::ostream& out) {
    const Graph g = load_config_graph(cfg);
    std::vector<double> stds = triangle_row_std(g);
    if (cfg.nonzero_only) {
        std::vector<double> kept;
        for (double v : stds)
            if (v > 0.0) kept.push_back(v);
        stds = std::move(kept);
    }
    require(!stds.empty(), ErrorCode::InvalidArgument,
            cfg.nonzero_only ? "no nonzero row standard deviations to analyze"
                             : "graph has no nodes to analyze");
    const Histogram h = histogram(stds, cfg.bins);

    std::string csv = "bin_left,bin_right,frequency\n";
    for (std::size_t k = 0; k < h.normalized_counts.size(); ++k) {
        csv += format_double(h.bin_edges[k]);
        csv += ',' + format_double(h.bin_edges[k + 1]);
        csv += ',' + format_double(h.normalized_counts[k]);
        csv += '\n';
    }

    if (!cfg.histogram.empty()) {
        write_file_bytes_atomic(cfg.histogram, csv.data(), csv.size());
        out << "analyze-triangles: nodes=" << g.num_nodes << " samples=" << h.num_samples
            << " bins=" << h.normalized_counts.size() << " histogram=" << cfg.histogram
            << "\n";
    } else {
        out << csv;
    }
}

} // namespace sign
