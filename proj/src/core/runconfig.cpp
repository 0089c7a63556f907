#include "core/runconfig.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/bundle.hpp"
#include "core/error.hpp"

namespace sign {

namespace {

const std::set<std::string> kKnownKeys = {
    // paths
    "edges", "features", "labels", "splits", "bundle_dir", "checkpoint_dir",
    "report", "predictions", "histogram",
    // graph handling
    "directed", "symmetrize", "num_nodes",
    // model
    "hidden_dim", "branch_layers", "head_layers", "head_hidden", "activation",
    "batchnorm", "task", "num_classes",
    // training
    "learning_rate", "batch_size", "dropout", "weight_decay", "max_epochs",
    "patience", "seed",
    // bench / analysis / infer
    "bench_runs", "bins", "nonzero_only", "rows",
    // sbm
    "sbm.num_nodes", "sbm.num_blocks", "sbm.p_in", "sbm.p_out", "sbm.feature_dim",
    "sbm.feature_noise", "sbm.train_frac", "sbm.val_frac", "sbm.test_frac",
};

const std::set<std::string> kOperatorFields = {"kind", "power", "alpha", "iterations",
                                               "rownorm"};

// operator.N.field -> N, or nullopt if the key is not an operator key at all.
std::optional<std::uint64_t> operator_block_index(const std::string& key,
                                                  const std::string& origin) {
    if (key.rfind("operator.", 0) != 0) return std::nullopt;
    const std::string rest = key.substr(9);
    const std::size_t dot = rest.find('.');
    require(dot != std::string::npos && dot > 0, ErrorCode::Parse,
            origin + ": malformed operator key '" + key + "'");
    const std::string num = rest.substr(0, dot);
    const std::string field = rest.substr(dot + 1);
    require(kOperatorFields.count(field) == 1, ErrorCode::Parse,
            origin + ": unknown operator field '" + field + "' in '" + key + "'");
    require(!num.empty() && num.find_first_not_of("0123456789") == std::string::npos,
            ErrorCode::Parse, origin + ": malformed operator index in '" + key + "'");
    return parse_u64_value(num, origin + ": " + key);
}

std::vector<std::size_t> parse_index_list(const std::string& value,
                                          const std::string& context) {
    std::vector<std::size_t> out;
    std::istringstream ss(value);
    std::string tok;
    while (ss >> tok) out.push_back(parse_u64_value(tok, context));
    return out;
}

} // namespace

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
    const KvFile kv = KvFile::parse_text(text, origin);

    // reject unknown keys up front
    std::set<std::uint64_t> operator_indices;
    for (const auto& [key, value] : kv.entries()) {
        (void)value;
        if (const auto n = operator_block_index(key, origin)) {
            require(*n >= 1, ErrorCode::Parse,
                    origin + ": operator indices are 1-based ('" + key + "')");
            operator_indices.insert(*n);
            continue;
        }
        require(kKnownKeys.count(key) == 1, ErrorCode::Parse,
                origin + ": unknown config key '" + key + "'");
    }
    if (!operator_indices.empty()) {
        const std::uint64_t max_n = *operator_indices.rbegin();
        require(operator_indices.size() == max_n, ErrorCode::Parse,
                origin + ": operator blocks must be contiguous starting at operator.1");
    }

    RunConfig cfg;
    cfg.edges = kv.get_or("edges", "");
    cfg.features = kv.get_or("features", "");
    cfg.labels = kv.get_or("labels", "");
    cfg.splits = kv.get_or("splits", "");
    cfg.bundle_dir = kv.get_or("bundle_dir", "");
    cfg.checkpoint_dir = kv.get_or("checkpoint_dir", "");
    cfg.report = kv.get_or("report", "");
    cfg.predictions = kv.get_or("predictions", "");
    cfg.histogram = kv.get_or("histogram", "");

    cfg.directed = kv.get_bool_or("directed", false);
    cfg.symmetrize = kv.get_bool_or("symmetrize", false);
    if (kv.has("num_nodes")) cfg.num_nodes = kv.get_u64("num_nodes");

    for (std::uint64_t n = 1; n <= operator_indices.size(); ++n) {
        // every block needs at least its kind
        require(kv.has("operator." + std::to_string(n) + ".kind"), ErrorCode::Parse,
                origin + ": operator." + std::to_string(n) + ".kind is missing");
        cfg.operators.push_back(read_operator_spec(kv, n));
    }

    cfg.model.hidden_dim = kv.get_u64_or("hidden_dim", 64);
    cfg.model.branch_layers = kv.get_u64_or("branch_layers", 1);
    cfg.model.head_layers = kv.get_u64_or("head_layers", 1);
    cfg.model.head_hidden = kv.get_u64_or("head_hidden", cfg.model.hidden_dim);
    cfg.model.activation = activation_from_name(kv.get_or("activation", "prelu"));
    cfg.model.batchnorm = kv.get_bool_or("batchnorm", true);
    cfg.model.task = task_from_name(kv.get_or("task", "multiclass"));
    cfg.model.num_classes = kv.get_u64_or("num_classes", 0); // 0 = infer from labels

    cfg.training.learning_rate = kv.get_double_or("learning_rate", 0.01);
    cfg.training.batch_size = kv.get_u64_or("batch_size", 128);
    cfg.training.dropout = kv.get_double_or("dropout", 0.0);
    cfg.training.weight_decay = kv.get_double_or("weight_decay", 0.0);
    cfg.training.max_epochs = kv.get_u64_or("max_epochs", 100);
    cfg.training.patience = kv.get_u64_or("patience", 15);
    cfg.training.seed = kv.get_u64_or("seed", 0);
    cfg.training.task = cfg.model.task;
    cfg.model.dropout = cfg.training.dropout;

    cfg.bench_runs = kv.get_u64_or("bench_runs", 10);
    cfg.bins = kv.get_u64_or("bins", 50);
    cfg.nonzero_only = kv.get_bool_or("nonzero_only", false);
    if (kv.has("rows")) {
        cfg.has_rows = true;
        cfg.rows = parse_index_list(kv.get("rows"), origin + ": rows");
    }

    cfg.sbm.num_nodes = kv.get_u64_or("sbm.num_nodes", 0);
    cfg.sbm.num_blocks = kv.get_u64_or("sbm.num_blocks", 2);
    cfg.sbm.p_in = kv.get_double_or("sbm.p_in", 0.1);
    cfg.sbm.p_out = kv.get_double_or("sbm.p_out", 0.01);
    cfg.sbm.feature_dim = kv.get_u64_or("sbm.feature_dim", 8);
    cfg.sbm.feature_noise = kv.get_double_or("sbm.feature_noise", 1.0);
    cfg.sbm.train_frac = kv.get_double_or("sbm.train_frac", 0.6);
    cfg.sbm.val_frac = kv.get_double_or("sbm.val_frac", 0.2);
    cfg.sbm.test_frac = kv.get_double_or("sbm.test_frac", 0.2);
    cfg.sbm.seed = cfg.training.seed;

    // structural validation that does not depend on input files
    require(cfg.training.dropout >= 0.0 && cfg.training.dropout < 1.0, ErrorCode::Parse,
            origin + ": dropout must be in [0, 1)");
    for (const OperatorSpec& spec : cfg.operators) {
        require(spec.power >= 1, ErrorCode::Parse, origin + ": operator power must be >= 1");
        if (spec.kind == OperatorKind::Ppr)
            require(spec.alpha > 0.0 && spec.alpha <= 1.0, ErrorCode::Parse,
                    origin + ": ppr alpha must be in (0, 1]");
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    const KvFile kv = KvFile::parse_file(path); // I/O + duplicate-key errors
    return parse_text(kv.to_text(), path);
}

} // namespace sign
