// Command-line front end. Links exclusively against the public C API in
// sign/sign.h; all engine behavior lives behind the shared library boundary.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sign/sign.h"

namespace {

struct CommonArgs {
    std::string config_path;
    std::int64_t seed = -1;   // -1 = no override
    int threads = 0;          // 0 = no override
};

void add_common(CLI::App* cmd, CommonArgs* args) {
    cmd->add_option("--config", args->config_path, "flat key=value run config")
        ->required();
    cmd->add_option("--seed", args->seed, "override the config's seed");
    cmd->add_option("--threads", args->threads,
                    "math thread-count hint (outputs are identical for any value)");
}

int fail_status() {
    std::cerr << "error: " << sign_last_error() << "\n";
    return 1;
}

int run(const CommonArgs& args, sign_status (*command)(const sign_config*),
        const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (args.threads > 0 && sign_set_threads(args.threads) != SIGN_OK)
        return fail_status();

    sign_config* cfg = nullptr;
    if (sign_config_load(args.config_path.c_str(), &cfg) != SIGN_OK) return fail_status();
    int rc = 0;
    if (args.seed >= 0 &&
        sign_config_set(cfg, "seed", std::to_string(args.seed).c_str()) != SIGN_OK)
        rc = fail_status();
    for (const auto& [key, value] : overrides) {
        if (rc != 0) break;
        if (sign_config_set(cfg, key.c_str(), value.c_str()) != SIGN_OK)
            rc = fail_status();
    }
    if (rc == 0 && command(cfg) != SIGN_OK) rc = fail_status();
    sign_config_free(cfg);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("sign ") + sign_version() +
                 " — precompute-once, graph-free-train node classification"};
    app.require_subcommand(1);

    CommonArgs args;
    bool nonzero_only = false;
    std::string rows;

    CLI::App* precompute =
        app.add_subcommand("precompute", "diffuse features through the operator set");
    add_common(precompute, &args);
    CLI::App* train = app.add_subcommand("train", "train a model on a bundle");
    add_common(train, &args);
    CLI::App* infer = app.add_subcommand("infer", "predict from bundle + checkpoint");
    add_common(infer, &args);
    infer->add_option("--rows", rows,
                      "space-separated node ids to predict (default: all)");
    CLI::App* eval = app.add_subcommand("eval", "metrics per split");
    add_common(eval, &args);
    CLI::App* bench =
        app.add_subcommand("bench", "time precompute / train-epoch / inference");
    add_common(bench, &args);
    CLI::App* gen_sbm =
        app.add_subcommand("gen-sbm", "generate a stochastic-block-model dataset");
    add_common(gen_sbm, &args);
    CLI::App* analyze = app.add_subcommand("analyze-triangles",
                                           "triangle-weight variation histogram");
    add_common(analyze, &args);
    analyze->add_flag("--nonzero-only", nonzero_only,
                      "drop rows whose weight standard deviation is zero");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::vector<std::pair<std::string, std::string>> overrides;
    if (precompute->parsed()) return run(args, sign_run_precompute, overrides);
    if (train->parsed()) return run(args, sign_run_train, overrides);
    if (infer->parsed()) {
        if (!rows.empty()) overrides.emplace_back("rows", rows);
        return run(args, sign_run_infer, overrides);
    }
    if (eval->parsed()) return run(args, sign_run_eval, overrides);
    if (bench->parsed()) return run(args, sign_run_bench, overrides);
    if (gen_sbm->parsed()) return run(args, sign_run_gen_sbm, overrides);
    if (analyze->parsed()) {
        if (nonzero_only) overrides.emplace_back("nonzero_only", "true");
        return run(args, sign_run_analyze_triangles, overrides);
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
