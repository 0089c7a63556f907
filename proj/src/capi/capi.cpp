#include "sign/sign.h"

#include <exception>
#include <iostream>
#include <string>

#include "core/bundle.hpp"
#include "core/commands.hpp"
#include "core/error.hpp"
#include "core/kvfile.hpp"
#include "core/nn.hpp"
#include "core/parallel.hpp"
#include "core/runconfig.hpp"

namespace {

thread_local std::string g_last_error;

sign_status status_from_code(sign::ErrorCode code) {
    switch (code) {
        case sign::ErrorCode::InvalidArgument: return SIGN_ERR_INVALID_ARGUMENT;
        case sign::ErrorCode::Io: return SIGN_ERR_IO;
        case sign::ErrorCode::Parse: return SIGN_ERR_PARSE;
        case sign::ErrorCode::Corrupt: return SIGN_ERR_CORRUPT;
        case sign::ErrorCode::Internal: return SIGN_ERR_INTERNAL;
    }
    return SIGN_ERR_INTERNAL;
}

// Every API body funnels through here so exceptions never cross the ABI.
template <typename Fn>
sign_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SIGN_OK;
    } catch (const sign::Error& e) {
        g_last_error = e.what();
        return status_from_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SIGN_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SIGN_ERR_INTERNAL;
    }
}

sign_status invalid(const char* msg) {
    g_last_error = msg;
    return SIGN_ERR_INVALID_ARGUMENT;
}

} // namespace

struct sign_config {
    sign::KvFile kv;
    std::string origin = "<memory>";
};

struct sign_bundle {
    sign::FeatureBundle bundle;
};

struct sign_model {
    sign::SignModel model;
};

extern "C" {

const char* sign_version(void) { return "0.1.0"; }

const char* sign_last_error(void) { return g_last_error.c_str(); }

sign_status sign_set_threads(int num_threads) {
    return guarded([&] { sign::set_num_threads(num_threads); });
}

sign_status sign_config_load(const char* path, sign_config** out) {
    if (path == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* cfg = new sign_config();
        try {
            cfg->kv = sign::KvFile::parse_file(path);
            cfg->origin = path;
        } catch (...) {
            delete cfg;
            throw;
        }
        *out = cfg;
    });
}

sign_status sign_config_create(sign_config** out) {
    if (out == nullptr) return invalid("null argument");
    *out = new sign_config();
    g_last_error.clear();
    return SIGN_OK;
}

sign_status sign_config_set(sign_config* cfg, const char* key, const char* value) {
    if (cfg == nullptr || key == nullptr || value == nullptr)
        return invalid("null argument");
    return guarded([&] { cfg->kv.set(key, value); });
}

void sign_config_free(sign_config* cfg) { delete cfg; }

namespace {

using command_fn = void (*)(const sign::RunConfig&, std::ostream&);

sign_status run_command(const sign_config* cfg, command_fn command) {
    if (cfg == nullptr) return invalid("null config");
    return guarded([&] {
        const sign::RunConfig rc =
            sign::RunConfig::parse_text(cfg->kv.to_text(), cfg->origin);
        command(rc, std::cout);
    });
}

} // namespace

sign_status sign_run_precompute(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_precompute);
}
sign_status sign_run_train(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_train);
}
sign_status sign_run_infer(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_infer);
}
sign_status sign_run_eval(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_eval);
}
sign_status sign_run_bench(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_bench);
}
sign_status sign_run_gen_sbm(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_gen_sbm);
}
sign_status sign_run_analyze_triangles(const sign_config* cfg) {
    return run_command(cfg, sign::cmd_analyze_triangles);
}

sign_status sign_bundle_open(const char* dir, sign_bundle** out) {
    if (dir == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new sign_bundle();
        try {
            handle->bundle = sign::load_bundle(dir);
        } catch (...) {
            delete handle;
            throw;
        }
        *out = handle;
    });
}

void sign_bundle_free(sign_bundle* bundle) { delete bundle; }

sign_status sign_bundle_info(const sign_bundle* bundle, uint64_t* num_nodes,
                             uint64_t* feature_dim, uint64_t* num_operators) {
    if (bundle == nullptr) return invalid("null bundle");
    if (num_nodes != nullptr) *num_nodes = bundle->bundle.num_nodes();
    if (feature_dim != nullptr) *feature_dim = bundle->bundle.feature_dim();
    if (num_operators != nullptr) *num_operators = bundle->bundle.num_operators();
    g_last_error.clear();
    return SIGN_OK;
}

sign_status sign_model_open(const char* dir, sign_model** out) {
    if (dir == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new sign_model();
        try {
            handle->model = sign::load_checkpoint(dir);
        } catch (...) {
            delete handle;
            throw;
        }
        *out = handle;
    });
}

void sign_model_free(sign_model* model) { delete model; }

sign_status sign_model_info(const sign_model* model, uint64_t* num_classes,
                            int* task_is_multilabel) {
    if (model == nullptr) return invalid("null model");
    if (num_classes != nullptr) *num_classes = model->model.config.num_classes;
    if (task_is_multilabel != nullptr)
        *task_is_multilabel = model->model.config.task == sign::TaskKind::Multilabel ? 1 : 0;
    g_last_error.clear();
    return SIGN_OK;
}

sign_status sign_predict(sign_model* model, const sign_bundle* bundle,
                         const uint64_t* rows, size_t num_rows, double* out,
                         size_t out_capacity) {
    if (model == nullptr || bundle == nullptr || out == nullptr)
        return invalid("null argument");
    if (rows == nullptr && num_rows > 0) return invalid("null rows");
    return guarded([&] {
        const sign::SignModel& m = model->model;
        const sign::FeatureBundle& b = bundle->bundle;
        sign::require(m.feature_dim == b.feature_dim() &&
                          m.num_branches() == b.num_operators() + 1,
                      sign::ErrorCode::InvalidArgument,
                      "bundle/checkpoint dimension mismatch");
        const std::size_t width =
            m.config.task == sign::TaskKind::Multiclass ? 1 : m.config.num_classes;
        sign::require(out_capacity >= num_rows * width, sign::ErrorCode::InvalidArgument,
                      "output buffer too small: need " + std::to_string(num_rows * width) +
                          " doubles");
        std::vector<std::size_t> row_idx(rows, rows + num_rows);
        const sign::DenseMatrix preds =
            sign::predict(model->model, sign::slice_rows(b, row_idx));
        std::copy(preds.data.begin(), preds.data.end(), out);
    });
}

} // extern "C"
