#include "qcavity.h"

#include <string>

#include "experiment/config.hpp"
#include "experiment/runner.hpp"

using namespace qcavity;

struct qc_config {
    Config impl;
};

namespace {

thread_local std::string g_last_error = "no error";
thread_local std::string g_get_buffer;
thread_local std::string g_name_buffer;
thread_local std::string g_brief_buffer;

qc_status fail(qc_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

qc_status from_result(const RunResult& r) {
    if (r.status != RunStatus::Ok) g_last_error = r.message;
    return static_cast<qc_status>(static_cast<int>(r.status));
}

}  // namespace

extern "C" {

const char* qc_version(void) { return "1.0.0"; }

const char* qc_last_error(void) { return g_last_error.c_str(); }

qc_config* qc_config_new(void) { return new qc_config{}; }

qc_config* qc_config_from_preset(const char* name) {
    if (!name) return nullptr;
    try {
        return new qc_config{Config::from_preset(name)};
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

void qc_config_free(qc_config* cfg) { delete cfg; }

qc_status qc_config_load_file(qc_config* cfg, const char* path) {
    if (!cfg || !path) return fail(QC_ERR_CONFIG, "null argument");
    try {
        cfg->impl.load_file(path);
        return QC_OK;
    } catch (const std::exception& e) {
        return fail(QC_ERR_CONFIG, e.what());
    }
}

qc_status qc_config_set(qc_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(QC_ERR_CONFIG, "null argument");
    try {
        cfg->impl.set(key, value);
        return QC_OK;
    } catch (const std::exception& e) {
        return fail(QC_ERR_CONFIG, e.what());
    }
}

const char* qc_config_get(qc_config* cfg, const char* key) {
    if (!cfg || !key) return nullptr;
    try {
        g_get_buffer = cfg->impl.get(key);
        return g_get_buffer.c_str();
    } catch (const std::exception&) {
        return nullptr;
    }
}

int qc_preset_count(void) { return static_cast<int>(preset_names().size()); }

const char* qc_preset_name(int index) {
    const auto names = preset_names();
    if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
    g_name_buffer = names[static_cast<size_t>(index)];
    return g_name_buffer.c_str();
}

const char* qc_preset_brief(int index) {
    const auto names = preset_names();
    if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
    g_brief_buffer = preset_brief(names[static_cast<size_t>(index)]);
    return g_brief_buffer.c_str();
}

qc_status qc_run(qc_config* cfg, const char* out_dir) {
    if (!cfg) return fail(QC_ERR_CONFIG, "null configuration");
    try {
        if (out_dir) cfg->impl.set("dir", out_dir);
        return from_result(run_experiment(cfg->impl));
    } catch (const std::exception& e) {
        return fail(QC_ERR_NUMERIC, e.what());
    }
}

qc_status qc_tool_upq(double mu, double phi, const char* out_path) {
    return from_result(write_upq_table(mu, phi, out_path ? out_path : ""));
}

qc_status qc_tool_fig2(double r2t, int atoms, const char* out_path) {
    return from_result(write_fig2_profile(r2t, atoms, out_path ? out_path : ""));
}

}  // extern "C"
