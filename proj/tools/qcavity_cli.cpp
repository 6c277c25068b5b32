// qcavity command-line front end. Talks to the core exclusively through the
// C API in qcavity.h; all physics and file formats live in the library.
//
// Exit codes: 0 ok, 2 config error, 3 numerical abort, 4 I/O error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcavity.h"

namespace {

int finish(qc_status st) {
    if (st != QC_OK) std::fprintf(stderr, "error: %s\n", qc_last_error());
    return static_cast<int>(st);
}

// key=value pairs from repeated --set flags
qc_status apply_sets(qc_config* cfg, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", s.c_str());
            return QC_ERR_CONFIG;
        }
        const qc_status st =
            qc_config_set(cfg, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str());
        if (st != QC_OK) return st;
    }
    return QC_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcavity - stochastic trajectories of a probed optical cavity"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qc_version()));

    // simulate [config] [--preset name] [--set k=v ...] [--out dir]
    std::string config_path, preset, out_dir;
    std::vector<std::string> sets;
    auto* sim = app.add_subcommand("simulate", "run an experiment from a config file / preset");
    sim->add_option("config", config_path, "config file (key = value with [sections])");
    sim->add_option("--preset", preset, "start from a named preset");
    sim->add_option("--set", sets, "override a key, e.g. --set gs=0.005")->take_all();
    sim->add_option("--out", out_dir, "output directory (default: config, $QCAVITY_OUT, or .)");

    auto* presets = app.add_subcommand("presets", "preset catalogue");
    auto* plist = presets->add_subcommand("list", "list presets with one-line descriptions");
    std::string show_name;
    auto* pshow = presets->add_subcommand("show", "print a preset's resolved configuration");
    pshow->add_option("name", show_name, "preset name")->required();

    double mu = 128.0, phi = 0.0, r2t = 50.0;
    int atoms = 4;
    std::string out_path;
    auto* oracle = app.add_subcommand("oracle", "discrete measurement-model tables");
    auto* upq = oracle->add_subcommand("upq", "exact vs strong-oscillator u_pq table");
    upq->add_option("--mu", mu, "local-oscillator strength |alpha|^2/2")->required();
    upq->add_option("--phi", phi, "local-oscillator phase (radians)");
    upq->add_option("--out", out_path, "CSV path (default: stdout)");

    auto* analytic = app.add_subcommand("analytic", "closed-form curves");
    auto* fig2 = analytic->add_subcommand("fig2", "collapse profile at a given r^2 t");
    fig2->add_option("--r2t", r2t, "dimensionless collapse parameter r^2 t")->required();
    fig2->add_option("--atoms", atoms, "atom count N");
    fig2->add_option("--out", out_path, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    if (sim->parsed()) {
        if (config_path.empty() && preset.empty()) {
            std::fprintf(stderr, "error: simulate needs a config file or --preset\n");
            return 2;
        }
        qc_config* cfg = preset.empty() ? qc_config_new() : qc_config_from_preset(preset.c_str());
        if (!cfg) return finish(QC_ERR_CONFIG);
        qc_status st = QC_OK;
        if (!config_path.empty()) st = qc_config_load_file(cfg, config_path.c_str());
        if (st == QC_OK) st = apply_sets(cfg, sets);
        if (st == QC_OK) st = qc_run(cfg, out_dir.empty() ? nullptr : out_dir.c_str());
        qc_config_free(cfg);
        return finish(st);
    }

    if (plist->parsed() || (presets->parsed() && !pshow->parsed())) {
        for (int i = 0; i < qc_preset_count(); ++i)
            std::printf("%-18s %s\n", qc_preset_name(i), qc_preset_brief(i));
        return 0;
    }

    if (pshow->parsed()) {
        qc_config* cfg = qc_config_from_preset(show_name.c_str());
        if (!cfg) return finish(QC_ERR_CONFIG);
        for (const char* key :
             {"kappa1", "kappa2", "kappaL", "eta", "phi", "beta", "beta_im", "beta_off_time",
              "g", "gs", "atoms", "fock_cutoff", "dt", "hamiltonian", "equation", "scheme",
              "t_end", "prep_time", "trajectories", "seed", "record_stride", "initial",
              "label", "timeseries", "final", "histogram", "feedback"})
            std::printf("%s = %s\n", key, qc_config_get(cfg, key));
        qc_config_free(cfg);
        return 0;
    }

    if (upq->parsed()) return finish(qc_tool_upq(mu, phi, out_path.empty() ? nullptr : out_path.c_str()));
    if (fig2->parsed())
        return finish(qc_tool_fig2(r2t, atoms, out_path.empty() ? nullptr : out_path.c_str()));

    return 2;
}
