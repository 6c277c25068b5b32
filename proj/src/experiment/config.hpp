// Flat key = value experiment configuration with one [section] level and #
// comments. Zero-dependency format so any toolchain can write it. Keys are
// unique across sections; sections are organizational and checked.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sme.hpp"

namespace qcavity {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    // Every known key with its section and default (empty = unset).
    Config();

    static Config from_preset(const std::string& name);  // throws ConfigError

    // Overlay a config file (throws ConfigError with file:line diagnostics).
    void load_file(const std::string& path);
    void load_string(const std::string& text, const std::string& origin = "<string>");

    // Overlay a single key (flag level, highest precedence).
    void set(const std::string& key, const std::string& value);

    bool is_set(const std::string& key) const;
    std::string get(const std::string& key) const;  // resolved value or default

    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    // Full resolved view in stable order, for CSV echoes.
    std::vector<std::pair<std::string, std::string>> resolved() const;

    // Translate to a run plan; validates everything.
    struct Plan {
        SimSpec spec;          // per-trajectory template (seed = base seed)
        long trajectories = 1;
        std::string label;
        std::string out_dir;
        bool want_timeseries = false;
        bool want_final = true;
        bool want_histogram = false;
        int histogram_bins = 40;
        double histogram_lo = 0.0, histogram_hi = 0.0;  // lo >= hi: auto range
        long max_timeseries = 8;
    };
    Plan plan() const;

  private:
    struct Entry {
        std::string section;
        std::string def;
        std::string value;
        bool set = false;
    };
    std::map<std::string, Entry> entries_;
    std::vector<std::string> order_;

    void require_known(const std::string& key, const std::string& where) const;
};

std::vector<std::string> preset_names();
std::string preset_brief(const std::string& name);

}  // namespace qcavity
