#include "experiment/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qcavity {

namespace {

struct KeyDef {
    const char* key;
    const char* section;
    const char* def;
};

// Single source of truth for the key space. beta is real in config files;
// beta_im covers the general case. fock_cutoff = -1 selects the default
// policy max(3, ceil(16 kappa1 beta^2 / kappa^2)).
const KeyDef kKeys[] = {
    {"kappa1", "params", "0.5"},
    {"kappa2", "params", "0.5"},
    {"kappaL", "params", "0"},
    {"eta", "params", "1"},
    {"phi", "params", "0"},
    {"beta", "params", "0"},
    {"beta_im", "params", "0"},
    {"beta_off_time", "params", "-1"},
    {"g", "params", "0"},
    {"gs", "params", "0"},
    {"atoms", "params", "1"},
    {"fock_cutoff", "params", "-1"},
    {"dt", "params", "0.01"},
    {"hamiltonian", "params", "zeno"},

    {"equation", "run", "nonlinear"},
    {"scheme", "run", "milstein"},
    {"t_end", "run", "10"},
    {"prep_time", "run", "0"},
    {"trajectories", "run", "1"},
    {"seed", "run", "1"},
    {"record_stride", "run", "100"},
    {"initial", "run", "ground"},
    {"check_stride", "run", "250"},

    {"label", "output", ""},
    {"dir", "output", ""},
    {"timeseries", "output", "1"},
    {"final", "output", "1"},
    {"histogram", "output", "0"},
    {"histogram_bins", "output", "40"},
    {"histogram_lo", "output", "0"},
    {"histogram_hi", "output", "0"},
    {"max_timeseries", "output", "8"},

    {"feedback", "feedback", "0"},
    {"target_n", "feedback", "1"},
    {"gs_high", "feedback", "0.05"},
    {"gs_low", "feedback", "0"},
    {"low_threshold", "feedback", "0.2"},
    {"high_threshold", "feedback", "0.8"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct PresetDef {
    const char* name;
    const char* brief;
    const char* text;
};

const PresetDef kPresets[] = {
    {"empty_cavity",
     "pure-state run of the driven empty cavity; field amplitude relaxes to 2 sqrt(kappa1) beta / kappa",
     R"([params]
atoms = 0
fock_cutoff = 5
kappa1 = 0.5
kappa2 = 0.5
beta = 0.2
g = 0
dt = 0.0005
hamiltonian = dicke
[run]
equation = sse
t_end = 20
seed = 7
record_stride = 100
initial = ground
[output]
label = empty_cavity
)"},
    {"dicke_fig2",
     "collective-spin collapse under phase probing: 1e4 linear trajectories, integrated-signal histogram",
     // horizon r^2 t = 1 at the nominal rate r = 8 beta g sqrt(k1 k2)/k^2:
     // the linear scheme samples y from the zero-drift reference measure, so
     // the weight variance grows like exp(r_n r_m t) and larger r^2 t values
     // starve the weighted histogram (use the analytic profile for those)
     R"([params]
atoms = 4
fock_cutoff = 3
kappa1 = 0.5
kappa2 = 0.5
beta = 0.2
g = 0.2
dt = 0.0625
hamiltonian = dicke
[run]
equation = linear
t_end = 39.0625
prep_time = 20
trajectories = 10000
seed = 2026
record_stride = 0
initial = plus
[output]
label = dicke_fig2
timeseries = 0
histogram = 1
histogram_bins = 40
)"},
    {"zeno_fig3",
     "single atom, weak coherent drive gs inhibited by continuous probing (override gs for the other curves)",
     R"([params]
atoms = 1
fock_cutoff = 3
kappa1 = 0.5
kappa2 = 0.5
beta = 0.2
g = 0.2
gs = 0.001
dt = 0.01
hamiltonian = zeno
[run]
equation = nonlinear
scheme = milstein
t_end = 2000
seed = 1
record_stride = 100
initial = ground
[output]
label = zeno_fig3
)"},
    {"jumps_fig4",
     "long weak-drive run showing measurement-stabilized dwell states and quantum jumps",
     R"([params]
atoms = 1
fock_cutoff = 3
kappa1 = 0.5
kappa2 = 0.5
beta = 0.2
g = 0.2
gs = 0.001
dt = 0.02
hamiltonian = zeno
[run]
equation = nonlinear
scheme = milstein
t_end = 50000
seed = 1
record_stride = 200
initial = ground
[output]
label = jumps_fig4
)"},
    {"superposition_n2",
     "x-quadrature probing of two atoms with the shifted Hamiltonian; collapses onto {|0>,|2>} or |1>",
     R"([params]
atoms = 2
fock_cutoff = 7
kappa1 = 1
kappa2 = 0
beta = 0.3
beta_off_time = 30
g = 1
phi = -1.5707963267948966
dt = 0.001
hamiltonian = shifted
[run]
equation = sse
t_end = 40
trajectories = 2000
seed = 11
record_stride = 0
initial = plus
[output]
label = superposition_n2
timeseries = 0
)"},
    {"feedback_n1",
     "bang-bang gs feedback steering a single atom into |1> and holding it there by measurement",
     R"([params]
atoms = 1
fock_cutoff = 3
kappa1 = 0.5
kappa2 = 0.5
beta = 0.2
g = 0.2
gs = 0
dt = 0.01
hamiltonian = zeno
[run]
equation = nonlinear
scheme = milstein
t_end = 2000
seed = 3
record_stride = 100
initial = ground
[feedback]
feedback = 1
target_n = 1
gs_high = 0.05
gs_low = 0
low_threshold = 0.2
high_threshold = 0.8
[output]
label = feedback_n1
)"},
};

}  // namespace

Config::Config() {
    for (const auto& k : kKeys) {
        entries_[k.key] = Entry{k.section, k.def, "", false};
        order_.push_back(k.key);
    }
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.push_back(p.name);
    return out;
}

std::string preset_brief(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return p.brief;
    throw ConfigError("unknown preset '" + name + "'");
}

Config Config::from_preset(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) {
            Config c;
            c.load_string(p.text, std::string("preset:") + name);
            return c;
        }
    }
    throw ConfigError("unknown preset '" + name + "'");
}

void Config::require_known(const std::string& key, const std::string& where) const {
    if (entries_.find(key) == entries_.end())
        throw ConfigError(where + ": unknown key '" + key + "'");
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    load_string(ss.str(), path);
}

void Config::load_string(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "params" && section != "run" && section != "output" &&
                section != "feedback")
                throw ConfigError(where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require_known(key, where);
        auto& e = entries_[key];
        if (section.empty())
            throw ConfigError(where + ": key '" + key + "' appears before any [section]");
        if (e.section != section)
            throw ConfigError(where + ": key '" + key + "' belongs to [" + e.section + "]");
        e.value = value;
        e.set = true;
    }
}

void Config::set(const std::string& key, const std::string& value) {
    require_known(key, "--set");
    entries_[key].value = value;
    entries_[key].set = true;
}

bool Config::is_set(const std::string& key) const {
    const auto it = entries_.find(key);
    return it != entries_.end() && it->second.set;
}

std::string Config::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown key '" + key + "'");
    return it->second.set ? it->second.value : it->second.def;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return x;
}

long Config::get_long(const std::string& key) const {
    const std::string v = get(key);
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    return x;
}

bool Config::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::pair<std::string, std::string>> Config::resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : order_) out.emplace_back(k, get(k));
    return out;
}

Config::Plan Config::plan() const {
    Plan plan;
    SimSpec& s = plan.spec;
    CavityParams& p = s.params;

    p.kappa1 = get_double("kappa1");
    p.kappa2 = get_double("kappa2");
    p.kappaL = get_double("kappaL");
    p.eta = get_double("eta");
    p.phi = get_double("phi");
    p.beta = cx{get_double("beta"), get_double("beta_im")};
    p.beta_off_time = get_double("beta_off_time");
    p.g = get_double("g");
    p.gs = get_double("gs");
    const long atoms = get_long("atoms");
    if (atoms < 0) throw ConfigError("atoms must be >= 0");
    p.atoms = static_cast<int>(atoms);
    const long np = get_long("fock_cutoff");
    p.fock_cutoff = (np < 0) ? default_fock_cutoff(p.kappa1, 1.0, std::abs(p.beta))
                             : static_cast<int>(np);
    p.dt = get_double("dt");

    const std::string h = get("hamiltonian");
    if (h == "dicke")
        p.variant = HamiltonianVariant::Dicke;
    else if (h == "shifted")
        p.variant = HamiltonianVariant::Shifted;
    else if (h == "zeno")
        p.variant = HamiltonianVariant::Zeno;
    else
        throw ConfigError("hamiltonian must be dicke | shifted | zeno");

    const std::string eq = get("equation");
    if (eq == "nonlinear")
        s.equation = Equation::Nonlinear;
    else if (eq == "linear")
        s.equation = Equation::Linear;
    else if (eq == "sse")
        s.equation = Equation::Sse;
    else if (eq == "counting")
        s.equation = Equation::Counting;
    else
        throw ConfigError("equation must be nonlinear | linear | sse | counting");

    const std::string sch = get("scheme");
    if (sch == "euler")
        s.scheme = Scheme::Euler;
    else if (sch == "milstein")
        s.scheme = Scheme::Milstein;
    else
        throw ConfigError("scheme must be euler | milstein");

    s.t_end = get_double("t_end");
    s.prep_time = get_double("prep_time");
    s.seed = static_cast<uint64_t>(get_long("seed"));
    const long stride = get_long("record_stride");
    if (stride < 0) throw ConfigError("record_stride must be >= 0");
    s.record_stride = static_cast<int>(stride);
    s.check_stride = static_cast<int>(get_long("check_stride"));

    const std::string init = get("initial");
    if (init == "ground") {
        s.init = SimSpec::Init::Ground;
    } else if (init == "plus") {
        s.init = SimSpec::Init::Plus;
    } else if (init.rfind("n:", 0) == 0) {
        s.init = SimSpec::Init::Number;
        s.init_n = std::atoi(init.c_str() + 2);
        if (s.init_n < 0 || s.init_n > p.atoms)
            throw ConfigError("initial n:<k> out of range 0..atoms");
    } else {
        throw ConfigError("initial must be ground | plus | n:<k>");
    }

    if (get_bool("feedback")) {
        FeedbackLaw law;
        law.target_n = static_cast<int>(get_long("target_n"));
        law.gs_high = get_double("gs_high");
        law.gs_low = get_double("gs_low");
        law.low_threshold = get_double("low_threshold");
        law.high_threshold = get_double("high_threshold");
        if (law.target_n < 0 || law.target_n > p.atoms)
            throw ConfigError("feedback target_n out of range 0..atoms");
        if (!(0.0 < law.low_threshold && law.low_threshold < law.high_threshold &&
              law.high_threshold < 1.0))
            throw ConfigError("feedback thresholds must satisfy 0 < low < high < 1");
        if (p.variant != HamiltonianVariant::Zeno)
            throw ConfigError("feedback requires hamiltonian = zeno");
        s.feedback = law;
    }

    plan.trajectories = get_long("trajectories");
    if (plan.trajectories < 1) throw ConfigError("trajectories must be >= 1");
    plan.label = get("label").empty() ? "experiment" : get("label");
    plan.out_dir = get("dir");
    if (plan.out_dir.empty()) {
        const char* env = std::getenv("QCAVITY_OUT");
        plan.out_dir = env ? env : ".";
    }
    plan.want_timeseries = get_bool("timeseries") && s.record_stride > 0;
    plan.want_final = get_bool("final");
    plan.want_histogram = get_bool("histogram");
    plan.histogram_bins = static_cast<int>(get_long("histogram_bins"));
    if (plan.histogram_bins < 1) throw ConfigError("histogram_bins must be >= 1");
    plan.histogram_lo = get_double("histogram_lo");
    plan.histogram_hi = get_double("histogram_hi");
    plan.max_timeseries = get_long("max_timeseries");

    // joint purity is only meaningful/affordable when time series are kept
    s.compute_purity = plan.want_timeseries;

    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid parameters: ") + e.what());
    }
    // step counts must land on exact integers
    const double steps = s.t_end / p.dt;
    if (std::abs(steps - std::lround(steps)) > 1e-6)
        throw ConfigError("t_end must be an integer multiple of dt");
    const double psteps = s.prep_time / p.dt;
    if (std::abs(psteps - std::lround(psteps)) > 1e-6)
        throw ConfigError("prep_time must be an integer multiple of dt");
    return plan;
}

}  // namespace qcavity
