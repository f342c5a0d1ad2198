#include "fbmdim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fbmdim/errors.hpp"
#include "fbmdim/sojourn.hpp"

namespace fbmdim {

namespace {

constexpr int kMaxLog2Samples = 26;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError("config key '" + key + "': cannot read '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) {
            bad_value(key, value, "a finite number");
        }
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, value, "a finite number");
    }
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
    Int out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        bad_value(key, value, "an integer");
    }
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

} // namespace

const char* to_string(ExperimentKind kind) noexcept {
    switch (kind) {
    case ExperimentKind::theorem1:
        return "theorem1";
    case ExperimentKind::theorem2:
        return "theorem2";
    case ExperimentKind::theorem3:
        return "theorem3";
    case ExperimentKind::lemkey:
        return "lemkey";
    case ExperimentKind::moments:
        return "moments";
    case ExperimentKind::localtime_series:
        return "localtime_series";
    case ExperimentKind::figure1:
        return "figure1";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
    for (auto kind : {ExperimentKind::theorem1, ExperimentKind::theorem2, ExperimentKind::theorem3,
                      ExperimentKind::lemkey, ExperimentKind::moments, ExperimentKind::localtime_series,
                      ExperimentKind::figure1}) {
        if (text == to_string(kind)) {
            return kind;
        }
    }
    throw ConfigError("unknown experiment '" + text + "'");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "experiment",       "h",         "gamma",          "horizon_exponent", "resolution_exponent",
        "replicas",         "rho_step",  "fit_min",        "fit_max",          "base_seed",
        "output_dir",       "generator", "variant",        "level",            "level_bandwidth",
        "relative_bandwidth", "epsilon_exponents", "gammas", "fine_resolution", "threads"};
    return keys;
}

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "experiment") {
        c.experiment = parse_experiment_kind(value);
    } else if (key == "h") {
        const double h = to_double(key, value);
        if (!(h > 0.0 && h < 1.0)) {
            throw ConfigError("h must lie in (0, 1), got " + value);
        }
        c.h = HurstIndex(h);
    } else if (key == "gamma") {
        if (value == "none" || value.empty()) {
            c.gamma.reset();
        } else {
            c.gamma = to_double(key, value);
        }
    } else if (key == "horizon_exponent") {
        c.horizon_exponent = to_int<int>(key, value);
    } else if (key == "resolution_exponent") {
        c.resolution_exponent = to_int<int>(key, value);
    } else if (key == "replicas") {
        c.replicas = to_int<std::size_t>(key, value);
    } else if (key == "rho_step") {
        c.rho_step = to_double(key, value);
    } else if (key == "fit_min") {
        c.fit_range.n_min = to_int<int>(key, value);
    } else if (key == "fit_max") {
        c.fit_range.n_max = to_int<int>(key, value);
    } else if (key == "base_seed") {
        c.base_seed = to_int<std::uint64_t>(key, value);
    } else if (key == "output_dir") {
        c.output_dir = value;
    } else if (key == "generator") {
        if (value == "circulant_embedding") {
            c.generator = GeneratorId::circulant_embedding;
        } else if (value == "cholesky") {
            c.generator = GeneratorId::cholesky;
        } else {
            throw ConfigError("generator must be circulant_embedding or cholesky, got '" + value + "'");
        }
    } else if (key == "variant") {
        if (value == "plain") {
            c.variant = NuVariant::plain;
        } else if (value == "log_weighted") {
            c.variant = NuVariant::log_weighted;
        } else {
            throw ConfigError("variant must be plain or log_weighted, got '" + value + "'");
        }
    } else if (key == "level") {
        c.level = to_double(key, value);
    } else if (key == "level_bandwidth") {
        c.level_bandwidth = to_double(key, value);
    } else if (key == "relative_bandwidth") {
        c.relative_bandwidth = to_double(key, value);
    } else if (key == "epsilon_exponents") {
        c.epsilon_exponents.clear();
        for (const auto& item : split_list(value)) {
            c.epsilon_exponents.push_back(to_int<int>(key, item));
        }
    } else if (key == "gammas") {
        c.gammas.clear();
        for (const auto& item : split_list(value)) {
            c.gammas.push_back(to_double(key, item));
        }
    } else if (key == "fine_resolution") {
        c.fine_resolution = to_int<int>(key, value);
    } else if (key == "threads") {
        c.threads = to_int<unsigned>(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void ExperimentConfig::validate() const {
    const bool needs_gamma = experiment == ExperimentKind::theorem1 || experiment == ExperimentKind::theorem2 ||
                             experiment == ExperimentKind::figure1 || experiment == ExperimentKind::moments;
    if (needs_gamma && !gamma) {
        throw ConfigError(std::string("experiment ") + to_string(experiment) + " requires gamma");
    }
    auto check_gamma = [this](double g) {
        if (!(g >= 0.0 && g < h.value())) {
            std::ostringstream msg;
            msg << "gamma must satisfy 0 <= gamma < h = " << h.value() << ", got " << g;
            throw ConfigError(msg.str());
        }
    };
    if (gamma) {
        check_gamma(*gamma);
    }
    for (double g : gammas) {
        check_gamma(g);
    }
    if (experiment == ExperimentKind::lemkey) {
        if (!gamma && gammas.empty()) {
            throw ConfigError("lemkey requires gamma or gammas");
        }
        if (epsilon_exponents.empty()) {
            throw ConfigError("lemkey requires at least one epsilon exponent");
        }
        for (int k : epsilon_exponents) {
            if (k < 2 || k > 30) {
                throw ConfigError("epsilon exponents must lie in 2 .. 30");
            }
        }
        if (fine_resolution < 1 || fine_resolution > 16) {
            throw ConfigError("fine_resolution must lie in 1 .. 16");
        }
        if (replicas < kMinHitReplicas) {
            throw ConfigError("lemkey needs at least 100 replicas");
        }
    }
    if (horizon_exponent < 1 || resolution_exponent < 0) {
        throw ConfigError("horizon_exponent must be >= 1 and resolution_exponent >= 0");
    }
    if (horizon_exponent + resolution_exponent > kMaxLog2Samples) {
        std::ostringstream msg;
        msg << "a path of 2^" << horizon_exponent + resolution_exponent
            << " samples exceeds the 2^26 limit; lower horizon_exponent or resolution_exponent";
        throw ResourceError(msg.str());
    }
    if (replicas == 0) {
        throw ConfigError("replicas must be positive");
    }
    if (!(rho_step > 0.0 && rho_step <= 0.05)) {
        throw ConfigError("rho_step must lie in (0, 0.05]");
    }
    const bool uses_fit = experiment != ExperimentKind::lemkey && experiment != ExperimentKind::figure1;
    if (uses_fit && (fit_range.n_min < 1 || fit_range.n_max > horizon_exponent || fit_range.count() < 4)) {
        std::ostringstream msg;
        msg << "fit range [" << fit_range.n_min << ", " << fit_range.n_max << "] must lie in 1 .. "
            << horizon_exponent << " and span at least 4 annuli";
        throw ConfigError(msg.str());
    }
    if ((experiment == ExperimentKind::theorem2 || experiment == ExperimentKind::theorem3) && fit_range.count() < 5) {
        throw ConfigError("dim_h needs a fit range of at least 5 annuli");
    }
    if (level_bandwidth < 0.0) {
        throw ConfigError("level_bandwidth must be non-negative");
    }
    if (!(relative_bandwidth > 0.0)) {
        throw ConfigError("relative_bandwidth must be positive");
    }
    if (generator == GeneratorId::external) {
        throw ConfigError("generator must be circulant_embedding or cholesky");
    }
    if (generator == GeneratorId::cholesky &&
        (std::size_t{1} << (horizon_exponent + resolution_exponent)) > kMaxCholeskyLength) {
        throw ConfigError("the cholesky generator is limited to 2^13 increments");
    }
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "experiment = " << to_string(experiment) << '\n';
    out << "h = " << format_double(h.value()) << '\n';
    out << "gamma = " << (gamma ? format_double(*gamma) : std::string("none")) << '\n';
    out << "horizon_exponent = " << horizon_exponent << '\n';
    out << "resolution_exponent = " << resolution_exponent << '\n';
    out << "replicas = " << replicas << '\n';
    out << "rho_step = " << format_double(rho_step) << '\n';
    out << "fit_min = " << fit_range.n_min << '\n';
    out << "fit_max = " << fit_range.n_max << '\n';
    out << "base_seed = " << base_seed << '\n';
    out << "output_dir = " << output_dir.string() << '\n';
    out << "generator = " << to_string(generator) << '\n';
    out << "variant = " << to_string(variant) << '\n';
    out << "level = " << format_double(level) << '\n';
    out << "level_bandwidth = " << format_double(level_bandwidth) << '\n';
    out << "relative_bandwidth = " << format_double(relative_bandwidth) << '\n';
    out << "epsilon_exponents = ";
    for (std::size_t i = 0; i < epsilon_exponents.size(); ++i) {
        out << (i ? "," : "") << epsilon_exponents[i];
    }
    out << '\n' << "gammas = ";
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        out << (i ? "," : "") << format_double(gammas[i]);
    }
    out << '\n' << "fine_resolution = " << fine_resolution << '\n';
    out << "threads = " << threads << '\n';
    return out.str();
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

std::string config_hash(const ExperimentConfig& config) {
    // output_dir and threads do not affect results
    ExperimentConfig canonical = config;
    canonical.output_dir.clear();
    canonical.threads = 0;
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical.to_text()) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

} // namespace fbmdim
