#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fbmdim/fbm.hpp"
#include "fbmdim/macrodim.hpp"

namespace fbmdim {

enum class ExperimentKind { theorem1, theorem2, theorem3, lemkey, moments, localtime_series, figure1 };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(const std::string& text);

/// Everything needed to reproduce one experiment.
///
/// Text form: one `key = value` per line, `#` starts a comment, list values
/// are comma separated. Keys are the field names below; unknown keys are
/// rejected.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::theorem1;
    HurstIndex h{0.43};
    std::optional<double> gamma;
    int horizon_exponent = 20;
    int resolution_exponent = 0;
    std::size_t replicas = 20;
    double rho_step = 0.05;
    FitRange fit_range{10, 20};
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir;

    GeneratorId generator = GeneratorId::circulant_embedding;
    NuVariant variant = NuVariant::plain;
    double level = 0.0;               // x for theorem3 and localtime_series
    double level_bandwidth = 0.0;     // absolute, theorem3
    double relative_bandwidth = 0.05; // localtime_series, scaled by 2^(nH)
    std::vector<int> epsilon_exponents{4, 5, 6, 7, 8, 9, 10}; // lemkey: eps = 2^-k
    std::vector<double> gammas;       // lemkey: extra gamma values
    int fine_resolution = 12;         // lemkey window steps 2^fine_resolution
    unsigned threads = 0;             // 0: hardware concurrency

    /// Throws ConfigError on inconsistent combinations and ResourceError when
    /// a path would exceed 2^26 samples.
    void validate() const;
    /// Canonical `key = value` text; parse_config(to_text()) round-trips.
    std::string to_text() const;
};

/// Overlays the keys found in `text` on `base`, then validates.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base = {});

/// Applies one key/value pair; throws ConfigError for unknown keys or bad values.
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Names accepted by apply_config_value.
const std::vector<std::string>& config_keys();

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

} // namespace fbmdim
