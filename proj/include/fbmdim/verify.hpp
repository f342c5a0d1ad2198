#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmdim/experiment.hpp"
#include "fbmdim/macrodim.hpp"

namespace fbmdim {

/// One comparison: |observed - expected| <= tolerance, or observed <= expected
/// + tolerance for one-sided checks.
struct Check {
    std::string label;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool one_sided = false;
    bool passed = false;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    std::vector<Check> checks;
    double seconds = 0.0;

    bool passed() const noexcept;
    /// "PASS criterion 3 (name): ..." with the worst check.
    std::string line() const;
};

struct VerifyOptions {
    /// Multiplies every tolerance; 0 demands exact agreement.
    double tolerance_scale = 1.0;
    std::uint64_t base_seed = 1;
    unsigned threads = 0;
    std::size_t dimension_replicas = 200;
    /// When set, each experiment's artifacts go to a subdirectory.
    std::filesystem::path output_dir;
};

/// Desk-scale configurations used by the suite.
ExperimentConfig sojourn_suite_config(const VerifyOptions& options);
ExperimentConfig level_set_suite_config(const VerifyOptions& options);
ExperimentConfig lemkey_suite_config(const VerifyOptions& options);
ExperimentConfig moments_suite_config(const VerifyOptions& options);
ExperimentConfig localtime_suite_config(const VerifyOptions& options);

struct AlphaGridCase {
    double alpha = 0.0;
    DimensionEstimate den_pix;
    DimensionEstimate dim_h;
};

/// Shared outputs of the dimension criteria.
struct DimensionRuns {
    RunRecord sojourn;
    RunRecord level_set;
    std::vector<AlphaGridCase> alpha_grid;
};

/// Runs the sojourn and level-set suites (each optional) and the alpha grids.
DimensionRuns run_dimension_experiments(const VerifyOptions& options, bool sojourn = true, bool level_set = true);

CriterionResult verify_nu_oracle(const VerifyOptions& options);
CriterionResult verify_generator(const VerifyOptions& options);
CriterionResult verify_theorem1(const DimensionRuns& runs, const VerifyOptions& options);
CriterionResult verify_theorem2(const DimensionRuns& runs, const VerifyOptions& options);
CriterionResult verify_theorem3(const DimensionRuns& runs, const VerifyOptions& options);
CriterionResult verify_alpha_grid(const DimensionRuns& runs, const VerifyOptions& options);
CriterionResult verify_lemkey(const VerifyOptions& options);
CriterionResult verify_moments(const VerifyOptions& options);
CriterionResult verify_localtime(const VerifyOptions& options);
CriterionResult verify_analytic(const VerifyOptions& options);
CriterionResult verify_inequalities(const DimensionRuns& runs, const VerifyOptions& options);

/// Runs criteria 1 .. 11 in id order (or only the ids in `only`), reporting
/// each as it completes.
std::vector<CriterionResult> run_verify_suite(const VerifyOptions& options,
                                              const std::function<void(const CriterionResult&)>& on_result = {},
                                              const std::vector<int>& only = {});

nlohmann::json to_json(const std::vector<CriterionResult>& results);

} // namespace fbmdim
