#include "fbmdim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "fbmdim/fbm.hpp"
#include "fbmdim/localtime.hpp"
#include "fbmdim/parallel.hpp"
#include "fbmdim/rng.hpp"
#include "fbmdim/stats.hpp"

namespace fbmdim {

namespace {

constexpr double kHurst = 0.43;
constexpr double kGamma = 0.22;

Check two_sided(std::string label, double observed, double expected, double tolerance, const VerifyOptions& o) {
    const double tol = tolerance * o.tolerance_scale;
    return {std::move(label), observed, expected, tol, false, std::abs(observed - expected) <= tol};
}

Check one_sided(std::string label, double observed, double bound, double tolerance, const VerifyOptions& o) {
    const double tol = tolerance * o.tolerance_scale;
    return {std::move(label), observed, bound, tol, true, observed <= bound + tol};
}

template <class F>
CriterionResult timed(int id, std::string name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    result.id = id;
    result.name = std::move(name);
    result.checks = body();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

ExperimentConfig base_config(const VerifyOptions& o, ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    c.h = HurstIndex(kHurst);
    c.base_seed = o.base_seed;
    c.threads = o.threads;
    return c;
}

RunRecord run_and_save(const ExperimentConfig& config, const VerifyOptions& o) {
    RunRecord record = run_experiment(config);
    if (!o.output_dir.empty()) {
        write_artifacts(record, o.output_dir / to_string(config.experiment));
    }
    return record;
}

std::string format(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

} // namespace

bool CriterionResult::passed() const noexcept {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string CriterionResult::line() const {
    std::ostringstream out;
    out << (passed() ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): ";
    // Report the first failing check, else the one closest to its limit.
    const Check* shown = nullptr;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
        if (!c.passed) {
            shown = &c;
            break;
        }
        const double slack = c.one_sided ? (c.observed - c.expected) : std::abs(c.observed - c.expected);
        const double ratio = c.tolerance > 0.0 ? slack / c.tolerance : (slack > 0.0 ? 1.0 : 0.0);
        if (ratio > worst) {
            worst = ratio;
            shown = &c;
        }
    }
    if (shown != nullptr) {
        out << shown->label << " observed " << format(shown->observed) << (shown->one_sided ? " <= " : " vs ")
            << format(shown->expected) << (shown->one_sided ? " + " : " +- ") << format(shown->tolerance);
    }
    out << " [" << checks.size() << " checks, " << format(seconds) << " s]";
    return out.str();
}

ExperimentConfig sojourn_suite_config(const VerifyOptions& o) {
    ExperimentConfig c = base_config(o, ExperimentKind::theorem2);
    c.gamma = kGamma;
    c.horizon_exponent = 20;
    c.resolution_exponent = 0;
    c.replicas = o.dimension_replicas;
    c.fit_range = {10, 20};
    return c;
}

ExperimentConfig level_set_suite_config(const VerifyOptions& o) {
    ExperimentConfig c = sojourn_suite_config(o);
    c.experiment = ExperimentKind::theorem3;
    c.gamma.reset();
    c.level = 0.0;
    c.level_bandwidth = 0.0;
    return c;
}

ExperimentConfig lemkey_suite_config(const VerifyOptions& o) {
    ExperimentConfig c = base_config(o, ExperimentKind::lemkey);
    c.gammas = {0.0, kGamma};
    c.epsilon_exponents = {4, 5, 6, 7, 8, 9, 10};
    c.fine_resolution = 12;
    c.replicas = 10000;
    return c;
}

ExperimentConfig moments_suite_config(const VerifyOptions& o) {
    ExperimentConfig c = base_config(o, ExperimentKind::moments);
    c.gamma = kGamma;
    c.horizon_exponent = 18;
    c.resolution_exponent = 2;
    c.replicas = 200;
    c.fit_range = {8, 18};
    return c;
}

ExperimentConfig localtime_suite_config(const VerifyOptions& o) {
    ExperimentConfig c = base_config(o, ExperimentKind::localtime_series);
    c.h = HurstIndex(0.5);
    c.level = 0.0;
    c.horizon_exponent = 16;
    c.resolution_exponent = 2;
    c.replicas = 100;
    c.fit_range = {6, 16};
    return c;
}

DimensionRuns run_dimension_experiments(const VerifyOptions& o, bool sojourn, bool level_set) {
    DimensionRuns runs;
    if (sojourn) {
        runs.sojourn = run_and_save(sojourn_suite_config(o), o);
    }
    if (level_set) {
        runs.level_set = run_and_save(level_set_suite_config(o), o);
    }
    const auto grid = make_rho_grid(0.05);
    for (double alpha : {0.3, 0.6}) {
        const auto sets = alpha_grid_set(alpha, 20);
        runs.alpha_grid.push_back(
            {alpha, den_pix_estimate(cell_counts(sets), {10, 20}), dimh_estimate(sets, grid, {10, 20})});
    }
    return runs;
}

CriterionResult verify_nu_oracle(const VerifyOptions& o) {
    return timed(1, "nu_exact matches exhaustive covers", [&] {
        CounterRng rng = CounterRng(o.base_seed).split(1);
        double worst = 0.0;
        for (int instance = 0; instance < 1000; ++instance) {
            const auto m = static_cast<std::size_t>(1 + rng() % 12);
            int n_min = 1;
            while ((std::size_t{1} << (n_min - 1)) < m) {
                ++n_min;
            }
            const int n = n_min + static_cast<int>(rng() % static_cast<std::uint64_t>(10 - n_min + 1));
            const std::int64_t lower = std::int64_t{1} << (n - 1);
            std::vector<std::int64_t> cells;
            while (cells.size() < m) {
                const std::int64_t c = lower + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(lower));
                if (std::find(cells.begin(), cells.end(), c) == cells.end()) {
                    cells.push_back(c);
                }
            }
            std::sort(cells.begin(), cells.end());
            const AnnulusCellSet set(n, cells);
            const double rho = rng.uniform();
            const NuVariant variant = instance % 2 == 0 ? NuVariant::plain : NuVariant::log_weighted;
            const double exact = nu_exact(set, rho, variant).value;
            const double brute = nu_bruteforce(set, rho, variant).value;
            worst = std::max(worst, std::abs(exact - brute));
        }
        return std::vector<Check>{one_sided("max |nu_exact - nu_bruteforce|", worst, 0.0, 1e-12, o)};
    });
}

CriterionResult verify_generator(const VerifyOptions& o) {
    return timed(2, "fGn autocovariance and Gaussian marginals", [&] {
        constexpr std::size_t kReplicas = 10000;
        constexpr std::size_t kLength = 1024;
        constexpr std::size_t kMaxLag = 32;
        std::vector<Check> checks;
        for (double hv : {0.25, 0.5, 0.75}) {
            const HurstIndex h(hv);
            const CirculantFgn gen(h, kLength);
            // per-replica lag products averaged along the series
            std::vector<stats::RunningMoments> lag(kMaxLag + 1);
            std::vector<double> firsts;
            std::vector<double> x(kLength);
            for (std::size_t i = 0; i < kReplicas; ++i) {
                CounterRng rng(o.base_seed + i);
                gen.sample(rng, x);
                for (std::size_t k = 0; k <= kMaxLag; ++k) {
                    double s = 0.0;
                    for (std::size_t j = 0; j + k < kLength; ++j) {
                        s += x[j] * x[j + k];
                    }
                    lag[k].add(s / static_cast<double>(kLength - k));
                }
                firsts.push_back(x[0]);
            }
            for (std::size_t k = 0; k <= kMaxLag; ++k) {
                const auto s = lag[k].summary();
                checks.push_back(two_sided("H=" + format(hv) + " lag " + std::to_string(k), s.mean,
                                           fgn_autocov(k, h), 5.0 * s.stderr_mean, o));
            }
            if (hv == 0.5) {
                const auto ks = stats::ks_test_standard_normal(firsts);
                // p-value must not fall below 0.01
                checks.push_back(one_sided("H=0.5 KS p-value (negated)", -ks.p_value, -0.01, 0.0, o));
            }
        }
        return checks;
    });
}

CriterionResult verify_theorem1(const DimensionRuns& runs, const VerifyOptions& o) {
    return timed(3, "sojourn densities", [&] {
        const double target = kGamma + 1.0 - kHurst;
        return std::vector<Check>{
            two_sided("den_pix E_gamma", runs.sojourn.aggregate("den_pix").value, target, 0.10, o),
            two_sided("den_log E_gamma", runs.sojourn.aggregate("den_log").value, target, 0.10, o)};
    });
}

CriterionResult verify_theorem2(const DimensionRuns& runs, const VerifyOptions& o) {
    return timed(4, "sojourn macroscopic Hausdorff dimension", [&] {
        return std::vector<Check>{
            two_sided("dim_h E_gamma", runs.sojourn.aggregate("dim_h").value, 1.0 - kHurst, 0.10, o),
            two_sided("den_pix - dim_h", runs.sojourn.aggregate("gap").value, kGamma, 0.10, o)};
    });
}

CriterionResult verify_theorem3(const DimensionRuns& runs, const VerifyOptions& o) {
    return timed(5, "level set macroscopic Hausdorff dimension", [&] {
        return std::vector<Check>{
            two_sided("dim_h L_0", runs.level_set.aggregate("dim_h").value, 1.0 - kHurst, 0.10, o)};
    });
}

CriterionResult verify_alpha_grid(const DimensionRuns& runs, const VerifyOptions& o) {
    return timed(6, "alpha-grid calibration", [&] {
        std::vector<Check> checks;
        for (const auto& c : runs.alpha_grid) {
            checks.push_back(two_sided("alpha=" + format(c.alpha) + " den_pix", c.den_pix.point, c.alpha, 0.05, o));
            checks.push_back(two_sided("alpha=" + format(c.alpha) + " dim_h", c.dim_h.point, c.alpha, 0.05, o));
        }
        return checks;
    });
}

CriterionResult verify_lemkey(const VerifyOptions& o) {
    return timed(7, "boundary hitting bound", [&] {
        const ExperimentConfig config = lemkey_suite_config(o);
        const RunRecord record = run_and_save(config, o);
        std::vector<Check> checks;
        for (auto side : {WindowSide::before, WindowSide::after}) {
            for (double g : config.gammas) {
                for (int k : config.epsilon_exponents) {
                    std::ostringstream key;
                    key << "A_" << to_string(side) << "_gamma" << g << "_eps2^-" << k;
                    const Aggregate& a = record.aggregate(key.str());
                    const double bound = 3.0 * std::pow(std::ldexp(1.0, -k), kHurst - g);
                    checks.push_back(one_sided(key.str(), a.value, bound, 3.0 * a.stderr_value, o));
                }
            }
        }
        return checks;
    });
}

CriterionResult verify_moments(const VerifyOptions& o) {
    return timed(8, "sojourn moment exponents", [&] {
        const RunRecord record = run_and_save(moments_suite_config(o), o);
        const double target = kGamma + 1.0 - kHurst;
        return std::vector<Check>{
            two_sided("first moment exponent", record.aggregate("first_moment_exponent").value, target, 0.05, o),
            one_sided("second moment exponent", record.aggregate("second_moment_exponent").value, 2.0 * target,
                      0.10, o)};
    });
}

CriterionResult verify_localtime(const VerifyOptions& o) {
    return timed(9, "local time partial sums", [&] {
        const RunRecord record = run_and_save(localtime_suite_config(o), o);
        const Aggregate& y = record.aggregate("Y_mean");
        const Aggregate& slope = record.aggregate("F_slope");
        return std::vector<Check>{
            two_sided("mean Y", y.value, record.aggregate("Y_expected").value, 5.0 * y.stderr_value, o),
            // slope - 3 SE > 0
            one_sided("F slope margin (negated)", -(slope.value - 3.0 * slope.stderr_value), 0.0, 0.0, o)};
    });
}

CriterionResult verify_analytic(const VerifyOptions& o) {
    return timed(10, "analytic identities", [&] {
        std::vector<Check> checks;
        checks.push_back(
            two_sided("compute_I(0.5)", compute_I(HurstIndex(0.5), 1e-9), 2.0 * std::numbers::pi, 1e-4, o));
        std::vector<double> grid;
        for (int i = 0; i < 16; ++i) {
            grid.push_back(std::exp2(-4.0 + 0.6 * i));
        }
        for (double hv : {0.25, 0.43, 0.5, 0.75, 0.9}) {
            checks.push_back(one_sided("time inversion H=" + format(hv),
                                       time_inversion_covariance_residual(HurstIndex(hv), grid), 0.0, 1e-10, o));
        }
        return checks;
    });
}

CriterionResult verify_inequalities(const DimensionRuns& runs, const VerifyOptions& o) {
    return timed(11, "dimension inequalities", [&] {
        std::vector<Check> checks;
        auto add = [&](const std::string& what, double den_log, double den_pix, double dim_h) {
            checks.push_back(one_sided(what + " dim_h <= den_pix", dim_h, den_pix, kInequalityTolerance, o));
            checks.push_back(one_sided(what + " den_log <= den_pix", den_log, den_pix, kInequalityTolerance, o));
        };
        add("E_gamma", runs.sojourn.aggregate("den_log").value, runs.sojourn.aggregate("den_pix").value,
            runs.sojourn.aggregate("dim_h").value);
        const double level_pix = runs.level_set.aggregate("den_pix").value;
        checks.push_back(one_sided("L_0 dim_h <= den_pix", runs.level_set.aggregate("dim_h").value, level_pix,
                                   kInequalityTolerance, o));
        for (const auto& c : runs.alpha_grid) {
            // unit cells: the Lebesgue and pixel counts coincide
            add("alpha=" + format(c.alpha), c.den_pix.point, c.den_pix.point, c.dim_h.point);
        }
        return checks;
    });
}

std::vector<CriterionResult> run_verify_suite(const VerifyOptions& o,
                                              const std::function<void(const CriterionResult&)>& on_result,
                                              const std::vector<int>& only) {
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    std::vector<CriterionResult> results;
    std::optional<DimensionRuns> runs;
    auto dimension_runs = [&]() -> const DimensionRuns& {
        if (!runs) {
            runs = run_dimension_experiments(o, wanted(3) || wanted(4) || wanted(11), wanted(5) || wanted(11));
        }
        return *runs;
    };
    auto report = [&](CriterionResult r) {
        if (on_result) {
            on_result(r);
        }
        results.push_back(std::move(r));
    };
    if (wanted(1)) {
        report(verify_nu_oracle(o));
    }
    if (wanted(2)) {
        report(verify_generator(o));
    }
    if (wanted(3)) {
        report(verify_theorem1(dimension_runs(), o));
    }
    if (wanted(4)) {
        report(verify_theorem2(dimension_runs(), o));
    }
    if (wanted(5)) {
        report(verify_theorem3(dimension_runs(), o));
    }
    if (wanted(6)) {
        report(verify_alpha_grid(dimension_runs(), o));
    }
    if (wanted(7)) {
        report(verify_lemkey(o));
    }
    if (wanted(8)) {
        report(verify_moments(o));
    }
    if (wanted(9)) {
        report(verify_localtime(o));
    }
    if (wanted(10)) {
        report(verify_analytic(o));
    }
    if (wanted(11)) {
        report(verify_inequalities(dimension_runs(), o));
    }
    return results;
}

nlohmann::json to_json(const std::vector<CriterionResult>& results) {
    auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json out;
    nlohmann::json list = nlohmann::json::array();
    bool all = true;
    for (const auto& r : results) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : r.checks) {
            checks.push_back({{"label", c.label},
                              {"observed", number(c.observed)},
                              {"expected", number(c.expected)},
                              {"tolerance", number(c.tolerance)},
                              {"one_sided", c.one_sided},
                              {"passed", c.passed}});
        }
        list.push_back({{"id", r.id},
                        {"name", r.name},
                        {"passed", r.passed()},
                        {"seconds", r.seconds},
                        {"checks", checks}});
        all = all && r.passed();
    }
    out["criteria"] = list;
    out["passed"] = all;
    return out;
}

} // namespace fbmdim
