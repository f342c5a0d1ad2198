#include "fbmdim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fbmdim/errors.hpp"
#include "fbmdim/localtime.hpp"
#include "fbmdim/macrodim.hpp"
#include "fbmdim/parallel.hpp"
#include "fbmdim/stats.hpp"

namespace fbmdim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string cell(double v) {
    if (!std::isfinite(v)) {
        return "nan";
    }
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

template <class T>
std::string cell(T v) {
    return std::to_string(v);
}

unsigned thread_count(const ExperimentConfig& config) {
    return config.threads == 0 ? default_threads() : config.threads;
}

/// Mean and standard error of the finite entries.
Aggregate finite_summary(const std::vector<double>& values) {
    std::vector<double> finite;
    for (double v : values) {
        if (std::isfinite(v)) {
            finite.push_back(v);
        }
    }
    if (finite.empty()) {
        return {kNaN, kNaN};
    }
    const auto s = stats::summarize(finite);
    return {s.mean, finite.size() > 1 ? s.stderr_mean : kNaN};
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& rows) {
    std::vector<double> mean(rows.front().size(), 0.0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            mean[i] += row[i];
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(rows.size());
    }
    return mean;
}

template <class F>
double try_estimate(F&& f) {
    try {
        return f();
    } catch (const EstimationError&) {
        return kNaN;
    }
}

RunRecord start_record(const ExperimentConfig& config) {
    RunRecord record;
    record.experiment = config.experiment;
    record.config_hash = config_hash(config);
    record.config_text = config.to_text();
    record.started_at = utc_now();
    record.replicas.resize(config.replicas);
    for (std::size_t i = 0; i < config.replicas; ++i) {
        record.replicas[i].seed = config.base_seed + i;
    }
    return record;
}

Table nu_table(const NuAccumulator& nu, FitRange range) {
    Table t{{"rho", "n", "mean_nu"}, {}};
    for (std::size_t k = 0; k < nu.rho_grid().size(); ++k) {
        for (int n = range.n_min; n <= range.n_max; ++n) {
            t.rows.push_back({cell(nu.rho_grid()[k]), cell(n), cell(nu.mean_nu(k, n))});
        }
    }
    return t;
}

Table slope_table(const DimensionEstimate& est) {
    Table t{{"rho", "slope", "slope_stderr", "annuli_used"}, {}};
    for (const auto& p : est.slope_curve) {
        t.rows.push_back({cell(p.rho), cell(p.slope), cell(p.slope_stderr), cell(p.annuli_used)});
    }
    return t;
}

NuAccumulator merge_all(const std::vector<NuAccumulator>& parts) {
    NuAccumulator total = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        total.merge(parts[i]);
    }
    return total;
}

void add_dimension_checks(RunRecord& record, bool with_den_log) {
    const double den_pix = record.aggregate("den_pix").value;
    const double dim_h = record.aggregate("dim_h").value;
    const double den_log = with_den_log ? record.aggregate("den_log").value : den_pix;
    const auto report = dimension_inequality_check(den_log, den_pix, dim_h);
    record.checks["dimh_le_denpix"] = report.dimh_le_denpix;
    if (with_den_log) {
        record.checks["denlog_le_denpix"] = report.denlog_le_denpix;
    }
}

// theorem1 / theorem2: sojourn sets E_gamma
void run_sojourn(const ExperimentConfig& config, RunRecord& record) {
    const GammaExponent gamma(*config.gamma, config.h);
    const PathSynthesizer synth(config.h, config.horizon_exponent, config.resolution_exponent, config.generator);
    const auto grid = make_rho_grid(config.rho_step);
    const std::size_t reps = config.replicas;
    std::vector<std::vector<double>> leb(reps);
    std::vector<std::vector<double>> cells(reps);
    std::vector<NuAccumulator> nu(reps, NuAccumulator(grid, config.horizon_exponent, config.variant));
    std::vector<std::vector<std::vector<std::string>>> rows(reps);
    Table occupied;
    parallel_for(reps, thread_count(config), [&](std::size_t i) {
        const FbmPath path = synth(record.replicas[i].seed);
        const SojournRecord rec = extract_sojourn(path, gamma);
        if (i == 0) {
            occupied = occupied_cells_table(rec);
        }
        leb[i] = rec.leb_per_annulus();
        cells[i] = rec.cells_per_annulus();
        nu[i].add(cell_sets(rec));
        auto& est = record.replicas[i].estimates;
        est["den_log"] = try_estimate([&] { return den_log_estimate(leb[i], config.fit_range).point; });
        est["den_pix"] = try_estimate([&] { return den_pix_estimate(cells[i], config.fit_range).point; });
        est["dim_h"] = try_estimate([&] { return nu[i].estimate(config.fit_range).point; });
        for (const auto& a : rec.annuli) {
            rows[i].push_back({cell(i), cell(a.n), cell(a.occupied_cells.size()), cell(a.hit_count), cell(a.leb_approx)});
        }
    });

    auto spread = [&](const char* name) {
        std::vector<double> v;
        for (const auto& r : record.replicas) {
            v.push_back(r.estimates.at(name));
        }
        return finite_summary(v).stderr_value;
    };
    const auto den_log = den_log_estimate(column_mean(leb), config.fit_range);
    const auto den_pix = den_pix_estimate(column_mean(cells), config.fit_range);
    const NuAccumulator pooled = merge_all(nu);
    const auto dim_h = pooled.estimate(config.fit_range);
    record.aggregates["den_log"] = {den_log.point, spread("den_log")};
    record.aggregates["den_pix"] = {den_pix.point, spread("den_pix")};
    record.aggregates["dim_h"] = {dim_h.point, spread("dim_h")};
    record.aggregates["gap"] = {den_pix.point - dim_h.point, kNaN};
    record.aggregates["den_pix_ratio_max"] = {den_pix.ratio_max, kNaN};
    add_dimension_checks(record, true);

    Table cells_table{{"replica", "n", "occupied_cells", "hit_count", "leb_approx"}, {}};
    for (auto& r : rows) {
        for (auto& row : r) {
            cells_table.rows.push_back(std::move(row));
        }
    }
    record.tables["cells.csv"] = std::move(cells_table);
    record.tables["occupied.csv"] = std::move(occupied);
    record.tables["nu.csv"] = nu_table(pooled, config.fit_range);
    record.tables["slopes.csv"] = slope_table(dim_h);
}

// theorem3: level sets L_x
void run_level_set(const ExperimentConfig& config, RunRecord& record) {
    const PathSynthesizer synth(config.h, config.horizon_exponent, config.resolution_exponent, config.generator);
    const auto grid = make_rho_grid(config.rho_step);
    const std::size_t reps = config.replicas;
    std::vector<std::vector<double>> cells(reps);
    std::vector<NuAccumulator> nu(reps, NuAccumulator(grid, config.horizon_exponent, config.variant));
    parallel_for(reps, thread_count(config), [&](std::size_t i) {
        const FbmPath path = synth(record.replicas[i].seed);
        const LevelSetRecord rec = level_set_extract(path, config.level, config.level_bandwidth);
        const auto sets = cell_sets(rec);
        cells[i] = cell_counts(sets);
        nu[i].add(sets);
        auto& est = record.replicas[i].estimates;
        est["den_pix"] = try_estimate([&] { return den_pix_estimate(cells[i], config.fit_range).point; });
        est["dim_h"] = try_estimate([&] { return nu[i].estimate(config.fit_range).point; });
    });
    std::vector<double> den_pix_values;
    std::vector<double> dim_h_values;
    Table levels{{"replica", "n", "occupied_cells"}, {}};
    for (std::size_t i = 0; i < reps; ++i) {
        den_pix_values.push_back(record.replicas[i].estimates["den_pix"]);
        dim_h_values.push_back(record.replicas[i].estimates["dim_h"]);
        for (std::size_t n = 0; n < cells[i].size(); ++n) {
            levels.rows.push_back({cell(i), cell(n + 1), cell(static_cast<std::int64_t>(cells[i][n]))});
        }
    }
    const auto den_pix = den_pix_estimate(column_mean(cells), config.fit_range);
    const NuAccumulator pooled = merge_all(nu);
    const auto dim_h = pooled.estimate(config.fit_range);
    record.aggregates["den_pix"] = {den_pix.point, finite_summary(den_pix_values).stderr_value};
    record.aggregates["dim_h"] = {dim_h.point, finite_summary(dim_h_values).stderr_value};
    add_dimension_checks(record, false);
    record.tables["levels.csv"] = std::move(levels);
    record.tables["nu.csv"] = nu_table(pooled, config.fit_range);
    record.tables["slopes.csv"] = slope_table(dim_h);
}

std::string combo_key(WindowSide side, double gamma, int k) {
    std::ostringstream out;
    out << "A_" << to_string(side) << "_gamma" << gamma << "_eps2^-" << k;
    return out.str();
}

void run_lemkey(const ExperimentConfig& config, RunRecord& record) {
    std::vector<double> gammas;
    if (config.gamma) {
        gammas.push_back(*config.gamma);
    }
    for (double g : config.gammas) {
        if (std::find(gammas.begin(), gammas.end(), g) == gammas.end()) {
            gammas.push_back(g);
        }
    }
    struct Job {
        WindowSide side;
        int k;
    };
    std::vector<Job> jobs;
    for (auto side : {WindowSide::before, WindowSide::after}) {
        for (int k : config.epsilon_exponents) {
            jobs.push_back({side, k});
        }
    }
    std::vector<std::vector<HitProbability>> results(jobs.size());
    parallel_for(jobs.size(), thread_count(config), [&](std::size_t j) {
        results[j] = boundary_hit_probabilities(config.h, gammas, std::ldexp(1.0, -jobs[j].k), jobs[j].side,
                                                config.replicas, config.fine_resolution, config.base_seed);
    });
    Table table{{"side", "gamma", "epsilon", "threshold", "estimate", "stderr", "hits", "replicas", "bound"}, {}};
    bool within = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        for (const auto& p : results[j]) {
            const double bound = 3.0 * std::pow(p.epsilon, config.h.value() - p.gamma);
            table.rows.push_back({to_string(p.side), cell(p.gamma), cell(p.epsilon), cell(p.threshold),
                                  cell(p.estimate), cell(p.stderr_estimate), cell(p.hits), cell(p.replicas),
                                  cell(bound)});
            record.aggregates[combo_key(p.side, p.gamma, jobs[j].k)] = {p.estimate, p.stderr_estimate};
            within = within && p.estimate <= bound + 3.0 * p.stderr_estimate;
            worst = std::max(worst, p.estimate / bound);
        }
    }
    record.aggregates["max_estimate_over_bound"] = {worst, kNaN};
    record.checks["within_bound"] = within;
    record.tables["lemkey.csv"] = std::move(table);
}

void run_moments(const ExperimentConfig& config, RunRecord& record) {
    const GammaExponent gamma(*config.gamma, config.h);
    const PathSynthesizer synth(config.h, config.horizon_exponent, config.resolution_exponent, config.generator);
    const std::size_t reps = config.replicas;
    std::vector<std::vector<double>> profiles(reps);
    parallel_for(reps, thread_count(config), [&](std::size_t i) {
        profiles[i] = sojourn_profile(synth(record.replicas[i].seed), gamma);
        record.replicas[i].estimates["S_horizon"] = profiles[i].back();
    });
    const int n_max = config.horizon_exponent;
    std::vector<stats::RunningMoments> first(static_cast<std::size_t>(n_max) + 1);
    std::vector<stats::RunningMoments> second(first.size());
    for (const auto& p : profiles) {
        for (std::size_t n = 0; n < p.size(); ++n) {
            first[n].add(p[n]);
            second[n].add(p[n] * p[n]);
        }
    }
    Table table{{"n", "mean_S", "stderr_S", "mean_S2", "stderr_S2"}, {}};
    std::vector<double> xs;
    std::vector<double> y1;
    std::vector<double> y2;
    for (int n = 0; n <= n_max; ++n) {
        const auto s1 = first[static_cast<std::size_t>(n)].summary();
        const auto s2 = second[static_cast<std::size_t>(n)].summary();
        table.rows.push_back({cell(n), cell(s1.mean), cell(s1.stderr_mean), cell(s2.mean), cell(s2.stderr_mean)});
        if (n >= config.fit_range.n_min && n <= config.fit_range.n_max && s1.mean > 0.0) {
            xs.push_back(n);
            y1.push_back(std::log2(s1.mean));
            y2.push_back(std::log2(s2.mean));
        }
    }
    if (xs.size() < 3) {
        throw EstimationError("moments: the sojourn measure vanishes on the fit range");
    }
    const auto fit1 = stats::linear_fit(xs, y1);
    const auto fit2 = stats::linear_fit(xs, y2);
    record.aggregates["first_moment_exponent"] = {fit1.slope, fit1.slope_stderr};
    record.aggregates["second_moment_exponent"] = {fit2.slope, fit2.slope_stderr};
    record.tables["moments.csv"] = std::move(table);
}

void run_localtime_series(const ExperimentConfig& config, RunRecord& record) {
    const PathSynthesizer synth(config.h, config.horizon_exponent, config.resolution_exponent, config.generator);
    const std::size_t reps = config.replicas;
    std::vector<PartialSumSeries> series(reps);
    const FitRange range = config.fit_range;
    Table occupation;
    parallel_for(reps, thread_count(config), [&](std::size_t i) {
        const FbmPath path = synth(record.replicas[i].seed);
        series[i] = partial_sum_series(path, config.level, config.relative_bandwidth);
        if (i == 0) {
            // Levels k/8 2^(NH), k = -8..8, checkpoints 2^n, n = 0..N.
            const double amplitude = std::exp2(config.horizon_exponent * config.h.value());
            std::vector<double> levels;
            for (int k = -8; k <= 8; ++k) {
                levels.push_back(k * amplitude / 8.0);
            }
            std::vector<double> checkpoints;
            for (int n = 0; n <= config.horizon_exponent; ++n) {
                checkpoints.push_back(std::ldexp(1.0, n));
            }
            occupation = occupation_table(
                occupation_localtime(path, levels, checkpoints, config.relative_bandwidth * amplitude));
        }
        std::vector<double> xs;
        std::vector<double> fs;
        double y_sum = 0.0;
        for (int n = range.n_min; n <= range.n_max; ++n) {
            xs.push_back(n);
            fs.push_back(series[i].F(n));
            y_sum += series[i].Y(n);
        }
        auto& est = record.replicas[i].estimates;
        est["Y_mean"] = y_sum / range.count();
        est["F_slope"] = stats::linear_fit(xs, fs).slope;
        est["F_final"] = series[i].partial_sums.back();
    });
    std::vector<double> y_means;
    std::vector<double> slopes;
    for (const auto& r : record.replicas) {
        y_means.push_back(r.estimates.at("Y_mean"));
        slopes.push_back(r.estimates.at("F_slope"));
    }
    record.aggregates["Y_mean"] = finite_summary(y_means);
    record.aggregates["F_slope"] = finite_summary(slopes);
    record.aggregates["Y_expected"] = {expected_localtime_increment(config.level, 0.5, 1.0, config.h), kNaN};

    Table table{{"n", "Y_mean", "Y_stderr", "F_mean"}, {}};
    for (int n = 1; n <= config.horizon_exponent; ++n) {
        stats::RunningMoments y;
        stats::RunningMoments f;
        for (const auto& s : series) {
            y.add(s.Y(n));
            f.add(s.F(n));
        }
        const auto sy = y.summary();
        table.rows.push_back({cell(n), cell(sy.mean), cell(sy.stderr_mean), cell(f.mean())});
    }
    record.tables["series.csv"] = std::move(table);
    record.tables["occupation.csv"] = std::move(occupation);
}

void run_figure1(const ExperimentConfig& config, RunRecord& record) {
    const GammaExponent gamma(*config.gamma, config.h);
    const PathSynthesizer synth(config.h, config.horizon_exponent, config.resolution_exponent, config.generator);
    const std::size_t reps = config.replicas;
    std::vector<std::vector<double>> cells(reps);
    Table figure;
    parallel_for(reps, thread_count(config), [&](std::size_t i) {
        const SojournRecord rec = extract_sojourn(synth(record.replicas[i].seed), gamma);
        cells[i] = rec.cells_per_annulus();
        record.replicas[i].estimates["den_pix"] =
            try_estimate([&] { return den_pix_estimate(cells[i], config.fit_range).point; });
        if (i == 0) {
            figure = figure1_intervals(rec);
        }
    });
    record.aggregates["intervals"] = {static_cast<double>(figure.rows.size()), kNaN};
    record.aggregates["den_pix"] = {
        try_estimate([&] { return den_pix_estimate(column_mean(cells), config.fit_range).point; }), kNaN};
    record.tables["figure1.csv"] = std::move(figure);
}

} // namespace

void Table::write(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + file.string());
    }
    out << to_csv();
}

std::string Table::to_csv() const {
    std::ostringstream out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "," : "") << cells[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        line(row);
    }
    return out.str();
}

const Aggregate& RunRecord::aggregate(const std::string& name) const {
    const auto it = aggregates.find(name);
    if (it == aggregates.end()) {
        throw std::out_of_range("run record has no aggregate '" + name + "'");
    }
    return it->second;
}

nlohmann::json RunRecord::to_json() const {
    auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["format_version"] = format_version;
    j["experiment"] = to_string(experiment);
    j["config_hash"] = config_hash;
    nlohmann::json cfg = nlohmann::json::object();
    std::istringstream in(config_text);
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) {
            cfg[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    j["config"] = cfg;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : replicas) {
        nlohmann::json e = nlohmann::json::object();
        for (const auto& [name, value] : r.estimates) {
            e[name] = number(value);
        }
        reps.push_back({{"seed", r.seed}, {"estimates", e}});
    }
    j["replicas"] = reps;
    nlohmann::json agg = nlohmann::json::object();
    for (const auto& [name, a] : aggregates) {
        agg[name] = {{"value", number(a.value)}, {"stderr", number(a.stderr_value)}};
    }
    j["aggregates"] = agg;
    j["checks"] = checks;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j;
}

RunRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    RunRecord record = start_record(config);
    switch (config.experiment) {
    case ExperimentKind::theorem1:
    case ExperimentKind::theorem2:
        run_sojourn(config, record);
        break;
    case ExperimentKind::theorem3:
        run_level_set(config, record);
        break;
    case ExperimentKind::lemkey:
        run_lemkey(config, record);
        break;
    case ExperimentKind::moments:
        run_moments(config, record);
        break;
    case ExperimentKind::localtime_series:
        run_localtime_series(config, record);
        break;
    case ExperimentKind::figure1:
        run_figure1(config, record);
        break;
    }
    record.finished_at = utc_now();
    return record;
}

void write_artifacts(const RunRecord& record, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "run.json", std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + (dir / "run.json").string());
        }
        out << record.to_json().dump(2) << '\n';
    }
    for (const auto& [name, table] : record.tables) {
        table.write(dir / name);
    }
}

Table occupied_cells_table(const SojournRecord& record) {
    Table table{{"n", "cell"}, {}};
    for (const auto& a : record.annuli) {
        for (std::int64_t c : a.occupied_cells) {
            table.rows.push_back({cell(a.n), cell(c)});
        }
    }
    return table;
}

nlohmann::json sojourn_summary(const SojournRecord& record) {
    nlohmann::json annuli = nlohmann::json::array();
    for (const auto& a : record.annuli) {
        annuli.push_back({{"n", a.n},
                          {"hit_count", a.hit_count},
                          {"leb_approx", a.leb_approx},
                          {"occupied_cells", a.occupied_cells.size()}});
    }
    return {{"gamma", record.gamma.value()},
            {"h", record.gamma.hurst().value()},
            {"horizon_exponent", record.horizon_exponent},
            {"resolution_exponent", record.resolution_exponent},
            {"annuli", annuli}};
}

Table occupation_table(const LocalTimeGrid& grid) {
    Table table{{"x", "t", "L"}, {}};
    for (std::size_t i = 0; i < grid.levels().size(); ++i) {
        for (std::size_t k = 0; k < grid.checkpoints().size(); ++k) {
            table.rows.push_back({cell(grid.levels()[i]), cell(grid.checkpoints()[k]), cell(grid.at(i, k))});
        }
    }
    return table;
}

Table figure1_intervals(const SojournRecord& record) {
    Table table{{"start", "end"}, {}};
    std::int64_t start = -1;
    std::int64_t end = -1;
    for (const auto& a : record.annuli) {
        for (std::int64_t c : a.occupied_cells) {
            if (c == end) {
                ++end;
                continue;
            }
            if (start >= 0) {
                table.rows.push_back({cell(start), cell(end)});
            }
            start = c;
            end = c + 1;
        }
    }
    if (start >= 0) {
        table.rows.push_back({cell(start), cell(end)});
    }
    return table;
}

std::filesystem::path emit_figure1(const ExperimentConfig& config) {
    if (config.experiment != ExperimentKind::figure1) {
        throw ConfigError("emit_figure1 needs experiment = figure1");
    }
    const RunRecord record = run_experiment(config);
    const std::filesystem::path dir = config.output_dir.empty() ? std::filesystem::path(".") : config.output_dir;
    write_artifacts(record, dir);
    return dir / "figure1.csv";
}

} // namespace fbmdim
