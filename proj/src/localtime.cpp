#include "fbmdim/localtime.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fbmdim/quadrature.hpp"

namespace fbmdim {

LocalTimeGrid::LocalTimeGrid(std::vector<double> levels, std::vector<double> checkpoints, double bandwidth,
                             std::vector<double> values)
    : levels_(std::move(levels)), checkpoints_(std::move(checkpoints)), bandwidth_(bandwidth),
      values_(std::move(values)) {
    if (values_.size() != levels_.size() * checkpoints_.size()) {
        throw std::invalid_argument("local time grid: value count does not match levels x checkpoints");
    }
}

LocalTimeGrid occupation_localtime(const FbmPath& path, std::vector<double> levels, std::vector<double> checkpoints,
                                   double bandwidth) {
    if (levels.empty() || checkpoints.empty()) {
        throw std::invalid_argument("occupation_localtime: empty level or checkpoint list");
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("occupation_localtime: bandwidth must be positive");
    }
    if (!std::is_sorted(levels.begin(), levels.end()) || !std::is_sorted(checkpoints.begin(), checkpoints.end())) {
        throw std::invalid_argument("occupation_localtime: levels and checkpoints must be sorted");
    }
    if (checkpoints.front() < 0.0 || checkpoints.back() > path.horizon()) {
        throw std::invalid_argument("occupation_localtime: checkpoint outside [0, horizon]");
    }
    const std::size_t nl = levels.size();
    const std::size_t nc = checkpoints.size();
    std::vector<std::uint64_t> counts(nl, 0);
    std::vector<double> values(nl * nc, 0.0);
    const double scale = path.delta() / (2.0 * bandwidth);
    const auto samples = path.samples();
    std::size_t k = 0;
    auto snapshot = [&](std::size_t column) {
        for (std::size_t i = 0; i < nl; ++i) {
            values[i * nc + column] = static_cast<double>(counts[i]) * scale;
        }
    };
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double t = path.time(j);
        while (k < nc && t > checkpoints[k]) {
            snapshot(k++);
        }
        if (k == nc) {
            break;
        }
        const double b = samples[j];
        const auto lo = std::lower_bound(levels.begin(), levels.end(), b - bandwidth);
        const auto hi = std::upper_bound(lo, levels.end(), b + bandwidth);
        for (auto it = lo; it != hi; ++it) {
            ++counts[static_cast<std::size_t>(it - levels.begin())];
        }
    }
    while (k < nc) {
        snapshot(k++);
    }
    return LocalTimeGrid(std::move(levels), std::move(checkpoints), bandwidth, std::move(values));
}

double expected_localtime_increment(double x, double s, double t, HurstIndex h, double tolerance) {
    if (!(s > 0.0)) {
        throw std::invalid_argument("expected_localtime_increment: s must be positive");
    }
    if (!(t > s)) {
        throw std::invalid_argument("expected_localtime_increment: t must exceed s");
    }
    const double hv = h.value();
    auto integrand = [x, hv](double u) {
        const double spread = std::pow(u, hv);
        const double z = x / spread;
        return std::exp(-0.5 * z * z) / spread;
    };
    const auto result = quadrature::integrate(integrand, s, t, tolerance * std::sqrt(2.0 * std::numbers::pi));
    return result.value / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<std::int64_t> level_crossing_cells(std::span<const double> samples, int resolution_exponent, double x,
                                               double bandwidth) {
    std::vector<std::int64_t> cells;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double d = samples[j] - x;
        bool hit = std::abs(d) <= bandwidth;
        if (!hit && j + 1 < samples.size()) {
            const double next = samples[j + 1] - x;
            hit = (d < 0.0 && next > 0.0) || (d > 0.0 && next < 0.0);
        }
        if (hit) {
            const auto cell = static_cast<std::int64_t>(j >> resolution_exponent);
            if (cells.empty() || cells.back() != cell) {
                cells.push_back(cell);
            }
        }
    }
    return cells;
}

LevelSetRecord level_set_extract(const FbmPath& path, double x, double bandwidth) {
    LevelSetRecord record;
    record.x = x;
    record.bandwidth = bandwidth;
    record.horizon_exponent = path.horizon_exponent();
    record.resolution_exponent = path.resolution_exponent();
    const int n_max = path.horizon_exponent();
    std::vector<std::vector<std::int64_t>> per(static_cast<std::size_t>(n_max) + 1);
    for (std::int64_t cell : level_crossing_cells(path.samples(), path.resolution_exponent(), x, bandwidth)) {
        const auto n = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(cell)));
        if (n < per.size()) {
            per[n].push_back(cell);
        }
    }
    record.annuli.reserve(per.size());
    for (std::size_t n = 0; n < per.size(); ++n) {
        record.annuli.emplace_back(static_cast<int>(n), std::move(per[n]));
    }
    return record;
}

PartialSumSeries partial_sum_series(const FbmPath& path, double x, double relative_bandwidth) {
    if (!(relative_bandwidth > 0.0)) {
        throw std::invalid_argument("partial_sum_series: relative bandwidth must be positive");
    }
    PartialSumSeries series;
    series.x = x;
    series.h = path.hurst();
    series.relative_bandwidth = relative_bandwidth;
    const double hv = path.hurst().value();
    const auto samples = path.samples();
    const int r = path.resolution_exponent();
    double total = 0.0;
    for (int n = 1; n <= path.horizon_exponent(); ++n) {
        const double amplitude = std::exp2(n * hv);
        const double level = x * amplitude;
        const double bw = relative_bandwidth * amplitude;
        // samples with j Delta in (2^(n-1), 2^n]
        const std::size_t first = (std::size_t{1} << (n - 1 + r)) + 1;
        const std::size_t last = std::size_t{1} << (n + r);
        std::uint64_t count = 0;
        for (std::size_t j = first; j <= last; ++j) {
            count += std::abs(samples[j] - level) <= bw ? 1U : 0U;
        }
        const double increment = static_cast<double>(count) * path.delta() / (2.0 * bw);
        const double y = increment / std::exp2(n * (1.0 - hv));
        series.terms.push_back(y);
        total += y;
        series.partial_sums.push_back(total);
    }
    return series;
}

double xiao_modulus_stat(const FbmPath& path, int n, const XiaoProbe& probe) {
    if (n < 1 || n > path.horizon_exponent()) {
        throw std::invalid_argument("xiao_modulus_stat: n must lie in 1 .. N");
    }
    if (probe.time_points == 0 || probe.lag_count == 0 || probe.level_count < 2 || !(probe.relative_bandwidth > 0.0)) {
        throw std::invalid_argument("xiao_modulus_stat: invalid probe grid");
    }
    const double hv = path.hurst().value();
    const int r = path.resolution_exponent();
    const auto samples = path.samples();
    const std::size_t horizon_index = std::size_t{1} << (n + r);
    const std::size_t reach = std::min(samples.size() - 1, horizon_index + (horizon_index >> 1));

    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.begin() + horizon_index + 1);
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double bw = probe.relative_bandwidth * std::exp2(n * hv);
    const double scale = path.delta() / (2.0 * bw);

    std::vector<double> levels(probe.level_count);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        levels[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(probe.level_count - 1);
    }

    // Prefix occupation counts per level: prefix[i][j] = #{j' < j : |B_j' - x_i| <= bw}.
    const std::size_t width = reach + 2;
    std::vector<std::uint32_t> prefix(levels.size() * width, 0);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::uint32_t* row = prefix.data() + i * width;
        for (std::size_t j = 0; j <= reach; ++j) {
            row[j + 1] = row[j] + (std::abs(samples[j] - levels[i]) <= bw ? 1U : 0U);
        }
    }

    double best = 0.0;
    for (std::size_t k = 0; k < probe.lag_count; ++k) {
        const int lag_exp = n - 1 - static_cast<int>(k);
        if (lag_exp + r < 0) {
            break;
        }
        const std::size_t lag = std::size_t{1} << (lag_exp + r);
        const double h = std::ldexp(1.0, lag_exp);
        const double norm = std::pow(h, 1.0 - hv) * std::pow(static_cast<double>(n - lag_exp), hv);
        for (std::size_t ti = 0; ti < probe.time_points; ++ti) {
            const double t = std::ldexp(static_cast<double>(ti), n) / static_cast<double>(probe.time_points);
            const auto start = static_cast<std::size_t>(std::floor(t / path.delta()));
            if (start + lag > reach) {
                continue;
            }
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const std::uint32_t* row = prefix.data() + i * width;
                // samples in (t, t + h]
                const double increment = static_cast<double>(row[start + lag + 1] - row[start + 1]) * scale;
                best = std::max(best, increment / norm);
            }
        }
    }
    return best;
}

} // namespace fbmdim
