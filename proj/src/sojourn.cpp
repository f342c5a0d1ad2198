#include "fbmdim/sojourn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbmdim/toeplitz.hpp"

namespace fbmdim {

GammaExponent::GammaExponent(double gamma, HurstIndex h) : gamma_(gamma), h_(h) {
    if (!(gamma >= 0.0 && gamma < h.value())) {
        std::ostringstream msg;
        msg << "gamma must satisfy 0 <= gamma < H (gamma=" << gamma << ", H=" << h.value() << ")";
        throw std::invalid_argument(msg.str());
    }
}

std::vector<double> SojournRecord::leb_per_annulus() const {
    std::vector<double> out;
    out.reserve(annuli.size());
    for (const auto& a : annuli) {
        out.push_back(a.leb_approx);
    }
    return out;
}

std::vector<double> SojournRecord::cells_per_annulus() const {
    std::vector<double> out;
    out.reserve(annuli.size());
    for (const auto& a : annuli) {
        out.push_back(static_cast<double>(a.occupied_cells.size()));
    }
    return out;
}

namespace {

void require_matching_hurst(const FbmPath& path, GammaExponent gamma) {
    if (!(path.hurst() == gamma.hurst())) {
        std::ostringstream msg;
        msg << "gamma was declared for H=" << gamma.hurst().value() << " but the path has H="
            << path.hurst().value();
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

SojournRecord extract_sojourn(const FbmPath& path, GammaExponent gamma) {
    require_matching_hurst(path, gamma);
    const int horizon = path.horizon_exponent();
    const int res = path.resolution_exponent();
    SojournRecord record{gamma, horizon, res, {}};
    record.annuli.resize(static_cast<std::size_t>(horizon));
    for (int n = 1; n <= horizon; ++n) {
        record.annuli[static_cast<std::size_t>(n - 1)].n = n;
    }
    const double delta = path.delta();
    const double g = gamma.value();
    const auto samples = path.samples();
    const std::size_t first = path.samples_per_unit(); // t = 1
    const std::size_t last = samples.size() - 1;      // t = 2^N, outside S_N
    for (std::size_t j = first; j < last; ++j) {
        const double t = static_cast<double>(j) * delta;
        const double envelope = g == 0.0 ? 1.0 : std::pow(t, g);
        if (std::abs(samples[j]) > envelope) {
            continue;
        }
        const auto cell = static_cast<std::int64_t>(j >> res);
        const auto n = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(cell)));
        auto& entry = record.annuli[static_cast<std::size_t>(n - 1)];
        ++entry.hit_count;
        if (entry.occupied_cells.empty() || entry.occupied_cells.back() != cell) {
            entry.occupied_cells.push_back(cell);
        }
    }
    for (auto& entry : record.annuli) {
        entry.leb_approx = static_cast<double>(entry.hit_count) * delta;
    }
    return record;
}

double sojourn_measure_S(const FbmPath& path, GammaExponent gamma, double t) {
    require_matching_hurst(path, gamma);
    if (!(t > 0.0 && t <= path.horizon())) {
        throw std::domain_error("sojourn_measure_S: t must lie in (0, 2^N]");
    }
    const double delta = path.delta();
    const auto last = static_cast<std::size_t>(std::floor(t / delta));
    const double g = gamma.value();
    const auto samples = path.samples();
    std::uint64_t hits = 0;
    for (std::size_t j = 1; j <= last; ++j) {
        const double s = static_cast<double>(j) * delta;
        if (std::abs(samples[j]) <= std::pow(s, g)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) * delta;
}

std::vector<double> sojourn_profile(const FbmPath& path, GammaExponent gamma) {
    require_matching_hurst(path, gamma);
    const int horizon = path.horizon_exponent();
    const double delta = path.delta();
    const double g = gamma.value();
    const auto samples = path.samples();
    std::vector<double> profile(static_cast<std::size_t>(horizon) + 1, 0.0);
    std::uint64_t hits = 0;
    std::size_t j = 1;
    for (int n = 0; n <= horizon; ++n) {
        const std::size_t end = path.samples_per_unit() << n; // index of t = 2^n
        for (; j <= end; ++j) {
            const double s = static_cast<double>(j) * delta;
            if (std::abs(samples[j]) <= std::pow(s, g)) {
                ++hits;
            }
        }
        profile[static_cast<std::size_t>(n)] = static_cast<double>(hits) * delta;
    }
    return profile;
}

SojournTally::SojournTally(int horizon_exponent)
    : horizon_exponent_(horizon_exponent), hits_(static_cast<std::size_t>(horizon_exponent)),
      cells_(static_cast<std::size_t>(horizon_exponent)) {}

void SojournTally::add(const SojournRecord& record) {
    if (record.horizon_exponent != horizon_exponent_) {
        throw std::invalid_argument("SojournTally: horizon mismatch");
    }
    for (const auto& a : record.annuli) {
        hits_[static_cast<std::size_t>(a.n - 1)].add(static_cast<double>(a.hit_count));
        cells_[static_cast<std::size_t>(a.n - 1)].add(static_cast<double>(a.occupied_cells.size()));
    }
}

void SojournTally::merge(const SojournTally& other) {
    if (other.horizon_exponent_ != horizon_exponent_) {
        throw std::invalid_argument("SojournTally: horizon mismatch");
    }
    for (std::size_t i = 0; i < hits_.size(); ++i) {
        hits_[i].merge(other.hits_[i]);
        cells_[i].merge(other.cells_[i]);
    }
}

const char* to_string(WindowSide side) noexcept { return side == WindowSide::before ? "before" : "after"; }

// ---------------------------------------------------------------------------

WindowSampler::WindowSampler(HurstIndex h, double epsilon, WindowSide side, int fine_resolution)
    : h_(h), epsilon_(epsilon), side_(side) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw std::invalid_argument("window epsilon must lie in (0, 1/2)");
    }
    if (fine_resolution < 1 || fine_resolution > 16) {
        throw std::invalid_argument("fine_resolution must lie in [1, 16]");
    }
    start_ = side == WindowSide::before ? 1.0 - epsilon : 1.0;
    steps_ = std::size_t{1} << fine_resolution;
    const double step = epsilon / static_cast<double>(steps_);
    const double e = h.two_h();
    step_scale_ = std::pow(step, h.value());

    // Cov(B_start, X_k) with X_k the unit-variance k-th window increment.
    std::vector<double> cross(steps_);
    for (std::size_t k = 0; k < steps_; ++k) {
        const double lo = static_cast<double>(k) * step;
        const double hi = static_cast<double>(k + 1) * step;
        const double diff = std::pow(start_ + hi, e) - std::pow(start_ + lo, e) - std::pow(hi, e) + std::pow(lo, e);
        cross[k] = 0.5 * diff / step_scale_;
    }
    std::vector<double> acf(steps_);
    for (std::size_t k = 0; k < steps_; ++k) {
        acf[k] = fgn_autocov(k, h);
    }
    weights_ = solve_toeplitz(acf, cross);
    double explained = 0.0;
    for (std::size_t k = 0; k < steps_; ++k) {
        explained += cross[k] * weights_[k];
    }
    residual_sd_ = std::sqrt(std::max(0.0, std::pow(start_, e) - explained));
    fgn_ = std::make_unique<CirculantFgn>(h, steps_);
}

std::vector<double> WindowSampler::sample(CounterRng& rng) const {
    std::vector<double> increments(steps_);
    fgn_->sample(rng, increments);
    double level = residual_sd_ * rng.normal();
    for (std::size_t k = 0; k < steps_; ++k) {
        level += weights_[k] * increments[k];
    }
    std::vector<double> path(steps_ + 1);
    path[0] = level;
    for (std::size_t k = 0; k < steps_; ++k) {
        level += step_scale_ * increments[k];
        path[k + 1] = level;
    }
    return path;
}

double WindowSampler::min_abs(CounterRng& rng) const {
    const auto path = sample(rng);
    double best = std::abs(path[0]);
    for (double v : path) {
        best = std::min(best, std::abs(v));
    }
    return best;
}

std::vector<HitProbability> boundary_hit_probabilities(HurstIndex h, std::span<const double> gammas, double epsilon,
                                                       WindowSide side, std::size_t replicas, int fine_resolution,
                                                       std::uint64_t seed) {
    if (replicas < kMinHitReplicas) {
        throw std::invalid_argument("boundary_hit_probability needs at least 100 replicas");
    }
    for (double g : gammas) {
        GammaExponent checked(g, h);
        (void)checked;
    }
    const WindowSampler sampler(h, epsilon, side, fine_resolution);
    std::vector<double> minima(replicas);
    for (std::size_t i = 0; i < replicas; ++i) {
        CounterRng rng(seed + i);
        minima[i] = sampler.min_abs(rng);
    }
    std::vector<HitProbability> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        HitProbability p;
        p.epsilon = epsilon;
        p.side = side;
        p.gamma = g;
        p.threshold = (side == WindowSide::before ? 1.0 : 2.0) * std::pow(epsilon, h.value() - g);
        p.replicas = replicas;
        p.hits = static_cast<std::size_t>(
            std::count_if(minima.begin(), minima.end(), [&](double m) { return m <= p.threshold; }));
        const double n = static_cast<double>(replicas);
        p.estimate = static_cast<double>(p.hits) / n;
        p.stderr_estimate = std::sqrt(p.estimate * (1.0 - p.estimate) / n);
        out.push_back(p);
    }
    return out;
}

HitProbability boundary_hit_probability(GammaExponent gamma, double epsilon, WindowSide side, std::size_t replicas,
                                        int fine_resolution, std::uint64_t seed) {
    const double g = gamma.value();
    return boundary_hit_probabilities(gamma.hurst(), std::span<const double>(&g, 1), epsilon, side, replicas,
                                      fine_resolution, seed)
        .front();
}

} // namespace fbmdim
