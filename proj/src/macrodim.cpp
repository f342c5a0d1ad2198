#include "fbmdim/macrodim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fbmdim/errors.hpp"
#include "fbmdim/localtime.hpp"
#include "fbmdim/sojourn.hpp"

namespace fbmdim {

AnnulusCellSet::AnnulusCellSet(int n, std::vector<std::int64_t> cells) : n_(n), cells_(std::move(cells)) {
    if (n < 0 || n > 62) {
        throw std::invalid_argument("annulus index out of range");
    }
    const std::int64_t lo = lower();
    const std::int64_t hi = upper();
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i] < lo || cells_[i] >= hi) {
            std::ostringstream msg;
            msg << "cell " << cells_[i] << " outside annulus " << n << " = [" << lo << ", " << hi << ")";
            throw std::invalid_argument(msg.str());
        }
        if (i > 0 && cells_[i] <= cells_[i - 1]) {
            throw std::invalid_argument("annulus cells must be strictly increasing");
        }
    }
}

std::int64_t AnnulusCellSet::lower() const noexcept { return n_ == 0 ? 0 : std::int64_t{1} << (n_ - 1); }

std::int64_t AnnulusCellSet::upper() const noexcept { return std::int64_t{1} << n_; }

const char* to_string(NuVariant v) noexcept { return v == NuVariant::plain ? "plain" : "log_weighted"; }

const char* to_string(Estimand e) noexcept {
    switch (e) {
    case Estimand::den_log:
        return "den_log";
    case Estimand::den_pix:
        return "den_pix";
    case Estimand::dim_h:
        return "dim_h";
    }
    return "unknown";
}

double interval_cost(std::int64_t length, int n, double rho, NuVariant variant) {
    const double x = std::ldexp(static_cast<double>(length), -n);
    const double base = rho == 0.0 ? 1.0 : std::pow(x, rho);
    if (variant == NuVariant::plain) {
        return base;
    }
    return base * std::pow(std::abs(std::log2(x)), 1.0 - rho);
}

namespace {

std::int64_t annulus_length(int n) { return n == 0 ? 1 : std::int64_t{1} << (n - 1); }

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("rho must lie in [0, 1]");
    }
}

struct Key {
    double value = 0.0;
    std::int64_t count = 0;
};

bool less(const Key& a, const Key& b) noexcept {
    return a.value < b.value || (a.value == b.value && a.count < b.count);
}

// Covering-cost oracle for contiguous groups of a fixed cell set.
class GroupCost {
  public:
    GroupCost(const AnnulusCellSet& cells, double rho, NuVariant variant)
        : x_(cells.cells()), n_(cells.n()), rho_(rho), variant_(variant),
          full_(annulus_length(cells.n())),
          full_cost_(interval_cost(full_, cells.n(), rho, variant)) {}

    std::int64_t span(std::size_t i, std::size_t j) const noexcept { return x_[j - 1] - x_[i] + 1; }

    // Group of cells i .. j-1.
    double operator()(std::size_t i, std::size_t j) const {
        return std::min(interval_cost(span(i, j), n_, rho_, variant_), full_cost_);
    }

    CellInterval interval(std::size_t i, std::size_t j, std::int64_t annulus_lower) const {
        if (interval_cost(span(i, j), n_, rho_, variant_) <= full_cost_) {
            return {x_[i], x_[j - 1] + 1};
        }
        return {annulus_lower, annulus_lower + full_};
    }

    // Plain costs x^rho are concave in the span; the log-weighted costs are
    // concave on (0, 1/2] whenever rho >= 1/4.
    bool concave() const noexcept { return variant_ == NuVariant::plain || rho_ >= 0.25; }

  private:
    const std::vector<std::int64_t>& x_;
    int n_;
    double rho_;
    NuVariant variant_;
    std::int64_t full_;
    double full_cost_;
};

NuValue assemble(const AnnulusCellSet& cells, double rho, NuVariant variant, const GroupCost& cost,
                 const std::vector<Key>& best, const std::vector<std::size_t>& parent) {
    NuValue out;
    out.rho = rho;
    out.n = cells.n();
    out.variant = variant;
    const std::size_t m = cells.size();
    out.value = best[m].value;
    for (std::size_t j = m; j > 0; j = parent[j]) {
        out.partition.push_back(cost.interval(parent[j], j, cells.lower()));
    }
    std::reverse(out.partition.begin(), out.partition.end());
    return out;
}

NuValue empty_nu(const AnnulusCellSet& cells, double rho, NuVariant variant) {
    NuValue out;
    out.rho = rho;
    out.n = cells.n();
    out.variant = variant;
    return out;
}

} // namespace

double group_cost(std::int64_t span, int n, double rho, NuVariant variant) {
    const double own = interval_cost(span, n, rho, variant);
    if (variant == NuVariant::plain) {
        return own;
    }
    return std::min(own, interval_cost(annulus_length(n), n, rho, variant));
}

NuValue nu_quadratic(const AnnulusCellSet& cells, double rho, NuVariant variant) {
    check_rho(rho);
    if (cells.empty()) {
        return empty_nu(cells, rho, variant);
    }
    const GroupCost cost(cells, rho, variant);
    const std::size_t m = cells.size();
    std::vector<Key> best(m + 1);
    std::vector<std::size_t> parent(m + 1, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        Key current{std::numeric_limits<double>::infinity(), 0};
        for (std::size_t i = 0; i < j; ++i) {
            const Key candidate{best[i].value + cost(i, j), best[i].count + 1};
            if (less(candidate, current)) {
                current = candidate;
                parent[j] = i;
            }
        }
        best[j] = current;
    }
    return assemble(cells, rho, variant, cost, best, parent);
}

NuValue nu_exact(const AnnulusCellSet& cells, double rho, NuVariant variant) {
    check_rho(rho);
    if (cells.empty()) {
        return empty_nu(cells, rho, variant);
    }
    const GroupCost cost(cells, rho, variant);
    if (!cost.concave()) {
        return nu_quadratic(cells, rho, variant);
    }
    // Least-weight-subsequence with a concave weight: once an older group
    // start beats a newer one it keeps winning for every later end. Each live
    // candidate owns a contiguous range of future ends; newer candidates own
    // earlier ranges, so the candidates form a stack.
    const std::size_t m = cells.size();
    std::vector<Key> best(m + 1);
    std::vector<std::size_t> parent(m + 1, 0);
    auto key = [&](std::size_t i, std::size_t j) { return Key{best[i].value + cost(i, j), best[i].count + 1}; };
    auto newer_wins = [&](std::size_t fresh, std::size_t old, std::size_t j) {
        return less(key(fresh, j), key(old, j));
    };
    struct Owner {
        std::size_t candidate;
        std::size_t start;
    };
    std::vector<Owner> stack{{0, 1}};
    for (std::size_t j = 1; j <= m; ++j) {
        while (stack.size() >= 2 && stack[stack.size() - 2].start <= j) {
            stack.pop_back();
        }
        const std::size_t owner = stack.back().candidate;
        best[j] = key(owner, j);
        parent[j] = owner;
        if (j == m) {
            break;
        }
        std::size_t first_loss = m + 1;
        while (!stack.empty()) {
            Owner& top = stack.back();
            const std::size_t top_end = stack.size() >= 2 ? stack[stack.size() - 2].start : m + 1;
            const std::size_t lo = std::max(top.start, j + 1);
            if (lo >= top_end || newer_wins(j, top.candidate, top_end - 1)) {
                stack.pop_back();
                continue;
            }
            std::size_t a = lo;
            std::size_t b = top_end - 1;
            while (a < b) {
                const std::size_t mid = a + (b - a) / 2;
                if (newer_wins(j, top.candidate, mid)) {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            first_loss = a;
            if (first_loss > j + 1) {
                top.start = first_loss;
            }
            break;
        }
        if (first_loss > j + 1) {
            stack.push_back({j, j + 1});
        }
    }
    return assemble(cells, rho, variant, cost, best, parent);
}

NuValue nu_bruteforce(const AnnulusCellSet& cells, double rho, NuVariant variant) {
    check_rho(rho);
    if (cells.size() > kMaxBruteforceCells) {
        throw std::invalid_argument("nu_bruteforce is limited to 15 cells");
    }
    if (cells.empty()) {
        return empty_nu(cells, rho, variant);
    }
    const GroupCost cost(cells, rho, variant);
    const std::size_t m = cells.size();
    const std::uint32_t masks = std::uint32_t{1} << (m - 1);
    Key best{std::numeric_limits<double>::infinity(), 0};
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        // bit k set: cut between cell k and cell k+1
        Key total;
        std::size_t start = 0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k + 1 == m || (mask >> k) & 1U) {
                total.value += cost(start, k + 1);
                ++total.count;
                start = k + 1;
            }
        }
        if (less(total, best)) {
            best = total;
            best_mask = mask;
        }
    }
    NuValue out = empty_nu(cells, rho, variant);
    out.value = best.value;
    std::size_t start = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (k + 1 == m || (best_mask >> k) & 1U) {
            out.partition.push_back(cost.interval(start, k + 1, cells.lower()));
            start = k + 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Densities

namespace {

void check_range(FitRange range, std::size_t annuli) {
    if (range.n_min < 1 || range.n_max < range.n_min || static_cast<std::size_t>(range.n_max) > annuli) {
        std::ostringstream msg;
        msg << "fit range [" << range.n_min << ", " << range.n_max << "] outside the available annuli 1.."
            << annuli;
        throw std::invalid_argument(msg.str());
    }
}

DimensionEstimate cumulative_slope(std::span<const double> per_annulus, FitRange range, Estimand estimand) {
    check_range(range, per_annulus.size());
    std::vector<double> xs;
    std::vector<double> ys;
    DimensionEstimate est;
    est.estimand = estimand;
    est.fit_range = range;
    est.ratio_max = -std::numeric_limits<double>::infinity();
    double cumulative = 0.0;
    for (int n = 1; n <= range.n_max; ++n) {
        cumulative += per_annulus[static_cast<std::size_t>(n - 1)];
        if (n < range.n_min) {
            continue;
        }
        if (cumulative > 0.0) {
            const double y = std::log2(cumulative);
            xs.push_back(n);
            ys.push_back(y);
            est.ratio_max = std::max(est.ratio_max, y / n);
        } else {
            ++est.annuli_excluded;
        }
    }
    if (xs.empty()) {
        throw EstimationError(std::string(to_string(estimand)) + ": the set has zero measure on the fit range");
    }
    if (xs.size() < 4) {
        throw EstimationError(std::string(to_string(estimand)) +
                              ": fewer than 4 annuli with positive measure in the fit range");
    }
    const auto fit = stats::linear_fit(xs, ys);
    est.point = std::clamp(fit.slope, 0.0, 1.0);
    est.stderr_point = fit.slope_stderr;
    return est;
}

const AnnulusCellSet* find_annulus(std::span<const AnnulusCellSet> annuli, int n) {
    if (n >= 1 && static_cast<std::size_t>(n) <= annuli.size() && annuli[static_cast<std::size_t>(n - 1)].n() == n) {
        return &annuli[static_cast<std::size_t>(n - 1)];
    }
    for (const auto& a : annuli) {
        if (a.n() == n) {
            return &a;
        }
    }
    return nullptr;
}

} // namespace

DimensionEstimate den_log_estimate(std::span<const double> per_annulus, FitRange range) {
    return cumulative_slope(per_annulus, range, Estimand::den_log);
}

DimensionEstimate den_log_estimate(const SojournRecord& record, FitRange range) {
    const auto leb = record.leb_per_annulus();
    return den_log_estimate(leb, range);
}

DimensionEstimate den_pix_estimate(std::span<const double> cells_per_annulus, FitRange range) {
    return cumulative_slope(cells_per_annulus, range, Estimand::den_pix);
}

DimensionEstimate den_pix_estimate(const SojournRecord& record, FitRange range) {
    const auto counts = record.cells_per_annulus();
    return den_pix_estimate(counts, range);
}

DimensionEstimate den_pix_estimate(const LevelSetRecord& record, FitRange range) {
    const auto sets = cell_sets(record);
    const auto counts = cell_counts(sets);
    return den_pix_estimate(counts, range);
}

std::vector<double> make_rho_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) {
        throw std::invalid_argument("rho step must lie in (0, 0.5]");
    }
    const auto intervals = static_cast<int>(std::ceil(1.0 / step - 1e-9));
    std::vector<double> grid;
    for (int i = 0; i <= intervals; ++i) {
        grid.push_back(std::min(1.0, i * step));
    }
    grid.back() = 1.0;
    return grid;
}

namespace {

HingeFit least_squares_hinge(std::span<const SlopePoint> curve) {
    if (curve.empty()) {
        throw EstimationError("dim_h: empty slope curve");
    }
    const double count = static_cast<double>(curve.size());
    double mean_s = 0.0;
    for (const auto& p : curve) {
        mean_s += p.slope;
    }
    mean_s /= count;
    double base_sse = 0.0;
    for (const auto& p : curve) {
        base_sse += (p.slope - mean_s) * (p.slope - mean_s);
    }
    HingeFit best{1.0, 0.0, mean_s, base_sse, false};
    constexpr int kSteps = 1000;
    // Scan from the right so that exact ties keep the larger onset.
    for (int i = kSteps; i >= 0; --i) {
        const double d = static_cast<double>(i) / kSteps;
        double mean_g = 0.0;
        for (const auto& p : curve) {
            mean_g += std::max(0.0, p.rho - d);
        }
        mean_g /= count;
        double sgg = 0.0;
        double ssg = 0.0;
        for (const auto& p : curve) {
            const double g = std::max(0.0, p.rho - d) - mean_g;
            sgg += g * g;
            ssg += (p.slope - mean_s) * g;
        }
        if (!(sgg > 0.0) || ssg >= 0.0) {
            continue;
        }
        const double c = -ssg / sgg;
        const double sse = base_sse - ssg * ssg / sgg;
        if (sse < best.sse - 1e-15 * (1.0 + best.sse)) {
            best = {d, c, mean_s + c * mean_g, sse, false};
        }
    }
    return best;
}

} // namespace

HingeFit fit_hinge(std::span<const SlopePoint> curve, double trim) {
    HingeFit fit = least_squares_hinge(curve);
    if (trim > 0.0) {
        // Refit without the points within `trim` of the onset, where the
        // finite-horizon curve rounds off the corner.
        std::vector<SlopePoint> kept;
        for (int iteration = 0; iteration < 20 && fit.decay > 0.0; ++iteration) {
            kept.clear();
            std::size_t left = 0;
            for (const auto& p : curve) {
                if (std::abs(p.rho - fit.onset) > trim) {
                    kept.push_back(p);
                    left += p.rho < fit.onset ? 1U : 0U;
                }
            }
            if (left < 2 || kept.size() - left < 3) {
                break;
            }
            const HingeFit refit = least_squares_hinge(kept);
            const bool settled = std::abs(refit.onset - fit.onset) < 1e-3;
            if (refit.decay > 0.0) {
                fit = refit;
            }
            if (settled || refit.decay == 0.0) {
                break;
            }
        }
    }
    fit.boundary = fit.decay == 0.0 || fit.onset <= curve.front().rho || fit.onset >= curve.back().rho;
    return fit;
}

namespace {

DimensionEstimate finish_dimh(DimensionEstimate est, std::vector<double> stderrs) {
    if (est.slope_curve.empty()) {
        throw EstimationError("dim_h: no rho with enough annuli for a slope");
    }
    const HingeFit hinge = fit_hinge(est.slope_curve);
    est.point = std::clamp(hinge.onset, 0.0, 1.0);
    est.boundary = hinge.boundary;
    if (hinge.decay > 0.0 && !stderrs.empty()) {
        std::nth_element(stderrs.begin(), stderrs.begin() + static_cast<std::ptrdiff_t>(stderrs.size() / 2),
                         stderrs.end());
        est.stderr_point = stderrs[stderrs.size() / 2] / hinge.decay;
    }
    return est;
}

void check_rho_grid(std::span<const double> rho_grid) {
    if (rho_grid.size() < 2 || rho_grid.front() > 1e-12 || rho_grid.back() < 1.0 - 1e-12) {
        throw std::invalid_argument("rho grid must span [0, 1]");
    }
    for (std::size_t i = 1; i < rho_grid.size(); ++i) {
        if (!(rho_grid[i] > rho_grid[i - 1]) || rho_grid[i] - rho_grid[i - 1] > 0.05 + 1e-12) {
            throw std::invalid_argument("rho grid must be increasing with step <= 0.05");
        }
    }
}

void check_dimh_range(FitRange range) {
    if (range.n_min < 1 || range.count() < 5) {
        throw std::invalid_argument("dim_h needs a fit range of at least 5 annuli");
    }
}

} // namespace

DimensionEstimate dimh_estimate(std::span<const AnnulusCellSet> annuli, std::span<const double> rho_grid,
                                FitRange range, NuVariant variant) {
    check_rho_grid(rho_grid);
    check_dimh_range(range);
    std::vector<const AnnulusCellSet*> used;
    DimensionEstimate est;
    est.estimand = Estimand::dim_h;
    est.fit_range = range;
    for (int n = range.n_min; n <= range.n_max; ++n) {
        const AnnulusCellSet* a = find_annulus(annuli, n);
        if (a == nullptr) {
            throw std::invalid_argument("dim_h: fit range exceeds the available annuli");
        }
        if (a->empty()) {
            ++est.annuli_excluded;
        } else {
            used.push_back(a);
        }
    }
    if (used.size() < 3) {
        throw EstimationError("dim_h: fewer than 3 non-empty annuli in the fit range");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> stderrs;
    for (double rho : rho_grid) {
        xs.clear();
        ys.clear();
        for (const AnnulusCellSet* a : used) {
            const double nu = nu_exact(*a, rho, variant).value;
            if (nu > 0.0) {
                xs.push_back(a->n());
                ys.push_back(std::log2(nu));
            }
        }
        if (xs.size() < 3) {
            continue;
        }
        const auto fit = stats::linear_fit(xs, ys);
        est.slope_curve.push_back({rho, fit.slope, fit.slope_stderr, static_cast<int>(xs.size())});
        stderrs.push_back(fit.slope_stderr);
    }
    return finish_dimh(std::move(est), std::move(stderrs));
}

NuAccumulator::NuAccumulator(std::vector<double> rho_grid, int horizon_exponent, NuVariant variant)
    : rho_grid_(std::move(rho_grid)), horizon_exponent_(horizon_exponent), variant_(variant),
      sums_(rho_grid_.size() * static_cast<std::size_t>(std::max(horizon_exponent, 0)), 0.0) {
    check_rho_grid(rho_grid_);
    if (horizon_exponent < 1) {
        throw std::invalid_argument("NuAccumulator: horizon exponent must be positive");
    }
}

void NuAccumulator::add(std::span<const AnnulusCellSet> annuli) {
    const auto n_count = static_cast<std::size_t>(horizon_exponent_);
    if (annuli.size() != n_count) {
        throw std::invalid_argument("NuAccumulator: expected one cell set per annulus 1 .. N");
    }
    for (std::size_t i = 0; i < n_count; ++i) {
        if (annuli[i].n() != static_cast<int>(i + 1)) {
            throw std::invalid_argument("NuAccumulator: annuli out of order");
        }
        if (annuli[i].empty()) {
            continue;
        }
        for (std::size_t k = 0; k < rho_grid_.size(); ++k) {
            sums_[k * n_count + i] += nu_exact(annuli[i], rho_grid_[k], variant_).value;
        }
    }
    ++replicas_;
}

void NuAccumulator::merge(const NuAccumulator& other) {
    if (other.rho_grid_ != rho_grid_ || other.horizon_exponent_ != horizon_exponent_ || other.variant_ != variant_) {
        throw std::invalid_argument("NuAccumulator: cannot merge different grids");
    }
    for (std::size_t i = 0; i < sums_.size(); ++i) {
        sums_[i] += other.sums_[i];
    }
    replicas_ += other.replicas_;
}

double NuAccumulator::mean_nu(std::size_t rho_index, int n) const {
    if (replicas_ == 0) {
        return 0.0;
    }
    const auto n_count = static_cast<std::size_t>(horizon_exponent_);
    return sums_.at(rho_index * n_count + static_cast<std::size_t>(n - 1)) / static_cast<double>(replicas_);
}

DimensionEstimate NuAccumulator::estimate(FitRange range) const {
    check_dimh_range(range);
    if (range.n_max > horizon_exponent_) {
        throw std::invalid_argument("dim_h: fit range exceeds the available annuli");
    }
    if (replicas_ == 0) {
        throw EstimationError("dim_h: no replicas accumulated");
    }
    DimensionEstimate est;
    est.estimand = Estimand::dim_h;
    est.fit_range = range;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> stderrs;
    for (std::size_t k = 0; k < rho_grid_.size(); ++k) {
        xs.clear();
        ys.clear();
        for (int n = range.n_min; n <= range.n_max; ++n) {
            const double nu = mean_nu(k, n);
            if (nu > 0.0) {
                xs.push_back(n);
                ys.push_back(std::log2(nu));
            }
        }
        if (k == 0) {
            est.annuli_excluded = range.count() - static_cast<int>(xs.size());
        }
        if (xs.size() < 3) {
            continue;
        }
        const auto fit = stats::linear_fit(xs, ys);
        est.slope_curve.push_back({rho_grid_[k], fit.slope, fit.slope_stderr, static_cast<int>(xs.size())});
        stderrs.push_back(fit.slope_stderr);
    }
    return finish_dimh(std::move(est), std::move(stderrs));
}

DimensionEstimate dimh_estimate(const SojournRecord& record, std::span<const double> rho_grid, FitRange range,
                                NuVariant variant) {
    const auto sets = cell_sets(record);
    return dimh_estimate(sets, rho_grid, range, variant);
}

DimensionEstimate dimh_estimate(const LevelSetRecord& record, std::span<const double> rho_grid, FitRange range,
                                NuVariant variant) {
    const auto sets = cell_sets(record);
    return dimh_estimate(sets, rho_grid, range, variant);
}

std::string InequalityReport::describe() const {
    std::ostringstream out;
    out << "dim_h=" << dim_h << (dimh_le_denpix ? " <= " : " > ") << "den_pix+" << tolerance << "=" << den_pix + tolerance
        << "; den_log=" << den_log << (denlog_le_denpix ? " <= " : " > ") << "den_pix+" << tolerance << "="
        << den_pix + tolerance;
    return out.str();
}

InequalityReport dimension_inequality_check(double den_log, double den_pix, double dim_h, double tolerance) {
    InequalityReport report;
    report.den_log = den_log;
    report.den_pix = den_pix;
    report.dim_h = dim_h;
    report.tolerance = tolerance;
    report.dimh_le_denpix = dim_h <= den_pix + tolerance;
    report.denlog_le_denpix = den_log <= den_pix + tolerance;
    return report;
}

InequalityReport dimension_inequality_check(const DimensionEstimate& den_log, const DimensionEstimate& den_pix,
                                            const DimensionEstimate& dim_h, double tolerance) {
    if (den_log.estimand != Estimand::den_log || den_pix.estimand != Estimand::den_pix ||
        dim_h.estimand != Estimand::dim_h) {
        throw std::invalid_argument("dimension_inequality_check: estimands out of order");
    }
    return dimension_inequality_check(den_log.point, den_pix.point, dim_h.point, tolerance);
}

// ---------------------------------------------------------------------------

std::vector<AnnulusCellSet> cell_sets(const SojournRecord& record) {
    std::vector<AnnulusCellSet> out;
    out.reserve(record.annuli.size());
    for (const auto& a : record.annuli) {
        out.emplace_back(a.n, a.occupied_cells);
    }
    return out;
}

std::vector<AnnulusCellSet> cell_sets(const LevelSetRecord& record) {
    std::vector<AnnulusCellSet> out;
    for (const auto& a : record.annuli) {
        if (a.n() >= 1) {
            out.push_back(a);
        }
    }
    return out;
}

std::vector<AnnulusCellSet> alpha_grid_set(double alpha, int horizon_exponent) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    std::vector<AnnulusCellSet> out;
    for (int n = 1; n <= horizon_exponent; ++n) {
        const std::int64_t lower = std::int64_t{1} << (n - 1);
        const auto target = static_cast<std::int64_t>(std::ceil(std::exp2(n * alpha) - 1e-9));
        const std::int64_t count = std::clamp<std::int64_t>(target, 1, lower);
        std::vector<std::int64_t> cells;
        cells.reserve(static_cast<std::size_t>(count));
        for (std::int64_t k = 0; k < count; ++k) {
            cells.push_back(lower + (k * lower) / count);
        }
        out.emplace_back(n, std::move(cells));
    }
    return out;
}

std::vector<AnnulusCellSet> full_ray_set(int horizon_exponent) {
    std::vector<AnnulusCellSet> out;
    for (int n = 1; n <= horizon_exponent; ++n) {
        const std::int64_t lower = std::int64_t{1} << (n - 1);
        std::vector<std::int64_t> cells(static_cast<std::size_t>(lower));
        for (std::int64_t k = 0; k < lower; ++k) {
            cells[static_cast<std::size_t>(k)] = lower + k;
        }
        out.emplace_back(n, std::move(cells));
    }
    return out;
}

std::vector<double> cell_counts(std::span<const AnnulusCellSet> annuli) {
    std::vector<double> out;
    out.reserve(annuli.size());
    for (const auto& a : annuli) {
        out.push_back(static_cast<double>(a.size()));
    }
    return out;
}

} // namespace fbmdim
