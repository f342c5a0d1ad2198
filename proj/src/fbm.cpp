#include "fbmdim/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fbmdim/errors.hpp"
#include "fbmdim/quadrature.hpp"

namespace fbmdim {

namespace {

// The FFTW planner is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer allocate_complex(std::size_t n) {
    auto* raw = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (raw == nullptr) {
        throw std::bad_alloc();
    }
    return ComplexBuffer(raw);
}

} // namespace

double covariance_R(double u, double v, HurstIndex h) {
    if (u < 0.0 || v < 0.0) {
        throw std::domain_error("covariance_R requires nonnegative times");
    }
    const double e = h.two_h();
    return 0.5 * (std::pow(u, e) + std::pow(v, e) - std::pow(std::abs(v - u), e));
}

double fgn_autocov(std::uint64_t k, HurstIndex h) {
    const double e = h.two_h();
    const double kd = static_cast<double>(k);
    if (k == 0) {
        return 1.0;
    }
    return 0.5 * (std::pow(kd + 1.0, e) - 2.0 * std::pow(kd, e) + std::pow(kd - 1.0, e));
}

const char* to_string(GeneratorId id) noexcept {
    switch (id) {
    case GeneratorId::circulant_embedding:
        return "circulant_embedding";
    case GeneratorId::cholesky:
        return "cholesky";
    case GeneratorId::external:
        return "external";
    }
    return "unknown";
}

FbmPath::FbmPath(HurstIndex h, int horizon_exponent, int resolution_exponent, std::vector<double> samples,
                 std::uint64_t seed, GeneratorId generator)
    : h_(h), horizon_exponent_(horizon_exponent), resolution_exponent_(resolution_exponent), seed_(seed),
      generator_(generator), samples_(std::move(samples)) {
    if (horizon_exponent < 1 || resolution_exponent < 0 || horizon_exponent + resolution_exponent > 40) {
        throw std::invalid_argument("path exponents out of range: need N >= 1, r >= 0");
    }
    const std::size_t expected = (std::size_t{1} << (horizon_exponent + resolution_exponent)) + 1;
    if (samples_.size() != expected) {
        std::ostringstream msg;
        msg << "path holds " << samples_.size() << " samples, expected 2^(N+r)+1 = " << expected;
        throw std::invalid_argument(msg.str());
    }
    if (samples_.front() != 0.0) {
        throw std::invalid_argument("path must start at zero");
    }
}

double FbmPath::delta() const noexcept { return std::ldexp(1.0, -resolution_exponent_); }

double FbmPath::horizon() const noexcept { return std::ldexp(1.0, horizon_exponent_); }

// ---------------------------------------------------------------------------
// Circulant embedding

struct CirculantFgn::Plan {
    fftw_plan plan = nullptr;
    ~Plan() {
        if (plan != nullptr) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

CirculantFgn::CirculantFgn(HurstIndex h, std::size_t length) : h_(h), length_(length) {
    if (length == 0) {
        throw std::invalid_argument("fGn length must be positive");
    }
    size_ = std::max<std::size_t>(2, std::bit_ceil(2 * (length - 1)));
    const std::size_t half = size_ / 2;

    auto buffer = allocate_complex(size_);
    plan_ = std::make_unique<Plan>();
    {
        std::lock_guard lock(planner_mutex());
        plan_->plan = fftw_plan_dft_1d(static_cast<int>(size_), buffer.get(), buffer.get(), FFTW_FORWARD,
                                       FFTW_ESTIMATE);
    }
    if (plan_->plan == nullptr) {
        throw SynthesisError("FFTW could not create a plan");
    }

    for (std::size_t k = 0; k < size_; ++k) {
        const std::size_t lag = k <= half ? k : size_ - k;
        buffer[k][0] = fgn_autocov(lag, h);
        buffer[k][1] = 0.0;
    }
    fftw_execute_dft(plan_->plan, buffer.get(), buffer.get());

    scale_.resize(size_);
    min_eigenvalue_ = buffer[0][0];
    for (std::size_t k = 0; k < size_; ++k) {
        double lambda = buffer[k][0];
        min_eigenvalue_ = std::min(min_eigenvalue_, lambda);
        if (lambda < 0.0) {
            if (lambda < -kEigenClampTolerance) {
                std::ostringstream msg;
                msg << "circulant embedding eigenvalue " << lambda << " below -" << kEigenClampTolerance
                    << " (H=" << h.value() << ", length=" << length
                    << "); use the cholesky generator for lengths up to " << kMaxCholeskyLength;
                throw SynthesisError(msg.str());
            }
            lambda = 0.0;
        }
        scale_[k] = std::sqrt(lambda / static_cast<double>(size_));
    }
}

CirculantFgn::~CirculantFgn() = default;

void CirculantFgn::sample(CounterRng& rng, std::span<double> out) const {
    if (out.size() != length_) {
        throw std::invalid_argument("output span does not match the generator length");
    }
    auto buffer = allocate_complex(size_);
    for (std::size_t k = 0; k < size_; ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        buffer[k][0] = scale_[k] * re;
        buffer[k][1] = scale_[k] * im;
    }
    fftw_execute_dft(plan_->plan, buffer.get(), buffer.get());
    // Real and imaginary parts are two independent draws; the real part is used.
    for (std::size_t j = 0; j < length_; ++j) {
        out[j] = buffer[j][0];
    }
}

std::vector<double> CirculantFgn::sample(std::uint64_t seed) const {
    std::vector<double> out(length_);
    CounterRng rng(seed);
    sample(rng, out);
    return out;
}

// ---------------------------------------------------------------------------
// Covariance factorization

struct CholeskyFgn::Factor {
    Eigen::MatrixXd lower;
};

CholeskyFgn::CholeskyFgn(HurstIndex h, std::size_t length) : length_(length) {
    if (length == 0) {
        throw std::invalid_argument("fGn length must be positive");
    }
    if (length > kMaxCholeskyLength) {
        std::ostringstream msg;
        msg << "cholesky generator is limited to length " << kMaxCholeskyLength << ", got " << length;
        throw ResourceError(msg.str());
    }
    const auto n = static_cast<Eigen::Index>(length);
    std::vector<double> acf(length);
    for (std::size_t k = 0; k < length; ++k) {
        acf[k] = fgn_autocov(k, h);
    }
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cov(i, j) = acf[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw SynthesisError("fGn covariance matrix is not numerically positive definite");
    }
    factor_ = std::make_unique<Factor>();
    factor_->lower = llt.matrixL();
}

CholeskyFgn::~CholeskyFgn() = default;
CholeskyFgn::CholeskyFgn(CholeskyFgn&&) noexcept = default;
CholeskyFgn& CholeskyFgn::operator=(CholeskyFgn&&) noexcept = default;

void CholeskyFgn::sample(CounterRng& rng, std::span<double> out) const {
    if (out.size() != length_) {
        throw std::invalid_argument("output span does not match the generator length");
    }
    Eigen::VectorXd z(static_cast<Eigen::Index>(length_));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = rng.normal();
    }
    Eigen::VectorXd x = factor_->lower.triangularView<Eigen::Lower>() * z;
    std::copy(x.data(), x.data() + x.size(), out.begin());
}

std::vector<double> CholeskyFgn::sample(std::uint64_t seed) const {
    std::vector<double> out(length_);
    CounterRng rng(seed);
    sample(rng, out);
    return out;
}

std::vector<double> generate_fgn(HurstIndex h, std::size_t length, std::uint64_t seed, GeneratorId generator) {
    switch (generator) {
    case GeneratorId::circulant_embedding:
        return CirculantFgn(h, length).sample(seed);
    case GeneratorId::cholesky:
        return CholeskyFgn(h, length).sample(seed);
    case GeneratorId::external:
        break;
    }
    throw std::invalid_argument("generate_fgn: not a synthesis generator");
}

// ---------------------------------------------------------------------------
// Paths

PathSynthesizer::PathSynthesizer(HurstIndex h, int horizon_exponent, int resolution_exponent,
                                 GeneratorId generator)
    : h_(h), horizon_exponent_(horizon_exponent), resolution_exponent_(resolution_exponent),
      generator_(generator) {
    if (horizon_exponent < 1 || resolution_exponent < 0) {
        throw std::invalid_argument("path synthesis needs N >= 1 and r >= 0");
    }
    if (horizon_exponent + resolution_exponent > 30 ||
        (std::size_t{1} << (horizon_exponent + resolution_exponent)) + 1 > kMaxPathSamples) {
        std::ostringstream msg;
        msg << "2^(N+r)+1 samples with N=" << horizon_exponent << ", r=" << resolution_exponent
            << " exceeds the budget of " << kMaxPathSamples << " samples; lower N or r";
        throw ResourceError(msg.str());
    }
    const std::size_t steps = std::size_t{1} << (horizon_exponent + resolution_exponent);
    switch (generator) {
    case GeneratorId::circulant_embedding:
        circulant_ = std::make_unique<CirculantFgn>(h, steps);
        break;
    case GeneratorId::cholesky:
        cholesky_ = std::make_unique<CholeskyFgn>(h, steps);
        break;
    case GeneratorId::external:
        throw std::invalid_argument("PathSynthesizer: not a synthesis generator");
    }
}

PathSynthesizer::~PathSynthesizer() = default;

FbmPath PathSynthesizer::operator()(std::uint64_t seed) const {
    const std::size_t steps = std::size_t{1} << (horizon_exponent_ + resolution_exponent_);
    std::vector<double> samples(steps + 1);
    CounterRng rng(seed);
    std::span<double> increments(samples.data() + 1, steps);
    if (circulant_) {
        circulant_->sample(rng, increments);
    } else {
        cholesky_->sample(rng, increments);
    }
    // Self-similarity: spacing-Delta increments are Delta^H times unit fGn.
    const double scale = std::pow(2.0, -resolution_exponent_ * h_.value());
    samples[0] = 0.0;
    double level = 0.0;
    for (std::size_t j = 1; j <= steps; ++j) {
        level += scale * samples[j];
        samples[j] = level;
    }
    return FbmPath(h_, horizon_exponent_, resolution_exponent_, std::move(samples), seed, generator_);
}

FbmPath synthesize_path(HurstIndex h, int horizon_exponent, int resolution_exponent, std::uint64_t seed,
                        GeneratorId generator) {
    return PathSynthesizer(h, horizon_exponent, resolution_exponent, generator)(seed);
}

// ---------------------------------------------------------------------------
// The integral I

namespace {

// Integrand of the inner u-integral at v = 1 after u = sin^2(theta), given
// sin(theta) and cos(theta). The determinant R(u,u)R(1,1) - R(u,1)^2 is
// evaluated in the factored form
//   (g - (1 - a)^2) ((1 + a)^2 - g) / 4,  a = u^H, g = (1 - u)^2H,
// with each factor arranged to avoid cancellation near either endpoint.
double inner_integrand(double sn, double cs, double h) {
    const double s2 = sn * sn;
    const double c2 = cs * cs;
    const double log_s2 = s2 < 0.5 ? std::log(s2) : std::log1p(-c2);
    const double log_c2 = s2 < 0.5 ? std::log1p(-s2) : std::log(c2);
    const double a = std::exp(h * log_s2);
    const double one_minus_g = -std::expm1(2.0 * h * log_c2);
    double first;
    if (s2 < 0.5) {
        first = a * (2.0 - a) - one_minus_g;
    } else {
        const double one_minus_a = -std::expm1(h * log_s2);
        first = std::exp(2.0 * h * log_c2) - one_minus_a * one_minus_a;
    }
    const double second = one_minus_g + 2.0 * a + a * a;
    return 2.0 * sn * cs / std::sqrt(0.25 * first * second);
}

} // namespace

double compute_I(HurstIndex h, double tolerance) {
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("compute_I tolerance must be positive");
    }
    const double hv = h.value();
    // Self-similarity reduces the v-integral to a factor 1/(1-H):
    //   I = 2 int_0^1 v^(1-2H) dv * K = K / (1 - H),
    //   K = int_0^{pi/2} inner_integrand(sin t, cos t) dt.
    // The inner integrand behaves like t^(1-2H) at both ends; t = w^k with
    // k = 1/(1-H) turns that into a linear behaviour in w.
    const double k = 1.0 / (1.0 - hv);
    const double w_max = std::pow(std::numbers::pi / 4.0, 1.0 / k);
    auto lower = [&](double w) {
        const double t = std::pow(w, k);
        if (t < 1e-150) {
            return 2.0 * k * w;
        }
        return inner_integrand(std::sin(t), std::cos(t), hv) * k * std::pow(w, k - 1.0);
    };
    auto upper = [&](double w) {
        const double t = std::pow(w, k); // distance to pi/2
        if (t < 1e-150) {
            return 2.0 * k * w;
        }
        return inner_integrand(std::cos(t), std::sin(t), hv) * k * std::pow(w, k - 1.0);
    };
    const double part_tol = 0.25 * tolerance * (1.0 - hv);
    const auto lo = quadrature::integrate(lower, 0.0, w_max, part_tol, 0.0, 20000);
    const auto hi = quadrature::integrate(upper, 0.0, w_max, part_tol, 0.0, 20000);
    return (lo.value + hi.value) / (1.0 - hv);
}

double time_inversion_covariance_residual(HurstIndex h, std::span<const double> grid) {
    const double e = h.two_h();
    double worst = 0.0;
    for (double u : grid) {
        if (!(u > 0.0)) {
            throw std::domain_error("time inversion grid must be strictly positive");
        }
    }
    for (double u : grid) {
        for (double v : grid) {
            const double inverted = std::pow(u, e) * std::pow(v, e) * covariance_R(1.0 / u, 1.0 / v, h);
            worst = std::max(worst, std::abs(inverted - covariance_R(u, v, h)));
        }
    }
    return worst;
}

} // namespace fbmdim
