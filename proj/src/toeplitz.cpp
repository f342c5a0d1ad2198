#include "fbmdim/toeplitz.hpp"

#include <stdexcept>

namespace fbmdim {

std::vector<double> solve_toeplitz(std::span<const double> column, std::span<const double> rhs) {
    const std::size_t n = column.size();
    if (n == 0 || rhs.size() != n) {
        throw std::invalid_argument("solve_toeplitz: size mismatch");
    }
    const double diag = column[0];
    if (!(diag > 0.0)) {
        throw std::invalid_argument("solve_toeplitz: diagonal must be positive");
    }
    // Work with the unit-diagonal matrix; r[i] = column[i+1] / diag.
    auto r = [&](std::size_t i) { return column[i + 1] / diag; };
    std::vector<double> x(n);
    std::vector<double> y(n);
    std::vector<double> scratch(n);
    x[0] = rhs[0] / diag;
    if (n == 1) {
        return x;
    }
    y[0] = -r(0);
    double beta = 1.0;
    double alpha = -r(0);
    for (std::size_t k = 1; k < n; ++k) {
        beta *= (1.0 - alpha * alpha);
        if (!(beta > 0.0)) {
            throw std::runtime_error("solve_toeplitz: matrix is not positive definite");
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            dot += r(i) * x[k - 1 - i];
        }
        const double mu = (rhs[k] / diag - dot) / beta;
        for (std::size_t i = 0; i < k; ++i) {
            scratch[i] = x[i] + mu * y[k - 1 - i];
        }
        for (std::size_t i = 0; i < k; ++i) {
            x[i] = scratch[i];
        }
        x[k] = mu;
        if (k + 1 < n) {
            double ydot = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                ydot += r(i) * y[k - 1 - i];
            }
            alpha = (-r(k) - ydot) / beta;
            for (std::size_t i = 0; i < k; ++i) {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            for (std::size_t i = 0; i < k; ++i) {
                y[i] = scratch[i];
            }
            y[k] = alpha;
        }
    }
    return x;
}

} // namespace fbmdim
