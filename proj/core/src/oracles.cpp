#include "simbound/oracles.hpp"

#include <cmath>
#include <string>

namespace simbound {
namespace oracles {

std::size_t GridSpec::total_points() const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < domain.dim(); ++i) {
        if (total > budget / points_per_dim + 1) {
            return budget + 1;  // saturate; caller only compares against budget
        }
        total *= points_per_dim;
    }
    return total;
}

TestPoint grid_point(const GridSpec& grid, std::size_t flat_index) {
    if (grid.points_per_dim < 2) {
        throw ParameterError("grid needs at least 2 points per dimension");
    }
    const std::size_t d = grid.domain.dim();
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t j = d; j-- > 0;) {
        idx[j] = flat_index % grid.points_per_dim;
        flat_index /= grid.points_per_dim;
    }
    if (flat_index != 0) {
        throw ParameterError("grid index out of range");
    }
    TestPoint p;
    p.coords.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double frac = double(idx[j]) / double(grid.points_per_dim - 1);
        p.coords[j] = grid.domain.lower[j] + frac * grid.domain.width(j);
    }
    return p;
}

GridOptimum grid_optimum(const std::function<double(const TestPoint&)>& objective,
                         const GridSpec& grid, OptMode mode) {
    if (grid.points_per_dim < 2) {
        throw ParameterError("grid needs at least 2 points per dimension");
    }
    const std::size_t total = grid.total_points();
    if (total > grid.budget) {
        throw BudgetError("grid size exceeds budget of " + std::to_string(grid.budget) +
                          " evaluations");
    }

    const std::size_t d = grid.domain.dim();
    std::vector<std::size_t> idx(d, 0);
    TestPoint p;
    p.coords.resize(d);
    GridOptimum best;
    bool first = true;

    for (std::size_t count = 0; count < total; ++count) {
        for (std::size_t j = 0; j < d; ++j) {
            const double frac = double(idx[j]) / double(grid.points_per_dim - 1);
            p.coords[j] = grid.domain.lower[j] + frac * grid.domain.width(j);
        }
        const double v = objective(p);
        const bool better = mode == OptMode::Max ? v > best.value : v < best.value;
        // Row-major iteration visits points in lexicographic order, so the
        // first point achieving the optimum is the lexicographically smallest.
        if (first || better) {
            best.value = v;
            best.argopt = p;
            first = false;
        }
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < grid.points_per_dim) {
                break;
            }
            idx[j] = 0;
        }
    }
    return best;
}

McEstimate mc_expectation(const std::function<double(SeededRng&)>& sampler, std::size_t M,
                          SeededRng rng) {
    if (M < 2) {
        throw ParameterError("mc_expectation needs M >= 2");
    }
    McEstimate est;
    est.count = M;
    double sum = 0.0;
    std::vector<double> vals(M);
    for (std::size_t i = 0; i < M; ++i) {
        SeededRng draw = rng.derive(i);
        vals[i] = sampler(draw);
        sum += vals[i];
    }
    est.mean = sum / double(M);
    double ss = 0.0;
    for (double v : vals) {
        ss += (v - est.mean) * (v - est.mean);
    }
    const double sample_var = ss / double(M - 1);
    est.stderr_of_mean = std::sqrt(sample_var / double(M));
    return est;
}

namespace {

// Kernel formulas restated here on purpose; see header note on independence.
double oracle_kernel(const KernelSpec& k, const TestPoint& a, const TestPoint& b) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < k.lengthscales.size(); ++i) {
        const double d = (a.coords[i] - b.coords[i]) / k.lengthscales[i];
        r2 += d * d;
    }
    if (k.family == KernelFamily::SquaredExponential) {
        return k.signal_variance * std::exp(-0.5 * r2);
    }
    const double r = std::sqrt(r2);
    const double a5 = std::sqrt(5.0) * r;
    return k.signal_variance * (1.0 + a5 + 5.0 * r2 / 3.0) * std::exp(-a5);
}

// Gaussian elimination with partial pivoting: solves A x = b in place.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) {
                pivot = r;
            }
        }
        if (A[pivot][col] == 0.0) {
            throw NumericalError("oracle linear system is singular");
        }
        std::swap(A[col], A[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                A[r][c] -= f * A[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) {
            acc -= A[r][c] * x[c];
        }
        x[r] = acc / A[r][r];
    }
    return x;
}

} // namespace

DenseGpResult dense_gp_solve(const Dataset& data, const KernelSpec& k, double lambda,
                             const TestPoint& z) {
    data.validate();
    if (data.size() > 200) {
        throw ParameterError("dense_gp_solve caps dataset size at 200");
    }
    const std::size_t n = data.size();
    std::vector<std::vector<double>> A(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            A[i][j] = oracle_kernel(k, data.points[i], data.points[j]);
        }
        A[i][i] += lambda;
    }
    std::vector<double> kn(n);
    for (std::size_t i = 0; i < n; ++i) {
        kn[i] = oracle_kernel(k, z, data.points[i]);
    }

    const std::vector<double> w = solve_dense(A, data.observations);
    DenseGpResult out;
    for (std::size_t i = 0; i < n; ++i) {
        out.mean += kn[i] * w[i];
    }
    const std::vector<double> v = solve_dense(A, kn);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += kn[i] * v[i];
    }
    out.variance = oracle_kernel(k, z, z) - quad;
    return out;
}

} // namespace oracles
} // namespace simbound
