#include "simbound/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace simbound {

std::string to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::SquaredExponential: return "squared_exponential";
    case KernelFamily::Matern52: return "matern52";
    }
    throw ParameterError("unknown kernel family");
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "squared_exponential" || name == "se" || name == "rbf") {
        return KernelFamily::SquaredExponential;
    }
    if (name == "matern52" || name == "matern-5/2" || name == "matern_52") {
        return KernelFamily::Matern52;
    }
    throw ParameterError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
    if (lengthscales.empty()) {
        throw ParameterError("kernel needs at least one lengthscale");
    }
    for (double l : lengthscales) {
        if (!(l > 0.0)) {
            throw ParameterError("kernel lengthscales must be positive");
        }
    }
    if (!(signal_variance > 0.0)) {
        throw ParameterError("kernel signal variance must be positive");
    }
}

double kernel_eval(const KernelSpec& k, const TestPoint& z, const TestPoint& z2) {
    if (z.dim() != k.dim() || z2.dim() != k.dim()) {
        throw DimensionError("kernel input dimension mismatch: lengthscales are " +
                             std::to_string(k.dim()) + "-dimensional");
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < k.dim(); ++i) {
        const double d = (z.coords[i] - z2.coords[i]) / k.lengthscales[i];
        r2 += d * d;
    }
    switch (k.family) {
    case KernelFamily::SquaredExponential:
        return k.signal_variance * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
        const double r = std::sqrt(r2);
        const double a = std::sqrt(5.0) * r;
        return k.signal_variance * (1.0 + a + 5.0 * r2 / 3.0) * std::exp(-a);
    }
    }
    throw ParameterError("unknown kernel family");
}

void Dataset::append(TestPoint z, double y) {
    points.push_back(std::move(z));
    observations.push_back(y);
}

void Dataset::validate() const {
    if (points.size() != observations.size()) {
        throw ParameterError("dataset points/observations length mismatch");
    }
    for (const auto& p : points) {
        if (p.dim() != points.front().dim()) {
            throw DimensionError("dataset points differ in dimension");
        }
    }
}

namespace {

Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelSpec& k) {
    const auto n = Eigen::Index(data.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel_eval(k, data.points[std::size_t(i)], data.points[std::size_t(j)]);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    double acc = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        acc += std::log(L(i, i));
    }
    return 2.0 * acc;
}

} // namespace

GPModel fit(const Dataset& data, const KernelSpec& k, double lambda) {
    data.validate();
    k.validate();
    if (data.empty()) {
        throw ParameterError("cannot fit a GP to an empty dataset");
    }
    if (lambda < 0.0) {
        throw ParameterError("lambda must be nonnegative");
    }
    if (data.points.front().dim() != k.dim()) {
        throw DimensionError("dataset dimension does not match kernel lengthscales");
    }

    GPModel m;
    m.kernel_ = k;
    m.lambda_ = lambda;
    m.data_ = data;
    m.K_ = gram_matrix(data, k);

    const auto n = Eigen::Index(data.size());
    const double mean_diag = m.K_.trace() / double(n);  // equals signal_variance
    const double min_jitter = 1e-10 * mean_diag;
    const double max_jitter = 1e-4 * mean_diag;

    // Factor with no jitter first so well-posed problems are solved exactly
    // as written; escalate only when the factorization actually fails.
    double jitter = 0.0;
    Eigen::MatrixXd A = m.K_;
    A.diagonal().array() += lambda;
    while (true) {
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        m.chol_.compute(Aj);
        if (m.chol_.info() == Eigen::Success) {
            break;
        }
        jitter = jitter == 0.0 ? min_jitter : jitter * 10.0;
        if (jitter > max_jitter) {
            throw NumericalError("Cholesky factorization failed after jitter escalation; "
                                 "kernel/data are pathological");
        }
    }
    m.jitter_ = jitter;

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = data.observations[std::size_t(i)];
    }
    m.alpha_ = m.chol_.solve(y);
    return m;
}

Eigen::VectorXd GPModel::cov_vector(const TestPoint& z) const {
    const auto n = Eigen::Index(data_.size());
    Eigen::VectorXd kn(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kn(i) = kernel_eval(kernel_, z, data_.points[std::size_t(i)]);
    }
    return kn;
}

double GPModel::posterior_mean(const TestPoint& z) const {
    return cov_vector(z).dot(alpha_);
}

double GPModel::posterior_std(const TestPoint& z) const {
    const Eigen::VectorXd kn = cov_vector(z);
    const Eigen::VectorXd v = chol_.matrixL().solve(kn);
    const double var = kernel_.signal_variance - v.squaredNorm();
    return std::sqrt(std::max(0.0, var));
}

std::pair<double, double> GPModel::posterior(const TestPoint& z) const {
    const Eigen::VectorXd kn = cov_vector(z);
    const double mean = kn.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(kn);
    const double var = kernel_.signal_variance - v.squaredNorm();
    return {mean, std::sqrt(std::max(0.0, var))};
}

double posterior_mean(const GPModel& m, const TestPoint& z) {
    return m.posterior_mean(z);
}

double posterior_std(const GPModel& m, const TestPoint& z) {
    return m.posterior_std(z);
}

double log_det_scaled(const GPModel& m, double eta) {
    if (eta < 0.0) {
        throw ParameterError("eta must be nonnegative");
    }
    Eigen::MatrixXd A = m.gram();
    A.diagonal().array() += 1.0 + eta;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("factorization of (1+eta)I + K failed");
    }
    return log_det_from_llt(llt);
}

double mutual_information(const Dataset& data, const KernelSpec& k, const NoiseModel& noise) {
    data.validate();
    if (!(noise.variance() > 0.0)) {
        throw ParameterError("mutual information requires positive noise variance lambda*nu^2");
    }
    if (data.empty()) {
        return 0.0;
    }
    Eigen::MatrixXd A = gram_matrix(data, k) / noise.variance();
    A.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("factorization of I + K/(lambda nu^2) failed");
    }
    return 0.5 * log_det_from_llt(llt);
}

} // namespace simbound
