#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "simbound/domain.hpp"

namespace simbound {

enum class KernelFamily {
    SquaredExponential,
    Matern52,
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary kernel with per-dimension lengthscales. k(z,z) equals
/// signal_variance for every z; both families are universal.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    std::vector<double> lengthscales;
    double signal_variance = 1.0;

    std::size_t dim() const { return lengthscales.size(); }
    void validate() const;
};

/// k(z, z2). Symmetric, nonnegative; throws DimensionError on mismatch.
double kernel_eval(const KernelSpec& k, const TestPoint& z, const TestPoint& z2);

/// Ordered observation record: points[i] was observed as observations[i].
struct Dataset {
    std::vector<TestPoint> points;
    std::vector<double> observations;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    void append(TestPoint z, double y);
    void validate() const;
};

/// Observation noise xi ~ N(0, lambda * nu^2).
struct NoiseModel {
    double lambda = 1.0;
    double nu = 1.0;

    double variance() const { return lambda * nu * nu; }
};

/// Posterior Gaussian-process model over a dataset. Immutable after fit();
/// concurrent queries are safe. Callers refit to add data.
class GPModel {
public:
    const KernelSpec& kernel() const { return kernel_; }
    double lambda() const { return lambda_; }
    const Dataset& data() const { return data_; }
    double jitter() const { return jitter_; }
    std::size_t size() const { return data_.size(); }

    /// Mean of the posterior at z: k_n(z)^T (K + lambda I)^-1 y.
    double posterior_mean(const TestPoint& z) const;

    /// Standard deviation of the posterior at z:
    /// sqrt(max(0, k(z,z) - k_n(z)^T (K + lambda I)^-1 k_n(z))).
    double posterior_std(const TestPoint& z) const;

    /// Mean and std in one pass (shares the covariance vector).
    std::pair<double, double> posterior(const TestPoint& z) const;

    /// Gram matrix K (without the lambda/jitter diagonal shift).
    const Eigen::MatrixXd& gram() const { return K_; }

    friend GPModel fit(const Dataset& data, const KernelSpec& k, double lambda);

private:
    KernelSpec kernel_;
    double lambda_ = 0.0;
    double jitter_ = 0.0;
    Dataset data_;
    Eigen::MatrixXd K_;
    Eigen::LLT<Eigen::MatrixXd> chol_;  // factor of K + lambda I + jitter I
    Eigen::VectorXd alpha_;             // (K + lambda I + jitter I)^-1 y

    Eigen::VectorXd cov_vector(const TestPoint& z) const;
};

/// Fits the posterior model. Jitter starts at 1e-10 * trace(K)/n and
/// escalates tenfold up to 1e-4 * trace(K)/n before raising NumericalError.
GPModel fit(const Dataset& data, const KernelSpec& k, double lambda);

double posterior_mean(const GPModel& m, const TestPoint& z);
double posterior_std(const GPModel& m, const TestPoint& z);

/// ln det((1+eta) I + K) over the model's Gram matrix. Nonnegative for
/// eta >= 0 since K is positive semi-definite.
double log_det_scaled(const GPModel& m, double eta);

/// Mutual information between noisy observations and latent values at the
/// dataset's points: 0.5 * ln det(I + K / (lambda nu^2)). Diagnostic.
double mutual_information(const Dataset& data, const KernelSpec& k, const NoiseModel& noise);

} // namespace simbound
