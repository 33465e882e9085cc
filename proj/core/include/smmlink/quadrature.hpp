#pragma once

// Complex 2-D quadrature over the normalized aperture domain
// x in [0, 1], theta in [0, 2 pi).

#include <complex>
#include <functional>
#include <vector>

namespace smmlink {

enum class AngularRule { trapezoid, gauss_legendre };

struct QuadratureSpec {
    int radial_order = 128;
    int angular_order = 256;
    double rel_tol = 1e-8;
    int max_doublings = 4;
    AngularRule angular_rule = AngularRule::trapezoid;

    /// Throws ValidationError: orders must be powers of two in [8, 4096].
    void validate() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] GaussLegendreRule gauss_legendre_nodes(int order);

/// Cached, immutable rule; safe to call from multiple threads.
[[nodiscard]] const GaussLegendreRule& gauss_legendre_cached(int order);

/// Tensor-product grid over [0,1] x [0,2pi).  Point (i, j) is stored at
/// i * angular_size() + j.  weights already include dx dtheta but not the
/// polar Jacobian.
struct TensorGrid {
    std::vector<double> x;
    std::vector<double> theta;
    std::vector<double> x_weights;
    std::vector<double> theta_weights;

    [[nodiscard]] std::size_t radial_size() const { return x.size(); }
    [[nodiscard]] std::size_t angular_size() const { return theta.size(); }
    [[nodiscard]] std::size_t size() const { return x.size() * theta.size(); }
};

[[nodiscard]] TensorGrid make_tensor_grid(int radial_order, int angular_order,
                                          AngularRule rule = AngularRule::trapezoid);

struct QuadratureResult {
    std::complex<double> value{};
    double error_estimate = 0.0;
    bool converged = false;
    int radial_order = 0;
    int angular_order = 0;
};

using Integrand2d = std::function<std::complex<double>(double x, double theta)>;

/// Evaluates the integral at the spec's orders and doubles both until
/// successive estimates differ by less than rel_tol times the larger of the
/// result magnitude and the integral of |f|.  A result that runs out of
/// doublings is returned with converged == false.
[[nodiscard]] QuadratureResult integrate_2d(const Integrand2d& f, const QuadratureSpec& spec);

/// Single evaluation on a fixed grid, no refinement.
[[nodiscard]] std::complex<double> integrate_on_grid(const Integrand2d& f, const TensorGrid& grid);

/// Gauss-Legendre integral of a real function over [a, b].
[[nodiscard]] double integrate_1d(const std::function<double(double)>& f, double a, double b,
                                  int order);

}  // namespace smmlink
