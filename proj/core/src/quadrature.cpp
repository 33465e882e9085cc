#include "smmlink/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "smmlink/errors.hpp"

namespace smmlink {

namespace {

using std::numbers::pi;

constexpr int kMinOrder = 8;
constexpr int kMaxOrder = 4096;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Sums {
    std::complex<double> value{};
    double magnitude = 0.0;
};

Sums sum_on_grid(const Integrand2d& f, const TensorGrid& grid) {
    Sums out;
    for (std::size_t i = 0; i < grid.radial_size(); ++i) {
        std::complex<double> row{};
        double row_mag = 0.0;
        for (std::size_t j = 0; j < grid.angular_size(); ++j) {
            const auto v = f(grid.x[i], grid.theta[j]);
            row += grid.theta_weights[j] * v;
            row_mag += grid.theta_weights[j] * std::abs(v);
        }
        out.value += grid.x_weights[i] * row;
        out.magnitude += grid.x_weights[i] * row_mag;
    }
    return out;
}

}  // namespace

void QuadratureSpec::validate() const {
    auto check_order = [](int n, const char* name) {
        if (!is_power_of_two(n) || n < kMinOrder || n > kMaxOrder)
            throw ValidationError(name, "must be a power of two in [8, 4096], got " +
                                            std::to_string(n));
    };
    check_order(radial_order, "quadrature.radial_order");
    check_order(angular_order, "quadrature.angular_order");
    if (!(rel_tol > 0.0)) throw ValidationError("quadrature.rel_tol", "must be > 0");
    if (max_doublings < 0) throw ValidationError("quadrature.max_doublings", "must be >= 0");
}

GaussLegendreRule gauss_legendre_nodes(int order) {
    if (order < 2) throw ValidationError("order", "Gauss-Legendre order must be >= 2");
    GaussLegendreRule rule;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton on P_n from the Tricomi initial guess.
        double x = std::cos(pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

const GaussLegendreRule& gauss_legendre_cached(int order) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const GaussLegendreRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<const GaussLegendreRule>(gauss_legendre_nodes(order));
    return *slot;
}

TensorGrid make_tensor_grid(int radial_order, int angular_order, AngularRule rule) {
    TensorGrid grid;
    const auto& gl = gauss_legendre_cached(radial_order);
    grid.x.resize(radial_order);
    grid.x_weights.resize(radial_order);
    for (int i = 0; i < radial_order; ++i) {
        grid.x[i] = 0.5 * (gl.nodes[i] + 1.0);
        grid.x_weights[i] = 0.5 * gl.weights[i];
    }
    grid.theta.resize(angular_order);
    grid.theta_weights.resize(angular_order);
    if (rule == AngularRule::trapezoid) {
        const double h = 2.0 * pi / angular_order;
        for (int j = 0; j < angular_order; ++j) {
            grid.theta[j] = j * h;
            grid.theta_weights[j] = h;
        }
    } else {
        const auto& ga = gauss_legendre_cached(angular_order);
        for (int j = 0; j < angular_order; ++j) {
            grid.theta[j] = pi * (ga.nodes[j] + 1.0);
            grid.theta_weights[j] = pi * ga.weights[j];
        }
    }
    return grid;
}

std::complex<double> integrate_on_grid(const Integrand2d& f, const TensorGrid& grid) {
    return sum_on_grid(f, grid).value;
}

QuadratureResult integrate_2d(const Integrand2d& f, const QuadratureSpec& spec) {
    spec.validate();
    int nr = spec.radial_order;
    int na = spec.angular_order;
    Sums prev = sum_on_grid(f, make_tensor_grid(nr, na, spec.angular_rule));
    QuadratureResult out;
    out.value = prev.value;
    out.radial_order = nr;
    out.angular_order = na;
    out.error_estimate = std::numeric_limits<double>::infinity();
    for (int step = 0; step < spec.max_doublings; ++step) {
        const int next_r = std::min(2 * nr, kMaxOrder);
        const int next_a = std::min(2 * na, kMaxOrder);
        if (next_r == nr && next_a == na) break;
        nr = next_r;
        na = next_a;
        const Sums next = sum_on_grid(f, make_tensor_grid(nr, na, spec.angular_rule));
        const double diff = std::abs(next.value - prev.value);
        const double scale = std::max(std::abs(next.value), next.magnitude);
        out.value = next.value;
        out.radial_order = nr;
        out.angular_order = na;
        out.error_estimate = scale > 0.0 ? diff / scale : diff;
        prev = next;
        if (diff <= spec.rel_tol * scale) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, int order) {
    const auto& gl = gauss_legendre_cached(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return sum * half;
}

}  // namespace smmlink
