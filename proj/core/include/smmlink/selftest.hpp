#pragma once

// Analytic-oracle and property checks runnable from the command line.

#include <string>
#include <vector>

#include "smmlink/config.hpp"

namespace smmlink {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

[[nodiscard]] CheckResult check_laguerre_recurrence();
[[nodiscard]] CheckResult check_fiber_orthonormality(const LinkConfig& config);
[[nodiscard]] CheckResult check_rayleigh_ks(const LinkConfig& config);
[[nodiscard]] CheckResult check_direction_invariance(const LinkConfig& config);
[[nodiscard]] CheckResult check_power_conservation(const LinkConfig& config);
[[nodiscard]] CheckResult check_polynomial_exactness();
[[nodiscard]] CheckResult check_mean_current_moments(const LinkConfig& config);
[[nodiscard]] CheckResult check_seed_determinism(const LinkConfig& config);
[[nodiscard]] CheckResult check_far_field_oracle(const LinkConfig& config);
[[nodiscard]] CheckResult check_zfbf_identity(const LinkConfig& config);

[[nodiscard]] std::vector<CheckResult> run_selftest(const LinkConfig& config);

/// Largest Kolmogorov-Smirnov distance between samples and cdf.
[[nodiscard]] double ks_distance(std::vector<double> samples, double (*cdf)(double, double),
                                 double sigma);

}  // namespace smmlink
