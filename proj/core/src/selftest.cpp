#include "smmlink/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "smmlink/channel.hpp"
#include "smmlink/coupling.hpp"
#include "smmlink/errors.hpp"
#include "smmlink/optimize.hpp"
#include "smmlink/parallel.hpp"
#include "smmlink/random.hpp"

namespace smmlink {

namespace {

using cplx = std::complex<double>;
using std::numbers::pi;

template <typename F>
CheckResult timed(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

QuadratureSpec fixed_spec(const QuadratureSpec& base) {
    QuadratureSpec s = base;
    s.radial_order = std::max(s.radial_order, 128);
    s.angular_order = std::max(s.angular_order, 256);
    return s;
}

}  // namespace

double ks_distance(std::vector<double> samples, double (*cdf)(double, double), double sigma) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i], sigma);
        worst = std::max({worst, std::abs(f - static_cast<double>(i) / n),
                          std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return worst;
}

CheckResult check_laguerre_recurrence() {
    return timed("laguerre_recurrence", [](CheckResult& r) {
        double worst = 0.0;
        for (int a = 0; a <= 6; ++a) {
            const double A = a;
            for (double x = 0.0; x <= 12.0; x += 0.25) {
                const double terms[4][4] = {
                    {1.0, 0, 0, 0},
                    {1.0 + A, -x, 0, 0},
                    {(A + 1) * (A + 2) / 2, -(A + 2) * x, x * x / 2, 0},
                    {(A + 1) * (A + 2) * (A + 3) / 6, -(A + 2) * (A + 3) * x / 2,
                     (A + 3) * x * x / 2, -x * x * x / 6},
                };
                for (int p = 0; p <= 3; ++p) {
                    double ref = 0.0;
                    double scale = 0.0;
                    for (double t : terms[p]) {
                        ref += t;
                        scale += std::abs(t);
                    }
                    worst = std::max(worst, std::abs(laguerre_assoc(p, a, x) - ref) / scale);
                }
            }
        }
        r.passed = worst < 1e-12;
        r.detail = "max relative error " + sci(worst);
    });
}

CheckResult check_fiber_orthonormality(const LinkConfig& config) {
    return timed("fiber_orthonormality", [&](CheckResult& r) {
        std::set<ModeIndex> unique;
        for (const auto& m : six_mode_fiber()) unique.insert(m);
        for (const auto& m : oam_fiber_modes(6)) unique.insert(m);
        const std::vector<ModeIndex> modes(unique.begin(), unique.end());
        const FiberSpec fiber = FiberSpec::from_backprop_radius(config.backprop_radius_m, modes);
        const double outer = 8.0 * fiber.backprop_radius;
        QuadratureSpec spec;
        spec.radial_order = 128;
        spec.angular_order = 256;
        double worst = 0.0;
        for (std::size_t a = 0; a < modes.size(); ++a) {
            for (std::size_t b = a; b < modes.size(); ++b) {
                const auto q = integrate_2d(
                    [&](double x, double th) {
                        const double rr = x * outer;
                        return fiber_mode_backprop(modes[a], fiber, rr, th) *
                               std::conj(fiber_mode_backprop(modes[b], fiber, rr, th)) *
                               (outer * outer * x);
                    },
                    spec);
                const double target = a == b ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(q.value - target));
            }
        }
        r.passed = worst < 1e-6;
        r.detail = std::to_string(modes.size()) + " modes, max |<u_k,u_k'> - delta| " + sci(worst);
    });
}

CheckResult check_rayleigh_ks(const LinkConfig& config) {
    return timed("rayleigh_ks", [&](CheckResult& r) {
        const MisalignmentStats stats = config.misalignment();
        const auto s = sample_misalignment(stats, 10000, config.seed);
        std::vector<double> d, e;
        for (const auto& m : s) {
            d.push_back(m.displacement);
            e.push_back(m.tilt);
        }
        const double kd = ks_distance(d, rayleigh_cdf, stats.sigma_displacement());
        const double ke = ks_distance(e, rayleigh_cdf, stats.sigma_aoa);
        r.passed = kd < 0.01 && ke < 0.01;
        r.detail = "KS(d) " + sci(kd) + ", KS(eps) " + sci(ke) + " at n = 10000";
    });
}

CheckResult check_direction_invariance(const LinkConfig& config) {
    return timed("direction_invariance", [&](CheckResult& r) {
        const BeamSource src = config.source();
        const FiberSpec fiber = config.efficiency_fiber();
        const double diameter = 2.0 * fiber.backprop_radius;
        const MisalignmentStats stats = config.misalignment();
        const double d = std::max(stats.sigma_displacement(), 1e-4);
        const double eps = std::max(stats.sigma_aoa, 1e-5);
        const QuadratureSpec spec = fixed_spec(config.quadrature);
        double worst = 0.0;
        const std::pair<ModeIndex, ModeIndex> pairs[] = {
            {{0, 0}, {0, 0}}, {{0, 0}, {0, 1}}, {{0, 1}, {0, 1}}, {{0, 2}, {0, 1}}};
        for (const auto& [tx, fib] : pairs) {
            const BeamGeometry geom = src.geometry(tx);
            const double half = 0.5 * diameter;
            auto h_at = [&](double psi) {
                return integrate_2d(
                           [&](double x, double th) {
                               const double rr = x * half;
                               return lg_field_misaligned(geom, rr, th - psi, d, eps) *
                                      std::conj(fiber_mode_backprop(fib, fiber, rr, th)) *
                                      (half * half * x);
                           },
                           spec)
                    .value;
            };
            const double ref = std::abs(h_at(0.0));
            for (double psi : {pi / 4, pi / 2, pi})
                worst = std::max(worst, std::abs(std::abs(h_at(psi)) - ref));
        }
        r.passed = worst < 1e-8;
        r.detail = "max ||h(psi)| - |h(0)|| " + sci(worst);
    });
}

CheckResult check_power_conservation(const LinkConfig& config) {
    return timed("power_conservation", [&](CheckResult& r) {
        const BeamSource src = config.source();
        const FiberSpec fiber = config.efficiency_fiber();
        const MisalignmentStats stats = config.misalignment();
        const double sd = stats.sigma_displacement();
        const double se = stats.sigma_aoa;
        double worst = -1.0;
        for (double beta : {0.5, 1.0, 2.0}) {
            const double diameter = 2.0 * beta * fiber.backprop_radius;
            const OverlapEngine engine(fixed_spec(config.quadrature), diameter, fiber,
                                       fiber.supported_modes);
            for (const ModeIndex tx : {ModeIndex{0, 0}, ModeIndex{0, 1}, ModeIndex{0, 2},
                                       ModeIndex{1, 0}}) {
                const BeamGeometry geom = src.geometry(tx);
                for (const auto& [d, eps] : {std::pair{0.0, 0.0}, std::pair{sd, se},
                                             std::pair{3 * sd, 3 * se}}) {
                    const auto coords = engine.displace(d);
                    std::vector<cplx> field, tilt;
                    engine.sample(geom, coords, field);
                    engine.tilt_phasors(coords, geom.wavenumber, eps, tilt);
                    std::vector<cplx> h(fiber.supported_modes.size());
                    engine.overlaps(field, tilt, h);
                    double total = 0.0;
                    for (const auto& v : h) total += std::norm(v);
                    worst = std::max(worst, total - engine.aperture_power(field));
                }
            }
        }
        r.passed = worst <= 1e-6;
        r.detail = "max sum_k |h_k|^2 - P_A = " + sci(worst);
    });
}

CheckResult check_polynomial_exactness() {
    return timed("polynomial_exactness", [](CheckResult& r) {
        double worst = 0.0;
        for (int n : {2, 3, 4, 5, 8, 16, 32, 64, 128}) {
            for (int m = 0; m <= 2 * n - 1 && m <= 60; ++m) {
                const double v = integrate_1d([m](double x) { return std::pow(x, m); }, 0.0, 1.0, n);
                const double exact = 1.0 / (m + 1);
                worst = std::max(worst, std::abs(v - exact) / exact);
            }
        }
        r.passed = worst < 1e-12;
        r.detail = "max relative error " + sci(worst);
    });
}

CheckResult check_mean_current_moments(const LinkConfig& config) {
    return timed("mean_current_moments", [&](CheckResult& r) {
        const ComplexMatrix H(3, 3,
                              {{0.8, 0.1}, {0.25, -0.2}, {0.05, 0.1},
                               {0.3, 0.1}, {0.7, 0.0}, {-0.15, 0.2},
                               {0.1, -0.05}, {0.2, 0.3}, {0.6, -0.1}});
        const std::vector<double> xi{1e-3, 2e-3, 0.5e-3};
        const double R = config.responsivity_a_per_w;
        const MeanCurrent mean = mean_received_current(H, xi, R);
        const CounterStream stream(config.seed, 0x4D4F4D54ULL);
        const std::size_t draws = 100000;
        std::vector<double> acc(3, 0.0);
        std::vector<double> s(3);
        for (std::size_t j = 0; j < draws; ++j) {
            const CounterStream sub = stream.substream(j);
            for (std::size_t i = 0; i < 3; ++i) s[i] = sub.rayleigh(i, std::sqrt(xi[i] / 2.0));
            const auto y = received_current(H, s, R);
            for (std::size_t k = 0; k < 3; ++k) acc[k] += y[k];
        }
        double worst = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            worst = std::max(worst, std::abs(acc[k] / draws - mean.total[k]) / mean.total[k]);
        r.passed = worst < 0.01;
        r.detail = "max relative deviation " + sci(worst) + " over 1e5 draws";
    });
}

CheckResult check_seed_determinism(const LinkConfig& config) {
    return timed("seed_determinism", [&](CheckResult& r) {
        const MisalignmentStats stats = config.misalignment();
        const auto a = sample_misalignment(stats, 1000, config.seed, 4,
                                           LaserPhaseModel::independent_uniform);
        const auto b = sample_misalignment(stats, 1000, config.seed, 4,
                                           LaserPhaseModel::independent_uniform);
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            same = same && a[i].displacement == b[i].displacement && a[i].tilt == b[i].tilt &&
                   a[i].laser_phases == b[i].laser_phases;

        // Thread count must not change the draws.
        std::vector<double> one(500), many(500);
        parallel_for(one.size(), [&](std::size_t i) {
            one[i] = misalignment_at(stats, config.seed, i).displacement;
        }, 1);
        parallel_for(many.size(), [&](std::size_t i) {
            many[i] = misalignment_at(stats, config.seed, i).displacement;
        }, 4);

        LinkConfig small = config;
        small.quadrature.radial_order = 32;
        small.quadrature.angular_order = 64;
        const auto ens = small.ensemble(first_oam_modes(3), 6e-3);
        const RealizationBank b1(ens, first_oam_modes(3), 6e-3, stats, 100, config.seed);
        const RealizationBank b2(ens, first_oam_modes(3), 6e-3, stats, 100, config.seed);
        const std::vector<std::size_t> idx{0, 1, 2};
        const auto c1 = b1.capacity(Scheme::zfbf, idx, small.detector(), small.budget());
        const auto c2 = b2.capacity(Scheme::zfbf, idx, small.detector(), small.budget());

        r.passed = same && one == many && c1.mean == c2.mean && c1.std_error == c2.std_error;
        r.detail = std::string("samples ") + (same ? "identical" : "differ") + ", threads " +
                   (one == many ? "identical" : "differ") + ", capacity " +
                   (c1.mean == c2.mean ? "identical" : "differs");
    });
}

CheckResult check_far_field_oracle(const LinkConfig& config) {
    return timed("far_field_oracle", [&](CheckResult& r) {
        double worst = 0.0;
        for (int i = 10; i <= 400; ++i) {
            const double beta = 0.01 * i;
            worst = std::max(worst, std::abs(far_field_smf_efficiency(beta) -
                                             far_field_smf_efficiency_quadrature(beta, config.quadrature)));
        }
        r.passed = worst < 1e-10;
        r.detail = "max |closed form - quadrature| " + sci(worst) + " over beta in [0.1, 4]";
    });
}

CheckResult check_zfbf_identity(const LinkConfig& config) {
    return timed("zfbf_identity", [&](CheckResult& r) {
        const auto modes = first_oam_modes(4);
        const double diameter = 8e-3;
        LinkConfig c = config;
        c.quadrature.radial_order = 64;
        c.quadrature.angular_order = 128;
        const auto ens = c.ensemble(modes, diameter);
        const MisalignmentStats stats = c.misalignment();
        const FiberSpec fiber = fiber_for_aperture(ens, diameter);
        const auto rows = matching_fiber_modes(modes, fiber);
        const ChannelSampler sampler(ens.source, modes, fiber, rows, diameter, ens.quadrature);
        const CounterStream amp(c.seed, 0x5A46ULL);
        double worst = 0.0;
        std::size_t checked = 0;
        for (std::size_t j = 0; j < 200; ++j) {
            const Misalignment m = misalignment_at(stats, c.seed, j);
            const auto ch = make_channel(sampler.couplings(m.displacement, m.tilt), modes, rows);
            Precoder pre;
            try {
                pre = zfbf_precoder(ch.H_est);
            } catch (const SingularChannel&) {
                continue;
            }
            std::vector<cplx> s(4);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                s[i] = amp.substream(j).rayleigh(i, 1.0);
                norm2 += std::norm(s[i]);
            }
            const auto y = (ch.H * pre.inverse).apply(s);
            for (std::size_t k = 0; k < 4; ++k)
                worst = std::max(worst, std::abs(std::norm(y[k]) - std::norm(s[k])) / norm2);
            ++checked;
        }
        r.passed = checked > 0 && worst < 1e-8;
        r.detail = std::to_string(checked) + " realizations, max error / |s|^2 " + sci(worst);
    });
}

std::vector<CheckResult> run_selftest(const LinkConfig& config) {
    return {check_laguerre_recurrence(),       check_fiber_orthonormality(config),
            check_rayleigh_ks(config),         check_direction_invariance(config),
            check_power_conservation(config),  check_polynomial_exactness(),
            check_mean_current_moments(config), check_seed_determinism(config),
            check_far_field_oracle(config),    check_zfbf_identity(config)};
}

}  // namespace smmlink
