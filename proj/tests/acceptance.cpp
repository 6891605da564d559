// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Criteria and tolerances are pinned here, not configurable.
//
// Known red: criterion 4b asserts that the resonant-damping divisibility
// threshold bisects to gamma_m/lambda = 0.5. With the decoherence function
// as implemented (W = gamma_m lambda/2 + delta^2/4, kept exactly as written
// next to its cosh/sinh form), |G| revivals provably start at gamma_m =
// lambda, so the located threshold is 1.0 and this check fails. The speed
// targets of criterion 2 and the row identity of criterion 7 require this W;
// no parameterization satisfies both them and the 0.5 boundary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qdyn/dynamics.hpp"
#include "qdyn/nonmarkov.hpp"
#include "qdyn/speed.hpp"

using namespace qdyn;
constexpr double kPi = std::numbers::pi;

namespace {

struct Criterion {
    const char* name;
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }

    ~Criterion() {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
    }
};

const double kThetas[3] = {kPi / 6.0, kPi / 2.0, 5.0 * kPi / 6.0};

double fd_v0(const ModelSpec& m, double theta) {
    return speed_squared_fd(m, {theta, 0.0}, 0.0, 1e-4).v_squared;
}

bool close_rel(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::max(1.0, std::abs(want));
}

// Segment-wise comparison of the ODE oracle against the exact maps. Where
// the time-local rates diverge the generator does not determine the map, so
// integration restarts just past each singular time from the exact state.
struct OracleRun {
    double max_err = 0.0;
    int compared = 0;
    int skipped = 0;
    int segments = 0;
};

OracleRun compare_oracle(const ModelSpec& m, const Eigen::Vector3d& n0,
                         double t1, int n_points, double tol, double guard) {
    const auto singular = rate_singularities(m, 0.0, t1);
    std::vector<std::pair<double, double>> spans;
    double start = 0.0;
    for (double ts : singular) {
        if (ts - guard > start) spans.emplace_back(start, ts - guard);
        start = ts + guard;
    }
    if (t1 > start) spans.emplace_back(start, t1);

    OracleRun run;
    run.segments = static_cast<int>(spans.size());
    const double dt = t1 / (n_points - 1);
    for (const auto& [a, b] : spans) {
        const int first = static_cast<int>(std::ceil(a / dt));
        const int last = static_cast<int>(std::floor(b / dt));
        if (last - first < 1) continue;
        const TimeGrid grid = TimeGrid::uniform(first * dt, last * dt,
                                                last - first + 1);
        const Eigen::Vector3d seg_start = evolve(m, n0, grid.t0);
        const auto ode = ode_oracle_trajectory(m, seg_start, grid, tol);
        for (int k = 0; k < grid.size(); ++k) {
            const Eigen::Vector3d exact = evolve(m, n0, grid.at(k));
            run.max_err = std::max(
                run.max_err,
                (exact - ode.states[k]).lpNorm<Eigen::Infinity>());
            ++run.compared;
        }
    }
    run.skipped = n_points - run.compared;
    return run;
}

}  // namespace

TEST_CASE("criterion 1: fidelity oracle equivalence") {
    Criterion crit{"criterion 1: Bloch fidelity vs matrix fidelity, 1e4 pairs"};
    std::mt19937_64 rng(0xacce551);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Vector3d n1 = oracle::random_in_ball(rng);
        const Eigen::Vector3d n2 = oracle::random_in_ball(rng);
        const double bloch = fidelity(n1, n2);
        const double matrix =
            fidelity_matrix_oracle(density_from_bloch(n1), density_from_bloch(n2));
        worst = std::max(worst, std::abs(bloch - matrix));
    }
    crit.expect(worst <= 1e-10, "max |bloch - matrix| = " + std::to_string(worst));
    CHECK(crit.ok);
}

TEST_CASE("criterion 2: closed-form initial speeds by finite differences") {
    Criterion crit{"criterion 2: v(0)^2 vs finite differences, rel 1e-3"};
    const double rel = 1e-3;

    for (double s : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        for (double theta : kThetas) {
            const double st = std::sin(theta);
            const double want = 2.0 * std::tgamma(s + 1.0) * st * st;
            crit.expect(close_rel(fd_v0(OhmicDephasing{1.0, s}, theta), want, rel),
                        "ohmic s=" + std::to_string(s));
        }
    }

    for (double xi : {0.0, kPi / 4.0, kPi / 2.0}) {
        for (double theta : kThetas) {
            const double st = std::sin(theta);
            const double want =
                0.5 * (2.0 * 0.09 + 1.0 + 4.0 - 3.0 * std::cos(2.0 * xi)) * st * st;
            crit.expect(
                close_rel(fd_v0(PolarizationDephasing{1.0, 0.3, 1.0, 2.0, xi}, theta),
                          want, rel),
                "polarization xi=" + std::to_string(xi));
        }
    }

    for (double gm : {0.1, 0.5, 1.0, 5.0}) {
        for (double theta : kThetas) {
            const double sh = std::sin(0.5 * theta);
            const double want = gm * gm * sh * sh * sh * sh;  // lambda = 1
            crit.expect(close_rel(fd_v0(JaynesCummings{1.0, gm, 0.0}, theta), want, rel),
                        "jc resonance gamma_m=" + std::to_string(gm));
        }
    }
    {   // detuned spot check with W exactly as written
        const double delta = 0.5, gm = 1.0;
        const double w = 0.5 * gm + 0.25 * delta * delta;
        for (double theta : kThetas) {
            const double sh = std::sin(0.5 * theta);
            const double want = (4.0 * w * w - delta * delta) * sh * sh * sh * sh;
            crit.expect(
                close_rel(fd_v0(JaynesCummings{1.0, gm, delta}, theta), want, rel),
                "jc detuned");
        }
    }

    for (double w : {0.0, 0.5, 1.0}) {
        for (double theta : kThetas) {
            const double st = std::sin(theta), ct = std::cos(theta);
            const double want = -4.0 * ct * ct - (1.0 + w * w) * st * st;
            crit.expect(close_rel(fd_v0(PauliTanh{1.0, w}, theta), want, rel),
                        "pauli_tanh omega=" + std::to_string(w));
        }
    }
    for (double w : {0.0, 1.0, 2.0}) {
        for (double theta : kThetas) {
            const double st = std::sin(theta), ct = std::cos(theta);
            const double want = -4.0 * ct * ct - (1.0 - w * w) * st * st;
            crit.expect(close_rel(fd_v0(PauliTan{1.0, w}, theta), want, rel),
                        "pauli_tan omega=" + std::to_string(w));
        }
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 3: monotonicity verdicts") {
    Criterion crit{"criterion 3: strict monotonicity of v(0)^2 in the driving parameter"};
    auto verdict = [](const ModelSpec& family, double lo, double hi) {
        return initial_speed_scan(family, driving_parameter(family), lo, hi, 64,
                                  kPi / 2.0).verdict;
    };
    crit.expect(verdict(OhmicDephasing{1.0, 3.0}, 2.05, 5.0) ==
                    Monotonicity::StrictlyIncreasing,
                "ohmic s");
    crit.expect(verdict(PolarizationDephasing{1.0, 0.3, 1.0, 2.0, 0.0}, 0.0,
                        kPi / 2.0) == Monotonicity::StrictlyIncreasing,
                "polarization xi, omega2 > omega1");
    crit.expect(verdict(PolarizationDephasing{1.0, 0.3, 2.0, 1.0, 0.0}, 0.0,
                        kPi / 2.0) == Monotonicity::StrictlyDecreasing,
                "polarization xi, omega1 > omega2");
    crit.expect(verdict(JaynesCummings{1.0, 1.0, 0.0}, 0.6, 5.0) ==
                    Monotonicity::StrictlyIncreasing,
                "jc gamma_m");
    crit.expect(verdict(PauliTanh{1.0, 0.5}, 1.0 / 64.0, 1.0) ==
                    Monotonicity::StrictlyDecreasing,
                "pauli_tanh omega");
    crit.expect(verdict(PauliTan{1.0, 1.0}, 3.0 / 64.0, 3.0) ==
                    Monotonicity::StrictlyIncreasing,
                "pauli_tan omega");
    CHECK(crit.ok);
}

TEST_CASE("criterion 4: region recovery") {
    Criterion crit{"criterion 4: Markovianity regions recovered numerically"};

    // (a) Ohmic rate-sign flip between s = 2 and s = 2.05.
    const TimeGrid ohmic_grid = TimeGrid::uniform(0.0, 50.0, 50001);
    crit.expect(rate_sign_divisibility(OhmicDephasing{1.0, 2.0}, ohmic_grid).divisible,
                "(a) ohmic s=2 should be divisible");
    crit.expect(
        !rate_sign_divisibility(OhmicDephasing{1.0, 2.05}, ohmic_grid).divisible,
        "(a) ohmic s=2.05 should be indivisible");

    // (b) resonant-damping threshold by bisection on the Choi scan.
    const double located = divisibility_threshold(JaynesCummings{1.0, 1.0, 0.0},
                                                  "gamma_m", 0.1, 2.0, 20.0, 40);
    crit.expect(std::abs(located - 0.5) <= 0.02,
                "(b) threshold located at gamma_m/lambda = " +
                    std::to_string(located) + ", target 0.5 +- 0.02");

    // (c) tan-Pauli indivisible for every tested omega > 0.
    for (double w : {0.5, 1.0, 2.0}) {
        const TimeGrid grid = TimeGrid::uniform(0.0, 20.0, 20001);
        crit.expect(!rate_sign_divisibility(PauliTan{1.0, w}, grid).divisible,
                    "(c) pauli_tan omega=" + std::to_string(w));
    }
    crit.expect(!cp_divisibility_scan(PauliTan{1.0, 2.0}, 10.0).divisible,
                "(c) pauli_tan Choi scan");

    // (d) tanh-Pauli: CP-indivisible with zero backflow, simultaneously.
    for (double w : {0.25, 0.5, 1.0}) {
        const ModelSpec m = PauliTanh{1.0, w};
        crit.expect(!cp_divisibility_scan(m, 20.0).divisible,
                    "(d) pauli_tanh omega=" + std::to_string(w) + " divisibility");
        crit.expect(blp_measure(m, 20.0).measure <= 1e-8,
                    "(d) pauli_tanh omega=" + std::to_string(w) + " backflow");
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 5: dynamics oracle") {
    Criterion crit{"criterion 5: analytic maps vs adaptive RK on [0, 10], 1e-8"};
    const Eigen::Vector3d n0 = bloch_from_angles({1.1, 0.4});
    struct Set {
        const char* label;
        ModelSpec model;
    };
    const std::vector<Set> sets = {
        {"ohmic s=1", OhmicDephasing{1.0, 1.0}},
        {"ohmic s=3", OhmicDephasing{1.0, 3.0}},
        {"jc gamma_m=0.1", JaynesCummings{1.0, 0.1, 0.0}},
        {"jc gamma_m=5", JaynesCummings{1.0, 5.0, 0.0}},
        {"pauli_tanh omega=1", PauliTanh{1.0, 1.0}},
        {"polarization xi=pi/4", PolarizationDephasing{1.0, 0.3, 1.0, 2.0, kPi / 4}},
    };
    for (const auto& set : sets) {
        const auto run = compare_oracle(set.model, n0, 10.0, 2001, 1e-10, 0.02);
        crit.expect(run.max_err <= 1e-8,
                    std::string(set.label) + " max_err=" + std::to_string(run.max_err));
        crit.expect(run.compared >= 2001 - 60 * run.segments, // guard bands only
                    std::string(set.label) + " coverage");
        std::printf("  [criterion 5] %-22s max_err=%.3e over %d/%d points, %d segment(s)\n",
                    set.label, run.max_err, run.compared, 2001, run.segments);
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 6: backflow measure positivity and zeros") {
    Criterion crit{"criterion 6: blp positive in backflow regions, zero outside"};
    struct Probe {
        const char* label;
        ModelSpec model;
        double horizon;
        bool positive;
    };
    const std::vector<Probe> probes = {
        {"ohmic s=3", OhmicDephasing{1.0, 3.0}, 50.0, true},
        {"ohmic s=4", OhmicDephasing{1.0, 4.0}, 50.0, true},
        {"jc gamma_m=5", JaynesCummings{1.0, 5.0, 0.0}, 20.0, true},
        {"pauli_tan omega=2", PauliTan{1.0, 2.0}, 20.0, true},
        {"ohmic s=1", OhmicDephasing{1.0, 1.0}, 50.0, false},
        {"jc gamma_m=0.1", JaynesCummings{1.0, 0.1, 0.0}, 20.0, false},
        {"pauli_tan omega=0", PauliTan{1.0, 0.0}, 20.0, false},
    };
    for (const auto& probe : probes) {
        const double n = blp_measure(probe.model, probe.horizon).measure;
        if (probe.positive)
            crit.expect(n > 1e-3, std::string(probe.label) + " blp=" + std::to_string(n));
        else
            crit.expect(n <= 1e-8, std::string(probe.label) + " blp=" + std::to_string(n));
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 7: resonant row is the detuned row at delta=0") {
    Criterion crit{"criterion 7: jc speed rows agree at delta=0 to 1e-12"};
    double worst = 0.0;
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (double gm : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            for (double theta : kThetas) {
                const double general = initial_speed_squared_closed_form(
                    JaynesCummings{lambda, gm, 0.0}, theta);
                const double sh = std::sin(0.5 * theta);
                const double resonant = gm * gm * lambda * lambda * sh * sh * sh * sh;
                worst = std::max(worst, std::abs(general - resonant) /
                                            std::max(1.0, std::abs(resonant)));
            }
        }
    }
    crit.expect(worst <= 1e-12, "max rel gap " + std::to_string(worst));
    CHECK(crit.ok);
}

TEST_CASE("criterion 8: damping speed comes from fidelity curvature only") {
    Criterion crit{
        "criterion 8: no analytic damping speed is exposed; curvature route covers jc"};
    // The time-dependent closed form printed for the damping family is not
    // reproduced by the dynamics (its initial value disagrees with the
    // sin^4(theta/2) rows) and is deliberately not implemented.
    crit.expect([&] {
        try {
            analytic_speed_squared(JaynesCummings{1.0, 1.0, 0.0}, 1.0, 0.5);
            return false;
        } catch (const UnsupportedModelError&) {
            return true;
        }
    }(), "analytic route must refuse the damping family");

    // The curvature route is available and matches the closed initial form.
    const double fd = fd_v0(JaynesCummings{1.0, 2.0, 0.0}, kPi / 2.0);
    const double want = initial_speed_squared_closed_form(JaynesCummings{1.0, 2.0, 0.0}, kPi / 2.0);
    crit.expect(close_rel(fd, want, 1e-3), "fd route must match the closed form");
    CHECK(crit.ok);
}
