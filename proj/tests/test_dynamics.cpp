#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qdyn/dynamics.hpp"

using namespace qdyn;
constexpr double kPi = std::numbers::pi;

namespace {

double max_deviation(const Trajectory& a, const Trajectory& b) {
    REQUIRE(a.states.size() == b.states.size());
    double worst = 0.0;
    for (size_t k = 0; k < a.states.size(); ++k)
        worst = std::max(worst, (a.states[k] - b.states[k]).lpNorm<Eigen::Infinity>());
    return worst;
}

}  // namespace

TEST_CASE("evolve basics") {
    const Eigen::Vector3d n0 = bloch_from_angles({1.0, 0.7});
    CHECK((evolve(OhmicDephasing{1.0, 2.0}, n0, 0.0) - n0).norm() < 1e-14);

    // Dephasing leaves the poles alone.
    for (double z : {1.0, -1.0}) {
        const Eigen::Vector3d pole(0, 0, z);
        CHECK((evolve(OhmicDephasing{1.0, 3.0}, pole, 2.0) - pole).norm() < 1e-12);
        CHECK((evolve(PolarizationDephasing{1.0, 0.3, 1.0, 2.0, 0.6}, pole, 2.0) -
               pole).norm() < 1e-12);
    }

    // Damping from the south pole: z(t) = 1 - 2 |G|^2.
    const ModelSpec jc = JaynesCummings{1.0, 1.0, 0.0};
    for (double t : {0.3, 1.0, 2.5}) {
        const double g2 = std::norm(decoherence_function(jc, t));
        const Eigen::Vector3d n = evolve(jc, Eigen::Vector3d(0, 0, -1), t);
        CHECK(std::abs(n[2] - (1.0 - 2.0 * g2)) < 1e-12);
        CHECK(std::abs(n[0]) < 1e-14);
    }
}

TEST_CASE("trajectory basics") {
    const Eigen::Vector3d n0 = bloch_from_angles({kPi / 2, 0.0});
    const auto traj = trajectory(OhmicDephasing{1.0, 1.0}, n0,
                                 TimeGrid::uniform(0.0, 1.0, 2));
    REQUIRE(traj.states.size() == 2);
    CHECK((traj.states[0] - n0).norm() < 1e-14);

    // Identity dynamics.
    const auto constant = trajectory(PauliTan{0.0, 0.0}, n0,
                                     TimeGrid::uniform(0.0, 5.0, 11));
    for (const auto& n : constant.states) CHECK((n - n0).norm() < 1e-14);

    // s = 3: the transverse radius dips and partially revives.
    const auto nm = trajectory(OhmicDephasing{1.0, 3.0}, n0,
                               TimeGrid::uniform(0.0, 20.0, 2001));
    std::vector<double> radius;
    for (const auto& n : nm.states) radius.push_back(std::hypot(n[0], n[1]));
    const auto min_it = std::min_element(radius.begin(), radius.end());
    CHECK(min_it != radius.end() - 1);
    CHECK(radius.back() > *min_it + 1e-3);
    const double expected_min = std::exp(-oracle::ohmic_upsilon_closed(
        1.0, 3.0, std::tan(kPi / 3.0)));
    CHECK(*min_it == doctest::Approx(expected_min).epsilon(1e-4));
}

TEST_CASE("generator at pinned points") {
    // Any Pauli variant at t = 0 has gamma = (lambda/2, lambda/2, 0).
    const auto pauli = generator(PauliTanh{1.0, 0.7}, 0.0);
    CHECK(pauli.linear.diagonal().isApprox(Eigen::Vector3d(-1, -1, -2), 1e-14));
    CHECK(pauli.affine.norm() == 0.0);

    const auto ohmic0 = generator(OhmicDephasing{1.0, 2.0}, 0.0);
    CHECK(ohmic0.linear.norm() < 1e-14);

    // The north pole is stationary under damping at every regular time.
    const ModelSpec jc = JaynesCummings{1.0, 0.8, 0.3};
    for (double t : {0.1, 1.0, 3.0}) {
        const auto gen = generator(jc, t);
        CHECK((gen.linear * Eigen::Vector3d(0, 0, 1) + gen.affine).norm() < 1e-12);
    }
}

TEST_CASE("ODE oracle matches the analytic maps on regular windows") {
    const Eigen::Vector3d n0 = bloch_from_angles({1.1, 0.4});
    const TimeGrid grid = TimeGrid::uniform(0.0, 10.0, 201);
    const double tol = 1e-10;
    for (const auto& m : std::vector<ModelSpec>{
             OhmicDephasing{1.0, 1.0}, OhmicDephasing{1.0, 3.0},
             JaynesCummings{1.0, 0.1, 0.0}, PauliTanh{1.0, 1.0},
             JaynesCummings{1.0, 1.0, 0.5}}) {
        const auto exact = trajectory(m, n0, grid);
        const auto ode = ode_oracle_trajectory(m, n0, grid, tol);
        CHECK(max_deviation(exact, ode) < 10.0 * std::max(tol, 1e-9));
    }
}

TEST_CASE("pure-rotation dephasing conserves the transverse radius") {
    const ModelSpec m = PolarizationDephasing{0.8, 0.0, 1.4, 1.4, 0.3};
    const Eigen::Vector3d n0 = bloch_from_angles({kPi / 2, 1.0});
    const TimeGrid grid = TimeGrid::uniform(0.0, 8.0, 161);
    const auto ode = ode_oracle_trajectory(m, n0, grid, 1e-10);
    const auto exact = trajectory(m, n0, grid);
    CHECK(max_deviation(exact, ode) < 1e-8);
    for (const auto& n : ode.states) CHECK(std::abs(n.norm() - 1.0) < 1e-8);
}

TEST_CASE("integrator refuses to cross a rate singularity") {
    const Eigen::Vector3d n0 = bloch_from_angles({kPi / 2, 0.0});
    // tan-Pauli rates diverge at omega t = pi/2 ~ 0.785.
    CHECK_THROWS_AS(ode_oracle_trajectory(PauliTan{1.0, 2.0}, n0,
                                          TimeGrid::uniform(0.0, 1.0, 21), 1e-9),
                    IntegrationError);
    try {
        ode_oracle_trajectory(PauliTan{1.0, 2.0}, n0,
                              TimeGrid::uniform(0.0, 1.0, 21), 1e-9);
    } catch (const IntegrationError& e) {
        CHECK(std::abs(e.t - kPi / 4.0) < 0.05);
    }
}

TEST_CASE("trajectories stay inside the Bloch ball") {
    std::mt19937_64 rng(0xba11);
    const TimeGrid grid = TimeGrid::uniform(0.0, 15.0, 301);
    for (const auto& m : std::vector<ModelSpec>{
             OhmicDephasing{1.0, 4.0}, PolarizationDephasing{1.0, 0.3, 1.0, 2.0, kPi / 4},
             JaynesCummings{1.0, 5.0, 0.0}, PauliTanh{1.0, 1.0}, PauliTan{1.0, 2.0}}) {
        for (int trial = 0; trial < 8; ++trial) {
            const Eigen::Vector3d n0 = trial % 2 == 0 ? oracle::random_on_sphere(rng)
                                                      : oracle::random_in_ball(rng);
            for (const auto& n : trajectory(m, n0, grid).states)
                CHECK(n.squaredNorm() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("constant-rate reductions compose as a semigroup") {
    // omega = 0 freezes the rates; only then is the family time-homogeneous.
    for (const auto& m :
         std::vector<ModelSpec>{PauliTanh{1.0, 0.0}, PauliTan{0.7, 0.0}}) {
        const Eigen::Vector3d n0 = bloch_from_angles({1.2, 0.5});
        for (double s : {0.4, 1.0}) {
            for (double t : {1.5, 3.0}) {
                const auto direct = evolve(m, n0, t);
                const auto stepped = evolve(m, evolve(m, n0, s), t - s);
                CHECK((direct - stepped).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TimeGrid::uniform(-1.0, 1.0, 5), DomainError);
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 1.0, 5), DomainError);
    CHECK_THROWS_AS(TimeGrid::uniform(0.0, 1.0, 1), DomainError);
    CHECK_THROWS_AS(
        ode_oracle_trajectory(OhmicDephasing{1.0, 1.0},
                              bloch_from_angles({0.3, 0.0}),
                              TimeGrid::uniform(0.0, 1.0, 5), 0.0),
        DomainError);
}
