#include "qdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace qdyn {

Eigen::Vector3d evolve(const ModelSpec& model, const Eigen::Vector3d& n0,
                       double t) {
    require_valid_bloch(n0);
    return bloch_map(model, t).apply(n0);
}

Trajectory trajectory(const ModelSpec& model, const Eigen::Vector3d& n0,
                      const TimeGrid& grid) {
    require_valid_bloch(n0);
    const auto maps = bloch_map_grid(model, grid);
    Trajectory traj{grid, {}};
    traj.states.reserve(grid.size());
    for (const auto& map : maps) traj.states.push_back(map.apply(n0));
    return traj;
}

BlochGenerator generator(const ModelSpec& model, double t) {
    const RateVector r = decay_rates(model, t);
    BlochGenerator gen;
    if (is_pauli(model)) {
        gen.linear.diagonal() << -2.0 * (r.gamma2 + r.gamma3),
            -2.0 * (r.gamma1 + r.gamma3), -2.0 * (r.gamma1 + r.gamma2);
        return gen;
    }
    if (is_damping(model)) {
        const double g = r.gamma1;
        gen.linear << -0.5 * g, -r.h_z, 0.0,
                       r.h_z, -0.5 * g, 0.0,
                       0.0,    0.0,     -g;
        gen.affine = Eigen::Vector3d(0.0, 0.0, g);
        return gen;
    }
    const double g = r.gamma3;
    gen.linear << -2.0 * g, -r.h_z, 0.0,
                   r.h_z,  -2.0 * g, 0.0,
                   0.0,     0.0,     0.0;
    return gen;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                 kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                 kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0,
                 kC5 = 8.0 / 9.0;

struct Stepper {
    const ModelSpec& model;
    Eigen::Vector3d y;
    Eigen::Vector3d k1;  // FSAL derivative at the current point
    double t;
    double h;
    double tol;

    Eigen::Vector3d rhs(double tt, const Eigen::Vector3d& yy) const {
        const BlochGenerator g = generator(model, tt);
        return g.linear * yy + g.affine;
    }

    // Advance until `t_end`; throws IntegrationError on step underflow.
    void advance_to(double t_end) {
        while (t < t_end) {
            h = std::min(h, t_end - t);
            const Eigen::Vector3d k2 = rhs(t + kC2 * h, y + h * (kA21 * k1));
            const Eigen::Vector3d k3 = rhs(t + kC3 * h, y + h * (kA31 * k1 + kA32 * k2));
            const Eigen::Vector3d k4 =
                rhs(t + kC4 * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
            const Eigen::Vector3d k5 =
                rhs(t + kC5 * h,
                    y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
            const Eigen::Vector3d k6 =
                rhs(t + h,
                    y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
            const Eigen::Vector3d ynew =
                y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
            const Eigen::Vector3d k7 = rhs(t + h, ynew);
            const Eigen::Vector3d err_vec =
                h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

            double err = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double scale =
                    tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err += std::pow(err_vec[i] / scale, 2);
            }
            err = std::sqrt(err / 3.0);

            if (err <= 1.0) {
                t += h;
                y = ynew;
                k1 = k7;
            }
            const double factor =
                std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
            h *= factor;
            if (!(h > 1e-14 * std::max(1.0, std::abs(t))))
                throw IntegrationError("step size underflow (rate singularity?)", t);
        }
    }
};

}  // namespace

Trajectory ode_oracle_trajectory(const ModelSpec& model,
                                 const Eigen::Vector3d& n0,
                                 const TimeGrid& grid, double tol) {
    require_valid_bloch(n0);
    grid.validate();
    if (!(tol > 0.0)) throw DomainError("ode tolerance must be > 0");

    // The generator does not determine the dynamics across a rate pole even
    // when the pole is integrable, so refuse the whole window up front.
    if (const auto singular = rate_singularities(model, grid.t0, grid.t1);
        !singular.empty())
        throw IntegrationError("time-local rates diverge inside the window",
                               singular.front());

    Trajectory traj{grid, {}};
    traj.states.reserve(grid.size());

    Stepper st{model, n0, Eigen::Vector3d::Zero(), grid.t0,
               std::min(1e-3, grid.dt()), tol};
    st.k1 = st.rhs(st.t, st.y);
    traj.states.push_back(st.y);
    for (int k = 1; k < grid.size(); ++k) {
        st.advance_to(grid.at(k));
        traj.states.push_back(st.y);
    }
    return traj;
}

}  // namespace qdyn
