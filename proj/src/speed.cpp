#include "qdyn/speed.hpp"

#include <cmath>

#include "qdyn/dynamics.hpp"

namespace qdyn {

double fidelity_to_initial(const ModelSpec& model, const PureStateAngles& a,
                           double t) {
    const BlochVector n0 = bloch_from_angles(a);
    return fidelity(n0, evolve(model, n0, t));
}

double fidelity_to_initial_closed_form(const ModelSpec& model,
                                       const PureStateAngles& a, double t) {
    a.validate();
    const double c2t = std::cos(2.0 * a.theta);
    const double st2 = std::sin(a.theta) * std::sin(a.theta);
    if (is_dephasing(model)) {
        const auto g = decoherence_function(model, t);
        return 0.25 * (3.0 + c2t + 2.0 * g.real() * st2);
    }
    if (is_damping(model)) {
        const auto g = decoherence_function(model, t);
        const double ct = std::cos(a.theta);
        const double sh2 = std::sin(0.5 * a.theta) * std::sin(0.5 * a.theta);
        return 0.5 * (1.0 + ct - 2.0 * std::norm(g) * ct * sh2 + g.real() * st2);
    }
    const Eigen::Vector3d l = pauli_eigenvalues(model, t);
    return 0.25 * (2.0 + l[0] + l[2] + (l[2] - l[0]) * c2t);
}

double default_fd_step(const ModelSpec& model) {
    return 1e-4 / reference_frequency(model);
}

SpeedSample speed_squared_fd(const ModelSpec& model, const PureStateAngles& a,
                             double t, double h) {
    if (!(h > 0.0)) throw DomainError("fd step must be > 0");
    if (!(t >= 0.0)) throw DomainError("time must be >= 0");
    if (std::holds_alternative<PauliTan>(model)) {
        // |cos| kinks break the stencil; demand 10 h of clearance around it.
        const double lo = std::max(0.0, t - 11.0 * h);
        const double hi = t + 13.0 * h;
        if (!rate_singularities(model, lo, hi).empty())
            throw DomainError("fd stencil too close to a |cos| kink");
    }
    auto f = [&](double u) { return fidelity_to_initial(model, a, u); };
    double second;
    if (t >= h) {
        second = (f(t - h) - 2.0 * f(t) + f(t + h)) / (h * h);
    } else {
        // One-sided, second-order; anchored at t (t = 0 in practice).
        second = (2.0 * f(t) - 5.0 * f(t + h) + 4.0 * f(t + 2.0 * h) -
                  f(t + 3.0 * h)) / (h * h);
    }
    if (!std::isfinite(second)) throw Error("non-finite fidelity curvature");
    SpeedSample sample{t, -2.0 * second, false};
    sample.step_warning = h * fastest_frequency(model) > 1e-2;
    return sample;
}

double analytic_speed_squared(const ModelSpec& model, double theta, double t) {
    if (is_damping(model))
        throw UnsupportedModelError(
            "no analytic speed for the damping family; use speed_squared_fd");
    const double st2 = std::sin(theta) * std::sin(theta);
    if (is_dephasing(model)) {
        const auto gdd = decoherence_second_derivative(model, t);
        return -gdd.real() * st2;
    }
    const Eigen::Vector3d ldd = pauli_eigenvalue_second_derivatives(model, t);
    const double c2t = std::cos(2.0 * theta);
    return -0.5 * (ldd[0] + ldd[2] + (ldd[2] - ldd[0]) * c2t);
}

const char* to_string(Monotonicity m) {
    switch (m) {
        case Monotonicity::StrictlyIncreasing: return "strictly-increasing";
        case Monotonicity::StrictlyDecreasing: return "strictly-decreasing";
        case Monotonicity::NonMonotonic: return "non-monotonic";
    }
    return "?";
}

MonotonicityReport initial_speed_scan(const ModelSpec& family,
                                      std::string_view parameter, double lo,
                                      double hi, int n_points, double theta) {
    if (std::string(parameter) != driving_parameter(family))
        throw DomainError("scan parameter '" + std::string(parameter) +
                          "' is not the driving parameter of '" +
                          model_name(family) + "'");
    if (!(hi > lo)) throw DomainError("scan range is empty");
    if (n_points < 2) throw DomainError("scan needs at least 2 points");

    MonotonicityReport report;
    report.parameter = parameter;
    report.theta = theta;
    report.points.reserve(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double value = lo + (hi - lo) * k / (n_points - 1);
        const ModelSpec m = with_parameter(family, parameter, value);
        report.points.push_back(
            {value, initial_speed_squared_closed_form(m, theta),
             region_classification(m)});
    }

    // Spot-check the closed form against the dynamics at three grid points.
    const PureStateAngles angles{theta, 0.0};
    for (int k : {0, n_points / 2, n_points - 1}) {
        const ModelSpec m =
            with_parameter(family, parameter, report.points[k].parameter);
        const double fd = speed_squared_fd(m, angles, 0.0, default_fd_step(m)).v_squared;
        const double cf = report.points[k].v0_squared;
        if (std::abs(fd - cf) > 1e-3 * std::max(1.0, std::abs(cf)))
            throw InternalConsistencyError(
                "closed-form initial speed disagrees with fidelity curvature");
    }

    bool inc = true, dec = true;
    for (size_t k = 1; k < report.points.size(); ++k) {
        const double d = report.points[k].v0_squared - report.points[k - 1].v0_squared;
        if (!(d > 1e-12)) inc = false;
        if (!(d < -1e-12)) dec = false;
    }
    report.verdict = inc   ? Monotonicity::StrictlyIncreasing
                     : dec ? Monotonicity::StrictlyDecreasing
                           : Monotonicity::NonMonotonic;
    return report;
}

}  // namespace qdyn
