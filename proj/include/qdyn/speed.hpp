#pragma once

// Speed of evolution from fidelity curvature. The squared speed is
// g(t) = -2 d^2/dt^2 F(rho(0), rho(t)); it is reported as a signed
// curvature since the Pauli families legitimately drive it negative.

#include <string>
#include <string_view>
#include <vector>

#include "qdyn/models.hpp"
#include "qdyn/qubit.hpp"

namespace qdyn {

/// F(rho(0), rho(t)) for a pure initial state, evaluated through the Bloch
/// fidelity of the evolved pair.
double fidelity_to_initial(const ModelSpec& model, const PureStateAngles& a,
                           double t);

/// Same quantity from the per-family closed forms; cross-check partner of
/// fidelity_to_initial.
double fidelity_to_initial_closed_form(const ModelSpec& model,
                                       const PureStateAngles& a, double t);

struct SpeedSample {
    double t = 0.0;
    double v_squared = 0.0;
    bool step_warning = false;  // h coarse against the model's fastest scale
};

/// -2 * second finite difference of fidelity_to_initial. At t = 0 this is
/// the one-sided stencil (2F(0) - 5F(h) + 4F(2h) - F(3h)) / h^2 (the map is
/// undefined for t < 0); from t >= h on, the central stencil.
SpeedSample speed_squared_fd(const ModelSpec& model, const PureStateAngles& a,
                             double t, double h);

/// Default step: 1e-4 in the model's natural time unit.
double default_fd_step(const ModelSpec& model);

/// Squared speed from exact second derivatives: -Re(Gddot) sin^2(theta) for
/// the dephasing families, the lambda-curvature combination for the Pauli
/// families. The damping family has no analytic route here and throws
/// UnsupportedModelError; use speed_squared_fd.
double analytic_speed_squared(const ModelSpec& model, double theta, double t);

enum class Monotonicity { StrictlyIncreasing, StrictlyDecreasing, NonMonotonic };
const char* to_string(Monotonicity m);

struct SpeedScanPoint {
    double parameter = 0.0;
    double v0_squared = 0.0;
    RegionClassification region;
};

struct MonotonicityReport {
    std::string parameter;
    double theta = 0.0;
    std::vector<SpeedScanPoint> points;
    Monotonicity verdict = Monotonicity::NonMonotonic;
};

/// Sweeps the family's driving parameter over [lo, hi] (n_points values),
/// evaluating the closed-form initial speed at each point and classifying
/// the sequence with strict comparisons; |difference| < 1e-12 counts as a
/// violation of strictness. At least three points are cross-validated
/// against speed_squared_fd to 1e-3 relative.
MonotonicityReport initial_speed_scan(const ModelSpec& family,
                                      std::string_view parameter, double lo,
                                      double hi, int n_points, double theta);

}  // namespace qdyn
