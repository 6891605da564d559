#pragma once

// Catalogue of six exactly solvable single-qubit channel families.
//
// Each family is defined by a decoherence function G(t) (dephasing and
// damping models) or by Pauli-basis eigenvalues lambda_j(t) (Pauli
// channels), from which exact affine Bloch maps n(t) = M(t) n(0) + b(t),
// time-local decay rates, and closed-form initial speeds follow.
//
// Conventions. All frequencies and rates are dimensionless multiples of the
// model's reference scale (omega_c, the birefringence scale, lambda). Time
// runs in the inverse unit. The damping family relaxes toward n = (0,0,1).

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qdyn/errors.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn {

// ---------------------------------------------------------------------------
// Model parameter sets
// ---------------------------------------------------------------------------

/// Dephasing by a zero-temperature bosonic bath with Ohmic-class spectrum.
/// gamma(t) = omega_c [1+(omega_c t)^2]^(-s/2) Gamma[s] sin(s arctan(omega_c t)),
/// G(t) = exp(-Upsilon(t)), Upsilon = 2 * integral of gamma.
struct OhmicDephasing {
    double omega_c = 1.0;  // cut-off frequency, > 0
    double s = 1.0;        // Ohmicity, > 0
};

/// Dephasing of photon polarization through a birefringent medium, the
/// frequency distribution being a bimodal Gaussian:
/// G(t) = exp(-sigma^2 dn^2 t^2 / 2) (cos^2(xi) e^{i w1 dn t} + sin^2(xi) e^{i w2 dn t}).
struct PolarizationDephasing {
    double delta_n = 1.0;  // refraction-index difference
    double sigma = 0.3;    // common width of the two peaks, >= 0
    double omega1 = 1.0;   // first peak centre
    double omega2 = 2.0;   // second peak centre
    double xi = 0.5;       // relative weight, in [0, pi/2]
};

/// Two-level atom in a lossy cavity with Lorentzian spectral density
/// (amplitude damping with memory):
/// G(t) = e^{-(lambda - i delta) t / 2} [cosh(Om t/2) + (lambda - i delta)/Om sinh(Om t/2)],
/// Om = sqrt(lambda^2 - 2 i lambda delta - 4 W^2), W = gamma_m lambda/2 + delta^2/4.
///
/// W is used exactly as written above. Dimensionally it mixes first and
/// second powers of frequency; the closed-form initial speeds are consistent
/// with this reading at delta = 0, so it is kept verbatim rather than
/// guessing an alternative normalization. Validity demands 4 W^2 >= delta^2
/// (else |G| grows past 1); validate() enforces it.
struct JaynesCummings {
    double lambda = 1.0;   // spectral width, > 0
    double gamma_m = 1.0;  // effective coupling, >= 0
    double delta = 0.0;    // detuning
};

/// Pauli channel with gamma_1 = gamma_2 = lambda/2 and
/// gamma_3(t) = -(omega/2) tanh(omega t); requires 0 <= omega <= lambda.
/// lambda_1 = lambda_2 = e^{-lambda t} cosh(omega t), lambda_3 = e^{-2 lambda t}.
struct PauliTanh {
    double lambda = 1.0;
    double omega = 1.0;
};

/// Pauli channel with gamma_1 = gamma_2 = lambda/2 and
/// gamma_3(t) = (omega/2) tan(omega t); lambda >= 0, omega >= 0.
/// lambda_1 = lambda_2 = e^{-lambda t} |cos(omega t)|, lambda_3 = e^{-2 lambda t}.
struct PauliTan {
    double lambda = 1.0;
    double omega = 1.0;
};

using ModelSpec = std::variant<OhmicDephasing, PolarizationDephasing,
                               JaynesCummings, PauliTanh, PauliTan>;

void validate(const ModelSpec& model);
std::string model_name(const ModelSpec& model);

bool is_dephasing(const ModelSpec& model);  // Ohmic or polarization
bool is_damping(const ModelSpec& model);    // Jaynes-Cummings
bool is_pauli(const ModelSpec& model);      // either Pauli variant

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Canonical time-local rates. Dephasing populates gamma3, damping gamma1,
/// Pauli channels all three. For complex logarithmic derivatives of G the
/// imaginary part lands in h_z as an effective Hamiltonian frequency.
struct RateVector {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double h_z = 0.0;
};

/// Exact solution at time t in affine Bloch form, n(t) = linear * n(0) + offset.
struct AffineBlochMap {
    Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& n) const {
        return linear * n + offset;
    }
};

/// G(t) for the G-bearing families; G(0) = 1 exactly. Pauli variants have no
/// decoherence function and raise UnsupportedModelError.
std::complex<double> decoherence_function(const ModelSpec& model, double t);

/// d/dt log G(t). Throws SingularRateError at zeros of G.
std::complex<double> decoherence_log_derivative(const ModelSpec& model, double t);

/// Second time derivative of G. Closed form; dephasing families only.
std::complex<double> decoherence_second_derivative(const ModelSpec& model, double t);

RateVector decay_rates(const ModelSpec& model, double t);

AffineBlochMap bloch_map(const ModelSpec& model, double t);

/// Maps for a whole grid. Equivalent to calling bloch_map per point but
/// evaluates the Ohmic exponent incrementally along the grid.
std::vector<AffineBlochMap> bloch_map_grid(const ModelSpec& model,
                                           const TimeGrid& grid);

/// (lambda_1, lambda_2, lambda_3)(t) of a Pauli variant; all 1 at t = 0.
Eigen::Vector3d pauli_eigenvalues(const ModelSpec& model, double t);

/// Second time derivatives of the Pauli eigenvalues. Throws DomainError
/// within 10 * kink_guard of a |cos| kink of the tan variant.
Eigen::Vector3d pauli_eigenvalue_second_derivatives(const ModelSpec& model,
                                                    double t,
                                                    double kink_guard = 1e-4);

/// Closed-form squared initial speed of evolution for a pure initial state
/// at polar angle theta. May be negative for the Pauli rows; callers treat
/// it as a signed curvature.
double initial_speed_squared_closed_form(const ModelSpec& model, double theta);

// ---------------------------------------------------------------------------
// Known Markovianity regions
// ---------------------------------------------------------------------------

enum class RegionVerdict {
    No,        // property absent for these parameters
    Yes,       // property present
    NoneEver,  // absent for every parameter value of the family
    Numeric,   // no closed form known; resolve with the numeric machinery
};

struct RegionClassification {
    RegionVerdict cp_indivisible = RegionVerdict::Numeric;
    RegionVerdict backflow = RegionVerdict::Numeric;
};

/// Closed-form classification where one is known: Ohmic s > 2 (both), JC on
/// resonance gamma_m > lambda/2 (both), tanh-Pauli omega > 0 indivisible with
/// no backflow ever, tan-Pauli omega > 0 (both). Polarization and detuned JC
/// come back Numeric.
RegionClassification region_classification(const ModelSpec& model);

const char* to_string(RegionVerdict v);

// ---------------------------------------------------------------------------
// Scales, parameters, singular times
// ---------------------------------------------------------------------------

/// Reference frequency the model's inputs are expressed against.
double reference_frequency(const ModelSpec& model);

/// Fastest frequency present in the dynamics; used to flag too-coarse
/// finite-difference steps.
double fastest_frequency(const ModelSpec& model);

/// Default analysis window, in time units of the reference frequency.
/// Long enough that every backflow episode at the catalogued parameter
/// scales has played out.
double default_horizon(const ModelSpec& model);

/// Window for rate-sign scans. The Ohmic rate changes sign arbitrarily late
/// as s approaches 2 from above, so this is generous.
double rate_scan_horizon(const ModelSpec& model);

/// Times in (t0, t1] at which the time-local rates diverge (zeros of G or of
/// cos(omega t)). Empty for models that stay regular.
std::vector<double> rate_singularities(const ModelSpec& model, double t0,
                                       double t1);

std::vector<std::string> parameter_names(const ModelSpec& model);

/// The parameter that drives the family's Markovian/non-Markovian crossover:
/// s, xi, gamma_m, omega.
std::string driving_parameter(const ModelSpec& model);

double get_parameter(const ModelSpec& model, std::string_view name);
ModelSpec with_parameter(ModelSpec model, std::string_view name, double value);

}  // namespace qdyn
