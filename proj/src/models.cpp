#include "qdyn/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qdyn/special.hpp"

namespace qdyn {

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;

// sinh(z)/z, stable at z -> 0.
Complex sinhc(Complex z) {
    if (std::abs(z) < 1e-4) {
        const Complex z2 = z * z;
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0);
    }
    return std::sinh(z) / z;
}

void require_time(double t) {
    if (!(t >= 0.0)) throw DomainError("time must be >= 0");
}

// --- Ohmic dephasing ------------------------------------------------------

double ohmic_rate(const OhmicDephasing& m, double t) {
    const double x = m.omega_c * t;
    return m.omega_c * std::pow(1.0 + x * x, -0.5 * m.s) *
           gamma_function(m.s) * std::sin(m.s * std::atan(x));
}

double ohmic_rate_derivative(const OhmicDephasing& m, double t) {
    const double x = m.omega_c * t;
    return m.omega_c * m.omega_c * gamma_function(m.s + 1.0) *
           std::pow(1.0 + x * x, -0.5 * (m.s + 1.0)) *
           std::cos((m.s + 1.0) * std::atan(x));
}

constexpr double kUpsilonTol = 1e-10;

// Upsilon(t) = 2 * integral_0^t gamma. The rate is closed form, its
// antiderivative is not kept in closed form here, hence quadrature.
double ohmic_upsilon(const OhmicDephasing& m, double t) {
    if (t == 0.0) return 0.0;
    return 2.0 * adaptive_simpson([&](double u) { return ohmic_rate(m, u); },
                                  0.0, t, kUpsilonTol);
}

// --- Polarization dephasing -------------------------------------------------

struct PolarizationParts {
    double kappa;       // sigma^2 dn^2
    double alpha, beta; // omega_i * dn
    double c2, s2;      // cos^2 xi, sin^2 xi
};

PolarizationParts pol_parts(const PolarizationDephasing& m) {
    return {m.sigma * m.sigma * m.delta_n * m.delta_n,
            m.omega1 * m.delta_n, m.omega2 * m.delta_n,
            std::cos(m.xi) * std::cos(m.xi), std::sin(m.xi) * std::sin(m.xi)};
}

Complex pol_peak_sum(const PolarizationParts& p, double t) {
    const Complex i(0.0, 1.0);
    return p.c2 * std::exp(i * p.alpha * t) + p.s2 * std::exp(i * p.beta * t);
}

Complex pol_g(const PolarizationDephasing& m, double t) {
    const auto p = pol_parts(m);
    return std::exp(-0.5 * p.kappa * t * t) * pol_peak_sum(p, t);
}

Complex pol_log_derivative(const PolarizationDephasing& m, double t) {
    const auto p = pol_parts(m);
    const Complex P = pol_peak_sum(p, t);
    if (std::abs(P) < 1e-12)
        throw SingularRateError("polarization decoherence function vanishes", t);
    const Complex i(0.0, 1.0);
    const Complex Pdot = i * (p.alpha * p.c2 * std::exp(i * p.alpha * t) +
                              p.beta * p.s2 * std::exp(i * p.beta * t));
    return -p.kappa * t + Pdot / P;
}

Complex pol_second_derivative(const PolarizationDephasing& m, double t) {
    const auto p = pol_parts(m);
    const Complex i(0.0, 1.0);
    const Complex e1 = std::exp(i * p.alpha * t), e2 = std::exp(i * p.beta * t);
    const Complex P = p.c2 * e1 + p.s2 * e2;
    const Complex Pdot = i * (p.alpha * p.c2 * e1 + p.beta * p.s2 * e2);
    const Complex Pddot = -(p.alpha * p.alpha * p.c2 * e1 +
                            p.beta * p.beta * p.s2 * e2);
    const double E = std::exp(-0.5 * p.kappa * t * t);
    return E * ((p.kappa * p.kappa * t * t - p.kappa) * P -
                2.0 * p.kappa * t * Pdot + Pddot);
}

// --- Jaynes-Cummings ---------------------------------------------------------

struct JcParts {
    Complex a;      // (lambda - i delta) / 2
    Complex omega;  // principal sqrt(lambda^2 - 2 i lambda delta - 4 W^2)
    double w;       // gamma_m lambda / 2 + delta^2 / 4, as written
};

JcParts jc_parts(const JaynesCummings& m) {
    const double w = 0.5 * m.gamma_m * m.lambda + 0.25 * m.delta * m.delta;
    const Complex om2(m.lambda * m.lambda - 4.0 * w * w,
                      -2.0 * m.lambda * m.delta);
    return {Complex(0.5 * m.lambda, -0.5 * m.delta), std::sqrt(om2), w};
}

// Bracket of G before the e^{-a t} envelope; G = e^{-a t} * bracket.
Complex jc_bracket(const JcParts& p, double t) {
    const Complex u = 0.5 * p.omega * t;
    return std::cosh(u) + p.a * t * sinhc(u);
}

Complex jc_g(const JaynesCummings& m, double t) {
    const auto p = jc_parts(m);
    return std::exp(-p.a * t) * jc_bracket(p, t);
}

Complex jc_log_derivative(const JaynesCummings& m, double t) {
    const auto p = jc_parts(m);
    const Complex b = jc_bracket(p, t);
    const Complex u = 0.5 * p.omega * t;
    const double scale = std::abs(std::cosh(u)) + std::abs(p.a * t * sinhc(u)) + 1.0;
    if (std::abs(b) < 1e-12 * scale)
        throw SingularRateError("JC decoherence function vanishes", t);
    // Gdot = (delta^2 - 4 W^2)/4 * t * e^{-a t} * sinhc(u)
    const double d2 = m.delta * m.delta - 4.0 * p.w * p.w;
    return 0.25 * d2 * t * sinhc(u) / b;
}

// --- Pauli channels -----------------------------------------------------------

Eigen::Vector3d pauli_lams(const PauliTanh& m, double t) {
    const double l1 = std::exp(-m.lambda * t) * std::cosh(m.omega * t);
    return {l1, l1, std::exp(-2.0 * m.lambda * t)};
}

Eigen::Vector3d pauli_lams(const PauliTan& m, double t) {
    const double l1 = std::exp(-m.lambda * t) * std::abs(std::cos(m.omega * t));
    return {l1, l1, std::exp(-2.0 * m.lambda * t)};
}

double tan_kink_distance(const PauliTan& m, double t) {
    if (m.omega <= 0.0) return std::numeric_limits<double>::infinity();
    const double x = m.omega * t;
    const double r = std::remainder(x - 0.5 * kPi, kPi);  // 0 at every kink
    return std::abs(r) / m.omega;
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation, naming, family predicates
// ---------------------------------------------------------------------------

void validate(const ModelSpec& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, OhmicDephasing>) {
                if (!(m.omega_c > 0.0)) throw DomainError("ohmic: omega_c must be > 0");
                if (!(m.s > 0.0 && m.s <= 30.0))
                    throw DomainError("ohmic: s must lie in (0, 30]");
            } else if constexpr (std::is_same_v<T, PolarizationDephasing>) {
                if (!(m.sigma >= 0.0)) throw DomainError("polarization: sigma must be >= 0");
                if (!(m.xi >= 0.0 && m.xi <= 0.5 * kPi))
                    throw DomainError("polarization: xi must lie in [0, pi/2]");
                if (!std::isfinite(m.delta_n) || !std::isfinite(m.omega1) ||
                    !std::isfinite(m.omega2))
                    throw DomainError("polarization: parameters must be finite");
            } else if constexpr (std::is_same_v<T, JaynesCummings>) {
                if (!(m.lambda > 0.0)) throw DomainError("jc: lambda must be > 0");
                if (!(m.gamma_m >= 0.0)) throw DomainError("jc: gamma_m must be >= 0");
                if (!std::isfinite(m.delta)) throw DomainError("jc: delta must be finite");
                // Outside 4 W^2 >= delta^2 the decoherence function grows
                // past 1 and the map leaves the Bloch ball.
                const double w = 0.5 * m.gamma_m * m.lambda + 0.25 * m.delta * m.delta;
                if (4.0 * w * w < m.delta * m.delta * (1.0 - 1e-12))
                    throw DomainError(
                        "jc: coupling too weak for this detuning; requires "
                        "gamma_m*lambda/2 + delta^2/4 >= |delta|/2");
            } else if constexpr (std::is_same_v<T, PauliTanh>) {
                if (!(m.lambda > 0.0)) throw DomainError("pauli_tanh: lambda must be > 0");
                if (!(m.omega >= 0.0 && m.omega <= m.lambda))
                    throw DomainError("pauli_tanh: omega must lie in [0, lambda]");
            } else {
                if (!(m.lambda >= 0.0)) throw DomainError("pauli_tan: lambda must be >= 0");
                if (!(m.omega >= 0.0)) throw DomainError("pauli_tan: omega must be >= 0");
            }
        },
        model);
}

std::string model_name(const ModelSpec& model) {
    struct Visitor {
        std::string operator()(const OhmicDephasing&) const { return "ohmic"; }
        std::string operator()(const PolarizationDephasing&) const { return "polarization"; }
        std::string operator()(const JaynesCummings&) const { return "jc"; }
        std::string operator()(const PauliTanh&) const { return "pauli_tanh"; }
        std::string operator()(const PauliTan&) const { return "pauli_tan"; }
    };
    return std::visit(Visitor{}, model);
}

bool is_dephasing(const ModelSpec& model) {
    return std::holds_alternative<OhmicDephasing>(model) ||
           std::holds_alternative<PolarizationDephasing>(model);
}

bool is_damping(const ModelSpec& model) {
    return std::holds_alternative<JaynesCummings>(model);
}

bool is_pauli(const ModelSpec& model) {
    return std::holds_alternative<PauliTanh>(model) ||
           std::holds_alternative<PauliTan>(model);
}

// ---------------------------------------------------------------------------
// Decoherence functions and rates
// ---------------------------------------------------------------------------

std::complex<double> decoherence_function(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    if (t == 0.0) return 1.0;
    if (const auto* m = std::get_if<OhmicDephasing>(&model))
        return std::exp(-ohmic_upsilon(*m, t));
    if (const auto* m = std::get_if<PolarizationDephasing>(&model))
        return pol_g(*m, t);
    if (const auto* m = std::get_if<JaynesCummings>(&model)) return jc_g(*m, t);
    throw UnsupportedModelError("Pauli channels have no decoherence function");
}

std::complex<double> decoherence_log_derivative(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    if (const auto* m = std::get_if<OhmicDephasing>(&model))
        return {-2.0 * ohmic_rate(*m, t), 0.0};
    if (const auto* m = std::get_if<PolarizationDephasing>(&model))
        return pol_log_derivative(*m, t);
    if (const auto* m = std::get_if<JaynesCummings>(&model))
        return jc_log_derivative(*m, t);
    throw UnsupportedModelError("Pauli channels have no decoherence function");
}

std::complex<double> decoherence_second_derivative(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    if (const auto* m = std::get_if<OhmicDephasing>(&model)) {
        // G = e^{-Upsilon}: Gddot = (4 gamma^2 - 2 gammadot) G.
        const double g = ohmic_rate(*m, t);
        const double gd = ohmic_rate_derivative(*m, t);
        return (4.0 * g * g - 2.0 * gd) * std::exp(-ohmic_upsilon(*m, t));
    }
    if (const auto* m = std::get_if<PolarizationDephasing>(&model))
        return pol_second_derivative(*m, t);
    throw UnsupportedModelError(
        "second derivative of G implemented for dephasing families only");
}

RateVector decay_rates(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    RateVector r;
    if (const auto* m = std::get_if<OhmicDephasing>(&model)) {
        r.gamma3 = ohmic_rate(*m, t);
    } else if (std::holds_alternative<PolarizationDephasing>(model)) {
        const auto c = decoherence_log_derivative(model, t);
        r.gamma3 = -0.5 * c.real();
        r.h_z = -c.imag();
    } else if (std::holds_alternative<JaynesCummings>(model)) {
        const auto c = decoherence_log_derivative(model, t);
        r.gamma1 = -2.0 * c.real();
        r.h_z = c.imag();
    } else if (const auto* m = std::get_if<PauliTanh>(&model)) {
        r.gamma1 = r.gamma2 = 0.5 * m->lambda;
        r.gamma3 = -0.5 * m->omega * std::tanh(m->omega * t);
    } else {
        const auto& mt = std::get<PauliTan>(model);
        if (std::abs(std::cos(mt.omega * t)) < 1e-12)
            throw SingularRateError("tan-Pauli rate diverges", t);
        r.gamma1 = r.gamma2 = 0.5 * mt.lambda;
        r.gamma3 = 0.5 * mt.omega * std::tan(mt.omega * t);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bloch maps
// ---------------------------------------------------------------------------

namespace {

AffineBlochMap dephasing_map(std::complex<double> g) {
    AffineBlochMap map;
    map.linear << g.real(), g.imag(), 0.0,
                 -g.imag(), g.real(), 0.0,
                  0.0,      0.0,      1.0;
    return map;
}

AffineBlochMap damping_map(std::complex<double> g) {
    const double g2 = std::norm(g);
    AffineBlochMap map;
    map.linear << g.real(), -g.imag(), 0.0,
                  g.imag(),  g.real(), 0.0,
                  0.0,       0.0,      g2;
    map.offset = Eigen::Vector3d(0.0, 0.0, 1.0 - g2);
    return map;
}

AffineBlochMap pauli_map(const Eigen::Vector3d& lams) {
    AffineBlochMap map;
    map.linear = lams.asDiagonal();
    return map;
}

}  // namespace

AffineBlochMap bloch_map(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    if (is_pauli(model)) return pauli_map(pauli_eigenvalues(model, t));
    const auto g = decoherence_function(model, t);
    return is_damping(model) ? damping_map(g) : dephasing_map(g);
}

std::vector<AffineBlochMap> bloch_map_grid(const ModelSpec& model,
                                           const TimeGrid& grid) {
    validate(model);
    grid.validate();
    std::vector<AffineBlochMap> maps;
    maps.reserve(grid.size());
    if (const auto* m = std::get_if<OhmicDephasing>(&model)) {
        // One pass of cumulative quadrature instead of n integrals from 0.
        const double seg_tol = kUpsilonTol / grid.size();
        auto rate = [&](double u) { return ohmic_rate(*m, u); };
        double ups = ohmic_upsilon(*m, grid.t0);
        maps.push_back(dephasing_map(std::exp(-ups)));
        for (int k = 1; k < grid.size(); ++k) {
            ups += 2.0 * adaptive_simpson(rate, grid.at(k - 1), grid.at(k), seg_tol);
            maps.push_back(dephasing_map(std::exp(-ups)));
        }
        if (grid.t0 == 0.0) maps.front() = AffineBlochMap{};
        return maps;
    }
    for (int k = 0; k < grid.size(); ++k) maps.push_back(bloch_map(model, grid.at(k)));
    return maps;
}

// ---------------------------------------------------------------------------
// Pauli eigenvalues and closed-form speeds
// ---------------------------------------------------------------------------

Eigen::Vector3d pauli_eigenvalues(const ModelSpec& model, double t) {
    validate(model);
    require_time(t);
    if (const auto* m = std::get_if<PauliTanh>(&model)) return pauli_lams(*m, t);
    if (const auto* m = std::get_if<PauliTan>(&model)) return pauli_lams(*m, t);
    throw UnsupportedModelError("pauli_eigenvalues requires a Pauli variant");
}

Eigen::Vector3d pauli_eigenvalue_second_derivatives(const ModelSpec& model,
                                                    double t, double kink_guard) {
    validate(model);
    require_time(t);
    if (const auto* m = std::get_if<PauliTanh>(&model)) {
        const double l = m->lambda, w = m->omega;
        const double d1 = std::exp(-l * t) *
                          ((l * l + w * w) * std::cosh(w * t) -
                           2.0 * l * w * std::sinh(w * t));
        const double d3 = 4.0 * l * l * std::exp(-2.0 * l * t);
        return {d1, d1, d3};
    }
    if (const auto* m = std::get_if<PauliTan>(&model)) {
        if (tan_kink_distance(*m, t) < 10.0 * kink_guard)
            throw DomainError("tan-Pauli eigenvalue not differentiable this close to a kink");
        const double l = m->lambda, w = m->omega;
        const double sign = std::cos(w * t) >= 0.0 ? 1.0 : -1.0;
        const double d1 = sign * std::exp(-l * t) *
                          ((l * l - w * w) * std::cos(w * t) +
                           2.0 * l * w * std::sin(w * t));
        const double d3 = 4.0 * l * l * std::exp(-2.0 * l * t);
        return {d1, d1, d3};
    }
    throw UnsupportedModelError("pauli_eigenvalue_second_derivatives requires a Pauli variant");
}

double initial_speed_squared_closed_form(const ModelSpec& model, double theta) {
    validate(model);
    if (!std::isfinite(theta)) throw DomainError("theta must be finite");
    const double st2 = std::sin(theta) * std::sin(theta);
    const double ct2 = std::cos(theta) * std::cos(theta);
    struct Visitor {
        double st2, ct2, theta;
        double operator()(const OhmicDephasing& m) const {
            return 2.0 * m.omega_c * m.omega_c * gamma_function(m.s + 1.0) * st2;
        }
        double operator()(const PolarizationDephasing& m) const {
            const double dn2 = m.delta_n * m.delta_n;
            return 0.5 * dn2 *
                   (2.0 * m.sigma * m.sigma + m.omega1 * m.omega1 +
                    m.omega2 * m.omega2 -
                    (m.omega2 * m.omega2 - m.omega1 * m.omega1) *
                        std::cos(2.0 * m.xi)) *
                   st2;
        }
        double operator()(const JaynesCummings& m) const {
            const double w = 0.5 * m.gamma_m * m.lambda + 0.25 * m.delta * m.delta;
            const double sh = std::sin(0.5 * theta);
            return (4.0 * w * w - m.delta * m.delta) * sh * sh * sh * sh;
        }
        double operator()(const PauliTanh& m) const {
            return -4.0 * m.lambda * m.lambda * ct2 -
                   (m.lambda * m.lambda + m.omega * m.omega) * st2;
        }
        double operator()(const PauliTan& m) const {
            return -4.0 * m.lambda * m.lambda * ct2 -
                   (m.lambda * m.lambda - m.omega * m.omega) * st2;
        }
    };
    return std::visit(Visitor{st2, ct2, theta}, model);
}

// ---------------------------------------------------------------------------
// Region classification
// ---------------------------------------------------------------------------

RegionClassification region_classification(const ModelSpec& model) {
    validate(model);
    struct Visitor {
        RegionClassification operator()(const OhmicDephasing& m) const {
            const auto v = m.s > 2.0 ? RegionVerdict::Yes : RegionVerdict::No;
            return {v, v};
        }
        RegionClassification operator()(const PolarizationDephasing&) const {
            return {RegionVerdict::Numeric, RegionVerdict::Numeric};
        }
        RegionClassification operator()(const JaynesCummings& m) const {
            if (m.delta != 0.0)
                return {RegionVerdict::Numeric, RegionVerdict::Numeric};
            const auto v = m.gamma_m > 0.5 * m.lambda ? RegionVerdict::Yes
                                                      : RegionVerdict::No;
            return {v, v};
        }
        RegionClassification operator()(const PauliTanh& m) const {
            return {m.omega > 0.0 ? RegionVerdict::Yes : RegionVerdict::No,
                    RegionVerdict::NoneEver};
        }
        RegionClassification operator()(const PauliTan& m) const {
            const auto v = m.omega > 0.0 ? RegionVerdict::Yes : RegionVerdict::No;
            return {v, v};
        }
    };
    return std::visit(Visitor{}, model);
}

const char* to_string(RegionVerdict v) {
    switch (v) {
        case RegionVerdict::No: return "no";
        case RegionVerdict::Yes: return "yes";
        case RegionVerdict::NoneEver: return "none-ever";
        case RegionVerdict::Numeric: return "numeric";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Scales and singular times
// ---------------------------------------------------------------------------

double reference_frequency(const ModelSpec& model) {
    struct Visitor {
        double operator()(const OhmicDephasing& m) const { return m.omega_c; }
        double operator()(const PolarizationDephasing& m) const {
            const double f = std::abs(m.delta_n) *
                             std::max({m.sigma, std::abs(m.omega1), std::abs(m.omega2)});
            return f > 0.0 ? f : 1.0;
        }
        double operator()(const JaynesCummings& m) const { return m.lambda; }
        double operator()(const PauliTanh& m) const { return m.lambda; }
        double operator()(const PauliTan& m) const {
            if (m.lambda > 0.0) return m.lambda;
            return m.omega > 0.0 ? m.omega : 1.0;
        }
    };
    return std::visit(Visitor{}, model);
}

double fastest_frequency(const ModelSpec& model) {
    struct Visitor {
        double operator()(const OhmicDephasing& m) const {
            return m.omega_c * std::max(1.0, std::sqrt(gamma_function(m.s + 1.0)));
        }
        double operator()(const PolarizationDephasing& m) const {
            const double f = std::abs(m.delta_n) *
                             std::max({m.sigma, std::abs(m.omega1), std::abs(m.omega2)});
            return f > 0.0 ? f : 1.0;
        }
        double operator()(const JaynesCummings& m) const {
            return std::max(m.lambda, std::abs(jc_parts(m).omega));
        }
        double operator()(const PauliTanh& m) const {
            return std::max(m.lambda, m.omega);
        }
        double operator()(const PauliTan& m) const {
            return std::max({m.lambda, m.omega, 1e-300});
        }
    };
    return std::visit(Visitor{}, model);
}

double default_horizon(const ModelSpec& model) {
    const double unit = 1.0 / reference_frequency(model);
    if (std::holds_alternative<OhmicDephasing>(model)) return 50.0 * unit;
    if (std::holds_alternative<PolarizationDephasing>(model)) return 25.0 * unit;
    return 20.0 * unit;
}

double rate_scan_horizon(const ModelSpec& model) {
    // sign changes of the Ohmic rate move out to tan(pi/s)/omega_c, which
    // approaches infinity as s -> 2+; 50/omega_c covers s >= 2.05.
    if (std::holds_alternative<OhmicDephasing>(model))
        return 50.0 / reference_frequency(model);
    return default_horizon(model);
}

std::vector<double> rate_singularities(const ModelSpec& model, double t0,
                                       double t1) {
    validate(model);
    if (!(t1 > t0) || !(t0 >= 0.0)) throw DomainError("bad singularity window");
    std::vector<double> out;
    if (const auto* m = std::get_if<PauliTan>(&model)) {
        if (m->omega <= 0.0) return out;
        for (double tk = 0.5 * kPi / m->omega; tk <= t1; tk += kPi / m->omega)
            if (tk > t0) out.push_back(tk);
        return out;
    }
    if (const auto* m = std::get_if<PolarizationDephasing>(&model)) {
        // |P| reaches zero only for equal weights and distinct peaks.
        const double dw = std::abs(m->delta_n * (m->omega2 - m->omega1));
        if (std::abs(std::cos(2.0 * m->xi)) > 1e-9 || dw == 0.0) return out;
        for (double tk = kPi / dw; tk <= t1; tk += 2.0 * kPi / dw)
            if (tk > t0) out.push_back(tk);
        return out;
    }
    if (const auto* m = std::get_if<JaynesCummings>(&model)) {
        const auto p = jc_parts(*m);
        if (m->delta == 0.0) {
            const double om2 = m->lambda * m->lambda - 4.0 * p.w * p.w;
            if (om2 >= 0.0) return out;  // monotone regime, G > 0
            const double om = std::sqrt(-om2);
            const double x0 = kPi - std::atan(om / m->lambda);
            for (int k = 0;; ++k) {
                const double tk = 2.0 * (x0 + k * kPi) / om;
                if (tk > t1) break;
                if (tk > t0) out.push_back(tk);
            }
            return out;
        }
        // Detuned case: look for genuine zeros of |G| numerically.
        const int n = 8192;
        auto absg = [&](double t) { return std::abs(jc_g(*m, t)); };
        double prev = absg(t0), cur = absg(t0 + (t1 - t0) / n);
        for (int k = 2; k <= n; ++k) {
            const double next = absg(t0 + (t1 - t0) * k / n);
            if (cur < prev && cur < next && cur < 1e-3) {
                double lo = t0 + (t1 - t0) * (k - 2) / n;
                double hi = t0 + (t1 - t0) * k / n;
                for (int it = 0; it < 80; ++it) {
                    const double m1 = lo + (hi - lo) / 3.0;
                    const double m2 = hi - (hi - lo) / 3.0;
                    if (absg(m1) < absg(m2)) hi = m2; else lo = m1;
                }
                const double tmin = 0.5 * (lo + hi);
                if (absg(tmin) < 1e-9) out.push_back(tmin);
            }
            prev = cur;
            cur = next;
        }
        return out;
    }
    return out;  // Ohmic and tanh-Pauli rates stay finite
}

// ---------------------------------------------------------------------------
// Named parameters
// ---------------------------------------------------------------------------

std::vector<std::string> parameter_names(const ModelSpec& model) {
    struct Visitor {
        std::vector<std::string> operator()(const OhmicDephasing&) const {
            return {"omega_c", "s"};
        }
        std::vector<std::string> operator()(const PolarizationDephasing&) const {
            return {"delta_n", "sigma", "omega1", "omega2", "xi"};
        }
        std::vector<std::string> operator()(const JaynesCummings&) const {
            return {"lambda", "gamma_m", "delta"};
        }
        std::vector<std::string> operator()(const PauliTanh&) const {
            return {"lambda", "omega"};
        }
        std::vector<std::string> operator()(const PauliTan&) const {
            return {"lambda", "omega"};
        }
    };
    return std::visit(Visitor{}, model);
}

std::string driving_parameter(const ModelSpec& model) {
    struct Visitor {
        std::string operator()(const OhmicDephasing&) const { return "s"; }
        std::string operator()(const PolarizationDephasing&) const { return "xi"; }
        std::string operator()(const JaynesCummings&) const { return "gamma_m"; }
        std::string operator()(const PauliTanh&) const { return "omega"; }
        std::string operator()(const PauliTan&) const { return "omega"; }
    };
    return std::visit(Visitor{}, model);
}

namespace {

template <typename M>
double* field_pointer(M& m, std::string_view name) {
    if constexpr (std::is_same_v<M, OhmicDephasing>) {
        if (name == "omega_c") return &m.omega_c;
        if (name == "s") return &m.s;
    } else if constexpr (std::is_same_v<M, PolarizationDephasing>) {
        if (name == "delta_n") return &m.delta_n;
        if (name == "sigma") return &m.sigma;
        if (name == "omega1") return &m.omega1;
        if (name == "omega2") return &m.omega2;
        if (name == "xi") return &m.xi;
    } else if constexpr (std::is_same_v<M, JaynesCummings>) {
        if (name == "lambda") return &m.lambda;
        if (name == "gamma_m") return &m.gamma_m;
        if (name == "delta") return &m.delta;
    } else {
        if (name == "lambda") return &m.lambda;
        if (name == "omega") return &m.omega;
    }
    return nullptr;
}

}  // namespace

double get_parameter(const ModelSpec& model, std::string_view name) {
    return std::visit(
        [&](const auto& m) -> double {
            auto mm = m;
            if (double* p = field_pointer(mm, name)) return *p;
            throw DomainError("model '" + model_name(ModelSpec{m}) +
                              "' has no parameter '" + std::string(name) + "'");
        },
        model);
}

ModelSpec with_parameter(ModelSpec model, std::string_view name, double value) {
    std::visit(
        [&](auto& m) {
            if (double* p = field_pointer(m, name)) {
                *p = value;
                return;
            }
            throw DomainError("model '" + model_name(ModelSpec{m}) +
                              "' has no parameter '" + std::string(name) + "'");
        },
        model);
    validate(model);
    return model;
}

}  // namespace qdyn
