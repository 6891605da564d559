#pragma once

// Bloch-vector state algebra for a single qubit.
//
// A state rho = (I + n.sigma)/2 is represented by its real Bloch vector n,
// |n| <= 1, with pure states on the unit sphere. The fixed sign convention
// for a pure state at polar angle theta, azimuth phi is
//
//     n = { sin(theta) cos(phi), -sin(theta) sin(phi), cos(theta) },
//
// shared by every module in this library.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "qdyn/errors.hpp"

namespace qdyn {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using BlochVector = Vec3<double>;
using DensityMatrix2 = Eigen::Matrix2cd;

/// Tolerance by which a Bloch vector may overshoot the unit ball before it
/// is rejected. Rounding in the channel maps can exceed 1 by a few ulp;
/// anything beyond this signals a bug upstream.
inline constexpr double kBlochNormTolerance = 1e-9;

/// Purity deficits 1 - |n|^2 below this are unresolvable from the rounding
/// of |n|^2 itself and are snapped to exactly zero, so states constructed
/// pure stay pure inside the fidelity affinity term.
inline constexpr double kPuritySnap = 1e-15;

struct PureStateAngles {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2*pi)

    void validate() const {
        if (!(theta >= 0.0 && theta <= std::numbers::pi))
            throw DomainError("theta outside [0, pi]");
        if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi))
            throw DomainError("phi outside [0, 2*pi)");
    }
};

template <typename Derived>
bool is_valid_bloch(const Eigen::MatrixBase<Derived>& n,
                    typename Derived::Scalar tol = kBlochNormTolerance) {
    return n.allFinite() && n.squaredNorm() <= 1.0 + tol;
}

template <typename Derived>
void require_valid_bloch(const Eigen::MatrixBase<Derived>& n) {
    if (!is_valid_bloch(n)) throw DomainError("Bloch vector outside the unit ball");
}

inline BlochVector bloch_from_angles(const PureStateAngles& a) {
    a.validate();
    const double st = std::sin(a.theta);
    return {st * std::cos(a.phi), -st * std::sin(a.phi), std::cos(a.theta)};
}

/// rho = (I + n.sigma)/2.
template <typename Derived>
DensityMatrix2 density_from_bloch(const Eigen::MatrixBase<Derived>& n) {
    require_valid_bloch(n);
    using std::complex;
    DensityMatrix2 rho;
    rho << complex<double>(1.0 + n[2], 0.0), complex<double>(n[0], -n[1]),
           complex<double>(n[0], n[1]),      complex<double>(1.0 - n[2], 0.0);
    return 0.5 * rho;
}

namespace detail {

// 1 - |n|^2 with negative overshoot (valid up to the ball tolerance)
// and sub-resolution positives both treated as exact purity.
inline double affinity_factor(double one_minus_norm2) {
    if (one_minus_norm2 < -2.0 * kBlochNormTolerance)
        throw DomainError("fidelity radicand too negative");
    return one_minus_norm2 < kPuritySnap ? 0.0 : one_minus_norm2;
}

}  // namespace detail

/// Uhlmann fidelity in Bloch form,
///   F = (1 + n1.n2 + sqrt((1-|n1|^2)(1-|n2|^2))) / 2,
/// clamped to [0,1]. Exact for qubits.
template <typename DerivedA, typename DerivedB>
double fidelity(const Eigen::MatrixBase<DerivedA>& n1,
                const Eigen::MatrixBase<DerivedB>& n2) {
    require_valid_bloch(n1);
    require_valid_bloch(n2);
    const double r1 = detail::affinity_factor(1.0 - n1.squaredNorm());
    const double r2 = detail::affinity_factor(1.0 - n2.squaredNorm());
    const double f = 0.5 * (1.0 + n1.dot(n2) + std::sqrt(r1 * r2));
    return std::clamp(f, 0.0, 1.0);
}

/// D = |n1 - n2| / 2, the qubit trace distance.
template <typename DerivedA, typename DerivedB>
double trace_distance(const Eigen::MatrixBase<DerivedA>& n1,
                      const Eigen::MatrixBase<DerivedB>& n2) {
    require_valid_bloch(n1);
    require_valid_bloch(n2);
    return 0.5 * (n1 - n2).norm();
}

namespace detail {

inline void require_density_matrix(const DensityMatrix2& rho) {
    if (std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) > 1e-12)
        throw DomainError("density matrix trace differs from 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("density matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw DomainError("density matrix not positive semidefinite");
}

inline DensityMatrix2 hermitian_sqrt(const DensityMatrix2& m) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> es(m);
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace detail

/// Uhlmann fidelity straight from the matrix definition,
///   F = (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2,
/// via 2x2 eigendecompositions. Cross-check oracle for the Bloch form;
/// not meant for hot paths. For inputs within machine precision of rank
/// deficiency the inner square root amplifies eigenvalue rounding to about
/// sqrt(eps) ~ 1e-8; comparisons against it belong in the ball interior.
inline double fidelity_matrix_oracle(const DensityMatrix2& rho1,
                                     const DensityMatrix2& rho2) {
    detail::require_density_matrix(rho1);
    detail::require_density_matrix(rho2);
    const DensityMatrix2 s1 = detail::hermitian_sqrt(rho1);
    const DensityMatrix2 inner = s1 * rho2 * s1;
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> es(0.5 * (inner + inner.adjoint()));
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.cwiseSqrt().sum();
    return std::clamp(tr * tr, 0.0, 1.0);
}

}  // namespace qdyn
