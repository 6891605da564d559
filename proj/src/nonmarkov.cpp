#include "qdyn/nonmarkov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace qdyn {

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;
using Eigen::Matrix2cd;
using Eigen::Matrix4cd;

const std::array<Matrix2cd, 4>& pauli_basis() {
    static const std::array<Matrix2cd, 4> sigma = [] {
        std::array<Matrix2cd, 4> s;
        s[0] << 1, 0, 0, 1;
        s[1] << 0, 1, 1, 0;
        s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
        s[3] << 1, 0, 0, -1;
        return s;
    }();
    return sigma;
}

Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

PureStateAngles antipode(const PureStateAngles& a) {
    double phi = a.phi + kPi;
    if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
    return {kPi - a.theta, phi};
}

// Summed positive gains of the curve d over the grid, together with the
// detected intervals.
double backflow_score(const TimeGrid& grid, std::span<const double> d,
                      double threshold,
                      std::vector<BackflowInterval>* intervals_out) {
    auto intervals = backflow_intervals(grid, d, threshold);
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.gain;
    if (intervals_out) *intervals_out = std::move(intervals);
    return total;
}

}  // namespace

PauliTransferMatrix ptm_from_map(const AffineBlochMap& map) {
    PauliTransferMatrix T = PauliTransferMatrix::Zero();
    T(0, 0) = 1.0;
    T.block<3, 1>(1, 0) = map.offset;
    T.block<3, 3>(1, 1) = map.linear;
    return T;
}

PauliTransferMatrix ptm(const ModelSpec& model, double t) {
    return ptm_from_map(bloch_map(model, t));
}

PauliTransferMatrix intermediate_map(const ModelSpec& model, double s,
                                     double t) {
    if (!(s >= 0.0) || !(t >= s))
        throw DomainError("intermediate map requires 0 <= s <= t");
    const PauliTransferMatrix Ts = ptm(model, s);
    Eigen::JacobiSVD<PauliTransferMatrix> svd(Ts);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw SingularIntermediateError("map too ill-conditioned to invert", s);
    return ptm(model, t) * Ts.inverse();
}

double choi_min_eigenvalue(const PauliTransferMatrix& T) {
    if (!T.allFinite()) throw DomainError("transfer matrix must be finite");
    const auto& sigma = pauli_basis();
    Matrix4cd choi = Matrix4cd::Zero();
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
            choi += T(nu, mu) * kron2(sigma[mu].transpose(), sigma[nu]);
    choi *= 0.25;
    if ((choi - choi.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw InternalConsistencyError("Choi matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(0.5 * (choi + choi.adjoint()),
                                                Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::vector<double> trace_distance_curve(const ModelSpec& model,
                                         const PureStateAngles& a,
                                         const PureStateAngles& b,
                                         const TimeGrid& grid) {
    const Eigen::Vector3d na = bloch_from_angles(a);
    const Eigen::Vector3d nb = bloch_from_angles(b);
    const Eigen::Vector3d diff = na - nb;  // offsets cancel under a common map
    const auto maps = bloch_map_grid(model, grid);
    std::vector<double> d;
    d.reserve(maps.size());
    for (const auto& map : maps) d.push_back(0.5 * (map.linear * diff).norm());
    return d;
}

std::vector<BackflowInterval> backflow_intervals(const TimeGrid& grid,
                                                 std::span<const double> d,
                                                 double derivative_threshold) {
    if (d.size() != static_cast<size_t>(grid.size()))
        throw DomainError("curve length does not match the grid");
    if (d.size() < 3) throw DomainError("need at least 3 samples");

    const double dt = grid.dt();
    const int nd = static_cast<int>(d.size()) - 1;
    auto deriv = [&](int k) { return (d[k + 1] - d[k]) / dt; };
    auto mid = [&](int k) { return grid.at(k) + 0.5 * dt; };
    auto d_at = [&](double t) {
        const double x = std::clamp((t - grid.t0) / dt, 0.0, double(nd));
        const int k = std::min(static_cast<int>(x), nd - 1);
        return d[k] + (d[k + 1] - d[k]) * (x - k);
    };

    std::vector<BackflowInterval> out;
    int k = 0;
    while (k < nd) {
        if (deriv(k) <= derivative_threshold) {
            ++k;
            continue;
        }
        const int start = k;
        while (k < nd && deriv(k) > derivative_threshold) ++k;
        const int stop = k - 1;  // last sample above threshold

        double t_start = grid.t0;
        if (start > 0) {
            const double g0 = deriv(start - 1), g1 = deriv(start);
            t_start = mid(start - 1) +
                      (derivative_threshold - g0) / (g1 - g0) * dt;
        }
        double t_end = grid.t1;
        if (stop < nd - 1) {
            const double g0 = deriv(stop), g1 = deriv(stop + 1);
            t_end = mid(stop) + (derivative_threshold - g0) / (g1 - g0) * dt;
        }
        out.push_back({t_start, t_end, d_at(t_end) - d_at(t_start)});
    }
    return out;
}

BlpResult blp_measure(const ModelSpec& model, double horizon,
                      const PairSearchGrid& search) {
    if (!(horizon > 0.0)) throw DomainError("blp horizon must be > 0");
    if (search.theta_points < 2 || search.phi_points < 1 ||
        search.time_points < 3)
        throw DomainError("pair search grid too small");

    const TimeGrid grid = TimeGrid::uniform(0.0, horizon, search.time_points);
    const auto maps = bloch_map_grid(model, grid);

    auto score_direction = [&](const Eigen::Vector3d& unit,
                               std::vector<BackflowInterval>* ivs) {
        std::vector<double> d(maps.size());
        for (size_t k = 0; k < maps.size(); ++k)
            d[k] = (maps[k].linear * unit).norm();
        return backflow_score(grid, d, 1e-10, ivs);
    };

    BlpResult best;
    double best_theta = 0.0, best_phi = 0.0;
    bool winner_antipodal = true;

    auto consider = [&](double theta, double phi) {
        const PureStateAngles a{theta, phi};
        const double score =
            score_direction(bloch_from_angles(a), nullptr);
        if (score > best.measure) {
            best.measure = score;
            best_theta = theta;
            best_phi = phi;
            winner_antipodal = true;
        }
    };

    for (int i = 0; i < search.theta_points; ++i) {
        const double theta = kPi * i / (search.theta_points - 1);
        for (int j = 0; j < search.phi_points; ++j)
            consider(theta, 2.0 * kPi * j / search.phi_points);
    }
    // The exact equator, always: for strongly damped transverse blocks the
    // distance gain falls off quadratically in theta - pi/2, far below any
    // grid resolution, while at pi/2 itself it stays linear in the revival.
    consider(kPi / 2.0, 0.0);

    if (search.exhaustive) {
        // Independent pure pairs; D scales linearly with |n_a - n_b| under a
        // common affine map, so this can only rediscover an antipodal
        // optimum. Kept as a verification mode.
        for (int i = 0; i < search.theta_points; ++i)
            for (int j = 0; j < search.phi_points; ++j)
                for (int i2 = 0; i2 < search.theta_points; ++i2)
                    for (int j2 = 0; j2 < search.phi_points; ++j2) {
                        const PureStateAngles a{kPi * i / (search.theta_points - 1),
                                                2.0 * kPi * j / search.phi_points};
                        const PureStateAngles b{kPi * i2 / (search.theta_points - 1),
                                                2.0 * kPi * j2 / search.phi_points};
                        const Eigen::Vector3d diff =
                            bloch_from_angles(a) - bloch_from_angles(b);
                        if (diff.norm() < 1e-12) continue;
                        std::vector<double> d(maps.size());
                        for (size_t k = 0; k < maps.size(); ++k)
                            d[k] = 0.5 * (maps[k].linear * diff).norm();
                        const double score = backflow_score(grid, d, 1e-10, nullptr);
                        if (score > best.measure) {
                            best.measure = score;
                            best.state_a = a;
                            best.state_b = b;
                            winner_antipodal = false;
                        }
                    }
    }

    // Golden-section pass over theta around the best grid cell.
    const double step = kPi / (search.theta_points - 1);
    double lo = std::max(0.0, best_theta - step);
    double hi = std::min(kPi, best_theta + step);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = score_direction(bloch_from_angles({x1, best_phi}), nullptr);
    double f2 = score_direction(bloch_from_angles({x2, best_phi}), nullptr);
    for (int it = 0; it < search.refine_steps; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = score_direction(bloch_from_angles({x2, best_phi}), nullptr);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = score_direction(bloch_from_angles({x1, best_phi}), nullptr);
        }
    }
    const double theta_ref = 0.5 * (lo + hi);
    const double f_ref =
        score_direction(bloch_from_angles({theta_ref, best_phi}), nullptr);
    if (f_ref > best.measure) {
        best.measure = f_ref;
        best_theta = theta_ref;
        winner_antipodal = true;
    }

    if (winner_antipodal) {
        best.state_a = {best_theta, best_phi};
        best.state_b = antipode(best.state_a);
    }
    score_direction(bloch_from_angles(best.state_a) * 0.5 -
                        bloch_from_angles(best.state_b) * 0.5,
                    &best.intervals);
    return best;
}

RateDivisibility rate_sign_divisibility(const ModelSpec& model,
                                        const TimeGrid& grid, double tol) {
    grid.validate();
    RateDivisibility result;
    for (int k = 0; k < grid.size(); ++k) {
        const double t = grid.at(k);
        RateVector r;
        try {
            r = decay_rates(model, t);
        } catch (const SingularRateError&) {
            ++result.singular_skipped;
            continue;
        }
        const double rates[3] = {r.gamma1, r.gamma2, r.gamma3};
        for (int i = 0; i < 3; ++i) {
            if (rates[i] < -tol) {
                result.divisible = false;
                result.witness = RateWitness{i + 1, t, rates[i]};
                return result;
            }
        }
    }
    return result;
}

ChoiDivisibility cp_divisibility_scan(const ModelSpec& model, double horizon,
                                      int grid_points, double eps) {
    if (!(horizon > 0.0)) throw DomainError("scan horizon must be > 0");
    if (grid_points < 2) throw DomainError("scan needs at least 2 nodes");

    const int n = grid_points;
    std::vector<PauliTransferMatrix> T(n + 1);
    std::vector<bool> usable(n + 1, true);
    ChoiDivisibility result;
    for (int k = 0; k <= n; ++k) {
        const double t = horizon * k / n;
        T[k] = ptm(model, t);
        Eigen::JacobiSVD<PauliTransferMatrix> svd(T[k]);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (!(smin > 0.0) || smax / smin > 1e12) {
            usable[k] = false;
            ++result.skipped;
        }
    }
    if (result.skipped >= n)
        throw Error("divisibility scan: no invertible nodes");

    result.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        if (!usable[i]) continue;
        const PauliTransferMatrix Ti_inv = T[i].inverse();
        for (int j = i + 1; j <= n; ++j) {
            const double ev = choi_min_eigenvalue(T[j] * Ti_inv);
            ++result.cells;
            if (ev < result.min_eigenvalue) {
                result.min_eigenvalue = ev;
                result.witness =
                    ChoiWitness{horizon * i / n, horizon * j / n, ev};
            }
        }
    }
    result.divisible = result.min_eigenvalue >= -eps;
    if (result.divisible) result.witness.reset();
    return result;
}

NonMarkovReport nonmarkov_report(const ModelSpec& model, double horizon,
                                 const PairSearchGrid& search,
                                 int divisibility_grid, double choi_eps,
                                 double blp_eps) {
    NonMarkovReport report;
    auto blp = blp_measure(model, horizon, search);
    report.blp = blp.measure <= blp_eps ? 0.0 : blp.measure;
    if (report.blp > 0.0) report.intervals = std::move(blp.intervals);
    report.pair_a = blp.state_a;
    report.pair_b = blp.state_b;
    const auto scan =
        cp_divisibility_scan(model, horizon, divisibility_grid, choi_eps);
    report.divisible = scan.divisible;
    report.witness = scan.witness;
    return report;
}

namespace {

double bisect_flip(double lo, double hi, bool at_lo,
                   const std::function<bool(double)>& pred, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid) == at_lo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double divisibility_threshold(const ModelSpec& family,
                              std::string_view parameter, double lo, double hi,
                              double horizon, int grid_points, double eps,
                              double param_tol) {
    auto divisible = [&](double v) {
        return cp_divisibility_scan(with_parameter(family, parameter, v),
                                    horizon, grid_points, eps)
            .divisible;
    };
    const bool at_lo = divisible(lo);
    if (divisible(hi) == at_lo)
        throw DomainError("divisibility verdict does not flip over the range");
    return bisect_flip(lo, hi, at_lo, divisible, param_tol);
}

double backflow_threshold(const ModelSpec& family, std::string_view parameter,
                          double lo, double hi, double horizon, double blp_eps,
                          const PairSearchGrid& search, double param_tol) {
    auto has_backflow = [&](double v) {
        return blp_measure(with_parameter(family, parameter, v), horizon,
                           search)
                   .measure > blp_eps;
    };
    const bool at_lo = has_backflow(lo);
    if (has_backflow(hi) == at_lo)
        throw DomainError("backflow verdict does not flip over the range");
    return bisect_flip(lo, hi, at_lo, has_backflow, param_tol);
}

}  // namespace qdyn
