#pragma once

// Backflow of information (trace-distance measure over state pairs) and
// CP-divisibility (canonical rate signs; Choi positivity of intermediate
// maps). The two notions deliberately stay separate: the tanh-Pauli family
// is CP-indivisible yet never shows backflow.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qdyn/models.hpp"
#include "qdyn/qubit.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn {

/// 4x4 real transfer matrix acting on (1, n); row 0 is (1,0,0,0) for any
/// trace-preserving map, and an affine Bloch map embeds as [[1, 0], [b, M]].
using PauliTransferMatrix = Eigen::Matrix4d;

PauliTransferMatrix ptm_from_map(const AffineBlochMap& map);
PauliTransferMatrix ptm(const ModelSpec& model, double t);

/// Transfer matrix of the intermediate map between times s <= t, i.e.
/// T(t) T(s)^{-1}. Throws SingularIntermediateError when T(s) has condition
/// number above 1e12.
PauliTransferMatrix intermediate_map(const ModelSpec& model, double s, double t);

/// Minimum eigenvalue of the Choi matrix C = (1/4) sum_{mu,nu} T[nu][mu]
/// sigma_mu^T (x) sigma_nu, normalized to unit trace (the identity map gives
/// spectrum {1,0,0,0}). Negative iff the map is not completely positive.
double choi_min_eigenvalue(const PauliTransferMatrix& T);

/// D(t) between the evolutions of two pure initial states, per grid point.
std::vector<double> trace_distance_curve(const ModelSpec& model,
                                         const PureStateAngles& a,
                                         const PureStateAngles& b,
                                         const TimeGrid& grid);

struct BackflowInterval {
    double t_start = 0.0;
    double t_end = 0.0;
    double gain = 0.0;  // D(t_end) - D(t_start)
};

/// Maximal intervals on which the discrete derivative of D exceeds the
/// threshold; endpoints are linearly interpolated from the derivative's
/// sign changes.
std::vector<BackflowInterval> backflow_intervals(
    const TimeGrid& grid, std::span<const double> d,
    double derivative_threshold = 1e-10);

struct PairSearchGrid {
    int theta_points = 8;
    int phi_points = 8;
    int time_points = 4001;
    int refine_steps = 48;      // golden-section passes over theta
    bool exhaustive = false;    // search non-antipodal pairs too (slow)
};

struct BlpResult {
    double measure = 0.0;
    PureStateAngles state_a, state_b;
    std::vector<BackflowInterval> intervals;  // for the optimal pair
};

/// Total information backflow over [0, horizon]: max over searched pure
/// pairs of the summed trace-distance gains. The default search covers
/// antipodal pairs (where the optimum sits for every catalogued family)
/// with one golden-section refinement pass; `exhaustive` widens it to
/// independent pairs as a verification mode.
BlpResult blp_measure(const ModelSpec& model, double horizon,
                      const PairSearchGrid& search = {});

struct RateWitness {
    int rate_index = 0;  // 1-based, matching gamma_1..gamma_3
    double t = 0.0;
    double value = 0.0;
};

struct RateDivisibility {
    bool divisible = true;
    std::optional<RateWitness> witness;
    int singular_skipped = 0;
};

/// Divisible iff every canonical rate stays >= -tol on the grid. Singular
/// points are skipped and counted; the verdict then covers the rest.
RateDivisibility rate_sign_divisibility(const ModelSpec& model,
                                        const TimeGrid& grid,
                                        double tol = 1e-12);

struct ChoiWitness {
    double s = 0.0;
    double t = 0.0;
    double min_eigenvalue = 0.0;
};

struct ChoiDivisibility {
    bool divisible = true;
    double min_eigenvalue = 0.0;  // over the whole scan
    std::optional<ChoiWitness> witness;
    int cells = 0;
    int skipped = 0;  // ill-conditioned T(s) nodes
};

/// Triangular scan of intermediate maps over 0 <= s < t <= horizon
/// (grid_points nodes per axis); divisible iff no Choi eigenvalue drops
/// below -eps.
ChoiDivisibility cp_divisibility_scan(const ModelSpec& model, double horizon,
                                      int grid_points = 40, double eps = 1e-10);

struct NonMarkovReport {
    double blp = 0.0;
    std::vector<BackflowInterval> intervals;
    PureStateAngles pair_a, pair_b;
    bool divisible = true;
    std::optional<ChoiWitness> witness;
};

NonMarkovReport nonmarkov_report(const ModelSpec& model, double horizon,
                                 const PairSearchGrid& search = {},
                                 int divisibility_grid = 40,
                                 double choi_eps = 1e-10,
                                 double blp_eps = 1e-8);

/// Parameter value at which the Choi-scan verdict flips, located by
/// bisection over [lo, hi]. The endpoints must disagree.
double divisibility_threshold(const ModelSpec& family,
                              std::string_view parameter, double lo, double hi,
                              double horizon, int grid_points = 40,
                              double eps = 1e-10, double param_tol = 1e-3);

/// Parameter value at which blp crosses blp_eps, by bisection. The
/// endpoints must straddle the threshold.
double backflow_threshold(const ModelSpec& family, std::string_view parameter,
                          double lo, double hi, double horizon,
                          double blp_eps = 1e-8,
                          const PairSearchGrid& search = {4, 4, 2001, 24},
                          double param_tol = 1e-3);

}  // namespace qdyn
