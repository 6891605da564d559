#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdyn/models.hpp"
#include "qdyn/qubit.hpp"

namespace qdyn {

struct SweepSpec {
    std::string parameter;
    double lo = 0.0;
    double hi = 1.0;
    int points = 64;
};

struct AnalysisToggles {
    bool speed = false;
    bool blp = false;
    bool divisibility = false;

    bool any() const { return speed || blp || divisibility; }
};

struct ToleranceSet {
    double fd_step = 1e-4;      // in natural time units of the model
    double ode_tol = 1e-9;
    double cp_epsilon = 1e-10;  // Choi eigenvalue threshold
    double blp_epsilon = 1e-8;  // backflow zero threshold
};

struct DistancePair {
    PureStateAngles a, b;
};

struct RunConfig {
    ModelSpec model = OhmicDephasing{};
    PureStateAngles initial{1.5707963267948966, 0.0};
    double t_max = 10.0;  // natural units of the model's reference frequency
    int n_points = 2000;
    std::optional<SweepSpec> sweep;
    AnalysisToggles analysis;
    std::string out_dir = ".";
    ToleranceSet tol;
    std::uint64_t seed = 0x5eed;
    std::vector<DistancePair> distance_pairs;
    int jobs = 1;

    void validate() const;
};

/// Parses and validates a JSON run configuration. Unknown keys are rejected;
/// every failure carries the key path it refers to.
RunConfig parse_config(const std::string& json_text);

}  // namespace qdyn
