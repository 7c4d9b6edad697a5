#pragma once

#include "toda/rootdata.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace toda::testing {

inline std::vector<LieType> supported_types() {
    std::vector<LieType> out;
    for (int n = 1; n <= 8; ++n) out.push_back({Family::A, n});
    for (int n = 2; n <= 8; ++n) out.push_back({Family::B, n});
    for (int n = 3; n <= 8; ++n) out.push_back({Family::C, n});
    for (int n = 4; n <= 8; ++n) out.push_back({Family::D, n});
    for (int n = 6; n <= 8; ++n) out.push_back({Family::E, n});
    out.push_back({Family::F, 4});
    out.push_back({Family::G, 2});
    return out;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int dim, double scale = 1.0) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * n01(rng);
    return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// (rs, tau) pairs of the folding table, one per row plus extra ranks.
struct TableCase {
    LieType type;
    std::string tau;
    std::string folded;
    int d_N;
    int kappa_sq_num;
    int kappa_sq_den;
};

inline std::vector<TableCase> folding_table_cases() {
    return {
        {{Family::A, 4}, "swap", "B2", 2, 1, 1},
        {{Family::A, 6}, "swap", "B3", 3, 1, 1},
        {{Family::A, 3}, "swap", "C2", 2, 2, 1},
        {{Family::A, 5}, "swap", "C3", 3, 2, 1},
        {{Family::D, 4}, "swap", "B3", 3, 2, 1},
        {{Family::D, 5}, "swap", "B4", 4, 2, 1},
        {{Family::D, 4}, "triality", "G2", 2, 2, 1},
        {{Family::E, 6}, "swap", "F4", 4, 2, 1},
    };
}

// log Gamma(x), x > 0: recurrence up to x >= 20, then the Stirling series through x^{-9}.
// Independent of std::lgamma so that it can serve as an oracle.
inline double ln_gamma_oracle(double x) {
    double shift = 0;
    while (x < 20) {
        shift -= std::log(x);
        x += 1;
    }
    const double x2 = x * x;
    double series = 1.0 / (12 * x) - 1.0 / (360 * x * x2) + 1.0 / (1260 * x * x2 * x2) -
                    1.0 / (1680 * x * x2 * x2 * x2) + 1.0 / (1188 * x * x2 * x2 * x2 * x2);
    return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2 * std::numbers::pi) + series;
}

}  // namespace toda::testing
