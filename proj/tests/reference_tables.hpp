#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/efa.hpp"
#include "core/matrix.hpp"

// Published tables from the original 100-profile study, transcribed verbatim.
namespace factorlens::reference {

inline const std::vector<std::string> kVariables = {"post",     "follower",     "following",  "likes",
                                                    "comments", "total_person", "pic_person", "self"};

// Extraction communalities.
inline constexpr std::array<double, 8> kCommunalities = {0.873, 0.884, 0.895, 0.861, 0.786, 0.763, 0.945, 0.918};

// Initial eigenvalues with % of variance and cumulative %.
inline constexpr std::array<double, 8> kEigenvalues = {3.202, 2.672, 1.051, 0.348, 0.324, 0.222, 0.145, 0.036};
inline constexpr std::array<double, 8> kPctVariance = {40.030, 33.395, 13.138, 4.347, 4.048, 2.775, 1.818, 0.450};
inline constexpr std::array<double, 8> kCumulativePct = {40.030, 73.425, 86.563, 90.909,
                                                         94.957, 97.733, 99.550, 100.000};

// Rotation sums of squared loadings.
inline constexpr std::array<double, 3> kRotationSsl = {2.642, 2.554, 1.729};
inline constexpr double kRotationSslTotal = 6.925;

inline LoadingMatrix unrotated_loadings() {
  return {Matrix::from_rows({{0.760, -0.106, -0.532},
                             {0.847, -0.288, 0.288},
                             {0.676, 0.115, -0.652},
                             {0.763, -0.440, 0.293},
                             {0.747, -0.334, 0.341},
                             {0.251, 0.817, 0.180},
                             {0.365, 0.894, 0.111},
                             {0.338, 0.889, 0.110}}),
          kVariables};
}

inline LoadingMatrix rotated_loadings() {
  return {Matrix::from_rows({{0.018, 0.350, 0.886},
                             {0.059, 0.909, 0.234},
                             {0.170, 0.139, 0.920},
                             {-0.107, 0.904, 0.181},
                             {-0.003, 0.876, 0.133},
                             {0.873, -0.025, 0.001},
                             {0.965, -0.002, 0.123},
                             {0.952, -0.021, 0.109}}),
          kVariables};
}

inline constexpr int kBartlettDf = 28;

}  // namespace factorlens::reference
