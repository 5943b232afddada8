#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ingest.hpp"
#include "matrix.hpp"

namespace factorlens {

/// Vote-pattern counts per question (rows: yes = 0..5 of 5 raters) observed
/// in the published 100-profile survey.
inline constexpr std::array<std::array<int, 6>, kQuestionCount> kPublishedVotePatterns = {{
    {2, 8, 17, 14, 15, 44},
    {2, 11, 19, 13, 13, 42},
    {34, 19, 16, 15, 12, 4},
    {13, 17, 18, 17, 14, 21},
    {3, 7, 17, 13, 18, 42},
    {7, 13, 16, 14, 18, 32},
}};

inline constexpr int kRatersPerProfile = 5;

/// Survey responses where, per question, users sorted by ascending
/// propensity receive the vote patterns yes=0..5 in the given counts.
/// `counts[q]` must sum to the number of users. Each user is rated by
/// 5 distinct workers drawn from a pool.
std::vector<SurveyResponse> make_survey_by_rank(
    const std::vector<std::string>& user_ids, const std::vector<std::array<double, kQuestionCount>>& propensity,
    const std::array<std::array<int, 6>, kQuestionCount>& counts, std::uint64_t seed);

/// Scales the published counts to n users (largest remainder).
std::array<std::array<int, 6>, kQuestionCount> scaled_vote_patterns(std::size_t n);

struct SyntheticDataset {
  std::vector<ProfileRecord> profiles;
  std::vector<SurveyResponse> responses;
  Matrix latent;  // n x 3 generating factors
};

/// Profiles and survey from a three-factor model.
///
/// Latent factors f1 (people in pictures), f2 (audience response), f3 (own
/// activity) are iid N(0,1). Each observed variable is driven by
/// z = 0.9 f + sqrt(0.19) e on its factor, then mapped to counts:
///   f1: pic_person, total_person, self
///   f2: follower, likes, comments
///   f3: post, following
/// Every profile lists 12 posts so the 10-post window is exercised.
/// Question q propensity is beta_q . f + 0.6 eta; votes follow
/// make_survey_by_rank with the published vote patterns scaled to n.
SyntheticDataset make_synthetic_dataset(std::uint64_t seed, std::size_t n = 100);

/// n x p standardized-scale data with one factor: x_j = loading f + sqrt(1-loading^2) e_j.
Matrix make_one_factor_data(std::size_t n, std::size_t p, double loading, std::uint64_t seed,
                            std::vector<double>* factor = nullptr);

inline constexpr std::uint64_t kBundledSeed = 2017;

}  // namespace factorlens
