#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace factorlens {
namespace {

constexpr std::size_t kWorkerPool = 25;
constexpr std::size_t kListedPosts = 12;
constexpr std::size_t kWindow = 10;
constexpr double kLoading = 0.9;

// Question weights on (f1, f2, f3). Question 3 asks about risk, so its
// propensity runs against the trust factors.
constexpr std::array<std::array<double, 3>, kQuestionCount> kQuestionWeights = {{
    {0.9, 0.7, 0.5},
    {0.8, 0.8, 0.4},
    {-0.7, -0.6, -0.4},
    {0.6, 0.3, 0.5},
    {0.8, 0.7, 0.5},
    {0.6, 0.6, 0.5},
}};
constexpr double kPropensityNoise = 0.6;

std::int64_t round_count(double v) { return static_cast<std::int64_t>(std::llround(std::max(0.0, v))); }

std::string padded(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

// Splits `total` into `parts` non-negative integers with mild jitter.
std::vector<std::int64_t> split_total(std::int64_t total, std::size_t parts, Rng& rng) {
  std::vector<double> w(parts);
  for (auto& x : w) x = rng.uniform(0.85, 1.15);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::int64_t> out(parts);
  std::int64_t used = 0;
  for (std::size_t j = 0; j + 1 < parts; ++j) {
    out[j] = std::min<std::int64_t>(total - used, static_cast<std::int64_t>(std::floor(total * w[j] / sum)));
    used += out[j];
  }
  out.back() = total - used;
  return out;
}

}  // namespace

std::array<std::array<int, 6>, kQuestionCount> scaled_vote_patterns(std::size_t n) {
  std::array<std::array<int, 6>, kQuestionCount> out{};
  for (int q = 0; q < kQuestionCount; ++q) {
    const auto& src = kPublishedVotePatterns[q];
    const double total = std::accumulate(src.begin(), src.end(), 0.0);
    std::array<double, 6> remainder{};
    int assigned = 0;
    for (int y = 0; y < 6; ++y) {
      const double exact = src[y] * static_cast<double>(n) / total;
      out[q][y] = static_cast<int>(std::floor(exact));
      remainder[y] = exact - out[q][y];
      assigned += out[q][y];
    }
    std::array<int, 6> order{0, 1, 2, 3, 4, 5};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (int i = 0; assigned < static_cast<int>(n); ++i, ++assigned) ++out[q][order[i % 6]];
  }
  return out;
}

std::vector<SurveyResponse> make_survey_by_rank(
    const std::vector<std::string>& user_ids, const std::vector<std::array<double, kQuestionCount>>& propensity,
    const std::array<std::array<int, 6>, kQuestionCount>& counts, std::uint64_t seed) {
  const std::size_t n = user_ids.size();
  if (propensity.size() != n) throw ValidationError("one propensity row per user required");
  for (const auto& row : counts) {
    if (std::accumulate(row.begin(), row.end(), 0) != static_cast<int>(n)) {
      throw ValidationError("vote pattern counts must sum to the number of users");
    }
  }
  Rng rng(seed);

  std::vector<std::array<std::size_t, kRatersPerProfile>> raters(n);
  std::vector<std::size_t> pool(kWorkerPool);
  for (auto& r : raters) {
    std::iota(pool.begin(), pool.end(), std::size_t{1});
    for (std::size_t i = 0; i < kRatersPerProfile; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(kWorkerPool - i));
      std::swap(pool[i], pool[j]);
      r[i] = pool[i];
    }
  }

  std::vector<std::array<int, kQuestionCount>> yes_count(n);
  for (int q = 0; q < kQuestionCount; ++q) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return propensity[a][q] < propensity[b][q]; });
    std::size_t pos = 0;
    for (int y = 0; y < 6; ++y)
      for (int c = 0; c < counts[q][y]; ++c) yes_count[order[pos++]][q] = y;
  }

  std::vector<SurveyResponse> out;
  out.reserve(n * kQuestionCount * kRatersPerProfile);
  for (std::size_t u = 0; u < n; ++u) {
    for (int q = 0; q < kQuestionCount; ++q) {
      std::array<bool, kRatersPerProfile> says_yes{};
      for (int i = 0; i < yes_count[u][q]; ++i) says_yes[i] = true;
      rng.shuffle(std::span<bool>(says_yes));
      for (std::size_t w = 0; w < kRatersPerProfile; ++w) {
        out.push_back(SurveyResponse{user_ids[u], q + 1, padded("w", raters[u][w], 2), says_yes[w]});
      }
    }
  }
  return out;
}

SyntheticDataset make_synthetic_dataset(std::uint64_t seed, std::size_t n) {
  if (n < 10) throw ValidationError("synthetic dataset needs at least 10 users");
  Rng rng(seed);
  const double unique = std::sqrt(1.0 - kLoading * kLoading);

  SyntheticDataset ds;
  ds.latent = Matrix(n, 3);
  std::vector<std::string> ids;
  std::vector<std::array<double, kQuestionCount>> propensity(n);

  for (std::size_t u = 0; u < n; ++u) {
    std::array<double, 3> f{};
    for (int j = 0; j < 3; ++j) ds.latent(u, j) = f[j] = rng.normal();
    auto indicator = [&](int factor) { return kLoading * f[factor] + unique * rng.normal(); };

    const double z_pic = indicator(0);
    const double z_total = indicator(0);
    const double z_self = indicator(0);
    const double z_follower = indicator(1);
    const double z_likes = indicator(1);
    const double z_comments = indicator(1);
    const double z_post = indicator(2);
    const double z_following = indicator(2);

    ProfileRecord p;
    p.user_id = padded("u", u + 1, 4);
    p.posts_total = std::max<std::int64_t>(static_cast<std::int64_t>(kListedPosts), round_count(250.0 + 90.0 * z_post));
    p.following = round_count(400.0 + 130.0 * z_following);
    p.followers = round_count(900.0 + 260.0 * z_follower);

    const std::int64_t pic_person = std::clamp<std::int64_t>(std::llround(5.0 + 2.2 * z_pic), 0, kWindow);
    const std::int64_t self = std::clamp<std::int64_t>(std::llround(3.5 + 1.8 * z_self), 0, pic_person);
    const std::int64_t extra_people = pic_person > 0 ? round_count(4.0 + 2.5 * z_total) : 0;
    const auto likes = split_total(round_count(600.0 + 200.0 * z_likes), kWindow, rng);
    const auto comments = split_total(round_count(60.0 + 22.0 * z_comments), kWindow, rng);

    // Which of the windowed posts show people, and which of those show the user.
    std::array<std::size_t, kWindow> slots{};
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(slots));
    std::array<std::int64_t, kWindow> persons{};
    std::array<bool, kWindow> has_self{};
    for (std::int64_t i = 0; i < pic_person; ++i) {
      persons[slots[i]] = 1;
      has_self[slots[i]] = i < self;
    }
    for (std::int64_t e = 0; e < extra_people; ++e) persons[slots[rng.index(static_cast<std::uint64_t>(pic_person))]] += 1;

    std::int64_t created = 1'500'000'000 - static_cast<std::int64_t>(rng.index(86'400));
    for (std::size_t j = 0; j < kListedPosts; ++j) {
      PostRecord post;
      post.post_id = p.user_id + "-p" + padded("", j + 1, 2);
      post.created_at = created;
      created -= 3'600 + static_cast<std::int64_t>(rng.index(5 * 86'400));
      if (j < kWindow) {
        post.likes = likes[j];
        post.comments = comments[j];
        post.persons_total = persons[j];
        post.contains_self = has_self[j];
      } else {
        post.likes = static_cast<std::int64_t>(rng.index(120));
        post.comments = static_cast<std::int64_t>(rng.index(12));
        post.persons_total = rng.bernoulli(0.5) ? 1 + static_cast<std::int64_t>(rng.index(3)) : 0;
        post.contains_self = post.persons_total > 0 && rng.bernoulli(0.5);
      }
      post.contains_person = post.persons_total > 0;
      p.posts.push_back(std::move(post));
    }

    for (int q = 0; q < kQuestionCount; ++q) {
      const auto& beta = kQuestionWeights[q];
      propensity[u][q] = beta[0] * f[0] + beta[1] * f[1] + beta[2] * f[2] + kPropensityNoise * rng.normal();
    }
    ids.push_back(p.user_id);
    ds.profiles.push_back(std::move(p));
  }

  ds.responses = make_survey_by_rank(ids, propensity, scaled_vote_patterns(n), seed ^ 0x5eed5eed5eedULL);
  return ds;
}

Matrix make_one_factor_data(std::size_t n, std::size_t p, double loading, std::uint64_t seed, std::vector<double>* factor) {
  Rng rng(seed);
  const double unique = std::sqrt(1.0 - loading * loading);
  Matrix x(n, p);
  if (factor) factor->assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = rng.normal();
    if (factor) (*factor)[i] = f;
    for (std::size_t j = 0; j < p; ++j) x(i, j) = loading * f + unique * rng.normal();
  }
  return x;
}

}  // namespace factorlens
