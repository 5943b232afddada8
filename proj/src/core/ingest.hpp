#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matrix.hpp"

namespace factorlens {

using Warnings = std::vector<std::string>;

struct PostRecord {
  std::string post_id;
  std::int64_t likes = 0;
  std::int64_t comments = 0;
  std::int64_t created_at = 0;  // seconds since epoch
  std::int64_t persons_total = 0;
  bool contains_person = false;
  bool contains_self = false;
};

struct ProfileRecord {
  std::string user_id;
  std::int64_t followers = 0;
  std::int64_t following = 0;
  std::int64_t posts_total = 0;
  std::vector<PostRecord> posts;
};

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "post", "follower", "following", "likes", "comments", "total_person", "pic_person", "self"};

/// The eight observed variables, in kFeatureNames order.
struct FeatureVector {
  std::int64_t post = 0;
  std::int64_t follower = 0;
  std::int64_t following = 0;
  std::int64_t likes = 0;
  std::int64_t comments = 0;
  std::int64_t total_person = 0;
  std::int64_t pic_person = 0;
  std::int64_t self = 0;

  std::array<double, kFeatureCount> values() const;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureTable {
  std::vector<std::string> user_ids;
  std::vector<FeatureVector> rows;

  /// Observed-variable matrix; `log1p` applies log(1+x) to every column.
  DataMatrix to_data_matrix(bool log1p = false) const;
};

inline constexpr int kQuestionCount = 6;

struct SurveyResponse {
  std::string user_id;
  int question = 0;  // 1..6
  std::string worker_id;
  bool yes = false;
};

struct VoteTally {
  int yes_count = 0;
  int no_count = 0;
  int label = 0;
};

struct UserLabels {
  std::string user_id;
  std::array<VoteTally, kQuestionCount> questions{};
};

/// Majority-vote labels; users kept in order of first appearance.
struct LabelSet {
  std::vector<UserLabels> users;

  const UserLabels* find(std::string_view user_id) const;
};

/// Plain 0/1 label table, as read back from labels.csv.
struct LabelTable {
  std::vector<std::string> user_ids;
  std::vector<std::array<int, kQuestionCount>> labels;

  std::vector<int> column(int question) const;
};

enum class VoteMode { kStrict, kLenient };

/// Sorts posts most-recent-first: created_at descending, post_id ascending.
void sort_posts(std::vector<PostRecord>& posts);

/// Throws ValidationError on negative counts or inconsistent person flags.
void validate_profile(const ProfileRecord& profile);

/// Features over the `window` most recent posts. Posts are re-sorted
/// internally, so input order does not matter.
FeatureVector extract_features(const ProfileRecord& profile, std::size_t window = 10, Warnings* warnings = nullptr);

LabelSet aggregate_labels(std::span<const SurveyResponse> responses, VoteMode mode = VoteMode::kStrict,
                          Warnings* warnings = nullptr);

LabelTable to_label_table(const LabelSet& labels, std::span<const std::string> user_order);

std::vector<ProfileRecord> parse_profiles_jsonl(std::string_view text, const std::string& source,
                                                Warnings* warnings = nullptr);
std::vector<SurveyResponse> parse_survey_csv(std::string_view text, const std::string& source);

std::string profiles_jsonl(std::span<const ProfileRecord> profiles);
std::string survey_csv(std::span<const SurveyResponse> responses);

std::string features_csv(const FeatureTable& table);
FeatureTable parse_features_csv(std::string_view text, const std::string& source);

std::string labels_csv(const LabelTable& labels);
LabelTable parse_labels_csv(std::string_view text, const std::string& source);

}  // namespace factorlens
