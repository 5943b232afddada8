#include "ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace factorlens {

using nlohmann::json;

std::array<double, kFeatureCount> FeatureVector::values() const {
  return {static_cast<double>(post),         static_cast<double>(follower),
          static_cast<double>(following),    static_cast<double>(likes),
          static_cast<double>(comments),     static_cast<double>(total_person),
          static_cast<double>(pic_person),   static_cast<double>(self)};
}

DataMatrix FeatureTable::to_data_matrix(bool log1p) const {
  Matrix m(rows.size(), kFeatureCount);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto v = rows[r].values();
    for (std::size_t c = 0; c < kFeatureCount; ++c) m(r, c) = log1p ? std::log1p(v[c]) : v[c];
  }
  return DataMatrix(std::move(m), std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()));
}

const UserLabels* LabelSet::find(std::string_view user_id) const {
  for (const auto& u : users)
    if (u.user_id == user_id) return &u;
  return nullptr;
}

std::vector<int> LabelTable::column(int question) const {
  if (question < 1 || question > kQuestionCount) throw ValidationError("question must be in 1..6");
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& row : labels) out.push_back(row[question - 1]);
  return out;
}

void sort_posts(std::vector<PostRecord>& posts) {
  std::sort(posts.begin(), posts.end(), [](const PostRecord& a, const PostRecord& b) {
    if (a.created_at != b.created_at) return a.created_at > b.created_at;
    return a.post_id < b.post_id;
  });
}

void validate_profile(const ProfileRecord& profile) {
  const std::string who = "profile '" + profile.user_id + "'";
  if (profile.user_id.empty()) throw ValidationError("profile with empty user_id");
  auto non_negative = [&](std::int64_t v, const char* field, const std::string& where) {
    if (v < 0) throw ValidationError(where + ": negative " + field + " (" + std::to_string(v) + ")");
  };
  non_negative(profile.followers, "followers", who);
  non_negative(profile.following, "following", who);
  non_negative(profile.posts_total, "posts_total", who);
  if (static_cast<std::int64_t>(profile.posts.size()) > profile.posts_total) {
    throw ValidationError(who + ": " + std::to_string(profile.posts.size()) + " posts listed but posts_total is " +
                          std::to_string(profile.posts_total));
  }
  for (const auto& post : profile.posts) {
    const std::string where = who + " post '" + post.post_id + "'";
    non_negative(post.likes, "likes", where);
    non_negative(post.comments, "comments", where);
    non_negative(post.persons_total, "persons_total", where);
    if (post.persons_total > 0 && !post.contains_person)
      throw ValidationError(where + ": persons_total > 0 but contains_person is false");
    if (post.contains_person && post.persons_total == 0)
      throw ValidationError(where + ": contains_person is true but persons_total is 0");
    if (post.contains_self && !post.contains_person)
      throw ValidationError(where + ": contains_self requires contains_person");
  }
}

FeatureVector extract_features(const ProfileRecord& profile, std::size_t window, Warnings* warnings) {
  if (window == 0) throw ValidationError("feature window must be at least 1");
  validate_profile(profile);

  FeatureVector f;
  f.post = profile.posts_total;
  f.follower = profile.followers;
  f.following = profile.following;

  if (profile.posts.empty()) {
    if (warnings) warnings->push_back("profile '" + profile.user_id + "': no posts, post-derived features set to 0");
    return f;
  }
  if (profile.posts.size() < window && warnings) {
    warnings->push_back("profile '" + profile.user_id + "': only " + std::to_string(profile.posts.size()) +
                        " posts, window truncated from " + std::to_string(window));
  }

  std::vector<PostRecord> posts = profile.posts;
  sort_posts(posts);
  const std::size_t used = std::min(window, posts.size());
  for (std::size_t i = 0; i < used; ++i) {
    const auto& p = posts[i];
    f.likes += p.likes;
    f.comments += p.comments;
    f.total_person += p.persons_total;
    f.pic_person += p.contains_person ? 1 : 0;
    f.self += p.contains_self ? 1 : 0;
  }
  return f;
}

LabelSet aggregate_labels(std::span<const SurveyResponse> responses, VoteMode mode, Warnings* warnings) {
  LabelSet out;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::tuple<std::string, int, std::string>> seen;

  for (const auto& r : responses) {
    if (r.question < 1 || r.question > kQuestionCount) {
      throw ValidationError("user '" + r.user_id + "': question " + std::to_string(r.question) + " outside 1..6");
    }
    if (!seen.emplace(r.user_id, r.question, r.worker_id).second) {
      throw ValidationError("duplicate response: user '" + r.user_id + "', question " + std::to_string(r.question) +
                            ", worker '" + r.worker_id + "'");
    }
    auto [it, inserted] = index.try_emplace(r.user_id, out.users.size());
    if (inserted) out.users.push_back(UserLabels{r.user_id, {}});
    auto& tally = out.users[it->second].questions[r.question - 1];
    (r.yes ? tally.yes_count : tally.no_count) += 1;
  }

  for (auto& user : out.users) {
    for (int q = 0; q < kQuestionCount; ++q) {
      auto& t = user.questions[q];
      const int total = t.yes_count + t.no_count;
      const std::string where = "user '" + user.user_id + "', question " + std::to_string(q + 1);
      if (total == 0 || t.yes_count == t.no_count) {
        const std::string what = total == 0 ? "no responses" : "tied vote " + std::to_string(t.yes_count) + "-" +
                                                                   std::to_string(t.no_count);
        if (mode == VoteMode::kStrict) throw ValidationError(where + ": " + what + " (strict majority needs an odd count)");
        if (warnings) warnings->push_back(where + ": " + what + ", label set to 0");
        t.label = 0;
        continue;
      }
      if (total % 2 == 0 && mode == VoteMode::kStrict) {
        throw ValidationError(where + ": even number of responses (" + std::to_string(total) + ")");
      }
      t.label = t.yes_count > t.no_count ? 1 : 0;
    }
  }
  return out;
}

LabelTable to_label_table(const LabelSet& labels, std::span<const std::string> user_order) {
  LabelTable out;
  for (const auto& id : user_order) {
    const UserLabels* u = labels.find(id);
    if (!u) throw ValidationError("no survey responses for user '" + id + "'");
    std::array<int, kQuestionCount> row{};
    for (int q = 0; q < kQuestionCount; ++q) row[q] = u->questions[q].label;
    out.user_ids.push_back(id);
    out.labels.push_back(row);
  }
  return out;
}

namespace {

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

std::int64_t get_count(const json& obj, const char* key, const std::string& loc) {
  if (!obj.contains(key)) throw ValidationError(loc + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ValidationError(loc + ": field '" + key + "' must be an integer");
}

std::string get_string(const json& obj, const char* key, const std::string& loc) {
  if (!obj.contains(key)) throw ValidationError(loc + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(loc + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& loc) {
  if (!obj.contains(key)) throw ValidationError(loc + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ValidationError(loc + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

void note_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& loc,
                  Warnings* warnings) {
  if (!warnings) return;
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      warnings->push_back(loc + ": unknown field '" + key + "' ignored");
  }
}

}  // namespace

std::vector<ProfileRecord> parse_profiles_jsonl(std::string_view text, const std::string& source, Warnings* warnings) {
  std::vector<ProfileRecord> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (nl == text.size()) break;
      continue;
    }
    const std::string loc = where(source, line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(loc + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ValidationError(loc + ": expected a JSON object");

    ProfileRecord p;
    p.user_id = get_string(obj, "user_id", loc);
    if (p.user_id.empty()) throw ValidationError(loc + ": empty user_id");
    if (!ids.insert(p.user_id).second) throw ValidationError(loc + ": duplicate user_id '" + p.user_id + "'");
    p.followers = get_count(obj, "followers", loc);
    p.following = get_count(obj, "following", loc);
    p.posts_total = get_count(obj, "posts_total", loc);
    note_unknown(obj, {"user_id", "followers", "following", "posts_total", "posts"}, loc, warnings);

    if (!obj.contains("posts") || !obj.at("posts").is_array())
      throw ValidationError(loc + ": field 'posts' must be an array");
    for (const json& jp : obj.at("posts")) {
      if (!jp.is_object()) throw ValidationError(loc + ": each post must be a JSON object");
      PostRecord post;
      post.post_id = get_string(jp, "post_id", loc);
      post.likes = get_count(jp, "likes", loc);
      post.comments = get_count(jp, "comments", loc);
      post.created_at = get_count(jp, "created_at", loc);
      post.persons_total = get_count(jp, "persons_total", loc);
      post.contains_person = get_bool(jp, "contains_person", loc);
      post.contains_self = get_bool(jp, "contains_self", loc);
      note_unknown(jp,
                   {"post_id", "likes", "comments", "created_at", "persons_total", "contains_person", "contains_self"},
                   loc + " post '" + post.post_id + "'", warnings);
      p.posts.push_back(std::move(post));
    }
    try {
      validate_profile(p);
    } catch (const ValidationError& e) {
      throw ValidationError(loc + ": " + e.what());
    }
    out.push_back(std::move(p));
    if (nl == text.size()) break;
  }
  if (out.empty()) throw ValidationError(source + ": no profiles found");
  return out;
}

namespace {

const std::vector<std::string> kSurveyHeader = {"user_id", "question", "worker_id", "answer"};

std::int64_t parse_int(const std::string& s, const std::string& loc, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) throw ValidationError(loc + ": " + what + " '" + s + "' is not an integer");
  return v;
}

}  // namespace

std::vector<SurveyResponse> parse_survey_csv(std::string_view text, const std::string& source) {
  const auto rows = parse_csv(text, source);
  require_header(rows, kSurveyHeader, source);
  std::vector<SurveyResponse> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string loc = where(source, row.line);
    if (row.fields.size() != 4) {
      throw ValidationError(loc + ": expected 4 fields, found " + std::to_string(row.fields.size()));
    }
    SurveyResponse r;
    r.user_id = row.fields[0];
    if (r.user_id.empty()) throw ValidationError(loc + ": empty user_id");
    const auto q = parse_int(row.fields[1], loc, "question");
    if (q < 1 || q > kQuestionCount) throw ValidationError(loc + ": question " + row.fields[1] + " outside 1..6");
    r.question = static_cast<int>(q);
    r.worker_id = row.fields[2];
    if (r.worker_id.empty()) throw ValidationError(loc + ": empty worker_id");
    if (row.fields[3] == "Y") {
      r.yes = true;
    } else if (row.fields[3] == "N") {
      r.yes = false;
    } else {
      throw ValidationError(loc + ": answer must be Y or N, found '" + row.fields[3] + "'");
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError(source + ": no survey responses found");
  return out;
}

std::string profiles_jsonl(std::span<const ProfileRecord> profiles) {
  std::string out;
  for (const auto& p : profiles) {
    nlohmann::ordered_json obj;
    obj["user_id"] = p.user_id;
    obj["followers"] = p.followers;
    obj["following"] = p.following;
    obj["posts_total"] = p.posts_total;
    obj["posts"] = nlohmann::ordered_json::array();
    for (const auto& post : p.posts) {
      nlohmann::ordered_json jp;
      jp["post_id"] = post.post_id;
      jp["likes"] = post.likes;
      jp["comments"] = post.comments;
      jp["created_at"] = post.created_at;
      jp["persons_total"] = post.persons_total;
      jp["contains_person"] = post.contains_person;
      jp["contains_self"] = post.contains_self;
      obj["posts"].push_back(std::move(jp));
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string survey_csv(std::span<const SurveyResponse> responses) {
  std::string out = "user_id,question,worker_id,answer\n";
  for (const auto& r : responses) {
    out += csv_escape(r.user_id) + "," + std::to_string(r.question) + "," + csv_escape(r.worker_id) + "," +
           (r.yes ? "Y" : "N") + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> features_header() {
  std::vector<std::string> h{"user_id"};
  for (auto n : kFeatureNames) h.emplace_back(n);
  return h;
}

std::vector<std::string> labels_header() {
  std::vector<std::string> h{"user_id"};
  for (int q = 1; q <= kQuestionCount; ++q) h.push_back("q" + std::to_string(q));
  return h;
}

}  // namespace

std::string features_csv(const FeatureTable& table) {
  std::string out;
  const auto header = features_header();
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    out += csv_escape(table.user_ids[r]);
    for (std::int64_t v : {f.post, f.follower, f.following, f.likes, f.comments, f.total_person, f.pic_person, f.self})
      out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

FeatureTable parse_features_csv(std::string_view text, const std::string& source) {
  const auto rows = parse_csv(text, source);
  require_header(rows, features_header(), source);
  FeatureTable t;
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string loc = where(source, row.line);
    if (row.fields.size() != kFeatureCount + 1) {
      throw ValidationError(loc + ": expected " + std::to_string(kFeatureCount + 1) + " fields, found " +
                            std::to_string(row.fields.size()));
    }
    if (row.fields[0].empty()) throw ValidationError(loc + ": empty user_id");
    if (!ids.insert(row.fields[0]).second) throw ValidationError(loc + ": duplicate user_id '" + row.fields[0] + "'");
    std::array<std::int64_t, kFeatureCount> v{};
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      v[c] = parse_int(row.fields[c + 1], loc, std::string(kFeatureNames[c]));
      if (v[c] < 0) throw ValidationError(loc + ": negative " + std::string(kFeatureNames[c]));
    }
    t.user_ids.push_back(row.fields[0]);
    t.rows.push_back(FeatureVector{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  if (t.rows.empty()) throw ValidationError(source + ": no feature rows");
  return t;
}

std::string labels_csv(const LabelTable& labels) {
  std::string out = "user_id,q1,q2,q3,q4,q5,q6\n";
  for (std::size_t r = 0; r < labels.user_ids.size(); ++r) {
    out += csv_escape(labels.user_ids[r]);
    for (int v : labels.labels[r]) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

LabelTable parse_labels_csv(std::string_view text, const std::string& source) {
  const auto rows = parse_csv(text, source);
  require_header(rows, labels_header(), source);
  LabelTable t;
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string loc = where(source, row.line);
    if (row.fields.size() != kQuestionCount + 1) {
      throw ValidationError(loc + ": expected 7 fields, found " + std::to_string(row.fields.size()));
    }
    if (!ids.insert(row.fields[0]).second) throw ValidationError(loc + ": duplicate user_id '" + row.fields[0] + "'");
    std::array<int, kQuestionCount> v{};
    for (int q = 0; q < kQuestionCount; ++q) {
      const std::string& f = row.fields[q + 1];
      if (f != "0" && f != "1") throw ValidationError(loc + ": label q" + std::to_string(q + 1) + " must be 0 or 1");
      v[q] = f == "1" ? 1 : 0;
    }
    t.user_ids.push_back(row.fields[0]);
    t.labels.push_back(v);
  }
  if (t.labels.empty()) throw ValidationError(source + ": no label rows");
  return t;
}

}  // namespace factorlens
