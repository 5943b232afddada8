#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/ingest.hpp"
#include "core/rng.hpp"
#include "core/synthetic.hpp"

using namespace factorlens;

namespace {

PostRecord post(std::string id, std::int64_t t, std::int64_t likes, std::int64_t comments, std::int64_t persons,
                bool self = false) {
  return {std::move(id), likes, comments, t, persons, persons > 0, self};
}

ProfileRecord sample_profile() {
  ProfileRecord p{"alice", 500, 120, 40, {}};
  // Twelve posts, timestamps shuffled; the two oldest (t=1, t=2) fall outside the window.
  p.posts = {post("a", 5, 10, 1, 2, true), post("b", 1, 1000, 100, 9, true), post("c", 12, 20, 2, 0),
             post("d", 8, 30, 3, 1),       post("e", 2, 1000, 100, 9),       post("f", 11, 40, 4, 3, true),
             post("g", 3, 50, 5, 0),       post("h", 10, 60, 6, 1, true),    post("i", 9, 70, 7, 0),
             post("j", 4, 80, 8, 2),       post("k", 7, 90, 9, 0),           post("l", 6, 100, 10, 1)};
  return p;
}

std::vector<SurveyResponse> votes(const std::string& user, int q, int yes, int no) {
  std::vector<SurveyResponse> out;
  for (int i = 0; i < yes + no; ++i) out.push_back({user, q, "w" + std::to_string(i), i < yes});
  return out;
}

std::vector<SurveyResponse> full_votes(const std::string& user, int yes) {
  std::vector<SurveyResponse> out;
  for (int q = 1; q <= kQuestionCount; ++q) {
    auto v = votes(user, q, yes, 5 - yes);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

TEST_CASE("feature extraction over the ten most recent posts") {
  const auto f = extract_features(sample_profile());
  CHECK(f.post == 40);
  CHECK(f.follower == 500);
  CHECK(f.following == 120);
  CHECK(f.likes == 10 + 20 + 30 + 40 + 50 + 60 + 70 + 80 + 90 + 100);
  CHECK(f.comments == 55);
  CHECK(f.total_person == 2 + 1 + 3 + 1 + 2 + 1);
  CHECK(f.pic_person == 6);
  CHECK(f.self == 3);
  const auto v = f.values();
  CHECK(v[0] == 40.0);
  CHECK(v[7] == 3.0);
}

TEST_CASE("feature extraction ignores post order") {
  const auto base = extract_features(sample_profile());
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = sample_profile();
    rng.shuffle(std::span<PostRecord>(p.posts));
    CHECK(extract_features(p) == base);
  }
}

TEST_CASE("post ordering breaks timestamp ties by id") {
  std::vector<PostRecord> posts = {post("b", 5, 0, 0, 0), post("a", 5, 0, 0, 0), post("c", 9, 0, 0, 0)};
  sort_posts(posts);
  CHECK(posts[0].post_id == "c");
  CHECK(posts[1].post_id == "a");
  CHECK(posts[2].post_id == "b");
}

TEST_CASE("window behaviour and warnings") {
  auto p = sample_profile();
  Warnings w;
  const auto all = extract_features(p, 12, &w);
  CHECK(all.likes == 2550);
  CHECK(w.empty());
  CHECK(extract_features(p, 50, &w).likes == 2550);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("window truncated") != std::string::npos);
  CHECK_THROWS_AS(extract_features(p, 0), ValidationError);

  ProfileRecord empty{"bob", 3, 4, 0, {}};
  Warnings w2;
  const auto f = extract_features(empty, 10, &w2);
  CHECK(f.likes == 0);
  CHECK(f.post == 0);
  CHECK(w2.size() == 1);
}

TEST_CASE("profile validation") {
  auto neg = sample_profile();
  neg.followers = -1;
  CHECK_THROWS_WITH_AS(validate_profile(neg), doctest::Contains("negative followers"), ValidationError);

  auto too_many = sample_profile();
  too_many.posts_total = 5;
  CHECK_THROWS_AS(validate_profile(too_many), ValidationError);

  auto persons = sample_profile();
  persons.posts[0].contains_person = false;
  CHECK_THROWS_AS(validate_profile(persons), ValidationError);

  auto person_no_count = sample_profile();
  person_no_count.posts[2].contains_person = true;
  CHECK_THROWS_AS(validate_profile(person_no_count), ValidationError);

  auto self = sample_profile();
  self.posts[2].contains_self = true;
  CHECK_THROWS_WITH_AS(validate_profile(self), doctest::Contains("contains_self"), ValidationError);
}

TEST_CASE("majority vote examples") {
  std::vector<SurveyResponse> r;
  auto add = [&](const std::string& u, int q, int yes, int no) {
    auto v = votes(u, q, yes, no);
    r.insert(r.end(), v.begin(), v.end());
  };
  for (int q = 1; q <= 6; ++q) {
    add("u1", q, 3, 2);
    add("u2", q, 2, 3);
    add("u3", q, 5, 0);
  }
  const LabelSet labels = aggregate_labels(r);
  REQUIRE(labels.users.size() == 3);
  CHECK(labels.users[0].user_id == "u1");
  CHECK(labels.find("u1")->questions[0].label == 1);
  CHECK(labels.find("u1")->questions[0].yes_count == 3);
  CHECK(labels.find("u2")->questions[5].label == 0);
  CHECK(labels.find("u3")->questions[2].label == 1);
  CHECK(labels.find("nobody") == nullptr);
}

TEST_CASE("strict mode rejects ambiguous groups; lenient mode warns") {
  std::vector<SurveyResponse> tied = full_votes("u1", 3);
  // Replace question 2's five votes with a 2-2 tie.
  std::erase_if(tied, [](const SurveyResponse& s) { return s.question == 2; });
  auto tie = votes("u1", 2, 2, 2);
  tied.insert(tied.end(), tie.begin(), tie.end());
  CHECK_THROWS_WITH_AS(aggregate_labels(tied), doctest::Contains("tied vote 2-2"), ValidationError);
  Warnings w;
  const auto lenient = aggregate_labels(tied, VoteMode::kLenient, &w);
  CHECK(lenient.users[0].questions[1].label == 0);
  CHECK(w.size() == 1);

  std::vector<SurveyResponse> even = full_votes("u1", 3);
  std::erase_if(even, [](const SurveyResponse& s) { return s.question == 4 && s.worker_id == "w4"; });
  CHECK_THROWS_WITH_AS(aggregate_labels(even), doctest::Contains("even number"), ValidationError);
  CHECK(aggregate_labels(even, VoteMode::kLenient).users[0].questions[3].label == 1);

  std::vector<SurveyResponse> missing = full_votes("u1", 3);
  std::erase_if(missing, [](const SurveyResponse& s) { return s.question == 6; });
  CHECK_THROWS_WITH_AS(aggregate_labels(missing), doctest::Contains("no responses"), ValidationError);
}

TEST_CASE("duplicate responses and bad questions") {
  auto dup = full_votes("u1", 3);
  dup.push_back(dup.front());
  CHECK_THROWS_WITH_AS(aggregate_labels(dup), doctest::Contains("duplicate response"), ValidationError);
  std::vector<SurveyResponse> bad = {{"u1", 7, "w1", true}};
  CHECK_THROWS_AS(aggregate_labels(bad, VoteMode::kLenient), ValidationError);
}

TEST_CASE("vote-pattern survey audit") {
  std::vector<std::string> ids;
  std::vector<std::array<double, kQuestionCount>> prop;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    ids.push_back("u" + std::to_string(i));
    std::array<double, kQuestionCount> row{};
    for (double& v : row) v = rng.normal();
    prop.push_back(row);
  }
  const auto responses = make_survey_by_rank(ids, prop, kPublishedVotePatterns, 5);
  CHECK(responses.size() == 100 * 6 * 5);
  const LabelSet labels = aggregate_labels(responses);
  const int expected_positive[] = {73, 68, 31, 52, 73, 64};
  for (int q = 0; q < kQuestionCount; ++q) {
    std::array<int, 6> pattern{};
    int positive = 0;
    for (const auto& u : labels.users) {
      const auto& t = u.questions[q];
      CHECK(t.yes_count + t.no_count == 5);
      ++pattern[t.yes_count];
      positive += t.label;
    }
    CHECK(pattern == kPublishedVotePatterns[q]);
    CHECK(positive == expected_positive[q]);
  }
}

TEST_CASE("label aggregation ignores response order") {
  const auto ds = make_synthetic_dataset(11, 40);
  const LabelSet base = aggregate_labels(ds.responses);
  auto shuffled = ds.responses;
  Rng rng(12);
  rng.shuffle(std::span<SurveyResponse>(shuffled));
  const LabelSet again = aggregate_labels(shuffled);
  for (const auto& u : base.users) {
    const auto* v = again.find(u.user_id);
    REQUIRE(v != nullptr);
    for (int q = 0; q < kQuestionCount; ++q) CHECK(v->questions[q].label == u.questions[q].label);
  }
}

TEST_CASE("scaled vote patterns") {
  const auto hundred = scaled_vote_patterns(100);
  CHECK(hundred == kPublishedVotePatterns);
  for (std::size_t n : {7u, 40u, 333u}) {
    for (const auto& row : scaled_vote_patterns(n)) {
      int s = 0;
      for (int c : row) s += c;
      CHECK(s == static_cast<int>(n));
    }
  }
}

TEST_CASE("profiles JSONL round trip and errors") {
  const auto ds = make_synthetic_dataset(3, 10);
  const std::string text = profiles_jsonl(ds.profiles);
  const auto parsed = parse_profiles_jsonl(text, "mem");
  REQUIRE(parsed.size() == 10);
  for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(extract_features(parsed[i]) == extract_features(ds.profiles[i]));
  CHECK(profiles_jsonl(parsed) == text);

  Warnings w;
  parse_profiles_jsonl(R"({"user_id":"x","followers":1,"following":2,"posts_total":0,"posts":[],"bio":"hi"})", "mem",
                       &w);
  CHECK(w.size() == 1);
  CHECK_THROWS_WITH_AS(parse_profiles_jsonl("{\"user_id\":\"x\"}", "p.jsonl"), doctest::Contains("p.jsonl:1"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_profiles_jsonl("\n{not json", "p.jsonl"), doctest::Contains("p.jsonl:2"), ValidationError);
  CHECK_THROWS_AS(parse_profiles_jsonl("", "p.jsonl"), ValidationError);
  const std::string twice = R"({"user_id":"x","followers":1,"following":2,"posts_total":0,"posts":[]})";
  CHECK_THROWS_WITH_AS(parse_profiles_jsonl(twice + "\n" + twice, "p"), doctest::Contains("duplicate user_id"),
                       ValidationError);
  CHECK_THROWS_AS(
      parse_profiles_jsonl(R"({"user_id":"x","followers":1.5,"following":2,"posts_total":0,"posts":[]})", "p"),
      ValidationError);
}

TEST_CASE("survey CSV round trip and errors") {
  const auto ds = make_synthetic_dataset(3, 10);
  const std::string text = survey_csv(ds.responses);
  const auto parsed = parse_survey_csv(text, "mem");
  REQUIRE(parsed.size() == ds.responses.size());
  CHECK(parsed[7].worker_id == ds.responses[7].worker_id);
  CHECK(parsed[7].yes == ds.responses[7].yes);
  CHECK_THROWS_AS(parse_survey_csv("user,q,worker,answer\nu,1,w,Y\n", "s.csv"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_survey_csv("user_id,question,worker_id,answer\nu,1,w,yes\n", "s.csv"),
                       doctest::Contains("s.csv:2"), ValidationError);
  CHECK_THROWS_AS(parse_survey_csv("user_id,question,worker_id,answer\nu,9,w,Y\n", "s.csv"), ValidationError);
  CHECK_THROWS_AS(parse_survey_csv("user_id,question,worker_id,answer\n", "s.csv"), ValidationError);
}

TEST_CASE("features and labels CSV round trip") {
  const auto ds = make_synthetic_dataset(5, 12);
  FeatureTable t;
  for (const auto& p : ds.profiles) {
    t.user_ids.push_back(p.user_id);
    t.rows.push_back(extract_features(p));
  }
  const std::string csv = features_csv(t);
  CHECK(csv.rfind("user_id,post,follower,following,likes,comments,total_person,pic_person,self\n", 0) == 0);
  const FeatureTable back = parse_features_csv(csv, "f.csv");
  CHECK(back.user_ids == t.user_ids);
  CHECK(back.rows == t.rows);
  const DataMatrix logged = t.to_data_matrix(true);
  CHECK(logged.values(0, 1) == doctest::Approx(std::log1p(static_cast<double>(t.rows[0].follower))));

  const LabelSet ls = aggregate_labels(ds.responses);
  const LabelTable lt = to_label_table(ls, t.user_ids);
  const LabelTable lback = parse_labels_csv(labels_csv(lt), "l.csv");
  CHECK(lback.user_ids == lt.user_ids);
  CHECK(lback.labels == lt.labels);
  CHECK(lt.column(1).size() == 12);
  const std::vector<std::string> unknown = {"ghost"};
  CHECK_THROWS_AS(to_label_table(ls, unknown), ValidationError);
  CHECK_THROWS_AS(parse_labels_csv("user_id,q1,q2,q3,q4,q5,q6\nu,1,1,1,1,1,2\n", "l.csv"), ValidationError);
  CHECK_THROWS_AS(parse_features_csv("user_id,post,follower,following,likes,comments,total_person,pic_person,self\n"
                                     "u,1,2,3,-4,5,6,7,8\n",
                                     "f.csv"),
                  ValidationError);
}
