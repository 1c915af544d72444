#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "fairfuse/corpus.hpp"
#include "fairfuse/rng.hpp"

using namespace fairfuse;

namespace {

GenderedPair sample_pair() {
  // The worked two-actor example used across the fusion tests.
  GenderedPair p;
  p.template_id = "t0#00";
  p.male_scores = {-0.9, -0.5, 0.6};
  p.female_scores = {-0.7, -0.8, -0.9};
  p.male_text = "man hurts woman in a bus";
  p.female_text = "woman hurts man in a bus";
  return p;
}

}  // namespace

TEST_CASE("swap_gender substitutes both slots") {
  const TemplateRecord t{"t0", "[S1] hurts [S2] in a bus", -0.7};
  const auto [male, female] = swap_gender(t, {"man", "woman"});
  CHECK(male == "man hurts woman in a bus");
  CHECK(female == "woman hurts man in a bus");

  const TemplateRecord t2{"t1", "[S1] praised [S2]", 0.4};
  const auto [m2, f2] = swap_gender(t2, {"male", "female"});
  CHECK(m2 == "male praised female");
  CHECK(f2 == "female praised male");
}

TEST_CASE("swap_gender rejects malformed templates") {
  CHECK_THROWS_AS(swap_gender({"t", "[S1] was seen downtown", 0.0}, {"man", "woman"}),
                  MalformedTemplate);
  CHECK_THROWS_AS(swap_gender({"t", "[S1] met [S2] and [S2]", 0.0}, {"man", "woman"}),
                  MalformedTemplate);
  CHECK_THROWS_AS(swap_gender({"t", "no slots at all", 0.0}, {"man", "woman"}),
                  MalformedTemplate);
}

TEST_CASE("swap_gender is an involution on role assignment") {
  rng::SplitMix prng(5);
  const std::vector<std::string> verbs{"hurts", "robs", "praises", "follows"};
  for (int rep = 0; rep < 25; ++rep) {
    const TemplateRecord t{"t", "[S1] " + verbs[prng.below(verbs.size())] + " [S2] case " +
                                    std::to_string(rep),
                           0.0};
    const IdentityTermPair pair{"alpha" + std::to_string(prng.below(9)),
                                "omega" + std::to_string(prng.below(9))};
    const auto [male, female] = swap_gender(t, pair);
    const auto [swapped_male, swapped_female] =
        swap_gender(t, {pair.female_term, pair.male_term});
    CHECK(male == swapped_female);
    CHECK(female == swapped_male);
    CHECK(male.find("[S") == std::string::npos);
    CHECK(female.find("[S") == std::string::npos);
  }
}

TEST_CASE("expand_corpus counts") {
  std::vector<TemplateRecord> templates;
  for (int i = 0; i < 3; ++i)
    templates.push_back({"t" + std::to_string(i), "[S1] robs [S2]", -0.5});
  std::vector<IdentityTermPair> terms{{"man", "woman"}, {"boy", "girl"},
                                      {"king", "queen"}, {"actor", "actress"}};
  const auto entries = expand_corpus(templates, terms);
  REQUIRE(entries.size() == 12);  // |templates| x |terms|
  for (const auto& e : entries) {
    CHECK_FALSE(e.male_text.empty());
    CHECK_FALSE(e.female_text.empty());
  }

  const auto single = expand_corpus({templates[0]}, {terms[0]});
  CHECK(single.size() == 1);

  CHECK_THROWS_AS(expand_corpus({}, terms), ValidationError);
}

TEST_CASE("a 200 x 25 expansion yields 5000 entries / 10000 sentences") {
  std::vector<TemplateRecord> templates;
  for (int i = 0; i < 200; ++i)
    templates.push_back({"t" + std::to_string(i), "[S1] attacks [S2]", -0.6});
  std::vector<IdentityTermPair> terms;
  for (int i = 0; i < 25; ++i)
    terms.push_back({"m" + std::to_string(i), "f" + std::to_string(i)});
  CHECK(expand_corpus(templates, terms).size() == 5000);
}

TEST_CASE("aggregate_annotations maps valence/arousal to scores") {
  const std::vector<AnnotationRecord> records{
      {"t0", "a1", Valence::negative, 5},
      {"t1", "a1", Valence::positive, 10},
  };
  const auto truths = aggregate_annotations(records, 0.3);
  CHECK(truths.at("t0") == Approx(-0.5));
  CHECK(truths.at("t1") == Approx(1.0));
}

TEST_CASE("aggregate_annotations averages surviving annotators") {
  const std::vector<AnnotationRecord> records{
      {"t0", "a1", Valence::negative, 6},
      {"t0", "a2", Valence::negative, 8},
  };
  const auto truths = aggregate_annotations(records, 0.3);
  CHECK(truths.at("t0") == Approx(-0.7));
}

TEST_CASE("single annotator passes through exactly") {
  rng::SplitMix prng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const int arousal = 1 + static_cast<int>(prng.below(10));
    const Valence v = prng.below(2) ? Valence::positive : Valence::negative;
    const auto truths =
        aggregate_annotations({{"t", "only", v, arousal}}, 0.3);
    const double expected = (v == Valence::positive ? 1.0 : -1.0) * arousal / 10.0;
    CHECK(truths.at("t") == expected);
  }
}

TEST_CASE("inconsistent annotators are dropped") {
  // "contrarian" disagrees with the majority valence on every template.
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < 4; ++i) {
    const std::string tid = "t" + std::to_string(i);
    records.push_back({tid, "a1", Valence::negative, 6});
    records.push_back({tid, "a2", Valence::negative, 8});
    records.push_back({tid, "contrarian", Valence::positive, 10});
  }
  const auto truths = aggregate_annotations(records, 0.3);
  for (int i = 0; i < 4; ++i) CHECK(truths.at("t" + std::to_string(i)) == Approx(-0.7));

  // With a permissive threshold the contrarian survives.
  const auto lax = aggregate_annotations(records, 1.0);
  CHECK(lax.at("t0") == Approx((-0.6 - 0.8 + 1.0) / 3.0));
}

TEST_CASE("tied valence counts do not count as disagreement") {
  const std::vector<AnnotationRecord> records{
      {"t0", "a1", Valence::positive, 4},
      {"t0", "a2", Valence::negative, 4},
  };
  const auto truths = aggregate_annotations(records, 0.0);
  CHECK(truths.at("t0") == Approx(0.0).margin(1e-15));
}

TEST_CASE("a template that loses every annotator is an error") {
  // a1 is consistent everywhere; t9 is labeled only by the contrarian, whose
  // minority valence on the shared templates gets them dropped.
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < 5; ++i) {
    const std::string tid = "t" + std::to_string(i);
    records.push_back({tid, "a1", Valence::negative, 5});
    records.push_back({tid, "a2", Valence::negative, 5});
    records.push_back({tid, "contrarian", Valence::positive, 5});
  }
  records.push_back({"t9", "contrarian", Valence::positive, 5});
  CHECK_THROWS_AS(aggregate_annotations(records, 0.3), EmptyAfterFilter);
}

TEST_CASE("pair_and_average reproduces the worked sample row") {
  const auto p = sample_pair();
  const std::map<std::string, double> truths{{"t0#00", -0.7}};
  const FusionDataset ds = pair_and_average({p}, truths);
  REQUIRE(ds.rows() == 1);
  REQUIRE(ds.cols() == 3);
  CHECK(ds.X(0, 0) == -0.8);
  CHECK(ds.X(0, 1) == -0.65);
  // the exact mean of the stored doubles sits one ulp from the -0.15 literal
  CHECK(ds.X(0, 2) == Approx(-0.15).margin(1e-16));
  CHECK(ds.y(0) == -0.7);
  CHECK(ds.Delta(0, 0) == Approx(0.2).epsilon(1e-12));
  CHECK(ds.Delta(0, 1) == Approx(0.3).epsilon(1e-12));
  CHECK(ds.Delta(0, 2) == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("pair_and_average requires truths for every pair") {
  const auto p = sample_pair();
  CHECK_THROWS_AS(pair_and_average({p}, {{"other", 0.1}}), MissingTruth);
}

TEST_CASE("pair_and_average output is recomputable from the stored pair") {
  rng::SplitMix prng(29);
  std::vector<GenderedPair> pairs;
  std::map<std::string, double> truths;
  for (int i = 0; i < 40; ++i) {
    GenderedPair p;
    p.template_id = "t" + std::to_string(i);
    for (int j = 0; j < 4; ++j) {
      p.male_scores.push_back(prng.unit() * 2 - 1);
      p.female_scores.push_back(prng.unit() * 2 - 1);
    }
    truths[p.template_id] = prng.unit() * 2 - 1;
    pairs.push_back(std::move(p));
  }
  const FusionDataset ds = pair_and_average(pairs, truths);
  for (long i = 0; i < ds.rows(); ++i) {
    for (long j = 0; j < ds.cols(); ++j) {
      const auto& p = pairs[static_cast<std::size_t>(i)];
      CHECK(std::fabs(ds.X(i, j)) <= 1.0);
      CHECK(ds.Delta(i, j) >= 0.0);
      CHECK(ds.Delta(i, j) <= 2.0);
      CHECK(ds.X(i, j) ==
            (p.male_scores[static_cast<std::size_t>(j)] +
             p.female_scores[static_cast<std::size_t>(j)]) / 2.0);
      CHECK(ds.Delta(i, j) ==
            std::fabs(p.male_scores[static_cast<std::size_t>(j)] -
                      p.female_scores[static_cast<std::size_t>(j)]));
    }
  }
}

TEST_CASE("split partitions rows deterministically") {
  rng::SplitMix prng(37);
  std::vector<GenderedPair> pairs;
  std::map<std::string, double> truths;
  for (int i = 0; i < 10; ++i) {
    GenderedPair p;
    p.template_id = "t" + std::to_string(i);
    p.male_scores = {prng.unit()};
    p.female_scores = {prng.unit()};
    truths[p.template_id] = 0.0;
    pairs.push_back(std::move(p));
  }
  const FusionDataset ds = pair_and_average(pairs, truths);

  const auto [train, test] = split(ds, 0.7, 42);
  CHECK(train.rows() == 7);
  CHECK(test.rows() == 3);

  std::set<std::string> ids(train.template_ids.begin(), train.template_ids.end());
  for (const auto& id : test.template_ids) CHECK(ids.insert(id).second);
  CHECK(ids.size() == 10);

  const auto [train2, test2] = split(ds, 0.7, 42);
  CHECK(train2.template_ids == train.template_ids);
  CHECK(test2.template_ids == test.template_ids);

  const auto [train3, test3] = split(ds, 0.7, 43);
  CHECK(train3.template_ids != train.template_ids);  // different seed, different partition
}

TEST_CASE("split cardinality at scale") {
  auto [train_idx, test_idx] = split_indices(5000, 0.7, 7);
  CHECK(train_idx.size() == 3500);
  CHECK(test_idx.size() == 1500);
}

TEST_CASE("split rejects degenerate requests") {
  CHECK_THROWS_AS(split_indices(1, 0.7, 0), DatasetTooSmall);
  CHECK_THROWS_AS(split_indices(3, 0.01, 0), DatasetTooSmall);   // empty train
  CHECK_THROWS_AS(split_indices(3, 0.999, 0), DatasetTooSmall);  // empty test
  CHECK_THROWS_AS(split_indices(10, 1.5, 0), ValidationError);
}
