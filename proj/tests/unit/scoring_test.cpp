#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fairbelief/error.hpp"
#include "fairbelief/scoring.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fb = fairbelief;
using fb::testing::make_dump;
using fb::testing::make_lexicon;
using fb::testing::make_model;
using fb::testing::make_template;

namespace {

fb::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const fb::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return fb::ErrorCode::IoFailure;
}

fb::PercentileSummary with_mean(double mean) {
  fb::PercentileSummary s;
  s.mean = mean;
  return s;
}

}  // namespace

TEST(HonestAtK, TwoTemplatesTwoHurtfulOfSix) {
  const auto dump = make_dump(make_model("m"), "h",
                              {{"t1", {"maid", "nurse", "cook"}}, {"t2", {"doctor", "idiot", "chef"}}});
  const auto lex = make_lexicon({"maid", "idiot"});
  EXPECT_DOUBLE_EQ(fb::honest_at_k(fb::DumpView(dump), lex, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(fb::honest_at_k(fb::DumpView(dump), lex, 1), 0.5);
  EXPECT_DOUBLE_EQ(fb::honest_at_k(fb::DumpView(dump), lex, 2), 0.5);
  EXPECT_DOUBLE_EQ(fb::honest_at_k(fb::DumpView(dump), make_lexicon({"zebra"}), 3), 0.0);
  EXPECT_DOUBLE_EQ(
      fb::honest_at_k(fb::DumpView(dump),
                      make_lexicon({"maid", "nurse", "cook", "doctor", "idiot", "chef"}), 3),
      1.0);
}

TEST(HonestAtK, Errors) {
  const auto dump = make_dump(make_model("m"), "h", {{"t1", {"a", "b"}}});
  const auto lex = make_lexicon({"a"});
  EXPECT_EQ(code_of([&] { fb::honest_at_k(fb::DumpView(dump), lex, 3); }), fb::ErrorCode::KOutOfRange);
  EXPECT_EQ(code_of([&] { fb::honest_at_k(fb::DumpView(dump), lex, 0); }), fb::ErrorCode::KOutOfRange);
  const fb::DumpView empty(dump, {}, 2);
  EXPECT_EQ(code_of([&] { fb::honest_at_k(empty, lex, 1); }), fb::ErrorCode::EmptyTemplateSet);
  EXPECT_EQ(code_of([&] { fb::honest_series(empty, lex, 1); }), fb::ErrorCode::EmptyTemplateSet);
}

TEST(HonestSeries, AllRankOneHurtfulDecaysAsOneOverK) {
  // Every template has exactly one hurtful word, at rank 1: HONEST@k = 1/k.
  fb::testing::FillIns fill_ins;
  for (int t = 0; t < 4; ++t) {
    fill_ins.push_back({"t" + std::to_string(t), {"slur", "a", "b", "c", "d"}});
  }
  const auto dump = make_dump(make_model("m"), "h", fill_ins);
  const auto series = fb::honest_series(fb::DumpView(dump), make_lexicon({"slur"}), 5);
  ASSERT_EQ(series.k_max(), 5u);
  EXPECT_EQ(series.n_templates, 4u);
  for (std::size_t k = 1; k <= 5; ++k) EXPECT_DOUBLE_EQ(series.at(k), 4.0 / (4.0 * k));
}

TEST(HonestSeries, MatchesPointwiseAndOracleOnRandomCases) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto c = fb::testing::random_case(seed);
    const auto lex = make_lexicon(c.lexicon_terms);
    const fb::DumpView view(c.dump);
    const auto series = fb::honest_series(view, lex, c.k_max);
    for (int i = 0; i < 10; ++i) {
      const std::size_t k = 1 + rng() % c.k_max;
      const auto [hits, denom] = fb::testing::brute_force_honest(c.raw, c.lexicon_terms, k);
      EXPECT_EQ(series.at(k), fb::honest_at_k(view, lex, k));
      EXPECT_EQ(series.at(k), static_cast<double>(hits) / static_cast<double>(denom));
    }
  }
}

TEST(HonestSeries, BoundsAndDuplicationInvariance) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto c = fb::testing::random_case(seed);
    const auto lex = make_lexicon(c.lexicon_terms);
    const auto series = fb::honest_series(fb::DumpView(c.dump), lex, c.k_max);
    auto doubled = c.dump;
    for (const auto& block : c.dump.templates) {
      doubled.templates.push_back(block);
      doubled.templates.back().template_id += "-copy";
    }
    const auto series2 = fb::honest_series(fb::DumpView(doubled), lex, c.k_max);
    for (std::size_t k = 1; k <= c.k_max; ++k) {
      EXPECT_GE(series.at(k), 0.0);
      EXPECT_LE(series.at(k), 1.0);
      EXPECT_NEAR(series2.at(k), series.at(k), 1e-12);
    }
  }
}

TEST(PerTemplateScores, AverageToHonest) {
  const auto c = fb::testing::random_case(7);
  const auto lex = make_lexicon(c.lexicon_terms);
  const auto scores = fb::per_template_scores(fb::DumpView(c.dump), lex, c.k_max);
  ASSERT_EQ(scores.size(), c.dump.templates.size());
  double mean = 0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  EXPECT_NEAR(mean, fb::honest_at_k(fb::DumpView(c.dump), lex, c.k_max), 1e-12);
}

TEST(Summarize, FourValueExample) {
  const std::vector<double> v = {0.3, 0.0, 0.2, 0.1};
  const auto s = fb::summarize(v);
  EXPECT_NEAR(s.q50, 0.15, 1e-12);
  EXPECT_NEAR(s.mean, 0.15, 1e-12);
  EXPECT_NEAR(s.q75, 0.225, 1e-12);
  EXPECT_NEAR(s.q1, 0.003, 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(0.0125), 1e-12);
  EXPECT_NEAR(fb::summarize(v, fb::StdMode::Sample).std, std::sqrt(0.05 / 3.0), 1e-12);
}

TEST(Summarize, ConstantSeriesIsExact) {
  const std::vector<double> v(100, 0.1);
  const auto s = fb::summarize(v);
  EXPECT_EQ(s.mean, 0.1);
  EXPECT_EQ(s.std, 0.0);
  for (double q : {s.q1, s.q50, s.q75, s.q90, s.q95}) EXPECT_EQ(q, 0.1);
}

TEST(Summarize, PercentilesAreMonotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng() % 50);
    for (auto& x : v) x = u(rng);
    const auto s = fb::summarize(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    EXPECT_LE(*lo, s.q1);
    EXPECT_LE(s.q1, s.q50);
    EXPECT_LE(s.q50, s.q75);
    EXPECT_LE(s.q75, s.q90);
    EXPECT_LE(s.q90, s.q95);
    EXPECT_LE(s.q95, *hi);
  }
}

TEST(Summarize, TooShort) {
  EXPECT_EQ(code_of([] { fb::summarize(std::vector<double>{0.5}); }), fb::ErrorCode::SeriesTooShort);
  EXPECT_EQ(code_of([] { fb::summarize(std::vector<double>{}); }), fb::ErrorCode::SeriesTooShort);
}

TEST(RankModels, DescendingMean) {
  const std::vector<std::pair<fb::ModelDescriptor, fb::PercentileSummary>> in = {
      {make_model("A"), with_mean(0.205)},
      {make_model("B"), with_mean(0.017)},
      {make_model("C"), with_mean(0.104)},
  };
  const auto ranked = fb::rank_models(in);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].model.model_id, "A");
  EXPECT_EQ(ranked[1].model.model_id, "C");
  EXPECT_EQ(ranked[2].model.model_id, "B");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ranked[static_cast<std::size_t>(i)].rank, i + 1);
}

TEST(RankModels, PermutationInvariantWithIdTieBreak) {
  std::vector<std::pair<fb::ModelDescriptor, fb::PercentileSummary>> in = {
      {make_model("zeta"), with_mean(0.1)},
      {make_model("alpha"), with_mean(0.1)},
      {make_model("mid"), with_mean(0.3)},
      {make_model("low"), with_mean(0.0)},
  };
  const auto reference = fb::rank_models(in);
  EXPECT_EQ(reference[1].model.model_id, "alpha");
  EXPECT_EQ(reference[2].model.model_id, "zeta");
  std::sort(in.begin(), in.end(), [](const auto& a, const auto& b) {
    return a.first.model_id < b.first.model_id;
  });
  do {
    const auto ranked = fb::rank_models(in);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      EXPECT_EQ(ranked[i].model.model_id, reference[i].model.model_id);
    }
  } while (std::next_permutation(in.begin(), in.end(), [](const auto& a, const auto& b) {
    return a.first.model_id < b.first.model_id;
  }));
}

TEST(RankModels, DuplicateModel) {
  const std::vector<std::pair<fb::ModelDescriptor, fb::PercentileSummary>> in = {
      {make_model("A"), with_mean(0.1)}, {make_model("A"), with_mean(0.2)}};
  EXPECT_EQ(code_of([&] { fb::rank_models(in); }), fb::ErrorCode::DuplicateModel);
}

TEST(GroupSeries, FemaleAndMale) {
  using G = fb::GenderGroup;
  using A = fb::AgeGroup;
  const fb::TemplateManifest manifest(
      {make_template("f", G::Female, A::Young), make_template("m", G::Male, A::Old)});
  const auto dump = make_dump(make_model("m"), manifest.hash(), {{"f", {"maid"}}, {"m", {"doctor"}}});
  const auto groups = fb::group_series(fb::DumpView(dump), make_lexicon({"maid"}), manifest,
                                       fb::GroupAxis::Gender, 1);
  ASSERT_EQ(groups.series.size(), 2u);
  EXPECT_EQ(groups.series.at("female").scores_by_k, std::vector<double>{1.0});
  EXPECT_EQ(groups.series.at("male").scores_by_k, std::vector<double>{0.0});
  EXPECT_EQ(*groups.series.at("female").group_label, "female");
  EXPECT_EQ(groups.warnings.size(), 1u);  // nothing in "other"
}

TEST(GroupSeries, AllOtherTemplates) {
  using G = fb::GenderGroup;
  using A = fb::AgeGroup;
  const fb::TemplateManifest manifest(
      {make_template("a", G::Other, A::Other), make_template("b", G::Other, A::Other)});
  const auto dump = make_dump(make_model("m"), manifest.hash(), {{"a", {"x", "y"}}, {"b", {"y", "z"}}});
  const auto lex = make_lexicon({"y"});
  const auto groups = fb::group_series(fb::DumpView(dump), lex, manifest, fb::GroupAxis::Age, 2);
  ASSERT_EQ(groups.series.size(), 1u);
  EXPECT_EQ(groups.series.at("other").scores_by_k,
            fb::honest_series(fb::DumpView(dump), lex, 2).scores_by_k);
  EXPECT_EQ(groups.warnings.size(), 2u);  // old and young are empty
}

TEST(GroupSeries, PartitionConsistency) {
  const std::vector<fb::GenderGroup> genders = {fb::GenderGroup::Female, fb::GenderGroup::Male,
                                                fb::GenderGroup::Other};
  const std::vector<fb::AgeGroup> ages = {fb::AgeGroup::Old, fb::AgeGroup::Young, fb::AgeGroup::Other};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = fb::testing::random_case(seed);
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::vector<fb::Template> templates;
    for (const auto& block : c.dump.templates) {
      templates.push_back(make_template(block.template_id, genders[rng() % 3], ages[rng() % 3]));
    }
    const fb::TemplateManifest manifest(templates);
    const auto lex = make_lexicon(c.lexicon_terms);
    const fb::DumpView view(c.dump);
    const auto overall = fb::honest_series(view, lex, c.k_max);
    for (const auto axis : {fb::GroupAxis::Gender, fb::GroupAxis::Age}) {
      const auto groups = fb::group_series(view, lex, manifest, axis, c.k_max);
      std::size_t n = 0;
      for (const auto& [label, s] : groups.series) n += s.n_templates;
      EXPECT_EQ(n, c.dump.templates.size());
      for (std::size_t k = 1; k <= c.k_max; ++k) {
        double weighted = 0.0;
        for (const auto& [label, s] : groups.series) {
          weighted += static_cast<double>(s.n_templates) * s.at(k);
        }
        EXPECT_NEAR(weighted / static_cast<double>(n), overall.at(k), 1e-12);
      }
    }
  }
}

TEST(GroupSeries, UnknownTemplateId) {
  const fb::TemplateManifest manifest({make_template("a", fb::GenderGroup::Male, fb::AgeGroup::Old)});
  const auto dump = make_dump(make_model("m"), manifest.hash(), {{"a", {"x"}}, {"zz", {"y"}}});
  EXPECT_EQ(code_of([&] {
              fb::group_series(fb::DumpView(dump), make_lexicon({"x"}), manifest,
                               fb::GroupAxis::Gender, 1);
            }),
            fb::ErrorCode::UnknownTemplateId);
}

TEST(CombineSubsets, Weighting) {
  fb::ScoreSeries a;
  a.scores_by_k = {0.2, 0.4};
  a.n_templates = 1;
  fb::ScoreSeries b;
  b.scores_by_k = {0.6, 0.0};
  b.n_templates = 3;
  const std::vector<fb::ScoreSeries> both = {a, b};
  const auto uniform = fb::combine_subsets(both, fb::DatasetWeighting::Uniform);
  EXPECT_NEAR(uniform.at(1), 0.4, 1e-12);
  EXPECT_NEAR(uniform.at(2), 0.2, 1e-12);
  EXPECT_EQ(uniform.n_templates, 4u);
  const auto weighted = fb::combine_subsets(both, fb::DatasetWeighting::ByTemplates);
  EXPECT_NEAR(weighted.at(1), 0.5, 1e-12);
  EXPECT_NEAR(weighted.at(2), 0.1, 1e-12);

  b.scores_by_k.push_back(0.1);
  const std::vector<fb::ScoreSeries> ragged = {a, b};
  EXPECT_EQ(code_of([&] { fb::combine_subsets(ragged, fb::DatasetWeighting::Uniform); }),
            fb::ErrorCode::KOutOfRange);
  EXPECT_EQ(code_of([] { fb::combine_subsets({}, fb::DatasetWeighting::Uniform); }),
            fb::ErrorCode::EmptyTemplateSet);
}
