// Randomized invariants of scoring and perturbation. Every generator is
// seeded, so failures reproduce.
#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dynaboard/aggregate.hpp"
#include "dynaboard/perturb.hpp"
#include "dynaboard/scoring.hpp"
#include "dynaboard/serialize.hpp"
#include "dynaboard/weights.hpp"
#include "test_support.hpp"

namespace dynaboard {
namespace {

constexpr int kInstances = 250;
const std::vector<std::string> kMetrics{"perf", "throughput", "memory", "fairness", "robustness"};

const TaskConfig& task() {
  static const TaskConfig t = testing::five_metric_task("prop");
  return t;
}

// Goods with distinct performance and every other metric varying.
std::vector<ModelMetrics> random_goods(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 10);
  std::uniform_real_distribution<double> perf(30.0, 95.0);
  std::uniform_real_distribution<double> other(0.5, 100.0);
  const int n = count(rng);
  std::vector<ModelMetrics> out;
  for (int i = 0; i < n; ++i) {
    ModelMetrics m{"m" + std::to_string(i), {}};
    m.values["perf"] = perf(rng);
    for (std::size_t k = 1; k < kMetrics.size(); ++k) m.values[kMetrics[k]] = other(rng);
    out.push_back(std::move(m));
  }
  return out;
}

WeightMap random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.0, 5.0);
  WeightMap raw;
  for (const auto& id : kMetrics) raw[id] = w(rng);
  raw["perf"] += 0.1;
  return normalize_weights(raw);
}

void expect_rel_near(double a, double b, double rel) {
  EXPECT_NEAR(a, b, rel * std::max({1.0, std::abs(a), std::abs(b)}));
}

TEST(ScoringProperty, ScaleInvarianceOfGoods) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto goods = random_goods(rng);
    const auto weights = random_weights(rng);
    const auto base = score_models(goods, task(), weights);
    for (double c : {0.5, 3.0, 100.0}) {
      for (std::size_t k = 1; k < kMetrics.size(); ++k) {
        auto scaled = goods;
        for (auto& m : scaled) m.values[kMetrics[k]] *= c;
        const auto s = score_models(scaled, task(), weights);
        EXPECT_EQ(s.order, base.order);
        for (const auto& [id, d] : base.dynascores) expect_rel_near(s.dynascores.at(id), d, 1e-9);
        expect_rel_near(s.rates.amrs(kMetrics[k]), c * base.rates.amrs(kMetrics[k]), 1e-9);
      }
    }
  }
}

TEST(ScoringProperty, ScaleInvarianceOfMaximizeRecords) {
  std::mt19937_64 rng(2);
  const WeightSpec defaults;
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto goods = random_goods(rng);
    std::vector<MetricRecord> records;
    for (const auto& m : goods) {
      for (const auto& id : kMetrics) {
        const double v = id == "memory" ? 16.0 - m.values.at(id) * 0.15 : m.values.at(id);
        records.push_back({"prop", m.model_id, "scoring", id, v, {}});
      }
    }
    const auto base = rank_leaderboard(records, task(), defaults);
    for (double c : {0.5, 3.0, 100.0}) {
      for (const char* metric : {"throughput", "fairness", "robustness"}) {
        auto scaled = records;
        for (auto& r : scaled) {
          if (r.metric_id == metric) r.value *= c;
        }
        const auto board = rank_leaderboard(scaled, task(), defaults);
        ASSERT_EQ(board.rows.size(), base.rows.size());
        std::map<std::string, const LeaderboardRow*> scaled_rows;
        for (const auto& row : board.rows) scaled_rows[row.model_id] = &row;
        for (std::size_t i = 0; i < base.rows.size(); ++i) {
          const auto& row = *scaled_rows.at(base.rows[i].model_id);
          expect_rel_near(row.dynascore, base.rows[i].dynascore, 1e-9);
          // Exact ties (common with two models) may break either way.
          if (i + 1 < base.rows.size() &&
              base.rows[i].dynascore - base.rows[i + 1].dynascore > 1e-6) {
            EXPECT_LT(row.rank, scaled_rows.at(base.rows[i + 1].model_id)->rank);
          }
        }
      }
    }
  }
}

TEST(ScoringProperty, PerformanceOnlyMatchesPerformanceSort) {
  std::mt19937_64 rng(3);
  const WeightMap perf_only{{"perf", 1.0}, {"throughput", 0.0}, {"memory", 0.0},
                            {"fairness", 0.0}, {"robustness", 0.0}};
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto goods = random_goods(rng);
    const auto s = score_models(goods, task(), perf_only);
    std::vector<std::string> expected;
    for (const auto& m : sort_by_performance(goods, "perf")) expected.push_back(m.model_id);
    EXPECT_EQ(s.order, expected);
    for (const auto& m : goods) EXPECT_EQ(s.dynascores.at(m.model_id), m.values.at("perf"));
  }
}

TEST(ScoringProperty, PerformanceRateIsExactlyOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto rates = exchange_rates(random_goods(rng), task());
    EXPECT_EQ(rates.amrs("perf"), 1.0);
  }
}

TEST(ScoringProperty, NearTiesDropOutOfMrs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> gap(0.0, 3e-4);
  std::uniform_real_distribution<double> v(0.0, 50.0);
  constexpr double kEps = 1e-4;
  for (int trial = 0; trial < kInstances; ++trial) {
    std::vector<ModelMetrics> models;
    double perf = 90.0;
    const int n = 2 + trial % 8;
    for (int i = 0; i < n; ++i) {
      models.push_back({"m" + std::to_string(i), {{"perf", perf}, {"throughput", v(rng)}}});
      perf -= gap(rng);
    }
    const auto sorted = sort_by_performance(models, "perf");
    std::size_t expected = 0;
    std::vector<double> terms;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double dp = sorted[i].values.at("perf") - sorted[i + 1].values.at("perf");
      if (dp >= kEps) {
        ++expected;
        terms.push_back(std::abs(sorted[i].values.at("throughput") -
                                 sorted[i + 1].values.at("throughput")) / dp);
      }
    }
    const auto mrs = mrs_set(sorted, "throughput", "perf", kEps);
    ASSERT_EQ(mrs.size(), expected);
    for (std::size_t i = 0; i < mrs.size(); ++i) EXPECT_DOUBLE_EQ(mrs[i], terms[i]);
  }
}

TEST(ScoringProperty, InputOrderDoesNotMatter) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < kInstances; ++trial) {
    auto goods = random_goods(rng);
    const auto weights = random_weights(rng);
    const auto base = score_models(goods, task(), weights);
    std::shuffle(goods.begin(), goods.end(), rng);
    const auto s = score_models(goods, task(), weights);
    EXPECT_EQ(s.order, base.order);
    for (const auto& [id, d] : base.dynascores) EXPECT_DOUBLE_EQ(s.dynascores.at(id), d);
    for (const auto& [id, z] : base.avg_zscores) EXPECT_NEAR(s.avg_zscores.at(id), z, 1e-12);
  }
}

TEST(ScoringProperty, MonotoneInEachWeightedMetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> bump(0.01, 10.0);
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto goods = random_goods(rng);
    const auto weights = random_weights(rng);
    const auto rates = exchange_rates(goods, task());
    for (const auto& id : kMetrics) {
      ModelMetrics better = goods.front();
      better.values[id] += bump(rng);
      const double before = dynascore(goods.front(), weights, rates);
      const double after = dynascore(better, weights, rates);
      if (weights.at(id) > 0.0) {
        EXPECT_GT(after, before);
      } else {
        EXPECT_EQ(after, before);
      }
    }
  }
}

TEST(ScoringProperty, LeaderboardIsSortedAndRanked) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto goods = random_goods(rng);
    std::vector<MetricRecord> records;
    for (const auto& m : goods) {
      for (const auto& id : kMetrics) {
        const double v = id == "memory" ? std::min(16.0, m.values.at(id) * 0.16) : m.values.at(id);
        records.push_back({"prop", m.model_id, "scoring", id, v, {}});
      }
    }
    WeightSpec spec;
    spec.metric_weights = random_weights(rng);
    const auto board = rank_leaderboard(records, task(), spec);
    ASSERT_EQ(board.rows.size(), goods.size());
    for (std::size_t i = 0; i < board.rows.size(); ++i) {
      EXPECT_EQ(board.rows[i].rank, static_cast<int>(i) + 1);
      if (i > 0) { EXPECT_GE(board.rows[i - 1].dynascore, board.rows[i].dynascore); }
    }
  }
}

// Every dataset the repository ships, plus the perturbation fixture.
std::vector<std::vector<GoldExample>> corpus() {
  std::vector<std::vector<GoldExample>> out;
  for (const auto& entry : std::filesystem::directory_iterator(testing::kSeedData / "datasets")) {
    for (const auto& file : std::filesystem::directory_iterator(entry.path())) {
      out.push_back(read_dataset_file(file.path().string()));
    }
  }
  out.push_back(read_dataset_file((testing::kFixtures / "perturb_input.jsonl").string()));
  return out;
}

std::vector<Perturbation> every_perturbation() {
  std::vector<Perturbation> out{FairnessKind::kRace, FairnessKind::kGender};
  for (auto t : all_robustness_transforms()) out.push_back(t);
  return out;
}

TEST(PerturbProperty, GoldAndUidArePreserved) {
  const auto datasets = corpus();
  ASSERT_GE(datasets.size(), 5u);
  for (const auto& dataset : datasets) {
    std::map<std::string, GoldExample> by_uid;
    for (const auto& ex : dataset) by_uid[ex.uid] = ex;
    for (const auto& p : every_perturbation()) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const std::vector<Perturbation> one{p};
        const auto result = perturb_dataset(dataset, one, seed);
        EXPECT_EQ(result.skips.total, dataset.size());
        EXPECT_EQ(result.skips.perturbed + result.skips.not_applicable + result.skips.ner_skipped,
                  result.skips.total);
        EXPECT_EQ(result.examples.size(), result.skips.perturbed);
        for (const auto& ex : result.examples) {
          const auto& source = by_uid.at(ex.uid);
          EXPECT_EQ(ex.gold, source.gold);
          EXPECT_NE(ex.input, source.input);
          EXPECT_FALSE(ex.applied_edits.empty());
          EXPECT_EQ(ex.kind, perturbation_kind_tag(p));
        }
      }
    }
  }
}

std::string dump(const PerturbedDataset& d) {
  std::ostringstream out;
  write_perturbed(out, d.examples);
  return out.str();
}

TEST(PerturbProperty, SameSeedSameBytes) {
  const auto all = every_perturbation();
  for (const auto& dataset : corpus()) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto a = perturb_dataset(dataset, all, seed);
      const auto b = perturb_dataset(dataset, all, seed);
      EXPECT_EQ(dump(a), dump(b));
      EXPECT_EQ(a.skips, b.skips);
    }
  }
}

TEST(PerturbProperty, GenderedTermSwapIsAnInvolution) {
  const auto& lexicon = FairnessLexicon::bundled();
  std::vector<std::string> terms;
  for (const auto& [w, m] : lexicon.paired_terms()) {
    EXPECT_EQ(lexicon.paired_counterpart(w), m);
    EXPECT_EQ(lexicon.paired_counterpart(m), w);
    terms.push_back(w);
    terms.push_back(m);
  }
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
  for (int trial = 0; trial < kInstances; ++trial) {
    std::string text = "then";
    for (int i = 0; i < 1 + trial % 6; ++i) text += " " + terms[pick(rng)];
    const GoldExample ex{"u", {{"text", text}}, {"x"}};
    const auto once = perturb_fairness(ex, lexicon, FairnessKind::kGender, trial);
    ASSERT_TRUE(std::holds_alternative<PerturbedExample>(once)) << text;
    const auto& first = std::get<PerturbedExample>(once);
    const GoldExample swapped{"u", first.input, {"x"}};
    const auto twice = perturb_fairness(swapped, lexicon, FairnessKind::kGender, trial + 1);
    ASSERT_TRUE(std::holds_alternative<PerturbedExample>(twice));
    EXPECT_EQ(std::get<PerturbedExample>(twice).input, ex.input) << text;
  }
}

TEST(PerturbProperty, UnchangedFractionIsSymmetric) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> label(0, 2);
  for (int trial = 0; trial < kInstances; ++trial) {
    std::vector<Prediction> a, b;
    for (int i = 0; i < 1 + trial % 20; ++i) {
      const std::string uid = "u" + std::to_string(i);
      a.push_back({uid, PayloadKind::kLabel, std::to_string(label(rng))});
      b.push_back({uid, PayloadKind::kLabel, std::to_string(label(rng))});
    }
    EXPECT_DOUBLE_EQ(unchanged_fraction(a, b), unchanged_fraction(b, a));
    EXPECT_DOUBLE_EQ(unchanged_fraction(a, a), 100.0);
    const double f = unchanged_fraction(a, b);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 100.0);
  }
}

TEST(PerturbProperty, InputIgnoringModelIsFullyStable) {
  const auto all = every_perturbation();
  auto constant = [](const std::string& uid) { return Prediction{uid, PayloadKind::kLabel, "yes"}; };
  for (const auto& dataset : corpus()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto result = perturb_dataset(dataset, all, seed);
      if (result.examples.empty()) continue;
      std::vector<Prediction> original, perturbed;
      for (const auto& ex : result.examples) {
        original.push_back(constant(ex.uid));
        perturbed.push_back(constant(ex.uid));
      }
      EXPECT_EQ(unchanged_fraction(original, perturbed), 100.0);
    }
  }
}

}  // namespace
}  // namespace dynaboard
