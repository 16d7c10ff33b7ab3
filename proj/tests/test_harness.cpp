#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "smi/errors.hpp"
#include "smi/harness.hpp"
#include "smi/rng.hpp"
#include "smi/util.hpp"

using namespace smi;
using namespace smi::harness;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.n_member = 6;
  spec.n_non_member = 6;
  spec.n_aux = 6;
  spec.set_size = 200;
  spec.member_shift = 0.5;
  spec.seed = 99;
  return spec;
}

MethodConfig paired_config(std::uint64_t seed = 99) {
  MethodConfig cfg;
  cfg.smi.paired = true;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("generate_synthetic: counts, roles and determinism") {
  const auto spec = small_spec();
  const auto sets = generate_synthetic(spec);
  REQUIRE(sets.size() == 18);
  std::size_t member = 0, aux = 0;
  for (const auto& s : sets) {
    CHECK(s.original.size() == 200);
    CHECK(s.paraphrased.size() == 200);
    if (s.is_member) ++member;
    if (s.role == corpus::SetRole::auxiliary) ++aux;
    for (double v : s.original) CHECK(v >= 0.0);
    for (double v : s.paraphrased) CHECK(v >= 0.0);
  }
  CHECK(member == 6);
  CHECK(aux == 6);

  const auto again = generate_synthetic(spec);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(sets[i].original == again[i].original);
    CHECK(sets[i].paraphrased == again[i].paraphrased);
  }
  auto reseeded = spec;
  reseeded.seed = 100;
  CHECK(generate_synthetic(reseeded)[0].original != sets[0].original);
}

TEST_CASE("generate_synthetic: empirical shift tracks member_shift") {
  SyntheticSpec spec;
  spec.n_member = 1;
  spec.n_non_member = 1;
  spec.n_aux = 1;
  spec.set_size = 4000;
  spec.member_shift = 0.3;
  spec.shift_sd = 0.25;
  spec.seed = 3;
  const auto sets = generate_synthetic(spec);
  const auto& member = sets[0];
  double mean_shift = 0.0;
  for (std::size_t i = 0; i < member.original.size(); ++i) {
    mean_shift += member.paraphrased[i] - member.original[i];
  }
  mean_shift /= static_cast<double>(member.original.size());
  // Within 3 standard errors of delta_m: se = shift_sd / sqrt(n).
  const double se = spec.shift_sd / std::sqrt(static_cast<double>(spec.set_size));
  CHECK(std::fabs(mean_shift - spec.member_shift) < 3.0 * se);

  const auto& non_member = sets[1];
  double null_shift = 0.0;
  for (std::size_t i = 0; i < non_member.original.size(); ++i) {
    null_shift += non_member.paraphrased[i] - non_member.original[i];
  }
  null_shift /= static_cast<double>(non_member.original.size());
  CHECK(std::fabs(null_shift) < 3.0 * se);
}

TEST_CASE("generate_synthetic: invalid specs are config errors") {
  SyntheticSpec bad = small_spec();
  bad.member_shift = -0.1;
  bad.non_member_shift = 0.0;
  CHECK_THROWS_AS(generate_synthetic(bad), config_error);
  bad = small_spec();
  bad.base_sd = 0.0;
  CHECK_THROWS_AS(generate_synthetic(bad), config_error);
  bad = small_spec();
  bad.n_aux = 0;
  CHECK_THROWS_AS(generate_synthetic(bad), config_error);
}

TEST_CASE("mix_partial_membership: exact composition") {
  const auto sets = generate_synthetic(small_spec());
  const auto& member_pool = sets[0];
  const auto& non_member_pool = sets[6];

  for (const double r : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    MixSpec mix{r, 150};
    const auto mixed = mix_partial_membership(member_pool, non_member_pool, mix, 7);
    CHECK(mixed.original.size() == 150);
    CHECK(mixed.member_sample_count ==
          static_cast<std::size_t>(std::llround(r * 150.0)));
  }
  // r = 0.4, set size 500 -> 200 member + 300 non-member: needs bigger pools.
  SyntheticSpec pool_spec = small_spec();
  pool_spec.set_size = 500;
  const auto pools = generate_synthetic(pool_spec);
  const auto mixed = mix_partial_membership(pools[0], pools[6], MixSpec{0.4, 500}, 7);
  CHECK(mixed.member_sample_count == 200);
  CHECK(mixed.original.size() == 500);

  CHECK_THROWS_AS(mix_partial_membership(member_pool, non_member_pool, MixSpec{0.9, 500}, 7),
                  config_error);
  CHECK_THROWS_AS(mix_partial_membership(member_pool, non_member_pool, MixSpec{1.5, 100}, 7),
                  config_error);
}

TEST_CASE("make_eval_result: the three signature modes") {
  std::vector<SetVerdict> verdicts;
  for (int i = 0; i < 100; ++i) verdicts.push_back(SetVerdict{"m", true, true, 0, 0, 0, 0});
  for (int i = 0; i < 100; ++i) verdicts.push_back(SetVerdict{"n", false, true, 0, 0, 0, 0});
  const auto all_member = make_eval_result("x", verdicts);
  CHECK(all_member.recall == doctest::Approx(1.0));
  CHECK(all_member.precision == doctest::Approx(0.5));
  CHECK(all_member.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  for (auto& v : verdicts) v.predicted_member = v.is_member;
  const auto perfect = make_eval_result("x", verdicts);
  CHECK(perfect.f1 == doctest::Approx(1.0));

  for (auto& v : verdicts) v.predicted_member = false;
  const auto none = make_eval_result("x", verdicts);
  CHECK(none.f1 == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.precision == 0.0);
}

TEST_CASE("F1 identity holds for every eval result") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SetVerdict> verdicts;
    const int n = 1 + static_cast<int>(rng.uniform_below(60));
    for (int i = 0; i < n; ++i) {
      verdicts.push_back(SetVerdict{"s", rng.uniform() < 0.5, rng.uniform() < 0.5, 0, 0, 0, 0});
    }
    const auto r = make_eval_result("x", verdicts);
    if (r.precision + r.recall > 0) {
      CHECK(r.f1 ==
            doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)).epsilon(1e-12));
    } else {
      CHECK(r.f1 == 0.0);
    }
  }
}

TEST_CASE("evaluate_methods: member shift is detected, null is controlled") {
  const auto sets = generate_synthetic(small_spec());
  const auto results = evaluate_methods(sets, {"smi", "anll_dataset", "ddi"}, paired_config());
  REQUIRE(results.size() == 3);
  CHECK(results[0].method == "smi");
  CHECK(results[0].f1 == doctest::Approx(1.0));  // 0.5-sigma shift, paired: easy
  CHECK(results[0].per_set.size() == 12);
  // The baselines see identically-distributed originals: anll votes are
  // uninformative here; just check they produce well-formed results.
  CHECK(results[1].method == "anll_dataset");
  CHECK(results[2].method == "ddi");
}

TEST_CASE("evaluate_methods: unknown and unsupported methods") {
  const auto sets = generate_synthetic(small_spec());
  CHECK_THROWS_AS(evaluate_methods(sets, {"telepathy"}, paired_config()), config_error);
  CHECK_THROWS_AS(evaluate_methods(sets, {"mink_dataset"}, paired_config()), config_error);
  std::vector<SyntheticSet> no_aux(sets.begin(), sets.begin() + 12);
  CHECK_THROWS_AS(evaluate_methods(no_aux, {"smi"}, paired_config()), config_error);
}

TEST_CASE("evaluate_methods: null benchmark keeps the member rate low") {
  SyntheticSpec spec = small_spec();
  spec.member_shift = 0.0;
  spec.non_member_shift = 0.0;
  spec.n_member = 10;
  spec.n_non_member = 10;
  spec.n_aux = 10;
  const auto sets = generate_synthetic(spec);
  const auto results = evaluate_methods(sets, {"smi"}, paired_config());
  std::size_t member_verdicts = 0;
  for (const auto& v : results[0].per_set) member_verdicts += v.predicted_member;
  CHECK(member_verdicts <= 1);  // 20 null sets, margins should block ~all
}

TEST_CASE("null false-positive control across 100 seeds") {
  // delta_m = delta_n = 0: member verdicts should be rare (<= 5% of sets).
  std::size_t member_verdicts = 0, total = 0;
  for (int seed = 0; seed < 100; ++seed) {
    SyntheticSpec spec;
    spec.n_member = 2;
    spec.n_non_member = 2;
    spec.n_aux = 2;
    spec.set_size = 300;
    spec.member_shift = 0.0;
    spec.non_member_shift = 0.0;
    spec.seed = 50000 + seed;
    const auto sets = generate_synthetic(spec);
    const auto results = evaluate_methods(sets, {"smi"}, paired_config(spec.seed));
    for (const auto& v : results[0].per_set) {
      ++total;
      member_verdicts += v.predicted_member;
    }
  }
  CHECK(total == 400);
  CHECK(static_cast<double>(member_verdicts) / static_cast<double>(total) <= 0.05);
}

TEST_CASE("ablate_sample_size: n = N reproduces the full run") {
  const auto sets = generate_synthetic(small_spec());
  const auto cfg = paired_config();
  const auto full = evaluate_methods(sets, {"smi"}, cfg);
  const auto ablated = ablate_sample_size(sets, {100, 200}, {"smi"}, cfg);
  REQUIRE(ablated.size() == 2);
  CHECK(ablated[0].first == 100);
  CHECK(ablated[1].first == 200);
  CHECK(ablated[1].second.f1 == full[0].f1);
  CHECK(ablated[1].second.per_set.size() == full[0].per_set.size());
  for (std::size_t i = 0; i < full[0].per_set.size(); ++i) {
    CHECK(ablated[1].second.per_set[i].predicted_member == full[0].per_set[i].predicted_member);
  }
  CHECK_THROWS_AS(ablate_sample_size(sets, {201}, {"smi"}, cfg), config_error);
}

TEST_CASE("ablate_margins: re-deciding from cached series equals a fresh run") {
  const auto sets = generate_synthetic(small_spec());
  const auto cfg = paired_config();
  const auto swept = ablate_margins(sets, {{0.0, 0.0}, {0.01, 10.0}, {1e9, 1e9}}, cfg);
  REQUIRE(swept.size() == 3);

  MethodConfig direct_cfg = cfg;
  direct_cfg.smi.epsilon_1 = 0.0;
  direct_cfg.smi.epsilon_2 = 0.0;
  const auto direct = evaluate_methods(sets, {"smi"}, direct_cfg);
  CHECK(swept[0].second.f1 == direct[0].f1);
  for (std::size_t i = 0; i < direct[0].per_set.size(); ++i) {
    CHECK(swept[0].second.per_set[i].predicted_member == direct[0].per_set[i].predicted_member);
  }
  // Saturating margins admit nothing.
  CHECK(swept[2].second.f1 == 0.0);
  CHECK_THROWS_AS(ablate_margins(sets, {}, cfg), config_error);
}

TEST_CASE("synthetic jsonl round-trips") {
  const auto sets = generate_synthetic(small_spec());
  const auto path = (std::filesystem::temp_directory_path() / "smi_synth.jsonl").string();
  write_synthetic_jsonl(path, sets);
  const auto loaded = read_synthetic_jsonl(path);
  std::remove(path.c_str());
  REQUIRE(loaded.size() == sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(loaded[i].name == sets[i].name);
    CHECK(loaded[i].role == sets[i].role);
    CHECK(loaded[i].is_member == sets[i].is_member);
    CHECK(loaded[i].original == sets[i].original);
    CHECK(loaded[i].paraphrased == sets[i].paraphrased);
  }
}

TEST_CASE("plot data files: schema, shape and byte-stable re-emission") {
  const auto sets = generate_synthetic(small_spec());
  const auto cfg = paired_config();
  inference::PValueSeries series = inference::p_value_series(
      sets[0].original, sets[0].paraphrased, 10, inference::seeded_order(200, 1), cfg.smi);
  series.set_name = sets[0].name;

  const auto dir = std::filesystem::temp_directory_path();
  const auto series_path = (dir / "smi_series.csv").string();
  const auto hist_path = (dir / "smi_hist.csv").string();
  const auto results_path = (dir / "smi_results.csv").string();

  emit_series_csv(series_path, {series});
  std::ifstream in(series_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,log_p,set_name");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);  // one per series point
  in.close();

  emit_histogram_csv(hist_path, sets, 0.25);
  std::ifstream hist(hist_path);
  std::getline(hist, header);
  CHECK(header == "bin_lo,bin_hi,count_original,count_paraphrased");
  double max_value = 0.0;
  for (const auto& s : sets) {
    for (double v : s.original) max_value = std::max(max_value, v);
    for (double v : s.paraphrased) max_value = std::max(max_value, v);
  }
  std::size_t hist_rows = 0;
  double last_hi = 0.0;
  while (std::getline(hist, line)) {
    ++hist_rows;
    last_hi = std::stod(line.substr(line.find(',') + 1));
  }
  CHECK(last_hi >= max_value);  // bins cover [0, max]
  CHECK(hist_rows >= 1);
  hist.close();

  const auto results = evaluate_methods(sets, {"smi"}, cfg);
  emit_results_csv(results_path, {{"full", 0.0, results[0]}});

  // Re-emission is byte-identical.
  const auto first_bytes = util::read_file(series_path);
  emit_series_csv(series_path, {series});
  CHECK(util::read_file(series_path) == first_bytes);
  const auto hist_bytes = util::read_file(hist_path);
  emit_histogram_csv(hist_path, sets, 0.25);
  CHECK(util::read_file(hist_path) == hist_bytes);

  std::remove(series_path.c_str());
  std::remove(hist_path.c_str());
  std::remove(results_path.c_str());
}
