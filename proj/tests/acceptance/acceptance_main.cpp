// Acceptance suite: one pass/fail line per criterion, every threshold
// pinned in code. Run a single criterion with `acceptance cN` or all with
// no arguments; the exit code is nonzero when any executed criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "oracle_normal.hpp"
#include "smi/backend.hpp"
#include "smi/baselines.hpp"
#include "smi/corpus.hpp"
#include "smi/errors.hpp"
#include "smi/harness.hpp"
#include "smi/inference.hpp"
#include "smi/paraphrase.hpp"
#include "smi/rng.hpp"
#include "smi/scoring.hpp"
#include "smi/text.hpp"
#include "smi/util.hpp"

namespace fs = std::filesystem;
using namespace smi;
using smi_test::oracle_log_normal_cdf;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream log;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      log << "    FAILED: " << what << "\n";
    }
  }
  void note(const std::string& what) { log << "    " << what << "\n"; }
};

double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

bool approx(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---------------------------------------------------------------------- c1

bool criterion_1(Check& c) {
  Rng rng(20250101);
  int exact_checked = 0;
  double worst_exact = 0.0;
  while (exact_checked < 1000) {
    const double mu_org = 5.0 * rng.uniform();
    const double mu_para = 5.0 * rng.uniform();
    const double sd_org = 0.2 + 1.8 * rng.uniform();
    const double sd_para = 0.2 + 1.8 * rng.uniform();
    const auto n_org = static_cast<std::size_t>(10 + rng.uniform_below(1990));
    const auto n_para = static_cast<std::size_t>(10 + rng.uniform_below(1990));
    const auto result = inference::z_test_one_tailed(
        inference::ScoreSet::from_summary(mu_org, sd_org, n_org),
        inference::ScoreSet::from_summary(mu_para, sd_para, n_para));
    if (std::fabs(result.z) > 8.0) continue;
    ++exact_checked;
    const double want = static_cast<double>(oracle_log_normal_cdf(result.z));
    worst_exact = std::max(worst_exact, rel_diff(result.log_p, want));
  }
  c.note("exact branch: 1000 configs, worst relative diff " + std::to_string(worst_exact));
  c.expect(worst_exact < 1e-10, "exact-branch log_p within 1e-10 relative of the oracle");

  double worst_tail = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double z = -(8.0 + 52.0 * rng.uniform());  // |z| in (8, 60]
    const auto result = inference::z_test_one_tailed(
        inference::ScoreSet::from_summary(z, std::sqrt(500.0), 1000),
        inference::ScoreSet::from_summary(0.0, std::sqrt(500.0), 1000));
    c.expect(result.method == inference::TailMethod::asymptotic, "asymptotic branch engaged");
    const double want = static_cast<double>(oracle_log_normal_cdf(result.z));
    worst_tail = std::max(worst_tail, rel_diff(result.log_p, want));
  }
  c.note("asymptotic branch: 500 configs, worst relative diff " + std::to_string(worst_tail));
  c.expect(worst_tail < 0.02, "asymptotic-branch log_p within 2% relative of the oracle");
  return c.ok;
}

// ---------------------------------------------------------------------- c2

bool criterion_2(Check& c) {
  int passing = 0;
  for (int seed = 0; seed < 100; ++seed) {
    harness::SyntheticSpec spec;
    spec.n_member = 1;
    spec.n_non_member = 1;
    spec.n_aux = 1;
    spec.set_size = 500;
    spec.member_shift = 0.3;  // d = 0.3 against base_sd = 1
    spec.seed = 424200 + seed;
    const auto member = harness::generate_synthetic(spec)[0];
    const auto series = inference::p_value_series(member.original, member.paraphrased, 10,
                                                  inference::seeded_order(500, spec.seed));
    const auto check = inference::linearity_check(series);
    if (check.r_squared >= 0.95 && check.fitted_slope < 0.0) ++passing;
  }
  c.note("seeds with r^2 >= 0.95 and negative slope: " + std::to_string(passing) + "/100");
  c.expect(passing >= 95, "log p decays linearly in n in at least 95 of 100 seeds");
  return c.ok;
}

// ---------------------------------------------------------------------- c3

harness::MethodConfig benchmark_config(std::uint64_t seed) {
  harness::MethodConfig cfg;
  cfg.smi.K = 10;
  cfg.smi.epsilon_1 = 0.01;
  cfg.smi.epsilon_2 = 10.0;
  cfg.smi.paired = true;
  cfg.seed = seed;
  return cfg;
}

bool criterion_3(Check& c) {
  harness::SyntheticSpec spec;  // 100/100/100, N=500, delta_m=0.3, delta_n=0
  spec.seed = 31337;
  const auto sets = harness::generate_synthetic(spec);
  const auto results = harness::evaluate_methods(sets, {"smi"}, benchmark_config(spec.seed));
  const auto& smi_result = results[0];
  std::ostringstream line;
  line << "SMI F1 " << smi_result.f1 << " recall " << smi_result.recall << " precision "
       << smi_result.precision;
  c.note(line.str());
  c.expect(smi_result.f1 >= 0.95, "F1 >= 0.95");
  c.expect(smi_result.precision >= 0.95, "precision >= 0.95");
  return c.ok;
}

// ---------------------------------------------------------------------- c4

bool criterion_4(Check& c) {
  const auto run = [&](double offset) {
    harness::SyntheticSpec spec;
    spec.n_member = 1;  // unused; only the shifted non-member candidates matter
    spec.n_non_member = 100;
    spec.n_aux = 100;
    spec.member_shift = 0.0;
    spec.non_member_shift = 0.0;
    spec.candidate_mean_offset = offset;
    spec.seed = 8800 + static_cast<std::uint64_t>(offset * 1000);
    const auto sets = harness::generate_synthetic(spec);
    std::vector<harness::SyntheticSet> candidates_and_aux;
    for (const auto& s : sets) {
      if (!s.is_member) candidates_and_aux.push_back(s);
    }
    const auto cfg = benchmark_config(spec.seed);
    const auto results =
        harness::evaluate_methods(candidates_and_aux, {"ddi", "smi"}, cfg);
    double ddi_rate = 0.0, smi_rate = 0.0;
    for (const auto& result : results) {
      std::size_t members = 0;
      for (const auto& v : result.per_set) members += v.predicted_member;
      const double rate = static_cast<double>(members) / result.per_set.size();
      (result.method == "ddi" ? ddi_rate : smi_rate) = rate;
    }
    return std::make_pair(ddi_rate, smi_rate);
  };

  const auto [ddi_rate, smi_rate] = run(0.1);
  c.note("offset 0.1*sigma0: DDI member rate " + std::to_string(ddi_rate) +
         ", SMI member rate " + std::to_string(smi_rate));
  const auto [ddi_large, smi_large] = run(0.5);
  c.note("informational, offset 0.5*sigma0 (the ddi_decide example gap): DDI member rate " +
         std::to_string(ddi_large) + ", SMI member rate " + std::to_string(smi_large));

  c.expect(ddi_rate >= 0.90,
           "DDI member-verdict rate >= 90% at a 0.1*sigma0 distribution shift (known spec "
           "defect: the two-sample z at this gap and N=500 is ~N(1.58,1), giving a ~15% rate; "
           "the phenomenon needs a >=0.25*sigma0 gap, cf. the 0.5*sigma0 line above)");
  c.expect(smi_rate <= 0.05, "SMI member-verdict rate <= 5% under the same shift");
  return c.ok;
}

// ---------------------------------------------------------------------- c5

bool criterion_5(Check& c) {
  Rng rng(5150);
  const auto make_sets = [&](double mean, int count) {
    std::vector<std::vector<double>> sets;
    for (int s = 0; s < count; ++s) {
      std::vector<double> values;
      for (int i = 0; i < 500; ++i) values.push_back(rng.normal(mean, 1.0));
      sets.push_back(std::move(values));
    }
    return sets;
  };
  const auto member_sets = make_sets(2.0, 100);      // median 2
  const auto non_member_sets = make_sets(3.0, 100);  // median 3

  const auto evaluate_at = [&](double threshold) {
    std::vector<harness::SetVerdict> verdicts;
    for (const auto& [sets, is_member] :
         {std::pair{&member_sets, true}, std::pair{&non_member_sets, false}}) {
      for (const auto& values : *sets) {
        std::vector<scoring::MetricValue> metrics;
        for (std::size_t i = 0; i < values.size(); ++i) {
          metrics.push_back(scoring::MetricValue{std::to_string(i), "anll_suffix", values[i]});
        }
        const auto sample_verdicts = baselines::sample_level_classify(metrics, threshold);
        verdicts.push_back(harness::SetVerdict{
            "", is_member,
            baselines::dataset_level_vote(sample_verdicts) == inference::Decision::member, 0, 0,
            0, 0});
      }
    }
    return harness::make_eval_result("anll_dataset", verdicts);
  };

  const auto left = evaluate_at(1.3);    // below both medians
  const auto middle = evaluate_at(2.5);  // between the medians
  const auto right = evaluate_at(3.7);   // above both medians

  std::ostringstream line;
  line << "left " << left.f1 << " (" << left.recall << "/" << left.precision << "), middle "
       << middle.f1 << ", right " << right.f1 << " (" << right.recall << "/" << right.precision
       << ")";
  c.note(line.str());

  c.expect(approx(left.f1, 0.0, 0.001) && approx(left.recall, 0.0, 0.001) &&
               approx(left.precision, 0.0, 0.001),
           "left region is exactly 0.000 (0.000/0.000)");
  c.expect(approx(middle.f1, 1.0, 0.001), "middle region is exactly 1.000");
  c.expect(approx(right.f1, 0.667, 0.001) && approx(right.recall, 1.0, 0.001) &&
               approx(right.precision, 0.5, 0.001),
           "right region is exactly 0.667 (1.000/0.500)");
  return c.ok;
}

// ---------------------------------------------------------------------- c6

bool criterion_6(Check& c) {
  corpus::SplitSample sample;
  sample.id = "acc6";
  sample.prefix_text = "Alpha beta gamma. ";
  sample.suffix_text = "Delta epsilon zeta eta.";
  sample.split_index = 5;

  backend::BackendDescriptor full;
  full.endpoint = "mock:";
  full.model_id = "m";
  full.capability = backend::Capability::full_vocab_logprobs;
  backend::BackendDescriptor predicted = full;
  predicted.capability = backend::Capability::predicted_token_only;

  backend::MockConfig mock;
  mock.const_logprob = -1.5;
  mock.match = backend::MockConfig::MatchRule::always;
  backend::MockBackend be(mock);

  const auto continuation = scoring::score_continuation(sample, scoring::Variant::original, be, full);
  const auto walked =
      scoring::score_predicted_only(sample, scoring::Variant::original, be, predicted, 9.2103);

  std::vector<scoring::TokenScore> continuation_suffix;
  for (const auto& t : continuation.token_scores) {
    if (t.position >= continuation.split_index) continuation_suffix.push_back(t);
  }
  c.expect(continuation_suffix.size() == walked.token_scores.size(),
           "same suffix token count in both scoring paths");
  bool token_exact = continuation_suffix.size() == walked.token_scores.size();
  for (std::size_t i = 0; token_exact && i < walked.token_scores.size(); ++i) {
    token_exact = walked.token_scores[i].logprob == continuation_suffix[i].logprob &&
                  !walked.token_scores[i].imputed;
  }
  c.expect(token_exact, "greedy-match walk equals echo scoring token for token (exact)");
  c.expect(walked.anll_suffix == continuation.anll_suffix,
           "suffix A-NLL identical under both paths");

  // 3-of-5 match with fallback 9.2103.
  corpus::SplitSample five;
  five.id = "acc6b";
  five.prefix_text = "Lead in. ";
  five.suffix_text = "a b c d e";
  five.split_index = 4;
  backend::MockBackend scripted(backend::MockConfig{});
  scripted.script_prediction(backend::PredictedToken{"a", -1.0});
  scripted.script_prediction(backend::PredictedToken{" b", -1.0});
  scripted.script_prediction(backend::PredictedToken{" c", -1.0});
  scripted.script_prediction(backend::PredictedToken{" x", -0.2});
  scripted.script_prediction(backend::PredictedToken{" y", -0.2});
  const auto mixed =
      scoring::score_predicted_only(five, scoring::Variant::original, scripted, predicted, 9.2103);
  c.note("3-of-5 suffix A-NLL = " + std::to_string(mixed.anll_suffix));
  c.expect(std::fabs(mixed.anll_suffix - 4.28412) <= 1e-9,
           "3-of-5 match with fallback 9.2103 gives suffix A-NLL 4.28412 +/- 1e-9");
  return c.ok;
}

// ---------------------------------------------------------------------- c7

bool criterion_7(Check& c) {
  const std::vector<std::size_t> grid = {100, 300, 500};
  std::map<std::size_t, std::vector<double>> f1_by_n;
  for (int seed = 0; seed < 20; ++seed) {
    harness::SyntheticSpec spec;  // criterion-3 benchmark
    spec.seed = 70000 + seed;
    const auto sets = harness::generate_synthetic(spec);
    const auto swept =
        harness::ablate_sample_size(sets, grid, {"smi"}, benchmark_config(spec.seed));
    for (const auto& [n, result] : swept) f1_by_n[n].push_back(result.f1);
  }
  std::map<std::size_t, double> mean, se;
  for (const auto& [n, values] : f1_by_n) {
    double m = 0.0;
    for (double v : values) m += v;
    m /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - m) * (v - m);
    var /= (values.size() - 1);
    mean[n] = m;
    se[n] = std::sqrt(var / values.size());
    std::ostringstream line;
    line << "n=" << n << ": mean F1 " << m << " (se " << se[n] << ")";
    c.note(line.str());
  }
  c.expect(mean[300] >= 0.90, "mean F1 at n=300 over 20 seeds >= 0.90");
  c.expect(mean[300] >= mean[100] - std::max(se[100], se[300]),
           "F1 non-decreasing from n=100 to n=300 within one standard error");
  c.expect(mean[500] >= mean[300] - std::max(se[300], se[500]),
           "F1 non-decreasing from n=300 to n=500 within one standard error");
  return c.ok;
}

// ---------------------------------------------------------------------- c8

bool criterion_8(Check& c) {
  const std::size_t set_size = 500;
  const std::uint64_t seed = 880088;
  harness::SyntheticSpec pool_spec;
  pool_spec.n_member = 100;  // pools for the mixed candidates
  pool_spec.n_non_member = 100;
  pool_spec.n_aux = 100;
  pool_spec.set_size = set_size;
  pool_spec.member_shift = 0.5;
  pool_spec.seed = seed;
  const auto pools = harness::generate_synthetic(pool_spec);

  std::vector<const harness::SyntheticSet*> member_pools, non_member_pools, aux_sets;
  for (const auto& s : pools) {
    if (s.role == corpus::SetRole::auxiliary) {
      aux_sets.push_back(&s);
    } else if (s.is_member) {
      member_pools.push_back(&s);
    } else {
      non_member_pools.push_back(&s);
    }
  }

  // Independent negatives so each ratio's F1 sees both classes.
  harness::SyntheticSpec negative_spec = pool_spec;
  negative_spec.seed = seed + 1;
  const auto negative_source = harness::generate_synthetic(negative_spec);

  const auto cfg = benchmark_config(seed);
  for (const double r : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    std::vector<harness::SyntheticSet> sets;
    for (std::size_t i = 0; i < member_pools.size(); ++i) {
      auto mixed = harness::mix_partial_membership(*member_pools[i], *non_member_pools[i],
                                                   harness::MixSpec{r, set_size},
                                                   derive_seed(seed, "mix", i));
      mixed.name = "mixed#" + std::to_string(i);
      mixed.is_member = true;  // ground truth: partially trained-on for r > 0
      sets.push_back(std::move(mixed));
    }
    for (const auto& s : negative_source) {
      if (!s.is_member) sets.push_back(s);  // negatives + aux references
    }
    const auto results = harness::evaluate_methods(sets, {"smi"}, cfg);
    const auto& result = results[0];
    std::size_t mixed_members = 0, mixed_total = 0;
    for (const auto& v : result.per_set) {
      if (v.set_name.rfind("mixed#", 0) == 0) {
        ++mixed_total;
        mixed_members += v.predicted_member;
      }
    }
    const double rate = static_cast<double>(mixed_members) / mixed_total;
    std::ostringstream line;
    line << "r=" << r << ": member-verdict rate on mixed sets " << rate << ", F1 " << result.f1;
    c.note(line.str());
    if (r == 0.0) {
      c.expect(rate <= 0.10, "member-verdict rate <= 10% at r = 0");
    } else if (r >= 0.4) {
      c.expect(result.f1 >= 0.9, "F1 >= 0.9 at r = " + std::to_string(r));
    }
  }
  return c.ok;
}

// ---------------------------------------------------------------------- c9

struct CliRunner {
  std::string cli;
  fs::path tmp;

  bool run(const std::string& args) const {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  }
};

std::string corpus_fixture(int records, const std::string& tag) {
  std::ostringstream out;
  for (int i = 0; i < records; ++i) {
    out << R"({"id":")" << tag << i << R"(","text":")";
    for (int s = 0; s < 4; ++s) {
      if (s > 0) out << ' ';
      for (int w = 0; w < 14; ++w) out << tag << i << "s" << s << "w" << w << ' ';
      out << "end" << s << '.';
    }
    out << R"("})" << "\n";
  }
  return out.str();
}

std::string canonical_cache(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  return joined;
}

bool criterion_9(Check& c) {
  const char* cli = std::getenv("SMI_CLI");
  if (!cli) {
    c.expect(false, "SMI_CLI not set (run through ctest)");
    return false;
  }
  const char* tmp_root = std::getenv("SMI_TEST_TMP");
  const fs::path tmp = tmp_root ? fs::path(tmp_root) / "c9" : fs::temp_directory_path() / "smi_c9";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  CliRunner runner{cli, tmp};

  util::write_file((tmp / "candidate.jsonl").string(), corpus_fixture(40, "c"));
  util::write_file((tmp / "aux.jsonl").string(), corpus_fixture(40, "x"));

  const std::string backend = "'mock:hash?lo=-4&hi=-0.5&seed=13'";  // quoted for the shell
  const auto pipeline = [&](const std::string& run_dir) -> bool {
    const fs::path dir = tmp / run_dir;
    fs::create_directories(dir);
    for (const auto& [name, input] :
         {std::pair{std::string("cand"), std::string("candidate.jsonl")},
          std::pair{std::string("aux"), std::string("aux.jsonl")}}) {
      if (!runner.run("prepare --input " + (tmp / input).string() + " --mode text --out " +
                      (dir / (name + "_prep")).string())) {
        return false;
      }
      if (!runner.run("paraphrase --input " + (dir / (name + "_prep/prepared.jsonl")).string() +
                      " --backend mock:const --model mock-para --out " +
                      (dir / (name + "_para")).string())) {
        return false;
      }
      if (!runner.run("score --input " + (dir / (name + "_para/paraphrased.jsonl")).string() +
                      " --backend " + backend + " --model mock-model --out " +
                      (dir / (name + "_scores")).string() + " --max-in-flight 3")) {
        return false;
      }
    }
    return runner.run("infer --candidate-scores " + (dir / "cand_scores/scores.jsonl").string() +
                      " --aux-scores " + (dir / "aux_scores/scores.jsonl").string() +
                      " --K 5 --seed 7 --report " + (dir / "verdict.json").string() +
                      " --csv " + (dir / "series.csv").string());
  };

  c.expect(pipeline("run1"), "pipeline run 1 completes");
  c.expect(pipeline("run2"), "pipeline run 2 completes");
  for (const auto& artifact :
       {"cand_prep/prepared.jsonl", "cand_para/paraphrased.jsonl", "verdict.json", "series.csv"}) {
    c.expect(util::read_file((tmp / "run1" / artifact).string()) ==
                 util::read_file((tmp / "run2" / artifact).string()),
             std::string("byte-identical across runs: ") + artifact);
  }

  // Resumability: phase 1 scores only the first 15 samples (simulating a
  // killed run), phase 2 resumes with the full input into the same cache.
  const fs::path resume = tmp / "resume";
  fs::create_directories(resume);
  {
    std::ifstream in(tmp / "run1/cand_para/paraphrased.jsonl");
    std::ofstream partial(resume / "partial.jsonl");
    std::string line;
    for (int i = 0; i < 15 && std::getline(in, line); ++i) partial << line << "\n";
  }
  c.expect(runner.run("score --input " + (resume / "partial.jsonl").string() + " --backend " +
                      backend + " --model mock-model --out " + (resume / "phase1").string() +
                      " --cache " + (resume / "cache.jsonl").string()),
           "phase 1 (interrupted) scoring completes");
  c.expect(runner.run("score --input " + (tmp / "run1/cand_para/paraphrased.jsonl").string() +
                      " --backend " + backend + " --model mock-model --out " +
                      (resume / "phase2").string() + " --cache " +
                      (resume / "cache.jsonl").string()),
           "phase 2 (resumed) scoring completes");
  c.expect(canonical_cache(resume / "cache.jsonl") ==
               canonical_cache(tmp / "run1/cand_scores/scores.jsonl"),
           "resumed cache content equals the uninterrupted run");

  c.expect(runner.run("infer --candidate-scores " + (resume / "cache.jsonl").string() +
                      " --aux-scores " + (tmp / "run1/aux_scores/scores.jsonl").string() +
                      " --K 5 --seed 7 --report " + (resume / "verdict.json").string()),
           "inference from the resumed cache completes");
  nlohmann::json resumed = nlohmann::json::parse(util::read_file((resume / "verdict.json").string()));
  nlohmann::json direct = nlohmann::json::parse(util::read_file((tmp / "run1/verdict.json").string()));
  resumed["set_name"] = direct["set_name"];
  c.expect(resumed.dump() == direct.dump(), "resumed verdict equals the uninterrupted verdict");
  return c.ok;
}

// --------------------------------------------------------------------- c10

bool criterion_10(Check& c) {
  using inference::ScoreSet;
  const auto expect_near = [&](double got, double want, double tol, const std::string& what) {
    c.expect(std::fabs(got - want) <= tol, what + " (got " + std::to_string(got) + ")");
  };

  // scoring metrics
  const auto scores = [](std::initializer_list<double> lps) {
    std::vector<scoring::TokenScore> out;
    std::size_t pos = 1;
    for (double lp : lps) out.push_back(scoring::TokenScore{"", lp, pos++, false});
    return out;
  };
  expect_near(scoring::a_nll(scores({0, 0, 0})), 0.0, 0, "a_nll certainty");
  expect_near(scoring::a_nll(scores({-2.0})), 2.0, 0, "a_nll single token");
  expect_near(scoring::a_nll(scores({-0.5, -1.0, -1.5})), 1.0, 1e-15, "a_nll mean");
  expect_near(scoring::suffix_a_nll(scores({-1, -2, -3, -4}), 3), 3.5, 1e-15, "suffix mean");
  expect_near(scoring::suffix_a_nll(scores({-1, -2, -3, -4}), 1),
              scoring::a_nll(scores({-1, -2, -3, -4})), 0, "suffix i=1 degenerate");
  expect_near(scoring::suffix_a_nll(scores({-1, -2, -3, -4}), 4), 4.0, 1e-15, "suffix single");
  expect_near(scoring::min_k_score(scores({-0.1, -0.2, -3.0, -4.0}), 50), 3.5, 1e-15, "min_k 50");
  expect_near(scoring::min_k_score(scores({-1, -1, -1, -5}), 25), 5.0, 1e-15, "min_k 25");
  expect_near(scoring::zlib_ratio(scores({0, 0}), "x"), 0.0, 0, "zlib zero numerator");
  c.expect(scoring::zlib_compressed_size(std::string(200, 'a')) == 12,
           "golden DEFLATE length of 200*'a'");

  // z tests and series
  const auto z1 = inference::z_test_one_tailed(ScoreSet::from_summary(2.0, 1.0, 100),
                                               ScoreSet::from_summary(2.5, 1.0, 100));
  expect_near(z1.z, -3.5355339059327378, 1e-9, "z example");
  expect_near(z1.log_p, -8.49996245328721, 1e-7, "log p example vs oracle");
  const auto z0 = inference::z_test_one_tailed(ScoreSet::from_summary(1.0, 0.5, 50),
                                               ScoreSet::from_summary(1.0, 0.5, 50));
  expect_near(z0.log_p, std::log(0.5), 1e-15, "symmetric null");

  const std::vector<double> org = {1, 1, 3, 3}, para = {2, 2, 4, 4};
  std::vector<std::size_t> identity = {0, 1, 2, 3};
  const auto series = inference::p_value_series(org, para, 2, identity);
  c.expect(series.points[0].first == 2 && series.points[1].first == 4, "K=2 grid");
  expect_near(series.points[1].second, -2.2042279149171606, 1e-10, "K=2 point 2");

  const auto fit =
      inference::slope_fit({3, {{100, -1}, {200, -2}, {300, -3}}, ""});
  expect_near(fit.beta, -0.01, 1e-15, "perfect-line slope");
  expect_near(fit.r_squared, 1.0, 1e-12, "perfect-line r^2");
  const auto golden =
      inference::slope_fit({4, {{50, -0.8}, {100, -1.9}, {150, -2.7}, {200, -4.2}}, ""});
  expect_near(golden.beta, -0.022, 1e-12, "golden slope");
  expect_near(golden.r_squared, 0.9853420195439739, 1e-12, "golden r^2");

  inference::SmiConfig cfg;
  const inference::PValueSeries strong{3, {{100, -10}, {200, -25}, {300, -40}}, "m"};
  const inference::PValueSeries weak{3, {{100, -1}, {200, -1.5}, {300, -2}}, "a"};
  c.expect(inference::smi_decide(strong, weak, cfg).decision == inference::Decision::member,
           "decide member");
  c.expect(inference::smi_decide(weak, weak, cfg).decision == inference::Decision::non_member,
           "decide margins unmet");
  const inference::PValueSeries eleven{3, {{100, -5}, {200, -8}, {300, -11}}, "w"};
  c.expect(inference::smi_decide(eleven, weak, cfg).decision == inference::Decision::non_member,
           "decide Eq.2 single-criterion failure");

  // baselines
  std::vector<double> grid_scores;
  for (int i = 1; i <= 100; ++i) grid_scores.push_back(i);
  expect_near(baselines::percentile_threshold(grid_scores, 45), 45.0, 0, "percentile 45");
  expect_near(baselines::percentile_threshold({7.0}, 45), 7.0, 0, "percentile degenerate");
  expect_near(baselines::percentile_threshold({3.0, 1.0, 2.0}, 50), 2.0, 0, "percentile rank 2");

  // paraphrase validation
  std::string reason;
  c.expect(!paraphrase::validate_paraphrase("abc def", "abc def", {0.5, 2.0}, &reason) &&
               reason == "identical output",
           "identical paraphrase rejected");
  c.expect(paraphrase::validate_paraphrase("abc def", "def abc", {0.5, 2.0}, &reason),
           "rewording accepted");
  c.expect(!paraphrase::validate_paraphrase(std::string(100, 'x'), std::string(260, 'y'),
                                            {0.5, 2.0}, &reason) &&
               reason == "length ratio",
           "length ratio rejected");
  c.expect(paraphrase::build_paraphrase_prompt("S", paraphrase::ParaphraseConfig{}) ==
               "Paraphrase the following text, preserving its meaning. Output only the "
               "paraphrase. Text: S",
           "golden paraphrase prompt");

  // corpus: the derived truncation/split examples
  const text::WordTokenizer tok;
  const auto sentence = [](std::size_t tokens, const std::string& tag) {
    std::string s;
    for (std::size_t i = 0; i + 1 < tokens; ++i) {
      if (i > 0) s += ' ';
      s += tag + std::to_string(i);
    }
    return s + ".";
  };
  std::string four;
  for (int s = 0; s < 4; ++s) four += (s ? " " : "") + sentence(40, "s" + std::to_string(s));
  const auto truncated = corpus::truncate_text_to_budget(four, 150, tok);
  c.expect(truncated.has_value() && tok.count(*truncated) == 120,
           "four 40-token sentences truncate to 120 under budget 150");

  const auto tie = corpus::split_half(
      sentence(7, "a") + " " + sentence(6, "b") + " " + sentence(7, "c"), tok, 5);
  c.expect(tie.has_value() && tie->prefix_token_count == 7, "[7,6,7] tie prefers smaller prefix");
  const auto even = corpus::split_half(
      sentence(5, "a") + " " + sentence(5, "b") + " " + sentence(10, "c"), tok, 5);
  c.expect(even.has_value() && even->prefix_token_count == 10, "[5,5,10] exact half boundary");

  // harness arithmetic
  std::vector<harness::SetVerdict> verdicts;
  for (int i = 0; i < 100; ++i) verdicts.push_back({"m", true, true, 0, 0, 0, 0});
  for (int i = 0; i < 100; ++i) verdicts.push_back({"n", false, true, 0, 0, 0, 0});
  const auto all_member = harness::make_eval_result("x", verdicts);
  c.expect(approx(all_member.f1, 2.0 / 3.0, 1e-9) && all_member.recall == 1.0 &&
               all_member.precision == 0.5,
           "all-positive signature 0.667 (1.000/0.500)");
  c.expect(harness::mix_partial_membership(
                   harness::generate_synthetic([] {
                     harness::SyntheticSpec s;
                     s.n_member = 1;
                     s.n_non_member = 1;
                     s.n_aux = 1;
                     s.set_size = 500;
                     return s;
                   }())[0],
                   harness::generate_synthetic([] {
                     harness::SyntheticSpec s;
                     s.n_member = 1;
                     s.n_non_member = 1;
                     s.n_aux = 1;
                     s.set_size = 500;
                     s.seed = 1;
                     return s;
                   }())[1],
                   harness::MixSpec{0.4, 500}, 3)
                   .member_sample_count == 200,
           "r=0.4 of 500 mixes exactly 200 member samples");

  c.note("unit suites cover the remaining per-module examples and error paths");
  return c.ok;
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<bool(Check&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"c1", "z-test log-space agreement with the CDF oracle", criterion_1},
      {"c2", "exponential p-value decay (log-linear in n)", criterion_2},
      {"c3", "synthetic benchmark: SMI F1/precision >= 0.95", criterion_3},
      {"c4", "false-positive control under distribution shift", criterion_4},
      {"c5", "threshold trichotomy signatures", criterion_5},
      {"c6", "predicted-token-only variant equivalence", criterion_6},
      {"c7", "sample-size ablation", criterion_7},
      {"c8", "partial-membership mixing", criterion_8},
      {"c9", "determinism and resumability", criterion_9},
      {"c10", "spec example battery", criterion_10},
  };

  std::vector<const Criterion*> selected;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) {
      bool found = false;
      for (const auto& criterion : criteria) {
        if (criterion.id == argv[i]) {
          selected.push_back(&criterion);
          found = true;
        }
      }
      if (!found) {
        std::cerr << "unknown criterion " << argv[i] << "\n";
        return 2;
      }
    }
  } else {
    for (const auto& criterion : criteria) selected.push_back(&criterion);
  }

  bool all_ok = true;
  for (const auto* criterion : selected) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criterion->run(check);
    } catch (const std::exception& e) {
      check.log << "    exception: " << e.what() << "\n";
      ok = false;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << criterion->id << " " << criterion->title << " ("
              << seconds << "s)\n"
              << check.log.str();
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
