#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smi/baselines.hpp"
#include "smi/corpus.hpp"
#include "smi/harness.hpp"
#include "smi/inference.hpp"
#include "smi/manifest.hpp"
#include "smi/paraphrase.hpp"
#include "smi/scoring.hpp"
#include "smi/text.hpp"

namespace py = pybind11;
using namespace smi;

namespace {

std::vector<scoring::TokenScore> scores_from_logprobs(const std::vector<double>& logprobs) {
  std::vector<scoring::TokenScore> scores;
  scores.reserve(logprobs.size());
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    scores.push_back(scoring::TokenScore{"", logprobs[i], i + 1, false});
  }
  return scores;
}

inference::SmiConfig config_from_kwargs(int K, double eps1, double eps2, double asymptotic_switch,
                                        bool paired) {
  inference::SmiConfig cfg;
  cfg.K = K;
  cfg.epsilon_1 = eps1;
  cfg.epsilon_2 = eps2;
  cfg.asymptotic_switch = asymptotic_switch;
  cfg.paired = paired;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-comparison membership inference core";
  m.attr("__version__") = kToolVersion;

  py::class_<inference::ZTestResult>(m, "ZTestResult")
      .def_readonly("z", &inference::ZTestResult::z)
      .def_readonly("log_p", &inference::ZTestResult::log_p)
      .def_property_readonly("method", [](const inference::ZTestResult& r) {
        return r.method == inference::TailMethod::asymptotic ? "asymptotic" : "exact_cdf";
      });

  py::class_<inference::PValueSeries>(m, "PValueSeries")
      .def_readonly("K", &inference::PValueSeries::K)
      .def_readonly("points", &inference::PValueSeries::points)
      .def_readwrite("set_name", &inference::PValueSeries::set_name);

  py::class_<inference::SlopeFit>(m, "SlopeFit")
      .def_readonly("beta", &inference::SlopeFit::beta)
      .def_readonly("intercept", &inference::SlopeFit::intercept)
      .def_readonly("r_squared", &inference::SlopeFit::r_squared);

  py::class_<inference::Verdict>(m, "Verdict")
      .def_readonly("set_name", &inference::Verdict::set_name)
      .def_property_readonly("decision",
                             [](const inference::Verdict& v) {
                               return v.decision == inference::Decision::member ? "member"
                                                                                : "non_member";
                             })
      .def_readonly("beta", &inference::Verdict::beta)
      .def_readonly("beta_aux", &inference::Verdict::beta_aux)
      .def_readonly("log_p_K", &inference::Verdict::log_p_K)
      .def_readonly("log_p_K_aux", &inference::Verdict::log_p_K_aux)
      .def_readonly("slope_met", &inference::Verdict::slope_met)
      .def_readonly("pvalue_met", &inference::Verdict::pvalue_met);

  py::class_<inference::LinearityCheck>(m, "LinearityCheck")
      .def_readonly("fitted_slope", &inference::LinearityCheck::fitted_slope)
      .def_readonly("r_squared", &inference::LinearityCheck::r_squared);

  m.def(
      "a_nll", [](const std::vector<double>& logprobs) { return scoring::a_nll(scores_from_logprobs(logprobs)); },
      py::arg("logprobs"), "Average negative log-likelihood of per-token logprobs (nats).");
  m.def(
      "suffix_a_nll",
      [](const std::vector<double>& logprobs, std::size_t split_index) {
        return scoring::suffix_a_nll(scores_from_logprobs(logprobs), split_index);
      },
      py::arg("logprobs"), py::arg("split_index"),
      "A-NLL over positions >= split_index (1-based).");
  m.def(
      "min_k_score",
      [](const std::vector<double>& logprobs, double k_percent) {
        return scoring::min_k_score(scores_from_logprobs(logprobs), k_percent);
      },
      py::arg("logprobs"), py::arg("k_percent") = 20.0);
  m.def(
      "zlib_ratio",
      [](const std::vector<double>& logprobs, const std::string& text) {
        return scoring::zlib_ratio(scores_from_logprobs(logprobs), text);
      },
      py::arg("logprobs"), py::arg("text"));

  m.def(
      "z_test_one_tailed",
      [](const std::vector<double>& original, const std::vector<double>& paraphrased,
         double asymptotic_switch) {
        return inference::z_test_one_tailed(inference::ScoreSet::from_values(original),
                                            inference::ScoreSet::from_values(paraphrased),
                                            asymptotic_switch);
      },
      py::arg("original"), py::arg("paraphrased"), py::arg("asymptotic_switch") = 8.0);
  m.def("z_test_paired", &inference::z_test_paired, py::arg("original"), py::arg("paraphrased"),
        py::arg("asymptotic_switch") = 8.0);

  m.def(
      "p_value_series",
      [](const std::vector<double>& original, const std::vector<double>& paraphrased, int K,
         std::uint64_t order_seed, bool paired, double asymptotic_switch) {
        return inference::p_value_series(original, paraphrased, K, order_seed,
                                         config_from_kwargs(K, 0.01, 10.0, asymptotic_switch,
                                                            paired));
      },
      py::arg("original"), py::arg("paraphrased"), py::arg("K") = 10,
      py::arg("order_seed") = 0, py::arg("paired") = false, py::arg("asymptotic_switch") = 8.0);

  m.def("slope_fit", &inference::slope_fit, py::arg("series"));
  m.def("linearity_check", &inference::linearity_check, py::arg("series"));

  m.def(
      "smi_decide",
      [](const inference::PValueSeries& candidate, const inference::PValueSeries& aux, int K,
         double eps1, double eps2, double asymptotic_switch, bool paired) {
        return inference::smi_decide(candidate, aux,
                                     config_from_kwargs(K, eps1, eps2, asymptotic_switch, paired));
      },
      py::arg("candidate_series"), py::arg("aux_series"), py::arg("K") = 10,
      py::arg("eps1") = 0.01, py::arg("eps2") = 10.0, py::arg("asymptotic_switch") = 8.0,
      py::arg("paired") = false);

  m.def("percentile_threshold", &baselines::percentile_threshold, py::arg("aux_scores"),
        py::arg("percentile") = 45.0);
  m.def(
      "dataset_level_vote",
      [](const std::vector<double>& scores, double threshold) {
        std::vector<scoring::MetricValue> values;
        values.reserve(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
          values.push_back(scoring::MetricValue{std::to_string(i), "anll_suffix", scores[i]});
        }
        const auto verdicts = baselines::sample_level_classify(values, threshold);
        return py::make_tuple(
            baselines::dataset_level_vote(verdicts) == inference::Decision::member,
            verdicts.positive_fraction());
      },
      py::arg("scores"), py::arg("threshold"),
      "Returns (is_member, positive_fraction) for the sample-vote baseline.");
  m.def(
      "ddi_decide",
      [](const std::vector<double>& candidate, const std::vector<double>& aux, double alpha) {
        const auto result = baselines::ddi_decide(candidate, aux, alpha);
        return py::make_tuple(result.decision == inference::Decision::member, result.log_p,
                              result.z);
      },
      py::arg("candidate_scores"), py::arg("aux_scores"), py::arg("alpha") = 0.01,
      "Returns (is_member, log_p_two_sided, z).");

  m.def("segment_sentences",
        [](const std::string& s) { return text::segment_sentences(s); });
  m.def(
      "tokenize",
      [](const std::string& s) { return text::WordTokenizer{}.tokenize(s); },
      "Preparation tokenizer (word-plus-punctuation, whitespace-preserving).");
  m.def(
      "truncate_to_budget",
      [](const std::string& s, std::size_t budget) -> py::object {
        const auto out = corpus::truncate_text_to_budget(s, budget, text::WordTokenizer{});
        if (!out) return py::none();
        return py::str(*out);
      },
      py::arg("text"), py::arg("budget") = 150);
  m.def(
      "split_half",
      [](const std::string& s, std::size_t min_suffix_tokens) -> py::object {
        std::string reason;
        const auto split = corpus::split_half(s, text::WordTokenizer{}, min_suffix_tokens, &reason);
        if (!split) return py::make_tuple(py::none(), reason);
        py::dict d;
        d["prefix_text"] = split->prefix_text;
        d["suffix_text"] = split->suffix_text;
        d["split_index"] = split->split_index;
        d["prefix_token_count"] = split->prefix_token_count;
        d["suffix_token_count"] = split->suffix_token_count;
        return py::make_tuple(d, "");
      },
      py::arg("text"), py::arg("min_suffix_tokens") = 10);

  m.def("validate_paraphrase",
        [](const std::string& original, const std::string& candidate, double low, double high) {
          std::string reason;
          const bool ok = paraphrase::validate_paraphrase(original, candidate, {low, high}, &reason);
          return py::make_tuple(ok, reason);
        },
        py::arg("original"), py::arg("candidate"), py::arg("ratio_low") = 0.5,
        py::arg("ratio_high") = 2.0);
  m.def("build_paraphrase_prompt", [](const std::string& suffix) {
    return paraphrase::build_paraphrase_prompt(suffix, paraphrase::ParaphraseConfig{});
  });

  py::class_<harness::SyntheticSet>(m, "SyntheticSet")
      .def_readonly("name", &harness::SyntheticSet::name)
      .def_readonly("is_member", &harness::SyntheticSet::is_member)
      .def_property_readonly("is_aux",
                             [](const harness::SyntheticSet& s) {
                               return s.role == corpus::SetRole::auxiliary;
                             })
      .def_readonly("original", &harness::SyntheticSet::original)
      .def_readonly("paraphrased", &harness::SyntheticSet::paraphrased);

  py::class_<harness::EvalResult>(m, "EvalResult")
      .def_readonly("method", &harness::EvalResult::method)
      .def_readonly("f1", &harness::EvalResult::f1)
      .def_readonly("recall", &harness::EvalResult::recall)
      .def_readonly("precision", &harness::EvalResult::precision);

  m.def(
      "generate_synthetic",
      [](std::size_t n_member, std::size_t n_non_member, std::size_t n_aux, std::size_t set_size,
         double base_mean, double base_sd, double member_shift, double non_member_shift,
         double shift_sd, double candidate_mean_offset, std::uint64_t seed) {
        harness::SyntheticSpec spec;
        spec.n_member = n_member;
        spec.n_non_member = n_non_member;
        spec.n_aux = n_aux;
        spec.set_size = set_size;
        spec.base_mean = base_mean;
        spec.base_sd = base_sd;
        spec.member_shift = member_shift;
        spec.non_member_shift = non_member_shift;
        spec.shift_sd = shift_sd;
        spec.candidate_mean_offset = candidate_mean_offset;
        spec.seed = seed;
        return harness::generate_synthetic(spec);
      },
      py::arg("n_member") = 100, py::arg("n_non_member") = 100, py::arg("n_aux") = 100,
      py::arg("set_size") = 500, py::arg("base_mean") = 3.0, py::arg("base_sd") = 1.0,
      py::arg("member_shift") = 0.3, py::arg("non_member_shift") = 0.0,
      py::arg("shift_sd") = 0.25, py::arg("candidate_mean_offset") = 0.0, py::arg("seed") = 0);

  m.def(
      "evaluate_methods",
      [](const std::vector<harness::SyntheticSet>& sets, const std::vector<std::string>& methods,
         int K, double eps1, double eps2, bool paired, std::uint64_t seed) {
        harness::MethodConfig cfg;
        cfg.smi = config_from_kwargs(K, eps1, eps2, 8.0, paired);
        cfg.seed = seed;
        return harness::evaluate_methods(sets, methods, cfg);
      },
      py::arg("sets"), py::arg("methods"), py::arg("K") = 10, py::arg("eps1") = 0.01,
      py::arg("eps2") = 10.0, py::arg("paired") = true, py::arg("seed") = 0);
}
