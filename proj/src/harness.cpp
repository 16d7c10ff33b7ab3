#include "smi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "smi/baselines.hpp"
#include "smi/errors.hpp"
#include "smi/jsonl.hpp"
#include "smi/rng.hpp"

namespace smi::harness {

using nlohmann::json;

void SyntheticSpec::validate() const {
  if (n_member < 1 || n_non_member < 1 || n_aux < 1) {
    throw config_error("synthetic spec needs at least one set per role");
  }
  if (set_size < 4) throw config_error("set_size too small");
  if (base_sd <= 0.0 || shift_sd < 0.0) throw config_error("spreads must be positive");
  if (member_shift < non_member_shift) {
    throw config_error("member_shift must be >= non_member_shift for a well-posed benchmark");
  }
}

namespace {

SyntheticSet make_set(const std::string& name, corpus::SetRole role, bool is_member,
                      std::size_t n, double mean, double sd, double shift, double shift_sd,
                      std::uint64_t seed) {
  SyntheticSet set;
  set.name = name;
  set.role = role;
  set.is_member = is_member;
  set.member_sample_count = is_member ? n : 0;
  set.original.reserve(n);
  set.paraphrased.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double original = std::max(0.0, rng.normal(mean, sd));
    const double paraphrased = std::max(0.0, original + rng.normal(shift, shift_sd));
    set.original.push_back(original);
    set.paraphrased.push_back(paraphrased);
  }
  return set;
}

}  // namespace

std::vector<SyntheticSet> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<SyntheticSet> sets;
  sets.reserve(spec.n_member + spec.n_non_member + spec.n_aux);
  for (std::size_t i = 0; i < spec.n_member; ++i) {
    sets.push_back(make_set("member#" + std::to_string(i), corpus::SetRole::candidate, true,
                            spec.set_size, spec.base_mean + spec.candidate_mean_offset,
                            spec.base_sd, spec.member_shift, spec.shift_sd,
                            derive_seed(spec.seed, "synthetic:member", i)));
  }
  for (std::size_t i = 0; i < spec.n_non_member; ++i) {
    sets.push_back(make_set("non_member#" + std::to_string(i), corpus::SetRole::candidate,
                            false, spec.set_size, spec.base_mean + spec.candidate_mean_offset,
                            spec.base_sd, spec.non_member_shift, spec.shift_sd,
                            derive_seed(spec.seed, "synthetic:non_member", i)));
  }
  for (std::size_t i = 0; i < spec.n_aux; ++i) {
    sets.push_back(make_set("aux#" + std::to_string(i), corpus::SetRole::auxiliary, false,
                            spec.set_size, spec.base_mean, spec.base_sd, spec.non_member_shift,
                            spec.shift_sd, derive_seed(spec.seed, "synthetic:aux", i)));
  }
  return sets;
}

SyntheticSet mix_partial_membership(const SyntheticSet& member_pool,
                                    const SyntheticSet& non_member_pool, const MixSpec& spec,
                                    std::uint64_t seed) {
  if (!(spec.member_fraction >= 0.0 && spec.member_fraction <= 1.0)) {
    throw config_error("member_fraction must lie in [0, 1]");
  }
  const auto member_count = static_cast<std::size_t>(
      std::llround(spec.member_fraction * static_cast<double>(spec.set_size)));
  const std::size_t non_member_count = spec.set_size - member_count;
  if (member_pool.original.size() < member_count) {
    throw config_error("member pool too small for the requested mix");
  }
  if (non_member_pool.original.size() < non_member_count) {
    throw config_error("non-member pool too small for the requested mix");
  }

  SyntheticSet mixed;
  mixed.name = "mix_r" + format_double(spec.member_fraction);
  mixed.role = corpus::SetRole::candidate;
  mixed.is_member = member_count > 0;
  mixed.member_sample_count = member_count;

  Rng rng(seed);
  const auto pick = [&rng](const SyntheticSet& pool, std::size_t count) {
    std::vector<std::size_t> idx(pool.original.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_below(idx.size() - i)]);
    }
    idx.resize(count);
    return idx;
  };
  std::vector<std::pair<double, double>> samples;
  samples.reserve(spec.set_size);
  for (std::size_t i : pick(member_pool, member_count)) {
    samples.emplace_back(member_pool.original[i], member_pool.paraphrased[i]);
  }
  for (std::size_t i : pick(non_member_pool, non_member_count)) {
    samples.emplace_back(non_member_pool.original[i], non_member_pool.paraphrased[i]);
  }
  rng.shuffle(samples);
  for (const auto& [o, p] : samples) {
    mixed.original.push_back(o);
    mixed.paraphrased.push_back(p);
  }
  return mixed;
}

EvalResult make_eval_result(const std::string& method, std::vector<SetVerdict> per_set) {
  EvalResult r;
  r.method = method;
  for (const SetVerdict& v : per_set) {
    if (v.is_member && v.predicted_member) ++r.true_positives;
    if (!v.is_member && v.predicted_member) ++r.false_positives;
    if (v.is_member && !v.predicted_member) ++r.false_negatives;
    if (!v.is_member && !v.predicted_member) ++r.true_negatives;
  }
  const double tp = static_cast<double>(r.true_positives);
  if (r.true_positives + r.false_positives > 0) {
    r.precision = tp / static_cast<double>(r.true_positives + r.false_positives);
  }
  if (r.true_positives + r.false_negatives > 0) {
    r.recall = tp / static_cast<double>(r.true_positives + r.false_negatives);
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  r.per_set = std::move(per_set);
  return r;
}

namespace {

struct SplitSets {
  std::vector<const SyntheticSet*> candidates;
  std::vector<const SyntheticSet*> aux;
};

SplitSets split_roles(const std::vector<SyntheticSet>& sets) {
  SplitSets out;
  for (const SyntheticSet& s : sets) {
    if (s.role == corpus::SetRole::auxiliary) {
      out.aux.push_back(&s);
    } else {
      out.candidates.push_back(&s);
    }
  }
  if (out.candidates.empty()) throw config_error("no candidate sets to evaluate");
  if (out.aux.empty()) throw config_error("no auxiliary sets designated");
  return out;
}

inference::PValueSeries series_for(const SyntheticSet& set, const MethodConfig& cfg) {
  auto series = inference::p_value_series(set.original, set.paraphrased, cfg.smi.K,
                                          derive_seed(cfg.seed, "series:" + set.name), cfg.smi);
  series.set_name = set.name;
  return series;
}

EvalResult evaluate_smi(const SplitSets& split, const MethodConfig& cfg) {
  std::map<std::string, inference::PValueSeries> aux_series;
  std::vector<SetVerdict> verdicts;
  for (std::size_t i = 0; i < split.candidates.size(); ++i) {
    const SyntheticSet& candidate = *split.candidates[i];
    const SyntheticSet& aux = *split.aux[i % split.aux.size()];
    auto it = aux_series.find(aux.name);
    if (it == aux_series.end()) {
      it = aux_series.emplace(aux.name, series_for(aux, cfg)).first;
    }
    const auto candidate_series = series_for(candidate, cfg);
    const auto verdict = inference::smi_decide(candidate_series, it->second, cfg.smi);
    verdicts.push_back(SetVerdict{candidate.name, candidate.is_member,
                                  verdict.decision == inference::Decision::member, verdict.beta,
                                  verdict.beta_aux, verdict.log_p_K, verdict.log_p_K_aux});
  }
  return make_eval_result("smi", std::move(verdicts));
}

EvalResult evaluate_anll_dataset(const SplitSets& split, const MethodConfig& cfg) {
  std::vector<SetVerdict> verdicts;
  for (std::size_t i = 0; i < split.candidates.size(); ++i) {
    const SyntheticSet& candidate = *split.candidates[i];
    const SyntheticSet& aux = *split.aux[i % split.aux.size()];
    const double threshold = baselines::percentile_threshold(aux.original, cfg.percentile);
    std::vector<scoring::MetricValue> scores;
    scores.reserve(candidate.original.size());
    for (std::size_t s = 0; s < candidate.original.size(); ++s) {
      scores.push_back(
          scoring::MetricValue{std::to_string(s), "anll_suffix", candidate.original[s]});
    }
    const auto sample_verdicts = baselines::sample_level_classify(scores, threshold);
    const auto decision = baselines::dataset_level_vote(sample_verdicts);
    verdicts.push_back(SetVerdict{candidate.name, candidate.is_member,
                                  decision == inference::Decision::member, 0, 0, 0, 0});
  }
  return make_eval_result("anll_dataset", std::move(verdicts));
}

EvalResult evaluate_ddi(const SplitSets& split, const MethodConfig& cfg) {
  std::vector<SetVerdict> verdicts;
  for (std::size_t i = 0; i < split.candidates.size(); ++i) {
    const SyntheticSet& candidate = *split.candidates[i];
    const SyntheticSet& aux = *split.aux[i % split.aux.size()];
    const auto result = baselines::ddi_decide(candidate.original, aux.original, cfg.ddi_alpha,
                                              cfg.smi.asymptotic_switch);
    SetVerdict v;
    v.set_name = candidate.name;
    v.is_member = candidate.is_member;
    v.predicted_member = result.decision == inference::Decision::member;
    v.log_p = result.log_p;
    verdicts.push_back(std::move(v));
  }
  return make_eval_result("ddi", std::move(verdicts));
}

}  // namespace

std::vector<EvalResult> evaluate_methods(const std::vector<SyntheticSet>& sets,
                                         const std::vector<std::string>& methods,
                                         const MethodConfig& cfg) {
  const SplitSets split = split_roles(sets);
  std::vector<EvalResult> results;
  for (const std::string& method : methods) {
    if (method == "smi") {
      results.push_back(evaluate_smi(split, cfg));
    } else if (method == "anll_dataset") {
      results.push_back(evaluate_anll_dataset(split, cfg));
    } else if (method == "ddi") {
      results.push_back(evaluate_ddi(split, cfg));
    } else if (method == "mink_dataset" || method == "zlib_dataset") {
      throw config_error("method \"" + method +
                         "\" needs token-level scores; run it through the scoring pipeline "
                         "(smi baseline) instead of the synthetic harness");
    } else {
      throw config_error("unknown method \"" + method + "\"");
    }
  }
  return results;
}

std::vector<std::pair<std::size_t, EvalResult>> ablate_sample_size(
    const std::vector<SyntheticSet>& sets, const std::vector<std::size_t>& n_grid,
    const std::vector<std::string>& methods, const MethodConfig& cfg) {
  std::vector<std::pair<std::size_t, EvalResult>> out;
  for (const std::size_t n : n_grid) {
    std::vector<SyntheticSet> truncated;
    truncated.reserve(sets.size());
    for (const SyntheticSet& s : sets) {
      if (n > s.original.size()) {
        throw config_error("ablation size " + std::to_string(n) + " exceeds set size " +
                           std::to_string(s.original.size()));
      }
      SyntheticSet t = s;
      t.original.resize(n);
      t.paraphrased.resize(n);
      truncated.push_back(std::move(t));
    }
    for (auto& result : evaluate_methods(truncated, methods, cfg)) {
      out.emplace_back(n, std::move(result));
    }
  }
  return out;
}

std::vector<std::pair<std::pair<double, double>, EvalResult>> ablate_margins(
    const std::vector<SyntheticSet>& sets, const std::vector<std::pair<double, double>>& grid,
    const MethodConfig& cfg) {
  if (grid.empty()) throw config_error("margin grid is empty");
  const SplitSets split = split_roles(sets);

  // Series are pure functions of the data and K; compute once, re-decide per pair.
  std::map<std::string, inference::PValueSeries> aux_series;
  std::vector<inference::PValueSeries> candidate_series;
  std::vector<const inference::PValueSeries*> aux_for_candidate;
  for (std::size_t i = 0; i < split.candidates.size(); ++i) {
    const SyntheticSet& aux = *split.aux[i % split.aux.size()];
    auto it = aux_series.find(aux.name);
    if (it == aux_series.end()) {
      it = aux_series.emplace(aux.name, series_for(aux, cfg)).first;
    }
    candidate_series.push_back(series_for(*split.candidates[i], cfg));
    aux_for_candidate.push_back(&it->second);
  }

  std::vector<std::pair<std::pair<double, double>, EvalResult>> out;
  for (const auto& [eps1, eps2] : grid) {
    inference::SmiConfig margin_cfg = cfg.smi;
    margin_cfg.epsilon_1 = eps1;
    margin_cfg.epsilon_2 = eps2;
    std::vector<SetVerdict> verdicts;
    for (std::size_t i = 0; i < split.candidates.size(); ++i) {
      const auto verdict =
          inference::smi_decide(candidate_series[i], *aux_for_candidate[i], margin_cfg);
      verdicts.push_back(SetVerdict{split.candidates[i]->name, split.candidates[i]->is_member,
                                    verdict.decision == inference::Decision::member,
                                    verdict.beta, verdict.beta_aux, verdict.log_p_K,
                                    verdict.log_p_K_aux});
    }
    out.emplace_back(std::make_pair(eps1, eps2), make_eval_result("smi", std::move(verdicts)));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void emit_series_csv(const std::string& path, const std::vector<inference::PValueSeries>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  out << "n,log_p,set_name\n";
  for (const auto& s : series) {
    for (const auto& [n, log_p] : s.points) {
      out << n << ',' << format_double(log_p) << ',' << s.set_name << '\n';
    }
  }
}

void emit_histogram_csv(const std::string& path, const std::vector<SyntheticSet>& sets,
                        double bin_width) {
  if (sets.empty()) throw config_error("no sets to histogram");
  if (bin_width <= 0.0) throw config_error("bin width must be positive");
  double max_value = 0.0;
  for (const SyntheticSet& s : sets) {
    for (double v : s.original) max_value = std::max(max_value, v);
    for (double v : s.paraphrased) max_value = std::max(max_value, v);
  }
  const auto bins = static_cast<std::size_t>(std::floor(max_value / bin_width)) + 1;
  std::vector<std::size_t> original(bins, 0), paraphrased(bins, 0);
  for (const SyntheticSet& s : sets) {
    for (double v : s.original) ++original[static_cast<std::size_t>(v / bin_width)];
    for (double v : s.paraphrased) ++paraphrased[static_cast<std::size_t>(v / bin_width)];
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  out << "bin_lo,bin_hi,count_original,count_paraphrased\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out << format_double(static_cast<double>(b) * bin_width) << ','
        << format_double(static_cast<double>(b + 1) * bin_width) << ',' << original[b] << ','
        << paraphrased[b] << '\n';
  }
}

void emit_results_csv(const std::string& path,
                      const std::vector<std::tuple<std::string, double, EvalResult>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  out << "method,axis,axis_value,f1,recall,precision\n";
  for (const auto& [axis, value, result] : rows) {
    out << result.method << ',' << axis << ',' << format_double(value) << ','
        << format_double(result.f1) << ',' << format_double(result.recall) << ','
        << format_double(result.precision) << '\n';
  }
}

void write_synthetic_jsonl(const std::string& path, const std::vector<SyntheticSet>& sets) {
  jsonl::Writer out(path);
  for (const SyntheticSet& s : sets) {
    out.write(json{{"set_name", s.name},
                   {"role", s.role == corpus::SetRole::auxiliary ? "auxiliary" : "candidate"},
                   {"is_member", s.is_member},
                   {"member_sample_count", s.member_sample_count},
                   {"original", s.original},
                   {"paraphrased", s.paraphrased}});
  }
}

std::vector<SyntheticSet> read_synthetic_jsonl(const std::string& path) {
  std::vector<SyntheticSet> sets;
  jsonl::for_each_line(path, [&](const json& obj, std::size_t line_no) {
    SyntheticSet s;
    s.name = obj.at("set_name").get<std::string>();
    const std::string role = obj.at("role").get<std::string>();
    if (role == "auxiliary") {
      s.role = corpus::SetRole::auxiliary;
    } else if (role == "candidate") {
      s.role = corpus::SetRole::candidate;
    } else {
      throw schema_error(path + ":" + std::to_string(line_no) + ": unknown role \"" + role +
                         "\"");
    }
    s.is_member = obj.at("is_member").get<bool>();
    s.member_sample_count = obj.value("member_sample_count", std::size_t{0});
    s.original = obj.at("original").get<std::vector<double>>();
    s.paraphrased = obj.at("paraphrased").get<std::vector<double>>();
    if (s.original.size() != s.paraphrased.size()) {
      throw schema_error(path + ":" + std::to_string(line_no) + ": unpaired value lists");
    }
    for (const auto& values : {s.original, s.paraphrased}) {
      for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw schema_error(path + ":" + std::to_string(line_no) +
                             ": A-NLL values must be finite and non-negative");
        }
      }
    }
    sets.push_back(std::move(s));
  });
  return sets;
}

}  // namespace smi::harness
