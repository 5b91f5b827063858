#include "dynaboard/perturb.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

#include "dynaboard/error.hpp"
#include "dynaboard/text.hpp"

namespace dynaboard {

namespace {

struct NamedTransform {
  std::string_view name;
  RobustnessTransform transform;
};

constexpr NamedTransform kTransforms[] = {
    {"contraction", RobustnessTransform::kContraction},
    {"keyboard", RobustnessTransform::kKeyboard},
    {"ocr", RobustnessTransform::kOcr},
    {"punctuation", RobustnessTransform::kPunctuation},
    {"spelling_error", RobustnessTransform::kSpellingError},
    {"typos", RobustnessTransform::kTypos},
    {"word_case", RobustnessTransform::kWordCase},
};

bool overlaps(const Token& tok, const std::vector<EntitySpan>& spans) {
  const std::size_t end = tok.offset + tok.text.size();
  return std::any_of(spans.begin(), spans.end(), [&](const EntitySpan& s) {
    return tok.offset < s.end && s.begin < end;
  });
}

bool ends_sentence(const Token& tok) {
  return tok.text.find_first_of(".!?") != std::string::npos;
}

std::string pick_replacement_name(const FairnessLexicon& lexicon, FairnessKind kind,
                                  const std::string& current_class, SeededRng& rng) {
  const auto& groups = kind == FairnessKind::kRace ? lexicon.name_groups() : lexicon.gendered_names();
  std::vector<const std::vector<std::string>*> others;
  for (const auto& [id, names] : groups) {
    if (id != current_class) others.push_back(&names);
  }
  const auto& names = *others[rng.uniform(others.size())];
  return names[rng.uniform(names.size())];
}

}  // namespace

Perturbation parse_perturbation(std::string_view name) {
  if (name == "race") return FairnessKind::kRace;
  if (name == "gender") return FairnessKind::kGender;
  for (const auto& t : kTransforms) {
    if (t.name == name) return t.transform;
  }
  throw Error(Errc::kValidationError, "unknown perturbation '" + std::string(name) + "'",
              std::string(name));
}

std::string perturbation_name(const Perturbation& p) {
  if (const auto* kind = std::get_if<FairnessKind>(&p)) {
    return *kind == FairnessKind::kRace ? "race" : "gender";
  }
  const auto transform = std::get<RobustnessTransform>(p);
  for (const auto& t : kTransforms) {
    if (t.transform == transform) return std::string(t.name);
  }
  return "unknown";
}

std::string perturbation_kind_tag(const Perturbation& p) {
  if (std::holds_alternative<FairnessKind>(p)) return "fairness_" + perturbation_name(p);
  return "robustness:" + perturbation_name(p);
}

const std::vector<RobustnessTransform>& all_robustness_transforms() {
  static const std::vector<RobustnessTransform> all = [] {
    std::vector<RobustnessTransform> v;
    for (const auto& t : kTransforms) v.push_back(t.transform);
    return v;
  }();
  return all;
}

std::vector<EntitySpan> heuristic_entities(std::string_view text) {
  const auto tokens = tokenize(text);
  std::vector<EntitySpan> spans;
  bool sentence_start = true;
  std::optional<std::size_t> run_begin;
  std::size_t run_end = 0;
  std::size_t run_len = 0;
  auto close_run = [&] {
    if (run_begin && run_len >= 2) spans.push_back({*run_begin, run_end});
    run_begin.reset();
    run_len = 0;
  };
  for (const auto& tok : tokens) {
    if (!tok.is_word) {
      if (ends_sentence(tok)) sentence_start = true;
      if (tok.text != " ") close_run();
      continue;
    }
    const bool counts = is_capitalized(tok.text) && !sentence_start;
    sentence_start = false;
    if (!counts) {
      close_run();
      continue;
    }
    if (!run_begin) run_begin = tok.offset;
    run_end = tok.offset + tok.text.size();
    ++run_len;
  }
  close_run();
  return spans;
}

PerturbOutcome perturb_fairness(const GoldExample& example, const FairnessLexicon& lexicon,
                                FairnessKind kind, std::uint64_t seed,
                                const FairnessOptions& options) {
  const Perturbation as_variant = kind;
  PerturbedExample out{example.uid, example.input, example.gold, {}, perturbation_kind_tag(as_variant)};
  SeededRng rng(SeededRng::derive(seed, example.uid, out.kind));
  std::unordered_map<std::string, std::string> chosen;  // keeps repeated names consistent
  bool protected_hit = false;

  for (auto& [field, text] : out.input) {
    auto tokens = tokenize(text);
    std::optional<std::vector<EntitySpan>> entities;
    std::size_t word_index = 0;
    for (auto& tok : tokens) {
      if (!tok.is_word) continue;
      const std::size_t position = word_index++;
      std::optional<std::string> name_class;
      if (is_capitalized(tok.text)) {
        name_class = kind == FairnessKind::kRace ? lexicon.group_of(tok.text)
                                                 : lexicon.gender_of(tok.text);
      }
      std::string replacement;
      if (name_class) {
        if (!entities) entities = options.ner ? options.ner(text) : std::vector<EntitySpan>{};
        if (overlaps(tok, *entities)) {
          if (options.scope == NerScope::kExample) return SkipReason::kNerSkipped;
          protected_hit = true;
          continue;
        }
        const std::string key = to_lower(tok.text);
        auto it = chosen.find(key);
        if (it == chosen.end()) {
          it = chosen.emplace(key, pick_replacement_name(lexicon, kind, *name_class, rng)).first;
        }
        replacement = match_case(it->second, tok.text);
      } else if (kind == FairnessKind::kGender) {
        auto counterpart = lexicon.paired_counterpart(tok.text);
        if (!counterpart) continue;
        replacement = match_case(*counterpart, tok.text);
      } else {
        continue;
      }
      if (replacement == tok.text) continue;
      out.applied_edits.push_back({field, tok.text, replacement, position});
      tok.text = replacement;
    }
    text = join_tokens(tokens);
  }
  if (out.applied_edits.empty()) {
    return protected_hit ? SkipReason::kNerSkipped : SkipReason::kNotApplicable;
  }
  return out;
}

PerturbedDataset perturb_dataset(std::span<const GoldExample> dataset,
                                 std::span<const Perturbation> perturbations, std::uint64_t seed,
                                 const FairnessLexicon& lexicon, const FairnessOptions& options) {
  if (dataset.empty()) throw Error(Errc::kEmptyDataset, "nothing to perturb");
  if (perturbations.empty()) {
    throw Error(Errc::kValidationError, "no perturbation selected", "kind");
  }
  PerturbedDataset out;
  out.skips.total = dataset.size();
  for (const auto& example : dataset) {
    std::vector<std::size_t> order(perturbations.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SeededRng shuffle(SeededRng::derive(seed, example.uid, "order"));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform(i)]);
    }

    bool ner_skipped = false;
    bool done = false;
    for (const std::size_t idx : order) {
      const Perturbation& p = perturbations[idx];
      PerturbOutcome outcome =
          std::holds_alternative<FairnessKind>(p)
              ? perturb_fairness(example, lexicon, std::get<FairnessKind>(p), seed, options)
              : perturb_robustness(example, std::get<RobustnessTransform>(p), seed);
      if (auto* perturbed = std::get_if<PerturbedExample>(&outcome)) {
        out.examples.push_back(std::move(*perturbed));
        done = true;
        break;
      }
      if (std::get<SkipReason>(outcome) == SkipReason::kNerSkipped) ner_skipped = true;
    }
    if (done) {
      ++out.skips.perturbed;
    } else if (ner_skipped) {
      ++out.skips.ner_skipped;
    } else {
      ++out.skips.not_applicable;
    }
  }
  return out;
}

double unchanged_fraction(std::span<const Prediction> original,
                          std::span<const Prediction> perturbed) {
  if (original.empty() || perturbed.empty()) {
    throw Error(Errc::kEmptyDataset, "no predictions to compare");
  }
  if (original.size() != perturbed.size()) {
    throw Error(Errc::kUidMismatch, "prediction sets differ in size");
  }
  std::unordered_map<std::string, const Prediction*> by_uid;
  for (const auto& p : original) {
    if (!by_uid.emplace(p.uid, &p).second) {
      throw Error(Errc::kUidMismatch, "duplicate uid '" + p.uid + "'", p.uid);
    }
  }
  std::size_t unchanged = 0;
  for (const auto& p : perturbed) {
    auto it = by_uid.find(p.uid);
    if (it == by_uid.end()) {
      throw Error(Errc::kUidMismatch, "uid '" + p.uid + "' missing from original predictions",
                  p.uid);
    }
    if (it->second->value == p.value) ++unchanged;
    by_uid.erase(it);
  }
  return 100.0 * static_cast<double>(unchanged) / static_cast<double>(perturbed.size());
}

}  // namespace dynaboard
