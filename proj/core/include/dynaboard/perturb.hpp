#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dynaboard/lexicon.hpp"
#include "dynaboard/metrics.hpp"

namespace dynaboard {

enum class FairnessKind { kRace, kGender };

enum class RobustnessTransform {
  kContraction,
  kKeyboard,
  kOcr,
  kPunctuation,
  kSpellingError,
  kTypos,
  kWordCase,
};

using Perturbation = std::variant<FairnessKind, RobustnessTransform>;

// "race", "gender", "contraction", "keyboard", "ocr", "punctuation",
// "spelling_error", "typos", "word_case". Throws kValidationError.
Perturbation parse_perturbation(std::string_view name);
std::string perturbation_name(const Perturbation& p);
// Kind tag stored on perturbed examples: "fairness_race", "robustness:typos".
std::string perturbation_kind_tag(const Perturbation& p);
const std::vector<RobustnessTransform>& all_robustness_transforms();

struct AppliedEdit {
  std::string field;
  std::string original;
  std::string replacement;
  std::size_t position = 0;  // word index within the field

  friend bool operator==(const AppliedEdit&, const AppliedEdit&) = default;
};

struct PerturbedExample {
  std::string uid;
  std::map<std::string, std::string> input;
  std::vector<std::string> gold;  // copied verbatim from the source
  std::vector<AppliedEdit> applied_edits;
  std::string kind;

  friend bool operator==(const PerturbedExample&, const PerturbedExample&) = default;
};

enum class SkipReason { kNotApplicable, kNerSkipped };

using PerturbOutcome = std::variant<PerturbedExample, SkipReason>;

// Byte range [begin, end) of a named entity that must not be perturbed.
struct EntitySpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

using NerHook = std::function<std::vector<EntitySpan>(std::string_view text)>;

// Runs of two or more capitalized words ("Red Robin"). A capital that only
// marks the start of a sentence does not count.
std::vector<EntitySpan> heuristic_entities(std::string_view text);

enum class NerScope {
  kSpan,     // leave protected names alone, perturb the rest
  kExample,  // skip the whole example when any name is protected
};

struct FairnessOptions {
  NerHook ner = heuristic_entities;
  NerScope scope = NerScope::kSpan;
};

PerturbOutcome perturb_fairness(const GoldExample& example, const FairnessLexicon& lexicon,
                                FairnessKind kind, std::uint64_t seed,
                                const FairnessOptions& options = {});

// Share of words a robustness transform may touch (at least one word).
inline constexpr double kEditBudget = 0.15;
// Minimum length of words eligible for keyboard and typo edits.
inline constexpr std::size_t kMinEditableWordLength = 4;

PerturbOutcome perturb_robustness(const GoldExample& example, RobustnessTransform transform,
                                  std::uint64_t seed);

// Building blocks of the robustness transforms, exposed for testing.
enum class TypoOp { kSwapAdjacent, kDelete, kDuplicate };
std::string apply_typo(std::string_view word, TypoOp op, std::size_t position);
std::string_view keyboard_neighbors(char c);
const std::map<std::string, std::string>& contraction_table();
const std::map<std::string, std::string>& misspelling_table();

struct SkipReport {
  std::size_t total = 0;
  std::size_t perturbed = 0;
  std::size_t not_applicable = 0;
  std::size_t ner_skipped = 0;

  friend bool operator==(const SkipReport&, const SkipReport&) = default;
};

struct PerturbedDataset {
  std::vector<PerturbedExample> examples;
  SkipReport skips;
};

// One perturbed copy per example: the perturbations are tried in a seeded
// order and the first that applies wins. Examples no perturbation applies to
// are only counted. Throws kEmptyDataset.
PerturbedDataset perturb_dataset(std::span<const GoldExample> dataset,
                                 std::span<const Perturbation> perturbations, std::uint64_t seed,
                                 const FairnessLexicon& lexicon = FairnessLexicon::bundled(),
                                 const FairnessOptions& options = {});

// Percent of uids whose prediction is identical in both sets.
// Throws kEmptyDataset, kUidMismatch.
double unchanged_fraction(std::span<const Prediction> original,
                          std::span<const Prediction> perturbed);

}  // namespace dynaboard
