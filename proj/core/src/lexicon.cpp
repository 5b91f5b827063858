#include "dynaboard/lexicon.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dynaboard/error.hpp"
#include "dynaboard/text.hpp"

namespace dynaboard {

namespace detail {
extern const std::string_view kBundledLexiconJson;
}

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(Errc::kValidationError, "lexicon: " + message, "lexicon");
}

}  // namespace

FairnessLexicon FairnessLexicon::create(Groups name_groups, Groups gendered_names,
                                        Pairs paired_terms) {
  FairnessLexicon lex;
  if (name_groups.size() < 2) invalid("at least two name groups are required");
  for (const auto& [group, names] : name_groups) {
    if (names.empty()) invalid("name group '" + group + "' is empty");
    for (const auto& name : names) {
      if (!lex.group_index_.emplace(to_lower(name), group).second) {
        invalid("name '" + name + "' appears in more than one group");
      }
    }
  }
  for (const auto& [gender, names] : gendered_names) {
    if (gender != "woman" && gender != "man") {
      invalid("gendered_names keys must be 'woman' or 'man', got '" + gender + "'");
    }
    if (names.empty()) invalid("gendered name list '" + gender + "' is empty");
    for (const auto& name : names) {
      if (!lex.gender_index_.emplace(to_lower(name), gender).second) {
        invalid("name '" + name + "' is listed under both genders or twice");
      }
    }
  }
  if (!gendered_names.empty() && gendered_names.size() != 2) {
    invalid("gendered_names needs both 'woman' and 'man'");
  }
  for (const auto& [woman, man] : paired_terms) {
    const auto w = to_lower(woman);
    const auto m = to_lower(man);
    if (w == m) invalid("paired term '" + woman + "' maps to itself");
    if (!lex.pair_index_.emplace(w, m).second || !lex.pair_index_.emplace(m, w).second) {
      invalid("paired term '" + woman + "'/'" + man + "' duplicates another pair");
    }
  }
  lex.name_groups_ = std::move(name_groups);
  lex.gendered_names_ = std::move(gendered_names);
  lex.paired_terms_ = std::move(paired_terms);
  return lex;
}

FairnessLexicon FairnessLexicon::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    Groups groups = doc.at("name_groups").get<Groups>();
    Groups gendered = doc.value("gendered_names", Groups{});
    Pairs pairs;
    for (const auto& pair : doc.value("paired_terms", nlohmann::json::array())) {
      if (!pair.is_array() || pair.size() != 2) invalid("paired_terms entries must be [woman, man]");
      pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    return create(std::move(groups), std::move(gendered), std::move(pairs));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, std::string("lexicon: ") + e.what(), "lexicon");
  }
}

FairnessLexicon FairnessLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot read lexicon " + path.string(), path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const FairnessLexicon& FairnessLexicon::bundled() {
  static const FairnessLexicon lex = from_json(detail::kBundledLexiconJson);
  return lex;
}

std::optional<std::string> FairnessLexicon::group_of(std::string_view name) const {
  auto it = group_index_.find(to_lower(name));
  if (it == group_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> FairnessLexicon::gender_of(std::string_view name) const {
  auto it = gender_index_.find(to_lower(name));
  if (it == gender_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> FairnessLexicon::paired_counterpart(std::string_view term) const {
  auto it = pair_index_.find(to_lower(term));
  if (it == pair_index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace dynaboard
