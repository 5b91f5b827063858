#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynaboard {

// Word lists for demographic substitution. Built only through the factories,
// which validate: name groups non-empty and pairwise disjoint, gendered name
// lists for "woman" and "man", paired terms duplicate-free.
class FairnessLexicon {
 public:
  using Groups = std::map<std::string, std::vector<std::string>>;
  using Pairs = std::vector<std::pair<std::string, std::string>>;

  static FairnessLexicon create(Groups name_groups, Groups gendered_names, Pairs paired_terms);
  // {"name_groups": {...}, "gendered_names": {...}, "paired_terms": [[w, m], ...]}
  static FairnessLexicon from_json(std::string_view text);
  static FairnessLexicon load(const std::filesystem::path& path);
  // Small curated lists shipped with the library.
  static const FairnessLexicon& bundled();

  const Groups& name_groups() const { return name_groups_; }
  const Groups& gendered_names() const { return gendered_names_; }
  const Pairs& paired_terms() const { return paired_terms_; }

  // Lookups are case-insensitive.
  std::optional<std::string> group_of(std::string_view name) const;
  std::optional<std::string> gender_of(std::string_view name) const;
  std::optional<std::string> paired_counterpart(std::string_view term) const;

 private:
  FairnessLexicon() = default;

  Groups name_groups_;
  Groups gendered_names_;
  Pairs paired_terms_;
  std::map<std::string, std::string> group_index_;
  std::map<std::string, std::string> gender_index_;
  std::map<std::string, std::string> pair_index_;
};

}  // namespace dynaboard
