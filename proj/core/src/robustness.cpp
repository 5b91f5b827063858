#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>

#include "dynaboard/error.hpp"
#include "dynaboard/perturb.hpp"
#include "dynaboard/text.hpp"

namespace dynaboard {

namespace {

struct FieldTokens {
  std::string field;
  std::vector<Token> tokens;
  std::vector<std::size_t> words;  // token indices of the words, in order
};

struct WordSlot {
  std::size_t field = 0;  // index into the FieldTokens vector
  std::size_t word = 0;   // word index within the field
};

std::vector<FieldTokens> split_fields(const std::map<std::string, std::string>& input) {
  std::vector<FieldTokens> out;
  for (const auto& [field, text] : input) {
    FieldTokens ft{field, tokenize(text), {}};
    for (std::size_t i = 0; i < ft.tokens.size(); ++i) {
      if (ft.tokens[i].is_word) ft.words.push_back(i);
    }
    out.push_back(std::move(ft));
  }
  return out;
}

std::size_t edit_budget(std::size_t total_words) {
  const auto share = static_cast<std::size_t>(
      std::floor(kEditBudget * static_cast<double>(total_words)));
  return std::max<std::size_t>(1, share);
}

bool has_alpha(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

struct OcrCandidate {
  std::size_t pos;
  std::size_t len;
  std::string_view replacement;
};

std::vector<OcrCandidate> ocr_candidates(std::string_view w) {
  static constexpr std::array<std::pair<char, std::string_view>, 8> kSingle = {{
      {'O', "0"}, {'0', "O"}, {'l', "1"}, {'1', "l"},
      {'S', "5"}, {'5', "S"}, {'B', "8"}, {'8', "B"},
  }};
  std::vector<OcrCandidate> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.compare(i, 2, "rn") == 0) {
      out.push_back({i, 2, "m"});
      continue;
    }
    if (w[i] == 'm') {
      out.push_back({i, 1, "rn"});
      continue;
    }
    for (const auto& [from, to] : kSingle) {
      if (w[i] == from) out.push_back({i, 1, to});
    }
  }
  return out;
}

// Word-level transforms: eligibility test and a seeded edit.
bool eligible(RobustnessTransform t, std::string_view w) {
  switch (t) {
    case RobustnessTransform::kKeyboard:
    case RobustnessTransform::kTypos:
      return is_ascii(w) && w.size() >= kMinEditableWordLength && has_alpha(w);
    case RobustnessTransform::kOcr:
      return is_ascii(w) && !ocr_candidates(w).empty();
    case RobustnessTransform::kSpellingError:
      return misspelling_table().count(to_lower(w)) != 0;
    case RobustnessTransform::kWordCase:
      return is_ascii(w) && has_alpha(w);
    default:
      return false;
  }
}

std::string edit_word(RobustnessTransform t, const std::string& w, SeededRng& rng) {
  switch (t) {
    case RobustnessTransform::kKeyboard: {
      std::vector<std::size_t> letters;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!keyboard_neighbors(w[i]).empty()) letters.push_back(i);
      }
      const std::size_t pos = letters[rng.uniform(letters.size())];
      const auto neighbors = keyboard_neighbors(w[pos]);
      char replacement = neighbors[rng.uniform(neighbors.size())];
      if (std::isupper(static_cast<unsigned char>(w[pos]))) {
        replacement = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement)));
      }
      std::string out = w;
      out[pos] = replacement;
      return out;
    }
    case RobustnessTransform::kOcr: {
      const auto candidates = ocr_candidates(w);
      const auto& c = candidates[rng.uniform(candidates.size())];
      std::string out = w;
      out.replace(c.pos, c.len, c.replacement);
      return out;
    }
    case RobustnessTransform::kSpellingError:
      return match_case(misspelling_table().at(to_lower(w)), w);
    case RobustnessTransform::kTypos: {
      auto op = static_cast<TypoOp>(rng.uniform(3));
      if (op == TypoOp::kSwapAdjacent) {
        std::vector<std::size_t> swappable;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
          if (w[i] != w[i + 1]) swappable.push_back(i);
        }
        if (swappable.empty()) return apply_typo(w, TypoOp::kDelete, rng.uniform(w.size()));
        return apply_typo(w, op, swappable[rng.uniform(swappable.size())]);
      }
      return apply_typo(w, op, rng.uniform(w.size()));
    }
    case RobustnessTransform::kWordCase: {
      const bool any_lower = std::any_of(w.begin(), w.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c));
      });
      return any_lower ? to_upper(w) : to_lower(w);
    }
    default:
      return w;
  }
}

PerturbOutcome finish(PerturbedExample out, std::vector<FieldTokens>& fields) {
  if (out.applied_edits.empty()) return SkipReason::kNotApplicable;
  for (auto& ft : fields) out.input[ft.field] = join_tokens(ft.tokens);
  std::sort(out.applied_edits.begin(), out.applied_edits.end(),
            [](const AppliedEdit& a, const AppliedEdit& b) {
              return std::tie(a.field, a.position) < std::tie(b.field, b.position);
            });
  return out;
}

PerturbOutcome word_level(PerturbedExample out, std::vector<FieldTokens>& fields,
                          RobustnessTransform t, SeededRng& rng) {
  std::size_t total_words = 0;
  std::vector<WordSlot> candidates;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    total_words += fields[f].words.size();
    for (std::size_t w = 0; w < fields[f].words.size(); ++w) {
      if (eligible(t, fields[f].tokens[fields[f].words[w]].text)) candidates.push_back({f, w});
    }
  }
  if (candidates.empty()) return SkipReason::kNotApplicable;
  for (const std::size_t pick : rng.sample(candidates.size(), edit_budget(total_words))) {
    const auto& slot = candidates[pick];
    auto& ft = fields[slot.field];
    Token& tok = ft.tokens[ft.words[slot.word]];
    std::string replacement = edit_word(t, tok.text, rng);
    if (replacement == tok.text) continue;
    out.applied_edits.push_back({ft.field, tok.text, replacement, slot.word});
    tok.text = std::move(replacement);
  }
  return finish(std::move(out), fields);
}

struct ContractionCandidate {
  std::size_t field;
  std::size_t first_word;
  std::size_t word_count;
  std::string original;
  std::string replacement;
};

const std::map<std::string, std::string>& expansion_table() {
  static const auto table = [] {
    std::map<std::string, std::string> reversed;
    for (const auto& [expanded, contracted] : contraction_table()) {
      reversed.emplace(contracted, expanded);
    }
    return reversed;
  }();
  return table;
}

PerturbOutcome contraction(PerturbedExample out, std::vector<FieldTokens>& fields,
                           SeededRng& rng) {
  std::size_t total_words = 0;
  std::vector<ContractionCandidate> candidates;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto& ft = fields[f];
    total_words += ft.words.size();
    for (std::size_t w = 0; w < ft.words.size(); ++w) {
      const std::string& word = ft.tokens[ft.words[w]].text;
      const std::string lower = to_lower(word);
      if (w + 1 < ft.words.size() && ft.words[w + 1] == ft.words[w] + 2 &&
          ft.tokens[ft.words[w] + 1].text == " ") {
        const std::string& next = ft.tokens[ft.words[w + 1]].text;
        auto it = contraction_table().find(lower + " " + to_lower(next));
        if (it != contraction_table().end()) {
          candidates.push_back({f, w, 2, word + " " + next, match_case(it->second, word)});
          ++w;
          continue;
        }
      }
      if (auto it = contraction_table().find(lower); it != contraction_table().end()) {
        candidates.push_back({f, w, 1, word, match_case(it->second, word)});
      } else if (auto rit = expansion_table().find(lower); rit != expansion_table().end()) {
        candidates.push_back({f, w, 1, word, match_case(rit->second, word)});
      }
    }
  }
  if (candidates.empty()) return SkipReason::kNotApplicable;
  const auto picks = rng.sample(candidates.size(), edit_budget(total_words));
  // Apply right to left so earlier token indices stay valid.
  for (auto it = picks.rbegin(); it != picks.rend(); ++it) {
    const auto& c = candidates[*it];
    auto& ft = fields[c.field];
    const std::size_t first = ft.words[c.first_word];
    const std::size_t last = ft.words[c.first_word + c.word_count - 1];
    ft.tokens[first].text = c.replacement;
    ft.tokens.erase(ft.tokens.begin() + static_cast<std::ptrdiff_t>(first) + 1,
                    ft.tokens.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    out.applied_edits.push_back({ft.field, c.original, c.replacement, c.first_word});
  }
  return finish(std::move(out), fields);
}

PerturbOutcome punctuation(PerturbedExample out, std::vector<FieldTokens>& fields,
                           SeededRng& rng) {
  std::vector<std::size_t> with_words;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (!fields[f].words.empty()) with_words.push_back(f);
  }
  if (with_words.empty()) return SkipReason::kNotApplicable;
  auto& ft = fields[with_words[rng.uniform(with_words.size())]];
  std::string text = join_tokens(ft.tokens);
  std::size_t end = text.find_last_not_of(" \t\r\n");
  const std::size_t position = ft.words.size();
  if (end != std::string::npos && std::string_view(".!?").find(text[end]) != std::string_view::npos) {
    out.applied_edits.push_back({ft.field, std::string(1, text[end]), "", position});
    text.erase(end, 1);
  } else {
    static constexpr std::string_view kMarks = ".!?";
    const std::string mark(1, kMarks[rng.uniform(kMarks.size())]);
    const std::size_t insert_at = end == std::string::npos ? text.size() : end + 1;
    text.insert(insert_at, mark);
    out.applied_edits.push_back({ft.field, "", mark, position});
  }
  ft.tokens = tokenize(text);
  return finish(std::move(out), fields);
}

}  // namespace

std::string apply_typo(std::string_view word, TypoOp op, std::size_t position) {
  std::string out(word);
  if (position >= out.size()) return out;
  switch (op) {
    case TypoOp::kSwapAdjacent:
      if (position + 1 < out.size()) std::swap(out[position], out[position + 1]);
      break;
    case TypoOp::kDelete:
      out.erase(position, 1);
      break;
    case TypoOp::kDuplicate:
      out.insert(position, 1, out[position]);
      break;
  }
  return out;
}

std::string_view keyboard_neighbors(char c) {
  static constexpr std::array<std::string_view, 26> kQwerty = {
      "qwsz",  "vghn",  "xdfv",   "erfscx", "wrsd",  "rtgdvc", "tyhfbv", "yujgnb", "uojk",
      "uikhmn", "iojlm", "opk",   "njk",    "bhjm",  "ipkl",   "ol",     "wa",     "etdf",
      "weadzx", "ryfg", "yihj",  "cfgb",   "qeas",  "zsdc",   "tugh",   "asx"};
  const auto lower = static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower < 'a' || lower > 'z') return {};
  return kQwerty[lower - 'a'];
}

const std::map<std::string, std::string>& contraction_table() {
  static const std::map<std::string, std::string> table = {
      {"are not", "aren't"},   {"can not", "can't"},      {"cannot", "can't"},
      {"could not", "couldn't"}, {"did not", "didn't"},   {"do not", "don't"},
      {"does not", "doesn't"}, {"had not", "hadn't"},     {"has not", "hasn't"},
      {"have not", "haven't"}, {"i am", "i'm"},           {"is not", "isn't"},
      {"it is", "it's"},       {"let us", "let's"},       {"should not", "shouldn't"},
      {"that is", "that's"},   {"there is", "there's"},   {"they are", "they're"},
      {"was not", "wasn't"},   {"we are", "we're"},       {"were not", "weren't"},
      {"what is", "what's"},   {"will not", "won't"},     {"would not", "wouldn't"},
      {"you are", "you're"},
  };
  return table;
}

const std::map<std::string, std::string>& misspelling_table() {
  static const std::map<std::string, std::string> table = {
      {"absolutely", "absolutly"}, {"accommodate", "accomodate"}, {"achieve", "acheive"},
      {"across", "accross"},       {"address", "adress"},         {"amazing", "amazng"},
      {"because", "becuase"},      {"beginning", "begining"},     {"believe", "beleive"},
      {"business", "buisness"},    {"calendar", "calender"},      {"definitely", "definately"},
      {"different", "diffrent"},   {"disappoint", "dissapoint"},  {"embarrass", "embarass"},
      {"environment", "enviroment"}, {"especially", "especialy"}, {"experience", "experiance"},
      {"friend", "freind"},        {"government", "goverment"},   {"immediately", "immediatly"},
      {"necessary", "neccessary"}, {"occasion", "ocassion"},      {"occurred", "occured"},
      {"people", "poeple"},        {"probably", "probaly"},       {"really", "realy"},
      {"receive", "recieve"},      {"recommend", "reccommend"},   {"restaurant", "restaraunt"},
      {"separate", "seperate"},    {"service", "servise"},        {"should", "shoud"},
      {"successful", "succesful"}, {"terrible", "terible"},       {"their", "thier"},
      {"through", "throught"},     {"tomorrow", "tommorow"},      {"until", "untill"},
      {"weird", "wierd"},          {"which", "wich"},             {"would", "woud"},
  };
  return table;
}

PerturbOutcome perturb_robustness(const GoldExample& example, RobustnessTransform transform,
                                  std::uint64_t seed) {
  const Perturbation as_variant = transform;
  PerturbedExample out{example.uid, example.input, example.gold, {}, perturbation_kind_tag(as_variant)};
  SeededRng rng(SeededRng::derive(seed, example.uid, out.kind));
  auto fields = split_fields(example.input);
  switch (transform) {
    case RobustnessTransform::kContraction:
      return contraction(std::move(out), fields, rng);
    case RobustnessTransform::kPunctuation:
      return punctuation(std::move(out), fields, rng);
    default:
      return word_level(std::move(out), fields, transform, rng);
  }
}

}  // namespace dynaboard
