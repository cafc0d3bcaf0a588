#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negprobe/dataset.hpp"

namespace negprobe {

enum class TemplateId { attack, defense_definition, defense_substitution };

inline constexpr TemplateId kAllTemplates[] = {TemplateId::attack, TemplateId::defense_definition,
                                               TemplateId::defense_substitution};

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);  // throws Error on unknown name

// Placeholder form of each template, e.g. "draw {w_abs} without {w_con}".
std::string_view template_text(TemplateId id);

using Bindings = std::map<std::string, std::string>;

struct PromptCase {
  TemplateId template_id = TemplateId::attack;
  Bindings bindings;
  std::string rendered;
  std::string source_row_id;

  bool operator==(const PromptCase&) const = default;
};

// Single-pass substitution of {name} placeholders. Throws Error when a
// placeholder has no binding. Bindings not used by the pattern are ignored.
std::string render_pattern(std::string_view pattern, const Bindings& bindings);
std::string render(TemplateId id, const Bindings& bindings);

enum class DefinitionStyle {
  inline_clause,  // trailing period stripped, first letter lowercased
  raw,
};

std::string inline_definition(std::string_view definition);

PromptCase attack_prompt(const WordTriple& triple);
PromptCase defense_definition_prompt(const WordTriple& triple,
                                     DefinitionStyle style = DefinitionStyle::inline_clause);
PromptCase defense_substitution_prompt(std::string_view w_abs, std::string_view w_con_include,
                                       std::string_view w_con_exclude,
                                       std::string source_row_id = {});

// Substitution cases for every row. The included word is `include` when given,
// otherwise the concrete word of a different row drawn with a seeded generator;
// the donor row id is kept in the "w_con1_source" binding.
std::vector<PromptCase> substitution_cases(const Dataset& dataset, std::uint64_t seed,
                                           const std::optional<std::string>& include = {});

enum class PhraseKind { contrast, negation, double_negation };

struct PhraseTemplates {
  std::string contrast = "{w1} not {w2}";
  std::string negation = "not {w1}";
  std::string double_negation = "not not {w1}";
};

std::string probe_phrase(PhraseKind kind, std::string_view w1,
                         const std::optional<std::string>& w2 = {},
                         const PhraseTemplates& templates = {});

nlohmann::json to_json(const PromptCase& c);
PromptCase prompt_case_from_json(const nlohmann::json& j);

}  // namespace negprobe
