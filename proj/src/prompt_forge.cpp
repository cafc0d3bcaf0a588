#include "negprobe/prompt_forge.hpp"

#include <cctype>
#include <random>

#include "negprobe/error.hpp"
#include "negprobe/text_util.hpp"

namespace negprobe {
namespace {

void require_nonempty(std::string_view value, std::string_view what) {
  if (trim(value).empty()) throw Error(std::string(what) + " must not be empty");
}

void require_valid(const WordTriple& t) {
  if (trim(t.w_abs).empty()) throw Error("invalid triple " + t.id + ": empty w_abs");
  if (trim(t.w_con).empty()) throw Error("invalid triple " + t.id + ": empty w_con");
  if (ascii_lower(trim(t.w_abs)) == ascii_lower(trim(t.w_con))) {
    throw Error("invalid triple " + t.id + ": abstract equals concrete");
  }
}

// Unbiased draw from [0, n) that is identical on every standard library.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::attack:
      return "attack";
    case TemplateId::defense_definition:
      return "defense_definition";
    case TemplateId::defense_substitution:
      return "defense_substitution";
  }
  return "unknown";
}

TemplateId template_from_string(std::string_view name) {
  for (auto id : kAllTemplates) {
    if (to_string(id) == name) return id;
  }
  throw Error("unknown template id: " + std::string(name));
}

std::string_view template_text(TemplateId id) {
  switch (id) {
    case TemplateId::attack:
      return "draw {w_abs} without {w_con}";
    case TemplateId::defense_definition:
      return "draw {w_abs}, which is {def}, without {w_con}";
    case TemplateId::defense_substitution:
      return "draw {w_abs}, include {w_con1}, instead of {w_con2}";
  }
  return "";
}

std::string render_pattern(std::string_view pattern, const Bindings& bindings) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      if (close == std::string_view::npos) throw Error("unclosed placeholder in template");
      std::string name(pattern.substr(i + 1, close - i - 1));
      auto it = bindings.find(name);
      if (it == bindings.end()) throw Error("unbound template variable: " + name);
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

std::string render(TemplateId id, const Bindings& bindings) {
  return render_pattern(template_text(id), bindings);
}

std::string inline_definition(std::string_view definition) {
  std::string d = trim(definition);
  while (!d.empty() && d.back() == '.') d.pop_back();
  d = trim(d);
  if (!d.empty()) d[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(d[0])));
  return d;
}

PromptCase attack_prompt(const WordTriple& triple) {
  require_valid(triple);
  PromptCase c;
  c.template_id = TemplateId::attack;
  c.bindings = {{"w_abs", trim(triple.w_abs)}, {"w_con", trim(triple.w_con)}};
  c.rendered = render(c.template_id, c.bindings);
  c.source_row_id = triple.id;
  return c;
}

PromptCase defense_definition_prompt(const WordTriple& triple, DefinitionStyle style) {
  require_valid(triple);
  if (trim(triple.w_abs_def).empty()) throw Error("definition required for row " + triple.id);
  std::string def =
      style == DefinitionStyle::raw ? trim(triple.w_abs_def) : inline_definition(triple.w_abs_def);
  if (def.empty()) throw Error("definition required for row " + triple.id);
  PromptCase c;
  c.template_id = TemplateId::defense_definition;
  c.bindings = {{"w_abs", trim(triple.w_abs)}, {"def", def}, {"w_con", trim(triple.w_con)}};
  c.rendered = render(c.template_id, c.bindings);
  c.source_row_id = triple.id;
  return c;
}

PromptCase defense_substitution_prompt(std::string_view w_abs, std::string_view w_con_include,
                                       std::string_view w_con_exclude, std::string source_row_id) {
  require_nonempty(w_abs, "w_abs");
  require_nonempty(w_con_include, "substitute word");
  require_nonempty(w_con_exclude, "excluded word");
  if (ascii_lower(trim(w_con_include)) == ascii_lower(trim(w_con_exclude))) {
    throw Error("substitute equals excluded word: " + trim(w_con_exclude));
  }
  PromptCase c;
  c.template_id = TemplateId::defense_substitution;
  c.bindings = {{"w_abs", trim(w_abs)},
                {"w_con1", trim(w_con_include)},
                {"w_con2", trim(w_con_exclude)}};
  c.rendered = render(c.template_id, c.bindings);
  c.source_row_id = std::move(source_row_id);
  return c;
}

std::vector<PromptCase> substitution_cases(const Dataset& dataset, std::uint64_t seed,
                                           const std::optional<std::string>& include) {
  std::mt19937_64 rng(seed);
  std::vector<PromptCase> cases;
  cases.reserve(dataset.triples.size());
  for (const auto& row : dataset.triples) {
    require_valid(row);
    if (include) {
      PromptCase c = defense_substitution_prompt(row.w_abs, *include, row.w_con, row.id);
      c.bindings["w_con1_source"] = "user";
      cases.push_back(std::move(c));
      continue;
    }
    std::vector<const WordTriple*> donors;
    for (const auto& other : dataset.triples) {
      if (ascii_lower(trim(other.w_con)) != ascii_lower(trim(row.w_con)) &&
          !trim(other.w_con).empty()) {
        donors.push_back(&other);
      }
    }
    if (donors.empty()) {
      throw Error("no substitute concrete word available for row " + row.id);
    }
    const WordTriple* donor = donors[draw_index(rng, donors.size())];
    PromptCase c = defense_substitution_prompt(row.w_abs, donor->w_con, row.w_con, row.id);
    c.bindings["w_con1_source"] = donor->id;
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string probe_phrase(PhraseKind kind, std::string_view w1, const std::optional<std::string>& w2,
                         const PhraseTemplates& templates) {
  require_nonempty(w1, "probe word");
  Bindings b{{"w1", trim(w1)}};
  switch (kind) {
    case PhraseKind::contrast:
      if (!w2 || trim(*w2).empty()) throw Error("contrast phrase requires a second word");
      b["w2"] = trim(*w2);
      return render_pattern(templates.contrast, b);
    case PhraseKind::negation:
      return render_pattern(templates.negation, b);
    case PhraseKind::double_negation:
      return render_pattern(templates.double_negation, b);
  }
  throw Error("unknown phrase kind");
}

nlohmann::json to_json(const PromptCase& c) {
  return {{"template_id", to_string(c.template_id)},
          {"bindings", c.bindings},
          {"rendered", c.rendered},
          {"source_row_id", c.source_row_id}};
}

PromptCase prompt_case_from_json(const nlohmann::json& j) {
  try {
    PromptCase c;
    c.template_id = template_from_string(j.at("template_id").get<std::string>());
    c.bindings = j.at("bindings").get<Bindings>();
    c.rendered = j.at("rendered").get<std::string>();
    c.source_row_id = j.value("source_row_id", "");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed prompt case: ") + e.what());
  }
}

}  // namespace negprobe
