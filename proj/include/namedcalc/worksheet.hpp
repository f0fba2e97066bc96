#pragma once

// Worksheets: the editable document a learner works in.  A worksheet is a
// step program laid out as cells.  The engine does all arithmetic; this
// layer only rebuilds the program from the cells and copies results back.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "namedcalc/error.hpp"
#include "namedcalc/evaluate.hpp"
#include "namedcalc/program.hpp"

namespace namedcalc {

using Json = nlohmann::ordered_json;

enum class CellKind { Data, Helpful, Step, Answer };

inline std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::Data: return "data";
    case CellKind::Helpful: return "helpful";
    case CellKind::Step: return "step";
    case CellKind::Answer: return "answer";
  }
  return "";
}

inline CellKind cell_kind_from(const std::string& s) {
  if (s == "data") return CellKind::Data;
  if (s == "helpful") return CellKind::Helpful;
  if (s == "step") return CellKind::Step;
  if (s == "answer") return CellKind::Answer;
  fail(ErrorCode::ParseError, "unknown cell kind '" + s + "'");
}

struct Cell {
  std::string id;
  CellKind kind = CellKind::Data;
  std::string name;     // program variable
  std::string label;    // question text or declaration note
  std::string content;  // value literal, letter, or expression source
  std::string initial;  // content as first loaded (data/helpful)
  std::optional<std::string> computed;
  bool editable = false;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Worksheet {
  static constexpr int kVersion = 1;

  std::string id;
  std::string title;
  std::string problem;
  long revision = 0;
  std::vector<std::string> units;  // `unit cherry`, `rate 1 m == 100 cm`
  std::vector<Cell> cells;
  std::vector<std::string> conditions;  // sign conditions of the last symbolic run

  const Cell* find(const std::string& cell_id) const {
    for (const auto& c : cells) {
      if (c.id == cell_id) return &c;
    }
    return nullptr;
  }
  Cell* find(const std::string& cell_id) {
    return const_cast<Cell*>(static_cast<const Worksheet&>(*this).find(cell_id));
  }

  friend bool operator==(const Worksheet&, const Worksheet&) = default;
};

enum class EventKind { CellEdited, RunCompleted, Symbolized, Reset, Error };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::CellEdited: return "cell_edited";
    case EventKind::RunCompleted: return "run_completed";
    case EventKind::Symbolized: return "symbolized";
    case EventKind::Reset: return "reset";
    case EventKind::Error: return "error";
  }
  return "";
}

struct SessionEvent {
  EventKind kind;
  Json payload;
  long revision;

  Json to_json() const { return Json{{"kind", to_string(kind)}, {"revision", revision}, {"payload", payload}}; }
};

/// Wire form of an evaluation error.
inline Json error_json(const Error& e, const std::string& cell = "") {
  Json j;
  j["step"] = e.step().empty() ? Json(nullptr) : Json(e.step());
  j["cell"] = cell.empty() ? Json(nullptr) : Json(cell);
  j["code"] = to_string(e.code());
  j["message"] = e.what();
  if (e.line() > 0) {
    j["line"] = e.line();
    j["column"] = e.column();
  }
  return j;
}

// ----------------------------------------------------------- construction

inline Worksheet worksheet_from_program(const StepProgram& p, const std::string& title,
                                        const std::string& problem, const std::string& id = "") {
  Worksheet w;
  w.id = id;
  w.title = title;
  w.problem = problem;
  w.units = p.unit_decls();
  for (const auto& st : p.statements()) {
    if (const auto* d = std::get_if<Declaration>(&st.node)) {
      Cell c;
      c.id = d->name;
      c.kind = d->role == Role::Datum ? CellKind::Data : CellKind::Helpful;
      c.name = d->name;
      c.label = st.comment;
      c.content = format_value(d->value);
      c.initial = c.content;
      c.editable = true;
      w.cells.push_back(c);
    } else if (const auto* s = std::get_if<Step>(&st.node)) {
      Cell c;
      c.id = s->name;
      c.kind = CellKind::Step;
      c.name = s->name;
      c.label = s->question.value_or(st.comment);
      c.content = format_expr(*s->expr);
      w.cells.push_back(c);
    }
  }
  Cell answer;
  answer.id = "answer";
  while (w.find(answer.id)) answer.id += "_";
  answer.kind = CellKind::Answer;
  answer.name = p.target();
  answer.content = p.target();
  w.cells.push_back(answer);
  return w;
}

/// Step-program source equivalent to the worksheet's cells.
inline std::string worksheet_source(const Worksheet& w) {
  std::string src;
  for (const auto& u : w.units) src += u + "\n";
  std::string target;
  for (const auto& c : w.cells) {
    std::string note = c.label.empty() ? "" : "  % " + c.label;
    switch (c.kind) {
      case CellKind::Data:
      case CellKind::Helpful:
        src += std::string(to_string(c.kind)) + " " + c.name + " = " + c.content + note + "\n";
        break;
      case CellKind::Step:
        if (!c.label.empty()) src += "? " + c.label + "\n";
        src += c.name + " := " + c.content + "\n";
        break;
      case CellKind::Answer:
        target = c.content;
        break;
    }
  }
  if (!target.empty()) src += "return " + target + "\n";
  return src;
}

inline StepProgram worksheet_program(const Worksheet& w) { return parse(worksheet_source(w)); }

// -------------------------------------------------------------- mutation

namespace detail {

inline void invalidate(Worksheet& w) {
  for (auto& c : w.cells) c.computed.reset();
  w.conditions.clear();
}

inline Cell& editable_cell(Worksheet& w, const std::string& cell_id) {
  Cell* c = w.find(cell_id);
  if (!c) fail(ErrorCode::NotFound, "no cell '" + cell_id + "'");
  if (!c->editable) fail(ErrorCode::NotEditable, "cell '" + cell_id + "' is computed by the program");
  return *c;
}

inline DeclValue parse_cell_value(const Worksheet& w, const std::string& text) {
  UnitRegistry reg = worksheet_program(w).registry();
  try {
    return parse_value(text, reg);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("cannot read '") + text + "': " + e.what());
  }
}

inline std::optional<SessionEvent> replace_content(Worksheet& w, Cell& c, const std::string& content,
                                                   EventKind kind) {
  if (content == c.content) return std::nullopt;
  c.content = content;
  invalidate(w);
  ++w.revision;
  return SessionEvent{kind, Json{{"cell", c.id}, {"content", content}}, w.revision};
}

}  // namespace detail

/// Replaces a data/helpful cell's content.  A bare letter keeps the cell's
/// unit, so entering `A` in a `24 min` cell means `A min`.
inline std::optional<SessionEvent> set_cell(Worksheet& w, const std::string& cell_id, const std::string& text) {
  Cell& c = detail::editable_cell(w, cell_id);
  DeclValue v = detail::parse_cell_value(w, text);
  if (auto* s = std::get_if<SymbolValue>(&v); s && s->unit.empty()) {
    s->unit = unit_of(detail::parse_cell_value(w, c.content));
  }
  return detail::replace_content(w, c, format_value(v), EventKind::CellEdited);
}

/// Substitutes a letter for a datum, keeping its unit.
inline std::optional<SessionEvent> symbolize(Worksheet& w, const std::string& cell_id, const std::string& letter) {
  Cell& c = detail::editable_cell(w, cell_id);
  if (!is_identifier(letter) || is_keyword(letter)) fail(ErrorCode::ParseError, "'" + letter + "' is not a letter");
  UnitExpr unit = unit_of(detail::parse_cell_value(w, c.content));
  return detail::replace_content(w, c, format_value(SymbolValue{letter, unit}), EventKind::Symbolized);
}

/// Restores one cell (or every data/helpful cell) to its first content.
inline std::optional<SessionEvent> reset(Worksheet& w, const std::string& cell_id = "") {
  bool changed = false;
  for (auto& c : w.cells) {
    if (!c.editable || (!cell_id.empty() && c.id != cell_id)) continue;
    if (c.content != c.initial) {
      c.content = c.initial;
      changed = true;
    }
  }
  if (!cell_id.empty()) detail::editable_cell(w, cell_id);
  if (!changed) return std::nullopt;
  detail::invalidate(w);
  ++w.revision;
  return SessionEvent{EventKind::Reset, Json{{"cell", cell_id.empty() ? Json(nullptr) : Json(cell_id)}},
                      w.revision};
}

inline bool has_letters(const StepProgram& p) {
  return std::any_of(p.decls().begin(), p.decls().end(), [](const Declaration& d) { return is_symbolic(d.value); });
}

/// Evaluates the worksheet: by name when any cell holds a letter, otherwise
/// by value.  The revision moves only when computed values change, so a
/// repeated run is a no-op.
inline SessionEvent run(Worksheet& w) {
  Worksheet next = w;
  detail::invalidate(next);
  Json payload;
  EventKind kind = EventKind::RunCompleted;
  try {
    StepProgram p = worksheet_program(w);
    if (has_letters(p)) {
      SymbolicResult r = eval_by_name(p, {});
      for (auto& c : next.cells) {
        if (c.kind == CellKind::Step || c.kind == CellKind::Answer) c.computed = render(r.values.at(c.name));
      }
      for (const auto& cond : r.conditions) next.conditions.push_back(cond.render());
      payload["mode"] = "by_name";
      payload["eliminated"] = Json(std::vector<std::string>(r.eliminated.begin(), r.eliminated.end()));
    } else {
      Trace t = eval_by_value(p);
      for (auto& c : next.cells) {
        if (c.kind == CellKind::Step || c.kind == CellKind::Answer) c.computed = render(t.values.at(c.name));
      }
      payload["mode"] = "by_value";
    }
    for (const auto& c : next.cells) {
      if (c.kind == CellKind::Answer) payload["answer"] = *c.computed;
    }
  } catch (const Error& e) {
    kind = EventKind::Error;
    payload = error_json(e, e.step().empty() ? "" : e.step());
  }
  if (next.cells != w.cells || next.conditions != w.conditions) {
    ++next.revision;
    w = std::move(next);
  }
  return SessionEvent{kind, payload, w.revision};
}

// ---------------------------------------------------------- persistence

inline Json to_json(const Cell& c) {
  Json j;
  j["id"] = c.id;
  j["kind"] = to_string(c.kind);
  j["name"] = c.name;
  j["label"] = c.label;
  j["content"] = c.content;
  j["initial"] = c.initial;
  j["computed"] = c.computed ? Json(*c.computed) : Json(nullptr);
  j["editable"] = c.editable;
  return j;
}

inline Json save(const Worksheet& w) {
  Json j;
  j["version"] = Worksheet::kVersion;
  j["id"] = w.id;
  j["title"] = w.title;
  j["problem"] = w.problem;
  j["revision"] = w.revision;
  j["units"] = w.units;
  j["cells"] = Json::array();
  for (const auto& c : w.cells) j["cells"].push_back(to_json(c));
  j["conditions"] = w.conditions;
  return j;
}

inline std::string save_text(const Worksheet& w) { return save(w).dump(2) + "\n"; }

namespace detail {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::ParseError, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Inverse of save.  The document must name schema version 1, have unique
/// cell ids and exactly one answer cell, and its cells must form a valid
/// program.
inline Worksheet load(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "a worksheet document is a JSON object");
  if (detail::field<long>(j, "version") != Worksheet::kVersion) {
    fail(ErrorCode::SchemaVersionMismatch, "unsupported worksheet version " + j.at("version").dump());
  }
  Worksheet w;
  w.id = detail::field<std::string>(j, "id");
  w.title = detail::field<std::string>(j, "title");
  w.problem = detail::field<std::string>(j, "problem");
  w.revision = detail::field<long>(j, "revision");
  w.units = detail::field<std::vector<std::string>>(j, "units");
  w.conditions = detail::field<std::vector<std::string>>(j, "conditions");
  if (!j.contains("cells")) fail(ErrorCode::ParseError, "missing field 'cells'");
  const Json& cells = j.at("cells");
  if (!cells.is_array()) fail(ErrorCode::ParseError, "field 'cells' has the wrong type");
  std::set<std::string> ids;
  int answers = 0;
  for (const auto& cj : cells) {
    Cell c;
    c.id = detail::field<std::string>(cj, "id");
    c.kind = cell_kind_from(detail::field<std::string>(cj, "kind"));
    c.name = detail::field<std::string>(cj, "name");
    c.label = detail::field<std::string>(cj, "label");
    c.content = detail::field<std::string>(cj, "content");
    c.initial = detail::field<std::string>(cj, "initial");
    if (!cj.contains("computed")) fail(ErrorCode::ParseError, "missing field 'computed'");
    if (!cj.at("computed").is_null()) c.computed = detail::field<std::string>(cj, "computed");
    c.editable = detail::field<bool>(cj, "editable");
    if (!ids.insert(c.id).second) fail(ErrorCode::ParseError, "duplicate cell id '" + c.id + "'");
    if (c.kind == CellKind::Answer) ++answers;
    bool should_edit = c.kind == CellKind::Data || c.kind == CellKind::Helpful;
    if (c.editable != should_edit) fail(ErrorCode::ParseError, "cell '" + c.id + "' has the wrong editable flag");
    w.cells.push_back(c);
  }
  if (answers != 1) fail(ErrorCode::ParseError, "a worksheet has exactly one answer cell");
  try {
    worksheet_program(w);
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("cells do not form a program: ") + e.what());
  }
  return w;
}

inline Worksheet load_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  return load(j);
}

}  // namespace namedcalc
