#pragma once

// Worksheet store (one JSON file per worksheet, mutations serialized per
// worksheet) and the HTTP endpoints a client drives it through.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "namedcalc/worksheet.hpp"

namespace namedcalc {

inline std::string slugify(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "worksheet" : out;
}

inline bool valid_worksheet_id(const std::string& id) {
  if (id.empty() || id.size() > 100) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

/// Directory from NAMEDCALC_STORE, else ./worksheets.
inline std::filesystem::path default_store_dir() {
  if (const char* env = std::getenv("NAMEDCALC_STORE"); env && *env) return env;
  return "worksheets";
}

class WorksheetStore {
 public:
  explicit WorksheetStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& directory() const { return dir_; }

  /// Stores a new worksheet.  An empty or taken id is replaced by a fresh
  /// one derived from the title.
  Worksheet create(Worksheet w) {
    std::lock_guard<std::mutex> guard(index_mutex_);
    std::string base = w.id.empty() || !valid_worksheet_id(w.id) ? slugify(w.title) : w.id;
    std::string id = base;
    for (int k = 2; entries_.count(id) || std::filesystem::exists(file_of(id)); ++k) {
      id = base + "-" + std::to_string(k);
    }
    w.id = id;
    auto entry = std::make_shared<Entry>();
    entry->sheet = w;
    write_file(entry->sheet);
    entries_[id] = entry;
    return w;
  }

  Worksheet get(const std::string& id) {
    auto entry = find(id);
    std::lock_guard<std::mutex> guard(entry->mutex);
    return entry->sheet;
  }

  std::vector<SessionEvent> events(const std::string& id) {
    auto entry = find(id);
    std::lock_guard<std::mutex> guard(entry->mutex);
    return entry->events;
  }

  /// Applies `change` under the worksheet's lock and persists the result.
  /// The change may throw; then nothing is stored.
  std::pair<Worksheet, std::optional<SessionEvent>> mutate(
      const std::string& id, const std::function<std::optional<SessionEvent>(Worksheet&)>& change) {
    auto entry = find(id);
    std::lock_guard<std::mutex> guard(entry->mutex);
    Worksheet w = entry->sheet;
    std::optional<SessionEvent> event = change(w);
    if (w.revision < entry->sheet.revision) fail(ErrorCode::RevisionConflict, "revision went backwards");
    if (!(w == entry->sheet)) write_file(w);
    entry->sheet = w;
    if (event) {
      entry->events.push_back(*event);
      append_event(id, *event);
    }
    return {w, event};
  }

 private:
  struct Entry {
    std::mutex mutex;
    Worksheet sheet;
    std::vector<SessionEvent> events;
  };

  std::filesystem::path file_of(const std::string& id) const { return dir_ / (id + ".json"); }

  std::shared_ptr<Entry> find(const std::string& id) {
    std::lock_guard<std::mutex> guard(index_mutex_);
    if (auto it = entries_.find(id); it != entries_.end()) return it->second;
    if (!valid_worksheet_id(id) || !std::filesystem::exists(file_of(id))) {
      fail(ErrorCode::NotFound, "no worksheet '" + id + "'");
    }
    std::ifstream in(file_of(id));
    std::stringstream text;
    text << in.rdbuf();
    auto entry = std::make_shared<Entry>();
    entry->sheet = load_text(text.str());
    entries_[id] = entry;
    return entry;
  }

  // write-then-rename so readers of the file never see half a document
  void write_file(const Worksheet& w) const {
    auto tmp = file_of(w.id);
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << save_text(w);
    }
    std::filesystem::rename(tmp, file_of(w.id));
  }

  void append_event(const std::string& id, const SessionEvent& e) const {
    std::ofstream out(dir_ / (id + ".events.jsonl"), std::ios::app);
    out << e.to_json().dump() << "\n";
  }

  std::filesystem::path dir_;
  std::mutex index_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

// ----------------------------------------------------------------- HTTP

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::NotEditable: return 403;
    case ErrorCode::RevisionConflict: return 409;
    default: return 400;
  }
}

/// Routes:
///   POST /worksheets                   {source, title, problem, id?} or a saved document
///   GET  /worksheets/{id}
///   POST /worksheets/{id}/cells/{cid}  {content, revision?}
///   POST /worksheets/{id}/run
///   POST /worksheets/{id}/symbolize    {cell, letter, revision?}
///   POST /worksheets/{id}/reset        {cell?, revision?}
///   GET  /worksheets/{id}/events
class WorksheetServer {
 public:
  explicit WorksheetServer(WorksheetStore& store) : store_(store) { install(); }

  httplib::Server& http() { return http_; }

  bool listen(const std::string& host, int port) { return http_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return http_.bind_to_any_port(host); }
  bool listen_after_bind() { return http_.listen_after_bind(); }
  void stop() { http_.stop(); }

 private:
  using Handler = std::function<Json(const httplib::Request&)>;

  // an error raised while acting on one cell, reported with that cell's id
  struct CellError {
    Error error;
    std::string cell;
  };

  template <class F>
  static auto on_cell(const std::string& cell, F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      throw CellError{e, cell};
    }
  }

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void route(const char* method, const std::string& pattern, Handler h) {
    auto wrapped = [h](const httplib::Request& req, httplib::Response& res) {
      try {
        Json body = h(req);
        int status = 200;
        if (body.contains("__status")) {
          status = body["__status"].get<int>();
          body.erase("__status");
        }
        reply(res, status, body);
      } catch (const CellError& e) {
        reply(res, http_status(e.error.code()), error_json(e.error, e.cell));
      } catch (const Error& e) {
        reply(res, http_status(e.code()), error_json(e));
      } catch (const std::exception& e) {
        reply(res, 500, Json{{"step", nullptr}, {"cell", nullptr}, {"code", "Internal"}, {"message", e.what()}});
      }
    };
    if (std::string(method) == "GET") {
      http_.Get(pattern, wrapped);
    } else {
      http_.Post(pattern, wrapped);
    }
  }

  static Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
      Json j = Json::parse(req.body);
      if (!j.is_object()) fail(ErrorCode::ParseError, "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
  }

  static std::string text_field(const Json& j, const char* key, bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
      return "";
    }
    if (!j.at(key).is_string()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
    return j.at(key).get<std::string>();
  }

  static void check_revision(const Json& body, const Worksheet& w) {
    if (!body.contains("revision")) return;
    if (!body.at("revision").is_number_integer() || body.at("revision").get<long>() != w.revision) {
      fail(ErrorCode::RevisionConflict, "worksheet is at revision " + std::to_string(w.revision));
    }
  }

  static Json envelope(const std::pair<Worksheet, std::optional<SessionEvent>>& r) {
    return Json{{"worksheet", save(r.first)}, {"event", r.second ? r.second->to_json() : Json(nullptr)}};
  }

  void install() {
    route("POST", "/worksheets", [this](const httplib::Request& req) {
      Json body = body_of(req);
      Worksheet w;
      if (body.contains("version")) {
        w = load(body);
      } else {
        std::string source = text_field(body, "source");
        StepProgram p;
        try {
          p = parse(source);
        } catch (const Error& e) {
          throw Error(ErrorCode::ParseError, e.describe()).at_position(e.line(), e.column());
        }
        w = worksheet_from_program(p, text_field(body, "title", false), text_field(body, "problem", false),
                                   text_field(body, "id", false));
      }
      Json doc = save(store_.create(w));
      doc["__status"] = 201;
      return doc;
    });
    route("GET", R"(/worksheets/([A-Za-z0-9_-]+))",
          [this](const httplib::Request& req) { return save(store_.get(req.matches[1])); });
    route("GET", R"(/worksheets/([A-Za-z0-9_-]+)/events)", [this](const httplib::Request& req) {
      Json out = Json::array();
      for (const auto& e : store_.events(req.matches[1])) out.push_back(e.to_json());
      return out;
    });
    route("POST", R"(/worksheets/([A-Za-z0-9_-]+)/cells/([A-Za-z0-9_]+))", [this](const httplib::Request& req) {
      Json body = body_of(req);
      std::string content = text_field(body, "content");
      std::string cell = req.matches[2];
      return envelope(store_.mutate(req.matches[1], [&](Worksheet& w) {
        check_revision(body, w);
        return on_cell(cell, [&] { return set_cell(w, cell, content); });
      }));
    });
    route("POST", R"(/worksheets/([A-Za-z0-9_-]+)/run)", [this](const httplib::Request& req) {
      Json body = body_of(req);
      return envelope(store_.mutate(req.matches[1], [&](Worksheet& w) -> std::optional<SessionEvent> {
        check_revision(body, w);
        return run(w);
      }));
    });
    route("POST", R"(/worksheets/([A-Za-z0-9_-]+)/symbolize)", [this](const httplib::Request& req) {
      Json body = body_of(req);
      std::string cell = text_field(body, "cell");
      std::string letter = text_field(body, "letter", false);
      return envelope(store_.mutate(req.matches[1], [&](Worksheet& w) {
        check_revision(body, w);
        return on_cell(cell, [&] { return symbolize(w, cell, letter.empty() ? cell : letter); });
      }));
    });
    route("POST", R"(/worksheets/([A-Za-z0-9_-]+)/reset)", [this](const httplib::Request& req) {
      Json body = body_of(req);
      std::string cell = text_field(body, "cell", false);
      return envelope(store_.mutate(req.matches[1], [&](Worksheet& w) {
        check_revision(body, w);
        return on_cell(cell, [&] { return reset(w, cell); });
      }));
    });
  }

  WorksheetStore& store_;
  httplib::Server http_;
};

}  // namespace namedcalc
