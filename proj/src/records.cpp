#include "rq/records.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace rq {

Json make_record(const std::string& command, std::uint64_t seed,
                 const Json& config, const Json& payload) {
  Json r;
  r["schema"] = kSchemaVersion;
  r["tool"] = kToolVersion;
  r["command"] = command;
  r["seed"] = seed;
  r["config"] = config;
  r["payload"] = payload;
  return r;
}

void write_jsonl(std::ostream& out, const Json& record) {
  out << record.dump() << "\n";
}

Json make_meta(double wall_seconds) {
  Json m;
  m["meta"] = Json{{"wall_seconds", wall_seconds}};
  return m;
}

namespace {

const Json* lookup(const Json& record, const std::string& axis) {
  const Json* cur = &record;
  std::size_t pos = 0;
  while (pos <= axis.size()) {
    const std::size_t dot = axis.find('.', pos);
    const std::string key = axis.substr(pos, dot == std::string::npos
                                                 ? std::string::npos
                                                 : dot - pos);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) return cur;
    pos = dot + 1;
  }
  return nullptr;
}

std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();  // shortest round-trip for numbers
}

}  // namespace

std::string emit_plot_data(const std::vector<Json>& records,
                           const std::vector<std::string>& axes) {
  if (axes.empty()) throw input_error("emit_plot_data: no axes");
  std::ostringstream out;
  for (std::size_t i = 0; i < axes.size(); ++i)
    out << (i ? "," : "") << axes[i];
  out << "\n";
  for (const Json& r : records) {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const Json* v = lookup(r, axes[i]);
      if (!v)
        throw input_error("emit_plot_data: axis `" + axes[i] +
                          "` absent from record schema");
      out << (i ? "," : "") << cell_text(*v);
    }
    out << "\n";
  }
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::map<std::pair<int, double>, std::pair<int, int>> cells;  // collapsed/total
  for (const auto& r : records) {
    if (r.verdict == "skipped") continue;
    auto& cell = cells[{r.ell, r.d}];
    ++cell.second;
    if (r.verdict == "trivial" || r.verdict == "z2") ++cell.first;
  }
  std::ostringstream out;
  out << "ell,d,fraction_collapsed,n_trials\n";
  for (const auto& [key, cell] : cells) {
    const double frac =
        cell.second ? static_cast<double>(cell.first) / cell.second : 0.0;
    out << key.first << "," << Json(key.second).dump() << "," << Json(frac).dump()
        << "," << cell.second << "\n";
  }
  return out.str();
}

Json sweep_record_json(const SweepRecord& r) {
  Json j;
  j["ell"] = r.ell;
  j["d"] = r.d;
  j["trial"] = r.trial;
  j["measure"] = r.measure;
  j["group"] = r.group;
  j["verdict"] = r.verdict;
  if (!r.skip_reason.empty()) j["skip_reason"] = r.skip_reason;
  j["n_words"] = r.n_words;
  j["collisions"] = r.collisions;
  j["scan_hits"] = r.scan_hits;
  if (r.birthday_expect >= 0) j["birthday_expect"] = r.birthday_expect;
  return j;
}

namespace {

Json parse_toml_scalar(const std::string& raw) {
  std::string s = raw;
  const auto strip = [](std::string& t) {
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front())))
      t.erase(t.begin());
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back())))
      t.pop_back();
  };
  strip(s);
  if (s.empty()) throw input_error("config: empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw input_error("config: unterminated string");
    return s.substr(1, s.size() - 2);
  }
  if (s == "true") return true;
  if (s == "false") return false;
  try {
    if (s.find_first_of(".eE") == std::string::npos) {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used == s.size()) return v;
    } else {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw input_error("config: cannot parse value `" + s + "`");
}

Json parse_toml_subset(std::istream& in) {
  Json out = Json::object();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
      trimmed.erase(trimmed.begin());
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw input_error("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trimmed.substr(0, eq);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
      key.pop_back();
    std::string value = trimmed.substr(eq + 1);
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front())))
      value.erase(value.begin());
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back())))
      value.pop_back();
    if (key.empty()) throw input_error("config: empty key");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw input_error("config: unterminated array");
      Json arr = Json::array();
      std::string body = value.substr(1, value.size() - 2);
      std::size_t pos = 0;
      while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        const std::string item = body.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.find_first_not_of(" \t") != std::string::npos)
          arr.push_back(parse_toml_scalar(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      out[key] = arr;
    } else {
      out[key] = parse_toml_scalar(value);
    }
  }
  return out;
}

}  // namespace

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config file not found: " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw input_error("config file is not valid JSON: " + path);
    return j;
  }
  return parse_toml_subset(in);
}

}  // namespace rq
