#include "phi4lab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace phi4lab::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

bool parse_int(const std::string& s, long long& v) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end && !s.empty();
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool& v) {
  if (s == "true" || s == "1" || s == "yes") return v = true, true;
  if (s == "false" || s == "0" || s == "no") return v = false, true;
  return false;
}

const KeySpec* find_key(const Schema& schema, const std::string& name) {
  for (const auto& k : schema)
    if (k.name == name) return &k;
  return nullptr;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::Int: return "integer";
    case ValueType::Double: return "number";
    case ValueType::Bool: return "boolean";
    case ValueType::String: return "string";
    case ValueType::DoubleList: return "comma-separated numbers";
    case ValueType::IntList: return "comma-separated integers";
  }
  return "?";
}

void check_value(const KeySpec& spec, const std::string& value, const std::string& origin) {
  if (!value_matches(spec.type, value))
    throw ConfigError(origin + ": key '" + spec.name + "' expects " + type_name(spec.type) + ", got '" + value + "'");
}

const std::string& lookup(const Config& c, const std::string& key) {
  auto it = c.find(key);
  if (it == c.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

}  // namespace

bool value_matches(ValueType type, const std::string& text) {
  long long i;
  double d;
  bool b;
  switch (type) {
    case ValueType::Int: return parse_int(text, i);
    case ValueType::Double: return parse_double(text, d);
    case ValueType::Bool: return parse_bool(text, b);
    case ValueType::String: return true;
    case ValueType::DoubleList:
      for (const auto& s : split(text, ','))
        if (!parse_double(s, d)) return false;
      return !text.empty();
    case ValueType::IntList:
      for (const auto& s : split(text, ','))
        if (!parse_int(s, i)) return false;
      return !text.empty();
  }
  return false;
}

Config parse_config(const std::string& text, const Schema& schema, const std::string& origin) {
  Config out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_key(schema, key);
    if (!spec) throw ConfigError(where + ": unknown key '" + key + "'");
    check_value(*spec, value, where);
    out[key] = value;
  }
  return out;
}

Config read_config_file(const fs::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), schema, path.string());
}

Config resolve_config(const Config& file, const Config& overrides, const Schema& schema) {
  Config out;
  for (const auto& spec : schema) {
    if (auto it = overrides.find(spec.name); it != overrides.end()) {
      check_value(spec, it->second, "flag --" + spec.name);
      out[spec.name] = it->second;
    } else if (auto jt = file.find(spec.name); jt != file.end()) {
      out[spec.name] = jt->second;
    } else if (!spec.fallback.empty()) {
      out[spec.name] = spec.fallback;
    } else if (spec.required) {
      throw ConfigError("missing required key '" + spec.name + "'");
    }
  }
  for (const auto& [k, v] : overrides)
    if (!find_key(schema, k)) throw ConfigError("unknown key '" + k + "'");
  return out;
}

bool has(const Config& c, const std::string& key) { return c.count(key) > 0; }

int get_int(const Config& c, const std::string& key) {
  long long v = 0;
  if (!parse_int(lookup(c, key), v)) throw ConfigError("key '" + key + "' is not an integer");
  return int(v);
}

double get_double(const Config& c, const std::string& key) {
  double v = 0;
  if (!parse_double(lookup(c, key), v)) throw ConfigError("key '" + key + "' is not a number");
  return v;
}

bool get_bool(const Config& c, const std::string& key) {
  bool v = false;
  if (!parse_bool(lookup(c, key), v)) throw ConfigError("key '" + key + "' is not a boolean");
  return v;
}

const std::string& get_string(const Config& c, const std::string& key) { return lookup(c, key); }

std::vector<double> get_doubles(const Config& c, const std::string& key) {
  std::vector<double> out;
  for (const auto& s : split(lookup(c, key), ',')) {
    double v;
    if (!parse_double(s, v)) throw ConfigError("key '" + key + "' has a non-numeric entry '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> get_ints(const Config& c, const std::string& key) {
  std::vector<int> out;
  for (const auto& s : split(lookup(c, key), ',')) {
    long long v;
    if (!parse_int(s, v)) throw ConfigError("key '" + key + "' has a non-integer entry '" + s + "'");
    out.push_back(int(v));
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
}

std::vector<ArtifactRecord> collect_artifacts(const fs::path& dir) {
  std::vector<ArtifactRecord> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir);
    if (rel == kManifestName) continue;
    out.push_back({rel.generic_string(), sha256_file(e.path()), e.file_size()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "command=" << m.command << '\n';
  out << "tool_version=" << m.tool_version << '\n';
  out << "wall_clock_seconds=" << format_number(m.wall_clock_seconds) << '\n';
  for (const auto& [k, v] : m.config) out << "config." << k << '=' << v << '\n';
  for (const auto& a : m.artifacts)
    out << "artifact=" << a.path << " sha256=" << a.sha256 << " bytes=" << a.bytes << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed manifest line: " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "command") {
      m.command = value;
    } else if (key == "tool_version") {
      m.tool_version = value;
    } else if (key == "wall_clock_seconds") {
      m.wall_clock_seconds = std::stod(value);
    } else if (key.rfind("config.", 0) == 0) {
      m.config[key.substr(7)] = value;
    } else if (key == "artifact") {
      std::istringstream fields(value);
      ArtifactRecord a;
      std::string sha, bytes;
      fields >> a.path >> sha >> bytes;
      if (sha.rfind("sha256=", 0) != 0 || bytes.rfind("bytes=", 0) != 0)
        throw std::runtime_error("malformed artifact line: " + line);
      a.sha256 = sha.substr(7);
      a.bytes = std::stoull(bytes.substr(6));
      m.artifacts.push_back(a);
    } else {
      throw std::runtime_error("unknown manifest field: " + key);
    }
  }
  return m;
}

std::vector<std::string> check_artifacts(const Manifest& m, const fs::path& dir) {
  std::vector<std::string> bad;
  for (const auto& a : m.artifacts) {
    const fs::path p = dir / a.path;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec) || fs::file_size(p) != a.bytes || sha256_file(p) != a.sha256) bad.push_back(a.path);
  }
  return bad;
}

}  // namespace phi4lab::io
