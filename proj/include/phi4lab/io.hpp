#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace phi4lab::io {

enum class ValueType { Int, Double, Bool, String, DoubleList, IntList };

struct KeySpec {
  std::string name;
  ValueType type;
  bool required = false;
  std::string fallback;  // used when neither file nor flag sets the key; empty means unset
  std::string help;
};
using Schema = std::vector<KeySpec>;

// Resolved key -> text value, ordered so manifests are stable.
using Config = std::map<std::string, std::string>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool value_matches(ValueType type, const std::string& text);

// Flat "key = value" lines; '#' starts a comment. Unknown keys and type
// mismatches throw ConfigError naming the key.
Config parse_config(const std::string& text, const Schema& schema, const std::string& origin = "config");
Config read_config_file(const std::filesystem::path& path, const Schema& schema);

// file values, then overrides, then fallbacks; missing required keys throw.
Config resolve_config(const Config& file, const Config& overrides, const Schema& schema);

int get_int(const Config& c, const std::string& key);
double get_double(const Config& c, const std::string& key);
bool get_bool(const Config& c, const std::string& key);
const std::string& get_string(const Config& c, const std::string& key);
std::vector<double> get_doubles(const Config& c, const std::string& key);
std::vector<int> get_ints(const Config& c, const std::string& key);
bool has(const Config& c, const std::string& key);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Numbers are written with %.17g so files round-trip exactly.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string format_number(double x);

struct ArtifactRecord {
  std::string path;  // relative to the manifest directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::string command;
  std::string tool_version;
  Config config;
  std::vector<ArtifactRecord> artifacts;
  double wall_clock_seconds = 0;
};

inline constexpr const char* kManifestName = "manifest.txt";

// Checksums every regular file under dir except the manifest itself, sorted by path.
std::vector<ArtifactRecord> collect_artifacts(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

// Paths whose current checksum or size differs from the record (or that are missing).
std::vector<std::string> check_artifacts(const Manifest& m, const std::filesystem::path& dir);

}  // namespace phi4lab::io
