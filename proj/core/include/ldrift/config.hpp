#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldrift/io.hpp"

namespace ldrift {

/// Experiment configuration in the grammar of docs/formats.md:
///
///   # comment
///   experiment = decay
///   [time]
///   dt = 1e-3          # inside [time] this is time.dt
///
/// Keys are checked against a fixed schema when they are read; unknown keys
/// and malformed values raise FormatError with the offending line.
class Config {
 public:
  enum class Kind { string, choice, number, integer, boolean, list };

  struct KeySpec {
    std::string key;
    Kind kind;
    std::string fallback;  ///< default as text; empty means "unset"
    std::vector<std::string> choices;
    std::string help;
  };

  static const std::vector<KeySpec>& schema();

  static Config parse(std::istream& is, const std::string& source);
  static Config load(const std::filesystem::path& path);

  /// Applies "key=value" from the command line; `index` numbers the override
  /// for error messages.
  void apply_override(const std::string& assignment, int index);

  bool has(const std::string& key) const;  ///< set explicitly (file or override)
  std::string get_string(const std::string& key) const;
  double get_number(const std::string& key) const;
  std::int64_t get_integer(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  /// Error pointing at the line that set `key` (line 0 when it was defaulted).
  FormatError invalid(const std::string& key, const std::string& what) const;

  /// Every schema key with its effective value (defaults included, unset keys omitted).
  nlohmann::json echo() const;
  const std::string& source() const { return source_; }
  const std::filesystem::path& directory() const { return directory_; }

 private:
  struct Entry {
    std::string value;
    std::string source;
    int line;
  };
  void set(const std::string& key, const std::string& value, const std::string& source, int line);
  const KeySpec& spec(const std::string& key) const;
  std::optional<Entry> lookup(const std::string& key) const;

  std::map<std::string, Entry> values_;
  std::string source_;
  std::filesystem::path directory_;
};

}  // namespace ldrift
