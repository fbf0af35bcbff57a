#include "optocav/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "optocav/errors.hpp"

namespace optocav {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view value, std::string_view key, int line) {
  const std::string v(value);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("value '" + v + "' for key '" + std::string(key) +
                      "' is not a decimal number", line);
  return out;
}

int parse_int(std::string_view value, std::string_view key, int line) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("value '" + std::string(value) + "' for key '" + std::string(key) +
                      "' is not an integer", line);
  return out;
}

}  // namespace

Configuration parse_config_text(std::string_view text) {
  Configuration cfg;
  std::set<std::string> seen;
  std::istringstream stream{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value', got '" + std::string(line) + "'", line_no);
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (value.empty()) throw ConfigError("missing value for key '" + key + "'", line_no);
    if (!seen.insert(key).second)
      throw ConfigError("duplicate key '" + key + "'", line_no);

    if (key == "detuning0") cfg.model.detuning0 = parse_double(value, key, line_no);
    else if (key == "mirror_freq") cfg.model.mirror_freq = parse_double(value, key, line_no);
    else if (key == "mirror_damping") cfg.model.mirror_damping = parse_double(value, key, line_no);
    else if (key == "coupling") cfg.model.coupling = parse_double(value, key, line_no);
    else if (key == "thermal_occupation")
      cfg.model.thermal_occupation = parse_double(value, key, line_no);
    else if (key == "pump_amplitude") cfg.model.pump_amplitude = parse_double(value, key, line_no);
    else if (key == "pump_waist") cfg.model.pump_waist = parse_double(value, key, line_no);
    else if (key == "half_extent") cfg.half_extent = parse_int(value, key, line_no);
    else if (key == "box_side") cfg.box_side = parse_double(value, key, line_no);
    else throw ConfigError("unknown key '" + key + "'", line_no);
  }

  try {
    cfg.model.validate();
    if (cfg.half_extent < 0) throw DomainError("half_extent must be >= 0");
    if (!(cfg.box_side > 0.0)) throw DomainError("box_side must be > 0");
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

Configuration parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace optocav
