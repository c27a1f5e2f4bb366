#include "lab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lab/errors.hpp"

namespace lab {
namespace {

std::string trim(const std::string& text) {
  const char* ws = " \t\r\n";
  const std::size_t begin = text.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  const std::size_t end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

double to_double(const std::string& text, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || t.empty()) {
    throw ParseError("expected a number, got '" + text + "'", line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("number must be finite: '" + text + "'", line);
  }
  return value;
}

long long to_ll(const std::string& text, int line) {
  const std::string t = trim(text);
  long long value = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || t.empty()) {
    throw ParseError("expected an integer, got '" + text + "'", line);
  }
  return value;
}

int to_int(const std::string& text, int line) {
  const long long value = to_ll(text, line);
  if (value < -2147483648LL || value > 2147483647LL) {
    throw ParseError("integer out of range: '" + text + "'", line);
  }
  return static_cast<int>(value);
}

std::uint64_t to_u64(const std::string& text, int line) {
  const std::string t = trim(text);
  std::uint64_t value = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || t.empty()) {
    throw ParseError("expected a nonnegative integer, got '" + text + "'",
                     line);
  }
  return value;
}

bool to_bool(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParseError("expected true/false, got '" + text + "'", line);
}

std::vector<double> to_double_list(const std::string& text, int line) {
  std::vector<double> values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(to_double(part, line));
  }
  return values;
}

std::vector<int> to_int_list(const std::string& text, int line) {
  std::vector<int> values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(to_int(part, line));
  }
  return values;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTheorem1Sweep: return "Theorem1Sweep";
    case ExperimentKind::kTheorem2Check: return "Theorem2Check";
    case ExperimentKind::kRademacherSweep: return "RademacherSweep";
    case ExperimentKind::kProp1: return "Prop1";
    case ExperimentKind::kNonMonotone: return "NonMonotone";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& text) {
  if (text == "Theorem1Sweep") return ExperimentKind::kTheorem1Sweep;
  if (text == "Theorem2Check") return ExperimentKind::kTheorem2Check;
  if (text == "RademacherSweep") return ExperimentKind::kRademacherSweep;
  if (text == "Prop1") return ExperimentKind::kProp1;
  if (text == "NonMonotone") return ExperimentKind::kNonMonotone;
  throw ParseError("unknown experiment kind: '" + text + "'", 0);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError("seed list is empty", 0);
  const std::size_t range = t.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = to_u64(t.substr(0, range), 0);
    const std::uint64_t hi = to_u64(t.substr(range + 2), 0);
    if (hi < lo) throw ParseError("seed range is reversed: '" + t + "'", 0);
    if (hi - lo >= 100000) {
      throw ParseError("seed range is too large: '" + t + "'", 0);
    }
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split(t, ',')) {
    seeds.push_back(to_u64(part, 0));
  }
  return seeds;
}

ResNetSpec parse_arch(const std::string& text, int d_x) {
  ResNetSpec spec;
  spec.d_x = d_x;
  const std::string t = trim(text);
  if (!t.empty() && t != "none") {
    for (const std::string& raw : split(t, ',')) {
      const std::string token = trim(raw);
      const std::vector<std::string> parts = split(token, ':');
      if (parts.size() == 1 && parts[0] == "sv") {
        spec.blocks.push_back(BlockSpec::simple_vector());
      } else if (parts.size() == 3 && parts[0] == "g" && parts[2] == "relu") {
        spec.blocks.push_back(BlockSpec::general_relu(to_int(parts[1], 0)));
      } else if (parts.size() == 4 && parts[0] == "g" &&
                 parts[3] == "affine") {
        spec.blocks.push_back(
            BlockSpec::general_affine(to_int(parts[1], 0), to_int(parts[2], 0)));
      } else if (parts.size() == 2 && parts[0] == "first" &&
                 parts[1] == "relu") {
        spec.blocks.push_back(BlockSpec::first_relu(d_x));
      } else if (parts.size() == 3 && parts[0] == "first" &&
                 parts[2] == "affine") {
        spec.blocks.push_back(BlockSpec::first_affine(d_x, to_int(parts[1], 0)));
      } else {
        throw ParseError("bad block token: '" + token + "'", 0);
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  bool have_kind = false;

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::size_t comment = raw.find('#');
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);
    if (!seen.insert(key).second) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }

    if (key == "kind") {
      try {
        config.kind = experiment_kind_from_string(value);
      } catch (const ParseError&) {
        throw ParseError("unknown experiment kind: '" + value + "'", line_no);
      }
      have_kind = true;
    } else if (key == "output") {
      config.output = value;
    } else if (key == "loss") {
      try {
        config.loss = loss_from_string(value);
      } catch (const ParseError&) {
        throw ParseError("unknown loss: '" + value + "'", line_no);
      }
    } else if (key == "dataset") {
      config.dataset = value;
    } else if (key == "arch") {
      config.arch = value;
    } else if (key == "seeds") {
      try {
        config.seeds = parse_seed_list(value);
      } catch (const ParseError&) {
        throw ParseError("bad seed list: '" + value + "'", line_no);
      }
    } else if (key == "tol") {
      config.tol = to_double(value, line_no);
      if (!(config.tol > 0.0)) throw ParseError("tol must be positive", line_no);
    } else if (key == "max_iters") {
      config.max_iters = to_int(value, line_no);
      if (config.max_iters < 1) {
        throw ParseError("max_iters must be positive", line_no);
      }
    } else if (key == "rho") {
      config.rho = to_double_list(value, line_no);
    } else if (key == "trials") {
      config.trials = to_int(value, line_no);
      if (config.trials < 1) throw ParseError("trials must be positive", line_no);
    } else if (key == "restarts") {
      config.restarts = to_int(value, line_no);
      if (config.restarts < 1) {
        throw ParseError("restarts must be positive", line_no);
      }
    } else if (key == "samples") {
      config.samples = to_int(value, line_no);
      if (config.samples < 1) {
        throw ParseError("samples must be positive", line_no);
      }
    } else if (key == "d_x") {
      config.d_x = to_int(value, line_no);
      if (config.d_x < 1) throw ParseError("d_x must be positive", line_no);
    } else if (key == "m") {
      config.m = to_double_list(value, line_no);
    } else if (key == "widths") {
      config.widths = to_int_list(value, line_no);
    } else if (key == "exhaustive") {
      config.exhaustive = to_bool(value, line_no);
    } else if (key == "ascent_iters") {
      config.ascent_iters = to_int(value, line_no);
      if (config.ascent_iters < 0) {
        throw ParseError("ascent_iters must be nonnegative", line_no);
      }
    } else {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
  }

  if (!have_kind) throw ParseError("missing required key: kind", 0);
  if (config.kind == ExperimentKind::kTheorem1Sweep ||
      config.kind == ExperimentKind::kTheorem2Check) {
    if (config.arch.empty()) {
      throw ParseError("missing required key: arch", 0);
    }
    if (config.dataset.empty()) {
      throw ParseError("missing required key: dataset", 0);
    }
  }
  return config;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) throw ParseError("cannot open config file: " + path, 0);
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace lab
