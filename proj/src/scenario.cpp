#include "restless/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace restless {

namespace {

const std::map<std::string, Algorithm>& algorithm_names() {
  static const std::map<std::string, Algorithm> names = {
      {"colored_ucrl2", Algorithm::colored_ucrl2}, {"doubling", Algorithm::doubling},
      {"mixing_guess", Algorithm::mixing_guess},   {"state_discovery", Algorithm::state_discovery},
      {"best_fixed_arm", Algorithm::best_fixed_arm}, {"round_robin", Algorithm::round_robin},
      {"myopic", Algorithm::myopic},               {"oracle_optimal", Algorithm::oracle_optimal},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

struct ArmDraft {
  int line = 0;
  std::string name;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::vector<double> rewards;
  RewardNoise noise = RewardNoise::bernoulli;
  std::string initial_mode = "stationary";
  std::vector<std::string> initial_args;
  int initial_line = 0;
  int period = 1;
};

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [name, value] : algorithm_names())
    if (value == a) return name;
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  const auto it = algorithm_names().find(name);
  if (it == algorithm_names().end()) throw std::invalid_argument("unknown algorithm '" + name + "'");
  return it->second;
}

void Scenario::validate() const {
  instance.validate();
  if (horizon < static_cast<std::int64_t>(instance.arm_count()))
    throw ValidationError("horizon must be at least the number of arms");
  if (replications < 1) throw ValidationError("replications must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
  if (!(eps_oracle > 0.0 && eps_oracle < 2.0)) throw ValidationError("eps_oracle must lie in (0,2)");
}

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

double parse_number(const std::string& text) {
  auto parse_plain = [&](std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
  };
  const std::string_view s(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_plain(s);
  const double num = parse_plain(s.substr(0, slash));
  const double den = parse_plain(s.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return num / den;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  Scenario sc;
  std::vector<ArmDraft> drafts;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](int line, const std::string& msg) { return ConfigError(source, line, msg); };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[arm]") throw fail(line_no, "unknown section " + line);
      drafts.emplace_back();
      drafts.back().line = line_no;
      drafts.back().name = "arm" + std::to_string(drafts.size() - 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto words = split(value);
    auto number = [&](const std::string& w) {
      try {
        return parse_number(w);
      } catch (const std::invalid_argument& e) {
        throw fail(line_no, "field '" + key + "': " + e.what());
      }
    };
    auto integer = [&]() -> std::int64_t {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw fail(line_no, "field '" + key + "': expected an integer, got '" + value + "'");
      return v;
    };
    auto numbers = [&]() {
      std::vector<double> out;
      for (const auto& w : words) out.push_back(number(w));
      return out;
    };

    if (drafts.empty()) {
      if (key == "name") sc.name = value;
      else if (key == "horizon") sc.horizon = integer();
      else if (key == "delta") sc.delta = number(value);
      else if (key == "replications") sc.replications = static_cast<int>(integer());
      else if (key == "seed") sc.seed = static_cast<std::uint64_t>(integer());
      else if (key == "eps_oracle") sc.eps_oracle = number(value);
      else if (key == "algorithm") {
        try {
          sc.algorithm = algorithm_from_string(value);
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, e.what());
        }
      } else if (key == "support") {
        if (value == "unrestricted") sc.support = BallSupport::unrestricted;
        else if (value == "successors") sc.support = BallSupport::successors;
        else throw fail(line_no, "field 'support': expected unrestricted or successors");
      } else {
        throw fail(line_no, "unknown field '" + key + "'");
      }
      continue;
    }

    auto& arm = drafts.back();
    if (key == "name") arm.name = value;
    else if (key == "states") arm.labels = words;
    else if (key == "row") {
      auto row = numbers();
      double sum = 0.0;
      for (double v : row) {
        if (!(v >= 0.0 && v <= 1.0)) throw fail(line_no, "row " + std::to_string(arm.rows.size()) + " of arm '" + arm.name + "' has an entry outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw fail(line_no, "row " + std::to_string(arm.rows.size()) + " of arm '" + arm.name + "' sums to " +
                                format_number(sum) + ", not 1");
      arm.rows.push_back(std::move(row));
    } else if (key == "rewards") {
      arm.rewards = numbers();
    } else if (key == "noise") {
      if (value == "bernoulli") arm.noise = RewardNoise::bernoulli;
      else if (value == "deterministic") arm.noise = RewardNoise::deterministic;
      else throw fail(line_no, "field 'noise': expected bernoulli or deterministic");
    } else if (key == "initial") {
      if (words.empty()) throw fail(line_no, "field 'initial' is empty");
      arm.initial_mode = words[0];
      arm.initial_args.assign(words.begin() + 1, words.end());
      arm.initial_line = line_no;
      if (arm.initial_mode != "stationary" && arm.initial_mode != "point" && arm.initial_mode != "dist")
        throw fail(line_no, "field 'initial': expected stationary, point <label> or dist <p...>");
      if (arm.initial_mode == "dist")
        for (const auto& w : arm.initial_args) number(w);
    } else if (key == "period") {
      arm.period = static_cast<int>(integer());
      if (arm.period < 1) throw fail(line_no, "field 'period' must be >= 1");
    } else {
      throw fail(line_no, "unknown arm field '" + key + "'");
    }
  }

  if (drafts.empty()) throw fail(0, "no [arm] sections");
  for (auto& d : drafts) {
    if (d.rows.empty()) throw fail(d.line, "arm '" + d.name + "' has no 'row' lines");
    const std::size_t n = d.rows.size();
    for (std::size_t i = 0; i < n; ++i)
      if (d.rows[i].size() != n)
        throw fail(d.line, "arm '" + d.name + "': row " + std::to_string(i) + " has " +
                               std::to_string(d.rows[i].size()) + " entries, expected " + std::to_string(n));
    if (d.labels.empty())
      for (std::size_t i = 0; i < n; ++i) d.labels.push_back(std::to_string(i));
    if (d.labels.size() != n) throw fail(d.line, "arm '" + d.name + "': 'states' lists a different number of states");
    if (d.rewards.size() != n) throw fail(d.line, "arm '" + d.name + "': 'rewards' must have one entry per state");
    std::vector<double> initial;
    if (d.initial_mode == "point") {
      if (d.initial_args.size() != 1) throw fail(d.initial_line, "field 'initial': point takes one state label");
      const auto it = std::find(d.labels.begin(), d.labels.end(), d.initial_args[0]);
      if (it == d.labels.end()) throw fail(d.initial_line, "field 'initial': unknown state '" + d.initial_args[0] + "'");
      initial.assign(n, 0.0);
      initial[static_cast<std::size_t>(it - d.labels.begin())] = 1.0;
    } else if (d.initial_mode == "dist") {
      for (const auto& w : d.initial_args) initial.push_back(parse_number(w));
      if (initial.size() != n) throw fail(d.initial_line, "field 'initial': dist needs one probability per state");
    }
    try {
      ArmSpec arm{d.name, d.labels, TransitionMatrix(d.rows), d.rewards, d.noise, initial, d.period};
      arm.validate();
      sc.instance.arms.push_back(std::move(arm));
    } catch (const ValidationError& e) {
      throw fail(d.line, std::string("arm '") + d.name + "': " + e.what());
    }
  }
  for (std::size_t i = 0; i < sc.instance.arms.size(); ++i)
    for (std::size_t j = i + 1; j < sc.instance.arms.size(); ++j)
      if (sc.instance.arms[i].name == sc.instance.arms[j].name)
        throw fail(0, "duplicate arm name '" + sc.instance.arms[i].name + "'");
  try {
    sc.validate();
  } catch (const ValidationError& e) {
    throw fail(0, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream os;
  os << "name = " << sc.name << "\n";
  os << "horizon = " << sc.horizon << "\n";
  os << "delta = " << format_number(sc.delta) << "\n";
  os << "algorithm = " << to_string(sc.algorithm) << "\n";
  os << "replications = " << sc.replications << "\n";
  os << "seed = " << sc.seed << "\n";
  os << "eps_oracle = " << format_number(sc.eps_oracle) << "\n";
  os << "support = " << (sc.support == BallSupport::unrestricted ? "unrestricted" : "successors") << "\n";
  for (const auto& arm : sc.instance.arms) {
    os << "\n[arm]\nname = " << arm.name << "\nstates =";
    for (const auto& l : arm.labels) os << " " << l;
    os << "\n";
    for (std::size_t s = 0; s < arm.state_count(); ++s) {
      os << "row =";
      for (double v : arm.transitions.row(s)) os << " " << format_number(v);
      os << "\n";
    }
    os << "rewards =";
    for (double v : arm.rewards) os << " " << format_number(v);
    os << "\nnoise = " << (arm.noise == RewardNoise::bernoulli ? "bernoulli" : "deterministic") << "\n";
    if (!arm.initial.empty()) {
      os << "initial = dist";
      for (double v : arm.initial) os << " " << format_number(v);
      os << "\n";
    }
    if (arm.assumed_period != 1) os << "period = " << arm.assumed_period << "\n";
  }
  return os.str();
}

}  // namespace restless
