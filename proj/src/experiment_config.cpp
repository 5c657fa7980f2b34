#include "mrsl/experiment_config.hpp"

#include <map>
#include <sstream>
#include <utility>

#include "mrsl/io.hpp"

namespace mrsl {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument("expected a boolean, got '" + v + "'");
}

using Section = std::vector<std::pair<std::string, std::string>>;

void expand(const ExperimentCell& base, const Section& section, std::size_t at,
            std::vector<ExperimentCell>& out) {
  if (at == section.size()) {
    out.push_back(base);
    return;
  }
  const auto& [key, value] = section[at];
  for (const std::string& item : split(value, ',')) {
    ExperimentCell c = base;
    apply_cell_key(c, key, item);
    expand(c, section, at + 1, out);
  }
}

}  // namespace

void apply_cell_key(ExperimentCell& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "instance") {
    if (v != "mixture" && v != "lower_bound" && v != "two_level") {
      throw InvalidArgument("instance must be mixture, lower_bound or two_level");
    }
    c.instance = v;
  } else if (key == "n") {
    c.n = parse_size(v);
  } else if (key == "d") {
    c.d = static_cast<int>(parse_size(v));
  } else if (key == "D") {
    c.D = parse_size(v);
  } else if (key == "epsilon") {
    c.epsilon = parse_double(v);
  } else if (key == "tau") {
    c.tau = parse_double(v);
  } else if (key == "sigma") {
    c.sigma = parse_double(v);
  } else if (key == "lambda") {
    c.lambda = parse_double(v);
  } else if (key == "clusters") {
    c.clusters = static_cast<int>(parse_size(v));
  } else if (key == "bump_weight") {
    c.bump_weight = parse_double(v);
  } else if (key == "noise") {
    if (v == "none") {
      c.noise.kind = NoiseSpec::Kind::None;
    } else if (v == "clutter") {
      c.noise.kind = NoiseSpec::Kind::Clutter;
    } else if (v == "additive") {
      c.noise.kind = NoiseSpec::Kind::Additive;
      c.noise.shell = false;
    } else if (v == "additive_shell") {
      c.noise.kind = NoiseSpec::Kind::Additive;
      c.noise.shell = true;
    } else {
      throw InvalidArgument("noise must be none, clutter, additive or additive_shell");
    }
  } else if (key == "pi") {
    c.noise.pi = parse_double(v);
  } else if (key == "box") {
    c.noise.box_half_width = parse_double(v);
  } else if (key == "theta") {
    c.noise.theta = parse_double(v);
  } else if (key == "regime") {
    c.regime = parse_regime(v);
  } else if (key == "delta") {
    c.delta = parse_double(v);
  } else if (key == "C0") {
    c.constants.C0 = parse_double(v);
  } else if (key == "C1") {
    c.constants.C1 = parse_double(v);
  } else if (key == "C2") {
    c.constants.C2 = parse_double(v);
  } else if (key == "k") {
    c.k = parse_size(v);
  } else if (key == "rule") {
    c.rule = RuleChoice::parse(v);
  } else if (key == "adaptive") {
    c.adaptive = parse_bool(v);
  } else if (key == "scan") {
    c.scan = parse_bool(v);
  } else if (key == "gate") {
    c.enforce_gate = parse_bool(v);
  } else if (key == "accept_min") {
    c.accept_min = parse_double(v);
  } else if (key == "label") {
    c.label = v;
  } else {
    throw InvalidArgument("unknown experiment key '" + key + "'");
  }
}

ExperimentPlan parse_experiment_config(const std::string& text) {
  ExperimentPlan plan;
  Section defaults;
  std::vector<Section> cells;
  bool in_cell = false;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto where = "experiment config line " + std::to_string(line_no) + ": ";
    if (t.front() == '[') {
      if (t != "[cell]") throw InvalidArgument(where + "only [cell] sections are allowed");
      cells.emplace_back();
      in_cell = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected key = value");
    const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
    if (!in_cell && key == "trials") {
      plan.trials = parse_size(value);
    } else if (!in_cell && key == "seed") {
      plan.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else {
      (in_cell ? cells.back() : defaults).emplace_back(key, value);
    }
  }
  if (cells.empty()) cells.emplace_back();
  for (const Section& cell : cells) {
    Section merged = defaults;
    for (const auto& kv : cell) {
      bool replaced = false;
      for (auto& m : merged) {
        if (m.first == kv.first) {
          m.second = kv.second;
          replaced = true;
        }
      }
      if (!replaced) merged.push_back(kv);
    }
    expand(ExperimentCell{}, merged, 0, plan.cells);
  }
  if (plan.trials < 1) throw InvalidArgument("experiment config: trials must be >= 1");
  return plan;
}

}  // namespace mrsl
