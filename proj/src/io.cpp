#include "mrsl/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mrsl {

std::string trim(const std::string& text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = text.find_last_not_of(" \t\r\n");
  return text.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty()) throw InvalidArgument("expected a number, got an empty field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw InvalidArgument("not a number: '" + t + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidArgument("not a non-negative integer: '" + t + "'");
  }
  return static_cast<std::size_t>(std::stoull(t));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

// ------------------------------------------------------------------ points

void write_points(std::ostream& os, const LabeledSample& sample) {
  const std::size_t D = sample.observed.dim;
  const bool latent = sample.latent.has_value();
  os << "# mrsl-points v1 fingerprint=" << (sample.fingerprint.empty() ? "none" : sample.fingerprint)
     << " D=" << D << " n=" << sample.size() << " latent=" << (latent ? 1 : 0) << "\n";
  std::string line;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    line.clear();
    for (double v : sample.observed.row(i)) {
      line += format_double(v);
      line += ',';
    }
    if (latent) {
      for (double v : sample.latent->row(i)) {
        line += format_double(v);
        line += ',';
      }
    }
    line += std::to_string(sample.origin[i]);
    line += '\n';
    os << line;
  }
}

LabeledSample read_points(std::istream& is) {
  LabeledSample out;
  std::string line;
  std::size_t D = 0, n_expected = 0;
  bool header = false, latent = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      if (t.rfind("# mrsl-points v1", 0) == 0) {
        header = true;
        std::istringstream hs(t.substr(16));
        std::string kv;
        while (hs >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
          if (key == "fingerprint") out.fingerprint = value == "none" ? "" : value;
          if (key == "D") D = parse_size(value);
          if (key == "n") n_expected = parse_size(value);
          if (key == "latent") latent = value == "1";
        }
        if (D == 0) throw InvalidArgument("points file: header lacks D");
        out.observed = PointCloud(D);
        if (latent) out.latent = PointCloud(D);
      }
      continue;
    }
    const auto fields = split(t, ',');
    std::vector<double> values;
    values.reserve(fields.size());
    try {
      for (const auto& f : fields) values.push_back(parse_double(f));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("points file line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!header) {
      if (D == 0) {
        D = values.size();
        out.observed = PointCloud(D);
      }
      if (values.size() != D) {
        throw InvalidArgument("points file line " + std::to_string(line_no) + ": expected " +
                              std::to_string(D) + " columns");
      }
      out.observed.push_back(values);
      out.origin.push_back(0);
      continue;
    }
    const std::size_t want = D * (latent ? 2 : 1) + 1;
    if (values.size() != want) {
      throw InvalidArgument("points file line " + std::to_string(line_no) + ": expected " +
                            std::to_string(want) + " columns");
    }
    out.observed.push_back(std::span<const double>(values.data(), D));
    if (latent) out.latent->push_back(std::span<const double>(values.data() + D, D));
    out.origin.push_back(static_cast<int>(values.back()));
  }
  if (out.observed.empty()) throw InvalidArgument("points file: no points");
  if (header && n_expected != out.size()) {
    throw InvalidArgument("points file: header announces " + std::to_string(n_expected) +
                          " points, found " + std::to_string(out.size()));
  }
  return out;
}

// -------------------------------------------------------------- dendrogram

void write_dendrogram(std::ostream& os, const Dendrogram& dendrogram) {
  const auto& act = dendrogram.activation();
  std::vector<std::size_t> order(act.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return act[a] < act[b]; });
  os << "n " << act.size() << "\n";
  for (std::size_t i : order) os << "A " << i << " " << format_double(act[i]) << "\n";
  for (const Merge& m : dendrogram.merges()) {
    os << "M " << format_double(m.radius) << " " << m.a << " " << m.b << "\n";
  }
}

Dendrogram read_dendrogram(std::istream& is) {
  std::string line, tag;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<double> act;
  std::vector<bool> seen;
  std::vector<Merge> merges;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    ls >> tag;
    std::string a, b, c;
    const auto where = [&] { return "dendrogram line " + std::to_string(line_no) + ": "; };
    if (tag == "n") {
      ls >> a;
      n = parse_size(a);
      have_n = true;
      act.assign(n, kInfinity);
      seen.assign(n, false);
    } else if (tag == "A") {
      if (!have_n) throw InvalidArgument(where() + "activation before the n line");
      ls >> a >> b;
      const std::size_t i = parse_size(a);
      if (i >= n || seen[i]) throw InvalidArgument(where() + "bad or repeated point index");
      act[i] = parse_double(b);
      seen[i] = true;
    } else if (tag == "M") {
      ls >> a >> b >> c;
      merges.push_back({parse_double(a), parse_size(b), parse_size(c)});
    } else {
      throw InvalidArgument(where() + "unknown record '" + tag + "'");
    }
  }
  if (!have_n) throw InvalidArgument("dendrogram file: missing n line");
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidArgument("dendrogram file: missing activation lines");
  }
  return Dendrogram(std::move(act), std::move(merges));
}

// --------------------------------------------------------------- partition

void write_partition(std::ostream& os, const Partition& partition, std::size_t n) {
  os << "n " << n << "\n";
  for (const auto& comp : partition) {
    os << "C " << (comp.empty() ? 0 : comp.front()) << " " << comp.size();
    for (std::size_t i : comp) os << " " << i;
    os << "\n";
  }
}

Partition read_partition(std::istream& is) {
  std::string line, tag;
  Partition out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "n") continue;
    if (tag != "C") throw InvalidArgument("partition file: unknown record '" + tag + "'");
    std::string tok;
    ls >> tok;
    ls >> tok;
    const std::size_t count = parse_size(tok);
    std::vector<std::size_t> comp;
    while (ls >> tok) comp.push_back(parse_size(tok));
    if (comp.size() != count) throw InvalidArgument("partition file: member count mismatch");
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace mrsl
